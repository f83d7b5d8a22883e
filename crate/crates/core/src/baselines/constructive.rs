//! Step-by-step construction: extend a partial solution with the best
//! feasible candidate until it is complete. With a random source the choice
//! among feasible candidates is uniform instead.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::BaselineError;
use crate::cop::validate::EPS;
use crate::cop::*;

/// Picks a candidate: lowest key (first on ties), or uniform with a source.
fn pick<K: PartialOrd, T>(cands: Vec<(K, T)>, rng: &mut Option<&mut dyn RngCore>) -> Option<T> {
    if cands.is_empty() {
        return None;
    }
    if let Some(r) = rng {
        let i = r.random_range(0..cands.len());
        return cands.into_iter().nth(i).map(|c| c.1);
    }
    let mut best: Option<(K, T)> = None;
    for c in cands {
        if best.as_ref().is_none_or(|b| c.0 < b.0) {
            best = Some(c);
        }
    }
    best.map(|b| b.1)
}

/// Minimum residual degree.
pub fn mis_with(inst: &MisInstance, mut rng: Option<&mut dyn RngCore>) -> Vec<usize> {
    let n = inst.num_vertices;
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &inst.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut out = Vec::new();
    loop {
        let cands: Vec<(usize, usize)> = (0..n).filter(|v| alive[*v]).map(|v| (degree[v], v)).collect();
        let Some(v) = pick(cands, &mut rng) else { break };
        out.push(v);
        let mut removed = vec![v];
        removed.extend(adj[v].iter().copied().filter(|u| alive[*u]));
        for &u in &removed {
            alive[u] = false;
        }
        for &u in &removed {
            for &w in &adj[u] {
                if alive[w] {
                    degree[w] -= 1;
                }
            }
        }
    }
    out
}

/// Nearest customer that fits the remaining load; a new route opens when
/// none does.
pub fn cvrp_with(inst: &CvrpInstance, mut rng: Option<&mut dyn RngCore>) -> Vec<Vec<usize>> {
    let n = inst.demands.len() - 1;
    let c = &inst.coordinates;
    let mut served = vec![false; n + 1];
    let mut routes = Vec::new();
    let mut route = Vec::new();
    let (mut cur, mut load) = (0, 0);
    let mut left = n;
    while left > 0 {
        let cands: Vec<(f64, usize)> = (1..=n)
            .filter(|j| !served[*j] && load + inst.demands[*j] <= inst.vehicle_capacity)
            .map(|j| (euclid(c[cur], c[j]), j))
            .collect();
        match pick(cands, &mut rng) {
            Some(j) => {
                served[j] = true;
                left -= 1;
                load += inst.demands[j];
                route.push(j);
                cur = j;
            }
            None => {
                routes.push(core::mem::take(&mut route));
                cur = 0;
                load = 0;
            }
        }
    }
    if !route.is_empty() {
        routes.push(route);
    }
    routes
}

/// Customers by decreasing demand; each goes to the fitting facility with
/// the lowest assignment cost plus, for a closed facility, its opening cost
/// pro-rated by the share of capacity used.
pub fn cflp_with(inst: &CflpInstance, mut rng: Option<&mut dyn RngCore>) -> Result<Vec<(usize, usize)>, BaselineError> {
    let m = inst.facility_capacities.len();
    let n = inst.customer_demands.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|c| (core::cmp::Reverse(inst.customer_demands[*c]), *c));
    let mut remaining: Vec<u32> = inst.facility_capacities.clone();
    let mut open = vec![false; m];
    let mut out = Vec::with_capacity(n);
    for c in order {
        let d = inst.customer_demands[c];
        let cands: Vec<(f64, usize)> = (0..m)
            .filter(|f| remaining[*f] >= d)
            .map(|f| {
                let mut cost = inst.assignment_costs[f][c] as f64;
                if !open[f] {
                    cost += inst.fixed_costs[f] * d as f64 / inst.facility_capacities[f] as f64;
                }
                (cost, f)
            })
            .collect();
        let f = pick(cands, &mut rng).ok_or(BaselineError::ConstructionStuck)?;
        remaining[f] -= d;
        open[f] = true;
        out.push((f, c));
    }
    Ok(out)
}

pub fn cflp(inst: &CflpInstance) -> Result<Vec<(usize, usize)>, BaselineError> {
    cflp_with(inst, None)
}

/// Next operation of every job on every compatible machine; earliest start
/// first, then shortest processing time.
pub fn fjsp_with(inst: &FjspInstance, mut rng: Option<&mut dyn RngCore>) -> Vec<Vec<(usize, f64)>> {
    let mut next = vec![0usize; inst.jobs.len()];
    let mut job_ready = vec![0u64; inst.jobs.len()];
    let mut mach_ready = vec![0u64; inst.num_machines];
    let mut out: Vec<Vec<(usize, f64)>> = inst.jobs.iter().map(|j| Vec::with_capacity(j.len())).collect();
    loop {
        let mut cands = Vec::new();
        for (j, job) in inst.jobs.iter().enumerate() {
            if next[j] < job.len() {
                for &(m, p) in &job[next[j]] {
                    let start = job_ready[j].max(mach_ready[m]);
                    cands.push(((start, p), (j, m, start, p)));
                }
            }
        }
        let Some((j, m, start, p)) = pick(cands, &mut rng) else { break };
        out[j].push((m, start as f64));
        next[j] += 1;
        job_ready[j] = start + p as u64;
        mach_ready[m] = start + p as u64;
    }
    out
}

/// Mode choice: per activity in index order, the cheapest mode (summed
/// non-renewable use relative to capacity) after which the rest can still
/// fit the budget.
pub fn mrcpsp_modes(inst: &MrcpspInstance) -> Result<Vec<usize>, BaselineError> {
    let n = inst.modes.len();
    let caps = &inst.nonrenewable_capacities;
    if caps.len() != 2 {
        return Err(BaselineError::Unsupported);
    }
    let k0 = caps[0] as usize;
    // tail[j][a]: least second-resource use of activities j.. with first-resource use <= a
    let mut tail = vec![vec![u32::MAX; k0 + 1]; n + 1];
    tail[n] = vec![0; k0 + 1];
    for j in (0..n).rev() {
        let mut row = vec![u32::MAX; k0 + 1];
        for a in 0..=k0 {
            for md in &inst.modes[j] {
                let u0 = md.nonrenewable[0] as usize;
                if u0 <= a && tail[j + 1][a - u0] != u32::MAX {
                    row[a] = row[a].min(tail[j + 1][a - u0] + md.nonrenewable[1]);
                }
            }
        }
        tail[j] = row;
    }
    let (mut used0, mut used1) = (0usize, 0u32);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut cands = Vec::new();
        for (mi, md) in inst.modes[j].iter().enumerate() {
            let a = used0 + md.nonrenewable[0] as usize;
            let b = used1 + md.nonrenewable[1];
            if a <= k0 && b <= caps[1] && tail[j + 1][k0 - a] <= caps[1] - b {
                let cost = md.nonrenewable[0] as f64 / caps[0].max(1) as f64 + md.nonrenewable[1] as f64 / caps[1].max(1) as f64;
                cands.push((cost, mi));
            }
        }
        let mi = pick(cands, &mut None).ok_or(BaselineError::ConstructionStuck)?;
        used0 += inst.modes[j][mi].nonrenewable[0] as usize;
        used1 += inst.modes[j][mi].nonrenewable[1];
        out.push(mi);
    }
    Ok(out)
}

/// Serial schedule generation: among activities whose predecessors are all
/// scheduled, the one with the earliest resource-feasible start goes next.
pub fn mrcpsp_with(inst: &MrcpspInstance, mut rng: Option<&mut dyn RngCore>) -> Result<Vec<(usize, i64)>, BaselineError> {
    let modes = mrcpsp_modes(inst)?;
    let n = inst.modes.len();
    let preds = inst.predecessors();
    let horizon: usize = (0..n).map(|j| inst.modes[j][modes[j]].duration as usize).sum::<usize>() + 1;
    let nr = inst.renewable_capacities.len();
    let mut profile = vec![vec![0u32; nr]; horizon];
    let mut finish: Vec<Option<i64>> = vec![None; n];
    for _ in 0..n {
        let mut cands = Vec::new();
        for j in 0..n {
            if finish[j].is_some() || preds[j].iter().any(|p| finish[*p].is_none()) {
                continue;
            }
            let md = &inst.modes[j][modes[j]];
            let mut t = preds[j].iter().map(|p| finish[*p].unwrap()).max().unwrap_or(0) as usize;
            let d = md.duration as usize;
            'search: loop {
                for tau in t..t + d {
                    for r in 0..nr {
                        if profile[tau][r] + md.renewable[r] > inst.renewable_capacities[r] {
                            t = tau + 1;
                            continue 'search;
                        }
                    }
                }
                break;
            }
            cands.push((t, (j, t)));
        }
        let (j, t) = pick(cands, &mut rng).ok_or(BaselineError::ConstructionStuck)?;
        let md = &inst.modes[j][modes[j]];
        for slot in profile.iter_mut().skip(t).take(md.duration as usize) {
            for r in 0..nr {
                slot[r] += md.renewable[r];
            }
        }
        finish[j] = Some((t + md.duration as usize) as i64);
    }
    Ok(modes.into_iter().zip(finish).map(|(m, f)| (m, f.unwrap())).collect())
}

struct Ev<'a> {
    inst: &'a CevrptwInstance,
}

impl Ev<'_> {
    /// Departure time and battery after moving from `cur` to `nxt`.
    fn arrive(&self, cur: usize, t: f64, b: f64, nxt: usize) -> Option<(f64, f64)> {
        let d = self.inst.distance_matrix[cur][nxt];
        if d > b + EPS {
            return None;
        }
        let (e, l) = self.inst.time_windows[nxt];
        let start = (t + d).max(e);
        if start > l + EPS {
            return None;
        }
        let battery = if self.inst.is_station(nxt) { self.inst.battery_capacity } else { b - d };
        Some((start + self.inst.service_times[nxt], battery))
    }

    /// Cheapest way back to the depot, directly or through one station.
    fn way_home(&self, cur: usize, t: f64, b: f64) -> Option<Vec<usize>> {
        if self.arrive(cur, t, b, 0).is_some() {
            return Some(Vec::new());
        }
        let d = &self.inst.distance_matrix;
        let mut best: Option<(f64, usize)> = None;
        for &s in &self.inst.station_indices {
            if let Some((ts, bs)) = self.arrive(cur, t, b, s) {
                if self.arrive(s, ts, bs, 0).is_some() {
                    let cost = d[cur][s] + d[s][0];
                    if best.is_none_or(|(c, _)| cost < c) {
                        best = Some((cost, s));
                    }
                }
            }
        }
        best.map(|(_, s)| vec![s])
    }
}

/// Nearest customer reachable directly or through one station, from which
/// the depot stays reachable; a route closes when no customer qualifies.
pub fn cevrptw_with(inst: &CevrptwInstance, mut rng: Option<&mut dyn RngCore>) -> Result<Vec<Vec<usize>>, BaselineError> {
    let ev = Ev { inst };
    let d = &inst.distance_matrix;
    let n = inst.num_customers();
    let full = inst.battery_capacity;
    let mut served = vec![false; n + 1];
    let mut left = n;
    let mut routes = Vec::new();
    let mut route: Vec<usize> = Vec::new();
    let (mut cur, mut t, mut b, mut load) = (0usize, 0.0f64, full, 0u32);
    while left > 0 {
        let mut cands = Vec::new();
        for c in 1..=n {
            if served[c] || load + inst.demands[c] > inst.vehicle_capacity {
                continue;
            }
            let mut best: Option<(f64, Vec<usize>, f64, f64)> = None;
            if let Some((tc, bc)) = ev.arrive(cur, t, b, c) {
                if ev.way_home(c, tc, bc).is_some() {
                    best = Some((d[cur][c], vec![c], tc, bc));
                }
            }
            for &s in &inst.station_indices {
                let Some((ts, bs)) = ev.arrive(cur, t, b, s) else { continue };
                let Some((tc, bc)) = ev.arrive(s, ts, bs, c) else { continue };
                let cost = d[cur][s] + d[s][c];
                if ev.way_home(c, tc, bc).is_some() && best.as_ref().is_none_or(|x| cost < x.0) {
                    best = Some((cost, vec![s, c], tc, bc));
                }
            }
            if let Some((cost, path, tc, bc)) = best {
                cands.push((cost, (c, path, tc, bc)));
            }
        }
        match pick(cands, &mut rng) {
            Some((c, path, tc, bc)) => {
                route.extend(path);
                served[c] = true;
                left -= 1;
                load += inst.demands[c];
                cur = c;
                t = tc;
                b = bc;
            }
            None => {
                if route.is_empty() {
                    return Err(BaselineError::ConstructionStuck);
                }
                let home = ev.way_home(cur, t, b).ok_or(BaselineError::ConstructionStuck)?;
                route.extend(home);
                routes.push(core::mem::take(&mut route));
                (cur, t, b, load) = (0, 0.0, full, 0);
            }
        }
    }
    if !route.is_empty() {
        let home = ev.way_home(cur, t, b).ok_or(BaselineError::ConstructionStuck)?;
        route.extend(home);
        routes.push(route);
    }
    Ok(routes)
}

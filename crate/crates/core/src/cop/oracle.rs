//! Exhaustive optima for tiny instances. Slow by design; each oracle
//! enumerates the complete solution space or a dominating subset of it.

use alloc::vec;
use alloc::vec::Vec;

use super::validate::{route_distance, simulate_cevrptw_route, EPS};
use super::*;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub solution: CopSolution,
}

pub fn oracle_optimum(instance: &CopInstance) -> Result<OracleResult, CopError> {
    match &instance.data {
        InstanceData::Cflp(i) => cflp(i),
        InstanceData::Cvrp(i) => cvrp(i),
        InstanceData::Fjsp(i) => fjsp(i),
        InstanceData::Mis(i) => mis(i),
        InstanceData::Cevrptw(i) => cevrptw(i),
        InstanceData::Mrcpsp(i) => mrcpsp(i),
    }
}

fn mis(inst: &MisInstance) -> Result<OracleResult, CopError> {
    let n = inst.num_vertices;
    if n > 20 {
        return Err(CopError::TooLarge);
    }
    let mut best = 0u32;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() > best.count_ones() && inst.edges.iter().all(|(u, v)| mask >> u & 1 == 0 || mask >> v & 1 == 0) {
            best = mask;
        }
    }
    let set: Vec<usize> = (0..n).filter(|v| best >> v & 1 == 1).collect();
    Ok(OracleResult { value: set.len() as f64, solution: CopSolution::Mis(set) })
}

fn cflp(inst: &CflpInstance) -> Result<OracleResult, CopError> {
    let m = inst.facility_capacities.len();
    let n = inst.customer_demands.len();
    if libm::pow(m as f64, n as f64) > 2e6 {
        return Err(CopError::TooLarge);
    }
    let mut assign = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut load = vec![0u32; m];
        for (c, &f) in assign.iter().enumerate() {
            load[f] += inst.customer_demands[c];
        }
        if load.iter().zip(&inst.facility_capacities).all(|(l, q)| l <= q) {
            let mut cost: f64 = assign.iter().enumerate().map(|(c, &f)| inst.assignment_costs[f][c] as f64).sum();
            for f in 0..m {
                if assign.contains(&f) {
                    cost += inst.fixed_costs[f];
                }
            }
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, assign.clone()));
            }
        }
        // odometer increment
        let mut k = 0;
        while k < n {
            assign[k] += 1;
            if assign[k] < m {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    let (value, assign) = best.ok_or(CopError::Infeasible)?;
    Ok(OracleResult { value, solution: CopSolution::Cflp(assign.iter().enumerate().map(|(c, &f)| (f, c)).collect()) })
}

/// Minimum over set partitions of the customers, given the best single-route
/// cost (and order) of every subset.
fn partition(n: usize, route: &[Option<(f64, Vec<usize>)>]) -> Option<(f64, Vec<Vec<usize>>)> {
    let full = (1usize << n) - 1;
    let mut best: Vec<Option<(f64, usize)>> = vec![None; full + 1];
    best[0] = Some((0.0, 0));
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // submasks of `rest`, each combined with the lowest customer
        let mut sub = rest;
        loop {
            let part = sub | low;
            if let (Some((c, _)), Some((b, _))) = (&route[part], best[mask ^ part]) {
                let total = c + b;
                if best[mask].is_none_or(|(v, _)| total < v) {
                    best[mask] = Some((total, part));
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let (value, _) = best[full]?;
    let mut routes = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let (_, part) = best[mask].unwrap();
        routes.push(route[part].as_ref().unwrap().1.clone());
        mask ^= part;
    }
    Some((value, routes))
}

fn cvrp(inst: &CvrpInstance) -> Result<OracleResult, CopError> {
    let n = inst.demands.len() - 1;
    if n > 10 {
        return Err(CopError::TooLarge);
    }
    let c = &inst.coordinates;
    let size = 1usize << n;
    // Held-Karp over open paths from the depot
    let mut dp = vec![vec![f64::INFINITY; n]; size];
    let mut from = vec![vec![usize::MAX; n]; size];
    for k in 0..n {
        dp[1 << k][k] = euclid(c[0], c[k + 1]);
    }
    for mask in 1..size {
        for last in 0..n {
            if mask >> last & 1 == 0 || !dp[mask][last].is_finite() {
                continue;
            }
            for next in 0..n {
                if mask >> next & 1 == 1 {
                    continue;
                }
                let m2 = mask | 1 << next;
                let v = dp[mask][last] + euclid(c[last + 1], c[next + 1]);
                if v < dp[m2][next] {
                    dp[m2][next] = v;
                    from[m2][next] = last;
                }
            }
        }
    }
    let mut route: Vec<Option<(f64, Vec<usize>)>> = vec![None; size];
    for mask in 1..size {
        let load: u32 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| inst.demands[k + 1]).sum();
        if load > inst.vehicle_capacity {
            continue;
        }
        let (mut best, mut last) = (f64::INFINITY, 0);
        for k in 0..n {
            if mask >> k & 1 == 1 {
                let v = dp[mask][k] + euclid(c[k + 1], c[0]);
                if v < best {
                    best = v;
                    last = k;
                }
            }
        }
        let mut order = Vec::new();
        let (mut m, mut k) = (mask, last);
        while k != usize::MAX {
            order.push(k + 1);
            let prev = from[m][k];
            m ^= 1 << k;
            k = prev;
        }
        order.reverse();
        route[mask] = Some((best, order));
    }
    let (value, routes) = if n == 0 { (0.0, Vec::new()) } else { partition(n, &route).ok_or(CopError::Infeasible)? };
    Ok(OracleResult { value, solution: CopSolution::Cvrp(routes) })
}

struct FjspSearch<'a> {
    inst: &'a FjspInstance,
    best: f64,
    best_sol: Vec<Vec<(usize, f64)>>,
    sol: Vec<Vec<(usize, f64)>>,
}

impl FjspSearch<'_> {
    fn dfs(&mut self, next: &mut [usize], job_ready: &mut [f64], mach_ready: &mut [f64], makespan: f64, left: usize) {
        if makespan >= self.best - EPS {
            return;
        }
        if left == 0 {
            self.best = makespan;
            self.best_sol = self.sol.clone();
            return;
        }
        for j in 0..self.inst.jobs.len() {
            let o = next[j];
            if o == self.inst.jobs[j].len() {
                continue;
            }
            for &(m, p) in &self.inst.jobs[j][o] {
                let start = job_ready[j].max(mach_ready[m]);
                let end = start + p as f64;
                let (jr, mr) = (job_ready[j], mach_ready[m]);
                job_ready[j] = end;
                mach_ready[m] = end;
                next[j] += 1;
                self.sol[j].push((m, start));
                self.dfs(next, job_ready, mach_ready, makespan.max(end), left - 1);
                self.sol[j].pop();
                next[j] -= 1;
                job_ready[j] = jr;
                mach_ready[m] = mr;
            }
        }
    }
}

/// Append scheduling over every interleaving and machine choice reaches
/// every semi-active schedule, one of which is optimal.
fn fjsp(inst: &FjspInstance) -> Result<OracleResult, CopError> {
    let ops: usize = inst.jobs.iter().map(Vec::len).sum();
    if ops > 8 {
        return Err(CopError::TooLarge);
    }
    let mut s = FjspSearch { inst, best: f64::INFINITY, best_sol: Vec::new(), sol: vec![Vec::new(); inst.jobs.len()] };
    let mut next = vec![0; inst.jobs.len()];
    let mut jr = vec![0.0; inst.jobs.len()];
    let mut mr = vec![0.0; inst.num_machines];
    s.dfs(&mut next, &mut jr, &mut mr, 0.0, ops);
    if ops == 0 {
        return Ok(OracleResult { value: 0.0, solution: CopSolution::Fjsp(s.sol) });
    }
    Ok(OracleResult { value: s.best, solution: CopSolution::Fjsp(s.best_sol) })
}

/// Station chains without repeats: revisiting a station inside one leg never
/// helps since the battery is already full and time only grows.
fn station_chains(stations: &[usize]) -> Vec<Vec<usize>> {
    fn grow(stations: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for &s in stations {
            if !cur.contains(&s) {
                cur.push(s);
                grow(stations, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(stations, &mut Vec::new(), &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn cevrptw(inst: &CevrptwInstance) -> Result<OracleResult, CopError> {
    let n = inst.num_customers();
    if n > 5 || inst.station_indices.len() > 3 {
        return Err(CopError::TooLarge);
    }
    let chains = station_chains(&inst.station_indices);
    let size = 1usize << n;
    let mut route: Vec<Option<(f64, Vec<usize>)>> = vec![None; size];
    for (mask, slot) in route.iter_mut().enumerate().skip(1) {
        let members: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| k + 1).collect();
        let load: u32 = members.iter().map(|c| inst.demands[*c]).sum();
        if load > inst.vehicle_capacity {
            continue;
        }
        for order in permutations(&members) {
            let legs = order.len() + 1;
            let mut pick = vec![0usize; legs];
            loop {
                let mut r = Vec::new();
                for (k, c) in order.iter().enumerate() {
                    r.extend_from_slice(&chains[pick[k]]);
                    r.push(*c);
                }
                r.extend_from_slice(&chains[pick[legs - 1]]);
                let len = route_distance(&inst.distance_matrix, &r);
                if slot.as_ref().is_none_or(|(b, _)| len < *b) && simulate_cevrptw_route(inst, &r).is_none() {
                    *slot = Some((len, r));
                }
                let mut k = 0;
                while k < legs {
                    pick[k] += 1;
                    if pick[k] < chains.len() {
                        break;
                    }
                    pick[k] = 0;
                    k += 1;
                }
                if k == legs {
                    break;
                }
            }
        }
    }
    let (value, routes) = if n == 0 { (0.0, Vec::new()) } else { partition(n, &route).ok_or(CopError::Infeasible)? };
    Ok(OracleResult { value, solution: CopSolution::Cevrptw(routes) })
}

struct MrcpspSearch<'a> {
    inst: &'a MrcpspInstance,
    preds: Vec<Vec<usize>>,
    horizon: usize,
    best: i64,
    best_sol: Vec<(usize, i64)>,
}

impl MrcpspSearch<'_> {
    /// Earliest precedence- and resource-feasible finish for `mode` of `j`.
    fn place(&self, j: usize, mode: &Mode, finish: &[Option<i64>], profile: &[Vec<u32>]) -> i64 {
        let mut t = self.preds[j].iter().map(|p| finish[*p].unwrap()).max().unwrap_or(0);
        let d = mode.duration as i64;
        'search: loop {
            for tau in t..t + d {
                for (r, cap) in self.inst.renewable_capacities.iter().enumerate() {
                    if profile[tau as usize][r] + mode.renewable[r] > *cap {
                        t = tau + 1;
                        continue 'search;
                    }
                }
            }
            return t + d;
        }
    }

    fn dfs(&mut self, finish: &mut Vec<Option<i64>>, modes: &mut Vec<usize>, profile: &mut Vec<Vec<u32>>, used: &mut Vec<u32>, left: usize) {
        let makespan = finish.iter().flatten().copied().max().unwrap_or(0);
        if makespan >= self.best {
            return;
        }
        if left == 0 {
            self.best = makespan;
            self.best_sol = modes.iter().zip(finish.iter()).map(|(m, f)| (*m, f.unwrap())).collect();
            return;
        }
        let n = self.inst.modes.len();
        for j in 0..n {
            if finish[j].is_some() || self.preds[j].iter().any(|p| finish[*p].is_none()) {
                continue;
            }
            for (mi, mode) in self.inst.modes[j].iter().enumerate() {
                let fits = used.iter().zip(&mode.nonrenewable).zip(&self.inst.nonrenewable_capacities).all(|((u, k), c)| u + k <= *c);
                if !fits {
                    continue;
                }
                let f = self.place(j, mode, finish, profile);
                let s = f - mode.duration as i64;
                if f as usize > self.horizon {
                    continue;
                }
                for tau in s..f {
                    for (r, u) in mode.renewable.iter().enumerate() {
                        profile[tau as usize][r] += u;
                    }
                }
                for (r, u) in mode.nonrenewable.iter().enumerate() {
                    used[r] += u;
                }
                finish[j] = Some(f);
                modes[j] = mi;
                self.dfs(finish, modes, profile, used, left - 1);
                finish[j] = None;
                for (r, u) in mode.nonrenewable.iter().enumerate() {
                    used[r] -= u;
                }
                for tau in s..f {
                    for (r, u) in mode.renewable.iter().enumerate() {
                        profile[tau as usize][r] -= u;
                    }
                }
            }
        }
    }
}

/// Serial schedule generation over every precedence-feasible list and mode
/// vector yields every active schedule, which include an optimum.
fn mrcpsp(inst: &MrcpspInstance) -> Result<OracleResult, CopError> {
    let n = inst.modes.len();
    if n > 7 {
        return Err(CopError::TooLarge);
    }
    let horizon: usize = inst.modes.iter().map(|ms| ms.iter().map(|m| m.duration).max().unwrap_or(0) as usize).sum();
    let mut s = MrcpspSearch { inst, preds: inst.predecessors(), horizon, best: i64::MAX, best_sol: Vec::new() };
    let mut finish = vec![None; n];
    let mut modes = vec![0; n];
    let mut profile = vec![vec![0u32; inst.renewable_capacities.len()]; horizon + 1];
    let mut used = vec![0u32; inst.nonrenewable_capacities.len()];
    s.dfs(&mut finish, &mut modes, &mut profile, &mut used, n);
    if s.best == i64::MAX {
        return Err(CopError::Infeasible);
    }
    Ok(OracleResult { value: s.best as f64, solution: CopSolution::Mrcpsp(s.best_sol) })
}

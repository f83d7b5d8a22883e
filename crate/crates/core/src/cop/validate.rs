//! Feasibility checks and objective values.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::*;

pub const EPS: f64 = 1e-9;

fn bad(violation: Violation, detail: String) -> Verdict {
    Verdict::Infeasible { violation, detail }
}

macro_rules! check {
    ($e:expr) => {
        if let Some(v) = $e {
            return v;
        }
    };
}

pub fn validate(instance: &CopInstance, solution: &CopSolution) -> Result<Verdict, CopError> {
    Ok(match (&instance.data, solution) {
        (InstanceData::Cflp(i), CopSolution::Cflp(s)) => cflp(i, s),
        (InstanceData::Cvrp(i), CopSolution::Cvrp(s)) => cvrp(i, s),
        (InstanceData::Fjsp(i), CopSolution::Fjsp(s)) => fjsp(i, s),
        (InstanceData::Mis(i), CopSolution::Mis(s)) => mis(i, s),
        (InstanceData::Cevrptw(i), CopSolution::Cevrptw(s)) => cevrptw(i, s),
        (InstanceData::Mrcpsp(i), CopSolution::Mrcpsp(s)) => mrcpsp(i, s),
        _ => return Err(CopError::ProblemMismatch),
    })
}

/// Objective of a feasible solution, in the problem's own direction.
pub fn objective(instance: &CopInstance, solution: &CopSolution) -> Result<f64, CopError> {
    if !validate(instance, solution)?.is_feasible() {
        return Err(CopError::Infeasible);
    }
    Ok(match (&instance.data, solution) {
        (InstanceData::Cflp(i), CopSolution::Cflp(s)) => cflp_cost(i, s),
        (InstanceData::Cvrp(i), CopSolution::Cvrp(s)) => s.iter().map(|r| cvrp_route_length(i, r)).sum(),
        (InstanceData::Fjsp(i), CopSolution::Fjsp(s)) => fjsp_makespan(i, s),
        (InstanceData::Mis(_), CopSolution::Mis(s)) => s.len() as f64,
        (InstanceData::Cevrptw(i), CopSolution::Cevrptw(s)) => s.iter().map(|r| route_distance(&i.distance_matrix, r)).sum(),
        (InstanceData::Mrcpsp(_), CopSolution::Mrcpsp(s)) => s.iter().map(|(_, f)| *f).max().unwrap_or(0) as f64,
        _ => unreachable!(),
    })
}

pub fn cflp_cost(inst: &CflpInstance, pairs: &[(usize, usize)]) -> f64 {
    let mut open = vec![false; inst.facility_capacities.len()];
    let mut cost = 0.0;
    for &(f, c) in pairs {
        open[f] = true;
        cost += inst.assignment_costs[f][c] as f64;
    }
    cost + open.iter().zip(&inst.fixed_costs).filter(|(o, _)| **o).map(|(_, f)| *f).sum::<f64>()
}

pub fn cvrp_route_length(inst: &CvrpInstance, route: &[usize]) -> f64 {
    if route.is_empty() {
        return 0.0;
    }
    let c = &inst.coordinates;
    let mut len = euclid(c[0], c[route[0]]);
    for w in route.windows(2) {
        len += euclid(c[w[0]], c[w[1]]);
    }
    len + euclid(c[route[route.len() - 1]], c[0])
}

/// Depot-to-depot distance of a route given without the depot.
pub fn route_distance(d: &[Vec<f64>], route: &[usize]) -> f64 {
    let mut prev = 0;
    let mut len = 0.0;
    for &n in route {
        len += d[prev][n];
        prev = n;
    }
    if route.is_empty() {
        0.0
    } else {
        len + d[prev][0]
    }
}

fn fjsp_makespan(inst: &FjspInstance, s: &[Vec<(usize, f64)>]) -> f64 {
    let mut end = 0.0f64;
    for (j, ops) in s.iter().enumerate() {
        for (o, &(m, start)) in ops.iter().enumerate() {
            end = end.max(start + fjsp_time(inst, j, o, m).unwrap_or(0) as f64);
        }
    }
    end
}

fn fjsp_time(inst: &FjspInstance, j: usize, o: usize, m: usize) -> Option<u32> {
    inst.jobs[j][o].iter().find(|(mm, _)| *mm == m).map(|(_, t)| *t)
}

fn cflp(inst: &CflpInstance, pairs: &[(usize, usize)]) -> Verdict {
    let m = inst.facility_capacities.len();
    let n = inst.customer_demands.len();
    let mut count = vec![0usize; n];
    let mut load = vec![0u64; m];
    for &(f, c) in pairs {
        if f >= m || c >= n {
            return bad(Violation::Domain, format!("pair ({f}, {c}) out of range"));
        }
        count[c] += 1;
        load[f] += inst.customer_demands[c] as u64;
    }
    if let Some(c) = count.iter().position(|k| *k != 1) {
        return bad(Violation::Assignment, format!("customer {c} assigned {} times", count[c]));
    }
    if let Some(f) = (0..m).find(|f| load[*f] > inst.facility_capacities[*f] as u64) {
        return bad(Violation::Capacity, format!("facility {f} serves {} > {}", load[f], inst.facility_capacities[f]));
    }
    Verdict::Feasible
}

/// Each customer exactly once, no depot or unknown node inside a route.
fn visits(routes: &[Vec<usize>], n_customers: usize, allowed_extra: &dyn Fn(usize) -> bool) -> Option<Verdict> {
    let mut seen = vec![0usize; n_customers + 1];
    for r in routes {
        for &v in r {
            if v >= 1 && v <= n_customers {
                seen[v] += 1;
            } else if !allowed_extra(v) {
                return Some(bad(Violation::Domain, format!("node {v} cannot appear inside a route")));
            }
        }
    }
    (1..=n_customers)
        .find(|c| seen[*c] != 1)
        .map(|c| bad(Violation::Visit, format!("customer {c} visited {} times", seen[c])))
}

fn cvrp(inst: &CvrpInstance, routes: &[Vec<usize>]) -> Verdict {
    let n = inst.demands.len() - 1;
    check!(visits(routes, n, &|_| false));
    for (k, r) in routes.iter().enumerate() {
        let load: u64 = r.iter().map(|c| inst.demands[*c] as u64).sum();
        if load > inst.vehicle_capacity as u64 {
            return bad(Violation::Capacity, format!("route {k} carries {load} > {}", inst.vehicle_capacity));
        }
    }
    Verdict::Feasible
}

fn fjsp(inst: &FjspInstance, s: &[Vec<(usize, f64)>]) -> Verdict {
    if s.len() != inst.jobs.len() || s.iter().zip(&inst.jobs).any(|(a, b)| a.len() != b.len()) {
        return bad(Violation::Domain, "schedule shape does not match the jobs".into());
    }
    let mut intervals: Vec<Vec<(f64, f64, usize, usize)>> = vec![Vec::new(); inst.num_machines];
    for (j, ops) in s.iter().enumerate() {
        let mut ready = 0.0f64;
        for (o, &(m, start)) in ops.iter().enumerate() {
            if !start.is_finite() || start < -EPS {
                return bad(Violation::Domain, format!("operation ({j}, {o}) starts at {start}"));
            }
            let Some(p) = fjsp_time(inst, j, o, m) else {
                return bad(Violation::Assignment, format!("machine {m} cannot process operation ({j}, {o})"));
            };
            if start < ready - EPS {
                return bad(Violation::Precedence, format!("operation ({j}, {o}) starts at {start} before {ready}"));
            }
            ready = start + p as f64;
            intervals[m].push((start, ready, j, o));
        }
    }
    for (m, iv) in intervals.iter_mut().enumerate() {
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in iv.windows(2) {
            if w[1].0 < w[0].1 - EPS {
                return bad(
                    Violation::MachineOverlap,
                    format!("machine {m}: ({}, {}) overlaps ({}, {})", w[0].2, w[0].3, w[1].2, w[1].3),
                );
            }
        }
    }
    Verdict::Feasible
}

fn mis(inst: &MisInstance, s: &[usize]) -> Verdict {
    let mut chosen = vec![false; inst.num_vertices];
    for &v in s {
        if v >= inst.num_vertices || chosen[v] {
            return bad(Violation::Domain, format!("vertex {v} out of range or repeated"));
        }
        chosen[v] = true;
    }
    match inst.edges.iter().find(|(u, v)| chosen[*u] && chosen[*v]) {
        Some((u, v)) => bad(Violation::Independence, format!("edge ({u}, {v}) inside the set")),
        None => Verdict::Feasible,
    }
}

/// Walks one route from the depot and back. Returns the first violation.
pub fn simulate_cevrptw_route(inst: &CevrptwInstance, route: &[usize]) -> Option<Verdict> {
    let d = &inst.distance_matrix;
    let b = inst.battery_capacity;
    let mut battery = b;
    let mut time = 0.0f64;
    let mut prev = 0;
    for &n in route.iter().chain(core::iter::once(&0)) {
        battery -= d[prev][n];
        if battery < -EPS {
            return Some(bad(Violation::Battery, format!("battery runs out on the way from {prev} to {n}")));
        }
        let arrival = time + d[prev][n];
        let (e, l) = inst.time_windows[n];
        let start = arrival.max(e);
        if start > l + EPS {
            return Some(bad(Violation::TimeWindow, format!("node {n} reached at {arrival:.4} after {l:.4}")));
        }
        time = start + inst.service_times[n];
        if inst.is_station(n) {
            battery = b;
        }
        prev = n;
    }
    None
}

fn cevrptw(inst: &CevrptwInstance, routes: &[Vec<usize>]) -> Verdict {
    let n = inst.num_customers();
    check!(visits(routes, n, &|v| inst.is_station(v)));
    for (k, r) in routes.iter().enumerate() {
        let load: u64 = r.iter().map(|c| inst.demands[*c] as u64).sum();
        if load > inst.vehicle_capacity as u64 {
            return bad(Violation::Capacity, format!("route {k} carries {load} > {}", inst.vehicle_capacity));
        }
    }
    for r in routes.iter().filter(|r| !r.is_empty()) {
        check!(simulate_cevrptw_route(inst, r));
    }
    Verdict::Feasible
}

fn mrcpsp(inst: &MrcpspInstance, s: &[(usize, i64)]) -> Verdict {
    let n = inst.modes.len();
    if s.len() != n {
        return bad(Violation::Domain, format!("{} activities scheduled, {n} expected", s.len()));
    }
    let mut start = vec![0i64; n];
    for (j, &(m, f)) in s.iter().enumerate() {
        let Some(mode) = inst.modes[j].get(m) else {
            return bad(Violation::Domain, format!("activity {j} has no mode {m}"));
        };
        start[j] = f - mode.duration as i64;
        if start[j] < 0 {
            return bad(Violation::Domain, format!("activity {j} starts at {}", start[j]));
        }
    }
    for (i, succ) in inst.successors.iter().enumerate() {
        for &j in succ {
            if start[j] < s[i].1 {
                return bad(Violation::Precedence, format!("activity {j} starts at {} before {i} finishes at {}", start[j], s[i].1));
            }
        }
    }
    for (r, &cap) in inst.renewable_capacities.iter().enumerate() {
        let mut events: Vec<(i64, i64)> = Vec::new();
        for (j, &(m, f)) in s.iter().enumerate() {
            let u = inst.modes[j][m].renewable[r] as i64;
            if u > 0 && f > start[j] {
                events.push((start[j], u));
                events.push((f, -u));
            }
        }
        // releases before acquisitions at equal times
        events.sort_by_key(|e| (e.0, e.1));
        let mut level = 0;
        for (t, du) in events {
            level += du;
            if level > cap as i64 {
                return bad(Violation::Renewable, format!("resource {r} uses {level} > {cap} at time {t}"));
            }
        }
    }
    for (r, &cap) in inst.nonrenewable_capacities.iter().enumerate() {
        let used: u64 = s.iter().enumerate().map(|(j, &(m, _))| inst.modes[j][m].nonrenewable[r] as u64).sum();
        if used > cap as u64 {
            return bad(Violation::Nonrenewable, format!("resource {r} uses {used} > {cap}"));
        }
    }
    Verdict::Feasible
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(data: InstanceData) -> CopInstance {
        CopInstance::new(Tier::Tiny, 0, data)
    }

    fn v(i: &CopInstance, s: CopSolution) -> Option<Violation> {
        validate(i, &s).unwrap().violation()
    }

    #[test]
    fn cflp_cases() {
        let i = inst(InstanceData::Cflp(CflpInstance {
            facility_capacities: vec![10, 10],
            customer_demands: vec![6, 6],
            assignment_costs: vec![vec![1, 5], vec![4, 2]],
            fixed_costs: vec![100.0, 50.0],
        }));
        assert_eq!(v(&i, CopSolution::Cflp(vec![(0, 0), (1, 1)])), None);
        assert_eq!(objective(&i, &CopSolution::Cflp(vec![(0, 0), (1, 1)])).unwrap(), 153.0);
        assert_eq!(v(&i, CopSolution::Cflp(vec![(0, 0), (0, 1)])), Some(Violation::Capacity));
        assert_eq!(v(&i, CopSolution::Cflp(vec![(0, 0)])), Some(Violation::Assignment));
        assert_eq!(v(&i, CopSolution::Cflp(vec![(0, 0), (1, 0), (1, 1)])), Some(Violation::Assignment));
        assert_eq!(v(&i, CopSolution::Cflp(vec![(2, 0)])), Some(Violation::Domain));
    }

    #[test]
    fn cvrp_cases() {
        let i = inst(InstanceData::Cvrp(CvrpInstance {
            coordinates: vec![[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]],
            demands: vec![0, 5, 5],
            vehicle_capacity: 10,
        }));
        let s = CopSolution::Cvrp(vec![vec![1, 2]]);
        assert_eq!(v(&i, s.clone()), None);
        assert!((objective(&i, &s).unwrap() - 12.0).abs() < 1e-12);
        assert_eq!(v(&i, CopSolution::Cvrp(vec![vec![1]])), Some(Violation::Visit));
        assert_eq!(v(&i, CopSolution::Cvrp(vec![vec![1, 0, 2]])), Some(Violation::Domain));
        let tight = inst(InstanceData::Cvrp(CvrpInstance {
            coordinates: vec![[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]],
            demands: vec![0, 5, 6],
            vehicle_capacity: 10,
        }));
        assert_eq!(v(&tight, CopSolution::Cvrp(vec![vec![1, 2]])), Some(Violation::Capacity));
        assert_eq!(v(&tight, CopSolution::Cvrp(vec![vec![1], vec![], vec![2]])), None);
    }

    #[test]
    fn fjsp_cases() {
        let i = inst(InstanceData::Fjsp(FjspInstance {
            jobs: vec![vec![vec![(0, 3)], vec![(0, 2), (1, 4)]], vec![vec![(1, 5)]]],
            num_machines: 2,
        }));
        let ok = CopSolution::Fjsp(vec![vec![(0, 0.0), (0, 3.0)], vec![(1, 0.0)]]);
        assert_eq!(v(&i, ok.clone()), None);
        assert_eq!(objective(&i, &ok).unwrap(), 5.0);
        assert_eq!(v(&i, CopSolution::Fjsp(vec![vec![(0, 0.0), (0, 2.0)], vec![(1, 0.0)]])), Some(Violation::Precedence));
        assert_eq!(v(&i, CopSolution::Fjsp(vec![vec![(0, 0.0), (1, 3.0)], vec![(1, 0.0)]])), Some(Violation::MachineOverlap));
        assert_eq!(v(&i, CopSolution::Fjsp(vec![vec![(1, 0.0), (0, 3.0)], vec![(1, 0.0)]])), Some(Violation::Assignment));
        assert_eq!(v(&i, CopSolution::Fjsp(vec![vec![(0, -1.0), (0, 3.0)], vec![(1, 0.0)]])), Some(Violation::Domain));
        assert_eq!(v(&i, CopSolution::Fjsp(vec![vec![(0, 0.0)], vec![(1, 0.0)]])), Some(Violation::Domain));
    }

    #[test]
    fn mis_cases() {
        let i = inst(InstanceData::Mis(MisInstance { num_vertices: 4, edges: vec![(0, 1), (1, 2), (2, 3)] }));
        assert_eq!(objective(&i, &CopSolution::Mis(vec![0, 2])).unwrap(), 2.0);
        assert_eq!(v(&i, CopSolution::Mis(vec![0, 1])), Some(Violation::Independence));
        assert_eq!(v(&i, CopSolution::Mis(vec![0, 0])), Some(Violation::Domain));
        assert_eq!(v(&i, CopSolution::Mis(vec![])), None);
    }

    fn line_cevrptw(window: (f64, f64)) -> CopInstance {
        // depot 0, customers 1 (x=2) and 2 (x=4), station 3 (x=3)
        let xs = [0.0, 2.0, 4.0, 3.0];
        let coordinates: Vec<[f64; 2]> = xs.iter().map(|x| [*x, 0.0]).collect();
        let d = coordinates.iter().map(|a| coordinates.iter().map(|b| euclid(*a, *b)).collect()).collect();
        inst(InstanceData::Cevrptw(CevrptwInstance {
            distance_matrix: d,
            demands: vec![0, 1, 1, 0],
            time_windows: vec![(0.0, 20.0), (0.0, 20.0), window, (0.0, 20.0)],
            service_times: vec![0.0, 0.05, 0.05, 0.05],
            vehicle_capacity: 2,
            battery_capacity: 5.0,
            station_indices: vec![3],
            coordinates,
        }))
    }

    #[test]
    fn cevrptw_cases() {
        let i = line_cevrptw((0.0, 20.0));
        // 0 -> 2 -> 0 needs 8 units of charge
        assert_eq!(v(&i, CopSolution::Cevrptw(vec![vec![1], vec![2]])), Some(Violation::Battery));
        let ok = CopSolution::Cevrptw(vec![vec![1, 2, 3]]);
        assert_eq!(v(&i, ok.clone()), None);
        assert!((objective(&i, &ok).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(v(&i, CopSolution::Cevrptw(vec![vec![1, 3, 2, 3, 3]])), None);
        assert_eq!(v(&i, CopSolution::Cevrptw(vec![vec![1]])), Some(Violation::Visit));
        assert_eq!(v(&i, CopSolution::Cevrptw(vec![vec![1, 0, 2, 3]])), Some(Violation::Domain));
        let late = line_cevrptw((0.0, 3.0));
        assert_eq!(v(&late, CopSolution::Cevrptw(vec![vec![1, 2, 3]])), Some(Violation::TimeWindow));
        // waiting for an opening window is allowed
        let early = line_cevrptw((10.0, 12.0));
        assert_eq!(v(&early, CopSolution::Cevrptw(vec![vec![1, 2, 3]])), None);
    }

    fn small_mrcpsp() -> CopInstance {
        let m = |d, r, n| Mode { duration: d, renewable: vec![r], nonrenewable: vec![n] };
        inst(InstanceData::Mrcpsp(MrcpspInstance {
            modes: vec![vec![m(0, 0, 0)], vec![m(3, 2, 1), m(1, 3, 4)], vec![m(2, 2, 1)], vec![m(0, 0, 0)]],
            successors: vec![vec![1, 2], vec![3], vec![3], vec![]],
            renewable_capacities: vec![4],
            nonrenewable_capacities: vec![4],
        }))
    }

    #[test]
    fn mrcpsp_cases() {
        let i = small_mrcpsp();
        let ok = CopSolution::Mrcpsp(vec![(0, 0), (0, 3), (0, 2), (0, 3)]);
        assert_eq!(v(&i, ok.clone()), None);
        assert_eq!(objective(&i, &ok).unwrap(), 3.0);
        assert_eq!(v(&i, CopSolution::Mrcpsp(vec![(0, 0), (1, 1), (0, 2), (0, 2)])), Some(Violation::Renewable));
        assert_eq!(v(&i, CopSolution::Mrcpsp(vec![(0, 0), (1, 1), (0, 3), (0, 3)])), Some(Violation::Nonrenewable));
        assert_eq!(v(&i, CopSolution::Mrcpsp(vec![(0, 0), (0, 3), (0, 2), (0, 2)])), Some(Violation::Precedence));
        assert_eq!(v(&i, CopSolution::Mrcpsp(vec![(0, 0), (0, 2), (0, 2), (0, 3)])), Some(Violation::Domain));
        assert_eq!(v(&i, CopSolution::Mrcpsp(vec![(0, 0), (2, 3), (0, 2), (0, 3)])), Some(Violation::Domain));
        // back-to-back use of the same units is fine
        assert_eq!(v(&i, CopSolution::Mrcpsp(vec![(0, 0), (0, 3), (0, 5), (0, 5)])), None);
    }

    #[test]
    fn mismatch_is_an_error() {
        let i = small_mrcpsp();
        assert_eq!(validate(&i, &CopSolution::Mis(vec![])), Err(CopError::ProblemMismatch));
    }
}

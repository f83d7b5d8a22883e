//! Seeded instance generators. Every instance is a pure function of its
//! problem, tier and seed.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rng::mix;

/// Instances per tier in a fitness set.
pub const PER_TIER: usize = 4;

pub const CEVRPTW_BATTERY: f64 = 5.0;
pub const CEVRPTW_HORIZON: f64 = 20.0;
pub const CEVRPTW_SERVICE: f64 = 0.05;
pub const CEVRPTW_SIDE: f64 = 5.0;
pub const CEVRPTW_CAPACITY: u32 = 20;
pub const MRCPSP_MODES: usize = 3;
pub const MRCPSP_BUDGET_FACTOR: f64 = 0.8;

const MAX_REDRAWS: usize = 10_000;

/// Size parameters of a tier: `(a, b)` with `b` unused for one-dimensional
/// problems.
pub fn tier_dims(problem: Problem, tier: Tier) -> (usize, usize) {
    let i = match tier {
        Tier::Small => 0,
        Tier::Medium => 1,
        Tier::Large => 2,
        Tier::ExtraLarge => 3,
        Tier::Tiny => return (0, 0),
    };
    match problem {
        Problem::Cflp => [(25, 25), (50, 50), (100, 100), (200, 200)][i],
        Problem::Cvrp => [(25, 0), (50, 0), (100, 0), (200, 0)][i],
        Problem::Fjsp => [(10, 5), (20, 10), (50, 20), (100, 50)][i],
        Problem::Mis => [(50, 0), (100, 0), (250, 0), (500, 0)][i],
        Problem::Cevrptw => [(20, 3), (40, 4), (60, 5), (80, 6)][i],
        Problem::Mrcpsp => [(10, 0), (20, 0), (30, 0), (40, 0)][i],
    }
}

pub fn instance_seed(base_seed: u64, problem: Problem, tier: Tier, index: usize) -> u64 {
    mix(&[base_seed, problem as u64, tier.index(), index as u64])
}

/// The sixteen-instance fitness set of a problem, ordered by tier.
pub fn fitness_instances(problem: Problem, base_seed: u64) -> Vec<CopInstance> {
    let mut out = Vec::with_capacity(Tier::FITNESS.len() * PER_TIER);
    for tier in Tier::FITNESS {
        for i in 0..PER_TIER {
            out.push(generate_instance(problem, tier, instance_seed(base_seed, problem, tier, i)));
        }
    }
    out
}

pub fn generate_instance(problem: Problem, tier: Tier, seed: u64) -> CopInstance {
    if tier == Tier::Tiny {
        return generate_tiny(problem, seed);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = tier_dims(problem, tier);
    let data = match problem {
        Problem::Cflp => InstanceData::Cflp(gen_cflp(&mut rng, a, b)),
        Problem::Cvrp => InstanceData::Cvrp(gen_cvrp(&mut rng, a)),
        Problem::Fjsp => InstanceData::Fjsp(gen_fjsp(&mut rng, a, b, 5, 15)),
        Problem::Mis => {
            let p = rng.random_range(0.1..=0.3);
            InstanceData::Mis(gen_mis(&mut rng, a, p))
        }
        Problem::Cevrptw => InstanceData::Cevrptw(gen_cevrptw(&mut rng, a, b)),
        Problem::Mrcpsp => InstanceData::Mrcpsp(gen_mrcpsp(&mut rng, a)),
    };
    CopInstance::new(tier, seed, data)
}

/// Oracle-sized instance with the same parameter ranges as the tiers.
pub fn generate_tiny(problem: Problem, seed: u64) -> CopInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = match problem {
        Problem::Cflp => {
            let m = rng.random_range(2..=3);
            let n = rng.random_range(2..=6);
            InstanceData::Cflp(gen_cflp(&mut rng, m, n))
        }
        Problem::Cvrp => {
            let n = rng.random_range(2..=7);
            InstanceData::Cvrp(gen_cvrp(&mut rng, n))
        }
        Problem::Fjsp => {
            let jobs = rng.random_range(2..=3);
            InstanceData::Fjsp(gen_fjsp(&mut rng, jobs, 2, 1, 2))
        }
        Problem::Mis => {
            let n = rng.random_range(2..=12);
            let p = rng.random_range(0.1..=0.5);
            InstanceData::Mis(gen_mis(&mut rng, n, p))
        }
        Problem::Cevrptw => {
            let n = rng.random_range(1..=4);
            let s = rng.random_range(1..=2);
            InstanceData::Cevrptw(gen_cevrptw(&mut rng, n, s))
        }
        Problem::Mrcpsp => {
            let n = rng.random_range(2..=5);
            InstanceData::Mrcpsp(gen_mrcpsp(&mut rng, n))
        }
    };
    CopInstance::new(Tier::Tiny, seed, data)
}

fn point<R: Rng>(rng: &mut R, side: f64) -> [f64; 2] {
    [rng.random_range(0.0..side), rng.random_range(0.0..side)]
}

/// Facilities and customers scattered on a 100x100 square; assignment costs
/// are rounded distances. Redrawn until the greedy construction succeeds.
fn gen_cflp<R: Rng>(rng: &mut R, m: usize, n: usize) -> CflpInstance {
    for _ in 0..MAX_REDRAWS {
        let fac: Vec<[f64; 2]> = (0..m).map(|_| point(rng, 100.0)).collect();
        let cus: Vec<[f64; 2]> = (0..n).map(|_| point(rng, 100.0)).collect();
        let inst = CflpInstance {
            facility_capacities: (0..m).map(|_| rng.random_range(5..=100)).collect(),
            customer_demands: (0..n).map(|_| rng.random_range(5..=20)).collect(),
            assignment_costs: fac.iter().map(|f| cus.iter().map(|c| libm::round(euclid(*f, *c)) as u32).collect()).collect(),
            fixed_costs: (0..m).map(|_| libm::round(rng.random_range(100.0..=500.0) * 100.0) / 100.0).collect(),
        };
        if crate::baselines::constructive::cflp(&inst).is_ok() {
            return inst;
        }
    }
    panic!("no feasible facility location instance after {MAX_REDRAWS} draws");
}

fn gen_cvrp<R: Rng>(rng: &mut R, n: usize) -> CvrpInstance {
    let coordinates = (0..=n).map(|_| point(rng, 100.0)).collect();
    let mut demands = vec![0];
    demands.extend((0..n).map(|_| rng.random_range(1..=10)));
    CvrpInstance { coordinates, demands, vehicle_capacity: rng.random_range(20..=40) }
}

fn gen_fjsp<R: Rng>(rng: &mut R, n_jobs: usize, n_machines: usize, ops_lo: usize, ops_hi: usize) -> FjspInstance {
    let jobs = (0..n_jobs)
        .map(|_| {
            let ops = rng.random_range(ops_lo..=ops_hi);
            (0..ops)
                .map(|_| loop {
                    let mut elig: Vec<(usize, u32)> = Vec::new();
                    for m in 0..n_machines {
                        if rng.random_bool(0.5) {
                            elig.push((m, rng.random_range(10..=100)));
                        }
                    }
                    if !elig.is_empty() {
                        break elig;
                    }
                })
                .collect()
        })
        .collect();
    FjspInstance { jobs, num_machines: n_machines }
}

fn gen_mis<R: Rng>(rng: &mut R, n: usize, p: f64) -> MisInstance {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    MisInstance { num_vertices: n, edges }
}

/// Cheapest way to reach a customer from the depot with at most one
/// intermediate station, and back. Returns `(arrival, return time)` of the
/// fastest combination that respects the battery.
fn cevrptw_access(dist: &[Vec<f64>], c: usize, stations: &[usize], service: &[f64], battery: f64) -> Option<(f64, f64)> {
    let eps = 1e-9;
    let mut ins: Vec<(f64, f64)> = Vec::new(); // (arrival time, battery left)
    if dist[0][c] <= battery + eps {
        ins.push((dist[0][c], battery - dist[0][c]));
    }
    for &s in stations {
        if dist[0][s] <= battery + eps && dist[s][c] <= battery + eps {
            ins.push((dist[0][s] + service[s] + dist[s][c], battery - dist[s][c]));
        }
    }
    let mut outs: Vec<(f64, f64)> = Vec::new(); // (energy needed, time)
    outs.push((dist[c][0], dist[c][0]));
    for &s in stations {
        if dist[s][0] <= battery + eps {
            outs.push((dist[c][s], dist[c][s] + service[s] + dist[s][0]));
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for &(arr, left) in &ins {
        for &(need, t) in &outs {
            if need <= left + eps && best.is_none_or(|(a, r)| arr + t < a + r) {
                best = Some((arr, t));
            }
        }
    }
    best
}

/// Depot at the centre of a 5x5 square, stations within one charge of it.
/// Customers are redrawn until a single-customer route (with at most one
/// station on each leg) is feasible; windows are then drawn around a point
/// between the earliest arrival and the latest start that still returns in
/// time.
fn gen_cevrptw<R: Rng>(rng: &mut R, n: usize, n_stations: usize) -> CevrptwInstance {
    let battery = CEVRPTW_BATTERY;
    let horizon = CEVRPTW_HORIZON;
    let depot = [CEVRPTW_SIDE / 2.0, CEVRPTW_SIDE / 2.0];
    let mut station_pts = Vec::with_capacity(n_stations);
    while station_pts.len() < n_stations {
        let p = point(rng, CEVRPTW_SIDE);
        if euclid(depot, p) <= battery {
            station_pts.push(p);
        }
    }
    let total = 1 + n + n_stations;
    let station_indices: Vec<usize> = (n + 1..total).collect();
    let mut service = vec![CEVRPTW_SERVICE; total];
    service[0] = 0.0;

    let mut coordinates = vec![depot];
    let mut access = Vec::with_capacity(n);
    for _ in 0..n {
        let mut tries = 0;
        loop {
            tries += 1;
            assert!(tries < MAX_REDRAWS, "customer placement failed");
            let p = point(rng, CEVRPTW_SIDE);
            let mut pts = vec![depot, p];
            pts.extend_from_slice(&station_pts);
            let d = distance_matrix(&pts);
            let st: Vec<usize> = (2..pts.len()).collect();
            let mut sv = vec![CEVRPTW_SERVICE; pts.len()];
            sv[0] = 0.0;
            if let Some((arr, ret)) = cevrptw_access(&d, 1, &st, &sv, battery) {
                if arr + CEVRPTW_SERVICE + ret <= horizon {
                    coordinates.push(p);
                    access.push((arr, horizon - CEVRPTW_SERVICE - ret));
                    break;
                }
            }
        }
    }
    coordinates.extend_from_slice(&station_pts);
    let distance_matrix = distance_matrix(&coordinates);

    let mut time_windows = vec![(0.0, horizon); total];
    for (i, &(earliest, latest)) in access.iter().enumerate() {
        let width = rng.random_range(3.0..=8.0);
        let centre = if latest > earliest { rng.random_range(earliest..=latest) } else { earliest };
        let e = (centre - width / 2.0).max(0.0);
        let l = (centre + width / 2.0).min(latest);
        time_windows[i + 1] = (e, l);
    }
    let mut demands = vec![0; total];
    for d in demands.iter_mut().take(n + 1).skip(1) {
        *d = rng.random_range(1..=5);
    }
    CevrptwInstance {
        distance_matrix,
        demands,
        time_windows,
        service_times: service,
        vehicle_capacity: CEVRPTW_CAPACITY,
        battery_capacity: battery,
        station_indices,
        coordinates,
    }
}

fn distance_matrix(pts: &[[f64; 2]]) -> Vec<Vec<f64>> {
    pts.iter().map(|a| pts.iter().map(|b| euclid(*a, *b)).collect()).collect()
}

/// Smallest total use of the second non-renewable resource for every total
/// use of the first, over all mode vectors; `None` when no vector fits.
pub(crate) fn nonrenewable_feasible(modes: &[Vec<Mode>], caps: &[u32]) -> bool {
    if caps.len() != 2 {
        // general case: greedy on the sum is not exact, enumerate per resource
        return caps.iter().enumerate().all(|(r, cap)| {
            modes.iter().map(|ms| ms.iter().map(|m| m.nonrenewable[r]).min().unwrap_or(0)).sum::<u32>() <= *cap
        });
    }
    let (k0, k1) = (caps[0] as usize, caps[1]);
    let mut best = vec![u32::MAX; k0 + 1];
    best[0] = 0;
    for ms in modes {
        let mut next = vec![u32::MAX; k0 + 1];
        for (u0, &u1) in best.iter().enumerate() {
            if u1 == u32::MAX {
                continue;
            }
            for m in ms {
                let a = u0 + m.nonrenewable[0] as usize;
                let b = u1 + m.nonrenewable[1];
                if a <= k0 && b < next[a] {
                    next[a] = b;
                }
            }
        }
        best = next;
    }
    best.iter().any(|&u1| u1 <= k1)
}

/// Three modes per activity, two renewable and two non-renewable resources.
/// Renewable capacities admit every single mode; non-renewable capacities
/// are the budget factor times the summed per-activity mean use.
fn gen_mrcpsp<R: Rng>(rng: &mut R, n: usize) -> MrcpspInstance {
    let total = n + 2;
    for _ in 0..MAX_REDRAWS {
        let dummy = Mode { duration: 0, renewable: vec![0, 0], nonrenewable: vec![0, 0] };
        let mut modes = vec![vec![dummy.clone()]];
        for _ in 0..n {
            modes.push(
                (0..MRCPSP_MODES)
                    .map(|_| Mode {
                        duration: rng.random_range(1..=10),
                        renewable: vec![rng.random_range(1..=10), rng.random_range(1..=10)],
                        nonrenewable: vec![rng.random_range(1..=10), rng.random_range(1..=10)],
                    })
                    .collect(),
            );
        }
        modes.push(vec![dummy]);

        let mut successors = vec![Vec::new(); total];
        let mut has_pred = vec![false; total];
        for j in 2..=n {
            let k = rng.random_range(0..=2.min(j - 1));
            let mut preds: Vec<usize> = sample(rng, j - 1, k).into_iter().map(|i| i + 1).collect();
            preds.sort_unstable();
            for p in preds {
                successors[p].push(j);
                has_pred[j] = true;
            }
        }
        for j in 1..=n {
            if !has_pred[j] {
                successors[0].push(j);
            }
            if successors[j].is_empty() {
                successors[j].push(n + 1);
            }
        }
        for s in successors.iter_mut() {
            s.sort_unstable();
        }

        let renewable_capacities =
            (0..2).map(|r| modes[1..=n].iter().flatten().map(|m| m.renewable[r]).max().unwrap_or(1)).collect();
        let nonrenewable_capacities: Vec<u32> = (0..2)
            .map(|r| {
                let mean_sum: f64 = modes[1..=n]
                    .iter()
                    .map(|ms| ms.iter().map(|m| m.nonrenewable[r] as f64).sum::<f64>() / ms.len() as f64)
                    .sum();
                libm::ceil(MRCPSP_BUDGET_FACTOR * mean_sum) as u32
            })
            .collect();
        if nonrenewable_feasible(&modes, &nonrenewable_capacities) {
            return MrcpspInstance { modes, successors, renewable_capacities, nonrenewable_capacities };
        }
    }
    panic!("no mode vector fits the non-renewable budget after {MAX_REDRAWS} draws");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitness_set_shape() {
        for p in Problem::ALL {
            let set = fitness_instances(p, 0);
            assert_eq!(set.len(), 16);
            for (k, inst) in set.iter().enumerate() {
                assert_eq!(inst.tier, Tier::FITNESS[k / PER_TIER]);
                assert_eq!(inst.problem(), p);
                let (a, _) = tier_dims(p, inst.tier);
                assert_eq!(inst.sigma, a, "{p} {:?}", inst.tier);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for p in Problem::ALL {
            assert_eq!(generate_instance(p, Tier::Small, 5), generate_instance(p, Tier::Small, 5));
            assert_ne!(generate_instance(p, Tier::Small, 5), generate_instance(p, Tier::Small, 6));
        }
    }

    #[test]
    fn parameter_ranges() {
        let InstanceData::Cflp(c) = generate_instance(Problem::Cflp, Tier::Medium, 1).data else { panic!() };
        assert_eq!((c.facility_capacities.len(), c.customer_demands.len()), (50, 50));
        assert!(c.facility_capacities.iter().all(|q| (5..=100).contains(q)));
        assert!(c.customer_demands.iter().all(|d| (5..=20).contains(d)));
        assert!(c.fixed_costs.iter().all(|f| (100.0..=500.0).contains(f)));

        let InstanceData::Cvrp(v) = generate_instance(Problem::Cvrp, Tier::Small, 1).data else { panic!() };
        assert!((20..=40).contains(&v.vehicle_capacity));
        assert_eq!(v.demands[0], 0);
        assert!(v.demands[1..].iter().all(|d| (1..=10).contains(d)));

        let InstanceData::Fjsp(f) = generate_instance(Problem::Fjsp, Tier::Small, 1).data else { panic!() };
        assert_eq!((f.jobs.len(), f.num_machines), (10, 5));
        for job in &f.jobs {
            assert!((5..=15).contains(&job.len()));
            for op in job {
                assert!(!op.is_empty());
                assert!(op.iter().all(|&(m, t)| m < 5 && (10..=100).contains(&t)));
            }
        }

        let InstanceData::Cevrptw(e) = generate_instance(Problem::Cevrptw, Tier::Medium, 1).data else { panic!() };
        assert_eq!(e.num_customers(), 40);
        assert_eq!(e.station_indices, (41..45).collect::<Vec<_>>());
        assert_eq!(e.battery_capacity, 5.0);
        assert_eq!(e.time_windows[0], (0.0, 20.0));
        assert!(e.service_times[1..].iter().all(|s| *s == 0.05));
        for (e_i, l_i) in &e.time_windows {
            assert!(*e_i >= 0.0 && e_i <= l_i && *l_i <= 20.0);
        }

        let InstanceData::Mrcpsp(m) = generate_instance(Problem::Mrcpsp, Tier::Large, 1).data else { panic!() };
        assert_eq!(m.modes.len(), 32);
        assert!(m.modes[1..31].iter().all(|ms| ms.len() == 3));
        assert_eq!((m.renewable_capacities.len(), m.nonrenewable_capacities.len()), (2, 2));
        // every activity except the sink reaches the sink
        for (j, s) in m.successors.iter().enumerate().take(31) {
            assert!(!s.is_empty(), "activity {j}");
            assert!(s.iter().all(|k| *k > j));
        }
    }

    #[test]
    fn mis_density_varies() {
        let d: Vec<usize> = (0..4).map(|i| match generate_instance(Problem::Mis, Tier::Medium, i).data {
            InstanceData::Mis(m) => m.edges.len(),
            _ => unreachable!(),
        }).collect();
        // p in [0.1, 0.3] over 4950 pairs
        assert!(d.iter().all(|e| (300..1700).contains(e)));
        assert!(d.iter().max() != d.iter().min());
    }
}

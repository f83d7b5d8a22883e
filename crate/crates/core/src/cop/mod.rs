//! Combinatorial optimisation problems: instances, solutions, validation,
//! objectives and exact oracles for tiny instances.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod generate;
pub mod oracle;
pub mod validate;
pub mod wire;

pub use generate::{fitness_instances, generate_instance, generate_tiny};
pub use oracle::oracle_optimum;
pub use validate::{objective, validate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Cflp,
    Cvrp,
    Fjsp,
    Mis,
    Cevrptw,
    Mrcpsp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Problem {
    pub const ALL: [Problem; 6] = [Problem::Cflp, Problem::Cvrp, Problem::Fjsp, Problem::Mis, Problem::Cevrptw, Problem::Mrcpsp];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Cflp => "cflp",
            Problem::Cvrp => "cvrp",
            Problem::Fjsp => "fjsp",
            Problem::Mis => "mis",
            Problem::Cevrptw => "cevrptw",
            Problem::Mrcpsp => "mrcpsp",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(name))
    }

    pub fn direction(self) -> Direction {
        match self {
            Problem::Mis => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }

    /// Conventional entry function name.
    pub fn entry_name(self) -> &'static str {
        match self {
            Problem::Cflp => "solve_cflp",
            Problem::Cvrp => "solve_cvrp",
            Problem::Fjsp => "solve_fjsp",
            Problem::Mis => "solve_mis",
            Problem::Cevrptw => "solve_cevrptw",
            Problem::Mrcpsp => "solve_mrcpsp",
        }
    }

    /// Payload fields passed positionally to the entry function.
    pub fn entry_arguments(self) -> &'static [&'static str] {
        match self {
            Problem::Cflp => &["facility_capacities", "customer_demands", "assignment_costs", "fixed_costs"],
            Problem::Cvrp => &["coordinates", "demands", "vehicle_capacity"],
            Problem::Fjsp => &["jobs", "num_machines"],
            Problem::Mis => &["num_vertices", "edges"],
            Problem::Cevrptw => &[
                "distance_matrix",
                "demands",
                "time_windows",
                "service_times",
                "vehicle_capacity",
                "battery_capacity",
                "station_indices",
            ],
            Problem::Mrcpsp => &["modes", "successors", "renewable_capacities", "nonrenewable_capacities"],
        }
    }

    pub fn task_description(self) -> &'static str {
        match self {
            Problem::Cflp => include_str!("../../data/problems/cflp.task.txt"),
            Problem::Cvrp => include_str!("../../data/problems/cvrp.task.txt"),
            Problem::Fjsp => include_str!("../../data/problems/fjsp.task.txt"),
            Problem::Mis => include_str!("../../data/problems/mis.task.txt"),
            Problem::Cevrptw => include_str!("../../data/problems/cevrptw.task.txt"),
            Problem::Mrcpsp => include_str!("../../data/problems/mrcpsp.task.txt"),
        }
    }

    /// Entry function skeleton handed to seed implementation prompts.
    pub fn function_template(self) -> &'static str {
        match self {
            Problem::Cflp => include_str!("../../data/problems/cflp.template.py"),
            Problem::Cvrp => include_str!("../../data/problems/cvrp.template.py"),
            Problem::Fjsp => include_str!("../../data/problems/fjsp.template.py"),
            Problem::Mis => include_str!("../../data/problems/mis.template.py"),
            Problem::Cevrptw => include_str!("../../data/problems/cevrptw.template.py"),
            Problem::Mrcpsp => include_str!("../../data/problems/mrcpsp.template.py"),
        }
    }
}

impl core::fmt::Display for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Oracle-sized instances for exact cross-checks; not part of fitness sets.
    Tiny,
    Small,
    Medium,
    Large,
    ExtraLarge,
}

impl Tier {
    pub const FITNESS: [Tier; 4] = [Tier::Small, Tier::Medium, Tier::Large, Tier::ExtraLarge];

    pub fn index(self) -> u64 {
        match self {
            Tier::Tiny => 0,
            Tier::Small => 1,
            Tier::Medium => 2,
            Tier::Large => 3,
            Tier::ExtraLarge => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CflpInstance {
    pub facility_capacities: Vec<u32>,
    pub customer_demands: Vec<u32>,
    /// `[facility][customer]`.
    pub assignment_costs: Vec<Vec<u32>>,
    pub fixed_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvrpInstance {
    /// Node 0 is the depot.
    pub coordinates: Vec<[f64; 2]>,
    pub demands: Vec<u32>,
    pub vehicle_capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjspInstance {
    /// `jobs[j][o]` lists eligible `(machine, processing time)` pairs.
    pub jobs: Vec<Vec<Vec<(usize, u32)>>>,
    pub num_machines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisInstance {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CevrptwInstance {
    /// Node 0 is the depot, customers follow, stations come last. Travel
    /// time and energy both equal the distance.
    pub distance_matrix: Vec<Vec<f64>>,
    pub demands: Vec<u32>,
    pub time_windows: Vec<(f64, f64)>,
    pub service_times: Vec<f64>,
    pub vehicle_capacity: u32,
    pub battery_capacity: f64,
    pub station_indices: Vec<usize>,
    pub coordinates: Vec<[f64; 2]>,
}

impl CevrptwInstance {
    pub fn num_customers(&self) -> usize {
        self.demands.len() - 1 - self.station_indices.len()
    }

    pub fn is_station(&self, node: usize) -> bool {
        self.station_indices.contains(&node)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub duration: u32,
    pub renewable: Vec<u32>,
    pub nonrenewable: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrcpspInstance {
    /// Activity 0 is the dummy source, the last activity the dummy sink.
    pub modes: Vec<Vec<Mode>>,
    pub successors: Vec<Vec<usize>>,
    pub renewable_capacities: Vec<u32>,
    pub nonrenewable_capacities: Vec<u32>,
}

impl MrcpspInstance {
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = alloc::vec![Vec::new(); self.modes.len()];
        for (i, succ) in self.successors.iter().enumerate() {
            for &j in succ {
                preds[j].push(i);
            }
        }
        preds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", content = "payload", rename_all = "lowercase")]
pub enum InstanceData {
    Cflp(CflpInstance),
    Cvrp(CvrpInstance),
    Fjsp(FjspInstance),
    Mis(MisInstance),
    Cevrptw(CevrptwInstance),
    Mrcpsp(MrcpspInstance),
}

/// A problem instance as exchanged with guests:
/// `{"tier", "seed", "sigma", "problem", "payload"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopInstance {
    pub tier: Tier,
    pub seed: u64,
    pub sigma: usize,
    #[serde(flatten)]
    pub data: InstanceData,
}

impl CopInstance {
    pub fn new(tier: Tier, seed: u64, data: InstanceData) -> Self {
        let sigma = sigma_of(&data);
        Self { tier, seed, sigma, data }
    }

    pub fn problem(&self) -> Problem {
        match self.data {
            InstanceData::Cflp(_) => Problem::Cflp,
            InstanceData::Cvrp(_) => Problem::Cvrp,
            InstanceData::Fjsp(_) => Problem::Fjsp,
            InstanceData::Mis(_) => Problem::Mis,
            InstanceData::Cevrptw(_) => Problem::Cevrptw,
            InstanceData::Mrcpsp(_) => Problem::Mrcpsp,
        }
    }

    /// Rough size used to pick the smallest instance of a set.
    pub fn size(&self) -> usize {
        match &self.data {
            InstanceData::Cflp(i) => i.facility_capacities.len() * i.customer_demands.len(),
            InstanceData::Cvrp(i) => i.demands.len(),
            InstanceData::Fjsp(i) => i.jobs.iter().map(Vec::len).sum::<usize>() * i.num_machines,
            InstanceData::Mis(i) => i.num_vertices + i.edges.len(),
            InstanceData::Cevrptw(i) => i.demands.len(),
            InstanceData::Mrcpsp(i) => i.modes.len(),
        }
    }
}

/// Customers for routing and location, jobs for scheduling, vertices for
/// graphs.
pub fn sigma_of(data: &InstanceData) -> usize {
    match data {
        InstanceData::Cflp(i) => i.customer_demands.len(),
        InstanceData::Cvrp(i) => i.demands.len() - 1,
        InstanceData::Fjsp(i) => i.jobs.len(),
        InstanceData::Mis(i) => i.num_vertices,
        InstanceData::Cevrptw(i) => i.num_customers(),
        InstanceData::Mrcpsp(i) => i.modes.len() - 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CopSolution {
    /// `(facility, customer)` pairs.
    Cflp(Vec<(usize, usize)>),
    /// Routes of customer indices; the depot is implicit at both ends.
    Cvrp(Vec<Vec<usize>>),
    /// Per job, per operation: `(machine, start time)`.
    Fjsp(Vec<Vec<(usize, f64)>>),
    Mis(Vec<usize>),
    /// Routes of customer and station indices; depot implicit.
    Cevrptw(Vec<Vec<usize>>),
    /// Per activity: `(mode index, finish time)`.
    Mrcpsp(Vec<(usize, i64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    Assignment,
    Visit,
    Capacity,
    Independence,
    Precedence,
    MachineOverlap,
    TimeWindow,
    Battery,
    Renewable,
    Nonrenewable,
    /// A variable outside its domain, e.g. a negative start time.
    Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Feasible,
    Infeasible { violation: Violation, detail: String },
}

impl Verdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Verdict::Feasible)
    }

    pub fn violation(&self) -> Option<Violation> {
        match self {
            Verdict::Feasible => None,
            Verdict::Infeasible { violation, .. } => Some(*violation),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CopError {
    #[error("malformed solution: {0}")]
    MalformedSolution(String),
    #[error("instance too large for the oracle")]
    TooLarge,
    #[error("solution is for a different problem")]
    ProblemMismatch,
    #[error("solution is infeasible")]
    Infeasible,
}

/// Euclidean distance with the operand order fixed so that every
/// implementation rounds identically.
pub fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    libm::sqrt(dx * dx + dy * dy)
}

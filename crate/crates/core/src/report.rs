//! Solution report assembly and JSON shape.

use serde::Serialize;

use crate::cost::JOULES_PER_KWH;
use crate::graph_xform::TransformedGraph;
use crate::model::{Instance, NodeId};
use crate::route_ga::Solution;

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct SortieReport {
    pub delivery_id: NodeId,
    pub sortie: SortieEndpoints,
    pub t_launch_s: f64,
    pub t_recover_s: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct SortieEndpoints {
    pub launch_id: NodeId,
    pub recover_id: NodeId,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct MassReport {
    #[serde(rename = "M0_star")]
    pub m0_star: f64,
    #[serde(rename = "M0_f")]
    pub m0_f: f64,
}

/// Solved-instance summary: objective breakdown, the route over mission
/// nodes, its embedded street path as edge indices into the augmented edge
/// list, the per-UAV schedule and the truck mass bookkeeping.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct SolutionReport {
    pub objective: f64,
    #[serde(rename = "E_dollars")]
    pub e_dollars: f64,
    #[serde(rename = "T_seconds")]
    pub t_seconds: f64,
    #[serde(rename = "J_dollars")]
    pub j_dollars: f64,
    pub route: Vec<NodeId>,
    pub embedded_path: Vec<usize>,
    /// One list per UAV, ordered by launch time.
    pub schedule: Vec<Vec<SortieReport>>,
    pub masses: MassReport,
}

/// Index of the augmented edge realizing a path segment.
fn edge_index(xform: &TransformedGraph, u: NodeId, v: NodeId, length_m: f64) -> Option<usize> {
    let mut fallback = None;
    for (i, e) in xform.aug.edges.iter().enumerate() {
        if (e.u == u && e.v == v) || (e.u == v && e.v == u) {
            if (e.length_m - length_m).abs() < 1e-9 {
                return Some(i);
            }
            fallback.get_or_insert(i);
        }
    }
    fallback
}

pub fn build_report(
    solution: &Solution,
    instance: &Instance,
    xform: &TransformedGraph,
) -> SolutionReport {
    let n_uavs = instance.uavs.len();
    let eval = &solution.evaluation;
    let mut embedded = Vec::new();
    for leg in solution.plan.route.windows(2) {
        if leg[0] == leg[1] {
            continue;
        }
        if let Some(path) = xform.embedded_path(leg[0], leg[1]) {
            for seg in path {
                if let Some(i) = edge_index(xform, seg.u, seg.v, seg.length_m) {
                    embedded.push(i);
                }
            }
        }
    }
    let mut schedule = vec![Vec::new(); n_uavs];
    if let Some(s) = &solution.schedule {
        for (k, sorties) in s.per_uav.iter().enumerate() {
            schedule[k] = sorties
                .iter()
                .map(|x| SortieReport {
                    delivery_id: x.delivery,
                    sortie: SortieEndpoints { launch_id: x.launch, recover_id: x.recover },
                    t_launch_s: x.t_launch_s,
                    t_recover_s: x.t_recover_s,
                    energy_j: x.energy_j,
                })
                .collect();
        }
    }
    SolutionReport {
        objective: solution.objective,
        e_dollars: eval.e_dollars,
        t_seconds: eval.t_seconds,
        j_dollars: instance.weights.w2 * eval.uav_flight_j / JOULES_PER_KWH,
        route: solution.plan.route.clone(),
        embedded_path: embedded,
        schedule,
        masses: MassReport {
            m0_star: eval.masses.start_mass_kg,
            m0_f: eval.masses.final_mass_kg,
        },
    }
}

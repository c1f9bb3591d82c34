//! Street-graph transformation.
//!
//! Rendezvous nodes are inserted along street edges within UAV range of each
//! UAV-eligible delivery, host edges are split at those points, feasible
//! sorties are enumerated per delivery, and the graph is closed metrically
//! over the mission nodes (depot, deliveries, rendezvous) with the realizing
//! street path stored for every pair.

use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::cost::{self, SortieGeometry};
use crate::error::SolveError;
use crate::model::{Instance, NodeClass, NodeId, NodeLabel, Point, StreetEdge, UavParams};

#[derive(Debug, Clone)]
pub struct XformConfig {
    /// Rendezvous candidates closer than this are merged, meters.
    pub merge_dist_m: f64,
    /// Evenly spaced extra candidates per in-range edge (1 = closest point only).
    pub samples_per_edge: u32,
}

impl Default for XformConfig {
    fn default() -> Self {
        XformConfig { merge_dist_m: 1.0, samples_per_edge: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RendezvousNode {
    pub id: NodeId,
    /// Index of the host edge in the original instance edge list.
    pub host_edge: usize,
    /// Position along the host edge, 0 at `u`, 1 at `v`.
    pub edge_param: f64,
    pub position: Point,
}

/// A feasible 3-node UAV round trip launch -> delivery -> recovery.
/// Energies are for the most economical fleet member that can fly it.
#[derive(Debug, Clone, Serialize)]
pub struct Sortie {
    pub launch: NodeId,
    pub delivery: NodeId,
    pub recover: NodeId,
    pub outbound_j: f64,
    pub return_j: f64,
    pub total_j: f64,
}

/// Instance street graph with rendezvous nodes inserted and host edges split.
#[derive(Debug, Clone, Serialize)]
pub struct AugmentedGraph {
    pub nodes: Vec<NodeLabel>,
    pub edges: Vec<StreetEdge>,
    pub rendezvous: Vec<RendezvousNode>,
}

impl AugmentedGraph {
    pub fn node(&self, id: NodeId) -> Option<&NodeLabel> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

/// One street edge inside an embedded shortest path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSeg {
    pub u: NodeId,
    pub v: NodeId,
    pub length_m: f64,
    pub speed_mps: f64,
}

/// Metric closure over mission nodes with embedded street paths and the
/// per-delivery sortie sets.
#[derive(Debug, Clone)]
pub struct TransformedGraph {
    pub aug: AugmentedGraph,
    /// Depot, truck deliveries, UAV deliveries and rendezvous nodes, sorted by id.
    pub mission_nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    dist: Vec<f64>,
    paths: Vec<Vec<PathSeg>>,
    pub sorties_by_delivery: HashMap<NodeId, Vec<Sortie>>,
}

impl TransformedGraph {
    pub fn mission_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn dist(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let (i, j) = (self.mission_index(u)?, self.mission_index(v)?);
        Some(self.dist[i * self.mission_nodes.len() + j])
    }

    /// Ordered street edges realizing the shortest path `u -> v`.
    pub fn embedded_path(&self, u: NodeId, v: NodeId) -> Option<&[PathSeg]> {
        let (i, j) = (self.mission_index(u)?, self.mission_index(v)?);
        Some(&self.paths[i * self.mission_nodes.len() + j])
    }

    pub fn node_pos(&self, id: NodeId) -> Option<Point> {
        self.aug.node(id).map(|n| n.pos())
    }

    pub fn is_rendezvous(&self, id: NodeId) -> bool {
        self.aug.node(id).map(|n| n.class == NodeClass::Rendezvous).unwrap_or(false)
    }
}

// ---------------------------------------------------------------------------
// R_max
// ---------------------------------------------------------------------------

fn out_and_back_energy(uav: &UavParams, payload_kg: f64, gravity: f64, radius_m: f64) -> f64 {
    let origin = Point { x: 0.0, y: 0.0, z: 0.0 };
    let target = Point { x: radius_m, y: 0.0, z: 0.0 };
    let geom = SortieGeometry {
        launch: origin,
        delivery: target,
        recover: origin,
        cruise_altitude_m: uav.cruise_altitude_m,
        truck_deck_z_m: 0.0,
    };
    cost::uav_sortie_energy(&geom, uav, payload_kg, gravity)
        .map(|e| e.total_j())
        .unwrap_or(f64::INFINITY)
}

/// Largest one-way level-flight radius for a battery-feasible out-and-back
/// sortie carrying `payload_kg` outbound. Bisection to 1e-6 m.
pub fn compute_rmax(uav: &UavParams, payload_kg: f64, gravity: f64) -> f64 {
    let batt = uav.battery_capacity_j;
    if out_and_back_energy(uav, payload_kg, gravity, 0.0) > batt {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    const CAP: f64 = 1.0e7;
    while out_and_back_energy(uav, payload_kg, gravity, hi) <= batt {
        lo = hi;
        hi *= 2.0;
        if hi >= CAP {
            return CAP;
        }
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if out_and_back_energy(uav, payload_kg, gravity, mid) <= batt {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// ---------------------------------------------------------------------------
// Rendezvous insertion
// ---------------------------------------------------------------------------

fn closest_param_2d(a: &Point, b: &Point, p: &Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return 0.0;
    }
    (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
}

/// Insert rendezvous nodes for every street edge within UAV range of each
/// UAV-eligible delivery, splitting host edges at the created points.
pub fn insert_rendezvous_nodes(instance: &Instance, config: &XformConfig) -> AugmentedGraph {
    let gravity = instance.truck.gravity_mps2;
    let pos_of: HashMap<NodeId, Point> = instance.nodes.iter().map(|n| (n.id, n.pos())).collect();

    // Per-delivery reach: the most capable UAV carrying that package.
    let mut candidates: Vec<(usize, f64, Point)> = Vec::new();
    for d in instance.nodes.iter().filter(|n| n.class == NodeClass::UavDelivery) {
        let radius = instance
            .uavs
            .iter()
            .map(|u| compute_rmax(u, d.package_kg, gravity))
            .fold(0.0, f64::max);
        if radius <= 0.0 {
            continue;
        }
        let dp = d.pos();
        for (ei, e) in instance.edges.iter().enumerate() {
            let a = pos_of[&e.u];
            let b = pos_of[&e.v];
            let t0 = closest_param_2d(&a, &b, &dp);
            let foot = a.lerp(&b, t0);
            if foot.dist2d(&dp) > radius {
                continue;
            }
            let mut params = vec![t0];
            // Extra evenly spaced candidates along the in-range edge.
            for s in 1..config.samples_per_edge {
                let t = s as f64 / config.samples_per_edge as f64;
                if a.lerp(&b, t).dist2d(&dp) <= radius {
                    params.push(t);
                }
            }
            for t in params {
                let t = t.clamp(1e-6, 1.0 - 1e-6);
                candidates.push((ei, t, a.lerp(&b, t)));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));

    // Deduplicate by merge distance, first candidate wins.
    let mut rendezvous: Vec<RendezvousNode> = Vec::new();
    let mut next_id = instance.max_node_id() + 1;
    for (ei, t, p) in candidates {
        if rendezvous.iter().any(|r| r.position.dist2d(&p) < config.merge_dist_m) {
            continue;
        }
        rendezvous.push(RendezvousNode {
            id: NodeId(next_id),
            host_edge: ei,
            edge_param: t,
            position: p,
        });
        next_id += 1;
    }

    // Split host edges at their rendezvous points.
    let mut nodes = instance.nodes.clone();
    for r in &rendezvous {
        nodes.push(NodeLabel {
            id: r.id,
            class: NodeClass::Rendezvous,
            package_kg: 0.0,
            x_m: r.position.x,
            y_m: r.position.y,
            z_m: r.position.z,
        });
    }
    let mut edges = Vec::new();
    for (ei, e) in instance.edges.iter().enumerate() {
        let mut cuts: Vec<(f64, NodeId)> =
            rendezvous.iter().filter(|r| r.host_edge == ei).map(|r| (r.edge_param, r.id)).collect();
        if cuts.is_empty() {
            edges.push(*e);
            continue;
        }
        cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prev = (0.0, e.u);
        for (t, id) in cuts.into_iter().chain(std::iter::once((1.0, e.v))) {
            edges.push(StreetEdge {
                u: prev.1,
                v: id,
                length_m: (t - prev.0) * e.length_m,
                speed_mps: e.speed_mps,
            });
            prev = (t, id);
        }
    }
    AugmentedGraph { nodes, edges, rendezvous }
}

// ---------------------------------------------------------------------------
// Sortie enumeration
// ---------------------------------------------------------------------------

/// Energy for one sortie `launch -> delivery -> recover` on a given UAV.
pub fn sortie_energy_for_uav(
    launch: Point,
    delivery: Point,
    recover: Point,
    uav: &UavParams,
    package_kg: f64,
    gravity: f64,
) -> Option<cost::SortieEnergy> {
    let geom = SortieGeometry {
        launch,
        delivery,
        recover,
        cruise_altitude_m: uav.cruise_altitude_m,
        truck_deck_z_m: launch.z,
    };
    cost::uav_sortie_energy(&geom, uav, package_kg, gravity).ok()
}

/// All ordered rendezvous pairs per delivery whose leg energies fit in at
/// least one fleet battery. Results are sorted by total energy.
pub fn enumerate_sorties(
    aug: &AugmentedGraph,
    instance: &Instance,
) -> HashMap<NodeId, Vec<Sortie>> {
    let gravity = instance.truck.gravity_mps2;
    let mut by_delivery = HashMap::new();
    for d in instance.nodes.iter().filter(|n| n.class == NodeClass::UavDelivery) {
        let dp = d.pos();
        // Necessary level-flight reach per UAV: battery over J/m, loaded and empty.
        let reach: Vec<(f64, f64)> = instance
            .uavs
            .iter()
            .map(|u| {
                let v = u.cruise_speed_mps;
                let loaded =
                    cost::transverse_power(u, u.empty_mass_kg + d.package_kg, gravity, v) / v;
                let empty = cost::transverse_power(u, u.empty_mass_kg, gravity, v) / v;
                (u.battery_capacity_j / loaded, u.battery_capacity_j / empty)
            })
            .collect();
        let max_out = reach.iter().map(|r| r.0).fold(0.0, f64::max);
        let max_back = reach.iter().map(|r| r.1).fold(0.0, f64::max);

        let launches: Vec<&RendezvousNode> =
            aug.rendezvous.iter().filter(|r| r.position.dist2d(&dp) <= max_out).collect();
        let recovers: Vec<&RendezvousNode> =
            aug.rendezvous.iter().filter(|r| r.position.dist2d(&dp) <= max_back).collect();

        let mut sorties = Vec::new();
        for a in &launches {
            for b in &recovers {
                let mut best: Option<cost::SortieEnergy> = None;
                for uav in &instance.uavs {
                    if let Some(e) =
                        sortie_energy_for_uav(a.position, dp, b.position, uav, d.package_kg, gravity)
                    {
                        if e.total_j() <= uav.battery_capacity_j
                            && best.map(|p| e.total_j() < p.total_j()).unwrap_or(true)
                        {
                            best = Some(e);
                        }
                    }
                }
                if let Some(e) = best {
                    sorties.push(Sortie {
                        launch: a.id,
                        delivery: d.id,
                        recover: b.id,
                        outbound_j: e.outbound_j,
                        return_j: e.return_j,
                        total_j: e.total_j(),
                    });
                }
            }
        }
        sorties.sort_by(|x, y| {
            x.total_j.total_cmp(&y.total_j).then(x.launch.cmp(&y.launch)).then(x.recover.cmp(&y.recover))
        });
        by_delivery.insert(d.id, sorties);
    }
    by_delivery
}

// ---------------------------------------------------------------------------
// Metric closure
// ---------------------------------------------------------------------------

/// All-pairs shortest street paths among mission nodes, with embedded paths.
pub fn metric_closure(
    aug: &AugmentedGraph,
    sorties_by_delivery: HashMap<NodeId, Vec<Sortie>>,
) -> Result<TransformedGraph, SolveError> {
    let mut mission: Vec<NodeId> = aug
        .nodes
        .iter()
        .filter(|n| {
            matches!(
                n.class,
                NodeClass::Depot | NodeClass::TruckDelivery | NodeClass::UavDelivery | NodeClass::Rendezvous
            )
        })
        .map(|n| n.id)
        .collect();
    mission.sort();
    let index: HashMap<NodeId, usize> = mission.iter().enumerate().map(|(i, &n)| (n, i)).collect();

    // Adjacency over the augmented graph.
    let all_ids: Vec<NodeId> = aug.nodes.iter().map(|n| n.id).collect();
    let id_index: HashMap<NodeId, usize> = all_ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut adj: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); all_ids.len()];
    for e in &aug.edges {
        let (ui, vi) = (id_index[&e.u], id_index[&e.v]);
        adj[ui].push((vi, e.length_m, e.speed_mps));
        adj[vi].push((ui, e.length_m, e.speed_mps));
    }

    let n = mission.len();
    let mut dist = vec![f64::INFINITY; n * n];
    let mut paths: Vec<Vec<PathSeg>> = vec![Vec::new(); n * n];
    for (mi, &src) in mission.iter().enumerate() {
        let (d, parent) = dijkstra(&adj, id_index[&src]);
        for (mj, &dst) in mission.iter().enumerate() {
            let di = id_index[&dst];
            if d[di].is_infinite() {
                return Err(SolveError::Disconnected(dst));
            }
            dist[mi * n + mj] = d[di];
            if mi != mj {
                paths[mi * n + mj] = extract_path(&all_ids, &adj, &parent, id_index[&src], di);
            }
        }
    }

    Ok(TransformedGraph {
        aug: aug.clone(),
        mission_nodes: mission,
        index,
        dist,
        paths,
        sorties_by_delivery,
    })
}

fn dijkstra(adj: &[Vec<(usize, f64, f64)>], src: usize) -> (Vec<f64>, Vec<usize>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap: BinaryHeap<(std::cmp::Reverse<ordered::OrdF64>, usize)> = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push((std::cmp::Reverse(ordered::OrdF64(0.0)), src));
    while let Some((std::cmp::Reverse(ordered::OrdF64(d)), u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, len, _) in &adj[u] {
            let nd = d + len;
            if nd < dist[v] {
                dist[v] = nd;
                parent[v] = u;
                heap.push((std::cmp::Reverse(ordered::OrdF64(nd)), v));
            }
        }
    }
    (dist, parent)
}

fn extract_path(
    ids: &[NodeId],
    adj: &[Vec<(usize, f64, f64)>],
    parent: &[usize],
    src: usize,
    dst: usize,
) -> Vec<PathSeg> {
    let mut rev = Vec::new();
    let mut cur = dst;
    while cur != src {
        let p = parent[cur];
        debug_assert!(p != usize::MAX);
        let &(_, len, speed) = adj[p]
            .iter()
            .filter(|&&(v, ..)| v == cur)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("parent edge exists");
        rev.push(PathSeg { u: ids[p], v: ids[cur], length_m: len, speed_mps: speed });
        cur = p;
    }
    rev.reverse();
    rev
}

mod ordered {
    #[derive(PartialEq, PartialOrd)]
    pub struct OrdF64(pub f64);
    impl Eq for OrdF64 {}
    #[allow(clippy::derive_ord_xor_partial_ord)]
    impl Ord for OrdF64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

/// Full transformation: rendezvous insertion, sortie enumeration, closure.
pub fn transform(
    instance: &Instance,
    config: &XformConfig,
) -> Result<TransformedGraph, SolveError> {
    let aug = insert_rendezvous_nodes(instance, config);
    let sorties = enumerate_sorties(&aug, instance);
    metric_closure(&aug, sorties)
}

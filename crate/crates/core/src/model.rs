//! Domain types, instance validation and JSON (de)serialization.
//!
//! An [`Instance`] is a street graph with labeled nodes plus the physical
//! parameters of the truck and the UAV fleet and the objective weights.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Node index. The depot is always id 1; rendezvous nodes created during the
/// graph transformation get fresh ids above every instance id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which of the disjoint node sets a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeClass {
    /// Node 1; the truck and all UAVs start and end here together.
    Depot,
    /// Delivery that only the truck can serve (set H).
    TruckDelivery,
    /// Delivery that a UAV may serve, though the truck still can (set D).
    UavDelivery,
    /// Street topology node, e.g. an intersection (set S).
    Street,
    /// Launch/recovery point created along a street edge (set R).
    Rendezvous,
}

impl NodeClass {
    pub fn is_delivery(self) -> bool {
        matches!(self, NodeClass::TruckDelivery | NodeClass::UavDelivery)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeLabel {
    pub id: NodeId,
    pub class: NodeClass,
    /// Mass of the package to deliver here; 0 when there is nothing to deliver.
    pub package_kg: f64,
    pub x_m: f64,
    pub y_m: f64,
    /// Height of the delivery point, or deck height for street/rendezvous nodes.
    pub z_m: f64,
}

impl NodeLabel {
    pub fn pos(&self) -> Point {
        Point { x: self.x_m, y: self.y_m, z: self.z_m }
    }
}

/// Euclidean position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub fn dist2d(&self, other: &Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    /// Linear interpolation, `t` in [0, 1].
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
            z: self.z + (other.z - self.z) * t,
        }
    }
}

/// Undirected street edge. Costs are direction-symmetric for equal mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreetEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub length_m: f64,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruckParams {
    pub empty_mass_kg: f64,
    /// Frontal area A, m^2.
    pub frontal_area_m2: f64,
    pub drag_coeff: f64,
    pub air_density_kgpm3: f64,
    pub rolling_friction: f64,
    pub gravity_mps2: f64,
    /// Maximum acceleration input, > 0.
    pub accel_input_mps2: f64,
    /// Maximum braking input, < 0.
    pub brake_input_mps2: f64,
    /// (c0, c1, c2): mL-fuel rate polynomial in velocity for the acceleration phase.
    pub idle_coeffs: [f64; 3],
    /// (b0, b1, b2, b3): mL-fuel rate polynomial in velocity for the cruise phase.
    pub cruise_coeffs: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavParams {
    pub uav_id: u32,
    pub empty_mass_kg: f64,
    /// (k1, k2) induced-power parameters.
    pub induced_coeffs: [f64; 2],
    /// (d1, d2, d3, d4, d5) power-model parameters.
    pub power_coeffs: [f64; 5],
    /// Ascent speed V_a > 0.
    pub ascent_speed_mps: f64,
    /// Descent speed V_d < 0.
    pub descent_speed_mps: f64,
    pub cruise_speed_mps: f64,
    /// Angle of attack during level flight, radians.
    pub attack_angle_rad: f64,
    pub battery_capacity_j: f64,
    pub cruise_altitude_m: f64,
}

/// Objective weights of `alpha * E + (1 - alpha) * T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    /// Dollars per mL of truck fuel.
    pub w1: f64,
    /// Dollars per kWh of UAV battery energy.
    pub w2: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { alpha: 0.9, w1: 0.000747, w2: 0.12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub nodes: Vec<NodeLabel>,
    pub edges: Vec<StreetEdge>,
    pub truck: TruckParams,
    pub uavs: Vec<UavParams>,
    pub weights: ObjectiveWeights,
}

pub const DEPOT_ID: NodeId = NodeId(1);

impl Instance {
    pub fn node(&self, id: NodeId) -> Option<&NodeLabel> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn depot(&self) -> &NodeLabel {
        self.node(DEPOT_ID).expect("validated instance has a depot")
    }

    /// Ids of the truck-only deliveries (set H), sorted.
    pub fn truck_delivery_ids(&self) -> Vec<NodeId> {
        let mut v: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.class == NodeClass::TruckDelivery)
            .map(|n| n.id)
            .collect();
        v.sort();
        v
    }

    /// Ids of the UAV-eligible deliveries (set D), sorted.
    pub fn uav_delivery_ids(&self) -> Vec<NodeId> {
        let mut v: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.class == NodeClass::UavDelivery)
            .map(|n| n.id)
            .collect();
        v.sort();
        v
    }

    pub fn total_package_mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.package_kg).sum()
    }

    pub fn max_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id.0).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.nodes.is_empty() {
            return Err(ModelError::validation("instance has no nodes"));
        }
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(ModelError::validation(format!("duplicate node id {}", n.id)));
            }
            if n.class == NodeClass::Rendezvous {
                return Err(ModelError::validation(format!(
                    "node {} has class Rendezvous; rendezvous nodes are derived, not input",
                    n.id
                )));
            }
            let has_package = n.package_kg > 0.0;
            if has_package != n.class.is_delivery() {
                return Err(ModelError::validation(format!(
                    "node {}: package_kg must be > 0 iff the node is a delivery",
                    n.id
                )));
            }
            if n.package_kg < 0.0 || !n.package_kg.is_finite() {
                return Err(ModelError::validation(format!("node {}: bad package mass", n.id)));
            }
        }
        let depots: Vec<_> = self.nodes.iter().filter(|n| n.class == NodeClass::Depot).collect();
        if depots.len() != 1 {
            return Err(ModelError::validation(format!(
                "instance must have exactly one depot, found {}",
                depots.len()
            )));
        }
        if depots[0].id != DEPOT_ID {
            return Err(ModelError::validation("depot id must be 1"));
        }
        for e in &self.edges {
            if e.u == e.v {
                return Err(ModelError::validation(format!("edge {}-{} is a self-loop", e.u, e.v)));
            }
            if !ids.contains(&e.u) || !ids.contains(&e.v) {
                return Err(ModelError::validation(format!(
                    "edge {}-{} references a missing node",
                    e.u, e.v
                )));
            }
            if !(e.length_m > 0.0) {
                return Err(ModelError::validation(format!("edge {}-{}: length must be > 0", e.u, e.v)));
            }
            if !(e.speed_mps > 0.0) {
                return Err(ModelError::validation(format!(
                    "edge {}-{}: speed limit must be > 0",
                    e.u, e.v
                )));
            }
        }
        if self.nodes.len() >= 2 && !self.is_connected() {
            return Err(ModelError::validation("disconnected graph"));
        }

        let t = &self.truck;
        if !(t.brake_input_mps2 < 0.0 && t.accel_input_mps2 > 0.0) {
            return Err(ModelError::validation("truck: need brake_input < 0 < accel_input"));
        }
        for (name, v) in [
            ("empty_mass_kg", t.empty_mass_kg),
            ("frontal_area_m2", t.frontal_area_m2),
            ("air_density_kgpm3", t.air_density_kgpm3),
            ("gravity_mps2", t.gravity_mps2),
        ] {
            if !(v > 0.0) {
                return Err(ModelError::validation(format!("truck: {name} must be > 0")));
            }
        }

        let max_z = self.nodes.iter().map(|n| n.z_m).fold(f64::NEG_INFINITY, f64::max);
        for u in &self.uavs {
            if !(u.ascent_speed_mps > 0.0) {
                return Err(ModelError::validation(format!("uav {}: ascent speed must be > 0", u.uav_id)));
            }
            if !(u.descent_speed_mps < 0.0) {
                return Err(ModelError::validation(format!("uav {}: descent speed must be < 0", u.uav_id)));
            }
            if !(u.cruise_speed_mps > 0.0) {
                return Err(ModelError::validation(format!("uav {}: cruise speed must be > 0", u.uav_id)));
            }
            if !(u.battery_capacity_j > 0.0) {
                return Err(ModelError::validation(format!("uav {}: battery must be > 0", u.uav_id)));
            }
            if !(u.cruise_altitude_m > max_z) {
                return Err(ModelError::validation(format!(
                    "uav {}: cruise altitude must be above every node",
                    u.uav_id
                )));
            }
        }

        let w = &self.weights;
        if !(0.0..=1.0).contains(&w.alpha) {
            return Err(ModelError::validation("weights: alpha must be in [0, 1]"));
        }
        if w.w1 < 0.0 || w.w2 < 0.0 {
            return Err(ModelError::validation("weights: w1, w2 must be >= 0"));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for e in &self.edges {
            adj.entry(e.u).or_default().push(e.v);
            adj.entry(e.v).or_default().push(e.u);
        }
        let start = self.nodes[0].id;
        let mut seen = HashSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in adj.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == self.nodes.len()
    }
}

/// Load and validate an instance from a JSON file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, ModelError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.as_ref().display())))?;
    instance_from_json(&text)
}

pub fn instance_from_json(text: &str) -> Result<Instance, ModelError> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    inst.validate()?;
    Ok(inst)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let text = instance_to_json(inst);
    std::fs::write(path.as_ref(), text)
        .map_err(|e| ModelError::Io(format!("{}: {e}", path.as_ref().display())))
}

pub fn instance_to_json(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, GenConfig};

    fn tiny() -> Instance {
        Instance {
            nodes: vec![
                NodeLabel { id: NodeId(1), class: NodeClass::Depot, package_kg: 0.0, x_m: 0.0, y_m: 0.0, z_m: 0.0 },
                NodeLabel { id: NodeId(2), class: NodeClass::Street, package_kg: 0.0, x_m: 100.0, y_m: 0.0, z_m: 0.0 },
            ],
            edges: vec![StreetEdge { u: NodeId(1), v: NodeId(2), length_m: 100.0, speed_mps: 10.0 }],
            truck: crate::generate::default_truck(),
            uavs: vec![],
            weights: ObjectiveWeights::default(),
        }
    }

    #[test]
    fn valid_tiny_instance() {
        tiny().validate().unwrap();
    }

    #[test]
    fn singleton_depot_is_valid_but_two_nodes_without_edges_are_not() {
        let mut inst = tiny();
        inst.edges.clear();
        inst.nodes.truncate(1);
        inst.validate().unwrap();

        let mut inst = tiny();
        inst.edges.clear();
        let err = inst.validate().unwrap_err();
        assert!(err.to_string().contains("disconnected graph"), "{err}");
    }

    #[test]
    fn two_depots_rejected() {
        let mut inst = tiny();
        inst.nodes[1].class = NodeClass::Depot;
        assert!(inst.validate().is_err());
    }

    #[test]
    fn depot_must_be_node_one() {
        let mut inst = tiny();
        inst.nodes[0].class = NodeClass::Street;
        inst.nodes[1].class = NodeClass::Depot;
        let err = inst.validate().unwrap_err();
        assert!(err.to_string().contains("depot id must be 1"), "{err}");
    }

    #[test]
    fn package_mass_iff_delivery() {
        let mut inst = tiny();
        inst.nodes[1].package_kg = 2.0;
        assert!(inst.validate().is_err());
        inst.nodes[1].class = NodeClass::TruckDelivery;
        inst.validate().unwrap();
        inst.nodes[1].package_kg = 0.0;
        assert!(inst.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let inst = generate_instance(7, 2, 3, 2, "grid-city", &GenConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        save_instance(&inst, &path).unwrap();
        let back = load_instance(&path).unwrap();
        assert_eq!(inst, back);
    }
}

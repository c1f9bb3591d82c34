//! Random instance generation on built-in street maps.
//!
//! Delivery locations, package masses and UAV parameters are drawn from
//! configurable ranges; everything is a pure function of the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{
    Instance, NodeClass, NodeId, NodeLabel, ObjectiveWeights, StreetEdge, TruckParams, UavParams,
};

/// Generator ranges. All `*_range` fields are inclusive-low, exclusive-high.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    /// Package mass range for truck-only deliveries (set H), kg.
    pub truck_package_kg: (f64, f64),
    /// Package mass range for UAV-eligible deliveries (set D), kg.
    pub uav_package_kg: (f64, f64),
    /// Delivery point height range, m.
    pub delivery_z_m: (f64, f64),
    pub uav_empty_mass_kg: (f64, f64),
    pub uav_battery_j: (f64, f64),
    pub uav_cruise_speed_mps: (f64, f64),
    pub uav_ascent_speed_mps: (f64, f64),
    pub uav_cruise_altitude_m: (f64, f64),
    pub uav_k1: (f64, f64),
    pub uav_k2: (f64, f64),
    pub uav_d1: (f64, f64),
    pub uav_d2: (f64, f64),
    pub uav_d3: (f64, f64),
    pub uav_d4: (f64, f64),
    pub uav_d5: (f64, f64),
    pub uav_attack_angle_rad: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        // UAV ranges sized so every fleet member can lift the heaviest
        // D-package and reach a few hundred meters out-and-back.
        GenConfig {
            truck_package_kg: (5.0, 40.0),
            uav_package_kg: (0.3, 2.5),
            delivery_z_m: (0.5, 2.0),
            uav_empty_mass_kg: (1.2, 1.8),
            uav_battery_j: (35_000.0, 60_000.0),
            uav_cruise_speed_mps: (12.0, 18.0),
            uav_ascent_speed_mps: (3.5, 5.5),
            uav_cruise_altitude_m: (20.0, 30.0),
            uav_k1: (0.5, 0.9),
            uav_k2: (0.2, 0.4),
            uav_d1: (2.0, 4.0),
            uav_d2: (0.3, 0.7),
            uav_d3: (0.01, 0.03),
            uav_d4: (0.005, 0.02),
            uav_d5: (0.001, 0.003),
            uav_attack_angle_rad: (0.05, 0.15),
        }
    }
}

impl GenConfig {
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<GenConfig, ModelError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.as_ref().display())))?;
        serde_json::from_str(&text).map_err(|e| ModelError::Parse(e.to_string()))
    }
}

pub fn default_truck() -> TruckParams {
    TruckParams {
        empty_mass_kg: 3500.0,
        frontal_area_m2: 8.0,
        drag_coeff: 0.6,
        air_density_kgpm3: 1.2,
        rolling_friction: 0.01,
        gravity_mps2: 9.81,
        accel_input_mps2: 1.5,
        brake_input_mps2: -2.0,
        idle_coeffs: [1.0, 0.1, 0.01],
        cruise_coeffs: [0.5, 0.1, 0.008, 0.001],
    }
}

struct GridMap {
    cols: u32,
    rows: u32,
    spacing_m: f64,
    speed_mps: f64,
}

fn builtin_map(name: &str) -> Result<GridMap, ModelError> {
    match name {
        // Grid city standing in for a scaled-up smart-city street layout.
        "grid-city" => Ok(GridMap { cols: 5, rows: 5, spacing_m: 250.0, speed_mps: 13.4 }),
        "grid-city-small" => Ok(GridMap { cols: 3, rows: 3, spacing_m: 150.0, speed_mps: 11.2 }),
        other => Err(ModelError::UnknownMap(other.to_string())),
    }
}

pub fn builtin_map_names() -> &'static [&'static str] {
    &["grid-city", "grid-city-small"]
}

/// Deterministically generate a validated instance.
pub fn generate_instance(
    seed: u64,
    n_truck_deliveries: u32,
    n_uav_deliveries: u32,
    n_uavs: u32,
    map: &str,
    config: &GenConfig,
) -> Result<Instance, ModelError> {
    let grid = builtin_map(map)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut nodes = Vec::new();
    let mut edges = Vec::new();

    // Street grid; node (0,0) is the depot, ids are 1-based row-major.
    let id_at = |c: u32, r: u32| NodeId(1 + r * grid.cols + c);
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let class = if c == 0 && r == 0 { NodeClass::Depot } else { NodeClass::Street };
            nodes.push(NodeLabel {
                id: id_at(c, r),
                class,
                package_kg: 0.0,
                x_m: c as f64 * grid.spacing_m,
                y_m: r as f64 * grid.spacing_m,
                z_m: 0.0,
            });
            if c + 1 < grid.cols {
                edges.push(StreetEdge {
                    u: id_at(c, r),
                    v: id_at(c + 1, r),
                    length_m: grid.spacing_m,
                    speed_mps: grid.speed_mps,
                });
            }
            if r + 1 < grid.rows {
                edges.push(StreetEdge {
                    u: id_at(c, r),
                    v: id_at(c, r + 1),
                    length_m: grid.spacing_m,
                    speed_mps: grid.speed_mps,
                });
            }
        }
    }

    let extent_x = (grid.cols - 1) as f64 * grid.spacing_m;
    let extent_y = (grid.rows - 1) as f64 * grid.spacing_m;
    let mut next_id = grid.cols * grid.rows + 1;
    let mut place_delivery = |rng: &mut ChaCha8Rng,
                              nodes: &mut Vec<NodeLabel>,
                              edges: &mut Vec<StreetEdge>,
                              class: NodeClass,
                              mass_range: (f64, f64)| {
        let x = rng.gen_range(0.0..extent_x);
        let y = rng.gen_range(0.0..extent_y);
        let z = rng.gen_range(config.delivery_z_m.0..config.delivery_z_m.1);
        let mass = rng.gen_range(mass_range.0..mass_range.1);
        // Driveway spur to the nearest intersection keeps the node
        // truck-reachable.
        let nearest = nodes
            .iter()
            .filter(|n| matches!(n.class, NodeClass::Street | NodeClass::Depot))
            .min_by(|a, b| {
                let da = (a.x_m - x).hypot(a.y_m - y);
                let db = (b.x_m - x).hypot(b.y_m - y);
                da.total_cmp(&db)
            })
            .expect("grid has street nodes");
        let spur_len = ((nearest.x_m - x).hypot(nearest.y_m - y)).max(1.0);
        let nearest_id = nearest.id;
        let id = NodeId(next_id);
        next_id += 1;
        nodes.push(NodeLabel { id, class, package_kg: mass, x_m: x, y_m: y, z_m: z });
        edges.push(StreetEdge { u: nearest_id, v: id, length_m: spur_len, speed_mps: 8.0 });
    };

    for _ in 0..n_truck_deliveries {
        place_delivery(&mut rng, &mut nodes, &mut edges, NodeClass::TruckDelivery, config.truck_package_kg);
    }
    for _ in 0..n_uav_deliveries {
        place_delivery(&mut rng, &mut nodes, &mut edges, NodeClass::UavDelivery, config.uav_package_kg);
    }

    let uavs = (0..n_uavs).map(|k| random_uav(k, &mut rng, config)).collect();

    let inst = Instance {
        nodes,
        edges,
        truck: default_truck(),
        uavs,
        weights: ObjectiveWeights::default(),
    };
    inst.validate()?;
    Ok(inst)
}

fn random_uav(k: u32, rng: &mut ChaCha8Rng, c: &GenConfig) -> UavParams {
    let ascent = rng.gen_range(c.uav_ascent_speed_mps.0..c.uav_ascent_speed_mps.1);
    UavParams {
        uav_id: k,
        empty_mass_kg: rng.gen_range(c.uav_empty_mass_kg.0..c.uav_empty_mass_kg.1),
        induced_coeffs: [rng.gen_range(c.uav_k1.0..c.uav_k1.1), rng.gen_range(c.uav_k2.0..c.uav_k2.1)],
        power_coeffs: [
            rng.gen_range(c.uav_d1.0..c.uav_d1.1),
            rng.gen_range(c.uav_d2.0..c.uav_d2.1),
            rng.gen_range(c.uav_d3.0..c.uav_d3.1),
            rng.gen_range(c.uav_d4.0..c.uav_d4.1),
            rng.gen_range(c.uav_d5.0..c.uav_d5.1),
        ],
        ascent_speed_mps: ascent,
        descent_speed_mps: -ascent,
        cruise_speed_mps: rng.gen_range(c.uav_cruise_speed_mps.0..c.uav_cruise_speed_mps.1),
        attack_angle_rad: rng.gen_range(c.uav_attack_angle_rad.0..c.uav_attack_angle_rad.1),
        battery_capacity_j: rng.gen_range(c.uav_battery_j.0..c.uav_battery_j.1),
        cruise_altitude_m: rng.gen_range(c.uav_cruise_altitude_m.0..c.uav_cruise_altitude_m.1),
    }
}

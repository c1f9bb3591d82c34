//! Energy and time cost models.
//!
//! Truck: fuel burned accelerating away from stops (rate polynomial in
//! velocity times the drag/friction-adjusted acceleration, cut off while
//! braking) plus a cruise fuel rate polynomial, with bang-bang edge timing.
//! UAV: ascend/descend/level-flight energy of a mass-dependent quadrotor
//! power model. Aggregation produces `E(r)` in dollars, `T(r)` in seconds
//! and the weighted objective.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph_xform::TransformedGraph;
use crate::model::{Instance, NodeClass, NodeId, Point, TruckParams, UavParams};
use crate::route_ga::RoutePlan;
use crate::scheduler::Schedule;

pub const JOULES_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("invalid flight leg: {0}")]
    BadLeg(String),
    #[error("route visits node {0} twice")]
    RouteRevisit(NodeId),
    #[error("route violates {0}")]
    Constraint(String),
}

// ---------------------------------------------------------------------------
// Truck edge timing
// ---------------------------------------------------------------------------

/// Bang-bang velocity profile over one street edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile {
    pub accel_s: f64,
    pub accel_dist_m: f64,
    pub cruise_s: f64,
    pub cruise_dist_m: f64,
    pub brake_s: f64,
    pub brake_dist_m: f64,
    /// Peak speed actually reached; below the limit on short edges.
    pub peak_speed_mps: f64,
    /// True when the edge was too short for the full profile.
    pub triangular: bool,
}

impl TimeProfile {
    pub fn total_s(&self) -> f64 {
        self.accel_s + self.cruise_s + self.brake_s
    }

    /// Distance covered `dt` seconds after entering the edge.
    pub fn dist_at(&self, dt: f64, accel: f64, brake: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        if dt < self.accel_s {
            return 0.5 * accel * dt * dt;
        }
        let mut d = self.accel_dist_m;
        let dt = dt - self.accel_s;
        if dt < self.cruise_s {
            return d + self.peak_speed_mps * dt;
        }
        d += self.cruise_dist_m;
        let dt = (dt - self.cruise_s).min(self.brake_s);
        d + self.peak_speed_mps * dt - 0.5 * brake.abs() * dt * dt
    }
}

/// Velocity profile for an edge of length `d` with speed limit `v`.
///
/// `stop_at_start` means the truck departs from rest; `stop_at_end` means it
/// must come to rest at the far end. Edges too short to complete the
/// requested phases fall back to a triangular profile with a lower peak.
pub fn truck_edge_profile(
    d: f64,
    v: f64,
    stop_at_start: bool,
    stop_at_end: bool,
    truck: &TruckParams,
) -> TimeProfile {
    assert!(d > 0.0 && v > 0.0, "edge length and speed must be positive");
    let ua = truck.accel_input_mps2;
    let ub = truck.brake_input_mps2.abs();
    let d_acc = v * v / (2.0 * ua);
    let d_brk = v * v / (2.0 * ub);
    match (stop_at_start, stop_at_end) {
        (false, false) => TimeProfile {
            accel_s: 0.0,
            accel_dist_m: 0.0,
            cruise_s: d / v,
            cruise_dist_m: d,
            brake_s: 0.0,
            brake_dist_m: 0.0,
            peak_speed_mps: v,
            triangular: false,
        },
        (true, false) => {
            if d >= d_acc {
                TimeProfile {
                    accel_s: v / ua,
                    accel_dist_m: d_acc,
                    cruise_s: (d - d_acc) / v,
                    cruise_dist_m: d - d_acc,
                    brake_s: 0.0,
                    brake_dist_m: 0.0,
                    peak_speed_mps: v,
                    triangular: false,
                }
            } else {
                let peak = (2.0 * d * ua).sqrt();
                TimeProfile {
                    accel_s: peak / ua,
                    accel_dist_m: d,
                    cruise_s: 0.0,
                    cruise_dist_m: 0.0,
                    brake_s: 0.0,
                    brake_dist_m: 0.0,
                    peak_speed_mps: peak,
                    triangular: true,
                }
            }
        }
        (false, true) => {
            if d >= d_brk {
                TimeProfile {
                    accel_s: 0.0,
                    accel_dist_m: 0.0,
                    cruise_s: (d - d_brk) / v,
                    cruise_dist_m: d - d_brk,
                    brake_s: v / ub,
                    brake_dist_m: d_brk,
                    peak_speed_mps: v,
                    triangular: false,
                }
            } else {
                let peak = (2.0 * d * ub).sqrt();
                TimeProfile {
                    accel_s: 0.0,
                    accel_dist_m: 0.0,
                    cruise_s: 0.0,
                    cruise_dist_m: 0.0,
                    brake_s: peak / ub,
                    brake_dist_m: d,
                    peak_speed_mps: peak,
                    triangular: true,
                }
            }
        }
        (true, true) => {
            if d >= d_acc + d_brk {
                TimeProfile {
                    accel_s: v / ua,
                    accel_dist_m: d_acc,
                    cruise_s: (d - d_acc - d_brk) / v,
                    cruise_dist_m: d - d_acc - d_brk,
                    brake_s: v / ub,
                    brake_dist_m: d_brk,
                    peak_speed_mps: v,
                    triangular: false,
                }
            } else {
                let peak = (2.0 * d * ua * ub / (ua + ub)).sqrt();
                TimeProfile {
                    accel_s: peak / ua,
                    accel_dist_m: peak * peak / (2.0 * ua),
                    cruise_s: 0.0,
                    cruise_dist_m: 0.0,
                    brake_s: peak / ub,
                    brake_dist_m: peak * peak / (2.0 * ub),
                    peak_speed_mps: peak,
                    triangular: true,
                }
            }
        }
    }
}

pub fn truck_edge_time(
    d: f64,
    v: f64,
    stop_at_start: bool,
    stop_at_end: bool,
    truck: &TruckParams,
) -> f64 {
    truck_edge_profile(d, v, stop_at_start, stop_at_end, truck).total_s()
}

// ---------------------------------------------------------------------------
// Truck edge energy
// ---------------------------------------------------------------------------

/// Fuel burned during the acceleration phase 0 -> `v_peak`, mL.
///
/// Integrand is `a_hat(v) * (c0 + c1 v + c2 v^2)` with
/// `a_hat = u_acc - mu g - Cd rho A v^2 / (2 M)`, clamped at zero from
/// below. With `v = u_acc t` this is a quartic in `v`, integrated in closed
/// form up to the clamp point.
fn accel_phase_fuel(truck: &TruckParams, mass: f64, v_peak: f64) -> f64 {
    let ua = truck.accel_input_mps2;
    let k0 = ua - truck.rolling_friction * truck.gravity_mps2;
    if k0 <= 0.0 || v_peak <= 0.0 {
        return 0.0;
    }
    let k2 = truck.drag_coeff * truck.air_density_kgpm3 * truck.frontal_area_m2 / (2.0 * mass);
    // a_hat crosses zero at v_star; only integrate where it is positive.
    let v_end = if k2 > 0.0 { v_peak.min((k0 / k2).sqrt()) } else { v_peak };
    let [c0, c1, c2] = truck.idle_coeffs;
    // (k0 - k2 v^2)(c0 + c1 v + c2 v^2) expanded in powers of v.
    let p = [
        k0 * c0,
        k0 * c1,
        k0 * c2 - k2 * c0,
        -k2 * c1,
        -k2 * c2,
    ];
    let mut integral = 0.0;
    let mut vn = v_end;
    for (i, pi) in p.iter().enumerate() {
        integral += pi * vn / (i as f64 + 1.0);
        vn *= v_end;
    }
    integral / ua
}

fn cruise_fuel_rate(truck: &TruckParams, v: f64) -> f64 {
    let [b0, b1, b2, b3] = truck.cruise_coeffs;
    b0 + b1 * v + b2 * v * v + b3 * v * v * v
}

/// Total fuel for one edge, mL. Braking burns nothing.
pub fn truck_edge_energy(
    d: f64,
    v: f64,
    mass: f64,
    stop_at_start: bool,
    stop_at_end: bool,
    truck: &TruckParams,
) -> f64 {
    let profile = truck_edge_profile(d, v, stop_at_start, stop_at_end, truck);
    truck_profile_energy(&profile, mass, truck)
}

pub fn truck_profile_energy(profile: &TimeProfile, mass: f64, truck: &TruckParams) -> f64 {
    let accel = if profile.accel_s > 0.0 {
        accel_phase_fuel(truck, mass, profile.peak_speed_mps)
    } else {
        0.0
    };
    let cruise = cruise_fuel_rate(truck, profile.peak_speed_mps) * profile.cruise_s;
    accel + cruise
}

// ---------------------------------------------------------------------------
// UAV flight energy
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlightLeg {
    Ascend,
    Descend,
    Transverse,
}

fn vertical_bracket(uav: &UavParams, mass: f64, gravity: f64, v: f64) -> f64 {
    let [k1, k2] = uav.induced_coeffs;
    let [_, d2, ..] = uav.power_coeffs;
    let mg = mass * gravity;
    let mut p = d2 * mg.powf(1.5);
    if k1 != 0.0 {
        p += k1 * mg * (v / 2.0 + ((v / 2.0).powi(2) + mg / (k2 * k2)).sqrt());
    }
    p
}

pub fn ascend_energy(
    uav: &UavParams,
    mass: f64,
    gravity: f64,
    z_from: f64,
    z_to: f64,
) -> Result<f64, CostError> {
    if z_to < z_from {
        return Err(CostError::BadLeg(format!("ascend from {z_from} to lower {z_to}")));
    }
    let dz = z_to - z_from;
    Ok(dz / uav.ascent_speed_mps * vertical_bracket(uav, mass, gravity, uav.ascent_speed_mps))
}

pub fn descend_energy(
    uav: &UavParams,
    mass: f64,
    gravity: f64,
    z_from: f64,
    z_to: f64,
) -> Result<f64, CostError> {
    if z_to > z_from {
        return Err(CostError::BadLeg(format!("descend from {z_from} to higher {z_to}")));
    }
    // (z_to - z_from) and V_d are both negative; the duration is positive.
    let dz = z_to - z_from;
    Ok(dz / uav.descent_speed_mps * vertical_bracket(uav, mass, gravity, uav.descent_speed_mps))
}

/// Instantaneous level-flight power at speed `v`: hover + parasite + profile.
pub fn transverse_power(uav: &UavParams, mass: f64, gravity: f64, v: f64) -> f64 {
    let [d1, d2, d3, d4, d5] = uav.power_coeffs;
    let mg = mass * gravity;
    let vca = v * uav.attack_angle_rad.cos();
    let thrust = ((mg - d5 * vca * vca).powi(2) + (d4 * v * v).powi(2)).sqrt();
    let p_hover = d1 * thrust.powf(1.5);
    let p_par = d4 * v * v * v;
    let p_profile = d2 * thrust.powf(1.5) + d3 * vca * vca * thrust.sqrt();
    p_hover + p_par + p_profile
}

pub fn transverse_energy(uav: &UavParams, mass: f64, gravity: f64, distance: f64) -> f64 {
    if distance == 0.0 {
        return 0.0;
    }
    let v = uav.cruise_speed_mps;
    transverse_power(uav, mass, gravity, v) * distance / v
}

pub fn uav_leg_energy(
    leg: FlightLeg,
    uav: &UavParams,
    mass: f64,
    gravity: f64,
    horizontal_distance: f64,
    z_from: f64,
    z_to: f64,
) -> Result<f64, CostError> {
    if mass < uav.empty_mass_kg {
        return Err(CostError::BadLeg(format!(
            "mass {mass} below UAV empty mass {}",
            uav.empty_mass_kg
        )));
    }
    match leg {
        FlightLeg::Ascend => ascend_energy(uav, mass, gravity, z_from, z_to),
        FlightLeg::Descend => descend_energy(uav, mass, gravity, z_from, z_to),
        FlightLeg::Transverse => {
            if horizontal_distance < 0.0 {
                return Err(CostError::BadLeg("negative transverse distance".into()));
            }
            Ok(transverse_energy(uav, mass, gravity, horizontal_distance))
        }
    }
}

/// Launch -> delivery -> recovery geometry of one sortie.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortieGeometry {
    pub launch: Point,
    pub delivery: Point,
    pub recover: Point,
    pub cruise_altitude_m: f64,
    pub truck_deck_z_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SortieEnergy {
    pub outbound_j: f64,
    pub return_j: f64,
}

impl SortieEnergy {
    pub fn total_j(&self) -> f64 {
        self.outbound_j + self.return_j
    }
}

/// Full out-and-back sortie energy. The package rides the outbound leg only.
pub fn uav_sortie_energy(
    geom: &SortieGeometry,
    uav: &UavParams,
    package_kg: f64,
    gravity: f64,
) -> Result<SortieEnergy, CostError> {
    let loaded = uav.empty_mass_kg + package_kg;
    let empty = uav.empty_mass_kg;
    let alt = geom.cruise_altitude_m;
    let outbound = ascend_energy(uav, loaded, gravity, geom.truck_deck_z_m, alt)?
        + transverse_energy(uav, loaded, gravity, geom.launch.dist2d(&geom.delivery))
        + descend_energy(uav, loaded, gravity, alt, geom.delivery.z)?;
    let ret = ascend_energy(uav, empty, gravity, geom.delivery.z, alt)?
        + transverse_energy(uav, empty, gravity, geom.delivery.dist2d(&geom.recover))
        + descend_energy(uav, empty, gravity, alt, geom.truck_deck_z_m)?;
    Ok(SortieEnergy { outbound_j: outbound, return_j: ret })
}

// ---------------------------------------------------------------------------
// Mass propagation
// ---------------------------------------------------------------------------

/// Truck system mass along the route. Docked UAV masses are excluded from
/// truck propulsion; their transport cost is the separate marginal model.
#[derive(Debug, Clone, PartialEq)]
pub struct MassProfile {
    pub start_mass_kg: f64,
    /// Mass right after leaving each route node (post-delivery/launch).
    pub node_masses_kg: HashMap<NodeId, f64>,
    pub final_mass_kg: f64,
    /// Loaded UAV mass on the outbound leg, per UAV-served delivery.
    pub uav_outbound_kg: HashMap<NodeId, f64>,
}

/// Propagate system mass along the truck route.
///
/// Truck-served packages leave at their node; UAV-served packages leave at
/// the launch rendezvous given in `launch_of` (delivery id -> launch node).
pub fn mass_profile(
    plan: &RoutePlan,
    launch_of: &HashMap<NodeId, NodeId>,
    instance: &Instance,
) -> Result<MassProfile, CostError> {
    let mut seen = std::collections::HashSet::new();
    for &id in &plan.route[..plan.route.len() - 1] {
        if !seen.insert(id) {
            return Err(CostError::RouteRevisit(id));
        }
    }

    // Mass shed at each route node: own package for truck-served stops plus
    // packages launched from this rendezvous.
    let mut shed: HashMap<NodeId, f64> = HashMap::new();
    for &id in &plan.route {
        let node = instance.node(id);
        if let Some(n) = node {
            if n.class.is_delivery() && !plan.uav_served.contains(&id) {
                *shed.entry(id).or_default() += n.package_kg;
            }
        }
    }
    let mut uav_outbound = HashMap::new();
    for (&delivery, &launch) in launch_of {
        let pkg = instance.node(delivery).map(|n| n.package_kg).unwrap_or(0.0);
        *shed.entry(launch).or_default() += pkg;
        let uav_empty =
            instance.uavs.first().map(|u| u.empty_mass_kg).unwrap_or(0.0);
        uav_outbound.insert(delivery, uav_empty + pkg);
    }

    let start = instance.truck.empty_mass_kg + instance.total_package_mass();
    let mut mass = start;
    let mut node_masses = HashMap::new();
    for &id in &plan.route {
        if let Some(&m) = shed.get(&id) {
            mass -= m;
            shed.remove(&id);
        }
        node_masses.insert(id, mass);
    }
    Ok(MassProfile {
        start_mass_kg: start,
        node_masses_kg: node_masses,
        final_mass_kg: mass,
        uav_outbound_kg: uav_outbound,
    })
}

// ---------------------------------------------------------------------------
// Route evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCost {
    pub from: NodeId,
    pub to: NodeId,
    pub truck_energy_ml: f64,
    pub truck_time_s: f64,
    /// Marginal fuel for docked UAVs riding this edge, mL.
    pub uav_ride_ml: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteEvaluation {
    /// Weighted energy cost, dollars.
    pub e_dollars: f64,
    /// Total truck time, seconds.
    pub t_seconds: f64,
    pub objective: f64,
    pub truck_fuel_ml: f64,
    pub uav_ride_fuel_ml: f64,
    pub uav_flight_j: f64,
    pub per_edge: Vec<EdgeCost>,
    pub masses: MassProfile,
}

/// Nodes at which the truck comes to a stop: depot, H nodes, truck-served D.
pub fn stop_set(plan: &RoutePlan, instance: &Instance) -> std::collections::HashSet<NodeId> {
    let mut stops = std::collections::HashSet::new();
    for &id in &plan.route {
        match instance.node(id).map(|n| n.class) {
            Some(NodeClass::Depot) | Some(NodeClass::TruckDelivery) => {
                stops.insert(id);
            }
            Some(NodeClass::UavDelivery) if !plan.uav_served.contains(&id) => {
                stops.insert(id);
            }
            _ => {}
        }
    }
    stops
}

/// Evaluate `E(r)`, `T(r)` and the objective for a route plan.
///
/// With a schedule present the UAV flight energy enters `E` and UAVs are
/// docked (and cost ride fuel) only outside their flight intervals.
pub fn evaluate_route(
    plan: &RoutePlan,
    schedule: Option<&Schedule>,
    instance: &Instance,
    xform: &TransformedGraph,
) -> Result<RouteEvaluation, CostError> {
    let stops = stop_set(plan, instance);
    let launch_of: HashMap<NodeId, NodeId> = match schedule {
        Some(s) => s.launch_nodes(),
        // Without a schedule, charge UAV packages at the cheapest candidate
        // sortie's launch node so mass bookkeeping stays consistent.
        None => plan
            .candidate_sorties
            .iter()
            .filter_map(|(&d, sorties)| sorties.first().map(|s| (d, s.launch)))
            .collect(),
    };
    let masses = mass_profile(plan, &launch_of, instance)?;

    // Flight intervals per UAV, for the docked-ride fraction.
    let flights: Vec<Vec<(f64, f64)>> = match schedule {
        Some(s) => (0..instance.uavs.len()).map(|k| s.flight_intervals(k)).collect(),
        None => vec![Vec::new(); instance.uavs.len()],
    };

    let mut per_edge = Vec::new();
    let mut truck_fuel = 0.0;
    let mut ride_fuel = 0.0;
    let mut t_total = 0.0;
    for leg in plan.route.windows(2) {
        let (u, v) = (leg[0], leg[1]);
        if u == v {
            continue;
        }
        let path = xform.embedded_path(u, v).ok_or_else(|| {
            CostError::Constraint(format!("no embedded path between {u} and {v}"))
        })?;
        let mass = masses.node_masses_kg[&u];
        let n = path.len();
        for (i, seg) in path.iter().enumerate() {
            let stop_start = i == 0 && stops.contains(&u);
            let stop_end = i == n - 1 && stops.contains(&v);
            let profile =
                truck_edge_profile(seg.length_m, seg.speed_mps, stop_start, stop_end, &instance.truck);
            let dt = profile.total_s();
            let fuel = truck_profile_energy(&profile, mass, &instance.truck);
            // Docked UAV marginal: truck parameters with the UAV's mass.
            let mut ride = 0.0;
            for (k, uav) in instance.uavs.iter().enumerate() {
                let marginal = truck_profile_energy(&profile, uav.empty_mass_kg, &instance.truck);
                ride += marginal * docked_fraction(&flights[k], t_total, t_total + dt);
            }
            truck_fuel += fuel;
            ride_fuel += ride;
            per_edge.push(EdgeCost {
                from: seg.u,
                to: seg.v,
                truck_energy_ml: fuel,
                truck_time_s: dt,
                uav_ride_ml: ride,
            });
            t_total += dt;
        }
    }

    let uav_flight_j = schedule.map(|s| s.total_energy_j()).unwrap_or(0.0);
    let w = &instance.weights;
    let e = w.w1 * (truck_fuel + ride_fuel) + w.w2 * uav_flight_j / JOULES_PER_KWH;
    let objective = w.alpha * e + (1.0 - w.alpha) * t_total;
    Ok(RouteEvaluation {
        e_dollars: e,
        t_seconds: t_total,
        objective,
        truck_fuel_ml: truck_fuel,
        uav_ride_fuel_ml: ride_fuel,
        uav_flight_j,
        per_edge,
        masses,
    })
}

/// Optimistic objective bound over every schedule of this route: truck fuel
/// with each UAV package dropped at its earliest candidate launch node, no
/// docked-ride fuel and no flight energy (both nonnegative), exact time.
pub fn route_lower_bound(
    plan: &RoutePlan,
    instance: &Instance,
    xform: &TransformedGraph,
) -> Result<f64, CostError> {
    let stops = stop_set(plan, instance);
    let order: HashMap<NodeId, usize> =
        plan.route.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let launch_of: HashMap<NodeId, NodeId> = plan
        .candidate_sorties
        .iter()
        .filter_map(|(&d, sorties)| {
            sorties
                .iter()
                .filter_map(|s| order.get(&s.launch).map(|&i| (i, s.launch)))
                .min_by_key(|&(i, _)| i)
                .map(|(_, launch)| (d, launch))
        })
        .collect();
    let masses = mass_profile(plan, &launch_of, instance)?;

    let mut truck_fuel = 0.0;
    let mut t_total = 0.0;
    for leg in plan.route.windows(2) {
        let (u, v) = (leg[0], leg[1]);
        if u == v {
            continue;
        }
        let path = xform.embedded_path(u, v).ok_or_else(|| {
            CostError::Constraint(format!("no embedded path between {u} and {v}"))
        })?;
        let mass = masses.node_masses_kg[&u];
        let n = path.len();
        for (i, seg) in path.iter().enumerate() {
            let stop_start = i == 0 && stops.contains(&u);
            let stop_end = i == n - 1 && stops.contains(&v);
            let profile =
                truck_edge_profile(seg.length_m, seg.speed_mps, stop_start, stop_end, &instance.truck);
            truck_fuel += truck_profile_energy(&profile, mass, &instance.truck);
            t_total += profile.total_s();
        }
    }
    let w = &instance.weights;
    Ok(w.alpha * w.w1 * truck_fuel + (1.0 - w.alpha) * t_total)
}

/// Fraction of [t0, t1] outside every flight interval.
fn docked_fraction(flights: &[(f64, f64)], t0: f64, t1: f64) -> f64 {
    let dur = t1 - t0;
    if dur <= 0.0 {
        return 1.0;
    }
    let mut away = 0.0;
    for &(s, f) in flights {
        let lo = s.max(t0);
        let hi = f.min(t1);
        if hi > lo {
            away += hi - lo;
        }
    }
    ((dur - away) / dur).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::default_truck;

    fn toy_uav() -> UavParams {
        UavParams {
            uav_id: 0,
            empty_mass_kg: 1.0,
            induced_coeffs: [0.0, 0.3],
            power_coeffs: [1.0, 1.0, 0.0, 0.0, 0.0],
            ascent_speed_mps: 2.0,
            descent_speed_mps: -2.0,
            cruise_speed_mps: 10.0,
            attack_angle_rad: 0.0,
            battery_capacity_j: 1000.0,
            cruise_altitude_m: 50.0,
        }
    }

    #[test]
    fn free_flow_edge_time() {
        let t = truck_edge_time(100.0, 10.0, false, false, &default_truck());
        assert!((t - 10.0).abs() < 1e-12);
    }

    #[test]
    fn both_stop_edge_time_matches_piecewise_kinematics() {
        // accel 5 s over 25 m, cruise 5 s over 50 m, brake 5 s over 25 m
        let mut truck = default_truck();
        truck.accel_input_mps2 = 2.0;
        truck.brake_input_mps2 = -2.0;
        let t = truck_edge_time(100.0, 10.0, true, true, &truck);
        assert!((t - 15.0).abs() < 1e-12, "t = {t}");
    }

    #[test]
    fn decel_only_edge_time() {
        let mut truck = default_truck();
        truck.brake_input_mps2 = -2.0;
        let t = truck_edge_time(100.0, 10.0, false, true, &truck);
        assert!((t - 12.5).abs() < 1e-12, "t = {t}");
    }

    #[test]
    fn short_edge_falls_back_to_triangular() {
        let mut truck = default_truck();
        truck.accel_input_mps2 = 2.0;
        truck.brake_input_mps2 = -2.0;
        let p = truck_edge_profile(10.0, 10.0, true, true, &truck);
        assert!(p.triangular);
        assert!(p.peak_speed_mps < 10.0);
        // peak = sqrt(2*10*2*2/4) = sqrt(20)
        assert!((p.peak_speed_mps - 20.0_f64.sqrt()).abs() < 1e-12);
        let d = p.accel_dist_m + p.cruise_dist_m + p.brake_dist_m;
        assert!((d - 10.0).abs() < 1e-9);
    }

    #[test]
    fn braking_only_burns_no_accel_fuel() {
        let truck = default_truck();
        let e = truck_edge_energy(25.0, 10.0, 4000.0, false, true, &truck);
        // only a zero-length cruise phase when the edge is all braking
        let p = truck_edge_profile(25.0, 10.0, false, true, &truck);
        assert_eq!(p.cruise_s, 0.0);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn cruise_fuel_is_rate_times_time() {
        let mut truck = default_truck();
        truck.cruise_coeffs = [0.1, 0.0, 0.0, 0.0];
        // 50 m at 10 m/s, no stops: 5 s of cruising
        let e = truck_edge_energy(50.0, 10.0, 4000.0, false, false, &truck);
        assert!((e - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truck_energy_increases_with_mass() {
        let truck = default_truck();
        let mut prev = 0.0;
        for mass in [2000.0, 3000.0, 4000.0, 6000.0, 9000.0] {
            let e = truck_edge_energy(300.0, 13.0, mass, true, true, &truck);
            assert!(e > prev, "mass {mass}: {e} <= {prev}");
            prev = e;
        }
    }

    #[test]
    fn direction_symmetry_for_equal_mass() {
        let truck = default_truck();
        let a = truck_edge_energy(173.0, 12.0, 4100.0, true, false, &truck);
        let b = truck_edge_energy(173.0, 12.0, 4100.0, true, false, &truck);
        assert_eq!(a, b);
    }

    #[test]
    fn ascend_toy_case() {
        // k1 = 0, d2 = 1, mg = 1 N, dz = 10 m, Va = 2 m/s -> 5 J
        let uav = toy_uav();
        let e = ascend_energy(&uav, 1.0, 1.0, 0.0, 10.0).unwrap();
        assert_eq!(e, 5.0);
    }

    #[test]
    fn hover_power_toy_case() {
        // d1 = d2 = 1, others 0, mg = 1 N: P = 2 W, 3 s -> 6 J
        let uav = toy_uav();
        let p = transverse_power(&uav, 1.0, 1.0, 0.0);
        assert_eq!(p * 3.0, 6.0);
    }

    #[test]
    fn descending_is_cheaper_than_ascending() {
        // The induced-power bracket takes the signed vertical speed, so a
        // descent at the same magnitude draws less power than the climb.
        let mut uav = toy_uav();
        uav.induced_coeffs = [0.7, 0.3];
        let up = ascend_energy(&uav, 1.5, 9.81, 0.0, 30.0).unwrap();
        let down = descend_energy(&uav, 1.5, 9.81, 30.0, 0.0).unwrap();
        assert!(down < up, "down {down} vs up {up}");
        assert!(down > 0.0);
    }

    #[test]
    fn wrong_direction_legs_are_errors() {
        let uav = toy_uav();
        assert!(ascend_energy(&uav, 1.0, 9.81, 10.0, 0.0).is_err());
        assert!(descend_energy(&uav, 1.0, 9.81, 0.0, 10.0).is_err());
    }

    #[test]
    fn degenerate_sortie_is_free() {
        let uav = toy_uav();
        let p = Point { x: 0.0, y: 0.0, z: 3.0 };
        let geom = SortieGeometry {
            launch: p,
            delivery: p,
            recover: p,
            cruise_altitude_m: 3.0,
            truck_deck_z_m: 3.0,
        };
        let e = uav_sortie_energy(&geom, &uav, 0.5, 9.81).unwrap();
        assert_eq!(e.total_j(), 0.0);
    }

    #[test]
    fn sortie_energy_monotone_in_package_mass() {
        let mut uav = toy_uav();
        uav.induced_coeffs = [0.7, 0.3];
        uav.power_coeffs = [3.0, 0.5, 0.02, 0.01, 0.002];
        let geom = SortieGeometry {
            launch: Point { x: 0.0, y: 0.0, z: 0.0 },
            delivery: Point { x: 150.0, y: 80.0, z: 1.0 },
            recover: Point { x: 40.0, y: -20.0, z: 0.0 },
            cruise_altitude_m: 40.0,
            truck_deck_z_m: 0.0,
        };
        let mut prev = -1.0;
        for pkg in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let e = uav_sortie_energy(&geom, &uav, pkg, 9.81).unwrap().total_j();
            assert!(e > prev, "package {pkg}: {e} <= {prev}");
            prev = e;
        }
    }
}

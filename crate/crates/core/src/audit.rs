//! Independent solution validation.
//!
//! Re-checks a solved plan and schedule against the problem constraints
//! without trusting the solver's own bookkeeping: route shape, delivery
//! coverage, sortie compatibility from the transformed graph's own sortie
//! sets, per-UAV sequencing, battery limits, launch/recovery windows and
//! the truck's actual position at launch and intercept times.

use std::collections::{HashMap, HashSet};

use crate::cost;
use crate::graph_xform::TransformedGraph;
use crate::model::{Instance, NodeId, DEPOT_ID};
use crate::route_ga::RoutePlan;
use crate::scheduler::{Schedule, TruckTimeline};

/// Position mismatch tolerance between a scheduled event and the truck, m.
pub const POSITION_TOL_M: f64 = 1e-6;

/// Check every constraint; returns a human-readable finding per violation.
pub fn audit_solution(
    plan: &RoutePlan,
    schedule: Option<&Schedule>,
    instance: &Instance,
    xform: &TransformedGraph,
    service_time_s: f64,
) -> Vec<String> {
    let mut findings = Vec::new();
    let route = &plan.route;

    if route.first() != Some(&DEPOT_ID) {
        findings.push("route does not start at the depot".into());
    }
    if route.last() != Some(&DEPOT_ID) {
        findings.push("route does not end at the depot".into());
    }
    let mut seen = HashSet::new();
    for &n in route.iter().take(route.len().saturating_sub(1)) {
        if !seen.insert(n) {
            findings.push(format!("route visits node {n} more than once"));
        }
    }

    let on_route: HashSet<NodeId> = route.iter().copied().collect();
    for &h in &instance.truck_delivery_ids() {
        if !on_route.contains(&h) {
            findings.push(format!("truck-only delivery {h} is not on the route"));
        }
    }

    let scheduled: HashMap<NodeId, usize> = schedule
        .map(|s| {
            let mut m = HashMap::new();
            for x in s.all_sorties() {
                *m.entry(x.delivery).or_insert(0) += 1;
            }
            m
        })
        .unwrap_or_default();
    for &d in &instance.uav_delivery_ids() {
        let by_truck = on_route.contains(&d);
        let by_uav = scheduled.get(&d).copied().unwrap_or(0);
        match (by_truck, by_uav) {
            (true, 0) => {}
            (false, 1) => {}
            (false, 0) => findings.push(format!("delivery {d} is never served")),
            (true, _) => findings.push(format!("delivery {d} is served twice (truck and UAV)")),
            (false, n) => findings.push(format!("delivery {d} is scheduled {n} times")),
        }
    }
    for &d in &plan.uav_served {
        // Compatibility from the transform's sortie sets, not the plan's.
        let ok = xform
            .sorties_by_delivery
            .get(&d)
            .map(|ss| {
                ss.iter().any(|s| on_route.contains(&s.launch) && on_route.contains(&s.recover))
            })
            .unwrap_or(false);
        if !ok {
            findings.push(format!("UAV-served delivery {d} has no route-compatible sortie"));
        }
    }

    if let Some(sched) = schedule {
        match TruckTimeline::build(plan, instance, xform, service_time_s) {
            None => findings.push("route has no traversable timeline".into()),
            Some(tl) => {
                for s in sched.all_sorties() {
                    let tag = format!("sortie for delivery {}", s.delivery);
                    if s.uav >= instance.uavs.len() {
                        findings.push(format!("{tag}: unknown UAV {}", s.uav));
                        continue;
                    }
                    if s.t_recover_s <= s.t_launch_s {
                        findings.push(format!("{tag}: recovery not after launch"));
                    }
                    if s.energy_j > instance.uavs[s.uav].battery_capacity_j {
                        findings.push(format!(
                            "{tag}: energy {:.1} J exceeds battery {:.1} J",
                            s.energy_j, instance.uavs[s.uav].battery_capacity_j
                        ));
                    }
                    for (node, t, what) in
                        [(s.launch, s.t_launch_s, "launch"), (s.recover, s.t_recover_s, "recovery")]
                    {
                        match tl.window(node) {
                            Some((w0, w1)) if t >= w0 - 1e-9 && t <= w1 + 1e-9 => {}
                            Some(_) => findings
                                .push(format!("{tag}: {what} at {t:.3} s outside its window")),
                            None => findings
                                .push(format!("{tag}: {what} node {node} is not on the route")),
                        }
                    }
                    for (pos, t, what) in [
                        (s.launch_pos, s.t_launch_s, "launch"),
                        (s.intercept_pos, s.t_recover_s, "intercept"),
                    ] {
                        let truck = tl.position_at(t);
                        let res = truck.dist2d(&pos);
                        if res > POSITION_TOL_M {
                            findings.push(format!(
                                "{tag}: {what} position is {res:.2e} m from the truck"
                            ));
                        }
                    }
                }
                for (k, _) in instance.uavs.iter().enumerate() {
                    let iv = sched.flight_intervals(k);
                    for w in iv.windows(2) {
                        if w[1].0 <= w[0].1 {
                            findings.push(format!(
                                "UAV {k}: sortie starting at {:.3} s overlaps the previous one",
                                w[1].0
                            ));
                        }
                    }
                }
            }
        }
    } else if !plan.uav_served.is_empty() {
        findings.push("UAV-served deliveries present but no schedule given".into());
    }

    // Mass conservation across the whole tour.
    let launch_of = schedule.map(|s| s.launch_nodes()).unwrap_or_default();
    match cost::mass_profile(plan, &launch_of, instance) {
        Ok(m) => {
            let shed = m.start_mass_kg - m.final_mass_kg;
            let expected = instance.total_package_mass();
            if (shed - expected).abs() > 1e-9 {
                findings.push(format!(
                    "mass shed {shed:.6} kg does not match total package mass {expected:.6} kg"
                ));
            }
        }
        Err(e) => findings.push(format!("mass profile: {e}")),
    }

    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, GenConfig};
    use crate::graph_xform::{transform, XformConfig};
    use crate::route_ga::{solve, GaConfig};
    use crate::scheduler::SchedulerConfig;

    fn solved() -> (Instance, TransformedGraph, crate::route_ga::Solution) {
        let inst =
            generate_instance(11, 2, 2, 2, "grid-city-small", &GenConfig::default()).unwrap();
        let xf = transform(&inst, &XformConfig::default()).unwrap();
        let cfg = GaConfig { population_size: 30, generations: 25, ..GaConfig::default() };
        let sol = solve(&inst, &xf, &cfg, &SchedulerConfig::default()).unwrap();
        (inst, xf, sol)
    }

    #[test]
    fn solver_output_audits_clean() {
        let (inst, xf, sol) = solved();
        let findings = audit_solution(&sol.plan, sol.schedule.as_ref(), &inst, &xf, 0.0);
        assert!(findings.is_empty(), "findings: {findings:?}");
    }

    #[test]
    fn tampered_energy_is_flagged() {
        let (inst, xf, mut sol) = solved();
        let Some(sched) = sol.schedule.as_mut() else {
            return; // all-truck optimum; nothing to tamper with
        };
        let s = sched.per_uav.iter_mut().flatten().next().unwrap();
        s.energy_j = instance_battery_max(&inst) * 10.0;
        let findings = audit_solution(&sol.plan, Some(sched), &inst, &xf, 0.0);
        assert!(findings.iter().any(|f| f.contains("exceeds battery")), "{findings:?}");
    }

    fn instance_battery_max(inst: &Instance) -> f64 {
        inst.uavs.iter().map(|u| u.battery_capacity_j).fold(0.0, f64::max)
    }

    #[test]
    fn tampered_positions_and_times_are_flagged() {
        let (inst, xf, mut sol) = solved();
        let Some(sched) = sol.schedule.as_mut() else { return };
        {
            let s = sched.per_uav.iter_mut().flatten().next().unwrap();
            s.launch_pos.x += 1.0;
            std::mem::swap(&mut s.t_launch_s, &mut s.t_recover_s);
        }
        let findings = audit_solution(&sol.plan, Some(sched), &inst, &xf, 0.0);
        assert!(findings.iter().any(|f| f.contains("recovery not after launch")), "{findings:?}");
        assert!(findings.iter().any(|f| f.contains("from the truck")), "{findings:?}");
    }

    #[test]
    fn dropped_truck_delivery_is_flagged() {
        let (inst, xf, mut sol) = solved();
        let h = inst.truck_delivery_ids()[0];
        sol.plan.route.retain(|&n| n != h);
        let findings = audit_solution(&sol.plan, sol.schedule.as_ref(), &inst, &xf, 0.0);
        assert!(
            findings.iter().any(|f| f.contains(&format!("truck-only delivery {h}"))),
            "{findings:?}"
        );
    }
}

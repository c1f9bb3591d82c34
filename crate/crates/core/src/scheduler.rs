//! UAV sortie scheduling on a fixed truck route.
//!
//! The route evaluation fixes the truck timeline; each UAV-served delivery
//! becomes a job that picks a UAV, a candidate sortie and a launch time.
//! Launch must happen while the truck passes the launch rendezvous point,
//! recovery intercepts the moving truck near the recovery point. Small job
//! spaces are enumerated exhaustively, larger ones with a compact GA; both
//! minimize total flight energy.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{self, TimeProfile};
use crate::graph_xform::{Sortie, TransformedGraph};
use crate::model::{Instance, NodeId, Point, UavParams};
use crate::route_ga::RoutePlan;

#[derive(Debug, Clone)]
pub struct SchedulerConfig {
    /// Uniform launch-time samples per job window.
    pub time_slots: usize,
    /// Cheapest candidate sorties considered per job.
    pub max_sorties_per_job: usize,
    /// Truck dwell at delivery stops and UAV dwell at the delivery point.
    pub service_time_s: f64,
    pub seed: u64,
    /// Job spaces up to this many combinations are enumerated exhaustively.
    pub exhaustive_limit: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            time_slots: 64,
            max_sorties_per_job: 6,
            service_time_s: 0.0,
            seed: 0,
            exhaustive_limit: 20_000,
        }
    }
}

// ---------------------------------------------------------------------------
// Truck timeline
// ---------------------------------------------------------------------------

/// One street edge traversal with its velocity profile and wall-clock span.
#[derive(Debug, Clone)]
pub struct Segment {
    pub u: NodeId,
    pub v: NodeId,
    pub enter_s: f64,
    pub exit_s: f64,
    pub from: Point,
    pub to: Point,
    pub length_m: f64,
    pub profile: TimeProfile,
}

/// The truck's position as a function of time along a fixed route.
#[derive(Debug, Clone)]
pub struct TruckTimeline {
    pub segments: Vec<Segment>,
    /// Arrival time at each route node (depot start at 0).
    pub node_times: HashMap<NodeId, f64>,
    /// Per route node: indices of the arriving and departing segments.
    boundary: HashMap<NodeId, (Option<usize>, Option<usize>)>,
    pub total_s: f64,
    accel: f64,
    brake: f64,
}

impl TruckTimeline {
    /// Lay the route's embedded street path out in time. Stop flags and
    /// profiles match the route cost model; stops dwell `service_time_s`.
    pub fn build(
        plan: &RoutePlan,
        instance: &Instance,
        xform: &TransformedGraph,
        service_time_s: f64,
    ) -> Option<TruckTimeline> {
        let stops = cost::stop_set(plan, instance);
        let mut segments = Vec::new();
        let mut node_times = HashMap::new();
        let mut boundary: HashMap<NodeId, (Option<usize>, Option<usize>)> = HashMap::new();
        let mut t = 0.0;
        node_times.insert(*plan.route.first()?, 0.0);
        for leg in plan.route.windows(2) {
            let (u, v) = (leg[0], leg[1]);
            if u == v {
                continue;
            }
            let path = xform.embedded_path(u, v)?;
            boundary.entry(u).or_default().1 = Some(segments.len());
            let n = path.len();
            for (i, seg) in path.iter().enumerate() {
                let stop_start = i == 0 && stops.contains(&u);
                let stop_end = i == n - 1 && stops.contains(&v);
                let profile = cost::truck_edge_profile(
                    seg.length_m,
                    seg.speed_mps,
                    stop_start,
                    stop_end,
                    &instance.truck,
                );
                let dt = profile.total_s();
                segments.push(Segment {
                    u: seg.u,
                    v: seg.v,
                    enter_s: t,
                    exit_s: t + dt,
                    from: xform.node_pos(seg.u)?,
                    to: xform.node_pos(seg.v)?,
                    length_m: seg.length_m,
                    profile,
                });
                t += dt;
            }
            boundary.entry(v).or_default().0 = Some(segments.len() - 1);
            node_times.insert(v, t);
            if stops.contains(&v) && v != *plan.route.last()? {
                t += service_time_s;
            }
        }
        Some(TruckTimeline {
            segments,
            node_times,
            boundary,
            total_s: t,
            accel: instance.truck.accel_input_mps2,
            brake: instance.truck.brake_input_mps2,
        })
    }

    /// Truck position at time `t` (clamped to the route's span).
    pub fn position_at(&self, t: f64) -> Point {
        let Some(first) = self.segments.first() else {
            return Point { x: 0.0, y: 0.0, z: 0.0 };
        };
        if t <= first.enter_s {
            return first.from;
        }
        let i = self
            .segments
            .partition_point(|s| s.exit_s < t)
            .min(self.segments.len() - 1);
        let seg = &self.segments[i];
        if t <= seg.enter_s {
            // Dwelling at the segment start between legs.
            return seg.from;
        }
        if t >= seg.exit_s {
            return seg.to;
        }
        let d = seg.profile.dist_at(t - seg.enter_s, self.accel, self.brake);
        seg.from.lerp(&seg.to, (d / seg.length_m).clamp(0.0, 1.0))
    }

    /// Time span during which the truck is adjacent to a route node
    /// (traversing the arriving or departing segment).
    pub fn window(&self, node: NodeId) -> Option<(f64, f64)> {
        let &(arr, dep) = self.boundary.get(&node)?;
        let lo = arr.map(|i| self.segments[i].enter_s);
        let hi = dep.map(|i| self.segments[i].exit_s);
        let lo = lo.unwrap_or_else(|| hi.map(|_| 0.0).unwrap_or(0.0));
        let hi = hi.unwrap_or_else(|| arr.map(|i| self.segments[i].exit_s).unwrap_or(0.0));
        Some((lo, hi))
    }
}

// ---------------------------------------------------------------------------
// Job cost
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct JobOutcome {
    pub t_launch_s: f64,
    pub t_recover_s: f64,
    pub energy_j: f64,
    pub launch_pos: Point,
    pub intercept_pos: Point,
}

/// Earliest time within `[w0, w1]` at which a UAV that becomes ready at the
/// delivery point at `ready_s` can meet the truck. `travel` is the flight
/// time to the truck's position at the candidate instant. Bisection to
/// 1e-6 s after a uniform scan.
fn intercept(
    timeline: &TruckTimeline,
    ready_s: f64,
    w0: f64,
    w1: f64,
    travel: impl Fn(Point) -> f64,
) -> Option<f64> {
    let gap = |t: f64| (t - ready_s) - travel(timeline.position_at(t));
    let lo = w0.max(ready_s);
    if lo > w1 {
        return None;
    }
    if gap(lo) >= 0.0 {
        return Some(lo);
    }
    const SAMPLES: usize = 64;
    let mut prev = lo;
    for i in 1..=SAMPLES {
        let t = lo + (w1 - lo) * i as f64 / SAMPLES as f64;
        if gap(t) >= 0.0 {
            let (mut a, mut b) = (prev, t);
            while b - a > 1e-6 {
                let mid = 0.5 * (a + b);
                if gap(mid) >= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Some(b);
        }
        prev = t;
    }
    None
}

/// Simulate one sortie launched at `t_launch`: outbound flight to the
/// delivery, service, and the moving-truck intercept near the recovery node.
/// `None` when the intercept misses its window or the battery is exceeded.
pub fn job_cost(
    timeline: &TruckTimeline,
    uav: &UavParams,
    sortie: &Sortie,
    delivery_pos: Point,
    package_kg: f64,
    gravity: f64,
    service_time_s: f64,
    t_launch: f64,
) -> Option<JobOutcome> {
    let (lw0, lw1) = timeline.window(sortie.launch)?;
    if t_launch < lw0 - 1e-9 || t_launch > lw1 + 1e-9 {
        return None;
    }
    let alt = uav.cruise_altitude_m;
    let launch_pos = timeline.position_at(t_launch);
    if alt < launch_pos.z.max(delivery_pos.z) {
        return None;
    }
    let loaded = uav.empty_mass_kg + package_kg;
    let out_dist = launch_pos.dist2d(&delivery_pos);
    let t_out = (alt - launch_pos.z) / uav.ascent_speed_mps
        + out_dist / uav.cruise_speed_mps
        + (alt - delivery_pos.z) / uav.descent_speed_mps.abs();
    let e_out = cost::ascend_energy(uav, loaded, gravity, launch_pos.z, alt).ok()?
        + cost::transverse_energy(uav, loaded, gravity, out_dist)
        + cost::descend_energy(uav, loaded, gravity, alt, delivery_pos.z).ok()?;

    let ready = t_launch + t_out + service_time_s;
    let (rw0, rw1) = timeline.window(sortie.recover)?;
    let t_up = (alt - delivery_pos.z) / uav.ascent_speed_mps;
    let travel = |p: Point| {
        t_up + delivery_pos.dist2d(&p) / uav.cruise_speed_mps
            + (alt - p.z) / uav.descent_speed_mps.abs()
    };
    let t_rec = intercept(timeline, ready, rw0, rw1, travel)?;
    let ipos = timeline.position_at(t_rec);
    if alt < ipos.z {
        return None;
    }
    let e_back = cost::ascend_energy(uav, uav.empty_mass_kg, gravity, delivery_pos.z, alt).ok()?
        + cost::transverse_energy(uav, uav.empty_mass_kg, gravity, delivery_pos.dist2d(&ipos))
        + cost::descend_energy(uav, uav.empty_mass_kg, gravity, alt, ipos.z).ok()?;
    let energy = e_out + e_back;
    if energy > uav.battery_capacity_j {
        return None;
    }
    Some(JobOutcome {
        t_launch_s: t_launch,
        t_recover_s: t_rec,
        energy_j: energy,
        launch_pos,
        intercept_pos: ipos,
    })
}

// ---------------------------------------------------------------------------
// Assignment search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScheduledSortie {
    pub delivery: NodeId,
    pub uav: usize,
    pub launch: NodeId,
    pub recover: NodeId,
    pub t_launch_s: f64,
    pub t_recover_s: f64,
    pub energy_j: f64,
    pub launch_pos: Point,
    pub intercept_pos: Point,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Schedule {
    /// Sorties per UAV, ordered by launch time.
    pub per_uav: Vec<Vec<ScheduledSortie>>,
}

impl Schedule {
    pub fn launch_nodes(&self) -> HashMap<NodeId, NodeId> {
        self.per_uav
            .iter()
            .flatten()
            .map(|s| (s.delivery, s.launch))
            .collect()
    }

    pub fn flight_intervals(&self, uav: usize) -> Vec<(f64, f64)> {
        self.per_uav
            .get(uav)
            .map(|v| v.iter().map(|s| (s.t_launch_s, s.t_recover_s)).collect())
            .unwrap_or_default()
    }

    pub fn total_energy_j(&self) -> f64 {
        self.per_uav.iter().flatten().map(|s| s.energy_j).sum()
    }

    pub fn all_sorties(&self) -> impl Iterator<Item = &ScheduledSortie> {
        self.per_uav.iter().flatten()
    }
}

/// One candidate (UAV, sortie, launch slot) for a job, already simulated.
struct JobOption {
    uav: usize,
    sortie_idx: usize,
    outcome: JobOutcome,
}

struct JobSpace {
    delivery: NodeId,
    sorties: Vec<Sortie>,
    options: Vec<JobOption>,
}

/// Same-UAV sorties must not overlap: recovery strictly before next launch.
fn sequencing_ok(assignment: &[(usize, &JobOption)], n_uavs: usize) -> bool {
    for k in 0..n_uavs {
        let mut spans: Vec<(f64, f64)> = assignment
            .iter()
            .filter(|(_, o)| o.uav == k)
            .map(|(_, o)| (o.outcome.t_launch_s, o.outcome.t_recover_s))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in spans.windows(2) {
            if w[1].0 <= w[0].1 {
                return false;
            }
        }
    }
    true
}

fn build_schedule(
    jobs: &[JobSpace],
    choice: &[usize],
    n_uavs: usize,
) -> Schedule {
    let mut per_uav: Vec<Vec<ScheduledSortie>> = vec![Vec::new(); n_uavs];
    for (job, &c) in jobs.iter().zip(choice) {
        let opt = &job.options[c];
        let s = &job.sorties[opt.sortie_idx];
        per_uav[opt.uav].push(ScheduledSortie {
            delivery: job.delivery,
            uav: opt.uav,
            launch: s.launch,
            recover: s.recover,
            t_launch_s: opt.outcome.t_launch_s,
            t_recover_s: opt.outcome.t_recover_s,
            energy_j: opt.outcome.energy_j,
            launch_pos: opt.outcome.launch_pos,
            intercept_pos: opt.outcome.intercept_pos,
        });
    }
    for v in &mut per_uav {
        v.sort_by(|a, b| a.t_launch_s.total_cmp(&b.t_launch_s));
    }
    Schedule { per_uav }
}

/// Assign a UAV, sortie and launch time to every UAV-served delivery of the
/// plan, minimizing total flight energy. `None` when no feasible assignment
/// exists within the sampled launch slots.
pub fn schedule(
    plan: &RoutePlan,
    instance: &Instance,
    xform: &TransformedGraph,
    config: &SchedulerConfig,
) -> Option<Schedule> {
    let n_uavs = instance.uavs.len();
    if plan.uav_served.is_empty() {
        return Some(Schedule { per_uav: vec![Vec::new(); n_uavs] });
    }
    if n_uavs == 0 {
        return None;
    }
    let timeline = TruckTimeline::build(plan, instance, xform, config.service_time_s)?;
    let gravity = instance.truck.gravity_mps2;

    let mut deliveries: Vec<NodeId> = plan.uav_served.iter().copied().collect();
    deliveries.sort();

    let mut jobs = Vec::new();
    for d in deliveries {
        let node = instance.node(d)?;
        let dp = node.pos();
        let sorties: Vec<Sortie> = plan
            .candidate_sorties
            .get(&d)?
            .iter()
            .take(config.max_sorties_per_job)
            .cloned()
            .collect();
        let mut options = Vec::new();
        for (si, s) in sorties.iter().enumerate() {
            let (lw0, lw1) = timeline.window(s.launch)?;
            let slots = config.time_slots.max(1);
            for i in 0..slots {
                let t = if slots == 1 {
                    lw0
                } else {
                    lw0 + (lw1 - lw0) * i as f64 / (slots - 1) as f64
                };
                for (k, uav) in instance.uavs.iter().enumerate() {
                    if let Some(outcome) = job_cost(
                        &timeline,
                        uav,
                        s,
                        dp,
                        node.package_kg,
                        gravity,
                        config.service_time_s,
                        t,
                    ) {
                        options.push(JobOption { uav: k, sortie_idx: si, outcome });
                    }
                }
            }
        }
        if options.is_empty() {
            return None;
        }
        jobs.push(JobSpace { delivery: d, sorties, options });
    }

    let combos: usize = jobs
        .iter()
        .map(|j| j.options.len())
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);

    let best_choice = if combos <= config.exhaustive_limit {
        exhaustive_search(&jobs, n_uavs)
    } else {
        ga_search(&jobs, n_uavs, config.seed)
    }?;
    Some(build_schedule(&jobs, &best_choice, n_uavs))
}

fn assignment_energy(jobs: &[JobSpace], choice: &[usize]) -> f64 {
    jobs.iter().zip(choice).map(|(j, &c)| j.options[c].outcome.energy_j).sum()
}

fn feasible(jobs: &[JobSpace], choice: &[usize], n_uavs: usize) -> bool {
    let assignment: Vec<(usize, &JobOption)> = jobs
        .iter()
        .zip(choice)
        .enumerate()
        .map(|(i, (j, &c))| (i, &j.options[c]))
        .collect();
    sequencing_ok(&assignment, n_uavs)
}

fn exhaustive_search(jobs: &[JobSpace], n_uavs: usize) -> Option<Vec<usize>> {
    let mut choice = vec![0usize; jobs.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        if feasible(jobs, &choice, n_uavs) {
            let e = assignment_energy(jobs, &choice);
            if best.as_ref().map(|(b, _)| e < *b).unwrap_or(true) {
                best = Some((e, choice.clone()));
            }
        }
        // Odometer increment over the option indices.
        let mut i = jobs.len();
        loop {
            if i == 0 {
                return best.map(|(_, c)| c);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < jobs[i].options.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

fn ga_search(jobs: &[JobSpace], n_uavs: usize, seed: u64) -> Option<Vec<usize>> {
    const POP: usize = 24;
    const GENS: usize = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        jobs.iter().map(|j| rng.gen_range(0..j.options.len())).collect()
    };
    let score = |c: &[usize]| -> f64 {
        if feasible(jobs, c, n_uavs) {
            assignment_energy(jobs, c)
        } else {
            f64::INFINITY
        }
    };
    let mut pop: Vec<Vec<usize>> = (0..POP).map(|_| random(&mut rng)).collect();
    // Greedy seed: cheapest option per job.
    pop[0] = jobs
        .iter()
        .map(|j| {
            j.options
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.outcome.energy_j.total_cmp(&b.1.outcome.energy_j))
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..GENS {
        let mut scored: Vec<(f64, usize)> =
            pop.iter().enumerate().map(|(i, c)| (score(c), i)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (top, ti) = scored[0];
        if top.is_finite() && best.as_ref().map(|(b, _)| top < *b).unwrap_or(true) {
            best = Some((top, pop[ti].clone()));
        }
        let mut next: Vec<Vec<usize>> = scored.iter().take(2).map(|&(_, i)| pop[i].clone()).collect();
        while next.len() < POP {
            let pick = |rng: &mut ChaCha8Rng| {
                let a = rng.gen_range(0..POP);
                let b = rng.gen_range(0..POP);
                let ra = scored.iter().position(|&(_, i)| i == a).unwrap();
                let rb = scored.iter().position(|&(_, i)| i == b).unwrap();
                if ra < rb {
                    a
                } else {
                    b
                }
            };
            let p1 = pick(&mut rng);
            let p2 = pick(&mut rng);
            let mut child: Vec<usize> = pop[p1]
                .iter()
                .zip(&pop[p2])
                .map(|(&a, &b)| if rng.gen_bool(0.5) { a } else { b })
                .collect();
            let j = rng.gen_range(0..jobs.len());
            if rng.gen_bool(0.4) {
                child[j] = rng.gen_range(0..jobs[j].options.len());
            }
            next.push(child);
        }
        pop = next;
    }
    // Final scan of the last population.
    for c in &pop {
        let s = score(c);
        if s.is_finite() && best.as_ref().map(|(b, _)| s < *b).unwrap_or(true) {
            best = Some((s, c.clone()));
        }
    }
    best.map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, GenConfig};
    use crate::graph_xform::{transform, XformConfig};
    use crate::route_ga::{decode, Chromosome};

    fn flat_timeline(length_m: f64, speed: f64) -> TruckTimeline {
        let profile = cost::truck_edge_profile(
            length_m,
            speed,
            false,
            false,
            &crate::generate::default_truck(),
        );
        TruckTimeline {
            segments: vec![Segment {
                u: NodeId(1),
                v: NodeId(2),
                enter_s: 0.0,
                exit_s: profile.total_s(),
                from: Point { x: 0.0, y: 0.0, z: 0.0 },
                to: Point { x: length_m, y: 0.0, z: 0.0 },
                length_m,
                profile,
            }],
            node_times: HashMap::new(),
            boundary: HashMap::new(),
            total_s: profile.total_s(),
            accel: 1.5,
            brake: -2.0,
        }
    }

    #[test]
    fn intercept_closed_form_chase() {
        // Truck at 10 m/s from x=0; UAV ready at (50,0) at t=0 flying
        // 10 m/s with no vertical legs: meet at t = 2.5 s, x = 25 m.
        let tl = flat_timeline(100.0, 10.0);
        let ready = Point { x: 50.0, y: 0.0, z: 0.0 };
        let t = intercept(&tl, 0.0, 0.0, 10.0, |p| ready.dist2d(&p) / 10.0).unwrap();
        assert!((t - 2.5).abs() < 1e-6, "t = {t}");
        assert!((tl.position_at(t).x - 25.0).abs() < 1e-5);
    }

    #[test]
    fn intercept_immediate_when_ready_at_truck() {
        let tl = flat_timeline(100.0, 10.0);
        let ready = Point { x: 30.0, y: 0.0, z: 0.0 };
        // Ready exactly when the truck passes x = 30 at t = 3.
        let t = intercept(&tl, 3.0, 0.0, 10.0, |p| ready.dist2d(&p) / 10.0).unwrap();
        assert!((t - 3.0).abs() < 1e-6);
    }

    #[test]
    fn intercept_fails_outside_window() {
        let tl = flat_timeline(100.0, 10.0);
        let ready = Point { x: 0.0, y: 500.0, z: 0.0 };
        // 50 s of flight needed but the window closes at t = 10.
        assert!(intercept(&tl, 0.0, 0.0, 10.0, |p| ready.dist2d(&p) / 1.0).is_none());
    }

    fn plan_with_uav(seed: u64) -> (Instance, crate::graph_xform::TransformedGraph, RoutePlan) {
        let inst = generate_instance(seed, 2, 2, 2, "grid-city-small", &GenConfig::default()).unwrap();
        let xf = transform(&inst, &XformConfig::default()).unwrap();
        let uav_ids = inst.uav_delivery_ids();
        let flags: Vec<bool> = uav_ids
            .iter()
            .map(|d| xf.sorties_by_delivery.get(d).map(|s| s.is_empty()).unwrap_or(true))
            .collect();
        let mut order = inst.truck_delivery_ids();
        order.extend(&uav_ids);
        let plan = decode(&Chromosome { serve_by_truck: flags, visit_order: order }, &inst, &xf);
        (inst, xf, plan)
    }

    #[test]
    fn timeline_time_matches_route_evaluation() {
        let (inst, xf, plan) = plan_with_uav(11);
        let eval = cost::evaluate_route(&plan, None, &inst, &xf).unwrap();
        let tl = TruckTimeline::build(&plan, &inst, &xf, 0.0).unwrap();
        assert!((tl.total_s - eval.t_seconds).abs() < 1e-9);
    }

    #[test]
    fn timeline_position_hits_nodes_at_node_times() {
        let (inst, xf, plan) = plan_with_uav(11);
        let tl = TruckTimeline::build(&plan, &inst, &xf, 0.0).unwrap();
        for (&node, &t) in &tl.node_times {
            let p = tl.position_at(t);
            let q = xf.node_pos(node).unwrap();
            assert!(p.dist2d(&q) < 1e-6, "node {node}: {} m off", p.dist2d(&q));
        }
    }

    #[test]
    fn service_time_extends_timeline() {
        let (inst, xf, plan) = plan_with_uav(11);
        let t0 = TruckTimeline::build(&plan, &inst, &xf, 0.0).unwrap().total_s;
        let t1 = TruckTimeline::build(&plan, &inst, &xf, 30.0).unwrap().total_s;
        let stops = cost::stop_set(&plan, &inst);
        // Dwell at every stop except the final depot arrival.
        let expected = 30.0 * (stops.len() as f64 - 1.0);
        assert!((t1 - t0 - expected).abs() < 1e-9, "dt = {}", t1 - t0);
    }

    #[test]
    fn schedule_respects_windows_sequencing_and_battery() {
        let (inst, xf, plan) = plan_with_uav(11);
        assert!(plan.is_feasible());
        assert!(!plan.uav_served.is_empty());
        let cfg = SchedulerConfig::default();
        let sched = schedule(&plan, &inst, &xf, &cfg).expect("schedulable");
        let tl = TruckTimeline::build(&plan, &inst, &xf, 0.0).unwrap();
        let mut served = std::collections::HashSet::new();
        for s in sched.all_sorties() {
            assert!(served.insert(s.delivery), "delivery scheduled twice");
            assert!(plan.uav_served.contains(&s.delivery));
            let (lw0, lw1) = tl.window(s.launch).unwrap();
            assert!(s.t_launch_s >= lw0 - 1e-9 && s.t_launch_s <= lw1 + 1e-9);
            let (rw0, rw1) = tl.window(s.recover).unwrap();
            assert!(s.t_recover_s >= rw0 - 1e-9 && s.t_recover_s <= rw1 + 1e-9);
            assert!(s.t_recover_s > s.t_launch_s);
            assert!(s.energy_j <= inst.uavs[s.uav].battery_capacity_j);
            // Launch and intercept on the truck's path at those times.
            assert!(tl.position_at(s.t_launch_s).dist2d(&s.launch_pos) < 1e-6);
            assert!(tl.position_at(s.t_recover_s).dist2d(&s.intercept_pos) < 1e-6);
        }
        assert_eq!(served.len(), plan.uav_served.len());
        for k in 0..inst.uavs.len() {
            let iv = sched.flight_intervals(k);
            for w in iv.windows(2) {
                assert!(w[1].0 > w[0].1, "overlapping sorties on UAV {k}");
            }
        }
    }

    #[test]
    fn schedule_is_deterministic() {
        let (inst, xf, plan) = plan_with_uav(11);
        let cfg = SchedulerConfig::default();
        let a = schedule(&plan, &inst, &xf, &cfg).unwrap();
        let b = schedule(&plan, &inst, &xf, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn dead_batteries_make_plan_unschedulable() {
        let (inst, xf, plan) = plan_with_uav(11);
        let mut weak = inst.clone();
        for u in &mut weak.uavs {
            u.battery_capacity_j = 1.0;
        }
        // Same candidate sorties, but no job simulation fits the battery.
        assert!(schedule(&plan, &weak, &xf, &SchedulerConfig::default()).is_none());
    }

    #[test]
    fn empty_uav_set_schedules_trivially() {
        let inst = generate_instance(4, 2, 0, 1, "grid-city-small", &GenConfig::default()).unwrap();
        let xf = transform(&inst, &XformConfig::default()).unwrap();
        let order = inst.truck_delivery_ids();
        let plan = decode(
            &Chromosome { serve_by_truck: vec![], visit_order: order },
            &inst,
            &xf,
        );
        let sched = schedule(&plan, &inst, &xf, &SchedulerConfig::default()).unwrap();
        assert_eq!(sched.total_energy_j(), 0.0);
    }
}


//! Genetic algorithm for the truck-route master problem.
//!
//! A chromosome is a serve-by-truck flag per UAV-eligible delivery plus a
//! permutation of the delivery nodes. Decoding builds the depot-to-depot
//! route and repairs in the rendezvous nodes needed so every UAV-served
//! delivery has at least one route-compatible sortie. Fitness bounds the
//! objective with the truck-only cost and only invokes the scheduling
//! subproblem when the bound beats the incumbent.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{self, RouteEvaluation};
use crate::error::SolveError;
use crate::graph_xform::{Sortie, TransformedGraph};
use crate::model::{Instance, NodeId, DEPOT_ID};
use crate::scheduler::{self, Schedule, SchedulerConfig};

#[derive(Debug, Clone)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    pub seed: u64,
    /// Stop after this many generations without improvement.
    pub stall_limit: usize,
    /// Unschedulable plans cost this multiple of the unassisted objective.
    pub infeasible_penalty_factor: f64,
    /// Emit `gen,<n>,best,<obj>` lines on standard error.
    pub progress: bool,
    /// Restrict the search to truck-only plans (unassisted baseline).
    pub truck_only: bool,
    /// Run endpoint refinement when at most this many deliveries fly.
    pub refine_limit: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 200,
            generations: 500,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            tournament_size: 4,
            elitism_count: 2,
            seed: 0,
            stall_limit: 100,
            infeasible_penalty_factor: 10.0,
            progress: false,
            truck_only: false,
            refine_limit: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    /// One flag per UAV-eligible delivery (sorted by id); true = truck serves it.
    pub serve_by_truck: Vec<bool>,
    /// Permutation of all delivery node ids (H and D).
    pub visit_order: Vec<NodeId>,
}

/// Decoded truck route with the UAV/truck split and, per UAV-served
/// delivery, the sorties whose endpoints lie on the route.
#[derive(Debug, Clone)]
pub struct RoutePlan {
    /// Node sequence over the transformed graph, depot at both ends.
    pub route: Vec<NodeId>,
    pub uav_served: HashSet<NodeId>,
    /// Route-compatible sorties per UAV-served delivery, cheapest first.
    pub candidate_sorties: HashMap<NodeId, Vec<Sortie>>,
    /// UAV-served deliveries with no compatible sortie (penalized).
    pub unservable: Vec<NodeId>,
}

impl RoutePlan {
    pub fn is_feasible(&self) -> bool {
        self.unservable.is_empty()
    }
}

/// Insertion cost of `x` between consecutive route nodes, and the best slot.
fn best_insertion(route: &[NodeId], x: NodeId, xform: &TransformedGraph) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..route.len() - 1 {
        let (a, b) = (route[i], route[i + 1]);
        let detour = xform.dist(a, x)? + xform.dist(x, b)? - xform.dist(a, b)?;
        if best.map(|(_, d)| detour < d).unwrap_or(true) {
            best = Some((i + 1, detour));
        }
    }
    best
}

/// Round-trip flight duration of a sortie for the fastest fleet member that
/// clears all three waypoints at its cruise altitude.
fn flight_time_estimate(
    sortie: &Sortie,
    delivery: NodeId,
    instance: &Instance,
    xform: &TransformedGraph,
) -> f64 {
    let (Some(lp), Some(rp), Some(dp)) = (
        xform.node_pos(sortie.launch),
        xform.node_pos(sortie.recover),
        instance.node(delivery).map(|n| n.pos()),
    ) else {
        return f64::INFINITY;
    };
    instance
        .uavs
        .iter()
        .filter_map(|u| {
            let alt = u.cruise_altitude_m;
            if alt < lp.z.max(dp.z).max(rp.z) {
                return None;
            }
            let down = u.descent_speed_mps.abs();
            let out = (alt - lp.z) / u.ascent_speed_mps
                + lp.dist2d(&dp) / u.cruise_speed_mps
                + (alt - dp.z) / down;
            let back = (alt - dp.z) / u.ascent_speed_mps
                + dp.dist2d(&rp) / u.cruise_speed_mps
                + (alt - rp.z) / down;
            Some(out + back)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Rough truck travel time from entering the launch node's arriving leg to
/// leaving the recover node's departing leg, along `route`. Negative when the
/// recover node precedes the launch node.
fn truck_time_estimate(
    route: &[NodeId],
    launch: NodeId,
    recover: NodeId,
    mean_speed: f64,
    xform: &TransformedGraph,
) -> f64 {
    let Some(il) = route.iter().position(|&n| n == launch) else { return -1.0 };
    let Some(ir) = route.iter().position(|&n| n == recover) else { return -1.0 };
    if ir < il {
        return -1.0;
    }
    // The launch window opens on the street segment entering the launch node
    // and recovery closes on the segment leaving the recover node; legs in
    // between are fully available.
    let mut dist = 0.0;
    if il > 0 {
        if let Some(p) = xform.embedded_path(route[il - 1], route[il]) {
            dist += p.last().map(|s| s.length_m).unwrap_or(0.0);
        }
    }
    for j in il..ir {
        dist += xform.dist(route[j], route[j + 1]).unwrap_or(0.0);
    }
    if ir + 1 < route.len() {
        if let Some(p) = xform.embedded_path(route[ir], route[ir + 1]) {
            dist += p.first().map(|s| s.length_m).unwrap_or(0.0);
        }
    }
    dist / mean_speed
}

/// Length-weighted harmonic mean street speed.
fn mean_street_speed(instance: &Instance) -> f64 {
    let len: f64 = instance.edges.iter().map(|e| e.length_m).sum();
    let time: f64 = instance.edges.iter().map(|e| e.length_m / e.speed_mps).sum();
    if time > 0.0 { len / time } else { 1.0 }
}

/// Route-compatible sorties for a delivery, time-feasible candidates first so
/// downstream truncation keeps them, then cheapest flight energy.
fn ordered_candidates(
    d: NodeId,
    route: &[NodeId],
    on_route: &HashSet<NodeId>,
    mean_speed: f64,
    instance: &Instance,
    xform: &TransformedGraph,
) -> Vec<Sortie> {
    let mut sorties: Vec<Sortie> = xform
        .sorties_by_delivery
        .get(&d)
        .map(Vec::as_slice)
        .unwrap_or(&[])
        .iter()
        .filter(|s| on_route.contains(&s.launch) && on_route.contains(&s.recover))
        .cloned()
        .collect();
    sorties.sort_by(|a, b| {
        let fa = flight_time_estimate(a, d, instance, xform)
            <= truck_time_estimate(route, a.launch, a.recover, mean_speed, xform);
        let fb = flight_time_estimate(b, d, instance, xform)
            <= truck_time_estimate(route, b.launch, b.recover, mean_speed, xform);
        fb.cmp(&fa).then(a.total_j.total_cmp(&b.total_j))
    });
    sorties
}

/// Decode a chromosome into a route plan, repairing rendezvous coverage.
pub fn decode(ch: &Chromosome, instance: &Instance, xform: &TransformedGraph) -> RoutePlan {
    let uav_ids = instance.uav_delivery_ids();
    let uav_served: HashSet<NodeId> = uav_ids
        .iter()
        .zip(&ch.serve_by_truck)
        .filter(|(_, &truck)| !truck)
        .map(|(&id, _)| id)
        .collect();

    let mut route = vec![DEPOT_ID];
    route.extend(ch.visit_order.iter().filter(|id| !uav_served.contains(id)));
    route.push(DEPOT_ID);

    let mean_speed = mean_street_speed(instance);
    let mut unservable = Vec::new();
    let mut served: Vec<NodeId> = uav_served.iter().copied().collect();
    served.sort();
    for &d in &served {
        let sorties = xform.sorties_by_delivery.get(&d).map(Vec::as_slice).unwrap_or(&[]);
        if sorties.is_empty() {
            unservable.push(d);
            continue;
        }
        let fits = |s: &Sortie, r: &[NodeId]| {
            flight_time_estimate(s, d, instance, xform)
                <= truck_time_estimate(r, s.launch, s.recover, mean_speed, xform)
        };
        let on_route: HashSet<NodeId> = route.iter().copied().collect();
        let compatible = |s: &&Sortie| on_route.contains(&s.launch) && on_route.contains(&s.recover);
        if sorties.iter().filter(compatible).any(|s| fits(s, &route)) {
            continue;
        }
        // Repair: insert the endpoints of the cheapest-detour sortie whose
        // estimated flight fits the truck's pass; cheapest detour otherwise.
        let mut best: Option<(bool, f64, Vec<NodeId>)> = None;
        for s in sorties.iter().take(32) {
            let mut detour = 0.0;
            let mut trial = route.clone();
            let mut ok = true;
            for node in [s.launch, s.recover] {
                if trial.contains(&node) {
                    continue;
                }
                match best_insertion(&trial, node, xform) {
                    Some((pos, dd)) => {
                        detour += dd;
                        trial.insert(pos, node);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let timed = fits(s, &trial);
            let better = match &best {
                None => true,
                Some((bt, bd, _)) => (!bt && timed) || (*bt == timed && detour < *bd),
            };
            if better {
                best = Some((timed, detour, trial));
            }
        }
        match best {
            Some((_, _, trial)) => route = trial,
            None => unservable.push(d),
        }
    }

    let on_route: HashSet<NodeId> = route.iter().copied().collect();
    let mut candidate_sorties = HashMap::new();
    for &d in &served {
        if unservable.contains(&d) {
            continue;
        }
        let sorties = ordered_candidates(d, &route, &on_route, mean_speed, instance, xform);
        if sorties.is_empty() {
            unservable.push(d);
        } else {
            candidate_sorties.insert(d, sorties);
        }
    }
    RoutePlan { route, uav_served, candidate_sorties, unservable }
}

#[derive(Debug, Clone)]
pub struct Fitness {
    /// Optimistic bound over schedules of this route; never exceeds `full`.
    pub lower_bound: f64,
    /// Full objective when scheduling was run (or not needed).
    pub full: Option<f64>,
    pub schedule: Option<Schedule>,
}

pub struct Evaluator<'a> {
    pub instance: &'a Instance,
    pub xform: &'a TransformedGraph,
    pub sched_config: SchedulerConfig,
    /// Penalty added to unschedulable or unservable plans.
    pub penalty: f64,
    pub incumbent: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        instance: &'a Instance,
        xform: &'a TransformedGraph,
        sched_config: SchedulerConfig,
        penalty: f64,
    ) -> Self {
        Evaluator { instance, xform, sched_config, penalty, incumbent: f64::INFINITY }
    }

    /// Optimistic route bound, then the scheduling subproblem unless pruned.
    pub fn fitness(&self, plan: &RoutePlan) -> Result<Fitness, SolveError> {
        let unassisted = |plan: &RoutePlan| {
            cost::evaluate_route(plan, None, self.instance, self.xform)
                .map(|e| e.objective)
                .map_err(|e| SolveError::ConstraintViolation(e.to_string()))
        };
        if !plan.is_feasible() {
            let v = unassisted(plan)? + self.penalty;
            return Ok(Fitness { lower_bound: v, full: Some(v), schedule: None });
        }
        if plan.uav_served.is_empty() {
            let v = unassisted(plan)?;
            return Ok(Fitness { lower_bound: v, full: Some(v), schedule: None });
        }
        let lb = cost::route_lower_bound(plan, self.instance, self.xform)
            .map_err(|e| SolveError::ConstraintViolation(e.to_string()))?;
        if lb >= self.incumbent {
            // Bound prune: no schedule of this route can beat the incumbent.
            return Ok(Fitness { lower_bound: lb, full: None, schedule: None });
        }
        match scheduler::schedule(plan, self.instance, self.xform, &self.sched_config) {
            Some(schedule) => {
                let full = cost::evaluate_route(plan, Some(&schedule), self.instance, self.xform)
                    .map_err(|e| SolveError::ConstraintViolation(e.to_string()))?;
                Ok(Fitness { lower_bound: lb, full: Some(full.objective), schedule: Some(schedule) })
            }
            None => Ok(Fitness { lower_bound: lb, full: Some(unassisted(plan)? + self.penalty), schedule: None }),
        }
    }
}

pub struct Solution {
    pub plan: RoutePlan,
    pub schedule: Option<Schedule>,
    pub evaluation: RouteEvaluation,
    pub objective: f64,
}

/// Rebuild a plan for a fixed route, re-filtering every delivery's candidate
/// sorties; `None` when some delivery loses its last compatible sortie.
fn plan_from_route(
    route: Vec<NodeId>,
    uav_served: &HashSet<NodeId>,
    mean_speed: f64,
    instance: &Instance,
    xform: &TransformedGraph,
) -> Option<RoutePlan> {
    let on_route: HashSet<NodeId> = route.iter().copied().collect();
    let mut candidate_sorties = HashMap::new();
    for &d in uav_served {
        let ss = ordered_candidates(d, &route, &on_route, mean_speed, instance, xform);
        if ss.is_empty() {
            return None;
        }
        candidate_sorties.insert(d, ss);
    }
    Some(RoutePlan {
        route,
        uav_served: uav_served.clone(),
        candidate_sorties,
        unservable: Vec::new(),
    })
}

/// Exhaustively re-place each flying delivery's launch/recovery nodes on the
/// route. The greedy decode repair inserts endpoints by detour distance only;
/// here every candidate sortie and insertion slot pair is scored with the
/// optimistic route bound plus the sortie's flight energy, and the most
/// promising layouts are fully evaluated (schedule included). One pass.
fn refine_endpoints(
    mut current: Solution,
    instance: &Instance,
    xform: &TransformedGraph,
    evaluator: &mut Evaluator,
) -> Result<Solution, SolveError> {
    let mean_speed = mean_street_speed(instance);
    let w = instance.weights.clone();
    let mut deliveries: Vec<NodeId> = current.plan.uav_served.iter().copied().collect();
    deliveries.sort();
    for &d in &deliveries {
        // Endpoints other deliveries may still need stay on the route.
        let mut needed: HashSet<NodeId> = HashSet::new();
        for (&other, sorties) in &current.plan.candidate_sorties {
            if other == d {
                continue;
            }
            for s in sorties {
                needed.insert(s.launch);
                needed.insert(s.recover);
            }
        }
        let base: Vec<NodeId> = current
            .plan
            .route
            .iter()
            .copied()
            .filter(|&n| !xform.is_rendezvous(n) || needed.contains(&n))
            .collect();
        let all = xform.sorties_by_delivery.get(&d).map(Vec::as_slice).unwrap_or(&[]);
        // Rendezvous nodes near this delivery, usable as route stretchers.
        let stretchers: Vec<NodeId> = {
            let mut set: Vec<NodeId> = all
                .iter()
                .flat_map(|s| [s.launch, s.recover])
                .collect::<HashSet<_>>()
                .into_iter()
                .collect();
            set.sort();
            set.truncate(12);
            set
        };
        let mut scored: Vec<(bool, f64, Vec<NodeId>)> = Vec::new();
        for s in all.iter().take(32) {
            let launch_slots: Vec<(Vec<NodeId>, usize)> =
                match base.iter().position(|&n| n == s.launch) {
                    Some(p) => vec![(base.clone(), p)],
                    None => (1..base.len())
                        .map(|i| {
                            let mut r = base.clone();
                            r.insert(i, s.launch);
                            (r, i)
                        })
                        .collect(),
                };
            let rate = |trial: &[NodeId]| -> Option<(bool, f64)> {
                let mut cand = current.plan.candidate_sorties.clone();
                cand.insert(d, vec![s.clone()]);
                let probe = RoutePlan {
                    route: trial.to_vec(),
                    uav_served: current.plan.uav_served.clone(),
                    candidate_sorties: cand,
                    unservable: Vec::new(),
                };
                let bound = cost::route_lower_bound(&probe, instance, xform).ok()?;
                let fits = flight_time_estimate(s, d, instance, xform)
                    <= truck_time_estimate(trial, s.launch, s.recover, mean_speed, xform);
                Some((fits, bound + w.alpha * w.w2 * s.total_j / cost::JOULES_PER_KWH))
            };
            let mut s_scored: Vec<(bool, f64, Vec<NodeId>)> = Vec::new();
            for (r1, lp) in launch_slots {
                let trials: Vec<Vec<NodeId>> = if s.recover == s.launch || r1.contains(&s.recover)
                {
                    vec![r1]
                } else {
                    ((lp + 1)..r1.len())
                        .map(|j| {
                            let mut r = r1.clone();
                            r.insert(j, s.recover);
                            r
                        })
                        .collect()
                };
                for trial in trials {
                    if let Some((fits, score)) = rate(&trial) {
                        s_scored.push((fits, score, trial));
                    }
                }
            }
            // The truck often passes too quickly for the flight even when the
            // coarse estimate disagrees, so always also try stretching the
            // best layout with one extra rendezvous between the endpoints.
            if !s_scored.is_empty() {
                let (_, _, base_trial) = s_scored
                    .iter()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .cloned()
                    .expect("nonempty");
                let li = base_trial.iter().position(|&n| n == s.launch);
                let ri = base_trial.iter().rposition(|&n| n == s.recover);
                if let (Some(li), Some(ri)) = (li, ri) {
                    for &extra in &stretchers {
                        if base_trial.contains(&extra) {
                            continue;
                        }
                        for pos in (li + 1)..=ri {
                            let mut r = base_trial.clone();
                            r.insert(pos, extra);
                            if let Some((fits, score)) = rate(&r) {
                                s_scored.push((fits, score, r));
                            }
                        }
                    }
                }
            }
            scored.append(&mut s_scored);
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)));
        // Evaluate layouts in score order until a few actually schedule; the
        // coarse fit estimate above is no substitute for the scheduler.
        let mut seen: HashSet<Vec<NodeId>> = HashSet::new();
        let mut attempts = 0usize;
        let mut scheduled = 0usize;
        for (_, _, trial) in scored {
            if attempts >= 20 || scheduled >= 4 {
                break;
            }
            if !seen.insert(trial.clone()) {
                continue;
            }
            let Some(plan) =
                plan_from_route(trial, &current.plan.uav_served, mean_speed, instance, xform)
            else {
                continue;
            };
            attempts += 1;
            let fit = evaluator.fitness(&plan)?;
            if fit.schedule.is_some() {
                scheduled += 1;
            }
            if let Some(full) = fit.full {
                if full < current.objective {
                    let eval =
                        cost::evaluate_route(&plan, fit.schedule.as_ref(), instance, xform)
                            .map_err(|e| SolveError::ConstraintViolation(e.to_string()))?;
                    current =
                        Solution { plan, schedule: fit.schedule, evaluation: eval, objective: full };
                    evaluator.incumbent = evaluator.incumbent.min(full);
                }
            }
        }
    }
    Ok(current)
}

/// Nearest-neighbor order over the given nodes starting from the depot.
fn nearest_neighbor_order(ids: &[NodeId], xform: &TransformedGraph) -> Vec<NodeId> {
    let mut remaining: Vec<NodeId> = ids.to_vec();
    let mut order = Vec::with_capacity(ids.len());
    let mut cur = DEPOT_ID;
    while !remaining.is_empty() {
        let (i, _) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = xform.dist(cur, **a).unwrap_or(f64::INFINITY);
                let db = xform.dist(cur, **b).unwrap_or(f64::INFINITY);
                da.total_cmp(&db)
            })
            .expect("nonempty");
        cur = remaining.remove(i);
        order.push(cur);
    }
    order
}

fn order_crossover(a: &[NodeId], b: &[NodeId], rng: &mut ChaCha8Rng) -> Vec<NodeId> {
    let n = a.len();
    if n < 2 {
        return a.to_vec();
    }
    let mut i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    let slice: HashSet<NodeId> = a[i..=j].iter().copied().collect();
    let mut child = Vec::with_capacity(n);
    let mut rest = b.iter().filter(|x| !slice.contains(x));
    for k in 0..n {
        if k >= i && k <= j {
            child.push(a[k]);
        } else {
            child.push(*rest.next().expect("OX fill"));
        }
    }
    child
}

/// Solve the routing problem. Deterministic for a fixed config seed.
pub fn solve(
    instance: &Instance,
    xform: &TransformedGraph,
    config: &GaConfig,
    sched_config: &SchedulerConfig,
) -> Result<Solution, SolveError> {
    let uav_ids = instance.uav_delivery_ids();
    let truck_ids = instance.truck_delivery_ids();
    let mut all_ids = truck_ids.clone();
    all_ids.extend(&uav_ids);

    for &id in &all_ids {
        if xform.mission_index(id).is_none() {
            return Err(SolveError::NoFallback(format!("delivery {id} not in transformed graph")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let nn_order = nearest_neighbor_order(&all_ids, xform);
    let all_truck = Chromosome {
        serve_by_truck: vec![true; uav_ids.len()],
        visit_order: nn_order.clone(),
    };

    // Unassisted baseline: feasibility fallback and penalty scale.
    let baseline_plan = decode(&all_truck, instance, xform);
    let baseline_eval = cost::evaluate_route(&baseline_plan, None, instance, xform)
        .map_err(|e| SolveError::NoFallback(e.to_string()))?;
    let penalty = config.infeasible_penalty_factor * baseline_eval.objective.max(1.0);

    let mut evaluator = Evaluator::new(instance, xform, sched_config.clone(), penalty);
    evaluator.incumbent = baseline_eval.objective;
    let mut best = Solution {
        plan: baseline_plan,
        schedule: None,
        evaluation: baseline_eval,
        objective: evaluator.incumbent,
    };

    if all_ids.is_empty() {
        return Ok(best);
    }

    let can_fly: Vec<bool> = uav_ids
        .iter()
        .map(|d| {
            !config.truck_only
                && xform.sorties_by_delivery.get(d).map(|s| !s.is_empty()).unwrap_or(false)
        })
        .collect();

    let mut population: Vec<Chromosome> = Vec::with_capacity(config.population_size);
    population.push(all_truck);
    while population.len() < config.population_size {
        let mut order = all_ids.clone();
        order.shuffle(&mut rng);
        let flags = can_fly.iter().map(|&f| !(f && rng.gen_bool(0.7))).collect();
        population.push(Chromosome { serve_by_truck: flags, visit_order: order });
    }

    // Plans pruned by the bound, kept for replay if the incumbent allows.
    let mut archive: Vec<(Chromosome, f64)> = Vec::new();
    // Best plan that actually flies, for endpoint refinement even when the
    // unassisted baseline ends up winning the GA run. Fully evaluated plans
    // rank by objective; bound-pruned ones are kept as a fallback by bound.
    let mut best_assisted: Option<(Chromosome, f64)> = None;
    let mut best_assisted_pruned: Option<(Chromosome, f64)> = None;
    let mut stall = 0usize;

    let update_best = |fit: &Fitness,
                           ch: &Chromosome,
                           evaluator: &mut Evaluator,
                           best: &mut Solution,
                           instance: &Instance,
                           xform: &TransformedGraph|
     -> Result<bool, SolveError> {
        if let Some(full) = fit.full {
            if full < best.objective {
                let plan = decode(ch, instance, xform);
                let eval = cost::evaluate_route(&plan, fit.schedule.as_ref(), instance, xform)
                    .map_err(|e| SolveError::ConstraintViolation(e.to_string()))?;
                *best = Solution {
                    plan,
                    schedule: fit.schedule.clone(),
                    evaluation: eval,
                    objective: full,
                };
                evaluator.incumbent = full;
                return Ok(true);
            }
        }
        Ok(false)
    };

    for gen in 0..config.generations {
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(population.len());
        let mut improved = false;
        for (idx, ch) in population.iter().enumerate() {
            let plan = decode(ch, instance, xform);
            let fit = evaluator.fitness(&plan)?;
            if fit.full.is_none() {
                archive.push((ch.clone(), fit.lower_bound));
            }
            if plan.is_feasible() && !plan.uav_served.is_empty() {
                // Scheduled plans rank by objective; unscheduled ones carry
                // the penalty, so any scheduled plan outranks them.
                match fit.full {
                    Some(full) => {
                        if best_assisted.as_ref().map(|(_, b)| full < *b).unwrap_or(true) {
                            best_assisted = Some((ch.clone(), full));
                        }
                    }
                    None => {
                        let lb = fit.lower_bound;
                        if best_assisted_pruned.as_ref().map(|(_, b)| lb < *b).unwrap_or(true) {
                            best_assisted_pruned = Some((ch.clone(), lb));
                        }
                    }
                }
            }
            if update_best(&fit, ch, &mut evaluator, &mut best, instance, xform)? {
                improved = true;
            }
            scored.push((fit.full.unwrap_or(fit.lower_bound), idx));
        }
        stall = if improved { 0 } else { stall + 1 };
        if config.progress {
            eprintln!("gen,{gen},best,{}", best.objective);
        }
        if stall > config.stall_limit {
            break;
        }

        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut next: Vec<Chromosome> = scored
            .iter()
            .take(config.elitism_count)
            .map(|&(_, i)| population[i].clone())
            .collect();
        let rank_of: HashMap<usize, usize> =
            scored.iter().enumerate().map(|(rank, &(_, i))| (i, rank)).collect();
        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            (0..config.tournament_size)
                .map(|_| rng.gen_range(0..population.len()))
                .min_by_key(|i| rank_of[i])
                .expect("tournament nonempty")
        };
        while next.len() < config.population_size {
            let p1 = &population[tournament(&mut rng)];
            let p2 = &population[tournament(&mut rng)];
            let mut order = if rng.gen_bool(config.crossover_rate) {
                order_crossover(&p1.visit_order, &p2.visit_order, &mut rng)
            } else {
                p1.visit_order.clone()
            };
            let mut flags: Vec<bool> = p1
                .serve_by_truck
                .iter()
                .zip(&p2.serve_by_truck)
                .map(|(&a, &b)| if rng.gen_bool(0.5) { a } else { b })
                .collect();
            for (f, &fly) in flags.iter_mut().zip(&can_fly) {
                if rng.gen_bool(config.mutation_rate) {
                    *f = if fly { !*f } else { true };
                }
            }
            if order.len() >= 2 && rng.gen_bool(config.mutation_rate.max(0.0).min(1.0)) {
                let i = rng.gen_range(0..order.len());
                let j = rng.gen_range(0..order.len());
                order.swap(i, j);
            }
            next.push(Chromosome { serve_by_truck: flags, visit_order: order });
        }
        population = next;
    }

    // Replay archived plans whose bound still beats the incumbent.
    let archived = std::mem::take(&mut archive);
    for (ch, lb) in archived {
        if lb < evaluator.incumbent {
            let plan = decode(&ch, instance, xform);
            let fit = evaluator.fitness(&plan)?;
            update_best(&fit, &ch, &mut evaluator, &mut best, instance, xform)?;
        }
    }

    // Endpoint refinement on the winner, and on the best flying plan when
    // the unassisted baseline won (its layout may just be badly placed).
    let n_flying = best.plan.uav_served.len();
    if (1..=config.refine_limit).contains(&n_flying) {
        best = refine_endpoints(best, instance, xform, &mut evaluator)?;
    }
    if best.plan.uav_served.is_empty() {
        if let Some((ch, _)) = best_assisted.or(best_assisted_pruned) {
            let plan = decode(&ch, instance, xform);
            if (1..=config.refine_limit).contains(&plan.uav_served.len()) {
                let saved = evaluator.incumbent;
                evaluator.incumbent = f64::INFINITY;
                let fit = evaluator.fitness(&plan)?;
                evaluator.incumbent = saved;
                if let Some(full) = fit.full {
                    let eval = cost::evaluate_route(&plan, fit.schedule.as_ref(), instance, xform)
                        .map_err(|e| SolveError::ConstraintViolation(e.to_string()))?;
                    let start = Solution {
                        plan,
                        schedule: fit.schedule,
                        evaluation: eval,
                        objective: full,
                    };
                    let refined = refine_endpoints(start, instance, xform, &mut evaluator)?;
                    if refined.objective < best.objective {
                        best = refined;
                    }
                }
            }
        }
    }

    Ok(best)
}

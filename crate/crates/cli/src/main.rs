//! Command-line interface: instance generation, solving, benchmarking,
//! GeoJSON export and solution verification.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tandem_core::audit::audit_solution;
use tandem_core::cost;
use tandem_core::generate::{generate_instance, GenConfig};
use tandem_core::graph_xform::{transform, TransformedGraph, XformConfig};
use tandem_core::model::{self, Instance, NodeId};
use tandem_core::report::{build_report, SolutionReport};
use tandem_core::route_ga::{self, GaConfig, RoutePlan};
use tandem_core::scheduler::{Schedule, ScheduledSortie, SchedulerConfig, TruckTimeline};

#[derive(Parser)]
#[command(name = "tandem", about = "Truck + UAV tandem delivery optimization", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance on a built-in map.
    Generate(GenerateArgs),
    /// Solve an instance and print the solution report as JSON.
    Solve(SolveArgs),
    /// Solve a batch of seeded instances with and without UAV assistance.
    Bench(BenchArgs),
    /// Export an instance (and optionally a solution) as GeoJSON.
    Export(ExportArgs),
    /// Re-check a solution report against the problem constraints.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Truck-only deliveries (set H).
    #[arg(long, default_value_t = 4)]
    truck_deliveries: u32,
    /// UAV-eligible deliveries (set D).
    #[arg(long, default_value_t = 8)]
    uav_deliveries: u32,
    #[arg(long, default_value_t = 3)]
    uavs: u32,
    #[arg(long, default_value = "grid-city")]
    map: String,
    /// JSON file overriding the generator parameter ranges.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct WeightArgs {
    /// Energy/time trade-off weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Dollars per mL of truck fuel.
    #[arg(long)]
    w1: Option<f64>,
    /// Dollars per kWh of UAV battery energy.
    #[arg(long)]
    w2: Option<f64>,
}

impl WeightArgs {
    fn apply(&self, instance: &mut Instance) -> Result<()> {
        if let Some(a) = self.alpha {
            instance.weights.alpha = a;
        }
        if let Some(w) = self.w1 {
            instance.weights.w1 = w;
        }
        if let Some(w) = self.w2 {
            instance.weights.w2 = w;
        }
        instance.validate()?;
        Ok(())
    }
}

#[derive(Args, Clone)]
struct GaArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    population: usize,
    #[arg(long, default_value_t = 500)]
    generations: usize,
    #[arg(long, default_value_t = 100)]
    stall: usize,
    #[arg(long, default_value_t = 0.9)]
    crossover: f64,
    #[arg(long, default_value_t = 0.05)]
    mutation: f64,
    /// Launch-time samples per job window.
    #[arg(long, default_value_t = 64)]
    time_slots: usize,
    /// Dwell time at delivery stops and delivery points, seconds.
    #[arg(long, default_value_t = 0.0)]
    service_time: f64,
    /// Print per-generation progress on standard error.
    #[arg(long)]
    progress: bool,
}

impl GaArgs {
    fn ga_config(&self, truck_only: bool) -> GaConfig {
        GaConfig {
            population_size: self.population,
            generations: self.generations,
            crossover_rate: self.crossover,
            mutation_rate: self.mutation,
            seed: self.seed,
            stall_limit: self.stall,
            progress: self.progress,
            truck_only,
            ..GaConfig::default()
        }
    }

    fn sched_config(&self) -> SchedulerConfig {
        SchedulerConfig {
            time_slots: self.time_slots,
            service_time_s: self.service_time,
            seed: self.seed,
            ..SchedulerConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    ga: GaArgs,
    /// Forbid UAV use: truck serves every delivery.
    #[arg(long)]
    unassisted: bool,
    /// Also write the transformed graph (rendezvous nodes, sorties) here.
    #[arg(long)]
    dump_xform: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Seeds: a single number, a comma list, or an inclusive range "1..20".
    #[arg(long, default_value = "1..20")]
    seeds: String,
    #[arg(long, default_value = "grid-city")]
    map: String,
    #[arg(long, default_value_t = 4)]
    truck_deliveries: u32,
    #[arg(long, default_value_t = 8)]
    uav_deliveries: u32,
    #[arg(long, default_value_t = 3)]
    uavs: u32,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    weights: WeightArgs,
    #[command(flatten)]
    ga: GaArgs,
    /// CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Solution report to overlay (route and sorties).
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[command(flatten)]
    weights: WeightArgs,
    /// Dwell time the solution was produced with.
    #[arg(long, default_value_t = 0.0)]
    service_time: f64,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Export(a) => cmd_export(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| path.display().to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let config = match &a.config {
        Some(p) => GenConfig::load(p)?,
        None => GenConfig::default(),
    };
    let inst =
        generate_instance(a.seed, a.truck_deliveries, a.uav_deliveries, a.uavs, &a.map, &config)?;
    write_output(&a.out, &model::instance_to_json(&inst))
}

fn solve_instance(
    instance: &Instance,
    xform: &TransformedGraph,
    ga: &GaArgs,
    unassisted: bool,
) -> Result<route_ga::Solution> {
    let sol = route_ga::solve(instance, xform, &ga.ga_config(unassisted), &ga.sched_config())?;
    Ok(sol)
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let mut instance = model::load_instance(&a.instance)?;
    a.weights.apply(&mut instance)?;
    let xform = transform(&instance, &XformConfig::default())?;
    if let Some(path) = &a.dump_xform {
        let sorties: BTreeMap<u32, _> =
            xform.sorties_by_delivery.iter().map(|(k, v)| (k.0, v)).collect();
        let dump = serde_json::json!({
            "nodes": xform.aug.nodes,
            "edges": xform.aug.edges,
            "rendezvous": xform.aug.rendezvous,
            "sorties_by_delivery": sorties,
        });
        std::fs::write(path, serde_json::to_string_pretty(&dump)?)
            .with_context(|| path.display().to_string())?;
    }
    let sol = solve_instance(&instance, &xform, &a.ga, a.unassisted)?;
    let report = build_report(&sol, &instance, &xform);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(&a.out, &text)
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse()?;
        let hi: u64 = hi.trim().parse()?;
        if hi < lo {
            bail!("empty seed range {spec}");
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| anyhow!("bad seed {s}: {e}")))
        .collect()
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let config = match &a.config {
        Some(p) => GenConfig::load(p)?,
        None => GenConfig::default(),
    };
    let seeds = parse_seeds(&a.seeds)?;
    let mut rows: Vec<(String, f64, f64)> = Vec::new();
    println!(
        "{:>6} {:>14} {:>14} {:>14} {:>10}",
        "seed", "assisted", "unassisted", "improvement", "pct"
    );
    for &seed in &seeds {
        let mut instance = generate_instance(
            seed,
            a.truck_deliveries,
            a.uav_deliveries,
            a.uavs,
            &a.map,
            &config,
        )?;
        a.weights.apply(&mut instance)?;
        let xform = transform(&instance, &XformConfig::default())?;
        let unassisted = solve_instance(&instance, &xform, &a.ga, true)?;
        let mut assisted = solve_instance(&instance, &xform, &a.ga, false)?;
        // The all-truck plan is in the assisted search space; never report
        // an assisted result worse than it.
        if assisted.objective > unassisted.objective {
            assisted = route_ga::Solution {
                plan: unassisted.plan.clone(),
                schedule: None,
                evaluation: unassisted.evaluation.clone(),
                objective: unassisted.objective,
            };
        }
        let imp = unassisted.objective - assisted.objective;
        let pct = if unassisted.objective > 0.0 { 100.0 * imp / unassisted.objective } else { 0.0 };
        println!(
            "{:>6} {:>14.4} {:>14.4} {:>14.4} {:>9.2}%",
            seed, assisted.objective, unassisted.objective, imp, pct
        );
        rows.push((seed.to_string(), assisted.objective, unassisted.objective));
    }
    let mean_a = rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
    let mean_u = rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64;
    let mean_imp = mean_u - mean_a;
    let mean_pct = if mean_u > 0.0 { 100.0 * mean_imp / mean_u } else { 0.0 };
    println!(
        "{:>6} {:>14.4} {:>14.4} {:>14.4} {:>9.2}%",
        "mean", mean_a, mean_u, mean_imp, mean_pct
    );
    if let Some(path) = &a.csv {
        let mut csv = String::from("seed,assisted,unassisted,improvement,pct_improvement\n");
        for (seed, ass, un) in &rows {
            let imp = un - ass;
            let pct = if *un > 0.0 { 100.0 * imp / un } else { 0.0 };
            csv.push_str(&format!("{seed},{ass:.6},{un:.6},{imp:.6},{pct:.6}\n"));
        }
        csv.push_str(&format!(
            "mean,{mean_a:.6},{mean_u:.6},{mean_imp:.6},{mean_pct:.6}\n"
        ));
        std::fs::write(path, csv).with_context(|| path.display().to_string())?;
    }
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let instance = model::load_instance(&a.instance)?;
    let xform = transform(&instance, &XformConfig::default())?;
    let mut features = Vec::new();
    for n in &xform.aug.nodes {
        features.push(serde_json::json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": [n.x_m, n.y_m] },
            "properties": {
                "kind": "node",
                "id": n.id,
                "class": n.class,
                "package_kg": n.package_kg,
            },
        }));
    }
    for e in &xform.aug.edges {
        let u = xform.node_pos(e.u).ok_or_else(|| anyhow!("missing node {}", e.u))?;
        let v = xform.node_pos(e.v).ok_or_else(|| anyhow!("missing node {}", e.v))?;
        features.push(serde_json::json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": [[u.x, u.y], [v.x, v.y]] },
            "properties": { "kind": "street", "length_m": e.length_m, "speed_mps": e.speed_mps },
        }));
    }
    if let Some(path) = &a.solution {
        let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
        let report: SolutionReport = serde_json::from_str(&text)?;
        let mut coords = Vec::new();
        for leg in report.route.windows(2) {
            if leg[0] == leg[1] {
                continue;
            }
            let segs = xform
                .embedded_path(leg[0], leg[1])
                .ok_or_else(|| anyhow!("no path {} -> {}", leg[0], leg[1]))?;
            for s in segs {
                let p = xform.node_pos(s.u).unwrap();
                coords.push(vec![p.x, p.y]);
            }
        }
        if let Some(&last) = report.route.last() {
            let p = xform.node_pos(last).ok_or_else(|| anyhow!("missing node {last}"))?;
            coords.push(vec![p.x, p.y]);
        }
        features.push(serde_json::json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": { "kind": "route", "objective": report.objective },
        }));
        for (k, sorties) in report.schedule.iter().enumerate() {
            for s in sorties {
                let l = xform
                    .node_pos(s.sortie.launch_id)
                    .ok_or_else(|| anyhow!("missing node {}", s.sortie.launch_id))?;
                let d = xform
                    .node_pos(s.delivery_id)
                    .ok_or_else(|| anyhow!("missing node {}", s.delivery_id))?;
                let r = xform
                    .node_pos(s.sortie.recover_id)
                    .ok_or_else(|| anyhow!("missing node {}", s.sortie.recover_id))?;
                features.push(serde_json::json!({
                    "type": "Feature",
                    "geometry": {
                        "type": "LineString",
                        "coordinates": [[l.x, l.y], [d.x, d.y], [r.x, r.y]],
                    },
                    "properties": {
                        "kind": "sortie",
                        "uav": k,
                        "delivery_id": s.delivery_id,
                        "energy_j": s.energy_j,
                    },
                }));
            }
        }
    }
    let geojson = serde_json::json!({ "type": "FeatureCollection", "features": features });
    let mut text = serde_json::to_string_pretty(&geojson)?;
    text.push('\n');
    write_output(&a.out, &text)
}

/// Rebuild plan and schedule from a solution report for auditing.
fn reconstruct(
    report: &SolutionReport,
    instance: &Instance,
    xform: &TransformedGraph,
    service_time_s: f64,
) -> Result<(RoutePlan, Option<Schedule>)> {
    let on_route: std::collections::HashSet<NodeId> = report.route.iter().copied().collect();
    let mut uav_served = std::collections::HashSet::new();
    for sorties in &report.schedule {
        for s in sorties {
            uav_served.insert(s.delivery_id);
        }
    }
    let mut candidate_sorties = std::collections::HashMap::new();
    for &d in &uav_served {
        let ss: Vec<_> = xform
            .sorties_by_delivery
            .get(&d)
            .map(|v| {
                v.iter()
                    .filter(|s| on_route.contains(&s.launch) && on_route.contains(&s.recover))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default();
        candidate_sorties.insert(d, ss);
    }
    let plan = RoutePlan {
        route: report.route.clone(),
        uav_served,
        candidate_sorties,
        unservable: Vec::new(),
    };
    if report.schedule.iter().all(|s| s.is_empty()) {
        return Ok((plan, None));
    }
    let timeline = TruckTimeline::build(&plan, instance, xform, service_time_s)
        .ok_or_else(|| anyhow!("route is not traversable"))?;
    let per_uav = report
        .schedule
        .iter()
        .enumerate()
        .map(|(k, sorties)| {
            sorties
                .iter()
                .map(|s| ScheduledSortie {
                    delivery: s.delivery_id,
                    uav: k,
                    launch: s.sortie.launch_id,
                    recover: s.sortie.recover_id,
                    t_launch_s: s.t_launch_s,
                    t_recover_s: s.t_recover_s,
                    energy_j: s.energy_j,
                    launch_pos: timeline.position_at(s.t_launch_s),
                    intercept_pos: timeline.position_at(s.t_recover_s),
                })
                .collect()
        })
        .collect();
    Ok((plan, Some(Schedule { per_uav })))
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let mut instance = model::load_instance(&a.instance)?;
    a.weights.apply(&mut instance)?;
    let xform = transform(&instance, &XformConfig::default())?;
    let text = std::fs::read_to_string(&a.solution)
        .with_context(|| a.solution.display().to_string())?;
    let report: SolutionReport = serde_json::from_str(&text)?;
    let (plan, schedule) = reconstruct(&report, &instance, &xform, a.service_time)?;
    let mut findings = audit_solution(&plan, schedule.as_ref(), &instance, &xform, a.service_time);
    match cost::evaluate_route(&plan, schedule.as_ref(), &instance, &xform) {
        Ok(eval) => {
            let tol = 1e-6 * report.objective.abs().max(1.0);
            if (eval.objective - report.objective).abs() > tol {
                findings.push(format!(
                    "reported objective {} differs from recomputed {}",
                    report.objective, eval.objective
                ));
            }
        }
        Err(e) => findings.push(format!("route evaluation failed: {e}")),
    }
    if findings.is_empty() {
        println!("OK: solution satisfies all checked constraints");
        Ok(())
    } else {
        for f in &findings {
            eprintln!("VIOLATION: {f}");
        }
        bail!("{} constraint violation(s)", findings.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("2, 5,9").unwrap(), vec![2, 5, 9]);
        assert!(parse_seeds("9..2").is_err());
        assert!(parse_seeds("x").is_err());
    }
}

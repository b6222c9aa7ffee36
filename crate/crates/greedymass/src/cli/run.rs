use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::svg::curve_svg;
use super::{
    exit_code, EstimateSpec, Experiment, ExperimentConfig, GenerateSpec, SolveJob, SolveSpec,
    VerifySpec, VerifySuite,
};
use crate::error::{Error, Result};
use crate::estimators::{
    check_concavity, check_monotonicity, check_symmetry, divergence_probe,
    estimate_directional_limit, estimate_lln_curve, few_tsp_path, maximal_inequality_check,
    moment_property_check, sandwich_and_identity_suite, standard_box_pairs, CheckLine, Diagnostic,
    EstimateReport, GridPoint, C5_SWEEP,
};
use crate::pointproc::{MarkedRealization, Window};
use crate::rng::{stage, stream_rng};
use crate::solvers::{
    bracket_animal, lattice_max_animal, lattice_max_path, max_mass_animal_inf, max_mass_path,
};

#[derive(Parser)]
#[command(name = "greedymass", version, about = "Greedy path/animal solvers and estimators for marked point processes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample realizations from a process spec.
    Generate(RunArgs),
    /// Solve one optimization query on a realization.
    Solve(RunArgs),
    /// Monte Carlo estimation pipelines (LLN curves, directional limits).
    Estimate(RunArgs),
    /// Property-verification suites; nonzero exit on any failure.
    Verify(RunArgs),
    /// Re-execute a manifest and byte-compare the report.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (falls back to GREEDYMASS_JOBS, then the config).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default from config, then "out").
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn execute() -> i32 {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Generate(a) => run_subcommand("generate", a),
        Cmd::Solve(a) => run_subcommand("solve", a),
        Cmd::Estimate(a) => run_subcommand("estimate", a),
        Cmd::Verify(a) => run_subcommand("verify", a),
        Cmd::Replay { manifest, jobs } => match super::replay(&manifest, jobs) {
            Ok(true) => exit_code::OK,
            Ok(false) => {
                eprintln!("replay: report mismatch");
                exit_code::STRUCTURAL
            }
            Err(e) => {
                eprintln!("replay: {e}");
                exit_code::CONFIG
            }
        },
    };
    code
}

fn run_subcommand(kind: &str, args: RunArgs) -> i32 {
    let env_jobs = std::env::var("GREEDYMASS_JOBS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let jobs = args.jobs.or(env_jobs);
    match load_and_run(kind, &args.config, args.seed, jobs, args.out.as_deref()) {
        Ok(outcome) => outcome.exit,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code::CONFIG
        }
    }
}

fn load_and_run(
    kind: &str,
    config_path: &Path,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<&Path>,
) -> Result<RunOutcome> {
    let bytes = fs::read(config_path)?;
    let cfg = ExperimentConfig::from_json(&bytes)?;
    if cfg.kind != kind {
        return Err(Error::config(
            "kind",
            format!("config kind {:?} does not match subcommand {kind:?}", cfg.kind),
        ));
    }
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    run_config(&cfg, config_dir, out, seed, jobs)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit: i32,
    pub out_dir: PathBuf,
    pub report_path: PathBuf,
}

/// Execute a validated config and write `report.json`, `tables/*.csv`,
/// optional `plots/*.svg` and `manifest.json` under the output directory.
pub fn run_config(
    cfg: &ExperimentConfig,
    config_dir: &Path,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
    jobs_override: Option<usize>,
) -> Result<RunOutcome> {
    let mut effective = cfg.clone();
    if let Some(s) = seed_override {
        effective.seed = s;
    }
    let experiment = effective.experiment()?;
    let jobs = jobs_override
        .or(effective.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| effective.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run_experiment(&effective, &experiment, config_dir, &out_dir))?;

    // serialize the report
    let report_bytes = {
        let mut v = serde_json::to_vec_pretty(&outcome.report)?;
        v.push(b'\n');
        v
    };
    let report_path = out_dir.join("report.json");
    fs::write(&report_path, &report_bytes)?;

    // tables
    let tables = out_dir.join("tables");
    fs::create_dir_all(&tables)?;
    if !outcome.grid.is_empty() {
        write_csv(
            &tables.join("curve.csv"),
            "parameter,series,scale,mean,ci_half_width,replicas",
            outcome.grid.iter().map(|g| {
                format!(
                    "{},{},{},{},{},{}",
                    g.parameter, g.series, g.scale, g.mean, g.ci_half_width, g.replicas
                )
            }),
        )?;
    }
    if !outcome.check_lines.is_empty() {
        write_csv(
            &tables.join("checks.csv"),
            "suite,label,lhs,rhs,slack,pass",
            outcome
                .check_lines
                .iter()
                .map(|(s, l)| format!("{s},{},{},{},{},{}", l.label, l.lhs, l.rhs, l.slack, l.pass)),
        )?;
    }
    // plots
    if effective.plots && !outcome.grid.is_empty() {
        let plots = out_dir.join("plots");
        fs::create_dir_all(&plots)?;
        fs::write(
            plots.join("curve.svg"),
            curve_svg(&outcome.grid, &effective.kind),
        )?;
    }

    // manifest: the only artifact carrying a timestamp
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        jobs,
        config: effective.clone(),
        config_sha256: hex::encode(Sha256::digest(serde_json::to_vec(&effective)?)),
        report_sha256: hex::encode(Sha256::digest(&report_bytes)),
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    fs::write(out_dir.join("manifest.json"), manifest_bytes)?;

    Ok(RunOutcome {
        exit: outcome.exit,
        out_dir,
        report_path,
    })
}

#[derive(Serialize, Deserialize)]
pub(crate) struct Manifest {
    pub version: String,
    pub jobs: usize,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub report_sha256: String,
    pub created_unix: u64,
}

struct ExperimentOutcome {
    report: serde_json::Value,
    grid: Vec<GridPoint>,
    check_lines: Vec<(String, CheckLine)>,
    exit: i32,
}

fn run_experiment(
    cfg: &ExperimentConfig,
    exp: &Experiment,
    config_dir: &Path,
    out_dir: &Path,
) -> Result<ExperimentOutcome> {
    match exp {
        Experiment::Generate(g) => run_generate(cfg, g, out_dir),
        Experiment::Solve(s) => run_solve(cfg, s, config_dir),
        Experiment::Estimate(e) => run_estimate(cfg, e),
        Experiment::Verify(v) => run_verify(cfg, v, out_dir),
    }
}

fn run_generate(
    cfg: &ExperimentConfig,
    g: &GenerateSpec,
    out_dir: &Path,
) -> Result<ExperimentOutcome> {
    use rand::Rng;
    let dir = out_dir.join("realizations");
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut total_atoms = 0usize;
    for i in 0..g.count {
        let mut rng = stream_rng(cfg.seed, &[stage::GENERATE, 0xC0, i as u64]);
        let sample_seed: u64 = rng.gen();
        let r = g.process.sample(&g.window, sample_seed)?;
        total_atoms += r.atoms.len();
        let name = format!("realization_{i:04}.json");
        let mut bytes = serde_json::to_vec_pretty(&r)?;
        bytes.push(b'\n');
        fs::write(dir.join(&name), bytes)?;
        files.push(format!("realizations/{name}"));
    }
    Ok(ExperimentOutcome {
        report: serde_json::json!({
            "kind": "generate",
            "count": g.count,
            "total_atoms": total_atoms,
            "files": files,
        }),
        grid: vec![],
        check_lines: vec![],
        exit: exit_code::OK,
    })
}

fn run_solve(
    cfg: &ExperimentConfig,
    s: &SolveSpec,
    config_dir: &Path,
) -> Result<ExperimentOutcome> {
    let realization: MarkedRealization = match (&s.realization, &s.realization_file) {
        (Some(r), None) => r.clone(),
        (None, Some(path)) => {
            let p = if Path::new(path).is_absolute() {
                PathBuf::from(path)
            } else {
                config_dir.join(path)
            };
            serde_json::from_slice(&fs::read(p)?)?
        }
        _ => unreachable!("validated"),
    };
    let budget = cfg.node_budget;
    let (result_json, proven) = match &s.job {
        SolveJob::Path { query } => {
            let r = max_mass_path(&realization, query, budget)?;
            (serde_json::to_value(&r)?, r.proven_optimal)
        }
        SolveJob::AnimalInf { query } => {
            let r = max_mass_animal_inf(&realization, query, budget)?;
            (serde_json::to_value(&r)?, r.proven_optimal)
        }
        SolveJob::Bracket { query } => {
            let b = bracket_animal(&realization, query, budget)?;
            let proven = b.lower_proven && b.upper_proven;
            (serde_json::to_value(&b)?, proven)
        }
        SolveJob::LatticeAnimal { n, anchors } => {
            let r = lattice_max_animal(&realization, *n, anchors, budget)?;
            (serde_json::to_value(&r)?, r.proven_optimal)
        }
        SolveJob::LatticePath {
            steps,
            anchor,
            self_avoiding,
        } => {
            let r = lattice_max_path(&realization, *steps, anchor, *self_avoiding, budget)?;
            (serde_json::to_value(&r)?, r.proven_optimal)
        }
    };
    let require_proof = cfg.require_proof.unwrap_or(true);
    let exit = if require_proof && !proven {
        exit_code::BUDGET
    } else {
        exit_code::OK
    };
    Ok(ExperimentOutcome {
        report: serde_json::json!({
            "kind": "solve",
            "result": result_json,
            "proven_optimal": proven,
        }),
        grid: vec![],
        check_lines: vec![],
        exit,
    })
}

fn run_estimate(cfg: &ExperimentConfig, e: &EstimateSpec) -> Result<ExperimentOutcome> {
    let report: EstimateReport = match e {
        EstimateSpec::Lln {
            process,
            mode,
            ell_grid,
            replicas,
        } => estimate_lln_curve(process, *mode, ell_grid, *replicas, cfg.seed, cfg.node_budget)?,
        EstimateSpec::Directional {
            process,
            query,
            replicas,
        } => estimate_directional_limit(query, process, *replicas, cfg.seed, cfg.node_budget)?,
    };
    let require_proof = cfg.require_proof.unwrap_or(true);
    let exit = if require_proof && report.solver_flags > 0 {
        exit_code::BUDGET
    } else {
        exit_code::OK
    };
    Ok(ExperimentOutcome {
        grid: report.grid.clone(),
        report: serde_json::json!({
            "kind": "estimate",
            "report": serde_json::to_value(&report)?,
        }),
        check_lines: vec![],
        exit,
    })
}

#[derive(Serialize)]
struct SuiteOutcome {
    name: String,
    pass: bool,
    solver_flags: u64,
    details: serde_json::Value,
}

fn run_verify(
    cfg: &ExperimentConfig,
    v: &VerifySpec,
    out_dir: &Path,
) -> Result<ExperimentOutcome> {
    let mut outcomes = Vec::new();
    let mut lines: Vec<(String, CheckLine)> = Vec::new();
    let mut grid = Vec::new();
    let mut proof_flags = 0u64;
    for (si, suite) in v.suites.iter().enumerate() {
        let (outcome, diag_lines, suite_grid, counts_toward_proof) =
            run_suite(cfg, suite, si, out_dir)?;
        for l in diag_lines {
            lines.push((outcome.name.clone(), l));
        }
        grid.extend(suite_grid);
        if counts_toward_proof {
            proof_flags += outcome.solver_flags;
        }
        outcomes.push(outcome);
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let require_proof = cfg.require_proof.unwrap_or(true);
    let exit = if !pass {
        exit_code::STRUCTURAL
    } else if require_proof && proof_flags > 0 {
        exit_code::BUDGET
    } else {
        exit_code::OK
    };
    Ok(ExperimentOutcome {
        report: serde_json::json!({
            "kind": "verify",
            "pass": pass,
            "suites": serde_json::to_value(&outcomes)?,
        }),
        grid,
        check_lines: lines,
        exit,
    })
}

fn run_suite(
    cfg: &ExperimentConfig,
    suite: &VerifySuite,
    suite_index: usize,
    out_dir: &Path,
) -> Result<(SuiteOutcome, Vec<CheckLine>, Vec<GridPoint>, bool)> {
    let seed = cfg.seed;
    let budget = cfg.node_budget;
    match suite {
        VerifySuite::Sandwich { process, instances } => {
            let rep = sandwich_and_identity_suite(process, *instances, seed, budget)?;
            // failing instances become reproducible artifacts on disk
            if !rep.failures.is_empty() {
                let dir = out_dir.join("failures");
                fs::create_dir_all(&dir)?;
                for (i, f) in rep.failures.iter().enumerate() {
                    fs::write(
                        dir.join(format!("sandwich_{suite_index}_{i}.json")),
                        serde_json::to_vec_pretty(f)?,
                    )?;
                }
            }
            let lines = rep.diagnostic.lines.clone();
            Ok((
                SuiteOutcome {
                    name: format!("sandwich[{suite_index}]"),
                    pass: rep.diagnostic.pass,
                    solver_flags: rep.diagnostic.solver_flags,
                    details: serde_json::to_value(&rep)?,
                },
                lines,
                vec![],
                true,
            ))
        }
        VerifySuite::TailBound {
            lambda,
            dim,
            alpha_grid,
            ell_max,
            replicas,
        } => {
            let rep = crate::estimators::tail_bound_check(
                *lambda, *dim, alpha_grid, *ell_max, *replicas, seed,
            )?;
            let lines = rep.diagnostic.lines.clone();
            Ok((
                SuiteOutcome {
                    name: format!("tail_bound[{suite_index}]"),
                    pass: rep.diagnostic.pass,
                    solver_flags: 0,
                    details: serde_json::to_value(&rep)?,
                },
                lines,
                vec![],
                true,
            ))
        }
        VerifySuite::MaximalInequality {
            process,
            alpha_grid,
            n_max,
            replicas,
        } => {
            let rep = maximal_inequality_check(process, alpha_grid, *n_max, *replicas, seed, budget)?;
            let pass = rep.diagnostic.pass && rep.fekete.compatibility.pass;
            let mut lines = rep.diagnostic.lines.clone();
            lines.extend(rep.fekete.compatibility.lines.clone());
            Ok((
                SuiteOutcome {
                    name: format!("maximal_inequality[{suite_index}]"),
                    pass,
                    solver_flags: rep.diagnostic.solver_flags,
                    details: serde_json::to_value(&rep)?,
                },
                lines,
                vec![],
                true,
            ))
        }
        VerifySuite::MomentProperty {
            process,
            window_half,
            pairs,
            replicas,
            constant,
            expect_violation,
        } => {
            use rand::Rng;
            let window = Window::centered_box(vec![*window_half, *window_half]);
            let batch: Result<Vec<MarkedRealization>> = (0..*replicas)
                .map(|i| {
                    let mut rng = stream_rng(seed, &[stage::MOMENT, suite_index as u64, i as u64]);
                    let s: u64 = rng.gen();
                    process.sample(&window, s)
                })
                .collect();
            let batch = batch?;
            let box_pairs = standard_box_pairs(*window_half, *pairs);
            let diag = moment_property_check(&batch, &box_pairs, *constant)?;
            let pass = if *expect_violation { !diag.pass } else { diag.pass };
            let lines = diag.lines.clone();
            Ok((
                SuiteOutcome {
                    name: format!("moment_property[{suite_index}]"),
                    pass,
                    solver_flags: 0,
                    details: serde_json::to_value(&diag)?,
                },
                lines,
                vec![],
                true,
            ))
        }
        VerifySuite::Divergence {
            family,
            window_grid,
            replicas,
            thresholds,
            expect,
        } => {
            let th = thresholds.clone().unwrap_or_default();
            let rep = divergence_probe(family, window_grid, *replicas, seed, &th, budget)?;
            let pass = rep.classification == *expect;
            Ok((
                SuiteOutcome {
                    name: format!("divergence[{suite_index}]"),
                    pass,
                    solver_flags: rep.solver_flags,
                    details: serde_json::to_value(&rep)?,
                },
                vec![],
                rep.grid.clone(),
                // budget-capped values are valid lower bounds here
                false,
            ))
        }
        VerifySuite::FewTsp {
            n_values,
            dims,
            side,
            instances_per,
        } => {
            use rand::Rng;
            let mut lines = Vec::new();
            for &d in dims {
                for &n in n_values {
                    for inst in 0..*instances_per {
                        let mut rng = stream_rng(
                            seed,
                            &[stage::FEW_TSP, d as u64, n as u64, inst as u64],
                        );
                        let pts: Vec<Vec<f64>> = (0..n)
                            .map(|_| (0..d).map(|_| rng.gen_range(0.0..*side)).collect())
                            .collect();
                        let (_, ratio) = few_tsp_path(&pts, *side, d)?;
                        lines.push(CheckLine::le(
                            format!("d={d} n={n} i={inst}"),
                            ratio,
                            C5_SWEEP,
                            0.0,
                        ));
                    }
                }
            }
            let diag = Diagnostic::from_lines("few_tsp", lines.clone(), 0);
            Ok((
                SuiteOutcome {
                    name: format!("few_tsp[{suite_index}]"),
                    pass: diag.pass,
                    solver_flags: 0,
                    details: serde_json::to_value(&diag)?,
                },
                lines,
                vec![],
                true,
            ))
        }
        VerifySuite::DirectionalChecks {
            process,
            query,
            replicas,
        } => {
            let rep = estimate_directional_limit(query, process, *replicas, seed, budget)?;
            let top_scale = query
                .ell_grid
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let mut diags = Vec::new();
            let mut lines = Vec::new();
            for series in ["diamond", "antidiamond"] {
                let pts: Vec<GridPoint> = rep
                    .grid
                    .iter()
                    .filter(|g| g.series == series && g.scale == top_scale)
                    .cloned()
                    .collect();
                for diag in [
                    check_concavity(&pts)?,
                    check_symmetry(&pts)?,
                    check_monotonicity(&pts)?,
                ] {
                    lines.extend(diag.lines.clone());
                    diags.push((series.to_string(), diag));
                }
            }
            let pass = diags.iter().all(|(_, d)| d.pass);
            Ok((
                SuiteOutcome {
                    name: format!("directional_checks[{suite_index}]"),
                    pass,
                    solver_flags: rep.solver_flags,
                    details: serde_json::json!({
                        "report": serde_json::to_value(&rep)?,
                        "diagnostics": diags
                            .iter()
                            .map(|(s, d)| serde_json::json!({"series": s, "diagnostic": d}))
                            .collect::<Vec<_>>(),
                    }),
                },
                lines,
                rep.grid.clone(),
                true,
            ))
        }
    }
}

fn write_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

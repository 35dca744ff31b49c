//! Command-line front end: problem ingestion, invariant computation,
//! certificate emission, and plot-ready data export.
//!
//! Exit codes: 0 on success, 1 on method disagreement or certificate
//! failure, 2 on configuration errors.

mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ProblemConfig;
use report::{
    summary_block, write_atomic, write_json, BifurcateResults, FailureOut, MaslovResults,
    MethodOut, ParametrixResults, Report, SfResults, TraceResults, VERSION,
};
use specflow_core::bifurcate::{self, BranchOptions};
use specflow_core::grassmann::{maslov_loop_index, relative_maslov_index};
use specflow_core::parametrix::{certify_replay, parametrix_path};
use specflow_core::specflow::{compute_method, track_branches};
use specflow_core::{Error as CoreError, Tol};

#[derive(Parser)]
#[command(name = "specflow", version, about = "Spectral flow, Maslov indices, parametrix paths, and bifurcation detection for families of symmetric matrices")]
struct Cli {
    /// Problem configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and traces.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed override for random problem kinds.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance overrides, `name=value`; repeatable.
    #[arg(long = "tol-override", global = true, value_parser = parse_override)]
    tol_override: Vec<(String, f64)>,

    /// Comma-separated method subset for `sf` (morse,crossing,maslov,oracle).
    #[arg(long, global = true, value_delimiter = ',')]
    methods: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral flow by the selected methods, with an agreement verdict.
    Sf,
    /// Maslov index (loop or relative) of a Lagrangian path.
    Maslov,
    /// Build a finite-rank corrector path and certify invertibility.
    Parametrix,
    /// Full bifurcation scan with crossing certificates and branch witnesses.
    Bifurcate,
    /// Export eigenvalue branches as CSV (`lambda,branch_index,eigenvalue`).
    FlowTrace,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = v.parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.to_string(), value))
}

fn main() -> ExitCode {
    specflow_core::exec::init_from_env();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let cfg = ProblemConfig::load(config_path)?;
    let tol = cfg.tolerances(&cli.tol_override)?;
    let seed = cli.seed.or(cfg.seed);

    match cli.command {
        Command::Sf => run_sf(cli, &cfg, &tol, seed),
        Command::Maslov => run_maslov(cli, &cfg, &tol, seed),
        Command::Parametrix => run_parametrix(cli, &cfg, &tol, seed),
        Command::Bifurcate => run_bifurcate(cli, &cfg, &tol, seed),
        Command::FlowTrace => run_flow_trace(cli, &cfg, &tol, seed),
    }
}

fn out_paths(cli: &Cli, cfg: &ProblemConfig, command: &str) -> (PathBuf, PathBuf, PathBuf) {
    let out = &cli.out;
    let spec = cfg.output.clone();
    let report = spec
        .as_ref()
        .and_then(|o| o.report.clone())
        .unwrap_or_else(|| format!("{command}_report.json"));
    let summary = spec
        .as_ref()
        .and_then(|o| o.summary.clone())
        .unwrap_or_else(|| format!("{command}_summary.txt"));
    let trace = spec
        .as_ref()
        .and_then(|o| o.trace.clone())
        .unwrap_or_else(|| "flow_trace.csv".to_string());
    (out.join(report), out.join(summary), out.join(trace))
}

fn base_report<T: serde::Serialize>(
    cfg: &ProblemConfig,
    command: &str,
    seed: Option<u64>,
    tol: &Tol,
    results: T,
) -> Report<T> {
    Report {
        version: VERSION,
        command: command.to_string(),
        kind: cfg.kind.to_string(),
        interval: cfg.interval,
        dimension: cfg.dimension,
        seed,
        interpolation: cfg.samples.as_ref().map(|_| "piecewise-linear"),
        tolerances: tol.into(),
        results,
    }
}

fn run_sf(cli: &Cli, cfg: &ProblemConfig, tol: &Tol, seed: Option<u64>) -> anyhow::Result<ExitCode> {
    let methods = cfg.methods(&cli.methods)?;
    let path = cfg.operator_path(seed)?;
    let mut outs: Vec<MethodOut> = Vec::with_capacity(methods.len());
    for m in &methods {
        let r = compute_method(&path, *m, tol).map_err(|e| anyhow::anyhow!("{m}: {e}"))?;
        outs.push(MethodOut::from(&r));
    }
    let agree = outs.windows(2).all(|w| w[0].value == w[1].value);
    let value = agree.then(|| outs[0].value);
    let results = SfResults {
        methods: outs,
        agree,
        value,
    };

    let (report_path, summary_path, _) = out_paths(cli, cfg, "sf");
    let report = base_report(cfg, "sf", seed, tol, results);
    write_json(&report_path, &report)?;
    let mut rows: Vec<(String, String)> = report
        .results
        .methods
        .iter()
        .map(|m| (format!("sf[{}]", m.method), m.value.to_string()))
        .collect();
    rows.push(("agreement".into(), report.results.agree.to_string()));
    write_atomic(
        &summary_path,
        summary_block("spectral flow", &rows).as_bytes(),
    )?;
    println!(
        "sf: {} (agreement: {})",
        report
            .results
            .value
            .map(|v| v.to_string())
            .unwrap_or_else(|| "disagreement".into()),
        report.results.agree
    );
    Ok(if report.results.agree {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_maslov(
    cli: &Cli,
    cfg: &ProblemConfig,
    tol: &Tol,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let path = cfg.lagrangian_path(seed, tol)?;
    let mode = cfg.maslov_mode().to_string();
    let index = match mode.as_str() {
        "loop" => maslov_loop_index(&path, tol).map_err(|e| anyhow::anyhow!("{e}"))?,
        "relative" => {
            let reference = cfg.maslov_reference(tol)?;
            relative_maslov_index(&path, &reference, tol).map_err(|e| anyhow::anyhow!("{e}"))?
        }
        other => anyhow::bail!("unknown maslov mode `{other}`"),
    };
    let (report_path, summary_path, _) = out_paths(cli, cfg, "maslov");
    let report = base_report(cfg, "maslov", seed, tol, MaslovResults { mode, index });
    write_json(&report_path, &report)?;
    let rows = vec![
        ("mode".to_string(), report.results.mode.clone()),
        ("index".to_string(), report.results.index.to_string()),
    ];
    write_atomic(
        &summary_path,
        summary_block("maslov index", &rows).as_bytes(),
    )?;
    println!("maslov[{}]: {}", report.results.mode, report.results.index);
    Ok(ExitCode::SUCCESS)
}

fn run_parametrix(
    cli: &Cli,
    cfg: &ProblemConfig,
    tol: &Tol,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let path = cfg.operator_path(seed)?;
    let (report_path, summary_path, _) = out_paths(cli, cfg, "parametrix");
    match parametrix_path(&path, tol) {
        Ok(pp) => {
            let replay = certify_replay(&path, &pp, 10, tol);
            let (replay_margin, failure, ok) = match replay {
                Ok(m) => (m, None, true),
                Err(CoreError::CertificateFailure { at, margin }) => (
                    margin,
                    Some(FailureOut {
                        message: "certificate replay failed".into(),
                        lambda: Some(at),
                        margin: Some(margin),
                    }),
                    false,
                ),
                Err(e) => return Err(anyhow::anyhow!("{e}")),
            };
            let cert = pp.certificate();
            let results = ParametrixResults {
                dim_f: pp.f_space().dim(),
                suspension: pp.suspension(),
                samples: pp.r_samples().0.len(),
                certificate_margin: cert.margin,
                certificate_threshold: cert.threshold,
                certificate_checked: cert.checked,
                replay_margin,
                failure,
            };
            let report = base_report(cfg, "parametrix", seed, tol, results);
            write_json(&report_path, &report)?;
            let rows = vec![
                ("dim F".to_string(), report.results.dim_f.to_string()),
                ("suspension".to_string(), report.results.suspension.to_string()),
                (
                    "certificate margin".to_string(),
                    format!("{:.6e}", report.results.certificate_margin),
                ),
                (
                    "threshold".to_string(),
                    format!("{:.6e}", report.results.certificate_threshold),
                ),
                (
                    "replay margin (10x)".to_string(),
                    format!("{:.6e}", report.results.replay_margin),
                ),
            ];
            write_atomic(
                &summary_path,
                summary_block("parametrix certificate", &rows).as_bytes(),
            )?;
            println!(
                "parametrix: dim F = {}, margin = {:.3e}",
                report.results.dim_f, report.results.replay_margin
            );
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Err(e @ (CoreError::CertificateFailure { .. }
        | CoreError::SuspensionBudgetExceeded { .. }
        | CoreError::AmbientTooSmall { .. })) => {
            let (lambda, margin) = match &e {
                CoreError::CertificateFailure { at, margin } => (Some(*at), Some(*margin)),
                _ => (None, None),
            };
            let results = ParametrixResults {
                dim_f: 0,
                suspension: 0,
                samples: 0,
                certificate_margin: f64::NAN,
                certificate_threshold: f64::NAN,
                certificate_checked: 0,
                replay_margin: f64::NAN,
                failure: Some(FailureOut {
                    message: e.to_string(),
                    lambda,
                    margin,
                }),
            };
            let report = base_report(cfg, "parametrix", seed, tol, results);
            write_json(&report_path, &report)?;
            eprintln!("parametrix failed: {e}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(anyhow::anyhow!("{e}")),
    }
}

fn run_bifurcate(
    cli: &Cli,
    cfg: &ProblemConfig,
    tol: &Tol,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let fam = cfg.family(seed)?;
    let detected = bifurcate::detect_candidates(&fam, tol).map_err(|e| anyhow::anyhow!("{e}"))?;
    let full = bifurcate::verify_branches(&fam, &detected, &BranchOptions::default(), tol)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let results = BifurcateResults::from(&full);
    let (report_path, summary_path, _) = out_paths(cli, cfg, "bifurcate");
    let report = base_report(cfg, "bifurcate", seed, tol, results);
    write_json(&report_path, &report)?;

    let mut rows: Vec<(String, String)> = Vec::new();
    rows.push(("total sf".into(), report.results.total_sf.to_string()));
    rows.push((
        "guaranteed count".into(),
        report.results.guaranteed_count.to_string(),
    ));
    for c in &report.results.candidates {
        rows.push((
            format!("candidate λ*={:.9}", c.lambda),
            format!(
                "kernel {} signature {} certified {}",
                c.kernel_dim, c.signature, c.certified
            ),
        ));
    }
    for b in &report.results.branches {
        rows.push((
            format!("branch λ*={:.9}", b.lambda_star),
            format!(
                "verified {} exponent {}",
                b.verified,
                b.exponent.map(|e| format!("{e:.4}")).unwrap_or_else(|| "-".into())
            ),
        ));
    }
    write_atomic(
        &summary_path,
        summary_block("bifurcation report", &rows).as_bytes(),
    )?;
    println!(
        "bifurcate: {} candidates, sf = {}, guaranteed {}",
        report.results.candidates.len(),
        report.results.total_sf,
        report.results.guaranteed_count
    );
    Ok(ExitCode::SUCCESS)
}

fn run_flow_trace(
    cli: &Cli,
    cfg: &ProblemConfig,
    tol: &Tol,
    seed: Option<u64>,
) -> anyhow::Result<ExitCode> {
    let path = cfg.operator_path(seed)?;
    let samples = cfg.oracle_samples.unwrap_or(400);
    let track = track_branches(&path, samples, tol).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut csv = String::from("lambda,branch_index,eigenvalue\n");
    let mut rows = 0usize;
    for (i, t) in track.ts.iter().enumerate() {
        for (k, v) in track.values[i].iter().enumerate() {
            csv.push_str(&format!("{t},{k},{v}\n"));
            rows += 1;
        }
    }
    let (report_path, summary_path, trace_path) = out_paths(cli, cfg, "flow-trace");
    write_atomic(&trace_path, csv.as_bytes())?;
    let results = TraceResults {
        rows,
        branches: cfg.dimension,
        csv: trace_path.display().to_string(),
    };
    let report = base_report(cfg, "flow-trace", seed, tol, results);
    write_json(&report_path, &report)?;
    let rows_fmt = vec![
        ("rows".to_string(), rows.to_string()),
        ("csv".to_string(), trace_path.display().to_string()),
    ];
    write_atomic(
        &summary_path,
        summary_block("flow trace", &rows_fmt).as_bytes(),
    )?;
    println!("flow-trace: {rows} rows -> {}", trace_path.display());
    Ok(ExitCode::SUCCESS)
}

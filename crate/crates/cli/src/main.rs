//! `einstein-randers`: verification suites and data export for the
//! Taub-NUT navigation Randers metrics.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 for
//! usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use einstein_randers::linalg::Vec4;
use einstein_randers::verify::{self, GridSpec, RunConfig, VerificationReport};
use einstein_randers::Error;

#[derive(Parser, Debug)]
#[command(name = "einstein-randers", version, about)]
#[command(after_help = "Tolerances are overridden with --tol.<name> <value>, e.g. --tol.einstein 1e-7.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metric construction, curvature identities and Ricci-flatness.
    VerifyRiemann(Common),
    /// Killing equation for the rotational wind.
    VerifyKilling(Common),
    /// The rotation flow as an isometry group.
    VerifyIsometry(Common),
    /// Domain, Randers data, Einstein scan and flag-curvature spread.
    VerifyFinsler(Common),
    /// Table of sampled flags and their flag curvature.
    SampleFlag(Common),
    /// Randers data on a cubic grid.
    ExportRanders {
        #[command(flatten)]
        common: Common,
        /// Half-width of the grid; defaults to the sampling radius.
        #[arg(long)]
        grid_extent: Option<f64>,
        /// Nodes per axis.
        #[arg(long, default_value_t = 5)]
        grid_points: usize,
    },
    /// A single RK4 geodesic with its conservation diagnostic.
    Geodesic {
        #[command(flatten)]
        common: Common,
        /// Initial point, comma separated.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, default_value = "0.5,0,0,0")]
        x0: Vec4,
        /// Initial velocity, comma separated.
        #[arg(long, value_parser = parse_vec4, allow_hyphen_values = true, default_value = "0,1,0,0")]
        v0: Vec4,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1000, allow_negative_numbers = true)]
        steps: i64,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    n: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    samples: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    radius: Option<f64>,
    /// Replace the rotational wind by the zero field.
    #[arg(long)]
    zero_wind: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plain-text key = value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_vec4(s: &str) -> Result<Vec4, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected four comma-separated numbers".to_string())
}

/// Splits `--tol.<name> <value>` and `--tol.<name>=<value>` out of the
/// argument list, since clap cannot declare open-ended flag families.
fn split_tolerances(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), Error> {
    let mut rest = Vec::with_capacity(args.len());
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol.") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Usage(format!("--tol.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        tols.push((format!("tol.{name}"), value));
    }
    Ok((rest, tols))
}

fn build_config(common: &Common, tols: &[(String, String)]) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    let flags = [
        ("a", common.a.map(|v| v.to_string())),
        ("m", common.m.map(|v| v.to_string())),
        ("n", common.n.map(|v| v.to_string())),
        ("seed", common.seed.map(|v| v.to_string())),
        ("samples", common.samples.map(|v| v.to_string())),
        ("radius", common.radius.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if common.zero_wind {
        cfg.zero_wind = true;
    }
    for (key, value) in tols {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(common: &Common, body: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_report(common: &Common, report: &VerificationReport) -> Result<bool, Error> {
    let body = match common.format {
        Format::Json => verify::to_json(report),
        Format::Csv => report.to_csv(),
    };
    emit(common, &body)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: residual {:e} vs tolerance {:?}", c.name, c.residual, c.tolerance);
    }
    eprintln!(
        "{}: {} ({:.2} s)",
        report.suite,
        if report.pass { "pass" } else { "FAIL" },
        report.wall_time.as_secs_f64()
    );
    Ok(report.pass)
}

fn run(command: &Command, tols: &[(String, String)]) -> Result<bool, Error> {
    match command {
        Command::VerifyRiemann(c) => emit_report(c, &verify::verify_riemann(&build_config(c, tols)?)?),
        Command::VerifyKilling(c) => emit_report(c, &verify::verify_killing(&build_config(c, tols)?)?),
        Command::VerifyIsometry(c) => emit_report(c, &verify::verify_isometry(&build_config(c, tols)?)?),
        Command::VerifyFinsler(c) => emit_report(c, &verify::verify_finsler(&build_config(c, tols)?)?),
        Command::SampleFlag(c) => {
            let table = verify::sample_flags(&build_config(c, tols)?)?;
            let body = match c.format {
                Format::Json => verify::to_json(&table),
                Format::Csv => table.to_csv(),
            };
            emit(c, &body)?;
            Ok(true)
        }
        Command::ExportRanders {
            common,
            grid_extent,
            grid_points,
        } => {
            let cfg = build_config(common, tols)?;
            let grid = GridSpec {
                extent: grid_extent.unwrap_or(cfg.radius),
                points: *grid_points,
            };
            let table = verify::export_randers(&cfg, &grid)?;
            let body = match common.format {
                Format::Json => verify::to_json(&table),
                Format::Csv => table.to_csv(),
            };
            emit(common, &body)?;
            Ok(true)
        }
        Command::Geodesic {
            common,
            x0,
            v0,
            t_end,
            steps,
        } => {
            let cfg = build_config(common, tols)?;
            if *steps < 1 {
                return Err(Error::Usage(format!("steps must be >= 1, got {steps}")));
            }
            let run = verify::run_geodesic(&cfg, x0, v0, *t_end, *steps as usize)?;
            let body = match common.format {
                Format::Json => verify::to_json(&run),
                Format::Csv => run.to_csv(),
            };
            emit(common, &body)?;
            if run.trace.exited_domain {
                eprintln!("geodesic left the domain at t = {}", run.trace.last().map_or(0.0, |s| s.t));
            }
            eprintln!(
                "geodesic: relative drift {:e} ({})",
                run.conservation.relative,
                if run.check.pass { "pass" } else { "FAIL" }
            );
            Ok(run.check.pass)
        }
    }
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::Usage(_) | Error::Config(_) | Error::OutsideDomain { .. } | Error::Domain(_)
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let (args, tols) = match split_tolerances(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command, &tols) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_usage(&e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use hexmg::clustering::{
    assign_messages, clusters, conferencing_message_count, count_links, AssignMode, LinkSide,
    Scheme,
};
use hexmg::config::Config;
use hexmg::converse::{
    partition_four, partition_two, schedule_algorithm1, schedule_algorithm2, validate_schedule,
};
use hexmg::lattice::build_network;
use hexmg::rational::{format_decimal, parse_rational};
use hexmg::regions::{
    boundary_samples, inner_bound_for, outer_bound, MGPoint, Region, SystemParams, TRange,
};
use hexmg::zf::{run_trials, ZfScheme};
use hexmg_cli::emit::{self, Series};
use hexmg_cli::suite;
use num_rational::BigRational;
use num_traits::Signed;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl From<hexmg::Error> for CliError {
    fn from(e: hexmg::Error) -> Self {
        match e {
            hexmg::Error::InvalidParameter { .. }
            | hexmg::Error::LatticeTooSmall { .. }
            | hexmg::Error::NoInteriorCluster { .. }
            | hexmg::Error::Parse { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "hexmg",
    version,
    about = "Sectorized hexagonal network toolkit",
    args_override_self = true
)]
struct Cli {
    /// Directory for output files (stdout when absent).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Flat `key = value` file with flag defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Slow,
    Mixed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    S3,
    S4,
    S5,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartitionArg {
    Two,
    Four,
}

fn positive(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn prelog(s: &str) -> Result<BigRational, String> {
    let v = parse_rational(s).map_err(|e| e.to_string())?;
    if v.is_negative() {
        return Err("must be non-negative".into());
    }
    Ok(v)
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Directed interference edges as CSV.
    #[command(args_override_self = true)]
    Lattice {
        #[arg(long, value_parser = positive)]
        radius: u32,
        #[arg(long, value_parser = positive)]
        m: u32,
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Clusters and message roles as CSV.
    #[command(args_override_self = true)]
    Cluster {
        #[arg(long, value_parser = positive)]
        radius: u32,
        #[arg(long, value_parser = positive)]
        t: u32,
        #[arg(long, value_enum, default_value = "mixed")]
        mode: ModeArg,
        /// Compare enumerated link and message counts with their closed forms.
        #[arg(long)]
        check_counts: bool,
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Inner and outer multiplexing-gain regions.
    #[command(args_override_self = true, group(ArgGroup::new("which").args(["inner", "outer", "both"])))]
    Region {
        #[arg(long, value_parser = positive)]
        m: u32,
        #[arg(long, value_parser = prelog)]
        mu_tx: BigRational,
        #[arg(long, value_parser = prelog)]
        mu_rx: BigRational,
        #[arg(long, value_parser = positive)]
        d: u32,
        #[arg(long)]
        inner: bool,
        #[arg(long)]
        outer: bool,
        #[arg(long)]
        both: bool,
        /// Restrict the inner bound to one value of t.
        #[arg(long, value_parser = positive)]
        t: Option<u32>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Emit this many boundary points instead of the vertices.
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        samples: Option<u32>,
    },
    /// Seeded zero-forcing trials on one interior cluster.
    #[command(args_override_self = true)]
    Zf {
        #[arg(long, value_parser = positive)]
        t: u32,
        #[arg(long, value_parser = positive)]
        m: u32,
        #[arg(long, default_value_t = 100, value_parser = positive)]
        trials: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value = "s4")]
        scheme: SchemeArg,
    },
    /// Cell partition census.
    #[command(args_override_self = true)]
    Converse {
        #[arg(long, value_parser = positive)]
        d: Option<u32>,
        #[arg(long, value_parser = positive)]
        radius: u32,
        #[arg(long)]
        check_fractions: bool,
        #[arg(long, value_enum, default_value = "four")]
        partition: PartitionArg,
    },
    /// Decoding schedule of the converse argument.
    #[command(args_override_self = true)]
    Schedule {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        algorithm: u8,
        #[arg(long)]
        dt: u32,
        #[arg(long)]
        dr: u32,
        /// Delay budget; defaults to dt + dr.
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        validate: bool,
    },
    /// Runs every verification suite.
    #[command(name = "verify-all", args_override_self = true)]
    VerifyAll {
        #[arg(long, default_value_t = 30, value_parser = positive)]
        radius: u32,
    },
}

const SUBCOMMANDS: [&str; 7] = [
    "lattice",
    "cluster",
    "region",
    "zf",
    "converse",
    "schedule",
    "verify-all",
];

/// Finds `--config` among the raw arguments and splices its entries in
/// right after the subcommand, so flags given on the command line win.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let cfg = Config::parse(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    let Some(at) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (k, v) in cfg.iter() {
        match (k, v) {
            ("config", _) | (_, "false") => {}
            (_, "true") => injected.push(OsString::from(format!("--{k}"))),
            _ => injected.push(OsString::from(format!("--{k}={v}"))),
        }
    }
    let mut out = args[..=at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

struct Sink<'a> {
    out: Option<&'a Path>,
}

impl Sink<'_> {
    /// Writes `text` to `file` (under `--out` when relative), to
    /// `--out/default` when only `--out` is set, or to stdout.
    fn write(&self, file: Option<&Path>, default: &str, text: &str) -> Result<(), CliError> {
        let path = match (file, self.out) {
            (Some(f), Some(dir)) if f.is_relative() => dir.join(f),
            (Some(f), _) => f.to_path_buf(),
            (None, Some(dir)) => dir.join(default),
            (None, None) => {
                print!("{text}");
                return Ok(());
            }
        };
        let io_err = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
        fs::write(&path, text).map_err(io_err)
    }
}

fn region_series(
    params: &SystemParams,
    range: TRange,
    which: (bool, bool),
    samples: Option<u32>,
) -> Result<Series<'static>, CliError> {
    let pick = |r: Region| -> Result<Vec<MGPoint>, CliError> {
        Ok(match samples {
            Some(n) => boundary_samples(&r, n as usize)?,
            None => r.vertices().to_vec(),
        })
    };
    let mut series = Vec::new();
    if which.0 {
        series.push(("inner", pick(inner_bound_for(params, range))?));
    }
    if which.1 {
        series.push(("outer", pick(outer_bound(params))?));
    }
    Ok(series)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let sink = Sink {
        out: cli.out.as_deref(),
    };
    match cli.command {
        Command::Lattice { radius, m, emit } => {
            let net = build_network(radius, m)?;
            sink.write(emit.as_deref(), "lattice.csv", &emit::lattice_csv(&net))
        }
        Command::Cluster {
            radius,
            t,
            mode,
            check_counts,
            emit,
        } => {
            let net = build_network(radius, 1)?;
            let mode = match mode {
                ModeArg::Slow => AssignMode::SlowOnly,
                ModeArg::Mixed => AssignMode::Mixed,
            };
            let plan = assign_messages(&clusters(&net, t)?, mode)?;
            sink.write(emit.as_deref(), "cluster.csv", &emit::cluster_csv(&plan))?;
            if !check_counts {
                return Ok(());
            }
            let t2 = (t as u64) * (t as u64);
            let tt = t as u64;
            let rows = [
                ("tx links", count_links(&plan, LinkSide::Tx)?, 36 * t2),
                ("rx links", count_links(&plan, LinkSide::Rx)?, 18 * t2),
                (
                    "tx messages (M=1)",
                    conferencing_message_count(&plan, Scheme::S4, 1, LinkSide::Tx)?,
                    2 * tt * (8 * t2 + 3 * tt - 2),
                ),
                (
                    "rx messages (M=1)",
                    conferencing_message_count(&plan, Scheme::S4, 1, LinkSide::Rx)?,
                    3 * (3 * t2 - 1),
                ),
            ];
            let mut bad = 0;
            for (name, got, want) in rows {
                let ok = got == want;
                bad += usize::from(!ok);
                eprintln!(
                    "{} {name}: {got} (expected {want})",
                    if ok { "PASS" } else { "FAIL" }
                );
            }
            if bad > 0 {
                return Err(CliError::Failed(format!("{bad} count mismatches")));
            }
            Ok(())
        }
        Command::Region {
            m,
            mu_tx,
            mu_rx,
            d,
            inner,
            outer,
            both,
            t,
            format,
            samples,
        } => {
            let params = SystemParams::new(m, mu_tx, mu_rx, d)?;
            let which = if inner || outer {
                (inner || both, outer || both)
            } else {
                (true, true)
            };
            let range = t.map_or(TRange::All, TRange::Only);
            let series = region_series(&params, range, which, samples)?;
            let (text, name) = match format {
                FormatArg::Csv => (emit::region_csv(&series), "region.csv"),
                FormatArg::Svg => (emit::region_svg(&series), "region.svg"),
                FormatArg::Json => {
                    let p = [
                        ("m", json!(m)),
                        ("mu_tx", emit::rational_json(&params.mu_tx)),
                        ("mu_rx", emit::rational_json(&params.mu_rx)),
                        ("d", json!(d)),
                        ("t", t.map_or(serde_json::Value::Null, |t| json!(t))),
                    ];
                    (emit::region_json(&p, &series), "region.json")
                }
            };
            sink.write(None, name, &text)
        }
        Command::Zf {
            t,
            m,
            trials,
            tol,
            scheme,
        } => {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Usage("invalid tol: must be positive".into()));
            }
            let (mode, zs, label) = match scheme {
                SchemeArg::S3 => (AssignMode::SlowOnly, ZfScheme::S3, "s3"),
                SchemeArg::S4 => (AssignMode::Mixed, ZfScheme::S4, "s4"),
                SchemeArg::S5 => (AssignMode::Mixed, ZfScheme::S5, "s5"),
            };
            let net = build_network(3 * t + 2, 1)?;
            let plan = assign_messages(&clusters(&net, t)?, mode)?;
            let c = plan.interior_cluster()?;
            let out = run_trials(&plan, c, m as usize, zs, cli.seed, trials as usize, tol)?;
            let passed = out.iter().filter(|o| o.passed()).count();
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| CliError::Failed(e.to_string());
            w.write_record(["trial", "solvable", "max_cross_residual", "min_self_rank"])
                .map_err(csv_err)?;
            for o in &out {
                let (res, rank) = match &o.report {
                    Ok(r) => (
                        format!("{:.6e}", r.max_cross_residual),
                        r.min_self_rank.to_string(),
                    ),
                    Err(_) => (String::new(), String::new()),
                };
                w.write_record([o.trial.to_string(), o.passed().to_string(), res, rank])
                    .map_err(csv_err)?;
            }
            let body = String::from_utf8(
                w.into_inner()
                    .map_err(|e| CliError::Failed(e.to_string()))?,
            )
            .expect("ascii csv");
            let ok = passed == out.len();
            println!(
                "zf t={t} m={m} scheme={label} seed={} trials={trials} passed={passed} {}",
                cli.seed,
                if ok { "PASS" } else { "FAIL" }
            );
            sink.write(None, "zf.csv", &body)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "{} trials failed",
                    out.len() - passed
                )))
            }
        }
        Command::Converse {
            d,
            radius,
            check_fractions,
            partition,
        } => {
            let net = build_network(radius, 1)?;
            let p = match partition {
                PartitionArg::Two => partition_two(&net),
                PartitionArg::Four => {
                    let d = d.ok_or_else(|| {
                        CliError::Usage("--d is required for the four-color partition".into())
                    })?;
                    partition_four(&net, d)?
                }
            };
            let rows = p.fraction_report();
            sink.write(None, "converse.csv", &emit::census_csv(&rows))?;
            if !check_fractions {
                return Ok(());
            }
            let worst = suite::partition_error(&p);
            let ok = hexmg::rational::to_f64(&worst) <= suite::FRACTION_TOL;
            println!(
                "fractions {}: largest error {}",
                if ok { "PASS" } else { "FAIL" },
                format_decimal(&worst, 6)
            );
            if ok {
                Ok(())
            } else {
                Err(CliError::Failed("fraction check failed".into()))
            }
        }
        Command::Schedule {
            algorithm,
            dt,
            dr,
            d,
            validate,
        } => {
            let d = d.unwrap_or(dt + dr);
            let plan = if algorithm == 1 {
                schedule_algorithm1(&partition_two(&build_network(6, 1)?), dt, dr, d)?
            } else {
                let pd = d.max(2);
                schedule_algorithm2(&partition_four(&build_network(3 * pd, 1)?, pd)?, dt, dr, d)?
            };
            sink.write(None, "schedule.csv", &emit::schedule_table(&plan))?;
            if !validate {
                return Ok(());
            }
            let v = validate_schedule(&plan);
            print!("{}", emit::violations_text(&v));
            if v.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failed(format!("{} violations", v.len())))
            }
        }
        Command::VerifyAll { radius } => {
            let checks = suite::run_all(radius, cli.seed);
            let report = suite::render(radius, cli.seed, &checks);
            if sink.out.is_some() {
                sink.write(None, "verify-all.txt", &report)?;
            }
            print!("{report}");
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(CliError::Failed("verification failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(cli);
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

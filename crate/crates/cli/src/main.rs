//! Command-line front end for the vehicular system-level link simulator.
//!
//! Exit codes: 0 on success, 1 when a validation run fails (or a requested
//! real-time check is missed), 2 on configuration or schema errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use slsim_core::channel::{PathKind, PropagationPath, SamplingConfig, StationarityRegion};
use slsim_core::doppler::{
    analytic_rms_doppler, closed_form_exp_delay_spread, resolution_analysis, DopplerEnv,
};
use slsim_core::estimator::{pdp_brute, pdp_fast, EstimatorConfig};
use slsim_core::fer::{build_table_resumable, FerGrid, FerTable, FrameBudget, SyntheticFerOracle};
use slsim_core::gscm::Scenario;
use slsim_core::rng::keyed_rng;
use slsim_core::sim::{run_simulation, RunConfig};
use slsim_core::tdl::{exp_pdp, ExpPdpConfig};

#[derive(Parser)]
#[command(name = "slsim", version, about = "Vehicular wireless system-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a scenario and emit a per-region FER trace.
    Run(RunArgs),
    /// Populate a frame-error-rate lookup table over a parameter grid.
    GenTable(GenTableArgs),
    /// Export analysis sweeps as CSV.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Self-checks that exit non-zero on failure.
    Validate {
        #[command(subcommand)]
        what: ValidateCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario description (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// FER lookup table (CSV with .meta.json sidecar).
    #[arg(long)]
    table: PathBuf,
    /// Channel realizations averaged per region.
    #[arg(long, default_value_t = 100)]
    realizations: u32,
    /// Master seed; the trace is a pure function of (scenario, table, seed, realizations).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output trace CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Measure per-region wall time and fail (exit 1) if any region takes
    /// longer than the stationarity time.
    #[arg(long)]
    realtime_check: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    /// Deterministic logistic-waterfall model sampled with binomial noise.
    Synthetic,
}

#[derive(Args)]
struct GenTableArgs {
    /// Grid definition (JSON with the five parameter sets).
    #[arg(long)]
    grid: PathBuf,
    /// FER oracle used to fill the table.
    #[arg(long, value_enum, default_value_t = OracleKind::Synthetic)]
    oracle: OracleKind,
    /// Target FER accuracy; frames per point F = 1 / (kappa * iota).
    #[arg(long, default_value_t = 2e-5)]
    kappa: f64,
    /// Acceptable relative deviation of the FER estimate.
    #[arg(long, default_value_t = 0.01)]
    iota: f64,
    /// Master seed; per-point seeds derive from (seed, point index).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output table CSV path (a .meta.json sidecar is written next to it).
    #[arg(long)]
    out: PathBuf,
    /// Progress file enabling resume after an aborted build.
    #[arg(long)]
    progress: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// RMS Doppler spread of the exponential-profile channel across decay
    /// constants, K factors and LOS Doppler shifts.
    Doppler(DopplerArgs),
    /// Delay-spread error introduced by dynamic-range truncation of the
    /// tap profile.
    Resolution(ResolutionArgs),
}

#[derive(Args)]
struct DopplerArgs {
    /// Decay-constant sweep as start:stop in seconds, e.g. 34e-9:150e-9.
    #[arg(long, default_value = "34e-9:150e-9")]
    tau0_range: String,
    /// Number of sweep points.
    #[arg(long, default_value_t = 25)]
    steps: usize,
    /// Tap count of the exponential profile.
    #[arg(long, default_value_t = 8)]
    taps: usize,
    /// Tap spacing in seconds.
    #[arg(long, default_value_t = 100e-9)]
    dt: f64,
    /// Maximum Doppler shift in Hz.
    #[arg(long, default_value_t = 500.0)]
    fdmax: f64,
    /// LOS Doppler shifts in Hz, comma separated.
    #[arg(long, default_value = "0,250", value_delimiter = ',')]
    flos: Vec<f64>,
    /// K factors in dB, comma separated; "-inf" selects no LOS component.
    #[arg(long, default_value = "0,10,15,20", value_delimiter = ',')]
    k_db: Vec<String>,
    /// Output CSV path, or - for stdout.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ResolutionArgs {
    /// Delay-spread targets: either start:stop in seconds or a comma
    /// separated list.
    #[arg(long, default_value = "20e-9:100e-9")]
    targets: String,
    /// Number of sweep points when targets is a range.
    #[arg(long, default_value_t = 25)]
    steps: usize,
    /// Emulator dynamic range in dB.
    #[arg(long, default_value_t = 40.0)]
    dynamic_range_db: f64,
    /// Tap count of the exponential profile.
    #[arg(long, default_value_t = 8)]
    taps: usize,
    /// Tap spacing in seconds.
    #[arg(long, default_value_t = 100e-9)]
    dt: f64,
    /// Output CSV path, or - for stdout.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ValidateCommand {
    /// Compare the closed-form power delay profile against the brute-force
    /// average over sampled impulse responses on randomized regions.
    PdpFast(PdpFastArgs),
}

#[derive(Args)]
struct PdpFastArgs {
    /// Number of randomized regions.
    #[arg(long, default_value_t = 100)]
    cases: usize,
    /// Seed for the randomized regions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failures that should exit 1 (validation) rather than 2 (configuration).
struct ValidationFailure(String);

enum AppError {
    Config(anyhow::Error),
    Validation(String),
}

impl From<anyhow::Error> for AppError {
    fn from(e: anyhow::Error) -> Self {
        AppError::Config(e)
    }
}

impl From<ValidationFailure> for AppError {
    fn from(e: ValidationFailure) -> Self {
        AppError::Validation(e.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::GenTable(args) => cmd_gen_table(args).map_err(AppError::Config),
        Command::Analyze { what: AnalyzeCommand::Doppler(args) } => {
            cmd_analyze_doppler(args).map_err(AppError::Config)
        }
        Command::Analyze { what: AnalyzeCommand::Resolution(args) } => {
            cmd_analyze_resolution(args).map_err(AppError::Config)
        }
        Command::Validate { what: ValidateCommand::PdpFast(args) } => cmd_validate_pdp_fast(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), AppError> {
    let scenario = Scenario::load(&args.scenario)
        .with_context(|| format!("loading scenario {}", args.scenario.display()))?;
    let table = FerTable::load(&args.table)
        .with_context(|| format!("loading table {}", args.table.display()))?;
    let cfg = RunConfig {
        realizations: args.realizations,
        seed: args.seed,
        measure_walltime: args.realtime_check,
        estimator: EstimatorConfig::default(),
    };
    let (trace, report) =
        run_simulation(&scenario, &table, &cfg).context("running the simulation")?;
    trace
        .save(&args.out)
        .with_context(|| format!("writing trace {}", args.out.display()))?;
    eprintln!(
        "wrote {} region rows to {} ({} realizations, seed {})",
        trace.rows.len(),
        args.out.display(),
        args.realizations,
        args.seed
    );
    if args.realtime_check {
        eprintln!(
            "real-time check: max per-region wall time {:.3} ms against a {:.1} ms budget",
            report.max_wall_s * 1e3,
            report.t_stat_s * 1e3
        );
        if !report.budget_met {
            return Err(ValidationFailure(format!(
                "regions {:?} exceeded the {:.1} ms stationarity-time budget",
                report.over_budget_regions,
                report.t_stat_s * 1e3
            ))
            .into());
        }
    }
    Ok(())
}

/// Grid file schema: the five parameter sets; K entries may be numbers or
/// the string "-inf" (JSON has no infinity literal).
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    sigma_tau_set_s: Vec<f64>,
    f_dmax_set_hz: Vec<f64>,
    k_db_set: Vec<serde_json::Value>,
    f_los_frac_set: Vec<f64>,
    rx_power_set_dbm: Vec<f64>,
}

fn parse_k(v: &serde_json::Value) -> anyhow::Result<f64> {
    match v {
        serde_json::Value::Number(n) => {
            n.as_f64().ok_or_else(|| anyhow!("K value {n} is not representable"))
        }
        serde_json::Value::String(s) => {
            s.trim().parse::<f64>().map_err(|_| anyhow!("K value {s:?} is not a number or -inf"))
        }
        other => Err(anyhow!("K value {other} must be a number or a \"-inf\" string")),
    }
}

fn cmd_gen_table(args: GenTableArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.grid)
        .with_context(|| format!("reading grid {}", args.grid.display()))?;
    let file: GridFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing grid {}", args.grid.display()))?;
    let grid = FerGrid {
        sigma_tau_set_s: file.sigma_tau_set_s,
        f_dmax_set_hz: file.f_dmax_set_hz,
        k_db_set: file.k_db_set.iter().map(parse_k).collect::<anyhow::Result<_>>()?,
        f_los_frac_set: file.f_los_frac_set,
        rx_power_set_dbm: file.rx_power_set_dbm,
    };
    let budget = FrameBudget { kappa: args.kappa, iota: args.iota };
    let frames = budget.frames().context("invalid kappa/iota")?;
    let OracleKind::Synthetic = args.oracle;
    let oracle = SyntheticFerOracle::default();
    eprintln!("building table: {} grid points, {frames} frames per point", {
        let d = grid.dims();
        d.iter().product::<usize>()
    });
    let table = build_table_resumable(&grid, &oracle, &budget, args.seed, args.progress.as_deref())
        .context("building the table")?;
    table.save(&args.out).with_context(|| format!("writing table {}", args.out.display()))?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn parse_range(text: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("expected start:stop, got {text:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn write_out(path: &PathBuf, text: &str) -> anyhow::Result<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

fn cmd_analyze_doppler(args: DopplerArgs) -> anyhow::Result<()> {
    if args.steps == 0 {
        return Err(anyhow!("--steps must be >= 1"));
    }
    let (lo, hi) = parse_range(&args.tau0_range)?;
    let k_values: Vec<f64> = args
        .k_db
        .iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("bad K value {s:?}")))
        .collect::<anyhow::Result<_>>()?;
    let mut csv = String::from("tau0_s,sigma_tau_s,f_dmax_hz,k_db,f_los_hz,sigma_nu_hz\n");
    for tau0 in linspace(lo, hi, args.steps) {
        let pdp = ExpPdpConfig { tau0_s: tau0, dt_s: args.dt, n_taps: args.taps };
        let sigma_tau = closed_form_exp_delay_spread(&pdp)?;
        let taps = exp_pdp(&pdp)?;
        for &k_db in &k_values {
            let k_lin = if k_db.is_finite() { 10f64.powf(k_db / 10.0) } else { 0.0 };
            for &f_los in &args.flos {
                let env = DopplerEnv::new(args.fdmax, f_los, k_lin, taps.clone())?;
                let sigma_nu = analytic_rms_doppler(&env)?;
                csv.push_str(&format!(
                    "{tau0:.8e},{sigma_tau:.8e},{:.8e},{k_db},{f_los},{sigma_nu:.8e}\n",
                    args.fdmax
                ));
            }
        }
    }
    write_out(&args.out, &csv)
}

fn cmd_analyze_resolution(args: ResolutionArgs) -> anyhow::Result<()> {
    let targets: Vec<f64> = if args.targets.contains(':') {
        if args.steps == 0 {
            return Err(anyhow!("--steps must be >= 1"));
        }
        let (lo, hi) = parse_range(&args.targets)?;
        linspace(lo, hi, args.steps)
    } else {
        args.targets
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("bad target {s:?}")))
            .collect::<anyhow::Result<_>>()?
    };
    let mut csv = String::from(
        "target_sigma_tau_s,dynamic_range_db,n_taps_used,achieved_sigma_tau_s,abs_error_s\n",
    );
    for target in targets {
        let r = resolution_analysis(target, args.dynamic_range_db, args.dt, args.taps)?;
        csv.push_str(&format!(
            "{:.8e},{},{},{:.8e},{:.8e}\n",
            r.target_sigma_tau_s,
            r.dynamic_range_db,
            r.n_taps_used,
            r.achieved_sigma_tau_s,
            r.abs_error_s
        ));
    }
    write_out(&args.out, &csv)
}

fn cmd_validate_pdp_fast(args: PdpFastArgs) -> Result<(), AppError> {
    if args.cases == 0 {
        return Err(AppError::Config(anyhow!("--cases must be >= 1")));
    }
    let mut rng = keyed_rng(args.seed, &[0x76616c]);
    let mut worst: f64 = 0.0;
    for case in 0..args.cases {
        let l: usize = rng.random_range(1..=20);
        let m: usize = rng.random_range(8..=256);
        let cfg = SamplingConfig {
            t_s: 1e-4,
            t_c: 100e-9,
            n_delay_bins: 16,
            m_samples: m,
            t_stat: m as f64 * 1e-4,
            rolloff: 0.9,
            carrier_hz: 5.9e9,
            bandwidth_hz: 10e6,
        };
        let nyq = cfg.doppler_nyquist_hz();
        let paths: Vec<PropagationPath> = (0..l)
            .map(|_| {
                PropagationPath::new(
                    rng.random_range(0.05..1.0),
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..7.0 * cfg.t_c),
                    rng.random_range(-0.9 * nyq..0.9 * nyq),
                    PathKind::Diffuse,
                )
                .expect("finite random path")
            })
            .collect();
        let region = StationarityRegion::new(case as u32, paths, cfg.t_stat)
            .map_err(|e| AppError::Config(anyhow!(e)))?;
        let cir = slsim_core::channel::sample_cir(&region, &cfg)
            .map_err(|e| AppError::Config(anyhow!(e)))?;
        let brute = pdp_brute(&cir);
        let fast = pdp_fast(&region, &cfg).map_err(|e| AppError::Config(anyhow!(e)))?;
        let total = brute.total_power().max(1e-300);
        for (bin, (a, b)) in fast.values.iter().zip(&brute.values).enumerate() {
            let dev = (a - b).abs() / total;
            worst = worst.max(dev);
            if dev > 1e-10 {
                return Err(ValidationFailure(format!(
                    "case {case} (L={l}, M={m}) bin {bin}: relative deviation {dev:.3e} exceeds 1e-10"
                ))
                .into());
            }
        }
    }
    println!(
        "pdp-fast: {} randomized regions matched the brute-force profile; worst relative deviation {worst:.3e}",
        args.cases
    );
    Ok(())
}

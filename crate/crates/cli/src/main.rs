use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use repdec::config::{CliError, ExperimentConfig, NoiseModel, RuleName, experiment_id};
use repdec::harness::{run_code_capacity_point, run_point, PointSpec, TrialsPolicy};
use repdec::records::{
    CodeCapacityRecord, Header, JsonlWriter, PointRecord, TraceFile, write_fit_table,
    write_survival_table,
};
use repdec::render::{render_ppm, render_svg, render_text, Format};
use repdec::verify::{parse_suites, run_suite, CampaignOptions};
use repdec_core::analysis::{
    fit_ansatz, fit_two_noise, mwpm_gamma, required_qubits, FitPoint, FitResult, TwoNoisePoint,
};
use repdec_core::lattice::{DecoderState, DefectSet};
use repdec_core::montecarlo::stack_survival;
use repdec_core::noise::trajectory_rng;
use repdec_core::signal::asr_run;

/// Simulation harness for local decoders of the 1D repetition code.
#[derive(Parser)]
#[command(name = "repdec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one parameter point (or one recorded trace) and write records.
    Simulate(RunArgs),
    /// Run a cartesian sweep over sizes and error rates.
    Sweep(RunArgs),
    /// Draw a recorded space-time trace as text, PPM, or SVG.
    Render(RenderArgs),
    /// Run randomized verification campaigns against the proof-derived
    /// checkers; exits nonzero on any violation.
    Verify(VerifyArgs),
}

/// Flags shared by `simulate` and `sweep`; every flag has a config-file key
/// of the same name, with flags taking precedence.
#[derive(Args)]
struct RunArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Decoder rule: asr, ssr, shearing, toom.
    #[arg(long)]
    rule: Option<String>,
    /// Noise model: phenomenological (default) or code-capacity.
    #[arg(long)]
    model: Option<String>,
    /// Qubit counts, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Grid sides (Toom), comma separated.
    #[arg(long)]
    side: Option<String>,
    /// Symmetric error rates eps_d = eps_m, comma separated.
    #[arg(long)]
    eps: Option<String>,
    /// Data error rates, comma separated.
    #[arg(long = "eps-d")]
    eps_d: Option<String>,
    /// Measurement error rates, comma separated.
    #[arg(long = "eps-m")]
    eps_m: Option<String>,
    /// Steps per trajectory.
    #[arg(long)]
    tau: Option<String>,
    /// Fixed trajectory count (otherwise adaptive).
    #[arg(long)]
    trials: Option<String>,
    /// Adaptive stopping: flip events to collect per point.
    #[arg(long = "budget-flips")]
    budget_flips: Option<String>,
    /// Adaptive stopping: trajectory cap per point.
    #[arg(long = "max-trials")]
    max_trials: Option<String>,
    /// Base random seed; recorded in every output.
    #[arg(long)]
    seed: Option<String>,
    /// Anti-signal speed.
    #[arg(long)]
    ka: Option<String>,
    /// Backward-signal speed.
    #[arg(long)]
    kb: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<String>,
    /// Toom orientation-switch factor c in ceil(c log2 side).
    #[arg(long = "toom-c")]
    toom_c: Option<String>,
    /// Toom boundary policy: agree or periodic.
    #[arg(long = "toom-boundary")]
    toom_boundary: Option<String>,
    /// Shearing lattice periodicity.
    #[arg(long = "shearing-periodic")]
    shearing_periodic: Option<String>,
    /// First shearing diagonal: left or right.
    #[arg(long = "first-diagonal")]
    first_diagonal: Option<String>,
    /// Record every k-th step into the trace (0 = no trace).
    #[arg(long = "snapshot-every")]
    snapshot_every: Option<String>,
    /// Initial defect sites for a deterministic erasure run.
    #[arg(long)]
    defects: Option<String>,
    /// Stack soft cap (diagnostic abort level).
    #[arg(long = "soft-cap")]
    soft_cap: Option<String>,
    /// Output path: JSONL file (simulate) or directory (sweep).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace output path (JSON).
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
    /// Previous fit.json supplying the per-size exponents for a two-noise
    /// sweep fit.
    #[arg(long = "gamma-from")]
    gamma_from: Option<PathBuf>,
}

impl RunArgs {
    fn build_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        let overrides: [(&str, &Option<String>); 21] = [
            ("rule", &self.rule),
            ("model", &self.model),
            ("n", &self.n),
            ("side", &self.side),
            ("eps", &self.eps),
            ("eps-d", &self.eps_d),
            ("eps-m", &self.eps_m),
            ("tau", &self.tau),
            ("trials", &self.trials),
            ("budget-flips", &self.budget_flips),
            ("max-trials", &self.max_trials),
            ("seed", &self.seed),
            ("ka", &self.ka),
            ("kb", &self.kb),
            ("workers", &self.workers),
            ("toom-c", &self.toom_c),
            ("toom-boundary", &self.toom_boundary),
            ("shearing-periodic", &self.shearing_periodic),
            ("first-diagonal", &self.first_diagonal),
            ("snapshot-every", &self.snapshot_every),
            ("soft-cap", &self.soft_cap),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(v) = &self.defects {
            cfg.set("defects", v)?;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RenderArgs {
    /// Trace file written by simulate.
    #[arg(long)]
    trace: PathBuf,
    /// Output format: text, ppm, svg.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output file (text defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated suites (erasure, charge, frontier, chunks, oracle)
    /// or "all".
    #[arg(long, default_value = "all")]
    suite: String,
    /// Randomized cases per suite.
    #[arg(long, default_value_t = 1000)]
    cases: u64,
    /// Largest defect-pattern width.
    #[arg(long = "max-delta", default_value_t = 50)]
    max_delta: i64,
    /// Largest number of defect pairs.
    #[arg(long = "max-pairs", default_value_t = 4)]
    max_pairs: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// JSON report output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Render(args) => cmd_render(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    if let Err(e) = result {
        eprintln!("repdec: {e}");
        std::process::exit(e.exit_code());
    }
}

/// Print to stdout, treating a closed pipe as success.
fn write_stdout(text: &str) -> Result<(), CliError> {
    use std::io::ErrorKind;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    })
}

fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.build_config()?;
    if !cfg.defects.is_empty() {
        return simulate_erasure(&cfg, args);
    }

    let sizes = cfg.sizes()?;
    let noises = cfg.noise_points()?;
    if sizes.len() != 1 || noises.len() != 1 {
        return Err(CliError::Config(
            "simulate runs a single point; use sweep for lists".into(),
        ));
    }
    let size = sizes[0];
    let noise = noises[0];
    let header = Header::new(&cfg);
    let mut writer = JsonlWriter::new(open_out(&args.out)?, &header)?;

    match cfg.model {
        NoiseModel::CodeCapacity => {
            if !matches!(cfg.rule, RuleName::Asr | RuleName::Ssr) {
                return Err(CliError::Config(
                    "code-capacity mode is defined for the signal rules".into(),
                ));
            }
            let params = cfg.signal_params()?;
            let experiment = experiment_id(cfg.rule, size, &noise, cfg.tau);
            let point = run_code_capacity_point(
                &params,
                size,
                noise.eps_d,
                Some(cfg.tau).filter(|&t| t != ExperimentConfig::default().tau),
                cfg.seed,
                experiment,
                cfg.trials.unwrap_or(100_000),
                cfg.worker_count(),
            )?;
            writer.write(&CodeCapacityRecord {
                rule: cfg.rule.to_string(),
                n: size,
                eps: noise.eps_d,
                tau: cfg.tau,
                trials: point.trials,
                failures: point.estimate.failures,
                p_fail: point.estimate.p,
                ci_low: point.estimate.ci_low,
                ci_high: point.estimate.ci_high,
                max_stack: point.max_stack,
                experiment,
            })?;
            eprintln!("code-capacity point finished in {} ms", point.elapsed_ms);
        }
        NoiseModel::Phenomenological => {
            let decoder = cfg.decoder(size)?;
            let experiment = experiment_id(cfg.rule, size, &noise, cfg.tau);
            let spec = PointSpec { decoder, noise, tau: cfg.tau, experiment };
            let policy = match cfg.trials {
                Some(t) => TrialsPolicy::Fixed(t),
                None => TrialsPolicy::Adaptive {
                    flip_budget: cfg.budget_flips,
                    max_trials: cfg.max_trials,
                },
            };
            let summary = run_point(&spec, cfg.seed, policy, cfg.worker_count(), true)?;
            let record = PointRecord::from_summary(
                &cfg.rule.to_string(),
                decoder_qubits(&cfg, size),
                noise.eps_d,
                noise.eps_m,
                experiment,
                &summary,
            );
            writer.write(&record)?;
            if let Some(dir) = &args.out {
                if let Some(parent) = dir.parent() {
                    let survival = stack_survival(&summary.acc);
                    if !survival.is_empty() && parent.is_dir() {
                        // Side table next to the record file.
                        let p = dir.with_extension("survival.csv");
                        write_survival_table(&p, &survival)?;
                    }
                }
            }
            if let Some(trace_path) = &args.trace_out {
                let stride = cfg.snapshot_every.max(1);
                let trace = record_phenomenological_trace(&cfg, size, stride)?;
                trace.save(trace_path)?;
            }
        }
    }
    writer.finish()
}

fn decoder_qubits(cfg: &ExperimentConfig, size: usize) -> usize {
    match cfg.rule {
        RuleName::Toom => size * size,
        _ => size,
    }
}

/// Deterministic erasure run from explicit defects, recorded as a trace.
fn simulate_erasure(cfg: &ExperimentConfig, args: &RunArgs) -> Result<(), CliError> {
    if !matches!(cfg.rule, RuleName::Asr | RuleName::Ssr) {
        return Err(CliError::Config("defect seeding needs a signal rule".into()));
    }
    let params = cfg.signal_params()?;
    let sigma = DefectSet::new(cfg.defects.clone());
    let mut state = DecoderState::erasure_window(&sigma, params.direction_count())?;
    state.set_soft_cap(cfg.soft_cap);
    let width = sigma.width().max(1) as u32;
    let t_max = if cfg.tau != ExperimentConfig::default().tau { cfg.tau } else { 77 * width };
    let stride = cfg.snapshot_every.max(1);
    let trace = asr_run(state, &params, t_max, stride)?;
    let last = trace.states.last().expect("nonempty trace");
    println!(
        "erasure run: width={width} steps={t_max} quiescent={} support={:?}",
        last.is_quiescent(),
        last.support_global()
    );
    let file = TraceFile::Signal { header: Header::new(cfg), trace };
    match &args.trace_out {
        Some(p) => file.save(p)?,
        None => {
            if let Some(p) = &args.out {
                file.save(p)?;
            } else {
                return Err(CliError::Config("give --trace-out (or --out) for the trace".into()));
            }
        }
    }
    Ok(())
}

/// One snapshotted phenomenological trajectory (trajectory index 0).
fn record_phenomenological_trace(
    cfg: &ExperimentConfig,
    size: usize,
    stride: u32,
) -> Result<TraceFile, CliError> {
    use repdec_core::cellular::{orientation_schedule, switch_interval, SquareGrid, TwoRowLattice};
    use repdec_core::lattice::Topology;
    use repdec_core::noise::{flip_bits, noisy_syndrome};
    use repdec_core::signal::Trace;

    let noise = cfg.noise_points()?[0];
    let experiment = experiment_id(cfg.rule, size, &noise, cfg.tau);
    let mut rng = trajectory_rng(cfg.seed, experiment, 0);
    let header = Header::new(cfg);
    match cfg.rule {
        RuleName::Asr | RuleName::Ssr => {
            let params = cfg.signal_params()?;
            let top = Topology::Ring { n: size };
            let mut state = params.state(top);
            state.set_soft_cap(cfg.soft_cap);
            let mut states = vec![state.clone()];
            for t in 1..=cfg.tau {
                flip_bits(state.data_mut(), noise.eps_d, &mut rng);
                let synd = noisy_syndrome(state.data(), &top, noise.eps_m, &mut rng);
                let mask = state.step(&params, Some(&synd))?;
                state.apply_correction(&mask);
                if t % stride == 0 || t == cfg.tau {
                    states.push(state.clone());
                }
            }
            Ok(TraceFile::Signal { header, trace: Trace { params, stride, states } })
        }
        RuleName::Shearing => {
            let params = cfg.shearing_params()?;
            let mut lat = TwoRowLattice::new(size, params)?;
            let mut rows = vec![flatten_two_row(&lat)];
            for t in 1..=cfg.tau {
                lat.cycle(Some((&noise, &mut rng)));
                if t % stride == 0 || t == cfg.tau {
                    rows.push(flatten_two_row(&lat));
                }
            }
            Ok(TraceFile::Bits { header, columns: size, rows })
        }
        RuleName::Toom => {
            let params = cfg.toom_params()?;
            let mut grid = SquareGrid::new(size, params)?;
            let k_switch = switch_interval(size, params.schedule_factor);
            let mut rows = vec![flatten_grid(&grid)];
            for t in 1..=cfg.tau {
                let orientation = orientation_schedule(t - 1, k_switch);
                grid.toom_step(orientation, Some((&noise, &mut rng)));
                if t % stride == 0 || t == cfg.tau {
                    rows.push(flatten_grid(&grid));
                }
            }
            Ok(TraceFile::Bits { header, columns: size * size, rows })
        }
    }
}

fn flatten_two_row(lat: &repdec_core::cellular::TwoRowLattice) -> repdec_core::lattice::BitPlane {
    let mut out = repdec_core::lattice::BitPlane::zeros(lat.qubits());
    for c in 0..lat.half_n() {
        for r in 0..2 {
            if lat.get(r, c) {
                out.set(2 * c + r, true);
            }
        }
    }
    out
}

fn flatten_grid(grid: &repdec_core::cellular::SquareGrid) -> repdec_core::lattice::BitPlane {
    let side = grid.side();
    let mut out = repdec_core::lattice::BitPlane::zeros(side * side);
    for r in 0..side {
        for c in 0..side {
            if grid.get(r, c) {
                out.set(r * side + c, true);
            }
        }
    }
    out
}

fn cmd_sweep(args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.build_config()?;
    let out_dir = args
        .out
        .clone()
        .ok_or_else(|| CliError::Config("sweep needs --out DIRECTORY".into()))?;
    std::fs::create_dir_all(&out_dir)?;
    let sizes = cfg.sizes()?;
    let noises = cfg.noise_points()?;

    let header = Header::new(&cfg);
    let records_path = out_dir.join("records.jsonl");
    let mut writer = JsonlWriter::new(std::fs::File::create(&records_path)?, &header)?;
    let policy = match cfg.trials {
        Some(t) => TrialsPolicy::Fixed(t),
        None => TrialsPolicy::Adaptive { flip_budget: cfg.budget_flips, max_trials: cfg.max_trials },
    };

    let mut records = Vec::new();
    for &size in &sizes {
        for &noise in &noises {
            let decoder = cfg.decoder(size)?;
            let experiment = experiment_id(cfg.rule, size, &noise, cfg.tau);
            let spec = PointSpec { decoder, noise, tau: cfg.tau, experiment };
            let summary = run_point(&spec, cfg.seed, policy, cfg.worker_count(), true)?;
            let record = PointRecord::from_summary(
                &cfg.rule.to_string(),
                decoder_qubits(&cfg, size),
                noise.eps_d,
                noise.eps_m,
                experiment,
                &summary,
            );
            eprintln!(
                "point rule={} n={} eps_d={} eps_m={}: trials={} flips={} eps_l={:.3e} [{:.3e}, {:.3e}]{} ({} ms)",
                record.rule,
                record.n,
                record.eps_d,
                record.eps_m,
                record.trials,
                record.flips,
                record.eps_l,
                record.ci_low,
                record.ci_high,
                if record.censored { " (censored)" } else { "" },
                summary.elapsed_ms,
            );
            writer.write(&record)?;
            records.push(record);
        }
    }
    writer.finish()?;
    write_fit_table(&out_dir.join("points.csv"), &records)?;

    // Ansatz fit over the symmetric-noise, uncensored points.
    let fit_points: Vec<FitPoint> = records
        .iter()
        .filter(|r| r.eps_d == r.eps_m && !r.censored && r.eps_l > 0.0)
        .map(|r| {
            let est = repdec_core::montecarlo::LogicalRateEstimate {
                eps_l: r.eps_l,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                tau: r.tau,
                n_traj: r.trials,
                censored: r.censored,
            };
            FitPoint::from_estimate(r.n, r.eps_d, &est)
        })
        .collect();
    match fit_ansatz(&fit_points) {
        Ok(fit) => {
            println!("ansatz fit: A={:.4e} 1/B={:.4}%", fit.amplitude, 100.0 * fit.threshold_estimate());
            for (n, g) in &fit.gamma {
                println!("  gamma_{n} = {g:.3}  (matching reference {:.1})", mwpm_gamma(*n));
            }
            let plans = qubit_plans(&fit, &cfg);
            let json = serde_json::to_string_pretty(&serde_json::json!({
                "fit": fit,
                "plans": plans,
            }))?;
            std::fs::write(out_dir.join("fit.json"), json)?;
        }
        Err(e) => eprintln!("ansatz fit skipped: {e}"),
    }

    // Two-noise ansatz over an (eps_d, eps_m) grid, with exponents taken
    // from an earlier symmetric fit.
    if let Some(gamma_path) = &args.gamma_from {
        let text = std::fs::read_to_string(gamma_path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let fit: FitResult = serde_json::from_value(
            value.get("fit").cloned().unwrap_or(value),
        )?;
        let tn_points: Vec<TwoNoisePoint> = records
            .iter()
            .map(|r| TwoNoisePoint {
                n: r.n,
                eps_d: r.eps_d,
                eps_m: r.eps_m,
                eps_l: r.eps_l,
                sigma_ln: if r.censored || r.ci_low <= 0.0 {
                    1.0
                } else {
                    ((r.ci_high.ln() - r.ci_low.ln()) / (2.0 * 1.96)).max(1e-3)
                },
                censored: r.censored,
            })
            .collect();
        match fit_two_noise(&tn_points, &fit.gamma) {
            Ok(tn) => {
                println!(
                    "two-noise fit: measurement weight m = {:.3}, residual {:.3}",
                    tn.meas_weight, tn.residual_rms
                );
                std::fs::write(out_dir.join("two_noise.json"), serde_json::to_string_pretty(&tn)?)?;
            }
            Err(e) => eprintln!("two-noise fit skipped: {e}"),
        }
    }
    Ok(())
}

/// Size plans for a few reference targets at each swept symmetric rate.
fn qubit_plans(fit: &FitResult, cfg: &ExperimentConfig) -> Vec<serde_json::Value> {
    let mut out = Vec::new();
    for &eps in &cfg.eps {
        for target in [1e-6, 1e-8, 1e-10] {
            match required_qubits(target, eps, fit, 100_000) {
                Ok(plan) => out.push(serde_json::json!({
                    "eps": eps,
                    "target_eps_l": target,
                    "n": plan.n,
                    "predicted_eps_l": plan.predicted_eps_l,
                    "extrapolated": plan.extrapolated,
                })),
                Err(e) => out.push(serde_json::json!({
                    "eps": eps,
                    "target_eps_l": target,
                    "error": e.to_string(),
                })),
            }
        }
    }
    out
}

fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    let format: Format = args
        .format
        .parse()
        .map_err(CliError::Config)?;
    let file = TraceFile::load(&args.trace)?;
    match format {
        Format::Text => {
            let text = render_text(&file)?;
            match &args.out {
                Some(p) => std::fs::write(p, text)?,
                None => write_stdout(&text)?,
            }
        }
        Format::Ppm => {
            let bytes = render_ppm(&file)?;
            let p = args
                .out
                .as_ref()
                .ok_or_else(|| CliError::Config("ppm output needs --out".into()))?;
            std::fs::write(p, bytes)?;
        }
        Format::Svg => {
            let svg = render_svg(&file)?;
            match &args.out {
                Some(p) => std::fs::write(p, svg)?,
                None => write_stdout(&svg)?,
            }
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let suites = parse_suites(&args.suite)?;
    let opts = CampaignOptions {
        cases: args.cases,
        max_pairs: args.max_pairs,
        max_delta: args.max_delta,
        seed: args.seed,
        workers: args.workers,
    };
    let mut reports = Vec::new();
    let mut all_passed = true;
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        println!(
            "suite={} cases={} violations={} {} ({} ms)",
            report.suite,
            report.cases,
            report.violations.len(),
            if report.passed { "PASS" } else { "FAIL" },
            report.elapsed_ms
        );
        for v in report.violations.iter().take(10) {
            println!("  {} case={} {}", v.check, v.case, v.detail);
        }
        all_passed &= report.passed;
        reports.push(report);
    }
    if let Some(p) = &args.out {
        std::fs::write(p, serde_json::to_string_pretty(&reports)?)?;
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Verify("one or more suites reported violations".into()))
    }
}

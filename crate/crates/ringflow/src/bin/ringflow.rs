//! Command-line front end: loads a JSON run configuration, applies flag
//! overrides, runs the requested computation and writes CSV/JSON (and
//! optionally SVG) artefacts.  Reruns with identical inputs reproduce
//! identical bytes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ringflow::bath::sample_modes;
use ringflow::config::{Engine, RunConfig, SweepConfig, SweepParameter};
use ringflow::engine::{resolve, run_compare, run_flow, run_sweep, FlowOutput};
use ringflow::propagator::Frame;
use ringflow::report::{self, Provenance};
use ringflow::svg::{line_chart, Trace};
use ringflow::{Error, Result};

/// Environment variable overriding the configured output directory;
/// the `--out` flag beats both.
const OUT_ENV: &str = "RINGFLOW_OUT";

#[derive(Parser)]
#[command(
    name = "ringflow",
    version,
    about = "Dissipative dynamics of a chiral spin ring in a magnonic bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; built-in defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the bath sampling seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the dynamical engine
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    /// Output directory; beats the RINGFLOW_OUT variable and the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// Also render SVG charts
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print and write the ring's one-excitation spectrum
    Spectrum(CommonArgs),
    /// Sample the bath modes and write them out
    SampleBath(CommonArgs),
    /// One exact trajectory with norm and population bookkeeping
    Evolve(CommonArgs),
    /// Trace-distance flow of the configured state pair
    Flow(CommonArgs),
    /// Three-site analytic flow with pole diagnostics
    Analytic3(CommonArgs),
    /// Flow metrics across a swept parameter
    Sweep(CommonArgs),
    /// Run two engines on one configuration and report deviations
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Exactly two engines, comma separated
        #[arg(long, value_enum, value_delimiter = ',')]
        engines: Vec<Engine>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Spectrum(args) => cmd_spectrum(&args),
        Command::SampleBath(args) => cmd_sample_bath(&args),
        Command::Evolve(args) => cmd_evolve(&args),
        Command::Flow(args) => cmd_flow(&args, None),
        Command::Analytic3(args) => cmd_flow(&args, Some(Engine::Analytic3)),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Compare { common, engines } => cmd_compare(&common, &engines),
    }
}

/// Loads the run configuration and applies the flag overrides.
fn load_run(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &args.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut cfg, args);
    Ok(cfg)
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))
}

fn apply_overrides(cfg: &mut RunConfig, args: &CommonArgs) {
    if let Some(seed) = args.seed {
        cfg.bath.seed = seed;
    }
    if let Some(engine) = args.engine {
        cfg.engine = engine;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    } else if let Some(dir) = std::env::var_os(OUT_ENV) {
        cfg.output.dir = PathBuf::from(dir);
    }
    if args.svg {
        cfg.output.svg = true;
    }
}

struct OutPaths {
    dir: PathBuf,
    base: String,
}

impl OutPaths {
    fn new(cfg: &RunConfig) -> Self {
        OutPaths {
            dir: cfg.output.dir.clone(),
            base: cfg.output.basename.clone(),
        }
    }

    fn named(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn suffixed(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.base))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    report::write_text(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_spectrum(args: &CommonArgs) -> Result<ExitCode> {
    let cfg = load_run(args)?;
    cfg.chain.validate()?;
    let spectrum = cfg.chain.spectrum(cfg.convention)?;
    println!(
        "n = {}, ground energy = {}, mean frequency = {}",
        spectrum.n(),
        spectrum.ground_energy,
        spectrum.mean_frequency()
    );
    let paths = OutPaths::new(&cfg);
    write(&paths.named("spectrum.json"), &report::spectrum_json(&cfg.chain, &spectrum)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample_bath(args: &CommonArgs) -> Result<ExitCode> {
    let cfg = load_run(args)?;
    cfg.chain.validate()?;
    cfg.bath.validate()?;
    let spectrum = cfg.chain.spectrum(cfg.convention)?;
    let bath = cfg.bath.resolve(spectrum.mean_frequency());
    let modes = sample_modes(&bath)?;
    println!(
        "k_max = {}, omega_c = {}, coupling weight = {:e} (windowed target {:e})",
        modes.k_max(),
        bath.omega_c,
        modes.coupling_weight(),
        bath.windowed_weight()
    );
    let paths = OutPaths::new(&cfg);
    write(&paths.named("bath.json"), &report::bath_json(&bath, &modes)?)?;
    Ok(ExitCode::SUCCESS)
}

/// Exact single-trajectory run for the first state of the pair; norm
/// bookkeeping only makes sense for the full propagator, so the engine
/// setting is ignored here.
fn cmd_evolve(args: &CommonArgs) -> Result<ExitCode> {
    let cfg = load_run(args)?;
    let run = resolve(&cfg)?;
    let modes = sample_modes(&run.bath)?;
    let (first, _) = &run.initial_pair;
    let init = ringflow::propagator::AmplitudeState::new(
        first.c0,
        first.c.clone(),
        modes.k_max(),
        Frame::Lab,
    );
    let states = ringflow::propagator::evolve(&init, &run.config.evolve, &run.spectrum, &modes)?;
    let worst = states.iter().map(|s| s.norm_defect()).fold(0.0f64, f64::max);
    println!("samples = {}, worst norm defect = {:e}", states.len(), worst);

    let paths = OutPaths::new(&cfg);
    write(&paths.suffixed(".evolve.csv"), &report::evolve_csv(&states))?;
    if cfg.output.svg {
        let t: Vec<f64> = states.iter().map(|s| s.t).collect();
        let ground: Vec<f64> = states.iter().map(|s| s.c0.norm_sqr()).collect();
        let ring: Vec<f64> = states
            .iter()
            .map(|s| s.c.iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let bath_pop: Vec<f64> = states.iter().map(|s| s.bath_population()).collect();
        let chart = line_chart(
            "population split",
            &t,
            &[
                Trace { label: "ground", y: &ground },
                Trace { label: "ring", y: &ring },
                Trace { label: "bath", y: &bath_pop },
            ],
        )?;
        write(&paths.suffixed(".evolve.svg"), &chart)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_flow(args: &CommonArgs, force_engine: Option<Engine>) -> Result<ExitCode> {
    let mut cfg = load_run(args)?;
    if let Some(engine) = force_engine {
        cfg.engine = engine;
    }
    let out = run_flow(&cfg)?;
    println!(
        "n_switch = {}, a_mod = {:e}, positive fraction = {}",
        out.segments.n_switch, out.segments.a_mod, out.segments.positive_fraction
    );
    write_flow_artefacts(&cfg, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn write_flow_artefacts(cfg: &RunConfig, out: &FlowOutput) -> Result<()> {
    let paths = OutPaths::new(cfg);
    let prov = Provenance::from_run(&out.resolved);
    write(&paths.suffixed(".csv"), &report::flow_csv(&out.series, &out.segments))?;
    write(&paths.suffixed(".segments.json"), &report::segments_json(&prov, &out.segments)?)?;
    if let Some(poles) = report::poles_json(&prov, out)? {
        write(&paths.suffixed(".poles.json"), &poles)?;
    }
    if cfg.output.svg {
        let chart = line_chart(
            "trace distance and flow",
            &out.series.times,
            &[
                Trace { label: "D", y: &out.series.d },
                Trace { label: "R", y: &out.series.r },
            ],
        )?;
        write(&paths.suffixed(".svg"), &chart)?;
    }
    Ok(())
}

fn cmd_sweep(args: &CommonArgs) -> Result<ExitCode> {
    let path = args.config.as_ref().ok_or_else(|| {
        Error::config("config", "sweep needs a configuration file with a sweep table")
    })?;
    let mut cfg: SweepConfig = parse_config(path)?;
    apply_overrides(&mut cfg.run, args);
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    let out = run_sweep(&cfg, workers)?;

    let name = match cfg.sweep.parameter {
        SweepParameter::B => "b",
        SweepParameter::D => "d",
        SweepParameter::Lambda => "lambda",
        SweepParameter::Gamma0 => "gamma0",
    };
    for row in &out.rows {
        match &row.metrics {
            Some(m) => println!(
                "{name} = {}: n_switch = {}, a_mod = {:e}, positive fraction = {}",
                row.value, m.n_switch, m.a_mod, m.positive_fraction
            ),
            None => println!("{name} = {}: {}", row.value, row.status),
        }
    }

    let paths = OutPaths::new(&cfg.run);
    write(&paths.suffixed(".sweep.csv"), &report::sweep_csv(&out.rows))?;
    write(&paths.suffixed(".sweep.json"), &report::sweep_json(&cfg, &out.rows)?)?;
    if cfg.run.output.svg {
        let ok: Vec<_> = out.rows.iter().filter(|r| r.metrics.is_some()).collect();
        if !ok.is_empty() {
            let values: Vec<f64> = ok.iter().map(|r| r.value).collect();
            let a_mod: Vec<f64> = ok.iter().map(|r| r.metrics.unwrap().a_mod).collect();
            let switches: Vec<f64> =
                ok.iter().map(|r| r.metrics.unwrap().n_switch as f64).collect();
            let amp = line_chart("modulation amplitude", &values, &[Trace { label: "a_mod", y: &a_mod }])?;
            write(&paths.suffixed(".sweep.a_mod.svg"), &amp)?;
            let sw = line_chart("sign changes", &values, &[Trace { label: "n_switch", y: &switches }])?;
            write(&paths.suffixed(".sweep.n_switch.svg"), &sw)?;
        }
    }

    if out.all_failed() {
        eprintln!("error: every sweep point failed");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: &CommonArgs, engines: &[Engine]) -> Result<ExitCode> {
    if engines.len() != 2 {
        return Err(Error::config(
            "engines",
            format!("need exactly two engines, got {}", engines.len()),
        ));
    }
    let cfg = load_run(args)?;
    let cmp = run_compare(&cfg, engines[0], engines[1])?;
    println!(
        "max |dD| = {:e}, max |dR| = {:e}",
        cmp.max_abs_distance_diff, cmp.max_abs_flow_diff
    );
    let paths = OutPaths::new(&cfg);
    write(&paths.suffixed(".compare.json"), &report::compare_json(&cmp)?)?;
    Ok(ExitCode::SUCCESS)
}

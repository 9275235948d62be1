//! Turns validated configurations into trace-distance flow results:
//! single runs, parameter sweeps and engine comparisons.
//!
//! All engines produce the same artefact, a distance series `D(t)` for the
//! two configured initial states on the evolve grid, from which the flow
//! series and its segmentation follow.  Sweep points are independent and
//! may run on several worker threads; results are returned in spec order
//! regardless of completion order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::bath::{sample_modes, BathModes, BathParams};
use crate::config::{Engine, RunConfig, StateSpec, SweepConfig};
use crate::kernel::{self, KernelParams, RationalSolution};
use crate::model::SystemSpectrum;
use crate::observables::{
    reduced_density, reduced_density_from_amplitudes, trace_distance, FlowSegments, FlowSeries,
    ReducedDensityMatrix,
};
use crate::propagator::{evolve, AmplitudeState, Frame};
use crate::{Error, Result, C64};

/// Concrete ingredients of one run after defaults and derived quantities
/// are pinned: spectrum, bath centre, normalized initial pair.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub spectrum: SystemSpectrum,
    pub bath: BathParams,
    pub initial_pair: (StateSpec, StateSpec),
}

pub fn resolve(config: &RunConfig) -> Result<ResolvedRun> {
    config.validate()?;
    let spectrum = config.chain.spectrum(config.convention)?;
    let bath = config.bath.resolve(spectrum.mean_frequency());
    bath.validate()?;
    Ok(ResolvedRun {
        config: config.clone(),
        spectrum,
        bath,
        initial_pair: config.resolved_pair(),
    })
}

/// Result of one flow run.
#[derive(Debug, Clone)]
pub struct FlowOutput {
    pub resolved: ResolvedRun,
    pub series: FlowSeries,
    pub segments: FlowSegments,
    /// Pole expansions of the two trajectories, analytic engine only.
    pub poles: Option<(RationalSolution, RationalSolution)>,
}

/// Headline numbers of a segmentation, one sweep-table row's worth.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowMetrics {
    pub n_switch: usize,
    pub a_mod: f64,
    pub positive_fraction: f64,
    pub degenerate: bool,
}

impl From<&FlowSegments> for FlowMetrics {
    fn from(seg: &FlowSegments) -> Self {
        FlowMetrics {
            n_switch: seg.n_switch,
            a_mod: seg.a_mod,
            positive_fraction: seg.positive_fraction,
            degenerate: seg.degenerate,
        }
    }
}

/// Runs the configured engine and segments the resulting flow.
pub fn run_flow(config: &RunConfig) -> Result<FlowOutput> {
    let resolved = resolve(config)?;
    let times = resolved.config.evolve.sample_times();
    let (d, poles) = distance_series(&resolved, &times)?;
    let series = FlowSeries::from_distance(times, d, resolved.config.deadband)?;
    let segments = series.segments()?;
    Ok(FlowOutput {
        resolved,
        series,
        segments,
        poles,
    })
}

type PolePair = Option<(RationalSolution, RationalSolution)>;

fn distance_series(run: &ResolvedRun, times: &[f64]) -> Result<(Vec<f64>, PolePair)> {
    let (first, second) = &run.initial_pair;
    match run.config.engine {
        Engine::FullPropagator => {
            let modes = sample_modes(&run.bath)?;
            let sa = propagate(run, &modes, first)?;
            let sb = propagate(run, &modes, second)?;
            let d = sa
                .iter()
                .zip(&sb)
                .map(|(a, b)| trace_distance(&reduced_density(a)?, &reduced_density(b)?))
                .collect::<Result<Vec<f64>>>()?;
            Ok((d, None))
        }
        Engine::KernelVolterra => {
            let params =
                KernelParams::from_parts(&run.bath, &run.spectrum, run.config.kernel_variant);
            let cfg = &run.config.evolve;
            let ta = kernel::evolve_volterra(&first.c, &params, cfg.t_max, cfg.n_samples)?;
            let tb = kernel::evolve_volterra(&second.c, &params, cfg.t_max, cfg.n_samples)?;
            let d = kernel_distance(first.c0, &ta.c, second.c0, &tb.c)?;
            Ok((d, None))
        }
        Engine::Analytic3 => {
            let params =
                KernelParams::from_parts(&run.bath, &run.spectrum, run.config.kernel_variant);
            let ra = kernel::analytic_solution(&first.c, &params, times)?;
            let rb = kernel::analytic_solution(&second.c, &params, times)?;
            let d = kernel_distance(first.c0, &ra.trajectory.c, second.c0, &rb.trajectory.c)?;
            Ok((d, Some((ra.solution, rb.solution))))
        }
    }
}

fn propagate(
    run: &ResolvedRun,
    modes: &BathModes,
    state: &StateSpec,
) -> Result<Vec<AmplitudeState>> {
    let init = AmplitudeState::new(state.c0, state.c.clone(), modes.k_max(), Frame::Lab);
    evolve(&init, &run.config.evolve, &run.spectrum, modes)
}

fn kernel_distance(
    c0_a: C64,
    samples_a: &[Vec<C64>],
    c0_b: C64,
    samples_b: &[Vec<C64>],
) -> Result<Vec<f64>> {
    samples_a
        .iter()
        .zip(samples_b)
        .map(|(ca, cb)| trace_distance(&clamped_density(c0_a, ca)?, &clamped_density(c0_b, cb)?))
        .collect()
}

/// Kernel trajectories may leave the one-excitation sector by the size of
/// the approximation's own error; the default variant carries unstable
/// collective poles, so some overshoot over short windows is expected,
/// not a bug.  Totals within this limit are projected back onto the
/// sector, anything larger means the approximation has left its validity
/// domain and the run fails.  Shorten the window, reduce the coupling or
/// switch to the exact engine in that case.
pub const SECTOR_OVERSHOOT_LIMIT: f64 = 0.05;

fn clamped_density(c0: C64, c: &[C64]) -> Result<ReducedDensityMatrix> {
    let total = c0.norm_sqr() + c.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if total > 1.0 + SECTOR_OVERSHOOT_LIMIT {
        return Err(Error::Normalization {
            defect: total - 1.0,
            limit: SECTOR_OVERSHOOT_LIMIT,
        });
    }
    if total > 1.0 {
        let s = 1.0 / total.sqrt();
        let scaled: Vec<C64> = c.iter().map(|a| a * s).collect();
        reduced_density_from_amplitudes(c0 * s, &scaled)
    } else {
        reduced_density_from_amplitudes(c0, c)
    }
}

/// One row of the sweep table.  Failures are recorded, not propagated, so
/// the remaining points still run.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// `"ok"` or the failure message.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<FlowMetrics>,
}

#[derive(Debug)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Full per-point outputs in row order; `None` where the point failed.
    pub outputs: Vec<Option<FlowOutput>>,
}

impl SweepOutput {
    pub fn all_failed(&self) -> bool {
        self.outputs.iter().all(Option::is_none)
    }
}

/// Runs every sweep point on up to `workers` threads.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepOutput> {
    config.validate()?;
    let points: Vec<RunConfig> = (0..config.sweep.values.len())
        .map(|i| config.sweep.apply(&config.run, i))
        .collect();
    let results = parallel_map(&points, workers, run_flow);
    let mut rows = Vec::with_capacity(results.len());
    let mut outputs = Vec::with_capacity(results.len());
    for (value, result) in config.sweep.values.iter().zip(results) {
        match result {
            Ok(out) => {
                rows.push(SweepRow {
                    value: *value,
                    status: "ok".into(),
                    metrics: Some(FlowMetrics::from(&out.segments)),
                });
                outputs.push(Some(out));
            }
            Err(err) => {
                rows.push(SweepRow {
                    value: *value,
                    status: format!("error: {err}"),
                    metrics: None,
                });
                outputs.push(None);
            }
        }
    }
    Ok(SweepOutput {
        config: config.clone(),
        rows,
        outputs,
    })
}

/// Applies `f` to every item, preserving order, with a shared work queue.
fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let n = items.len();
    let workers = workers.max(1).min(n.max(1));
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("result slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("filled slot"))
        .collect()
}

/// Two engines on one run configuration, with headline deviations.
#[derive(Debug)]
pub struct CompareOutput {
    pub first: FlowOutput,
    pub second: FlowOutput,
    pub max_abs_distance_diff: f64,
    pub max_abs_flow_diff: f64,
}

pub fn run_compare(config: &RunConfig, first: Engine, second: Engine) -> Result<CompareOutput> {
    let mut cfg_a = config.clone();
    cfg_a.engine = first;
    let mut cfg_b = config.clone();
    cfg_b.engine = second;
    let a = run_flow(&cfg_a)?;
    let b = run_flow(&cfg_b)?;
    let max_abs = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0f64, f64::max)
    };
    let max_abs_distance_diff = max_abs(&a.series.d, &b.series.d);
    let max_abs_flow_diff = max_abs(&a.series.r, &b.series.r);
    Ok(CompareOutput {
        first: a,
        second: b,
        max_abs_distance_diff,
        max_abs_flow_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{SeedPolicy, SweepParameter, SweepSpec};
    use crate::model::ChainParams;

    /// Small, fast instance: 6 sites, 20 modes, short window.
    fn small_config() -> RunConfig {
        let mut cfg = RunConfig {
            chain: ChainParams::new(6, -1.0, 1.0, 0.5, 0.0).unwrap(),
            ..RunConfig::default()
        };
        cfg.bath.k_max = 20;
        cfg.evolve.t_max = 5.0;
        cfg.evolve.n_samples = 51;
        cfg
    }

    fn three_site_config() -> RunConfig {
        let mut cfg = RunConfig {
            chain: ChainParams::new(3, -1.0, 1.0, 0.5, 0.0).unwrap(),
            ..RunConfig::default()
        };
        cfg.bath.k_max = 40;
        cfg.evolve.t_max = 10.0;
        cfg.evolve.n_samples = 201;
        cfg
    }

    #[test]
    fn default_pair_starts_at_unit_distance() {
        let out = run_flow(&small_config()).unwrap();
        assert!((out.series.d[0] - 1.0).abs() < 1e-12);
        for &d in &out.series.d {
            assert!((-1e-12..=1.0 + 1e-12).contains(&d), "D = {d}");
        }
        assert_eq!(out.series.times.len(), 51);
        assert!(out.poles.is_none());
    }

    #[test]
    fn zero_coupling_flow_is_degenerate() {
        let mut cfg = small_config();
        cfg.bath.gamma0 = 0.0;
        for engine in [Engine::FullPropagator, Engine::KernelVolterra] {
            cfg.engine = engine;
            let out = run_flow(&cfg).unwrap();
            assert!(out.segments.degenerate, "{engine:?}");
            assert_eq!(out.segments.segments.len(), 1);
            for &d in &out.series.d {
                assert!((d - 1.0).abs() < 1e-8, "{engine:?}: D = {d}");
            }
        }
    }

    #[test]
    fn kernel_engines_agree_on_three_sites() {
        let mut cfg = three_site_config();
        cfg.engine = Engine::KernelVolterra;
        let out = run_compare(&cfg, Engine::KernelVolterra, Engine::Analytic3).unwrap();
        assert!(
            out.max_abs_distance_diff < 1e-5,
            "distance diff {:.2e}",
            out.max_abs_distance_diff
        );
        assert!(out.second.poles.is_some());
    }

    #[test]
    fn compare_engines_zero_coupling() {
        let mut cfg = small_config();
        cfg.bath.gamma0 = 0.0;
        let out = run_compare(&cfg, Engine::FullPropagator, Engine::KernelVolterra).unwrap();
        // both engines freeze at D = 1 without coupling
        assert!(out.max_abs_distance_diff < 1e-8);
    }

    #[test]
    fn sweep_of_one_matches_single_run() {
        let sweep = SweepConfig {
            run: small_config(),
            sweep: SweepSpec {
                parameter: SweepParameter::B,
                values: vec![0.5],
                seed_policy: SeedPolicy::Shared,
            },
        };
        let swept = run_sweep(&sweep, 1).unwrap();
        assert_eq!(swept.rows.len(), 1);
        assert_eq!(swept.rows[0].status, "ok");

        let mut single = small_config();
        single.chain.b = 0.5;
        let direct = run_flow(&single).unwrap();
        let point = swept.outputs[0].as_ref().unwrap();
        assert_eq!(point.series.d, direct.series.d);
        let m = swept.rows[0].metrics.unwrap();
        assert_eq!(m.n_switch, direct.segments.n_switch);
        assert_eq!(m.a_mod, direct.segments.a_mod);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let sweep = SweepConfig {
            run: small_config(),
            sweep: SweepSpec {
                parameter: SweepParameter::B,
                values: vec![0.0, 0.25, 0.5],
                seed_policy: SeedPolicy::Shared,
            },
        };
        let serial = run_sweep(&sweep, 1).unwrap();
        let parallel = run_sweep(&sweep, 3).unwrap();
        for (a, b) in serial.outputs.iter().zip(&parallel.outputs) {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.series.d, b.series.d);
            assert_eq!(a.series.r, b.series.r);
        }
    }

    #[test]
    fn seed_policy_distinguishes_identical_values() {
        let mut sweep = SweepConfig {
            run: small_config(),
            sweep: SweepSpec {
                parameter: SweepParameter::B,
                values: vec![0.3, 0.3],
                seed_policy: SeedPolicy::Shared,
            },
        };
        let shared = run_sweep(&sweep, 1).unwrap();
        let d0 = &shared.outputs[0].as_ref().unwrap().series.d;
        let d1 = &shared.outputs[1].as_ref().unwrap().series.d;
        assert_eq!(d0, d1, "shared seed must reproduce the same point");

        sweep.sweep.seed_policy = SeedPolicy::Resample;
        let resampled = run_sweep(&sweep, 1).unwrap();
        let d0 = &resampled.outputs[0].as_ref().unwrap().series.d;
        let d1 = &resampled.outputs[1].as_ref().unwrap().series.d;
        assert_ne!(d0, d1, "resampled points must see different baths");
    }

    #[test]
    fn sweep_rejects_invalid_base() {
        let mut run = small_config();
        run.engine = Engine::Analytic3; // requires n = 3, ours has 6
        let sweep = SweepConfig {
            run,
            sweep: SweepSpec {
                parameter: SweepParameter::B,
                values: vec![0.0],
                seed_policy: SeedPolicy::Shared,
            },
        };
        let err = run_sweep(&sweep, 1).unwrap_err();
        assert!(err.to_string().contains("analytic3"), "{err}");
    }

    #[test]
    fn sweep_records_per_point_failures() {
        // the second point drives the kernel into its unstable regime,
        // where the amplitudes outgrow the one-excitation sector
        let mut run = small_config();
        run.engine = Engine::KernelVolterra;
        let sweep = SweepConfig {
            run,
            sweep: SweepSpec {
                parameter: SweepParameter::Gamma0,
                values: vec![0.1, 400.0],
                seed_policy: SeedPolicy::Shared,
            },
        };
        let out = run_sweep(&sweep, 1).unwrap();
        assert_eq!(out.rows[0].status, "ok");
        assert!(out.rows[1].status.starts_with("error:"), "{}", out.rows[1].status);
        assert!(out.rows[1].metrics.is_none());
        assert!(out.outputs[1].is_none());
        assert!(!out.all_failed());
    }

    #[test]
    fn resolve_normalizes_and_centres() {
        let cfg = small_config();
        let run = resolve(&cfg).unwrap();
        assert_eq!(run.bath.omega_c, run.spectrum.mean_frequency());
        assert!((run.initial_pair.0.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((run.initial_pair.1.norm_sqr() - 1.0).abs() < 1e-15);
    }
}

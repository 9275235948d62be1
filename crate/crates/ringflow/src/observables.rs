//! Trace-distance information flow: reduced ring states, the distance
//! between two trajectories, its time derivative, and the segmentation of
//! that derivative into constant-sign periods with summary metrics.
//!
//! The reduced state of the ring lives on the `N + 1` levels
//! `(|g>, |1>, ..., |N>)`.  Tracing out the bath folds any bath excitation
//! into the ground projector: an excited bath mode means the ring itself
//! has already relaxed.  Only the true vacuum amplitude `c0` carries
//! coherence between the ground level and the ring excitations.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::linalg;
use crate::propagator::AmplitudeState;
use crate::{C64, Error, Result};

/// Norm defect above which density-matrix assembly refuses the state.
pub const DENSITY_NORM_TOL: f64 = 1e-6;

/// Default dead band on sign extraction, suppressing chatter near zero.
pub const DEFAULT_DEADBAND: f64 = 1e-10;

/// Reduced ring density matrix on the levels `(|g>, |1>, ..., |N>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub matrix: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real part of the trace; the imaginary part is zero by construction.
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest deviation from Hermitian symmetry, `max |m_ij - conj(m_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::hermitian_min_eigenvalue(&self.matrix)
    }
}

/// Assembles the reduced density matrix of `state`.
///
/// The ground entry is `1 - sum |c_n|^2`, which equals `|c0|^2 + sum |f_k|^2`
/// when the state is normalized; coherences with the ground level use `c0`
/// alone, and the excited block is the outer product of the ring amplitudes.
pub fn reduced_density(state: &AmplitudeState) -> Result<ReducedDensityMatrix> {
    let defect = state.norm_defect();
    if defect > DENSITY_NORM_TOL {
        return Err(Error::Normalization {
            defect,
            limit: DENSITY_NORM_TOL,
        });
    }
    Ok(assemble(state.c0, &state.c))
}

/// Same assembly from bare amplitudes, for dynamics that never track the
/// bath explicitly.  The population missing from `|c0|^2 + sum |c_n|^2`
/// is taken as leaked to the bath; the total may therefore fall below one
/// but must not exceed it.
pub fn reduced_density_from_amplitudes(c0: C64, c: &[C64]) -> Result<ReducedDensityMatrix> {
    let total = c0.norm_sqr() + c.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if total > 1.0 + DENSITY_NORM_TOL {
        return Err(Error::Normalization {
            defect: total - 1.0,
            limit: DENSITY_NORM_TOL,
        });
    }
    Ok(assemble(c0, c))
}

fn assemble(c0: C64, c: &[C64]) -> ReducedDensityMatrix {
    let n = c.len();
    let ring_pop: f64 = c.iter().map(|a| a.norm_sqr()).sum();
    let mut matrix = DMatrix::zeros(n + 1, n + 1);
    matrix[(0, 0)] = C64::new(1.0 - ring_pop, 0.0);
    for (i, &ci) in c.iter().enumerate() {
        let coh = c0 * ci.conj();
        matrix[(0, i + 1)] = coh;
        matrix[(i + 1, 0)] = coh.conj();
        for (j, &cj) in c.iter().enumerate() {
            matrix[(i + 1, j + 1)] = ci * cj.conj();
        }
    }
    ReducedDensityMatrix { matrix }
}

/// `(1/2) sum |eigenvalues|` of the Hermitian difference; a metric in `[0, 1]`.
pub fn trace_distance(a: &ReducedDensityMatrix, b: &ReducedDensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch {
            message: format!("density matrices of dim {} vs {}", a.dim(), b.dim()),
        });
    }
    let diff = &a.matrix - &b.matrix;
    Ok(linalg::hermitian_abs_eigenvalue_sum(&diff)? / 2.0)
}

/// Second-order finite-difference derivative on a uniform grid: central
/// differences inside, one-sided three-point stencils at the ends.
pub fn derivative_series(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n != values.len() {
        return Err(Error::ShapeMismatch {
            message: format!("{n} times vs {} values", values.len()),
        });
    }
    if n < 3 {
        return Err(Error::Grid {
            message: format!("need at least 3 samples for a derivative, got {n}"),
        });
    }
    let h = times[1] - times[0];
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Grid {
            message: format!("non-increasing grid step {h}"),
        });
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-6 * h {
            return Err(Error::Grid {
                message: format!(
                    "non-uniform grid: step {} vs {h} at t = {}",
                    w[1] - w[0],
                    w[0]
                ),
            });
        }
    }
    let mut r = Vec::with_capacity(n);
    r.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h));
    for i in 1..n - 1 {
        r.push((values[i + 1] - values[i - 1]) / (2.0 * h));
    }
    r.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h));
    Ok(r)
}

/// Sampled trace distance `D(t)` and its derivative `R(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSeries {
    pub times: Vec<f64>,
    pub d: Vec<f64>,
    pub r: Vec<f64>,
    pub deadband: f64,
}

impl FlowSeries {
    /// Validates the distance series and differentiates it.
    pub fn from_distance(times: Vec<f64>, d: Vec<f64>, deadband: f64) -> Result<FlowSeries> {
        if !(deadband.is_finite() && deadband >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "deadband",
                message: format!("must be nonnegative, got {deadband}"),
            });
        }
        for (&t, &v) in times.iter().zip(&d) {
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::InvalidParameter {
                    field: "d",
                    message: format!("trace distance {v} outside [0, 1] at t = {t}"),
                });
            }
        }
        let r = derivative_series(&times, &d)?;
        Ok(FlowSeries {
            times,
            d,
            r,
            deadband,
        })
    }

    pub fn segments(&self) -> Result<FlowSegments> {
        segment_flow(&self.times, &self.r, self.deadband)
    }
}

/// One maximal constant-sign run of `R(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub sign: i8,
}

/// Sign segmentation of `R(t)` and its summary metrics.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSegments {
    pub segments: Vec<FlowSegment>,
    /// Per-sample sign after dead-band inheritance.
    pub signs: Vec<i8>,
    /// Number of sign changes, `segments.len() - 1`.
    pub n_switch: usize,
    /// Largest `|R|` over the series.
    pub a_mod: f64,
    /// Fraction of samples carrying positive sign.
    pub positive_fraction: f64,
    /// No sample exceeded the dead band; the single segment is `+1` by
    /// convention.
    pub degenerate: bool,
}

/// Splits `R(t)` into maximal constant-sign segments.  Samples inside the
/// dead band inherit the running sign (leading quiet samples join the first
/// decided segment), so chatter around zero does not fragment the runs.
pub fn segment_flow(times: &[f64], r: &[f64], deadband: f64) -> Result<FlowSegments> {
    let n = times.len();
    if n != r.len() || n == 0 {
        return Err(Error::ShapeMismatch {
            message: format!("{n} times vs {} derivative samples", r.len()),
        });
    }
    if !(deadband.is_finite() && deadband >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "deadband",
            message: format!("must be nonnegative, got {deadband}"),
        });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "r",
            message: "derivative series contains non-finite samples".into(),
        });
    }

    let a_mod = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = a_mod <= deadband;
    let mut signs = vec![0i8; n];
    let mut current = 0i8;
    for (s, &v) in signs.iter_mut().zip(r) {
        if v.abs() > deadband {
            current = if v > 0.0 { 1 } else { -1 };
        }
        *s = current;
    }
    let first = signs.iter().copied().find(|&s| s != 0).unwrap_or(1);
    for s in &mut signs {
        if *s != 0 {
            break;
        }
        *s = first;
    }

    let mut segments = Vec::new();
    let mut start = 0usize;
    for i in 1..=n {
        if i == n || signs[i] != signs[start] {
            segments.push(FlowSegment {
                t_start: times[start],
                t_end: times[i - 1],
                sign: signs[start],
            });
            start = i;
        }
    }
    let positive = signs.iter().filter(|&&s| s == 1).count();
    Ok(FlowSegments {
        n_switch: segments.len() - 1,
        segments,
        positive_fraction: positive as f64 / n as f64,
        signs,
        a_mod,
        degenerate,
    })
}

/// Lag (in samples) maximising the cross-correlation of the mean-removed
/// series, scanned over `[-max_lag, max_lag]` with unbiased normalisation.
/// Positive lag means `a` looks like `b` delayed.  Ties resolve to the
/// smallest `|lag|`.
pub fn cross_correlation_argmax(a: &[f64], b: &[f64], max_lag: usize) -> Result<i64> {
    let n = a.len();
    if n != b.len() || n == 0 {
        return Err(Error::ShapeMismatch {
            message: format!("{n} vs {} samples", b.len()),
        });
    }
    if max_lag >= n {
        return Err(Error::InvalidParameter {
            field: "max_lag",
            message: format!("lag window {max_lag} exceeds series length {n}"),
        });
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let corr = |lag: i64| -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for (i, &bi) in b.iter().enumerate() {
            let j = i as i64 + lag;
            if (0..n as i64).contains(&j) {
                acc += (a[j as usize] - ma) * (bi - mb);
                count += 1;
            }
        }
        acc / count as f64
    };
    let mut best_lag = 0i64;
    let mut best = corr(0);
    for l in 1..=max_lag as i64 {
        for lag in [l, -l] {
            let v = corr(lag);
            if v > best {
                best = v;
                best_lag = lag;
            }
        }
    }
    Ok(best_lag)
}

/// Dominant oscillation period of a uniformly sampled series, located at
/// the power-spectrum peak and refined by parabolic interpolation on the
/// neighbouring bins.
pub fn dominant_period(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 4 {
        return Err(Error::Grid {
            message: format!("need at least 4 samples for a spectrum, got {n}"),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Grid {
            message: format!("bad sample spacing {h}"),
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
    let half = n / 2;
    let mut peak = 1usize;
    for k in 2..=half {
        if power[k] > power[peak] {
            peak = k;
        }
    }
    if power[peak] <= 0.0 {
        return Err(Error::numeric("series has no oscillatory component"));
    }
    let mut delta = 0.0;
    if peak > 1 && peak < half && power[peak - 1] > 0.0 && power[peak + 1] > 0.0 {
        let (l, c, r) = (
            power[peak - 1].ln(),
            power[peak].ln(),
            power[peak + 1].ln(),
        );
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            delta = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
        }
    }
    let freq = (peak as f64 + delta) / (n as f64 * h);
    Ok(1.0 / freq)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    use super::*;
    use crate::bath::BathModes;
    use crate::model::{FrequencyConvention, SystemSpectrum};
    use crate::propagator::{evolve, EvolveConfig, EvolveMethod, Frame};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pure_state(c0: C64, ring: &[C64]) -> AmplitudeState {
        AmplitudeState {
            t: 0.0,
            c0,
            c: ring.to_vec(),
            f: Vec::new(),
            frame: Frame::Lab,
        }
    }

    /// Random normalized state with ring and bath weight.
    fn random_state(rng: &mut ChaCha12Rng, n: usize, k: usize) -> AmplitudeState {
        let mut amp =
            |_| -> C64 { c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) };
        let c0 = amp(0);
        let ring: Vec<C64> = (0..n).map(&mut amp).collect();
        let bath: Vec<C64> = (0..k).map(&mut amp).collect();
        let norm = (c0.norm_sqr()
            + ring.iter().map(|a| a.norm_sqr()).sum::<f64>()
            + bath.iter().map(|a| a.norm_sqr()).sum::<f64>())
        .sqrt();
        AmplitudeState {
            t: 0.0,
            c0: c0 / norm,
            c: ring.iter().map(|a| a / norm).collect(),
            f: bath.iter().map(|a| a / norm).collect(),
            frame: Frame::Lab,
        }
    }

    #[test]
    fn ground_state_density_is_top_left_one() {
        let rho = reduced_density(&pure_state(c(1.0, 0.0), &[c(0.0, 0.0); 3])).unwrap();
        assert_eq!(rho.dim(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(rho.matrix[(i, j)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn pure_excited_mode_density() {
        let rho =
            reduced_density(&pure_state(c(0.0, 0.0), &[c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == 1 && j == 1 { 1.0 } else { 0.0 };
                assert_eq!(rho.matrix[(i, j)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn equal_superposition_density_block() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let rho = reduced_density(&pure_state(c(a, 0.0), &[c(a, 0.0)])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.matrix[(i, j)] - c(0.5, 0.0)).norm() < 1e-15);
            }
        }
        // projector onto a pure state: rho^2 = rho
        let sq = &rho.matrix * &rho.matrix;
        assert!((&sq - &rho.matrix).norm() < 1e-14);
    }

    #[test]
    fn density_refuses_denormalized_state() {
        let res = reduced_density(&pure_state(c(1.0, 0.0), &[c(1.0, 0.0)]));
        assert!(matches!(res, Err(Error::Normalization { .. })));
    }

    #[test]
    fn bare_amplitude_density_folds_leakage_into_ground() {
        // total weight 0.5 + 0.25 = 0.75: the missing quarter sits with the
        // bath and lands in the ground projector
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let rho = reduced_density_from_amplitudes(c(a, 0.0), &[c(0.5, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!((rho.matrix[(0, 0)].re - 0.75).abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!(rho.min_eigenvalue().unwrap() > -1e-12);
        assert!(reduced_density_from_amplitudes(c(1.0, 0.0), &[c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn density_is_hermitian_psd_unit_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rho = reduced_density(&random_state(&mut rng, 5, 7)).unwrap();
            assert_eq!(rho.hermitian_defect(), 0.0);
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(rho.min_eigenvalue().unwrap() > -1e-9);
        }
    }

    #[test]
    fn distance_of_identical_states_is_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let rho = reduced_density(&random_state(&mut rng, 4, 3)).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-13);
    }

    #[test]
    fn distance_of_orthogonal_pure_states_is_one() {
        let g = reduced_density(&pure_state(c(1.0, 0.0), &[c(0.0, 0.0); 2])).unwrap();
        let e =
            reduced_density(&pure_state(c(0.0, 0.0), &[c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!((trace_distance(&g, &e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_state_distance_matches_overlap_formula() {
        // for pure states, D = sqrt(1 - |<psi|phi>|^2)
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..20 {
            let psi = random_state(&mut rng, 4, 0);
            let phi = random_state(&mut rng, 4, 0);
            let overlap = psi.c0.conj() * phi.c0
                + psi
                    .c
                    .iter()
                    .zip(&phi.c)
                    .map(|(x, y)| x.conj() * y)
                    .sum::<C64>();
            let want = (1.0 - overlap.norm_sqr()).max(0.0).sqrt();
            let d = trace_distance(
                &reduced_density(&psi).unwrap(),
                &reduced_density(&phi).unwrap(),
            )
            .unwrap();
            assert!((d - want).abs() < 1e-10, "{d} vs {want}");
        }
    }

    #[test]
    fn distance_is_symmetric_with_triangle_inequality() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..20 {
            let rhos: Vec<ReducedDensityMatrix> = (0..3)
                .map(|_| reduced_density(&random_state(&mut rng, 3, 5)).unwrap())
                .collect();
            let d = |i: usize, j: usize| trace_distance(&rhos[i], &rhos[j]).unwrap();
            assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
            assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-10);
            for i in 0..3 {
                for j in 0..3 {
                    let v = d(i, j);
                    assert!((-1e-12..=1.0 + 1e-12).contains(&v));
                }
            }
        }
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        let a = reduced_density(&pure_state(c(1.0, 0.0), &[c(0.0, 0.0)])).unwrap();
        let b = reduced_density(&pure_state(c(1.0, 0.0), &[c(0.0, 0.0); 2])).unwrap();
        assert!(matches!(
            trace_distance(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn decoupled_evolution_preserves_distance() {
        // zero coupling: both trajectories evolve under the same unitary,
        // so the distance stays at its initial value, here exactly one
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let spectrum = SystemSpectrum {
            convention: FrequencyConvention::ZeemanShifted,
            ground_energy: 0.0,
            energies: vec![0.4, -0.3, 0.9],
            frequencies: vec![0.4, -0.3, 0.9],
        };
        let modes = BathModes {
            omega: vec![0.2, 0.5],
            g: vec![0.0, 0.0],
        };
        let cfg = EvolveConfig {
            t_max: 30.0,
            n_samples: 61,
            method: EvolveMethod::EigenPropagate,
            ..EvolveConfig::default()
        };
        let init = |sign: f64| {
            let mut ring = vec![c(0.0, 0.0); 3];
            ring[0] = c(sign * a, 0.0);
            AmplitudeState::new(c(a, 0.0), ring, 2, Frame::Lab)
        };
        let plus = evolve(&init(1.0), &cfg, &spectrum, &modes).unwrap();
        let minus = evolve(&init(-1.0), &cfg, &spectrum, &modes).unwrap();
        let d0 = trace_distance(
            &reduced_density(&plus[0]).unwrap(),
            &reduced_density(&minus[0]).unwrap(),
        )
        .unwrap();
        assert!((d0 - 1.0).abs() < 1e-12, "orthogonal pair must start at 1");
        for (p, m) in plus.iter().zip(&minus) {
            let d = trace_distance(&reduced_density(p).unwrap(), &reduced_density(m).unwrap())
                .unwrap();
            assert!((d - d0).abs() < 1e-8, "t = {}: {d} vs {d0}", p.t);
        }
    }

    #[test]
    fn derivative_of_linear_ramp_is_constant() {
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| 0.31 * t + 0.2).collect();
        for v in derivative_series(&times, &values).unwrap() {
            assert!((v - 0.31).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        for v in derivative_series(&times, &[0.7; 10]).unwrap() {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_sine_is_second_order() {
        let h = 1e-3;
        let times: Vec<f64> = (0..1001).map(|i| h * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| t.sin()).collect();
        let r = derivative_series(&times, &values).unwrap();
        let worst = r
            .iter()
            .zip(&times)
            .map(|(v, t)| (v - t.cos()).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-5, "worst error {worst:.2e}");
    }

    #[test]
    fn derivative_rejects_nonuniform_grid() {
        let times = [0.0, 0.1, 0.25, 0.3];
        assert!(matches!(
            derivative_series(&times, &[0.0; 4]),
            Err(Error::Grid { .. })
        ));
    }

    fn assert_alternating(segments: &FlowSegments) {
        for w in segments.segments.windows(2) {
            assert_eq!(w[0].sign, -w[1].sign, "segments must alternate");
        }
    }

    #[test]
    fn segments_of_constructed_runs() {
        let times: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let r = [1.0, 1.0, -1.0, -1.0, 1.0];
        let seg = segment_flow(&times, &r, DEFAULT_DEADBAND).unwrap();
        assert_eq!(seg.segments.len(), 3);
        assert_eq!(seg.n_switch, 2);
        assert_eq!(seg.signs, vec![1, 1, -1, -1, 1]);
        assert_eq!(seg.segments[0].t_start, 0.0);
        assert_eq!(seg.segments[0].t_end, 1.0);
        assert_eq!(seg.segments[1].t_start, 2.0);
        assert_eq!(seg.segments[2].sign, 1);
        assert!((seg.positive_fraction - 0.6).abs() < 1e-15);
        assert!(!seg.degenerate);
        assert_alternating(&seg);
    }

    #[test]
    fn segments_of_dense_sine() {
        let n = 4001;
        let times: Vec<f64> = (0..n)
            .map(|i| 4.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64)
            .collect();
        let r: Vec<f64> = times.iter().map(|t| t.sin()).collect();
        let seg = segment_flow(&times, &r, DEFAULT_DEADBAND).unwrap();
        assert_eq!(seg.segments.len(), 4);
        assert_eq!(seg.n_switch, 3);
        assert!((seg.a_mod - 1.0).abs() < 1e-4);
        assert!((seg.positive_fraction - 0.5).abs() < 1e-2);
        assert_alternating(&seg);
    }

    #[test]
    fn quiet_samples_inherit_running_sign() {
        let times = [0.0, 1.0, 2.0];
        let seg = segment_flow(&times, &[1.0, 1e-12, -1.0], 1e-10).unwrap();
        assert_eq!(seg.signs, vec![1, 1, -1]);
        assert_eq!(seg.n_switch, 1);
        // leading quiet samples join the first decided segment
        let seg = segment_flow(&times, &[1e-12, -1.0, -1.0], 1e-10).unwrap();
        assert_eq!(seg.signs, vec![-1, -1, -1]);
        assert_eq!(seg.segments.len(), 1);
    }

    #[test]
    fn all_zero_series_is_single_degenerate_segment() {
        let times: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let seg = segment_flow(&times, &[0.0; 6], DEFAULT_DEADBAND).unwrap();
        assert!(seg.degenerate);
        assert_eq!(seg.segments.len(), 1);
        assert_eq!(seg.segments[0].sign, 1);
        assert_eq!(seg.n_switch, 0);
        assert_eq!(seg.a_mod, 0.0);
    }

    #[test]
    fn saturated_deadband_degenerates() {
        let times: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let r: Vec<f64> = times.iter().map(|t| t.sin()).collect();
        let seg = segment_flow(&times, &r, 10.0).unwrap();
        assert!(seg.degenerate);
        assert_eq!(seg.segments.len(), 1);
    }

    #[test]
    fn flow_series_validates_distance_bounds() {
        let times: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        let d = vec![0.5; 10];
        let series = FlowSeries::from_distance(times.clone(), d, DEFAULT_DEADBAND).unwrap();
        assert!(series.segments().unwrap().degenerate);
        assert!(FlowSeries::from_distance(times, vec![1.5; 10], DEFAULT_DEADBAND).is_err());
    }

    #[test]
    fn cross_correlation_finds_known_shift() {
        let n = 600;
        let shift = 37usize;
        let x: Vec<f64> = (0..n + shift)
            .map(|i| {
                let t = 0.05 * i as f64;
                (2.0 * t).sin() * (-0.05 * t).exp()
            })
            .collect();
        let a = &x[..n];
        let b = &x[shift..];
        // b runs ahead of a, so a matches b delayed by `shift`
        let lag = cross_correlation_argmax(a, b, 100).unwrap();
        assert_eq!(lag, shift as i64);
        assert_eq!(cross_correlation_argmax(a, a, 100).unwrap(), 0);
        assert_eq!(cross_correlation_argmax(b, a, 100).unwrap(), -(shift as i64));
    }

    #[test]
    fn cross_correlation_rejects_bad_window() {
        assert!(cross_correlation_argmax(&[1.0, 2.0], &[1.0, 2.0], 2).is_err());
        assert!(cross_correlation_argmax(&[1.0], &[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn dominant_period_of_pure_tone() {
        let t_period = 7.3;
        let h = 0.05;
        let values: Vec<f64> = (0..4096)
            .map(|i| (2.0 * std::f64::consts::PI * h * i as f64 / t_period).sin())
            .collect();
        let got = dominant_period(&values, h).unwrap();
        assert!(
            (got - t_period).abs() / t_period < 0.02,
            "period {got} vs {t_period}"
        );
    }

    #[test]
    fn dominant_period_picks_the_stronger_tone() {
        let h = 0.05;
        let values: Vec<f64> = (0..4096)
            .map(|i| {
                let t = h * i as f64;
                let w = 2.0 * std::f64::consts::PI;
                (w * t / 5.0).sin() + 0.2 * (w * t / 2.0).sin()
            })
            .collect();
        let got = dominant_period(&values, h).unwrap();
        assert!((got - 5.0).abs() / 5.0 < 0.02, "period {got}");
    }

    #[test]
    fn dominant_period_rejects_flat_series() {
        assert!(dominant_period(&[1.0; 64], 0.1).is_err());
        assert!(dominant_period(&[1.0, 2.0], 0.1).is_err());
    }
}

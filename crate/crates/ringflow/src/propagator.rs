//! Exact propagation of the coupled ring and bath amplitudes.
//!
//! The single-excitation state is `(c0, c_n, f_k)`.  In the lab frame the
//! amplitudes obey
//!
//! ```text
//! dc_n/dt = -i (omega_n c_n + sum_k g_k f_k)
//! df_k/dt = -i (omega_k f_k + g_k sum_m c_m)
//! ```
//!
//! with `c0` constant.  The gauged frame absorbs the free precession into
//! the amplitudes, `a -> e^{+i omega t} a`, leaving only oscillatory
//! coupling terms; the lab amplitudes are recovered as `e^{-i omega t}` times
//! the gauged ones.  Two independent integrators cover the same contract:
//! an adaptive Runge-Kutta path and spectral decomposition of the real
//! symmetric coupling matrix.  A state keeps its frame tag through
//! evolution, so the frame is chosen by tagging the initial state.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bath::BathModes;
use crate::model::SystemSpectrum;
use crate::ode::{self, AdaptiveOptions};
use crate::{C64, Error, Result};

/// Largest tolerated norm defect of an initial state.
const INIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// Constant-coefficient form; the integration default.
    #[default]
    Lab,
    /// Free precession absorbed into the amplitudes.
    Gauged,
}

/// Amplitudes of the coupled system at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub t: f64,
    /// Ground amplitude; never evolves.
    pub c0: C64,
    /// Ring mode amplitudes.
    pub c: Vec<C64>,
    /// Bath mode amplitudes.
    pub f: Vec<C64>,
    pub frame: Frame,
}

impl AmplitudeState {
    /// State at `t = 0` with the given ring amplitudes and an empty bath.
    pub fn new(c0: C64, c: Vec<C64>, n_bath: usize, frame: Frame) -> Self {
        AmplitudeState {
            t: 0.0,
            c0,
            c,
            f: vec![C64::new(0.0, 0.0); n_bath],
            frame,
        }
    }

    /// Absolute deviation of the total population from one.
    pub fn norm_defect(&self) -> f64 {
        let total = self.c0.norm_sqr()
            + self.c.iter().map(|a| a.norm_sqr()).sum::<f64>()
            + self.f.iter().map(|a| a.norm_sqr()).sum::<f64>();
        (total - 1.0).abs()
    }

    /// Population residing in the bath modes.
    pub fn bath_population(&self) -> f64 {
        self.f.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMethod {
    AdaptiveRk,
    EigenPropagate,
}

/// Output grid and integrator selection for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_max: f64,
    /// Number of uniformly spaced samples on `[0, t_max]`, endpoints included.
    pub n_samples: usize,
    pub method: EvolveMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            t_max: 50.0,
            n_samples: 2000,
            method: EvolveMethod::EigenPropagate,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidParameter {
                field: "t_max",
                message: format!("must be positive and finite, got {}", self.t_max),
            });
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter {
                field: "n_samples",
                message: format!("need at least 2 samples, got {}", self.n_samples),
            });
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter {
                field: "rel_tol",
                message: format!("must be positive, got {}", self.rel_tol),
            });
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter {
                field: "abs_tol",
                message: format!("must be positive, got {}", self.abs_tol),
            });
        }
        Ok(())
    }

    /// Uniform sample grid; the last point is `t_max` exactly.
    pub fn sample_times(&self) -> Vec<f64> {
        let h = self.t_max / (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|i| {
                if i + 1 == self.n_samples {
                    self.t_max
                } else {
                    i as f64 * h
                }
            })
            .collect()
    }

    fn ode_options(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..AdaptiveOptions::default()
        }
    }
}

/// Time derivative of `(c_n, f_k)` in the frame the state is tagged with.
pub fn rhs(
    state: &AmplitudeState,
    spectrum: &SystemSpectrum,
    modes: &BathModes,
) -> Result<(Vec<C64>, Vec<C64>)> {
    check_shapes(state, spectrum, modes)?;
    let n = state.c.len();
    let mut y = Vec::with_capacity(n + state.f.len());
    y.extend_from_slice(&state.c);
    y.extend_from_slice(&state.f);
    let mut dy = vec![C64::new(0.0, 0.0); y.len()];
    match state.frame {
        Frame::Lab => rhs_lab(&spectrum.frequencies, modes, &y, &mut dy),
        Frame::Gauged => rhs_gauged(&spectrum.frequencies, modes, state.t, &y, &mut dy),
    }
    let f = dy.split_off(n);
    Ok((dy, f))
}

/// Trajectory by adaptive Runge-Kutta integration in the state's frame.
pub fn evolve_ode(
    init: &AmplitudeState,
    cfg: &EvolveConfig,
    spectrum: &SystemSpectrum,
    modes: &BathModes,
) -> Result<Vec<AmplitudeState>> {
    check_init(init, cfg, spectrum, modes)?;
    let times = cfg.sample_times();
    let n = init.c.len();
    let mut y0 = Vec::with_capacity(n + init.f.len());
    y0.extend_from_slice(&init.c);
    y0.extend_from_slice(&init.f);
    let omega = &spectrum.frequencies;
    let samples = match init.frame {
        Frame::Lab => ode::integrate(
            |_, y, dy| rhs_lab(omega, modes, y, dy),
            &y0,
            0.0,
            &times,
            &cfg.ode_options(),
        )?,
        Frame::Gauged => ode::integrate(
            |t, y, dy| rhs_gauged(omega, modes, t, y, dy),
            &y0,
            0.0,
            &times,
            &cfg.ode_options(),
        )?,
    };
    Ok(package(init, &times, samples, n))
}

/// Trajectory by spectral decomposition of the coupling matrix.
///
/// The grid origin returns the input state unchanged; later samples are
/// `V e^{-i Lambda t} V^T y(0)` converted to the state's frame.
pub fn evolve_eig(
    init: &AmplitudeState,
    cfg: &EvolveConfig,
    spectrum: &SystemSpectrum,
    modes: &BathModes,
) -> Result<Vec<AmplitudeState>> {
    check_init(init, cfg, spectrum, modes)?;
    let times = cfg.sample_times();
    let n = init.c.len();
    let dim = n + init.f.len();
    let h = coupling_hamiltonian(spectrum, modes);
    let (lambda, v) = crate::linalg::symmetric_eigen(&h)?;

    // At t = 0 lab and gauged amplitudes coincide, so y0 serves both frames.
    let mut y0 = Vec::with_capacity(dim);
    y0.extend_from_slice(&init.c);
    y0.extend_from_slice(&init.f);

    // w = V^T y0 once, then each sample is one back-transform.
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &yi) in y0.iter().enumerate() {
            acc += yi * v[(i, j)];
        }
        *wj = acc;
    }

    let mut out = Vec::with_capacity(times.len());
    let mut y = vec![C64::new(0.0, 0.0); dim];
    for &t in &times {
        if t == 0.0 {
            out.push(y0.clone());
            continue;
        }
        y.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        for (j, &wj) in w.iter().enumerate() {
            let z = C64::cis(-lambda[j] * t) * wj;
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += z * v[(i, j)];
            }
        }
        if init.frame == Frame::Gauged {
            for (i, yi) in y.iter_mut().enumerate() {
                let om = if i < n {
                    spectrum.frequencies[i]
                } else {
                    modes.omega[i - n]
                };
                *yi *= C64::cis(om * t);
            }
        }
        out.push(y.clone());
    }
    Ok(package(init, &times, out, n))
}

/// Dispatches on `cfg.method`.
pub fn evolve(
    init: &AmplitudeState,
    cfg: &EvolveConfig,
    spectrum: &SystemSpectrum,
    modes: &BathModes,
) -> Result<Vec<AmplitudeState>> {
    match cfg.method {
        EvolveMethod::AdaptiveRk => evolve_ode(init, cfg, spectrum, modes),
        EvolveMethod::EigenPropagate => evolve_eig(init, cfg, spectrum, modes),
    }
}

/// Real symmetric coupling matrix of the lab-frame equations: ring and bath
/// frequencies on the diagonal, `g_k` between every ring mode and bath mode.
pub fn coupling_hamiltonian(spectrum: &SystemSpectrum, modes: &BathModes) -> DMatrix<f64> {
    let n = spectrum.n();
    let kk = modes.k_max();
    let mut h = DMatrix::zeros(n + kk, n + kk);
    for (i, &om) in spectrum.frequencies.iter().enumerate() {
        h[(i, i)] = om;
    }
    for k in 0..kk {
        h[(n + k, n + k)] = modes.omega[k];
        for i in 0..n {
            h[(i, n + k)] = modes.g[k];
            h[(n + k, i)] = modes.g[k];
        }
    }
    h
}

fn rhs_lab(omega: &[f64], modes: &BathModes, y: &[C64], dy: &mut [C64]) {
    let n = omega.len();
    let ring_sum: C64 = y[..n].iter().sum();
    let drive: C64 = modes
        .g
        .iter()
        .zip(&y[n..])
        .map(|(&g, &f)| f * g)
        .sum();
    let mi = C64::new(0.0, -1.0);
    for i in 0..n {
        dy[i] = mi * (y[i] * omega[i] + drive);
    }
    for k in 0..modes.k_max() {
        dy[n + k] = mi * (y[n + k] * modes.omega[k] + ring_sum * modes.g[k]);
    }
}

fn rhs_gauged(omega: &[f64], modes: &BathModes, t: f64, y: &[C64], dy: &mut [C64]) {
    let n = omega.len();
    // Shared sums keep one evaluation at O(N + K) instead of O(N * K).
    let ring_sum: C64 = y[..n]
        .iter()
        .zip(omega)
        .map(|(&c, &om)| c * C64::cis(-om * t))
        .sum();
    let drive: C64 = modes
        .g
        .iter()
        .zip(&modes.omega)
        .zip(&y[n..])
        .map(|((&g, &om), &f)| f * g * C64::cis(-om * t))
        .sum();
    let mi = C64::new(0.0, -1.0);
    for i in 0..n {
        dy[i] = mi * C64::cis(omega[i] * t) * drive;
    }
    for k in 0..modes.k_max() {
        dy[n + k] = mi * modes.g[k] * C64::cis(modes.omega[k] * t) * ring_sum;
    }
}

fn check_shapes(
    state: &AmplitudeState,
    spectrum: &SystemSpectrum,
    modes: &BathModes,
) -> Result<()> {
    if state.c.len() != spectrum.n() {
        return Err(Error::ShapeMismatch {
            message: format!(
                "state has {} ring amplitudes but the spectrum has {} modes",
                state.c.len(),
                spectrum.n()
            ),
        });
    }
    if state.f.len() != modes.k_max() || modes.omega.len() != modes.g.len() {
        return Err(Error::ShapeMismatch {
            message: format!(
                "state has {} bath amplitudes for {} bath modes ({} couplings)",
                state.f.len(),
                modes.omega.len(),
                modes.g.len()
            ),
        });
    }
    Ok(())
}

fn check_init(
    init: &AmplitudeState,
    cfg: &EvolveConfig,
    spectrum: &SystemSpectrum,
    modes: &BathModes,
) -> Result<()> {
    cfg.validate()?;
    check_shapes(init, spectrum, modes)?;
    if init.t != 0.0 {
        return Err(Error::InvalidParameter {
            field: "init.t",
            message: format!("trajectories start at t = 0, got {}", init.t),
        });
    }
    let defect = init.norm_defect();
    if defect > INIT_NORM_TOL {
        return Err(Error::Normalization {
            defect,
            limit: INIT_NORM_TOL,
        });
    }
    Ok(())
}

fn package(
    init: &AmplitudeState,
    times: &[f64],
    samples: Vec<Vec<C64>>,
    n: usize,
) -> Vec<AmplitudeState> {
    times
        .iter()
        .zip(samples)
        .map(|(&t, mut y)| {
            let f = y.split_off(n);
            AmplitudeState {
                t,
                c0: init.c0,
                c: y,
                f,
                frame: init.frame,
            }
        })
        .collect()
}

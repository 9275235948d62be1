//! Structured bosonic bath: Lorentzian spectral density and reproducible
//! discretisation into a finite set of modes.
//!
//! The bath is characterised by
//!
//! ```text
//! J(ω) = (1/2π) · γ0 λ² / ((ω − ω_c)² + λ²),
//! ```
//!
//! a Lorentzian of width `λ` centred at `ω_c` whose total weight is
//! `∫ J dω = γ0 λ / 2`.  Discrete modes are drawn from a window
//! `[ω_c − W, ω_c + W]`, `W = window_halfwidth · λ`, and carry couplings
//! `g_k = √(J(ω_k) · Δω)` with `Δω = 2W / k_max`, so that `Σ g_k²`
//! estimates the windowed weight `(γ0 λ / π) · atan(W/λ)`.
//!
//! Sampling is driven by a ChaCha12 stream seeded with `seed_from_u64`, so
//! identical parameters give bit-identical modes on every platform.  The
//! generator identifier [`PRNG_ID`] is recorded in all output files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of the pseudo-random generator behind [`sample_modes`].
pub const PRNG_ID: &str = "chacha12/seed_from_u64";

/// How mode frequencies are placed inside the sampling window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingScheme {
    /// Frequencies i.i.d. uniform over the whole window.
    #[default]
    IidUniform,
    /// One frequency per equal-width cell, jittered around the cell centre.
    JitteredGrid,
}

/// Bath shape and discretisation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// Overall coupling rate `γ0 ≥ 0` (zero decouples the bath).
    pub gamma0: f64,
    /// Lorentzian half-width `λ > 0`.
    pub lambda: f64,
    /// Centre frequency of the Lorentzian.
    pub omega_c: f64,
    /// Number of discrete modes.
    pub k_max: usize,
    /// Window half-width in units of `λ`.
    pub window_halfwidth: f64,
    /// Seed of the sampling stream.
    pub seed: u64,
    pub scheme: SamplingScheme,
    /// Jitter fraction in `[0, 1]` for [`SamplingScheme::JitteredGrid`];
    /// `0` puts every mode at its cell centre.  Ignored by `IidUniform`.
    pub jitter: f64,
}

impl BathParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 >= 0.0 && self.gamma0.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "gamma0",
                message: format!("must be finite and ≥ 0, got {}", self.gamma0),
            });
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "lambda",
                message: format!("must be finite and > 0, got {}", self.lambda),
            });
        }
        if !self.omega_c.is_finite() {
            return Err(Error::InvalidParameter {
                field: "omega_c",
                message: format!("must be finite, got {}", self.omega_c),
            });
        }
        if self.k_max < 1 {
            return Err(Error::InvalidParameter {
                field: "k_max",
                message: "need at least one bath mode".into(),
            });
        }
        if !(self.window_halfwidth > 0.0 && self.window_halfwidth.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "window_halfwidth",
                message: format!("must be finite and > 0, got {}", self.window_halfwidth),
            });
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(Error::InvalidParameter {
                field: "jitter",
                message: format!("must lie in [0, 1], got {}", self.jitter),
            });
        }
        Ok(())
    }

    /// Window half-width `W = window_halfwidth · λ` in frequency units.
    pub fn window(&self) -> f64 {
        self.window_halfwidth * self.lambda
    }

    /// Weight of the spectral density inside the sampling window,
    /// `(γ0 λ / π) · atan(W/λ)`.
    pub fn windowed_weight(&self) -> f64 {
        self.gamma0 * self.lambda / std::f64::consts::PI * self.window_halfwidth.atan()
    }
}

/// Lorentzian spectral density `J(ω)`.
pub fn spectral_density(omega: f64, p: &BathParams) -> f64 {
    let d = omega - p.omega_c;
    p.gamma0 * p.lambda * p.lambda
        / (2.0 * std::f64::consts::PI * (d * d + p.lambda * p.lambda))
}

/// A concrete set of sampled bath modes; index `k` is `0`-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathModes {
    pub omega: Vec<f64>,
    pub g: Vec<f64>,
}

impl BathModes {
    pub fn k_max(&self) -> usize {
        self.omega.len()
    }

    /// `Σ g_k²`, the discrete estimate of the windowed spectral weight.
    pub fn coupling_weight(&self) -> f64 {
        self.g.iter().map(|g| g * g).sum()
    }
}

/// Draw `k_max` bath modes.  Deterministic in `p`: the ChaCha12 stream is
/// seeded from `p.seed` and consumed in ascending mode order, one uniform
/// draw per mode.
pub fn sample_modes(p: &BathParams) -> Result<BathModes> {
    p.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(p.seed);
    let w = p.window();
    let dw = 2.0 * w / p.k_max as f64;
    let lo = p.omega_c - w;
    let mut omega = Vec::with_capacity(p.k_max);
    for k in 0..p.k_max {
        let om = match p.scheme {
            SamplingScheme::IidUniform => rng.gen_range(lo..lo + 2.0 * w),
            SamplingScheme::JitteredGrid => {
                let centre = lo + (k as f64 + 0.5) * dw;
                let u: f64 = rng.gen_range(-0.5..0.5);
                centre + p.jitter * u * dw
            }
        };
        omega.push(om);
    }
    let g = omega
        .iter()
        .map(|&om| (spectral_density(om, p) * dw).sqrt())
        .collect();
    Ok(BathModes { omega, g })
}

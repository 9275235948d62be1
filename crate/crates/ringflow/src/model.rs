//! Ring geometry: dispersion, eigenfrequencies and mode wavefunctions of the
//! closed spin chain in its one-excitation sector.
//!
//! A ring of `N` spins with nearest-neighbour coupling `J1`, next-nearest
//! coupling `J2`, a chirality-selecting Dzyaloshinskii-Moriya (DM) term `D`
//! and a longitudinal field `B` has traveling-wave modes labelled
//! `n = 1..=N` with energies
//!
//! ```text
//! E_n = J1 cos(2πn/N) + J2 cos(4πn/N) + D sin(2πn/N) − B(N−1),
//! ```
//!
//! above the fully aligned ground state of energy `E_g = −B·N`.  The DM
//! coefficient may be supplied directly or as a magnetoelectric product
//! `D = c_E · E` with an applied electric field, which is how an electric
//! field steers the chiral part of the dispersion.  Units: `ħ = 1`, all
//! couplings and times dimensionless.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference used when converting mode energies `E_n` to eigenfrequencies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyConvention {
    /// `ω_n = E_n − B·N`: shifts every mode down by the total Zeeman energy
    /// `B·N`.  Because `E_g = −B·N` this equals `E_n + E_g`, so the field
    /// enters the frequencies as `−B(2N−1)`.
    #[default]
    ZeemanShifted,
    /// `ω_n = E_n − E_g`: the usual transition frequency out of the ground
    /// state; the field enters only as `+B`.
    GroundReferenced,
}

/// Couplings of the spin ring.  Use [`ChainParams::new`] or
/// [`ChainParams::with_electric_drive`]; both validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Ring size `N ≥ 3`.
    pub n: usize,
    /// Nearest-neighbour exchange.
    pub j1: f64,
    /// Next-nearest-neighbour exchange.
    pub j2: f64,
    /// DM coefficient `D`.
    pub dm: f64,
    /// Longitudinal magnetic field `B`.
    pub b: f64,
}

impl ChainParams {
    pub fn new(n: usize, j1: f64, j2: f64, dm: f64, b: f64) -> Result<Self> {
        let p = ChainParams { n, j1, j2, dm, b };
        p.validate()?;
        Ok(p)
    }

    /// DM coefficient from a magnetoelectric coupling: `D = c_e * e_field`.
    pub fn with_electric_drive(
        n: usize,
        j1: f64,
        j2: f64,
        c_e: f64,
        e_field: f64,
        b: f64,
    ) -> Result<Self> {
        if !c_e.is_finite() || !e_field.is_finite() {
            return Err(Error::InvalidParameter {
                field: "c_e/e_field",
                message: format!("must be finite, got c_e = {c_e}, e_field = {e_field}"),
            });
        }
        ChainParams::new(n, j1, j2, c_e * e_field, b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter {
                field: "n",
                message: format!("ring needs at least 3 sites, got {}", self.n),
            });
        }
        for (field, v) in [
            ("j1", self.j1),
            ("j2", self.j2),
            ("dm", self.dm),
            ("b", self.b),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    message: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Ground-state energy `E_g = −B·N` of the fully aligned configuration.
    pub fn ground_energy(&self) -> f64 {
        -self.b * self.n as f64
    }

    /// Energy `E_n` of traveling mode `n` (1-based, `1..=N`).
    pub fn mode_energy(&self, n: usize) -> Result<f64> {
        if n < 1 || n > self.n {
            return Err(Error::IndexOutOfRange {
                what: "mode index",
                index: n,
                len: self.n,
            });
        }
        let nn = self.n as i64;
        let k = n as i64;
        Ok(self.j1 * cos_frac(k, nn) + self.j2 * cos_frac(2 * k, nn) + self.dm * sin_frac(k, nn)
            - self.b * (self.n as f64 - 1.0))
    }

    /// Full one-excitation spectrum under the given frequency convention.
    pub fn spectrum(&self, convention: FrequencyConvention) -> Result<SystemSpectrum> {
        let e_g = self.ground_energy();
        let shift = match convention {
            FrequencyConvention::ZeemanShifted => -self.b * self.n as f64,
            FrequencyConvention::GroundReferenced => -e_g,
        };
        let mut energies = Vec::with_capacity(self.n);
        let mut frequencies = Vec::with_capacity(self.n);
        for n in 1..=self.n {
            let e = self.mode_energy(n)?;
            energies.push(e);
            frequencies.push(e + shift);
        }
        Ok(SystemSpectrum {
            convention,
            ground_energy: e_g,
            energies,
            frequencies,
        })
    }
}

/// Spectrum of the ring's one-excitation sector.  Mode `n` lives at index
/// `n − 1` of both arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpectrum {
    pub convention: FrequencyConvention,
    pub ground_energy: f64,
    pub energies: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl SystemSpectrum {
    pub fn n(&self) -> usize {
        self.frequencies.len()
    }

    /// Arithmetic mean of the eigenfrequencies; default centre of the bath.
    pub fn mean_frequency(&self) -> f64 {
        self.frequencies.iter().sum::<f64>() / self.frequencies.len() as f64
    }
}

/// Site amplitudes `⟨site l | mode n⟩ = exp(−i 2π n l / N) / √N`, `l = 1..=N`.
pub fn site_amplitudes(n: usize, ring_size: usize) -> Result<Vec<C64>> {
    if ring_size < 1 {
        return Err(Error::InvalidParameter {
            field: "ring_size",
            message: "must be positive".into(),
        });
    }
    if n < 1 || n > ring_size {
        return Err(Error::IndexOutOfRange {
            what: "mode index",
            index: n,
            len: ring_size,
        });
    }
    let norm = 1.0 / (ring_size as f64).sqrt();
    let nn = ring_size as i64;
    Ok((1..=ring_size as i64)
        .map(|l| {
            let k = n as i64 * l;
            C64::new(cos_frac(k, nn), -sin_frac(k, nn)) * norm
        })
        .collect())
}

/// `cos(2πk/n)` evaluated so that the n-fold symmetry `k ↔ n−k` is exact and
/// quarter turns give exact 0/±1.
fn cos_frac(k: i64, n: i64) -> f64 {
    let k = k.rem_euclid(n);
    let k = k.min(n - k);
    if k == 0 {
        1.0
    } else if 4 * k == n {
        0.0
    } else if 2 * k == n {
        -1.0
    } else {
        (std::f64::consts::TAU * k as f64 / n as f64).cos()
    }
}

/// `sin(2πk/n)` with the same exactness guarantees as [`cos_frac`].
fn sin_frac(k: i64, n: i64) -> f64 {
    let k = k.rem_euclid(n);
    let (k, sign) = if 2 * k > n { (n - k, -1.0) } else { (k, 1.0) };
    let v = if k == 0 || 2 * k == n {
        0.0
    } else if 4 * k == n {
        1.0
    } else {
        (std::f64::consts::TAU * k as f64 / n as f64).sin()
    };
    sign * v
}

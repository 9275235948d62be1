//! JSON-serializable experiment configuration with defaults, validation and
//! sweep plumbing.
//!
//! A [`RunConfig`] fully determines one information-flow run; every field
//! has a default, so `{}` is a valid config describing the reference
//! instance (50-site ring, 200-mode bath).  [`SweepConfig`] wraps a base
//! run plus a list of values for one swept parameter.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bath::{BathParams, SamplingScheme};
use crate::kernel::KernelVariant;
use crate::model::{ChainParams, FrequencyConvention};
use crate::observables::DEFAULT_DEADBAND;
use crate::propagator::EvolveConfig;
use crate::{C64, Error, Result};

/// Which dynamical backend produces the two trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Discrete ring plus sampled bath modes, exact in the one-excitation
    /// sector.
    #[default]
    FullPropagator,
    /// Memory-kernel dynamics of the ring amplitudes alone.
    KernelVolterra,
    /// Laplace-domain residue solution; three-site rings only.
    Analytic3,
}

/// Bath description as configured.  `omega_c: None` resolves to the mean
/// ring eigenfrequency, keeping the Lorentzian centred on the band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSpec {
    pub gamma0: f64,
    pub lambda: f64,
    pub omega_c: Option<f64>,
    pub k_max: usize,
    pub window_halfwidth: f64,
    pub seed: u64,
    pub scheme: SamplingScheme,
    pub jitter: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        BathSpec {
            gamma0: 0.1,
            lambda: 0.5,
            omega_c: None,
            k_max: 200,
            window_halfwidth: 20.0,
            seed: 7,
            scheme: SamplingScheme::IidUniform,
            jitter: 1.0,
        }
    }
}

impl BathSpec {
    /// Concrete bath parameters with the centre frequency pinned.
    pub fn resolve(&self, mean_frequency: f64) -> BathParams {
        BathParams {
            gamma0: self.gamma0,
            lambda: self.lambda,
            omega_c: self.omega_c.unwrap_or(mean_frequency),
            k_max: self.k_max,
            window_halfwidth: self.window_halfwidth,
            seed: self.seed,
            scheme: self.scheme,
            jitter: self.jitter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.omega_c {
            if !w.is_finite() {
                return Err(Error::config("bath.omega_c", format!("must be finite, got {w}")));
            }
        }
        // centre placeholder: the remaining fields validate independently
        self.resolve(0.0).validate()
    }
}

/// One initial ring state: vacuum amplitude plus per-mode amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default = "zero_amplitude")]
    pub c0: C64,
    pub c: Vec<C64>,
}

fn zero_amplitude() -> C64 {
    C64::new(0.0, 0.0)
}

impl StateSpec {
    /// Squared norm `|c0|^2 + sum |c_n|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.c.len() != n {
            return Err(Error::config(
                "initial_pair",
                format!("state has {} mode amplitudes, ring has {n}", self.c.len()),
            ));
        }
        if !self.c0.is_finite() || self.c.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("initial_pair", "amplitudes must be finite"));
        }
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::config(
                "initial_pair",
                format!("squared norm {norm} deviates from one beyond 1e-6"),
            ));
        }
        Ok(())
    }

    /// Exactly normalized copy; configs are accepted with up to `1e-6`
    /// norm slack, the dynamics demand much better.
    pub fn normalized(&self) -> StateSpec {
        let s = 1.0 / self.norm_sqr().sqrt();
        StateSpec {
            c0: self.c0 * s,
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    /// The default orthogonal pair `(|g> +- |1>) / sqrt(2)`: maximally
    /// distinguishable and sensitive to both decay and dephasing.
    pub fn default_pair(n: usize) -> (StateSpec, StateSpec) {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let make = |sign: f64| {
            let mut c = vec![C64::new(0.0, 0.0); n];
            c[0] = C64::new(sign * a, 0.0);
            StateSpec {
                c0: C64::new(a, 0.0),
                c,
            }
        };
        (make(1.0), make(-1.0))
    }
}

/// Output locations and optional plot emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub basename: String,
    pub svg: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("."),
            basename: "flow".into(),
            svg: false,
        }
    }
}

/// Complete description of one information-flow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainParams,
    pub convention: FrequencyConvention,
    pub bath: BathSpec,
    pub evolve: EvolveConfig,
    pub engine: Engine,
    pub kernel_variant: KernelVariant,
    /// `None` selects the default pair from [`StateSpec::default_pair`].
    pub initial_pair: Option<(StateSpec, StateSpec)>,
    pub deadband: f64,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chain: ChainParams {
                n: 50,
                j1: -1.0,
                j2: 1.0,
                dm: 0.5,
                b: 0.0,
            },
            convention: FrequencyConvention::default(),
            bath: BathSpec::default(),
            evolve: EvolveConfig::default(),
            engine: Engine::default(),
            kernel_variant: KernelVariant::default(),
            initial_pair: None,
            deadband: DEFAULT_DEADBAND,
            output: OutputSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.bath.validate()?;
        self.evolve.validate()?;
        if self.engine == Engine::Analytic3 && self.chain.n != 3 {
            return Err(Error::config(
                "engine",
                format!("analytic3 requires a 3-site ring, got n = {}", self.chain.n),
            ));
        }
        if let Some((first, second)) = &self.initial_pair {
            first.validate(self.chain.n)?;
            second.validate(self.chain.n)?;
        }
        if !(self.deadband.is_finite() && self.deadband >= 0.0) {
            return Err(Error::config(
                "deadband",
                format!("must be nonnegative, got {}", self.deadband),
            ));
        }
        if self.output.basename.is_empty() {
            return Err(Error::config("output.basename", "must not be empty"));
        }
        Ok(())
    }

    /// The initial pair actually used: configured or default, exactly
    /// normalized.
    pub fn resolved_pair(&self) -> (StateSpec, StateSpec) {
        match &self.initial_pair {
            Some((a, b)) => (a.normalized(), b.normalized()),
            None => StateSpec::default_pair(self.chain.n),
        }
    }
}

/// Which scalar a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Magnetic field `chain.b`.
    B,
    /// Chirality drive `chain.dm`.
    D,
    /// Bath width `bath.lambda`.
    Lambda,
    /// Bath coupling `bath.gamma0`.
    Gamma0,
}

/// Bath realisation policy across sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Same seed everywhere: identical draw stream at every point.
    #[default]
    Shared,
    /// Seed offset by the point index: independent realisations.
    Resample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default)]
    pub seed_policy: SeedPolicy,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("sweep.values", "must not be empty"));
        }
        for &v in &self.values {
            if !v.is_finite() {
                return Err(Error::config("sweep.values", format!("non-finite value {v}")));
            }
            match self.parameter {
                SweepParameter::Lambda if v <= 0.0 => {
                    return Err(Error::config(
                        "sweep.values",
                        format!("lambda must stay positive, got {v}"),
                    ));
                }
                SweepParameter::Gamma0 if v < 0.0 => {
                    return Err(Error::config(
                        "sweep.values",
                        format!("gamma0 must stay nonnegative, got {v}"),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The base run with point `index` of the sweep applied.
    pub fn apply(&self, base: &RunConfig, index: usize) -> RunConfig {
        let mut cfg = base.clone();
        let value = self.values[index];
        match self.parameter {
            SweepParameter::B => cfg.chain.b = value,
            SweepParameter::D => cfg.chain.dm = value,
            SweepParameter::Lambda => cfg.bath.lambda = value,
            SweepParameter::Gamma0 => cfg.bath.gamma0 = value,
        }
        if self.seed_policy == SeedPolicy::Resample {
            cfg.bath.seed = base.bath.seed.wrapping_add(index as u64);
        }
        cfg
    }
}

/// A base run plus the sweep applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub run: RunConfig,
    pub sweep: SweepSpec,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        self.sweep.validate()
    }
}

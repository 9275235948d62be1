//! Closed memory-kernel dynamics of the ring amplitudes and their analytic
//! Laplace-domain solution.
//!
//! Integrating out a Lorentzian bath leaves the ring amplitudes alone with
//! an exponential memory kernel.  Two printed forms of that closed equation
//! circulate and they are not equivalent, so both are implemented as
//! variants:
//!
//! * [`KernelVariant::CrossModes`] (default): each amplitude is driven by
//!   the memory integrals of the *other* channels, with an imaginary
//!   prefactor and kernel phase `omega_m + omega_c`.
//! * [`KernelVariant::AllModes`]: every channel, including the self term,
//!   feeds a shared drive with a real prefactor; the kernel phase is
//!   referenced to the ground frequency, `omega_g + omega_m - omega_c`.
//!
//! The Volterra equation is integrated exactly through auxiliary variables
//! (the exponential kernel makes the memory integral itself obey an ODE).
//! Independently, the Laplace transform turns the same dynamics into a
//! linear system solved by Cramer's rule; amplitudes come back through
//! residues at the poles of the resulting rational functions, including
//! multiple poles via truncated Taylor quotients.  The two routes serve as
//! mutual oracles.

use serde::Serialize;

use crate::bath::BathParams;
use crate::model::SystemSpectrum;
use crate::ode::{self, AdaptiveOptions};
use crate::poly::{self, Poly};
use crate::{C64, Error, Result};

/// Relative merge radius for root clustering in [`find_poles`].
pub const DEFAULT_CLUSTERING_EPS: f64 = 1e-8;

/// Poles with real part above this are flagged as growing modes.
const STABILITY_TOL: f64 = 1e-8;

/// Relative threshold below which a numerator value at a pole counts as a
/// pole-zero cancellation.
const CANCELLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelVariant {
    /// Drive from the other channels only; imaginary coupling prefactor.
    #[default]
    CrossModes,
    /// Shared drive over all channels; real coupling prefactor and
    /// ground-referenced kernel phases.
    AllModes,
}

/// Parameters of the closed kernel equation for `N` ring channels.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct KernelParams {
    pub gamma0: f64,
    pub lambda: f64,
    pub omega_c: f64,
    /// Ring channel frequencies entering the kernel phases.
    pub omega_m: Vec<f64>,
    /// Ground-level frequency; enters only the all-modes phases.
    pub omega_g: f64,
    pub variant: KernelVariant,
}

impl KernelParams {
    /// Ties the kernel to the bath and spectrum used by the full propagator.
    pub fn from_parts(
        bath: &BathParams,
        spectrum: &SystemSpectrum,
        variant: KernelVariant,
    ) -> Self {
        KernelParams {
            gamma0: bath.gamma0,
            lambda: bath.lambda,
            omega_c: bath.omega_c,
            omega_m: spectrum.frequencies.clone(),
            omega_g: spectrum.ground_energy,
            variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0.is_finite() && self.gamma0 >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "gamma0",
                message: format!("must be nonnegative, got {}", self.gamma0),
            });
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter {
                field: "lambda",
                message: format!("must be positive, got {}", self.lambda),
            });
        }
        if !(self.omega_c.is_finite() && self.omega_g.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "omega_c",
                message: "centre and ground frequencies must be finite".into(),
            });
        }
        if self.omega_m.is_empty() || self.omega_m.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "omega_m",
                message: "need a nonempty list of finite channel frequencies".into(),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.omega_m.len()
    }

    /// Kernel amplitude `u = gamma0 * lambda / 2`.
    pub fn coupling_scale(&self) -> f64 {
        self.gamma0 * self.lambda / 2.0
    }

    /// Oscillation rate of channel `m`'s kernel in the active variant.
    fn phase_rate(&self, m: usize) -> f64 {
        match self.variant {
            KernelVariant::CrossModes => self.omega_m[m] + self.omega_c,
            KernelVariant::AllModes => self.omega_g + self.omega_m[m] - self.omega_c,
        }
    }

    /// `lambda + i * phase`, the decay constant of channel `m`'s auxiliary
    /// memory variable; also the linear factor in its Laplace transform.
    fn decay_constant(&self, m: usize) -> C64 {
        C64::new(self.lambda, self.phase_rate(m))
    }

    /// Prefactor multiplying the summed memory variables in `dc_n/dt`.
    fn drive_prefactor(&self) -> C64 {
        let u = self.coupling_scale();
        match self.variant {
            KernelVariant::CrossModes => C64::new(0.0, -u),
            KernelVariant::AllModes => C64::new(-u, 0.0),
        }
    }
}

/// Retarded memory kernel of channel `m` (cross-modes form),
/// `-(gamma0 lambda / 2) exp[-(i(omega_m + omega_c) + lambda) dt]`.
///
/// Only the causal branch `dt >= 0` enters the dynamics.  The all-modes
/// variant uses an internal sign and phase variation of this kernel.
pub fn memory_kernel(m: usize, dt: f64, params: &KernelParams) -> Result<C64> {
    if m >= params.omega_m.len() {
        return Err(Error::IndexOutOfRange {
            what: "kernel channel",
            index: m,
            len: params.omega_m.len(),
        });
    }
    let u = params.coupling_scale();
    let a = C64::new(params.lambda, params.omega_m[m] + params.omega_c);
    Ok(-u * (-a * dt).exp())
}

/// Ring amplitudes sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTrajectory {
    pub times: Vec<f64>,
    /// `c[i][n]`: channel `n` at `times[i]`.
    pub c: Vec<Vec<C64>>,
}

impl KernelTrajectory {
    /// `sum_n |c_n|^2` at sample `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.c[i].iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Integrates the memory-kernel equation on `n_samples` uniform points of
/// `[0, t_max]`.
///
/// The exponential kernel is eliminated exactly: the memory integral of
/// channel `m` obeys `y_m' = -(lambda + i phase_m) y_m + c_m` with
/// `y_m(0) = 0`, so the integro-differential system becomes a `2N` ODE.
pub fn evolve_volterra(
    c_init: &[C64],
    params: &KernelParams,
    t_max: f64,
    n_samples: usize,
) -> Result<KernelTrajectory> {
    params.validate()?;
    let n = params.n();
    if c_init.len() != n {
        return Err(Error::ShapeMismatch {
            message: format!(
                "initial state has {} channels but the kernel has {n}",
                c_init.len()
            ),
        });
    }
    let sector: f64 = c_init.iter().map(|a| a.norm_sqr()).sum();
    if sector > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter {
            field: "c_init",
            message: format!("excited-sector population {sector} exceeds one"),
        });
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter {
            field: "t_max",
            message: format!("must be positive and finite, got {t_max}"),
        });
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            message: format!("need at least 2 samples, got {n_samples}"),
        });
    }

    let times = linspace(t_max, n_samples);
    let pref = params.drive_prefactor();
    let skip_self = params.variant == KernelVariant::CrossModes;
    let decay: Vec<C64> = (0..n).map(|m| params.decay_constant(m)).collect();

    let mut y0 = c_init.to_vec();
    y0.resize(2 * n, C64::new(0.0, 0.0));
    let samples = ode::integrate(
        |_, y, dy| {
            let drive_sum: C64 = y[n..].iter().sum();
            for i in 0..n {
                let drive = if skip_self { drive_sum - y[n + i] } else { drive_sum };
                dy[i] = pref * drive;
            }
            for m in 0..n {
                dy[n + m] = -decay[m] * y[n + m] + y[m];
            }
        },
        &y0,
        0.0,
        &times,
        &AdaptiveOptions::default(),
    )?;

    let c = samples
        .into_iter()
        .map(|mut y| {
            y.truncate(n);
            y
        })
        .collect();
    Ok(KernelTrajectory { times, c })
}

fn linspace(t_max: f64, n_samples: usize) -> Vec<f64> {
    let h = t_max / (n_samples - 1) as f64;
    (0..n_samples)
        .map(|i| if i + 1 == n_samples { t_max } else { i as f64 * h })
        .collect()
}

/// Degree-6 characteristic polynomial of the three-channel kernel system in
/// its printed closed form,
/// `A B C p^3 - u^2 (A + B + C) p + 2 u^3`,
/// where `A_m(p) = p + lambda + i(omega_m + omega_c)`.
///
/// This reproduces the published closed form verbatim.  Note it is *not*
/// the determinant the default variant's dynamics produce (their transform
/// carries an extra imaginary unit on the coupling); the analytic solver
/// below builds its system from the actual dynamics instead.
pub fn characteristic_numerator(params: &KernelParams) -> Result<Poly> {
    params.validate()?;
    if params.n() != 3 {
        return Err(Error::ShapeMismatch {
            message: format!("closed form requires 3 channels, got {}", params.n()),
        });
    }
    let u = params.coupling_scale();
    let factor = |m: usize| {
        Poly::new(vec![
            C64::new(params.lambda, params.omega_m[m] + params.omega_c),
            C64::new(1.0, 0.0),
        ])
    };
    let (a, b, c) = (factor(0), factor(1), factor(2));
    let abc = &(&a * &b) * &c;
    let cubic = Poly::new(vec![
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ]);
    let sum = &(&a + &b) + &c;
    let linear = Poly::new(vec![C64::new(0.0, 0.0), C64::new(u * u, 0.0)]);
    let tail = Poly::constant(C64::new(2.0 * u * u * u, 0.0));
    Ok(&(&(&abc * &cubic) - &(&sum * &linear)) + &tail)
}

/// Printed characteristic function `D(p)`, the closed-form numerator over
/// `A(p) B(p) C(p)`.  At an exact zero of the prefactor the finite
/// numerator value is returned instead.
pub fn build_dp(p: C64, params: &KernelParams) -> Result<C64> {
    let numerator = characteristic_numerator(params)?;
    let mut abc = C64::new(1.0, 0.0);
    for m in 0..3 {
        abc *= p + C64::new(params.lambda, params.omega_m[m] + params.omega_c);
    }
    let num = numerator.eval(p);
    if abc == C64::new(0.0, 0.0) {
        return Ok(num);
    }
    Ok(num / abc)
}

/// Roots of a polynomial merged into poles with multiplicities.
///
/// Roots closer than `clustering_eps` (relative) are merged transitively;
/// each cluster is reported at its mean, then polished by Newton iteration
/// on the derivative of matching order, where the root is simple.  Poles
/// come back sorted by real part, then imaginary part.
pub fn find_poles(coeffs: &[C64], clustering_eps: f64) -> Result<(Vec<C64>, Vec<usize>)> {
    match coeffs.last() {
        None => {
            return Err(Error::InvalidParameter {
                field: "coeffs",
                message: "empty coefficient list".into(),
            });
        }
        Some(lead) if *lead == C64::new(0.0, 0.0) => {
            return Err(Error::InvalidParameter {
                field: "coeffs",
                message: "leading coefficient must be nonzero".into(),
            });
        }
        _ => {}
    }
    if !(clustering_eps.is_finite() && clustering_eps > 0.0) {
        return Err(Error::InvalidParameter {
            field: "clustering_eps",
            message: format!("must be positive, got {clustering_eps}"),
        });
    }
    let roots = crate::linalg::polynomial_roots(coeffs)?;
    let poly = Poly::new(coeffs.to_vec());
    let (mut poles, mults) = cluster_roots(&roots, clustering_eps);
    for (pole, &mu) in poles.iter_mut().zip(&mults) {
        *pole = polish_root(&poly, *pole, mu);
    }
    let mut order: Vec<usize> = (0..poles.len()).collect();
    order.sort_by(|&i, &j| {
        (poles[i].re, poles[i].im)
            .partial_cmp(&(poles[j].re, poles[j].im))
            .expect("finite poles")
    });
    Ok((
        order.iter().map(|&i| poles[i]).collect(),
        order.iter().map(|&i| mults[i]).collect(),
    ))
}

fn cluster_roots(roots: &[C64], eps: f64) -> (Vec<C64>, Vec<usize>) {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0f64.max(roots[i].norm()).max(roots[j].norm());
            if (roots[i] - roots[j]).norm() <= eps * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut sums: Vec<(C64, usize)> = vec![(C64::new(0.0, 0.0), 0); n];
    for (i, &root) in roots.iter().enumerate() {
        let r = find(&mut parent, i);
        sums[r].0 += root;
        sums[r].1 += 1;
    }
    let mut poles = Vec::new();
    let mut mults = Vec::new();
    for (sum, count) in sums {
        if count > 0 {
            poles.push(sum / count as f64);
            mults.push(count);
        }
    }
    (poles, mults)
}

/// A multiplicity-`mu` root of `p` is a simple root of the `(mu-1)`-th
/// derivative, where Newton converges quadratically; companion-matrix
/// estimates of multiple roots are only accurate to a fractional power of
/// machine epsilon, so this recovers the lost digits.
fn polish_root(p: &Poly, start: C64, mu: usize) -> C64 {
    let mut q = p.clone();
    for _ in 1..mu {
        q = q.derivative();
    }
    let dq = q.derivative();
    let mut x = start;
    for _ in 0..8 {
        let f = q.eval(x);
        let df = dq.eval(x);
        if df == C64::new(0.0, 0.0) {
            break;
        }
        let step = f / df;
        x -= step;
        if step.norm() <= 1e-16 * x.norm().max(1.0) {
            break;
        }
    }
    // reject a polish that wandered off towards another root
    if (x - start).norm() > 1e-2 * start.norm().max(1.0) {
        start
    } else {
        x
    }
}

/// Pole expansion of a vector of rational functions sharing one denominator.
///
/// Channel `i` inverts to `sum_j e^{p_j t} sum_r residues[i][j][r] t^r / r!`.
#[derive(Debug, Clone, Serialize)]
pub struct RationalSolution {
    pub poles: Vec<C64>,
    pub multiplicities: Vec<usize>,
    /// `residues[channel][pole][r]` multiplies `t^r e^{p t} / r!`.
    pub residues: Vec<Vec<Vec<C64>>>,
    /// Indices into `poles` with real part above the stability tolerance.
    pub unstable_poles: Vec<usize>,
    /// `(channel, pole)` pairs where the numerator vanishes at the pole.
    pub cancellations: Vec<(usize, usize)>,
}

impl RationalSolution {
    /// Inverse transform of channel `i` at time `t >= 0`.
    pub fn eval(&self, i: usize, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, &pole) in self.poles.iter().enumerate() {
            let mut term = C64::new(0.0, 0.0);
            let mut weight = 1.0; // t^r / r!
            for (r, &coeff) in self.residues[i][j].iter().enumerate() {
                term += coeff * weight;
                weight *= t / (r + 1) as f64;
            }
            acc += term * (pole * t).exp();
        }
        acc
    }

    /// Sum of plain residues of channel `i`; equals the initial value by
    /// the inverse transform at `t = 0`.
    pub fn initial_value(&self, i: usize) -> C64 {
        self.residues[i]
            .iter()
            .map(|terms| terms.first().copied().unwrap_or(C64::new(0.0, 0.0)))
            .sum()
    }

    pub fn n_channels(&self) -> usize {
        self.residues.len()
    }
}

/// Builds the pole expansion of `nums[i] / den` for all channels.
pub fn rational_solution(
    nums: &[Poly],
    den: &Poly,
    clustering_eps: f64,
) -> Result<RationalSolution> {
    let deg = den.degree().ok_or_else(|| Error::InvalidParameter {
        field: "den",
        message: "denominator must be nonzero".into(),
    })?;
    let (poles, multiplicities) = find_poles(den.coeffs(), clustering_eps)?;
    let found: usize = multiplicities.iter().sum();
    if found != deg {
        return Err(Error::numeric(format!(
            "pole search recovered {found} of {deg} roots"
        )));
    }

    let mut residues = vec![Vec::with_capacity(poles.len()); nums.len()];
    let mut unstable_poles = Vec::new();
    let mut cancellations = Vec::new();
    for (j, (&pole, &mu)) in poles.iter().zip(&multiplicities).enumerate() {
        if pole.re > STABILITY_TOL {
            unstable_poles.push(j);
        }
        // deflate the pole out, leaving a denominator regular there
        let mut q = den.clone();
        for _ in 0..mu {
            q = q.deflate(pole).0;
        }
        for (i, num) in nums.iter().enumerate() {
            if num.is_zero()
                || magnitude_bound(num, pole) * CANCELLATION_TOL >= num.eval(pole).norm()
            {
                cancellations.push((i, j));
            }
            let h = poly::series_quotient(num, &q, pole, mu)?;
            // h_k / (p - pole)^{mu - k} inverts to h_k t^{mu-k-1} e^{pt} / (mu-k-1)!
            let terms: Vec<C64> = (0..mu).map(|r| h[mu - 1 - r]).collect();
            residues[i].push(terms);
        }
    }
    Ok(RationalSolution {
        poles,
        multiplicities,
        residues,
        unstable_poles,
        cancellations,
    })
}

/// `sum_k |a_k| |p|^k`, an upper bound on `|poly(p)|` used as the relative
/// scale for cancellation detection.
fn magnitude_bound(p: &Poly, at: C64) -> f64 {
    let r = at.norm();
    let mut acc = 0.0;
    let mut rk = 1.0;
    for a in p.coeffs() {
        acc += a.norm() * rk;
        rk *= r;
    }
    acc
}

/// Scaled Laplace-domain system matrix of the active variant.
///
/// The raw system has diagonal `p` (plus a self term for all-modes) and
/// off-diagonal entries proportional to `1/A_m(p)`; scaling column `m` by
/// `A_m` clears the denominators, so channel `i` solves to
/// `A_i * det(M_i) / det(M)` with `M_i` the matrix with column `i` replaced
/// by the initial data.
fn scaled_matrix(params: &KernelParams) -> Vec<Vec<Poly>> {
    let n = params.n();
    let u = params.coupling_scale();
    // coupling entry after scaling: minus the drive prefactor
    let s = -params.drive_prefactor();
    let p_poly = Poly::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    (0..n)
        .map(|row| {
            (0..n)
                .map(|col| {
                    if row == col {
                        let a = Poly::new(vec![params.decay_constant(col), C64::new(1.0, 0.0)]);
                        let diag = &p_poly * &a;
                        match params.variant {
                            KernelVariant::CrossModes => diag,
                            KernelVariant::AllModes => {
                                &diag + &Poly::constant(C64::new(u, 0.0))
                            }
                        }
                    } else {
                        Poly::constant(s)
                    }
                })
                .collect()
        })
        .collect()
}

/// Pole expansion plus sampled trajectory from the analytic route.
#[derive(Debug, Clone)]
pub struct AnalyticRun {
    pub solution: RationalSolution,
    pub trajectory: KernelTrajectory,
}

/// Solves the kernel dynamics for an arbitrary initial vector by Cramer's
/// rule in the Laplace domain and residue inversion.
pub fn analytic_solution(
    c_init: &[C64],
    params: &KernelParams,
    times: &[f64],
) -> Result<AnalyticRun> {
    params.validate()?;
    let n = params.n();
    if c_init.len() != n {
        return Err(Error::ShapeMismatch {
            message: format!(
                "initial state has {} channels but the kernel has {n}",
                c_init.len()
            ),
        });
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Grid {
            message: "analytic inversion needs finite times t >= 0".into(),
        });
    }

    let matrix = scaled_matrix(params);
    let den = poly::det(&matrix)?;
    let nums: Vec<Poly> = (0..n)
        .map(|i| {
            let mut replaced = matrix.clone();
            for (row, &c0) in replaced.iter_mut().zip(c_init) {
                row[i] = Poly::constant(c0);
            }
            let a_i = Poly::new(vec![params.decay_constant(i), C64::new(1.0, 0.0)]);
            Ok(&poly::det(&replaced)? * &a_i)
        })
        .collect::<Result<_>>()?;

    let solution = rational_solution(&nums, &den, DEFAULT_CLUSTERING_EPS)?;
    let c = times
        .iter()
        .map(|&t| (0..n).map(|i| solution.eval(i, t)).collect())
        .collect();
    Ok(AnalyticRun {
        solution,
        trajectory: KernelTrajectory {
            times: times.to_vec(),
            c,
        },
    })
}

/// Three-channel analytic solution with the canonical initial data
/// `(c1_0, 0, 0)`.
pub fn analytic_residue_solution(
    c1_0: C64,
    params: &KernelParams,
    times: &[f64],
) -> Result<AnalyticRun> {
    if params.omega_m.len() != 3 {
        return Err(Error::ShapeMismatch {
            message: format!(
                "analytic three-channel path requires 3 channels, got {}",
                params.omega_m.len()
            ),
        });
    }
    let zero = C64::new(0.0, 0.0);
    analytic_solution(&[c1_0, zero, zero], params, times)
}

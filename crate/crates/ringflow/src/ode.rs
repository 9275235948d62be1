//! Adaptive embedded Runge-Kutta integration for complex first-order systems.
//!
//! The stepper is the Dormand-Prince 5(4) pair with FSAL, a PI step-size
//! controller, and cubic Hermite dense output used to land exactly on the
//! caller's sample grid without constraining the step sequence.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Integrator options.  `rel_tol`/`abs_tol` weigh the local error test per
/// component as `|e_i| / (abs_tol + rel_tol·max(|y_i|, |y'_i|))`.
#[derive(Debug, Clone)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
    /// Initial step size; `None` selects one automatically.
    pub initial_step: Option<f64>,
}

/// The controller runs this much tighter than the requested tolerance, so
/// that the cubic interpolation error (O(h⁴), i.e. O(tol^(4/5)) at the
/// naturally selected step size) stays below the requested tolerance at the
/// delivered sample points.
const INTERP_SAFETY: f64 = 1e-2;

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 50_000_000,
            initial_step: None,
        }
    }
}

impl AdaptiveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite())
            || !(self.abs_tol >= 0.0 && self.abs_tol.is_finite())
        {
            return Err(Error::InvalidParameter {
                field: "rel_tol/abs_tol",
                message: format!(
                    "need rel_tol > 0 and abs_tol ≥ 0, got {} / {}",
                    self.rel_tol, self.abs_tol
                ),
            });
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (row 7 of `A`) minus the embedded fourth-order ones.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `y' = rhs(t, y)` from `t0`, returning the solution at each of
/// the ascending `samples` (all ≥ `t0`).
pub fn integrate<F>(
    mut rhs: F,
    y0: &[C64],
    t0: f64,
    samples: &[f64],
    opts: &AdaptiveOptions,
) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    opts.validate()?;
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    for w in samples.windows(2) {
        // partial_cmp so a NaN sample time is rejected, not let through
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Grid {
                message: format!("sample times must be strictly ascending: {} !> {}", w[1], w[0]),
            });
        }
    }
    if samples[0] < t0 {
        return Err(Error::Grid {
            message: format!("first sample {} precedes t0 = {t0}", samples[0]),
        });
    }
    if !samples.iter().all(|t| t.is_finite()) {
        return Err(Error::Grid {
            message: "sample times must be finite".into(),
        });
    }

    let n = y0.len();
    let rel = opts.rel_tol * INTERP_SAFETY;
    let abs = opts.abs_tol * INTERP_SAFETY;
    let t_end = *samples.last().unwrap();
    let mut out = Vec::with_capacity(samples.len());
    let mut si = 0;
    while si < samples.len() && samples[si] <= t0 {
        out.push(y0.to_vec());
        si += 1;
    }
    if si == samples.len() {
        return Ok(out);
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut y_stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    {
        let (k0, _) = k.split_at_mut(1);
        rhs(t, &y, &mut k0[0]);
    }

    let mut h = match opts.initial_step {
        Some(h0) if h0 > 0.0 && h0.is_finite() => h0.min(t_end - t),
        _ => initial_step(&mut rhs, t, &y, &k[0].clone(), t_end - t, opts),
    };
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;

    while si < samples.len() {
        if steps >= opts.max_steps {
            return Err(Error::Integration {
                t_reached: t,
                message: format!("step budget {} exhausted", opts.max_steps),
            });
        }
        steps += 1;
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::Integration {
                t_reached: t,
                message: format!("step size underflow (h = {h:.3e})"),
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                y_stage[i] = y[i] + h * acc;
            }
            if s == 6 {
                // Row 7 of A holds the 5th-order weights, so this stage
                // input is the solution itself; keep it.
                y_new.copy_from_slice(&y_stage);
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            rhs(t + C[s] * h, &y_stage, &mut tail[0]);
        }

        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[i];
                }
            }
            let sc = abs + rel * y[i].norm().max(y_new[i].norm());
            let r = (h * e).norm() / sc;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt().max(1e-30);

        if err <= 1.0 {
            let t_new = t + h;
            let slack = 4.0 * f64::EPSILON * t_new.abs().max(1.0);
            while si < samples.len() && samples[si] <= t_new + slack {
                let theta = ((samples[si] - t) / h).clamp(0.0, 1.0);
                out.push(hermite(&y, &y_new, &k[0], &k[6], h, theta));
                si += 1;
            }
            t = t_new;
            y.copy_from_slice(&y_new);
            k.swap(0, 6); // FSAL
            let scale = (0.9 * err.powf(-0.14) * err_prev.powf(0.08)).clamp(0.2, 5.0);
            err_prev = err;
            h *= scale;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(out)
}

/// Hairer-style automatic initial step selection.
fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[C64],
    f0: &[C64],
    span: f64,
    opts: &AdaptiveOptions,
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let sc = |y: &[C64], i: usize| {
        INTERP_SAFETY * (opts.abs_tol + opts.rel_tol * y[i].norm())
    };
    let d0 = (y0
        .iter()
        .enumerate()
        .map(|(i, v)| (v.norm() / sc(y0, i)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let d1 = (f0
        .iter()
        .enumerate()
        .map(|(i, v)| (v.norm() / sc(y0, i)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); n];
    rhs(t0 + h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b).norm() / sc(y0, i)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Cubic Hermite interpolant on one accepted step.
fn hermite(y0: &[C64], y1: &[C64], f0: &[C64], f1: &[C64], h: f64, theta: f64) -> Vec<C64> {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    y0.iter()
        .zip(y1)
        .zip(f0.iter().zip(f1))
        .map(|((y0i, y1i), (f0i, f1i))| {
            let d = y1i - y0i;
            y0i + theta * h * f0i
                + t2 * (3.0 * d - h * (2.0 * f0i + f1i))
                + t3 * (-2.0 * d + h * (f0i + f1i))
        })
        .collect()
}

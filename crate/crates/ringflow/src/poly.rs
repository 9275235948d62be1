//! Dense univariate polynomials with complex coefficients.
//!
//! Support machinery for the Laplace-domain solver: characteristic
//! determinants are built as polynomial matrices and expanded by cofactors,
//! and residues at multiple poles need truncated Taylor quotients.
//!
//! Coefficients are stored in ascending powers, `coeffs[k]` multiplying
//! `p^k`.  Trailing coefficients that are exactly zero are trimmed on
//! construction, so cancellations that happen exactly in floating point
//! (integer coefficients, or a term never touched) reduce the degree; tiny
//! roundoff residues are kept as-is.  The zero polynomial is the empty
//! coefficient list and has degree `None`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{C64, Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// exact zeros.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    /// Monic product of linear factors `(p - r)` over the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut acc = Poly::one();
        for &r in roots {
            acc = &acc * &Poly::new(vec![-r, C64::new(1.0, 0.0)]);
        }
        acc
    }

    /// Ascending coefficients; empty for the zero polynomial.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, p: C64) -> C64 {
        let mut acc = ZERO;
        for &a in self.coeffs.iter().rev() {
            acc = acc * p + a;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| a * k as f64)
            .collect();
        Poly::new(d)
    }

    /// Synthetic division by `(p - root)`: returns the quotient and the
    /// remainder, which equals `self.eval(root)`.
    pub fn deflate(&self, root: C64) -> (Poly, C64) {
        let Some((&last, rest)) = self.coeffs.split_last() else {
            return (Poly::zero(), ZERO);
        };
        let mut q = vec![ZERO; rest.len()];
        let mut acc = last;
        for i in (0..rest.len()).rev() {
            q[i] = acc;
            acc = acc * root + rest[i];
        }
        (Poly::new(q), acc)
    }

    /// Recentres the polynomial: returns `q` with `q(p) = self(p + a)`.
    ///
    /// Computed by repeated synthetic division, so `q.coeffs()[k]` is the
    /// `k`-th Taylor coefficient of `self` at `a`.
    pub fn taylor_shift(&self, a: C64) -> Poly {
        let mut rem = Vec::with_capacity(self.coeffs.len());
        let mut cur = self.clone();
        while !cur.is_zero() {
            let (q, r) = cur.deflate(a);
            rem.push(r);
            cur = q;
        }
        Poly::new(rem)
    }

    /// Small-exponent power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![ZERO; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] = a;
        }
        for (i, &b) in rhs.coeffs.iter().enumerate() {
            out[i] += b;
        }
        Poly::new(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| -a).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Mul<C64> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| a * rhs).collect())
    }
}

/// Determinant of a square polynomial matrix by cofactor expansion.
///
/// Exponential in the matrix size; intended for the small characteristic
/// systems this crate builds (a handful of rows).
pub fn det(matrix: &[Vec<Poly>]) -> Result<Poly> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::ShapeMismatch {
            message: "determinant of an empty matrix".into(),
        });
    }
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::ShapeMismatch {
            message: format!("polynomial matrix is not square ({n} rows)"),
        });
    }
    Ok(det_unchecked(matrix))
}

fn det_unchecked(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero();
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = entry * &det_unchecked(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// First `terms` Taylor coefficients of `num / den` about `at`.
///
/// Requires `den(at) != 0` exactly; near-zeros are the caller's concern
/// (poles are deflated out of `den` before expanding here).
pub fn series_quotient(num: &Poly, den: &Poly, at: C64, terms: usize) -> Result<Vec<C64>> {
    let a = num.taylor_shift(at);
    let b = den.taylor_shift(at);
    let b0 = b.coeffs().first().copied().unwrap_or(ZERO);
    if b0 == ZERO {
        return Err(Error::numeric(
            "series quotient about a zero of the denominator",
        ));
    }
    let coeff = |p: &Poly, k: usize| p.coeffs().get(k).copied().unwrap_or(ZERO);
    let mut c = vec![ZERO; terms];
    for k in 0..terms {
        let mut s = coeff(&a, k);
        for i in 1..=k {
            s -= coeff(&b, i) * c[k - i];
        }
        c[k] = s / b0;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(coeffs: &[f64]) -> Poly {
        Poly::new(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    #[test]
    fn trailing_zeros_trimmed_and_degree() {
        let p = real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.coeffs().len(), 2);
        assert_eq!(Poly::zero().degree(), None);
        assert!(real(&[0.0]).is_zero());
    }

    #[test]
    fn exact_cancellation_reduces_degree() {
        let p = real(&[1.0, 0.0, 1.0]);
        let q = real(&[0.0, 0.0, 1.0]);
        let d = &p - &q;
        assert_eq!(d, Poly::one());
    }

    #[test]
    fn difference_of_squares_is_exact() {
        let f = real(&[1.0, 1.0]);
        let g = real(&[1.0, -1.0]);
        assert_eq!(&f * &g, real(&[1.0, 0.0, -1.0]));
    }

    #[test]
    fn product_evaluates_as_product() {
        let f = Poly::new(vec![c(1.0, -2.0), c(0.5, 0.0), c(0.0, 3.0)]);
        let g = Poly::new(vec![c(-1.0, 0.25), c(2.0, 2.0)]);
        let fg = &f * &g;
        for &p in &[c(0.3, -0.7), c(1.2, 0.0), c(-2.0, 1.5)] {
            let err = (fg.eval(p) - f.eval(p) * g.eval(p)).norm();
            assert!(err < 1e-12, "err = {err}");
        }
    }

    #[test]
    fn derivative_of_cubic() {
        let p = real(&[5.0, 0.0, 0.0, 3.0]);
        assert_eq!(p.derivative(), real(&[0.0, 0.0, 9.0]));
        assert_eq!(Poly::one().derivative(), Poly::zero());
    }

    #[test]
    fn product_rule_holds_exactly_for_integer_coefficients() {
        let f = real(&[1.0, -3.0, 2.0]);
        let g = real(&[4.0, 0.0, 0.0, 1.0]);
        let lhs = (&f * &g).derivative();
        let rhs = &(&f.derivative() * &g) + &(&f * &g.derivative());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn deflate_by_a_root_leaves_zero_remainder() {
        // (x - 2)(x^2 + 1) = x^3 - 2x^2 + x - 2
        let p = real(&[-2.0, 1.0, -2.0, 1.0]);
        let (q, r) = p.deflate(c(2.0, 0.0));
        assert_eq!(r, ZERO);
        assert_eq!(q, real(&[1.0, 0.0, 1.0]));
    }

    #[test]
    fn deflate_remainder_is_the_value() {
        let p = Poly::new(vec![c(1.0, 1.0), c(-2.0, 0.5), c(3.0, 0.0)]);
        let at = c(0.7, -1.1);
        let (q, r) = p.deflate(at);
        assert_eq!(r, p.eval(at));
        // p = (x - at) q + r reconstructs
        let back = &(&Poly::from_roots(&[at]) * &q) + &Poly::constant(r);
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_shift_of_square() {
        // (x + 1)^2 = x^2 + 2x + 1, exactly
        let p = real(&[0.0, 0.0, 1.0]);
        assert_eq!(p.taylor_shift(c(1.0, 0.0)), real(&[1.0, 2.0, 1.0]));
    }

    #[test]
    fn taylor_shift_matches_shifted_evaluation() {
        let p = Poly::new(vec![c(2.0, -1.0), c(0.0, 1.0), c(-0.5, 0.5), c(1.0, 0.0)]);
        let a = c(0.8, -0.3);
        let q = p.taylor_shift(a);
        for &x in &[c(0.0, 0.0), c(1.5, -0.2), c(-0.4, 0.9)] {
            assert!((q.eval(x) - p.eval(x + a)).norm() < 1e-13);
        }
        assert_eq!(p.taylor_shift(ZERO), p);
    }

    #[test]
    fn from_roots_expands() {
        let p = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(p, real(&[2.0, -3.0, 1.0]));
        assert_eq!(Poly::from_roots(&[]), Poly::one());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let p = real(&[1.0, 1.0]);
        assert_eq!(p.pow(3), real(&[1.0, 3.0, 3.0, 1.0]));
        assert_eq!(p.pow(0), Poly::one());
    }

    #[test]
    fn det_two_by_two() {
        let a = real(&[0.0, 1.0]); // x
        let b = real(&[1.0]);
        let m = vec![vec![a.clone(), b.clone()], vec![b.clone(), a.clone()]];
        // x^2 - 1
        assert_eq!(det(&m).unwrap(), real(&[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn det_antidiagonal_sign() {
        let one = Poly::one();
        let m = vec![vec![Poly::zero(), one.clone()], vec![one.clone(), Poly::zero()]];
        assert_eq!(det(&m).unwrap(), &-&Poly::one() * &Poly::one());
    }

    #[test]
    fn det_diagonal_three_by_three() {
        let lin = |r: f64| Poly::from_roots(&[c(r, 0.0)]);
        let z = Poly::zero;
        let m = vec![
            vec![lin(1.0), z(), z()],
            vec![z(), lin(2.0), z()],
            vec![z(), z(), lin(3.0)],
        ];
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        assert_eq!(det(&m).unwrap(), real(&[-6.0, 11.0, -6.0, 1.0]));
    }

    #[test]
    fn det_of_constants_matches_scalar_determinant() {
        let vals = [
            [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 1.0)],
            [c(3.0, 0.0), c(0.5, -0.5), c(1.0, 0.0)],
            [c(0.0, -1.0), c(2.0, 2.0), c(-1.0, 0.0)],
        ];
        let m: Vec<Vec<Poly>> = vals
            .iter()
            .map(|row| row.iter().map(|&v| Poly::constant(v)).collect())
            .collect();
        let got = det(&m).unwrap();
        // rule of Sarrus, written out independently
        let want = vals[0][0] * vals[1][1] * vals[2][2]
            + vals[0][1] * vals[1][2] * vals[2][0]
            + vals[0][2] * vals[1][0] * vals[2][1]
            - vals[0][2] * vals[1][1] * vals[2][0]
            - vals[0][0] * vals[1][2] * vals[2][1]
            - vals[0][1] * vals[1][0] * vals[2][2];
        assert_eq!(got.degree(), Some(0));
        assert!((got.coeffs()[0] - want).norm() < 1e-13);
    }

    #[test]
    fn det_rejects_non_square() {
        let m = vec![vec![Poly::one()], vec![Poly::one()]];
        assert!(matches!(det(&m), Err(Error::ShapeMismatch { .. })));
        let empty: Vec<Vec<Poly>> = Vec::new();
        assert!(matches!(det(&empty), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn series_quotient_geometric() {
        // 1/(1 - x) about 0
        let num = Poly::one();
        let den = real(&[1.0, -1.0]);
        let s = series_quotient(&num, &den, ZERO, 5).unwrap();
        for t in &s {
            assert_eq!(*t, c(1.0, 0.0));
        }
    }

    #[test]
    fn series_quotient_with_shift() {
        // 1/x about 1 is sum (-1)^k (x-1)^k
        let num = Poly::one();
        let den = real(&[0.0, 1.0]);
        let s = series_quotient(&num, &den, c(1.0, 0.0), 6).unwrap();
        for (k, t) in s.iter().enumerate() {
            let want = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(*t, c(want, 0.0));
        }
    }

    #[test]
    fn series_quotient_derivative_counting() {
        // x/(1-x)^2 = sum k x^k
        let num = real(&[0.0, 1.0]);
        let den = real(&[1.0, -1.0]).pow(2);
        let s = series_quotient(&num, &den, ZERO, 6).unwrap();
        for (k, t) in s.iter().enumerate() {
            assert_eq!(*t, c(k as f64, 0.0));
        }
    }

    #[test]
    fn series_quotient_rejects_denominator_zero() {
        let num = Poly::one();
        let den = real(&[0.0, 1.0]);
        assert!(series_quotient(&num, &den, ZERO, 3).is_err());
    }

    proptest! {
        #[test]
        fn mul_is_evaluation_homomorphism(
            fa in proptest::collection::vec(-3.0f64..3.0, 1..5),
            ga in proptest::collection::vec(-3.0f64..3.0, 1..5),
            x in -1.5f64..1.5,
            y in -1.5f64..1.5,
        ) {
            let f = real(&fa);
            let g = real(&ga);
            let p = c(x, y);
            let lhs = (&f * &g).eval(p);
            let rhs = f.eval(p) * g.eval(p);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }
}

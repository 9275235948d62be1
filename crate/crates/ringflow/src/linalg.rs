//! Dense eigen-solvers used by the propagator, the trace-distance metric and
//! the polynomial root finder.
//!
//! Real symmetric problems use an in-house Householder tridiagonalisation
//! followed by implicit-shift QL (the `nalgebra` symmetric solver returns
//! NaN on some sparse inputs with exactly degenerate spectra, which the
//! rank-deficient density differences here hit routinely).  Complex
//! Hermitian eigenvalues are obtained from the real symmetric doubling
//! `[[Re M, −Im M], [Im M, Re M]]`, whose spectrum is that of `M` with every
//! eigenvalue doubled.  General complex eigenvalues (needed for companion
//! matrices of complex polynomials) come from an in-house shifted QR
//! iteration on upper-Hessenberg matrices with complex Givens rotations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix: `(values, vectors)` with
/// columns of `vectors` the eigenvectors, in ascending eigenvalue order.
/// Only the lower triangle of `m` is read.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = check_square(m)?;
    let mut work = m.clone();
    let (mut d, mut e) = tridiagonalize(&mut work, true);
    ql_implicit(&mut d, &mut e, Some(&mut work))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| d[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &work.column(src));
    }
    Ok((values, vectors))
}

/// Eigenvalues of a real symmetric matrix, ascending.  Only the lower
/// triangle of `m` is read.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(m)?;
    let mut work = m.clone();
    let (mut d, mut e) = tridiagonalize(&mut work, false);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn check_square<T>(m: &DMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch {
            message: format!("expected square matrix, got {}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns the diagonal `d` and subdiagonal `e` (`e[0]` unused and zero).
/// With `accumulate` the orthogonal transform replaces `a`; without it the
/// contents of `a` are scratch afterwards.
fn tridiagonalize(a: &mut DMatrix<f64>, accumulate: bool) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut fsum = 0.0;
                for j in 0..=l {
                    if accumulate {
                        a[(j, i)] = a[(i, j)] / h;
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    fsum += e[j] * a[(i, j)];
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    if accumulate {
        d[0] = 0.0;
        for i in 0..n {
            // d[i] still holds the Householder H of step i; zero means the
            // step was skipped and there is nothing to accumulate.
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += a[(i, k)] * a[(k, j)];
                    }
                    for k in 0..i {
                        a[(k, j)] -= g * a[(k, i)];
                    }
                }
            }
            d[i] = a[(i, i)];
            a[(i, i)] = 1.0;
            for j in 0..i {
                a[(j, i)] = 0.0;
                a[(i, j)] = 0.0;
            }
        }
    } else {
        for i in 0..n {
            d[i] = a[(i, i)];
        }
    }
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, rotating the columns
/// of `z` along when present.  Eigenvalues land in `d`, unsorted.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DMatrix<f64>>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let scale = d
        .iter()
        .chain(e.iter())
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                let dd = if dd > 0.0 { dd } else { scale };
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::numeric("QL iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g == 0.0 { 1.0 } else { g }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Deflate without finishing the sweep; the shift already
                    // applied above row i is rolled into d.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues of a complex Hermitian matrix, ascending.  The Hermitian
/// defect of `m` is not checked; only the Hermitian part contributes.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let doubled = doubled_eigenvalues(m)?;
    // Spectrum comes doubled; adjacent sorted pairs are the same eigenvalue.
    Ok(doubled.iter().step_by(2).zip(doubled.iter().skip(1).step_by(2))
        .map(|(a, b)| 0.5 * (a + b))
        .collect())
}

/// `Σ |λ_i|` over the eigenvalues of a complex Hermitian matrix.
pub fn hermitian_abs_eigenvalue_sum(m: &DMatrix<C64>) -> Result<f64> {
    // Each |λ| appears twice in the doubled spectrum; no pairing needed.
    Ok(0.5 * doubled_eigenvalues(m)?.iter().map(|l| l.abs()).sum::<f64>())
}

/// Smallest eigenvalue of a complex Hermitian matrix.
pub fn hermitian_min_eigenvalue(m: &DMatrix<C64>) -> Result<f64> {
    Ok(doubled_eigenvalues(m)?[0])
}

fn doubled_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::ShapeMismatch {
            message: format!("expected square matrix, got {}x{}", n, m.ncols()),
        });
    }
    let mut s = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            s[(i, j)] = z.re;
            s[(n + i, n + j)] = z.re;
            s[(i, n + j)] = -z.im;
            s[(n + i, j)] = z.im;
        }
    }
    symmetric_eigenvalues(&s)
}

/// Roots of the polynomial `Σ coeffs[i] p^i` (ascending coefficients),
/// with multiplicity, as eigenvalues of its companion matrix.  Exact zero
/// leading/trailing coefficients are stripped before factorisation, so
/// exact roots at the origin come out exact.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == C64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::numeric("cannot factor the zero polynomial"));
    }
    let mut lo = 0;
    while coeffs[lo] == C64::new(0.0, 0.0) {
        lo += 1;
    }
    let mut roots = vec![C64::new(0.0, 0.0); lo];
    let degree = hi - 1 - lo;
    if degree == 0 {
        return Ok(roots);
    }
    let lead = coeffs[hi - 1];
    let monic: Vec<C64> = coeffs[lo..hi - 1].iter().map(|c| c / lead).collect();
    let mut companion = DMatrix::<C64>::zeros(degree, degree);
    for i in 0..degree {
        companion[(i, degree - 1)] = -monic[i];
        if i + 1 < degree {
            companion[(i + 1, i)] = C64::new(1.0, 0.0);
        }
    }
    roots.extend(hessenberg_eigenvalues(companion)?);
    Ok(roots)
}

/// Eigenvalues of an upper-Hessenberg complex matrix by shifted explicit QR
/// with Givens rotations and Wilkinson shifts.
pub fn hessenberg_eigenvalues(mut h: DMatrix<C64>) -> Result<Vec<C64>> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::ShapeMismatch {
            message: format!("expected square matrix, got {}x{}", n, h.ncols()),
        });
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut stuck = 0usize;
    let mut budget = 60 * n * n + 200;
    while hi > 0 {
        if budget == 0 {
            return Err(Error::numeric("QR iteration did not converge"));
        }
        budget -= 1;
        // Zero out negligible subdiagonals, then locate the irreducible
        // block [lo, hi) ending at hi-1.
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s > 0.0 { s } else { scale };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            stuck = 0;
            continue;
        }
        if lo == hi - 2 {
            let (l1, l2) = eig2(
                h[(lo, lo)],
                h[(lo, lo + 1)],
                h[(lo + 1, lo)],
                h[(lo + 1, lo + 1)],
            );
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            stuck = 0;
            continue;
        }
        stuck += 1;
        let sigma = if stuck.is_multiple_of(12) {
            // Exceptional shift to break symmetry-induced cycles.
            h[(hi - 1, hi - 1)] + C64::new(0.75 * h[(hi - 1, hi - 2)].norm(), 0.0)
        } else {
            let (l1, l2) = eig2(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            );
            let d = h[(hi - 1, hi - 1)];
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        qr_step(&mut h, lo, hi, sigma);
    }
    Ok(eigs)
}

/// One explicit shifted QR sweep on the block `[lo, hi)`.
fn qr_step(h: &mut DMatrix<C64>, lo: usize, hi: usize, sigma: C64) {
    for j in lo..hi {
        h[(j, j)] -= sigma;
    }
    let mut rots = Vec::with_capacity(hi - lo - 1);
    for j in lo..hi - 1 {
        let (c, s) = givens(h[(j, j)], h[(j + 1, j)]);
        for k in j..hi {
            let a = h[(j, k)];
            let b = h[(j + 1, k)];
            h[(j, k)] = c * a + s * b;
            h[(j + 1, k)] = -s.conj() * a + c * b;
        }
        rots.push((c, s));
    }
    for (j, &(c, s)) in (lo..hi - 1).zip(&rots) {
        // R is upper triangular, so only rows lo..=j+1 touch columns j, j+1.
        for i in lo..(j + 2).min(hi) {
            let a = h[(i, j)];
            let b = h[(i, j + 1)];
            h[(i, j)] = c * a + s.conj() * b;
            h[(i, j + 1)] = -s * a + c * b;
        }
    }
    for j in lo..hi {
        h[(j, j)] += sigma;
    }
}

/// Complex Givens rotation: returns real `c ≥ 0` and complex `s` with
/// `c² + |s|² = 1` such that `[c, s; -s̄, c]·[a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = na.hypot(b.norm());
    (na / r, a * b.conj() / (r * na))
}

/// Eigenvalues of `[[a, b], [c, d]]`.
fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    (half_tr + disc, half_tr - disc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn zero() -> C64 {
        C64::new(0.0, 0.0)
    }

    /// Independent simultaneous-iteration root oracle (Durand-Kerner).
    fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
        let lead = *coeffs.last().unwrap();
        let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
        let d = monic.len() - 1;
        let seed = C64::new(0.4, 0.9);
        let mut z: Vec<C64> = (0..d).map(|j| seed.powu(j as u32 + 1)).collect();
        for _ in 0..500 {
            let mut max_move = 0.0f64;
            for j in 0..d {
                let mut p = monic[d];
                for i in (0..d).rev() {
                    p = p * z[j] + monic[i];
                }
                let mut denom = C64::new(1.0, 0.0);
                for k in 0..d {
                    if k != j {
                        denom *= z[j] - z[k];
                    }
                }
                let step = p / denom;
                z[j] -= step;
                max_move = max_move.max(step.norm());
            }
            if max_move < 1e-14 {
                break;
            }
        }
        z
    }

    fn expand(roots: &[C64]) -> Vec<C64> {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![zero(); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= r * ci;
            }
            c = next;
        }
        c
    }

    fn assert_multiset_close(got: &[C64], want: &[C64], tol: f64) {
        assert_eq!(got.len(), want.len());
        let mut used = vec![false; want.len()];
        for g in got {
            let mut best = None;
            for (i, w) in want.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (g - w).norm();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            let (i, d) = best.unwrap();
            assert!(d <= tol, "root {g} is {d:.2e} from nearest expected {}", want[i]);
            used[i] = true;
        }
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 12;
        let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let m = &a + a.transpose();
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        for i in 0..n {
            let v = vecs.column(i);
            let resid = (&m * v) - vals[i] * v;
            assert!(resid.norm() < 1e-10 * m.norm());
        }
        for i in 1..n {
            assert!(vals[i] >= vals[i - 1]);
        }
    }

    #[test]
    fn sparse_rank_two_hermitian_stays_finite() {
        // Two off-diagonal entries against row 0, one purely imaginary:
        // eigenvalues are ±1 plus a 49-fold zero.  Exercises the massive
        // exact degeneracy that broke the upstream solver.
        let n = 51;
        let mut m = DMatrix::<C64>::zeros(n, n);
        let a = 0.5f64.sqrt();
        m[(0, 6)] = C64::new(a, 0.0);
        m[(6, 0)] = C64::new(a, 0.0);
        m[(0, 33)] = C64::new(0.0, -a);
        m[(33, 0)] = C64::new(0.0, a);
        let vals = hermitian_eigenvalues(&m).unwrap();
        assert!(vals.iter().all(|v| v.is_finite()));
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[n - 1] - 1.0).abs() < 1e-12);
        for v in &vals[1..n - 1] {
            assert!(v.abs() < 1e-12);
        }
        assert!((hermitian_abs_eigenvalue_sum(&m).unwrap() - 2.0).abs() < 1e-12);
        assert!((hermitian_min_eigenvalue(&m).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_diagonal_with_repeated_blocks() {
        // Ten identical 2x2 blocks [[0, a], [a, 0]]: eigenvalues ±a each,
        // all exactly degenerate.
        let n = 20;
        let a = 0.75;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for b in 0..10 {
            m[(2 * b, 2 * b + 1)] = a;
            m[(2 * b + 1, 2 * b)] = a;
        }
        let vals = symmetric_eigenvalues(&m).unwrap();
        for v in &vals[..10] {
            assert!((v + a).abs() < 1e-13, "got {v}");
        }
        for v in &vals[10..] {
            assert!((v - a).abs() < 1e-13, "got {v}");
        }
        let (dv, _) = symmetric_eigen(&m).unwrap();
        for (x, y) in vals.iter().zip(dv.iter()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvalue_only_path_matches_full_decomposition() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for n in [1usize, 2, 3, 8, 17] {
            let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let m = &a + a.transpose();
            let vals = symmetric_eigenvalues(&m).unwrap();
            let (dv, _) = symmetric_eigen(&m).unwrap();
            for (x, y) in vals.iter().zip(dv.iter()) {
                assert!((x - y).abs() < 1e-12 * m.norm().max(1.0));
            }
        }
    }

    #[test]
    fn hermitian_eigenvalues_match_moments() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let n = 9;
        let a = DMatrix::<C64>::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let vals = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(vals.len(), n);
        let tr: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        let tr2: f64 = (&m * &m).diagonal().iter().map(|z| z.re).sum();
        let tr3: f64 = (&m * &m * &m).diagonal().iter().map(|z| z.re).sum();
        assert!((vals.iter().sum::<f64>() - tr).abs() < 1e-11);
        assert!((vals.iter().map(|l| l * l).sum::<f64>() - tr2).abs() < 1e-11);
        assert!((vals.iter().map(|l| l * l * l).sum::<f64>() - tr3).abs() < 1e-10);

        let abs_sum = hermitian_abs_eigenvalue_sum(&m).unwrap();
        assert!((abs_sum - vals.iter().map(|l| l.abs()).sum::<f64>()).abs() < 1e-11);
        let min = hermitian_min_eigenvalue(&m).unwrap();
        assert!((min - vals[0]).abs() < 1e-11);
    }

    #[test]
    fn gram_matrix_is_positive() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let b = DMatrix::<C64>::from_fn(7, 7, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = b.adjoint() * &b;
        assert!(hermitian_min_eigenvalue(&m).unwrap() > -1e-12);
    }

    #[test]
    fn roots_of_low_degree_polynomials() {
        // p - 3
        let r = polynomial_roots(&[C64::new(-3.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert_multiset_close(&r, &[C64::new(3.0, 0.0)], 1e-13);
        // (p - 2)(p + 5) = p² + 3p − 10
        let r = polynomial_roots(&[
            C64::new(-10.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(1.0, 0.0),
        ])
        .unwrap();
        assert_multiset_close(&r, &[C64::new(2.0, 0.0), C64::new(-5.0, 0.0)], 1e-12);
    }

    #[test]
    fn exact_origin_roots_are_stripped() {
        // p²(p − 1) = −p² + p³
        let r = polynomial_roots(&[zero(), zero(), C64::new(-1.0, 0.0), C64::new(1.0, 0.0)])
            .unwrap();
        assert_eq!(r[0], zero());
        assert_eq!(r[1], zero());
        assert!((r[2] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn well_separated_sextic_matches_construction() {
        let want: Vec<C64> = (0..6)
            .map(|k| C64::new(0.9 + 0.2 * k as f64, -0.7 + 0.33 * k as f64))
            .collect();
        let coeffs = expand(&want);
        let got = polynomial_roots(&coeffs).unwrap();
        assert_multiset_close(&got, &want, 1e-10);
    }

    #[test]
    fn random_sextics_match_independent_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..25 {
            let coeffs: Vec<C64> = (0..7)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let got = polynomial_roots(&coeffs).unwrap();
            let want = durand_kerner(&coeffs);
            assert_multiset_close(&got, &want, 1e-8);
        }
    }

    #[test]
    fn double_root_stays_tight() {
        // (p − 1)² (p + 2): the pair splits by ~√ε only.
        let want = [
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(-2.0, 0.0),
        ];
        let got = polynomial_roots(&expand(&want)).unwrap();
        assert_multiset_close(&got, &want, 5e-7);
    }

    #[test]
    fn hermitian_matrix_through_general_solver() {
        // Hermitian input: the general QR path must reproduce the
        // doubling-trick eigenvalues (real, same multiset).
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 6;
        let a = DMatrix::<C64>::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        // Reduce to Hessenberg by brute force: run the solver on the full
        // matrix; it only relies on entries below the first subdiagonal
        // being negligible during deflation, so feed the Hessenberg form
        // obtained from successive Givens eliminations.
        let mut h = m.clone();
        for j in 0..n - 2 {
            for i in (j + 2..n).rev() {
                let (c, s) = super::givens(h[(i - 1, j)], h[(i, j)]);
                for k in 0..n {
                    let x = h[(i - 1, k)];
                    let y = h[(i, k)];
                    h[(i - 1, k)] = c * x + s * y;
                    h[(i, k)] = -s.conj() * x + c * y;
                }
                for k in 0..n {
                    let x = h[(k, i - 1)];
                    let y = h[(k, i)];
                    h[(k, i - 1)] = c * x + s.conj() * y;
                    h[(k, i)] = -s * x + c * y;
                }
            }
        }
        let got = hessenberg_eigenvalues(h).unwrap();
        let want: Vec<C64> = hermitian_eigenvalues(&m)
            .unwrap()
            .into_iter()
            .map(|l| C64::new(l, 0.0))
            .collect();
        assert_multiset_close(&got, &want, 1e-9);
    }
}

//! Small numerical helpers shared by the solvers: Gauss-Newton with a
//! pseudo-inverse step, golden-section search, and simplex utilities.

use nalgebra::{DMatrix, DVector};

/// Tolerance for "sums to one" checks on probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

pub fn is_simplex_vector(v: &[f64], tol: f64) -> bool {
    !v.is_empty()
        && v.iter().all(|&x| x.is_finite() && x >= -tol)
        && (v.iter().sum::<f64>() - 1.0).abs() <= tol.max(SIMPLEX_TOL) * v.len() as f64
}

pub fn uniform(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

pub fn unit(k: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[at] = 1.0;
    v
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_value(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Rescale a nonnegative vector to sum to one.
pub fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Central-difference Jacobian of `f` at `x`. Exact (up to rounding) for
/// polynomials of degree two, which covers every payoff map used here.
pub fn jacobian<F>(f: &F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(x).len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let orig = xp[j];
        xp[j] = orig + h;
        let fp = f(&xp);
        xp[j] = orig - h;
        let fm = f(&xp);
        xp[j] = orig;
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Gauss-Newton iteration with an SVD pseudo-inverse step. Works for
/// square, over- and under-determined systems; in the under-determined case
/// each step is the minimum-norm correction, so the iterate converges to the
/// solution nearest the start point (to first order).
pub fn gauss_newton<F>(f: F, x0: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    if x.is_empty() {
        let r = f(&x);
        return (r.iter().all(|v| v.abs() <= tol)).then_some(x);
    }
    for _ in 0..max_iter {
        let r = f(&x);
        let norm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !norm.is_finite() {
            return None;
        }
        if norm <= tol {
            return Some(x);
        }
        let jac = jacobian(&f, &x, 1e-6);
        let svd = jac.svd(true, true);
        let rhs = DVector::from_vec(r);
        let step = svd.solve(&rhs, 1e-12).ok()?;
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
    }
    let r = f(&x);
    r.iter().all(|v| v.abs() <= tol).then_some(x)
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Real roots of `a x^2 + b x + c = 0` (degenerating gracefully to the
/// linear and constant cases).
pub fn real_roots_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-12 * scale * scale {
        return Vec::new();
    }
    let disc = disc.max(0.0);
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    let mut roots = vec![q / a, c / q];
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-14);
    roots
}

/// Sample a (degree <= 2) univariate polynomial at three points and return
/// its coefficients `(a, b, c)` such that `p(t) = a t^2 + b t + c`.
pub fn quadratic_through<F: Fn(f64) -> f64>(p: F) -> (f64, f64, f64) {
    let f0 = p(0.0);
    let f1 = p(1.0);
    let fm = p(-1.0);
    let a = 0.5 * (f1 + fm) - f0;
    let b = 0.5 * (f1 - fm);
    (a, b, f0)
}

/// Iterate over every nonempty subset of `0..k` as a sorted index list.
pub fn nonempty_subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1u32 << k)).map(move |mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect())
}

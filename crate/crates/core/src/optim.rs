//! Shared numeric search utilities: deterministic direction sets on
//! spheres, a small Nelder–Mead polisher, and sup-over-sphere estimation.
//!
//! Sup-over-sphere values are grid + polish lower bounds of the true
//! supremum; callers apply a stated tolerance on the disadvantaged side
//! of any inequality built from them.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::{vec, vec::Vec};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic per-batch RNG: one master seed, one independent stream
/// per batch index. Reduction order over batches is fixed by the caller.
pub fn batch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Van der Corput radical inverse in the given base, for index `i >= 1`.
fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Low-discrepancy points on the Euclidean unit sphere of `R^k`:
/// Halton points mapped through Box–Muller and normalized. The first
/// `2k` entries are always the signed coordinate directions.
pub fn sphere_directions(k: usize, n: usize) -> Vec<DVector<f64>> {
    assert!(k >= 1 && k <= HALTON_BASES.len());
    let mut dirs = Vec::with_capacity(n.max(2 * k));
    for j in 0..k {
        let mut e = DVector::zeros(k);
        e[j] = 1.0;
        dirs.push(e.clone());
        e[j] = -1.0;
        dirs.push(e);
    }
    if k == 1 {
        return dirs;
    }
    let pairs = k.div_ceil(2);
    let mut idx = 1u64;
    while dirs.len() < n {
        let mut z = DVector::zeros(k);
        for p in 0..pairs {
            let u = radical_inverse(HALTON_BASES[2 * p], idx).max(1e-300);
            let v = radical_inverse(HALTON_BASES[2 * p + 1], idx);
            let r = (-2.0 * u.ln()).sqrt();
            let a = core::f64::consts::TAU * v;
            z[2 * p] = r * a.cos();
            if 2 * p + 1 < k {
                z[2 * p + 1] = r * a.sin();
            }
        }
        idx += 1;
        let nrm = z.norm();
        if nrm > 1e-12 {
            dirs.push(z / nrm);
        }
    }
    dirs
}

/// Nelder–Mead minimization of `f` from `x0` with initial simplex scale
/// `scale`. Deterministic; returns the best vertex and its value.
pub fn nelder_mead<F: FnMut(&DVector<f64>) -> f64>(
    mut f: F,
    x0: &DVector<f64>,
    scale: f64,
    max_iter: usize,
    tol: f64,
) -> (DVector<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = f(x0);
    simplex.push((x0.clone(), fx0));
    for j in 0..n {
        let mut p = x0.clone();
        p[j] += scale;
        let fp = f(&p);
        simplex.push((p, fp));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= tol * (1.0 + best.abs()) {
            break;
        }
        let mut centroid = DVector::zeros(n);
        for v in simplex.iter().take(n) {
            centroid += &v.0;
        }
        centroid /= n as f64;
        let xr = &centroid + (&centroid - &simplex[n].0) * alpha;
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = &centroid + (&centroid - &simplex[n].0) * gamma;
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = &centroid + (&simplex[n].0 - &centroid) * rho;
            let fc = f(&xc);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let x0best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    v.0 = &x0best + (&v.0 - &x0best) * sigma;
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
    simplex.swap_remove(0)
}

/// Default grid size for sup-over-sphere searches.
pub const SPHERE_GRID: usize = 4096;
/// Polish iteration budget per grid candidate.
pub const POLISH_ITERS: usize = 80;

/// Maximize a scale-invariant ratio `f(c)` (well defined for any nonzero
/// coordinate vector `c` of length `k`) over directions: dense grid for
/// `k <= 3`, multi-start over low-discrepancy directions for larger `k`,
/// then Nelder–Mead polish of the leading candidates.
///
/// Returns `(argmax direction, value)`; the value is a lower bound of
/// the true supremum.
pub fn maximize_ratio_over_sphere<F: Fn(&DVector<f64>) -> f64>(
    k: usize,
    grid_n: usize,
    f: F,
) -> (DVector<f64>, f64) {
    let grid = sphere_directions(k, grid_n.max(2 * k));
    let mut scored: Vec<(usize, f64)> = grid
        .iter()
        .enumerate()
        .map(|(i, c)| (i, f(c)))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));
    let mut best_c = grid[scored[0].0].clone();
    let mut best_v = scored[0].1;
    if k == 1 {
        return (best_c, best_v);
    }
    for &(i, _) in scored.iter().take(8) {
        let start = &grid[i];
        let (c, neg) = nelder_mead(
            |c| {
                let n = c.norm();
                if n < 1e-14 {
                    return f64::INFINITY;
                }
                -f(c)
            },
            start,
            0.2,
            POLISH_ITERS,
            1e-12,
        );
        if -neg > best_v {
            best_v = -neg;
            best_c = c.normalize();
        }
    }
    (best_c, best_v)
}

/// Minimize a scale-invariant function over directions; same scheme as
/// [`maximize_ratio_over_sphere`] with the sign flipped.
pub fn minimize_ratio_over_sphere<F: Fn(&DVector<f64>) -> f64>(
    k: usize,
    grid_n: usize,
    f: F,
) -> (DVector<f64>, f64) {
    let (c, v) = maximize_ratio_over_sphere(k, grid_n, |c| -f(c));
    (c, -v)
}

/// Minimize a convex function of `m` free variables (e.g. distance from a
/// point to a subspace in an arbitrary norm): Nelder–Mead from `x0` with
/// shrinking restarts.
pub fn minimize_convex<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x0: &DVector<f64>,
    scale: f64,
) -> (DVector<f64>, f64) {
    let mut x = x0.clone();
    let mut v = f(&x);
    let mut s = scale.max(1e-8);
    for _ in 0..4 {
        let (xn, vn) = nelder_mead(&f, &x, s, 400, 1e-14);
        if vn < v {
            x = xn;
            v = vn;
        }
        s *= 0.1;
    }
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_directions_are_unit_and_deterministic() {
        for k in 1..=4 {
            let a = sphere_directions(k, 64);
            let b = sphere_directions(k, 64);
            assert_eq!(a.len(), b.len());
            for (u, v) in a.iter().zip(&b) {
                assert_eq!(u, v);
                assert!((u.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_min() {
        let f = |x: &DVector<f64>| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let (x, v) = nelder_mead(f, &DVector::from_vec(vec![0.0, 0.0]), 1.0, 500, 1e-15);
        assert!(v < 1e-12, "v={v}");
        assert!((x[0] - 1.5).abs() < 1e-6 && (x[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_handles_nonsmooth_convex() {
        let f = |x: &DVector<f64>| x[0].abs().max(2.0 * (x[1] - 0.25).abs());
        let (_, v) = minimize_convex(f, &DVector::from_vec(vec![1.0, -1.0]), 1.0);
        assert!(v < 1e-9, "v={v}");
    }

    #[test]
    fn ratio_maximization_recovers_linf_functional() {
        // sup over the Euclidean sphere of |c_1 + c_2| / max(|c_1|,|c_2|) is 2.
        let f = |c: &DVector<f64>| (c[0] + c[1]).abs() / c[0].abs().max(c[1].abs());
        let (_, v) = maximize_ratio_over_sphere(2, 512, f);
        assert!((v - 2.0).abs() < 1e-9, "v={v}");
    }
}

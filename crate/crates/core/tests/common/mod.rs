//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's geometry or projection code.

#![allow(dead_code)]

use hybrid_ep::sampling::{self, SampleRng};
use hybrid_ep::Vector;
use nalgebra::DMatrix;

pub fn lp(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(J x)_i = ||x||_p^{2-p} |x_i|^{p-1} sign(x_i)`, straight from the definition.
pub fn duality(x: &[f64], p: f64) -> Vec<f64> {
    let n = lp(x, p);
    if n == 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| n.powf(2.0 - p) * v.abs().powf(p - 1.0) * v.signum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn phi(x: &[f64], y: &[f64], p: f64) -> f64 {
    let (nx, ny) = (lp(x, p), lp(y, p));
    nx * nx - 2.0 * dot(x, &duality(y, p)) + ny * ny
}

/// Generating-set search for `min objective` over `{feasible}`.
///
/// Starts from the best feasible point of a uniform grid on
/// `[center - radius, center + radius]^d`, then polls `±e_i` and the extra
/// `directions` (pass the tangents of linear constraints so that corners do
/// not stall the search), halving the step whenever no poll improves.
pub fn grid_minimize(
    objective: &dyn Fn(&[f64]) -> f64,
    feasible: &dyn Fn(&[f64]) -> bool,
    center: &[f64],
    radius: f64,
    per_axis: usize,
    directions: &[Vec<f64>],
) -> Vec<f64> {
    let d = center.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; d];
    let h = 2.0 * radius / (per_axis - 1) as f64;
    'grid: loop {
        let v: Vec<f64> = (0..d).map(|i| center[i] - radius + h * idx[i] as f64).collect();
        if feasible(&v) {
            let f = objective(&v);
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, v));
            }
        }
        for i in 0..d {
            idx[i] += 1;
            if idx[i] < per_axis {
                continue 'grid;
            }
            idx[i] = 0;
        }
        break;
    }
    let (mut fbest, mut x) = best.expect("no feasible grid point");

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        dirs.push(e.clone());
        e[i] = -1.0;
        dirs.push(e);
    }
    for t in directions {
        let n = dot(t, t).sqrt();
        dirs.push(t.iter().map(|v| v / n).collect());
        dirs.push(t.iter().map(|v| -v / n).collect());
    }
    let mut step = h;
    let floor = 1e-14 * (1.0 + radius);
    while step > floor {
        let mut improved = false;
        for dir in &dirs {
            let cand: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + step * b).collect();
            if feasible(&cand) {
                let f = objective(&cand);
                if f < fbest {
                    fbest = f;
                    x = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    x
}

/// Solution of the box-constrained variational inequality
/// `<y - z, r (M z + q) + z - x> >= 0` for all `y` in `[lower, upper]`,
/// found by enumerating all `3^d` lower/free/upper activity patterns.
/// Returns the unique pattern solution that passes every sign check.
pub fn box_kkt(m: &DMatrix<f64>, q: &Vector, r: f64, x: &Vector, lower: &Vector, upper: &Vector, tol: f64) -> Option<Vector> {
    let d = x.len();
    let a = DMatrix::identity(d, d) + m * r;
    let rhs = x - q * r;
    let mut found: Vec<Vector> = Vec::new();
    for code in 0..3usize.pow(d as u32) {
        // 0 = at lower, 1 = free, 2 = at upper
        let pattern: Vec<usize> = (0..d).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
        let free: Vec<usize> = (0..d).filter(|&i| pattern[i] == 1).collect();
        let mut z = Vector::zeros(d);
        for i in 0..d {
            match pattern[i] {
                0 => z[i] = lower[i],
                2 => z[i] = upper[i],
                _ => {}
            }
        }
        if !free.is_empty() {
            let k = free.len();
            let aff = DMatrix::from_fn(k, k, |i, j| a[(free[i], free[j])]);
            let mut b = Vector::from_fn(k, |i, _| rhs[free[i]]);
            for (ii, &i) in free.iter().enumerate() {
                for j in 0..d {
                    if pattern[j] != 1 {
                        b[ii] -= a[(i, j)] * z[j];
                    }
                }
            }
            let Some(sol) = aff.lu().solve(&b) else { continue };
            for (ii, &i) in free.iter().enumerate() {
                z[i] = sol[ii];
            }
        }
        let g = &a * &z - &rhs;
        let ok = (0..d).all(|i| match pattern[i] {
            0 => g[i] >= -tol,
            2 => g[i] <= tol,
            _ => z[i] >= lower[i] - tol && z[i] <= upper[i] + tol,
        });
        if ok {
            found.push(z);
        }
    }
    // Degenerate patterns (a free coordinate sitting on its bound) may give
    // the same point twice.
    let first = found.first()?.clone();
    found.iter().all(|z| (z - &first).amax() < 1e-9).then_some(first)
}

/// Random `d x d` matrix with positive semidefinite symmetric part: `B B^T`
/// plus a skew part scaled by `skew`.
pub fn random_monotone(rng: &mut SampleRng, d: usize, skew: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| sampling::gaussian(rng, 1)[0]);
    let c = DMatrix::from_fn(d, d, |_, _| sampling::gaussian(rng, 1)[0]);
    &b * b.transpose() * (1.0 / d as f64) + (&c - c.transpose()) * skew
}

pub fn elapsed_ok(start: std::time::Instant, limit_s: f64) -> (f64, bool) {
    let t = start.elapsed().as_secs_f64();
    (t, t < limit_s)
}

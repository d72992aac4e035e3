//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Number of eigenvalues of `(s, m)` below `sigma`: negative pivots of an
/// unpivoted LDL^T of `s - sigma m` (Sylvester's law of inertia).
pub fn count_below(s: &DMatrix<f64>, m: &DMatrix<f64>, sigma: f64) -> usize {
    let n = s.nrows();
    let mut a = s - sigma * m;
    let mut neg = 0;
    for k in 0..n {
        let d = a[(k, k)];
        if d < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = a[(i, k)] / d;
            for j in k + 1..=i {
                a[(i, j)] -= f * a[(j, k)];
            }
        }
    }
    neg
}

/// The `index`-th eigenvalue (0-based, ascending) of `(s, m)` inside `[lo, hi]`.
pub fn bisect(s: &DMatrix<f64>, m: &DMatrix<f64>, index: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(s, m, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &b * b.transpose() + shift * DMatrix::identity(n, n)
}

/// Upper bound on every eigenvalue of the SPD pencil `(s, m)`.
pub fn spectral_bound(s: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    s.abs().row_sum().max() / m.symmetric_eigenvalues().min() * 2.0
}

pub type Arcs = Vec<(f64, f64)>;

/// Outer Steklov set and a nested subset as arclength pairs on a curve of
/// length `l`. Arcs keep at least half their length after trimming.
pub fn nested_pair(rng: &mut ChaCha8Rng, l: f64) -> (Arcs, Arcs) {
    let start = rng.random_range(0.0..1.0);
    let outer: Vec<(f64, f64)> = if rng.random_bool(0.5) {
        let len = rng.random_range(0.25..0.6);
        vec![(start, start + len)]
    } else {
        let a = rng.random_range(0.15..0.3);
        let g = rng.random_range(0.08..0.15);
        let b = rng.random_range(0.15..0.3);
        vec![(start, start + a), (start + a + g, start + a + g + b)]
    };
    let mut inner = Vec::new();
    for (k, &(s, e)) in outer.iter().enumerate() {
        if k > 0 && rng.random_bool(0.25) {
            continue;
        }
        let len = e - s;
        let mut trim = || if rng.random_bool(1.0 / 3.0) { 0.0 } else { rng.random_range(0.05..0.25) * len };
        let (u, w) = (trim(), trim());
        inner.push((s + u, e - w));
    }
    let scale = |v: Vec<(f64, f64)>| v.into_iter().map(|(a, b)| (a * l, b * l)).collect();
    (scale(outer), scale(inner))
}

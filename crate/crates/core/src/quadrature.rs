//! Gauss-Legendre rules and a symmetric triangle rule.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over [a, b] with `panels` composite panels of the `rule`.
pub fn integrate(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = rule;
    let step = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * step;
        let mid = lo + 0.5 * step;
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            s += w * f(mid + 0.5 * step * x);
        }
        total += 0.5 * step * s;
    }
    total
}

/// Degree-5 seven-point rule on the reference triangle, as barycentric
/// coordinates and weights summing to one.
pub fn triangle_rule_7() -> [([f64; 3], f64); 7] {
    let a1 = 0.059_715_871_789_769_8;
    let b1 = 0.470_142_064_105_115_1;
    let a2 = 0.797_426_985_353_087_3;
    let b2 = 0.101_286_507_323_456_3;
    let w0 = 0.225;
    let w1 = 0.132_394_152_788_506_2;
    let w2 = 0.125_939_180_544_827_2;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], w0),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(6);
        let total: f64 = rule.1.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // degree 11 is the exactness limit for six points
        let v = integrate(&rule, 0.0, 1.0, 1, |x| x.powi(11));
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_rule_weights_and_exactness() {
        let rule = triangle_rule_7();
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert!((w - 1.0).abs() < 1e-14);
        // average of x^2 y^2 over the unit right triangle equals 2 * 2!2!/6! = 1/90
        let avg: f64 = rule.iter().map(|(b, w)| w * (b[1] * b[1] * b[2] * b[2])).sum();
        assert!((avg - 1.0 / 90.0).abs() < 1e-14);
    }
}

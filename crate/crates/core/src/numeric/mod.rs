//! Numerical building blocks shared by the solvers.

pub mod interp;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod special;

/// `n` points from `lo` to `hi` inclusive, evenly spaced.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` points from `lo` to `hi` inclusive, evenly spaced in `ln x`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = linspace(a, b, n).into_iter().map(f64::exp).collect();
    if let Some(first) = v.first_mut() {
        *first = lo;
    }
    if let Some(last) = v.last_mut() {
        *last = hi;
    }
    v
}

/// Least-squares power law `y = c * x^p` through points with `y` of one sign.
///
/// Returns `(c, p)` or `None` if the values change sign or vanish.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 2 || y.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return None;
    }
    let sign = y[0].signum();
    if y.iter().any(|v| v.signum() != sign) {
        return None;
    }
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let p = sxy / sxx;
    let c = sign * (my - p * mx).exp();
    Some((c, p))
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_pi(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a % TAU;
    if r > PI {
        r -= TAU;
    } else if r <= -PI {
        r += TAU;
    }
    r
}

/// Kahan–Babuška compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_fit_recovers_exponent() {
        let x = [10.0, 12.0, 15.0, 20.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| -3.0 * v.powf(-2.5)).collect();
        let (c, p) = fit_power_law(&x, &y).unwrap();
        assert!((c + 3.0).abs() < 1e-10 && (p + 2.5).abs() < 1e-12);
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, -1.0]).is_none());
    }

    #[test]
    fn wrap_and_spaces() {
        assert!((wrap_pi(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        let g = logspace(1e-3, 10.0, 5);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[4], 10.0);
        assert!((g[2] - 0.1).abs() < 1e-15);
    }
}

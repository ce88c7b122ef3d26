//! Riccati–Bessel functions and Legendre polynomials.

/// Values and derivatives of the Riccati–Bessel pair at one order.
///
/// `jh = x j_l(x) ~ sin(x - l pi/2)` and `nh = x y_l(x) ~ -cos(x - l pi/2)`.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiBessel {
    pub jh: f64,
    pub djh: f64,
    pub nh: f64,
    pub dnh: f64,
}

/// Riccati–Bessel functions of order `l` at `x > 0`.
///
/// `jh` comes from downward (Miller) recurrence when `x < l` and upward
/// recurrence otherwise; `nh` is always recurred upward. `nh` overflows to
/// infinity for very small `x` at high order; callers treat that as "not
/// yet in the matching region".
pub fn riccati_bessel(l: usize, x: f64) -> RiccatiBessel {
    debug_assert!(x > 0.0);
    let (s, c) = x.sin_cos();

    // nh_l and nh_{l-1}
    let mut n_prev = -c; // order 0
    let mut n_cur = -c / x - s; // order 1
    let (nh, nh_m1) = if l == 0 {
        (n_prev, s) // order -1 stand-in: d/dx(-cos) = sin
    } else {
        for m in 1..l {
            let next = (2 * m + 1) as f64 / x * n_cur - n_prev;
            n_prev = n_cur;
            n_cur = next;
        }
        (n_cur, n_prev)
    };

    let (jh, jh_m1) = if l == 0 {
        (s, c)
    } else if x > l as f64 {
        let mut j_prev = s;
        let mut j_cur = s / x - c;
        for m in 1..l {
            let next = (2 * m + 1) as f64 / x * j_cur - j_prev;
            j_prev = j_cur;
            j_cur = next;
        }
        (j_cur, j_prev)
    } else {
        miller_jh(l, x, s, c)
    };

    let (djh, dnh) = if l == 0 {
        (c, s)
    } else {
        let lf = l as f64;
        (jh_m1 - lf / x * jh, nh_m1 - lf / x * nh)
    };
    RiccatiBessel { jh, djh, nh, dnh }
}

fn miller_jh(l: usize, x: f64, s: f64, c: f64) -> (f64, f64) {
    let start = l + 20 + (10.0 * (l as f64).sqrt()) as usize + x as usize;
    let mut f_next = 0.0;
    let mut f_cur = 1e-200;
    let mut at_l = (0.0, 0.0);
    let mut f0 = 0.0;
    let mut f1 = 0.0;
    // f_{m-1} = (2m+1)/x f_m - f_{m+1}
    let mut m = start;
    while m > 0 {
        let f_prev = (2 * m + 1) as f64 / x * f_cur - f_next;
        f_next = f_cur;
        f_cur = f_prev;
        m -= 1;
        // now f_cur = f_m, f_next = f_{m+1}
        if m == l {
            at_l = (f_cur, 0.0);
        }
        if m + 1 == l {
            at_l.1 = f_cur;
        }
        if m == 1 {
            f1 = f_cur;
        }
        if m == 0 {
            f0 = f_cur;
        }
        if f_cur.abs() > 1e200 {
            let r = 1e-200;
            f_cur *= r;
            f_next *= r;
            at_l.0 *= r;
            at_l.1 *= r;
            f1 *= r;
        }
    }
    let j0 = s;
    let j1 = s / x - c;
    let scale = if j0.abs() >= j1.abs() { j0 / f0 } else { j1 / f1 };
    (at_l.0 * scale, at_l.1 * scale)
}

/// Legendre polynomials `P_0..=P_lmax` at `x` by upward recurrence.
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax >= 1 {
        p.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    // Closed forms for l = 2.
    fn jh2(x: f64) -> f64 {
        (3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x
    }
    fn nh2(x: f64) -> f64 {
        -(3.0 / (x * x) - 1.0) * x.cos() - 3.0 * x.sin() / x
    }

    #[test]
    fn order_two_matches_closed_form_both_regimes() {
        for &x in &[0.3, 1.0, 1.9, 2.5, 7.0, 30.0] {
            let rb = riccati_bessel(2, x);
            assert!((rb.jh - jh2(x)).abs() < 1e-12 * (1.0 + jh2(x).abs()), "x={x}");
            assert!((rb.nh - nh2(x)).abs() < 1e-10 * (1.0 + nh2(x).abs()), "x={x}");
            let hstep = 1e-6;
            let dj = (jh2(x + hstep) - jh2(x - hstep)) / (2.0 * hstep);
            assert!((rb.djh - dj).abs() < 1e-6 * (1.0 + dj.abs()));
        }
    }

    #[test]
    fn wronskian_is_unity() {
        // jh * nh' - jh' * nh = 1
        for l in [0usize, 1, 5, 20, 40] {
            for &x in &[0.5, 3.0, 12.0, 45.0] {
                let rb = riccati_bessel(l, x);
                if !rb.nh.is_finite() || rb.nh.abs() > 1e150 {
                    continue;
                }
                let w = rb.jh * rb.dnh - rb.djh * rb.nh;
                assert!((w - 1.0).abs() < 1e-8, "l={l} x={x} w={w}");
            }
        }
    }

    #[test]
    fn legendre_values() {
        let p = legendre_all(3, 0.5);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[1], 0.5);
        assert!((p[2] - (3.0 * 0.25 - 1.0) / 2.0).abs() < 1e-15);
        assert!((p[3] - (5.0 * 0.125 - 1.5) / 2.0).abs() < 1e-15);
        assert!(legendre_all(30, 1.0).iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
}

//! Dormand–Prince 5(4) integrator for small real systems.
//!
//! The state is a fixed-size array. After every accepted step a callback
//! sees the new state and may rescale it in place (linear problems use this
//! to keep exponentially growing solutions inside floating-point range) or
//! abort the integration.

use std::ops::ControlFlow;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; `f64::INFINITY` for none.
    pub h_max: f64,
    /// Initial |h|; zero selects `|x1 - x0| / 100`.
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            h_init: 0.0,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeFailure {
    StepSizeUnderflow { x: f64 },
    TooManySteps { x: f64 },
    NonFinite { x: f64 },
    Aborted { x: f64, reason: String },
}

impl std::fmt::Display for OdeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OdeFailure::StepSizeUnderflow { x } => write!(f, "step size underflow at x = {x}"),
            OdeFailure::TooManySteps { x } => write!(f, "step budget exhausted at x = {x}"),
            OdeFailure::NonFinite { x } => write!(f, "non-finite state at x = {x}"),
            OdeFailure::Aborted { x, reason } => write!(f, "aborted at x = {x}: {reason}"),
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded fourth-order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

fn max_abs<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// Error control uses a vector-norm scale `atol + rtol * max(|y|_inf)`,
/// which suits oscillatory linear problems whose components pass through
/// zero.
pub fn dopri5<const N: usize, F, C>(
    mut f: F,
    x0: f64,
    x1: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut on_step: C,
) -> Result<[f64; N], OdeFailure>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    C: FnMut(f64, &mut [f64; N]) -> ControlFlow<String>,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut h = if opts.h_init > 0.0 {
        opts.h_init
    } else {
        span.abs() / 100.0
    }
    .min(opts.h_max)
    .min(span.abs());
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut steps = 0usize;
    let mut last_reject = false;

    while dir * (x1 - x) > 0.0 {
        if steps >= opts.max_steps {
            return Err(OdeFailure::TooManySteps { x });
        }
        steps += 1;
        let remaining = (x1 - x).abs();
        let mut hs = h.min(remaining);
        // Avoid a sliver of a final step.
        if remaining - hs < 1e-3 * hs {
            hs = remaining;
        }
        let hd = dir * hs;

        let k2 = f(x + C2 * hd, &axpy(&y, &[(hd * A21, &k1)]));
        let k3 = f(x + C3 * hd, &axpy(&y, &[(hd * A31, &k1), (hd * A32, &k2)]));
        let k4 = f(
            x + C4 * hd,
            &axpy(&y, &[(hd * A41, &k1), (hd * A42, &k2), (hd * A43, &k3)]),
        );
        let k5 = f(
            x + C5 * hd,
            &axpy(
                &y,
                &[(hd * A51, &k1), (hd * A52, &k2), (hd * A53, &k3), (hd * A54, &k4)],
            ),
        );
        let k6 = f(
            x + hd,
            &axpy(
                &y,
                &[
                    (hd * A61, &k1),
                    (hd * A62, &k2),
                    (hd * A63, &k3),
                    (hd * A64, &k4),
                    (hd * A65, &k5),
                ],
            ),
        );
        let y_new = axpy(
            &y,
            &[
                (hd * B1, &k1),
                (hd * B3, &k3),
                (hd * B4, &k4),
                (hd * B5, &k5),
                (hd * B6, &k6),
            ],
        );
        let x_new = if hs == remaining { x1 } else { x + hd };
        let k7 = f(x_new, &y_new);
        let mut err_vec = [0.0; N];
        for i in 0..N {
            err_vec[i] = hd
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let scale = opts.atol + opts.rtol * max_abs(&y).max(max_abs(&y_new));
        let err = max_abs(&err_vec) / scale;
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if hs < 1e-14 * x.abs().max(1.0) {
                return Err(OdeFailure::NonFinite { x });
            }
            h = 0.1 * hs;
            last_reject = true;
            continue;
        }
        if err <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            if let ControlFlow::Break(reason) = on_step(x, &mut y) {
                return Err(OdeFailure::Aborted { x, reason });
            }
            // The callback may have rescaled y; keep the derivative consistent.
            if y != y_new {
                k1 = f(x, &y);
            }
            let mut fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last_reject {
                fac = fac.min(1.0);
            }
            h = (hs * fac).min(opts.h_max);
            last_reject = false;
        } else {
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            last_reject = true;
            if h < 1e-15 * x.abs().max(1.0) {
                return Err(OdeFailure::StepSizeUnderflow { x });
            }
        }
    }
    Ok(y)
}

//! Partial-wave phase shifts of a spherically symmetric potential.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use rayon::prelude::*;

use super::{Channel, PhaseShiftSpectrum};
use crate::error::{Error, Result};
use crate::numeric::ode::{dopri5, OdeFailure, OdeOptions};
use crate::numeric::quad::integrate;
use crate::numeric::special::riccati_bessel;
use crate::potentials::PotentialModel;

/// Default channel count: `ceil(k R) + 8`.
pub fn default_l_max(model: &PotentialModel, k: f64, tol: f64) -> usize {
    let r = model.support_radius_at(tol, k);
    (k * r).ceil() as usize + 8
}

/// `tan eta = (k u jh' - u' jh) / (k u nh' - u' nh)`, reduced to `(-pi/2, pi/2]`.
fn local_phase(l: usize, k: f64, r: f64, u: f64, du: f64) -> Option<f64> {
    let rb = riccati_bessel(l, k * r);
    if !(rb.nh.is_finite() && rb.dnh.is_finite()) || rb.nh.abs() > 1e250 {
        return None;
    }
    let num = k * u * rb.djh - du * rb.jh;
    let den = k * u * rb.dnh - du * rb.nh;
    Some((num / den).atan())
}

/// First-order Born phase `-(1/k) ∫ V jh_l(kr)^2 dr`.
fn born_phase(model: &PotentialModel, l: usize, k: f64, r_max: f64, tol: f64) -> f64 {
    let vk = model.at_k(k);
    let mut cuts = vec![0.0];
    cuts.extend(model.breakpoints().into_iter().filter(|b| *b > 0.0 && *b < r_max));
    cuts.push(r_max);
    let total: f64 = cuts
        .windows(2)
        .map(|w| {
            integrate(
                |r| {
                    if r <= 0.0 {
                        0.0
                    } else {
                        vk(r) * riccati_bessel(l, k * r).jh.powi(2)
                    }
                },
                w[0],
                w[1],
                1e-3 * tol * k,
                1e-8,
            )
            .value
        })
        .sum();
    -total / k
}

/// Phase shift of channel `l` on the branch that starts at zero at the
/// origin and is continued through the truncated potential.
///
/// The regular solution is integrated together with the free one; the
/// continuous Prüfer-angle difference between the two lies in the same
/// interval `[m pi, (m+1) pi]` as the phase shift and fixes its branch.
pub fn channel_phase(model: &PotentialModel, l: usize, k: f64, tol: f64) -> Result<f64> {
    let Some((_, r_max)) = model.extent_at(1e-3 * tol * k.min(1.0), k) else {
        return Ok(0.0);
    };
    let eta_b = born_phase(model, l, k, r_max, tol);
    if eta_b.abs() < 0.1 * tol.sqrt() {
        return Ok(eta_b);
    }
    let r_s = model.support_radius_at(1e-12, k).max(r_max);
    let v_max = model.value(0.0, k).max(model.value(0.5 * r_max, k));
    let scale = (k * k + v_max).sqrt().max(1e-3);
    // the irregular admixture from an approximate start decays like (r0/r)^(2l+1)
    let f = (1e-2 * tol).powf(1.0 / (2 * l + 1) as f64).min(0.5);
    let r0 = (1e-6 * r_s).max(f * (l as f64 + 0.5) / scale);
    if r0 >= r_max {
        return Ok(eta_b);
    }
    let lf = (l * (l + 1)) as f64;
    let k2 = k * k;
    let vk = model.at_k(k);
    let rhs = |r: f64, y: &[f64; 4]| {
        let c = lf / (r * r) - k2;
        [y[1], (vk(r) + c) * y[0], y[3], c * y[2]]
    };
    let opts = OdeOptions {
        rtol: 1e-2 * tol,
        atol: 1e-300,
        h_max: 0.5 / k.max(1.0),
        h_init: 0.01 * r0,
        ..Default::default()
    };

    let rb = riccati_bessel(l, k * r0);
    let ld = if l == 0 || !(rb.jh > 0.0) {
        (l + 1) as f64 / r0
    } else {
        k * rb.djh / rb.jh
    };
    let mut y = [1.0, ld, 1.0, ld];
    let angle = |y: &[f64; 4]| {
        let cross = k * (y[3] * y[0] - y[2] * y[1]);
        let dot = y[3] * y[1] + k2 * y[2] * y[0];
        cross.atan2(dot)
    };

    let mut cuts = vec![r0];
    cuts.extend(model.breakpoints().into_iter().filter(|b| *b > r0 && *b < r_max));
    cuts.push(r_max);

    let mut diff = 0.0_f64;
    let mut last = angle(&y);
    for w in cuts.windows(2) {
        let res = dopri5(rhs, w[0], w[1], y, &opts, |r, st| {
            for j in [0, 2] {
                let m = st[j].abs().max(st[j + 1].abs() * r);
                if m > 1e100 {
                    st[j] /= m;
                    st[j + 1] /= m;
                }
            }
            let a = angle(st);
            let mut d = a - last;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            if d.abs() > 0.5 * PI {
                return ControlFlow::Break(format!("Prüfer angle moved by {d:.3} rad in one step"));
            }
            diff += d;
            last = a;
            ControlFlow::Continue(())
        });
        y = match res {
            Ok(y) => y,
            Err(OdeFailure::Aborted { x, reason }) => {
                return Err(Error::Branch(format!("l = {l}, k = {k}, r = {x}: {reason}")))
            }
            Err(e) => {
                return Err(Error::Integration {
                    k,
                    reason: format!("l = {l}: {e}"),
                })
            }
        };
    }
    let p = local_phase(l, k, r_max, y[0], y[1]).ok_or_else(|| Error::Integration {
        k,
        reason: format!("l = {l}: matching radius {r_max} is too deep in the centrifugal barrier"),
    })?;
    Ok(pick_branch(p, diff))
}

/// The member of `p + n pi` lying in the same `[m pi, (m+1) pi]` as `diff`.
fn pick_branch(p: f64, diff: f64) -> f64 {
    let near = (diff / PI).round() * PI;
    if (diff - near).abs() < 1e-6 {
        return p + PI * ((near - p) / PI).round();
    }
    let lo = (diff / PI).floor() * PI;
    p + PI * ((lo - p) / PI).ceil()
}

/// Phase shifts for `l = 0..=l_max`.
///
/// With `l_max = None` the default cutoff is extended until the last
/// channel falls below `tol`; an explicit `l_max` that leaves
/// `|eta_{l_max}| >= tol` is a truncation error.
pub fn phase_shifts(
    model: &PotentialModel,
    k: f64,
    l_max: Option<usize>,
    tol: f64,
) -> Result<PhaseShiftSpectrum> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("k = {k} must be finite and > 0")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance {tol} must lie in (0, 1)")));
    }
    if model.is_delta() {
        return Err(Error::Domain("delta models are one-dimensional only".into()));
    }
    let explicit = l_max.is_some();
    let mut lm = l_max.unwrap_or_else(|| default_l_max(model, k, tol));
    let cap = 4 * lm + 64;
    let mut etas: Vec<f64> = (0..=lm)
        .into_par_iter()
        .map(|l| channel_phase(model, l, k, tol))
        .collect::<Result<_>>()?;
    while etas.last().unwrap().abs() >= tol {
        if explicit || lm >= cap {
            return Err(Error::Truncation(format!(
                "|eta_{lm}| = {:.2e} >= {tol:.1e} at k = {k}",
                etas.last().unwrap().abs()
            )));
        }
        let more = (lm / 2).max(4);
        let extra: Vec<f64> = (lm + 1..=lm + more)
            .into_par_iter()
            .map(|l| channel_phase(model, l, k, tol))
            .collect::<Result<_>>()?;
        etas.extend(extra);
        lm += more;
    }
    Ok(PhaseShiftSpectrum {
        k,
        channels: etas
            .into_iter()
            .enumerate()
            .map(|(l, eta)| Channel {
                label: l,
                degeneracy: 2 * l + 1,
                eta,
            })
            .collect(),
        l_max: Some(lm),
    })
}

/// Phase shifts on an ascending grid (independent per `k`).
pub fn phase_shift_grid(
    model: &PotentialModel,
    kgrid: &[f64],
    l_max: Option<usize>,
    tol: f64,
) -> Result<Vec<PhaseShiftSpectrum>> {
    crate::scatter1d::check_grid(kgrid)?;
    kgrid
        .par_iter()
        .map(|&k| phase_shifts(model, k, l_max, tol))
        .collect()
}

//! One-dimensional scattering: `-u'' + V(x, k) u = k^2 u`.
//!
//! The solver starts at the right edge of the potential with a pure
//! outgoing wave `u = e^{ikx}` and integrates back to the left edge, where
//! `u = A e^{ikx} + B e^{-ikx}`. Then `T = 1/A` and `R = B/A`. Along the way
//! `arg A` is unwrapped against the plane-wave match at every step, which
//! fixes the absolute branch of `arg T` (the branch that vanishes for a
//! vanishing potential).

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::ops::ControlFlow;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ode::{dopri5, OdeFailure, OdeOptions};
use crate::numeric::wrap_pi;
use crate::potentials::PotentialModel;

/// Default wavenumber below which results are extrapolated.
pub const DEFAULT_K_MIN: f64 = 1e-3;

/// Plane-wave coefficients of a scattering solution.
///
/// `u -> A e^{ikx} + B e^{-ikx}` on the left, `C e^{ikx} + D e^{-ikx}` on
/// the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticAmplitudes {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl AsymptoticAmplitudes {
    /// `|A|^2 + |D|^2 - |B|^2 - |C|^2`.
    pub fn flux_defect(&self) -> f64 {
        self.a.norm_sqr() + self.d.norm_sqr() - self.b.norm_sqr() - self.c.norm_sqr()
    }
}

/// Scattering data at one wavenumber for a wave incident from the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterData1D {
    pub k: f64,
    pub r: Complex64,
    pub t: Complex64,
    /// `arg T` on the continuous branch with `arg T -> 0` as `k -> inf`.
    pub arg_t: f64,
    /// S-matrix eigenphases, `S` has eigenvalues `e^{2i eta}`.
    pub eta1: f64,
    pub eta2: f64,
}

impl ScatterData1D {
    /// Builds the record from `R`, `T` and a branch for `arg T`.
    pub fn new(k: f64, r: Complex64, t: Complex64, arg_t: f64) -> Self {
        // Eigenvalues of S are e^{i arg T} e^{±i alpha} with cos(alpha) = |T|.
        let alpha = t.norm().min(1.0).acos();
        Self {
            k,
            r,
            t,
            arg_t,
            eta1: 0.5 * (arg_t + alpha),
            eta2: 0.5 * (arg_t - alpha),
        }
    }

    pub fn free(k: f64) -> Self {
        Self::new(k, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 0.0)
    }

    /// Reflection amplitude for incidence from the right, `-R* T / T*`.
    pub fn r_right(&self) -> Complex64 {
        if self.t.norm() == 0.0 {
            return -self.r.conj();
        }
        -self.r.conj() * self.t / self.t.conj()
    }

    /// `[[T, -R* T/T*], [R, T]]`.
    pub fn s_matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.t, self.r_right()], [self.r, self.t]]
    }

    pub fn det_s(&self) -> Complex64 {
        let s = self.s_matrix();
        s[0][0] * s[1][1] - s[0][1] * s[1][0]
    }

    /// `arg det S = 2 arg T` on the continuous branch.
    pub fn arg_det_s(&self) -> f64 {
        2.0 * self.arg_t
    }

    pub fn r2(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// `log(1 - |R|^2)`, evaluated as `log |T|^2` to avoid cancellation.
    pub fn log_one_minus_r2(&self) -> f64 {
        2.0 * self.t.norm().ln()
    }

    /// `max |(S^† S - 1)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let s = self.s_matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for row in &s {
                    acc += row[i].conj() * row[j];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub k_min: f64,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            k_min: DEFAULT_K_MIN,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance {tol} must lie in (0, 1)")));
    }
    Ok(())
}

/// Solves the scattering problem at one `k`.
pub fn solve(model: &PotentialModel, k: f64, tol: f64) -> Result<ScatterData1D> {
    solve_with(model, k, &SolveOptions::new(tol))
}

pub fn solve_with(model: &PotentialModel, k: f64, opts: &SolveOptions) -> Result<ScatterData1D> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("k = {k} must be finite and > 0")));
    }
    check_tol(opts.tol)?;
    if model.is_delta() {
        return Ok(delta_closed_form(model.delta_strength(k), k));
    }
    if k < opts.k_min {
        let at = solve_numeric(model, opts.k_min, opts.tol, false)?;
        return Ok(extrapolate_low_k(&at, k));
    }
    solve_numeric(model, k, opts.tol, false)
}

/// `T = [1 + i g/(2k)]^{-1}`, `R = T - 1`.
pub fn delta_closed_form(g: f64, k: f64) -> ScatterData1D {
    let t = Complex64::new(1.0, 0.0) / Complex64::new(1.0, g / (2.0 * k));
    let r = t - 1.0;
    ScatterData1D::new(k, r, t, -(g / (2.0 * k)).atan())
}

/// Below `k_min`: `|T|` is continued linearly to zero, phases are frozen.
fn extrapolate_low_k(at: &ScatterData1D, k: f64) -> ScatterData1D {
    let scale = k / at.k;
    let tmag = at.t.norm() * scale;
    let rmag = (1.0 - tmag * tmag).max(0.0).sqrt();
    let t = Complex64::from_polar(tmag, at.t.arg());
    let r = Complex64::from_polar(rmag, at.r.arg());
    ScatterData1D::new(k, r, t, at.arg_t)
}

/// Integrates the wave equation; `mirror` solves for `V(-x)` instead.
fn solve_numeric(
    model: &PotentialModel,
    k: f64,
    tol: f64,
    mirror: bool,
) -> Result<ScatterData1D> {
    let Some((lo0, hi0)) = model.extent_at(1e-3 * tol * k.min(1.0), k) else {
        return Ok(ScatterData1D::free(k));
    };
    let (lo, hi) = if mirror { (-hi0, -lo0) } else { (lo0, hi0) };
    let vk = model.at_k(k);
    let v = |x: f64| if mirror { vk(-x) } else { vk(x) };
    let k2 = k * k;

    // Segment boundaries, integrated right to left.
    let mut cuts: Vec<f64> = model
        .breakpoints()
        .into_iter()
        .map(|b| if mirror { -b } else { b })
        .filter(|b| *b > lo && *b < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    cuts.dedup();

    let ode_opts = OdeOptions {
        rtol: 1e-3 * tol,
        atol: 1e-3 * tol,
        h_max: 0.5 / k.max(1.0),
        ..Default::default()
    };

    let (s, c) = (k * hi).sin_cos();
    let mut y = [c, s, -k * s, k * c];
    let ik = Complex64::new(0.0, k);
    let coef_a = |x: f64, y: &[f64; 4]| {
        let u = Complex64::new(y[0], y[1]);
        let du = Complex64::new(y[2], y[3]);
        0.5 * (u + du / ik) * Complex64::from_polar(1.0, -k * x)
    };
    let mut phase = 0.0_f64;
    let mut last_arg = 0.0_f64;
    let mut log_scale = 0.0_f64;

    for seg in cuts.windows(2) {
        let (x0, x1) = (seg[0], seg[1]);
        let rhs = |x: f64, y: &[f64; 4]| {
            let w = v(x) - k2;
            [y[2], y[3], w * y[0], w * y[1]]
        };
        let res = dopri5(rhs, x0, x1, y, &ode_opts, |x, st| {
            let a = coef_a(x, st).arg();
            let d = wrap_pi(a - last_arg);
            if d.abs() > 0.5 * PI {
                return ControlFlow::Break(format!(
                    "phase of the left amplitude jumped by {d:.3} rad"
                ));
            }
            phase += d;
            last_arg = a;
            let m = st.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if m > 1e100 {
                for v in st.iter_mut() {
                    *v /= m;
                }
                log_scale += m.ln();
            }
            ControlFlow::Continue(())
        });
        y = match res {
            Ok(y) => y,
            Err(OdeFailure::Aborted { x, reason }) => {
                return Err(Error::Branch(format!("k = {k}, x = {x}: {reason}")))
            }
            Err(e) => {
                return Err(Error::Integration {
                    k,
                    reason: e.to_string(),
                })
            }
        };
    }

    let a = coef_a(lo, &y);
    let u = Complex64::new(y[0], y[1]);
    let du = Complex64::new(y[2], y[3]);
    let b = 0.5 * (u - du / ik) * Complex64::from_polar(1.0, k * lo);
    // Rescaling only changes |A| and |B| together.
    let t = Complex64::from_polar((-log_scale).exp() / a.norm(), -a.arg());
    let r = b / a;
    let arg_t = -(phase + wrap_pi(a.arg() - last_arg));
    if !(t.re.is_finite() && r.re.is_finite()) {
        return Err(Error::Integration {
            k,
            reason: "non-finite amplitudes".into(),
        });
    }
    Ok(ScatterData1D::new(k, r, t, arg_t))
}

/// Scattering data for the potential with incidence from the right
/// (computed as the left problem of `V(-x)`).
pub fn solve_mirrored(model: &PotentialModel, k: f64, tol: f64) -> Result<ScatterData1D> {
    check_tol(tol)?;
    if model.is_delta() {
        return Ok(delta_closed_form(model.delta_strength(k), k));
    }
    solve_numeric(model, k, tol, true)
}

/// Amplitudes of the left-incident solution normalised to `A = 1`.
pub fn amplitudes(d: &ScatterData1D) -> AsymptoticAmplitudes {
    AsymptoticAmplitudes {
        a: Complex64::new(1.0, 0.0),
        b: d.r,
        c: d.t,
        d: Complex64::new(0.0, 0.0),
    }
}

/// Solves on an ascending grid and enforces one continuous branch.
pub fn solve_grid(model: &PotentialModel, kgrid: &[f64], tol: f64) -> Result<Vec<ScatterData1D>> {
    solve_grid_with(model, kgrid, &SolveOptions::new(tol))
}

pub fn solve_grid_with(
    model: &PotentialModel,
    kgrid: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<ScatterData1D>> {
    check_grid(kgrid)?;
    let mut out: Vec<ScatterData1D> = kgrid
        .par_iter()
        .map(|&k| solve_with(model, k, opts))
        .collect::<Result<_>>()?;
    unwrap_branch(&mut out)?;
    Ok(out)
}

pub(crate) fn check_grid(kgrid: &[f64]) -> Result<()> {
    if kgrid.is_empty() {
        return Err(Error::Grid("empty k grid".into()));
    }
    if kgrid[0] <= 0.0 || kgrid.iter().any(|k| !k.is_finite()) {
        return Err(Error::Grid("k grid must be finite and positive".into()));
    }
    if kgrid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("k grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Sequential pass anchored at the largest `k`: neighbouring values of
/// `arg T` may differ by less than `pi/2` once multiples of `2 pi` are
/// removed.
pub fn unwrap_branch(data: &mut [ScatterData1D]) -> Result<()> {
    for i in (0..data.len().saturating_sub(1)).rev() {
        let next = data[i + 1].arg_t;
        let d = wrap_pi(data[i].arg_t - next);
        if d.abs() > 0.5 * PI {
            return Err(Error::Branch(format!(
                "arg T changes by {d:.3} rad between k = {} and k = {}; refine the grid",
                data[i].k,
                data[i + 1].k
            )));
        }
        let fixed = next + d;
        if fixed != data[i].arg_t {
            let cur = data[i];
            data[i] = ScatterData1D::new(cur.k, cur.r, cur.t, fixed);
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    k: f64,
    re_r: f64,
    im_r: f64,
    re_t: f64,
    im_t: f64,
    arg_det_s: f64,
    r2: f64,
}

/// Writes `(k, Re R, Im R, Re T, Im T, arg det S, |R|^2)` rows.
pub fn write_csv<W: Write>(data: &[ScatterData1D], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for d in data {
        wr.serialize(CsvRow {
            k: d.k,
            re_r: d.r.re,
            im_r: d.r.im,
            re_t: d.t.re,
            im_t: d.t.im,
            arg_det_s: d.arg_det_s(),
            r2: d.r2(),
        })?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: Read>(r: R) -> Result<Vec<ScatterData1D>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let row: CsvRow = row?;
        out.push(ScatterData1D::new(
            row.k,
            Complex64::new(row.re_r, row.im_r),
            Complex64::new(row.re_t, row.im_t),
            0.5 * row.arg_det_s,
        ));
    }
    let ks: Vec<f64> = out.iter().map(|d| d.k).collect();
    check_grid(&ks)?;
    Ok(out)
}

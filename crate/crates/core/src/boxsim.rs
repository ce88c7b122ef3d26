//! Finite-box oracle: Dirichlet levels in `[-L, L]` (or a radial ball) and
//! the mode sum `sum_n [phi(k_n) - phi(k_n^0)]` extrapolated to `L -> inf`.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ode::{dopri5, OdeOptions};
use crate::numeric::roots::brent;
use crate::numeric::compensated_sum;
use crate::potentials::PotentialModel;
use crate::trace1d::WeightFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxMethod {
    /// Second-order finite differences at `h` and `h/2`, Richardson
    /// extrapolated, levels located by Sturm-sequence bisection.
    MatrixFd,
    /// Prüfer-angle shooting.
    Shooting,
    /// Exact matching conditions (delta potentials only).
    Exact,
}

#[derive(Debug, Clone, Copy)]
pub struct BoxOptions {
    pub method: BoxMethod,
    /// FD step; chosen from the highest requested level when `None`.
    pub h: Option<f64>,
    /// Accepted per-level error estimate.
    pub tol: f64,
}

impl Default for BoxOptions {
    fn default() -> Self {
        Self {
            method: BoxMethod::MatrixFd,
            h: None,
            tol: 1e-6,
        }
    }
}

impl BoxOptions {
    pub fn with_method(method: BoxMethod) -> Self {
        Self {
            method,
            ..Default::default()
        }
    }
}

/// Lowest Dirichlet levels of one box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpectrum {
    /// Half-width `L` (1D) or radius (radial).
    pub size: f64,
    pub eigen_k: Vec<f64>,
    /// Free levels computed by the same method, for cancellation of
    /// discretisation error in mode sums.
    pub free_k: Vec<f64>,
    pub count: usize,
    pub method: BoxMethod,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy)]
enum Geometry {
    Line { half: f64 },
    Radial { l: usize, radius: f64 },
}

impl Geometry {
    fn span(&self) -> (f64, f64) {
        match *self {
            Geometry::Line { half } => (-half, half),
            Geometry::Radial { radius, .. } => (0.0, radius),
        }
    }

    fn length(&self) -> f64 {
        let (a, b) = self.span();
        b - a
    }

    fn centrifugal(&self, x: f64) -> f64 {
        match *self {
            Geometry::Line { .. } => 0.0,
            Geometry::Radial { l, .. } => (l * (l + 1)) as f64 / (x * x),
        }
    }
}

/// Dirichlet levels of `-u'' + V u = k^2 u` on `[-L, L]`.
pub fn box_spectrum(
    model: &PotentialModel,
    half_width: f64,
    n_max: usize,
    opts: &BoxOptions,
) -> Result<BoxSpectrum> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Domain(format!("box half-width {half_width} must be > 0")));
    }
    let r = model.support_radius(1e-12);
    if half_width <= 10.0 * r.max(0.0) && !model.is_zero() {
        return Err(Error::Domain(format!(
            "box half-width {half_width} must exceed 10 x support radius {r:.3}"
        )));
    }
    if model.is_delta() {
        return Ok(delta_spectrum(model, half_width, n_max));
    }
    if opts.method == BoxMethod::Exact {
        return Err(Error::Domain("exact matching is only available for delta potentials".into()));
    }
    spectrum(model, Geometry::Line { half: half_width }, n_max, opts)
}

/// Dirichlet levels of the radial channel `l` in a ball of radius `R`.
pub fn radial_box_spectrum(
    model: &PotentialModel,
    l: usize,
    radius: f64,
    n_max: usize,
    opts: &BoxOptions,
) -> Result<BoxSpectrum> {
    if model.is_delta() {
        return Err(Error::Domain("delta models are one-dimensional only".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!("box radius {radius} must be > 0")));
    }
    if opts.method == BoxMethod::Exact {
        return Err(Error::Domain("exact matching is only available for delta potentials".into()));
    }
    spectrum(model, Geometry::Radial { l, radius }, n_max, opts)
}

fn spectrum(model: &PotentialModel, geo: Geometry, n_max: usize, opts: &BoxOptions) -> Result<BoxSpectrum> {
    let free = PotentialModel::zero();
    let (eigen_k, err, free_k) = match opts.method {
        BoxMethod::MatrixFd => {
            let h = opts.h.unwrap_or_else(|| default_step(model, geo, n_max));
            let (k, e) = fd_levels(model, geo, n_max, h)?;
            let (k0, _) = fd_levels(&free, geo, n_max, h)?;
            (k, e, k0)
        }
        BoxMethod::Shooting => {
            let k = prufer_levels(model, geo, n_max)?;
            let k0 = prufer_levels(&free, geo, n_max)?;
            (k, 0.0, k0)
        }
        BoxMethod::Exact => unreachable!(),
    };
    if err > opts.tol {
        return Err(Error::Resolution(format!(
            "level error estimate {err:.2e} exceeds {:.1e}; reduce the step",
            opts.tol
        )));
    }
    for (n, (k, k0)) in eigen_k.iter().zip(&free_k).enumerate() {
        if *k < k0 * (1.0 - 1e-9) - 1e-12 {
            return Err(Error::MissedLevel(format!(
                "level {} at k = {k} lies below the free level {k0}",
                n + 1
            )));
        }
    }
    let (size, method) = match geo {
        Geometry::Line { half } => (half, opts.method),
        Geometry::Radial { radius, .. } => (radius, opts.method),
    };
    Ok(BoxSpectrum {
        size,
        count: eigen_k.len(),
        eigen_k,
        free_k,
        method,
        error_estimate: err,
    })
}

fn default_step(model: &PotentialModel, geo: Geometry, n_max: usize) -> f64 {
    let k_top = (n_max as f64 + 2.0) * PI / geo.length() * 1.2 + model.value(0.0, 0.0).sqrt();
    (0.15 / k_top).min(0.05)
}

/// Exact levels of `g δ(x)` in `[-L, L]`: odd states `k = m π / L`, even
/// states from `2k cos(kL) + g(k) sin(kL) = 0`.
fn delta_spectrum(model: &PotentialModel, half: f64, n_max: usize) -> BoxSpectrum {
    let mut ks = Vec::with_capacity(n_max);
    let mut free = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let m = (n - 1) / 2;
        free.push(n as f64 * PI / (2.0 * half));
        if n % 2 == 0 {
            ks.push((m + 1) as f64 * PI / half);
        } else {
            let lo = (m as f64 + 0.5) * PI / half;
            let hi = (m + 1) as f64 * PI / half;
            let f = |k: f64| {
                let g = model.delta_strength(k);
                2.0 * k * (k * half).cos() + g * (k * half).sin()
            };
            let root = brent(f, lo, hi, 1e-15 * hi).unwrap_or(lo);
            ks.push(root);
        }
    }
    BoxSpectrum {
        size: half,
        count: ks.len(),
        eigen_k: ks,
        free_k: free,
        method: BoxMethod::Exact,
        error_estimate: 0.0,
    }
}

/// Number of eigenvalues of the FD operator `H(k)` below `lambda`.
fn sturm_count(diag: &[f64], off2: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (j, d) in diag.iter().enumerate() {
        q = d - lambda - if j == 0 { 0.0 } else { off2 / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

struct FdGrid {
    xs: Vec<f64>,
    inv_h2: f64,
    centrifugal: Vec<f64>,
}

impl FdGrid {
    fn new(geo: Geometry, h_target: f64) -> Self {
        let (a, b) = geo.span();
        let m = ((b - a) / h_target).ceil().max(8.0) as usize;
        let h = (b - a) / m as f64;
        let xs: Vec<f64> = (1..m).map(|j| a + j as f64 * h).collect();
        let centrifugal = xs.iter().map(|x| geo.centrifugal(*x)).collect();
        Self {
            xs,
            inv_h2: 1.0 / (h * h),
            centrifugal,
        }
    }

    fn diag(&self, model: &PotentialModel, k: f64) -> Vec<f64> {
        let v = model.at_k(k);
        self.xs
            .iter()
            .zip(&self.centrifugal)
            .map(|(x, c)| 2.0 * self.inv_h2 + v(*x) + c)
            .collect()
    }
}

fn fd_single(model: &PotentialModel, geo: Geometry, n_max: usize, h: f64) -> Result<Vec<f64>> {
    let grid = FdGrid::new(geo, h);
    if grid.xs.len() < n_max + 1 {
        return Err(Error::Resolution(format!(
            "grid of {} points cannot hold {n_max} levels",
            grid.xs.len()
        )));
    }
    let off2 = grid.inv_h2 * grid.inv_h2;
    let dispersive = model.dispersion().decay_power() > 0.0
        || matches!(model.kind(), crate::potentials::PotentialKind::Dielectric { .. });
    let mut out = Vec::with_capacity(n_max);
    if !dispersive {
        let diag = grid.diag(model, 0.0);
        let top = diag.iter().fold(0.0_f64, |m, v| m.max(*v)) + 2.0 * grid.inv_h2;
        let mut lo = 0.0;
        for n in 1..=n_max {
            let (mut a, mut b) = (lo, top);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(&diag, off2, mid) >= n {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            lo = a;
            out.push(b.sqrt());
        }
    } else {
        let count = |k: f64| sturm_count(&grid.diag(model, k), off2, k * k);
        let k_hi = 2.0 * grid.inv_h2.sqrt();
        let mut lo = 0.0;
        for n in 1..=n_max {
            let (mut a, mut b) = (lo, k_hi);
            if count(b) < n {
                return Err(Error::Resolution(format!("level {n} beyond the grid cutoff")));
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if count(mid) >= n {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            lo = a;
            out.push(b);
        }
    }
    Ok(out)
}

fn fd_levels(model: &PotentialModel, geo: Geometry, n_max: usize, h: f64) -> Result<(Vec<f64>, f64)> {
    let (coarse, fine) = rayon::join(
        || fd_single(model, geo, n_max, h),
        || fd_single(model, geo, n_max, 0.5 * h),
    );
    let (coarse, fine) = (coarse?, fine?);
    let mut err: f64 = 0.0;
    let ks = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| {
            let r = (4.0 * f - c) / 3.0;
            // O(h^4) remainder, scaled from the observed O(h^2) change.
            err = err.max((f - c).abs() * (f * h).powi(2));
            r
        })
        .collect();
    Ok((ks, err))
}

/// Prüfer angle at the far wall; levels satisfy `theta = n π`.
fn prufer_theta(model: &PotentialModel, geo: Geometry, k: f64) -> Result<f64> {
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-12,
        ..Default::default()
    };
    let vk = model.at_k(k);
    let rhs = |x: f64, y: &[f64; 1]| {
        let s = y[0].sin();
        [k - (vk(x) + geo.centrifugal(x)) / k * s * s]
    };
    let fail = |e: crate::numeric::ode::OdeFailure| Error::Integration {
        k,
        reason: e.to_string(),
    };
    match geo {
        Geometry::Line { half } => {
            if model.is_delta() {
                // Free propagation to 0, jump u' -> u' + g u, free propagation on.
                let g = model.delta_strength(k);
                let th = k * half;
                let m = (th / PI).floor();
                let r = th - m * PI;
                let th = if r == 0.0 {
                    th
                } else {
                    m * PI + (1.0f64).atan2(1.0 / r.tan() + g / k)
                };
                return Ok(th + k * half);
            }
            let Some((lo, hi)) = model.extent_at(1e-14, k) else {
                return Ok(2.0 * k * half);
            };
            let (lo, hi) = (lo.max(-half), hi.min(half));
            let mut th = k * (lo + half);
            let mut cuts = vec![lo];
            cuts.extend(model.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
            cuts.push(hi);
            for w in cuts.windows(2) {
                th = dopri5(rhs, w[0], w[1], [th], &opts, |_, _| ControlFlow::Continue(()))
                    .map_err(fail)?[0];
            }
            Ok(th + k * (half - hi))
        }
        Geometry::Radial { l, radius } => {
            let scale = k.max(model.value(0.0, k).sqrt()).max(1.0);
            let r0 = (1e-3 * (l + 1) as f64 / scale).min(1e-3 * radius);
            let th0 = (k * r0 / (l + 1) as f64).atan();
            let mut cuts = vec![r0];
            cuts.extend(model.breakpoints().into_iter().filter(|b| *b > r0 && *b < radius));
            cuts.push(radius);
            let mut th = th0;
            for w in cuts.windows(2) {
                th = dopri5(rhs, w[0], w[1], [th], &opts, |_, _| ControlFlow::Continue(()))
                    .map_err(fail)?[0];
            }
            Ok(th)
        }
    }
}

fn prufer_levels(model: &PotentialModel, geo: Geometry, n_max: usize) -> Result<Vec<f64>> {
    let step = 0.25 * PI / geo.length();
    let mut out = Vec::with_capacity(n_max);
    let mut k_lo = 1e-9;
    for n in 1..=n_max {
        let target = n as f64 * PI;
        let mut k_hi = k_lo;
        let mut th_hi = prufer_theta(model, geo, k_hi)?;
        while th_hi < target {
            k_lo = k_hi;
            k_hi += step;
            th_hi = prufer_theta(model, geo, k_hi)?;
        }
        let mut err = None;
        let root = brent(
            |k| match prufer_theta(model, geo, k) {
                Ok(t) => t - target,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            },
            k_lo,
            k_hi,
            1e-14 * k_hi,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let root = root.ok_or_else(|| Error::MissedLevel(format!("level {n} not bracketed")))?;
        out.push(root);
        k_lo = root;
    }
    Ok(out)
}

/// Mode sum with its `L -> inf` extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSum {
    pub value: f64,
    pub error_estimate: f64,
    /// `(L, sum)` for every box size.
    pub per_size: Vec<(f64, f64)>,
}

/// Extrapolates `S(L) = c0 + c1/L` from the last two sizes; the first pair
/// gives the error estimate.
pub fn extrapolate_inverse_size(per: &[(f64, f64)]) -> Result<(f64, f64)> {
    if per.len() < 3 {
        return Err(Error::Extrapolation("need at least three box sizes".into()));
    }
    let c0 = |a: (f64, f64), b: (f64, f64)| (b.0 * b.1 - a.0 * a.1) / (b.0 - a.0);
    let n = per.len();
    let last = c0(per[n - 2], per[n - 1]);
    let prev = c0(per[n - 3], per[n - 2]);
    let err = (last - prev).abs();
    let spread = (per[n - 1].1 - per[0].1).abs();
    let scale = per.iter().fold(0.0_f64, |m, p| m.max(p.1.abs()));
    if err > spread && err > 1e-9 * scale.max(1e-300) {
        return Err(Error::Extrapolation(format!(
            "sums {:?} do not follow c0 + c1/L (pairwise limits {prev} and {last})",
            per.iter().map(|p| p.1).collect::<Vec<_>>()
        )));
    }
    Ok((last, err))
}

fn level_sum(spec: &BoxSpectrum, phi: &WeightFunction) -> f64 {
    let (a, _) = phi.sample(&spec.eigen_k);
    let (b, _) = phi.sample(&spec.free_k);
    compensated_sum(a.iter().zip(&b).map(|(x, y)| x - y))
}

/// `sum_n [phi(k_n(L)) - phi(k_n^0(L))]` over levels with free wavenumber up
/// to `k_cut`, at every `L`, extrapolated to `L -> inf`.
pub fn mode_sum(
    model: &PotentialModel,
    phi: &WeightFunction,
    sizes: &[f64],
    k_cut: f64,
    opts: &BoxOptions,
) -> Result<ModeSum> {
    phi.validate()?;
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("sizes", "box sizes must be ascending"));
    }
    let per: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&l| {
            let n = (2.0 * l * k_cut / PI).floor() as usize;
            if model.is_zero() {
                return Ok((l, 0.0));
            }
            let spec = box_spectrum(model, l, n, opts)?;
            Ok((l, level_sum(&spec, phi)))
        })
        .collect::<Result<_>>()?;
    let (value, error_estimate) = extrapolate_inverse_size(&per)?;
    Ok(ModeSum {
        value,
        error_estimate,
        per_size: per,
    })
}

/// Degeneracy-weighted radial mode sum `sum_l (2l+1) sum_n [...]` over
/// channels `l <= l_max`, extrapolated in the radius.
pub fn radial_mode_sum(
    model: &PotentialModel,
    phi: &WeightFunction,
    l_max: usize,
    radii: &[f64],
    k_cut: f64,
    opts: &BoxOptions,
) -> Result<ModeSum> {
    phi.validate()?;
    let mut per = Vec::with_capacity(radii.len());
    for &r in radii {
        let channels: Vec<f64> = (0..=l_max)
            .into_par_iter()
            .map(|l| {
                // Free channel levels sit near (n + l/2) π / R.
                let n = ((r * k_cut / PI) - 0.5 * l as f64).floor();
                if n < 1.0 {
                    return Ok(0.0);
                }
                let spec = radial_box_spectrum(model, l, r, n as usize, opts)?;
                Ok((2 * l + 1) as f64 * level_sum(&spec, phi))
            })
            .collect::<Result<_>>()?;
        per.push((r, compensated_sum(channels)));
    }
    let (value, error_estimate) = extrapolate_inverse_size(&per)?;
    Ok(ModeSum {
        value,
        error_estimate,
        per_size: per,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scatter1d::solve;

    #[test]
    fn free_box_levels() {
        let z = PotentialModel::zero();
        for method in [BoxMethod::MatrixFd, BoxMethod::Shooting] {
            let s = box_spectrum(&z, 10.0, 5, &BoxOptions::with_method(method)).unwrap();
            for (n, k) in s.eigen_k.iter().enumerate() {
                let want = (n + 1) as f64 * PI / 20.0;
                assert!((k - want).abs() < 1e-8, "{method:?} {k} {want}");
            }
        }
        let s = radial_box_spectrum(&z, 0, 10.0, 4, &BoxOptions::default()).unwrap();
        for (n, k) in s.eigen_k.iter().enumerate() {
            assert!((k - (n + 1) as f64 * PI / 10.0).abs() < 1e-8);
        }
    }

    #[test]
    fn fd_converges_at_second_order() {
        let z = PotentialModel::zero();
        let geo = Geometry::Line { half: 5.0 };
        let want = 5.0 * PI / 10.0;
        let e1 = (fd_single(&z, geo, 5, 0.1).unwrap()[4] - want).abs();
        let e2 = (fd_single(&z, geo, 5, 0.05).unwrap()[4] - want).abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "{order}");
    }

    #[test]
    fn delta_levels_match_transcendental_equation() {
        let m = PotentialModel::delta(2.0).unwrap();
        let s = box_spectrum(&m, 10.0, 8, &BoxOptions::with_method(BoxMethod::Exact)).unwrap();
        for (n, k) in s.eigen_k.iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*k, (n + 1) as f64 * PI / 20.0);
            } else {
                assert!((2.0 * k * (k * 10.0).cos() + 2.0 * (k * 10.0).sin()).abs() < 1e-12);
            }
        }
        // Prüfer shooting with the jump condition agrees.
        let sh = prufer_levels(&m, Geometry::Line { half: 10.0 }, 8).unwrap();
        for (a, b) in sh.iter().zip(&s.eigen_k) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_levels_shift_up_and_methods_agree() {
        let m = PotentialModel::gaussian(1.0, 1.0).unwrap();
        let fd = box_spectrum(&m, 60.0, 20, &BoxOptions::default()).unwrap();
        let sh = box_spectrum(&m, 60.0, 20, &BoxOptions::with_method(BoxMethod::Shooting)).unwrap();
        for (a, b) in fd.eigen_k.iter().zip(&sh.eigen_k) {
            assert!((a - b).abs() < 1e-7, "{a} {b}");
        }
        for (k, k0) in fd.eigen_k.iter().zip(&fd.free_k) {
            assert!(k >= k0);
        }
    }

    #[test]
    fn level_shift_pairs_match_phase_sum() {
        // Consecutive levels belong to opposite parity sectors; their mean
        // shift carries eta1 + eta2.
        let m = PotentialModel::gaussian(1.0, 1.0).unwrap();
        let l = 200.0;
        let s = box_spectrum(&m, l, 40, &BoxOptions::with_method(BoxMethod::Shooting)).unwrap();
        for n in (20..38).step_by(2) {
            let shift = |i: usize| ((i + 1) as f64 * PI / (2.0 * l) - s.eigen_k[i]) * 2.0 * l;
            let avg = 0.5 * (shift(n) + shift(n + 1));
            let kmid = 0.5 * (s.eigen_k[n] + s.eigen_k[n + 1]);
            let d = solve(&m, kmid, 1e-10).unwrap();
            assert!((avg - d.arg_t).abs() < 1e-3 * d.arg_t.abs(), "{avg} {}", d.arg_t);
        }
    }

    #[test]
    fn hard_sphere_limit() {
        let a = 1.0;
        let m = PotentialModel::square_barrier(1e4, a).unwrap();
        let r = 30.0;
        let s = radial_box_spectrum(&m, 0, r, 5, &BoxOptions::with_method(BoxMethod::Shooting)).unwrap();
        for (n, k) in s.eigen_k.iter().enumerate() {
            // Hard sphere: k = n π / (R - a).
            let want = (n + 1) as f64 * PI / (r - a);
            assert!((k - want).abs() < 2e-3 * want, "{k} {want}");
        }
    }

    #[test]
    fn mode_sum_vanishes_for_free_case() {
        let r = mode_sum(
            &PotentialModel::zero(),
            &WeightFunction::bump(1.0, 0.5),
            &[20.0, 40.0, 80.0],
            3.0,
            &BoxOptions::default(),
        )
        .unwrap();
        assert!(r.per_size.iter().all(|p| p.1 == 0.0));
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn partial_sums_are_monotone() {
        let m = PotentialModel::delta(2.0).unwrap();
        let s = box_spectrum(&m, 50.0, 200, &BoxOptions::with_method(BoxMethod::Exact)).unwrap();
        let mut acc = 0.0;
        for (k, k0) in s.eigen_k.iter().zip(&s.free_k) {
            let next = acc + (k - k0);
            assert!(next >= acc);
            acc = next;
        }
    }

    #[test]
    fn extrapolation_rejects_erratic_sequences() {
        assert!(extrapolate_inverse_size(&[(1.0, 1.0), (2.0, 5.0), (4.0, -3.0)]).is_err());
        let (c, _) =
            extrapolate_inverse_size(&[(1.0, 3.0), (2.0, 2.5), (4.0, 2.25)]).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
    }
}

//! Potential and dielectric models.
//!
//! Every model supplies a non-negative `V(x, k)`. In one dimension `x` is
//! the line coordinate; radial solvers read the same profile as `V(r, k)`
//! with `r >= 0`. The square barrier occupies `[0, width]`, so its radial
//! reading is a uniform ball of radius `width`.
//!
//! A dielectric model stands for a medium with `eps(x, k) = 1 - chi(x)`,
//! entering the wave equation as `V(x, k) = k^2 [1 - eps(x, k)]`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::interp::PiecewiseCubic;

/// Wavenumber dependence applied on top of a static profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionProfile {
    None,
    /// `m(k) = (1 + k^2 / k_c^2)^(-p)`.
    LorentzianCutoff { k_c: f64, p: u32 },
}

impl DispersionProfile {
    pub fn multiplier(&self, k: f64) -> f64 {
        match *self {
            DispersionProfile::None => 1.0,
            DispersionProfile::LorentzianCutoff { k_c, p } => {
                (1.0 + (k / k_c).powi(2)).powi(-(p as i32))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let DispersionProfile::LorentzianCutoff { k_c, p } = *self {
            if !(k_c.is_finite() && k_c > 0.0) {
                return Err(Error::config("dispersion.k_c", "must be finite and > 0"));
            }
            if p < 1 {
                return Err(Error::config("dispersion.p", "must be >= 1"));
            }
        }
        Ok(())
    }

    /// Power with which `m(k)` decays at large `k` (0 when non-dispersive).
    pub fn decay_power(&self) -> f64 {
        match *self {
            DispersionProfile::None => 0.0,
            DispersionProfile::LorentzianCutoff { p, .. } => 2.0 * p as f64,
        }
    }
}

/// Tabulated profile for `user_grid` models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPayload {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `g δ(x)`; never sampled, solvers use closed forms.
    Delta { g: f64 },
    /// `height` on `[0, width]`.
    SquareBarrier { height: f64, width: f64 },
    /// `height * exp(-x^2 / width^2)`.
    Gaussian { height: f64, width: f64 },
    /// `height * sech^2(x / width)`.
    Sech2 { height: f64, width: f64 },
    UserGrid(GridPayload),
    /// Gaussian susceptibility profile `chi(x) = contrast * exp(-x^2 / width^2)`.
    Dielectric { contrast: f64, width: f64 },
}

/// Flat JSON form: `{"kind": ..., <parameters>, "dispersion": {...}, "grid": {...}}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridPayload>,
}

/// An immutable, validated potential model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpec", into = "PotentialSpec")]
pub struct PotentialModel {
    kind: PotentialKind,
    dispersion: DispersionProfile,
    table: Option<PiecewiseCubic>,
}

impl PartialEq for PotentialModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.dispersion == other.dispersion
    }
}

impl TryFrom<PotentialSpec> for PotentialModel {
    type Error = Error;

    fn try_from(s: PotentialSpec) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::config(format!("potential.{name}"), "missing"))
        };
        let kind = match s.kind.as_str() {
            "delta" => PotentialKind::Delta { g: need(s.g, "g")? },
            "square_barrier" => PotentialKind::SquareBarrier {
                height: need(s.height, "height")?,
                width: need(s.width, "width")?,
            },
            "gaussian" => PotentialKind::Gaussian {
                height: need(s.height, "height")?,
                width: need(s.width, "width")?,
            },
            "sech2" => PotentialKind::Sech2 {
                height: need(s.height, "height")?,
                width: need(s.width, "width")?,
            },
            "dielectric" => PotentialKind::Dielectric {
                contrast: need(s.contrast, "contrast")?,
                width: need(s.width, "width")?,
            },
            "user_grid" => PotentialKind::UserGrid(
                s.grid
                    .ok_or_else(|| Error::config("potential.grid", "missing"))?,
            ),
            "zero" | "free" => PotentialKind::Gaussian {
                height: 0.0,
                width: 1.0,
            },
            other => {
                return Err(Error::config(
                    "potential.kind",
                    format!("unknown kind `{other}`"),
                ))
            }
        };
        PotentialModel::new(kind, s.dispersion.unwrap_or(DispersionProfile::None))
    }
}

impl From<PotentialModel> for PotentialSpec {
    fn from(m: PotentialModel) -> Self {
        let mut s = PotentialSpec {
            dispersion: match m.dispersion {
                DispersionProfile::None => None,
                d => Some(d),
            },
            ..Default::default()
        };
        match m.kind {
            PotentialKind::Delta { g } => {
                s.kind = "delta".into();
                s.g = Some(g);
            }
            PotentialKind::SquareBarrier { height, width } => {
                s.kind = "square_barrier".into();
                s.height = Some(height);
                s.width = Some(width);
            }
            PotentialKind::Gaussian { height, width } => {
                s.kind = "gaussian".into();
                s.height = Some(height);
                s.width = Some(width);
            }
            PotentialKind::Sech2 { height, width } => {
                s.kind = "sech2".into();
                s.height = Some(height);
                s.width = Some(width);
            }
            PotentialKind::Dielectric { contrast, width } => {
                s.kind = "dielectric".into();
                s.contrast = Some(contrast);
                s.width = Some(width);
            }
            PotentialKind::UserGrid(grid) => {
                s.kind = "user_grid".into();
                s.grid = Some(grid);
            }
        }
        s
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must be finite and >= 0")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must be finite and > 0")))
    }
}

impl PotentialModel {
    pub fn new(kind: PotentialKind, dispersion: DispersionProfile) -> Result<Self> {
        dispersion.validate()?;
        let mut table = None;
        match &kind {
            PotentialKind::Delta { g } => check_nonneg("g", *g)?,
            PotentialKind::SquareBarrier { height, width }
            | PotentialKind::Gaussian { height, width }
            | PotentialKind::Sech2 { height, width } => {
                check_nonneg("height", *height)?;
                check_pos("width", *width)?;
            }
            PotentialKind::Dielectric { contrast, width } => {
                check_nonneg("contrast", *contrast)?;
                if *contrast > 1.0 {
                    return Err(Error::Domain(format!(
                        "contrast = {contrast} gives eps < 0; require 0 <= contrast <= 1"
                    )));
                }
                check_pos("width", *width)?;
            }
            PotentialKind::UserGrid(grid) => {
                if grid.x.len() < 2 || grid.x.len() != grid.v.len() {
                    return Err(Error::Grid(
                        "user grid needs >= 2 abscissae and one value per abscissa".into(),
                    ));
                }
                if grid.x.windows(2).any(|w| !(w[1] > w[0])) || grid.x.iter().any(|v| !v.is_finite())
                {
                    return Err(Error::Grid("user grid abscissae must be strictly increasing".into()));
                }
                for v in &grid.v {
                    check_nonneg("user grid value", *v)?;
                }
                table = Some(PiecewiseCubic::pchip(&grid.x, &grid.v));
            }
        }
        Ok(Self {
            kind,
            dispersion,
            table,
        })
    }

    pub fn delta(g: f64) -> Result<Self> {
        Self::new(PotentialKind::Delta { g }, DispersionProfile::None)
    }

    pub fn square_barrier(height: f64, width: f64) -> Result<Self> {
        Self::new(
            PotentialKind::SquareBarrier { height, width },
            DispersionProfile::None,
        )
    }

    pub fn gaussian(height: f64, width: f64) -> Result<Self> {
        Self::new(
            PotentialKind::Gaussian { height, width },
            DispersionProfile::None,
        )
    }

    pub fn sech2(height: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::Sech2 { height, width }, DispersionProfile::None)
    }

    pub fn dielectric(contrast: f64, width: f64) -> Result<Self> {
        Self::new(
            PotentialKind::Dielectric { contrast, width },
            DispersionProfile::None,
        )
    }

    pub fn user_grid(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(
            PotentialKind::UserGrid(GridPayload { x, v }),
            DispersionProfile::None,
        )
    }

    /// The free case, `V = 0`.
    pub fn zero() -> Self {
        Self::gaussian(0.0, 1.0).expect("valid")
    }

    /// Same profile with a Lorentzian cutoff `(1 + k^2/k_c^2)^(-p)`.
    pub fn with_lorentzian_cutoff(self, k_c: f64, p: u32) -> Result<Self> {
        Self::new(self.kind, DispersionProfile::LorentzianCutoff { k_c, p })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn dispersion(&self) -> DispersionProfile {
        self.dispersion
    }

    pub fn is_delta(&self) -> bool {
        matches!(self.kind, PotentialKind::Delta { .. })
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Delta { g } => *g == 0.0,
            PotentialKind::SquareBarrier { height, .. }
            | PotentialKind::Gaussian { height, .. }
            | PotentialKind::Sech2 { height, .. } => *height == 0.0,
            PotentialKind::Dielectric { contrast, .. } => *contrast == 0.0,
            PotentialKind::UserGrid(g) => g.v.iter().all(|v| *v == 0.0),
        }
    }

    /// Is the profile symmetric under `x -> -x`?
    pub fn is_even(&self) -> bool {
        match &self.kind {
            PotentialKind::SquareBarrier { .. } => false,
            PotentialKind::UserGrid(g) => {
                let n = g.x.len();
                (0..n).all(|i| {
                    (g.x[i] + g.x[n - 1 - i]).abs() <= 1e-12 * g.x[i].abs().max(1.0)
                        && (g.v[i] - g.v[n - 1 - i]).abs() <= 1e-12 * g.v[i].abs().max(1e-300)
                })
            }
            _ => true,
        }
    }

    /// Multiplier `m(k)` of the dispersion profile.
    pub fn multiplier(&self, k: f64) -> f64 {
        self.dispersion.multiplier(k)
    }

    /// Delta strength `g(k) = g m(k)`; zero for other kinds.
    pub fn delta_strength(&self, k: f64) -> f64 {
        match self.kind {
            PotentialKind::Delta { g } => g * self.multiplier(k),
            _ => 0.0,
        }
    }

    /// Static profile without the wavenumber factor.
    fn shape(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Delta { .. } => 0.0,
            PotentialKind::SquareBarrier { height, width } => {
                if (0.0..=*width).contains(&x) {
                    *height
                } else {
                    0.0
                }
            }
            PotentialKind::Gaussian { height, width } => {
                if *height == 0.0 {
                    0.0
                } else {
                    height * (-(x / width).powi(2)).exp()
                }
            }
            PotentialKind::Sech2 { height, width } => {
                let c = (x / width).cosh();
                if c.is_finite() {
                    height / (c * c)
                } else {
                    0.0
                }
            }
            PotentialKind::Dielectric { contrast, width } => {
                contrast * (-(x / width).powi(2)).exp()
            }
            PotentialKind::UserGrid(g) => {
                if x < g.x[0] || x > *g.x.last().unwrap() {
                    0.0
                } else {
                    self.table.as_ref().map_or(0.0, |t| t.eval(x).max(0.0))
                }
            }
        }
    }

    /// Wavenumber factor multiplying the static profile.
    fn k_factor(&self, k: f64) -> f64 {
        let m = self.multiplier(k);
        match self.kind {
            PotentialKind::Dielectric { .. } => k * k * m,
            _ => m,
        }
    }

    /// `V(x, k)` without argument checks, for inner loops.
    #[inline]
    pub fn value(&self, x: f64, k: f64) -> f64 {
        self.shape(x) * self.k_factor(k)
    }

    /// Returns a closure `x -> V(x, k)` with the wavenumber factor hoisted.
    pub fn at_k(&self, k: f64) -> impl Fn(f64) -> f64 + '_ {
        let f = self.k_factor(k);
        move |x| self.shape(x) * f
    }

    /// `V(x, k)`. Delta models evaluate to zero away from their support;
    /// use [`PotentialModel::delta_strength`] for the weight.
    pub fn evaluate(&self, x: f64, k: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("x = {x} is not finite")));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("k = {k} must be finite and >= 0")));
        }
        let v = self.value(x, k);
        if v < 0.0 {
            return Err(Error::Domain(format!("V({x}, {k}) = {v} < 0")));
        }
        Ok(v)
    }

    /// Smallest `X` with `V(x, 1) < tol` for `|x| > X`.
    pub fn support_radius(&self, tol: f64) -> f64 {
        self.support_radius_at(tol, 1.0)
    }

    /// Like [`Self::support_radius`] but at wavenumber `k`.
    pub fn support_radius_at(&self, tol: f64, k: f64) -> f64 {
        let f = self.k_factor(k);
        match &self.kind {
            PotentialKind::Delta { .. } => 0.0,
            PotentialKind::SquareBarrier { width, height } => {
                if height * f >= tol {
                    *width
                } else {
                    0.0
                }
            }
            PotentialKind::Gaussian { height, width } => {
                let peak = height * f;
                if peak > tol {
                    width * (peak / tol).ln().sqrt()
                } else {
                    0.0
                }
            }
            PotentialKind::Dielectric { contrast, width } => {
                let peak = contrast * f;
                if peak > tol {
                    width * (peak / tol).ln().sqrt()
                } else {
                    0.0
                }
            }
            PotentialKind::Sech2 { height, width } => {
                let peak = height * f;
                if peak > tol {
                    width * (peak / tol).sqrt().acosh()
                } else {
                    0.0
                }
            }
            PotentialKind::UserGrid(g) => {
                let t = self.table.as_ref().expect("user grid table");
                let mut r: f64 = 0.0;
                for w in g.x.windows(2) {
                    for j in 0..=32 {
                        let x = w[0] + (w[1] - w[0]) * j as f64 / 32.0;
                        if t.eval(x).max(0.0) * f >= tol {
                            r = r.max(x.abs());
                        }
                    }
                }
                r
            }
        }
    }

    /// Interval outside of which `V(x, k) < tol`, or `None` when the
    /// profile is negligible everywhere (or a delta).
    pub fn extent_at(&self, tol: f64, k: f64) -> Option<(f64, f64)> {
        if self.is_delta() || self.is_zero() {
            return None;
        }
        let r = self.support_radius_at(tol, k);
        if r == 0.0 {
            return None;
        }
        match &self.kind {
            PotentialKind::SquareBarrier { width, .. } => Some((0.0, *width)),
            PotentialKind::UserGrid(g) => {
                let lo = g.x[0].max(-r);
                let hi = g.x.last().unwrap().min(r);
                (hi > lo).then_some((lo, hi))
            }
            _ => Some((-r, r)),
        }
    }

    /// Location of profile discontinuities (for ODE segmenting).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            PotentialKind::SquareBarrier { width, .. } => vec![0.0, width],
            _ => vec![],
        }
    }

    /// `∫ V(x, k) dx` over the line.
    pub fn line_integral(&self, k: f64) -> f64 {
        let f = self.k_factor(k);
        match &self.kind {
            PotentialKind::Delta { g } => g * self.multiplier(k),
            PotentialKind::SquareBarrier { height, width } => height * width * f,
            PotentialKind::Gaussian { height, width } => height * width * PI.sqrt() * f,
            PotentialKind::Dielectric { contrast, width } => contrast * width * PI.sqrt() * f,
            PotentialKind::Sech2 { height, width } => 2.0 * height * width * f,
            PotentialKind::UserGrid(_) => self.table.as_ref().unwrap().integral().max(0.0) * f,
        }
    }

    /// `∫ V(r, k) d^3x` for the radial reading of the profile.
    pub fn volume_integral(&self, k: f64) -> Result<f64> {
        let f = self.k_factor(k);
        Ok(match &self.kind {
            PotentialKind::Delta { .. } => {
                return Err(Error::Domain(
                    "delta models are one-dimensional only".into(),
                ))
            }
            PotentialKind::SquareBarrier { height, width } => {
                4.0 * PI / 3.0 * width.powi(3) * height * f
            }
            PotentialKind::Gaussian { height, width } => {
                height * PI.powf(1.5) * width.powi(3) * f
            }
            PotentialKind::Dielectric { contrast, width } => {
                contrast * PI.powf(1.5) * width.powi(3) * f
            }
            // 4π ∫ r² sech²(r/a) dr = 4π a³ π²/12
            PotentialKind::Sech2 { height, width } => {
                height * PI.powi(3) / 3.0 * width.powi(3) * f
            }
            PotentialKind::UserGrid(g) => {
                let t = self.table.as_ref().unwrap();
                let lo = g.x[0].max(0.0);
                let hi = *g.x.last().unwrap();
                if hi <= lo {
                    0.0
                } else {
                    let q = crate::numeric::quad::integrate(
                        |r| 4.0 * PI * r * r * t.eval(r).max(0.0),
                        lo,
                        hi,
                        1e-14,
                        1e-12,
                    );
                    q.value * f
                }
            }
        })
    }

    /// Does `k^2 sup_x V(x, k)` vanish as `k -> infinity`?
    pub fn has_casimir_decay(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let extra = match self.kind {
            PotentialKind::Dielectric { .. } => 2.0,
            _ => 0.0,
        };
        2.0 + extra - self.dispersion.decay_power() < 0.0
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PotentialKind::Delta { .. } => "delta",
            PotentialKind::SquareBarrier { .. } => "square_barrier",
            PotentialKind::Gaussian { .. } => "gaussian",
            PotentialKind::Sech2 { .. } => "sech2",
            PotentialKind::UserGrid(_) => "user_grid",
            PotentialKind::Dielectric { .. } => "dielectric",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_peak_and_dispersion() {
        let g = PotentialModel::gaussian(1.0, 1.0).unwrap();
        assert_eq!(g.evaluate(0.0, 7.3).unwrap(), 1.0);
        let gd = g.clone().with_lorentzian_cutoff(2.0, 2).unwrap();
        assert!((gd.evaluate(0.0, 2.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn vanishes_far_away() {
        let models = [
            PotentialModel::gaussian(1.0, 1.0).unwrap(),
            PotentialModel::sech2(2.0, 0.7).unwrap(),
            PotentialModel::square_barrier(1.0, 1.0).unwrap(),
            PotentialModel::dielectric(0.5, 1.0).unwrap(),
            PotentialModel::user_grid(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap(),
        ];
        for m in &models {
            let r = m.support_radius(1e-12).max(1.0);
            assert!(m.evaluate(1e6 * r, 1.0).unwrap() < 1e-12, "{}", m.kind_name());
            assert!(m.evaluate(-1e6 * r, 1.0).unwrap() < 1e-12);
        }
    }

    #[test]
    fn support_radii() {
        assert_eq!(PotentialModel::delta(2.0).unwrap().support_radius(1e-12), 0.0);
        let g = PotentialModel::gaussian(1.0, 1.0).unwrap();
        let expect = (1e12f64).ln().sqrt();
        assert!((g.support_radius(1e-12) - expect).abs() < 1e-12);
        assert!((expect - 5.256).abs() < 1e-3);
        assert_eq!(
            PotentialModel::square_barrier(1.0, 1.0)
                .unwrap()
                .support_radius(1e-12),
            1.0
        );
    }

    #[test]
    fn rejects_negative_and_malformed() {
        assert!(PotentialModel::gaussian(-1.0, 1.0).is_err());
        assert!(PotentialModel::delta(-0.1).is_err());
        assert!(PotentialModel::user_grid(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(PotentialModel::user_grid(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PotentialModel::dielectric(1.5, 1.0).is_err());
        assert!(PotentialModel::gaussian(1.0, 1.0)
            .unwrap()
            .with_lorentzian_cutoff(0.0, 2)
            .is_err());
        assert!(PotentialModel::gaussian(1.0, 1.0)
            .unwrap()
            .evaluate(f64::NAN, 1.0)
            .is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"kind":"gaussian","height":1.0,"width":0.5,
                       "dispersion":{"kind":"lorentzian_cutoff","k_c":2.0,"p":3}}"#;
        let m: PotentialModel = serde_json::from_str(json).unwrap();
        assert_eq!(m.dispersion(), DispersionProfile::LorentzianCutoff { k_c: 2.0, p: 3 });
        let back: PotentialModel =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        let bad = r#"{"kind":"gaussian","height":1.0}"#;
        assert!(serde_json::from_str::<PotentialModel>(bad).is_err());
    }

    #[test]
    fn integrals() {
        let g = PotentialModel::gaussian(2.0, 0.5).unwrap();
        assert!((g.line_integral(1.0) - 2.0 * 0.5 * PI.sqrt()).abs() < 1e-14);
        assert!((g.volume_integral(1.0).unwrap() - 2.0 * PI.powf(1.5) * 0.125).abs() < 1e-14);
        let grid: Vec<f64> = (0..801).map(|i| i as f64 * 0.01).collect();
        let vals: Vec<f64> = grid.iter().map(|r| g.value(*r, 1.0)).collect();
        let u = PotentialModel::user_grid(grid, vals).unwrap();
        let vi = u.volume_integral(1.0).unwrap();
        assert!((vi - g.volume_integral(1.0).unwrap()).abs() < 1e-5 * vi);
    }

    #[test]
    fn dispersion_decay_is_monotone_beyond_cutoff() {
        for p in 2..5u32 {
            let m = PotentialModel::gaussian(1.0, 1.0)
                .unwrap()
                .with_lorentzian_cutoff(1.5, p)
                .unwrap();
            assert!(m.has_casimir_decay());
            let ks = crate::numeric::logspace(1.5, 1e4, 60);
            let vals: Vec<f64> = ks.iter().map(|k| k * k * m.value(0.0, *k)).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]));
            assert!(*vals.last().unwrap() < 1e-3);
        }
        assert!(!PotentialModel::gaussian(1.0, 1.0).unwrap().has_casimir_decay());
        let diel = PotentialModel::dielectric(0.2, 1.0)
            .unwrap()
            .with_lorentzian_cutoff(1.0, 2)
            .unwrap();
        assert!(!diel.has_casimir_decay());
    }

    proptest! {
        #[test]
        fn positivity(h in 0.0f64..10.0, w in 0.05f64..5.0, x in -50.0f64..50.0,
                      k in 0.0f64..100.0, kc in 0.1f64..10.0, p in 1u32..5, which in 0usize..5) {
            let m = match which {
                0 => PotentialModel::gaussian(h, w),
                1 => PotentialModel::sech2(h, w),
                2 => PotentialModel::square_barrier(h, w),
                3 => PotentialModel::dielectric((h / 10.0).min(1.0), w),
                _ => PotentialModel::user_grid(vec![-w, 0.0, 0.3 * w, w], vec![0.0, h, 0.0, h]),
            }.unwrap().with_lorentzian_cutoff(kc, p).unwrap();
            let v = m.evaluate(x, k).unwrap();
            prop_assert!(v >= 0.0);
            let tol = 1e-9;
            let r = m.support_radius_at(tol, k);
            prop_assert!(m.value(r + 1e-9 + x.abs(), k) <= tol * 1.000001);
        }
    }
}

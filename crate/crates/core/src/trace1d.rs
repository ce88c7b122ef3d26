//! Regularised traces `tr[phi(sqrt H) - phi(sqrt H0)]` in one dimension.
//!
//! Three routes are provided: the direct S-matrix formula
//! `-∫ dk/2π phi'(k) arg det S(k)`, the reflection-only form in which
//! `arg det S` is rebuilt from `log(1 - |R|^2)` by a dispersion relation, and
//! the symmetric double integral for the Casimir energy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::interp::PiecewiseCubic;
use crate::numeric::quad::gauss_legendre;
use crate::numeric::{compensated_sum, fit_power_law};
use crate::pvmath::{pv_symmetric, Representation, SampledFunction, TailModel};
use crate::scatter1d::ScatterData1D;

/// Spectral weight `phi(k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFunction {
    /// `phi(k) = k`.
    Casimir,
    /// `phi(k) = k exp(-k / lambda)`.
    ExpCutoffCasimir { lambda: f64 },
    /// `phi(k) = height * exp(-((k - center) / width)^2)`.
    GaussianBump {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// Tabulated `phi`, zero outside the table.
    UserGrid { k: Vec<f64>, phi: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl WeightFunction {
    pub fn bump(center: f64, width: f64) -> Self {
        WeightFunction::GaussianBump {
            center,
            width,
            height: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunction::Casimir => Ok(()),
            WeightFunction::ExpCutoffCasimir { lambda } => {
                if lambda.is_finite() && *lambda > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config("phi.lambda", "must be finite and > 0"))
                }
            }
            WeightFunction::GaussianBump {
                center,
                width,
                height,
            } => {
                if !(width.is_finite() && *width > 0.0) {
                    Err(Error::config("phi.width", "must be finite and > 0"))
                } else if !(center.is_finite() && height.is_finite()) {
                    Err(Error::config("phi", "center and height must be finite"))
                } else {
                    Ok(())
                }
            }
            WeightFunction::UserGrid { k, phi } => {
                if k.len() < 2 || k.len() != phi.len() {
                    Err(Error::config("phi.k", "need >= 2 points and one value per point"))
                } else if k.windows(2).any(|w| !(w[1] > w[0])) || k[0] < 0.0 {
                    Err(Error::config("phi.k", "must be non-negative and increasing"))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn table(&self) -> Option<PiecewiseCubic> {
        match self {
            WeightFunction::UserGrid { k, phi } => Some(PiecewiseCubic::natural(k, phi)),
            _ => None,
        }
    }

    pub fn is_casimir(&self) -> bool {
        matches!(self, WeightFunction::Casimir)
    }

    /// `phi(k)`.
    pub fn value(&self, k: f64) -> f64 {
        self.eval_with(k, self.table().as_ref()).0
    }

    /// `phi'(k)`.
    pub fn deriv(&self, k: f64) -> f64 {
        self.eval_with(k, self.table().as_ref()).1
    }

    fn eval_with(&self, k: f64, table: Option<&PiecewiseCubic>) -> (f64, f64) {
        match self {
            WeightFunction::Casimir => (k, 1.0),
            WeightFunction::ExpCutoffCasimir { lambda } => {
                let e = (-k / lambda).exp();
                (k * e, e * (1.0 - k / lambda))
            }
            WeightFunction::GaussianBump {
                center,
                width,
                height,
            } => {
                let t = (k - center) / width;
                let v = height * (-t * t).exp();
                (v, -2.0 * t / width * v)
            }
            WeightFunction::UserGrid { k: ks, .. } => {
                let t = table.expect("user grid table");
                if k < ks[0] || k > *ks.last().unwrap() {
                    (0.0, 0.0)
                } else {
                    (t.eval(k), t.deriv(k))
                }
            }
        }
    }

    /// Values and derivatives on a grid (the table is built once).
    pub fn sample(&self, ks: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let t = self.table();
        ks.iter().map(|k| self.eval_with(*k, t.as_ref())).unzip()
    }
}

/// Grid summary recorded with a result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub k_min: f64,
    pub k_max: f64,
    pub count: usize,
}

impl GridInfo {
    pub fn of(ks: &[f64]) -> Self {
        Self {
            k_min: ks.first().copied().unwrap_or(0.0),
            k_max: ks.last().copied().unwrap_or(0.0),
            count: ks.len(),
        }
    }
}

/// A trace or energy with its decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub value: f64,
    pub breakdown: BTreeMap<String, f64>,
    pub quadrature_error: f64,
    pub kgrid: GridInfo,
    /// Optional `(k, value)` samples of an intermediate quantity.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<(f64, f64)>,
}

impl TraceResult {
    pub fn zero(ks: &[f64]) -> Self {
        Self {
            value: 0.0,
            breakdown: BTreeMap::new(),
            quadrature_error: 0.0,
            kgrid: GridInfo::of(ks),
            samples: Vec::new(),
        }
    }

    /// Sum of the additive breakdown terms.
    pub fn term(&self, name: &str) -> f64 {
        self.breakdown.get(name).copied().unwrap_or(0.0)
    }
}

/// Integral over `[0, inf)` of a function tabulated on `ks`: spline over the
/// grid, linear continuation to `k = 0`, fitted power-law tail.
pub(crate) struct HalfLineIntegral {
    pub grid: f64,
    pub head: f64,
    pub tail: f64,
    pub error: f64,
}

pub(crate) fn integrate_half_line(ks: &[f64], gs: &[f64], what: &str) -> Result<HalfLineIntegral> {
    let n = ks.len();
    if n < 4 {
        return Err(Error::Grid(format!("{what}: need at least 4 grid points")));
    }
    let spline = PiecewiseCubic::natural(ks, gs);
    let mono = PiecewiseCubic::pchip(ks, gs);
    let grid = spline.integral();
    let mut error = (grid - mono.integral()).abs();

    let (k0, k1) = (ks[0], ks[1]);
    let g0 = gs[0] - k0 * (gs[1] - gs[0]) / (k1 - k0);
    let head = 0.5 * k0 * (g0 + gs[0]);
    error += 0.5 * (head - k0 * gs[0]).abs();

    let scale = gs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let last = gs[n - 1];
    let tail = if last.abs() <= 1e-12 * scale || scale == 0.0 {
        0.0
    } else {
        let m = 6.min(n);
        let (c, p) = fit_power_law(&ks[n - m..], &gs[n - m..]).ok_or_else(|| {
            Error::Tail(format!(
                "{what}: integrand {last:.3e} at k = {} has not decayed and changes sign",
                ks[n - 1]
            ))
        })?;
        if p >= -1.05 {
            return Err(Error::Tail(format!(
                "{what}: integrand decays like k^{p:.2} at k = {}; not integrable",
                ks[n - 1]
            )));
        }
        let b = ks[n - 1];
        let t = -c * b.powf(p + 1.0) / (p + 1.0);
        error += 0.1 * t.abs();
        t
    };
    Ok(HalfLineIntegral {
        grid,
        head,
        tail,
        error,
    })
}

fn check_data(data: &[ScatterData1D]) -> Result<Vec<f64>> {
    let ks: Vec<f64> = data.iter().map(|d| d.k).collect();
    crate::scatter1d::check_grid(&ks)?;
    if ks.len() < 8 {
        return Err(Error::Grid("trace formulas need at least 8 k points".into()));
    }
    Ok(ks)
}

fn finish(h: HalfLineIntegral, ks: &[f64], samples: Vec<(f64, f64)>) -> TraceResult {
    let mut breakdown = BTreeMap::new();
    breakdown.insert("grid".to_string(), h.grid);
    breakdown.insert("head".to_string(), h.head);
    breakdown.insert("tail".to_string(), h.tail);
    TraceResult {
        value: compensated_sum([h.head, h.grid, h.tail]),
        breakdown,
        quadrature_error: h.error,
        kgrid: GridInfo::of(ks),
        samples,
    }
}

/// `-∫_0^inf (dk/2π) phi'(k) arg det S(k)`.
pub fn trace_direct(data: &[ScatterData1D], phi: &WeightFunction) -> Result<TraceResult> {
    phi.validate()?;
    let ks = check_data(data)?;
    if data.iter().all(|d| d.arg_t == 0.0) {
        return Ok(TraceResult::zero(&ks));
    }
    let (_, dphi) = phi.sample(&ks);
    let gs: Vec<f64> = data
        .iter()
        .zip(&dphi)
        .map(|(d, p)| -p * d.arg_det_s() / (2.0 * PI))
        .collect();
    let h = integrate_half_line(&ks, &gs, "trace_direct")?;
    Ok(finish(h, &ks, vec![]))
}

/// `log(1 - |R|^2)` on the data grid as a half-line function with a log
/// head and a fitted tail.
pub fn log_transmission(data: &[ScatterData1D]) -> Result<SampledFunction> {
    let ks: Vec<f64> = data.iter().map(|d| d.k).collect();
    let f: Vec<f64> = data.iter().map(|d| d.log_one_minus_r2()).collect();
    // A deep interior dip of |T|^2 calls for monotone interpolation of |T|^2.
    let interior_min = f[1..f.len() - 1]
        .iter()
        .enumerate()
        .any(|(i, v)| *v < -14.0 && *v < f[i] && *v < f[i + 2]);
    let rep = if interior_min {
        Representation::LogMonotone
    } else {
        Representation::Cubic
    };
    let sf = SampledFunction::with_representation(ks, f, rep)?;
    let sf = sf.fit_log_head();
    if sf.values().iter().rev().take(6).all(|v| *v == 0.0) {
        return Ok(sf);
    }
    sf.fit_right_tail(6)
}

/// `arg det S(k) = (1/π) P∫_0^inf log(1-|R(k')|^2) 2k/(k^2-k'^2) dk'`
/// evaluated at interior grid points.
pub fn arg_det_s_from_reflection(data: &[ScatterData1D]) -> Result<Vec<(f64, f64)>> {
    let f = log_transmission(data)?;
    let n = data.len();
    data[1..n - 1]
        .par_iter()
        .map(|d| Ok((d.k, pv_symmetric(&f, d.k)? / PI)))
        .collect()
}

/// Reflection-only route: `arg det S` is reconstructed from `|R|` alone.
/// Assumes `|R(-k)| = |R(k)|` (parity-symmetric scatterer).
pub fn trace_reflection(data: &[ScatterData1D], phi: &WeightFunction) -> Result<TraceResult> {
    phi.validate()?;
    let ks = check_data(data)?;
    if data.iter().all(|d| d.r2() == 0.0) {
        return Ok(TraceResult::zero(&ks));
    }
    let inner = arg_det_s_from_reflection(data)?;
    let outer_k: Vec<f64> = inner.iter().map(|p| p.0).collect();
    let (_, dphi) = phi.sample(&outer_k);
    let gs: Vec<f64> = inner
        .iter()
        .zip(&dphi)
        .map(|((_, a), p)| -p * a / (2.0 * PI))
        .collect();
    let h = integrate_half_line(&outer_k, &gs, "trace_reflection")?;
    Ok(finish(h, &outer_k, inner))
}

/// Symmetric kernel `[k F(k') - k' F(k)] / (k^2 - k'^2)`; exactly symmetric
/// under `(k, F(k)) <-> (k', F(k'))`.
#[inline]
pub fn casimir_kernel_1d(k: f64, kp: f64, fk: f64, fkp: f64) -> f64 {
    (k * fkp - kp * fk) / (k * k - kp * kp)
}

/// Diagonal value of [`casimir_kernel_1d`]: `[F(k) - k F'(k)] / (2k)`.
#[inline]
pub fn casimir_kernel_1d_diagonal(k: f64, fk: f64, dfk: f64) -> f64 {
    (fk - k * dfk) / (2.0 * k)
}

/// Gauss–Legendre nodes and weights on a log-spaced partition of `[lo, hi]`.
pub(crate) fn log_panel_nodes(lo: f64, hi: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let (u0, u1) = (a + p as f64 * h, a + (p + 1) as f64 * h);
        for (x, w) in gx.iter().zip(&gw) {
            let u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * x;
            let k = u.exp();
            xs.push(k);
            ws.push(0.5 * (u1 - u0) * w * k);
        }
    }
    (xs, ws)
}

/// Casimir energy `tr[sqrt H - sqrt H0]` from reflection data alone:
///
/// `-(1/2) ∫∫ (dk/π)(dk'/π) [k F(k') - k' F(k)]/(k^2 - k'^2)`,
/// `F = log(1 - |R|^2)`, over `[0, k_max]^2` with `k_max` the grid end.
///
/// For any scatterer with `∫ F dk != 0` this integral grows like
/// `-(∫F/π^2) ln k_max`; the coefficient is reported as
/// `cutoff_log_slope` and the change under doubling `k_max` enters the
/// error estimate.
pub fn casimir_energy_1d(data: &[ScatterData1D]) -> Result<TraceResult> {
    let ks = check_data(data)?;
    if data.iter().all(|d| d.r2() == 0.0) {
        return Ok(TraceResult::zero(&ks));
    }
    let f = log_transmission(data)?;
    if let TailModel::PowerLaw { exponent, .. } = f.right_tail {
        if exponent >= -2.0 {
            return Err(Error::Convergence(format!(
                "log(1-|R|^2) decays like k^{exponent:.2}; the Casimir double integral needs a \
                 dispersive potential (k^2 V -> 0)"
            )));
        }
    }
    let k_max = f.hi();
    let lo = f.lo() * 1e-8;
    let panels = (8.0 * (k_max / lo).log10()).ceil() as usize;
    let (xs, ws) = log_panel_nodes(lo, k_max, panels, 10);
    let fv: Vec<f64> = xs.iter().map(|k| f.eval_extended(*k)).collect();
    let dfv: Vec<f64> = xs
        .iter()
        .map(|k| {
            if *k >= f.lo() {
                f.deriv(*k)
            } else if let crate::pvmath::HeadModel::Log { slope } = f.head {
                slope / k
            } else {
                0.0
            }
        })
        .collect();

    let rows: Vec<f64> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let row = (0..xs.len()).map(|j| {
                let kern = if i == j {
                    casimir_kernel_1d_diagonal(xs[i], fv[i], dfv[i])
                } else {
                    casimir_kernel_1d(xs[i], xs[j], fv[i], fv[j])
                };
                ws[j] * kern
            });
            ws[i] * compensated_sum(row)
        })
        .collect();
    let double = compensated_sum(rows);
    let value = -0.5 * double / (PI * PI);

    let f_int = compensated_sum(fv.iter().zip(&ws).map(|(v, w)| v * w));
    let slope = -f_int / (PI * PI);

    let mut breakdown = BTreeMap::new();
    breakdown.insert("double_integral".to_string(), value);
    let mut r = TraceResult {
        value,
        breakdown,
        quadrature_error: (slope * std::f64::consts::LN_2).abs(),
        kgrid: GridInfo::of(&ks),
        samples: Vec::new(),
    };
    r.breakdown.insert("cutoff_log_slope".into(), slope);
    Ok(r)
}

/// Density of states `rho(k) = (1/2π) d arg det S / dk` by central
/// differences (one-sided at the ends).
pub fn density_of_states(data: &[ScatterData1D]) -> Vec<(f64, f64)> {
    let n = data.len();
    if n < 2 {
        return vec![];
    }
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            let d = (data[b].arg_det_s() - data[a].arg_det_s()) / (data[b].k - data[a].k);
            (data[i].k, d / (2.0 * PI))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::logspace;
    use crate::numeric::quad::integrate;
    use crate::potentials::PotentialModel;
    use crate::scatter1d::{solve_grid, ScatterData1D};

    fn delta_data(g: f64, n: usize) -> Vec<ScatterData1D> {
        let ks = logspace(1e-3, 200.0, n);
        solve_grid(&PotentialModel::delta(g).unwrap(), &ks, 1e-10).unwrap()
    }

    fn bump_oracle(g: f64) -> f64 {
        let phi = WeightFunction::bump(1.0, 0.5);
        integrate(
            |k| -phi.deriv(k) * (-2.0 * (g / (2.0 * k)).atan()) / (2.0 * PI),
            1e-12,
            10.0,
            1e-14,
            1e-12,
        )
        .value
    }

    #[test]
    fn free_gives_zero() {
        let ks = logspace(0.01, 10.0, 20);
        let data: Vec<_> = ks.iter().map(|k| ScatterData1D::free(*k)).collect();
        let phi = WeightFunction::bump(1.0, 0.5);
        assert_eq!(trace_direct(&data, &phi).unwrap().value, 0.0);
        assert_eq!(trace_reflection(&data, &phi).unwrap().value, 0.0);
        assert_eq!(casimir_energy_1d(&data).unwrap().value, 0.0);
    }

    #[test]
    fn direct_matches_closed_form_quadrature() {
        let r = trace_direct(&delta_data(2.0, 600), &WeightFunction::bump(1.0, 0.5)).unwrap();
        let want = bump_oracle(2.0);
        assert!((r.value - want).abs() < 1e-6 * want.abs(), "{} {}", r.value, want);
        assert!(r.value > 0.0);
    }

    #[test]
    fn reflection_route_agrees() {
        let data = delta_data(2.0, 600);
        let phi = WeightFunction::bump(1.0, 0.5);
        let a = trace_direct(&data, &phi).unwrap().value;
        let b = trace_reflection(&data, &phi).unwrap().value;
        assert!((a - b).abs() < 1e-3 * a.abs(), "{a} {b}");
    }

    #[test]
    fn linear_in_phi() {
        let data = delta_data(2.0, 400);
        let p1 = WeightFunction::bump(1.0, 0.5);
        let p2 = WeightFunction::ExpCutoffCasimir { lambda: 2.0 };
        let ks: Vec<f64> = data.iter().map(|d| d.k).collect();
        let (v1, _) = p1.sample(&ks);
        let (v2, _) = p2.sample(&ks);
        let mix = WeightFunction::UserGrid {
            k: ks.clone(),
            phi: v1.iter().zip(&v2).map(|(a, b)| 2.0 * a - 0.5 * b).collect(),
        };
        let t1 = trace_direct(&data, &p1).unwrap().value;
        let t2 = trace_direct(&data, &p2).unwrap().value;
        let tm = trace_direct(&data, &mix).unwrap().value;
        assert!((tm - (2.0 * t1 - 0.5 * t2)).abs() < 1e-4 * tm.abs());
    }

    #[test]
    fn non_dispersive_casimir_is_refused() {
        let data = delta_data(2.0, 200);
        assert!(matches!(
            trace_direct(&data, &WeightFunction::Casimir),
            Err(Error::Tail(_))
        ));
        assert!(matches!(casimir_energy_1d(&data), Err(Error::Convergence(_))));
    }

    #[test]
    fn kernel_is_bitwise_symmetric() {
        let pts = [(0.3, -1.2), (1.7, -0.01), (5.0, -3e-4)];
        for &(k, fk) in &pts {
            for &(q, fq) in &pts {
                if k != q {
                    assert_eq!(
                        casimir_kernel_1d(k, q, fk, fq).to_bits(),
                        casimir_kernel_1d(q, k, fq, fk).to_bits()
                    );
                }
            }
        }
        // Diagonal limit against a near-diagonal evaluation.
        let f = |k: f64| (k * k / (k * k + 1.0)).ln();
        let df = |k: f64| 2.0 / (k * (k * k + 1.0));
        let k = 0.8;
        let near = casimir_kernel_1d(k, k + 1e-6, f(k), f(k + 1e-6));
        assert!((near - casimir_kernel_1d_diagonal(k, f(k), df(k))).abs() < 1e-5);
    }

    #[test]
    fn direct_trace_is_non_negative_for_barriers() {
        let ks = logspace(1e-3, 60.0, 300);
        let m = PotentialModel::gaussian(1.0, 1.0).unwrap();
        let data = solve_grid(&m, &ks, 1e-9).unwrap();
        let r = trace_direct(&data, &WeightFunction::ExpCutoffCasimir { lambda: 3.0 }).unwrap();
        assert!(r.value > 0.0);
    }

    #[test]
    fn density_of_states_of_delta() {
        let data = delta_data(2.0, 2000);
        let rho = density_of_states(&data);
        // d/dk[-2 atan(1/k)] = 2/(1+k^2)
        let (k, v) = rho[1000];
        assert!((v - 2.0 / (1.0 + k * k) / (2.0 * PI)).abs() < 1e-4);
    }

    #[test]
    fn near_total_reflection_is_finite() {
        // Synthetic data with |R|^2 = 1 - eps at k = 1.
        let mut prev: Option<f64> = None;
        for eps in [1e-4, 1e-7, 1e-10] {
            let ks = logspace(1e-2, 50.0, 801);
            let data: Vec<ScatterData1D> = ks
                .iter()
                .map(|&k| {
                    let t2 = (((k - 1.0) * (k - 1.0) + eps) / (1.0 + (k - 1.0) * (k - 1.0)))
                        * (k * k / (1.0 + k * k));
                    let t = num_complex::Complex64::new(t2.sqrt(), 0.0);
                    let r = num_complex::Complex64::new(0.0, (1.0 - t2).sqrt());
                    ScatterData1D::new(k, r, t, 0.0)
                })
                .collect();
            let v = trace_reflection(&data, &WeightFunction::bump(2.0, 0.5))
                .unwrap()
                .value;
            assert!(v.is_finite());
            if let Some(p) = prev {
                assert!((v - p).abs() < 0.05 * v.abs().max(1e-3), "{v} {p}");
            }
            prev = Some(v);
        }
    }
}

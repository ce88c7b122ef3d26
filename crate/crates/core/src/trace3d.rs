//! Dispersion relation for the forward amplitude in three dimensions and
//! the three-term Casimir energy built from it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::potentials::PotentialModel;
use crate::pvmath::{pv_symmetric, SampledFunction, TailModel};
use crate::scatter3d::{phase_shift_grid, PhaseShiftSpectrum, SOperator};
use crate::trace1d::{integrate_half_line, log_panel_nodes, GridInfo, TraceResult};

/// Phase shifts above this size mark the data as strongly coupled.
pub const WEAK_COUPLING_ETA: f64 = 0.5;

/// Tabulated inputs of the dispersion relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionInputs {
    pub kgrid: Vec<f64>,
    /// Orientation-averaged total cross section.
    pub sigma_bar: Vec<f64>,
    /// `Im log det_1 S` on a continuous branch.
    pub log_det1_arg: Vec<f64>,
    /// `∫ V(x, k) d^3x`.
    pub born_integral: Vec<f64>,
    /// `(1/2π) k^2 sigma_bar`.
    pub hs_bound: Vec<f64>,
    /// Largest `|eta|` per `k`; empty when unknown.
    #[serde(default)]
    pub max_abs_eta: Vec<f64>,
}

impl DispersionInputs {
    pub fn new(
        kgrid: Vec<f64>,
        sigma_bar: Vec<f64>,
        log_det1_arg: Vec<f64>,
        born_integral: Vec<f64>,
    ) -> Result<Self> {
        let hs_bound = kgrid
            .iter()
            .zip(&sigma_bar)
            .map(|(k, s)| k * k * s / (2.0 * PI))
            .collect();
        let d = Self {
            kgrid,
            sigma_bar,
            log_det1_arg,
            born_integral,
            hs_bound,
            max_abs_eta: Vec::new(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        crate::scatter1d::check_grid(&self.kgrid)?;
        let n = self.kgrid.len();
        if n < 8 {
            return Err(Error::Grid("dispersion inputs need at least 8 k points".into()));
        }
        if self.sigma_bar.len() != n
            || self.log_det1_arg.len() != n
            || self.born_integral.len() != n
            || self.hs_bound.len() != n
            || !(self.max_abs_eta.is_empty() || self.max_abs_eta.len() == n)
        {
            return Err(Error::Grid("dispersion input columns differ in length".into()));
        }
        for (i, &k) in self.kgrid.iter().enumerate() {
            let (s, b, a) = (self.sigma_bar[i], self.born_integral[i], self.log_det1_arg[i]);
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Domain(format!("sigma_bar = {s} at k = {k}")));
            }
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::Domain(format!("born_integral = {b} at k = {k}")));
            }
            if !a.is_finite() {
                return Err(Error::Domain(format!("arg det_1 = {a} at k = {k}")));
            }
        }
        Ok(())
    }

    /// From partial-wave (or eigenchannel) spectra plus the Born integral.
    pub fn from_spectra(spectra: &[PhaseShiftSpectrum], born_integral: Vec<f64>) -> Result<Self> {
        let mut d = Self::new(
            spectra.iter().map(|s| s.k).collect(),
            spectra.iter().map(|s| s.sigma_bar()).collect(),
            spectra.iter().map(|s| s.log_det1().im).collect(),
            born_integral,
        )?;
        d.max_abs_eta = spectra.iter().map(|s| s.max_abs_eta()).collect();
        Ok(d)
    }

    /// Solve a radial model on `kgrid` and tabulate everything.
    pub fn from_model(model: &PotentialModel, kgrid: &[f64], tol: f64) -> Result<Self> {
        let spectra = phase_shift_grid(model, kgrid, None, tol)?;
        let born = kgrid
            .iter()
            .map(|&k| model.volume_integral(k))
            .collect::<Result<Vec<_>>>()?;
        Self::from_spectra(&spectra, born)
    }

    /// From branch-tracked S-operators; the Born integral must be supplied.
    pub fn from_soperators(ops: &[SOperator], born_integral: Vec<f64>) -> Result<Self> {
        let spectra = ops
            .iter()
            .map(|o| o.spectrum())
            .collect::<Result<Vec<_>>>()?;
        let mut d = Self::new(
            ops.iter().map(|o| o.k).collect(),
            ops.iter()
                .map(|o| PI * o.hs_norm_squared() / (o.k * o.k))
                .collect(),
            ops.iter()
                .map(|o| o.log_det1().map(|c| c.im))
                .collect::<Result<Vec<_>>>()?,
            born_integral,
        )?;
        d.max_abs_eta = spectra.iter().map(|s| s.max_abs_eta()).collect();
        Ok(d)
    }

    /// `k^2 sigma_bar` with a fitted power-law tail; the fit must show
    /// `sigma_bar` falling at least like `k^-2`.
    fn k2_sigma(&self) -> Result<SampledFunction> {
        let g: Vec<f64> = self
            .kgrid
            .iter()
            .zip(&self.sigma_bar)
            .map(|(k, s)| k * k * s)
            .collect();
        let f = SampledFunction::new(self.kgrid.clone(), g)?.fit_right_tail(6)?;
        if let TailModel::PowerLaw { exponent, .. } = f.right_tail {
            if exponent > 0.05 {
                return Err(Error::Convergence(format!(
                    "k^2 sigma_bar grows like k^{exponent:.2} at the end of the grid"
                )));
            }
        }
        Ok(f)
    }

    fn interp(&self, col: &[f64], k: f64) -> f64 {
        crate::numeric::interp::PiecewiseCubic::natural(&self.kgrid, col).eval(k)
    }
}

/// Terms of the forward-amplitude dispersion relation at one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReTrF {
    pub value: f64,
    pub born_term: f64,
    pub cross_section_term: f64,
}

fn re_tr_f_with(inputs: &DispersionInputs, g: &SampledFunction, k: f64) -> Result<ReTrF> {
    let born_term = -inputs.interp(&inputs.born_integral, k) / (4.0 * PI);
    // (1/2π^2) P∫ k'^2 sigma/(k'^2 - k^2) dk'
    let cross_section_term = -pv_symmetric(g, k)? / (2.0 * k) / (2.0 * PI * PI);
    Ok(ReTrF {
        value: born_term + cross_section_term,
        born_term,
        cross_section_term,
    })
}

/// `Re tr f(k) = -(1/4π) ∫V d^3x + (1/2π^2) P∫ k'^2 sigma_bar(k')/(k'^2 - k^2) dk'`.
pub fn re_tr_f(inputs: &DispersionInputs, k: f64) -> Result<ReTrF> {
    inputs.validate()?;
    let g = inputs.k2_sigma()?;
    re_tr_f_with(inputs, &g, k)
}

/// [`re_tr_f`] at several `k` sharing one tabulation.
pub fn re_tr_f_grid(inputs: &DispersionInputs, ks: &[f64]) -> Result<Vec<ReTrF>> {
    inputs.validate()?;
    let g = inputs.k2_sigma()?;
    ks.par_iter().map(|&k| re_tr_f_with(inputs, &g, k)).collect()
}

/// Terms of the renormalized `arg det S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgDetS {
    pub value: f64,
    pub det1_arg: f64,
    pub anomaly: f64,
    pub cross_section_term: f64,
    /// `|value - (arg det_1 + 2k Re tr f)|`.
    pub consistency_defect: f64,
}

fn arg_det_s_with(inputs: &DispersionInputs, g: &SampledFunction, k: f64) -> Result<ArgDetS> {
    let r = re_tr_f_with(inputs, g, k)?;
    let det1_arg = inputs.interp(&inputs.log_det1_arg, k);
    let anomaly = 2.0 * k * r.born_term;
    let cross_section_term = 2.0 * k * r.cross_section_term;
    let value = compensated_sum([det1_arg, anomaly, cross_section_term]);
    let defect = (value - (det1_arg + 2.0 * k * r.value)).abs();
    if defect > 1e-8 * (1.0 + value.abs()) {
        return Err(Error::Accuracy(format!(
            "arg det S terms do not re-sum at k = {k}: defect {defect:.2e}"
        )));
    }
    Ok(ArgDetS {
        value,
        det1_arg,
        anomaly,
        cross_section_term,
        consistency_defect: defect,
    })
}

/// `arg det S = arg det_1 S - (k/2π) ∫V d^3x + (k/π^2) P∫ k'^2 sigma_bar/(k'^2 - k^2) dk'`.
pub fn arg_det_s(inputs: &DispersionInputs, k: f64) -> Result<ArgDetS> {
    inputs.validate()?;
    let g = inputs.k2_sigma()?;
    arg_det_s_with(inputs, &g, k)
}

/// [`arg_det_s`] at several `k`.
pub fn arg_det_s_grid(inputs: &DispersionInputs, ks: &[f64]) -> Result<Vec<ArgDetS>> {
    inputs.validate()?;
    let g = inputs.k2_sigma()?;
    ks.par_iter().map(|&k| arg_det_s_with(inputs, &g, k)).collect()
}

/// Three-term Casimir energy with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Casimir3D {
    pub total: f64,
    pub anomaly_term: f64,
    pub cross_section_term: f64,
    pub det1_term: f64,
    /// `∫ (dk/2π) (1/2π) k^2 sigma_bar`.
    pub det1_bound: f64,
    pub bound_violated: bool,
    pub weak_coupling_flag: bool,
    pub max_abs_eta: Option<f64>,
    /// Change of the cross-section term per unit `ln k_max`.
    pub cutoff_log_slope: f64,
    pub error_estimate: f64,
}

impl Casimir3D {
    pub fn to_trace_result(&self, ks: &[f64]) -> TraceResult {
        let mut breakdown = BTreeMap::new();
        breakdown.insert("anomaly_term".to_string(), self.anomaly_term);
        breakdown.insert("cross_section_term".to_string(), self.cross_section_term);
        breakdown.insert("det1_term".to_string(), self.det1_term);
        breakdown.insert("det1_bound".to_string(), self.det1_bound);
        breakdown.insert("cutoff_log_slope".to_string(), self.cutoff_log_slope);
        TraceResult {
            value: self.total,
            breakdown,
            quadrature_error: self.error_estimate,
            kgrid: GridInfo::of(ks),
            samples: Vec::new(),
        }
    }
}

fn half_line(ks: &[f64], gs: &[f64], what: &str) -> Result<(f64, f64)> {
    let h = integrate_half_line(ks, gs, what).map_err(|e| match e {
        Error::Tail(m) => Error::Convergence(m),
        other => other,
    })?;
    Ok((compensated_sum([h.head, h.grid, h.tail]), h.error))
}

/// Symmetric cross-section kernel `k k' [g(k') - g(k)] / (k'^2 - k^2)`.
pub fn casimir_kernel_3d(k: f64, kp: f64, gk: f64, gkp: f64) -> f64 {
    let (a, b) = if k <= kp { (k, kp) } else { (kp, k) };
    let (ga, gb) = if k <= kp { (gk, gkp) } else { (gkp, gk) };
    a * b * (gb - ga) / ((b - a) * (b + a))
}

/// Diagonal limit `k g'(k) / 2`.
pub fn casimir_kernel_3d_diagonal(k: f64, dg: f64) -> f64 {
    0.5 * k * dg
}

/// Casimir energy `E = ∫(dk/2π)(k/2π)∫V d^3x
/// - (1/4π^3) ∫∫ k k' [k'σ(k') - kσ(k)]/(k'^2 - k^2) - ∫(dk/2π) arg det_1 S`.
///
/// The double integral runs over `[0, k_max]^2`; its slope in `ln k_max`
/// is reported and contributes to the error estimate.
pub fn casimir_energy_3d(inputs: &DispersionInputs) -> Result<Casimir3D> {
    inputs.validate()?;
    let ks = &inputs.kgrid;
    let n = ks.len();

    let anomaly_ig: Vec<f64> = ks
        .iter()
        .zip(&inputs.born_integral)
        .map(|(k, b)| k * b / (4.0 * PI * PI))
        .collect();
    let (anomaly_term, e1) = half_line(ks, &anomaly_ig, "anomaly term")?;

    let det1_ig: Vec<f64> = inputs.log_det1_arg.iter().map(|a| -a / (2.0 * PI)).collect();
    let (det1_term, e2) = half_line(ks, &det1_ig, "det_1 term")?;

    let bound_ig: Vec<f64> = inputs.hs_bound.iter().map(|h| h / (2.0 * PI)).collect();
    let (det1_bound, e3) = half_line(ks, &bound_ig, "det_1 bound")?;

    // g = k sigma_bar, continued linearly to zero below the grid
    let gs: Vec<f64> = ks.iter().zip(&inputs.sigma_bar).map(|(k, s)| k * s).collect();
    let (cross_section_term, slope, e4) = if gs.iter().all(|v| *v == 0.0) {
        (0.0, 0.0, 0.0)
    } else {
        let g = SampledFunction::new(ks.clone(), gs.clone())?;
        let (k0, k_max) = (ks[0], ks[n - 1]);
        let geval = |k: f64| if k < k0 { gs[0] * k / k0 } else { g.eval(k) };
        let dgeval = |k: f64| if k < k0 { gs[0] / k0 } else { g.deriv(k) };
        let lo = k0 * 1e-6;
        let panels = (8.0 * (k_max / lo).log10()).ceil() as usize;
        let (xs, ws) = log_panel_nodes(lo, k_max, panels, 10);
        let gv: Vec<f64> = xs.iter().map(|&k| geval(k)).collect();
        let dgv: Vec<f64> = xs.iter().map(|&k| dgeval(k)).collect();
        let rows: Vec<f64> = (0..xs.len())
            .into_par_iter()
            .map(|i| {
                let row = (0..xs.len()).map(|j| {
                    let kern = if i == j {
                        casimir_kernel_3d_diagonal(xs[i], dgv[i])
                    } else {
                        casimir_kernel_3d(xs[i], xs[j], gv[i], gv[j])
                    };
                    ws[j] * kern
                });
                ws[i] * compensated_sum(row)
            })
            .collect();
        let value = -compensated_sum(rows) / (4.0 * PI.powi(3));
        let kg = compensated_sum(xs.iter().zip(&gv).zip(&ws).map(|((k, g), w)| k * g * w));
        let slope = kg / (2.0 * PI.powi(3));
        (value, slope, (slope * std::f64::consts::LN_2).abs())
    };

    let max_abs_eta = (!inputs.max_abs_eta.is_empty())
        .then(|| inputs.max_abs_eta.iter().fold(0.0_f64, |m, v| m.max(*v)));
    Ok(Casimir3D {
        total: compensated_sum([anomaly_term, cross_section_term, det1_term]),
        anomaly_term,
        cross_section_term,
        det1_term,
        det1_bound,
        bound_violated: det1_term.abs() >= det1_bound && det1_term != 0.0,
        weak_coupling_flag: max_abs_eta.is_some_and(|m| m < WEAK_COUPLING_ETA),
        max_abs_eta,
        cutoff_log_slope: slope,
        error_estimate: e1 + e2 + e3 + e4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::logspace;

    fn free_inputs() -> DispersionInputs {
        let ks = logspace(0.05, 20.0, 40);
        let z = vec![0.0; ks.len()];
        DispersionInputs::new(ks, z.clone(), z.clone(), z).unwrap()
    }

    #[test]
    fn free_inputs_give_zero() {
        let d = free_inputs();
        assert_eq!(re_tr_f(&d, 1.0).unwrap().value, 0.0);
        assert_eq!(arg_det_s(&d, 1.0).unwrap().value, 0.0);
        let c = casimir_energy_3d(&d).unwrap();
        assert_eq!(c.total, 0.0);
        assert_eq!(c.anomaly_term, 0.0);
        assert_eq!(c.cross_section_term, 0.0);
        assert_eq!(c.det1_term, 0.0);
    }

    #[test]
    fn kernel_antisymmetry() {
        for &(k, kp) in &[(0.3, 2.0), (1.0, 1.5), (4.0, 0.1)] {
            let (g1, g2) = (0.7, 0.2);
            let a = casimir_kernel_3d(k, kp, g1, g2);
            let b = casimir_kernel_3d(kp, k, g2, g1);
            assert_eq!(a.to_bits(), b.to_bits());
            // the difference g(k') - g(k) flips sign under k <-> k'
            let c = k * kp * (g1 - g2) / (kp * kp - k * k);
            assert!((a + c).abs() < 1e-14);
        }
    }

    #[test]
    fn born_term_closed_form() {
        let m = PotentialModel::gaussian(0.05, 1.0).unwrap();
        let ks = logspace(0.02, 30.0, 60);
        let d = DispersionInputs::from_model(&m, &ks, 1e-9).unwrap();
        let r = re_tr_f(&d, 1.0).unwrap();
        let expect = -0.05 * PI.powf(1.5) / (4.0 * PI);
        assert!((r.born_term - expect).abs() < 1e-10);
    }

    #[test]
    fn dispersion_matches_partial_waves() {
        let m = PotentialModel::gaussian(0.05, 1.0).unwrap();
        let ks = logspace(0.02, 40.0, 120);
        let spectra = phase_shift_grid(&m, &ks, None, 1e-9).unwrap();
        let born = ks.iter().map(|&k| m.volume_integral(k).unwrap()).collect();
        let d = DispersionInputs::from_spectra(&spectra, born).unwrap();
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            let r = re_tr_f(&d, k).unwrap();
            let ps = crate::scatter3d::phase_shifts(&m, k, None, 1e-10).unwrap();
            let exact = ps.trace_f().re;
            assert!(
                ((r.value - exact) / exact).abs() < 0.05,
                "k={k}: {} vs {exact}",
                r.value
            );
            let a = arg_det_s(&d, k).unwrap();
            assert!(a.consistency_defect < 1e-10);
        }
    }

    #[test]
    fn non_dispersive_casimir_rejected() {
        let m = PotentialModel::gaussian(0.05, 1.0).unwrap();
        let ks = logspace(0.05, 20.0, 40);
        let d = DispersionInputs::from_model(&m, &ks, 1e-8).unwrap();
        assert!(matches!(casimir_energy_3d(&d), Err(Error::Convergence(_))));
    }

    #[test]
    fn anomaly_linear_det1_higher_order() {
        let ks = logspace(0.02, 10.0, 80);
        let run = |v0: f64| {
            let m = PotentialModel::gaussian(v0, 1.0)
                .unwrap()
                .with_lorentzian_cutoff(1.0, 3)
                .unwrap();
            casimir_energy_3d(&DispersionInputs::from_model(&m, &ks, 1e-10).unwrap()).unwrap()
        };
        let (a, b) = (run(0.01), run(0.02));
        let pa = (b.anomaly_term / a.anomaly_term).log2();
        let pd = (b.det1_term / a.det1_term).log2();
        assert!((pa - 1.0).abs() < 1e-6, "{pa}");
        assert!(pd > 1.8, "{pd}");
        assert!(a.weak_coupling_flag);
    }

    #[test]
    fn inputs_reject_negative_cross_section() {
        let ks = logspace(0.05, 20.0, 10);
        let mut s = vec![0.1; 10];
        s[3] = -1.0;
        assert!(DispersionInputs::new(ks, s, vec![0.0; 10], vec![0.0; 10]).is_err());
    }
}

//! S-operators in the `(l, m)` basis.

use std::borrow::Cow;
use std::f64::consts::PI;

use nalgebra::{linalg::Schur, DMatrix, DVector};
use num_complex::Complex64;

use super::{Channel, PhaseShiftSpectrum};
use crate::error::{Error, Result};

/// Storage of an S-operator.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorData {
    Dense(DMatrix<Complex64>),
    /// Diagonal in partial waves: one phase shift per `l`.
    PartialWaves(Vec<f64>),
}

/// An S-operator at one `k`, truncated to `l <= l_max`.
///
/// Rows and columns are ordered `(l, m)` lexicographically, `m = -l..=l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SOperator {
    pub k: f64,
    pub l_max: usize,
    pub data: OperatorData,
    /// Eigenphases on a branch continued from large `k`, once tracked.
    pub eigenphases: Option<Vec<f64>>,
}

pub(crate) fn basis_dim(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

fn expand(etas: &[f64]) -> impl Iterator<Item = f64> + '_ {
    etas.iter()
        .enumerate()
        .flat_map(|(l, &e)| std::iter::repeat_n(e, 2 * l + 1))
}

impl SOperator {
    pub fn from_matrix(k: f64, l_max: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = basis_dim(l_max);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Format(format!(
                "matrix is {}x{}, expected {n}x{n} for l_max = {l_max}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Format(format!("k = {k} must be finite and > 0")));
        }
        Ok(Self {
            k,
            l_max,
            data: OperatorData::Dense(matrix),
            eigenphases: None,
        })
    }

    /// Diagonal operator built from partial-wave phase shifts.
    pub fn from_spectrum(ps: &PhaseShiftSpectrum) -> Result<Self> {
        let l_max = ps
            .l_max
            .ok_or_else(|| Error::Domain("spectrum is not in partial waves".into()))?;
        let etas: Vec<f64> = ps.channels.iter().map(|c| c.eta).collect();
        Ok(Self {
            k: ps.k,
            l_max,
            eigenphases: Some(expand(&etas).collect()),
            data: OperatorData::PartialWaves(etas),
        })
    }

    pub fn dim(&self) -> usize {
        basis_dim(self.l_max)
    }

    pub fn partial_waves(&self) -> Option<&[f64]> {
        match &self.data {
            OperatorData::PartialWaves(p) => Some(p),
            OperatorData::Dense(_) => None,
        }
    }

    /// The dense matrix (built on demand for partial-wave data).
    pub fn matrix(&self) -> Cow<'_, DMatrix<Complex64>> {
        match &self.data {
            OperatorData::Dense(m) => Cow::Borrowed(m),
            OperatorData::PartialWaves(p) => Cow::Owned(DMatrix::from_diagonal(&DVector::from_iterator(
                self.dim(),
                expand(p).map(|e| Complex64::from_polar(1.0, 2.0 * e)),
            ))),
        }
    }

    /// `max |(S^dagger S - 1)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        match &self.data {
            OperatorData::PartialWaves(p) => p
                .iter()
                .map(|e| (Complex64::from_polar(1.0, 2.0 * e).norm_sqr() - 1.0).abs())
                .fold(0.0, f64::max),
            OperatorData::Dense(m) => {
                let p = m.adjoint() * m;
                let mut worst = 0.0_f64;
                for i in 0..p.nrows() {
                    for j in 0..p.ncols() {
                        let d = if i == j { p[(i, j)] - 1.0 } else { p[(i, j)] };
                        worst = worst.max(d.norm());
                    }
                }
                worst
            }
        }
    }

    /// Principal eigenphases in `(-pi/2, pi/2]` with eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let schur = Schur::try_new(self.matrix().into_owned(), 1e-15, 10_000)
            .ok_or_else(|| Error::Accuracy(format!("Schur iteration failed at k = {}", self.k)))?;
        let (q, t) = schur.unpack();
        let phases = (0..t.nrows()).map(|i| 0.5 * t[(i, i)].arg()).collect();
        Ok((phases, q))
    }

    fn phases(&self) -> Result<Vec<f64>> {
        match &self.eigenphases {
            Some(p) => Ok(p.clone()),
            None => Ok(self.eigen()?.0),
        }
    }

    /// Eigenchannels (each with multiplicity one), or the partial-wave
    /// spectrum when the operator is diagonal.
    pub fn spectrum(&self) -> Result<PhaseShiftSpectrum> {
        if let Some(pw) = self.partial_waves() {
            return Ok(PhaseShiftSpectrum::from_partial_waves(self.k, pw));
        }
        Ok(PhaseShiftSpectrum {
            k: self.k,
            channels: self
                .phases()?
                .into_iter()
                .enumerate()
                .map(|(i, eta)| Channel {
                    label: i,
                    degeneracy: 1,
                    eta,
                })
                .collect(),
            l_max: None,
        })
    }

    /// `||S - 1||_HS^2`.
    pub fn hs_norm_squared(&self) -> f64 {
        match &self.data {
            OperatorData::PartialWaves(p) => PhaseShiftSpectrum::from_partial_waves(self.k, p).hs_norm_squared(),
            OperatorData::Dense(m) => {
                let n = m.nrows();
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let d = if i == j { m[(i, j)] - 1.0 } else { m[(i, j)] };
                        s += d.norm_sqr();
                    }
                }
                s
            }
        }
    }

    /// `tr (S - 1) / (2 i k)`.
    pub fn trace_f(&self) -> Complex64 {
        match &self.data {
            OperatorData::PartialWaves(p) => PhaseShiftSpectrum::from_partial_waves(self.k, p).trace_f(),
            OperatorData::Dense(m) => {
                let tr: Complex64 = (0..m.nrows()).map(|i| m[(i, i)] - 1.0).sum();
                tr / Complex64::new(0.0, 2.0 * self.k)
            }
        }
    }

    /// `log det_1 S = sum_j [2 i eta_j - (lambda_j - 1)]` over eigenvalues.
    pub fn log_det1(&self) -> Result<Complex64> {
        if let Some(p) = self.partial_waves() {
            return Ok(PhaseShiftSpectrum::from_partial_waves(self.k, p).log_det1());
        }
        let phases = self.phases()?;
        let arg: f64 = phases.iter().map(|e| 2.0 * e).sum();
        Ok(Complex64::new(0.0, arg) - self.trace_f() * Complex64::new(0.0, 2.0 * self.k))
    }
}

/// `Q diag(exp(2 i eta)) Q^dagger`.
pub fn unitary_from_eigenphases(q: &DMatrix<Complex64>, eta: &[f64]) -> DMatrix<Complex64> {
    let d = DVector::from_iterator(
        eta.len(),
        eta.iter().map(|&e| Complex64::from_polar(1.0, 2.0 * e)),
    );
    q * DMatrix::from_diagonal(&d) * q.adjoint()
}

/// Assign eigenphase branches across an ascending `k` grid.
///
/// The largest `k` keeps principal phases; moving down, each new
/// eigenvector is matched greedily to the previous one with the largest
/// overlap and its phase is moved onto the nearest branch. A jump of more
/// than `pi/2` between neighbours is a branch error.
pub fn track_eigenphases(ops: &mut [SOperator]) -> Result<()> {
    if ops.windows(2).any(|w| w[1].k <= w[0].k) {
        return Err(Error::Grid("S-operators must have strictly ascending k".into()));
    }
    if ops.iter().all(|o| o.partial_waves().is_some()) {
        return Ok(());
    }
    let mut prev: Option<(Vec<f64>, DMatrix<Complex64>)> = None;
    for op in ops.iter_mut().rev() {
        let (p, v) = op.eigen()?;
        let assigned = match &prev {
            None => p,
            Some((pe, pv)) => {
                if pv.ncols() != v.ncols() {
                    return Err(Error::Format(format!(
                        "basis size changes at k = {}",
                        op.k
                    )));
                }
                let n = p.len();
                let ov = pv.adjoint() * &v;
                let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        pairs.push((ov[(i, j)].norm_sqr(), i, j));
                    }
                }
                pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut used_i = vec![false; n];
                let mut out = vec![f64::NAN; n];
                let mut left = n;
                for (_, i, j) in pairs {
                    if left == 0 {
                        break;
                    }
                    if used_i[i] || !out[j].is_nan() {
                        continue;
                    }
                    used_i[i] = true;
                    left -= 1;
                    let e = p[j] + PI * ((pe[i] - p[j]) / PI).round();
                    if (e - pe[i]).abs() > 0.5 * PI {
                        return Err(Error::Branch(format!(
                            "eigenphase jumps by {:.3} at k = {}",
                            e - pe[i],
                            op.k
                        )));
                    }
                    out[j] = e;
                }
                out
            }
        };
        op.eigenphases = Some(assigned.clone());
        prev = Some((assigned, v));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_unitary(n: usize, rng: &mut StdRng) -> DMatrix<Complex64> {
        let m = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        m.qr().q()
    }

    #[test]
    fn dense_and_channel_log_det1_agree() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let q = random_unitary(16, &mut rng);
            let eta: Vec<f64> = (0..16).map(|_| rng.random_range(-1.4..1.4)).collect();
            let op = SOperator::from_matrix(1.0, 3, unitary_from_eigenphases(&q, &eta)).unwrap();
            assert!(op.unitarity_defect() < 1e-13);
            let dense = op.log_det1().unwrap();
            let chan = PhaseShiftSpectrum {
                k: 1.0,
                channels: eta
                    .iter()
                    .map(|&e| Channel {
                        label: 0,
                        degeneracy: 1,
                        eta: e,
                    })
                    .collect(),
                l_max: None,
            }
            .log_det1();
            assert!((dense - chan).norm() < 1e-10, "{dense} vs {chan}");
            let hs = 4.0 * eta.iter().map(|e| e.sin().powi(2)).sum::<f64>();
            assert!((op.hs_norm_squared() - hs).abs() < 1e-10);
        }
    }

    #[test]
    fn tracking_follows_phases_through_pi_over_two() {
        let mut rng = StdRng::seed_from_u64(3);
        let q = random_unitary(4, &mut rng);
        let ks: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
        // eta_0 sweeps from 0 (large k) to 2.5 (small k)
        let exact = |k: f64| vec![2.5 * (-(k - 0.1)).exp().powi(2), 0.3 / k.sqrt(), -0.2, 0.05 * k];
        let mut ops: Vec<SOperator> = ks
            .iter()
            .map(|&k| SOperator::from_matrix(k, 1, unitary_from_eigenphases(&q, &exact(k))).unwrap())
            .collect();
        track_eigenphases(&mut ops).unwrap();
        let last = ops.last().unwrap().eigenphases.clone().unwrap();
        let sum_last: f64 = last.iter().sum();
        let sum_first: f64 = ops[0].eigenphases.as_ref().unwrap().iter().sum();
        let ex_first: f64 = exact(ks[0]).iter().sum();
        let ex_last: f64 = exact(*ks.last().unwrap()).iter().sum();
        assert!((sum_last - ex_last).abs() < 1e-10);
        assert!((sum_first - ex_first).abs() < 1e-10, "{sum_first} vs {ex_first}");
    }

    #[test]
    fn diagonal_operator_round_trip() {
        let ps = PhaseShiftSpectrum::from_partial_waves(1.2, &[0.4, -0.1, 0.02]);
        let op = SOperator::from_spectrum(&ps).unwrap();
        assert_eq!(op.dim(), 9);
        assert!((op.hs_norm_squared() - ps.hs_norm_squared()).abs() < 1e-13);
        assert!((op.trace_f() - ps.trace_f()).norm() < 1e-13);
        assert!((op.log_det1().unwrap() - ps.log_det1()).norm() < 1e-13);
    }
}

//! Piecewise-cubic interpolants.

/// Piecewise cubic `p_i(t) = c0 + c1 t + c2 t^2 + c3 t^3`, `t = x - x_i`.
#[derive(Debug, Clone)]
pub struct PiecewiseCubic {
    x: Vec<f64>,
    coef: Vec<[f64; 4]>,
}

impl PiecewiseCubic {
    /// Natural cubic spline through `(x, y)`. Requires at least two points.
    pub fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        if n == 2 {
            let s = (y[1] - y[0]) / (x[1] - x[0]);
            return Self {
                x: x.to_vec(),
                coef: vec![[y[0], s, 0.0, 0.0]],
            };
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        // Solve for second derivatives m_i with m_0 = m_{n-1} = 0.
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut sup = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        // Thomas algorithm; sub-diagonal entry of row i is h[i-1] (zero for row n-1).
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let sub = if i < n - 1 { h[i - 1] } else { 0.0 };
            let denom = diag[i] - sub * c[i - 1];
            c[i] = if i < n - 1 { sup[i] / denom } else { 0.0 };
            d[i] = (rhs[i] - sub * d[i - 1]) / denom;
        }
        m[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        let coef = (0..n - 1)
            .map(|i| {
                let hi = h[i];
                [
                    y[i],
                    (y[i + 1] - y[i]) / hi - hi * (2.0 * m[i] + m[i + 1]) / 6.0,
                    m[i] / 2.0,
                    (m[i + 1] - m[i]) / (6.0 * hi),
                ]
            })
            .collect();
        Self {
            x: x.to_vec(),
            coef,
        }
    }

    /// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson).
    ///
    /// Never overshoots the data, so non-negative data stay non-negative.
    pub fn pchip(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            for i in 1..n - 1 {
                if del[i - 1] * del[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
                }
            }
            d[0] = pchip_end(h[0], h[1], del[0], del[1]);
            d[n - 1] = pchip_end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        let coef = (0..n - 1)
            .map(|i| {
                let hi = h[i];
                [
                    y[i],
                    d[i],
                    (3.0 * del[i] - 2.0 * d[i] - d[i + 1]) / hi,
                    (d[i] + d[i + 1] - 2.0 * del[i]) / (hi * hi),
                ]
            })
            .collect();
        Self {
            x: x.to_vec(),
            coef,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Index of the piece containing `x` (clamped to the end pieces).
    pub fn locate(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let t = x - self.x[i];
        let c = &self.coef[i];
        c[0] + t * (c[1] + t * (c[2] + t * c[3]))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let t = x - self.x[i];
        let c = &self.coef[i];
        c[1] + t * (2.0 * c[2] + t * 3.0 * c[3])
    }

    /// Exact integral of the interpolant over its whole support.
    pub fn integral(&self) -> f64 {
        self.coef
            .iter()
            .zip(self.x.windows(2))
            .map(|(c, w)| {
                let h = w[1] - w[0];
                h * (c[0] + h * (c[1] / 2.0 + h * (c[2] / 3.0 + h * c[3] / 4.0)))
            })
            .sum()
    }
}

fn pchip_end(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

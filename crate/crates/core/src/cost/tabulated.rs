use alloc::string::String;
use alloc::vec::Vec;

use super::ProfileFn;
use crate::error::{Error, Result};

/// Profile given by samples of `f` and its first four derivatives on a
/// knot grid `0 = d₀ < d₁ < … < d_m`.
///
/// Each of `f, f', f'', f'''` is interpolated by the cubic Hermite spline
/// built from its own samples and those of the next derivative; `f''''` is
/// interpolated by a natural cubic spline.
#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    name: String,
    knots: Vec<f64>,
    /// `columns[k][i] = f^{(k)}(d_i)`
    columns: [Vec<f64>; 5],
    /// Second derivatives of the natural spline through `f''''`.
    top_moments: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(name: impl Into<String>, knots: Vec<f64>, columns: [Vec<f64>; 5]) -> Result<Self> {
        let m = knots.len();
        if m < 4 {
            return Err(Error::domain("tabulated profile needs at least four knots"));
        }
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::domain("tabulated profile columns differ in length"));
        }
        if knots[0] != 0.0 {
            return Err(Error::domain("tabulated profile must start at d = 0"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("tabulated knots must be strictly increasing"));
        }
        if *knots.last().unwrap() > core::f64::consts::PI {
            return Err(Error::domain("tabulated knots must lie in [0, π]"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("tabulated profile contains non-finite values"));
        }
        if columns[1][0].abs() > 1e-12 {
            return Err(Error::domain("tabulated profile must satisfy f'(0) = 0"));
        }
        if columns[1].windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("tabulated f' must be strictly increasing"));
        }
        let top_moments = natural_spline_moments(&knots, &columns[4]);
        Ok(Self { name: name.into(), knots, columns, top_moments })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn locate(&self, d: f64) -> usize {
        let last = self.knots.len() - 2;
        match self.knots.binary_search_by(|k| k.total_cmp(&d)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    fn hermite(&self, order: usize, d: f64) -> f64 {
        let i = self.locate(d);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let t = (d - x0) / h;
        let (y, dy) = (&self.columns[order], &self.columns[order + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]
    }

    fn natural(&self, d: f64) -> f64 {
        let i = self.locate(d);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - d) / h, (d - x0) / h);
        let (y, m) = (&self.columns[4], &self.top_moments);
        a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
    }
}

fn natural_spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = alloc::vec![0.0; n];
    let mut u = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * m[i - 1] + 2.0;
        m[i] = (sig - 1.0) / p;
        let slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * slope / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    m[n - 1] = 0.0;
    for k in (0..n - 1).rev() {
        m[k] = m[k] * m[k + 1] + u[k];
    }
    m[0] = 0.0;
    m
}

impl ProfileFn for TabulatedProfile {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, d: f64) -> f64 {
        self.hermite(0, d)
    }
    fn d1(&self, d: f64) -> f64 {
        self.hermite(1, d)
    }
    fn d2(&self, d: f64) -> f64 {
        self.hermite(2, d)
    }
    fn d3(&self, d: f64) -> f64 {
        self.hermite(3, d)
    }
    fn d4(&self, d: f64) -> f64 {
        self.natural(d)
    }
    fn domain_cut(&self) -> f64 {
        *self.knots.last().unwrap()
    }
}

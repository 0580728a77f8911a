//! Natural cubic spline interpolation (zero second derivative at both ends).

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                field: "spline knots".into(),
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::param("knots", "a spline needs at least 2 knots"));
        }
        if xs.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater)) {
            return Err(Error::param("knots", "knot positions must be strictly increasing"));
        }
        if ys.iter().chain(&xs).any(|v| !v.is_finite()) {
            return Err(Error::param("knots", "non-finite knot"));
        }
        let m = second_derivatives(&xs, &ys);
        Ok(NaturalCubicSpline { xs, ys, m })
    }

    /// Knots spread uniformly over `[0, span]`.
    pub fn uniform(span: f64, ys: Vec<f64>) -> Result<Self> {
        let k = ys.len();
        if k < 2 {
            return Err(Error::param("knots", "a spline needs at least 2 knots"));
        }
        let xs = (0..k).map(|i| span * i as f64 / (k - 1) as f64).collect();
        NaturalCubicSpline::new(xs, ys)
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// Samples the spline at integer positions `0..len`.
    pub fn sample_grid(&self, len: usize) -> Vec<f64> {
        (0..len).map(|t| self.eval(t as f64)).collect()
    }
}

fn second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Tridiagonal system for interior knots, solved with the Thomas algorithm.
    let inner = n - 2;
    let mut diag = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    for k in 0..inner {
        let i = k + 1;
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        diag[k] = 2.0 * (h0 + h1);
        upper[k] = h1;
        rhs[k] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    for k in 1..inner {
        let lower = xs[k + 1] - xs[k];
        let f = lower / diag[k - 1];
        diag[k] -= f * upper[k - 1];
        rhs[k] -= f * rhs[k - 1];
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for k in (0..inner - 1).rev() {
        m[k + 1] = (rhs[k] - upper[k] * m[k + 2]) / diag[k];
    }
    m
}

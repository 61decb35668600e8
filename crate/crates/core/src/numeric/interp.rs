//! Shape-preserving piecewise cubic Hermite interpolation (Fritsch–Butland slopes).

use crate::error::{Error, Result};

/// Monotone cubic interpolant through strictly increasing abscissae.
///
/// Slopes are the weighted harmonic means of adjacent secants and are set to
/// zero at local extrema, so monotone data yields a monotone interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::invalid("interpolation needs equally sized, non-empty tables"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("interpolation abscissae must be strictly increasing"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("interpolation table contains non-finite values"));
        }
        let slopes = fritsch_butland(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn locate(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::ExtrapolationError { t: x, min: lo, max: hi });
        }
        let i = self.xs.partition_point(|&v| v <= x);
        Ok(i.saturating_sub(1).min(self.xs.len().saturating_sub(2)))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.xs.len() == 1 {
            return if x == self.xs[0] {
                Ok(self.ys[0])
            } else {
                Err(Error::ExtrapolationError { t: x, min: self.xs[0], max: self.xs[0] })
            };
        }
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        Ok(h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1])
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        if self.xs.len() == 1 {
            return Ok(0.0);
        }
        let i = self.locate(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let dy = self.ys[i + 1] - self.ys[i];
        let d00 = 6.0 * s * s - 6.0 * s;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d11 = 3.0 * s * s - 2.0 * s;
        // h01' = -h00', so the value part collapses to -h00' * dy / h.
        Ok(-d00 * dy / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1])
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

fn fritsch_butland(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![0.0];
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// One-sided three-point slope, clamped to keep the end interval monotone.
fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let xs = vec![0.0, 1.0, 2.5, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(c.eval(*x).unwrap(), *y);
        }
        assert!((c.eval(1.7).unwrap() - 4.1).abs() < 1e-12);
        assert!((c.derivative(3.3).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_on_steep_data() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = vec![0.0, 0.0, 0.1, 10.0, 10.05, 10.1];
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=5000 {
            let v = c.eval(i as f64 * 1e-3).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn extrapolation_is_an_error() {
        let c = MonotoneCubic::new(vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(c.eval(2.5), Err(Error::ExtrapolationError { .. })));
        assert!(matches!(c.eval(0.5), Err(Error::ExtrapolationError { .. })));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for &x in &[0.7, 2.3, 6.1] {
            let h = 1e-6;
            let fd = (c.eval(x + h).unwrap() - c.eval(x - h).unwrap()) / (2.0 * h);
            assert!((fd - c.derivative(x).unwrap()).abs() < 1e-6);
        }
    }
}

//! Rate functions for one-dimensional Itô equations `dz = b(z)dt + σ(z)dw`
//! through an increasing change of variables `z̃ = f(z)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Change of variables `f` with its first two derivatives and inverse `g`.
#[derive(Clone)]
pub struct Transform {
    f: ScalarFn,
    df: ScalarFn,
    d2f: ScalarFn,
    inverse: ScalarFn,
}

impl Transform {
    pub fn new<F, D1, D2, G>(f: F, df: D1, d2f: D2, inverse: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
            inverse: Arc::new(inverse),
        }
    }

    pub fn identity() -> Self {
        Self::new(|x| x, |_| 1.0, |_| 0.0, |y| y)
    }

    /// `f(x) = ∫ dx / (θ x^α)`, the transform that turns the drift `θ x^α` into
    /// a unit drift. For `α < 1` the integral starts at 0, for `α = 1` at 1.
    pub fn power_drift(bound: PowerDriftBound) -> Result<Self> {
        bound.validate()?;
        let PowerDriftBound { theta, alpha } = bound;
        let t = Self::new(
            move |x| bound.antiderivative(x),
            move |x| 1.0 / (theta * x.powf(alpha)),
            move |x| -alpha / (theta * x.powf(alpha + 1.0)),
            move |y| bound.inverse_antiderivative(y),
        );
        Ok(t)
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn d2f(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (self.inverse)(y)
    }
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Transform { .. }")
    }
}

/// A drift majorant `θ x^α` with `α ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDriftBound {
    pub theta: f64,
    pub alpha: f64,
}

impl PowerDriftBound {
    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::invalid("drift bound constant must be positive"));
        }
        if !(self.alpha <= 1.0) {
            return Err(Error::invalid("drift bound exponent must be at most 1"));
        }
        Ok(())
    }

    /// Smallest `θ` with `drift(x) ≤ θ x^α` on every grid point.
    pub fn fit<F>(drift: F, alpha: f64, grid: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut theta = f64::MIN_POSITIVE;
        for &x in grid {
            theta = theta.max(drift(x)? / x.powf(alpha));
        }
        let bound = Self { theta, alpha };
        bound.validate()?;
        Ok(bound)
    }

    fn antiderivative(&self, x: f64) -> f64 {
        if self.alpha == 1.0 {
            x.ln() / self.theta
        } else {
            let p = 1.0 - self.alpha;
            x.powf(p) / (self.theta * p)
        }
    }

    fn inverse_antiderivative(&self, y: f64) -> f64 {
        if self.alpha == 1.0 {
            (self.theta * y).exp()
        } else {
            let p = 1.0 - self.alpha;
            (self.theta * p * y).powf(1.0 / p)
        }
    }

    /// `g(t)` solving `t = ∫ dx / (θ x^α)`.
    pub fn rate(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("time must be non-negative, got {t}")));
        }
        Ok(self.inverse_antiderivative(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Verified,
    Violated,
}

impl Condition {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Verified
        } else {
            Self::Violated
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verified => "VERIFIED",
            Self::Violated => "VIOLATED",
        })
    }
}

/// Inputs for [`check_prop5_conditions`]. `grid` holds points `x` of the
/// transformed coordinate; the original state is `g(x)`.
pub struct Prop5Input<'a> {
    pub drift: &'a dyn Fn(f64) -> f64,
    pub diffusion: &'a dyn Fn(f64) -> f64,
    pub transform: &'a Transform,
    pub grid: &'a [f64],
    /// Majorant `b̃` of the drift and its derivative, when the transform is
    /// built from it.
    pub dominating: Option<(&'a dyn Fn(f64) -> f64, &'a dyn Fn(f64) -> f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop5Report {
    /// Supremum of the transformed drift `b̂` over the grid.
    pub b0: f64,
    pub drift_condition: Condition,
    /// Fitted `C` and `α` in `σ̂(x) ≤ C(1 + x^α)`.
    pub diffusion_constant: f64,
    pub diffusion_exponent: f64,
    pub diffusion_condition: Condition,
    /// `max(0, sup −(σ/b̃)² b̃′)` over the states `g(x)`.
    pub c2: Option<f64>,
    /// `1 + C₂/2`.
    pub dominated_constant: Option<f64>,
}

impl Prop5Report {
    /// Linear speed of the transformed process: `1 + C₂/2` when a majorant was
    /// supplied, `b₀` otherwise.
    pub fn speed(&self) -> f64 {
        self.dominated_constant.unwrap_or(self.b0)
    }

    pub fn holds(&self) -> bool {
        self.drift_condition == Condition::Verified && self.diffusion_condition == Condition::Verified
    }

    /// `g((speed + ε) t)`.
    pub fn rate(&self, transform: &Transform, eps: f64, t: f64) -> f64 {
        transform.inverse((self.speed() + eps) * t)
    }
}

// Least-squares slope of log y against log x over the upper half of the grid.
fn tail_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let start = xs.len() / 2;
    let pts: Vec<(f64, f64)> = xs[start..]
        .iter()
        .zip(&ys[start..])
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Tail slope above which the transformed drift is treated as unbounded.
const DRIFT_GROWTH_TOLERANCE: f64 = 0.1;

/// Evaluates the drift and diffusion conditions of the transformed equation
/// `dz̃ = b̂(z̃)dt + σ̂(z̃)dw` on a grid.
///
/// The drift condition is judged from the tail of the grid: it is reported
/// verified when `b̂` is finite and its log-log slope over the upper half of
/// the grid is at most 0.1. The diffusion exponent is that same tail slope for
/// `σ̂`, floored at 0.
pub fn check_prop5_conditions(input: &Prop5Input<'_>) -> Result<Prop5Report> {
    let grid = input.grid;
    if grid.is_empty() {
        return Err(Error::invalid("condition grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::invalid("condition grid must be positive and increasing"));
    }
    let tr = input.transform;
    let mut states = Vec::with_capacity(grid.len());
    for &x in grid {
        let z = tr.inverse(x);
        if !(tr.df(z) > 0.0) || states.last().is_some_and(|&prev| !(z > prev)) {
            return Err(Error::NonMonotoneTransform { x });
        }
        states.push(z);
    }

    let b_hat: Vec<f64> = states
        .iter()
        .map(|&z| {
            let s = (input.diffusion)(z);
            (input.drift)(z) * tr.df(z) + 0.5 * s * s * tr.d2f(z)
        })
        .collect();
    let sigma_hat: Vec<f64> = states.iter().map(|&z| (input.diffusion)(z) * tr.df(z)).collect();

    let b0 = b_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let drift_ok = b0.is_finite()
        && b_hat.iter().all(|v| v.is_finite())
        && tail_log_slope(grid, &b_hat).map_or(true, |s| s <= DRIFT_GROWTH_TOLERANCE);

    let alpha = tail_log_slope(grid, &sigma_hat).unwrap_or(0.0).max(0.0);
    let c = grid
        .iter()
        .zip(&sigma_hat)
        .map(|(x, s)| s.abs() / (1.0 + x.powf(alpha)))
        .fold(0.0, f64::max);
    let diffusion_ok = c.is_finite() && alpha < 1.0;

    let c2 = input.dominating.map(|(bt, dbt)| {
        states
            .iter()
            .map(|&z| {
                let ratio = (input.diffusion)(z) / bt(z);
                -ratio * ratio * dbt(z)
            })
            .fold(0.0, f64::max)
    });

    Ok(Prop5Report {
        b0,
        drift_condition: Condition::from_bool(drift_ok),
        diffusion_constant: c,
        diffusion_exponent: alpha,
        diffusion_condition: Condition::from_bool(diffusion_ok),
        c2,
        dominated_constant: c2.map(|v| 1.0 + v / 2.0),
    })
}

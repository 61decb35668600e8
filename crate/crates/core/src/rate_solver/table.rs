use super::{effective_lower_limit, PsiSolver};
use crate::error::{Error, Result};
use crate::numeric::MonotoneCubic;
use crate::profiles::{rho_tilde_inverse, GrowthProfile, RadialCoefficient};

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Table(MonotoneCubic),
    Zero,
    Infinite,
}

/// A strictly increasing rate `t ↦ ψ(C·t)` sampled on a time grid.
///
/// Between samples the table is interpolated monotonically; outside the
/// sampled range evaluation fails. The two constant sentinels evaluate
/// everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    kind: Kind,
    lower_limit: f64,
    scale: f64,
}

impl RateFunction {
    /// Builds a table from samples strictly increasing in both coordinates.
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, lower_limit: f64, scale: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("rate table needs at least one sample"));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("rate samples must be strictly increasing"));
        }
        Ok(Self {
            kind: Kind::Table(MonotoneCubic::new(times, values)?),
            lower_limit,
            scale,
        })
    }

    /// Samples an increasing closed-form rate.
    pub fn from_fn<F>(times: &[f64], f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let values = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::from_samples(times.to_vec(), values, f64::NAN, 1.0)
    }

    /// The rate that every positive path exceeds.
    pub fn zero() -> Self {
        Self { kind: Kind::Zero, lower_limit: f64::NAN, scale: 1.0 }
    }

    /// The rate no path exceeds.
    pub fn infinite() -> Self {
        Self { kind: Kind::Infinite, lower_limit: f64::NAN, scale: 1.0 }
    }

    pub fn is_sentinel(&self) -> bool {
        !matches!(self.kind, Kind::Table(_))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match &self.kind {
            Kind::Table(c) => c.eval(t),
            Kind::Zero => Ok(0.0),
            Kind::Infinite => Ok(f64::INFINITY),
        }
    }

    /// Sampled `(t, ψ(C·t))` pairs; empty for sentinels.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            Kind::Table(c) => c.xs().iter().copied().zip(c.ys().iter().copied()).collect(),
            _ => Vec::new(),
        }
    }

    /// Time range on which [`RateFunction::eval`] succeeds.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Table(c) => c.domain(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Lower integration limit `r★` used to build the table.
    pub fn lower_limit(&self) -> f64 {
        self.lower_limit
    }

    /// Time shift relative to integrating from 2, when `r★ ≠ 2`.
    pub fn shift_note(&self) -> Option<String> {
        (self.lower_limit.is_finite() && self.lower_limit != 2.0)
            .then(|| format!("lower limit moved from 2 to {}", self.lower_limit))
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Tabulates `t ↦ ψ(scale·t)` on `times` using the lower limit `r★`.
pub fn rate_table(profile: &GrowthProfile, times: &[f64], scale: f64) -> Result<RateFunction> {
    rate_table_from(profile, times, scale, effective_lower_limit(profile)?)
}

/// [`rate_table`] with an explicit lower limit `r_lo > 1`.
pub fn rate_table_from(profile: &GrowthProfile, times: &[f64], scale: f64, r_lo: f64) -> Result<RateFunction> {
    if !(scale > 0.0) || scale.is_infinite() {
        return Err(Error::invalid(format!("scale must be positive, got {scale}")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("time grid must be non-negative and strictly increasing"));
    }
    let mut solver = PsiSolver::new(profile, r_lo)?;
    let values = times
        .iter()
        .map(|&t| solver.solve(scale * t))
        .collect::<Result<Vec<_>>>()?;
    RateFunction::from_samples(times.to_vec(), values, r_lo, scale)
}

/// `ψ̃ = ρ̃⁻¹ ∘ ψ` sample by sample.
pub fn euclidean_rate(rate: &RateFunction, coeff: &RadialCoefficient) -> Result<RateFunction> {
    if rate.is_sentinel() {
        return Ok(rate.clone());
    }
    let (times, values): (Vec<f64>, Vec<f64>) = rate.samples().into_iter().unzip();
    let mut mapped = Vec::with_capacity(values.len());
    for (&t, &v) in times.iter().zip(&values) {
        let s = rho_tilde_inverse(coeff, v)?;
        if !s.is_finite() {
            return Err(Error::DomainError {
                what: "Euclidean rate overflows f64".into(),
                t,
            });
        }
        mapped.push(s);
    }
    RateFunction::from_samples(times, mapped, rate.lower_limit, rate.scale)
}

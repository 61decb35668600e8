//! Coefficient and volume-growth models, intrinsic radius, radial drifts and
//! the closed-form rate catalogue.

mod catalogue;
mod coefficient;
mod prop5;

use std::fmt;
use std::sync::Arc;

pub use catalogue::{closed_form_rate, CatalogueCase};
pub use coefficient::{
    log_rho_tilde_inverse, rho_tilde, rho_tilde_inverse, RadialCoefficient, TabulatedCoefficient,
};
pub use prop5::{check_prop5_conditions, Condition, PowerDriftBound, Prop5Input, Prop5Report, Transform};

use crate::error::{Error, Result};
use crate::numeric::MonotoneCubic;

/// Default guard radius for terms with a `1/r` singularity.
pub const ORIGIN_FLOOR: f64 = 1e-6;

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Log-volume `V(r) = log μ(B(r))` and energy bound `λ(r)` as functions of radius.
#[derive(Clone)]
pub struct GrowthProfile {
    label: String,
    log_volume: RadialFn,
    energy_bound: RadialFn,
    domain: (f64, f64),
}

impl GrowthProfile {
    pub fn new<V, L>(label: impl Into<String>, log_volume: V, energy_bound: L) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            log_volume: Arc::new(log_volume),
            energy_bound: Arc::new(energy_bound),
            domain: (0.0, f64::INFINITY),
        }
    }

    /// `V(r) = n log r`, `λ ≡ 1`.
    pub fn euclidean(n: u32) -> Self {
        let n = f64::from(n);
        Self::new(format!("euclidean(n={n})"), move |r| n * r.ln(), |_| 1.0)
    }

    /// Restricts the radii on which the profile is meaningful.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn log_volume(&self, r: f64) -> f64 {
        (self.log_volume)(r)
    }

    pub fn energy_bound(&self, r: f64) -> f64 {
        (self.energy_bound)(r)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

impl fmt::Debug for GrowthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrowthProfile")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// How the energy bound of a radial profile is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyMode {
    /// Radius in the intrinsic metric, where `λ ≡ 1`.
    UnitEnergy,
    /// Euclidean radius with `λ(r) = ã(r)`.
    CoefficientEnergy,
}

/// Growth profile of `ℝⁿ` with Lebesgue measure under the coefficient `coeff`.
///
/// In [`EnergyMode::UnitEnergy`] the radius is intrinsic and
/// `V(r) = n log ρ̃⁻¹(r)`; the domain stops at `sup ρ̃` when that is finite.
pub fn profile_from_radial(coeff: &RadialCoefficient, n: u32, mode: EnergyMode) -> Result<GrowthProfile> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let dim = f64::from(n);
    match mode {
        EnergyMode::UnitEnergy => {
            let c = coeff.clone();
            let sup = coeff.rho_tilde_supremum().unwrap_or(f64::INFINITY);
            let label = format!("{coeff} n={n} unit_energy");
            // Past sup ρ̃ the volume is already infinite.
            Ok(GrowthProfile::new(
                label,
                move |r| log_rho_tilde_inverse(&c, r).map_or(f64::INFINITY, |l| dim * l),
                |_| 1.0,
            )
            .with_domain(0.0, sup))
        }
        EnergyMode::CoefficientEnergy => {
            let c = coeff.clone();
            Ok(GrowthProfile::new(
                format!("{coeff} n={n} coefficient_energy"),
                move |r| dim * r.ln(),
                move |r| c.value(r),
            ))
        }
    }
}

/// `Lρ₀ = −ã′/(2√ã) + (n−1)√ã/r` at Euclidean radius `r`.
pub fn drift_l_rho(coeff: &RadialCoefficient, n: u32, r: f64) -> Result<f64> {
    drift_l_rho_with_floor(coeff, n, r, ORIGIN_FLOOR)
}

pub fn drift_l_rho_with_floor(coeff: &RadialCoefficient, n: u32, r: f64, floor: f64) -> Result<f64> {
    if !(r >= floor) {
        return Err(Error::SingularOrigin { r, floor });
    }
    let a = coeff.value(r);
    if !(a > 0.0) {
        return Err(Error::NonPositiveCoefficient { r });
    }
    let sa = a.sqrt();
    Ok(-coeff.derivative(r) / (2.0 * sa) + f64::from(n.saturating_sub(1)) * sa / r)
}

/// Warping function `ξ` of a model manifold `dr² + ξ²(r)dθ²`.
#[derive(Debug, Clone, PartialEq)]
pub enum Warp {
    Euclidean,
    Hyperbolic { curvature: f64 },
    Tabulated(Arc<MonotoneCubic>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    dimension: u32,
    warp: Warp,
}

impl ManifoldModel {
    pub fn euclidean(dimension: u32) -> Result<Self> {
        Self::new(dimension, Warp::Euclidean)
    }

    pub fn hyperbolic(dimension: u32, curvature: f64) -> Result<Self> {
        Self::new(dimension, Warp::Hyperbolic { curvature })
    }

    /// Custom warp from samples of `ξ` starting at `r = 0`.
    pub fn tabulated(dimension: u32, radii: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if radii.first() != Some(&0.0) || xi.first().map_or(true, |v| v.abs() > 1e-12) {
            return Err(Error::invalid("tabulated warp must satisfy xi(0) = 0"));
        }
        if xi[1..].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("tabulated warp must be positive away from the pole"));
        }
        let table = MonotoneCubic::new(radii, xi)?;
        let slope = table.derivative(0.0)?;
        if (slope - 1.0).abs() > 1e-2 {
            return Err(Error::invalid(format!("tabulated warp has xi'(0) = {slope}, expected 1")));
        }
        Self::new(dimension, Warp::Tabulated(Arc::new(table)))
    }

    pub fn new(dimension: u32, warp: Warp) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::invalid("model manifold dimension must be at least 2"));
        }
        if let Warp::Hyperbolic { curvature } = warp {
            if !(curvature > 0.0 && curvature.is_finite()) {
                return Err(Error::invalid("hyperbolic curvature must be positive"));
            }
        }
        Ok(Self { dimension, warp })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }
}

/// `m(r) = (n−1)ξ′(r)/ξ(r)`, the radial drift of Brownian motion on the model.
pub fn mean_curvature(model: &ManifoldModel, r: f64) -> Result<f64> {
    mean_curvature_with_floor(model, r, ORIGIN_FLOOR)
}

pub fn mean_curvature_with_floor(model: &ManifoldModel, r: f64, floor: f64) -> Result<f64> {
    if !(r >= floor) {
        return Err(Error::SingularOrigin { r, floor });
    }
    let k = f64::from(model.dimension - 1);
    match &model.warp {
        Warp::Euclidean => Ok(k / r),
        Warp::Hyperbolic { curvature } => {
            let s = curvature.sqrt();
            Ok(k * s / (s * r).tanh())
        }
        Warp::Tabulated(table) => Ok(k * table.derivative(r)? / table.eval(r)?),
    }
}

//! Euler–Maruyama simulation of one-dimensional radial equations
//! `dx = θ(x)dt + σ(x)dw` and of `n`-dimensional diffusions with radial
//! coefficient, with per-path seeds derived from a master seed.

pub(crate) mod euler;
mod nd;
mod seed;

use std::fmt;
use std::sync::Arc;

pub use euler::{ensemble, euler_path, fold_path_range, fold_paths, grid_len, EnsembleSpec, Path, PathEnsemble};
pub use nd::{euclidean_diffusion_nd, NdPath, NdSpec};
pub use seed::{derive_seed, NoiseStream};

use crate::error::{Error, Result};
use crate::profiles::{drift_l_rho_with_floor, mean_curvature_with_floor, rho_tilde_inverse, ManifoldModel, RadialCoefficient, ORIGIN_FLOOR};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial drift `θ(r)`.
///
/// The stored function is evaluated without checks in the stepping loop;
/// [`Drift::try_eval`] adds the floor and finiteness checks.
#[derive(Clone)]
pub struct Drift {
    f: DriftFn,
    label: String,
    floor: f64,
}

// Common drifts are matched inline; anything else goes through a closure.
#[derive(Clone)]
enum DriftFn {
    Constant(f64),
    Inverse(f64),
    Power { theta: f64, alpha: f64 },
    /// `k·s·coth(s r)`, NaN below `floor`.
    Coth { k: f64, s: f64, floor: f64 },
    /// `k·s·(1 + 1/(s r))`.
    CothBound { k: f64, s: f64 },
    Custom(ScalarFn),
}

impl Drift {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(label, DriftFn::Custom(Arc::new(f)))
    }

    fn from_fn(label: impl Into<String>, f: DriftFn) -> Self {
        Self { f, label: label.into(), floor: 0.0 }
    }

    pub fn constant(v: f64) -> Self {
        Self::from_fn(format!("constant({v})"), DriftFn::Constant(v))
    }

    /// `θ(r) = c/r`.
    pub fn bessel(c: f64) -> Self {
        Self::from_fn(format!("bessel({c})"), DriftFn::Inverse(c)).with_floor(ORIGIN_FLOOR)
    }

    /// `θ(r) = θ₀ r^α`.
    pub fn power(theta: f64, alpha: f64) -> Self {
        let d = Self::from_fn(format!("power({theta},{alpha})"), DriftFn::Power { theta, alpha });
        if alpha < 0.0 {
            d.with_floor(ORIGIN_FLOOR)
        } else {
            d
        }
    }

    /// Radius below which the drift is singular.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self.f {
            DriftFn::Constant(v) => v,
            DriftFn::Inverse(c) => c / r,
            DriftFn::Power { theta, alpha } => theta * r.powf(alpha),
            DriftFn::Coth { k, s, floor } => {
                if r >= floor {
                    k * s * coth(s * r)
                } else {
                    f64::NAN
                }
            }
            DriftFn::CothBound { k, s } => k * s * (1.0 + 1.0 / (s * r)),
            DriftFn::Custom(ref f) => f(r),
        }
    }

    pub fn try_eval(&self, r: f64) -> Result<f64> {
        if r < self.floor {
            return Err(Error::SingularOrigin { r, floor: self.floor });
        }
        let v = self.eval(r);
        if !v.is_finite() {
            return Err(Error::DomainError { what: format!("drift {}", self.label), t: r });
        }
        Ok(v)
    }
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Drift({})", self.label)
    }
}

/// Where a radial drift comes from.
#[derive(Debug, Clone)]
pub enum DriftSource {
    /// Mean curvature `m(r)` of a model manifold.
    Manifold(ManifoldModel),
    /// `Lρ₀` expressed in the intrinsic radius `ρ`, i.e. evaluated at `ρ̃⁻¹(ρ)`.
    Coefficient { coeff: RadialCoefficient, n: u32 },
    /// `(n−1)√K(1 + 1/(√K r))`, which dominates `(n−1)√K coth(√K r)`.
    HyperbolicBound { n: u32, curvature: f64 },
}

/// Builds the drift for `source`. Evaluations that would fail (below the
/// floor, or outside the range of `ρ̃`) yield NaN, which the simulator turns
/// into [`Error::NonFiniteState`].
pub fn radial_drift(source: &DriftSource) -> Result<Drift> {
    radial_drift_with_floor(source, ORIGIN_FLOOR)
}

pub fn radial_drift_with_floor(source: &DriftSource, floor: f64) -> Result<Drift> {
    if !(floor > 0.0) {
        return Err(Error::invalid("drift floor must be positive"));
    }
    Ok(match source {
        DriftSource::Manifold(model) => {
            let m = model.clone();
            let label = match m.warp() {
                crate::profiles::Warp::Euclidean => format!("euclidean(n={})", m.dimension()),
                crate::profiles::Warp::Hyperbolic { curvature } => {
                    format!("hyperbolic(n={},K={curvature})", m.dimension())
                }
                crate::profiles::Warp::Tabulated(_) => format!("tabulated_warp(n={})", m.dimension()),
            };
            let k = f64::from(m.dimension() - 1);
            match *m.warp() {
                crate::profiles::Warp::Euclidean => {
                    Drift::new(label, move |r| if r >= floor { k / r } else { f64::NAN })
                }
                crate::profiles::Warp::Hyperbolic { curvature } => {
                    Drift::from_fn(label, DriftFn::Coth { k, s: curvature.sqrt(), floor })
                }
                crate::profiles::Warp::Tabulated(_) => {
                    Drift::new(label, move |r| mean_curvature_with_floor(&m, r, floor).unwrap_or(f64::NAN))
                }
            }
        }
        DriftSource::Coefficient { coeff, n } => {
            let c = coeff.clone();
            let n = *n;
            Drift::new(format!("coefficient({coeff},n={n})"), move |rho| {
                rho_tilde_inverse(&c, rho)
                    .and_then(|r| drift_l_rho_with_floor(&c, n, r, floor))
                    .unwrap_or(f64::NAN)
            })
        }
        DriftSource::HyperbolicBound { n, curvature } => {
            if *n < 2 || !(*curvature > 0.0) {
                return Err(Error::invalid("hyperbolic bound needs n >= 2 and K > 0"));
            }
            let k = f64::from(n - 1);
            Drift::from_fn(format!("hyperbolic_bound(n={n},K={curvature})"), DriftFn::CothBound { k, s: curvature.sqrt() })
        }
    }
    .with_floor(floor))
}

// One exp instead of tanh; the two agree to a few ulp.
#[inline]
fn coth(y: f64) -> f64 {
    if y < 0.5 {
        1.0 / y.tanh()
    } else {
        let e = (-2.0 * y).exp();
        (1.0 + e) / (1.0 - e)
    }
}

#[derive(Clone)]
pub enum Diffusion {
    Constant(f64),
    Variable(ScalarFn),
}

impl fmt::Debug for Diffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(s) => write!(f, "Constant({s})"),
            Self::Variable(_) => f.write_str("Variable"),
        }
    }
}

/// `dx = θ(x)dt + σ(x)dw` on `[floor, ∞)` with reflection at the floor.
#[derive(Debug, Clone)]
pub struct Sde1D {
    drift: Drift,
    diffusion: Diffusion,
    floor: f64,
    lipschitz: Option<f64>,
}

impl Sde1D {
    /// Drift `θ`, diffusion `√2`, floor `10⁻⁶`.
    pub fn new(drift: Drift) -> Self {
        Self {
            drift,
            diffusion: Diffusion::Constant(std::f64::consts::SQRT_2),
            floor: ORIGIN_FLOOR,
            lipschitz: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || sigma.is_infinite() {
            return Err(Error::invalid(format!("diffusion must be finite and non-negative, got {sigma}")));
        }
        self.diffusion = Diffusion::Constant(sigma);
        Ok(self)
    }

    pub fn with_diffusion<F>(mut self, sigma: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.diffusion = Diffusion::Variable(Arc::new(sigma));
        self
    }

    /// Reflection level. `-∞` turns reflection off, for processes on the
    /// whole line.
    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        if floor.is_nan() || floor == f64::INFINITY {
            return Err(Error::invalid(format!("floor must be below +inf, got {floor}")));
        }
        self.floor = floor;
        Ok(self)
    }

    /// Caller's promise that `θ` is `L`-Lipschitz on `[floor, ∞)`.
    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn diffusion(&self) -> &Diffusion {
        &self.diffusion
    }

    pub fn constant_sigma(&self) -> Option<f64> {
        match self.diffusion {
            Diffusion::Constant(s) => Some(s),
            Diffusion::Variable(_) => None,
        }
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

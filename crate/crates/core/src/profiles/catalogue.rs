use std::fmt;

use super::RadialCoefficient;
use crate::error::{Error, Result};

/// Closed-form rate functions for the standard coefficient families.
///
/// `Diri*` cases come from the volume-growth integral, `Geo*` from the
/// comparison with a one-dimensional radial equation. The index follows the
/// coefficient family: 1 is `ã ≡ 1`, 2 is `(1+r)^α`, 3 is `(1+r)²log(1+r)^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogueCase {
    Diri1,
    Diri2 { alpha: f64 },
    Diri3 { beta: f64 },
    Geo1,
    Geo2 { alpha: f64 },
    Geo3 { beta: f64 },
    /// Escape rate of `dx = θ x^α dt + √2 dw`, `-1 ≤ α ≤ 1`.
    GAlpha { alpha: f64 },
    /// Linear escape on hyperbolic space of curvature `-K`.
    HyperbolicLinear { n: u32, curvature: f64, eps: f64 },
}

impl CatalogueCase {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Diri1 | Self::Geo1 => true,
            Self::Diri2 { alpha } | Self::Geo2 { alpha } => alpha < 2.0,
            Self::Diri3 { beta } | Self::Geo3 { beta } => beta <= 1.0,
            Self::GAlpha { alpha } => (-1.0..=1.0).contains(&alpha),
            Self::HyperbolicLinear { n, curvature, eps } => n >= 2 && curvature > 0.0 && eps >= 0.0,
        };
        if ok && self.params().iter().all(|(_, v)| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(format!("parameters out of range for {self}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Diri1 => "diri1",
            Self::Diri2 { .. } => "diri2",
            Self::Diri3 { .. } => "diri3",
            Self::Geo1 => "geo1",
            Self::Geo2 { .. } => "geo2",
            Self::Geo3 { .. } => "geo3",
            Self::GAlpha { .. } => "galpha",
            Self::HyperbolicLinear { .. } => "hyperbolic_linear",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Diri1 | Self::Geo1 => vec![],
            Self::Diri2 { alpha } | Self::Geo2 { alpha } | Self::GAlpha { alpha } => vec![("alpha", alpha)],
            Self::Diri3 { beta } | Self::Geo3 { beta } => vec![("beta", beta)],
            Self::HyperbolicLinear { n, curvature, eps } => {
                vec![("n", f64::from(n)), ("curvature", curvature), ("eps", eps)]
            }
        }
    }

    /// Coefficient family behind the case, if it has one.
    pub fn coefficient(&self) -> Option<RadialCoefficient> {
        match *self {
            Self::Diri1 | Self::Geo1 => Some(RadialCoefficient::Constant),
            Self::Diri2 { alpha } | Self::Geo2 { alpha } => Some(RadialCoefficient::Power { alpha }),
            Self::Diri3 { beta } | Self::Geo3 { beta } => Some(RadialCoefficient::SquaredLog { beta }),
            Self::GAlpha { .. } | Self::HyperbolicLinear { .. } => None,
        }
    }

    /// Smallest admissible `t` (exclusive).
    pub fn min_time(&self) -> f64 {
        match *self {
            Self::Diri1 | Self::Diri2 { .. } => 1.0,
            Self::Diri3 { .. } | Self::Geo3 { .. } | Self::HyperbolicLinear { .. } => 0.0,
            Self::Geo1 | Self::Geo2 { .. } => std::f64::consts::E,
            Self::GAlpha { alpha } => {
                if alpha == -1.0 {
                    std::f64::consts::E
                } else {
                    0.0
                }
            }
        }
    }

    /// All cases with representative parameters, for listing.
    pub fn standard() -> Vec<CatalogueCase> {
        vec![
            Self::Diri1,
            Self::Diri2 { alpha: 1.0 },
            Self::Diri3 { beta: 0.5 },
            Self::Diri3 { beta: 1.0 },
            Self::Geo1,
            Self::Geo2 { alpha: 1.0 },
            Self::Geo3 { beta: 0.5 },
            Self::GAlpha { alpha: -1.0 },
            Self::GAlpha { alpha: 0.5 },
            Self::GAlpha { alpha: 1.0 },
            Self::HyperbolicLinear { n: 2, curvature: 1.0, eps: 0.1 },
        ]
    }
}

impl fmt::Display for CatalogueCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        let p = self.params();
        if !p.is_empty() {
            let body: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", body.join(","))?;
        }
        Ok(())
    }
}

// ψ and ψ̃ for the third family.
fn squared_log_rates(beta: f64, t: f64) -> (f64, f64) {
    if beta == 1.0 {
        (t.exp(), t.exp().exp())
    } else {
        let psi = t.powf(1.0 + beta / (2.0 - 2.0 * beta));
        (psi, t.powf(1.0 / (1.0 - beta)).exp())
    }
}

/// Closed-form `(ψ(t), ψ̃(t))`; `ψ̃` is `None` for cases without a Euclidean form.
pub fn closed_form_rate(case: &CatalogueCase, t: f64) -> Result<(f64, Option<f64>)> {
    case.validate()?;
    if !(t > case.min_time()) || t.is_infinite() {
        return Err(Error::DomainError {
            what: format!("{case} needs t > {}", case.min_time()),
            t,
        });
    }
    let tlog = t * t.ln();
    let tloglog = t * t.ln().ln();
    Ok(match *case {
        CatalogueCase::Diri1 => (tlog.sqrt(), Some(tlog.sqrt())),
        CatalogueCase::Diri2 { alpha } => (tlog.sqrt(), Some(tlog.powf(1.0 / (2.0 - alpha)))),
        CatalogueCase::Geo1 => (tloglog.sqrt(), Some(tloglog.sqrt())),
        CatalogueCase::Geo2 { alpha } => (tloglog.sqrt(), Some(tloglog.powf(1.0 / (2.0 - alpha)))),
        CatalogueCase::Diri3 { beta } | CatalogueCase::Geo3 { beta } => {
            let (p, pt) = squared_log_rates(beta, t);
            (p, Some(pt))
        }
        CatalogueCase::GAlpha { alpha } => {
            let g = if alpha == -1.0 {
                tloglog.sqrt()
            } else if alpha == 1.0 {
                t.exp()
            } else {
                t.powf(1.0 / (1.0 - alpha))
            };
            (g, None)
        }
        CatalogueCase::HyperbolicLinear { n, curvature, eps } => {
            ((1.0 + eps) * f64::from(n - 1) * curvature.sqrt() * t, None)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn diri1_at_e_squared() {
        let (p, pt) = closed_form_rate(&CatalogueCase::Diri1, E * E).unwrap();
        assert!((p - E * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(pt, Some(p));
    }

    #[test]
    fn galpha_zero_is_identity() {
        let (g, none) = closed_form_rate(&CatalogueCase::GAlpha { alpha: 0.0 }, 7.0).unwrap();
        assert_eq!(g, 7.0);
        assert!(none.is_none());
    }

    #[test]
    fn geo2_flat_at_e_to_e() {
        let t = E.exp();
        let (p, pt) = closed_form_rate(&CatalogueCase::Geo2 { alpha: 0.0 }, t).unwrap();
        assert!((p - t.sqrt()).abs() < 1e-12);
        assert!((pt.unwrap() - t.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn log_log_cases_reject_small_t() {
        assert!(matches!(
            closed_form_rate(&CatalogueCase::Geo1, 2.0),
            Err(Error::DomainError { .. })
        ));
        assert!(closed_form_rate(&CatalogueCase::Diri1, 2.0).is_ok());
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(closed_form_rate(&CatalogueCase::Diri2 { alpha: 2.0 }, 10.0).is_err());
        assert!(closed_form_rate(&CatalogueCase::Diri3 { beta: 1.5 }, 10.0).is_err());
        assert!(closed_form_rate(&CatalogueCase::GAlpha { alpha: 1.5 }, 10.0).is_err());
    }

    #[test]
    fn third_family_exponent() {
        // β = 1/2: ψ = t^{3/2}, ψ̃ = exp(t²)
        let (p, pt) = closed_form_rate(&CatalogueCase::Diri3 { beta: 0.5 }, 2.0).unwrap();
        assert!((p - 2f64.powf(1.5)).abs() < 1e-12);
        assert!((pt.unwrap() - 4f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_linear_speed() {
        let c = CatalogueCase::HyperbolicLinear { n: 3, curvature: 4.0, eps: 0.5 };
        assert_eq!(closed_form_rate(&c, 2.0).unwrap().0, 12.0);
    }
}

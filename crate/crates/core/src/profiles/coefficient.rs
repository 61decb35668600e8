use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{bisect_increasing, integrate, MonotoneCubic, QuadOptions};

/// Radial diffusion coefficient `ã(r)` of a form `a(x) = ã(|x|)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialCoefficient {
    /// `ã ≡ 1`.
    Constant,
    /// `ã(r) = (1 + r)^alpha`.
    Power { alpha: f64 },
    /// `ã(r) = (1 + r)^2 [log(1 + r)]^beta`. Singular at the origin unless `beta == 0`.
    SquaredLog { beta: f64 },
    /// Sampled `ã` with a flat tail past the last node.
    Tabulated(Arc<TabulatedCoefficient>),
}

impl RadialCoefficient {
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("power exponent must be finite"));
        }
        Ok(Self::Power { alpha })
    }

    pub fn squared_log(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::invalid("log exponent must be finite"));
        }
        Ok(Self::SquaredLog { beta })
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(Arc::new(TabulatedCoefficient::new(radii, values)?)))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Power { .. } => "power",
            Self::SquaredLog { .. } => "squared_log",
            Self::Tabulated(_) => "tabulated",
        }
    }

    pub fn params(&self) -> String {
        match self {
            Self::Constant => String::new(),
            Self::Power { alpha } => format!("alpha={alpha}"),
            Self::SquaredLog { beta } => format!("beta={beta}"),
            Self::Tabulated(t) => format!("nodes={}", t.nodes.xs().len()),
        }
    }

    /// `ã(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::Power { alpha } => (1.0 + r).powf(*alpha),
            Self::SquaredLog { beta } => {
                let l = r.ln_1p();
                (1.0 + r).powi(2) * l.powf(*beta)
            }
            Self::Tabulated(t) => t.value(r),
        }
    }

    /// `ã′(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::Power { alpha } => alpha * (1.0 + r).powf(alpha - 1.0),
            Self::SquaredLog { beta } => {
                let l = r.ln_1p();
                (1.0 + r) * l.powf(beta - 1.0) * (2.0 * l + beta)
            }
            Self::Tabulated(t) => t.derivative(r),
        }
    }

    /// Limit of `ρ̃(s)` as `s → ∞` when it is finite.
    pub fn rho_tilde_supremum(&self) -> Option<f64> {
        match self {
            Self::Power { alpha } if *alpha > 2.0 => Some(1.0 / (alpha / 2.0 - 1.0)),
            _ => None,
        }
    }
}

impl fmt::Display for RadialCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.params();
        if p.is_empty() {
            write!(f, "{}", self.family_name())
        } else {
            write!(f, "{}({p})", self.family_name())
        }
    }
}

/// Sampled coefficient, interpolated monotonically between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCoefficient {
    nodes: MonotoneCubic,
    // ρ̃ at each node
    cumulative: Vec<f64>,
}

impl TabulatedCoefficient {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::invalid("tabulated coefficient needs at least two nodes"));
        }
        if radii[0] != 0.0 {
            return Err(Error::invalid("tabulated coefficient must start at r = 0"));
        }
        if let Some((r, _)) = radii.iter().zip(&values).find(|(_, a)| !(**a > 0.0)) {
            return Err(Error::NonPositiveCoefficient { r: *r });
        }
        let nodes = MonotoneCubic::new(radii, values)?;
        let mut cumulative = vec![0.0];
        let xs = nodes.xs().to_vec();
        for w in xs.windows(2) {
            let piece = integrate(
                |u| Ok(1.0 / nodes.eval(u)?.sqrt()),
                w[0],
                w[1],
                QuadOptions::with_rel_tol(1e-13),
            )?;
            cumulative.push(cumulative.last().unwrap() + piece);
        }
        Ok(Self { nodes, cumulative })
    }

    fn last_node(&self) -> f64 {
        self.nodes.domain().1
    }

    fn value(&self, r: f64) -> f64 {
        if r >= self.last_node() {
            *self.nodes.ys().last().unwrap()
        } else {
            self.nodes.eval(r.max(0.0)).unwrap_or(f64::NAN)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        if r >= self.last_node() {
            0.0
        } else {
            self.nodes.derivative(r.max(0.0)).unwrap_or(f64::NAN)
        }
    }

    fn rho_tilde(&self, s: f64) -> Result<f64> {
        let xs = self.nodes.xs();
        let last = self.last_node();
        if s >= last {
            let tail = *self.nodes.ys().last().unwrap();
            return Ok(self.cumulative.last().unwrap() + (s - last) / tail.sqrt());
        }
        let i = xs.partition_point(|&v| v <= s).saturating_sub(1);
        let piece = integrate(
            |u| Ok(1.0 / self.nodes.eval(u)?.sqrt()),
            xs[i],
            s,
            QuadOptions::with_rel_tol(1e-13),
        )?;
        Ok(self.cumulative[i] + piece)
    }

    fn rho_tilde_inverse(&self, r: f64) -> Result<f64> {
        let total = *self.cumulative.last().unwrap();
        if r >= total {
            let tail = *self.nodes.ys().last().unwrap();
            return Ok(self.last_node() + (r - total) * tail.sqrt());
        }
        let i = self.cumulative.partition_point(|&v| v <= r).saturating_sub(1);
        let xs = self.nodes.xs();
        bisect_increasing(|s| self.rho_tilde(s), r, xs[i], xs[i + 1], 1e-14)
    }
}

/// `ln(e^y - 1)` without overflow for large `y`.
pub(crate) fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

fn check_radius(s: f64) -> Result<()> {
    if !(s >= 0.0) || s.is_infinite() {
        return Err(Error::invalid(format!("radius must be finite and non-negative, got {s}")));
    }
    Ok(())
}

/// Intrinsic radius `ρ̃(s) = ∫₀ˢ ã(u)^{-1/2} du`.
///
/// Closed-form antiderivatives are used for the analytic families; tabulated
/// coefficients are integrated panel by panel.
pub fn rho_tilde(coeff: &RadialCoefficient, s: f64) -> Result<f64> {
    check_radius(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    match coeff {
        RadialCoefficient::Constant => Ok(s),
        RadialCoefficient::Power { alpha } => {
            let p = 1.0 - alpha / 2.0;
            if p == 0.0 {
                Ok(s.ln_1p())
            } else {
                Ok(((p * s.ln_1p()).exp_m1()) / p)
            }
        }
        RadialCoefficient::SquaredLog { beta } => {
            let q = 1.0 - beta / 2.0;
            if q <= 0.0 {
                // ã^{-1/2} ~ 1/(u log(u)^{β/2}) is not integrable at the origin.
                return Err(Error::NonPositiveCoefficient { r: 0.0 });
            }
            Ok(s.ln_1p().powf(q) / q)
        }
        RadialCoefficient::Tabulated(t) => t.rho_tilde(s),
    }
}

/// Inverse of [`rho_tilde`].
pub fn rho_tilde_inverse(coeff: &RadialCoefficient, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    if let Some(sup) = coeff.rho_tilde_supremum() {
        if r >= sup {
            return Err(Error::OutOfRange { value: r, supremum: sup });
        }
    }
    match coeff {
        RadialCoefficient::Constant => Ok(r),
        RadialCoefficient::Power { alpha } => {
            let p = 1.0 - alpha / 2.0;
            if p == 0.0 {
                Ok(r.exp_m1())
            } else {
                Ok(((p * r).ln_1p() / p).exp_m1())
            }
        }
        RadialCoefficient::SquaredLog { beta } => {
            let q = 1.0 - beta / 2.0;
            if q <= 0.0 {
                return Err(Error::NonPositiveCoefficient { r: 0.0 });
            }
            Ok(((q * r).powf(1.0 / q)).exp_m1())
        }
        RadialCoefficient::Tabulated(t) => t.rho_tilde_inverse(r),
    }
}

/// `ln ρ̃⁻¹(r)`, computed without forming `ρ̃⁻¹(r)` when that would overflow.
pub fn log_rho_tilde_inverse(coeff: &RadialCoefficient, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if let Some(sup) = coeff.rho_tilde_supremum() {
        if r >= sup {
            return Err(Error::OutOfRange { value: r, supremum: sup });
        }
    }
    match coeff {
        RadialCoefficient::Constant => Ok(r.ln()),
        RadialCoefficient::Power { alpha } => {
            let p = 1.0 - alpha / 2.0;
            let y = if p == 0.0 { r } else { (p * r).ln_1p() / p };
            Ok(ln_expm1(y))
        }
        RadialCoefficient::SquaredLog { beta } => {
            let q = 1.0 - beta / 2.0;
            if q <= 0.0 {
                return Err(Error::NonPositiveCoefficient { r: 0.0 });
            }
            Ok(ln_expm1((q * r).powf(1.0 / q)))
        }
        RadialCoefficient::Tabulated(t) => Ok(t.rho_tilde_inverse(r)?.ln()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_identity() {
        assert_eq!(rho_tilde(&RadialCoefficient::Constant, 5.0).unwrap(), 5.0);
        assert_eq!(rho_tilde_inverse(&RadialCoefficient::Constant, 7.0).unwrap(), 7.0);
    }

    #[test]
    fn origin_maps_to_origin() {
        for c in [
            RadialCoefficient::Constant,
            RadialCoefficient::Power { alpha: 1.3 },
            RadialCoefficient::SquaredLog { beta: 0.5 },
            RadialCoefficient::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0]).unwrap(),
        ] {
            assert_eq!(rho_tilde(&c, 0.0).unwrap(), 0.0);
            assert_eq!(rho_tilde_inverse(&c, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn power_one_matches_antiderivative() {
        let c = RadialCoefficient::Power { alpha: 1.0 };
        assert!((rho_tilde(&c, 3.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((rho_tilde_inverse(&c, 2.0).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn bounded_intrinsic_radius_is_out_of_range() {
        let c = RadialCoefficient::Power { alpha: 3.0 };
        assert_eq!(c.rho_tilde_supremum(), Some(2.0));
        assert!(matches!(rho_tilde_inverse(&c, 2.5), Err(Error::OutOfRange { .. })));
        assert!(rho_tilde_inverse(&c, 1.9).is_ok());
    }

    #[test]
    fn divergent_log_family_is_rejected() {
        let c = RadialCoefficient::SquaredLog { beta: 2.0 };
        assert!(matches!(rho_tilde(&c, 1.0), Err(Error::NonPositiveCoefficient { .. })));
    }

    #[test]
    fn tabulated_rejects_non_positive_samples() {
        let r = RadialCoefficient::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0]);
        assert!(matches!(r, Err(Error::NonPositiveCoefficient { r }) if r == 1.0));
    }

    #[test]
    fn tabulated_constant_matches_constant_family() {
        let t = RadialCoefficient::tabulated(vec![0.0, 1.0, 5.0], vec![4.0, 4.0, 4.0]).unwrap();
        // ρ̃(s) = s / 2, including the flat tail
        for s in [0.3, 2.0, 5.0, 11.0] {
            assert!((rho_tilde(&t, s).unwrap() - s / 2.0).abs() < 1e-12);
            assert!((rho_tilde_inverse(&t, s / 2.0).unwrap() - s).abs() < 1e-11);
        }
    }

    #[test]
    fn log_inverse_survives_overflow() {
        let c = RadialCoefficient::SquaredLog { beta: 1.0 };
        // ρ̃⁻¹(100) = e^{2500} - 1 overflows; its log does not.
        let l = log_rho_tilde_inverse(&c, 100.0).unwrap();
        assert!((l - 2500.0).abs() < 1e-9);
        let direct = rho_tilde_inverse(&c, 3.0).unwrap().ln();
        assert!((log_rho_tilde_inverse(&c, 3.0).unwrap() - direct).abs() < 1e-12);
    }
}

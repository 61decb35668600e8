//! The rate integral `φ(R) = ∫ r / (λ(r)(V(r) + log log r)) dr`, its inverse
//! `ψ`, and what is built from them.

mod conserve;
mod dyadic;
mod table;

pub use conserve::{conservativeness, HeuristicReport, Leaning, Subject, Verdict};
pub use dyadic::{dyadic_scheme, DyadicLevel, DyadicScheme};
pub use table::{euclidean_rate, rate_table, rate_table_from, RateFunction};

use crate::error::{Error, Result};
use crate::numeric::{bisect_increasing, integrate, QuadOptions};
use crate::profiles::GrowthProfile;

/// Time constant from the dyadic covering argument.
pub const PROOF_SCALE: f64 = 512.0;

/// Denominators at or below this are treated as non-positive when choosing `r★`.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

/// Spacing of the search grid for `r★`.
pub const LOWER_LIMIT_STEP: f64 = 1e-3;

/// Largest radius `ψ` will search before giving up.
pub const MAX_RADIUS: f64 = 1e300;

const QUAD_REL_TOL: f64 = 1e-11;
const INVERSE_REL_TOL: f64 = 1e-13;

/// `λ(r)(V(r) + log log r)`.
pub fn denominator(profile: &GrowthProfile, r: f64) -> f64 {
    profile.energy_bound(r) * (profile.log_volume(r) + r.ln().ln())
}

fn integrand(profile: &GrowthProfile, r: f64) -> Result<f64> {
    if r >= profile.domain().1 {
        // The ball already has infinite volume.
        return Ok(0.0);
    }
    let d = denominator(profile, r);
    if !(d > 0.0) {
        return Err(Error::NonPositiveDenominator { r });
    }
    Ok(r / d)
}

/// Smallest point of the grid `2 + k·10⁻³` where the denominator exceeds
/// [`DENOMINATOR_FLOOR`].
pub fn effective_lower_limit(profile: &GrowthProfile) -> Result<f64> {
    const MAX_STEPS: u32 = 10_000_000;
    for k in 0..MAX_STEPS {
        let r = 2.0 + f64::from(k) * LOWER_LIMIT_STEP;
        if r >= profile.domain().1 || denominator(profile, r) > DENOMINATOR_FLOOR {
            return Ok(r);
        }
    }
    Err(Error::NonPositiveDenominator { r: 2.0 + f64::from(MAX_STEPS) * LOWER_LIMIT_STEP })
}

// On failure, pin down the first failing radius on a fine scan of [a, b].
fn first_bad_radius(profile: &GrowthProfile, a: f64, b: f64) -> f64 {
    const SCAN: u32 = 10_000;
    for i in 0..=SCAN {
        let r = a + (b - a) * f64::from(i) / f64::from(SCAN);
        if integrand(profile, r).is_err() {
            return r;
        }
    }
    b
}

fn integrate_piece(profile: &GrowthProfile, a: f64, b: f64) -> Result<f64> {
    let hi = b.min(profile.domain().1);
    if hi <= a {
        return Ok(0.0);
    }
    match integrate(|r| integrand(profile, r), a, hi, QuadOptions::with_rel_tol(QUAD_REL_TOL)) {
        Err(Error::NonPositiveDenominator { r }) => Err(Error::NonPositiveDenominator {
            r: first_bad_radius(profile, a, r),
        }),
        other => other,
    }
}

/// `φ(R) = ∫_{r_lo}^{R} r / (λ(r)(V(r) + log log r)) dr`.
pub fn phi(profile: &GrowthProfile, big_r: f64, r_lo: f64) -> Result<f64> {
    if !(r_lo > 1.0) || !r_lo.is_finite() {
        return Err(Error::invalid(format!("lower limit must exceed 1, got {r_lo}")));
    }
    if !(big_r >= r_lo) || !big_r.is_finite() {
        return Err(Error::invalid(format!("upper limit {big_r} below lower limit {r_lo}")));
    }
    // Split geometrically so each panel sees a well-scaled integrand.
    let mut total = 0.0;
    let mut a = r_lo;
    while a < big_r {
        let b = (2.0 * a).min(big_r);
        total += integrate_piece(profile, a, b)?;
        a = b;
    }
    Ok(total)
}

/// `ψ(t)`, the radius where `φ` reaches `t`.
pub fn psi(profile: &GrowthProfile, t: f64, r_lo: f64) -> Result<f64> {
    let mut solver = PsiSolver::new(profile, r_lo)?;
    solver.solve(t)
}

/// Inverts `φ` for an increasing sequence of times, reusing the partial
/// integrals between calls.
pub(crate) struct PsiSolver<'a> {
    profile: &'a GrowthProfile,
    r_lo: f64,
    // φ at the knots r_lo·2^k
    knots: Vec<(f64, f64)>,
}

impl<'a> PsiSolver<'a> {
    pub(crate) fn new(profile: &'a GrowthProfile, r_lo: f64) -> Result<Self> {
        phi(profile, r_lo, r_lo)?;
        Ok(Self { profile, r_lo, knots: vec![(r_lo, 0.0)] })
    }

    fn extend(&mut self) -> Result<bool> {
        let &(r, v) = self.knots.last().unwrap();
        if r >= MAX_RADIUS || r >= self.profile.domain().1 {
            return Ok(false);
        }
        let next = (2.0 * r).min(MAX_RADIUS);
        let piece = integrate_piece(self.profile, r, next)?;
        self.knots.push((next, v + piece));
        Ok(true)
    }

    pub(crate) fn solve(&mut self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::invalid(format!("time must be finite and non-negative, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.r_lo);
        }
        while self.knots.last().unwrap().1 < t {
            if !self.extend()? {
                return Err(Error::FiniteTotalIntegral {
                    limit: self.knots.last().unwrap().1,
                    requested: t,
                });
            }
        }
        let i = self.knots.partition_point(|k| k.1 < t);
        let (lo, base) = self.knots[i - 1];
        let hi = self.knots[i].0;
        let profile = self.profile;
        bisect_increasing(|r| Ok(base + integrate_piece(profile, lo, r)?), t, lo, hi, INVERSE_REL_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{profile_from_radial, EnergyMode, RadialCoefficient};

    fn cubic() -> GrowthProfile {
        GrowthProfile::euclidean(3)
    }

    // Composite trapezoid with 10⁶ panels, independent of the adaptive rule.
    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let n = 1_000_000;
        let h = (b - a) / n as f64;
        let mut s = 0.5 * (f(a) + f(b));
        for i in 1..n {
            s += f(a + i as f64 * h);
        }
        s * h
    }

    #[test]
    fn empty_integral() {
        assert_eq!(phi(&cubic(), 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(psi(&cubic(), 0.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn phi_matches_trapezoid_oracle() {
        let oracle = trapezoid(|r| r / (3.0 * r.ln() + r.ln().ln()), 2.0, 10.0);
        let v = phi(&cubic(), 10.0, 2.0).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-9, "{v} vs {oracle}");
        // 30-digit reference quadrature: 8.32968593261403843
        assert!((v - 8.329_685_932_614_038).abs() < 1e-9, "{v}");
        assert!(phi(&cubic(), 20.0, 2.0).unwrap() > v);
    }

    #[test]
    fn psi_inverts_phi() {
        for r in [5.0, 50.0, 500.0] {
            let t = phi(&cubic(), r, 2.0).unwrap();
            let back = psi(&cubic(), t, 2.0).unwrap();
            assert!(((back - r) / r).abs() < 1e-9);
        }
    }

    #[test]
    fn lower_limit_skips_non_positive_denominator() {
        // V ≡ 0: the denominator log log r is negative below e.
        let flat = GrowthProfile::new("flat", |_| 0.0, |_| 1.0);
        let r = effective_lower_limit(&flat).unwrap();
        assert!(r > std::f64::consts::E && r < std::f64::consts::E + 2e-3);
        assert!(denominator(&flat, r) > DENOMINATOR_FLOOR);
        assert!(denominator(&flat, r - LOWER_LIMIT_STEP) <= DENOMINATOR_FLOOR);
        assert_eq!(effective_lower_limit(&cubic()).unwrap(), 2.0);
    }

    #[test]
    fn reports_first_bad_radius() {
        let flat = GrowthProfile::new("flat", |_| 0.0, |_| 1.0);
        match phi(&flat, 10.0, 2.0) {
            Err(Error::NonPositiveDenominator { r }) => assert!((2.0..2.01).contains(&r), "{r}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bounded_intrinsic_radius_has_finite_integral() {
        let p = profile_from_radial(&RadialCoefficient::Power { alpha: 3.0 }, 2, EnergyMode::UnitEnergy).unwrap();
        assert!(matches!(psi(&p, 1.0, 2.0), Err(Error::FiniteTotalIntegral { .. })));
    }
}

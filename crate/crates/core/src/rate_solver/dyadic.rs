use std::f64::consts::PI;

use super::phi;
use crate::error::{Error, Result};
use crate::profiles::GrowthProfile;

/// One level of the dyadic covering `R_n = 2ⁿc`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicLevel {
    pub n: u32,
    pub big_r: f64,
    /// `R_n − R_{n−1}`.
    pub r: f64,
    pub t: f64,
    /// `T_n = Σ_{k≤n} t_k`.
    pub cumulative_t: f64,
    /// Crossing-probability bound
    /// `(16/√(2π)) (μ(B_n)/μ(B₁)) T_n √λ(R_n) / (√t_n r_n) · exp(−r_n²/(8λ(R_n)t_n))`.
    pub bound: f64,
    pub partial_sum: f64,
    /// `T_n − φ(2^{n+1}c)/256` with `φ` integrated from `2c`.
    pub check: f64,
    /// `(R_n/r_n) exp(−2 log log R_n)`, the series whose convergence the
    /// choice `h = log log` is made for.
    pub summand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicScheme {
    pub c: f64,
    pub mu_b1: f64,
    pub levels: Vec<DyadicLevel>,
}

impl DyadicScheme {
    pub fn total_bound(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.partial_sum)
    }

    /// Every level satisfies `T_n ≥ φ(2^{n+1}c)/256` up to `rel_tol·T_n`.
    pub fn time_checks_hold(&self, rel_tol: f64) -> bool {
        self.levels.iter().all(|l| l.check >= -rel_tol * l.cumulative_t)
    }
}

/// Builds levels `1..=levels` of the dyadic scheme with base radius `c`.
///
/// `mu_b1` defaults to `exp(V(2c))`. Bounds are assembled in log space so
/// that tiny values underflow to 0 rather than producing `0·∞`.
pub fn dyadic_scheme(profile: &GrowthProfile, c: f64, levels: u32, mu_b1: Option<f64>) -> Result<DyadicScheme> {
    if !(c > 0.0) || c.is_infinite() {
        return Err(Error::invalid(format!("base radius must be positive, got {c}")));
    }
    if levels == 0 {
        return Err(Error::invalid("dyadic scheme needs at least one level"));
    }
    let log_mu1 = match mu_b1 {
        Some(m) if m > 0.0 && m.is_finite() => m.ln(),
        Some(m) => return Err(Error::invalid(format!("base measure must be positive, got {m}"))),
        None => profile.log_volume(2.0 * c),
    };
    let log_prefactor = (16.0 / (2.0 * PI).sqrt()).ln();

    let mut out = Vec::with_capacity(levels as usize);
    let mut cumulative_t = 0.0;
    let mut partial_sum = 0.0;
    let mut prev_r = 0.0;
    let mut phi_acc = 0.0;
    let mut phi_upto = 2.0 * c;
    for n in 1..=levels {
        let big_r = 2f64.powi(n as i32) * c;
        let r = big_r - prev_r;
        prev_r = big_r;
        let v = profile.log_volume(big_r);
        let d = v + big_r.ln().ln();
        let lambda = profile.energy_bound(big_r);
        if !(d > 0.0) || !(lambda > 0.0) {
            return Err(Error::NonPositiveDenominator { r: big_r });
        }
        let t = r * r / (32.0 * lambda * d);
        cumulative_t += t;
        let log_bound = log_prefactor + (v - log_mu1) + cumulative_t.ln() + 0.5 * lambda.ln()
            - 0.5 * t.ln()
            - r.ln()
            - r * r / (8.0 * lambda * t);
        let bound = log_bound.exp();
        partial_sum += bound;

        let next = 2.0 * big_r;
        phi_acc += phi(profile, next, phi_upto)?;
        phi_upto = next;
        let summand = big_r / r * (-2.0 * big_r.ln().ln()).exp();
        out.push(DyadicLevel {
            n,
            big_r,
            r,
            t,
            cumulative_t,
            bound,
            partial_sum,
            check: cumulative_t - phi_acc / 256.0,
            summand,
        });
    }
    Ok(DyadicScheme { c, mu_b1: log_mu1.exp(), levels: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_of_levels() {
        let s = dyadic_scheme(&GrowthProfile::euclidean(3), 4.0, 10, None).unwrap();
        assert_eq!(s.levels[0].big_r, 8.0);
        assert_eq!(s.levels[0].r, 8.0);
        for w in s.levels.windows(2) {
            assert_eq!(w[1].big_r, 2.0 * w[0].big_r);
            assert_eq!(w[1].r, w[1].big_r / 2.0);
            assert!(w[1].t > 0.0 && w[1].bound >= 0.0);
        }
    }

    #[test]
    fn first_level_by_hand() {
        // V = 3 log r, λ = 1, c = 4: R₁ = r₁ = 8, μ(B₁) = 8³.
        let s = dyadic_scheme(&GrowthProfile::euclidean(3), 4.0, 1, None).unwrap();
        let l = &s.levels[0];
        let d = 3.0 * 8f64.ln() + 8f64.ln().ln();
        let t = 64.0 / (32.0 * d);
        assert!((l.t - t).abs() < 1e-15);
        // μ ratio 1, T₁ = t₁, exponent r²/(8t) = 4d
        let bound = 16.0 / (2.0 * PI).sqrt() * t.sqrt() / 8.0 * (-4.0 * d).exp();
        assert!((l.bound - bound).abs() < 1e-12 * bound);
        assert!(l.summand > 0.0);
    }

    #[test]
    fn time_lower_bound_holds() {
        let s = dyadic_scheme(&GrowthProfile::euclidean(3), 4.0, 30, None).unwrap();
        assert!(s.time_checks_hold(1e-9));
        assert!(s.total_bound().is_finite());
    }

    #[test]
    fn non_positive_denominator_is_reported() {
        let p = GrowthProfile::new("flat", |_| 0.0, |_| 1.0);
        // log log 2 < 0
        assert!(matches!(
            dyadic_scheme(&p, 1.0, 3, None),
            Err(Error::NonPositiveDenominator { .. })
        ));
    }
}

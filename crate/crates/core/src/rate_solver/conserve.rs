use std::fmt;

use super::{effective_lower_limit, integrate_piece};
use crate::error::Result;
use crate::profiles::{profile_from_radial, CatalogueCase, EnergyMode, GrowthProfile, RadialCoefficient};

/// What to classify.
#[derive(Debug, Clone)]
pub enum Subject<'a> {
    /// `ℝⁿ` with the coefficient; tabulated coefficients fall back to the
    /// heuristic on the intrinsic profile.
    Coefficient { coeff: &'a RadialCoefficient, n: u32 },
    Case(&'a CatalogueCase),
    Profile(&'a GrowthProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leaning {
    Conservative,
    NonConservative,
    Undecided,
}

/// Dyadic increments `I_k = φ(2^{k+1}) − φ(2^k)` behind a heuristic verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicReport {
    pub leaning: Leaning,
    pub first_level: u32,
    pub increments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Conservative,
    NonConservative,
    Inconclusive(HeuristicReport),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Conservative => "Conservative",
            Self::NonConservative => "NonConservative",
            Self::Inconclusive(_) => "Inconclusive",
        }
    }
}

impl fmt::Display for Leaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Conservative => "Conservative",
            Self::NonConservative => "NonConservative",
            Self::Undecided => "Undecided",
        })
    }
}

/// Number of dyadic shells inspected by the heuristic.
pub const HEURISTIC_LEVELS: u32 = 200;

fn symbolic(coeff: &RadialCoefficient) -> Option<Verdict> {
    match *coeff {
        RadialCoefficient::Constant => Some(Verdict::Conservative),
        RadialCoefficient::Power { alpha } => Some(if alpha <= 2.0 {
            Verdict::Conservative
        } else {
            Verdict::NonConservative
        }),
        RadialCoefficient::SquaredLog { beta } => Some(if beta <= 1.0 {
            Verdict::Conservative
        } else {
            Verdict::NonConservative
        }),
        RadialCoefficient::Tabulated(_) => None,
    }
}

/// Classifies the subject. Known families are decided symbolically; anything
/// else goes through a numeric heuristic whose answer is always
/// [`Verdict::Inconclusive`] with a leaning.
///
/// The heuristic leans non-conservative when the volume is finite within a
/// bounded radius or the last increment is below `1e-12` of the sum, and
/// conservative when every increment in the last quarter stays above `1e-2`
/// of the largest increment in the first quarter.
pub fn conservativeness(subject: &Subject<'_>) -> Result<Verdict> {
    match subject {
        Subject::Coefficient { coeff, n } => match symbolic(coeff) {
            Some(v) => Ok(v),
            None => heuristic(&profile_from_radial(coeff, *n, EnergyMode::UnitEnergy)?),
        },
        Subject::Case(case) => {
            case.validate()?;
            Ok(case.coefficient().and_then(|c| symbolic(&c)).unwrap_or(Verdict::Conservative))
        }
        Subject::Profile(p) => heuristic(p),
    }
}

fn heuristic(profile: &GrowthProfile) -> Result<Verdict> {
    let r_lo = effective_lower_limit(profile)?;
    let first_level = r_lo.log2().ceil() as u32;
    let bounded = profile.domain().1.is_finite();
    let mut increments = Vec::new();
    for k in first_level..first_level + HEURISTIC_LEVELS {
        let a = 2f64.powi(k as i32);
        if a >= profile.domain().1 {
            break;
        }
        increments.push(integrate_piece(profile, a, 2.0 * a)?);
    }
    let total: f64 = increments.iter().sum();
    let head = &increments[..increments.len().div_ceil(4)];
    let head_max = head.iter().copied().fold(0.0, f64::max);
    let last = increments.last().copied().unwrap_or(0.0);
    let quarter = &increments[increments.len() - increments.len() / 4..];
    let tail_min = quarter.iter().copied().fold(f64::INFINITY, f64::min);

    let leaning = if bounded || last < 1e-12 * total {
        Leaning::NonConservative
    } else if tail_min >= 1e-2 * head_max {
        Leaning::Conservative
    } else {
        Leaning::Undecided
    };
    Ok(Verdict::Inconclusive(HeuristicReport { leaning, first_level, increments }))
}

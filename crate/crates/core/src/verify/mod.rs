//! Monte Carlo checks: envelope exceedance for rate functions, the
//! comparison inequality between radial processes, coupled drift ordering
//! and the law of the iterated logarithm.
//!
//! Every statistic is a fold over paths in index order, so reports are
//! bit-identical for a given seed whatever the thread count.

mod compare;

pub use compare::{comparison_mc, coupled_dominance, ComparisonReport, ComparisonSpec, Estimate};

use crate::error::{Error, Result};
use crate::rate_solver::RateFunction;
use crate::sde::{fold_paths, EnsembleSpec, PathEnsemble};

/// Share of paths crossing `ψ(C·t)` somewhere on `[t0, T]`, per `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub c_grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub fractions: Vec<f64>,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
}

impl EnvelopeReport {
    /// Largest fraction over the grid.
    pub fn worst(&self) -> f64 {
        self.fractions.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-ε share of paths with `|x_t| > (1+ε)√(2t log log t)` on `[t0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LilReport {
    pub eps_grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub fractions: Vec<f64>,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
}

impl LilReport {
    /// True when every fraction is at most the one before it.
    pub fn nonincreasing(&self) -> bool {
        self.fractions.windows(2).all(|w| w[1] <= w[0])
    }
}

// First grid index at or after t0.
fn window_start(t0: f64, dt: f64, len: usize, horizon: f64) -> Result<usize> {
    if !(t0 >= 0.0) || !(t0 < horizon) {
        return Err(Error::invalid(format!("window start {t0} must lie in [0, {horizon})")));
    }
    let k = (t0 / dt - 1e-9).ceil().max(0.0) as usize;
    Ok(k.min(len - 1))
}

fn validate_grid(name: &str, grid: &[f64], positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(format!("{name} is empty")));
    }
    for &v in grid {
        if v.is_nan() || (positive && !(v > 0.0)) || (!positive && !(v >= 0.0)) {
            return Err(Error::invalid(format!("bad {name} entry {v}")));
        }
    }
    Ok(())
}

struct Envelopes {
    start: usize,
    rows: Vec<Vec<f64>>,
}

impl Envelopes {
    fn build(rate: &RateFunction, c_grid: &[f64], t0: f64, dt: f64, len: usize, horizon: f64) -> Result<Self> {
        validate_grid("C grid", c_grid, true)?;
        let start = window_start(t0, dt, len, horizon)?;
        let rows = c_grid
            .iter()
            .map(|&c| (start..len).map(|k| rate.eval(c * k as f64 * dt)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { start, rows })
    }

    fn crossed(&self, values: &[f64]) -> Vec<bool> {
        let window = &values[self.start..];
        self.rows
            .iter()
            .map(|env| window.iter().zip(env).any(|(x, e)| x > e))
            .collect()
    }
}

fn tally(flags: &[Vec<bool>], width: usize) -> (Vec<usize>, Vec<f64>) {
    let mut counts = vec![0; width];
    for row in flags {
        for (c, &hit) in counts.iter_mut().zip(row) {
            *c += usize::from(hit);
        }
    }
    let n = flags.len() as f64;
    let fractions = counts.iter().map(|&c| c as f64 / n).collect();
    (counts, fractions)
}

/// Envelope exceedance on a stored ensemble. `rate` is `t ↦ ψ(t)`; the
/// envelope for scale `C` is `ψ(C·t)`.
pub fn exceedance(ensemble: &PathEnsemble, rate: &RateFunction, c_grid: &[f64], t0: f64) -> Result<EnvelopeReport> {
    let env = Envelopes::build(rate, c_grid, t0, ensemble.dt, ensemble.grid_len(), ensemble.horizon)?;
    let flags: Vec<Vec<bool>> = ensemble.paths().map(|p| env.crossed(p)).collect();
    let (counts, fractions) = tally(&flags, c_grid.len());
    Ok(EnvelopeReport {
        c_grid: c_grid.to_vec(),
        counts,
        fractions,
        t0,
        horizon: ensemble.horizon,
        dt: ensemble.dt,
        n_paths: ensemble.n_paths,
        master_seed: ensemble.master_seed,
    })
}

/// [`exceedance`] without storing the paths.
pub fn exceedance_streaming(spec: &EnsembleSpec, rate: &RateFunction, c_grid: &[f64], t0: f64) -> Result<EnvelopeReport> {
    let len = crate::sde::grid_len(spec.horizon, spec.dt)?;
    let env = Envelopes::build(rate, c_grid, t0, spec.dt, len, spec.horizon)?;
    let flags = fold_paths(spec, |_, values, _| env.crossed(values))?;
    let (counts, fractions) = tally(&flags, c_grid.len());
    Ok(EnvelopeReport {
        c_grid: c_grid.to_vec(),
        counts,
        fractions,
        t0,
        horizon: spec.horizon,
        dt: spec.dt,
        n_paths: spec.n_paths,
        master_seed: spec.master_seed,
    })
}

struct LilScale {
    start: usize,
    // 1/√(2t log log t) on the window.
    inv: Vec<f64>,
}

impl LilScale {
    fn build(t0: f64, dt: f64, len: usize, horizon: f64) -> Result<Self> {
        if !(t0 > std::f64::consts::E) {
            return Err(Error::DomainError { what: "LIL window start must exceed e".into(), t: t0 });
        }
        let start = window_start(t0, dt, len, horizon)?;
        let inv = (start..len)
            .map(|k| {
                let t = k as f64 * dt;
                1.0 / (2.0 * t * t.ln().ln()).sqrt()
            })
            .collect();
        Ok(Self { start, inv })
    }

    fn statistic(&self, values: &[f64]) -> f64 {
        values[self.start..].iter().zip(&self.inv).map(|(x, s)| x.abs() * s).fold(0.0, f64::max)
    }
}

fn lil_tally(stats: &[f64], eps_grid: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let counts: Vec<usize> = eps_grid.iter().map(|&e| stats.iter().filter(|&&s| s > 1.0 + e).count()).collect();
    let n = stats.len() as f64;
    let fractions = counts.iter().map(|&c| c as f64 / n).collect();
    (counts, fractions)
}

/// Path maxima of `|x_t|/√(2t log log t)` over `[t0, T]`.
pub fn lil_maxima(ensemble: &PathEnsemble, t0: f64) -> Result<Vec<f64>> {
    let scale = LilScale::build(t0, ensemble.dt, ensemble.grid_len(), ensemble.horizon)?;
    Ok(ensemble.paths().map(|p| scale.statistic(p)).collect())
}

/// LIL exceedance on a stored ensemble of standard Brownian paths.
/// `ε = +∞` is allowed and never exceeded.
pub fn lil_statistic(ensemble: &PathEnsemble, t0: f64, eps_grid: &[f64]) -> Result<LilReport> {
    validate_grid("epsilon grid", eps_grid, false)?;
    let stats = lil_maxima(ensemble, t0)?;
    let (counts, fractions) = lil_tally(&stats, eps_grid);
    Ok(LilReport {
        eps_grid: eps_grid.to_vec(),
        counts,
        fractions,
        t0,
        horizon: ensemble.horizon,
        dt: ensemble.dt,
        n_paths: ensemble.n_paths,
        master_seed: ensemble.master_seed,
    })
}

/// [`lil_statistic`] without storing the paths.
pub fn lil_statistic_streaming(spec: &EnsembleSpec, t0: f64, eps_grid: &[f64]) -> Result<LilReport> {
    validate_grid("epsilon grid", eps_grid, false)?;
    let len = crate::sde::grid_len(spec.horizon, spec.dt)?;
    let scale = LilScale::build(t0, spec.dt, len, spec.horizon)?;
    let stats = fold_paths(spec, |_, values, _| scale.statistic(values))?;
    let (counts, fractions) = lil_tally(&stats, eps_grid);
    Ok(LilReport {
        eps_grid: eps_grid.to_vec(),
        counts,
        fractions,
        t0,
        horizon: spec.horizon,
        dt: spec.dt,
        n_paths: spec.n_paths,
        master_seed: spec.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::{ensemble, Drift, Sde1D};

    fn bm_spec(n: usize, horizon: f64, dt: f64, seed: u64) -> EnsembleSpec {
        let sde = Sde1D::new(Drift::constant(0.0))
            .with_sigma(1.0)
            .unwrap()
            .with_floor(f64::NEG_INFINITY)
            .unwrap();
        EnsembleSpec { sde, x0: 0.0, horizon, dt, n_paths: n, master_seed: seed, barrier: None }
    }

    fn radial_spec(n: usize, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            sde: Sde1D::new(Drift::bessel(2.0)),
            x0: 1.0,
            horizon: 50.0,
            dt: 0.05,
            n_paths: n,
            master_seed: seed,
            barrier: None,
        }
    }

    #[test]
    fn sentinels() {
        let e = ensemble(&radial_spec(40, 1)).unwrap();
        let inf = exceedance(&e, &RateFunction::infinite(), &[0.5, 4.0], 5.0).unwrap();
        assert_eq!(inf.fractions, vec![0.0, 0.0]);
        let zero = exceedance(&e, &RateFunction::zero(), &[0.5, 4.0], 5.0).unwrap();
        assert_eq!(zero.fractions, vec![1.0, 1.0]);
    }

    #[test]
    fn fractions_nonincreasing_in_scale() {
        let times: Vec<f64> = (0..=200).map(|i| 1.0 + i as f64 * 2.0).collect();
        let rate = RateFunction::from_fn(&times, |t| Ok((t * t.ln()).sqrt())).unwrap();
        let spec = radial_spec(300, 9);
        let grid = [1.0, 1.5, 2.0, 3.0, 4.0];
        let r = exceedance(&ensemble(&spec).unwrap(), &rate, &grid, 5.0).unwrap();
        assert!(r.fractions.windows(2).all(|w| w[1] <= w[0]), "{:?}", r.fractions);
        assert!(r.fractions[0] > r.fractions[4]);
        let s = exceedance_streaming(&spec, &rate, &grid, 5.0).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn envelope_outside_table_is_extrapolation() {
        let times: Vec<f64> = (1..=10).map(f64::from).collect();
        let rate = RateFunction::from_fn(&times, |t| Ok(t)).unwrap();
        let e = ensemble(&radial_spec(2, 0)).unwrap();
        assert!(matches!(exceedance(&e, &rate, &[1.0], 5.0), Err(Error::ExtrapolationError { .. })));
    }

    #[test]
    fn lil_window_must_start_after_e() {
        let e = ensemble(&bm_spec(2, 20.0, 0.1, 0)).unwrap();
        assert!(matches!(lil_statistic(&e, 2.0, &[0.0]), Err(Error::DomainError { .. })));
    }

    #[test]
    fn lil_fractions_nested() {
        let spec = bm_spec(400, 200.0, 0.1, 4);
        let grid = [0.0, 0.25, 0.5, 1.0, f64::INFINITY];
        let r = lil_statistic(&ensemble(&spec).unwrap(), 10.0, &grid).unwrap();
        assert!(r.nonincreasing(), "{:?}", r.fractions);
        assert_eq!(r.fractions[4], 0.0);
        assert!(r.fractions[0] > 0.0);
        assert_eq!(r, lil_statistic_streaming(&spec, 10.0, &grid).unwrap());
    }

    #[test]
    fn unreflected_brownian_paths_go_negative() {
        let e = ensemble(&bm_spec(20, 10.0, 0.1, 2)).unwrap();
        assert!(e.values().iter().any(|&x| x < 0.0));
    }
}

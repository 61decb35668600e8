use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sde::{derive_seed, grid_len, Sde1D};
use crate::sde::euler::{run_lanes_with, Lane};

/// Points of the log grid on which drift order is checked.
pub const ORDER_GRID_POINTS: usize = 200;

/// Monte Carlo probability with its standard error `√(p(1−p)/N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub p: f64,
    pub stderr: f64,
    pub hits: usize,
    pub n: usize,
}

impl Estimate {
    pub fn from_counts(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self { p, stderr: (p * (1.0 - p) / n as f64).sqrt(), hits, n }
    }
}

/// Inputs of [`comparison_mc`].
#[derive(Debug, Clone)]
pub struct ComparisonSpec {
    /// Larger drift; its probability of ending near the origin is the smaller one.
    pub dominating: Sde1D,
    pub dominated: Sde1D,
    pub r0: f64,
    pub t: f64,
    pub delta: f64,
    pub radius: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub master_seed: u64,
    /// Flag a violation when `lhs > rhs + k·√(se_l² + se_r²)`; `k = 2` by default.
    pub violation_sigmas: f64,
}

impl ComparisonSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(dominating: Sde1D, dominated: Sde1D, r0: f64, t: f64, delta: f64, radius: f64, n_paths: usize, dt: f64, master_seed: u64) -> Self {
        Self { dominating, dominated, r0, t, delta, radius, n_paths, dt, master_seed, violation_sigmas: 2.0 }
    }

    /// Master seed of the independent dominated-process ensemble.
    pub fn rhs_seed(&self) -> u64 {
        derive_seed(self.master_seed, u64::MAX)
    }
}

/// Estimates of `P(x_t < δ, t < τ_R)` for both processes plus the coupled
/// ordering fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Dominating drift, paths seeded from `master_seed`.
    pub lhs: Estimate,
    /// Dominated drift, paths seeded from `rhs_seed`.
    pub rhs: Estimate,
    /// Share of pairs (dominated, dominating) on the `master_seed` noise with
    /// the dominated path never above the other.
    pub coupled_fraction: f64,
    pub violation: bool,
    pub violation_sigmas: f64,
    pub t: f64,
    pub delta: f64,
    pub radius: f64,
    pub r0: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub master_seed: u64,
    pub rhs_seed: u64,
}

impl ComparisonReport {
    pub fn combined_stderr(&self) -> f64 {
        self.lhs.stderr.hypot(self.rhs.stderr)
    }
}

fn shared_sigma(a: &Sde1D, b: &Sde1D) -> Result<f64> {
    match (a.constant_sigma(), b.constant_sigma()) {
        (Some(x), Some(y)) if x == y => Ok(x),
        _ => Err(Error::invalid("coupling needs the same constant diffusion on both processes")),
    }
}

fn check_lipschitz(a: &Sde1D, b: &Sde1D, dt: f64) -> Result<()> {
    if let (Some(la), Some(lb)) = (a.lipschitz(), b.lipschitz()) {
        let l = la.max(lb);
        if dt * l > 1.0 {
            return Err(Error::invalid(format!("step {dt} breaks the monotone-step condition dt*L <= 1 with L = {l}")));
        }
    }
    Ok(())
}

/// Checks `θ_high ≥ θ_low` on a log grid over `[lo, hi]`.
pub fn check_drift_order(low: &Sde1D, high: &Sde1D, lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::invalid(format!("drift order range [{lo}, {hi}] is empty")));
    }
    let step = (hi / lo).ln() / (ORDER_GRID_POINTS - 1) as f64;
    for i in 0..ORDER_GRID_POINTS {
        let r = if i + 1 == ORDER_GRID_POINTS { hi } else { lo * (step * i as f64).exp() };
        let a = low.drift().eval(r);
        let b = high.drift().eval(r);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::DomainError { what: "drift in order check".into(), t: r });
        }
        if b < a - 1e-12 * a.abs().max(1.0) {
            return Err(Error::DriftOrderViolated { r, high: b, low: a });
        }
    }
    Ok(())
}

// Whether the event {x_k < δ at the last grid point, no value above R before} holds.
/// Running record of one path for the comparison events.
#[derive(Clone, Copy)]
struct Track {
    inside: bool,
    last: f64,
}

impl Track {
    const START: Self = Self { inside: true, last: 0.0 };

    fn push(&mut self, x: f64, radius: f64) {
        self.inside &= x <= radius;
        self.last = x;
    }

    /// Stayed in `[0, R]` and ended below `δ`.
    fn event(&self, delta: f64) -> bool {
        self.inside && self.last < delta
    }
}

/// Comparison inequality by simulation, `3N` paths in all: the dominating
/// process and its coupled partner share the seeds of `master_seed`, and the
/// dominated process gets an independent ensemble for its estimate.
pub fn comparison_mc(spec: &ComparisonSpec) -> Result<ComparisonReport> {
    let ComparisonSpec { dominating, dominated, r0, t, delta, radius, n_paths, dt, master_seed, violation_sigmas } = spec;
    let (r0, t, delta, radius, dt) = (*r0, *t, *delta, *radius, *dt);
    if !(delta > 0.0 && delta < radius) {
        return Err(Error::invalid(format!("need 0 < delta < R, got delta = {delta}, R = {radius}")));
    }
    let floor = dominating.floor().max(dominated.floor());
    if !(r0 >= floor && r0 < radius) {
        return Err(Error::invalid(format!("start {r0} must lie in [{floor}, {radius})")));
    }
    if *n_paths == 0 {
        return Err(Error::invalid("comparison needs at least one path"));
    }
    shared_sigma(dominating, dominated)?;
    check_lipschitz(dominating, dominated, dt)?;
    check_drift_order(dominated, dominating, floor.max(f64::MIN_POSITIVE), radius)?;
    let len = grid_len(t, dt)?;
    let rhs_master = spec.rhs_seed();

    // Four paths per chunk, three chains each: dominating and its coupled
    // partner on the shared seed, then the independent dominated path.
    const PER_CHUNK: usize = 4;
    let chunks = n_paths.div_ceil(PER_CHUNK);
    let per_path: Vec<Vec<Result<(bool, bool, bool)>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let paths: Vec<usize> = (c * PER_CHUNK..((c + 1) * PER_CHUNK).min(*n_paths)).collect();
            let lanes: Vec<Lane<'_>> = paths
                .iter()
                .flat_map(|&i| {
                    let seed = derive_seed(*master_seed, i as u64);
                    [
                        Lane { sde: dominating, x0: r0, seed, path: i },
                        Lane { sde: dominated, x0: r0, seed, path: i },
                        Lane { sde: dominated, x0: r0, seed: derive_seed(rhs_master, i as u64), path: i },
                    ]
                })
                .collect();
            let mut hi = [Track::START; PER_CHUNK];
            let mut rhs = [Track::START; PER_CHUNK];
            let mut order = [true; PER_CHUNK];
            let status = run_lanes_with(&lanes, len, dt, |_, x| {
                for (p, s) in x.chunks_exact(3).enumerate() {
                    hi[p].push(s[0], radius);
                    rhs[p].push(s[2], radius);
                    order[p] &= s[1] <= s[0];
                }
            });
            (0..paths.len())
                .map(|p| {
                    status[3 * p].clone().and(status[3 * p + 1].clone()).and(status[3 * p + 2].clone())?;
                    Ok((hi[p].event(delta), rhs[p].event(delta), order[p]))
                })
                .collect()
        })
        .collect();
    let per_path = per_path.into_iter().flatten().collect::<Result<Vec<_>>>()?;

    let lhs_hits = per_path.iter().filter(|p| p.0).count();
    let rhs_hits = per_path.iter().filter(|p| p.1).count();
    let coupled = per_path.iter().filter(|p| p.2).count();
    let lhs = Estimate::from_counts(lhs_hits, *n_paths);
    let rhs = Estimate::from_counts(rhs_hits, *n_paths);
    let violation = lhs.p > rhs.p + violation_sigmas * lhs.stderr.hypot(rhs.stderr);
    Ok(ComparisonReport {
        lhs,
        rhs,
        coupled_fraction: coupled as f64 / *n_paths as f64,
        violation,
        violation_sigmas: *violation_sigmas,
        t,
        delta,
        radius,
        r0,
        n_paths: *n_paths,
        dt,
        master_seed: *master_seed,
        rhs_seed: rhs_master,
    })
}

/// Share of shared-noise pairs with `low ≤ high` at every grid time.
///
/// Drift order is checked on `[floor, 10³·max(x0, 1)]`.
#[allow(clippy::too_many_arguments)]
pub fn coupled_dominance(low: &Sde1D, high: &Sde1D, x0: f64, horizon: f64, dt: f64, n_paths: usize, master_seed: u64) -> Result<f64> {
    shared_sigma(low, high)?;
    check_lipschitz(low, high, dt)?;
    let floor = low.floor().max(high.floor());
    if !(x0 >= floor) || !x0.is_finite() {
        return Err(Error::invalid(format!("start {x0} is below the floor {floor}")));
    }
    if n_paths == 0 {
        return Err(Error::invalid("coupling needs at least one path"));
    }
    check_drift_order(low, high, floor.max(1e-6), 1e3 * x0.max(1.0))?;
    let len = grid_len(horizon, dt)?;
    let chunks = n_paths.div_ceil(2);
    let flags: Vec<Vec<Result<bool>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let paths: Vec<usize> = (2 * c..(2 * c + 2).min(n_paths)).collect();
            let lanes: Vec<Lane<'_>> = paths
                .iter()
                .flat_map(|&i| {
                    let seed = derive_seed(master_seed, i as u64);
                    [Lane { sde: low, x0, seed, path: i }, Lane { sde: high, x0, seed, path: i }]
                })
                .collect();
            let mut order = [true; 2];
            let status = run_lanes_with(&lanes, len, dt, |_, x| {
                for (p, s) in x.chunks_exact(2).enumerate() {
                    order[p] &= s[0] <= s[1];
                }
            });
            (0..paths.len())
                .map(|p| {
                    status[2 * p].clone()?;
                    status[2 * p + 1].clone()?;
                    Ok(order[p])
                })
                .collect()
        })
        .collect();
    let flags = flags.into_iter().flatten().collect::<Result<Vec<_>>>()?;
    Ok(flags.iter().filter(|&&f| f).count() as f64 / n_paths as f64)
}

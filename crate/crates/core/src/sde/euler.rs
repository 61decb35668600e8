use rayon::prelude::*;

use super::{derive_seed, Diffusion, NoiseStream, Sde1D};
use crate::error::{Error, Result};

/// Number of grid points `⌊T/dt⌋ + 1`. A ratio within `1e-9` of an integer
/// is rounded, so `T = 1, dt = 0.1` gives 11 points.
pub fn grid_len(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(horizon >= dt) || !horizon.is_finite() {
        return Err(Error::invalid(format!("horizon {horizon} must be at least the step {dt}")));
    }
    let ratio = horizon / dt;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    if steps >= usize::MAX as f64 / 2.0 {
        return Err(Error::invalid("time grid is too long"));
    }
    Ok(steps as usize + 1)
}

/// One simulated path on the grid `k·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub values: Vec<f64>,
    /// Steps at which the floor clipped the update.
    pub reflections: u64,
}

/// Paths advanced together by [`run_lanes`]. Independent chains in one loop
/// let the CPU overlap their drift evaluations.
pub(crate) const LANES: usize = 4;

/// One chain for [`run_lanes`].
pub(crate) struct Lane<'a> {
    pub sde: &'a Sde1D,
    pub x0: f64,
    pub seed: u64,
    pub path: usize,
}

#[inline(always)]
fn sigma_at(d: &Diffusion, x: f64) -> f64 {
    match d {
        Diffusion::Constant(s) => *s,
        Diffusion::Variable(f) => f(x),
    }
}

/// Runs the chains x_{k+1} = max(floor, x_k + θ(x_k)dt + σ(x_k)√dt ξ_k) in
/// lockstep, lane `j` into `bufs[j]`. Each lane does exactly the arithmetic a
/// lone run would, so values do not depend on how lanes are grouped.
pub(crate) fn run_lanes(lanes: &[Lane<'_>], len: usize, dt: f64, bufs: &mut [Vec<f64>]) -> Vec<Result<u64>> {
    assert!(bufs.len() >= lanes.len());
    for buf in bufs.iter_mut() {
        buf.clear();
        buf.resize(len, 0.0);
    }
    run_lanes_with(lanes, len, dt, |k, x| {
        for (buf, &v) in bufs.iter_mut().zip(x) {
            buf[k] = v;
        }
    })
}

/// [`run_lanes`] handing the state of all lanes to `observe` at every grid
/// index instead of storing it. A failed lane keeps its last value. A lane
/// whose seed equals the previous lane's reuses that lane's draws.
pub(crate) fn run_lanes_with<F>(lanes: &[Lane<'_>], len: usize, dt: f64, mut observe: F) -> Vec<Result<u64>>
where
    F: FnMut(usize, &[f64]),
{
    let m = lanes.len();
    let sdt = dt.sqrt();
    let mut x: Vec<f64> = lanes.iter().map(|l| l.x0).collect();
    let shared: Vec<bool> = (0..m).map(|j| j > 0 && lanes[j].seed == lanes[j - 1].seed).collect();
    let mut noise: Vec<NoiseStream> = lanes.iter().map(|l| NoiseStream::new(l.seed)).collect();
    let floors: Vec<f64> = lanes.iter().map(|l| l.sde.floor).collect();
    let mut z = vec![0.0; m];
    let mut reflections = vec![0u64; m];
    let mut failed: Vec<Option<usize>> = vec![None; m];
    observe(0, &x);
    for k in 1..len {
        // Draw for every stream, failed lanes included, so partners stay in step.
        for j in 0..m {
            z[j] = if shared[j] { z[j - 1] } else { noise[j].next_normal() };
        }
        for j in 0..m {
            if failed[j].is_some() {
                continue;
            }
            let sde = lanes[j].sde;
            let xj = x[j];
            let next = xj + sde.drift.eval(xj) * dt + sigma_at(&sde.diffusion, xj) * sdt * z[j];
            if !next.is_finite() {
                failed[j] = Some(k);
                continue;
            }
            if next < floors[j] {
                reflections[j] += 1;
                x[j] = floors[j];
            } else {
                x[j] = next;
            }
        }
        observe(k, &x);
    }
    lanes
        .iter()
        .zip(failed)
        .zip(reflections)
        .map(|((lane, f), r)| match f {
            Some(step) => Err(Error::NonFiniteState { path: lane.path, step }),
            None => Ok(r),
        })
        .collect()
}

fn check_start(sde: &Sde1D, x0: f64) -> Result<()> {
    if !(x0 >= sde.floor) || !x0.is_finite() {
        return Err(Error::invalid(format!("start {x0} is below the floor {}", sde.floor)));
    }
    Ok(())
}

/// Simulates one path of `sde` from `x0` using the noise stream `seed`.
pub fn euler_path(sde: &Sde1D, x0: f64, horizon: f64, dt: f64, seed: u64) -> Result<Path> {
    check_start(sde, x0)?;
    let len = grid_len(horizon, dt)?;
    let mut bufs = [Vec::new()];
    let lane = Lane { sde, x0, seed, path: 0 };
    let reflections = run_lanes(&[lane], len, dt, &mut bufs).pop().expect("one lane")?;
    let [values] = bufs;
    Ok(Path { values, reflections })
}

/// Parameters of a path ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub sde: Sde1D,
    pub x0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Exit level `R`; the first grid time with `x > R` is recorded.
    pub barrier: Option<f64>,
}

impl EnsembleSpec {
    fn validate(&self) -> Result<usize> {
        check_start(&self.sde, self.x0)?;
        if self.n_paths == 0 {
            return Err(Error::invalid("ensemble needs at least one path"));
        }
        grid_len(self.horizon, self.dt)
    }

    /// Seed of path `i`.
    pub fn path_seed(&self, i: usize) -> u64 {
        derive_seed(self.master_seed, i as u64)
    }
}

/// Simulates every path and hands it to `f` without keeping it; results come
/// back in path order. `f` also receives the path's reflection count.
///
/// Work is spread over the current rayon pool; results do not depend on it.
pub fn fold_paths<T, F>(spec: &EnsembleSpec, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &[f64], u64) -> T + Sync,
{
    fold_path_range(spec, 0..spec.n_paths, f)
}

/// [`fold_paths`] restricted to the paths in `range`, so large ensembles can
/// be processed block by block with the same per-path seeds.
pub fn fold_path_range<T, F>(spec: &EnsembleSpec, range: std::ops::Range<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &[f64], u64) -> T + Sync,
{
    let len = spec.validate()?;
    if range.end > spec.n_paths {
        return Err(Error::invalid(format!("path range ends at {} but the ensemble has {}", range.end, spec.n_paths)));
    }
    let (start, end) = (range.start, range.end.max(range.start));
    let chunks = (end - start).div_ceil(LANES);
    let results: Vec<Vec<Result<T>>> = (0..chunks)
        .into_par_iter()
        .map_init(
            || vec![Vec::new(); LANES],
            |bufs, c| {
                let lanes: Vec<Lane<'_>> = (start + c * LANES..(start + (c + 1) * LANES).min(end))
                    .map(|i| Lane { sde: &spec.sde, x0: spec.x0, seed: spec.path_seed(i), path: i })
                    .collect();
                run_lanes(&lanes, len, spec.dt, bufs)
                    .into_iter()
                    .zip(&lanes)
                    .zip(bufs.iter())
                    .map(|((r, lane), buf)| r.map(|refl| f(lane.path, buf, refl)))
                    .collect()
            },
        )
        .collect();
    // Report the lowest failing path, whatever order the workers ran in.
    results.into_iter().flatten().collect()
}

/// Stored ensemble, row-major by path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    pub barrier: Option<f64>,
    len: usize,
    values: Vec<f64>,
    pub first_exit: Vec<Option<f64>>,
    pub reflections: Vec<u64>,
}

impl PathEnsemble {
    pub fn grid_len(&self) -> usize {
        self.len
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i * self.len..(i + 1) * self.len]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.len)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn final_values(&self) -> Vec<f64> {
        self.paths().map(|p| p[p.len() - 1]).collect()
    }
}

/// Index of the first grid point strictly above `barrier`.
pub(crate) fn first_exit_index(values: &[f64], barrier: Option<f64>) -> Option<usize> {
    let b = barrier?;
    values.iter().position(|&x| x > b)
}

/// Simulates and stores `n_paths` paths.
pub fn ensemble(spec: &EnsembleSpec) -> Result<PathEnsemble> {
    let len = spec.validate()?;
    let per_path = fold_paths(spec, |_, values, refl| {
        let exit = first_exit_index(values, spec.barrier).map(|k| k as f64 * spec.dt);
        (values.to_vec(), exit, refl)
    })?;
    let mut values = Vec::with_capacity(len * spec.n_paths);
    let mut first_exit = Vec::with_capacity(spec.n_paths);
    let mut reflections = Vec::with_capacity(spec.n_paths);
    for (v, e, r) in per_path {
        values.extend_from_slice(&v);
        first_exit.push(e);
        reflections.push(r);
    }
    Ok(PathEnsemble {
        dt: spec.dt,
        horizon: spec.horizon,
        n_paths: spec.n_paths,
        master_seed: spec.master_seed,
        barrier: spec.barrier,
        len,
        values,
        first_exit,
        reflections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::Drift;

    fn bm(sigma: f64) -> Sde1D {
        Sde1D::new(Drift::constant(0.0)).with_sigma(sigma).unwrap()
    }

    #[test]
    fn grid_length_rounds_near_integers() {
        assert_eq!(grid_len(1.0, 0.1).unwrap(), 11);
        assert_eq!(grid_len(5.0, 1e-3).unwrap(), 5001);
        assert_eq!(grid_len(1.05, 0.1).unwrap(), 11);
        assert!(grid_len(0.5, 1.0).is_err());
    }

    #[test]
    fn deterministic_ode_limit() {
        let sde = Sde1D::new(Drift::constant(1.0)).with_sigma(0.0).unwrap();
        let floor = sde.floor();
        let p = euler_path(&sde, floor, 5.0, 1e-3, 1).unwrap();
        assert_eq!(p.values.len(), 5001);
        assert!((p.values.last().unwrap() - (floor + 5.0)).abs() < 1e-9);
    }

    #[test]
    fn unit_steps() {
        let sde = Sde1D::new(Drift::constant(1.0)).with_sigma(0.0).unwrap();
        let p = euler_path(&sde, 3.0, 2.0, 1.0, 9).unwrap();
        assert_eq!(p.values, vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn single_path_ensemble_matches_euler_path() {
        let spec = EnsembleSpec {
            sde: bm(2f64.sqrt()),
            x0: 1.0,
            horizon: 1.0,
            dt: 0.01,
            n_paths: 1,
            master_seed: 42,
            barrier: None,
        };
        let e = ensemble(&spec).unwrap();
        let p = euler_path(&spec.sde, 1.0, 1.0, 0.01, derive_seed(42, 0)).unwrap();
        assert_eq!(e.path(0), &p.values[..]);
        assert_eq!(e.first_exit, vec![None]);
    }

    #[test]
    fn infinite_barrier_never_exits() {
        let spec = EnsembleSpec {
            sde: bm(2f64.sqrt()),
            x0: 1.0,
            horizon: 1.0,
            dt: 0.01,
            n_paths: 50,
            master_seed: 3,
            barrier: Some(f64::INFINITY),
        };
        assert!(ensemble(&spec).unwrap().first_exit.iter().all(Option::is_none));
    }

    #[test]
    fn driftless_mean_is_preserved() {
        let spec = EnsembleSpec {
            sde: bm(2f64.sqrt()),
            x0: 10.0,
            horizon: 1.0,
            dt: 0.01,
            n_paths: 10_000,
            master_seed: 5,
            barrier: None,
        };
        let finals = fold_paths(&spec, |_, v, _| v[v.len() - 1]).unwrap();
        let n = finals.len() as f64;
        let mean = finals.iter().sum::<f64>() / n;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 10.0).abs() < 3.0 * (var / n).sqrt(), "{mean}");
        // Var = σ²T = 2
        assert!((var - 2.0).abs() < 0.1, "{var}");
    }

    #[test]
    fn ranges_reproduce_full_fold() {
        let spec = EnsembleSpec {
            sde: bm(1.0),
            x0: 2.0,
            horizon: 1.0,
            dt: 0.1,
            n_paths: 11,
            master_seed: 77,
            barrier: None,
        };
        let all = fold_paths(&spec, |i, v, _| (i, v.to_vec())).unwrap();
        let mut parts = fold_path_range(&spec, 0..5, |i, v, _| (i, v.to_vec())).unwrap();
        parts.extend(fold_path_range(&spec, 5..11, |i, v, _| (i, v.to_vec())).unwrap());
        assert_eq!(all, parts);
        assert!(fold_path_range(&spec, 0..12, |_, _, _| ()).is_err());
    }

    #[test]
    fn floor_reflection_is_counted() {
        let sde = Sde1D::new(Drift::constant(-5.0)).with_sigma(0.0).unwrap().with_floor(0.5).unwrap();
        let p = euler_path(&sde, 1.0, 1.0, 0.1, 0).unwrap();
        assert_eq!(*p.values.last().unwrap(), 0.5);
        assert_eq!(p.reflections, 9);
    }

    #[test]
    fn non_finite_state_names_step() {
        let sde = Sde1D::new(Drift::new("blowup", |x| if x > 2.5 { f64::NAN } else { 1.0 }))
            .with_sigma(0.0)
            .unwrap();
        let spec = EnsembleSpec {
            sde,
            x0: 1.0,
            horizon: 5.0,
            dt: 1.0,
            n_paths: 3,
            master_seed: 0,
            barrier: None,
        };
        assert_eq!(ensemble(&spec), Err(Error::NonFiniteState { path: 0, step: 3 }));
    }

    #[test]
    fn start_below_floor_is_rejected() {
        let sde = bm(1.0).with_floor(1.0).unwrap();
        assert!(euler_path(&sde, 0.5, 1.0, 0.1, 0).is_err());
    }
}

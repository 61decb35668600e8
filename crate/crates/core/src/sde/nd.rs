use super::{grid_len, NoiseStream};
use crate::error::{Error, Result};
use crate::profiles::{rho_tilde, RadialCoefficient, ORIGIN_FLOOR};

/// `dX = ã′(|X|) X/|X| dt + √(2ã(|X|)) dW` in `ℝⁿ`.
#[derive(Debug, Clone)]
pub struct NdSpec {
    pub coeff: RadialCoefficient,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
    /// `|X|` is pushed back radially to this level when a step lands inside it.
    pub floor: f64,
    pub record_coordinates: bool,
}

impl NdSpec {
    pub fn new(coeff: RadialCoefficient, x0: Vec<f64>, horizon: f64, dt: f64, seed: u64) -> Self {
        Self {
            coeff,
            x0,
            horizon,
            dt,
            seed,
            floor: ORIGIN_FLOOR,
            record_coordinates: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdPath {
    /// `|X_t|` on the grid.
    pub euclidean: Vec<f64>,
    /// `ρ̃(|X_t|)` on the grid.
    pub intrinsic: Vec<f64>,
    /// Row-major `len × n` coordinates when requested.
    pub coordinates: Option<Vec<f64>>,
    pub reflections: u64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Simulates the `n`-dimensional chain, `n = x0.len()`.
pub fn euclidean_diffusion_nd(spec: &NdSpec) -> Result<NdPath> {
    let n = spec.x0.len();
    if n < 2 {
        return Err(Error::invalid("n-dimensional diffusion needs n >= 2"));
    }
    let r0 = norm(&spec.x0);
    if !(r0 >= spec.floor) || !r0.is_finite() {
        return Err(Error::SingularOrigin { r: r0, floor: spec.floor });
    }
    let len = grid_len(spec.horizon, spec.dt)?;
    let dt = spec.dt;
    let sdt = dt.sqrt();
    let mut noise = NoiseStream::new(spec.seed);
    let mut x = spec.x0.clone();
    let mut euclidean = Vec::with_capacity(len);
    let mut coordinates = spec.record_coordinates.then(|| Vec::with_capacity(len * n));
    let mut reflections = 0;
    euclidean.push(r0);
    if let Some(c) = coordinates.as_mut() {
        c.extend_from_slice(&x);
    }
    for k in 1..len {
        let r = norm(&x);
        let a = spec.coeff.value(r);
        let push = spec.coeff.derivative(r) / r * dt;
        let amp = (2.0 * a).sqrt() * sdt;
        for xi in x.iter_mut() {
            *xi += push * *xi + amp * noise.next_normal();
        }
        let mut r_new = norm(&x);
        if !r_new.is_finite() {
            return Err(Error::NonFiniteState { path: 0, step: k });
        }
        if r_new < spec.floor {
            reflections += 1;
            if r_new == 0.0 {
                x.iter_mut().for_each(|v| *v = 0.0);
                x[0] = spec.floor;
            } else {
                let s = spec.floor / r_new;
                x.iter_mut().for_each(|v| *v *= s);
            }
            r_new = spec.floor;
        }
        euclidean.push(r_new);
        if let Some(c) = coordinates.as_mut() {
            c.extend_from_slice(&x);
        }
    }
    let intrinsic = match spec.coeff {
        RadialCoefficient::Constant => euclidean.clone(),
        _ => euclidean
            .iter()
            .map(|&r| rho_tilde(&spec.coeff, r))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(NdPath { euclidean, intrinsic, coordinates, reflections })
}

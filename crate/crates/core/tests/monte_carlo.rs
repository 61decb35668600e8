//! Statistical checks on simulated ensembles. Thresholds marked as pinned
//! come from `tests/pilots/pinned.txt`.

use escrate::profiles::{closed_form_rate, CatalogueCase, ManifoldModel};
use escrate::rate_solver::RateFunction;
use escrate::sde::{euler_path, fold_paths, radial_drift, Drift, DriftSource, EnsembleSpec, Sde1D};
use escrate::verify::{comparison_mc, coupled_dominance, exceedance_streaming, ComparisonSpec};

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn hyperbolic(floor: f64) -> Sde1D {
    Sde1D::new(radial_drift(&DriftSource::Manifold(ManifoldModel::hyperbolic(2, 1.0).unwrap())).unwrap())
        .with_floor(floor)
        .unwrap()
        .with_lipschitz(1.0 / (floor * floor))
}

fn hyperbolic_bound(floor: f64) -> Sde1D {
    Sde1D::new(radial_drift(&DriftSource::HyperbolicBound { n: 2, curvature: 1.0 }).unwrap())
        .with_floor(floor)
        .unwrap()
        .with_lipschitz(1.0 / (floor * floor))
}

#[test]
fn envelope_exceedance_below_pinned_threshold() {
    // Pinned: C=4 threshold from the envelope pilot.
    const THRESHOLD: f64 = 0.26635;
    let spec = EnsembleSpec {
        sde: Sde1D::new(Drift::bessel(2.0)),
        x0: 1.0,
        horizon: 1e3,
        dt: 1e-2,
        n_paths: 10_000,
        master_seed: 2024,
        barrier: None,
    };
    let times: Vec<f64> = (0..400).map(|i| 30.0 * (5e3f64 / 30.0).powf(i as f64 / 399.0)).collect();
    let rate = RateFunction::from_fn(&times, |t| closed_form_rate(&CatalogueCase::Diri1, t).map(|r| r.0)).unwrap();
    let report = exceedance_streaming(&spec, &rate, &[3.0, 4.0, 5.0], 10.0).unwrap();
    assert!(report.fractions.windows(2).all(|w| w[1] <= w[0]), "{:?}", report.fractions);
    assert!(report.fractions[1] <= THRESHOLD, "{:?}", report.fractions);
}

#[test]
fn comparison_holds_at_half_step() {
    let floor = 0.04;
    let spec = ComparisonSpec::new(hyperbolic_bound(floor), hyperbolic(floor), 1.0, 5.0, 2.0, 20.0, 10_000, 5e-4, 11);
    let r = comparison_mc(&spec).unwrap();
    assert!(!r.violation, "{r:?}");
    assert_eq!(r.coupled_fraction, 1.0);
}

#[test]
fn translated_drift_dominates() {
    let spec = ComparisonSpec::new(
        Sde1D::new(Drift::constant(1.0)).with_floor(f64::NEG_INFINITY).unwrap(),
        Sde1D::new(Drift::constant(0.0)).with_floor(f64::NEG_INFINITY).unwrap(),
        1.0,
        1.0,
        1.5,
        10.0,
        4000,
        1e-2,
        3,
    );
    let r = comparison_mc(&spec).unwrap();
    assert!(r.lhs.p <= r.rhs.p, "{r:?}");
    assert_eq!(r.coupled_fraction, 1.0);
}

#[test]
fn coupled_dominance_examples() {
    let floor = 0.1;
    let low = Sde1D::new(Drift::bessel(1.0)).with_floor(floor).unwrap().with_lipschitz(100.0);
    assert_eq!(coupled_dominance(&low, &low, 1.0, 5.0, 1e-2, 500, 1).unwrap(), 1.0);
    let high = Sde1D::new(Drift::new("bessel+1", |r| 1.0 / r + 1.0).with_floor(floor))
        .with_floor(floor)
        .unwrap()
        .with_lipschitz(100.0);
    assert_eq!(coupled_dominance(&low, &high, 1.0, 5.0, 1e-2, 500, 2).unwrap(), 1.0);
    let f = coupled_dominance(&hyperbolic(0.04), &hyperbolic_bound(0.04), 1.0, 5.0, 1e-3, 500, 3).unwrap();
    assert_eq!(f, 1.0);
}

#[test]
fn driftless_paths_leave_the_unit_interval() {
    let spec = EnsembleSpec {
        sde: Sde1D::new(Drift::constant(0.0)),
        x0: 0.5,
        horizon: 50.0,
        dt: 1e-2,
        n_paths: 10_000,
        master_seed: 4,
        barrier: Some(1.0),
    };
    let exits = fold_paths(&spec, |_, v, _| v.iter().any(|&x| x > 1.0)).unwrap();
    let frac = exits.iter().filter(|&&e| e).count() as f64 / exits.len() as f64;
    assert!(frac >= 0.99, "{frac}");
}

#[test]
fn driftless_mean_is_preserved() {
    let spec = EnsembleSpec {
        sde: Sde1D::new(Drift::constant(0.0)),
        x0: 10.0,
        horizon: 1.0,
        dt: 1e-2,
        n_paths: 10_000,
        master_seed: 5,
        barrier: None,
    };
    let finals = fold_paths(&spec, |_, v, _| v[v.len() - 1]).unwrap();
    let (m, se) = mean_se(&finals);
    assert!((m - 10.0).abs() <= 3.0 * se, "{m} ± {se}");
}

#[test]
fn deterministic_limit() {
    let sde = Sde1D::new(Drift::constant(1.0)).with_sigma(0.0).unwrap();
    let p = euler_path(&sde, sde.floor(), 5.0, 1e-3, 0).unwrap();
    assert_eq!(p.values.len(), 5001);
    assert!((p.values[5000] - (sde.floor() + 5.0)).abs() < 1e-9);
}

#[test]
fn halving_dt_keeps_final_means() {
    let floor = 0.1;
    let drifts = [
        Drift::constant(1.0),
        Drift::bessel(1.0),
        radial_drift(&DriftSource::Manifold(ManifoldModel::hyperbolic(2, 1.0).unwrap())).unwrap(),
        radial_drift(&DriftSource::HyperbolicBound { n: 2, curvature: 1.0 }).unwrap(),
        radial_drift(&DriftSource::Manifold(ManifoldModel::euclidean(3).unwrap())).unwrap(),
    ];
    for d in drifts {
        let label = d.label().to_string();
        let run = |dt: f64, seed: u64| {
            let spec = EnsembleSpec {
                sde: Sde1D::new(d.clone()).with_floor(floor).unwrap(),
                x0: 1.0,
                horizon: 5.0,
                dt,
                n_paths: 4000,
                master_seed: seed,
                barrier: None,
            };
            mean_se(&fold_paths(&spec, |_, v, _| v[v.len() - 1]).unwrap())
        };
        let (a, sa) = run(1e-2, 21);
        let (b, sb) = run(5e-3, 22);
        assert!((a - b).abs() <= 3.0 * sa.hypot(sb), "{label}: {a} vs {b}");
    }
}

// At the critical c = σ²/2 the chain reflects in about 0.13% of paths, so
// the check covers the strictly repelling range.
#[test]
fn bessel_paths_rarely_reach_the_floor() {
    for c in [1.5, 2.0] {
        let sde = Sde1D::new(Drift::bessel(c));
        let spec = EnsembleSpec { x0: 10.0 * sde.floor(), sde, horizon: 10.0, dt: 1e-4, n_paths: 2000, master_seed: 6, barrier: None };
        let reflected = fold_paths(&spec, |_, _, refl| refl > 0).unwrap();
        let share = reflected.iter().filter(|&&r| !r).count() as f64 / reflected.len() as f64;
        assert!(share >= 0.999, "c = {c}: {share}");
    }
}

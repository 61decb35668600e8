use std::io::Write;

use super::config::{ModelConfig, OutputFormat, RateSource, RunConfig, SimulationConfig};
use super::CliError;
use crate::error::Error;
use crate::profiles::{
    closed_form_rate, profile_from_radial, rho_tilde, rho_tilde_inverse, CatalogueCase, EnergyMode, GrowthProfile,
    ManifoldModel, RadialCoefficient,
};
use crate::rate_solver::{conservativeness, dyadic_scheme, effective_lower_limit, rate_table_from, RateFunction, Subject, Verdict};
use crate::sde::{fold_path_range, fold_paths, radial_drift, Drift, DriftSource, EnsembleSpec, Sde1D};
use crate::verify::{comparison_mc, exceedance_streaming, lil_statistic_streaming, ComparisonSpec};

type Res<T> = std::result::Result<T, CliError>;

/// Outcome line of a verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn word(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Info => "INFO",
        }
    }
}

/// Final line of a `verify` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictLine {
    pub status: Status,
    pub detail: String,
}

impl std::fmt::Display for VerdictLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.detail.is_empty() {
            f.write_str(self.status.word())
        } else {
            write!(f, "{} {}", self.status.word(), self.detail)
        }
    }
}

/// 17 significant digits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn config<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Config(msg.into()))
}

fn dimension(model: &ModelConfig) -> u32 {
    model.n.unwrap_or(2)
}

fn coefficient(model: &ModelConfig) -> Res<RadialCoefficient> {
    if let Some(c) = &model.coefficient {
        return Ok(c.clone());
    }
    match model.case.as_ref().and_then(CatalogueCase::coefficient) {
        Some(c) => Ok(c),
        None => config("[model] needs a coefficient family or a case with one"),
    }
}

fn profile(model: &ModelConfig) -> Res<GrowthProfile> {
    Ok(profile_from_radial(&coefficient(model)?, dimension(model), model.mode)?)
}

fn case(model: &ModelConfig) -> Res<CatalogueCase> {
    model.case.ok_or_else(|| CliError::Config("[model] case is required for closed-form rates".into()))
}

/// `rate`: `t,psi,psi_tilde` on the configured grid.
pub fn cmd_rate(cfg: &RunConfig, out: &mut dyn Write) -> Res<()> {
    let model = cfg.model()?;
    let solver = &cfg.solver;
    let grid = &solver.t_grid;
    let mut rows = Vec::with_capacity(grid.len());
    match solver.rate {
        RateSource::ClosedForm => {
            let case = case(model)?;
            for &t in grid {
                let (p, tilde) = closed_form_rate(&case, solver.scale_c * t)?;
                rows.push((t, p, tilde));
            }
        }
        RateSource::Zero | RateSource::Infinity => {
            let v = if solver.rate == RateSource::Zero { 0.0 } else { f64::INFINITY };
            rows.extend(grid.iter().map(|&t| (t, v, None)));
        }
        RateSource::Numeric if !grid.is_empty() => {
            let coeff = coefficient(model)?;
            let profile = profile(model)?;
            let r_lo = match solver.r_lo {
                Some(r) => r,
                None => effective_lower_limit(&profile)?,
            };
            let table = rate_table_from(&profile, grid, solver.scale_c, r_lo)?;
            for (t, solved) in table.samples() {
                let (p, tilde) = match model.mode {
                    EnergyMode::UnitEnergy => (solved, rho_tilde_inverse(&coeff, solved)?),
                    EnergyMode::CoefficientEnergy => (rho_tilde(&coeff, solved)?, solved),
                };
                rows.push((t, p, Some(tilde)));
            }
        }
        RateSource::Numeric => {}
    }
    writeln!(out, "t,psi,psi_tilde")?;
    for (t, p, tilde) in rows {
        writeln!(out, "{},{},{}", num(t), num(p), tilde.map(num).unwrap_or_default())?;
    }
    Ok(())
}

/// `conserve`: one `verdict=... family=... params=...` line.
pub fn cmd_conserve(cfg: &RunConfig, out: &mut dyn Write) -> Res<()> {
    let model = cfg.model()?;
    let (verdict, family, params) = if let Some(coeff) = &model.coefficient {
        let v = conservativeness(&Subject::Coefficient { coeff, n: dimension(model) })?;
        (v, coeff.family_name().to_string(), coeff.params())
    } else if let Some(case) = &model.case {
        let v = conservativeness(&Subject::Case(case))?;
        let params: Vec<String> = case.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        (v, case.name().to_string(), params.join(";"))
    } else {
        return config("[model] needs a coefficient family or a case");
    };
    let mut line = format!("verdict={} family={family} params={params}", verdict.name());
    if let Verdict::Inconclusive(report) = &verdict {
        line.push_str(&format!(" leaning={}", report.leaning));
    }
    writeln!(out, "{line}")?;
    Ok(())
}

fn drift_number(spec: &str, part: Option<&str>) -> Res<f64> {
    part.and_then(|p| p.trim().parse().ok())
        .ok_or_else(|| CliError::Config(format!("drift '{spec}': missing or bad number")))
}

fn drift_dimension(spec: &str, part: Option<&str>) -> Res<u32> {
    part.and_then(|p| p.trim().parse().ok())
        .ok_or_else(|| CliError::Config(format!("drift '{spec}': missing or bad dimension")))
}

/// Drift from a spec string: `constant:v`, `bessel:c`, `power:θ:α`,
/// `euclidean:n`, `hyperbolic:n:K`, `hyperbolic_bound:n:K`, `coefficient`
/// or `manifold` (both taken from `[model]`).
pub fn parse_drift(spec: &str, model: Option<&ModelConfig>) -> Res<Drift> {
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or("").trim();
    let (a, b) = (parts.next(), parts.next());
    if parts.next().is_some() {
        return config(format!("drift '{spec}': too many fields"));
    }
    let source = match kind {
        "constant" => return Ok(Drift::constant(drift_number(spec, a)?)),
        "bessel" => return Ok(Drift::bessel(drift_number(spec, a)?)),
        "power" => return Ok(Drift::power(drift_number(spec, a)?, drift_number(spec, b)?)),
        "euclidean" => DriftSource::Manifold(ManifoldModel::euclidean(drift_dimension(spec, a)?)?),
        "hyperbolic" => {
            DriftSource::Manifold(ManifoldModel::hyperbolic(drift_dimension(spec, a)?, drift_number(spec, b)?)?)
        }
        "hyperbolic_bound" => DriftSource::HyperbolicBound {
            n: drift_dimension(spec, a)?,
            curvature: drift_number(spec, b)?,
        },
        "coefficient" => {
            let model = model.ok_or_else(|| CliError::Config("drift 'coefficient' needs [model]".into()))?;
            DriftSource::Coefficient { coeff: coefficient(model)?, n: dimension(model) }
        }
        "manifold" => {
            let m = model.and_then(|m| m.manifold.clone());
            DriftSource::Manifold(m.ok_or_else(|| CliError::Config("drift 'manifold' needs [model] manifold".into()))?)
        }
        other => return config(format!("unknown drift kind '{other}'")),
    };
    Ok(radial_drift(&source)?)
}

fn default_drift(cfg: &RunConfig, sim: &SimulationConfig) -> Res<Drift> {
    if let Some(spec) = &sim.drift {
        return parse_drift(spec, cfg.model.as_ref());
    }
    match &cfg.model {
        Some(m) if m.manifold.is_some() => parse_drift("manifold", Some(m)),
        Some(m) if m.coefficient.is_some() => parse_drift("coefficient", Some(m)),
        _ => config("[simulation] drift is required without a [model] manifold or family"),
    }
}

fn process(drift: Drift, sim: &SimulationConfig, lipschitz: Option<f64>) -> Res<Sde1D> {
    let sde = Sde1D::new(drift).with_sigma(sim.sigma)?.with_floor(sim.floor)?;
    Ok(match lipschitz {
        Some(l) => sde.with_lipschitz(l),
        None => sde,
    })
}

fn ensemble_spec(cfg: &RunConfig) -> Res<EnsembleSpec> {
    let sim = cfg.simulation()?;
    let sde = process(default_drift(cfg, sim)?, sim, None)?;
    Ok(EnsembleSpec {
        sde,
        x0: sim.x0,
        horizon: sim.horizon,
        dt: sim.dt,
        n_paths: sim.n_paths,
        master_seed: sim.seed,
        barrier: sim.barrier,
    })
}

// Paths formatted per block keep memory bounded for long output.
const SIMULATE_BLOCK: usize = 256;

/// `simulate`: long `path,step,t,x` or summary `path,final,exitTime`.
pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn Write) -> Res<()> {
    let spec = ensemble_spec(cfg)?;
    let dt = spec.dt;
    match cfg.simulation()?.output {
        OutputFormat::Long => {
            writeln!(out, "path,step,t,x")?;
            let mut start = 0;
            while start < spec.n_paths {
                let end = (start + SIMULATE_BLOCK).min(spec.n_paths);
                let text = fold_path_range(&spec, start..end, |i, values, _| {
                    let mut s = String::with_capacity(values.len() * 56);
                    for (k, &x) in values.iter().enumerate() {
                        s.push_str(&format!("{i},{k},{},{}\n", num(k as f64 * dt), num(x)));
                    }
                    s
                })?;
                for block in text {
                    out.write_all(block.as_bytes())?;
                }
                start = end;
            }
        }
        OutputFormat::Summary => {
            writeln!(out, "path,final,exitTime")?;
            let barrier = spec.barrier;
            let rows = fold_paths(&spec, |i, values, _| {
                let exit = barrier.and_then(|b| values.iter().position(|&x| x > b)).map(|k| num(k as f64 * dt));
                format!("{i},{},{}\n", num(values[values.len() - 1]), exit.unwrap_or_default())
            })?;
            for row in rows {
                out.write_all(row.as_bytes())?;
            }
        }
    }
    Ok(())
}

// Index of `value` in `grid`, or the last entry when absent.
fn check_index(grid: &[f64], value: Option<f64>, key: &str) -> Res<usize> {
    match value {
        None => Ok(grid.len() - 1),
        Some(v) => grid
            .iter()
            .position(|&g| g == v)
            .ok_or_else(|| CliError::Config(format!("[verify] check_at = {v} is not on the {key}"))),
    }
}

// Rate t ↦ ψ(t) sampled on [lo, hi] for the envelope check.
fn envelope_rate(cfg: &RunConfig, lo: f64, hi: f64) -> Res<RateFunction> {
    let source = cfg.solver.rate;
    match source {
        RateSource::Zero => return Ok(RateFunction::zero()),
        RateSource::Infinity => return Ok(RateFunction::infinite()),
        _ => {}
    }
    const POINTS: usize = 400;
    let ratio = (hi / lo).ln() / (POINTS - 1) as f64;
    let times: Vec<f64> = (0..POINTS).map(|i| if i + 1 == POINTS { hi } else { lo * (ratio * i as f64).exp() }).collect();
    let model = cfg.model()?;
    if source == RateSource::ClosedForm {
        let case = case(model)?;
        return Ok(RateFunction::from_fn(&times, |t| closed_form_rate(&case, t).map(|r| r.0))?);
    }
    if model.mode != EnergyMode::UnitEnergy {
        return config("envelope checks compare intrinsic radii and need mode = unit_energy");
    }
    let profile = profile(model)?;
    let r_lo = match cfg.solver.r_lo {
        Some(r) => r,
        None => effective_lower_limit(&profile)?,
    };
    Ok(rate_table_from(&profile, &times, 1.0, r_lo)?)
}

fn verify_envelope(cfg: &RunConfig, out: &mut dyn Write) -> Res<VerdictLine> {
    let v = &cfg.verify;
    let spec = ensemble_spec(cfg)?;
    if v.c_grid.is_empty() {
        return config("[verify] c_grid is empty");
    }
    if !(v.t0 > 0.0) {
        return config("[verify] t0 must be positive for envelope checks");
    }
    let at = check_index(&v.c_grid, v.check_at, "C grid")?;
    let c_min = v.c_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let c_max = v.c_grid.iter().copied().fold(0.0, f64::max);
    let rate = envelope_rate(cfg, c_min * v.t0, c_max * spec.horizon)?;
    let report = exceedance_streaming(&spec, &rate, &v.c_grid, v.t0)?;
    writeln!(out, "C,exceedance,count")?;
    for ((c, f), n) in report.c_grid.iter().zip(&report.fractions).zip(&report.counts) {
        writeln!(out, "{},{},{n}", num(*c), num(*f))?;
    }
    let fraction = report.fractions[at];
    let ok = fraction <= v.max_fraction;
    Ok(VerdictLine {
        status: if ok { Status::Pass } else { Status::Fail },
        detail: format!(
            "C={} exceedance={} max_fraction={} t0={} T={} dt={} n_paths={} seed={}",
            report.c_grid[at], fraction, v.max_fraction, report.t0, report.horizon, report.dt, report.n_paths, report.master_seed
        ),
    })
}

fn verify_compare(cfg: &RunConfig, out: &mut dyn Write) -> Res<VerdictLine> {
    let v = &cfg.verify;
    let sim = cfg.simulation()?;
    let need = |x: Option<f64>, key: &str| x.ok_or_else(|| CliError::Config(format!("[verify] {key} is required")));
    let dominating = v.dominating.as_deref().ok_or_else(|| CliError::Config("[verify] dominating is required".into()))?;
    let dominated = v.dominated.as_deref().ok_or_else(|| CliError::Config("[verify] dominated is required".into()))?;
    let high = process(parse_drift(dominating, cfg.model.as_ref())?, sim, v.lipschitz)?;
    let low = process(parse_drift(dominated, cfg.model.as_ref())?, sim, v.lipschitz)?;
    let mut spec = ComparisonSpec::new(
        high,
        low,
        sim.x0,
        need(v.t, "t")?,
        need(v.delta, "delta")?,
        need(v.radius, "radius")?,
        sim.n_paths,
        sim.dt,
        sim.seed,
    );
    spec.violation_sigmas = v.violation_sigmas;
    let r = comparison_mc(&spec)?;
    writeln!(out, "quantity,value")?;
    let rows: [(&str, String); 14] = [
        ("lhs_estimate", num(r.lhs.p)),
        ("lhs_stderr", num(r.lhs.stderr)),
        ("rhs_estimate", num(r.rhs.p)),
        ("rhs_stderr", num(r.rhs.stderr)),
        ("coupled_dominance_fraction", num(r.coupled_fraction)),
        ("violation", u8::from(r.violation).to_string()),
        ("t", num(r.t)),
        ("delta", num(r.delta)),
        ("radius", num(r.radius)),
        ("r0", num(r.r0)),
        ("n_paths", r.n_paths.to_string()),
        ("dt", num(r.dt)),
        ("master_seed", r.master_seed.to_string()),
        ("rhs_seed", r.rhs_seed.to_string()),
    ];
    for (k, val) in rows {
        writeln!(out, "{k},{val}")?;
    }
    let ok = !r.violation && r.coupled_fraction == 1.0;
    Ok(VerdictLine {
        status: if ok { Status::Pass } else { Status::Fail },
        detail: format!(
            "lhs={} rhs={} coupled_dominance_fraction={} violation={}",
            r.lhs.p, r.rhs.p, r.coupled_fraction, r.violation
        ),
    })
}

fn verify_lil(cfg: &RunConfig, out: &mut dyn Write) -> Res<VerdictLine> {
    let v = &cfg.verify;
    let sim = cfg.simulation()?;
    if v.eps_grid.is_empty() {
        return config("[verify] eps_grid is empty");
    }
    let at = check_index(&v.eps_grid, v.check_at, "epsilon grid")?;
    // Standard Brownian motion on the line; the drift, σ, x0 and floor of
    // [simulation] do not apply.
    let sde = Sde1D::new(Drift::constant(0.0)).with_sigma(1.0)?.with_floor(f64::NEG_INFINITY)?;
    let spec = EnsembleSpec {
        sde,
        x0: 0.0,
        horizon: sim.horizon,
        dt: sim.dt,
        n_paths: sim.n_paths,
        master_seed: sim.seed,
        barrier: None,
    };
    let report = lil_statistic_streaming(&spec, v.t0, &v.eps_grid)?;
    writeln!(out, "eps,exceedance,count")?;
    for ((e, f), n) in report.eps_grid.iter().zip(&report.fractions).zip(&report.counts) {
        writeln!(out, "{},{},{n}", num(*e), num(*f))?;
    }
    let fraction = report.fractions[at];
    let ok = report.nonincreasing() && fraction <= v.max_fraction;
    Ok(VerdictLine {
        status: if ok { Status::Pass } else { Status::Fail },
        detail: format!(
            "eps={} exceedance={} max_fraction={} nonincreasing={} t0={} T={} dt={} n_paths={} seed={}",
            report.eps_grid[at],
            fraction,
            v.max_fraction,
            report.nonincreasing(),
            report.t0,
            report.horizon,
            report.dt,
            report.n_paths,
            report.master_seed
        ),
    })
}

fn verify_dyadic(cfg: &RunConfig, out: &mut dyn Write) -> Res<VerdictLine> {
    let v = &cfg.verify;
    let profile = profile(cfg.model()?)?;
    let scheme = dyadic_scheme(&profile, v.dyadic_c, v.dyadic_levels, v.mu_b1)?;
    writeln!(out, "n,R_n,r_n,t_n,T_n,bound,partial_sum,check,summand")?;
    for l in &scheme.levels {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            l.n,
            num(l.big_r),
            num(l.r),
            num(l.t),
            num(l.cumulative_t),
            num(l.bound),
            num(l.partial_sum),
            num(l.check),
            num(l.summand)
        )?;
    }
    let total = scheme.total_bound();
    let times_ok = scheme.time_checks_hold(cfg.solver.tolerance);
    let ok = total.is_finite() && times_ok;
    Ok(VerdictLine {
        status: if ok { Status::Pass } else { Status::Fail },
        detail: format!("sum_bound={total} time_checks={times_ok} c={} levels={}", scheme.c, scheme.levels.len()),
    })
}

/// Verification modes of `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Envelope,
    Compare,
    Lil,
    Dyadic,
}

/// `verify <mode>`: CSV to `out`, verdict returned.
pub fn cmd_verify(cfg: &RunConfig, mode: VerifyMode, out: &mut dyn Write) -> Res<VerdictLine> {
    match mode {
        VerifyMode::Envelope => verify_envelope(cfg, out),
        VerifyMode::Compare => verify_compare(cfg, out),
        VerifyMode::Lil => verify_lil(cfg, out),
        VerifyMode::Dyadic => verify_dyadic(cfg, out),
    }
}

/// `catalogue`: closed forms of the standard cases on `times`.
pub fn cmd_catalogue(times: &[f64], out: &mut dyn Write) -> Res<()> {
    writeln!(out, "case,params,t,psi,psi_tilde")?;
    for case in CatalogueCase::standard() {
        let params: Vec<String> = case.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        for &t in times {
            if t <= case.min_time() {
                continue;
            }
            let (p, tilde) = match closed_form_rate(&case, t) {
                Ok(v) => v,
                Err(Error::DomainError { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            writeln!(out, "{},{},{},{},{}", case.name(), params.join(";"), num(t), num(p), tilde.map(num).unwrap_or_default())?;
        }
    }
    Ok(())
}

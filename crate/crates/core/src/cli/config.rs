//! Sectioned `key = value` configuration.
//!
//! ```text
//! # comment
//! [model]
//! family = power
//! alpha = 1
//! n = 3
//! ```
//!
//! Lists are comma separated. Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::profiles::{CatalogueCase, EnergyMode, ManifoldModel, RadialCoefficient, ORIGIN_FLOOR};

const SECTIONS: &[(&str, &[&str])] = &[
    ("model", &["family", "alpha", "beta", "radii", "values", "n", "mode", "case", "manifold", "curvature", "eps"]),
    ("solver", &["r_lo", "tolerance", "scale_c", "t_grid", "t_geom", "rate"]),
    (
        "simulation",
        &["drift", "sigma", "x0", "horizon", "dt", "n_paths", "seed", "floor", "barrier", "output"],
    ),
    (
        "verify",
        &[
            "c_grid",
            "eps_grid",
            "t0",
            "delta",
            "radius",
            "t",
            "dominating",
            "dominated",
            "lipschitz",
            "max_fraction",
            "check_at",
            "dyadic_c",
            "dyadic_levels",
            "mu_b1",
            "violation_sigmas",
        ],
    ),
];

/// A problem with the configuration text or its values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

/// Raw sections after syntax and key checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Ini {
    pub fn parse(text: &str) -> Res<Self> {
        let mut ini = Self::default();
        let mut current: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = no + 1;
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    return err(format!("line {at}: unterminated section header"));
                };
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return err(format!("line {at}: unknown section [{name}]"));
                }
                if ini.sections.contains_key(name) {
                    return err(format!("line {at}: section [{name}] appears twice"));
                }
                ini.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {at}: expected key = value"));
            };
            let Some(section) = current.as_ref() else {
                return err(format!("line {at}: key outside any section"));
            };
            let key = key.trim();
            let allowed = SECTIONS.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return err(format!("line {at}: unknown key '{key}' in [{section}]"));
            }
            let entries = ini.sections.get_mut(section).expect("section inserted");
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return err(format!("line {at}: key '{key}' repeated in [{section}]"));
            }
        }
        Ok(ini)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }
}

struct Section<'a> {
    ini: &'a Ini,
    name: &'static str,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.ini.get(self.name, key)
    }

    fn where_(&self, key: &str) -> String {
        format!("[{}] {key}", self.name)
    }

    fn f64(&self, key: &str) -> Res<Option<f64>> {
        self.raw(key)
            .map(|v| v.parse::<f64>().map_err(|_| ConfigError(format!("{}: '{v}' is not a number", self.where_(key)))))
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Res<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn need_f64(&self, key: &str) -> Res<f64> {
        self.f64(key)?.ok_or_else(|| ConfigError(format!("{} is required", self.where_(key))))
    }

    fn u64(&self, key: &str) -> Res<Option<u64>> {
        self.raw(key)
            .map(|v| v.parse::<u64>().map_err(|_| ConfigError(format!("{}: '{v}' is not a non-negative integer", self.where_(key)))))
            .transpose()
    }

    fn list(&self, key: &str) -> Res<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        if v.is_empty() {
            return Ok(Some(Vec::new()));
        }
        v.split(',')
            .map(|p| {
                let p = p.trim();
                p.parse::<f64>().map_err(|_| ConfigError(format!("{}: '{p}' is not a number", self.where_(key))))
            })
            .collect::<Res<Vec<_>>>()
            .map(Some)
    }

    fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(str::to_string)
    }
}

/// How the envelope for `verify envelope` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    Numeric,
    ClosedForm,
    Zero,
    Infinity,
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub coefficient: Option<RadialCoefficient>,
    pub n: Option<u32>,
    pub mode: EnergyMode,
    pub case: Option<CatalogueCase>,
    pub manifold: Option<ManifoldModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub r_lo: Option<f64>,
    pub tolerance: f64,
    pub scale_c: f64,
    pub t_grid: Vec<f64>,
    pub rate: RateSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Long,
    Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub drift: Option<String>,
    pub sigma: f64,
    pub x0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub floor: f64,
    pub barrier: Option<f64>,
    pub output: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub c_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub t0: f64,
    pub delta: Option<f64>,
    pub radius: Option<f64>,
    pub t: Option<f64>,
    pub dominating: Option<String>,
    pub dominated: Option<String>,
    pub lipschitz: Option<f64>,
    pub max_fraction: f64,
    pub check_at: Option<f64>,
    pub dyadic_c: f64,
    pub dyadic_levels: u32,
    pub mu_b1: Option<f64>,
    pub violation_sigmas: f64,
}

/// Typed view of a configuration file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    pub solver: SolverConfig,
    pub simulation: Option<SimulationConfig>,
    pub verify: VerifyConfig,
}

fn parse_coefficient(s: &Section<'_>) -> Res<Option<RadialCoefficient>> {
    let Some(family) = s.raw("family") else { return Ok(None) };
    let c = match family {
        "constant" => Ok(RadialCoefficient::Constant),
        "power" => RadialCoefficient::power(s.need_f64("alpha")?),
        "squared_log" => RadialCoefficient::squared_log(s.need_f64("beta")?),
        "tabulated" => {
            let radii = s.list("radii")?.ok_or_else(|| ConfigError("[model] radii is required".into()))?;
            let values = s.list("values")?.ok_or_else(|| ConfigError("[model] values is required".into()))?;
            RadialCoefficient::tabulated(radii, values)
        }
        other => return err(format!("[model] family: unknown family '{other}'")),
    };
    c.map(Some).map_err(|e| ConfigError(format!("[model] {e}")))
}

fn parse_case(s: &Section<'_>) -> Res<Option<CatalogueCase>> {
    let Some(name) = s.raw("case") else { return Ok(None) };
    let case = match name {
        "diri1" => CatalogueCase::Diri1,
        "diri2" => CatalogueCase::Diri2 { alpha: s.need_f64("alpha")? },
        "diri3" => CatalogueCase::Diri3 { beta: s.need_f64("beta")? },
        "geo1" => CatalogueCase::Geo1,
        "geo2" => CatalogueCase::Geo2 { alpha: s.need_f64("alpha")? },
        "geo3" => CatalogueCase::Geo3 { beta: s.need_f64("beta")? },
        "galpha" => CatalogueCase::GAlpha { alpha: s.need_f64("alpha")? },
        "hyperbolic_linear" => CatalogueCase::HyperbolicLinear {
            n: parse_dimension(s)?.ok_or_else(|| ConfigError("[model] n is required".into()))?,
            curvature: s.f64_or("curvature", 1.0)?,
            eps: s.f64_or("eps", 0.0)?,
        },
        other => return err(format!("[model] case: unknown case '{other}'")),
    };
    case.validate().map_err(|e| ConfigError(format!("[model] {e}")))?;
    Ok(Some(case))
}

fn parse_dimension(s: &Section<'_>) -> Res<Option<u32>> {
    match s.u64("n")? {
        None => Ok(None),
        Some(n) if (1..=u64::from(u32::MAX)).contains(&n) => Ok(Some(n as u32)),
        Some(n) => err(format!("[model] n: dimension {n} out of range")),
    }
}

fn parse_model(ini: &Ini) -> Res<Option<ModelConfig>> {
    if !ini.has_section("model") {
        return Ok(None);
    }
    let s = Section { ini, name: "model" };
    let mode = match s.raw("mode").unwrap_or("unit_energy") {
        "unit_energy" => EnergyMode::UnitEnergy,
        "coefficient_energy" => EnergyMode::CoefficientEnergy,
        other => return err(format!("[model] mode: unknown mode '{other}'")),
    };
    let n = parse_dimension(&s)?;
    let manifold = match s.raw("manifold") {
        None => None,
        Some(kind) => {
            let dim = n.ok_or_else(|| ConfigError("[model] n is required with manifold".into()))?;
            let m = match kind {
                "euclidean" => ManifoldModel::euclidean(dim),
                "hyperbolic" => ManifoldModel::hyperbolic(dim, s.f64_or("curvature", 1.0)?),
                other => return err(format!("[model] manifold: unknown manifold '{other}'")),
            };
            Some(m.map_err(|e| ConfigError(format!("[model] {e}")))?)
        }
    };
    Ok(Some(ModelConfig { coefficient: parse_coefficient(&s)?, n, mode, case: parse_case(&s)?, manifold }))
}

fn parse_solver(ini: &Ini) -> Res<SolverConfig> {
    let s = Section { ini, name: "solver" };
    let t_grid = match (s.list("t_grid")?, s.raw("t_geom")) {
        (Some(_), Some(_)) => return err("[solver] give t_grid or t_geom, not both"),
        (Some(g), None) => g,
        (None, Some(spec)) => geometric_grid(spec)?,
        (None, None) => Vec::new(),
    };
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return err("[solver] time grid must be positive, finite and strictly increasing");
    }
    let rate = match s.raw("rate").unwrap_or("numeric") {
        "numeric" => RateSource::Numeric,
        "closed_form" => RateSource::ClosedForm,
        "zero" => RateSource::Zero,
        "infinity" => RateSource::Infinity,
        other => return err(format!("[solver] rate: unknown source '{other}'")),
    };
    let cfg = SolverConfig {
        r_lo: s.f64("r_lo")?,
        tolerance: s.f64_or("tolerance", 1e-9)?,
        scale_c: s.f64_or("scale_c", 1.0)?,
        t_grid,
        rate,
    };
    if !(cfg.scale_c > 0.0 && cfg.scale_c.is_finite()) {
        return err("[solver] scale_c must be positive");
    }
    if !(cfg.tolerance > 0.0) {
        return err("[solver] tolerance must be positive");
    }
    Ok(cfg)
}

/// `start:end:count`, geometrically spaced, both ends included.
fn geometric_grid(spec: &str) -> Res<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || ConfigError(format!("[solver] t_geom: expected start:end:count, got '{spec}'"));
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(a > 0.0 && b > a) || n < 2 {
        return Err(bad());
    }
    let ratio = (b / a).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| if i + 1 == n { b } else { a * (ratio * i as f64).exp() }).collect())
}

fn parse_simulation(ini: &Ini) -> Res<Option<SimulationConfig>> {
    if !ini.has_section("simulation") {
        return Ok(None);
    }
    let s = Section { ini, name: "simulation" };
    let output = match s.raw("output").unwrap_or("long") {
        "long" => OutputFormat::Long,
        "summary" => OutputFormat::Summary,
        other => return err(format!("[simulation] output: unknown format '{other}'")),
    };
    let n_paths = s.u64("n_paths")?.unwrap_or(1);
    if n_paths == 0 {
        return err("[simulation] n_paths must be at least 1");
    }
    Ok(Some(SimulationConfig {
        drift: s.string("drift"),
        sigma: s.f64_or("sigma", SQRT_2)?,
        x0: s.f64_or("x0", 1.0)?,
        horizon: s.need_f64("horizon")?,
        dt: s.need_f64("dt")?,
        n_paths: usize::try_from(n_paths).map_err(|_| ConfigError("[simulation] n_paths too large".into()))?,
        seed: s.u64("seed")?.unwrap_or(0),
        floor: s.f64_or("floor", ORIGIN_FLOOR)?,
        barrier: s.f64("barrier")?,
        output,
    }))
}

fn parse_verify(ini: &Ini) -> Res<VerifyConfig> {
    let s = Section { ini, name: "verify" };
    let levels = s.u64("dyadic_levels")?.unwrap_or(30);
    Ok(VerifyConfig {
        c_grid: s.list("c_grid")?.unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]),
        eps_grid: s.list("eps_grid")?.unwrap_or_else(|| vec![0.0, 0.25, 0.5, 1.0]),
        t0: s.f64_or("t0", 10.0)?,
        delta: s.f64("delta")?,
        radius: s.f64("radius")?,
        t: s.f64("t")?,
        dominating: s.string("dominating"),
        dominated: s.string("dominated"),
        lipschitz: s.f64("lipschitz")?,
        max_fraction: s.f64_or("max_fraction", 0.5)?,
        check_at: s.f64("check_at")?,
        dyadic_c: s.f64_or("dyadic_c", 4.0)?,
        dyadic_levels: u32::try_from(levels).map_err(|_| ConfigError("[verify] dyadic_levels too large".into()))?,
        mu_b1: s.f64("mu_b1")?,
        violation_sigmas: s.f64_or("violation_sigmas", 2.0)?,
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Res<Self> {
        let ini = Ini::parse(text)?;
        Ok(Self {
            model: parse_model(&ini)?,
            solver: parse_solver(&ini)?,
            simulation: parse_simulation(&ini)?,
            verify: parse_verify(&ini)?,
        })
    }

    pub fn model(&self) -> Res<&ModelConfig> {
        self.model.as_ref().ok_or_else(|| ConfigError("[model] section is required".into()))
    }

    pub fn simulation(&self) -> Res<&SimulationConfig> {
        self.simulation.as_ref().ok_or_else(|| ConfigError("[simulation] section is required".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let cfg = RunConfig::parse(
            "# rate of a power coefficient\n[model]\nfamily = power\nalpha = 1 ; inline\nn = 3\n\n[solver]\nt_grid = 10, 100\n",
        )
        .unwrap();
        let m = cfg.model().unwrap();
        assert_eq!(m.coefficient, Some(RadialCoefficient::Power { alpha: 1.0 }));
        assert_eq!(m.n, Some(3));
        assert_eq!(cfg.solver.t_grid, vec![10.0, 100.0]);
        assert_eq!(cfg.solver.scale_c, 1.0);
        assert!(cfg.simulation.is_none());
        assert_eq!(cfg.verify.dyadic_levels, 30);
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert!(RunConfig::parse("[model]\ncolour = red\n").unwrap_err().0.contains("unknown key"));
        assert!(RunConfig::parse("[extras]\n").unwrap_err().0.contains("unknown section"));
        assert!(RunConfig::parse("family = power\n").is_err());
        assert!(RunConfig::parse("[model]\nn = 2\nn = 3\n").is_err());
    }

    #[test]
    fn geometric_grid_hits_both_ends() {
        let g = geometric_grid("10:1000:3").unwrap();
        assert_eq!(g[0], 10.0);
        assert!((g[1] - 100.0).abs() < 1e-12);
        assert_eq!(g[2], 1000.0);
        assert!(geometric_grid("10:1").is_err());
    }

    #[test]
    fn empty_grid_is_allowed() {
        let cfg = RunConfig::parse("[solver]\nt_grid =\n").unwrap();
        assert!(cfg.solver.t_grid.is_empty());
    }

    #[test]
    fn simulation_needs_horizon_and_step() {
        assert!(RunConfig::parse("[simulation]\ndt = 0.1\n").is_err());
        let cfg = RunConfig::parse("[simulation]\ndt = 0.1\nhorizon = 1\nbarrier = inf\n").unwrap();
        let s = cfg.simulation().unwrap();
        assert_eq!(s.barrier, Some(f64::INFINITY));
        assert_eq!(s.sigma, SQRT_2);
    }
}

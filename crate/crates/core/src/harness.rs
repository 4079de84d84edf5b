//! Experiment configuration and the commands behind the `tm-ode` binary.
//!
//! A configuration is a flat `key = value` text file (`#` starts a comment).
//! Presets are built-in configurations; command-line flags override both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cost::{self, CostFunction};
use crate::discrete::{nominal_parameters, run_discrete, time_per_iteration};
use crate::error::{Error, Result};
use crate::iqc::{iqc_sweep, iqc_sweep_csv, IqcOptions};
use crate::linalg;
use crate::ode::{integrate, IntegrateOptions, OdeModel, DEFAULT_DT_SQRT_L};
use crate::params::{log_grid, mu_bounds_csv, mu_bounds_sweep, tm_parameters};
use crate::rates::{
    alpha_robustness_csv, alpha_robustness_sweep, cost_bound_prefactor, p_star_tm, rate_sweep,
    rate_sweep_csv, verify_decay,
};
use crate::trajectory::{Algorithm, Mode, Trajectory};
use crate::{DoubleDouble, Real};

/// Names of the built-in presets.
pub const PRESETS: [&str; 6] = ["fig1", "fig2", "fig4", "fig5", "fig6a", "fig6b"];

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "tables = mu\nkappa_min = 1\nkappa_max = 1e6\nkappa_points = 200\nL = 1\n",
        "fig2" => {
            "tables = alpha\nkappa_min = 2\nkappa_max = 1e3\nkappa_points = 20\nL = 1\n\
             alpha_scales = 0.25,0.5,1,2\n"
        }
        "fig4" => "tables = rates\nkappa_min = 1.1\nkappa_max = 1e4\nkappa_points = 50\nL = 1\n",
        "fig5" => "iqc_m = 0.01,0.1,1\niqc_kappa = 2,5,10,50,100\niqc_tolerance = 1e-4\n",
        "fig6a" => {
            "cost = paper_example\nalgorithms = tm,nag,gd\nmodes = discrete,ode\n\
             iterations = 200\nx0 = 3\nscale = 1\nprecision = double_double\n"
        }
        "fig6b" => {
            "cost = paper_example\nalgorithms = tm,nag,gd\nmodes = discrete,ode\n\
             iterations = 200\nx0 = 3\nscale = 0.3\nprecision = double_double\n"
        }
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    PaperExample,
    Quadratic(Vec<f64>),
    Softplus { centers: Vec<f64>, m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F64,
    DoubleDouble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cost: CostSpec,
    pub algorithms: Vec<Algorithm>,
    pub modes: Vec<Mode>,
    /// Override of the strong-convexity constant used for the parameters.
    pub m: Option<f64>,
    /// Override of the Lipschitz constant used for the parameters.
    pub l: Option<f64>,
    pub stepsize_scale: f64,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub iterations: usize,
    pub sample_every: usize,
    pub x0: Vec<f64>,
    pub out: PathBuf,
    pub seed: u64,
    pub precision: Precision,
    pub tables: Vec<String>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_points: usize,
    pub rates_l: f64,
    pub alpha_scales: Vec<f64>,
    pub iqc_m: Vec<f64>,
    pub iqc_kappa: Vec<f64>,
    pub iqc_tolerance: f64,
    pub rate_multiplier: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cost: CostSpec::PaperExample,
            algorithms: Algorithm::ALL.to_vec(),
            modes: vec![Mode::Discrete, Mode::Ode],
            m: None,
            l: None,
            stepsize_scale: 1.0,
            dt: None,
            t_end: None,
            iterations: 200,
            sample_every: 1,
            x0: vec![3.0],
            out: PathBuf::from("out"),
            seed: 0,
            precision: Precision::F64,
            tables: vec!["mu".into(), "rates".into(), "alpha".into()],
            kappa_min: 1.0,
            kappa_max: 1e4,
            kappa_points: 50,
            rates_l: 1.0,
            alpha_scales: vec![0.25, 0.5, 1.0, 2.0],
            iqc_m: vec![0.01, 0.1, 1.0],
            iqc_kappa: vec![2.0, 5.0, 10.0, 50.0, 100.0],
            iqc_tolerance: 1e-4,
            rate_multiplier: 1.0,
        }
    }
}

fn config_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|e| config_err(key, format!("`{v}` is not a number ({e})")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(key, s)).collect()
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|e| config_err(key, format!("`{v}` is not a count ({e})")))
}

/// Parses `key = value` lines into a map; later keys win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(&format!("line {}", n + 1), "expected `key = value`"))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let text = preset_text(name).ok_or_else(|| {
            config_err("preset", format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))
        })?;
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(&fs::read_to_string(path)?)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let pairs = parse_pairs(text)?;
        let mut cost_name: Option<String> = None;
        let mut diag: Option<Vec<f64>> = None;
        let mut centers: Option<Vec<f64>> = None;
        let mut reg: Option<f64> = None;
        for (k, v) in &pairs {
            match k.as_str() {
                "cost" => cost_name = Some(v.clone()),
                "diag" => diag = Some(parse_list(k, v)?),
                "centers" => centers = Some(parse_list(k, v)?),
                "regularization" => reg = Some(parse_f64(k, v)?),
                _ => self.set(k, v)?,
            }
        }
        if let Some(name) = cost_name {
            self.cost = match name.as_str() {
                "paper_example" => CostSpec::PaperExample,
                "quadratic" => CostSpec::Quadratic(
                    diag.ok_or_else(|| config_err("diag", "quadratic cost needs `diag`"))?,
                ),
                "softplus" => CostSpec::Softplus {
                    centers: centers.unwrap_or_else(|| vec![1.0]),
                    m: reg.unwrap_or(0.1),
                },
                other => return Err(config_err("cost", format!("unknown cost `{other}`"))),
            };
        } else if let Some(d) = diag {
            self.cost = CostSpec::Quadratic(d);
        }
        self.validate()
    }

    /// Sets one key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "algorithms" => {
                self.algorithms = v
                    .split(',')
                    .map(|s| s.parse().map_err(|e: Error| config_err(key, e.to_string())))
                    .collect::<Result<_>>()?
            }
            "modes" => {
                self.modes = v
                    .split(',')
                    .map(|s| match s.trim() {
                        "discrete" => Ok(Mode::Discrete),
                        "ode" => Ok(Mode::Ode),
                        o => Err(config_err(key, format!("unknown mode `{o}`"))),
                    })
                    .collect::<Result<_>>()?
            }
            "M" | "m" => self.m = Some(parse_f64(key, v)?),
            "L" | "l" => {
                let l = parse_f64(key, v)?;
                self.l = Some(l);
                self.rates_l = l;
            }
            "scale" | "stepsize_scale" => self.stepsize_scale = parse_f64(key, v)?,
            "dt" => self.dt = Some(parse_f64(key, v)?),
            "t_end" => self.t_end = Some(parse_f64(key, v)?),
            "iterations" => self.iterations = parse_usize(key, v)?,
            "sample_every" => self.sample_every = parse_usize(key, v)?,
            "x0" | "y0" => self.x0 = parse_list(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "seed" => {
                self.seed = v
                    .trim()
                    .parse()
                    .map_err(|_| config_err(key, format!("`{v}` is not a seed")))?
            }
            "precision" => {
                self.precision = match v {
                    "f64" => Precision::F64,
                    "double_double" | "dd" => Precision::DoubleDouble,
                    o => return Err(config_err(key, format!("unknown precision `{o}`"))),
                }
            }
            "tables" => self.tables = v.split(',').map(|s| s.trim().to_string()).collect(),
            "kappa_min" => self.kappa_min = parse_f64(key, v)?,
            "kappa_max" => self.kappa_max = parse_f64(key, v)?,
            "kappa_points" => self.kappa_points = parse_usize(key, v)?,
            "alpha_scales" => self.alpha_scales = parse_list(key, v)?,
            "iqc_m" => self.iqc_m = parse_list(key, v)?,
            "iqc_kappa" => self.iqc_kappa = parse_list(key, v)?,
            "iqc_tolerance" => self.iqc_tolerance = parse_f64(key, v)?,
            "rate_multiplier" => self.rate_multiplier = parse_f64(key, v)?,
            other => return Err(config_err(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stepsize_scale > 0.0 && self.stepsize_scale <= 1.0) {
            return Err(config_err("scale", "must lie in (0, 1]"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(config_err("dt", "must be positive"));
            }
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0) {
                return Err(config_err("t_end", "must be nonnegative"));
            }
        }
        if self.sample_every == 0 {
            return Err(config_err("sample_every", "must be positive"));
        }
        if self.x0.is_empty() {
            return Err(config_err("x0", "must not be empty"));
        }
        if !(self.iqc_tolerance > 0.0) {
            return Err(config_err("iqc_tolerance", "must be positive"));
        }
        if !(self.rate_multiplier > 0.0) {
            return Err(config_err("rate_multiplier", "must be positive"));
        }
        for t in &self.tables {
            if !["mu", "rates", "alpha"].contains(&t.as_str()) {
                return Err(config_err("tables", format!("unknown table `{t}`")));
            }
        }
        Ok(())
    }

    pub fn build_cost<R: Real>(&self) -> Result<CostFunction<R>> {
        let f = match &self.cost {
            CostSpec::PaperExample => cost::paper_example_cost_in::<R>(),
            CostSpec::Quadratic(d) => cost::quadratic_cost_in::<R>(d)?,
            CostSpec::Softplus { centers, m } => cost::softplus_cost_in::<R>(centers, *m)?,
        };
        if self.x0.len() != f.dimension() {
            return Err(config_err(
                "x0",
                format!("has {} entries, cost dimension is {}", self.x0.len(), f.dimension()),
            ));
        }
        Ok(f)
    }

    /// `(M, L)` used for the algorithm parameters.
    pub fn constants<R: Real>(&self, f: &CostFunction<R>) -> (f64, f64) {
        (self.m.unwrap_or(f.m()), self.l.unwrap_or(f.l()))
    }
}

/// Files written by a command and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandReport {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub message: String,
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, contents)?;
    files.push(p);
    Ok(())
}

/// Runs the configured discrete iterations and flows.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<Trajectory>> {
    match cfg.precision {
        Precision::F64 => simulate_in::<f64>(cfg),
        Precision::DoubleDouble => simulate_in::<DoubleDouble>(cfg),
    }
}

fn simulate_in<R: Real>(cfg: &ExperimentConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let f = cfg.build_cost::<R>()?;
    let (m, l) = cfg.constants(&f);
    let x0: Vec<R> = linalg::from_f64_vec(&cfg.x0);
    let scale = cfg.stepsize_scale;
    let tm = tm_parameters(m, l)?.with_alpha_scaled(scale)?;
    let horizon = cfg
        .t_end
        .unwrap_or(cfg.iterations as f64 * time_per_iteration(Algorithm::Tm, tm.alpha));
    let dt = cfg.dt.unwrap_or(DEFAULT_DT_SQRT_L / l.sqrt());
    let mut out = Vec::new();
    for &alg in &cfg.algorithms {
        for &mode in &cfg.modes {
            let tr = match mode {
                Mode::Discrete => {
                    let p = nominal_parameters(alg, m, l)?;
                    run_discrete(alg, &f, &p, &x0, cfg.iterations, scale)?
                }
                Mode::Ode => {
                    let model = match alg {
                        Algorithm::Tm => OdeModel::tm_high_res(&tm),
                        Algorithm::Nag => OdeModel::nag_high_res(m, scale / l)?,
                        Algorithm::Gd => OdeModel::gradient_flow(),
                    };
                    let init = model.rest_initial_state(&f, &x0)?;
                    let opts = IntegrateOptions::new(l, horizon)
                        .dt(dt)
                        .sample_every(cfg.sample_every)
                        .lyapunov(model.lyapunov.is_some());
                    integrate(&model, &f, &init, opts)?
                }
            };
            out.push(tr);
        }
    }
    Ok(out)
}

/// Long-format table `algorithm,mode,t,f_error`.
pub fn combined_csv(trajectories: &[Trajectory]) -> String {
    let mut s = String::from("algorithm,mode,t,f_error\n");
    for tr in trajectories {
        for p in &tr.samples {
            let _ = writeln!(s, "{},{},{:.16e},{:.16e}", tr.algorithm, tr.mode, p.t, p.f_error);
        }
    }
    s
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<CommandReport> {
    let trajs = simulate(cfg)?;
    let mut files = Vec::new();
    let mut msg = String::new();
    for tr in &trajs {
        let name = format!("{}_{}.csv", tr.algorithm, tr.mode);
        write_file(&cfg.out, &name, &tr.to_csv(), &mut files)?;
        if let Some(e) = tr.final_error() {
            let _ = writeln!(msg, "{} {}: final f_error {:.6e}", tr.algorithm, tr.mode, e);
        }
    }
    write_file(&cfg.out, "combined.csv", &combined_csv(&trajs), &mut files)?;
    Ok(CommandReport {
        files,
        passed: true,
        message: msg,
    })
}

pub fn cmd_rates(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let grid = log_grid(cfg.kappa_min, cfg.kappa_max, cfg.kappa_points)?;
    let l = cfg.rates_l;
    let mut files = Vec::new();
    for t in &cfg.tables {
        match t.as_str() {
            "mu" => write_file(&cfg.out, "mu_bounds.csv", &mu_bounds_csv(&mu_bounds_sweep(&grid, l)?), &mut files)?,
            "rates" => write_file(&cfg.out, "rate_sweep.csv", &rate_sweep_csv(&rate_sweep(&grid, l)?), &mut files)?,
            "alpha" => write_file(
                &cfg.out,
                "alpha_sweep.csv",
                &alpha_robustness_csv(&alpha_robustness_sweep(&grid, l, &cfg.alpha_scales)?),
                &mut files,
            )?,
            _ => unreachable!("validated"),
        }
    }
    Ok(CommandReport {
        files,
        passed: true,
        message: format!("{} grid points\n", grid.len()),
    })
}

pub fn cmd_iqc(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let opts = IqcOptions {
        tolerance: cfg.iqc_tolerance,
        seed: cfg.seed,
        ..IqcOptions::default()
    };
    let rows = iqc_sweep(&cfg.iqc_m, &cfg.iqc_kappa, opts)?;
    let certified = rows.iter().filter(|r| r.outcome.certificate().is_some()).count();
    let mut files = Vec::new();
    write_file(&cfg.out, "iqc_sweep.csv", &iqc_sweep_csv(&rows), &mut files)?;
    Ok(CommandReport {
        files,
        passed: true,
        message: format!("{certified} of {} grid points certified\n", rows.len()),
    })
}

/// Integrates the triple momentum flow from rest at `x0` and checks the
/// Lyapunov decay at `rate_multiplier · p*`.
pub fn cmd_certify(cfg: &ExperimentConfig) -> Result<CommandReport> {
    cfg.validate()?;
    let f = cfg.build_cost::<f64>()?;
    let (m, l) = cfg.constants(&f);
    let params = tm_parameters(m, l)?;
    let cert = p_star_tm(&params)?;
    let cert = cert.with_rate(cert.rate * cfg.rate_multiplier);
    let model = OdeModel::tm_high_res(&params);
    let init = model.rest_initial_state(&f, &cfg.x0)?;
    let t_end = cfg.t_end.unwrap_or(200.0 / l.sqrt());
    let dt = cfg.dt.unwrap_or(DEFAULT_DT_SQRT_L / l.sqrt());
    let opts = IntegrateOptions::new(l, t_end)
        .dt(dt)
        .sample_every(cfg.sample_every)
        .lyapunov(true);
    let tr = integrate(&model, &f, &init, opts)?;
    let xs = f.minimizer().expect("built-in costs know their minimizer");
    let dist2 = linalg::norm(&linalg::sub(&cfg.x0, xs)).powi(2);
    let report = verify_decay(&tr, &cert, Some((cost_bound_prefactor(&params), dist2)))?;
    let mut text = format!(
        "cost: {}\nM: {m}\nL: {l}\nrate_multiplier: {}\n",
        f.name(),
        cfg.rate_multiplier
    );
    text.push_str(&report.summary());
    let mut files = Vec::new();
    write_file(&cfg.out, "certify_report.txt", &text, &mut files)?;
    write_file(&cfg.out, "certify_trajectory.csv", &tr.to_csv(), &mut files)?;
    Ok(CommandReport {
        files,
        passed: report.passed(),
        message: text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for p in PRESETS {
            ExperimentConfig::preset(p).unwrap();
        }
        assert!(ExperimentConfig::preset("fig3").is_err());
        let c = ExperimentConfig::preset("fig6b").unwrap();
        assert_eq!(c.stepsize_scale, 0.3);
        assert_eq!(c.precision, Precision::DoubleDouble);
    }

    #[test]
    fn config_errors_name_the_key() {
        let mut c = ExperimentConfig::default();
        match c.apply_text("iterations = many") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "iterations"),
            other => panic!("{other:?}"),
        }
        match c.apply_text("bogus = 1") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "bogus"),
            other => panic!("{other:?}"),
        }
        assert!(c.apply_text("scale = 1.5").is_err());
        assert!(c.apply_text("no equals sign").is_err());
    }

    #[test]
    fn quadratic_config() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# comment\ncost = quadratic\ndiag = 1, 10\nx0 = 1,1\n").unwrap();
        assert_eq!(c.cost, CostSpec::Quadratic(vec![1.0, 10.0]));
        let f = c.build_cost::<f64>().unwrap();
        assert_eq!(f.l(), 10.0);
        c.x0 = vec![1.0];
        assert!(c.build_cost::<f64>().is_err());
    }

    #[test]
    fn zero_iterations_and_horizon() {
        let mut c = ExperimentConfig::default();
        c.iterations = 0;
        c.t_end = Some(0.0);
        let trs = simulate(&c).unwrap();
        assert_eq!(trs.len(), 6);
        assert!(trs.iter().all(|t| t.len() == 1));
    }
}

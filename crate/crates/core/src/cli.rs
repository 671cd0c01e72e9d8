//! Run configuration and command dispatch for the `predprey` binary.
//!
//! Configurations are TOML documents:
//!
//! ```toml
//! [grid]
//! n = 200
//!
//! [prey]
//! boundary = { lo = { robin = 0.0 }, hi = { robin = 0.0 } }
//!
//! [predator]
//! boundary = { lo = "dirichlet", hi = "dirichlet" }
//!
//! [coefficients]
//! a = { constant = 1.0 }
//! b = { sum = [{ bump = { center = 0.3, width = 0.2, height = 1.0, floor = 0.0 } }, { constant = 0.2 }] }
//! c = { constant = 1.0 }
//! d = { constant = 1.0 }
//! m = { bump = { center = 0.7, width = 0.2, height = 1.0, floor = 0.0 } }
//!
//! [parameters]
//! mu = 1.0
//! eps_list = [1e-3, 1e-2]
//! lambda_range = { lo = 0.3, hi = 0.5, count = 21 }
//!
//! [continuation]
//! compute_morse = true
//!
//! [output]
//! path = "out"
//! write_states = false
//! ```
//!
//! The `[example_section6]` table (`a`, `b`, `c`, `d`, `mu`) replaces
//! `[prey]`, `[predator]` and `[coefficients]` with constant coefficients,
//! Neumann conditions and `m ≡ 1`; `[grid]` is then optional.

use crate::coexistence::{newton_solve, SteadyState};
use crate::continuation::{
    coexistence_branch, count_states_at, crandall_rabinowitz_tangent, scalar_branch_eps0, Branch, ContinuationConfig,
};
use crate::curves::{capital_phi, phi_eps, phi_zero, psi_eps, psi_zero, wedge_scan};
use crate::error::{Error, Result};
use crate::grid::{BoundarySpec, CoefficientSpec};
use crate::io::{fmt_f64, node_table, write_branch, write_branch_states};
use crate::linalg::norm_inf;
use crate::model::{Model, ModelSpec, OperatorSpec};
use crate::oracle::{constant_states, ConstParams};
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const DEFAULT_PRESET_N: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    #[serde(default)]
    pub x_lo: f64,
    #[serde(default = "one")]
    pub x_hi: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
    pub d: CoefficientSpec,
    pub m: CoefficientSpec,
}

/// Uniform sample `lo, …, hi` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        (0..self.count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 || !self.lo.is_finite() || !self.hi.is_finite() || (self.count > 1 && self.lo >= self.hi) {
            return Err(Error::Config(format!(
                "{name}: need finite lo < hi and count ≥ 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub lambda: Option<f64>,
    pub lambda_range: Option<Range>,
    pub mu: Option<f64>,
    pub mu_range: Option<Range>,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    /// Per-node `x,w,v` files for every branch point.
    #[serde(default)]
    pub write_states: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    example_section6: Option<ConstParams>,
    grid: Option<GridSection>,
    prey: Option<OperatorSpec>,
    predator: Option<OperatorSpec>,
    coefficients: Option<Coefficients>,
    #[serde(default)]
    parameters: Parameters,
    #[serde(default)]
    continuation: ContinuationConfig,
    #[serde(default)]
    output: OutputSection,
}

/// A validated configuration with its assembled model.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub model: Model,
    pub parameters: Parameters,
    pub continuation: ContinuationConfig,
    pub output: OutputSection,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
    let mut parameters = raw.parameters;
    let spec = match raw.example_section6 {
        Some(p) => {
            if raw.prey.is_some() || raw.predator.is_some() || raw.coefficients.is_some() {
                return Err(Error::Config(
                    "example_section6 fixes prey, predator and coefficients; remove those tables".into(),
                ));
            }
            p.validate()
                .map_err(|e| Error::Config(format!("example_section6: {e}")))?;
            if parameters.mu.is_some_and(|mu| mu != p.mu) {
                return Err(Error::Config("parameters.mu disagrees with example_section6.mu".into()));
            }
            parameters.mu = Some(p.mu);
            let g = raw.grid.unwrap_or(GridSection {
                n: DEFAULT_PRESET_N,
                x_lo: 0.0,
                x_hi: 1.0,
            });
            let mut spec = ModelSpec::constant_neumann(g.n, p.a, p.b, p.c, p.d);
            spec.x_lo = g.x_lo;
            spec.x_hi = g.x_hi;
            spec
        }
        None => {
            let missing = |what: &str| Error::Config(format!("missing required table `{what}`"));
            let g = raw.grid.ok_or_else(|| missing("grid"))?;
            let co = raw.coefficients.ok_or_else(|| missing("coefficients"))?;
            ModelSpec {
                n: g.n,
                x_lo: g.x_lo,
                x_hi: g.x_hi,
                prey: raw.prey.ok_or_else(|| missing("prey"))?,
                predator: raw.predator.ok_or_else(|| missing("predator"))?,
                a: co.a,
                b: co.b,
                c: co.c,
                d: co.d,
                m: co.m,
            }
        }
    };
    validate_parameters(&parameters, &raw.continuation)?;
    let model = spec.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(RunConfig {
        spec,
        model,
        parameters,
        continuation: raw.continuation,
        output: raw.output,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn validate_parameters(p: &Parameters, c: &ContinuationConfig) -> Result<()> {
    let finite = |name: &str, v: Option<f64>| match v {
        Some(x) if !x.is_finite() => Err(Error::Config(format!("{name} must be finite"))),
        _ => Ok(()),
    };
    finite("parameters.lambda", p.lambda)?;
    finite("parameters.mu", p.mu)?;
    for (name, r) in [
        ("parameters.lambda_range", p.lambda_range),
        ("parameters.mu_range", p.mu_range),
    ] {
        if let Some(r) = r {
            r.validate(name)?;
        }
    }
    let eps = p.eps.iter().chain(p.eps_list.iter().flatten());
    for e in eps {
        if !(*e >= 0.0 && e.is_finite()) {
            return Err(Error::Config(format!("ε must be nonnegative, got {e}")));
        }
    }
    if !(c.ds0 > 0.0 && c.step_min > 0.0 && c.step_min <= c.ds0 && c.ds_max_rel > 0.0 && c.arclength_tol > 0.0) {
        return Err(Error::Config(
            "continuation: need 0 < step_min ≤ ds0 and positive tolerances".into(),
        ));
    }
    if !(c.min_tangent_cos > -1.0 && c.min_tangent_cos < 1.0) {
        return Err(Error::Config("continuation.min_tangent_cos must lie in (-1, 1)".into()));
    }
    Ok(())
}

impl RunConfig {
    pub fn mu(&self) -> Result<f64> {
        self.parameters
            .mu
            .ok_or_else(|| Error::Config("parameters.mu is required for this command".into()))
    }

    /// `eps_list` if given, otherwise `[eps]`.
    pub fn eps_values(&self) -> Result<Vec<f64>> {
        match (&self.parameters.eps_list, self.parameters.eps) {
            (Some(l), _) if !l.is_empty() => Ok(l.clone()),
            (_, Some(e)) => Ok(vec![e]),
            _ => Err(Error::Config(
                "parameters.eps or parameters.eps_list is required".into(),
            )),
        }
    }

    /// `lambda_range` samples if given, otherwise `[lambda]`.
    pub fn lambda_values(&self) -> Result<Vec<f64>> {
        match (self.parameters.lambda_range, self.parameters.lambda) {
            (Some(r), _) => Ok(r.values()),
            (None, Some(l)) => Ok(vec![l]),
            _ => Err(Error::Config(
                "parameters.lambda or parameters.lambda_range is required".into(),
            )),
        }
    }

    /// Constant-coefficient parameters, when the model is the spatially
    /// homogeneous Neumann problem with `m ≡ 1`.
    pub fn const_params(&self) -> Result<ConstParams> {
        let constant = |s: &CoefficientSpec| match s {
            CoefficientSpec::Constant(v) => Some(*v),
            _ => None,
        };
        let homogeneous = |op: &OperatorSpec| {
            constant(&op.diffusion).is_some()
                && constant(&op.drift) == Some(0.0)
                && constant(&op.potential) == Some(0.0)
                && op.boundary == BoundarySpec::neumann()
        };
        let s = &self.spec;
        let vals = (
            constant(&s.a),
            constant(&s.b),
            constant(&s.c),
            constant(&s.d),
            constant(&s.m),
        );
        match vals {
            (Some(a), Some(b), Some(c), Some(d), Some(m))
                if m > 0.0 && homogeneous(&s.prey) && homogeneous(&s.predator) =>
            {
                ConstParams::new(a, b, c, d, self.mu()?).map_err(|e| Error::Config(e.to_string()))
            }
            _ => Err(Error::Config(
                "this command needs constant a, b, c, d, m > 0 with Neumann conditions and no drift or potential"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eigen,
    Theta,
    Curves,
    Wedge,
    Tangent,
    Branch,
    ScalarBranch,
    Oracle,
    Compare,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Eigen,
        Command::Theta,
        Command::Curves,
        Command::Wedge,
        Command::Tangent,
        Command::Branch,
        Command::ScalarBranch,
        Command::Oracle,
        Command::Compare,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Theta => "theta",
            Command::Curves => "curves",
            Command::Wedge => "wedge",
            Command::Tangent => "tangent",
            Command::Branch => "branch",
            Command::ScalarBranch => "scalar-branch",
            Command::Oracle => "oracle",
            Command::Compare => "compare",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Failure of a CLI run, split by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(Error),
    Solver { context: String, source: Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver { .. } => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Solver { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => RunError::Config(e),
            other => RunError::Solver {
                context: "run".into(),
                source: other,
            },
        }
    }
}

trait Context<T> {
    fn context(self, what: &str) -> std::result::Result<T, RunError>;
}

impl<T> Context<T> for Result<T> {
    fn context(self, what: &str) -> std::result::Result<T, RunError> {
        self.map_err(|e| match e {
            Error::Config(_) => RunError::Config(e),
            other => RunError::Solver {
                context: what.to_owned(),
                source: other,
            },
        })
    }
}

/// Summary printed on success; data files land in `out`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

struct Out<'a> {
    dir: &'a Path,
    report: Report,
}

impl Out<'_> {
    fn write(&mut self, name: &str, text: &str) -> std::result::Result<PathBuf, RunError> {
        let path = self.dir.join(name);
        fs::write(&path, text)
            .map_err(Error::from)
            .context(&format!("writing {}", path.display()))?;
        self.report.files.push(path.clone());
        Ok(path)
    }

    fn say(&mut self, line: String) {
        self.report.lines.push(line);
    }
}

fn opt(x: Option<f64>) -> String {
    fmt_f64(x.unwrap_or(f64::NAN))
}

pub fn run_command(cmd: Command, cfg: &RunConfig, out: &Path) -> std::result::Result<Report, RunError> {
    fs::create_dir_all(out)
        .map_err(Error::from)
        .context(&format!("creating {}", out.display()))?;
    let mut o = Out {
        dir: out,
        report: Report::default(),
    };
    match cmd {
        Command::Eigen => run_eigen(cfg, &mut o)?,
        Command::Theta => run_theta(cfg, &mut o)?,
        Command::Curves => run_curves(cfg, &mut o)?,
        Command::Wedge => run_wedge(cfg, &mut o)?,
        Command::Tangent => run_tangent(cfg, &mut o)?,
        Command::Branch => run_branch(cfg, &mut o)?,
        Command::ScalarBranch => run_scalar_branch(cfg, &mut o)?,
        Command::Oracle => run_oracle(cfg, &mut o)?,
        Command::Compare => run_compare(cfg, &mut o)?,
    }
    Ok(o.report)
}

fn run_eigen(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let m = &cfg.model;
    o.say(format!("sigma0(L1) = {}", fmt_f64(m.sigma01())));
    o.say(format!("sigma0(L2) = {}", fmt_f64(m.sigma02())));
    let text = node_table(m.grid(), &["phi1", "phi2"], &[&m.eigen1().phi, &m.eigen2().phi]);
    o.write("eigen.csv", &text)?;
    Ok(())
}

fn run_theta(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let m = &cfg.model;
    let mu = cfg.mu()?;
    let theta2 = m.semitrivial_predator(mu).context("theta2")?;
    o.say(format!("max theta2 = {}", fmt_f64(norm_inf(&theta2.z))));
    let mut names = vec!["theta2"];
    let mut cols: Vec<Vec<f64>> = vec![theta2.z];
    if let (Some(lambda), Some(eps)) = (cfg.parameters.lambda, cfg.parameters.eps) {
        if eps > 0.0 {
            let theta1 = m.semitrivial_prey(lambda, eps).context("theta1")?;
            o.say(format!("max theta1 = {}", fmt_f64(norm_inf(&theta1.z))));
            names.push("theta1");
            cols.push(theta1.z);
        }
    }
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    o.write("theta.csv", &node_table(m.grid(), &names, &refs))?;
    Ok(())
}

fn run_curves(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let m = &cfg.model;
    let eps = cfg.parameters.eps;
    let mus = match cfg.parameters.mu_range {
        Some(r) => r.values(),
        None => vec![cfg.mu()?],
    };
    let rows: Vec<String> = mus
        .par_iter()
        .map(|&mu| {
            let pe = eps.and_then(|e| phi_eps(mu, e, m).ok());
            format!(
                "{},{},{},{}\n",
                fmt_f64(mu),
                opt(capital_phi(mu, m).ok()),
                opt(phi_zero(mu, m).ok()),
                opt(pe)
            )
        })
        .collect();
    o.write(
        "curves_mu.csv",
        &(String::from("mu,capital_phi,phi_zero,phi_eps\n") + &rows.concat()),
    )?;
    o.say(format!("{} mu samples", mus.len()));
    if let Some(r) = cfg.parameters.lambda_range {
        let rows: Vec<String> = r
            .values()
            .par_iter()
            .map(|&l| {
                let pe = eps.and_then(|e| psi_eps(l, e, m).ok());
                format!("{},{},{}\n", fmt_f64(l), opt(pe), opt(psi_zero(l, m).ok()))
            })
            .collect();
        o.write(
            "curves_lambda.csv",
            &(String::from("lambda,psi_eps,psi_zero\n") + &rows.concat()),
        )?;
        o.say(format!("{} lambda samples", r.count));
    }
    Ok(())
}

fn run_wedge(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let p = &cfg.parameters;
    let (lr, mr) = match (p.lambda_range, p.mu_range) {
        (Some(l), Some(m)) => (l, m),
        _ => {
            return Err(RunError::Config(Error::Config(
                "wedge needs lambda_range and mu_range".into(),
            )))
        }
    };
    let eps = p
        .eps
        .ok_or_else(|| RunError::Config(Error::Config("wedge needs parameters.eps".into())))?;
    let pts = wedge_scan((lr.lo, lr.hi), (mr.lo, mr.hi), eps, &cfg.model, (lr.count, mr.count)).context("wedge")?;
    let mut text = String::from("lambda,mu,region\n");
    for q in &pts {
        let _ = writeln!(text, "{},{},{}", fmt_f64(q.lambda), fmt_f64(q.mu), q.region.as_str());
    }
    o.write("wedge.csv", &text)?;
    o.say(format!("{} points classified", pts.len()));
    Ok(())
}

fn run_tangent(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let mu = cfg.mu()?;
    let mut text = String::from("eps,capital_phi,lambda_prime\n");
    for eps in cfg.eps_values()? {
        let td = crandall_rabinowitz_tangent(mu, eps, &cfg.model).context(&format!("tangent at eps = {eps}"))?;
        let _ = writeln!(
            text,
            "{},{},{}",
            fmt_f64(eps),
            fmt_f64(td.capital_phi),
            fmt_f64(td.lambda_prime)
        );
        let kind = if td.lambda_prime < 0.0 {
            "subcritical"
        } else {
            "supercritical"
        };
        o.say(format!("eps = {eps}: lambda'(eps) = {:.10e} ({kind})", td.lambda_prime));
    }
    o.write("tangent.csv", &text)?;
    Ok(())
}

fn branch_summary(o: &mut Out, label: &str, b: &Branch) {
    let folds: Vec<String> = b.folds.iter().map(|f| format!("{f:.10}")).collect();
    o.say(format!(
        "{label}: {} points, terminated by {}, folds [{}]",
        b.points.len() + b.negative.len(),
        b.termination.as_str(),
        folds.join(", ")
    ));
}

fn save_branch(cfg: &RunConfig, o: &mut Out, name: &str, b: &Branch) -> std::result::Result<(), RunError> {
    let path = o.dir.join(format!("{name}.csv"));
    write_branch(&path, b).context(&format!("writing {}", path.display()))?;
    o.report.files.push(path);
    if cfg.output.write_states {
        let dir = o.dir.join(format!("{name}_states"));
        write_branch_states(&dir, "point", b, cfg.model.grid()).context("writing states")?;
    }
    Ok(())
}

fn fold_table(branches: &[(f64, &Branch)]) -> String {
    let mut text = String::from("eps,fold_lambda\n");
    for (eps, b) in branches {
        for f in &b.folds {
            let _ = writeln!(text, "{},{}", fmt_f64(*eps), fmt_f64(*f));
        }
    }
    text
}

fn run_branch(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let mu = cfg.mu()?;
    let eps = cfg.eps_values()?;
    let branches: Vec<std::result::Result<Branch, RunError>> = eps
        .par_iter()
        .map(|&e| coexistence_branch(mu, e, &cfg.continuation, &cfg.model).context(&format!("branch at eps = {e}")))
        .collect();
    let mut done = Vec::new();
    for (k, (e, b)) in eps.iter().zip(branches).enumerate() {
        let b = b?;
        let name = if eps.len() == 1 {
            "branch".to_owned()
        } else {
            format!("branch_{k}")
        };
        save_branch(cfg, o, &name, &b)?;
        branch_summary(o, &format!("eps = {e}"), &b);
        done.push((*e, b));
    }
    let refs: Vec<(f64, &Branch)> = done.iter().map(|(e, b)| (*e, b)).collect();
    o.write("folds.csv", &fold_table(&refs))?;
    Ok(())
}

fn run_scalar_branch(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let mu = cfg.mu()?;
    let b = scalar_branch_eps0(mu, &cfg.continuation, &cfg.model).context("scalar branch")?;
    save_branch(cfg, o, "scalar_branch", &b)?;
    branch_summary(o, "eps = 0", &b);
    o.write("folds.csv", &fold_table(&[(0.0, &b)]))?;
    Ok(())
}

fn run_oracle(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let p = cfg.const_params()?;
    let lambdas = cfg.lambda_values()?;
    let eps = cfg.eps_values()?;
    let mut text = String::from("lambda,eps,regime,count,w_1,v_1,w_2,v_2,w_3,v_3\n");
    for &e in &eps {
        for &l in &lambdas {
            let r = constant_states(l, e, &p).context("oracle")?;
            let _ = write!(
                text,
                "{},{},{},{}",
                fmt_f64(l),
                fmt_f64(e),
                format!("{:?}", r.regime).to_lowercase(),
                r.states.len()
            );
            for k in 0..3 {
                let (w, v) = r.states.get(k).copied().unwrap_or((f64::NAN, f64::NAN));
                let _ = write!(text, ",{},{}", fmt_f64(w), fmt_f64(v));
            }
            text.push('\n');
        }
    }
    o.write("oracle.csv", &text)?;
    o.say(format!(
        "Phi(mu) = {}, eps* = {}, {} x {} grid",
        fmt_f64(p.capital_phi()),
        fmt_f64(p.eps_star()),
        lambdas.len(),
        eps.len()
    ));
    Ok(())
}

/// PDE Newton solves started from a 1% spatial perturbation of each oracle
/// state, with the largest nodal deviation in `w` and `v`.
pub fn compare_at(
    lambda: f64,
    eps: f64,
    p: &ConstParams,
    model: &Model,
) -> Result<(usize, Vec<SteadyState>, f64, f64)> {
    let r = constant_states(lambda, eps, p)?;
    let n = model.grid().len();
    let mut states = Vec::new();
    let (mut dw, mut dv) = (0.0f64, 0.0f64);
    for &(w, v) in &r.states {
        let bump: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.01 * (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
            .collect();
        let w0: Vec<f64> = bump.iter().map(|b| w * b).collect();
        let v0: Vec<f64> = bump.iter().map(|b| v * (2.0 - b)).collect();
        let s = newton_solve(&w0, &v0, lambda, p.mu, eps, model)?;
        let active = model.op1().active();
        for i in active {
            dw = dw.max((s.w[i] - w).abs());
            dv = dv.max((s.v[i] - v).abs());
        }
        states.push(s);
    }
    Ok((r.states.len(), states, dw, dv))
}

fn run_compare(cfg: &RunConfig, o: &mut Out) -> std::result::Result<(), RunError> {
    let p = cfg.const_params()?;
    let lambdas = cfg.lambda_values()?;
    let mut text = String::from("lambda,eps,oracle_count,pde_count,branch_count,max_dev_w,max_dev_v\n");
    let (mut worst_w, mut worst_v) = (0.0f64, 0.0f64);
    for e in cfg.eps_values()? {
        let b = coexistence_branch(p.mu, e, &cfg.continuation, &cfg.model).context(&format!("branch at eps = {e}"))?;
        let rows: Vec<std::result::Result<(String, f64, f64), RunError>> = lambdas
            .par_iter()
            .map(|&l| {
                let (count, states, dw, dv) =
                    compare_at(l, e, &p, &cfg.model).context(&format!("Newton at lambda = {l}, eps = {e}"))?;
                let pde = states.iter().filter(|s| s.is_coexistence).count();
                let bc = count_states_at(&b, l).count;
                let row = format!(
                    "{},{},{count},{pde},{bc},{},{}\n",
                    fmt_f64(l),
                    fmt_f64(e),
                    fmt_f64(dw),
                    fmt_f64(dv)
                );
                Ok((row, dw, dv))
            })
            .collect();
        for r in rows {
            let (row, dw, dv) = r?;
            worst_w = worst_w.max(dw);
            worst_v = worst_v.max(dv);
            text.push_str(&row);
        }
    }
    o.write("compare.csv", &text)?;
    o.say(format!(
        "max |w_pde - w_oracle| = {worst_w:.3e}, max |v_pde - v_oracle| = {worst_v:.3e}"
    ));
    Ok(())
}

/// Config text of the constant-coefficient preset.
pub fn preset_text(p: &ConstParams, n: usize) -> String {
    format!(
        "[example_section6]\na = {}\nb = {}\nc = {}\nd = {}\nmu = {}\n\n[grid]\nn = {n}\n",
        p.a, p.b, p.c, p.d, p.mu
    )
}

//! Bifurcation from the semitrivial state `(λ, w, v) = (Φ(μ), 0, θ₂)` and
//! pseudo-arclength continuation of the bifurcating branch.
//!
//! Arclength is measured in the quadrature-weighted norm
//! `‖(x, λ)‖² = Σ W x² + λ²`.

use crate::coexistence::{
    make_state, stability_of, tolerance, CoupledSystem, ScalarSystem, SteadyProblem, SteadyState,
};
use crate::curves::phi_zero;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, solve_bordered};
use crate::model::Model;
use crate::spectral::{adjoint_principal_eigen, principal_eigen};
use serde::{Deserialize, Serialize};

pub const MAX_CORRECTOR_ITER: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    /// Initial arclength step.
    pub ds0: f64,
    pub step_min: f64,
    /// Upper bound on the step relative to `max(1, ‖(x, λ)‖)`.
    pub ds_max_rel: f64,
    pub arclength_tol: f64,
    pub max_steps: usize,
    /// Steps taken in the `s < 0` direction.
    pub max_steps_negative: usize,
    /// Defaults to `10³ ‖θ₂‖∞`.
    pub norm_cap: Option<f64>,
    /// Defaults to `Φ(μ) + 5 (Φ(μ) − φ₀(μ))`.
    pub lambda_max: Option<f64>,
    /// Defaults to `φ₀(μ) − (Φ(μ) − φ₀(μ))`.
    pub lambda_min: Option<f64>,
    /// Seed amplitude; defaults to `10⁻³ ‖θ₂‖∞`.
    pub s0: Option<f64>,
    /// Smallest accepted cosine between consecutive tangents.
    pub min_tangent_cos: f64,
    pub compute_morse: bool,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            ds0: 1e-3,
            step_min: 1e-8,
            ds_max_rel: 0.05,
            arclength_tol: 1e-8,
            max_steps: 20_000,
            max_steps_negative: 200,
            norm_cap: None,
            lambda_max: None,
            lambda_min: None,
            s0: None,
            min_tangent_cos: 0.9,
            compute_morse: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentData {
    pub w1: Vec<f64>,
    pub w1_star: Vec<f64>,
    pub v1: Vec<f64>,
    pub lambda_prime: f64,
    pub capital_phi: f64,
    pub theta2: Vec<f64>,
}

/// Direction of bifurcation at `(Φ(μ), 0, θ₂)`. `w1` is the principal
/// eigenfunction of `L₁ + bθ₂` with `Σ W w1² = 1`, `w1_star` the adjoint one
/// with `Σ W w1 w1_star = 1`, `v1 = (L₂ + 2dθ₂ − μ)⁻¹(εcθ₂w1)` and
///
/// ```text
/// λ'(0) = Σ W (εa − bmθ₂) w1² w1_star + Σ W b v1 w1 w1_star.
/// ```
pub fn crandall_rabinowitz_tangent(mu: f64, eps: f64, model: &Model) -> Result<TangentData> {
    let theta2 = model.semitrivial_predator(mu)?;
    if theta2.is_zero {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} does not exceed sigma0 of the predator operator ({})",
            model.sigma02()
        )));
    }
    let theta2 = theta2.z;
    let op1 = model.op1();
    let wts = op1.weights();
    let pot: Vec<f64> = model.b().iter().zip(&theta2).map(|(b, t)| b * t).collect();
    let primal = principal_eigen(op1, &pot)?;
    let adjoint = adjoint_principal_eigen(op1, &pot)?;

    let norm = op1.inner(&primal.phi, &primal.phi).sqrt();
    let w1: Vec<f64> = primal.phi.iter().map(|p| p / norm).collect();
    let pair = op1.inner(&w1, &adjoint.phi);
    let w1_star: Vec<f64> = adjoint.phi.iter().map(|p| p / pair).collect();

    let op2 = model.op2();
    let pot2: Vec<f64> = model.d().iter().zip(&theta2).map(|(d, t)| 2.0 * d * t).collect();
    let rhs: Vec<f64> = (0..theta2.len())
        .map(|i| eps * model.c()[i] * theta2[i] * w1[i])
        .collect();
    let v1 = op2.solve_shifted_with(Some(&pot2), -mu, &rhs)?;

    let mut lambda_prime = 0.0;
    for i in op1.active() {
        let cubic = (eps * model.a()[i] - model.b()[i] * model.m()[i] * theta2[i]) * w1[i] * w1[i];
        let coupling = model.b()[i] * v1[i] * w1[i];
        lambda_prime += wts[i] * (cubic + coupling) * w1_star[i];
    }
    Ok(TangentData {
        w1,
        w1_star,
        v1,
        lambda_prime,
        capital_phi: primal.sigma0,
        theta2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    LambdaMaxReached,
    LambdaMinReached,
    NormCapReached,
    StepFailure,
    MaxStepsReached,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::LambdaMaxReached => "lambda_max_reached",
            Termination::LambdaMinReached => "lambda_min_reached",
            Termination::NormCapReached => "norm_cap_reached",
            Termination::StepFailure => "step_failure",
            Termination::MaxStepsReached => "max_steps_reached",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub s: f64,
    pub state: SteadyState,
    pub dlambda_ds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub eps: f64,
    pub mu: f64,
    /// The `s > 0` direction (`w ≫ 0` near the bifurcation point), starting
    /// at the bifurcation point itself.
    pub points: Vec<BranchPoint>,
    /// The `s < 0` direction, ordered away from the bifurcation point.
    pub negative: Vec<BranchPoint>,
    pub folds: Vec<f64>,
    pub termination: Termination,
    pub negative_termination: Option<Termination>,
    pub capital_phi: f64,
    pub lambda_prime: f64,
}

impl Branch {
    /// All points ordered by increasing `s`.
    pub fn ordered_points(&self) -> Vec<&BranchPoint> {
        self.negative.iter().rev().chain(self.points.iter()).collect()
    }

    /// Whether the point is a detected fold (sign change of `dλ/ds`
    /// between it and its successor on the `s > 0` side).
    pub fn fold_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.points.len()];
        for i in fold_indices(&self.points) {
            flags[i] = true;
        }
        flags
    }
}

/// Limits resolved against a specific `(μ, model)`.
#[derive(Debug, Clone, Copy)]
struct Limits {
    norm_cap: f64,
    lambda_max: f64,
    lambda_min: f64,
    s0: f64,
}

fn resolve_limits(
    cfg: &ContinuationConfig,
    mu: f64,
    capital_phi: f64,
    theta2: &[f64],
    model: &Model,
) -> Result<Limits> {
    let t2 = norm_inf(theta2);
    let phi0 = match (cfg.lambda_max, cfg.lambda_min) {
        (Some(_), Some(_)) => capital_phi,
        _ => phi_zero(mu, model)?,
    };
    let width = (capital_phi - phi0).max(1e-6 * capital_phi.abs().max(1.0));
    Ok(Limits {
        norm_cap: cfg.norm_cap.unwrap_or(1e3 * t2),
        lambda_max: cfg.lambda_max.unwrap_or(capital_phi + 5.0 * width),
        lambda_min: cfg.lambda_min.unwrap_or(phi0 - width),
        s0: cfg.s0.unwrap_or(1e-3 * t2),
    })
}

fn weighted(wts: &[f64], x: &[f64]) -> Vec<f64> {
    wts.iter().zip(x).map(|(a, b)| a * b).collect()
}

/// Newton on `R(λ, x) = 0`, `Σ c_x·x + c_l λ = target` (where `c_x` already
/// carries the quadrature weights).
fn correct<P: SteadyProblem + ?Sized>(
    p: &P,
    mut x: Vec<f64>,
    mut lambda: f64,
    c_x: &[f64],
    c_l: f64,
    target: f64,
    constraint_tol: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let mut first_res = None;
    for _ in 0..MAX_CORRECTOR_ITER {
        let r = p.residual(lambda, &x)?;
        let res = norm_inf(&p.precondition(&r));
        let n = dot(c_x, &x) + c_l * lambda - target;
        if !res.is_finite() {
            break;
        }
        if res <= tolerance(&x) && n.abs() <= constraint_tol {
            return Ok((x, lambda, res));
        }
        let r0 = *first_res.get_or_insert(res);
        if res > 1e3 * r0.max(1e-8) {
            break;
        }
        let jac = p.jacobian(lambda, &x)?;
        let lu = jac.factor().map_err(|_| Error::SingularJacobian)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let (dx, dl) = solve_bordered(&jac, &lu, &p.d_lambda(&x), c_x, c_l, &neg_r, -n)?;
        for (a, b) in x.iter_mut().zip(&dx) {
            *a += b;
        }
        lambda += dl;
        if p.admissibility(&x) <= crate::coexistence::ADMISSIBLE_FLOOR {
            return Err(Error::Inadmissible(p.admissibility(&x)));
        }
    }
    Err(Error::NoConvergence {
        what: "arclength corrector",
        iterations: MAX_CORRECTOR_ITER,
        residual: p.residual_norm(lambda, &x).unwrap_or(f64::INFINITY),
    })
}

/// Unit tangent at `(x, λ)` oriented along `(prev_x, prev_l)`.
fn tangent<P: SteadyProblem + ?Sized>(
    p: &P,
    wts: &[f64],
    x: &[f64],
    lambda: f64,
    prev_x: &[f64],
    prev_l: f64,
) -> Result<(Vec<f64>, f64)> {
    let jac = p.jacobian(lambda, x)?;
    let lu = jac.factor().map_err(|_| Error::SingularJacobian)?;
    let zeros = vec![0.0; x.len()];
    let (mut tx, mut tl) = solve_bordered(&jac, &lu, &p.d_lambda(x), &weighted(wts, prev_x), prev_l, &zeros, 1.0)?;
    let norm = (dot(&weighted(wts, &tx), &tx) + tl * tl).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::SingularJacobian);
    }
    let sign = if dot(&weighted(wts, &tx), prev_x) + tl * prev_l < 0.0 {
        -1.0
    } else {
        1.0
    };
    tx.iter_mut().for_each(|v| *v *= sign / norm);
    tl *= sign / norm;
    Ok((tx, tl))
}

struct Walk<'a, P: SteadyProblem + ?Sized> {
    p: &'a P,
    model: &'a Model,
    cfg: &'a ContinuationConfig,
    limits: Limits,
    mu: f64,
    eps: f64,
    wts: Vec<f64>,
}

impl<P: SteadyProblem + ?Sized> Walk<'_, P> {
    fn point(&self, s: f64, x: &[f64], lambda: f64, res: f64, dlambda_ds: f64) -> BranchPoint {
        let mut state = make_state(self.p, self.model, lambda, self.mu, self.eps, x, res);
        if self.cfg.compute_morse {
            if let Ok(info) = stability_of(self.p, lambda, x) {
                state.morse_index = Some(info.index);
                state.tau0 = Some(info.tau0);
            }
        }
        BranchPoint { s, state, dlambda_ds }
    }

    fn stop_reason(&self, x: &[f64], lambda: f64) -> Option<Termination> {
        let (w, _) = self.p.unpack(x);
        if norm_inf(&w) > self.limits.norm_cap {
            Some(Termination::NormCapReached)
        } else if lambda > self.limits.lambda_max {
            Some(Termination::LambdaMaxReached)
        } else if lambda < self.limits.lambda_min {
            Some(Termination::LambdaMinReached)
        } else {
            None
        }
    }

    /// Continues from `(x, λ)` with initial tangent `t`; `s_sign` orients the
    /// recorded arclength. The start point is not included in the output.
    fn run(
        &self,
        mut x: Vec<f64>,
        mut lambda: f64,
        mut t: (Vec<f64>, f64),
        s_start: f64,
        s_sign: f64,
        max_steps: usize,
    ) -> (Vec<BranchPoint>, Termination) {
        let cfg = self.cfg;
        let mut out = Vec::new();
        let mut ds = cfg.ds0;
        let mut s = s_start;
        let mut successes = 0;
        for _ in 0..max_steps {
            let size = (dot(&weighted(&self.wts, &x), &x) + lambda * lambda).sqrt();
            let ds_max = cfg.ds_max_rel * size.max(1.0);
            ds = ds.min(ds_max);
            let step = loop {
                if ds < cfg.step_min {
                    break None;
                }
                let x_pred: Vec<f64> = x.iter().zip(&t.0).map(|(a, b)| a + ds * b).collect();
                let l_pred = lambda + ds * t.1;
                let c_x = weighted(&self.wts, &t.0);
                let target = dot(&c_x, &x) + t.1 * lambda + ds;
                let attempt =
                    correct(self.p, x_pred, l_pred, &c_x, t.1, target, cfg.arclength_tol).and_then(|(xn, ln, res)| {
                        let tn = tangent(self.p, &self.wts, &xn, ln, &t.0, t.1)?;
                        Ok((xn, ln, res, tn))
                    });
                match attempt {
                    Ok((xn, ln, res, tn)) => {
                        let cos = dot(&weighted(&self.wts, &tn.0), &t.0) + tn.1 * t.1;
                        if cos >= cfg.min_tangent_cos || ds <= 2.0 * cfg.step_min {
                            break Some((xn, ln, res, tn));
                        }
                        ds *= 0.5;
                        successes = 0;
                    }
                    Err(_) => {
                        ds *= 0.5;
                        successes = 0;
                    }
                }
            };
            let Some((xn, ln, res, tn)) = step else {
                return (out, Termination::StepFailure);
            };
            s += s_sign * ds;
            x = xn;
            lambda = ln;
            t = tn;
            out.push(self.point(s, &x, lambda, res, s_sign * t.1));
            if let Some(reason) = self.stop_reason(&x, lambda) {
                return (out, reason);
            }
            successes += 1;
            if successes >= 3 {
                ds *= 1.3;
                successes = 0;
            }
        }
        (out, Termination::MaxStepsReached)
    }
}

/// Continues the branch bifurcating from `(Φ(μ), 0, θ₂)` in both
/// directions for the given steady problem.
fn bifurcating_branch<P: SteadyProblem + ?Sized>(
    p: &P,
    model: &Model,
    cfg: &ContinuationConfig,
    mu: f64,
    eps: f64,
    td: &TangentData,
    limits: Limits,
) -> Result<Branch> {
    let wts = p.weights();
    let walk = Walk {
        p,
        model,
        cfg,
        limits,
        mu,
        eps,
        wts: wts.clone(),
    };
    let zero = model.zeros();
    let x_bif = p.pack(&zero, &td.theta2);
    let dir_x = p.pack(&td.w1, &td.v1);
    let w1p = p.pack(&td.w1, &zero);
    let c_pin = weighted(&wts, &w1p);

    type Seed = (Vec<f64>, f64, f64, (Vec<f64>, f64));
    let seed = |s0: f64| -> Result<Seed> {
        let x_pred: Vec<f64> = x_bif.iter().zip(&dir_x).map(|(a, b)| a + s0 * b).collect();
        let l_pred = td.capital_phi + s0 * td.lambda_prime;
        let (x, l, res) = correct(
            p,
            x_pred,
            l_pred,
            &c_pin,
            0.0,
            s0,
            cfg.arclength_tol * s0.abs().min(1.0),
        )
        .map_err(|e| Error::SeedTooLarge(format!("corrector failed at amplitude {s0}: {e}")))?;
        let sign = s0.signum();
        let guide_x: Vec<f64> = dir_x.iter().map(|v| sign * v).collect();
        let t = tangent(p, &wts, &x, l, &guide_x, sign * td.lambda_prime)?;
        Ok((x, l, res, t))
    };

    let bif_res = p.residual_norm(td.capital_phi, &x_bif)?;
    let mut points = vec![walk.point(0.0, &x_bif, td.capital_phi, bif_res, td.lambda_prime)];
    let (x, l, res, t) = seed(limits.s0)?;
    let s_seed = arclength(&wts, &x, l, &x_bif, td.capital_phi);
    points.push(walk.point(s_seed, &x, l, res, t.1));
    let (rest, termination) = walk.run(x, l, t, s_seed, 1.0, cfg.max_steps);
    points.extend(rest);

    let mut negative = Vec::new();
    let mut negative_termination = None;
    if cfg.max_steps_negative > 0 {
        if let Ok((x, l, res, t)) = seed(-limits.s0) {
            let s_seed = -arclength(&wts, &x, l, &x_bif, td.capital_phi);
            negative.push(walk.point(s_seed, &x, l, res, -t.1));
            let (rest, term) = walk.run(x, l, t, s_seed, -1.0, cfg.max_steps_negative);
            negative.extend(rest);
            negative_termination = Some(term);
        } else {
            negative_termination = Some(Termination::StepFailure);
        }
    }

    let folds = detect_folds_in(&points);
    Ok(Branch {
        eps,
        mu,
        points,
        negative,
        folds,
        termination,
        negative_termination,
        capital_phi: td.capital_phi,
        lambda_prime: td.lambda_prime,
    })
}

fn arclength(wts: &[f64], x: &[f64], l: f64, x0: &[f64], l0: f64) -> f64 {
    let dx: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    (dot(&weighted(wts, &dx), &dx) + (l - l0) * (l - l0)).sqrt()
}

/// Seed state at amplitude `s0` on the branch bifurcating from
/// `(Φ(μ), 0, θ₂)`: first-order predictor, corrected with `λ` free and
/// the amplitude pinned by `Σ W w w1 = s0`.
pub fn branch_seed(mu: f64, eps: f64, s0: f64, model: &Model) -> Result<SteadyState> {
    let td = crandall_rabinowitz_tangent(mu, eps, model)?;
    let p = CoupledSystem::new(model, mu, eps);
    let wts = p.weights();
    let zero = model.zeros();
    let x_pred = p.pack(
        &td.w1.iter().map(|v| s0 * v).collect::<Vec<_>>(),
        &td.theta2
            .iter()
            .zip(&td.v1)
            .map(|(t, v)| t + s0 * v)
            .collect::<Vec<_>>(),
    );
    let c_pin = weighted(&wts, &p.pack(&td.w1, &zero));
    let l_pred = td.capital_phi + s0 * td.lambda_prime;
    let (x, l, res) = correct(&p, x_pred, l_pred, &c_pin, 0.0, s0, 1e-8 * s0.abs().min(1.0))
        .map_err(|e| Error::SeedTooLarge(format!("corrector failed at amplitude {s0}: {e}")))?;
    Ok(make_state(&p, model, l, mu, eps, &x, res))
}

/// Both directions of the coexistence branch of the coupled system.
pub fn coexistence_branch(mu: f64, eps: f64, cfg: &ContinuationConfig, model: &Model) -> Result<Branch> {
    let td = crandall_rabinowitz_tangent(mu, eps, model)?;
    let limits = resolve_limits(cfg, mu, td.capital_phi, &td.theta2, model)?;
    let p = CoupledSystem::new(model, mu, eps);
    bifurcating_branch(&p, model, cfg, mu, eps, &td, limits)
}

/// The branch of the limiting scalar problem with the predator frozen at
/// `θ₂`.
pub fn scalar_branch_eps0(mu: f64, cfg: &ContinuationConfig, model: &Model) -> Result<Branch> {
    let td = crandall_rabinowitz_tangent(mu, 0.0, model)?;
    let limits = resolve_limits(cfg, mu, td.capital_phi, &td.theta2, model)?;
    let p = ScalarSystem::new(model, mu)?;
    bifurcating_branch(&p, model, cfg, mu, 0.0, &td, limits)
}

/// Continues the coupled system from an arbitrary converged state, in the
/// direction of increasing `λ` at the start.
pub fn continue_branch(seed: &SteadyState, cfg: &ContinuationConfig, model: &Model) -> Result<Branch> {
    let p = CoupledSystem::new(model, seed.mu, seed.eps);
    let theta2 = model.semitrivial_predator(seed.mu)?.z;
    let capital_phi = crate::curves::capital_phi(seed.mu, model)?;
    let limits = resolve_limits(cfg, seed.mu, capital_phi, &theta2, model)?;
    let wts = p.weights();
    let x = p.pack(&seed.w, &seed.v);
    let res = p.residual_norm(seed.lambda, &x)?;
    if res > tolerance(&x) {
        return Err(Error::InvalidArgument(format!(
            "seed is not converged (residual {res:.3e})"
        )));
    }
    let t = tangent(&p, &wts, &x, seed.lambda, &vec![0.0; x.len()], 1.0)?;
    let walk = Walk {
        p: &p,
        model,
        cfg,
        limits,
        mu: seed.mu,
        eps: seed.eps,
        wts,
    };
    let mut points = vec![walk.point(0.0, &x, seed.lambda, res, t.1)];
    let (rest, termination) = walk.run(x, seed.lambda, t, 0.0, 1.0, cfg.max_steps);
    points.extend(rest);
    let folds = detect_folds_in(&points);
    Ok(Branch {
        eps: seed.eps,
        mu: seed.mu,
        points,
        negative: Vec::new(),
        folds,
        termination,
        negative_termination: None,
        capital_phi,
        lambda_prime: f64::NAN,
    })
}

/// Indices `i` with a sign change of `dλ/ds` between coexistence points `i`
/// and `i + 1`.
fn fold_indices(points: &[BranchPoint]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..points.len().saturating_sub(1) {
        let (a, b) = (&points[i], &points[i + 1]);
        if a.state.is_coexistence && b.state.is_coexistence && a.dlambda_ds * b.dlambda_ds < 0.0 {
            out.push(i);
        }
    }
    out
}

fn detect_folds_in(points: &[BranchPoint]) -> Vec<f64> {
    fold_indices(points)
        .into_iter()
        .map(|i| {
            let j = if i > 0 { i - 1 } else { i };
            if j + 2 >= points.len() {
                return points[i].state.lambda;
            }
            let (s, l): (Vec<f64>, Vec<f64>) = (j..j + 3).map(|k| (points[k].s, points[k].state.lambda)).unzip();
            let bracket_lo = points[i].state.lambda.min(points[i + 1].state.lambda);
            let bracket_hi = points[i].state.lambda.max(points[i + 1].state.lambda);
            match quadratic_vertex(&s, &l) {
                Some((sv, lv)) if sv >= s[0].min(s[2]) && sv <= s[0].max(s[2]) => lv,
                _ => {
                    if points[i].dlambda_ds > 0.0 {
                        bracket_hi
                    } else {
                        bracket_lo
                    }
                }
            }
        })
        .collect()
}

/// Vertex `(s*, λ(s*))` of the parabola through three points.
fn quadratic_vertex(s: &[f64], l: &[f64]) -> Option<(f64, f64)> {
    let d01 = (l[1] - l[0]) / (s[1] - s[0]);
    let d12 = (l[2] - l[1]) / (s[2] - s[1]);
    let a = (d12 - d01) / (s[2] - s[0]);
    if a == 0.0 || !a.is_finite() {
        return None;
    }
    let b = d01 - a * (s[0] + s[1]);
    let sv = -b / (2.0 * a);
    let lv = l[0] + (sv - s[0]) * (d01 + a * (sv - s[1]));
    Some((sv, lv))
}

/// Folds of the `s > 0` part of a branch.
pub fn detect_folds(branch: &Branch) -> Vec<f64> {
    detect_folds_in(&branch.points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateCount {
    pub count: usize,
    /// The query lies within the fold tolerance of a detected fold.
    pub near_fold: bool,
}

/// Number of crossings of `λ = λ_query` by the piecewise-linear `s > 0`
/// branch, using consecutive coexistence points only.
pub fn count_states_at(branch: &Branch, lambda_query: f64) -> StateCount {
    let pts = &branch.points;
    let mut count = 0;
    for i in 0..pts.len().saturating_sub(1) {
        let (a, b) = (&pts[i].state, &pts[i + 1].state);
        if a.is_coexistence && b.is_coexistence && (a.lambda < lambda_query) != (b.lambda < lambda_query) {
            count += 1;
        }
    }
    let fold_tol = 1e-6 * lambda_query.abs().max(1.0);
    StateCount {
        count,
        near_fold: branch.folds.iter().any(|f| (f - lambda_query).abs() <= fold_tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use approx::assert_abs_diff_eq;

    fn constant_model() -> Model {
        ModelSpec::constant_neumann(40, 1.0, 2.0, 1.0, 1.0).build().unwrap()
    }

    #[test]
    fn constant_tangent() {
        let model = constant_model();
        let td = crandall_rabinowitz_tangent(1.0, 0.0, &model).unwrap();
        assert_abs_diff_eq!(td.lambda_prime, -2.0, epsilon = 1e-9);
        assert!(td.v1.iter().all(|v| *v == 0.0));
        // λ'(ε) = ε(a + bc/d) − bμ/d for constants
        let td = crandall_rabinowitz_tangent(1.0, 0.1, &model).unwrap();
        assert_abs_diff_eq!(td.lambda_prime, 0.1 * 3.0 - 2.0, epsilon = 1e-9);
        assert!(td.v1.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn seed_follows_tangent() {
        let model = constant_model();
        let td = crandall_rabinowitz_tangent(1.0, 0.1, &model).unwrap();
        let s0 = 1e-4;
        let seed = branch_seed(1.0, 0.1, s0, &model).unwrap();
        assert!(seed.is_coexistence);
        assert!(seed.lambda < td.capital_phi);
        let slope = (seed.lambda - td.capital_phi) / s0;
        assert!((slope - td.lambda_prime).abs() <= 0.05 * td.lambda_prime.abs());
        let ratio = norm_inf(&seed.w) / s0 / norm_inf(&td.w1);
        assert!((ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn vertex_of_parabola() {
        let s = [0.0, 1.0, 3.0];
        let l: Vec<f64> = s.iter().map(|s| 2.0 - (s - 1.5) * (s - 1.5)).collect();
        let (sv, lv) = quadratic_vertex(&s, &l).unwrap();
        assert_abs_diff_eq!(sv, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(lv, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn monotone_branch_has_no_folds() {
        // ε = 0.1 < ε*: the constant branch turns once then grows in λ
        let model = ModelSpec::constant_neumann(12, 1.0, 2.0, 1.0, 1.0).build().unwrap();
        let cfg = ContinuationConfig {
            lambda_max: Some(4.0),
            lambda_min: Some(0.0),
            max_steps_negative: 0,
            ..Default::default()
        };
        let br = coexistence_branch(1.0, 0.1, &cfg, &model).unwrap();
        assert_eq!(br.termination, Termination::LambdaMaxReached);
        assert_eq!(br.folds.len(), 1);
        // beyond the fold the branch is monotone
        let after: Vec<&BranchPoint> = br.points.iter().filter(|p| p.state.lambda > 2.5).collect();
        assert!(after.windows(2).all(|w| w[1].state.lambda > w[0].state.lambda));
        assert_eq!(count_states_at(&br, 3.0).count, 1);
        assert_eq!(count_states_at(&br, 0.5).count, 0);
    }
}

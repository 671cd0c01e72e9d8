//! Residual, Jacobian and Newton solver for steady states of the coupled
//! system, plus stability and a priori bound checks.
//!
//! Unknowns are packed node by node: `w_i` (if node `i` is active for the
//! prey operator) followed by `v_i` (if active for the predator operator).
//! With this ordering the Jacobian has two sub- and two super-diagonals.

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, BandMatrix, Tridiagonal};
use crate::logistic::theta;
use crate::model::Model;
use crate::spectral::{morse_index, MorseInfo};

pub const NEWTON_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITER: usize = 60;
pub const MAX_HALVINGS: usize = 30;
/// Newton iterates must keep `1 + m w` above this value.
pub const ADMISSIBLE_FLOOR: f64 = 0.1;
pub const BOUND_SLACK: f64 = 1e-9;

/// Residual tolerance for a state with packed unknowns `x`; relative to the
/// state size above unit magnitude.
pub fn tolerance(x: &[f64]) -> f64 {
    NEWTON_TOL * norm_inf(x).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
    /// Full node vectors.
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub residual_norm: f64,
    pub morse_index: Option<usize>,
    pub tau0: Option<f64>,
    /// `w > 0` and `v > 0` at every active node.
    pub is_coexistence: bool,
}

/// A parameterized steady problem `R(λ, x) = 0` in packed unknowns.
pub trait SteadyProblem: Sync {
    fn dim(&self) -> usize;
    /// Band widths `(kl, ku)` of the Jacobian.
    fn bandwidth(&self) -> (usize, usize);
    fn residual(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, lambda: f64, x: &[f64]) -> Result<BandMatrix>;
    /// `∂R/∂λ`.
    fn d_lambda(&self, x: &[f64]) -> Vec<f64>;
    /// Quadrature weight of each unknown.
    fn weights(&self) -> Vec<f64>;
    /// `P⁻¹ r` for a fixed diagonally dominant `P` close to the diffusion
    /// part; residual norms are measured after this map.
    fn precondition(&self, r: &[f64]) -> Vec<f64>;
    /// Full node vectors `(w, v)`.
    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>);
    fn pack(&self, w: &[f64], v: &[f64]) -> Vec<f64>;
    /// Smallest value of `1 + m w`.
    fn admissibility(&self, x: &[f64]) -> f64;

    fn residual_norm(&self, lambda: f64, x: &[f64]) -> Result<f64> {
        Ok(norm_inf(&self.precondition(&self.residual(lambda, x)?)))
    }
}

/// Index map from nodes to packed unknowns.
#[derive(Debug, Clone)]
struct Layout {
    w_index: Vec<Option<usize>>,
    v_index: Vec<Option<usize>>,
    dim: usize,
}

impl Layout {
    fn new(model: &Model, with_v: bool) -> Layout {
        let len = model.grid().len();
        let mut w_index = vec![None; len];
        let mut v_index = vec![None; len];
        let mut k = 0;
        for i in 0..len {
            if model.op1().is_active(i) {
                w_index[i] = Some(k);
                k += 1;
            }
            if with_v && model.op2().is_active(i) {
                v_index[i] = Some(k);
                k += 1;
            }
        }
        Layout {
            w_index,
            v_index,
            dim: k,
        }
    }
}

fn preconditioner(t: &Tridiagonal) -> Tridiagonal {
    t.shifted((-t.dominance_margin()).max(0.0) + 1.0)
}

/// The coupled system at fixed `(μ, ε)` with `λ` as parameter.
pub struct CoupledSystem<'a> {
    model: &'a Model,
    pub mu: f64,
    pub eps: f64,
    layout: Layout,
    t1: Tridiagonal,
    t2: Tridiagonal,
    p1: Tridiagonal,
    p2: Tridiagonal,
}

impl<'a> CoupledSystem<'a> {
    pub fn new(model: &'a Model, mu: f64, eps: f64) -> Self {
        let t1 = model.op1().matrix();
        let t2 = model.op2().matrix();
        CoupledSystem {
            model,
            mu,
            eps,
            layout: Layout::new(model, true),
            p1: preconditioner(&t1),
            p2: preconditioner(&t2),
            t1,
            t2,
        }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Residual pair as full node vectors (zero at Dirichlet endpoints).
    pub fn residual_fields(&self, lambda: f64, w: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let md = self.model;
        let floor = admissibility_of(md.m(), w);
        if floor <= 0.0 {
            return Err(Error::Inadmissible(floor));
        }
        let mut r1 = md.op1().apply(w);
        let mut r2 = md.op2().apply(v);
        for i in md.op1().active() {
            let q = 1.0 + md.m()[i] * w[i];
            r1[i] += -lambda * w[i] + self.eps * md.a()[i] * w[i] * w[i] + md.b()[i] * w[i] * v[i] / q;
        }
        for i in md.op2().active() {
            let q = 1.0 + md.m()[i] * w[i];
            r2[i] += -self.mu * v[i] + md.d()[i] * v[i] * v[i] - self.eps * md.c()[i] * w[i] * v[i] / q;
        }
        Ok((r1, r2))
    }
}

fn admissibility_of(m: &[f64], w: &[f64]) -> f64 {
    m.iter().zip(w).map(|(m, w)| 1.0 + m * w).fold(f64::INFINITY, f64::min)
}

impl SteadyProblem for CoupledSystem<'_> {
    fn dim(&self) -> usize {
        self.layout.dim
    }

    fn bandwidth(&self) -> (usize, usize) {
        (2, 2)
    }

    fn residual(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        let (w, v) = self.unpack(x);
        let (r1, r2) = self.residual_fields(lambda, &w, &v)?;
        Ok(self.pack(&r1, &r2))
    }

    fn jacobian(&self, lambda: f64, x: &[f64]) -> Result<BandMatrix> {
        let md = self.model;
        let (w, v) = self.unpack(x);
        let floor = admissibility_of(md.m(), &w);
        if floor <= 0.0 {
            return Err(Error::Inadmissible(floor));
        }
        let (first1, first2) = (*md.op1().active().start(), *md.op2().active().start());
        let mut jac = BandMatrix::zeros(self.dim(), 2, 2);
        let len = md.grid().len();
        for i in 0..len {
            let q = 1.0 + md.m()[i] * w[i];
            if let Some(p) = self.layout.w_index[i] {
                let k = i - first1;
                jac.add(
                    p,
                    p,
                    self.t1.diag[k] - lambda + 2.0 * self.eps * md.a()[i] * w[i] + md.b()[i] * v[i] / (q * q),
                );
                if i > 0 {
                    if let Some(pl) = self.layout.w_index[i - 1] {
                        jac.add(p, pl, self.t1.lower[k]);
                    }
                }
                if i + 1 < len {
                    if let Some(pu) = self.layout.w_index[i + 1] {
                        jac.add(p, pu, self.t1.upper[k]);
                    }
                }
                if let Some(pv) = self.layout.v_index[i] {
                    jac.add(p, pv, md.b()[i] * w[i] / q);
                }
            }
            if let Some(p) = self.layout.v_index[i] {
                let k = i - first2;
                jac.add(
                    p,
                    p,
                    self.t2.diag[k] - self.mu + 2.0 * md.d()[i] * v[i] - self.eps * md.c()[i] * w[i] / q,
                );
                if i > 0 {
                    if let Some(pl) = self.layout.v_index[i - 1] {
                        jac.add(p, pl, self.t2.lower[k]);
                    }
                }
                if i + 1 < len {
                    if let Some(pu) = self.layout.v_index[i + 1] {
                        jac.add(p, pu, self.t2.upper[k]);
                    }
                }
                if let Some(pw) = self.layout.w_index[i] {
                    jac.add(p, pw, -self.eps * md.c()[i] * v[i] / (q * q));
                }
            }
        }
        Ok(jac)
    }

    fn d_lambda(&self, x: &[f64]) -> Vec<f64> {
        let (w, _) = self.unpack(x);
        let zero = self.model.zeros();
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        self.pack(&neg, &zero)
    }

    fn weights(&self) -> Vec<f64> {
        self.pack(self.model.op1().weights(), self.model.op2().weights())
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let (r1, r2) = self.unpack(r);
        let op1 = self.model.op1();
        let op2 = self.model.op2();
        let z1 = self.p1.solve(&op1.restrict(&r1)).map(|z| op1.extend(&z));
        let z2 = self.p2.solve(&op2.restrict(&r2)).map(|z| op2.extend(&z));
        match (z1, z2) {
            (Ok(z1), Ok(z2)) => self.pack(&z1, &z2),
            _ => vec![f64::INFINITY; self.dim()],
        }
    }

    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let len = self.model.grid().len();
        let mut w = vec![0.0; len];
        let mut v = vec![0.0; len];
        for i in 0..len {
            if let Some(p) = self.layout.w_index[i] {
                w[i] = x[p];
            }
            if let Some(p) = self.layout.v_index[i] {
                v[i] = x[p];
            }
        }
        (w, v)
    }

    fn pack(&self, w: &[f64], v: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for i in 0..w.len() {
            if let Some(p) = self.layout.w_index[i] {
                x[p] = w[i];
            }
            if let Some(p) = self.layout.v_index[i] {
                x[p] = v[i];
            }
        }
        x
    }

    fn admissibility(&self, x: &[f64]) -> f64 {
        let (w, _) = self.unpack(x);
        admissibility_of(self.model.m(), &w)
    }
}

/// The limiting scalar problem `L₁ w = λ w − b θ₂ w / (1 + m w)` with the
/// predator frozen at `θ₂ = θ_[L₂, μ, d]`.
pub struct ScalarSystem<'a> {
    model: &'a Model,
    pub mu: f64,
    theta2: Vec<f64>,
    layout: Layout,
    t1: Tridiagonal,
    p1: Tridiagonal,
}

impl<'a> ScalarSystem<'a> {
    pub fn new(model: &'a Model, mu: f64) -> Result<Self> {
        let theta2 = model.semitrivial_predator(mu)?.z;
        let t1 = model.op1().matrix();
        Ok(ScalarSystem {
            model,
            mu,
            theta2,
            layout: Layout::new(model, false),
            p1: preconditioner(&t1),
            t1,
        })
    }

    pub fn theta2(&self) -> &[f64] {
        &self.theta2
    }
}

impl SteadyProblem for ScalarSystem<'_> {
    fn dim(&self) -> usize {
        self.layout.dim
    }

    fn bandwidth(&self) -> (usize, usize) {
        (1, 1)
    }

    fn residual(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        let op = self.model.op1();
        let w = op.extend(x);
        let floor = admissibility_of(self.model.m(), &w);
        if floor <= 0.0 {
            return Err(Error::Inadmissible(floor));
        }
        let mut r = op.apply(&w);
        for i in op.active() {
            let q = 1.0 + self.model.m()[i] * w[i];
            r[i] += -lambda * w[i] + self.model.b()[i] * self.theta2[i] * w[i] / q;
        }
        Ok(op.restrict(&r))
    }

    fn jacobian(&self, lambda: f64, x: &[f64]) -> Result<BandMatrix> {
        let op = self.model.op1();
        let w = op.extend(x);
        let floor = admissibility_of(self.model.m(), &w);
        if floor <= 0.0 {
            return Err(Error::Inadmissible(floor));
        }
        let n = x.len();
        let first = *op.active().start();
        let mut jac = BandMatrix::zeros(n, 1, 1);
        for k in 0..n {
            let i = k + first;
            let q = 1.0 + self.model.m()[i] * w[i];
            jac.add(
                k,
                k,
                self.t1.diag[k] - lambda + self.model.b()[i] * self.theta2[i] / (q * q),
            );
            if k > 0 {
                jac.add(k, k - 1, self.t1.lower[k]);
            }
            if k + 1 < n {
                jac.add(k, k + 1, self.t1.upper[k]);
            }
        }
        Ok(jac)
    }

    fn d_lambda(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| -v).collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.model.op1().restrict(self.model.op1().weights())
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.p1.solve(r).unwrap_or_else(|_| vec![f64::INFINITY; r.len()])
    }

    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.model.op1().extend(x), self.theta2.clone())
    }

    fn pack(&self, w: &[f64], _v: &[f64]) -> Vec<f64> {
        self.model.op1().restrict(w)
    }

    fn admissibility(&self, x: &[f64]) -> f64 {
        admissibility_of(self.model.m(), &self.model.op1().extend(x))
    }
}

/// Damped Newton for `R(λ, x) = 0` at fixed `λ`. Returns the solution and
/// its residual norm.
pub fn newton<P: SteadyProblem + ?Sized>(problem: &P, lambda: f64, x0: &[f64]) -> Result<(Vec<f64>, f64)> {
    if problem.admissibility(x0) <= 0.0 {
        return Err(Error::Inadmissible(problem.admissibility(x0)));
    }
    let mut x = x0.to_vec();
    let mut res = problem.residual_norm(lambda, &x)?;
    for _ in 0..MAX_NEWTON_ITER {
        if res <= tolerance(&x) {
            return Ok((x, res));
        }
        let jac = problem.jacobian(lambda, &x)?;
        let lu = jac.factor().map_err(|_| Error::SingularJacobian)?;
        let r = problem.residual(lambda, &x)?;
        let step = lu.solve(&r);
        if step.iter().any(|s| !s.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            if problem.admissibility(&trial) > ADMISSIBLE_FLOOR {
                if let Ok(trial_res) = problem.residual_norm(lambda, &trial) {
                    if trial_res < (1.0 - 1e-4 * t) * res || trial_res <= tolerance(&trial) {
                        x = trial;
                        res = trial_res;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= tolerance(&x) {
        return Ok((x, res));
    }
    Err(Error::NoConvergence {
        what: "steady-state Newton",
        iterations: MAX_NEWTON_ITER,
        residual: res,
    })
}

/// Residual pair of the coupled system at a state.
pub fn residual(state: &SteadyState, model: &Model) -> Result<(Vec<f64>, Vec<f64>)> {
    CoupledSystem::new(model, state.mu, state.eps).residual_fields(state.lambda, &state.w, &state.v)
}

/// Jacobian of the coupled residual in packed unknowns.
pub fn jacobian(state: &SteadyState, model: &Model) -> Result<BandMatrix> {
    let sys = CoupledSystem::new(model, state.mu, state.eps);
    sys.jacobian(state.lambda, &sys.pack(&state.w, &state.v))
}

fn positive_on_active(model: &Model, w: &[f64], v: &[f64]) -> bool {
    model.op1().active().all(|i| w[i] > 0.0) && model.op2().active().all(|i| v[i] > 0.0)
}

pub(crate) fn make_state<P: SteadyProblem + ?Sized>(
    problem: &P,
    model: &Model,
    lambda: f64,
    mu: f64,
    eps: f64,
    x: &[f64],
    residual_norm: f64,
) -> SteadyState {
    let (w, v) = problem.unpack(x);
    let is_coexistence = positive_on_active(model, &w, &v);
    SteadyState {
        lambda,
        mu,
        eps,
        w,
        v,
        residual_norm,
        morse_index: None,
        tau0: None,
        is_coexistence,
    }
}

/// Newton solve of the coupled system from `(w0, v0)`. Positivity is
/// reported, not enforced.
pub fn newton_solve(w0: &[f64], v0: &[f64], lambda: f64, mu: f64, eps: f64, model: &Model) -> Result<SteadyState> {
    let sys = CoupledSystem::new(model, mu, eps);
    let (x, res) = newton(&sys, lambda, &sys.pack(w0, v0))?;
    Ok(make_state(&sys, model, lambda, mu, eps, &x, res))
}

/// Morse index of the linearization at a state, in the convention where
/// stability means all eigenvalues have positive real part.
pub fn stability(state: &SteadyState, model: &Model) -> Result<MorseInfo> {
    let jac = jacobian(state, model)?;
    morse_index(&jac.to_dense())
}

/// Stability with respect to an arbitrary steady problem.
pub fn stability_of<P: SteadyProblem + ?Sized>(problem: &P, lambda: f64, x: &[f64]) -> Result<MorseInfo> {
    morse_index(&problem.jacobian(lambda, x)?.to_dense())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriReport {
    pub holds: bool,
    /// `(bound, node)` pairs where the strict inequality fails.
    pub violations: Vec<(&'static str, usize)>,
}

/// Checks `0 ≪ w ≪ θ_[L₁,λ,εa]` and `θ₂ ≪ v ≪ θ_[L₂, μ + εcθ₁/(1+mθ₁), d]`
/// at the active nodes with margin `BOUND_SLACK · h`.
pub fn apriori_check(state: &SteadyState, model: &Model) -> Result<AprioriReport> {
    let eps = state.eps;
    let theta1 = model.semitrivial_prey(state.lambda, eps)?.z;
    let theta2 = model.semitrivial_predator(state.mu)?.z;
    let boost: Vec<f64> = (0..theta1.len())
        .map(|i| -eps * model.c()[i] * theta1[i] / (1.0 + model.m()[i] * theta1[i]))
        .collect();
    let upper_v = theta(model.op2(), &boost, state.mu, model.d())?.z;
    let slack = BOUND_SLACK * model.grid().h();
    let mut violations = Vec::new();
    for i in model.op1().active() {
        if !(state.w[i] > slack) {
            violations.push(("w > 0", i));
        }
        if !(theta1[i] - state.w[i] > slack) {
            violations.push(("w < theta1", i));
        }
    }
    for i in model.op2().active() {
        if !(state.v[i] - theta2[i] > slack) {
            violations.push(("v > theta2", i));
        }
        if !(upper_v[i] - state.v[i] > slack) {
            violations.push(("v < upper", i));
        }
    }
    Ok(AprioriReport {
        holds: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundarySpec, CoefficientSpec};
    use crate::model::{ModelSpec, OperatorSpec};
    use approx::assert_abs_diff_eq;

    fn mixed_model() -> Model {
        let mut spec = ModelSpec::constant_neumann(30, 1.0, 1.5, 0.8, 1.0);
        spec.prey = OperatorSpec {
            diffusion: CoefficientSpec::Constant(0.5),
            drift: CoefficientSpec::Constant(0.3),
            potential: CoefficientSpec::Constant(0.0),
            boundary: BoundarySpec::robin(0.5, 0.0),
        };
        spec.predator = OperatorSpec::laplacian(BoundarySpec::dirichlet());
        spec.m = CoefficientSpec::Bump {
            center: 0.6,
            width: 0.3,
            height: 1.0,
            floor: 0.0,
        };
        spec.build().unwrap()
    }

    #[test]
    fn semitrivial_residuals_vanish() {
        let model = ModelSpec::constant_neumann(40, 1.0, 2.0, 1.0, 1.0).build().unwrap();
        let theta2 = model.semitrivial_predator(1.0).unwrap().z;
        let sys = CoupledSystem::new(&model, 1.0, 0.5);
        let x = sys.pack(&model.zeros(), &theta2);
        assert!(sys.residual_norm(1.5, &x).unwrap() <= 1e-11);
        let theta1 = model.semitrivial_prey(1.5, 0.5).unwrap().z;
        let x = sys.pack(&theta1, &model.zeros());
        assert!(sys.residual_norm(1.5, &x).unwrap() <= 1e-11);
    }

    #[test]
    fn inadmissible_state_rejected() {
        let model = ModelSpec::constant_neumann(20, 1.0, 2.0, 1.0, 1.0).build().unwrap();
        let w = vec![-1.5; model.grid().len()];
        let r = CoupledSystem::new(&model, 1.0, 0.5).residual_fields(1.0, &w, &model.zeros());
        assert!(matches!(r, Err(Error::Inadmissible(_))));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let model = mixed_model();
        let sys = CoupledSystem::new(&model, 1.0, 0.7);
        let x: Vec<f64> = (0..sys.dim()).map(|k| 0.5 + 0.3 * ((k as f64) * 0.37).sin()).collect();
        let dir: Vec<f64> = (0..sys.dim()).map(|k| ((k as f64) * 1.3).cos()).collect();
        let lambda = 2.0;
        let jd = sys.jacobian(lambda, &x).unwrap().matvec(&dir);
        let h = 1e-6;
        let xp: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + h * d).collect();
        let r0 = sys.residual(lambda, &x).unwrap();
        let r1 = sys.residual(lambda, &xp).unwrap();
        let fd: Vec<f64> = r1.iter().zip(&r0).map(|(a, b)| (a - b) / h).collect();
        let err = norm_inf(&jd.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(err / norm_inf(&jd) <= 1e-5, "{err}");
    }

    #[test]
    fn semitrivial_block_structure() {
        let model = mixed_model();
        let theta2 = model.semitrivial_predator(12.0).unwrap().z;
        let sys = CoupledSystem::new(&model, 12.0, 0.3);
        let x = sys.pack(&model.zeros(), &theta2);
        let jac = sys.jacobian(3.0, &x).unwrap();
        let pot: Vec<f64> = model.b().iter().zip(&theta2).map(|(b, t)| b * t).collect();
        let expected = model.op1().matrix_with(Some(&pot), -3.0);
        let first = *model.op1().active().start();
        for i in model.op1().active() {
            let p = sys.layout.w_index[i].unwrap();
            assert_abs_diff_eq!(jac.get(p, p), expected.diag[i - first], epsilon = 1e-10);
        }
    }

    #[test]
    fn seed_from_semitrivial_stays_there() {
        let model = ModelSpec::constant_neumann(20, 1.0, 2.0, 1.0, 1.0).build().unwrap();
        let theta2 = model.semitrivial_predator(1.0).unwrap().z;
        let s = newton_solve(&model.zeros(), &theta2, 1.5, 1.0, 0.5, &model).unwrap();
        assert!(!s.is_coexistence);
        assert!(norm_inf(&s.w) < 1e-12);
    }

    #[test]
    fn apriori_bounds_are_strict() {
        let model = ModelSpec::constant_neumann(20, 1.0, 2.0, 1.0, 1.0).build().unwrap();
        let theta1 = model.semitrivial_prey(2.5, 0.1).unwrap().z;
        let theta2 = model.semitrivial_predator(1.0).unwrap().z;
        let s = newton_solve(
            &theta1.iter().map(|t| 0.9 * t).collect::<Vec<_>>(),
            &theta2,
            2.5,
            1.0,
            0.1,
            &model,
        )
        .unwrap();
        assert!(s.is_coexistence);
        assert!(apriori_check(&s, &model).unwrap().holds);

        let mut bad = s.clone();
        bad.w = theta1.clone();
        assert!(!apriori_check(&bad, &model).unwrap().holds);
        let mut bad = s.clone();
        bad.v = theta2.clone();
        assert!(!apriori_check(&bad, &model).unwrap().holds);
    }

    #[test]
    fn semitrivial_stability_switches_at_capital_phi() {
        let model = ModelSpec::constant_neumann(20, 1.0, 2.0, 1.0, 1.0).build().unwrap();
        let theta2 = model.semitrivial_predator(1.0).unwrap().z;
        let at = |lambda: f64| {
            let s = SteadyState {
                lambda,
                mu: 1.0,
                eps: 0.5,
                w: model.zeros(),
                v: theta2.clone(),
                residual_norm: 0.0,
                morse_index: None,
                tau0: None,
                is_coexistence: false,
            };
            stability(&s, &model).unwrap()
        };
        assert_eq!(at(1.9).index, 0);
        let above = at(2.1);
        assert_eq!(above.index, 1);
        assert_abs_diff_eq!(above.tau0, -0.1, epsilon = 1e-8);
    }
}

//! Maximal nonnegative solution of `(L + V) z = ρ z - ξ z²`.

use crate::error::{Error, Result};
use crate::grid::EllipticOperator;
use crate::linalg::{norm_inf, BandMatrix, Tridiagonal};
use crate::spectral::principal_eigen;

pub const BIFURCATION_TOL: f64 = 1e-10;
pub const NEWTON_TOL: f64 = 1e-11;
pub const MAX_NEWTON_ITER: usize = 60;
pub const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSolution {
    /// Full node vector.
    pub z: Vec<f64>,
    pub rho: f64,
    /// `σ₀[L + V]`.
    pub sigma0_ref: f64,
    pub is_zero: bool,
    /// Residual in preconditioned form, see [`LogisticProblem::residual_norm`].
    pub residual: f64,
}

/// `θ_[L+V, ρ, ξ]`. `potential` and `xi` are full node vectors.
pub fn theta(op: &EllipticOperator, potential: &[f64], rho: f64, xi: &[f64]) -> Result<ThetaSolution> {
    let eig = principal_eigen(op, potential)?;
    theta_from_eigen(op, potential, rho, xi, eig.sigma0, &eig.phi)
}

/// As [`theta`] with the principal eigenpair of `L + V` supplied.
pub fn theta_from_eigen(
    op: &EllipticOperator,
    potential: &[f64],
    rho: f64,
    xi: &[f64],
    sigma0: f64,
    phi: &[f64],
) -> Result<ThetaSolution> {
    if let Some(i) = op.active().find(|&i| !(xi[i] > 0.0)) {
        return Err(Error::InvalidCoefficient {
            role: "logistic weight".into(),
            reason: format!("must be positive, found {} at node {i}", xi[i]),
        });
    }
    if !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite rho {rho}")));
    }
    let zero = || ThetaSolution {
        z: vec![0.0; op.grid().len()],
        rho,
        sigma0_ref: sigma0,
        is_zero: true,
        residual: 0.0,
    };
    if rho <= sigma0 + BIFURCATION_TOL {
        return Ok(zero());
    }
    let problem = LogisticProblem::new(op, potential, rho, xi);
    let max_xi_phi = op.active().map(|i| xi[i] * phi[i]).fold(0.0, f64::max);
    let delta = (rho - sigma0) / max_xi_phi;

    let mut last_err = Error::LostPositivity;
    for factor in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let z0: Vec<f64> = phi.iter().map(|p| factor * delta * p).collect();
        match problem.newton(z0) {
            Ok((z, residual)) => {
                let positive = op.active().all(|i| z[i] > 0.0);
                if positive {
                    return Ok(ThetaSolution {
                        z,
                        rho,
                        sigma0_ref: sigma0,
                        is_zero: false,
                        residual,
                    });
                }
                // collapsed onto the trivial solution or changed sign
                last_err = Error::LostPositivity;
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

pub(crate) struct LogisticProblem<'a> {
    op: &'a EllipticOperator,
    t: Tridiagonal,
    pre: Tridiagonal,
    rho: f64,
    xi: Vec<f64>,
}

impl<'a> LogisticProblem<'a> {
    pub(crate) fn new(op: &'a EllipticOperator, potential: &[f64], rho: f64, xi: &[f64]) -> Self {
        let t = op.matrix_with(Some(potential), 0.0);
        let pre = t.shifted((-t.dominance_margin()).max(0.0) + 1.0);
        LogisticProblem {
            op,
            t,
            pre,
            rho,
            xi: op.restrict(xi),
        }
    }

    fn raw_residual(&self, z: &[f64]) -> Vec<f64> {
        let mut r = self.t.matvec(z);
        for i in 0..r.len() {
            r[i] += (self.xi[i] * z[i] - self.rho) * z[i];
        }
        r
    }

    /// `‖(L + V + e)⁻¹ R(z)‖∞` with `e` making the shifted matrix
    /// diagonally dominant. Equivalent to the fixed-point form
    /// `z - (L + V + e)⁻¹((ρ + e) z - ξ z²)`; unlike the raw residual its
    /// rounding floor does not grow like `h⁻²`.
    pub(crate) fn residual_norm(&self, z: &[f64]) -> f64 {
        let r = self.raw_residual(z);
        match self.pre.solve(&r) {
            Ok(p) => norm_inf(&p),
            Err(_) => f64::INFINITY,
        }
    }

    /// Damped Newton from a full node vector; returns the full solution.
    fn newton(&self, z0: Vec<f64>) -> Result<(Vec<f64>, f64)> {
        let m = self.t.len();
        let mut z = self.op.restrict(&z0);
        let mut res = self.residual_norm(&z);
        // relative to the solution size so that θ_[L, ρ, εξ] = θ_[L, ρ, ξ] / ε
        // is resolved equally well for every ε
        let tol = |z: &[f64]| NEWTON_TOL * norm_inf(z).max(1.0);
        for _ in 0..MAX_NEWTON_ITER {
            if res <= tol(&z) {
                return Ok((self.op.extend(&z), res));
            }
            let mut jac = BandMatrix::zeros(m, 1, 1);
            for i in 0..m {
                jac.add(i, i, self.t.diag[i] - self.rho + 2.0 * self.xi[i] * z[i]);
                if i > 0 {
                    jac.add(i, i - 1, self.t.lower[i]);
                }
                if i + 1 < m {
                    jac.add(i, i + 1, self.t.upper[i]);
                }
            }
            let lu = jac.factor()?;
            let r = self.raw_residual(&z);
            let step = lu.solve(&r);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| (a - t * s).max(0.0)).collect();
                let trial_res = self.residual_norm(&trial);
                if trial_res < (1.0 - 1e-4 * t) * res || trial_res <= tol(&trial) {
                    z = trial;
                    res = trial_res;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if res <= tol(&z) {
            return Ok((self.op.extend(&z), res));
        }
        Err(Error::NoConvergence {
            what: "logistic Newton",
            iterations: MAX_NEWTON_ITER,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, laplacian, BoundarySpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn neumann_constant_solution() {
        let g = build_grid(50, 0.0, 1.0).unwrap();
        let op = laplacian(&g, BoundarySpec::neumann()).unwrap();
        let s = theta(&op, &vec![0.0; g.len()], 2.0, &vec![1.0; g.len()]).unwrap();
        assert!(!s.is_zero);
        for v in &s.z {
            assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn below_threshold_is_zero() {
        let g = build_grid(100, 0.0, 1.0).unwrap();
        let op = laplacian(&g, BoundarySpec::dirichlet()).unwrap();
        let s = theta(&op, &vec![0.0; g.len()], 5.0, &vec![1.0; g.len()]).unwrap();
        assert!(s.is_zero);
        assert!(s.z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn near_bifurcation_amplitude_is_small() {
        let g = build_grid(50, 0.0, 1.0).unwrap();
        let op = laplacian(&g, BoundarySpec::neumann()).unwrap();
        let s = theta(&op, &vec![0.0; g.len()], 1e-3, &vec![1.0; g.len()]).unwrap();
        assert!(norm_inf(&s.z) <= 1e-2);
    }

    #[test]
    fn rejects_vanishing_weight() {
        let g = build_grid(20, 0.0, 1.0).unwrap();
        let op = laplacian(&g, BoundarySpec::neumann()).unwrap();
        let mut xi = vec![1.0; g.len()];
        xi[5] = 0.0;
        assert!(theta(&op, &vec![0.0; g.len()], 2.0, &xi).is_err());
    }

    #[test]
    fn dirichlet_positive_and_monotone_in_rho() {
        let g = build_grid(200, 0.0, 1.0).unwrap();
        let op = laplacian(&g, BoundarySpec::dirichlet()).unwrap();
        let v = vec![0.0; g.len()];
        let xi = vec![1.0; g.len()];
        let s1 = theta(&op, &v, 15.0, &xi).unwrap();
        let s2 = theta(&op, &v, 20.0, &xi).unwrap();
        for i in op.active() {
            assert!(s1.z[i] > 0.0);
            assert!(s2.z[i] > s1.z[i]);
        }
    }

    #[test]
    fn matches_time_marched_parabolic_problem() {
        let g = build_grid(30, 0.0, 1.0).unwrap();
        let op = laplacian(&g, BoundarySpec::dirichlet()).unwrap();
        let s = theta(&op, &vec![0.0; g.len()], 15.0, &vec![1.0; g.len()]).unwrap();

        // explicit Euler on z' = -L z + 15 z - z² until the update stalls
        let t = op.matrix();
        let dt = 0.4 * g.h() * g.h();
        let mut z = vec![1.0; t.len()];
        for _ in 0..2_000_000 {
            let lz = t.matvec(&z);
            let mut rate = 0.0f64;
            for (zi, li) in z.iter_mut().zip(&lz) {
                let dz = -li + 15.0 * *zi - *zi * *zi;
                rate = rate.max(dz.abs());
                *zi += dt * dz;
            }
            if rate < 1e-10 {
                break;
            }
        }
        let marched = op.extend(&z);
        assert_abs_diff_eq!(norm_inf(&marched), norm_inf(&s.z), epsilon = 1e-5);
    }
}

//! Principal eigenpairs of `L + V` and Morse indices of linearizations.

use crate::error::{Error, Result};
use crate::grid::EllipticOperator;
use crate::linalg::{norm_inf, Tridiagonal};
use faer::Mat;

pub const POWER_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-9;
pub const MAX_POWER_ITER: usize = 10_000;
pub const INDEX_TOL: f64 = 1e-8;
const ADJOINT_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub sigma0: f64,
    /// Full node vector, `‖phi‖∞ = 1`, positive at active nodes.
    pub phi: Vec<f64>,
    /// `‖(L + V) phi - sigma0 phi‖∞`.
    pub residual: f64,
}

/// Principal eigenpair of `L + V`. `potential` is a full node vector.
pub fn principal_eigen(op: &EllipticOperator, potential: &[f64]) -> Result<EigenPair> {
    let t = op.matrix_with(Some(potential), 0.0);
    let (sigma0, z, residual) = principal_of_matrix(&t)?;
    Ok(EigenPair {
        sigma0,
        phi: op.extend(&z),
        residual,
    })
}

/// Principal eigenpair of the adjoint of `L + V` with respect to the
/// quadrature inner product, i.e. `W⁻¹ y` for the left eigenvector `y`.
pub fn adjoint_principal_eigen(op: &EllipticOperator, potential: &[f64]) -> Result<EigenPair> {
    let t = op.matrix_with(Some(potential), 0.0);
    let (primal, _, _) = principal_of_matrix(&t)?;
    let (sigma0, y, _) = principal_of_matrix(&t.transpose())?;
    if (primal - sigma0).abs() > ADJOINT_REL_TOL * primal.abs().max(1.0) {
        return Err(Error::EigenMismatch {
            primal,
            adjoint: sigma0,
        });
    }
    let w = op.restrict(op.weights());
    let mut z: Vec<f64> = y.iter().zip(&w).map(|(y, w)| y / w).collect();
    let scale = norm_inf(&z);
    z.iter_mut().for_each(|v| *v /= scale);

    // residual of the weighted adjoint W⁻¹ Tᵀ W
    let wz: Vec<f64> = z.iter().zip(&w).map(|(z, w)| z * w).collect();
    let tw = t.transpose().matvec(&wz);
    let residual = tw
        .iter()
        .zip(&w)
        .zip(&z)
        .map(|((a, w), z)| (a / w - sigma0 * z).abs())
        .fold(0.0, f64::max);
    Ok(EigenPair {
        sigma0,
        phi: op.extend(&z),
        residual,
    })
}

/// Principal eigenvalue only.
pub fn sigma0(op: &EllipticOperator, potential: &[f64]) -> Result<f64> {
    principal_eigen(op, potential).map(|p| p.sigma0)
}

/// Shifted inverse power iteration on a Z-matrix. Returns
/// `(sigma0, eigenvector with max norm 1, residual)`.
pub fn principal_of_matrix(t: &Tridiagonal) -> Result<(f64, Vec<f64>, f64)> {
    let m = t.len();
    let scale = t.max_abs_row_sum().max(1.0);
    // Any shift s > −σ₀ makes T + s a nonsingular M-matrix. Start from a
    // dominance bound and move towards −σ₀ using the Collatz–Wielandt lower
    // bound min (Tz)_i / z_i ≤ σ₀, valid for every positive z.
    let mut shift = (-t.dominance_margin()).max(0.0) + 1.0;
    let mut ts = t.shifted(shift);
    let margin = 1e-8 * scale;

    let mut z = vec![1.0; m];
    let mut delta = f64::INFINITY;
    let mut converged = false;
    for _ in 0..MAX_POWER_ITER {
        let mut next = ts.solve(&z)?;
        normalize_inf(&mut next);
        if next.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::LostPositivity);
        }
        delta = next.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        z = next;
        if delta < POWER_TOL {
            converged = true;
            break;
        }
        let tz = t.matvec(&z);
        let lower = tz.iter().zip(&z).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min);
        let candidate = margin - lower;
        if candidate.is_finite() && candidate < shift - margin {
            let trial = t.shifted(candidate);
            let certified = trial
                .solve(&vec![1.0; m])
                .is_ok_and(|c| c.iter().all(|v| *v > 0.0 && v.is_finite()));
            if certified {
                shift = candidate;
                ts = trial;
            }
        }
    }
    if !converged {
        let sigma = rayleigh(t, &z);
        return Err(Error::NoConvergence {
            what: "principal eigenvalue iteration",
            iterations: MAX_POWER_ITER,
            residual: residual_of(t, &z, sigma).max(delta),
        });
    }
    let mut sigma = rayleigh(t, &z);

    // Inverse iteration just below the estimate; the shifted matrix stays a
    // nonsingular M-matrix, so the Thomas solve is stable.
    for _ in 0..2 {
        let gap = 1e-8 * scale;
        match t.shifted(gap - sigma).solve(&z) {
            Ok(mut y) => {
                normalize_inf(&mut y);
                if y.iter().all(|v| *v > 0.0 && v.is_finite()) {
                    z = y;
                    sigma = rayleigh(t, &z);
                } else {
                    break;
                }
            }
            Err(_) => break,
        }
    }
    if z.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::LostPositivity);
    }
    let residual = residual_of(t, &z, sigma);
    // Rounding in applying T is of size eps·‖T‖, which exceeds the absolute
    // tolerance on very fine grids.
    let tol = EIGEN_TOL.max(64.0 * f64::EPSILON * scale);
    if residual > tol {
        return Err(Error::NoConvergence {
            what: "principal eigenvalue iteration",
            iterations: MAX_POWER_ITER,
            residual,
        });
    }
    Ok((sigma, z, residual))
}

fn normalize_inf(z: &mut [f64]) {
    let s = norm_inf(z);
    if s > 0.0 {
        z.iter_mut().for_each(|v| *v /= s);
    }
}

fn rayleigh(t: &Tridiagonal, z: &[f64]) -> f64 {
    let tz = t.matvec(z);
    let num: f64 = tz.iter().zip(z).map(|(a, b)| a * b).sum();
    let den: f64 = z.iter().map(|v| v * v).sum();
    num / den
}

fn residual_of(t: &Tridiagonal, z: &[f64], sigma: f64) -> f64 {
    t.matvec(z)
        .iter()
        .zip(z)
        .map(|(a, b)| (a - sigma * b).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseInfo {
    /// Number of eigenvalues with real part below `-INDEX_TOL`.
    pub index: usize,
    /// Smallest real part.
    pub tau0: f64,
    /// Number of eigenvalues with `|Re| < INDEX_TOL`.
    pub critical: usize,
}

/// Morse index of a linearization in the convention where stability means
/// every eigenvalue has positive real part.
pub fn morse_index(m: &Mat<f64>) -> Result<MorseInfo> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument("Morse index of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("Morse index of an empty matrix".into()));
    }
    let finite = (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()));
    if !finite {
        return Err(Error::EigensolveFailed);
    }
    let eig = m.eigenvalues().map_err(|_| Error::EigensolveFailed)?;
    let mut index = 0;
    let mut critical = 0;
    let mut tau0 = f64::INFINITY;
    for z in eig.iter() {
        if !z.re.is_finite() {
            return Err(Error::EigensolveFailed);
        }
        if z.re < -INDEX_TOL {
            index += 1;
        } else if z.re < INDEX_TOL {
            critical += 1;
        }
        tau0 = tau0.min(z.re);
    }
    Ok(MorseInfo { index, tau0, critical })
}

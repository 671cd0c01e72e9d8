//! Threshold curves in the `(λ, μ)` plane and the coexistence wedge.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::sigma0;
use rayon::prelude::*;
use serde::Serialize;

pub const BISECTION_TOL: f64 = 1e-9;
pub const MAX_BISECTION_ITER: usize = 200;

/// `Φ(μ) = σ₀[L₁ + b θ₂]`.
pub fn capital_phi(mu: f64, model: &Model) -> Result<f64> {
    let theta2 = model.semitrivial_predator(mu)?;
    capital_phi_from(&theta2.z, model)
}

pub(crate) fn capital_phi_from(theta2: &[f64], model: &Model) -> Result<f64> {
    let pot: Vec<f64> = model.b().iter().zip(theta2).map(|(b, t)| b * t).collect();
    sigma0(model.op1(), &pot)
}

/// `φ₀(μ) = σ₀[L₁ + (1 − χ_{int supp m}) b θ₂]`.
pub fn phi_zero(mu: f64, model: &Model) -> Result<f64> {
    let theta2 = model.semitrivial_predator(mu)?;
    let pot: Vec<f64> = (0..theta2.z.len())
        .map(|i| (1.0 - model.chi()[i]) * model.b()[i] * theta2.z[i])
        .collect();
    sigma0(model.op1(), &pot)
}

fn g_map(lambda: f64, eps: f64, theta2: &[f64], model: &Model) -> Result<f64> {
    let theta1 = model.semitrivial_prey(lambda, eps)?;
    let pot: Vec<f64> = (0..theta2.len())
        .map(|i| model.b()[i] * theta2[i] / (1.0 + model.m()[i] * theta1.z[i]))
        .collect();
    sigma0(model.op1(), &pot)
}

/// `φ_ε(μ)`: the fixed point `λ = σ₀[L₁ + b θ₂ / (1 + m θ_[L₁,λ,εa])]`,
/// located by bisection on `[σ₀,₁, Φ(μ)]`.
pub fn phi_eps(mu: f64, eps: f64, model: &Model) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let theta2 = model.semitrivial_predator(mu)?;
    let phi = capital_phi_from(&theta2.z, model)?;
    let mut lo = model.sigma01();
    let mut hi = phi;
    if hi - lo <= BISECTION_TOL {
        return Ok(hi);
    }
    let slack = 1e-10 * hi.abs().max(1.0);
    let h = |l: f64| g_map(l, eps, &theta2.z, model).map(|g| g - l);
    let h_lo = h(lo)?;
    let h_hi = h(hi)?;
    if h_lo < -slack || h_hi > slack {
        return Err(Error::WedgeUndefined(format!(
            "no sign change of g(λ) − λ on [{lo}, {hi}]: {h_lo:.3e}, {h_hi:.3e}"
        )));
    }
    if h_hi >= 0.0 {
        return Ok(hi);
    }
    for _ in 0..MAX_BISECTION_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Ψ_ε(λ) = σ₀[L₂ − ε c θ₁ / (1 + m θ₁)]` with `θ₁ = θ_[L₁,λ,εa]`.
pub fn psi_eps(lambda: f64, eps: f64, model: &Model) -> Result<f64> {
    let theta1 = model.semitrivial_prey(lambda, eps)?;
    let pot: Vec<f64> = (0..theta1.z.len())
        .map(|i| {
            let t = theta1.z[i];
            -eps * model.c()[i] * t / (1.0 + model.m()[i] * t)
        })
        .collect();
    sigma0(model.op2(), &pot)
}

/// `Ψ₀(λ) = σ₀[L₂ − (1 − χ_{int supp m}) c θ_[L₁,λ,a]]`.
pub fn psi_zero(lambda: f64, model: &Model) -> Result<f64> {
    let theta1 = model.semitrivial_prey(lambda, 1.0)?;
    let pot: Vec<f64> = (0..theta1.z.len())
        .map(|i| -(1.0 - model.chi()[i]) * model.c()[i] * theta1.z[i])
        .collect();
    sigma0(model.op2(), &pot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NoCoexistence,
    Guaranteed,
    Indeterminate,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::NoCoexistence => "no_coexistence",
            Region::Guaranteed => "guaranteed",
            Region::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgePoint {
    pub lambda: f64,
    pub mu: f64,
    pub region: Region,
}

/// Classifies one point given the curve values (`None` when undefined).
pub fn classify(lambda: f64, mu: f64, phi: Option<f64>, phi_eps: Option<f64>, psi_eps: Option<f64>) -> Region {
    if let (Some(phi), Some(psi)) = (phi, psi_eps) {
        if lambda > phi && mu > psi {
            return Region::Guaranteed;
        }
    }
    if psi_eps.is_some_and(|psi| mu <= psi) || phi_eps.is_some_and(|p| lambda <= p) {
        return Region::NoCoexistence;
    }
    Region::Indeterminate
}

/// Classifies a uniform `resolution.0 × resolution.1` grid of
/// `(λ, μ)` points, row-major in `μ`.
pub fn wedge_scan(
    lambda_range: (f64, f64),
    mu_range: (f64, f64),
    eps: f64,
    model: &Model,
    resolution: (usize, usize),
) -> Result<Vec<WedgePoint>> {
    let (nl, nm) = resolution;
    if nl == 0 || nm == 0 {
        return Err(Error::InvalidArgument("wedge resolution must be positive".into()));
    }
    let axis = |(lo, hi): (f64, f64), k: usize| -> Vec<f64> {
        if k == 1 {
            vec![lo]
        } else {
            (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
        }
    };
    let lambdas = axis(lambda_range, nl);
    let mus = axis(mu_range, nm);

    let psi: Vec<Option<f64>> = lambdas.par_iter().map(|&l| psi_eps(l, eps, model).ok()).collect();
    let mu_curves: Vec<(Option<f64>, Option<f64>)> = mus
        .par_iter()
        .map(|&mu| (capital_phi(mu, model).ok(), phi_eps(mu, eps, model).ok()))
        .collect();

    let mut out = Vec::with_capacity(nl * nm);
    for (j, &mu) in mus.iter().enumerate() {
        let (phi, phi_e) = mu_curves[j];
        for (i, &lambda) in lambdas.iter().enumerate() {
            out.push(WedgePoint {
                lambda,
                mu,
                region: classify(lambda, mu, phi, phi_e, psi[i]),
            });
        }
    }
    Ok(out)
}

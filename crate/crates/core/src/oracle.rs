//! Closed-form constant states of the constant-coefficient Neumann model
//! (`m ≡ 1`, no drift, no potential). Positive constant states `(w, v)`
//! correspond to positive roots of the cubic
//!
//! ```text
//! P(w) = w³ + (2 − λ/(εa)) w² + (1 + bc/(ad) + (bμ − 2dλ)/(εad)) w + (bμ − dλ)/(εad)
//! ```
//!
//! with `λ − εaw > 0`, and `v = (1 + w)(λ − εaw)/b`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Roots closer than this are reported as one multiple root.
pub const MULTIPLE_ROOT_TOL: f64 = 1e-8;
/// Strict margin for `λ − εaw > 0` and `w > 0`.
pub const ADMISSIBLE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mu: f64,
}

impl ConstParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, mu: f64) -> Result<Self> {
        let p = ConstParams { a, b, c, d, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("mu", self.mu),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `Φ(μ) = bμ/d`.
    pub fn capital_phi(&self) -> f64 {
        self.b * self.mu / self.d
    }

    /// `ε* = bμ/(bc + ad)`.
    pub fn eps_star(&self) -> f64 {
        self.b * self.mu / (self.b * self.c + self.a * self.d)
    }
}

/// `(c2, c1, c0)` of the monic cubic.
pub fn cubic_coeffs(lambda: f64, eps: f64, p: &ConstParams) -> Result<(f64, f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let ConstParams { a, b, c, d, mu } = *p;
    let c2 = 2.0 - lambda / (eps * a);
    let c1 = 1.0 + b * c / (a * d) + (b * mu - 2.0 * d * lambda) / (eps * a * d);
    let c0 = (b * mu - d * lambda) / (eps * a * d);
    Ok((c2, c1, c0))
}

pub fn eval_cubic(c2: f64, c1: f64, c0: f64, w: f64) -> f64 {
    ((w + c2) * w + c1) * w + c0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub w: f64,
    pub multiplicity: usize,
}

/// Real roots of `w³ + c2 w² + c1 w + c0`, sorted, with coincident roots
/// merged.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> Vec<Root> {
    let mut raw = raw_cubic_roots(c2, c1, c0);
    for r in raw.iter_mut() {
        *r = polish(c2, c1, c0, *r);
    }
    raw.sort_by(|x, y| x.total_cmp(y));
    let mut out: Vec<Root> = Vec::new();
    for r in raw {
        match out.last_mut() {
            Some(last) if (r - last.w).abs() <= MULTIPLE_ROOT_TOL * last.w.abs().max(1.0) => {
                last.multiplicity += 1;
            }
            _ => out.push(Root { w: r, multiplicity: 1 }),
        }
    }
    out
}

fn raw_cubic_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let q = (c2 * c2 - 3.0 * c1) / 9.0;
    let r = (2.0 * c2 * c2 * c2 - 9.0 * c2 * c1 + 27.0 * c0) / 54.0;
    let q3 = q * q * q;
    if r * r < q3 {
        let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
        let s = -2.0 * q.sqrt();
        let tau = 2.0 * std::f64::consts::PI;
        return vec![
            s * (theta / 3.0).cos() - c2 / 3.0,
            s * ((theta + tau) / 3.0).cos() - c2 / 3.0,
            s * ((theta - tau) / 3.0).cos() - c2 / 3.0,
        ];
    }
    let big_a = -r.signum() * (r.abs() + (r * r - q3).sqrt()).cbrt();
    let big_b = if big_a != 0.0 { q / big_a } else { 0.0 };
    let x = polish(c2, c1, c0, big_a + big_b - c2 / 3.0);
    // deflate: w³ + c2 w² + c1 w + c0 = (w − x)(w² + p w + s)
    let p = c2 + x;
    let s = c1 + x * p;
    let disc = p * p - 4.0 * s;
    let scale = (p * p).max(s.abs()).max(1.0);
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let y1 = -0.5 * (p + p.signum() * sq);
        let y2 = if y1 != 0.0 { s / y1 } else { 0.0 };
        vec![x, y1, y2]
    } else if disc >= -1e-14 * scale {
        vec![x, -0.5 * p, -0.5 * p]
    } else {
        vec![x]
    }
}

fn polish(c2: f64, c1: f64, c0: f64, mut w: f64) -> f64 {
    let mut fw = eval_cubic(c2, c1, c0, w);
    for _ in 0..4 {
        let dfw = (3.0 * w + 2.0 * c2) * w + c1;
        if dfw == 0.0 || fw == 0.0 {
            break;
        }
        let next = w - fw / dfw;
        let fnext = eval_cubic(c2, c1, c0, next);
        if fnext.abs() < fw.abs() {
            w = next;
            fw = fnext;
        } else {
            break;
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Zero,
    One,
    Two,
    Three,
}

impl Regime {
    pub fn from_count(n: usize) -> Regime {
        match n {
            0 => Regime::Zero,
            1 => Regime::One,
            2 => Regime::Two,
            _ => Regime::Three,
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Regime::Zero => 0,
            Regime::One => 1,
            Regime::Two => 2,
            Regime::Three => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootInfo {
    pub w: f64,
    pub multiplicity: usize,
    pub positive: bool,
    /// `λ − εaw > margin`.
    pub admissible: bool,
    /// Within the margin of `w = 0` or `λ − εaw = 0`.
    pub critical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub lambda: f64,
    pub eps: f64,
    /// Admissible positive states `(w, v)` in increasing `w`.
    pub states: Vec<(f64, f64)>,
    pub roots_all: Vec<RootInfo>,
    pub regime: Regime,
    pub phi: f64,
    pub eps_star: f64,
}

pub fn constant_states(lambda: f64, eps: f64, p: &ConstParams) -> Result<OracleResult> {
    p.validate()?;
    let (c2, c1, c0) = cubic_coeffs(lambda, eps, p)?;
    let mut roots_all = Vec::new();
    let mut states = Vec::new();
    for r in cubic_roots(c2, c1, c0) {
        let slack = lambda - eps * p.a * r.w;
        let positive = r.w > ADMISSIBLE_MARGIN;
        let admissible = slack > ADMISSIBLE_MARGIN;
        let critical = r.w.abs() <= ADMISSIBLE_MARGIN || slack.abs() <= ADMISSIBLE_MARGIN;
        if positive && admissible {
            states.push((r.w, (1.0 + r.w) * slack / p.b));
        }
        roots_all.push(RootInfo {
            w: r.w,
            multiplicity: r.multiplicity,
            positive,
            admissible,
            critical,
        });
    }
    Ok(OracleResult {
        lambda,
        eps,
        regime: Regime::from_count(states.len()),
        states,
        roots_all,
        phi: p.capital_phi(),
        eps_star: p.eps_star(),
    })
}

/// Residuals of the two constant-state equations
/// `λ − εaw − bv/(1+w) = 0` and `μ − dv + εcw/(1+w) = 0`.
pub fn constant_residuals(lambda: f64, eps: f64, p: &ConstParams, w: f64, v: f64) -> (f64, f64) {
    (
        lambda - eps * p.a * w - p.b * v / (1.0 + w),
        p.mu - p.d * v + eps * p.c * w / (1.0 + w),
    )
}

/// The `ε = 0` constant state `(bμ/(dλ) − 1, μ/d)`, defined for
/// `0 < λ < Φ(μ)`.
pub fn constant_state_eps0(lambda: f64, p: &ConstParams) -> Option<(f64, f64)> {
    if lambda > 0.0 && lambda < p.capital_phi() {
        Some((p.b * p.mu / (p.d * lambda) - 1.0, p.mu / p.d))
    } else {
        None
    }
}

/// `ε*(λ) = (2dλ − bμ)/(bc + ad)`.
pub fn eps_star_lambda(lambda: f64, p: &ConstParams) -> f64 {
    (2.0 * p.d * lambda - p.b * p.mu) / (p.b * p.c + p.a * p.d)
}

/// Roots of the quadratic factor of `P` at `λ = Φ(μ)`:
/// `w± = λ/(2εa) − 1 ± √(λ² − 4ε²abc/d) / (2εa)`.
pub fn q_roots(lambda: f64, eps: f64, p: &ConstParams) -> Option<(f64, f64)> {
    let disc = lambda * lambda - 4.0 * eps * eps * p.a * p.b * p.c / p.d;
    if disc < 0.0 || !(eps > 0.0) {
        return None;
    }
    let center = lambda / (2.0 * eps * p.a) - 1.0;
    let half = disc.sqrt() / (2.0 * eps * p.a);
    Some((center - half, center + half))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsOrdering {
    Below,
    Equal,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub result: OracleResult,
    /// `ε < min{λ/(2a), ε*(λ)}`.
    pub uniqueness_condition: bool,
    /// `bc > ad`.
    pub s_shape_possible: bool,
    pub eps_vs_star: EpsOrdering,
    pub lambda_above_phi: bool,
}

pub fn regime_classify(lambda: f64, eps: f64, p: &ConstParams) -> Result<Classification> {
    let result = if lambda <= 0.0 {
        OracleResult {
            lambda,
            eps,
            states: Vec::new(),
            roots_all: Vec::new(),
            regime: Regime::Zero,
            phi: p.capital_phi(),
            eps_star: p.eps_star(),
        }
    } else {
        constant_states(lambda, eps, p)?
    };
    let es = p.eps_star();
    let eps_vs_star = if (eps - es).abs() <= 1e-14 * es {
        EpsOrdering::Equal
    } else if eps < es {
        EpsOrdering::Below
    } else {
        EpsOrdering::Above
    };
    Ok(Classification {
        uniqueness_condition: eps < (lambda / (2.0 * p.a)).min(eps_star_lambda(lambda, p)),
        s_shape_possible: p.b * p.c > p.a * p.d,
        eps_vs_star,
        lambda_above_phi: lambda > p.capital_phi(),
        result,
    })
}

/// Discriminant of `w³ + c2 w² + c1 w + c0`; zero exactly at multiple roots.
pub fn cubic_discriminant(c2: f64, c1: f64, c0: f64) -> f64 {
    18.0 * c2 * c1 * c0 - 4.0 * c2.powi(3) * c0 + c2 * c2 * c1 * c1 - 4.0 * c1.powi(3) - 27.0 * c0 * c0
}

/// Values of `λ` in `(lo, hi)` where `P` has an admissible positive double
/// root, i.e. folds of the constant-state curve, located by a sign sweep of
/// the discriminant followed by bisection.
pub fn fold_lambdas(eps: f64, p: &ConstParams, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>> {
    let disc = |l: f64| -> Result<f64> {
        let (c2, c1, c0) = cubic_coeffs(l, eps, p)?;
        Ok(cubic_discriminant(c2, c1, c0))
    };
    let samples = samples.max(2);
    let mut folds = Vec::new();
    let mut l0 = lo;
    let mut d0 = disc(l0)?;
    for k in 1..=samples {
        let l1 = lo + (hi - lo) * k as f64 / samples as f64;
        let d1 = disc(l1)?;
        if d0 == 0.0 || d0.signum() != d1.signum() {
            let (mut a, mut b, mut da) = (l0, l1, d0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let dm = disc(m)?;
                if dm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if dm.signum() == da.signum() {
                    a = m;
                    da = dm;
                } else {
                    b = m;
                }
                if b - a <= 1e-15 * m.abs().max(1.0) {
                    break;
                }
            }
            let lam = 0.5 * (a + b);
            let (c2, c1, c0) = cubic_coeffs(lam, eps, p)?;
            // the double root is a critical point of P: 3w² + 2c2 w + c1 = 0
            let dd = c2 * c2 - 3.0 * c1;
            if dd >= 0.0 {
                let crit = [(-c2 - dd.sqrt()) / 3.0, (-c2 + dd.sqrt()) / 3.0];
                let w = crit
                    .iter()
                    .copied()
                    .min_by(|x, y| {
                        eval_cubic(c2, c1, c0, *x)
                            .abs()
                            .total_cmp(&eval_cubic(c2, c1, c0, *y).abs())
                    })
                    .unwrap_or(f64::NAN);
                if w > ADMISSIBLE_MARGIN && lam - eps * p.a * w > ADMISSIBLE_MARGIN {
                    folds.push(lam);
                }
            }
        }
        l0 = l1;
        d0 = d1;
    }
    Ok(folds)
}

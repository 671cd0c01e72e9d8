//! Coefficients and operators of the rescaled predator-prey system
//!
//! ```text
//! L₁ w = λ w − ε a w² − b w v / (1 + m w)
//! L₂ v = μ v − d v² + ε c w v / (1 + m w)
//! ```
//!
//! together with its semitrivial states.

use crate::error::{Error, Result};
use crate::grid::{
    assemble_operator, build_grid, make_coefficient, BoundarySpec, CoefficientField, CoefficientSpec, EllipticOperator,
    Grid,
};
use crate::logistic::{theta_from_eigen, ThetaSolution};
use crate::spectral::{principal_eigen, EigenPair};
use serde::{Deserialize, Serialize};

/// Threshold defining the interior of the support of `m` on the grid.
pub const M_TOL: f64 = 1e-12;

/// Description of one elliptic operator `-(A w')' + drift w' + c0 w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default = "unit")]
    pub diffusion: CoefficientSpec,
    #[serde(default = "zero")]
    pub drift: CoefficientSpec,
    #[serde(default = "zero")]
    pub potential: CoefficientSpec,
    pub boundary: BoundarySpec,
}

fn unit() -> CoefficientSpec {
    CoefficientSpec::Constant(1.0)
}

fn zero() -> CoefficientSpec {
    CoefficientSpec::Constant(0.0)
}

impl OperatorSpec {
    pub fn laplacian(boundary: BoundarySpec) -> Self {
        OperatorSpec {
            diffusion: unit(),
            drift: zero(),
            potential: zero(),
            boundary,
        }
    }

    pub fn assemble(&self, grid: &Grid) -> Result<EllipticOperator> {
        assemble_operator(
            &make_coefficient(&self.diffusion, grid)?,
            &make_coefficient(&self.drift, grid)?,
            &make_coefficient(&self.potential, grid)?,
            self.boundary,
            grid,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    #[serde(default)]
    pub x_lo: f64,
    #[serde(default = "one_f64")]
    pub x_hi: f64,
    pub prey: OperatorSpec,
    pub predator: OperatorSpec,
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
    pub d: CoefficientSpec,
    pub m: CoefficientSpec,
}

fn one_f64() -> f64 {
    1.0
}

impl ModelSpec {
    /// Constant coefficients with Neumann conditions, unit diffusion and
    /// `m ≡ 1` on `(0, 1)`.
    pub fn constant_neumann(n: usize, a: f64, b: f64, c: f64, d: f64) -> Self {
        let neumann = OperatorSpec::laplacian(BoundarySpec::neumann());
        ModelSpec {
            n,
            x_lo: 0.0,
            x_hi: 1.0,
            prey: neumann.clone(),
            predator: neumann,
            a: CoefficientSpec::Constant(a),
            b: CoefficientSpec::Constant(b),
            c: CoefficientSpec::Constant(c),
            d: CoefficientSpec::Constant(d),
            m: CoefficientSpec::Constant(1.0),
        }
    }

    pub fn build(&self) -> Result<Model> {
        let grid = build_grid(self.n, self.x_lo, self.x_hi)?;
        let op1 = self.prey.assemble(&grid)?;
        let op2 = self.predator.assemble(&grid)?;
        let f = |s: &CoefficientSpec| make_coefficient(s, &grid);
        Model::new(
            op1,
            op2,
            f(&self.a)?,
            f(&self.b)?,
            f(&self.c)?,
            f(&self.d)?,
            f(&self.m)?,
        )
    }
}

/// Assembled model with cached principal eigenpairs of `L₁` and `L₂`.
#[derive(Debug, Clone)]
pub struct Model {
    grid: Grid,
    op1: EllipticOperator,
    op2: EllipticOperator,
    a: CoefficientField,
    b: CoefficientField,
    c: CoefficientField,
    d: CoefficientField,
    m: CoefficientField,
    chi: Vec<f64>,
    eig1: EigenPair,
    eig2: EigenPair,
}

impl Model {
    /// Validates the coefficients and rescales `m` to unit maximum.
    pub fn new(
        op1: EllipticOperator,
        op2: EllipticOperator,
        a: CoefficientField,
        b: CoefficientField,
        c: CoefficientField,
        d: CoefficientField,
        m: CoefficientField,
    ) -> Result<Model> {
        let grid = *op1.grid();
        if op2.grid() != &grid {
            return Err(Error::InvalidArgument(
                "prey and predator operators live on different grids".into(),
            ));
        }
        a.require_positive("a")?;
        d.require_positive("d")?;
        b.require_nonnegative("b")?;
        c.require_nonnegative("c")?;
        m.require_nonnegative("m")?;
        if b.is_zero() {
            log::warn!("b vanishes identically: the prey does not feel the predator");
        }
        if c.is_zero() {
            log::warn!("c vanishes identically: the predator does not feel the prey");
        }
        let m_max = m.max();
        let m = if m_max > 0.0 && m_max != 1.0 {
            log::warn!("m rescaled by 1/{m_max} to unit maximum");
            m.scaled(1.0 / m_max)
        } else {
            m
        };
        let chi = m.values().iter().map(|v| if *v > M_TOL { 1.0 } else { 0.0 }).collect();
        let zero = vec![0.0; grid.len()];
        let eig1 = principal_eigen(&op1, &zero)?;
        let eig2 = principal_eigen(&op2, &zero)?;
        Ok(Model {
            grid,
            op1,
            op2,
            a,
            b,
            c,
            d,
            m,
            chi,
            eig1,
            eig2,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn op1(&self) -> &EllipticOperator {
        &self.op1
    }

    pub fn op2(&self) -> &EllipticOperator {
        &self.op2
    }

    pub fn a(&self) -> &[f64] {
        self.a.values()
    }

    pub fn b(&self) -> &[f64] {
        self.b.values()
    }

    pub fn c(&self) -> &[f64] {
        self.c.values()
    }

    pub fn d(&self) -> &[f64] {
        self.d.values()
    }

    pub fn m(&self) -> &[f64] {
        self.m.values()
    }

    /// Indicator of `int supp m` at the nodes.
    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn sigma01(&self) -> f64 {
        self.eig1.sigma0
    }

    pub fn sigma02(&self) -> f64 {
        self.eig2.sigma0
    }

    pub fn eigen1(&self) -> &EigenPair {
        &self.eig1
    }

    pub fn eigen2(&self) -> &EigenPair {
        &self.eig2
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.grid.len()]
    }

    /// `θ_[L₁, λ, εa]`.
    pub fn semitrivial_prey(&self, lambda: f64, eps: f64) -> Result<ThetaSolution> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        let xi: Vec<f64> = self.a().iter().map(|a| eps * a).collect();
        theta_from_eigen(&self.op1, &self.zeros(), lambda, &xi, self.eig1.sigma0, &self.eig1.phi)
    }

    /// `θ_[L₂, μ, d]`.
    pub fn semitrivial_predator(&self, mu: f64) -> Result<ThetaSolution> {
        theta_from_eigen(&self.op2, &self.zeros(), mu, self.d(), self.eig2.sigma0, &self.eig2.phi)
    }
}

/// `θ_[L₁, λ, εa]` for an assembled model.
pub fn semitrivial_prey(lambda: f64, eps: f64, model: &Model) -> Result<ThetaSolution> {
    model.semitrivial_prey(lambda, eps)
}

/// `θ_[L₂, μ, d]` for an assembled model.
pub fn semitrivial_predator(mu: f64, model: &Model) -> Result<ThetaSolution> {
    model.semitrivial_predator(mu)
}

//! Uniform 1-D grids, coefficient fields and the finite-difference
//! discretization of `-(A w')' + drift w' + c0 w` with Dirichlet or Robin
//! boundary rows.
//!
//! Node vectors always have length `n + 2` and include both endpoints.
//! Endpoints carrying a Dirichlet condition are fixed at zero and excluded
//! from the unknowns; Robin endpoints are unknowns, with the ghost value
//! eliminated through the boundary condition. The set of unknown nodes is
//! the operator's *active range*.

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use serde::{Deserialize, Serialize};

pub const MIN_INTERIOR_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    x_lo: f64,
    x_hi: f64,
    h: f64,
}

impl Grid {
    pub fn new(n: usize, x_lo: f64, x_hi: f64) -> Result<Grid> {
        if n < MIN_INTERIOR_NODES {
            return Err(Error::GridTooCoarse(n));
        }
        if !(x_lo < x_hi) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::DegenerateInterval { lo: x_lo, hi: x_hi });
        }
        Ok(Grid {
            n,
            x_lo,
            x_hi,
            h: (x_hi - x_lo) / (n + 1) as f64,
        })
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored nodes, endpoints included.
    pub fn len(&self) -> usize {
        self.n + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n + 1 {
            self.x_hi
        } else {
            self.x_lo + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Dirichlet,
    /// `∂_ν w + β w = 0` with co-normal `ν = A n`.
    Robin(f64),
}

impl BoundaryKind {
    pub fn neumann() -> Self {
        BoundaryKind::Robin(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub lo: BoundaryKind,
    pub hi: BoundaryKind,
}

impl BoundarySpec {
    pub fn dirichlet() -> Self {
        BoundarySpec {
            lo: BoundaryKind::Dirichlet,
            hi: BoundaryKind::Dirichlet,
        }
    }

    pub fn neumann() -> Self {
        BoundarySpec {
            lo: BoundaryKind::neumann(),
            hi: BoundaryKind::neumann(),
        }
    }

    pub fn robin(beta_lo: f64, beta_hi: f64) -> Self {
        BoundarySpec {
            lo: BoundaryKind::Robin(beta_lo),
            hi: BoundaryKind::Robin(beta_hi),
        }
    }
}

/// Constructor descriptor for a coefficient field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant(f64),
    /// `left` for `x < x_jump`, `right` for `x >= x_jump`.
    Step {
        left: f64,
        right: f64,
        x_jump: f64,
    },
    /// `floor + height * cos²(π (x - center) / (2 width))` on
    /// `|x - center| < width`, `floor` elsewhere.
    Bump {
        center: f64,
        width: f64,
        height: f64,
        floor: f64,
    },
    /// Samples at all `n + 2` nodes, or a uniform table on `[x_lo, x_hi]`
    /// that is linearly interpolated.
    Table(Vec<f64>),
    Sum(Vec<CoefficientSpec>),
}

impl CoefficientSpec {
    fn eval(&self, grid: &Grid, i: usize) -> f64 {
        let x = grid.x(i);
        match self {
            CoefficientSpec::Constant(v) => *v,
            CoefficientSpec::Step { left, right, x_jump } => {
                if x < *x_jump {
                    *left
                } else {
                    *right
                }
            }
            CoefficientSpec::Bump {
                center,
                width,
                height,
                floor,
            } => {
                let r = (x - center).abs();
                if r < *width {
                    let c = (std::f64::consts::FRAC_PI_2 * r / width).cos();
                    floor + height * c * c
                } else {
                    *floor
                }
            }
            CoefficientSpec::Table(values) => {
                if values.len() == grid.len() {
                    values[i]
                } else if values.len() == 1 {
                    values[0]
                } else {
                    let t = (x - grid.x_lo()) / (grid.x_hi() - grid.x_lo()) * (values.len() - 1) as f64;
                    let k = (t.floor() as usize).min(values.len() - 2);
                    let frac = t - k as f64;
                    values[k] * (1.0 - frac) + values[k + 1] * frac
                }
            }
            CoefficientSpec::Sum(parts) => parts.iter().map(|p| p.eval(grid, i)).sum(),
        }
    }
}

/// Samples of a spatial coefficient at every node (endpoints included).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    values: Vec<f64>,
    spec: CoefficientSpec,
}

impl CoefficientField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &CoefficientSpec {
        &self.spec
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn require_nonnegative(&self, role: &str) -> Result<()> {
        match self.values.iter().position(|v| *v < 0.0) {
            Some(i) => Err(Error::InvalidCoefficient {
                role: role.to_string(),
                reason: format!("negative value {} at node {i}", self.values[i]),
            }),
            None => Ok(()),
        }
    }

    pub fn require_positive(&self, role: &str) -> Result<()> {
        match self.values.iter().position(|v| *v <= 0.0) {
            Some(i) => Err(Error::InvalidCoefficient {
                role: role.to_string(),
                reason: format!("non-positive value {} at node {i}", self.values[i]),
            }),
            None => Ok(()),
        }
    }

    pub(crate) fn scaled(&self, factor: f64) -> CoefficientField {
        CoefficientField {
            values: self.values.iter().map(|v| v * factor).collect(),
            spec: CoefficientSpec::Table(self.values.iter().map(|v| v * factor).collect()),
        }
    }
}

pub fn make_coefficient(spec: &CoefficientSpec, grid: &Grid) -> Result<CoefficientField> {
    if let CoefficientSpec::Table(v) = spec {
        if v.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient table".into()));
        }
    }
    if let CoefficientSpec::Bump { width, .. } = spec {
        if !(*width > 0.0) {
            return Err(Error::InvalidArgument("bump width must be positive".into()));
        }
    }
    let values: Vec<f64> = (0..grid.len()).map(|i| spec.eval(grid, i)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite coefficient sample at node {i}"
        )));
    }
    Ok(CoefficientField {
        values,
        spec: spec.clone(),
    })
}

/// Builds a field from explicit node samples.
pub fn field_from_values(values: Vec<f64>, grid: &Grid) -> Result<CoefficientField> {
    make_coefficient(&CoefficientSpec::Table(values), grid)
}

/// Discretized elliptic operator. Row `i` of the active range reads
/// `lower[i] w[i-1] + diag[i] w[i] + upper[i] w[i+1]`.
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    grid: Grid,
    diffusion: CoefficientField,
    drift: CoefficientField,
    potential: CoefficientField,
    boundary: BoundarySpec,
    first: usize,
    last: usize,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    weights: Vec<f64>,
    upwind: bool,
}

pub fn assemble_operator(
    diffusion: &CoefficientField,
    drift: &CoefficientField,
    potential: &CoefficientField,
    boundary: BoundarySpec,
    grid: &Grid,
) -> Result<EllipticOperator> {
    let len = grid.len();
    for f in [diffusion, drift, potential] {
        if f.values().len() != len {
            return Err(Error::InvalidArgument(format!(
                "coefficient has {} samples, grid has {len} nodes",
                f.values().len()
            )));
        }
    }
    let a_min = diffusion.min();
    if !(a_min > 0.0) {
        return Err(Error::NonPositiveDiffusion(a_min));
    }
    let h = grid.h();
    let h2 = h * h;
    let a = diffusion.values();
    let b = drift.values();
    let c0 = potential.values();

    let peclet = b.iter().fold(0.0f64, |m, v| m.max(v.abs())) * h / (2.0 * a_min);
    let upwind = peclet >= 1.0;
    if upwind {
        log::warn!("cell Péclet number {peclet:.3} >= 1: drift discretized by first-order upwinding");
    }

    let mut lower = vec![0.0; len];
    let mut diag = vec![0.0; len];
    let mut upper = vec![0.0; len];

    for i in 1..=grid.n() {
        let am = 0.5 * (a[i - 1] + a[i]);
        let ap = 0.5 * (a[i] + a[i + 1]);
        lower[i] = -am / h2;
        upper[i] = -ap / h2;
        diag[i] = (am + ap) / h2 + c0[i];
        if upwind {
            if b[i] > 0.0 {
                diag[i] += b[i] / h;
                lower[i] -= b[i] / h;
            } else {
                diag[i] -= b[i] / h;
                upper[i] += b[i] / h;
            }
        } else {
            lower[i] -= b[i] / (2.0 * h);
            upper[i] += b[i] / (2.0 * h);
        }
    }

    // Robin ghost elimination; the outer half-cell diffusivity is the
    // linear extrapolation 2 A_0 - A_{1/2} (A_0 if that is not positive).
    let first = match boundary.lo {
        BoundaryKind::Dirichlet => 1,
        BoundaryKind::Robin(beta) => {
            let a_in = 0.5 * (a[0] + a[1]);
            let a_out = outer_half_cell(a[0], a_in);
            diag[0] = (a_in + a_out) / h2 + 2.0 * a_out * beta / (h * a[0]) + c0[0] + b[0] * beta / a[0];
            upper[0] = -(a_in + a_out) / h2;
            0
        }
    };
    let last = match boundary.hi {
        BoundaryKind::Dirichlet => grid.n(),
        BoundaryKind::Robin(beta) => {
            let k = grid.n() + 1;
            let a_in = 0.5 * (a[k - 1] + a[k]);
            let a_out = outer_half_cell(a[k], a_in);
            diag[k] = (a_in + a_out) / h2 + 2.0 * a_out * beta / (h * a[k]) + c0[k] - b[k] * beta / a[k];
            lower[k] = -(a_in + a_out) / h2;
            k
        }
    };
    if first == 1 {
        lower[1] = 0.0;
    }
    if last == grid.n() {
        upper[grid.n()] = 0.0;
    }

    let mut weights = vec![0.0; len];
    for (i, w) in weights.iter_mut().enumerate().take(last + 1).skip(first) {
        *w = if i == 0 || i == grid.n() + 1 { 0.5 * h } else { h };
    }

    Ok(EllipticOperator {
        grid: *grid,
        diffusion: diffusion.clone(),
        drift: drift.clone(),
        potential: potential.clone(),
        boundary,
        first,
        last,
        lower,
        diag,
        upper,
        weights,
        upwind,
    })
}

fn outer_half_cell(a_node: f64, a_in: f64) -> f64 {
    let ext = 2.0 * a_node - a_in;
    if ext > 0.0 {
        ext
    } else {
        a_node
    }
}

impl EllipticOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn diffusion(&self) -> &CoefficientField {
        &self.diffusion
    }

    pub fn drift(&self) -> &CoefficientField {
        &self.drift
    }

    pub fn potential(&self) -> &CoefficientField {
        &self.potential
    }

    pub fn uses_upwind(&self) -> bool {
        self.upwind
    }

    /// Inclusive range of unknown node indices.
    pub fn active(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn is_active(&self, i: usize) -> bool {
        i >= self.first && i <= self.last
    }

    pub fn active_len(&self) -> usize {
        self.last - self.first + 1
    }

    /// Trapezoidal quadrature weights; zero at Dirichlet endpoints.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Stencil `(lower, diag, upper)` of node `i`.
    pub fn stencil(&self, i: usize) -> (f64, f64, f64) {
        (self.lower[i], self.diag[i], self.upper[i])
    }

    /// Applies the operator to a full node vector; inactive entries of the
    /// result are zero.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let len = self.grid.len();
        let mut out = vec![0.0; len];
        for i in self.active() {
            let mut s = self.diag[i] * w[i];
            if i > self.first {
                s += self.lower[i] * w[i - 1];
            }
            if i < self.last {
                s += self.upper[i] * w[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Matrix of `L + diag(potential) + shift` on the active nodes.
    pub fn matrix_with(&self, potential: Option<&[f64]>, shift: f64) -> Tridiagonal {
        let r = self.active();
        let lower: Vec<f64> = r
            .clone()
            .map(|i| if i > self.first { self.lower[i] } else { 0.0 })
            .collect();
        let upper: Vec<f64> = r
            .clone()
            .map(|i| if i < self.last { self.upper[i] } else { 0.0 })
            .collect();
        let diag: Vec<f64> = r
            .map(|i| self.diag[i] + shift + potential.map_or(0.0, |p| p[i]))
            .collect();
        Tridiagonal::new(lower, diag, upper)
    }

    pub fn matrix(&self) -> Tridiagonal {
        self.matrix_with(None, 0.0)
    }

    /// Restricts a full node vector to the active nodes.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        full[self.first..=self.last].to_vec()
    }

    /// Extends an active-node vector to a full node vector (zeros at
    /// Dirichlet endpoints).
    pub fn extend(&self, active: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        out[self.first..=self.last].copy_from_slice(active);
        out
    }

    /// Off-diagonals non-positive and diagonal positive.
    pub fn has_m_matrix_pattern(&self) -> bool {
        let t = self.matrix();
        t.is_z_matrix() && t.diag.iter().all(|d| *d > 0.0)
    }

    /// A shift `e` with `L + e` strictly diagonally dominant; for a Z-matrix
    /// this guarantees `e > -σ₀`.
    pub fn dominant_shift(&self, potential: Option<&[f64]>) -> f64 {
        let margin = self.matrix_with(potential, 0.0).dominance_margin();
        (-margin).max(0.0) + 1.0
    }

    /// Solves `(L + V + e) z = rhs` and certifies inverse positivity.
    pub fn solve_shifted_with(&self, potential: Option<&[f64]>, e: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let t = self.matrix_with(potential, e);
        if !t.is_z_matrix() {
            return Err(Error::ShiftBelowPrincipal);
        }
        // A Z-matrix M with M z = 1 for some z > 0 is a nonsingular M-matrix.
        let ones = vec![1.0; t.len()];
        let cert = t.solve(&ones).map_err(|_| Error::ShiftBelowPrincipal)?;
        if cert.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::ShiftBelowPrincipal);
        }
        let z = t.solve(&self.restrict(rhs)).map_err(|_| Error::ShiftBelowPrincipal)?;
        Ok(self.extend(&z))
    }

    pub fn solve_shifted(&self, e: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_shifted_with(None, e, rhs)
    }

    /// Weighted inner product over the active nodes.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.active().map(|i| self.weights[i] * u[i] * v[i]).sum()
    }
}

pub fn solve_shifted(op: &EllipticOperator, e: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    op.solve_shifted(e, rhs)
}

pub fn build_grid(n: usize, x_lo: f64, x_hi: f64) -> Result<Grid> {
    Grid::new(n, x_lo, x_hi)
}

/// Operator with unit diffusion, no drift and no potential.
pub fn laplacian(grid: &Grid, boundary: BoundarySpec) -> Result<EllipticOperator> {
    let one = make_coefficient(&CoefficientSpec::Constant(1.0), grid)?;
    let zero = make_coefficient(&CoefficientSpec::Constant(0.0), grid)?;
    assemble_operator(&one, &zero, &zero, boundary, grid)
}

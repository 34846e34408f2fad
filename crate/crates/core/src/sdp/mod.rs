//! Small dense semidefinite programs over Hermitian blocks.
//!
//! A problem has PSD blocks `X_b`, linear equalities
//! `sum_b Re Tr(A_b X_b) = rhs`, and PSD-offset constraints
//! `K + sum_b c_b X_b >= 0` that are compiled to slack blocks. The user-facing
//! dual of a maximization reads `min b^T u  s.t.  sum_i u_i A_i - C >= 0`;
//! [`SdpSolution::dual_matrix`] rebuilds the matrix multiplier of a
//! matrix-valued equality group (the `Y` of the gambling dual).

mod dump;
mod ipm;
mod presolve;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use dump::write_triplets;

use crate::error::{invalid, Result};
use crate::quantum::{hermiticity_defect, hermitize, min_eigenvalue, CMatrix};

const COEFF_HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Stalled within a small multiple of the tolerances.
    NearOptimal,
    Infeasible,
    MaxIterations,
}

/// Certificate attached to an infeasible status.
#[derive(Clone, Debug)]
pub enum Infeasibility {
    /// Equalities are linearly inconsistent: `sum_i y_i A_i = 0` while
    /// `b^T y != 0`.
    InconsistentEqualities { y: Vec<f64> },
    /// Farkas ray for the equalities and PSD cones: `sum_i y_i A_i <= 0` and
    /// `b^T y > 0`.
    Primal { y: Vec<f64> },
    /// Improving ray of the primal cone: `A(X) = 0`, `X >= 0` and the
    /// objective strictly improves along `X` (the dual is infeasible).
    Dual { x: Vec<CMatrix> },
}

/// Hermitian matrix stored as full (both triangles) sparse triplets.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return invalid("coefficient matrices must be square");
        }
        let defect = hermiticity_defect(m);
        if defect > COEFF_HERMITIAN_TOL {
            return invalid(format!("coefficient matrix is not Hermitian (defect {defect:.3e})"));
        }
        let h = hermitize(m);
        let n = m.nrows();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = h[(i, j)];
                if v != Complex64::new(0.0, 0.0) {
                    entries.push((i, j, v));
                }
            }
        }
        Ok(Self { dim: n, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect(),
        }
    }

    /// Basis element `E` with `Re Tr(E X) = scale * Re X[r, c]`.
    pub fn re_entry(dim: usize, r: usize, c: usize, scale: f64) -> Self {
        assert!(r < dim && c < dim);
        let entries = if r == c {
            vec![(r, r, Complex64::new(scale, 0.0))]
        } else {
            vec![
                (r, c, Complex64::new(0.5 * scale, 0.0)),
                (c, r, Complex64::new(0.5 * scale, 0.0)),
            ]
        };
        Self::from_entries(dim, entries)
    }

    /// Basis element `E` with `Re Tr(E X) = scale * Im X[r, c]`, `r != c`.
    pub fn im_entry(dim: usize, r: usize, c: usize, scale: f64) -> Self {
        assert!(r < dim && c < dim && r != c);
        Self::from_entries(
            dim,
            vec![
                (r, c, Complex64::new(0.0, 0.5 * scale)),
                (c, r, Complex64::new(0.0, -0.5 * scale)),
            ],
        )
    }

    fn from_entries(dim: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        Self { dim, entries: merged }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_entries(
            self.dim,
            self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect(),
        )
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_entries(
            self.dim,
            self.entries.iter().chain(other.entries.iter()).copied().collect(),
        )
    }

    /// `Re Tr(self * x)`.
    pub fn inner(&self, x: &CMatrix) -> f64 {
        self.entries.iter().map(|&(r, c, v)| (v * x[(c, r)]).re).sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    fn is_real(&self) -> bool {
        self.entries.iter().all(|e| e.2.im == 0.0)
    }

    fn is_imaginary(&self) -> bool {
        self.entries.iter().all(|e| e.2.re == 0.0)
    }
}

/// Basis of Hermitian `dim x dim` matrices in the order used by matrix-valued
/// equality groups: row by row, the diagonal entry, then for each later
/// column the real and the imaginary part.
pub fn hermitian_basis(dim: usize) -> Vec<SparseHermitian> {
    let mut out = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        out.push(SparseHermitian::re_entry(dim, r, r, 1.0));
        for c in r + 1..dim {
            out.push(SparseHermitian::re_entry(dim, r, c, 1.0));
            out.push(SparseHermitian::im_entry(dim, r, c, 1.0));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub terms: Vec<(usize, SparseHermitian)>,
    pub rhs: f64,
}

/// `constant + sum_b coef_b * X_b >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdOffset {
    pub constant: CMatrix,
    pub terms: Vec<(usize, f64)>,
}

/// Handle to a contiguous group of equalities produced from one matrix
/// equation; see [`SdpSolution::dual_matrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixConstraint {
    pub first: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    sense: Sense,
    dims: Vec<usize>,
    objective: Vec<SparseHermitian>,
    objective_constant: f64,
    equalities: Vec<Equality>,
    offsets: Vec<PsdOffset>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            dims: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            equalities: Vec::new(),
            offsets: Vec::new(),
        }
    }

    pub fn add_block(&mut self, dim: usize) -> usize {
        assert!(dim > 0, "blocks need positive dimension");
        self.dims.push(dim);
        self.objective.push(SparseHermitian::zeros(dim));
        self.dims.len() - 1
    }

    pub fn set_objective(&mut self, block: usize, coefficient: &CMatrix) -> Result<()> {
        let sparse = SparseHermitian::from_dense(coefficient)?;
        self.set_objective_sparse(block, sparse)
    }

    pub fn set_objective_sparse(&mut self, block: usize, coefficient: SparseHermitian) -> Result<()> {
        self.check_block(block, coefficient.dim())?;
        self.objective[block] = coefficient;
        Ok(())
    }

    pub fn set_objective_constant(&mut self, value: f64) {
        self.objective_constant = value;
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, SparseHermitian)>, rhs: f64) -> Result<usize> {
        if !rhs.is_finite() {
            return invalid("equality right-hand side must be finite");
        }
        let mut merged: Vec<(usize, SparseHermitian)> = Vec::new();
        for (b, a) in terms {
            self.check_block(b, a.dim())?;
            match merged.iter_mut().find(|(mb, _)| *mb == b) {
                Some((_, acc)) => *acc = acc.plus(&a),
                None => merged.push((b, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        self.equalities.push(Equality { terms: merged, rhs });
        Ok(self.equalities.len() - 1)
    }

    /// `sum_b coef_b X_b = rhs` expanded over [`hermitian_basis`]; adds
    /// `dim^2` real equalities.
    pub fn add_matrix_equality(&mut self, terms: &[(usize, f64)], rhs: &CMatrix) -> Result<MatrixConstraint> {
        let dim = rhs.nrows();
        if hermiticity_defect(rhs) > COEFF_HERMITIAN_TOL {
            return invalid("matrix equality right-hand side must be Hermitian");
        }
        for &(b, _) in terms {
            self.check_block(b, dim)?;
        }
        let first = self.equalities.len();
        for e in hermitian_basis(dim) {
            let value = e.inner(rhs);
            let row = terms.iter().map(|&(b, coef)| (b, e.scaled(coef))).collect();
            self.add_equality(row, value)?;
        }
        Ok(MatrixConstraint { first, dim })
    }

    pub fn add_psd_offset(&mut self, constant: &CMatrix, terms: &[(usize, f64)]) -> Result<usize> {
        let dim = constant.nrows();
        if hermiticity_defect(constant) > COEFF_HERMITIAN_TOL {
            return invalid("PSD offset constant must be Hermitian");
        }
        if terms.is_empty() {
            return invalid("PSD offset needs at least one variable term");
        }
        for &(b, coef) in terms {
            self.check_block(b, dim)?;
            if !coef.is_finite() {
                return invalid("PSD offset coefficients must be finite");
            }
        }
        self.offsets.push(PsdOffset {
            constant: hermitize(constant),
            terms: terms.to_vec(),
        });
        Ok(self.offsets.len() - 1)
    }

    fn check_block(&self, block: usize, dim: usize) -> Result<()> {
        match self.dims.get(block) {
            None => invalid(format!("block {block} does not exist")),
            Some(&d) if d != dim => invalid(format!(
                "block {block} has dimension {d}, coefficient has dimension {dim}"
            )),
            Some(_) => Ok(()),
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn objective(&self, block: usize) -> &SparseHermitian {
        &self.objective[block]
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn offsets(&self) -> &[PsdOffset] {
        &self.offsets
    }

    /// User objective at the given block values.
    pub fn objective_value(&self, blocks: &[CMatrix]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(blocks)
                .map(|(c, x)| c.inner(x))
                .sum::<f64>()
    }

    /// Largest absolute equality residual at the given block values.
    pub fn equality_residual(&self, blocks: &[CMatrix]) -> f64 {
        self.equalities
            .iter()
            .map(|eq| {
                let lhs: f64 = eq.terms.iter().map(|(b, a)| a.inner(&blocks[*b])).sum();
                (lhs - eq.rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Value of every PSD-offset expression at the given block values.
    pub fn offset_expressions(&self, blocks: &[CMatrix]) -> Vec<CMatrix> {
        self.offsets
            .iter()
            .map(|o| {
                let mut m = o.constant.clone();
                for &(b, coef) in &o.terms {
                    m += &blocks[b] * Complex64::new(coef, 0.0);
                }
                m
            })
            .collect()
    }

    pub fn solve(&self, options: &SolverOptions) -> Result<SdpSolution> {
        options.validate()?;
        Ok(ipm::solve_problem(self, options))
    }
}

/// Builds and validates a problem in one call.
///
/// `blocks` are `(dimension, objective coefficient)`, `equalities` are
/// `(per-block coefficients, rhs)` and `offsets` are `(constant, terms)`.
pub fn assemble(
    blocks: Vec<(usize, CMatrix)>,
    equalities: Vec<(Vec<(usize, CMatrix)>, f64)>,
    offsets: Vec<(CMatrix, Vec<(usize, f64)>)>,
    sense: Sense,
) -> Result<SdpProblem> {
    if blocks.is_empty() {
        return invalid("an SDP needs at least one block");
    }
    let mut p = SdpProblem::new(sense);
    for (dim, obj) in &blocks {
        if *dim == 0 {
            return invalid("blocks need positive dimension");
        }
        let b = p.add_block(*dim);
        p.set_objective(b, obj)?;
    }
    for (terms, rhs) in equalities {
        let sparse = terms
            .iter()
            .map(|(b, a)| Ok((*b, SparseHermitian::from_dense(a)?)))
            .collect::<Result<Vec<_>>>()?;
        p.add_equality(sparse, rhs)?;
    }
    for (constant, terms) in offsets {
        p.add_psd_offset(&constant, &terms)?;
    }
    if p.equalities.is_empty() && p.offsets.is_empty() {
        // bounded over the bare PSD cone only if no direction improves
        for (dim, obj) in &blocks {
            let oriented = match sense {
                Sense::Maximize => obj.clone(),
                Sense::Minimize => -obj.clone(),
            };
            if *dim > 0 && -min_eigenvalue(&(-oriented)) > 0.0 {
                return invalid("unconstrained problem has an unbounded objective");
            }
        }
    }
    Ok(p)
}

/// Seam for delegating solves to another backend for cross-checks.
pub trait SdpBackend {
    fn solve(&self, problem: &SdpProblem, options: &SolverOptions) -> Result<SdpSolution>;
}

/// The built-in interior-point method.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl SdpBackend for InteriorPoint {
    fn solve(&self, problem: &SdpProblem, options: &SolverOptions) -> Result<SdpSolution> {
        problem.solve(options)
    }
}

/// Solves with explicit tolerances and the default iteration cap.
pub fn solve(problem: &SdpProblem, gap_tolerance: f64, residual_tolerance: f64) -> Result<SdpSolution> {
    problem.solve(&SolverOptions {
        gap_tolerance,
        residual_tolerance,
        ..SolverOptions::default()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub gap_tolerance: f64,
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    /// Solve over complex Hermitian blocks even when all data is real.
    pub force_complex: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-9,
            residual_tolerance: 1e-9,
            max_iterations: 200,
            force_complex: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            gap_tolerance: tol,
            residual_tolerance: tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gap_tolerance", self.gap_tolerance),
            ("residual_tolerance", self.residual_tolerance),
        ] {
            if !(v > 0.0 && v <= 1e-2) {
                return invalid(format!("{name} must lie in (0, 1e-2], got {v}"));
            }
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// User objective at the returned primal point.
    pub primal_value: f64,
    /// User dual objective `b^T u` (plus the objective constant).
    pub dual_value: f64,
    pub gap: f64,
    /// Euclidean norm of the equality residual over all user equalities.
    pub primal_residual: f64,
    /// Frobenius norm of the dual slack residual.
    pub dual_residual: f64,
    pub block_values: Vec<CMatrix>,
    /// Values of the PSD-offset expressions (slack blocks).
    pub offset_values: Vec<CMatrix>,
    /// PSD multipliers of the offset constraints.
    pub offset_duals: Vec<CMatrix>,
    /// Multipliers of the user equalities in the user sense.
    pub dual: Vec<f64>,
    /// Dual slack `sum_i u_i A_i - C` per user block (user sense).
    pub dual_slacks: Vec<CMatrix>,
    pub iterations: usize,
    pub infeasibility: Option<Infeasibility>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// `sum_k u_k E_k` over the equality group, `E_k` from [`hermitian_basis`].
    pub fn dual_matrix(&self, group: &MatrixConstraint) -> CMatrix {
        let mut y = CMatrix::zeros(group.dim, group.dim);
        for (k, e) in hermitian_basis(group.dim).iter().enumerate() {
            let u = self.dual[group.first + k];
            for &(r, c, v) in e.entries() {
                y[(r, c)] += v * u;
            }
        }
        y
    }
}

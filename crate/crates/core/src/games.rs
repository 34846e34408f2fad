//! The gambling game, weighted distinguishability and the bound `B_Q`.
//!
//! Alice receives `rho1` or `rho2` with equal probability and answers 1, 2 or
//! 3. A correct label pays 1, a wrong label costs `beta`, and answer 3 pays
//! `alpha`. With `C1 = rho1 - beta rho2`, `C2 = rho2 - beta rho1` and
//! `C3 = alpha (rho1 + rho2)` the optimal payoff is
//! `max 1/2 sum_i Tr(C_i M_i)` over three-outcome POVMs; the dual is
//! `min Tr Y` subject to `Y >= C_i / 2`.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{invalid, Error, Result};
use crate::quantum::{c, min_eigenvalue, mix, positive_part_trace, trace_re, CMatrix, DensityMatrix, Povm, PureState, WeightedState};
use crate::sdp::{MatrixConstraint, SdpProblem, Sense, SolverOptions};

const PURITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GameParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }

    /// Whether answer 3 is never worth using (`alpha <= (1 - beta)/2`).
    pub fn is_distinguishability_regime(&self) -> bool {
        self.alpha <= (1.0 - self.beta) / 2.0
    }
}

#[derive(Clone, Debug)]
pub struct GambleResult {
    pub value: f64,
    pub povm: Povm,
    pub dual_y: CMatrix,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dq: f64,
    pub dq_w1: f64,
    pub dq_w2: f64,
    pub s_gam: f64,
    pub s_comm_opt: f64,
    pub b_q: f64,
    pub omega_q: f64,
    pub omega_max: f64,
    pub advantage_margin: f64,
}

/// Cost matrices `C1, C2, C3` of the game.
pub fn cost_matrices(rho1: &CMatrix, rho2: &CMatrix, params: GameParams) -> [CMatrix; 3] {
    let (a, b) = (params.alpha, params.beta);
    [
        rho1 - rho2 * c(b, 0.0),
        rho2 - rho1 * c(b, 0.0),
        (rho1 + rho2) * c(a, 0.0),
    ]
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<usize> {
    if a.dim() != b.dim() {
        return invalid(format!("state dimensions differ: {} vs {}", a.dim(), b.dim()));
    }
    Ok(a.dim())
}

/// Gambling primal: three `d x d` blocks and the `d^2` real equalities of
/// `M1 + M2 + M3 = I`.
pub fn assemble_gambling(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    params: GameParams,
) -> Result<(SdpProblem, MatrixConstraint)> {
    params.validate()?;
    let d = same_dim(rho1, rho2)?;
    let mut p = SdpProblem::new(Sense::Maximize);
    let costs = cost_matrices(rho1.matrix(), rho2.matrix(), params);
    let mut terms = Vec::with_capacity(3);
    for cm in &costs {
        let b = p.add_block(d);
        p.set_objective(b, &(cm * c(0.5, 0.0)))?;
        terms.push((b, 1.0));
    }
    let group = p.add_matrix_equality(&terms, &CMatrix::identity(d, d))?;
    Ok((p, group))
}

pub fn gambling_value(rho1: &DensityMatrix, rho2: &DensityMatrix, params: GameParams) -> Result<GambleResult> {
    let tol = Tolerances::from_env();
    gambling_value_with(rho1, rho2, params, &SolverOptions::with_tolerance(tol.gap))
}

pub fn gambling_value_with(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    params: GameParams,
    options: &SolverOptions,
) -> Result<GambleResult> {
    let (p, group) = assemble_gambling(rho1, rho2, params)?;
    let sol = p.solve(options)?;
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: sol.status,
            gap: sol.gap,
            residual: sol.primal_residual.max(sol.dual_residual),
        });
    }
    let povm = Povm::from_approximate(sol.block_values.clone())?;
    Ok(GambleResult {
        value: sol.primal_value,
        povm,
        dual_y: sol.dual_matrix(&group),
        gap: sol.gap,
    })
}

/// Optimal payoff for identical inputs.
pub fn identical_state_value(params: GameParams) -> f64 {
    ((1.0 - params.beta) / 2.0).max(params.alpha)
}

/// SDP value of `max w1 p(1|rho1) + w2 p(2|rho2)` over binary POVMs.
pub fn weighted_distinguishability(a: &WeightedState, b: &WeightedState) -> Result<f64> {
    let d = same_dim(&a.state, &b.state)?;
    let mut p = SdpProblem::new(Sense::Maximize);
    let m1 = p.add_block(d);
    let m2 = p.add_block(d);
    p.set_objective(m1, &(a.state.matrix() * c(a.weight, 0.0)))?;
    p.set_objective(m2, &(b.state.matrix() * c(b.weight, 0.0)))?;
    p.add_matrix_equality(&[(m1, 1.0), (m2, 1.0)], &CMatrix::identity(d, d))?;
    let sol = p.solve(&SolverOptions::with_tolerance(Tolerances::from_env().gap))?;
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: sol.status,
            gap: sol.gap,
            residual: sol.primal_residual.max(sol.dual_residual),
        });
    }
    Ok(sol.primal_value)
}

/// Closed form `w2 + Tr(w1 rho1 - w2 rho2)_+`.
pub fn helstrom_oracle(a: &WeightedState, b: &WeightedState) -> Result<f64> {
    same_dim(&a.state, &b.state)?;
    weighted_closed_form(a.state.matrix(), a.weight, b.state.matrix(), b.weight)
}

/// Closed form allowing zero weights, where the value degenerates to the
/// other weight.
fn weighted_closed_form(r1: &CMatrix, w1: f64, r2: &CMatrix, w2: f64) -> Result<f64> {
    let h = r1 * c(w1, 0.0) - r2 * c(w2, 0.0);
    Ok(w2 + positive_part_trace(&h)?)
}

/// Equal-weight distinguishability `D_Q`.
pub fn distinguishability(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1, rho2)?;
    weighted_closed_form(rho1.matrix(), 0.5, rho2.matrix(), 0.5)
}

pub fn omega_q(rho1: &DensityMatrix, rho2: &DensityMatrix, params: GameParams) -> Result<f64> {
    Ok(2.0 * (1.0 - gambling_value(rho1, rho2, params)?.value))
}

/// Largest generalized overlap attainable at these parameters.
pub fn omega_max(params: GameParams) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    1.0 - 2.0 * a - b + (1.0 + b).min(2.0 * (a + b))
}

/// The three distinguishability terms of the optimal communication payoff.
fn comm_terms(rho1: &DensityMatrix, rho2: &DensityMatrix, params: GameParams) -> Result<(f64, f64, f64)> {
    same_dim(rho1, rho2)?;
    let rho = mix(&[(rho1.clone(), 0.5), (rho2.clone(), 0.5)])?;
    let w = (1.0 + params.beta) / 2.0;
    let wr = params.alpha + params.beta;
    let dq = distinguishability(rho1, rho2)?;
    let dq_w1 = weighted_closed_form(rho1.matrix(), w, rho.matrix(), wr)?;
    let dq_w2 = weighted_closed_form(rho2.matrix(), w, rho.matrix(), wr)?;
    Ok((dq, dq_w1, dq_w2))
}

/// Optimal success metric of the communication task.
pub fn comm_value_opt(psi1: &PureState, psi2: &PureState, params: GameParams) -> Result<f64> {
    params.validate()?;
    let (dq, w1, w2) = comm_terms(&psi1.density(), &psi2.density(), params)?;
    Ok((1.0 - params.alpha) * dq + w1 + w2)
}

pub fn bound_report(psi1: &PureState, psi2: &PureState, params: GameParams) -> Result<BoundReport> {
    report_unchecked(&psi1.density(), &psi2.density(), params)
}

/// [`bound_report`] for density-matrix inputs, which must be pure within
/// `1e-8`.
pub fn bound_report_density(rho1: &DensityMatrix, rho2: &DensityMatrix, params: GameParams) -> Result<BoundReport> {
    for (name, r) in [("rho1", rho1), ("rho2", rho2)] {
        if !r.is_pure(PURITY_TOL) {
            return invalid(format!("{name} is not pure (purity {:.12})", r.purity()));
        }
    }
    report_unchecked(rho1, rho2, params)
}

fn report_unchecked(rho1: &DensityMatrix, rho2: &DensityMatrix, params: GameParams) -> Result<BoundReport> {
    params.validate()?;
    let (dq, dq_w1, dq_w2) = comm_terms(rho1, rho2, params)?;
    let s_gam = gambling_value(rho1, rho2, params)?.value;
    let s_comm_opt = (1.0 - params.alpha) * dq + dq_w1 + dq_w2;
    let b_q = 2.0 * (s_comm_opt - s_gam - 2.0 * params.beta - 1.0);
    Ok(BoundReport {
        dq,
        dq_w1,
        dq_w2,
        s_gam,
        s_comm_opt,
        b_q,
        omega_q: 2.0 * (1.0 - s_gam),
        omega_max: omega_max(params),
        advantage_margin: b_q / 2.0,
    })
}

/// Checks the dual certificate of a gambling solve: `Y >= C_i / 2` and
/// `Tr Y` close to the value. Returns the smallest slack eigenvalue.
pub fn certificate_slack(rho1: &DensityMatrix, rho2: &DensityMatrix, params: GameParams, result: &GambleResult) -> f64 {
    let costs = cost_matrices(rho1.matrix(), rho2.matrix(), params);
    let slack = costs
        .iter()
        .map(|cm| min_eigenvalue(&(&result.dual_y - cm * c(0.5, 0.0))))
        .fold(f64::INFINITY, f64::min);
    let tr_gap = trace_re(&result.dual_y) - result.value;
    slack.min(-tr_gap.abs())
}

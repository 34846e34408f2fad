//! See-saw lower bounds on `B_Q` at fixed dimension.
//!
//! Each restart alternates two SDPs: the best three binary measurements for
//! fixed states, then the best states together with the gambling dual
//! variable `Y` for fixed measurements. Both steps maximize
//! `2 (S_comm - Tr Y - 2 beta - 1)`, so the recorded objective never
//! decreases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::games::{cost_matrices, gambling_value_with, GameParams};
use crate::quantum::{
    bloch_vector, c, min_eigenvalue, random_density_with, trace_product, trace_re, CMatrix, DensityMatrix, Povm,
};
use crate::sdp::{SdpProblem, SdpSolution, Sense, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeesawConfig {
    pub dim: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub convergence_delta: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            restarts: 20,
            max_iterations: 200,
            convergence_delta: 1e-9,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return invalid("dimension must be at least 2");
        }
        if self.restarts == 0 {
            return invalid("at least one restart is required");
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be positive");
        }
        if !(self.convergence_delta > 0.0 && self.convergence_delta.is_finite()) {
            return invalid("convergence_delta must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SeesawOutcome {
    pub b_ql: f64,
    pub rho1: DensityMatrix,
    pub rho2: DensityMatrix,
    pub measurements: [Povm; 3],
    pub y: CMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub purity_defect: f64,
    /// Objective after every half-step of the winning restart.
    pub history: Vec<f64>,
    pub restart: usize,
    /// Restarts abandoned after a solver failure, with the reason.
    pub failed_restarts: Vec<(usize, String)>,
}

/// Half-step solver accuracy; tighter than the default so that the
/// recorded objective is monotone well inside `1e-9`.
fn half_step_options() -> SolverOptions {
    SolverOptions::with_tolerance(1e-11)
}

fn accept(sol: SdpSolution) -> Result<SdpSolution> {
    // tiny problems sometimes stall just short of 1e-11; keep them if close
    let ok = sol.is_optimal() || (sol.gap <= 1e-9 && sol.primal_residual <= 1e-9 && sol.dual_residual <= 1e-9);
    if ok {
        Ok(sol)
    } else {
        Err(Error::Solver {
            status: sol.status,
            gap: sol.gap,
            residual: sol.primal_residual.max(sol.dual_residual),
        })
    }
}

/// Payoff operators `K^y_k` for the three binary sub-tasks.
fn payoff_operators(rho1: &CMatrix, rho2: &CMatrix, params: GameParams) -> [[CMatrix; 2]; 3] {
    let (a, b) = (params.alpha, params.beta);
    let sum = rho1 + rho2;
    [
        [rho1 * c((1.0 - a) / 2.0, 0.0), rho2 * c((1.0 - a) / 2.0, 0.0)],
        [rho1 * c((1.0 + b) / 2.0, 0.0), &sum * c((a + b) / 2.0, 0.0)],
        [rho2 * c((1.0 + b) / 2.0, 0.0), &sum * c((a + b) / 2.0, 0.0)],
    ]
}

/// `S_comm` for fixed measurements and states.
pub fn comm_value(measurements: &[Povm; 3], rho1: &CMatrix, rho2: &CMatrix, params: GameParams) -> f64 {
    let k = payoff_operators(rho1, rho2, params);
    let mut total = 0.0;
    for (y, m) in measurements.iter().enumerate() {
        for (kk, e) in m.effects().iter().enumerate() {
            total += trace_product(&k[y][kk], e);
        }
    }
    total
}

/// Objective `2 (S_comm - Tr Y - 2 beta - 1)`.
pub fn seesaw_objective(measurements: &[Povm; 3], rho1: &CMatrix, rho2: &CMatrix, y: &CMatrix, params: GameParams) -> f64 {
    2.0 * (comm_value(measurements, rho1, rho2, params) - trace_re(y) - 2.0 * params.beta - 1.0)
}

/// Step (i): best binary measurements for fixed states.
fn best_measurements(rho1: &CMatrix, rho2: &CMatrix, params: GameParams) -> Result<([Povm; 3], f64)> {
    let d = rho1.nrows();
    let k = payoff_operators(rho1, rho2, params);
    let mut p = SdpProblem::new(Sense::Maximize);
    let id = CMatrix::identity(d, d);
    let mut blocks = Vec::new();
    for ky in &k {
        let b1 = p.add_block(d);
        let b2 = p.add_block(d);
        p.set_objective(b1, &ky[0])?;
        p.set_objective(b2, &ky[1])?;
        p.add_matrix_equality(&[(b1, 1.0), (b2, 1.0)], &id)?;
        blocks.push((b1, b2));
    }
    let sol = accept(p.solve(&half_step_options())?)?;
    let povm = |(b1, b2): (usize, usize)| Povm::from_approximate(vec![sol.block_values[b1].clone(), sol.block_values[b2].clone()]);
    Ok(([povm(blocks[0])?, povm(blocks[1])?, povm(blocks[2])?], sol.primal_value))
}

/// `G1`, `G2` with `S_comm = Tr(rho1 G1) + Tr(rho2 G2)`.
fn state_weights(m: &[Povm; 3], params: GameParams) -> (CMatrix, CMatrix) {
    let (a, b) = (params.alpha, params.beta);
    let e = |y: usize, k: usize| m[y].effects()[k].clone();
    let g1 = e(0, 0) * c((1.0 - a) / 2.0, 0.0) + e(1, 0) * c((1.0 + b) / 2.0, 0.0) + (e(1, 1) + e(2, 1)) * c((a + b) / 2.0, 0.0);
    let g2 = e(0, 1) * c((1.0 - a) / 2.0, 0.0)
        + e(1, 1) * c((a + b) / 2.0, 0.0)
        + e(2, 0) * c((1.0 + b) / 2.0, 0.0)
        + e(2, 1) * c((a + b) / 2.0, 0.0);
    (g1, g2)
}

/// Step (ii): best states and `Y` for fixed measurements.
fn best_states(m: &[Povm; 3], params: GameParams) -> Result<(CMatrix, CMatrix, CMatrix, f64)> {
    let d = m[0].dim();
    let (a, b) = (params.alpha, params.beta);
    let (g1, g2) = state_weights(m, params);
    let mut p = SdpProblem::new(Sense::Maximize);
    let r1 = p.add_block(d);
    let r2 = p.add_block(d);
    // Y >= C3/2 >= 0, so Y may live in the PSD cone
    let yb = p.add_block(d);
    p.set_objective(r1, &(g1 * c(2.0, 0.0)))?;
    p.set_objective(r2, &(g2 * c(2.0, 0.0)))?;
    p.set_objective(yb, &(CMatrix::identity(d, d) * c(-2.0, 0.0)))?;
    p.set_objective_constant(-2.0 * (2.0 * b + 1.0));
    let id = crate::sdp::SparseHermitian::identity(d);
    p.add_equality(vec![(r1, id.clone())], 1.0)?;
    p.add_equality(vec![(r2, id)], 1.0)?;
    let zero = CMatrix::zeros(d, d);
    p.add_psd_offset(&zero, &[(yb, 1.0), (r1, -0.5), (r2, 0.5 * b)])?;
    p.add_psd_offset(&zero, &[(yb, 1.0), (r2, -0.5), (r1, 0.5 * b)])?;
    p.add_psd_offset(&zero, &[(yb, 1.0), (r1, -0.5 * a), (r2, -0.5 * a)])?;
    let sol = accept(p.solve(&half_step_options())?)?;
    let v = sol.primal_value;
    let mut blocks = sol.block_values.into_iter();
    let (x1, x2, y) = (blocks.next().unwrap(), blocks.next().unwrap(), blocks.next().unwrap());
    Ok((x1, x2, y, v))
}

fn purity_defect(r: &DensityMatrix) -> f64 {
    (1.0 - r.purity()).abs()
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add((restart as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

struct RestartResult {
    outcome: SeesawOutcome,
}

fn run_restart(params: GameParams, config: &SeesawConfig, restart: usize) -> Result<RestartResult> {
    let mut rng = restart_rng(config.seed, restart);
    let d = config.dim;
    let mut rho1 = random_density_with(&mut rng, d, d)?;
    let mut rho2 = random_density_with(&mut rng, d, d)?;
    let mut y = gambling_value_with(&rho1, &rho2, params, &SolverOptions::default())?.dual_y;
    let mut history = Vec::new();
    let mut last = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut measurements = None;
    for it in 0..config.max_iterations {
        iterations = it + 1;
        let (m, comm) = best_measurements(rho1.matrix(), rho2.matrix(), params)?;
        history.push(2.0 * (comm - trace_re(&y) - 2.0 * params.beta - 1.0));
        let (x1, x2, ny, _) = best_states(&m, params)?;
        rho1 = DensityMatrix::from_approximate(&x1)?;
        rho2 = DensityMatrix::from_approximate(&x2)?;
        y = ny;
        let value = seesaw_objective(&m, rho1.matrix(), rho2.matrix(), &y, params);
        history.push(value);
        measurements = Some(m);
        if value - last < config.convergence_delta {
            converged = true;
            break;
        }
        last = value;
    }
    let measurements = measurements.expect("at least one iteration");
    let b_ql = seesaw_objective(&measurements, rho1.matrix(), rho2.matrix(), &y, params);
    let defect = purity_defect(&rho1).max(purity_defect(&rho2));
    Ok(RestartResult {
        outcome: SeesawOutcome {
            b_ql,
            rho1,
            rho2,
            measurements,
            y,
            iterations,
            converged,
            purity_defect: defect,
            history,
            restart,
            failed_restarts: Vec::new(),
        },
    })
}

pub fn seesaw_run(params: GameParams, config: &SeesawConfig) -> Result<SeesawOutcome> {
    params.validate()?;
    config.validate()?;
    let results: Vec<Result<RestartResult>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(params, config, r))
        .collect();
    let mut best: Option<SeesawOutcome> = None;
    let mut failed = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(RestartResult { outcome }) => {
                if best.as_ref().is_none_or(|b| outcome.b_ql > b.b_ql) {
                    best = Some(outcome);
                }
            }
            Err(e) => failed.push((r, e.to_string())),
        }
    }
    match best {
        Some(mut o) => {
            o.failed_restarts = failed;
            Ok(o)
        }
        None => Err(Error::AllRestartsFailed {
            restarts: config.restarts,
            last: failed.last().map(|f| f.1.clone()).unwrap_or_default(),
        }),
    }
}

/// Smallest eigenvalue of `Y - C_i/2` over the three cost matrices.
pub fn dual_slack(outcome: &SeesawOutcome, params: GameParams) -> f64 {
    cost_matrices(outcome.rho1.matrix(), outcome.rho2.matrix(), params)
        .iter()
        .map(|cm| min_eigenvalue(&(&outcome.y - cm * c(0.5, 0.0))))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochAngle {
    pub radians: f64,
    /// Set when either state is mixed beyond `1e-6`.
    pub mixed: bool,
}

pub fn bloch_angle(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<BlochAngle> {
    let a = bloch_vector(rho1)?;
    let b = bloch_vector(rho2)?;
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        return invalid("Bloch angle is undefined for the maximally mixed state");
    }
    let cos = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb);
    Ok(BlochAngle {
        radians: cos.clamp(-1.0, 1.0).acos(),
        mixed: !(rho1.is_pure(1e-6) && rho2.is_pure(1e-6)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub alpha: f64,
    pub b_ql: Option<f64>,
    /// Bloch angle over pi; qubits only.
    pub theta_scaled: Option<f64>,
    pub seed: u64,
    pub purity_defect: Option<f64>,
    pub error: Option<String>,
}

pub fn scan_alpha(alpha_grid: &[f64], beta: f64, config: &SeesawConfig) -> Result<Vec<ScanRow>> {
    config.validate()?;
    for &a in alpha_grid {
        if !(a > 0.0 && a <= 1.0) {
            return invalid(format!("grid values must lie in (0, 1], got {a}"));
        }
    }
    GameParams::new(0.5, beta)?;
    let mut rows: Vec<ScanRow> = alpha_grid
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let seed = config.seed ^ i as u64;
            let cfg = SeesawConfig { seed, ..*config };
            let res = GameParams::new(alpha, beta).and_then(|p| seesaw_run(p, &cfg));
            match res {
                Ok(o) => {
                    let theta = if config.dim == 2 {
                        bloch_angle(&o.rho1, &o.rho2).ok().map(|a| a.radians / std::f64::consts::PI)
                    } else {
                        None
                    };
                    ScanRow {
                        alpha,
                        b_ql: Some(o.b_ql),
                        theta_scaled: theta,
                        seed,
                        purity_defect: Some(o.purity_defect),
                        error: None,
                    }
                }
                Err(e) => ScanRow {
                    alpha,
                    b_ql: None,
                    theta_scaled: None,
                    seed,
                    purity_defect: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::bound_report_density;
    use crate::quantum::bloch_state;
    use std::f64::consts::PI;

    fn cfg(restarts: usize, seed: u64) -> SeesawConfig {
        SeesawConfig {
            restarts,
            seed,
            ..SeesawConfig::default()
        }
    }

    #[test]
    fn bloch_angle_examples() {
        let z = bloch_state(0.0, 0.0).unwrap().density();
        let o = bloch_state(PI, 0.0).unwrap().density();
        let t = bloch_state(2.0 * PI / 3.0, 0.0).unwrap().density();
        assert!((bloch_angle(&z, &o).unwrap().radians - PI).abs() < 1e-12);
        assert!(bloch_angle(&z, &z).unwrap().radians.abs() < 1e-7);
        let a = bloch_angle(&z, &t).unwrap();
        assert!((a.radians - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(!a.mixed);
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(bloch_angle(&z, &mm).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SeesawConfig { dim: 1, ..SeesawConfig::default() }.validate().is_err());
        assert!(SeesawConfig { restarts: 0, ..SeesawConfig::default() }.validate().is_err());
        assert!(SeesawConfig { convergence_delta: 0.0, ..SeesawConfig::default() }.validate().is_err());
    }

    #[test]
    fn optimum_point() {
        let p = GameParams::new(0.7124, 1.0).unwrap();
        let o = seesaw_run(p, &cfg(6, 11)).unwrap();
        assert!((o.b_ql - 0.0639).abs() < 1e-3, "{}", o.b_ql);
        assert!(o.purity_defect <= 1e-6, "{}", o.purity_defect);
        let angle = bloch_angle(&o.rho1, &o.rho2).unwrap().radians;
        assert!((angle - 2.0 * PI / 3.0).abs() < 1e-2, "{angle}");
        for w in o.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{:?}", w);
        }
        let recomputed = seesaw_objective(&o.measurements, o.rho1.matrix(), o.rho2.matrix(), &o.y, p);
        assert!((recomputed - o.b_ql).abs() < 1e-8);
        assert!(dual_slack(&o, p) > -1e-8);
        let purified = [o.rho1.dominant_state().density(), o.rho2.dominant_state().density()];
        let r = bound_report_density(&purified[0], &purified[1], p).unwrap();
        assert!(r.b_q >= o.b_ql - 1e-6);
    }

    #[test]
    fn no_violation_below_threshold() {
        for (a, b) in [(0.3, 1.0), (0.0, 0.0)] {
            let o = seesaw_run(GameParams::new(a, b).unwrap(), &cfg(4, 3)).unwrap();
            assert!(o.b_ql <= 1e-6, "{a} {b}: {}", o.b_ql);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let c = cfg(3, 5);
        let a = scan_alpha(&[0.6, 0.2], 1.0, &c).unwrap();
        let b = scan_alpha(&[0.6, 0.2], 1.0, &c).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a[0].alpha < a[1].alpha);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.b_ql, y.b_ql);
            assert_eq!(x.theta_scaled, y.theta_scaled);
        }
        assert!(scan_alpha(&[0.0], 1.0, &c).is_err());
    }
}

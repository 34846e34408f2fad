//! Command implementations and the run record shared by the CLI and the
//! Python bindings.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::games::{bound_report, certificate_slack, gambling_value, omega_max, omega_q, BoundReport, GameParams};
use crate::moments::{upper_bound_with, InterlinkLevel, MomentField};
use crate::ontic::{classical_comm_best, classify_regions, generalized_epistemic_overlap, s_lambda, OnticModel, OverlapTerms};
use crate::quantum::{bloch_state, CVector, MatrixData, PureState};
use crate::sdp::{SolveStatus, SolverOptions};
use crate::seesaw::{scan_alpha, seesaw_run, SeesawConfig};
use crate::config::Tolerances;
use crate::VERSION;

/// Significant digits kept in emitted numbers.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const CSV_HEADER: [&str; 6] = ["alpha", "b_ql", "b_qub", "theta_scaled", "gap", "seed"];

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time: f64,
    pub result: Value,
}

impl RunRecord {
    /// Runs `f` and wraps its payload, rounding every number.
    pub fn capture<P: Serialize, R: Serialize>(
        command: &str,
        params: &P,
        seed: Option<u64>,
        f: impl FnOnce() -> Result<R>,
    ) -> Result<Self> {
        let start = Instant::now();
        let result = f()?;
        Ok(Self {
            command: command.to_string(),
            params: round_value(to_value(params)?),
            seed,
            version: VERSION.to_string(),
            wall_time: start.elapsed().as_secs_f64(),
            result: round_value(to_value(&result)?),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run records serialize")
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::InvalidInput(format!("unserializable output: {e}")))
}

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn check_angle(angle: f64) -> Result<()> {
    if !(0.0..=2.0 * std::f64::consts::PI).contains(&angle) {
        return invalid(format!("angle must lie in [0, 2*pi], got {angle}"));
    }
    Ok(())
}

fn embed(psi: &PureState, dim: usize) -> Result<PureState> {
    if dim < psi.dim() {
        return invalid(format!("dimension must be at least {}, got {dim}", psi.dim()));
    }
    let mut v = CVector::zeros(dim);
    v.rows_mut(0, psi.dim()).copy_from(psi.amplitudes());
    PureState::new(v)
}

/// `|0>` and the state at Bloch angle `angle`, embedded in `dim`.
pub fn state_pair(angle: f64, dim: usize) -> Result<(PureState, PureState)> {
    check_angle(angle)?;
    Ok((embed(&bloch_state(0.0, 0.0)?, dim)?, embed(&bloch_state(angle, 0.0)?, dim)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct GambleReport {
    pub s_gam: f64,
    pub omega_q: f64,
    pub omega_max: f64,
    pub duality_gap: f64,
    pub certificate_slack: f64,
    pub povm: Vec<MatrixData>,
}

pub fn cmd_gamble(angle: f64, params: GameParams, dim: usize) -> Result<GambleReport> {
    params.validate()?;
    let (p1, p2) = state_pair(angle, dim)?;
    let (r1, r2) = (p1.density(), p2.density());
    let res = gambling_value(&r1, &r2, params)?;
    let tol = Tolerances::from_env();
    if res.gap > tol.gap {
        return Err(Error::Solver {
            status: SolveStatus::Optimal,
            gap: res.gap,
            residual: 0.0,
        });
    }
    Ok(GambleReport {
        s_gam: res.value,
        omega_q: omega_q(&r1, &r2, params)?,
        omega_max: omega_max(params),
        duality_gap: res.gap,
        certificate_slack: certificate_slack(&r1, &r2, params, &res),
        povm: res.povm.effects().iter().map(MatrixData::from_matrix).collect(),
    })
}

pub fn cmd_bound(angle: f64, params: GameParams) -> Result<BoundReport> {
    params.validate()?;
    let (p1, p2) = state_pair(angle, 2)?;
    bound_report(&p1, &p2, params)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanSpec {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub steps: usize,
    pub beta: f64,
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    pub with_npa: bool,
    pub interlink: InterlinkLevel,
}

impl ScanSpec {
    /// `steps` evenly spaced points from `alpha_min` to `alpha_max`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            return invalid("steps must be positive");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max && self.alpha_max <= 1.0) {
            return invalid(format!(
                "alpha range must satisfy 0 < min <= max <= 1, got [{}, {}]",
                self.alpha_min, self.alpha_max
            ));
        }
        if self.steps == 1 {
            return Ok(vec![self.alpha_min]);
        }
        let h = (self.alpha_max - self.alpha_min) / (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| if i + 1 == self.steps { self.alpha_max } else { self.alpha_min + h * i as f64 })
            .collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub alpha: f64,
    pub b_ql: Option<f64>,
    pub b_qub: Option<f64>,
    pub theta_scaled: Option<f64>,
    pub gap: Option<f64>,
    pub seed: u64,
    pub purity_defect: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanPoint>,
}

impl ScanTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Row with the largest `b_ql`.
    pub fn best(&self) -> Option<&ScanPoint> {
        self.rows
            .iter()
            .filter(|r| r.b_ql.is_some())
            .max_by(|a, b| a.b_ql.unwrap_or(f64::NEG_INFINITY).total_cmp(&b.b_ql.unwrap_or(f64::NEG_INFINITY)))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        let cell = |x: Option<f64>| x.map(|v| format!("{:?}", round_sig(v))).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                format!("{:?}", round_sig(r.alpha)),
                cell(r.b_ql),
                cell(r.b_qub),
                cell(r.theta_scaled),
                cell(r.gap),
                r.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

pub fn cmd_scan(spec: &ScanSpec) -> Result<ScanTable> {
    let grid = spec.grid()?;
    let config = SeesawConfig {
        dim: spec.dim,
        restarts: spec.restarts,
        seed: spec.seed,
        ..SeesawConfig::default()
    };
    let rows = scan_alpha(&grid, spec.beta, &config)?;
    let tol = Tolerances::from_env();
    let opts = SolverOptions::with_tolerance(tol.gap);
    let points = rows
        .into_iter()
        .map(|row| {
            let mut p = ScanPoint {
                alpha: row.alpha,
                b_ql: row.b_ql,
                b_qub: None,
                theta_scaled: row.theta_scaled.filter(|_| row.b_ql.is_some_and(|v| v > 0.0)),
                gap: None,
                seed: row.seed,
                purity_defect: row.purity_defect,
                error: row.error,
            };
            if spec.with_npa {
                let params = GameParams::new(row.alpha, spec.beta)?;
                match upper_bound_with(params, spec.interlink, MomentField::Real, &opts, row.b_ql) {
                    Ok(ub) => {
                        p.b_qub = Some(ub.b_qub);
                        p.gap = ub.gap_to_seesaw;
                    }
                    Err(e) => p.error = Some(e.to_string()),
                }
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { rows: points })
}

#[derive(Clone, Debug, Serialize)]
pub struct OnticReport {
    pub n: usize,
    pub omega_lambda: f64,
    pub terms: OverlapTerms,
    pub s_lambda: f64,
    pub identity_residual: f64,
    pub omega_max: f64,
    pub region_histogram: BTreeMap<String, usize>,
    pub classical_comm_best: f64,
    /// `classical_comm_best - (2 beta + 1) - s_lambda`; nonpositive when the
    /// bound holds.
    pub comm_bound_slack: f64,
    pub comm_bound_holds: bool,
}

pub fn cmd_ontic(model: &OnticModel, params: GameParams) -> Result<OnticReport> {
    let ov = generalized_epistemic_overlap(model, params)?;
    let s = s_lambda(model, params)?;
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for r in classify_regions(model, params) {
        *hist.entry(r.to_string()).or_default() += 1;
    }
    let comm = classical_comm_best(model, params);
    let slack = comm - (2.0 * params.beta + 1.0) - s;
    Ok(OnticReport {
        n: model.n(),
        omega_lambda: ov.omega_lambda,
        terms: ov.terms,
        s_lambda: s,
        identity_residual: (s - (1.0 - ov.omega_lambda / 2.0)).abs(),
        omega_max: omega_max(params),
        region_histogram: hist,
        classical_comm_best: comm,
        comm_bound_slack: slack,
        comm_bound_holds: slack <= 1e-12,
    })
}

pub fn cmd_ontic_path(path: &Path, params: GameParams) -> Result<OnticReport> {
    params.validate()?;
    cmd_ontic(&OnticModel::from_path(path)?, params)
}

#[derive(Clone, Debug, Serialize)]
pub struct NpaReport {
    pub b_qub: f64,
    pub status: SolveStatus,
    pub duality_gap: f64,
    pub interlink: InterlinkLevel,
    pub num_variables: usize,
    pub num_equalities: usize,
    pub b_ql: Option<f64>,
    pub gap_to_seesaw: Option<f64>,
}

/// Moment upper bound, optionally paired with a see-saw run.
pub fn cmd_npa(params: GameParams, level: InterlinkLevel, seesaw: Option<&SeesawConfig>) -> Result<NpaReport> {
    params.validate()?;
    let b_ql = match seesaw {
        Some(cfg) => Some(seesaw_run(params, cfg)?.b_ql),
        None => None,
    };
    let tol = Tolerances::from_env();
    let ub = upper_bound_with(params, level, MomentField::Real, &SolverOptions::with_tolerance(tol.gap), b_ql)?;
    Ok(NpaReport {
        b_qub: ub.b_qub,
        status: ub.status,
        duality_gap: ub.duality_gap,
        interlink: level,
        num_variables: ub.num_variables,
        num_equalities: ub.num_equalities,
        b_ql,
        gap_to_seesaw: ub.gap_to_seesaw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.063_851_903_123_456_78), 0.063_851_903_123_5);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333_333_333_333);
    }

    #[test]
    fn grid_is_inclusive() {
        let spec = ScanSpec {
            alpha_min: 0.05,
            alpha_max: 1.0,
            steps: 20,
            beta: 1.0,
            dim: 2,
            restarts: 1,
            seed: 0,
            with_npa: false,
            interlink: InterlinkLevel::Full,
        };
        let g = spec.grid().unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[19], 1.0);
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert!(ScanSpec { steps: 0, ..spec }.grid().is_err());
        assert!(ScanSpec { alpha_min: 0.0, ..spec }.grid().is_err());
    }

    #[test]
    fn gamble_examples() {
        let p = GameParams::new(0.2, 0.7).unwrap();
        assert!((cmd_gamble(PI, p, 2).unwrap().s_gam - 1.0).abs() < 1e-8);
        let p = GameParams::new(0.8, 1.0).unwrap();
        assert!((cmd_gamble(0.0, p, 3).unwrap().s_gam - 0.8).abs() < 1e-8);
        assert!(matches!(cmd_gamble(7.0, p, 2), Err(Error::InvalidInput(_))));
        assert!(matches!(cmd_gamble(1.0, p, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn record_rounds_payload() {
        let rec = RunRecord::capture("bound", &GameParams::new(0.7124, 1.0).unwrap(), None, || {
            cmd_bound(2.0 * PI / 3.0, GameParams::new(0.7124, 1.0).unwrap())
        })
        .unwrap();
        let b = rec.result["b_q"].as_f64().unwrap();
        assert_eq!(b, round_sig(b));
        assert_eq!(format!("{b:.4}"), "0.0639");
        assert_eq!(rec.version, VERSION);
    }

    #[test]
    fn csv_layout() {
        let table = ScanTable {
            rows: vec![ScanPoint {
                alpha: 0.5,
                b_ql: Some(0.1),
                b_qub: None,
                theta_scaled: None,
                gap: None,
                seed: 7,
                purity_defect: None,
                error: None,
            }],
        };
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "alpha,b_ql,b_qub,theta_scaled,gap,seed\n0.5,0.1,,,,7\n");
    }
}

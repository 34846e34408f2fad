//! Finite ontological models.
//!
//! An ontic space `{0, .., n-1}` carries two epistemic states `mu1`, `mu2`
//! and optional response schemes. Tilted distributions
//! `t1 = (1+b) mu1`, `t2 = (1+b) mu2`, `t3 = (a+b)(mu1 + mu2)` drive every
//! quantity here.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::games::GameParams;
use crate::quantum::{DensityMatrix, Povm, PureState};

/// Entries below this are treated as exact zeros when testing supports.
pub const ZERO_TOL: f64 = 1e-14;
const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    n: usize,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    responses: Option<BTreeMap<String, Vec<Vec<f64>>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnticModel {
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    responses: BTreeMap<String, Vec<Vec<f64>>>,
}

fn check_distribution(name: &str, mu: &[f64], n: usize) -> Result<()> {
    if mu.len() != n {
        return Err(Error::ModelFormat(format!("{name}: expected {n} entries, found {}", mu.len())));
    }
    for (i, &v) in mu.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::ModelFormat(format!("{name}[{i}]: entry {v} is negative or not finite")));
        }
    }
    let s: f64 = mu.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::ModelFormat(format!("{name}: entries sum to {s}, not 1")));
    }
    Ok(())
}

fn check_response(name: &str, rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::ModelFormat(format!(
            "responses.{name}: expected {n} rows, found {}",
            rows.len()
        )));
    }
    let k = rows.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::ModelFormat(format!("responses.{name}: rows must have at least one outcome")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::ModelFormat(format!(
                "responses.{name}[{i}]: expected {k} outcomes, found {}",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::ModelFormat(format!(
                    "responses.{name}[{i}][{j}]: entry {v} is negative or not finite"
                )));
            }
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::ModelFormat(format!("responses.{name}[{i}]: row sums to {s}, not 1")));
        }
    }
    Ok(())
}

impl OnticModel {
    pub fn new(mu1: Vec<f64>, mu2: Vec<f64>) -> Result<Self> {
        let n = mu1.len();
        if n == 0 {
            return Err(Error::ModelFormat("n: the ontic space must be nonempty".into()));
        }
        check_distribution("mu1", &mu1, n)?;
        check_distribution("mu2", &mu2, n)?;
        Ok(Self {
            mu1,
            mu2,
            responses: BTreeMap::new(),
        })
    }

    pub fn with_response(mut self, name: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let name = name.into();
        check_response(&name, &rows, self.n())?;
        self.responses.insert(name, rows);
        Ok(self)
    }

    /// Disjoint deltas: no epistemic overlap.
    pub fn psi_ontic() -> Self {
        Self::new(vec![1.0, 0.0], vec![0.0, 1.0]).expect("valid deltas")
    }

    /// A single ontic state shared by both preparations.
    pub fn identical() -> Self {
        Self::new(vec![1.0], vec![1.0]).expect("valid delta")
    }

    /// Disjoint deltas whose responses reproduce `Tr(psi_i M_k)` for each
    /// named measurement.
    pub fn psi_ontic_for(psi1: &PureState, psi2: &PureState, povms: &[(String, Povm)]) -> Result<Self> {
        let mut model = Self::psi_ontic();
        for (name, povm) in povms {
            let rows = vec![povm.probabilities(&psi1.density()), povm.probabilities(&psi2.density())];
            let rows = rows
                .into_iter()
                .map(|r| normalize_row(r.into_iter().map(|x| x.max(0.0)).collect()))
                .collect();
            model = model.with_response(name.clone(), rows)?;
        }
        Ok(model)
    }

    /// Random model with roughly a third of the points outside each support.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return invalid("n must be positive");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..n)
                    .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() })
                    .collect();
                let s: f64 = v.iter().sum();
                if s > 0.0 {
                    return normalize_row(v);
                }
            }
        };
        let mu1 = draw(&mut rng);
        let mu2 = draw(&mut rng);
        Self::new(mu1, mu2)
    }

    pub fn n(&self) -> usize {
        self.mu1.len()
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    pub fn mu2(&self) -> &[f64] {
        &self.mu2
    }

    pub fn responses(&self) -> &BTreeMap<String, Vec<Vec<f64>>> {
        &self.responses
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::ModelFormat(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if file.n == 0 {
            return Err(Error::ModelFormat("n: the ontic space must be nonempty".into()));
        }
        check_distribution("mu1", &file.mu1, file.n)?;
        check_distribution("mu2", &file.mu2, file.n)?;
        let mut model = Self {
            mu1: file.mu1,
            mu2: file.mu2,
            responses: BTreeMap::new(),
        };
        for (name, rows) in file.responses.unwrap_or_default() {
            model = model.with_response(name, rows)?;
        }
        Ok(model)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::ModelFormat(msg) => Error::ModelFormat(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            n: self.n(),
            mu1: self.mu1.clone(),
            mu2: self.mu2.clone(),
            responses: (!self.responses.is_empty()).then(|| self.responses.clone()),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }
}

fn normalize_row(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    // push rounding into the largest entry so the sum is 1 to the last bit
    let resid = 1.0 - v.iter().sum::<f64>();
    if let Some(imax) = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])) {
        v[imax] += resid;
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct TildeTriple {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t3: Vec<f64>,
}

impl TildeTriple {
    pub fn new(model: &OnticModel, params: GameParams) -> Self {
        let (a, b) = (params.alpha, params.beta);
        Self {
            t1: model.mu1.iter().map(|m| (1.0 + b) * m).collect(),
            t2: model.mu2.iter().map(|m| (1.0 + b) * m).collect(),
            t3: model.mu1.iter().zip(&model.mu2).map(|(x, y)| (a + b) * (x + y)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "L1")]
    Lambda1,
    #[serde(rename = "L2")]
    Lambda2,
    #[serde(rename = "L3'")]
    Lambda3Prime,
    #[serde(rename = "L3''")]
    Lambda3DoublePrime,
    #[serde(rename = "L3'''")]
    Lambda3TriplePrime,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::Lambda1 => "L1",
            Region::Lambda2 => "L2",
            Region::Lambda3Prime => "L3'",
            Region::Lambda3DoublePrime => "L3''",
            Region::Lambda3TriplePrime => "L3'''",
        };
        f.write_str(s)
    }
}

pub type RegionLabels = Vec<Region>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapTerms {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub omega_lambda: f64,
    pub terms: OverlapTerms,
}

pub fn generalized_epistemic_overlap(model: &OnticModel, params: GameParams) -> Result<Overlap> {
    params.validate()?;
    let t = TildeTriple::new(model, params);
    let ab = params.alpha + params.beta;
    let mut terms = OverlapTerms {
        t1: 0.0,
        t2: -ab,
        t3: -ab,
        t4: 0.0,
    };
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..model.n() {
        let (a, b, c) = (t.t1[i], t.t2[i], t.t3[i]);
        s1 += a.min(b);
        s2 += a.min(c);
        s3 += b.min(c);
        s4 += a.min(b).min(c);
    }
    terms.t1 = s1;
    terms.t2 += s2;
    terms.t3 += s3;
    terms.t4 = s4;
    Ok(Overlap {
        omega_lambda: terms.t1 + terms.t2 + terms.t3 - terms.t4,
        terms,
    })
}

/// Classical gambling payoff `1/2 sum max(t1, t2, t3) - beta`.
pub fn s_lambda(model: &OnticModel, params: GameParams) -> Result<f64> {
    params.validate()?;
    let t = TildeTriple::new(model, params);
    let total: f64 = (0..model.n()).map(|i| t.t1[i].max(t.t2[i]).max(t.t3[i])).sum();
    Ok(0.5 * total - params.beta)
}

pub fn classify_regions(model: &OnticModel, params: GameParams) -> RegionLabels {
    let t = TildeTriple::new(model, params);
    (0..model.n())
        .map(|i| {
            let (a, b, c) = (t.t1[i], t.t2[i], t.t3[i]);
            if model.mu2[i] < ZERO_TOL {
                Region::Lambda1
            } else if model.mu1[i] < ZERO_TOL {
                Region::Lambda2
            } else if a >= c && c >= b {
                Region::Lambda3Prime
            } else if b >= c && c >= a {
                Region::Lambda3TriplePrime
            } else {
                Region::Lambda3DoublePrime
            }
        })
        .collect()
}

/// Regime-specific closed form of the generalized overlap.
pub fn piecewise_overlap(model: &OnticModel, params: GameParams) -> Result<f64> {
    params.validate()?;
    let t = TildeTriple::new(model, params);
    let base: f64 = (0..model.n()).map(|i| t.t1[i].min(t.t2[i])).sum();
    if params.is_distinguishability_regime() {
        return Ok(base);
    }
    let extra: f64 = classify_regions(model, params)
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Region::Lambda3DoublePrime)
        .map(|(i, _)| t.t1[i].max(t.t2[i]) - t.t3[i])
        .sum();
    Ok(base + extra)
}

/// Standard overlap `sum min(mu1, mu2)`.
pub fn standard_overlap(model: &OnticModel) -> f64 {
    model.mu1.iter().zip(&model.mu2).map(|(a, b)| a.min(*b)).sum()
}

pub fn mixture_epistemic(components: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
    let Some((first, _)) = components.first() else {
        return invalid("mixture needs at least one component");
    };
    let n = first.len();
    let mut out = vec![0.0; n];
    let mut wsum = 0.0;
    for (mu, w) in components {
        if mu.len() != n {
            return invalid("mixture components must have equal length");
        }
        if !(w.is_finite() && *w >= 0.0) {
            return invalid(format!("mixture weight {w} is negative or not finite"));
        }
        wsum += w;
        for (o, m) in out.iter_mut().zip(mu) {
            *o += w * m;
        }
    }
    if (wsum - 1.0).abs() > SUM_TOL {
        return invalid(format!("mixture weights sum to {wsum}, not 1"));
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return invalid(format!("mixture sums to {total}; components must be normalized"));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproductionReport {
    pub reproduces: bool,
    pub max_residual: f64,
    /// `(state index, measurement, outcome)` of the worst residual.
    pub worst: Option<(usize, String, usize)>,
}

/// Checks `sum_l mu(l|state) xi(k|l, M) = Tr(state M_k)`. States map to
/// `mu1`, `mu2` and, if a third is given, their equal mixture.
pub fn model_reproduces(
    model: &OnticModel,
    states: &[DensityMatrix],
    povms: &[(String, Povm)],
    tol: f64,
) -> Result<ReproductionReport> {
    if states.is_empty() || states.len() > 3 {
        return invalid("expected two or three states (psi1, psi2 and optionally their mixture)");
    }
    let mix = mixture_epistemic(&[(model.mu1.clone(), 0.5), (model.mu2.clone(), 0.5)])?;
    let mus = [&model.mu1, &model.mu2, &mix];
    let mut worst = 0.0;
    let mut at = None;
    for (name, povm) in povms {
        let Some(rows) = model.responses.get(name) else {
            return invalid(format!("model has no response scheme for measurement {name:?}"));
        };
        if rows[0].len() != povm.outcomes() {
            return invalid(format!(
                "response scheme {name:?} has {} outcomes, measurement has {}",
                rows[0].len(),
                povm.outcomes()
            ));
        }
        for (s, rho) in states.iter().enumerate() {
            let q = povm.probabilities(rho);
            for (k, qk) in q.iter().enumerate() {
                let p: f64 = mus[s].iter().zip(rows).map(|(m, row)| m * row[k]).sum();
                let r = (p - qk).abs();
                if r > worst || at.is_none() {
                    worst = r;
                    at = Some((s, name.clone(), k));
                }
            }
        }
    }
    Ok(ReproductionReport {
        reproduces: worst <= tol,
        max_residual: worst,
        worst: at,
    })
}

/// Per-point payoffs of the three binary communication sub-tasks, as
/// `[(first answer, second answer); 3]`.
fn comm_payoffs(mu1: f64, mu2: f64, params: GameParams) -> [(f64, f64); 3] {
    let (a, b) = (params.alpha, params.beta);
    let rho = 0.5 * (mu1 + mu2);
    let w = 0.5 * (1.0 + b);
    [
        (0.5 * (1.0 - a) * mu1, 0.5 * (1.0 - a) * mu2),
        (w * mu1, (a + b) * rho),
        (w * mu2, (a + b) * rho),
    ]
}

/// Optimal classical communication payoff, choosing the best answer per
/// measurement input and ontic state.
pub fn classical_comm_best(model: &OnticModel, params: GameParams) -> f64 {
    let mut total = 0.0;
    for i in 0..model.n() {
        let p = comm_payoffs(model.mu1[i], model.mu2[i], params);
        total += p[0].0.max(p[0].1) + p[1].0.max(p[1].1) + p[2].0.max(p[2].1);
    }
    total
}

/// Exhaustive search over all `2^(3n)` deterministic response strategies.
pub fn classical_comm_brute_force(model: &OnticModel, params: GameParams) -> Result<f64> {
    let n = model.n();
    if n > 4 {
        return invalid("brute force is limited to n <= 4");
    }
    let pays: Vec<[(f64, f64); 3]> = (0..n).map(|i| comm_payoffs(model.mu1[i], model.mu2[i], params)).collect();
    let mut best = f64::NEG_INFINITY;
    for s in 0u32..(1 << (3 * n)) {
        let mut total = 0.0;
        for (i, p) in pays.iter().enumerate() {
            let pick = |y: usize| {
                if s & (1 << (3 * i + y)) == 0 {
                    p[y].0
                } else {
                    p[y].1
                }
            };
            total += pick(0) + pick(1) + pick(2);
        }
        best = best.max(total);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::omega_max;
    use proptest::prelude::*;

    fn params(a: f64, b: f64) -> GameParams {
        GameParams::new(a, b).unwrap()
    }

    fn three_point() -> OnticModel {
        OnticModel::new(vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]).unwrap()
    }

    #[test]
    fn psi_ontic_model() {
        let m = OnticModel::psi_ontic();
        for (a, b) in [(0.0, 0.0), (0.3, 0.9), (1.0, 1.0)] {
            let o = generalized_epistemic_overlap(&m, params(a, b)).unwrap();
            assert_eq!(o.omega_lambda, 0.0);
            assert_eq!((o.terms.t1, o.terms.t2, o.terms.t3, o.terms.t4), (0.0, 0.0, 0.0, 0.0));
            assert!((s_lambda(&m, params(a, b)).unwrap() - 1.0).abs() < 1e-15);
            let labels = classify_regions(&m, params(a, b));
            assert_eq!(labels, vec![Region::Lambda1, Region::Lambda2]);
        }
    }

    #[test]
    fn identical_model() {
        let m = OnticModel::identical();
        for (a, b) in [(0.0, 0.0), (0.2, 0.8), (0.75, 1.0), (1.0, 0.0)] {
            let p = params(a, b);
            let o = generalized_epistemic_overlap(&m, p).unwrap();
            assert!((o.omega_lambda - omega_max(p)).abs() < 1e-12);
            let s = s_lambda(&m, p).unwrap();
            assert!((s - ((1.0 - b) / 2.0).max(a)).abs() < 1e-12);
        }
        assert_eq!(classify_regions(&m, params(0.1, 0.4)), vec![Region::Lambda3DoublePrime]);
        // exact tie t1 = t2 = t3 resolves to the lowest-indexed region
        assert_eq!(classify_regions(&m, params(0.3, 0.4)), vec![Region::Lambda3Prime]);
    }

    #[test]
    fn three_point_examples() {
        let m = three_point();
        let p = params(0.0, 0.0);
        assert!((generalized_epistemic_overlap(&m, p).unwrap().omega_lambda - 0.5).abs() < 1e-15);
        assert!((s_lambda(&m, p).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(
            classify_regions(&m, p),
            vec![Region::Lambda1, Region::Lambda3DoublePrime, Region::Lambda2]
        );
        let p = params(1.0, 0.0);
        let g = generalized_epistemic_overlap(&m, p).unwrap().omega_lambda;
        assert!((piecewise_overlap(&m, p).unwrap() - g).abs() < 1e-12);
    }

    #[test]
    fn mixture_examples() {
        let m = three_point();
        assert_eq!(mixture_epistemic(&[(m.mu1().to_vec(), 1.0)]).unwrap(), m.mu1());
        let r = mixture_epistemic(&[(m.mu1().to_vec(), 0.5), (m.mu2().to_vec(), 0.5)]).unwrap();
        let p = params(0.4, 0.3);
        let t = TildeTriple::new(&m, p);
        for (t3, rho) in t.t3.iter().zip(&r) {
            assert!((t3 - 2.0 * 0.7 * rho).abs() < 1e-12);
        }
        let d = mixture_epistemic(&[(vec![1.0, 0.0], 0.3), (vec![0.0, 1.0], 0.7)]).unwrap();
        assert_eq!(d, vec![0.3, 0.7]);
        assert!(mixture_epistemic(&[(vec![1.0, 0.0], 0.3), (vec![0.0, 1.0], 0.6)]).is_err());
    }

    #[test]
    fn comm_examples() {
        let m = OnticModel::psi_ontic();
        let p = params(1.0, 1.0);
        assert_eq!(classical_comm_best(&m, p), 4.0);
        assert!(classical_comm_best(&m, p) - 3.0 <= s_lambda(&m, p).unwrap());
        let id = OnticModel::identical();
        assert_eq!(classical_comm_best(&id, p), classical_comm_brute_force(&id, p).unwrap());
        assert!(classical_comm_brute_force(&OnticModel::random(5, 1).unwrap(), p).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let m = three_point().with_response("z", vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let back = OnticModel::from_json_str(&m.to_json()).unwrap();
        assert_eq!(back, m);

        let e = OnticModel::from_json_str(r#"{"n": 2, "mu1": [1, 0], "mu2": [0, 1], "extra": 1}"#).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
        let e = OnticModel::from_json_str(r#"{"n": 2, "mu1": [1.5, -0.5], "mu2": [0, 1]}"#).unwrap_err();
        assert!(e.to_string().contains("mu1[1]"), "{e}");
        let e = OnticModel::from_json_str(r#"{"n": 3, "mu1": [1, 0], "mu2": [0, 1]}"#).unwrap_err();
        assert!(e.to_string().contains("mu1: expected 3"), "{e}");
        let e = OnticModel::from_json_str("{\"n\": 2,\n \"mu1\": [1, 0]\n \"mu2\": [0, 1]}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = OnticModel::from_json_str(
            r#"{"n": 2, "mu1": [1, 0], "mu2": [0, 1], "responses": {"m": [[0.5, 0.6], [1, 0]]}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("responses.m[0]"), "{e}");
    }

    fn model_and_params() -> impl Strategy<Value = (OnticModel, GameParams)> {
        (1usize..=50, any::<u64>(), 0.0f64..=1.0, 0.0f64..=1.0)
            .prop_map(|(n, seed, a, b)| (OnticModel::random(n, seed).unwrap(), GameParams::new(a, b).unwrap()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn theorem1_identity((m, p) in model_and_params()) {
            let o = generalized_epistemic_overlap(&m, p).unwrap();
            let s = s_lambda(&m, p).unwrap();
            prop_assert!((s - (1.0 - o.omega_lambda / 2.0)).abs() < 1e-12);
            prop_assert!((piecewise_overlap(&m, p).unwrap() - o.omega_lambda).abs() < 1e-12);
            prop_assert!(o.omega_lambda >= -1e-12 && o.omega_lambda <= omega_max(p) + 1e-12);
            if p.is_distinguishability_regime() {
                prop_assert!((o.terms.t2 + o.terms.t3 - o.terms.t4).abs() < 1e-12);
                prop_assert!((o.omega_lambda - (1.0 + p.beta) * standard_overlap(&m)).abs() < 1e-12);
            }
        }

        #[test]
        fn regions_follow_regime((m, p) in model_and_params()) {
            let t = TildeTriple::new(&m, p);
            for (i, r) in classify_regions(&m, p).iter().enumerate() {
                if *r == Region::Lambda3DoublePrime {
                    let (lo, hi) = (t.t1[i].min(t.t2[i]), t.t1[i].max(t.t2[i]));
                    if p.is_distinguishability_regime() {
                        prop_assert!(t.t3[i] <= lo);
                    } else {
                        prop_assert!(t.t3[i] >= hi);
                    }
                }
            }
        }

        #[test]
        fn greedy_matches_enumeration(n in 1usize..=4, seed in any::<u64>(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let m = OnticModel::random(n, seed).unwrap();
            let p = GameParams::new(a, b).unwrap();
            prop_assert_eq!(classical_comm_best(&m, p), classical_comm_brute_force(&m, p).unwrap());
        }

        #[test]
        fn classical_advantage_bound((m, p) in model_and_params()) {
            let lhs = classical_comm_best(&m, p) - (2.0 * p.beta + 1.0);
            prop_assert!(lhs <= s_lambda(&m, p).unwrap() + 1e-12);
        }
    }
}

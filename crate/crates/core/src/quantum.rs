//! Finite-dimensional states, effects and spectra.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending and
/// eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitize(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// `Re Tr(a b)`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    // Tr(a b) = sum_ij a_ij b_ji
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Sum of the strictly positive eigenvalues of a Hermitian matrix.
pub fn positive_part_trace(h: &CMatrix) -> Result<f64> {
    if !h.is_square() {
        return invalid("positive_part_trace expects a square matrix");
    }
    if hermiticity_defect(h) > HERMITIAN_TOL {
        return invalid("positive_part_trace expects a Hermitian matrix");
    }
    Ok(hermitian_eigenvalues(h)
        .into_iter()
        .filter(|&l| l > 0.0)
        .sum())
}

/// A unit vector in `C^d`, `d >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return invalid("pure states need dimension at least 2");
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("pure state amplitudes must be finite");
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return invalid(format!("pure state norm {norm} differs from 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `v` and fixes the global phase so that the first nonzero
    /// amplitude is real and positive.
    pub fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        let mut v = v / c(norm, 0.0);
        if let Some(lead) = v.iter().find(|z| z.norm() > 1e-14).copied() {
            let phase = lead.conj() / lead.norm();
            v *= phase;
        }
        Self::new(v)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&a| c(a, 0.0)),
        ))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            entries: hermitize(&self.projector()),
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() < 2 {
            return invalid("density matrices must be square with dimension at least 2");
        }
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return invalid(format!("density matrix is not Hermitian (defect {defect:.3e})"));
        }
        let tr = trace_re(&entries);
        if (tr - 1.0).abs() > TRACE_TOL {
            return invalid(format!("density matrix trace {tr} differs from 1"));
        }
        let lmin = min_eigenvalue(&entries);
        if lmin < -EIGEN_TOL {
            return invalid(format!("density matrix has negative eigenvalue {lmin:.3e}"));
        }
        Ok(Self {
            entries: hermitize(&entries),
        })
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| c(rows[i][j], 0.0)))
    }

    /// Nearest state to an approximately valid matrix such as a solver
    /// iterate: Hermitian part, negative eigenvalues clipped, trace rescaled.
    pub fn from_approximate(m: &CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 {
            return invalid("density matrices must be square with dimension at least 2");
        }
        let (vals, vecs) = hermitian_eigen(m);
        let clipped: Vec<f64> = vals.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return invalid("matrix has no positive part to normalize");
        }
        let n = m.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &l) in clipped.iter().enumerate() {
            if l > 0.0 {
                let v = vecs.column(k);
                out += (&v * v.adjoint()) * c(l / total, 0.0);
            }
        }
        Ok(Self {
            entries: hermitize(&out),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return invalid("dimension must be at least 2");
        }
        Ok(Self {
            entries: CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.entries, &self.entries)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// Leading eigenvector as a pure state (canonical phase).
    pub fn dominant_state(&self) -> PureState {
        let (_, vecs) = hermitian_eigen(&self.entries);
        let v = vecs.column(self.dim() - 1).into_owned();
        PureState::normalized(v).expect("eigenvectors have unit norm")
    }
}

/// Checks that `effects` is a valid measurement: Hermitian PSD effects summing
/// to the identity, both within `tol`.
pub fn validate_povm(effects: &[CMatrix], tol: f64) -> Result<()> {
    let Some(first) = effects.first() else {
        return invalid("a POVM needs at least one effect");
    };
    let d = first.nrows();
    let mut sum = CMatrix::zeros(d, d);
    for (k, e) in effects.iter().enumerate() {
        if e.nrows() != d || e.ncols() != d {
            return invalid(format!("effect {k} has the wrong shape"));
        }
        if hermiticity_defect(e) > HERMITIAN_TOL.max(tol) {
            return invalid(format!("effect {k} is not Hermitian"));
        }
        let lmin = min_eigenvalue(e);
        if lmin < -tol {
            return invalid(format!("effect {k} has negative eigenvalue {lmin:.3e}"));
        }
        sum += e;
    }
    let dev = (sum - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > tol {
        return invalid(format!("effects sum to identity only within {dev:.3e}"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        validate_povm(&effects, EIGEN_TOL)?;
        Ok(Self {
            effects: effects.iter().map(hermitize).collect(),
        })
    }

    /// Repairs a solver POVM: clips tiny negative eigenvalues, then applies the
    /// congruence `S^{-1/2} M_k S^{-1/2}` with `S = sum_k M_k`, which keeps every
    /// effect PSD and makes the sum the identity to rounding.
    pub fn from_approximate(effects: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return invalid("a POVM needs at least one effect");
        };
        let d = first.nrows();
        let clipped: Vec<CMatrix> = effects.iter().map(psd_part).collect();
        let sum = clipped.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
        let (vals, vecs) = hermitian_eigen(&sum);
        if vals[0] <= 0.0 {
            return invalid("effects do not sum to a positive definite matrix");
        }
        let inv_sqrt = &vecs
            * CMatrix::from_diagonal(&CVector::from_iterator(
                d,
                vals.iter().map(|&l| c(1.0 / l.sqrt(), 0.0)),
            ))
            * vecs.adjoint();
        let fixed: Vec<CMatrix> = clipped
            .iter()
            .map(|e| hermitize(&(&inv_sqrt * e * &inv_sqrt)))
            .collect();
        Self::new(fixed)
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    /// Outcome probabilities `Tr(rho M_k)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.effects
            .iter()
            .map(|e| trace_product(rho.matrix(), e))
            .collect()
    }
}

fn psd_part(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &l) in vals.iter().enumerate() {
        if l > 0.0 {
            let v = vecs.column(k);
            out += (&v * v.adjoint()) * c(l, 0.0);
        }
    }
    hermitize(&out)
}

/// A state paired with a positive prior weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedState {
    pub state: DensityMatrix,
    pub weight: f64,
}

impl WeightedState {
    pub fn new(state: DensityMatrix, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return invalid(format!("weights must be positive, got {weight}"));
        }
        Ok(Self { state, weight })
    }
}

/// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`, with the global phase
/// chosen so that the first amplitude is real and nonnegative.
pub fn bloch_state(theta_tilde: f64, phi: f64) -> Result<PureState> {
    if !theta_tilde.is_finite() || !phi.is_finite() {
        return invalid("Bloch angles must be finite");
    }
    let theta = theta_tilde.rem_euclid(2.0 * PI);
    let (s, co) = (theta / 2.0).sin_cos();
    let sign = if co < 0.0 { -1.0 } else { 1.0 };
    let amps = CVector::from_vec(vec![
        c(sign * co, 0.0),
        Complex64::from_polar(sign * s, phi),
    ]);
    // rem_euclid keeps the norm at 1 up to rounding; renormalize anyway
    PureState::new(amps.clone()).or_else(|_| PureState::normalized(amps))
}

/// Bloch vector `(Tr rho X, Tr rho Y, Tr rho Z)` of a qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return invalid("Bloch vectors are defined for qubits only");
    }
    let m = rho.matrix();
    Ok([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re])
}

/// Convex combination of states; weights must be nonnegative and sum to 1.
pub fn mix(states: &[(DensityMatrix, f64)]) -> Result<DensityMatrix> {
    let Some((first, _)) = states.first() else {
        return invalid("mix needs at least one component");
    };
    let d = first.dim();
    let mut total = 0.0;
    let mut out = CMatrix::zeros(d, d);
    for (rho, w) in states {
        if rho.dim() != d {
            return invalid("all mixed states must share one dimension");
        }
        if !(w.is_finite() && *w >= 0.0) {
            return invalid(format!("mixture weight {w} is negative or not finite"));
        }
        total += w;
        out += rho.matrix() * c(*w, 0.0);
    }
    if (total - 1.0).abs() > 1e-12 {
        return invalid(format!("mixture weights sum to {total}, not 1"));
    }
    DensityMatrix::new(hermitize(&out))
}

pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-random pure state drawn from `rng`.
pub fn random_pure_with<R: Rng>(rng: &mut R, dim: usize) -> Result<PureState> {
    if dim < 2 {
        return invalid("dimension must be at least 2");
    }
    loop {
        let v = gaussian_vector(rng, dim);
        if v.norm() > 1e-8 {
            return PureState::normalized(v);
        }
    }
}

/// Random state `G G^dagger / Tr(G G^dagger)` with `G` a `dim x rank` complex
/// Gaussian matrix.
pub fn random_density_with<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return invalid("dimension must be at least 2");
    }
    if rank == 0 || rank > dim {
        return invalid(format!("rank must lie in 1..={dim}, got {rank}"));
    }
    let mut g = CMatrix::zeros(dim, rank);
    for k in 0..rank {
        g.set_column(k, &gaussian_vector(rng, dim));
    }
    let gram = &g * g.adjoint();
    let tr = trace_re(&gram);
    DensityMatrix::new(hermitize(&(gram * c(1.0 / tr, 0.0))))
}

pub fn random_pure(dim: usize, seed: u64) -> Result<PureState> {
    random_pure_with(&mut ChaCha8Rng::seed_from_u64(seed), dim)
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut ChaCha8Rng::seed_from_u64(seed), dim, rank)
}

/// Serializable view of a complex matrix: `[[re, im], ...]` rows.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixData(pub Vec<Vec<[f64; 2]>>);

impl MatrixData {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.0.len();
        let m = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != m) {
            return invalid("ragged matrix rows");
        }
        Ok(CMatrix::from_fn(n, m, |i, j| c(self.0[i][j][0], self.0[i][j][1])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap()
    }

    fn ket_plus() -> DensityMatrix {
        DensityMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    #[test]
    fn bloch_state_examples() {
        let s = bloch_state(0.0, 0.0).unwrap();
        assert!(close(s.amplitudes()[0].re, 1.0, 1e-15));
        assert!(close(s.amplitudes()[1].norm(), 0.0, 1e-15));

        let s = bloch_state(2.0 * PI / 3.0, 0.0).unwrap();
        assert!(close(s.amplitudes()[0].re, 0.5, 1e-15));
        assert!(close(s.amplitudes()[1].re, 3f64.sqrt() / 2.0, 1e-15));

        let s = bloch_state(PI, 0.0).unwrap();
        assert!(close(s.amplitudes()[0].norm(), 0.0, 1e-15));
        assert!(close(s.amplitudes()[1].re, 1.0, 1e-15));

        assert!(bloch_state(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn bloch_state_phase_is_canonical() {
        let s = bloch_state(1.5 * PI + 2.0 * PI, 0.7).unwrap();
        assert!(s.amplitudes()[0].re >= 0.0);
        assert!(s.amplitudes()[0].im.abs() < 1e-15);
    }

    #[test]
    fn bloch_angle_sign_gives_same_fidelity() {
        let zero = bloch_state(0.0, 0.0).unwrap();
        for t in [0.1, 0.9, 2.0, 3.0] {
            let a = bloch_state(t, 0.0).unwrap().fidelity(&zero);
            let b = bloch_state(-t, 0.0).unwrap().fidelity(&zero);
            assert!(close(a, b, 1e-14));
        }
    }

    #[test]
    fn mix_examples() {
        let one = DensityMatrix::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let m = mix(&[(ket0(), 0.5), (one, 0.5)]).unwrap();
        assert!(close(m.matrix()[(0, 0)].re, 0.5, 1e-15));
        assert!(close(m.matrix()[(0, 1)].norm(), 0.0, 1e-15));

        let m = mix(&[(ket_plus(), 1.0)]).unwrap();
        assert_eq!(m, ket_plus());

        let m = mix(&[(ket0(), 0.5), (ket_plus(), 0.5)]).unwrap();
        let want = [[0.75, 0.25], [0.25, 0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m.matrix()[(i, j)].re, want[i][j], 1e-15));
            }
        }

        assert!(mix(&[(ket0(), 0.5), (ket_plus(), 0.4)]).is_err());
    }

    #[test]
    fn positive_part_examples() {
        assert_eq!(positive_part_trace(&CMatrix::zeros(2, 2)).unwrap(), 0.0);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.7, 0.0), c(-0.2, 0.0)]));
        assert!(close(positive_part_trace(&d).unwrap(), 0.7, 1e-15));
        let h = (ket0().matrix() - ket_plus().matrix()) * c(0.5, 0.0);
        assert!(close(positive_part_trace(&h).unwrap(), 1.0 / (2.0 * 2f64.sqrt()), 1e-14));

        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 1)] = c(1.0, 0.0);
        assert!(positive_part_trace(&bad).is_err());
    }

    #[test]
    fn positive_parts_sum_to_trace_norm() {
        for seed in 0..50 {
            let a = random_density(3, 3, seed).unwrap();
            let b = random_density(3, 2, seed + 1000).unwrap();
            let h = a.matrix() * c(0.8, 0.0) - b.matrix() * c(1.3, 0.0);
            let abs: f64 = hermitian_eigenvalues(&h).iter().map(|l| l.abs()).sum();
            let p = positive_part_trace(&h).unwrap();
            let n = positive_part_trace(&(-h)).unwrap();
            assert!(close(p + n, abs, 1e-10));
        }
    }

    #[test]
    fn pure_density_has_rank_one() {
        for seed in 0..20 {
            let psi = random_pure(4, seed).unwrap();
            let rho = psi.density();
            let ev = rho.eigenvalues();
            assert!(close(trace_re(rho.matrix()), 1.0, 1e-12));
            assert!(close(ev[3], 1.0, 1e-12));
            assert!(ev[..3].iter().all(|l| l.abs() < 1e-12));
        }
    }

    #[test]
    fn random_draws_are_deterministic_and_normalized() {
        assert_eq!(random_pure(3, 9).unwrap(), random_pure(3, 9).unwrap());
        assert_eq!(random_density(3, 2, 9).unwrap(), random_density(3, 2, 9).unwrap());
        for seed in 0..1000 {
            assert!(close(random_pure(2, seed).unwrap().amplitudes().norm(), 1.0, 1e-12));
        }
        assert!(random_pure(1, 0).is_err());
        assert!(random_density(2, 3, 0).is_err());
        let r = random_density(4, 2, 5).unwrap();
        assert_eq!(r.eigenvalues().iter().filter(|l| **l > 1e-12).count(), 2);
    }

    #[test]
    fn random_pure_is_unitarily_invariant_on_average() {
        // E <psi|A|psi> = Tr(A)/d for Haar-random psi
        let d = 3;
        let a = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                c([0.3, -1.1, 2.0][i], 0.0)
            } else if i < j {
                c(0.4, 0.2 * (i + j) as f64)
            } else {
                c(0.4, -0.2 * (i + j) as f64)
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| {
                let psi = random_pure_with(&mut rng, d).unwrap();
                trace_product(&a, &psi.projector())
            })
            .collect();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - trace_re(&a) / d as f64).abs() < 3.0 * se);
    }

    #[test]
    fn povm_validation() {
        let z = ket0().into_matrix();
        let o = CMatrix::identity(2, 2) - &z;
        assert!(Povm::new(vec![z.clone(), o.clone()]).is_ok());
        let mut off = o.clone();
        off[(1, 1)] += c(2e-8, 0.0);
        assert!(validate_povm(&[z.clone(), off], 1e-10).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.1, 0.0), c(0.0, 0.0)]));
        let rest = CMatrix::identity(2, 2) - &neg;
        assert!(Povm::new(vec![neg, rest]).is_err());
    }

    #[test]
    fn approximate_povm_is_repaired() {
        let z = ket0().into_matrix() * c(1.0 + 3e-9, 0.0);
        let o = CMatrix::identity(2, 2) - ket0().into_matrix();
        let p = Povm::from_approximate(vec![z, o]).unwrap();
        assert!(validate_povm(p.effects(), 1e-13).is_ok());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_real(&[&[1.1, 0.0], &[0.0, -0.1]]).is_err());
        assert!(DensityMatrix::from_real(&[&[0.5, 0.0], &[0.0, 0.6]]).is_err());
        assert!(DensityMatrix::from_real(&[&[0.5, 0.1], &[0.0, 0.5]]).is_err());
        let approx = CMatrix::from_fn(2, 2, |i, j| c(if i == j { 0.5 + 1e-9 } else { 0.0 }, 0.0));
        assert!(DensityMatrix::from_approximate(&approx).is_ok());
    }

    #[test]
    fn bloch_vectors() {
        assert_eq!(bloch_vector(&ket0()).unwrap(), [0.0, 0.0, 1.0]);
        let v = bloch_vector(&ket_plus()).unwrap();
        assert!(close(v[0], 1.0, 1e-15) && close(v[2], 0.0, 1e-15));
    }
}

//! Infeasible primal-dual path following with the HKM direction and
//! Mehrotra predictor-corrector steps.

use nalgebra::{Cholesky, ComplexField, DMatrix, DVector, Dyn, SymmetricEigen, LU};
use num_complex::Complex64;

use super::presolve::{presolve, row_is_imaginary, row_is_real, Presolved, Row};
use super::{hermitian_basis, Infeasibility, SdpProblem, SdpSolution, Sense, SolveStatus, SolverOptions, SparseHermitian};
use crate::quantum::CMatrix;

pub(crate) trait Scalar: ComplexField<RealField = f64> + Copy {
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
}

impl Scalar for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
}

type Entries<T> = Vec<(usize, usize, T)>;

struct StdData<T: Scalar> {
    dims: Vec<usize>,
    c: Vec<DMatrix<T>>,
    rows: Vec<Vec<(usize, Entries<T>)>>,
    b: DVector<f64>,
    /// per block: (row index, part index)
    by_block: Vec<Vec<(usize, usize)>>,
}

impl<T: Scalar> StdData<T> {
    fn new(dims: Vec<usize>, c: &[SparseHermitian], rows: &[&Row], b: Vec<f64>) -> Self {
        let c = c.iter().map(|s| convert(&s.to_dense())).collect();
        let rows: Vec<Vec<(usize, Entries<T>)>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(blk, a)| {
                        (*blk, a.entries().iter().map(|&(r, cc, v)| (r, cc, T::from_c64(v))).collect())
                    })
                    .collect()
            })
            .collect();
        let mut by_block = vec![Vec::new(); dims.len()];
        for (i, row) in rows.iter().enumerate() {
            for (p, (blk, _)) in row.iter().enumerate() {
                by_block[*blk].push((i, p));
            }
        }
        Self {
            dims,
            c,
            rows,
            b: DVector::from_vec(b),
            by_block,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn apply_a(&self, x: &[DMatrix<T>]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|row| {
                row.iter()
                    .map(|(blk, ent)| ent.iter().map(|&(r, c, v)| (v * x[*blk][(c, r)]).real()).sum::<f64>())
                    .sum::<f64>()
            }),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<T>> {
        let mut out: Vec<DMatrix<T>> = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (row, &yi) in self.rows.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for (blk, ent) in row {
                for &(r, c, v) in ent {
                    out[*blk][(r, c)] += v * T::from_real(yi);
                }
            }
        }
        out
    }
}

fn convert<T: Scalar>(m: &CMatrix) -> DMatrix<T> {
    m.map(T::from_c64)
}

fn back<T: Scalar>(m: &DMatrix<T>) -> CMatrix {
    m.map(|v| v.to_c64())
}

fn herm<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.adjoint()) * T::from_real(0.5)
}

fn inner<T: Scalar>(a: &[DMatrix<T>], b: &[DMatrix<T>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y).real()).sum()
}

fn frob<T: Scalar>(a: &[DMatrix<T>]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn inverse<T: Scalar>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    Cholesky::new(herm(m)).map(|c| herm(&c.inverse()))
}

/// Largest `t` with `x + t dx >= 0`, infinite if every step is feasible.
fn max_step<T: Scalar>(x: &DMatrix<T>, dx: &DMatrix<T>) -> f64 {
    let Some(ch) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let Some(w) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(z) = l.solve_lower_triangular(&w.adjoint()) else {
        return 0.0;
    };
    let lmin = SymmetricEigen::new(herm(&z)).eigenvalues.min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> f64 {
    SymmetricEigen::new(herm(m)).eigenvalues.max()
}

struct Factor {
    m: DMatrix<f64>,
    kind: FactorKind,
}

enum FactorKind {
    Chol(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        let kind = FactorKind::new(&m)?;
        Some(Self { m, kind })
    }

    /// Solve with iterative refinement against the unshifted matrix.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.kind.solve(rhs);
        let mut res = rhs - &self.m * &x;
        for _ in 0..3 {
            let norm = res.norm();
            if norm <= 1e-15 * (1.0 + rhs.norm()) {
                break;
            }
            let cand = &x + self.kind.solve(&res);
            let cand_res = rhs - &self.m * &cand;
            if cand_res.norm() >= norm {
                break;
            }
            x = cand;
            res = cand_res;
        }
        x
    }
}

impl FactorKind {
    fn new(m: &DMatrix<f64>) -> Option<Self> {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(FactorKind::Chol(c));
        }
        let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let mut delta = 1e-14 * scale;
        for _ in 0..4 {
            let shifted = m + DMatrix::identity(m.nrows(), m.nrows()) * delta;
            if let Some(c) = Cholesky::new(shifted) {
                return Some(FactorKind::Chol(c));
            }
            delta *= 100.0;
        }
        let lu = m.clone().lu();
        if lu.is_invertible() {
            Some(FactorKind::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            FactorKind::Chol(c) => c.solve(rhs),
            FactorKind::Lu(l) => l.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

enum Ray<T: Scalar> {
    Primal(DVector<f64>),
    Dual(Vec<DMatrix<T>>),
}

struct Outcome<T: Scalar> {
    x: Vec<DMatrix<T>>,
    y: DVector<f64>,
    s: Vec<DMatrix<T>>,
    status: SolveStatus,
    iterations: usize,
    ray: Option<Ray<T>>,
}

struct Newton<'a, T: Scalar> {
    data: &'a StdData<T>,
    x: &'a [DMatrix<T>],
    sinv: &'a [DMatrix<T>],
    rp: &'a DVector<f64>,
    rd: &'a [DMatrix<T>],
    factor: &'a Factor,
}

impl<T: Scalar> Newton<'_, T> {
    fn direction(&self, rc: &[DMatrix<T>]) -> (Vec<DMatrix<T>>, DVector<f64>, Vec<DMatrix<T>>) {
        let tmp: Vec<DMatrix<T>> = (0..self.x.len())
            .map(|b| (&rc[b] - &self.x[b] * &self.rd[b]) * &self.sinv[b])
            .collect();
        let rhs = self.rp - self.data.apply_a(&tmp);
        let dy = if self.data.m() == 0 {
            DVector::zeros(0)
        } else {
            self.factor.solve(&rhs)
        };
        let aty = self.data.apply_at(&dy);
        let ds: Vec<DMatrix<T>> = self.rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
        let dx = (0..self.x.len())
            .map(|b| herm(&((&rc[b] - &self.x[b] * &ds[b]) * &self.sinv[b])))
            .collect();
        (dx, dy, ds)
    }
}

fn schur<T: Scalar>(data: &StdData<T>, x: &[DMatrix<T>], sinv: &[DMatrix<T>]) -> DMatrix<f64> {
    let m = data.m();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for (b, users) in data.by_block.iter().enumerate() {
        let n = data.dims[b];
        for &(j, pj) in users {
            let mut g = DMatrix::<T>::zeros(n, n);
            for &(r, c, v) in &data.rows[j][pj].1 {
                g.ger(v, &x[b].column(r), &sinv[b].row(c).transpose(), T::one());
            }
            for &(i, pi) in users {
                if i > j {
                    continue;
                }
                let val: f64 = data.rows[i][pi].1.iter().map(|&(r, c, w)| (w * g[(c, r)]).real()).sum();
                mat[(i, j)] += val;
            }
        }
    }
    for j in 0..m {
        for i in 0..j {
            mat[(j, i)] = mat[(i, j)];
        }
    }
    mat
}

/// Stalled iterates within this multiple of every tolerance are reported
/// as near optimal.
const NEAR_OPTIMAL_FACTOR: f64 = 1e4;

fn run<T: Scalar>(data: &StdData<T>, opts: &SolverOptions) -> Outcome<T> {
    let m = data.m();
    let n_total: usize = data.dims.iter().sum();
    let nf = n_total as f64;

    let row_norms: Vec<f64> = data
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|(_, e)| e.iter().map(|&(_, _, v)| v.modulus_squared()).sum::<f64>())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut xi = 10.0f64.max(nf.sqrt());
    for (k, &an) in row_norms.iter().enumerate() {
        xi = xi.max(nf.sqrt() * (1.0 + data.b[k].abs()) / (1.0 + an));
    }
    let mut eta = 10.0f64.max(nf.sqrt()).max(frob(&data.c));
    for &an in &row_norms {
        eta = eta.max(an);
    }
    let norm_b = data.b.norm();
    let norm_c = frob(&data.c);

    let mut x: Vec<DMatrix<T>> = data.dims.iter().map(|&n| DMatrix::identity(n, n) * T::from_real(xi)).collect();
    let mut s: Vec<DMatrix<T>> = data.dims.iter().map(|&n| DMatrix::identity(n, n) * T::from_real(eta)).collect();
    let mut y = DVector::<f64>::zeros(m);

    let mut best: Option<(f64, Vec<DMatrix<T>>, DVector<f64>, Vec<DMatrix<T>>)> = None;
    let mut stalls = 0;
    let mut since_progress = 0;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter;
        let rp = &data.b - data.apply_a(&x);
        let aty = data.apply_at(&y);
        let rd: Vec<DMatrix<T>> = (0..x.len()).map(|b| &data.c[b] - &aty[b] - &s[b]).collect();
        let xs = inner(&x, &s);
        let mu = xs / nf;
        let pobj = inner(&data.c, &x);
        let dobj = data.b.dot(&y);
        let gap = (pobj - dobj).abs().max(xs);
        let pres = rp.norm();
        let dres = frob(&rd);
        if !(gap.is_finite() && pres.is_finite() && dres.is_finite()) {
            break;
        }
        let merit = (gap / opts.gap_tolerance).max(pres / opts.residual_tolerance).max(dres / opts.residual_tolerance);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            if best.as_ref().is_none_or(|b| merit < 0.5 * b.0) {
                since_progress = 0;
            }
            best = Some((merit, x.clone(), y.clone(), s.clone()));
        } else {
            since_progress += 1;
        }
        // no halving of the merit for a while: the iterate has stalled
        if since_progress > 20 {
            break;
        }
        if gap <= opts.gap_tolerance && pres <= opts.residual_tolerance && dres <= opts.residual_tolerance {
            return Outcome {
                x,
                y,
                s,
                status: SolveStatus::Optimal,
                iterations,
                ray: None,
            };
        }

        // Farkas rays
        if dobj > 1e8 * (1.0 + norm_c) {
            let yh = &y / dobj;
            let at = data.apply_at(&yh);
            if at.iter().map(max_eigenvalue).fold(f64::NEG_INFINITY, f64::max) <= 1e-6 {
                return Outcome {
                    x,
                    y,
                    s,
                    status: SolveStatus::Infeasible,
                    iterations,
                    ray: Some(Ray::Primal(yh)),
                };
            }
        }
        if -pobj > 1e8 * (1.0 + norm_b) {
            let xh: Vec<DMatrix<T>> = x.iter().map(|v| v * T::from_real(1.0 / -pobj)).collect();
            if data.apply_a(&xh).norm() <= 1e-6 {
                return Outcome {
                    x,
                    y,
                    s,
                    status: SolveStatus::Infeasible,
                    iterations,
                    ray: Some(Ray::Dual(xh)),
                };
            }
        }

        let Some(sinv) = s.iter().map(inverse).collect::<Option<Vec<_>>>() else {
            break;
        };
        let mat = schur(data, &x, &sinv);
        let Some(factor) = (if m == 0 { Factor::new(DMatrix::identity(1, 1)) } else { Factor::new(mat) }) else {
            break;
        };
        let newton = Newton {
            data,
            x: &x,
            sinv: &sinv,
            rp: &rp,
            rd: &rd,
            factor: &factor,
        };

        let xs_mat: Vec<DMatrix<T>> = x.iter().zip(&s).map(|(a, b)| a * b).collect();
        let rc_pred: Vec<DMatrix<T>> = xs_mat.iter().map(|v| -v.clone()).collect();
        let (dx_a, _, ds_a) = newton.direction(&rc_pred);
        let ap_a = x.iter().zip(&dx_a).map(|(a, d)| max_step(a, d)).fold(f64::INFINITY, f64::min).min(1.0);
        let ad_a = s.iter().zip(&ds_a).map(|(a, d)| max_step(a, d)).fold(f64::INFINITY, f64::min).min(1.0);
        let x_a: Vec<DMatrix<T>> = x.iter().zip(&dx_a).map(|(a, d)| a + d * T::from_real(ap_a)).collect();
        let s_a: Vec<DMatrix<T>> = s.iter().zip(&ds_a).map(|(a, d)| a + d * T::from_real(ad_a)).collect();
        let mu_a = inner(&x_a, &s_a) / nf;
        let sigma = if mu > 0.0 { (mu_a / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        let rc_corr: Vec<DMatrix<T>> = (0..x.len())
            .map(|b| {
                let n = data.dims[b];
                DMatrix::<T>::identity(n, n) * T::from_real(sigma * mu) - &xs_mat[b] - &dx_a[b] * &ds_a[b]
            })
            .collect();
        let (dx, dy, ds) = newton.direction(&rc_corr);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let ap = (gamma * x.iter().zip(&dx).map(|(a, d)| max_step(a, d)).fold(f64::INFINITY, f64::min)).min(1.0);
        let ad = (gamma * s.iter().zip(&ds).map(|(a, d)| max_step(a, d)).fold(f64::INFINITY, f64::min)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) {
            break;
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls > 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        for b in 0..x.len() {
            x[b] = herm(&(&x[b] + &dx[b] * T::from_real(ap)));
            s[b] = herm(&(&s[b] + &ds[b] * T::from_real(ad)));
        }
        y += dy * ad;
        iterations = iter + 1;
    }

    let (status, x, y, s) = match best {
        Some((merit, bx, by, bs)) if merit <= NEAR_OPTIMAL_FACTOR => (SolveStatus::NearOptimal, bx, by, bs),
        Some((_, bx, by, bs)) => (SolveStatus::MaxIterations, bx, by, bs),
        None => (SolveStatus::MaxIterations, x, y, s),
    };
    Outcome {
        x,
        y,
        s,
        status,
        iterations,
        ray: None,
    }
}

struct Compiled {
    dims: Vec<usize>,
    c: Vec<SparseHermitian>,
    rows: Vec<Row>,
    b: Vec<f64>,
    n_user_blocks: usize,
    n_user_rows: usize,
}

fn compile(p: &SdpProblem) -> Compiled {
    let sign = match p.sense() {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut dims = p.block_dims().to_vec();
    let mut c: Vec<SparseHermitian> = (0..p.num_blocks()).map(|b| p.objective(b).scaled(sign)).collect();
    let mut rows: Vec<Row> = p.equalities().iter().map(|e| e.terms.clone()).collect();
    let mut b: Vec<f64> = p.equalities().iter().map(|e| e.rhs).collect();
    for off in p.offsets() {
        let d = off.constant.nrows();
        let slack = dims.len();
        dims.push(d);
        c.push(SparseHermitian::zeros(d));
        for e in hermitian_basis(d) {
            let mut row: Row = vec![(slack, e.clone())];
            for &(blk, coef) in &off.terms {
                if coef != 0.0 {
                    match row.iter_mut().find(|(rb, _)| *rb == blk) {
                        Some((_, acc)) => *acc = acc.plus(&e.scaled(-coef)),
                        None => row.push((blk, e.scaled(-coef))),
                    }
                }
            }
            b.push(e.inner(&off.constant));
            rows.push(row);
        }
    }
    Compiled {
        dims,
        c,
        rows,
        b,
        n_user_blocks: p.num_blocks(),
        n_user_rows: p.num_equalities(),
    }
}

pub(crate) fn solve_problem(p: &SdpProblem, opts: &SolverOptions) -> SdpSolution {
    let comp = compile(p);
    let real_mode = !opts.force_complex
        && comp.c.iter().all(|c| c.is_real())
        && comp
            .rows
            .iter()
            .zip(&comp.b)
            .all(|(r, &rhs)| row_is_real(r) || (row_is_imaginary(r) && rhs == 0.0));
    let active: Vec<usize> = (0..comp.rows.len())
        .filter(|&i| !real_mode || row_is_real(&comp.rows[i]))
        .collect();
    let active_rows: Vec<&Row> = active.iter().map(|&i| &comp.rows[i]).collect();
    let active_b: Vec<f64> = active.iter().map(|&i| comp.b[i]).collect();

    let kept = match presolve(&comp.dims, &active_rows, &active_b) {
        Presolved::Kept(k) => k,
        Presolved::Inconsistent(combo) => {
            let mut y = vec![0.0; comp.n_user_rows];
            for (k, &i) in active.iter().enumerate() {
                if i < comp.n_user_rows {
                    y[i] = combo[k];
                }
            }
            return infeasible_without_iterate(p, &comp, Infeasibility::InconsistentEqualities { y });
        }
    };
    let rows_idx: Vec<usize> = kept.iter().map(|&k| active[k]).collect();
    let rows: Vec<&Row> = rows_idx.iter().map(|&i| &comp.rows[i]).collect();
    let b: Vec<f64> = rows_idx.iter().map(|&i| comp.b[i]).collect();

    if real_mode {
        let data = StdData::<f64>::new(comp.dims.clone(), &comp.c, &rows, b);
        let out = run(&data, opts);
        finish(p, &comp, &rows_idx, &data, out)
    } else {
        let data = StdData::<Complex64>::new(comp.dims.clone(), &comp.c, &rows, b);
        let out = run(&data, opts);
        finish(p, &comp, &rows_idx, &data, out)
    }
}

fn user_sign(p: &SdpProblem) -> f64 {
    match p.sense() {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    }
}

fn finish<T: Scalar>(p: &SdpProblem, comp: &Compiled, rows_idx: &[usize], data: &StdData<T>, out: Outcome<T>) -> SdpSolution {
    let sign = user_sign(p);
    let x: Vec<CMatrix> = out.x.iter().map(back).collect();
    let s: Vec<CMatrix> = out.s.iter().map(back).collect();
    let mut y_full = vec![0.0; comp.rows.len()];
    for (k, &i) in rows_idx.iter().enumerate() {
        y_full[i] = out.y[k];
    }

    let pobj: f64 = comp.c.iter().zip(&x).map(|(c, xb)| c.inner(xb)).sum();
    let dobj = data.b.dot(&out.y);
    let primal_value = sign * pobj + p.objective_constant();
    let dual_value = sign * dobj + p.objective_constant();

    let primal_residual = comp
        .rows
        .iter()
        .zip(&comp.b)
        .map(|(row, &rhs)| {
            let lhs: f64 = row.iter().map(|(blk, a)| a.inner(&x[*blk])).sum();
            (lhs - rhs).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let aty = data.apply_at(&out.y);
    let dual_residual = (0..out.x.len())
        .map(|b| (&data.c[b] - &aty[b] - &out.s[b]).norm_squared())
        .sum::<f64>()
        .sqrt();

    let infeasibility = out.ray.map(|ray| match ray {
        Ray::Primal(yh) => {
            let mut y = vec![0.0; comp.n_user_rows];
            for (k, &i) in rows_idx.iter().enumerate() {
                if i < comp.n_user_rows {
                    y[i] = yh[k];
                }
            }
            Infeasibility::Primal { y }
        }
        Ray::Dual(xh) => Infeasibility::Dual {
            x: xh.iter().take(comp.n_user_blocks).map(back).collect(),
        },
    });

    SdpSolution {
        status: out.status,
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        primal_residual,
        dual_residual,
        block_values: x[..comp.n_user_blocks].to_vec(),
        offset_values: x[comp.n_user_blocks..].to_vec(),
        offset_duals: s[comp.n_user_blocks..].to_vec(),
        dual: y_full[..comp.n_user_rows].iter().map(|v| sign * v).collect(),
        dual_slacks: s[..comp.n_user_blocks].to_vec(),
        iterations: out.iterations,
        infeasibility,
    }
}

fn infeasible_without_iterate(p: &SdpProblem, comp: &Compiled, cert: Infeasibility) -> SdpSolution {
    let zeros: Vec<CMatrix> = comp.dims.iter().map(|&n| CMatrix::zeros(n, n)).collect();
    SdpSolution {
        status: SolveStatus::Infeasible,
        primal_value: f64::NAN,
        dual_value: f64::NAN,
        gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        block_values: zeros[..comp.n_user_blocks].to_vec(),
        offset_values: zeros[comp.n_user_blocks..].to_vec(),
        offset_duals: zeros[comp.n_user_blocks..].to_vec(),
        dual: vec![0.0; p.num_equalities()],
        dual_slacks: zeros[..comp.n_user_blocks].to_vec(),
        iterations: 0,
        infeasibility: Some(cert),
    }
}

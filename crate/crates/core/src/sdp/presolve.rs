//! Removal of linearly dependent equality rows.

use super::SparseHermitian;

pub(crate) type Row = Vec<(usize, SparseHermitian)>;

pub(crate) enum Presolved {
    Kept(Vec<usize>),
    /// Witness `y` with `sum_i y_i A_i = 0` and `b^T y != 0`.
    Inconsistent(Vec<f64>),
}

const DEPENDENCE_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-9;

/// Coordinates of a row as a real vector over the Hermitian entries of every
/// block, so that `Re Tr(A X) = <coords(A), coords(X)>` up to fixed weights.
fn coordinates(row: &Row, offsets: &[usize], total: usize) -> Vec<f64> {
    let mut v = vec![0.0; total];
    for (b, a) in row {
        let n = a.dim();
        for &(r, c, z) in a.entries() {
            if r > c {
                continue;
            }
            let base = offsets[*b] + index(n, r, c);
            if r == c {
                v[base] += z.re;
            } else {
                v[base] += 2.0 * z.re;
                v[base + 1] += 2.0 * z.im;
            }
        }
    }
    v
}

fn index(n: usize, r: usize, c: usize) -> usize {
    // rows before r contribute (n - r') diagonal+pairs each, off-diagonals use two slots
    let mut idx = 0;
    for rr in 0..r {
        idx += 1 + 2 * (n - rr - 1);
    }
    if c == r {
        idx
    } else {
        idx + 1 + 2 * (c - r - 1)
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
pub(crate) fn presolve(dims: &[usize], rows: &[&Row], rhs: &[f64]) -> Presolved {
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0;
    for &n in dims {
        offsets.push(total);
        total += n * n;
    }
    let m = rows.len();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    // t[k] expresses q_k in terms of original rows
    let mut t: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..m {
        let a = coordinates(rows[i], &offsets, total);
        let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut v = a;
        let mut coef = vec![0.0; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let d: f64 = qk.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= d * qi;
                }
                coef[k] += d;
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let implied: f64 = coef.iter().zip(&beta).map(|(c, b)| c * b).sum();
        let mut combo = vec![0.0; m];
        combo[i] = 1.0;
        for (k, ck) in coef.iter().enumerate() {
            for (j, tj) in t[k].iter().enumerate() {
                combo[j] -= ck * tj;
            }
        }
        if norm_a == 0.0 || nrm <= DEPENDENCE_TOL * norm_a.max(1.0) {
            if (rhs[i] - implied).abs() > CONSISTENCY_TOL * rhs[i].abs().max(1.0) {
                return Presolved::Inconsistent(combo);
            }
            continue;
        }
        for x in v.iter_mut() {
            *x /= nrm;
        }
        for x in combo.iter_mut() {
            *x /= nrm;
        }
        beta.push((rhs[i] - implied) / nrm);
        q.push(v);
        t.push(combo);
        kept.push(i);
    }
    Presolved::Kept(kept)
}

pub(crate) fn row_is_real(row: &Row) -> bool {
    row.iter().all(|(_, a)| a.is_real())
}

pub(crate) fn row_is_imaginary(row: &Row) -> bool {
    row.iter().all(|(_, a)| a.is_imaginary())
}

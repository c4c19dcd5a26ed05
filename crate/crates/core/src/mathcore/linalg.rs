//! Dense symmetric matrices, a cyclic Jacobi eigensolver and small
//! determinants.
//!
//! The Jacobi solver sweeps the off-diagonal pairs in round-robin
//! ("tournament") order: each step holds n/2 disjoint pairs, all of whose
//! rotations commute, so one step is two passes of contiguous row updates.
//! Every sweep still visits every pair exactly once, so this is ordinary
//! cyclic Jacobi with a different visiting order.  It is much kinder to the
//! cache than row-cyclic order at the N_A ≈ 10³ sizes used for entanglement
//! spectra.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Real symmetric matrix stored as its packed lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from `f(i, j)` evaluated on the lower triangle (`j ≤ i`).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Build from a full row-major array, which must be symmetric.
    pub fn from_dense(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Domain(format!(
                "expected {} entries for a {dim}×{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                if a != b {
                    return Err(Error::Domain(format!("matrix not symmetric at ({i},{j}): {a} vs {b}")));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| data[i * dim + j]))
    }

    /// Build from the packed lower triangle, row by row.
    pub fn from_packed(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * (dim + 1) / 2 {
            return Err(Error::Domain(format!(
                "packed storage for dim {dim} needs {} entries, got {}",
                dim * (dim + 1) / 2,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[packed(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[packed(i, j)] = v;
    }

    pub fn packed_entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Full row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.get(i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// `Q f(Λ) Qᵀ` for the spectral decomposition of `self`.
    pub fn map_spectrum(eig: &Eigen, mut f: impl FnMut(f64) -> f64) -> Self {
        let n = eig.dim;
        let fl: Vec<f64> = eig.values.iter().map(|&l| f(l)).collect();
        Self::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += eig.vector_component(i, k) * fl[k] * eig.vector_component(j, k);
            }
            s
        })
    }
}

/// Eigen-decomposition: ascending eigenvalues and orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Row-major `dim × dim`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

impl Eigen {
    pub fn vector_component(&self, row: usize, k: usize) -> f64 {
        self.vectors[row * self.dim + k]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.vector_component(i, k)).collect()
    }

    /// ‖QΛQᵀ − M‖_F.
    pub fn reconstruction_residual(&self, m: &SymmetricMatrix) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut r = 0.0;
                for k in 0..n {
                    r += self.vector_component(i, k) * self.values[k] * self.vector_component(j, k);
                }
                s += (r - m.get(i, j)).powi(2);
            }
        }
        s.sqrt()
    }
}

/// Eigenvalues and eigenvectors of a symmetric matrix.
pub fn sym_eigen(m: &SymmetricMatrix) -> Result<Eigen> {
    jacobi(m, true)
}

/// Eigenvalues only (ascending); skips the eigenvector accumulation.
pub fn sym_eigenvalues(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    jacobi(m, false).map(|e| e.values)
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Round-robin pairing schedule: `n_pad − 1` rounds of `n_pad / 2` pairs
/// covering every unordered pair once.  Pairs touching the padding index of
/// odd-sized problems are dropped.
fn tournament(n: usize) -> Vec<Vec<(usize, usize)>> {
    let m = if n % 2 == 0 { n } else { n + 1 };
    let mut rounds = Vec::with_capacity(m - 1);
    for r in 0..m - 1 {
        let mut pairs = Vec::with_capacity(m / 2);
        // Circle method: player m−1 is fixed, the rest rotate.
        let seat = |k: usize| if k == m - 1 { m - 1 } else { (k + r) % (m - 1) };
        for k in 0..m / 2 {
            let (p, q) = (seat(k), seat(m - 1 - k));
            let (p, q) = if p < q { (p, q) } else { (q, p) };
            if q < n {
                pairs.push((p, q));
            }
        }
        rounds.push(pairs);
    }
    rounds
}

fn jacobi(m: &SymmetricMatrix, want_vectors: bool) -> Result<Eigen> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Domain("sym_eigen: dimension must be at least 1".into()));
    }
    if !m.is_finite() {
        return Err(Error::Domain("sym_eigen: matrix has non-finite entries".into()));
    }
    let mut a = m.to_dense();
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        v
    } else {
        Vec::new()
    };
    let scale = m.frobenius_norm();
    let rounds = tournament(n);
    let mut rot: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(n / 2 + 1);

    let mut converged = n == 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        let off = off_norm(&a, n);
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        // Threshold sweeps: early on, skip pairs that are small compared
        // with the typical off-diagonal element.
        let threshold = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for pairs in &rounds {
            rot.clear();
            for &(p, q) in pairs {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq == 0.0 || apq.abs() <= threshold {
                    continue;
                }
                // Negligible against both diagonal entries: just drop it.
                if sweep > 3 && apq.abs() < 1e-18 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rot.push((p, q, c, s));
            }
            if rot.is_empty() {
                continue;
            }
            // A ← JᵀA : mixes rows p and q.
            for &(p, q, c, s) in &rot {
                let (rp, rq) = two_rows(&mut a, n, p, q);
                for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
            // A ← AJ : mixes columns p and q within every row.
            for row in a.chunks_exact_mut(n) {
                for &(p, q, c, s) in &rot {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = c * xp - s * xq;
                    row[q] = s * xp + c * xq;
                }
            }
            for &(p, q, _, _) in &rot {
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
            if want_vectors {
                for row in v.chunks_exact_mut(n) {
                    for &(p, q, c, s) in &rot {
                        let (xp, xq) = (row[p], row[q]);
                        row[p] = c * xp - s * xq;
                        row[q] = s * xp + c * xq;
                    }
                }
            }
        }
        sweep += 1;
    }
    if !converged {
        let off = off_norm(&a, n);
        if off > 1e-15 * scale {
            return Err(Error::numeric(
                format!("sym_eigen: no convergence after {MAX_SWEEPS} sweeps"),
                off,
                off,
            ));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = if want_vectors {
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for (k, &src) in order.iter().enumerate() {
                out[r * n + k] = v[r * n + src];
            }
        }
        out
    } else {
        Vec::new()
    };
    Ok(Eigen { dim: n, values, vectors })
}

fn two_rows(a: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = a.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

/// Determinant of a small dense row-major matrix by LU with partial pivoting.
pub fn determinant(dim: usize, data: &[f64]) -> Result<f64> {
    if data.len() != dim * dim {
        return Err(Error::Domain(format!("determinant: expected {} entries", dim * dim)));
    }
    let mut a = data.to_vec();
    let mut det = 1.0;
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&i, &j| a[i * dim + col].abs().total_cmp(&a[j * dim + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * dim + col] == 0.0 {
            return Ok(0.0);
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(pivot * dim + k, col * dim + k);
            }
            det = -det;
        }
        let d = a[col * dim + col];
        det *= d;
        for r in col + 1..dim {
            let factor = a[r * dim + col] / d;
            if factor != 0.0 {
                for k in col..dim {
                    a[r * dim + k] -= factor * a[col * dim + k];
                }
            }
        }
    }
    Ok(det)
}

/// Determinant by the explicit signed permutation sum.  Only for
/// cross-checking small matrices.
pub fn leibniz_determinant(dim: usize, data: &[f64]) -> Result<f64> {
    if data.len() != dim * dim {
        return Err(Error::Domain(format!("leibniz_determinant: expected {} entries", dim * dim)));
    }
    if dim > 10 {
        return Err(Error::Unsupported(format!("leibniz_determinant: dim {dim} is too large")));
    }
    let mut perm: Vec<usize> = (0..dim).collect();
    let mut total = 0.0;
    // Heap's algorithm; each swap flips the sign.
    let mut sign = 1.0;
    let mut c = vec![0usize; dim];
    let term = |perm: &[usize]| (0..dim).map(|i| data[i * dim + perm[i]]).product::<f64>();
    total += sign * term(&perm);
    let mut i = 0;
    while i < dim {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            total += sign * term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

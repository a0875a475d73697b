//! Complex sparse matrices and Hermitian eigensolvers.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{EighInto, Lapack, Scalar, UPLO};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dense eigensolver failed: {0}")]
    Dense(String),
    #[error("iterative eigensolver did not converge (worst residual {residual:.3e}) and the dimension {dim} exceeds the dense limit")]
    NoConvergence { residual: f64, dim: usize },
    #[error("requested {requested} eigenpairs from a {dim}-dimensional matrix")]
    TooManyPairs { requested: usize, dim: usize },
}

/// Square complex matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![ONE; n],
        }
    }

    /// Real parts of the diagonal entries.
    pub fn diagonal_re(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.indptr[i]..self.indptr[i + 1])
                    .find(|&p| self.indices[p] == i)
                    .map_or(0.0, |p| self.values[p].re)
            })
            .collect()
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, v)| (i, i, *v)))
    }

    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i},{j}) outside {n}x{n}");
            rows[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut acc = ZERO;
                while k < row.len() && row[k].0 == col {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != ZERO {
                    indices.push(col);
                    values.push(acc);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
        }
    }

    /// Keeps entries with magnitude above `tol`.
    pub fn from_dense(a: &ArrayView2<C64>, tol: f64) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let mut t = Vec::new();
        for ((i, j), v) in a.indexed_iter() {
            if v.norm() > tol {
                t.push((i, j, *v));
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut a = Array2::zeros((self.n, self.n));
        for (i, j, v) in self.iter() {
            a[[i, j]] += v;
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.values[k]))
        })
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &Array1<C64>) -> Array1<C64> {
        let mut y = Array1::zeros(self.n);
        self.matvec_into(
            x.as_slice().expect("contiguous vector"),
            y.as_slice_mut().expect("contiguous vector"),
        );
        y
    }

    /// `self · X` for a block of column vectors.
    pub fn matmat(&self, x: &ArrayView2<C64>) -> Array2<C64> {
        sparse_matmat(self.n, &self.indptr, &self.indices, &self.values, x)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_triplets(self.n, self.iter().chain(other.iter()))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let mut t = Vec::new();
        for (i, k, a) in self.iter() {
            for kk in other.indptr[k]..other.indptr[k + 1] {
                t.push((i, other.indices[kk], a * other.values[kk]));
            }
        }
        Self::from_triplets(self.n, t)
    }

    pub fn kron(&self, other: &CsrMatrix) -> Self {
        let m = other.n;
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                t.push((i * m + k, j * m + l, a * b));
            }
        }
        Self::from_triplets(self.n * m, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.add(&self.adjoint().scale(-ONE)).max_abs()
    }

    /// `max_i Σ_j |a_ij|`, an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (self.indptr[i]..self.indptr[i + 1])
                    .map(|k| self.values[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `⟨u| A |v⟩`.
    pub fn inner(&self, u: &[C64], v: &[C64]) -> C64 {
        let mut acc = ZERO;
        for i in 0..self.n {
            let mut row = ZERO;
            for k in self.indptr[i]..self.indptr[i + 1] {
                row += self.values[k] * v[self.indices[k]];
            }
            acc += u[i].conj() * row;
        }
        acc
    }
}

/// Kronecker product of a list of square matrices, left to right.
pub fn kron_all(ops: &[&CsrMatrix]) -> CsrMatrix {
    let mut out = CsrMatrix::identity(1);
    for op in ops {
        out = out.kron(op);
    }
    out
}

/// Ascending eigenvalues with eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

/// Full dense Hermitian eigendecomposition, ascending.
pub fn dense_eigh(a: Array2<C64>) -> Result<EigenPairs, LinalgError> {
    let (values, vectors) = dense_eigh_generic(a)?;
    Ok(EigenPairs { values, vectors })
}

fn dense_eigh_generic<A: Scalar<Real = f64> + Lapack>(a: Array2<A>) -> Result<(Vec<f64>, Array2<A>), LinalgError> {
    // LAPACK sees a row-major array as its transpose, which for a Hermitian
    // matrix conjugates the eigenvectors; hand it column-major storage.
    let mut f = Array2::zeros(a.raw_dim().f());
    f.assign(&a);
    let (w, v) = f
        .eigh_into(UPLO::Lower)
        .map_err(|e| LinalgError::Dense(e.to_string()))?;
    Ok((w.to_vec(), v))
}

/// Real symmetric dense eigendecomposition, ascending.
pub fn dense_eigh_real(a: Array2<f64>) -> Result<(Vec<f64>, Array2<f64>), LinalgError> {
    let (w, v) = a
        .eigh_into(UPLO::Lower)
        .map_err(|e| LinalgError::Dense(e.to_string()))?;
    Ok((w.to_vec(), v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Dimensions up to this size go straight to the dense solver.
    pub dense_threshold: usize,
    /// Largest dimension the dense fallback accepts.
    pub dense_limit: usize,
    /// Residual bound relative to the spectral norm estimate.
    pub tolerance: f64,
    /// Subspace size before a thick restart.
    pub max_basis: usize,
    pub max_restarts: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_threshold: 320,
            dense_limit: 3000,
            tolerance: 1e-9,
            max_basis: 64,
            max_restarts: 200,
        }
    }
}

/// Lowest `k` eigenpairs of a Hermitian matrix. Matrices with real entries
/// are solved in real arithmetic.
pub fn lowest_eigenpairs(h: &CsrMatrix, k: usize, opts: &EigenOptions) -> Result<EigenPairs, LinalgError> {
    let n = h.dim();
    if k > n {
        return Err(LinalgError::TooManyPairs { requested: k, dim: n });
    }
    if n <= opts.dense_threshold.max(k) {
        return dense_lowest(h, k);
    }
    let diag = h.diagonal_re();
    let result = if h.values.iter().all(|z| z.im == 0.0) {
        let real = RealCsr::from(h);
        block_davidson(n, &diag, |x| real.matmat(x), k, opts).map(|(values, v)| EigenPairs {
            values,
            vectors: v.mapv(|x| C64::new(x, 0.0)),
        })
    } else {
        block_davidson(n, &diag, |x| h.matmat(x), k, opts).map(|(values, vectors)| EigenPairs { values, vectors })
    };
    match result {
        Ok(p) => Ok(p),
        Err(LinalgError::NoConvergence { residual, .. }) if n > opts.dense_limit => {
            Err(LinalgError::NoConvergence { residual, dim: n })
        }
        Err(_) => dense_lowest(h, k),
    }
}

fn dense_lowest(h: &CsrMatrix, k: usize) -> Result<EigenPairs, LinalgError> {
    let all = dense_eigh(h.to_dense())?;
    Ok(EigenPairs {
        values: all.values[..k].to_vec(),
        vectors: all.vectors.slice(s![.., ..k]).to_owned(),
    })
}

/// Real part of a [`CsrMatrix`] with the same sparsity.
struct RealCsr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl From<&CsrMatrix> for RealCsr {
    fn from(h: &CsrMatrix) -> Self {
        RealCsr {
            n: h.n,
            indptr: h.indptr.clone(),
            indices: h.indices.clone(),
            values: h.values.iter().map(|z| z.re).collect(),
        }
    }
}

impl RealCsr {
    fn matmat(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        sparse_matmat(self.n, &self.indptr, &self.indices, &self.values, x)
    }
}

fn sparse_matmat<A: Scalar>(
    n: usize,
    indptr: &[usize],
    indices: &[usize],
    values: &[A],
    x: &ArrayView2<A>,
) -> Array2<A> {
    let m = x.ncols();
    let xs = x.as_standard_layout();
    let xs = xs.as_slice().expect("standard layout");
    let mut y = Array2::<A>::zeros((n, m));
    {
        let ys = y.as_slice_mut().expect("standard layout");
        for i in 0..n {
            let row = &mut ys[i * m..(i + 1) * m];
            for p in indptr[i]..indptr[i + 1] {
                let v = values[p];
                let xr = &xs[indices[p] * m..(indices[p] + 1) * m];
                for (yc, &xc) in row.iter_mut().zip(xr) {
                    *yc += v * xc;
                }
            }
        }
    }
    y
}

/// `A^H B` for two tall blocks with the same row count.
fn adjoint_dot<A: Scalar + Lapack>(a: &ArrayView2<A>, b: &ArrayView2<A>) -> Array2<A> {
    // conj(Aᵀ conj(B)) keeps the large operand as a strided view.
    let bc = b.mapv(|z| z.conj());
    a.t().dot(&bc).mapv(|z| z.conj())
}

fn col_norm<A: Scalar<Real = f64>>(a: &ndarray::ArrayView1<A>) -> f64 {
    a.iter().map(|z| z.square()).sum::<f64>().sqrt()
}

/// Orthonormalizes the columns of `w` against the orthonormal columns of
/// `basis` (two block Gram-Schmidt passes) and then among themselves.
/// Columns that become negligible are dropped.
fn orthonormal_extension<A: Scalar<Real = f64> + Lapack>(basis: &ArrayView2<A>, w: Array2<A>) -> Array2<A> {
    // Column-major storage keeps the per-column work contiguous.
    let mut w = {
        let mut f = Array2::zeros(w.raw_dim().f());
        f.assign(&w);
        f
    };
    let norms: Vec<f64> = w.columns().into_iter().map(|c| col_norm(&c)).collect();
    for _ in 0..2 {
        if basis.ncols() > 0 {
            let coeff = adjoint_dot(basis, &w.view());
            w = w - basis.dot(&coeff);
        }
    }
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..w.ncols() {
        for _ in 0..2 {
            for &q in &kept {
                let (qcol, mut col) = w.multi_slice_mut((s![.., q], s![.., j]));
                let c: A = qcol.iter().zip(col.iter()).map(|(x, y)| x.conj() * *y).sum();
                col.zip_mut_with(&qcol, |y, x| *y -= c * *x);
            }
        }
        let after = col_norm(&w.column(j));
        if after > 1e-10 * norms[j].max(1e-300) && after > 1e-280 {
            let inv = A::from_real(1.0 / after);
            w.column_mut(j).mapv_inplace(|z| z * inv);
            kept.push(j);
        }
    }
    w.select(Axis(1), &kept).as_standard_layout().into_owned()
}

/// Lower bound on `‖H‖₂` from a few power iterations.
fn spectral_norm_estimate<A: Scalar<Real = f64>>(n: usize, apply: &impl Fn(&ArrayView2<A>) -> Array2<A>) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f_726d);
    let mut x = Array2::from_shape_fn((n, 1), |_| A::from_real(rng.gen::<f64>() - 0.5));
    let mut est = 0.0;
    for _ in 0..30 {
        let nx = col_norm(&x.column(0));
        if nx == 0.0 {
            break;
        }
        let inv = A::from_real(1.0 / nx);
        x.mapv_inplace(|z| z * inv);
        x = apply(&x.view());
        est = col_norm(&x.column(0));
    }
    est
}

/// Thick-restart block Davidson with a diagonal preconditioner and
/// Rayleigh-Ritz extraction. The block covers degenerate multiplets up to
/// `k`; a pair is converged when its residual is below `tolerance` times the
/// estimated operator norm.
fn block_davidson<A, F>(
    n: usize,
    diag: &[f64],
    apply: F,
    k: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, Array2<A>), LinalgError>
where
    A: Scalar<Real = f64> + Lapack,
    F: Fn(&ArrayView2<A>) -> Array2<A>,
{
    let block = k.clamp(2, 12).min(n);
    let cap = opts.max_basis.max(2 * k + 4 * block).min(n);
    let keep = (k + block).min(cap - block).max(k);
    let diag_scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())).max(1e-300);
    let norm = spectral_norm_estimate(n, &apply);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_u64 ^ n as u64);
    // Start from the unit vectors of the smallest diagonal entries plus noise.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let mut start = Array2::from_shape_fn((n, block), |_| A::from_real((rng.gen::<f64>() - 0.5) * 1e-3));
    for j in 0..block {
        start[[order[j], j]] += A::one();
    }
    let mut v = orthonormal_extension(&Array2::<A>::zeros((n, 0)).view(), start);
    let mut hv = apply(&v.view());
    let mut t = adjoint_dot(&v.view(), &hv.view());
    let mut worst = f64::INFINITY;
    let max_iter = opts.max_restarts * cap / block;
    for _ in 0..max_iter {
        let tt = t.t().mapv(|z| z.conj());
        let herm = (&t + &tt).mapv(|z| z * A::from_real(0.5));
        let (values, vectors) = dense_eigh_generic(herm)?;
        let m = values.len();
        let kk = k.min(m);
        let scale = values.iter().fold(norm, |a, x| a.max(x.abs())).max(1e-300);
        let nk = keep.min(m);
        let s_keep = vectors.slice(s![.., ..nk]).to_owned();
        let y = v.dot(&s_keep);
        let hy = hv.dot(&s_keep);
        let mut residuals = Vec::new();
        worst = 0.0;
        for j in 0..nk {
            let theta = A::from_real(values[j]);
            let r = &hy.column(j) - &y.column(j).mapv(|z| z * theta);
            let rn = col_norm(&r.view());
            if j < kk {
                worst = worst.max(rn / scale);
            }
            residuals.push((j, rn, r));
        }
        if kk == k && worst <= opts.tolerance {
            return Ok((values[..k].to_vec(), y.slice(s![.., ..k]).to_owned()));
        }
        // Corrections for the lowest unconverged pairs first.
        let mut chosen: Vec<&(usize, f64, Array1<A>)> =
            residuals.iter().filter(|(_, rn, _)| *rn > opts.tolerance * scale).collect();
        chosen.truncate(block);
        let mut w = Array2::zeros((n, chosen.len()));
        let floor = 1e-4 * diag_scale;
        for (c, (j, _, r)) in chosen.iter().enumerate() {
            let theta = values[*j];
            for i in 0..n {
                let mut d = diag[i] - theta;
                if d.abs() < floor {
                    d = if d < 0.0 { -floor } else { floor };
                }
                w[[i, c]] = r[i] * A::from_real(1.0 / d);
            }
        }
        if v.ncols() + w.ncols() > cap {
            v = y;
            hv = hy;
            t = Array2::from_shape_fn((nk, nk), |(i, j)| if i == j { A::from_real(values[i]) } else { A::zero() });
        }
        let mut add = orthonormal_extension(&v.view(), w);
        if add.ncols() == 0 {
            // Preconditioned directions collapsed into the basis; fall back
            // to the raw residuals.
            let mut raw = Array2::zeros((n, chosen.len()));
            for (c, (_, _, r)) in chosen.iter().enumerate() {
                raw.column_mut(c).assign(r);
            }
            add = orthonormal_extension(&v.view(), raw);
            if add.ncols() == 0 {
                break;
            }
        }
        let h_add = apply(&add.view());
        let top_right = adjoint_dot(&v.view(), &h_add.view());
        let bottom = adjoint_dot(&add.view(), &h_add.view());
        let (m0, b) = (v.ncols(), add.ncols());
        let mut t_new = Array2::zeros((m0 + b, m0 + b));
        t_new.slice_mut(s![..m0, ..m0]).assign(&t);
        t_new.slice_mut(s![..m0, m0..]).assign(&top_right);
        t_new
            .slice_mut(s![m0.., ..m0])
            .assign(&top_right.t().mapv(|z| z.conj()));
        t_new.slice_mut(s![m0.., m0..]).assign(&bottom);
        t = t_new;
        v = ndarray::concatenate(Axis(1), &[v.view(), add.view()]).expect("same rows");
        hv = ndarray::concatenate(Axis(1), &[hv.view(), h_add.view()]).expect("same rows");
    }
    Err(LinalgError::NoConvergence {
        residual: worst,
        dim: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(2.0, 0.0)));
            if i + 1 < n {
                t.push((i, i + 1, C64::new(-1.0, 0.0)));
                t.push((i + 1, i, C64::new(-1.0, 0.0)));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 1, ONE), (0, 1, ONE), (1, 0, ONE)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.to_dense()[[0, 1]], C64::new(2.0, 0.0));
    }

    #[test]
    fn kron_dimensions_and_values() {
        let a = CsrMatrix::diagonal(&[ONE, C64::new(2.0, 0.0)]);
        let b = CsrMatrix::identity(3);
        let c = a.kron(&b);
        assert_eq!(c.dim(), 6);
        assert_eq!(c.to_dense()[[4, 4]], C64::new(2.0, 0.0));
    }

    #[test]
    fn identity_scaled_spectrum() {
        let h = CsrMatrix::identity(5).scale(C64::new(3.5, 0.0));
        let p = lowest_eigenpairs(&h, 5, &EigenOptions::default()).unwrap();
        assert!(p.values.iter().all(|v| (v - 3.5).abs() < 1e-14));
    }

    #[test]
    fn iterative_matches_analytic_laplacian() {
        let n = 400;
        let h = laplacian_1d(n);
        let opts = EigenOptions {
            dense_threshold: 0,
            dense_limit: 0,
            ..EigenOptions::default()
        };
        let p = lowest_eigenpairs(&h, 4, &opts).unwrap();
        for (j, v) in p.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-9 * 4.0, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn iterative_resolves_degenerate_pair() {
        // Two identical decoupled chains: every level is doubly degenerate.
        let a = laplacian_1d(120);
        let h = CsrMatrix::identity(2).kron(&a);
        let opts = EigenOptions {
            dense_threshold: 0,
            dense_limit: 0,
            ..EigenOptions::default()
        };
        let p = lowest_eigenpairs(&h, 4, &opts).unwrap();
        assert!((p.values[0] - p.values[1]).abs() < 1e-10);
        assert!((p.values[2] - p.values[3]).abs() < 1e-10);
        assert!(p.values[2] - p.values[1] > 1e-5);
    }

    #[test]
    fn dense_eigenvectors_satisfy_eigen_equation() {
        let i = C64::new(0.0, 1.0);
        let a = ndarray::arr2(&[
            [ONE, i, ZERO],
            [-i, C64::new(2.0, 0.0), C64::new(0.5, 0.25)],
            [ZERO, C64::new(0.5, -0.25), C64::new(-1.0, 0.0)],
        ]);
        let p = dense_eigh(a.clone()).unwrap();
        for (j, lam) in p.values.iter().enumerate() {
            let v = p.vectors.column(j);
            let r = a.dot(&v) - v.mapv(|z| z * *lam);
            assert!(r.iter().all(|z| z.norm() < 1e-12), "pair {j}");
        }
    }

    #[test]
    fn iterative_agrees_with_dense_on_banded_matrix() {
        let n = 600;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new((i as f64 * 0.37).sin() * 3.0 + i as f64 * 0.01, 0.0)));
            if i + 3 < n {
                t.push((i, i + 3, C64::new(0.4, 0.3)));
                t.push((i + 3, i, C64::new(0.4, -0.3)));
            }
        }
        let h = CsrMatrix::from_triplets(n, t);
        let opts = EigenOptions {
            dense_threshold: 0,
            dense_limit: 0,
            ..EigenOptions::default()
        };
        let it = lowest_eigenpairs(&h, 5, &opts).unwrap();
        let dense = dense_eigh(h.to_dense()).unwrap();
        for j in 0..5 {
            assert!((it.values[j] - dense.values[j]).abs() < 1e-8, "{j}");
            let hv = h.matvec(&it.vectors.column(j).to_owned());
            let r = &hv - &it.vectors.column(j).mapv(|z| z * it.values[j]);
            assert!(r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-7);
        }
    }
}

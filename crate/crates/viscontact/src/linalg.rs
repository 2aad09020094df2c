//! Small dense and sparse linear algebra: just enough for P1 assembly,
//! SPD solves, spectral bounds and the verification oracles.

use crate::scalar::{lit, Real};

// ---------------------------------------------------------------------------
// dense
// ---------------------------------------------------------------------------

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> DenseMat<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMat {
            n_rows,
            n_cols,
            data: vec![T::zero(); n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols);
            data.extend_from_slice(r);
        }
        DenseMat {
            n_rows,
            n_cols,
            data,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n_cols + j]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![T::zero(); self.n_rows];
        for i in 0..self.n_rows {
            let row = &self.data[i * self.n_cols..(i + 1) * self.n_cols];
            let mut acc = T::zero();
            for (a, b) in row.iter().zip(x.iter()) {
                acc += *a * *b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        for i in 0..self.n_rows {
            for j in (i + 1)..self.n_cols {
                if (self.at(i, j) - self.at(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Cholesky factorization of an SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: DenseMat<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotPositiveDefinite;

impl std::fmt::Display for NotPositiveDefinite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "matrix is not positive definite")
    }
}

impl std::error::Error for NotPositiveDefinite {}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &DenseMat<T>) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.n_rows, a.n_cols);
        let n = a.n_rows;
        let mut l = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.at(i, j);
                for k in 0..j {
                    sum -= l.at(i, k) * l.at(j, k);
                }
                if i == j {
                    if sum <= T::zero() {
                        return Err(NotPositiveDefinite);
                    }
                    *l.at_mut(i, j) = sum.sqrt();
                } else {
                    *l.at_mut(i, j) = sum / l.at(j, j);
                }
            }
        }
        Ok(Cholesky { l })
    }

    pub fn n(&self) -> usize {
        self.l.n_rows
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let v = self.l.at(i, k) * y[k];
                y[i] -= v;
            }
            y[i] /= self.l.at(i, i);
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let v = self.l.at(k, i) * y[k];
                y[i] -= v;
            }
            y[i] /= self.l.at(i, i);
        }
        y
    }
}

/// All eigenvalues of a symmetric matrix by the cyclic Jacobi method.
pub fn jacobi_eigenvalues<T: Real>(a: &DenseMat<T>) -> Vec<T> {
    assert_eq!(a.n_rows, a.n_cols);
    let n = a.n_rows;
    let mut m = a.clone();
    let tol = lit::<T>(1e-14);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.at(i, j) * m.at(i, j);
            }
        }
        let mut diag = T::zero();
        for i in 0..n {
            diag += m.at(i, i) * m.at(i, i);
        }
        if off.sqrt() <= tol * (diag.sqrt() + T::one()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let theta = (aqq - app) / (lit::<T>(2.0) * apq);
                let t = {
                    let s = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.at(k, p);
                    let akq = m.at(k, q);
                    *m.at_mut(k, p) = c * akp - s * akq;
                    *m.at_mut(k, q) = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m.at(p, k);
                    let aqk = m.at(q, k);
                    *m.at_mut(p, k) = c * apk - s * aqk;
                    *m.at_mut(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| m.at(i, i)).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

// ---------------------------------------------------------------------------
// sparse
// ---------------------------------------------------------------------------

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> Csr<T> {
    /// Build from triplets; duplicate entries are summed in triplet order,
    /// which keeps assembly bit-reproducible.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut vals: Vec<T> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = triplets[k];
            assert!(r < n && c < n, "triplet index out of range");
            if last == Some((r, c)) {
                let m = vals.len() - 1;
                vals[m] += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            if self.col_idx[k] == j {
                return self.vals[k];
            }
        }
        T::zero()
    }

    /// `self + s * other` on the union sparsity pattern.
    pub fn add_scaled(&self, other: &Csr<T>, s: T) -> Csr<T> {
        assert_eq!(self.n, other.n);
        let mut triplets = Vec::with_capacity(self.vals.len() + other.vals.len());
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                triplets.push((i, self.col_idx[k], self.vals[k]));
            }
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                triplets.push((i, other.col_idx[k], other.vals[k] * s));
            }
        }
        Csr::from_triplets(self.n, &triplets)
    }

    pub fn is_symmetric_bitexact(&self) -> bool {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                if self.get(j, i) != self.vals[k] {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_dense(&self) -> DenseMat<T> {
        let mut d = DenseMat::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                *d.at_mut(i, self.col_idx[k]) = self.vals[k];
            }
        }
        d
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite sparse matrix by
/// power iteration, to the given relative tolerance.
pub fn power_iteration<T: Real>(a: &Csr<T>, rel_tol: T, max_iters: usize) -> T {
    let n = a.n;
    if n == 0 {
        return T::zero();
    }
    let mut rng = Rng::seed(0x9e3779b97f4a7c15);
    let mut x: Vec<T> = (0..n).map(|_| rng.uniform::<T>() - lit(0.5)).collect();
    let nrm = norm2(&x);
    if nrm > T::zero() {
        scale_in_place(&mut x, T::one() / nrm);
    } else {
        x[0] = T::one();
    }
    let mut lambda = T::zero();
    for _ in 0..max_iters {
        let y = a.matvec(&x);
        let ny = norm2(&y);
        if ny == T::zero() {
            return T::zero();
        }
        let new_lambda = dot(&x, &y);
        let inv = T::one() / ny;
        for (xi, yi) in x.iter_mut().zip(y.iter()) {
            *xi = *yi * inv;
        }
        if (new_lambda - lambda).abs() <= rel_tol * new_lambda.abs() && new_lambda != T::zero() {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda
}

// ---------------------------------------------------------------------------
// vectors
// ---------------------------------------------------------------------------

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += *x * *y;
    }
    acc
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// y += s * x
pub fn axpy<T: Real>(y: &mut [T], s: T, x: &[T]) {
    assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += s * *xi;
    }
}

pub fn scale_in_place<T: Real>(a: &mut [T], s: T) {
    for x in a.iter_mut() {
        *x *= s;
    }
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| *x - *y).collect()
}

// ---------------------------------------------------------------------------
// deterministic rng for probes and tests
// ---------------------------------------------------------------------------

/// splitmix64; deterministic across platforms, good enough for probe vectors.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform<T: Real>(&mut self) -> T {
        let v = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lit(v)
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian<T: Real>(&mut self) -> T {
        let u1: f64 = ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        let u2: f64 = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lit((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
    }

    pub fn gaussian_vec<T: Real>(&mut self, n: usize) -> Vec<T> {
        (0..n).map(|_| self.gaussian()).collect()
    }
}

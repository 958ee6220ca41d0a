//! Dense complex matrices and the tensor-factor operations used throughout
//! the crate (Kronecker products, partial traces and transposes, Hermitian
//! eigendecomposition).
//!
//! Everything here works on small matrices (at most 16×16 in practice), so
//! the implementations favour clarity over blocking or SIMD.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Convergence threshold on the off-diagonal Frobenius norm in the Jacobi
/// sweeps, relative to `max(1, ‖M‖_F)`.
const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row slices. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    /// Column vector (n×1).
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self += s * other`, in place.
    pub fn add_scaled(&mut self, s: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max absolute entry of `M - M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    /// `Tr(A† B)`, the Hilbert–Schmidt inner product.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn column_vec(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Principal submatrix on the given index list.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |r, c| self[(idx[r], idx[c])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>8.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Local dimensions of an ordered tensor product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemDims(Vec<usize>);

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid subsystem dims {dims:?}")));
        }
        Ok(Self(dims))
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Self {
        Self(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Mixed-radix digits of `index`, most significant factor first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for (slot, &d) in out.iter_mut().zip(&self.0).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.0).fold(0, |acc, (&dig, &d)| acc * d + dig)
    }

    fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.total() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not match subsystem dims {:?}",
                m.rows(),
                m.cols(),
                self.0
            )));
        }
        Ok(())
    }

    fn check_subset(&self, set: &[usize]) -> Result<()> {
        if let Some(&bad) = set.iter().find(|&&s| s >= self.0.len()) {
            return Err(Error::Index(format!(
                "subsystem {bad} out of range for {} factors",
                self.0.len()
            )));
        }
        Ok(())
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

/// Left-to-right Kronecker product of several factors.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = match iter.next() {
        Some(m) => (*m).clone(),
        None => return ComplexMatrix::identity(1),
    };
    iter.fold(first, |acc, m| kron(&acc, m))
}

/// Kronecker product of state vectors.
pub fn kron_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
}

/// Traces out every subsystem not listed in `keep`. The kept factors stay in
/// their original order.
pub fn partial_trace(m: &ComplexMatrix, dims: &SubsystemDims, keep: &[usize]) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    dims.check_subset(keep)?;
    if keep.is_empty() {
        return Err(Error::Dimension(
            "partial trace must keep at least one subsystem".into(),
        ));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let kept_dims = SubsystemDims(kept.iter().map(|&i| dims.0[i]).collect());
    let n = dims.total();
    let mut out = ComplexMatrix::zeros(kept_dims.total(), kept_dims.total());
    let digits: Vec<Vec<usize>> = (0..n).map(|i| dims.digits(i)).collect();
    let kept_index: Vec<usize> = digits
        .iter()
        .map(|d| kept_dims.compose(&kept.iter().map(|&k| d[k]).collect::<Vec<_>>()))
        .collect();
    for r in 0..n {
        for c in 0..n {
            if traced.iter().all(|&t| digits[r][t] == digits[c][t]) {
                out[(kept_index[r], kept_index[c])] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Transposes the listed tensor factors and leaves the others alone.
pub fn partial_transpose(m: &ComplexMatrix, dims: &SubsystemDims, transposed: &[usize]) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    dims.check_subset(transposed)?;
    let n = dims.total();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let rd = dims.digits(r);
        for c in 0..n {
            let mut r2 = rd.clone();
            let mut c2 = dims.digits(c);
            for &t in transposed {
                std::mem::swap(&mut r2[t], &mut c2[t]);
            }
            out[(dims.compose(&r2), dims.compose(&c2))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column_vec(k)
    }
}

/// Cyclic complex Jacobi eigendecomposition of a Hermitian matrix.
///
/// Input must be Hermitian within `1e-10`; the Hermitian part is used.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", m.rows, m.cols)));
    }
    let deviation = m.hermitian_deviation();
    if deviation > 1e-10 {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Annihilates `a[p][q]` with the unitary `J = diag-phase · rotation`,
/// `A ← J† A J`, `V ← V J`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J = P·R with P = diag(1, conj(phase)) on (p, q) and R the real rotation.
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase.conj() * -s;
    let jqq = phase.conj() * c;
    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.min())
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix,
/// or `None` if a pivot is not strictly positive.
pub fn cholesky(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L X = B` for lower-triangular `L`, overwriting nothing.
pub fn forward_substitute(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = l.rows;
    let mut x = b.clone();
    for col in 0..b.cols {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

/// `σ_Y = [[0, -i], [i, 0]]`.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// Two-qubit SWAP.
pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

/// Computational basis vector `|index⟩` of dimension `dim`.
pub fn basis_vector(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

/// Computational basis ket from a bit string such as `"0110"`.
pub fn ket(bits: &str) -> Vec<C64> {
    let index = usize::from_str_radix(bits, 2).expect("bit string");
    basis_vector(1 << bits.len(), index)
}

/// Random SU(2) element from a seeded generator.
pub fn haar_su2(seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_su2_with(&mut rng)
}

/// Random SU(2) element: Gaussian columns, Gram–Schmidt, then the second
/// column's phase fixed so that `det U = 1`.
pub fn haar_su2_with<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let mut gauss = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let mut c0 = [gauss(), gauss()];
    let mut c1 = [gauss(), gauss()];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    c0.iter_mut().for_each(|z| *z /= n0);
    let proj = c0[0].conj() * c1[0] + c0[1].conj() * c1[1];
    c1[0] -= proj * c0[0];
    c1[1] -= proj * c0[1];
    let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
    c1.iter_mut().for_each(|z| *z /= n1);
    let det = c0[0] * c1[1] - c1[0] * c0[1];
    let fix = (det / det.norm()).conj();
    c1.iter_mut().for_each(|z| *z *= fix);
    ComplexMatrix::from_vec(2, 2, vec![c0[0], c1[0], c0[1], c1[1]]).expect("2x2")
}

/// Random pure state of dimension `dim`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Random density matrix of full rank (Ginibre `G G† / Tr`).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    random_matrix(rng, dim, dim).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn sigma_y_tensor_square_maps_00_to_minus_11() {
        let yy = kron(&pauli_y(), &pauli_y());
        let out = yy.matvec(&ket("00"));
        let expected: Vec<C64> = ket("11").iter().map(|z| -z).collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn kron_trace_factorizes() {
        let mut r = rng(1);
        let a = random_matrix(&mut r, 2, 2);
        let b = random_matrix(&mut r, 2, 2);
        let lhs = kron(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kron_is_associative_on_integer_entries() {
        let int = |seed: u64| {
            let mut r = rng(seed);
            ComplexMatrix::from_fn(2, 3, |_, _| {
                C64::new(r.random_range(-5..=5) as f64, r.random_range(-5..=5) as f64)
            })
        };
        let (a, b, c) = (int(1), int(2), int(3));
        assert_eq!(kron(&kron(&a, &b), &c), kron(&a, &kron(&b, &c)));
    }

    #[test]
    fn partial_trace_of_product_basis_state() {
        let m = ComplexMatrix::projector(&ket("00"));
        let out = partial_trace(&m, &SubsystemDims::qubits(2), &[0]).unwrap();
        assert_eq!(out, ComplexMatrix::projector(&ket("0")));
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell: Vec<C64> = ket("00").iter().zip(ket("11")).map(|(a, b)| (a + b) * s).collect();
        let out = partial_trace(&ComplexMatrix::projector(&bell), &SubsystemDims::qubits(2), &[0]).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_kron_keeps_first_factor() {
        let mut r = rng(5);
        let a = random_matrix(&mut r, 4, 4);
        let b = random_matrix(&mut r, 4, 4);
        let dims = SubsystemDims::qubits(4);
        let out = partial_trace(&kron(&a, &b), &dims, &[0, 1]).unwrap();
        assert!(out.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        let out = partial_trace(&kron(&a, &b), &dims, &[2, 3]).unwrap();
        assert!(out.max_abs_diff(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(8);
        assert!(matches!(
            partial_trace(&m, &SubsystemDims::qubits(2), &[0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            partial_trace(&m, &SubsystemDims::qubits(3), &[]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            partial_trace(&m, &SubsystemDims::qubits(3), &[3]),
            Err(Error::Index(_))
        ));
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let mut r = rng(7);
        let ra = random_density(&mut r, 2);
        let rb = random_density(&mut r, 2);
        let pt = partial_transpose(&kron(&ra, &rb), &SubsystemDims::qubits(2), &[1]).unwrap();
        assert!(pt.max_abs_diff(&kron(&ra, &rb.transpose())) < 1e-15);
        assert!(min_eigenvalue(&pt).unwrap() > 0.0);
    }

    #[test]
    fn bell_state_partial_transpose_has_negative_eigenvalue() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell: Vec<C64> = ket("00").iter().zip(ket("11")).map(|(a, b)| (a + b) * s).collect();
        let pt = partial_transpose(&ComplexMatrix::projector(&bell), &SubsystemDims::qubits(2), &[1]).unwrap();
        assert!((min_eigenvalue(&pt).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let mut r = rng(11);
        let m = random_matrix(&mut r, 16, 16);
        let dims = SubsystemDims::qubits(4);
        let twice = partial_transpose(&partial_transpose(&m, &dims, &[1, 3]).unwrap(), &dims, &[1, 3]).unwrap();
        assert!(twice.max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn eig_of_diagonal_sorts_ascending() {
        let e = eig_hermitian(&ComplexMatrix::real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eig_of_pauli_x() {
        let e = eig_hermitian(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut r = rng(13);
        for _ in 0..5 {
            let m = random_hermitian(&mut r, 16);
            let e = eig_hermitian(&m).unwrap();
            let lambda = ComplexMatrix::real_diagonal(&e.values);
            let rebuilt = &(&e.vectors * &lambda) * &e.vectors.adjoint();
            assert!((&rebuilt - &m).frobenius_norm() < 1e-10);
            let gram = &e.vectors.adjoint() * &e.vectors;
            assert!((&gram - &ComplexMatrix::identity(16)).frobenius_norm() < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn cholesky_factors_positive_definite() {
        let mut r = rng(17);
        let g = random_matrix(&mut r, 6, 6);
        let m = &(&g * &g.adjoint()) + &ComplexMatrix::identity(6);
        let l = cholesky(&m).unwrap();
        assert!((&(&l * &l.adjoint()) - &m).frobenius_norm() < 1e-12);
        let x = forward_substitute(&l, &ComplexMatrix::identity(6));
        assert!((&(&l * &x) - &ComplexMatrix::identity(6)).frobenius_norm() < 1e-12);
        assert!(cholesky(&ComplexMatrix::real_diagonal(&[1.0, 0.0])).is_none());
    }

    #[test]
    fn haar_su2_is_special_unitary_and_seeded() {
        for seed in 0..20 {
            let u = haar_su2(seed);
            assert!((&(&u.adjoint() * &u) - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
            let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
            assert!((det - ONE).norm() < 1e-12);
        }
        assert_eq!(haar_su2(42), haar_su2(42));
        assert_ne!(haar_su2(42), haar_su2(43));
    }

    #[test]
    fn sigma_y_turns_conjugate_into_unitary() {
        // σ_Y U* σ_Y = U on SU(2); the similarity transforms depend on it.
        let y = pauli_y();
        for seed in 0..10 {
            let u = haar_su2(seed);
            let back = &(&y * &u.conj()) * &y;
            assert!(back.max_abs_diff(&u) < 1e-14);
        }
    }

    #[test]
    fn subsystem_digits_round_trip() {
        let dims = SubsystemDims::new(vec![2, 3, 2]).unwrap();
        for i in 0..dims.total() {
            assert_eq!(dims.compose(&dims.digits(i)), i);
        }
        assert_eq!(dims.digits(5), vec![0, 2, 1]);
    }
}

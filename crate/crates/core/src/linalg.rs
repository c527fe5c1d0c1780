//! Dense complex matrices and the structural operations the rest of the crate
//! is built on: Kronecker products, partial traces over tensor factors, and
//! functions of Hermitian positive semi-definite matrices (square root and
//! support-restricted inverses).
//!
//! Tensor factors follow one global convention: factor 0 is the leftmost and
//! slowest-varying, so the composite basis index of digits `m_0 .. m_{k-1}` is
//! `sum_i m_i * prod_{j>i} d_j`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Default absolute tolerance for max-entry comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Eigenvalues down to `-TOL_PSD` are clipped to zero when taking square roots.
pub const TOL_PSD: f64 = 1e-10;
/// Eigenvalues at or below this fraction of the largest one are outside the support.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Serialized form of a complex number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRepr {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexRepr {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexRepr> for C64 {
    fn from(z: ComplexRepr) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Subsystem dimensions of a composite space, leftmost factor first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimSpec(Vec<usize>);

impl DimSpec {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "factor dimensions must be non-empty and positive, got {factor_dims:?}"
            )));
        }
        Ok(Self(factor_dims))
    }

    /// A single, unstructured factor of dimension `d`.
    pub fn single(d: usize) -> Self {
        Self(vec![d.max(1)])
    }

    /// `n` qubit factors.
    pub fn qubits(n: usize) -> Self {
        Self(vec![2; n.max(1)])
    }

    pub fn factors(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of all factor dimensions.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Dimensions of the selected factors, in the order given.
    pub fn select(&self, factors: &[usize]) -> Result<DimSpec> {
        let mut out = Vec::with_capacity(factors.len());
        for &f in factors {
            out.push(*self.0.get(f).ok_or_else(|| {
                Error::DimensionMismatch(format!("factor {f} out of range for {:?}", self.0))
            })?);
        }
        DimSpec::new(out)
    }

    /// Dimensions of `self ⊗ other`.
    pub fn concat(&self, other: &DimSpec) -> DimSpec {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        DimSpec(v)
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} (total {}) do not match dimension {dim}",
                self.0,
                self.total()
            )));
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for i in (0..self.0.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.0[i + 1];
        }
        strides
    }

    /// Decomposes a composite basis index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.0.len()];
        for i in (0..self.0.len()).rev() {
            digits[i] = index % self.0[i];
            index /= self.0[i];
        }
        digits
    }

    /// Inverse of [`DimSpec::digits`].
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&m, &d)| acc * d + m)
    }
}

impl fmt::Display for DimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join("x"))
    }
}

/// Dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    /// Builds a matrix from a list of rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(r, cols, rows.concat())
    }

    /// Convenience constructor for real-valued matrices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| re(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.inner[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| re(x)).collect();
        Self::from_diagonal(&diag)
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        let mut m = Self::zeros(ket.len(), bra.len());
        for (i, k) in ket.iter().enumerate() {
            for (j, b) in bra.iter().enumerate() {
                m.inner[(i, j)] = k * b.conj();
            }
        }
        m
    }

    /// Column matrix holding `v`.
    pub fn column(v: &[C64]) -> Self {
        Self {
            inner: DMatrix::from_column_slice(v.len(), 1, v),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.inner[(i, j)] = value;
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(re(s))
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols()))
            .map(|i| self.inner[(i, i)])
            .collect()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {}x{} matrix",
                v.len(),
                self.rows(),
                self.cols()
            )));
        }
        let col = DMatrix::from_column_slice(v.len(), 1, v);
        Ok((&self.inner * col).iter().copied().collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    /// Largest absolute entrywise difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M†|` entrywise.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Max deviation of `M†M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("square product");
        gram.max_abs_diff(&Self::identity(self.cols()))
    }

    /// Hilbert-Schmidt inner product `Tr[A† B]`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn hermitized(&self) -> DMatrix<C64> {
        (&self.inner + self.inner.adjoint()) * re(0.5)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            inner: -&self.inner,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

/// Kronecker product with `a` as the leftmost (slowest-varying) factor.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    }
}

/// Left fold of [`tensor`] over `factors`.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = match iter.next() {
        Some(m) => (*m).clone(),
        None => return ComplexMatrix::identity(1),
    };
    iter.fold(first, |acc, m| tensor(&acc, m))
}

/// Kronecker product of two vectors.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

fn check_square_dims(m: &ComplexMatrix, dims: &DimSpec) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    dims.check(m.rows())
}

fn normalize_factor_set(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&f| f >= n) {
        return Err(Error::DimensionMismatch(format!(
            "factor index {bad} out of range for {n} factors"
        )));
    }
    Ok(keep)
}

/// Offsets contributed by every multi-index over `factors`, in row-major order
/// of those factors.
fn factor_offsets(dims: &DimSpec, factors: &[usize]) -> Vec<usize> {
    let strides = dims.strides();
    let mut offsets = vec![0usize];
    for &f in factors {
        let d = dims.factors()[f];
        let mut next = Vec::with_capacity(offsets.len() * d);
        for &o in &offsets {
            for m in 0..d {
                next.push(o + m * strides[f]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Reduced matrix on the kept factors (in ascending factor order); all other
/// factors are traced out.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimSpec, keep: &[usize]) -> Result<ComplexMatrix> {
    check_square_dims(m, dims)?;
    let keep = normalize_factor_set(keep, dims.len())?;
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let kept_offsets = factor_offsets(dims, &keep);
    let traced_offsets = factor_offsets(dims, &traced);

    let n = kept_offsets.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (col, &co) in kept_offsets.iter().enumerate() {
            let sum: C64 = traced_offsets
                .iter()
                .map(|&t| m.inner[(ro + t, co + t)])
                .sum();
            out.inner[(r, col)] = sum;
        }
    }
    Ok(out)
}

/// Embeds `op`, acting on `targets` (its own factor order follows `targets`),
/// into the full composite space with the identity on every other factor.
pub fn embed(op: &ComplexMatrix, dims: &DimSpec, targets: &[usize]) -> Result<ComplexMatrix> {
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != targets.len() {
        return Err(Error::DimensionMismatch("repeated target factor".into()));
    }
    let sub = dims.select(targets)?;
    if !op.is_square() || op.rows() != sub.total() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} does not act on factors {targets:?} of {dims}",
            op.rows(),
            op.cols()
        )));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|f| !targets.contains(f)).collect();
    let target_offsets = factor_offsets(dims, targets);
    let rest_offsets = factor_offsets(dims, &rest);

    let n = dims.total();
    let mut out = ComplexMatrix::zeros(n, n);
    for &r in &rest_offsets {
        for (i, &ti) in target_offsets.iter().enumerate() {
            for (j, &tj) in target_offsets.iter().enumerate() {
                out.inner[(r + ti, r + tj)] = op.inner[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]` of
/// the input. Returns the permuted matrix and its dimensions.
pub fn permute_factors(
    m: &ComplexMatrix,
    dims: &DimSpec,
    order: &[usize],
) -> Result<(ComplexMatrix, DimSpec)> {
    check_square_dims(m, dims)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!(
            "{order:?} is not a permutation of {} factors",
            dims.len()
        )));
    }
    let new_dims = dims.select(order)?;
    let n = dims.total();
    let map: Vec<usize> = (0..n)
        .map(|new_index| {
            let new_digits = new_dims.digits(new_index);
            let mut old_digits = vec![0; dims.len()];
            for (k, &f) in order.iter().enumerate() {
                old_digits[f] = new_digits[k];
            }
            dims.index(&old_digits)
        })
        .collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.inner[(i, j)] = m.inner[(map[i], map[j])];
        }
    }
    Ok((out, new_dims))
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let tol = DEFAULT_TOL * m.max_abs().max(1.0);
    let dev = m.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let eig = m.hermitized().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.rows();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors.inner[(r, k)] = eig.eigenvectors[(r, i)];
        }
    }
    Ok((values, vectors))
}

/// `V diag(f(λ)) V†` for a Hermitian matrix.
fn spectral_map(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let diag: Vec<C64> = values.iter().map(|&l| re(f(l))).collect();
    let d = ComplexMatrix::from_diagonal(&diag);
    &(vectors * &d) * &vectors.adjoint()
}

fn psd_spectrum(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let (values, vectors) = eigh(m)?;
    if let Some(&min) = values.first() {
        if min < -TOL_PSD {
            return Err(Error::NotPsd(min));
        }
    }
    Ok((values, vectors))
}

fn support_cutoff(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    PINV_RELATIVE_CUTOFF * max
}

/// Hermitian positive semi-definite square root.
pub fn herm_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = psd_spectrum(m)?;
    Ok(spectral_map(&values, &vectors, |l| l.max(0.0).sqrt()))
}

/// Inverse of a PSD matrix restricted to its support.
pub fn pinv_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = psd_spectrum(m)?;
    let cutoff = support_cutoff(&values);
    Ok(spectral_map(&values, &vectors, |l| {
        if l > cutoff && l > 0.0 {
            1.0 / l
        } else {
            0.0
        }
    }))
}

/// `M^{-1/2}` restricted to the support of a PSD matrix.
pub fn pinv_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = psd_spectrum(m)?;
    let cutoff = support_cutoff(&values);
    Ok(spectral_map(&values, &vectors, |l| {
        if l > cutoff && l > 0.0 {
            1.0 / l.sqrt()
        } else {
            0.0
        }
    }))
}

/// Orthogonal projector onto the support of a PSD matrix.
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = psd_spectrum(m)?;
    let cutoff = support_cutoff(&values);
    Ok(spectral_map(&values, &vectors, |l| {
        if l > cutoff && l > 0.0 {
            1.0
        } else {
            0.0
        }
    }))
}

/// Trace norm `Σ|λ|` of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = eigh(m)?;
    Ok(values.iter().map(|l| l.abs()).sum())
}

/// Euclidean inner product `<a|b>`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn tensor_puts_left_factor_slowest() {
        let m = tensor(&x(), &ComplexMatrix::identity(2));
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let p0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        // basis index 0*2 + 1 = 1
        assert_eq!(
            tensor(&p0, &p1),
            ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn partial_trace_single_factor_is_noop() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 2.0)],
            vec![c(3.0, 0.0), c(4.0, -1.0)],
        ])
        .unwrap();
        let r = partial_trace(&m, &DimSpec::single(2), &[0]).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &DimSpec::new(vec![2, 3]).unwrap(), &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&m, &DimSpec::qubits(2), &[2]).is_err());
        assert!(matches!(
            partial_trace(&ComplexMatrix::zeros(2, 4), &DimSpec::single(2), &[0]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn partial_trace_keeping_everything_reorders_nothing() {
        let m = tensor(&x(), &ComplexMatrix::from_real_diagonal(&[0.25, 0.75]));
        let r = partial_trace(&m, &DimSpec::qubits(2), &[1, 0]).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn herm_sqrt_diagonal_and_identity() {
        let i3 = ComplexMatrix::identity(3);
        assert!(herm_sqrt(&i3).unwrap().approx_eq(&i3, 1e-12));
        let d = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]);
        let s = herm_sqrt(&d).unwrap();
        assert!(s.approx_eq(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0]), 1e-12));
    }

    #[test]
    fn herm_sqrt_rejects_negative_and_non_hermitian() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -1e-6]);
        assert!(matches!(herm_sqrt(&d), Err(Error::NotPsd(_))));
        // tiny negative eigenvalues are clipped
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -1e-12]);
        let s = herm_sqrt(&d).unwrap();
        assert!(s.approx_eq(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), 1e-12));
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(herm_sqrt(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn pinv_of_scaled_identity_and_rank_deficient_diagonal() {
        let m = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(pinv_psd(&m)
            .unwrap()
            .approx_eq(&ComplexMatrix::identity(3).scale_real(3.0), 1e-12));
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 0.0]);
        assert!(pinv_psd(&d)
            .unwrap()
            .approx_eq(&ComplexMatrix::from_real_diagonal(&[0.5, 0.0]), 1e-12));
        let z = ComplexMatrix::zeros(2, 2);
        assert!(pinv_psd(&z).unwrap().approx_eq(&z, 0.0));
    }

    #[test]
    fn embed_on_second_factor() {
        let m = embed(&x(), &DimSpec::qubits(2), &[1]).unwrap();
        assert_eq!(m, tensor(&ComplexMatrix::identity(2), &x()));
        let m = embed(&x(), &DimSpec::qubits(2), &[0]).unwrap();
        assert_eq!(m, tensor(&x(), &ComplexMatrix::identity(2)));
    }

    #[test]
    fn embed_respects_target_order() {
        // a two-factor operator applied to factors (1, 0) equals swap · op · swap
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diagonal(&[3.0, 5.0]);
        let op = tensor(&a, &b);
        let m = embed(&op, &DimSpec::qubits(2), &[1, 0]).unwrap();
        assert_eq!(m, tensor(&b, &a));
    }

    #[test]
    fn permute_factors_swaps_product() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b =
            ComplexMatrix::from_real_rows(&[&[5.0, 6.0, 7.0], &[8.0, 9.0, 1.0], &[2.0, 3.0, 4.0]])
                .unwrap();
        let dims = DimSpec::new(vec![2, 3]).unwrap();
        let (p, nd) = permute_factors(&tensor(&a, &b), &dims, &[1, 0]).unwrap();
        assert_eq!(nd.factors(), &[3, 2]);
        assert_eq!(p, tensor(&b, &a));
    }

    #[test]
    fn dimspec_digits_round_trip() {
        let d = DimSpec::new(vec![2, 3, 4]).unwrap();
        for i in 0..24 {
            assert_eq!(d.index(&d.digits(i)), i);
        }
        assert_eq!(d.digits(5), vec![0, 1, 1]);
        assert!(DimSpec::new(vec![]).is_err());
        assert!(DimSpec::new(vec![2, 0]).is_err());
    }
}

//! Dense complex linear algebra on small composite Hilbert spaces.
//!
//! Basis indices follow the big-endian mixed-radix convention: for
//! subsystem dimensions `[d1, d2, ..., dn]` the computational state
//! `|i1 i2 ... in>` has index `i1*d2*...*dn + ... + in`, so subsystem 1 is
//! the most significant digit.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical tolerances shared by every validity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues at or below this are treated as outside the support.
    pub clip: f64,
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            clip: 1e-12,
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            norm: 1e-9,
        }
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
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
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v><w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |r, c| v[r] * w[c].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M - M^dagger|`, or infinity for non-square input.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                err = err.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        err
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `<v| M |v>`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.matvec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product with `self`'s indices major.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = ComplexMatrix::zeros(rows, cols);
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self[(ar, ac)];
                if a == ZERO {
                    continue;
                }
                for br in 0..other.rows {
                    for bc in 0..other.cols {
                        out[(ar * other.rows + br, ac * other.cols + bc)] = a * other[(br, bc)];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
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

/// Kronecker product with `a`'s indices major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
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

/// Ordered subsystem dimensions of a composite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct CompositeDims(Vec<usize>);

impl TryFrom<Vec<usize>> for CompositeDims {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        CompositeDims::new(dims)
    }
}

impl From<CompositeDims> for Vec<usize> {
    fn from(d: CompositeDims) -> Vec<usize> {
        d.0
    }
}

impl CompositeDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("no subsystems".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDims(format!(
                "subsystem dimension {d} is below 2"
            )));
        }
        Ok(CompositeDims(dims))
    }

    pub fn qubits(n: usize) -> Self {
        CompositeDims(vec![2; n.max(1)])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total Hilbert-space dimension.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn select(&self, indices: &[usize]) -> CompositeDims {
        CompositeDims(indices.iter().map(|&i| self.0[i]).collect())
    }

    pub fn concat(&self, other: &CompositeDims) -> CompositeDims {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        CompositeDims(v)
    }

    /// Mixed-radix digits of a basis index, subsystem 1 first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for (slot, &d) in out.iter_mut().zip(&self.0).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&digit, &d)| acc * d + digit)
    }
}

/// Sorted, deduplicated, in-range subsystem list.
pub(crate) fn validated_subset(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubset("empty subset".into()));
    }
    let mut v = keep.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != keep.len() {
        return Err(Error::InvalidSubset(format!("repeated index in {keep:?}")));
    }
    if let Some(&bad) = v.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidSubset(format!(
            "index {bad} out of range for {n} subsystems"
        )));
    }
    Ok(v)
}

pub(crate) fn validated_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidSubset(format!(
            "permutation {order:?} has wrong length for {n} subsystems"
        )));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::InvalidSubset(format!("{order:?} is not a permutation")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Hermitian unit-trace positive semidefinite operator on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: CompositeDims,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(dims: CompositeDims, mat: ComplexMatrix) -> Result<Self> {
        Self::new_with(dims, mat, &Tolerances::default())
    }

    /// Validates Hermiticity, unit trace and positivity against `tol`.
    pub fn new_with(dims: CompositeDims, mat: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if mat.rows() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: mat.rows(),
            });
        }
        let herm = mat.hermiticity_error();
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::TraceNotOne(tr.re));
        }
        let eig = eig_hermitian(&mat)?;
        if let Some(&min) = eig.values.first() {
            if min < -tol.psd {
                return Err(Error::NotPositive(min));
            }
        }
        Ok(DensityMatrix { dims, mat })
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn from_parts(dims: CompositeDims, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(mat.rows(), dims.total());
        DensityMatrix { dims, mat }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            dims: psi.dims().clone(),
            mat: ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    pub fn maximally_mixed(dims: CompositeDims) -> Self {
        let d = dims.total();
        DensityMatrix {
            dims,
            mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    pub fn dims(&self) -> &CompositeDims {
        &self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Number of subsystems.
    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims.concat(&other.dims),
            mat: self.mat.kron(&other.mat),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.mat)
            .expect("density matrices are square")
            .values
    }

    /// `U rho U^dagger` for a unitary on the full space.
    pub fn conjugate(&self, u: &ComplexMatrix) -> DensityMatrix {
        let m = &(u * &self.mat) * &u.dagger();
        DensityMatrix::from_parts(self.dims.clone(), m.hermitian_part())
    }

    /// Reduced state on `keep`, kept subsystems in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// Reorders subsystems: new subsystem `j` is old subsystem `order[j]`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        validated_permutation(order, self.n_subsystems())?;
        let new_dims = self.dims.select(order);
        let map = permutation_index_map(&self.dims, order);
        let d = self.dim();
        let mat = ComplexMatrix::from_fn(d, d, |r, c| self.mat[(map[r], map[c])]);
        Ok(DensityMatrix::from_parts(new_dims, mat))
    }

    /// Transposes the listed subsystems' indices.
    pub fn partial_transpose(&self, subsystems: &[usize]) -> Result<ComplexMatrix> {
        let set = validated_subset(subsystems, self.n_subsystems())?;
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            let rd = self.dims.digits(r);
            for c in 0..d {
                let cd = self.dims.digits(c);
                let (mut nr, mut nc) = (rd.clone(), cd.clone());
                for &s in &set {
                    nr[s] = cd[s];
                    nc[s] = rd[s];
                }
                out[(self.dims.index_of(&nr), self.dims.index_of(&nc))] = self.mat[(r, c)];
            }
        }
        Ok(out)
    }
}

/// `map[new_index] = old_index` when new subsystem `j` is old `order[j]`.
pub(crate) fn permutation_index_map(dims: &CompositeDims, order: &[usize]) -> Vec<usize> {
    let new_dims = dims.select(order);
    (0..dims.total())
        .map(|new_idx| {
            let nd = new_dims.digits(new_idx);
            let mut od = vec![0; order.len()];
            for (j, &old) in order.iter().enumerate() {
                od[old] = nd[j];
            }
            dims.index_of(&od)
        })
        .collect()
}

/// Normalized state vector on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: CompositeDims,
    vec: Vec<C64>,
}

impl PureState {
    pub fn new(dims: CompositeDims, vec: Vec<C64>) -> Result<Self> {
        Self::new_with(dims, vec, &Tolerances::default())
    }

    pub fn new_with(dims: CompositeDims, vec: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if vec.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: vec.len(),
            });
        }
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { dims, vec })
    }

    /// Normalizes `vec` before wrapping it.
    pub fn normalized(dims: CompositeDims, vec: Vec<C64>) -> Result<Self> {
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Self::new(dims, vec.into_iter().map(|z| z / norm).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: CompositeDims, index: usize) -> Result<Self> {
        let mut v = vec![ZERO; dims.total()];
        if index >= v.len() {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range"
            )));
        }
        v[index] = ONE;
        Ok(PureState { dims, vec: v })
    }

    pub fn dims(&self) -> &CompositeDims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.vec.iter().zip(&other.vec).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            dims: self.dims.concat(&other.dims),
            vec: tensor_vec(&self.vec, &other.vec),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Reduced density matrix on the kept subsystems, in original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_subsystems();
    let keep = validated_subset(keep, n)?;
    if keep.len() == n {
        return Ok(rho.clone());
    }
    let dims = rho.dims();
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let kept_dims = dims.select(&keep);
    let traced_dims = dims.select(&traced);

    // groups[t] = (full index, kept index) for every basis state whose traced
    // digits encode t
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dims.total()];
    for full in 0..dims.total() {
        let digits = dims.digits(full);
        let k: Vec<usize> = keep.iter().map(|&i| digits[i]).collect();
        let t: Vec<usize> = traced.iter().map(|&i| digits[i]).collect();
        groups[traced_dims.index_of(&t)].push((full, kept_dims.index_of(&k)));
    }

    let dk = kept_dims.total();
    let mut out = ComplexMatrix::zeros(dk, dk);
    let m = rho.matrix();
    for group in &groups {
        for &(i, ki) in group {
            for &(j, kj) in group {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts(kept_dims, out))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// `V diag(f(lambda)) V^dagger`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(d, d, |r, c| {
            (0..d)
                .map(|k| v[(r, k)] * v[(c, k)].conj() * fv[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }
}

/// Eigen-decomposition of the Hermitian part `(M + M^dagger)/2` of `m`.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let d = m.rows();
    if d == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let vectors = ComplexMatrix::from_fn(d, d, |r, c| vecs[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// `V diag(log2 lambda) V^dagger` restricted to eigenvalues above `tol.clip`.
pub fn matrix_log2_on_support(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_log2_on_support_with(m, &Tolerances::default())
}

pub fn matrix_log2_on_support_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol.psd {
            return Err(Error::NotPositive(min));
        }
    }
    Ok(eig.map(|l| if l > tol.clip { l.log2() } else { 0.0 }))
}

/// `exp(i H)` for Hermitian `H`.
pub fn unitary_from_generator(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(h)?;
    let d = eig.values.len();
    let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, l)).collect();
    let v = &eig.vectors;
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        (0..d).map(|k| v[(r, k)] * v[(c, k)].conj() * phases[k]).sum()
    }))
}

/// `max |U^dagger U - I|`
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (&u.dagger() * u).max_abs_diff(&ComplexMatrix::identity(u.rows()))
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixRepr {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let re = (0..d)
            .map(|r| (0..d).map(|c| self.mat[(r, c)].re).collect())
            .collect();
        let im = (0..d)
            .map(|r| (0..d).map(|c| self.mat[(r, c)].im).collect())
            .collect();
        DensityMatrixRepr {
            dims: self.dims.as_slice().to_vec(),
            re,
            im,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DensityMatrixRepr::deserialize(d)?;
        let dims = CompositeDims::new(repr.dims).map_err(D::Error::custom)?;
        let n = repr.re.len();
        if repr.im.len() != n
            || repr.re.iter().chain(&repr.im).any(|row| row.len() != n)
        {
            return Err(D::Error::custom("re/im must be square arrays of equal shape"));
        }
        let mat = ComplexMatrix::from_fn(n, n, |r, c| C64::new(repr.re[r][c], repr.im[r][c]));
        DensityMatrix::new(dims, mat).map_err(D::Error::custom)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorComponents {
    Flat(Vec<f64>),
    Column(Vec<Vec<f64>>),
}

impl VectorComponents {
    fn into_flat(self) -> std::result::Result<Vec<f64>, String> {
        match self {
            VectorComponents::Flat(v) => Ok(v),
            VectorComponents::Column(rows) => rows
                .into_iter()
                .map(|r| match r.as_slice() {
                    [x] => Ok(*x),
                    _ => Err("nested state components must be single-element rows".to_string()),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct PureStateOut<'a> {
    dims: &'a [usize],
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Deserialize)]
struct PureStateIn {
    dims: Vec<usize>,
    re: VectorComponents,
    im: VectorComponents,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PureStateOut {
            dims: self.dims.as_slice(),
            re: self.vec.iter().map(|z| z.re).collect(),
            im: self.vec.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PureStateIn::deserialize(d)?;
        let dims = CompositeDims::new(repr.dims).map_err(D::Error::custom)?;
        let re = repr.re.into_flat().map_err(D::Error::custom)?;
        let im = repr.im.into_flat().map_err(D::Error::custom)?;
        if re.len() != im.len() {
            return Err(D::Error::custom("re and im have different lengths"));
        }
        let vec = re.into_iter().zip(im).map(|(r, i)| C64::new(r, i)).collect();
        PureState::new(dims, vec).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn singlet() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO];
        PureState::new(CompositeDims::qubits(2), v).unwrap().density()
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
        let p0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert_eq!(tensor(&p0, &p1), ComplexMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0]));
        let xx = tensor(&sigma_x(), &sigma_x());
        let ket00 = vec![ONE, ZERO, ZERO, ZERO];
        assert_eq!(xx.matvec(&ket00), vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn mixed_radix_digits() {
        let dims = CompositeDims::new(vec![2, 3, 2]).unwrap();
        assert_eq!(dims.digits(0), vec![0, 0, 0]);
        assert_eq!(dims.digits(11), vec![1, 2, 1]);
        assert_eq!(dims.digits(7), vec![1, 0, 1]);
        for i in 0..12 {
            assert_eq!(dims.index_of(&dims.digits(i)), i);
        }
        assert!(CompositeDims::new(vec![2, 1]).is_err());
        assert!(CompositeDims::new(vec![]).is_err());
    }

    #[test]
    fn singlet_marginals_are_maximally_mixed() {
        let rho = singlet();
        for keep in [[0], [1]] {
            let r = partial_trace(&rho, &keep).unwrap();
            assert!(r.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product_returns_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::density_matrix(&mut rng, CompositeDims::new(vec![3]).unwrap());
        let b = random::density_matrix(&mut rng, CompositeDims::new(vec![2]).unwrap());
        let ab = a.tensor(&b);
        assert!(partial_trace(&ab, &[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-14);
        assert!(partial_trace(&ab, &[1]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_subsets() {
        let rho = singlet();
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::InvalidSubset(_))));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidSubset(_))));
        assert!(matches!(partial_trace(&rho, &[0, 0]), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::density_matrix(&mut rng, CompositeDims::qubits(1));
        let b = random::density_matrix(&mut rng, CompositeDims::new(vec![3]).unwrap());
        let c = random::density_matrix(&mut rng, CompositeDims::qubits(1));
        let abc = a.tensor(&b).tensor(&c);
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert!(ac.matrix().max_abs_diff(a.tensor(&c).matrix()) < 1e-14);
    }

    #[test]
    fn eig_examples() {
        let e = eig_hermitian(&ComplexMatrix::diagonal(&[0.75, 0.25])).unwrap();
        assert!((e.values[0] - 0.25).abs() < 1e-15 && (e.values[1] - 0.75).abs() < 1e-15);
        let e = eig_hermitian(&sigma_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);

        // Werner c = 0.6: (1-c)/4 three times and (1+3c)/4
        let c = 0.6;
        let w = &ComplexMatrix::identity(4).scale_real((1.0 - c) / 4.0)
            + &singlet().matrix().scale_real(c);
        let e = eig_hermitian(&w).unwrap();
        for (got, want) in e.values.iter().zip([0.1, 0.1, 0.1, 0.7]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(matches!(
            eig_hermitian(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn log2_examples() {
        let l = matrix_log2_on_support(&ComplexMatrix::identity(4).scale_real(0.25)).unwrap();
        assert!(l.max_abs_diff(&ComplexMatrix::identity(4).scale_real(-2.0)) < 1e-13);
        let l = matrix_log2_on_support(&ComplexMatrix::diagonal(&[1.0, 0.0])).unwrap();
        assert!(l.max_abs_diff(&ComplexMatrix::zeros(2, 2)) < 1e-13);
        let l = matrix_log2_on_support(&ComplexMatrix::diagonal(&[0.5, 0.25, 0.25])).unwrap();
        assert!(l.max_abs_diff(&ComplexMatrix::diagonal(&[-1.0, -2.0, -2.0])) < 1e-13);
        assert!(matches!(
            matrix_log2_on_support(&ComplexMatrix::diagonal(&[1.1, -0.1])),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let dims = CompositeDims::qubits(1);
        assert!(matches!(
            DensityMatrix::new(dims.clone(), ComplexMatrix::diagonal(&[0.5, 0.4])),
            Err(Error::TraceNotOne(_))
        ));
        assert!(matches!(
            DensityMatrix::new(dims.clone(), ComplexMatrix::diagonal(&[1.5, -0.5])),
            Err(Error::NotPositive(_))
        ));
        let mut m = ComplexMatrix::diagonal(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(dims.clone(), m),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(
            DensityMatrix::new(CompositeDims::qubits(2), ComplexMatrix::diagonal(&[0.5, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn permute_reorders_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random::density_matrix(&mut rng, CompositeDims::qubits(1));
        let b = random::density_matrix(&mut rng, CompositeDims::new(vec![3]).unwrap());
        let ba = a.tensor(&b).permute(&[1, 0]).unwrap();
        assert_eq!(ba.dims().as_slice(), &[3, 2]);
        assert!(ba.matrix().max_abs_diff(b.tensor(&a).matrix()) < 1e-15);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random::density_matrix(&mut rng, CompositeDims::new(vec![2, 3]).unwrap());
        let s = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rho);

        let psi = random::pure_state(&mut rng, CompositeDims::qubits(3));
        let s = serde_json::to_string(&psi).unwrap();
        let back: PureState = serde_json::from_str(&s).unwrap();
        assert_eq!(back, psi);

        let nested = r#"{"dims":[2],"re":[[1.0],[0.0]],"im":[[0.0],[0.0]]}"#;
        let psi: PureState = serde_json::from_str(nested).unwrap();
        assert_eq!(psi.amplitudes(), &[ONE, ZERO]);

        let bad = r#"{"dims":[2],"re":[[0.6,0],[0,0.6]],"im":[[0,0],[0,0]]}"#;
        assert!(serde_json::from_str::<DensityMatrix>(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn trace_out_complement_of_product(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::density_matrix(&mut rng, CompositeDims::new(vec![da]).unwrap());
            let b = random::density_matrix(&mut rng, CompositeDims::new(vec![db]).unwrap());
            let r = partial_trace(&a.tensor(&b), &[0]).unwrap();
            prop_assert!(r.matrix().max_abs_diff(a.matrix()) < 1e-13);
        }

        #[test]
        fn partial_trace_preserves_trace(seed in any::<u64>(), mask in 1u32..15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random::density_matrix(&mut rng, CompositeDims::new(vec![2, 3, 2, 2]).unwrap());
            let keep: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            let r = partial_trace(&rho, &keep).unwrap();
            prop_assert!((r.matrix().trace() - ONE).norm() < 1e-12);
        }

        #[test]
        fn eig_reconstructs_random_hermitian(seed in any::<u64>(), d in 1usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random::hermitian(&mut rng, d);
            let e = eig_hermitian(&h).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&h) <= 1e-10);
            prop_assert!(unitarity_error(&e.vectors) <= 1e-10);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn tensor_is_associative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // small-integer entries keep every product exact
            let a = random::integer_matrix(&mut rng, 2, 3);
            let b = random::integer_matrix(&mut rng, 3, 2);
            let c = random::integer_matrix(&mut rng, 2, 2);
            prop_assert_eq!(tensor(&tensor(&a, &b), &c), tensor(&a, &tensor(&b, &c)));
        }
    }
}

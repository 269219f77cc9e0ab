//! Small dense Hermitian linear algebra.
//!
//! Everything here is deterministic: the eigensolver is a cyclic complex
//! Jacobi iteration with a fixed sweep order, so identical inputs give
//! bit-identical eigenvectors across runs and platforms with IEEE doubles.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::RationalInterval;

/// Hermiticity / idempotence tolerance, relative to the matrix norm.
pub const EPS_HERM: f64 = 1e-9;
/// Eigendecomposition accuracy, relative to the matrix norm.
pub const EPS_EIG: f64 = 1e-9;
/// Absolute slack for the positivity order.
pub const EPS_ORDER: f64 = 1e-9;
/// Eigenvalues closer than this (relative) are treated as one.
pub const CLUSTER_REL: f64 = 1e-7;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Input("matrix must have positive dimension".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `v v*`
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut t = ZERO;
        for i in 0..n {
            for k in 0..n {
                t += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        t
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> =
                row.iter().map(|c| format!("{:+.6}{:+.6}i", c.re, c.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Wire form: `{"dim": n, "entries": [[[re, im], ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            dim: self.dim,
            entries: self
                .data
                .chunks(self.dim)
                .map(|r| r.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        if raw.entries.len() != raw.dim || raw.dim == 0 {
            return Err(D::Error::custom(format!(
                "matrix declares dim {} but has {} rows",
                raw.dim,
                raw.entries.len()
            )));
        }
        let rows = raw
            .entries
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// A matrix equal to its conjugate transpose (within [`EPS_HERM`]).
///
/// The stored entries are exactly Hermitian: construction symmetrises.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let deviation = m.hermiticity_defect();
        if deviation > EPS_HERM * m.frobenius_norm().max(1.0) {
            return Err(Error::NonHermitianInput { deviation });
        }
        let sym = m.add(&m.adjoint()).scale(0.5);
        Ok(Self(sym))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(ComplexMatrix::diag(values))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    /// `Σ cᵢ Pᵢ` for Hermitian summands.
    pub fn linear_combination(terms: &[(f64, &HermitianMatrix)]) -> Self {
        let dim = terms.first().map(|(_, m)| m.dim()).unwrap_or(0);
        let mut acc = ComplexMatrix::zeros(dim);
        for (c, m) in terms {
            acc = acc.add(&m.0.scale(*c));
        }
        Self(acc)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `self - c·1`
    pub fn shift(&self, c: f64) -> Self {
        Self(self.0.sub(&ComplexMatrix::identity(self.dim()).scale(c)))
    }

    /// Real part of `tr(self · other)`; exact trace is real for Hermitian pairs.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        self.0.trace_product(&other.0).re
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let e = eigen(self);
        e.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Conjugation `u* self u` by an isometry given as columns.
    pub fn conjugate_by_columns(&self, columns: &[Vec<Complex64>]) -> HermitianMatrix {
        let k = columns.len();
        let images: Vec<Vec<Complex64>> = columns.iter().map(|c| self.0.apply(c)).collect();
        let mut m = ComplexMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = inner(&columns[i], &images[j]);
            }
        }
        HermitianMatrix(m.add(&m.adjoint()).scale(0.5))
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        HermitianMatrix::new(ComplexMatrix::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// `⟨u, v⟩ = Σ conj(uᵢ) vᵢ`
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// An orthogonal projection together with its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMatrix {
    matrix: HermitianMatrix,
    rank: usize,
}

impl Serialize for ProjectionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectionMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        ProjectionMatrix::new(HermitianMatrix::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl ProjectionMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let m = matrix.matrix();
        let scale = m.frobenius_norm().max(1.0);
        let defect = m.mul(m).sub(m).frobenius_norm();
        if defect > EPS_HERM * scale {
            return Err(Error::NotAProjection(format!("P² ≠ P (defect {defect:e})")));
        }
        let e = eigen(&matrix);
        let mut rank = 0;
        for &v in &e.values {
            if (v - 1.0).abs() <= 1e-6 {
                rank += 1;
            } else if v.abs() > 1e-6 {
                return Err(Error::NotAProjection(format!("eigenvalue {v} ∉ {{0, 1}}")));
            }
        }
        Ok(Self { matrix, rank })
    }

    /// Projection onto the span of orthonormal vectors.
    pub fn from_orthonormal(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let dim = vectors.first().map(Vec::len).ok_or(Error::ZeroRankProjection)?;
        let mut m = ComplexMatrix::zeros(dim);
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            m = m.add(&ComplexMatrix::outer(v));
        }
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: HermitianMatrix::zeros(dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: HermitianMatrix::identity(dim), rank: dim }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    /// Sum of mutually orthogonal projections.
    pub fn orthogonal_sum<'a>(dim: usize, parts: impl IntoIterator<Item = &'a ProjectionMatrix>) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        let mut rank = 0;
        for p in parts {
            m = m.add(p.matrix());
            rank += p.rank;
        }
        Self { matrix: HermitianMatrix(m), rank }
    }

    /// Orthonormal basis of the range, from the eigenvectors with eigenvalue 1.
    pub fn range_basis(&self) -> Vec<Vec<Complex64>> {
        let e = eigen(&self.matrix);
        e.values
            .iter()
            .zip(e.vectors)
            .filter(|(v, _)| **v > 0.5)
            .map(|(_, vec)| vec)
            .collect()
    }

    /// `self ≤ other` in the projection order, i.e. `tr(PQ) = tr(P)`.
    pub fn is_below(&self, other: &ProjectionMatrix) -> bool {
        (self.matrix.trace_product(&other.matrix) - self.rank as f64).abs() <= 1e-7
    }

    pub fn distance(&self, other: &ProjectionMatrix) -> f64 {
        self.matrix().sub(other.matrix()).frobenius_norm()
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.vectors.first().map(Vec::len).unwrap_or(0);
        let mut m = ComplexMatrix::zeros(dim);
        for (v, vec) in self.values.iter().zip(&self.vectors) {
            m = m.add(&ComplexMatrix::outer(vec).scale(*v));
        }
        m
    }

    /// Groups of eigenvalue indices that are equal up to [`CLUSTER_REL`].
    pub fn clusters(&self) -> Vec<EigenCluster> {
        let scale = self.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut out: Vec<EigenCluster> = Vec::new();
        for (i, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(c) if (v - self.values[*c.indices.last().unwrap()]).abs() <= CLUSTER_REL * scale => {
                    c.indices.push(i);
                }
                _ => out.push(EigenCluster { value: v, indices: vec![i] }),
            }
        }
        for c in &mut out {
            c.value = c.indices.iter().map(|&i| self.values[i]).sum::<f64>() / c.indices.len() as f64;
        }
        out
    }

    pub fn projection(&self, indices: &[usize]) -> ProjectionMatrix {
        let dim = self.vectors.first().map(Vec::len).unwrap_or(0);
        let mut m = ComplexMatrix::zeros(dim);
        for &i in indices {
            m = m.add(&ComplexMatrix::outer(&self.vectors[i]));
        }
        ProjectionMatrix { matrix: HermitianMatrix(m.add(&m.adjoint()).scale(0.5)), rank: indices.len() }
    }
}

#[derive(Clone, Debug)]
pub struct EigenCluster {
    pub value: f64,
    pub indices: Vec<usize>,
}

/// Cyclic Jacobi diagonalisation of a Hermitian matrix.
pub fn eigen(a: &HermitianMatrix) -> EigenDecomposition {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    if scale > 0.0 && n > 1 {
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|i| (m[(i, i)].re, (0..n).map(|r| v[(r, i)]).collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (values, vectors) = pairs.into_iter().map(|(val, vec)| (val, normalize_phase(vec))).unzip();
    EigenDecomposition { values, vectors }
}

/// Zero the `(p, q)` entry with a unitary plane rotation.
fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = 0.5 * (2.0 * b).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let j00 = Complex64::new(c, 0.0);
    let j01 = Complex64::new(s, 0.0);
    let j10 = -phase.conj() * s;
    let j11 = phase.conj() * c;
    let n = m.dim();
    for r in 0..n {
        let mp = m[(r, p)];
        let mq = m[(r, q)];
        m[(r, p)] = mp * j00 + mq * j10;
        m[(r, q)] = mp * j01 + mq * j11;
        let vp = v[(r, p)];
        let vq = v[(r, q)];
        v[(r, p)] = vp * j00 + vq * j10;
        v[(r, q)] = vp * j01 + vq * j11;
    }
    for col in 0..n {
        let mp = m[(p, col)];
        let mq = m[(q, col)];
        m[(p, col)] = j00.conj() * mp + j10.conj() * mq;
        m[(q, col)] = j01.conj() * mp + j11.conj() * mq;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
}

/// Fix the phase so the largest-magnitude entry is real positive.
fn normalize_phase(mut vec: Vec<Complex64>) -> Vec<Complex64> {
    let mut best = 0;
    for (i, c) in vec.iter().enumerate() {
        if c.norm() > vec[best].norm() + 1e-12 {
            best = i;
        }
    }
    let pivot = vec[best];
    let norm = vector_norm(&vec);
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm() / norm;
        for c in &mut vec {
            *c *= rot;
        }
    }
    vec
}

/// `Σ { vᵢvᵢ* : λᵢ ∈ iv }` over the eigenpairs of `a`.
pub fn spectral_projection(a: &HermitianMatrix, iv: &RationalInterval) -> ProjectionMatrix {
    let e = eigen(a);
    let picked: Vec<usize> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| iv.contains(**v))
        .map(|(i, _)| i)
        .collect();
    if picked.is_empty() {
        return ProjectionMatrix::zero(a.dim());
    }
    e.projection(&picked)
}

pub fn min_eigenvalue(a: &HermitianMatrix) -> f64 {
    eigen(a).values[0]
}

pub fn max_eigenvalue(a: &HermitianMatrix) -> f64 {
    *eigen(a).values.last().expect("positive dimension")
}

/// `a ≤ b` in the positivity order: `b − a` has no eigenvalue below `−EPS_ORDER`.
pub fn is_positive_leq(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(min_eigenvalue(&b.sub(a)) >= -EPS_ORDER)
}

/// `p a p` restricted to `range(p)`, written in an orthonormal basis of the range.
pub fn compress(a: &HermitianMatrix, p: &ProjectionMatrix) -> Result<HermitianMatrix> {
    if a.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: p.dim() });
    }
    if p.rank() == 0 {
        return Err(Error::ZeroRankProjection);
    }
    Ok(a.conjugate_by_columns(&p.range_basis()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigma_x() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.sub(b).frobenius_norm() <= tol
    }

    #[test]
    fn eigen_of_diagonal() {
        let e = eigen(&HermitianMatrix::diag(&[0.0, 1.0]));
        assert_eq!(e.values, vec![0.0, 1.0]);
        assert!((e.vectors[0][0].re - 1.0).abs() < 1e-15);
        assert!((e.vectors[1][1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_of_sigma_x() {
        // characteristic polynomial λ² − 1
        let e = eigen(&sigma_x());
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_of_identity() {
        let e = eigen(&HermitianMatrix::identity(3));
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.clusters().len(), 1);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn spectral_projection_examples() {
        let d = HermitianMatrix::diag(&[0.0, 1.0]);
        let p = spectral_projection(&d, &RationalInterval::new(0.5, f64::INFINITY).unwrap());
        assert!(close(p.matrix(), &ComplexMatrix::diag(&[0.0, 1.0]), 1e-12));
        let p = spectral_projection(&d, &RationalInterval::new(-1.0, 2.0).unwrap());
        assert!(close(p.matrix(), &ComplexMatrix::identity(2), 1e-12));
        assert_eq!(p.rank(), 2);
        let p = spectral_projection(&sigma_x(), &RationalInterval::new(0.0, f64::INFINITY).unwrap());
        let half = ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(close(p.matrix(), &half, 1e-12));
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn positivity_examples() {
        let zero = HermitianMatrix::zeros(2);
        let one = HermitianMatrix::identity(2);
        assert!(is_positive_leq(&zero, &one).unwrap());
        let a = HermitianMatrix::diag(&[0.0, 1.0]);
        let b = HermitianMatrix::diag(&[1.0, 0.0]);
        assert!(!is_positive_leq(&a, &b).unwrap());
        assert!(!is_positive_leq(&b, &a).unwrap());
        // spec(1 − σx) = {0, 2}
        assert!(is_positive_leq(&sigma_x(), &one).unwrap());
        assert!(matches!(
            is_positive_leq(&zero, &HermitianMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn compress_examples() {
        let p1 = ProjectionMatrix::new(HermitianMatrix::diag(&[1.0, 0.0])).unwrap();
        let c = compress(&sigma_x(), &p1).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.matrix()[(0, 0)].norm() < 1e-15);
        let p2 = ProjectionMatrix::new(HermitianMatrix::diag(&[0.0, 1.0])).unwrap();
        let c = compress(&HermitianMatrix::diag(&[2.0, 3.0]), &p2).unwrap();
        assert!((c.matrix()[(0, 0)].re - 3.0).abs() < 1e-14);
        let full = compress(&sigma_x(), &ProjectionMatrix::identity(2)).unwrap();
        let e = eigen(&full);
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!(matches!(compress(&sigma_x(), &ProjectionMatrix::zero(2)), Err(Error::ZeroRankProjection)));
    }

    #[test]
    fn clusters_merge_near_degenerate_values() {
        let e = eigen(&HermitianMatrix::diag(&[1.0, 1.0 + 1e-10, 2.0]));
        let c = e.clusters();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].indices, vec![0, 1]);
    }

    #[test]
    fn matrix_json_round_trip_is_bit_exact() {
        let m = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(0.1, 0.0), Complex64::new(1.0 / 3.0, -2.0f64.sqrt())],
            vec![Complex64::new(1.0 / 3.0, 2.0f64.sqrt()), Complex64::new(-7e-300, 0.0)],
        ])
        .unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        assert_eq!(text, serde_json::to_string(&back).unwrap());
        assert!(text.starts_with(r#"{"dim":2,"entries":[[[0.1,0.0],"#));
    }

    pub(crate) fn hermitian_of_dim(n: usize) -> impl Strategy<Value = HermitianMatrix> {
        proptest::collection::vec(-2.0f64..2.0, 2 * n * n).prop_map(move |xs| {
            let mut m = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = Complex64::new(xs[2 * (i * n + j)], xs[2 * (i * n + j) + 1]);
                }
            }
            HermitianMatrix::new(m.add(&m.adjoint()).scale(0.5)).unwrap()
        })
    }

    pub(crate) fn hermitian_strategy(max_dim: usize) -> impl Strategy<Value = HermitianMatrix> {
        (1..=max_dim).prop_flat_map(hermitian_of_dim)
    }

    proptest! {
        #[test]
        fn eigen_reconstructs_and_is_orthonormal(a in hermitian_strategy(6)) {
            let e = eigen(&a);
            let norm = a.frobenius_norm().max(1.0);
            prop_assert!(e.reconstruct().sub(a.matrix()).frobenius_norm() <= EPS_EIG * norm);
            for i in 0..e.vectors.len() {
                for j in 0..e.vectors.len() {
                    let ip = inner(&e.vectors[i], &e.vectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((ip - Complex64::new(want, 0.0)).norm() <= EPS_EIG);
                }
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn spectral_projections_partition_identity(a in hermitian_strategy(6), cut in -3.0f64..3.0) {
            let n = a.dim();
            let e = eigen(&a);
            prop_assume!(e.values.iter().all(|v| (v - cut).abs() > 1e-6));
            let all = spectral_projection(&a, &RationalInterval::whole_line());
            prop_assert!(all.matrix().sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-9);
            let lo = spectral_projection(&a, &RationalInterval::new(f64::NEG_INFINITY, cut).unwrap());
            let hi = spectral_projection(&a, &RationalInterval::new(cut, f64::INFINITY).unwrap());
            prop_assert!(lo.matrix().mul(hi.matrix()).frobenius_norm() < 1e-9);
            prop_assert!(lo.matrix().add(hi.matrix()).sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-9);
            // commutes with a
            let comm = a.matrix().mul(hi.matrix()).sub(&hi.matrix().mul(a.matrix()));
            prop_assert!(comm.frobenius_norm() <= 1e-9 * a.frobenius_norm().max(1.0));
        }

        #[test]
        fn positivity_order_is_a_preorder(
            (a, b, c) in (1usize..=4).prop_flat_map(|n| (hermitian_of_dim(n), hermitian_of_dim(n), hermitian_of_dim(n)))
        ) {
            prop_assert!(is_positive_leq(&a, &a).unwrap());
            if is_positive_leq(&a, &b).unwrap() && is_positive_leq(&b, &c).unwrap() {
                prop_assert!(is_positive_leq(&a, &c).unwrap());
            }
            // shifted copies are comparable
            prop_assert!(is_positive_leq(&a, &a.shift(-0.5)).unwrap());
        }

        #[test]
        fn compression_spectrum_lies_in_spectrum(
            (a, b) in (1usize..=5).prop_flat_map(|n| (hermitian_of_dim(n), hermitian_of_dim(n))),
            k in 0usize..5,
        ) {
            let n = a.dim();
            let e = eigen(&b);
            let take = (k % n) + 1;
            let p = ProjectionMatrix::from_orthonormal(&e.vectors[..take]).unwrap();
            let c = compress(&a, &p).unwrap();
            let (lo, hi) = (min_eigenvalue(&a), max_eigenvalue(&a));
            for v in eigen(&c).values {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }
}

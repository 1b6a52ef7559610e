//! Dense complex linear algebra helpers shared by every other module.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>`. Eigen and
//! singular value routines are wrapped so that their output ordering is a
//! deterministic function of the input bits.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Tolerance used when checking that user input is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance used when checking unitarity of local factors.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance used when checking that an operator is an orthogonal projector.
pub const PROJECTOR_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Matrix unit `E_ij = |e_i><e_j|`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = c64(1.0, 0.0);
    m
}

pub fn basis_vector(dim: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(dim);
    v[k] = c64(1.0, 0.0);
    v
}

/// `|x><y|`
pub fn outer(x: &ComplexVector, y: &ComplexVector) -> ComplexMatrix {
    x * y.adjoint()
}

pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    outer(v, v)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for k in 0..b.len() {
            out[i * b.len() + k] = a[i] * b[k];
        }
    }
    out
}

pub fn transpose(m: &ComplexMatrix) -> ComplexMatrix {
    m.transpose()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = c64(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_norm(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &ComplexVector) -> ComplexVector {
    let nrm = vector_norm(v);
    if nrm == 0.0 {
        v.clone()
    } else {
        v.map(|z| z / nrm)
    }
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn unitary_defect(u: &ComplexMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let id = identity(u.nrows());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn ensure_unitary(u: &ComplexMatrix) -> Result<()> {
    let defect = unitary_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// Max-entry defect of `P² = P = P*`.
pub fn projector_defect(p: &ComplexMatrix) -> f64 {
    if p.nrows() != p.ncols() {
        return f64::INFINITY;
    }
    let sq = p * p;
    let idem = (&sq - p).iter().map(|z| z.norm()).fold(0.0, f64::max);
    idem.max(hermitian_defect(p))
}

pub fn ensure_projector(p: &ComplexMatrix) -> Result<()> {
    let defect = projector_defect(p);
    if defect > PROJECTOR_TOL {
        return Err(Error::NotProjector { defect });
    }
    Ok(())
}

/// Rotate `v` by a global phase so that its largest-magnitude entry (first
/// one, up to 1e-12) is real and positive.
pub fn canonical_phase(v: &ComplexVector) -> ComplexVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v.clone();
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max - 1e-12)
        .expect("max entry exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    v.map(|z| z * phase)
}

/// Lexicographic order on entries, comparing real then imaginary parts.
pub fn lex_cmp(a: &ComplexVector, b: &ComplexVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors, in the same order as `eigenvalues`.
    #[serde(serialize_with = "crate::json::ser_matrix")]
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }

    /// `Σ f(λ_k) |v_k><v_k|`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let dim = self.eigenvectors.nrows();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(k);
            out += (v * v.adjoint()).map(|z| z * w);
        }
        out
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Hermitian eigen-decomposition. The input is symmetrized first; callers
/// validate Hermiticity where it matters.
pub fn eigh(m: &ComplexMatrix) -> SpectralDecomposition {
    assert_eq!(m.nrows(), m.ncols(), "eigh needs a square matrix");
    let dim = m.nrows();
    if dim == 0 {
        return SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let mut pairs: Vec<(f64, ComplexVector)> = (0..dim)
        .map(|k| {
            (
                eig.eigenvalues[k],
                canonical_phase(&eig.eigenvectors.column(k).into_owned()),
            )
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lex_cmp(&a.1, &b.1)));
    let mut vectors = ComplexMatrix::zeros(dim, dim);
    for (k, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(k, v);
    }
    SpectralDecomposition {
        eigenvalues: pairs.into_iter().map(|p| p.0).collect(),
        eigenvectors: vectors,
    }
}

/// Largest eigenvalue and a unit eigenvector.
pub fn top_eigen(m: &ComplexMatrix) -> (f64, ComplexVector) {
    if m.nrows() == 2 {
        return eigen_2x2(m, true);
    }
    let d = eigh(m);
    (d.max(), d.eigenvector(0))
}

/// Smallest eigenvalue and a unit eigenvector.
pub fn bottom_eigen(m: &ComplexMatrix) -> (f64, ComplexVector) {
    if m.nrows() == 2 {
        return eigen_2x2(m, false);
    }
    let d = eigh(m);
    let last = d.eigenvalues.len() - 1;
    (d.min(), d.eigenvector(last))
}

/// Closed-form extremal eigenpair of a 2×2 Hermitian matrix.
fn eigen_2x2(m: &ComplexMatrix, largest: bool) -> (f64, ComplexVector) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let radius = (half * half + b.norm_sqr()).sqrt();
    let lambda = if largest { mean + radius } else { mean - radius };
    if radius == 0.0 {
        return (lambda, basis_vector(2, 0));
    }
    // (m - λ) v = 0; pick the better-conditioned row.
    let v = if (a - lambda).abs() + b.norm() >= (d - lambda).abs() + b.norm() && b.norm() > 0.0 {
        ComplexVector::from_vec(vec![b, c64(lambda - a, 0.0)])
    } else if b.norm() > 0.0 {
        ComplexVector::from_vec(vec![c64(lambda - d, 0.0), b.conj()])
    } else if (largest && a >= d) || (!largest && a < d) {
        basis_vector(2, 0)
    } else {
        basis_vector(2, 1)
    };
    (lambda, canonical_phase(&normalize(&v)))
}

/// Eigenvalues only, descending.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let r = (half * half + b.norm_sqr()).sqrt();
        return vec![mean + r, mean - r];
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    *eigenvalues(m).last().unwrap_or(&0.0)
}

/// Trace norm of a Hermitian matrix, `Σ |λ_i|`.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    eigenvalues(m).iter().map(|l| l.abs()).sum()
}

/// Operator sign of a Hermitian matrix (zero eigenvalues map to +1) together
/// with its trace norm. `Tr(m · sign(m)) = ‖m‖₁`.
pub fn hermitian_sign(m: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let d = eigh(m);
    let norm1 = d.eigenvalues.iter().map(|l| l.abs()).sum();
    let s = d.apply_fn(|l| if l < 0.0 { -1.0 } else { 1.0 });
    (s, norm1)
}

/// Positive and negative parts `m = m⁺ − m⁻` from the spectral decomposition.
pub fn psd_parts(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let d = eigh(m);
    let plus = d.apply_fn(|l| l.max(0.0));
    let minus = d.apply_fn(|l| (-l).max(0.0));
    (plus, minus)
}

/// Projection onto the PSD cone in Frobenius norm (eigenvalue clipping).
pub fn clip_psd(m: &ComplexMatrix) -> ComplexMatrix {
    eigh(m).apply_fn(|l| l.max(0.0))
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return vec![];
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Thin SVD `m = Σ s_k |u_k><v_k|` with descending singular values.
pub struct SvdTerms {
    pub values: Vec<f64>,
    pub left: Vec<ComplexVector>,
    pub right: Vec<ComplexVector>,
}

pub fn svd_terms(m: &ComplexMatrix) -> SvdTerms {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    SvdTerms {
        values: order.iter().map(|&k| svd.singular_values[k]).collect(),
        left: order.iter().map(|&k| u.column(k).into_owned()).collect(),
        // row k of V* is <v_k|, so |v_k> is its conjugate transpose
        right: order.iter().map(|&k| v_t.row(k).adjoint()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixNorms {
    pub operator_norm: f64,
    pub trace_norm: f64,
    pub frobenius: f64,
}

pub fn matrix_norms(m: &ComplexMatrix) -> MatrixNorms {
    let sv = singular_values(m);
    MatrixNorms {
        operator_norm: sv.first().copied().unwrap_or(0.0),
        trace_norm: sv.iter().sum(),
        frobenius: frobenius(m),
    }
}

pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Unitary factor of the polar decomposition `m = U |m|`.
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    u * v_t
}

/// `exp(i·h)` for Hermitian `h`.
pub fn exp_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let d = eigh(h);
    let dim = h.nrows();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (k, &lambda) in d.eigenvalues.iter().enumerate() {
        let v = d.eigenvectors.column(k);
        let phase = C64::from_polar(1.0, lambda);
        out += (v * v.adjoint()).map(|z| z * phase);
    }
    out
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Integer square root for composite dimensions.
pub fn exact_sqrt(dim: usize) -> Option<usize> {
    let r = (dim as f64).sqrt().round() as usize;
    (r * r == dim).then_some(r)
}

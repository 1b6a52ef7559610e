//! Operators on `H ⊗ H` with `dim H = n`.
//!
//! The composite index of `e_i ⊗ e_k` is `i·n + k` (first factor major).
//! Every block formula in the crate derives from this convention: the
//! `(i, j)` block of `σ` is the `n × n` matrix with entries
//! `σ_{(i,k),(j,l)}`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, ensure_finite, ensure_unitary, kron, C64, ComplexMatrix, ComplexVector,
};

/// Coefficients above this threshold count toward the Schmidt rank.
pub const SCHMIDT_RANK_THRESHOLD: f64 = 1e-9;
/// Allowed deviation of `‖f‖` from one in [`schmidt_decompose`].
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Subsystem::First),
            2 => Ok(Subsystem::Second),
            _ => Err(Error::InvalidParams(format!("factor must be 1 or 2, got {k}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    n: usize,
    matrix: ComplexMatrix,
}

impl BipartiteOperator {
    pub fn new(n: usize, matrix: ComplexMatrix) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("factor dimension must be positive".into()));
        }
        let d = n * n;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "expected a {d}x{d} matrix for n = {n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        ensure_finite(&matrix)?;
        Ok(Self { n, matrix })
    }

    /// Infers `n` from the matrix size.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n = linalg::exact_sqrt(matrix.nrows())
            .ok_or_else(|| Error::Shape(format!("dimension {} is not a perfect square", matrix.nrows())))?;
        Self::new(n, matrix)
    }

    pub(crate) fn new_unchecked(n: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), n * n);
        Self { n, matrix }
    }

    pub fn zero(n: usize) -> Self {
        Self::new_unchecked(n, ComplexMatrix::zeros(n * n, n * n))
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(n, linalg::identity(n * n))
    }

    /// Elementary tensor `a ⊗ b`.
    pub fn product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if a.shape() != b.shape() || a.nrows() != a.ncols() {
            return Err(Error::Shape("factors must be square and of equal size".into()));
        }
        Self::new(a.nrows(), kron(a, b))
    }

    /// `|v><v|` for `v ∈ H ⊗ H`.
    pub fn projector(v: &ComplexVector) -> Result<Self> {
        Self::from_matrix(linalg::projector(v))
    }

    /// Builds `σ` from its blocks `σ^(i,j)`.
    pub fn from_blocks(n: usize, block: impl Fn(usize, usize) -> ComplexMatrix) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let b = block(i, j);
                if b.shape() != (n, n) {
                    return Err(Error::Shape(format!("block ({i},{j}) must be {n}x{n}")));
                }
                m.view_mut((i * n, j * n), (n, n)).copy_from(&b);
            }
        }
        Self::new(n, m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    #[inline]
    pub fn entry(&self, i: usize, k: usize, j: usize, l: usize) -> C64 {
        self.matrix[(i * self.n + k, j * self.n + l)]
    }

    /// The `(i, j)` block, entries `σ_{(i,k),(j,l)}`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let n = self.n;
        self.matrix.view((i * n, j * n), (n, n)).into_owned()
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > linalg::HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.n, self.matrix.adjoint())
    }

    pub fn hermitian_part(&self) -> Self {
        Self::new_unchecked(self.n, linalg::hermitian_part(&self.matrix))
    }

    pub fn partial_trace(&self, traced: Subsystem) -> ComplexMatrix {
        let n = self.n;
        match traced {
            Subsystem::Second => ComplexMatrix::from_fn(n, n, |i, j| {
                (0..n).map(|k| self.entry(i, k, j, k)).sum()
            }),
            Subsystem::First => ComplexMatrix::from_fn(n, n, |k, l| {
                (0..n).map(|i| self.entry(i, k, i, l)).sum()
            }),
        }
    }

    /// `τ_p = id ⊗ τ` in the standard basis.
    pub fn partial_transpose(&self) -> Self {
        let n = self.n;
        let m = ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            let (i, k) = (r / n, r % n);
            let (j, l) = (c / n, c % n);
            self.entry(i, l, j, k)
        });
        Self::new_unchecked(n, m)
    }

    /// Exchanges the tensor factors, `W σ W`.
    pub fn swap_factors(&self) -> Self {
        let n = self.n;
        let m = ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            let (i, k) = (r / n, r % n);
            let (j, l) = (c / n, c % n);
            self.entry(k, i, l, j)
        });
        Self::new_unchecked(n, m)
    }

    /// `(U1 ⊗ U2) σ (U1 ⊗ U2)*`
    pub fn conjugate_local(&self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<Self> {
        if u1.shape() != (self.n, self.n) || u2.shape() != (self.n, self.n) {
            return Err(Error::Shape(format!("local unitaries must be {0}x{0}", self.n)));
        }
        ensure_unitary(u1)?;
        ensure_unitary(u2)?;
        let u = kron(u1, u2);
        Ok(Self::new_unchecked(self.n, &u * &self.matrix * u.adjoint()))
    }

    /// `<v|σ|v>`
    pub fn expectation(&self, v: &ComplexVector) -> C64 {
        (v.adjoint() * &self.matrix * v)[(0, 0)]
    }

    /// `<f⊗g|σ|f⊗g>` (real part).
    pub fn product_expectation(&self, f: &ComplexVector, g: &ComplexVector) -> f64 {
        let a = self.reduce_second(g);
        (f.adjoint() * a * f)[(0, 0)].re
    }

    /// `A(g) = Tr₂[σ (I ⊗ |g><g|)]`, entries `<g|σ^(i,j)|g>`.
    pub fn reduce_second(&self, g: &ComplexVector) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = c64(0.0, 0.0);
            for k in 0..n {
                let gk = g[k].conj();
                if gk == c64(0.0, 0.0) {
                    continue;
                }
                for l in 0..n {
                    acc += gk * self.entry(i, k, j, l) * g[l];
                }
            }
            acc
        })
    }

    /// `B(f) = Tr₁[σ (|f><f| ⊗ I)]`, entries `Σ f̄_i f_j σ_{(i,k),(j,l)}`.
    pub fn reduce_first(&self, f: &ComplexVector) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |k, l| {
            let mut acc = c64(0.0, 0.0);
            for i in 0..n {
                let fi = f[i].conj();
                if fi == c64(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    acc += fi * self.entry(i, k, j, l) * f[j];
                }
            }
            acc
        })
    }

    /// `Tr₁[σ (S ⊗ I)]`, so that `Tr[σ (S ⊗ T)] = Tr(contract_first(S) · T)`.
    pub fn contract_first(&self, s: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |k, l| {
            let mut acc = c64(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += s[(j, i)] * self.entry(i, k, j, l);
                }
            }
            acc
        })
    }

    /// `Tr₂[σ (I ⊗ T)]`, so that `Tr[σ (S ⊗ T)] = Tr(contract_second(T) · S)`.
    pub fn contract_second(&self, t: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = c64(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    acc += self.entry(i, k, j, l) * t[(l, k)];
                }
            }
            acc
        })
    }

    /// `Tr(σ · u)`
    pub fn trace_with(&self, other: &Self) -> C64 {
        assert_eq!(self.n, other.n, "factor dimensions differ");
        linalg::trace_product(&self.matrix, &other.matrix)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "factor dimensions differ");
        linalg::frobenius(&(&self.matrix - &other.matrix))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new_unchecked(self.n, self.matrix.map(|z| z * c))
    }

    pub fn mul_op(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "factor dimensions differ");
        Self::new_unchecked(self.n, &self.matrix * &other.matrix)
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        linalg::eigh(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    pub fn operator_norm(&self) -> f64 {
        linalg::operator_norm(&self.matrix)
    }

    /// Operator Schmidt decomposition `σ = Σ c_k A_k ⊗ B_k` with
    /// Frobenius-normalized factors, from the SVD of the realignment.
    pub fn operator_schmidt(&self) -> Vec<(f64, ComplexMatrix, ComplexMatrix)> {
        let n = self.n;
        // R_{(i,j),(k,l)} = σ_{(i,k),(j,l)}
        let realigned = ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            let (i, j) = (r / n, r % n);
            let (k, l) = (c / n, c % n);
            self.entry(i, k, j, l)
        });
        let terms = linalg::svd_terms(&realigned);
        terms
            .values
            .iter()
            .zip(terms.left.iter().zip(terms.right.iter()))
            .filter(|(s, _)| **s > 0.0)
            .map(|(&s, (x, y))| {
                let a = ComplexMatrix::from_fn(n, n, |i, j| x[i * n + j]);
                let b = ComplexMatrix::from_fn(n, n, |k, l| y[k * n + l].conj());
                (s, a, b)
            })
            .collect()
    }
}

impl Add for &BipartiteOperator {
    type Output = BipartiteOperator;
    fn add(self, rhs: Self) -> BipartiteOperator {
        assert_eq!(self.n, rhs.n, "factor dimensions differ");
        BipartiteOperator::new_unchecked(self.n, &self.matrix + &rhs.matrix)
    }
}

impl Sub for &BipartiteOperator {
    type Output = BipartiteOperator;
    fn sub(self, rhs: Self) -> BipartiteOperator {
        assert_eq!(self.n, rhs.n, "factor dimensions differ");
        BipartiteOperator::new_unchecked(self.n, &self.matrix - &rhs.matrix)
    }
}

impl Neg for &BipartiteOperator {
    type Output = BipartiteOperator;
    fn neg(self) -> BipartiteOperator {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &BipartiteOperator {
    type Output = BipartiteOperator;
    fn mul(self, c: f64) -> BipartiteOperator {
        self.scale(c)
    }
}

pub use crate::linalg::SpectralDecomposition;

pub fn spectral_decompose(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let defect = linalg::hermitian_defect(m);
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(linalg::eigh(m))
}

/// `f = Σ g_i u_i ⊗ v_i` with descending non-negative coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    #[serde(serialize_with = "crate::json::ser_vectors")]
    pub left: Vec<ComplexVector>,
    #[serde(serialize_with = "crate::json::ser_vectors")]
    pub right: Vec<ComplexVector>,
    pub rank: usize,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> ComplexVector {
        let n = self.left[0].len();
        let mut out = ComplexVector::zeros(n * n);
        for ((g, u), v) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            out += linalg::kron_vec(u, v).map(|z| z * *g);
        }
        out
    }

    /// `Σ g_i`, whose square bounds the projective norm of `|f><f|`.
    pub fn coefficient_sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

/// Schmidt decomposition of a unit vector in `H ⊗ H`.
pub fn schmidt_decompose(f: &ComplexVector) -> Result<SchmidtDecomposition> {
    let norm = linalg::vector_norm(f);
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::Normalization { norm });
    }
    schmidt_any(f)
}

/// Schmidt decomposition without the unit-norm precondition.
pub fn schmidt_any(f: &ComplexVector) -> Result<SchmidtDecomposition> {
    let n = linalg::exact_sqrt(f.len())
        .ok_or_else(|| Error::Shape(format!("length {} is not a perfect square", f.len())))?;
    let coeff = ComplexMatrix::from_fn(n, n, |i, k| f[i * n + k]);
    let svd = linalg::svd_terms(&coeff);
    // coeff = Σ s |x><y|  ⇒  f = Σ s x ⊗ ȳ
    let right: Vec<ComplexVector> = svd.right.iter().map(|y| y.map(|z| z.conj())).collect();
    let rank = svd.values.iter().filter(|&&s| s > SCHMIDT_RANK_THRESHOLD).count();
    Ok(SchmidtDecomposition {
        coefficients: svd.values,
        left: svd.left,
        right,
        rank,
    })
}

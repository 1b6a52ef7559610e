//! Linear maps on `M_n` and their densities.
//!
//! A map is stored by its images of the matrix units, `images[i][j] =
//! φ(E_ij)`. Its density `ρ_φ` is the operator on `H ⊗ H` with
//! `Tr(ρ_φ (a ⊗ b)) = Tr(φ(a) bᵗ)`; on matrix units this pins every entry,
//! `ρ_φ[(j,l),(i,k)] = φ(E_ij)[k,l]`.

use serde::Serialize;

use crate::bipartite::BipartiteOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, ComplexMatrix, ComplexVector};
use crate::norms::{self, AlphaOptions, NormEstimate};
use crate::positivity::{self, ProductVectorCertificate, SeeSawOptions};
use crate::rng::{self, Stream};

pub const MAP_HERMITIAN_TOL: f64 = 1e-10;
pub const PAIRING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapRepr {
    n: usize,
    images: Vec<ComplexMatrix>,
}

impl LinearMapRepr {
    /// `images` in row-major order, `images[i * n + j] = φ(E_ij)`.
    pub fn new(n: usize, images: Vec<ComplexMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("map dimension must be positive".into()));
        }
        if images.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: images.len() });
        }
        for m in &images {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Shape(format!("map image is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
            }
            linalg::ensure_finite(m)?;
        }
        Ok(Self { n, images })
    }

    pub fn from_fn(n: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let images = (0..n * n).map(|r| f(&linalg::matrix_unit(n, r / n, r % n))).collect();
        Self { n, images }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |a| a.clone())
    }

    pub fn transpose(n: usize) -> Self {
        Self::from_fn(n, linalg::transpose)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn image(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.images[i * self.n + j]
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = a[(i, j)];
                if c != c64(0.0, 0.0) {
                    out += self.image(i, j) * c;
                }
            }
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { n: self.n, images: other.images.iter().map(|m| self.apply(m)).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { n: self.n, images: self.images.iter().map(|m| m.map(|z| z * c)).collect() }
    }

    /// `max ‖φ(E_ij)* − φ(E_ji)‖` over matrix units.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                d = d.max(linalg::max_abs_diff(&self.image(i, j).adjoint(), self.image(j, i)));
            }
        }
        d
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn ensure_hermiticity_preserving(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > MAP_HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(())
    }

    pub fn unit_image(&self) -> ComplexMatrix {
        self.apply(&linalg::identity(self.n))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapDensityPair {
    pub map: LinearMapRepr,
    pub density: BipartiteOperator,
    pub pairing_residual: f64,
}

pub fn density_from_map(phi: &LinearMapRepr) -> BipartiteOperator {
    let n = phi.n();
    let d = n * n;
    // the pairing equations on matrix units form a permutation system, so
    // each unknown is read off from exactly one equation
    let m = ComplexMatrix::from_fn(d, d, |row, col| {
        let (j, l) = (row / n, row % n);
        let (i, k) = (col / n, col % n);
        phi.image(i, j)[(k, l)]
    });
    BipartiteOperator::new_unchecked(n, m)
}

pub fn map_from_density(rho: &BipartiteOperator) -> LinearMapRepr {
    let n = rho.n();
    let images = (0..n * n)
        .map(|r| {
            let (i, j) = (r / n, r % n);
            ComplexMatrix::from_fn(n, n, |k, l| rho.entry(j, l, i, k))
        })
        .collect();
    LinearMapRepr { n, images }
}

/// `max |Tr(ρ (E_ij ⊗ E_kl)) − Tr(φ(E_ij) E_klᵗ)|` over all matrix units.
pub fn pairing_residual(phi: &LinearMapRepr, rho: &BipartiteOperator) -> Result<f64> {
    let n = phi.n();
    if rho.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.n() });
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = linalg::matrix_unit(n, i, j);
            let img = phi.image(i, j);
            for k in 0..n {
                for l in 0..n {
                    let b = linalg::matrix_unit(n, k, l);
                    let lhs = linalg::trace_product(rho.matrix(), &linalg::kron(&a, &b));
                    let rhs = linalg::trace_product(img, &b.transpose());
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    Ok(worst)
}

pub fn map_density_pair(phi: &LinearMapRepr) -> MapDensityPair {
    let density = density_from_map(phi);
    let pairing_residual = pairing_residual(phi, &density).expect("same dimension");
    MapDensityPair { map: phi.clone(), density, pairing_residual }
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityVerdict {
    pub positive: bool,
    pub certificate: ProductVectorCertificate,
}

/// `φ` is positive iff `ρ_φ` is block-positive.
pub fn is_positive_map(phi: &LinearMapRepr, tol: f64, opts: &SeeSawOptions) -> Result<PositivityVerdict> {
    phi.ensure_hermiticity_preserving()?;
    let rho = density_from_map(phi).hermitian_part();
    let (positive, certificate) = positivity::is_block_positive(&rho, tol, opts)?;
    Ok(PositivityVerdict { positive, certificate })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitalityReport {
    pub unital: bool,
    /// `‖φ(I) − I‖` in operator norm.
    pub defect: f64,
    /// `Tr ρ_φ = Tr φ(I)`.
    pub density_trace: f64,
}

pub fn is_unital(phi: &LinearMapRepr, tol: f64) -> UnitalityReport {
    let n = phi.n();
    let unit = phi.unit_image();
    let defect = linalg::operator_norm(&(&unit - linalg::identity(n)));
    UnitalityReport {
        unital: defect <= tol,
        defect,
        density_trace: density_from_map(phi).trace().re,
    }
}

/// For a positive `φ` with `α(ρ_φ) = 1`: checks `unital ⇔ Tr ρ_φ = n`.
/// `None` when the hypotheses fail.
pub fn unitality_equivalence(
    phi: &LinearMapRepr,
    alpha_opts: &AlphaOptions,
    seesaw: &SeeSawOptions,
) -> Result<Option<bool>> {
    if !is_positive_map(phi, 1e-8, seesaw)?.positive {
        return Ok(None);
    }
    let rho = density_from_map(phi).hermitian_part();
    let alpha = norms::alpha_norm(&rho, alpha_opts)?.value;
    if (alpha - 1.0).abs() > 1e-4 {
        return Ok(None);
    }
    let report = is_unital(phi, 1e-8);
    let normalized = (report.density_trace - phi.n() as f64).abs() <= 1e-6;
    Ok(Some(report.unital == normalized))
}

#[derive(Debug, Clone)]
pub enum MapKind {
    Identity { n: usize },
    Transpose { n: usize },
    /// `a ↦ U* a U`.
    Conjugation(ComplexMatrix),
    /// `a ↦ (U* a U)ᵗ`.
    CoConjugation(ComplexMatrix),
    /// `a ↦ <h, a h> I`.
    StateToIdentity(ComplexVector),
    /// `a ↦ Σ K_i* a K_i`.
    Kraus(Vec<ComplexMatrix>),
    /// `a ↦ (Σ K_i* a K_i)ᵗ`.
    CoKraus(Vec<ComplexMatrix>),
    ConvexCombination { weights: Vec<f64>, maps: Vec<MapKind> },
}

fn kraus_map(ks: &[ComplexMatrix]) -> Result<LinearMapRepr> {
    let n = ks.first().ok_or_else(|| Error::InvalidParams("empty Kraus family".into()))?.nrows();
    for k in ks {
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::InvalidParams("Kraus operators must be square of one size".into()));
        }
    }
    Ok(LinearMapRepr::from_fn(n, |a| {
        let mut out = ComplexMatrix::zeros(n, n);
        for k in ks {
            out += k.adjoint() * a * k;
        }
        out
    }))
}

pub fn canonical_map(kind: &MapKind) -> Result<LinearMapRepr> {
    match kind {
        MapKind::Identity { n } => Ok(LinearMapRepr::identity(*n)),
        MapKind::Transpose { n } => Ok(LinearMapRepr::transpose(*n)),
        MapKind::Conjugation(u) => {
            linalg::ensure_unitary(u).map_err(|e| Error::InvalidParams(e.to_string()))?;
            kraus_map(std::slice::from_ref(u))
        }
        MapKind::CoConjugation(u) => {
            let inner = canonical_map(&MapKind::Conjugation(u.clone()))?;
            Ok(LinearMapRepr::transpose(u.nrows()).compose(&inner))
        }
        MapKind::StateToIdentity(h) => {
            let n = h.len();
            let nrm = linalg::vector_norm(h);
            if (nrm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParams(format!("state vector has norm {nrm}")));
            }
            Ok(LinearMapRepr::from_fn(n, |a| {
                let v = (h.adjoint() * a * h)[(0, 0)];
                linalg::identity(n) * v
            }))
        }
        MapKind::Kraus(ks) => kraus_map(ks),
        MapKind::CoKraus(ks) => {
            let inner = kraus_map(ks)?;
            Ok(LinearMapRepr::transpose(inner.n()).compose(&inner))
        }
        MapKind::ConvexCombination { weights, maps } => {
            if weights.len() != maps.len() || maps.is_empty() {
                return Err(Error::InvalidParams("weights and maps must have equal nonzero length".into()));
            }
            let total: f64 = weights.iter().sum();
            if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams("weights must be a probability vector".into()));
            }
            let parts = maps.iter().map(canonical_map).collect::<Result<Vec<_>>>()?;
            let n = parts[0].n();
            if parts.iter().any(|p| p.n() != n) {
                return Err(Error::InvalidParams("maps of different dimensions".into()));
            }
            let mut images = vec![ComplexMatrix::zeros(n, n); n * n];
            for (w, p) in weights.iter().zip(&parts) {
                for (acc, m) in images.iter_mut().zip(p.images()) {
                    *acc += m * c64(*w, 0.0);
                }
            }
            LinearMapRepr::new(n, images)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapNormReport {
    pub value: f64,
    pub estimate: NormEstimate,
    pub positive: bool,
    /// `‖φ(I)‖`, compared with the norm for positive maps.
    pub unit_image_norm: f64,
    pub cross_check: Option<bool>,
}

pub const MAP_NORM_CROSS_TOL: f64 = 2e-4;

/// `‖φ‖ = α(ρ_φ)`; for positive maps also compared with `‖φ(I)‖`.
pub fn map_norm(phi: &LinearMapRepr, alpha_opts: &AlphaOptions, seesaw: &SeeSawOptions) -> Result<MapNormReport> {
    phi.ensure_hermiticity_preserving()?;
    let rho = density_from_map(phi).hermitian_part();
    let estimate = norms::alpha_norm(&rho, alpha_opts)?;
    let positive = is_positive_map(phi, 1e-8, seesaw)?.positive;
    let unit_image_norm = linalg::operator_norm(&phi.unit_image());
    let cross_check = positive.then(|| (estimate.value - unit_image_norm).abs() <= MAP_NORM_CROSS_TOL);
    Ok(MapNormReport { value: estimate.value, estimate, positive, unit_image_norm, cross_check })
}

/// Kraus operators of a random unital CP map: blocks of an `nm × n`
/// isometry, so `Σ K_i* K_i = I`.
pub fn random_unital_kraus(rng: &mut Stream, n: usize, count: usize) -> Vec<ComplexMatrix> {
    let v = rng::isometry(rng, n * count, n);
    (0..count).map(|b| v.rows(b * n, n).into_owned()).collect()
}

pub fn random_unital_cp(rng: &mut Stream, n: usize, count: usize) -> LinearMapRepr {
    kraus_map(&random_unital_kraus(rng, n, count)).expect("square Kraus operators")
}

pub fn random_unital_cocp(rng: &mut Stream, n: usize, count: usize) -> LinearMapRepr {
    canonical_map(&MapKind::CoKraus(random_unital_kraus(rng, n, count))).expect("square Kraus operators")
}

//! Counter-based random streams and random matrix ensembles.
//!
//! Every random draw in the crate comes from `stream(seed, index)`, so a
//! sample's value depends only on the seed and its index, never on the
//! order in which parallel workers run.

use nalgebra::QR;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, c64, ComplexMatrix, ComplexVector};

pub type Stream = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 7;

pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent seed for a named sub-task.
pub fn subseed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut Stream) -> f64 {
    StandardNormal.sample(rng)
}

pub fn uniform(rng: &mut Stream) -> f64 {
    use rand::Rng;
    rng.random::<f64>()
}

/// Uniform point on the complex unit sphere in `C^dim`.
pub fn unit_vector(rng: &mut Stream, dim: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| c64(normal(rng), normal(rng)));
        if linalg::vector_norm(&v) > 1e-12 {
            return linalg::normalize(&v);
        }
    }
}

/// Complex Ginibre matrix (i.i.d. standard complex Gaussian entries).
pub fn ginibre(rng: &mut Stream, dim: usize) -> ComplexMatrix {
    ginibre_rect(rng, dim, dim)
}

pub fn ginibre_rect(rng: &mut Stream, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| c64(normal(rng) * s, normal(rng) * s))
}

/// Hermitian matrix from the Gaussian unitary ensemble.
pub fn gue(rng: &mut Stream, dim: usize) -> ComplexMatrix {
    linalg::hermitian_part(&ginibre(rng, dim))
}

/// `rows × cols` isometry (`V*V = I`) with Haar-distributed range.
pub fn isometry(rng: &mut Stream, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols);
    let g = ginibre_rect(rng, rows, cols);
    let qr = QR::new(g);
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..rows {
            out[(i, k)] *= phase;
        }
    }
    out
}

pub fn haar_unitary(rng: &mut Stream, dim: usize) -> ComplexMatrix {
    isometry(rng, dim, dim)
}

/// `exp(iεH)` for a random traceless `H` with unit Frobenius norm.
pub fn unitary_near_identity(rng: &mut Stream, dim: usize, angle: f64) -> ComplexMatrix {
    let mut h = gue(rng, dim);
    let tr = linalg::trace(&h) / dim as f64;
    for k in 0..dim {
        h[(k, k)] -= tr;
    }
    let nrm = linalg::frobenius(&h).max(1e-300);
    linalg::exp_i_hermitian(&h.map(|z| z * (angle / nrm)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = unit_vector(&mut stream(1, 0), 4);
        let b = unit_vector(&mut stream(1, 0), 4);
        let c = unit_vector(&mut stream(1, 1), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn isometry_has_orthonormal_columns() {
        let v = isometry(&mut stream(2, 0), 6, 3);
        let prod = v.adjoint() * &v;
        assert!(linalg::max_abs_diff(&prod, &linalg::identity(3)) < 1e-12);
        assert!(linalg::unitary_defect(&haar_unitary(&mut stream(2, 1), 4)) < 1e-12);
    }

    #[test]
    fn near_identity_unitary_is_unitary() {
        let u = unitary_near_identity(&mut stream(3, 0), 3, 0.3);
        assert!(linalg::unitary_defect(&u) < 1e-12);
        assert!(linalg::max_abs_diff(&u, &linalg::identity(3)) > 1e-3);
    }
}

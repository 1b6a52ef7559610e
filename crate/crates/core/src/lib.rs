//! Numerical tools for block-positive operators on `H ⊗ H`, the projective
//! tensor norm π and its dual α, and positive maps on `M_n`.
//!
//! Operators on `C^n ⊗ C^n` are `n² × n²` complex matrices with composite
//! index `r = i·n + k` for `e_i ⊗ e_k`.

pub mod bipartite;
pub mod error;
pub mod exposed;
pub mod json;
pub mod linalg;
pub mod maps;
pub mod norms;
pub mod positivity;
pub mod rng;
pub mod structure;

pub use bipartite::{schmidt_decompose, spectral_decompose, BipartiteOperator, SchmidtDecomposition, Subsystem};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, SpectralDecomposition, C64};
pub use maps::{density_from_map, map_from_density, LinearMapRepr, MapDensityPair, MapKind};
pub use norms::{alpha_norm, pi_interval, AlphaOptions, NormEstimate, PiOptions};
pub use positivity::{membership, MembershipOptions, MembershipReport, ProductVectorCertificate, SeeSawOptions, Tolerances};

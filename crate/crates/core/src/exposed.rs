//! Exposedness, rotundity and smoothness tests on the set of normalized
//! block-positive densities and the α unit ball.
//!
//! A point `ρ₀` is exposed by a functional `a` when `Tr(aρ₀) > Tr(aσ)` for
//! every other `σ` in the set. The set cannot be enumerated, so the check
//! here is a seeded Monte-Carlo search for violations. A violation is a
//! concrete, re-checkable counterexample; its absence is only evidence.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::{BipartiteOperator, Subsystem};
use crate::error::{Error, Result};
use crate::linalg::{self, basis_vector, ComplexVector};
use crate::maps::{self, LinearMapRepr};
use crate::norms::{self, AlphaOptions};
use crate::positivity::{self, MembershipOptions, MembershipReport};
use crate::rng::{self, Stream};
use crate::structure::{make_max_entangled, make_swap};

pub const WITNESS_PSD_TOL: f64 = 1e-10;
pub const SEPARABLE_TOL: f64 = 1e-10;
/// Samples closer than this (Frobenius) to the candidate are skipped.
pub const SAME_POINT_TOL: f64 = 1e-8;
/// Relative slack under which a gap counts as non-positive; absorbs
/// rounding in `Tr(aρ₀) − Tr(aσ)` when the two traces agree exactly.
pub const GAP_ROUNDING: f64 = 1e-12;
pub const UNIT_ALPHA_TOL: f64 = 2e-4;
pub const CORNER_TOL: f64 = 1e-2;
pub const ROTUND_MARGIN: f64 = 1e-3;
pub const CLUSTER_DISTANCE: f64 = 1e-3;

pub const COVERAGE_NOTE: &str = "samples are drawn from densities of convex combinations of unital \
completely positive and completely copositive maps, local rotations of the candidate, and mixtures \
with catalog points; for n >= 3 the non-decomposable part of the set is not sampled";
pub const MONTE_CARLO_NOTE: &str = "supported means no violation among the samples; it is not a proof";

#[derive(Debug, Clone, Serialize)]
pub struct SeparableForm {
    /// `Λ[i][j] ≥ 0` weighting `|u_i><u_i| ⊗ |v_j><v_j|`.
    pub lambda: Vec<Vec<f64>>,
    #[serde(serialize_with = "crate::json::ser_vectors")]
    pub first: Vec<ComplexVector>,
    #[serde(serialize_with = "crate::json::ser_vectors")]
    pub second: Vec<ComplexVector>,
}

impl SeparableForm {
    pub fn reconstruct(&self, n: usize) -> BipartiteOperator {
        let mut m = linalg::ComplexMatrix::zeros(n * n, n * n);
        for (i, u) in self.first.iter().enumerate() {
            for (j, v) in self.second.iter().enumerate() {
                let w = self.lambda[i][j];
                if w != 0.0 {
                    m += linalg::kron(&linalg::projector(u), &linalg::projector(v)).map(|z| z * w);
                }
            }
        }
        BipartiteOperator::new_unchecked(n, m)
    }
}

/// Tries to write `a` as `Σ Λ_ij P_i ⊗ Q_j` in the eigenbases of its two
/// marginals. Succeeds for operators diagonal in such a product basis.
pub fn detect_separable_form(a: &BipartiteOperator) -> Option<SeparableForm> {
    let n = a.n();
    let u = linalg::eigh(&a.partial_trace(Subsystem::Second)).eigenvectors;
    let v = linalg::eigh(&a.partial_trace(Subsystem::First)).eigenvectors;
    let uv = linalg::kron(&u, &v);
    let rotated = uv.adjoint() * a.matrix() * &uv;
    let mut lambda = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = rotated[(i * n + j, i * n + j)];
            if d.re < -SEPARABLE_TOL || d.im.abs() > SEPARABLE_TOL {
                return None;
            }
            lambda[i][j] = d.re.max(0.0);
        }
    }
    let form = SeparableForm {
        lambda,
        first: (0..n).map(|k| u.column(k).into_owned()).collect(),
        second: (0..n).map(|k| v.column(k).into_owned()).collect(),
    };
    (form.reconstruct(n).max_abs_diff(a) <= SEPARABLE_TOL).then_some(form)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExposureWitness {
    pub a: BipartiteOperator,
    pub shift: f64,
    pub min_eigenvalue: f64,
    pub separable: Option<SeparableForm>,
}

impl ExposureWitness {
    /// Wraps an already PSD operator without shifting.
    pub fn new(a: BipartiteOperator) -> Result<Self> {
        positivize_witness(&a, 0.0)
    }
}

/// `a' = a + (c/n) I`. On the slice `Tr = n` this changes every pairing by
/// the same constant `c`, so exposure gaps are unchanged.
pub fn positivize_witness(a: &BipartiteOperator, c: f64) -> Result<ExposureWitness> {
    a.ensure_hermitian()?;
    if !(c >= 0.0) {
        return Err(Error::InvalidParams(format!("shift must be nonnegative, got {c}")));
    }
    let n = a.n();
    let shifted = &a.hermitian_part() + &BipartiteOperator::identity(n).scale(c / n as f64);
    let min_eigenvalue = shifted.min_eigenvalue();
    if min_eigenvalue < -WITNESS_PSD_TOL {
        return Err(Error::Precondition(format!(
            "shift {c} leaves the witness indefinite (min eigenvalue {min_eigenvalue:.3e})"
        )));
    }
    let separable = detect_separable_form(&shifted);
    Ok(ExposureWitness { a: shifted, shift: c, min_eigenvalue, separable })
}

/// Smallest admissible shift plus one.
pub fn default_shift(a: &BipartiteOperator) -> f64 {
    let n = a.n() as f64;
    (-n * a.hermitian_part().min_eigenvalue()).max(0.0) + 1.0
}

fn random_weights(rng: &mut Stream, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng::uniform(rng)).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Density of `Σ w_i φ_i`.
pub fn mixture_density(weights: &[f64], maps: &[LinearMapRepr]) -> Result<BipartiteOperator> {
    if weights.len() != maps.len() || maps.is_empty() {
        return Err(Error::InvalidParams("weights and maps must have equal nonzero length".into()));
    }
    let n = maps[0].n();
    let mut acc = BipartiteOperator::zero(n);
    for (w, m) in weights.iter().zip(maps) {
        if m.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.n() });
        }
        acc = &acc + &maps::density_from_map(m).scale(*w);
    }
    Ok(acc)
}

/// Element `index` of the seeded sampler: the density of a random convex
/// combination of one to three unital CP or co-CP maps.
pub fn sample_d_at(n: usize, seed: u64, index: u64) -> Result<BipartiteOperator> {
    if n < 2 {
        return Err(Error::InvalidParams("sampling needs n >= 2".into()));
    }
    let mut r = rng::stream(rng::subseed(seed, 0x44), index);
    let terms = 1 + (rng::uniform(&mut r) * 3.0) as usize % 3;
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let count = 1 + (rng::uniform(&mut r) * n as f64) as usize % n;
        let co = rng::uniform(&mut r) < 0.5;
        list.push(if co {
            maps::random_unital_cocp(&mut r, n, count)
        } else {
            maps::random_unital_cp(&mut r, n, count)
        });
    }
    let weights = random_weights(&mut r, terms);
    mixture_density(&weights, &list).map(|d| d.hermitian_part())
}

pub fn sample_d(n: usize, seed: u64) -> Result<BipartiteOperator> {
    sample_d_at(n, seed, 0)
}

/// Points of the set used as fixed samples and mixture partners: the
/// swap, `n|f><f|`, and `|e_k><e_k| ⊗ I`.
pub fn catalog_points(n: usize) -> Vec<(String, BipartiteOperator)> {
    let mut out = vec![("swap".to_string(), make_swap(n)), ("max-entangled".to_string(), make_max_entangled(n).1)];
    for k in 0..n {
        let p = linalg::projector(&basis_vector(n, k));
        out.push((format!("basis-projector-{k}"), BipartiteOperator::product(&p, &linalg::identity(n)).expect("square")));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Catalog,
    PartialTranspose,
    SampleD,
    LocalRotation,
    CatalogMixture,
    SampleMixture,
}

/// Sample `index` of the exposure schedule for candidate `rho0`.
pub fn exposure_sample(rho0: &BipartiteOperator, seed: u64, index: usize) -> Result<(SampleKind, BipartiteOperator)> {
    let n = rho0.n();
    let catalog = catalog_points(n);
    if index < catalog.len() {
        return Ok((SampleKind::Catalog, catalog[index].1.clone()));
    }
    if index == catalog.len() {
        return Ok((SampleKind::PartialTranspose, rho0.partial_transpose()));
    }
    let k = index - catalog.len() - 1;
    let mut r = rng::stream(rng::subseed(seed, 0x4558), k as u64);
    let sample_seed = rng::subseed(seed, 0x53);
    Ok(match k % 4 {
        0 => (SampleKind::SampleD, sample_d_at(n, sample_seed, k as u64)?),
        1 => {
            let angle = 0.2 + 1.3 * rng::uniform(&mut r);
            let u = rng::unitary_near_identity(&mut r, n, angle);
            let id = linalg::identity(n);
            let rotated = if (k / 4).is_multiple_of(2) {
                rho0.conjugate_local(&u, &id)?
            } else {
                rho0.conjugate_local(&id, &u)?
            };
            (SampleKind::LocalRotation, rotated)
        }
        2 => {
            let lambda = 0.9 * rng::uniform(&mut r);
            let pick = (rng::uniform(&mut r) * catalog.len() as f64) as usize % catalog.len();
            let mix = &rho0.scale(lambda) + &catalog[pick].1.scale(1.0 - lambda);
            (SampleKind::CatalogMixture, mix)
        }
        _ => {
            let lambda = 0.9 * rng::uniform(&mut r);
            let other = sample_d_at(n, sample_seed, k as u64)?;
            (SampleKind::SampleMixture, &rho0.scale(lambda) + &other.scale(1.0 - lambda))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Supported,
    Refuted,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub kind: SampleKind,
    pub gap: f64,
    pub distance: f64,
    pub sigma: BipartiteOperator,
    pub membership: MembershipReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExposureReport {
    pub candidate: BipartiteOperator,
    pub witness: ExposureWitness,
    pub candidate_pairing: f64,
    pub samples: usize,
    pub skipped: usize,
    pub min_gap: f64,
    pub min_gap_index: Option<usize>,
    pub min_gap_kind: Option<SampleKind>,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    /// `min Tr(a σ⁻)` over samples, `σ⁻` from the spectral split.
    pub dominating_split_min: f64,
    pub seed: u64,
    pub sampler: &'static str,
    pub status: &'static str,
}

struct GapRecord {
    index: usize,
    kind: SampleKind,
    gap: f64,
    distance: f64,
    split: f64,
}

/// Monte-Carlo test of `Tr(aρ₀) > Tr(aσ)` over `samples` seeded `σ ≠ ρ₀`.
pub fn check_exposure(
    rho0: &BipartiteOperator,
    witness: &ExposureWitness,
    samples: usize,
    seed: u64,
    membership_opts: &MembershipOptions,
) -> Result<ExposureReport> {
    if witness.a.n() != rho0.n() {
        return Err(Error::DimensionMismatch { expected: rho0.n(), found: witness.a.n() });
    }
    if witness.a.min_eigenvalue() < -WITNESS_PSD_TOL {
        return Err(Error::Precondition("exposure witness must be PSD".into()));
    }
    let m0 = positivity::membership(rho0, membership_opts);
    if !m0.in_D {
        return Err(Error::Precondition(format!("candidate is not in D: {}", m0.reasons.join("; "))));
    }
    let rho0 = rho0.hermitian_part();
    let a = &witness.a;
    let base = rho0.trace_with(a).re;
    let slack = GAP_ROUNDING * base.abs().max(1.0);

    let records: Vec<Option<GapRecord>> = (0..samples)
        .into_par_iter()
        .map(|index| -> Result<Option<GapRecord>> {
            let (kind, sigma) = exposure_sample(&rho0, seed, index)?;
            let distance = sigma.frobenius_distance(&rho0);
            if distance <= SAME_POINT_TOL {
                return Ok(None);
            }
            let gap = base - sigma.trace_with(a).re;
            let (_, minus) = positivity::bp_jordan_split(&sigma);
            let split = minus.trace_with(a).re;
            Ok(Some(GapRecord { index, kind, gap, distance, split }))
        })
        .collect::<Result<_>>()?;
    let kept: Vec<GapRecord> = records.into_iter().flatten().collect();
    let skipped = samples - kept.len();
    let worst = kept.iter().min_by(|x, y| x.gap.total_cmp(&y.gap).then(x.index.cmp(&y.index)));
    let min_gap = worst.map_or(f64::INFINITY, |w| w.gap);
    let dominating_split_min = kept.iter().map(|r| r.split).fold(f64::INFINITY, f64::min);

    let (verdict, counterexample) = match worst {
        Some(w) if w.gap <= slack => {
            let (_, sigma) = exposure_sample(&rho0, seed, w.index)?;
            let membership = positivity::membership(&sigma, membership_opts);
            let ce = Counterexample { index: w.index, kind: w.kind, gap: w.gap, distance: w.distance, sigma, membership };
            (Verdict::Refuted, Some(ce))
        }
        _ => (Verdict::Supported, None),
    };
    Ok(ExposureReport {
        candidate: rho0,
        witness: witness.clone(),
        candidate_pairing: base,
        samples: kept.len(),
        skipped,
        min_gap,
        min_gap_index: worst.map(|w| w.index),
        min_gap_kind: worst.map(|w| w.kind),
        verdict,
        counterexample,
        dominating_split_min,
        seed,
        sampler: COVERAGE_NOTE,
        status: MONTE_CARLO_NOTE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryExposureReport {
    pub self_pairing: f64,
    pub exposure: ExposureReport,
}

/// Exposure of a symmetry `a ∈ D` by its own (shifted) functional.
pub fn symmetry_exposure_check(
    a: &BipartiteOperator,
    samples: usize,
    seed: u64,
    membership_opts: &MembershipOptions,
) -> Result<SymmetryExposureReport> {
    a.ensure_hermitian()?;
    let n = a.n();
    let sq = a.mul_op(a);
    let defect = sq.max_abs_diff(&BipartiteOperator::identity(n));
    if defect > 1e-9 {
        return Err(Error::Precondition(format!("not a symmetry (‖a² − I‖ = {defect:.3e})")));
    }
    let self_pairing = a.trace_with(a).re;
    if (self_pairing - (n * n) as f64).abs() > 1e-10 {
        return Err(Error::Precondition(format!("Tr(a·a) = {self_pairing} differs from n²")));
    }
    let witness = positivize_witness(a, default_shift(a))?;
    let exposure = check_exposure(a, &witness, samples, seed, membership_opts)?;
    Ok(SymmetryExposureReport { self_pairing, exposure })
}

/// Exposure of `ρ₀` (default `p`) by the projector `p`. When `ρ₀ ≠ p` it
/// must be an e-symmetry `p − q` with `p ρ₀ = p`.
pub fn projection_exposure_check(
    p: &BipartiteOperator,
    rho0: Option<&BipartiteOperator>,
    samples: usize,
    seed: u64,
    membership_opts: &MembershipOptions,
) -> Result<ExposureReport> {
    linalg::ensure_projector(p.matrix())?;
    let rho0 = rho0.cloned().unwrap_or_else(|| p.clone());
    if rho0.n() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: rho0.n() });
    }
    let prod = p.mul_op(&rho0);
    if prod.max_abs_diff(p) > 1e-9 {
        return Err(Error::Precondition("candidate does not satisfy p·ρ₀ = p".into()));
    }
    let sq = rho0.mul_op(&rho0);
    linalg::ensure_projector(sq.matrix())
        .map_err(|_| Error::Precondition("candidate is not an e-symmetry".into()))?;
    let witness = ExposureWitness::new(p.clone())?;
    check_exposure(&rho0, &witness, samples, seed, membership_opts)
}

fn ensure_unit_alpha(x: &BipartiteOperator, opts: &AlphaOptions) -> Result<f64> {
    let a = norms::alpha_norm(x, opts)?.value;
    if (a - 1.0).abs() > UNIT_ALPHA_TOL {
        return Err(Error::Precondition(format!("α = {a:.6e} is not 1")));
    }
    Ok(a)
}

pub const DEFAULT_T_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Serialize)]
pub struct DirectionQuotients {
    pub t: Vec<f64>,
    pub quotients: Vec<f64>,
    /// Interval spanned by the sampled quotients (estimate of the limit).
    pub estimate: (f64, f64),
    pub rotund_along: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RotundReport {
    pub alpha_x: f64,
    pub directions: Vec<DirectionQuotients>,
    pub rotund: bool,
    pub margin: f64,
}

/// One-sided difference quotients `(α(x + t y) − α(x))/t`. Any quotient
/// `≥ 1 − 1e-3` means `x` is not rotund along `y`.
pub fn rotund_test(
    x: &BipartiteOperator,
    directions: &[BipartiteOperator],
    ladder: &[f64],
    opts: &AlphaOptions,
) -> Result<RotundReport> {
    let alpha_x = ensure_unit_alpha(x, opts)?;
    let mut out = Vec::with_capacity(directions.len());
    for y in directions {
        if y.n() != x.n() {
            return Err(Error::DimensionMismatch { expected: x.n(), found: y.n() });
        }
        let quotients = ladder
            .iter()
            .map(|&t| Ok((norms::alpha_norm(&(x + &y.scale(t)), opts)?.value - alpha_x) / t))
            .collect::<Result<Vec<f64>>>()?;
        let lo = quotients.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(DirectionQuotients {
            t: ladder.to_vec(),
            rotund_along: hi < 1.0 - ROTUND_MARGIN,
            quotients,
            estimate: (lo, hi),
        });
    }
    Ok(RotundReport { alpha_x, rotund: out.iter().all(|d| d.rotund_along), directions: out, margin: ROTUND_MARGIN })
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalCluster {
    pub size: usize,
    pub value: f64,
    pub representative: norms::SymmetryWitness,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothReport {
    pub alpha: f64,
    pub maximizers: usize,
    pub clusters: Vec<FunctionalCluster>,
    pub smooth: bool,
}

/// Counts distinct norming functionals `s ⊗ |g><g|` among the near-optimal
/// restarts of the α search.
pub fn smooth_test(x: &BipartiteOperator, opts: &AlphaOptions) -> Result<SmoothReport> {
    let search = norms::alpha_search(x, opts)?;
    let alpha = search.best.value;
    if (alpha - 1.0).abs() > UNIT_ALPHA_TOL {
        return Err(Error::Precondition(format!("α = {alpha:.6e} is not 1")));
    }
    let near: Vec<&norms::AscentResult> =
        search.candidates.iter().filter(|c| c.value >= alpha - 1e-6 * alpha.max(1.0)).collect();
    let mut clusters: Vec<(BipartiteOperator, FunctionalCluster)> = Vec::new();
    for c in &near {
        let w = c.witness();
        let f = w.functional();
        if let Some((_, cl)) = clusters.iter_mut().find(|(rep, _)| rep.frobenius_distance(&f) <= CLUSTER_DISTANCE) {
            cl.size += 1;
        } else {
            clusters.push((f, FunctionalCluster { size: 1, value: c.value, representative: w }));
        }
    }
    let clusters: Vec<FunctionalCluster> = clusters.into_iter().map(|(_, c)| c).collect();
    Ok(SmoothReport { alpha, maximizers: near.len(), smooth: clusters.len() == 1, clusters })
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionReport {
    pub x: BipartiteOperator,
    pub y: BipartiteOperator,
    /// Boundary points `(X, Y)` of `{X x + Y y : α ≤ 1}`, one per angle.
    pub boundary: Vec<(f64, f64)>,
    pub max_alpha_defect: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    pub corner: bool,
}

impl SectionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,x,y\n");
        let m = self.boundary.len();
        for (k, (bx, by)) in self.boundary.iter().enumerate() {
            let theta = 2.0 * PI * k as f64 / m as f64;
            s.push_str(&format!("{theta:.16e},{bx:.16e},{by:.16e}\n"));
        }
        s
    }
}

/// Traces the unit sphere of α in the plane spanned by `x` and `y` with
/// `resolution` angles. Boundary radii come from homogeneity,
/// `r(θ) = 1/α(cos θ x + sin θ y)`; tangent slopes `dX/dY` at `x` are
/// taken from the first boundary points on either side.
pub fn section_trace(
    x: &BipartiteOperator,
    y: &BipartiteOperator,
    resolution: usize,
    opts: &AlphaOptions,
) -> Result<SectionReport> {
    if y.n() != x.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), found: y.n() });
    }
    if resolution < 8 {
        return Err(Error::InvalidParams("section resolution must be at least 8".into()));
    }
    let xx = x.trace_with(x).re;
    let yy = y.trace_with(y).re;
    let xy = x.trace_with(y).norm();
    if xx * yy - xy * xy <= 1e-12 * xx * yy {
        return Err(Error::Precondition("degenerate span: x and y are parallel".into()));
    }
    ensure_unit_alpha(x, opts)?;
    ensure_unit_alpha(y, opts)?;
    let results: Vec<(f64, f64, f64)> = (0..resolution)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64, f64)> {
            let theta = 2.0 * PI * k as f64 / resolution as f64;
            let (c, s) = (theta.cos(), theta.sin());
            let d = &x.scale(c) + &y.scale(s);
            let a = norms::alpha_norm(&d, opts)?.value;
            let r = 1.0 / a;
            let check = norms::alpha_norm(&d.scale(r), opts)?.value;
            Ok((r * c, r * s, (check - 1.0).abs()))
        })
        .collect::<Result<_>>()?;
    let boundary: Vec<(f64, f64)> = results.iter().map(|&(a, b, _)| (a, b)).collect();
    let max_alpha_defect = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let (x0, _) = boundary[0];
    let (xp, yp) = boundary[1];
    let (xm, ym) = boundary[resolution - 1];
    let right_slope = (xp - x0) / yp;
    let left_slope = (xm - x0) / ym;
    Ok(SectionReport {
        x: x.clone(),
        y: y.clone(),
        boundary,
        max_alpha_defect,
        left_slope,
        right_slope,
        corner: (right_slope - left_slope).abs() > CORNER_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongNonsmoothReport {
    pub sections: Vec<SectionReport>,
    pub strongly_nonsmooth: bool,
}

pub fn strong_nonsmooth_test(
    x: &BipartiteOperator,
    partners: &[BipartiteOperator],
    resolution: usize,
    opts: &AlphaOptions,
) -> Result<StrongNonsmoothReport> {
    let sections = partners
        .iter()
        .map(|y| section_trace(x, y, resolution, opts))
        .collect::<Result<Vec<_>>>()?;
    let strongly_nonsmooth = !sections.is_empty() && sections.iter().all(|s| s.corner);
    Ok(StrongNonsmoothReport { sections, strongly_nonsmooth })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleDirection {
    /// Trace-one element to trace-`n` element (multiply by `n`).
    Up,
    /// Trace-`n` element to trace-one element (divide by `n`).
    Down,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleReport {
    pub operator: BipartiteOperator,
    pub alpha_before: f64,
    pub alpha_after: f64,
    pub homogeneity_defect: f64,
    /// Membership of the trace-`n` member of the pair.
    pub membership: MembershipReport,
    /// Operator norm of the trace-one member of the pair.
    pub scaled_down_operator_norm: f64,
}

/// Moves between the trace-`n` normalization and the trace-one one by a
/// factor `n`.
pub fn scale_dn(rho: &BipartiteOperator, direction: ScaleDirection, opts: &MembershipOptions) -> Result<ScaleReport> {
    rho.ensure_hermitian()?;
    let n = rho.n() as f64;
    let tr = rho.trace().re;
    let (expected, factor) = match direction {
        ScaleDirection::Up => (1.0, n),
        ScaleDirection::Down => (n, 1.0 / n),
    };
    if (tr - expected).abs() > 1e-8 {
        return Err(Error::Precondition(format!("trace {tr} does not match the normalization {expected}")));
    }
    let operator = rho.scale(factor);
    let alpha_before = norms::alpha_norm(rho, &opts.alpha)?.value;
    let alpha_after = norms::alpha_norm(&operator, &opts.alpha)?.value;
    let homogeneity_defect = (alpha_after - factor * alpha_before).abs();
    let (big, small) = match direction {
        ScaleDirection::Up => (&operator, rho),
        ScaleDirection::Down => (rho, &operator),
    };
    let membership = positivity::membership(big, opts);
    Ok(ScaleReport {
        scaled_down_operator_norm: small.operator_norm(),
        operator,
        alpha_before,
        alpha_after,
        homogeneity_defect,
        membership,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub traces: Vec<f64>,
    pub flat: bool,
}

/// `α(λx + (1−λ)y) = 1` and `Tr = n` along the segment between two
/// elements of the set.
pub fn flatness_check(
    x: &BipartiteOperator,
    y: &BipartiteOperator,
    lambdas: &[f64],
    opts: &AlphaOptions,
) -> Result<FlatnessReport> {
    let n = x.n() as f64;
    let mut alphas = Vec::with_capacity(lambdas.len());
    let mut traces = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let z = &x.scale(l) + &y.scale(1.0 - l);
        alphas.push(norms::alpha_norm(&z, opts)?.value);
        traces.push(z.trace().re);
    }
    let flat = alphas.iter().all(|a| (a - 1.0).abs() <= UNIT_ALPHA_TOL) && traces.iter().all(|t| (t - n).abs() <= 1e-8);
    Ok(FlatnessReport { lambdas: lambdas.to_vec(), alphas, traces, flat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::make_p_tensor_I;

    fn mopts() -> MembershipOptions {
        MembershipOptions::default()
    }

    #[test]
    fn positivize_examples() {
        let w = make_swap(2);
        let wit = positivize_witness(&w, 2.5).unwrap();
        assert!((wit.min_eigenvalue - 0.25).abs() < 1e-12);
        assert!(positivize_witness(&w, 1.0).is_err());
        let p = BipartiteOperator::identity(2);
        let wit = positivize_witness(&p, 1.0).unwrap();
        assert!(wit.min_eigenvalue > 0.0);
        assert!(wit.separable.is_some());
        // gap preservation on the trace-n slice
        let (_, f) = make_max_entangled(2);
        let raw = w.trace_with(&w).re - w.trace_with(&f).re;
        let wit = positivize_witness(&w, 3.0).unwrap();
        let shifted = wit.a.trace_with(&w).re - wit.a.trace_with(&f).re;
        assert!((raw - shifted).abs() < 1e-10);
    }

    #[test]
    fn separable_form_of_p_tensor_identity() {
        let p = make_p_tensor_I(&linalg::projector(&basis_vector(3, 1))).unwrap();
        let form = detect_separable_form(&p).unwrap();
        assert!(form.reconstruct(3).max_abs_diff(&p) < 1e-10);
        assert!(form.lambda.iter().flatten().all(|&l| l >= 0.0));
        assert!(detect_separable_form(&positivize_witness(&make_swap(2), 3.0).unwrap().a).is_none());
    }

    #[test]
    fn sampled_points_are_in_d() {
        let m = mopts();
        for k in 0..12 {
            let s = sample_d_at(3, 5, k).unwrap();
            let r = positivity::membership(&s, &m);
            assert!(r.in_D, "sample {k}: {:?}", r.reasons);
        }
    }

    #[test]
    fn pure_samples_are_rotated_catalog_points() {
        let mut r = rng::stream(2, 0);
        let u = rng::haar_unitary(&mut r, 2);
        let cp = maps::canonical_map(&maps::MapKind::Kraus(vec![u.clone()])).unwrap();
        let rho = mixture_density(&[1.0, 0.0], &[cp, LinearMapRepr::transpose(2)]).unwrap();
        let (_, f) = make_max_entangled(2);
        let expect = f.conjugate_local(&u, &linalg::identity(2)).unwrap();
        assert!(rho.max_abs_diff(&expect) < 1e-12);
        let co = maps::canonical_map(&maps::MapKind::CoKraus(vec![u.clone()])).unwrap();
        let rho = mixture_density(&[0.0, 1.0], &[LinearMapRepr::identity(2), co]).unwrap();
        let spec = rho.spectrum();
        assert!(spec.eigenvalues.iter().all(|e| (e.abs() - 1.0).abs() < 1e-10));
        assert!((rho.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn swap_is_exposed_by_itself() {
        let rep = symmetry_exposure_check(&make_swap(2), 200, 7, &mopts()).unwrap();
        assert_eq!(rep.exposure.verdict, Verdict::Supported);
        assert!(rep.exposure.min_gap > 1e-6);
        assert!((rep.self_pairing - 4.0).abs() < 1e-12);
        assert!(rep.exposure.dominating_split_min >= -1e-10);
    }

    #[test]
    fn midpoint_is_refuted() {
        let (_, f) = make_max_entangled(2);
        let mid = (&make_swap(2) + &f).scale(0.5);
        let wit = positivize_witness(&mid, default_shift(&mid)).unwrap();
        let rep = check_exposure(&mid, &wit, 50, 7, &mopts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Refuted);
        let ce = rep.counterexample.unwrap();
        assert!(ce.membership.in_D);
        assert!(ce.distance > SAME_POINT_TOL);
        assert!(ce.sigma.trace_with(&wit.a).re >= rep.candidate_pairing - 1e-9);
    }

    #[test]
    fn witness_shift_does_not_change_verdict() {
        let w = make_swap(2);
        let reps: Vec<ExposureReport> = [2.5, 4.0, 10.0]
            .iter()
            .map(|&c| check_exposure(&w, &positivize_witness(&w, c).unwrap(), 60, 3, &mopts()).unwrap())
            .collect();
        for r in &reps[1..] {
            assert_eq!(r.verdict, reps[0].verdict);
            assert!((r.min_gap - reps[0].min_gap).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_exposure_rejects_identity() {
        let id = BipartiteOperator::identity(2);
        assert!(matches!(
            projection_exposure_check(&id, None, 10, 1, &mopts()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rotund_examples() {
        let opts = AlphaOptions::default();
        let (_, f) = make_max_entangled(2);
        let rep = rotund_test(&f, &[make_swap(2), f.scale(-1.0)], &DEFAULT_T_LADDER, &opts).unwrap();
        assert!(!rep.directions[0].rotund_along);
        assert!(rep.directions[1].rotund_along);
        assert!(!rep.rotund);
    }

    #[test]
    fn smoothness_examples() {
        let opts = AlphaOptions::default();
        let (_, f) = make_max_entangled(2);
        let rep = smooth_test(&f, &opts).unwrap();
        assert!(!rep.smooth && rep.clusters.len() > 1);
        let rep = smooth_test(&make_swap(2), &opts).unwrap();
        assert!(!rep.smooth);
    }

    #[test]
    fn section_rejects_parallel_span() {
        let w = make_swap(2);
        assert!(section_trace(&w, &w, 16, &AlphaOptions::default()).is_err());
    }

    #[test]
    fn scaling_examples() {
        let (_, f) = make_max_entangled(2);
        let small = f.scale(0.5);
        let rep = scale_dn(&small, ScaleDirection::Up, &mopts()).unwrap();
        assert!(rep.operator.max_abs_diff(&f) < 1e-12);
        assert!(rep.membership.in_D);
        assert!(rep.homogeneity_defect < 1e-6);
        assert!(rep.scaled_down_operator_norm <= 1.0 + 1e-8);
        let rep = scale_dn(&make_swap(2), ScaleDirection::Down, &mopts()).unwrap();
        assert!(rep.operator.max_abs_diff(&make_swap(2).scale(0.5)) < 1e-12);
        assert!(scale_dn(&make_swap(2), ScaleDirection::Up, &mopts()).is_err());
    }

    #[test]
    fn segment_in_d_is_flat() {
        let (_, f) = make_max_entangled(3);
        let rep = flatness_check(&make_swap(3), &f, &[0.1, 0.5, 0.9], &AlphaOptions::default()).unwrap();
        assert!(rep.flat, "{:?}", rep.alphas);
    }
}

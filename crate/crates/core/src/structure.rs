//! Catalog operators, projector analysis, low-dimensional structure
//! searches, decomposability and invariance checks.

use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::{schmidt_any, BipartiteOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, basis_vector, c64, ComplexMatrix, ComplexVector};
use crate::norms::{self, NormEstimate, PiOptions};
use crate::positivity::{self, MembershipOptions, MembershipReport, ProductVectorCertificate, SeeSawOptions};
use crate::rng;

/// The swap `W = Σ E_ij ⊗ E_ji`.
pub fn make_swap(n: usize) -> BipartiteOperator {
    let d = n * n;
    let m = ComplexMatrix::from_fn(d, d, |r, c| {
        let (i, k) = (r / n, r % n);
        let (j, l) = (c / n, c % n);
        if i == l && k == j {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    BipartiteOperator::new_unchecked(n, m)
}

/// `f = Σ e_i ⊗ e_i / √n` and `n|f><f|`.
pub fn make_max_entangled(n: usize) -> (ComplexVector, BipartiteOperator) {
    let s = 1.0 / (n as f64).sqrt();
    let f = ComplexVector::from_fn(n * n, |r, _| if r / n == r % n { c64(s, 0.0) } else { c64(0.0, 0.0) });
    let rho = BipartiteOperator::projector(&f).expect("square length").scale(n as f64);
    (f, rho)
}

/// `p ⊗ I` for a rank-one projector `p`.
#[allow(non_snake_case)]
pub fn make_p_tensor_I(p: &ComplexMatrix) -> Result<BipartiteOperator> {
    linalg::ensure_projector(p)?;
    let rank = linalg::trace(p).re;
    if (rank - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("projector has rank {rank:.3}, expected 1")));
    }
    BipartiteOperator::product(p, &linalg::identity(p.nrows()))
}

pub const SIMPLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct UPBReport {
    pub p: BipartiteOperator,
    pub max_product_overlap_complement: f64,
    pub complement_certificate: ProductVectorCertificate,
    pub product_free: bool,
    pub min_product_overlap_p: f64,
    pub p_certificate: ProductVectorCertificate,
    pub simple: bool,
}

/// Product overlaps of a projector `p` and of its complement `I − p`.
pub fn analyze_projector(p: &BipartiteOperator, opts: &SeeSawOptions) -> Result<UPBReport> {
    linalg::ensure_projector(p.matrix())?;
    let n = p.n();
    let p = p.hermitian_part();
    let complement = &BipartiteOperator::identity(n) - &p;
    let p_certificate = positivity::min_product_expectation(&p, opts)?;
    let mut complement_certificate = positivity::min_product_expectation(&complement.scale(-1.0), opts)?;
    complement_certificate.value = -complement_certificate.value;
    let max_c = complement_certificate.value;
    let min_p = p_certificate.value;
    Ok(UPBReport {
        p,
        max_product_overlap_complement: max_c,
        complement_certificate,
        product_free: max_c < 1.0 - SIMPLE_TOL,
        min_product_overlap_p: min_p,
        p_certificate,
        simple: min_p >= 0.5 - SIMPLE_TOL,
    })
}

/// `s = 2p − I` for a simple projector `p`; `s` is then block-positive.
pub fn bp_symmetry_from_projector(p: &BipartiteOperator, opts: &SeeSawOptions) -> Result<BipartiteOperator> {
    let report = analyze_projector(p, opts)?;
    if !report.simple {
        let c = report.p_certificate;
        return Err(Error::NotSimple {
            overlap: c.value,
            f: c.f.iter().copied().collect(),
            g: c.g.iter().copied().collect(),
        });
    }
    Ok(&report.p.scale(2.0) - &BipartiteOperator::identity(p.n()))
}

/// Spectral projectors of a symmetry: `s = p − q`.
fn symmetry_parts(s: &BipartiteOperator) -> (BipartiteOperator, BipartiteOperator) {
    let n = s.n();
    let id = BipartiteOperator::identity(n);
    let h = s.hermitian_part();
    ((&id + &h).scale(0.5), (&id - &h).scale(0.5))
}

fn symmetry_defect(s: &BipartiteOperator) -> f64 {
    s.mul_op(s).max_abs_diff(&BipartiteOperator::identity(s.n())).max(s.hermitian_defect())
}

#[derive(Debug, Clone, Serialize)]
pub struct Structure2dReport {
    pub trace_p: f64,
    pub trace_q: f64,
    #[serde(serialize_with = "crate::json::ser_vector")]
    pub h: ComplexVector,
    pub schmidt_coefficients: Vec<f64>,
    pub maximally_entangled: bool,
    pub tolerance: f64,
}

/// For a symmetry `s = p − q` in the set at `n = 2`: `Tr p = 3`, `Tr q = 1`,
/// and the vector spanning `q` has Schmidt coefficients `(1/√2, 1/√2)`.
pub fn symmetry_structure_2d(s: &BipartiteOperator, tol: f64, opts: &MembershipOptions) -> Result<Structure2dReport> {
    if s.n() != 2 {
        return Err(Error::Precondition("two-dimensional factors required".into()));
    }
    let d = symmetry_defect(s);
    if d > 1e-9 {
        return Err(Error::Precondition(format!("not a symmetry (defect {d:.3e})")));
    }
    let tr = s.trace().re;
    if (tr - 2.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("Tr s = {tr}, expected 2")));
    }
    let m = positivity::membership(s, opts);
    if !m.in_D {
        return Err(Error::Precondition(format!("symmetry is not in D: {}", m.reasons.join("; "))));
    }
    let (p, q) = symmetry_parts(s);
    let h = linalg::canonical_phase(&linalg::top_eigen(q.matrix()).1);
    let sch = schmidt_any(&h)?;
    let target = std::f64::consts::FRAC_1_SQRT_2;
    let maximally_entangled = sch.coefficients.iter().all(|c| (c - target).abs() <= tol);
    Ok(Structure2dReport {
        trace_p: p.trace().re,
        trace_q: q.trace().re,
        h,
        schmidt_coefficients: sch.coefficients,
        maximally_entangled,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub name: &'static str,
    pub w0: BipartiteOperator,
    pub sigma: BipartiteOperator,
    pub trace: f64,
    /// Whether `W₀²` is an orthogonal projector (partial symmetry).
    pub partial_symmetry: bool,
    pub membership: MembershipReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hybrid3dReport {
    pub chosen: &'static str,
    pub sigma: BipartiteOperator,
    pub variants: Vec<VariantReport>,
}

/// `P_{x₀} + W₀` at `n = 3` with `x₀ = (e₁⊗e₁ + e₂⊗e₁)/√2` and `W₀` acting
/// on `span{e₂, e₃} ⊗ span{e₂, e₃}`, in both readings of `W₀`:
/// `Σ E_ij ⊗ E_ij` and the swap-type `Σ E_ij ⊗ E_ji`. The swap-type
/// reading is preferred when both lie in the set.
pub fn hybrid_3d(opts: &MembershipOptions) -> Result<Hybrid3dReport> {
    let n = 3;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x0 = (linalg::kron_vec(&basis_vector(n, 0), &basis_vector(n, 0))
        + linalg::kron_vec(&basis_vector(n, 1), &basis_vector(n, 0)))
        * c64(s, 0.0);
    let px = BipartiteOperator::projector(&x0)?;
    let build = |swap_type: bool| {
        let mut m = ComplexMatrix::zeros(n * n, n * n);
        for i in 1..n {
            for j in 1..n {
                let b = if swap_type { linalg::matrix_unit(n, j, i) } else { linalg::matrix_unit(n, i, j) };
                m += linalg::kron(&linalg::matrix_unit(n, i, j), &b);
            }
        }
        BipartiteOperator::new_unchecked(n, m)
    };
    let mut variants = Vec::new();
    for (name, swap_type) in [("swap-type", true), ("as-printed", false)] {
        let w0 = build(swap_type);
        let sigma = &px + &w0;
        let partial_symmetry = linalg::projector_defect(w0.mul_op(&w0).matrix()) <= 1e-12;
        let membership = positivity::membership(&sigma, opts);
        variants.push(VariantReport { name, trace: sigma.trace().re, w0, sigma, partial_symmetry, membership });
    }
    let chosen = variants
        .iter()
        .find(|v| v.membership.in_D)
        .ok_or_else(|| Error::Precondition("neither reading of W₀ gives an element of D".into()))?;
    Ok(Hybrid3dReport { chosen: chosen.name, sigma: chosen.sigma.clone(), variants })
}

#[derive(Debug, Clone, Copy)]
pub struct DykstraOptions {
    pub max_iterations: usize,
    pub target_residual: f64,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        Self { max_iterations: 5000, target_residual: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionStatus {
    Found,
    NotFoundWithinBudget,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionWitness {
    pub a: BipartiteOperator,
    pub b: BipartiteOperator,
    pub residual: f64,
    pub iterations: usize,
    pub min_eigenvalue_a: f64,
    pub min_eigenvalue_pt_b: f64,
    pub status: DecompositionStatus,
    /// Which phase produced the split.
    pub method: &'static str,
    pub note: &'static str,
}

const PSD_SHORTCUT_TOL: f64 = 1e-12;
const DYKSTRA_PHASE: usize = 1000;
const FEASIBILITY_TOL: f64 = 1e-8;
const DECOMPOSITION_NOTE: &str = "not_found_within_budget does not prove that no decomposition exists";

fn finish(
    rho: &BipartiteOperator,
    a: BipartiteOperator,
    b: BipartiteOperator,
    iterations: usize,
    target: f64,
    method: &'static str,
) -> DecompositionWitness {
    let residual = (&(rho - &a) - &b).matrix().norm();
    let min_eigenvalue_a = a.min_eigenvalue();
    let min_eigenvalue_pt_b = b.partial_transpose().min_eigenvalue();
    let ok = residual <= target && min_eigenvalue_a >= -FEASIBILITY_TOL && min_eigenvalue_pt_b >= -FEASIBILITY_TOL;
    DecompositionWitness {
        a,
        b,
        residual,
        iterations,
        min_eigenvalue_a,
        min_eigenvalue_pt_b,
        status: if ok { DecompositionStatus::Found } else { DecompositionStatus::NotFoundWithinBudget },
        method,
        note: DECOMPOSITION_NOTE,
    }
}

type Best = (f64, ComplexMatrix, ComplexMatrix, usize, &'static str);

fn record(best: &mut Option<Best>, residual: f64, y: &ComplexMatrix, x: &ComplexMatrix, it: usize, method: &'static str) {
    if best.as_ref().is_none_or(|b| residual < b.0) {
        *best = Some((residual, y.clone(), x.clone(), it, method));
    }
}

/// Searches `ρ = A + B` with `A ⪰ 0` and `τ_p(B) ⪰ 0` by Dykstra's
/// alternating projections between `{A ⪰ 0}` and `{τ_p(ρ − A) ⪰ 0}`,
/// starting from `A = ρ/2`. When the two cones meet only in a thin set,
/// Dykstra slows to a crawl; after `DYKSTRA_PHASE` iterations the rest of
/// the budget goes to Douglas–Rachford on the same pair of sets.
pub fn decomposable_test(
    rho: &BipartiteOperator,
    budget: &DykstraOptions,
    membership_opts: Option<&MembershipOptions>,
) -> Result<DecompositionWitness> {
    if let Some(m) = membership_opts {
        let rep = positivity::membership(rho, m);
        if !rep.in_D {
            return Err(Error::Precondition(format!("input is not in D: {}", rep.reasons.join("; "))));
        }
    } else {
        rho.ensure_hermitian()?;
    }
    let n = rho.n();
    let rho = rho.hermitian_part();
    let zero = BipartiteOperator::zero(n);
    if rho.min_eigenvalue() >= -PSD_SHORTCUT_TOL {
        return Ok(finish(&rho, rho.clone(), zero, 0, budget.target_residual, "psd"));
    }
    let r = rho.partial_transpose();
    if r.min_eigenvalue() >= -PSD_SHORTCUT_TOL {
        return Ok(finish(&rho, zero, rho.clone(), 0, budget.target_residual, "partial-transpose-psd"));
    }
    let r = r.into_matrix();
    let pt = |m: &ComplexMatrix| BipartiteOperator::new_unchecked(n, m.clone()).partial_transpose().into_matrix();
    let proj_c1 = |m: &ComplexMatrix| linalg::clip_psd(&linalg::hermitian_part(m));
    let proj_c2 = |m: &ComplexMatrix| pt(&(&r - linalg::clip_psd(&(&r - pt(&linalg::hermitian_part(m))))));
    // A PSD iterate whose complement already passes is accepted as is.
    let exact = |y: &ComplexMatrix| {
        let b = rho.matrix() - y;
        (linalg::min_eigenvalue(&pt(&b)) >= -FEASIBILITY_TOL).then_some(b)
    };
    let accept = |y: ComplexMatrix, b: ComplexMatrix, it: usize, method| {
        let (a, b) = (BipartiteOperator::new_unchecked(n, y), BipartiteOperator::new_unchecked(n, b));
        finish(&rho, a, b, it, budget.target_residual, method)
    };

    let d = n * n;
    let mut best: Option<Best> = None;
    let mut x = rho.matrix() * c64(0.5, 0.0);
    let mut p = ComplexMatrix::zeros(d, d);
    let mut q = ComplexMatrix::zeros(d, d);
    let phase = budget.max_iterations.min(DYKSTRA_PHASE);
    for it in 1..=phase {
        let y = proj_c1(&(&x + &p));
        p = &x + &p - &y;
        if let Some(b) = exact(&y) {
            return Ok(accept(y, b, it, "dykstra"));
        }
        let x_new = proj_c2(&(&y + &q));
        q = &y + &q - &x_new;
        x = x_new;
        let residual = (&y - &x).norm();
        record(&mut best, residual, &y, &x, it, "dykstra");
        if residual <= budget.target_residual {
            break;
        }
    }
    if best.as_ref().is_some_and(|b| b.0 > budget.target_residual) {
        let mut z = x;
        for it in phase + 1..=budget.max_iterations {
            let y = proj_c1(&z);
            if let Some(b) = exact(&y) {
                return Ok(accept(y, b, it, "douglas-rachford"));
            }
            let x = proj_c2(&(&y * c64(2.0, 0.0) - &z));
            let residual = (&y - &x).norm();
            record(&mut best, residual, &y, &x, it, "douglas-rachford");
            if residual <= budget.target_residual {
                break;
            }
            z = &z + &x - &y;
        }
    }
    match best {
        Some((_, y, x, it, method)) => Ok(accept(y, rho.matrix() - x, it, method)),
        None => Ok(finish(&rho, rho.clone(), zero, 0, budget.target_residual, "none")),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrySearchReport {
    pub trials: usize,
    pub passed_trace: usize,
    pub passed_bp: usize,
    pub in_d: usize,
    pub max_schmidt_deviation: f64,
    /// Symmetries in the set whose `q` is not spanned by a maximally
    /// entangled vector; expected empty.
    pub counterexamples: Vec<BipartiteOperator>,
    pub seed: u64,
}

/// Orthonormal `rank`-frame from a random isometry.
fn random_frame(r: &mut rng::Stream, dim: usize, rank: usize) -> ComplexMatrix {
    if rank == 0 {
        ComplexMatrix::zeros(dim, 0)
    } else {
        rng::isometry(r, dim, rank)
    }
}

/// Vector with Schmidt angle `θ` in random local bases:
/// `(U ⊗ V)(cos θ e₀⊗e₀ + sin θ e₁⊗e₁)`.
fn schmidt_angle_vector(r: &mut rng::Stream, theta: f64) -> ComplexVector {
    let u = rng::haar_unitary(r, 2);
    let v = rng::haar_unitary(r, 2);
    let base = linalg::kron_vec(&basis_vector(2, 0), &basis_vector(2, 0)) * c64(theta.cos(), 0.0)
        + linalg::kron_vec(&basis_vector(2, 1), &basis_vector(2, 1)) * c64(theta.sin(), 0.0);
    linalg::kron(&u, &v) * base
}

enum Trial {
    Rejected { trace: bool, bp: bool },
    InD { deviation: f64, s: BipartiteOperator },
}

fn classify(s: BipartiteOperator, opts: &MembershipOptions) -> Trial {
    if (s.trace().re - 2.0).abs() > opts.tolerances.trace {
        return Trial::Rejected { trace: false, bp: false };
    }
    let bp = positivity::min_product_expectation(&s, &opts.seesaw).map(|c| c.value >= -opts.tolerances.bp);
    if !matches!(bp, Ok(true)) {
        return Trial::Rejected { trace: true, bp: false };
    }
    let alpha = norms::alpha_norm(&s, &opts.alpha).map(|e| e.value).unwrap_or(f64::INFINITY);
    if (alpha - 1.0).abs() > opts.tolerances.alpha {
        return Trial::Rejected { trace: true, bp: true };
    }
    let (_, q) = symmetry_parts(&s);
    let h = linalg::top_eigen(q.matrix()).1;
    let deviation = schmidt_any(&h)
        .map(|sch| {
            sch.coefficients
                .iter()
                .map(|c| (c - std::f64::consts::FRAC_1_SQRT_2).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    Trial::InD { deviation, s }
}

fn summarize(trials: usize, seed: u64, results: Vec<Trial>, tol: f64) -> SymmetrySearchReport {
    let mut rep = SymmetrySearchReport {
        trials,
        passed_trace: 0,
        passed_bp: 0,
        in_d: 0,
        max_schmidt_deviation: 0.0,
        counterexamples: vec![],
        seed,
    };
    for t in results {
        match t {
            Trial::Rejected { trace, bp } => {
                rep.passed_trace += trace as usize;
                rep.passed_bp += bp as usize;
            }
            Trial::InD { deviation, s } => {
                rep.passed_trace += 1;
                rep.passed_bp += 1;
                rep.in_d += 1;
                rep.max_schmidt_deviation = rep.max_schmidt_deviation.max(deviation);
                if deviation > tol {
                    rep.counterexamples.push(s);
                }
            }
        }
    }
    rep
}

/// Random search over symmetries `s = I − 2Q` at `n = 2` for members of the
/// set whose `Q` is not spanned by a maximally entangled vector. Trials
/// cycle through random-rank `Q`, random rank-one `Q`, near-maximally
/// entangled and exactly maximally entangled vectors.
pub fn symmetry_search_2d(trials: usize, seed: u64, tol: f64, opts: &MembershipOptions) -> SymmetrySearchReport {
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(rng::subseed(seed, 0x5332), k as u64);
            let q = match k % 4 {
                0 => {
                    let rank = (rng::uniform(&mut r) * 5.0) as usize % 5;
                    let v = random_frame(&mut r, 4, rank);
                    &v * v.adjoint()
                }
                1 => linalg::projector(&rng::unit_vector(&mut r, 4)),
                2 => {
                    let theta = std::f64::consts::FRAC_PI_4 + 1e-3 * rng::normal(&mut r);
                    linalg::projector(&schmidt_angle_vector(&mut r, theta))
                }
                _ => linalg::projector(&schmidt_angle_vector(&mut r, std::f64::consts::FRAC_PI_4)),
            };
            let s = BipartiteOperator::new_unchecked(2, linalg::identity(4) - q * c64(2.0, 0.0));
            classify(s, opts)
        })
        .collect();
    summarize(trials, seed, results, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ESymmetrySearchReport {
    pub trials: usize,
    pub passed_trace: usize,
    pub in_d: usize,
    /// Nontrivial (`q ≠ 0`, `e ≠ I`) e-symmetries found in the set;
    /// expected empty.
    pub found: Vec<BipartiteOperator>,
    pub seed: u64,
}

/// Random search over e-symmetries `p − q` with `q ≠ 0` and `p + q ≠ I` at
/// `n = 2`.
pub fn e_symmetry_search_2d(trials: usize, seed: u64, opts: &MembershipOptions) -> ESymmetrySearchReport {
    let results: Vec<Option<(bool, BipartiteOperator)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(rng::subseed(seed, 0x4553), k as u64);
            // rank(q) in 1..=3, rank(p) in 0..=3 − rank(q)
            let rq = 1 + (rng::uniform(&mut r) * 3.0) as usize % 3;
            let rp = (rng::uniform(&mut r) * (4 - rq) as f64) as usize % (4 - rq);
            let frame = rng::isometry(&mut r, 4, rp + rq);
            let mut m = ComplexMatrix::zeros(4, 4);
            for c in 0..rp + rq {
                let col = frame.column(c).into_owned();
                let sign = if c < rp { 1.0 } else { -1.0 };
                m += linalg::projector(&col) * c64(sign, 0.0);
            }
            let s = BipartiteOperator::new_unchecked(2, m);
            if (s.trace().re - 2.0).abs() > opts.tolerances.trace {
                return None;
            }
            let rep = positivity::membership(&s, opts);
            Some((rep.in_D, s))
        })
        .collect();
    let passed_trace = results.iter().filter(|r| r.is_some()).count();
    let found: Vec<BipartiteOperator> = results.into_iter().flatten().filter(|(d, _)| *d).map(|(_, s)| s).collect();
    ESymmetrySearchReport { trials, passed_trace, in_d: found.len(), found, seed }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformCheck {
    pub label: String,
    pub alpha: f64,
    pub bp_min: f64,
    pub pi: (f64, f64),
    pub alpha_ok: bool,
    pub bp_ok: bool,
    pub pi_ok: bool,
    pub flags_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub alpha: NormEstimate,
    pub bp_min: f64,
    pub pi: (f64, f64),
    pub flags: [bool; 6],
    pub checks: Vec<TransformCheck>,
    pub all_passed: bool,
    pub seed: u64,
}

pub const ALPHA_INVARIANCE_TOL: f64 = 2e-4;
pub const BP_INVARIANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct InvarianceOptions {
    pub membership: MembershipOptions,
    pub pi: PiOptions,
    /// Skips the π interval, which dominates the cost at `n ≥ 3`.
    pub skip_pi: bool,
}

fn flags(m: &MembershipReport) -> [bool; 6] {
    [m.hermitian, m.bp, m.in_B1plus, m.in_D0, m.in_D, m.in_Dplus]
}

/// Positions of the flags that the partial transpose preserves; PSD and
/// hence `in_Dplus` are not among them.
const PT_INVARIANT_FLAGS: [usize; 5] = [0, 1, 2, 3, 4];

/// Checks α, the bp minimum, the π interval and the membership flags
/// under `trials` random local unitary conjugations and the partial
/// transpose.
pub fn invariance_suite(sigma: &BipartiteOperator, seed: u64, trials: usize, opts: &InvarianceOptions) -> Result<InvarianceReport> {
    sigma.ensure_hermitian()?;
    let n = sigma.n();
    let sigma = sigma.hermitian_part();
    let evaluate = |s: &BipartiteOperator| -> Result<(NormEstimate, f64, (f64, f64), [bool; 6])> {
        let m = positivity::membership(s, &opts.membership);
        let alpha = m.alpha.clone().ok_or_else(|| Error::Precondition("α unavailable".into()))?;
        let bp = m.bp_certificate.as_ref().map(|c| c.value).unwrap_or(f64::NAN);
        let pi = if opts.skip_pi {
            (f64::NAN, f64::NAN)
        } else {
            let est = norms::pi_interval(s, &opts.pi)?;
            (est.lower, est.upper)
        };
        Ok((alpha, bp, pi, flags(&m)))
    };
    let (alpha, bp_min, pi, base_flags) = evaluate(&sigma)?;
    let mut transforms: Vec<(String, BipartiteOperator)> = Vec::with_capacity(trials + 1);
    for k in 0..trials {
        let mut r = rng::stream(rng::subseed(seed, 0x494e), k as u64);
        let u1 = rng::haar_unitary(&mut r, n);
        let u2 = rng::haar_unitary(&mut r, n);
        transforms.push((format!("local-unitary-{k}"), sigma.conjugate_local(&u1, &u2)?));
    }
    transforms.push(("partial-transpose".into(), sigma.partial_transpose()));
    let mut checks = Vec::with_capacity(transforms.len());
    for (label, s) in transforms {
        let (a, b, p, f) = evaluate(&s)?;
        let flags_ok = if label == "partial-transpose" {
            PT_INVARIANT_FLAGS.iter().all(|&k| f[k] == base_flags[k])
        } else {
            f == base_flags
        };
        let pi_ok = opts.skip_pi || (p.0 <= pi.1 + 1e-6 && pi.0 <= p.1 + 1e-6);
        checks.push(TransformCheck {
            label,
            alpha: a.value,
            bp_min: b,
            pi: p,
            alpha_ok: (a.value - alpha.value).abs() <= ALPHA_INVARIANCE_TOL,
            bp_ok: (b - bp_min).abs() <= BP_INVARIANCE_TOL,
            pi_ok,
            flags_ok,
        });
    }
    let all_passed = checks.iter().all(|c| c.alpha_ok && c.bp_ok && c.pi_ok && c.flags_ok);
    Ok(InvarianceReport { alpha, bp_min, pi, flags: base_flags, checks, all_passed, seed })
}

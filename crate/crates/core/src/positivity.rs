//! Block-positivity and membership in the sets of normalized densities.
//!
//! Block-positivity is decided one-sidedly: the see-saw finds product
//! vectors with small expectation, so a negative value is a proof of
//! non-positivity while a nonnegative minimum only means no violation
//! was found.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::BipartiteOperator;
use crate::error::Result;
use crate::linalg::{self, bottom_eigen, lex_cmp, ComplexVector};
use crate::norms::{self, AlphaOptions, NormEstimate};
use crate::rng;

#[derive(Debug, Clone)]
pub struct SeeSawOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SeeSawOptions {
    fn default() -> Self {
        Self { restarts: 64, max_iterations: 300, tolerance: 1e-12, seed: rng::DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductVectorCertificate {
    #[serde(serialize_with = "crate::json::ser_vector")]
    pub f: ComplexVector,
    #[serde(serialize_with = "crate::json::ser_vector")]
    pub g: ComplexVector,
    pub value: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl ProductVectorCertificate {
    pub fn reevaluate(&self, sigma: &BipartiteOperator) -> f64 {
        sigma.product_expectation(&self.f, &self.g)
    }

    pub fn product_vector(&self) -> ComplexVector {
        linalg::kron_vec(&self.f, &self.g)
    }
}

struct Run {
    f: ComplexVector,
    g: ComplexVector,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn see_saw(sigma: &BipartiteOperator, f0: ComplexVector, g0: ComplexVector, opts: &SeeSawOptions) -> Run {
    let mut f = f0;
    let mut g = g0;
    let mut value = sigma.product_expectation(&f, &g);
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=opts.max_iterations {
        iterations = it;
        f = bottom_eigen(&sigma.reduce_second(&g)).1;
        let (next, g_new) = bottom_eigen(&sigma.reduce_first(&f));
        g = g_new;
        let change = (value - next).abs();
        value = next;
        if change < opts.tolerance {
            converged = true;
            break;
        }
    }
    let f = linalg::canonical_phase(&f);
    let g = linalg::canonical_phase(&g);
    let value = sigma.product_expectation(&f, &g);
    Run { f, g, value, iterations, converged }
}

/// Smallest `<f⊗g|σ|f⊗g>` over unit `f, g` found by see-saw. The value is
/// an upper bound on the true minimum and is attained by the certificate.
pub fn min_product_expectation(sigma: &BipartiteOperator, opts: &SeeSawOptions) -> Result<ProductVectorCertificate> {
    sigma.ensure_hermitian()?;
    let sigma = sigma.hermitian_part();
    let n = sigma.n();
    let restarts = opts.restarts.max(1);
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(opts.seed, k as u64);
            let f0 = rng::unit_vector(&mut r, n);
            let g0 = rng::unit_vector(&mut r, n);
            see_saw(&sigma, f0, g0, opts)
        })
        .collect();
    let best = runs
        .iter()
        .min_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| lex_cmp(&a.f, &b.f))
                .then_with(|| lex_cmp(&a.g, &b.g))
        })
        .expect("at least one restart");
    Ok(ProductVectorCertificate {
        f: best.f.clone(),
        g: best.g.clone(),
        value: best.value,
        restarts,
        iterations: runs.iter().map(|r| r.iterations).sum(),
        converged: best.converged,
    })
}

/// `σ` passes when the see-saw minimum is `≥ −tol`.
pub fn is_block_positive(
    sigma: &BipartiteOperator,
    tol: f64,
    opts: &SeeSawOptions,
) -> Result<(bool, ProductVectorCertificate)> {
    let cert = min_product_expectation(sigma, opts)?;
    Ok((cert.value >= -tol, cert))
}

/// Positive and negative spectral parts; both are PSD, hence
/// block-positive, with `σ⁺ − σ⁻ = σ` and `σ⁺σ⁻ = 0`.
pub fn bp_jordan_split(sigma: &BipartiteOperator) -> (BipartiteOperator, BipartiteOperator) {
    let (p, m) = linalg::psd_parts(&linalg::hermitian_part(sigma.matrix()));
    let n = sigma.n();
    (BipartiteOperator::new_unchecked(n, p), BipartiteOperator::new_unchecked(n, m))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub psd: f64,
    pub bp: f64,
    pub alpha: f64,
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermitian: 1e-10, psd: 1e-8, bp: 1e-4, alpha: 1e-4, trace: 1e-8 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MembershipOptions {
    pub tolerances: Tolerances,
    pub alpha: AlphaOptions,
    pub seesaw: SeeSawOptions,
}

impl MembershipOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            tolerances: Tolerances::default(),
            alpha: AlphaOptions { seed, ..AlphaOptions::default() },
            seesaw: SeeSawOptions { seed, ..SeeSawOptions::default() },
        }
    }
}

pub const BP_EPISTEMIC_NOTE: &str =
    "bp = true means the see-saw found no product vector with negative expectation; it is not a proof";

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct MembershipReport {
    pub n: usize,
    pub hermitian: bool,
    pub hermitian_defect: f64,
    pub psd: bool,
    pub min_eigenvalue: Option<f64>,
    pub bp: bool,
    pub bp_certificate: Option<ProductVectorCertificate>,
    pub alpha: Option<NormEstimate>,
    pub trace: f64,
    pub in_B1plus: bool,
    pub in_D0: bool,
    pub in_D: bool,
    pub in_Dplus: bool,
    pub tolerances: Tolerances,
    pub reasons: Vec<String>,
    pub bp_status: &'static str,
}

/// Evaluates Hermiticity, PSD, block-positivity, α and trace, and the
/// derived set memberships. Never fails; problems go into `reasons`.
pub fn membership(sigma: &BipartiteOperator, opts: &MembershipOptions) -> MembershipReport {
    let tol = opts.tolerances;
    let n = sigma.n();
    let hermitian_defect = sigma.hermitian_defect();
    let hermitian = hermitian_defect <= tol.hermitian;
    let trace = sigma.trace().re;
    let mut reasons = Vec::new();
    let mut report = MembershipReport {
        n,
        hermitian,
        hermitian_defect,
        psd: false,
        min_eigenvalue: None,
        bp: false,
        bp_certificate: None,
        alpha: None,
        trace,
        in_B1plus: false,
        in_D0: false,
        in_D: false,
        in_Dplus: false,
        tolerances: tol,
        reasons: vec![],
        bp_status: BP_EPISTEMIC_NOTE,
    };
    if !hermitian {
        reasons.push(format!("not Hermitian (defect {hermitian_defect:.3e})"));
        report.reasons = reasons;
        return report;
    }
    let sigma = sigma.hermitian_part();
    let min_eig = sigma.min_eigenvalue();
    report.min_eigenvalue = Some(min_eig);
    report.psd = min_eig >= -tol.psd;

    match min_product_expectation(&sigma, &opts.seesaw) {
        Ok(cert) => {
            report.bp = cert.value >= -tol.bp;
            if !report.bp {
                reasons.push(format!("product vector with expectation {:.6e}", cert.value));
            }
            report.bp_certificate = Some(cert);
        }
        Err(e) => reasons.push(format!("see-saw failed: {e}")),
    }
    let alpha = match norms::alpha_norm(&sigma, &opts.alpha) {
        Ok(est) => Some(est),
        Err(e) => {
            reasons.push(format!("alpha failed: {e}"));
            None
        }
    };
    let a = alpha.as_ref().map(|e| e.value);
    report.alpha = alpha;

    if let Some(a) = a {
        report.in_B1plus = report.bp && a <= 1.0 + tol.alpha;
        report.in_D0 = report.bp && (a - 1.0).abs() <= tol.alpha;
        if (a - 1.0).abs() > tol.alpha {
            reasons.push(format!("alpha = {a:.6e} differs from 1"));
        }
    }
    let trace_ok = (trace - n as f64).abs() <= tol.trace;
    if !trace_ok {
        reasons.push(format!("trace = {trace:.6e} differs from n = {n}"));
    }
    report.in_D = report.in_D0 && trace_ok;
    report.in_Dplus = report.in_D && report.psd;
    if report.in_D && !report.psd {
        reasons.push(format!("not PSD (min eigenvalue {min_eig:.6e})"));
    }
    report.reasons = reasons;
    report
}

/// Orders certificates by value then lexicographically.
pub fn compare_certificates(a: &ProductVectorCertificate, b: &ProductVectorCertificate) -> Ordering {
    a.value.total_cmp(&b.value).then_with(|| lex_cmp(&a.f, &b.f)).then_with(|| lex_cmp(&a.g, &b.g))
}

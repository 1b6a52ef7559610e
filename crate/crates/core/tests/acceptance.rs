//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits nonzero if any failed.

use std::time::{Duration, Instant};

use bpnorm_core::bipartite::{schmidt_decompose, BipartiteOperator};
use bpnorm_core::exposed::{self, Verdict};
use bpnorm_core::linalg::{self, basis_vector};
use bpnorm_core::maps::{self, LinearMapRepr};
use bpnorm_core::norms::{self, AlphaOptions, LowerWitness, PiOptions};
use bpnorm_core::positivity::{self, MembershipOptions, SeeSawOptions};
use bpnorm_core::rng;
use bpnorm_core::structure::{self, make_max_entangled, make_p_tensor_I, make_swap, DecompositionStatus, DykstraOptions};
use rayon::prelude::*;

mod common;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: summary }
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Outcome { pass: false, detail: format!("{summary}; {} failure(s): {}", failures.len(), shown.join(" | ")) }
    }
}

fn p_tensor_identity(n: usize) -> BipartiteOperator {
    make_p_tensor_I(&linalg::projector(&basis_vector(n, 0))).unwrap()
}

fn witness_check(sigma: &BipartiteOperator, est: &norms::NormEstimate) -> f64 {
    match &est.witness {
        LowerWitness::Symmetry(w) => (w.evaluate(sigma) - est.value).abs().max(w.symmetry_defect()),
        _ => f64::INFINITY,
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let opts = AlphaOptions::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 2..=3 {
        let (_, rho) = make_max_entangled(n);
        for (name, s) in [("W", make_swap(n)), ("n|f><f|", rho.clone()), ("p⊗I", p_tensor_identity(n))] {
            let est = norms::alpha_norm(&s, &opts).unwrap();
            worst = worst.max((est.value - 1.0).abs());
            if (est.value - 1.0).abs() > 2e-4 {
                failures.push(format!("α({name}) = {} at n = {n}", est.value));
            }
            let wc = witness_check(&s, &est);
            if wc > 1e-9 {
                failures.push(format!("witness for {name} at n = {n} off by {wc:e}"));
            }
        }
        if make_swap(n).trace().re != n as f64 {
            failures.push(format!("Tr W ≠ {n}"));
        }
        let err = make_swap(n).partial_transpose().max_abs_diff(&rho);
        if err > 1e-12 {
            failures.push(format!("τ_p(W) − n|f><f| = {err:e} at n = {n}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        failures.push(format!("runtime {elapsed:?} exceeds 10 s"));
    }
    outcome(failures, format!("max |α − 1| = {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let opts = AlphaOptions::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let mut r = rng::stream(2002, k);
        let sigma = BipartiteOperator::new(2, rng::gue(&mut r, 4)).unwrap();
        let a = norms::alpha_norm(&sigma, &opts).unwrap().value;
        let b = common::brute_force_alpha_2x2(&sigma);
        worst = worst.max((a - b).abs());
        if (a - b).abs() > 1e-4 {
            failures.push(format!("instance {k}: α = {a}, brute force = {b}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("runtime {elapsed:?} exceeds 2 min"));
    }
    outcome(failures, format!("max |α − brute force| = {worst:.2e} over 50 operators"))
}

fn criterion_3() -> Outcome {
    let opts = PiOptions::default();
    let mut failures = Vec::new();
    let mut min_lower = f64::INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    for n in 2..=4 {
        let results: Vec<(f64, f64, usize)> = (0..200u64)
            .into_par_iter()
            .map(|k| {
                let f = rng::unit_vector(&mut rng::stream(3003 + n as u64, k), n * n);
                let u = BipartiteOperator::projector(&f).unwrap();
                let rank = schmidt_decompose(&f).unwrap().rank;
                let lower = norms::pi_lower(&u, &opts).unwrap().lower;
                let upper = norms::pi_upper(&u).upper;
                (lower, upper, rank)
            })
            .collect();
        for (k, (lower, upper, rank)) in results.into_iter().enumerate() {
            min_lower = min_lower.min(lower);
            max_excess = max_excess.max(upper - rank as f64);
            if lower < 1.0 - 1e-6 {
                failures.push(format!("n = {n}, vector {k}: π lower {lower}"));
            }
            if upper > rank as f64 + 1e-6 {
                failures.push(format!("n = {n}, vector {k}: π upper {upper} > N_s = {rank}"));
            }
        }
        let (f, _) = make_max_entangled(n);
        let est = norms::pi_interval(&BipartiteOperator::projector(&f).unwrap(), &opts).unwrap();
        if est.gap > 1e-6 || (est.value - n as f64).abs() > 1e-6 {
            failures.push(format!("maximally entangled n = {n}: [{}, {}]", est.lower, est.upper));
        }
    }
    outcome(failures, format!("min lower = {min_lower:.9}, max (upper − N_s) = {max_excess:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_residual: f64 = 0.0;
    for k in 0..100u64 {
        let n = 2 + (k % 3) as usize;
        let mut r = rng::stream(4004, k);
        let phi = LinearMapRepr::new(n, (0..n * n).map(|_| rng::ginibre(&mut r, n)).collect()).unwrap();
        let rho = maps::density_from_map(&phi);
        let back = maps::map_from_density(&rho);
        let residual = phi
            .images()
            .iter()
            .zip(back.images())
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max)
            .max(maps::pairing_residual(&phi, &rho).unwrap());
        worst_residual = worst_residual.max(residual);
        if residual > 1e-10 {
            failures.push(format!("map {k}: residual {residual:e}"));
        }
    }
    let a_opts = AlphaOptions::default();
    let s_opts = SeeSawOptions::default();
    let mut worst_alpha: f64 = 0.0;
    for k in 0..50u64 {
        let n = 2 + (k % 2) as usize;
        let rho = exposed::sample_d_at(n, 4005, k).unwrap();
        let phi = maps::map_from_density(&rho);
        let alpha = norms::alpha_norm(&rho, &a_opts).unwrap().value;
        worst_alpha = worst_alpha.max((alpha - 1.0).abs());
        if (alpha - 1.0).abs() > 2e-4 {
            failures.push(format!("unital map {k}: α = {alpha}"));
        }
        let unit_norm = linalg::operator_norm(&phi.unit_image());
        if (unit_norm - 1.0).abs() > 1e-12 {
            failures.push(format!("unital map {k}: ‖φ(I)‖ = {unit_norm}"));
        }
        match maps::unitality_equivalence(&phi, &a_opts, &s_opts) {
            Ok(Some(true)) => {}
            other => failures.push(format!("unital map {k}: equivalence check {other:?}")),
        }
    }
    outcome(
        failures,
        format!("max round-trip residual = {worst_residual:.2e}, max |α − 1| = {worst_alpha:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let opts = structure::InvarianceOptions::default();
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 2..=3usize {
        let mut operators = vec![
            ("W".to_string(), make_swap(n)),
            ("n|f><f|".to_string(), make_max_entangled(n).1),
            ("p⊗I".to_string(), p_tensor_identity(n)),
        ];
        for k in 0..10u64 {
            operators.push((format!("sample {k}"), exposed::sample_d_at(n, 5005, k).unwrap()));
        }
        for (name, s) in operators {
            let rep = structure::invariance_suite(&s, 55 + n as u64, 20, &opts).unwrap();
            cases += 1;
            for c in rep.checks.iter().filter(|c| !(c.alpha_ok && c.bp_ok && c.pi_ok && c.flags_ok)) {
                failures.push(format!(
                    "n = {n}, {name}, {}: α {} vs {}, bp {} vs {}, π {:?} vs {:?}, flags {}",
                    c.label, c.alpha, rep.alpha.value, c.bp_min, rep.bp_min, c.pi, rep.pi, c.flags_ok
                ));
            }
        }
    }
    outcome(failures, format!("{cases} operators × 21 transformations"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let m = MembershipOptions::default();
    let mut failures = Vec::new();
    let mut gaps = Vec::new();
    for n in 2..=3 {
        let rep = exposed::symmetry_exposure_check(&make_swap(n), 1000, 7, &m).unwrap();
        gaps.push(format!("W(n={n}) {:.3e}", rep.exposure.min_gap));
        if rep.exposure.verdict != Verdict::Supported || rep.exposure.min_gap <= 1e-6 {
            failures.push(format!("W at n = {n}: min gap {}", rep.exposure.min_gap));
        }
        if rep.exposure.samples + rep.exposure.skipped != 1000 {
            failures.push("sample count".into());
        }
        let p = p_tensor_identity(n);
        let rep = exposed::projection_exposure_check(&p, None, 1000, 7, &m).unwrap();
        gaps.push(format!("p⊗I(n={n}) {:.3e}", rep.min_gap));
        if rep.verdict != Verdict::Supported || rep.min_gap <= 1e-6 {
            failures.push(format!("p⊗I at n = {n}: min gap {}", rep.min_gap));
        }
    }
    let (_, f) = make_max_entangled(2);
    let mid = (&make_swap(2) + &f).scale(0.5);
    let wit = exposed::positivize_witness(&mid, exposed::default_shift(&mid)).unwrap();
    let rep = exposed::check_exposure(&mid, &wit, 1000, 7, &m).unwrap();
    match (&rep.verdict, &rep.counterexample) {
        (Verdict::Refuted, Some(ce)) => {
            let again = ce.sigma.trace_with(&wit.a).re;
            if !ce.membership.in_D || again < rep.candidate_pairing - 1e-9 || ce.distance <= 1e-8 {
                failures.push("midpoint counterexample does not re-verify".into());
            }
        }
        _ => failures.push("midpoint not refuted".into()),
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("runtime {elapsed:?} exceeds 5 min"));
    }
    outcome(failures, format!("min gaps: {}; midpoint refuted", gaps.join(", ")))
}

fn criterion_7() -> Outcome {
    let m = MembershipOptions::default();
    let mut failures = Vec::new();
    let sym = structure::symmetry_search_2d(10_000, 7, 1e-4, &m);
    if !sym.counterexamples.is_empty() {
        failures.push(format!("{} symmetries in D without a maximally entangled q", sym.counterexamples.len()));
    }
    if sym.in_d == 0 {
        failures.push("search never reached the set".into());
    }
    let esym = structure::e_symmetry_search_2d(10_000, 7, &m);
    if !esym.found.is_empty() {
        failures.push(format!("{} nontrivial e-symmetries in D", esym.found.len()));
    }
    outcome(
        failures,
        format!(
            "symmetries: {} trials, {} in D, max Schmidt deviation {:.2e}; e-symmetries: {} trials, {} pass trace",
            sym.trials, sym.in_d, sym.max_schmidt_deviation, esym.trials, esym.passed_trace
        ),
    )
}

fn criterion_8() -> Outcome {
    let s_opts = SeeSawOptions::default();
    let mut failures = Vec::new();
    let (f, _) = make_max_entangled(2);
    let psi = BipartiteOperator::projector(&f).unwrap();
    let p = &BipartiteOperator::identity(2) - &psi;
    let rep = structure::analyze_projector(&p, &s_opts).unwrap();
    if !rep.simple {
        failures.push(format!("I − |ψ><ψ| not simple ({})", rep.min_product_overlap_p));
    }
    let bp_min = match structure::bp_symmetry_from_projector(&p, &s_opts) {
        Ok(s) => positivity::min_product_expectation(&s, &s_opts).unwrap().value,
        Err(e) => {
            failures.push(format!("bp symmetry: {e}"));
            f64::NAN
        }
    };
    if !(bp_min >= -1e-6) {
        failures.push(format!("2p − I bp minimum {bp_min}"));
    }
    let rep = structure::analyze_projector(&psi, &s_opts).unwrap();
    let c = &rep.p_certificate;
    let reeval = c.reevaluate(&psi);
    if rep.simple || (reeval - c.value).abs() > 1e-10 || reeval >= 0.5 - 1e-6 {
        failures.push(format!("|ψ><ψ| simple = {}, witness value {reeval}", rep.simple));
    }
    outcome(failures, format!("bp min of 2p − I = {bp_min:.2e}; |ψ><ψ| witness overlap {reeval:.2e}"))
}

fn criterion_9() -> Outcome {
    let budget = DykstraOptions::default();
    let m = MembershipOptions::default();
    let results: Vec<(u64, structure::DecompositionWitness, bool)> = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let rho = exposed::sample_d_at(2, 9009, k).unwrap();
            let in_d = positivity::membership(&rho, &m).in_D;
            (k, structure::decomposable_test(&rho, &budget, None).unwrap(), in_d)
        })
        .collect();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut max_it = 0;
    for (k, w, in_d) in &results {
        worst = worst.max(w.residual);
        max_it = max_it.max(w.iterations);
        if !in_d {
            failures.push(format!("sample {k} not in D"));
        }
        if w.status != DecompositionStatus::Found || w.iterations > 5000 {
            failures.push(format!("sample {k}: residual {:e} after {} iterations", w.residual, w.iterations));
        }
    }
    outcome(failures, format!("max residual {worst:.2e}, max iterations {max_it}"))
}

fn criterion_10() -> Outcome {
    let opts = AlphaOptions::default();
    let mut failures = Vec::new();
    let lambdas: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let n = 2 + (k % 2) as usize;
        let x = exposed::sample_d_at(n, 10010, 2 * k).unwrap();
        let y = exposed::sample_d_at(n, 10010, 2 * k + 1).unwrap();
        let rep = exposed::flatness_check(&x, &y, &lambdas, &opts).unwrap();
        worst = rep.alphas.iter().map(|a| (a - 1.0).abs()).fold(worst, f64::max);
        if !rep.flat {
            failures.push(format!("pair {k}: α {:?}", rep.alphas));
        }
    }
    let (_, f) = make_max_entangled(2);
    let w = make_swap(2);
    let sec = exposed::section_trace(&w, &f, 720, &opts).unwrap();
    if !sec.corner {
        failures.push(format!("no corner at W: slopes {} / {}", sec.left_slope, sec.right_slope));
    }
    if sec.max_alpha_defect > 2e-4 {
        failures.push(format!("boundary defect {}", sec.max_alpha_defect));
    }
    let mid = (&w + &f).scale(0.5);
    let flat_side = exposed::section_trace(&mid, &w, 720, &opts).unwrap();
    if flat_side.corner {
        failures.push(format!(
            "corner at the midpoint: slopes {} / {}",
            flat_side.left_slope, flat_side.right_slope
        ));
    }
    outcome(
        failures,
        format!(
            "flatness max |α − 1| = {worst:.2e}; slopes at W {:.4} / {:.4}; at midpoint {:.4} / {:.4}",
            sec.left_slope, sec.right_slope, flat_side.left_slope, flat_side.right_slope
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("canonical values", criterion_1),
        ("α reduction vs brute force", criterion_2),
        ("rank-one π sandwich", criterion_3),
        ("map/density round trip and isometry", criterion_4),
        ("invariance suite", criterion_5),
        ("exposedness Monte-Carlo", criterion_6),
        ("2D structure searches", criterion_7),
        ("simple projectors and bp symmetries", criterion_8),
        ("decomposability at n = 2", criterion_9),
        ("flatness and section corner", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
            ),
        });
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} [{status}] {name} ({:.1?}): {}", start.elapsed(), result.detail);
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use bpnorm_core::exposed::{self, MONTE_CARLO_NOTE};
use bpnorm_core::linalg::{self, basis_vector};
use bpnorm_core::maps::{self, LinearMapRepr};
use bpnorm_core::norms::{self, PiOptions, PI_PINNED_GAP};
use bpnorm_core::positivity::{self, MembershipOptions, BP_EPISTEMIC_NOTE};
use bpnorm_core::rng;
use bpnorm_core::structure::{self, make_max_entangled, make_p_tensor_I, make_swap, DecompositionStatus, DykstraOptions};
use bpnorm_core::BipartiteOperator;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod io;

use io::{CliError, CliResult, Envelope};

const EXIT_VERDICT: u8 = 3;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "bpnorm", version, about = "Block-positivity, tensor norms and positive maps on M_n ⊗ M_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, default_value_t = rng::DEFAULT_SEED)]
    seed: u64,
    /// Expected local dimension; inputs of another size are rejected.
    #[arg(long)]
    n: Option<usize>,
    /// Restarts for the α ascent, the see-saw and the π search.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tol_alpha: Option<f64>,
    #[arg(long)]
    tol_bp: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Input {
    /// Operator or map JSON, or "-" for stdin.
    #[arg(long, default_value = "-")]
    input: String,
}

#[derive(Subcommand)]
enum Command {
    /// α norm with witness and certified upper bound.
    Alpha {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Interval for the π norm.
    Pi {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// See-saw block-positivity check.
    BpCheck {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Membership flags for the unit ball and the set D.
    Membership {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    MapToDensity {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    DensityToMap {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo test that a witness exposes a candidate point of D.
    ExposeCheck {
        #[arg(long)]
        candidate: String,
        /// Defaults to the candidate itself.
        #[arg(long)]
        witness: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Identity shift making the witness PSD; chosen automatically if absent.
        #[arg(long)]
        shift: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Difference quotients of α along random Hermitian directions.
    Rotund {
        #[command(flatten)]
        input: Input,
        /// Number of random directions.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Boundary of the α unit ball in the plane of two operators.
    Section {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        partner: String,
        #[arg(long, default_value_t = 720)]
        resolution: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Named operators and maps.
    Catalog {
        #[arg(long, value_enum)]
        name: CatalogName,
        #[command(flatten)]
        common: Common,
    },
    /// Searches ρ = A + B with A ⪰ 0 and τ_p(B) ⪰ 0.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DykstraOptions::default().max_iterations)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// α, bp minimum, π and flags under local unitaries and τ_p.
    InvarianceSuite {
        #[command(flatten)]
        input: Input,
        /// Number of random local unitary conjugations.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        skip_pi: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded element of D drawn from mixtures of unital CP and co-CP maps.
    SampleD {
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogName {
    Swap,
    MaxEntangled,
    MaxEntangledProjector,
    PTensorIdentity,
    Midpoint,
    Identity,
    Zero,
    IdentityMap,
    TransposeMap,
}

impl Common {
    fn membership(&self) -> CliResult<MembershipOptions> {
        let mut m = MembershipOptions::with_seed(self.seed);
        for (name, value, slot) in
            [("--tol-alpha", self.tol_alpha, &mut m.tolerances.alpha), ("--tol-bp", self.tol_bp, &mut m.tolerances.bp)]
        {
            if let Some(t) = value {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(CliError::Usage(format!("{name} must be a nonnegative number, got {t}")));
                }
                *slot = t;
            }
        }
        if let Some(r) = self.restarts()? {
            m.alpha.restarts = r;
            m.seesaw.restarts = r;
        }
        Ok(m)
    }

    fn restarts(&self) -> CliResult<Option<usize>> {
        match self.restarts {
            Some(0) => Err(CliError::Usage("--restarts must be at least 1".into())),
            r => Ok(r),
        }
    }

    fn pi(&self) -> CliResult<PiOptions> {
        let mut p = PiOptions { seed: self.seed, ..PiOptions::default() };
        if let Some(r) = self.restarts()? {
            p.restarts = r;
        }
        Ok(p)
    }

    fn local_dim(&self) -> CliResult<usize> {
        match self.n.unwrap_or(2) {
            n if n >= 2 => Ok(n),
            n => Err(CliError::Usage(format!("--n must be at least 2, got {n}"))),
        }
    }
}

/// Report text and whether the queried property failed.
struct Outcome {
    text: String,
    verdict_failed: bool,
}

fn report<T: Serialize>(name: &str, common: &Common, m: &MembershipOptions, status: &str, note: Option<&'static str>, result: T) -> CliResult<String> {
    let mut env = Envelope::new(name, common.seed, m.tolerances, status, result);
    if let Some(n) = note {
        env = env.with_note(n);
    }
    env.render()
}

#[derive(Serialize)]
struct BpResult {
    block_positive: bool,
    tolerance: f64,
    certificate: positivity::ProductVectorCertificate,
}

#[derive(Serialize)]
struct DensityResult {
    density: BipartiteOperator,
    pairing_residual: f64,
}

#[derive(Serialize)]
struct MapResult {
    map: LinearMapRepr,
    pairing_residual: f64,
}

#[derive(Serialize)]
struct ExposeResult {
    shift: f64,
    report: exposed::ExposureReport,
}

#[derive(Serialize)]
struct CatalogOperator {
    name: &'static str,
    operator: BipartiteOperator,
}

#[derive(Serialize)]
struct CatalogMap {
    name: &'static str,
    map: LinearMapRepr,
}

#[derive(Serialize)]
struct SampleResult {
    index: u64,
    operator: BipartiteOperator,
}

fn catalog_name(name: CatalogName) -> &'static str {
    match name {
        CatalogName::Swap => "swap",
        CatalogName::MaxEntangled => "max-entangled",
        CatalogName::MaxEntangledProjector => "max-entangled-projector",
        CatalogName::PTensorIdentity => "p-tensor-identity",
        CatalogName::Midpoint => "midpoint",
        CatalogName::Identity => "identity",
        CatalogName::Zero => "zero",
        CatalogName::IdentityMap => "identity-map",
        CatalogName::TransposeMap => "transpose-map",
    }
}

fn run(command: Command) -> CliResult<(Outcome, Option<PathBuf>)> {
    let ok = |text| Outcome { text, verdict_failed: false };
    let (outcome, common) = match command {
        Command::Alpha { input, common } => {
            let m = common.membership()?;
            let sigma = io::load_operator(&input.input, common.n)?;
            let est = norms::alpha_norm(&sigma, &m.alpha)?;
            (ok(report("alpha", &common, &m, "ok", None, est)?), common)
        }
        Command::Pi { input, common } => {
            let m = common.membership()?;
            let u = io::load_operator(&input.input, common.n)?;
            let est = norms::pi_interval(&u, &common.pi()?)?;
            let status = if est.gap <= PI_PINNED_GAP { "pinned" } else { "interval" };
            (ok(report("pi", &common, &m, status, None, est)?), common)
        }
        Command::BpCheck { input, common } => {
            let m = common.membership()?;
            let sigma = io::load_operator(&input.input, common.n)?;
            let (bp, certificate) = positivity::is_block_positive(&sigma, m.tolerances.bp, &m.seesaw)?;
            let status = if bp { "block-positive" } else { "not-block-positive" };
            let result = BpResult { block_positive: bp, tolerance: m.tolerances.bp, certificate };
            let text = report("bp-check", &common, &m, status, Some(BP_EPISTEMIC_NOTE), result)?;
            (Outcome { text, verdict_failed: !bp }, common)
        }
        Command::Membership { input, common } => {
            let m = common.membership()?;
            let sigma = io::load_operator(&input.input, common.n)?;
            let rep = positivity::membership(&sigma, &m);
            let in_d = rep.in_D;
            let text = report("membership", &common, &m, if in_d { "in-D" } else { "not-in-D" }, None, rep)?;
            (Outcome { text, verdict_failed: !in_d }, common)
        }
        Command::MapToDensity { input, common } => {
            let m = common.membership()?;
            let phi = io::load_map(&input.input, common.n)?;
            let pair = maps::map_density_pair(&phi);
            let result = DensityResult { density: pair.density, pairing_residual: pair.pairing_residual };
            (ok(report("map-to-density", &common, &m, "ok", None, result)?), common)
        }
        Command::DensityToMap { input, common } => {
            let m = common.membership()?;
            let rho = io::load_density(&input.input, common.n)?;
            let map = maps::map_from_density(&rho);
            let pairing_residual = maps::pairing_residual(&map, &rho)?;
            (ok(report("density-to-map", &common, &m, "ok", None, MapResult { map, pairing_residual })?), common)
        }
        Command::ExposeCheck { candidate, witness, samples, shift, common } => {
            let m = common.membership()?;
            let rho0 = io::load_operator(&candidate, common.n)?;
            let a = match &witness {
                Some(w) => io::load_operator(w, Some(rho0.n()))?,
                None => rho0.clone(),
            };
            let shift = match shift {
                Some(c) => c,
                None if a.min_eigenvalue() >= -exposed::WITNESS_PSD_TOL => 0.0,
                None => exposed::default_shift(&a),
            };
            let wit = exposed::positivize_witness(&a, shift)?;
            let rep = exposed::check_exposure(&rho0, &wit, samples, common.seed, &m)?;
            let refuted = rep.verdict == exposed::Verdict::Refuted;
            let status = if refuted { "refuted" } else { "supported" };
            let text = report("expose-check", &common, &m, status, Some(MONTE_CARLO_NOTE), ExposeResult { shift, report: rep })?;
            (Outcome { text, verdict_failed: refuted }, common)
        }
        Command::Rotund { input, samples, common } => {
            let m = common.membership()?;
            let x = io::load_operator(&input.input, common.n)?;
            let n = x.n();
            let dirs: Vec<BipartiteOperator> = (0..samples as u64)
                .map(|k| {
                    let h = rng::gue(&mut rng::stream(rng::subseed(common.seed, 0x52), k), n * n);
                    let h = BipartiteOperator::new(n, h).expect("square");
                    let norm = linalg::frobenius(h.matrix());
                    h.scale(1.0 / norm)
                })
                .collect();
            let rep = exposed::rotund_test(&x, &dirs, &exposed::DEFAULT_T_LADDER, &m.alpha)?;
            let rotund = rep.rotund;
            let text = report("rotund", &common, &m, if rotund { "rotund" } else { "not-rotund" }, Some(MONTE_CARLO_NOTE), rep)?;
            (Outcome { text, verdict_failed: !rotund }, common)
        }
        Command::Section { input, partner, resolution, format, common } => {
            let m = common.membership()?;
            let x = io::load_operator(&input.input, common.n)?;
            let y = io::load_operator(&partner, Some(x.n()))?;
            let rep = exposed::section_trace(&x, &y, resolution, &m.alpha)?;
            let text = match format {
                Format::Csv => rep.to_csv(),
                Format::Json => {
                    let status = if rep.corner { "corner" } else { "no-corner" };
                    report("section", &common, &m, status, None, rep)?
                }
            };
            (ok(text), common)
        }
        Command::Catalog { name, common } => {
            let m = common.membership()?;
            let n = common.local_dim()?;
            let label = catalog_name(name);
            let operator = match name {
                CatalogName::Swap => make_swap(n),
                CatalogName::MaxEntangled => make_max_entangled(n).1,
                CatalogName::MaxEntangledProjector => BipartiteOperator::projector(&make_max_entangled(n).0)?,
                CatalogName::PTensorIdentity => make_p_tensor_I(&linalg::projector(&basis_vector(n, 0)))?,
                CatalogName::Midpoint => (&make_swap(n) + &make_max_entangled(n).1).scale(0.5),
                CatalogName::Identity => BipartiteOperator::identity(n),
                CatalogName::Zero => BipartiteOperator::zero(n),
                CatalogName::IdentityMap | CatalogName::TransposeMap => {
                    let map = match name {
                        CatalogName::IdentityMap => LinearMapRepr::identity(n),
                        _ => LinearMapRepr::transpose(n),
                    };
                    let text = report("catalog", &common, &m, "ok", None, CatalogMap { name: label, map })?;
                    return Ok((ok(text), common.output));
                }
            };
            (ok(report("catalog", &common, &m, "ok", None, CatalogOperator { name: label, operator })?), common)
        }
        Command::Decompose { input, budget, common } => {
            let m = common.membership()?;
            let rho = io::load_operator(&input.input, common.n)?;
            let opts = DykstraOptions { max_iterations: budget, ..DykstraOptions::default() };
            let w = structure::decomposable_test(&rho, &opts, None)?;
            let found = w.status == DecompositionStatus::Found;
            let status = if found { "found" } else { "not-found-within-budget" };
            (Outcome { text: report("decompose", &common, &m, status, None, w)?, verdict_failed: !found }, common)
        }
        Command::InvarianceSuite { input, samples, skip_pi, common } => {
            let m = common.membership()?;
            let sigma = io::load_operator(&input.input, common.n)?;
            let opts = structure::InvarianceOptions { membership: m.clone(), pi: common.pi()?, skip_pi };
            let rep = structure::invariance_suite(&sigma, common.seed, samples, &opts)?;
            let passed = rep.all_passed;
            let text = report("invariance-suite", &common, &m, if passed { "passed" } else { "failed" }, None, rep)?;
            (Outcome { text, verdict_failed: !passed }, common)
        }
        Command::SampleD { index, common } => {
            let m = common.membership()?;
            let operator = exposed::sample_d_at(common.local_dim()?, common.seed, index)?;
            let text = report("sample-d", &common, &m, "ok", Some(exposed::COVERAGE_NOTE), SampleResult { index, operator })?;
            (ok(text), common)
        }
    };
    Ok((outcome, common.output))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|(outcome, output)| {
        io::write_output(output.as_deref(), &outcome.text)?;
        Ok(outcome.verdict_failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_VERDICT),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

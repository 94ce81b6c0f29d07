//! Command-line front end: parse polynomials, compute commutator-degrees,
//! run the brute-force identity oracle, evaluate witnesses, solve preimages
//! and certify images. Output is deterministic: the same invocation
//! (including `--seed`) produces byte-identical bytes.
//!
//! Exit codes: 0 success, 1 domain error (bad polynomial, target outside the
//! image, …), 2 usage error, 3 internal verification failure.

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use utimage::degree::{
    BRUTEFORCE_BUDGET, DegreeReport, Profile, bruteforce_evaluations, commutator_degree,
    is_identity_bruteforce, witness_evaluation,
};
use utimage::solver::{
    DEFAULT_MAX_RETRIES, ImageCertificationReport, PreimageCertificate, certify_image,
    solve_preimage,
};
use utimage::triangular::evaluate;
use utimage::{Error, Matrix, Poly, Rat};

#[derive(Parser)]
#[command(
    name = "utimage",
    version,
    about = "Commutator-degree, identity testing and exact preimages for multilinear polynomials on upper triangular matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
#[command(group(ArgGroup::new("poly_source").required(true).args(["poly", "poly_file"])))]
struct PolySource {
    /// Polynomial text, e.g. "[x1,x2]*[x3,x4]"; use '-' to read stdin.
    poly: Option<String>,
    /// Read the polynomial text from a file instead.
    #[arg(long, value_name = "PATH")]
    poly_file: Option<PathBuf>,
}

impl PolySource {
    fn load(&self) -> Result<Poly, Failure> {
        let text = match (&self.poly, &self.poly_file) {
            (Some(text), None) if text == "-" => {
                let mut buffer = String::new();
                std::io::stdin()
                    .read_to_string(&mut buffer)
                    .map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
                buffer
            }
            (Some(text), None) => text.clone(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?,
            _ => unreachable!("clap enforces exactly one polynomial source"),
        };
        utimage::freealg::parse(text.trim()).map_err(Failure::from)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a polynomial and print its canonical form.
    Parse {
        #[command(flatten)]
        source: PolySource,
    },
    /// Compute the commutator-degree, a witness profile and its beta.
    Degree {
        #[command(flatten)]
        source: PolySource,
    },
    /// Decide membership in the identities of UT_n by exhaustive
    /// matrix-unit substitution.
    Identity {
        #[command(flatten)]
        source: PolySource,
        /// Matrix size n.
        #[arg(long)]
        n: usize,
        /// Run even when the substitution count exceeds the budget.
        #[arg(long)]
        force: bool,
    },
    /// Evaluate the witness substitution; the result is beta * E(1, r+1).
    Witness {
        #[command(flatten)]
        source: PolySource,
    },
    /// Solve f(c1, …, cm) = target exactly over UT_n.
    #[command(group(ArgGroup::new("target_source").required(true).args(["target", "target_file"])))]
    Preimage {
        #[command(flatten)]
        source: PolySource,
        /// Matrix size n.
        #[arg(long)]
        n: usize,
        /// Target matrix as JSON: {"n": 2, "entries": [[1, 2, "1"]]}.
        #[arg(long, value_name = "JSON")]
        target: Option<String>,
        /// Read the target matrix JSON from a file instead.
        #[arg(long, value_name = "PATH")]
        target_file: Option<PathBuf>,
        /// RNG seed for the generic assignment.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling rounds before giving up on a usable delta table.
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: u32,
    },
    /// Certify that the image on UT_n is exactly J^r: random containment
    /// samples plus exact preimages of J^r basis units and random elements.
    Certify {
        #[command(flatten)]
        source: PolySource,
        /// Matrix size n.
        #[arg(long)]
        n: usize,
        /// Random samples per direction.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Domain(Error),
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        match error {
            Error::InternalVerificationFailure(message) => Failure::Internal(message),
            other => Failure::Domain(other),
        }
    }
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Domain(error) => {
                eprintln!("error: {error}");
                if matches!(error, Error::CostLimit { .. }) {
                    eprintln!("hint: pass --force to run anyway");
                }
                ExitCode::from(1)
            }
            Failure::Usage(message) => {
                eprintln!("error: {message}");
                ExitCode::from(2)
            }
            Failure::Internal(message) => {
                eprintln!("internal verification failure: {message}");
                ExitCode::from(3)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(failure) => failure.report(),
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Parse { source } => {
            let poly = source.load()?;
            match cli.format {
                Format::Text => Ok(poly.to_string()),
                Format::Json => to_json(&serde_json::json!({
                    "canonical": poly.to_string(),
                    "arity": poly.arity(),
                    "terms": poly.num_terms(),
                })),
            }
        }
        Command::Degree { source } => {
            let poly = source.load()?;
            let report = commutator_degree(&poly)?;
            match cli.format {
                Format::Text => Ok(degree_text(&report)),
                Format::Json => to_json(&report),
            }
        }
        Command::Identity { source, n, force } => {
            require_positive_n(*n)?;
            let poly = source.load()?;
            let evaluations = bruteforce_evaluations(poly.arity(), *n);
            if evaluations > BRUTEFORCE_BUDGET && !force {
                return Err(Failure::Domain(Error::CostLimit {
                    evaluations,
                    budget: BRUTEFORCE_BUDGET,
                }));
            }
            let identity = is_identity_bruteforce(&poly, *n);
            match cli.format {
                Format::Text => Ok(format!(
                    "identity on UT_{n}: {identity} ({evaluations} substitutions)"
                )),
                Format::Json => to_json(&serde_json::json!({
                    "n": n,
                    "identity": identity,
                    "substitutions": evaluations.to_string(),
                })),
            }
        }
        Command::Witness { source } => {
            let poly = source.load()?;
            let report = commutator_degree(&poly)?;
            let witness = match &report.witness {
                Some(witness) => witness.clone(),
                None => {
                    return Err(Failure::Domain(Error::InvalidProfile(
                        "the polynomial has degree 0; no witness substitution exists".into(),
                    )));
                }
            };
            let matrices = witness_evaluation::<Rat>(&witness)?;
            let evaluation = evaluate(&poly, &matrices)?;
            let expected = Matrix::unit(report.degree + 1, 1, report.degree + 1)?
                .scale(&report.beta);
            if evaluation != expected {
                return Err(Failure::Internal(format!(
                    "witness evaluation {evaluation} does not match beta * E(1,{})",
                    report.degree + 1
                )));
            }
            match cli.format {
                Format::Text => {
                    let mut out = degree_text(&report);
                    for (index, matrix) in matrices.iter().enumerate() {
                        let _ = write!(out, "\nx{} -> {matrix}", index + 1);
                    }
                    let _ = write!(
                        out,
                        "\nevaluation: {evaluation} = beta * E(1,{})",
                        report.degree + 1
                    );
                    Ok(out)
                }
                Format::Json => to_json(&WitnessOutput {
                    degree: report.degree,
                    witness,
                    beta: report.beta.to_string(),
                    matrices,
                    evaluation,
                    expected,
                }),
            }
        }
        Command::Preimage {
            source,
            n,
            target,
            target_file,
            seed,
            max_retries,
        } => {
            require_positive_n(*n)?;
            let poly = source.load()?;
            let text = match (target, target_file) {
                (Some(text), None) => text.clone(),
                (None, Some(path)) => std::fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?,
                _ => unreachable!("clap enforces exactly one target source"),
            };
            let target: Matrix = serde_json::from_str(&text)
                .map_err(|e| Failure::Domain(Error::InvalidMatrix(e.to_string())))?;
            if target.size() != *n {
                return Err(Failure::Domain(Error::SizeMismatch {
                    expected: *n,
                    found: target.size(),
                }));
            }
            let certificate = solve_preimage(&poly, &target, *seed, *max_retries)?;
            match cli.format {
                Format::Text => Ok(preimage_text(&certificate)),
                Format::Json => to_json(&certificate),
            }
        }
        Command::Certify {
            source,
            n,
            samples,
            seed,
        } => {
            require_positive_n(*n)?;
            let poly = source.load()?;
            let report = certify_image(&poly, *n, *samples, *seed)?;
            let output = match cli.format {
                Format::Text => certify_text(&report),
                Format::Json => to_json(&report)?,
            };
            if !report.passed {
                // A failed certification contradicts the degree computation.
                println!("{output}");
                return Err(Failure::Internal(
                    "image certification failed; see the report above".into(),
                ));
            }
            Ok(output)
        }
    }
}

#[derive(Serialize)]
struct WitnessOutput {
    degree: usize,
    witness: Profile,
    beta: String,
    matrices: Vec<Matrix>,
    evaluation: Matrix,
    expected: Matrix,
}

fn require_positive_n(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Internal(format!("serialization failed: {e}")))
}

fn profile_text(profile: &Profile) -> String {
    let blocks: Vec<String> = profile
        .blocks()
        .iter()
        .map(|block| {
            let inner: Vec<String> = block.iter().map(usize::to_string).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect();
    let anchors: Vec<String> = profile.anchors().iter().map(usize::to_string).collect();
    format!(
        "k={} T=[{}] t=[{}]",
        profile.k(),
        blocks.join(", "),
        anchors.join(", ")
    )
}

fn degree_text(report: &DegreeReport<Rat>) -> String {
    let witness = match &report.witness {
        Some(profile) => profile_text(profile),
        None => "none (degree 0)".into(),
    };
    format!(
        "degree: {}\nbeta: {}\nwitness: {}\nprofiles checked: {}",
        report.degree, report.beta, witness, report.profiles_checked
    )
}

fn preimage_text(certificate: &PreimageCertificate<Rat>) -> String {
    let mut out = format!(
        "verified: {}\ndegree: {}\nseed: {}\nretries: {}",
        certificate.verified, certificate.degree, certificate.seed, certificate.retries
    );
    if let Some(witness) = &certificate.witness {
        let _ = write!(out, "\nwitness: {}", profile_text(witness));
    }
    for (index, matrix) in certificate.matrices.iter().enumerate() {
        let _ = write!(out, "\nx{} -> {matrix}", index + 1);
    }
    let _ = write!(out, "\ntarget: {}", certificate.target);
    out
}

fn certify_text(report: &ImageCertificationReport) -> String {
    format!(
        "degree: {}\nimage: J^{} in UT_{}\nevaluations in J^r: {}/{}\nunit preimages: {}/{}\nrandom preimages: {}/{}\npassed: {}",
        report.degree,
        report.degree,
        report.n,
        report.evaluations_in_radical,
        report.evaluations_checked,
        report.unit_preimages,
        report.unit_targets,
        report.random_preimages,
        report.random_targets,
        report.passed
    )
}

//! The `modal-lab` command-line front end.
//!
//! [`run`] parses the arguments, runs one subcommand and returns the exit
//! code, writing to the given streams:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | certification or check failure |
//! | 2 | I/O error |
//! | 3 | the identification function has no root on the original density |
//! | 4 | a functional has no unique value |
//! | 64 | invalid usage or configuration |

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complexity::{
    certify_with, claims_check, gaussian_scenario, lemma1_witness, modal_displacement,
    CertifyOptions, Lemma1Outcome,
};
use crate::config::{self, ExperimentSpec};
use crate::elicitation::{
    bayes_act, variance_link_demo, FnIdentification, Identification, ModalLoss,
    PolynomialIdentification, SquaredLoss,
};
use crate::error::{Error, Result};
use crate::mixtures::{Family, MixtureDensity, UNIQUENESS_TOL};
use crate::simulation::{reference_table, run_experiment, write_table_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NO_ROOT: i32 = 3;
pub const EXIT_NON_UNIQUE: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Tolerance of the variance demo.
const VARIANCE_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "modal-lab",
    version,
    about = "Mode and modal-midpoint experiments, counterexample certificates and demos"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo study of the empirical modal midpoint; writes CSV.
    Table1(Table1Args),
    /// Certify two densities with a common identification root and
    /// different modes.
    Counterexample(CounterexampleArgs),
    /// Mode of a density.
    Mode(DensityArgs),
    /// Modal midpoint of a density.
    ModalMidpoint(ModalArgs),
    /// Bayes act of the modal loss (with --eps) or the squared loss.
    BayesAct(BayesArgs),
    /// Run the two-bump argument against scalar identification functions.
    DemoLemma1(Lemma1Args),
    /// Recover variances through mean and second moment.
    DemoVariance(VarianceArgs),
    /// Check the neighbour-leakage bounds on random unit-height Gaussian
    /// mixtures.
    ClaimsCheck(ClaimsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Bump,
    Gaussian,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bump => Family::Bump,
            FamilyArg::Gaussian => Family::Gaussian,
        }
    }
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Experiment file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated half-widths.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Identification function file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "bump")]
    pub family: FamilyArg,
    /// Index of the last component; defaults to the smallest admissible.
    #[arg(long)]
    pub t: Option<usize>,
    /// Bump half-width.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eps: f64,
    /// Certificate destination (JSON); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated starting report for the root search.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub guess: Option<Vec<f64>>,
    /// Also report modal midpoints of half-width this value.
    #[arg(long)]
    pub modal_eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Density file (TOML); the benchmark mixture when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Lemma1Args {
    /// Scalar identification function file (TOML); built-in examples when
    /// absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Density file (TOML); random Gaussian mixtures when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct ClaimsArgs {
    #[arg(long, default_value_t = 6)]
    pub t: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Config(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::NoRoot(_) => EXIT_NO_ROOT,
        Error::NonUnique { .. } => EXIT_NON_UNIQUE,
        Error::Contract(_) | Error::Numeric(_) | Error::Certification(_) | Error::Internal(_) => {
            EXIT_FAILURE
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Table1(a) => cmd_table1(a, out, err),
        Command::Counterexample(a) => cmd_counterexample(a, out, err),
        Command::Mode(a) => cmd_mode(a, out),
        Command::ModalMidpoint(a) => cmd_modal_midpoint(a, out),
        Command::BayesAct(a) => cmd_bayes_act(a, out),
        Command::DemoLemma1(a) => cmd_demo_lemma1(a, out),
        Command::DemoVariance(a) => cmd_demo_variance(a, out),
        Command::ClaimsCheck(a) => cmd_claims_check(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "modal-lab: {e}");
            exit_code(&e)
        }
    }
}

fn load_density(path: Option<&Path>) -> Result<MixtureDensity> {
    match path {
        Some(p) => config::read_density(p),
        None => Ok(MixtureDensity::benchmark()),
    }
}

fn cmd_table1(a: &Table1Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut spec: ExperimentSpec = match &a.config {
        Some(p) => config::read_toml(p)?,
        None => ExperimentSpec::default(),
    };
    if a.seed.is_some() {
        spec.master_seed = a.seed;
    }
    if a.trials.is_some() {
        spec.trials = a.trials;
    }
    if a.n.is_some() {
        spec.n = a.n;
    }
    if a.eps.is_some() {
        spec.eps = a.eps.clone();
    }
    let compare = spec.mixture.is_none();
    let cfg = spec.to_config()?;
    let rows = run_experiment(&cfg)?;
    let summary: &mut dyn Write = match &a.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_table_csv(&rows, &mut w)?;
            w.flush()?;
            out
        }
        None => {
            write_table_csv(&rows, &mut *out)?;
            err
        }
    };
    writeln!(
        summary,
        "{} trials of {} samples per eps, master seed {}",
        cfg.trials, cfg.n, cfg.master_seed
    )?;
    let reference = reference_table();
    for row in &rows {
        writeln!(
            summary,
            "eps {}: x_eps {}, mse {} / {}, versus {} / {}, minimal loss {}",
            row.eps,
            row.x_eps,
            row.mse_mode,
            row.mse_modal,
            row.versus_mode,
            row.versus_modal,
            row.minimal_loss
        )?;
        if let Some(r) = reference.row(row.eps).filter(|_| compare) {
            writeln!(
                summary,
                "  reference value: x_eps {}, mse {} / {}, versus {} / {}, minimal loss {}",
                r.x_eps, r.mse_mode, r.mse_modal, r.versus_mode, r.versus_modal, r.minimal_loss
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_counterexample(a: &CounterexampleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let v = config::read_identification(&a.config)?;
    let family = Family::from(a.family);
    let k = v.dim();
    let t = a.t.unwrap_or(match family {
        Family::Bump => k + 1,
        Family::Gaussian => (k + 1).max(6),
    });
    let opts = CertifyOptions {
        report: None,
        initial_guess: a.guess.clone(),
    };
    let cert = certify_with(&v, family, t, a.eps, &opts)?;
    let json = cert.to_json()?;
    let summary: &mut dyn Write = match &a.out {
        Some(path) => {
            std::fs::write(path, format!("{json}\n"))?;
            out
        }
        None => {
            writeln!(out, "{json}")?;
            err
        }
    };
    let residual = cert
        .identification_residual
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    writeln!(summary, "identification: {}", cert.v_description)?;
    writeln!(summary, "family {family}, t = {t}, report r = {:?}", cert.report)?;
    writeln!(summary, "residual |E_p' V(r, Y)| = {residual:e}")?;
    writeln!(
        summary,
        "mode {} (component {}) -> {} (component {})",
        cert.mode_original, cert.ball_original, cert.mode_perturbed, cert.ball_perturbed
    )?;
    writeln!(
        summary,
        "alpha {}, beta {}, case {}",
        cert.alpha, cert.beta, cert.case_tag
    )?;
    if !cert.zero_weights.is_empty() {
        writeln!(summary, "zero perturbed weights at components {:?}", cert.zero_weights)?;
    }
    if let Some(eps) = a.modal_eps {
        let m = modal_displacement(&cert, eps)?;
        writeln!(
            summary,
            "modal midpoints (eps {eps}): {:?} -> {:?}, leaves the ball of radius {} around component 0: {}",
            m.midpoint_original, m.midpoint_perturbed, m.radius, m.displaced
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_mode(a: &DensityArgs, out: &mut dyn Write) -> Result<i32> {
    let d = load_density(a.config.as_deref())?;
    let m = d.mode()?;
    if !m.unique {
        return Err(Error::NonUnique {
            what: "mode",
            detail: format!(
                "highest local maxima differ by {} (peak {})",
                m.runner_up_gap, m.value
            ),
        });
    }
    writeln!(out, "mode = {}", m.location)?;
    writeln!(out, "density at mode = {}", m.value)?;
    writeln!(
        out,
        "gap to next local maximum = {} (uniqueness tolerance {UNIQUENESS_TOL:e} relative)",
        m.runner_up_gap
    )?;
    Ok(EXIT_OK)
}

fn cmd_modal_midpoint(a: &ModalArgs, out: &mut dyn Write) -> Result<i32> {
    let d = load_density(a.config.as_deref())?.normalize();
    let x = d.modal_midpoint(a.eps)?;
    writeln!(out, "modal midpoint (eps = {}) = {x}", a.eps)?;
    writeln!(out, "modal mass = {}", d.modal_mass(x, a.eps)?)?;
    Ok(EXIT_OK)
}

fn cmd_bayes_act(a: &BayesArgs, out: &mut dyn Write) -> Result<i32> {
    let d = load_density(a.config.as_deref())?.normalize();
    let acts = match a.eps {
        Some(eps) => bayes_act(&ModalLoss::new(eps)?, &d, None)?,
        None => bayes_act(&SquaredLoss::mean(), &d, None)?,
    };
    let name = match a.eps {
        Some(eps) => format!("modal loss (eps = {eps})"),
        None => "squared loss".to_string(),
    };
    writeln!(out, "Bayes act of the {name} = {}", acts[0])?;
    Ok(EXIT_OK)
}

/// `(y - r)·1{y < r + 2}`: vanishes at `r = 0` under both the bump at 0 and
/// the two-bump mixture, as the witness requires.
pub fn synthetic_witness_identification() -> FnIdentification {
    FnIdentification::new(1, "(y - r) 1{y < r + 2}", |r, y| {
        vec![if y < r[0] + 2.0 { y - r[0] } else { 0.0 }]
    })
    .with_breakpoints(|r| vec![r[0] + 2.0])
}

fn describe_witness(v: &dyn Identification, out: &mut dyn Write) -> Result<()> {
    let name = v.description();
    match lemma1_witness(v)? {
        Lemma1Outcome::NotACandidate { residual_at_center } => writeln!(
            out,
            "{name}: not a candidate, E V(0, Y) = {residual_at_center} under the bump at 0"
        )?,
        Lemma1Outcome::PremiseFails { residual_on_mixture } => writeln!(
            out,
            "{name}: premise fails, E V(0, Y) = {residual_on_mixture} under \
             (2/3) bump(0) + (1/3) bump(4), whose mode is 0"
        )?,
        Lemma1Outcome::Contradiction {
            residual_on_shifted,
            mode_shifted,
            mode_gap,
            ..
        } => writeln!(
            out,
            "{name}: contradiction, E V(0, Y) = {residual_on_shifted} under the bump at 4, \
             whose mode is {mode_shifted} (gap {mode_gap})"
        )?,
    }
    Ok(())
}

fn cmd_demo_lemma1(a: &Lemma1Args, out: &mut dyn Write) -> Result<i32> {
    match &a.config {
        Some(p) => describe_witness(&config::read_identification(p)?, out)?,
        None => {
            describe_witness(&PolynomialIdentification::mean(), out)?;
            describe_witness(&FnIdentification::median(), out)?;
            describe_witness(&synthetic_witness_identification(), out)?;
        }
    }
    Ok(EXIT_OK)
}

/// A random normalized Gaussian mixture with one to four components.
pub fn random_gaussian_mixture<R: Rng>(rng: &mut R) -> Result<MixtureDensity> {
    let k = rng.random_range(1..=4);
    let params: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(0.2..2.0)))
        .collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    Ok(MixtureDensity::gaussian(&params, &weights)?.normalize())
}

fn cmd_demo_variance(a: &VarianceArgs, out: &mut dyn Write) -> Result<i32> {
    let densities = match &a.config {
        Some(p) => vec![config::read_density(p)?.normalize()],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..a.trials)
                .map(|_| random_gaussian_mixture(&mut rng))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut worst = 0.0f64;
    writeln!(out, "indirect,direct,abs_diff")?;
    for d in &densities {
        let indirect = variance_link_demo(d)?;
        let mean = d.raw_moment(1)?;
        let direct = d.raw_moment(2)? - mean * mean;
        let diff = (indirect - direct).abs();
        worst = worst.max(diff);
        writeln!(out, "{indirect},{direct},{diff}")?;
    }
    writeln!(out, "# largest difference {worst:e} over {} densities", densities.len())?;
    Ok(if worst <= VARIANCE_TOL { EXIT_OK } else { EXIT_FAILURE })
}

/// Random nonnegative heights; half of them get one boosted entry so that
/// the dominance premises occur often.
pub fn random_claim_heights<R: Rng>(rng: &mut R, t: usize) -> Vec<f64> {
    let mut h: Vec<f64> = (0..=t).map(|_| rng.random::<f64>()).collect();
    if rng.random_bool(0.5) {
        let i = rng.random_range(0..=t);
        h[i] += 1.0 + rng.random::<f64>();
    }
    h
}

fn cmd_claims_check(a: &ClaimsArgs, out: &mut dyn Write) -> Result<i32> {
    let scenario = gaussian_scenario(a.t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut heights = vec![scenario.values().to_vec()];
    heights.extend((0..a.trials).map(|_| random_claim_heights(&mut rng, a.t)));
    let (mut violations, mut bounds, mut dominant, mut dominated) = (0, 0, 0, 0);
    for h in &heights {
        let report = claims_check(h, &scenario)?;
        violations += report.violations();
        for e in &report.entries {
            bounds += 1;
            dominant += usize::from(e.dominant_premise);
            dominated += usize::from(e.dominated_premise);
        }
    }
    writeln!(
        out,
        "{} height vectors, t = {}, gamma = {:e}",
        heights.len(),
        a.t,
        scenario.gamma()
    )?;
    writeln!(
        out,
        "{bounds} bound checks, {dominant} dominant and {dominated} dominated premises, {violations} violations"
    )?;
    Ok(if violations == 0 { EXIT_OK } else { EXIT_FAILURE })
}

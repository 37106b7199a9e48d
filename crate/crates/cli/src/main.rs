use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use permflip::decomposition::ingest;
use permflip::fidelity::{report_with, PairSingularValues};
use permflip::harness::{
    apply_channel, draw_error_spec, parse_grid, run_sweep, write_csv, Channel, Metrics,
    SweepConfig,
};
use permflip::spectral::{
    self, bitflip_radius_bound, gershgorin, nmse, phaseflip_radius_bound, radius_deltas,
    relative_error, GershgorinDisk,
};
use permflip::{
    CoefficientRange, Complex64, DenseMatrix, Error, ErrorSpec, Parallelism, PermSum, StateMode,
    StateVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "permflip", version, about = "Permutation-sum operators under bit-flip and phase-flip noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random operator, and optionally a matching error spec.
    Gen(GenArgs),
    /// Apply an error channel to an operator.
    Perturb(PerturbArgs),
    /// Eigenvalues, Gershgorin disks and, against a second operator, the
    /// eigenvalue error metrics.
    Spectrum(SpectrumArgs),
    /// Output-state fidelities of B relative to A over random input states.
    Fidelity(FidelityArgs),
    /// Scale a positive matrix and split it into weighted permutations.
    Decompose(DecomposeArgs),
    /// Monte-Carlo sweep over the maximum error probability.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 8)]
    n: u32,
    #[arg(long, default_value_t = 16)]
    terms: usize,
    #[arg(long, default_value = "positive")]
    alpha: CoefficientRange,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write an error spec with probabilities uniform on [0, pmax].
    #[arg(long)]
    errors_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pmax: f64,
    /// Largest number of qubits flipped per term (defaults to n).
    #[arg(long)]
    gmax: Option<u32>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    model: Channel,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    errors: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Draw one Bernoulli realization instead of the deterministic mixture.
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    against: Option<PathBuf>,
    /// Error spec used to evaluate the radius-change bounds.
    #[arg(long)]
    errors: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FidelityArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 30)]
    states: usize,
    #[arg(long, default_value = "positive")]
    mode: StateMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Rows of comma-separated reals.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the outer scalings `d1`, `d2`.
    #[arg(long)]
    scaling_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long)]
    alpha: Option<CoefficientRange>,
    #[arg(long)]
    channel: Option<Channel>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    pmax_grid: Option<String>,
    #[arg(long)]
    gmax: Option<u32>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    states: Option<usize>,
    #[arg(long)]
    state_mode: Option<StateMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    metrics: Option<Metrics>,
    #[arg(long)]
    fixed_matrix: bool,
    /// Worker threads; 1 runs sequentially. Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())).into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> anyhow::Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

fn gen(args: GenArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let a = PermSum::random(args.n, args.terms, args.alpha, &mut rng)?;
    write_json(&args.out, &a)?;
    if let Some(path) = args.errors_out {
        let cfg = SweepConfig {
            n: args.n,
            terms: args.terms,
            channel: Channel::Both,
            gmax: args.gmax,
            pmax_grid: vec![args.pmax],
            ..Default::default()
        };
        cfg.validate()?;
        write_json(&path, &draw_error_spec(&cfg, args.pmax, &mut rng))?;
    }
    Ok(())
}

fn perturb(args: PerturbArgs) -> Result<()> {
    let a: PermSum = read_json(&args.input)?;
    let mut e: ErrorSpec = read_json(&args.errors)?;
    let b = if args.sample {
        match args.model {
            Channel::Bit => e.q.iter_mut().for_each(|q| *q = 0.0),
            Channel::Phase => e.p.iter_mut().for_each(|p| *p = 0.0),
            Channel::Both => {}
        }
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        a.sample_realization(&e, &mut rng)?
    } else {
        apply_channel(&a, args.model, &e)?
    };
    write_json(&args.out, &b)
}

#[derive(Serialize)]
struct SpectrumReport {
    dim: usize,
    eigenvalues: Vec<Complex64>,
    dominant: Option<Complex64>,
    residual_bound: f64,
    disks: Vec<GershgorinDisk>,
    #[serde(skip_serializing_if = "Option::is_none")]
    against: Option<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<Bounds>,
}

#[derive(Serialize)]
struct Comparison {
    eigenvalues: Vec<Complex64>,
    dominant: Option<Complex64>,
    re: Option<f64>,
    nmse: Option<f64>,
    disks: Vec<GershgorinDisk>,
    radius_deltas: Vec<f64>,
    max_radius_delta: f64,
}

#[derive(Serialize)]
struct Bounds {
    bitflip_radius: f64,
    phaseflip_radius: f64,
}

fn spectrum(args: SpectrumArgs) -> Result<()> {
    let a: PermSum = read_json(&args.input)?;
    let ma = a.materialize()?;
    let sa = spectral::eigenvalues(&ma)?;
    let against = match &args.against {
        Some(path) => {
            let b: PermSum = read_json(path)?;
            let mb = b.materialize()?;
            let sb = spectral::eigenvalues(&mb)?;
            let deltas = radius_deltas(&ma, &mb)?;
            let re = match (sa.dominant(), sb.dominant()) {
                (Some(x), Some(y)) => relative_error(x, y).ok(),
                _ => None,
            };
            Some(Comparison {
                dominant: sb.dominant(),
                re,
                nmse: nmse(&sa, &sb).ok(),
                disks: gershgorin(&mb)?,
                max_radius_delta: deltas.iter().copied().fold(0.0, f64::max),
                radius_deltas: deltas,
                eigenvalues: sb.eigenvalues,
            })
        }
        None => None,
    };
    let bounds = match &args.errors {
        Some(path) => {
            let e: ErrorSpec = read_json(path)?;
            let alphas = a.alphas();
            Some(Bounds {
                bitflip_radius: bitflip_radius_bound(&e, &alphas)?,
                phaseflip_radius: phaseflip_radius_bound(&e, &alphas)?,
            })
        }
        None => None,
    };
    let report = SpectrumReport {
        dim: a.dim(),
        dominant: sa.dominant(),
        residual_bound: sa.residual_bound,
        disks: gershgorin(&ma)?,
        eigenvalues: sa.eigenvalues,
        against,
        bounds,
    };
    write_json(&args.out, &report)
}

const FIDELITY_HEADER: &str = "state,f_overlap,f_re,relative_error,bound_lower,bound_upper,bound_upper_loose,sigma_min_a,sigma_max_a,sigma_max_b";

fn fidelity(args: FidelityArgs) -> Result<()> {
    let a: PermSum = read_json(&args.a)?;
    let b: PermSum = read_json(&args.b)?;
    if a.qubits() != b.qubits() {
        return Err(Error::InvalidArgument(format!(
            "operators act on {} and {} qubits",
            a.qubits(),
            b.qubits()
        ))
        .into());
    }
    let sv = PairSingularValues::compute(&a.materialize()?, &b.materialize()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = String::from(FIDELITY_HEADER);
    out.push('\n');
    let f = |x: f64| format!("{x:.16e}");
    for k in 0..args.states {
        let psi = StateVector::random(a.qubits(), args.mode, &mut rng)?;
        match report_with(&a, &b, &psi, &sv) {
            Ok(r) => out.push_str(&format!(
                "{k},{},{},{},{},{},{},{},{},{}\n",
                f(r.f_overlap),
                f(r.f_re),
                f(r.relative_error),
                f(r.bound_lower),
                f(r.bound_upper),
                f(r.bound_upper_loose),
                f(r.sigma_min_a),
                f(r.sigma_max_a),
                f(r.sigma_max_b)
            )),
            // A annihilates this state; the row stays, the metrics do not.
            Err(Error::DivisionDomain(_)) => out.push_str(&format!("{k},,,,,,,,,\n")),
            Err(e) => return Err(e.into()),
        }
    }
    fs::write(&args.out, out).map_err(|e| io_error(&args.out, e))
}

fn read_matrix_csv(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("{}:{}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    Ok(DenseMatrix::from_real_rows(&rows)?)
}

fn decompose(args: DecomposeArgs) -> Result<()> {
    let m = read_matrix_csv(&args.input)?;
    let (scaling, a) = ingest(&m, args.tol)?;
    write_json(&args.out, &a)?;
    if let Some(path) = args.scaling_out {
        write_json(&path, &scaling)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::from_json_file(path)?,
        None => SweepConfig::default(),
    };
    if let Some(x) = args.n {
        cfg.n = x;
    }
    if let Some(x) = args.terms {
        cfg.terms = x;
    }
    if let Some(x) = args.alpha {
        cfg.alpha = x;
    }
    if let Some(x) = args.channel {
        cfg.channel = x;
    }
    if let Some(x) = &args.pmax_grid {
        cfg.pmax_grid = parse_grid(x)?;
    }
    if let Some(x) = args.gmax {
        cfg.gmax = Some(x);
    }
    if let Some(x) = args.trials {
        cfg.trials = x;
    }
    if let Some(x) = args.states {
        cfg.states_per_trial = x;
    }
    if let Some(x) = args.state_mode {
        cfg.state_mode = x;
    }
    if let Some(x) = args.seed {
        cfg.seed = x;
    }
    if let Some(x) = args.metrics {
        cfg.metrics = x;
    }
    if args.fixed_matrix {
        cfg.fixed_matrix = true;
    }
    let par = match args.threads {
        Some(0) => return Err(Error::InvalidArgument("--threads must be at least 1".into()).into()),
        Some(k) => Parallelism::from_threads(k),
        None => Parallelism::Auto,
    };
    let records = run_sweep(&cfg, par)?;
    write_csv(&records, &args.out)?;
    let flagged = records.iter().filter(|r| r.is_flagged(cfg.metrics)).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} of {} trials produced no metrics", records.len());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_) | Error::ResourceLimit { .. }) => 2,
        Some(Error::Io { .. }) => 1,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Perturb(a) => perturb(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Fidelity(a) => fidelity(a),
        Command::Decompose(a) => decompose(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    account_bits, committee_failure_prob, complexity_sweep, hypergeometric_failure_prob, leader_strategy,
    outcome_label, run_sweep, scientific, sweep_block, write_csv, ExperimentConfig, HarnessError,
};
use crate::crypto::KeyRegistry;
use crate::field_codec::CodeParams;
use crate::protocol::{verify_bundle, ProofBundle, RoundConfig};
use crate::simnet::{run_round, AdversarySpec, Corruption, PreGstPolicy, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "coded-confirm", version, about = "Transaction confirmation for coded blockchains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one round and print its outcome and bit counts.
    Run(RunArgs),
    /// Run a sweep described by a key = value config file and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config; `-` for stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also fit totals to a|B| + bN log^2 N + c and print the residuals.
        #[arg(long)]
        fit: bool,
    },
    /// Print the committee failure bound for each lambda as TSV.
    Prob {
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        lambda: Vec<usize>,
        #[arg(long, default_value_t = 512)]
        precision: u32,
        /// Also print the exact draw-without-replacement tail for N nodes, f Byzantine.
        #[arg(long, value_name = "N:f", value_parser = parse_pair)]
        hypergeometric: Option<(usize, usize)>,
    },
    /// Check a serialized proof bundle against the keys of a run.
    VerifyProof {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        n: usize,
        /// Seed of the run that issued the bundle.
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    f: usize,
    #[arg(long, default_value_t = 5)]
    lambda: usize,
    /// Transactions in the block; defaults to 2N.
    #[arg(long)]
    g: Option<usize>,
    #[arg(long, default_value = "honest")]
    adversary: Strategy,
    /// Corrupted nodes; defaults to f for a non-honest adversary.
    #[arg(long)]
    corrupt: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    delta: u64,
    #[arg(long, default_value_t = 0)]
    gst: u64,
    #[arg(long, default_value_t = 20)]
    tau3: u64,
    /// synchronous, defer, reorder or lag:TICKS.
    #[arg(long, default_value = "synchronous", value_parser = parse_pre_gst)]
    pre_gst: PreGstPolicy,
    #[arg(long, default_value_t = 1)]
    max_iterations: u32,
    /// Write the event trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write one confirmed bundle, for use with verify-proof.
    #[arg(long)]
    bundle_out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected N:f")?;
    Ok((a.parse().map_err(|_| "bad N")?, b.parse().map_err(|_| "bad f")?))
}

fn parse_pre_gst(s: &str) -> Result<PreGstPolicy, String> {
    Ok(match s {
        "synchronous" => PreGstPolicy::Synchronous,
        "defer" => PreGstPolicy::DeferToGst,
        "reorder" => PreGstPolicy::Reorder,
        _ => match s.strip_prefix("lag:") {
            Some(t) => PreGstPolicy::FixedLag(t.parse().map_err(|_| format!("bad lag `{t}`"))?),
            None => return Err(format!("unknown pre-GST policy `{s}`")),
        },
    })
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Sweep { config, output, fit } => cmd_sweep(config, output, fit, out),
        Command::Prob {
            lambda,
            precision,
            hypergeometric,
        } => cmd_prob(&lambda, precision, hypergeometric, out),
        Command::VerifyProof { bundle, n, seed } => cmd_verify(bundle, n, seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let bad = |e: String| HarnessError::Config(e);
    let code = CodeParams::new(a.n, a.k, a.f, 1).map_err(|e| bad(e.to_string()))?;
    let mut cfg = RoundConfig::new(code);
    cfg.lambda = a.lambda;
    cfg.delta = a.delta;
    cfg.gst = a.gst;
    cfg.tau3 = a.tau3;
    cfg.max_iterations = a.max_iterations;
    let count = a.corrupt.unwrap_or(if a.adversary == Strategy::Honest { 0 } else { a.f });
    let mut adv = AdversarySpec::new(
        a.adversary,
        Corruption::Random {
            count,
            include_leader: count > 0 && leader_strategy(a.adversary),
        },
    );
    adv.pre_gst = a.pre_gst;
    let g = a.g.unwrap_or(2 * a.n);
    let block = sweep_block(a.n, g, a.seed, 1000);
    let trace = run_round(&cfg, &adv, &block, a.seed)?;
    let m = account_bits(&trace)?;

    let ids = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
    writeln!(out, "corrupted\t{}", ids(&mut trace.corrupted.iter().map(|x| x.0.to_string())))?;
    for rec in &trace.iterations {
        let decision = match trace.iteration_decision(rec) {
            Some(d) => format!("{d:?}").to_lowercase(),
            None => "split".into(),
        };
        writeln!(
            out,
            "iteration {}\tleader {}\tcommittee {}\thonest outputs {}/{}\t{}",
            rec.iteration,
            rec.leader.0,
            ids(&mut rec.committee.iter().map(|x| x.0.to_string())),
            rec.outputs.len(),
            trace.honest_count(),
            decision
        )?;
    }
    writeln!(out, "outcome\t{}", outcome_label(&trace))?;
    writeln!(out, "confirmed\t{}\tmissing\t{}", trace.confirmations.len(), trace.missing_confirmations.len())?;
    for s in 1..=7 {
        writeln!(out, "bits_step{s}\t{}", m.step(s))?;
    }
    writeln!(out, "bits_total\t{}", m.total())?;
    writeln!(out, "modeled_broadcast_bits\t{}", m.modeled_broadcast_bits)?;
    writeln!(out, "proof_size_correction\t{}", m.proof_size_correction())?;
    if let Some(path) = a.trace {
        trace.write_jsonl(BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = a.bundle_out {
        match trace.confirmations.first() {
            Some((_, _, b)) => fs::write(path, b.to_bytes())?,
            None => return Err(bad("no confirmed bundle to export".into())),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(config: PathBuf, output: Option<PathBuf>, fit: bool, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let cfg: ExperimentConfig = fs::read_to_string(&config)?.parse()?;
    let rows = run_sweep(&cfg)?;
    match output.or(cfg.output.clone()) {
        Some(p) if p.as_os_str() != "-" => write_csv(&rows, BufWriter::new(File::create(p)?))?,
        _ => write_csv(&rows, &mut *out)?,
    }
    if fit {
        let report = complexity_sweep(&rows)?;
        let mut e = io::stderr();
        writeln!(e, "fit\ta={:.4}\tb={:.4}\tc={:.1}", report.a, report.b, report.c)?;
        for (n, b, measured, predicted, r) in &report.points {
            writeln!(e, "N={n}\t|B|={b}\tmeasured={measured:.0}\tpredicted={predicted:.0}\tresidual={r:+.4}")?;
        }
        let flagged = report.flagged(0.10);
        if !flagged.is_empty() {
            writeln!(e, "above model by more than 10% at N = {flagged:?}")?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_prob(
    lambdas: &[usize],
    precision: u32,
    hyper: Option<(usize, usize)>,
    out: &mut dyn Write,
) -> Result<i32, HarnessError> {
    if lambdas.contains(&0) || precision < 2 {
        return Err(HarnessError::Config("lambda must be at least 1 and precision at least 2".into()));
    }
    write!(out, "lambda\tbound\tlog2\tbelow_2^-256")?;
    if hyper.is_some() {
        write!(out, "\thypergeometric")?;
    }
    writeln!(out)?;
    for &l in lambdas {
        let b = committee_failure_prob(l, precision);
        write!(out, "{l}\t{}\t{:.6}\t{}", b.decimal(12), b.log2(), b.below_pow2(-256))?;
        if let Some((n, f)) = hyper {
            if l > n || f > n {
                return Err(HarnessError::Config(format!("hypergeometric mode needs lambda, f <= N = {n}")));
            }
            let h = hypergeometric_failure_prob(n, f, l);
            let (num, den) = (h.numer().magnitude(), h.denom().magnitude());
            write!(out, "\t{}", scientific(num, den, 12))?;
        }
        writeln!(out)?;
    }
    Ok(EXIT_OK)
}

fn cmd_verify(path: PathBuf, n: usize, seed: u64, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let bytes = fs::read(path)?;
    let reg = KeyRegistry::generate(n, seed);
    let ok = ProofBundle::from_bytes(&bytes).is_ok_and(|b| verify_bundle(&reg, &b));
    writeln!(out, "{}", if ok { "accept" } else { "reject" })?;
    Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
}

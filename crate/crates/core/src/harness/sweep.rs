use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{account_bits, HarnessError, Metrics};
use crate::blockdata::Block;
use crate::field_codec::CodeParams;
use crate::protocol::{Decision, RoundConfig};
use crate::simnet::{run_round, AdversarySpec, Corruption, RoundTrace, Strategy};

/// How K follows N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KRule {
    Fixed(usize),
    /// `K = N / d`, at least 1.
    Divide(usize),
}

/// How f follows N and K.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FRule {
    Fixed(usize),
    /// Largest f with `N >= 3f + 1 + (K - 1)`.
    Max,
}

/// Sweep description, read from `key = value` lines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    /// `g(N) = g_factor * N`.
    pub g_factor: usize,
    pub k: KRule,
    pub f: FRule,
    pub lambda: usize,
    pub adversary: Strategy,
    /// Corrupted nodes per run; `None` means f for a non-honest adversary.
    pub corrupt: Option<usize>,
    pub seeds: u64,
    pub seed_base: u64,
    pub gst: u64,
    pub max_iterations: u32,
    pub num_clients: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: vec![16, 32, 64, 128],
            g_factor: 8,
            k: KRule::Divide(4),
            f: FRule::Max,
            lambda: 5,
            adversary: Strategy::Honest,
            corrupt: None,
            seeds: 1,
            seed_base: 0,
            gst: 0,
            max_iterations: 1,
            num_clients: 1000,
            output: None,
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: String| HarnessError::Config(format!("line {}: {m}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected key = value, got `{line}`")))?;
            let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("`{key}`: `{v}` is not an integer")));
            match key {
                "n" => {
                    cfg.n = value
                        .split(',')
                        .map(|v| int(v.trim()).map(|x| x as usize))
                        .collect::<Result<_, _>>()?
                }
                "g_factor" => cfg.g_factor = int(value)? as usize,
                "k" => {
                    cfg.k = match value.strip_prefix("n/") {
                        Some(d) => KRule::Divide(int(d)?.max(1) as usize),
                        None => KRule::Fixed(int(value)? as usize),
                    }
                }
                "f" => {
                    cfg.f = if value == "max" {
                        FRule::Max
                    } else {
                        FRule::Fixed(int(value)? as usize)
                    }
                }
                "lambda" => cfg.lambda = int(value)? as usize,
                "adversary" => cfg.adversary = value.parse().map_err(bad)?,
                "corrupt" => cfg.corrupt = Some(int(value)? as usize),
                "seeds" => cfg.seeds = int(value)?,
                "seed_base" => cfg.seed_base = int(value)?,
                "gst" => cfg.gst = int(value)?,
                "max_iterations" => cfg.max_iterations = int(value)? as u32,
                "num_clients" => cfg.num_clients = int(value)?.max(1),
                "output" => cfg.output = Some(PathBuf::from(value)),
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        cfg.points()?;
        Ok(cfg)
    }
}

/// One resolved sweep point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepPoint {
    pub round: RoundConfig,
    pub g: usize,
}

impl ExperimentConfig {
    pub fn points(&self) -> Result<Vec<SweepPoint>, HarnessError> {
        if self.n.is_empty() || self.seeds == 0 || self.g_factor == 0 {
            return Err(HarnessError::Config("need at least one N, one seed, and g_factor >= 1".into()));
        }
        self.n
            .iter()
            .map(|&n| {
                let k = match self.k {
                    KRule::Fixed(k) => k,
                    KRule::Divide(d) => (n / d).max(1),
                };
                let f = match self.f {
                    FRule::Fixed(f) => f,
                    FRule::Max => n.saturating_sub(k) / 3,
                };
                let code = CodeParams::new(n, k, f, 1).map_err(|e| HarnessError::Config(format!("N = {n}: {e}")))?;
                let mut round = RoundConfig::new(code);
                round.lambda = self.lambda;
                round.gst = self.gst;
                round.max_iterations = self.max_iterations;
                round.validate().map_err(|e| HarnessError::Config(format!("N = {n}: {e}")))?;
                Ok(SweepPoint {
                    round,
                    g: self.g_factor * n,
                })
            })
            .collect()
    }

    pub fn adversary_for(&self, f: usize) -> AdversarySpec {
        let count = self.corrupt.unwrap_or(if self.adversary == Strategy::Honest { 0 } else { f });
        AdversarySpec::new(
            self.adversary,
            Corruption::Random {
                count,
                include_leader: count > 0 && leader_strategy(self.adversary),
            },
        )
    }
}

/// Strategies that only act through a corrupted leader.
pub fn leader_strategy(s: Strategy) -> bool {
    matches!(
        s,
        Strategy::LeaderEquivocate | Strategy::LeaderWithholdProofs | Strategy::LeaderStall | Strategy::Combined
    )
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub f: usize,
    pub lambda: usize,
    pub g: usize,
    pub seed: u64,
    pub adversary: String,
    pub outcome: String,
    pub bits_step1: u64,
    pub bits_step2: u64,
    pub bits_step3: u64,
    pub bits_step4: u64,
    pub bits_step5: u64,
    pub bits_step6: u64,
    pub bits_step7: u64,
    pub bits_total: u64,
    pub modeled_broadcast_bits: u64,
    pub proof_size_correction: u64,
    #[serde(skip)]
    pub block_bits: u64,
}

pub fn outcome_label(trace: &RoundTrace) -> &'static str {
    if !trace.agreement() {
        return "disagree";
    }
    match trace.final_decision() {
        Some(Decision::Accept) => "accept",
        Some(Decision::Reject) => "reject",
        None => "undecided",
    }
}

impl SweepRow {
    pub fn new(trace: &RoundTrace, m: &Metrics) -> Self {
        let c = &trace.config;
        SweepRow {
            n: c.code.n,
            k: c.code.k,
            f: c.code.f,
            lambda: c.lambda,
            g: trace.g,
            seed: trace.seed,
            adversary: trace.strategy.name().to_string(),
            outcome: outcome_label(trace).to_string(),
            bits_step1: m.steps[0],
            bits_step2: m.steps[1],
            bits_step3: m.steps[2],
            bits_step4: m.steps[3],
            bits_step5: m.steps[4],
            bits_step6: m.steps[5],
            bits_step7: m.steps[6],
            bits_total: m.total(),
            modeled_broadcast_bits: m.modeled_broadcast_bits,
            proof_size_correction: m.proof_size_correction(),
            block_bits: m.block_bits,
        }
    }
}

/// Block for a sweep point; depends only on `(N, g, seed)`.
pub fn sweep_block(n: usize, g: usize, seed: u64, num_clients: u64) -> Block {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 40) ^ ((g as u64) << 20));
    Block::random(&mut rng, 1, g, num_clients)
}

/// Runs every `(point, seed)` pair, in parallel, returning rows in key order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let points = cfg.points()?;
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..cfg.seeds).map(move |s| (p, cfg.seed_base + s)))
        .collect();
    jobs.par_iter()
        .map(|&(p, seed)| {
            let pt = &points[p];
            let block = sweep_block(pt.round.code.n, pt.g, seed, cfg.num_clients);
            let adv = cfg.adversary_for(pt.round.code.f);
            let trace = run_round(&pt.round, &adv, &block, seed)?;
            let m = account_bits(&trace)?;
            Ok(SweepRow::new(&trace, &m))
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Measured totals fitted to `a |B| + b N log2(N)^2 + c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `(N, |B|, measured, predicted, relative residual)` per point.
    pub points: Vec<(usize, u64, f64, f64, f64)>,
    pub max_relative_residual: f64,
}

impl ComplexityFit {
    /// Points whose measured total exceeds the model by more than `tol`.
    pub fn flagged(&self, tol: f64) -> Vec<usize> {
        self.points.iter().filter(|p| p.4.abs() > tol).map(|p| p.0).collect()
    }
}

pub fn n_log2sq(n: usize) -> f64 {
    let l = (n as f64).log2();
    n as f64 * l * l
}

/// Least-squares fit over `(N, |B| bits, measured bits)` samples.
pub fn complexity_fit(samples: &[(usize, u64, u64)]) -> Result<ComplexityFit, HarnessError> {
    let distinct_n = {
        let mut v: Vec<usize> = samples.iter().map(|s| s.0).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    if samples.len() < 4 || distinct_n < 3 {
        return Err(HarnessError::InsufficientPoints(samples.len()));
    }
    // Columns are scaled to unit maximum so the solve is well conditioned.
    let cols = [
        samples.iter().map(|s| s.1 as f64).collect::<Vec<_>>(),
        samples.iter().map(|s| n_log2sq(s.0)).collect(),
        vec![1.0; samples.len()],
    ];
    let scale: Vec<f64> = cols.iter().map(|c| c.iter().cloned().fold(0.0, f64::max)).collect();
    let a = DMatrix::from_fn(samples.len(), 3, |i, j| cols[j][i] / scale[j]);
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.2 as f64));
    let svd = a.clone().svd(true, true);
    if svd.rank(1e-9) < 3 {
        return Err(HarnessError::InsufficientPoints(samples.len()));
    }
    let x = svd.solve(&y, 1e-12).map_err(|e| HarnessError::Config(e.to_string()))?;
    let coef: Vec<f64> = (0..3).map(|j| x[j] / scale[j]).collect();
    let pred = &a * &x;
    let points: Vec<_> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let m = s.2 as f64;
            (s.0, s.1, m, pred[i], (m - pred[i]) / m)
        })
        .collect();
    let max_relative_residual = points.iter().map(|p| p.4.abs()).fold(0.0, f64::max);
    Ok(ComplexityFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        points,
        max_relative_residual,
    })
}

/// Fits the rows' totals with the proof-size correction removed.
pub fn complexity_sweep(rows: &[SweepRow]) -> Result<ComplexityFit, HarnessError> {
    let samples: Vec<(usize, u64, u64)> = rows
        .iter()
        .map(|r| (r.n, r.block_bits, r.bits_total - r.proof_size_correction))
        .collect();
    complexity_fit(&samples)
}

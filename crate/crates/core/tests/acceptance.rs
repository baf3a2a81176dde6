//! End-to-end acceptance suite, one test per criterion. Each prints a
//! PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use coded_confirm::blockdata::{encode_block_parts, partition_block, Block};
use coded_confirm::broadcast::echo::{explore_all_schedules, simulate_echo, EchoScenario};
use coded_confirm::broadcast::{simulate_ideal, BroadcastRun, Status};
use coded_confirm::crypto::{poly_hash, CommitmentTree, HashParams, InclusionProof, KeyRegistry};
use coded_confirm::field_codec::{
    decode_with_errors, encode_parts, lagrange_interpolate, CodeParams, EvalDomain, Fe, Fp, Polynomial, MERSENNE61,
};
use coded_confirm::harness::{
    account_bits, cli, committee_failure_prob, complexity_sweep, envelope_bits, leader_strategy, run_sweep,
    sweep_block, ExperimentConfig, FRule, KRule,
};
use coded_confirm::protocol::{decode_part_hashes, verify_bundle, Decision, RoundConfig};
use coded_confirm::simnet::{
    run_round, AdversarySpec, Corruption, NetworkModel, PreGstPolicy, RoundTrace, SimError, Strategy,
};
use coded_confirm::NodeId;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

fn enumerate_majority(lambda: usize) -> BigRational {
    // Every subset of corrupted seats, weighted (1/3)^|S| (2/3)^(lambda-|S|);
    // numerators are 2^(lambda-|S|) over 3^lambda.
    let mut numer: u128 = 0;
    for mask in 0u64..1 << lambda {
        let bad = mask.count_ones() as usize;
        if 2 * bad > lambda {
            numer += 1u128 << (lambda - bad);
        }
    }
    BigRational::new(BigInt::from(numer), BigInt::from(3).pow(lambda as u32))
}

fn criterion_1() -> Check {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(["coded-confirm", "prob", "--lambda", "3000"], &mut out, &mut err);
    let text = String::from_utf8(out).unwrap();
    let row = text.lines().nth(1).unwrap_or_default().to_string();
    let cols: Vec<&str> = row.split('\t').collect();
    ensure(code == 0 && cols.len() == 4 && cols[3] == "true", || format!("prob output: {text:?}"))?;
    let log2: f64 = cols[2].parse().map_err(|_| format!("bad log2 column in {row:?}"))?;
    let b3000 = committee_failure_prob(3000, 512);
    ensure(log2 < -256.0 && b3000.below_pow2(-256), || format!("lambda 3000 bound 2^{log2}"))?;

    for lambda in 1..=20 {
        let got = committee_failure_prob(lambda, 512).exact();
        ensure(got == enumerate_majority(lambda), || format!("lambda {lambda}: {got} differs from enumeration"))?;
    }
    let third = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    ensure(committee_failure_prob(1, 512).exact() == third(1, 3), || "lambda 1".into())?;
    ensure(committee_failure_prob(3, 512).exact() == third(7, 27), || "lambda 3".into())?;
    ensure(committee_failure_prob(5, 512).exact() == third(51, 243), || "lambda 5".into())?;

    // The 512-bit bound is within one unit in the last place above the exact value.
    for lambda in [1, 3, 5, 21, 63, 65, 301, 1001, 3000] {
        let b = committee_failure_prob(lambda, 512);
        let pow2 = |e: i64| {
            if e >= 0 {
                BigRational::from_integer(BigInt::from(1) << e as u64)
            } else {
                BigRational::new(1.into(), BigInt::from(1) << e.unsigned_abs())
            }
        };
        let m = BigRational::from_integer(b.mantissa.clone().into());
        let hi = &m * pow2(b.exponent);
        let lo = (&m - BigRational::from_integer(1.into())) * pow2(b.exponent);
        ensure(b.mantissa.bits() == 512 && hi >= b.exact() && lo < b.exact(), || {
            format!("lambda {lambda}: rounded bound not within 1 ulp")
        })?;
    }
    Ok(format!("lambda=3000 bound {} = 2^{log2:.2}; lambda<=20 match enumeration", cols[1]))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Check {
    let mut configs = Vec::new();
    for n in [7usize, 10, 16] {
        for f in 1..=(n - 1) / 3 {
            configs.push((n, n - 3 * f, f));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for i in 0..1000 {
        let (n, k, f) = configs[i % configs.len()];
        let code = CodeParams::new(n, k, f, 1).unwrap();
        let domain = EvalDomain::new(n, k).unwrap();
        let g = rng.gen_range(1..=3 * k);
        let block = Block::random(&mut rng, 1, g, 100);
        let parts = partition_block(&block, k).unwrap();
        let coded = encode_block_parts(&parts, &domain).unwrap();
        let params = HashParams::new(Fe::new(rng.gen_range(1..MERSENNE61))).unwrap();
        let truth: Vec<Fe> = parts.iter().map(|p| poly_hash(&p.data, &params).unwrap()).collect();

        let mut hashes: Vec<(NodeId, Fe)> =
            coded.iter().map(|c| (c.node, poly_hash(&c.data, &params).unwrap())).collect();
        hashes.shuffle(&mut rng);
        let quorum = n - f;
        // Corrupt exactly f of the hashes the decoder will read. Half the time
        // the lies all lie on one other degree K-1 polynomial.
        let liars = sample(&mut rng, quorum, f).into_vec();
        let alt = Polynomial::<MERSENNE61>::new((0..k).map(|_| Fe::new(rng.gen())).collect());
        let colluding = rng.gen_bool(0.5);
        for &j in &liars {
            let (id, h) = hashes[j];
            let x = domain.node_point(id.0 as usize);
            let lie = if colluding { alt.eval(x) } else { Fe::new(rng.gen()) };
            hashes[j].1 = if lie == h { h + Fe::ONE } else { lie };
        }
        if decode_part_hashes(&hashes, &code, &domain).as_deref() != Some(&truth[..]) {
            failures += 1;
        }
    }
    ensure(failures == 0, || format!("{failures}/1000 instances decoded wrongly"))?;
    Ok(format!("1000 instances over {} (N,K,f) points, 0 failures", configs.len()))
}

// ---------------------------------------------------------------- 3, 4, 6a

#[derive(Default)]
struct SafetyTally {
    runs: u64,
    excluded: u64,
    accepted: u64,
    disagreements: Vec<String>,
    insecure: Vec<String>,
    late: Vec<String>,
    bundles_checked: u64,
}

fn check_security(t: &RoundTrace, block: &Block) -> Result<u64, String> {
    if !t.missing_confirmations.is_empty() {
        return Err(format!("missing bundles {:?}", &t.missing_confirmations[..t.missing_confirmations.len().min(3)]));
    }
    let reg = KeyRegistry::generate(t.config.code.n, t.seed);
    let mut want = BTreeSet::new();
    for (i, tx) in block.transactions.iter().enumerate() {
        want.insert((i as u32 + 1, tx.sender));
        want.insert((i as u32 + 1, tx.receiver));
    }
    let mut have = BTreeSet::new();
    for (i, party, b) in &t.confirmations {
        let tx = block.tx(*i as usize).unwrap();
        if b.tx != *tx || b.index != *i || !tx.involves(*party) || !verify_bundle(&reg, b) {
            return Err(format!("bundle for tx {i} held by {party} does not verify"));
        }
        have.insert((*i, *party));
    }
    if have != want {
        return Err(format!("{} of {} parties hold bundles", have.len(), want.len()));
    }
    Ok(t.confirmations.len() as u64)
}

fn safety_sweep(seeds: u64) -> SafetyTally {
    let mut tally = SafetyTally::default();
    for (n, k, f) in [(7, 1, 2), (7, 4, 1), (10, 1, 3), (10, 4, 2)] {
        let mut cfg = RoundConfig::new(CodeParams::new(n, k, f, 1).unwrap());
        cfg.lambda = 5;
        cfg.max_iterations = 2;
        for strategy in Strategy::ALL {
            let count = if strategy == Strategy::Honest { 0 } else { f };
            let mut adv = AdversarySpec::new(
                strategy,
                Corruption::CommitteeMinority {
                    count,
                    include_leader: count > 0 && leader_strategy(strategy),
                },
            );
            adv.require_honest_committee = true;
            for seed in 0..seeds {
                let block = sweep_block(n, n, seed, 40);
                let t = match run_round(&cfg, &adv, &block, seed) {
                    Ok(t) => t,
                    Err(SimError::HarnessViolation(_)) => {
                        tally.excluded += 1;
                        continue;
                    }
                    Err(e) => {
                        tally.disagreements.push(format!("N={n} K={k} {strategy} seed {seed}: {e}"));
                        continue;
                    }
                };
                tally.runs += 1;
                let tag = || format!("N={n} K={k} {strategy} seed {seed}");
                if !t.agreement() {
                    tally.disagreements.push(tag());
                }
                if !t.liveness_holds() {
                    tally.late.push(tag());
                }
                if t.accepted() {
                    tally.accepted += 1;
                    match check_security(&t, &block) {
                        Ok(c) => tally.bundles_checked += c,
                        Err(e) => tally.insecure.push(format!("{}: {e}", tag())),
                    }
                }
            }
        }
    }
    tally
}

fn criterion_3(t: &SafetyTally) -> Check {
    ensure(t.disagreements.is_empty(), || {
        format!("{} runs split: {:?}", t.disagreements.len(), &t.disagreements[..t.disagreements.len().min(5)])
    })?;
    Ok(format!(
        "{} runs, 0 disagreements ({} accepting, {} seeds skipped for a corrupted-majority re-elected committee)",
        t.runs, t.accepted, t.excluded
    ))
}

fn criterion_4(t: &SafetyTally) -> Check {
    ensure(t.insecure.is_empty(), || {
        format!("{} accepting runs lack bundles: {:?}", t.insecure.len(), &t.insecure[..t.insecure.len().min(5)])
    })?;
    ensure(t.accepted > 0, || "no accepting runs to check".into())?;
    Ok(format!("{} accepting runs, {} bundles re-verified", t.accepted, t.bundles_checked))
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Check {
    let configs = [(7, 2, 1), (7, 1, 2), (10, 4, 2), (10, 1, 3), (16, 7, 3)];
    let mut bad = Vec::new();
    let mut detections = 0;
    for seed in 0..1000u64 {
        let (n, k, f) = configs[seed as usize % configs.len()];
        let cfg = RoundConfig::new(CodeParams::new(n, k, f, 1).unwrap());
        let adv = AdversarySpec::new(Strategy::LeaderEquivocate, Corruption::Random { count: f, include_leader: true });
        let block = sweep_block(n, 2 * n, seed, 40);
        let t = run_round(&cfg, &adv, &block, seed).map_err(|e| e.to_string())?;
        let rec = &t.iterations[0];
        let rejected = t.final_decision() == Some(Decision::Reject) && t.confirmations.is_empty();
        // Every honest member saw B' pass the commitment check and fail Step 4.
        let caught = !rec.verdicts.is_empty() && rec.verdicts.values().all(|&(v, same)| !v && !same);
        if rejected && caught {
            detections += 1;
        } else {
            bad.push(seed);
        }
    }
    ensure(bad.is_empty(), || format!("seeds not rejected: {:?}", &bad[..bad.len().min(10)]))?;
    Ok(format!("{detections}/1000 rejected, every honest member flagged the hash mismatch"))
}

// ---------------------------------------------------------------- 6

fn criterion_6(safety: &SafetyTally) -> Check {
    ensure(safety.late.is_empty(), || format!("late terminations: {:?}", &safety.late[..safety.late.len().min(5)]))?;
    let mut runs = 0;
    let mut late = Vec::new();
    let mut cfg = RoundConfig::new(CodeParams::new(10, 1, 3, 1).unwrap());
    cfg.max_iterations = 3;
    let policies = [PreGstPolicy::Synchronous, PreGstPolicy::DeferToGst, PreGstPolicy::Reorder, PreGstPolicy::FixedLag(35)];
    for gst in [0, 25, 50, 75, 100] {
        cfg.gst = gst;
        for pre_gst in policies {
            for strategy in Strategy::ALL {
                let count = if strategy == Strategy::Honest { 0 } else { 3 };
                let mut adv = AdversarySpec::new(
                    strategy,
                    Corruption::Random {
                        count,
                        include_leader: count > 0 && leader_strategy(strategy),
                    },
                );
                adv.pre_gst = pre_gst;
                for seed in 0..20 {
                    let block = sweep_block(10, 10, seed, 40);
                    let t = run_round(&cfg, &adv, &block, seed).map_err(|e| e.to_string())?;
                    runs += 1;
                    if !t.liveness_holds() || t.timing_violations() > 0 || !t.agreement() {
                        late.push(format!("gst={gst} {pre_gst:?} {strategy} seed {seed}"));
                    }
                }
            }
        }
    }
    ensure(late.is_empty(), || format!("{} runs missed the bound: {:?}", late.len(), &late[..late.len().min(5)]))?;

    let mut cfg = RoundConfig::new(CodeParams::new(10, 1, 3, 1).unwrap());
    cfg.max_iterations = 5;
    let adv = AdversarySpec::new(Strategy::LeaderStall, Corruption::Random { count: 3, include_leader: false });
    let mut accepted = 0;
    let mut iterations = 0u64;
    for seed in 0..1000u64 {
        let block = sweep_block(10, 10, seed, 40);
        let t = run_round(&cfg, &adv, &block, seed).map_err(|e| e.to_string())?;
        ensure(t.liveness_holds(), || format!("stall seed {seed} missed the bound"))?;
        if let Some(it) = t.accepting_iteration() {
            accepted += 1;
            iterations += it as u64;
        }
    }
    ensure(accepted >= 990, || format!("only {accepted}/1000 stalled runs accepted within 5 iterations"))?;
    Ok(format!(
        "{} traces terminal in time; stalled leaders: {accepted}/1000 accepted within 5 iterations (mean {:.2})",
        runs + safety.runs,
        iterations as f64 / accepted as f64
    ))
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Check {
    let cfg = ExperimentConfig {
        n: vec![16, 32, 64, 128],
        g_factor: 8,
        k: KRule::Divide(4),
        f: FRule::Max,
        lambda: 5,
        ..ExperimentConfig::default()
    };
    let rows = run_sweep(&cfg).map_err(|e| e.to_string())?;
    for r in &rows {
        ensure(r.outcome == "accept", || format!("N={} did not accept", r.n))?;
        let want = (r.n * r.lambda) as u64 * envelope_bits(8);
        ensure(r.bits_step4 == want, || format!("N={}: step 4 = {} bits, expected {want}", r.n, r.bits_step4))?;
    }
    let fit = complexity_sweep(&rows).map_err(|e| e.to_string())?;
    ensure(fit.max_relative_residual <= 0.10, || format!("residuals {:?}", fit.points))?;
    ensure(fit.a >= 1.0, || format!("|B| slope {} below 1", fit.a))?;

    // Doubling |B| at fixed N.
    let mut round = RoundConfig::new(CodeParams::new(32, 8, 8, 1).unwrap());
    round.lambda = 5;
    let metrics = |g: usize| {
        let block = sweep_block(32, g, 7, 1000);
        let t = run_round(&round, &AdversarySpec::honest(), &block, 7).unwrap();
        account_bits(&t).unwrap()
    };
    let (small, big) = (metrics(256), metrics(512));
    let ratio = big.step_payload(3) as f64 / small.step_payload(3) as f64;
    ensure((ratio - 2.0).abs() <= 0.1, || format!("step 3 ratio {ratio}"))?;
    for s in [4, 5, 6] {
        ensure(small.step(s) == big.step(s), || format!("step {s} depends on |B|"))?;
    }
    let correction: u64 = rows.iter().map(|r| r.proof_size_correction).sum();
    Ok(format!(
        "a={:.2} b={:.1} c={:.0}, max residual {:.2}%, step 3 doubling ratio {ratio:.3}, proof-size correction {correction} bits excluded",
        fit.a,
        fit.b,
        fit.c,
        100.0 * fit.max_relative_residual
    ))
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Check {
    let report = explore_all_schedules(4, 1);
    ensure(report.violations == 0, || format!("{} agreement violations", report.violations))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..1000u64 {
        let n = [4usize, 7, 10][seed as usize % 3];
        let f = (n - 1) / 3;
        let initiator = NodeId(rng.gen_range(1..=n as u32));
        let byzantine: BTreeSet<NodeId> =
            NodeId::all(n).filter(|&x| x != initiator).collect::<Vec<_>>().choose_multiple(&mut rng, f).copied().collect();
        let honest: BTreeSet<NodeId> = NodeId::all(n).filter(|x| !byzantine.contains(x)).collect();
        let value: Vec<u8> = (0..rng.gen_range(1..64)).map(|_| rng.gen()).collect();
        let net = NetworkModel {
            delta: 5,
            gst: rng.gen_range(0..40),
            pre_gst: PreGstPolicy::Reorder,
        };
        // Validity for an honest initiator is only promised once GST has passed.
        let start = net.gst + rng.gen_range(0..20);
        let deadline = start + rng.gen_range(0..10);
        let reg = KeyRegistry::generate(n, seed);
        let sc = EchoScenario {
            n,
            f,
            initiator,
            byzantine: byzantine.clone(),
            honest_value: value.clone(),
            byzantine_values: vec![],
            net,
            start,
            start_deadline: deadline,
        };
        let echo = simulate_echo(&reg, &sc, &mut ChaCha8Rng::seed_from_u64(seed));
        let ideal = simulate_ideal(n, initiator, Some(value.clone()), &net, start, deadline, &honest, &mut ChaCha8Rng::seed_from_u64(seed));
        let outcome = |run: &BroadcastRun| -> Vec<Status> {
            honest.iter().map(|h| run.statuses.get(h).map(|s| s.0.clone()).unwrap_or(Status::Pending)).collect()
        };
        let expect = vec![Status::Accepted(value); honest.len()];
        ensure(outcome(&echo) == expect && outcome(&ideal) == expect, || {
            format!("seed {seed}: echo {:?} ideal {:?}", outcome(&echo), outcome(&ideal))
        })?;
    }
    Ok(format!(
        "N=4 f=1: {} states, {} complete schedules, 0 violations; 1000/1000 honest-initiator runs agree",
        report.states, report.leaves
    ))
}

// ---------------------------------------------------------------- 9

const F101: u64 = 101;
type G = Fp<F101>;

fn brute_force_decode(results: &[(G, G)], degree: usize, e: usize) -> Option<Polynomial<F101>> {
    let r = results.len();
    let mut found = None;
    for mask in 0u32..1 << r {
        if mask.count_ones() as usize != r - e {
            continue;
        }
        let kept: Vec<_> = (0..r).filter(|i| mask >> i & 1 == 1).map(|i| results[i]).collect();
        let p = lagrange_interpolate(&kept[..degree + 1]).unwrap();
        if kept.iter().all(|&(x, y)| p.eval(x) == y) {
            found = Some(p);
        }
    }
    found
}

fn criterion_9() -> Check {
    const CASES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = MERSENNE61 as u128;

    // Field: arithmetic against u128 reference, inverses, distributivity.
    for _ in 0..CASES {
        let (a, b, c) = (rng.gen_range(0..MERSENNE61), rng.gen_range(0..MERSENNE61), rng.gen_range(0..MERSENNE61));
        let (x, y, z) = (Fe::new(a), Fe::new(b), Fe::new(c));
        ensure((x * y).value() as u128 == a as u128 * b as u128 % p, || format!("{a}*{b}"))?;
        ensure((x + y).value() as u128 == (a as u128 + b as u128) % p, || format!("{a}+{b}"))?;
        ensure(x * (y + z) == x * y + x * z && (x - y) + y == x, || "ring laws".into())?;
        if a != 0 {
            ensure(x * x.inv().unwrap() == Fe::ONE, || format!("inverse of {a}"))?;
        }
    }

    // Interpolation round-trips; encoding and the part hash are linear.
    for _ in 0..CASES {
        let d = rng.gen_range(0..9);
        let poly = Polynomial::<MERSENNE61>::new((0..=d).map(|_| Fe::new(rng.gen())).collect());
        let pts: Vec<(Fe, Fe)> = (0..=d as u64).map(|x| (Fe::new(x * 7 + 3), poly.eval(Fe::new(x * 7 + 3)))).collect();
        ensure(lagrange_interpolate(&pts).unwrap() == poly, || "interpolation round-trip".into())?;

        let k = rng.gen_range(1..5);
        let n = k + rng.gen_range(0..6);
        let len = rng.gen_range(1..6);
        let domain = EvalDomain::<MERSENNE61>::new(n, k).unwrap();
        let rand_parts = |rng: &mut ChaCha8Rng| -> Vec<Vec<Fe>> {
            (0..k).map(|_| (0..len).map(|_| Fe::new(rng.gen())).collect()).collect()
        };
        let (u, v) = (rand_parts(&mut rng), rand_parts(&mut rng));
        let (s, t) = (Fe::new(rng.gen()), Fe::new(rng.gen()));
        let w: Vec<Vec<Fe>> = u.iter().zip(&v).map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| s * x + t * y).collect()).collect();
        let (eu, ev, ew) = (encode_parts(&u, &domain).unwrap(), encode_parts(&v, &domain).unwrap(), encode_parts(&w, &domain).unwrap());
        let params = HashParams::new(Fe::new(rng.gen_range(1..MERSENNE61))).unwrap();
        for i in 0..n {
            for j in 0..len {
                ensure(ew[i][j] == s * eu[i][j] + t * ev[i][j], || "encoding not linear".into())?;
            }
            let h = |x: &[Fe]| poly_hash(x, &params).unwrap();
            ensure(h(&ew[i]) == s * h(&eu[i]) + t * h(&ev[i]), || "hash not linear".into())?;
        }
        // Systematic: node points beyond the data points still decode the parts.
        for (kk, part) in u.iter().enumerate() {
            for j in 0..len {
                let results: Vec<(Fe, Fe)> = (0..n).map(|i| (domain.node_point(i + 1), eu[i][j])).collect();
                let q = lagrange_interpolate(&results[..k]).unwrap();
                ensure(q.eval(domain.data_point(kk + 1)) == part[j], || "encoding round-trip".into())?;
            }
        }
    }

    // Commitment: every proof opens, every mutation is rejected.
    for _ in 0..CASES {
        let g = rng.gen_range(1..40);
        let msgs: Vec<Vec<u8>> = (0..g).map(|_| (0..rng.gen_range(1..20)).map(|_| rng.gen()).collect()).collect();
        let tree = CommitmentTree::build(&msgs).unwrap();
        let c = tree.commitment();
        let i = rng.gen_range(1..=g);
        let pi = tree.prove(i).unwrap();
        ensure(coded_confirm::crypto::ver(&c, &msgs[i - 1], i, &pi), || "valid proof rejected".into())?;
        let mut m = msgs[i - 1].clone();
        let b = rng.gen_range(0..m.len());
        m[b] ^= 1 << rng.gen_range(0..8);
        ensure(!coded_confirm::crypto::ver(&c, &m, i, &pi), || "mutated message accepted".into())?;
        if g > 1 {
            let other = (i % g) + 1;
            ensure(!coded_confirm::crypto::ver(&c, &msgs[i - 1], other, &pi), || "wrong index accepted".into())?;
        }
        if !pi.path.is_empty() {
            let mut bad: InclusionProof = pi.clone();
            let l = rng.gen_range(0..bad.path.len());
            bad.path[l][rng.gen_range(0..32)] ^= 1;
            ensure(!coded_confirm::crypto::ver(&c, &msgs[i - 1], i, &bad), || "mutated path accepted".into())?;
        }
        let mut c2 = c;
        c2.root[rng.gen_range(0..32)] ^= 1;
        ensure(!coded_confirm::crypto::ver(&c2, &msgs[i - 1], i, &pi), || "mutated root accepted".into())?;
    }

    // Threshold: t partials never combine, t + 1 always do, tampering breaks it.
    for case in 0..CASES {
        let n = rng.gen_range(2..20);
        let reg = KeyRegistry::generate(n, case as u64);
        let t = reg.threshold();
        let msg: [u8; 8] = rng.gen();
        let take = rng.gen_range(1..=n);
        let signers = sample(&mut rng, n, take);
        let partials: Vec<_> = signers.iter().map(|i| reg.threshold_sign(NodeId::from_index(i), &msg).unwrap()).collect();
        match reg.combine(&msg, &partials) {
            Ok(sig) => {
                ensure(take > t && reg.threshold_verify(&msg, &sig), || format!("{take} of t={t} combined"))?;
                let mut other = msg;
                other[0] ^= 1;
                ensure(!reg.threshold_verify(&other, &sig), || "signature verifies another message".into())?;
                let mut bytes = sig.to_bytes();
                let at = rng.gen_range(0..bytes.len());
                bytes[at] ^= 1 << rng.gen_range(0..8);
                let forged = coded_confirm::crypto::CombinedSignature::from_bytes_prefix(&bytes);
                ensure(forged.map_or(true, |(s, _)| !reg.threshold_verify(&msg, &s)), || "tampered signature accepted".into())?;
            }
            Err(_) => ensure(take <= t, || format!("{take} > t={t} partials failed to combine"))?,
        }
    }

    // Berlekamp-Welch against the exhaustive oracle, every shape with R <= 9
    // and every error pattern.
    let mut instances = 0;
    for r in 1..=9usize {
        for e in 0..=(r - 1) / 2 {
            for degree in 0..=r - 1 - 2 * e {
                for pattern in 0u32..1 << r {
                    let truth = Polynomial::<F101>::new((0..=degree).map(|_| G::new(rng.gen())).collect());
                    let xs = sample(&mut rng, F101 as usize, r);
                    let mut results: Vec<(G, G)> = xs.iter().map(|x| (G::new(x as u64), truth.eval(G::new(x as u64)))).collect();
                    for (i, res) in results.iter_mut().enumerate() {
                        if pattern >> i & 1 == 1 {
                            res.1 += G::new(rng.gen_range(1..F101));
                        }
                    }
                    let got = decode_with_errors(&results, degree, e).ok();
                    let oracle = brute_force_decode(&results, degree, e);
                    ensure(got == oracle, || format!("R={r} e={e} deg={degree} pattern {pattern:b}"))?;
                    instances += 1;
                }
            }
        }
    }
    Ok(format!("4 suites x {CASES} cases; Berlekamp-Welch matches the oracle on {instances} instances"))
}

// ----------------------------------------------------------------

fn report(id: u8, name: &str, budget_secs: u64, elapsed: Duration, result: Check) {
    let within = elapsed <= Duration::from_secs(budget_secs);
    let (verdict, detail) = match result {
        Ok(d) if within => ("PASS", d),
        Ok(d) => ("FAIL", format!("over time budget; {d}")),
        Err(e) => ("FAIL", e),
    };
    println!("{verdict} criterion {id} ({name}) [{:.1}s / {budget_secs}s]: {detail}", elapsed.as_secs_f64());
    assert_eq!(verdict, "PASS", "criterion {id} failed");
}

fn timed(id: u8, name: &str, budget_secs: u64, f: impl FnOnce() -> Check) {
    let t0 = Instant::now();
    let r = f();
    report(id, name, budget_secs, t0.elapsed(), r);
}

/// The safety sweep feeds criteria 3, 4 and 6; it runs once.
fn safety() -> &'static (SafetyTally, Duration) {
    static SWEEP: OnceLock<(SafetyTally, Duration)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let t0 = Instant::now();
        let tally = safety_sweep(10_000);
        (tally, t0.elapsed())
    })
}

#[test]
fn criterion_1_committee_failure_bound() {
    timed(1, "committee failure bound", 5, criterion_1);
}

#[test]
fn criterion_2_decoding_guarantee() {
    timed(2, "decoding guarantee", 30, criterion_2);
}

#[test]
fn criterion_3_safety() {
    let (tally, elapsed) = safety();
    report(3, "safety", 300, *elapsed, criterion_3(tally));
}

#[test]
fn criterion_4_client_security() {
    let (tally, elapsed) = safety();
    report(4, "client security", 300, *elapsed, criterion_4(tally));
}

#[test]
fn criterion_5_equivocation_rejection() {
    timed(5, "equivocation rejection", 300, criterion_5);
}

#[test]
fn criterion_6_liveness() {
    let (tally, _) = safety();
    timed(6, "liveness", 300, || criterion_6(tally));
}

#[test]
fn criterion_7_complexity_shape() {
    timed(7, "complexity shape", 120, criterion_7);
}

#[test]
fn criterion_8_broadcast_properties() {
    timed(8, "broadcast properties", 300, criterion_8);
}

#[test]
fn criterion_9_primitive_correctness() {
    timed(9, "primitive correctness", 300, criterion_9);
}

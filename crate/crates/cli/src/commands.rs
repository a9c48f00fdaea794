use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use qkd_core::privacy::{exhaustive_worst_collision, sampled_collision_rate};
use qkd_core::{run_session, BiasedAttackParams, RandomStream, TheoryPoint, Verdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{CompareArgs, Format, HashCheckArgs, HashMode, RunArgs, SweepArgs};
use crate::sweep::{self, Axis, SweepRow};

/// Exit code for a session whose refined verdict is Abort.
pub const EXIT_ABORT: u8 = 2;

pub fn run(args: &RunArgs) -> Result<u8> {
    let resolved = args.session.resolve()?;
    if resolved.seed_drawn {
        eprintln!("seed: {}", resolved.config.seed);
    }
    let transcript = run_session(&resolved.config, resolved.attack.as_ref())?;
    let json = transcript.to_json();
    std::fs::write(&args.out, json).with_context(|| format!("writing {}", args.out.display()))?;
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.5}"));
    let est = transcript.estimate.as_ref();
    println!(
        "refined={} naive={} e1_hat={} e2_hat={} sift_fraction={:.5} final_key_len={} status={}",
        transcript.verdict_refined,
        transcript.verdict_naive,
        fmt_opt(est.map(|e| e.e1_hat)),
        fmt_opt(est.map(|e| e.e2_hat)),
        transcript.sift_fraction(),
        transcript.final_key_len(),
        sweep::status_name(&transcript.status),
    );
    Ok(if transcript.verdict_refined.is_accept() {
        0
    } else {
        EXIT_ABORT
    })
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let resolved = args.session.resolve()?;
    if resolved.seed_drawn {
        eprintln!("seed: {}", resolved.config.seed);
    }
    let mut axes = Vec::new();
    for spec in &args.axes {
        axes.push(Axis::parse_range(spec)?);
    }
    for spec in &args.values {
        axes.push(Axis::parse_list(spec)?);
    }
    if axes.is_empty() {
        bail!("sweep needs at least one --axis or --values");
    }
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.param == a.param) {
            bail!("parameter {} is swept twice", a.param.name());
        }
    }
    let base_attack = resolved.attack.map_or((0.0, 0.0), |a| (a.p1(), a.p2()));
    let points = sweep::grid(&resolved.config, base_attack, &axes);
    let rows = sweep::run_sweep(&points, args.trials, resolved.config.seed)?;
    let mut out = open_output(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_sweep_csv(&mut out, &axes, &rows)?,
        Format::Json => {
            let records: Vec<_> = rows.iter().map(SweepJson::from).collect();
            serde_json::to_writer_pretty(&mut out, &records)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(0)
}

fn write_sweep_csv(out: &mut dyn Write, axes: &[Axis], rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepRow::header(axes))?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// JSON form of a sweep row, with swept values as an object.
#[derive(Serialize)]
struct SweepJson<'a> {
    swept: serde_json::Map<String, serde_json::Value>,
    #[serde(flatten)]
    row: &'a SweepRow,
}

impl<'a> From<&'a SweepRow> for SweepJson<'a> {
    fn from(row: &'a SweepRow) -> Self {
        let swept = row
            .swept
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        SweepJson { swept, row }
    }
}

#[derive(Debug, Serialize)]
struct CompareRow {
    p1: f64,
    p2: f64,
    e1: f64,
    e2: f64,
    e_bar: f64,
    theory_naive: Verdict,
    theory_refined: Verdict,
    trials: usize,
    naive_accept_fraction: f64,
    refined_accept_fraction: f64,
    sim_naive: Verdict,
    sim_refined: Verdict,
    agree: bool,
}

const COMPARE_HEADER: [&str; 13] = [
    "p1",
    "p2",
    "e1",
    "e2",
    "e_bar",
    "theory_naive",
    "theory_refined",
    "trials",
    "naive_accept_fraction",
    "refined_accept_fraction",
    "sim_naive",
    "sim_refined",
    "agree",
];

pub fn compare(args: &CompareArgs) -> Result<u8> {
    let resolved = args.session.resolve()?;
    if resolved.seed_drawn {
        eprintln!("seed: {}", resolved.config.seed);
    }
    if args.trials < 1 {
        bail!("trials must be at least 1");
    }
    let cfg = resolved.config;
    let mut attacks = Vec::new();
    for &p1 in &args.p1 {
        for &p2 in &args.p2 {
            if p1 + p2 <= 1.0 + 1e-12 {
                attacks.push(BiasedAttackParams::new(p1, p2.min(1.0 - p1).max(0.0))?);
            }
        }
    }
    if attacks.is_empty() {
        bail!("no attack with p1 + p2 <= 1 in the requested grid");
    }
    let jobs: Vec<(usize, usize)> = (0..attacks.len())
        .flat_map(|a| (0..args.trials).map(move |t| (a, t)))
        .collect();
    let outcomes = sweep::thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(a, t)| {
                let seed = sweep::trial_seed(cfg.seed, a, t);
                let tr = run_session(&cfg.with_seed(seed), Some(&attacks[a]))?;
                Ok((tr.verdict_naive.is_accept(), tr.verdict_refined.is_accept()))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::with_capacity(attacks.len());
    for (a, attack) in attacks.iter().enumerate() {
        let slice = &outcomes[a * args.trials..(a + 1) * args.trials];
        let frac = |f: fn(&(bool, bool)) -> bool| {
            slice.iter().filter(|o| f(o)).count() as f64 / args.trials as f64
        };
        let naive_accept_fraction = frac(|o| o.0);
        let refined_accept_fraction = frac(|o| o.1);
        let theory = TheoryPoint::new(
            cfg.epsilon_alice,
            cfg.epsilon_bob,
            attack.p1(),
            attack.p2(),
            cfg.eta,
            cfg.m1,
            cfg.n,
        )?;
        let det = theory.detection(cfg.e_max);
        let sim_naive = Verdict::from_accept(naive_accept_fraction > 0.5);
        let sim_refined = Verdict::from_accept(refined_accept_fraction > 0.5);
        rows.push(CompareRow {
            p1: attack.p1(),
            p2: attack.p2(),
            e1: theory.e1,
            e2: theory.e2,
            e_bar: theory.e_bar,
            theory_naive: det.naive,
            theory_refined: det.refined,
            trials: args.trials,
            naive_accept_fraction,
            refined_accept_fraction,
            sim_naive,
            sim_refined,
            agree: sim_naive == det.naive && sim_refined == det.refined,
        });
    }

    let mut out = open_output(args.out.as_deref())?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(COMPARE_HEADER)?;
            for r in &rows {
                w.write_record([
                    r.p1.to_string(),
                    r.p2.to_string(),
                    r.e1.to_string(),
                    r.e2.to_string(),
                    r.e_bar.to_string(),
                    r.theory_naive.to_string(),
                    r.theory_refined.to_string(),
                    r.trials.to_string(),
                    r.naive_accept_fraction.to_string(),
                    r.refined_accept_fraction.to_string(),
                    r.sim_naive.to_string(),
                    r.sim_refined.to_string(),
                    r.agree.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(0)
}

/// Largest (n, k) pair for which exhaustive enumeration is offered.
const EXHAUSTIVE_MAX_N: usize = 6;
const EXHAUSTIVE_MAX_K: usize = 3;

pub fn hash_check(args: &HashCheckArgs) -> Result<u8> {
    let pairs: Vec<(usize, usize)> = if args.all {
        (1..=EXHAUSTIVE_MAX_N)
            .flat_map(|n| (1..=n.min(EXHAUSTIVE_MAX_K)).map(move |k| (n, k)))
            .collect()
    } else {
        vec![(args.n, args.k)]
    };
    let mut all_ok = true;
    for (n, k) in pairs {
        if k < 1 || k > n {
            bail!("hash dimensions need 1 <= k <= n (got n={n}, k={k})");
        }
        let bound = 0.5f64.powi(k as i32);
        match args.mode {
            HashMode::Exhaustive => {
                if n > EXHAUSTIVE_MAX_N || k > EXHAUSTIVE_MAX_K {
                    bail!(
                        "exhaustive check supports n <= {EXHAUSTIVE_MAX_N} and k <= {EXHAUSTIVE_MAX_K} \
                         (got n={n}, k={k}); use --mode sampled"
                    );
                }
                let worst = exhaustive_worst_collision(n, k)?;
                let ok = worst <= bound + 1e-12;
                all_ok &= ok;
                println!(
                    "n={n} k={k} worst_collision={worst:.6} bound={bound:.6} {}",
                    if ok { "ok" } else { "FAIL" }
                );
            }
            HashMode::Sampled => {
                if args.trials < 1 {
                    bail!("trials must be at least 1");
                }
                let seed = args.seed.unwrap_or(0);
                let mut rng =
                    RandomStream::new(seed).split_indexed("hash-check", (n * 64 + k) as u64);
                let rate = sampled_collision_rate(n, k, args.trials, &mut rng)?;
                let sigma = (bound * (1.0 - bound) / args.trials as f64).sqrt();
                let limit = bound + 3.0 * sigma;
                let ok = rate <= limit;
                all_ok &= ok;
                println!(
                    "n={n} k={k} sampled_collision={rate:.6} bound={bound:.6} limit={limit:.6} trials={} {}",
                    args.trials,
                    if ok { "ok" } else { "FAIL" }
                );
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

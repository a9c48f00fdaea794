//! Grid sweeps over session parameters.
//!
//! Every (point, trial) derives its session seed from the master seed via
//! labeled splits, so rows do not depend on thread count or scheduling.

use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use qkd_core::{run_session, BiasedAttackParams, ProtocolConfig, RandomStream, TheoryPoint};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    N,
    Epsilon,
    EpsilonAlice,
    EpsilonBob,
    EMax,
    M1,
    M2,
    S,
    Eta,
    EveP1,
    EveP2,
}

impl Param {
    pub const ALL: [Param; 11] = [
        Param::N,
        Param::Epsilon,
        Param::EpsilonAlice,
        Param::EpsilonBob,
        Param::EMax,
        Param::M1,
        Param::M2,
        Param::S,
        Param::Eta,
        Param::EveP1,
        Param::EveP2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::N => "n",
            Param::Epsilon => "epsilon",
            Param::EpsilonAlice => "epsilon_alice",
            Param::EpsilonBob => "epsilon_bob",
            Param::EMax => "e_max",
            Param::M1 => "m1",
            Param::M2 => "m2",
            Param::S => "s",
            Param::Eta => "eta",
            Param::EveP1 => "eve_p1",
            Param::EveP2 => "eve_p2",
        }
    }

    /// Applies `value`, rounding for integer parameters.
    pub fn apply(self, value: f64, cfg: &mut ProtocolConfig, attack: &mut (f64, f64)) {
        let int = value.round().max(0.0) as usize;
        match self {
            Param::N => cfg.n = int,
            Param::Epsilon => {
                cfg.epsilon_alice = value;
                cfg.epsilon_bob = value;
            }
            Param::EpsilonAlice => cfg.epsilon_alice = value,
            Param::EpsilonBob => cfg.epsilon_bob = value,
            Param::EMax => cfg.e_max = value,
            Param::M1 => cfg.m1 = int,
            Param::M2 => cfg.m2 = int,
            Param::S => cfg.s = int,
            Param::Eta => cfg.eta = value,
            Param::EveP1 => attack.0 = value,
            Param::EveP2 => attack.1 = value,
        }
    }
}

impl FromStr for Param {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
                anyhow!(
                    "unknown sweep parameter {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Axis {
    /// Parses `NAME=START:STOP:STEPS[:linear|:log]`.
    pub fn parse_range(spec: &str) -> Result<Axis> {
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("axis {spec:?} must look like NAME=START:STOP:STEPS[:log]"))?;
        let param: Param = name.trim().parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            bail!("axis {spec:?} must look like NAME=START:STOP:STEPS[:log]");
        }
        let start: f64 = parts[0]
            .trim()
            .parse()
            .with_context(|| format!("bad start in {spec:?}"))?;
        let stop: f64 = parts[1]
            .trim()
            .parse()
            .with_context(|| format!("bad stop in {spec:?}"))?;
        let steps: usize = parts[2]
            .trim()
            .parse()
            .with_context(|| format!("bad steps in {spec:?}"))?;
        if steps < 2 {
            bail!("axis {spec:?}: steps must be at least 2");
        }
        let log = match parts.get(3).map(|s| s.trim()) {
            None | Some("linear") => false,
            Some("log") => true,
            Some(other) => bail!("axis {spec:?}: unknown scale {other:?}"),
        };
        if log && (start <= 0.0 || stop <= 0.0) {
            bail!("axis {spec:?}: log scale needs positive endpoints");
        }
        let values = (0..steps)
            .map(|i| {
                let t = i as f64 / (steps - 1) as f64;
                if log {
                    (start.ln() + t * (stop.ln() - start.ln())).exp()
                } else {
                    start + t * (stop - start)
                }
            })
            .collect();
        Ok(Axis { param, values })
    }

    /// Parses `NAME=V1,V2,...`.
    pub fn parse_list(spec: &str) -> Result<Axis> {
        let (name, list) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("values {spec:?} must look like NAME=V1,V2,..."))?;
        let param: Param = name.trim().parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad value {v:?} in {spec:?}"))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() < 2 {
            bail!("values {spec:?}: at least 2 values are required");
        }
        Ok(Axis { param, values })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub point: usize,
    pub trial: usize,
    pub seed: u64,
    #[serde(skip)]
    pub swept: Vec<(String, f64)>,
    pub n: usize,
    pub epsilon_alice: f64,
    pub epsilon_bob: f64,
    pub e_max: f64,
    pub m1: usize,
    pub m2: usize,
    pub s: usize,
    pub eta: f64,
    pub eve_p1: f64,
    pub eve_p2: f64,
    pub status: String,
    pub sift_fraction: f64,
    pub e1_hat: Option<f64>,
    pub e2_hat: Option<f64>,
    pub e_bar_hat: Option<f64>,
    pub verdict_naive: String,
    pub verdict_refined: String,
    pub raw_key_len: usize,
    pub final_key_len: usize,
    pub theory_sift_fraction: f64,
    pub theory_e1: f64,
    pub theory_e2: f64,
    pub theory_e_bar: f64,
    pub theory_verdict_naive: String,
    pub theory_verdict_refined: String,
}

pub const FIXED_COLUMNS: [&str; 26] = [
    "point",
    "trial",
    "seed",
    "n",
    "epsilon_alice",
    "epsilon_bob",
    "e_max",
    "m1",
    "m2",
    "s",
    "eta",
    "eve_p1",
    "eve_p2",
    "status",
    "sift_fraction",
    "e1_hat",
    "e2_hat",
    "e_bar_hat",
    "verdict_naive",
    "verdict_refined",
    "raw_key_len",
    "final_key_len",
    "theory_sift_fraction",
    "theory_e1",
    "theory_e2",
    "theory_e_bar",
];

impl SweepRow {
    pub fn header(axes: &[Axis]) -> Vec<String> {
        let mut cols: Vec<String> = FIXED_COLUMNS[..3].iter().map(|s| s.to_string()).collect();
        cols.extend(axes.iter().map(|a| format!("swept_{}", a.param.name())));
        cols.extend(FIXED_COLUMNS[3..].iter().map(|s| s.to_string()));
        cols.push("theory_verdict_naive".into());
        cols.push("theory_verdict_refined".into());
        cols
    }

    pub fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut rec = vec![
            self.point.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
        ];
        rec.extend(self.swept.iter().map(|(_, v)| v.to_string()));
        rec.extend([
            self.n.to_string(),
            self.epsilon_alice.to_string(),
            self.epsilon_bob.to_string(),
            self.e_max.to_string(),
            self.m1.to_string(),
            self.m2.to_string(),
            self.s.to_string(),
            self.eta.to_string(),
            self.eve_p1.to_string(),
            self.eve_p2.to_string(),
            self.status.clone(),
            self.sift_fraction.to_string(),
            opt(self.e1_hat),
            opt(self.e2_hat),
            opt(self.e_bar_hat),
            self.verdict_naive.clone(),
            self.verdict_refined.clone(),
            self.raw_key_len.to_string(),
            self.final_key_len.to_string(),
            self.theory_sift_fraction.to_string(),
            self.theory_e1.to_string(),
            self.theory_e2.to_string(),
            self.theory_e_bar.to_string(),
            self.theory_verdict_naive.clone(),
            self.theory_verdict_refined.clone(),
        ]);
        rec
    }
}

pub fn status_name(status: &qkd_core::SessionStatus) -> &'static str {
    use qkd_core::SessionStatus::*;
    match status {
        KeyEstablished => "key_established",
        InsufficientSample { .. } => "insufficient_sample",
        ErrorRateExceeded => "error_rate_exceeded",
        ReconciliationFailed => "reconciliation_failed",
        PlanNotViable => "plan_not_viable",
    }
}

/// One grid point: its config (seed unset) and attack.
#[derive(Debug, Clone)]
pub struct Point {
    pub index: usize,
    pub swept: Vec<(String, f64)>,
    pub config: ProtocolConfig,
    pub attack: (f64, f64),
}

pub fn grid(base: &ProtocolConfig, base_attack: (f64, f64), axes: &[Axis]) -> Vec<Point> {
    let mut combos: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, values)| {
            let mut config = *base;
            let mut attack = base_attack;
            let mut swept = Vec::with_capacity(axes.len());
            for (axis, &v) in axes.iter().zip(&values) {
                axis.param.apply(v, &mut config, &mut attack);
                swept.push((axis.param.name().to_string(), v));
            }
            Point {
                index,
                swept,
                config,
                attack,
            }
        })
        .collect()
}

pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    RandomStream::new(master)
        .split_indexed("point", point as u64)
        .split_indexed("trial", trial as u64)
        .seed()
}

pub fn run_point(point: &Point, trial: usize, master_seed: u64) -> Result<SweepRow> {
    let seed = trial_seed(master_seed, point.index, trial);
    let cfg = point.config.with_seed(seed);
    let (p1, p2) = point.attack;
    let attack = if p1 > 0.0 || p2 > 0.0 {
        Some(BiasedAttackParams::new(p1, p2)?)
    } else {
        None
    };
    let t = run_session(&cfg, attack.as_ref())
        .with_context(|| format!("sweep point {} ({:?})", point.index, point.swept))?;
    let theory = TheoryPoint::new(
        cfg.epsilon_alice,
        cfg.epsilon_bob,
        p1,
        p2,
        cfg.eta,
        cfg.m1,
        cfg.n,
    )?;
    let detection = theory.detection(cfg.e_max);
    let est = t.estimate.as_ref();
    Ok(SweepRow {
        point: point.index,
        trial,
        seed,
        swept: point.swept.clone(),
        n: cfg.n,
        epsilon_alice: cfg.epsilon_alice,
        epsilon_bob: cfg.epsilon_bob,
        e_max: cfg.e_max,
        m1: cfg.m1,
        m2: cfg.m2,
        s: cfg.s,
        eta: cfg.eta,
        eve_p1: p1,
        eve_p2: p2,
        status: status_name(&t.status).to_string(),
        sift_fraction: t.sift_fraction(),
        e1_hat: est.map(|e| e.e1_hat),
        e2_hat: est.map(|e| e.e2_hat),
        e_bar_hat: est.map(|e| e.e_bar_hat),
        verdict_naive: t.verdict_naive.to_string(),
        verdict_refined: t.verdict_refined.to_string(),
        raw_key_len: t.raw_key_len(),
        final_key_len: t.final_key_len(),
        theory_sift_fraction: theory.sift_fraction,
        theory_e1: theory.e1,
        theory_e2: theory.e2,
        theory_e_bar: theory.e_bar,
        theory_verdict_naive: detection.naive.to_string(),
        theory_verdict_refined: detection.refined.to_string(),
    })
}

/// Builds a pool capped by `QKD_SIFT_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("QKD_SIFT_THREADS") {
        let threads: usize = value
            .trim()
            .parse()
            .with_context(|| format!("QKD_SIFT_THREADS={value:?} is not a thread count"))?;
        if threads == 0 {
            bail!("QKD_SIFT_THREADS must be at least 1");
        }
        builder = builder.num_threads(threads);
    }
    Ok(builder.build()?)
}

pub fn run_sweep(points: &[Point], trials: usize, master_seed: u64) -> Result<Vec<SweepRow>> {
    if trials < 1 {
        bail!("trials must be at least 1");
    }
    for p in points {
        p.config
            .with_seed(0)
            .validate()
            .with_context(|| format!("sweep point {:?}", p.swept))?;
        BiasedAttackParams::new(p.attack.0, p.attack.1)
            .with_context(|| format!("sweep point {:?}", p.swept))?;
    }
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let mut rows = thread_pool()?.install(|| {
        jobs.par_iter()
            .map(|&(p, t)| run_point(&points[p], t, master_seed))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by_key(|r| (r.point, r.trial));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_axes() {
        let a = Axis::parse_range("epsilon=0.5:0.1:5").unwrap();
        assert_eq!(a.param, Param::Epsilon);
        assert_eq!(a.values.len(), 5);
        assert!((a.values[2] - 0.3).abs() < 1e-12);
        let log = Axis::parse_range("n=1000:100000:3:log").unwrap();
        assert!((log.values[1] - 10_000.0).abs() < 1e-6);
        assert!(Axis::parse_range("epsilon=0.5:0.1:1").is_err());
        assert!(Axis::parse_range("bogus=0:1:2").is_err());
        assert!(Axis::parse_range("eta=0:1:2:cubic").is_err());
        assert!(Axis::parse_range("eta=0:1:2:log").is_err());
    }

    #[test]
    fn list_axes_and_grid() {
        let a = Axis::parse_list("epsilon=0.5,0.25").unwrap();
        let b = Axis::parse_list("eve_p2=0,1").unwrap();
        let pts = grid(&ProtocolConfig::default(), (0.0, 0.0), &[a, b]);
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1].config.epsilon_bob, 0.5);
        assert_eq!(pts[1].attack, (0.0, 1.0));
        assert_eq!(pts[2].config.epsilon_alice, 0.25);
        assert!(Axis::parse_list("epsilon=0.5").is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(trial_seed(1, 0, 0), trial_seed(1, 0, 0));
        assert_ne!(trial_seed(1, 0, 1), trial_seed(1, 1, 0));
        assert_ne!(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
    }

    #[test]
    fn header_matches_record_width() {
        let axes = vec![Axis::parse_list("epsilon=0.5,0.25").unwrap()];
        let pts = grid(
            &ProtocolConfig::new(2000, 0.5).with_samples(10, 10),
            (0.0, 0.0),
            &axes,
        );
        let row = run_point(&pts[0], 0, 3).unwrap();
        assert_eq!(SweepRow::header(&axes).len(), row.record().len());
    }
}

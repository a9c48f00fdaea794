use serde::{Deserialize, Serialize};

use super::sifting::{
    estimate_errors, sift, verdict_naive, verdict_refined, ErrorEstimate, SiftedPartition,
};
use super::wire::{BasisString, EveTrace};
use super::{ProtocolConfig, Verdict};
use crate::adversary::{eve_known_fraction, intercept, BiasedAttackParams, EveRecord};
use crate::bits::BitString;
use crate::error::{QkdError, Result};
use crate::privacy::{
    apply_hash, leakage_bound, make_plan, reconcile_with, sample_toeplitz, AmplificationPlan,
    ReconcileConfig, ToeplitzHash,
};
use crate::quantum::{apply_noise, encode, measure, Basis};
use crate::rng::RandomStream;
use crate::stats::hoeffding_delta;

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionStatus {
    KeyEstablished,
    InsufficientSample {
        basis: Basis,
        available: usize,
        required: usize,
    },
    ErrorRateExceeded,
    ReconciliationFailed,
    PlanNotViable,
}

/// Full record of one protocol run, in pipeline order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub schema_version: u32,
    pub config: ProtocolConfig,
    pub attack: Option<BiasedAttackParams>,
    pub alice_bits: BitString,
    pub alice_bases: BasisString,
    pub bob_bases: BasisString,
    pub bob_outcomes: BitString,
    pub eve_records: Option<EveTrace>,
    pub sifted: SiftedPartition,
    pub estimate: Option<ErrorEstimate>,
    pub verdict_refined: Verdict,
    pub verdict_naive: Verdict,
    pub status: SessionStatus,
    pub raw_key_alice: BitString,
    pub raw_key_bob: BitString,
    pub reconciled_key: Option<BitString>,
    /// Parities revealed during reconciliation.
    pub parity_bits: usize,
    /// Bound on Eve's deterministic information, parities included.
    pub leakage_bits: usize,
    /// Hoeffding deviation used in the leakage bound.
    pub delta: f64,
    /// Realized reconciled length over N.
    pub reconciled_fraction: f64,
    pub plan: Option<AmplificationPlan>,
    pub hash: Option<ToeplitzHash>,
    pub final_key: Option<BitString>,
    pub eve_expected_info_bound: Option<f64>,
}

impl SessionTranscript {
    pub fn sift_fraction(&self) -> f64 {
        self.sifted.sifted_len() as f64 / self.config.n as f64
    }

    pub fn final_key_len(&self) -> usize {
        self.final_key.as_ref().map_or(0, BitString::len)
    }

    pub fn raw_key_len(&self) -> usize {
        self.raw_key_alice.len()
    }

    /// Mismatch counts over the complete rectilinear and diagonal subsets,
    /// sacrificed positions included: `(r_rect, n_rect, r_diag, n_diag)`.
    ///
    /// Only a simulator can compute this; the protocol itself sees samples.
    pub fn population_errors(&self) -> (usize, usize, usize, usize) {
        let count = |idx: &[usize]| {
            idx.iter()
                .filter(|&&i| self.alice_bits.get(i) != self.bob_outcomes.get(i))
                .count()
        };
        (
            count(&self.sifted.rect_indices),
            self.sifted.rect_indices.len(),
            count(&self.sifted.diag_indices),
            self.sifted.diag_indices.len(),
        )
    }

    /// Pooled mismatch rate over every sifted position.
    pub fn population_error_rate(&self) -> f64 {
        let (r1, n1, r2, n2) = self.population_errors();
        (r1 + r2) as f64 / (n1 + n2).max(1) as f64
    }

    /// Fraction of photons where Eve holds Alice's bit deterministically.
    pub fn eve_known_fraction(&self) -> f64 {
        match &self.eve_records {
            Some(trace) => eve_known_fraction(&trace.0, &self.alice_bases.0).unwrap_or(0.0),
            None => 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serialization cannot fail")
    }
}

/// Runs one complete session. Deterministic in `(config, attack)`.
///
/// Each stage draws from its own labeled child of the session seed, and Eve
/// acts on the photon before any basis is announced.
pub fn run_session(
    config: &ProtocolConfig,
    attack: Option<&BiasedAttackParams>,
) -> Result<SessionTranscript> {
    config.validate()?;
    if let Some(a) = attack {
        a.validate()?;
    }
    let n = config.n;
    let root = RandomStream::new(config.seed);
    let mut alice_rng = root.split("alice");
    let mut eve_rng = root.split("eve");
    let mut channel_rng = root.split("channel");
    let mut bob_rng = root.split("bob");
    let mut bob_measure_rng = root.split("bob.measure");

    let mut alice_bits = BitString::new();
    let mut alice_bases = Vec::with_capacity(n);
    let mut bob_bases = Vec::with_capacity(n);
    let mut bob_outcomes = BitString::new();
    let mut eve_records = attack.map(|_| Vec::with_capacity(n));

    for _ in 0..n {
        let basis = Basis::draw(config.epsilon_alice, &mut alice_rng);
        let bit = alice_rng.bit();
        let mut photon = encode(bit, basis);
        if let (Some(params), Some(records)) = (attack, eve_records.as_mut()) {
            let (resent, record): (_, EveRecord) = intercept(photon, params, &mut eve_rng);
            photon = resent;
            records.push(record);
        }
        photon = apply_noise(photon, config.eta, &mut channel_rng)?;
        let bob_basis = Basis::draw(config.epsilon_bob, &mut bob_rng);
        let (outcome, _) = measure(photon, bob_basis, &mut bob_measure_rng);
        alice_bits.push(bit);
        alice_bases.push(basis);
        bob_bases.push(bob_basis);
        bob_outcomes.push(outcome);
    }

    let sifted = sift(&alice_bases, &bob_bases)?;
    let mut sample_rng = root.split("sample");
    let estimate = match estimate_errors(
        &alice_bits,
        &bob_outcomes,
        &sifted,
        config.m1,
        config.m2,
        &mut sample_rng,
    ) {
        Ok(e) => Some(e),
        Err(QkdError::InsufficientSample { .. }) => None,
        Err(e) => return Err(e),
    };

    let sacrificed = estimate.as_ref().map_or(&[][..], |e| &e.sample_indices[..]);
    let (raw_key_alice, raw_key_bob) = raw_keys(&alice_bits, &bob_outcomes, &sifted, sacrificed);

    let mut transcript = SessionTranscript {
        schema_version: TRANSCRIPT_SCHEMA_VERSION,
        config: *config,
        attack: attack.copied(),
        alice_bits,
        alice_bases: BasisString(alice_bases),
        bob_bases: BasisString(bob_bases),
        bob_outcomes,
        eve_records: eve_records.map(EveTrace),
        sifted,
        estimate: None,
        verdict_refined: Verdict::Abort,
        verdict_naive: Verdict::Abort,
        status: SessionStatus::ErrorRateExceeded,
        raw_key_alice,
        raw_key_bob,
        reconciled_key: None,
        parity_bits: 0,
        leakage_bits: 0,
        delta: 0.0,
        reconciled_fraction: 0.0,
        plan: None,
        hash: None,
        final_key: None,
        eve_expected_info_bound: None,
    };

    let Some(estimate) = estimate else {
        let (basis, available, required) = if transcript.sifted.rect_indices.len() < config.m1 {
            (
                Basis::Rectilinear,
                transcript.sifted.rect_indices.len(),
                config.m1,
            )
        } else {
            (
                Basis::Diagonal,
                transcript.sifted.diag_indices.len(),
                config.m2,
            )
        };
        transcript.status = SessionStatus::InsufficientSample {
            basis,
            available,
            required,
        };
        return Ok(transcript);
    };

    transcript.verdict_refined = verdict_refined(&estimate, config.e_max);
    transcript.verdict_naive = verdict_naive(&estimate, config.e_max);
    let error_rate = estimate.e_bar_hat;
    let min_sample = estimate.m1.min(estimate.m2);
    transcript.estimate = Some(estimate);
    if !transcript.verdict_refined.is_accept() {
        transcript.status = SessionStatus::ErrorRateExceeded;
        return Ok(transcript);
    }
    if transcript.raw_key_alice.is_empty() {
        transcript.status = SessionStatus::ReconciliationFailed;
        return Ok(transcript);
    }

    let mut reconcile_rng = root.split("reconcile");
    let outcome = reconcile_with(
        &transcript.raw_key_alice,
        &transcript.raw_key_bob,
        &ReconcileConfig::for_error_rate(error_rate),
        &mut reconcile_rng,
    )?;
    transcript.parity_bits = outcome.leakage_parity_bits;
    let Some(shared) = outcome.shared_key().cloned() else {
        transcript.status = SessionStatus::ReconciliationFailed;
        return Ok(transcript);
    };

    // Both per-basis rates below e_max bound each of Eve's measurement
    // probabilities by 2 e_max, hence her deterministic share of the bits.
    let delta = hoeffding_delta(min_sample, config.delta_failure_prob);
    let leakage = leakage_bound(2.0 * config.e_max, n, delta, outcome.leakage_parity_bits);
    let plan = make_plan(shared.len(), leakage, config.s);
    transcript.delta = delta;
    transcript.leakage_bits = leakage;
    transcript.reconciled_fraction = shared.len() as f64 / n as f64;
    transcript.plan = Some(plan);
    transcript.reconciled_key = Some(shared);

    let Some(out_len) = plan.output_len() else {
        transcript.status = SessionStatus::PlanNotViable;
        return Ok(transcript);
    };
    let reconciled = transcript.reconciled_key.as_ref().expect("set above");
    let mut hash_rng = root.split("hash");
    let hash = sample_toeplitz(reconciled.len(), out_len, &mut hash_rng)?;
    transcript.final_key = Some(apply_hash(&hash, reconciled)?);
    transcript.hash = Some(hash);
    transcript.eve_expected_info_bound = Some(plan.eve_info_bound);
    transcript.status = SessionStatus::KeyEstablished;
    Ok(transcript)
}

fn raw_keys(
    alice_bits: &BitString,
    bob_outcomes: &BitString,
    sifted: &SiftedPartition,
    sacrificed: &[usize],
) -> (BitString, BitString) {
    let mut keep = vec![false; alice_bits.len()];
    for &i in sifted.rect_indices.iter().chain(&sifted.diag_indices) {
        keep[i] = true;
    }
    for &i in sacrificed {
        keep[i] = false;
    }
    let pick = |bits: &BitString| -> BitString {
        bits.iter()
            .zip(&keep)
            .filter_map(|(b, &k)| k.then_some(b))
            .collect()
    };
    (pick(alice_bits), pick(bob_outcomes))
}

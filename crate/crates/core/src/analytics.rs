//! Closed-form error rates, sifting efficiency and key-length planning for
//! the biased intercept-resend attack.
//!
//! Conventions: `epsilon` is the probability of the rectilinear basis,
//! `p1`/`p2` are Eve's rectilinear/diagonal measurement probabilities. Eve's
//! attack produces `e1 = p2 / 2` on the both-rectilinear subset and
//! `e2 = p1 / 2` on the both-diagonal subset, whatever the bias.

use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::protocol::Verdict;

fn check_epsilon(name: &'static str, eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 0.5 {
        Ok(())
    } else {
        Err(QkdError::InvalidConfig(format!(
            "{name} = {eps} must satisfy 0 < {name} <= 1/2"
        )))
    }
}

/// Rectilinear-subset error rate caused by the attack.
pub fn e1_rate(p2: f64) -> f64 {
    p2 / 2.0
}

/// Diagonal-subset error rate caused by the attack.
pub fn e2_rate(p1: f64) -> f64 {
    p1 / 2.0
}

/// Error rate after an independent intra-basis flip with probability `eta`.
pub fn with_channel_noise(rate: f64, eta: f64) -> f64 {
    rate * (1.0 - eta) + (1.0 - rate) * eta
}

/// Pooled error rate of unbiased BB84: `(p1 + p2) / 4`.
pub fn avg_error_bb84(p1: f64, p2: f64) -> f64 {
    (p1 + p2) / 4.0
}

/// Pooled error rate when both parties use bias `epsilon`:
/// `(eps^2 p2 + (1-eps)^2 p1) / (2 [eps^2 + (1-eps)^2])`.
pub fn avg_error_biased(epsilon: f64, p1: f64, p2: f64) -> Result<f64> {
    pooled_error(epsilon, epsilon, p1, p2)
}

/// Pooled error rate for possibly different biases: the per-basis rates
/// weighted by the probability that both parties pick that basis.
pub fn pooled_error(eps_a: f64, eps_b: f64, p1: f64, p2: f64) -> Result<f64> {
    check_epsilon("eps_a", eps_a)?;
    check_epsilon("eps_b", eps_b)?;
    let w_rect = eps_a * eps_b;
    let w_diag = (1.0 - eps_a) * (1.0 - eps_b);
    Ok((w_rect * e1_rate(p2) + w_diag * e2_rate(p1)) / (w_rect + w_diag))
}

/// Probability that Alice's and Bob's bases agree.
pub fn sift_efficiency(eps_a: f64, eps_b: f64) -> f64 {
    eps_a * eps_b + (1.0 - eps_a) * (1.0 - eps_b)
}

/// Smallest bias leaving `m1` expected both-rectilinear photons out of `n`.
pub fn min_epsilon(m1: usize, n: usize) -> Result<f64> {
    if m1 == 0 || m1 > n {
        return Err(QkdError::InvalidConfig(format!(
            "min_epsilon needs 1 <= m1 <= N (m1 = {m1}, N = {n})"
        )));
    }
    Ok((m1 as f64 / n as f64).sqrt())
}

/// Planning estimate of final key length over `n`:
/// `max(0, a - 2 e_max - delta - s / n)` with `a = sift(eps, eps) (1 - a_overhead)`.
///
/// This is an approximation for choosing parameters. The simulator reports
/// the realized reconciled fraction per session.
pub fn expected_key_fraction(
    eps: f64,
    e_max: f64,
    delta: f64,
    s: usize,
    n: usize,
    a_overhead: f64,
) -> f64 {
    let a = sift_efficiency(eps, eps) * (1.0 - a_overhead);
    (a - 2.0 * e_max - delta - s as f64 / n as f64).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub naive: Verdict,
    pub refined: Verdict,
}

impl DetectionRow {
    pub fn disagree(&self) -> bool {
        self.naive != self.refined
    }
}

/// Theoretical verdicts: naive compares the pooled rate against `e_max`,
/// refined compares each per-basis rate.
pub fn detection_table(eps: f64, p1: f64, p2: f64, e_max: f64) -> Result<DetectionRow> {
    let e_bar = avg_error_biased(eps, p1, p2)?;
    Ok(DetectionRow {
        naive: Verdict::from_accept(e_bar < e_max),
        refined: Verdict::from_accept(e1_rate(p2) < e_max && e2_rate(p1) < e_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub epsilon_alice: f64,
    pub epsilon_bob: f64,
    pub p1: f64,
    pub p2: f64,
    pub eta: f64,
    pub e1: f64,
    pub e2: f64,
    pub e_bar: f64,
    pub sift_fraction: f64,
    pub min_epsilon: f64,
}

impl TheoryPoint {
    /// Expected rates for one configuration, including channel noise `eta`.
    pub fn new(
        epsilon_alice: f64,
        epsilon_bob: f64,
        p1: f64,
        p2: f64,
        eta: f64,
        m1: usize,
        n: usize,
    ) -> Result<TheoryPoint> {
        check_epsilon("epsilon_alice", epsilon_alice)?;
        check_epsilon("epsilon_bob", epsilon_bob)?;
        let e1 = with_channel_noise(e1_rate(p2), eta);
        let e2 = with_channel_noise(e2_rate(p1), eta);
        let w_rect = epsilon_alice * epsilon_bob;
        let w_diag = (1.0 - epsilon_alice) * (1.0 - epsilon_bob);
        Ok(TheoryPoint {
            epsilon_alice,
            epsilon_bob,
            p1,
            p2,
            eta,
            e1,
            e2,
            e_bar: (w_rect * e1 + w_diag * e2) / (w_rect + w_diag),
            sift_fraction: sift_efficiency(epsilon_alice, epsilon_bob),
            min_epsilon: min_epsilon(m1.min(n).max(1), n.max(1))?,
        })
    }

    pub fn detection(&self, e_max: f64) -> DetectionRow {
        DetectionRow {
            naive: Verdict::from_accept(self.e_bar < e_max),
            refined: Verdict::from_accept(self.e1 < e_max && self.e2 < e_max),
        }
    }
}

//! Biased intercept-resend eavesdropping.
//!
//! For each photon Eve measures along the rectilinear basis with probability
//! `p1`, along the diagonal basis with probability `p2`, and otherwise lets
//! the photon pass. Measured photons are resent in the collapsed state. Eve
//! sits upstream of channel noise, so a matched-basis measurement reads
//! Alice's bit exactly.

use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::quantum::{measure, Basis, Bit, Polarization};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasedAttackParams {
    p1: f64,
    p2: f64,
}

impl BiasedAttackParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 >= 0.0 && p2 >= 0.0) {
            return Err(QkdError::InvalidAttack(format!(
                "p1 and p2 must be non-negative (p1 = {p1}, p2 = {p2})"
            )));
        }
        if p1 + p2 > 1.0 {
            return Err(QkdError::InvalidAttack(format!(
                "p1 + p2 must not exceed 1 (p1 = {p1}, p2 = {p2})"
            )));
        }
        Ok(Self { p1, p2 })
    }

    pub fn none() -> Self {
        Self { p1: 0.0, p2: 0.0 }
    }

    /// Probability of measuring in the rectilinear basis.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Probability of measuring in the diagonal basis.
    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.p1, self.p2).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveAction {
    MeasuredRectilinear,
    MeasuredDiagonal,
    Passed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EveRecord {
    action: EveAction,
    observed_bit: Option<Bit>,
}

impl EveRecord {
    pub const PASSED: EveRecord = EveRecord {
        action: EveAction::Passed,
        observed_bit: None,
    };

    pub fn measured(basis: Basis, bit: Bit) -> Self {
        let action = match basis {
            Basis::Rectilinear => EveAction::MeasuredRectilinear,
            Basis::Diagonal => EveAction::MeasuredDiagonal,
        };
        Self {
            action,
            observed_bit: Some(bit),
        }
    }

    pub fn action(&self) -> EveAction {
        self.action
    }

    pub fn observed_bit(&self) -> Option<Bit> {
        self.observed_bit
    }

    pub fn basis(&self) -> Option<Basis> {
        match self.action {
            EveAction::MeasuredRectilinear => Some(Basis::Rectilinear),
            EveAction::MeasuredDiagonal => Some(Basis::Diagonal),
            EveAction::Passed => None,
        }
    }

    // Wire symbols: '.' passed, 'h'/'v' rectilinear 0/1, 'p'/'m' diagonal 0/1.
    pub(crate) fn symbol(&self) -> char {
        match (self.action, self.observed_bit) {
            (EveAction::MeasuredRectilinear, Some(false)) => 'h',
            (EveAction::MeasuredRectilinear, Some(true)) => 'v',
            (EveAction::MeasuredDiagonal, Some(false)) => 'p',
            (EveAction::MeasuredDiagonal, Some(true)) => 'm',
            _ => '.',
        }
    }

    pub(crate) fn from_symbol(c: char) -> Option<EveRecord> {
        Some(match c {
            '.' => EveRecord::PASSED,
            'h' => EveRecord::measured(Basis::Rectilinear, false),
            'v' => EveRecord::measured(Basis::Rectilinear, true),
            'p' => EveRecord::measured(Basis::Diagonal, false),
            'm' => EveRecord::measured(Basis::Diagonal, true),
            _ => return None,
        })
    }
}

/// Applies one round of the biased strategy to `photon`. Exactly one uniform
/// draw picks the action; a second draw is used only by a mismatched
/// measurement.
pub fn intercept(
    photon: Polarization,
    params: &BiasedAttackParams,
    rng: &mut RandomStream,
) -> (Polarization, EveRecord) {
    let u = rng.unit();
    let basis = if u < params.p1 {
        Basis::Rectilinear
    } else if u < params.p1 + params.p2 {
        Basis::Diagonal
    } else {
        return (photon, EveRecord::PASSED);
    };
    let (bit, collapsed) = measure(photon, basis, rng);
    (collapsed, EveRecord::measured(basis, bit))
}

/// Fraction of photons on which Eve measured in Alice's basis and therefore
/// holds a deterministic copy of Alice's bit.
pub fn eve_known_fraction(records: &[EveRecord], alice_bases: &[Basis]) -> Result<f64> {
    if records.len() != alice_bases.len() {
        return Err(QkdError::LengthMismatch {
            expected: alice_bases.len(),
            actual: records.len(),
        });
    }
    if records.is_empty() {
        return Ok(0.0);
    }
    let known = records
        .iter()
        .zip(alice_bases)
        .filter(|(r, &b)| r.basis() == Some(b))
        .count();
    Ok(known as f64 / records.len() as f64)
}

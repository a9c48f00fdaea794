//! Parity-block reconciliation with binary-search error location.
//!
//! Pass 1 splits the key into contiguous blocks; later passes shuffle
//! positions with a public permutation. The block size grows by up to 2x per
//! pass, less when the previous pass still found many errors. A block
//! whose parities disagree is bisected until the single odd position is
//! found and Bob flips it. Passes continue until `clean_passes` consecutive
//! passes find no disagreement, then a run of random-subset parity checks
//! verifies the result. A failing check subset is bisected and repaired, and
//! the checks start over.
//!
//! Every parity Alice reveals is counted as leakage, and for each one a
//! pivot position inside the revealed subset is dropped from the output key.

use crate::bits::BitString;
use crate::error::{QkdError, Result};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconcileConfig {
    pub initial_block: usize,
    pub max_passes: usize,
    pub clean_passes: usize,
    pub verify_rounds: usize,
    /// Check failures that may be repaired before giving up.
    pub max_repairs: usize,
}

impl Default for ReconcileConfig {
    fn default() -> Self {
        Self {
            initial_block: 8,
            max_passes: 32,
            clean_passes: 2,
            verify_rounds: 64,
            max_repairs: 32,
        }
    }
}

impl ReconcileConfig {
    /// First-pass block of about `0.73 / error_rate`, so a block holds
    /// roughly one error on average.
    pub fn for_error_rate(error_rate: f64) -> Self {
        let block = if error_rate > 0.0 {
            (0.73 / error_rate).round()
        } else {
            f64::INFINITY
        };
        Self {
            initial_block: block.clamp(8.0, 4096.0) as usize,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconcileOutcome {
    /// Alice's key after dropping pivot positions.
    pub alice_key: BitString,
    /// Bob's corrected key after dropping the same positions.
    pub bob_key: BitString,
    /// Every parity revealed on the public channel, verification included.
    pub leakage_parity_bits: usize,
    pub corrected_positions: usize,
    pub passes: usize,
    pub verified: bool,
}

impl ReconcileOutcome {
    /// The shared key, present only if the final verification passed.
    pub fn shared_key(&self) -> Option<&BitString> {
        (self.verified && !self.alice_key.is_empty()).then_some(&self.alice_key)
    }
}

struct Ledger {
    discarded: Vec<bool>,
    next_free: usize,
    revealed: usize,
}

impl Ledger {
    fn new(len: usize) -> Self {
        Self {
            discarded: vec![false; len],
            next_free: 0,
            revealed: 0,
        }
    }

    // Records one public parity over `subset` and drops a pivot bit for it.
    fn reveal(&mut self, subset: &[usize]) {
        self.revealed += 1;
        if let Some(&p) = subset.iter().find(|&&p| !self.discarded[p]) {
            self.discarded[p] = true;
            return;
        }
        while self.next_free < self.discarded.len() && self.discarded[self.next_free] {
            self.next_free += 1;
        }
        if let Some(slot) = self.discarded.get_mut(self.next_free) {
            *slot = true;
        }
    }
}

/// Binary search for an odd-parity position within `block`, which must hold
/// an odd number of differences. Returns the position and the number of
/// parities revealed during the search (the block parity itself excluded).
pub fn bisect_error(alice: &BitString, bob: &BitString, block: &[usize]) -> (usize, usize) {
    let mut ledger = Ledger::new(alice.len());
    let pos = bisect(alice, bob, block, &mut ledger);
    (pos, ledger.revealed)
}

fn bisect(alice: &BitString, bob: &BitString, block: &[usize], ledger: &mut Ledger) -> usize {
    let mut range = block;
    while range.len() > 1 {
        let (left, right) = range.split_at(range.len().div_ceil(2));
        ledger.reveal(left);
        range = if alice.parity_of(left) != bob.parity_of(left) {
            left
        } else {
            right
        };
    }
    range[0]
}

pub fn reconcile(
    alice: &BitString,
    bob: &BitString,
    rng: &mut RandomStream,
) -> Result<ReconcileOutcome> {
    reconcile_with(alice, bob, &ReconcileConfig::default(), rng)
}

pub fn reconcile_with(
    alice: &BitString,
    bob: &BitString,
    config: &ReconcileConfig,
    rng: &mut RandomStream,
) -> Result<ReconcileOutcome> {
    if alice.len() != bob.len() {
        return Err(QkdError::LengthMismatch {
            expected: alice.len(),
            actual: bob.len(),
        });
    }
    if alice.is_empty() {
        return Err(QkdError::InvalidConfig(
            "cannot reconcile empty keys".into(),
        ));
    }
    let len = alice.len();
    let mut bob = bob.clone();
    let mut ledger = Ledger::new(len);
    let mut order: Vec<usize> = (0..len).collect();
    let max_block = config.initial_block.max(len / 8).max(1);
    let mut corrected = 0;
    let mut clean_run = 0;
    let mut passes = 0;

    let mut block = config.initial_block.clamp(1, max_block).min(len);
    while passes < config.max_passes.max(1) && clean_run < config.clean_passes.max(1) {
        if passes > 0 {
            rng.shuffle(&mut order);
        }
        let mut found = 0;
        for chunk in order.chunks(block) {
            ledger.reveal(chunk);
            if alice.parity_of(chunk) != bob.parity_of(chunk) {
                let pos = bisect(alice, &bob, chunk, &mut ledger);
                bob.flip(pos);
                found += 1;
            }
        }
        corrected += found;
        clean_run = if found == 0 { clean_run + 1 } else { 0 };
        // Aim for about one residual error per two blocks, growing at most 2x.
        let target = if found == 0 {
            usize::MAX
        } else {
            len / (2 * found)
        };
        block = target
            .clamp(block, block.saturating_mul(2))
            .min(max_block)
            .min(len);
        passes += 1;
    }

    // A disagreeing check subset has odd difference parity, so it can be
    // bisected like a block. After a repair the full check is rerun.
    let mut verified = false;
    let mut repairs = 0;
    loop {
        let mut failing = None;
        for _ in 0..config.verify_rounds {
            let subset: Vec<usize> = (0..len).filter(|_| rng.bit()).collect();
            ledger.reveal(&subset);
            if alice.parity_of(&subset) != bob.parity_of(&subset) {
                failing = Some(subset);
                break;
            }
        }
        match failing {
            None => {
                verified = true;
                break;
            }
            Some(_) if repairs >= config.max_repairs => break,
            Some(subset) => {
                let pos = bisect(alice, &bob, &subset, &mut ledger);
                bob.flip(pos);
                corrected += 1;
                repairs += 1;
            }
        }
    }

    let keep = |key: &BitString| -> BitString {
        key.iter()
            .zip(&ledger.discarded)
            .filter_map(|(b, &gone)| (!gone).then_some(b))
            .collect()
    };
    Ok(ReconcileOutcome {
        alice_key: keep(alice),
        bob_key: keep(&bob),
        leakage_parity_bits: ledger.revealed,
        corrected_positions: corrected,
        passes,
        verified: verified && ledger.revealed < len,
    })
}

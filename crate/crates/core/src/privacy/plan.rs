use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

/// Output sizing for privacy amplification: hash `n` reconciled bits, of
/// which Eve knows at most `l` deterministic bits, down to `n - l - s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationPlan {
    pub n: usize,
    pub l: usize,
    pub s: usize,
    /// May be zero or negative; see [`is_viable`](Self::is_viable).
    pub out_len: i64,
    /// Upper bound on Eve's expected information about the output, in bits.
    pub eve_info_bound: f64,
}

impl AmplificationPlan {
    pub fn is_viable(&self) -> bool {
        self.out_len >= 1
    }

    pub fn output_len(&self) -> Option<usize> {
        self.is_viable().then_some(self.out_len as usize)
    }
}

pub fn make_plan(n: usize, l: usize, s: usize) -> AmplificationPlan {
    AmplificationPlan {
        n,
        l,
        s,
        out_len: n as i64 - l as i64 - s as i64,
        eve_info_bound: 2f64.powi(-(s.min(i32::MAX as usize) as i32)) / LN_2,
    }
}

/// `ceil(n_photons * (eve_fraction_cap + delta)) + parity_bits`.
///
/// Products that land within floating-point noise of an integer are taken
/// as that integer, so `1000 * (0.06 + 0.01)` gives 70 rather than 71.
pub fn leakage_bound(
    eve_fraction_cap: f64,
    n_photons: usize,
    delta: f64,
    parity_bits: usize,
) -> usize {
    assert!(eve_fraction_cap >= 0.0 && delta >= 0.0);
    let x = n_photons as f64 * (eve_fraction_cap + delta);
    let nearest = x.round();
    let bits = if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    bits as usize + parity_bits
}

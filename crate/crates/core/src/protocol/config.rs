use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};

fn default_delta_failure_prob() -> f64 {
    1e-6
}

/// Parameters of one session. `epsilon_*` is the probability of choosing the
/// rectilinear basis; 1/2 recovers BB84.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n: usize,
    pub epsilon_alice: f64,
    pub epsilon_bob: f64,
    pub e_max: f64,
    pub m1: usize,
    pub m2: usize,
    pub s: usize,
    pub eta: f64,
    pub seed: u64,
    /// Failure probability of the Hoeffding deviation added to Eve's
    /// information estimate.
    #[serde(default = "default_delta_failure_prob")]
    pub delta_failure_prob: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n: 100_000,
            epsilon_alice: 0.5,
            epsilon_bob: 0.5,
            e_max: 0.03,
            m1: 200,
            m2: 200,
            s: 100,
            eta: 0.0,
            seed: 0,
            delta_failure_prob: default_delta_failure_prob(),
        }
    }
}

impl ProtocolConfig {
    pub fn new(n: usize, epsilon: f64) -> Self {
        Self {
            n,
            epsilon_alice: epsilon,
            epsilon_bob: epsilon,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, m1: usize, m2: usize) -> Self {
        self.m1 = m1;
        self.m2 = m2;
        self
    }

    pub fn with_e_max(mut self, e_max: f64) -> Self {
        self.e_max = e_max;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_security(mut self, s: usize) -> Self {
        self.s = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(QkdError::InvalidConfig(msg));
        for (name, eps) in [
            ("epsilon_alice", self.epsilon_alice),
            ("epsilon_bob", self.epsilon_bob),
        ] {
            if !(eps > 0.0 && eps <= 0.5) {
                return fail(format!("{name} = {eps} violates 0 < {name} <= 1/2"));
            }
        }
        if !(self.e_max >= 0.0 && self.e_max < 0.5) {
            return fail(format!("e_max = {} violates 0 <= e_max < 1/2", self.e_max));
        }
        if self.n < 1 {
            return fail("N = 0 violates N >= 1".into());
        }
        if self.m1 < 1 || self.m2 < 1 {
            return fail(format!(
                "m1 = {}, m2 = {} violate m1, m2 >= 1",
                self.m1, self.m2
            ));
        }
        if self.s < 1 {
            return fail("s = 0 violates s >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return fail(format!("eta = {} violates 0 <= eta <= 1", self.eta));
        }
        if !(self.delta_failure_prob > 0.0 && self.delta_failure_prob < 1.0) {
            return fail(format!(
                "delta_failure_prob = {} violates 0 < delta_failure_prob < 1",
                self.delta_failure_prob
            ));
        }
        Ok(())
    }
}

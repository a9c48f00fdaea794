//! Session orchestration: biased preparation, transmission, sifting,
//! naive and refined error estimation, and key distillation.

mod config;
mod session;
mod sifting;
mod wire;

use serde::{Deserialize, Serialize};

pub use config::ProtocolConfig;
pub use session::{run_session, SessionStatus, SessionTranscript, TRANSCRIPT_SCHEMA_VERSION};
pub use sifting::{
    estimate_errors, sift, verdict_naive, verdict_refined, ErrorEstimate, SiftedPartition,
};
pub use wire::{BasisString, EveTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Abort,
}

impl Verdict {
    pub fn from_accept(accept: bool) -> Verdict {
        if accept {
            Verdict::Accept
        } else {
            Verdict::Abort
        }
    }

    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::Abort => "abort",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

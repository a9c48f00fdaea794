//! Simulation and analysis of BB84 with biased basis choice.
//!
//! Alice and Bob pick the rectilinear basis with a small probability
//! `epsilon`, so most photons survive sifting. To stay secure against an
//! eavesdropper who concentrates on the dominant basis, the accepted data is
//! split by basis and each subset's error rate is tested separately.
//!
//! ```
//! use qkd_core::{run_session, BiasedAttackParams, ProtocolConfig, Verdict};
//!
//! let config = ProtocolConfig::new(200_000, 0.1).with_samples(500, 500).with_seed(7);
//! let eve = BiasedAttackParams::new(0.0, 1.0).unwrap();
//! let t = run_session(&config, Some(&eve)).unwrap();
//! assert_eq!(t.verdict_naive, Verdict::Accept);
//! assert_eq!(t.verdict_refined, Verdict::Abort);
//! ```

pub mod adversary;
pub mod analytics;
pub mod bits;
pub mod error;
pub mod privacy;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod stats;

pub use adversary::{eve_known_fraction, intercept, BiasedAttackParams, EveAction, EveRecord};
pub use analytics::{DetectionRow, TheoryPoint};
pub use bits::BitString;
pub use error::{QkdError, Result};
pub use privacy::{AmplificationPlan, ReconcileConfig, ReconcileOutcome, ToeplitzHash};
pub use protocol::{
    estimate_errors, run_session, sift, verdict_naive, verdict_refined, ErrorEstimate,
    ProtocolConfig, SessionStatus, SessionTranscript, SiftedPartition, Verdict,
};
pub use quantum::{apply_noise, encode, measure, Basis, Bit, Polarization};
pub use rng::RandomStream;

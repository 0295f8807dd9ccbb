//! Link-level simulator for an IRS-assisted high-mobility downlink.
//!
//! A BS serves a user inside a vehicle through a direct Rayleigh-fading link
//! and through a linear refracting surface mounted on the vehicle window. The
//! crate synthesizes frames of block-fading channels ([`channel`]), estimates
//! them ([`estimation`]), runs the two-stage transmission protocol and its
//! benchmarks ([`protocol`]), and aggregates seeded Monte Carlo experiments
//! ([`montecarlo`]). [`cli`] wires this to CSV-producing experiments.
//!
//! ```
//! use irs_mobility::{run_frame, ProtocolScheme, SystemConfig};
//! use rand::SeedableRng;
//!
//! let cfg = SystemConfig { irs_mx: 16, ..SystemConfig::default() };
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let frame = run_frame(&cfg, ProtocolScheme::Proposed, &mut rng).unwrap();
//! assert_eq!(frame.blocks.len(), cfg.blocks_n);
//! assert!(frame.rate_overall > 0.0);
//! ```

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod protocol;

pub use channel::{FrameChannel, RefractionVector, SteeringPhase};
pub use config::{load_config, SystemConfig};
pub use error::{Error, Result};
pub use estimation::{ml_estimate, GridSpec, MlEstimate};
pub use montecarlo::{run_experiment, AggregateResult, EmpiricalCdf, ExperimentSpec, Sweep};
pub use protocol::{run_frame, CsiSource, FrameMetrics, ProtocolScheme, Simulator};

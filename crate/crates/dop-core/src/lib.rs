//! Expected-utility analysis of vote suppression in committee voting games.
//!
//! A round elects a leader by stake, everyone votes, and a reward rule pays
//! each player from what the leader included. An attacker can suppress a
//! single vote in two mirrored ways: omit a victim's vote while leading, or
//! withhold its own vote while the victim leads. Both depress the victim's
//! income at some cost (possibly negative) to the attacker. This crate
//! computes those utilities exactly, derives per-attack damage and cost
//! metrics, provides closed forms for two deployed reward schemes plus a
//! catalog of stylized ones, sweeps and searches over their parameters, and
//! cross-checks everything against a round-by-round Monte Carlo simulator.
//!
//! - [`game`]: distributions, strategy profiles, exact expected utilities.
//! - [`mechanisms`]: stylized reward rules and aggregation feasibility.
//! - [`systems`]: Cosmos-style and Ethereum-style rules with closed-form
//!   attack metrics.
//! - [`metrics`]: effectiveness and cost of an attack, robustness scans,
//!   and the exact identities tying mirrored attacks together.
//! - [`analysis`]: grid sweeps and minimal-bonus searches.
//! - [`simulator`]: seeded per-round sampling with closed-form comparison.

pub mod analysis;
mod error;
pub mod game;
pub mod mechanisms;
pub mod metrics;
pub mod simulator;
pub mod systems;

pub use error::{Error, Result};
pub use game::{AttackKind, PowerDistribution, RewardFunction, StrategyProfile};
pub use metrics::AttackMetrics;
pub use systems::RewardSpec;

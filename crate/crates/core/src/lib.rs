//! Greedy collective Parrondo games.
//!
//! A population of players each holds a capital; at every turn a fraction
//! `phi` of them plays either game A (a fair coin) or game B (a coin that
//! depends on capital mod 3, tuned by `rho`). The greedy strategy picks the
//! game with the larger expected average profit. Tracking the distribution
//! of capitals mod 3 turns this into a piecewise-linear map on the simplex,
//! which either settles on the stationary point of game B or falls into a
//! limit cycle of game patterns `[1,n]` or `[1,n,1,n-2]`.
//!
//! - [`model`]: parameters, transition matrices, spectral data.
//! - [`dynamics`]: the greedy map, trajectories and behaviour detection.
//! - [`classifier`]: closed-form predictions and boundary curves.
//! - [`profit`]: asymptotic average profit per turn.
//! - [`oracle`]: brute-force simulation checked against predictions.

pub mod classifier;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod profit;

pub use dynamics::{BehaviorKind, DetectedBehavior, GamePattern, Letter, Trajectory};
pub use error::{Error, Result};
pub use model::{Matrix3, Params, PhiBand, SimplexPoint, SpectralData, TransitionMatrix};
pub use numerics::{certified_sign, PrecisionConfig, Real, Sign};
pub use rug;

//! Expanding search on rooted networks: bridge-block decomposition, the
//! block-optimal and bridge-optimal searcher strategies, lower bounds on the game
//! value, closed-form families, and a small exact game solver for cross-checks.
//!
//! All lengths, times and probabilities are exact rationals.

pub mod analytic;
pub mod block_strategy;
pub mod bounds;
pub mod bridge_strategy;
pub mod decomposition;
pub mod fixtures;
pub mod network;
pub mod oracle;
pub mod ratio;
pub mod search;
pub mod tree_game;

use thiserror::Error;

pub use decomposition::{decompose, Decomposition};
pub use network::{ArcIx, NetworkBuilder, NodeIx, Point, RootedNetwork};
pub use oracle::{oracle_value, MatrixGame, OracleConfig, OracleResult};
pub use ratio::Rational;
pub use search::{Direction, HiderDistribution, Lottery, MixedStrategy, PureSearch, Step, Strategy};

/// Any error the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Network(#[from] network::NetworkError),
    #[error(transparent)]
    Search(#[from] search::SearchError),
    #[error(transparent)]
    Tree(#[from] tree_game::TreeError),
    #[error(transparent)]
    Block(#[from] block_strategy::BlockError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
    #[error(transparent)]
    Fixture(#[from] fixtures::FixtureError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

//! Low-rank semidefinite relaxations for pairwise `k`-class Markov random
//! fields: mode finding by coordinate ascent and randomized rounding,
//! partition-function estimation, an annealed importance sampling baseline,
//! exact enumeration for small instances and dense-CRF segmentation.

pub mod ais;
pub mod error;
pub mod experiment;
pub mod exact;
pub mod generate;
pub mod io;
pub mod logspace;
pub mod mixing;
pub mod mixing_plus;
pub mod mrf;
pub mod partition;
pub mod rng;
pub mod rounding;
pub mod segmentation;
pub mod simplex;

pub use error::{Error, Result};
pub use mrf::{Configuration, EmbeddingMap, MrfInstance};
pub use simplex::SimplexFrame;

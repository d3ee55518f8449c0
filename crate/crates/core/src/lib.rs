//! Topological and band-power feature extraction for multichannel time
//! series, tree-ensemble classifiers, and Gaussian-process hyperparameter
//! search.
//!
//! The crate is organised as a pipeline:
//!
//! * [`signal`]: recordings, CAR and Butterworth filtering, epoching
//! * [`bandpower`]: log band-power features
//! * [`takens`]: delay embedding of epochs into point clouds
//! * [`persistence`]: Vietoris–Rips persistent homology (H0, H1)
//! * [`diagram_features`]: the 18 topological features of a diagram
//! * [`learn`]: classifiers, stratified CV, feature importance
//! * [`hyperopt`]: Bayesian optimization with a GP surrogate
//! * [`synth`] and [`pipeline`]: synthetic sessions and end-to-end runs

pub mod bandpower;
pub mod diagram_features;
pub mod error;
pub mod hyperopt;
pub mod learn;
pub mod persistence;
pub mod pipeline;
pub mod signal;
pub mod synth;
pub mod takens;

pub use error::{Error, Result};

//! Microwave breast-tumour detection via empirical mode decomposition features.
//!
//! The crate implements the full desk-scale detection pipeline:
//!
//! - [`signal`]: scan/time-series data model, windowing, antenna-pair
//!   filtering and NDJSON scan I/O,
//! - [`emd`]: empirical mode decomposition by iterative sifting,
//! - [`features`]: per-IMF statistics and train-fitted min-max normalization,
//! - [`pca`]: per-antenna-pair principal component scores,
//! - [`tumor`]: Debye dielectric model and frequency-domain tumour-response
//!   injection,
//! - [`dataset`]: synthetic clinical-like scan generation and the
//!   66-split training/testing protocol,
//! - [`svm`]: cost-sensitive 2nu-SVM with an SMO solver,
//! - [`ensemble`]: base-model library construction and Neyman-Pearson
//!   ensemble selection,
//! - [`eval`]: metrics, ROC/AUC sweeps and the experiment driver,
//! - [`config`]: key=value experiment configuration.

pub mod config;
pub mod dataset;
pub mod emd;
pub mod ensemble;
pub mod eval;
pub mod features;
pub mod pca;
pub mod signal;
pub mod svm;
pub mod tumor;


pub use signal::{AntennaPairId, Label, Scan, Side, TimeSeries, WindowSpec};

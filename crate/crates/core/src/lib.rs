//! Sequential model-based optimization for hyperparameter tuning.
//!
//! The crate covers the full tuning workflow:
//!
//! * [`space`] — mixed-type search spaces (numeric, integer, factor) with
//!   unit-cube encoding and repair,
//! * [`design`] — Latin hypercube, random and full-factorial designs,
//! * [`surrogate`] — Kriging with a Gaussian correlation kernel, maximum
//!   likelihood fitting and the expected-improvement criterion,
//! * [`tuner`] — the sequential optimization loop plus random/grid baselines,
//! * [`evaluation`] — train/validation/test protocols, k-fold CV and an
//!   external-process objective,
//! * [`mlp`] — a bundled two-hidden-layer dropout network trained with
//!   RMSProp on an 8×8 digits corpus, usable as a realistic demo objective,
//! * [`analysis`] — post-hoc statistics: summaries, OLS with inference,
//!   regression trees, importance scores, contour grids and box-plot data.
//!
//! Every operation is deterministic under a fixed seed.

pub mod analysis;
pub mod data;
pub mod design;
pub mod evaluation;
pub mod mlp;
pub mod optim;
pub mod space;
pub mod surrogate;
pub mod tuner;

pub use data::Dataset;
pub use design::Design;
pub use space::{Config, ParamKind, ParamSpec, ParamValue, Scale, SearchSpace};
pub use surrogate::{expected_improvement, KrigingModel, Prediction};
pub use tuner::{Archive, ControlConfig, TunerResult};

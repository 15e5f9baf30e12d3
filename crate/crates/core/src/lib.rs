//! Calibrated alternative explanations with uncertainty-aware triage.
//!
//! The crate is organised bottom-up:
//!
//! * [`calibration`]: pool-adjacent-violators isotonic regression, Venn-Abers
//!   probability intervals and conformal predictive distributions.
//! * [`model`]: a seeded random forest and an adapter for externally supplied
//!   scores.
//! * [`data`]: CSV ingestion, deterministic splitting and synthetic generators
//!   with known ground truth.
//! * [`explainer`]: factual and alternative explanations by single-feature
//!   perturbation, plus pairwise conjunctions.
//! * [`triage`]: the counter/semi/super x factual/potential taxonomy, the
//!   ensured flag, feasible-region geometry and ranking.
//! * [`report`]: JSON/CSV/SVG emission and the command drivers behind the
//!   `ensured` binary.
//!
//! ```
//! use ensured::calibration::{regularise, VennAbers};
//!
//! let va = VennAbers::new(&[0.1, 0.3, 0.5, 0.7, 0.9], &[0, 1, 0, 1, 1]).unwrap();
//! let p = va.predict(0.6).unwrap();
//! assert!((p.low - 1.0 / 3.0).abs() < 1e-12);
//! assert!((p.high - 1.0).abs() < 1e-12);
//! assert!((p.estimate - regularise(p.low, p.high).unwrap()).abs() < 1e-12);
//! ```

pub mod calibration;
pub mod data;
mod error;
pub mod explainer;
pub mod model;
pub mod report;
pub mod triage;

pub use error::{Error, Result};

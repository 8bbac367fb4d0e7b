//! Vehicle detection in satellite video.
//!
//! The pipeline: register frames to a common reference ([`register`]), cut
//! the scene into tiles and assemble temporal frame stacks ([`dataio`]),
//! regress per-pixel vehicle-likelihood heatmaps with a small CNN
//! ([`model`], trained by [`train`] against [`targets`]), extract point
//! detections ([`postprocess`]), and score them against point ground truth
//! ([`evaluate`]). [`synth`] generates seeded synthetic videos with exact
//! ground truth so every stage is testable without real imagery.
//!
//! Everything downstream of a seed is deterministic: same inputs, same
//! seeds, same bytes out.

pub mod dataio;
pub mod error;
pub mod evaluate;
pub mod frame;
pub mod heatmap;
pub mod model;
pub mod postprocess;
pub mod register;
pub mod seeds;
pub mod synth;
pub mod targets;
pub mod train;

pub use error::{Error, Result};
pub use frame::{Gray16Frame, GrayFrame};
pub use heatmap::Heatmap;

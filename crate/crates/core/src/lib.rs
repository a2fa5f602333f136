//! Converts binary segmentation masks into instance label maps.
//!
//! The crate combines marker-based watershed, Zhang–Suen thinning and
//! morphological splitting with convexity-defect split lines that are
//! aligned to the region skeleton and accepted through a length interval
//! found by bisection against a target object count. A per-image grid
//! search ([`tuner`]) picks the configuration whose count best matches a
//! reference, and [`metrics`] scores count agreement.
//!
//! Stages, bottom-up:
//!
//! - [`raster`]: masks, label maps, PNG I/O
//! - [`morphops`]: erosion, dilation, components, chamfer distance
//! - [`skeleton`], [`watershed`], [`contours`]: classical splitters and geometry
//! - [`splitter`]: split-line proposal, alignment, length bisection, carving
//! - [`pipeline`]: one mask, one configuration
//! - [`tuner`], [`metrics`], [`synthgen`]: search, scoring, synthetic scenes

pub mod contours;
pub mod error;
mod grow;
pub mod metrics;
pub mod morphops;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod skeleton;
pub mod splitter;
pub mod synthgen;
pub mod tuner;
pub mod watershed;

pub use error::{Error, Result};
pub use pipeline::{convert, Method, MixParams, PipelineConfig};
pub use raster::{LabelMap, Mask};

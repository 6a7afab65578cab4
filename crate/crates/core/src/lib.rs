//! Planning and evaluation for robot-to-human object handover.

pub mod contacts;
pub mod delivery;
pub mod ergonomics;
pub mod error;
pub mod geometry;
pub mod grasping;
pub mod harness;
pub mod metrics;
pub mod voxel;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/voxels.md")]
    mod voxels {}
    #[doc = include_str!("../../../book/src/contacts.md")]
    mod contacts {}
    #[doc = include_str!("../../../book/src/grasping.md")]
    mod grasping {}
    #[doc = include_str!("../../../book/src/ergonomics.md")]
    mod ergonomics {}
    #[doc = include_str!("../../../book/src/delivery.md")]
    mod delivery {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}

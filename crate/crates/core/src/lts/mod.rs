//! Labelled transition semantics.

pub mod action;
pub mod explore;
pub mod harness;
pub mod steps;

pub use action::{Action, ActionKind};
pub use explore::{explore_lts, LtsGraph};
pub use harness::{bisim_probe, correspondence_check, BisimReport, CorrespondenceReport, Mismatch};
pub use steps::{labelled_steps, labelled_steps_with, top_steps, top_steps_with, FuseRule, LabelledStep};
pub use crate::reduction::local_minimal;

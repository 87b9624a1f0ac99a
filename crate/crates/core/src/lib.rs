//! Bearing-only localization and safe circumnavigation of stationary targets.
//!
//! Each agent measures only the unit bearing toward every target. A scalar
//! compensator per target reconstructs the range, the agent steers around the
//! minimum circle enclosing the estimated targets, and several agents spread
//! themselves evenly along their orbits.

pub mod controller;
pub mod estimator;
pub mod geometry;
pub mod multiagent;
pub mod presets;
pub mod sim;

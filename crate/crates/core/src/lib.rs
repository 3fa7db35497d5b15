//! Quantum speed limits, entropy continuity bounds and bounds on the rate of
//! information production, with the damped Jaynes-Cummings model as an exactly
//! solvable test bed.

pub mod distances;
pub mod dynamics;
pub mod entropy;
pub mod matcore;
pub mod qsl;
pub mod report;
pub mod sweep;
pub mod units;

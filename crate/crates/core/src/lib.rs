//! Distributed preparation of GHZ states from pre-shared EPR pairs and
//! entangled sub-groups, under local operations and classical communication.

pub mod cli;
pub mod locc;
pub mod protocols;
pub mod statevec;
pub mod topology;

//! Exact enumeration and asymptotics of rooted binary phylogenetic networks
//! with a fixed number of reticulations.

pub mod algfun;
pub mod asymptotics;
pub mod blocks;
pub mod catalog;
pub mod closed_forms;
pub mod expr;
pub mod jet;
pub mod oracle;
pub mod poly;
pub mod qsqrt2;
pub mod series;
pub mod stdform;
pub mod table;
pub mod verify;

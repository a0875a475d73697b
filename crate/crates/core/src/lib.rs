//! Superconducting circuit design: lumped-element loops and capacitively
//! coupled chains, their quantization and spectra, and genetic search over
//! topologies and component values.

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod dynamics;
pub mod format;
pub mod ga;
pub mod linalg;
pub mod network;
pub mod objectives;
pub mod parallel;
pub mod presets;
pub mod quantize;
pub mod spectrum;
pub mod units;

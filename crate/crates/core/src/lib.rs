//! Settling time of mesochronous clock-retiming loops: absorbing Markov
//! chain models of the bang-bang loop under data jitter, a behavioral
//! Monte Carlo simulator to check them, and the startup-time reduction
//! techniques built on both.

pub mod jitter;
pub mod loop_model;
pub mod markov;
pub mod par;
pub mod reduction;
pub mod sim;
pub mod stats;

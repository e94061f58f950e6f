//! Switch-level and behavioral simulation of TSPC phase frequency detectors.
//!
//! The crate has four layers:
//!
//! * [`netlist`] — transistor netlist parsing, validation, channel-connected
//!   component decomposition, and the built-in 20-transistor reference PFD;
//! * [`sim`] — event-driven switch-level simulation with charge-retaining
//!   dynamic nodes and bit-exact waveform export;
//! * [`pfd`] — the behavioral tri-state PFD with parameterized dead zone,
//!   reset delay, and blind-zone window;
//! * [`loopsim`] / [`measure`] — PLL/DLL loop simulation and the measurement
//!   drivers (transfer sweeps, dead/blind-zone search, pulse statistics,
//!   Monte-Carlo variation, PVT scaling, and activity counting).

pub mod netlist;
pub mod pfd;
pub mod loopsim;
pub mod measure;
pub mod sim;

pub use netlist::{
    build_reference_pfd, channel_connected_components, parse_netlist, validate, Netlist,
};
pub use sim::{compile, run, Bit, LogicValue, SimModel, Stimulus, WaveformSet};

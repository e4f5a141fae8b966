//! Time-varying capacitor emulation of arbitrary one-port networks.
//!
//! A capacitor whose capacitance is driven as a prescribed function of time
//! carries the current `d/dt[C(t) v(t)]`. Choosing `C(t)` from the voltage
//! across it (and, for inductive targets, the current through it) makes that
//! current identical to the current of a target network: a static capacitor,
//! resistor or lossy inductor of any sign, a general causal LTI admittance,
//! or a weakly nonlinear network described by a second-order Volterra kernel.
//!
//! The crate is organized bottom-up:
//!
//! - [`signals`]: sampled waveforms and the calculus used everywhere else.
//! - [`kernels`]: first- and second-order admittance kernels and their
//!   convolution with a voltage history.
//! - [`modsynth`]: synthesis of `C(t)` with automatic selection of the free
//!   constant that keeps the profile positive.
//! - [`circuitsim`]: fixed-step RK4 simulation of the driven RC circuits and
//!   analytic steady-state references for the equivalent elements.
//! - [`stability`]: circle-criterion verdicts for the first-order charge
//!   equation and the transient law of ideal non-Foster capacitors.
//! - [`sheetsim`]: the invisible metasurface sensor, as a zero-thickness
//!   sheet and as a 1D FDTD model with finite-thickness slabs.
//! - [`scenario`]: declarative JSON scenarios, reports and the bundled
//!   reproduction suite driven by the `tvcap` binary.

pub mod circuitsim;
pub mod consts;
mod error;
pub mod kernels;
pub mod modsynth;
pub mod scenario;
pub mod sheetsim;
pub mod signals;
pub mod stability;

pub use error::{Error, Result};

//! Free-space constants (SI).

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permeability, H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// Free-space intrinsic impedance, ohm.
pub const ETA0: f64 = MU0 * SPEED_OF_LIGHT;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 1.0 / (MU0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT);

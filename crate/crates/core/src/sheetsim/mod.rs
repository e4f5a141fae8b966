//! The invisible time-modulated metasurface sensor.
//!
//! A sheet made of a static capacitance `C0` in parallel with a resistance
//! `R0` absorbs part of an incident plane wave and reflects the rest. A
//! second, time-varying layer `C_C(t) + C_R(t)` is stacked on it so that the
//! combined sheet current vanishes: `C_C` cancels `C0` and `C_R` emulates the
//! negative resistance `-R0`. The wave then passes as if nothing were there
//! while `R0` keeps absorbing.
//!
//! Two models are provided: a zero-thickness sheet boundary condition
//! ([`simulate_sheet`]) and a 1D FDTD run with finite-thickness dielectric
//! slabs standing in for the capacitive layers ([`simulate_fdtd`]).

mod fdtd;
mod power;
mod sheet;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use crate::consts::{ETA0, SPEED_OF_LIGHT};
use crate::signals::{fmt_f64, fit_harmonic, HarmonicSignal, Phasor, Waveform};
use crate::{Error, Result};

pub use fdtd::{simulate_fdtd, vacuum_pulse_error, FDTD_MIN_CELLS_PER_SLAB};
pub use power::{compare_variants, energy_balance, power_balance, EnergyBalance, PairDifference, PowerReport, VariantReport};
pub(crate) use power::max_difference;
pub use sheet::{simulate_sheet, static_reflection, stop_times, synth_sensor_modulation, SensorModulation, StopTimes};

/// Constant multiplying `C0` in the default `c1` (V/m).
pub const DEFAULT_C1_FIELD: f64 = 7.0;
/// Default `c2 / c1`.
pub const DEFAULT_C2_RATIO: f64 = 14.0;
/// Fraction of the `C_R` zero crossing used as the default run end.
pub const STOP_FRACTION: f64 = 0.9;
/// Relative tolerance on the slab capacitance identity.
pub const C_EFF_TOLERANCE: f64 = 1e-3;

/// `E_in(t) = E_DC + E0 sin(omega t)` at the sheet plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSource {
    pub e_dc: f64,
    pub e0: f64,
    pub omega: f64,
}

impl PlaneWaveSource {
    pub fn new(e_dc: f64, e0: f64, omega: f64) -> Result<Self> {
        if !(e0 >= 0.0 && e_dc > e0 && e_dc.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "plane-wave source needs E_DC > E0 >= 0, got E_DC = {e_dc}, E0 = {e0}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Ok(Self { e_dc, e0, omega })
    }

    pub fn from_frequency(e_dc: f64, e0: f64, freq_hz: f64) -> Result<Self> {
        Self::new(e_dc, e0, 2.0 * PI * freq_hz)
    }

    pub fn field(&self, t: f64) -> f64 {
        self.e_dc + self.e0 * (self.omega * t).sin()
    }

    /// `int_0^t E_in`.
    pub fn integral(&self, t: f64) -> f64 {
        self.e_dc * t + self.e0 / self.omega * (1.0 - (self.omega * t).cos())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn frequency(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT * self.period()
    }

    /// The same field as a cosine-referenced harmonic signal.
    pub fn harmonic(&self) -> HarmonicSignal {
        HarmonicSignal { v_dc: self.e_dc, v_ac: self.e0, omega: self.omega, phi: -PI / 2.0 }
    }

    pub fn sample(&self, t0: f64, dt: f64, n: usize) -> Result<Waveform> {
        Waveform::from_fn(t0, dt, n, "V/m", |t| self.field(t))
    }
}

/// Physical realization of the two-layer sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// (a) two stacked patch arrays.
    TwoPatchArrays,
    /// (b) patches on a thin dielectric substrate.
    PatchesOnSubstrate,
    /// (c) two thin dielectric slabs with a resistive sheet between them.
    TwoDielectricSlabs,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::TwoPatchArrays => "a",
            Variant::PatchesOnSubstrate => "b",
            Variant::TwoDielectricSlabs => "c",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a" | "two-patch-arrays" => Some(Variant::TwoPatchArrays),
            "b" | "patches-on-substrate" => Some(Variant::PatchesOnSubstrate),
            "c" | "two-dielectric-slabs" => Some(Variant::TwoDielectricSlabs),
            _ => None,
        }
    }

    fn uses_dielectric(&self) -> bool {
        !matches!(self, Variant::TwoPatchArrays)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Slab capacitance per square, `(eps_r - 1) d / (eta0 c0)`.
pub fn effective_capacitance(eps_r: f64, d: f64) -> f64 {
    (eps_r - 1.0) * d / (ETA0 * SPEED_OF_LIGHT)
}

/// Relative permittivity giving capacitance `c` per square at thickness `d`.
pub fn permittivity_for(c: f64, d: f64) -> f64 {
    1.0 + c * ETA0 * SPEED_OF_LIGHT / d
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetSpec {
    /// Static sheet capacitance per square, F.
    pub c0: f64,
    /// Sheet resistance per square; `None` removes the absorber.
    pub r0: Option<f64>,
    /// `c1` in F*V/m; defaults to `7 V/m * C0`.
    pub c1: Option<f64>,
    /// `c2` in F*V/m; defaults to `14 c1`.
    pub c2: Option<f64>,
    pub variant: Variant,
    /// Thickness of each layer, m.
    pub d: f64,
    /// Relative permittivity of the static slab.
    pub eps_r: f64,
    pub source: PlaneWaveSource,
    /// Time steps per source period for the sheet model and for records.
    pub steps_per_period: usize,
    /// FDTD cells across each slab.
    pub cells_per_slab: usize,
    /// FDTD Courant number `c dt / dz`.
    pub courant: f64,
}

impl SheetSpec {
    /// Nominal parameters: 10 fF, 1000 ohm, 4 + sin V/m at 100 GHz, slabs of
    /// thickness lambda/400 with eps_r = 151.7.
    pub fn nominal(variant: Variant) -> Self {
        let source = PlaneWaveSource::from_frequency(4.0, 1.0, 100e9).expect("valid constants");
        Self {
            c0: 10e-15,
            r0: Some(1000.0),
            c1: None,
            c2: None,
            variant,
            d: source.wavelength() / 400.0,
            eps_r: 151.7,
            source,
            steps_per_period: crate::signals::DEFAULT_STEPS_PER_PERIOD,
            cells_per_slab: 20,
            courant: 1.0,
        }
    }

    /// Changes the layer thickness while keeping the slab capacitance.
    pub fn with_thickness(mut self, d: f64) -> Self {
        let c = effective_capacitance(self.eps_r, self.d);
        self.d = d;
        self.eps_r = permittivity_for(c, d);
        self
    }

    pub fn c1(&self) -> f64 {
        self.c1.unwrap_or(DEFAULT_C1_FIELD * self.c0)
    }

    pub fn c2(&self) -> f64 {
        self.c2.unwrap_or(DEFAULT_C2_RATIO * self.c1())
    }

    pub fn c_eff(&self) -> f64 {
        effective_capacitance(self.eps_r, self.d)
    }

    /// `1/R0`, zero without an absorber.
    pub fn conductance(&self) -> f64 {
        self.r0.map_or(0.0, |r| 1.0 / r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 >= 0.0 && self.c0.is_finite()) {
            return Err(Error::InvalidParameter(format!("C0 must be non-negative, got {}", self.c0)));
        }
        if let Some(r) = self.r0 {
            if !(r > 0.0) {
                return Err(Error::NonpositiveResistance(r));
            }
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if let Some(c) = c {
                if !c.is_finite() {
                    return Err(Error::InvalidParameter(format!("{name} must be finite, got {c}")));
                }
            }
        }
        let lambda = self.source.wavelength();
        if !(self.d > 0.0 && self.d <= lambda / 100.0) {
            return Err(Error::InvalidParameter(format!(
                "layer thickness d = {} m must be positive and at most lambda/100 = {} m",
                self.d,
                lambda / 100.0
            )));
        }
        if self.variant.uses_dielectric() {
            let c_eff = self.c_eff();
            if (c_eff - self.c0).abs() > C_EFF_TOLERANCE * self.c0 {
                return Err(Error::InvalidParameter(format!(
                    "slab capacitance (eps_r - 1) d / (eta0 c0) = {c_eff:e} F differs from C0 = {:e} F by more than 0.1%",
                    self.c0
                )));
            }
        }
        if self.steps_per_period < 16 {
            return Err(Error::InvalidParameter(format!(
                "steps_per_period must be at least 16, got {}",
                self.steps_per_period
            )));
        }
        Ok(())
    }

    /// Default run end: 90% of the time at which `C_R` reaches zero, or 20
    /// periods without an absorber.
    pub fn default_t_end(&self) -> Result<f64> {
        let m = sheet::stop_times(self)?;
        Ok(if m.cr_zero.is_finite() { STOP_FRACTION * m.cr_zero } else { 20.0 * self.source.period() })
    }

    /// Same source and sheet parameters, ignoring realization and grids.
    pub fn same_drive(&self, other: &SheetSpec) -> bool {
        self.source == other.source
            && self.c0 == other.c0
            && self.r0 == other.r0
            && self.c1() == other.c1()
            && self.c2() == other.c2()
    }
}

/// Current and power of one layer, per unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    /// Surface current, A/m.
    pub j: Waveform,
    /// Absorbed power `E J`, W/m^2.
    pub p: Waveform,
}

/// Fields at the probes one wavelength above and below the sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProbeRecord {
    pub source: PlaneWaveSource,
    pub modulation_on: bool,
    pub e_above: Waveform,
    pub e_below: Waveform,
    pub e_incident_above: Waveform,
    pub e_incident_below: Waveform,
    /// Total field at the sheet plane.
    pub e_sheet: Waveform,
    pub j_total: Waveform,
    /// `C0` with `R0`.
    pub static_layer: LayerTrace,
    /// `C_C + C_R`.
    pub tv_layer: LayerTrace,
    pub diverged: Option<f64>,
}

impl FieldProbeRecord {
    pub fn scattered_above(&self) -> Result<Waveform> {
        self.e_above.sub(&self.e_incident_above)
    }

    pub fn scattered_below(&self) -> Result<Waveform> {
        self.e_below.sub(&self.e_incident_below)
    }

    /// Largest `|E - E_in|` over both probes at `t >= t_from`, in units of E0
    /// (of E_DC when E0 is zero).
    pub fn residual(&self, t_from: f64) -> Result<f64> {
        let scale = if self.source.e0 > 0.0 { self.source.e0 } else { self.source.e_dc };
        let mut worst = 0.0_f64;
        for w in [self.scattered_above()?, self.scattered_below()?] {
            let start = w.index_at_or_after(t_from);
            if start >= w.len() {
                return Err(Error::WindowTooShort { periods: 0.0, required: 1 });
            }
            worst = w.samples()[start..].iter().fold(worst, |m, x| m.max(x.abs()));
        }
        Ok(worst / scale)
    }

    /// AC reflection coefficient at the upper probe.
    pub fn reflection(&self, t_from: f64) -> Result<Phasor> {
        let fit = fit_harmonic(&self.scattered_above()?, self.source.omega, t_from)?;
        let inc = fit_harmonic(&self.e_incident_above, self.source.omega, t_from)?;
        Ok(Phasor::from_complex(fit.phasor.to_complex() / inc.phasor.to_complex(), self.source.omega))
    }

    /// AC transmission coefficient at the lower probe.
    pub fn transmission(&self, t_from: f64) -> Result<Phasor> {
        let fit = fit_harmonic(&self.e_below, self.source.omega, t_from)?;
        let inc = fit_harmonic(&self.e_incident_below, self.source.omega, t_from)?;
        Ok(Phasor::from_complex(fit.phasor.to_complex() / inc.phasor.to_complex(), self.source.omega))
    }

    /// Probe CSV: `t,e_above,e_incident_above,e_below,e_incident_below`.
    pub fn write_probe_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "e_above", "e_incident_above", "e_below", "e_incident_below"])?;
        for k in 0..self.e_above.len() {
            w.write_record([
                fmt_f64(self.e_above.time(k)),
                fmt_f64(self.e_above.samples()[k]),
                fmt_f64(self.e_incident_above.samples()[k]),
                fmt_f64(self.e_below.samples()[k]),
                fmt_f64(self.e_incident_below.samples()[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Layer CSV: `t,j_static,p_static,j_tv,p_tv`.
    pub fn write_layer_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "j_static", "p_static", "j_tv", "p_tv"])?;
        let (s, v) = (&self.static_layer, &self.tv_layer);
        for k in 0..s.j.len() {
            w.write_record([
                fmt_f64(s.j.time(k)),
                fmt_f64(s.j.samples()[k]),
                fmt_f64(s.p.samples()[k]),
                fmt_f64(v.j.samples()[k]),
                fmt_f64(v.p.samples()[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slab_capacitance_identity() {
        let spec = SheetSpec::nominal(Variant::TwoDielectricSlabs);
        assert_relative_eq!(spec.c_eff(), 10e-15, max_relative = 5e-3);
        spec.validate().unwrap();
        let thin = spec.clone().with_thickness(spec.d / 2.0);
        assert_relative_eq!(thin.c_eff(), spec.c_eff(), max_relative = 1e-12);
        thin.validate().unwrap();
    }

    #[test]
    fn spec_validation() {
        let mut spec = SheetSpec::nominal(Variant::PatchesOnSubstrate);
        spec.eps_r = 160.0;
        assert!(matches!(spec.validate(), Err(Error::InvalidParameter(_))));
        spec.variant = Variant::TwoPatchArrays;
        spec.validate().unwrap();
        spec.d = spec.source.wavelength() / 50.0;
        assert!(spec.validate().is_err());
        let mut spec = SheetSpec::nominal(Variant::TwoPatchArrays);
        spec.r0 = Some(0.0);
        assert_eq!(spec.validate(), Err(Error::NonpositiveResistance(0.0)));
        assert!(PlaneWaveSource::new(1.0, 1.0, 1.0).is_err());
        assert!(PlaneWaveSource::new(1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn source_integral_matches_quadrature() {
        let s = PlaneWaveSource::from_frequency(4.0, 1.0, 100e9).unwrap();
        let w = s.sample(0.0, s.period() / 2000.0, 3001).unwrap();
        let q = crate::signals::cumulative_integral(&w, 0.0);
        let t = w.end_time();
        assert_relative_eq!(*q.samples().last().unwrap(), s.integral(t), max_relative = 1e-7);
        let h = s.harmonic();
        assert_relative_eq!(h.value(0.3e-11), s.field(0.3e-11), epsilon = 1e-12);
    }
}

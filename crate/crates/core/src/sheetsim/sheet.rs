//! Zero-thickness sheet model.
//!
//! The tangential field at the sheet satisfies
//! `E = E_in - (eta0/2) J` with `J = d/dt[C_tot E] + E/R0`; in terms of the
//! sheet charge `Q = C_tot E`,
//!
//! `dQ/dt = (2/eta0) E_in - Q (2/eta0 + 1/R0) / C_tot`.

use num_complex::Complex64;

use super::{FieldProbeRecord, LayerTrace, PlaneWaveSource, SheetSpec};
use crate::consts::ETA0;
use crate::modsynth::{synth_capacitance, synth_resistance, FreeConstant, ModulationProfile};
use crate::signals::{derivative, Waveform};
use crate::{Error, Result};

/// Modulation of the time-varying layer, sampled and in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModulation {
    pub source: PlaneWaveSource,
    pub c0: f64,
    pub r0: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    /// `C_C(t) = c1 / E_in - C0`.
    pub c_c: ModulationProfile,
    /// `C_R(t)`, emulating `-R0`; absent without an absorber.
    pub c_r: Option<ModulationProfile>,
    pub stops: StopTimes,
}

/// First times at which the modulation stops being realizable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopTimes {
    /// `C_R` reaches zero.
    pub cr_zero: f64,
    /// `C_C + C_R` reaches zero.
    pub layer_zero: f64,
    /// `C0 + C_C + C_R` reaches zero.
    pub total_zero: f64,
}

impl SensorModulation {
    pub fn c_c_at(&self, t: f64) -> f64 {
        self.c1 / self.source.field(t) - self.c0
    }

    pub fn c_r_at(&self, t: f64) -> f64 {
        match self.r0 {
            Some(r) => (self.c2 - self.source.integral(t) / r) / self.source.field(t),
            None => 0.0,
        }
    }

    /// `C_C + C_R`.
    pub fn layer_at(&self, t: f64) -> f64 {
        self.c_c_at(t) + self.c_r_at(t)
    }

    pub fn total_at(&self, t: f64) -> f64 {
        self.c0 + self.layer_at(t)
    }

    /// Sampled `C_C + C_R`.
    pub fn layer(&self) -> Result<Waveform> {
        match &self.c_r {
            Some(c_r) => self.c_c.capacitance().add(c_r.capacitance()),
            None => Ok(self.c_c.capacitance().clone()),
        }
    }
}

/// Root of the increasing function `f` on `[lo, hi]` by bisection.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Time at which `int_0^t E_in` reaches `target`.
fn integral_crossing(src: &PlaneWaveSource, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let hi = target / (src.e_dc - src.e0);
    bisect(|t| src.integral(t) - target, 0.0, hi)
}

/// Stop times of the sensor construction for `spec`.
pub fn stop_times(spec: &SheetSpec) -> Result<StopTimes> {
    spec.validate()?;
    let src = spec.source;
    let (c0, c1, c2) = (spec.c0, spec.c1(), spec.c2());
    let (cr_zero, total_zero) = match spec.r0 {
        Some(r) => (integral_crossing(&src, r * c2), integral_crossing(&src, r * (c1 + c2))),
        None => (f64::INFINITY, if c1 > 0.0 { f64::INFINITY } else { 0.0 }),
    };
    // E_in (C_C + C_R): positive at first, scanned for its first zero
    let g = |t: f64| c1 + spec.r0.map_or(0.0, |r| c2 - src.integral(t) / r) - c0 * src.field(t);
    let period = src.period();
    let horizon = if total_zero.is_finite() { total_zero } else { period };
    let step = period / 400.0;
    let mut layer_zero = f64::INFINITY;
    let mut t = 0.0;
    if g(0.0) <= 0.0 {
        layer_zero = 0.0;
    } else {
        while t < horizon {
            let next = (t + step).min(horizon);
            if g(next) <= 0.0 {
                layer_zero = bisect(|x| -g(x), t, next);
                break;
            }
            t = next;
        }
        if layer_zero.is_infinite() && spec.r0.is_some() {
            layer_zero = total_zero;
        }
    }
    Ok(StopTimes { cr_zero, layer_zero, total_zero })
}

/// Builds `C_C` and `C_R` from the incident field on `[0, t_end]`.
pub fn synth_sensor_modulation(spec: &SheetSpec, t_end: f64) -> Result<SensorModulation> {
    let stops = stop_times(spec)?;
    let src = spec.source;
    let dt = src.period() / spec.steps_per_period as f64;
    let n = (t_end / dt).round() as usize + 1;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} s is shorter than one step")));
    }
    let e_in = src.sample(0.0, dt, n)?;
    let (c1, c2) = (spec.c1(), spec.c2());
    let c_c = synth_capacitance(&e_in, -spec.c0, FreeConstant::Fixed(c1))?;
    let c_r = spec.r0.map(|r| synth_resistance(&e_in, -r, FreeConstant::Fixed(c2))).transpose()?;
    Ok(SensorModulation { source: src, c0: spec.c0, r0: spec.r0, c1, c2, c_c, c_r, stops })
}

/// AC reflection coefficient of the static sheet `jw C0 + 1/R0`.
pub fn static_reflection(spec: &SheetSpec) -> Complex64 {
    let y = Complex64::new(spec.conductance(), spec.source.omega * spec.c0);
    let half = ETA0 * y / 2.0;
    -half / (1.0 + half)
}

/// Integrates the sheet boundary condition on `[0, t_end]`.
pub fn simulate_sheet(spec: &SheetSpec, t_end: f64, modulation_on: bool) -> Result<FieldProbeRecord> {
    spec.validate()?;
    let src = spec.source;
    let spp = spec.steps_per_period;
    let dt = src.period() / spp as f64;
    let n = (t_end / dt).round() as usize;
    // probes sit one wavelength away, i.e. one period of delay
    let delay = spp;
    if n < delay + 1 {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} s must exceed the probe delay of one period"
        )));
    }
    let modulation = if modulation_on {
        let m = synth_sensor_modulation(spec, n as f64 * dt)?;
        if n as f64 * dt >= m.stops.total_zero {
            return Err(Error::PositivityViolated { t: m.stops.total_zero });
        }
        Some(m)
    } else {
        None
    };
    let c0 = spec.c0;
    let c_tot = |t: f64| c0 + modulation.as_ref().map_or(0.0, |m| m.layer_at(t));
    let g_rad = 2.0 / ETA0;
    let g = g_rad + spec.conductance();
    let e_scale = src.e_dc + src.e0;

    let mut e = Vec::with_capacity(n + 1);
    let mut diverged = None;
    if modulation.is_none() && c0 == 0.0 {
        e.extend((0..=n).map(|k| g_rad * src.field(k as f64 * dt) / g));
    } else {
        let rhs = |t: f64, q: f64| g_rad * src.field(t) - q * g / c_tot(t);
        let mut q = c_tot(0.0) * src.field(0.0);
        e.push(src.field(0.0));
        for k in 0..n {
            let t = k as f64 * dt;
            let k1 = rhs(t, q);
            let k2 = rhs(t + 0.5 * dt, q + 0.5 * dt * k1);
            let k3 = rhs(t + 0.5 * dt, q + 0.5 * dt * k2);
            let k4 = rhs(t + dt, q + dt * k3);
            q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let ek = q / c_tot(t + dt);
            e.push(ek);
            if !ek.is_finite() || ek.abs() > 1e6 * e_scale {
                diverged = Some(t + dt);
                break;
            }
        }
    }
    let e_sheet = Waveform::new(0.0, dt, e, "V/m")?;
    let len = e_sheet.len();
    let e_in = src.sample(0.0, dt, len)?;
    let j_total = e_in.zip_with(&e_sheet, "A/m", |a, b| g_rad * (a - b))?;

    let de = derivative(&e_sheet)?;
    let j_static = de.zip_with(&e_sheet, "A/m", |d, x| c0 * d + spec.conductance() * x)?;
    let j_tv = match &modulation {
        Some(m) => {
            let layer = m.layer()?.slice(0, len)?;
            derivative(&layer.zip_with(&e_sheet, "C/m^2", |c, x| c * x)?)?.with_unit("A/m")
        }
        None => Waveform::constant(0.0, dt, len, 0.0, "A/m")?,
    };
    let power = |j: &Waveform| j.zip_with(&e_sheet, "W/m^2", |a, b| a * b);
    let static_layer = LayerTrace { p: power(&j_static)?, j: j_static };
    let tv_layer = LayerTrace { p: power(&j_tv)?, j: j_tv };

    let m = len.saturating_sub(delay);
    if m == 0 {
        return Err(Error::TooShort { needed: delay + 1, got: len });
    }
    let t_probe = delay as f64 * dt;
    let es = e_sheet.samples();
    let probe = |f: &dyn Fn(usize) -> f64| Waveform::new(t_probe, dt, (0..m).map(f).collect(), "V/m");
    let time = |k: usize| k as f64 * dt;
    let e_below = probe(&|k| es[k])?;
    let e_incident_below = probe(&|k| src.field(time(k)))?;
    let e_incident_above = probe(&|k| src.field(time(k + 2 * delay)))?;
    let e_above = probe(&|k| src.field(time(k + 2 * delay)) + es[k] - src.field(time(k)))?;

    Ok(FieldProbeRecord {
        source: src,
        modulation_on,
        e_above,
        e_below,
        e_incident_above,
        e_incident_below,
        e_sheet,
        j_total,
        static_layer,
        tv_layer,
        diverged,
    })
}

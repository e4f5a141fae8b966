//! Uniformly sampled signals and the numerical calculus built on them.
//!
//! Every signal in the crate is a [`Waveform`]: a start time, a fixed step
//! and a list of finite samples tagged with a unit string. Units are plain
//! metadata, but they are compared at operation boundaries so that a field
//! in V/m can never be fed where a voltage in V is expected.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::{Error, Result};

/// Default number of samples per period of the fastest tone.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;

/// A uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
    unit: String,
}

impl Waveform {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>, unit: impl Into<String>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("time step must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidGrid(format!("start time must be finite, got {t0}")));
        }
        if samples.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: samples.len() });
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { t0, dt, samples, unit: unit.into() })
    }

    /// Samples `f` at `t0 + k*dt` for `k in 0..n`.
    pub fn from_fn(t0: f64, dt: f64, n: usize, unit: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..n).map(|k| f(t0 + k as f64 * dt)).collect();
        Self::new(t0, dt, samples, unit)
    }

    pub fn constant(t0: f64, dt: f64, n: usize, value: f64, unit: impl Into<String>) -> Result<Self> {
        Self::new(t0, dt, vec![value; n], unit)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| self.time(k))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Index of the first sample at or after `t` (within a small tolerance).
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let x = (t - self.t0) / self.dt;
        let k = (x - 1e-9).ceil().max(0.0) as usize;
        k.min(self.samples.len())
    }

    /// Linear interpolation; `None` outside the sampled span.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let x = (t - self.t0) / self.dt;
        let last = (self.samples.len() - 1) as f64;
        if !(x >= -1e-9 && x <= last + 1e-9) {
            return None;
        }
        let x = x.clamp(0.0, last);
        let k = (x.floor() as usize).min(self.samples.len() - 2);
        let frac = x - k as f64;
        Some(self.samples[k] + frac * (self.samples[k + 1] - self.samples[k]))
    }

    /// Samples `[start, end)` as a new waveform on the same grid.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return Err(Error::InvalidGrid(format!(
                "slice {start}..{end} out of range for {} samples",
                self.samples.len()
            )));
        }
        Self::new(self.time(start), self.dt, self.samples[start..end].to_vec(), self.unit.clone())
    }

    pub fn slice_from(&self, start: usize) -> Result<Self> {
        self.slice(start, self.samples.len())
    }

    /// Applies `f` pointwise, producing a waveform with unit `unit`.
    pub fn map(&self, unit: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.t0, self.dt, self.samples.iter().map(|&s| f(s)).collect(), unit)
    }

    /// Combines two waveforms on the same grid pointwise.
    pub fn zip_with(&self, other: &Waveform, unit: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.require_same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.t0, self.dt, samples, unit)
    }

    /// Pointwise sum; both operands must share grid and unit.
    pub fn add(&self, other: &Waveform) -> Result<Self> {
        self.require_unit(other.unit())?;
        self.zip_with(other, self.unit.clone(), |a, b| a + b)
    }

    pub fn sub(&self, other: &Waveform) -> Result<Self> {
        self.require_unit(other.unit())?;
        self.zip_with(other, self.unit.clone(), |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        self.map(self.unit.clone(), |s| s * factor)
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = unit.into();
        self
    }

    pub fn require_unit(&self, expected: &str) -> Result<()> {
        if self.unit == expected {
            Ok(())
        } else {
            Err(Error::UnitMismatch { expected: expected.to_string(), found: self.unit.clone() })
        }
    }

    pub fn same_grid(&self, other: &Waveform) -> bool {
        let tol = 1e-9 * self.dt;
        self.samples.len() == other.samples.len()
            && (self.dt - other.dt).abs() <= tol
            && (self.t0 - other.t0).abs() <= tol
    }

    pub fn require_same_grid(&self, other: &Waveform) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({} samples, t0 {}, dt {}) vs ({} samples, t0 {}, dt {})",
                self.len(),
                self.t0,
                self.dt,
                other.len(),
                other.t0,
                other.dt
            )))
        }
    }

    /// Writes `t,<unit>` CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", self.unit.as_str()])?;
        for (k, s) in self.samples.iter().enumerate() {
            w.write_record([fmt_f64(self.time(k)), fmt_f64(*s)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`Waveform::write_csv`]. The grid is
    /// taken from the first two rows and every further row is checked
    /// against it.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" {
            return Err(Error::Io(format!("expected header `t,<unit>`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let unit = headers[1].to_string();
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for record in r.records() {
            let record = record?;
            let t: f64 = parse_field(&record, 0)?;
            let s: f64 = parse_field(&record, 1)?;
            times.push(t);
            samples.push(s);
        }
        if times.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: times.len() });
        }
        let t0 = times[0];
        let dt = times[1] - times[0];
        for (k, t) in times.iter().enumerate() {
            if (t - (t0 + k as f64 * dt)).abs() > 1e-6 * dt {
                return Err(Error::InvalidGrid(format!("row {k} breaks uniform sampling")));
            }
        }
        Self::new(t0, dt, samples, unit)
    }
}

fn parse_field(record: &csv::StringRecord, i: usize) -> Result<f64> {
    record
        .get(i)
        .ok_or_else(|| Error::Io(format!("missing column {i}")))?
        .trim()
        .parse()
        .map_err(|e| Error::Io(format!("bad number in column {i}: {e}")))
}

/// Formats a double with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Unit of the time integral of a signal in `unit`.
pub fn integral_unit(unit: &str) -> String {
    match unit.strip_suffix("/s") {
        Some(base) => base.to_string(),
        None => format!("{unit}*s"),
    }
}

/// Unit of the time derivative of a signal in `unit`.
pub fn derivative_unit(unit: &str) -> String {
    match unit.strip_suffix("*s") {
        Some(base) => base.to_string(),
        None => format!("{unit}/s"),
    }
}

/// Current unit driven by a voltage-like unit (`V` -> `A`, `V/m` -> `A/m`).
pub fn current_unit_for(voltage_unit: &str) -> Result<String> {
    match voltage_unit {
        "V" => Ok("A".to_string()),
        "V/m" => Ok("A/m".to_string()),
        other => Err(Error::UnitMismatch { expected: "V or V/m".to_string(), found: other.to_string() }),
    }
}

/// `V_DC + v_ac cos(omega t + phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicSignal {
    pub v_dc: f64,
    pub v_ac: f64,
    pub omega: f64,
    pub phi: f64,
}

impl HarmonicSignal {
    pub fn new(v_dc: f64, v_ac: f64, omega: f64, phi: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(v_ac >= 0.0 && v_ac.is_finite()) || !v_dc.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "harmonic signal needs finite offset/phase and v_ac >= 0, got v_dc {v_dc}, v_ac {v_ac}, phi {phi}"
            )));
        }
        Ok(Self { v_dc, v_ac, omega, phi })
    }

    pub fn from_frequency(v_dc: f64, v_ac: f64, freq_hz: f64, phi: f64) -> Result<Self> {
        Self::new(v_dc, v_ac, 2.0 * PI * freq_hz, phi)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.v_dc + self.v_ac * (self.omega * t + self.phi).cos()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -self.v_ac * self.omega * (self.omega * t + self.phi).sin()
    }

    /// Exact antiderivative vanishing at `t = 0`.
    pub fn integral_from_zero(&self, t: f64) -> f64 {
        self.v_dc * t + self.v_ac / self.omega * ((self.omega * t + self.phi).sin() - self.phi.sin())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn frequency(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    /// True when the signal can never reach zero.
    pub fn is_nonvanishing(&self) -> bool {
        self.v_dc.abs() > self.v_ac
    }

    pub fn ac_phasor(&self) -> Phasor {
        Phasor::new(self.v_ac, self.phi, self.omega)
    }

    /// Default grid step: one period over [`DEFAULT_STEPS_PER_PERIOD`].
    pub fn default_dt(&self) -> f64 {
        self.period() / DEFAULT_STEPS_PER_PERIOD as f64
    }
}

/// Samples a harmonic signal on `t0 + k dt`, `k in 0..n`.
pub fn sample(h: &HarmonicSignal, t0: f64, dt: f64, n: usize, unit: &str) -> Result<Waveform> {
    if n < 2 || !(dt > 0.0) {
        return Err(Error::InvalidGrid(format!("need n >= 2 and dt > 0, got n = {n}, dt = {dt}")));
    }
    Waveform::from_fn(t0, dt, n, unit, |t| h.value(t))
}

/// Amplitude and phase of a single tone, `amplitude cos(omega t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phasor {
    pub amplitude: f64,
    pub phase: f64,
    pub omega: f64,
}

impl Phasor {
    /// Builds a phasor; a negative amplitude is folded into the phase and
    /// the phase is normalized to `(-pi, pi]`.
    pub fn new(amplitude: f64, phase: f64, omega: f64) -> Self {
        let (amplitude, phase) = if amplitude < 0.0 { (-amplitude, phase + PI) } else { (amplitude, phase) };
        Self { amplitude, phase: normalize_phase(phase), omega }
    }

    pub fn from_complex(z: Complex64, omega: f64) -> Self {
        Self::new(z.norm(), z.arg(), omega)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).cos()
    }

    pub fn phase_degrees(&self) -> f64 {
        self.phase.to_degrees()
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn normalize_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Trapezoidal cumulative integral; `out[0] = initial`.
pub fn cumulative_integral(w: &Waveform, initial: f64) -> Waveform {
    let s = w.samples();
    let half_dt = 0.5 * w.dt();
    let mut out = Vec::with_capacity(s.len());
    let mut acc = initial;
    out.push(acc);
    for pair in s.windows(2) {
        acc += half_dt * (pair[0] + pair[1]);
        out.push(acc);
    }
    Waveform { t0: w.t0(), dt: w.dt(), samples: out, unit: integral_unit(w.unit()) }
}

/// Second-order finite-difference derivative: central differences inside,
/// one-sided three-point stencils at both ends.
pub fn derivative(w: &Waveform) -> Result<Waveform> {
    let s = w.samples();
    let n = s.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let inv_2dt = 0.5 / w.dt();
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * s[0] + 4.0 * s[1] - s[2]) * inv_2dt);
    for k in 1..n - 1 {
        out.push((s[k + 1] - s[k - 1]) * inv_2dt);
    }
    out.push((3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) * inv_2dt);
    Ok(Waveform { t0: w.t0(), dt: w.dt(), samples: out, unit: derivative_unit(w.unit()) })
}

/// Zero-phase single-pole low-pass.
///
/// The pole is the bilinear (Tustin) image of a first-order analog section
/// with its cutoff prewarped to `f_cut`. Both passes run in periodic steady
/// state over the record, so DC passes with exactly unit gain and the
/// signal mean is preserved. Records that do not span whole periods of
/// their content see a wrap-around transient at the edges.
pub fn lowpass(w: &Waveform, f_cut: f64) -> Result<Waveform> {
    let nyquist = 0.5 / w.dt();
    if !(f_cut > 0.0 && f_cut < nyquist) {
        return Err(Error::CutoffAboveNyquist { f_cut, nyquist });
    }
    let k = (PI * f_cut * w.dt()).tan();
    let b = k / (1.0 + k);
    let a1 = (k - 1.0) / (k + 1.0);
    let forward = periodic_one_pole(w.samples(), b, a1);
    let mut reversed: Vec<f64> = forward.into_iter().rev().collect();
    reversed = periodic_one_pole(&reversed, b, a1);
    reversed.reverse();
    Waveform::new(w.t0(), w.dt(), reversed, w.unit())
}

/// `y[n] = b (x[n] + x[n-1]) - a1 y[n-1]` with `x` and `y` both treated as
/// periodic over the record.
fn periodic_one_pole(x: &[f64], b: f64, a1: f64) -> Vec<f64> {
    let n = x.len();
    let run = |y_prev: f64| {
        let mut y = Vec::with_capacity(n);
        let mut prev_y = y_prev;
        let mut prev_x = x[n - 1];
        for &xi in x {
            let yi = b * (xi + prev_x) - a1 * prev_y;
            y.push(yi);
            prev_y = yi;
            prev_x = xi;
        }
        y
    };
    let zero_state = run(0.0);
    let decay = (-a1).powi(n as i32);
    let y_last = zero_state[n - 1] / (1.0 - decay);
    run(y_last)
}

/// Offset plus a single tone fitted by least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub offset: f64,
    pub phasor: Phasor,
    /// Number of whole periods in the fitted window.
    pub periods: usize,
}

/// Least-squares fit of `a + b cos(omega t) + c sin(omega t)` over the
/// largest whole number of periods starting at `t_start`.
pub fn fit_harmonic(w: &Waveform, omega: f64, t_start: f64) -> Result<HarmonicFit> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    const REQUIRED: usize = 3;
    let period = 2.0 * PI / omega;
    let start = w.index_at_or_after(t_start);
    if start >= w.len() {
        return Err(Error::WindowTooShort { periods: 0.0, required: REQUIRED });
    }
    let span = w.end_time() - w.time(start);
    let periods_f = span / period;
    let periods = (periods_f + 1e-9).floor() as usize;
    if periods < REQUIRED {
        return Err(Error::WindowTooShort { periods: periods_f, required: REQUIRED });
    }
    let count = ((periods as f64 * period / w.dt()).round() as usize).min(w.len() - start).max(3);

    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for k in start..start + count {
        let t = w.time(k);
        let row = Vector3::new(1.0, (omega * t).cos(), (omega * t).sin());
        ata += row * row.transpose();
        atb += row * w.samples()[k];
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::InvalidParameter("singular harmonic fit".to_string()))?;
    // b cos + c sin = A cos(wt + phi) with b = A cos(phi), c = -A sin(phi)
    let amplitude = sol[1].hypot(sol[2]);
    let phase = (-sol[2]).atan2(sol[1]);
    Ok(HarmonicFit { offset: sol[0], phasor: Phasor::new(amplitude, phase, omega), periods })
}

/// Amplitude and phase of the `omega` component in steady state.
pub fn steady_state_phasor(w: &Waveform, omega: f64, t_start: f64) -> Result<Phasor> {
    fit_harmonic(w, omega, t_start).map(|f| f.phasor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const F1: f64 = 1.0e6;

    fn tone_grid(freq: f64, periods: usize) -> (f64, usize) {
        let dt = 1.0 / freq / DEFAULT_STEPS_PER_PERIOD as f64;
        (dt, periods * DEFAULT_STEPS_PER_PERIOD + 1)
    }

    #[test]
    fn waveform_rejects_bad_grids() {
        assert!(matches!(Waveform::new(0.0, 0.0, vec![1.0, 2.0], "V"), Err(Error::InvalidGrid(_))));
        assert!(matches!(Waveform::new(0.0, 1.0, vec![1.0], "V"), Err(Error::TooShort { .. })));
        assert!(matches!(Waveform::new(0.0, 1.0, vec![1.0, f64::NAN], "V"), Err(Error::NonFinite { index: 1 })));
    }

    #[test]
    fn sample_matches_drive_source() {
        let h = HarmonicSignal::from_frequency(6.0, 1.0, F1, 0.0).unwrap();
        let dt = h.period() / 2000.0;
        let w = sample(&h, 0.0, dt, 2001, "V").unwrap();
        assert_eq!(w.samples()[0], 7.0);
        assert_relative_eq!(w.samples()[1000], 5.0, epsilon = 1e-12);

        let zero = HarmonicSignal::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert!(sample(&zero, 0.0, 0.1, 10, "V").unwrap().samples().iter().all(|&s| s == 0.0));

        // E_DC + E0 sin(wt) expressed as a cosine with phi = -pi/2
        let field = HarmonicSignal::from_frequency(4.0, 1.0, 100e9, -PI / 2.0).unwrap();
        assert_relative_eq!(field.value(field.period() / 4.0), 5.0, epsilon = 1e-12);

        assert!(sample(&h, 0.0, dt, 1, "V").is_err());
        assert!(sample(&h, 0.0, -dt, 10, "V").is_err());
    }

    #[test]
    fn cumulative_integral_of_constant() {
        let n = 1001;
        let dt = 1e-6 / (n - 1) as f64;
        let w = Waveform::constant(0.0, dt, n, 5.0, "V").unwrap();
        let q = cumulative_integral(&w, 0.0);
        assert_relative_eq!(q.samples()[n - 1], 5e-6, max_relative = 1e-12);
        assert_eq!(q.unit(), "V*s");
        assert_eq!(q.samples()[0], 0.0);
    }

    #[test]
    fn integral_of_sine_is_periodic() {
        let omega = 2.0 * PI * F1;
        let (dt, n) = tone_grid(F1, 1);
        let w = Waveform::from_fn(0.0, dt, n, "V", |t| (omega * t).sin()).unwrap();
        let q = cumulative_integral(&w, 1.0 / omega);
        let init = 1.0 / omega;
        assert!((q.samples()[n - 1] - init).abs() <= 1e-9 * init);
    }

    #[test]
    fn derivative_examples() {
        let ramp = Waveform::from_fn(0.0, 0.01, 50, "V", |t| 3.5 * t).unwrap();
        for &d in derivative(&ramp).unwrap().samples() {
            assert_relative_eq!(d, 3.5, max_relative = 1e-12);
        }
        let flat = Waveform::constant(0.0, 0.01, 50, 2.0, "V").unwrap();
        assert!(derivative(&flat).unwrap().samples().iter().all(|d| d.abs() <= 1e-12));

        let omega = 2.0 * PI * F1;
        let (dt, n) = tone_grid(F1, 1);
        let w = Waveform::from_fn(0.0, dt, n, "V", |t| (omega * t).cos()).unwrap();
        let d = derivative(&w).unwrap();
        assert_eq!(d.unit(), "V/s");
        // relative to the derivative amplitude omega
        for (k, &dk) in d.samples().iter().enumerate() {
            let exact = -omega * (omega * d.time(k)).sin();
            assert!((dk - exact).abs() <= 1e-5 * omega, "k = {k}");
        }

        let short = Waveform::new(0.0, 1.0, vec![1.0, 2.0], "V").unwrap();
        assert_eq!(derivative(&short).unwrap_err(), Error::TooShort { needed: 3, got: 2 });
    }

    #[test]
    fn lowpass_dc_and_ripple() {
        let (dt, n) = tone_grid(F1, 20);
        let dc = Waveform::constant(0.0, dt, n, 6.0, "V").unwrap();
        for &s in lowpass(&dc, 10e3).unwrap().samples() {
            assert!((s - 6.0).abs() <= 1e-9);
        }

        let omega = 2.0 * PI * F1;
        // 20 whole periods, drop the duplicated endpoint
        let w = Waveform::from_fn(0.0, dt, n - 1, "V", |t| 6.0 + (omega * t).cos()).unwrap();
        let y = lowpass(&w, 10e3).unwrap();
        let ripple = y.samples().iter().map(|s| (s - 6.0).abs()).fold(0.0, f64::max);
        assert!(ripple < 1e-3, "ripple {ripple}");

        assert!(matches!(lowpass(&w, 1.0 / dt), Err(Error::CutoffAboveNyquist { .. })));
    }

    /// Magnitude of the two-pass bilinear one-pole at frequency `f`.
    fn two_pass_gain(f: f64, f_cut: f64, dt: f64) -> f64 {
        let ratio = (PI * f * dt).tan() / (PI * f_cut * dt).tan();
        1.0 / (1.0 + ratio * ratio)
    }

    #[test]
    fn lowpass_separates_tones() {
        let (f_lo, f_hi, f_cut) = (1e6, 100e6, 3e6);
        let dt = 1.0 / f_hi / DEFAULT_STEPS_PER_PERIOD as f64;
        let n = 4 * DEFAULT_STEPS_PER_PERIOD * 100;
        let (w_lo, w_hi) = (2.0 * PI * f_lo, 2.0 * PI * f_hi);
        let w = Waveform::from_fn(0.0, dt, n, "V", |t| (w_lo * t).cos() + (w_hi * t).cos()).unwrap();
        let y = lowpass(&w, f_cut).unwrap();
        let lo = steady_state_phasor(&y, w_lo, 0.0).unwrap().amplitude;
        let hi = steady_state_phasor(&y, w_hi, 0.0).unwrap().amplitude;
        let oracle = two_pass_gain(f_lo, f_cut, dt) / two_pass_gain(f_hi, f_cut, dt);
        assert!(lo / hi >= 1000.0, "ratio {}", lo / hi);
        assert_relative_eq!(lo / hi, oracle, max_relative = 1e-3);
    }

    #[test]
    fn phasor_fit_examples() {
        let omega = 2.0 * PI * F1;
        let (dt, n) = tone_grid(F1, 4);
        let w = Waveform::from_fn(0.0, dt, n, "V", |t| 2.0 * (omega * t + 0.3).cos()).unwrap();
        let p = steady_state_phasor(&w, omega, 0.0).unwrap();
        assert_relative_eq!(p.amplitude, 2.0, epsilon = 1e-9);
        assert_relative_eq!(p.phase, 0.3, epsilon = 1e-9);

        let w = Waveform::from_fn(0.0, dt, n, "V", |t| 6.0 + (omega * t).cos()).unwrap();
        let fit = fit_harmonic(&w, omega, 0.0).unwrap();
        assert_relative_eq!(fit.phasor.amplitude, 1.0, epsilon = 1e-9);
        assert!(fit.phasor.phase.abs() < 1e-9);
        assert_relative_eq!(fit.offset, 6.0, epsilon = 1e-9);

        let w = Waveform::from_fn(0.0, dt, n, "V", |t| (omega * t).cos() + 0.01 * (3.0 * omega * t).cos()).unwrap();
        assert!((steady_state_phasor(&w, omega, 0.0).unwrap().amplitude - 1.0).abs() < 1e-2);

        let (_, short) = tone_grid(F1, 2);
        let w = Waveform::from_fn(0.0, dt, short, "V", |t| (omega * t).cos()).unwrap();
        assert!(matches!(steady_state_phasor(&w, omega, 0.0), Err(Error::WindowTooShort { .. })));
    }

    #[test]
    fn phase_is_normalized() {
        assert_relative_eq!(normalize_phase(-PI), PI);
        assert_relative_eq!(normalize_phase(3.0 * PI), PI, epsilon = 1e-12);
        let p = Phasor::new(-1.0, 0.0, 1.0);
        assert_relative_eq!(p.amplitude, 1.0);
        assert_relative_eq!(p.phase, PI);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let w = Waveform::from_fn(1e-9, 1.0 / 3.0 * 1e-9, 17, "V/m", |t| (t * 1e9).sin() * 1.234567890123).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,V/m\n"));
        let back = Waveform::read_csv(&buf[..]).unwrap();
        assert_eq!(back.samples(), w.samples());
        assert_eq!(back.unit(), "V/m");
    }

    #[test]
    fn unit_helpers_round_trip() {
        assert_eq!(derivative_unit(&integral_unit("V")), "V");
        assert_eq!(integral_unit(&derivative_unit("A")), "A");
        assert_eq!(current_unit_for("V/m").unwrap(), "A/m");
        assert!(current_unit_for("F").is_err());
    }
}

//! Admittance kernels and their convolution with a voltage history.
//!
//! A first-order kernel is kept in three parts: a conductance weight on
//! `delta(gamma)`, a capacitance weight on `delta'(gamma)`, and an optional
//! sampled smooth tail over `gamma >= 0`. The singular parts act on the
//! voltage symbolically (`g0 v` and `c0 dv/dt`) and never as spikes.

use std::io::{Read, Write};

use crate::signals::{current_unit_for, derivative, fmt_f64, Waveform};
use crate::{Error, Result};

const GRID_TOL: f64 = 1e-9;

/// First-order admittance kernel `Y(gamma) = g0 delta + c0 delta' + smooth`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceKernel {
    pub g0: f64,
    pub c0: f64,
    smooth: Option<Waveform>,
}

impl AdmittanceKernel {
    pub fn new(g0: f64, c0: f64, smooth: Option<Waveform>) -> Result<Self> {
        if !g0.is_finite() || !c0.is_finite() {
            return Err(Error::InvalidParameter(format!("kernel weights must be finite, got g0 {g0}, c0 {c0}")));
        }
        if let Some(s) = &smooth {
            if s.t0().abs() > GRID_TOL * s.dt() {
                return Err(Error::InvalidGrid(format!("smooth kernel must start at gamma = 0, starts at {}", s.t0())));
            }
        }
        Ok(Self { g0, c0, smooth })
    }

    pub fn zero() -> Self {
        Self { g0: 0.0, c0: 0.0, smooth: None }
    }

    /// Pure conductance, `g delta(gamma)`.
    pub fn conductance(g: f64) -> Result<Self> {
        Self::new(g, 0.0, None)
    }

    /// Pure capacitance, `c delta'(gamma)`.
    pub fn capacitance(c: f64) -> Result<Self> {
        Self::new(0.0, c, None)
    }

    pub fn smooth(&self) -> Option<&Waveform> {
        self.smooth.as_ref()
    }

    /// Length of the smooth tail in seconds (zero without one).
    pub fn support(&self) -> f64 {
        self.smooth.as_ref().map_or(0.0, |s| s.end_time())
    }

    /// Reads the smooth part from `gamma,value` CSV.
    pub fn read_smooth_csv<R: Read>(reader: R, g0: f64, c0: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "gamma" {
            return Err(Error::Io("expected header `gamma,value`".to_string()));
        }
        let mut gammas = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record[i].trim().parse().map_err(|e| Error::Io(format!("bad kernel value: {e}")))
            };
            gammas.push(parse(0)?);
            values.push(parse(1)?);
        }
        if gammas.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: gammas.len() });
        }
        let dgamma = gammas[1] - gammas[0];
        for (k, g) in gammas.iter().enumerate() {
            if (g - (gammas[0] + k as f64 * dgamma)).abs() > 1e-6 * dgamma {
                return Err(Error::InvalidGrid(format!("kernel row {k} breaks uniform sampling")));
            }
        }
        Self::new(g0, c0, Some(Waveform::new(gammas[0], dgamma, values, "S/s")?))
    }

    pub fn write_smooth_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["gamma", "value"])?;
        if let Some(s) = &self.smooth {
            for (k, v) in s.samples().iter().enumerate() {
                w.write_record([fmt_f64(s.time(k)), fmt_f64(*v)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Resamples a kernel tail onto step `dt`; the two steps must be related by
/// an integer ratio in either direction.
fn resample_kernel(kernel: &Waveform, dt: f64) -> Result<Vec<f64>> {
    let ratio = kernel.dt() / dt;
    let commensurate = |r: f64| r >= 1.0 - GRID_TOL && (r - r.round()).abs() <= GRID_TOL * r.max(1.0);
    if !commensurate(ratio) && !commensurate(1.0 / ratio) {
        return Err(Error::IncommensurateGrids { signal_dt: dt, kernel_dt: kernel.dt() });
    }
    if (ratio - 1.0).abs() <= GRID_TOL {
        return Ok(kernel.samples().to_vec());
    }
    let m = (kernel.end_time() / dt + GRID_TOL).floor() as usize + 1;
    Ok((0..m)
        .map(|j| kernel.value_at(j as f64 * dt).expect("inside kernel support"))
        .collect())
}

/// Trapezoidal convolution of the smooth tail with `v`, defined from the
/// first sample that has the full kernel history behind it. Returns the
/// start index into `v` and the current samples.
pub(crate) fn smooth_convolution(k: &AdmittanceKernel, v: &Waveform) -> Result<(usize, Option<Vec<f64>>)> {
    let Some(tail) = &k.smooth else {
        return Ok((0, None));
    };
    let kern = resample_kernel(tail, v.dt())?;
    let m = kern.len();
    if v.len() < m + 1 {
        return Err(Error::InsufficientHistory { needed: m + 1, available: v.len() });
    }
    let s = v.samples();
    let start = m - 1;
    let dt = v.dt();
    let out = (start..s.len())
        .map(|n| {
            let mut acc = 0.5 * (kern[0] * s[n] + kern[m - 1] * s[n - (m - 1)]);
            for j in 1..m - 1 {
                acc += kern[j] * s[n - j];
            }
            acc * dt
        })
        .collect();
    Ok((start, Some(out)))
}

/// `i(t) = g0 v(t) + c0 dv/dt + int_0^Gamma Y(gamma) v(t - gamma) dgamma`.
///
/// Without a smooth tail the output covers the whole input grid; otherwise
/// it starts once the full kernel history is available.
pub fn convolve_first_order(k: &AdmittanceKernel, v: &Waveform) -> Result<Waveform> {
    let unit = current_unit_for(v.unit())?;
    let (start, smooth) = smooth_convolution(k, v)?;
    let dv = if k.c0 != 0.0 { Some(derivative(v)?) } else { None };
    let s = v.samples();
    let samples = (start..s.len())
        .map(|n| {
            let mut i = k.g0 * s[n];
            if let Some(dv) = &dv {
                i += k.c0 * dv.samples()[n];
            }
            if let Some(sm) = &smooth {
                i += sm[n - start];
            }
            i
        })
        .collect();
    Waveform::new(v.time(start), v.dt(), samples, unit)
}

/// Second-order Volterra kernel on a square grid `[0, Gamma]^2`, stored
/// symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraKernel2 {
    dgamma: f64,
    n: usize,
    values: Vec<f64>,
}

impl VolterraKernel2 {
    /// Builds the kernel from rows; the array is replaced by its symmetric
    /// part `(K + K^T) / 2`, the only part the double integral sees.
    pub fn new(dgamma: f64, rows: &[Vec<f64>]) -> Result<Self> {
        if !(dgamma > 0.0 && dgamma.is_finite()) {
            return Err(Error::InvalidGrid(format!("kernel step must be positive, got {dgamma}")));
        }
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooShort { needed: 2, got: n });
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("second-order kernel must be square".to_string()));
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = 0.5 * (rows[i][j] + rows[j][i]);
                if !v.is_finite() {
                    return Err(Error::NonFinite { index: i * n + j });
                }
                values[i * n + j] = v;
            }
        }
        Ok(Self { dgamma, n, values })
    }

    pub fn zeros(dgamma: f64, n: usize) -> Result<Self> {
        Self::new(dgamma, &vec![vec![0.0; n]; n])
    }

    /// Single-cell stand-in for `w delta(gamma1) delta(gamma2)`: the corner
    /// cell carries the whole mass `w` under the 2D trapezoid rule.
    pub fn memoryless(w: f64, dgamma: f64) -> Result<Self> {
        let corner = 4.0 * w / (dgamma * dgamma);
        Self::new(dgamma, &[vec![corner, 0.0], vec![0.0, 0.0]])
    }

    pub fn dgamma(&self) -> f64 {
        self.dgamma
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn support(&self) -> f64 {
        (self.n - 1) as f64 * self.dgamma
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n - 1 {
            0.5
        } else {
            1.0
        }
    }

    /// 2D trapezoid integral of the kernel.
    pub fn mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.weight(i) * self.weight(j) * self.get(i, j);
            }
        }
        acc * self.dgamma * self.dgamma
    }

    /// Reads a matrix whose first line is `dgamma,<step>`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
        let mut records = r.records();
        let header = records.next().ok_or_else(|| Error::Io("empty kernel file".to_string()))??;
        if header.len() != 2 || header[0].trim() != "dgamma" {
            return Err(Error::Io("expected first line `dgamma,<step>`".to_string()));
        }
        let dgamma: f64 = header[1].trim().parse().map_err(|e| Error::Io(format!("bad dgamma: {e}")))?;
        let mut rows = Vec::new();
        for record in records {
            let record = record?;
            let row = record
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Io(format!("bad kernel value: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(dgamma, &rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        w.write_record(["dgamma".to_string(), fmt_f64(self.dgamma)])?;
        for i in 0..self.n {
            w.write_record((0..self.n).map(|j| fmt_f64(self.get(i, j))))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `i(t) = iint Y2(g1, g2) v(t - g1) v(t - g2) dg1 dg2` by the 2D
/// trapezoid rule. The kernel step must be an integer multiple of the
/// signal step.
pub fn convolve_second_order(k2: &VolterraKernel2, v: &Waveform) -> Result<Waveform> {
    let unit = current_unit_for(v.unit())?;
    let ratio = k2.dgamma / v.dt();
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > GRID_TOL * ratio {
        return Err(Error::IncommensurateGrids { signal_dt: v.dt(), kernel_dt: k2.dgamma });
    }
    let stride = stride as usize;
    let start = (k2.n - 1) * stride;
    if v.len() < start + 2 {
        return Err(Error::InsufficientHistory { needed: start + 2, available: v.len() });
    }
    let s = v.samples();
    let area = k2.dgamma * k2.dgamma;
    let weights: Vec<f64> = (0..k2.n).map(|i| k2.weight(i)).collect();
    let samples = (start..s.len())
        .map(|n| {
            let mut acc = 0.0;
            for i in 0..k2.n {
                let vi = s[n - i * stride];
                let mut row = 0.0;
                for j in 0..k2.n {
                    row += weights[j] * k2.values[i * k2.n + j] * s[n - j * stride];
                }
                acc += weights[i] * vi * row;
            }
            acc * area
        })
        .collect();
    Waveform::new(v.time(start), v.dt(), samples, unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{sample, HarmonicSignal};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn source() -> (HarmonicSignal, Waveform) {
        let h = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0).unwrap();
        let w = sample(&h, 0.0, h.default_dt(), 4001, "V").unwrap();
        (h, w)
    }

    #[test]
    fn pure_conductance() {
        let (h, v) = source();
        let i = convolve_first_order(&AdmittanceKernel::conductance(0.1).unwrap(), &v).unwrap();
        assert_eq!(i.unit(), "A");
        assert_eq!(i.len(), v.len());
        for (k, &ik) in i.samples().iter().enumerate() {
            let t = i.time(k);
            assert_relative_eq!(ik, 0.6 + 0.1 * (h.omega * t).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_capacitance_kernel() {
        let h = HarmonicSignal::from_frequency(0.0, 1.0, 1e6, 0.0).unwrap();
        let v = sample(&h, 0.0, h.default_dt(), 2001, "V").unwrap();
        let i = convolve_first_order(&AdmittanceKernel::capacitance(-1e-9).unwrap(), &v).unwrap();
        let amp = 1e-9 * h.omega;
        assert_relative_eq!(amp, 6.283e-3, max_relative = 1e-4);
        for (k, &ik) in i.samples().iter().enumerate() {
            let exact = amp * (h.omega * i.time(k)).sin();
            assert!((ik - exact).abs() <= 1e-5 * amp);
        }
    }

    #[test]
    fn series_rc_step_response() {
        // series RC admittance sC/(1 + sRC): delta/R minus an exponential tail
        let (r, c) = (10.0, 1e-9);
        let tau = r * c;
        let dt = tau / 200.0;
        let m = 2001; // covers 10 tau
        let tail = Waveform::from_fn(0.0, dt, m, "S/s", |g| -(-g / tau).exp() / (r * r * c)).unwrap();
        let k = AdmittanceKernel::new(1.0 / r, 0.0, Some(tail)).unwrap();
        let pre = m - 1;
        let n = pre + 1200;
        let v = Waveform::from_fn(-(pre as f64) * dt, dt, n, "V", |t| if t >= -1e-3 * dt { 1.0 } else { 0.0 }).unwrap();
        let i = convolve_first_order(&k, &v).unwrap();
        assert_relative_eq!(i.t0(), 0.0, epsilon = 1e-3 * dt);
        // skip the sample sitting on the discontinuity
        for k in 2..i.len() {
            let exact = (-i.time(k) / tau).exp() / r;
            assert!((i.samples()[k] - exact).abs() <= 0.01 / r, "k = {k}");
        }
    }

    #[test]
    fn smooth_kernel_alone_integrates_step() {
        // the bare exponential tail integrates a unit step to (1 - e^{-t/RC}) / R
        let (r, c) = (10.0, 1e-9);
        let tau = r * c;
        let dt = tau / 200.0;
        let m = 2001;
        let tail = Waveform::from_fn(0.0, dt, m, "S/s", |g| (-g / tau).exp() / (r * r * c)).unwrap();
        let k = AdmittanceKernel::new(0.0, 0.0, Some(tail)).unwrap();
        let pre = m - 1;
        let v = Waveform::from_fn(-(pre as f64) * dt, dt, pre + 1000, "V", |t| if t >= -1e-3 * dt { 1.0 } else { 0.0 })
            .unwrap();
        let i = convolve_first_order(&k, &v).unwrap();
        for k in 2..i.len() {
            let exact = (1.0 - (-i.time(k) / tau).exp()) / r;
            assert!((i.samples()[k] - exact).abs() <= 0.01 / r);
        }
    }

    #[test]
    fn insufficient_history_and_incommensurate() {
        let (_, v) = source();
        let tail = Waveform::constant(0.0, v.dt(), v.len() + 5, 1.0, "S/s").unwrap();
        let k = AdmittanceKernel::new(0.0, 0.0, Some(tail)).unwrap();
        assert!(matches!(convolve_first_order(&k, &v), Err(Error::InsufficientHistory { .. })));

        let tail = Waveform::constant(0.0, v.dt() * 1.5, 10, 1.0, "S/s").unwrap();
        let k = AdmittanceKernel::new(0.0, 0.0, Some(tail)).unwrap();
        assert!(matches!(convolve_first_order(&k, &v), Err(Error::IncommensurateGrids { .. })));

        let k2 = VolterraKernel2::zeros(v.dt() * 2.5, 3).unwrap();
        assert!(matches!(convolve_second_order(&k2, &v), Err(Error::IncommensurateGrids { .. })));
        let k2 = VolterraKernel2::zeros(v.dt() * 100.0, 100).unwrap();
        assert!(matches!(convolve_second_order(&k2, &v), Err(Error::InsufficientHistory { .. })));
    }

    #[test]
    fn coarse_kernel_is_interpolated() {
        let (_, v) = source();
        // linear kernel sampled 4x coarser: interpolation is exact
        let coarse = Waveform::from_fn(0.0, 4.0 * v.dt(), 11, "S/s", |g| 1e6 * g).unwrap();
        let fine = Waveform::from_fn(0.0, v.dt(), 41, "S/s", |g| 1e6 * g).unwrap();
        let a = convolve_first_order(&AdmittanceKernel::new(0.0, 0.0, Some(coarse)).unwrap(), &v).unwrap();
        let b = convolve_first_order(&AdmittanceKernel::new(0.0, 0.0, Some(fine)).unwrap(), &v).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn second_order_examples() {
        let (h, v) = source();
        let zero = VolterraKernel2::zeros(v.dt(), 5).unwrap();
        assert!(convolve_second_order(&zero, &v).unwrap().samples().iter().all(|&s| s == 0.0));

        let w = 2e-3;
        let k2 = VolterraKernel2::memoryless(w, v.dt()).unwrap();
        assert_relative_eq!(k2.mass(), w, max_relative = 1e-12);
        let i = convolve_second_order(&k2, &v).unwrap();
        for (k, &ik) in i.samples().iter().enumerate() {
            let vt = h.value(i.time(k));
            assert!((ik - w * vt * vt).abs() <= 0.02 * w * vt * vt);
        }

        let dc = Waveform::constant(0.0, 1e-9, 200, 6.0, "V").unwrap();
        let rows: Vec<Vec<f64>> =
            (0..10).map(|a| (0..10).map(|b| (-(a as f64) * 0.3).exp() * (1.0 + 0.1 * b as f64)).collect()).collect();
        let k2 = VolterraKernel2::new(2e-9, &rows).unwrap();
        let i = convolve_second_order(&k2, &dc).unwrap();
        for &ik in i.samples() {
            assert_relative_eq!(ik, k2.mass() * 36.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_files_round_trip() {
        let tail = Waveform::from_fn(0.0, 1e-9, 8, "S/s", |g| (g * 1e8).cos()).unwrap();
        let k = AdmittanceKernel::new(0.5, -2e-9, Some(tail)).unwrap();
        let mut buf = Vec::new();
        k.write_smooth_csv(&mut buf).unwrap();
        let back = AdmittanceKernel::read_smooth_csv(&buf[..], 0.5, -2e-9).unwrap();
        assert_eq!(back.smooth().unwrap().samples(), k.smooth().unwrap().samples());

        let k2 = VolterraKernel2::new(1e-9, &[vec![1.0, 2.0], vec![0.0, PI]]).unwrap();
        assert_eq!(k2.get(0, 1), 1.0);
        let mut buf = Vec::new();
        k2.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("dgamma,"));
        assert_eq!(VolterraKernel2::read_csv(&buf[..]).unwrap(), k2);
    }
}

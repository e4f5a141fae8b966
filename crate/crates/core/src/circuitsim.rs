//! Transient simulation of the driven RC circuits and their analytic
//! steady-state references.
//!
//! The circuit is a harmonic source with internal resistance `R_s` driving
//! either a time-varying capacitor (optionally shunted by `R_C`) or one of
//! the static target elements. The capacitor branch is integrated with
//! classical RK4 on the profile grid:
//!
//! `dq/dt = (v_s(t) - k q / C(t)) / R_s`, with `k = 1 + R_s / R_C`.

use std::io::Write;

use num_complex::Complex64;

use crate::modsynth::{
    synth_capacitance, synth_inductance, synth_resistance, FreeConstant, ModulationProfile, TargetElement,
    VoltageSourceMode,
};
use crate::signals::{fmt_f64, lowpass, HarmonicSignal, Phasor, Waveform, DEFAULT_STEPS_PER_PERIOD};
use crate::{Error, Result};

/// Settle time used by comparisons, in source periods.
pub const DEFAULT_SETTLE_PERIODS: f64 = 5.0;

/// Growth factor over the source-driven scale that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    TimeVaryingCap { profile: ModulationProfile, parallel_r: Option<f64> },
    Equivalent(TargetElement),
}

/// Initial state of the capacitor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialCharge {
    /// `q(0) = C(0) V_DC` times the resistive divider of the branch.
    #[default]
    DcSteadyState,
    Zero,
    /// Charge in coulombs.
    Value(f64),
    /// Capacitor voltage in volts.
    Voltage(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub source: HarmonicSignal,
    pub r_s: f64,
    pub branch: Branch,
    pub initial: InitialCharge,
    /// Simulate profiles with non-positive samples (ideal non-Foster runs).
    pub allow_nonpositive: bool,
}

impl CircuitSpec {
    pub fn new(source: HarmonicSignal, r_s: f64, branch: Branch) -> Result<Self> {
        if !(r_s > 0.0 && r_s.is_finite()) {
            return Err(Error::NonpositiveResistance(r_s));
        }
        if let Branch::TimeVaryingCap { parallel_r: Some(r), .. } = branch {
            if !(r > 0.0) {
                return Err(Error::NonpositiveResistance(r));
            }
        }
        Ok(Self { source, r_s, branch, initial: InitialCharge::default(), allow_nonpositive: false })
    }

    pub fn with_initial(mut self, initial: InitialCharge) -> Self {
        self.initial = initial;
        self
    }

    pub fn allowing_nonpositive(mut self) -> Self {
        self.allow_nonpositive = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub q: Waveform,
    pub v_cap: Waveform,
    /// Current drawn from the source, i.e. into the whole branch.
    pub i: Waveform,
    /// Time at which `|q|` first exceeded the divergence threshold.
    pub diverged: Option<f64>,
}

impl SimulationTrace {
    pub fn from_parts(q: Waveform, v_cap: Waveform, i: Waveform) -> Result<Self> {
        q.require_same_grid(&v_cap)?;
        q.require_same_grid(&i)?;
        Ok(Self { q, v_cap, i, diverged: None })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "q", "v_cap", "i"])?;
        for k in 0..self.len() {
            w.write_record([
                fmt_f64(self.q.time(k)),
                fmt_f64(self.q.samples()[k]),
                fmt_f64(self.v_cap.samples()[k]),
                fmt_f64(self.i.samples()[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates the capacitor branch from the start of the profile to `t_end`.
pub fn simulate_tvc(spec: &CircuitSpec, t_end: f64) -> Result<SimulationTrace> {
    let (profile, parallel_r) = match &spec.branch {
        Branch::TimeVaryingCap { profile, parallel_r } => (profile, *parallel_r),
        Branch::Equivalent(_) => {
            return Err(Error::UnsupportedTarget("transient simulation needs a time-varying capacitor branch"))
        }
    };
    let c = profile.capacitance();
    if !spec.allow_nonpositive {
        if let Some(k) = c.samples().iter().position(|&x| !(x > 0.0)) {
            return Err(Error::ProfileNotPositive { t: c.time(k), value: c.samples()[k] });
        }
    } else if let Some(k) = c.samples().iter().position(|&x| x == 0.0) {
        return Err(Error::ProfileNotPositive { t: c.time(k), value: 0.0 });
    }
    let dt = c.dt();
    let steps_f = (t_end - c.t0()) / dt;
    let steps = steps_f.round();
    if steps < 1.0 || steps as usize >= c.len() {
        return Err(Error::InvalidGrid(format!(
            "t_end = {t_end} s is outside the profile span [{}, {}] s",
            c.t0(),
            c.end_time()
        )));
    }
    let steps = steps as usize;
    let r_s = spec.r_s;
    let k_loss = 1.0 + parallel_r.map_or(0.0, |r| r_s / r);
    let src = &spec.source;
    let cs = c.samples();

    let q0 = match spec.initial {
        InitialCharge::DcSteadyState => cs[0] * src.v_dc / k_loss,
        InitialCharge::Zero => 0.0,
        InitialCharge::Value(q) => q,
        InitialCharge::Voltage(v) => cs[0] * v,
    };
    let c_peak = cs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = q0.abs().max(c_peak * (src.v_dc.abs() + src.v_ac.abs()));
    let threshold = DIVERGENCE_FACTOR * if scale > 0.0 { scale } else { f64::MIN_POSITIVE };

    let rhs = |t: f64, q: f64, cap: f64| (src.value(t) - k_loss * q / cap) / r_s;
    let mut q = Vec::with_capacity(steps + 1);
    q.push(q0);
    let mut diverged = None;
    for k in 0..steps {
        let t = c.time(k);
        let qk = q[k];
        let (c_a, c_b) = (cs[k], cs[k + 1]);
        let c_mid = 0.5 * (c_a + c_b);
        let k1 = rhs(t, qk, c_a);
        let k2 = rhs(t + 0.5 * dt, qk + 0.5 * dt * k1, c_mid);
        let k3 = rhs(t + 0.5 * dt, qk + 0.5 * dt * k2, c_mid);
        let k4 = rhs(t + dt, qk + dt * k3, c_b);
        let next = qk + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        q.push(next);
        if !next.is_finite() || next.abs() > threshold {
            diverged = Some(c.time(k + 1));
            break;
        }
    }

    let n = q.len();
    let v_cap: Vec<f64> = q.iter().zip(cs).map(|(qk, ck)| qk / ck).collect();
    let i: Vec<f64> = v_cap.iter().enumerate().map(|(k, v)| (src.value(c.time(k)) - v) / r_s).collect();
    debug_assert_eq!(n, v_cap.len());
    let mut trace = SimulationTrace::from_parts(
        Waveform::new(c.t0(), dt, q, "C")?,
        Waveform::new(c.t0(), dt, v_cap, "V")?,
        Waveform::new(c.t0(), dt, i, "A")?,
    )?;
    trace.diverged = diverged;
    Ok(trace)
}

/// DC value plus one AC phasor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateCurrent {
    pub dc: f64,
    pub ac: Phasor,
}

impl SteadyStateCurrent {
    pub fn value(&self, t: f64) -> f64 {
        self.dc + self.ac.value(t)
    }

    /// Samples the current on the grid of `like`.
    pub fn sampled(&self, like: &Waveform) -> Result<Waveform> {
        Waveform::from_fn(like.t0(), like.dt(), like.len(), "A", |t| self.value(t))
    }
}

fn element_impedance(target: &TargetElement, omega: f64) -> Result<(Complex64, f64)> {
    target.validate()?;
    match *target {
        TargetElement::Capacitance { c_eq } => {
            if c_eq == 0.0 {
                return Err(Error::ZeroCapacitance);
            }
            Ok((Complex64::new(0.0, -1.0 / (omega * c_eq)), f64::INFINITY))
        }
        TargetElement::Resistance { r_eq } => Ok((Complex64::new(r_eq, 0.0), r_eq)),
        TargetElement::LossyInductance { l_eq, r_l, .. } => Ok((Complex64::new(r_l, omega * l_eq), r_l)),
        TargetElement::GeneralLti(_) | TargetElement::Nonlinear(..) => {
            Err(Error::UnsupportedTarget("steady-state references cover capacitance, resistance and lossy inductance"))
        }
    }
}

/// Source current when the branch is the ideal target element.
pub fn equivalent_steady_state(spec: &CircuitSpec, omega: f64) -> Result<SteadyStateCurrent> {
    let target = match &spec.branch {
        Branch::Equivalent(t) => t,
        Branch::TimeVaryingCap { .. } => {
            return Err(Error::UnsupportedTarget("steady-state reference needs an equivalent element branch"))
        }
    };
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    let (z, r_dc) = element_impedance(target, omega)?;
    let src = &spec.source;
    let v_ac = Phasor::new(src.v_ac, src.phi, omega).to_complex();
    let ac = Phasor::from_complex(v_ac / (spec.r_s + z), omega);
    let dc = if r_dc.is_infinite() { 0.0 } else { src.v_dc / (spec.r_s + r_dc) };
    Ok(SteadyStateCurrent { dc, ac })
}

/// Steady-state voltage across the target element, `v_s - R_s i`.
pub fn equivalent_element_voltage(spec: &CircuitSpec, omega: f64) -> Result<SteadyStateCurrent> {
    let i = equivalent_steady_state(spec, omega)?;
    let src = &spec.source;
    let v_ac = Phasor::new(src.v_ac, src.phi, omega).to_complex() - spec.r_s * i.ac.to_complex();
    Ok(SteadyStateCurrent { dc: src.v_dc - spec.r_s * i.dc, ac: Phasor::from_complex(v_ac, omega) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulationReport {
    /// Relative RMS error over all whole periods after the settle time.
    pub rel_rms: f64,
    /// Relative RMS error of each period in the window.
    pub per_period: Vec<f64>,
    pub settle: f64,
}

impl EmulationReport {
    pub fn periods(&self) -> usize {
        self.per_period.len()
    }
}

/// Compares the simulated source current with a steady-state reference.
pub fn compare_emulation(trace: &SimulationTrace, reference: &SteadyStateCurrent, settle: f64) -> Result<EmulationReport> {
    const REQUIRED: usize = 3;
    let i = &trace.i;
    let period = 2.0 * std::f64::consts::PI / reference.ac.omega;
    let per = (period / i.dt()).round() as usize;
    if per == 0 {
        return Err(Error::InvalidGrid("grid is coarser than one source period".to_string()));
    }
    let start = i.index_at_or_after(i.t0() + settle);
    let available = i.len().saturating_sub(start + 1) / per;
    if available < REQUIRED {
        return Err(Error::WindowTooShort { periods: available as f64, required: REQUIRED });
    }
    let mut per_period = Vec::with_capacity(available);
    let (mut num, mut den) = (0.0, 0.0);
    for p in 0..available {
        let (mut pn, mut pd) = (0.0, 0.0);
        for k in start + p * per..start + (p + 1) * per {
            let r = reference.value(i.time(k));
            let e = i.samples()[k] - r;
            pn += e * e;
            pd += r * r;
        }
        per_period.push(if pd > 0.0 { (pn / pd).sqrt() } else { pn.sqrt() });
        num += pn;
        den += pd;
    }
    let rel_rms = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(EmulationReport { rel_rms, per_period, settle })
}

/// Settings for [`emulate_target`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmulationOptions {
    /// Free constant of the synthesis. For the lossy inductance it is `c2`,
    /// with `c1 = 0`.
    pub constant: FreeConstant,
    pub mode: VoltageSourceMode,
    pub periods: usize,
    pub steps_per_period: usize,
    pub settle_periods: f64,
    /// `None` starts from the steady-state element voltage.
    pub initial: Option<InitialCharge>,
}

impl Default for EmulationOptions {
    fn default() -> Self {
        Self {
            constant: FreeConstant::Auto,
            mode: VoltageSourceMode::ExternalSteadyState,
            periods: 20,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            settle_periods: DEFAULT_SETTLE_PERIODS,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulationRun {
    pub circuit: CircuitSpec,
    pub trace: SimulationTrace,
    pub reference: SteadyStateCurrent,
    pub element_voltage: SteadyStateCurrent,
    pub report: EmulationReport,
}

impl EmulationRun {
    pub fn profile(&self) -> &ModulationProfile {
        match &self.circuit.branch {
            Branch::TimeVaryingCap { profile, .. } => profile,
            Branch::Equivalent(_) => unreachable!("emulation runs always hold a capacitor branch"),
        }
    }
}

/// Profile (and shunt resistance) emulating `target` for voltage `v` and
/// target current `i`.
pub fn synthesize_for(
    target: &TargetElement,
    v: &Waveform,
    i: &Waveform,
    constant: FreeConstant,
) -> Result<(ModulationProfile, Option<f64>)> {
    match *target {
        TargetElement::Capacitance { c_eq } => Ok((synth_capacitance(v, c_eq, constant)?, None)),
        TargetElement::Resistance { r_eq } => Ok((synth_resistance(v, r_eq, constant)?, None)),
        TargetElement::LossyInductance { l_eq, r_l, r_c } => {
            let c1 = match constant {
                FreeConstant::Fixed(_) => FreeConstant::Fixed(0.0),
                auto => auto,
            };
            Ok((synth_inductance(v, i, l_eq, r_l, r_c, c1, constant)?, Some(r_c)))
        }
        TargetElement::GeneralLti(_) | TargetElement::Nonlinear(..) => {
            Err(Error::UnsupportedTarget("circuit emulation covers capacitance, resistance and lossy inductance"))
        }
    }
}

/// Synthesizes a profile for `target`, drives it from the source through
/// `r_s` and compares the source current with the ideal element's.
///
/// In filtered-feedback mode the first run's capacitor voltage (and source
/// current) are low-passed, the profile is rebuilt from them and the
/// circuit is simulated again.
pub fn emulate_target(
    source: HarmonicSignal,
    r_s: f64,
    target: &TargetElement,
    opts: &EmulationOptions,
) -> Result<EmulationRun> {
    target.validate()?;
    let eq = CircuitSpec::new(source, r_s, Branch::Equivalent(target.clone()))?;
    let reference = equivalent_steady_state(&eq, source.omega)?;
    let element_voltage = equivalent_element_voltage(&eq, source.omega)?;
    if opts.periods < 1 || opts.steps_per_period < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least one period and two steps per period, got {} and {}",
            opts.periods, opts.steps_per_period
        )));
    }
    let dt = source.period() / opts.steps_per_period as f64;
    let n = opts.periods * opts.steps_per_period + 1;
    let v = Waveform::from_fn(0.0, dt, n, "V", |t| element_voltage.value(t))?;
    let i = reference.sampled(&v)?;
    let (profile, parallel_r) = synthesize_for(target, &v, &i, opts.constant)?;
    let initial = opts.initial.unwrap_or(InitialCharge::Voltage(element_voltage.value(0.0)));
    let t_end = v.end_time();
    let run = |profile: ModulationProfile| -> Result<(CircuitSpec, SimulationTrace)> {
        let spec = CircuitSpec::new(source, r_s, Branch::TimeVaryingCap { profile, parallel_r })?.with_initial(initial);
        let trace = simulate_tvc(&spec, t_end)?;
        Ok((spec, trace))
    };
    let (mut circuit, mut trace) = run(profile)?;
    if let VoltageSourceMode::FilteredFeedback { cutoff_hz } = opts.mode {
        let v_f = lowpass(&trace.v_cap, cutoff_hz)?;
        let i_f = lowpass(&trace.i, cutoff_hz)?;
        let (profile, _) = synthesize_for(target, &v_f, &i_f, opts.constant)?;
        (circuit, trace) = run(profile.with_mode(opts.mode))?;
    }
    let report = compare_emulation(&trace, &reference, opts.settle_periods * source.period())?;
    Ok(EmulationRun { circuit, trace, reference, element_voltage, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsynth::{synth_capacitance, FreeConstant};
    use crate::signals::{derivative, sample, steady_state_phasor};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn source() -> HarmonicSignal {
        HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0).unwrap()
    }

    fn constant_cap(c: f64, periods: usize) -> ModulationProfile {
        let h = source();
        ModulationProfile::constant(c, 0.0, h.default_dt(), periods * 2000 + 1).unwrap()
    }

    fn tvc(profile: ModulationProfile, parallel_r: Option<f64>) -> CircuitSpec {
        CircuitSpec::new(source(), 10.0, Branch::TimeVaryingCap { profile, parallel_r }).unwrap()
    }

    #[test]
    fn constant_capacitor_phasor() {
        let spec = tvc(constant_cap(1e-9, 12), None);
        let trace = simulate_tvc(&spec, 12e-6).unwrap();
        let h = source();
        let p = steady_state_phasor(&trace.i, h.omega, 5e-6).unwrap();
        let oracle = Complex64::new(1.0, 0.0) / Complex64::new(10.0, -1.0 / (h.omega * 1e-9));
        assert_relative_eq!(p.amplitude, oracle.norm(), max_relative = 1e-4);
        assert_relative_eq!(p.phase, oracle.arg(), epsilon = 1e-4);
        assert_relative_eq!(p.amplitude, 6.27e-3, max_relative = 1e-3);
        assert_relative_eq!(p.phase_degrees(), 86.4, epsilon = 0.05);
        assert!(trace.diverged.is_none());
    }

    #[test]
    fn free_decay() {
        let h = HarmonicSignal::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let (r, c) = (10.0, 1e-9);
        let tau = r * c;
        let dt = tau / 200.0;
        let profile = ModulationProfile::constant(c, 0.0, dt, 1001).unwrap();
        let spec = CircuitSpec::new(h, r, Branch::TimeVaryingCap { profile, parallel_r: None })
            .unwrap()
            .with_initial(InitialCharge::Value(1e-9));
        let trace = simulate_tvc(&spec, 5.0 * tau).unwrap();
        let last = *trace.q.samples().last().unwrap();
        assert_relative_eq!(last, (-5.0f64).exp() * 1e-9, max_relative = 0.01);
    }

    #[test]
    fn ideal_nonfoster_grows_and_diverges() {
        let h = HarmonicSignal::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let (r, c): (f64, f64) = (10.0, -1e-9);
        let tau = (r * c).abs();
        let dt = tau / 200.0;
        let profile = ModulationProfile::constant(c, 0.0, dt, 200 * 30 + 1).unwrap();
        let spec = CircuitSpec::new(h, r, Branch::TimeVaryingCap { profile: profile.clone(), parallel_r: None })
            .unwrap()
            .with_initial(InitialCharge::Value(1e-12));
        assert!(matches!(
            simulate_tvc(&CircuitSpec { allow_nonpositive: false, ..spec.clone() }, 30.0 * tau),
            Err(Error::ProfileNotPositive { .. })
        ));
        let trace = simulate_tvc(&spec.allowing_nonpositive(), 30.0 * tau).unwrap();
        let q = trace.q.samples();
        let rate = (q[600] / q[0]).ln() / (3.0 * tau);
        assert_relative_eq!(rate, 1.0 / tau, max_relative = 0.02);
        let t_div = trace.diverged.expect("diverged");
        assert_relative_eq!(t_div, tau * DIVERGENCE_FACTOR.ln(), max_relative = 0.02);
        assert_eq!(trace.q.end_time(), t_div);
    }

    fn analytic_q(t: f64, r: f64, c: f64, q0: f64) -> f64 {
        let h = source();
        let zc = Complex64::new(1.0, h.omega * r * c);
        let ac = c * h.v_ac / zc;
        let part = |t: f64| c * h.v_dc + (ac * Complex64::from_polar(1.0, h.omega * t)).re;
        part(t) + (q0 - part(0.0)) * (-t / (r * c)).exp()
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let (r, c) = (10.0, 1e-9);
        let t_end = 2e-8;
        let mut errors = Vec::new();
        for n in [5usize, 10, 20, 40] {
            let dt = t_end / n as f64;
            let profile = ModulationProfile::constant(c, 0.0, dt, n + 1).unwrap();
            let spec = tvc(profile, None).with_initial(InitialCharge::Zero);
            let trace = simulate_tvc(&spec, t_end).unwrap();
            let err = trace
                .q
                .samples()
                .iter()
                .enumerate()
                .map(|(k, q)| (q - analytic_q(k as f64 * dt, r, c, 0.0)).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        for w in errors.windows(2) {
            assert!(w[0] / w[1] >= 8.0, "{errors:?}");
        }
    }

    #[test]
    fn parallel_loss_coefficient() {
        let h = HarmonicSignal::new(2.0, 0.0, 1.0, 0.0).unwrap();
        let dt = 1e-10;
        let profile = ModulationProfile::constant(1e-9, 0.0, dt, 2001).unwrap();
        let spec = CircuitSpec::new(h, 10.0, Branch::TimeVaryingCap { profile, parallel_r: Some(10.0) })
            .unwrap()
            .with_initial(InitialCharge::Zero);
        let trace = simulate_tvc(&spec, 2e-7).unwrap();
        // divider settles at half the source, time constant halves
        assert_relative_eq!(*trace.v_cap.samples().last().unwrap(), 1.0, max_relative = 1e-6);
        let k = 50;
        let t = trace.q.time(k);
        assert_relative_eq!(trace.v_cap.samples()[k], 1.0 - (-t / 5e-9).exp(), max_relative = 1e-6);
        let dq = derivative(&trace.q).unwrap();
        for k in 1..trace.len() - 1 {
            let branch = dq.samples()[k] + trace.v_cap.samples()[k] / 10.0;
            assert!((branch - trace.i.samples()[k]).abs() < 1e-3 * 0.2);
        }
    }

    fn equivalent(target: TargetElement) -> CircuitSpec {
        CircuitSpec::new(source(), 10.0, Branch::Equivalent(target)).unwrap()
    }

    #[test]
    fn equivalent_references() {
        let omega = 2.0 * PI * 1e6;
        let s = equivalent_steady_state(&equivalent(TargetElement::Capacitance { c_eq: -1e-9 }), omega).unwrap();
        assert_relative_eq!(s.ac.amplitude, 1.0 / Complex64::new(10.0, 159.15494).norm(), max_relative = 1e-6);
        assert_relative_eq!(s.ac.amplitude, 6.27e-3, max_relative = 1e-3);
        assert_eq!(s.dc, 0.0);

        let s = equivalent_steady_state(&equivalent(TargetElement::Resistance { r_eq: 10.0 }), omega).unwrap();
        assert_relative_eq!(s.dc, 0.3, max_relative = 1e-12);
        assert_relative_eq!(s.ac.amplitude, 0.05, max_relative = 1e-12);

        let lossy = TargetElement::LossyInductance { l_eq: -1e-6, r_l: 1.0, r_c: 1.0 };
        let s = equivalent_steady_state(&equivalent(lossy), omega).unwrap();
        assert_relative_eq!(s.ac.amplitude, 1.0 / Complex64::new(11.0, -omega * 1e-6).norm(), max_relative = 1e-12);
        assert_relative_eq!(s.ac.amplitude, 79.0e-3, max_relative = 1e-3);
        assert_relative_eq!(s.dc, 6.0 / 11.0, max_relative = 1e-12);

        let general = TargetElement::GeneralLti(crate::kernels::AdmittanceKernel::zero());
        assert!(matches!(equivalent_steady_state(&equivalent(general), omega), Err(Error::UnsupportedTarget(_))));
    }

    #[test]
    fn element_voltage_closes_kvl() {
        let omega = 2.0 * PI * 1e6;
        let spec = equivalent(TargetElement::Resistance { r_eq: 10.0 });
        let v = equivalent_element_voltage(&spec, omega).unwrap();
        assert_relative_eq!(v.dc, 3.0, max_relative = 1e-12);
        assert_relative_eq!(v.ac.amplitude, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn emulated_negative_capacitor_matches_reference() {
        let h = source();
        let omega = h.omega;
        let eq = equivalent(TargetElement::Capacitance { c_eq: -1e-9 });
        let v_elem = equivalent_element_voltage(&eq, omega).unwrap();
        let v = Waveform::from_fn(0.0, h.default_dt(), 20 * 2000 + 1, "V", |t| v_elem.value(t)).unwrap();
        let profile = synth_capacitance(&v, -1e-9, FreeConstant::Auto).unwrap();
        let frozen = profile.frozen_at_mean().unwrap();
        let reference = equivalent_steady_state(&eq, omega).unwrap();
        let settle = DEFAULT_SETTLE_PERIODS * h.period();

        let spec = tvc(profile, None).with_initial(InitialCharge::Voltage(v_elem.value(0.0)));
        let trace = simulate_tvc(&spec, 20e-6).unwrap();
        let report = compare_emulation(&trace, &reference, settle).unwrap();
        assert!(report.rel_rms < 5e-3, "{}", report.rel_rms);
        assert_eq!(report.periods(), 15);

        let spec = tvc(frozen, None);
        let trace = simulate_tvc(&spec, 20e-6).unwrap();
        let report = compare_emulation(&trace, &reference, settle).unwrap();
        assert!(report.rel_rms > 0.5, "{}", report.rel_rms);
    }

    #[test]
    fn reference_against_itself() {
        let h = source();
        let reference = equivalent_steady_state(&equivalent(TargetElement::Resistance { r_eq: 10.0 }), h.omega).unwrap();
        let grid = sample(&h, 0.0, h.default_dt(), 8 * 2000 + 1, "V").unwrap();
        let i = reference.sampled(&grid).unwrap();
        let trace = SimulationTrace::from_parts(i.clone().with_unit("C"), grid, i).unwrap();
        let report = compare_emulation(&trace, &reference, 1e-6).unwrap();
        assert_eq!(report.rel_rms, 0.0);
        let err = compare_emulation(&trace, &reference, 6e-6).unwrap_err();
        assert!(matches!(err, Error::WindowTooShort { .. }));
    }

    #[test]
    fn reference_targets_are_emulated() {
        let targets = [
            TargetElement::Capacitance { c_eq: -1e-9 },
            TargetElement::Resistance { r_eq: 10.0 },
            TargetElement::LossyInductance { l_eq: -1e-6, r_l: 1.0, r_c: 1.0 },
        ];
        for target in &targets {
            let run = emulate_target(source(), 10.0, target, &EmulationOptions::default()).unwrap();
            assert!(run.report.rel_rms < 5e-3, "{target:?}: {}", run.report.rel_rms);
            assert!(run.profile().min() > 0.0);
        }
    }

    #[test]
    fn filtered_feedback_stays_close() {
        let opts = EmulationOptions {
            mode: VoltageSourceMode::FilteredFeedback { cutoff_hz: 3e6 },
            ..Default::default()
        };
        let run = emulate_target(source(), 10.0, &TargetElement::Resistance { r_eq: 10.0 }, &opts).unwrap();
        assert!(run.report.rel_rms < 0.02, "{}", run.report.rel_rms);
        assert_eq!(run.profile().mode, opts.mode);
    }

    #[test]
    fn trace_csv_header() {
        let spec = tvc(constant_cap(1e-9, 1), None);
        let trace = simulate_tvc(&spec, 1e-6).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,q,v_cap,i\n"));
        assert_eq!(text.lines().count(), 2002);
    }
}

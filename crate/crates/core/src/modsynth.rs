//! Synthesis of capacitance modulation profiles.
//!
//! A time-varying capacitor driven by `v(t)` carries `i = d/dt[C v]`, so any
//! target current `i_target` is reproduced by choosing the charge
//! `C(t) v(t) = beta + integral of i_target`, i.e. `C = (beta + Q) / v`.
//! Every routine here builds `Q` for one kind of target and then fixes the
//! free constant, either as given or automatically so that the profile never
//! drops below a positivity margin.

use crate::kernels::{convolve_second_order, smooth_convolution, AdmittanceKernel, VolterraKernel2};
use crate::signals::{cumulative_integral, current_unit_for, derivative, Waveform};
use crate::{Error, Result};

/// Relative voltage floor below which `v` counts as vanishing.
pub const VOLTAGE_FLOOR: f64 = 1e-6;

/// Fraction of the target scale used as the default positivity margin.
pub const DEFAULT_MARGIN_FRACTION: f64 = 0.1;

/// How a free integration constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FreeConstant {
    /// Smallest value that keeps `C(t)` at or above the default margin.
    #[default]
    Auto,
    /// As `Auto`, with an explicit margin in farads.
    AutoWithMargin(f64),
    /// Used as given; positivity is not enforced.
    Fixed(f64),
}

/// Network the capacitor is made to emulate.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetElement {
    Capacitance { c_eq: f64 },
    Resistance { r_eq: f64 },
    /// `L_eq` in series with `R_L`, emulated by `C(t)` in parallel with `R_C`.
    LossyInductance { l_eq: f64, r_l: f64, r_c: f64 },
    GeneralLti(AdmittanceKernel),
    Nonlinear(AdmittanceKernel, VolterraKernel2),
}

impl TargetElement {
    pub fn kind(&self) -> TargetKind {
        match self {
            TargetElement::Capacitance { .. } => TargetKind::Capacitance,
            TargetElement::Resistance { .. } => TargetKind::Resistance,
            TargetElement::LossyInductance { .. } => TargetKind::LossyInductance,
            TargetElement::GeneralLti(_) => TargetKind::GeneralLti,
            TargetElement::Nonlinear(..) => TargetKind::Nonlinear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
            }
        };
        match *self {
            TargetElement::Capacitance { c_eq } => finite("C_eq", c_eq),
            TargetElement::Resistance { r_eq } => {
                finite("R_eq", r_eq)?;
                if r_eq == 0.0 {
                    return Err(Error::InvalidParameter("R_eq must be nonzero".to_string()));
                }
                Ok(())
            }
            TargetElement::LossyInductance { l_eq, r_l, r_c } => {
                finite("L_eq", l_eq)?;
                finite("R_L", r_l)?;
                finite("R_C", r_c)?;
                if r_l == 0.0 {
                    return Err(Error::ZeroLossResistance("R_L"));
                }
                if r_c == 0.0 {
                    return Err(Error::ZeroLossResistance("R_C"));
                }
                Ok(())
            }
            TargetElement::GeneralLti(_) | TargetElement::Nonlinear(..) => Ok(()),
        }
    }
}

/// Tag recorded on a profile naming what it emulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Capacitance,
    Resistance,
    LossyInductance,
    GeneralLti,
    Nonlinear,
    /// Hand-built profile, e.g. a frozen constant.
    Static,
}

impl TargetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TargetKind::Capacitance => "capacitance",
            TargetKind::Resistance => "resistance",
            TargetKind::LossyInductance => "lossy-inductance",
            TargetKind::GeneralLti => "general-lti",
            TargetKind::Nonlinear => "nonlinear",
            TargetKind::Static => "static",
        }
    }
}

/// Where the voltage that drives the synthesis came from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum VoltageSourceMode {
    /// Prescribed steady-state voltage across the element.
    #[default]
    ExternalSteadyState,
    /// Measured voltage passed through the zero-phase low-pass.
    FilteredFeedback { cutoff_hz: f64 },
}

/// Constants used to build a profile. Only the ones meaningful for the
/// target are set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthConstants {
    pub beta: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

/// A synthesized capacitance waveform `C(t)` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationProfile {
    capacitance: Waveform,
    pub constants: SynthConstants,
    pub target: TargetKind,
    /// Margin enforced by automatic constant selection, if any.
    pub positivity_margin: Option<f64>,
    pub mode: VoltageSourceMode,
}

impl ModulationProfile {
    /// Wraps an arbitrary capacitance waveform (unit `F`).
    pub fn from_waveform(capacitance: Waveform) -> Result<Self> {
        capacitance.require_unit("F")?;
        Ok(Self {
            capacitance,
            constants: SynthConstants::default(),
            target: TargetKind::Static,
            positivity_margin: None,
            mode: VoltageSourceMode::ExternalSteadyState,
        })
    }

    /// Constant capacitance on `n` samples.
    pub fn constant(value: f64, t0: f64, dt: f64, n: usize) -> Result<Self> {
        Self::from_waveform(Waveform::constant(t0, dt, n, value, "F")?)
    }

    pub fn capacitance(&self) -> &Waveform {
        &self.capacitance
    }

    pub fn min(&self) -> f64 {
        self.capacitance.min()
    }

    pub fn max(&self) -> f64 {
        self.capacitance.max()
    }

    pub fn mean(&self) -> f64 {
        self.capacitance.mean()
    }

    pub fn with_mode(mut self, mode: VoltageSourceMode) -> Self {
        self.mode = mode;
        self
    }

    /// Fails unless every sample is strictly positive.
    pub fn ensure_positive(self) -> Result<Self> {
        let min = self.min();
        if min > 0.0 {
            Ok(self)
        } else {
            Err(Error::UnsatisfiablePositivity { min })
        }
    }

    /// The same profile frozen at its mean value.
    pub fn frozen_at_mean(&self) -> Result<Self> {
        let c = &self.capacitance;
        Self::constant(self.mean(), c.t0(), c.dt(), c.len())
    }

    /// Current `d/dt[C v]` drawn when the capacitor is driven by `v`. `v` is
    /// cut to the profile's grid first.
    pub fn current(&self, v: &Waveform) -> Result<Waveform> {
        let v = align_to(v, &self.capacitance)?;
        let charge = self.capacitance.zip_with(&v, "C", |c, vk| c * vk)?;
        let i = derivative(&charge)?;
        Ok(i.with_unit(current_unit_for(v.unit())?))
    }
}

/// Cuts `w` to the grid of `reference`, which must be a sub-grid of it.
pub(crate) fn align_to(w: &Waveform, reference: &Waveform) -> Result<Waveform> {
    if w.same_grid(reference) {
        return Ok(w.clone());
    }
    let offset = (reference.t0() - w.t0()) / w.dt();
    let start = offset.round();
    if (w.dt() - reference.dt()).abs() > 1e-9 * w.dt() || start < 0.0 || (offset - start).abs() > 1e-6 {
        return Err(Error::GridMismatch("waveform does not contain the reference grid".to_string()));
    }
    let start = start as usize;
    w.slice(start, start + reference.len())
}

/// Rejects voltages that vanish or change sign anywhere on the grid.
pub fn check_nonvanishing(v: &Waveform) -> Result<()> {
    let peak = v.samples().iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return Err(Error::VoltageCrossesZero { t: v.t0(), value: 0.0 });
    }
    let floor = VOLTAGE_FLOOR * peak;
    let sign = v.samples()[0].signum();
    for (k, &s) in v.samples().iter().enumerate() {
        if s.abs() < floor || s.signum() != sign {
            return Err(Error::VoltageCrossesZero { t: v.time(k), value: s });
        }
    }
    Ok(())
}

/// Smallest constant `k` with `min_t (k / v + raw) = margin`.
///
/// For `v > 0` this is `max_t v (margin - raw)`; for `v < 0` the
/// inequality flips and the extreme is a minimum.
pub fn select_constant_for_positivity(raw: &Waveform, v: &Waveform, margin: f64) -> Result<f64> {
    raw.require_same_grid(v)?;
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter(format!("positivity margin must be positive, got {margin}")));
    }
    let positive = v.samples()[0] > 0.0;
    if v.samples().iter().any(|&s| s == 0.0 || (s > 0.0) != positive) {
        return Err(Error::MixedSignVoltage);
    }
    let candidates = raw.samples().iter().zip(v.samples()).map(|(&r, &vk)| vk * (margin - r));
    Ok(if positive {
        candidates.fold(f64::NEG_INFINITY, f64::max)
    } else {
        candidates.fold(f64::INFINITY, f64::min)
    })
}

fn median_abs(w: &Waveform) -> f64 {
    let mut xs: Vec<f64> = w.samples().to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let m = if n % 2 == 1 { xs[n / 2] } else { 0.5 * (xs[n / 2 - 1] + xs[n / 2]) };
    m.abs()
}

/// Default margin for a raw profile: a fraction of its median magnitude,
/// falling back to its peak magnitude.
fn default_margin(raw: &Waveform) -> Result<f64> {
    let median = median_abs(raw);
    let peak = raw.samples().iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let scale = if median > 0.0 { median } else { peak };
    if scale > 0.0 {
        Ok(DEFAULT_MARGIN_FRACTION * scale)
    } else {
        Err(Error::InvalidParameter(
            "cannot derive a default positivity margin from an all-zero profile; pass an explicit margin".to_string(),
        ))
    }
}

/// Resolves a free constant against `raw` (the profile without the constant
/// term). Returns the constant and the margin it enforces, if any.
fn resolve_constant(
    choice: FreeConstant,
    raw: &Waveform,
    v: &Waveform,
    default: impl FnOnce() -> Result<f64>,
) -> Result<(f64, Option<f64>)> {
    match choice {
        FreeConstant::Fixed(k) => {
            if !k.is_finite() {
                return Err(Error::InvalidParameter(format!("constant must be finite, got {k}")));
            }
            Ok((k, None))
        }
        FreeConstant::Auto => {
            let margin = default()?;
            Ok((select_constant_for_positivity(raw, v, margin)?, Some(margin)))
        }
        FreeConstant::AutoWithMargin(margin) => Ok((select_constant_for_positivity(raw, v, margin)?, Some(margin))),
    }
}

/// `C = (k + charge) / v` for the resolved `k`.
fn assemble(
    v: &Waveform,
    charge: &Waveform,
    choice: FreeConstant,
    default: impl FnOnce(&Waveform) -> Result<f64>,
) -> Result<(Waveform, f64, Option<f64>)> {
    let raw = charge.zip_with(v, "F", |q, vk| q / vk)?;
    let (k, margin) = resolve_constant(choice, &raw, v, || default(&raw))?;
    let c = charge.zip_with(v, "F", |q, vk| (k + q) / vk)?;
    Ok((c, k, margin))
}

fn profile(capacitance: Waveform, target: TargetKind, constants: SynthConstants, margin: Option<f64>) -> ModulationProfile {
    ModulationProfile {
        capacitance,
        constants,
        target,
        positivity_margin: margin,
        mode: VoltageSourceMode::ExternalSteadyState,
    }
}

/// `C(t) = c1 / v(t) + C_eq`.
pub fn synth_capacitance(v: &Waveform, c_eq: f64, c1: FreeConstant) -> Result<ModulationProfile> {
    check_nonvanishing(v)?;
    if !c_eq.is_finite() {
        return Err(Error::InvalidParameter(format!("C_eq must be finite, got {c_eq}")));
    }
    let charge = v.map("C", |vk| c_eq * vk)?;
    let (c, k, margin) = assemble(v, &charge, c1, |raw| {
        if c_eq != 0.0 {
            Ok(DEFAULT_MARGIN_FRACTION * c_eq.abs())
        } else {
            default_margin(raw)
        }
    })?;
    let constants = SynthConstants { c1: Some(k), ..Default::default() };
    Ok(profile(c, TargetKind::Capacitance, constants, margin))
}

/// `C(t) = c2 / v(t) + (1 / (R_eq v(t))) int_0^t v`.
pub fn synth_resistance(v: &Waveform, r_eq: f64, c2: FreeConstant) -> Result<ModulationProfile> {
    check_nonvanishing(v)?;
    TargetElement::Resistance { r_eq }.validate()?;
    let integral = cumulative_integral(v, 0.0);
    let charge = integral.map("C", |x| x / r_eq)?;
    let (c, k, margin) = assemble(v, &charge, c2, default_margin)?;
    let constants = SynthConstants { c2: Some(k), ..Default::default() };
    Ok(profile(c, TargetKind::Resistance, constants, margin))
}

/// Lossy inductance `L_eq + R_L` emulated by `C(t)` in parallel with `R_C`:
///
/// `C = (c1/R_L + c2)/v - (L_eq/R_L) i/v + (1/R_L - 1/R_C) int v / v`.
///
/// The two integration constants only enter through `c1/R_L + c2`. When
/// either is automatic the lump is chosen for positivity and the automatic
/// one absorbs the difference (`c1` is taken as zero when both are).
pub fn synth_inductance(
    v: &Waveform,
    i: &Waveform,
    l_eq: f64,
    r_l: f64,
    r_c: f64,
    c1: FreeConstant,
    c2: FreeConstant,
) -> Result<ModulationProfile> {
    TargetElement::LossyInductance { l_eq, r_l, r_c }.validate()?;
    check_nonvanishing(v)?;
    i.require_unit(&current_unit_for(v.unit())?)?;
    v.require_same_grid(i)?;
    let integral = cumulative_integral(v, 0.0);
    let loss = 1.0 / r_l - 1.0 / r_c;
    let charge = Waveform::new(
        v.t0(),
        v.dt(),
        i.samples()
            .iter()
            .zip(integral.samples())
            .map(|(&ik, &int_v)| -l_eq / r_l * ik + loss * int_v)
            .collect(),
        "C",
    )?;

    let (lump_choice, fixed_c1, fixed_c2) = match (c1, c2) {
        (FreeConstant::Fixed(a), FreeConstant::Fixed(b)) => (FreeConstant::Fixed(a / r_l + b), Some(a), Some(b)),
        (FreeConstant::Fixed(a), auto) => (auto, Some(a), None),
        (auto, FreeConstant::Fixed(b)) => (auto, None, Some(b)),
        (auto, _) => (auto, None, None),
    };
    let (c, lump, margin) = assemble(v, &charge, lump_choice, default_margin)?;
    let (c1v, c2v) = match (fixed_c1, fixed_c2) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, lump - a / r_l),
        (None, Some(b)) => (r_l * (lump - b), b),
        (None, None) => (0.0, lump),
    };
    let constants = SynthConstants { c1: Some(c1v), c2: Some(c2v), beta: None };
    Ok(profile(c, TargetKind::LossyInductance, constants, margin))
}

/// Charge `Q(t)` whose derivative is the kernel current, on the kernel's
/// valid sub-grid. The `delta'` part integrates symbolically to `c0 v(t)`;
/// the regular part is integrated from zero at the start of the sub-grid.
fn first_order_charge(k: &AdmittanceKernel, v: &Waveform) -> Result<Waveform> {
    current_unit_for(v.unit())?;
    let (start, smooth) = smooth_convolution(k, v)?;
    let v_valid = v.slice_from(start)?;
    let regular = Waveform::new(
        v_valid.t0(),
        v_valid.dt(),
        v_valid
            .samples()
            .iter()
            .enumerate()
            .map(|(n, &vk)| k.g0 * vk + smooth.as_ref().map_or(0.0, |s| s[n]))
            .collect(),
        "A",
    )?;
    let integral = cumulative_integral(&regular, 0.0);
    v_valid.zip_with(&integral, "C", |vk, q| k.c0 * vk + q)
}

/// General LTI target: `C = (beta + int i_kernel) / v`.
pub fn synth_general(v: &Waveform, k: &AdmittanceKernel, beta: FreeConstant) -> Result<ModulationProfile> {
    check_nonvanishing(v)?;
    let charge = first_order_charge(k, v)?;
    let v_valid = align_to(v, &charge)?;
    let (c, b, margin) = assemble(&v_valid, &charge, beta, default_margin)?;
    let constants = SynthConstants { beta: Some(b), ..Default::default() };
    Ok(profile(c, TargetKind::GeneralLti, constants, margin))
}

/// Weakly nonlinear target: first-order plus second-order Volterra current.
///
/// The profile lives where both convolutions are defined. The first-order
/// charge keeps its own integration origin, so with a zero second-order
/// kernel the result coincides with [`synth_general`] on the overlap.
pub fn synth_nonlinear(
    v: &Waveform,
    k1: &AdmittanceKernel,
    k2: &VolterraKernel2,
    beta: FreeConstant,
) -> Result<ModulationProfile> {
    check_nonvanishing(v)?;
    let charge1 = first_order_charge(k1, v)?;
    let i2 = convolve_second_order(k2, v)?;
    let (start1, start2) = (charge1.t0(), i2.t0());
    let (charge1, i2) = if start1 >= start2 {
        (charge1.clone(), align_to(&i2, &charge1)?)
    } else {
        let i2_grid_charge = align_to(&charge1, &i2)?;
        (i2_grid_charge, i2)
    };
    let charge2 = cumulative_integral(&i2, 0.0);
    let charge = charge1.zip_with(&charge2, "C", |a, b| a + b)?;
    let v_valid = align_to(v, &charge)?;
    let (c, b, margin) = assemble(&v_valid, &charge, beta, default_margin)?;
    let constants = SynthConstants { beta: Some(b), ..Default::default() };
    Ok(profile(c, TargetKind::Nonlinear, constants, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{sample, steady_state_phasor, HarmonicSignal};
    use approx::assert_relative_eq;

    fn drive_voltage() -> (HarmonicSignal, Waveform) {
        let h = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0).unwrap();
        let v = sample(&h, 0.0, h.default_dt(), 4 * 2000 + 1, "V").unwrap();
        (h, v)
    }

    fn rel_rms(a: &Waveform, b: &Waveform) -> f64 {
        let num: f64 = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.samples().iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn capacitance_with_fixed_constant() {
        let (_, v) = drive_voltage();
        let p = synth_capacitance(&v, -1e-9, FreeConstant::Fixed(10e-9)).unwrap();
        assert_relative_eq!(p.min(), 10.0 / 7.0 * 1e-9 - 1e-9, max_relative = 1e-9);
        assert_relative_eq!(p.max(), 1e-9, max_relative = 1e-9);
        assert_eq!(p.positivity_margin, None);

        let flat = synth_capacitance(&v, -1e-9, FreeConstant::Fixed(0.0)).unwrap();
        assert!(flat.capacitance().samples().iter().all(|&c| c == -1e-9));
        assert!(matches!(flat.ensure_positive(), Err(Error::UnsatisfiablePositivity { .. })));
    }

    #[test]
    fn auto_constant_satisfies_realizability_inequality() {
        let (h, v) = drive_voltage();
        let c_eq = -1e-9;
        let p = synth_capacitance(&v, c_eq, FreeConstant::Auto).unwrap();
        let c1 = p.constants.c1.unwrap();
        assert!(c1 > -(h.v_dc + h.v_ac) * c_eq);
        let margin = p.positivity_margin.unwrap();
        assert_relative_eq!(margin, 0.1e-9, max_relative = 1e-12);
        assert!((p.min() - margin).abs() <= 1e-12 * margin);
    }

    #[test]
    fn constant_selection_closed_form() {
        let (_, v) = drive_voltage();
        let raw = Waveform::constant(v.t0(), v.dt(), v.len(), -1e-9, "F").unwrap();
        let k = select_constant_for_positivity(&raw, &v, 0.1e-9).unwrap();
        assert_relative_eq!(k, 7.7e-9, max_relative = 1e-12);

        let raw = Waveform::constant(v.t0(), v.dt(), v.len(), 2e-9, "F").unwrap();
        let k = select_constant_for_positivity(&raw, &v, 0.1e-9).unwrap();
        assert!(k <= 0.0);
        let min = raw.samples().iter().zip(v.samples()).map(|(r, vk)| k / vk + r).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(min, 0.1e-9, max_relative = 1e-12);

        let neg = v.map("V", |x| -x).unwrap();
        let raw = Waveform::constant(v.t0(), v.dt(), v.len(), -1e-9, "F").unwrap();
        let k = select_constant_for_positivity(&raw, &neg, 0.1e-9).unwrap();
        let min = raw.samples().iter().zip(neg.samples()).map(|(r, vk)| k / vk + r).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(min, 0.1e-9, max_relative = 1e-9);

        let mixed = v.map("V", |x| x - 6.0).unwrap();
        assert_eq!(select_constant_for_positivity(&raw, &mixed, 1e-10), Err(Error::MixedSignVoltage));
    }

    #[test]
    fn vanishing_voltage_is_rejected() {
        let h = HarmonicSignal::from_frequency(0.5, 1.0, 1e6, 0.0).unwrap();
        let v = sample(&h, 0.0, h.default_dt(), 2001, "V").unwrap();
        assert!(matches!(synth_capacitance(&v, 1e-9, FreeConstant::Auto), Err(Error::VoltageCrossesZero { .. })));
        assert!(matches!(synth_resistance(&v, 10.0, FreeConstant::Auto), Err(Error::VoltageCrossesZero { .. })));
    }

    #[test]
    fn resistance_from_constant_voltage_grows_linearly() {
        let dt = 1e-9;
        let v = Waveform::constant(0.0, dt, 1001, 5.0, "V").unwrap();
        let p = synth_resistance(&v, 10.0, FreeConstant::Fixed(0.0)).unwrap();
        for (k, &c) in p.capacitance().samples().iter().enumerate() {
            assert_relative_eq!(c, v.time(k) / 10.0, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn resistance_sign_flip_reflects_about_constant_term() {
        let (_, v) = drive_voltage();
        let c2 = 3e-7;
        let plus = synth_resistance(&v, 10.0, FreeConstant::Fixed(c2)).unwrap();
        let minus = synth_resistance(&v, -10.0, FreeConstant::Fixed(c2)).unwrap();
        for k in 0..v.len() {
            let sum = plus.capacitance().samples()[k] + minus.capacitance().samples()[k];
            assert_relative_eq!(sum, 2.0 * c2 / v.samples()[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn inductance_with_equal_losses_is_periodic() {
        let (h, v) = drive_voltage();
        let i = v.map("A", |x| 0.05 + 0.01 * x).unwrap();
        let p = synth_inductance(&v, &i, -1e-6, 1.0, 1.0, FreeConstant::Fixed(0.0), FreeConstant::Fixed(1e-6)).unwrap();
        let per = (h.period() / v.dt()).round() as usize;
        let c = p.capacitance().samples();
        for k in 0..c.len() - per {
            assert_relative_eq!(c[k], c[k + per], max_relative = 1e-9);
        }
    }

    #[test]
    fn inductance_degenerates_to_resistance() {
        let (_, v) = drive_voltage();
        let i = v.map("A", |x| x / 7.0).unwrap();
        let (r, c1, c2) = (7.0, 2e-6, 3e-7);
        let ind = synth_inductance(&v, &i, 0.0, r, r * 1e300, FreeConstant::Fixed(c1), FreeConstant::Fixed(c2));
        // R_C -> infinity leaves the 1/R_L integral term
        let ind = ind.unwrap();
        let res = synth_resistance(&v, r, FreeConstant::Fixed(c1 / r + c2)).unwrap();
        for (a, b) in ind.capacitance().samples().iter().zip(res.capacitance().samples()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn inductance_rejects_zero_losses() {
        let (_, v) = drive_voltage();
        let i = v.map("A", |x| x).unwrap();
        let err = synth_inductance(&v, &i, 1e-6, 0.0, 1.0, FreeConstant::Auto, FreeConstant::Auto).unwrap_err();
        assert_eq!(err, Error::ZeroLossResistance("R_L"));
        let err = synth_inductance(&v, &i, 1e-6, 1.0, 0.0, FreeConstant::Auto, FreeConstant::Auto).unwrap_err();
        assert_eq!(err, Error::ZeroLossResistance("R_C"));
        let wrong_unit = v.clone();
        assert!(matches!(
            synth_inductance(&v, &wrong_unit, 1e-6, 1.0, 1.0, FreeConstant::Auto, FreeConstant::Auto),
            Err(Error::UnitMismatch { .. })
        ));
    }

    #[test]
    fn inductance_constants_split() {
        let (_, v) = drive_voltage();
        let i = v.map("A", |x| 0.1 * x).unwrap();
        let auto = synth_inductance(&v, &i, -1e-6, 2.0, 1.0, FreeConstant::Auto, FreeConstant::Auto).unwrap();
        let c = auto.constants;
        assert_eq!(c.c1, Some(0.0));
        let pinned = synth_inductance(&v, &i, -1e-6, 2.0, 1.0, FreeConstant::Fixed(1e-6), FreeConstant::Auto).unwrap();
        let lump = pinned.constants.c1.unwrap() / 2.0 + pinned.constants.c2.unwrap();
        assert_relative_eq!(lump, c.c2.unwrap(), max_relative = 1e-12);
        assert_eq!(pinned.capacitance(), auto.capacitance());
    }

    #[test]
    fn zero_kernel_is_open_circuit() {
        let (_, v) = drive_voltage();
        let b = 4e-9;
        let p = synth_general(&v, &AdmittanceKernel::zero(), FreeConstant::Fixed(b)).unwrap();
        for (c, vk) in p.capacitance().samples().iter().zip(v.samples()) {
            assert_relative_eq!(*c, b / vk, max_relative = 1e-15);
        }
    }

    #[test]
    fn nonlinear_memoryless_on_dc_is_a_ramp() {
        let dt = 1e-9;
        let vdc = 3.0;
        let v = Waveform::constant(0.0, dt, 500, vdc, "V").unwrap();
        let w = 1e-3;
        let k2 = VolterraKernel2::memoryless(w, dt).unwrap();
        let beta = 1e-9;
        let p = synth_nonlinear(&v, &AdmittanceKernel::zero(), &k2, FreeConstant::Fixed(beta)).unwrap();
        let t_start = p.capacitance().t0();
        for (k, &c) in p.capacitance().samples().iter().enumerate() {
            let t = p.capacitance().time(k) - t_start;
            assert_relative_eq!(c, (beta + w * vdc * vdc * t) / vdc, max_relative = 1e-9);
        }
    }

    #[test]
    fn round_trip_current_for_each_element() {
        let (h, v) = drive_voltage();
        let dv = derivative(&v).unwrap();
        let c_eq = -1e-9;
        let p = synth_capacitance(&v, c_eq, FreeConstant::Auto).unwrap();
        let i = p.current(&v).unwrap();
        assert!(rel_rms(&i, &dv.scale(c_eq).unwrap().with_unit("A")) < 5e-3);

        let p = synth_resistance(&v, -25.0, FreeConstant::Auto).unwrap();
        let i = p.current(&v).unwrap();
        assert!(rel_rms(&i, &v.scale(-1.0 / 25.0).unwrap().with_unit("A")) < 5e-3);

        // smooth-kernel target
        let tau = 0.2 * h.period();
        let tail = Waveform::from_fn(0.0, v.dt(), 401, "S/s", |g| 1e-2 / tau * (-g / tau).exp()).unwrap();
        let k = AdmittanceKernel::new(0.02, 2e-9, Some(tail)).unwrap();
        let p = synth_general(&v, &k, FreeConstant::Auto).unwrap();
        let target = crate::kernels::convolve_first_order(&k, &v).unwrap();
        let i = p.current(&v).unwrap();
        assert!(rel_rms(&i, &target) < 5e-3);
        assert!(p.min() >= p.positivity_margin.unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn second_harmonic_scales_quadratically() {
        let vdc = 6.0;
        let omega = 2.0 * std::f64::consts::PI * 1e6;
        let dt = 1e-6 / 2000.0;
        let k1 = AdmittanceKernel::conductance(1e-2).unwrap();
        let rows: Vec<Vec<f64>> = (0..21)
            .map(|a| (0..21).map(|b| 1e12 * (-((a + b) as f64) / 10.0).exp()).collect())
            .collect();
        let k2 = VolterraKernel2::new(20.0 * dt, &rows).unwrap();
        let mut amps = Vec::new();
        for frac in [0.05, 0.1, 0.2] {
            let h = HarmonicSignal::new(vdc, frac * vdc, omega, 0.0).unwrap();
            let v = sample(&h, 0.0, dt, 12 * 2000, "V").unwrap();
            let p = synth_nonlinear(&v, &k1, &k2, FreeConstant::Auto).unwrap();
            let i = p.current(&v).unwrap();
            // whole fundamental periods so the first harmonic cannot leak in
            let start = i.index_at_or_after(i.t0() + 1e-6);
            let i = i.slice(start, start + 8 * 2000 + 1).unwrap();
            amps.push(steady_state_phasor(&i, 2.0 * omega, i.t0()).unwrap().amplitude / (frac * frac));
        }
        for a in &amps[1..] {
            assert_relative_eq!(*a, amps[0], max_relative = 0.05);
        }
    }
}

//! Circle-criterion stability of the first-order charge equation.
//!
//! Writing the charge equation as `dq/dt = -f(t) q + u(t)` with
//! `f(t) = k / (R C(t))` bounded in `[a, b]`, the feedback loop around the
//! integrator `G(s) = 1/s` is absolutely stable when the Nyquist locus of
//! `G` stays clear of the critical circle through `-1/a` and `-1/b`. The
//! locus of `1/s` is the imaginary axis approached from the right, so the
//! test collapses to asking that the circle lie strictly in the open left
//! half-plane.
//!
//! The criterion is sufficient only: a failed test yields
//! [`Verdict::NotProvenStable`], never "unstable".

use std::fmt;

use crate::modsynth::ModulationProfile;
use crate::{Error, Result};

/// How the resistances enter the coefficient in front of `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    /// Source resistance only: coefficient `1 / (R C)`.
    Series { r: f64 },
    /// `R_C` across the capacitor: coefficient `(R_s/R_C + 1) / (R_s C)`.
    ParallelLoss { r_s: f64, r_c: f64 },
}

impl Topology {
    /// Factor `g` with `f(t) = g / C(t)`.
    pub fn gain(&self) -> Result<f64> {
        match *self {
            Topology::Series { r } => {
                positive(r)?;
                Ok(1.0 / r)
            }
            Topology::ParallelLoss { r_s, r_c } => {
                positive(r_s)?;
                positive(r_c)?;
                Ok((r_s / r_c + 1.0) / r_s)
            }
        }
    }
}

fn positive(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveResistance(r))
    }
}

/// Exact extremes of the coefficient `f(t)` over the profile grid.
///
/// Profiles that vanish or change sign are rejected; uniformly negative
/// profiles are accepted and give negative bounds.
pub fn modulation_bounds(profile: &ModulationProfile, topology: Topology) -> Result<(f64, f64)> {
    let g = topology.gain()?;
    let c = profile.capacitance();
    let positive = c.samples()[0] > 0.0;
    for (k, &x) in c.samples().iter().enumerate() {
        if x == 0.0 || (x > 0.0) != positive || !x.is_finite() {
            return Err(Error::ProfileCrossesZero { t: c.time(k) });
        }
    }
    let (lo, hi) = (g / c.max(), g / c.min());
    // 1/x is decreasing on each half-line
    Ok((lo.min(hi), lo.max(hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    NotProvenStable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::NotProvenStable => "not-proven-stable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub a: f64,
    pub b: f64,
    pub circle_center: f64,
    /// Infinite when a bound is zero (the circle degenerates to a half-plane).
    pub circle_radius: f64,
    pub verdict: Verdict,
    pub reason: String,
}

impl StabilityReport {
    /// Key-value block for run reports.
    pub fn to_text(&self) -> String {
        format!(
            "a = {:e} 1/s\nb = {:e} 1/s\ncircle_center = {:e} s\ncircle_radius = {:e} s\nverdict = {}\nreason = {}\n\
             note = the circle criterion is sufficient only; not-proven-stable is not a proof of instability\n",
            self.a, self.b, self.circle_center, self.circle_radius, self.verdict, self.reason
        )
    }
}

/// Builds the critical circle for sector `[a, b]` and decides stability.
pub fn circle_criterion(a: f64, b: f64) -> Result<StabilityReport> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("sector bounds must be finite, got [{a}, {b}]")));
    }
    if a > b {
        return Err(Error::UnorderedBounds { a, b });
    }
    let (circle_center, circle_radius) = if a == 0.0 || b == 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let radius = (1.0 / a - 1.0 / b).abs() / 2.0;
        (-(1.0 / a + 1.0 / b) / 2.0, radius)
    };
    let (verdict, reason) = if a > 0.0 && b > 0.0 {
        debug_assert!(circle_center + circle_radius < 0.0);
        (
            Verdict::Stable,
            format!(
                "critical circle lies in the open left half-plane (rightmost point {:e} s) and cannot meet the locus of 1/s",
                circle_center + circle_radius
            ),
        )
    } else if a == 0.0 {
        (Verdict::NotProvenStable, "lower bound is zero: the critical disk degenerates to a half-plane touching the imaginary axis".to_string())
    } else if b <= 0.0 {
        (
            Verdict::NotProvenStable,
            "both bounds are negative: the capacitance is negative throughout and the critical disk lies in the right half-plane".to_string(),
        )
    } else {
        (
            Verdict::NotProvenStable,
            "bounds of opposite sign: the exterior of the critical circle contains the right half-plane".to_string(),
        )
    };
    Ok(StabilityReport { a, b, circle_center, circle_radius, verdict, reason })
}

/// Bounds plus verdict for a profile in a given circuit.
pub fn assess(profile: &ModulationProfile, topology: Topology) -> Result<StabilityReport> {
    let (a, b) = modulation_bounds(profile, topology)?;
    circle_criterion(a, b)
}

/// Homogeneous solution `a1 exp(rate t)` of an ideal static capacitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientLaw {
    pub amplitude: f64,
    /// `-1/(R C0)`; positive for a non-Foster capacitor.
    pub rate: f64,
}

impl TransientLaw {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.rate * t).exp()
    }

    pub fn e_folding_time(&self) -> f64 {
        1.0 / self.rate.abs()
    }

    pub fn is_growing(&self) -> bool {
        self.rate > 0.0
    }

    /// Time for the magnitude to grow by `factor`, if it grows at all.
    pub fn time_to_grow(&self, factor: f64) -> Option<f64> {
        (self.is_growing() && factor > 1.0).then(|| factor.ln() / self.rate)
    }
}

pub fn ideal_nonfoster_transient(r: f64, c0: f64, a1: f64) -> Result<TransientLaw> {
    positive(r)?;
    if c0 == 0.0 || !c0.is_finite() {
        return Err(Error::ZeroCapacitance);
    }
    Ok(TransientLaw { amplitude: a1, rate: -1.0 / (r * c0) })
}

//! Typed scenario tree. Field names carry their SI unit.

use serde::{Deserialize, Serialize};

use super::checks::Check;
use super::ScenarioError;
use crate::circuitsim::{equivalent_element_voltage, Branch, CircuitSpec, InitialCharge};
use crate::modsynth::{FreeConstant, TargetElement, VoltageSourceMode};
use crate::sheetsim::{permittivity_for, stop_times, PlaneWaveSource, SheetSpec, Variant, FDTD_MIN_CELLS_PER_SLAB};
use crate::signals::{HarmonicSignal, DEFAULT_STEPS_PER_PERIOD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Circuit,
    Stability,
    Sheet,
    Fdtd,
    Sweep,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Circuit => "circuit",
            Kind::Stability => "stability",
            Kind::Sheet => "sheet",
            Kind::Fdtd => "fdtd",
            Kind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    #[default]
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheet: Option<SheetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(rename = "v_dc_V")]
    pub v_dc: f64,
    #[serde(rename = "v_ac_V")]
    pub v_ac: f64,
    #[serde(rename = "freq_Hz")]
    pub freq: f64,
    #[serde(rename = "phase_rad", default)]
    pub phase: f64,
}

impl SourceConfig {
    pub fn signal(&self) -> Result<HarmonicSignal, ScenarioError> {
        HarmonicSignal::from_frequency(self.v_dc, self.v_ac, self.freq, self.phase).map_err(invalid("source"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Capacitance {
        #[serde(rename = "c_eq_F")]
        c_eq: f64,
    },
    Resistance {
        #[serde(rename = "r_eq_ohm")]
        r_eq: f64,
    },
    LossyInductance {
        #[serde(rename = "l_eq_H")]
        l_eq: f64,
        #[serde(rename = "r_l_ohm")]
        r_l: f64,
        #[serde(rename = "r_c_ohm")]
        r_c: f64,
    },
    /// An ideal capacitor of fixed value placed directly in the circuit.
    StaticCapacitance {
        #[serde(rename = "c_F")]
        c: f64,
    },
}

impl TargetConfig {
    /// Element whose steady state is the reference. A static capacitor is
    /// its own reference.
    pub fn element(&self) -> TargetElement {
        match *self {
            TargetConfig::Capacitance { c_eq } => TargetElement::Capacitance { c_eq },
            TargetConfig::Resistance { r_eq } => TargetElement::Resistance { r_eq },
            TargetConfig::LossyInductance { l_eq, r_l, r_c } => TargetElement::LossyInductance { l_eq, r_l, r_c },
            TargetConfig::StaticCapacitance { c } => TargetElement::Capacitance { c_eq: c },
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, TargetConfig::StaticCapacitance { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    #[default]
    External,
    Feedback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConfig {
    /// Charge of the ideal element's steady state at t = 0.
    #[default]
    SteadyState,
    Dc,
    Zero,
    /// Uses `q0_C`.
    Charge,
}

fn default_periods() -> usize {
    20
}
fn default_steps() -> usize {
    DEFAULT_STEPS_PER_PERIOD
}
fn default_settle() -> f64 {
    crate::circuitsim::DEFAULT_SETTLE_PERIODS
}
fn default_bounded_factor() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub source: SourceConfig,
    #[serde(rename = "r_s_ohm")]
    pub r_s: f64,
    pub target: TargetConfig,
    /// Pins the synthesis constant (beta, c1 or c2, in coulombs); `null`
    /// selects it automatically.
    #[serde(rename = "constant_C", default)]
    pub constant: Option<f64>,
    #[serde(rename = "margin_F", default)]
    pub margin: Option<f64>,
    #[serde(default)]
    pub mode: ModeConfig,
    /// Feedback-mode cutoff; defaults to three times the source frequency.
    #[serde(rename = "cutoff_Hz", default)]
    pub cutoff: Option<f64>,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_steps")]
    pub steps_per_period: usize,
    #[serde(default = "default_settle")]
    pub settle_periods: f64,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(rename = "q0_C", default)]
    pub q0: Option<f64>,
    #[serde(default)]
    pub modulation: Switch,
}

impl CircuitConfig {
    pub fn free_constant(&self) -> FreeConstant {
        match (self.constant, self.margin) {
            (Some(c), _) => FreeConstant::Fixed(c),
            (None, Some(m)) => FreeConstant::AutoWithMargin(m),
            (None, None) => FreeConstant::Auto,
        }
    }

    pub fn voltage_mode(&self) -> VoltageSourceMode {
        match self.mode {
            ModeConfig::External => VoltageSourceMode::ExternalSteadyState,
            ModeConfig::Feedback => VoltageSourceMode::FilteredFeedback {
                cutoff_hz: self.cutoff.unwrap_or(3.0 * self.source.freq),
            },
        }
    }

    /// `None` means the steady-state start, which depends on the element.
    pub fn initial_charge(&self) -> Option<InitialCharge> {
        match self.initial {
            InitialConfig::SteadyState => None,
            InitialConfig::Dc => Some(InitialCharge::DcSteadyState),
            InitialConfig::Zero => Some(InitialCharge::Zero),
            InitialConfig::Charge => Some(InitialCharge::Value(self.q0.unwrap_or(0.0))),
        }
    }

    pub fn t_end(&self) -> f64 {
        self.periods as f64 / self.source.freq
    }

    pub fn validate(&self, at: &str) -> Result<(), ScenarioError> {
        let source = self.source.signal()?;
        let element = self.target.element();
        element.validate().map_err(invalid(at))?;
        let eq = CircuitSpec::new(source, self.r_s, Branch::Equivalent(element)).map_err(invalid(at))?;
        if self.steps_per_period < 16 {
            return Err(bad(at, format!("steps_per_period must be at least 16, got {}", self.steps_per_period)));
        }
        if self.periods == 0 {
            return Err(bad(at, "periods must be at least 1".to_string()));
        }
        if self.initial == InitialConfig::Charge && self.q0.is_none() {
            return Err(bad(at, "initial = \"charge\" needs q0_C".to_string()));
        }
        if let Some(m) = self.margin {
            if !(m > 0.0) {
                return Err(bad(at, format!("margin_F must be positive, got {m}")));
            }
        }
        if let TargetConfig::StaticCapacitance { c } = self.target {
            if c == 0.0 || !c.is_finite() {
                return Err(bad(at, "static capacitance must be finite and nonzero".to_string()));
            }
            return Ok(());
        }
        if !(self.settle_periods >= 0.0) || (self.periods as f64) < self.settle_periods + 3.0 {
            return Err(bad(
                at,
                format!(
                    "{} periods leave fewer than 3 whole periods after a {} period settle",
                    self.periods, self.settle_periods
                ),
            ));
        }
        if let VoltageSourceMode::FilteredFeedback { cutoff_hz } = self.voltage_mode() {
            let nyquist = 0.5 * self.steps_per_period as f64 * self.source.freq;
            if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
                return Err(bad(at, format!("cutoff_Hz {cutoff_hz} must lie in (0, {nyquist})")));
            }
        }
        let ev = equivalent_element_voltage(&eq, source.omega).map_err(invalid(at))?;
        if ev.dc.abs() <= ev.ac.amplitude {
            return Err(bad(
                at,
                format!(
                    "the element voltage {} + {} cos(...) V reaches zero; the modulation would be singular",
                    ev.dc, ev.ac.amplitude
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityCase {
    pub name: String,
    pub circuit: CircuitConfig,
    /// A stable run is bounded when `max|q| <= factor * max|C v_elem|`.
    #[serde(default = "default_bounded_factor")]
    pub bounded_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub cases: Vec<StabilityCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSourceConfig {
    #[serde(rename = "e_dc_V_per_m")]
    pub e_dc: f64,
    #[serde(rename = "e0_V_per_m")]
    pub e0: f64,
    #[serde(rename = "freq_Hz")]
    pub freq: f64,
}

fn default_courant() -> f64 {
    1.0
}
fn default_cells() -> usize {
    20
}
fn default_sheet_settle() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheetConfig {
    /// "a", "b" or "c".
    pub variant: String,
    #[serde(rename = "c0_F")]
    pub c0: f64,
    /// `null` removes the absorber.
    #[serde(rename = "r0_ohm")]
    pub r0: Option<f64>,
    #[serde(rename = "c1_F_V_per_m", default)]
    pub c1: Option<f64>,
    #[serde(rename = "c2_F_V_per_m", default)]
    pub c2: Option<f64>,
    /// Defaults to a four-hundredth of the wavelength.
    #[serde(rename = "d_m", default)]
    pub d: Option<f64>,
    /// Defaults to the permittivity whose slab capacitance equals C0.
    #[serde(default)]
    pub eps_r: Option<f64>,
    pub source: PlaneSourceConfig,
    #[serde(default = "default_steps")]
    pub steps_per_period: usize,
    #[serde(default = "default_cells")]
    pub cells_per_slab: usize,
    #[serde(default = "default_courant")]
    pub courant: f64,
    /// Defaults to 90% of the time at which C_R reaches zero.
    #[serde(rename = "t_end_s", default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_sheet_settle")]
    pub settle_periods: f64,
    #[serde(default)]
    pub modulation: Switch,
}

impl SheetConfig {
    pub fn variant(&self) -> Result<Variant, ScenarioError> {
        Variant::parse(&self.variant)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown variant `{}`, expected a, b or c", self.variant)))
    }

    pub fn spec(&self) -> Result<SheetSpec, ScenarioError> {
        let source = PlaneWaveSource::from_frequency(self.source.e_dc, self.source.e0, self.source.freq)
            .map_err(invalid("sheet.source"))?;
        let d = self.d.unwrap_or(source.wavelength() / 400.0);
        Ok(SheetSpec {
            c0: self.c0,
            r0: self.r0,
            c1: self.c1,
            c2: self.c2,
            variant: self.variant()?,
            d,
            eps_r: self.eps_r.unwrap_or_else(|| permittivity_for(self.c0, d)),
            source,
            steps_per_period: self.steps_per_period,
            cells_per_slab: self.cells_per_slab,
            courant: self.courant,
        })
    }

    pub fn t_end(&self, spec: &SheetSpec) -> Result<f64, ScenarioError> {
        match self.t_end {
            Some(t) => Ok(t),
            None => spec.default_t_end().map_err(invalid("sheet")),
        }
    }

    pub fn validate(&self, at: &str, fdtd: bool) -> Result<(), ScenarioError> {
        let spec = self.spec()?;
        spec.validate().map_err(invalid(at))?;
        let period = spec.source.period();
        let t_end = self.t_end(&spec)?;
        if !(self.settle_periods >= 1.0) {
            return Err(bad(at, format!("settle_periods must be at least 1 (records start one period in), got {}", self.settle_periods)));
        }
        if !(t_end >= (self.settle_periods + 3.0) * period) {
            return Err(bad(
                at,
                format!("t_end_s = {t_end} leaves fewer than 3 whole periods after the settle time"),
            ));
        }
        if self.modulation.is_on() {
            let stops = stop_times(&spec).map_err(invalid(at))?;
            if t_end >= stops.total_zero {
                return Err(bad(
                    at,
                    format!("t_end_s = {t_end} is past the time {} s at which the total capacitance reaches zero", stops.total_zero),
                ));
            }
        }
        if fdtd {
            if spec.variant != Variant::TwoDielectricSlabs {
                return Err(bad(at, "the FDTD model needs variant c (two dielectric slabs)".to_string()));
            }
            if spec.cells_per_slab < FDTD_MIN_CELLS_PER_SLAB {
                return Err(bad(
                    at,
                    format!("cells_per_slab = {} is below the minimum {FDTD_MIN_CELLS_PER_SLAB}", spec.cells_per_slab),
                ));
            }
            if !(spec.courant > 0.0 && spec.courant <= 1.0) {
                return Err(bad(at, format!("courant must lie in (0, 1], got {}", spec.courant)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "over", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Same drive realized by each listed variant.
    Variant { base: SheetConfig, variants: Vec<String> },
    /// Layer thickness scaled by each factor, keeping the slab capacitance.
    Thickness { base: SheetConfig, factors: Vec<f64> },
}

impl SweepConfig {
    pub fn base(&self) -> &SheetConfig {
        match self {
            SweepConfig::Variant { base, .. } | SweepConfig::Thickness { base, .. } => base,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        match self {
            SweepConfig::Variant { base, variants } => {
                if variants.len() < 2 {
                    return Err(bad("sweep", "a variant sweep needs at least two variants".to_string()));
                }
                for v in variants {
                    let mut c = base.clone();
                    c.variant = v.clone();
                    c.validate(&format!("sweep.variants[{v}]"), false)?;
                }
            }
            SweepConfig::Thickness { base, factors } => {
                if factors.is_empty() {
                    return Err(bad("sweep", "a thickness sweep needs at least one factor".to_string()));
                }
                let d = base.spec()?.d;
                for &f in factors {
                    if !(f > 0.0) {
                        return Err(bad("sweep.factors", format!("factors must be positive, got {f}")));
                    }
                    let c = scaled(base, d, f);
                    c.validate(&format!("sweep.factors[{f}]"), c.variant()? == Variant::TwoDielectricSlabs)?;
                }
            }
        }
        Ok(())
    }
}

/// `base` with its thickness scaled by `f` at constant slab capacitance.
pub(crate) fn scaled(base: &SheetConfig, d: f64, f: f64) -> SheetConfig {
    let mut c = base.clone();
    let spec = base.spec().expect("validated base");
    let c_slab = crate::sheetsim::effective_capacitance(spec.eps_r, spec.d);
    c.d = Some(d * f);
    c.eps_r = Some(permittivity_for(c_slab, d * f));
    c
}

impl Scenario {
    /// Modulation state used to pick modulation-dependent expectations.
    pub fn modulation(&self) -> Switch {
        match self.kind {
            Kind::Circuit => self.circuit.as_ref().map_or(Switch::On, |c| c.modulation),
            Kind::Sheet | Kind::Fdtd => self.sheet.as_ref().map_or(Switch::On, |s| s.modulation),
            Kind::Sweep => self.sweep.as_ref().map_or(Switch::On, |s| s.base().modulation),
            Kind::Stability => Switch::On,
        }
    }

    /// Checks every parameter against the preconditions of the operations
    /// the scenario will call. Nothing runs before this succeeds.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(ScenarioError::Validation(format!(
                "scenario name `{}` must be non-empty and use only letters, digits, `_` and `-`",
                self.name
            )));
        }
        let blocks = [
            ("circuit", self.circuit.is_some()),
            ("stability", self.stability.is_some()),
            ("sheet", self.sheet.is_some()),
            ("sweep", self.sweep.is_some()),
        ];
        let wanted = match self.kind {
            Kind::Circuit => "circuit",
            Kind::Stability => "stability",
            Kind::Sheet | Kind::Fdtd => "sheet",
            Kind::Sweep => "sweep",
        };
        for (name, present) in blocks {
            if present != (name == wanted) {
                return Err(ScenarioError::Validation(if present {
                    format!("kind `{}` does not take a `{name}` block", self.kind.as_str())
                } else {
                    format!("kind `{}` needs a `{name}` block", self.kind.as_str())
                }));
            }
        }
        match self.kind {
            Kind::Circuit => self.circuit.as_ref().expect("checked").validate("circuit")?,
            Kind::Stability => {
                let cases = &self.stability.as_ref().expect("checked").cases;
                if cases.is_empty() {
                    return Err(ScenarioError::Validation("stability needs at least one case".to_string()));
                }
                let mut seen = std::collections::BTreeSet::new();
                for case in cases {
                    if !seen.insert(case.name.as_str()) {
                        return Err(ScenarioError::Validation(format!("duplicate stability case `{}`", case.name)));
                    }
                    case.circuit.validate(&format!("stability.cases[{}]", case.name))?;
                    if !(case.bounded_factor > 0.0) {
                        return Err(ScenarioError::Validation(format!(
                            "stability.cases[{}]: bounded_factor must be positive",
                            case.name
                        )));
                    }
                }
            }
            Kind::Sheet => self.sheet.as_ref().expect("checked").validate("sheet", false)?,
            Kind::Fdtd => self.sheet.as_ref().expect("checked").validate("sheet", true)?,
            Kind::Sweep => self.sweep.as_ref().expect("checked").validate()?,
        }
        let known = super::run::metric_names(self)?;
        for (k, check) in self.checks.iter().enumerate() {
            check.validate().map_err(|m| ScenarioError::Validation(format!("checks[{k}]: {m}")))?;
            if !known.contains(&check.metric) {
                return Err(ScenarioError::Validation(format!(
                    "checks[{k}]: unknown metric `{}` for this scenario (known: {})",
                    check.metric,
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }
}

fn bad(at: &str, msg: String) -> ScenarioError {
    ScenarioError::Validation(format!("{at}: {msg}"))
}

fn invalid(at: &str) -> impl Fn(crate::Error) -> ScenarioError + '_ {
    move |e| ScenarioError::Validation(format!("{at}: {e}"))
}

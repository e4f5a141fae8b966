use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use super::checks::CheckResult;
use super::config::{scaled, CircuitConfig, Kind, Scenario, SheetConfig, SweepConfig, TargetConfig};
use super::{Loaded, ScenarioError};
use crate::circuitsim::{
    compare_emulation, emulate_target, equivalent_element_voltage, equivalent_steady_state, simulate_tvc, Branch,
    CircuitSpec, EmulationOptions, EmulationReport, InitialCharge, SimulationTrace, SteadyStateCurrent,
    DIVERGENCE_FACTOR,
};
use crate::modsynth::ModulationProfile;
use crate::sheetsim::{
    compare_variants, energy_balance, max_difference, power_balance, simulate_fdtd, simulate_sheet, static_reflection,
    stop_times, FieldProbeRecord, SheetSpec, Variant,
};
use crate::signals::{fit_harmonic, fmt_f64};
use crate::stability::{assess, Topology};

const EMULATION_METRICS: &[&str] = &[
    "rel_rms",
    "worst_period_rel_rms",
    "periods_compared",
    "ref_dc_A",
    "ref_ac_A",
    "ref_phase_deg",
    "sim_dc_A",
    "sim_ac_A",
    "sim_phase_deg",
    "c_min_F",
    "c_max_F",
    "constant_C",
    "diverged",
];

const STATIC_METRICS: &[&str] = &[
    "growth_rate_per_s",
    "analytic_rate_per_s",
    "rate_rel_err",
    "e_folding_s",
    "analytic_e_folding_s",
    "diverged",
    "divergence_time_s",
    "analytic_divergence_time_s",
];

const CASE_METRICS: &[&str] =
    &["a_per_s", "b_per_s", "circle_center_s", "circle_radius_s", "stable", "diverged", "max_q_ratio", "bounded"];

const SHEET_METRICS: &[&str] = &[
    "t_end_s",
    "cr_zero_s",
    "total_zero_s",
    "c_eff_F",
    "c_eff_rel_err",
    "c_c_min_F",
    "c_c_max_F",
    "residual",
    "reflection_mag",
    "reflection_phase_deg",
    "static_reflection_mag",
    "transmission_mag",
    "p_static_W_per_m2",
    "p_tv_W_per_m2",
    "p_net_W_per_m2",
    "power_imbalance",
    "energy_residual_rel",
    "diverged",
];

const FDTD_METRICS: &[&str] = &["sheet_residual", "sheet_reflection_mag", "reflection_vs_sheet_rel", "field_vs_sheet"];

const PAIR_METRICS: &[&str] = &["relative", "max_above_V_per_m", "max_below_V_per_m"];

const THICKNESS_METRICS: &[&str] = &["d_m", "residual", "p_static_W_per_m2", "p_net_W_per_m2", "power_imbalance"];

fn factor_label(f: f64) -> String {
    format!("x{f}")
}

fn prefixed(prefix: &str, names: &[&str]) -> Vec<String> {
    names.iter().map(|m| format!("{prefix}.{m}")).collect()
}

/// Names of the metrics a scenario produces, in output order.
pub fn metric_names(s: &Scenario) -> Result<Vec<String>, ScenarioError> {
    let own = |names: &[&str]| names.iter().map(|m| m.to_string()).collect::<Vec<_>>();
    Ok(match s.kind {
        Kind::Circuit => {
            let c = s.circuit.as_ref().expect("validated");
            own(if c.target.is_static() { STATIC_METRICS } else { EMULATION_METRICS })
        }
        Kind::Stability => {
            let cases = &s.stability.as_ref().expect("validated").cases;
            cases.iter().flat_map(|c| prefixed(&c.name, CASE_METRICS)).collect()
        }
        Kind::Sheet => own(SHEET_METRICS),
        Kind::Fdtd => own(SHEET_METRICS).into_iter().chain(own(FDTD_METRICS)).collect(),
        Kind::Sweep => match s.sweep.as_ref().expect("validated") {
            SweepConfig::Variant { variants, .. } => {
                let variants: Vec<&str> =
                    variants.iter().map(|v| Variant::parse(v).map_or("?", |v| v.label())).collect();
                let mut out = Vec::new();
                for v in &variants {
                    out.push(format!("{v}.residual"));
                }
                for i in 0..variants.len() {
                    for j in i + 1..variants.len() {
                        out.extend(prefixed(&format!("{}_vs_{}", variants[i], variants[j]), PAIR_METRICS));
                    }
                }
                out
            }
            SweepConfig::Thickness { factors, .. } => {
                let mut out = Vec::new();
                for &f in factors {
                    out.extend(prefixed(&factor_label(f), THICKNESS_METRICS));
                }
                out.push("sheet.power_imbalance".to_string());
                out.push("imbalance_decreasing".to_string());
                out
            }
        },
    })
}

#[derive(Debug, Default)]
struct Collector {
    metrics: Vec<(String, f64)>,
    blocks: Vec<(String, String)>,
    traces: Vec<(String, Vec<u8>)>,
}

impl Collector {
    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    fn flag(&mut self, name: impl Into<String>, value: bool) {
        self.metric(name, if value { 1.0 } else { 0.0 });
    }

    fn block(&mut self, title: impl Into<String>, body: String) {
        self.blocks.push((title.into(), body));
    }

    fn trace(&mut self, file: impl Into<String>, write: impl FnOnce(&mut Vec<u8>) -> crate::Result<()>) -> Result<(), ScenarioError> {
        let mut buf = Vec::new();
        write(&mut buf).map_err(run_failed)?;
        self.traces.push((file.into(), buf));
        Ok(())
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    /// Scenario tree after overrides, pretty-printed.
    pub echo: String,
    pub origin: String,
    pub metrics: Vec<(String, f64)>,
    pub blocks: Vec<(String, String)>,
    pub traces: Vec<(String, Vec<u8>)>,
    pub checks: Vec<CheckResult>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.scenario;
        let _ = writeln!(out, "scenario: {}", s.name);
        let _ = writeln!(out, "kind: {}", s.kind.as_str());
        let _ = writeln!(out, "source: {}", self.origin);
        if !s.description.is_empty() {
            let _ = writeln!(out, "description: {}", s.description);
        }
        let _ = writeln!(out, "\n[scenario]\n{}", self.echo);
        let _ = writeln!(out, "\n[metrics]");
        for (name, value) in &self.metrics {
            let _ = writeln!(out, "{name} = {}", fmt_f64(*value));
        }
        for (title, body) in &self.blocks {
            let _ = writeln!(out, "\n[{title}]\n{}", body.trim_end());
        }
        let _ = writeln!(out, "\n[checks]");
        for c in &self.checks {
            let _ = writeln!(out, "{}", c.line());
        }
        let _ = writeln!(out, "checks: {} passed, {} failed", self.checks.len() - self.failed(), self.failed());
        let _ = writeln!(out, "\nwall_clock_s = {:.3}", self.elapsed.as_secs_f64());
        out
    }

    /// `scenario,kind,metric,value`, one row per metric in output order.
    pub fn summary_csv(&self) -> Result<Vec<u8>, ScenarioError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| ScenarioError::Io(format!("summary.csv: {e}"));
        w.write_record(["scenario", "kind", "metric", "value"]).map_err(io)?;
        for (name, value) in &self.metrics {
            w.write_record([self.scenario.name.as_str(), self.scenario.kind.as_str(), name, &fmt_f64(*value)])
                .map_err(io)?;
        }
        w.into_inner().map_err(|e| ScenarioError::Io(format!("summary.csv: {e}")))
    }

    /// Writes `report.txt`, `summary.csv` and the traces into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), ScenarioError> {
        let io = |what: &Path, e: std::io::Error| ScenarioError::Io(format!("{}: {e}", what.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut files: Vec<(&str, Vec<u8>)> = vec![("summary.csv", self.summary_csv()?)];
        files.extend(self.traces.iter().map(|(n, b)| (n.as_str(), b.clone())));
        files.push(("report.txt", self.to_text().into_bytes()));
        for (name, bytes) in files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

fn run_failed(e: crate::Error) -> ScenarioError {
    ScenarioError::Validation(format!("run failed: {e}"))
}

/// Runs a validated scenario and evaluates its checks.
pub fn run_scenario(loaded: &Loaded) -> Result<RunReport, ScenarioError> {
    let s = &loaded.scenario;
    s.validate()?;
    let start = Instant::now();
    let mut out = Collector::default();
    match s.kind {
        Kind::Circuit => run_circuit_scenario(s.circuit.as_ref().expect("validated"), &mut out)?,
        Kind::Stability => {
            for case in &s.stability.as_ref().expect("validated").cases {
                run_stability_case(&case.name, &case.circuit, case.bounded_factor, &mut out)?;
            }
        }
        Kind::Sheet => run_sheet_scenario(s.sheet.as_ref().expect("validated"), false, &mut out)?,
        Kind::Fdtd => run_sheet_scenario(s.sheet.as_ref().expect("validated"), true, &mut out)?,
        Kind::Sweep => match s.sweep.as_ref().expect("validated") {
            SweepConfig::Variant { base, variants } => run_variant_sweep(base, variants, &mut out)?,
            SweepConfig::Thickness { base, factors } => run_thickness_sweep(base, factors, &mut out)?,
        },
    }
    debug_assert_eq!(
        out.metrics.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        metric_names(s)?,
        "metric list out of sync"
    );
    let modulation = s.modulation();
    let checks = s
        .checks
        .iter()
        .map(|c| {
            let value = out.metrics.iter().find(|(n, _)| *n == c.metric).map_or(f64::NAN, |&(_, v)| v);
            CheckResult::evaluate(c, value, modulation)
        })
        .collect();
    Ok(RunReport {
        scenario: s.clone(),
        echo: loaded.echo.clone(),
        origin: loaded.origin.clone(),
        metrics: out.metrics,
        blocks: out.blocks,
        traces: out.traces,
        checks,
        elapsed: start.elapsed(),
    })
}

/// Result of one circuit run, emulated or with a static capacitor.
pub(crate) struct CircuitRun {
    pub spec: CircuitSpec,
    pub trace: SimulationTrace,
    pub reference: SteadyStateCurrent,
    pub element_voltage: SteadyStateCurrent,
    pub report: Option<EmulationReport>,
}

impl CircuitRun {
    fn profile(&self) -> &ModulationProfile {
        match &self.spec.branch {
            Branch::TimeVaryingCap { profile, .. } => profile,
            Branch::Equivalent(_) => unreachable!("circuit runs simulate a capacitor branch"),
        }
    }

    /// Largest `|q|` relative to the steady-state charge scale `max|C v_elem|`.
    fn charge_ratio(&self) -> f64 {
        let c = self.profile().capacitance();
        let scale = c.samples().iter().enumerate().fold(0.0_f64, |m, (k, &x)| {
            m.max((x * self.element_voltage.value(c.time(k))).abs())
        });
        let peak = self.trace.q.samples().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        peak / scale
    }
}

pub(crate) fn run_circuit(c: &CircuitConfig) -> Result<CircuitRun, ScenarioError> {
    let source = c.source.signal()?;
    let element = c.target.element();
    let eq = CircuitSpec::new(source, c.r_s, Branch::Equivalent(element.clone())).map_err(run_failed)?;
    if let TargetConfig::StaticCapacitance { c: value } = c.target {
        let reference = equivalent_steady_state(&eq, source.omega).map_err(run_failed)?;
        let element_voltage = equivalent_element_voltage(&eq, source.omega).map_err(run_failed)?;
        let dt = source.period() / c.steps_per_period as f64;
        let n = c.periods * c.steps_per_period + 1;
        let profile = ModulationProfile::constant(value, 0.0, dt, n).map_err(run_failed)?;
        let initial = c.initial_charge().unwrap_or(InitialCharge::Voltage(element_voltage.value(0.0)));
        let spec = CircuitSpec::new(source, c.r_s, Branch::TimeVaryingCap { profile, parallel_r: None })
            .map_err(run_failed)?
            .with_initial(initial)
            .allowing_nonpositive();
        let trace = simulate_tvc(&spec, c.t_end()).map_err(run_failed)?;
        return Ok(CircuitRun { spec, trace, reference, element_voltage, report: None });
    }
    let opts = EmulationOptions {
        constant: c.free_constant(),
        mode: c.voltage_mode(),
        periods: c.periods,
        steps_per_period: c.steps_per_period,
        settle_periods: c.settle_periods,
        initial: c.initial_charge(),
    };
    let run = emulate_target(source, c.r_s, &element, &opts).map_err(run_failed)?;
    let (mut spec, mut trace, mut report) = (run.circuit, run.trace, run.report);
    if !c.modulation.is_on() {
        if let Branch::TimeVaryingCap { profile, .. } = &mut spec.branch {
            *profile = profile.frozen_at_mean().map_err(run_failed)?;
        }
        trace = simulate_tvc(&spec, c.t_end()).map_err(run_failed)?;
        report = compare_emulation(&trace, &run.reference, c.settle_periods * source.period()).map_err(run_failed)?;
    }
    Ok(CircuitRun {
        spec,
        trace,
        reference: run.reference,
        element_voltage: run.element_voltage,
        report: Some(report),
    })
}

fn emulation_block(run: &CircuitRun, report: &EmulationReport) -> String {
    let p = run.profile();
    let mut b = String::new();
    let _ = writeln!(b, "target = {}", p.target.as_str());
    for (name, value) in [("beta_C", p.constants.beta), ("c1_C", p.constants.c1), ("c2_C", p.constants.c2)] {
        if let Some(v) = value {
            let _ = writeln!(b, "{name} = {}", fmt_f64(v));
        }
    }
    if let Some(m) = p.positivity_margin {
        let _ = writeln!(b, "positivity_margin_F = {}", fmt_f64(m));
    }
    let _ = writeln!(b, "voltage_source_mode = {:?}", p.mode);
    let _ = writeln!(b, "settle_s = {}", fmt_f64(report.settle));
    let _ = writeln!(b, "rel_rms = {}", fmt_f64(report.rel_rms));
    let per: Vec<String> = report.per_period.iter().map(|e| format!("{e:.3e}")).collect();
    let _ = writeln!(b, "per_period = {}", per.join(" "));
    b
}

fn run_circuit_scenario(c: &CircuitConfig, out: &mut Collector) -> Result<(), ScenarioError> {
    let run = run_circuit(c)?;
    let omega = run.spec.source.omega;
    let diverged = run.trace.diverged;
    match &run.report {
        None => {
            let TargetConfig::StaticCapacitance { c: c0 } = c.target else { unreachable!() };
            let tau = c.r_s * c0.abs();
            let analytic = -1.0 / (c.r_s * c0);
            let q = &run.trace.q;
            let k = q.index_at_or_after(3.0 * tau).min(q.len() - 1);
            let q0 = q.samples()[0];
            let rate = if q0 != 0.0 && k > 0 { (q.samples()[k] / q0).abs().ln() / q.time(k) } else { f64::NAN };
            let src = run.spec.source;
            let scale = q0.abs().max(c0.abs() * (src.v_dc.abs() + src.v_ac.abs()));
            let t_div_analytic =
                if analytic > 0.0 && q0 != 0.0 { (DIVERGENCE_FACTOR * scale / q0.abs()).ln() / analytic } else { f64::NAN };
            out.metric("growth_rate_per_s", rate);
            out.metric("analytic_rate_per_s", analytic);
            out.metric("rate_rel_err", ((rate - analytic) / analytic).abs());
            out.metric("e_folding_s", 1.0 / rate.abs());
            out.metric("analytic_e_folding_s", tau);
            out.flag("diverged", diverged.is_some());
            out.metric("divergence_time_s", diverged.unwrap_or(f64::NAN));
            out.metric("analytic_divergence_time_s", t_div_analytic);
        }
        Some(report) => {
            let fit = fit_harmonic(&run.trace.i, omega, report.settle).map_err(run_failed)?;
            let p = run.profile();
            let constant = match c.target {
                TargetConfig::Capacitance { .. } => p.constants.c1,
                _ => p.constants.c2,
            };
            out.metric("rel_rms", report.rel_rms);
            out.metric("worst_period_rel_rms", report.per_period.iter().cloned().fold(0.0, f64::max));
            out.metric("periods_compared", report.periods() as f64);
            out.metric("ref_dc_A", run.reference.dc);
            out.metric("ref_ac_A", run.reference.ac.amplitude);
            out.metric("ref_phase_deg", run.reference.ac.phase_degrees());
            out.metric("sim_dc_A", fit.offset);
            out.metric("sim_ac_A", fit.phasor.amplitude);
            out.metric("sim_phase_deg", fit.phasor.phase_degrees());
            out.metric("c_min_F", p.min());
            out.metric("c_max_F", p.max());
            out.metric("constant_C", constant.unwrap_or(f64::NAN));
            out.flag("diverged", diverged.is_some());
            out.block("emulation", emulation_block(&run, report));
            let profile = p.capacitance().clone();
            out.trace("profile.csv", |b| profile.write_csv(b))?;
        }
    }
    let trace = run.trace;
    out.trace("trace.csv", |b| trace.write_csv(b))
}

fn topology_for(c: &CircuitConfig) -> Topology {
    match c.target {
        TargetConfig::LossyInductance { r_c, .. } => Topology::ParallelLoss { r_s: c.r_s, r_c },
        _ => Topology::Series { r: c.r_s },
    }
}

fn run_stability_case(name: &str, c: &CircuitConfig, factor: f64, out: &mut Collector) -> Result<(), ScenarioError> {
    let run = run_circuit(c)?;
    let report = assess(run.profile(), topology_for(c)).map_err(run_failed)?;
    let diverged = run.trace.diverged.is_some();
    let ratio = run.charge_ratio();
    out.metric(format!("{name}.a_per_s"), report.a);
    out.metric(format!("{name}.b_per_s"), report.b);
    out.metric(format!("{name}.circle_center_s"), report.circle_center);
    out.metric(format!("{name}.circle_radius_s"), report.circle_radius);
    out.flag(format!("{name}.stable"), report.verdict == crate::stability::Verdict::Stable);
    out.flag(format!("{name}.diverged"), diverged);
    out.metric(format!("{name}.max_q_ratio"), ratio);
    out.flag(format!("{name}.bounded"), !diverged && ratio <= factor);
    out.block(format!("stability {name}"), report.to_text());
    let trace = run.trace;
    out.trace(format!("{name}_trace.csv"), |b| trace.write_csv(b))
}

fn simulate(spec: &SheetSpec, t_end: f64, on: bool) -> Result<FieldProbeRecord, ScenarioError> {
    match spec.variant {
        Variant::TwoDielectricSlabs => simulate_fdtd(spec, t_end, on),
        _ => simulate_sheet(spec, t_end, on),
    }
    .map_err(run_failed)
}

fn sheet_metrics(cfg: &SheetConfig, spec: &SheetSpec, t_end: f64, rec: &FieldProbeRecord, out: &mut Collector) -> Result<(), ScenarioError> {
    let period = spec.source.period();
    let settle = cfg.settle_periods * period;
    let stops = stop_times(spec).map_err(run_failed)?;
    let power = power_balance(rec, settle).map_err(run_failed)?;
    let energy = energy_balance(rec, settle).map_err(run_failed)?;
    let refl = rec.reflection(settle).map_err(run_failed)?;
    let trans = rec.transmission(settle).map_err(run_failed)?;
    let src = spec.source;
    out.metric("t_end_s", t_end);
    out.metric("cr_zero_s", stops.cr_zero);
    out.metric("total_zero_s", stops.total_zero);
    out.metric("c_eff_F", spec.c_eff());
    out.metric("c_eff_rel_err", ((spec.c_eff() - spec.c0) / spec.c0).abs());
    out.metric("c_c_min_F", spec.c1() / (src.e_dc + src.e0) - spec.c0);
    out.metric("c_c_max_F", spec.c1() / (src.e_dc - src.e0) - spec.c0);
    out.metric("residual", rec.residual(settle).map_err(run_failed)?);
    out.metric("reflection_mag", refl.amplitude);
    out.metric("reflection_phase_deg", refl.phase_degrees());
    out.metric("static_reflection_mag", static_reflection(spec).norm());
    out.metric("transmission_mag", trans.amplitude);
    out.metric("p_static_W_per_m2", power.p_static);
    out.metric("p_tv_W_per_m2", power.p_tv);
    out.metric("p_net_W_per_m2", power.net);
    out.metric("power_imbalance", power.imbalance());
    out.metric(
        "energy_residual_rel",
        ((energy.incident - energy.reflected - energy.transmitted - energy.absorbed) / energy.incident).abs(),
    );
    out.flag("diverged", rec.diverged.is_some());
    let mut b = String::new();
    let _ = writeln!(b, "variant = {}", spec.variant);
    let _ = writeln!(b, "modulation = {}", if rec.modulation_on { "on" } else { "off" });
    let _ = writeln!(b, "p_static_W_per_m2 = {}", fmt_f64(power.p_static));
    let _ = writeln!(b, "p_tv_W_per_m2 = {}", fmt_f64(power.p_tv));
    let _ = writeln!(b, "net_W_per_m2 = {}", fmt_f64(power.net));
    let _ = writeln!(b, "periods = {}", power.periods);
    out.block("power", b);
    Ok(())
}

fn record_traces(prefix: &str, rec: &FieldProbeRecord, out: &mut Collector) -> Result<(), ScenarioError> {
    out.trace(format!("{prefix}probes.csv"), |b| rec.write_probe_csv(b))?;
    out.trace(format!("{prefix}layers.csv"), |b| rec.write_layer_csv(b))
}

fn run_sheet_scenario(cfg: &SheetConfig, fdtd: bool, out: &mut Collector) -> Result<(), ScenarioError> {
    let spec = cfg.spec()?;
    let t_end = cfg.t_end(&spec)?;
    let on = cfg.modulation.is_on();
    let rec = if fdtd { simulate_fdtd(&spec, t_end, on).map_err(run_failed)? } else { simulate_sheet(&spec, t_end, on).map_err(run_failed)? };
    sheet_metrics(cfg, &spec, t_end, &rec, out)?;
    record_traces("", &rec, out)?;
    if fdtd {
        let settle = cfg.settle_periods * spec.source.period();
        let sheet = simulate_sheet(&spec, t_end, on).map_err(run_failed)?;
        let r_f = rec.reflection(settle).map_err(run_failed)?.amplitude;
        let r_s = sheet.reflection(settle).map_err(run_failed)?.amplitude;
        let diff = max_difference(&rec.e_above, &sheet.e_above, settle).max(max_difference(&rec.e_below, &sheet.e_below, settle));
        out.metric("sheet_residual", sheet.residual(settle).map_err(run_failed)?);
        out.metric("sheet_reflection_mag", r_s);
        out.metric("reflection_vs_sheet_rel", (r_f - r_s).abs() / r_s);
        out.metric("field_vs_sheet", diff / spec.source.e0.max(f64::MIN_POSITIVE));
        record_traces("sheet_", &sheet, out)?;
    }
    Ok(())
}

fn run_variant_sweep(base: &SheetConfig, variants: &[String], out: &mut Collector) -> Result<(), ScenarioError> {
    let mut specs = Vec::with_capacity(variants.len());
    for v in variants {
        let mut c = base.clone();
        c.variant = v.clone();
        specs.push(c.spec()?);
    }
    let t_end = base.t_end(&specs[0])?;
    let settle = base.settle_periods * specs[0].source.period();
    let report = compare_variants(&specs, t_end, base.modulation.is_on(), settle).map_err(run_failed)?;
    for (v, rec) in &report.records {
        out.metric(format!("{}.residual", v.label()), rec.residual(settle).map_err(run_failed)?);
    }
    let mut b = String::new();
    for p in &report.pairs {
        let name = format!("{}_vs_{}", p.first.label(), p.second.label());
        out.metric(format!("{name}.relative"), p.relative);
        out.metric(format!("{name}.max_above_V_per_m"), p.max_above);
        out.metric(format!("{name}.max_below_V_per_m"), p.max_below);
        let _ = writeln!(b, "{name}: max |dE| above {:.4e} V/m, below {:.4e} V/m, relative {:.4e}", p.max_above, p.max_below, p.relative);
    }
    out.block("variants", b);
    for (v, rec) in &report.records {
        record_traces(&format!("{}_", v.label()), rec, out)?;
    }
    Ok(())
}

fn run_thickness_sweep(base: &SheetConfig, factors: &[f64], out: &mut Collector) -> Result<(), ScenarioError> {
    let base_spec = base.spec()?;
    let t_end = base.t_end(&base_spec)?;
    let settle = base.settle_periods * base_spec.source.period();
    let on = base.modulation.is_on();
    let mut rows = Vec::new();
    for &f in factors {
        let cfg = scaled(base, base_spec.d, f);
        let spec = cfg.spec()?;
        let rec = simulate(&spec, t_end, on)?;
        let power = power_balance(&rec, settle).map_err(run_failed)?;
        let label = factor_label(f);
        out.metric(format!("{label}.d_m"), spec.d);
        out.metric(format!("{label}.residual"), rec.residual(settle).map_err(run_failed)?);
        out.metric(format!("{label}.p_static_W_per_m2"), power.p_static);
        out.metric(format!("{label}.p_net_W_per_m2"), power.net);
        out.metric(format!("{label}.power_imbalance"), power.imbalance());
        record_traces(&format!("{label}_"), &rec, out)?;
        rows.push((f, power.imbalance()));
    }
    let sheet = simulate_sheet(&base_spec, t_end, on).map_err(run_failed)?;
    let sheet_power = power_balance(&sheet, settle).map_err(run_failed)?;
    out.metric("sheet.power_imbalance", sheet_power.imbalance());
    let mut by_d = rows.clone();
    by_d.sort_by(|a, b| b.0.total_cmp(&a.0));
    let decreasing = by_d.windows(2).all(|w| w[1].1 < w[0].1);
    out.flag("imbalance_decreasing", decreasing);
    let mut b = String::new();
    for (f, imb) in &by_d {
        let _ = writeln!(b, "d = {f} x base: |net| / p_static = {imb:.4e}");
    }
    let _ = writeln!(b, "sheet model: |net| / p_static = {:.4e}", sheet_power.imbalance());
    out.block("thickness", b);
    Ok(())
}

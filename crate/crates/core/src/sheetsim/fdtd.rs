//! 1D FDTD model of the slab realization.
//!
//! Normal incidence from `+z` on a stack, from bottom to top, of a static
//! dielectric slab (`C0`), a resistive plane (`R0`) and the time-varying
//! slab (`C_C + C_R`). Fields are `E_x` on integer nodes and `H_y` on half
//! nodes. Slab nodes are updated through `D` and divided by
//! `eps0 eps_r(t)`; the resistive plane is a lumped conductance updated
//! semi-implicitly.
//!
//! The domain starts filled with the incident wave, as if the source had
//! been on forever, so the DC component needs no ramp. Both boundaries use
//! first-order Mur conditions, exact at unit Courant number; the top one
//! acts on the scattered field only.

use super::sheet::SensorModulation;
use super::{synth_sensor_modulation, FieldProbeRecord, LayerTrace, SheetSpec, Variant};
use crate::consts::{EPS0, ETA0, MU0, SPEED_OF_LIGHT};
use crate::signals::Waveform;
use crate::{Error, Result};

pub const FDTD_MIN_CELLS_PER_SLAB: usize = 20;

/// Free cells between each probe and the boundary behind it.
const MARGIN: usize = 16;

struct Layout {
    n: usize,
    sheet: usize,
    cells: usize,
    probe: usize,
    dz: f64,
    dt: f64,
}

impl Layout {
    fn z(&self, k: f64) -> f64 {
        (k - self.sheet as f64) * self.dz
    }

    fn static_nodes(&self) -> std::ops::Range<usize> {
        self.sheet - self.cells..self.sheet
    }

    /// The modulated slab faces the incident wave.
    fn tv_nodes(&self) -> std::ops::Range<usize> {
        self.sheet + 1..self.sheet + 1 + self.cells
    }
}

fn layout(spec: &SheetSpec) -> Result<Layout> {
    spec.validate()?;
    if spec.variant != Variant::TwoDielectricSlabs {
        return Err(Error::InvalidParameter(format!(
            "the FDTD model realizes variant c only, got variant {}",
            spec.variant
        )));
    }
    if spec.cells_per_slab < FDTD_MIN_CELLS_PER_SLAB {
        return Err(Error::GridTooCoarse { cells: spec.cells_per_slab, required: FDTD_MIN_CELLS_PER_SLAB });
    }
    if !(spec.courant > 0.0 && spec.courant <= 1.0) {
        return Err(Error::CourantViolation { courant: spec.courant });
    }
    let cells = spec.cells_per_slab;
    let dz = spec.d / cells as f64;
    let probe = (spec.source.wavelength() / dz).round() as usize;
    let sheet = probe + MARGIN;
    Ok(Layout { n: 2 * sheet + 1, sheet, cells, probe, dz, dt: spec.courant * dz / SPEED_OF_LIGHT })
}

/// Relative permittivity of the time-varying slab.
fn tv_permittivity(m: Option<&SensorModulation>, d: f64, t: f64) -> f64 {
    m.map_or(1.0, |m| super::permittivity_for(m.layer_at(t), d))
}

/// Runs the slab stack on `[0, t_end]`. Records are decimated to the
/// spec's `steps_per_period` when the FDTD step is finer.
pub fn simulate_fdtd(spec: &SheetSpec, t_end: f64, modulation_on: bool) -> Result<FieldProbeRecord> {
    let lay = layout(spec)?;
    let src = spec.source;
    let (dz, dt) = (lay.dz, lay.dt);
    let steps = (t_end / dt).round() as usize;
    let modulation = if modulation_on { Some(synth_sensor_modulation(spec, t_end)?) } else { None };
    let m = modulation.as_ref();

    let inc = |z: f64, t: f64| src.field(t + z / SPEED_OF_LIGHT);
    let n = lay.n;
    let mut e: Vec<f64> = (0..n).map(|k| inc(lay.z(k as f64), 0.0)).collect();
    let mut h: Vec<f64> = (0..n - 1).map(|k| -inc(lay.z(k as f64 + 0.5), -0.5 * dt) / ETA0).collect();

    let static_range = lay.static_nodes();
    let tv_range = lay.tv_nodes();
    let eps_static = spec.eps_r;
    let mut eps_tv = tv_permittivity(m, spec.d, 0.0);
    // D in the slabs, E elsewhere
    let mut d_static: Vec<f64> = static_range.clone().map(|k| EPS0 * eps_static * e[k]).collect();
    let mut d_tv: Vec<f64> = tv_range.clone().map(|k| EPS0 * eps_tv * e[k]).collect();

    let ch = dt / (MU0 * dz);
    let ce = dt / (EPS0 * dz);
    let cd = dt / dz;
    let g = spec.conductance() / dz;
    let (sheet_a, sheet_b) = ((EPS0 / dt - 0.5 * g) / (EPS0 / dt + 0.5 * g), 1.0 / (EPS0 / dt + 0.5 * g));
    let s = spec.courant;
    let mur = (s - 1.0) / (s + 1.0);

    let fdtd_per_period = src.period() / dt;
    let stride = ((fdtd_per_period / spec.steps_per_period as f64).round() as usize).max(1);
    let (top_probe, bottom_probe) = (lay.sheet + lay.probe, lay.sheet - lay.probe);
    let mut above = vec![e[top_probe]];
    let mut below = vec![e[bottom_probe]];
    let mut at_sheet = vec![e[lay.sheet]];
    let (mut j_static, mut j_tv, mut p_static, mut p_tv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let e_scale = src.e_dc + src.e0;
    let mut diverged = None;

    let mut e_old_static = vec![0.0; lay.cells];
    let mut e_old_tv = vec![0.0; lay.cells];
    for step in 0..steps {
        let t_next = (step + 1) as f64 * dt;
        let record = (step + 1) % stride == 0;
        if record {
            e_old_static.copy_from_slice(&e[static_range.clone()]);
            e_old_tv.copy_from_slice(&e[tv_range.clone()]);
        }
        let (p_old_static, p_old_tv): (Vec<f64>, Vec<f64>) = if record {
            (
                static_range.clone().enumerate().map(|(i, k)| d_static[i] - EPS0 * e[k]).collect(),
                tv_range.clone().enumerate().map(|(i, k)| d_tv[i] - EPS0 * e[k]).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        let e_sheet_old = e[lay.sheet];
        let (e0_old, e1_old, en2_old, en1_old) = (e[0], e[1], e[n - 2], e[n - 1]);

        for k in 0..n - 1 {
            h[k] -= ch * (e[k + 1] - e[k]);
        }
        // vacuum everywhere, then slab and sheet nodes are overwritten
        for k in 1..n - 1 {
            e[k] -= ce * (h[k] - h[k - 1]);
        }
        for (i, k) in static_range.clone().enumerate() {
            d_static[i] -= cd * (h[k] - h[k - 1]);
            e[k] = d_static[i] / (EPS0 * eps_static);
        }
        let k = lay.sheet;
        e[k] = sheet_a * e_sheet_old - sheet_b * (h[k] - h[k - 1]) / dz;
        if modulation_on {
            eps_tv = tv_permittivity(m, spec.d, t_next);
            if !(eps_tv > 0.0) {
                return Err(Error::PositivityViolated { t: t_next });
            }
        }
        for (i, k) in tv_range.clone().enumerate() {
            d_tv[i] -= cd * (h[k] - h[k - 1]);
            e[k] = d_tv[i] / (EPS0 * eps_tv);
        }
        e[0] = e1_old + mur * (e[1] - e0_old);
        let (z_top, z_inner) = (lay.z((n - 1) as f64), lay.z((n - 2) as f64));
        let t_now = step as f64 * dt;
        let s_inner_old = en2_old - inc(z_inner, t_now);
        let s_top_old = en1_old - inc(z_top, t_now);
        let s_inner = e[n - 2] - inc(z_inner, t_next);
        e[n - 1] = inc(z_top, t_next) + s_inner_old + mur * (s_inner - s_top_old);

        if record {
            above.push(e[top_probe]);
            below.push(e[bottom_probe]);
            at_sheet.push(e[lay.sheet]);
            let layer = |range: std::ops::Range<usize>, d: &[f64], e_old: &[f64], p_old: &[f64]| {
                let (mut j, mut p) = (0.0, 0.0);
                for (i, k) in range.enumerate() {
                    let dp = (d[i] - EPS0 * e[k] - p_old[i]) / dt;
                    j += dp * dz;
                    p += 0.5 * (e[k] + e_old[i]) * dp * dz;
                }
                (j, p)
            };
            let (js, ps) = layer(static_range.clone(), &d_static, &e_old_static, &p_old_static);
            let e_avg = 0.5 * (e[lay.sheet] + e_sheet_old);
            let g_sheet = spec.conductance();
            j_static.push(js + g_sheet * e_avg);
            p_static.push(ps + g_sheet * e_avg * e_avg);
            // an unmodulated slab is vacuum and carries no polarization current
            let (jt, pt) = if modulation_on { layer(tv_range.clone(), &d_tv, &e_old_tv, &p_old_tv) } else { (0.0, 0.0) };
            j_tv.push(jt);
            p_tv.push(pt);
            let worst = e[top_probe].abs().max(e[bottom_probe].abs()).max(e[lay.sheet].abs());
            if !worst.is_finite() || worst > 1e6 * e_scale {
                diverged = Some(t_next);
                break;
            }
        }
    }

    let rdt = stride as f64 * dt;
    let len = above.len();
    let wave = |v: Vec<f64>| Waveform::new(0.0, rdt, v, "V/m");
    let e_incident_above = Waveform::from_fn(0.0, rdt, len, "V/m", |t| inc(lay.z(top_probe as f64), t))?;
    let e_incident_below = Waveform::from_fn(0.0, rdt, len, "V/m", |t| inc(lay.z(bottom_probe as f64), t))?;
    let e_sheet = wave(at_sheet)?;
    let t_half = rdt - 0.5 * dt;
    let layer_wave = |v: Vec<f64>, unit: &str| Waveform::new(t_half, rdt, v, unit);
    let j_total_samples: Vec<f64> = j_static.iter().zip(&j_tv).map(|(a, b)| a + b).collect();
    if j_static.is_empty() {
        return Err(Error::TooShort { needed: stride + 1, got: steps + 1 });
    }
    Ok(FieldProbeRecord {
        source: src,
        modulation_on,
        e_above: wave(above)?,
        e_below: wave(below)?,
        e_incident_above,
        e_incident_below,
        e_sheet,
        j_total: layer_wave(j_total_samples, "A/m")?,
        static_layer: LayerTrace { j: layer_wave(j_static, "A/m")?, p: layer_wave(p_static, "W/m^2")? },
        tv_layer: LayerTrace { j: layer_wave(j_tv, "A/m")?, p: layer_wave(p_tv, "W/m^2")? },
        diverged,
    })
}

/// Propagates a Gaussian pulse through an empty grid of `cells_per_lambda`
/// cells per wavelength over `distance_lambdas` wavelengths and returns the
/// relative peak-amplitude error.
pub fn vacuum_pulse_error(cells_per_lambda: usize, distance_lambdas: f64, courant: f64) -> Result<f64> {
    if !(courant > 0.0 && courant <= 1.0) {
        return Err(Error::CourantViolation { courant });
    }
    let dz = 1.0 / cells_per_lambda as f64;
    let travel = (distance_lambdas * cells_per_lambda as f64).round() as usize;
    let width = cells_per_lambda as f64 / 4.0;
    let n = travel + 20 * cells_per_lambda;
    let c0 = 8.0 * width;
    let ch = courant / ETA0;
    let ce = courant * ETA0;
    let pulse = |z: f64| (-((z - c0 * dz) / (width * dz)).powi(2)).exp();
    let mut e: Vec<f64> = (0..n).map(|k| pulse(k as f64 * dz)).collect();
    // wave moving towards +z: H = E / eta0, half a step behind
    let mut h: Vec<f64> = (0..n - 1).map(|k| pulse((k as f64 + 0.5) * dz - 0.5 * courant * dz) / ETA0).collect();
    let steps = (travel as f64 / courant).round() as usize;
    for _ in 0..steps {
        for k in 0..n - 1 {
            h[k] -= ch * (e[k + 1] - e[k]);
        }
        for k in 1..n - 1 {
            e[k] -= ce * (h[k] - h[k - 1]);
        }
    }
    let peak = e.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok((peak - 1.0).abs())
}

//! Time-averaged power bookkeeping and cross-variant comparison.

use super::{simulate_fdtd, simulate_sheet, FieldProbeRecord, SheetSpec, Variant};
use crate::consts::ETA0;
use crate::signals::Waveform;
use crate::{Error, Result};

const REQUIRED_PERIODS: usize = 3;

/// Mean of `w` over the largest whole number of periods from `t_from`.
fn periodic_mean(w: &Waveform, period: f64, t_from: f64) -> Result<(f64, usize)> {
    let per = period / w.dt();
    let start = w.index_at_or_after(t_from);
    let avail = w.len().saturating_sub(start);
    let periods = ((avail.saturating_sub(1)) as f64 / per + 1e-9).floor() as usize;
    if periods < REQUIRED_PERIODS {
        return Err(Error::WindowTooShort { periods: avail as f64 / per, required: REQUIRED_PERIODS });
    }
    let count = (periods as f64 * per).round() as usize;
    let s = &w.samples()[start..start + count];
    Ok((s.iter().sum::<f64>() / count as f64, periods))
}

/// Time-averaged power absorbed per unit area by each layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    pub p_static: f64,
    /// Negative when the layer delivers power.
    pub p_tv: f64,
    pub net: f64,
    pub periods: usize,
}

impl PowerReport {
    /// `|net| / |p_static|`.
    pub fn imbalance(&self) -> f64 {
        self.net.abs() / self.p_static.abs()
    }
}

pub fn power_balance(rec: &FieldProbeRecord, settle: f64) -> Result<PowerReport> {
    let period = rec.source.period();
    let (p_static, periods) = periodic_mean(&rec.static_layer.p, period, settle)?;
    let (p_tv, _) = periodic_mean(&rec.tv_layer.p, period, settle)?;
    Ok(PowerReport { p_static, p_tv, net: p_static + p_tv, periods })
}

/// Time-averaged power flux densities, W/m^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub incident: f64,
    pub reflected: f64,
    pub transmitted: f64,
    pub absorbed: f64,
}

pub fn energy_balance(rec: &FieldProbeRecord, settle: f64) -> Result<EnergyBalance> {
    let period = rec.source.period();
    let flux = |w: &Waveform| -> Result<f64> {
        let sq = w.map("W/m^2", |x| x * x / ETA0)?;
        Ok(periodic_mean(&sq, period, settle)?.0)
    };
    let p = power_balance(rec, settle)?;
    Ok(EnergyBalance {
        incident: flux(&rec.e_incident_above)?,
        reflected: flux(&rec.scattered_above()?)?,
        transmitted: flux(&rec.e_below)?,
        absorbed: p.net,
    })
}

/// Largest field difference between two runs at each probe.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDifference {
    pub first: Variant,
    pub second: Variant,
    pub max_above: f64,
    pub max_below: f64,
    /// `max(max_above, max_below) / E0`.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantReport {
    pub records: Vec<(Variant, FieldProbeRecord)>,
    pub pairs: Vec<PairDifference>,
}

pub(crate) fn max_difference(a: &Waveform, b: &Waveform, t_from: f64) -> f64 {
    let mut worst = 0.0_f64;
    for k in a.index_at_or_after(t_from)..a.len() {
        if let Some(y) = b.value_at(a.time(k)) {
            worst = worst.max((a.samples()[k] - y).abs());
        }
    }
    worst
}

/// Runs each realization with its natural model (the FDTD model for the
/// slab variant, the sheet model otherwise) and compares probe fields
/// pairwise after `settle`.
pub fn compare_variants(specs: &[SheetSpec], t_end: f64, modulation_on: bool, settle: f64) -> Result<VariantReport> {
    let first = specs.first().ok_or(Error::MismatchedSources)?;
    if specs.iter().any(|s| !s.same_drive(first)) {
        return Err(Error::MismatchedSources);
    }
    let mut records = Vec::with_capacity(specs.len());
    for s in specs {
        let rec = match s.variant {
            Variant::TwoDielectricSlabs => simulate_fdtd(s, t_end, modulation_on)?,
            _ => simulate_sheet(s, t_end, modulation_on)?,
        };
        records.push((s.variant, rec));
    }
    let scale = if first.source.e0 > 0.0 { first.source.e0 } else { first.source.e_dc };
    let mut pairs = Vec::new();
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let (va, a) = &records[i];
            let (vb, b) = &records[j];
            let max_above = max_difference(&a.e_above, &b.e_above, settle);
            let max_below = max_difference(&a.e_below, &b.e_below, settle);
            pairs.push(PairDifference {
                first: *va,
                second: *vb,
                max_above,
                max_below,
                relative: max_above.max(max_below) / scale,
            });
        }
    }
    Ok(VariantReport { records, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_sources_are_rejected() {
        let a = SheetSpec::nominal(Variant::TwoPatchArrays);
        let mut b = SheetSpec::nominal(Variant::PatchesOnSubstrate);
        b.source.e0 = 0.5;
        assert_eq!(compare_variants(&[a, b], 1e-10, true, 0.0).unwrap_err(), Error::MismatchedSources);
    }

    #[test]
    fn sheet_variants_coincide() {
        let a = SheetSpec::nominal(Variant::TwoPatchArrays);
        let b = SheetSpec::nominal(Variant::PatchesOnSubstrate);
        let t_end = 6.0 * a.source.period();
        let report = compare_variants(&[a.clone(), b], t_end, true, 2.0 * a.source.period()).unwrap();
        assert_eq!(report.pairs.len(), 1);
        assert!(report.pairs[0].relative < 1e-10);
    }
}

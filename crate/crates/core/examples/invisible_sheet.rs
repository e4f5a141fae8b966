//! The invisible sensor in the zero-thickness sheet model, with and
//! without modulation.

use tvcap::sheetsim::{power_balance, simulate_sheet, static_reflection, synth_sensor_modulation, SheetSpec, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SheetSpec::nominal(Variant::TwoPatchArrays);
    let t_end = spec.default_t_end()?;
    let period = spec.source.period();
    let m = synth_sensor_modulation(&spec, t_end)?;
    println!("C_R reaches zero after {:.2} periods; running {:.2}", m.stops.cr_zero / period, t_end / period);
    println!("static |reflection| = {:.4}", static_reflection(&spec).norm());

    for on in [false, true] {
        let rec = simulate_sheet(&spec, t_end, on)?;
        let p = power_balance(&rec, 2.0 * period)?;
        println!(
            "modulation {:<3}: residual {:.3e} E0, |reflection| {:.4}, p_static {:.4e}, p_tv {:+.4e} W/m^2",
            if on { "on" } else { "off" },
            rec.residual(2.0 * period)?,
            rec.reflection(2.0 * period)?.amplitude,
            p.p_static,
            p.p_tv
        );
    }
    Ok(())
}

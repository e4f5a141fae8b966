//! Two dielectric slabs around a resistive sheet in 1D FDTD, against the
//! sheet model. Takes a few seconds in release mode.

use tvcap::sheetsim::{simulate_fdtd, simulate_sheet, vacuum_pulse_error, SheetSpec, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("vacuum pulse error over 4 wavelengths: {:.2e}", vacuum_pulse_error(400, 4.0, 1.0)?);
    let spec = SheetSpec::nominal(Variant::TwoDielectricSlabs);
    println!("slab capacitance {:.4e} F (C0 = {:.1e} F)", spec.c_eff(), spec.c0);
    let period = spec.source.period();

    let t_off = 8.0 * period;
    let fdtd = simulate_fdtd(&spec, t_off, false)?;
    let sheet = simulate_sheet(&spec, t_off, false)?;
    println!(
        "modulation off: |reflection| FDTD {:.5}, sheet {:.5}",
        fdtd.reflection(4.0 * period)?.amplitude,
        sheet.reflection(4.0 * period)?.amplitude
    );

    let on = simulate_fdtd(&spec, spec.default_t_end()?, true)?;
    for settle in [2.0, 10.0, 18.0] {
        println!("modulation on: residual after {settle} periods {:.4} E0", on.residual(settle * period)?);
    }
    Ok(())
}

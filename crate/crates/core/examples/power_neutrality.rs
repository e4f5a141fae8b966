//! Time-averaged layer powers: the sheet model is neutral, the two-slab
//! realization leaves a residue that shrinks with the slab thickness.

use tvcap::sheetsim::{compare_variants, power_balance, simulate_fdtd, simulate_sheet, SheetSpec, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = SheetSpec::nominal(Variant::TwoDielectricSlabs);
    let t_end = base.default_t_end()?;
    let settle = 10.0 * base.source.period();

    let sheet = power_balance(&simulate_sheet(&base, t_end, true)?, settle)?;
    println!("sheet: p_static {:.4e}, p_tv {:+.4e}, |net|/p_static {:.2e}", sheet.p_static, sheet.p_tv, sheet.imbalance());

    for f in [1.0, 0.5] {
        let spec = base.clone().with_thickness(base.d * f);
        let p = power_balance(&simulate_fdtd(&spec, t_end, true)?, settle)?;
        println!("FDTD d x {f}: eps_r {:.1}, |net|/p_static {:.3e}", spec.eps_r, p.imbalance());
    }

    let variants = [Variant::TwoPatchArrays, Variant::PatchesOnSubstrate, Variant::TwoDielectricSlabs];
    let specs: Vec<SheetSpec> = variants.iter().map(|&v| SheetSpec { variant: v, ..base.clone() }).collect();
    for pair in compare_variants(&specs, t_end, true, settle)?.pairs {
        println!("{} vs {}: max field difference {:.3e} E0", pair.first, pair.second, pair.relative);
    }
    Ok(())
}

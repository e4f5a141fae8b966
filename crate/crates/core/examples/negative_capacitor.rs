//! Modulation that makes a positive capacitor behave as C_eq = -1 nF.

use tvcap::circuitsim::{equivalent_element_voltage, Branch, CircuitSpec};
use tvcap::modsynth::{synth_capacitance, FreeConstant, TargetElement};
use tvcap::signals::{HarmonicSignal, Waveform};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0)?;
    let target = TargetElement::Capacitance { c_eq: -1e-9 };
    let eq = CircuitSpec::new(src, 10.0, Branch::Equivalent(target))?;
    let ve = equivalent_element_voltage(&eq, src.omega)?;
    let v = Waveform::from_fn(0.0, src.default_dt(), 2001, "V", |t| ve.value(t))?;

    for constant in [FreeConstant::Auto, FreeConstant::Fixed(8e-9)] {
        let p = synth_capacitance(&v, -1e-9, constant)?;
        println!(
            "{constant:?}: c1 = {:.4e} C, C(t) in [{:.4e}, {:.4e}] F",
            p.constants.c1.unwrap_or(f64::NAN),
            p.min(),
            p.max()
        );
    }
    Ok(())
}

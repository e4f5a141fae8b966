//! A general admittance kernel and a weakly nonlinear extension, both
//! realized by one time-varying capacitor.

use tvcap::kernels::{convolve_first_order, AdmittanceKernel, VolterraKernel2};
use tvcap::modsynth::{synth_capacitance, synth_general, synth_nonlinear, FreeConstant};
use tvcap::signals::{sample, HarmonicSignal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0)?;
    let v = sample(&src, 0.0, src.default_dt(), 4 * 2000 + 1, "V")?;

    // a pure derivative kernel is a capacitor, so both routes agree
    let k = AdmittanceKernel::capacitance(-1e-9)?;
    let general = synth_general(&v, &k, FreeConstant::Fixed(7e-9))?;
    let direct = synth_capacitance(&v, -1e-9, FreeConstant::Fixed(7e-9))?;
    let gap = general
        .capacitance()
        .samples()
        .iter()
        .zip(direct.capacitance().samples())
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max);
    println!("delta-prime kernel vs capacitance synthesis: max relative gap {gap:.1e}");

    let i = convolve_first_order(&AdmittanceKernel::conductance(0.1)?, &v)?;
    println!("conductance kernel current: {:.3} .. {:.3} {}", i.min(), i.max(), i.unit());

    let k2 = VolterraKernel2::memoryless(1e-3, v.dt())?;
    let weak = synth_nonlinear(&v, &AdmittanceKernel::conductance(0.1)?, &k2, FreeConstant::Auto)?;
    println!("nonlinear profile: C in [{:.3e}, {:.3e}] F", weak.min(), weak.max());
    Ok(())
}

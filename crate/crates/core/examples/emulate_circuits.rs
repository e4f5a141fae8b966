//! Transient emulation of a negative capacitor, a resistor and a lossy
//! negative inductor, compared with the ideal elements' steady state.

use tvcap::circuitsim::{emulate_target, EmulationOptions};
use tvcap::modsynth::TargetElement;
use tvcap::signals::HarmonicSignal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0)?;
    let targets = [
        TargetElement::Capacitance { c_eq: -1e-9 },
        TargetElement::Resistance { r_eq: 10.0 },
        TargetElement::LossyInductance { l_eq: -1e-6, r_l: 1.0, r_c: 1.0 },
    ];
    for t in &targets {
        let run = emulate_target(src, 10.0, t, &EmulationOptions::default())?;
        println!(
            "{:<16} I_dc {:+.4} A  |I_ac| {:.4e} A  rel RMS {:.2e} over {} periods",
            t.kind().as_str(),
            run.reference.dc,
            run.reference.ac.amplitude,
            run.report.rel_rms,
            run.report.periods()
        );
    }
    Ok(())
}

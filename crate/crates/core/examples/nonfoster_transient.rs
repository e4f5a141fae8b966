//! An ideal negative capacitor behind a resistor: exponential growth and
//! the divergence flag.

use tvcap::circuitsim::{simulate_tvc, Branch, CircuitSpec, InitialCharge};
use tvcap::modsynth::ModulationProfile;
use tvcap::signals::HarmonicSignal;
use tvcap::stability::ideal_nonfoster_transient;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (r, c0, q0) = (10.0, -1e-9, 1e-12);
    let law = ideal_nonfoster_transient(r, c0, q0)?;
    println!("analytic e-folding {:.3e} s, growing: {}", law.e_folding_time(), law.is_growing());

    let quiet = HarmonicSignal::from_frequency(0.0, 0.0, 1e6, 0.0)?;
    let dt = quiet.default_dt();
    let profile = ModulationProfile::constant(c0, 0.0, dt, 2001)?;
    let spec = CircuitSpec::new(quiet, r, Branch::TimeVaryingCap { profile, parallel_r: None })?
        .with_initial(InitialCharge::Value(q0))
        .allowing_nonpositive();
    let trace = simulate_tvc(&spec, 2000.0 * dt)?;
    let k = (3.0 * law.e_folding_time() / dt).round() as usize;
    let rate = (trace.q.samples()[k] / q0).ln() / trace.q.time(k);
    println!("simulated rate {rate:.6e} 1/s, analytic {:.6e} 1/s", law.rate);
    println!("diverged at {:?} s", trace.diverged);
    Ok(())
}

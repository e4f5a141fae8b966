//! Circle-criterion verdicts for a synthesized profile, its parallel-loss
//! topology, and a static negative capacitor.

use tvcap::circuitsim::{emulate_target, EmulationOptions};
use tvcap::modsynth::{ModulationProfile, TargetElement};
use tvcap::signals::HarmonicSignal;
use tvcap::stability::{assess, circle_criterion, Topology};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0)?;
    let run = emulate_target(src, 10.0, &TargetElement::Capacitance { c_eq: -1e-9 }, &EmulationOptions::default())?;
    println!("{}", assess(run.profile(), Topology::Series { r: 10.0 })?.to_text());
    println!("{}", assess(run.profile(), Topology::ParallelLoss { r_s: 10.0, r_c: 10.0 })?.to_text());

    let frozen = ModulationProfile::constant(-1e-9, 0.0, src.default_dt(), 101)?;
    println!("{}", assess(&frozen, Topology::Series { r: 10.0 })?.to_text());

    let r = circle_criterion(1.0e8, 2.333e8)?;
    println!("a = 1e8, b = 2.333e8: center {:.4e} s, radius {:.4e} s, {}", r.circle_center, r.circle_radius, r.verdict);
    Ok(())
}

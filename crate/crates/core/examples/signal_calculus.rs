//! Sampling, calculus and phasor extraction on a biased tone.

use tvcap::signals::{cumulative_integral, derivative, lowpass, sample, steady_state_phasor, HarmonicSignal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = HarmonicSignal::from_frequency(6.0, 1.0, 1e6, 0.0)?;
    let v = sample(&src, 0.0, src.default_dt(), 10 * 2000 + 1, "V")?;

    let dv = derivative(&v)?;
    let back = cumulative_integral(&dv, v.samples()[0]);
    let worst = v.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("derivative unit {}, round-trip error {worst:.2e} V", dv.unit());

    let smooth = lowpass(&v, 3.0 * src.frequency())?;
    println!("lowpass mean {:.9} V (input {:.9} V)", smooth.mean(), v.mean());

    let p = steady_state_phasor(&v, src.omega, 2.0 * src.period())?;
    println!("phasor |V| = {:.6} V at {:.3} deg", p.amplitude, p.phase_degrees());
    Ok(())
}

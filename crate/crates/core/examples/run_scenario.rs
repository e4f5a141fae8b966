//! Loads a bundled scenario with an override, runs it and prints the
//! check verdicts. Pass a scenario name to pick another one.

use tvcap::scenario::{load, run_scenario, bundled, BUNDLED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "emulated_resistor".to_string());
    let text = bundled(&name).ok_or_else(|| {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        format!("unknown scenario {name}; bundled: {}", names.join(", "))
    })?;
    for modulation in ["on", "off"] {
        let loaded = load(text, &name, &[("modulation".to_string(), modulation.to_string())])?;
        let report = run_scenario(&loaded)?;
        println!("-- {name}, modulation {modulation}");
        for c in &report.checks {
            println!("{}", c.line());
        }
    }
    Ok(())
}

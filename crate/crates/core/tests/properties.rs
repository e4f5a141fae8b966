use proptest::prelude::*;

use tvcap::modsynth::{synth_capacitance, synth_resistance, FreeConstant};
use tvcap::signals::{fit_harmonic, lowpass, sample, HarmonicSignal, Waveform};
use tvcap::stability::{circle_criterion, Verdict};

fn drive(v_dc: f64, ac_frac: f64, phi: f64) -> Waveform {
    let h = HarmonicSignal::from_frequency(v_dc, ac_frac * v_dc, 1e6, phi).unwrap();
    sample(&h, 0.0, h.period() / 400.0, 801, "V").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacitance_profile_carries_target_charge(
        v_dc in 1.0f64..20.0, ac in 0.0f64..0.9, phi in -3.0f64..3.0,
        c_eq in -5e-9f64..5e-9, c1 in -1e-7f64..1e-7,
    ) {
        let v = drive(v_dc, ac, phi);
        let p = synth_capacitance(&v, c_eq, FreeConstant::Fixed(c1)).unwrap();
        for (&c, &vk) in p.capacitance().samples().iter().zip(v.samples()) {
            prop_assert!((c * vk - (c1 + c_eq * vk)).abs() <= 1e-12 * (c1.abs() + (c_eq * vk).abs()) + 1e-24);
        }
    }

    #[test]
    fn auto_constant_keeps_capacitance_positive(
        v_dc in 1.0f64..20.0, ac in 0.0f64..0.9, c_eq in -5e-9f64..-1e-12,
    ) {
        let v = drive(v_dc, ac, 0.0);
        let p = synth_capacitance(&v, c_eq, FreeConstant::Auto).unwrap();
        prop_assert!(p.capacitance().min() > 0.0);
        prop_assert!((p.capacitance().min() - 0.1 * c_eq.abs()).abs() <= 1e-9 * c_eq.abs());
    }

    #[test]
    fn resistance_sign_flip_reflects_about_constant(
        v_dc in 1.0f64..20.0, ac in 0.0f64..0.9, r in 1.0f64..1e3, c2 in 1e-9f64..1e-6,
    ) {
        let v = drive(v_dc, ac, 0.3);
        let plus = synth_resistance(&v, r, FreeConstant::Fixed(c2)).unwrap();
        let minus = synth_resistance(&v, -r, FreeConstant::Fixed(c2)).unwrap();
        let pairs = plus.capacitance().samples().iter().zip(minus.capacitance().samples());
        for ((&a, &b), &vk) in pairs.zip(v.samples()) {
            prop_assert!((a + b - 2.0 * c2 / vk).abs() <= 1e-9 * (a.abs() + b.abs()));
        }
    }

    #[test]
    fn circle_verdict_follows_sector_sign(a in -1e9f64..1e9, width in 0.0f64..1e9) {
        let b = a + width;
        let r = circle_criterion(a, b).unwrap();
        prop_assert_eq!(r.verdict == Verdict::Stable, a > 0.0 && b > 0.0);
        if r.verdict == Verdict::Stable {
            prop_assert!(r.circle_center + r.circle_radius < 0.0);
            prop_assert!((r.circle_center - r.circle_radius + 1.0 / a).abs() <= 1e-9 / a);
        }
    }

    #[test]
    fn harmonic_fit_recovers_parameters(
        offset in -5.0f64..5.0, amp in 0.01f64..3.0, phi in -3.0f64..3.0,
    ) {
        let h = HarmonicSignal::from_frequency(offset, amp, 1e6, phi).unwrap();
        let w = sample(&h, 0.0, h.period() / 200.0, 1001, "V").unwrap();
        let fit = fit_harmonic(&w, h.omega, h.period()).unwrap();
        prop_assert!((fit.offset - offset).abs() < 1e-9);
        prop_assert!((fit.phasor.amplitude - amp).abs() < 1e-9);
        let dphi = (fit.phasor.phase - phi).rem_euclid(std::f64::consts::TAU);
        prop_assert!(dphi.min(std::f64::consts::TAU - dphi) < 1e-8);
    }

    #[test]
    fn lowpass_passes_dc(level in -10.0f64..10.0, cut_frac in 0.001f64..0.2) {
        let w = Waveform::constant(0.0, 1e-9, 500, level, "V").unwrap();
        let y = lowpass(&w, cut_frac * 0.5e9).unwrap();
        for &s in y.samples() {
            prop_assert!((s - level).abs() <= 1e-9 * (1.0 + level.abs()));
        }
    }
}

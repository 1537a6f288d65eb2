use proptest::prelude::*;

use sim2spec_core::bounds::{
    band_capture_check, ridge_inequality_check, ring_entropy_bound, ring_entropy_check, window_leakage,
};
use sim2spec_core::gates::GateBounds;
use sim2spec_core::losses::adaptive_composite;
use sim2spec_core::spectral::{eta_retention, lowpass_cube, spectral_transform, EtaParams};
use sim2spec_core::synth::{synth_sim2, BaseSpec, MotionSpec};
use sim2spec_core::{analyze, SpectralConfig, VideoWindow, WindowKind};

fn video(t: usize, h: usize, w: usize) -> impl Strategy<Value = VideoWindow> {
    prop::collection::vec(-0.5f64..0.5, t * h * w).prop_map(move |d| VideoWindow::new(t, h, w, d).unwrap())
}

fn rect() -> SpectralConfig {
    SpectralConfig {
        window_kind: WindowKind::Rect,
        ..SpectralConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_holds(v in video(4, 6, 5)) {
        let s = spectral_transform(&v, &rect());
        let n = (4 * 6 * 5) as f64;
        let time: f64 = v.data().iter().map(|x| x * x).sum();
        prop_assert!((s.total_energy() - n * time).abs() <= 1e-6 * (n * time).max(1e-300));
    }

    #[test]
    fn real_input_gives_hermitian_spectrum(v in video(5, 3, 7)) {
        let s = spectral_transform(&v, &SpectralConfig::default());
        let scale = s.coeffs.iter().map(|c| c.norm()).fold(1e-300, f64::max);
        for kt in s.freq_t() {
            for ky in s.freq_y() {
                for kx in s.freq_x() {
                    let (a, b) = (s.at_freq(kt, ky, kx), s.at_freq(-kt, -ky, -kx));
                    prop_assert!((a - b.conj()).norm() <= 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn lowpass_is_idempotent(v in video(6, 8, 8), rho in 0.01f64..1.0) {
        let s = spectral_transform(&v, &SpectralConfig::default());
        let once = lowpass_cube(&s, rho);
        prop_assert_eq!(lowpass_cube(&once, rho), once);
    }

    #[test]
    fn eta_ball_is_monotone(kappa in 0.2f64..3.0, a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let p = EtaParams::for_grid([16, 64, 64], kappa).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (eta_retention(lo, &p).unwrap(), eta_retention(hi, &p).unwrap());
        prop_assert!(x.eta_ball <= y.eta_ball + 1e-12);
        prop_assert!(x.eta_cube_lo <= x.eta_cube_hi);
    }

    #[test]
    fn weights_form_a_distribution(l in prop::array::uniform3(0.0f64..1.0), tau in 1e-3f64..10.0) {
        let (w, lm) = adaptive_composite(l, tau);
        prop_assert!((w.as_array().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(w.as_array().iter().all(|&x| (0.0..=1.0).contains(&x)));
        let lo = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lm >= lo - 1e-12 && lm <= hi + 1e-12);
    }

    #[test]
    fn lower_loss_never_gets_less_weight(l in prop::array::uniform3(0.0f64..1.0), tau in 1e-2f64..1.0) {
        let (w, _) = adaptive_composite(l, tau);
        let w = w.as_array();
        for i in 0..3 {
            for j in 0..3 {
                if l[i] < l[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }

    #[test]
    fn band_capture_bound_holds(
        rows in prop::collection::vec((-6.0f64..6.0, 0.0f64..1.0, 0.05f64..1.0), 1..60),
        delta in 0.25f64..3.0,
    ) {
        let errors: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let energies: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let gates: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let lo = gates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = gates.iter().cloned().fold(0.0, f64::max);
        let b = GateBounds { g_lo: lo, g_hi: hi, gated_in: rows.len(), active: rows.len() };
        let c = band_capture_check(&errors, &energies, &gates, delta, b);
        prop_assert!(c.holds, "{}", c.describe());
    }

    #[test]
    fn ridge_residual_bound_holds(
        seed_rows in prop::collection::vec(prop::array::uniform4(-3.0f64..3.0), 8..40),
        weights in prop::collection::vec(0.01f64..1.0, 40),
        lambda in prop::sample::select(vec![1e-4, 1e-3, 1e-2]),
    ) {
        let n = seed_rows.len();
        let design: Vec<f64> = seed_rows.iter().flat_map(|r| r[..3].to_vec()).collect();
        let targets: Vec<f64> = seed_rows.iter().map(|r| r[3]).collect();
        let c = ridge_inequality_check(&design, 3, &targets, &weights[..n], lambda).unwrap();
        prop_assert!(c.holds, "{}", c.describe());
    }

    #[test]
    fn ring_entropy_bound_holds(energies in prop::collection::vec(0.0f64..1.0, 2..24)) {
        prop_assume!(energies.iter().sum::<f64>() > 1e-9);
        let c = ring_entropy_check(&energies);
        prop_assert!(c.holds, "{}", c.describe());
    }

    #[test]
    fn ring_bound_is_monotone_below_the_uniform_point(a in 0.0f64..0.5, b in 0.0f64..0.5, rings in 2usize..32) {
        let lim = 1.0 - 1.0 / rings as f64;
        let (a, b) = (a.min(lim), b.min(lim));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(ring_entropy_bound(lo, rings) <= ring_entropy_bound(hi, rings) + 1e-12);
    }

    #[test]
    fn leakage_is_monotone_in_delta(t in 2usize..64, d in 0usize..32) {
        let d = d.min(t / 2) as f64;
        for kind in [WindowKind::Hann, WindowKind::Rect] {
            prop_assert!(window_leakage(t, d + 1.0, kind) <= window_leakage(t, d, kind) + 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn report_identities(seed in 0u64..1000, omega in -0.2f64..0.2, noise in 0.0f64..0.05) {
        let v = synth_sim2(&BaseSpec::default(), &MotionSpec::rotation(omega, seed).with_noise(noise), 8, 32, 32).unwrap();
        let r = analyze(&v, &SpectralConfig::default()).unwrap();
        prop_assert!((r.l_rot - (1.0 - 0.5 * (r.c_ring + r.c_rot))).abs() <= 1e-12);
        prop_assert!((r.l_scale - (1.0 - 0.5 * (r.c_flow + r.s_trend))).abs() <= 1e-12);
        prop_assert!((r.weights.as_array().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for x in [r.c_rot, r.c_ring, r.c_flow, r.s_trend, r.c_scale, r.l_trans, r.l_rot, r.l_scale] {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&x), "{x}");
        }
        prop_assert!(r.l_uni >= 0.0);
    }

    #[test]
    fn synthesis_is_deterministic(seed in 0u64..1000, vx in -2.0f64..2.0, noise in 0.0f64..0.1) {
        let spec = MotionSpec::translation(vx, 0.0, seed).with_noise(noise);
        let a = synth_sim2(&BaseSpec::default(), &spec, 3, 16, 16).unwrap();
        let b = synth_sim2(&BaseSpec::default(), &spec, 3, 16, 16).unwrap();
        prop_assert_eq!(a, b);
    }
}

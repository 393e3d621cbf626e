//! Ladder diagonalization cross-checked against a Sylvester-inertia
//! bisection eigensolver, plus structural properties of the folded
//! spectrum and the doublet selection.

mod common;

use driven_tls::floquet::{
    build_floquet_matrix, central_doublet, converged_doublet, diagonalize_floquet,
    doublet_sweep, fold_quasienergy,
};
use driven_tls::{SystemParams, TruncationConfig};
use proptest::prelude::*;

fn params(eps: f64, omega: f64, amp: f64) -> SystemParams {
    SystemParams::new(1.0, eps, amp, omega).unwrap()
}

#[test]
fn eigenvalues_match_inertia_bisection_oracle() {
    // A deliberately scalene parameter set; 2(2·5+1) = 22 states.
    let p = params(3.7, 1.9, 4.3);
    let tr = TruncationConfig {
        n_tr: 5,
        ..TruncationConfig::for_params(&p)
    };
    let fm = build_floquet_matrix(&p, &tr).unwrap();
    let spec = diagonalize_floquet(&fm).unwrap();
    let oracle = common::bisection_eigenvalues(&fm.matrix, 1e-11);
    assert_eq!(spec.energies.len(), oracle.len());
    for (a, b) in spec.energies.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn resonant_gap_matches_dressed_element_at_leading_order() {
    // At the (level-shift corrected) two-photon crossing the avoided-crossing
    // gap is the dressed element |J_{-2}(A/ω)|·Δ up to higher-order terms.
    // At the bare bias ε = 2ω the shift detunes the block and widens the gap,
    // so the comparison is only meaningful at the shifted bias.
    let base = params(4.0, 2.0, 1.2);
    let eps_star = driven_tls::vanvleck::resonance_bias(&base, 2).unwrap();
    let p = params(eps_star, 2.0, 1.2);
    let (d, _) = converged_doublet(&p, 2, &TruncationConfig::for_params(&p)).unwrap();
    let dressed = driven_tls::bessel::bessel_j(-2, p.drive_ratio()).unwrap().abs();
    assert!(
        (d.omega_numeric - dressed).abs() < 0.1 * dressed,
        "gap {} vs dressed element {}",
        d.omega_numeric,
        dressed
    );
}

#[test]
fn sweep_tracks_branches_continuously() {
    let p = params(0.0, 2.0, 3.0);
    let epsilons: Vec<f64> = (0..=160).map(|k| 0.05 * k as f64).collect();
    let sweep = doublet_sweep(&p, &epsilons, None).unwrap();
    assert_eq!(sweep.len(), epsilons.len());
    for w in sweep.windows(2) {
        // Within a resonance window the followed pair moves smoothly; at a
        // window change the re-anchoring may jump to the next doublet.
        if w[0].m == w[1].m {
            assert!(
                (w[1].omega_numeric - w[0].omega_numeric).abs() < 0.2,
                "gap jump at eps = {}",
                w[1].epsilon
            );
        }
        assert!(w[1].omega_numeric >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn folding_lands_in_zone_and_is_idempotent(
        e in -50.0f64..50.0,
        omega in 0.3f64..5.0,
    ) {
        let f = fold_quasienergy(e, omega);
        prop_assert!((-omega / 2.0..omega / 2.0).contains(&f));
        prop_assert!((fold_quasienergy(f, omega) - f).abs() < 1e-12);
        // Folding is invariant under photon shifts of the input.
        let shifted = fold_quasienergy(e + 3.0 * omega, omega);
        prop_assert!((shifted - f).abs() < 1e-9 * omega.max(e.abs()));
    }

    #[test]
    fn doublet_gap_is_stable_under_ladder_widening(
        eps in 0.2f64..6.0,
        omega in 1.5f64..3.0,
        amp in 0.2f64..6.0,
    ) {
        let p = params(eps, omega, amp);
        let m = p.nearest_resonance();
        let tr = TruncationConfig::for_params(&p);
        let spec_a = diagonalize_floquet(&build_floquet_matrix(&p, &tr).unwrap()).unwrap();
        let wide = TruncationConfig { n_tr: tr.n_tr + 4, ..tr };
        let spec_b = diagonalize_floquet(&build_floquet_matrix(&p, &wide).unwrap()).unwrap();
        let da = central_doublet(&spec_a, &p, m);
        let db = central_doublet(&spec_b, &p, m);
        // Selection can legitimately report ambiguity at exact crossings;
        // everywhere else the gap must not depend on the truncation.
        if let (Ok(da), Ok(db)) = (da, db) {
            prop_assert!(
                (da.omega_numeric - db.omega_numeric).abs() < 1e-8,
                "gap moved {} -> {} when widening the ladder",
                da.omega_numeric,
                db.omega_numeric
            );
        }
    }

    #[test]
    fn doublet_states_are_normalized_and_orthogonal(
        eps in 0.2f64..6.0,
        amp in 0.5f64..5.0,
    ) {
        let p = params(eps, 2.0, amp);
        let m = p.nearest_resonance();
        let tr = TruncationConfig::for_params(&p);
        let spec = diagonalize_floquet(&build_floquet_matrix(&p, &tr).unwrap()).unwrap();
        if let Ok(d) = central_doublet(&spec, &p, m) {
            prop_assert!((d.state_minus.norm() - 1.0).abs() < 1e-10);
            prop_assert!((d.state_plus.norm() - 1.0).abs() < 1e-10);
            prop_assert!(d.state_minus.dot(&d.state_plus).abs() < 1e-10);
            prop_assert!(d.omega_numeric >= 0.0 && d.omega_numeric < p.omega);
        }
    }
}

//! Cross-module flows: spectrum files through density, growth functions and
//! certificates; radius scans against the generator's frequency sets.

use proptest::prelude::*;
use translates::bernstein::uniqueness_certificate;
use translates::density::{bm_lower_bound, diagonal_psi, growth_condition_holds, sigma_from_psi};
use translates::expfit::{radius_scan, DEFAULT_CELLS};
use translates::spectrum::{SignRule, Spectrum, Window};

#[test]
fn spectrum_json_roundtrip_preserves_density() {
    let s = Spectrum::perturbed_integers(0.1, 0.5, SignRule::Alternating, Window::Horizon(1100.0)).unwrap();
    let back = Spectrum::from_json(&s.to_json()).unwrap();
    assert_eq!(back, s);
    assert_eq!(bm_lower_bound(&s, 1024.0, 2.0, 0.01).unwrap(), bm_lower_bound(&back, 1024.0, 2.0, 0.01).unwrap());
}

#[test]
fn unknown_spectrum_keys_are_rejected() {
    assert!(Spectrum::from_json(r#"{"kind":"arithmetic","step":1,"T":10,"extra":0}"#).is_err());
    assert!(Spectrum::from_json(r#"{"kind":"arithmetic","step":1}"#).is_err());
}

#[test]
fn diagonal_family_yields_passing_certificate() {
    let s = Spectrum::power(0.5, false, Window::Horizon(1e6)).unwrap();
    let (psi, fam) = diagonal_psi(&s.positive(), &[1.0, 2.0, 4.0], 1e6).unwrap();
    let sig = sigma_from_psi(&psi, &fam).unwrap();
    assert!(!sig.warning);
    for x in [0.01, 0.5, 3.0, 40.0, 1e3, 1e5] {
        assert!(growth_condition_holds(&sig.sigma, &psi, x));
    }
    let cert = uniqueness_certificate(&s, &sig.sigma, &psi, &fam, 1.0).unwrap();
    assert!(cert.growth_condition_violation.is_none());
    assert_eq!(cert.rows.len(), fam.len());
}

#[test]
fn perturbation_keeps_radius_transition() {
    let z = Spectrum::arithmetic(1.0, Window::Count(200)).unwrap();
    let p = Spectrum::perturbed_integers(0.1, 0.5, SignRule::Plus, Window::Count(200)).unwrap();
    for s in [z, p] {
        let rows = radius_scan(&s, &[2.0, 3.8], 40.0, 1e-8, DEFAULT_CELLS).unwrap();
        assert!(rows[0].residual < 1e-3 && rows[1].residual > 0.1, "{rows:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn bound_monotone_in_horizon(step in 0.3f64..2.0) {
        let s = Spectrum::arithmetic(step, Window::Horizon(1100.0)).unwrap();
        let small = bm_lower_bound(&s, 256.0, 2.0, 0.02).unwrap();
        let large = bm_lower_bound(&s, 1024.0, 2.0, 0.02).unwrap();
        prop_assert!(large + 0.02 >= small, "{small} > {large}");
    }

    #[test]
    fn bound_nonincreasing_in_s_min(step in 0.3f64..2.0) {
        let s = Spectrum::arithmetic(step, Window::Horizon(1100.0)).unwrap();
        let loose = bm_lower_bound(&s, 1024.0, 1.0, 0.02).unwrap();
        let strict = bm_lower_bound(&s, 1024.0, 2.5, 0.02).unwrap();
        prop_assert!(strict <= loose + 0.02, "{strict} > {loose}");
    }

    #[test]
    fn bound_never_exceeds_point_density(step in 0.3f64..2.0) {
        let s = Spectrum::arithmetic(step, Window::Horizon(1100.0)).unwrap();
        prop_assert!(bm_lower_bound(&s, 1024.0, 2.0, 0.01).unwrap() <= 1.0 / step + 1e-12);
    }
}

use num_complex::Complex64;
use proptest::prelude::*;

use schwlab_core::criteria::{self, FamilySpec, Verdict};
use schwlab_core::schwarzian::{schwarzian_analytic, schwarzian_harmonic};
use schwlab_core::{norm, AnalyticMap, HarmonicMap, NormReport, SamplingSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disk_point(rmax: f64) -> impl Strategy<Value = Complex64> {
    (0.0..rmax, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn small_harmonic() -> impl Strategy<Value = HarmonicMap> {
    (disk_point(0.15), disk_point(0.05), disk_point(0.2), disk_point(0.05)).prop_map(|(a2, a3, b1, b2)| {
        HarmonicMap::new(
            AnalyticMap::polynomial(vec![ZERO, ONE, a2, a3]),
            AnalyticMap::polynomial(vec![ZERO, b1, b2]),
        )
    })
}

fn coarse() -> SamplingSpec {
    SamplingSpec { n_radii: 24, n_angles: 48, refine_rounds: 2, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_change_leaves_the_schwarzian_unchanged(f in small_harmonic(), eps in disk_point(0.9), z in disk_point(0.8)) {
        let fe = f.affine_transform(eps).unwrap();
        let a = schwarzian_harmonic(&f, z).unwrap();
        let b = schwarzian_harmonic(&fe, z).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn analytic_maps_reduce_to_the_classical_schwarzian(a2 in disk_point(0.3), z in disk_point(0.8)) {
        let h = AnalyticMap::polynomial(vec![ZERO, ONE, a2]);
        let f = HarmonicMap::analytic(h.clone());
        prop_assert_eq!(schwarzian_harmonic(&f, z).unwrap(), schwarzian_analytic(&h, z).unwrap());
    }

    #[test]
    fn family_membership_survives_koebe_and_affine_changes(f in small_harmonic(), zeta in disk_point(0.6), eps in disk_point(0.6)) {
        let family = FamilySpec { lambda: 1e9, normalized: true, zero_dilatation_at_origin: false };
        for g in [f.koebe_transform(zeta).unwrap(), f.affine_transform(eps).unwrap()] {
            let cert = criteria::family_membership(&g, &family, &coarse()).unwrap();
            prop_assert_ne!(cert.verdict, Verdict::Refuted, "{:?}", cert.details);
        }
    }

    #[test]
    fn lower_bound_never_exceeds_estimate(f in small_harmonic()) {
        let rep = norm::estimate_schwarzian_norm(&f, &coarse()).unwrap();
        prop_assert!(rep.lower_bound <= rep.estimate);
        prop_assert!(rep.history.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn norm_reports_round_trip(f in small_harmonic()) {
        let rep = norm::estimate_schwarzian_norm(&f, &coarse()).unwrap();
        let back: NormReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        prop_assert_eq!(back, rep);
    }
}

#[test]
fn precomposition_with_an_automorphism_keeps_the_norm() {
    let f = HarmonicMap::new(
        AnalyticMap::polynomial(vec![ZERO, ONE, c(0.1, -0.05), c(0.02, 0.01)]),
        AnalyticMap::polynomial(vec![ZERO, c(0.1, 0.05), c(0.0, 0.03)]),
    );
    let spec = SamplingSpec::default();
    let base = norm::estimate_schwarzian_norm(&f, &spec).unwrap().estimate;
    for (zeta, theta) in [(c(0.3, 0.2), 0.4), (c(-0.5, 0.1), 2.0), (c(0.0, -0.65), -1.0)] {
        let sigma = AnalyticMap::disk_automorphism(zeta, theta).unwrap();
        let moved = norm::estimate_schwarzian_norm(&f.precompose(&sigma), &spec).unwrap().estimate;
        assert!((moved - base).abs() <= 1e-3 * base, "{zeta}: {moved} vs {base}");
    }
}

#[test]
fn univalent_polynomial_passes_every_check_it_can() {
    // h = z + z^2/10 is univalent with a small Schwarzian; g is tiny
    let f = HarmonicMap::new(
        AnalyticMap::polynomial(vec![ZERO, ONE, c(0.1, 0.0)]),
        AnalyticMap::polynomial(vec![ZERO, ZERO, c(0.02, 0.0)]),
    );
    let spec = SamplingSpec::default();
    let nehari = criteria::nehari_check(&AnalyticMap::polynomial(vec![ZERO, ONE, c(0.1, 0.0)]), &spec).unwrap();
    assert_eq!(nehari.verdict, Verdict::Certified);
    let qc = criteria::qc_extension_check(&f, 2.0, 0.5, &spec).unwrap();
    assert_eq!(qc.verdict, Verdict::Certified, "{qc:?}");
    let inj = criteria::injectivity_sample(&f, 20_000, 7).unwrap();
    assert_eq!(inj.measured, 0.0);
}

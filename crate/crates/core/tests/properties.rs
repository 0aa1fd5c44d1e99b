use proptest::prelude::*;

use ris_secrecy::metrics::closed_form;
use ris_secrecy::{
    dist_gamma_e, pnz, secrecy_capacity, sop_lower, Geometry, MetricKind, PhaseDesign,
    SecrecyThreshold, SystemParams,
};

fn params(l: u32, gb: f64, ge: f64) -> SystemParams {
    SystemParams::new(l, Geometry::default(), gb, ge).unwrap()
}

fn design() -> impl Strategy<Value = PhaseDesign> {
    prop_oneof![
        Just(PhaseDesign::CoherentImperfect),
        (1u32..=3).prop_map(|q| PhaseDesign::DiscreteRandom { q })
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capacity_is_nonnegative_and_positive_iff_bob_wins(gb in 0.0f64..1e4, ge in 0.0f64..1e4) {
        let c = secrecy_capacity(gb, ge);
        prop_assert!(c >= 0.0);
        prop_assert_eq!(c > 0.0, gb > ge);
    }

    #[test]
    fn metrics_are_probabilities_and_ordered(
        d in design(),
        l in 2u32..=64,
        gb_db in -10.0f64..30.0,
        ge_db in -30.0f64..0.0,
        rt in 0.05f64..2.0,
    ) {
        let p = params(l, 10f64.powf(gb_db / 10.0), 10f64.powf(ge_db / 10.0));
        let thr = SecrecyThreshold::new(rt).unwrap();
        let sop = closed_form(MetricKind::Sop, d, &p, &thr, 1e-9).unwrap();
        let lower = sop_lower(d, &p, &thr).unwrap();
        let z = pnz(d, &p).unwrap();
        for v in [sop.value, lower.value, z.value] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(lower.value <= sop.value + sop.error_estimate + lower.error_estimate);
        // any outage event contains the event of zero capacity
        prop_assert!(sop.value + sop.error_estimate >= 1.0 - z.value - z.error_estimate);
    }

    #[test]
    fn sop_falls_as_bob_improves(d in design(), l in 2u32..=64, gb in 0.1f64..100.0, factor in 1.5f64..10.0) {
        let thr = SecrecyThreshold::new(0.8).unwrap();
        let a = closed_form(MetricKind::Sop, d, &params(l, gb, 0.01), &thr, 1e-9).unwrap();
        let b = closed_form(MetricKind::Sop, d, &params(l, gb * factor, 0.01), &thr, 1e-9).unwrap();
        prop_assert!(b.value <= a.value + a.error_estimate + b.error_estimate);
    }

    #[test]
    fn discrete_bound_and_pnz_ignore_l(l1 in 1u32..=512, l2 in 1u32..=512, gb in 0.1f64..1e3, ge in 1e-3f64..10.0) {
        let d = PhaseDesign::DiscreteRandom { q: 1 };
        let thr = SecrecyThreshold::new(0.8).unwrap();
        let (p1, p2) = (params(l1, gb, ge), params(l2, gb, ge));
        let a = sop_lower(d, &p1, &thr).unwrap().value;
        let b = sop_lower(d, &p2, &thr).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
        let a = pnz(d, &p1).unwrap().value;
        let b = pnz(d, &p2).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn eve_cdf_is_monotone(d in design(), l in 1u32..=32, ge in 1e-2f64..1e2, x in 1e-3f64..1e3, step in 1.01f64..4.0) {
        let e = dist_gamma_e(d, &params(l, 1.0, ge)).unwrap();
        let (a, b) = (e.cdf(x).unwrap(), e.cdf(x * step).unwrap());
        prop_assert!((0.0..=1.0).contains(&a.value) && (0.0..=1.0).contains(&b.value));
        prop_assert!(b.value >= a.value - a.abs_err - b.abs_err);
    }
}

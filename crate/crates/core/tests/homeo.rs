use proptest::prelude::*;
use rswlab_core::homeo::{check_f_properties, f, f_inverse, psi, psi2_with_base, standard_grid, HomeoParams, LogProb};

// (i, x given as p or as 1 - x, ln f_i(x)) at base 2000, from
// python/oracles/homeo_table.py (mpmath, 400 digits).
const TABLE: &[(u32, char, f64, f64)] = &[
    (1, 'p', 1e-300, -1396752.8607155115751),
    (1, 'p', 1e-30, -153356.9104987269056),
    (1, 'p', 1e-05, -38227.645853982979481),
    (1, 'p', 0.3, -17263.844120223225851),
    (1, 'p', 0.5, -15935.17732382833557),
    (1, 'p', 0.9, -13534.891210678540539),
    (1, 'q', 1e-10, -8940.071722456269039),
    (1, 'q', 1e-30, -6765.7846320575094097),
    (1, 'q', 1e-300, -2461.6316480620904567),
    (20, 'p', 1e-300, -8.8373311788973330521e+68),
    (20, 'p', 1e-30, -2.3183554194247570441e+68),
    (20, 'p', 1e-05, -1.7147465003779074777e+68),
    (20, 'p', 0.3, -1.6048348685821581235e+68),
    (20, 'p', 0.5, -1.5978679460054781034e+68),
    (20, 'p', 0.9, -1.5852793154302765048e+68),
    (20, 'q', 1e-10, -1.5611349607655632614e+68),
    (20, 'q', 1e-30, -1.5496151759735387435e+68),
    (20, 'q', 1e-300, -1.525470821308825499e+68),
];

const PSI2_HALF_LN: f64 = -3.3737293950917913539e+73;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn f_matches_arbitrary_precision_table() {
    for &(i, kind, v, expected) in TABLE {
        let x = if kind == 'p' { LogProb::from_prob(v) } else { LogProb::from_complement(v) };
        let got = f(HomeoParams::index(i), x).lp;
        assert!(rel(got, expected) < 1e-9, "f_{i}({kind}={v}): {got} vs {expected}");
    }
}

#[test]
fn psi2_at_half_matches_table() {
    let got = psi(2, LogProb::from_prob(0.5)).unwrap().lp;
    assert!(rel(got, PSI2_HALF_LN) < 1e-9, "{got}");
    assert_eq!(psi(1, LogProb::from_prob(0.5)).unwrap(), psi(2, LogProb::from_prob(0.5)).unwrap());
}

#[test]
fn endpoints_are_fixed() {
    for i in [0, 1, 5, 20] {
        assert_eq!(f(HomeoParams::index(i), LogProb::ZERO), LogProb::ZERO);
        assert_eq!(f(HomeoParams::index(i), LogProb::ONE), LogProb::ONE);
    }
    assert_eq!(psi(3, LogProb::ONE).unwrap(), LogProb::ONE);
    assert!(psi(0, LogProb::ONE).is_err());
    assert!(HomeoParams::new(1, 1).is_err());
}

#[test]
fn grid_properties_hold() {
    let report = check_f_properties(&[2, 4, 2000], 21, &standard_grid(50));
    assert!(report.passes(1e-9), "worst: {:?}", report.worst());
}

fn lp_strategy() -> impl Strategy<Value = LogProb> {
    prop_oneof![
        (-700.0f64..-1e-9).prop_map(LogProb::from_lp),
        (-700.0f64..-1e-9).prop_map(LogProb::from_lq),
    ]
}

proptest! {
    #[test]
    fn f_is_increasing(a in lp_strategy(), b in lp_strategy(), i in 1u32..6, base in 2u32..10) {
        let p = HomeoParams::new(base, i).unwrap();
        let (lo, hi) = if a.total_cmp(&b).is_le() { (a, b) } else { (b, a) };
        prop_assert!(f(p, lo).total_cmp(&f(p, hi)).is_le());
    }

    #[test]
    fn f_lies_below_identity(x in lp_strategy(), i in 1u32..6, base in 2u32..10) {
        let p = HomeoParams::new(base, i).unwrap();
        prop_assert!(f(p, x).lp <= x.lp + 1e-12 * x.lp.abs().max(1.0));
    }

    #[test]
    fn inverse_round_trips(x in (-30.0f64..-1e-3).prop_map(LogProb::from_lp), i in 1u32..3, base in 2u32..10) {
        let p = HomeoParams::new(base, i).unwrap();
        let back = f_inverse(p, f(p, x));
        prop_assert!((back.lp - x.lp).abs() < 1e-6 * x.lp.abs().max(1.0), "{} vs {}", back.lp, x.lp);
    }

    #[test]
    fn psi2_is_increasing(a in lp_strategy(), b in lp_strategy()) {
        let (lo, hi) = if a.total_cmp(&b).is_le() { (a, b) } else { (b, a) };
        prop_assert!(psi2_with_base(4, lo).total_cmp(&psi2_with_base(4, hi)).is_le());
    }
}

use rswlab_core::events::parse_event;
use rswlab_core::models::ModelSpec;
use rswlab_core::verify::{
    self, classify, mixed_diag_fkg_pair, wilson, Engine, Interval, Quantity, Record, Report, Session, Status,
};
use rswlab_core::homeo::LogProb;

fn q(s: &str) -> Quantity {
    Quantity::new(s, parse_event(s).unwrap())
}

fn bern(p: f64) -> ModelSpec {
    ModelSpec::bernoulli(p)
}

#[test]
fn deterministic_parameters_give_exact_estimates() {
    let engine = Engine::new(1).unwrap();
    let one = engine.estimate(&bern(1.0), &q("crossing:8x8"), 1000, 3).unwrap();
    assert_eq!((one.successes, one.phat, one.wilson_lo, one.wilson_hi, one.exact), (1000, 1.0, 1.0, 1.0, true));
    let zero = engine.estimate(&bern(0.0), &q("crossing:8x8"), 1000, 3).unwrap();
    assert_eq!((zero.successes, zero.phat, zero.wilson_lo, zero.wilson_hi), (0, 0.0, 0.0, 0.0));
}

#[test]
fn square_crossing_near_half_at_self_dual_point() {
    let engine = Engine::new(1).unwrap();
    let e = engine.estimate(&bern(0.5), &q("crossing:16x16"), 20_000, 7).unwrap();
    assert!((0.45..=0.55).contains(&e.phat), "{}", e.phat);
    assert!(e.wilson_lo <= e.phat && e.phat <= e.wilson_hi);
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let model = bern(0.5);
    let results: Vec<_> = [1, 4, 16]
        .iter()
        .map(|&w| {
            let engine = Engine::new(w).unwrap();
            let a = engine.estimate(&model, &q("arm:4"), 3000, 11).unwrap();
            let j = engine
                .estimate_joint(&model, &[parse_event("crossing:4x4").unwrap(), parse_event("crossing:4x2").unwrap()], 3000, 11)
                .unwrap();
            (serde_json::to_string(&a).unwrap(), j.patterns.clone())
        })
        .collect();
    assert_eq!(results[0], results[1]);
    assert_eq!(results[0], results[2]);
}

#[test]
fn different_seeds_give_different_samples() {
    let engine = Engine::new(1).unwrap();
    let a = engine.estimate(&bern(0.5), &q("crossing:8x8"), 2000, 1).unwrap();
    let b = engine.estimate(&bern(0.5), &q("crossing:8x8"), 2000, 2).unwrap();
    assert_ne!(a.successes, b.successes);
}

#[test]
fn wilson_intervals_cover_the_truth() {
    let engine = Engine::new(1).unwrap();
    let model = bern(0.5);
    let event = q("crossing:2x1");
    let truth = engine.estimate(&model, &event, 1_000_000, 999).unwrap().phat;
    let runs = 1000;
    let covered = (0..runs)
        .filter(|&s| {
            let e = engine.estimate(&model, &event, 200, s).unwrap();
            e.wilson_lo <= truth && truth <= e.wilson_hi
        })
        .count();
    assert!(covered >= 930, "coverage {covered}/{runs}");
}

#[test]
fn wilson_reference_value() {
    // statsmodels proportion_confint(5, 10, method="wilson")
    let (lo, hi) = wilson(5, 10);
    assert!((lo - 0.23659309051256394).abs() < 1e-12);
    assert!((hi - 0.7634069094874361).abs() < 1e-12);
}

#[test]
fn extreme_parameters_never_violate() {
    let engine = Engine::new(1).unwrap();
    for p in [0.0, 1.0] {
        let mut s = Session::new(&engine, bern(p), 200, 0);
        verify::lemma31(&mut s, 4).unwrap();
        verify::lemma42(&mut s, 4).unwrap();
        verify::theorem1(&mut s, 4, 2).unwrap();
        verify::reduced_star(&mut s, 4).unwrap();
        assert!(s.report.verdicts.iter().all(|v| v.status != Status::Violated), "p={p}");
    }
}

#[test]
fn diag_model_crosses_short_side_only() {
    let engine = Engine::new(1).unwrap();
    for n in [1u32, 2, 4, 8, 16] {
        let short = engine.estimate(&ModelSpec::Diag, &q(&format!("crossing:{n}x{}", 2 * n)), 10, 0).unwrap();
        let long = engine.estimate(&ModelSpec::Diag, &q(&format!("crossing:{}x{n}", 2 * n)), 10, 0).unwrap();
        assert_eq!((short.phat, long.phat), (1.0, 0.0), "n={n}");
        assert!(short.exact && long.exact);
    }
}

#[test]
fn diag_model_fails_crossing_ratio_bound() {
    let engine = Engine::new(1).unwrap();
    let mut s = Session::new(&engine, ModelSpec::Diag, 10, 0);
    verify::theorem1(&mut s, 4, 2).unwrap();
    let v = &s.report.verdicts[0];
    assert_eq!(v.status, Status::Violated);
    assert!(v.expected_failure);
    assert!(v.lhs.hi.is_zero());
    assert!(v.rhs.lo.is_one());
    assert_eq!(s.report.unexpected_failures(true), 0);
    assert_eq!(s.report.observed_expected_failures(), 1);
}

#[test]
fn mixed_diag_breaks_positive_association() {
    let engine = Engine::new(1).unwrap();
    let mut s = Session::new(&engine, ModelSpec::MixedDiag, 1000, 0);
    let (e, f) = mixed_diag_fkg_pair(3).unwrap();
    let (rec, stats) = verify::fkg_check(&mut s, "diagonal-pair", &e, &f).unwrap();
    assert!(!rec.passed && rec.expected_failure);
    assert!(stats.covariance < -0.2, "{stats:?}");
}

#[test]
fn bernoulli_fkg_pairs_pass() {
    let engine = Engine::new(1).unwrap();
    let mut s = Session::new(&engine, bern(0.5), 20_000, 5);
    for (label, e, f) in verify::fkg_pairs().unwrap() {
        let (rec, _) = verify::fkg_check(&mut s, &label, &e, &f).unwrap();
        assert!(rec.passed, "{label}: {rec:?}");
    }
}

#[test]
fn classification_follows_interval_order() {
    let iv = |lo: f64, pt: f64, hi: f64| Interval {
        lo: LogProb::from_prob(lo),
        point: LogProb::from_prob(pt),
        hi: LogProb::from_prob(hi),
    };
    assert_eq!(classify(&iv(0.1, 0.2, 0.3), &iv(0.4, 0.5, 0.6), false), Status::Violated);
    assert_eq!(classify(&iv(0.7, 0.8, 0.9), &iv(0.4, 0.5, 0.6), false), Status::HoldsWithCi);
    assert_eq!(classify(&iv(0.4, 0.55, 0.9), &iv(0.4, 0.5, 0.6), false), Status::Holds);
    assert_eq!(classify(&iv(0.4, 0.45, 0.9), &iv(0.4, 0.5, 0.6), false), Status::Unresolved);
    assert_eq!(classify(&iv(0.7, 0.8, 0.9), &iv(0.4, 0.5, 0.6), true), Status::Vacuous);
    let tiny = Interval::exact(LogProb::from_lp(-2e4));
    assert_eq!(classify(&iv(0.1, 0.2, 0.3), &tiny, false), Status::Vacuous);
}

#[test]
fn records_round_trip_and_status_is_derivable() {
    let engine = Engine::new(1).unwrap();
    let mut s = Session::new(&engine, bern(0.5), 500, 1);
    verify::lemma42(&mut s, 4).unwrap();
    let text = s.report.to_jsonl();
    let mut verdicts = 0;
    for line in text.lines() {
        match Record::from_json(line).unwrap() {
            Record::Verdict(v) => {
                assert_eq!(v.derived_status(), v.status, "{}", v.id);
                verdicts += 1;
            }
            Record::Estimate(e) => assert_eq!(e.schema, verify::ESTIMATE_SCHEMA),
            Record::Check(_) => {}
        }
    }
    assert_eq!(verdicts, s.report.verdicts.len());
    let mut back = Report::default();
    for line in text.lines() {
        match Record::from_json(line).unwrap() {
            Record::Estimate(e) => back.estimates.push(e),
            Record::Verdict(v) => back.verdicts.push(v),
            Record::Check(c) => back.checks.push(c),
        }
    }
    assert_eq!(back.to_jsonl(), text);
}

#[test]
fn session_caches_repeated_estimates() {
    let engine = Engine::new(1).unwrap();
    let mut s = Session::new(&engine, bern(0.5), 500, 1);
    let a = s.estimate(&q("arm:4")).unwrap();
    let b = s.estimate(&q("arm:4")).unwrap();
    assert_eq!(a.successes, b.successes);
    assert_eq!(s.report.estimates.len(), 1);
}

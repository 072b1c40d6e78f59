use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{self, Direction};
use crate::homeo::{f, psi, HomeoParams, LogProb};
use crate::lattice::Symmetry;
use crate::models::{FkDomain, ModelSpec};

use super::{CheckRecord, Interval, Quantity, Session, Status, VerdictRecord};

fn fi(i: u32) -> impl Fn(LogProb) -> LogProb {
    move |x| f(HomeoParams::index(i), x)
}

fn crossing(m: u32, n: u32) -> Result<Quantity> {
    let q = Quantity::new(format!("C({m},{n})"), events::crossing_spec(m, n, Direction::Horizontal, false)?).at(n);
    Ok(if m % n == 0 { q.with_rho(m / n) } else { q })
}

fn arm(n: u32) -> Result<Quantity> {
    Ok(Quantity::new(format!("a({n})"), events::arm_spec(n)?).at(n))
}

fn bridge(n: u32) -> Result<Quantity> {
    Ok(Quantity::new(format!("b({n})"), events::bridge_spec(n)?).at(n))
}

fn dual_bridge(n: u32) -> Result<Quantity> {
    Ok(Quantity::new(format!("b*({n})"), events::dual_bridge_spec(n)?).at(n))
}

fn quasi(n: u32, m: u32) -> Result<Quantity> {
    Ok(Quantity::new(format!("q({n},{m})"), events::quasi_crossing_spec(n, m)?).at(n))
}

fn expected_to_fail(model: &ModelSpec) -> bool {
    !model.is_symmetric_associated()
}

fn positive(name: &str, v: u32) -> Result<()> {
    if v == 0 {
        Err(Error::Parameter(format!("{name} must be >= 1")))
    } else {
        Ok(())
    }
}

fn power_of_four(n: u32) -> Result<()> {
    if n >= 1 && n.is_power_of_two() && n.trailing_zeros() % 2 == 0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("scale must be a power of 4, got {n}")))
    }
}

#[allow(clippy::too_many_arguments)]
fn verdict(
    s: &mut Session,
    suite: &str,
    id: &str,
    relation: String,
    scales: &[(&str, u32)],
    lhs: Interval,
    rhs: Interval,
    degenerate: bool,
) -> VerdictRecord {
    let model = s.model;
    let v = VerdictRecord::new(suite, id, relation, &model, scales, lhs, rhs, degenerate).expecting_failure(expected_to_fail(&model));
    s.record(v)
}

/// The crossing relations at scale `n`: long crossings from bridges, arms
/// from easy crossings, the gluing bound for aspect ratios 3 and 4, and
/// the intermediate square-root and reflection steps behind them.
pub fn lemma31(s: &mut Session, n: u32) -> Result<Vec<VerdictRecord>> {
    positive("n", n)?;
    let suite = "lemma31";
    let sc = [("n", n)];
    let t = events::t_alpha(n) as u32;
    let long = s.interval(&crossing(8 * n, n)?)?;
    let b = s.interval(&bridge(n)?)?;
    let bt = s.interval(&Quantity::new(format!("b~({n})"), events::bridge_variant_spec(n)?).at(n))?;
    let mut out = vec![
        verdict(s, suite, "i", format!("P[C({},{n})] >= f_1(b({n}))", 8 * n), &sc, long, b.map(fi(1)), false),
        verdict(s, suite, "long-from-variant", format!("P[C({},{n})] >= f_1(b~({n}))", 8 * n), &sc, long, bt.map(fi(1)), false),
        verdict(s, suite, "variant-contains-bridge", format!("b~({n}) >= b({n})"), &sc, bt, b, false),
    ];
    let easy = s.interval(&crossing(n, 8 * n)?)?;
    let a = s.interval(&arm(n)?)?;
    out.push(verdict(s, suite, "ii", format!("a({n}) >= f_1(P[C({n},{})])", 8 * n), &sc, a, easy.map(fi(1)), false));

    let e = s.interval(&Quantity::new(format!("E({n})"), events::left_part_to_bottom_right_spec(n)?).at(n))?;
    let square = s.interval(&crossing(n + t, n)?)?;
    let fifth_root = bt.complement().powf(1.0 / 5.0).complement();
    out.push(verdict(
        s,
        suite,
        "sqrt-trick",
        format!("max(P[E({n})], P[C({},{n})]) >= 1-(1-b~({n}))^(1/5)", n + t),
        &sc,
        e.max(&square),
        fifth_root,
        false,
    ));
    let fq = s.interval(&Quantity::new(format!("F({n})"), events::bottom_left_to_bottom_right_spec(n)?).at(n))?;
    out.push(verdict(s, suite, "reflection-gluing", format!("P[F({n})] >= P[E({n})]^2"), &sc, fq, e.powf(2.0), false));

    let double = s.interval(&crossing(2 * n, n)?)?;
    for rho in [3u32, 4] {
        let lhs = s.interval(&crossing(rho * n, n)?)?;
        let k = 2 * rho - 1;
        out.push(verdict(
            s,
            suite,
            &format!("iii.rho{rho}"),
            format!("P[C({},{n})] >= P[C({},{n})]^{k}", rho * n, 2 * n),
            &[("n", n), ("rho", rho)],
            lhs,
            double.powf(k as f64),
            false,
        ));
    }
    Ok(out)
}

/// Quasi-crossings from arms: `q(4m, m)` against the sixth power of the
/// smallest arm probability, the sharper product of the three arm scales
/// used, and both halves of the construction.
pub fn lemma42(s: &mut Session, m: u32) -> Result<Vec<VerdictRecord>> {
    positive("m", m)?;
    let suite = "lemma42";
    let sc = [("m", m)];
    let (m2, m3) = (5 * m / 2, 31 * m / 8);
    let q = s.interval(&quasi(4 * m, m)?)?;
    let am = s.interval(&arm(m)?)?;
    let a2 = s.interval(&arm(m2)?)?;
    let a3 = s.interval(&arm(m3)?)?;
    let a4 = s.interval(&arm(4 * m)?)?;
    let min = am.min(&a2).min(&a3).min(&a4);
    let construction = s.interval(&Quantity::new(format!("Q~({m})"), events::quasi_arm_construction_spec(m)?).at(m))?;
    let pair = am.powf(2.0).mul(&a2.powf(2.0));
    Ok(vec![
        verdict(
            s,
            suite,
            "min-form",
            format!("q({},{m}) >= min(a({m}),a({m2}),a({m3}),a({}))^6", 4 * m, 4 * m),
            &sc,
            q,
            min.powf(6.0),
            false,
        ),
        verdict(
            s,
            suite,
            "product-form",
            format!("q({},{m}) >= a({m})^2 a({m2})^2 a({m3})^2", 4 * m),
            &sc,
            q,
            pair.mul(&a3.powf(2.0)),
            false,
        ),
        verdict(s, suite, "arm-construction", format!("P[Q~({m})] >= a({m})^2 a({m2})^2"), &sc, construction, pair, false),
        verdict(
            s,
            suite,
            "closing-arms",
            format!("q({},{m}) >= P[Q~({m})] a({m3})^2", 4 * m),
            &sc,
            q,
            construction.mul(&a3.powf(2.0)),
            false,
        ),
    ])
}

/// `max{q(m,k), (1-(1-b(l))^2)/q(l,k)} >= 1-(1-q(m,l))^{1/2}`.
pub fn cascade(s: &mut Session, m: u32, l: u32, k: u32) -> Result<VerdictRecord> {
    positive("k", k)?;
    if !(m >= l && l >= k) {
        return Err(Error::Parameter(format!("cascade needs m >= l >= k, got ({m}, {l}, {k})")));
    }
    let qmk = s.interval(&quasi(m, k)?)?;
    let bl = s.interval(&bridge(l)?)?;
    let qlk = s.interval(&quasi(l, k)?)?;
    let qml = s.interval(&quasi(m, l)?)?;
    let ratio = bl.complement().powf(2.0).complement().ratio_capped(&qlk);
    let lhs = qmk.max(&ratio);
    let rhs = qml.complement().powf(0.5).complement();
    let settled_without_ratio = qmk.lo.total_cmp(&rhs.hi) != std::cmp::Ordering::Less;
    let degenerate = qlk.lo.is_zero() && !settled_without_ratio;
    Ok(verdict(
        s,
        "cascade",
        "cascade",
        format!("max(q({m},{k}), (1-(1-b({l}))^2)/q({l},{k})) >= 1-(1-q({m},{l}))^(1/2)"),
        &[("m", m), ("l", l), ("k", k)],
        lhs,
        rhs,
        degenerate,
    ))
}

/// `b(m) >= q(m, l) b(l)`.
pub fn closing(s: &mut Session, m: u32, l: u32) -> Result<VerdictRecord> {
    positive("l", l)?;
    if m < l {
        return Err(Error::Parameter(format!("closing needs m >= l, got ({m}, {l})")));
    }
    let bm = s.interval(&bridge(m)?)?;
    let q = s.interval(&quasi(m, l)?)?;
    let bl = s.interval(&bridge(l)?)?;
    Ok(verdict(s, "closing", "closing", format!("b({m}) >= q({m},{l}) b({l})"), &[("m", m), ("l", l)], bm, q.mul(&bl), false))
}

/// `P[C(ρn, n)] >= ψ_ρ(P[C(n, ρn)])`. For models without symmetry or
/// positive association the record is flagged as an expected failure.
pub fn theorem1(s: &mut Session, n: u32, rho: u32) -> Result<VerdictRecord> {
    positive("n", n)?;
    positive("rho", rho)?;
    let lhs = s.interval(&crossing(rho * n, n)?)?;
    let easy = s.interval(&crossing(n, rho * n)?)?;
    let rhs = easy.try_map(|x| psi(rho, x))?;
    Ok(verdict(
        s,
        "theorem1",
        &format!("rho{rho}"),
        format!("P[C({},{n})] >= psi_{rho}(P[C({n},{})])", rho * n, rho * n),
        &[("n", n), ("rho", rho)],
        lhs,
        rhs,
        false,
    ))
}

/// `b(n) >= f_20(1 - b*(n))`, plus at `n = 1` under Bernoulli the single
/// scale anchors `b(1) >= p^2` and `b*(1) >= (1-p)^3` at three standard
/// errors.
pub fn reduced_star(s: &mut Session, n: u32) -> Result<Vec<VerdictRecord>> {
    power_of_four(n)?;
    let suite = "star";
    let b = s.estimate(&bridge(n)?)?;
    let bs = s.estimate(&dual_bridge(n)?)?;
    let rhs = bs.interval().complement().map(fi(20));
    let mut out =
        vec![verdict(s, suite, "star", format!("b({n}) >= f_20(1-b*({n}))"), &[("n", n)], b.interval(), rhs, false)];
    if let (1, ModelSpec::Bernoulli { p }) = (n, s.model) {
        let p2 = Interval::exact(LogProb::from_prob(p).powf(2.0));
        let q3 = Interval::exact(LogProb::from_complement(p).powf(3.0));
        out.push(verdict(s, suite, "anchor-bridge", "b(1) >= p^2 (3 sigma)".into(), &[("n", 1)], b.sigma_interval(3.0), p2, false));
        out.push(verdict(
            s,
            suite,
            "anchor-dual-bridge",
            "b*(1) >= (1-p)^3 (3 sigma)".into(),
            &[("n", 1)],
            bs.sigma_interval(3.0),
            q3,
            false,
        ));
    }
    Ok(out)
}

/// Free-boundary FK nesting at scale `n`, with the session's model
/// supplying `p`, `q` and the chain settings: `φ_{Λ6n}[C(2n,n)] >=
/// f_21(φ_{Λ2n}[C(n,2n)])`, and domain monotonicity `φ_{Λ6n}[A] >=
/// φ_{Λ2n}[A]` for both crossings.
pub fn fk_nesting(s: &mut Session, n: u32) -> Result<Vec<VerdictRecord>> {
    positive("n", n)?;
    let ModelSpec::Fk { p, q, sweeps, thin, chain_len, start, .. } = s.model else {
        return Err(Error::Parameter("fk-nesting needs an FK model".into()));
    };
    let boxed = |half: u32| ModelSpec::Fk { p, q, domain: FkDomain::Box { half }, sweeps, thin, chain_len, start };
    let (small, large) = (boxed(2 * n), boxed(6 * n));
    small.validate()?;
    let easy = crossing(n, 2 * n)?;
    let hard = crossing(2 * n, n)?;
    let small_easy = s.estimate_under(&small, &easy)?.interval();
    let small_hard = s.estimate_under(&small, &hard)?.interval();
    let large_easy = s.estimate_under(&large, &easy)?.interval();
    let large_hard = s.estimate_under(&large, &hard)?.interval();
    let suite = "fk-nesting";
    let sc = [("n", n)];
    let rows = [
        ("nesting", format!("phi_L{}[C({},{n})] >= f_21(phi_L{}[C({n},{})])", 6 * n, 2 * n, 2 * n, 2 * n), large_hard, small_easy.map(fi(21))),
        ("monotone-easy", format!("phi_L{}[C({n},{})] >= phi_L{}[C({n},{})]", 6 * n, 2 * n, 2 * n, 2 * n), large_easy, small_easy),
        ("monotone-hard", format!("phi_L{}[C({},{n})] >= phi_L{}[C({},{n})]", 6 * n, 2 * n, 2 * n, 2 * n), large_hard, small_hard),
    ];
    Ok(rows
        .into_iter()
        .map(|(id, rel, lhs, rhs)| {
            let v = VerdictRecord::new(suite, id, rel, &s.model, &sc, lhs, rhs, false);
            s.record(v)
        })
        .collect())
}

/// One symmetry of the arm family, with the name it is reported under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmFamilyMember {
    pub label: String,
    pub sigma: Symmetry,
}

/// Eight elements of `Σ_m`: identity, quarter turn, half turn, the
/// reflection in the vertical axis, and translations by `m/2` along each
/// axis in both directions.
pub fn default_arm_family(m: u32) -> Vec<ArmFamilyMember> {
    let h = (m / 2) as i32;
    let member = |label: &str, sigma: Symmetry| ArmFamilyMember { label: label.into(), sigma };
    vec![
        member("id", Symmetry::identity()),
        member("rot90", Symmetry::rotation(1)),
        member("rot180", Symmetry::rotation(2)),
        member("reflect", Symmetry::reflection()),
        member("shift+x", Symmetry::translation(h, 0)),
        member("shift-x", Symmetry::translation(-h, 0)),
        member("shift+y", Symmetry::translation(0, h)),
        member("shift-y", Symmetry::translation(0, -h)),
    ]
}

/// Uniform arm bound: `ĉ_0` is the smallest lower confidence bound of
/// `P[σ·A(m)]` over `m = 4^j <= n` and `family(m)`; with `c_1 = c_0^6`,
/// `c_2 = c_1/2`, `c_3 = (c_1 c_2)^2`, `c_4 = c_2 c_3`, checks
/// `P[C(n + t_3β(n), n)] >= c_1 c_4`.
pub fn uniform_arm_bound(
    s: &mut Session,
    n: u32,
    family: &dyn Fn(u32) -> Vec<ArmFamilyMember>,
) -> Result<VerdictRecord> {
    power_of_four(n)?;
    let mut c0 = LogProb::ONE;
    let mut m = 1;
    while m <= n {
        let base = events::arm_spec(m)?;
        for member in family(m) {
            let q = Quantity::new(format!("{}.a({m})", member.label), base.clone().transformed(member.sigma)).at(m);
            c0 = c0.min(s.interval(&q)?.lo);
        }
        m *= 4;
    }
    let c1 = c0.powf(6.0);
    let c2 = c1.mul(&LogProb::from_prob(0.5));
    let c3 = c1.mul(&c2).powf(2.0);
    let c4 = c2.mul(&c3);
    let c_prime = c1.mul(&c4);
    let w = n + events::t_3beta(n) as u32;
    let lhs = s.interval(&crossing(w, n)?)?;
    Ok(verdict(
        s,
        "uniform-arm",
        "uniform-arm",
        format!("P[C({w},{n})] >= c1 c4 with c0 = {c0}"),
        &[("n", n)],
        lhs,
        Interval::exact(c_prime),
        c0.is_zero(),
    ))
}

/// One scale of the renormalization trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub m: u32,
    pub b: Interval,
    pub b_star: Interval,
    /// `b(m)` against `f_18(1 - b*(m))`.
    pub stronger_relation: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub n: u32,
    /// Largest `m = 4^j <= n` whose point estimates satisfy the stronger
    /// relation.
    pub m0: u32,
    /// Scales where the stronger relation is within confidence width of
    /// equality.
    pub ambiguous: Vec<u32>,
    pub rows: Vec<TraceRow>,
    pub verdicts: Vec<VerdictRecord>,
}

/// Picks `m̂_0` from estimates and evaluates, for `m_k = 4^k m̂_0 <= n`,
/// `q(m_k, m_0) >= f_4(1 - b*(m_k))`, `q(m_k, m_{k-1}) >= f_2(1 -
/// b*(m_k))` and `a(l) >= f_1(P[C(m_k, 2m_k)])` for `l ∈ {m_{k-1}, m_k}`.
pub fn renormalization_trace(s: &mut Session, n: u32) -> Result<TraceSummary> {
    power_of_four(n)?;
    let mut rows = Vec::new();
    let mut m = 1;
    while m <= n {
        let b = s.interval(&bridge(m)?)?;
        let b_star = s.interval(&dual_bridge(m)?)?;
        let stronger_relation = super::classify(&b, &b_star.complement().map(fi(18)), false);
        rows.push(TraceRow { m, b, b_star, stronger_relation });
        m *= 4;
    }
    let point_holds = |r: &TraceRow| {
        let rhs = fi(18)(r.b_star.point.complement());
        r.b.point.total_cmp(&rhs) != std::cmp::Ordering::Less
    };
    let m0 = rows.iter().filter(|r| point_holds(r)).map(|r| r.m).max().unwrap_or(1);
    let ambiguous: Vec<u32> =
        rows.iter().filter(|r| matches!(r.stronger_relation, Status::Holds | Status::Unresolved)).map(|r| r.m).collect();
    let mut verdicts = Vec::new();
    let suite = "trace";
    let mut prev = m0;
    let mut mk = m0 * 4;
    while mk <= n {
        let bs = s.interval(&dual_bridge(mk)?)?.complement();
        let q0 = s.interval(&quasi(mk, m0)?)?;
        verdicts.push(verdict(
            s,
            suite,
            "induction",
            format!("q({mk},{m0}) >= f_4(1-b*({mk}))"),
            &[("m_k", mk), ("m_0", m0)],
            q0,
            bs.map(fi(4)),
            false,
        ));
        let qstep = s.interval(&quasi(mk, prev)?)?;
        verdicts.push(verdict(
            s,
            suite,
            "step",
            format!("q({mk},{prev}) >= f_2(1-b*({mk}))"),
            &[("m_k", mk), ("m_k-1", prev)],
            qstep,
            bs.map(fi(2)),
            false,
        ));
        let c = s.interval(&crossing(mk, 2 * mk)?)?.map(fi(1));
        for l in [prev, mk] {
            let a = s.interval(&arm(l)?)?;
            verdicts.push(verdict(
                s,
                suite,
                "arm-from-crossing",
                format!("a({l}) >= f_1(P[C({mk},{})])", 2 * mk),
                &[("l", l), ("m_k", mk)],
                a,
                c,
                false,
            ));
        }
        prev = mk;
        mk *= 4;
    }
    let detail = format!("m0={m0} ambiguous={ambiguous:?}");
    let model = s.model;
    s.check(CheckRecord::new(suite, "m0", Some(&model), true, rows.len() as u64, 0, m0 as f64, detail));
    Ok(TraceSummary { n, m0, ambiguous, rows, verdicts })
}

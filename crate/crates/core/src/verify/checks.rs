use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{self, BoundarySegment, Direction, EventSpec};
use crate::homeo::{check_f_properties, standard_grid};
use crate::lattice::{Config, Domain, Rect};
use crate::models::{sample_bernoulli, FkDomain, FkStart, ModelSpec};
use crate::planar::{self, CorridorFrame, DualityChecker, Orientation};
use crate::rng;

use super::{CheckRecord, Estimate, Quantity, Session};

/// Covariance test of two increasing events on shared samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgStats {
    pub p_e: f64,
    pub p_f: f64,
    pub p_ef: f64,
    /// `P̂[E∩F] - P̂[E] P̂[F]`.
    pub covariance: f64,
    /// Delta-method standard error of the covariance.
    pub se: f64,
    /// `covariance / se`; infinite when `se = 0`.
    pub z: f64,
}

/// Overlapping increasing event pairs whose supports fit in `Λ_8`.
pub fn fkg_pairs() -> Result<Vec<(String, EventSpec, EventSpec)>> {
    let h = |m, n| events::crossing_spec(m, n, Direction::Horizontal, false);
    let v = |m, n| events::crossing_spec(m, n, Direction::Vertical, false);
    Ok(vec![
        ("C(4,2)&vertical R(2,4)".into(), h(4, 2)?, v(2, 4)?),
        ("C(4,4)&shifted C(4,4)".into(), h(4, 4)?, h(4, 4)?.translated(2, 2)),
        ("a(4)&C(4,4)".into(), events::arm_spec(4)?, h(4, 4)?),
    ])
}

/// Left box `[-2k-1, -1] x [-k, k]` crossed from its bottom-left to its
/// top-right corner, and the mirror pair in the right box. Under
/// `ω_diag` only the first occurs, under its reflection only the second.
pub fn mixed_diag_fkg_pair(k: u32) -> Result<(EventSpec, EventSpec)> {
    let k = k as i32;
    let corner = |x: i32, y: i32| BoundarySegment::new(vec![(x, y)]);
    let left = Rect::new(-(k + 1), 0, k, k);
    let right = Rect::new(k + 1, 0, k, k);
    Ok((
        EventSpec::connect(left, corner(-2 * k - 1, -k), corner(-1, k), false)?,
        EventSpec::connect(right, corner(2 * k + 1, -k), corner(1, k), false)?,
    ))
}

/// One-sided positive-association test `P̂[E∩F] >= P̂[E] P̂[F] - 3 σ̂`.
pub fn fkg_check(s: &mut Session, label: &str, e: &EventSpec, f: &EventSpec) -> Result<(CheckRecord, FkgStats)> {
    let joint = s.engine.estimate_joint(&s.model, &[e.clone(), f.clone()], s.replicates, s.seed)?;
    let n = joint.replicates as f64;
    let cell = |pat: usize| joint.patterns[pat] as f64 / n;
    let (p_e, p_f, p_ef) = (joint.marginal(0) as f64 / n, joint.marginal(1) as f64 / n, cell(3));
    let covariance = p_ef - p_e * p_f;
    let var: f64 = (0..4)
        .map(|pat| {
            let (ie, i_f) = ((pat & 1) as f64, (pat >> 1 & 1) as f64);
            let psi = (ie - p_e) * (i_f - p_f) - covariance;
            cell(pat) * psi * psi
        })
        .sum::<f64>()
        / n;
    let se = var.sqrt();
    let z = if se > 0.0 {
        covariance / se
    } else if covariance < 0.0 {
        f64::NEG_INFINITY
    } else if covariance > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let passed = covariance >= -3.0 * se;
    let stats = FkgStats { p_e, p_f, p_ef, covariance, se, z };
    let mut rec = CheckRecord::new(
        "fkg",
        label,
        Some(&s.model),
        passed,
        joint.replicates,
        !passed as u64,
        z,
        format!("P[E&F]={p_ef:.6} P[E]P[F]={:.6} se={se:.3e}", p_e * p_f),
    );
    rec.expected_failure = matches!(s.model, ModelSpec::MixedDiag);
    Ok((s.check(rec), stats))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtTrickStats {
    pub k: u32,
    pub max_single: f64,
    pub union: f64,
    pub bound: f64,
    pub sigma: f64,
}

/// `max_i P̂[E_i] >= 1 - (1 - P̂[∪ E_i])^{1/k} - 3σ̂` for `k` vertical
/// translates of `C(8, 4)` spaced two rows apart, estimated jointly.
pub fn sqrt_trick_check(s: &mut Session, k: u32) -> Result<(CheckRecord, SqrtTrickStats)> {
    if k == 0 || k > 16 {
        return Err(Error::Parameter("sqrt trick takes 1 to 16 events".into()));
    }
    let base = events::horizontal_crossing(8, 4);
    let offset = k as i32 - 1;
    let evs: Vec<EventSpec> = (0..k as i32).map(|i| base.clone().translated(0, 2 * i - offset)).collect();
    let joint = s.engine.estimate_joint(&s.model, &evs, s.replicates, s.seed)?;
    let n = joint.replicates as f64;
    let max_single = (0..k as usize).map(|i| joint.marginal(i)).max().unwrap_or(0) as f64 / n;
    let union = joint.any() as f64 / n;
    let kf = k as f64;
    let bound = 1.0 - (1.0 - union).powf(1.0 / kf);
    let sd_union = (union * (1.0 - union) / n).sqrt();
    let slope = if sd_union > 0.0 { (1.0 - union).powf(1.0 / kf - 1.0) / kf } else { 0.0 };
    let sigma = ((max_single * (1.0 - max_single) / n) + (slope * sd_union).powi(2)).sqrt();
    let passed = max_single >= bound - 3.0 * sigma;
    let z = if sigma > 0.0 { (max_single - bound) / sigma } else { 0.0 };
    let rec = CheckRecord::new(
        "sqrt-trick",
        &format!("k{k}"),
        Some(&s.model),
        passed,
        joint.replicates,
        !passed as u64,
        z,
        format!("max={max_single:.6} union={union:.6} bound={bound:.6} sigma={sigma:.3e}"),
    );
    Ok((s.check(rec), SqrtTrickStats { k, max_single, union, bound, sigma }))
}

/// Two-sample z statistic of two binomial proportions, pooled variance.
pub fn z_score(a: &Estimate, b: &Estimate) -> f64 {
    let (n1, n2) = (a.replicates as f64, b.replicates as f64);
    let pooled = (a.successes + b.successes) as f64 / (n1 + n2);
    let var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
    if var == 0.0 {
        0.0
    } else {
        (a.phat - b.phat) / var.sqrt()
    }
}

/// Compares FK at `q = 1` on a torus of side `side` (single-sweep
/// thinning, so records are independent) against Bernoulli(p) on each
/// quantity; passes when `|z| < 4`.
pub fn fk_bernoulli_comparison(s: &mut Session, p: f64, side: u32, quantities: &[Quantity]) -> Result<Vec<CheckRecord>> {
    let fk = ModelSpec::Fk { p, q: 1.0, domain: FkDomain::Torus { side }, sweeps: 1, thin: 1, chain_len: 1000, start: FkStart::Closed };
    let bern = ModelSpec::Bernoulli { p };
    let mut out = Vec::new();
    for q in quantities {
        let a = s.estimate_under(&fk, q)?;
        let b = s.estimate_under(&bern, q)?;
        let z = z_score(&a, &b);
        let rec = CheckRecord::new(
            "fk-q1",
            &q.label,
            Some(&fk),
            z.abs() < 4.0,
            a.replicates,
            (z.abs() >= 4.0) as u64,
            z,
            format!("fk={:.6} bernoulli={:.6}", a.phat, b.phat),
        );
        out.push(s.check(rec));
    }
    Ok(out)
}

/// Primal crossing of `R(m, n)` in one direction against dual crossing in
/// the other: over all configurations when `samples` is `None`, otherwise
/// on that many Bernoulli(1/2) samples.
pub fn duality_suite(m: u32, n: u32, samples: Option<u64>, seed: u64) -> Result<CheckRecord> {
    let domain = Domain::Rect(Rect::centered(m as i32, n as i32));
    let edges = domain.edge_count();
    let mut checker = DualityChecker::new(m, n, domain)?;
    let (mut total, mut failures) = (0u64, 0u64);
    match samples {
        None => {
            if edges > 30 {
                return Err(Error::Parameter(format!("R({m},{n}) has {edges} edges, too many to enumerate")));
            }
            for bits in 0u64..(1 << edges) {
                let cfg = Config::from_words(domain, vec![bits])?;
                total += 1;
                failures += !checker.check(&cfg)? as u64;
            }
        }
        Some(count) => {
            for i in 0..count {
                let cfg = sample_bernoulli(domain, 0.5, rng::derive_seed(seed, &[i]))?;
                total += 1;
                failures += !checker.check(&cfg)? as u64;
            }
        }
    }
    let kind = if samples.is_none() { "exhaustive" } else { "sampled" };
    Ok(CheckRecord::new(
        "duality",
        &format!("{kind}.{m}x{n}"),
        None,
        failures == 0,
        total,
        failures,
        (total - failures) as f64 / total.max(1) as f64,
        format!("{}/{} pass", total - failures, total),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorOptions {
    pub exhaustive: bool,
    pub triples: u64,
    pub m: u32,
    pub p_walls: f64,
    pub p_path: f64,
    pub seed: u64,
}

impl Default for CorridorOptions {
    fn default() -> Self {
        Self { exhaustive: true, triples: 100_000, m: 2, p_walls: 0.6, p_path: 0.5, seed: 0 }
    }
}

/// Corridor property: every crossing path of the frame contains an
/// `m`-path or meets one of the walls. Exhaustive at `S = R(2,1)`,
/// `m = 1`, and sampled at `S = R(3m, 2m)` and its transpose.
pub fn corridor_suite(opts: &CorridorOptions) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let record = |id: &str, sweep: &planar::CorridorSweep| {
        let failures = sweep.violations.len() as u64;
        CheckRecord::new(
            "corridor",
            id,
            None,
            failures == 0,
            sweep.triples,
            failures,
            failures as f64,
            format!("{} contain an m-path, {} hit a wall", sweep.contains_mpath, sweep.hits_structure),
        )
    };
    if opts.exhaustive {
        let frame = CorridorFrame::new(Rect::centered(2, 1), 1, Orientation::Standard)?;
        out.push(record("exhaustive.R(2,1).m1", &planar::corridor_exhaustive(&frame)?));
    }
    if opts.triples > 0 {
        let m = opts.m as i32;
        for (rect, orientation, name) in [
            (Rect::centered(3 * m, 2 * m), Orientation::Standard, "standard"),
            (Rect::centered(2 * m, 3 * m), Orientation::Swapped, "swapped"),
        ] {
            let frame = CorridorFrame::new(rect, opts.m, orientation)?;
            let sweep = planar::corridor_sampled(&frame, opts.triples, opts.p_walls, opts.p_path, opts.seed)?;
            out.push(record(&format!("sampled.{name}.R({},{}).m{}", rect.hx, rect.hy, opts.m), &sweep));
        }
    }
    Ok(out)
}

/// Algebraic properties of the homeomorphism family on the standard grid;
/// one record per property, passing when its smallest margin is at least
/// `-1e-9`.
pub fn homeo_suite(bases: &[u32], max_index: u32, points: usize) -> Vec<CheckRecord> {
    let report = check_f_properties(bases, max_index, &standard_grid(points));
    let mut out = Vec::new();
    for (property, margin) in report.min_by_property() {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.property == property).collect();
        let failures = rows.iter().filter(|r| r.margin < -1e-9).count() as u64;
        out.push(CheckRecord::new(
            "homeo",
            &property,
            None,
            failures == 0,
            rows.len() as u64,
            failures,
            margin,
            format!("min margin {margin:.3e} over bases {bases:?}, indices <= {max_index}"),
        ));
    }
    out
}

//! The homeomorphisms `f_i(x) = (1 - (1 - x)^{1/a^i})^{a^i}` of `[0, 1]`,
//! the crossing-ratio homeomorphisms `ψ_ρ` built from them, and grid checks
//! of their algebraic properties, all in [`LogProb`] arithmetic.

mod logprob;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use logprob::{log1mexp, lp_margin, LogProb};
pub(crate) use logprob::{de_f64, ser_f64};
use logprob::{from_neg_log, ln_neg_lq};

use crate::error::{Error, Result};

/// Base used throughout the crossing-probability bounds.
pub const DEFAULT_BASE: u32 = 2000;

/// Selects `f_i` with exponent `a^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomeoParams {
    pub a: u32,
    pub i: u32,
}

impl HomeoParams {
    pub fn new(a: u32, i: u32) -> Result<Self> {
        if a < 2 {
            return Err(Error::Parameter(format!("homeomorphism base must be >= 2, got {a}")));
        }
        Ok(Self { a, i })
    }

    /// `f_i` with the default base 2000.
    pub const fn index(i: u32) -> Self {
        Self { a: DEFAULT_BASE, i }
    }

    /// `ln(a^i)`.
    pub fn ln_exponent(&self) -> f64 {
        self.i as f64 * (self.a as f64).ln()
    }
}

/// `f_i(x)`.
///
/// With `A = a^i` and `u = ln(1-x)/A`, `ln f = A ln(-expm1(u))`. The factor
/// `ln(-expm1(u))` is split as `ln(-u) + ln(expm1(u)/u)` so that `u` as
/// small as `1e-70` keeps full relative precision. When `f` is close to 1
/// the complement is tracked through `ln(-ln f)` instead.
pub fn f(params: HomeoParams, x: LogProb) -> LogProb {
    if params.i == 0 || x.is_zero() || x.is_one() {
        return x;
    }
    let ln_a = params.ln_exponent();
    let t = ln_neg_lq(x.lp, x.lq) - ln_a;
    let z = -t.exp();
    if z > -0.5 {
        let corr = if z > -1e-5 { z / 2.0 + z * z / 24.0 } else { (z.exp_m1() / z).ln() };
        LogProb::from_lp(ln_a.exp() * (t + corr))
    } else {
        // ln(-ln(1 - e^z))
        let w = if z < -40.0 { z + 0.5 * z.exp() } else { (-(-z.exp()).ln_1p()).ln() };
        from_neg_log(ln_a + w)
    }
}

/// `f_i^{-1}(y) = 1 - f_i(1 - y)`, which is the statement that
/// `(1 - f_i) ∘ (1 - f_i)` is the identity.
pub fn f_inverse(params: HomeoParams, y: LogProb) -> LogProb {
    f(params, y.complement()).complement()
}

/// `ψ_2(x) = f_1 ∘ f_20 (1 - f_1^{-1}(1 - x))` for base `a`.
pub fn psi2_with_base(a: u32, x: LogProb) -> LogProb {
    let f1 = HomeoParams { a, i: 1 };
    let f20 = HomeoParams { a, i: 20 };
    let inner = f_inverse(f1, x.complement()).complement();
    f(f1, f(f20, inner))
}

/// `ψ_ρ` for base `a`: `ψ_1 = ψ_2`, and for `ρ >= 3`
/// `ψ_ρ(x) = ψ_2(1 - (1 - x)^{1/(2ρ-1)})^{2ρ-1}`.
pub fn psi_with_base(a: u32, rho: u32, x: LogProb) -> Result<LogProb> {
    match rho {
        0 => Err(Error::Parameter("ρ must be >= 1".into())),
        1 | 2 => Ok(psi2_with_base(a, x)),
        _ => {
            let k = (2 * rho - 1) as f64;
            let y = x.complement().powf(1.0 / k).complement();
            Ok(psi2_with_base(a, y).powf(k))
        }
    }
}

/// `ψ_ρ` with base 2000.
pub fn psi(rho: u32, x: LogProb) -> Result<LogProb> {
    psi_with_base(DEFAULT_BASE, rho, x)
}

/// `points` grid values: half log-spaced from `1e-300` up to (excluding)
/// `1/2`, half the mirror images `1 - x`.
pub fn standard_grid(points: usize) -> Vec<LogProb> {
    let low = points.div_ceil(2);
    let (lo, hi) = ((1e-300f64).ln(), (0.5f64).ln());
    let mut grid: Vec<LogProb> = (0..low)
        .map(|k| {
            let t = k as f64 / low as f64;
            LogProb::from_lp(lo + t * (hi - lo))
        })
        .collect();
    let mirrored: Vec<LogProb> = grid.iter().rev().map(|x| x.complement()).take(points - low).collect();
    grid.extend(mirrored);
    grid
}

/// One evaluated property instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyRow {
    pub property: String,
    pub a: u32,
    pub i: u32,
    pub x: LogProb,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub margin: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PropertyReport {
    pub rows: Vec<PropertyRow>,
}

impl PropertyReport {
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn min_by_property(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            let e = out.entry(r.property.clone()).or_insert(f64::INFINITY);
            *e = f64::min(*e, r.margin);
        }
        out
    }

    pub fn worst(&self) -> Option<&PropertyRow> {
        self.rows.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.margin >= -tol)
    }
}

pub const PROP_INCREASING: &str = "increasing_in_x";
pub const PROP_INDEX_ORDER: &str = "decreasing_in_index";
pub const PROP_SQRT_STEP: &str = "sqrt_step";
pub const PROP_SELF_COMPOSITION: &str = "self_composition";
pub const PROP_INVOLUTION: &str = "complement_involution";
pub const PROP_QUOTIENT: &str = "quotient_bound";
pub const PROP_COMPOSITION: &str = "general_composition";

/// Evaluates, for each base and every index up to `max_index`, on every
/// grid point:
///
/// * `f_i` increasing in `x` and `f_i >= f_{i+1}`;
/// * `f_i >= sqrt(f_{i+1})`;
/// * `f_i ∘ f_i >= f_{2i}`;
/// * `(1 - f_i) ∘ (1 - f_i) = id` (margin is minus the relative error in
///   the log of `min(x, 1 - x)`);
/// * `(1 - (1 - f_1^{-1} ∘ f_18(1-x))^2) / f_4(1 - f_1^{-1}(x)) <= f_8(1-x)`;
/// * `f_i ∘ f_j >= f_{i+j}` for `i + j <= max_index`, which nothing else
///   relies on.
///
/// Margins are [`lp_margin`]s, positive when the inequality holds.
pub fn check_f_properties(bases: &[u32], max_index: u32, grid: &[LogProb]) -> PropertyReport {
    let mut rows = Vec::new();
    let mut push = |property: &str, a: u32, i: u32, x: LogProb, margin: f64| {
        rows.push(PropertyRow { property: property.to_string(), a, i, x, margin });
    };
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    for &a in bases {
        let p = |i: u32| HomeoParams { a, i };
        for i in 0..=max_index {
            for w in sorted.windows(2) {
                let (lo, hi) = (f(p(i), w[0]), f(p(i), w[1]));
                let margin = if hi.total_cmp(&lo).is_ge() { 0.0f64.max(lp_margin(hi.lp, lo.lp)) } else { -1.0 };
                push(PROP_INCREASING, a, i, w[1], margin);
            }
            for &x in grid {
                let fi = f(p(i), x);
                let fnext = f(p(i + 1), x);
                if i < max_index {
                    push(PROP_INDEX_ORDER, a, i, x, lp_margin(fi.lp, fnext.lp));
                    push(PROP_SQRT_STEP, a, i, x, lp_margin(fi.lp, fnext.powf(0.5).lp));
                }
                let twice = f(p(i), fi);
                push(PROP_SELF_COMPOSITION, a, i, x, lp_margin(twice.lp, f(p(2 * i), x).lp));
                let g = |y: LogProb| f(p(i), y).complement();
                let back = g(g(x));
                push(PROP_INVOLUTION, a, i, x, -carrier_error(back, x));
                for j in 1..=max_index.saturating_sub(i) {
                    let lhs = f(p(i), f(p(j), x));
                    push(PROP_COMPOSITION, a, i * 100 + j, x, lp_margin(lhs.lp, f(p(i + j), x).lp));
                }
            }
        }
        for &x in grid {
            let (ln_lhs, rhs) = quotient_bound_sides(a, x);
            push(PROP_QUOTIENT, a, 0, x, lp_margin(rhs.lp, ln_lhs));
        }
    }
    PropertyReport { rows }
}

/// Relative error between `y` and `x` in the log of the smaller of
/// `x`, `1 - x`, which is the quantity a [`LogProb`] resolves.
fn carrier_error(y: LogProb, x: LogProb) -> f64 {
    if x.lp <= x.lq {
        lp_margin(y.lp, x.lp).abs()
    } else {
        lp_margin(y.lq, x.lq).abs()
    }
}

/// Both sides of the quotient bound at `x`: the log of the left-hand
/// quotient and `f_8(1 - x)`.
pub fn quotient_bound_sides(a: u32, x: LogProb) -> (f64, LogProb) {
    let p = |i: u32| HomeoParams { a, i };
    let y = f_inverse(p(1), f(p(18), x.complement()));
    // 1 - (1 - y)^2
    let numerator = y.complement().powf(2.0).complement();
    let denominator = f(p(4), f_inverse(p(1), x).complement());
    (numerator.ln_ratio(&denominator), f(p(8), x.complement()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_identity() {
        for i in 0..22 {
            let p = HomeoParams::index(i);
            assert!(f(p, LogProb::ZERO).is_zero());
            assert!(f(p, LogProb::ONE).is_one());
            assert!(f_inverse(p, LogProb::ZERO).is_zero());
            assert!(f_inverse(p, LogProb::ONE).is_one());
        }
        for x in [0.3, 0.7] {
            let v = LogProb::from_prob(x);
            assert_eq!(f(HomeoParams::index(0), v), v);
            assert_eq!(f_inverse(HomeoParams::index(0), v), v);
        }
        assert!(HomeoParams::new(1, 3).is_err());
    }

    #[test]
    fn matches_direct_formula_for_small_exponents() {
        for a in [2u32, 4] {
            for i in 1..4 {
                let big_a = (a as f64).powi(i as i32);
                for x in [0.05, 0.3, 0.5, 0.8, 0.97] {
                    let direct = (1.0 - (1.0f64 - x).powf(1.0 / big_a)).powf(big_a);
                    let got = f(HomeoParams { a, i }, LogProb::from_prob(x)).prob();
                    assert!((got - direct).abs() <= 1e-9 * direct.max(1e-300), "a={a} i={i} x={x} {got} {direct}");
                }
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for i in [1, 5, 20] {
            let p = HomeoParams::index(i);
            for x in [LogProb::from_prob(1e-30), LogProb::from_prob(0.5), LogProb::from_complement(1e-30)] {
                let back = f_inverse(p, f(p, x));
                assert!(lp_margin(back.lp, x.lp).abs() < 1e-9, "i={i} x={x:?} back={back:?}");
                let fwd = f(p, f_inverse(p, x));
                assert!(lp_margin(fwd.lp, x.lp).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn psi_fixes_endpoints_and_weakens() {
        for rho in 1..6 {
            assert!(psi(rho, LogProb::ZERO).unwrap().is_zero());
            assert!(psi(rho, LogProb::ONE).unwrap().is_one());
        }
        assert!(psi(0, LogProb::ONE).is_err());
        for x in standard_grid(40).into_iter().take(20) {
            let y = psi(2, x).unwrap();
            assert!(y.total_cmp(&x).is_le());
        }
    }

    #[test]
    fn psi2_simplifies_to_f1_f20_f1() {
        // 1 - f_1^{-1}(1 - x) = f_1(x)
        for x in standard_grid(20) {
            let a = psi(2, x).unwrap();
            let b = f(HomeoParams::index(1), f(HomeoParams::index(20), f(HomeoParams::index(1), x)));
            assert!(lp_margin(a.lp, b.lp).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_shape() {
        let g = standard_grid(50);
        assert_eq!(g.len(), 50);
        assert!((g[0].lp - (1e-300f64).ln()).abs() < 1e-9);
        assert!((g[49].lq - (1e-300f64).ln()).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0].total_cmp(&w[1]).is_lt()));
    }

    #[test]
    fn small_base_properties_hold() {
        let report = check_f_properties(&[2], 6, &standard_grid(50));
        let worst = report.worst().unwrap();
        assert!(report.passes(1e-9), "{worst:?}");
    }
}

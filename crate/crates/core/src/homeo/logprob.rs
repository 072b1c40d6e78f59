use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `ln(1 - e^x)` for `x <= 0`, accurate across the whole range.
pub fn log1mexp(x: f64) -> f64 {
    if x >= 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(-ln(1 - p))` given `lp = ln p` and `lq = ln(1 - p)`.
///
/// For tiny `p`, `-ln(1 - p) = p (1 + p/2 + ...)`, so the answer is `lp`
/// plus a correction; otherwise it is read off `lq` directly.
pub(crate) fn ln_neg_lq(lp: f64, lq: f64) -> f64 {
    if lp < -20.0 {
        lp + 0.5 * lp.exp()
    } else {
        (-lq).ln()
    }
}

/// A probability carried as the pair `(ln p, ln(1 - p))`.
///
/// Keeping both logs lets values astronomically close to 0 *or* to 1 be
/// represented and complemented without loss. When one of the two is below
/// about -745 the other rounds to 0; the small one is then the exact
/// carrier of information.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogProb {
    pub lp: f64,
    pub lq: f64,
}

impl LogProb {
    pub const ZERO: LogProb = LogProb { lp: f64::NEG_INFINITY, lq: 0.0 };
    pub const ONE: LogProb = LogProb { lp: 0.0, lq: f64::NEG_INFINITY };

    pub fn from_prob(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self { lp: p.ln(), lq: (-p).ln_1p() }
    }

    /// The probability `1 - q`, given `q`.
    pub fn from_complement(q: f64) -> Self {
        Self::from_prob(q).complement()
    }

    pub fn from_lp(lp: f64) -> Self {
        let lp = lp.min(0.0);
        Self { lp, lq: log1mexp(lp) }
    }

    pub fn from_lq(lq: f64) -> Self {
        Self::from_lp(lq).complement()
    }

    pub fn prob(&self) -> f64 {
        if self.lp > self.lq {
            -self.lq.exp_m1()
        } else {
            self.lp.exp()
        }
    }

    pub fn complement(&self) -> Self {
        Self { lp: self.lq, lq: self.lp }
    }

    pub fn is_zero(&self) -> bool {
        self.lp == f64::NEG_INFINITY
    }

    pub fn is_one(&self) -> bool {
        self.lq == f64::NEG_INFINITY
    }

    /// `p^k` for real `k > 0`.
    pub fn powf(&self, k: f64) -> Self {
        if self.is_one() {
            return Self::ONE;
        }
        if self.lp > -1e-3 {
            // near 1: 1 - p^k ~ k (1 - p), track through ln(-ln p)
            let lam = ln_neg_lq(self.lq, self.lp) + k.ln();
            return from_neg_log(lam);
        }
        Self::from_lp(k * self.lp)
    }

    pub fn mul(&self, other: &LogProb) -> Self {
        let lp = self.lp + other.lp;
        if lp > -1e-3 {
            let lam = add_ln(ln_neg_lq(self.lq, self.lp), ln_neg_lq(other.lq, other.lp));
            return from_neg_log(lam);
        }
        Self::from_lp(lp)
    }

    /// `p / other` as a log ratio (may be positive).
    pub fn ln_ratio(&self, other: &LogProb) -> f64 {
        self.lp - other.lp
    }

    fn order_key(&self) -> (u8, f64) {
        if self.lp <= self.lq {
            (0, self.lp)
        } else {
            (1, -self.lq)
        }
    }

    /// Total order of the underlying probabilities; stays exact in both
    /// tails.
    pub fn total_cmp(&self, other: &LogProb) -> Ordering {
        let (a, b) = (self.order_key(), other.order_key());
        a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
    }

    pub fn max(self, other: LogProb) -> LogProb {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: LogProb) -> LogProb {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

/// `ln(e^a + e^b)`.
fn add_ln(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// The probability `e^{-e^lam}`, i.e. the one with `ln(-ln p) = lam`.
pub(crate) fn from_neg_log(lam: f64) -> LogProb {
    let lp = -lam.exp();
    let lq = if lam < -20.0 { lam - 0.5 * lam.exp() } else { log1mexp(lp) };
    LogProb { lp, lq }
}

/// Relative margin of `lhs >= rhs` in `ln p`: positive when it holds,
/// `(lhs - rhs) / max(|lhs|, |rhs|)`. Relative, because `ln p` of the
/// quantities involved spans from `-1e-300` to `-1e70`; near 1 it measures
/// the relative gap of the complements.
pub fn lp_margin(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    if rhs == f64::NEG_INFINITY {
        return 1.0;
    }
    if lhs == f64::NEG_INFINITY {
        return -1.0;
    }
    (lhs - rhs) / lhs.abs().max(rhs.abs())
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lp >= -700.0 && self.lq >= -700.0 {
            write!(f, "{:.6e}", self.prob())
        } else if self.lp < self.lq {
            write!(f, "exp({:.6e})", self.lp)
        } else {
            write!(f, "1-exp({:.6e})", self.lq)
        }
    }
}

pub(crate) fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn de_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }
    match Num::deserialize(d)? {
        Num::F(x) => Ok(x),
        Num::S(s) => match s.as_str() {
            "-inf" => Ok(f64::NEG_INFINITY),
            "inf" => Ok(f64::INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(serde::de::Error::custom(format!("bad float {s:?}"))),
        },
    }
}

#[derive(Serialize, Deserialize)]
struct LogProbRepr {
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    lp: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    lq: f64,
}

impl Serialize for LogProb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LogProbRepr { lp: self.lp, lq: self.lq }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogProb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LogProbRepr::deserialize(d)?;
        Ok(LogProb { lp: r.lp, lq: r.lq })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_complement() {
        assert!(LogProb::from_prob(0.0).is_zero());
        assert!(LogProb::from_prob(1.0).is_one());
        let x = LogProb::from_prob(0.3);
        assert!((x.complement().prob() - 0.7).abs() < 1e-15);
        assert!((LogProb::from_complement(1e-30).lq - (1e-30f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn order_is_exact_in_both_tails() {
        let a = LogProb::from_complement(1e-200);
        let b = LogProb::from_complement(1e-100);
        assert_eq!(a.total_cmp(&b), Ordering::Greater);
        let c = LogProb::from_lp(-1e70);
        let d = LogProb::from_lp(-2e70);
        assert_eq!(c.total_cmp(&d), Ordering::Greater);
        assert_eq!(LogProb::ZERO.total_cmp(&d), Ordering::Less);
        assert_eq!(LogProb::ONE.total_cmp(&a), Ordering::Greater);
        assert_eq!(LogProb::from_prob(0.4).total_cmp(&LogProb::from_prob(0.6)), Ordering::Less);
    }

    #[test]
    fn powers_and_products_near_one() {
        let x = LogProb::from_complement(1e-40);
        let y = x.powf(3.0);
        assert!((y.lq - (3e-40f64).ln()).abs() < 1e-12);
        let z = x.mul(&x);
        assert!((z.lq - (2e-40f64).ln()).abs() < 1e-12);
        let w = LogProb::from_prob(0.5).powf(2.0);
        assert!((w.prob() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn json_keeps_infinities() {
        let s = serde_json::to_string(&LogProb::ZERO).unwrap();
        assert_eq!(s, r#"{"lp":"-inf","lq":0.0}"#);
        assert_eq!(serde_json::from_str::<LogProb>(&s).unwrap(), LogProb::ZERO);
    }

    #[test]
    fn margins() {
        assert_eq!(lp_margin(-1.0, -1.0), 0.0);
        assert!(lp_margin(-1.0, -2.0) > 0.0);
        assert!(lp_margin(-1e-300, -2e-300) > 0.4);
        assert_eq!(lp_margin(-5.0, f64::NEG_INFINITY), 1.0);
    }
}

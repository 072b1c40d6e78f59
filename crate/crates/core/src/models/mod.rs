//! Samplers for symmetric, positively associated percolation measures, and
//! the deterministic diagonal configurations that show which hypotheses
//! cannot be dropped.

mod fk;

use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

pub use fk::FkChain;

use crate::error::{Error, Result};
use crate::lattice::{Config, Dir, Domain, Symmetry};
use crate::rng::{self, Rng};

/// Where an FK measure lives: a periodic torus of even side, or the
/// free-boundary box `Λ_half = [-half, half]^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FkDomain {
    Torus { side: u32 },
    Box { half: u32 },
}

impl FkDomain {
    pub fn domain(&self) -> Result<Domain> {
        match *self {
            FkDomain::Torus { side } => Domain::torus(side),
            FkDomain::Box { half } => Ok(Domain::Rect(crate::lattice::Rect::square(half as i32))),
        }
    }
}

impl fmt::Display for FkDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FkDomain::Torus { side } => write!(f, "torus:{side}"),
            FkDomain::Box { half } => write!(f, "box:{half}"),
        }
    }
}

impl FromStr for FkDomain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, size) = s
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("FK domain must look like torus:N or box:N, got {s:?}")))?;
        let size: u32 = size.trim().parse().map_err(|_| Error::Parameter(format!("bad FK domain size in {s:?}")))?;
        match kind.trim() {
            "torus" => {
                Domain::torus(size)?;
                Ok(FkDomain::Torus { side: size })
            }
            "box" => Ok(FkDomain::Box { half: size }),
            _ => Err(Error::Parameter(format!("unknown FK domain kind in {s:?}"))),
        }
    }
}

impl TryFrom<String> for FkDomain {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FkDomain> for String {
    fn from(d: FkDomain) -> String {
        d.to_string()
    }
}

/// Initial state of an FK chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FkStart {
    #[default]
    Closed,
    Open,
}

pub const DEFAULT_FK_BURN_IN: u32 = 200;
pub const DEFAULT_FK_THIN: u32 = 10;
pub const DEFAULT_FK_CHAIN_LEN: u32 = 1000;

fn default_burn_in() -> u32 {
    DEFAULT_FK_BURN_IN
}
fn default_thin() -> u32 {
    DEFAULT_FK_THIN
}
fn default_chain_len() -> u32 {
    DEFAULT_FK_CHAIN_LEN
}

/// A percolation measure the laboratory can sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Bernoulli {
        p: f64,
    },
    /// Random-cluster measure sampled by single-edge heat bath.
    Fk {
        p: f64,
        q: f64,
        domain: FkDomain,
        /// Burn-in sweeps before the first recorded configuration.
        #[serde(default = "default_burn_in")]
        sweeps: u32,
        /// Sweeps between recorded configurations.
        #[serde(default = "default_thin")]
        thin: u32,
        /// Recorded configurations per independent chain.
        #[serde(default = "default_chain_len")]
        chain_len: u32,
        #[serde(default)]
        start: FkStart,
    },
    Diag,
    MixedDiag,
}

impl ModelSpec {
    pub fn bernoulli(p: f64) -> Self {
        ModelSpec::Bernoulli { p }
    }

    pub fn fk(p: f64, q: f64, domain: FkDomain) -> Self {
        ModelSpec::Fk {
            p,
            q,
            domain,
            sweeps: DEFAULT_FK_BURN_IN,
            thin: DEFAULT_FK_THIN,
            chain_len: DEFAULT_FK_CHAIN_LEN,
            start: FkStart::Closed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_p = |p: f64| {
            if !(0.0..=1.0).contains(&p) {
                Err(Error::Parameter(format!("p must lie in [0, 1], got {p}")))
            } else {
                Ok(())
            }
        };
        match *self {
            ModelSpec::Bernoulli { p } => check_p(p),
            ModelSpec::Fk { p, q, domain, sweeps, thin, chain_len, .. } => {
                check_p(p)?;
                if !(q >= 1.0) || !q.is_finite() {
                    return Err(Error::Parameter(format!(
                        "cluster weight q must be >= 1 for positive association, got {q}"
                    )));
                }
                if sweeps < 1 || thin < 1 || chain_len < 1 {
                    return Err(Error::Parameter("FK sweeps, thin and chain_len must be >= 1".into()));
                }
                domain.domain().map(|_| ())
            }
            ModelSpec::Diag | ModelSpec::MixedDiag => Ok(()),
        }
    }

    /// Edge density parameter, where the model has one.
    pub fn p(&self) -> Option<f64> {
        match *self {
            ModelSpec::Bernoulli { p } | ModelSpec::Fk { p, .. } => Some(p),
            _ => None,
        }
    }

    /// Symmetric and positively associated (the hypotheses of the
    /// crossing-probability relations).
    pub fn is_symmetric_associated(&self) -> bool {
        match self {
            ModelSpec::Bernoulli { .. } => true,
            ModelSpec::Fk { domain, .. } => matches!(domain, FkDomain::Torus { .. }),
            _ => false,
        }
    }

    /// Samples come from a Markov chain on a fixed domain rather than
    /// being drawn independently on any requested window.
    pub fn is_chain(&self) -> bool {
        matches!(self, ModelSpec::Fk { .. })
    }

    /// Short label, e.g. `bernoulli:p=0.5`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Bernoulli { p } => format!("bernoulli:p={p}"),
            ModelSpec::Fk { p, q, domain, .. } => format!("fk:p={p},q={q},{domain}"),
            ModelSpec::Diag => "diag".into(),
            ModelSpec::MixedDiag => "mixed-diag".into(),
        }
    }
}

/// Parse the compact CLI model syntax: `bernoulli:p=0.5`,
/// `fk:p=0.586,q=2,domain=torus:32[,sweeps=..,thin=..,chain=..,start=open]`,
/// `diag`, `mixed-diag`. For FK, `p=sd` selects the self-dual point.
impl FromStr for ModelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut fields = std::collections::BTreeMap::new();
        // `domain=torus:32` contains a colon, so split on commas only
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("expected key=value in model spec, got {part:?}")))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str| -> Result<Option<f64>> {
            fields
                .get(k)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Parameter(format!("bad number for {k}: {v:?}"))))
                .transpose()
        };
        let int = |k: &str, default: u32| -> Result<u32> {
            fields
                .get(k)
                .map(|v| v.parse::<u32>().map_err(|_| Error::Parameter(format!("bad integer for {k}: {v:?}"))))
                .transpose()
                .map(|o| o.unwrap_or(default))
        };
        let spec = match kind.trim() {
            "bernoulli" => ModelSpec::Bernoulli {
                p: num("p")?.ok_or_else(|| Error::Parameter("bernoulli needs p".into()))?,
            },
            "fk" => {
                let q = num("q")?.unwrap_or(2.0);
                let p = match fields.get("p").map(String::as_str) {
                    Some("sd") => self_dual_point(q),
                    _ => num("p")?.ok_or_else(|| Error::Parameter("fk needs p".into()))?,
                };
                let domain = fields.get("domain").map(String::as_str).unwrap_or("torus:32").parse()?;
                let start = match fields.get("start").map(String::as_str) {
                    None | Some("closed") => FkStart::Closed,
                    Some("open") => FkStart::Open,
                    Some(other) => return Err(Error::Parameter(format!("unknown FK start {other:?}"))),
                };
                ModelSpec::Fk {
                    p,
                    q,
                    domain,
                    sweeps: int("sweeps", DEFAULT_FK_BURN_IN)?,
                    thin: int("thin", DEFAULT_FK_THIN)?,
                    chain_len: int("chain", DEFAULT_FK_CHAIN_LEN)?,
                    start,
                }
            }
            "diag" => ModelSpec::Diag,
            "mixed-diag" | "mixed_diag" | "mixeddiag" => ModelSpec::MixedDiag,
            other => return Err(Error::Parameter(format!("unknown model kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Self-dual point of the random-cluster model on `Z^2`,
/// `sqrt(q) / (1 + sqrt(q))`.
pub fn self_dual_point(q: f64) -> f64 {
    q.sqrt() / (1.0 + q.sqrt())
}

/// Independent Bernoulli(p) edges.
pub fn sample_bernoulli(domain: Domain, p: f64, seed: u64) -> Result<Config> {
    ModelSpec::Bernoulli { p }.validate()?;
    let mut c = Config::all_closed(domain);
    fill_bernoulli(&mut c, p, &mut rng::stream(seed, &[]));
    Ok(c)
}

pub(crate) fn fill_bernoulli(c: &mut Config, p: f64, rng: &mut Rng) {
    let len = c.edge_count();
    rng::fill_bernoulli(rng, p, c.words_mut(), len);
}

/// Heat-bath FK sample after `sweeps` full sweeps from the closed state.
pub fn sample_fk(domain: Domain, p: f64, q: f64, sweeps: u32, seed: u64) -> Result<Config> {
    if sweeps < 1 {
        return Err(Error::Parameter("sweeps must be >= 1".into()));
    }
    let mut chain = FkChain::new(domain, p, q, FkStart::Closed, rng::stream(seed, &[]))?;
    chain.sweeps(sweeps);
    Ok(chain.config().clone())
}

/// Open diagonals: horizontal `{(x,y),(x+1,y)}` open iff `x + y` is even,
/// vertical `{(x,y),(x,y+1)}` open iff `x + y` is odd.
pub fn diag_config(domain: Domain) -> Config {
    Config::from_fn(domain, diag_open)
}

fn diag_open(e: crate::lattice::Edge) -> bool {
    let even = (e.x + e.y).rem_euclid(2) == 0;
    match e.dir {
        Dir::H => even,
        Dir::V => !even,
    }
}

/// `ω_diag` mirrored in the vertical axis.
pub fn reflected_diag_config(domain: Domain) -> Config {
    let refl = Symmetry::reflection();
    Config::from_fn(domain, |e| diag_open(refl.apply_edge(e)))
}

/// Which branch [`sample_mixed_diag`] takes for `seed`: `true` for
/// `ω_diag`, `false` for its reflection.
pub fn mixed_diag_branch(seed: u64) -> bool {
    rng::stream(seed, &[]).next_u64() & 1 == 0
}

/// `ω_diag` or its vertical-axis reflection with probability 1/2 each.
pub fn sample_mixed_diag(domain: Domain, seed: u64) -> Config {
    if mixed_diag_branch(seed) {
        diag_config(domain)
    } else {
        reflected_diag_config(domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Edge, Rect};

    #[test]
    fn bernoulli_endpoints() {
        let d = Domain::Rect(Rect::square(3));
        assert_eq!(sample_bernoulli(d, 0.0, 1).unwrap().open_count(), 0);
        assert_eq!(sample_bernoulli(d, 1.0, 1).unwrap().open_count(), d.edge_count());
        assert!(sample_bernoulli(d, 1.5, 1).is_err());
        assert_eq!(sample_bernoulli(d, 0.4, 9).unwrap(), sample_bernoulli(d, 0.4, 9).unwrap());
    }

    #[test]
    fn bernoulli_mean_open_fraction() {
        let d = Domain::Rect(Rect::square(8));
        let samples = 10_000u64;
        let total: usize = (0..samples).map(|s| sample_bernoulli(d, 0.5, s).unwrap().open_count()).sum();
        let n = (samples as usize * d.edge_count()) as f64;
        let sd = (0.25 / n).sqrt();
        assert!((total as f64 / n - 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn diag_examples() {
        let d = Domain::Rect(Rect::square(10));
        let c = diag_config(d);
        assert_eq!(c.is_open(Edge::h(0, 0)), Some(true));
        assert_eq!(c.is_open(Edge::v(0, 0)), Some(false));
        for v in Rect::square(9).vertices() {
            let (x, y) = v;
            let incident = [Edge::h(x, y), Edge::h(x - 1, y), Edge::v(x, y), Edge::v(x, y - 1)];
            let deg = incident.iter().filter(|e| c.is_open(**e) == Some(true)).count();
            assert_eq!(deg, 2, "vertex {v:?}");
        }
    }

    #[test]
    fn mixed_diag_branches() {
        let d = Domain::Rect(Rect::square(4));
        let a = (0..).find(|s| mixed_diag_branch(*s)).unwrap();
        let b = (0..).find(|s| !mixed_diag_branch(*s)).unwrap();
        assert_eq!(sample_mixed_diag(d, a), diag_config(d));
        assert_eq!(sample_mixed_diag(d, b), reflected_diag_config(d));
        let hits = (0..10_000u64).filter(|s| mixed_diag_branch(*s)).count();
        assert!((4700..=5300).contains(&hits), "{hits}");
    }

    #[test]
    fn fk_parameter_errors() {
        let d = Domain::torus(8).unwrap();
        assert!(sample_fk(d, 0.5, 0.5, 1, 0).is_err());
        assert!(sample_fk(d, 0.5, 2.0, 0, 0).is_err());
        assert!("fk:p=0.5,q=0.9".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn fk_endpoints() {
        let d = Domain::torus(8).unwrap();
        assert_eq!(sample_fk(d, 0.0, 2.0, 3, 1).unwrap().open_count(), 0);
        assert_eq!(sample_fk(d, 1.0, 2.0, 1, 1).unwrap().open_count(), d.edge_count());
    }

    #[test]
    fn model_spec_parsing() {
        assert_eq!("bernoulli:p=0.5".parse::<ModelSpec>().unwrap(), ModelSpec::bernoulli(0.5));
        assert_eq!("diag".parse::<ModelSpec>().unwrap(), ModelSpec::Diag);
        let fk: ModelSpec = "fk:p=sd,q=2,domain=box:16,sweeps=50".parse().unwrap();
        match fk {
            ModelSpec::Fk { p, domain, sweeps, .. } => {
                assert!((p - self_dual_point(2.0)).abs() < 1e-15);
                assert_eq!(domain, FkDomain::Box { half: 16 });
                assert_eq!(sweeps, 50);
            }
            _ => panic!(),
        }
        assert!("bernoulli".parse::<ModelSpec>().is_err());
        assert!("potts:q=3".parse::<ModelSpec>().is_err());
        let json = serde_json::to_string(&fk).unwrap();
        assert_eq!(serde_json::from_str::<ModelSpec>(&json).unwrap(), fk);
    }
}

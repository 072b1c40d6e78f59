use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{CompiledEvent, EventSpec, Scratch};
use crate::homeo::LogProb;
use crate::lattice::{Config, Domain, Rect};
use crate::models::{self, FkChain, ModelSpec};
use crate::rng;

use super::Interval;

pub const ESTIMATE_SCHEMA: &str = "rswlab/estimate/v1";

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Replicates handled by one parallel task.
const CHUNK: u64 = 512;

/// Stream tag for FK chains, so chain seeds never collide with event
/// digests.
const FK_CHAIN_TAG: u64 = 0x464b_5f43_4841_494e;

/// 95% Wilson score interval for `successes` out of `n`.
pub fn wilson(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let phat = successes as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, phat) };
    let hi = if successes == n { 1.0 } else { (center + half).clamp(phat, 1.0) };
    (lo, hi)
}

/// A Monte Carlo estimate of the probability of one event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub schema: String,
    pub model: String,
    pub model_spec: ModelSpec,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub event: String,
    /// Hex FNV-1a digest of the event's canonical JSON.
    pub event_digest: String,
    pub n: Option<u32>,
    pub rho: Option<u32>,
    pub successes: u64,
    pub replicates: u64,
    pub phat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
    /// The event's indicator is the same on every configuration the model
    /// can produce, so `phat` is its probability and the interval collapses.
    pub exact: bool,
}

impl Estimate {
    pub fn from_counts(model: &ModelSpec, q: &Quantity, successes: u64, replicates: u64, seed: u64, exact: bool) -> Self {
        let phat = if replicates == 0 { 0.0 } else { successes as f64 / replicates as f64 };
        let (wilson_lo, wilson_hi) = if exact { (phat, phat) } else { wilson(successes, replicates) };
        Estimate {
            schema: ESTIMATE_SCHEMA.into(),
            model: model.label(),
            model_spec: *model,
            p: model.p(),
            q: match model {
                ModelSpec::Fk { q, .. } => Some(*q),
                _ => None,
            },
            event: q.label.clone(),
            event_digest: format!("{:016x}", q.spec.digest()),
            n: q.n,
            rho: q.rho,
            successes,
            replicates,
            phat,
            wilson_lo,
            wilson_hi,
            seed,
            exact,
        }
    }

    /// Point estimate and Wilson bounds in log form. The complements come
    /// from the failure counts, so values near 1 keep their precision.
    pub fn interval(&self) -> Interval {
        let (s, n) = (self.successes, self.replicates);
        let point = LogProb { lp: ratio_ln(s, n), lq: ratio_ln(n - s, n) };
        if self.exact {
            return Interval::exact(point);
        }
        let (lo, hi) = wilson(s, n);
        let (f_lo, f_hi) = wilson(n - s, n);
        Interval {
            lo: LogProb { lp: lo.ln(), lq: f_hi.ln() },
            point,
            hi: LogProb { lp: hi.ln(), lq: f_lo.ln() },
        }
    }

    /// Point estimate with `±k` binomial standard errors instead of the
    /// Wilson bounds.
    pub fn sigma_interval(&self, k: f64) -> Interval {
        let point = self.interval().point;
        if self.exact {
            return Interval::exact(point);
        }
        let d = k * self.sigma();
        Interval {
            lo: LogProb::from_prob((self.phat - d).max(0.0)),
            point,
            hi: LogProb::from_prob((self.phat + d).min(1.0)),
        }
    }

    /// Binomial standard error of `phat`.
    pub fn sigma(&self) -> f64 {
        if self.exact || self.replicates == 0 {
            0.0
        } else {
            (self.phat * (1.0 - self.phat) / self.replicates as f64).sqrt()
        }
    }
}

fn ratio_ln(a: u64, n: u64) -> f64 {
    if a == 0 {
        f64::NEG_INFINITY
    } else if a == n {
        0.0
    } else {
        (a as f64).ln() - (n as f64).ln()
    }
}

/// An event together with the name and scales it is reported under.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub label: String,
    pub spec: EventSpec,
    pub n: Option<u32>,
    pub rho: Option<u32>,
}

impl Quantity {
    pub fn new(label: impl Into<String>, spec: EventSpec) -> Self {
        Self { label: label.into(), spec, n: None, rho: None }
    }

    pub fn at(mut self, n: u32) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_rho(mut self, rho: u32) -> Self {
        self.rho = Some(rho);
        self
    }
}

/// Histogram of the joint outcome of several events over the same
/// configurations. Pattern bit `i` is the indicator of event `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCounts {
    pub replicates: u64,
    pub patterns: Vec<u64>,
    pub exact: bool,
}

impl JointCounts {
    pub fn marginal(&self, i: usize) -> u64 {
        self.patterns.iter().enumerate().filter(|(k, _)| k >> i & 1 == 1).map(|(_, c)| c).sum()
    }

    /// Replicates where every event in `mask` occurs.
    pub fn all_of(&self, mask: usize) -> u64 {
        self.patterns.iter().enumerate().filter(|(k, _)| k & mask == mask).map(|(_, c)| c).sum()
    }

    /// Replicates where at least one event occurs.
    pub fn any(&self) -> u64 {
        self.replicates - self.patterns[0]
    }
}

type BankKey = (String, u64, u64);
type CacheKey = (String, u64, u64, u64);

/// Runs estimates on a fixed-size worker pool.
///
/// Replicate `r` of an event with digest `d` under run seed `s` samples
/// from the stream `derive_seed(s, [d, r])`; replicates are split into
/// fixed chunks and the integer counts are summed in chunk order, so the
/// result does not depend on the number of workers. FK replicates are read
/// from a bank of chain samples shared by every event estimated with the
/// same model, seed and replicate count.
pub struct Engine {
    workers: usize,
    pool: rayon::ThreadPool,
    banks: Mutex<HashMap<BankKey, Arc<Vec<Config>>>>,
    cache: Mutex<HashMap<CacheKey, (u64, bool)>>,
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Parameter("worker count must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
        Ok(Self { workers, pool, banks: Mutex::new(HashMap::new()), cache: Mutex::new(HashMap::new()) })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn estimate(&self, model: &ModelSpec, q: &Quantity, replicates: u64, seed: u64) -> Result<Estimate> {
        model.validate()?;
        let digest = q.spec.digest();
        let key = (model_key(model), digest, replicates, seed);
        let cached = self.cache.lock().unwrap().get(&key).copied();
        let (successes, exact) = match cached {
            Some(v) => v,
            None => {
                let joint = self.run(model, std::slice::from_ref(&q.spec), digest, replicates, seed)?;
                let v = (joint.patterns[1], joint.exact);
                self.cache.lock().unwrap().insert(key, v);
                v
            }
        };
        Ok(Estimate::from_counts(model, q, successes, replicates, seed, exact))
    }

    /// Joint outcome of up to 16 events on shared configurations.
    pub fn estimate_joint(&self, model: &ModelSpec, events: &[EventSpec], replicates: u64, seed: u64) -> Result<JointCounts> {
        model.validate()?;
        if events.is_empty() || events.len() > 16 {
            return Err(Error::Parameter("joint estimation takes 1 to 16 events".into()));
        }
        let digests: Vec<u64> = events.iter().map(|e| e.digest()).collect();
        let key = rng::derive_seed(0, &digests);
        self.run(model, events, key, replicates, seed)
    }

    fn run(&self, model: &ModelSpec, events: &[EventSpec], key: u64, replicates: u64, seed: u64) -> Result<JointCounts> {
        let k = events.len();
        let domain = match model {
            ModelSpec::Fk { domain, .. } => domain.domain()?,
            _ => Domain::Rect(events.iter().map(|e| e.support()).reduce(|a, b| a.hull(&b)).unwrap_or(Rect::new(0, 0, 0, 0))),
        };
        let compiled: Vec<CompiledEvent> = events.iter().map(|e| e.compile(domain)).collect::<Result<_>>()?;
        let pattern_of = |cfg: &Config, scratch: &mut Scratch| -> Result<usize> {
            let mut pat = 0usize;
            for (i, c) in compiled.iter().enumerate() {
                if c.eval(cfg, scratch)? {
                    pat |= 1 << i;
                }
            }
            Ok(pat)
        };
        let mut patterns = vec![0u64; 1 << k];
        match *model {
            ModelSpec::Diag => {
                let pat = pattern_of(&models::diag_config(domain), &mut Scratch::default())?;
                patterns[pat] = replicates;
                Ok(JointCounts { replicates, patterns, exact: true })
            }
            ModelSpec::MixedDiag => {
                let mut scratch = Scratch::default();
                let a = pattern_of(&models::diag_config(domain), &mut scratch)?;
                let b = pattern_of(&models::reflected_diag_config(domain), &mut scratch)?;
                let hits = (0..replicates).filter(|r| models::mixed_diag_branch(rng::derive_seed(seed, &[key, *r]))).count() as u64;
                patterns[a] += hits;
                patterns[b] += replicates - hits;
                Ok(JointCounts { replicates, patterns, exact: a == b })
            }
            ModelSpec::Bernoulli { p } => {
                let chunks = self.chunked(replicates, |range| {
                    let mut cfg = Config::all_closed(domain);
                    let mut scratch = Scratch::default();
                    let mut local = vec![0u64; 1 << k];
                    for r in range {
                        models::fill_bernoulli(&mut cfg, p, &mut rng::stream(seed, &[key, r]));
                        local[pattern_of(&cfg, &mut scratch)?] += 1;
                    }
                    Ok(local)
                })?;
                sum_into(&mut patterns, chunks);
                Ok(JointCounts { replicates, patterns, exact: p == 0.0 || p == 1.0 })
            }
            ModelSpec::Fk { p, .. } => {
                let bank = self.bank(model, replicates, seed)?;
                let chunks = self.chunked(replicates, |range| {
                    let mut scratch = Scratch::default();
                    let mut local = vec![0u64; 1 << k];
                    for r in range {
                        local[pattern_of(&bank[r as usize], &mut scratch)?] += 1;
                    }
                    Ok(local)
                })?;
                sum_into(&mut patterns, chunks);
                Ok(JointCounts { replicates, patterns, exact: p == 0.0 || p == 1.0 })
            }
        }
    }

    fn chunked<F>(&self, replicates: u64, work: F) -> Result<Vec<Vec<u64>>>
    where
        F: Fn(std::ops::Range<u64>) -> Result<Vec<u64>> + Sync,
    {
        let chunks = replicates.div_ceil(CHUNK);
        self.pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(|c| work(c * CHUNK..((c + 1) * CHUNK).min(replicates)))
                .collect::<Result<Vec<_>>>()
        })
    }

    /// `replicates` FK configurations: independent chains of `chain_len`
    /// recorded states each, after `sweeps` burn-in sweeps and `thin`
    /// sweeps between records.
    fn bank(&self, model: &ModelSpec, replicates: u64, seed: u64) -> Result<Arc<Vec<Config>>> {
        let ModelSpec::Fk { p, q, domain, sweeps, thin, chain_len, start } = *model else {
            return Err(Error::Parameter("sample banks exist only for FK models".into()));
        };
        let key = (model_key(model), seed, replicates);
        if let Some(bank) = self.banks.lock().unwrap().get(&key) {
            return Ok(bank.clone());
        }
        let domain = domain.domain()?;
        let chain_len = chain_len as u64;
        let chains = replicates.div_ceil(chain_len);
        let runs: Vec<Vec<Config>> = self.pool.install(|| {
            (0..chains)
                .into_par_iter()
                .map(|c| {
                    let mut chain = FkChain::new(domain, p, q, start, rng::stream(seed, &[FK_CHAIN_TAG, c]))?;
                    chain.sweeps(sweeps);
                    let len = chain_len.min(replicates - c * chain_len);
                    let mut out = Vec::with_capacity(len as usize);
                    for i in 0..len {
                        if i > 0 {
                            chain.sweeps(thin);
                        }
                        out.push(chain.config().clone());
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let bank = Arc::new(runs.into_iter().flatten().collect::<Vec<_>>());
        self.banks.lock().unwrap().insert(key, bank.clone());
        Ok(bank)
    }
}

fn model_key(model: &ModelSpec) -> String {
    serde_json::to_string(model).expect("model serializes")
}

fn sum_into(total: &mut [u64], chunks: Vec<Vec<u64>>) {
    for c in chunks {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_endpoints_and_order() {
        assert_eq!(wilson(0, 10).0, 0.0);
        assert_eq!(wilson(10, 10).1, 1.0);
        for (s, n) in [(1u64, 10u64), (5, 10), (9, 10), (37, 1000)] {
            let (lo, hi) = wilson(s, n);
            let ph = s as f64 / n as f64;
            assert!(0.0 <= lo && lo <= ph && ph <= hi && hi <= 1.0);
            let (flo, fhi) = wilson(n - s, n);
            assert!((lo - (1.0 - fhi)).abs() < 1e-12 && (hi - (1.0 - flo)).abs() < 1e-12);
        }
    }

    #[test]
    fn wilson_known_value() {
        // 5/10: center 0.5, half-width z sqrt(0.025 + z^2/400) / (1 + z^2/10)
        let z = WILSON_Z;
        let half = z * (0.025 + z * z / 400.0).sqrt() / (1.0 + z * z / 10.0);
        let (lo, hi) = wilson(5, 10);
        assert!((lo - (0.5 - half)).abs() < 1e-15 && (hi - (0.5 + half)).abs() < 1e-15);
        assert!((lo - 0.236_593_090_512_564_7).abs() < 1e-12);
    }
}

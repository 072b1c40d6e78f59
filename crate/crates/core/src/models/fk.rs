use super::FkStart;
use crate::error::{Error, Result};
use crate::lattice::{Config, Domain};
use crate::rng::{self, Rng};

/// Single-edge heat-bath chain for the random-cluster measure with edge
/// density `p` and cluster weight `q >= 1`, free boundary on rectangles and
/// periodic on tori.
///
/// An edge whose endpoints are joined by an open path avoiding it is open
/// with probability `p`; otherwise with probability `p / (p + q(1 - p))`.
/// The off-edge connectivity query is exact: a breadth-first search grown
/// alternately from both endpoints, stopping when the searches meet or
/// either side runs out of vertices.
pub struct FkChain {
    config: Config,
    ends: Vec<(u32, u32)>,
    // CSR adjacency: neighbours of v are adj[start[v]..start[v + 1]] as
    // (vertex, edge index)
    start: Vec<u32>,
    adj: Vec<(u32, u32)>,
    p: f64,
    p_split: f64,
    rng: Rng,
    mark: Vec<u32>,
    stamp: u32,
    queue_a: Vec<u32>,
    queue_b: Vec<u32>,
}

impl FkChain {
    pub fn new(domain: Domain, p: f64, q: f64, start: FkStart, rng: Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter(format!("p must lie in [0, 1], got {p}")));
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::Parameter(format!("cluster weight q must be >= 1, got {q}")));
        }
        let vertex_id = |v: (i32, i32)| -> u32 {
            match domain {
                Domain::Rect(r) => r.vertex_index(v).expect("edge endpoint inside rectangle") as u32,
                Domain::Torus { side } => {
                    let n = side as i32;
                    let col = (v.0 + n / 2).rem_euclid(n);
                    let row = (v.1 + n / 2).rem_euclid(n);
                    (row * n + col) as u32
                }
            }
        };
        let nv = domain.vertex_count();
        let ends: Vec<(u32, u32)> = domain
            .edges()
            .map(|e| {
                let (a, b) = e.endpoints();
                (vertex_id(a), vertex_id(b))
            })
            .collect();
        let mut degree = vec![0u32; nv + 1];
        for &(a, b) in &ends {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut start_idx = vec![0u32; nv + 1];
        for v in 0..nv {
            start_idx[v + 1] = start_idx[v] + degree[v];
        }
        let mut fill = start_idx.clone();
        let mut adj = vec![(0u32, 0u32); 2 * ends.len()];
        for (k, &(a, b)) in ends.iter().enumerate() {
            adj[fill[a as usize] as usize] = (b, k as u32);
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = (a, k as u32);
            fill[b as usize] += 1;
        }
        let config = match start {
            FkStart::Closed => Config::all_closed(domain),
            FkStart::Open => Config::all_open(domain),
        };
        let p_split = if p == 0.0 { 0.0 } else { p / (p + q * (1.0 - p)) };
        Ok(Self {
            config,
            ends,
            start: start_idx,
            adj,
            p,
            p_split,
            rng,
            mark: vec![0; nv],
            stamp: 0,
            queue_a: Vec::new(),
            queue_b: Vec::new(),
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// One heat-bath update of every edge, in index order.
    pub fn sweep(&mut self) {
        for e in 0..self.ends.len() {
            self.update(e);
        }
    }

    pub fn sweeps(&mut self, k: u32) {
        for _ in 0..k {
            self.sweep();
        }
    }

    fn update(&mut self, e: usize) {
        let r = rng::uniform(&mut self.rng);
        let open = if r < self.p_split {
            true
        } else if r >= self.p {
            false
        } else {
            let (a, b) = self.ends[e];
            self.connected_off(a, b, e as u32)
        };
        self.config.set_index(e, open);
    }

    /// Are `a` and `b` joined by open edges other than `skip`?
    fn connected_off(&mut self, a: u32, b: u32, skip: u32) -> bool {
        if a == b {
            return true;
        }
        // marks: 2*stamp for side a, 2*stamp+1 for side b
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == u32::MAX / 2 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let (ma, mb) = (2 * self.stamp, 2 * self.stamp + 1);
        self.queue_a.clear();
        self.queue_b.clear();
        self.queue_a.push(a);
        self.queue_b.push(b);
        self.mark[a as usize] = ma;
        self.mark[b as usize] = mb;
        let (mut ha, mut hb) = (0usize, 0usize);
        loop {
            if ha == self.queue_a.len() || hb == self.queue_b.len() {
                return false;
            }
            let x = self.queue_a[ha];
            ha += 1;
            if self.expand(x, skip, ma, mb, true) {
                return true;
            }
            if hb == self.queue_b.len() {
                return false;
            }
            let y = self.queue_b[hb];
            hb += 1;
            if self.expand(y, skip, mb, ma, false) {
                return true;
            }
        }
    }

    #[inline]
    fn expand(&mut self, x: u32, skip: u32, mine: u32, other: u32, side_a: bool) -> bool {
        let (s, t) = (self.start[x as usize] as usize, self.start[x as usize + 1] as usize);
        for k in s..t {
            let (y, e) = self.adj[k];
            if e == skip || !self.config.get_index(e as usize) {
                continue;
            }
            let m = self.mark[y as usize];
            if m == other {
                return true;
            }
            if m != mine {
                self.mark[y as usize] = mine;
                if side_a {
                    self.queue_a.push(y);
                } else {
                    self.queue_b.push(y);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Rect;
    use crate::unionfind::UnionFind;

    fn uf_connected_off(c: &Config, ends: &[(u32, u32)], nv: usize, a: u32, b: u32, skip: usize) -> bool {
        let mut uf = UnionFind::new(nv);
        for (k, &(u, v)) in ends.iter().enumerate() {
            if k != skip && c.get_index(k) {
                uf.union(u, v);
            }
        }
        uf.connected(a, b)
    }

    #[test]
    fn bidirectional_search_matches_union_find() {
        for domain in [Domain::Rect(Rect::new(0, 0, 3, 2)), Domain::torus(6).unwrap()] {
            let mut chain = FkChain::new(domain, 0.5, 1.0, FkStart::Closed, rng::stream(4, &[])).unwrap();
            for round in 0..40 {
                chain.sweep();
                let c = chain.config.clone();
                let nv = domain.vertex_count();
                for e in 0..chain.ends.len() {
                    let (a, b) = chain.ends[e];
                    let expect = uf_connected_off(&c, &chain.ends, nv, a, b, e);
                    assert_eq!(chain.connected_off(a, b, e as u32), expect, "round {round} edge {e}");
                }
            }
        }
    }

    #[test]
    fn chain_is_deterministic() {
        let d = Domain::torus(8).unwrap();
        let run = || {
            let mut c = FkChain::new(d, 0.6, 2.0, FkStart::Closed, rng::stream(10, &[])).unwrap();
            c.sweeps(5);
            c.config().clone()
        };
        assert_eq!(run(), run());
    }
}

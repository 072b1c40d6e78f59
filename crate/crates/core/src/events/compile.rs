use super::paths::MPathGraph;
use super::{mpath_box, quasi_big_box, t_beta, EventSpec};
use crate::error::{Error, Result};
use crate::lattice::{dual_edge, Config, Domain, Rect, Symmetry};

/// Per-thread search buffers, reused across evaluations.
#[derive(Default)]
pub struct Scratch {
    mark: Vec<u32>,
    stamp: u32,
    queue: Vec<u32>,
}

impl Scratch {
    fn fresh(&mut self, n: usize) -> u32 {
        if self.mark.len() < n {
            self.mark.resize(n, 0);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        self.queue.clear();
        self.stamp
    }
}

/// A finite graph whose edges are bits of a configuration.
pub(crate) struct BitGraph {
    pub(crate) start: Vec<u32>,
    /// `(neighbour, bit index)`.
    pub(crate) adj: Vec<(u32, u32)>,
    /// Edge is usable when its bit differs from this (dual graphs use
    /// closed primal edges).
    pub(crate) closed_bit: bool,
}

impl BitGraph {
    pub(crate) fn build(nv: usize, edges: &[(u32, u32, u32)], dual: bool) -> Self {
        let mut degree = vec![0u32; nv + 1];
        for &(a, b, _) in edges {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for v in 0..nv {
            degree[v + 1] += degree[v];
        }
        let start = degree;
        let mut fill = start.clone();
        let mut adj = vec![(0, 0); start[nv] as usize];
        for &(a, b, bit) in edges {
            adj[fill[a as usize] as usize] = (b, bit);
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = (a, bit);
            fill[b as usize] += 1;
        }
        Self { start, adj, closed_bit: dual }
    }

    pub(crate) fn vertex_count(&self) -> usize {
        self.start.len() - 1
    }

    #[inline]
    pub(crate) fn neighbours(&self, v: u32) -> &[(u32, u32)] {
        &self.adj[self.start[v as usize] as usize..self.start[v as usize + 1] as usize]
    }

    #[inline]
    pub(crate) fn usable(&self, cfg: &Config, bit: u32) -> bool {
        cfg.get_index(bit as usize) != self.closed_bit
    }
}

/// Primal graph of `rect`, with bits looked up through `sigma`.
pub(crate) fn primal_graph(rect: &Rect, sigma: &Symmetry, domain: &Domain) -> Result<BitGraph> {
    check_window(rect, sigma, domain)?;
    let mut edges = Vec::with_capacity(rect.edge_count());
    for e in rect.edges() {
        let (a, b) = e.endpoints();
        let bit = domain_bit(domain, sigma, e)?;
        edges.push((rect.vertex_index(a).unwrap() as u32, rect.vertex_index(b).unwrap() as u32, bit));
    }
    Ok(BitGraph::build(rect.vertex_count(), &edges, false))
}

/// Index of a dual vertex of the ring-extended box `[x0-1, x1] x [y0-1, y1]`.
fn dual_index(rect: &Rect, v: (i32, i32)) -> Option<u32> {
    let (i0, j0) = (rect.x0() - 1, rect.y0() - 1);
    let w = rect.width() as i32 + 1;
    let h = rect.height() as i32 + 1;
    let (i, j) = (v.0 - i0, v.1 - j0);
    if i < 0 || j < 0 || i >= w || j >= h {
        None
    } else {
        Some((j * w + i) as u32)
    }
}

fn dual_graph(rect: &Rect, sigma: &Symmetry, domain: &Domain) -> Result<BitGraph> {
    check_window(rect, sigma, domain)?;
    let nv = (rect.width() + 1) * (rect.height() + 1);
    let mut edges = Vec::with_capacity(rect.edge_count());
    for e in rect.edges() {
        let (a, b) = dual_edge(e).endpoints();
        let bit = domain_bit(domain, sigma, e)?;
        edges.push((dual_index(rect, a).unwrap(), dual_index(rect, b).unwrap(), bit));
    }
    Ok(BitGraph::build(nv, &edges, true))
}

fn check_window(rect: &Rect, sigma: &Symmetry, domain: &Domain) -> Result<()> {
    let image = sigma.apply_rect(rect);
    if domain.window().contains_rect(&image) {
        Ok(())
    } else {
        Err(Error::Domain(format!("event support {image:?} exceeds the domain window {:?}", domain.window())))
    }
}

fn domain_bit(domain: &Domain, sigma: &Symmetry, e: crate::lattice::Edge) -> Result<u32> {
    let image = sigma.apply_edge(e);
    domain
        .edge_index(image)
        .map(|b| b as u32)
        .ok_or_else(|| Error::Domain(format!("edge {image:?} is not in the domain")))
}

struct ConnectNode {
    graph: BitGraph,
    sources: Vec<u32>,
    is_target: Vec<bool>,
    trivially_true: bool,
}

impl ConnectNode {
    fn eval(&self, cfg: &Config, s: &mut Scratch) -> bool {
        if self.trivially_true {
            return true;
        }
        let stamp = s.fresh(self.graph.vertex_count());
        for &v in &self.sources {
            s.mark[v as usize] = stamp;
            s.queue.push(v);
        }
        let mut head = 0;
        while head < s.queue.len() {
            let v = s.queue[head];
            head += 1;
            for &(w, bit) in self.graph.neighbours(v) {
                if s.mark[w as usize] == stamp || !self.graph.usable(cfg, bit) {
                    continue;
                }
                if self.is_target[w as usize] {
                    return true;
                }
                s.mark[w as usize] = stamp;
                s.queue.push(w);
            }
        }
        false
    }
}

struct QuasiNode {
    small: BitGraph,
    upper: Vec<u32>,
    is_lower: Vec<bool>,
    /// Small-box vertex index to big-box vertex index.
    to_big: Vec<u32>,
    big: BitGraph,
    /// bit 0: on the left side, bit 1: on the right side.
    side: Vec<u8>,
}

impl QuasiNode {
    fn eval(&self, cfg: &Config, s: &mut Scratch) -> bool {
        // upper-target vertices whose cluster in the small box reaches the
        // lower target; one search per cluster
        let mut seeds = Vec::new();
        let stamp = s.fresh(self.small.vertex_count());
        for &u in &self.upper {
            if s.mark[u as usize] == stamp {
                continue;
            }
            s.queue.clear();
            s.mark[u as usize] = stamp;
            s.queue.push(u);
            let mut head = 0;
            let mut hit = self.is_lower[u as usize];
            while head < s.queue.len() && !hit {
                let v = s.queue[head];
                head += 1;
                for &(w, bit) in self.small.neighbours(v) {
                    if s.mark[w as usize] == stamp || !self.small.usable(cfg, bit) {
                        continue;
                    }
                    s.mark[w as usize] = stamp;
                    s.queue.push(w);
                    hit |= self.is_lower[w as usize];
                }
            }
            if hit {
                seeds.push(self.to_big[u as usize]);
            }
        }
        if seeds.is_empty() {
            return false;
        }
        let stamp = s.fresh(self.big.vertex_count());
        let mut touched = 0u8;
        for &v in &seeds {
            if s.mark[v as usize] != stamp {
                s.mark[v as usize] = stamp;
                s.queue.push(v);
                touched |= self.side[v as usize];
            }
        }
        let mut head = 0;
        while head < s.queue.len() && touched != 3 {
            let v = s.queue[head];
            head += 1;
            for &(w, bit) in self.big.neighbours(v) {
                if s.mark[w as usize] == stamp || !self.big.usable(cfg, bit) {
                    continue;
                }
                s.mark[w as usize] = stamp;
                s.queue.push(w);
                touched |= self.side[w as usize];
            }
        }
        touched == 3
    }
}

enum Node {
    Connect(ConnectNode),
    Quasi(Box<QuasiNode>),
    MPathFree(Box<MPathGraph>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

impl Node {
    fn eval(&self, cfg: &Config, s: &mut Scratch) -> Result<bool> {
        Ok(match self {
            Node::Connect(c) => c.eval(cfg, s),
            Node::Quasi(q) => q.eval(cfg, s),
            Node::MPathFree(g) => g.decide(cfg)?,
            Node::And(nodes) => {
                for n in nodes {
                    if !n.eval(cfg, s)? {
                        return Ok(false);
                    }
                }
                true
            }
            Node::Or(nodes) => {
                for n in nodes {
                    if n.eval(cfg, s)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }
}

/// An event bound to a domain: vertex tables and edge-bit indices are
/// resolved once, so evaluation is a plain graph search.
pub struct CompiledEvent {
    domain: Domain,
    root: Node,
}

impl CompiledEvent {
    pub fn new(spec: &EventSpec, domain: Domain) -> Result<Self> {
        Ok(Self { domain, root: compile(spec, &Symmetry::identity(), &domain)? })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eval(&self, cfg: &Config, scratch: &mut Scratch) -> Result<bool> {
        if *cfg.domain() != self.domain {
            return Err(Error::Domain(format!(
                "configuration domain {:?} differs from the compiled domain {:?}",
                cfg.domain(),
                self.domain
            )));
        }
        self.root.eval(cfg, scratch)
    }
}

fn compile(spec: &EventSpec, sigma: &Symmetry, domain: &Domain) -> Result<Node> {
    Ok(match spec {
        EventSpec::Connect { region, a, b, dual } => {
            let (graph, index): (BitGraph, Box<dyn Fn((i32, i32)) -> Option<u32>>) = if *dual {
                let r = *region;
                (dual_graph(region, sigma, domain)?, Box::new(move |v| dual_index(&r, v)))
            } else {
                let r = *region;
                (primal_graph(region, sigma, domain)?, Box::new(move |v| r.vertex_index(v).map(|i| i as u32)))
            };
            let resolve = |seg: &super::BoundarySegment| -> Result<Vec<u32>> {
                seg.vertices()
                    .iter()
                    .map(|&v| index(v).ok_or_else(|| Error::Parameter(format!("vertex {v:?} outside {region:?}"))))
                    .collect()
            };
            let sources = resolve(a)?;
            let targets = resolve(b)?;
            let mut is_target = vec![false; graph.vertex_count()];
            for &t in &targets {
                is_target[t as usize] = true;
            }
            let trivially_true = sources.iter().any(|&v| is_target[v as usize]);
            Node::Connect(ConnectNode { graph, sources, is_target, trivially_true })
        }
        EventSpec::QuasiCross { n, m } => {
            let small_rect = mpath_box(*m);
            let big_rect = quasi_big_box(*n);
            if !big_rect.contains_rect(&small_rect) {
                return Err(Error::Parameter(format!("quasi-crossing box for m={m} does not fit in n={n}")));
            }
            let small = primal_graph(&small_rect, sigma, domain)?;
            let big = primal_graph(&big_rect, sigma, domain)?;
            let (mi, t) = (*m as i32, t_beta(*m));
            let upper = (-t..=t).map(|x| small_rect.vertex_index((x, mi)).unwrap() as u32).collect();
            let mut is_lower = vec![false; small.vertex_count()];
            for x in -t..=t {
                is_lower[small_rect.vertex_index((x, -mi)).unwrap()] = true;
            }
            let to_big = small_rect.vertices().map(|v| big_rect.vertex_index(v).unwrap() as u32).collect();
            let side = big_rect
                .vertices()
                .map(|(x, _)| u8::from(x == big_rect.x0()) | (u8::from(x == big_rect.x1()) << 1))
                .collect();
            Node::Quasi(Box::new(QuasiNode { small, upper, is_lower, to_big, big, side }))
        }
        EventSpec::MPathFreePath { l, k, rule, budget } => {
            Node::MPathFree(Box::new(MPathGraph::new(*l, *k, *rule, *budget, sigma, domain)?))
        }
        EventSpec::And { events } => Node::And(events.iter().map(|e| compile(e, sigma, domain)).collect::<Result<_>>()?),
        EventSpec::Or { events } => Node::Or(events.iter().map(|e| compile(e, sigma, domain)).collect::<Result<_>>()?),
        EventSpec::Transformed { sigma: inner_sigma, inner } => compile(inner, &sigma.compose(inner_sigma), domain)?,
    })
}

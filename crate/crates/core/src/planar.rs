//! Planar duality, crossing-path extraction and the corridor lemma.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{self, path_contains_kpath, t_beta, Direction, KPathRule};
use crate::lattice::{Config, Domain, DualVertex, Edge, Rect, Symmetry, Vertex};

/// A simple nearest-neighbour lattice path. Openness is a property of a
/// configuration, checked with [`LatticePath::is_open`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct LatticePath {
    vertices: Vec<Vertex>,
}

impl LatticePath {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::MalformedPath("empty path".into()));
        }
        for w in vertices.windows(2) {
            if Edge::between(w[0], w[1]).is_none() {
                return Err(Error::MalformedPath(format!("{:?} and {:?} are not adjacent", w[0], w[1])));
            }
        }
        let mut seen = HashSet::with_capacity(vertices.len());
        if let Some(v) = vertices.iter().find(|v| !seen.insert(**v)) {
            return Err(Error::MalformedPath(format!("vertex {v:?} repeats")));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::between(w[0], w[1]).unwrap())
    }

    pub fn is_open(&self, cfg: &Config) -> bool {
        self.edges().all(|e| cfg.is_open(e) == Some(true))
    }

    pub fn transformed(&self, sigma: &Symmetry) -> LatticePath {
        LatticePath { vertices: self.vertices.iter().map(|v| sigma.apply_vertex(*v)).collect() }
    }
}

impl TryFrom<Vec<Vertex>> for LatticePath {
    type Error = Error;
    fn try_from(v: Vec<Vertex>) -> Result<Self> {
        LatticePath::new(v)
    }
}

impl From<LatticePath> for Vec<Vertex> {
    fn from(p: LatticePath) -> Self {
        p.vertices
    }
}

/// Dual vertices `[x0, x1] x [y0, y1]` in half-integer coordinates, stored
/// doubled (`2x` is odd).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualRegion {
    pub x0_2: i32,
    pub x1_2: i32,
    pub y0_2: i32,
    pub y1_2: i32,
}

impl DualRegion {
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.x0_2 as f64 / 2.0, self.x1_2 as f64 / 2.0, self.y0_2 as f64 / 2.0, self.y1_2 as f64 / 2.0)
    }

    /// Dual vertices, as integer labels `(i, j) ≙ (i + 1/2, j + 1/2)`.
    pub fn vertices(&self) -> Vec<DualVertex> {
        let mut out = Vec::new();
        for y in (self.y0_2..=self.y1_2).step_by(2) {
            for x in (self.x0_2..=self.x1_2).step_by(2) {
                out.push(((x - 1) / 2, (y - 1) / 2));
            }
        }
        out
    }
}

/// `[-m + 1/2, m - 1/2] x [-n - 1/2, n + 1/2]`: the dual vertices whose
/// top-bottom dual crossing, through edges dual to those of `R(m, n)`, is
/// the exact complement of the left-right crossing of `R(m, n)`.
pub fn dual_region(m: u32, n: u32) -> Result<DualRegion> {
    if m == 0 || n == 0 {
        return Err(Error::Parameter("dual region dimensions must be >= 1".into()));
    }
    let (m, n) = (m as i32, n as i32);
    Ok(DualRegion { x0_2: -2 * m + 1, x1_2: 2 * m - 1, y0_2: -2 * n - 1, y1_2: 2 * n + 1 })
}

/// Exactly one of: left-right crossing of `R(m, n)`, top-bottom dual
/// crossing of the dual region.
pub fn duality_complement_check(cfg: &Config, m: u32, n: u32) -> Result<bool> {
    DualityChecker::new(m, n, *cfg.domain())?.check(cfg)
}

/// [`duality_complement_check`] with both detectors compiled once.
pub struct DualityChecker {
    primal: events::CompiledEvent,
    dual: events::CompiledEvent,
    scratch: events::Scratch,
}

impl DualityChecker {
    pub fn new(m: u32, n: u32, domain: Domain) -> Result<Self> {
        Ok(Self {
            primal: events::crossing_spec(m, n, Direction::Horizontal, false)?.compile(domain)?,
            dual: events::crossing_spec(m, n, Direction::Vertical, true)?.compile(domain)?,
            scratch: events::Scratch::default(),
        })
    }

    /// Returns `(primal crossing, dual crossing)`.
    pub fn crossings(&mut self, cfg: &Config) -> Result<(bool, bool)> {
        Ok((self.primal.eval(cfg, &mut self.scratch)?, self.dual.eval(cfg, &mut self.scratch)?))
    }

    pub fn check(&mut self, cfg: &Config) -> Result<bool> {
        let (p, d) = self.crossings(cfg)?;
        Ok(p != d)
    }
}

/// Reading order: top row first, left to right.
fn reading_key(v: &Vertex) -> (i32, i32) {
    (-v.1, v.0)
}

const BFS_ORDER: [(i32, i32); 4] = [(0, 1), (-1, 0), (0, -1), (1, 0)];

/// A deterministic open simple path from `a` to `b` inside `region`, or
/// `None`. Breadth-first search from all of `a` at once, sources taken in
/// reading order (top row first, then left to right), neighbours in the
/// order up, left, down, right; the first vertex of `b` discovered ends the
/// search. The result is a shortest connecting path.
pub fn extract_crossing_path(cfg: &Config, region: &Rect, a: &[Vertex], b: &[Vertex]) -> Result<Option<LatticePath>> {
    let window = cfg.domain().window();
    if !window.contains_rect(region) {
        return Err(Error::Domain(format!("region {region:?} exceeds the domain window {window:?}")));
    }
    let targets: HashSet<Vertex> = b.iter().copied().filter(|v| region.contains(*v)).collect();
    let mut sources: Vec<Vertex> = a.iter().copied().filter(|v| region.contains(*v)).collect();
    sources.sort_by_key(reading_key);
    sources.dedup();
    let mut parent: HashMap<Vertex, Option<Vertex>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in &sources {
        if targets.contains(&s) {
            return Ok(Some(LatticePath::new(vec![s])?));
        }
        parent.insert(s, None);
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for d in BFS_ORDER {
            let w = (v.0 + d.0, v.1 + d.1);
            if !region.contains(w) || parent.contains_key(&w) {
                continue;
            }
            if cfg.is_open(Edge::between(v, w).unwrap()) != Some(true) {
                continue;
            }
            parent.insert(w, Some(v));
            if targets.contains(&w) {
                let mut path = vec![w];
                let mut cur = v;
                loop {
                    path.push(cur);
                    match parent[&cur] {
                        Some(p) => cur = p,
                        None => break,
                    }
                }
                path.reverse();
                return Ok(Some(LatticePath::new(path)?));
            }
            queue.push_back(w);
        }
    }
    Ok(None)
}

/// Same rule, run on the mirror image `x -> -x` and mapped back; a second,
/// generally different, witness.
pub fn extract_crossing_path_mirrored(
    cfg: &Config,
    region: &Rect,
    a: &[Vertex],
    b: &[Vertex],
) -> Result<Option<LatticePath>> {
    let sigma = Symmetry::reflection();
    let mirrored = cfg.transformed(&sigma)?;
    let map = |s: &[Vertex]| s.iter().map(|v| sigma.apply_vertex(*v)).collect::<Vec<_>>();
    let path = extract_crossing_path(&mirrored, &sigma.apply_rect(region), &map(a), &map(b))?;
    Ok(path.map(|p| p.transformed(&sigma)))
}

/// Which way round the corridor is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `m`-paths run top to bottom, walls reach the left and right sides,
    /// the tested path crosses top to bottom.
    Standard,
    /// Left-right and top-down switched.
    Swapped,
}

/// Geometry of the corridor for one orientation.
#[derive(Clone, Copy, Debug)]
pub struct CorridorFrame {
    pub s: Rect,
    pub m: u32,
    pub orientation: Orientation,
}

impl CorridorFrame {
    pub fn new(s: Rect, m: u32, orientation: Orientation) -> Result<Self> {
        let frame = Self { s, m, orientation };
        if m == 0 {
            return Err(Error::Parameter("m must be >= 1".into()));
        }
        if !s.contains_rect(&frame.mpath_box()) {
            return Err(Error::Parameter(format!("{s:?} does not contain the m-path box {:?}", frame.mpath_box())));
        }
        Ok(frame)
    }

    /// Maps the frame to the standard orientation.
    fn to_standard(&self) -> Symmetry {
        match self.orientation {
            Orientation::Standard => Symmetry::identity(),
            Orientation::Swapped => Symmetry::rotation(1),
        }
    }

    pub fn mpath_box(&self) -> Rect {
        let (m, t) = (self.m as i32, t_beta(self.m));
        match self.orientation {
            Orientation::Standard => Rect::centered(m + t, m),
            Orientation::Swapped => Rect::centered(m, m + t),
        }
    }

    /// The two `m`-targets.
    pub fn targets(&self) -> (Vec<Vertex>, Vec<Vertex>) {
        let (m, t) = (self.m as i32, t_beta(self.m));
        match self.orientation {
            Orientation::Standard => ((-t..=t).map(|x| (x, m)).collect(), (-t..=t).map(|x| (x, -m)).collect()),
            Orientation::Swapped => ((-t..=t).map(|y| (-m, y)).collect(), (-t..=t).map(|y| (m, y)).collect()),
        }
    }

    /// Sides reached by the two walls.
    pub fn wall_sides(&self) -> (Vec<Vertex>, Vec<Vertex>) {
        match self.orientation {
            Orientation::Standard => (self.s.left_side(), self.s.right_side()),
            Orientation::Swapped => (self.s.top_side(), self.s.bottom_side()),
        }
    }

    /// Sides joined by the crossing path.
    pub fn crossing_sides(&self) -> (Vec<Vertex>, Vec<Vertex>) {
        match self.orientation {
            Orientation::Standard => (self.s.top_side(), self.s.bottom_side()),
            Orientation::Swapped => (self.s.left_side(), self.s.right_side()),
        }
    }

    pub fn is_mpath(&self, path: &LatticePath) -> bool {
        let (up, down) = self.targets();
        let b = self.mpath_box();
        path.vertices().iter().all(|v| b.contains(*v))
            && ((up.contains(&path.first()) && down.contains(&path.last()))
                || (down.contains(&path.first()) && up.contains(&path.last())))
    }

    pub fn contains_mpath(&self, path: &LatticePath) -> Result<bool> {
        let std_path: Vec<Vertex> = path.transformed(&self.to_standard()).vertices().to_vec();
        path_contains_kpath(&std_path, self.m, KPathRule::Permissive)
    }
}

/// An `m`-path together with a path joining it to one side of `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub mpath: LatticePath,
    pub link: LatticePath,
}

impl Wall {
    fn validate(&self, frame: &CorridorFrame, side: &[Vertex], name: &str) -> Result<()> {
        if !frame.is_mpath(&self.mpath) {
            return Err(Error::Input(format!("{name}: not an m-path")));
        }
        if !self.link.vertices().iter().all(|v| frame.s.contains(*v)) {
            return Err(Error::Input(format!("{name}: link leaves S")));
        }
        if !self.mpath.vertices().contains(&self.link.first()) || !side.contains(&self.link.last()) {
            return Err(Error::Input(format!("{name}: link must run from the m-path to its side of S")));
        }
        Ok(())
    }

    fn touches(&self, v: &Vertex) -> bool {
        self.mpath.vertices().contains(v) || self.link.vertices().contains(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorridorVerdict {
    ContainsMPath,
    HitsStructure,
    Violation,
}

/// Does the crossing `pi` of `S` contain an `m`-path or share a vertex with
/// one of the walls? Only a failure of both is a [`CorridorVerdict::Violation`].
pub fn corridor_check(frame: &CorridorFrame, pi: &LatticePath, w: &Wall, w_prime: &Wall) -> Result<CorridorVerdict> {
    let (left, right) = frame.wall_sides();
    w.validate(frame, &left, "W")?;
    w_prime.validate(frame, &right, "W'")?;
    let (top, bottom) = frame.crossing_sides();
    if !pi.vertices().iter().all(|v| frame.s.contains(*v)) || !top.contains(&pi.first()) || !bottom.contains(&pi.last()) {
        return Err(Error::Input("pi must cross S between its two sides".into()));
    }
    if frame.contains_mpath(pi)? {
        return Ok(CorridorVerdict::ContainsMPath);
    }
    if pi.vertices().iter().any(|v| w.touches(v) || w_prime.touches(v)) {
        return Ok(CorridorVerdict::HitsStructure);
    }
    Ok(CorridorVerdict::Violation)
}

/// A `(pi, W, W')` triple in a frame, as recorded for violations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorWitness {
    pub s: Rect,
    pub m: u32,
    pub orientation: Orientation,
    pub pi: LatticePath,
    pub w: Wall,
    pub w_prime: Wall,
}

/// Walls read off `cfg`: the first wall from the standard extraction
/// rule, the second from its mirror image (so the two `m`-paths may differ).
pub fn extract_walls(cfg: &Config, frame: &CorridorFrame) -> Result<Option<(Wall, Wall)>> {
    let (up, down) = frame.targets();
    let (left, right) = frame.wall_sides();
    let b = frame.mpath_box();
    let Some(g) = extract_crossing_path(cfg, &b, &up, &down)? else { return Ok(None) };
    let Some(link) = extract_crossing_path(cfg, &frame.s, g.vertices(), &left)? else { return Ok(None) };
    let Some(g2) = extract_crossing_path_mirrored(cfg, &b, &up, &down)? else { return Ok(None) };
    let Some(link2) = extract_crossing_path_mirrored(cfg, &frame.s, g2.vertices(), &right)? else { return Ok(None) };
    Ok(Some((Wall { mpath: g, link }, Wall { mpath: g2, link: link2 })))
}

/// The crossing of `S` read off `cfg`.
pub fn extract_pi(cfg: &Config, frame: &CorridorFrame) -> Result<Option<LatticePath>> {
    let (top, bottom) = frame.crossing_sides();
    extract_crossing_path(cfg, &frame.s, &top, &bottom)
}

/// Tallies of a corridor sweep.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CorridorSweep {
    pub configurations: u64,
    pub triples: u64,
    pub contains_mpath: u64,
    pub hits_structure: u64,
    pub violations: Vec<CorridorWitness>,
}

impl CorridorSweep {
    fn record(&mut self, frame: &CorridorFrame, pi: LatticePath, w: Wall, w_prime: Wall) -> Result<()> {
        self.triples += 1;
        match corridor_check(frame, &pi, &w, &w_prime)? {
            CorridorVerdict::ContainsMPath => self.contains_mpath += 1,
            CorridorVerdict::HitsStructure => self.hits_structure += 1,
            CorridorVerdict::Violation => self.violations.push(CorridorWitness {
                s: frame.s,
                m: frame.m,
                orientation: frame.orientation,
                pi,
                w,
                w_prime,
            }),
        }
        Ok(())
    }
}

/// Every configuration of `S`, with walls and crossing all read off the
/// same configuration. `S` must have at most 26 edges.
pub fn corridor_exhaustive(frame: &CorridorFrame) -> Result<CorridorSweep> {
    let d = Domain::Rect(frame.s);
    let edges = d.edge_count();
    if edges > 26 {
        return Err(Error::Parameter(format!("{edges} edges is too many for an exhaustive sweep")));
    }
    let mut sweep = CorridorSweep::default();
    for bits in 0u64..(1u64 << edges) {
        let cfg = Config::from_words(d, vec![bits])?;
        sweep.configurations += 1;
        let Some(pi) = extract_pi(&cfg, frame)? else { continue };
        let Some((w, w2)) = extract_walls(&cfg, frame)? else { continue };
        sweep.record(frame, pi, w, w2)?;
    }
    Ok(sweep)
}

/// Random triples: walls from Bernoulli(`p_walls`) configurations, the
/// crossing from an independent Bernoulli(`p_pi`) configuration, until
/// `triples` are collected (or `100 * triples` attempts).
pub fn corridor_sampled(frame: &CorridorFrame, triples: u64, p_walls: f64, p_pi: f64, seed: u64) -> Result<CorridorSweep> {
    let d = Domain::Rect(frame.s);
    let mut sweep = CorridorSweep::default();
    let mut attempt = 0u64;
    while sweep.triples < triples && attempt < 100 * triples {
        let walls_cfg = crate::models::sample_bernoulli(d, p_walls, crate::rng::derive_seed(seed, &[attempt, 0]))?;
        let pi_cfg = crate::models::sample_bernoulli(d, p_pi, crate::rng::derive_seed(seed, &[attempt, 1]))?;
        attempt += 1;
        sweep.configurations += 1;
        let Some((w, w2)) = extract_walls(&walls_cfg, frame)? else { continue };
        let Some(pi) = extract_pi(&pi_cfg, frame)? else { continue };
        sweep.record(frame, pi, w, w2)?;
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_region_of_unit_square() {
        let d = dual_region(1, 1).unwrap();
        assert_eq!(d.bounds(), (-0.5, 0.5, -1.5, 1.5));
        let v = d.vertices();
        assert_eq!(v.len(), 8);
        assert!(v.contains(&(-1, -2)) && v.contains(&(0, 1)));
    }

    #[test]
    fn duality_at_endpoints() {
        let d = Domain::Rect(Rect::centered(3, 2));
        assert!(duality_complement_check(&Config::all_open(d), 3, 2).unwrap());
        assert!(duality_complement_check(&Config::all_closed(d), 3, 2).unwrap());
    }

    #[test]
    fn extraction_on_open_rectangle() {
        let r = Rect::centered(2, 1);
        let cfg = Config::all_open(Domain::Rect(r));
        let p = extract_crossing_path(&cfg, &r, &r.left_side(), &r.right_side()).unwrap().unwrap();
        assert_eq!(p.vertices(), &[(-2, 1), (-1, 1), (0, 1), (1, 1), (2, 1)]);
        let closed = Config::all_closed(Domain::Rect(r));
        assert!(extract_crossing_path(&closed, &r, &r.left_side(), &r.right_side()).unwrap().is_none());
    }

    #[test]
    fn malformed_paths() {
        assert!(LatticePath::new(vec![(0, 0), (1, 1)]).is_err());
        assert!(LatticePath::new(vec![(0, 0), (1, 0), (0, 0)]).is_err());
        assert!(serde_json::from_str::<LatticePath>("[[0,0],[2,0]]").is_err());
        let p: LatticePath = serde_json::from_str("[[0,0],[0,1]]").unwrap();
        assert_eq!(p.len(), 2);
    }

    fn frame() -> CorridorFrame {
        CorridorFrame::new(Rect::centered(6, 4), 2, Orientation::Standard).unwrap()
    }

    fn column(x: i32, y0: i32, y1: i32) -> LatticePath {
        LatticePath::new((y0..=y1).rev().map(|y| (x, y)).collect()).unwrap()
    }

    fn row(y: i32, x0: i32, x1: i32) -> LatticePath {
        LatticePath::new((x0..=x1).map(|x| (x, y)).collect()).unwrap()
    }

    #[test]
    fn corridor_fixtures() {
        let f = frame();
        let g = column(0, -2, 2);
        let w = Wall { mpath: g.clone(), link: LatticePath::new((-6..=0).rev().map(|x| (x, 0)).collect()).unwrap() };
        let w2 = Wall { mpath: g, link: row(0, 0, 6) };
        // the central column contains an m-path
        assert_eq!(corridor_check(&f, &column(0, -4, 4), &w, &w2).unwrap(), CorridorVerdict::ContainsMPath);
        // any other column crosses the horizontal walls
        assert_eq!(corridor_check(&f, &column(4, -4, 4), &w, &w2).unwrap(), CorridorVerdict::HitsStructure);
        // bad inputs
        let bad = Wall { mpath: row(0, 0, 2), link: row(0, 2, 6) };
        assert!(matches!(corridor_check(&f, &column(4, -4, 4), &w, &bad), Err(Error::Input(_))));
        assert!(matches!(corridor_check(&f, &column(4, -3, 4), &w, &w2), Err(Error::Input(_))));
    }

    #[test]
    fn swapped_frame_fixtures() {
        let f = CorridorFrame::new(Rect::centered(4, 6), 2, Orientation::Swapped).unwrap();
        let g = row(0, -2, 2);
        let w = Wall { mpath: g.clone(), link: LatticePath::new((0..=6).map(|y| (0, y)).collect()).unwrap() };
        let w2 = Wall { mpath: g, link: LatticePath::new((-6..=0).rev().map(|y| (0, y)).collect()).unwrap() };
        assert_eq!(corridor_check(&f, &row(0, -4, 4), &w, &w2).unwrap(), CorridorVerdict::ContainsMPath);
        assert_eq!(corridor_check(&f, &row(3, -4, 4), &w, &w2).unwrap(), CorridorVerdict::HitsStructure);
    }

    #[test]
    fn witness_json_round_trip() {
        let f = frame();
        let g = column(0, -2, 2);
        let wit = CorridorWitness {
            s: f.s,
            m: 2,
            orientation: Orientation::Standard,
            pi: column(1, -4, 4),
            w: Wall { mpath: g.clone(), link: LatticePath::new((-6..=0).rev().map(|x| (x, 0)).collect()).unwrap() },
            w_prime: Wall { mpath: g, link: row(0, 0, 6) },
        };
        let s = serde_json::to_string(&wit).unwrap();
        assert_eq!(serde_json::from_str::<CorridorWitness>(&s).unwrap(), wit);
    }
}

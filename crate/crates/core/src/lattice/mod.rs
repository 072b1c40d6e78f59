//! Square-lattice geometry in finite windows: rectangles, primal and dual
//! edges, the symmetry group of `Z^2`, and bit-packed configurations.
//!
//! Points are handled internally in *doubled* coordinates: a primal vertex
//! `(x, y)` sits at `(2x, 2y)`, a dual vertex `(x + 1/2, y + 1/2)` at
//! `(2x + 1, 2y + 1)`, and an edge is identified with its midpoint. A primal
//! edge and the dual edge crossing it share the same midpoint, so the dual
//! pairing is the identity in doubled coordinates and every symmetry acts on
//! both lattices through the same map.
//!
//! Dual vertices are named by the integer pair `(i, j)` standing for
//! `(i + 1/2, j + 1/2)`.

mod codec;
mod config;

pub use codec::{config_from_json, config_to_json, decode_config, encode_config, CONFIG_MAGIC};
pub use config::{Config, Domain};

use serde::{Deserialize, Serialize};

/// A primal lattice vertex.
pub type Vertex = (i32, i32);

/// A dual lattice vertex `(i, j)`, standing for the point `(i + 1/2, j + 1/2)`.
pub type DualVertex = (i32, i32);

/// Axis-aligned rectangle `[cx - hx, cx + hx] x [cy - hy, cy + hy]` of lattice
/// vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub cx: i32,
    pub cy: i32,
    pub hx: i32,
    pub hy: i32,
}

impl Rect {
    pub fn new(cx: i32, cy: i32, hx: i32, hy: i32) -> Self {
        assert!(hx >= 0 && hy >= 0, "negative half-width in Rect");
        Self { cx, cy, hx, hy }
    }

    /// `R(m, n) = [-m, m] x [-n, n]`.
    pub fn centered(hx: i32, hy: i32) -> Self {
        Self::new(0, 0, hx, hy)
    }

    /// `Λ_n = [-n, n]^2`.
    pub fn square(n: i32) -> Self {
        Self::new(0, 0, n, n)
    }

    pub fn x0(&self) -> i32 {
        self.cx - self.hx
    }
    pub fn x1(&self) -> i32 {
        self.cx + self.hx
    }
    pub fn y0(&self) -> i32 {
        self.cy - self.hy
    }
    pub fn y1(&self) -> i32 {
        self.cy + self.hy
    }
    pub fn width(&self) -> usize {
        (2 * self.hx + 1) as usize
    }
    pub fn height(&self) -> usize {
        (2 * self.hy + 1) as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.width() * self.height()
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self) as usize
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.0 >= self.x0() && v.0 <= self.x1() && v.1 >= self.y0() && v.1 <= self.y1()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0() >= self.x0()
            && other.x1() <= self.x1()
            && other.y0() >= self.y0()
            && other.y1() <= self.y1()
    }

    pub fn on_boundary(&self, v: Vertex) -> bool {
        self.contains(v)
            && (v.0 == self.x0() || v.0 == self.x1() || v.1 == self.y0() || v.1 == self.y1())
    }

    pub fn translate(&self, tx: i32, ty: i32) -> Rect {
        Rect::new(self.cx + tx, self.cy + ty, self.hx, self.hy)
    }

    /// Smallest rectangle with integer center containing both.
    pub fn hull(&self, other: &Rect) -> Rect {
        let (x0, mut x1) = (self.x0().min(other.x0()), self.x1().max(other.x1()));
        let (y0, mut y1) = (self.y0().min(other.y0()), self.y1().max(other.y1()));
        if (x1 - x0) % 2 != 0 {
            x1 += 1;
        }
        if (y1 - y0) % 2 != 0 {
            y1 += 1;
        }
        Rect::new((x0 + x1) / 2, (y0 + y1) / 2, (x1 - x0) / 2, (y1 - y0) / 2)
    }

    /// Row-major vertex index (row `y0` first).
    pub fn vertex_index(&self, v: Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let i = (v.0 - self.x0()) as usize;
        let j = (v.1 - self.y0()) as usize;
        Some(j * self.width() + i)
    }

    pub fn vertex_at(&self, idx: usize) -> Vertex {
        let w = self.width();
        (self.x0() + (idx % w) as i32, self.y0() + (idx / w) as i32)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + 'static {
        let (x0, x1) = (self.x0(), self.x1());
        (self.y0()..=self.y1()).flat_map(move |y| (x0..=x1).map(move |x| (x, y)))
    }

    /// Edges with both endpoints in the rectangle, in the documented config
    /// order: row-major vertices, horizontal edge before vertical edge.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + 'static {
        let r = *self;
        r.vertices().flat_map(move |(x, y)| {
            let h = (x < r.x1()).then_some(Edge::h(x, y));
            let v = (y < r.y1()).then_some(Edge::v(x, y));
            h.into_iter().chain(v)
        })
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        let (a, b) = e.endpoints();
        self.contains(a) && self.contains(b)
    }

    /// Vertices of the left side `{x0} x [y0, y1]`.
    pub fn left_side(&self) -> Vec<Vertex> {
        (self.y0()..=self.y1()).map(|y| (self.x0(), y)).collect()
    }
    pub fn right_side(&self) -> Vec<Vertex> {
        (self.y0()..=self.y1()).map(|y| (self.x1(), y)).collect()
    }
    pub fn top_side(&self) -> Vec<Vertex> {
        (self.x0()..=self.x1()).map(|x| (x, self.y1())).collect()
    }
    pub fn bottom_side(&self) -> Vec<Vertex> {
        (self.x0()..=self.x1()).map(|x| (x, self.y0())).collect()
    }
}

/// Number of nearest-neighbour edges with both endpoints in `r`:
/// `2hx(2hy+1) + (2hx+1)2hy`.
pub fn edge_count(r: &Rect) -> u64 {
    let (hx, hy) = (r.hx as u64, r.hy as u64);
    2 * hx * (2 * hy + 1) + (2 * hx + 1) * 2 * hy
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    /// From `(x, y)` to `(x + 1, y)`.
    H,
    /// From `(x, y)` to `(x, y + 1)`.
    V,
}

/// A primal edge, anchored at its lower-left endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub x: i32,
    pub y: i32,
    pub dir: Dir,
}

impl Edge {
    pub fn h(x: i32, y: i32) -> Self {
        Self { x, y, dir: Dir::H }
    }
    pub fn v(x: i32, y: i32) -> Self {
        Self { x, y, dir: Dir::V }
    }

    /// The edge joining two adjacent vertices, if they are adjacent.
    pub fn between(a: Vertex, b: Vertex) -> Option<Self> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match (hi.0 - lo.0, hi.1 - lo.1) {
            (1, 0) => Some(Edge::h(lo.0, lo.1)),
            (0, 1) => Some(Edge::v(lo.0, lo.1)),
            _ => None,
        }
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        match self.dir {
            Dir::H => ((self.x, self.y), (self.x + 1, self.y)),
            Dir::V => ((self.x, self.y), (self.x, self.y + 1)),
        }
    }

    pub fn midpoint2(&self) -> (i32, i32) {
        match self.dir {
            Dir::H => (2 * self.x + 1, 2 * self.y),
            Dir::V => (2 * self.x, 2 * self.y + 1),
        }
    }

    pub fn from_midpoint2(p: (i32, i32)) -> Option<Self> {
        match (p.0.rem_euclid(2), p.1.rem_euclid(2)) {
            (1, 0) => Some(Edge::h((p.0 - 1) / 2, p.1 / 2)),
            (0, 1) => Some(Edge::v(p.0 / 2, (p.1 - 1) / 2)),
            _ => None,
        }
    }
}

/// A dual edge between dual vertices, anchored at its lower-left endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualEdge {
    pub x: i32,
    pub y: i32,
    pub dir: Dir,
}

impl DualEdge {
    pub fn h(x: i32, y: i32) -> Self {
        Self { x, y, dir: Dir::H }
    }
    pub fn v(x: i32, y: i32) -> Self {
        Self { x, y, dir: Dir::V }
    }

    pub fn endpoints(&self) -> (DualVertex, DualVertex) {
        match self.dir {
            Dir::H => ((self.x, self.y), (self.x + 1, self.y)),
            Dir::V => ((self.x, self.y), (self.x, self.y + 1)),
        }
    }

    pub fn midpoint2(&self) -> (i32, i32) {
        match self.dir {
            Dir::H => (2 * self.x + 2, 2 * self.y + 1),
            Dir::V => (2 * self.x + 1, 2 * self.y + 2),
        }
    }

    pub fn from_midpoint2(p: (i32, i32)) -> Option<Self> {
        match (p.0.rem_euclid(2), p.1.rem_euclid(2)) {
            (0, 1) => Some(DualEdge::h((p.0 - 2) / 2, (p.1 - 1) / 2)),
            (1, 0) => Some(DualEdge::v((p.0 - 1) / 2, (p.1 - 2) / 2)),
            _ => None,
        }
    }
}

/// The dual edge crossing `e`.
pub fn dual_edge(e: Edge) -> DualEdge {
    DualEdge::from_midpoint2(e.midpoint2()).expect("primal midpoint is a dual midpoint")
}

/// The primal edge crossed by `d`.
pub fn primal_edge(d: DualEdge) -> Edge {
    Edge::from_midpoint2(d.midpoint2()).expect("dual midpoint is a primal midpoint")
}

type Mat = [[i32; 2]; 2];

const ROT: [Mat; 4] = [
    [[1, 0], [0, 1]],
    [[0, -1], [1, 0]],
    [[-1, 0], [0, -1]],
    [[0, 1], [-1, 0]],
];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_apply(m: &Mat, p: (i32, i32)) -> (i32, i32) {
    (m[0][0] * p.0 + m[0][1] * p.1, m[1][0] * p.0 + m[1][1] * p.1)
}

/// An element of the symmetry group of `Z^2`.
///
/// Acts as: rotate counter-clockwise by `rotation` quarter-turns about the
/// origin, then (if `reflect`) mirror in the vertical axis `x -> -x`, then
/// translate by `translation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Symmetry {
    pub rotation: u8,
    pub reflect: bool,
    pub translation: (i32, i32),
}

impl Symmetry {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn translation(tx: i32, ty: i32) -> Self {
        Self { translation: (tx, ty), ..Self::default() }
    }

    pub fn rotation(quarter_turns: u8) -> Self {
        Self { rotation: quarter_turns % 4, ..Self::default() }
    }

    pub fn reflection() -> Self {
        Self { reflect: true, ..Self::default() }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation % 4 == 0 && !self.reflect && self.translation == (0, 0)
    }

    fn linear(&self) -> Mat {
        let r = ROT[(self.rotation % 4) as usize];
        if self.reflect {
            mat_mul(&[[-1, 0], [0, 1]], &r)
        } else {
            r
        }
    }

    fn from_linear(m: Mat, translation: (i32, i32)) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let reflect = det < 0;
        let r = if reflect { mat_mul(&[[-1, 0], [0, 1]], &m) } else { m };
        let rotation = ROT.iter().position(|c| *c == r).expect("orthogonal lattice matrix") as u8;
        Self { rotation, reflect, translation }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Symmetry) -> Symmetry {
        let l = self.linear();
        let lt = mat_apply(&l, other.translation);
        Symmetry::from_linear(
            mat_mul(&l, &other.linear()),
            (lt.0 + self.translation.0, lt.1 + self.translation.1),
        )
    }

    pub fn inverse(&self) -> Symmetry {
        let l = self.linear();
        let lt = [[l[0][0], l[1][0]], [l[0][1], l[1][1]]];
        let t = mat_apply(&lt, self.translation);
        Symmetry::from_linear(lt, (-t.0, -t.1))
    }

    /// Action on doubled coordinates.
    pub fn apply2(&self, p: (i32, i32)) -> (i32, i32) {
        let (x, y) = mat_apply(&self.linear(), p);
        (x + 2 * self.translation.0, y + 2 * self.translation.1)
    }

    pub fn apply_vertex(&self, v: Vertex) -> Vertex {
        let (x, y) = mat_apply(&self.linear(), v);
        (x + self.translation.0, y + self.translation.1)
    }

    pub fn apply_dual_vertex(&self, v: DualVertex) -> DualVertex {
        let (x, y) = self.apply2((2 * v.0 + 1, 2 * v.1 + 1));
        ((x - 1) / 2, (y - 1) / 2)
    }

    pub fn apply_edge(&self, e: Edge) -> Edge {
        Edge::from_midpoint2(self.apply2(e.midpoint2())).expect("symmetries preserve the lattice")
    }

    pub fn apply_dual_edge(&self, e: DualEdge) -> DualEdge {
        DualEdge::from_midpoint2(self.apply2(e.midpoint2())).expect("symmetries preserve the lattice")
    }

    pub fn apply_rect(&self, r: &Rect) -> Rect {
        let (cx, cy) = self.apply_vertex((r.cx, r.cy));
        if self.rotation % 2 == 1 {
            Rect::new(cx, cy, r.hy, r.hx)
        } else {
            Rect::new(cx, cy, r.hx, r.hy)
        }
    }
}

/// True iff every edge of `σ·support` lies in the edge set of `window`.
pub fn is_admissible(sigma: &Symmetry, support: &Rect, window: &Rect) -> bool {
    window.contains_rect(&sigma.apply_rect(support))
}

/// Membership in `Σ_m = {σ : σ·Λ_m ⊂ Λ_2m}`.
pub fn in_sigma_m(sigma: &Symmetry, m: i32) -> bool {
    is_admissible(sigma, &Rect::square(m), &Rect::square(2 * m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert_eq!(edge_count(&Rect::centered(1, 1)), 12);
        assert_eq!(edge_count(&Rect::centered(0, 5)), 10);
        assert_eq!(edge_count(&Rect::centered(2, 1)), 22);
        for r in [Rect::centered(3, 2), Rect::new(4, -1, 0, 0), Rect::new(-2, 5, 4, 1)] {
            assert_eq!(r.edges().count() as u64, edge_count(&r));
        }
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(Symmetry::identity().apply_vertex((3, -7)), (3, -7));
        assert_eq!(Symmetry::rotation(1).apply_vertex((1, 0)), (0, 1));
        assert_eq!(Symmetry::reflection().apply_rect(&Rect::new(1, 0, 2, 1)), Rect::new(-1, 0, 2, 1));
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(&Symmetry::identity(), &Rect::square(2), &Rect::square(2)));
        assert!(!is_admissible(&Symmetry::translation(3, 0), &Rect::square(2), &Rect::square(4)));
        assert!(is_admissible(&Symmetry::rotation(1), &Rect::centered(2, 1), &Rect::square(2)));
    }

    #[test]
    fn sigma_m_membership() {
        for m in 1..6 {
            for rotation in 0..4 {
                for reflect in [false, true] {
                    for tx in -m..=m {
                        for ty in -m..=m {
                            let s = Symmetry { rotation, reflect, translation: (tx, ty) };
                            assert!(in_sigma_m(&s, m));
                        }
                    }
                }
            }
            assert!(!in_sigma_m(&Symmetry::translation(m + 1, 0), m));
        }
    }

    #[test]
    fn dual_pairing_examples() {
        assert_eq!(dual_edge(Edge::h(0, 0)), DualEdge::v(0, -1));
        assert_eq!(dual_edge(Edge::v(0, 0)), DualEdge::h(-1, 0));
        for e in Rect::square(2).edges() {
            assert_eq!(primal_edge(dual_edge(e)), e);
            let d = dual_edge(e);
            assert_eq!(dual_edge(primal_edge(d)), d);
            // the two edges cross perpendicularly at their common midpoint
            assert_ne!(d.dir, e.dir);
        }
    }

    #[test]
    fn composition_and_inverse() {
        let all: Vec<Symmetry> = (0..4)
            .flat_map(|r| [false, true].map(move |f| Symmetry { rotation: r, reflect: f, translation: (r as i32 - 1, 2) }))
            .collect();
        for s in &all {
            for t in &all {
                for v in [(0, 0), (1, 0), (3, -2), (-5, 7)] {
                    assert_eq!(s.compose(t).apply_vertex(v), s.apply_vertex(t.apply_vertex(v)));
                }
            }
            assert!(s.compose(&s.inverse()).is_identity());
            assert!(s.inverse().compose(s).is_identity());
        }
    }

    #[test]
    fn dual_vertex_action_matches_geometry() {
        let s = Symmetry { rotation: 1, reflect: true, translation: (2, -1) };
        for d in [DualEdge::h(0, 0), DualEdge::v(-3, 2)] {
            let (a, b) = d.endpoints();
            let img = s.apply_dual_edge(d);
            let (ia, ib) = img.endpoints();
            let mapped = [s.apply_dual_vertex(a), s.apply_dual_vertex(b)];
            assert!(mapped.contains(&ia) && mapped.contains(&ib));
        }
    }

    #[test]
    fn hull_contains_both() {
        let a = Rect::new(-3, 0, 2, 1);
        let b = Rect::new(4, 5, 1, 1);
        let h = a.hull(&b);
        assert!(h.contains_rect(&a) && h.contains_rect(&b));
    }
}

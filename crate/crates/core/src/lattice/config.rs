use serde::{Deserialize, Serialize};

use super::{DualEdge, Edge, Rect, Symmetry};
use crate::error::{Error, Result};

/// The finite graph a configuration lives on.
///
/// A torus of side `N` has vertices `[-N/2, N/2 - 1]^2` with periodic
/// wrap-around; events on a torus must fit in the centered window of
/// half-width `N/4`, where wrap-around cannot reach them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Rect(Rect),
    Torus { side: u32 },
}

impl Domain {
    pub fn torus(side: u32) -> Result<Self> {
        if side < 4 || side % 2 != 0 {
            return Err(Error::Parameter(format!("torus side must be even and >= 4, got {side}")));
        }
        Ok(Domain::Torus { side })
    }

    pub fn edge_count(&self) -> usize {
        match self {
            Domain::Rect(r) => r.edge_count(),
            Domain::Torus { side } => 2 * (*side as usize) * (*side as usize),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Domain::Rect(r) => r.vertex_count(),
            Domain::Torus { side } => (*side as usize) * (*side as usize),
        }
    }

    /// The region in which events may be measured.
    pub fn window(&self) -> Rect {
        match self {
            Domain::Rect(r) => *r,
            Domain::Torus { side } => Rect::square((*side / 4) as i32),
        }
    }

    /// Position of `e` in the documented bit order, if `e` belongs to the
    /// domain. Rect order: row-major vertices from the bottom-left corner,
    /// the horizontal edge before the vertical edge at each vertex. Torus
    /// order: row-major over `[-N/2, N/2)^2`, two edges (H, V) per vertex.
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        match self {
            Domain::Rect(r) => {
                let (w, h) = (r.width(), r.height());
                if e.x < r.x0() || e.y < r.y0() {
                    return None;
                }
                let i = (e.x - r.x0()) as usize;
                let j = (e.y - r.y0()) as usize;
                let base = j * (2 * w - 1);
                match e.dir {
                    super::Dir::H => {
                        if i + 1 >= w || j >= h {
                            return None;
                        }
                        Some(if j + 1 < h { base + 2 * i } else { base + i })
                    }
                    super::Dir::V => {
                        if i >= w || j + 1 >= h {
                            return None;
                        }
                        Some(base + 2 * i + usize::from(i + 1 < w))
                    }
                }
            }
            Domain::Torus { side } => {
                let n = *side as i32;
                let col = (e.x + n / 2).rem_euclid(n) as usize;
                let row = (e.y + n / 2).rem_euclid(n) as usize;
                Some(2 * (row * n as usize + col) + usize::from(e.dir == super::Dir::V))
            }
        }
    }

    /// Inverse of [`Domain::edge_index`].
    pub fn edge_at(&self, idx: usize) -> Edge {
        match self {
            Domain::Rect(r) => {
                let (w, h) = (r.width(), r.height());
                let row_len = 2 * w - 1;
                let j = (idx / row_len).min(h - 1);
                let rem = idx - j * row_len;
                let (x0, y) = (r.x0(), r.y0() + j as i32);
                if j + 1 == h {
                    Edge::h(x0 + rem as i32, y)
                } else if rem == 2 * (w - 1) {
                    Edge::v(x0 + (w - 1) as i32, y)
                } else if rem % 2 == 0 {
                    Edge::h(x0 + (rem / 2) as i32, y)
                } else {
                    Edge::v(x0 + (rem / 2) as i32, y)
                }
            }
            Domain::Torus { side } => {
                let n = *side as usize;
                let v = idx / 2;
                let (x, y) = ((v % n) as i32 - (n / 2) as i32, (v / n) as i32 - (n / 2) as i32);
                if idx % 2 == 0 {
                    Edge::h(x, y)
                } else {
                    Edge::v(x, y)
                }
            }
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edge_count()).map(move |i| self.edge_at(i))
    }
}

/// A percolation configuration: one open/closed bit per primal edge of the
/// domain, packed 64 edges per word in [`Domain::edge_index`] order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    domain: Domain,
    bits: Vec<u64>,
}

impl Config {
    pub fn all_closed(domain: Domain) -> Self {
        let words = domain.edge_count().div_ceil(64);
        Self { domain, bits: vec![0; words] }
    }

    pub fn all_open(domain: Domain) -> Self {
        let mut c = Self::all_closed(domain);
        c.bits.iter_mut().for_each(|w| *w = u64::MAX);
        c.mask_tail();
        c
    }

    pub fn from_fn(domain: Domain, mut open: impl FnMut(Edge) -> bool) -> Self {
        let mut c = Self::all_closed(domain);
        for idx in 0..domain.edge_count() {
            if open(domain.edge_at(idx)) {
                c.set_index(idx, true);
            }
        }
        c
    }

    /// Build from raw words; bits beyond the edge count must be zero.
    pub fn from_words(domain: Domain, bits: Vec<u64>) -> Result<Self> {
        if bits.len() != domain.edge_count().div_ceil(64) {
            return Err(Error::Format(format!(
                "expected {} words for {} edges, got {}",
                domain.edge_count().div_ceil(64),
                domain.edge_count(),
                bits.len()
            )));
        }
        let c = Self { domain, bits };
        let mut masked = c.clone();
        masked.mask_tail();
        if masked.bits != c.bits {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Ok(c)
    }

    fn mask_tail(&mut self) {
        let rem = self.domain.edge_count() % 64;
        if rem != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.bits
    }

    pub fn edge_count(&self) -> usize {
        self.domain.edge_count()
    }

    #[inline]
    pub fn get_index(&self, idx: usize) -> bool {
        (self.bits[idx >> 6] >> (idx & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_index(&mut self, idx: usize, open: bool) {
        let mask = 1u64 << (idx & 63);
        if open {
            self.bits[idx >> 6] |= mask;
        } else {
            self.bits[idx >> 6] &= !mask;
        }
    }

    pub fn is_open(&self, e: Edge) -> Option<bool> {
        self.domain.edge_index(e).map(|i| self.get_index(i))
    }

    /// Dual edge status: open iff the crossed primal edge is closed.
    pub fn dual_open(&self, d: DualEdge) -> Option<bool> {
        self.is_open(super::primal_edge(d)).map(|b| !b)
    }

    pub fn set(&mut self, e: Edge, open: bool) -> Result<()> {
        let idx = self
            .domain
            .edge_index(e)
            .ok_or_else(|| Error::Domain(format!("edge {e:?} outside domain")))?;
        self.set_index(idx, open);
        Ok(())
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Pointwise order `self <= other` (same domain).
    pub fn le(&self, other: &Config) -> bool {
        self.domain == other.domain && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// The image configuration `σ·ω`, with `(σ·ω)(σ e) = ω(e)`, on the
    /// image rectangle. Only rectangle domains are supported.
    pub fn transformed(&self, sigma: &Symmetry) -> Result<Config> {
        let Domain::Rect(r) = self.domain else {
            return Err(Error::Domain("only rectangle configurations can be transformed".into()));
        };
        let image = Domain::Rect(sigma.apply_rect(&r));
        let inv = sigma.inverse();
        Ok(Config::from_fn(image, |e| self.is_open(inv.apply_edge(e)).unwrap_or(false)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rect_edge_index_bijection(cx in -5i32..5, cy in -5i32..5, hx in 0i32..5, hy in 0i32..5) {
            let d = Domain::Rect(Rect::new(cx, cy, hx, hy));
            let r = Rect::new(cx, cy, hx, hy);
            for (k, e) in r.edges().enumerate() {
                prop_assert_eq!(d.edge_index(e), Some(k));
                prop_assert_eq!(d.edge_at(k), e);
            }
        }
    }

    #[test]
    fn torus_edge_index_bijection() {
        let d = Domain::torus(6).unwrap();
        for k in 0..d.edge_count() {
            assert_eq!(d.edge_index(d.edge_at(k)), Some(k));
        }
        // wrap-around
        assert_eq!(d.edge_index(Edge::h(3, 0)), d.edge_index(Edge::h(-3, 0)));
    }

    #[test]
    fn outside_edges_have_no_index() {
        let d = Domain::Rect(Rect::centered(1, 1));
        assert_eq!(d.edge_index(Edge::h(1, 0)), None);
        assert_eq!(d.edge_index(Edge::v(0, 1)), None);
        assert_eq!(d.edge_index(Edge::h(-2, 0)), None);
        assert!(d.edge_index(Edge::h(0, 1)).is_some());
    }

    #[test]
    fn all_open_respects_padding() {
        let d = Domain::Rect(Rect::centered(1, 1));
        let c = Config::all_open(d);
        assert_eq!(c.open_count(), 12);
        assert!(Config::from_words(d, c.words().to_vec()).is_ok());
        assert!(Config::from_words(d, vec![u64::MAX]).is_err());
    }

    #[test]
    fn transform_moves_edges() {
        let d = Domain::Rect(Rect::centered(2, 1));
        let mut c = Config::all_closed(d);
        c.set(Edge::h(1, 1), true).unwrap();
        let s = Symmetry::rotation(1);
        let t = c.transformed(&s).unwrap();
        assert_eq!(t.open_count(), 1);
        assert_eq!(t.is_open(s.apply_edge(Edge::h(1, 1))), Some(true));
    }
}

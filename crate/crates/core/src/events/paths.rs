//! `k`-paths inside longer paths, and the search for an open `ℓ`-path that
//! contains none.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{mpath_box, t_beta};
use crate::error::{Error, Result};
use crate::lattice::{Config, Domain, Rect, Symmetry, Vertex};

pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// Which subsegments count as a `k`-path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KPathRule {
    /// Either orientation: one end in each `k`-target.
    #[default]
    Permissive,
    /// Only subsegments running from the upper to the lower `k`-target in
    /// the order of the path.
    Strict,
}

/// Outcome of [`exists_lpath_avoiding_kpath`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSearch {
    Found,
    NotFound,
    BudgetExhausted,
}

impl PathSearch {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            PathSearch::Found => Some(true),
            PathSearch::NotFound => Some(false),
            PathSearch::BudgetExhausted => None,
        }
    }
}

/// `k`-box membership and `k`-target flags.
#[derive(Clone, Copy)]
struct KBox {
    rect: Rect,
    k: i32,
    t: i32,
}

impl KBox {
    fn new(k: u32) -> Self {
        Self { rect: mpath_box(k), k: k as i32, t: t_beta(k) }
    }

    fn inside(&self, v: Vertex) -> bool {
        self.rect.contains(v)
    }

    fn top(&self, v: Vertex) -> bool {
        v.1 == self.k && v.0.abs() <= self.t
    }

    fn bottom(&self, v: Vertex) -> bool {
        v.1 == -self.k && v.0.abs() <= self.t
    }
}

fn validate_path(path: &[Vertex]) -> Result<()> {
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 1 {
            return Err(Error::MalformedPath(format!("{a:?} and {b:?} are not adjacent")));
        }
    }
    let mut seen = HashSet::with_capacity(path.len());
    for v in path {
        if !seen.insert(*v) {
            return Err(Error::MalformedPath(format!("vertex {v:?} repeats")));
        }
    }
    Ok(())
}

/// Does some contiguous subsegment of `path` lie in `R(k + t_β(k), k)`
/// with its two ends in the two `k`-targets?
///
/// A subsegment inside the box lies in one maximal in-box run of the path,
/// and any pair of target visits within a run bounds such a subsegment, so
/// it suffices to check each run for visits to both targets.
pub fn path_contains_kpath(path: &[Vertex], k: u32, rule: KPathRule) -> Result<bool> {
    validate_path(path)?;
    let kb = KBox::new(k);
    let (mut up, mut down) = (false, false);
    for &v in path {
        if !kb.inside(v) {
            up = false;
            down = false;
            continue;
        }
        match rule {
            KPathRule::Permissive => {
                up |= kb.top(v);
                down |= kb.bottom(v);
                if up && down {
                    return Ok(true);
                }
            }
            KPathRule::Strict => {
                if up && kb.bottom(v) {
                    return Ok(true);
                }
                up |= kb.top(v);
            }
        }
    }
    Ok(false)
}

/// Quadratic scan over all subsegments; the reference for
/// [`path_contains_kpath`].
pub fn path_contains_kpath_naive(path: &[Vertex], k: u32, rule: KPathRule) -> Result<bool> {
    validate_path(path)?;
    let kb = KBox::new(k);
    for i in 0..path.len() {
        for j in i..path.len() {
            if !path[i..=j].iter().all(|&v| kb.inside(v)) {
                break;
            }
            let forward = kb.top(path[i]) && kb.bottom(path[j]);
            let backward = kb.bottom(path[i]) && kb.top(path[j]);
            if forward || (rule == KPathRule::Permissive && backward) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

const IN_K: u8 = 1;
const K_TOP: u8 = 2;
const K_BOTTOM: u8 = 4;
const L_TOP: u8 = 8;
const L_BOTTOM: u8 = 16;

enum Completion {
    None,
    Walk,
    Simple,
}

struct SearchBufs {
    seen: Vec<u32>,
    parent: Vec<u32>,
    stamp: u32,
    queue: Vec<u32>,
    route: Vec<u32>,
}

/// The `ℓ`-box as a search graph, with neighbours listed downward first.
pub(crate) struct MPathGraph {
    rect: Rect,
    flags: Vec<u8>,
    /// Four slots per vertex: `(neighbour, bit)`, `u32::MAX` when absent.
    nbrs: Vec<[(u32, u32); 4]>,
    starts: Vec<u32>,
    rule: KPathRule,
    budget: u64,
}

impl MPathGraph {
    pub(crate) fn new(l: u32, k: u32, rule: KPathRule, budget: u64, sigma: &Symmetry, domain: &Domain) -> Result<Self> {
        if k == 0 || k > l {
            return Err(Error::Parameter(format!("need 1 <= k <= l, got k={k} l={l}")));
        }
        let rect = mpath_box(l);
        let image = sigma.apply_rect(&rect);
        if !domain.window().contains_rect(&image) {
            return Err(Error::Domain(format!("event support {image:?} exceeds the domain window {:?}", domain.window())));
        }
        let kb = KBox::new(k);
        let lb = KBox::new(l);
        let flags = rect
            .vertices()
            .map(|v| {
                let mut f = 0;
                if kb.inside(v) {
                    f |= IN_K;
                }
                if kb.top(v) {
                    f |= K_TOP;
                }
                if kb.bottom(v) {
                    f |= K_BOTTOM;
                }
                if lb.top(v) {
                    f |= L_TOP;
                }
                if lb.bottom(v) {
                    f |= L_BOTTOM;
                }
                f
            })
            .collect();
        let mut nbrs = Vec::with_capacity(rect.vertex_count());
        for v in rect.vertices() {
            let mut slots = [(u32::MAX, u32::MAX); 4];
            for (slot, d) in slots.iter_mut().zip([(0, -1), (-1, 0), (1, 0), (0, 1)]) {
                let w = (v.0 + d.0, v.1 + d.1);
                if let Some(wi) = rect.vertex_index(w) {
                    let e = crate::lattice::Edge::between(v, w).unwrap();
                    let bit = domain
                        .edge_index(sigma.apply_edge(e))
                        .ok_or_else(|| Error::Domain(format!("edge {e:?} is not in the domain")))?;
                    *slot = (wi as u32, bit as u32);
                }
            }
            nbrs.push(slots);
        }
        let starts = (-lb.t..=lb.t).map(|x| rect.vertex_index((x, lb.k)).unwrap() as u32).collect();
        Ok(Self { rect, flags, nbrs, starts, rule, budget })
    }

    pub(crate) fn decide(&self, cfg: &Config) -> Result<bool> {
        match self.search(cfg) {
            PathSearch::Found => Ok(true),
            PathSearch::NotFound => Ok(false),
            PathSearch::BudgetExhausted => Err(Error::BudgetExhausted(self.budget)),
        }
    }

    /// Run flags after stepping onto a vertex with flags `f`, or `None` if
    /// the current in-box run would then hold a `k`-path. Flags are kept
    /// cleared outside the `k`-box, so a fresh run starts from `(false, false)`.
    #[inline]
    fn step(&self, up: bool, down: bool, f: u8) -> Option<(bool, bool)> {
        if f & IN_K == 0 {
            return Some((false, false));
        }
        let (nu, nd) = (up || f & K_TOP != 0, down || f & K_BOTTOM != 0);
        let hit = match self.rule {
            KPathRule::Permissive => nu && nd,
            KPathRule::Strict => up && f & K_BOTTOM != 0,
        };
        if hit {
            None
        } else {
            Some((nu, nd))
        }
    }

    /// Breadth-first search over (vertex, run flags) from `v`, avoiding the
    /// current path and the upper target. Walks found this way need not be
    /// simple, so failure proves no completion exists, and a route that
    /// happens to repeat no vertex is itself a completion.
    fn completion(&self, cfg: &Config, from: (u32, bool, bool), on_path: &[bool], bufs: &mut SearchBufs) -> Completion {
        bufs.stamp = bufs.stamp.wrapping_add(1);
        if bufs.stamp == 0 {
            bufs.seen.iter_mut().for_each(|m| *m = 0);
            bufs.stamp = 1;
        }
        let stamp = bufs.stamp;
        let key = |v: u32, up: bool, down: bool| (v as usize) * 4 + (usize::from(up) << 1) + usize::from(down);
        bufs.queue.clear();
        let k0 = key(from.0, from.1, from.2);
        bufs.seen[k0] = stamp;
        bufs.parent[k0] = u32::MAX;
        bufs.queue.push(k0 as u32);
        let mut head = 0;
        while head < bufs.queue.len() {
            let s = bufs.queue[head] as usize;
            head += 1;
            let (v, up, down) = ((s / 4) as u32, s & 2 != 0, s & 1 != 0);
            for &(w, bit) in &self.nbrs[v as usize] {
                if w == u32::MAX || on_path[w as usize] || !cfg.get_index(bit as usize) {
                    continue;
                }
                let f = self.flags[w as usize];
                if f & L_TOP != 0 {
                    continue;
                }
                let Some((nu, nd)) = self.step(up, down, f) else { continue };
                let kw = key(w, nu, nd);
                if bufs.seen[kw] == stamp {
                    continue;
                }
                bufs.seen[kw] = stamp;
                bufs.parent[kw] = s as u32;
                if f & L_BOTTOM != 0 {
                    // walk back and test simplicity
                    bufs.route.clear();
                    let mut cur = kw as u32;
                    while cur != u32::MAX {
                        bufs.route.push(cur / 4);
                        cur = bufs.parent[cur as usize];
                    }
                    bufs.route.sort_unstable();
                    let simple = bufs.route.windows(2).all(|p| p[0] != p[1]);
                    return if simple { Completion::Simple } else { Completion::Walk };
                }
                bufs.queue.push(kw as u32);
            }
        }
        Completion::None
    }

    /// Depth-first search over simple open paths that leave the upper
    /// `ℓ`-target at their first vertex and end at their first visit to the
    /// lower one. Any admissible `ℓ`-path has such a subpath, and subpaths
    /// of a path without `k`-paths have none either. A prefix is abandoned
    /// when its current in-box run already holds a `k`-path (every extension
    /// keeps it) or when no walk at all can complete it.
    pub(crate) fn search(&self, cfg: &Config) -> PathSearch {
        let n = self.flags.len();
        let mut bufs = SearchBufs { seen: vec![0; 4 * n], parent: vec![0; 4 * n], stamp: 0, queue: Vec::new(), route: Vec::new() };
        let mut on_path = vec![false; n];
        // (vertex, next slot, upper-target seen in run, lower-target seen in run)
        let mut stack: Vec<(u32, u8, bool, bool)> = Vec::new();
        let mut nodes = 0u64;
        for &s in &self.starts {
            let Some((up, down)) = self.step(false, false, self.flags[s as usize]) else { continue };
            match self.completion(cfg, (s, up, down), &on_path, &mut bufs) {
                Completion::None => continue,
                Completion::Simple => return PathSearch::Found,
                Completion::Walk => {}
            }
            stack.push((s, 0, up, down));
            on_path[s as usize] = true;
            while let Some(top) = stack.last_mut() {
                let (v, slot, up, down) = *top;
                if slot == 4 {
                    on_path[v as usize] = false;
                    stack.pop();
                    continue;
                }
                top.1 += 1;
                let (w, bit) = self.nbrs[v as usize][slot as usize];
                if w == u32::MAX || on_path[w as usize] || !cfg.get_index(bit as usize) {
                    continue;
                }
                let f = self.flags[w as usize];
                if f & L_TOP != 0 {
                    continue;
                }
                let Some((nu, nd)) = self.step(up, down, f) else { continue };
                if f & L_BOTTOM != 0 {
                    return PathSearch::Found;
                }
                nodes += 1;
                if nodes > self.budget {
                    return PathSearch::BudgetExhausted;
                }
                match self.completion(cfg, (w, nu, nd), &on_path, &mut bufs) {
                    Completion::None => continue,
                    Completion::Simple => return PathSearch::Found,
                    Completion::Walk => {}
                }
                on_path[w as usize] = true;
                stack.push((w, 0, nu, nd));
            }
        }
        PathSearch::NotFound
    }

    /// Every simple open path from the upper `ℓ`-target; each time one
    /// stands on the lower target it is checked with the quadratic scan.
    fn search_unpruned(&self, cfg: &Config, k: u32) -> PathSearch {
        let mut nodes = 0u64;
        let mut on_path = vec![false; self.flags.len()];
        let mut path: Vec<u32> = Vec::new();
        let mut cursor: Vec<u8> = Vec::new();
        for &s in &self.starts {
            path.push(s);
            cursor.push(0);
            on_path[s as usize] = true;
            while let Some(&v) = path.last() {
                let slot = cursor.last_mut().unwrap();
                if *slot == 4 {
                    on_path[v as usize] = false;
                    path.pop();
                    cursor.pop();
                    continue;
                }
                let (w, bit) = self.nbrs[v as usize][*slot as usize];
                *slot += 1;
                if w == u32::MAX || on_path[w as usize] || !cfg.get_index(bit as usize) {
                    continue;
                }
                nodes += 1;
                if nodes > self.budget {
                    return PathSearch::BudgetExhausted;
                }
                path.push(w);
                cursor.push(0);
                on_path[w as usize] = true;
                if self.flags[w as usize] & L_BOTTOM != 0 {
                    let verts: Vec<Vertex> = path.iter().map(|&i| self.rect.vertex_at(i as usize)).collect();
                    if !path_contains_kpath_naive(&verts, k, self.rule).expect("search builds simple paths") {
                        return PathSearch::Found;
                    }
                }
            }
        }
        PathSearch::NotFound
    }
}

/// Is there an open `ℓ`-path (upper to lower `ℓ`-target inside
/// `R(ℓ + t_β(ℓ), ℓ)`) that contains no `k`-path? The event is increasing.
/// Exact but exponential in the worst case; meant for `ℓ <= 8`.
pub fn exists_lpath_avoiding_kpath(cfg: &Config, l: u32, k: u32, rule: KPathRule, node_budget: u64) -> Result<PathSearch> {
    let g = MPathGraph::new(l, k, rule, node_budget, &Symmetry::identity(), cfg.domain())?;
    Ok(g.search(cfg))
}

/// Reference for [`exists_lpath_avoiding_kpath`]: enumerates every simple
/// open path from the upper target, without pruning or reductions.
pub fn exists_lpath_avoiding_kpath_unpruned(
    cfg: &Config,
    l: u32,
    k: u32,
    rule: KPathRule,
    node_budget: u64,
) -> Result<PathSearch> {
    let g = MPathGraph::new(l, k, rule, node_budget, &Symmetry::identity(), cfg.domain())?;
    Ok(g.search_unpruned(cfg, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(k: i32) -> Vec<Vertex> {
        (-k..=k).rev().map(|y| (0, y)).collect()
    }

    #[test]
    fn straight_column_is_a_kpath() {
        for k in 1..6 {
            assert!(path_contains_kpath(&column(k), k as u32, KPathRule::Permissive).unwrap());
            let mut rev = column(k);
            rev.reverse();
            assert!(path_contains_kpath(&rev, k as u32, KPathRule::Permissive).unwrap());
            assert!(!path_contains_kpath(&rev, k as u32, KPathRule::Strict).unwrap());
        }
    }

    #[test]
    fn upper_half_paths_have_no_kpath() {
        let path: Vec<Vertex> = (-3..=3).map(|x| (x, 1)).collect();
        assert!(!path_contains_kpath(&path, 1, KPathRule::Permissive).unwrap());
    }

    #[test]
    fn leaving_the_box_breaks_a_run() {
        // top target, out of the box to the side, back in at the bottom
        let k = 1;
        let path = vec![(0, 1), (1, 1), (2, 1), (2, 0), (2, -1), (1, -1), (0, -1)];
        assert!(!path_contains_kpath(&path, k, KPathRule::Permissive).unwrap());
        assert!(!path_contains_kpath_naive(&path, k, KPathRule::Permissive).unwrap());
    }

    #[test]
    fn malformed_paths_are_rejected() {
        assert!(matches!(path_contains_kpath(&[(0, 0), (2, 0)], 1, KPathRule::Permissive), Err(Error::MalformedPath(_))));
        assert!(matches!(
            path_contains_kpath(&[(0, 0), (1, 0), (0, 0)], 1, KPathRule::Permissive),
            Err(Error::MalformedPath(_))
        ));
    }

    #[test]
    fn search_fixtures() {
        let d = Domain::Rect(mpath_box(4));
        let closed = Config::all_closed(d);
        assert_eq!(exists_lpath_avoiding_kpath(&closed, 4, 2, KPathRule::Permissive, 1000).unwrap(), PathSearch::NotFound);
        let mut col = Config::all_closed(d);
        for y in -4..4 {
            col.set(crate::lattice::Edge::v(0, y), true).unwrap();
        }
        assert_eq!(exists_lpath_avoiding_kpath(&col, 4, 2, KPathRule::Permissive, 1000).unwrap(), PathSearch::NotFound);
        // a detour around the k-box avoids every k-path
        let r = mpath_box(4);
        let open = Config::all_open(Domain::Rect(r));
        assert_eq!(exists_lpath_avoiding_kpath(&open, 4, 2, KPathRule::Permissive, 1_000_000).unwrap(), PathSearch::Found);
        // l = k: every l-path is a k-path
        assert_eq!(exists_lpath_avoiding_kpath(&open, 1, 1, KPathRule::Permissive, 1_000_000).unwrap(), PathSearch::NotFound);
    }
}

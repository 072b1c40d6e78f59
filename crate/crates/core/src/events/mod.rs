//! Declarative event specifications and their exact detectors.
//!
//! Scaled lengths are discretized with floor: `t_α(n) = ⌊n/64⌋`,
//! `t_β(n) = ⌊n/12⌋`, `t_3β(n) = ⌊n/4⌋`. For small `n` the targets
//! degenerate to single vertices.
//!
//! Bridge-type "parts" stop one column short of the centre strip
//! `[-t, t]`: the left part is `[-n-t, -t-1] x {±n}` plus the left side.
//! Without that cut the two parts would share the vertices `(0, ±n)`
//! whenever `t = 0`, and the event would hold trivially.

mod compile;
mod paths;

use serde::{Deserialize, Serialize};

pub use compile::{CompiledEvent, Scratch};
pub use paths::{
    exists_lpath_avoiding_kpath, exists_lpath_avoiding_kpath_unpruned, path_contains_kpath, path_contains_kpath_naive,
    KPathRule, PathSearch, DEFAULT_NODE_BUDGET,
};

use crate::error::{Error, Result};
use crate::lattice::{Config, Rect, Symmetry, Vertex};

pub fn t_alpha(n: u32) -> i32 {
    (n / 64) as i32
}

pub fn t_beta(n: u32) -> i32 {
    (n / 12) as i32
}

pub fn t_3beta(n: u32) -> i32 {
    (n / 4) as i32
}

/// `R(m, n) = [-m, m] x [-n, n]`.
pub fn r(m: i32, n: i32) -> Rect {
    Rect::centered(m, n)
}

/// The rectangle `R(m + t_β(m), m)` that `m`-paths live in.
pub fn mpath_box(m: u32) -> Rect {
    r(m as i32 + t_beta(m), m as i32)
}

/// An explicit set of lattice (or dual-lattice) vertices, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundarySegment {
    vertices: Vec<Vertex>,
}

impl BoundarySegment {
    pub fn new(mut vertices: Vec<Vertex>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self { vertices }
    }

    /// `[x0, x1] x {y}` (empty if `x0 > x1`).
    pub fn row(x0: i32, x1: i32, y: i32) -> Self {
        Self::new((x0..=x1).map(|x| (x, y)).collect())
    }

    /// `{x} x [y0, y1]`.
    pub fn column(x: i32, y0: i32, y1: i32) -> Self {
        Self::new((y0..=y1).map(|y| (x, y)).collect())
    }

    pub fn union(&self, other: &BoundarySegment) -> Self {
        Self::new(self.vertices.iter().chain(&other.vertices).copied().collect())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn intersects(&self, other: &BoundarySegment) -> bool {
        self.vertices.iter().any(|v| other.contains(*v))
    }

    pub fn apply(&self, sigma: &Symmetry) -> Self {
        Self::new(self.vertices.iter().map(|v| sigma.apply_vertex(*v)).collect())
    }

    /// Image when the entries are dual vertices.
    pub fn apply_dual(&self, sigma: &Symmetry) -> Self {
        Self::new(self.vertices.iter().map(|v| sigma.apply_dual_vertex(*v)).collect())
    }
}

/// Is `v` one of the dual vertices on the ring just outside `r`, i.e. in
/// `[x0-1, x1] x [y0-1, y1]` but not strictly inside?
pub fn on_dual_ring(r: &Rect, v: Vertex) -> bool {
    let (i, j) = v;
    let inside_box = i >= r.x0() - 1 && i <= r.x1() && j >= r.y0() - 1 && j <= r.y1();
    inside_box && (i == r.x0() - 1 || i == r.x1() || j == r.y0() - 1 || j == r.y1())
}

/// Crossing direction of a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Left side to right side.
    Horizontal,
    /// Top side to bottom side.
    Vertical,
}

/// Description of an event; increasing unless it is a dual connection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventSpec {
    /// `a` connected to `b` by open edges inside `region`. With
    /// `dual = true`, by open dual edges crossing edges of `region`; `a`
    /// and `b` are then dual vertices `(i, j) ≙ (i + 1/2, j + 1/2)`, and may
    /// sit on the ring just outside `region`.
    Connect { region: Rect, a: BoundarySegment, b: BoundarySegment, dual: bool },
    /// `Q(n, m)`: in `R(n + t_3β(n), n)` there are open `m`-paths connected
    /// to the left side and to the right side.
    QuasiCross { n: u32, m: u32 },
    /// An open `ℓ`-path containing no `k`-path.
    MPathFreePath {
        l: u32,
        k: u32,
        #[serde(default)]
        rule: KPathRule,
        #[serde(default = "default_budget")]
        budget: u64,
    },
    And { events: Vec<EventSpec> },
    Or { events: Vec<EventSpec> },
    /// `σ·E`, which holds on `ω` iff `E` holds on `σ⁻¹·ω`.
    Transformed { sigma: Symmetry, inner: Box<EventSpec> },
}

fn default_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}

/// Whether an event is favoured by open or by closed edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    /// Empty conjunction or disjunction.
    Constant,
}

impl EventSpec {
    pub fn connect(region: Rect, a: BoundarySegment, b: BoundarySegment, dual: bool) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Parameter("connection endpoints must be non-empty".into()));
        }
        let ok = |s: &BoundarySegment| {
            s.vertices().iter().all(|&v| if dual { on_dual_ring(&region, v) } else { region.on_boundary(v) })
        };
        if !ok(&a) || !ok(&b) {
            return Err(Error::Parameter(format!(
                "connection endpoints must lie on the {} of {region:?}",
                if dual { "dual ring" } else { "boundary" }
            )));
        }
        Ok(EventSpec::Connect { region, a, b, dual })
    }

    /// Conjunction; all parts must share a monotonicity.
    pub fn and(events: Vec<EventSpec>) -> Result<Self> {
        same_monotonicity(&events)?;
        Ok(EventSpec::And { events })
    }

    pub fn or(events: Vec<EventSpec>) -> Result<Self> {
        same_monotonicity(&events)?;
        Ok(EventSpec::Or { events })
    }

    pub fn transformed(self, sigma: Symmetry) -> Self {
        if sigma.is_identity() {
            return self;
        }
        match self {
            EventSpec::Transformed { sigma: inner_sigma, inner } => {
                EventSpec::Transformed { sigma: sigma.compose(&inner_sigma), inner }
            }
            other => EventSpec::Transformed { sigma, inner: Box::new(other) },
        }
    }

    pub fn translated(self, tx: i32, ty: i32) -> Self {
        self.transformed(Symmetry::translation(tx, ty))
    }

    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            EventSpec::Connect { dual: true, .. } => Monotonicity::Decreasing,
            EventSpec::Connect { .. } | EventSpec::QuasiCross { .. } | EventSpec::MPathFreePath { .. } => {
                Monotonicity::Increasing
            }
            EventSpec::And { events } | EventSpec::Or { events } => {
                events.first().map_or(Monotonicity::Constant, |e| e.monotonicity())
            }
            EventSpec::Transformed { inner, .. } => inner.monotonicity(),
        }
    }

    /// Smallest rectangle containing every edge the event depends on.
    pub fn support(&self) -> Rect {
        match self {
            EventSpec::Connect { region, .. } => *region,
            EventSpec::QuasiCross { n, .. } => quasi_big_box(*n),
            EventSpec::MPathFreePath { l, .. } => mpath_box(*l),
            EventSpec::And { events } | EventSpec::Or { events } => events
                .iter()
                .map(|e| e.support())
                .reduce(|a, b| a.hull(&b))
                .unwrap_or(Rect::new(0, 0, 0, 0)),
            EventSpec::Transformed { sigma, inner } => sigma.apply_rect(&inner.support()),
        }
    }

    /// Stable 64-bit FNV-1a digest of the canonical JSON encoding.
    pub fn digest(&self) -> u64 {
        let json = serde_json::to_string(self).expect("event serializes");
        json.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }

    pub fn compile(&self, domain: crate::lattice::Domain) -> Result<CompiledEvent> {
        CompiledEvent::new(self, domain)
    }
}

fn same_monotonicity(events: &[EventSpec]) -> Result<()> {
    let mut kinds = events.iter().map(|e| e.monotonicity()).filter(|m| *m != Monotonicity::Constant);
    if let Some(first) = kinds.next() {
        if kinds.any(|m| m != first) {
            return Err(Error::Parameter("cannot combine increasing and decreasing events".into()));
        }
    }
    Ok(())
}

/// Exact indicator of `spec` on `cfg`. Compiles on every call; use
/// [`CompiledEvent`] in loops.
pub fn eval(spec: &EventSpec, cfg: &Config) -> Result<bool> {
    let compiled = spec.compile(*cfg.domain())?;
    compiled.eval(cfg, &mut Scratch::default())
}

fn side_segment(rect: &Rect, dir: Direction) -> (BoundarySegment, BoundarySegment) {
    match dir {
        Direction::Horizontal => (
            BoundarySegment::column(rect.x0(), rect.y0(), rect.y1()),
            BoundarySegment::column(rect.x1(), rect.y0(), rect.y1()),
        ),
        Direction::Vertical => (
            BoundarySegment::row(rect.x0(), rect.x1(), rect.y1()),
            BoundarySegment::row(rect.x0(), rect.x1(), rect.y0()),
        ),
    }
}

/// Dual crossing in the given direction, using dual edges that cross edges
/// of `rect`: between the rings of dual vertices just outside its left and
/// right (or top and bottom) sides. It holds exactly when the primal
/// crossing of `rect` in the *other* direction fails.
fn dual_sides(rect: &Rect, dir: Direction) -> (BoundarySegment, BoundarySegment) {
    match dir {
        Direction::Horizontal => (
            BoundarySegment::column(rect.x0() - 1, rect.y0(), rect.y1() - 1),
            BoundarySegment::column(rect.x1(), rect.y0(), rect.y1() - 1),
        ),
        Direction::Vertical => (
            BoundarySegment::row(rect.x0(), rect.x1() - 1, rect.y1()),
            BoundarySegment::row(rect.x0(), rect.x1() - 1, rect.y0() - 1),
        ),
    }
}

/// Crossing of `R(m, n)`. Primal: `C(m, n)` for `Horizontal`. Dual: the
/// dual crossing in the same direction, the complement of the primal
/// crossing of `R(m, n)` in the other direction.
pub fn crossing_spec(m: u32, n: u32, dir: Direction, dual: bool) -> Result<EventSpec> {
    if m == 0 || n == 0 {
        return Err(Error::Parameter("crossing dimensions must be >= 1".into()));
    }
    crossing_of(r(m as i32, n as i32), dir, dual)
}

/// Crossing of an arbitrary rectangle.
pub fn crossing_of(rect: Rect, dir: Direction, dual: bool) -> Result<EventSpec> {
    let (a, b) = if dual { dual_sides(&rect, dir) } else { side_segment(&rect, dir) };
    EventSpec::connect(rect, a, b, dual)
}

/// `C(m, n)`.
pub fn horizontal_crossing(m: u32, n: u32) -> EventSpec {
    crossing_spec(m, n, Direction::Horizontal, false).expect("valid crossing")
}

/// Upper and lower targets `[-t, t] x {±n}`.
fn targets(t: i32, n: i32) -> (BoundarySegment, BoundarySegment) {
    (BoundarySegment::row(-t, t, n), BoundarySegment::row(-t, t, -n))
}

/// Arm event `A(n)`: upper to lower target in `R(n + t_α(n), n)`.
pub fn arm_spec(n: u32) -> Result<EventSpec> {
    check_scale(n)?;
    let t = t_alpha(n);
    let (a, b) = targets(t, n as i32);
    EventSpec::connect(r(n as i32 + t, n as i32), a, b, false)
}

/// `m`-path existence: upper to lower `m`-target inside `R(m + t_β(m), m)`.
pub fn mpath_spec(m: u32) -> Result<EventSpec> {
    check_scale(m)?;
    let t = t_beta(m);
    let (a, b) = targets(t, m as i32);
    EventSpec::connect(mpath_box(m), a, b, false)
}

fn check_scale(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::Parameter("scale must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Left and right parts of a bridge with centre half-width `t` on `R(n+t, n)`.
fn bridge_parts(n: i32, t: i32) -> (BoundarySegment, BoundarySegment) {
    let w = n + t;
    let left = BoundarySegment::row(-w, -t - 1, n)
        .union(&BoundarySegment::row(-w, -t - 1, -n))
        .union(&BoundarySegment::column(-w, -n, n));
    let right = BoundarySegment::row(t + 1, w, n)
        .union(&BoundarySegment::row(t + 1, w, -n))
        .union(&BoundarySegment::column(w, -n, n));
    (left, right)
}

/// Dual bridge parts on `R(n+t, n)`: the dual ring vertices above and below
/// the primal parts, plus the ring columns beyond the sides. The dual
/// connection between them fails exactly when the primal targets
/// `[-t, t] x {±n}` are connected inside the rectangle.
fn dual_bridge_parts(n: i32, t: i32) -> (BoundarySegment, BoundarySegment) {
    let w = n + t;
    let left = BoundarySegment::row(-w - 1, -t - 1, n)
        .union(&BoundarySegment::row(-w - 1, -t - 1, -n - 1))
        .union(&BoundarySegment::column(-w - 1, -n - 1, n));
    let right = BoundarySegment::row(t, w, n)
        .union(&BoundarySegment::row(t, w, -n - 1))
        .union(&BoundarySegment::column(w, -n - 1, n));
    (left, right)
}

fn bridge_with(n: u32, t: i32, dual: bool) -> Result<EventSpec> {
    check_scale(n)?;
    let (a, b) = if dual { dual_bridge_parts(n as i32, t) } else { bridge_parts(n as i32, t) };
    EventSpec::connect(r(n as i32 + t, n as i32), a, b, dual)
}

/// Bridge event `B(n)` in `R(n + t_β(n), n)`.
pub fn bridge_spec(n: u32) -> Result<EventSpec> {
    bridge_with(n, t_beta(n), false)
}

/// Bridge variant `B̃(n)`: the bridge built with `t_α` in `R(n + t_α(n), n)`.
pub fn bridge_variant_spec(n: u32) -> Result<EventSpec> {
    bridge_with(n, t_alpha(n), false)
}

/// Dual bridge `B⋆(n)`.
pub fn dual_bridge_spec(n: u32) -> Result<EventSpec> {
    bridge_with(n, t_beta(n), true)
}

/// Dual bridge variant `B̃⋆(n)`, the complement of `A(n)`.
pub fn dual_bridge_variant_spec(n: u32) -> Result<EventSpec> {
    bridge_with(n, t_alpha(n), true)
}

/// Left part of `B̃(n)` to the bottom-right segment `[t_α+1, n+t_α] x {-n}`
/// in `R(n + t_α(n), n)`.
pub fn left_part_to_bottom_right_spec(n: u32) -> Result<EventSpec> {
    check_scale(n)?;
    let (ni, t) = (n as i32, t_alpha(n));
    let (left, _) = bridge_parts(ni, t);
    EventSpec::connect(r(ni + t, ni), left, BoundarySegment::row(t + 1, ni + t, -ni), false)
}

/// Bottom-left segment to bottom-right segment in `R(n + t_α(n), n)`.
pub fn bottom_left_to_bottom_right_spec(n: u32) -> Result<EventSpec> {
    check_scale(n)?;
    let (ni, t) = (n as i32, t_alpha(n));
    EventSpec::connect(
        r(ni + t, ni),
        BoundarySegment::row(-ni - t, -t - 1, -ni),
        BoundarySegment::row(t + 1, ni + t, -ni),
        false,
    )
}

/// `R(n + t_3β(n), n)`, the region of `Q(n, ·)`.
pub fn quasi_big_box(n: u32) -> Rect {
    r(n as i32 + t_3beta(n), n as i32)
}

pub fn quasi_crossing_spec(n: u32, m: u32) -> Result<EventSpec> {
    check_scale(m)?;
    if m > n {
        return Err(Error::Parameter(format!("quasi-crossing needs m <= n, got m={m} n={n}")));
    }
    Ok(EventSpec::QuasiCross { n, m })
}

/// The four arms whose intersection yields two `m`-paths attached to the
/// top and bottom of the tall middle rectangle: `(±⌊4m/64⌋, 0) + A(m)` and
/// `(0, ±⌊3m/2⌋) + A(⌊5m/2⌋)`.
pub fn quasi_arm_construction_spec(m: u32) -> Result<EventSpec> {
    check_scale(m)?;
    let shift = (4 * m / 64) as i32;
    let big = 5 * m / 2;
    let lift = (3 * m / 2) as i32;
    let small = arm_spec(m)?;
    let large = arm_spec(big)?;
    EventSpec::and(vec![
        small.clone().translated(shift, 0),
        small.translated(-shift, 0),
        large.clone().translated(0, lift),
        large.translated(0, -lift),
    ])
}

pub fn mpath_free_path_spec(l: u32, k: u32, rule: KPathRule, budget: u64) -> Result<EventSpec> {
    check_scale(k)?;
    if k > l {
        return Err(Error::Parameter(format!("need k <= l, got k={k} l={l}")));
    }
    Ok(EventSpec::MPathFreePath { l, k, rule, budget })
}

/// Parse the compact CLI syntax: `crossing:MxN` (`C(M, N)`),
/// `vcrossing:MxN`, `dual-crossing:MxN`, `dual-vcrossing:MxN`, `arm:N`,
/// `bridge:N`, `bridge-variant:N`, `dual-bridge:N`, `dual-bridge-variant:N`,
/// `mpath:M`, `quasi:N,M`, `quasi-arms:M`; or a JSON object.
pub fn parse_event(s: &str) -> Result<EventSpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    let (kind, arg) = s.split_once(':').ok_or_else(|| Error::Parameter(format!("event must look like kind:args, got {s:?}")))?;
    let int = |t: &str| -> Result<u32> { t.trim().parse().map_err(|_| Error::Parameter(format!("bad integer {t:?} in {s:?}"))) };
    let pair = |sep: char| -> Result<(u32, u32)> {
        let (a, b) = arg.split_once(sep).ok_or_else(|| Error::Parameter(format!("expected A{sep}B in {s:?}")))?;
        Ok((int(a)?, int(b)?))
    };
    match kind.trim() {
        "crossing" => pair('x').and_then(|(m, n)| crossing_spec(m, n, Direction::Horizontal, false)),
        "vcrossing" => pair('x').and_then(|(m, n)| crossing_spec(m, n, Direction::Vertical, false)),
        "dual-crossing" => pair('x').and_then(|(m, n)| crossing_spec(m, n, Direction::Horizontal, true)),
        "dual-vcrossing" => pair('x').and_then(|(m, n)| crossing_spec(m, n, Direction::Vertical, true)),
        "arm" => arm_spec(int(arg)?),
        "bridge" => bridge_spec(int(arg)?),
        "bridge-variant" => bridge_variant_spec(int(arg)?),
        "dual-bridge" => dual_bridge_spec(int(arg)?),
        "dual-bridge-variant" => dual_bridge_variant_spec(int(arg)?),
        "mpath" => mpath_spec(int(arg)?),
        "quasi" => pair(',').and_then(|(n, m)| quasi_crossing_spec(n, m)),
        "quasi-arms" => quasi_arm_construction_spec(int(arg)?),
        other => Err(Error::Parameter(format!("unknown event kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Domain, Edge};

    fn all(domain_rect: Rect, open: bool) -> Config {
        let d = Domain::Rect(domain_rect);
        if open {
            Config::all_open(d)
        } else {
            Config::all_closed(d)
        }
    }

    #[test]
    fn crossing_endpoints() {
        let c = horizontal_crossing(4, 2);
        assert!(eval(&c, &all(r(4, 2), true)).unwrap());
        assert!(!eval(&c, &all(r(4, 2), false)).unwrap());
    }

    #[test]
    fn diag_short_but_not_long() {
        for n in [2u32, 4, 8] {
            let cfg = crate::models::diag_config(Domain::Rect(r(2 * n as i32, 2 * n as i32)));
            assert!(eval(&horizontal_crossing(n, 2 * n), &cfg).unwrap(), "n={n}");
            assert!(!eval(&horizontal_crossing(2 * n, n), &cfg).unwrap(), "n={n}");
        }
    }

    #[test]
    fn arm_targets() {
        let a = arm_spec(64).unwrap();
        match &a {
            EventSpec::Connect { region, a, .. } => {
                assert_eq!(*region, r(65, 64));
                assert_eq!(a.vertices(), &[(-1, 64), (0, 64), (1, 64)]);
            }
            _ => panic!(),
        }
        match arm_spec(8).unwrap() {
            EventSpec::Connect { a, b, .. } => {
                assert_eq!(a.vertices(), &[(0, 8)]);
                assert_eq!(b.vertices(), &[(0, -8)]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn all_open_satisfies_families() {
        for n in [1u32, 5, 12, 30] {
            for spec in [arm_spec(n), bridge_spec(n), bridge_variant_spec(n), mpath_spec(n)] {
                let spec = spec.unwrap();
                let rect = spec.support();
                assert!(eval(&spec, &all(rect, true)).unwrap());
                assert!(!eval(&spec, &all(rect, false)).unwrap());
            }
            let d = dual_bridge_spec(n).unwrap();
            assert!(eval(&d, &all(d.support(), false)).unwrap());
            assert!(!eval(&d, &all(d.support(), true)).unwrap());
        }
    }

    #[test]
    fn bridge_parts_are_disjoint() {
        for n in 1..40u32 {
            for spec in [bridge_spec(n).unwrap(), bridge_variant_spec(n).unwrap(), dual_bridge_spec(n).unwrap()] {
                let EventSpec::Connect { a, b, .. } = spec else { panic!() };
                assert!(!a.intersects(&b), "n={n}");
            }
        }
    }

    #[test]
    fn overlapping_endpoints_always_connect() {
        let rect = r(2, 2);
        let seg = BoundarySegment::column(-2, -2, 2);
        let spec = EventSpec::connect(rect, seg.clone(), seg, false).unwrap();
        assert!(eval(&spec, &all(rect, false)).unwrap());
    }

    #[test]
    fn single_edge_connection() {
        let rect = r(1, 1);
        let spec =
            EventSpec::connect(rect, BoundarySegment::new(vec![(-1, 1)]), BoundarySegment::new(vec![(0, 1)]), false).unwrap();
        let mut cfg = all(rect, false);
        assert!(!eval(&spec, &cfg).unwrap());
        cfg.set(Edge::h(-1, 1), true).unwrap();
        assert!(eval(&spec, &cfg).unwrap());
    }

    #[test]
    fn rejects_bad_geometry() {
        let rect = r(2, 2);
        assert!(EventSpec::connect(rect, BoundarySegment::new(vec![(0, 0)]), BoundarySegment::new(vec![(2, 0)]), false).is_err());
        assert!(quasi_crossing_spec(2, 3).is_err());
        let mixed = EventSpec::and(vec![horizontal_crossing(1, 1), dual_bridge_spec(1).unwrap()]);
        assert!(mixed.is_err());
    }

    #[test]
    fn support_outside_domain_is_an_error() {
        let cfg = all(r(2, 2), true);
        assert!(matches!(eval(&horizontal_crossing(3, 2), &cfg), Err(Error::Domain(_))));
        let shifted = horizontal_crossing(1, 1).translated(2, 0);
        assert_eq!(shifted.support(), Rect::new(2, 0, 1, 1));
        assert!(matches!(eval(&shifted, &cfg), Err(Error::Domain(_))));
        let torus = Config::all_open(Domain::torus(16).unwrap());
        assert!(eval(&horizontal_crossing(4, 4), &torus).unwrap());
        assert!(eval(&horizontal_crossing(5, 4), &torus).is_err());
    }

    #[test]
    fn quasi_fixtures() {
        let (n, m) = (8u32, 2u32);
        let big = quasi_big_box(n);
        let spec = quasi_crossing_spec(n, m).unwrap();
        assert!(eval(&spec, &all(big, true)).unwrap());
        let mut col = all(big, false);
        for y in -(m as i32)..(m as i32) {
            col.set(Edge::v(0, y), true).unwrap();
        }
        assert!(!eval(&spec, &col).unwrap());
        let mut cross = col.clone();
        for x in big.x0()..big.x1() {
            cross.set(Edge::h(x, 0), true).unwrap();
        }
        assert!(eval(&spec, &cross).unwrap());
        // only the left half of the row: attached to the left side only
        let mut half = col;
        for x in big.x0()..0 {
            half.set(Edge::h(x, 0), true).unwrap();
        }
        assert!(!eval(&spec, &half).unwrap());
    }

    #[test]
    fn json_round_trip_and_digest() {
        let spec = EventSpec::and(vec![quasi_crossing_spec(4, 1).unwrap(), arm_spec(3).unwrap().translated(1, 0)]).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: EventSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.digest(), spec.digest());
        assert_ne!(arm_spec(3).unwrap().digest(), arm_spec(4).unwrap().digest());
        assert!(json.contains(r#""kind":"and""#));
    }

    #[test]
    fn cli_event_syntax() {
        assert_eq!(parse_event("crossing:16x8").unwrap(), horizontal_crossing(16, 8));
        assert_eq!(parse_event("arm:8").unwrap(), arm_spec(8).unwrap());
        assert_eq!(parse_event("quasi:16,4").unwrap(), quasi_crossing_spec(16, 4).unwrap());
        assert!(parse_event("crossing:16").is_err());
        assert!(parse_event("blob:3").is_err());
        let json = serde_json::to_string(&bridge_spec(4).unwrap()).unwrap();
        assert_eq!(parse_event(&json).unwrap(), bridge_spec(4).unwrap());
    }
}

//! A finite ball of the universal cover: wall lines in each vertex plane,
//! propagated across edge strips through the lifted matching.
//!
//! Coordinates. A line of a circle with primitive vector `c` is
//! `{p : det(c, p) = d}`; `d` is its offset. An edge end with attaching
//! vector `f = k f'` (`f'` primitive, `k > 0`) has strips along the lines
//! `{s f' + q u}` with `det(f', u) = 1`, `k` strips per line (`t in 0..k`),
//! one per coset of `<f>`. A strip is parametrized from its base point
//! `q u + t f'` in units of `f'`; one turn around the cylinder is `k` units.
//!
//! A line `(c, d)` meets the strip `(q, t)` at `w / |δ|` where
//! `δ = det(c, f')`, `γ = det(c, u)` and `w = sgn(δ)(d - qγ) - t|δ|`. The
//! crossings of `c`-lines along one turn are the `L = k|δ| = #[f, c]`
//! intersection points of that circle, indexed in position order; the turn
//! index and the position within it give the point of the base space and
//! the lift of the arc. Arcs do not wind: the partner point is taken in the
//! same turn of the strip. Circles sit at a small positive offset from the
//! lattice, which decides the turn of a crossing that lands exactly on a
//! strip's base point.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::dilation::{DilationResult, Status};
use crate::equitable::EquitableSet;
use crate::lattice::{unimodular_complement, ExactRational, LatticeVector};
use crate::space::{Side, TubularSpace};
use crate::walls::{
    wall_label, CircleNode, Matching, PointTable, QuotientGraph, WallError, WallSystem,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error(transparent)]
    Walls(#[from] WallError),
    #[error("circle {0} is not primitive; the cover simulator needs primitive circle vectors")]
    NonPrimitiveCircle(CircleNode),
    #[error("coordinates too large for the cover simulator")]
    TooLarge,
    #[error("{what} = {value} exceeds the guard {limit}")]
    Guard {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("seed circle {0} is not part of the seed wall")]
    SeedNotInWall(CircleNode),
    #[error("wall {0} is dilated; its translates need not split into disjoint families")]
    Dilated(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverConfig {
    pub radius: u32,
    /// Lines are kept only while `|offset| <= window`.
    pub window: i64,
    /// Strips are followed only on attaching lines with `|q| <= attach_window`.
    pub attach_window: i64,
    pub max_vertices: usize,
}

impl CoverConfig {
    pub const MAX_RADIUS: u32 = 64;
    pub const MAX_WINDOW: i64 = 100_000;
    pub const MAX_ATTACH_WINDOW: i64 = 64;
    pub const DEFAULT_MAX_VERTICES: usize = 200_000;

    pub fn new(radius: u32, window: i64) -> Self {
        CoverConfig {
            radius,
            window,
            attach_window: 1,
            max_vertices: Self::DEFAULT_MAX_VERTICES,
        }
    }

    fn check(&self) -> Result<(), CoverError> {
        let guard = |what, value: u64, limit: u64| {
            if value > limit {
                Err(CoverError::Guard { what, value, limit })
            } else {
                Ok(())
            }
        };
        guard("radius", self.radius as u64, Self::MAX_RADIUS as u64)?;
        guard(
            "window",
            self.window.unsigned_abs(),
            Self::MAX_WINDOW as u64,
        )?;
        guard(
            "attach window",
            self.attach_window.unsigned_abs(),
            Self::MAX_ATTACH_WINDOW as u64,
        )
    }
}

/// Strip of the tree edge leading to a vertex, as seen from its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeEdge {
    pub edge: usize,
    /// Side of the edge at the parent.
    pub side: Side,
    pub q: i64,
    pub t: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WallLine {
    /// Index into `CoverBall::walls`.
    pub wall: usize,
    /// Index into `CoverBall::nodes`.
    pub node: usize,
    pub offset: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeVertex {
    /// Index of the base vertex in the space.
    pub vertex: usize,
    pub parent: Option<usize>,
    pub via: Option<TreeEdge>,
    pub depth: u32,
    /// Sorted by (node, offset).
    pub lines: Vec<WallLine>,
}

/// A translate of the seed wall, named by the offset of its line at the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallTag {
    pub root_offset: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverBall {
    pub config: CoverConfig,
    pub seed_wall: usize,
    pub seed_node: usize,
    /// Circle nodes of the seed wall.
    pub nodes: Vec<CircleNode>,
    pub node_vectors: Vec<LatticeVector>,
    pub walls: Vec<WallTag>,
    pub vertices: Vec<TreeVertex>,
    /// The seed wall's quotient graph, for partition checks.
    pub quotient: QuotientGraph,
    /// Per node, lcm of its nonzero intersection numbers with attaching
    /// vectors: the period of its crossings along every strip.
    pub periods: Vec<u64>,
}

impl CoverBall {
    pub fn wall_name(&self, wall: usize) -> String {
        format!(
            "{}@{}",
            wall_label(self.seed_wall),
            self.walls[wall].root_offset
        )
    }

    pub fn root(&self) -> &TreeVertex {
        &self.vertices[0]
    }

    pub fn children(&self, parent: usize) -> impl Iterator<Item = (usize, &TreeVertex)> {
        self.vertices
            .iter()
            .enumerate()
            .filter(move |(_, v)| v.parent == Some(parent))
    }
}

type V2 = (i64, i64);

fn det(a: V2, b: V2) -> i64 {
    a.0 * b.1 - a.1 * b.0
}

fn small(v: &LatticeVector) -> Result<V2, CoverError> {
    let (x, y) = v.to_i64_pair().ok_or(CoverError::TooLarge)?;
    if x.unsigned_abs() > 1 << 20 || y.unsigned_abs() > 1 << 20 {
        return Err(CoverError::TooLarge);
    }
    Ok((x, y))
}

/// Geometry of one edge end, `f = k f'`.
struct End {
    vertex: usize,
    k: i64,
    fp: V2,
    u: V2,
    /// First point index of each circle of the vertex.
    circle_start: Vec<usize>,
    /// `(circle, slot)` of each point.
    points: Vec<(usize, u64)>,
    /// Partner point on the other end.
    partner: Vec<usize>,
}

fn end_index(edge: usize, side: Side) -> usize {
    2 * edge + (side == Side::Term) as usize
}

struct Lifter<'a> {
    space: &'a TubularSpace,
    ends: Vec<End>,
    /// Circle vectors per space vertex.
    circles: Vec<Vec<V2>>,
    /// Node index of (vertex, circle, copy) in the seed wall, if any.
    node_of: BTreeMap<(usize, usize, u32), usize>,
    node_key: Vec<(usize, usize, u32)>,
    window: i64,
}

impl<'a> Lifter<'a> {
    fn new(
        space: &'a TubularSpace,
        set: &EquitableSet,
        points: &PointTable,
        matching: &Matching,
        nodes: &[CircleNode],
        window: i64,
    ) -> Result<Self, CoverError> {
        let mut circles = Vec::new();
        for v in space.vertices() {
            let list = set
                .circles_at(&v.id)
                .iter()
                .map(|c| small(&c.vector))
                .collect::<Result<Vec<_>, _>>()?;
            circles.push(list);
        }
        let mut ends = Vec::new();
        for e in space.edges() {
            let pairs = matching.pairs.get(&e.id).cloned().unwrap_or_default();
            for side in [Side::Init, Side::Term] {
                let vertex = space.vertex_index(e.vertex(side)).expect("validated space");
                let f = e.attach(side);
                let k = BigInt::from(f.content());
                let fp = LatticeVector::new(&f.x / &k, &f.y / &k);
                let u = unimodular_complement(&fp).expect("primitive vector");
                let pts: Vec<(usize, u64)> = points
                    .side(&e.id, side)
                    .iter()
                    .map(|p| (p.circle, p.slot))
                    .collect();
                let mut circle_start = vec![0; circles[vertex].len()];
                let mut next = 0;
                for (c, start) in circle_start.iter_mut().enumerate() {
                    *start = next;
                    next += pts.iter().filter(|p| p.0 == c).count();
                }
                let mut partner = vec![0; pts.len()];
                for &(i, t) in &pairs {
                    match side {
                        Side::Init => partner[i] = t,
                        Side::Term => partner[t] = i,
                    }
                }
                ends.push(End {
                    vertex,
                    k: k.to_i64().ok_or(CoverError::TooLarge)?,
                    fp: small(&fp)?,
                    u: small(&u)?,
                    circle_start,
                    points: pts,
                    partner,
                });
            }
        }
        let mut node_of = BTreeMap::new();
        let mut node_key = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            let v = space
                .vertex_index(&n.vertex)
                .expect("node on a known vertex");
            node_of.insert((v, n.circle, n.copy), i);
            node_key.push((v, n.circle, n.copy));
        }
        Ok(Lifter {
            space,
            ends,
            circles,
            node_of,
            node_key,
            window,
        })
    }

    /// Continues line `(node, d)` across strip `(edge, side, q, t)` at its
    /// vertex; returns the node and offset of the line in the far vertex,
    /// in the frame where that strip has `q = t = 0`.
    fn cross(
        &self,
        node: usize,
        d: i64,
        edge: usize,
        side: Side,
        q: i64,
        t: i64,
    ) -> Option<(usize, i64)> {
        let (_, circle, copy) = self.node_key[node];
        let end = &self.ends[end_index(edge, side)];
        let c = self.circles[end.vertex][circle];
        let delta = det(c, end.fp);
        if delta == 0 {
            return None;
        }
        let gamma = det(c, end.u);
        let len = end.k * delta.abs();
        let w = delta.signum() * (d - q * gamma) - t * delta.abs() - (delta < 0) as i64;
        let (turn, j) = w.div_mod_floor(&len);
        let slot = copy as u64 * len as u64 + j as u64;
        let here = end.circle_start[circle] + slot as usize;

        let far = &self.ends[end_index(edge, side.opposite())];
        let there = end.partner[here];
        let (circle2, slot2) = far.points[there];
        let c2 = self.circles[far.vertex][circle2];
        let delta2 = det(c2, far.fp);
        let len2 = far.k * delta2.abs();
        let copy2 = (slot2 / len2 as u64) as u32;
        let j2 = (slot2 % len2 as u64) as i64;
        let w2 = turn * len2 + j2 + (delta2 < 0) as i64;
        let d2 = delta2.signum() * w2;
        let node2 = *self.node_of.get(&(far.vertex, circle2, copy2))?;
        Some((node2, d2))
    }

    /// Strips at a vertex of the given base vertex, in a fixed order.
    fn strips(&self, vertex: usize, attach_window: i64) -> Vec<TreeEdge> {
        let mut out = Vec::new();
        for (edge, side) in self.space.edge_ends_at(vertex) {
            let k = self.ends[end_index(edge, side)].k;
            for q in -attach_window..=attach_window {
                for t in 0..k {
                    out.push(TreeEdge { edge, side, q, t });
                }
            }
        }
        out
    }
}

fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Builds the ball around the vertex of the seed circle. The root carries
/// the lines of `seed_node` at offsets `-window..=window`, each a distinct
/// translate of the seed wall; lines are propagated outward through
/// strips. A vertex whose lines number fewer than two is recorded but not
/// expanded: everything below it continues its lines, so no two walls can
/// meet there.
#[allow(clippy::too_many_arguments)]
pub fn expand_ball(
    space: &TubularSpace,
    set: &EquitableSet,
    points: &PointTable,
    matching: &Matching,
    system: &WallSystem,
    seed_wall: usize,
    seed_node: Option<&CircleNode>,
    config: CoverConfig,
) -> Result<CoverBall, CoverError> {
    config.check()?;
    let wall = system
        .horizontal
        .get(seed_wall)
        .ok_or(WallError::UnknownWall(seed_wall))?;
    let nodes = wall.nodes.clone();
    let seed_index = match seed_node {
        None => 0,
        Some(n) => nodes
            .binary_search(n)
            .map_err(|_| CoverError::SeedNotInWall(n.clone()))?,
    };
    let mut node_vectors = Vec::new();
    for n in &nodes {
        let v = set.circles_at(&n.vertex)[n.circle].vector.clone();
        if !v.is_primitive() {
            return Err(CoverError::NonPrimitiveCircle(n.clone()));
        }
        node_vectors.push(v);
    }
    let lifter = Lifter::new(space, set, points, matching, &nodes, config.window)?;

    let mut periods = vec![1u64; nodes.len()];
    for (i, &(v, circle, _)) in lifter.node_key.iter().enumerate() {
        for end in lifter.ends.iter().filter(|e| e.vertex == v) {
            let len = (end.k * det(lifter.circles[v][circle], end.fp).abs()) as u64;
            if len != 0 {
                periods[i] = lcm_u64(periods[i], len);
            }
        }
    }

    let root_vertex = lifter.node_key[seed_index].0;
    let walls: Vec<WallTag> = (-config.window..=config.window)
        .map(|root_offset| WallTag { root_offset })
        .collect();
    let root_lines: Vec<WallLine> = walls
        .iter()
        .enumerate()
        .map(|(w, tag)| WallLine {
            wall: w,
            node: seed_index,
            offset: tag.root_offset,
        })
        .collect();
    let mut vertices = vec![TreeVertex {
        vertex: root_vertex,
        parent: None,
        via: None,
        depth: 0,
        lines: root_lines,
    }];

    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let (vertex, depth, back) = {
            let tv = &vertices[id];
            if tv.depth >= config.radius || tv.lines.len() < 2 {
                continue;
            }
            // the strip leading back to the parent, in this vertex's frame
            let back = tv.via.map(|via| (via.edge, via.side.opposite()));
            (tv.vertex, tv.depth, back)
        };
        for strip in lifter.strips(vertex, config.attach_window) {
            if back == Some((strip.edge, strip.side)) && strip.q == 0 && strip.t == 0 {
                continue;
            }
            let mut lines: Vec<WallLine> = vertices[id]
                .lines
                .iter()
                .filter_map(|l| {
                    let (node, offset) =
                        lifter.cross(l.node, l.offset, strip.edge, strip.side, strip.q, strip.t)?;
                    (offset.abs() <= lifter.window).then_some(WallLine {
                        wall: l.wall,
                        node,
                        offset,
                    })
                })
                .collect();
            if lines.is_empty() {
                continue;
            }
            lines.sort_by_key(|l| (l.node, l.offset, l.wall));
            if vertices.len() >= config.max_vertices {
                return Err(CoverError::Guard {
                    what: "ball vertices",
                    value: vertices.len() as u64 + 1,
                    limit: config.max_vertices as u64,
                });
            }
            let far = space
                .vertex_index(space.edges()[strip.edge].vertex(strip.side.opposite()))
                .expect("validated");
            vertices.push(TreeVertex {
                vertex: far,
                parent: Some(id),
                via: Some(strip),
                depth: depth + 1,
                lines,
            });
            queue.push_back(vertices.len() - 1);
        }
    }

    Ok(CoverBall {
        config,
        seed_wall,
        seed_node: seed_index,
        nodes,
        node_vectors,
        walls,
        vertices,
        quotient: system.quotient_graph(seed_wall)?,
        periods,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    Regular,
    NonRegular,
}

impl CrossingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossingKind::Regular => "REGULAR",
            CrossingKind::NonRegular => "NON_REGULAR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub a: usize,
    pub b: usize,
    pub kind: CrossingKind,
    /// First tree vertex (in ball order) where the pair meets this way.
    pub witness: usize,
}

/// Walls present in the ball and how they meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingGraph {
    pub nodes: Vec<usize>,
    /// Sorted by (a, b); `a < b`. A pair that meets both ways is REGULAR.
    pub edges: Vec<Crossing>,
}

impl CrossingGraph {
    pub fn regular(&self) -> impl Iterator<Item = &Crossing> {
        self.edges
            .iter()
            .filter(|c| c.kind == CrossingKind::Regular)
    }

    /// Plain-text adjacency list of REGULAR crossings, one wall per line.
    pub fn adjacency_text(&self, ball: &CoverBall) -> String {
        let mut adj: BTreeMap<usize, Vec<usize>> =
            self.nodes.iter().map(|&n| (n, Vec::new())).collect();
        for c in self.regular() {
            adj.entry(c.a).or_default().push(c.b);
            adj.entry(c.b).or_default().push(c.a);
        }
        let mut out = String::new();
        for (w, mut list) in adj {
            list.sort();
            let names: Vec<String> = list.iter().map(|&x| ball.wall_name(x)).collect();
            let _ = writeln!(out, "{}: {}", ball.wall_name(w), names.join(" "));
        }
        out
    }
}

/// Bitset over wall indices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| k * 64 + b)
        })
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn minus(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & !b).collect())
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
}

pub fn crossing_graph(ball: &CoverBall) -> CrossingGraph {
    let n = ball.walls.len();
    let mut present = Bits::new(n);
    let mut kind: BTreeMap<(usize, usize), Crossing> = BTreeMap::new();
    let mut regular: Vec<Bits> = vec![Bits::new(n); n];
    let mut parallel: Vec<Bits> = vec![Bits::new(n); n];
    let classes: Vec<LatticeVector> = ball
        .node_vectors
        .iter()
        .map(|v| v.sign_normalized())
        .collect();

    for (vid, tv) in ball.vertices.iter().enumerate() {
        let mut by_class: BTreeMap<&LatticeVector, Bits> = BTreeMap::new();
        for l in &tv.lines {
            present.set(l.wall);
            by_class
                .entry(&classes[l.node])
                .or_insert_with(|| Bits::new(n))
                .set(l.wall);
        }
        let groups: Vec<&Bits> = by_class.values().collect();
        for (gi, g) in groups.iter().enumerate() {
            let others = groups.iter().enumerate().filter(|(gj, _)| *gj != gi).fold(
                Bits::new(n),
                |mut acc, (_, h)| {
                    for (a, b) in acc.0.iter_mut().zip(&h.0) {
                        *a |= b;
                    }
                    acc
                },
            );
            for x in g.iter() {
                let fresh = others.minus(&regular[x]);
                for y in fresh.iter() {
                    regular[x].set(y);
                    regular[y].set(x);
                    let key = (x.min(y), x.max(y));
                    kind.insert(
                        key,
                        Crossing {
                            a: key.0,
                            b: key.1,
                            kind: CrossingKind::Regular,
                            witness: vid,
                        },
                    );
                }
                let mut same = (*g).clone();
                same.0[x / 64] &= !(1 << (x % 64));
                let fresh = same.minus(&parallel[x]).minus(&regular[x]);
                for y in fresh.iter() {
                    parallel[x].set(y);
                    parallel[y].set(x);
                    let key = (x.min(y), x.max(y));
                    kind.entry(key).or_insert(Crossing {
                        a: key.0,
                        b: key.1,
                        kind: CrossingKind::NonRegular,
                        witness: vid,
                    });
                }
            }
        }
    }
    CrossingGraph {
        nodes: present.iter().collect(),
        edges: kind.into_values().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clique {
    pub size: usize,
    pub walls: Vec<usize>,
    pub exact: bool,
}

pub const DEFAULT_EXACT_THRESHOLD: usize = 40;

/// Largest set of pairwise REGULAR-crossing walls: exact branch and bound
/// up to `exact_threshold` walls, greedy above.
pub fn max_crossing_clique(graph: &CrossingGraph, exact_threshold: usize) -> Clique {
    let nodes = &graph.nodes;
    let n = nodes.len();
    if n == 0 {
        return Clique {
            size: 0,
            walls: Vec::new(),
            exact: true,
        };
    }
    let pos: BTreeMap<usize, usize> = nodes.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let mut adj = vec![Bits::new(n); n];
    for c in graph.regular() {
        let (a, b) = (pos[&c.a], pos[&c.b]);
        adj[a].set(b);
        adj[b].set(a);
    }
    let mut all = Bits::new(n);
    for i in 0..n {
        all.set(i);
    }

    let best = if n <= exact_threshold {
        let mut best = Vec::new();
        branch_and_bound(&adj, &mut Vec::new(), all, &mut best);
        best
    } else {
        // greedy: repeatedly take the candidate with most neighbours among
        // the remaining candidates
        let mut clique = Vec::new();
        let mut cand = all;
        while !cand.is_empty() {
            let v = cand
                .iter()
                .max_by_key(|&v| (adj[v].and(&cand).count(), std::cmp::Reverse(v)))
                .expect("nonempty");
            clique.push(v);
            cand = cand.and(&adj[v]);
        }
        clique
    };
    let mut walls: Vec<usize> = best.iter().map(|&i| nodes[i]).collect();
    walls.sort();
    Clique {
        size: walls.len(),
        walls,
        exact: n <= exact_threshold,
    }
}

/// Greedy colouring of `p` in index order; returns vertices ordered by
/// colour with their colour numbers (1-based, nondecreasing).
fn colour_sort(adj: &[Bits], p: &Bits) -> Vec<(usize, usize)> {
    let mut uncoloured = p.clone();
    let mut out = Vec::new();
    let mut colour = 0;
    while !uncoloured.is_empty() {
        colour += 1;
        let mut avail = uncoloured.clone();
        loop {
            let first = avail.iter().next();
            let Some(v) = first else { break };
            out.push((v, colour));
            uncoloured.0[v / 64] &= !(1 << (v % 64));
            avail = avail.minus(&adj[v]);
            avail.0[v / 64] &= !(1 << (v % 64));
        }
    }
    out
}

/// Branch and bound with colouring bounds: a set coloured with `k` colours
/// holds no clique larger than `k`.
fn branch_and_bound(adj: &[Bits], r: &mut Vec<usize>, p: Bits, best: &mut Vec<usize>) {
    let order = colour_sort(adj, &p);
    let mut p = p;
    for &(v, colour) in order.iter().rev() {
        if r.len() + colour <= best.len() {
            return;
        }
        r.push(v);
        let next = p.and(&adj[v]);
        if next.is_empty() {
            if r.len() > best.len() {
                *best = r.clone();
            }
        } else {
            branch_and_bound(adj, r, next, best);
        }
        r.pop();
        p.0[v / 64] &= !(1 << (v % 64));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionReport {
    /// Offsets at the root are grouped into residue classes modulo `step`.
    pub step: u64,
    /// Residue classes met by walls in the ball.
    pub progressions: usize,
    /// REGULAR crossings between walls of the same class.
    pub violations: Vec<Crossing>,
    pub crossing_free: bool,
    pub radius: u32,
    pub window: i64,
}

/// Groups the seed wall's translates at the root into progressions of
/// offsets that a single root element shifts into one another, and checks
/// that no two walls of a progression cross inside the ball.
///
/// The step is the smallest shift of the seed line that moves every line of
/// the wall by whole periods: with `|phi(C)|` the relative scale of node
/// `C` (1 at the seed, divided by `|omega|` along each arc), the shift `D`
/// moves `C`-lines by `D |phi(C)|`, which must be a multiple of `C`'s period.
pub fn verify_partition(
    ball: &CoverBall,
    graph: &CrossingGraph,
    dilation: &DilationResult,
) -> Result<PartitionReport, CoverError> {
    if dilation.status == Status::Dilated {
        return Err(CoverError::Dilated(wall_label(ball.seed_wall)));
    }
    let g = &ball.quotient;
    let n = g.nodes.len();
    let mut phi: Vec<Option<ExactRational>> = vec![None; n];
    phi[ball.seed_node] = Some(ExactRational::one());
    let mut queue = VecDeque::from([ball.seed_node]);
    while let Some(v) = queue.pop_front() {
        let here = phi[v].clone().expect("visited");
        for a in &g.arcs {
            let w = a.weight.clone();
            let w = if w < ExactRational::from_integer(0.into()) {
                -w
            } else {
                w
            };
            let next = if a.source == v {
                Some((a.target, &here / &w))
            } else if a.target == v {
                Some((a.source, &here * &w))
            } else {
                None
            };
            if let Some((u, val)) = next {
                if phi[u].is_none() {
                    phi[u] = Some(val);
                    queue.push_back(u);
                }
            }
        }
    }
    let mut step: u64 = 1;
    for (c, p) in phi.iter().enumerate() {
        let Some(p) = p else { continue };
        let num = p.numer().to_u64().ok_or(CoverError::TooLarge)?;
        let den = p.denom().to_u64().ok_or(CoverError::TooLarge)?;
        let m = ball.periods[c]
            .checked_mul(den)
            .ok_or(CoverError::TooLarge)?;
        step = lcm_u64(step, m / m.gcd(&num));
    }
    let class = |w: usize| ball.walls[w].root_offset.rem_euclid(step as i64);
    let progressions = graph
        .nodes
        .iter()
        .map(|&w| class(w))
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let violations: Vec<Crossing> = graph
        .regular()
        .filter(|c| class(c.a) == class(c.b))
        .copied()
        .collect();
    Ok(PartitionReport {
        step,
        progressions,
        crossing_free: violations.is_empty(),
        violations,
        radius: ball.config.radius,
        window: ball.config.window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::classify_walls;
    use crate::equitable::CircleSpec;
    use crate::space::tests::{edge, vertex};
    use crate::space::EdgeId;
    use crate::walls::{build_walls, enumerate_points};

    struct Fixture {
        space: TubularSpace,
        set: EquitableSet,
        points: PointTable,
        matching: Matching,
        system: WallSystem,
    }

    fn fixture(vs: &[(i64, i64)], pairs: &[(usize, usize)]) -> Fixture {
        let space = TubularSpace::new(vec![vertex("v")], vec![edge("t", "v", "v", (1, 0), (0, 1))]);
        let set =
            EquitableSet::new().with("v", vs.iter().map(|&v| CircleSpec::new(v, 1)).collect());
        let points = enumerate_points(&space, &set).unwrap();
        let matching = Matching {
            pairs: [(EdgeId::from("t"), pairs.to_vec())].into_iter().collect(),
        };
        let system = build_walls(&space, &set, &points, &matching).unwrap();
        Fixture {
            space,
            set,
            points,
            matching,
            system,
        }
    }

    fn hnn() -> Fixture {
        fixture(&[(1, 0), (1, 2)], &[(0, 0), (1, 1)])
    }

    fn ball(f: &Fixture, seed: usize, radius: u32, window: i64) -> CoverBall {
        let node = f.system.horizontal[0].nodes[seed].clone();
        expand_ball(
            &f.space,
            &f.set,
            &f.points,
            &f.matching,
            &f.system,
            0,
            Some(&node),
            CoverConfig::new(radius, window),
        )
        .unwrap()
    }

    #[test]
    fn radius_zero_is_root_only() {
        let f = hnn();
        let b = ball(&f, 1, 0, 3);
        assert_eq!(b.vertices.len(), 1);
        assert_eq!(b.root().lines.len(), 7);
        assert!(crossing_graph(&b).regular().next().is_none());
    }

    #[test]
    fn even_lines_reindex_consecutively() {
        let f = hnn();
        let b = ball(&f, 1, 1, 8);
        // the child across the init strip through the origin
        let (_, child) = b
            .children(0)
            .find(|(_, c)| {
                c.via
                    == Some(TreeEdge {
                        edge: 0,
                        side: Side::Init,
                        q: 0,
                        t: 0,
                    })
            })
            .unwrap();
        for l in &child.lines {
            let d = b.walls[l.wall].root_offset;
            if d.rem_euclid(2) == 0 {
                assert_eq!(l.node, b.seed_node);
                assert_eq!(l.offset, -d / 2 - 1);
            } else {
                assert_ne!(l.node, b.seed_node);
            }
        }
    }

    #[test]
    fn crossing_round_trip_through_origin_strip() {
        let f = hnn();
        let b = ball(&f, 1, 0, 0);
        let lifter = Lifter::new(&f.space, &f.set, &f.points, &f.matching, &b.nodes, 1000).unwrap();
        for node in 0..b.nodes.len() {
            for d in -20..=20 {
                for side in [Side::Init, Side::Term] {
                    if let Some((n2, d2)) = lifter.cross(node, d, 0, side, 0, 0) {
                        assert_eq!(
                            lifter.cross(n2, d2, 0, side.opposite(), 0, 0),
                            Some((node, d))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hnn_clique_grows() {
        // recorded: the largest crossing family doubles with each radius
        let f = hnn();
        for r in 0..=4u32 {
            let b = ball(&f, 1, r, 16);
            let c = max_crossing_clique(&crossing_graph(&b), 40);
            assert_eq!(c.size, 1 << r, "radius {r}");
            assert!(c.exact);
        }
    }

    #[test]
    fn lines_are_unique_per_vertex() {
        let f = hnn();
        let b = ball(&f, 1, 3, 16);
        for tv in &b.vertices {
            let mut seen = BTreeMap::new();
            for l in &tv.lines {
                assert_eq!(*seen.entry((l.node, l.offset)).or_insert(l.wall), l.wall);
            }
        }
    }

    #[test]
    fn spiral_wall_stays_embedded() {
        let f = fixture(&[(-1, 1)], &[(0, 0)]);
        let b = ball(&f, 0, 4, 10);
        let g = crossing_graph(&b);
        assert!(g.regular().next().is_none());
        // each line continues to exactly one line per strip it crosses
        let root_lines = b.root().lines.len();
        for (_, c) in b.children(0).filter(|(_, c)| c.via.map(|v| v.q) == Some(0)) {
            assert!(c.lines.len() <= root_lines);
        }
        let v = classify_walls(&f.system).unwrap();
        let p = verify_partition(&b, &g, &v.walls[0]).unwrap();
        assert!(p.crossing_free);
        assert_eq!(p.step, 1);
    }

    #[test]
    fn five_three_left_has_no_crossings() {
        let f = fixture(&[(2, 1), (1, 2)], &[(0, 2), (1, 0), (2, 1)]);
        for r in 1..=4 {
            let b = ball(&f, 0, r, 12);
            let g = crossing_graph(&b);
            assert_eq!(
                max_crossing_clique(&g, 40).size.min(1),
                max_crossing_clique(&g, 40).size
            );
        }
        let b = ball(&f, 0, 3, 12);
        let g = crossing_graph(&b);
        let v = classify_walls(&f.system).unwrap();
        let p = verify_partition(&b, &g, &v.walls[0]).unwrap();
        assert!(p.crossing_free);
        assert_eq!(p.step, 2);
    }

    #[test]
    fn dilated_wall_is_refused() {
        let f = hnn();
        let b = ball(&f, 1, 1, 4);
        let g = crossing_graph(&b);
        let v = classify_walls(&f.system).unwrap();
        assert!(matches!(
            verify_partition(&b, &g, &v.walls[0]),
            Err(CoverError::Dilated(_))
        ));
    }

    #[test]
    fn guards() {
        let f = hnn();
        let node = f.system.horizontal[0].nodes[1].clone();
        let mut cfg = CoverConfig::new(8, 32);
        cfg.max_vertices = 10;
        assert!(matches!(
            expand_ball(
                &f.space,
                &f.set,
                &f.points,
                &f.matching,
                &f.system,
                0,
                Some(&node),
                cfg
            ),
            Err(CoverError::Guard { .. })
        ));
        let cfg = CoverConfig::new(1000, 1);
        assert!(matches!(
            expand_ball(
                &f.space,
                &f.set,
                &f.points,
                &f.matching,
                &f.system,
                0,
                Some(&node),
                cfg
            ),
            Err(CoverError::Guard { .. })
        ));
    }

    #[test]
    fn clique_search_small_graphs() {
        let graph = |n: usize, edges: &[(usize, usize)]| CrossingGraph {
            nodes: (0..n).collect(),
            edges: edges
                .iter()
                .map(|&(a, b)| Crossing {
                    a,
                    b,
                    kind: CrossingKind::Regular,
                    witness: 0,
                })
                .collect(),
        };
        assert_eq!(max_crossing_clique(&graph(0, &[]), 40).size, 0);
        assert_eq!(max_crossing_clique(&graph(3, &[]), 40).size, 1);
        // a 4-clique hidden in a 6-cycle with chords
        let g = graph(
            6,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 0),
                (1, 3),
                (1, 4),
                (2, 4),
                (0, 3),
            ],
        );
        let c = max_crossing_clique(&g, 40);
        assert_eq!(c.size, 4);
        assert_eq!(c.walls, vec![1, 2, 3, 4]);
        assert!(c.exact);
        let c = max_crossing_clique(&g, 2);
        assert!(!c.exact);
        assert!(c.size <= 4 && c.size >= 2);
    }

    #[test]
    fn clique_matches_brute_force() {
        // pseudo-random graphs on 10 nodes against subset enumeration
        let mut seed: u64 = 12345;
        for _ in 0..30 {
            let mut edges = Vec::new();
            for a in 0..10 {
                for b in a + 1..10 {
                    seed = seed
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    if seed >> 62 != 0 {
                        edges.push((a, b));
                    }
                }
            }
            let g = CrossingGraph {
                nodes: (0..10).collect(),
                edges: edges
                    .iter()
                    .map(|&(a, b)| Crossing {
                        a,
                        b,
                        kind: CrossingKind::Regular,
                        witness: 0,
                    })
                    .collect(),
            };
            let mut best = 0;
            for mask in 0u32..1 << 10 {
                let members: Vec<usize> = (0..10).filter(|i| mask >> i & 1 == 1).collect();
                let ok = members.iter().all(|&a| {
                    members
                        .iter()
                        .all(|&b| a >= b || edges.contains(&(b.min(a), b.max(a))))
                });
                if ok {
                    best = best.max(members.len());
                }
            }
            assert_eq!(max_crossing_clique(&g, 40).size, best);
        }
    }

    #[test]
    fn adjacency_export_names_walls() {
        let f = hnn();
        let b = ball(&f, 1, 2, 4);
        let g = crossing_graph(&b);
        let text = g.adjacency_text(&b);
        assert!(text.lines().count() == g.nodes.len());
        assert!(text.starts_with("W0@"));
    }
}

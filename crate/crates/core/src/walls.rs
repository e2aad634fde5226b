//! Horizontal and vertical immersed walls built from an equitable set and
//! a matching of intersection points across every edge cylinder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::equitable::{check_balance, EquitableError, EquitableSet};
use crate::lattice::{intersection_number, ratio, ExactRational};
use crate::space::{EdgeId, Side, TubularSpace, VertexId};

/// Upper bound on intersection points materialized per edge side.
pub const MAX_POINTS_PER_SIDE: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WallError {
    #[error(transparent)]
    Equitable(#[from] EquitableError),
    #[error("edge {edge} is unbalanced: {left} init-side points vs {right} term-side points")]
    Unbalanced {
        edge: EdgeId,
        left: BigUint,
        right: BigUint,
    },
    #[error("edge {edge} has more than {limit} intersection points per side")]
    TooManyPoints { edge: EdgeId, limit: u64 },
    #[error("matching names unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("matching for edge {edge} has {got} pairs, expected {expected}")]
    PairCount {
        edge: EdgeId,
        expected: usize,
        got: usize,
    },
    #[error("matching for edge {edge}: {side} point index {index} out of range")]
    IndexOutOfRange {
        edge: EdgeId,
        side: &'static str,
        index: usize,
    },
    #[error("matching for edge {edge} is not a bijection: {side} point {index} used twice")]
    NotBijective {
        edge: EdgeId,
        side: &'static str,
        index: usize,
    },
    #[error("too many matchings to enumerate ({count} > {limit})")]
    TooManyMatchings { count: u128, limit: u128 },
    #[error("wall {0} does not exist")]
    UnknownWall(usize),
}

/// One parallel copy of a circle of the equitable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircleNode {
    pub vertex: VertexId,
    /// Index into the vertex's circle list.
    pub circle: usize,
    /// Which of the `multiplicity` parallel copies.
    pub copy: u32,
}

impl fmt::Display for CircleNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.copy == 0 {
            write!(f, "{}/{}", self.vertex, self.circle)
        } else {
            write!(f, "{}/{}#{}", self.vertex, self.circle, self.copy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionPoint {
    pub edge: EdgeId,
    pub side: Side,
    pub vertex: VertexId,
    pub circle: usize,
    /// Position among the `multiplicity * count` points of this circle.
    pub slot: u64,
    /// `#[attach, circle]`, the number of points per copy.
    pub count: u64,
}

impl IntersectionPoint {
    pub fn node(&self) -> CircleNode {
        CircleNode {
            vertex: self.vertex.clone(),
            circle: self.circle,
            copy: (self.slot / self.count) as u32,
        }
    }
}

/// Intersection points of every edge side, in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PointTable {
    points: BTreeMap<(EdgeId, Side), Vec<IntersectionPoint>>,
}

impl PointTable {
    pub fn side(&self, edge: &EdgeId, side: Side) -> &[IntersectionPoint] {
        self.points
            .get(&(edge.clone(), side))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Number of points on either side of an edge.
    pub fn count(&self, edge: &EdgeId) -> usize {
        self.side(edge, Side::Init).len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeId> {
        self.points
            .keys()
            .filter(|(_, s)| *s == Side::Init)
            .map(|(e, _)| e)
    }
}

/// Lists the intersection points of each attaching circle with the
/// equitable circles at its vertex: circles in input order, slots ascending.
pub fn enumerate_points(space: &TubularSpace, set: &EquitableSet) -> Result<PointTable, WallError> {
    let balance = check_balance(space, set)?;
    if let Some(bad) = balance.unbalanced().next() {
        return Err(WallError::Unbalanced {
            edge: bad.edge.clone(),
            left: bad.left.clone(),
            right: bad.right.clone(),
        });
    }
    let mut points = BTreeMap::new();
    for e in space.edges() {
        for side in [Side::Init, Side::Term] {
            let vertex = e.vertex(side);
            let mut list = Vec::new();
            for (circle, c) in set.circles_at(vertex).iter().enumerate() {
                let count = intersection_number(e.attach(side), &c.vector);
                let total = &count * c.multiplicity;
                let (Some(count), Some(total)) = (count.to_u64(), total.to_u64()) else {
                    return Err(WallError::TooManyPoints {
                        edge: e.id.clone(),
                        limit: MAX_POINTS_PER_SIDE,
                    });
                };
                if list.len() as u64 + total > MAX_POINTS_PER_SIDE {
                    return Err(WallError::TooManyPoints {
                        edge: e.id.clone(),
                        limit: MAX_POINTS_PER_SIDE,
                    });
                }
                for slot in 0..total {
                    list.push(IntersectionPoint {
                        edge: e.id.clone(),
                        side,
                        vertex: vertex.clone(),
                        circle,
                        slot,
                        count,
                    });
                }
            }
            points.insert((e.id.clone(), side), list);
        }
    }
    Ok(PointTable { points })
}

/// Per edge, pairs `(init point index, term point index)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pub pairs: BTreeMap<EdgeId, Vec<(usize, usize)>>,
}

impl Matching {
    /// Pairs the k-th init point with the k-th term point on every edge.
    pub fn identity(points: &PointTable) -> Matching {
        let pairs = points
            .edges()
            .map(|e| (e.clone(), (0..points.count(e)).map(|k| (k, k)).collect()))
            .collect();
        Matching { pairs }
    }

    /// Checks that every edge carries a bijection between its point sets.
    /// Edges without points may be omitted.
    pub fn validate(&self, points: &PointTable) -> Result<(), WallError> {
        for e in self.pairs.keys() {
            if !points.points.contains_key(&(e.clone(), Side::Init)) {
                return Err(WallError::UnknownEdge(e.clone()));
            }
        }
        for e in points.edges() {
            let n = points.count(e);
            let pairs = self.pairs.get(e).map(Vec::as_slice).unwrap_or(&[]);
            if pairs.len() != n {
                return Err(WallError::PairCount {
                    edge: e.clone(),
                    expected: n,
                    got: pairs.len(),
                });
            }
            let mut seen = [vec![false; n], vec![false; n]];
            for &(i, t) in pairs {
                for (k, (index, side)) in [(i, "init"), (t, "term")].into_iter().enumerate() {
                    if index >= n {
                        return Err(WallError::IndexOutOfRange {
                            edge: e.clone(),
                            side,
                            index,
                        });
                    }
                    if std::mem::replace(&mut seen[k][index], true) {
                        return Err(WallError::NotBijective {
                            edge: e.clone(),
                            side,
                            index,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |a, k| a.saturating_mul(k))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn product_of<T: Clone>(per_edge: Vec<(EdgeId, Vec<T>)>) -> Vec<BTreeMap<EdgeId, T>> {
    let mut out = vec![BTreeMap::new()];
    for (edge, options) in per_edge {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for partial in &out {
            for o in &options {
                let mut m: BTreeMap<EdgeId, T> = partial.clone();
                m.insert(edge.clone(), o.clone());
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Every matching of the point table, in lexicographic order of the
/// per-edge permutations.
pub fn all_matchings(points: &PointTable, limit: u128) -> Result<Vec<Matching>, WallError> {
    let count = points
        .edges()
        .fold(1u128, |a, e| a.saturating_mul(factorial(points.count(e))));
    if count > limit {
        return Err(WallError::TooManyMatchings { count, limit });
    }
    let per_edge = points
        .edges()
        .map(|e| {
            let perms: Vec<Vec<(usize, usize)>> = permutations(points.count(e))
                .into_iter()
                .map(|p| p.into_iter().enumerate().collect())
                .collect();
            (e.clone(), perms)
        })
        .collect();
    Ok(product_of(per_edge)
        .into_iter()
        .map(|pairs| Matching { pairs })
        .collect())
}

/// Nonnegative integer matrices with the given row and column sums.
fn contingency_tables(rows: &[usize], cols: &[usize]) -> Vec<Vec<Vec<usize>>> {
    fn fill(
        rows: &[usize],
        cols: &mut Vec<usize>,
        r: usize,
        c: usize,
        left_in_row: usize,
        cur: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if r == rows.len() {
            if cols.iter().all(|&x| x == 0) {
                out.push(cur.clone());
            }
            return;
        }
        if c == cols.len() {
            if left_in_row == 0 {
                let next = rows.get(r + 1).copied().unwrap_or(0);
                fill(rows, cols, r + 1, 0, next, cur, out);
            }
            return;
        }
        let hi = left_in_row.min(cols[c]);
        for k in 0..=hi {
            cur[r][c] = k;
            cols[c] -= k;
            fill(rows, cols, r, c + 1, left_in_row - k, cur, out);
            cols[c] += k;
        }
        cur[r][c] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![vec![0; cols.len()]; rows.len()];
    let first = rows.first().copied().unwrap_or(0);
    fill(rows, &mut cols.to_vec(), 0, 0, first, &mut cur, &mut out);
    out
}

/// One representative matching for every distinct way of pairing circle
/// copies across each edge (how many init points of node A meet term points
/// of node B). Walls and quotient graphs depend only on this data, so this
/// covers every matching's classification with far fewer cases.
pub fn matching_classes(points: &PointTable, limit: u128) -> Result<Vec<Matching>, WallError> {
    let mut per_edge = Vec::new();
    let mut count: u128 = 1;
    for e in points.edges() {
        let group = |side| {
            let mut nodes: Vec<(CircleNode, Vec<usize>)> = Vec::new();
            for (k, p) in points.side(e, side).iter().enumerate() {
                let node = p.node();
                match nodes.last_mut() {
                    Some((n, idx)) if *n == node => idx.push(k),
                    _ => nodes.push((node, vec![k])),
                }
            }
            nodes
        };
        let init = group(Side::Init);
        let term = group(Side::Term);
        let rows: Vec<usize> = init.iter().map(|(_, v)| v.len()).collect();
        let cols: Vec<usize> = term.iter().map(|(_, v)| v.len()).collect();
        let tables = contingency_tables(&rows, &cols);
        count = count.saturating_mul(tables.len() as u128);
        if count > limit {
            return Err(WallError::TooManyMatchings { count, limit });
        }
        let options: Vec<Vec<(usize, usize)>> = tables
            .into_iter()
            .map(|t| {
                let mut used_term = vec![0usize; term.len()];
                let mut pairs = Vec::new();
                for (i, row) in t.iter().enumerate() {
                    let mut used = 0;
                    for (j, &n) in row.iter().enumerate() {
                        for _ in 0..n {
                            pairs.push((init[i].1[used], term[j].1[used_term[j]]));
                            used += 1;
                            used_term[j] += 1;
                        }
                    }
                }
                pairs.sort();
                pairs
            })
            .collect();
        per_edge.push((e.clone(), options));
    }
    Ok(product_of(per_edge)
        .into_iter()
        .map(|pairs| Matching { pairs })
        .collect())
}

/// An arc of a horizontal wall, crossing edge cylinder `edge` from an init
/// point to a term point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallArc {
    pub edge: EdgeId,
    pub init_point: usize,
    pub term_point: usize,
    pub source: CircleNode,
    pub target: CircleNode,
    /// `#[f<-, source circle]`
    pub source_count: u64,
    /// `#[f->, target circle]`
    pub target_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallComponent {
    pub id: usize,
    pub nodes: Vec<CircleNode>,
    pub arcs: Vec<WallArc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalWall {
    pub edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallSystem {
    pub horizontal: Vec<WallComponent>,
    pub vertical: Vec<VerticalWall>,
}

pub fn build_walls(
    space: &TubularSpace,
    set: &EquitableSet,
    points: &PointTable,
    matching: &Matching,
) -> Result<WallSystem, WallError> {
    matching.validate(points)?;

    let mut nodes: Vec<CircleNode> = Vec::new();
    for v in space.vertices() {
        for (circle, c) in set.circles_at(&v.id).iter().enumerate() {
            for copy in 0..c.multiplicity {
                nodes.push(CircleNode {
                    vertex: v.id.clone(),
                    circle,
                    copy,
                });
            }
        }
    }
    nodes.sort();
    let index = |n: &CircleNode| nodes.binary_search(n).expect("point on a known circle");

    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut arcs = Vec::new();
    for (edge, pairs) in &matching.pairs {
        let mut sorted = pairs.clone();
        sorted.sort();
        for (i, t) in sorted {
            let p = &points.side(edge, Side::Init)[i];
            let q = &points.side(edge, Side::Term)[t];
            let (a, b) = (
                find(&mut parent, index(&p.node())),
                find(&mut parent, index(&q.node())),
            );
            parent[a.max(b)] = a.min(b);
            arcs.push(WallArc {
                edge: edge.clone(),
                init_point: i,
                term_point: t,
                source: p.node(),
                target: q.node(),
                source_count: p.count,
                target_count: q.count,
            });
        }
    }

    // components ordered by their smallest node
    let mut by_root: BTreeMap<usize, Vec<CircleNode>> = BTreeMap::new();
    for (k, node) in nodes.iter().enumerate() {
        let r = find(&mut parent, k);
        by_root.entry(r).or_default().push(node.clone());
    }
    let mut horizontal: Vec<WallComponent> = by_root
        .into_values()
        .map(|nodes| WallComponent {
            id: 0,
            nodes,
            arcs: Vec::new(),
        })
        .collect();
    horizontal.sort_by(|a, b| a.nodes[0].cmp(&b.nodes[0]));
    let mut owner: BTreeMap<CircleNode, usize> = BTreeMap::new();
    for (id, w) in horizontal.iter_mut().enumerate() {
        w.id = id;
        for n in &w.nodes {
            owner.insert(n.clone(), id);
        }
    }
    for arc in arcs {
        horizontal[owner[&arc.source]].arcs.push(arc);
    }

    let vertical = space
        .edges()
        .iter()
        .map(|e| VerticalWall { edge: e.id.clone() })
        .collect();
    Ok(WallSystem {
        horizontal,
        vertical,
    })
}

/// Wall labels used in reports and on the command line.
pub fn wall_label(id: usize) -> String {
    format!("W{id}")
}

pub fn parse_wall_label(s: &str) -> Option<usize> {
    s.strip_prefix('W').unwrap_or(s).parse().ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientArc {
    pub source: usize,
    pub target: usize,
    pub weight: ExactRational,
    pub edge: EdgeId,
    pub init_point: usize,
}

/// A wall with each circle collapsed to a node; arcs weighted by
/// `#[f<-, source] / #[f->, target]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub wall: usize,
    pub nodes: Vec<CircleNode>,
    pub arcs: Vec<QuotientArc>,
}

impl QuotientGraph {
    /// The same graph with every arc through `edge` reversed (weight
    /// inverted): the opposite direction convention for that edge space.
    pub fn with_edge_flipped(&self, edge: &EdgeId) -> QuotientGraph {
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                if &a.edge == edge {
                    QuotientArc {
                        source: a.target,
                        target: a.source,
                        weight: a.weight.recip(),
                        ..a.clone()
                    }
                } else {
                    a.clone()
                }
            })
            .collect();
        QuotientGraph {
            arcs,
            ..self.clone()
        }
    }
}

impl WallSystem {
    pub fn quotient_graph(&self, wall: usize) -> Result<QuotientGraph, WallError> {
        let w = self
            .horizontal
            .get(wall)
            .ok_or(WallError::UnknownWall(wall))?;
        let idx = |n: &CircleNode| w.nodes.binary_search(n).expect("arc inside its wall");
        let arcs = w
            .arcs
            .iter()
            .map(|a| QuotientArc {
                source: idx(&a.source),
                target: idx(&a.target),
                weight: ratio(
                    &BigUint::from(a.source_count),
                    &BigUint::from(a.target_count),
                ),
                edge: a.edge.clone(),
                init_point: a.init_point,
            })
            .collect();
        Ok(QuotientGraph {
            wall,
            nodes: w.nodes.clone(),
            arcs,
        })
    }

    /// Every circle node, across all horizontal walls.
    pub fn all_nodes(&self) -> BTreeSet<CircleNode> {
        self.horizontal
            .iter()
            .flat_map(|w| w.nodes.iter().cloned())
            .collect()
    }

    pub fn arc_count(&self) -> usize {
        self.horizontal.iter().map(|w| w.arcs.len()).sum()
    }
}

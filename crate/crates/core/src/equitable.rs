//! Equitable sets: per-vertex collections of torus circles whose
//! intersection counts balance across every edge cylinder.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::lattice::{intersection_number, subgroup_index, LatticeVector, SubgroupIndex};
use crate::space::{EdgeId, Side, TubularSpace, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquitableError {
    #[error("equitable set names unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("circle {index} at vertex {vertex} is the zero vector")]
    ZeroCircle { vertex: VertexId, index: usize },
    #[error("circle {index} at vertex {vertex} has multiplicity zero")]
    ZeroMultiplicity { vertex: VertexId, index: usize },
    #[error("search space of {size} candidate sets exceeds the limit {limit}")]
    SearchTooLarge { size: u128, limit: u128 },
}

/// A circle class together with the number of disjoint parallel copies of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircleSpec {
    pub vector: LatticeVector,
    pub multiplicity: u32,
}

impl CircleSpec {
    pub fn new(vector: impl Into<LatticeVector>, multiplicity: u32) -> Self {
        CircleSpec {
            vector: vector.into(),
            multiplicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquitableSet {
    pub circles: BTreeMap<VertexId, Vec<CircleSpec>>,
}

impl EquitableSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, vertex: &str, circles: Vec<CircleSpec>) -> Self {
        self.circles.insert(vertex.into(), circles);
        self
    }

    /// Circles at a vertex; an absent vertex has none.
    pub fn circles_at(&self, vertex: &VertexId) -> &[CircleSpec] {
        self.circles.get(vertex).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Total number of circles at a vertex, counted with multiplicity.
    pub fn count_at(&self, vertex: &VertexId) -> u64 {
        self.circles_at(vertex)
            .iter()
            .map(|c| c.multiplicity as u64)
            .sum()
    }

    /// Representative up to reordering and negation of circle vectors:
    /// vectors sign-normalized, equal vectors merged, sorted.
    pub fn canonical(&self) -> EquitableSet {
        let mut circles = BTreeMap::new();
        for (v, list) in &self.circles {
            let mut merged: BTreeMap<LatticeVector, u32> = BTreeMap::new();
            for c in list {
                *merged.entry(c.vector.sign_normalized()).or_default() += c.multiplicity;
            }
            let list: Vec<CircleSpec> = merged
                .into_iter()
                .map(|(vector, multiplicity)| CircleSpec {
                    vector,
                    multiplicity,
                })
                .collect();
            if !list.is_empty() {
                circles.insert(v.clone(), list);
            }
        }
        EquitableSet { circles }
    }

    /// Checks that every named vertex exists and every circle is a nonzero
    /// vector with positive multiplicity.
    pub fn check_shape(&self, space: &TubularSpace) -> Result<(), EquitableError> {
        for (v, list) in &self.circles {
            if space.vertex_index(v).is_none() {
                return Err(EquitableError::UnknownVertex(v.clone()));
            }
            for (index, c) in list.iter().enumerate() {
                if c.vector.is_zero() {
                    return Err(EquitableError::ZeroCircle {
                        vertex: v.clone(),
                        index,
                    });
                }
                if c.multiplicity == 0 {
                    return Err(EquitableError::ZeroMultiplicity {
                        vertex: v.clone(),
                        index,
                    });
                }
            }
        }
        Ok(())
    }

    /// `sum over circles C at v of multiplicity * #[attach, C]`.
    pub fn weighted_intersections(&self, vertex: &VertexId, attach: &LatticeVector) -> BigUint {
        self.circles_at(vertex)
            .iter()
            .map(|c| intersection_number(attach, &c.vector) * c.multiplicity)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBalance {
    pub edge: EdgeId,
    pub left: BigUint,
    pub right: BigUint,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub edges: Vec<EdgeBalance>,
}

impl BalanceReport {
    pub fn ok(&self) -> bool {
        self.edges.iter().all(|e| e.ok)
    }

    pub fn unbalanced(&self) -> impl Iterator<Item = &EdgeBalance> {
        self.edges.iter().filter(|e| !e.ok)
    }
}

pub fn check_balance(
    space: &TubularSpace,
    set: &EquitableSet,
) -> Result<BalanceReport, EquitableError> {
    set.check_shape(space)?;
    let edges = space
        .edges()
        .iter()
        .map(|e| {
            let left = set.weighted_intersections(e.vertex(Side::Init), e.attach(Side::Init));
            let right = set.weighted_intersections(e.vertex(Side::Term), e.attach(Side::Term));
            EdgeBalance {
                edge: e.id.clone(),
                ok: left == right,
                left,
                right,
            }
        })
        .collect();
    Ok(BalanceReport { edges })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexIndex {
    pub vertex: VertexId,
    pub index: SubgroupIndex,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteIndexReport {
    pub vertices: Vec<VertexIndex>,
}

impl FiniteIndexReport {
    pub fn ok(&self) -> bool {
        self.vertices.iter().all(|v| v.ok)
    }
}

pub fn check_finite_index(space: &TubularSpace, set: &EquitableSet) -> FiniteIndexReport {
    let vertices = space
        .vertices()
        .iter()
        .map(|v| {
            let vectors: Vec<LatticeVector> = set
                .circles_at(&v.id)
                .iter()
                .filter(|c| c.multiplicity > 0)
                .map(|c| c.vector.clone())
                .collect();
            let index = subgroup_index(&vectors);
            VertexIndex {
                vertex: v.id.clone(),
                ok: index.is_finite(),
                index,
            }
        })
        .collect();
    FiniteIndexReport { vertices }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub coord_bound: u32,
    pub max_circles: u32,
    pub require_finite_index: bool,
    /// Largest number of candidate sets the search will enumerate.
    pub max_search_space: u128,
}

impl SearchParams {
    pub const DEFAULT_MAX_SEARCH_SPACE: u128 = 20_000_000;

    pub fn new(coord_bound: u32, max_circles: u32, require_finite_index: bool) -> Self {
        SearchParams {
            coord_bound,
            max_circles,
            require_finite_index,
            max_search_space: Self::DEFAULT_MAX_SEARCH_SPACE,
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Multisets of at most `max` elements of `0..n`, as sorted index lists.
fn multisets(n: usize, max: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, max, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max, 0, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive search for balanced (optionally finite-index) sets with
/// coordinates bounded by `coord_bound` and at most `max_circles` circles
/// per vertex. Results are canonical and sorted; the all-empty set is never
/// reported.
pub fn search_equitable(
    space: &TubularSpace,
    params: &SearchParams,
) -> Result<Vec<EquitableSet>, EquitableError> {
    if params.max_circles == 0 || space.vertices().is_empty() {
        return Ok(Vec::new());
    }
    let b = params.coord_bound as i64;
    let mut candidates: Vec<LatticeVector> = Vec::new();
    for x in -b..=b {
        for y in -b..=b {
            let v = LatticeVector::new(x, y);
            if !v.is_zero() && v.sign_normalized() == v {
                candidates.push(v);
            }
        }
    }
    candidates.sort();

    let per_vertex: u128 = (0..=params.max_circles as u128)
        .map(|s| binomial(candidates.len() as u128 + s.saturating_sub(1), s))
        .fold(0u128, |a, c| a.saturating_add(c));
    let size = (0..space.vertices().len()).fold(1u128, |a, _| a.saturating_mul(per_vertex));
    if size > params.max_search_space {
        return Err(EquitableError::SearchTooLarge {
            size,
            limit: params.max_search_space,
        });
    }

    let choices = multisets(candidates.len(), params.max_circles as usize);
    let vertex_ids: Vec<VertexId> = space.vertices().iter().map(|v| v.id.clone()).collect();

    // contribution[vertex][choice][end] for every edge end at that vertex,
    // where ends are numbered 2*edge + side
    let edges = space.edges();
    let mut contribution: Vec<Vec<BTreeMap<usize, BigUint>>> = Vec::new();
    for (vi, _) in vertex_ids.iter().enumerate() {
        let ends = space.edge_ends_at(vi);
        let rows = choices
            .iter()
            .map(|choice| {
                ends.iter()
                    .map(|&(e, side)| {
                        let attach = edges[e].attach(side);
                        let total: BigUint = choice
                            .iter()
                            .map(|&c| intersection_number(attach, &candidates[c]))
                            .sum();
                        (2 * e + (side == Side::Term) as usize, total)
                    })
                    .collect()
            })
            .collect();
        contribution.push(rows);
    }
    let finite: Vec<bool> = choices
        .iter()
        .map(|choice| {
            let vs: Vec<LatticeVector> = choice.iter().map(|&c| candidates[c].clone()).collect();
            subgroup_index(&vs).is_finite()
        })
        .collect();

    let nv = vertex_ids.len();
    let mut found = Vec::new();
    let mut pick = vec![0usize; nv];
    loop {
        let all_empty = pick.iter().all(|&p| choices[p].is_empty());
        let index_ok = !params.require_finite_index || pick.iter().all(|&p| finite[p]);
        if !all_empty && index_ok {
            let mut totals: BTreeMap<usize, BigUint> = BTreeMap::new();
            for (vi, &p) in pick.iter().enumerate() {
                for (end, val) in &contribution[vi][p] {
                    *totals.entry(*end).or_insert_with(BigUint::zero) += val;
                }
            }
            let balanced = (0..edges.len()).all(|e| {
                let zero = BigUint::zero();
                totals.get(&(2 * e)).unwrap_or(&zero) == totals.get(&(2 * e + 1)).unwrap_or(&zero)
            });
            if balanced {
                let mut set = EquitableSet::new();
                for (vi, &p) in pick.iter().enumerate() {
                    let circles: Vec<CircleSpec> = choices[p]
                        .iter()
                        .map(|&c| CircleSpec::new(candidates[c].clone(), 1))
                        .collect();
                    if !circles.is_empty() {
                        set.circles.insert(vertex_ids[vi].clone(), circles);
                    }
                }
                found.push(set.canonical());
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == nv {
                found.sort_by_key(canonical_key);
                found.dedup();
                return Ok(found);
            }
            pick[i] += 1;
            if pick[i] < choices.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn canonical_key(set: &EquitableSet) -> Vec<(VertexId, Vec<(LatticeVector, u32)>)> {
    set.circles
        .iter()
        .map(|(v, list)| {
            (
                v.clone(),
                list.iter()
                    .map(|c| (c.vector.clone(), c.multiplicity))
                    .collect(),
            )
        })
        .collect()
}

//! The dilation homomorphism: cycle products on a wall's quotient graph,
//! wall and system classification, and shift exponents along carriers.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::equitable::EquitableSet;
use crate::lattice::{intersection_number, rational_abs_is_one, ExactRational, LatticeVector};
use crate::space::{Side, TubularSpace};
use crate::walls::{build_walls, enumerate_points, Matching, QuotientGraph, WallError, WallSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DilationError {
    #[error(transparent)]
    Walls(#[from] WallError),
    #[error("quotient graph of wall {wall} is disconnected")]
    Disconnected { wall: usize },
    #[error("arc sequence is not a path: step {step} does not start where the previous one ended")]
    NotComposable { step: usize },
    #[error("{which} vector is parallel to the circle; no crossing to match")]
    Parallel { which: &'static str },
    #[error("carrier step {step} runs parallel to the wall (zero intersection number)")]
    CarrierParallel { step: usize },
    #[error("carriers do not share a junction perpendicular")]
    CarrierMismatch,
    #[error("empty carrier")]
    EmptyCarrier,
}

/// One arc of a cycle, traversed along (`forward`) or against its direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub arc: usize,
    pub forward: bool,
}

impl Step {
    pub fn reversed(self) -> Step {
        Step {
            arc: self.arc,
            forward: !self.forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub steps: Vec<Step>,
    pub value: ExactRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Dilated,
    NonDilated,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Dilated => "DILATED",
            Status::NonDilated => "NON_DILATED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilationResult {
    pub wall: usize,
    pub status: Status,
    pub basis: Vec<Cycle>,
    /// Lexicographically smallest dilated basis cycle, oriented so that
    /// its value has absolute value greater than one.
    pub witness: Option<Cycle>,
}

/// Endpoints of a step as traversed.
fn ends(g: &QuotientGraph, s: Step) -> (usize, usize) {
    let a = &g.arcs[s.arc];
    if s.forward {
        (a.source, a.target)
    } else {
        (a.target, a.source)
    }
}

/// Product of `weight^(+-1)` along a path, with its start and end nodes.
pub fn path_value(
    g: &QuotientGraph,
    steps: &[Step],
) -> Result<(usize, usize, ExactRational), DilationError> {
    let mut value = ExactRational::one();
    let mut start = None;
    let mut at = None;
    for (k, &s) in steps.iter().enumerate() {
        let (from, to) = ends(g, s);
        if let Some(cur) = at {
            if cur != from {
                return Err(DilationError::NotComposable { step: k });
            }
        } else {
            start = Some(from);
        }
        let w = &g.arcs[s.arc].weight;
        value = if s.forward { value * w } else { value / w };
        at = Some(to);
    }
    match (start, at) {
        (Some(s), Some(e)) => Ok((s, e, value)),
        _ => Ok((0, 0, value)),
    }
}

/// Value of a closed path.
pub fn cycle_value(g: &QuotientGraph, steps: &[Step]) -> Result<ExactRational, DilationError> {
    let (s, e, v) = path_value(g, steps)?;
    if s != e {
        return Err(DilationError::NotComposable { step: steps.len() });
    }
    Ok(v)
}

pub fn reverse_cycle(steps: &[Step]) -> Vec<Step> {
    steps.iter().rev().map(|s| s.reversed()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeOrder {
    BreadthFirst,
    DepthFirst,
}

/// Spanning tree as parent steps: `parent[n]` is the step reaching `n`
/// from its parent (None at the root).
fn spanning_tree(g: &QuotientGraph, order: TreeOrder) -> Result<Vec<Option<Step>>, DilationError> {
    let n = g.nodes.len();
    let mut incident: Vec<Vec<Step>> = vec![Vec::new(); n];
    for (k, a) in g.arcs.iter().enumerate() {
        incident[a.source].push(Step {
            arc: k,
            forward: true,
        });
        incident[a.target].push(Step {
            arc: k,
            forward: false,
        });
    }
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    if n == 0 {
        return Ok(parent);
    }
    seen[0] = true;
    let mut frontier = VecDeque::from([0usize]);
    while let Some(v) = match order {
        TreeOrder::BreadthFirst => frontier.pop_front(),
        TreeOrder::DepthFirst => frontier.pop_back(),
    } {
        for &s in &incident[v] {
            let (_, to) = ends(g, s);
            if !seen[to] {
                seen[to] = true;
                parent[to] = Some(s);
                frontier.push_back(to);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(DilationError::Disconnected { wall: g.wall });
    }
    Ok(parent)
}

/// Steps from the root down to `node`.
fn root_path(g: &QuotientGraph, parent: &[Option<Step>], mut node: usize) -> Vec<Step> {
    let mut path = Vec::new();
    while let Some(s) = parent[node] {
        path.push(s);
        node = ends(g, s).0;
    }
    path.reverse();
    path
}

/// Fundamental cycles of a spanning tree, one per non-tree arc, each
/// running from the branch point down the tree, across the arc and back up.
pub fn fundamental_cycles(
    g: &QuotientGraph,
    order: TreeOrder,
) -> Result<Vec<Vec<Step>>, DilationError> {
    let parent = spanning_tree(g, order)?;
    let tree_arcs: Vec<usize> = parent.iter().flatten().map(|s| s.arc).collect();
    let mut cycles = Vec::new();
    for (k, a) in g.arcs.iter().enumerate() {
        if tree_arcs.contains(&k) {
            continue;
        }
        let down = root_path(g, &parent, a.source);
        let to_target = root_path(g, &parent, a.target);
        let shared = down
            .iter()
            .zip(&to_target)
            .take_while(|(x, y)| x == y)
            .count();
        let mut steps: Vec<Step> = down[shared..].to_vec();
        steps.push(Step {
            arc: k,
            forward: true,
        });
        steps.extend(reverse_cycle(&to_target[shared..]));
        cycles.push(steps);
    }
    Ok(cycles)
}

pub fn classify_wall_with(
    g: &QuotientGraph,
    order: TreeOrder,
) -> Result<DilationResult, DilationError> {
    let mut basis = Vec::new();
    for steps in fundamental_cycles(g, order)? {
        let value = cycle_value(g, &steps)?;
        basis.push(Cycle { steps, value });
    }
    let witness = basis
        .iter()
        .filter(|c| !rational_abs_is_one(&c.value))
        .map(|c| {
            if c.value.numer().magnitude() < c.value.denom().magnitude() {
                Cycle {
                    steps: reverse_cycle(&c.steps),
                    value: c.value.recip(),
                }
            } else {
                c.clone()
            }
        })
        .min_by(|a, b| a.steps.cmp(&b.steps));
    Ok(DilationResult {
        wall: g.wall,
        status: if witness.is_some() {
            Status::Dilated
        } else {
            Status::NonDilated
        },
        basis,
        witness,
    })
}

pub fn classify_wall(g: &QuotientGraph) -> Result<DilationResult, DilationError> {
    classify_wall_with(g, TreeOrder::BreadthFirst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Finite,
    Infinite,
}

impl Dimension {
    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Finite => "FINITE_DIMENSIONAL",
            Dimension::Infinite => "INFINITE_DIMENSIONAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemVerdict {
    pub walls: Vec<DilationResult>,
    pub overall: Dimension,
}

/// Classifies every horizontal wall; vertical walls are embedded circles
/// and never dilated.
pub fn classify_walls(system: &WallSystem) -> Result<SystemVerdict, DilationError> {
    let mut walls = Vec::new();
    for k in 0..system.horizontal.len() {
        walls.push(classify_wall(&system.quotient_graph(k)?)?);
    }
    let overall = if walls.iter().any(|w| w.status == Status::Dilated) {
        Dimension::Infinite
    } else {
        Dimension::Finite
    };
    Ok(SystemVerdict { walls, overall })
}

pub fn classify_system(
    space: &TubularSpace,
    set: &EquitableSet,
    matching: &Matching,
) -> Result<(WallSystem, SystemVerdict), DilationError> {
    let points = enumerate_points(space, set)?;
    let system = build_walls(space, set, &points, matching)?;
    let verdict = classify_walls(&system)?;
    Ok((system, verdict))
}

/// A directed Eulerian circuit (arc indices) when every node is balanced
/// and the arcs are connected.
pub fn eulerian_witness(g: &QuotientGraph) -> Option<Vec<usize>> {
    if g.arcs.is_empty() {
        return None;
    }
    let n = g.nodes.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut balance = vec![0i64; n];
    for (k, a) in g.arcs.iter().enumerate() {
        out[a.source].push(k);
        balance[a.source] += 1;
        balance[a.target] -= 1;
    }
    if balance.iter().any(|&b| b != 0) {
        return None;
    }
    // Hierholzer, consuming out-arcs in index order
    let start = g.arcs[0].source;
    let mut next = vec![0usize; n];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit = Vec::new();
    while let Some(&(v, via)) = stack.last() {
        if next[v] < out[v].len() {
            let k = out[v][next[v]];
            next[v] += 1;
            stack.push((g.arcs[k].target, Some(k)));
        } else {
            stack.pop();
            if let Some(k) = via {
                circuit.push(k);
            }
        }
    }
    circuit.reverse();
    (circuit.len() == g.arcs.len()).then_some(circuit)
}

/// Value of a directed circuit given as arc indices.
pub fn circuit_value(g: &QuotientGraph, arcs: &[usize]) -> Result<ExactRational, DilationError> {
    let steps: Vec<Step> = arcs
        .iter()
        .map(|&arc| Step { arc, forward: true })
        .collect();
    cycle_value(g, &steps)
}

/// Minimal positive `(m_a, m_b)` with `m_a/m_b = #[C, b]/#[C, a]`, so that
/// `a^m_a` and `b^m_b` move a lift of `C` by the same number of lines.
pub fn cyclic_matching_exponents(
    c: &LatticeVector,
    a: &LatticeVector,
    b: &LatticeVector,
) -> Result<(BigUint, BigUint), DilationError> {
    let ca = intersection_number(c, a);
    let cb = intersection_number(c, b);
    if ca.is_zero() {
        return Err(DilationError::Parallel { which: "a" });
    }
    if cb.is_zero() {
        return Err(DilationError::Parallel { which: "b" });
    }
    let g = ca.gcd(&cb);
    let (ma, mb) = (&cb / &g, &ca / &g);
    debug_assert_eq!(
        (BigInt::from(ma.clone()) * c.det(a)).magnitude(),
        (BigInt::from(mb.clone()) * c.det(b)).magnitude()
    );
    Ok((ma, mb))
}

/// One vertex space of a carrier: the wall's circle direction there and the
/// edge lines (or end perpendiculars) through which the carrier enters and
/// leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierStep {
    pub rho: LatticeVector,
    pub entry: LatticeVector,
    pub exit: LatticeVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftExponents {
    pub m_back: BigInt,
    pub m_fwd: BigInt,
}

impl ShiftExponents {
    pub fn ratio(&self) -> ExactRational {
        ExactRational::new(self.m_back.clone(), self.m_fwd.clone())
    }
}

/// `m_back / m_fwd = prod #[rho_i, exit_i] / prod #[rho_i, entry_i]`, in
/// lowest terms.
pub fn carrier_shift_exponents(carrier: &[CarrierStep]) -> Result<ShiftExponents, DilationError> {
    if carrier.is_empty() {
        return Err(DilationError::EmptyCarrier);
    }
    let mut back = BigUint::one();
    let mut fwd = BigUint::one();
    for (k, s) in carrier.iter().enumerate() {
        let (x, e) = (
            intersection_number(&s.rho, &s.exit),
            intersection_number(&s.rho, &s.entry),
        );
        if x.is_zero() || e.is_zero() {
            return Err(DilationError::CarrierParallel { step: k });
        }
        back *= x;
        fwd *= e;
    }
    let g = back.gcd(&fwd);
    Ok(ShiftExponents {
        m_back: BigInt::from(back / &g),
        m_fwd: BigInt::from(fwd / g),
    })
}

/// Joins two carriers sharing an end vertex; the first's exit perpendicular
/// must equal the second's entry perpendicular, and they cancel.
pub fn concat_carriers(
    first: &[CarrierStep],
    second: &[CarrierStep],
) -> Result<Vec<CarrierStep>, DilationError> {
    let (Some(last), Some(head)) = (first.last(), second.first()) else {
        return Err(DilationError::EmptyCarrier);
    };
    if last.rho != head.rho || last.exit != head.entry {
        return Err(DilationError::CarrierMismatch);
    }
    let mut out = first[..first.len() - 1].to_vec();
    out.push(CarrierStep {
        rho: last.rho.clone(),
        entry: last.entry.clone(),
        exit: head.exit.clone(),
    });
    out.extend_from_slice(&second[1..]);
    Ok(out)
}

/// The closed carrier traced by a cycle of a wall's quotient graph: at each
/// circle the carrier enters through the attaching line of the arriving arc
/// and leaves through that of the departing arc.
pub fn carrier_from_cycle(
    space: &TubularSpace,
    set: &EquitableSet,
    g: &QuotientGraph,
    steps: &[Step],
) -> Result<Vec<CarrierStep>, DilationError> {
    cycle_value(g, steps)?;
    let attach_at = |s: Step, leaving: bool| {
        let arc = &g.arcs[s.arc];
        let e = space.edge(&arc.edge).expect("arc edge exists");
        // leaving forward means leaving from the init side
        let side = if s.forward == leaving {
            Side::Init
        } else {
            Side::Term
        };
        e.attach(side).clone()
    };
    let n = steps.len();
    let mut carrier = Vec::with_capacity(n);
    for k in 0..n {
        let (node, _) = ends(g, steps[k]);
        let circle = &g.nodes[node];
        let rho = set.circles_at(&circle.vertex)[circle.circle].vector.clone();
        carrier.push(CarrierStep {
            rho,
            entry: attach_at(steps[(k + n - 1) % n], false),
            exit: attach_at(steps[k], true),
        });
    }
    Ok(carrier)
}

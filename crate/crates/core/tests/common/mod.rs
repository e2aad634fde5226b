//! Shared fixtures and randomized checks for the integration test targets.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use tubular_core::dilation::{
    classify_system, classify_wall, classify_wall_with, cycle_value, reverse_cycle, DilationError,
    Step, TreeOrder,
};
use tubular_core::document::{parse, serialize, Document};
use tubular_core::equitable::{CircleSpec, EquitableSet};
use tubular_core::lattice::{intersection_number, LatticeVector};
use tubular_core::space::{EdgeRecord, Vertex};
use tubular_core::walls::{build_walls, enumerate_points, Matching, QuotientGraph};
use tubular_core::{ExactRational, TubularSpace};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load(name: &str) -> Document {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse(&text).expect("fixture parses")
}

fn vec_strategy(bound: i64) -> impl Strategy<Value = LatticeVector> {
    (-bound..=bound, -bound..=bound).prop_map(|(x, y)| LatticeVector::new(x, y))
}

/// `#` is symmetric, invariant under shears and under unimodular maps.
pub fn intersection_invariance(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        ..Config::default()
    });
    let unimodular = (-5i64..=5, -5i64..=5, -5i64..=5, -5i64..=5)
        .prop_filter("det +-1", |(a, b, c, d)| (a * d - b * c).abs() == 1);
    runner
        .run(
            &(
                vec_strategy(1 << 40),
                vec_strategy(1 << 40),
                -1000i64..=1000,
                unimodular,
            ),
            |(u, v, k, (a, b, c, d))| {
                let n = intersection_number(&u, &v);
                prop_assert_eq!(&n, &intersection_number(&v, &u));
                let sheared = &v + &(&BigInt::from(k) * &u);
                prop_assert_eq!(&n, &intersection_number(&u, &sheared));
                let map = |w: &LatticeVector| {
                    LatticeVector::new(
                        BigInt::from(a) * &w.x + BigInt::from(b) * &w.y,
                        BigInt::from(c) * &w.x + BigInt::from(d) * &w.y,
                    )
                };
                prop_assert_eq!(&n, &intersection_number(&map(&u), &map(&v)));
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

/// A small random balanced system: one to three vertices, at most six
/// circles, edges whose term attaching vector is chosen to balance the
/// init side (falling back to a loop with equal ends).
#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub space: TubularSpace,
    pub set: EquitableSet,
    pub matching: Matching,
}

fn build_random(
    nvertices: usize,
    circles: Vec<(usize, (i64, i64))>,
    edges: Vec<(usize, usize, (i64, i64), usize)>,
    keys: Vec<u64>,
) -> Option<RandomSystem> {
    let ids: Vec<String> = (0..nvertices).map(|k| format!("v{k}")).collect();
    let mut set = EquitableSet::new();
    for (v, (x, y)) in circles {
        set.circles
            .entry(ids[v % nvertices].as_str().into())
            .or_default()
            .push(CircleSpec::new((x, y), 1));
    }
    let weight = |v: usize, f: &LatticeVector| -> BigInt {
        set.circles_at(&ids[v].as_str().into())
            .iter()
            .map(|c| BigInt::from(intersection_number(f, &c.vector)))
            .sum()
    };
    let mut records = Vec::new();
    // a path keeps the graph connected; extra edges may be loops
    let mut specs: Vec<(usize, usize, (i64, i64), usize)> =
        (1..nvertices).map(|k| (k - 1, k, (1, 0), 0)).collect();
    specs.extend(edges);
    for (k, (a, b, (x, y), pick)) in specs.into_iter().enumerate() {
        let (a, b) = (a % nvertices, b % nvertices);
        let fi = LatticeVector::new(x, y);
        if fi.is_zero() {
            continue;
        }
        let target = weight(a, &fi);
        let mut options = Vec::new();
        for p in -3i64..=3 {
            for q in -3i64..=3 {
                let ft = LatticeVector::new(p, q);
                if !ft.is_zero() && weight(b, &ft) == target {
                    options.push(ft);
                }
            }
        }
        let (b, ft) = if options.is_empty() {
            (a, fi.clone())
        } else {
            (b, options[pick % options.len()].clone())
        };
        records.push(EdgeRecord {
            id: format!("e{k}").as_str().into(),
            init: ids[a].as_str().into(),
            term: ids[b].as_str().into(),
            init_attach: fi,
            term_attach: ft,
        });
    }
    let vertices = ids
        .iter()
        .map(|id| Vertex {
            id: id.as_str().into(),
            name: id.clone(),
        })
        .collect();
    let space = TubularSpace::new(vertices, records);
    if !space.validate().is_ok() {
        return None;
    }
    let points = enumerate_points(&space, &set).ok()?;
    let mut matching = Matching::identity(&points);
    let mut key = keys.into_iter().cycle();
    for pairs in matching.pairs.values_mut() {
        let mut order: Vec<(u64, usize)> = (0..pairs.len())
            .map(|i| (key.next().unwrap_or(0), i))
            .collect();
        order.sort();
        for (k, p) in pairs.iter_mut().enumerate() {
            p.1 = order[k].1;
        }
    }
    Some(RandomSystem {
        space,
        set,
        matching,
    })
}

pub fn random_system() -> impl Strategy<Value = Option<RandomSystem>> {
    (
        1usize..=3,
        prop::collection::vec((0usize..3, (-3i64..=3, -3i64..=3)), 1..=6),
        prop::collection::vec(
            (0usize..3, 0usize..3, (-3i64..=3, -3i64..=3), 0usize..64),
            0..=2,
        ),
        prop::collection::vec(any::<u64>(), 1..=16),
    )
        .prop_map(|(n, circles, edges, keys)| {
            let circles = circles
                .into_iter()
                .filter(|(_, v)| *v != (0, 0))
                .collect::<Vec<_>>();
            if circles.is_empty() {
                return None;
            }
            build_random(n, circles, edges, keys)
        })
}

/// An undirected path of steps between two nodes.
fn path_between(g: &QuotientGraph, from: usize, to: usize) -> Option<Vec<Step>> {
    let mut prev: Vec<Option<(usize, Step)>> = vec![None; g.nodes.len()];
    let mut seen = vec![false; g.nodes.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for (k, a) in g.arcs.iter().enumerate() {
            for (s, t, forward) in [(a.source, a.target, true), (a.target, a.source, false)] {
                if s == v && !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((v, Step { arc: k, forward }));
                    queue.push_back(t);
                }
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut steps = Vec::new();
    let mut at = to;
    while at != from {
        let (p, s) = prev[at]?;
        steps.push(s);
        at = p;
    }
    steps.reverse();
    Some(steps)
}

fn start_of(g: &QuotientGraph, s: Step) -> usize {
    let a = &g.arcs[s.arc];
    if s.forward {
        a.source
    } else {
        a.target
    }
}

/// How many systems were actually exercised.
pub struct LawStats {
    pub systems: usize,
    pub walls: usize,
    pub compositions: usize,
}

/// Spanning-tree independence, homomorphism, inverse and orientation laws
/// on random wall systems.
pub fn dilation_laws(systems: u32) -> Result<LawStats, String> {
    let mut runner = TestRunner::new(Config {
        cases: systems,
        ..Config::default()
    });
    let stats = std::cell::RefCell::new(LawStats {
        systems: 0,
        walls: 0,
        compositions: 0,
    });
    runner
        .run(&random_system(), |sys| {
            let Some(sys) = sys else {
                return Err(TestCaseError::reject("no balanced system"));
            };
            let points = enumerate_points(&sys.space, &sys.set)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let walls = build_walls(&sys.space, &sys.set, &points, &sys.matching)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let mut st = stats.borrow_mut();
            st.systems += 1;
            for k in 0..walls.horizontal.len() {
                st.walls += 1;
                let g = walls.quotient_graph(k).unwrap();
                let bfs = classify_wall_with(&g, TreeOrder::BreadthFirst).unwrap();
                let dfs = classify_wall_with(&g, TreeOrder::DepthFirst).unwrap();
                prop_assert_eq!(bfs.status, dfs.status);
                for c in bfs.basis.iter().chain(&dfs.basis) {
                    prop_assert_eq!(cycle_value(&g, &c.steps).unwrap(), c.value.clone());
                    prop_assert_eq!(
                        cycle_value(&g, &reverse_cycle(&c.steps)).unwrap(),
                        c.value.recip()
                    );
                }
                // compose pairs of basis cycles through a connecting path
                for c1 in &bfs.basis {
                    for c2 in &bfs.basis {
                        let x = start_of(&g, c1.steps[0]);
                        let y = start_of(&g, c2.steps[0]);
                        let p = path_between(&g, x, y).expect("wall is connected");
                        let mut steps = c1.steps.clone();
                        steps.extend(&p);
                        steps.extend(&c2.steps);
                        steps.extend(reverse_cycle(&p));
                        prop_assert_eq!(cycle_value(&g, &steps).unwrap(), &c1.value * &c2.value);
                        st.compositions += 1;
                    }
                }
                for e in sys.space.edges() {
                    let flipped = classify_wall(&g.with_edge_flipped(&e.id)).unwrap();
                    prop_assert_eq!(flipped.status, bfs.status);
                    let abs = |r: &ExactRational| {
                        if r < &ExactRational::from_integer(0.into()) {
                            -r.clone()
                        } else {
                            r.clone()
                        }
                    };
                    for (a, b) in bfs.basis.iter().zip(&flipped.basis) {
                        prop_assert!(
                            abs(&a.value) == abs(&b.value)
                                || abs(&a.value) == abs(&b.value).recip()
                        );
                    }
                }
            }
            // reversing an edge of the space (and its matching) keeps the verdict
            let (_, verdict) = classify_system(&sys.space, &sys.set, &sys.matching).unwrap();
            for e in sys.space.edges() {
                let reversed = sys.space.with_edge_reversed(&e.id);
                let mut m = sys.matching.clone();
                if let Some(pairs) = m.pairs.get_mut(&e.id) {
                    for p in pairs.iter_mut() {
                        *p = (p.1, p.0);
                    }
                }
                let (_, v2) = classify_system(&reversed, &sys.set, &m)
                    .map_err(|e: DilationError| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(v2.overall, verdict.overall);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(stats.into_inner())
}

fn document_strategy() -> impl Strategy<Value = Document> {
    let big = prop_oneof![
        (-1000i64..=1000).prop_map(BigInt::from),
        any::<i128>().prop_map(|x| BigInt::from(x) * BigInt::from(x) * if x < 0 { -1 } else { 1 }),
    ];
    let vector = (big.clone(), big).prop_map(|(x, y)| LatticeVector { x, y });
    (
        1usize..=4,
        prop::collection::vec(
            (0usize..4, 0usize..4, vector.clone(), vector.clone()),
            0..=5,
        ),
        prop::collection::vec((0usize..4, vector, 1u32..=3), 0..=5),
        prop::collection::vec((0usize..6, 0usize..6), 0..=4),
    )
        .prop_map(|(n, edges, circles, pairs)| {
            let vertices: Vec<Vertex> = (0..n)
                .map(|k| Vertex {
                    id: format!("v{k}").as_str().into(),
                    name: format!("vertex {k}"),
                })
                .collect();
            let records: Vec<EdgeRecord> = edges
                .into_iter()
                .enumerate()
                .map(|(k, (a, b, fi, ft))| EdgeRecord {
                    id: format!("e{k}").as_str().into(),
                    init: vertices[a % n].id.clone(),
                    term: vertices[b % n].id.clone(),
                    init_attach: fi,
                    term_attach: ft,
                })
                .collect();
            let mut set = EquitableSet::new();
            for (v, vector, multiplicity) in circles {
                set.circles
                    .entry(vertices[v % n].id.clone())
                    .or_default()
                    .push(CircleSpec {
                        vector,
                        multiplicity,
                    });
            }
            let matchings = records.first().map(|e| Matching {
                pairs: [(e.id.clone(), pairs)].into_iter().collect(),
            });
            Document {
                space: TubularSpace::new(vertices, records),
                equitable: Some(set),
                matchings,
            }
        })
}

/// `parse(serialize(d)) == d`, and serialization is a fixed point.
pub fn serializer_round_trip(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases,
        ..Config::default()
    });
    runner
        .run(&document_strategy(), |doc| {
            let text = serialize(&doc);
            let back = parse(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(serialize(&back), text);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

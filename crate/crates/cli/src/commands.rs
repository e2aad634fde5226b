use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use serde_json::{json, Value};

use tubular_core::cover::{
    crossing_graph, expand_ball, max_crossing_clique, verify_partition, CoverBall, CoverConfig,
};
use tubular_core::dilation::{classify_walls, Cycle, DilationResult, SystemVerdict};
use tubular_core::document::{equitable_value, int_value, vector_value};
use tubular_core::equitable::{
    check_balance, check_finite_index, search_equitable, EquitableSet, SearchParams,
};
use tubular_core::groupword::{britton_reduce, spiral_space, spiral_words};
use tubular_core::lattice::SubgroupIndex;
use tubular_core::walls::{
    build_walls, enumerate_points, parse_wall_label, wall_label, Matching, PointTable,
    QuotientGraph, WallSystem,
};
use tubular_core::{Document, ExactRational};

use crate::{Format, GuardViolation, Rejected, SearchArgs, SimulateArgs};

const MAX_DISTORT_N: u32 = 2000;

fn load(path: &Path) -> Result<Document> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    tubular_core::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(format: Format, value: Value, human: String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("values serialize")
        ),
        Format::Human => print!("{human}"),
    }
}

fn big(n: impl Into<BigInt>) -> Value {
    int_value(&n.into())
}

fn rational(r: &ExactRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn index_text(i: &SubgroupIndex) -> String {
    match i {
        SubgroupIndex::Finite(n) => n.to_string(),
        SubgroupIndex::Infinite => "infinite".into(),
    }
}

/// A validated space with its equitable set; validation problems are
/// reported on stderr.
fn validated(path: &Path) -> Result<(Document, EquitableSet)> {
    let doc = load(path)?;
    let report = doc.space.validate();
    if !report.is_ok() {
        for v in &report.violations {
            eprintln!("error: {v}");
        }
        bail!("{} is not a valid space", path.display());
    }
    let set = doc
        .equitable
        .clone()
        .ok_or_else(|| anyhow!("{} has no equitable set", path.display()))?;
    set.check_shape(&doc.space)?;
    Ok((doc, set))
}

fn matching_for(doc: &Document, points: &PointTable) -> Result<Matching> {
    let m = match &doc.matchings {
        Some(m) => m.clone(),
        None => {
            eprintln!("note: no matchings in the input; using the identity matching");
            Matching::identity(points)
        }
    };
    m.validate(points)?;
    Ok(m)
}

fn system_for(doc: &Document, set: &EquitableSet) -> Result<(PointTable, Matching, WallSystem)> {
    let points = enumerate_points(&doc.space, set)?;
    let matching = matching_for(doc, &points)?;
    let system = build_walls(&doc.space, set, &points, &matching)?;
    Ok((points, matching, system))
}

pub fn check(path: &Path, format: Format) -> Result<()> {
    let doc = load(path)?;
    let validation = doc.space.validate();
    for v in &validation.violations {
        eprintln!("error: {v}");
    }
    let mut out = serde_json::Map::new();
    let mut human = String::new();
    out.insert(
        "violations".into(),
        validation
            .violations
            .iter()
            .map(|v| Value::from(v.to_string()))
            .collect(),
    );
    let _ = writeln!(
        human,
        "space: {} vertices, {} edges, {}",
        doc.space.vertices().len(),
        doc.space.edges().len(),
        if validation.is_ok() {
            "valid"
        } else {
            "INVALID"
        }
    );
    let mut ok = validation.is_ok();
    if let (true, Some(set)) = (validation.is_ok(), &doc.equitable) {
        set.check_shape(&doc.space)?;
        let balance = check_balance(&doc.space, set)?;
        let mut rows = Vec::new();
        for b in &balance.edges {
            if !b.ok {
                eprintln!(
                    "error: edge {} is unbalanced: {} != {}",
                    b.edge, b.left, b.right
                );
            }
            let _ = writeln!(
                human,
                "edge {}: {} {} {}",
                b.edge,
                b.left,
                if b.ok { "=" } else { "!=" },
                b.right
            );
            rows.push(json!({
                "edge": b.edge.0,
                "init_sum": big(b.left.clone()),
                "term_sum": big(b.right.clone()),
                "balanced": b.ok,
            }));
        }
        out.insert("balance".into(), rows.into());
        ok &= balance.ok();
        let index = check_finite_index(&doc.space, set);
        let mut rows = Vec::new();
        for v in &index.vertices {
            if !v.ok {
                eprintln!(
                    "warning: circles at {} generate an infinite-index subgroup",
                    v.vertex
                );
            }
            let _ = writeln!(human, "vertex {}: index {}", v.vertex, index_text(&v.index));
            rows.push(json!({
                "vertex": v.vertex.0,
                "index": match &v.index {
                    SubgroupIndex::Finite(n) => big(n.clone()),
                    SubgroupIndex::Infinite => Value::from("infinite"),
                },
                "finite": v.ok,
            }));
        }
        out.insert("finite_index".into(), rows.into());
        out.insert("finite_index_ok".into(), index.ok().into());
    }
    let _ = writeln!(human, "{}", if ok { "OK" } else { "FAILED" });
    out.insert("ok".into(), ok.into());
    emit(format, Value::Object(out), human);
    if ok {
        Ok(())
    } else {
        Err(Rejected.into())
    }
}

fn walls_value(set: &EquitableSet, points: &PointTable, system: &WallSystem) -> Value {
    let vector = |n: &tubular_core::walls::CircleNode| {
        vector_value(&set.circles_at(&n.vertex)[n.circle].vector)
    };
    let horizontal: Vec<Value> = system
        .horizontal
        .iter()
        .map(|w| {
            json!({
                "id": wall_label(w.id),
                "nodes": w.nodes.iter().map(|n| json!({"node": n.to_string(), "vector": vector(n)})).collect::<Vec<_>>(),
                "arcs": w.arcs.iter().map(|a| json!({
                    "edge": a.edge.0,
                    "init_point": a.init_point,
                    "term_point": a.term_point,
                    "source": a.source.to_string(),
                    "target": a.target.to_string(),
                    "weight": format!("{}/{}", a.source_count, a.target_count),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let edges: Vec<Value> = points
        .edges()
        .map(|e| json!({"edge": e.0, "points_per_side": points.count(e)}))
        .collect();
    json!({
        "points": edges,
        "horizontal": horizontal,
        "vertical": system.vertical.iter().map(|v| Value::from(v.edge.0.clone())).collect::<Vec<_>>(),
    })
}

pub fn walls(path: &Path, format: Format) -> Result<()> {
    let (doc, set) = validated(path)?;
    let (points, _, system) = system_for(&doc, &set)?;
    let mut human = String::new();
    for e in points.edges() {
        let _ = writeln!(human, "edge {}: {} points per side", e, points.count(e));
    }
    for w in &system.horizontal {
        let nodes: Vec<String> = w.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(
            human,
            "{}: {} circles [{}], {} arcs",
            wall_label(w.id),
            w.nodes.len(),
            nodes.join(", "),
            w.arcs.len()
        );
        for a in &w.arcs {
            let _ = writeln!(
                human,
                "  {} -{}-> {}  ({}/{})",
                a.source, a.edge, a.target, a.source_count, a.target_count
            );
        }
    }
    for v in &system.vertical {
        let _ = writeln!(human, "vertical wall along {}", v.edge);
    }
    emit(format, walls_value(&set, &points, &system), human);
    Ok(())
}

fn step_text(g: &QuotientGraph, c: &Cycle) -> Vec<String> {
    c.steps
        .iter()
        .map(|s| {
            let a = &g.arcs[s.arc];
            let (from, to) = if s.forward {
                (a.source, a.target)
            } else {
                (a.target, a.source)
            };
            let dir = if s.forward { "" } else { "^-1" };
            format!(
                "{} -{}[{}]{}-> {}",
                g.nodes[from], a.edge, a.init_point, dir, g.nodes[to]
            )
        })
        .collect()
}

fn cycle_value_json(g: &QuotientGraph, c: &Cycle) -> Value {
    json!({
        "steps": step_text(g, c),
        "value": rational(&c.value),
    })
}

fn wall_result_json(g: &QuotientGraph, r: &DilationResult) -> Value {
    json!({
        "id": wall_label(r.wall),
        "status": r.status.as_str(),
        "basis": r.basis.iter().map(|c| cycle_value_json(g, c)).collect::<Vec<_>>(),
        "witness": r.witness.as_ref().map(|c| cycle_value_json(g, c)),
        "sign": "UNDETERMINED",
    })
}

pub fn classify(path: &Path, format: Format) -> Result<()> {
    let (doc, set) = validated(path)?;
    let (_, _, system) = system_for(&doc, &set)?;
    let SystemVerdict { walls, overall } = classify_walls(&system)?;
    let mut human = String::new();
    let mut rows = Vec::new();
    for r in &walls {
        let g = system.quotient_graph(r.wall)?;
        let _ = writeln!(
            human,
            "{}: {} ({} basis cycles)",
            wall_label(r.wall),
            r.status.as_str(),
            r.basis.len()
        );
        for c in &r.basis {
            let _ = writeln!(
                human,
                "  |value| {}: {}",
                rational(&c.value),
                step_text(&g, c).join(", ")
            );
        }
        if let Some(w) = &r.witness {
            let _ = writeln!(human, "  witness |value| {}", rational(&w.value));
        }
        rows.push(wall_result_json(&g, r));
    }
    for v in &system.vertical {
        let _ = writeln!(human, "vertical wall along {}: NON_DILATED", v.edge);
    }
    let _ = writeln!(human, "{}", overall.as_str());
    let value = json!({
        "walls": rows,
        "vertical": system.vertical.iter().map(|v| Value::from(v.edge.0.clone())).collect::<Vec<_>>(),
        "overall": overall.as_str(),
    });
    emit(format, value, human);
    Ok(())
}

fn seed_wall(arg: &str, system: &WallSystem) -> Result<usize> {
    let k = parse_wall_label(arg)
        .ok_or_else(|| anyhow!("`{arg}` is not a wall id (expected e.g. W0)"))?;
    if k >= system.horizontal.len() {
        bail!(
            "no wall {arg}; there are {} horizontal walls",
            system.horizontal.len()
        );
    }
    Ok(k)
}

fn ball_summary(ball: &CoverBall) -> (usize, usize) {
    let lines = ball.vertices.iter().map(|v| v.lines.len()).sum();
    (ball.vertices.len(), lines)
}

pub fn simulate(args: &SimulateArgs, format: Format) -> Result<()> {
    let (doc, set) = validated(&args.input)?;
    let (points, matching, system) = system_for(&doc, &set)?;
    let wall = seed_wall(&args.seed_wall, &system)?;
    let node = match &args.seed_circle {
        None => None,
        Some(s) => Some(
            system.horizontal[wall]
                .nodes
                .iter()
                .find(|n| n.to_string() == *s)
                .cloned()
                .ok_or_else(|| anyhow!("circle `{s}` is not in wall {}", wall_label(wall)))?,
        ),
    };
    if args.window < 1 {
        bail!("--window must be positive");
    }
    let config = CoverConfig {
        radius: args.radius,
        window: args.window,
        attach_window: args.attach_window,
        max_vertices: args.max_vertices,
    };
    let ball = expand_ball(
        &doc.space,
        &set,
        &points,
        &matching,
        &system,
        wall,
        node.as_ref(),
        config,
    )?;
    let graph = crossing_graph(&ball);
    let clique = max_crossing_clique(&graph, args.exact_threshold);
    let dilation = classify_walls(&system)?.walls.swap_remove(wall);
    let (vertices, lines) = ball_summary(&ball);
    let regular = graph.regular().count();

    if let Some(path) = &args.export_adjacency {
        std::fs::write(path, graph.adjacency_text(&ball))
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let mut human = String::new();
    let _ = writeln!(
        human,
        "seed {} at {}: radius {}, window {}",
        wall_label(wall),
        ball.nodes[ball.seed_node],
        args.radius,
        args.window
    );
    let _ = writeln!(
        human,
        "ball: {vertices} vertex spaces, {lines} wall lines, {} translates",
        graph.nodes.len()
    );
    let _ = writeln!(
        human,
        "crossings: {regular} regular, {} non-regular",
        graph.edges.len() - regular
    );
    let names: Vec<String> = clique.walls.iter().map(|&w| ball.wall_name(w)).collect();
    let _ = writeln!(
        human,
        "max crossing clique: {}{} [{}]",
        clique.size,
        if clique.exact { "" } else { " (lower bound)" },
        names.join(", ")
    );
    let _ = writeln!(human, "seed wall is {}", dilation.status.as_str());

    let partition = match verify_partition(&ball, &graph, &dilation) {
        Ok(p) => {
            let _ = writeln!(
                human,
                "partition: step {}, {} progressions, {}",
                p.step,
                p.progressions,
                if p.crossing_free {
                    "crossing-free"
                } else {
                    "CROSSINGS within a progression"
                }
            );
            json!({
                "step": p.step,
                "progressions": p.progressions,
                "crossing_free": p.crossing_free,
                "violations": p.violations.iter().map(|c| json!([ball.wall_name(c.a), ball.wall_name(c.b)])).collect::<Vec<_>>(),
            })
        }
        Err(_) => Value::Null,
    };
    let value = json!({
        "seed_wall": wall_label(wall),
        "seed_circle": ball.nodes[ball.seed_node].to_string(),
        "radius": args.radius,
        "window": args.window,
        "attach_window": args.attach_window,
        "vertices": vertices,
        "lines": lines,
        "translates": graph.nodes.len(),
        "regular_crossings": regular,
        "non_regular_crossings": graph.edges.len() - regular,
        "clique": {
            "size": clique.size,
            "exact": clique.exact,
            "walls": names,
        },
        "seed_status": dilation.status.as_str(),
        "partition": partition,
    });
    emit(format, value, human);
    Ok(())
}

pub fn search(args: &SearchArgs, format: Format) -> Result<()> {
    let doc = load(&args.input)?;
    let report = doc.space.validate();
    if !report.is_ok() {
        for v in &report.violations {
            eprintln!("error: {v}");
        }
        bail!("{} is not a valid space", args.input.display());
    }
    let params = SearchParams {
        coord_bound: args.bound,
        max_circles: args.max_circles,
        require_finite_index: args.require_finite_index,
        max_search_space: args.max_search_space,
    };
    let sets = search_equitable(&doc.space, &params)?;
    let mut human = String::new();
    for s in &sets {
        let parts: Vec<String> = s
            .circles
            .iter()
            .map(|(v, cs)| {
                let cs: Vec<String> = cs
                    .iter()
                    .map(|c| {
                        if c.multiplicity == 1 {
                            c.vector.to_string()
                        } else {
                            format!("{}x{}", c.multiplicity, c.vector)
                        }
                    })
                    .collect();
                format!("{v}: {}", cs.join(" "))
            })
            .collect();
        let _ = writeln!(human, "{}", parts.join("; "));
    }
    let _ = writeln!(human, "{} equitable sets", sets.len());
    let value = json!({
        "bound": args.bound,
        "max_circles": args.max_circles,
        "require_finite_index": args.require_finite_index,
        "count": sets.len(),
        "sets": sets.iter().map(equitable_value).collect::<Vec<_>>(),
    });
    emit(format, value, human);
    Ok(())
}

pub fn distort(n: u32, format: Format) -> Result<()> {
    if n > MAX_DISTORT_N {
        return Err(GuardViolation(format!("n = {n} exceeds the guard {MAX_DISTORT_N}")).into());
    }
    let words = spiral_words(n);
    let space = spiral_space();
    let reduced = britton_reduce(&space, &words.alpha.concat(&words.beta.inverse()))?;
    let n64 = u64::from(n);
    let expected = n64 * (n64 + 1) / 2 + n64;
    let mut human = String::new();
    let _ = writeln!(human, "alpha_{n} = {}", words.alpha.render(false));
    let _ = writeln!(human, "beta_{n}  = {}", words.beta.render(false));
    let _ = writeln!(
        human,
        "|alpha|_H = {} (n(n+1)/2 + n = {expected})",
        words.alpha_length_h
    );
    let _ = writeln!(
        human,
        "|beta|_G  = {} (3n = {})",
        words.beta_length_g,
        3 * n64
    );
    let _ = writeln!(human, "alpha = beta: {}", reduced.is_identity);
    let value = json!({
        "n": n,
        "alpha": words.alpha.render(false),
        "beta": words.beta.render(false),
        "alpha_length_h": words.alpha_length_h,
        "beta_length_g": words.beta_length_g,
        "equal": reduced.is_identity,
    });
    emit(format, value, human);
    if !reduced.is_identity {
        eprintln!("error: alpha beta^-1 reduces to {}", reduced.word);
        return Err(Rejected.into());
    }
    Ok(())
}

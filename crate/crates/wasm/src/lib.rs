//! Browser bindings. Every entry point takes and returns JSON text; failures
//! come back as `{"error": "..."}` rather than exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tubular_core::cover::{
    crossing_graph, expand_ball, max_crossing_clique, CoverConfig, DEFAULT_EXACT_THRESHOLD,
};
use tubular_core::dilation::classify_walls;
use tubular_core::groupword::{britton_reduce, spiral_space, spiral_words};
use tubular_core::walls::{
    build_walls, enumerate_points, wall_label, Matching, PointTable, WallSystem,
};
use tubular_core::{Document, ExactRational};

/// Radius cap for the page; the ball grows roughly fivefold per step.
pub const MAX_DEMO_RADIUS: u32 = 7;
pub const MAX_DEMO_N: u32 = 200;

fn rational(r: &ExactRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn respond(result: Result<Value, String>) -> String {
    let value = result.unwrap_or_else(|e| json!({ "error": e }));
    serde_json::to_string(&value).expect("values serialize")
}

struct Prepared {
    doc: Document,
    points: PointTable,
    matching: Matching,
    system: WallSystem,
}

fn prepare(text: &str) -> Result<Prepared, String> {
    let doc = tubular_core::parse(text).map_err(|e| e.to_string())?;
    let report = doc.space.validate();
    if let Some(v) = report.violations.first() {
        return Err(v.to_string());
    }
    let set = doc
        .equitable
        .as_ref()
        .ok_or("the document has no equitable set")?;
    set.check_shape(&doc.space).map_err(|e| e.to_string())?;
    let points = enumerate_points(&doc.space, set).map_err(|e| e.to_string())?;
    let matching = doc
        .matchings
        .clone()
        .unwrap_or_else(|| Matching::identity(&points));
    matching.validate(&points).map_err(|e| e.to_string())?;
    let system = build_walls(&doc.space, set, &points, &matching).map_err(|e| e.to_string())?;
    Ok(Prepared {
        doc,
        points,
        matching,
        system,
    })
}

pub fn classify_json(text: &str) -> Result<Value, String> {
    let p = prepare(text)?;
    let verdict = classify_walls(&p.system).map_err(|e| e.to_string())?;
    let mut walls = Vec::new();
    for r in &verdict.walls {
        let g = p.system.quotient_graph(r.wall).map_err(|e| e.to_string())?;
        walls.push(json!({
            "id": wall_label(r.wall),
            "status": r.status.as_str(),
            "nodes": g.nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            "arcs": g.arcs.iter().map(|a| json!({
                "source": a.source,
                "target": a.target,
                "edge": a.edge.0,
                "weight": rational(&a.weight),
            })).collect::<Vec<_>>(),
            "basis": r.basis.iter().map(|c| rational(&c.value)).collect::<Vec<_>>(),
            "witness": r.witness.as_ref().map(|c| rational(&c.value)),
        }));
    }
    Ok(json!({
        "overall": verdict.overall.as_str(),
        "walls": walls,
        "vertical": p.system.vertical.len(),
    }))
}

pub fn simulate_json(
    text: &str,
    seed_wall: usize,
    seed_circle: usize,
    radius: u32,
    window: i64,
) -> Result<Value, String> {
    if radius > MAX_DEMO_RADIUS {
        return Err(format!(
            "radius {radius} is above the demo limit {MAX_DEMO_RADIUS}"
        ));
    }
    let p = prepare(text)?;
    if seed_wall >= p.system.horizontal.len() {
        return Err(format!("no wall {}", wall_label(seed_wall)));
    }
    let nodes = &p.system.horizontal[seed_wall].nodes;
    let node = nodes
        .get(seed_circle)
        .ok_or_else(|| format!("wall {} has {} circles", wall_label(seed_wall), nodes.len()))?;
    let set = p
        .doc
        .equitable
        .as_ref()
        .expect("prepared documents have a set");
    let mut growth = Vec::new();
    let mut last = None;
    for r in 0..=radius {
        let ball = expand_ball(
            &p.doc.space,
            set,
            &p.points,
            &p.matching,
            &p.system,
            seed_wall,
            Some(node),
            CoverConfig::new(r, window),
        )
        .map_err(|e| e.to_string())?;
        let graph = crossing_graph(&ball);
        let clique = max_crossing_clique(&graph, DEFAULT_EXACT_THRESHOLD);
        growth.push(json!({
            "radius": r,
            "vertices": ball.vertices.len(),
            "translates": graph.nodes.len(),
            "clique": clique.size,
            "exact": clique.exact,
        }));
        last = Some((ball, graph, clique));
    }
    let (ball, graph, clique) = last.expect("radius range is nonempty");
    Ok(json!({
        "seed": node.to_string(),
        "growth": growth,
        "walls": graph.nodes.iter().map(|&w| ball.walls[w].root_offset).collect::<Vec<_>>(),
        "crossings": graph.regular().map(|c| json!([ball.walls[c.a].root_offset, ball.walls[c.b].root_offset])).collect::<Vec<_>>(),
        "clique": clique.walls.iter().map(|&w| ball.walls[w].root_offset).collect::<Vec<_>>(),
    }))
}

pub fn spiral_json(n: u32) -> Result<Value, String> {
    if n > MAX_DEMO_N {
        return Err(format!("n = {n} is above the demo limit {MAX_DEMO_N}"));
    }
    let space = spiral_space();
    let words = spiral_words(n);
    let reduced = britton_reduce(&space, &words.alpha.concat(&words.beta.inverse()))
        .map_err(|e| e.to_string())?;
    let series: Vec<Value> = (0..=n)
        .map(|k| {
            let w = spiral_words(k);
            json!([k, w.alpha_length_h, w.beta_length_g])
        })
        .collect();
    Ok(json!({
        "alpha": words.alpha.render(false),
        "beta": words.beta.render(false),
        "equal": reduced.is_identity,
        "series": series,
    }))
}

/// Walls of the document and their dilation verdicts.
#[wasm_bindgen]
pub fn classify(document: &str) -> String {
    respond(classify_json(document))
}

/// Crossing-clique growth of the translates of one wall, radius 0 up to
/// `radius`; `seed_circle` indexes the wall's circles.
#[wasm_bindgen]
pub fn simulate(
    document: &str,
    seed_wall: usize,
    seed_circle: usize,
    radius: u32,
    window: i32,
) -> String {
    respond(simulate_json(
        document,
        seed_wall,
        seed_circle,
        radius,
        window.into(),
    ))
}

/// The spiral words for `n` and the lengths of all smaller ones.
#[wasm_bindgen]
pub fn spiral(n: u32) -> String {
    respond(spiral_json(n))
}

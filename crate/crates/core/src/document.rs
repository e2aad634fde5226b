//! The JSON document format: a space plus optional equitable set and
//! matchings. Integers may be JSON numbers of any size or decimal strings.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::equitable::{CircleSpec, EquitableSet};
use crate::lattice::LatticeVector;
use crate::space::{EdgeId, EdgeRecord, TubularSpace, Vertex, VertexId};
use crate::walls::Matching;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{location}: {message}")]
    Malformed { location: String, message: String },
    #[error("{location}: unknown vertex {vertex}")]
    UnknownVertex { location: String, vertex: String },
    #[error("{location}: unknown edge {edge}")]
    UnknownEdge { location: String, edge: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub space: TubularSpace,
    pub equitable: Option<EquitableSet>,
    pub matchings: Option<Matching>,
}

fn malformed(location: &str, message: impl Into<String>) -> DocumentError {
    DocumentError::Malformed {
        location: location.to_string(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, location: &str) -> Result<&'a Map<String, Value>, DocumentError> {
    v.as_object()
        .ok_or_else(|| malformed(location, "expected an object"))
}

fn array<'a>(v: &'a Value, location: &str) -> Result<&'a Vec<Value>, DocumentError> {
    v.as_array()
        .ok_or_else(|| malformed(location, "expected an array"))
}

fn field<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    location: &str,
) -> Result<&'a Value, DocumentError> {
    obj.get(key)
        .ok_or_else(|| malformed(location, format!("missing key `{key}`")))
}

fn string(v: &Value, location: &str) -> Result<String, DocumentError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| malformed(location, "expected a string"))
}

fn integer(v: &Value, location: &str) -> Result<BigInt, DocumentError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return Err(malformed(location, "expected an integer")),
    };
    text.parse::<BigInt>()
        .map_err(|_| malformed(location, format!("`{text}` is not an integer")))
}

fn vector(v: &Value, location: &str) -> Result<LatticeVector, DocumentError> {
    let items = array(v, location)?;
    if items.len() != 2 {
        return Err(malformed(location, "expected a pair [x, y]"));
    }
    Ok(LatticeVector {
        x: integer(&items[0], &format!("{location}[0]"))?,
        y: integer(&items[1], &format!("{location}[1]"))?,
    })
}

fn index(v: &Value, location: &str) -> Result<usize, DocumentError> {
    let n = integer(v, location)?;
    usize::try_from(n).map_err(|_| malformed(location, "expected a nonnegative index"))
}

pub fn parse(text: &str) -> Result<Document, DocumentError> {
    if text.trim().is_empty() {
        return Err(DocumentError::Json("empty document".to_string()));
    }
    let root: Value = serde_json::from_str(text).map_err(|e| DocumentError::Json(e.to_string()))?;
    from_value(&root)
}

pub fn from_value(root: &Value) -> Result<Document, DocumentError> {
    let top = object(root, "$")?;

    let mut vertices = Vec::new();
    for (k, v) in array(field(top, "vertices", "$")?, "vertices")?
        .iter()
        .enumerate()
    {
        let loc = format!("vertices[{k}]");
        let o = object(v, &loc)?;
        let id = string(field(o, "id", &loc)?, &format!("{loc}.id"))?;
        let name = match o.get("name") {
            Some(n) => string(n, &format!("{loc}.name"))?,
            None => id.clone(),
        };
        vertices.push(Vertex {
            id: VertexId(id),
            name,
        });
    }
    let known = |id: &str| vertices.iter().any(|v| v.id.0 == id);

    let mut edges = Vec::new();
    let edge_list = match top.get("edges") {
        Some(e) => array(e, "edges")?.as_slice(),
        None => &[],
    };
    for (k, e) in edge_list.iter().enumerate() {
        let loc = format!("edges[{k}]");
        let o = object(e, &loc)?;
        let id = string(field(o, "id", &loc)?, &format!("{loc}.id"))?;
        let mut ends = Vec::new();
        for key in ["init", "term"] {
            let vloc = format!("{loc}.{key}");
            let v = string(field(o, key, &loc)?, &vloc)?;
            if !known(&v) {
                return Err(DocumentError::UnknownVertex {
                    location: vloc,
                    vertex: v,
                });
            }
            ends.push(VertexId(v));
        }
        let init_attach = vector(
            field(o, "init_attach", &loc)?,
            &format!("{loc}.init_attach"),
        )?;
        let term_attach = vector(
            field(o, "term_attach", &loc)?,
            &format!("{loc}.term_attach"),
        )?;
        let term = ends.pop().expect("two ends");
        let init = ends.pop().expect("two ends");
        edges.push(EdgeRecord {
            id: EdgeId(id),
            init,
            term,
            init_attach,
            term_attach,
        });
    }
    let space = TubularSpace::new(vertices, edges);

    let equitable = match top.get("equitable") {
        None | Some(Value::Null) => None,
        Some(eq) => {
            let mut set = EquitableSet::new();
            for (vid, list) in object(eq, "equitable")? {
                let loc = format!("equitable.{vid}");
                if space.vertex_index(&VertexId(vid.clone())).is_none() {
                    return Err(DocumentError::UnknownVertex {
                        location: loc,
                        vertex: vid.clone(),
                    });
                }
                let mut circles = Vec::new();
                for (k, c) in array(list, &loc)?.iter().enumerate() {
                    let cloc = format!("{loc}[{k}]");
                    let o = object(c, &cloc)?;
                    let v = vector(field(o, "vector", &cloc)?, &format!("{cloc}.vector"))?;
                    let multiplicity = match o.get("multiplicity") {
                        None => 1,
                        Some(m) => {
                            let mloc = format!("{cloc}.multiplicity");
                            let m = integer(m, &mloc)?;
                            u32::try_from(m)
                                .ok()
                                .filter(|&m| m > 0)
                                .ok_or_else(|| malformed(&mloc, "expected a positive integer"))?
                        }
                    };
                    circles.push(CircleSpec {
                        vector: v,
                        multiplicity,
                    });
                }
                set.circles.insert(VertexId(vid.clone()), circles);
            }
            Some(set)
        }
    };

    let matchings = match top.get("matchings") {
        None | Some(Value::Null) => None,
        Some(m) => {
            let mut pairs = BTreeMap::new();
            for (eid, list) in object(m, "matchings")? {
                let loc = format!("matchings.{eid}");
                if space.edge_index(&EdgeId(eid.clone())).is_none() {
                    return Err(DocumentError::UnknownEdge {
                        location: loc,
                        edge: eid.clone(),
                    });
                }
                let mut edge_pairs = Vec::new();
                for (k, p) in array(list, &loc)?.iter().enumerate() {
                    let ploc = format!("{loc}[{k}]");
                    let items = array(p, &ploc)?;
                    if items.len() != 2 {
                        return Err(malformed(&ploc, "expected a pair [init_index, term_index]"));
                    }
                    edge_pairs.push((
                        index(&items[0], &format!("{ploc}[0]"))?,
                        index(&items[1], &format!("{ploc}[1]"))?,
                    ));
                }
                pairs.insert(EdgeId(eid.clone()), edge_pairs);
            }
            Some(Matching { pairs })
        }
    };

    Ok(Document {
        space,
        equitable,
        matchings,
    })
}

pub fn int_value(n: &BigInt) -> Value {
    Value::Number(
        n.to_string()
            .parse::<Number>()
            .expect("integers are valid JSON numbers"),
    )
}

pub fn vector_value(v: &LatticeVector) -> Value {
    Value::Array(vec![int_value(&v.x), int_value(&v.y)])
}

pub fn space_value(space: &TubularSpace) -> (Value, Value) {
    let vertices = space
        .vertices()
        .iter()
        .map(|v| {
            let mut o = Map::new();
            o.insert("id".into(), Value::String(v.id.0.clone()));
            o.insert("name".into(), Value::String(v.name.clone()));
            Value::Object(o)
        })
        .collect();
    let edges = space
        .edges()
        .iter()
        .map(|e| {
            let mut o = Map::new();
            o.insert("id".into(), Value::String(e.id.0.clone()));
            o.insert("init".into(), Value::String(e.init.0.clone()));
            o.insert("term".into(), Value::String(e.term.0.clone()));
            o.insert("init_attach".into(), vector_value(&e.init_attach));
            o.insert("term_attach".into(), vector_value(&e.term_attach));
            Value::Object(o)
        })
        .collect();
    (Value::Array(vertices), Value::Array(edges))
}

pub fn equitable_value(set: &EquitableSet) -> Value {
    let mut o = Map::new();
    for (v, list) in &set.circles {
        let circles = list
            .iter()
            .map(|c| {
                let mut co = Map::new();
                co.insert("vector".into(), vector_value(&c.vector));
                co.insert("multiplicity".into(), Value::from(c.multiplicity));
                Value::Object(co)
            })
            .collect();
        o.insert(v.0.clone(), Value::Array(circles));
    }
    Value::Object(o)
}

pub fn matching_value(m: &Matching) -> Value {
    let mut o = Map::new();
    for (e, pairs) in &m.pairs {
        let list = pairs
            .iter()
            .map(|&(i, t)| Value::Array(vec![Value::from(i), Value::from(t)]))
            .collect();
        o.insert(e.0.clone(), Value::Array(list));
    }
    Value::Object(o)
}

pub fn to_value(doc: &Document) -> Value {
    let mut o = Map::new();
    let (vertices, edges) = space_value(&doc.space);
    o.insert("vertices".into(), vertices);
    o.insert("edges".into(), edges);
    if let Some(eq) = &doc.equitable {
        o.insert("equitable".into(), equitable_value(eq));
    }
    if let Some(m) = &doc.matchings {
        o.insert("matchings".into(), matching_value(m));
    }
    Value::Object(o)
}

/// Deterministic pretty-printed JSON: ids sorted, keys in sorted order.
pub fn serialize(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(doc)).expect("values serialize");
    s.push('\n');
    s
}

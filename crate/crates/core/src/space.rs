//! Tubular spaces: a finite graph with a torus at every vertex and a cylinder
//! along every edge, glued by the attaching vectors of the edge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lattice::LatticeVector;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub String);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId(s.to_string())
    }
}

/// End of an edge cylinder: the initial or the terminal boundary circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Init,
    Term,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Init => Side::Term,
            Side::Term => Side::Init,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Init => "init",
            Side::Term => "term",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub init: VertexId,
    pub term: VertexId,
    pub init_attach: LatticeVector,
    pub term_attach: LatticeVector,
}

impl EdgeRecord {
    pub fn vertex(&self, side: Side) -> &VertexId {
        match side {
            Side::Init => &self.init,
            Side::Term => &self.term,
        }
    }

    pub fn attach(&self, side: Side) -> &LatticeVector {
        match side {
            Side::Init => &self.init_attach,
            Side::Term => &self.term_attach,
        }
    }

    /// The same cylinder with the opposite orientation.
    pub fn reversed(&self) -> EdgeRecord {
        EdgeRecord {
            id: self.id.clone(),
            init: self.term.clone(),
            term: self.init.clone(),
            init_attach: self.term_attach.clone(),
            term_attach: self.init_attach.clone(),
        }
    }
}

/// Vertices and edges are kept sorted by id, so iteration order and
/// serialization are deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TubularSpace {
    vertices: Vec<Vertex>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    DuplicateVertex(VertexId),
    DuplicateEdge(EdgeId),
    DanglingVertex { edge: EdgeId, vertex: VertexId },
    ZeroAttachingVector { edge: EdgeId, side: Side },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "graph has no vertices"),
            Violation::DuplicateVertex(v) => write!(f, "duplicate vertex id {v}"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge id {e}"),
            Violation::DanglingVertex { edge, vertex } => {
                write!(f, "edge {edge} references unknown vertex {vertex}")
            }
            Violation::ZeroAttachingVector { edge, side } => {
                write!(
                    f,
                    "zero attaching vector on {} side of edge {edge}",
                    side.as_str()
                )
            }
            Violation::Disconnected { components } => {
                write!(
                    f,
                    "disconnected: underlying graph has {components} components"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl TubularSpace {
    pub fn new(mut vertices: Vec<Vertex>, mut edges: Vec<EdgeRecord>) -> Self {
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        TubularSpace { vertices, edges }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &VertexId) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.id.cmp(id)).ok()
    }

    pub fn edge_index(&self, id: &EdgeId) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.cmp(id)).ok()
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&EdgeRecord> {
        self.edge_index(id).map(|i| &self.edges[i])
    }

    /// Copy of the space with one edge reversed.
    pub fn with_edge_reversed(&self, id: &EdgeId) -> TubularSpace {
        let edges = self
            .edges
            .iter()
            .map(|e| if &e.id == id { e.reversed() } else { e.clone() })
            .collect();
        TubularSpace::new(self.vertices.clone(), edges)
    }

    /// Edge ends incident to the vertex with the given index, as
    /// `(edge index, side)`; a self-loop contributes both of its ends.
    pub fn edge_ends_at(&self, vertex: usize) -> Vec<(usize, Side)> {
        let id = &self.vertices[vertex].id;
        let mut ends = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            for side in [Side::Init, Side::Term] {
                if e.vertex(side) == id {
                    ends.push((i, side));
                }
            }
        }
        ends
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.vertices.is_empty() {
            violations.push(Violation::NoVertices);
        }
        let mut seen = BTreeSet::new();
        for v in &self.vertices {
            if !seen.insert(&v.id) {
                violations.push(Violation::DuplicateVertex(v.id.clone()));
            }
        }
        let mut seen_edges = BTreeSet::new();
        for e in &self.edges {
            if !seen_edges.insert(&e.id) {
                violations.push(Violation::DuplicateEdge(e.id.clone()));
            }
            for side in [Side::Init, Side::Term] {
                if self.vertex_index(e.vertex(side)).is_none() {
                    violations.push(Violation::DanglingVertex {
                        edge: e.id.clone(),
                        vertex: e.vertex(side).clone(),
                    });
                }
                if e.attach(side).is_zero() {
                    violations.push(Violation::ZeroAttachingVector {
                        edge: e.id.clone(),
                        side,
                    });
                }
            }
        }
        let components = self.component_count();
        if components > 1 {
            violations.push(Violation::Disconnected { components });
        }
        ValidationReport { violations }
    }

    /// Number of connected components of the underlying graph, ignoring
    /// edges with dangling endpoints.
    pub fn component_count(&self) -> usize {
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            if let (Some(a), Some(b)) = (self.vertex_index(&e.init), self.vertex_index(&e.term)) {
                adjacency.entry(a).or_default().push(b);
                adjacency.entry(b).or_default().push(a);
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut components = 0;
        for start in 0..self.vertices.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &w in adjacency.get(&v).into_iter().flatten() {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }
}

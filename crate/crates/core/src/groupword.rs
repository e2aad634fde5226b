//! Words in the fundamental group of a tubular space and their Britton
//! normal form; the spiral words α_n, β_n and the convexity inequality
//! used for the free-by-cyclic family.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, Zero};
use thiserror::Error;

use crate::lattice::LatticeVector;
use crate::space::{EdgeId, Side, TubularSpace, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("letter {position} names unknown edge {edge}")]
    UnknownEdge { position: usize, edge: EdgeId },
    #[error("letter {position} names unknown vertex {vertex}")]
    UnknownVertex { position: usize, vertex: VertexId },
    #[error("letter {position} starts at vertex {found}, but the word is at {expected}")]
    NotComposable {
        position: usize,
        expected: VertexId,
        found: VertexId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    /// An element of the vertex group, in the vertex's basis.
    Vertex { vertex: VertexId, v: LatticeVector },
    /// Direction +1 crosses the edge from its init vertex to its term
    /// vertex, conjugating `f<-` to `f->`: `t^-1 f<- t = f->`.
    Edge { edge: EdgeId, dir: i8 },
}

impl Letter {
    pub fn vertex(vertex: &str, v: impl Into<LatticeVector>) -> Letter {
        Letter::Vertex {
            vertex: vertex.into(),
            v: v.into(),
        }
    }

    pub fn edge(edge: &str, dir: i8) -> Letter {
        Letter::Edge {
            edge: edge.into(),
            dir: dir.signum(),
        }
    }

    pub fn inverse(&self) -> Letter {
        match self {
            Letter::Vertex { vertex, v } => Letter::Vertex {
                vertex: vertex.clone(),
                v: -v.clone(),
            },
            Letter::Edge { edge, dir } => Letter::Edge {
                edge: edge.clone(),
                dir: -dir,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        GroupWord { letters }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: self.letters.iter().rev().map(Letter::inverse).collect(),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        GroupWord { letters }
    }

    /// Checks every letter exists and consecutive letters meet at a common
    /// vertex. Returns the vertices the word starts and ends at (None for
    /// the empty word).
    pub fn check(&self, space: &TubularSpace) -> Result<Option<(VertexId, VertexId)>, WordError> {
        let mut start: Option<VertexId> = None;
        let mut at: Option<VertexId> = None;
        for (position, l) in self.letters.iter().enumerate() {
            let (from, to) = match l {
                Letter::Vertex { vertex, .. } => {
                    if space.vertex_index(vertex).is_none() {
                        return Err(WordError::UnknownVertex {
                            position,
                            vertex: vertex.clone(),
                        });
                    }
                    (vertex.clone(), vertex.clone())
                }
                Letter::Edge { edge, dir } => {
                    let e = space.edge(edge).ok_or_else(|| WordError::UnknownEdge {
                        position,
                        edge: edge.clone(),
                    })?;
                    if *dir > 0 {
                        (e.init.clone(), e.term.clone())
                    } else {
                        (e.term.clone(), e.init.clone())
                    }
                }
            };
            match &at {
                Some(cur) if *cur != from => {
                    return Err(WordError::NotComposable {
                        position,
                        expected: cur.clone(),
                        found: from,
                    })
                }
                None => start = Some(from.clone()),
                _ => {}
            }
            at = Some(to);
        }
        Ok(start.zip(at))
    }

    /// Human-readable form; vertex elements are written in the vertex basis
    /// `a, b`, suffixed with the vertex id when `show_vertex` is set.
    pub fn render(&self, show_vertex: bool) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        let power = |base: &str, k: &BigInt| {
            if k.is_one() {
                base.to_string()
            } else {
                format!("{base}^{k}")
            }
        };
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| match l {
                Letter::Vertex { vertex, v } => {
                    let (a, b) = if show_vertex {
                        (format!("a_{vertex}"), format!("b_{vertex}"))
                    } else {
                        ("a".to_string(), "b".to_string())
                    };
                    let mut s = Vec::new();
                    if !v.x.is_zero() {
                        s.push(power(&a, &v.x));
                    }
                    if !v.y.is_zero() {
                        s.push(power(&b, &v.y));
                    }
                    if s.is_empty() {
                        "1".to_string()
                    } else {
                        s.join("")
                    }
                }
                Letter::Edge { edge, dir } => {
                    if *dir > 0 {
                        edge.to_string()
                    } else {
                        format!("{edge}^-1")
                    }
                }
            })
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub word: GroupWord,
    pub is_identity: bool,
}

/// Pushes a vertex element, merging with the top of the stack.
fn push_vertex(stack: &mut Vec<Letter>, vertex: VertexId, v: LatticeVector) {
    if let Some(Letter::Vertex { v: top, .. }) = stack.last_mut() {
        *top = &*top + &v;
        if top.is_zero() {
            stack.pop();
        }
    } else if !v.is_zero() {
        stack.push(Letter::Vertex { vertex, v });
    }
}

/// Britton normal form: merges adjacent vertex elements and pinches
/// `t^-1 (k f<-) t -> k f->` and `t (k f->) t^-1 -> k f<-`, scanning left
/// to right so the leftmost pinch always happens first.
pub fn britton_reduce(space: &TubularSpace, w: &GroupWord) -> Result<Reduced, WordError> {
    w.check(space)?;
    let mut stack: Vec<Letter> = Vec::with_capacity(w.letters.len());
    for l in &w.letters {
        match l {
            Letter::Vertex { vertex, v } => push_vertex(&mut stack, vertex.clone(), v.clone()),
            Letter::Edge { edge, dir } => {
                let e = space.edge(edge).expect("checked above");
                // the element conjugated by the pinch: entered through the
                // opposite letter, sitting on the side we are about to leave
                let (inner, outer) = if *dir > 0 {
                    (Side::Init, Side::Term)
                } else {
                    (Side::Term, Side::Init)
                };
                let n = stack.len();
                let opens = |l: &Letter| matches!(l, Letter::Edge { edge: e2, dir: d2 } if e2 == edge && *d2 == -dir);
                if n >= 1 && opens(&stack[n - 1]) {
                    stack.pop();
                    continue;
                }
                if n >= 2 && opens(&stack[n - 2]) {
                    if let Letter::Vertex { v, .. } = &stack[n - 1] {
                        if let Some(k) = v.multiple_of(e.attach(inner)) {
                            let image = &k * e.attach(outer);
                            stack.truncate(n - 2);
                            push_vertex(&mut stack, e.vertex(outer).clone(), image);
                            continue;
                        }
                    }
                }
                stack.push(l.clone());
            }
        }
    }
    Ok(Reduced {
        is_identity: stack.is_empty(),
        word: GroupWord { letters: stack },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpiralWords {
    /// `t (a^-1 b)^n α_{n-1}`, one letter per basis element of H.
    pub alpha: GroupWord,
    /// `a^n (t a^-1)^n`, one letter per generator of G.
    pub beta: GroupWord,
    pub alpha_length_h: u64,
    pub beta_length_g: u64,
}

/// The spiral words for the HNN extension with one vertex `vertex` and one
/// edge `edge` whose attaching vectors are `a` (init) and `b` (term).
pub fn spiral_words_on(vertex: &str, edge: &str, n: u32) -> SpiralWords {
    let step = Letter::vertex(vertex, (-1, 1));
    let mut alpha = GroupWord::identity();
    for i in 1..=n {
        let mut letters = vec![Letter::edge(edge, 1)];
        letters.extend(std::iter::repeat_n(step.clone(), i as usize));
        letters.extend(alpha.letters);
        alpha = GroupWord { letters };
    }
    let mut beta = vec![Letter::vertex(vertex, (1, 0)); n as usize];
    for _ in 0..n {
        beta.push(Letter::edge(edge, 1));
        beta.push(Letter::vertex(vertex, (-1, 0)));
    }
    let beta = GroupWord { letters: beta };
    SpiralWords {
        alpha_length_h: alpha.len() as u64,
        beta_length_g: beta.len() as u64,
        alpha,
        beta,
    }
}

/// The spiral words in the standard HNN presentation (`v`, edge `t`).
pub fn spiral_words(n: u32) -> SpiralWords {
    spiral_words_on("v", "t", n)
}

/// The HNN space the spiral words live in: `t^-1 a t = b`.
pub fn spiral_space() -> TubularSpace {
    use crate::space::{EdgeRecord, Vertex};
    TubularSpace::new(
        vec![Vertex {
            id: "v".into(),
            name: "v".into(),
        }],
        vec![EdgeRecord {
            id: "t".into(),
            init: "v".into(),
            term: "v".into(),
            init_attach: (1, 0).into(),
            term_attach: (0, 1).into(),
        }],
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityMargin {
    /// `|x-y|^(2|x-y|)`
    pub lhs: BigUint,
    /// `(2|x|)^(2|x|) * (2|y|)^(2|y|)`
    pub rhs: BigUint,
    pub ok: bool,
    pub equality: bool,
}

/// Compares `|x-y| log|x-y|` with `|x| log(2|x|) + |y| log(2|y|)` through
/// the equivalent integer inequality; `0^0 = 1`.
pub fn convexity_margin(x: &BigInt, y: &BigInt) -> ConvexityMargin {
    let selfpow = |base: BigUint, exp: &BigUint| -> BigUint {
        if exp.is_zero() {
            BigUint::one()
        } else {
            Pow::pow(base, exp)
        }
    };
    let d = (x - y).abs().magnitude().clone();
    let ax = x.magnitude().clone();
    let ay = y.magnitude().clone();
    let lhs = selfpow(d.clone(), &(&d * 2u32));
    let rhs = selfpow(&ax * 2u32, &(&ax * 2u32)) * selfpow(&ay * 2u32, &(&ay * 2u32));
    ConvexityMargin {
        ok: lhs <= rhs,
        equality: lhs == rhs,
        lhs,
        rhs,
    }
}

//! Embedded circuits: the directed multigraph with typed branches, its
//! incidence matrix `A` and the loop orientation matrix `B`.

mod embedding;

pub use embedding::{
    topological_loops, trace_faces, Dart, EdgeEnd, End, Loop, LoopKind, LoopSet, RotationSystem, SignedEdge,
};

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{format_rational, Rational, RationalMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("circuit has no edges")]
    Empty,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("edge `{0}` has a nonpositive parameter")]
    NonPositiveParameter(String),
    #[error("circuit is disconnected: vertex `{0}` is unreachable")]
    Disconnected(String),
    #[error("rotation at vertex `{vertex}` is missing edge-end {edge}.{end}")]
    MissingEdgeEnd { vertex: String, edge: String, end: End },
    #[error("rotation at vertex `{vertex}` lists edge-end {edge}.{end}, which is not incident there")]
    ForeignEdgeEnd { vertex: String, edge: String, end: End },
    #[error("edge-end {edge}.{end} appears more than once in the rotation system")]
    DuplicateEdgeEnd { edge: String, end: End },
    #[error("rotation system has {found} vertex cycles, circuit has {expected} vertices")]
    RotationSize { expected: usize, found: usize },
    #[error("loop `{0}` is not a closed walk")]
    OpenWalk(String),
    #[error("face `{0}` does not match any traced face of the embedding")]
    UnmatchedFace(String),
    #[error("{expected} faces traced from the embedding, {found} listed")]
    FaceCount { expected: usize, found: usize },
    #[error("embedding of genus {genus} needs {expected} topological loops, {found} listed")]
    TopologicalCount { genus: usize, expected: usize, found: usize },
    #[error("topological loop `{0}` depends on the face boundaries and the other loops")]
    DependentLoop(String),
    #[error("duplicate loop id `{0}`")]
    DuplicateLoop(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Capacitor,
    Inductor,
    Josephson,
    PhaseSlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchClass {
    Capacitive,
    Inductive,
}

impl ElementKind {
    pub const ALL: [ElementKind; 4] = [Self::Capacitor, Self::Inductor, Self::Josephson, Self::PhaseSlip];

    pub fn class(self) -> BranchClass {
        match self {
            Self::Capacitor | Self::PhaseSlip => BranchClass::Capacitive,
            Self::Inductor | Self::Josephson => BranchClass::Inductive,
        }
    }

    /// The element obtained by exchanging charges and fluxes.
    pub fn dual(self) -> Self {
        match self {
            Self::Capacitor => Self::Inductor,
            Self::Inductor => Self::Capacitor,
            Self::Josephson => Self::PhaseSlip,
            Self::PhaseSlip => Self::Josephson,
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Self::Capacitor | Self::Inductor)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Capacitor => "capacitor",
            Self::Inductor => "inductor",
            Self::Josephson => "josephson",
            Self::PhaseSlip => "phase_slip",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A branch element: `C`, `L`, `E_J` or `E_S` depending on the kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub kind: ElementKind,
    pub parameter: Rational,
}

impl Element {
    pub fn new(kind: ElementKind, parameter: Rational) -> Self {
        Self { kind, parameter }
    }

    pub fn capacitor(c: Rational) -> Self {
        Self::new(ElementKind::Capacitor, c)
    }

    pub fn inductor(l: Rational) -> Self {
        Self::new(ElementKind::Inductor, l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub element: Element,
}

impl Edge {
    pub fn class(&self) -> BranchClass {
        self.element.kind.class()
    }

    /// The other endpoint.
    pub fn opposite(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// Unresolved edge description, as read from a netlist.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl Circuit {
    pub fn new(vertices: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self, GraphError> {
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.as_str(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::new();
        let mut resolved = Vec::with_capacity(edges.len());
        for e in edges {
            if !seen.insert(e.id.clone()) {
                return Err(GraphError::DuplicateEdge(e.id));
            }
            let lookup = |v: &str| {
                index
                    .get(v)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownVertex { edge: e.id.clone(), vertex: v.to_string() })
            };
            let tail = lookup(&e.from)?;
            let head = lookup(&e.to)?;
            if tail == head {
                return Err(GraphError::SelfLoop(e.id));
            }
            if !e.element.parameter.is_positive() {
                return Err(GraphError::NonPositiveParameter(e.id));
            }
            resolved.push(Edge { id: e.id, tail, head, element: e.element });
        }
        let c = Self { vertices, edges: resolved };
        let comps = c.components(|_| true);
        if let Some(v) = comps.iter().position(|&k| k != 0) {
            return Err(GraphError::Disconnected(c.vertices[v].clone()));
        }
        Ok(c)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn classes(&self) -> Vec<BranchClass> {
        self.edges.iter().map(Edge::class).collect()
    }

    pub fn count_class(&self, class: BranchClass) -> usize {
        self.edges.iter().filter(|e| e.class() == class).count()
    }

    /// Connected-component label per vertex, using only edges accepted by
    /// `keep`. Labels are numbered in order of their smallest vertex.
    pub fn components(&self, keep: impl Fn(&Edge) -> bool) -> Vec<usize> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for e in self.edges.iter().filter(|e| keep(e)) {
            adj[e.tail].push(e.head);
            adj[e.head].push(e.tail);
        }
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Dimension of the cycle space of the subgraph on all vertices
    /// spanned by the edges of one class.
    pub fn cycle_rank(&self, class: BranchClass) -> usize {
        let comps = self.components(|e| e.class() == class);
        let k = comps.iter().max().map_or(0, |m| m + 1);
        self.count_class(class) + k - self.vertex_count()
    }

    /// Same circuit with one edge's element replaced.
    pub fn with_element(&self, edge: usize, element: Element) -> Result<Self, GraphError> {
        if !element.parameter.is_positive() {
            return Err(GraphError::NonPositiveParameter(self.edges[edge].id.clone()));
        }
        let mut c = self.clone();
        c.edges[edge].element = element;
        Ok(c)
    }
}

/// `A[e][v]`: +1 where `e` arrives at `v`, −1 where it leaves.
pub fn incidence_matrix(c: &Circuit) -> RationalMatrix {
    let mut a = RationalMatrix::zeros(c.edges.iter().map(|e| e.id.clone()).collect(), c.vertices.clone())
        .expect("circuit ids are unique");
    for (i, e) in c.edges.iter().enumerate() {
        a.set(i, e.head, Rational::one());
        a.set(i, e.tail, -Rational::one());
    }
    a
}

/// `B[l][e]`: signed number of traversals of `e` by loop `l`. An edge walked
/// once in each direction by the same face gets 0.
pub fn orientation_matrix(c: &Circuit, ls: &LoopSet) -> RationalMatrix {
    let mut b = RationalMatrix::zeros(ls.labels(), c.edges.iter().map(|e| e.id.clone()).collect())
        .expect("loop and edge ids are unique");
    for (i, l) in ls.loops().enumerate() {
        for s in &l.walk {
            let delta = if s.forward { Rational::one() } else { -Rational::one() };
            let x = b.get(i, s.edge) + delta;
            b.set(i, s.edge, x);
        }
    }
    b
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            writeln!(
                f,
                "{}: {} -> {} {} {}",
                e.id,
                self.vertices[e.tail],
                self.vertices[e.head],
                e.element.kind,
                format_rational(&e.element.parameter)
            )?;
        }
        Ok(())
    }
}

/// Whether a rational vector is identically zero.
pub(crate) fn all_zero(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    fn spec(id: &str, from: &str, to: &str, kind: ElementKind, p: i64) -> EdgeSpec {
        EdgeSpec { id: id.into(), from: from.into(), to: to.into(), element: Element::new(kind, int(p)) }
    }

    fn names(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn builds_lc_loop() {
        use ElementKind::*;
        let c = Circuit::new(
            names(&["v1", "v2"]),
            vec![spec("e1", "v1", "v2", Capacitor, 1), spec("e2", "v2", "v1", Inductor, 1)],
        )
        .unwrap();
        assert_eq!(c.edge_count(), 2);
        assert_eq!(c.cycle_rank(BranchClass::Capacitive), 0);
    }

    #[test]
    fn construction_errors_name_the_culprit() {
        use ElementKind::*;
        let v = names(&["v1", "v2", "v3"]);
        let zero_c = Circuit::new(v.clone(), vec![spec("e1", "v1", "v2", Capacitor, 0)]);
        assert_eq!(zero_c, Err(GraphError::NonPositiveParameter("e1".into())));
        let self_loop = Circuit::new(v.clone(), vec![spec("e7", "v1", "v1", Inductor, 1)]);
        assert_eq!(self_loop, Err(GraphError::SelfLoop("e7".into())));
        let dup =
            Circuit::new(v.clone(), vec![spec("e1", "v1", "v2", Inductor, 1), spec("e1", "v2", "v3", Inductor, 1)]);
        assert_eq!(dup, Err(GraphError::DuplicateEdge("e1".into())));
        let split = Circuit::new(v.clone(), vec![spec("e1", "v1", "v2", Inductor, 1)]);
        assert_eq!(split, Err(GraphError::Disconnected("v3".into())));
        let missing = Circuit::new(v, vec![spec("e1", "v1", "v9", Inductor, 1)]);
        assert_eq!(missing, Err(GraphError::UnknownVertex { edge: "e1".into(), vertex: "v9".into() }));
        let dup_v = Circuit::new(names(&["a", "a"]), vec![spec("e1", "a", "a", Inductor, 1)]);
        assert_eq!(dup_v, Err(GraphError::DuplicateVertex("a".into())));
    }

    #[test]
    fn single_edge_incidence_row() {
        use ElementKind::*;
        let c = Circuit::new(
            names(&["v1", "v2"]),
            vec![spec("e1", "v1", "v2", Capacitor, 1), spec("e2", "v1", "v2", Inductor, 1)],
        )
        .unwrap();
        let a = incidence_matrix(&c);
        assert_eq!(a.row(0), &[int(-1), int(1)]);
    }

    #[test]
    fn element_classes_and_duals() {
        for k in ElementKind::ALL {
            assert_ne!(k.class(), k.dual().class());
            assert_eq!(k.dual().dual(), k);
            assert_eq!(ElementKind::from_name(k.name()), Some(k));
        }
    }
}

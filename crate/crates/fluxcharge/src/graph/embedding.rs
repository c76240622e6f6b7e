//! Rotation systems, face tracing, genus and the loop set.
//!
//! A dart is a directed half-edge: dart `2e` runs along edge `e` from its tail
//! to its head, dart `2e + 1` runs backwards. The dart leaving a vertex through
//! edge-end `(e, end)` is `2e` for the tail end and `2e + 1` for the head end,
//! so edge-ends and darts are the same thing seen from the vertex.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use super::{Circuit, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Tail,
    Head,
}

impl End {
    pub fn other(self) -> Self {
        match self {
            End::Tail => End::Head,
            End::Head => End::Tail,
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            End::Tail => "tail",
            End::Head => "head",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart(pub usize);

impl Dart {
    pub fn edge(self) -> usize {
        self.0 / 2
    }

    pub fn forward(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn twin(self) -> Dart {
        Dart(self.0 ^ 1)
    }

    pub fn origin(self, c: &Circuit) -> usize {
        let e = &c.edges()[self.edge()];
        if self.forward() {
            e.tail
        } else {
            e.head
        }
    }

    pub fn target(self, c: &Circuit) -> usize {
        self.twin().origin(c)
    }

    pub fn edge_end(self) -> EdgeEnd {
        EdgeEnd { edge: self.edge(), end: if self.forward() { End::Tail } else { End::Head } }
    }

    pub fn from_edge_end(ee: EdgeEnd) -> Dart {
        Dart(2 * ee.edge + usize::from(ee.end == End::Head))
    }

    pub fn signed(self) -> SignedEdge {
        SignedEdge { edge: self.edge(), forward: self.forward() }
    }
}

/// One traversal of an edge, with or against its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedEdge {
    pub edge: usize,
    pub forward: bool,
}

impl SignedEdge {
    pub fn dart(self) -> Dart {
        Dart(2 * self.edge + usize::from(!self.forward))
    }
}

/// Cyclic order of edge-ends around every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationSystem {
    cycles: Vec<Vec<EdgeEnd>>,
    succ: Vec<Dart>,
}

impl RotationSystem {
    /// Validates that every edge-end of `c` appears exactly once, at the
    /// vertex it belongs to.
    pub fn new(c: &Circuit, cycles: Vec<Vec<EdgeEnd>>) -> Result<Self, GraphError> {
        if cycles.len() != c.vertex_count() {
            return Err(GraphError::RotationSize { expected: c.vertex_count(), found: cycles.len() });
        }
        let edge_id = |e: usize| c.edges()[e].id.clone();
        let mut seen = HashSet::new();
        let mut succ = vec![Dart(usize::MAX); 2 * c.edge_count()];
        for (v, cycle) in cycles.iter().enumerate() {
            for &ee in cycle {
                let d = Dart::from_edge_end(ee);
                if ee.edge >= c.edge_count() || d.origin(c) != v {
                    return Err(GraphError::ForeignEdgeEnd {
                        vertex: c.vertices()[v].clone(),
                        edge: if ee.edge < c.edge_count() { edge_id(ee.edge) } else { ee.edge.to_string() },
                        end: ee.end,
                    });
                }
                if !seen.insert(ee) {
                    return Err(GraphError::DuplicateEdgeEnd { edge: edge_id(ee.edge), end: ee.end });
                }
            }
            for (i, &ee) in cycle.iter().enumerate() {
                succ[Dart::from_edge_end(ee).0] = Dart::from_edge_end(cycle[(i + 1) % cycle.len()]);
            }
        }
        if let Some(d) = (0..2 * c.edge_count()).map(Dart).find(|d| !seen.contains(&d.edge_end())) {
            return Err(GraphError::MissingEdgeEnd {
                vertex: c.vertices()[d.origin(c)].clone(),
                edge: edge_id(d.edge()),
                end: d.edge_end().end,
            });
        }
        Ok(Self { cycles, succ })
    }

    pub fn cycles(&self) -> &[Vec<EdgeEnd>] {
        &self.cycles
    }

    /// Next dart counterclockwise around the dart's origin.
    pub fn successor(&self, d: Dart) -> Dart {
        self.succ[d.0]
    }

    /// The face permutation: after arriving along `d`, leave along the
    /// rotation successor of its twin.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.successor(d.twin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopKind {
    Face,
    Topological,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    pub id: String,
    pub kind: LoopKind,
    pub walk: Vec<SignedEdge>,
}

impl Loop {
    pub fn darts(&self) -> Vec<Dart> {
        self.walk.iter().map(|s| s.dart()).collect()
    }
}

/// Faces of an embedding, the extra topological loops, and the genus.
/// Faces come first in every loop-indexed structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopSet {
    faces: Vec<Loop>,
    topological: Vec<Loop>,
    genus: usize,
}

/// Traces the faces of `r` and derives the genus from Euler's formula.
/// Faces are labelled `f1, f2, ...` in order of their smallest dart.
pub fn trace_faces(c: &Circuit, r: &RotationSystem) -> LoopSet {
    let darts = 2 * c.edge_count();
    let mut visited = vec![false; darts];
    let mut faces = Vec::new();
    for start in 0..darts {
        if visited[start] {
            continue;
        }
        let mut walk = Vec::new();
        let mut d = Dart(start);
        while !visited[d.0] {
            visited[d.0] = true;
            walk.push(d.signed());
            d = r.face_next(d);
        }
        faces.push(Loop { id: format!("f{}", faces.len() + 1), kind: LoopKind::Face, walk });
    }
    let euler = faces.len() as i64 - c.edge_count() as i64 + c.vertex_count() as i64;
    // A rotation system of a connected graph always describes a closed
    // orientable surface, so 2 - euler is even and nonnegative.
    let genus = ((2 - euler) / 2) as usize;
    LoopSet { faces, topological: Vec::new(), genus }
}

impl LoopSet {
    pub fn faces(&self) -> &[Loop] {
        &self.faces
    }

    pub fn topological(&self) -> &[Loop] {
        &self.topological
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn len(&self) -> usize {
        self.faces.len() + self.topological.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn loops(&self) -> impl Iterator<Item = &Loop> {
        self.faces.iter().chain(&self.topological)
    }

    pub fn get(&self, i: usize) -> &Loop {
        if i < self.faces.len() {
            &self.faces[i]
        } else {
            &self.topological[i - self.faces.len()]
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.loops().map(|l| l.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.loops().position(|l| l.id == id)
    }

    /// Replaces the traced faces by an explicit, labelled face list. Each
    /// listed walk must equal a traced face up to cyclic rotation; the list
    /// order becomes the face order.
    pub fn with_face_labels(mut self, explicit: Vec<(String, Vec<SignedEdge>)>) -> Result<Self, GraphError> {
        if explicit.len() != self.faces.len() {
            return Err(GraphError::FaceCount { expected: self.faces.len(), found: explicit.len() });
        }
        let mut owner = HashMap::new();
        for (i, f) in self.faces.iter().enumerate() {
            for s in &f.walk {
                owner.insert(s.dart(), i);
            }
        }
        let mut used = vec![false; self.faces.len()];
        let mut relabelled = Vec::with_capacity(explicit.len());
        for (id, walk) in explicit {
            let matched = walk
                .first()
                .and_then(|s| owner.get(&s.dart()).copied())
                .filter(|&i| !used[i] && is_rotation_of(&walk, &self.faces[i].walk));
            let Some(i) = matched else {
                return Err(GraphError::UnmatchedFace(id));
            };
            used[i] = true;
            relabelled.push(Loop { id, kind: LoopKind::Face, walk });
        }
        self.faces = relabelled;
        self.check_unique_ids()?;
        Ok(self)
    }

    /// Installs explicitly chosen topological loops after checking they are
    /// closed walks, `2g` in number, and independent of the face span.
    pub fn with_topological_loops(
        mut self,
        c: &Circuit,
        loops: Vec<(String, Vec<SignedEdge>)>,
    ) -> Result<Self, GraphError> {
        let expected = 2 * self.genus;
        if loops.len() != expected {
            return Err(GraphError::TopologicalCount { genus: self.genus, expected, found: loops.len() });
        }
        let mut basis = Gf2Basis::new();
        for f in &self.faces {
            basis.insert(edge_parity(c.edge_count(), &f.walk));
        }
        let mut out = Vec::new();
        for (id, walk) in loops {
            if !is_closed_walk(c, &walk) {
                return Err(GraphError::OpenWalk(id));
            }
            if !basis.insert(edge_parity(c.edge_count(), &walk)) {
                return Err(GraphError::DependentLoop(id));
            }
            out.push(Loop { id, kind: LoopKind::Topological, walk });
        }
        self.topological = out;
        self.check_unique_ids()?;
        Ok(self)
    }

    /// Installs the default spanning-tree choice of topological loops.
    pub fn with_default_topological_loops(mut self, c: &Circuit) -> Self {
        self.topological = topological_loops(c, &self);
        self
    }

    fn check_unique_ids(&self) -> Result<(), GraphError> {
        let mut seen = HashSet::new();
        for l in self.loops() {
            if !seen.insert(l.id.as_str()) {
                return Err(GraphError::DuplicateLoop(l.id.clone()));
            }
        }
        Ok(())
    }
}

fn is_rotation_of(a: &[SignedEdge], b: &[SignedEdge]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..b.len()).any(|k| (0..a.len()).all(|i| a[i] == b[(i + k) % b.len()]))
}

fn is_closed_walk(c: &Circuit, walk: &[SignedEdge]) -> bool {
    if walk.is_empty() || walk.iter().any(|s| s.edge >= c.edge_count()) {
        return false;
    }
    (0..walk.len()).all(|i| walk[i].dart().target(c) == walk[(i + 1) % walk.len()].dart().origin(c))
}

/// Picks `2g` fundamental cycles of a breadth-first spanning tree that are
/// independent of the face boundaries over GF(2). Loops are named `t1, t2, ...`
/// and oriented along their non-tree edge.
pub fn topological_loops(c: &Circuit, faces: &LoopSet) -> Vec<Loop> {
    let target = 2 * faces.genus();
    if target == 0 {
        return Vec::new();
    }
    let n = c.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for (i, e) in c.edges().iter().enumerate() {
        adj[e.tail].push(i);
        adj[e.head].push(i);
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut in_tree = vec![false; c.edge_count()];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &e in &adj[u] {
            let w = c.edges()[e].opposite(u);
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(e);
                depth[w] = depth[u] + 1;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    // Step from a vertex to its tree parent.
    let up = |x: usize| {
        let e = parent[x].expect("non-root vertex has a parent edge");
        (SignedEdge { edge: e, forward: c.edges()[e].tail == x }, c.edges()[e].opposite(x))
    };

    let mut basis = Gf2Basis::new();
    for f in faces.faces() {
        basis.insert(edge_parity(c.edge_count(), &f.walk));
    }
    let mut chosen = Vec::new();
    for (i, e) in c.edges().iter().enumerate() {
        if in_tree[i] || chosen.len() == target {
            continue;
        }
        // Walk tail -> head along e, then back to the tail through the tree.
        let (mut a, mut b) = (e.head, e.tail);
        let mut rise = Vec::new();
        let mut fall = Vec::new();
        while a != b {
            if depth[a] >= depth[b] {
                let (s, p) = up(a);
                rise.push(s);
                a = p;
            } else {
                let (s, p) = up(b);
                fall.push(SignedEdge { edge: s.edge, forward: !s.forward });
                b = p;
            }
        }
        let mut walk = vec![SignedEdge { edge: i, forward: true }];
        walk.extend(rise);
        walk.extend(fall.into_iter().rev());
        if basis.insert(edge_parity(c.edge_count(), &walk)) {
            chosen.push(Loop { id: format!("t{}", chosen.len() + 1), kind: LoopKind::Topological, walk });
        }
    }
    chosen
}

/// Edge set of a walk mod 2, packed into words.
pub(crate) fn edge_parity(edges: usize, walk: &[SignedEdge]) -> Vec<u64> {
    let mut bits = vec![0u64; edges.div_ceil(64)];
    for s in walk {
        bits[s.edge / 64] ^= 1 << (s.edge % 64);
    }
    bits
}

/// Incrementally built GF(2) row space with one pivot bit per basis vector.
pub(crate) struct Gf2Basis {
    rows: Vec<(usize, Vec<u64>)>,
}

impl Gf2Basis {
    pub(crate) fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        for (p, row) in &self.rows {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
        v
    }

    /// Adds `v` if it is independent of the current span.
    pub(crate) fn insert(&mut self, v: Vec<u64>) -> bool {
        let v = self.reduce(v);
        let Some(word) = v.iter().position(|&w| w != 0) else {
            return false;
        };
        let pivot = word * 64 + v[word].trailing_zeros() as usize;
        // Keep rows fully reduced against the new pivot so reduce() stays
        // a single pass.
        for (_, row) in &mut self.rows {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&v) {
                    *x ^= y;
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }

    #[cfg(test)]
    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }
}

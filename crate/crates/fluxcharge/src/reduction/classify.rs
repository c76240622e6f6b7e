//! Null vectors of the connection matrix, classified by their circuit origin:
//! homogeneous loops on the left, homogeneous cuts on the right, plus the two
//! gauge directions.

use std::collections::VecDeque;

use num_traits::{One, Zero};

use crate::graph::{orientation_matrix, BranchClass, Circuit, LoopKind, LoopSet, SignedEdge};
use crate::linalg::{int, rank_of_vectors, EchelonBasis, Rational, RationalMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Face,
    Topological,
    /// A cycle of the one-class subgraph that is not a single listed loop.
    Combination,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousLoop {
    pub class: BranchClass,
    /// Coefficients over the loop set: `B^T vector` is the cycle.
    pub vector: Vec<Rational>,
    /// The cycle as signed edges, in edge order.
    pub cycle: Vec<SignedEdge>,
    pub provenance: Provenance,
    /// The loop id for single loops, otherwise a rendering of the cycle.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousCut {
    /// Class of the crossing edges.
    pub class: BranchClass,
    pub vertices: Vec<usize>,
    pub vector: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullClassification {
    pub capacitive_loops: Vec<HomogeneousLoop>,
    pub inductive_loops: Vec<HomogeneousLoop>,
    pub capacitive_cuts: Vec<HomogeneousCut>,
    pub inductive_cuts: Vec<HomogeneousCut>,
    /// Sum over faces (topological loops get 0).
    pub gauge_left: Vec<Rational>,
    pub gauge_right: Vec<Rational>,
}

/// Cycle bases of the capacitor-only and inductor-only subgraphs, each cycle
/// written as a combination of loops. Single loops whose boundary lies in one
/// class are preferred; the rest of each basis comes from fundamental cycles
/// of a spanning forest.
pub fn homogeneous_loops(c: &Circuit, ls: &LoopSet) -> (Vec<HomogeneousLoop>, Vec<HomogeneousLoop>) {
    let b = orientation_matrix(c, ls);
    let bt = b.transpose();
    (loops_of_class(c, ls, &b, &bt, BranchClass::Capacitive), loops_of_class(c, ls, &b, &bt, BranchClass::Inductive))
}

fn loops_of_class(
    c: &Circuit,
    ls: &LoopSet,
    b: &RationalMatrix,
    bt: &RationalMatrix,
    class: BranchClass,
) -> Vec<HomogeneousLoop> {
    let target = c.cycle_rank(class);
    let edges = c.edge_count();
    let mut out = Vec::new();
    if target == 0 {
        return out;
    }
    let mut cycles = EchelonBasis::new();

    for (i, l) in ls.loops().enumerate() {
        let z = b.row(i).to_vec();
        let support: Vec<usize> = (0..edges).filter(|&e| !z[e].is_zero()).collect();
        if support.is_empty() || support.iter().any(|&e| c.edges()[e].class() != class) {
            continue;
        }
        if !cycles.insert(&z) {
            continue;
        }
        let mut vector = vec![Rational::zero(); ls.len()];
        vector[i] = Rational::one();
        out.push(HomogeneousLoop {
            class,
            cycle: signed_support(&z),
            vector,
            provenance: match l.kind {
                LoopKind::Face => Provenance::Face,
                LoopKind::Topological => Provenance::Topological,
            },
            label: l.id.clone(),
        });
        if out.len() == target {
            return out;
        }
    }

    let mut pending = Vec::new();
    for z in fundamental_cycles(c, class) {
        if cycles.insert(&z) {
            pending.push(z);
            if out.len() + pending.len() == target {
                break;
            }
        }
    }
    // B^T has full column rank up to the face sum, and its image is the whole
    // cycle space, so each cycle has a preimage.
    let solutions = bt.solve_affine_many(&pending).expect("cycle vectors have one entry per edge");
    for (z, sol) in pending.into_iter().zip(solutions) {
        let sol = sol.expect("every cycle is a combination of loop boundaries");
        let cycle = signed_support(&z);
        let label = render_cycle(c, &cycle);
        out.push(HomogeneousLoop { class, vector: sol.particular, cycle, provenance: Provenance::Combination, label });
    }
    out
}

fn signed_support(z: &[Rational]) -> Vec<SignedEdge> {
    z.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(e, x)| SignedEdge { edge: e, forward: *x > Rational::zero() })
        .collect()
}

fn render_cycle(c: &Circuit, cycle: &[SignedEdge]) -> String {
    let parts: Vec<String> =
        cycle.iter().map(|s| format!("{}{}", if s.forward { "+" } else { "-" }, c.edges()[s.edge].id)).collect();
    format!("cycle({})", parts.join(" "))
}

/// Fundamental cycles of a breadth-first spanning forest of the one-class
/// subgraph, as signed edge vectors oriented along the non-forest edge.
fn fundamental_cycles(c: &Circuit, class: BranchClass) -> Vec<Vec<Rational>> {
    let n = c.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for (i, e) in c.edges().iter().enumerate().filter(|(_, e)| e.class() == class) {
        adj[e.tail].push(i);
        adj[e.head].push(i);
    }
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut in_forest = vec![false; c.edge_count()];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &e in &adj[u] {
                let w = c.edges()[e].opposite(u);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    depth[w] = depth[u] + 1;
                    in_forest[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut out = Vec::new();
    for (i, e) in c.edges().iter().enumerate() {
        if e.class() != class || in_forest[i] {
            continue;
        }
        let mut z = vec![Rational::zero(); c.edge_count()];
        z[i] = Rational::one();
        // Close the loop head -> ... -> tail through the forest. Moving from x
        // towards its parent along edge p traverses p forwards iff x is p's tail.
        let (mut a, mut b) = (e.head, e.tail);
        while a != b {
            if depth[a] >= depth[b] {
                let p = parent[a].expect("vertex below the root");
                z[p] += if c.edges()[p].tail == a { int(1) } else { int(-1) };
                a = c.edges()[p].opposite(a);
            } else {
                let p = parent[b].expect("vertex below the root");
                z[p] += if c.edges()[p].tail == b { int(-1) } else { int(1) };
                b = c.edges()[p].opposite(b);
            }
        }
        out.push(z);
    }
    out
}

/// Vertex sets that are unions of components of the subgraph with one class
/// removed. Components of the capacitor subgraph are cut off by inductors
/// only (inductive cuts) and vice versa. The component holding the last
/// vertex is left out of each family, since it is the complement of the rest
/// up to the gauge vector.
pub fn homogeneous_cuts(c: &Circuit) -> (Vec<HomogeneousCut>, Vec<HomogeneousCut>) {
    let family = |kept: BranchClass, crossing: BranchClass| {
        let comps = c.components(|e| e.class() == kept);
        let last = comps[c.vertex_count() - 1];
        let count = comps.iter().max().map_or(0, |m| m + 1);
        (0..count)
            .filter(|&k| k != last)
            .map(|k| {
                let vertices: Vec<usize> = (0..c.vertex_count()).filter(|&v| comps[v] == k).collect();
                let mut vector = vec![Rational::zero(); c.vertex_count()];
                for &v in &vertices {
                    vector[v] = Rational::one();
                }
                HomogeneousCut { class: crossing, vertices, vector }
            })
            .collect::<Vec<_>>()
    };
    (family(BranchClass::Inductive, BranchClass::Capacitive), family(BranchClass::Capacitive, BranchClass::Inductive))
}

impl NullClassification {
    pub fn new(c: &Circuit, ls: &LoopSet) -> Self {
        let (capacitive_loops, inductive_loops) = homogeneous_loops(c, ls);
        let (capacitive_cuts, inductive_cuts) = homogeneous_cuts(c);
        let gauge_left =
            ls.loops().map(|l| if l.kind == LoopKind::Face { Rational::one() } else { Rational::zero() }).collect();
        Self {
            capacitive_loops,
            inductive_loops,
            capacitive_cuts,
            inductive_cuts,
            gauge_left,
            gauge_right: vec![Rational::one(); c.vertex_count()],
        }
    }

    pub fn left_vectors(&self) -> Vec<Vec<Rational>> {
        std::iter::once(self.gauge_left.clone())
            .chain(self.capacitive_loops.iter().chain(&self.inductive_loops).map(|h| h.vector.clone()))
            .collect()
    }

    pub fn right_vectors(&self) -> Vec<Vec<Rational>> {
        std::iter::once(self.gauge_right.clone())
            .chain(self.capacitive_cuts.iter().chain(&self.inductive_cuts).map(|h| h.vector.clone()))
            .collect()
    }

    /// Checks that every listed vector annihilates `m` and that the lists
    /// span both null spaces exactly.
    pub fn verify(&self, m: &RationalMatrix) -> Result<(), String> {
        let left = self.left_vectors();
        let right = self.right_vectors();
        for v in &left {
            if !crate::graph::all_zero(&m.vec_mul(v).map_err(|e| e.to_string())?) {
                return Err("a listed loop vector does not left-annihilate M".into());
            }
        }
        for v in &right {
            if !crate::graph::all_zero(&m.mul_vec(v).map_err(|e| e.to_string())?) {
                return Err("a listed cut vector does not right-annihilate M".into());
            }
        }
        let rank = m.rank();
        let (lr, rr) = (rank_of_vectors(m.rows(), &left), rank_of_vectors(m.cols(), &right));
        if lr != left.len() || lr != m.rows() - rank {
            return Err(format!(
                "left family has rank {lr} for {} vectors; left null space has dimension {}",
                left.len(),
                m.rows() - rank
            ));
        }
        if rr != right.len() || rr != m.cols() - rank {
            return Err(format!(
                "right family has rank {rr} for {} vectors; right null space has dimension {}",
                right.len(),
                m.cols() - rank
            ));
        }
        Ok(())
    }
}

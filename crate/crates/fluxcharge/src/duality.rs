//! Planar duality: the dual embedded circuit, the exchange of charges and
//! fluxes in the Hamiltonian, and the obstruction on higher genus.

use num_traits::Zero;
use thiserror::Error;

use crate::analysis::EmbeddedCircuit;
use crate::graph::{
    trace_faces, BranchClass, Circuit, Dart, EdgeEnd, EdgeSpec, Element, End, LoopKind, RotationSystem, SignedEdge,
};
use crate::linalg::{EchelonBasis, Rational, RationalMatrix};
use crate::reduction::{CosineTerm, HamiltonianExpr, NullClassification, VariableChoice, VariableSpace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("B^T is not a valid incidence matrix: edge `{edge}` lies on {count} loops instead of 2 (genus {genus})")]
    NotIncidence { edge: String, count: usize, genus: usize },
    #[error("dual construction failed: {0}")]
    Construction(String),
}

/// Label correspondence between a circuit and its dual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualMap {
    /// Primal loop index -> dual vertex index.
    pub loop_to_vertex: Vec<usize>,
    /// Primal vertex index -> dual loop index.
    pub vertex_to_loop: Vec<usize>,
    /// Primal edge index -> (dual edge index, +1 if `A*` row equals the `B`
    /// column, -1 if it equals its negative).
    pub edge_to_edge: Vec<(usize, i8)>,
}

fn dual_id(id: &str) -> String {
    format!("{id}*")
}

/// Builds the dual of a planar embedded circuit. Dual vertex `l*` sits in
/// face `l`; dual edge `e*` runs from the face traversing `e` backwards to the
/// face traversing it forwards, so the dual incidence matrix is `B^T`. Its
/// rotation at `l*` lists the crossings in the order the face walk meets
/// them, and the dual face around primal vertex `v` is labelled `v*`.
pub fn dual_circuit(ec: &EmbeddedCircuit) -> Result<(EmbeddedCircuit, DualMap), DualityError> {
    let c = &ec.circuit;
    let b = ec.orientation();
    for e in 0..c.edge_count() {
        let count = (0..b.rows()).filter(|&l| !b.get(l, e).is_zero()).count();
        if count != 2 {
            return Err(DualityError::NotIncidence { edge: c.edges()[e].id.clone(), count, genus: ec.loops.genus() });
        }
    }
    if ec.loops.genus() > 0 {
        // Every edge on two loops yet a positive genus: only possible with
        // hand-picked topological walks that cancel themselves.
        let e = ec.loops.topological()[0].walk[0].edge;
        return Err(DualityError::NotIncidence { edge: c.edges()[e].id.clone(), count: 2, genus: ec.loops.genus() });
    }

    let faces = ec.loops.faces();
    let vertices: Vec<String> = faces.iter().map(|f| dual_id(&f.id)).collect();
    let mut ends = vec![(0usize, 0usize); c.edge_count()];
    for (l, f) in faces.iter().enumerate() {
        for s in &f.walk {
            if s.forward {
                ends[s.edge].1 = l;
            } else {
                ends[s.edge].0 = l;
            }
        }
    }
    let specs = c
        .edges()
        .iter()
        .zip(&ends)
        .map(|(e, &(tail, head))| EdgeSpec {
            id: dual_id(&e.id),
            from: vertices[tail].clone(),
            to: vertices[head].clone(),
            element: Element::new(e.element.kind.dual(), e.element.parameter.clone()),
        })
        .collect();
    let dual = Circuit::new(vertices, specs).map_err(|e| DualityError::Construction(e.to_string()))?;
    let cycles = faces
        .iter()
        .map(|f| {
            f.walk
                .iter()
                .map(|s| EdgeEnd { edge: s.edge, end: if s.forward { End::Head } else { End::Tail } })
                .collect()
        })
        .collect();
    let rotation = RotationSystem::new(&dual, cycles).map_err(|e| DualityError::Construction(e.to_string()))?;
    let traced = trace_faces(&dual, &rotation);
    if traced.face_count() != c.vertex_count() || traced.genus() != 0 {
        return Err(DualityError::Construction(format!(
            "dual embedding has {} faces and genus {}",
            traced.face_count(),
            traced.genus()
        )));
    }
    // Dual dart δ crosses primal dart δ ^ 1; the dual face containing δ
    // circles the origin of that primal dart.
    let mut labelled: Vec<Option<(String, Vec<SignedEdge>)>> = vec![None; c.vertex_count()];
    for f in traced.faces() {
        let v = Dart(f.walk[0].dart().0 ^ 1).origin(c);
        labelled[v] = Some((dual_id(&c.vertices()[v]), f.walk.clone()));
    }
    let labelled = labelled
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| DualityError::Construction("two dual faces circle the same vertex".into()))?;
    let loops = traced.with_face_labels(labelled).map_err(|e| DualityError::Construction(e.to_string()))?;

    let map = DualMap {
        loop_to_vertex: (0..faces.len()).collect(),
        vertex_to_loop: (0..c.vertex_count()).collect(),
        edge_to_edge: (0..c.edge_count()).map(|e| (e, 1)).collect(),
    };
    Ok((EmbeddedCircuit { circuit: dual, rotation, loops }, map))
}

/// Whether `M* = −M^T` under the label correspondence, exactly.
pub fn dual_connection_check(m: &RationalMatrix, m_dual: &RationalMatrix, dm: &DualMap) -> bool {
    if m_dual.rows() != m.cols()
        || m_dual.cols() != m.rows()
        || dm.loop_to_vertex.len() != m.rows()
        || dm.vertex_to_loop.len() != m.cols()
    {
        return false;
    }
    (0..m.rows())
        .all(|l| (0..m.cols()).all(|v| *m_dual.get(dm.vertex_to_loop[v], dm.loop_to_vertex[l]) == -m.get(l, v).clone()))
}

fn same_cycle<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len()
        && (a.is_empty() || (0..b.len()).any(|k| a.iter().zip(b.iter().cycle().skip(k)).all(|(x, y)| x == y)))
}

/// Whether `dd`, the dual of the dual of `ec`, is `ec` again under the
/// composed label maps: names gain `**`, every edge keeps its endpoints,
/// orientation, element and parameter, and every rotation and face is the
/// same cyclic sequence.
pub fn double_dual_matches(ec: &EmbeddedCircuit, dd: &EmbeddedCircuit, first: &DualMap, second: &DualMap) -> bool {
    let (c, cc) = (&ec.circuit, &dd.circuit);
    if c.vertex_count() != cc.vertex_count() || c.edge_count() != cc.edge_count() {
        return false;
    }
    let vmap: Vec<usize> = (0..c.vertex_count()).map(|v| second.loop_to_vertex[first.vertex_to_loop[v]]).collect();
    let emap: Vec<(usize, i8)> = (0..c.edge_count())
        .map(|e| {
            let (d, s1) = first.edge_to_edge[e];
            let (dd, s2) = second.edge_to_edge[d];
            (dd, s1 * s2)
        })
        .collect();
    let vertices_ok = (0..c.vertex_count()).all(|v| cc.vertices()[vmap[v]] == format!("{}**", c.vertices()[v]));
    let edges_ok = c.edges().iter().enumerate().all(|(e, edge)| {
        let (f, sign) = emap[e];
        let other = &cc.edges()[f];
        let (tail, head) = if sign > 0 { (other.tail, other.head) } else { (other.head, other.tail) };
        other.id == format!("{}**", edge.id)
            && tail == vmap[edge.tail]
            && head == vmap[edge.head]
            && other.element == edge.element
    });
    if !(vertices_ok && edges_ok) {
        return false;
    }
    let map_end = |ee: &EdgeEnd| {
        let (f, sign) = emap[ee.edge];
        let end = if sign > 0 { ee.end } else { ee.end.other() };
        EdgeEnd { edge: f, end }
    };
    let rotations_ok = (0..c.vertex_count()).all(|v| {
        let mapped: Vec<EdgeEnd> = ec.rotation.cycles()[v].iter().map(map_end).collect();
        same_cycle(&mapped, &dd.rotation.cycles()[vmap[v]])
    });
    let faces_ok = ec.loops.faces().len() == dd.loops.faces().len()
        && ec.loops.faces().iter().all(|f| {
            dd.loops.faces().iter().any(|g| {
                let mapped: Vec<(usize, bool)> = f
                    .walk
                    .iter()
                    .map(|s| {
                        let (e, sign) = emap[s.edge];
                        (e, s.forward == (sign > 0))
                    })
                    .collect();
                let walk: Vec<(usize, bool)> = g.walk.iter().map(|s| (s.edge, s.forward)).collect();
                same_cycle(&mapped, &walk)
            })
        });
    rotations_ok && faces_ok
}

/// Carries a variable choice over to the dual circuit so that the dual pairs
/// are `Q* = −Φ` and `Φ* = Q`: the flux rows become (negated) charge rows on
/// the dual faces, the charge rows become flux rows on the dual vertices.
pub fn dual_variable_choice(vc: &VariableChoice, dm: &DualMap) -> VariableChoice {
    let n = vc.charges.rows();
    let mut charges = RationalMatrix::unlabeled(n, dm.vertex_to_loop.len());
    let mut fluxes = RationalMatrix::unlabeled(n, dm.loop_to_vertex.len());
    for i in 0..n {
        for (v, &l) in dm.vertex_to_loop.iter().enumerate() {
            charges.set(i, l, -vc.fluxes.get(i, v).clone());
        }
        for (l, &v) in dm.loop_to_vertex.iter().enumerate() {
            fluxes.set(i, v, vc.charges.get(i, l).clone());
        }
    }
    VariableChoice { charges, fluxes }
}

/// `H*(Q, Φ) = H(−Φ, Q)`: the quadratic forms trade places and every cosine
/// moves to the other variable space.
pub fn hamiltonian_dual(h: &HamiltonianExpr) -> HamiltonianExpr {
    let cosines = h
        .cosines()
        .iter()
        .map(|t| CosineTerm {
            coefficient: t.coefficient.clone(),
            space: t.space.other(),
            argument: match t.space {
                VariableSpace::Charge => t.argument.iter().map(|x| -x.clone()).collect(),
                VariableSpace::Flux => t.argument.clone(),
            },
        })
        .collect();
    HamiltonianExpr::new(h.quadratic_phi().clone(), h.quadratic_q().clone(), cosines, h.constant().clone())
}

pub fn is_self_dual(h: &HamiltonianExpr) -> bool {
    hamiltonian_dual(h) == *h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologicalLoopStatus {
    pub id: String,
    /// The class shared by all edges of the loop, if any.
    pub homogeneous: Option<BranchClass>,
    /// Whether the loop charge lies in the span of the null directions.
    pub non_dynamical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarizabilityReport {
    pub loops: Vec<TopologicalLoopStatus>,
    /// All topological loops homogeneous; vacuously true when planar.
    pub effectively_planar: bool,
}

pub fn planarizability_report(ec: &EmbeddedCircuit, nc: &NullClassification) -> PlanarizabilityReport {
    let c = &ec.circuit;
    let mut span = EchelonBasis::new();
    for v in nc.left_vectors() {
        span.insert(&v);
    }
    let loops: Vec<TopologicalLoopStatus> = ec
        .loops
        .loops()
        .enumerate()
        .filter(|(_, l)| l.kind == LoopKind::Topological)
        .map(|(i, l)| {
            let first = c.edges()[l.walk[0].edge].class();
            let homogeneous = l.walk.iter().all(|s| c.edges()[s.edge].class() == first).then_some(first);
            let mut indicator = vec![Rational::zero(); ec.loops.len()];
            indicator[i] = Rational::from_integer(1.into());
            TopologicalLoopStatus { id: l.id.clone(), homogeneous, non_dynamical: span.contains(&indicator) }
        })
        .collect();
    let effectively_planar = loops.iter().all(|s| s.homogeneous.is_some());
    PlanarizabilityReport { loops, effectively_planar }
}

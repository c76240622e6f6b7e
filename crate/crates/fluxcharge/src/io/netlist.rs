//! The `fluxcharge/1` netlist format: a JSON document holding the circuit,
//! its rotation system, and optionally face labels, topological loops and a
//! choice of canonical variables.

use std::collections::HashSet;

use num_traits::Zero;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::analysis::EmbeddedCircuit;
use crate::graph::{
    trace_faces, Circuit, EdgeEnd, EdgeSpec, Element, ElementKind, End, GraphError, RotationSystem, SignedEdge,
};
use crate::linalg::{format_rational, parse_rational, Rational, RationalMatrix};
use crate::reduction::VariableChoice;

pub const FORMAT_VERSION: &str = "fluxcharge/1";

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid document at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("unsupported format version `{0}` (expected `{FORMAT_VERSION}`)")]
    Version(String),
    #[error("duplicate {what} id `{id}`")]
    Duplicate { what: &'static str, id: String },
    #[error("edge `{edge}` has unknown element kind `{kind}`")]
    UnknownKind { edge: String, kind: String },
    #[error("{context} references unknown vertex `{id}`")]
    UnknownVertex { context: String, id: String },
    #[error("{context} references unknown edge `{id}`")]
    UnknownEdge { context: String, id: String },
    #[error("{context} references unknown loop `{id}`")]
    UnknownLoop { context: String, id: String },
    #[error("{context}: invalid value `{text}`")]
    BadValue { context: String, text: String },
    #[error("{context}: invalid walk step `{token}` (expected `+id` or `-id`)")]
    BadStep { context: String, token: String },
    #[error("embedding of vertex `{vertex}`: edge `{edge}` has no {end} end there")]
    EndNotAtVertex { vertex: String, edge: String, end: String },
    #[error("embedding lists vertex `{0}` more than once")]
    DuplicateRotation(String),
    #[error("embedding has no rotation for vertex `{0}`")]
    MissingRotation(String),
    #[error("variable choice has {charges} charge rows but {fluxes} flux rows")]
    ChoiceShape { charges: usize, fluxes: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetlistEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeEndRef {
    pub edge: String,
    pub end: End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRotation {
    pub vertex: String,
    pub ends: Vec<EdgeEndRef>,
}

/// A labelled closed walk; `true` marks a traversal along the edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedWalk {
    pub id: String,
    pub walk: Vec<(String, bool)>,
}

/// Rows of `D` (over loop ids) and `S` (over vertex ids), sparse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceSpec {
    pub charges: Vec<Vec<(String, Rational)>>,
    pub fluxes: Vec<Vec<(String, Rational)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetlistDocument {
    pub version: String,
    pub vertices: Vec<String>,
    pub edges: Vec<NetlistEdge>,
    pub embedding: Vec<VertexRotation>,
    pub faces: Vec<NamedWalk>,
    pub topological_loops: Vec<NamedWalk>,
    pub variable_choice: Option<ChoiceSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: String,
    vertices: Vec<String>,
    edges: Vec<RawEdge>,
    embedding: Vec<RawRotation>,
    #[serde(default)]
    faces: Option<Vec<RawLoop>>,
    #[serde(default)]
    topological_loops: Option<Vec<RawLoop>>,
    #[serde(default)]
    variable_choice: Option<RawChoice>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    from: String,
    to: String,
    kind: String,
    value: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotation {
    vertex: String,
    rotation: Vec<RawEnd>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEnd {
    Short(String),
    Full { edge: String, end: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoop {
    id: String,
    walk: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChoice {
    charges: Vec<Map<String, Value>>,
    fluxes: Vec<Map<String, Value>>,
}

fn value_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_value(v: &Value, context: impl Fn() -> String) -> Result<Rational, NetlistError> {
    let text = value_text(v).ok_or_else(|| NetlistError::BadValue { context: context(), text: v.to_string() })?;
    parse_rational(&text).map_err(|_| NetlistError::BadValue { context: context(), text })
}

fn parse_walk(raw: RawLoop, edges: &HashSet<&str>, what: &str) -> Result<NamedWalk, NetlistError> {
    let context = format!("{what} `{}`", raw.id);
    let mut walk = Vec::with_capacity(raw.walk.len());
    for token in raw.walk {
        let (forward, id) = match token.split_at_checked(1) {
            Some(("+", id)) => (true, id),
            Some(("-", id)) => (false, id),
            _ => return Err(NetlistError::BadStep { context, token }),
        };
        if !edges.contains(id) {
            return Err(NetlistError::UnknownEdge { context, id: id.to_string() });
        }
        walk.push((id.to_string(), forward));
    }
    Ok(NamedWalk { id: raw.id, walk })
}

fn check_unique<'a>(ids: impl IntoIterator<Item = &'a String>, what: &'static str) -> Result<(), NetlistError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(NetlistError::Duplicate { what, id: id.clone() });
        }
    }
    Ok(())
}

/// Parses and checks a netlist: version, unique ids, known element kinds,
/// exact parameter values and referential integrity.
pub fn parse_netlist(text: &str) -> Result<NetlistDocument, NetlistError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        if e.is_data() {
            NetlistError::Schema { line, column, message }
        } else {
            NetlistError::Syntax { line, column, message }
        }
    })?;
    if raw.version != FORMAT_VERSION {
        return Err(NetlistError::Version(raw.version));
    }
    check_unique(&raw.vertices, "vertex")?;
    check_unique(raw.edges.iter().map(|e| &e.id), "edge")?;
    let vertex_set: HashSet<&str> = raw.vertices.iter().map(String::as_str).collect();
    let edge_set: HashSet<&str> = raw.edges.iter().map(|e| e.id.as_str()).collect();

    let mut edges = Vec::with_capacity(raw.edges.len());
    for e in &raw.edges {
        for v in [&e.from, &e.to] {
            if !vertex_set.contains(v.as_str()) {
                return Err(NetlistError::UnknownVertex { context: format!("edge `{}`", e.id), id: v.clone() });
            }
        }
        let kind = ElementKind::from_name(&e.kind)
            .ok_or_else(|| NetlistError::UnknownKind { edge: e.id.clone(), kind: e.kind.clone() })?;
        let parameter = parse_value(&e.value, || format!("edge `{}`", e.id))?;
        edges.push(NetlistEdge {
            id: e.id.clone(),
            from: e.from.clone(),
            to: e.to.clone(),
            element: Element::new(kind, parameter),
        });
    }

    let mut embedding = Vec::with_capacity(raw.embedding.len());
    let mut rotated = HashSet::new();
    for r in raw.embedding {
        if !vertex_set.contains(r.vertex.as_str()) {
            return Err(NetlistError::UnknownVertex { context: "embedding".into(), id: r.vertex });
        }
        if !rotated.insert(r.vertex.clone()) {
            return Err(NetlistError::DuplicateRotation(r.vertex));
        }
        let mut ends = Vec::with_capacity(r.rotation.len());
        for item in r.rotation {
            let (edge_id, end) = match item {
                RawEnd::Short(id) => (id, None),
                RawEnd::Full { edge, end } => {
                    let end = match end.as_str() {
                        "tail" => End::Tail,
                        "head" => End::Head,
                        _ => {
                            return Err(NetlistError::BadValue {
                                context: format!("embedding of vertex `{}`", r.vertex),
                                text: end,
                            })
                        }
                    };
                    (edge, Some(end))
                }
            };
            let edge = edges.iter().find(|e| e.id == edge_id).ok_or_else(|| NetlistError::UnknownEdge {
                context: format!("embedding of vertex `{}`", r.vertex),
                id: edge_id.clone(),
            })?;
            let at = |end: End| match end {
                End::Tail => edge.from == r.vertex,
                End::Head => edge.to == r.vertex,
            };
            let end = match end {
                Some(end) if at(end) => end,
                Some(end) => {
                    return Err(NetlistError::EndNotAtVertex { vertex: r.vertex, edge: edge_id, end: end.to_string() })
                }
                // Self-loops are rejected when the circuit is built, so at
                // most one end of the edge sits at this vertex.
                None if at(End::Tail) => End::Tail,
                None if at(End::Head) => End::Head,
                None => {
                    return Err(NetlistError::EndNotAtVertex {
                        vertex: r.vertex,
                        edge: edge_id,
                        end: "incident".into(),
                    })
                }
            };
            ends.push(EdgeEndRef { edge: edge_id, end });
        }
        embedding.push(VertexRotation { vertex: r.vertex, ends });
    }

    let faces = raw
        .faces
        .unwrap_or_default()
        .into_iter()
        .map(|l| parse_walk(l, &edge_set, "face"))
        .collect::<Result<Vec<_>, _>>()?;
    let topological_loops = raw
        .topological_loops
        .unwrap_or_default()
        .into_iter()
        .map(|l| parse_walk(l, &edge_set, "topological loop"))
        .collect::<Result<Vec<_>, _>>()?;
    check_unique(faces.iter().chain(&topological_loops).map(|l| &l.id), "loop")?;

    let variable_choice = match raw.variable_choice {
        None => None,
        Some(rc) => {
            if rc.charges.len() != rc.fluxes.len() {
                return Err(NetlistError::ChoiceShape { charges: rc.charges.len(), fluxes: rc.fluxes.len() });
            }
            let rows = |maps: Vec<Map<String, Value>>, what: &str| {
                maps.into_iter()
                    .enumerate()
                    .map(|(i, m)| {
                        m.into_iter()
                            .map(|(k, v)| {
                                let c = parse_value(&v, || format!("variable choice {what} row {}", i + 1))?;
                                Ok((k, c))
                            })
                            .filter(|r: &Result<(String, Rational), NetlistError>| {
                                r.as_ref().map_or(true, |(_, c)| !c.is_zero())
                            })
                            .collect::<Result<Vec<_>, NetlistError>>()
                    })
                    .collect::<Result<Vec<_>, NetlistError>>()
            };
            let charges = rows(rc.charges, "charge")?;
            let fluxes = rows(rc.fluxes, "flux")?;
            for (i, row) in fluxes.iter().enumerate() {
                if let Some((k, _)) = row.iter().find(|(k, _)| !vertex_set.contains(k.as_str())) {
                    return Err(NetlistError::UnknownVertex {
                        context: format!("variable choice flux row {}", i + 1),
                        id: k.clone(),
                    });
                }
            }
            Some(ChoiceSpec { charges, fluxes })
        }
    };

    Ok(NetlistDocument {
        version: raw.version,
        vertices: raw.vertices,
        edges,
        embedding,
        faces,
        topological_loops,
        variable_choice,
    })
}

impl NetlistDocument {
    /// The circuit alone, without its embedding.
    pub fn circuit(&self) -> Result<Circuit, NetlistError> {
        let specs = self
            .edges
            .iter()
            .map(|e| EdgeSpec { id: e.id.clone(), from: e.from.clone(), to: e.to.clone(), element: e.element.clone() })
            .collect();
        Ok(Circuit::new(self.vertices.clone(), specs)?)
    }

    /// Builds the embedded circuit: validates the rotation system, traces
    /// faces, matches any explicit faces and topological loops, and turns
    /// the variable choice into matrices over the final loop set.
    pub fn build(&self) -> Result<(EmbeddedCircuit, Option<VariableChoice>), NetlistError> {
        let circuit = self.circuit()?;
        let mut cycles = vec![None; circuit.vertex_count()];
        for r in &self.embedding {
            let v = circuit.vertex_index(&r.vertex).expect("checked when parsed");
            cycles[v] = Some(
                r.ends
                    .iter()
                    .map(|x| EdgeEnd { edge: circuit.edge_index(&x.edge).expect("checked when parsed"), end: x.end })
                    .collect::<Vec<_>>(),
            );
        }
        let cycles = cycles
            .into_iter()
            .enumerate()
            .map(|(v, c)| c.ok_or_else(|| NetlistError::MissingRotation(circuit.vertices()[v].clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let rotation = RotationSystem::new(&circuit, cycles)?;

        let resolve = |w: &NamedWalk| -> (String, Vec<SignedEdge>) {
            let walk = w
                .walk
                .iter()
                .map(|(id, forward)| SignedEdge {
                    edge: circuit.edge_index(id).expect("checked when parsed"),
                    forward: *forward,
                })
                .collect();
            (w.id.clone(), walk)
        };
        let mut loops = trace_faces(&circuit, &rotation);
        if !self.faces.is_empty() {
            loops = loops.with_face_labels(self.faces.iter().map(resolve).collect())?;
        }
        loops = if self.topological_loops.is_empty() {
            loops.with_default_topological_loops(&circuit)
        } else {
            loops.with_topological_loops(&circuit, self.topological_loops.iter().map(resolve).collect())?
        };

        let choice = match &self.variable_choice {
            None => None,
            Some(spec) => {
                let n = spec.charges.len();
                let mut d = RationalMatrix::unlabeled(n, loops.len());
                let mut s = RationalMatrix::unlabeled(n, circuit.vertex_count());
                for (i, row) in spec.charges.iter().enumerate() {
                    for (id, c) in row {
                        let j = loops.index_of(id).ok_or_else(|| NetlistError::UnknownLoop {
                            context: format!("variable choice charge row {}", i + 1),
                            id: id.clone(),
                        })?;
                        d.set(i, j, c.clone());
                    }
                }
                for (i, row) in spec.fluxes.iter().enumerate() {
                    for (id, c) in row {
                        s.set(i, circuit.vertex_index(id).expect("checked when parsed"), c.clone());
                    }
                }
                Some(VariableChoice { charges: d, fluxes: s })
            }
        };
        Ok((EmbeddedCircuit { circuit, rotation, loops }, choice))
    }

    /// Describes an embedded circuit, listing its faces and topological
    /// loops explicitly so that labels survive a round trip.
    pub fn from_embedded(ec: &EmbeddedCircuit, choice: Option<&VariableChoice>) -> Self {
        let c = &ec.circuit;
        let edges = c
            .edges()
            .iter()
            .map(|e| NetlistEdge {
                id: e.id.clone(),
                from: c.vertices()[e.tail].clone(),
                to: c.vertices()[e.head].clone(),
                element: e.element.clone(),
            })
            .collect();
        let embedding = ec
            .rotation
            .cycles()
            .iter()
            .enumerate()
            .map(|(v, cycle)| VertexRotation {
                vertex: c.vertices()[v].clone(),
                ends: cycle.iter().map(|x| EdgeEndRef { edge: c.edges()[x.edge].id.clone(), end: x.end }).collect(),
            })
            .collect();
        let named = |l: &crate::graph::Loop| NamedWalk {
            id: l.id.clone(),
            walk: l.walk.iter().map(|s| (c.edges()[s.edge].id.clone(), s.forward)).collect(),
        };
        let sparse = |m: &RationalMatrix, names: Vec<String>| {
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .filter(|&j| !m.get(i, j).is_zero())
                        .map(|j| (names[j].clone(), m.get(i, j).clone()))
                        .collect()
                })
                .collect()
        };
        NetlistDocument {
            version: FORMAT_VERSION.to_string(),
            vertices: c.vertices().to_vec(),
            edges,
            embedding,
            faces: ec.loops.faces().iter().map(named).collect(),
            topological_loops: ec.loops.topological().iter().map(named).collect(),
            variable_choice: choice.map(|vc| ChoiceSpec {
                charges: sparse(&vc.charges, ec.loops.labels()),
                fluxes: sparse(&vc.fluxes, c.vertices().to_vec()),
            }),
        }
    }

    /// Canonical JSON: fixed key order, values as `p/q` strings, edge-end
    /// shorthand except on multi-edges, empty optional fields omitted.
    pub fn to_value(&self) -> Value {
        fn pair(e: &NetlistEdge) -> [&str; 2] {
            let mut p = [e.from.as_str(), e.to.as_str()];
            p.sort_unstable();
            p
        }
        let multi: HashSet<&str> = self
            .edges
            .iter()
            .filter(|e| self.edges.iter().filter(|f| pair(f) == pair(e)).count() > 1)
            .map(|e| e.id.as_str())
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "from": e.from,
                    "to": e.to,
                    "kind": e.element.kind.name(),
                    "value": format_rational(&e.element.parameter),
                })
            })
            .collect();
        let embedding: Vec<Value> = self
            .embedding
            .iter()
            .map(|r| {
                let ends: Vec<Value> = r
                    .ends
                    .iter()
                    .map(|x| {
                        if multi.contains(x.edge.as_str()) {
                            json!({ "edge": x.edge, "end": x.end.to_string() })
                        } else {
                            Value::String(x.edge.clone())
                        }
                    })
                    .collect();
                json!({ "vertex": r.vertex, "rotation": ends })
            })
            .collect();
        let walks = |ls: &[NamedWalk]| -> Value {
            ls.iter()
                .map(|l| {
                    let steps: Vec<String> =
                        l.walk.iter().map(|(id, fwd)| format!("{}{id}", if *fwd { "+" } else { "-" })).collect();
                    json!({ "id": l.id, "walk": steps })
                })
                .collect()
        };
        let mut doc = Map::new();
        doc.insert("version".into(), Value::String(self.version.clone()));
        doc.insert("vertices".into(), json!(self.vertices));
        doc.insert("edges".into(), Value::Array(edges));
        doc.insert("embedding".into(), Value::Array(embedding));
        if !self.faces.is_empty() {
            doc.insert("faces".into(), walks(&self.faces));
        }
        if !self.topological_loops.is_empty() {
            doc.insert("topological_loops".into(), walks(&self.topological_loops));
        }
        if let Some(vc) = &self.variable_choice {
            let rows = |rs: &[Vec<(String, Rational)>]| -> Value {
                rs.iter()
                    .map(|row| {
                        Value::Object(row.iter().map(|(k, c)| (k.clone(), Value::String(format_rational(c)))).collect())
                    })
                    .collect()
            };
            doc.insert("variable_choice".into(), json!({ "charges": rows(&vc.charges), "fluxes": rows(&vc.fluxes) }));
        }
        Value::Object(doc)
    }
}

pub fn serialize_netlist(d: &NetlistDocument) -> String {
    let mut s = serde_json::to_string_pretty(&d.to_value()).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// `serialize_netlist(parse_netlist(text))`.
pub fn normalize(text: &str) -> Result<String, NetlistError> {
    Ok(serialize_netlist(&parse_netlist(text)?))
}

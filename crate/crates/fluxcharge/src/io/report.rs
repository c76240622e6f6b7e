//! The analysis report, in structured (JSON) and text form. Exact rationals
//! are written as `p/q` strings.

use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::duality::{is_self_dual, planarizability_report};
use crate::graph::{BranchClass, Circuit, SignedEdge};
use crate::linalg::{format_rational, Rational, RationalMatrix};
use crate::reduction::{
    render_combination, HamiltonianExpr, HomogeneousCut, HomogeneousLoop, Provenance, VariableSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<String>>,
}

impl MatrixReport {
    pub fn new(m: &RationalMatrix) -> Self {
        Self { rows: m.row_labels().to_vec(), cols: m.col_labels().to_vec(), entries: m.render_rows() }
    }

    /// Back to an exact matrix.
    pub fn to_matrix(&self) -> Result<RationalMatrix, crate::linalg::LinalgError> {
        let rows = self
            .entries
            .iter()
            .map(|r| r.iter().map(|x| crate::linalg::parse_rational(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        RationalMatrix::from_rows(self.rows.clone(), self.cols.clone(), rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopReport {
    pub label: String,
    pub provenance: String,
    pub cycle: Vec<String>,
    pub combination: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutReport {
    pub vertices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub capacitive_loops: Vec<LoopReport>,
    pub inductive_loops: Vec<LoopReport>,
    pub capacitive_cuts: Vec<CutReport>,
    pub inductive_cuts: Vec<CutReport>,
    pub gauge_left: String,
    pub gauge_right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationReport {
    pub variable: String,
    pub reason: String,
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub charge: String,
    pub flux: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosineReport {
    pub coefficient: String,
    pub space: String,
    pub argument: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonianReport {
    pub text: String,
    pub quadratic_q: MatrixReport,
    pub quadratic_phi: MatrixReport,
    pub cosines: Vec<CosineReport>,
    pub constant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologicalLoopReport {
    pub id: String,
    pub homogeneous: Option<String>,
    pub non_dynamical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub vertices: usize,
    pub edges: usize,
    pub genus: usize,
    pub faces: usize,
    pub loops: usize,
    pub pairs: usize,
    pub incidence: MatrixReport,
    pub orientation: MatrixReport,
    pub connection: MatrixReport,
    pub classification: ClassificationReport,
    pub eliminations: Vec<EliminationReport>,
    pub canonical_pairs: Vec<PairReport>,
    pub hamiltonian: HamiltonianReport,
    pub commutation_relations: Vec<String>,
    pub kinetic_identity: bool,
    pub self_dual: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub topological_loops: Vec<TopologicalLoopReport>,
}

fn class_name(c: BranchClass) -> &'static str {
    match c {
        BranchClass::Capacitive => "capacitive",
        BranchClass::Inductive => "inductive",
    }
}

fn render_cycle(c: &Circuit, cycle: &[SignedEdge]) -> Vec<String> {
    cycle.iter().map(|s| format!("{}{}", if s.forward { "+" } else { "-" }, c.edges()[s.edge].id)).collect()
}

fn loop_report(c: &Circuit, names: &[String], h: &HomogeneousLoop) -> LoopReport {
    LoopReport {
        label: h.label.clone(),
        provenance: match h.provenance {
            Provenance::Face => "face",
            Provenance::Topological => "topological",
            Provenance::Combination => "combination",
        }
        .into(),
        cycle: render_cycle(c, &h.cycle),
        combination: render_combination(&h.vector, names),
    }
}

fn cut_report(c: &Circuit, h: &HomogeneousCut) -> CutReport {
    CutReport { vertices: h.vertices.iter().map(|&v| c.vertices()[v].clone()).collect() }
}

fn hamiltonian_report(h: &HamiltonianExpr) -> HamiltonianReport {
    HamiltonianReport {
        text: h.render(),
        quadratic_q: MatrixReport::new(h.quadratic_q()),
        quadratic_phi: MatrixReport::new(h.quadratic_phi()),
        cosines: h
            .cosines()
            .iter()
            .map(|t| CosineReport {
                coefficient: format_rational(&t.coefficient),
                space: t.space.to_string(),
                argument: t.argument.iter().map(format_rational).collect(),
            })
            .collect(),
        constant: format_rational(h.constant()),
    }
}

impl AnalysisReport {
    pub fn new(a: &Analysis) -> Self {
        let c = &a.embedded.circuit;
        let ls = &a.embedded.loops;
        let nc = &a.classification;
        let rs = &a.reduced;
        let charge_names = a.lagrangian.charge_vars();
        let flux_names = a.lagrangian.flux_vars();
        let reduced_names =
            |space: VariableSpace| (0..rs.pair_count()).map(|i| space.reduced_name(i)).collect::<Vec<_>>();
        let classification = ClassificationReport {
            capacitive_loops: nc.capacitive_loops.iter().map(|h| loop_report(c, charge_names, h)).collect(),
            inductive_loops: nc.inductive_loops.iter().map(|h| loop_report(c, charge_names, h)).collect(),
            capacitive_cuts: nc.capacitive_cuts.iter().map(|h| cut_report(c, h)).collect(),
            inductive_cuts: nc.inductive_cuts.iter().map(|h| cut_report(c, h)).collect(),
            gauge_left: render_combination(&nc.gauge_left, charge_names),
            gauge_right: render_combination(&nc.gauge_right, flux_names),
        };
        let eliminations = rs
            .eliminations()
            .iter()
            .map(|e| EliminationReport {
                variable: e.variable.clone(),
                reason: e.reason.name().into(),
                expression: render_combination(&e.expression, &reduced_names(e.space)),
            })
            .collect();
        let canonical_pairs = (0..rs.pair_count())
            .map(|i| PairReport {
                charge: format!("Q{} = {}", i + 1, render_combination(rs.charge_defs().row(i), charge_names)),
                flux: format!("Phi{} = {}", i + 1, render_combination(rs.flux_defs().row(i), flux_names)),
            })
            .collect();
        let topological_loops = planarizability_report(&a.embedded, nc)
            .loops
            .into_iter()
            .map(|s| TopologicalLoopReport {
                id: s.id,
                homogeneous: s.homogeneous.map(|c| class_name(c).to_string()),
                non_dynamical: s.non_dynamical,
            })
            .collect();
        Self {
            vertices: c.vertex_count(),
            edges: c.edge_count(),
            genus: ls.genus(),
            faces: ls.face_count(),
            loops: ls.len(),
            pairs: rs.pair_count(),
            incidence: MatrixReport::new(&a.incidence),
            orientation: MatrixReport::new(&a.orientation),
            connection: MatrixReport::new(a.connection()),
            classification,
            eliminations,
            canonical_pairs,
            hamiltonian: hamiltonian_report(rs.hamiltonian()),
            commutation_relations: rs.commutation_relations().iter().map(|s| s.to_string()).collect(),
            kinetic_identity: rs.kinetic_identity_holds(),
            self_dual: is_self_dual(rs.hamiltonian()),
            topological_loops,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!(
            "circuit: {} vertices, {} edges, genus {}, {} faces, {} loops",
            self.vertices, self.edges, self.genus, self.faces, self.loops
        ));
        line(format!("canonical pairs: N = {}", self.pairs));
        for (name, m) in [("A", &self.incidence), ("B", &self.orientation), ("M", &self.connection)] {
            line(String::new());
            line(format!("{name} ="));
            for l in matrix_lines(m) {
                line(l);
            }
        }
        line(String::new());
        line("null directions:".into());
        line(format!("  gauge (loops): {}", self.classification.gauge_left));
        line(format!("  gauge (vertices): {}", self.classification.gauge_right));
        for (kind, loops) in [
            ("capacitive loop", &self.classification.capacitive_loops),
            ("inductive loop", &self.classification.inductive_loops),
        ] {
            for l in loops {
                line(format!("  {kind} {} ({}): {}", l.label, l.provenance, l.cycle.join(" ")));
            }
        }
        for (kind, cuts) in [
            ("capacitive cut", &self.classification.capacitive_cuts),
            ("inductive cut", &self.classification.inductive_cuts),
        ] {
            for c in cuts {
                line(format!("  {kind} {{{}}}", c.vertices.join(", ")));
            }
        }
        if !self.topological_loops.is_empty() {
            line(String::new());
            line("topological loops:".into());
            for t in &self.topological_loops {
                line(format!(
                    "  {}: {}, {}",
                    t.id,
                    t.homogeneous.as_deref().map_or("mixed".to_string(), |c| format!("all {c}")),
                    if t.non_dynamical { "non-dynamical" } else { "dynamical" }
                ));
            }
        }
        line(String::new());
        line("eliminations:".into());
        for e in &self.eliminations {
            line(format!("  {} = {}    [{}]", e.variable, e.expression, e.reason));
        }
        line(String::new());
        line("canonical variables:".into());
        for p in &self.canonical_pairs {
            line(format!("  {}", p.charge));
            line(format!("  {}", p.flux));
        }
        line(String::new());
        line(self.hamiltonian.text.clone());
        line(self.commutation_relations.join("; "));
        line(format!("kinetic identity: {}", if self.kinetic_identity { "exact" } else { "VIOLATED" }));
        line(format!("self-dual: {}", self.self_dual));
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn matrix_lines(m: &MatrixReport) -> Vec<String> {
    let width = m.entries.iter().flatten().chain(&m.cols).map(|s| s.len()).max().unwrap_or(1);
    let label_width = m.rows.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut out = vec![format!(
        "  {:label_width$}  {}",
        "",
        m.cols.iter().map(|c| format!("{c:>width$}")).collect::<Vec<_>>().join(" ")
    )];
    for (label, row) in m.rows.iter().zip(&m.entries) {
        out.push(format!(
            "  {label:label_width$}  {}",
            row.iter().map(|x| format!("{x:>width$}")).collect::<Vec<_>>().join(" ")
        ));
    }
    out
}

pub fn serialize_report(r: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => r.to_json(),
        ReportFormat::Text => r.to_text(),
    }
}

/// Exact value of a reported rational.
pub fn parse_reported(text: &str) -> Option<Rational> {
    crate::linalg::parse_rational(text).ok()
}

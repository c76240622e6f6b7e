//! Netlist documents and analysis reports.

mod netlist;
mod report;

pub use netlist::{
    normalize, parse_netlist, serialize_netlist, ChoiceSpec, EdgeEndRef, NamedWalk, NetlistDocument, NetlistEdge,
    NetlistError, VertexRotation, FORMAT_VERSION,
};
pub use report::{
    parse_reported, serialize_report, AnalysisReport, ClassificationReport, CosineReport, CutReport, EliminationReport,
    HamiltonianReport, LoopReport, MatrixReport, PairReport, ReportFormat, TopologicalLoopReport,
};

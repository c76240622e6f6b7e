//! The analysis pipeline: matrices, Lagrangian, null classification,
//! reduction and counting for one embedded circuit.

use crate::graph::{incidence_matrix, orientation_matrix, trace_faces, Circuit, LoopSet, RotationSystem};
use crate::linalg::RationalMatrix;
use crate::reduction::{
    build_lagrangian, dof_count, resolve_constraints_with, NullClassification, ReducedSystem, ReductionError,
    ReductionOptions, SymmetricLagrangian,
};

/// A circuit together with its embedding and loop set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedCircuit {
    pub circuit: Circuit,
    pub rotation: RotationSystem,
    pub loops: LoopSet,
}

impl EmbeddedCircuit {
    /// Traces faces and picks default topological loops.
    pub fn new(circuit: Circuit, rotation: RotationSystem) -> Self {
        let loops = trace_faces(&circuit, &rotation).with_default_topological_loops(&circuit);
        Self { circuit, rotation, loops }
    }

    pub fn incidence(&self) -> RationalMatrix {
        incidence_matrix(&self.circuit)
    }

    pub fn orientation(&self) -> RationalMatrix {
        orientation_matrix(&self.circuit, &self.loops)
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub embedded: EmbeddedCircuit,
    pub incidence: RationalMatrix,
    pub orientation: RationalMatrix,
    pub lagrangian: SymmetricLagrangian,
    pub classification: NullClassification,
    pub reduced: ReducedSystem,
    pub dof: usize,
}

impl Analysis {
    pub fn connection(&self) -> &RationalMatrix {
        self.lagrangian.connection()
    }
}

pub fn analyze(embedded: EmbeddedCircuit, options: &ReductionOptions) -> Result<Analysis, ReductionError> {
    let incidence = embedded.incidence();
    let orientation = embedded.orientation();
    let lagrangian = build_lagrangian(&embedded.circuit, &embedded.loops, &incidence, &orientation)?;
    let classification = NullClassification::new(&embedded.circuit, &embedded.loops);
    classification.verify(lagrangian.connection()).map_err(ReductionError::Classification)?;
    let dof = dof_count(&embedded.circuit, &embedded.loops, &classification, lagrangian.connection())?;
    let reduced = resolve_constraints_with(&lagrangian, &classification, options)?;
    Ok(Analysis { embedded, incidence, orientation, lagrangian, classification, reduced, dof })
}

//! From an embedded circuit to canonical pairs: the connection matrix, the
//! symmetric Lagrangian, classification of its null directions, elimination
//! of non-dynamical variables, and the reduced Hamiltonian.

mod classify;
mod hamiltonian;
mod lagrangian;
mod resolve;

pub use classify::{
    homogeneous_cuts, homogeneous_loops, HomogeneousCut, HomogeneousLoop, NullClassification, Provenance,
};
pub use hamiltonian::{CosineTerm, HamiltonianExpr};
pub use lagrangian::{build_lagrangian, connection_matrix, EnergyForm, EnergyTerm, SymmetricLagrangian};
pub use resolve::{
    dof_count, resolve_constraints, resolve_constraints_with, Elimination, EliminationReason, PivotOrder,
    ReducedSystem, ReductionOptions, VariableChoice,
};

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{format_rational, LinalgError, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("one-sided connection matrices disagree at ({row}, {col}); orientation and incidence are inconsistent")]
    InconsistentConnection { row: String, col: String },
    #[error("unsupported constraint: {element} edge `{edge}` lies in a homogeneous {structure}, which would give a nonlinear constraint")]
    UnsupportedConstraint { edge: String, element: String, structure: &'static str },
    #[error("inconsistent constraint system: {0}")]
    InconsistentConstraints(String),
    #[error(
        "reduced kinetic matrix is {rows}x{cols} with rank {rank}; expected an invertible {expected}x{expected} matrix"
    )]
    DegenerateKinetic { rows: usize, cols: usize, rank: usize, expected: usize },
    #[error("invalid variable choice: {0}")]
    InvalidVariableChoice(String),
    #[error("null-space classification failed: {0}")]
    Classification(String),
    #[error("counting identity violated: {0}")]
    Counting(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which phase-space half a combination lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariableSpace {
    Charge,
    Flux,
}

impl VariableSpace {
    pub fn other(self) -> Self {
        match self {
            Self::Charge => Self::Flux,
            Self::Flux => Self::Charge,
        }
    }

    /// Name of the i-th reduced variable, 0-based.
    pub fn reduced_name(self, i: usize) -> String {
        match self {
            Self::Charge => format!("Q{}", i + 1),
            Self::Flux => format!("Phi{}", i + 1),
        }
    }
}

impl fmt::Display for VariableSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Charge => "charge",
            Self::Flux => "flux",
        })
    }
}

/// Renders `Σ c_i name_i` as `2/3 Q1 - Q2 + 1/3 Q3`; `0` when empty.
pub fn render_combination(coeffs: &[Rational], names: &[String]) -> String {
    let mut out = String::new();
    for (c, name) in coeffs.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let magnitude = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if !magnitude.is_one() {
            out.push_str(&format_rational(&magnitude));
            out.push(' ');
        }
        out.push_str(name);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

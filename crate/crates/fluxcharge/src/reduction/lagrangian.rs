use num_traits::{One, Zero};

use super::{render_combination, ReductionError, VariableSpace};
use crate::graph::{BranchClass, Circuit, LoopSet};
use crate::linalg::{format_rational, Rational, RationalMatrix};

/// `M = ½ Σ_C B A − ½ Σ_I B A`, after checking that the two one-sided forms
/// `Σ_C B A` and `−Σ_I B A` agree.
pub fn connection_matrix(
    a: &RationalMatrix,
    b: &RationalMatrix,
    classes: &[BranchClass],
) -> Result<RationalMatrix, ReductionError> {
    if b.cols() != a.rows() || classes.len() != a.rows() {
        return Err(crate::linalg::LinalgError::DimensionMismatch(format!(
            "B is {}x{}, A is {}x{}, {} edge classes",
            b.rows(),
            b.cols(),
            a.rows(),
            a.cols(),
            classes.len()
        ))
        .into());
    }
    let one_sided = |class: BranchClass| {
        let mut m = RationalMatrix::zeros(b.row_labels().to_vec(), a.col_labels().to_vec()).expect("labels are unique");
        for (e, _) in classes.iter().enumerate().filter(|(_, &c)| c == class) {
            for l in 0..b.rows() {
                let ble = b.get(l, e);
                if ble.is_zero() {
                    continue;
                }
                for v in 0..a.cols() {
                    let aev = a.get(e, v);
                    if !aev.is_zero() {
                        let x = m.get(l, v) + ble * aev;
                        m.set(l, v, x);
                    }
                }
            }
        }
        m
    };
    let cap = one_sided(BranchClass::Capacitive);
    let ind = one_sided(BranchClass::Inductive);
    let half = Rational::new(1.into(), 2.into());
    let mut m = cap.clone();
    for l in 0..m.rows() {
        for v in 0..m.cols() {
            if *cap.get(l, v) != -ind.get(l, v).clone() {
                return Err(ReductionError::InconsistentConnection {
                    row: m.row_labels()[l].clone(),
                    col: m.col_labels()[v].clone(),
                });
            }
            m.set(l, v, &half * (cap.get(l, v) - ind.get(l, v)));
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyForm {
    /// `coefficient · x²`
    Quadratic,
    /// `−coefficient · cos(x)`
    Cosine,
}

/// Energy stored in one branch as a function of its charge (capacitive
/// class) or flux (inductive class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyTerm {
    pub edge: usize,
    pub form: EnergyForm,
    pub coefficient: Rational,
    pub space: VariableSpace,
    /// Over loop charges or node fluxes, according to `space`.
    pub argument: Vec<Rational>,
}

impl EnergyTerm {
    pub fn energy(&self, x: f64) -> f64 {
        let k = crate::linalg::to_f64(&self.coefficient);
        match self.form {
            EnergyForm::Quadratic => k * x * x,
            EnergyForm::Cosine => -k * x.cos(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let k = crate::linalg::to_f64(&self.coefficient);
        match self.form {
            EnergyForm::Quadratic => 2.0 * k * x,
            EnergyForm::Cosine => k * x.sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricLagrangian {
    connection: RationalMatrix,
    charge_vars: Vec<String>,
    flux_vars: Vec<String>,
    energy_terms: Vec<EnergyTerm>,
    edge_ids: Vec<String>,
    /// Per capacitive edge: (B column, A row), whose products sum to M.
    kinetic_factors: Vec<(usize, Vec<Rational>, Vec<Rational>)>,
}

pub fn build_lagrangian(
    c: &Circuit,
    ls: &LoopSet,
    a: &RationalMatrix,
    b: &RationalMatrix,
) -> Result<SymmetricLagrangian, ReductionError> {
    let connection = connection_matrix(a, b, &c.classes())?;
    let mut energy_terms = Vec::with_capacity(c.edge_count());
    let mut kinetic_factors = Vec::new();
    let two = Rational::from_integer(2.into());
    for (e, edge) in c.edges().iter().enumerate() {
        let p = &edge.element.parameter;
        let (form, coefficient) = if edge.element.kind.is_linear() {
            (EnergyForm::Quadratic, Rational::one() / (&two * p))
        } else {
            (EnergyForm::Cosine, p.clone())
        };
        let (space, argument) = match edge.class() {
            BranchClass::Capacitive => (VariableSpace::Charge, b.column(e)),
            BranchClass::Inductive => (VariableSpace::Flux, a.row(e).to_vec()),
        };
        if edge.class() == BranchClass::Capacitive {
            kinetic_factors.push((e, b.column(e), a.row(e).to_vec()));
        }
        energy_terms.push(EnergyTerm { edge: e, form, coefficient, space, argument });
    }
    Ok(SymmetricLagrangian {
        connection,
        charge_vars: ls.labels().iter().map(|l| format!("q_{l}")).collect(),
        flux_vars: c.vertices().iter().map(|v| format!("phi_{v}")).collect(),
        energy_terms,
        edge_ids: c.edges().iter().map(|e| e.id.clone()).collect(),
        kinetic_factors,
    })
}

impl SymmetricLagrangian {
    pub fn connection(&self) -> &RationalMatrix {
        &self.connection
    }

    pub fn charge_vars(&self) -> &[String] {
        &self.charge_vars
    }

    pub fn flux_vars(&self) -> &[String] {
        &self.flux_vars
    }

    pub fn loop_count(&self) -> usize {
        self.charge_vars.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.flux_vars.len()
    }

    pub fn energy_terms(&self) -> &[EnergyTerm] {
        &self.energy_terms
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edge_ids[e]
    }

    /// The kinetic term split over capacitive branches:
    /// `q^T M φ̇ = Σ_e (b_e · q)(a_e · φ̇)`.
    pub fn kinetic_factors(&self) -> &[(usize, Vec<Rational>, Vec<Rational>)] {
        &self.kinetic_factors
    }

    pub fn vars(&self, space: VariableSpace) -> &[String] {
        match space {
            VariableSpace::Charge => &self.charge_vars,
            VariableSpace::Flux => &self.flux_vars,
        }
    }

    /// Human-readable form, one term per line.
    pub fn render(&self) -> Vec<String> {
        let dots: Vec<String> = self.flux_vars.iter().map(|v| format!("d{v}")).collect();
        let mut lines = Vec::new();
        for (_, q, phi) in &self.kinetic_factors {
            lines.push(format!(
                "+ ({}) ({})",
                render_combination(q, &self.charge_vars),
                render_combination(phi, &dots)
            ));
        }
        for t in &self.energy_terms {
            let arg = render_combination(&t.argument, self.vars(t.space));
            let k = format_rational(&t.coefficient);
            lines.push(match t.form {
                EnergyForm::Quadratic => format!("- {k} ({arg})^2    [{}]", self.edge_ids[t.edge]),
                EnergyForm::Cosine => format!("+ {k} cos({arg})    [{}]", self.edge_ids[t.edge]),
            });
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    #[test]
    fn one_sided_forms_must_agree() {
        // A single edge between two vertices traversed by one loop only: B A
        // is nonzero for either class assignment, so the forms cannot agree.
        let a = RationalMatrix::from_ints(&[vec![-1, 1]]);
        let b = RationalMatrix::from_ints(&[vec![1]]);
        let err = connection_matrix(&a, &b, &[BranchClass::Capacitive]).unwrap_err();
        assert!(matches!(err, ReductionError::InconsistentConnection { .. }));

        // Two parallel edges forming a loop, one of each class.
        let a = RationalMatrix::from_ints(&[vec![-1, 1], vec![1, -1]]);
        let b = RationalMatrix::from_ints(&[vec![1, 1], vec![-1, -1]]);
        let m = connection_matrix(&a, &b, &[BranchClass::Capacitive, BranchClass::Inductive]).unwrap();
        assert_eq!(m.row(0), &[int(-1), int(1)]);
        assert_eq!(m.row(1), &[int(1), int(-1)]);
    }
}

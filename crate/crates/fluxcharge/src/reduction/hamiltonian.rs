use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{render_combination, VariableSpace};
use crate::linalg::{format_rational, Rational, RationalMatrix};

/// `−coefficient · cos(argument · X)` with `X` the Q or Φ vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosineTerm {
    pub coefficient: Rational,
    pub space: VariableSpace,
    pub argument: Vec<Rational>,
}

/// `H = ½ Q^T K_Q Q + ½ Φ^T K_Φ Φ − Σ E cos(w · X) + constant`.
///
/// Kept in a canonical form so that structural equality is mathematical
/// equality: cosine arguments have a positive leading coefficient, terms with
/// equal arguments are merged, and the list is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamiltonianExpr {
    quadratic_q: RationalMatrix,
    quadratic_phi: RationalMatrix,
    cosines: Vec<CosineTerm>,
    constant: Rational,
}

impl HamiltonianExpr {
    pub fn new(
        quadratic_q: RationalMatrix,
        quadratic_phi: RationalMatrix,
        cosines: Vec<CosineTerm>,
        constant: Rational,
    ) -> Self {
        let n = quadratic_q.rows();
        assert!(
            quadratic_q.cols() == n && quadratic_phi.rows() == n && quadratic_phi.cols() == n,
            "quadratic forms must both be {n}x{n}"
        );
        let names = |space: VariableSpace| (0..n).map(|i| space.reduced_name(i)).collect::<Vec<_>>();
        let quadratic_q = quadratic_q
            .with_labels(names(VariableSpace::Charge), names(VariableSpace::Charge))
            .expect("generated names are unique");
        let quadratic_phi = quadratic_phi
            .with_labels(names(VariableSpace::Flux), names(VariableSpace::Flux))
            .expect("generated names are unique");

        let mut constant = constant;
        let mut merged: Vec<CosineTerm> = Vec::new();
        for mut t in cosines {
            assert_eq!(t.argument.len(), n, "cosine argument length");
            match t.argument.iter().find(|x| !x.is_zero()) {
                // cos(0) = 1: a constant shift.
                None => {
                    constant -= &t.coefficient;
                    continue;
                }
                Some(lead) if lead.is_negative() => {
                    for x in &mut t.argument {
                        *x = -x.clone();
                    }
                }
                Some(_) => {}
            }
            match merged.iter_mut().find(|m| m.space == t.space && m.argument == t.argument) {
                Some(m) => m.coefficient += t.coefficient,
                None => merged.push(t),
            }
        }
        merged.retain(|t| !t.coefficient.is_zero());
        merged.sort_by(|a, b| (a.space, &a.argument).cmp(&(b.space, &b.argument)));
        Self { quadratic_q, quadratic_phi, cosines: merged, constant }
    }

    pub fn pair_count(&self) -> usize {
        self.quadratic_q.rows()
    }

    pub fn quadratic_q(&self) -> &RationalMatrix {
        &self.quadratic_q
    }

    pub fn quadratic_phi(&self) -> &RationalMatrix {
        &self.quadratic_phi
    }

    pub fn quadratic(&self, space: VariableSpace) -> &RationalMatrix {
        match space {
            VariableSpace::Charge => &self.quadratic_q,
            VariableSpace::Flux => &self.quadratic_phi,
        }
    }

    pub fn cosines(&self) -> &[CosineTerm] {
        &self.cosines
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    /// Coefficient of `X_i X_j` (or `X_i²`) in the expanded polynomial.
    pub fn monomial(&self, space: VariableSpace, i: usize, j: usize) -> Rational {
        let k = self.quadratic(space);
        let half = Rational::new(1.into(), 2.into());
        if i == j {
            k.get(i, i) * half
        } else {
            (k.get(i, j) + k.get(j, i)) * half
        }
    }

    /// Renders `H = ...` with monomials in `Q` first, then `Φ`, then cosines.
    pub fn render(&self) -> String {
        let n = self.pair_count();
        let mut terms: Vec<(Rational, String)> = Vec::new();
        for space in [VariableSpace::Charge, VariableSpace::Flux] {
            for i in 0..n {
                for j in i..n {
                    let c = self.monomial(space, i, j);
                    let (a, b) = (space.reduced_name(i), space.reduced_name(j));
                    let mono = if i == j { format!("{a}^2") } else { format!("{a} {b}") };
                    terms.push((c, mono));
                }
            }
        }
        for t in &self.cosines {
            let names: Vec<String> = (0..n).map(|i| t.space.reduced_name(i)).collect();
            terms.push((-t.coefficient.clone(), format!("cos({})", render_combination(&t.argument, &names))));
        }
        if !self.constant.is_zero() {
            terms.push((self.constant.clone(), String::new()));
        }
        let mut out = String::from("H =");
        let mut first = true;
        for (c, mono) in terms.into_iter().filter(|(c, _)| !c.is_zero()) {
            let sign = match (first, c.is_negative()) {
                (true, true) => " -",
                (true, false) => "",
                (false, true) => " -",
                (false, false) => " +",
            };
            let mag = format_rational(&c.abs());
            if mono.is_empty() {
                out.push_str(&format!("{sign} {mag}"));
            } else if c.abs().is_one() {
                out.push_str(&format!("{sign} {mono}"));
            } else {
                out.push_str(&format!("{sign} {mag} {mono}"));
            }
            first = false;
        }
        if first {
            out.push_str(" 0");
        }
        out
    }
}

impl fmt::Display for HamiltonianExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

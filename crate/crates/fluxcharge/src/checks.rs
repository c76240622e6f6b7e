//! Invariant checks on one embedded circuit, shared by the `check` command
//! and the test suites.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{analyze, Analysis, EmbeddedCircuit};
use crate::duality::{double_dual_matches, dual_circuit, dual_connection_check, hamiltonian_dual};
use crate::dynamics::{check_kirchhoff, energy_drift, integrate, normal_modes, NumericHamiltonian, State};
use crate::graph::LoopKind;
use crate::linalg::{Rational, RationalMatrix};
use crate::reduction::{ReductionError, ReductionOptions, VariableSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome { name, passed, detail: detail.into() }
}

fn all_zero(m: &RationalMatrix) -> bool {
    m.is_zero()
}

/// Structural identities of `A` and `B`: `B A = 0`, vanishing row sums of
/// `A` and face-column sums of `B`, Euler's formula, both ranks, and
/// `ker B = im A`.
pub fn matrix_checks(ec: &EmbeddedCircuit) -> Vec<CheckOutcome> {
    let c = &ec.circuit;
    let a = ec.incidence();
    let b = ec.orientation();
    let (v, e, f, g) = (c.vertex_count(), c.edge_count(), ec.loops.face_count(), ec.loops.genus());
    let l = ec.loops.len();
    let mut out = Vec::new();
    out.push(outcome("B A = 0", b.mul(&a).map(|m| all_zero(&m)).unwrap_or(false), ""));
    let ones = vec![Rational::from_integer(1.into()); v];
    let row_sums = a.mul_vec(&ones).map(|x| x.iter().all(Zero::is_zero)).unwrap_or(false);
    out.push(outcome("rows of A sum to zero", row_sums, ""));
    let face_ind: Vec<Rational> =
        ec.loops.loops().map(|lp| Rational::from_integer(i64::from(lp.kind == LoopKind::Face).into())).collect();
    let face_sums = b.vec_mul(&face_ind).map(|x| x.iter().all(Zero::is_zero)).unwrap_or(false);
    out.push(outcome("face rows of B sum to zero", face_sums, ""));
    let euler = v as i64 - e as i64 + f as i64 == 2 - 2 * g as i64 && ec.loops.topological().len() == 2 * g;
    out.push(outcome("Euler identity", euler, format!("V={v} E={e} F={f} g={g}")));
    let (ra, rb) = (a.rank(), b.rank());
    out.push(outcome("rank A = |V| - 1", ra + 1 == v, format!("rank A = {ra}")));
    out.push(outcome("rank B = |L| - 1", rb + 1 == l, format!("rank B = {rb}")));
    let kernel = b.right_nullspace();
    let inside = kernel.iter().all(|x| {
        let col = RationalMatrix::from_columns(x.len(), std::slice::from_ref(x));
        a.hstack(&col).map(|m| m.rank() == ra).unwrap_or(false)
    });
    out.push(outcome("ker B = im A", kernel.len() == ra && inside, format!("dim ker B = {}", kernel.len())));
    out
}

/// Classification, counting and reduction identities of an analysis.
pub fn reduction_checks(an: &Analysis) -> Vec<CheckOutcome> {
    let ec = &an.embedded;
    let nc = &an.classification;
    let m = an.connection();
    let mut out = Vec::new();
    out.push(outcome("null spaces match classification", nc.verify(m).is_ok(), nc.verify(m).err().unwrap_or_default()));
    if ec.loops.genus() == 0 {
        let lhs = ec.loops.face_count() as i64 - (nc.inductive_loops.len() + nc.capacitive_loops.len()) as i64;
        let rhs = ec.circuit.vertex_count() as i64 - (nc.inductive_cuts.len() + nc.capacitive_cuts.len()) as i64;
        out.push(outcome("|F| - |Δ| = |V| - |Γ|", lhs == rhs, format!("{lhs} vs {rhs}")));
    }
    let rank = m.rank();
    out.push(outcome(
        "N = rank M",
        an.reduced.pair_count() == rank && an.dof == rank,
        format!("N = {}", an.reduced.pair_count()),
    ));
    out.push(outcome("kinetic identity", an.reduced.kinetic_identity_holds(), ""));
    out
}

/// Planar duality: `M* = −M^T`, double dual equal to the original, and the
/// Hamiltonian transformation an involution.
pub fn duality_checks(an: &Analysis) -> Vec<CheckOutcome> {
    let ec = &an.embedded;
    let mut out = Vec::new();
    let h = an.reduced.hamiltonian();
    out.push(outcome("Hamiltonian duality is an involution", hamiltonian_dual(&hamiltonian_dual(h)) == *h, ""));
    let (dual, dm) = match dual_circuit(ec) {
        Ok(x) => x,
        Err(e) => {
            out.push(outcome("dual construction", false, e.to_string()));
            return out;
        }
    };
    match analyze(dual.clone(), &ReductionOptions::default()) {
        Ok(dan) => out.push(outcome("M* = -M^T", dual_connection_check(an.connection(), dan.connection(), &dm), "")),
        Err(e) => out.push(outcome("M* = -M^T", false, e.to_string())),
    }
    match dual_circuit(&dual) {
        Ok((dd, dm2)) => out.push(outcome("dual of dual", double_dual_matches(ec, &dd, &dm, &dm2), "")),
        Err(e) => out.push(outcome("dual of dual", false, e.to_string())),
    }
    out
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> State {
    State::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Largest relative gap between the closed-form gradient and a central
/// difference of the energy, over a few random states.
pub fn gradient_gap(an: &Analysis, seed: u64) -> f64 {
    let nh = NumericHamiltonian::new(an.reduced.hamiltonian());
    let n = nh.pair_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let s = random_state(&mut rng, n);
        for space in [VariableSpace::Charge, VariableSpace::Flux] {
            let g = nh.gradient(space, &s.q, &s.phi);
            let scale = g.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (i, gi) in g.iter().enumerate() {
                let h = 1e-3;
                let at = |offset: f64| {
                    let mut t = s.clone();
                    match space {
                        VariableSpace::Charge => t.q[i] += offset,
                        VariableSpace::Flux => t.phi[i] += offset,
                    }
                    nh.energy(&t.q, &t.phi)
                };
                // Fourth-order central difference.
                let fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
                worst = worst.max((fd - gi).abs() / scale);
            }
        }
    }
    worst
}

/// A short run from a random state, with a step resolving the fastest mode.
pub fn dynamics_checks(an: &Analysis, seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let gap = gradient_gap(an, seed);
    out.push(outcome("gradient matches finite differences", gap <= 1e-8, format!("{gap:.3e}")));
    let h = an.reduced.hamiltonian();
    let n = h.pair_count();
    if n == 0 {
        return out;
    }
    let fastest = normal_modes(h).last().copied().unwrap_or(1.0).max(1.0);
    let step = (1e-3f64).min(0.01 / fastest);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let s0 = random_state(&mut rng, n);
    match integrate(h, &s0, step, 500.0 * step) {
        Ok(t) => {
            let drift = energy_drift(&t);
            out.push(outcome("energy drift", drift <= 1e-8, format!("{drift:.3e}")));
            let k = check_kirchhoff(&an.embedded.circuit, &an.reduced, &t);
            out.push(outcome("Kirchhoff residuals", k.max() <= 1e-6, format!("{:.3e}", k.max())));
        }
        Err(e) => out.push(outcome("integration", false, e.to_string())),
    }
    out
}

/// Planar with every edge on two distinct faces, so that the dual has no
/// self-loops and `dual_circuit` applies.
pub fn has_dual(ec: &EmbeddedCircuit) -> bool {
    let b = ec.orientation();
    ec.loops.genus() == 0 && (0..b.cols()).all(|e| (0..b.rows()).filter(|&l| !b.get(l, e).is_zero()).count() == 2)
}

/// Every check that applies to the circuit. Reduction failures are returned
/// as errors so callers can tell unsupported structure from broken identities.
pub fn run_all(
    ec: &EmbeddedCircuit,
    options: &ReductionOptions,
    seed: u64,
) -> Result<Vec<CheckOutcome>, ReductionError> {
    let mut out = matrix_checks(ec);
    let an = analyze(ec.clone(), options)?;
    out.extend(reduction_checks(&an));
    if has_dual(ec) {
        out.extend(duality_checks(&an));
    }
    out.extend(dynamics_checks(&an, seed));
    Ok(out)
}

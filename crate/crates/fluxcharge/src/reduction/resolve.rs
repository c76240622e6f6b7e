//! Elimination of non-dynamical variables.
//!
//! Each side (loop charges, node fluxes) is handled by a [`Slice`]: a linear
//! parameterisation `x = P y` of the admissible subspace by the variables that
//! are still free. Three moves shrink it:
//!
//! * gauge fixing sets one reference variable to zero;
//! * a homogeneous loop of capacitors (cut of inductors) gives the linear
//!   stationarity condition `ψ^T K x = 0`, solved for one free variable;
//! * a homogeneous loop of inductors (cut of capacitors) is a direction the
//!   Lagrangian does not see at all; one free variable along it is set to zero.
//!
//! What survives on both sides pairs up through the reduced kinetic matrix
//! `M' = P_q^T M P_φ`.

use num_traits::{One, Zero};

use super::{
    CosineTerm, EnergyForm, HamiltonianExpr, NullClassification, ReductionError, SymmetricLagrangian, VariableSpace,
};
use crate::linalg::{dot, Rational, RationalMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotOrder {
    /// Eliminate the highest-indexed eligible variable; gauge references are
    /// the last face and the last vertex.
    #[default]
    Highest,
    /// Mirror image: lowest index, first face, first vertex.
    Lowest,
}

/// User-chosen canonical variables: `Q = D q` and `Φ = S φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableChoice {
    pub charges: RationalMatrix,
    pub fluxes: RationalMatrix,
}

#[derive(Debug, Clone, Default)]
pub struct ReductionOptions {
    pub variable_choice: Option<VariableChoice>,
    pub pivot: PivotOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EliminationReason {
    Gauge,
    Constraint,
    Absent,
}

impl EliminationReason {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gauge => "gauge",
            Self::Constraint => "constraint",
            Self::Absent => "absent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub space: VariableSpace,
    /// Index into the loop set or vertex list.
    pub index: usize,
    pub variable: String,
    pub reason: EliminationReason,
    /// The variable on the reduced surface, in terms of the canonical
    /// variables of its own space (all zero for gauge and absent variables).
    pub expression: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSystem {
    pair_count: usize,
    charge_defs: RationalMatrix,
    flux_defs: RationalMatrix,
    charge_map: RationalMatrix,
    flux_map: RationalMatrix,
    eliminations: Vec<Elimination>,
    hamiltonian: HamiltonianExpr,
    lagrangian: SymmetricLagrangian,
    absent_flux_directions: Vec<Vec<Rational>>,
}

/// Parameterisation of one side's admissible subspace.
struct Slice {
    /// `n x n`; column j is nonzero only while variable j is free.
    p: Vec<Vec<Rational>>,
    free: Vec<bool>,
    /// Reduced absent directions with their pivots, in the order applied.
    dropped: Vec<(usize, Vec<Rational>)>,
    records: Vec<(usize, EliminationReason)>,
    order: PivotOrder,
}

impl Slice {
    fn new(n: usize, order: PivotOrder) -> Self {
        let p =
            (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
        Self { p, free: vec![true; n], dropped: Vec::new(), records: Vec::new(), order }
    }

    fn n(&self) -> usize {
        self.free.len()
    }

    fn pick(&self, eligible: impl Fn(usize) -> bool) -> Option<usize> {
        let mut it = (0..self.n()).filter(|&i| self.free[i] && eligible(i));
        match self.order {
            PivotOrder::Highest => it.last(),
            PivotOrder::Lowest => it.next(),
        }
    }

    fn zero_column(&mut self, b: usize) {
        for row in &mut self.p {
            row[b] = Rational::zero();
        }
        self.free[b] = false;
    }

    /// Sets one free variable along `direction` to zero. With `pivot` given,
    /// that variable is used (gauge fixing).
    fn drop_direction(
        &mut self,
        direction: &[Rational],
        pivot: Option<usize>,
        reason: EliminationReason,
    ) -> Result<(), ReductionError> {
        let mut v = direction.to_vec();
        for (q, w) in &self.dropped {
            if !v[*q].is_zero() {
                let f = &v[*q] / &w[*q];
                for (x, y) in v.iter_mut().zip(w) {
                    *x -= &f * y;
                }
            }
        }
        let b = match pivot {
            Some(b) if self.free[b] && !v[b].is_zero() => Some(b),
            Some(_) => None,
            None => self.pick(|i| !v[i].is_zero()),
        }
        .ok_or_else(|| {
            ReductionError::InconsistentConstraints("an absent direction has no free variable left".into())
        })?;
        self.zero_column(b);
        self.dropped.push((b, v));
        self.records.push((b, reason));
        Ok(())
    }

    /// Imposes `c^T x = 0`, solving for a free variable, preferably one in
    /// the support of `preferred`.
    fn impose(&mut self, c: &[Rational], preferred: &[Rational]) -> Result<(), ReductionError> {
        let n = self.n();
        // Coefficients of the constraint in the free parameters.
        let w: Vec<Rational> = (0..n)
            .map(|j| if self.free[j] { (0..n).map(|i| &c[i] * &self.p[i][j]).sum() } else { Rational::zero() })
            .collect();
        let b = self
            .pick(|i| !w[i].is_zero() && !preferred[i].is_zero())
            .or_else(|| self.pick(|i| !w[i].is_zero()))
            .ok_or_else(|| {
                ReductionError::InconsistentConstraints("a constraint is dependent on earlier ones".into())
            })?;
        // y_b = -Σ_{j≠b} (w_j / w_b) y_j
        let ratios: Vec<Rational> = w.iter().map(|x| -(x / &w[b])).collect();
        for row in &mut self.p {
            let pb = row[b].clone();
            if pb.is_zero() {
                continue;
            }
            for j in 0..n {
                if j != b && self.free[j] && !ratios[j].is_zero() {
                    row[j] += &pb * &ratios[j];
                }
            }
            row[b] = Rational::zero();
        }
        self.free[b] = false;
        self.records.push((b, EliminationReason::Constraint));
        Ok(())
    }

    fn free_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.free[i]).collect()
    }

    /// `P` restricted to free columns, `n x k`.
    fn basis(&self, labels: &[String]) -> RationalMatrix {
        let free = self.free_indices();
        let mut m = RationalMatrix::zeros(labels.to_vec(), free.iter().map(|&j| labels[j].clone()).collect())
            .expect("variable names are unique");
        for i in 0..self.n() {
            for (k, &j) in free.iter().enumerate() {
                m.set(i, k, self.p[i][j].clone());
            }
        }
        m
    }
}

/// `Σ 2 k (a·ψ) a` over quadratic terms of one space: the gradient of the
/// energy contracted with the null vector `ψ`. Cosine terms touched by `ψ`
/// would make it nonlinear.
fn stationarity(
    lag: &SymmetricLagrangian,
    space: VariableSpace,
    psi: &[Rational],
    structure: &'static str,
) -> Result<Vec<Rational>, ReductionError> {
    let n = psi.len();
    let mut c = vec![Rational::zero(); n];
    let two = Rational::from_integer(2.into());
    for t in lag.energy_terms().iter().filter(|t| t.space == space) {
        let s = dot(&t.argument, psi);
        if s.is_zero() {
            continue;
        }
        match t.form {
            EnergyForm::Cosine => {
                return Err(ReductionError::UnsupportedConstraint {
                    edge: lag.edge_id(t.edge).to_string(),
                    element: match space {
                        VariableSpace::Charge => "phase-slip".into(),
                        VariableSpace::Flux => "Josephson".into(),
                    },
                    structure,
                })
            }
            EnergyForm::Quadratic => {
                let f = &two * &t.coefficient * s;
                for (x, a) in c.iter_mut().zip(&t.argument) {
                    if !a.is_zero() {
                        *x += &f * a;
                    }
                }
            }
        }
    }
    Ok(c)
}

pub fn resolve_constraints(
    lag: &SymmetricLagrangian,
    nc: &NullClassification,
) -> Result<ReducedSystem, ReductionError> {
    resolve_constraints_with(lag, nc, &ReductionOptions::default())
}

pub fn resolve_constraints_with(
    lag: &SymmetricLagrangian,
    nc: &NullClassification,
    options: &ReductionOptions,
) -> Result<ReducedSystem, ReductionError> {
    let m = lag.connection();
    let (nl, nv) = (lag.loop_count(), lag.vertex_count());
    let order = options.pivot;

    let face_count = nc.gauge_left.iter().filter(|x| !x.is_zero()).count();
    let (gauge_face, gauge_vertex) = match order {
        PivotOrder::Highest => (face_count - 1, nv - 1),
        PivotOrder::Lowest => (0, 0),
    };

    let mut qs = Slice::new(nl, order);
    qs.drop_direction(&nc.gauge_left, Some(gauge_face), EliminationReason::Gauge)?;
    for h in &nc.capacitive_loops {
        let c = stationarity(lag, VariableSpace::Charge, &h.vector, "capacitive loop")?;
        qs.impose(&c, &h.vector)?;
    }
    for h in &nc.inductive_loops {
        qs.drop_direction(&h.vector, None, EliminationReason::Absent)?;
    }

    let mut fs = Slice::new(nv, order);
    fs.drop_direction(&nc.gauge_right, Some(gauge_vertex), EliminationReason::Gauge)?;
    for h in &nc.inductive_cuts {
        let c = stationarity(lag, VariableSpace::Flux, &h.vector, "inductive cut")?;
        fs.impose(&c, &h.vector)?;
    }
    for h in &nc.capacitive_cuts {
        fs.drop_direction(&h.vector, None, EliminationReason::Absent)?;
    }

    let pq = qs.basis(lag.charge_vars());
    let pf = fs.basis(lag.flux_vars());
    let kinetic = pq.transpose().mul(m)?.mul(&pf)?;
    let expected = m.rank();
    let rank = kinetic.rank();
    if kinetic.rows() != expected || kinetic.cols() != expected || rank != expected {
        return Err(ReductionError::DegenerateKinetic { rows: kinetic.rows(), cols: kinetic.cols(), rank, expected });
    }
    let n = expected;
    let q_names: Vec<String> = (0..n).map(|i| VariableSpace::Charge.reduced_name(i)).collect();
    let f_names: Vec<String> = (0..n).map(|i| VariableSpace::Flux.reduced_name(i)).collect();

    // Q = Dq, Φ = Sφ; on the surface q = P_q x, φ = P_φ y, so Q = (D P_q) x and
    // Φ = (S P_φ) y, and the kinetic term x^T M' ẏ equals Q·Φ̇ exactly when
    // (D P_q)^T (S P_φ) = M'.
    let (d, s) = match &options.variable_choice {
        None => {
            let mut d = RationalMatrix::zeros(q_names.clone(), lag.charge_vars().to_vec())?;
            let mut s = RationalMatrix::zeros(f_names.clone(), lag.flux_vars().to_vec())?;
            for (k, &j) in qs.free_indices().iter().enumerate() {
                for i in 0..n {
                    d.set(i, j, kinetic.get(k, i).clone());
                }
            }
            for (k, &j) in fs.free_indices().iter().enumerate() {
                s.set(k, j, Rational::one());
            }
            (d, s)
        }
        Some(vc) => {
            let shape_ok =
                vc.charges.rows() == n && vc.fluxes.rows() == n && vc.charges.cols() == nl && vc.fluxes.cols() == nv;
            if !shape_ok {
                return Err(ReductionError::InvalidVariableChoice(format!(
                    "expected {n} charge combinations over {nl} loops and {n} flux combinations over {nv} vertices, got {}x{} and {}x{}",
                    vc.charges.rows(),
                    vc.charges.cols(),
                    vc.fluxes.rows(),
                    vc.fluxes.cols()
                )));
            }
            let d = vc.charges.clone().with_labels(q_names.clone(), lag.charge_vars().to_vec())?;
            let s = vc.fluxes.clone().with_labels(f_names.clone(), lag.flux_vars().to_vec())?;
            (d, s)
        }
    };
    let dp = d.mul(&pq)?;
    let sp = s.mul(&pf)?;
    if !dp.transpose().mul(&sp)?.same_entries(&kinetic) {
        return Err(ReductionError::InvalidVariableChoice(
            "the chosen variables do not reproduce the kinetic term as sum Q_i dPhi_i/dt".into(),
        ));
    }
    let dp_inv = dp.inverse().map_err(|_| {
        ReductionError::InvalidVariableChoice("charge combinations are dependent on the surface".into())
    })?;
    let sp_inv = sp
        .inverse()
        .map_err(|_| ReductionError::InvalidVariableChoice("flux combinations are dependent on the surface".into()))?;
    let charge_map = pq.mul(&dp_inv)?.with_labels(lag.charge_vars().to_vec(), q_names)?;
    let flux_map = pf.mul(&sp_inv)?.with_labels(lag.flux_vars().to_vec(), f_names)?;

    let mut eliminations = Vec::new();
    for (slice, space, map, names) in [
        (&qs, VariableSpace::Charge, &charge_map, lag.charge_vars()),
        (&fs, VariableSpace::Flux, &flux_map, lag.flux_vars()),
    ] {
        for &(index, reason) in &slice.records {
            let expression = map.row(index).to_vec();
            eliminations.push(Elimination { space, index, variable: names[index].clone(), reason, expression });
        }
    }

    let hamiltonian = reduced_hamiltonian(lag, &charge_map, &flux_map, n)?;
    let absent_flux_directions = nc.capacitive_cuts.iter().map(|h| h.vector.clone()).collect();
    Ok(ReducedSystem {
        pair_count: n,
        charge_defs: d,
        flux_defs: s,
        charge_map,
        flux_map,
        eliminations,
        hamiltonian,
        lagrangian: lag.clone(),
        absent_flux_directions,
    })
}

fn reduced_hamiltonian(
    lag: &SymmetricLagrangian,
    charge_map: &RationalMatrix,
    flux_map: &RationalMatrix,
    n: usize,
) -> Result<HamiltonianExpr, ReductionError> {
    let mut kq = vec![vec![Rational::zero(); n]; n];
    let mut kf = vec![vec![Rational::zero(); n]; n];
    let mut cosines = Vec::new();
    let two = Rational::from_integer(2.into());
    for t in lag.energy_terms() {
        let (map, k) = match t.space {
            VariableSpace::Charge => (charge_map, &mut kq),
            VariableSpace::Flux => (flux_map, &mut kf),
        };
        let w = map.vec_mul(&t.argument)?;
        match t.form {
            EnergyForm::Quadratic => {
                let f = &two * &t.coefficient;
                for i in 0..n {
                    if w[i].is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        if !w[j].is_zero() {
                            k[i][j] += &f * &w[i] * &w[j];
                        }
                    }
                }
            }
            EnergyForm::Cosine => {
                cosines.push(CosineTerm { coefficient: t.coefficient.clone(), space: t.space, argument: w });
            }
        }
    }
    let names = |space: VariableSpace| (0..n).map(|i| space.reduced_name(i)).collect::<Vec<_>>();
    let kq = RationalMatrix::from_rows(names(VariableSpace::Charge), names(VariableSpace::Charge), kq)?;
    let kf = RationalMatrix::from_rows(names(VariableSpace::Flux), names(VariableSpace::Flux), kf)?;
    Ok(HamiltonianExpr::new(kq, kf, cosines, Rational::zero()))
}

impl ReducedSystem {
    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    /// `D`: rows are `Q_i` as combinations of loop charges.
    pub fn charge_defs(&self) -> &RationalMatrix {
        &self.charge_defs
    }

    /// `S`: rows are `Φ_i` as combinations of node fluxes.
    pub fn flux_defs(&self) -> &RationalMatrix {
        &self.flux_defs
    }

    /// Loop charges on the reduced surface as functions of `Q`.
    pub fn charge_map(&self) -> &RationalMatrix {
        &self.charge_map
    }

    /// Node fluxes on the reduced surface as functions of `Φ`.
    pub fn flux_map(&self) -> &RationalMatrix {
        &self.flux_map
    }

    pub fn eliminations(&self) -> &[Elimination] {
        &self.eliminations
    }

    pub fn hamiltonian(&self) -> &HamiltonianExpr {
        &self.hamiltonian
    }

    pub fn lagrangian(&self) -> &SymmetricLagrangian {
        &self.lagrangian
    }

    /// Capacitive-cut vectors: flux directions invisible to the Lagrangian.
    pub fn absent_flux_directions(&self) -> &[Vec<Rational>] {
        &self.absent_flux_directions
    }

    /// `R_q^T M R_φ`, which must be the identity for canonical pairs.
    pub fn reduced_kinetic_form(&self) -> RationalMatrix {
        self.charge_map
            .transpose()
            .mul(self.lagrangian.connection())
            .and_then(|x| x.mul(&self.flux_map))
            .expect("dimensions agree by construction")
    }

    /// Whether `q^T M φ̇ − Σ Q_i Φ̇_i` vanishes identically on the surface.
    pub fn kinetic_identity_holds(&self) -> bool {
        self.reduced_kinetic_form().same_entries(&RationalMatrix::identity(self.pair_count))
    }

    /// Replaces one elimination's row of the reconstruction map; only meant
    /// for negative controls in tests and the `check` command.
    pub fn with_corrupted_charge_row(&self, index: usize, row: Vec<Rational>) -> Self {
        let mut r = self.clone();
        for (j, x) in row.into_iter().enumerate() {
            r.charge_map.set(index, j, x);
        }
        r
    }

    pub fn commutation_relations(&self) -> [&'static str; 2] {
        ["{Phi_j, Q_i} = delta_ij", "[Phi_j, Q_i] = i hbar delta_ij"]
    }
}

/// Number of canonical pairs, `rank(M)`. On planar circuits this is also
/// `|V| − |Γ_I| − |Γ_C| − 1 = |F| − |Δ_I| − |Δ_C| − 1`; on any genus the
/// loop-side count uses the whole loop set.
pub fn dof_count(
    c: &crate::graph::Circuit,
    ls: &crate::graph::LoopSet,
    nc: &NullClassification,
    m: &RationalMatrix,
) -> Result<usize, ReductionError> {
    let rank = m.rank();
    let v = c.vertex_count() as i64;
    let l = ls.len() as i64;
    let cuts = (nc.capacitive_cuts.len() + nc.inductive_cuts.len()) as i64;
    let loops = (nc.capacitive_loops.len() + nc.inductive_loops.len()) as i64;
    let by_vertices = v - cuts - 1;
    let by_loops = l - loops - 1;
    if by_vertices != rank as i64 || by_loops != rank as i64 {
        return Err(ReductionError::Counting(format!(
            "rank(M) = {rank}, |V| - |cuts| - 1 = {by_vertices}, |L| - |homogeneous loops| - 1 = {by_loops}"
        )));
    }
    Ok(rank)
}

//! Classical dynamics of a reduced Hamiltonian: Hamilton's equations, RK4
//! integration, energy drift, normal modes and Kirchhoff residuals on the
//! original circuit.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::graph::{incidence_matrix, BranchClass, Circuit};
use crate::linalg::{to_f64, RationalMatrix};
use crate::reduction::{EnergyTerm, HamiltonianExpr, ReducedSystem, VariableSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("state has {q} charges and {phi} fluxes; the Hamiltonian has {n} pairs")]
    Dimension { q: usize, phi: usize, n: usize },
    #[error("step and end time must be positive and finite (step {step}, end {t_end})")]
    BadStep { step: f64, t_end: f64 },
    #[error("integration diverged at t = {time}")]
    Diverged { time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: Vec<f64>,
    pub phi: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn new(q: Vec<f64>, phi: Vec<f64>) -> Self {
        Self { q, phi, time: 0.0 }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }

    fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.phi).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub step: f64,
    pub hamiltonian: HamiltonianExpr,
}

fn to_dmatrix(m: &RationalMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| to_f64(m.get(i, j)))
}

/// Floating-point copy of a Hamiltonian with closed-form derivatives.
#[derive(Debug, Clone)]
pub struct NumericHamiltonian {
    kq: DMatrix<f64>,
    kphi: DMatrix<f64>,
    /// (E, space, w) for `−E cos(w · X)`.
    cosines: Vec<(f64, VariableSpace, DVector<f64>)>,
    constant: f64,
}

impl NumericHamiltonian {
    pub fn new(h: &HamiltonianExpr) -> Self {
        Self {
            kq: to_dmatrix(h.quadratic_q()),
            kphi: to_dmatrix(h.quadratic_phi()),
            cosines: h
                .cosines()
                .iter()
                .map(|t| {
                    (
                        to_f64(&t.coefficient),
                        t.space,
                        DVector::from_iterator(t.argument.len(), t.argument.iter().map(to_f64)),
                    )
                })
                .collect(),
            constant: to_f64(h.constant()),
        }
    }

    pub fn pair_count(&self) -> usize {
        self.kq.nrows()
    }

    pub fn energy(&self, q: &[f64], phi: &[f64]) -> f64 {
        let q = DVector::from_column_slice(q);
        let phi = DVector::from_column_slice(phi);
        let mut h = 0.5 * q.dot(&(&self.kq * &q)) + 0.5 * phi.dot(&(&self.kphi * &phi)) + self.constant;
        for (e, space, w) in &self.cosines {
            let x = match space {
                VariableSpace::Charge => w.dot(&q),
                VariableSpace::Flux => w.dot(&phi),
            };
            h -= e * x.cos();
        }
        h
    }

    /// `∂H/∂X` for `X` the charges or fluxes.
    pub fn gradient(&self, space: VariableSpace, q: &[f64], phi: &[f64]) -> Vec<f64> {
        let (k, x) = match space {
            VariableSpace::Charge => (&self.kq, DVector::from_column_slice(q)),
            VariableSpace::Flux => (&self.kphi, DVector::from_column_slice(phi)),
        };
        let mut g = k * &x;
        for (e, s, w) in &self.cosines {
            if *s == space {
                g += w * (e * w.dot(&x).sin());
            }
        }
        g.as_slice().to_vec()
    }

    /// `(dΦ/dt, dQ/dt) = (∂H/∂Q, −∂H/∂Φ)`.
    pub fn vector_field(&self, q: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dphi = self.gradient(VariableSpace::Charge, q, phi);
        let dq = self.gradient(VariableSpace::Flux, q, phi).into_iter().map(|x| -x).collect();
        (dphi, dq)
    }
}

fn check_dims(n: usize, s: &State) -> Result<(), DynamicsError> {
    if s.q.len() != n || s.phi.len() != n {
        return Err(DynamicsError::Dimension { q: s.q.len(), phi: s.phi.len(), n });
    }
    Ok(())
}

/// Hamilton's equations at `s`: `(dΦ/dt, dQ/dt)`.
pub fn vector_field(h: &HamiltonianExpr, s: &State) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
    check_dims(h.pair_count(), s)?;
    Ok(NumericHamiltonian::new(h).vector_field(&s.q, &s.phi))
}

pub fn energy(h: &HamiltonianExpr, s: &State) -> f64 {
    NumericHamiltonian::new(h).energy(&s.q, &s.phi)
}

/// Sample times of a run: `0, step, 2·step, …` up to `t_end`, plus `t_end`
/// itself when it is not on the grid (a little slack keeps `t_end = k·step`
/// written in decimal on the grid).
pub fn sample_times(step: f64, t_end: f64) -> Vec<f64> {
    let whole = (t_end / step + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=whole).map(|k| k as f64 * step).collect();
    if t_end - whole as f64 * step > 1e-9 * step {
        times.push(t_end);
    }
    times
}

/// Classical RK4 from `s0` over `[0, t_end]` (relative to `s0.time`) with a
/// fixed step; the last step is shortened to land on `t_end`.
pub fn integrate(h: &HamiltonianExpr, s0: &State, step: f64, t_end: f64) -> Result<Trajectory, DynamicsError> {
    check_dims(h.pair_count(), s0)?;
    if !(step > 0.0 && step.is_finite() && t_end > 0.0 && t_end.is_finite()) {
        return Err(DynamicsError::BadStep { step, t_end });
    }
    let nh = NumericHamiltonian::new(h);
    let n = nh.pair_count();
    let times = sample_times(step, t_end);
    let mut samples = Vec::with_capacity(times.len());
    samples.push(s0.clone());
    let (mut q, mut phi) = (s0.q.clone(), s0.phi.clone());
    let axpy = |x: &[f64], a: f64, d: &[f64]| x.iter().zip(d).map(|(x, d)| x + a * d).collect::<Vec<_>>();
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let (p1, q1) = nh.vector_field(&q, &phi);
        let (p2, q2) = nh.vector_field(&axpy(&q, dt / 2.0, &q1), &axpy(&phi, dt / 2.0, &p1));
        let (p3, q3) = nh.vector_field(&axpy(&q, dt / 2.0, &q2), &axpy(&phi, dt / 2.0, &p2));
        let (p4, q4) = nh.vector_field(&axpy(&q, dt, &q3), &axpy(&phi, dt, &p3));
        for i in 0..n {
            q[i] += dt / 6.0 * (q1[i] + 2.0 * q2[i] + 2.0 * q3[i] + q4[i]);
            phi[i] += dt / 6.0 * (p1[i] + 2.0 * p2[i] + 2.0 * p3[i] + p4[i]);
        }
        let s = State { q: q.clone(), phi: phi.clone(), time: s0.time + w[1] };
        if !s.is_finite() {
            return Err(DynamicsError::Diverged { time: s.time });
        }
        samples.push(s);
    }
    Ok(Trajectory { samples, step, hamiltonian: h.clone() })
}

/// `max |H(s) − H(s0)| / max(1, |H(s0)|)`.
pub fn energy_drift(t: &Trajectory) -> f64 {
    let nh = NumericHamiltonian::new(&t.hamiltonian);
    let Some(first) = t.samples.first() else {
        return 0.0;
    };
    let h0 = nh.energy(&first.q, &first.phi);
    let worst = t.samples.iter().map(|s| (nh.energy(&s.q, &s.phi) - h0).abs()).fold(0.0, f64::max);
    worst / h0.abs().max(1.0)
}

/// Angular frequencies of the quadratic part: square roots of the
/// eigenvalues of `K_Q K_Φ`, ascending. Computed from the symmetric matrix
/// `K_Q^{1/2} K_Φ K_Q^{1/2}`, which has the same spectrum.
pub fn normal_modes(h: &HamiltonianExpr) -> Vec<f64> {
    if h.pair_count() == 0 {
        return Vec::new();
    }
    let kq = to_dmatrix(h.quadratic_q());
    let kphi = to_dmatrix(h.quadratic_phi());
    let eq = SymmetricEigen::new(kq);
    let sqrt_vals = eq.eigenvalues.map(|x| x.max(0.0).sqrt());
    let root = &eq.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eq.eigenvectors.transpose();
    let sym = &root * kphi * &root;
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut w: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    w.sort_by(f64::total_cmp);
    w
}

/// Largest residual of each circuit law over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KirchhoffReport {
    /// `Σ_v M_lv φ̇_v − Σ_{e∈C} B_le E'_e(q_e)` per loop.
    pub loop_voltage: f64,
    /// `Σ_l q̇_l M_lv + Σ_{e∈I} A_ev E'_e(φ_e)` per vertex.
    pub node_current: f64,
    /// `(A φ̇)_e − E'_e(q_e)` per capacitive branch, after removing the flux
    /// directions the Lagrangian does not see.
    pub constitutive: f64,
}

impl KirchhoffReport {
    pub fn max(&self) -> f64 {
        self.loop_voltage.max(self.node_current).max(self.constitutive)
    }
}

fn term_derivative(t: &EnergyTerm, q: &[f64], phi: &[f64]) -> f64 {
    let x: f64 = match t.space {
        VariableSpace::Charge => t.argument.iter().zip(q).map(|(a, x)| to_f64(a) * x).sum(),
        VariableSpace::Flux => t.argument.iter().zip(phi).map(|(a, x)| to_f64(a) * x).sum(),
    };
    t.derivative(x)
}

/// Rebuilds loop charges and node fluxes from each sample through the
/// reconstruction maps, takes time derivatives from the exact vector field,
/// and evaluates the equations of motion of the full Lagrangian.
pub fn check_kirchhoff(c: &Circuit, rs: &ReducedSystem, t: &Trajectory) -> KirchhoffReport {
    let lag = rs.lagrangian();
    let m = to_dmatrix(lag.connection());
    let rq = to_dmatrix(rs.charge_map());
    let rf = to_dmatrix(rs.flux_map());
    let a = to_dmatrix(&incidence_matrix(c));
    let nh = NumericHamiltonian::new(&t.hamiltonian);
    let cap: Vec<usize> = (0..c.edge_count()).filter(|&e| c.edges()[e].class() == BranchClass::Capacitive).collect();
    // Branch-voltage changes caused by the absent flux directions, on
    // capacitive branches only.
    let absent = DMatrix::from_fn(cap.len(), rs.absent_flux_directions().len(), |i, k| {
        let dir = &rs.absent_flux_directions()[k];
        (0..c.vertex_count()).map(|v| a[(cap[i], v)] * to_f64(&dir[v])).sum()
    });
    let absent_svd = (absent.ncols() > 0).then(|| absent.clone().svd(true, true));

    let mut report = KirchhoffReport::default();
    for s in &t.samples {
        let (dphi_r, dq_r) = nh.vector_field(&s.q, &s.phi);
        let q = &rq * DVector::from_column_slice(&s.q);
        let phi = &rf * DVector::from_column_slice(&s.phi);
        let qdot = &rq * DVector::from_vec(dq_r);
        let phidot = &rf * DVector::from_vec(dphi_r);

        let mut loop_res = &m * &phidot;
        let mut node_res = m.transpose() * &qdot;
        let mut branch_target = DVector::zeros(cap.len());
        for term in lag.energy_terms() {
            let d = term_derivative(term, q.as_slice(), phi.as_slice());
            let e = term.edge;
            match c.edges()[e].class() {
                BranchClass::Capacitive => {
                    for l in 0..loop_res.len() {
                        loop_res[l] -= to_f64(&term.argument[l]) * d;
                    }
                    let i = cap.iter().position(|&x| x == e).expect("capacitive edge");
                    branch_target[i] = d;
                }
                BranchClass::Inductive => {
                    for v in 0..node_res.len() {
                        node_res[v] += a[(e, v)] * d;
                    }
                }
            }
        }
        let branch_rate = DVector::from_iterator(
            cap.len(),
            cap.iter().map(|&e| (0..c.vertex_count()).map(|v| a[(e, v)] * phidot[v]).sum()),
        );
        let mut mismatch = branch_rate - branch_target;
        if let Some(svd) = &absent_svd {
            if let Ok(alpha) = svd.solve(&mismatch, 1e-12) {
                mismatch -= &absent * alpha;
            }
        }
        report.loop_voltage = report.loop_voltage.max(loop_res.amax());
        report.node_current = report.node_current.max(node_res.amax());
        if !mismatch.is_empty() {
            report.constitutive = report.constitutive.max(mismatch.amax());
        }
    }
    report
}

/// CSV with header `t,Q1..QN,Phi1..PhiN,H`, 17 significant digits.
pub fn write_csv(t: &Trajectory, mut out: impl Write) -> std::io::Result<()> {
    let n = t.hamiltonian.pair_count();
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| VariableSpace::Charge.reduced_name(i)));
    header.extend((0..n).map(|i| VariableSpace::Flux.reduced_name(i)));
    header.push("H".into());
    writeln!(out, "{}", header.join(","))?;
    let nh = NumericHamiltonian::new(&t.hamiltonian);
    for s in &t.samples {
        let mut row = vec![format!("{:.16e}", s.time)];
        row.extend(s.q.iter().chain(&s.phi).map(|x| format!("{x:.16e}")));
        row.push(format!("{:.16e}", nh.energy(&s.q, &s.phi)));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_csv(t, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frac, int, Rational};
    use crate::reduction::CosineTerm;

    fn one(x: Rational) -> RationalMatrix {
        RationalMatrix::from_rows(vec!["a".into()], vec!["a".into()], vec![vec![x]]).unwrap()
    }

    fn oscillator() -> HamiltonianExpr {
        // H = Q²/2 + Φ²/2
        HamiltonianExpr::new(one(int(1)), one(int(1)), vec![], int(0))
    }

    #[test]
    fn oscillator_field() {
        let (dphi, dq) = vector_field(&oscillator(), &State::new(vec![1.0], vec![0.0])).unwrap();
        assert_eq!((dphi[0], dq[0]), (1.0, 0.0));
    }

    #[test]
    fn cosine_field() {
        // H = −cos(Φ)
        let h = HamiltonianExpr::new(
            one(int(0)),
            one(int(0)),
            vec![CosineTerm { coefficient: int(1), space: VariableSpace::Flux, argument: vec![int(1)] }],
            int(0),
        );
        let (_, dq) = vector_field(&h, &State::new(vec![0.0], vec![std::f64::consts::FRAC_PI_2])).unwrap();
        assert!((dq[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let t = integrate(&oscillator(), &State::new(vec![1.0], vec![0.0]), 1e-3, 2.0 * std::f64::consts::PI).unwrap();
        // 6284 grid points up to 6.283, then a short step to 2π.
        assert_eq!(t.samples.len(), 6285);
        let last = t.samples.last().unwrap();
        assert_eq!(last.time, 2.0 * std::f64::consts::PI);
        assert!((last.q[0] - 1.0).abs() < 1e-6 && last.phi[0].abs() < 1e-6);
    }

    #[test]
    fn grid_times() {
        assert_eq!(sample_times(0.5, 1.0), vec![0.0, 0.5, 1.0]);
        assert_eq!(sample_times(0.1, 0.3).len(), 4);
        assert_eq!(sample_times(0.4, 1.0), vec![0.0, 0.4, 0.8, 1.0]);
    }

    #[test]
    fn fixed_point_stays_put() {
        let t = integrate(&oscillator(), &State::zero(1), 0.1, 5.0).unwrap();
        assert!(t.samples.iter().all(|s| s.q[0] == 0.0 && s.phi[0] == 0.0));
        assert_eq!(energy_drift(&t), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(integrate(&oscillator(), &State::zero(2), 0.1, 1.0), Err(DynamicsError::Dimension { .. })));
        assert!(matches!(integrate(&oscillator(), &State::zero(1), 0.0, 1.0), Err(DynamicsError::BadStep { .. })));
        // dQ/dt = -1e200 Φ overflows quickly.
        let wild = HamiltonianExpr::new(
            one(int(0)),
            one(frac(1, 1) * Rational::from_integer(num_bigint::BigInt::from(10).pow(300))),
            vec![],
            int(0),
        );
        let err = integrate(&wild, &State::new(vec![0.0], vec![1e10]), 1.0, 10.0).unwrap_err();
        assert!(matches!(err, DynamicsError::Diverged { time } if time > 0.0));
    }

    #[test]
    fn csv_layout() {
        let t = integrate(&oscillator(), &State::new(vec![1.0], vec![0.0]), 0.5, 1.0).unwrap();
        let csv = trajectory_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,Q1,Phi1,H");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,5.0000000000000000e-1");
    }

    #[test]
    fn modes_of_uncoupled_oscillators() {
        let kq = RationalMatrix::from_ints(&[vec![1, 0], vec![0, 4]]);
        let kphi = RationalMatrix::from_ints(&[vec![1, 0], vec![0, 1]]);
        let h = HamiltonianExpr::new(kq, kphi, vec![], int(0));
        let w = normal_modes(&h);
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12);
        let empty =
            HamiltonianExpr::new(RationalMatrix::unlabeled(0, 0), RationalMatrix::unlabeled(0, 0), vec![], int(0));
        assert!(normal_modes(&empty).is_empty());
    }
}

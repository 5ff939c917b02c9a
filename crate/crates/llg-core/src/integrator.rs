//! Projection-free BDF2 tangent-plane integrator.
//!
//! One linear solve per step: the update `v` lives in the nodal tangent space
//! of a predictor field, the new state is the BDF2 extrapolation
//! `m^{j+1} = (4 m^j - m^{j-1} + 2 tau v)/3`, and no renormalization is ever
//! applied. The scheme instead guarantees nodal laws which this module checks
//! after every step:
//!
//! * identity: `|m^{j+1}|^2 = (4/3)|m^j|^2 - (1/3)|m^{j-1}|^2
//!   + |m^{j+1} - 2 m^j + m^{j-1}|^2` at every node,
//! * monotonicity: nodal lengths never decrease and stay `>= 1`,
//! * the predictor `2 m^j - m^{j-1}` has nodal length `>= 1`.
//!
//! Violations abort the run: they signal implementation bugs, not physics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fem::{apply_scalar, assemble_p1, bilinear, error_norms_vec, P1System,
    WeightedMassAssembler};
use crate::field::VectorField;
use crate::mesh::TriMesh;
use crate::num::{dot3, norm3, real, Real};
use crate::problem::Problem;
use crate::quad::{rule_degree_6, TriQuadRule};
use crate::sparse::{solve_gmres, DirectFactor, FactorScalar, GmresOptions};
use crate::tangent::TangentFrame;

/// Linear solver selection for the reduced systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Direct below `auto_direct_cutoff` unknowns, GMRES above.
    Auto,
    Direct,
    Gmres,
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub kind: SolverKind,
    /// Reduced-system size up to which `Auto` uses the direct solver.
    pub auto_direct_cutoff: usize,
    /// Relative residual bound enforced after every direct solve.
    pub direct_residual_tol: T,
    pub gmres: GmresOptions<T>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::Auto,
            auto_direct_cutoff: 20_000,
            direct_residual_tol: real::<T>(1e-10),
            gmres: GmresOptions::default(),
        }
    }
}

/// Tolerances for the per-step nodal laws. The defaults are machine-precision
/// budgets, far below any discretization error.
#[derive(Debug, Clone)]
pub struct InvariantTols<T> {
    /// Bound on `max_z |m_hat(z) . v(z)|`.
    pub tangent: T,
    /// Bound on the nodal-identity residual.
    pub nodal_identity: T,
    /// Nodal lengths may undershoot their lower bound by this much.
    pub length_slack: T,
    /// Predictor lengths may undershoot 1 by this much.
    pub predictor_slack: T,
}

impl<T: Real> Default for InvariantTols<T> {
    fn default() -> Self {
        InvariantTols {
            tangent: real::<T>(1e-12),
            nodal_identity: real::<T>(1e-12),
            length_slack: real::<T>(1e-12),
            predictor_slack: real::<T>(1e-10),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig<T> {
    pub alpha: T,
    pub lambda_sq: T,
    pub t_end: T,
    /// Number of time steps `N`; `tau = t_end / N`. BDF2 needs `N >= 2`.
    pub num_steps: usize,
    pub solver: SolverOptions<T>,
    pub tols: InvariantTols<T>,
    /// Record per-step L2/H1 errors when the problem has an exact solution.
    pub record_errors: bool,
    /// Retain every state so the trajectory can be evaluated in time.
    pub keep_states: bool,
}

impl<T: Real> SimConfig<T> {
    pub fn for_problem(problem: &Problem<T>, num_steps: usize) -> Self {
        SimConfig {
            alpha: problem.alpha,
            lambda_sq: problem.lambda_sq,
            t_end: problem.t_end,
            num_steps,
            solver: SolverOptions::default(),
            tols: InvariantTols::default(),
            record_errors: true,
            keep_states: false,
        }
    }

    pub fn tau(&self) -> T {
        self.t_end / real::<T>(self.num_steps as f64)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha > T::zero()) {
            return Err(Error::Config("alpha must be positive".to_string()));
        }
        if !(self.lambda_sq > T::zero()) {
            return Err(Error::Config("lambda_sq must be positive".to_string()));
        }
        if !(self.t_end > T::zero()) {
            return Err(Error::Config("t_end must be positive".to_string()));
        }
        if self.num_steps < 2 {
            return Err(Error::Config(format!(
                "num_steps must be at least 2 for the two-step scheme, got {}",
                self.num_steps
            )));
        }
        Ok(())
    }
}

/// Diagnostics captured for every produced state.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord<T> {
    /// Index `j` of the state `m^j` (0 is the initial field).
    pub step: usize,
    pub time: T,
    /// `E(m^j, f^j) = (lambda^2/2) m^T K m - f^T M m`.
    pub energy: T,
    /// Dirichlet form `m^T K m`, the eta indicators' raw material.
    pub grad_norm_sq: T,
    pub min_len: T,
    pub max_len: T,
    /// `max_z |m_hat(z) . v(z)|` of the step that produced this state.
    pub tangent_residual: T,
    /// Nodal-identity residual; `None` for the two states that precede the
    /// first three-term update.
    pub identity_residual: Option<T>,
    /// GMRES iterations (0 when the direct solver ran).
    pub solver_iters: usize,
    /// Relative residual of the linear solve.
    pub solver_residual: T,
    pub err_l2: Option<T>,
    pub err_h1: Option<T>,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub tau: T,
    pub records: Vec<StepRecord<T>>,
    /// All states `m^0..m^N` when `keep_states` was set.
    pub states: Option<Vec<VectorField<T>>>,
    pub final_m: VectorField<T>,
    /// Last computed update `v^{N-1}`.
    pub final_v: VectorField<T>,
    /// `|grad m^1|^2 - |grad m^0|^2`.
    pub eta0: T,
    /// `|grad m^{N-1}|^2 - |grad m^N|^2`.
    pub etan: T,
    pub max_err_l2: Option<T>,
    pub max_err_h1: Option<T>,
}

impl<T: Real> Trajectory<T> {
    /// Piecewise-affine evaluation in time; requires retained states.
    pub fn interpolate_in_time(&self, t: T) -> Result<VectorField<T>, Error> {
        let states = self.states.as_ref().ok_or_else(|| {
            Error::InvalidInput("trajectory was run without keep_states".to_string())
        })?;
        let t_end = self.tau * real::<T>((states.len() - 1) as f64);
        if t < T::zero() || t > t_end * (T::one() + real::<T>(1e-12)) {
            return Err(Error::InvalidInput(format!(
                "time {t:e} outside [0, {t_end:e}]"
            )));
        }
        let j = ((t / self.tau).to_f64().unwrap().floor() as usize).min(states.len() - 2);
        let theta = (t - self.tau * real::<T>(j as f64)) / self.tau;
        Ok(VectorField::lin2(
            T::one() - theta,
            &states[j],
            theta,
            &states[j + 1],
        ))
    }
}

/// Outcome of a single solve-and-update.
#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub v: VectorField<T>,
    pub m_next: VectorField<T>,
    pub tangent_residual: T,
    pub identity_residual: Option<T>,
    pub solver_iters: usize,
    pub solver_residual: T,
}

pub struct Integrator<T: FactorScalar> {
    mesh: Arc<TriMesh<T>>,
    sys: P1System<T>,
    wmass: WeightedMassAssembler<T>,
    config: SimConfig<T>,
    err_rule: TriQuadRule<T>,
}

impl<T: FactorScalar> Integrator<T> {
    pub fn new(mesh: &Arc<TriMesh<T>>, config: SimConfig<T>) -> Result<Self, Error> {
        config.validate()?;
        Ok(Integrator {
            mesh: Arc::clone(mesh),
            sys: assemble_p1(mesh),
            wmass: WeightedMassAssembler::new(mesh),
            config,
            err_rule: rule_degree_6(),
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn system(&self) -> &P1System<T> {
        &self.sys
    }

    pub fn config(&self) -> &SimConfig<T> {
        &self.config
    }

    /// Nodal interpolation of the initial state, renormalized at the nodes.
    /// For unit-length data the normalization is a round-off no-op.
    pub fn initial_field(&self, problem: &Problem<T>) -> Result<VectorField<T>, Error> {
        let mut vals = Vec::with_capacity(self.mesh.num_vertices());
        for (i, &x) in self.mesh.vertices().iter().enumerate() {
            let v = (problem.m0)(x);
            let n = norm3(v);
            if n < real::<T>(1e-8) {
                return Err(Error::InvalidInput(format!(
                    "initial field vanishes at node {i} ({:?})",
                    x.map(|c| c.to_f64())
                )));
            }
            vals.push([v[0] / n, v[1] / n, v[2] / n]);
        }
        Ok(VectorField::new(Arc::clone(&self.mesh), vals))
    }

    /// Nodal interpolation of the external field at time `t`.
    pub fn field_at(&self, problem: &Problem<T>, t: T) -> VectorField<T> {
        VectorField::interpolate(Arc::clone(&self.mesh), |x| (problem.field)(t, x))
    }

    /// `E(m, f) = (lambda^2/2) m^T K m - f^T M m`.
    pub fn energy(&self, m: &VectorField<T>, f: &VectorField<T>) -> T {
        let half = real::<T>(0.5);
        half * self.config.lambda_sq * bilinear(&self.sys.stiffness, m.vals(), m.vals())
            - bilinear(&self.sys.mass, f.vals(), m.vals())
    }

    /// Solves the tangent-space system for a given predictor and right-hand
    /// side and expands the solution back to nodal vectors.
    fn solve_tangent(
        &self,
        m_hat: &VectorField<T>,
        c_stiff: T,
        rhs_full: &[[T; 3]],
    ) -> Result<(VectorField<T>, T, usize, T), Error> {
        let frame = TangentFrame::new(m_hat.vals())?;
        let ws = self.wmass.assemble(m_hat);
        let reduced = crate::tangent::assemble_reduced(
            &frame,
            &self.sys.mass,
            &ws,
            &self.sys.stiffness,
            self.config.alpha,
            c_stiff,
        );
        let rhs = frame.reduce_vec(rhs_full);

        let n = reduced.nrows();
        let use_direct = match self.config.solver.kind {
            SolverKind::Direct => true,
            SolverKind::Gmres => false,
            SolverKind::Auto => n <= self.config.solver.auto_direct_cutoff,
        };
        let (y, iters, residual) = if use_direct {
            let factor = DirectFactor::new(&reduced).map_err(Error::Solve)?;
            let y = factor
                .solve(&reduced, &rhs, self.config.solver.direct_residual_tol)
                .map_err(Error::Solve)?;
            let r = relative_residual(&reduced, &y, &rhs);
            (y, 0, r)
        } else {
            let out = solve_gmres(&reduced, &rhs, None, &self.config.solver.gmres)
                .map_err(Error::Solve)?;
            (out.0, out.1.iters, out.1.residual)
        };

        let v_vals = frame.expand(&y);
        let mut tangent_residual = T::zero();
        for (mi, vi) in m_hat.vals().iter().zip(&v_vals) {
            tangent_residual = tangent_residual.max(dot3(*mi, *vi).abs());
        }
        if !(tangent_residual <= self.config.tols.tangent) {
            return Err(Error::Invariant(format!(
                "tangent constraint residual {tangent_residual:e} exceeds {:e}",
                self.config.tols.tangent
            )));
        }
        Ok((
            VectorField::new(Arc::clone(&self.mesh), v_vals),
            tangent_residual,
            iters,
            residual,
        ))
    }

    /// First step: backward-Euler-type solve in the tangent space of `m^0`,
    /// then `m^1 = m^0 + tau v^0`.
    pub fn first_step(
        &self,
        m0: &VectorField<T>,
        f1: &VectorField<T>,
    ) -> Result<StepOutcome<T>, Error> {
        let tau = self.config.tau();
        let lam = self.config.lambda_sq;
        // b = M f^1 - lambda^2 K m^0
        let mf = apply_scalar(&self.sys.mass, f1.vals());
        let km = apply_scalar(&self.sys.stiffness, m0.vals());
        let rhs: Vec<[T; 3]> = mf
            .iter()
            .zip(&km)
            .map(|(a, b)| std::array::from_fn(|c| a[c] - lam * b[c]))
            .collect();
        let (v, tangent_residual, solver_iters, solver_residual) =
            self.solve_tangent(m0, lam * tau, &rhs)?;
        let m_next = VectorField::lin2(T::one(), m0, tau, &v);
        Ok(StepOutcome {
            v,
            m_next,
            tangent_residual,
            identity_residual: None,
            solver_iters,
            solver_residual,
        })
    }

    /// BDF2 step: predictor `2 m^j - m^{j-1}`, tangent solve, three-term
    /// update, then the nodal laws are enforced.
    pub fn bdf2_step(
        &self,
        m_j: &VectorField<T>,
        m_jm1: &VectorField<T>,
        f_jp1: &VectorField<T>,
    ) -> Result<StepOutcome<T>, Error> {
        let tau = self.config.tau();
        let lam = self.config.lambda_sq;
        let (one, two, three, four) = (
            T::one(),
            real::<T>(2.0),
            real::<T>(3.0),
            real::<T>(4.0),
        );

        let m_hat = VectorField::lin2(two, m_j, -one, m_jm1);
        let min_hat = m_hat.nodal_length_range().0;
        if min_hat < one - self.config.tols.predictor_slack {
            return Err(Error::Invariant(format!(
                "predictor nodal length {min_hat:e} dropped below 1"
            )));
        }

        // b = M f^{j+1} - (lambda^2/3) K (4 m^j - m^{j-1})
        let hist = VectorField::lin2(four, m_j, -one, m_jm1);
        let mf = apply_scalar(&self.sys.mass, f_jp1.vals());
        let kh = apply_scalar(&self.sys.stiffness, hist.vals());
        let third = lam / three;
        let rhs: Vec<[T; 3]> = mf
            .iter()
            .zip(&kh)
            .map(|(a, b)| std::array::from_fn(|c| a[c] - third * b[c]))
            .collect();

        let (v, tangent_residual, solver_iters, solver_residual) =
            self.solve_tangent(&m_hat, two / three * lam * tau, &rhs)?;

        // m^{j+1} = (4 m^j - m^{j-1} + 2 tau v)/3
        let m_next = VectorField::new(
            Arc::clone(&self.mesh),
            hist.vals()
                .iter()
                .zip(v.vals())
                .map(|(h, vv)| std::array::from_fn(|c| (h[c] + two * tau * vv[c]) / three))
                .collect(),
        );

        // Nodal identity and length monotonicity.
        let mut identity_residual = T::zero();
        let (four_third, one_third) = (four / three, one / three);
        let floor = one - self.config.tols.length_slack;
        for ((next, cur), prev) in m_next
            .vals()
            .iter()
            .zip(m_j.vals())
            .zip(m_jm1.vals())
        {
            let ln = dot3(*next, *next);
            let lc = dot3(*cur, *cur);
            let lp = dot3(*prev, *prev);
            let d2: [T; 3] = std::array::from_fn(|c| next[c] - two * cur[c] + prev[c]);
            let res = (ln - four_third * lc + one_third * lp - dot3(d2, d2)).abs();
            identity_residual = identity_residual.max(res);
            if ln < lc - self.config.tols.length_slack || ln < floor * floor {
                return Err(Error::Invariant(format!(
                    "nodal length decreased: |m_next|^2 = {ln:e}, |m_cur|^2 = {lc:e}"
                )));
            }
        }
        if !(identity_residual <= self.config.tols.nodal_identity) {
            return Err(Error::Invariant(format!(
                "nodal identity residual {identity_residual:e} exceeds {:e}",
                self.config.tols.nodal_identity
            )));
        }

        Ok(StepOutcome {
            v,
            m_next,
            tangent_residual,
            identity_residual: Some(identity_residual),
            solver_iters,
            solver_residual,
        })
    }

    fn record_for(
        &self,
        problem: &Problem<T>,
        step: usize,
        m: &VectorField<T>,
        f: &VectorField<T>,
        outcome: Option<&StepOutcome<T>>,
    ) -> StepRecord<T> {
        let time = self.config.tau() * real::<T>(step as f64);
        let (min_len, max_len) = m.nodal_length_range();
        let (err_l2, err_h1) = match (&problem.exact, self.config.record_errors) {
            (Some(bundle), true) => {
                let exact = &bundle.m;
                let grad = &bundle.grad_m;
                let err = error_norms_vec(
                    m,
                    |x| exact(time, x),
                    |x| grad(time, x),
                    &self.err_rule,
                );
                (Some(err.l2), Some(err.h1()))
            }
            _ => (None, None),
        };
        StepRecord {
            step,
            time,
            energy: self.energy(m, f),
            grad_norm_sq: bilinear(&self.sys.stiffness, m.vals(), m.vals()),
            min_len,
            max_len,
            tangent_residual: outcome.map_or(T::zero(), |o| o.tangent_residual),
            identity_residual: outcome.and_then(|o| o.identity_residual),
            solver_iters: outcome.map_or(0, |o| o.solver_iters),
            solver_residual: outcome.map_or(T::zero(), |o| o.solver_residual),
            err_l2,
            err_h1,
        }
    }

    /// Full trajectory: interpolated initial state, first step, then BDF2.
    pub fn run(&self, problem: &Problem<T>) -> Result<Trajectory<T>, Error> {
        let n_steps = self.config.num_steps;
        let m0 = self.initial_field(problem)?;
        let f0 = self.field_at(problem, T::zero());

        let mut records = Vec::with_capacity(n_steps + 1);
        records.push(self.record_for(problem, 0, &m0, &f0, None));

        let mut states = self.config.keep_states.then(|| vec![m0.clone()]);

        let tau = self.config.tau();
        let f1 = self.field_at(problem, tau);
        let first = self
            .first_step(&m0, &f1)
            .map_err(|e| e.with_step_context(1))?;
        records.push(self.record_for(problem, 1, &first.m_next, &f1, Some(&first)));
        if let Some(s) = states.as_mut() {
            s.push(first.m_next.clone());
        }

        let mut m_prev = m0;
        let mut m_cur = first.m_next;
        let mut v_last = first.v;
        for j in 1..n_steps {
            let t_next = tau * real::<T>((j + 1) as f64);
            let f_next = self.field_at(problem, t_next);
            let out = self
                .bdf2_step(&m_cur, &m_prev, &f_next)
                .map_err(|e| e.with_step_context(j + 1))?;
            records.push(self.record_for(problem, j + 1, &out.m_next, &f_next, Some(&out)));
            if let Some(s) = states.as_mut() {
                s.push(out.m_next.clone());
            }
            m_prev = m_cur;
            m_cur = out.m_next;
            v_last = out.v;
        }

        let eta0 = records[1].grad_norm_sq - records[0].grad_norm_sq;
        let etan = records[n_steps - 1].grad_norm_sq - records[n_steps].grad_norm_sq;
        let max_err_l2 = fold_max(records.iter().map(|r| r.err_l2));
        let max_err_h1 = fold_max(records.iter().map(|r| r.err_h1));
        Ok(Trajectory {
            tau,
            records,
            states,
            final_m: m_cur,
            final_v: v_last,
            eta0,
            etan,
            max_err_l2,
            max_err_h1,
        })
    }
}

fn fold_max<T: Real>(it: impl Iterator<Item = Option<T>>) -> Option<T> {
    it.flatten().fold(None, |acc, x| {
        Some(match acc {
            None => x,
            Some(a) => a.max(x),
        })
    })
}

fn relative_residual<T: Real>(a: &crate::sparse::CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.spmv(x);
    let mut num = T::zero();
    let mut den = T::zero();
    for (axi, bi) in ax.iter().zip(b) {
        num += (*axi - *bi) * (*axi - *bi);
        den += *bi * *bi;
    }
    num.sqrt() / den.sqrt().max(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{self, SpaceTimeFn};
    use std::sync::Arc as StdArc;

    fn constant_problem(f_parallel: f64) -> Problem<f64> {
        let field: SpaceTimeFn<f64> = StdArc::new(move |_, _| [0.0, f_parallel, 0.0]);
        Problem {
            name: "constant".to_string(),
            alpha: 0.3,
            lambda_sq: 1.0,
            t_end: 0.5,
            m0: StdArc::new(|_| [0.0, 1.0, 0.0]),
            field,
            exact: None,
        }
    }

    #[test]
    fn constant_state_with_parallel_forcing_is_stationary() {
        let mesh = TriMesh::<f64>::crisscross(2);
        let p = constant_problem(2.0);
        let config = SimConfig::for_problem(&p, 10);
        let integ = Integrator::new(&mesh, config).unwrap();
        let traj = integ.run(&p).unwrap();
        for v in traj.final_m.vals() {
            assert!((v[0]).abs() < 1e-13);
            assert!((v[1] - 1.0).abs() < 1e-13);
            assert!((v[2]).abs() < 1e-13);
        }
        let e0 = traj.records[0].energy;
        for r in &traj.records {
            assert!((r.energy - e0).abs() < 1e-13);
        }
        assert!(traj.eta0.abs() < 1e-14 && traj.etan.abs() < 1e-14);
    }

    #[test]
    fn cubic_run_respects_nodal_laws_and_tracks_errors() {
        let mesh = TriMesh::<f64>::crisscross(4);
        let p = problem::cubic::<f64>();
        let config = SimConfig::for_problem(&p, 8);
        let integ = Integrator::new(&mesh, config).unwrap();
        let traj = integ.run(&p).unwrap();
        assert_eq!(traj.records.len(), 9);
        for r in &traj.records {
            assert!(r.min_len >= 1.0 - 1e-12, "step {}: {}", r.step, r.min_len);
            assert!(r.tangent_residual <= 1e-12);
            if let Some(id) = r.identity_residual {
                assert!(id <= 1e-12);
            }
        }
        // Lengths only grow.
        for w in traj.records.windows(2) {
            assert!(w[1].min_len >= w[0].min_len - 1e-13);
        }
        let h1 = traj.max_err_h1.unwrap();
        assert!(h1 > 0.0 && h1 < 1.0, "H1 error should be small, got {h1}");
    }

    #[test]
    fn gmres_and_direct_paths_agree() {
        let mesh = TriMesh::<f64>::crisscross(3);
        let p = problem::cubic::<f64>();
        let mut config = SimConfig::for_problem(&p, 4);
        config.solver.kind = SolverKind::Direct;
        let direct = Integrator::new(&mesh, config.clone()).unwrap().run(&p).unwrap();
        config.solver.kind = SolverKind::Gmres;
        config.solver.gmres.rel_tol = 1e-13;
        let gmres = Integrator::new(&mesh, config).unwrap().run(&p).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in direct.final_m.vals().iter().zip(gmres.final_m.vals()) {
            for c in 0..3 {
                worst = worst.max((a[c] - b[c]).abs());
            }
        }
        assert!(worst < 1e-9, "solver paths diverged by {worst:e}");
        assert!(gmres.records[2].solver_iters > 0);
        assert_eq!(direct.records[2].solver_iters, 0);
    }

    #[test]
    fn trajectory_interpolation_is_affine_in_time() {
        let mesh = TriMesh::<f64>::crisscross(2);
        let p = problem::cubic::<f64>();
        let mut config = SimConfig::for_problem(&p, 4);
        config.keep_states = true;
        let integ = Integrator::new(&mesh, config).unwrap();
        let traj = integ.run(&p).unwrap();
        let states = traj.states.as_ref().unwrap();
        let tau = traj.tau;

        let at_node = traj.interpolate_in_time(2.0 * tau).unwrap();
        for (a, b) in at_node.vals().iter().zip(states[2].vals()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-15);
            }
        }
        let mid = traj.interpolate_in_time(2.5 * tau).unwrap();
        for ((a, s2), s3) in mid.vals().iter().zip(states[2].vals()).zip(states[3].vals()) {
            for c in 0..3 {
                assert!((a[c] - 0.5 * (s2[c] + s3[c])).abs() < 1e-15);
            }
        }
        assert!(traj.interpolate_in_time(-0.1).is_err());
        assert!(traj.interpolate_in_time(p.t_end * 1.5).is_err());
    }

    #[test]
    fn interpolation_requires_retained_states() {
        let mesh = TriMesh::<f64>::crisscross(2);
        let p = problem::cubic::<f64>();
        let integ = Integrator::new(&mesh, SimConfig::for_problem(&p, 4)).unwrap();
        let traj = integ.run(&p).unwrap();
        assert!(traj.interpolate_in_time(0.1).is_err());
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let p = problem::cubic::<f64>();
        let mut c = SimConfig::for_problem(&p, 1);
        assert!(c.validate().is_err());
        c.num_steps = 4;
        assert!(c.validate().is_ok());
        c.alpha = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn energy_matches_closed_forms() {
        let mesh = TriMesh::<f64>::diagonal(3);
        let p = constant_problem(1.5);
        let integ = Integrator::new(&mesh, SimConfig::for_problem(&p, 2)).unwrap();
        let m = VectorField::interpolate(StdArc::clone(&mesh), |_| [0.0, 1.0, 0.0]);
        let f = VectorField::interpolate(StdArc::clone(&mesh), |_| [0.0, 1.5, 0.0]);
        let zero = VectorField::interpolate(StdArc::clone(&mesh), |_| [0.0; 3]);
        assert!(integ.energy(&m, &zero).abs() < 1e-14);
        // Constant m, constant f: E = -(f . m) |Omega| = -1.5.
        assert!((integ.energy(&m, &f) + 1.5).abs() < 1e-13);
        // Affine field, f = 0: E = (lambda^2/2) * exact Dirichlet energy.
        let aff = VectorField::interpolate(StdArc::clone(&mesh), |x| {
            [x[0], 2.0 * x[1], 0.0]
        });
        assert!((integ.energy(&aff, &zero) - 0.5 * 5.0).abs() < 1e-13);
    }
}

//! Experiment orchestration behind the CLI: single runs, the three
//! convergence-study shapes (mesh ladder, time-step ladder, coupled
//! `h ~ C tau^2` ladder), the reference-solution workflow, and the
//! verification sweep. Ladder cells are independent; they are dispatched to
//! a worker pool and collected in ladder order.

pub mod config;
pub mod csvio;
pub mod refio;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::fem::{assemble_p1, diff_norms, ErrorNorms, P1System};
use crate::field::VectorField;
use crate::integrator::{Integrator, SimConfig, StepRecord, Trajectory};
use crate::mesh::TriMesh;
use crate::problem::Problem;
use crate::verify;

use config::{steps_for, MeshFamilyCfg, Mode, RunConfig};
use table::{ConvRow, ConvergenceTable, ScaleVar};

/// CLI-level switches that are not part of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct HarnessOptions {
    pub paper_scale: bool,
    pub deterministic: bool,
    /// Worker cap, usually from `LLG_THREADS`; `None` lets the pool decide.
    pub threads: Option<usize>,
}

impl HarnessOptions {
    fn deterministic_with(&self, cfg: &RunConfig) -> bool {
        self.deterministic || cfg.deterministic
    }
}

fn worker_pool(opts: &HarnessOptions) -> Result<rayon::ThreadPool, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = opts.threads {
        builder = builder.num_threads(k.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

fn build_mesh(family: MeshFamilyCfg, n: usize) -> Arc<TriMesh<f64>> {
    match family {
        MeshFamilyCfg::Crisscross => TriMesh::crisscross(n),
        MeshFamilyCfg::Diagonal => TriMesh::diagonal(n),
    }
}

fn family_name(family: MeshFamilyCfg) -> &'static str {
    match family {
        MeshFamilyCfg::Crisscross => "crisscross",
        MeshFamilyCfg::Diagonal => "diagonal",
    }
}

fn sim_config(cfg: &RunConfig, problem: &Problem<f64>, num_steps: usize) -> SimConfig<f64> {
    let mut sc = SimConfig::for_problem(problem, num_steps);
    if let Some(kind) = cfg.solver {
        sc.solver.kind = kind;
    }
    sc
}

fn run_once(
    problem: &Problem<f64>,
    mesh: &Arc<TriMesh<f64>>,
    sc: SimConfig<f64>,
    deterministic: bool,
) -> Result<(Trajectory<f64>, f64), Error> {
    let t0 = Instant::now();
    let traj = Integrator::new(mesh, sc)?.run(problem)?;
    let wall = if deterministic {
        0.0
    } else {
        t0.elapsed().as_secs_f64()
    };
    Ok((traj, wall))
}

fn row_from_trajectory(
    level: usize,
    mesh: &Arc<TriMesh<f64>>,
    traj: &Trajectory<f64>,
    wall: f64,
) -> ConvRow {
    let last = traj.records.last().expect("a run always has records");
    let (mut min_len, mut max_len) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &traj.records {
        min_len = min_len.min(r.min_len);
        max_len = max_len.max(r.max_len);
    }
    ConvRow {
        level,
        h: mesh.h(),
        tau: traj.tau,
        err_l2_final: last.err_l2,
        err_h1_final: last.err_h1,
        err_l2_max: traj.max_err_l2,
        err_h1_max: traj.max_err_h1,
        rate_l2: None,
        rate_h1: None,
        energy_final: last.energy,
        min_nodal_len: min_len,
        max_nodal_len: max_len,
        eta0: traj.eta0,
        etan: traj.etan,
        wall_time_s: wall,
    }
}

/// Final-time comparison of a candidate state against a reference state on
/// the reference mesh; the candidate is prolonged if it lives on an ancestor
/// mesh.
fn compare_to_reference(
    candidate: &VectorField<f64>,
    reference: &VectorField<f64>,
    ref_sys: &P1System<f64>,
) -> Result<ErrorNorms<f64>, Error> {
    let lifted = if Arc::ptr_eq(candidate.mesh(), reference.mesh()) {
        candidate.clone()
    } else {
        candidate.prolong_to(reference.mesh())?
    };
    Ok(diff_norms(ref_sys, &lifted, reference))
}

/// Output of a single `run` invocation.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<StepRecord<f64>>,
    pub summary: RunSummary,
    pub final_m: VectorField<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub mesh_nodes: usize,
    pub h: f64,
    pub tau: f64,
    pub num_steps: usize,
    pub energy_final: f64,
    pub eta0: f64,
    pub etan: f64,
    pub err_l2_final: Option<f64>,
    pub err_h1_final: Option<f64>,
    pub max_err_l2: Option<f64>,
    pub max_err_h1: Option<f64>,
    pub min_nodal_len: f64,
    pub max_nodal_len: f64,
    pub max_identity_residual: Option<f64>,
    pub max_tangent_residual: f64,
    pub wall_time_s: f64,
}

pub fn run_single(cfg: &RunConfig, opts: &HarnessOptions) -> Result<RunOutput, Error> {
    cfg.validate(Mode::Run, opts.paper_scale)?;
    let problem = cfg.resolved_problem()?;
    let num_steps = steps_for(problem.t_end, cfg.tau.unwrap())?;
    let mesh = build_mesh(cfg.mesh_family, cfg.mesh_level.unwrap());
    let (traj, wall) = run_once(
        &problem,
        &mesh,
        sim_config(cfg, &problem, num_steps),
        opts.deterministic_with(cfg),
    )?;
    let row = row_from_trajectory(0, &mesh, &traj, wall);
    let last = traj.records.last().unwrap();
    let summary = RunSummary {
        problem: problem.name.clone(),
        mesh_nodes: mesh.num_vertices(),
        h: mesh.h(),
        tau: traj.tau,
        num_steps,
        energy_final: last.energy,
        eta0: traj.eta0,
        etan: traj.etan,
        err_l2_final: last.err_l2,
        err_h1_final: last.err_h1,
        max_err_l2: traj.max_err_l2,
        max_err_h1: traj.max_err_h1,
        min_nodal_len: row.min_nodal_len,
        max_nodal_len: row.max_nodal_len,
        max_identity_residual: traj
            .records
            .iter()
            .filter_map(|r| r.identity_residual)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x)))),
        max_tangent_residual: traj
            .records
            .iter()
            .map(|r| r.tangent_residual)
            .fold(0.0, f64::max),
        wall_time_s: wall,
    };
    Ok(RunOutput {
        records: traj.records,
        summary,
        final_m: traj.final_m,
    })
}

/// Fixed time step, mesh ladder. Errors come from the exact solution, or
/// from a space/time-refined reference on a nested bisection ladder when the
/// problem has none.
pub fn conv_space(cfg: &RunConfig, opts: &HarnessOptions) -> Result<ConvergenceTable, Error> {
    cfg.validate(Mode::ConvSpace, opts.paper_scale)?;
    let problem = cfg.resolved_problem()?;
    let tau = cfg.tau.unwrap();
    let num_steps = steps_for(problem.t_end, tau)?;
    let levels = cfg.mesh_levels.clone().unwrap();
    let det = opts.deterministic_with(cfg);

    if problem.exact.is_some() {
        let rows: Result<Vec<ConvRow>, Error> = worker_pool(opts)?.install(|| {
            levels
                .par_iter()
                .enumerate()
                .map(|(i, &n)| {
                    let mesh = build_mesh(cfg.mesh_family, n);
                    let (traj, wall) =
                        run_once(&problem, &mesh, sim_config(cfg, &problem, num_steps), det)?;
                    Ok(row_from_trajectory(i, &mesh, &traj, wall))
                })
                .collect()
        });
        return Ok(ConvergenceTable::new(ScaleVar::H, rows?));
    }

    let rcfg = cfg.reference.as_ref().ok_or_else(|| {
        Error::Config(format!(
            "problem {:?} has no exact solution; conv-space needs a reference section",
            problem.name
        ))
    })?;
    // The reference lives on a bisection descendant of every ladder mesh, so
    // candidate states prolong to it exactly. Two bisection passes halve h;
    // the doubling requirement keeps the declared levels honest.
    if !levels.windows(2).all(|w| w[1] == 2 * w[0]) {
        return Err(Error::Config(
            "reference-based conv-space needs doubling mesh_levels (nested bisection ladder)"
                .to_string(),
        ));
    }
    let mut meshes = vec![build_mesh(cfg.mesh_family, levels[0])];
    for _ in 1..levels.len() {
        meshes.push(meshes.last().unwrap().bisect_times(2)?);
    }
    let ref_mesh = meshes
        .last()
        .unwrap()
        .bisect_times(2 * rcfg.extra_bisections())?;
    let ref_steps = num_steps
        .checked_mul(rcfg.tau_factor())
        .ok_or_else(|| Error::Config("reference step count overflows".to_string()))?;
    let (ref_traj, _) = run_once(&problem, &ref_mesh, sim_config(cfg, &problem, ref_steps), det)?;
    let ref_sys = assemble_p1(&ref_mesh);

    let rows: Result<Vec<ConvRow>, Error> = worker_pool(opts)?.install(|| {
        meshes
            .par_iter()
            .enumerate()
            .map(|(i, mesh)| {
                let (traj, wall) =
                    run_once(&problem, mesh, sim_config(cfg, &problem, num_steps), det)?;
                let err = compare_to_reference(&traj.final_m, &ref_traj.final_m, &ref_sys)?;
                let mut row = row_from_trajectory(i, mesh, &traj, wall);
                row.err_l2_final = Some(err.l2);
                row.err_h1_final = Some(err.h1());
                row.err_l2_max = Some(err.l2);
                row.err_h1_max = Some(err.h1());
                Ok(row)
            })
            .collect()
    });
    Ok(ConvergenceTable::new(ScaleVar::H, rows?))
}

/// Fixed mesh, tau-halving ladder. Without an exact solution the errors are
/// final-time distances to a time-refined reference on the same mesh.
pub fn conv_time(cfg: &RunConfig, opts: &HarnessOptions) -> Result<ConvergenceTable, Error> {
    cfg.validate(Mode::ConvTime, opts.paper_scale)?;
    let problem = cfg.resolved_problem()?;
    let mesh = build_mesh(cfg.mesh_family, cfg.mesh_level.unwrap());
    let taus = cfg.tau_ladder.clone().unwrap();
    let det = opts.deterministic_with(cfg);

    let reference: Option<(Trajectory<f64>, P1System<f64>)> = if problem.exact.is_some() {
        None
    } else {
        let rcfg = cfg.reference.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "problem {:?} has no exact solution; conv-time needs a reference section",
                problem.name
            ))
        })?;
        let finest = steps_for(problem.t_end, *taus.last().unwrap())?;
        let ref_steps = finest
            .checked_mul(rcfg.tau_factor())
            .ok_or_else(|| Error::Config("reference step count overflows".to_string()))?;
        let (traj, _) = run_once(&problem, &mesh, sim_config(cfg, &problem, ref_steps), det)?;
        Some((traj, assemble_p1(&mesh)))
    };

    let rows: Result<Vec<ConvRow>, Error> = worker_pool(opts)?.install(|| {
        taus.par_iter()
            .enumerate()
            .map(|(i, &tau)| {
                let num_steps = steps_for(problem.t_end, tau)?;
                let (traj, wall) =
                    run_once(&problem, &mesh, sim_config(cfg, &problem, num_steps), det)?;
                let mut row = row_from_trajectory(i, &mesh, &traj, wall);
                if let Some((ref_traj, ref_sys)) = &reference {
                    let err = compare_to_reference(&traj.final_m, &ref_traj.final_m, ref_sys)?;
                    row.err_l2_final = Some(err.l2);
                    row.err_h1_final = Some(err.h1());
                    row.err_l2_max = Some(err.l2);
                    row.err_h1_max = Some(err.h1());
                }
                Ok(row)
            })
            .collect()
    });
    Ok(ConvergenceTable::new(ScaleVar::Tau, rows?))
}

/// A coupled ladder refining mesh and time step together; rates are taken
/// against tau. Also reports the CFL-type ratios `tau^4 / h^{1.5}`.
#[derive(Debug, Clone)]
pub struct CoupledOutput {
    pub table: ConvergenceTable,
    pub cfl_ratios: Vec<f64>,
}

pub fn conv_coupled(cfg: &RunConfig, opts: &HarnessOptions) -> Result<CoupledOutput, Error> {
    cfg.validate(Mode::ConvCoupled, opts.paper_scale)?;
    let problem = cfg.resolved_problem()?;
    if problem.exact.is_none() {
        return Err(Error::Config(format!(
            "problem {:?} has no exact solution; the coupled study needs one",
            problem.name
        )));
    }
    let levels = cfg.mesh_levels.clone().unwrap();
    let taus = cfg.tau_ladder.clone().unwrap();
    let det = opts.deterministic_with(cfg);

    let rows: Result<Vec<ConvRow>, Error> = worker_pool(opts)?.install(|| {
        levels
            .par_iter()
            .zip(taus.par_iter())
            .enumerate()
            .map(|(i, (&n, &tau))| {
                let num_steps = steps_for(problem.t_end, tau)?;
                let mesh = build_mesh(cfg.mesh_family, n);
                let (traj, wall) =
                    run_once(&problem, &mesh, sim_config(cfg, &problem, num_steps), det)?;
                Ok(row_from_trajectory(i, &mesh, &traj, wall))
            })
            .collect()
    });
    let table = ConvergenceTable::new(ScaleVar::Tau, rows?);
    let cfl_ratios = table
        .rows
        .iter()
        .map(|r| r.tau.powi(4) / r.h.powf(1.5))
        .collect();
    Ok(CoupledOutput { table, cfl_ratios })
}

/// Reference workflow: compute (or load) a refined reference run, persist
/// its final state, and compare candidate time steps against it.
#[derive(Debug, Clone)]
pub struct ReferenceReport {
    pub data_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub reference_steps: usize,
    pub comparisons: Option<ConvergenceTable>,
}

pub fn reference_workflow(
    cfg: &RunConfig,
    opts: &HarnessOptions,
    out_dir: &Path,
) -> Result<ReferenceReport, Error> {
    cfg.validate(Mode::Reference, opts.paper_scale)?;
    let problem = cfg.resolved_problem()?;
    let det = opts.deterministic_with(cfg);
    let level = cfg.mesh_level.unwrap();
    let base_mesh = build_mesh(cfg.mesh_family, level);
    let default_ref = config::ReferenceConfig {
        tau_factor: None,
        extra_bisections: None,
        path: None,
    };
    let rcfg = cfg.reference.as_ref().unwrap_or(&default_ref);
    let ref_mesh = base_mesh.bisect_times(2 * rcfg.extra_bisections())?;
    let num_steps = steps_for(problem.t_end, cfg.tau.unwrap())?;
    let ref_steps = num_steps
        .checked_mul(rcfg.tau_factor())
        .ok_or_else(|| Error::Config("reference step count overflows".to_string()))?;

    let (ref_field, data_path, sidecar_path) = match &rcfg.path {
        Some(path) => {
            let sidecar = path.with_extension("json");
            let (field, meta) = refio::read_reference(path, &sidecar, &ref_mesh)?;
            if meta.problem != problem.name {
                return Err(Error::Config(format!(
                    "stored reference is for problem {:?}, expected {:?}",
                    meta.problem, problem.name
                )));
            }
            (field, path.clone(), sidecar)
        }
        None => {
            let (traj, _) =
                run_once(&problem, &ref_mesh, sim_config(cfg, &problem, ref_steps), det)?;
            std::fs::create_dir_all(out_dir)?;
            let data_path = out_dir.join("reference.llgf");
            let sidecar_path = out_dir.join("reference.json");
            let meta = refio::ReferenceSidecar {
                problem: problem.name.clone(),
                alpha: problem.alpha,
                lambda_sq: problem.lambda_sq,
                t_end: problem.t_end,
                num_steps: ref_steps,
                mesh_family: family_name(cfg.mesh_family).to_string(),
                mesh_level: level,
                extra_bisections: rcfg.extra_bisections(),
                lineage_hash: ref_mesh.lineage_hash(),
            };
            refio::write_reference(&data_path, &sidecar_path, &traj.final_m, &meta)?;
            (traj.final_m, data_path, sidecar_path)
        }
    };

    let comparisons = match &cfg.tau_ladder {
        None => None,
        Some(taus) => {
            let ref_sys = assemble_p1(&ref_mesh);
            let rows: Result<Vec<ConvRow>, Error> = worker_pool(opts)?.install(|| {
                taus.par_iter()
                    .enumerate()
                    .map(|(i, &tau)| {
                        let n = steps_for(problem.t_end, tau)?;
                        let (traj, wall) =
                            run_once(&problem, &base_mesh, sim_config(cfg, &problem, n), det)?;
                        let err = compare_to_reference(&traj.final_m, &ref_field, &ref_sys)?;
                        let mut row = row_from_trajectory(i, &base_mesh, &traj, wall);
                        row.err_l2_final = Some(err.l2);
                        row.err_h1_final = Some(err.h1());
                        row.err_l2_max = Some(err.l2);
                        row.err_h1_max = Some(err.h1());
                        Ok(row)
                    })
                    .collect()
            });
            Some(ConvergenceTable::new(ScaleVar::Tau, rows?))
        }
    };

    Ok(ReferenceReport {
        data_path,
        sidecar_path,
        reference_steps: ref_steps,
        comparisons,
    })
}

/// One pass/fail line of the verification sweep.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub check: String,
    pub value: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

impl VerifyRow {
    fn new(check: &str, value: f64, min: Option<f64>, max: Option<f64>) -> Self {
        let pass = value.is_finite()
            && min.is_none_or(|m| value >= m)
            && max.is_none_or(|m| value <= m);
        VerifyRow {
            check: check.to_string(),
            value,
            min,
            max,
            pass,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Runs every numerical check of the verification suite at desk scale:
/// analytic constants, operator approximation orders, the normalization
/// Lipschitz bound, and the defect consistency ladders.
pub fn verify_all(opts: &HarnessOptions) -> Result<VerifyReport, Error> {
    let mut rows = Vec::new();

    let constants = verify::bdf2_constants_check::<f64>(50);
    rows.push(VerifyRow::new(
        "g_matrix_eigenvalue_defect",
        constants.eigenvalue_defect,
        None,
        Some(1e-12),
    ));
    rows.push(VerifyRow::new(
        "bdf2_symbol_convolution_defect",
        constants.convolution_defect,
        None,
        Some(1e-14),
    ));

    let proj = verify::projection_approximation_study::<f64>(&[4, 8, 16, 32]);
    rows.push(VerifyRow::new(
        "projection_l2_order",
        proj.l2_order,
        Some(1.8),
        Some(2.2),
    ));
    rows.push(VerifyRow::new(
        "projection_h1_order",
        proj.h1_order,
        Some(0.8),
        Some(1.2),
    ));

    let ritz = verify::ritz_order_study::<f64>(&[4, 8, 16, 32])?;
    rows.push(VerifyRow::new(
        "ritz_h1_order",
        ritz.h1_order,
        Some(0.85),
        Some(1.15),
    ));
    rows.push(VerifyRow::new(
        "ritz_mean_preservation",
        ritz.max_mean_error,
        None,
        Some(1e-11),
    ));
    rows.push(VerifyRow::new(
        "ritz_unit_length_order",
        ritz.unit_defect_order,
        Some(0.7),
        None,
    ));

    let lipschitz =
        verify::normalization_lipschitz(&TriMesh::<f64>::crisscross(5), 100, 0.5, 2.0, 7);
    rows.push(VerifyRow::new(
        "normalization_lipschitz",
        lipschitz,
        None,
        Some(4.0),
    ));

    let cubic = crate::problem::cubic::<f64>();
    let pool = worker_pool(opts)?;

    // Defect in h: tau frozen at 1.25e-4. The tau^2 branch of the defect
    // sits near 1e-4 there, two decades under the spatial branch of the
    // finest mesh. Defect evaluation only touches three time levels, so the
    // large step count costs nothing.
    let h_cells: Result<Vec<(f64, f64)>, Error> = pool.install(|| {
        [8usize, 16, 32]
            .par_iter()
            .map(|&n| {
                let mesh = TriMesh::<f64>::crisscross(n);
                let s = verify::worst_defect(&cubic, &mesh, 1600)?;
                Ok((s.h, s.norm))
            })
            .collect()
    });
    rows.push(VerifyRow::new(
        "defect_order_in_h",
        verify::fit_order(&h_cells?),
        Some(0.9),
        None,
    ));

    // Defect in tau: mesh frozen at n = 64, taus inside the asymptotic
    // window (the solution turns by omega tau < 1 per step) but still far
    // above the spatial floor.
    let tau_mesh = TriMesh::<f64>::crisscross(64);
    let tau_cells: Result<Vec<(f64, f64)>, Error> = pool.install(|| {
        [8usize, 16, 32]
            .par_iter()
            .map(|&n| {
                let s = verify::worst_defect(&cubic, &tau_mesh, n)?;
                Ok((s.tau, s.norm))
            })
            .collect()
    });
    rows.push(VerifyRow::new(
        "defect_order_in_tau",
        verify::fit_order(&tau_cells?),
        Some(1.7),
        None,
    ));

    let stationary = crate::problem::stationary::<f64>();
    let s = verify::compute_defect(&stationary, &TriMesh::<f64>::crisscross(6), 10, 5)?;
    rows.push(VerifyRow::new(
        "stationary_defect",
        s.norm,
        None,
        Some(1e-12),
    ));

    Ok(VerifyReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> HarnessOptions {
        HarnessOptions {
            paper_scale: false,
            deterministic: true,
            threads: Some(1),
        }
    }

    fn cfg_json(json: &str) -> RunConfig {
        RunConfig::from_json(json).unwrap()
    }

    #[test]
    fn conv_space_on_the_cubic_problem_fills_every_column() {
        // tau small enough that the spatial branch dominates on both meshes.
        let cfg = cfg_json(r#"{ "problem": "cubic", "mesh_levels": [4, 8], "tau": 0.005 }"#);
        let table = conv_space(&cfg, &opts()).unwrap();
        assert_eq!(table.rows.len(), 2);
        let (a, b) = (&table.rows[0], &table.rows[1]);
        assert!((a.h / b.h - 2.0).abs() < 1e-12, "h should halve");
        assert!(a.err_h1_max.unwrap() > b.err_h1_max.unwrap());
        assert!(b.rate_h1.is_some() && a.rate_h1.is_none());
        assert!(b.min_nodal_len >= 1.0 - 1e-10);
        assert_eq!(b.wall_time_s, 0.0, "deterministic mode zeroes wall time");
    }

    #[test]
    fn conv_time_on_the_stationary_problem_reports_blank_rates() {
        let cfg = cfg_json(
            r#"{ "problem": "stationary", "mesh_level": 4, "tau_ladder": [0.02, 0.01] }"#,
        );
        let table = conv_time(&cfg, &opts()).unwrap();
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            assert!(row.err_h1_max.unwrap() < 1e-12, "stationary errors vanish");
            assert!(row.rate_h1.is_none() && row.rate_l2.is_none());
        }
    }

    #[test]
    fn coupled_rows_match_the_corresponding_single_runs() {
        let cfg = cfg_json(
            r#"{ "problem": "cubic", "mesh_levels": [4, 8], "tau_ladder": [0.04, 0.02] }"#,
        );
        let out = conv_coupled(&cfg, &opts()).unwrap();
        assert_eq!(out.cfl_ratios.len(), 2);
        assert!(out.cfl_ratios[0] > out.cfl_ratios[1]);

        let single = cfg_json(r#"{ "problem": "cubic", "mesh_level": 8, "tau": 0.02 }"#);
        let run = run_single(&single, &opts()).unwrap();
        let row = &out.table.rows[1];
        assert_eq!(row.err_h1_max, run.summary.max_err_h1);
        assert_eq!(row.energy_final, run.summary.energy_final);
    }

    #[test]
    fn reference_self_comparison_is_exact_zero() {
        // tau_factor 1: the reference is the candidate run itself.
        let dir = tempfile::tempdir().unwrap();
        let cfg = cfg_json(
            r#"{ "problem": "radial", "mesh_level": 4, "tau": 0.02,
                 "tau_ladder": [0.02],
                 "reference": { "tau_factor": 1 } }"#,
        );
        let report = reference_workflow(&cfg, &opts(), dir.path()).unwrap();
        let table = report.comparisons.unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].err_h1_final.unwrap(), 0.0);
        assert_eq!(table.rows[0].err_l2_final.unwrap(), 0.0);
        assert!(report.data_path.exists() && report.sidecar_path.exists());
    }

    #[test]
    fn prolonged_candidates_compare_without_spurious_error() {
        // A coarse field prolonged to the fine mesh, compared against its
        // own prolongation through the reference pipeline: exactly zero.
        let coarse = TriMesh::<f64>::crisscross(3);
        let fine = coarse.bisect_times(2).unwrap();
        let cand = VectorField::interpolate(Arc::clone(&coarse), |x| {
            [x[0], 1.0 - x[1], 0.25 + x[0] * x[1]]
        });
        let reference = cand.prolong_to(&fine).unwrap();
        let sys = assemble_p1(&fine);
        let err = compare_to_reference(&cand, &reference, &sys).unwrap();
        assert!(err.l2 <= 1e-14 && err.h1_semi <= 1e-13, "{err:?}");
    }

    #[test]
    fn reference_route_for_conv_time_produces_decaying_errors() {
        let cfg = cfg_json(
            r#"{ "problem": "radial", "mesh_level": 6, "tau_ladder": [0.05, 0.025, 0.0125],
                 "reference": { "tau_factor": 8 } }"#,
        );
        let table = conv_time(&cfg, &opts()).unwrap();
        let errs: Vec<f64> = table.rows.iter().map(|r| r.err_h1_final.unwrap()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(table.rows[2].rate_h1.unwrap() > 1.0, "{:?}", table.rows[2]);
    }

    #[test]
    fn verify_rows_encode_two_sided_bounds() {
        let r = VerifyRow::new("x", 1.95, Some(1.8), Some(2.2));
        assert!(r.pass);
        let r = VerifyRow::new("x", 2.5, Some(1.8), Some(2.2));
        assert!(!r.pass);
        let r = VerifyRow::new("x", f64::NAN, None, None);
        assert!(!r.pass, "non-finite values never pass");
    }
}

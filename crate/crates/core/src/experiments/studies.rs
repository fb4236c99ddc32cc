//! Counterexample studies: projection errors, scaling factors and ROM ratios.

use super::config::{Example, Study, StudyConfig};
use super::report::{Cell, TableReport};
use crate::error::{PodError, Result};
use crate::fem1d::{Mesh1D, SpaceTag};
use crate::pod::{compute_pod, PodBasis};
use crate::projections::{
    assumption_ratio, assumption_ratio_at, pointwise_errors, ritz_defect_max, tail_sum, ProjectorKind,
};
use crate::rom::{assemble_rom, cn_solve, rom_bound, rom_errors, rom_initial_condition, RatioVariant, RomErrorReport};
use crate::snapshots::{cex1, cex2, generate_snapshots, Cex1Params, Cex2Params, ManufacturedSolution};

pub(crate) fn case_name(dq: bool) -> &'static str {
    if dq {
        "dq"
    } else {
        "nodq"
    }
}

/// TOML provenance: a `[run]` table with `notes` plus the full `[config]`.
pub(crate) fn provenance(study: Study, table: &str, cfg: &StudyConfig, notes: &[(&str, String)]) -> String {
    let mut run = toml::Table::new();
    run.insert("study".into(), study.name().into());
    run.insert("table".into(), table.into());
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    for (k, v) in notes {
        run.insert((*k).into(), v.clone().into());
    }
    let mut root = toml::Table::new();
    root.insert("run".into(), run.into());
    // where results were written does not affect them
    let cfg = StudyConfig {
        output: None,
        ..cfg.clone()
    };
    root.insert("config".into(), toml::Value::try_from(&cfg).expect("config serializes"));
    toml::to_string(&root).expect("provenance serializes")
}

fn require(cfg: &StudyConfig, example: Example) -> Result<()> {
    if cfg.example != example {
        return Err(PodError::InvalidParameter(format!(
            "study needs example = {example:?}, config has {:?}",
            cfg.example
        )));
    }
    cfg.validate()
}

struct Run {
    basis: PodBasis,
    snaps: crate::snapshots::SnapshotSet,
    n: usize,
}

fn run_pod(sol: &ManufacturedSolution, mesh: &Mesh1D, cfg: &StudyConfig, dt: f64, dq: bool) -> Result<Run> {
    let n = cfg.n_steps(dt)?;
    let snaps = generate_snapshots(sol, mesh, cfg.t_final, n, dq)?;
    let basis = compute_pod(&snaps, cfg.space)?;
    Ok(Run { basis, snaps, n })
}

/// Runs the ROM of rank `r` for `steps` steps of the basis time step.
fn run_rom(
    run: &Run,
    sol: &ManufacturedSolution,
    mesh: &Mesh1D,
    cfg: &StudyConfig,
    r: usize,
    steps: usize,
) -> Result<RomErrorReport> {
    let dq = run.basis.has_dq();
    let model = assemble_rom(&run.basis, r, cfg.nu, sol, mesh)?;
    let a0 = rom_initial_condition(&run.basis, r, &sol.interpolate_u(mesh, 0.0)?, cfg.ic_for(dq))?;
    let traj = cn_solve(&model, &a0, run.basis.dt(), steps)?;
    rom_errors(&traj, sol, mesh, SpaceTag::L2)
}

fn variant(dq: bool) -> RatioVariant {
    if dq {
        RatioVariant::Dq
    } else {
        RatioVariant::NoDq
    }
}

/// Per-step projection errors at `pointwise_dt` and scaling factors over `dt_list`, with `r = N`.
pub fn study_cex1_projection(cfg: &StudyConfig) -> Result<Vec<TableReport>> {
    require(cfg, Example::Cex1)?;
    let mesh = cfg.mesh()?;
    let sol = cex1(Cex1Params { k: cfg.k, nu: cfg.nu })?;
    let w = cfg.space;
    let note = || vec![("rank_rule", "r = N".to_string())];
    let mut out = Vec::new();

    for dq in cfg.pointwise_dt.map(|_| cfg.cases()).unwrap_or_default() {
        let label = format!("cex1_pointwise_{}", case_name(dq));
        let run = run_pod(&sol, &mesh, cfg, cfg.pointwise_dt.expect("checked"), dq)?;
        let series = pointwise_errors(&run.snaps, &run.basis, run.n, w, ProjectorKind::PodOrthogonal)?;
        let mut t = TableReport::new(
            &label,
            &["n", "t", "error"],
            provenance(Study::Cex1Projection, &label, cfg, &note()),
        );
        for (n, e) in series.errors.iter().enumerate() {
            t.push(vec![n.into(), run.snaps.time(n).into(), (*e).into()])?;
        }
        out.push(t);
    }

    for dq in cfg.cases() {
        let label = format!("cex1_scaling_{}", case_name(dq));
        let mut t = TableReport::new(
            &label,
            &["dt", "N", "r", "max_error_sq", "tail", "C_proj"],
            provenance(Study::Cex1Projection, &label, cfg, &note()),
        );
        for &dt in &cfg.dt_list {
            let run = run_pod(&sol, &mesh, cfg, dt, dq)?;
            let r = run.n;
            let series = pointwise_errors(&run.snaps, &run.basis, r, w, ProjectorKind::PodOrthogonal)?;
            let tail = tail_sum(&run.basis, r, w, ProjectorKind::PodOrthogonal)?;
            t.push(vec![
                dt.into(),
                run.n.into(),
                r.into(),
                series.max().powi(2).into(),
                tail.into(),
                assumption_ratio(&series, &run.basis, r, w)?.into(),
            ])?;
        }
        out.push(t);
    }
    Ok(out)
}

/// ROM ratios over `dt_list` with `r = N`.
pub fn study_cex1_rom(cfg: &StudyConfig) -> Result<Vec<TableReport>> {
    require(cfg, Example::Cex1)?;
    let mesh = cfg.mesh()?;
    let sol = cex1(Cex1Params { k: cfg.k, nu: cfg.nu })?;
    let mut out = Vec::new();
    for dq in cfg.cases() {
        let label = format!("cex1_rom_k{}_{}", cfg.k, case_name(dq));
        let notes = [
            ("rank_rule", "r = N".to_string()),
            ("initial_condition", format!("{:?}", cfg.ic_for(dq))),
        ];
        let mut t = TableReport::new(
            &label,
            &[
                "dt",
                "N",
                "r",
                "max_error_sq",
                "max_grad_error_sq",
                "bound",
                "C_rom",
                "ritz_defect_max",
            ],
            provenance(Study::Cex1Rom, &label, cfg, &notes),
        );
        for &dt in &cfg.dt_list {
            let run = run_pod(&sol, &mesh, cfg, dt, dq)?;
            let r = run.n;
            let rep = run_rom(&run, &sol, &mesh, cfg, r, run.n)?;
            let bound = rom_bound(&run.basis, r, dt, variant(dq))?;
            t.push(vec![
                dt.into(),
                run.n.into(),
                r.into(),
                rep.max_l2_sq().into(),
                rep.max_h10_sq().into(),
                bound.into(),
                (rep.max_l2_sq() / bound).into(),
                ritz_defect_max(&run.basis, r)?.into(),
            ])?;
        }
        out.push(t);
    }
    Ok(out)
}

/// Projection ratios at `r = proj_r` over `dt_list`, and ROM ratios over `r_list` at `rom_dt`.
pub fn study_cex2(cfg: &StudyConfig) -> Result<Vec<TableReport>> {
    require(cfg, Example::Cex2)?;
    let mesh = cfg.mesh()?;
    let params = Cex2Params {
        k: cfg.k,
        alpha: cfg.alpha,
        delta: cfg.delta,
        nu: cfg.nu,
    };
    let w = cfg.space;
    let r = cfg.proj_r;
    let mut out = Vec::new();

    for dq in cfg.cases() {
        let label = format!("cex2_projection_{}", case_name(dq));
        let (headers, note): (&[&str], &str) = if dq {
            (
                &["dt", "N", "r", "C_proj", "C_proj_at_r"],
                "C_proj is the max over n; C_proj_at_r takes n = r",
            )
        } else {
            (
                &["dt", "N", "r", "gamma", "C_proj", "ratio_max", "lower_bound"],
                "C_proj takes n = r and divides by N+1; ratio_max is the max over n",
            )
        };
        let mut t = TableReport::new(
            &label,
            headers,
            provenance(Study::Cex2, &label, cfg, &[("ratio", note.into())]),
        );
        for &dt in &cfg.dt_list {
            let sol = cex2(params, dt)?;
            let run = run_pod(&sol, &mesh, cfg, dt, dq)?;
            let series = pointwise_errors(&run.snaps, &run.basis, r, w, ProjectorKind::PodOrthogonal)?;
            let max = assumption_ratio(&series, &run.basis, r, w)?;
            let at_r = assumption_ratio_at(&series, &run.basis, r, w, r)?;
            let row: Vec<Cell> = if dq {
                vec![dt.into(), run.n.into(), r.into(), max.into(), at_r.into()]
            } else {
                let gamma = params.gamma(dt);
                vec![
                    dt.into(),
                    run.n.into(),
                    r.into(),
                    gamma.into(),
                    (at_r / (run.n + 1) as f64).into(),
                    max.into(),
                    (gamma.min(1.0) / 2.0).into(),
                ]
            };
            t.push(row)?;
        }
        out.push(t);
    }

    let sol = cex2(params, cfg.rom_dt)?;
    let steps = (cfg.rom_t_final / cfg.rom_dt).round() as usize;
    for dq in cfg.cases() {
        let label = format!("cex2_rom_{}", case_name(dq));
        let notes = [
            (
                "horizon",
                format!("basis on [0, {}], errors on [0, {}]", cfg.t_final, cfg.rom_t_final),
            ),
            ("initial_condition", format!("{:?}", cfg.ic_for(dq))),
        ];
        let mut t = TableReport::new(
            &label,
            &["r", "dt", "N", "steps", "max_error_sq", "bound", "C_rom"],
            provenance(Study::Cex2, &label, cfg, &notes),
        );
        let run = run_pod(&sol, &mesh, cfg, cfg.rom_dt, dq)?;
        for &r in &cfg.r_list {
            let rep = run_rom(&run, &sol, &mesh, cfg, r, steps)?;
            let bound = rom_bound(&run.basis, r, cfg.rom_dt, variant(dq))?;
            t.push(vec![
                r.into(),
                cfg.rom_dt.into(),
                run.n.into(),
                steps.into(),
                rep.max_l2_sq().into(),
                bound.into(),
                (rep.max_l2_sq() / bound).into(),
            ])?;
        }
        out.push(t);
    }
    Ok(out)
}

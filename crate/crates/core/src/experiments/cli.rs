//! Command line interface of the `podrom` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::config::{parse_rank_list, parse_real, parse_real_list, Example, Format, Study, StudyConfig};
use super::props::{run_property_suite, suite_passed};
use super::report::{emit, emit_all, write_reports, TableReport};
use super::studies::{study_cex1_projection, study_cex1_rom, study_cex2};
use crate::error::{PodError, Result};
use crate::fem1d::SpaceTag;
use crate::pod::compute_pod;
use crate::rom::{assemble_rom, cn_solve, rom_errors, rom_initial_condition, IcKind};
use crate::snapshots::{cex1, cex2, generate_snapshots, Cex1Params, Cex2Params, ManufacturedSolution};

#[derive(Debug, Parser)]
#[command(
    name = "podrom",
    version,
    about = "POD reduced-order model studies for the 1D heat equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce the tables of one counterexample study.
    Study {
        #[arg(value_enum)]
        which: StudyName,
        #[command(flatten)]
        opts: StudyArgs,
    },
    /// Run the property suite.
    Props {
        #[command(flatten)]
        opts: StudyArgs,
    },
    /// Export snapshots and the POD basis for one time step.
    Basis {
        #[command(flatten)]
        opts: StudyArgs,
    },
    /// Ad-hoc ROM runs.
    Rom {
        #[command(subcommand)]
        cmd: RomCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum RomCommand {
    /// Run one ROM and export its coefficients and errors.
    Run {
        #[command(flatten)]
        opts: StudyArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StudyName {
    #[value(name = "cex1-proj")]
    Cex1Proj,
    #[value(name = "cex1-rom")]
    Cex1Rom,
    Cex2,
}

impl StudyName {
    pub fn study(self) -> Study {
        match self {
            StudyName::Cex1Proj => Study::Cex1Projection,
            StudyName::Cex1Rom => Study::Cex1Rom,
            StudyName::Cex2 => Study::Cex2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Args)]
pub struct StudyArgs {
    /// TOML file with StudyConfig keys; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Time steps, comma separated (`1/4,1/8` or `0.25,0.125`).
    #[arg(long)]
    pub dt: Option<String>,
    /// Ranks, comma separated; `a..b` is inclusive.
    #[arg(long)]
    pub r: Option<String>,
    /// Only the DQ case.
    #[arg(long, conflicts_with = "no_dq")]
    pub dq: bool,
    /// Only the noDQ case.
    #[arg(long)]
    pub no_dq: bool,
    /// POD space: l2 or h1.
    #[arg(long)]
    pub space: Option<SpaceTag>,
    /// Mesh width, e.g. `1/4096`.
    #[arg(long)]
    pub h: Option<String>,
    /// Spatial frequency parameter of the counterexample
    #[arg(long)]
    pub k: Option<u32>,
    /// Seed of the random property families
    #[arg(long)]
    pub seed: Option<u64>,
    /// ROM initial condition: l2 or ritz.
    #[arg(long)]
    pub ic: Option<IcKind>,
    /// cex1 or cex2 (basis and rom run only).
    #[arg(long)]
    pub example: Option<String>,
    /// Output directory; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or md
    #[arg(long)]
    pub format: Option<Format>,
}

fn parse_example(s: &str) -> Result<Example> {
    match s.to_ascii_lowercase().as_str() {
        "cex1" => Ok(Example::Cex1),
        "cex2" => Ok(Example::Cex2),
        other => Err(PodError::Parse(format!(
            "unknown example '{other}' (expected cex1 or cex2)"
        ))),
    }
}

/// Defaults for `study`, overlaid with `--config`, then with the remaining flags.
pub fn resolve(study: Study, args: &StudyArgs) -> Result<StudyConfig> {
    let mut cfg = StudyConfig::defaults(study);
    if let Some(path) = &args.config {
        cfg = StudyConfig::from_toml_file(path, &cfg)?;
    }
    if let Some(dt) = &args.dt {
        cfg.dt_list = parse_real_list(dt)?;
    }
    if let Some(r) = &args.r {
        cfg.r_list = parse_rank_list(r)?;
    }
    if args.dq {
        cfg.dq = Some(true);
    }
    if args.no_dq {
        cfg.dq = Some(false);
    }
    if let Some(s) = args.space {
        cfg.space = s;
    }
    if let Some(h) = &args.h {
        cfg.h = parse_real(h)?;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(ic) = args.ic {
        cfg.ic_kind = Some(ic);
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Successful outcome of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    PropertyFailure,
}

/// Process exit code: 0 success, 1 validation error, 2 numerical failure, 3 property failure.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::PropertyFailure) => 3,
        Err(e) if e.is_validation() => 1,
        Err(_) => 2,
    }
}

fn publish(reports: &[TableReport], cfg: &StudyConfig, out: &mut dyn Write) -> Result<()> {
    match &cfg.output {
        Some(dir) => {
            for p in write_reports(reports, dir, cfg.format)? {
                writeln!(out, "{}", p.display())?;
            }
            Ok(())
        }
        None => emit_all(reports, cfg.format, out),
    }
}

fn solution(cfg: &StudyConfig, dt: f64) -> Result<ManufacturedSolution> {
    match cfg.example {
        Example::Cex1 => cex1(Cex1Params { k: cfg.k, nu: cfg.nu }),
        Example::Cex2 => cex2(
            Cex2Params {
                k: cfg.k,
                alpha: cfg.alpha,
                delta: cfg.delta,
                nu: cfg.nu,
            },
            dt,
        ),
        Example::Custom => Err(PodError::InvalidParameter(
            "custom examples are only available through the library".into(),
        )),
    }
}

fn adhoc_config(opts: &StudyArgs) -> Result<StudyConfig> {
    let study = match opts.example.as_deref().map(parse_example).transpose()? {
        Some(Example::Cex2) => Study::Cex2,
        _ => Study::Cex1Rom,
    };
    resolve(study, opts)
}

fn output_file(dir: &Path, name: &str) -> Result<std::fs::File> {
    std::fs::create_dir_all(dir)?;
    Ok(std::fs::File::create(dir.join(name))?)
}

fn basis_command(opts: &StudyArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = adhoc_config(opts)?;
    let dt = cfg.dt_list[0];
    let mesh = cfg.mesh()?;
    let sol = solution(&cfg, dt)?;
    let snaps = generate_snapshots(&sol, &mesh, cfg.t_final, cfg.n_steps(dt)?, cfg.dq.unwrap_or(false))?;
    let basis = compute_pod(&snaps, cfg.space)?;
    match &cfg.output {
        Some(dir) => {
            snaps.write_csv(output_file(dir, "snapshots.csv")?)?;
            basis.write_csv(output_file(dir, "basis.csv")?)?;
            std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
            writeln!(out, "{}", dir.display())?;
        }
        None => basis.write_csv(out)?,
    }
    Ok(())
}

fn rom_command(opts: &StudyArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = adhoc_config(opts)?;
    let dt = cfg.dt_list[0];
    let mesh = cfg.mesh()?;
    let sol = solution(&cfg, dt)?;
    let dq = cfg.dq.unwrap_or(false);
    let n = cfg.n_steps(dt)?;
    let snaps = generate_snapshots(&sol, &mesh, cfg.t_final, n, dq)?;
    let basis = compute_pod(&snaps, cfg.space)?;
    let r = cfg.r_list.first().copied().unwrap_or(n.min(basis.rank()));
    let model = assemble_rom(&basis, r, cfg.nu, &sol, &mesh)?;
    let a0 = rom_initial_condition(&basis, r, &sol.interpolate_u(&mesh, 0.0)?, cfg.ic_for(dq))?;
    let traj = cn_solve(&model, &a0, dt, n)?;
    let rep = rom_errors(&traj, &sol, &mesh, SpaceTag::L2)?;
    let mut table = TableReport::new("rom_errors", &["n", "t", "error_l2", "error_h10"], cfg.to_toml());
    for (i, (e0, e1)) in rep.per_step_l2.iter().zip(&rep.per_step_h10).enumerate() {
        let step = i + 1;
        table.push(vec![step.into(), (step as f64 * dt).into(), (*e0).into(), (*e1).into()])?;
    }
    match &cfg.output {
        Some(dir) => {
            traj.write_csv(output_file(dir, "rom_coefficients.csv")?)?;
            write_reports(&[table], dir, cfg.format)?;
            writeln!(out, "{}", dir.display())?;
        }
        None => emit(&table, cfg.format, out)?,
    }
    Ok(())
}

/// Executes a parsed command line, writing tables or file names to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::Study { which, opts } => {
            let cfg = resolve(which.study(), opts)?;
            let reports = match which {
                StudyName::Cex1Proj => study_cex1_projection(&cfg)?,
                StudyName::Cex1Rom => study_cex1_rom(&cfg)?,
                StudyName::Cex2 => study_cex2(&cfg)?,
            };
            publish(&reports, &cfg, out)?;
            Ok(Outcome::Success)
        }
        Command::Props { opts } => {
            let cfg = resolve(Study::Props, opts)?;
            let report = run_property_suite(&cfg)?;
            publish(std::slice::from_ref(&report), &cfg, out)?;
            Ok(if suite_passed(&report) {
                Outcome::Success
            } else {
                Outcome::PropertyFailure
            })
        }
        Command::Basis { opts } => basis_command(opts, out).map(|_| Outcome::Success),
        Command::Rom {
            cmd: RomCommand::Run { opts },
        } => rom_command(opts, out).map(|_| Outcome::Success),
    }
}

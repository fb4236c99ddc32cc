//! Property suite: exact identities, inequalities and time-stepping checks with
//! their worst observed constants.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{Study, StudyConfig};
use super::report::TableReport;
use super::studies::{case_name, provenance};
use crate::error::Result;
use crate::fem1d::{FeSpace, Mesh1D, SpaceTag};
use crate::pod::{compute_pod, total_error_identity_sweep, PodBasis};
use crate::projections::{
    assumption_ratio, optimality_quantities, pointwise_errors, sobolev_constant, sobolev_random_suite, tail_sum,
    uniform_bound_check, uniform_bound_random_suite, ProjectorKind,
};
use crate::rom::{assemble_rom, cn_solve, rom_errors, rom_initial_condition, IcKind};
use crate::snapshots::{cex1, cex2, generate_snapshots, Cex1Params, Cex2Params, ManufacturedSolution, SnapshotSet};

const SPACES: [SpaceTag; 2] = [SpaceTag::L2, SpaceTag::H10];
const KINDS: [ProjectorKind; 3] = [ProjectorKind::PodOrthogonal, ProjectorKind::Ritz, ProjectorKind::L2];

pub const IDENTITY_TOL: f64 = 1e-8;
pub const PROP34_TOL: f64 = 0.01;
pub const WORST_CASE_TOL: f64 = 1e-8;
pub const OPTIMALITY_TOL: f64 = 1e-10;
pub const CN_ORDER_MIN: f64 = 1.9;

/// One snapshot collection with its bases in both spaces.
struct Family {
    example: &'static str,
    dq: bool,
    snaps: SnapshotSet,
    bases: Vec<PodBasis>,
}

fn families(cfg: &StudyConfig, mesh: &Mesh1D) -> Result<Vec<Family>> {
    let mut out = Vec::new();
    let c1 = cex1(Cex1Params { k: cfg.k, nu: cfg.nu })?;
    let d2 = StudyConfig::defaults(Study::Cex2);
    let p2 = Cex2Params {
        k: d2.k,
        alpha: cfg.alpha,
        delta: cfg.delta,
        nu: cfg.nu,
    };
    let mut runs: Vec<(&'static str, ManufacturedSolution, f64, usize)> = Vec::new();
    for &dt in &cfg.dt_list {
        runs.push(("cex1", c1.clone(), cfg.t_final, cfg.n_steps(dt)?));
    }
    for &dt in &d2.dt_list {
        runs.push(("cex2", cex2(p2, dt)?, d2.t_final, d2.n_steps(dt)?));
    }
    for (example, sol, t, n) in runs {
        for dq in [false, true] {
            let snaps = generate_snapshots(&sol, mesh, t, n, dq)?;
            let bases = SPACES
                .iter()
                .map(|&s| compute_pod(&snaps, s))
                .collect::<Result<Vec<_>>>()?;
            out.push(Family {
                example,
                dq,
                snaps,
                bases,
            });
        }
    }
    Ok(out)
}

/// Running worst case of one property over many cases.
struct Tally {
    cases: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            cases: 0,
            violations: 0,
            worst: 0.0,
        }
    }

    /// Records `value`, which must not exceed `limit`.
    fn at_most(&mut self, value: f64, limit: f64) {
        self.cases += 1;
        if !(value <= limit) {
            self.violations += 1;
        }
        self.worst = self.worst.max(value);
    }
}

struct Suite {
    report: TableReport,
}

impl Suite {
    fn row(&mut self, property: &str, configuration: &str, cases: usize, violations: usize, worst: f64, limit: f64) {
        let pass = violations == 0 && cases > 0;
        self.report
            .push(vec![
                property.into(),
                configuration.into(),
                cases.into(),
                violations.into(),
                worst.into(),
                limit.into(),
                pass.into(),
            ])
            .expect("fixed width");
    }

    fn tally(&mut self, property: &str, configuration: &str, t: &Tally, limit: f64) {
        self.row(property, configuration, t.cases, t.violations, t.worst, limit);
    }

    fn failed(&mut self, property: &str, configuration: &str, err: &crate::PodError) {
        self.row(property, &format!("{configuration}: {err}"), 0, 1, f64::NAN, f64::NAN);
    }

    fn record(&mut self, property: &str, configuration: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.failed(property, configuration, &e);
        }
    }
}

/// Relative error of an identity, floored at `1e-14` of the total energy.
fn identity_error(lhs: f64, rhs: f64, energy: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-14 * energy)
}

fn identities(suite: &mut Suite, fams: &[Family]) {
    for example in ["cex1", "cex2"] {
        for dq in [false, true] {
            let conf = format!("{example} {}", case_name(dq));
            suite.record("total error identity", &conf, |s| {
                let mut t = Tally::new();
                let fe = FeSpace::new(*fams[0].snaps.mesh());
                for f in fams.iter().filter(|f| f.example == example && f.dq == dq) {
                    let cols = f.snaps.collection();
                    for basis in &f.bases {
                        for w in SPACES {
                            let energy =
                                f.snaps.weight() * cols.column_iter().map(|c| fe.norm_sq(c.as_slice(), w)).sum::<f64>();
                            for kind in KINDS {
                                for (l, r) in total_error_identity_sweep(&f.snaps, basis, w, kind)? {
                                    t.at_most(identity_error(l, r, energy), IDENTITY_TOL);
                                }
                            }
                        }
                    }
                }
                s.tally("total error identity", &conf, &t, IDENTITY_TOL);
                Ok(())
            });
        }
    }
}

fn uniform_bounds(suite: &mut Suite, fams: &[Family], cfg: &StudyConfig, fe: &FeSpace) {
    for example in ["cex1", "cex2"] {
        suite.record("uniform DQ bound", example, |s| {
            let mut t = Tally::new();
            let mut limit = 0.0f64;
            for f in fams.iter().filter(|f| f.example == example && f.dq) {
                let c = sobolev_constant(f.snaps.t_final());
                limit = limit.max(c);
                for basis in &f.bases {
                    for w in SPACES {
                        let o = uniform_bound_check(&f.snaps, basis, w)?;
                        t.cases += o.cases;
                        t.violations += o.violations;
                        t.worst = t.worst.max(o.worst_ratio * c);
                    }
                }
            }
            s.tally("uniform DQ bound", &format!("{example} (observed constant)"), &t, limit);
            Ok(())
        });
    }
    suite.record("uniform DQ bound", "random families", |s| {
        let o = uniform_bound_random_suite(fe, cfg.random_families, cfg.seed)?;
        s.row(
            "uniform DQ bound",
            "random families (ratio to bound)",
            o.cases,
            o.violations,
            o.worst_ratio,
            1.0,
        );
        Ok(())
    });
}

fn constructed_data(suite: &mut Suite, fams: &[Family]) {
    suite.record("last-step noDQ error", "cex1 nodq", |s| {
        let mut t = Tally::new();
        for f in fams.iter().filter(|f| f.example == "cex1" && !f.dq) {
            let n = f.snaps.n_steps();
            for basis in f.bases.iter().filter(|b| b.space() == SpaceTag::L2) {
                let w = basis.space();
                let e = pointwise_errors(&f.snaps, basis, n, w, ProjectorKind::PodOrthogonal)?.errors[n];
                let rhs = (n + 1) as f64 * tail_sum(basis, n, w, ProjectorKind::PodOrthogonal)?;
                t.at_most((e * e / rhs - 1.0).abs(), PROP34_TOL);
            }
        }
        s.tally(
            "last-step noDQ error",
            "cex1 nodq, L2 basis, r = N (relative deviation)",
            &t,
            PROP34_TOL,
        );
        Ok(())
    });

    suite.record("worst-case noDQ ratio", "nodq", |s| {
        let mut t = Tally::new();
        for f in fams.iter().filter(|f| !f.dq) {
            let np1 = (f.snaps.n_steps() + 1) as f64;
            for basis in &f.bases {
                for w in SPACES {
                    for r in 1..basis.rank() {
                        let series = pointwise_errors(&f.snaps, basis, r, w, ProjectorKind::PodOrthogonal)?;
                        t.at_most(assumption_ratio(&series, basis, r, w)? / np1, 1.0 + WORST_CASE_TOL);
                    }
                }
            }
        }
        s.tally(
            "worst-case noDQ ratio",
            "cex1+cex2 nodq (ratio / (N+1))",
            &t,
            1.0 + WORST_CASE_TOL,
        );
        Ok(())
    });
}

fn optimality(suite: &mut Suite, fams: &[Family]) {
    suite.record("optimality", "all", |s| {
        let mut ordering = Tally::new();
        let mut equal = Tally::new();
        let mut star = Tally::new();
        let mut star_limit = 0.0f64;
        for f in fams {
            let c = sobolev_constant(f.snaps.t_final());
            for basis in &f.bases {
                for w in SPACES {
                    for r in 1..basis.rank() {
                        let q = optimality_quantities(&f.snaps, basis, r, w)?;
                        ordering.at_most(q.lambda_ii / q.lambda_i, 1.0 + OPTIMALITY_TOL);
                        if w == basis.space() {
                            equal.at_most((q.lambda_i - q.lambda_ii).abs() / q.lambda_i, OPTIMALITY_TOL);
                        }
                        if f.dq {
                            star_limit = star_limit.max(c);
                            star.at_most(q.lambda_star / q.lambda_ii, c * (1.0 + OPTIMALITY_TOL));
                        }
                    }
                }
            }
        }
        s.tally(
            "optimality II <= I",
            "all families (ratio II / I)",
            &ordering,
            1.0 + OPTIMALITY_TOL,
        );
        s.tally(
            "optimality I = II",
            "W = basis space (relative difference)",
            &equal,
            OPTIMALITY_TOL,
        );
        s.tally(
            "optimality star <= C II",
            "dq families (observed constant)",
            &star,
            star_limit,
        );
        Ok(())
    });
}

/// Observed L² orders of the full-basis ROM on a two-mode solution for `N = 8, 16, 32`.
pub fn cn_observed_orders(mesh: &Mesh1D, nu: f64) -> Result<Vec<f64>> {
    let sol = ManufacturedSolution::discrete_two_mode(nu, mesh);
    let snaps = generate_snapshots(&sol, mesh, 1.0, 32, false)?;
    let basis = compute_pod(&snaps, SpaceTag::L2)?;
    let r = basis.rank();
    let model = assemble_rom(&basis, r, nu, &sol, mesh)?;
    let a0 = rom_initial_condition(&basis, r, &sol.interpolate_u(mesh, 0.0)?, IcKind::L2)?;
    let mut errs = Vec::new();
    for n in [8usize, 16, 32] {
        let traj = cn_solve(&model, &a0, 1.0 / n as f64, n)?;
        errs.push(rom_errors(&traj, &sol, mesh, SpaceTag::L2)?.max_l2_sq().sqrt());
    }
    Ok(errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect())
}

fn time_stepping(suite: &mut Suite, cfg: &StudyConfig, mesh: &Mesh1D) {
    suite.record("CN order", "two-mode solution", |s| {
        let orders = cn_observed_orders(mesh, cfg.nu)?;
        let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
        let bad = orders.iter().filter(|&&p| !(p >= CN_ORDER_MIN)).count();
        s.row(
            "CN order",
            "full basis, dt = 1/8, 1/16, 1/32 (min order, at least)",
            orders.len(),
            bad,
            min,
            CN_ORDER_MIN,
        );
        Ok(())
    });

    suite.record("CN stability", "unforced", |s| {
        let sol = cex1(Cex1Params { k: cfg.k, nu: cfg.nu })?;
        let n = cfg.n_steps(cfg.dt_list[0])?;
        let snaps = generate_snapshots(&sol, mesh, cfg.t_final, n, true)?;
        let basis = compute_pod(&snaps, SpaceTag::L2)?;
        let zero = ManufacturedSolution::custom("zero", cfg.nu, |_, _| 0.0, |_, _| 0.0);
        let model = assemble_rom(&basis, basis.rank(), cfg.nu, &zero, mesh)?;
        let m = model.reduced_mass().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut t = Tally::new();
        for dt in [1e-3, 1e-1, 1.0, 10.0] {
            let a0 = DVector::from_fn(basis.rank(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let traj = cn_solve(&model, &a0, dt, 20)?;
            let c = traj.coeffs();
            let energy = |i: usize| {
                let a = c.row(i).transpose();
                a.dot(&(&m * &a))
            };
            for i in 0..c.nrows() - 1 {
                t.at_most((energy(i + 1) / energy(i)).sqrt(), 1.0 + 1e-12);
            }
        }
        s.tally(
            "CN stability",
            "unforced, full basis (step growth factor)",
            &t,
            1.0 + 1e-12,
        );
        Ok(())
    });
}

/// Runs every property; failures are rows, not errors. Only configuration errors are returned.
pub fn run_property_suite(cfg: &StudyConfig) -> Result<TableReport> {
    cfg.validate()?;
    let mesh = cfg.mesh()?;
    let fe = FeSpace::new(mesh);
    let label = "property_suite";
    let mut suite = Suite {
        report: TableReport::new(
            label,
            &[
                "property",
                "configuration",
                "cases",
                "violations",
                "worst",
                "limit",
                "status",
            ],
            provenance(Study::Props, label, cfg, &[]),
        ),
    };
    match families(cfg, &mesh) {
        Ok(fams) => {
            identities(&mut suite, &fams);
            uniform_bounds(&mut suite, &fams, cfg, &fe);
            constructed_data(&mut suite, &fams);
            optimality(&mut suite, &fams);
        }
        Err(e) => suite.failed("snapshot families", "cex1+cex2", &e),
    }
    suite.record("discrete Sobolev", "random", |s| {
        let o = sobolev_random_suite(&fe, cfg.sobolev_cases, cfg.seed)?;
        s.row(
            "discrete Sobolev",
            "random sequences, L2 and H10 (ratio to bound)",
            o.cases,
            o.violations,
            o.worst_ratio,
            1.0,
        );
        Ok(())
    });
    time_stepping(&mut suite, cfg, &mesh);
    Ok(suite.report)
}

/// True when every row of a property report passed.
pub fn suite_passed(report: &TableReport) -> bool {
    let j = report.column_index("status").expect("status column");
    report.rows.iter().all(|r| r[j].as_str() == Some("pass"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let mut cfg = StudyConfig::defaults(Study::Props);
        cfg.h = 1.0 / 64.0;
        cfg.k = 16;
        cfg.dt_list = vec![0.25, 0.125];
        cfg.sobolev_cases = 30;
        cfg.random_families = 5;
        let rep = run_property_suite(&cfg).unwrap();
        let mut buf = Vec::new();
        super::super::report::emit(&rep, super::super::Format::Markdown, &mut buf).unwrap();
        assert!(suite_passed(&rep), "{}", String::from_utf8(buf).unwrap());
        assert_eq!(rep.rows.len(), 15);
    }

    #[test]
    fn identity_error_floor() {
        assert_eq!(identity_error(1.0, 1.0, 1.0), 0.0);
        assert!(identity_error(1e-20, 0.0, 1.0) < 1e-5);
        assert!((identity_error(2.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
    }
}

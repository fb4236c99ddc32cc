//! Projections onto POD spaces and the error quantities built from them.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{PodError, Result};
use crate::fem1d::{FeSpace, NodalField, SpaceTag, SymTridiag};
use crate::pod::{compute_pod, PodBasis};
use crate::snapshots::SnapshotSet;

/// Tail sums below this are treated as zero.
pub const TAIL_FLOOR: f64 = 1e-300;

/// Projector onto `span{φ_1..φ_r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ProjectorKind {
    /// Orthogonal in the inner product the basis was built with.
    PodOrthogonal,
    /// Orthogonal in the stiffness inner product.
    Ritz,
    /// Orthogonal in the mass inner product.
    L2,
}

impl ProjectorKind {
    pub(crate) fn gram_space(self, basis_space: SpaceTag) -> SpaceTag {
        match self {
            ProjectorKind::PodOrthogonal => basis_space,
            ProjectorKind::Ritz => SpaceTag::H10,
            ProjectorKind::L2 => SpaceTag::L2,
        }
    }

    /// The `W`-orthogonal projector.
    pub fn orthogonal_in(space: SpaceTag) -> Self {
        match space {
            SpaceTag::L2 => ProjectorKind::L2,
            SpaceTag::H10 => ProjectorKind::Ritz,
        }
    }
}

/// Precomputed projector for a fixed basis, rank and kind.
pub struct Projector<'a> {
    basis: &'a PodBasis,
    r: usize,
    gram: SymTridiag,
    g_phi: DMatrix<f64>,
    reduced: Option<Cholesky<f64, Dyn>>,
}

impl<'a> Projector<'a> {
    pub fn new(basis: &'a PodBasis, r: usize, kind: ProjectorKind) -> Result<Self> {
        basis.check_rank(r)?;
        let fe = FeSpace::new(*basis.mesh());
        let space = kind.gram_space(basis.space());
        let phi = basis.leading_modes(r).into_owned();
        let gram = fe.gram(space).clone();
        let g_phi = gram.left_cols(&phi);
        let reduced = if space == basis.space() {
            None
        } else {
            let mut gr = gram.inner_cols(&phi, &phi);
            let t = gr.transpose();
            gr += t;
            gr *= 0.5;
            Some(
                Cholesky::new(gr)
                    .ok_or_else(|| PodError::NotPositiveDefinite(format!("reduced {space} Gram matrix of rank {r}")))?,
            )
        };
        Ok(Self {
            basis,
            r,
            gram,
            g_phi,
            reduced,
        })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// Coefficients of the projection of each column of `u`.
    pub fn coefficients(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        let mut c = self.g_phi.tr_mul(&self.gram.right_cols(u));
        if let Some(chol) = &self.reduced {
            chol.solve_mut(&mut c);
        }
        c
    }

    /// Projects every column of `u`.
    pub fn apply_cols(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        self.basis.leading_modes(self.r) * self.coefficients(u)
    }

    pub fn apply(&self, u: &NodalField) -> Result<NodalField> {
        self.basis.mesh().check_same(u.mesh())?;
        let m = DMatrix::from_column_slice(u.values().len(), 1, u.values().as_slice());
        let p = self.apply_cols(&m);
        NodalField::new(*u.mesh(), DVector::from_column_slice(p.as_slice()))
    }
}

/// Projection of `u` onto the first `r` modes.
pub fn project(basis: &PodBasis, r: usize, u: &NodalField, kind: ProjectorKind) -> Result<NodalField> {
    Projector::new(basis, r, kind)?.apply(u)
}

/// `Σ_{i=r+1}^s λ_i ‖φ_i − Π_r φ_i‖²_W`; for the POD projector this is `Σ λ_i ‖φ_i‖²_W`.
pub fn tail_sum(basis: &PodBasis, r: usize, norm_space: SpaceTag, kind: ProjectorKind) -> Result<f64> {
    basis.check_rank(r)?;
    let s = basis.rank();
    if r == s {
        return Ok(0.0);
    }
    let fe = FeSpace::new(*basis.mesh());
    let g = fe.gram(norm_space);
    let tail = basis.modes().columns(r, s - r).into_owned();
    let defect = if kind.gram_space(basis.space()) == basis.space() {
        tail
    } else {
        &tail - Projector::new(basis, r, kind)?.apply_cols(&tail)
    };
    Ok(defect
        .column_iter()
        .zip(&basis.eigenvalues()[r..])
        .map(|(c, l)| l * g.bilinear(c.as_slice(), c.as_slice()))
        .sum())
}

/// `max_{i>r} ‖φ_i − R_r φ_i‖_{L²}` (zero when `r = s`).
pub fn ritz_defect_max(basis: &PodBasis, r: usize) -> Result<f64> {
    let s = basis.rank();
    basis.check_rank(r)?;
    if r == s {
        return Ok(0.0);
    }
    let fe = FeSpace::new(*basis.mesh());
    let tail = basis.modes().columns(r, s - r).into_owned();
    let defect = &tail - Projector::new(basis, r, ProjectorKind::Ritz)?.apply_cols(&tail);
    Ok(defect
        .column_iter()
        .map(|c| fe.norm(c.as_slice(), SpaceTag::L2))
        .fold(0.0, f64::max))
}

/// `‖uⁿ − Π_r uⁿ‖_W` for `n = 0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseErrorSeries {
    pub errors: Vec<f64>,
    pub space: SpaceTag,
    pub r: usize,
    pub projector: ProjectorKind,
}

impl PointwiseErrorSeries {
    pub fn max(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

fn column_norms(fe: &FeSpace, m: &DMatrix<f64>, space: SpaceTag) -> Vec<f64> {
    let g = fe.gram(space);
    m.column_iter()
        .map(|c| g.bilinear(c.as_slice(), c.as_slice()).max(0.0).sqrt())
        .collect()
}

pub fn pointwise_errors(
    snaps: &SnapshotSet,
    basis: &PodBasis,
    r: usize,
    norm_space: SpaceTag,
    kind: ProjectorKind,
) -> Result<PointwiseErrorSeries> {
    basis.mesh().check_same(snaps.mesh())?;
    let proj = Projector::new(basis, r, kind)?;
    let u = snaps.snapshots();
    let resid = u - proj.apply_cols(u);
    let fe = FeSpace::new(*basis.mesh());
    Ok(PointwiseErrorSeries {
        errors: column_norms(&fe, &resid, norm_space),
        space: norm_space,
        r,
        projector: kind,
    })
}

fn ratio_denominator(series: &PointwiseErrorSeries, basis: &PodBasis, r: usize, space: SpaceTag) -> Result<f64> {
    if series.r != r || series.space != space {
        return Err(PodError::InvalidParameter(format!(
            "error series is for r={} in {}, ratio requested for r={r} in {space}",
            series.r, series.space
        )));
    }
    let tail = tail_sum(basis, r, space, ProjectorKind::PodOrthogonal)?;
    if !(tail > TAIL_FLOOR) {
        return Err(PodError::ZeroTail);
    }
    Ok(tail)
}

/// `max_n ‖uⁿ − P_r uⁿ‖²_W / Σ_{i>r} λ_i ‖φ_i‖²_W`.
pub fn assumption_ratio(series: &PointwiseErrorSeries, basis: &PodBasis, r: usize, space: SpaceTag) -> Result<f64> {
    let tail = ratio_denominator(series, basis, r, space)?;
    Ok(series.max().powi(2) / tail)
}

/// Same ratio with the numerator taken at time index `n` only.
pub fn assumption_ratio_at(
    series: &PointwiseErrorSeries,
    basis: &PodBasis,
    r: usize,
    space: SpaceTag,
    n: usize,
) -> Result<f64> {
    let tail = ratio_denominator(series, basis, r, space)?;
    let e = series.errors.get(n).ok_or(PodError::DimensionMismatch {
        expected: series.errors.len(),
        got: n + 1,
    })?;
    Ok(e * e / tail)
}

/// Constant of the discrete Sobolev inequality, `6 max{1, T²}`.
pub fn sobolev_constant(t_final: f64) -> f64 {
    6.0 * 1f64.max(t_final * t_final)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates `max_k ‖z^k‖² ≤ 6 max{1,T²} (Σ‖zⁿ‖² + Σ‖∂zⁿ‖²)/(2N+1)` for columns `z⁰..z^N`.
pub fn sobolev_check(fe: &FeSpace, z: &DMatrix<f64>, dt: f64, norm_space: SpaceTag) -> Result<SobolevCheck> {
    if z.ncols() < 2 {
        return Err(PodError::InvalidParameter("need at least two vectors".into()));
    }
    if !(dt > 0.0) {
        return Err(PodError::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if z.nrows() != fe.mesh().n_dof() {
        return Err(PodError::DimensionMismatch {
            expected: fe.mesh().n_dof(),
            got: z.nrows(),
        });
    }
    let n = z.ncols() - 1;
    let g = fe.gram(norm_space);
    let sq: Vec<f64> = z
        .column_iter()
        .map(|c| g.bilinear(c.as_slice(), c.as_slice()).max(0.0))
        .collect();
    let mut dq_sum = 0.0;
    for k in 1..=n {
        let d = (z.column(k) - z.column(k - 1)) / dt;
        dq_sum += g.bilinear(d.as_slice(), d.as_slice()).max(0.0);
    }
    let lhs = sq.iter().copied().fold(0.0, f64::max);
    let rhs = sobolev_constant(n as f64 * dt) * (sq.iter().sum::<f64>() + dq_sum) / (2 * n + 1) as f64;
    Ok(SobolevCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Summary of a batch of randomized checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub cases: usize,
    pub violations: usize,
    /// Largest observed `lhs / rhs`.
    pub worst_ratio: f64,
}

impl SuiteOutcome {
    fn new() -> Self {
        Self {
            cases: 0,
            violations: 0,
            worst_ratio: 0.0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, holds: bool) {
        self.cases += 1;
        if !holds {
            self.violations += 1;
        }
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        } else if lhs > 0.0 {
            self.worst_ratio = f64::INFINITY;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Random sequence of `n+1` nodal vectors: i.i.d. Gaussian, a Gaussian random walk, or a
/// smooth random trajectory, chosen by `shape`.
fn random_sequence(rng: &mut ChaCha8Rng, n_dof: usize, n: usize, dt: f64, shape: usize) -> DMatrix<f64> {
    let mut z = DMatrix::<f64>::zeros(n_dof, n + 1);
    match shape {
        0 => z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
        1 => {
            z.column_mut(0).iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            for k in 1..=n {
                let prev = z.column(k - 1).into_owned();
                let mut col = z.column_mut(k);
                for (c, p) in col.iter_mut().zip(prev.iter()) {
                    let step: f64 = rng.sample(StandardNormal);
                    *c = p + dt.sqrt() * step;
                }
            }
        }
        _ => {
            let a: Vec<f64> = (0..n_dof).map(|_| rng.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..n_dof).map(|_| rng.sample(StandardNormal)).collect();
            let freq: f64 = rng.random_range(0.1..20.0);
            for k in 0..=n {
                let t = k as f64 * dt;
                let (s, c) = (freq * t).sin_cos();
                for i in 0..n_dof {
                    z[(i, k)] = a[i] * s + b[i] * c;
                }
            }
        }
    }
    z
}

/// Seeded randomized check of the discrete Sobolev inequality in both norms.
///
/// Each case draws `N ∈ [2, 64]` and `Δt` log-uniform in `[1e-3, 1]`.
pub fn sobolev_random_suite(fe: &FeSpace, cases: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SuiteOutcome::new();
    let n_dof = fe.mesh().n_dof();
    for case in 0..cases {
        let n = rng.random_range(2..=64usize);
        let dt = 10f64.powf(rng.random_range(-3.0..0.0));
        let z = random_sequence(&mut rng, n_dof, n, dt, case % 3);
        for space in [SpaceTag::L2, SpaceTag::H10] {
            let c = sobolev_check(fe, &z, dt, space)?;
            out.record(c.lhs, c.rhs, c.holds);
        }
    }
    Ok(out)
}

/// Checks `‖uᵏ − P_r uᵏ‖²_W ≤ 6 max{1,T²} Σ_{i>r} λ_i ‖φ_i‖²_W` for every `r < s` and every
/// snapshot index `k`. Only meaningful for a basis built with DQs.
pub fn uniform_bound_check(snaps: &SnapshotSet, basis: &PodBasis, norm_space: SpaceTag) -> Result<SuiteOutcome> {
    basis.mesh().check_same(snaps.mesh())?;
    let fe = FeSpace::new(*basis.mesh());
    let c = sobolev_constant(snaps.t_final());
    let s = basis.rank();
    let g = fe.gram(norm_space);

    // tails[r] = Σ_{i>r} λ_i ‖φ_i‖²_W
    let mode_sq = column_norms(&fe, basis.modes(), norm_space);
    let mut tails = vec![0.0; s + 1];
    for i in (0..s).rev() {
        tails[i] = tails[i + 1] + basis.eigenvalues()[i] * mode_sq[i] * mode_sq[i];
    }

    let u = snaps.snapshots();
    let coeffs = fe.gram(basis.space()).inner_cols(basis.modes(), u);
    let mut resid = u.clone();
    let mut out = SuiteOutcome::new();
    for r in 1..s {
        let phi = basis.modes().column(r - 1);
        for k in 0..u.ncols() {
            let a = coeffs[(r - 1, k)];
            resid.column_mut(k).axpy(-a, &phi, 1.0);
        }
        let rhs = c * tails[r];
        for col in resid.column_iter() {
            let lhs = g.bilinear(col.as_slice(), col.as_slice());
            out.record(lhs, rhs, lhs <= rhs * (1.0 + 1e-10) + 1e-14 * tails[0]);
        }
    }
    Ok(out)
}

/// Random DQ snapshot families: a few smooth spatial profiles with random smooth
/// time coefficients, checked with [`uniform_bound_check`] in both norms.
pub fn uniform_bound_random_suite(fe: &FeSpace, families: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = *fe.mesh();
    let nodes: Vec<f64> = mesh.nodes().collect();
    let mut out = SuiteOutcome::new();
    for _ in 0..families {
        let n = rng.random_range(2..=24usize);
        let dt = 10f64.powf(rng.random_range(-2.0..0.0));
        let modes = rng.random_range(1..=6usize);
        let mut u = DMatrix::<f64>::zeros(mesh.n_dof(), n + 1);
        for _ in 0..modes {
            let freq = rng.random_range(1..=12u32) as f64 * std::f64::consts::PI;
            let rate: f64 = rng.random_range(-3.0..3.0);
            let omega: f64 = rng.random_range(0.0..10.0);
            let amp: f64 = rng.sample(StandardNormal);
            for k in 0..=n {
                let t = k as f64 * dt;
                let a = amp * (rate * t).exp() * (omega * t + 0.3).cos();
                for (i, x) in nodes.iter().enumerate() {
                    u[(i, k)] += a * (freq * x).sin();
                }
            }
        }
        let snaps = SnapshotSet::from_matrix(mesh, u, dt, true)?;
        for space in [SpaceTag::L2, SpaceTag::H10] {
            let basis = match compute_pod(&snaps, space) {
                Ok(b) => b,
                Err(PodError::EmptyBasis) => continue,
                Err(e) => return Err(e),
            };
            for w in [SpaceTag::L2, SpaceTag::H10] {
                let o = uniform_bound_check(&snaps, &basis, w)?;
                out.cases += o.cases;
                out.violations += o.violations;
                out.worst_ratio = out.worst_ratio.max(o.worst_ratio);
            }
        }
    }
    Ok(out)
}

/// `Λ*`, `Λᴵ` and `Λᴵᴵ` for one rank and norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalityQuantities {
    pub lambda_star: f64,
    pub lambda_i: f64,
    pub lambda_ii: f64,
    pub r: usize,
    pub space: SpaceTag,
}

pub fn optimality_quantities(
    snaps: &SnapshotSet,
    basis: &PodBasis,
    r: usize,
    norm_space: SpaceTag,
) -> Result<OptimalityQuantities> {
    basis.check_rank(r)?;
    if r == basis.rank() {
        return Err(PodError::ZeroTail);
    }
    let kind = ProjectorKind::orthogonal_in(norm_space);
    let series = pointwise_errors(snaps, basis, r, norm_space, kind)?;
    let lambda_star = series.errors[1..].iter().map(|e| e * e).fold(0.0, f64::max);
    Ok(OptimalityQuantities {
        lambda_star,
        lambda_i: tail_sum(basis, r, norm_space, ProjectorKind::PodOrthogonal)?,
        lambda_ii: tail_sum(basis, r, norm_space, kind)?,
        r,
        space: norm_space,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{build_mesh, interpolate, Mesh1D};
    use crate::pod::pod_project;
    use crate::snapshots::{cex1, generate_snapshots, Cex1Params};

    fn small_basis(space: SpaceTag, dq: bool) -> (SnapshotSet, PodBasis) {
        let mesh = build_mesh(128).unwrap();
        let sol = cex1(Cex1Params { k: 4, nu: 1.0 }).unwrap();
        let snaps = generate_snapshots(&sol, &mesh, 1.0, 4, dq).unwrap();
        let basis = compute_pod(&snaps, space).unwrap();
        (snaps, basis)
    }

    fn bump(mesh: &Mesh1D) -> NodalField {
        interpolate(|x| x * (1.0 - x) * (3.0 * x).exp(), mesh).unwrap()
    }

    #[test]
    fn projections_are_idempotent() {
        let (_, basis) = small_basis(SpaceTag::L2, true);
        let u = bump(basis.mesh());
        for kind in [ProjectorKind::PodOrthogonal, ProjectorKind::Ritz, ProjectorKind::L2] {
            for r in 1..=basis.rank() {
                let p = project(&basis, r, &u, kind).unwrap();
                let pp = project(&basis, r, &p, kind).unwrap();
                assert!((pp.values() - p.values()).amax() < 1e-10, "{kind:?} r={r}");
            }
        }
    }

    #[test]
    fn ritz_galerkin_orthogonality() {
        let (_, basis) = small_basis(SpaceTag::L2, false);
        let fe = FeSpace::new(*basis.mesh());
        let u = bump(basis.mesh());
        let r = 3;
        let p = project(&basis, r, &u, ProjectorKind::Ritz).unwrap();
        let e = u.values() - p.values();
        for i in 0..r {
            let phi = basis.modes().column(i);
            let res = fe.inner(e.as_slice(), phi.as_slice(), SpaceTag::H10);
            assert!(res.abs() < 1e-10, "mode {i}: {res}");
        }
    }

    #[test]
    fn ritz_matches_pod_projection_for_h10_basis() {
        let (_, basis) = small_basis(SpaceTag::H10, false);
        let u = bump(basis.mesh());
        let a = project(&basis, 2, &u, ProjectorKind::Ritz).unwrap();
        let b = pod_project(&basis, 2, &u).unwrap();
        assert!((a.values() - b.values()).amax() < 1e-12);
    }

    #[test]
    fn span_members_are_recovered() {
        let (_, basis) = small_basis(SpaceTag::H10, true);
        let v = basis.modes().column(0) * 0.7 - basis.modes().column(1) * 1.3;
        let u = NodalField::new(*basis.mesh(), v.clone()).unwrap();
        for kind in [ProjectorKind::PodOrthogonal, ProjectorKind::Ritz, ProjectorKind::L2] {
            let p = project(&basis, 2, &u, kind).unwrap();
            assert!((p.values() - &v).amax() < 1e-10);
        }
    }

    #[test]
    fn full_rank_errors_vanish() {
        let (snaps, basis) = small_basis(SpaceTag::L2, false);
        let s = basis.rank();
        let series = pointwise_errors(&snaps, &basis, s, SpaceTag::L2, ProjectorKind::PodOrthogonal).unwrap();
        let fe = FeSpace::new(*basis.mesh());
        let umax = column_norms(&fe, snaps.snapshots(), SpaceTag::L2)
            .into_iter()
            .fold(0.0, f64::max);
        assert!(series.errors.iter().all(|e| *e <= 1e-7 * umax));
        assert!(matches!(
            assumption_ratio(&series, &basis, s, SpaceTag::L2),
            Err(PodError::ZeroTail)
        ));
    }

    #[test]
    fn worst_case_ratio_bound() {
        for dq in [false, true] {
            let (snaps, basis) = small_basis(SpaceTag::L2, dq);
            for r in 1..basis.rank() {
                let series = pointwise_errors(&snaps, &basis, r, SpaceTag::L2, ProjectorKind::PodOrthogonal).unwrap();
                let c = assumption_ratio(&series, &basis, r, SpaceTag::L2).unwrap();
                assert!(c <= snaps.n_columns() as f64 * (1.0 + 1e-8));
                let c0 = assumption_ratio_at(&series, &basis, r, SpaceTag::L2, 0).unwrap();
                assert!(c0 <= c);
            }
        }
    }

    #[test]
    fn sobolev_trivial_sequences() {
        let fe = FeSpace::with_elems(16).unwrap();
        let w = DVector::from_fn(15, |i, _| (i as f64).sin());
        let n = 5;
        let z = DMatrix::from_fn(15, n + 1, |i, _| w[i]);
        let c = sobolev_check(&fe, &z, 0.5, SpaceTag::L2).unwrap();
        let w2 = fe.norm_sq(w.as_slice(), SpaceTag::L2);
        assert!((c.lhs - w2).abs() < 1e-14);
        let expect = 6.0 * 6.25 * (n + 1) as f64 / (2 * n + 1) as f64 * w2;
        assert!((c.rhs - expect).abs() < 1e-12 * expect);
        assert!(c.holds);

        let zero = sobolev_check(&fe, &DMatrix::zeros(15, 3), 0.1, SpaceTag::H10).unwrap();
        assert_eq!((zero.lhs, zero.rhs, zero.holds), (0.0, 0.0, true));
        assert!(sobolev_check(&fe, &DMatrix::zeros(15, 1), 0.1, SpaceTag::L2).is_err());
    }

    #[test]
    fn sobolev_suite_small() {
        let fe = FeSpace::with_elems(32).unwrap();
        let out = sobolev_random_suite(&fe, 60, 7).unwrap();
        assert_eq!(out.cases, 120);
        assert!(out.passed(), "{out:?}");
    }

    #[test]
    fn optimality_ordering() {
        for space in [SpaceTag::L2, SpaceTag::H10] {
            let (snaps, basis) = small_basis(space, true);
            for r in 1..basis.rank() {
                for w in [SpaceTag::L2, SpaceTag::H10] {
                    let q = optimality_quantities(&snaps, &basis, r, w).unwrap();
                    assert!(q.lambda_ii <= q.lambda_i * (1.0 + 1e-10));
                    if w == space {
                        assert!((q.lambda_i - q.lambda_ii).abs() <= 1e-10 * q.lambda_i);
                    }
                    assert!(q.lambda_star <= sobolev_constant(snaps.t_final()) * q.lambda_ii);
                }
            }
        }
    }

    #[test]
    fn ritz_defect_vanishes_at_full_rank() {
        let (_, basis) = small_basis(SpaceTag::L2, true);
        assert_eq!(ritz_defect_max(&basis, basis.rank()).unwrap(), 0.0);
        assert!(ritz_defect_max(&basis, 1).unwrap() > 0.0);
    }
}

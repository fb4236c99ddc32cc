//! Proper orthogonal decomposition by the method of snapshots.
//!
//! The correlation matrix `K_mn = w (v^m, v^n)_𝓗` of the snapshot collection is
//! diagonalized, and modes are assembled as
//! `φ_i = (w / λ_i)^{1/2} Σ_m (z_i)^m v^m`. The collection `v` is either the
//! snapshots alone (`w = 1/(N+1)`) or the snapshots followed by their
//! difference quotients (`w = 1/(2N+1)`).

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{PodError, Result};
use crate::fem1d::{FeSpace, Mesh1D, NodalField, SpaceTag};
use crate::numfmt::fmt_g17;
use crate::projections::{tail_sum, Projector, ProjectorKind};
use crate::snapshots::SnapshotSet;

/// Eigenvalues at or below this fraction of `λ_1` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Weighted snapshot Gram matrix.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub matrix: DMatrix<f64>,
    pub weight: f64,
}

pub fn correlation_matrix(snaps: &SnapshotSet, space: SpaceTag) -> CorrelationMatrix {
    let fe = FeSpace::new(*snaps.mesh());
    correlation_matrix_in(&fe, snaps, space)
}

fn correlation_matrix_in(fe: &FeSpace, snaps: &SnapshotSet, space: SpaceTag) -> CorrelationMatrix {
    let cols = snaps.collection();
    let weight = snaps.weight();
    let mut k = fe.gram(space).inner_cols(&cols, &cols) * weight;
    // exact symmetry
    let kt = k.transpose();
    k += kt;
    k *= 0.5;
    CorrelationMatrix { matrix: k, weight }
}

/// POD modes and eigenvalues for one snapshot collection and inner product.
#[derive(Clone, Debug)]
pub struct PodBasis {
    mesh: Mesh1D,
    modes: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    spectrum: Vec<f64>,
    space: SpaceTag,
    dq: bool,
    weight: f64,
    n_steps: usize,
    dt: f64,
}

impl PodBasis {
    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    /// Modes `φ_1..φ_s` as matrix columns.
    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    /// First `r` modes.
    pub fn leading_modes(&self, r: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.modes.columns(0, r)
    }

    pub fn mode(&self, i: usize) -> NodalField {
        NodalField::new(self.mesh, self.modes.column(i).into_owned()).expect("mode length")
    }

    /// Retained eigenvalues `λ_1 ≥ … ≥ λ_s > 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Full sorted spectrum of the correlation matrix, including discarded values.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Rank `s`.
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn space(&self) -> SpaceTag {
        self.space
    }

    pub fn has_dq(&self) -> bool {
        self.dq
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `N` of the snapshot set the basis was built from.
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub(crate) fn check_rank(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.rank() {
            return Err(PodError::RankOutOfRange { r, max: self.rank() });
        }
        Ok(())
    }

    /// CSV export: header row of eigenvalues, then one row of nodal values per node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["eigenvalue".to_string()];
        header.extend(self.eigenvalues.iter().map(|l| fmt_g17(*l)));
        w.write_record(&header)?;
        for i in 0..self.modes.nrows() {
            let mut rec = vec![(i + 1).to_string()];
            rec.extend(self.modes.row(i).iter().map(|v| fmt_g17(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Numerical route to the POD eigenpairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PodMethod {
    /// `𝓗`-orthonormal QR of the collection, then an SVD of the triangular factor.
    /// Since `Cᵀ G C = Rᵀ R`, this yields the same eigenpairs without squaring the
    /// condition number.
    #[default]
    Svd,
    /// Symmetric eigendecomposition of the correlation matrix.
    Snapshots,
}

/// Builds the POD basis of `snaps` in the `space` inner product.
pub fn compute_pod(snaps: &SnapshotSet, space: SpaceTag) -> Result<PodBasis> {
    compute_pod_with(snaps, space, PodMethod::default())
}

pub fn compute_pod_with(snaps: &SnapshotSet, space: SpaceTag, method: PodMethod) -> Result<PodBasis> {
    let fe = FeSpace::new(*snaps.mesh());
    let cols = snaps.collection();
    let weight = snaps.weight();
    let (spectrum, mut modes) = match method {
        PodMethod::Snapshots => eig_route(&fe, snaps, space)?,
        PodMethod::Svd => match svd_route(&fe, &cols, weight, space)? {
            Some(route) => route,
            None => eig_route(&fe, snaps, space)?,
        },
    };
    let s = modes.ncols();
    for mut col in modes.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(PodBasis {
        mesh: *snaps.mesh(),
        modes,
        eigenvalues: spectrum[..s].to_vec(),
        spectrum,
        space,
        dq: snaps.has_dq(),
        weight,
        n_steps: snaps.n_steps(),
        dt: snaps.dt(),
    })
}

/// Indices of `values` in descending order, ties in index order.
fn descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

fn retained_rank(spectrum: &[f64]) -> Result<usize> {
    let lambda_max = spectrum.first().copied().unwrap_or(0.0);
    if !(lambda_max > 0.0) {
        return Err(PodError::EmptyBasis);
    }
    Ok(spectrum
        .iter()
        .take_while(|&&l| l > RANK_TOLERANCE * lambda_max)
        .count())
}

fn eig_route(fe: &FeSpace, snaps: &SnapshotSet, space: SpaceTag) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let corr = correlation_matrix_in(fe, snaps, space);
    let eig = SymmetricEigen::try_new(corr.matrix, f64::EPSILON, 0)
        .ok_or_else(|| PodError::NotPositiveDefinite("symmetric eigensolver did not converge".into()))?;
    let vals = eig.eigenvalues.as_slice();
    let order = descending(vals);
    let spectrum: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let s = retained_rank(&spectrum)?;
    let cols = snaps.collection();
    let mut z = DMatrix::zeros(cols.ncols(), s);
    for (j, &idx) in order.iter().take(s).enumerate() {
        let scale = (corr.weight / spectrum[j]).sqrt();
        z.set_column(j, &(eig.eigenvectors.column(idx) * scale));
    }
    Ok((spectrum, cols * z))
}

/// Relative size below which an orthogonalized column counts as dependent.
const QR_DROP_TOLERANCE: f64 = 1e-12;

/// `G`-orthonormal QR by classical Gram-Schmidt with one reorthogonalization pass.
/// Columns that are dependent to working precision leave a zero column in `Q`.
fn gram_qr(fe: &FeSpace, cols: &DMatrix<f64>, space: SpaceTag) -> (DMatrix<f64>, DMatrix<f64>) {
    let g = fe.gram(space);
    let (n, m) = cols.shape();
    let mut q = DMatrix::<f64>::zeros(n, m);
    let mut gq = DMatrix::<f64>::zeros(g.factor_rows(), m);
    let mut r = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        let mut v = cols.column(j).into_owned();
        let orig = g.bilinear(v.as_slice(), v.as_slice()).max(0.0).sqrt();
        if j > 0 {
            for _ in 0..2 {
                let c = gq.columns(0, j).tr_mul(&g.right_vec(&v));
                v.gemv(-1.0, &q.columns(0, j), &c, 1.0);
                let mut rj = r.view_mut((0, j), (j, 1));
                rj += &c;
            }
        }
        let nrm = g.bilinear(v.as_slice(), v.as_slice()).max(0.0).sqrt();
        if nrm > QR_DROP_TOLERANCE * orig {
            let gv = g.left_vec(&v);
            r[(j, j)] = nrm;
            q.set_column(j, &(v / nrm));
            gq.set_column(j, &(gv / nrm));
        }
    }
    (q, r)
}

/// Relative mismatch between `Σσ²` and `‖R‖²_F` above which the SVD is rejected.
const SVD_ENERGY_TOLERANCE: f64 = 1e-10;

/// `None` when the SVD fails to conserve `‖R‖²_F`.
fn svd_route(
    fe: &FeSpace,
    cols: &DMatrix<f64>,
    weight: f64,
    space: SpaceTag,
) -> Result<Option<(Vec<f64>, DMatrix<f64>)>> {
    let (q, r) = gram_qr(fe, cols, space);
    // nalgebra's SVD mishandles exactly zero rows, so dependent columns are removed first
    let keep: Vec<usize> = (0..r.nrows()).filter(|&j| r[(j, j)] != 0.0).collect();
    if keep.is_empty() {
        return Err(PodError::EmptyBasis);
    }
    let r = r.select_rows(keep.iter());
    let q = q.select_columns(keep.iter());
    let energy = r.norm_squared();
    let Some(svd) = r.try_svd(true, false, f64::EPSILON, 0) else {
        return Ok(None);
    };
    let sigma = svd.singular_values.as_slice();
    let captured: f64 = sigma.iter().map(|x| x * x).sum();
    if !((captured - energy).abs() <= SVD_ENERGY_TOLERANCE * energy) {
        return Ok(None);
    }
    let u = svd.u.expect("left singular vectors requested");
    let order = descending(sigma);
    let mut spectrum: Vec<f64> = order.iter().map(|&i| weight * sigma[i] * sigma[i]).collect();
    let s = retained_rank(&spectrum)?;
    let mut basis = DMatrix::zeros(u.nrows(), s);
    for (j, &idx) in order.iter().take(s).enumerate() {
        basis.set_column(j, &u.column(idx));
    }
    spectrum.resize(cols.ncols(), 0.0);
    Ok(Some((spectrum, q * basis)))
}

/// Orthogonal POD projection `P_r u = Σ_{i≤r} (u, φ_i)_𝓗 φ_i`.
pub fn pod_project(basis: &PodBasis, r: usize, u: &NodalField) -> Result<NodalField> {
    basis.check_rank(r)?;
    basis.mesh.check_same(u.mesh())?;
    let fe = FeSpace::new(basis.mesh);
    let g = fe.gram(basis.space);
    let phi = basis.leading_modes(r).into_owned();
    let coeffs: DVector<f64> = g.left_cols(&phi).tr_mul(&g.right_vec(u.values()));
    NodalField::new(basis.mesh, phi * coeffs)
}

/// Both sides of the total projection error identity
///
/// `w Σ_v ‖v − Π_r v‖²_W = Σ_{i=r+1}^s λ_i ‖φ_i − Π_r φ_i‖²_W`,
///
/// where the sum runs over the whole POD collection (including DQs when the
/// basis was built with them).
pub fn total_error_identity(
    snaps: &SnapshotSet,
    basis: &PodBasis,
    r: usize,
    norm_space: SpaceTag,
    projector: ProjectorKind,
) -> Result<(f64, f64)> {
    basis.check_rank(r)?;
    basis.mesh.check_same(snaps.mesh())?;
    if snaps.has_dq() != basis.has_dq() || snaps.n_steps() != basis.n_steps() {
        return Err(PodError::InvalidParameter(
            "snapshot set does not match the collection the basis was built from".into(),
        ));
    }
    let fe = FeSpace::new(basis.mesh);
    let proj = Projector::new(basis, r, projector)?;
    let cols = snaps.collection();
    let resid = &cols - proj.apply_cols(&cols);
    let g = fe.gram(norm_space);
    let lhs = snaps.weight()
        * resid
            .column_iter()
            .map(|c| g.bilinear(c.as_slice(), c.as_slice()))
            .sum::<f64>();
    let rhs = tail_sum(basis, r, norm_space, projector)?;
    Ok((lhs, rhs))
}

/// [`total_error_identity`] for every `r = 1..=s` at once (entry `r-1`).
///
/// Projections onto nested spans are applied incrementally through a
/// Gram-orthonormalized copy of the modes, so the sweep costs about as much
/// as a single evaluation at `r = s`.
pub fn total_error_identity_sweep(
    snaps: &SnapshotSet,
    basis: &PodBasis,
    norm_space: SpaceTag,
    projector: ProjectorKind,
) -> Result<Vec<(f64, f64)>> {
    basis.mesh.check_same(snaps.mesh())?;
    if snaps.has_dq() != basis.has_dq() || snaps.n_steps() != basis.n_steps() {
        return Err(PodError::InvalidParameter(
            "snapshot set does not match the collection the basis was built from".into(),
        ));
    }
    let fe = FeSpace::new(basis.mesh);
    let g_w = fe.gram(norm_space);
    let g_p = fe.gram(projector.gram_space(basis.space));
    let s = basis.rank();
    let n = basis.mesh.n_dof();
    let lambda = &basis.eigenvalues;

    let mut res_c = snaps.collection();
    let mut res_m = basis.modes.clone();
    let mut q = DMatrix::<f64>::zeros(n, s);
    let mut gq = DMatrix::<f64>::zeros(g_p.factor_rows(), s);
    let sq_norms = |m: &DMatrix<f64>| -> Vec<f64> {
        m.column_iter()
            .map(|c| g_w.bilinear(c.as_slice(), c.as_slice()))
            .collect()
    };

    let mut out = Vec::with_capacity(s);
    for r in 0..s {
        let mut v = basis.modes.column(r).into_owned();
        for _ in 0..2 {
            let c = gq.columns(0, r).tr_mul(&g_p.right_vec(&v));
            v.gemv(-1.0, &q.columns(0, r), &c, 1.0);
        }
        let gv = g_p.left_vec(&v);
        let nrm = g_p.bilinear(v.as_slice(), v.as_slice()).sqrt();
        if !(nrm > 0.0) {
            return Err(PodError::NotPositiveDefinite(format!(
                "mode {} is dependent on its predecessors",
                r + 1
            )));
        }
        let qr = v / nrm;
        let gqr = gv / nrm;
        for res in [&mut res_c, &mut res_m] {
            let c = g_p.right_cols(res).tr_mul(&gqr);
            res.ger(-1.0, &qr, &c, 1.0);
        }
        q.set_column(r, &qr);
        gq.set_column(r, &gqr);

        let lhs = snaps.weight() * sq_norms(&res_c).iter().sum::<f64>();
        let tail = res_m.columns(r + 1, s - r - 1).into_owned();
        let rhs = sq_norms(&tail)
            .iter()
            .zip(&lambda[r + 1..])
            .map(|(a, l)| a * l)
            .sum::<f64>();
        out.push((lhs, rhs));
    }
    Ok(out)
}

//! Manufactured solutions of `u_t - ν u_xx = f` and snapshot sets built from them.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{PodError, Result};
use crate::fem1d::{interpolate, interpolate_values, Mesh1D, NodalField};
use crate::numfmt::fmt_g17;

type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Exact solution `u(x, t)` with its forcing `f = u_t - ν u_xx`.
#[derive(Clone)]
pub struct ManufacturedSolution {
    label: String,
    nu: f64,
    u: ScalarField,
    f: ScalarField,
    /// Spatial frequency rate `k` of `sin((k t + 1) π x)`; snapshot times must satisfy `k t ∈ ℕ`.
    frequency_rate: Option<u32>,
}

impl fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedSolution")
            .field("label", &self.label)
            .field("nu", &self.nu)
            .field("frequency_rate", &self.frequency_rate)
            .finish_non_exhaustive()
    }
}

impl ManufacturedSolution {
    /// User supplied `(u, f)` pair. `f` must equal `u_t - ν u_xx`; this is not checked.
    pub fn custom<U, F>(label: impl Into<String>, nu: f64, u: U, f: F) -> Self
    where
        U: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            nu,
            u: Arc::new(u),
            f: Arc::new(f),
            frequency_rate: None,
        }
    }

    /// `u = e^{-t} sin(π x)`: smooth, exactly one POD mode.
    pub fn decaying_sine(nu: f64) -> Self {
        use std::f64::consts::PI;
        Self::custom(
            "decaying-sine",
            nu,
            |x, t| (-t).exp() * (PI * x).sin(),
            move |x, t| (nu * PI * PI - 1.0) * (-t).exp() * (PI * x).sin(),
        )
    }

    /// `u = e^{-t} sin(πx) + ½ cos(t) sin(3πx)` with the forcing built from the
    /// discrete eigenvalues of `M⁻¹S` on `mesh`, so the semi-discrete solution is
    /// exactly the nodal interpolant of `u`. Only time discretization error remains.
    pub fn discrete_two_mode(nu: f64, mesh: &Mesh1D) -> Self {
        use std::f64::consts::PI;
        let h = mesh.h();
        let eig = |j: f64| {
            let c = (j * PI * h).cos();
            6.0 * (1.0 - c) / (h * h * (2.0 + c))
        };
        let (l1, l3) = (eig(1.0), eig(3.0));
        Self::custom(
            "discrete-two-mode",
            nu,
            |x, t| (-t).exp() * (PI * x).sin() + 0.5 * t.cos() * (3.0 * PI * x).sin(),
            move |x, t| {
                (nu * l1 - 1.0) * (-t).exp() * (PI * x).sin()
                    + 0.5 * (nu * l3 * t.cos() - t.sin()) * (3.0 * PI * x).sin()
            },
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn frequency_rate(&self) -> Option<u32> {
        self.frequency_rate
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        (self.u)(x, t)
    }

    pub fn f(&self, x: f64, t: f64) -> f64 {
        (self.f)(x, t)
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.u)(x, 0.0)
    }

    pub fn interpolate_u(&self, mesh: &Mesh1D, t: f64) -> Result<NodalField> {
        interpolate(|x| self.u(x, t), mesh)
    }

    pub fn interpolate_f(&self, mesh: &Mesh1D, t: f64) -> Result<NodalField> {
        interpolate(|x| self.f(x, t), mesh)
    }

    /// Rejects a time step for which `k Δt` is not a positive integer.
    pub fn check_time_step(&self, dt: f64) -> Result<()> {
        if let Some(k) = self.frequency_rate {
            check_integer_rate(k, dt)?;
        }
        Ok(())
    }
}

/// Checks that `k Δt` is a positive integer.
pub fn check_integer_rate(k: u32, dt: f64) -> Result<()> {
    let kt = k as f64 * dt;
    if !(kt >= 0.5) || (kt - kt.round()).abs() > 1e-9 * kt.max(1.0) {
        return Err(PodError::GridIncompatible { kt });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cex1Params {
    pub k: u32,
    pub nu: f64,
}

impl Default for Cex1Params {
    fn default() -> Self {
        Self { k: 128, nu: 1.0 }
    }
}

/// Counterexample 1: `u(x, t) = sin((k t + 1) π x)`.
pub fn cex1(params: Cex1Params) -> Result<ManufacturedSolution> {
    use std::f64::consts::PI;
    if params.k == 0 {
        return Err(PodError::InvalidParameter("k must be positive".into()));
    }
    if !(params.nu > 0.0) {
        return Err(PodError::InvalidParameter("nu must be positive".into()));
    }
    let k = params.k as f64;
    let nu = params.nu;
    let mut sol = ManufacturedSolution::custom(
        format!("cex1(k={})", params.k),
        nu,
        move |x, t| ((k * t + 1.0) * PI * x).sin(),
        move |x, t| {
            let w = (k * t + 1.0) * PI;
            // u_t = kπx cos(wx), u_xx = -w² sin(wx)
            k * PI * x * (w * x).cos() + nu * w * w * (w * x).sin()
        },
    );
    sol.frequency_rate = Some(params.k);
    Ok(sol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cex2Params {
    pub k: u32,
    pub alpha: f64,
    pub delta: f64,
    pub nu: f64,
}

impl Default for Cex2Params {
    fn default() -> Self {
        Self {
            k: 100,
            alpha: 1.0,
            delta: 0.01,
            nu: 1.0,
        }
    }
}

impl Cex2Params {
    /// `ρ = δ / Δt`.
    pub fn rho(&self, dt: f64) -> f64 {
        self.delta / dt
    }

    /// Decay rate `γ = α Δt / δ` of the prescribed eigenvalues.
    pub fn gamma(&self, dt: f64) -> f64 {
        self.alpha * dt / self.delta
    }

    /// `β = e^{-α + γ} / (4 δ (N + 1))`.
    pub fn beta(&self, dt: f64, n_steps: usize) -> f64 {
        (-self.alpha + self.gamma(dt)).exp() / (4.0 * self.delta * (n_steps + 1) as f64)
    }

    /// Prescribed eigenvalue `λ_j = β e^{-γ j}` (one based `j`).
    pub fn eigenvalue(&self, j: usize, dt: f64, n_steps: usize) -> f64 {
        self.beta(dt, n_steps) * (-self.gamma(dt) * j as f64).exp()
    }
}

/// Counterexample 2: `u = (2δ)^{-1/2} e^{-α(1 + t/δ)/2} sin((k t + 1) π x)`.
pub fn cex2(params: Cex2Params, dt: f64) -> Result<ManufacturedSolution> {
    use std::f64::consts::PI;
    if params.k == 0 {
        return Err(PodError::InvalidParameter("k must be positive".into()));
    }
    for (name, v) in [("alpha", params.alpha), ("delta", params.delta), ("nu", params.nu)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(PodError::InvalidParameter(format!("{name} must be positive")));
        }
    }
    check_integer_rate(params.k, dt)?;
    let Cex2Params { k, alpha, delta, nu } = params;
    let k = k as f64;
    let amp = move |t: f64| (-alpha * (1.0 + t / delta) / 2.0).exp() / (2.0 * delta).sqrt();
    let mut sol = ManufacturedSolution::custom(
        format!("cex2(k={},alpha={alpha},delta={delta})", params.k),
        nu,
        move |x, t| amp(t) * ((k * t + 1.0) * PI * x).sin(),
        move |x, t| {
            let a = amp(t);
            let da = -alpha / (2.0 * delta) * a;
            let w = (k * t + 1.0) * PI;
            let (s, c) = (w * x).sin_cos();
            da * s + a * k * PI * x * c + nu * a * w * w * s
        },
    );
    sol.frequency_rate = Some(params.k);
    Ok(sol)
}

/// Nodal snapshots `u⁰..u^N` on a uniform time grid, optionally with difference quotients.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    mesh: Mesh1D,
    u: DMatrix<f64>,
    dt: f64,
    dq: Option<DMatrix<f64>>,
}

impl SnapshotSet {
    /// Wraps an explicit snapshot matrix (one column per time level).
    pub fn from_matrix(mesh: Mesh1D, u: DMatrix<f64>, dt: f64, with_dq: bool) -> Result<Self> {
        if u.nrows() != mesh.n_dof() {
            return Err(PodError::DimensionMismatch {
                expected: mesh.n_dof(),
                got: u.nrows(),
            });
        }
        if u.ncols() < 2 {
            return Err(PodError::InvalidParameter(
                "a snapshot set needs at least two time levels".into(),
            ));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(PodError::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if let Some(v) = u.iter().find(|v| !v.is_finite()) {
            return Err(PodError::NonFinite {
                value: *v,
                location: "snapshot matrix".into(),
            });
        }
        let dq = if with_dq {
            Some(difference_quotients(&u, dt)?)
        } else {
            None
        };
        Ok(Self { mesh, u, dt, dq })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    /// Snapshot matrix, columns `u⁰..u^N`.
    pub fn snapshots(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn difference_quotients(&self) -> Option<&DMatrix<f64>> {
        self.dq.as_ref()
    }

    pub fn has_dq(&self) -> bool {
        self.dq.is_some()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of time steps `N`.
    pub fn n_steps(&self) -> usize {
        self.u.ncols() - 1
    }

    /// Final time `T = N Δt`.
    pub fn t_final(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// POD weight: `1/(N+1)` without DQs, `1/(2N+1)` with.
    pub fn weight(&self) -> f64 {
        1.0 / self.n_columns() as f64
    }

    /// Number of columns in the POD collection (`N+1` or `2N+1`).
    pub fn n_columns(&self) -> usize {
        self.u.ncols() + self.dq.as_ref().map_or(0, |d| d.ncols())
    }

    /// The POD collection: snapshots followed by DQs when present.
    pub fn collection(&self) -> DMatrix<f64> {
        match &self.dq {
            None => self.u.clone(),
            Some(dq) => {
                let mut all = DMatrix::zeros(self.u.nrows(), self.n_columns());
                all.columns_mut(0, self.u.ncols()).copy_from(&self.u);
                all.columns_mut(self.u.ncols(), dq.ncols()).copy_from(dq);
                all
            }
        }
    }

    /// Same snapshots with the DQ columns dropped.
    pub fn without_dq(&self) -> SnapshotSet {
        SnapshotSet {
            mesh: self.mesh,
            u: self.u.clone(),
            dt: self.dt,
            dq: None,
        }
    }

    pub fn with_dq(&self) -> Result<SnapshotSet> {
        SnapshotSet::from_matrix(self.mesh, self.u.clone(), self.dt, true)
    }

    /// Writes the snapshot columns as CSV: header `x_index,t0,t1,...`, one row per interior node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_columns_csv(out, "x_index", "t", &self.u)
    }

    /// Reads snapshots written by [`SnapshotSet::write_csv`].
    pub fn read_csv<R: Read>(input: R, mesh: Mesh1D, dt: f64, with_dq: bool) -> Result<Self> {
        let (_, u) = read_columns_csv(input)?;
        Self::from_matrix(mesh, u, dt, with_dq)
    }
}

pub(crate) fn write_columns_csv<W: Write>(
    out: W,
    index_name: &str,
    col_prefix: &str,
    cols: &DMatrix<f64>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec![index_name.to_string()];
    header.extend((0..cols.ncols()).map(|j| format!("{col_prefix}{j}")));
    w.write_record(&header)?;
    for i in 0..cols.nrows() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(cols.row(i).iter().map(|v| fmt_g17(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Returns the header names (after the index column) and the numeric body.
pub(crate) fn read_columns_csv<R: Read>(input: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| PodError::Parse(format!("bad number '{s}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(PodError::DimensionMismatch {
                expected: header.len(),
                got: row.len(),
            });
        }
        rows.push(row);
    }
    let m = DMatrix::from_fn(rows.len(), header.len(), |i, j| rows[i][j]);
    Ok((header, m))
}

/// Samples `sol` at `t_n = n T / N`, `n = 0..N`, on the mesh nodes.
pub fn generate_snapshots(
    sol: &ManufacturedSolution,
    mesh: &Mesh1D,
    t_final: f64,
    n_steps: usize,
    with_dq: bool,
) -> Result<SnapshotSet> {
    if n_steps < 1 {
        return Err(PodError::InvalidParameter("need at least one time step".into()));
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(PodError::InvalidParameter(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    let dt = t_final / n_steps as f64;
    sol.check_time_step(dt)?;
    let mut u = DMatrix::zeros(mesh.n_dof(), n_steps + 1);
    for n in 0..=n_steps {
        let t = n as f64 * dt;
        let col = interpolate_values(|x| sol.u(x, t), mesh)?;
        u.set_column(n, &col);
    }
    SnapshotSet::from_matrix(*mesh, u, dt, with_dq)
}

/// Columns `(uⁿ - uⁿ⁻¹) / Δt` for `n = 1..N`.
pub fn difference_quotients(u: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    if u.ncols() < 2 {
        return Err(PodError::InvalidParameter(
            "difference quotients need at least two snapshots".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(PodError::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let n = u.ncols() - 1;
    Ok(DMatrix::from_fn(u.nrows(), n, |i, j| (u[(i, j + 1)] - u[(i, j)]) / dt))
}

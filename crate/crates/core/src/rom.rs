//! Crank-Nicolson POD-Galerkin reduced-order model of `u_t − ν u_xx = f`.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{PodError, Result};
use crate::fem1d::{FeSpace, Mesh1D, SpaceTag};
use crate::numfmt::fmt_g17;
use crate::pod::PodBasis;
use crate::projections::{tail_sum, Projector, ProjectorKind};
use crate::snapshots::{write_columns_csv, ManufacturedSolution};

/// Time quadrature of the load in a CN step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingRule {
    /// `(F(t_{n+1}) + F(t_n)) / 2`.
    #[default]
    Average,
    /// `F(t_n + Δt/2)`.
    Midpoint,
}

/// Projection used for the ROM initial condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    L2,
    Ritz,
}

impl IcKind {
    pub fn projector(self) -> ProjectorKind {
        match self {
            IcKind::L2 => ProjectorKind::L2,
            IcKind::Ritz => ProjectorKind::Ritz,
        }
    }
}

impl std::str::FromStr for IcKind {
    type Err = PodError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(IcKind::L2),
            "ritz" => Ok(IcKind::Ritz),
            other => Err(PodError::Parse(format!(
                "unknown initial projection '{other}' (expected l2 or ritz)"
            ))),
        }
    }
}

/// Reduced Galerkin system on the first `r` POD modes.
#[derive(Clone, Debug)]
pub struct RomModel {
    mesh: Mesh1D,
    phi: Arc<DMatrix<f64>>,
    m_phi: DMatrix<f64>,
    m_r: DMatrix<f64>,
    s_r: DMatrix<f64>,
    nu: f64,
    sol: ManufacturedSolution,
    forcing_rule: ForcingRule,
}

fn symmetrized(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// Assembles the reduced mass, stiffness and load operators.
pub fn assemble_rom(
    basis: &PodBasis,
    r: usize,
    nu: f64,
    sol: &ManufacturedSolution,
    mesh: &Mesh1D,
) -> Result<RomModel> {
    basis.check_rank(r)?;
    basis.mesh().check_same(mesh)?;
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(PodError::InvalidParameter(format!(
            "viscosity must be positive, got {nu}"
        )));
    }
    let fe = FeSpace::new(*mesh);
    let phi = basis.leading_modes(r).into_owned();
    let m_phi = fe.mass().apply_cols(&phi);
    let m_r = symmetrized(phi.tr_mul(&m_phi));
    let s_r = symmetrized(fe.stiffness().inner_cols(&phi, &phi));
    Ok(RomModel {
        mesh: *mesh,
        phi: Arc::new(phi),
        m_phi,
        m_r,
        s_r,
        nu,
        sol: sol.clone(),
        forcing_rule: ForcingRule::Average,
    })
}

impl RomModel {
    pub fn with_forcing_rule(mut self, rule: ForcingRule) -> Self {
        self.forcing_rule = rule;
        self
    }

    pub fn forcing_rule(&self) -> ForcingRule {
        self.forcing_rule
    }

    pub fn rank(&self) -> usize {
        self.m_r.nrows()
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn reduced_mass(&self) -> &DMatrix<f64> {
        &self.m_r
    }

    pub fn reduced_stiffness(&self) -> &DMatrix<f64> {
        &self.s_r
    }

    pub fn modes(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Reduced load `Φᵀ M f_h(t)`.
    pub fn forcing(&self, t: f64) -> Result<DVector<f64>> {
        let f = self.sol.interpolate_f(&self.mesh, t)?;
        Ok(self.m_phi.tr_mul(f.values()))
    }
}

/// Coefficients of the chosen projection of `u0` onto the first `r` modes.
pub fn rom_initial_condition(
    basis: &PodBasis,
    r: usize,
    u0: &crate::fem1d::NodalField,
    kind: IcKind,
) -> Result<DVector<f64>> {
    basis.mesh().check_same(u0.mesh())?;
    let proj = Projector::new(basis, r, kind.projector())?;
    let c = proj.coefficients(&DMatrix::from_column_slice(
        u0.values().len(),
        1,
        u0.values().as_slice(),
    ));
    Ok(c.column(0).into_owned())
}

/// ROM coefficients `a⁰..a^N`, one row per time level.
#[derive(Clone, Debug)]
pub struct RomTrajectory {
    coeffs: DMatrix<f64>,
    dt: f64,
    mesh: Mesh1D,
    phi: Arc<DMatrix<f64>>,
}

impl RomTrajectory {
    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    /// Nodal values of `u_r^n = Φ_r aⁿ`.
    pub fn reconstruct(&self, n: usize) -> DVector<f64> {
        &*self.phi * self.coeffs.row(n).transpose()
    }

    /// Writes `step,t,a1,..,ar` rows at full precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["step".to_string(), "t".to_string()];
        header.extend((1..=self.coeffs.ncols()).map(|i| format!("a{i}")));
        w.write_record(&header)?;
        for (n, row) in self.coeffs.row_iter().enumerate() {
            let mut rec = vec![n.to_string(), fmt_g17(n as f64 * self.dt)];
            rec.extend(row.iter().map(|v| fmt_g17(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes reconstructed nodal fields in the snapshot CSV layout.
    pub fn write_fields_csv<W: Write>(&self, out: W) -> Result<()> {
        let fields = &*self.phi * self.coeffs.transpose();
        write_columns_csv(out, "x_index", "t", &fields)
    }
}

/// Runs `n_steps` CN steps from `a0`, factorizing the left-hand matrix once.
pub fn cn_solve(model: &RomModel, a0: &DVector<f64>, dt: f64, n_steps: usize) -> Result<RomTrajectory> {
    if n_steps < 1 {
        return Err(PodError::InvalidParameter("need at least one time step".into()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(PodError::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let r = model.rank();
    if a0.len() != r {
        return Err(PodError::DimensionMismatch {
            expected: r,
            got: a0.len(),
        });
    }
    let half = 0.5 * model.nu;
    let lhs = &model.m_r / dt + &model.s_r * half;
    let rhs_op = &model.m_r / dt - &model.s_r * half;
    let chol: Cholesky<f64, Dyn> = Cholesky::new(lhs)
        .ok_or_else(|| PodError::NotPositiveDefinite(format!("Crank-Nicolson matrix of rank {r}")))?;

    let mut coeffs = DMatrix::zeros(n_steps + 1, r);
    coeffs.set_row(0, &a0.transpose());
    let mut a = a0.clone();
    let mut f_prev = match model.forcing_rule {
        ForcingRule::Average => Some(model.forcing(0.0)?),
        ForcingRule::Midpoint => None,
    };
    for n in 0..n_steps {
        let t = n as f64 * dt;
        let load = match model.forcing_rule {
            ForcingRule::Average => {
                let f_next = model.forcing(t + dt)?;
                let l = (f_prev.as_ref().expect("previous load") + &f_next) * 0.5;
                f_prev = Some(f_next);
                l
            }
            ForcingRule::Midpoint => model.forcing(t + 0.5 * dt)?,
        };
        let mut b = &rhs_op * &a + load;
        chol.solve_mut(&mut b);
        if let Some(v) = b.iter().find(|v| !v.is_finite()) {
            return Err(PodError::NonFinite {
                value: *v,
                location: format!("ROM step {}", n + 1),
            });
        }
        a = b;
        coeffs.set_row(n + 1, &a.transpose());
    }
    Ok(RomTrajectory {
        coeffs,
        dt,
        mesh: model.mesh,
        phi: Arc::clone(&model.phi),
    })
}

/// Errors `eⁿ = u_h(t_n) − u_r^n` of a ROM trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct RomErrorReport {
    /// `‖eⁿ‖_W` for `n = 1..N`.
    pub per_step: Vec<f64>,
    pub space: SpaceTag,
    pub max: f64,
    /// `‖eⁿ‖_{L²}` for `n = 1..N`.
    pub per_step_l2: Vec<f64>,
    /// `‖∇eⁿ‖_{L²}` for `n = 1..N`.
    pub per_step_h10: Vec<f64>,
    pub final_l2: f64,
    /// `Δt Σ_{n<N} ‖∇e^{n+1/2}‖²_{L²}`.
    pub energy: f64,
    pub dt: f64,
}

impl RomErrorReport {
    /// `max_{1≤k≤N} ‖eᵏ‖²_{L²}`.
    pub fn max_l2_sq(&self) -> f64 {
        self.per_step_l2.iter().map(|e| e * e).fold(0.0, f64::max)
    }

    /// `max_{1≤k≤N} ‖∇eᵏ‖²_{L²}`.
    pub fn max_h10_sq(&self) -> f64 {
        self.per_step_h10.iter().map(|e| e * e).fold(0.0, f64::max)
    }
}

pub fn rom_errors(
    traj: &RomTrajectory,
    sol: &ManufacturedSolution,
    mesh: &Mesh1D,
    space: SpaceTag,
) -> Result<RomErrorReport> {
    traj.mesh.check_same(mesh)?;
    let fe = FeSpace::new(*mesh);
    let n_steps = traj.n_steps();
    let mut errs = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        let exact = sol.interpolate_u(mesh, n as f64 * traj.dt)?;
        errs.push(exact.values() - traj.reconstruct(n));
    }
    let norms = |sp: SpaceTag| -> Vec<f64> { errs[1..].iter().map(|e| fe.norm(e.as_slice(), sp)).collect() };
    let per_step_l2 = norms(SpaceTag::L2);
    let per_step_h10 = norms(SpaceTag::H10);
    let per_step = match space {
        SpaceTag::L2 => per_step_l2.clone(),
        SpaceTag::H10 => per_step_h10.clone(),
    };
    let energy = traj.dt
        * errs
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) * 0.5;
                fe.norm_sq(mid.as_slice(), SpaceTag::H10)
            })
            .sum::<f64>();
    Ok(RomErrorReport {
        max: per_step.iter().copied().fold(0.0, f64::max),
        final_l2: *per_step_l2.last().expect("at least one step"),
        per_step,
        space,
        per_step_l2,
        per_step_h10,
        energy,
        dt: traj.dt,
    })
}

/// Which error bound the ROM ratio is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RatioVariant {
    /// `(N+1) Σ λ_i‖φ_i‖²_{L²} + Δt⁴ + Σ λ_i‖∇φ_i‖²_{L²}`.
    NoDq,
    /// `Σ λ_i‖φ_i − R_r φ_i‖²_{L²} + Δt⁴`.
    Dq,
}

/// Denominator of the ROM ratio; sums run over `i = r+1..s`.
pub fn rom_bound(basis: &PodBasis, r: usize, dt: f64, variant: RatioVariant) -> Result<f64> {
    basis.check_rank(r)?;
    if r == basis.rank() {
        return Err(PodError::ZeroTail);
    }
    let dt4 = dt.powi(4);
    Ok(match variant {
        RatioVariant::NoDq => {
            let np1 = (basis.n_steps() + 1) as f64;
            np1 * tail_sum(basis, r, SpaceTag::L2, ProjectorKind::PodOrthogonal)?
                + dt4
                + tail_sum(basis, r, SpaceTag::H10, ProjectorKind::PodOrthogonal)?
        }
        RatioVariant::Dq => tail_sum(basis, r, SpaceTag::L2, ProjectorKind::Ritz)? + dt4,
    })
}

/// `C_rom = max_k ‖eᵏ‖²_{L²} / bound`.
pub fn rom_ratio(report: &RomErrorReport, basis: &PodBasis, r: usize, variant: RatioVariant) -> Result<f64> {
    Ok(report.max_l2_sq() / rom_bound(basis, r, report.dt, variant)?)
}

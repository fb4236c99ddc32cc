//! Piecewise-linear finite elements on a uniform mesh of [0, 1].
//!
//! Homogeneous Dirichlet values are eliminated, so every vector lives on the
//! `n_elems - 1` interior nodes `x_j = j h`. Mass and stiffness matrices are
//! assembled in closed form (no quadrature).

use nalgebra::{DMatrix, DVector};

use crate::error::{PodError, Result};

/// Uniform 1D mesh on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh1D {
    n_elems: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(n_elems: usize) -> Result<Self> {
        if n_elems < 2 {
            return Err(PodError::InvalidMesh(format!(
                "need at least 2 elements for an interior node, got {n_elems}"
            )));
        }
        Ok(Self {
            n_elems,
            h: 1.0 / n_elems as f64,
        })
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    /// Mesh width.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior degrees of freedom.
    pub fn n_dof(&self) -> usize {
        self.n_elems - 1
    }

    /// Coordinate of interior node `j` (zero based), i.e. `(j + 1) h`.
    pub fn node(&self, j: usize) -> f64 {
        (j + 1) as f64 / self.n_elems as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_dof()).map(move |j| self.node(j))
    }

    pub(crate) fn check_same(&self, other: &Mesh1D) -> Result<()> {
        if self.n_elems != other.n_elems {
            return Err(PodError::MeshMismatch {
                left: self.n_elems,
                right: other.n_elems,
            });
        }
        Ok(())
    }
}

pub fn build_mesh(n_elems: usize) -> Result<Mesh1D> {
    Mesh1D::new(n_elems)
}

/// Symmetric tridiagonal matrix stored by diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Set when the matrix is `c Dᵀ D` with `D` the Dirichlet difference operator.
    grad_scale: Option<f64>,
}

/// Forward differences `x_i - x_{i-1}` with zero boundary values, `n + 1` entries.
fn differences(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = Vec::with_capacity(n + 1);
    let mut prev = 0.0;
    for &xi in x {
        d.push(xi - prev);
        prev = xi;
    }
    d.push(-prev);
    d
}

fn difference_cols(x: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows() + 1, x.ncols());
    for (src, mut dst) in x.column_iter().zip(out.column_iter_mut()) {
        for (o, d) in dst.iter_mut().zip(differences(src.as_slice())) {
            *o = scale * d;
        }
    }
    out
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(PodError::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                got: offdiag.len(),
            });
        }
        Ok(Self {
            diag,
            offdiag,
            grad_scale: None,
        })
    }

    fn constant(n: usize, d: f64, o: f64) -> Self {
        Self {
            diag: vec![d; n],
            offdiag: vec![o; n - 1],
            grad_scale: None,
        }
    }

    /// `c Dᵀ D`; inner products are then evaluated on differences, avoiding
    /// the cancellation of the assembled form for smooth vectors.
    fn scaled_laplacian(n: usize, c: f64) -> Self {
        Self {
            grad_scale: Some(c),
            ..Self::constant(n, 2.0 * c, -c)
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n, "tridiagonal apply: length mismatch");
        assert_eq!(y.len(), n, "tridiagonal apply: length mismatch");
        if n == 1 {
            y[0] = self.diag[0] * x[0];
            return;
        }
        y[0] = self.diag[0] * x[0] + self.offdiag[0] * x[1];
        for i in 1..n - 1 {
            y[i] = self.offdiag[i - 1] * x[i - 1] + self.diag[i] * x[i] + self.offdiag[i] * x[i + 1];
        }
        y[n - 1] = self.offdiag[n - 2] * x[n - 2] + self.diag[n - 1] * x[n - 1];
    }

    pub fn apply_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.apply(x.as_slice()))
    }

    /// Applies the matrix to every column of `x`.
    pub fn apply_cols(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for (src, mut dst) in x.column_iter().zip(out.column_iter_mut()) {
            self.apply_into(src.as_slice(), dst.as_mut_slice());
        }
        out
    }

    /// Bilinear form `uᵀ A v` without allocating.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(u.len(), n, "tridiagonal bilinear: length mismatch");
        assert_eq!(v.len(), n, "tridiagonal bilinear: length mismatch");
        if let Some(c) = self.grad_scale {
            let du = differences(u);
            let dv = differences(v);
            return c * du.iter().zip(&dv).map(|(a, b)| a * b).sum::<f64>();
        }
        let mut acc = 0.0;
        for i in 0..n {
            acc += u[i] * self.diag[i] * v[i];
        }
        for i in 0..n - 1 {
            acc += self.offdiag[i] * (u[i] * v[i + 1] + u[i + 1] * v[i]);
        }
        acc
    }

    /// Left factor `L(a)` with `L(a)ᵀ R(b) = aᵀ A b`.
    pub fn left_cols(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self.grad_scale {
            Some(c) => difference_cols(a, c),
            None => self.apply_cols(a),
        }
    }

    /// Right factor `R(b)`, see [`SymTridiag::left_cols`].
    pub fn right_cols(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self.grad_scale {
            Some(_) => difference_cols(b, 1.0),
            None => b.clone(),
        }
    }

    pub fn right_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        match self.grad_scale {
            Some(_) => DVector::from_vec(differences(b.as_slice())),
            None => b.clone(),
        }
    }

    pub fn left_vec(&self, a: &DVector<f64>) -> DVector<f64> {
        match self.grad_scale {
            Some(c) => DVector::from_vec(differences(a.as_slice())) * c,
            None => self.apply_vec(a),
        }
    }

    /// Length of the factored vectors.
    pub fn factor_rows(&self) -> usize {
        self.dim() + usize::from(self.grad_scale.is_some())
    }

    /// `aᵀ A b`.
    pub fn inner_cols(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.left_cols(a).tr_mul(&self.right_cols(b))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
        }
        for i in 0..n - 1 {
            a[(i, i + 1)] = self.offdiag[i];
            a[(i + 1, i)] = self.offdiag[i];
        }
        a
    }

    /// `A = L Lᵀ` with `L` lower bidiagonal.
    pub fn cholesky(&self) -> Result<TridiagCholesky> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let pivot = self.diag[i] - if i > 0 { l[i - 1] * l[i - 1] } else { 0.0 };
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(PodError::NotPositiveDefinite(format!(
                    "tridiagonal pivot {pivot:e} at row {i}"
                )));
            }
            d[i] = pivot.sqrt();
            if i + 1 < n {
                l[i] = self.offdiag[i] / d[i];
            }
        }
        Ok(TridiagCholesky { diag: d, sub: l })
    }
}

/// Bidiagonal Cholesky factor of a [`SymTridiag`].
#[derive(Clone, Debug)]
pub struct TridiagCholesky {
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.diag.len();
        assert_eq!(x.len(), n, "tridiagonal solve: length mismatch");
        // L y = b
        x[0] /= self.diag[0];
        for i in 1..n {
            x[i] = (x[i] - self.sub[i - 1] * x[i - 1]) / self.diag[i];
        }
        // Lᵀ x = y
        x[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.sub[i] * x[i + 1]) / self.diag[i];
        }
    }
}

/// Linear-FE mass matrix: `2h/3` on the diagonal, `h/6` off it.
pub fn mass_matrix(mesh: &Mesh1D) -> SymTridiag {
    let h = mesh.h();
    SymTridiag::constant(mesh.n_dof(), 2.0 * h / 3.0, h / 6.0)
}

/// Linear-FE stiffness matrix: `2/h` on the diagonal, `-1/h` off it.
pub fn stiffness_matrix(mesh: &Mesh1D) -> SymTridiag {
    let h = mesh.h();
    SymTridiag::scaled_laplacian(mesh.n_dof(), 1.0 / h)
}

/// Hilbert space used for POD inner products or error norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceTag {
    L2,
    #[serde(alias = "h1", alias = "h10")]
    H10,
}

impl SpaceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceTag::L2 => "L2",
            SpaceTag::H10 => "H10",
        }
    }
}

impl std::str::FromStr for SpaceTag {
    type Err = PodError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(SpaceTag::L2),
            "h1" | "h10" | "h1_0" => Ok(SpaceTag::H10),
            other => Err(PodError::Parse(format!("unknown space '{other}' (expected l2 or h1)"))),
        }
    }
}

impl std::fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mesh together with its mass and stiffness matrices.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: Mesh1D,
    mass: SymTridiag,
    stiffness: SymTridiag,
}

impl FeSpace {
    pub fn new(mesh: Mesh1D) -> Self {
        Self {
            mass: mass_matrix(&mesh),
            stiffness: stiffness_matrix(&mesh),
            mesh,
        }
    }

    pub fn with_elems(n_elems: usize) -> Result<Self> {
        Ok(Self::new(Mesh1D::new(n_elems)?))
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn mass(&self) -> &SymTridiag {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymTridiag {
        &self.stiffness
    }

    /// Gram operator of `space`.
    pub fn gram(&self, space: SpaceTag) -> &SymTridiag {
        match space {
            SpaceTag::L2 => &self.mass,
            SpaceTag::H10 => &self.stiffness,
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64], space: SpaceTag) -> f64 {
        self.gram(space).bilinear(u, v)
    }

    pub fn norm_sq(&self, u: &[f64], space: SpaceTag) -> f64 {
        self.gram(space).bilinear(u, u).max(0.0)
    }

    pub fn norm(&self, u: &[f64], space: SpaceTag) -> f64 {
        self.norm_sq(u, space).sqrt()
    }
}

/// Interior nodal values of a finite element function.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    mesh: Mesh1D,
    values: DVector<f64>,
}

impl NodalField {
    pub fn new(mesh: Mesh1D, values: DVector<f64>) -> Result<Self> {
        if values.len() != mesh.n_dof() {
            return Err(PodError::DimensionMismatch {
                expected: mesh.n_dof(),
                got: values.len(),
            });
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Mesh1D) -> Self {
        Self {
            values: DVector::zeros(mesh.n_dof()),
            mesh,
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            mesh: self.mesh,
            values: &self.values * alpha,
        }
    }
}

/// Lagrange interpolant: `values[j] = f(x_j)` at interior nodes.
pub fn interpolate<F: Fn(f64) -> f64>(f: F, mesh: &Mesh1D) -> Result<NodalField> {
    let values = interpolate_values(f, mesh)?;
    Ok(NodalField { mesh: *mesh, values })
}

pub(crate) fn interpolate_values<F: Fn(f64) -> f64>(f: F, mesh: &Mesh1D) -> Result<DVector<f64>> {
    let mut values = DVector::zeros(mesh.n_dof());
    for (j, x) in mesh.nodes().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(PodError::NonFinite {
                value: v,
                location: format!("x = {x}"),
            });
        }
        values[j] = v;
    }
    Ok(values)
}

/// `uᵀ M v` for L2, `uᵀ S v` for H¹₀.
pub fn inner_product(u: &NodalField, v: &NodalField, space: SpaceTag) -> Result<f64> {
    u.mesh.check_same(&v.mesh)?;
    let gram = match space {
        SpaceTag::L2 => mass_matrix(&u.mesh),
        SpaceTag::H10 => stiffness_matrix(&u.mesh),
    };
    Ok(gram.bilinear(u.values.as_slice(), v.values.as_slice()))
}

pub fn norm(u: &NodalField, space: SpaceTag) -> Result<f64> {
    Ok(inner_product(u, u, space)?.max(0.0).sqrt())
}

/// Symmetric positive definite operator that can be solved directly.
pub trait SpdSolve {
    fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>>;
}

impl SpdSolve for SymTridiag {
    fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(PodError::DimensionMismatch {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        Ok(self.cholesky()?.solve(rhs))
    }
}

impl SpdSolve for DMatrix<f64> {
    fn solve_spd(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if !self.is_square() || rhs.len() != self.nrows() {
            return Err(PodError::DimensionMismatch {
                expected: self.nrows(),
                got: rhs.len(),
            });
        }
        let chol = dense_cholesky(self.clone())?;
        Ok(chol.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec())
    }
}

pub(crate) fn dense_cholesky(a: DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = a.nrows();
    nalgebra::Cholesky::new(a)
        .ok_or_else(|| PodError::NotPositiveDefinite(format!("dense {n}x{n} Cholesky factorization failed")))
}

/// Solves `G x = rhs` for SPD `G` by direct factorization.
pub fn solve_gram<G: SpdSolve + ?Sized>(g: &G, rhs: &[f64]) -> Result<Vec<f64>> {
    g.solve_spd(rhs)
}

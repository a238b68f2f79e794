//! Adiabatic connection, frame transport and curvature.
//!
//! Conventions: for a frame field `V(λ)` spanning level `l`, the connection
//! components are `A_μ = V† ∂_μ V` (anti-Hermitian). Curvature follows
//!
//! ```text
//! F_μν = ∂_ν A_μ − ∂_μ A_ν − [A_μ, A_ν]
//! ```
//!
//! Raw eigensolver frames carry an arbitrary gauge at every point, so
//! derivatives are taken in a smooth frame field: the family's own section
//! when it has one, otherwise the radial gauge obtained by projecting a
//! reference frame onto nearby eigenspaces and re-orthonormalizing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{anti_hermitian_defect, anti_hermitian_part, commutator, polar_unitary, to_real_coords, zeros};
use crate::loops::ControlPoint;
use crate::scalar::{c, cr, CMatrix, Real};
use crate::spectral::HamiltonianFamily;

/// Smallest singular value below which projected frames count as rank-deficient.
pub const TRANSPORT_BREAKDOWN_SIGMA: f64 = 1e-6;
/// Allowed non-anti-Hermitian residue of a numerical connection.
pub const GAUGE_RESIDUE_TOL: f64 = 1e-6;
/// Singular-value threshold for the curvature span.
pub const SPAN_THRESHOLD: f64 = 1e-8;

/// Orthonormal basis of a level's eigenspace at a point.
#[derive(Debug, Clone)]
pub struct Frame<R: Real> {
    pub point: ControlPoint<R>,
    pub level: usize,
    /// `N × n_l`, orthonormal columns.
    pub columns: CMatrix<R>,
}

impl<R: Real> Frame<R> {
    /// Same eigenspace, basis rotated by the unitary `g` (acting on the right).
    pub fn regauged(&self, g: &CMatrix<R>) -> Self {
        Self {
            point: self.point.clone(),
            level: self.level,
            columns: &self.columns * g,
        }
    }

    pub fn projector(&self) -> CMatrix<R> {
        &self.columns * self.columns.adjoint()
    }
}

/// Finite-difference step `1e-4·(1 + |λ|)`, raised for low-precision scalars.
pub fn default_step<R: Real>(at: &ControlPoint<R>) -> R {
    let base = R::lit(1e-4).max(R::epsilon().powf(R::lit(1.0 / 3.0)));
    base * (R::one() + at.coords().norm())
}

pub fn frame_at<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    at: &ControlPoint<R>,
    level: usize,
) -> Result<Frame<R>> {
    Ok(Frame {
        point: at.clone(),
        level,
        columns: family.frame(at, level)?,
    })
}

/// Projects `columns` onto `projector` and restores orthonormality with the
/// unitary polar factor.
pub(crate) fn project_and_orthonormalize<R: Real>(
    projector: &CMatrix<R>,
    columns: &CMatrix<R>,
    at: &ControlPoint<R>,
) -> Result<CMatrix<R>> {
    let (w, smin) = polar_unitary(&(projector * columns));
    if !(smin > R::tol(TRANSPORT_BREAKDOWN_SIGMA)) {
        return Err(Error::TransportBreakdown {
            point: at.to_f64(),
            sigma: smin.as_f64(),
        });
    }
    Ok(w)
}

/// One step of discrete parallel transport: project onto the eigenspace at
/// `next` and take the unitary polar factor.
pub fn transport_frame<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    frame: &Frame<R>,
    next: &ControlPoint<R>,
) -> Result<Frame<R>> {
    let p = family.projector(next, frame.level)?;
    Ok(Frame {
        point: next.clone(),
        level: frame.level,
        columns: project_and_orthonormalize(&p, &frame.columns, next)?,
    })
}

/// Which smooth frame field a connection was evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// The family's own section, e.g. `X(λ)·V₀` for orbit families.
    Section,
    /// Projection of the reference frame onto nearby eigenspaces.
    Radial,
}

/// Connection components `A_μ` at a point, one anti-Hermitian `n × n`
/// matrix per control direction.
#[derive(Debug, Clone)]
pub struct ConnectionSample<R: Real> {
    pub point: ControlPoint<R>,
    pub level: usize,
    pub gauge: Gauge,
    pub components: Vec<CMatrix<R>>,
}

impl<R: Real> ConnectionSample<R> {
    /// `−A_μ`: the potential whose path-ordered exponential `P exp ∫(−A)` is
    /// the parallel transport.
    pub fn transport_potential(&self) -> Vec<CMatrix<R>> {
        self.components.iter().map(|a| -a).collect()
    }

    /// Holomorphic coefficient `(X_re − i X_im)/2` of a potential for a
    /// complex coordinate split into real axes `re` and `im`.
    pub fn holomorphic(potential: &[CMatrix<R>], re: usize, im: usize) -> CMatrix<R> {
        (&potential[re] - &potential[im] * c(R::zero(), R::one())) * cr(R::lit(0.5))
    }
}

/// A smooth frame field around a point.
enum FrameField<'a, R: Real, F: HamiltonianFamily<R> + ?Sized> {
    Section { family: &'a F, level: usize },
    Radial { family: &'a F, reference: &'a Frame<R> },
}

impl<'a, R: Real, F: HamiltonianFamily<R> + ?Sized> FrameField<'a, R, F> {
    fn gauge(&self) -> Gauge {
        match self {
            Self::Section { .. } => Gauge::Section,
            Self::Radial { .. } => Gauge::Radial,
        }
    }

    fn eval(&self, at: &ControlPoint<R>) -> Result<CMatrix<R>> {
        match self {
            Self::Section { family, level } => family
                .section(at, *level)
                .unwrap_or_else(|| Err(Error::InvalidInput("family has no section".into()))),
            Self::Radial { family, reference } => {
                let p = family.projector(at, reference.level)?;
                project_and_orthonormalize(&p, &reference.columns, at)
            }
        }
    }

    fn central(&self, at: &ControlPoint<R>, axis: usize, h: R) -> Result<CMatrix<R>> {
        let plus = self.eval(&at.shifted(axis, h))?;
        let minus = self.eval(&at.shifted(axis, -h))?;
        Ok((plus - minus) * cr(R::one() / (h + h)))
    }

    /// Richardson-extrapolated central difference, fourth order in `h`.
    fn derivative(&self, at: &ControlPoint<R>, axis: usize, h: R) -> Result<CMatrix<R>> {
        let coarse = self.central(at, axis, h)?;
        let fine = self.central(at, axis, h * R::lit(0.5))?;
        Ok((fine * cr(R::lit(4.0)) - coarse) * cr(R::one() / R::lit(3.0)))
    }
}

fn check_dims<R: Real, F: HamiltonianFamily<R> + ?Sized>(family: &F, at: &ControlPoint<R>) -> Result<()> {
    if at.dim() != family.control_dim() {
        return Err(Error::InvalidInput(format!(
            "point has dimension {}, family has {} controls",
            at.dim(),
            family.control_dim()
        )));
    }
    Ok(())
}

fn connection_from_field<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    field: &FrameField<'_, R, F>,
    at: &ControlPoint<R>,
    level: usize,
    h: R,
) -> Result<ConnectionSample<R>> {
    if !(h > R::zero()) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let v = field.eval(at)?;
    let vd = v.adjoint();
    let mut components = Vec::with_capacity(at.dim());
    for axis in 0..at.dim() {
        let raw = &vd * field.derivative(at, axis, h)?;
        let residue = anti_hermitian_defect(&raw);
        if residue > R::tol(GAUGE_RESIDUE_TOL) {
            return Err(Error::GaugeSmoothness {
                residue: residue.as_f64(),
            });
        }
        components.push(anti_hermitian_part(&raw));
    }
    Ok(ConnectionSample {
        point: at.clone(),
        level,
        gauge: field.gauge(),
        components,
    })
}

/// Connection at `at`: in the family's section when available, otherwise in
/// the radial gauge around [`frame_at`] (where it vanishes at the centre).
pub fn connection_at<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    at: &ControlPoint<R>,
    level: usize,
    h: R,
) -> Result<ConnectionSample<R>> {
    check_dims(family, at)?;
    family.signature().multiplicity(level)?;
    if family.section(at, level).is_some() {
        connection_from_field(&FrameField::Section { family, level }, at, level, h)
    } else {
        let reference = frame_at(family, at, level)?;
        connection_in_frame(family, &reference, h)
    }
}

/// Radial-gauge connection around an explicitly chosen reference frame.
pub fn connection_in_frame<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    reference: &Frame<R>,
    h: R,
) -> Result<ConnectionSample<R>> {
    check_dims(family, &reference.point)?;
    let field = FrameField::Radial { family, reference };
    connection_from_field(&field, &reference.point, reference.level, h)
}

/// Curvature components `F_μν`, antisymmetric in `(μ, ν)`.
#[derive(Debug, Clone)]
pub struct CurvatureTensor<R: Real> {
    pub point: ControlPoint<R>,
    pub level: usize,
    /// `d × d` array of `n × n` matrices.
    pub components: Vec<Vec<CMatrix<R>>>,
}

impl<R: Real> CurvatureTensor<R> {
    /// Assembles the tensor from its upper triangle; the lower triangle is the
    /// exact negative and the diagonal is zero.
    pub fn from_upper<G>(point: ControlPoint<R>, level: usize, n: usize, mut upper: G) -> Result<Self>
    where
        G: FnMut(usize, usize) -> Result<CMatrix<R>>,
    {
        let d = point.dim();
        let mut components = vec![vec![zeros::<R>(n, n); d]; d];
        for mu in 0..d {
            for nu in (mu + 1)..d {
                let f = upper(mu, nu)?;
                components[nu][mu] = -&f;
                components[mu][nu] = f;
            }
        }
        Ok(Self {
            point,
            level,
            components,
        })
    }

    pub fn get(&self, mu: usize, nu: usize) -> &CMatrix<R> {
        &self.components[mu][nu]
    }

    pub fn control_dim(&self) -> usize {
        self.components.len()
    }

    /// The independent components `F_μν`, `μ < ν`.
    pub fn upper_components(&self) -> Vec<&CMatrix<R>> {
        let d = self.control_dim();
        (0..d)
            .flat_map(|mu| ((mu + 1)..d).map(move |nu| (mu, nu)))
            .map(|(mu, nu)| &self.components[mu][nu])
            .collect()
    }

    /// Same tensor in the basis `frame·g`: `F ↦ g† F g`.
    pub fn regauged(&self, g: &CMatrix<R>) -> Self {
        let gd = g.adjoint();
        Self {
            point: self.point.clone(),
            level: self.level,
            components: self
                .components
                .iter()
                .map(|row| row.iter().map(|f| &gd * f * g).collect())
                .collect(),
        }
    }

    /// `d × d` nested arrays of row-major `(re, im)` pairs.
    pub fn to_nested_arrays(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        self.components
            .iter()
            .map(|row| row.iter().map(crate::linalg::to_pairs).collect())
            .collect()
    }
}

/// Numerical route to the curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureScheme {
    /// `∂_ν A_μ − ∂_μ A_ν = (∂_ν V)†(∂_μ V) − (∂_μ V)†(∂_ν V)`, so only first
    /// derivatives of the frame field are differenced.
    #[default]
    FrameDerivative,
    /// Central differences of connection samples taken at displaced points.
    NestedConnection,
}

/// Curvature at `at` in the radial gauge around [`frame_at`].
pub fn curvature_at<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    at: &ControlPoint<R>,
    level: usize,
    h: R,
) -> Result<CurvatureTensor<R>> {
    check_dims(family, at)?;
    let reference = frame_at(family, at, level)?;
    curvature_in_frame(family, &reference, h, CurvatureScheme::default())
}

/// Curvature expressed in the basis of `reference`.
pub fn curvature_in_frame<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    reference: &Frame<R>,
    h: R,
    scheme: CurvatureScheme,
) -> Result<CurvatureTensor<R>> {
    check_dims(family, &reference.point)?;
    if !(h > R::zero()) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let at = &reference.point;
    let n = reference.columns.ncols();
    let field = FrameField::Radial { family, reference };
    match scheme {
        CurvatureScheme::FrameDerivative => {
            let v = field.eval(at)?;
            let vd = v.adjoint();
            let dv: Vec<CMatrix<R>> = (0..at.dim())
                .map(|axis| field.central(at, axis, h))
                .collect::<Result<_>>()?;
            let a: Vec<CMatrix<R>> = dv.iter().map(|d| anti_hermitian_part(&(&vd * d))).collect();
            CurvatureTensor::from_upper(at.clone(), reference.level, n, |mu, nu| {
                let curl = dv[nu].adjoint() * &dv[mu] - dv[mu].adjoint() * &dv[nu];
                Ok(curl - commutator(&a[mu], &a[nu]))
            })
        }
        CurvatureScheme::NestedConnection => {
            let plain = |p: &ControlPoint<R>, axis: usize| -> Result<CMatrix<R>> {
                let v = field.eval(p)?;
                Ok(anti_hermitian_part(&(v.adjoint() * field.central(p, axis, h)?)))
            };
            let d = at.dim();
            let a: Vec<CMatrix<R>> = (0..d).map(|mu| plain(at, mu)).collect::<Result<_>>()?;
            let scale = cr(R::one() / (h + h));
            let partial = |mu: usize, nu: usize| -> Result<CMatrix<R>> {
                // ∂_ν A_μ
                Ok((plain(&at.shifted(nu, h), mu)? - plain(&at.shifted(nu, -h), mu)?) * scale)
            };
            CurvatureTensor::from_upper(at.clone(), reference.level, n, |mu, nu| {
                Ok(partial(mu, nu)? - partial(nu, mu)? - commutator(&a[mu], &a[nu]))
            })
        }
    }
}

/// Dimension of the real-linear span of `components` inside the `n × n`
/// matrices, and whether it fills all of `u(n)`.
pub fn span_dimension<R: Real>(components: &[&CMatrix<R>], n: usize) -> (usize, bool) {
    if components.is_empty() {
        return (0, n == 0);
    }
    let rows: Vec<Vec<R>> = components.iter().map(|m| to_real_coords(m)).collect();
    let cols = rows[0].len();
    let coeff = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let sv = coeff.svd(false, false).singular_values;
    let largest = sv.iter().copied().fold(R::zero(), |a, b| a.max(b));
    let threshold = R::tol(SPAN_THRESHOLD) * R::one().max(largest);
    let dim = sv.iter().filter(|&&s| s > threshold).count();
    (dim, dim == n * n)
}

/// Span dimension of the curvature components and whether they span `u(n)`.
pub fn irreducibility_dimension<R: Real>(f: &CurvatureTensor<R>) -> (usize, bool) {
    let n = f.components.first().and_then(|r| r.first()).map_or(0, |m| m.nrows());
    span_dimension(&f.upper_components(), n)
}

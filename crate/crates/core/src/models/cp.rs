//! The `CP^{N−1}` family: `H(z) = ε_code Π_z + ε_single (1 − Π_z)` with
//! `Π_z = U(z) Π U(z)†` and `Π` projecting on the first `N − 1` basis states.
//!
//! Controls are real coordinates `z_α = z_α⁰ + i z_α¹` interleaved as
//! `μ = 2α + n` (`α` zero-based, `n ∈ {0, 1}`), so `d = 2(N − 1)`. Basis
//! state `|N⟩` is index `N − 1`.

use nalgebra::{DMatrix, DVector};

use crate::connection::CurvatureTensor;
use crate::error::{Error, Result};
use crate::linalg::{identity, zeros};
use crate::loops::ControlPoint;
use crate::scalar::{c, cr, CMatrix, Real, C};
use crate::spectral::{make_orbit_family, OrbitFamily};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpModel {
    pub n: usize,
    pub eps_code: f64,
    pub eps_single: f64,
}

impl CpModel {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_energies(n, 0.0, 1.0)
    }

    pub fn with_energies(n: usize, eps_code: f64, eps_single: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("CP model needs N >= 2, got {n}")));
        }
        if !(eps_code.is_finite() && eps_single.is_finite()) || eps_code == eps_single {
            return Err(Error::InvalidInput("code and single energies must be finite and distinct".into()));
        }
        Ok(Self {
            n,
            eps_code,
            eps_single,
        })
    }

    pub fn control_dim(&self) -> usize {
        2 * (self.n - 1)
    }
}

/// `sin r / r` and `(r cos r − sin r)/r³`, with series near 0.
fn sinc_pair<R: Real>(r: R) -> (R, R) {
    if r < R::lit(1e-4) {
        let r2 = r * r;
        (
            R::one() - r2 / R::lit(6.0),
            -R::one() / R::lit(3.0) + r2 / R::lit(30.0),
        )
    } else {
        let (s, co) = (r.sin(), r.cos());
        (s / r, (r * co - s) / (r * r * r))
    }
}

fn coordinates<R: Real>(model: &CpModel, z: &ControlPoint<R>) -> Result<Vec<C<R>>> {
    if z.dim() != model.control_dim() {
        return Err(Error::InvalidInput(format!(
            "CP^{} expects {} real coordinates, got {}",
            model.n - 1,
            model.control_dim(),
            z.dim()
        )));
    }
    let x = z.coords();
    Ok((0..model.n - 1).map(|a| c(x[2 * a], x[2 * a + 1])).collect())
}

/// `U_α(z_α) = exp(z_α|α⟩⟨N| − z̄_α|N⟩⟨α|)` in closed form.
fn factor<R: Real>(n: usize, alpha: usize, z: C<R>) -> CMatrix<R> {
    let r = (z.re * z.re + z.im * z.im).sqrt();
    let (s, _) = sinc_pair(r);
    let mut u = identity::<R>(n);
    let last = n - 1;
    u[(alpha, alpha)] = cr(r.cos());
    u[(last, last)] = cr(r.cos());
    u[(alpha, last)] = z * s;
    u[(last, alpha)] = -z.conj() * s;
    u
}

/// `∂U_α/∂z_α^n`.
fn factor_derivative<R: Real>(n: usize, alpha: usize, z: C<R>, part: usize) -> CMatrix<R> {
    let r = (z.re * z.re + z.im * z.im).sqrt();
    let (s, t) = sinc_pair(r);
    let xn = if part == 0 { z.re } else { z.im };
    // ∂z/∂z^n = iⁿ, ∂z̄/∂z^n = (−i)ⁿ
    let (dz, dzbar) = if part == 0 {
        (cr(R::one()), cr(R::one()))
    } else {
        (c(R::zero(), R::one()), c(R::zero(), -R::one()))
    };
    let mut d = zeros::<R>(n, n);
    let last = n - 1;
    let dcos = cr(-s * xn);
    d[(alpha, alpha)] = dcos;
    d[(last, last)] = dcos;
    d[(alpha, last)] = dz * s + z * (t * xn);
    d[(last, alpha)] = -(dzbar * s + z.conj() * (t * xn));
    d
}

/// `U(z) = U_{N−1} ⋯ U_1`: ascending α, earlier factors on the right.
pub fn cp_unitary<R: Real>(model: &CpModel, z: &ControlPoint<R>) -> Result<CMatrix<R>> {
    let zs = coordinates(model, z)?;
    Ok(zs
        .iter()
        .enumerate()
        .fold(identity::<R>(model.n), |acc, (a, &za)| factor(model.n, a, za) * acc))
}

/// `∂U/∂z^μ` for real coordinate `μ = 2α + n`.
pub fn cp_unitary_derivative<R: Real>(model: &CpModel, z: &ControlPoint<R>, mu: usize) -> Result<CMatrix<R>> {
    let zs = coordinates(model, z)?;
    if mu >= model.control_dim() {
        return Err(Error::InvalidInput(format!("direction {mu} out of range")));
    }
    let (alpha, part) = (mu / 2, mu % 2);
    Ok(zs.iter().enumerate().fold(identity::<R>(model.n), |acc, (a, &za)| {
        let f = if a == alpha {
            factor_derivative(model.n, a, za, part)
        } else {
            factor(model.n, a, za)
        };
        f * acc
    }))
}

/// The family as an orbit of `diag(ε_code, …, ε_code, ε_single)` under `U(z)`;
/// its section is `U(z)·V₀` with `V₀` the first `N − 1` basis vectors.
pub fn cp_family<R: Real>(model: &CpModel) -> Result<OrbitFamily<R>> {
    let n = model.n;
    let h0 = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
        cr(R::lit(if i + 1 < n { model.eps_code } else { model.eps_single }))
    }));
    let m = *model;
    make_orbit_family(h0, model.control_dim(), move |z: &ControlPoint<R>| {
        cp_unitary(&m, z).unwrap_or_else(|_| zeros(m.n, m.n))
    })
}

/// Analytic connection `A_μ = V₀† U† ∂_μU V₀` in the section gauge.
pub fn cp_connection<R: Real>(model: &CpModel, z: &ControlPoint<R>) -> Result<Vec<CMatrix<R>>> {
    let u = cp_unitary(model, z)?;
    let ud = u.adjoint();
    let k = model.n - 1;
    (0..model.control_dim())
        .map(|mu| {
            let a = &ud * cp_unitary_derivative(model, z, mu)?;
            Ok(a.view((0, 0), (k, k)).into_owned())
        })
        .collect()
}

/// Closed-form curvature at `z = 0` on the code:
/// `F_{(α,n),(β,m)} = i^{m+n} [(−1)ⁿ |β⟩⟨α| − (−1)^m |α⟩⟨β|]`.
pub fn cp_curvature_origin<R: Real>(n: usize) -> Result<CurvatureTensor<R>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("CP model needs N >= 2, got {n}")));
    }
    let k = n - 1;
    let i_pow = |p: usize| -> C<R> {
        match p % 4 {
            0 => cr(R::one()),
            1 => c(R::zero(), R::one()),
            2 => cr(-R::one()),
            _ => c(R::zero(), -R::one()),
        }
    };
    let sign = |p: usize| if p % 2 == 0 { R::one() } else { -R::one() };
    CurvatureTensor::from_upper(ControlPoint::origin(2 * k), 0, k, |mu, nu| {
        let (alpha, nn) = (mu / 2, mu % 2);
        let (beta, m) = (nu / 2, nu % 2);
        let mut f = zeros::<R>(k, k);
        f[(beta, alpha)] += cr(sign(nn));
        f[(alpha, beta)] -= cr(sign(m));
        Ok(f * i_pow(m + nn))
    })
}

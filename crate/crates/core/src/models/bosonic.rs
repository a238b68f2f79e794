//! Truncated bosonic mode with displacement and squeezing controls,
//! `H(λ, μ) = U H₀ U†`, `H₀ = ω n(n − 1)`,
//! `U = exp(λa† − λ̄a) exp(μa†² − μ̄a²)`.
//!
//! Controls are `(Re λ, Im λ, Re μ, Im μ)`. The code `span{|0⟩, |1⟩}` is the
//! zero-energy level 0.

use nalgebra::{DMatrix, DVector};

use crate::connection::{curvature_at, irreducibility_dimension, CurvatureTensor};
use crate::error::{Error, Result};
use crate::holonomy::{distance, holonomy_frame};
use crate::linalg::{expm, zeros};
use crate::loops::{ControlPoint, Loop};
use crate::scalar::{c, cr, CMatrix, Real};
use crate::spectral::{make_orbit_family, OrbitFamily};

/// Smallest accepted truncation.
pub const MIN_TRUNCATION: usize = 10;
pub const DEFAULT_TRUNCATION: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonicModel {
    /// Highest Fock level kept; the space has dimension `truncation + 1`.
    pub truncation: usize,
    pub omega: f64,
}

impl Default for BosonicModel {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            omega: 1.0,
        }
    }
}

impl BosonicModel {
    pub fn new(truncation: usize, omega: f64) -> Result<Self> {
        if truncation < MIN_TRUNCATION {
            return Err(Error::InvalidInput(format!(
                "truncation {truncation} is below the floor {MIN_TRUNCATION}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
        }
        Ok(Self { truncation, omega })
    }

    pub fn dimension(&self) -> usize {
        self.truncation + 1
    }

    /// Truncated annihilation operator, `a|k⟩ = √k |k − 1⟩`.
    pub fn annihilation<R: Real>(&self) -> CMatrix<R> {
        let d = self.dimension();
        let mut a = zeros::<R>(d, d);
        for k in 1..d {
            a[(k - 1, k)] = cr(R::lit(k as f64).sqrt());
        }
        a
    }

    pub fn base_hamiltonian<R: Real>(&self) -> CMatrix<R> {
        DMatrix::from_diagonal(&DVector::from_fn(self.dimension(), |k, _| {
            let k = k as f64;
            cr(R::lit(self.omega * k * (k - 1.0)))
        }))
    }

    /// Whether `(λ, μ)` pushes support into the top tenth of the Fock space.
    pub fn near_truncation<R: Real>(&self, at: &ControlPoint<R>) -> bool {
        let x = at.to_f64();
        let lam2 = x[0] * x[0] + x[1] * x[1];
        let mu = (x[2] * x[2] + x[3] * x[3]).sqrt();
        lam2 + mu > 0.9 * self.truncation as f64
    }
}

/// The orbit family; its section is `U(λ, μ)·[|0⟩ |1⟩]`.
pub fn bosonic_family<R: Real>(model: &BosonicModel) -> Result<OrbitFamily<R>> {
    let model = BosonicModel::new(model.truncation, model.omega)?;
    let a = model.annihilation::<R>();
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    make_orbit_family(model.base_hamiltonian(), 4, move |p: &ControlPoint<R>| {
        if model.near_truncation(p) {
            log::warn!(
                "bosonic controls {:?} reach the top Fock levels of truncation {}",
                p.to_f64(),
                model.truncation
            );
        }
        let x = p.coords();
        let lam = c(x[0], x[1]);
        let mu = c(x[2], x[3]);
        let displace = expm(&(&ad * lam - &a * lam.conj()));
        let squeeze = expm(&(&ad2 * mu - &a2 * mu.conj()));
        displace * squeeze
    })
}

/// What [`truncation_convergence`] evaluates at each truncation.
#[derive(Debug, Clone)]
pub enum TruncationQuantity<R: Real> {
    /// Level-0 holonomy of a loop at a fixed resolution.
    Holonomy { lp: Loop<R>, steps: usize },
    /// Level-0 curvature at a point.
    Curvature { at: ControlPoint<R>, h: R },
}

#[derive(Debug, Clone)]
pub struct TruncationReport<R: Real> {
    pub truncations: Vec<usize>,
    /// Frobenius distance between results at successive truncations.
    pub differences: Vec<R>,
    /// Curvature span dimension per truncation (curvature quantity only).
    pub span_dimensions: Vec<usize>,
    /// Successive differences never increase.
    pub converged: bool,
}

pub fn truncation_convergence<R: Real>(
    model: &BosonicModel,
    quantity: &TruncationQuantity<R>,
    truncations: &[usize],
) -> Result<TruncationReport<R>> {
    if truncations.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("truncations must be strictly increasing".into()));
    }
    let mut values: Vec<Vec<CMatrix<R>>> = Vec::with_capacity(truncations.len());
    let mut span_dimensions = Vec::new();
    for &m in truncations {
        let fam = bosonic_family::<R>(&BosonicModel::new(m, model.omega)?)?;
        match quantity {
            TruncationQuantity::Holonomy { lp, steps } => {
                values.push(vec![holonomy_frame(&fam, lp, 0, *steps)?.unitary]);
            }
            TruncationQuantity::Curvature { at, h } => {
                let f: CurvatureTensor<R> = curvature_at(&fam, at, 0, *h)?;
                span_dimensions.push(irreducibility_dimension(&f).0);
                values.push(f.upper_components().into_iter().cloned().collect());
            }
        }
    }
    let differences: Vec<R> = values
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .fold(R::zero(), |acc, (x, y)| acc + distance(x, y).powi(2))
                .sqrt()
        })
        .collect();
    let converged = differences.windows(2).all(|d| d[1] <= d[0]);
    Ok(TruncationReport {
        truncations: truncations.to_vec(),
        differences,
        span_dimensions,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{connection_at, ConnectionSample};
    use crate::linalg::{commutator, identity, ket_bra, max_abs_entry};
    use crate::loops::constant_loop;
    use crate::spectral::HamiltonianFamily;
    use std::f64::consts::PI;

    #[test]
    fn rejects_small_truncation() {
        assert!(BosonicModel::new(9, 1.0).is_err());
        assert!(BosonicModel::new(10, 1.0).is_ok());
    }

    #[test]
    fn commutator_is_identity_below_the_top() {
        let m = BosonicModel::new(12, 1.0).unwrap();
        let a = m.annihilation::<f64>();
        let comm = commutator(&a, &a.adjoint());
        let d = m.dimension();
        for k in 0..d - 1 {
            assert!((comm[(k, k)].re - 1.0).abs() < 1e-14);
        }
        assert!((comm[(d - 1, d - 1)].re + 12.0).abs() < 1e-12);
    }

    #[test]
    fn origin_has_zero_energy_code() {
        let fam = bosonic_family::<f64>(&BosonicModel::default()).unwrap();
        let h = fam.hamiltonian(&ControlPoint::origin(4)).unwrap();
        assert_eq!(h[(0, 0)].re, 0.0);
        assert_eq!(h[(1, 1)].re, 0.0);
        assert_eq!(fam.signature().multiplicity(0).unwrap(), 2);
        assert_eq!(fam.level_energies(&ControlPoint::origin(4)).unwrap()[0], 0.0);
    }

    #[test]
    fn connection_at_origin() {
        let fam = bosonic_family::<f64>(&BosonicModel::default()).unwrap();
        let a = connection_at(&fam, &ControlPoint::origin(4), 0, 1e-4).unwrap();
        let potential = a.transport_potential();
        let lam = ConnectionSample::holomorphic(&potential, 0, 1);
        assert!(max_abs_entry(&(lam + ket_bra::<f64>(2, 1, 0))) < 1e-10);
        assert!(max_abs_entry(&a.components[2]) < 1e-10);
        assert!(max_abs_entry(&a.components[3]) < 1e-10);
    }

    #[test]
    fn curvature_spans_u2_at_origin() {
        let fam = bosonic_family::<f64>(&BosonicModel::default()).unwrap();
        let f = curvature_at(&fam, &ControlPoint::origin(4), 0, 1e-4).unwrap();
        assert_eq!(irreducibility_dimension(&f), (4, true));
    }

    #[test]
    fn curvature_insensitive_to_truncation() {
        let q = TruncationQuantity::Curvature {
            at: ControlPoint::origin(4),
            h: 1e-4,
        };
        let r = truncation_convergence(&BosonicModel::default(), &q, &[20, 40]).unwrap();
        assert!(r.differences[0] < 1e-10, "{:?}", r.differences);
        assert_eq!(r.span_dimensions, vec![4, 4]);
    }

    #[test]
    fn small_loop_holonomy_converges_in_truncation() {
        let base = ControlPoint::from_f64(&[0.2, 0.0, 0.0, 0.0]).unwrap();
        let lp = Loop::analytic(base, |t: f64| {
            let th = 2.0 * PI * t;
            DVector::from_vec(vec![0.2 * th.cos(), 0.2 * th.sin(), 0.1 * th.sin(), 0.1 * (1.0 - th.cos())])
        })
        .unwrap();
        let q = TruncationQuantity::Holonomy { lp, steps: 256 };
        let r = truncation_convergence(&BosonicModel::default(), &q, &[30, 60]).unwrap();
        assert!(r.differences[0] <= 1e-8, "{:?}", r.differences);
    }

    #[test]
    fn constant_loop_is_identity_at_every_truncation() {
        for m in [10, 20] {
            let fam = bosonic_family::<f64>(&BosonicModel::new(m, 1.0).unwrap()).unwrap();
            let lp = constant_loop(&ControlPoint::from_f64(&[0.1, 0.2, 0.0, 0.1]).unwrap()).unwrap();
            let h = holonomy_frame(&fam, &lp, 0, 16).unwrap();
            assert!(max_abs_entry(&(h.unitary - identity::<f64>(2))) < 1e-12);
        }
    }
}

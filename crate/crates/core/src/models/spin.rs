//! Spin-½ in a magnetic field, `H = B·σ` over `B ∈ R³ \ {0}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::loops::{ControlPoint, Loop};
use crate::scalar::{c, CMatrix, Real};
use crate::spectral::{DegeneracySignature, HamiltonianFamily};

/// Fields weaker than this close the gap `2|B|`.
pub const MIN_FIELD: f64 = 1e-6;

/// Two non-degenerate bands `∓|B|`; level 0 is the lower band.
#[derive(Debug, Clone)]
pub struct SpinFamily {
    signature: DegeneracySignature,
}

pub fn spin_family() -> SpinFamily {
    SpinFamily {
        signature: DegeneracySignature::new(vec![1, 1]).expect("valid signature"),
    }
}

impl<R: Real> HamiltonianFamily<R> for SpinFamily {
    fn dimension(&self) -> usize {
        2
    }

    fn control_dim(&self) -> usize {
        3
    }

    fn signature(&self) -> &DegeneracySignature {
        &self.signature
    }

    fn hamiltonian(&self, at: &ControlPoint<R>) -> Result<CMatrix<R>> {
        if at.dim() != 3 {
            return Err(Error::InvalidInput(format!("field has {} components, expected 3", at.dim())));
        }
        let b = at.coords();
        let magnitude = b.norm();
        if !(magnitude >= R::lit(MIN_FIELD)) {
            return Err(Error::GapCollapse {
                magnitude: magnitude.as_f64(),
            });
        }
        let (x, y, z) = (b[0], b[1], b[2]);
        let zero = R::zero();
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[c(z, zero), c(x, -y), c(x, y), c(-z, zero)],
        ))
    }
}

/// Field of magnitude `radius` circling the equator once, starting on +x.
pub fn spin_equator_loop<R: Real>(radius: R) -> Result<Loop<R>> {
    let base = ControlPoint::from_slice(&[radius, R::zero(), R::zero()])?;
    let two_pi = R::lit(2.0 * PI);
    Loop::analytic(base, move |t: R| {
        DVector::from_vec(vec![radius * (two_pi * t).cos(), radius * (two_pi * t).sin(), R::zero()])
    })
}

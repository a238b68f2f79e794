//! Holonomy `Γ(γ) ∈ U(n_l)` of a degenerate level around a loop.
//!
//! Sign and ordering: with `A_μ = V†∂_μV`, transport of a frame obeys
//! `dW = −A W` in any smooth gauge, so
//!
//! ```text
//! Γ(γ) = P exp ∫_γ (−A) = … exp(−A(λ_{j+½})·Δλ_j) … exp(−A(λ_½)·Δλ_0)
//! ```
//!
//! with later segments multiplied on the left. Consequently
//! `Γ(compose(γ₁, γ₂)) = Γ(γ₂)·Γ(γ₁)`. The holonomy is expressed in the basis
//! of its starting frame `V₀`, i.e. the transported frame closes as `V₀·Γ`.
//!
//! Three routes are provided and cross-checked in tests:
//! * [`holonomy_frame`]: discrete transport `W_j = polar(Π_j W_{j−1})`.
//! * [`holonomy_projector`]: `polar(V₀† Π_K ⋯ Π_1 V₀)`.
//! * [`holonomy_section`]: midpoint Wilson line in a family's smooth section.

use rayon::prelude::*;

use crate::connection::{connection_at, default_step, project_and_orthonormalize, TRANSPORT_BREAKDOWN_SIGMA};
use crate::error::{Error, Result};
use crate::linalg::{expm, identity, polar_unitary, unitarity_defect, zeros};
use crate::loops::{word_to_loop, ControlPoint, Loop, LoopWord};
use crate::scalar::{cr, CMatrix, Real};
use crate::spectral::HamiltonianFamily;

/// Default number of loop segments.
pub const DEFAULT_STEPS: usize = 1024;

/// Which discretization produced a holonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FrameTransport,
    ProjectorProduct,
    SectionWilsonLine,
    /// Ordered product of cached letter holonomies.
    LetterProduct,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FrameTransport => "frame_transport",
            Self::ProjectorProduct => "projector_product",
            Self::SectionWilsonLine => "section_wilson_line",
            Self::LetterProduct => "letter_product",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Holonomy<R: Real> {
    /// `n_l × n_l`, unitary after polar correction.
    pub unitary: CMatrix<R>,
    pub level: usize,
    pub loop_id: Option<String>,
    pub steps: usize,
    pub method: Method,
    /// `‖Γ†Γ − 1‖_F` before polar correction.
    pub defect: R,
    /// The frame `V₀` at the base point the holonomy is expressed in.
    pub start_frame: CMatrix<R>,
}

impl<R: Real> Holonomy<R> {
    pub fn from_raw(raw: CMatrix<R>, level: usize, steps: usize, method: Method, start_frame: CMatrix<R>) -> Self {
        let defect = unitarity_defect(&raw);
        let (unitary, _) = polar_unitary(&raw);
        Self {
            unitary,
            level,
            loop_id: None,
            steps,
            method,
            defect,
            start_frame,
        }
    }

    pub fn with_loop_id(mut self, id: impl Into<String>) -> Self {
        self.loop_id = Some(id.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// Holonomy of the reversed loop, `Γ†`.
    pub fn inverse(&self) -> Self {
        Self {
            unitary: self.unitary.adjoint(),
            ..self.clone()
        }
    }

    /// `Γ` acting on the full Hilbert space: `V₀ Γ V₀†`.
    pub fn embedded(&self) -> CMatrix<R> {
        &self.start_frame * &self.unitary * self.start_frame.adjoint()
    }

    /// Frobenius distance between the unitaries.
    pub fn distance(&self, other: &Self) -> R {
        distance(&self.unitary, &other.unitary)
    }
}

/// Frobenius distance `‖a − b‖_F`.
pub fn distance<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> R {
    (a - b).norm()
}

fn check_loop<R: Real, F: HamiltonianFamily<R> + ?Sized>(family: &F, lp: &Loop<R>, level: usize) -> Result<usize> {
    if lp.dim() != family.control_dim() {
        return Err(Error::InvalidInput(format!(
            "loop has dimension {}, family has {} controls",
            lp.dim(),
            family.control_dim()
        )));
    }
    family.signature().multiplicity(level)
}

/// Projectors at every sample node, computed concurrently, in node order.
fn node_projectors<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    nodes: &[ControlPoint<R>],
    level: usize,
) -> Result<Vec<CMatrix<R>>> {
    nodes.par_iter().map(|p| family.projector(p, level)).collect()
}

/// Discrete parallel transport with polar re-orthonormalization, starting
/// from the canonical frame at the base point.
pub fn holonomy_frame<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    lp: &Loop<R>,
    level: usize,
    steps: usize,
) -> Result<Holonomy<R>> {
    check_loop(family, lp, level)?;
    let start = family.frame(lp.base(), level)?;
    holonomy_frame_from(family, lp, &start, level, steps)
}

/// [`holonomy_frame`] from an explicit starting frame at the base point.
pub fn holonomy_frame_from<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    lp: &Loop<R>,
    start: &CMatrix<R>,
    level: usize,
    steps: usize,
) -> Result<Holonomy<R>> {
    let n = check_loop(family, lp, level)?;
    check_start(start, family.dimension(), n)?;
    let nodes = lp.sample(steps)?;
    let projectors = node_projectors(family, &nodes[1..], level)?;
    let mut w = start.clone();
    for (p, at) in projectors.iter().zip(&nodes[1..]) {
        w = project_and_orthonormalize(p, &w, at)?;
    }
    Ok(Holonomy::from_raw(
        start.adjoint() * w,
        level,
        steps,
        Method::FrameTransport,
        start.clone(),
    ))
}

fn check_start<R: Real>(start: &CMatrix<R>, dim: usize, n: usize) -> Result<()> {
    if start.nrows() != dim || start.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "starting frame is {}×{}, expected {dim}×{n}",
            start.nrows(),
            start.ncols()
        )));
    }
    Ok(())
}

/// Ordered projector product restricted to the starting frame, unitarized.
pub fn holonomy_projector<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    lp: &Loop<R>,
    level: usize,
    steps: usize,
) -> Result<Holonomy<R>> {
    check_loop(family, lp, level)?;
    let start = family.frame(lp.base(), level)?;
    holonomy_projector_from(family, lp, &start, level, steps)
}

pub fn holonomy_projector_from<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    lp: &Loop<R>,
    start: &CMatrix<R>,
    level: usize,
    steps: usize,
) -> Result<Holonomy<R>> {
    let n = check_loop(family, lp, level)?;
    check_start(start, family.dimension(), n)?;
    let nodes = lp.sample(steps)?;
    let projectors = node_projectors(family, &nodes[1..], level)?;
    // Π_0 V₀ = V₀, so the product starts at the first interior node.
    let w = projectors.iter().fold(start.clone(), |w, p| p * w);
    let overlap = start.adjoint() * w;
    let (_, smin) = polar_unitary(&overlap);
    if !(smin > R::tol(TRANSPORT_BREAKDOWN_SIGMA)) {
        return Err(Error::Resolution { sigma: smin.as_f64() });
    }
    // The product contracts by Π cos θ_j = 1 − O(1/K), which the defect records.
    Ok(Holonomy::from_raw(overlap, level, steps, Method::ProjectorProduct, start.clone()))
}

/// Midpoint Wilson line of the transport potential in the family's section.
/// Fails with `InvalidInput` for families without a section.
pub fn holonomy_section<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    lp: &Loop<R>,
    level: usize,
    steps: usize,
) -> Result<Holonomy<R>> {
    check_loop(family, lp, level)?;
    let base_section = family
        .section(lp.base(), level)
        .ok_or_else(|| Error::InvalidInput("family has no smooth section".into()))??;
    let start = family.frame(lp.base(), level)?;
    let g0 = base_section.adjoint() * &start;
    let potential = |at: &ControlPoint<R>| -> Result<Vec<CMatrix<R>>> {
        Ok(connection_at(family, at, level, default_step(at))?.transport_potential())
    };
    let g = path_ordered_exp(potential, lp, steps)?;
    // W_K = S(λ₀)·G·g₀ and V₀ = S(λ₀)·g₀, so Γ = g₀† G g₀.
    Ok(Holonomy::from_raw(
        g0.adjoint() * g * &g0,
        level,
        steps,
        Method::SectionWilsonLine,
        start,
    ))
}

/// `P exp ∫_γ X`: ordered product of `exp(Σ_μ X_μ(λ_{j+½}) Δλ^μ_j)` with
/// later segments on the left. The potential is evaluated at segment
/// midpoints; segments are evaluated concurrently.
pub fn path_ordered_exp<R, P>(potential: P, lp: &Loop<R>, steps: usize) -> Result<CMatrix<R>>
where
    R: Real,
    P: Fn(&ControlPoint<R>) -> Result<Vec<CMatrix<R>>> + Sync,
{
    let nodes = lp.sample(steps)?;
    let half = R::lit(0.5);
    let factors: Vec<CMatrix<R>> = (0..steps)
        .into_par_iter()
        .map(|j| {
            let (a, b) = (nodes[j].coords(), nodes[j + 1].coords());
            let mid = ControlPoint::new((a + b) * half)?;
            let delta = b - a;
            let x = potential(&mid)?;
            if x.len() != delta.len() {
                return Err(Error::InvalidInput(format!(
                    "potential has {} components, loop has dimension {}",
                    x.len(),
                    delta.len()
                )));
            }
            let n = x.first().map_or(0, |m| m.nrows());
            let generator = x
                .iter()
                .zip(delta.iter())
                .fold(zeros::<R>(n, n), |acc, (xm, &d)| acc + xm * cr(d));
            Ok(expm(&generator))
        })
        .collect::<Result<_>>()?;
    let n = factors.first().map_or(0, |m| m.nrows());
    Ok(factors.iter().fold(identity::<R>(n), |acc, f| f * acc))
}

/// How [`holonomy_of_word`] evaluates a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordRoute {
    /// Multiply the two letter holonomies (each at `steps`).
    LetterProduct,
    /// Holonomy of `word_to_loop`, sampled with `steps` segments per letter so
    /// the nodes coincide with the letters' own.
    CompositeLoop,
}

/// Ordered product of letter holonomies, later letters on the left.
/// `letters[i]` is the holonomy of loop `i + 1`.
pub fn word_product<R: Real>(word: &LoopWord, letters: &[Holonomy<R>; 2]) -> Result<Holonomy<R>> {
    let [h1, h2] = letters;
    if h1.level != h2.level || h1.dim() != h2.dim() {
        return Err(Error::InvalidInput("letter holonomies belong to different levels".into()));
    }
    let mut u = identity::<R>(h1.dim());
    for letter in word.letters() {
        let h = match letter.loop_index {
            1 => h1,
            2 => h2,
            i => return Err(Error::InvalidInput(format!("letter references loop {i}"))),
        };
        u = if letter.inverse {
            h.unitary.adjoint() * u
        } else {
            &h.unitary * u
        };
    }
    Ok(Holonomy {
        unitary: u,
        level: h1.level,
        loop_id: Some(word.to_string()),
        steps: h1.steps.max(h2.steps),
        method: Method::LetterProduct,
        defect: h1.defect.max(h2.defect),
        start_frame: h1.start_frame.clone(),
    })
}

pub fn holonomy_of_word<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    word: &LoopWord,
    first: &Loop<R>,
    second: &Loop<R>,
    family: &F,
    level: usize,
    steps: usize,
    route: WordRoute,
) -> Result<Holonomy<R>> {
    match route {
        WordRoute::LetterProduct => {
            let letters = [
                holonomy_frame(family, first, level, steps)?,
                holonomy_frame(family, second, level, steps)?,
            ];
            word_product(word, &letters)
        }
        WordRoute::CompositeLoop => {
            let lp = word_to_loop(word, first, second)?;
            let total = steps * word.len().max(1);
            Ok(holonomy_frame(family, &lp, level, total)?.with_loop_id(word.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_entry;
    use crate::loops::{compose, constant_loop, invert};
    use crate::scalar::cf;
    use crate::spectral::{DegeneracySignature, FnFamily};
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::PI;

    fn diag(values: &[f64]) -> CMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| cf(v, 0.0))))
    }

    /// 3-level family with a 2-fold ground level, rotated by a smooth
    /// non-abelian unitary of two controls.
    fn family() -> FnFamily<f64> {
        let sig = DegeneracySignature::new(vec![2, 1]).unwrap();
        FnFamily::new(2, sig, |p: &ControlPoint<f64>| {
            let (x, y) = (p.coords()[0], p.coords()[1]);
            let g = DMatrix::from_row_slice(
                3,
                3,
                &[
                    cf(0., 0.),
                    cf(0.3 * y, 0.1 * x),
                    cf(x, 0.2 * y),
                    cf(-0.3 * y, 0.1 * x),
                    cf(0., 0.),
                    cf(0.5 * y, -x),
                    cf(-x, 0.2 * y),
                    cf(-0.5 * y, -x),
                    cf(0., 0.),
                ],
            );
            let u = expm(&g);
            &u * diag(&[0.0, 0.0, 1.0]) * u.adjoint()
        })
    }

    fn ellipse(cx: f64, cy: f64, a: f64, b: f64) -> Loop<f64> {
        let base = ControlPoint::from_f64(&[cx + a, cy]).unwrap();
        Loop::analytic(base, move |t: f64| {
            DVector::from_vec(vec![cx + a * (2.0 * PI * t).cos(), cy + b * (2.0 * PI * t).sin()])
        })
        .unwrap()
    }

    #[test]
    fn constant_loop_is_identity_for_both_methods() {
        let fam = family();
        let lp = constant_loop(&ControlPoint::from_f64(&[0.3, -0.2]).unwrap()).unwrap();
        let a = holonomy_frame(&fam, &lp, 0, 64).unwrap();
        let b = holonomy_projector(&fam, &lp, 0, 64).unwrap();
        assert!(max_abs_entry(&(a.unitary - identity::<f64>(2))) < 1e-13);
        assert!(max_abs_entry(&(b.unitary - identity::<f64>(2))) < 1e-13);
    }

    #[test]
    fn methods_agree_and_are_non_abelian() {
        let fam = family();
        let g1 = ellipse(0.0, 0.0, 0.8, 0.5);
        let g2 = ellipse(0.2, 0.1, 0.6, 0.9);
        let f1 = holonomy_frame(&fam, &g1, 0, 2048).unwrap();
        let p1 = holonomy_projector(&fam, &g1, 0, 2048).unwrap();
        let s1 = holonomy_section(&FnSectioned(&fam), &g1, 0, 2048);
        assert!(s1.is_err());
        assert!(f1.distance(&p1) < 1e-6, "{}", f1.distance(&p1));
        assert!(f1.defect < 1e-12);
        let f2 = holonomy_frame(&fam, &g2, 0, 2048).unwrap();
        let comm = &f1.unitary * &f2.unitary - &f2.unitary * &f1.unitary;
        assert!(comm.norm() > 1e-2);
    }

    /// Wrapper exposing the trait without a section.
    struct FnSectioned<'a>(&'a FnFamily<f64>);
    impl HamiltonianFamily<f64> for FnSectioned<'_> {
        fn dimension(&self) -> usize {
            self.0.dimension()
        }
        fn control_dim(&self) -> usize {
            self.0.control_dim()
        }
        fn signature(&self) -> &DegeneracySignature {
            self.0.signature()
        }
        fn hamiltonian(&self, at: &ControlPoint<f64>) -> Result<CMatrix<f64>> {
            self.0.hamiltonian(at)
        }
    }

    #[test]
    fn projector_method_converges_under_refinement() {
        let fam = family();
        let g = ellipse(0.0, 0.0, 0.8, 0.5);
        let reference = holonomy_frame(&fam, &g, 0, 8192).unwrap();
        let errs: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&k| holonomy_projector(&fam, &g, 0, k).unwrap().distance(&reference))
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0);
    }

    #[test]
    fn composition_follows_operator_order() {
        let fam = family();
        let g1 = ellipse(0.0, 0.0, 0.8, 0.5);
        let g2 = {
            let base = g1.base().clone();
            Loop::analytic(base, |t: f64| {
                DVector::from_vec(vec![0.8 * (2.0 * PI * t).cos(), 0.7 * (4.0 * PI * t).sin()])
            })
            .unwrap()
        };
        let k = 1024;
        let h1 = holonomy_frame(&fam, &g1, 0, k).unwrap();
        let h2 = holonomy_frame(&fam, &g2, 0, k).unwrap();
        let h12 = holonomy_frame(&fam, &compose(&g1, &g2).unwrap(), 0, 2 * k).unwrap();
        let expected = &h2.unitary * &h1.unitary;
        assert!(distance(&h12.unitary, &expected) < 1e-12);
        let wrong = &h1.unitary * &h2.unitary;
        assert!(distance(&h12.unitary, &wrong) > 1e-3);
    }

    #[test]
    fn inverse_loop_gives_inverse_holonomy() {
        let fam = family();
        let g = ellipse(0.1, 0.0, 0.7, 0.6);
        for method in [holonomy_frame::<f64, FnFamily<f64>>, holonomy_projector::<f64, FnFamily<f64>>] {
            let h = method(&fam, &g, 0, 1024).unwrap();
            let hi = method(&fam, &invert(&g), 0, 1024).unwrap();
            assert!(distance(&hi.unitary, &h.unitary.adjoint()) < 1e-10);
        }
    }

    #[test]
    fn path_ordered_exp_of_constant_potential_on_square() {
        let ax: CMatrix<f64> = DMatrix::from_row_slice(2, 2, &[cf(0., 0.3), cf(0.5, 0.), cf(-0.5, 0.), cf(0., -0.3)]);
        let ay: CMatrix<f64> = DMatrix::from_row_slice(2, 2, &[cf(0., 0.), cf(0., 0.7), cf(0., 0.7), cf(0., 0.2)]);
        let nodes = vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![0.0, 0.0]),
        ];
        let square = Loop::from_nodes(ControlPoint::from_f64(&[0.0, 0.0]).unwrap(), nodes).unwrap();
        let (cx, cy) = (ax.clone(), ay.clone());
        let g = path_ordered_exp(move |_: &ControlPoint<f64>| Ok(vec![cx.clone(), cy.clone()]), &square, 64).unwrap();
        // x leg first (rightmost), then y, then back along −x and −y
        let expected = expm(&(-&ay)) * expm(&(-&ax)) * expm(&ay) * expm(&ax);
        assert!(distance(&g, &expected) < 1e-12);
    }

    #[test]
    fn embedded_holonomy_does_not_leak() {
        let fam = family();
        let g = ellipse(0.0, 0.0, 0.8, 0.5);
        let h = holonomy_frame(&fam, &g, 0, 512).unwrap();
        let e = h.embedded();
        let p = fam.projector(g.base(), 0).unwrap();
        assert!(max_abs_entry(&(&p * &e * &p - &e)) < 1e-10);
        let q = identity::<f64>(3) - &p;
        assert!(max_abs_entry(&(q * &e * p)) < 1e-10);
    }

    #[test]
    fn word_routes_agree() {
        let fam = family();
        let g1 = ellipse(0.0, 0.0, 0.8, 0.5);
        let g2 = {
            let base = g1.base().clone();
            Loop::analytic(base, |t: f64| {
                DVector::from_vec(vec![0.8 * (2.0 * PI * t).cos(), 0.7 * (4.0 * PI * t).sin()])
            })
            .unwrap()
        };
        let word = LoopWord::from_pairs(&[(1, 1), (2, -1), (1, 1)]).unwrap();
        let a = holonomy_of_word(&word, &g1, &g2, &fam, 0, 512, WordRoute::LetterProduct).unwrap();
        let b = holonomy_of_word(&word, &g1, &g2, &fam, 0, 512, WordRoute::CompositeLoop).unwrap();
        assert!(a.distance(&b) < 1e-7, "{}", a.distance(&b));

        let empty = holonomy_of_word(&LoopWord::empty(), &g1, &g2, &fam, 0, 64, WordRoute::LetterProduct).unwrap();
        assert!(max_abs_entry(&(empty.unitary - identity::<f64>(2))) < 1e-15);
        let cancel = LoopWord::from_pairs(&[(1, 1), (1, -1)]).unwrap();
        let c = holonomy_of_word(&cancel, &g1, &g2, &fam, 0, 256, WordRoute::CompositeLoop).unwrap();
        assert!(max_abs_entry(&(c.unitary - identity::<f64>(2))) < 1e-8);
    }

    #[test]
    fn projector_method_reports_coarse_sampling() {
        let sig = DegeneracySignature::new(vec![1, 1]).unwrap();
        // the lower level rotates by π/2 per unit of x, so two nodes per
        // quarter turn leave an orthogonal step
        let fam = FnFamily::new(1, sig, |p: &ControlPoint<f64>| {
            let th = PI / 2.0 * p.coords()[0];
            let (c, s) = (th.cos(), th.sin());
            DMatrix::from_row_slice(2, 2, &[cf(s * s, 0.), cf(-c * s, 0.), cf(-c * s, 0.), cf(c * c, 0.)])
        });
        let nodes = vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![1.0]), DVector::from_vec(vec![0.0])];
        let lp = Loop::from_nodes(ControlPoint::from_f64(&[0.0]).unwrap(), nodes).unwrap();
        let err = holonomy_projector(&fam, &lp, 0, 2).unwrap_err();
        assert!(matches!(err, Error::Resolution { .. }));
    }
}

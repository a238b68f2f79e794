//! Parametrized Hamiltonian families and their degenerate spectral structure.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_eigen, polar_unitary, spectral_norm, unitarity_defect, zeros};
use crate::loops::ControlPoint;
use crate::scalar::{cr, CMatrix, Real};

/// Relative clustering tolerance for eigenvalue degeneracy.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
/// Generator outputs further than this from unitary are rejected.
pub const GENERATOR_UNITARITY_TOL: f64 = 1e-10;

/// Eigenvalue multiplicities `(n_1, …, n_R)`, levels in ascending energy order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DegeneracySignature(Vec<usize>);

impl DegeneracySignature {
    pub fn new(multiplicities: Vec<usize>) -> Result<Self> {
        if multiplicities.is_empty() || multiplicities.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "signature {multiplicities:?} needs R >= 1 positive multiplicities"
            )));
        }
        Ok(Self(multiplicities))
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.0
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn multiplicity(&self, level: usize) -> Result<usize> {
        self.0.get(level).copied().ok_or(Error::LevelOutOfRange {
            level,
            levels: self.0.len(),
        })
    }
}

impl TryFrom<Vec<usize>> for DegeneracySignature {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DegeneracySignature> for Vec<usize> {
    fn from(s: DegeneracySignature) -> Self {
        s.0
    }
}

/// Spectral resolution `H = Σ ε_i Π_i` with clustered degenerate levels.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<R: Real> {
    /// One representative eigenvalue per level (cluster mean), ascending.
    pub eigenvalues: Vec<R>,
    pub projectors: Vec<CMatrix<R>>,
    /// Orthonormal eigenvector columns per level, `N × n_l`.
    pub frames: Vec<CMatrix<R>>,
    pub signature: DegeneracySignature,
}

impl<R: Real> SpectralDecomposition<R> {
    /// Smallest distance between consecutive levels, `None` for a single level.
    pub fn min_gap(&self) -> Option<R> {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .reduce(|a, b| a.min(b))
    }
}

/// Clusters the spectrum of `h` into degenerate levels.
///
/// Eigenvalues closer than `gap_tol · max(1, ρ(h))` share a level. A gap
/// between a tenth of that threshold and the threshold is reported as
/// ambiguous instead of being silently assigned.
pub fn decompose<R: Real>(h: &CMatrix<R>, gap_tol: R) -> Result<SpectralDecomposition<R>> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::InvalidInput("Hamiltonian must be a non-empty square matrix".into()));
    }
    if !(gap_tol > R::zero()) {
        return Err(Error::InvalidInput("gap_tol must be positive".into()));
    }
    let n = h.nrows();
    let scale = R::one().max(spectral_norm(h));
    let defect = hermitian_defect(h);
    if defect > R::tol(1e-9) * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (defect {:e})",
            defect.as_f64()
        )));
    }
    let (values, vectors) = hermitian_eigen(h);
    let threshold = gap_tol * scale;
    let ambiguous_below = threshold * R::lit(0.1);

    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..n {
        let gap = values[i] - values[i - 1];
        if gap > ambiguous_below && gap < threshold {
            return Err(Error::DegeneracyAmbiguity {
                gap: gap.as_f64(),
                lower: ambiguous_below.as_f64(),
                upper: threshold.as_f64(),
            });
        }
        if gap >= threshold {
            clusters.push((start, i));
            start = i;
        }
    }
    clusters.push((start, n));

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut frames = Vec::with_capacity(clusters.len());
    let mut mults = Vec::with_capacity(clusters.len());
    for &(a, b) in &clusters {
        let m = b - a;
        let mean = values[a..b].iter().fold(R::zero(), |s, &x| s + x) / R::from_usize(m).unwrap();
        let raw = vectors.columns(a, m).into_owned();
        let projector = &raw * raw.adjoint();
        let frame = align_to_axes(raw, &projector);
        eigenvalues.push(mean);
        projectors.push(projector);
        frames.push(frame);
        mults.push(m);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        frames,
        signature: DegeneracySignature(mults),
    })
}

/// Fixes the gauge of an eigenframe: the frame closest to the coordinate
/// axes with the largest projector weight. Diagonal projectors yield
/// standard basis columns.
fn align_to_axes<R: Real>(raw: CMatrix<R>, projector: &CMatrix<R>) -> CMatrix<R> {
    let (n, m) = raw.shape();
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| {
        projector[(b, b)]
            .re
            .partial_cmp(&projector[(a, a)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    axes.truncate(m);
    axes.sort_unstable();
    let mut overlap = zeros::<R>(m, m);
    for (j, &axis) in axes.iter().enumerate() {
        for i in 0..m {
            overlap[(i, j)] = raw[(axis, i)].conj();
        }
    }
    let (g, smin) = polar_unitary(&overlap);
    if smin > R::tol(1e-8) {
        raw * g
    } else {
        raw
    }
}

/// A map from control points to Hermitian matrices with a fixed degeneracy
/// signature.
pub trait HamiltonianFamily<R: Real>: Send + Sync {
    /// Hilbert-space dimension `N`.
    fn dimension(&self) -> usize;

    /// Number of control coordinates `d`.
    fn control_dim(&self) -> usize;

    fn signature(&self) -> &DegeneracySignature;

    fn hamiltonian(&self, at: &ControlPoint<R>) -> Result<CMatrix<R>>;

    fn gap_tol(&self) -> R {
        R::tol(DEFAULT_GAP_TOL)
    }

    /// Decomposition at `at`, failing when the signature is not preserved.
    fn decompose_at(&self, at: &ControlPoint<R>) -> Result<SpectralDecomposition<R>> {
        let d = decompose(&self.hamiltonian(at)?, self.gap_tol())?;
        if d.signature != *self.signature() {
            return Err(Error::DegeneracyMismatch {
                point: at.to_f64(),
                expected: self.signature().multiplicities().to_vec(),
                found: d.signature.multiplicities().to_vec(),
            });
        }
        Ok(d)
    }

    fn projector(&self, at: &ControlPoint<R>, level: usize) -> Result<CMatrix<R>> {
        self.signature().multiplicity(level)?;
        Ok(self.decompose_at(at)?.projectors.swap_remove(level))
    }

    /// An orthonormal basis of level `level` at `at`.
    fn frame(&self, at: &ControlPoint<R>, level: usize) -> Result<CMatrix<R>> {
        self.signature().multiplicity(level)?;
        Ok(self.decompose_at(at)?.frames.swap_remove(level))
    }

    fn level_energies(&self, at: &ControlPoint<R>) -> Result<Vec<R>> {
        Ok(self.decompose_at(at)?.eigenvalues)
    }

    /// A smooth local gauge (frame field) for `level`, if the family has one.
    fn section(&self, _at: &ControlPoint<R>, _level: usize) -> Option<Result<CMatrix<R>>> {
        None
    }
}

type Evaluator<R> = dyn Fn(&ControlPoint<R>) -> CMatrix<R> + Send + Sync;

/// Family given by a closure.
#[derive(Clone)]
pub struct FnFamily<R: Real> {
    dimension: usize,
    control_dim: usize,
    signature: DegeneracySignature,
    gap_tol: R,
    eval: Arc<Evaluator<R>>,
}

impl<R: Real> FnFamily<R> {
    pub fn new<F>(control_dim: usize, signature: DegeneracySignature, eval: F) -> Self
    where
        F: Fn(&ControlPoint<R>) -> CMatrix<R> + Send + Sync + 'static,
    {
        Self {
            dimension: signature.total(),
            control_dim,
            signature,
            gap_tol: R::tol(DEFAULT_GAP_TOL),
            eval: Arc::new(eval),
        }
    }

    pub fn with_gap_tol(mut self, gap_tol: R) -> Self {
        self.gap_tol = gap_tol;
        self
    }
}

impl<R: Real> HamiltonianFamily<R> for FnFamily<R> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn control_dim(&self) -> usize {
        self.control_dim
    }

    fn signature(&self) -> &DegeneracySignature {
        &self.signature
    }

    fn gap_tol(&self) -> R {
        self.gap_tol
    }

    fn hamiltonian(&self, at: &ControlPoint<R>) -> Result<CMatrix<R>> {
        if at.dim() != self.control_dim {
            return Err(Error::InvalidInput(format!(
                "control point has dimension {}, family expects {}",
                at.dim(),
                self.control_dim
            )));
        }
        let h = (self.eval)(at);
        if h.shape() != (self.dimension, self.dimension) {
            return Err(Error::InvalidInput(format!(
                "evaluator returned {:?}, expected {}×{}",
                h.shape(),
                self.dimension,
                self.dimension
            )));
        }
        Ok(h)
    }
}

/// Result of scanning a family along a sequence of points.
#[derive(Debug, Clone)]
pub struct IsoDegeneracyReport<R: Real> {
    pub consistent: bool,
    /// Smallest gap between consecutive levels over all points.
    pub min_gap: Option<R>,
    /// `(point index, signature found)` wherever it differs from the family's.
    pub mismatches: Vec<(usize, Vec<usize>)>,
}

/// Checks that every point carries the family's degeneracy signature.
pub fn check_iso_degenerate<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    points: &[ControlPoint<R>],
) -> Result<IsoDegeneracyReport<R>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points to check".into()));
    }
    let mut min_gap: Option<R> = None;
    let mut mismatches = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let d = family
            .hamiltonian(p)
            .and_then(|h| decompose(&h, family.gap_tol()))
            .map_err(|e| Error::InvalidInput(format!("at point {:?}: {e}", p.to_f64())))?;
        if d.signature != *family.signature() {
            mismatches.push((i, d.signature.multiplicities().to_vec()));
        }
        if let Some(g) = d.min_gap() {
            min_gap = Some(min_gap.map_or(g, |m| m.min(g)));
        }
    }
    Ok(IsoDegeneracyReport {
        consistent: mismatches.is_empty(),
        min_gap,
        mismatches,
    })
}

/// Local dimension of the orbit `U(N)/∏U(n_i)`, plus `R` when the distinct
/// eigenvalues are free as well.
pub fn orbit_dimension(sig: &DegeneracySignature, include_eigenvalues: bool) -> usize {
    let n = sig.total();
    let stabilizer: usize = sig.multiplicities().iter().map(|k| k * k).sum();
    n * n - stabilizer + if include_eigenvalues { sig.levels() } else { 0 }
}

type Generator<R> = dyn Fn(&ControlPoint<R>) -> CMatrix<R> + Send + Sync;

/// Isospectral family `λ ↦ X(λ) H₀ X(λ)†`.
#[derive(Clone)]
pub struct OrbitFamily<R: Real> {
    h0: CMatrix<R>,
    control_dim: usize,
    generator: Arc<Generator<R>>,
    base: SpectralDecomposition<R>,
    gap_tol: R,
}

impl<R: Real> std::fmt::Debug for OrbitFamily<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitFamily")
            .field("dimension", &self.h0.nrows())
            .field("control_dim", &self.control_dim)
            .field("signature", &self.base.signature)
            .finish()
    }
}

impl<R: Real> OrbitFamily<R> {
    pub fn base_hamiltonian(&self) -> &CMatrix<R> {
        &self.h0
    }

    pub fn base_decomposition(&self) -> &SpectralDecomposition<R> {
        &self.base
    }

    /// `X(λ)`, checked for unitarity.
    pub fn generator(&self, at: &ControlPoint<R>) -> Result<CMatrix<R>> {
        if at.dim() != self.control_dim {
            return Err(Error::InvalidInput(format!(
                "control point has dimension {}, family expects {}",
                at.dim(),
                self.control_dim
            )));
        }
        let x = (self.generator)(at);
        let n = self.h0.nrows();
        if x.shape() != (n, n) {
            return Err(Error::InvalidInput(format!("generator returned {:?}", x.shape())));
        }
        let defect = unitarity_defect(&x);
        if !(defect <= R::tol(GENERATOR_UNITARITY_TOL)) {
            return Err(Error::InvalidGenerator {
                defect: defect.as_f64(),
            });
        }
        Ok(x)
    }
}

/// Builds the orbit family of `h0` under `generator`, inheriting its signature.
pub fn make_orbit_family<R: Real, G>(h0: CMatrix<R>, control_dim: usize, generator: G) -> Result<OrbitFamily<R>>
where
    G: Fn(&ControlPoint<R>) -> CMatrix<R> + Send + Sync + 'static,
{
    let gap_tol = R::tol(DEFAULT_GAP_TOL);
    let base = decompose(&h0, gap_tol)?;
    let fam = OrbitFamily {
        h0,
        control_dim,
        generator: Arc::new(generator),
        base,
        gap_tol,
    };
    fam.generator(&ControlPoint::origin(control_dim))?;
    Ok(fam)
}

impl<R: Real> HamiltonianFamily<R> for OrbitFamily<R> {
    fn dimension(&self) -> usize {
        self.h0.nrows()
    }

    fn control_dim(&self) -> usize {
        self.control_dim
    }

    fn signature(&self) -> &DegeneracySignature {
        &self.base.signature
    }

    fn gap_tol(&self) -> R {
        self.gap_tol
    }

    fn hamiltonian(&self, at: &ControlPoint<R>) -> Result<CMatrix<R>> {
        let x = self.generator(at)?;
        Ok(&x * &self.h0 * x.adjoint())
    }

    fn decompose_at(&self, at: &ControlPoint<R>) -> Result<SpectralDecomposition<R>> {
        let x = self.generator(at)?;
        let xd = x.adjoint();
        Ok(SpectralDecomposition {
            eigenvalues: self.base.eigenvalues.clone(),
            projectors: self.base.projectors.iter().map(|p| &x * p * &xd).collect(),
            frames: self.base.frames.iter().map(|f| &x * f).collect(),
            signature: self.base.signature.clone(),
        })
    }

    fn projector(&self, at: &ControlPoint<R>, level: usize) -> Result<CMatrix<R>> {
        self.signature().multiplicity(level)?;
        let x = self.generator(at)?;
        Ok(&x * &self.base.projectors[level] * x.adjoint())
    }

    fn frame(&self, at: &ControlPoint<R>, level: usize) -> Result<CMatrix<R>> {
        self.signature().multiplicity(level)?;
        Ok(self.generator(at)? * &self.base.frames[level])
    }

    fn level_energies(&self, _at: &ControlPoint<R>) -> Result<Vec<R>> {
        Ok(self.base.eigenvalues.clone())
    }

    fn section(&self, at: &ControlPoint<R>, level: usize) -> Option<Result<CMatrix<R>>> {
        Some(self.frame(at, level))
    }
}

/// `f(H)` by spectral calculus, merging the selected levels into one
/// eigenspace at `target`.
pub fn degenerate_function_lift<R: Real, F: Fn(R) -> R>(
    h: &CMatrix<R>,
    f: F,
    target: R,
    selected: &[usize],
    gap_tol: R,
) -> Result<CMatrix<R>> {
    let d = decompose(h, gap_tol)?;
    let levels = d.eigenvalues.len();
    let values: Vec<R> = d.eigenvalues.iter().map(|&e| f(e)).collect();
    let scale = R::one().max(values.iter().fold(R::zero(), |m, v| m.max(v.abs())));
    let close = |v: R| (v - target).abs() < gap_tol * scale;
    for &level in selected {
        if level >= levels {
            return Err(Error::LevelOutOfRange { level, levels });
        }
        if !close(values[level]) {
            return Err(Error::InvalidInput(format!(
                "f maps level {level} to {}, not to the target {}",
                values[level].as_f64(),
                target.as_f64()
            )));
        }
    }
    for (level, &v) in values.iter().enumerate() {
        if !selected.contains(&level) && close(v) {
            return Err(Error::UnintendedDegeneracy { level });
        }
    }
    let n = h.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (level, p) in d.projectors.iter().enumerate() {
        let v = if selected.contains(&level) { target } else { values[level] };
        out += p * cr(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_entry};
    use crate::scalar::cf;
    use nalgebra::DVector;

    fn diag(values: &[f64]) -> CMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| cf(v, 0.0)),
        ))
    }

    fn pauli_dot(b: [f64; 3]) -> CMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[cf(b[2], 0.0), cf(b[0], -b[1]), cf(b[0], b[1]), cf(-b[2], 0.0)],
        )
    }

    #[test]
    fn decompose_diagonal() {
        let d = decompose(&diag(&[0.0, 0.0, 1.0]), 0.5).unwrap();
        assert_eq!(d.signature.multiplicities(), &[2, 1]);
        assert!(max_abs_entry(&(&d.projectors[0] - diag(&[1.0, 1.0, 0.0]))) < 1e-15);
        // diagonal projector gives standard basis columns
        assert!(max_abs_entry(&(&d.frames[0] - identity::<f64>(3).columns(0, 2))) < 1e-15);
    }

    #[test]
    fn decompose_identity_is_one_level() {
        let d = decompose(&identity::<f64>(4), 1e-6).unwrap();
        assert_eq!(d.signature.multiplicities(), &[4]);
        assert!(max_abs_entry(&(&d.projectors[0] - identity::<f64>(4))) < 1e-14);
    }

    #[test]
    fn decompose_spin_half_levels() {
        // B·σ has eigenvalues ±|B|; brute-force 2×2 characteristic polynomial.
        let b = [0.3, -0.4, 1.2];
        let h = pauli_dot(b);
        let tr = (h[(0, 0)] + h[(1, 1)]).re;
        let det = (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).sqrt();
        let d = decompose(&h, 1e-6).unwrap();
        assert_eq!(d.signature.multiplicities(), &[1, 1]);
        assert!((d.eigenvalues[0] - (tr / 2.0 - disc)).abs() < 1e-12);
        assert!((d.eigenvalues[1] - (tr / 2.0 + disc)).abs() < 1e-12);
        let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        assert!((d.eigenvalues[1] - norm).abs() < 1e-12);
    }

    #[test]
    fn decompose_projector_identities() {
        let h = diag(&[-1.0, 2.0, 2.0, 5.0]);
        let x = crate::linalg::expm(&(DMatrix::from_fn(4, 4, |i, j| {
            cf((i as f64 - j as f64) * 0.3, (i + j) as f64 * 0.1)
        }) * cf(0.0, 1.0)));
        let x = polar_unitary(&x).0;
        let h = &x * h * x.adjoint();
        let d = decompose(&h, 1e-6).unwrap();
        assert_eq!(d.signature.multiplicities(), &[1, 2, 1]);
        let mut sum = DMatrix::zeros(4, 4);
        for (i, p) in d.projectors.iter().enumerate() {
            assert!(max_abs_entry(&(p * p - p)) < 1e-10);
            assert!(hermitian_defect(p) < 1e-10);
            assert!((p.trace().re - d.signature.multiplicities()[i] as f64).abs() < 1e-10);
            assert!(max_abs_entry(&(&h * p - p * cf(d.eigenvalues[i], 0.0))) < 1e-10);
            for (j, q) in d.projectors.iter().enumerate() {
                if i != j {
                    assert!(max_abs_entry(&(p * q)) < 1e-10);
                }
            }
            sum += p;
        }
        assert!(max_abs_entry(&(sum - identity::<f64>(4))) < 1e-10);
        for f in &d.frames {
            assert!(unitarity_defect(f) < 1e-10);
        }
    }

    #[test]
    fn decompose_flags_ambiguous_gap() {
        let err = decompose(&diag(&[0.0, 5e-7, 1.0]), 1e-6).unwrap_err();
        assert!(matches!(err, Error::DegeneracyAmbiguity { .. }));
    }

    #[test]
    fn decompose_rejects_non_hermitian() {
        let mut h = diag(&[0.0, 1.0]);
        h[(0, 1)] = cf(1.0, 0.0);
        assert!(decompose(&h, 1e-6).is_err());
    }

    #[test]
    fn iso_degeneracy_detects_crossing() {
        let sig = DegeneracySignature::new(vec![1, 1]).unwrap();
        let fam = FnFamily::new(1, sig, |p: &ControlPoint<f64>| diag(&[0.0, p.coords()[0]]));
        let pts: Vec<_> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&x| ControlPoint::from_f64(&[x]).unwrap())
            .collect();
        let rep = check_iso_degenerate(&fam, &pts).unwrap();
        assert!(rep.consistent);
        assert!((rep.min_gap.unwrap() - 0.5).abs() < 1e-15);
        let pts: Vec<_> = [1.0, 0.5, 0.0, -0.5]
            .iter()
            .map(|&x| ControlPoint::from_f64(&[x]).unwrap())
            .collect();
        let rep = check_iso_degenerate(&fam, &pts).unwrap();
        assert!(!rep.consistent);
        assert_eq!(rep.mismatches[0].0, 2);
    }

    #[test]
    fn iso_degeneracy_propagates_ambiguity() {
        let sig = DegeneracySignature::new(vec![1, 1]).unwrap();
        let fam = FnFamily::new(1, sig, |p: &ControlPoint<f64>| diag(&[0.0, p.coords()[0]]));
        let pts = vec![ControlPoint::from_f64(&[3e-7]).unwrap()];
        let err = check_iso_degenerate(&fam, &pts).unwrap_err();
        assert!(err.to_string().contains("3e-7"));
    }

    #[test]
    fn orbit_dimension_counts() {
        let s = |v: Vec<usize>| DegeneracySignature::new(v).unwrap();
        assert_eq!(orbit_dimension(&s(vec![1, 1]), true), 4);
        assert_eq!(orbit_dimension(&s(vec![1, 1]), false), 2);
        for n in 2..=6 {
            assert_eq!(orbit_dimension(&s(vec![1; n]), true), n * n);
            assert_eq!(orbit_dimension(&s(vec![n]), true), 1);
        }
        assert_eq!(
            orbit_dimension(&s(vec![2, 1, 3]), false),
            orbit_dimension(&s(vec![3, 2, 1]), false)
        );
    }

    #[test]
    fn signature_validation() {
        assert!(DegeneracySignature::new(vec![]).is_err());
        assert!(DegeneracySignature::new(vec![2, 0]).is_err());
        assert_eq!(DegeneracySignature::new(vec![2, 1]).unwrap().total(), 3);
    }

    #[test]
    fn orbit_family_identity_generator_is_constant() {
        let h0 = diag(&[0.0, 0.0, 1.0]);
        let fam = make_orbit_family(h0.clone(), 2, |_: &ControlPoint<f64>| identity(3)).unwrap();
        let p = ControlPoint::from_f64(&[0.3, -1.0]).unwrap();
        assert_eq!(fam.hamiltonian(&p).unwrap(), h0);
        assert_eq!(fam.signature().multiplicities(), &[2, 1]);
    }

    #[test]
    fn orbit_family_rejects_non_unitary_generator() {
        let h0 = diag(&[0.0, 1.0]);
        let err = make_orbit_family(h0.clone(), 1, |_: &ControlPoint<f64>| identity::<f64>(2) * cf(1.01, 0.0))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidGenerator { .. }));
        let fam = make_orbit_family(h0, 1, |p: &ControlPoint<f64>| {
            identity::<f64>(2) * cf(1.0 + p.coords()[0].abs(), 0.0)
        })
        .unwrap();
        let p = ControlPoint::from_f64(&[0.5]).unwrap();
        assert!(matches!(fam.hamiltonian(&p), Err(Error::InvalidGenerator { .. })));
    }

    #[test]
    fn function_lift_merges_levels() {
        let h = diag(&[0.0, 1.0, 2.0]);
        let lifted = degenerate_function_lift(&h, |z| z * (z - 1.0), 0.0, &[0, 1], 1e-6).unwrap();
        assert!(max_abs_entry(&(lifted - diag(&[0.0, 0.0, 2.0]))) < 1e-14);
        let same = degenerate_function_lift(&h, |z| z, 1.0, &[1], 1e-6).unwrap();
        assert!(max_abs_entry(&(same - &h)) < 1e-14);
    }

    #[test]
    fn function_lift_flags_unintended_merge() {
        let h = diag(&[0.0, 1.0, 2.0]);
        let err = degenerate_function_lift(&h, |z| z * (z - 1.0), 0.0, &[0], 1e-6).unwrap_err();
        assert_eq!(err, Error::UnintendedDegeneracy { level: 1 });
        assert!(degenerate_function_lift(&h, |z| z, 0.0, &[1], 1e-6).is_err());
    }
}

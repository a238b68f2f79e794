//! Control points, closed loops and their algebra.
//!
//! Loops are parametrized on the unit interval. Composition runs the first
//! loop on `[0, 1/2]` and the second on `[1/2, 1]`, each at doubled speed, so
//! the holonomy of `compose(a, b)` is `Γ(b)·Γ(a)`: the later loop acts on the
//! left.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{RVector, Real};

/// Default closure tolerance for loops given by an analytic map.
pub const ANALYTIC_CLOSURE_TOL: f64 = 1e-12;
/// Default closure tolerance for loops given as node lists.
pub const NODE_CLOSURE_TOL: f64 = 1e-9;

/// A point `λ` of the control manifold in local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPoint<R: Real>(RVector<R>);

impl<R: Real> ControlPoint<R> {
    pub fn new(coords: RVector<R>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("control point needs at least one coordinate".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("control point has non-finite coordinates".into()));
        }
        Ok(Self(coords))
    }

    pub fn from_slice(coords: &[R]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_iterator(coords.len(), coords.iter().map(|&x| R::lit(x))))
    }

    pub fn origin(dim: usize) -> Self {
        Self(DVector::zeros(dim.max(1)))
    }

    pub(crate) fn unchecked(coords: RVector<R>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &RVector<R> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn distance(&self, other: &Self) -> R {
        (&self.0 - &other.0).norm()
    }

    /// The point displaced by `step` along coordinate `axis`.
    pub fn shifted(&self, axis: usize, step: R) -> Self {
        let mut v = self.0.clone();
        v[axis] += step;
        Self(v)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.as_f64()).collect()
    }
}

type PathFn<R> = dyn Fn(R) -> RVector<R> + Send + Sync;

/// A closed path `γ: [0, 1] → M` with `γ(0) = γ(1) = λ₀`.
#[derive(Clone)]
pub struct Loop<R: Real> {
    base: ControlPoint<R>,
    path: Arc<PathFn<R>>,
    nodes: Option<Arc<Vec<RVector<R>>>>,
    closure_tol: R,
}

impl<R: Real> fmt::Debug for Loop<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loop")
            .field("base", &self.base.to_f64())
            .field("nodes", &self.nodes.as_ref().map(|n| n.len()))
            .field("closure_tol", &self.closure_tol.as_f64())
            .finish()
    }
}

/// Steps taken when validating continuity and monotonicity on a grid.
const CHECK_GRID: usize = 1024;

impl<R: Real> Loop<R> {
    /// Loop from an analytic map, with the analytic closure tolerance.
    pub fn analytic<F>(base: ControlPoint<R>, path: F) -> Result<Self>
    where
        F: Fn(R) -> RVector<R> + Send + Sync + 'static,
    {
        Self::analytic_with_tol(base, path, R::tol(ANALYTIC_CLOSURE_TOL))
    }

    pub fn analytic_with_tol<F>(base: ControlPoint<R>, path: F, closure_tol: R) -> Result<Self>
    where
        F: Fn(R) -> RVector<R> + Send + Sync + 'static,
    {
        let lp = Self {
            base,
            path: Arc::new(path),
            nodes: None,
            closure_tol,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// Piecewise-linear loop through `nodes`, equally spaced in `t`.
    /// The first and last node must both lie within tolerance of `base`.
    pub fn from_nodes(base: ControlPoint<R>, nodes: Vec<RVector<R>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("a node loop needs at least two nodes".into()));
        }
        let dim = base.dim();
        for node in &nodes {
            if node.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "node has dimension {}, base has {}",
                    node.len(),
                    dim
                )));
            }
            if node.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("node has non-finite coordinates".into()));
            }
        }
        let nodes = Arc::new(nodes);
        let shared = Arc::clone(&nodes);
        let path = move |t: R| interpolate(&shared, t);
        let lp = Self {
            base,
            path: Arc::new(path),
            nodes: Some(nodes),
            closure_tol: R::tol(NODE_CLOSURE_TOL),
        };
        lp.validate()?;
        Ok(lp)
    }

    fn validate(&self) -> Result<()> {
        let start = self.eval(R::zero());
        let end = self.eval(R::one());
        if start.len() != self.base.dim() {
            return Err(Error::InvalidInput(format!(
                "path has dimension {}, base has {}",
                start.len(),
                self.base.dim()
            )));
        }
        for (label, p) in [("start", &start), ("end", &end)] {
            let gap = (p - self.base.coords()).norm();
            if !(gap <= self.closure_tol) {
                return Err(Error::InvalidInput(format!(
                    "loop {label} is {:e} from the base point (tolerance {:e})",
                    gap.as_f64(),
                    self.closure_tol.as_f64()
                )));
            }
        }
        // Continuity: no jump may dominate the whole excursion.
        let mut prev = start;
        let mut max_step = R::zero();
        let mut extent = R::zero();
        for k in 1..=CHECK_GRID {
            let p = self.eval(grid_t(k, CHECK_GRID));
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("path produced non-finite coordinates".into()));
            }
            max_step = max_step.max((&p - &prev).norm());
            extent = extent.max((&p - self.base.coords()).norm());
            prev = p;
        }
        if max_step > R::lit(0.5) * extent + R::lit(1e-9) && max_step > R::lit(0.1) {
            return Err(Error::InvalidInput(format!(
                "path is discontinuous: step {:e} on a grid of {CHECK_GRID}",
                max_step.as_f64()
            )));
        }
        Ok(())
    }

    fn eval(&self, t: R) -> RVector<R> {
        let t = t.max(R::zero()).min(R::one());
        (self.path)(t)
    }

    /// `γ(t)` for `t ∈ [0, 1]` (clamped).
    pub fn at(&self, t: R) -> ControlPoint<R> {
        ControlPoint::unchecked(self.eval(t))
    }

    pub fn base(&self) -> &ControlPoint<R> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn closure_tol(&self) -> R {
        self.closure_tol
    }

    /// Node list for loops built with [`Loop::from_nodes`].
    pub fn nodes(&self) -> Option<&[RVector<R>]> {
        self.nodes.as_deref().map(|v| v.as_slice())
    }

    /// `K + 1` points at `t = 0, 1/K, …, 1`.
    pub fn sample(&self, k: usize) -> Result<Vec<ControlPoint<R>>> {
        if k < 2 {
            return Err(Error::InvalidResolution(format!("sample needs K >= 2, got {k}")));
        }
        Ok((0..=k).map(|i| self.at(grid_t(i, k))).collect())
    }

    /// Whether two loops share a base point within their tolerances.
    fn base_matches(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.base.distance(&other.base) <= self.closure_tol.max(other.closure_tol)
    }
}

/// `i / k` with the division done in `R`, so refinements hit identical values.
pub(crate) fn grid_t<R: Real>(i: usize, k: usize) -> R {
    R::from_usize(i).unwrap() / R::from_usize(k).unwrap()
}

fn interpolate<R: Real>(nodes: &[RVector<R>], t: R) -> RVector<R> {
    let segments = nodes.len() - 1;
    let scaled = t * R::from_usize(segments).unwrap();
    let mut idx = scaled.floor().to_usize().unwrap_or(0);
    if idx >= segments {
        idx = segments - 1;
    }
    let local = scaled - R::from_usize(idx).unwrap();
    &nodes[idx] * (R::one() - local) + &nodes[idx + 1] * local
}

/// The unit loop `γ₀(t) = λ₀`.
pub fn constant_loop<R: Real>(base: &ControlPoint<R>) -> Result<Loop<R>> {
    if base.coords().iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("base point has non-finite coordinates".into()));
    }
    let p = base.coords().clone();
    Loop::analytic(base.clone(), move |_| p.clone())
}

/// Runs `first` on `[0, 1/2]` and then `second` on `[1/2, 1]`.
pub fn compose<R: Real>(first: &Loop<R>, second: &Loop<R>) -> Result<Loop<R>> {
    if !first.base_matches(second) {
        return Err(Error::InvalidComposition(format!(
            "base points {:?} and {:?} differ",
            first.base.to_f64(),
            second.base.to_f64()
        )));
    }
    let a = first.clone();
    let b = second.clone();
    let half = R::lit(0.5);
    let two = R::lit(2.0);
    let tol = first.closure_tol.max(second.closure_tol);
    Loop::analytic_with_tol(
        first.base.clone(),
        move |t| {
            if t <= half {
                a.eval(two * t)
            } else {
                b.eval(two * t - R::one())
            }
        },
        tol,
    )
}

/// The reversed loop `t ↦ γ(1 − t)`.
pub fn invert<R: Real>(lp: &Loop<R>) -> Loop<R> {
    let inner = lp.clone();
    Loop {
        base: lp.base.clone(),
        path: Arc::new(move |t| inner.eval(R::one() - t)),
        nodes: None,
        closure_tol: lp.closure_tol,
    }
}

/// Endpoint-fixing, strictly increasing map of the unit interval.
pub type Reparam<R> = Arc<dyn Fn(R) -> R + Send + Sync>;

/// `γ ∘ φ`. Monotonicity of `φ` is checked on a grid.
pub fn reparametrize<R: Real>(lp: &Loop<R>, phi: Reparam<R>) -> Result<Loop<R>> {
    let tol = R::tol(1e-12);
    if (phi(R::zero())).abs() > tol || (phi(R::one()) - R::one()).abs() > tol {
        return Err(Error::InvalidReparametrization("φ must fix 0 and 1".into()));
    }
    let mut prev = phi(R::zero());
    for k in 1..=CHECK_GRID {
        let v = phi(grid_t(k, CHECK_GRID));
        if !(v > prev) {
            return Err(Error::InvalidReparametrization(format!(
                "φ is not strictly increasing near t = {}",
                k as f64 / CHECK_GRID as f64
            )));
        }
        prev = v;
    }
    let inner = lp.clone();
    Ok(Loop {
        base: lp.base.clone(),
        path: Arc::new(move |t| inner.eval(phi(t))),
        nodes: None,
        closure_tol: lp.closure_tol,
    })
}

/// One letter of a loop word: generator 1 or 2, traversed forwards or backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub loop_index: u8,
    pub inverse: bool,
}

impl Letter {
    pub fn new(loop_index: u8, exponent: i8) -> Result<Self> {
        if !(loop_index == 1 || loop_index == 2) || !(exponent == 1 || exponent == -1) {
            return Err(Error::InvalidInput(format!(
                "letter ({loop_index}, {exponent}) outside {{1,2}} × {{+1,-1}}"
            )));
        }
        Ok(Self {
            loop_index,
            inverse: exponent < 0,
        })
    }

    pub fn exponent(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inverted(self) -> Self {
        Self {
            inverse: !self.inverse,
            ..self
        }
    }

    /// `±1` or `±2`.
    pub fn signed(self) -> i8 {
        self.loop_index as i8 * self.exponent()
    }

    pub fn from_signed(s: i8) -> Result<Self> {
        Self::new(s.unsigned_abs(), s.signum())
    }
}

/// A finite word in two loops and their inverses; empty means the unit loop.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct LoopWord(Vec<Letter>);

impl LoopWord {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn from_pairs(pairs: &[(u8, i8)]) -> Result<Self> {
        pairs
            .iter()
            .map(|&(i, e)| Letter::new(i, e))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    /// The word whose holonomy is the inverse: letters reversed and flipped.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    pub fn to_signed(&self) -> Vec<i8> {
        self.0.iter().map(|l| l.signed()).collect()
    }
}

impl TryFrom<Vec<i8>> for LoopWord {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        v.into_iter()
            .map(Letter::from_signed)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl From<LoopWord> for Vec<i8> {
    fn from(w: LoopWord) -> Self {
        w.to_signed()
    }
}

impl fmt::Display for LoopWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.to_signed().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s:+}")?;
        }
        write!(f, "]")
    }
}

/// Composite loop traversing the letters in order, one equal sub-interval each.
pub fn word_to_loop<R: Real>(word: &LoopWord, first: &Loop<R>, second: &Loop<R>) -> Result<Loop<R>> {
    if !first.base_matches(second) {
        return Err(Error::InvalidComposition(
            "generator loops do not share a base point".into(),
        ));
    }
    if word.is_empty() {
        return constant_loop(first.base());
    }
    let pieces: Vec<Loop<R>> = word
        .letters()
        .iter()
        .map(|l| {
            let g = if l.loop_index == 1 { first } else { second };
            if l.inverse {
                invert(g)
            } else {
                g.clone()
            }
        })
        .collect();
    let n = pieces.len();
    let tol = first.closure_tol.max(second.closure_tol);
    Loop::analytic_with_tol(
        first.base.clone(),
        move |t| {
            let scaled = t * R::from_usize(n).unwrap();
            let mut idx = scaled.floor().to_usize().unwrap_or(0);
            if idx >= n {
                idx = n - 1;
            }
            pieces[idx].eval(scaled - R::from_usize(idx).unwrap())
        },
        tol,
    )
}

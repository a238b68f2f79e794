//! Gate synthesis from two loop holonomies by breadth-first word search.
//!
//! A word `w = ℓ₁ ℓ₂ ⋯ ℓ_k` evaluates to `L_k ⋯ L₂ L₁` (later letters act
//! later, on the left), matching [`crate::holonomy::word_product`].

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::holonomy::holonomy_frame;
use crate::linalg::{identity, unitarity_defect};
use crate::loops::{ControlPoint, Letter, Loop, LoopWord};
use crate::scalar::{c, CMatrix, Real, C};
use crate::spectral::HamiltonianFamily;

/// Unitarity defect accepted for compiler inputs.
pub const INPUT_UNITARITY_TOL: f64 = 1e-6;
/// Unitarity defect accepted for a target.
pub const TARGET_UNITARITY_TOL: f64 = 1e-10;
pub const DEFAULT_NET_RADIUS: f64 = 0.05;
pub const DEFAULT_MAX_NODES: usize = 1_000_000;
/// Letter holonomies are cached at this resolution.
pub const LETTER_STEPS: usize = 4096;
/// Minimum `‖[Γ₁, Γ₂]‖_F` for a loop pair to count as generic.
pub const GENERICITY_THRESHOLD: f64 = 0.01;
pub const GENERIC_ATTEMPTS: u64 = 10;
/// Amplitude of the generated compiler loops.
pub const GENERIC_AMPLITUDE: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct GateTarget<R: Real> {
    pub unitary: CMatrix<R>,
    pub tolerance: R,
    pub phase_invariant: bool,
}

impl<R: Real> GateTarget<R> {
    pub fn new(unitary: CMatrix<R>, tolerance: R, phase_invariant: bool) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::InvalidInput("target must be square".into()));
        }
        let defect = unitarity_defect(&unitary);
        if !(defect <= R::tol(TARGET_UNITARITY_TOL)) {
            return Err(Error::NonUnitary { defect: defect.as_f64() });
        }
        if !(tolerance > R::zero()) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(Self {
            unitary,
            tolerance,
            phase_invariant,
        })
    }
}

fn trace_overlap<R: Real>(u: &CMatrix<R>, v: &CMatrix<R>) -> C<R> {
    // tr(U†V) without forming the product
    u.iter().zip(v.iter()).fold(c(R::zero(), R::zero()), |acc, (a, b)| acc + a.conj() * b)
}

fn raw_distance<R: Real>(u: &CMatrix<R>, v: &CMatrix<R>, phase_invariant: bool) -> R {
    if phase_invariant {
        let n = R::lit(u.nrows() as f64);
        let t = trace_overlap(u, v);
        let overlap = (t.re * t.re + t.im * t.im).sqrt();
        (R::lit(2.0) * (n - overlap)).max(R::zero()).sqrt()
    } else {
        (u - v).norm()
    }
}

/// `‖U − V‖_F`, or `min_θ ‖U − e^{iθ}V‖_F = √(2n − 2|tr U†V|)`.
pub fn gate_distance<R: Real>(u: &CMatrix<R>, v: &CMatrix<R>, phase_invariant: bool) -> Result<R> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::InvalidInput(format!("shapes {:?} and {:?}", u.shape(), v.shape())));
    }
    for m in [u, v] {
        let defect = unitarity_defect(m);
        if !(defect <= R::tol(INPUT_UNITARITY_TOL)) {
            return Err(Error::NonUnitary { defect: defect.as_f64() });
        }
    }
    Ok(raw_distance(u, v, phase_invariant))
}

#[derive(Debug, Clone)]
pub struct CompilerOptions {
    pub max_len: usize,
    pub net_radius: f64,
    /// Cap on unitaries stored in the visited net.
    pub max_nodes: usize,
}

impl CompilerOptions {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            net_radius: DEFAULT_NET_RADIUS,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompilerResult<R: Real> {
    pub word: LoopWord,
    pub unitary: CMatrix<R>,
    pub distance: R,
    /// Candidate words evaluated.
    pub explored: usize,
    /// Best distance after each completed length, starting at length 0.
    pub trace: Vec<(usize, R)>,
}

#[derive(Debug, Clone)]
pub enum CompileError<R: Real> {
    Invalid(Error),
    /// The net outgrew `max_nodes`; carries the best word found so far.
    BudgetExceeded { limit: usize, best: Box<CompilerResult<R>> },
}

impl<R: Real> std::fmt::Display for CompileError<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Invalid(e) => write!(f, "{e}"),
            Self::BudgetExceeded { limit, best } => write!(
                f,
                "search budget of {limit} nodes exceeded; best distance {:e} with word {}",
                best.distance.as_f64(),
                best.word
            ),
        }
    }
}

impl<R: Real> std::error::Error for CompileError<R> {}

impl<R: Real> From<Error> for CompileError<R> {
    fn from(e: Error) -> Self {
        Self::Invalid(e)
    }
}

/// Visited set with neighbourhood queries under the search metric.
///
/// Keys quantize the leading entries of the first column. Under the
/// phase-invariant metric a unitary is first divided by a root of its
/// determinant, which leaves an `n`-fold ambiguity; all `n` roots are probed.
struct Net<R: Real> {
    radius: R,
    cell: R,
    phase_invariant: bool,
    entries: usize,
    cells: HashMap<Vec<i64>, Vec<CMatrix<R>>>,
}

impl<R: Real> Net<R> {
    const KEY_ENTRIES: usize = 2;

    fn new(radius: R, phase_invariant: bool) -> Self {
        Self {
            radius,
            // normalization can stretch distances, so cells are twice the radius
            cell: radius * R::lit(2.0),
            phase_invariant,
            entries: 0,
            cells: HashMap::new(),
        }
    }

    fn len(&self) -> usize {
        self.entries
    }

    fn normalized(&self, u: &CMatrix<R>) -> Vec<C<R>> {
        let rows = u.nrows().min(Self::KEY_ENTRIES);
        let column: Vec<C<R>> = (0..rows).map(|i| u[(i, 0)]).collect();
        if !self.phase_invariant {
            return column;
        }
        let det = u.determinant();
        let arg = det.im.atan2(det.re) / R::lit(u.nrows() as f64);
        let (s, co) = arg.sin_cos();
        let root = c(co, -s);
        column.into_iter().map(|z| z * root).collect()
    }

    fn key(&self, column: &[C<R>]) -> Vec<i64> {
        column
            .iter()
            .flat_map(|z| [z.re, z.im])
            .map(|x| (x / self.cell).floor().as_f64() as i64)
            .collect()
    }

    /// Representatives differing by the centre `e^{2πik/n}`.
    fn representatives(&self, u: &CMatrix<R>) -> Vec<Vec<C<R>>> {
        let base = self.normalized(u);
        if !self.phase_invariant {
            return vec![base];
        }
        let n = u.nrows();
        (0..n)
            .map(|k| {
                let (s, co) = R::lit(2.0 * PI * k as f64 / n as f64).sin_cos();
                base.iter().map(|&z| z * c(co, s)).collect()
            })
            .collect()
    }

    fn contains_near(&self, u: &CMatrix<R>) -> bool {
        // a zero radius disables pruning
        if !(self.radius > R::zero()) {
            return false;
        }
        for rep in self.representatives(u) {
            let key = self.key(&rep);
            let dims = key.len();
            let neighbours = 3usize.pow(dims as u32);
            for code in 0..neighbours {
                let mut probe = key.clone();
                let mut rest = code;
                for slot in probe.iter_mut() {
                    *slot += (rest % 3) as i64 - 1;
                    rest /= 3;
                }
                if let Some(bucket) = self.cells.get(&probe) {
                    if bucket
                        .iter()
                        .any(|v| raw_distance(u, v, self.phase_invariant) <= self.radius)
                    {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, u: CMatrix<R>) {
        self.entries += 1;
        if !(self.radius > R::zero()) {
            return;
        }
        let key = self.key(&self.normalized(&u));
        self.cells.entry(key).or_default().push(u);
    }
}

struct Node<R: Real> {
    word: LoopWord,
    unitary: CMatrix<R>,
}

/// Breadth-first search over words in `{U₁, U₁⁻¹, U₂, U₂⁻¹}` up to
/// `max_len`, skipping immediate cancellations and words that land within
/// the net radius of an already visited unitary.
pub fn compile<R: Real>(
    target: &GateTarget<R>,
    u1: &CMatrix<R>,
    u2: &CMatrix<R>,
    options: &CompilerOptions,
) -> std::result::Result<CompilerResult<R>, CompileError<R>> {
    let n = target.unitary.nrows();
    for u in [u1, u2] {
        if u.shape() != (n, n) {
            return Err(Error::InvalidInput(format!("letter shape {:?}, target {n}×{n}", u.shape())).into());
        }
        let defect = unitarity_defect(u);
        if !(defect <= R::tol(INPUT_UNITARITY_TOL)) {
            return Err(Error::NonUnitary { defect: defect.as_f64() }.into());
        }
    }
    if options.max_len == 0 {
        return Err(Error::InvalidInput("max_len must be at least 1".into()).into());
    }
    if !(options.net_radius >= 0.0) {
        return Err(Error::InvalidInput("net radius must be non-negative".into()).into());
    }
    let letters: Vec<(Letter, CMatrix<R>)> = vec![
        (Letter::new(1, 1)?, u1.clone()),
        (Letter::new(1, -1)?, u1.adjoint()),
        (Letter::new(2, 1)?, u2.clone()),
        (Letter::new(2, -1)?, u2.adjoint()),
    ];
    let metric = |u: &CMatrix<R>| raw_distance(&target.unitary, u, target.phase_invariant);

    let start = identity::<R>(n);
    let mut best = CompilerResult {
        word: LoopWord::empty(),
        distance: metric(&start),
        unitary: start.clone(),
        explored: 1,
        trace: Vec::new(),
    };
    best.trace.push((0, best.distance));
    let mut net = Net::new(R::lit(options.net_radius), target.phase_invariant);
    net.insert(start.clone());
    let mut frontier = vec![Node {
        word: LoopWord::empty(),
        unitary: start,
    }];

    for len in 1..=options.max_len {
        if best.distance <= target.tolerance || frontier.is_empty() {
            break;
        }
        // children are evaluated concurrently, then merged in a fixed order
        let children: Vec<(LoopWord, CMatrix<R>, R)> = frontier
            .par_iter()
            .flat_map_iter(|node| {
                let last = node.word.letters().last().copied();
                letters
                    .iter()
                    .filter(move |(letter, _)| last != Some(letter.inverted()))
                    .map(move |(letter, l)| {
                        let mut word = node.word.clone();
                        word.push(*letter);
                        let u = l * &node.unitary;
                        let d = metric(&u);
                        (word, u, d)
                    })
            })
            .collect();
        best.explored += children.len();
        let mut next = Vec::new();
        for (word, unitary, d) in children {
            if d < best.distance {
                best.distance = d;
                best.word = word.clone();
                best.unitary = unitary.clone();
            }
            if net.contains_near(&unitary) {
                continue;
            }
            if net.len() >= options.max_nodes {
                best.trace.push((len, best.distance));
                return Err(CompileError::BudgetExceeded {
                    limit: options.max_nodes,
                    best: Box::new(best),
                });
            }
            net.insert(unitary.clone());
            next.push(Node { word, unitary });
        }
        best.trace.push((len, best.distance));
        frontier = next;
    }
    Ok(best)
}

/// Closed trigonometric loop around `base`: each coordinate is
/// `Σ_{k=1,2} (A/k)[a_k(cos 2πkt − 1) + b_k sin 2πkt]` with `a_k, b_k`
/// uniform in `[−1, 1]`.
pub fn random_trig_loop<R: Real, G: Rng>(base: &ControlPoint<R>, amplitude: f64, rng: &mut G) -> Result<Loop<R>> {
    let d = base.dim();
    let coeffs: Vec<[f64; 4]> = (0..d)
        .map(|_| {
            [
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
            ]
        })
        .collect();
    let origin = base.coords().clone();
    Loop::analytic(base.clone(), move |t: R| {
        let tau = R::lit(2.0 * PI) * t;
        DVector::from_fn(d, |j, _| {
            let [a1, b1, a2, b2] = coeffs[j];
            let first = R::lit(a1) * (tau.cos() - R::one()) + R::lit(b1) * tau.sin();
            let two_tau = tau + tau;
            let second = R::lit(a2) * (two_tau.cos() - R::one()) + R::lit(b2) * two_tau.sin();
            origin[j] + R::lit(amplitude) * (first + second * R::lit(0.5))
        })
    })
}

/// Two seeded loops at `base` whose level holonomies fail to commute by at
/// least [`GENERICITY_THRESHOLD`]. Attempt `i` draws from stream `i` of the
/// seed.
pub fn generate_generic_loops<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    base: &ControlPoint<R>,
    level: usize,
    seed: u64,
) -> Result<(Loop<R>, Loop<R>)> {
    let n = family.signature().multiplicity(level)?;
    if n < 2 {
        return Err(Error::GenericityFailure { attempts: 0, norm: 0.0 });
    }
    let mut best_norm = 0.0f64;
    for attempt in 0..GENERIC_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let g1 = random_trig_loop(base, GENERIC_AMPLITUDE, &mut rng)?;
        let g2 = random_trig_loop(base, GENERIC_AMPLITUDE, &mut rng)?;
        let h1 = holonomy_frame(family, &g1, level, 1024)?.unitary;
        let h2 = holonomy_frame(family, &g2, level, 1024)?.unitary;
        let norm = (&h1 * &h2 - &h2 * &h1).norm().as_f64();
        if norm > GENERICITY_THRESHOLD {
            return Ok((g1, g2));
        }
        best_norm = best_norm.max(norm);
    }
    Err(Error::GenericityFailure {
        attempts: GENERIC_ATTEMPTS as usize,
        norm: best_norm,
    })
}

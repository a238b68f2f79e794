//! Slow driving around a loop: integrate `i ∂_t U = H(γ(s(t/T))) U` and
//! compare the result with the holonomy.
//!
//! In the adiabatic limit the evolution restricted to level `l` is
//! `V₀ e^{−iφ_l} Γ_l V₀†` with `φ_l = ∫₀^T ε_l dt`, so the phase is removed by
//! multiplying with `e^{+iφ_l}`.

use crate::error::{Error, Result};
use crate::holonomy::{distance, Holonomy};
use crate::linalg::{commutator, expm, identity, max_abs_entry, spectral_norm, unitarity_defect};
use crate::loops::{ControlPoint, Loop};
use crate::scalar::{c, cr, CMatrix, Real};
use crate::spectral::HamiltonianFamily;

/// Fewest integrator steps accepted.
pub const MIN_STEPS: usize = 100;
/// Integrator steps per unit of `T·max‖H‖`.
pub const STEPS_PER_PHASE: f64 = 50.0;
/// Unitarity defect of `U(T)` that counts as a step instability.
pub const INSTABILITY_DEFECT: f64 = 1e-6;
/// Points used to bound `‖H‖` and to scan the adiabaticity surrogate.
const SCAN_POINTS: usize = 256;

/// Monotone reparametrization `s: [0, 1] → [0, 1]` of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    #[default]
    Identity,
    /// `s(u) = u²(3 − 2u)`; the loop starts and stops at rest.
    Smooth,
}

impl Ramp {
    pub fn eval<R: Real>(self, u: R) -> R {
        match self {
            Self::Identity => u,
            Self::Smooth => u * u * (R::lit(3.0) - u - u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Fourth-order Magnus with two Gauss points per step.
    #[default]
    Magnus4,
    /// `exp(−i H(t + Δt/2) Δt)`, second order.
    ExponentialMidpoint,
}

#[derive(Debug, Clone)]
pub struct AdiabaticSchedule<R: Real> {
    pub lp: Loop<R>,
    pub total_time: R,
    pub ramp: Ramp,
    /// `None` selects `max(100, ⌈50·T·max‖H‖⌉)` at evolution time.
    pub steps: Option<usize>,
    pub integrator: Integrator,
}

impl<R: Real> AdiabaticSchedule<R> {
    pub fn new(lp: Loop<R>, total_time: R) -> Result<Self> {
        if !(total_time > R::zero() && total_time.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "total time must be positive, got {}",
                total_time.as_f64()
            )));
        }
        Ok(Self {
            lp,
            total_time,
            ramp: Ramp::default(),
            steps: None,
            integrator: Integrator::default(),
        })
    }

    pub fn with_ramp(mut self, ramp: Ramp) -> Self {
        self.ramp = ramp;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        if steps < MIN_STEPS {
            return Err(Error::InvalidInput(format!("need at least {MIN_STEPS} steps, got {steps}")));
        }
        self.steps = Some(steps);
        Ok(self)
    }

    /// Control point at physical time `t ∈ [0, T]`.
    pub fn point(&self, t: R) -> ControlPoint<R> {
        self.lp.at(self.ramp.eval(t / self.total_time))
    }

    /// Integrator steps: the explicit choice or the default rule for `family`.
    pub fn resolve_steps<F: HamiltonianFamily<R> + ?Sized>(&self, family: &F) -> Result<usize> {
        if let Some(m) = self.steps {
            return Ok(m);
        }
        let mut h_max = R::zero();
        for j in 0..=SCAN_POINTS {
            let u = R::lit(j as f64 / SCAN_POINTS as f64);
            h_max = h_max.max(spectral_norm(&family.hamiltonian(&self.lp.at(u))?));
        }
        let raw = R::lit(STEPS_PER_PHASE) * self.total_time * h_max;
        // roundoff in ‖H‖ must not bump an integral product to the next step
        let m = (raw * (R::one() - R::lit(1e-12))).ceil().as_f64();
        Ok(MIN_STEPS.max(m as usize))
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult<R: Real> {
    /// `U(T)`, `N × N`.
    pub propagator: CMatrix<R>,
    /// `φ_l` per level (composite Simpson).
    pub phases: Vec<R>,
    /// Level projectors at the base point.
    pub projectors: Vec<CMatrix<R>>,
    /// `Π_l U(T) Π_l` per level.
    pub blocks: Vec<CMatrix<R>>,
    /// `‖(1 − Π_l) U(T) Π_l‖₂` per level.
    pub leakage: Vec<R>,
    pub steps: usize,
    pub integrator: Integrator,
    /// `‖U†U − 1‖_F` of the propagator.
    pub defect: R,
}

pub fn evolve<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    schedule: &AdiabaticSchedule<R>,
) -> Result<EvolutionResult<R>> {
    let steps = schedule.resolve_steps(family)?;
    let n = family.dimension();
    let total = schedule.total_time;
    let dt = total / R::lit(steps as f64);
    let minus_i = c(R::zero(), -R::one());
    let h_at = |t: R| -> Result<CMatrix<R>> { Ok(family.hamiltonian(&schedule.point(t))? * minus_i) };
    let gauss = R::lit(3.0f64.sqrt() / 6.0);
    let half = R::lit(0.5);
    let magnus_c = cr(R::lit(3.0f64.sqrt() / 12.0) * dt * dt);
    let mut u = identity::<R>(n);
    for j in 0..steps {
        let t0 = dt * R::lit(j as f64);
        let omega = match schedule.integrator {
            Integrator::Magnus4 => {
                let a1 = h_at(t0 + dt * (half - gauss))?;
                let a2 = h_at(t0 + dt * (half + gauss))?;
                (&a1 + &a2) * cr(dt * half) + commutator(&a2, &a1) * magnus_c
            }
            Integrator::ExponentialMidpoint => h_at(t0 + dt * half)? * cr(dt),
        };
        u = expm(&omega) * u;
    }
    let defect = unitarity_defect(&u);
    if !(defect <= R::tol(INSTABILITY_DEFECT)) {
        return Err(Error::IntegratorResolution {
            defect: defect.as_f64(),
        });
    }
    let base = family.decompose_at(schedule.lp.base())?;
    let phases = (0..base.projectors.len())
        .map(|l| dynamical_phase(family, schedule, l))
        .collect::<Result<Vec<_>>>()?;
    let eye = identity::<R>(n);
    let blocks = base.projectors.iter().map(|p| p * &u * p).collect();
    let leakage = base
        .projectors
        .iter()
        .map(|p| spectral_norm(&((&eye - p) * &u * p)))
        .collect();
    Ok(EvolutionResult {
        propagator: u,
        phases,
        projectors: base.projectors,
        blocks,
        leakage,
        steps,
        integrator: schedule.integrator,
        defect,
    })
}

/// Number of quadrature intervals: the schedule's step count rounded up to even.
fn quadrature_intervals<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    schedule: &AdiabaticSchedule<R>,
) -> Result<usize> {
    let m = schedule.resolve_steps(family)?;
    Ok(m + m % 2)
}

fn level_energy<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    schedule: &AdiabaticSchedule<R>,
    level: usize,
    t: R,
) -> Result<R> {
    let energies = family.level_energies(&schedule.point(t))?;
    energies
        .get(level)
        .copied()
        .ok_or(Error::LevelOutOfRange {
            level,
            levels: energies.len(),
        })
}

/// `φ_l = ∫₀^T ε_l dt` by composite Simpson.
pub fn dynamical_phase<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    schedule: &AdiabaticSchedule<R>,
    level: usize,
) -> Result<R> {
    let m = quadrature_intervals(family, schedule)?;
    let dt = schedule.total_time / R::lit(m as f64);
    let mut acc = R::zero();
    for j in 0..=m {
        let w = if j == 0 || j == m {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += R::lit(w) * level_energy(family, schedule, level, dt * R::lit(j as f64))?;
    }
    Ok(acc * dt / R::lit(3.0))
}

/// `φ_l` by the composite midpoint rule, an independent cross-check.
pub fn dynamical_phase_midpoint<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    schedule: &AdiabaticSchedule<R>,
    level: usize,
) -> Result<R> {
    let m = quadrature_intervals(family, schedule)?;
    let dt = schedule.total_time / R::lit(m as f64);
    let mut acc = R::zero();
    for j in 0..m {
        acc += level_energy(family, schedule, level, dt * (R::lit(j as f64) + R::lit(0.5)))?;
    }
    Ok(acc * dt)
}

/// `‖e^{iφ}·V₀† U(T) V₀ − Γ‖_F` with `V₀` the holonomy's starting frame.
pub fn compare_holonomy<R: Real>(
    evolution: &EvolutionResult<R>,
    hol: &Holonomy<R>,
    level: usize,
    phase: R,
) -> Result<R> {
    let p = evolution.projectors.get(level).ok_or(Error::LevelOutOfRange {
        level,
        levels: evolution.projectors.len(),
    })?;
    let frame = &hol.start_frame;
    if frame.nrows() != p.nrows() || hol.level != level {
        return Err(Error::InvalidComparison(format!(
            "holonomy of level {} in dimension {} against level {level} in dimension {}",
            hol.level,
            frame.nrows(),
            p.nrows()
        )));
    }
    let off = max_abs_entry(&(p * frame - frame));
    if !(off <= R::tol(1e-8)) {
        return Err(Error::InvalidComparison(format!(
            "starting frame leaves the level-{level} eigenspace by {:e}",
            off.as_f64()
        )));
    }
    let block = frame.adjoint() * &evolution.propagator * frame;
    let (s, co) = phase.sin_cos();
    Ok(distance(&(block * c(co, s)), &hol.unitary))
}

/// `max_t ‖dH/dt‖₂ / (min gap)²` over the schedule.
pub fn adiabaticity_ratio<R: Real, F: HamiltonianFamily<R> + ?Sized>(
    family: &F,
    schedule: &AdiabaticSchedule<R>,
) -> Result<R> {
    let total = schedule.total_time;
    let du = R::lit(1e-5);
    let mut rate = R::zero();
    let mut gap: Option<R> = None;
    for j in 0..SCAN_POINTS {
        let u = R::lit((j as f64 + 0.5) / SCAN_POINTS as f64);
        let at = schedule.point(u * total);
        let dec = family.decompose_at(&at).map_err(|_| Error::Crossing {
            t: (u * total).as_f64(),
        })?;
        if let Some(g) = dec.min_gap() {
            if !(g > family.gap_tol()) {
                return Err(Error::Crossing {
                    t: (u * total).as_f64(),
                });
            }
            gap = Some(gap.map_or(g, |m: R| m.min(g)));
        }
        let plus = family.hamiltonian(&schedule.point((u + du) * total))?;
        let minus = family.hamiltonian(&schedule.point((u - du) * total))?;
        let dh = (plus - minus) * cr(R::one() / (du * R::lit(2.0) * total));
        rate = rate.max(spectral_norm(&dh));
    }
    match gap {
        Some(g) => Ok(rate / (g * g)),
        // a single level has no gap to protect
        None => Ok(R::zero()),
    }
}

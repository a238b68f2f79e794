//! Scenario execution. `Setup::build` turns a validated scenario into a
//! family and loops without touching the filesystem; `run` produces the
//! in-memory report.

use std::f64::consts::PI;
use std::sync::Arc;

use holonomy_core::compiler::{compile, generate_generic_loops, random_trig_loop, CompileError, CompilerOptions, GateTarget};
use holonomy_core::linalg::identity;
use holonomy_core::loops::Reparam;
use holonomy_core::models::{bosonic_family, cp_family, spin_equator_loop, spin_family, BosonicModel, CpModel, SpinFamily};
use holonomy_core::scalar::cf;
use holonomy_core::{
    adiabaticity_ratio, compare_holonomy, compose, constant_loop, curvature_at, evolve, holonomy_frame,
    holonomy_of_word, holonomy_projector, invert, irreducibility_dimension, reparametrize, AdiabaticSchedule,
    ControlPoint, HamiltonianFamily, Loop64, OrbitFamily64, WordRoute,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, LoopKind, ModelConfig, Scenario};
use crate::report::{sci, Check, CompileReport, NamedMatrix, Report, SweepRow, TracePoint};
use crate::CliError;

/// Stopping tolerance handed to the compiler; the search normally ends on
/// its length limit first.
const COMPILE_TOLERANCE: f64 = 1e-9;

pub enum Model {
    Spin(SpinFamily),
    Orbit(OrbitFamily64),
}

impl Model {
    pub fn family(&self) -> &dyn HamiltonianFamily<f64> {
        match self {
            Self::Spin(f) => f,
            Self::Orbit(f) => f,
        }
    }
}

pub struct Setup {
    pub model: Model,
    pub loops: Vec<(String, Loop64)>,
}

impl Setup {
    pub fn build(scenario: &Scenario) -> Result<Self, CliError> {
        let config = |e: holonomy_core::Error| CliError::Config(format!("model: {e}"));
        let model = match &scenario.model {
            ModelConfig::Spin => Model::Spin(spin_family()),
            ModelConfig::Cp { n, eps_code, eps_single } => {
                let m = CpModel::with_energies(*n, *eps_code, *eps_single).map_err(config)?;
                Model::Orbit(cp_family(&m).map_err(config)?)
            }
            ModelConfig::Bosonic { truncation, omega } => {
                let m = BosonicModel::new(*truncation, *omega).map_err(config)?;
                Model::Orbit(bosonic_family(&m).map_err(config)?)
            }
        };
        let levels = model.family().signature().levels();
        if scenario.numerics.level >= levels {
            return Err(CliError::Config(format!(
                "numerics.level: {} out of range for {levels} levels",
                scenario.numerics.level
            )));
        }

        let dim = scenario.control_dim();
        let origin = ControlPoint::origin(dim);
        let mut shared = ChaCha8Rng::seed_from_u64(scenario.seed);
        let mut loops = Vec::with_capacity(scenario.loops.len());
        for (i, lc) in scenario.loops.iter().enumerate() {
            let bad = |e: holonomy_core::Error| CliError::Config(format!("loop[{i}]: {e}"));
            let lp = match lc.kind {
                LoopKind::SpinEquator => spin_equator_loop(lc.radius.unwrap_or(1.0)).map_err(bad)?,
                LoopKind::RandomTrig => {
                    let amplitude = lc.amplitude.expect("validated");
                    match lc.seed {
                        Some(s) => random_trig_loop(&origin, amplitude, &mut ChaCha8Rng::seed_from_u64(s)),
                        None => random_trig_loop(&origin, amplitude, &mut shared),
                    }
                    .map_err(bad)?
                }
                LoopKind::Nodes => {
                    let nodes: Vec<DVector<f64>> = lc
                        .nodes
                        .as_ref()
                        .expect("validated")
                        .iter()
                        .map(|n| DVector::from_column_slice(n))
                        .collect();
                    let base = ControlPoint::new(nodes[0].clone()).map_err(bad)?;
                    Loop64::from_nodes(base, nodes).map_err(bad)?
                }
            };
            loops.push((lc.id.clone(), lp));
        }
        Ok(Self { model, loops })
    }
}

pub fn run(scenario: &Scenario, setup: &Setup, parallel: bool) -> Result<Report, CliError> {
    let mut report = Report::new(scenario.experiment.as_str(), &scenario.model.name());
    report.line("seed", scenario.seed.to_string());
    report.line("level", scenario.numerics.level.to_string());
    match scenario.experiment {
        Experiment::Holonomy => holonomy(scenario, setup, parallel, &mut report)?,
        Experiment::GroupLaws => group_laws(scenario, setup, &mut report)?,
        Experiment::CurvatureSpan => curvature_span(scenario, setup, &mut report)?,
        Experiment::AdiabaticSweep => adiabatic_sweep(scenario, setup, parallel, &mut report)?,
        Experiment::Compile => compile_gate(scenario, setup, &mut report)?,
    }
    Ok(report)
}

/// Maps `f` over `items` in order, concurrently when asked.
fn ordered_map<T: Sync, U: Send>(
    items: &[T],
    parallel: bool,
    f: impl Fn(&T) -> Result<U, CliError> + Sync + Send,
) -> Result<Vec<U>, CliError> {
    if parallel {
        items.par_iter().map(&f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn holonomy(scenario: &Scenario, setup: &Setup, parallel: bool, report: &mut Report) -> Result<(), CliError> {
    let fam = setup.model.family();
    let (level, k) = (scenario.numerics.level, scenario.numerics.k);
    let results = ordered_map(&setup.loops, parallel, |(_, lp)| {
        Ok((holonomy_frame(fam, lp, level, k)?, holonomy_projector(fam, lp, level, k)?))
    })?;
    report.line("K", k.to_string());
    let mut worst = 0.0f64;
    for ((id, _), (frame, proj)) in setup.loops.iter().zip(&results) {
        let gap = frame.distance(proj);
        worst = worst.max(gap);
        report.line(format!("loop {id} method distance"), sci(gap));
        report.line(format!("loop {id} projector defect"), sci(proj.defect));
        report.matrices.push(NamedMatrix::new(format!("{id}/frame_transport"), &frame.unitary));
        report.matrices.push(NamedMatrix::new(format!("{id}/projector_product"), &proj.unitary));
    }
    if let Some(bound) = scenario.assertions.max_residual {
        report.checks.push(Check::at_most("method distance", worst, bound));
    }
    Ok(())
}

fn group_laws(scenario: &Scenario, setup: &Setup, report: &mut Report) -> Result<(), CliError> {
    let fam = setup.model.family();
    let (level, k) = (scenario.numerics.level, scenario.numerics.k);
    let (id1, g1) = &setup.loops[0];
    let (id2, g2) = &setup.loops[1];
    if g1.base().distance(g2.base()) > g1.closure_tol().max(g2.closure_tol()) {
        return Err(CliError::Config(format!("loops {id1} and {id2} must share a base point")));
    }
    let n = fam.signature().multiplicity(level)?;

    // factors at K/2 put the composite's K nodes on theirs
    let h1 = holonomy_frame(fam, g1, level, k / 2)?;
    let h2 = holonomy_frame(fam, g2, level, k / 2)?;
    let h12 = holonomy_frame(fam, &compose(g1, g2)?, level, k)?;
    let composition = (&h12.unitary - &h2.unitary * &h1.unitary).norm();

    let constant = constant_loop(g1.base())?;
    let unit = [holonomy_frame(fam, &constant, level, k)?, holonomy_projector(fam, &constant, level, k)?]
        .iter()
        .map(|h| (&h.unitary - identity::<f64>(n)).norm())
        .fold(0.0, f64::max);

    let u1 = holonomy_frame(fam, g1, level, k)?;
    let inv = holonomy_frame(fam, &invert(g1), level, k)?;
    let inverse = (&inv.unitary - u1.unitary.adjoint()).norm();

    let phi: Reparam<f64> = Arc::new(|t: f64| t + 0.1 * (2.0 * PI * t).sin() / (2.0 * PI));
    let moved = holonomy_frame(fam, &reparametrize(g1, phi)?, level, k)?;
    let reparam = moved.distance(&u1);

    report.line("K", k.to_string());
    report.line("loops", format!("{id1}, {id2}"));
    let residuals = [
        ("composition", composition),
        ("identity", unit),
        ("inverse", inverse),
        ("reparametrization", reparam),
    ];
    for (name, r) in residuals {
        report.line(format!("residual {name}"), sci(r));
        if let Some(bound) = scenario.assertions.max_residual {
            report.checks.push(Check::at_most(format!("residual {name}"), r, bound));
        }
    }
    report.matrices.push(NamedMatrix::new(format!("{id1}"), &u1.unitary));
    report.matrices.push(NamedMatrix::new(format!("{id2}"), &holonomy_frame(fam, g2, level, k)?.unitary));
    report.matrices.push(NamedMatrix::new(format!("{id1}*{id2}"), &h12.unitary));
    Ok(())
}

fn curvature_span(scenario: &Scenario, setup: &Setup, report: &mut Report) -> Result<(), CliError> {
    let fam = setup.model.family();
    let nm = &scenario.numerics;
    let at = match &nm.point {
        Some(p) => ControlPoint::from_f64(p).map_err(|e| CliError::Config(format!("numerics.point: {e}")))?,
        None => ControlPoint::origin(fam.control_dim()),
    };
    let f = curvature_at(fam, &at, nm.level, nm.h)?;
    let (dim, full) = irreducibility_dimension(&f);
    let n = fam.signature().multiplicity(nm.level)?;
    report.line("h", sci(nm.h));
    report.line("point", at.to_f64().iter().map(|x| sci(*x)).collect::<Vec<_>>().join(" "));
    report.line("span dimension", dim.to_string());
    report.line("algebra dimension", (n * n).to_string());
    report.line("irreducible", full.to_string());
    let d = f.control_dim();
    for mu in 0..d {
        for nu in mu + 1..d {
            report.matrices.push(NamedMatrix::new(format!("F[{mu}][{nu}]"), f.get(mu, nu)));
        }
    }
    if let Some(want) = scenario.assertions.dimension {
        report.checks.push(Check::equals("span dimension", dim, want));
    }
    if let Some(want) = scenario.assertions.irreducible {
        report.checks.push(Check::equals("irreducible", full, want));
    }
    Ok(())
}

fn adiabatic_sweep(scenario: &Scenario, setup: &Setup, parallel: bool, report: &mut Report) -> Result<(), CliError> {
    let fam = setup.model.family();
    let nm = &scenario.numerics;
    let (level, k) = (nm.level, nm.k);
    let holonomies = ordered_map(&setup.loops, parallel, |(_, lp)| Ok(holonomy_frame(fam, lp, level, k)?))?;
    let cells: Vec<(usize, f64)> = (0..setup.loops.len())
        .flat_map(|i| nm.t.iter().map(move |&t| (i, t)))
        .collect();
    let rows = ordered_map(&cells, parallel, |&(i, t)| {
        let (id, lp) = &setup.loops[i];
        let mut sched = AdiabaticSchedule::new(lp.clone(), t)?
            .with_ramp(nm.ramp)
            .with_integrator(nm.integrator);
        if let Some(m) = nm.m {
            sched = sched.with_steps(m)?;
        }
        let ev = evolve(fam, &sched)?;
        let residual = compare_holonomy(&ev, &holonomies[i], level, ev.phases[level])?;
        Ok(SweepRow {
            loop_id: id.clone(),
            total_time: t,
            steps: ev.steps,
            k,
            residual,
            leakage: ev.leakage[level],
            ratio: adiabaticity_ratio(fam, &sched)?,
        })
    })?;

    report.line("K", k.to_string());
    report.line("ramp", format!("{:?}", nm.ramp).to_lowercase());
    report.line("integrator", format!("{:?}", nm.integrator).to_lowercase());
    for row in &rows {
        report.line(
            format!("loop {} T={}", row.loop_id, sci(row.total_time)),
            format!("M={} residual={} leakage={}", row.steps, sci(row.residual), sci(row.leakage)),
        );
    }
    for ((id, _), hol) in setup.loops.iter().zip(&holonomies) {
        report.matrices.push(NamedMatrix::new(format!("{id}/holonomy"), &hol.unitary));
    }

    let a = &scenario.assertions;
    for (id, _) in &setup.loops {
        let mut mine: Vec<&SweepRow> = rows.iter().filter(|r| &r.loop_id == id).collect();
        mine.sort_by(|x, y| x.total_time.total_cmp(&y.total_time));
        let last = mine.last().expect("nonempty sweep");
        if let Some(bound) = a.max_leakage {
            report.checks.push(Check::at_most(format!("{id} leakage at largest T"), last.leakage, bound));
        }
        if let Some(bound) = a.max_residual {
            report.checks.push(Check::at_most(format!("{id} residual at largest T"), last.residual, bound));
        }
        if a.residual_non_increasing {
            let monotone = mine.windows(2).all(|w| w[1].residual <= w[0].residual);
            report.checks.push(Check::equals(format!("{id} residual non-increasing in T"), monotone, true));
        }
    }
    report.sweep = Some(rows);
    Ok(())
}

fn compile_gate(scenario: &Scenario, setup: &Setup, report: &mut Report) -> Result<(), CliError> {
    let fam = setup.model.family();
    let nm = &scenario.numerics;
    let (level, k) = (nm.level, nm.k);
    let n = fam.signature().multiplicity(level)?;
    let phases = nm.target_phases.clone().expect("validated");
    if phases.len() != n {
        return Err(CliError::Config(format!(
            "numerics.target_phases: level {level} has dimension {n}, got {} phases",
            phases.len()
        )));
    }
    let (g1, g2) = match setup.loops.as_slice() {
        [] => {
            let origin = ControlPoint::origin(fam.control_dim());
            let pair = generate_generic_loops(fam, &origin, level, scenario.seed)?;
            report.line("letters", format!("generic pair from seed {}", scenario.seed));
            pair
        }
        [(a, g1), (b, g2), ..] => {
            report.line("letters", format!("{a}, {b}"));
            (g1.clone(), g2.clone())
        }
        [_] => unreachable!("validated"),
    };
    let u1 = holonomy_frame(fam, &g1, level, k)?.unitary;
    let u2 = holonomy_frame(fam, &g2, level, k)?.unitary;
    let mut goal = identity::<f64>(n);
    for (j, th) in phases.iter().enumerate() {
        goal[(j, j)] = cf(th.cos(), th.sin());
    }
    let target = GateTarget::new(goal.clone(), COMPILE_TOLERANCE, true)?;
    let max_len = nm.max_len.expect("validated");
    let mut options = CompilerOptions::new(max_len);
    if let Some(r) = nm.net_radius {
        options.net_radius = r;
    }
    if let Some(m) = nm.max_nodes {
        options.max_nodes = m;
    }
    let (result, budget) = match compile(&target, &u1, &u2, &options) {
        Ok(r) => (r, None),
        Err(CompileError::BudgetExceeded { limit, best }) => {
            (*best, Some(format!("net exceeded {limit} nodes")))
        }
        Err(CompileError::Invalid(e)) => return Err(e.into()),
    };
    let recheck = if budget.is_none() {
        let rebuilt = holonomy_of_word(&result.word, &g1, &g2, fam, level, k, WordRoute::CompositeLoop)?;
        Some((&rebuilt.unitary - &result.unitary).norm())
    } else {
        None
    };

    report.line("K", k.to_string());
    report.line("max_len", max_len.to_string());
    report.line("word", result.word.to_string());
    report.line("distance", sci(result.distance));
    report.line("explored", result.explored.to_string());
    if let Some(r) = recheck {
        report.line("composite-loop recheck", sci(r));
    }
    for &(len, d) in &result.trace {
        report.line(format!("best at length {len}"), sci(d));
    }
    report.matrices.push(NamedMatrix::new("letter1", &u1));
    report.matrices.push(NamedMatrix::new("letter2", &u2));
    report.matrices.push(NamedMatrix::new("target", &goal));
    report.matrices.push(NamedMatrix::new("word", &result.unitary));
    if let Some(bound) = scenario.assertions.max_distance {
        report.checks.push(Check::at_most("distance", result.distance, bound));
    }
    if let (Some(bound), Some(r)) = (scenario.assertions.max_residual, recheck) {
        report.checks.push(Check::at_most("composite-loop recheck", r, bound));
    }
    report.compile = Some(CompileReport {
        target_phases: phases,
        max_len,
        word: result.word.to_signed(),
        word_text: result.word.to_string(),
        distance: result.distance,
        explored: result.explored,
        trace: result
            .trace
            .iter()
            .map(|&(length, distance)| TracePoint { length, distance })
            .collect(),
        recheck,
        budget_exceeded: budget.is_some(),
    });
    report.budget_error = budget;
    Ok(())
}

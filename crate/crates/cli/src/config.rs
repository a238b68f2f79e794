//! Scenario files: TOML with a model block, loop list, numeric knobs and
//! optional assertions. Everything is validated before any output exists.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use holonomy_core::adiabatic::{Integrator, Ramp};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_OUTPUT: &str = "holonomy-out";
pub const DEFAULT_K: usize = 4096;
pub const MAX_K: usize = 1 << 20;
pub const DEFAULT_H: f64 = 1e-4;
pub const MAX_WORD_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Holonomy,
    GroupLaws,
    CurvatureSpan,
    AdiabaticSweep,
    Compile,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Holonomy => "holonomy",
            Self::GroupLaws => "group_laws",
            Self::CurvatureSpan => "curvature_span",
            Self::AdiabaticSweep => "adiabatic_sweep",
            Self::Compile => "compile",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Spin,
    Cp {
        n: usize,
        #[serde(default)]
        eps_code: f64,
        #[serde(default = "one")]
        eps_single: f64,
    },
    Bosonic {
        #[serde(default = "default_truncation")]
        truncation: usize,
        #[serde(default = "one")]
        omega: f64,
    },
}

impl ModelConfig {
    pub fn name(&self) -> String {
        match self {
            Self::Spin => "spin".into(),
            Self::Cp { n, .. } => format!("cp{}", n - 1),
            Self::Bosonic { truncation, .. } => format!("bosonic{truncation}"),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_truncation() -> usize {
    holonomy_core::models::bosonic::DEFAULT_TRUNCATION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    /// Circle of `radius` in the field's xy-plane.
    SpinEquator,
    /// Seeded trigonometric loop at the origin. Without a `seed`, loops draw
    /// in order from one generator seeded by the scenario seed.
    RandomTrig,
    /// Piecewise-linear loop; the first node is the base point.
    Nodes,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub id: String,
    pub kind: LoopKind,
    pub radius: Option<f64>,
    pub amplitude: Option<f64>,
    pub seed: Option<u64>,
    pub nodes: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub level: usize,
    /// Total times for adiabatic sweeps.
    #[serde(default)]
    pub t: Vec<f64>,
    /// Integrator steps; defaults to the phase-resolving rule.
    pub m: Option<usize>,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Evaluation point for curvature; defaults to the origin.
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub ramp: Ramp,
    #[serde(default)]
    pub integrator: Integrator,
    pub max_len: Option<usize>,
    pub net_radius: Option<f64>,
    pub max_nodes: Option<usize>,
    /// Diagonal target `diag(e^{iθ_j})` for the compiler.
    pub target_phases: Option<Vec<f64>>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            level: 0,
            t: Vec::new(),
            m: None,
            h: DEFAULT_H,
            point: None,
            ramp: Ramp::default(),
            integrator: Integrator::default(),
            max_len: None,
            net_radius: None,
            max_nodes: None,
            target_phases: None,
        }
    }
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_h() -> f64 {
    DEFAULT_H
}

/// Checks whose conjunction decides the exit status.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    pub max_residual: Option<f64>,
    pub max_leakage: Option<f64>,
    pub dimension: Option<usize>,
    pub irreducible: Option<bool>,
    pub max_distance: Option<f64>,
    #[serde(default)]
    pub residual_non_increasing: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default, rename = "loop")]
    pub loops: Vec<LoopConfig>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, rename = "assert")]
    pub assertions: Assertions,
}

fn invalid(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {why}"))
}

fn positive_finite(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {x}")))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn control_dim(&self) -> usize {
        match &self.model {
            ModelConfig::Spin => 3,
            ModelConfig::Cp { n, .. } => 2 * (n - 1),
            ModelConfig::Bosonic { .. } => 4,
        }
    }

    /// Range checks that do not need a constructed model.
    fn validate(&self) -> Result<(), CliError> {
        match &self.model {
            ModelConfig::Spin => {}
            ModelConfig::Cp { n, eps_code, eps_single } => {
                if !(2..=8).contains(n) {
                    return Err(invalid("model.n", format!("must lie in 2..=8, got {n}")));
                }
                if !eps_code.is_finite() || !eps_single.is_finite() {
                    return Err(invalid("model", "energies must be finite"));
                }
            }
            ModelConfig::Bosonic { truncation, omega } => {
                if !(holonomy_core::models::bosonic::MIN_TRUNCATION..=200).contains(truncation) {
                    return Err(invalid("model.truncation", format!("must lie in 10..=200, got {truncation}")));
                }
                positive_finite("model.omega", *omega)?;
            }
        }

        let dim = self.control_dim();
        let mut ids = HashSet::new();
        for (i, lp) in self.loops.iter().enumerate() {
            let field = format!("loop[{i}]");
            if lp.id.is_empty() || !ids.insert(lp.id.as_str()) {
                return Err(invalid(&field, format!("loop id {:?} is empty or repeated", lp.id)));
            }
            let extra = |name: &str, present: bool| {
                if present {
                    Err(invalid(&field, format!("{name} does not apply to this loop kind")))
                } else {
                    Ok(())
                }
            };
            match lp.kind {
                LoopKind::SpinEquator => {
                    if dim != 3 {
                        return Err(invalid(&field, "spin_equator needs a 3-dimensional control space"));
                    }
                    positive_finite(&format!("{field}.radius"), lp.radius.unwrap_or(1.0))?;
                    extra("amplitude", lp.amplitude.is_some())?;
                    extra("seed", lp.seed.is_some())?;
                    extra("nodes", lp.nodes.is_some())?;
                }
                LoopKind::RandomTrig => {
                    let amplitude = lp.amplitude.ok_or_else(|| invalid(&field, "amplitude is required"))?;
                    positive_finite(&format!("{field}.amplitude"), amplitude)?;
                    extra("radius", lp.radius.is_some())?;
                    extra("nodes", lp.nodes.is_some())?;
                }
                LoopKind::Nodes => {
                    let nodes = lp.nodes.as_ref().ok_or_else(|| invalid(&field, "nodes are required"))?;
                    if nodes.len() < 2 {
                        return Err(invalid(&field, "needs at least two nodes"));
                    }
                    if nodes.iter().any(|n| n.len() != dim || n.iter().any(|x| !x.is_finite())) {
                        return Err(invalid(&field, format!("every node needs {dim} finite coordinates")));
                    }
                    extra("radius", lp.radius.is_some())?;
                    extra("amplitude", lp.amplitude.is_some())?;
                    extra("seed", lp.seed.is_some())?;
                }
            }
        }

        let nm = &self.numerics;
        if nm.k < 2 || nm.k > MAX_K {
            return Err(invalid("numerics.k", format!("must lie in 2..={MAX_K}, got {}", nm.k)));
        }
        if self.experiment == Experiment::GroupLaws && nm.k % 2 != 0 {
            return Err(invalid("numerics.k", "must be even for group_laws"));
        }
        if !(nm.h > 0.0 && nm.h <= 0.1) {
            return Err(invalid("numerics.h", format!("must lie in (0, 0.1], got {}", nm.h)));
        }
        for &t in &nm.t {
            positive_finite("numerics.t", t)?;
        }
        if let Some(m) = nm.m {
            if m < holonomy_core::adiabatic::MIN_STEPS {
                return Err(invalid("numerics.m", format!("must be at least {}", holonomy_core::adiabatic::MIN_STEPS)));
            }
        }
        if let Some(p) = &nm.point {
            if p.len() != dim || p.iter().any(|x| !x.is_finite()) {
                return Err(invalid("numerics.point", format!("needs {dim} finite coordinates")));
            }
        }
        if let Some(r) = nm.net_radius {
            if !(r.is_finite() && r >= 0.0) {
                return Err(invalid("numerics.net_radius", "must be finite and non-negative"));
            }
        }

        let need_loops = |n: usize| {
            if self.loops.len() < n {
                Err(invalid("loop", format!("{} needs at least {n} loop(s)", self.experiment.as_str())))
            } else {
                Ok(())
            }
        };
        match self.experiment {
            Experiment::Holonomy | Experiment::AdiabaticSweep => need_loops(1)?,
            Experiment::GroupLaws => need_loops(2)?,
            Experiment::CurvatureSpan => {}
            Experiment::Compile => {
                if self.loops.len() == 1 {
                    return Err(invalid("loop", "compile takes two loops, or none to draw a generic pair"));
                }
                match nm.max_len {
                    Some(l) if (1..=MAX_WORD_LEN).contains(&l) => {}
                    Some(l) => return Err(invalid("numerics.max_len", format!("must lie in 1..={MAX_WORD_LEN}, got {l}"))),
                    None => return Err(invalid("numerics.max_len", "required for compile")),
                }
                match &nm.target_phases {
                    Some(p) if p.iter().all(|x| x.is_finite()) => {}
                    Some(_) => return Err(invalid("numerics.target_phases", "must be finite")),
                    None => return Err(invalid("numerics.target_phases", "required for compile")),
                }
            }
        }
        if self.experiment == Experiment::AdiabaticSweep && nm.t.is_empty() {
            return Err(invalid("numerics.t", "adiabatic_sweep needs at least one total time"));
        }
        Ok(())
    }
}

//! Run configuration: a TOML file with a `[problem]` section, a `[budget]`
//! section and one optional section per experiment whose keys override that
//! experiment's defaults.
//!
//! ```toml
//! seed = 7
//! experiments = ["partition-check", "kernel-decay"]
//!
//! [problem]
//! layout = [2, 2]
//! phase = "wave"
//!
//! [kernel-decay.per-nu]
//! j = [3, 4, 5]
//! ```
//!
//! Every key is checked; unknown keys and ill-typed values are reported with
//! the line they appear on.

use crate::engine::budget::DEFAULT_BUDGET_MB;
use crate::error::{Error, Result};
use crate::estimate::*;
use crate::partition::SubspaceLayout;
use crate::phase::Phase;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PartitionCheck,
    SymbolCheck,
    KernelDecay,
    KernelLipschitz,
    KernelTail,
    Opnorm,
    AtomBound,
    SstarS,
    Orthogonality,
    Sharpness,
    AdjointTail,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::PartitionCheck,
        Experiment::SymbolCheck,
        Experiment::KernelDecay,
        Experiment::KernelLipschitz,
        Experiment::KernelTail,
        Experiment::Opnorm,
        Experiment::AtomBound,
        Experiment::SstarS,
        Experiment::Orthogonality,
        Experiment::Sharpness,
        Experiment::AdjointTail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::PartitionCheck => "partition-check",
            Experiment::SymbolCheck => "symbol-check",
            Experiment::KernelDecay => "kernel-decay",
            Experiment::KernelLipschitz => "kernel-lipschitz",
            Experiment::KernelTail => "kernel-tail",
            Experiment::Opnorm => "opnorm",
            Experiment::AtomBound => "atom-bound",
            Experiment::SstarS => "sstar-s",
            Experiment::Orthogonality => "orthogonality",
            Experiment::Sharpness => "sharpness",
            Experiment::AdjointTail => "adjoint-tail",
        }
    }

    /// Experiments built on the bi-radial reduction, which needs layout
    /// (2, 2) and a phase `x·ξ + c|ξ|` in both subspaces.
    fn needs_radial_phase(self) -> bool {
        matches!(
            self,
            Experiment::KernelDecay
                | Experiment::KernelLipschitz
                | Experiment::KernelTail
                | Experiment::AtomBound
                | Experiment::Sharpness
                | Experiment::AdjointTail
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment '{s}'; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseChoice {
    /// `x_i·ξ_i + |ξ_i|`.
    Wave,
    /// `x_i·ξ_i`.
    Identity,
    /// `x_i·ξ_i + |ξ_i| + amplitude·sin(x_{i,1})|ξ_i|`.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub layout: Vec<usize>,
    pub phase: PhaseChoice,
    pub amplitude: f64,
    pub support_radius: f64,
    pub grid_constant: f64,
    pub c_r: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let p = Problem::default();
        Self {
            layout: p.layout.dims().to_vec(),
            phase: PhaseChoice::Wave,
            amplitude: 0.1,
            support_radius: p.support_radius,
            grid_constant: p.grid_constant,
            c_r: p.c_r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Cap on the estimated memory of a single evaluation.
    pub memory_mb: u64,
    /// Experiments still pending once this much time has passed are skipped
    /// and count as failures.
    pub wall_clock_s: Option<f64>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { memory_mb: DEFAULT_BUDGET_MB, wall_clock_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDecayConfig {
    pub oracle: OracleParams,
    pub per_nu: KernelDecayParams,
    pub summed: KernelDecayParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelTailConfig {
    pub q: KernelTailParams,
    pub q_ell: KernelTailParams,
}

/// Parameters of every experiment, defaults overlaid with the config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentParams {
    pub partition_check: PartitionParams,
    pub symbol_check: SymbolCheckParams,
    pub kernel_decay: KernelDecayConfig,
    pub kernel_lipschitz: LipschitzParams,
    pub kernel_tail: KernelTailConfig,
    pub opnorm: OpnormParams,
    pub atom_bound: AtomBoundParams,
    pub sstar_s: SstarParams,
    pub orthogonality: OrthogonalityParams,
    pub sharpness: SharpnessParams,
    pub adjoint_tail: AdjointTailParams,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            partition_check: Default::default(),
            symbol_check: Default::default(),
            kernel_decay: KernelDecayConfig {
                oracle: Default::default(),
                per_nu: Default::default(),
                summed: KernelDecayParams::summed(),
            },
            kernel_lipschitz: Default::default(),
            kernel_tail: KernelTailConfig { q: Default::default(), q_ell: KernelTailParams::q_ell() },
            opnorm: Default::default(),
            atom_bound: Default::default(),
            sstar_s: Default::default(),
            orthogonality: Default::default(),
            sharpness: Default::default(),
            adjoint_tail: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// `None` when the key is absent: `all` then runs every experiment.
    pub experiments: Option<Vec<Experiment>>,
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    pub budget: BudgetConfig,
    pub params: ExperimentParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            experiments: None,
            output_dir: None,
            problem: ProblemConfig::default(),
            budget: BudgetConfig::default(),
            params: ExperimentParams::default(),
        }
    }
}

/// Finds the line of `key` inside `[section]` (top level for `None`), or of
/// the section header when the key is not written on its own line.
fn locate(text: &str, section: Option<&str>, key: Option<&str>) -> Option<usize> {
    let lines: Vec<&str> = text.lines().collect();
    let start = match section {
        None => 0,
        Some(s) => lines.iter().position(|l| l.trim() == format!("[{s}]"))?,
    };
    if let Some(k) = key {
        let body = if section.is_some() { start + 1 } else { 0 };
        for (i, l) in lines.iter().enumerate().skip(body) {
            let t = l.trim_start();
            if t.starts_with('[') {
                break;
            }
            let name = t.split('=').next().unwrap_or("").trim().trim_matches('"');
            if t.contains('=') && name == k {
                return Some(i + 1);
            }
        }
    }
    section.map(|_| start + 1)
}

/// First backticked name in a serde message, e.g. ``unknown field `foo` ``.
fn quoted_field(msg: &str) -> Option<&str> {
    let a = msg.find('`')?;
    let b = msg[a + 1..].find('`')?;
    Some(&msg[a + 1..a + 1 + b])
}

fn at(text: &str, section: Option<&str>, key: Option<&str>, msg: impl Into<String>) -> Error {
    Error::Config { line: locate(text, section, key), msg: msg.into() }
}

/// `defaults` with the keys of `over` replaced, checked against the schema.
fn overlay<T: Serialize + DeserializeOwned>(text: &str, section: &str, defaults: &T, over: &Value) -> Result<T> {
    let Value::Table(over) = over else {
        return Err(at(text, None, Some(section), format!("[{section}] must be a table")));
    };
    let mut base = Table::try_from(defaults).map_err(|e| Error::config(format!("[{section}]: {e}")))?;
    for (k, v) in over {
        base.insert(k.clone(), v.clone());
    }
    T::deserialize(Value::Table(base)).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.trim().to_string();
        let key = quoted_field(&msg).filter(|k| over.contains_key(*k));
        at(text, Some(section), key, format!("[{section}]: {msg}"))
    })
}

const TOP_KEYS: [&str; 5] = ["seed", "experiments", "output_dir", "problem", "budget"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Table = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
            msg: e.message().trim().to_string(),
        })?;
        let mut cfg = RunConfig::default();
        for (key, value) in &doc {
            match key.as_str() {
                "seed" => {
                    cfg.seed = value
                        .as_integer()
                        .filter(|s| *s >= 0)
                        .ok_or_else(|| at(text, None, Some("seed"), "seed must be a non-negative integer"))?
                        as u64;
                }
                "experiments" => {
                    let list = value
                        .as_array()
                        .ok_or_else(|| at(text, None, Some("experiments"), "experiments must be an array of names"))?;
                    let mut out = Vec::new();
                    for v in list {
                        let name = v
                            .as_str()
                            .ok_or_else(|| at(text, None, Some("experiments"), "experiment names must be strings"))?;
                        out.push(name.parse().map_err(|m: String| at(text, None, Some("experiments"), m))?);
                    }
                    cfg.experiments = Some(out);
                }
                "output_dir" => {
                    let s = value
                        .as_str()
                        .ok_or_else(|| at(text, None, Some("output_dir"), "output_dir must be a string"))?;
                    cfg.output_dir = Some(PathBuf::from(s));
                }
                "problem" => cfg.problem = overlay(text, "problem", &cfg.problem, value)?,
                "budget" => cfg.budget = overlay(text, "budget", &cfg.budget, value)?,
                other => cfg.apply_section(text, other, value)?,
            }
        }
        cfg.problem()
            .map_err(|e| at(text, Some("problem"), Some("layout"), e.to_string()))?;
        Ok(cfg)
    }

    fn apply_section(&mut self, text: &str, name: &str, value: &Value) -> Result<()> {
        let p = &mut self.params;
        let sub = |key: &str| -> Result<Option<&Value>> {
            match value {
                Value::Table(t) => {
                    for k in t.keys() {
                        let allowed: &[&str] = match name {
                            "kernel-decay" => &["oracle", "per-nu", "summed"],
                            _ => &["q", "q-ell"],
                        };
                        if !allowed.contains(&k.as_str()) {
                            return Err(at(
                                text,
                                Some(name),
                                Some(k),
                                format!("[{name}] has no subsection '{k}'; expected {}", allowed.join(", ")),
                            ));
                        }
                    }
                    Ok(t.get(key))
                }
                _ => Err(at(text, None, Some(name), format!("[{name}] must be a table"))),
            }
        };
        match name {
            "partition-check" => p.partition_check = overlay(text, name, &p.partition_check, value)?,
            "symbol-check" => p.symbol_check = overlay(text, name, &p.symbol_check, value)?,
            "kernel-decay" => {
                let kd = &mut p.kernel_decay;
                if let Some(v) = sub("oracle")? {
                    kd.oracle = overlay(text, "kernel-decay.oracle", &kd.oracle, v)?;
                }
                if let Some(v) = sub("per-nu")? {
                    kd.per_nu = overlay(text, "kernel-decay.per-nu", &kd.per_nu, v)?;
                }
                if let Some(v) = sub("summed")? {
                    kd.summed = overlay(text, "kernel-decay.summed", &kd.summed, v)?;
                }
            }
            "kernel-lipschitz" => p.kernel_lipschitz = overlay(text, name, &p.kernel_lipschitz, value)?,
            "kernel-tail" => {
                let kt = &mut p.kernel_tail;
                if let Some(v) = sub("q")? {
                    kt.q = overlay(text, "kernel-tail.q", &kt.q, v)?;
                }
                if let Some(v) = sub("q-ell")? {
                    kt.q_ell = overlay(text, "kernel-tail.q-ell", &kt.q_ell, v)?;
                }
            }
            "opnorm" => p.opnorm = overlay(text, name, &p.opnorm, value)?,
            "atom-bound" => p.atom_bound = overlay(text, name, &p.atom_bound, value)?,
            "sstar-s" => p.sstar_s = overlay(text, name, &p.sstar_s, value)?,
            "orthogonality" => p.orthogonality = overlay(text, name, &p.orthogonality, value)?,
            "sharpness" => p.sharpness = overlay(text, name, &p.sharpness, value)?,
            "adjoint-tail" => p.adjoint_tail = overlay(text, name, &p.adjoint_tail, value)?,
            other => {
                let sections: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                return Err(Error::Config {
                    line: locate(text, Some(other), None).or_else(|| locate(text, None, Some(other))),
                    msg: format!(
                        "unknown key '{other}'; expected {} or an experiment section ({})",
                        TOP_KEYS.join(", "),
                        sections.join(", ")
                    ),
                });
            }
        }
        Ok(())
    }

    /// The shared problem; fails on layouts outside the theory's hypotheses.
    pub fn problem(&self) -> Result<Problem> {
        let c = &self.problem;
        let layout = SubspaceLayout::new(c.layout.clone())?;
        let phase = match c.phase {
            PhaseChoice::Wave => Phase::wave(layout),
            PhaseChoice::Identity => Phase::identity(layout),
            PhaseChoice::Perturbed => Phase::perturbed(layout, c.amplitude),
        };
        for (name, v) in [("support_radius", c.support_radius), ("grid_constant", c.grid_constant), ("c_r", c.c_r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Problem {
            support_radius: c.support_radius,
            grid_constant: c.grid_constant,
            c_r: c.c_r,
            budget_mb: self.budget.memory_mb,
            ..Problem::default().with_phase(phase)
        })
    }

    /// Rejects experiments the configured problem cannot run, before any
    /// computation starts.
    pub fn validate(&self, experiments: &[Experiment]) -> Result<()> {
        let problem = self.problem()?;
        for &e in experiments {
            if e.needs_radial_phase() {
                problem.speeds().map_err(|err| Error::config(format!("{e}: {err}")))?;
            }
            if e == Experiment::SstarS && problem.layout.d() != 2 {
                return Err(Error::config(format!("{e}: needs two subspaces, got {}", problem.layout.d())));
            }
        }
        Ok(())
    }

    /// The experiments `all` runs.
    pub fn selected(&self) -> Vec<Experiment> {
        self.experiments.clone().unwrap_or_else(|| Experiment::ALL.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: Error) -> Option<usize> {
        match e {
            Error::Config { line, .. } => line,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.selected().len(), 11);
    }

    #[test]
    fn overrides_keep_other_defaults() {
        let c = RunConfig::parse("[kernel-tail.q-ell]\nk = 4\n\n[sharpness]\ncutoffs = [16, 32]\n").unwrap();
        let q = &c.params.kernel_tail.q_ell;
        assert_eq!(q.k, 4);
        assert_eq!(q.region, TailRegion::QEll);
        assert_eq!(q.ell, vec![2, 0]);
        assert_eq!(c.params.sharpness.cutoffs, vec![16.0, 32.0]);
        assert_eq!(c.params.sharpness.p, 4.0);
    }

    #[test]
    fn unit_subspace_is_rejected_with_its_line() {
        let e = RunConfig::parse("seed = 1\n[problem]\nphase = \"wave\"\nlayout = [1, 2]\n").unwrap_err();
        assert!(e.to_string().contains("n_i >= 2"), "{e}");
        assert_eq!(line_of(e), Some(4));
    }

    #[test]
    fn unknown_keys_are_located() {
        let e = RunConfig::parse("[opnorm]\nside = 4.0\nnodez = [8]\n").unwrap_err();
        assert!(e.to_string().contains("nodez"), "{e}");
        assert_eq!(line_of(e), Some(3));
        let e = RunConfig::parse("seed = 1\nbogus = 2\n").unwrap_err();
        assert_eq!(line_of(e), Some(2));
        let e = RunConfig::parse("experiments = [\"opnorm\", \"nope\"]\n").unwrap_err();
        assert!(e.to_string().contains("nope"));
    }

    #[test]
    fn type_errors_are_located() {
        let e = RunConfig::parse("\n[sharpness]\np = \"four\"\n").unwrap_err();
        assert!(matches!(line_of(e), Some(2) | Some(3)));
        let e = RunConfig::parse("seed = [\n").unwrap_err();
        assert_eq!(line_of(e), Some(1));
    }

    #[test]
    fn radial_experiments_need_a_radial_phase() {
        let c = RunConfig::parse("[problem]\nphase = \"perturbed\"\n").unwrap();
        assert!(c.validate(&[Experiment::Sharpness]).is_err());
        assert!(c.validate(&[Experiment::PartitionCheck, Experiment::Opnorm]).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }
}

//! TOML configuration schema shared by all subcommands.
//!
//! Every section is optional; command-line flags override file values.

use anyhow::{bail, Context, Result};
use blindsr::experiments::{
    AxisVar, CoefficientKind, PsfDictionarySpec, SeparationUnit, SubspaceKind, TrialConfig,
};
use blindsr::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub instance: InstanceSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub localize: LocalizeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub psf: PsfSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSection {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub min_sep: f64,
    /// `"of_n"` for multiples of 1/N, `"of_m"` for multiples of 1/M = 4/N.
    pub sep_unit: String,
    pub dynamic_range_db: f64,
    /// `"gaussian"`, `"ones"`, or `"psf_pca"`.
    pub subspace: String,
    /// `"real_gaussian"` or `"complex_sphere"`.
    pub coefficients: String,
    pub seed: u64,
    pub success_threshold: f64,
}

impl Default for InstanceSection {
    fn default() -> Self {
        Self {
            n: 64,
            j: 3,
            k: 4,
            min_sep: 1.0,
            sep_unit: "of_n".into(),
            dynamic_range_db: 20.0,
            subspace: "gaussian".into(),
            coefficients: "real_gaussian".into(),
            seed: 0,
            success_threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub rho: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iter: usize,
    pub over_relaxation: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::default();
        Self {
            rho: c.rho,
            tol_primal: c.tol_primal,
            tol_dual: c.tol_dual,
            max_iter: c.max_iter,
            over_relaxation: c.over_relaxation,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizeSection {
    pub grid_step: f64,
    pub threshold: f64,
}

impl Default for LocalizeSection {
    fn default() -> Self {
        Self {
            grid_step: blindsr::localize::DEFAULT_GRID_STEP,
            threshold: blindsr::localize::DEFAULT_PEAK_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axis1: String,
    pub axis1_values: Vec<usize>,
    pub axis2: String,
    pub axis2_values: Vec<usize>,
    pub trials_per_cell: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        // desk-scale defaults; the paper-scale grids sit behind --extended
        Self {
            axis1: "k".into(),
            axis1_values: vec![1, 2, 3, 4],
            axis2: "j".into(),
            axis2_values: vec![1, 2, 3, 4, 5, 6],
            trials_per_cell: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsfSection {
    pub sample_count: usize,
    pub dt: f64,
    pub var_min: f64,
    pub var_max: f64,
    pub var_step: f64,
    pub rank: usize,
}

impl Default for PsfSection {
    fn default() -> Self {
        let s = PsfDictionarySpec::default();
        Self {
            sample_count: s.sample_count,
            dt: s.dt,
            var_min: s.var_min,
            var_max: s.var_max,
            var_step: s.var_step,
            rank: s.rank,
        }
    }
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

pub fn parse_sep_unit(s: &str) -> Result<SeparationUnit> {
    match s {
        "of_n" | "n" => Ok(SeparationUnit::OfN),
        "of_m" | "m" => Ok(SeparationUnit::OfM),
        other => bail!("unknown separation unit '{other}' (expected of_n or of_m)"),
    }
}

pub fn parse_axis(s: &str) -> Result<AxisVar> {
    match s {
        "n" | "N" => Ok(AxisVar::N),
        "j" | "J" => Ok(AxisVar::J),
        "k" | "K" => Ok(AxisVar::K),
        other => bail!("unknown sweep axis '{other}' (expected n, j, or k)"),
    }
}

impl PsfSection {
    pub fn to_spec(&self) -> PsfDictionarySpec {
        PsfDictionarySpec {
            sample_count: self.sample_count,
            dt: self.dt,
            var_min: self.var_min,
            var_max: self.var_max,
            var_step: self.var_step,
            rank: self.rank,
        }
    }
}

impl SolverSection {
    pub fn to_config(&self) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            tol_primal: self.tol_primal,
            tol_dual: self.tol_dual,
            max_iter: self.max_iter,
            over_relaxation: self.over_relaxation,
        }
    }
}

impl InstanceSection {
    pub fn to_trial_config(&self, solver: SolverConfig, psf: &PsfSection) -> Result<TrialConfig> {
        let subspace = match self.subspace.as_str() {
            "gaussian" => SubspaceKind::Gaussian,
            "ones" => SubspaceKind::Ones,
            "psf_pca" => SubspaceKind::PsfPca(psf.to_spec()),
            other => bail!("unknown subspace kind '{other}'"),
        };
        let coefficients = match self.coefficients.as_str() {
            "real_gaussian" => CoefficientKind::RealGaussian,
            "complex_sphere" => CoefficientKind::ComplexSphere,
            other => bail!("unknown coefficient kind '{other}'"),
        };
        Ok(TrialConfig {
            n: self.n,
            j: self.j,
            k: self.k,
            min_sep: self.min_sep,
            sep_unit: parse_sep_unit(&self.sep_unit)?,
            dynamic_range_db: self.dynamic_range_db,
            subspace,
            coefficients,
            seed: self.seed,
            solver,
            success_threshold: self.success_threshold,
        })
    }
}

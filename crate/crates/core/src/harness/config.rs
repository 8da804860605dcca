use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisKind};
use crate::dgp::{alternating_signs, build_design, structural_coeffs, DependenceModel, ErrorModel, JointDesign};
use crate::error::{Error, Result};
use crate::selection::PenaltyConfig;
use crate::theory::{Case, WeightSequences};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    PP,
    PE,
}

/// Shape of the operator: the constructed diagonal design or `Z = W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    #[default]
    Diagonal,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignPattern {
    #[default]
    Positive,
    Alternating,
}

/// The `[design]` block of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub case: CaseKind,
    pub p: f64,
    pub a: f64,
    /// Bandlimit `J` of both the operator and the structural function.
    #[serde(rename = "J")]
    pub bandlimit: usize,
    pub r: f64,
    pub sigma_eps: f64,
    pub c_endo: f64,
    #[serde(default)]
    pub dependence: DependenceModel,
    #[serde(default = "default_basis")]
    pub basis: BasisKind,
    #[serde(default)]
    pub operator: OperatorKind,
    #[serde(default)]
    pub signs: SignPattern,
}

fn default_basis() -> BasisKind {
    BasisKind::ConstantPlusCosine
}

/// Everything needed to draw samples and score estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationDesign {
    pub case: Case,
    pub design: JointDesign,
    pub phi: Vec<f64>,
    pub error: ErrorModel,
    pub dependence: DependenceModel,
    pub weights: WeightSequences,
}

impl SimulationDesign {
    pub fn basis(&self) -> &BasisFamily {
        self.design.basis()
    }
}

impl DesignConfig {
    pub fn case(&self) -> Case {
        match self.case {
            CaseKind::PP => Case::PP { p: self.p, a: self.a },
            CaseKind::PE => Case::PE { p: self.p, a: self.a },
        }
    }

    pub fn build(&self) -> Result<SimulationDesign> {
        let case = self.case();
        case.validate().map_err(|e| Error::Config(e.to_string()))?;
        let error = ErrorModel {
            sigma_eps: self.sigma_eps,
            c_endo: self.c_endo,
        };
        error.validate()?;
        self.dependence.validate()?;
        let basis = BasisFamily::new(self.basis);
        let (design, weights) = match self.operator {
            OperatorKind::Diagonal => {
                let built = build_design(case, basis, self.bandlimit)?;
                let weights = WeightSequences::for_design(case, self.r, &built)?;
                (built.design, weights)
            }
            OperatorKind::Identity => {
                if self.bandlimit < 1 {
                    return Err(Error::Config("J must be at least 1".into()));
                }
                let design = JointDesign::identity(basis, self.bandlimit);
                (design, WeightSequences::new(case, self.r, 1.0, 1.0)?)
            }
        };
        let signs = match self.signs {
            SignPattern::Positive => Vec::new(),
            SignPattern::Alternating => alternating_signs(self.bandlimit),
        };
        let phi = structural_coeffs(self.p, self.r, self.bandlimit, &signs)?;
        Ok(SimulationDesign {
            case,
            design,
            phi,
            error,
            dependence: self.dependence,
            weights,
        })
    }
}

/// A Monte Carlo experiment, read from a TOML file.
///
/// ```toml
/// seed = 42
/// replications = 200
/// n_grid = [1000, 2000, 4000, 8000]
/// outputs = "out"
///
/// [design]
/// case = "PP"
/// p = 2.0
/// a = 1.0
/// J = 8
/// r = 1.0
/// sigma_eps = 0.5
/// c_endo = 0.3
/// dependence = { kind = "regeneration", rho = 0.5 }
///
/// [penalty]
/// kappa = 2016.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub design: DesignConfig,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Directory receiving `records.csv` and `summary.csv`.
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    /// Run replications on the rayon pool.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; a relative `outputs` is resolved against the
    /// file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let (Some(out), Some(dir)) = (&config.outputs, path.parent()) {
            if out.is_relative() {
                config.outputs = Some(dir.join(out));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must not be empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::Config("sample sizes must be at least 2".into()));
        }
        if self.n_grid.last().is_some_and(|&n| n as u64 > u64::from(u32::MAX)) {
            return Err(Error::Config("sample sizes must fit in 32 bits".into()));
        }
        if self.replications as u64 > u64::from(u32::MAX) {
            return Err(Error::Config("replications must fit in 32 bits".into()));
        }
        self.penalty.validate()?;
        self.design.build().map(|_| ())
    }
}

//! Run configuration, read from TOML. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub diffusion: DiffusionSpec,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
    pub scheme: SchemeSpec,
    /// Norm exponents; TOML accepts `inf` as a float literal.
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default)]
    pub suites: SuiteToggles,
    /// Artifact directory. Not part of the echoed config, so reports from
    /// different output locations stay comparable.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Write a VSSF snapshot every `k` steps (and at the horizon).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

fn default_p() -> Vec<f64> {
    vec![2.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub counts: Vec<usize>,
    pub half_extents: Vec<f64>,
    #[serde(default = "default_boundary")]
    pub boundary: BoundarySpec,
}

fn default_boundary() -> BoundarySpec {
    BoundarySpec::Periodic
}

/// Diffusion matrix `Q`. Declared bounds default to the exact eigenvalue range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionSpec {
    Identity,
    Constant {
        matrix: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta2: Option<f64>,
    },
    /// `q_aa(x) = base (1 + amplitude sin(x_a))`, zero off the diagonal.
    SmoothDiagonal {
        base: f64,
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta2: Option<f64>,
    },
}

impl Default for DiffusionSpec {
    fn default() -> Self {
        Self::Identity
    }
}

/// Replace `w` at one grid point of a rotation preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDefect {
    pub point: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero {
        components: usize,
    },
    /// Constant diagonal matrix.
    Diagonal {
        values: Vec<f64>,
    },
    /// `[[w, -v], [v, w]]`, the real form of the scalar potential `w + iv`.
    Rotation {
        v: f64,
        w: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        defect: Option<PointDefect>,
    },
    /// `v(x) = v_amp sin(x_0)`, `w(x) = w0 + w1 cos(x_0 / 2)`.
    SmoothRotation {
        v_amp: f64,
        w0: f64,
        w1: f64,
    },
    /// `(1 + |x|^2)^{alpha/2} I` plus a constant antisymmetric coupling between
    /// neighbouring components.
    PolynomialGrowth {
        alpha: f64,
        coupling: f64,
        #[serde(default = "two")]
        components: usize,
    },
    /// Constant row-major `m x m` matrix.
    Custom {
        components: usize,
        matrix: Vec<f64>,
    },
    /// Constant `B B^T + (A - A^T)` drawn from the run seed.
    RandomAccretive {
        components: usize,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `weights[j] exp(-|x - center|^2 / (2 sigma^2))`.
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        weights: Vec<f64>,
    },
    /// Compactly supported `exp(1 - 1/(1 - r^2))` bump times `weights[j]`.
    Bump {
        center: Vec<f64>,
        radius: f64,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantSpec {
    Lie,
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendSpec {
    Spectral,
    BackwardEuler,
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub variant: VariantSpec,
    pub backend: BackendSpec,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteToggles {
    #[serde(default)]
    pub contraction: bool,
    #[serde(default)]
    pub kato: bool,
    #[serde(default)]
    pub gradient_lemma: bool,
    #[serde(default)]
    pub semigroup: bool,
    #[serde(default)]
    pub continuity: bool,
    #[serde(default)]
    pub complexify: bool,
    #[serde(default)]
    pub sector: bool,
}

impl SuiteToggles {
    pub fn all() -> Self {
        Self {
            contraction: true,
            kato: true,
            gradient_lemma: true,
            semigroup: true,
            continuity: true,
            complexify: true,
            sector: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that do not need the grid to be built.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        if self.p.is_empty() {
            return bad("p", "at least one exponent required".into());
        }
        if let Some(p) = self.p.iter().find(|p| !(**p >= 1.0)) {
            return bad("p", format!("exponent {p} outside [1, inf]"));
        }
        let d = self.grid.counts.len();
        if self.grid.half_extents.len() != d {
            return bad(
                "grid.half_extents",
                format!("{} entries for {d} axes", self.grid.half_extents.len()),
            );
        }
        let s = &self.scheme;
        if !(s.t.is_finite() && s.t > 0.0) {
            return bad("scheme.t", format!("{} must be positive", s.t));
        }
        if s.n.is_none() && s.n_list.is_none() {
            return bad("scheme", "one of n or n_list is required".into());
        }
        if s.n == Some(0) {
            return bad("scheme.n", "must be at least 1".into());
        }
        if let Some(list) = &s.n_list {
            if list.len() < 4 || list.windows(2).any(|w| w[1] <= w[0]) || list[0] == 0 {
                return bad("scheme.n_list", "needs at least 4 strictly increasing positive entries".into());
            }
        }
        if let Some(tol) = s.solver_tol {
            if !(tol > 0.0) {
                return bad("scheme.solver_tol", format!("{tol} must be positive"));
            }
        }
        if self.snapshot_every == Some(0) {
            return bad("snapshot_every", "must be at least 1".into());
        }
        let m = self.potential.components();
        let (center, weights) = match &self.initial {
            InitialSpec::Gaussian { center, sigma, weights } => {
                if !(*sigma > 0.0) {
                    return bad("initial.sigma", format!("{sigma} must be positive"));
                }
                (center, weights)
            }
            InitialSpec::Bump { center, radius, weights } => {
                if !(*radius > 0.0) {
                    return bad("initial.radius", format!("{radius} must be positive"));
                }
                (center, weights)
            }
        };
        if center.len() != d {
            return bad("initial.center", format!("{} coordinates for {d} axes", center.len()));
        }
        if weights.len() != m {
            return bad("initial.weights", format!("{} weights for {m} components", weights.len()));
        }
        match &self.potential {
            PotentialSpec::Custom { components, matrix } if matrix.len() != components * components => bad(
                "potential.matrix",
                format!("{} entries for {components} components", matrix.len()),
            ),
            PotentialSpec::PolynomialGrowth { alpha, .. } if !(*alpha >= 0.0) => {
                bad("potential.alpha", format!("{alpha} must be nonnegative"))
            }
            _ => Ok(()),
        }
    }

    /// Steps for a single evolution: `n`, else the last entry of `n_list`.
    pub fn steps(&self) -> usize {
        self.scheme
            .n
            .or_else(|| self.scheme.n_list.as_ref().and_then(|l| l.last().copied()))
            .unwrap_or(1)
    }
}

impl PotentialSpec {
    pub fn components(&self) -> usize {
        match self {
            Self::Zero { components }
            | Self::PolynomialGrowth { components, .. }
            | Self::Custom { components, .. }
            | Self::RandomAccretive { components, .. } => *components,
            Self::Diagonal { values } => values.len(),
            Self::Rotation { .. } | Self::SmoothRotation { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero { .. } => "zero",
            Self::Diagonal { .. } => "diagonal",
            Self::Rotation { .. } => "rotation",
            Self::SmoothRotation { .. } => "smooth_rotation",
            Self::PolynomialGrowth { .. } => "polynomial_growth",
            Self::Custom { .. } => "custom",
            Self::RandomAccretive { .. } => "random_accretive",
        }
    }
}

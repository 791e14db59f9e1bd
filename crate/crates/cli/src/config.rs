//! Run configuration read from a TOML file.
//!
//! ```toml
//! problem = "test_problem"
//! checkpoints = [500, 1000]
//! format = "csv"
//!
//! [params]
//! iterations = 1000
//! samples = 200
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sip_core::constants::AlgoParams;
use sip_core::problem::{catalog, BoxSet, SipProblem};

use crate::CliError;

/// Nodes per axis used to validate the standing assumptions.
const VALIDATION_GRID: [usize; 3] = [1001, 101, 21];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A problem from the catalog by name, or an inline definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Named(String),
    Inline { quadratic_affine: InlineQuadratic },
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec::Named("test_problem".into())
    }
}

/// `min ‖x − center‖²` s.t. `⟨a, x⟩ + ⟨b, ξ⟩ + offset ≤ 0` on boxes.
///
/// Bounds are kept as raw vectors so that an inverted box is reported as a
/// validation error rather than a parse error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineQuadratic {
    pub x_lower: Vec<f64>,
    pub x_upper: Vec<f64>,
    pub xi_lower: Vec<f64>,
    pub xi_upper: Vec<f64>,
    pub center: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub offset: f64,
    #[serde(default)]
    pub slater_point: Option<Vec<f64>>,
    #[serde(default)]
    pub dual_lb: f64,
}

/// Overrides for exercising the property checks. Not for production runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugOverrides {
    pub kappa_bar: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub params: AlgoParams,
    /// Iteration counts at which the running average is reported. Defaults
    /// to the final iteration only.
    pub checkpoints: Vec<usize>,
    pub violation_grid: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Record wall-clock time per checkpoint. Breaks byte-for-byte
    /// reproducibility of reports.
    pub timing: bool,
    pub debug: DebugOverrides,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checkpoints to report, after checking they are strictly increasing and
    /// within `1..=iterations`.
    pub fn checkpoints(&self) -> Result<Vec<usize>, CliError> {
        let k = self.params.iterations;
        if self.checkpoints.is_empty() {
            return Ok(vec![k]);
        }
        for (i, &cp) in self.checkpoints.iter().enumerate() {
            if cp == 0 || cp > k {
                return Err(CliError::Validation(format!(
                    "checkpoints[{i}] = {cp} is outside 1..={k}"
                )));
            }
            if i > 0 && cp <= self.checkpoints[i - 1] {
                return Err(CliError::Validation(format!(
                    "checkpoints[{i}] = {cp} is not greater than checkpoints[{}]",
                    i - 1
                )));
            }
        }
        Ok(self.checkpoints.clone())
    }

    /// Builds the problem and checks the standing assumptions.
    pub fn build_problem(&self) -> Result<SipProblem, CliError> {
        let problem = match &self.problem {
            ProblemSpec::Named(name) => match name.as_str() {
                "test_problem" => catalog::test_problem(),
                other => {
                    return Err(CliError::Config(format!(
                        "problem: unknown name {other:?} (expected \"test_problem\" or an inline quadratic_affine table)"
                    )))
                }
            },
            ProblemSpec::Inline { quadratic_affine: q } => q.build()?,
        };
        let grid = VALIDATION_GRID[problem.dim_xi().min(3) - 1];
        problem.validated(grid).map_err(|e| CliError::Validation(e.to_string()))
    }
}

impl InlineQuadratic {
    fn build(&self) -> Result<SipProblem, CliError> {
        let field = |name: &'static str| move |e: sip_core::SipError| CliError::Validation(format!("{name}: {e}"));
        let x_box = BoxSet::new(self.x_lower.clone(), self.x_upper.clone()).map_err(field("x_box"))?;
        let xi_box = BoxSet::new(self.xi_lower.clone(), self.xi_upper.clone()).map_err(field("xi_box"))?;
        catalog::QuadraticAffine {
            x_box,
            xi_box,
            center: self.center.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            offset: self.offset,
            slater_point: self.slater_point.clone(),
            dual_lb: self.dual_lb,
        }
        .build()
        .map_err(field("quadratic_affine"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.problem, ProblemSpec::Named("test_problem".into()));
        assert_eq!(c.params, AlgoParams::default());
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.checkpoints().unwrap(), vec![60_000]);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = RunConfig::from_toml("iteratons = 5").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        let err = RunConfig::from_toml("[params]\nsamplez = 5").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn unsorted_checkpoints_rejected() {
        let c = RunConfig::from_toml("checkpoints = [10, 5]\n[params]\niterations = 20").unwrap();
        let msg = c.checkpoints().unwrap_err().to_string();
        assert!(msg.contains("checkpoints[1]"), "{msg}");
        let c = RunConfig::from_toml("checkpoints = [30]\n[params]\niterations = 20").unwrap();
        assert!(c.checkpoints().is_err());
    }

    #[test]
    fn inverted_box_names_field() {
        let c = RunConfig::from_toml(
            r#"
            [problem.quadratic_affine]
            x_lower = [1.0, 0.0]
            x_upper = [0.0, 1.0]
            xi_lower = [0.0]
            xi_upper = [1.0]
            center = [0.0, 0.0]
            a = [0.0, 0.0]
            b = [0.0]
            offset = -1.0
            "#,
        )
        .unwrap();
        let err = c.build_problem().unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
        let msg = err.to_string();
        assert!(msg.contains("x_box") && msg.contains("lower[0]"), "{msg}");
    }
}

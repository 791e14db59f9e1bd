//! The `solve`, `check` and `constants` commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use sip_core::checks::{self, CheckOutcome, SuiteSize};
use sip_core::constants::{derive, AlgoParams, DerivedConstants};
use sip_core::problem::SipProblem;
use sip_core::report;
use sip_core::solver::{run_with_constants, RunOptions, SolveError, SolveReport};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Seed for the property suites, independent of the solver seed.
const CHECK_SEED: u64 = 20_240_611;

pub struct Prepared {
    pub problem: SipProblem,
    pub params: AlgoParams,
    pub constants: DerivedConstants,
}

/// Builds the problem and derives constants, applying debug overrides.
pub fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let problem = config.build_problem()?;
    let params = config.params.clone();
    let mut constants = derive(&problem, &params).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(k) = config.debug.kappa_bar {
        warn!("debug override: kappa_bar = {k} (derived {})", constants.kappa_bar);
        constants.kappa_bar = k;
    }
    Ok(Prepared { problem, params, constants })
}

fn write_report(report: &SolveReport, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Csv => report::write_csv(report, &mut *out)?,
        Format::Json => {
            let text = report::to_json(report).map_err(std::io::Error::other)?;
            writeln!(out, "{text}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn emit(report: &SolveReport, format: Format, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_report(report, format, &mut w)?;
            info!("wrote {}", p.display());
            Ok(())
        }
        None => write_report(report, format, stdout),
    }
}

/// Runs the solver and writes the report to `out` (or the configured path,
/// or `stdout`). On a numerical abort the partial report is still written.
pub fn solve(
    config: &RunConfig,
    seed: Option<u64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<SolveReport, CliError> {
    let mut config = config.clone();
    if let Some(s) = seed {
        config.params.seed = s;
    }
    let checkpoints = config.checkpoints()?;
    let prep = prepare(&config)?;
    for v in prep.constants.invariant_violations() {
        warn!("constant invariant violated: {v}");
    }
    let opts = RunOptions { violation_grid: config.violation_grid, timing: config.timing };
    let path = out.or(config.output_path.as_deref());
    match run_with_constants(&prep.problem, &prep.params, &prep.constants, &checkpoints, &opts) {
        Ok(report) => {
            emit(&report, config.format, path, stdout)?;
            Ok(report)
        }
        Err(SolveError::Setup(e)) => Err(CliError::Validation(e.to_string())),
        Err(SolveError::Aborted { error, partial }) => {
            emit(&partial, config.format, path, stdout)?;
            Err(CliError::Numerical(error.to_string()))
        }
    }
}

/// Runs the property suites, printing one line per property. Fails with
/// [`CliError::PropertyFailure`] if any property fails; skipped ones count
/// as passing.
pub fn check(config: &RunConfig, quick: bool, stdout: &mut dyn Write) -> Result<Vec<CheckOutcome>, CliError> {
    let prep = prepare(config)?;
    let size = if quick { SuiteSize::quick() } else { SuiteSize::full() };
    let outcomes = checks::run_all(&prep.problem, &prep.params, &prep.constants, &size, CHECK_SEED)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    for o in &outcomes {
        writeln!(stdout, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let skipped = outcomes.iter().filter(|o| o.skipped).count();
    writeln!(stdout, "{} passed, {failed} failed, {skipped} skipped", outcomes.len() - failed - skipped)?;
    if failed > 0 {
        return Err(CliError::PropertyFailure(failed));
    }
    Ok(outcomes)
}

/// Prints the derived constants as JSON.
pub fn constants(config: &RunConfig, stdout: &mut dyn Write) -> Result<DerivedConstants, CliError> {
    let prep = prepare(config)?;
    let text = serde_json::to_string_pretty(&prep.constants).map_err(std::io::Error::other)?;
    writeln!(stdout, "{text}")?;
    Ok(prep.constants)
}

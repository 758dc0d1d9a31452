use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use netrace::mc::{run_scenario, McSummary, Scenario};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{rows, write_rows};

/// Path of the marker written next to `out` when some scenario failed.
pub fn partial_marker(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".partial");
    PathBuf::from(name)
}

/// Runs every scenario of `config` and writes the results table.
///
/// Scenarios that fail are skipped; the rows of the others are still
/// written, a `<out>.partial` marker lists the failures, and the first
/// failure is returned.
pub fn run(config: &RunConfig) -> Result<Vec<(Scenario, McSummary)>, CliError> {
    run_with(config, run_scenario)
}

/// [`run`] with a caller-supplied scenario runner.
pub fn run_with<F>(config: &RunConfig, runner: F) -> Result<Vec<(Scenario, McSummary)>, CliError>
where
    F: Fn(&Scenario) -> netrace::Result<McSummary>,
{
    config.validate()?;
    let scenarios = config.effective_scenarios();
    let total = scenarios.len();
    let mut results = Vec::with_capacity(total);
    let mut failures = Vec::new();
    for (i, sc) in scenarios.into_iter().enumerate() {
        let started = Instant::now();
        match runner(&sc) {
            Ok(summary) => {
                if config.verbosity >= 1 {
                    let timing = if config.verbosity >= 2 {
                        format!(" in {:.2?}", started.elapsed())
                    } else {
                        String::new()
                    };
                    eprintln!("[{}/{total}] {}{timing}", i + 1, sc.id);
                }
                results.push((sc, summary));
            }
            Err(source) => {
                let err = CliError::Scenario { id: sc.id.clone(), source };
                if config.verbosity >= 1 {
                    eprintln!("[{}/{total}] {err}", i + 1);
                }
                failures.push(err);
            }
        }
    }

    let table = rows(&results);
    match &config.output {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::io("creating", path, e))?;
            let mut buffered = io::BufWriter::new(file);
            write_rows(&table, config.format, &mut buffered)?;
            buffered.flush().map_err(|e| CliError::io("writing", path, e))?;
            let marker = partial_marker(path);
            if failures.is_empty() {
                if marker.exists() {
                    fs::remove_file(&marker).map_err(|e| CliError::io("removing", &marker, e))?;
                }
            } else {
                let text: String = failures.iter().map(|f| format!("{f}\n")).collect();
                fs::write(&marker, text).map_err(|e| CliError::io("writing", &marker, e))?;
            }
        }
        None => write_rows(&table, config.format, io::stdout().lock())?,
    }
    match failures.into_iter().next() {
        Some(first) => Err(first),
        None => Ok(results),
    }
}

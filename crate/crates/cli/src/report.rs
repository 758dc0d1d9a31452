use std::collections::BTreeSet;
use std::io::Write;

use netrace::mc::{ArmSummary, McSummary, Scenario};
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::CliError;

/// One line of the results table. Empty cells mean "not applicable".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario_id: String,
    pub design: String,
    pub m: usize,
    pub eta: f64,
    pub k_or_setting: String,
    #[serde(rename = "R")]
    pub replicates: u64,
    pub seed: u64,
    pub mean_n: f64,
    pub cv_mc: Option<f64>,
    pub cv_analytic: Option<f64>,
    pub se_mc: Option<f64>,
    pub se_analytic: Option<f64>,
    pub re_mc: Option<f64>,
    pub re_analytic: Option<f64>,
}

fn arm_row(sc: &Scenario, summary: &McSummary, arm: &ArmSummary) -> Row {
    let change = summary.temporal.is_change();
    let rel = |sd: Option<f64>, target: f64| sd.filter(|_| target != 0.0).map(|s| s / target.abs());
    Row {
        scenario_id: sc.id.clone(),
        design: arm.design.clone(),
        m: sc.initial.m(),
        eta: sc.initial.eta(),
        k_or_setting: sc.population.k_or_setting(),
        replicates: summary.replicates,
        seed: summary.seed,
        mean_n: arm.mean_n,
        cv_mc: if change { None } else { rel(arm.sd_mc, summary.target) },
        cv_analytic: if change { None } else { rel(arm.sd_analytic, summary.target_reference) },
        se_mc: if change { arm.sd_mc } else { None },
        se_analytic: if change { arm.sd_analytic } else { None },
        re_mc: None,
        re_analytic: None,
    }
}

/// Design rows in input order, each followed by its baseline unless an
/// identical baseline (same design, m, η, population, R and seed) was
/// already listed.
pub fn rows(results: &[(Scenario, McSummary)]) -> Vec<Row> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let key = |r: &Row| (r.design.clone(), r.m, r.eta.to_bits(), r.k_or_setting.clone(), r.replicates, r.seed);
    for (sc, summary) in results {
        let mut row = arm_row(sc, summary, &summary.design);
        row.re_mc = summary.re_mc;
        row.re_analytic = summary.re_analytic;
        if row.re_mc.is_none() && row.re_analytic.is_none() {
            // a design that is its own baseline (panel) is listed once
            if !seen.insert(key(&row)) {
                continue;
            }
        }
        out.push(row);
        if let Some(base) = &summary.baseline {
            let row = arm_row(sc, summary, base);
            if seen.insert(key(&row)) {
                out.push(row);
            }
        }
    }
    out
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, mut sink: W) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(sink);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush().map_err(|e| CliError::io("writing", "results", e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, rows).map_err(|e| CliError::io("writing", "results", e.into()))?;
            sink.write_all(b"\n").map_err(|e| CliError::io("writing", "results", e))?;
        }
    }
    Ok(())
}

/// Parses a results table written by [`write_rows`] in CSV format.
pub fn read_csv(text: &str) -> Result<Vec<Row>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader.deserialize().map(|r| r.map_err(CliError::from)).collect()
}

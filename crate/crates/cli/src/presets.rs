use crate::config::{parse_config, RunConfig};
use crate::error::CliError;

const TABLE1: &str = include_str!("../presets/table1.json");
const TABLE2: &str = include_str!("../presets/table2.json");
const TABLE4: &str = include_str!("../presets/table4.json");

/// Numbers of the bundled tables.
pub const TABLES: [u8; 3] = [1, 2, 4];

pub fn preset_text(table: u8) -> Result<&'static str, CliError> {
    match table {
        1 => Ok(TABLE1),
        2 => Ok(TABLE2),
        4 => Ok(TABLE4),
        other => Err(CliError::Usage(format!("no preset for table {other}; expected one of {TABLES:?}"))),
    }
}

/// Block name of a preset scenario id (`srs-m1000/L1/pacs` is in `srs-m1000`).
pub fn block_of(id: &str) -> &str {
    id.split('/').next().unwrap_or(id)
}

pub fn blocks(config: &RunConfig) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for sc in &config.scenarios {
        let b = block_of(&sc.id);
        if !names.iter().any(|n| n == b) {
            names.push(b.to_string());
        }
    }
    names
}

/// The bundled configuration of `table`, optionally restricted to one block.
pub fn preset(table: u8, block: Option<&str>) -> Result<RunConfig, CliError> {
    let mut config = parse_config(preset_text(table)?)?;
    if let Some(block) = block {
        let available = blocks(&config);
        config.scenarios.retain(|sc| block_of(&sc.id) == block);
        if config.scenarios.is_empty() {
            return Err(CliError::Usage(format!(
                "table {table} has no block `{block}`; expected one of {available:?}"
            )));
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use netrace::mc::Temporal;

    #[test]
    fn preset_sizes() {
        assert_eq!(preset(1, None).unwrap().scenarios.len(), 24);
        assert_eq!(preset(2, None).unwrap().scenarios.len(), 18);
        let t4 = preset(4, None).unwrap();
        assert_eq!(t4.scenarios.len(), 81);
        assert_eq!(blocks(&t4), ["srs-m1000", "srs-m5000", "poisson-m1000"]);
    }

    #[test]
    fn table_four_block_has_nine_settings_per_design() {
        let block = preset(4, Some("srs-m1000")).unwrap();
        for t in [Temporal::Panel, Temporal::PAcs, Temporal::IAcs] {
            assert_eq!(block.scenarios.iter().filter(|s| s.temporal == t).count(), 9);
        }
        assert!(preset(4, Some("nope")).is_err());
        assert!(preset(3, None).is_err());
    }
}

//! TOML configuration files with `key=value` overrides.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use c2lse::harness::ExperimentConfig;
use toml::{Table, Value};

/// Parse one override value. Anything that is not a TOML literal is taken as
/// a bare string, so `method=random` and `method="random"` agree.
fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key was just written"),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Set `a.b.c = value` in `table`, creating intermediate tables.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` has an empty component");
    }
    let (last, parents) = path.split_last().expect("split yields at least one part");
    let mut node = table;
    for (i, part) in parents.iter().enumerate() {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{}` is not a table", path[..=i].join(".")))?;
    }
    node.insert(last.to_string(), parse_value(raw));
    Ok(())
}

/// Parse TOML text plus overrides into a validated config.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table: Table = text.parse().context("config is not valid TOML")?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    // Round-trip through text so serde errors carry the offending key.
    let merged = toml::to_string(&table)?;
    let config: ExperimentConfig = toml::from_str(&merged).map_err(|e| anyhow!("invalid config (after overrides): {e}"))?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut config = parse_config_str(&text, overrides).with_context(|| format!("config {}", path.display()))?;
    // Dataset paths are relative to the config file, not the working directory.
    if let Some(src) = config.data.as_mut() {
        if src.path.is_relative() {
            if let Some(dir) = path.parent() {
                src.path = dir.join(&src.path);
            }
        }
    }
    Ok(config)
}

/// The config with every default spelled out, as written to `resolved_config.toml`.
pub fn resolved_toml(config: &ExperimentConfig, dim: usize) -> Result<String> {
    Ok(toml::to_string(&config.resolved(dim))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use c2lse::harness::Method;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str("problem = \"mc2d\"\nmethod = \"c2lse\"\n", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::for_problem("mc2d", Method::C2lse));
        let resolved = resolved_toml(&c, 2).unwrap();
        for key in [
            "epsilon = 0.1",
            "beta = 3.0",
            "n_init = 5",
            "n_raw_samples = 1024",
            "noise_variance = 0.0001",
        ] {
            assert!(resolved.contains(key), "{key} missing from\n{resolved}");
        }
    }

    #[test]
    fn overrides_win() {
        let text = "problem = \"mc2d\"\nepsilon = 0.01\n";
        let c = parse_config_str(text, &["epsilon=0.1".into()]).unwrap();
        assert_eq!(c.epsilon, 0.1);
        let c = parse_config_str(
            text,
            &["method=random".into(), "search.n_restarts = 3".into(), "seeds=[4, 5]".into()],
        )
        .unwrap();
        assert_eq!(c.method, Method::Random);
        assert_eq!(c.search.n_restarts, 3);
        assert_eq!(c.seeds, vec![4, 5]);
    }

    #[test]
    fn negative_epsilon_rejected() {
        let err = parse_config_str("problem = \"mc2d\"\nepsilon = -1.0\n", &[]).unwrap_err();
        assert!(format!("{err:#}").contains("epsilon > 0"), "{err:#}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("problem = \"mc2d\"\nepsilonn = 0.1\n", &[]).unwrap_err();
        assert!(format!("{err:#}").contains("epsilonn"), "{err:#}");
        let err = parse_config_str("problem = \"mc2d\"\n", &["search.restarts=3".into()]).unwrap_err();
        assert!(format!("{err:#}").contains("restarts"), "{err:#}");
    }

    #[test]
    fn type_mismatch_names_path() {
        let err = parse_config_str("problem = \"mc2d\"\n[search]\nn_restarts = \"many\"\n", &[]).unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("n_restarts") || msg.contains("search"), "{msg}");
        assert!(msg.contains("expected usize"), "{msg}");
    }

    #[test]
    fn override_through_scalar_fails() {
        let mut t: Table = "epsilon = 0.1".parse().unwrap();
        assert!(apply_override(&mut t, "epsilon.x=1").is_err());
        assert!(apply_override(&mut t, "noequals").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = parse_config_str("problem = \"sin2d\"\nmethod = \"straddle\"\ncandidate_grid = [4, 4]\n", &[]).unwrap();
        let text = resolved_toml(&c, 2).unwrap();
        let again = parse_config_str(&text, &[]).unwrap();
        assert_eq!(again, c.resolved(2));
        assert_eq!(resolved_toml(&again, 2).unwrap(), text);
    }
}

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::Output;
use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// What a run emits: the tool version, the resolved configuration and the
/// result tagged by command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: RunConfig,
    #[serde(flatten)]
    pub output: Output,
}

impl Report {
    pub fn new(config: RunConfig, output: Output) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            output,
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, self)?;
                writeln!(w).map_err(|e| CliError::io("<output>".as_ref(), e))?;
            }
            Format::Csv => self.write_csv(w)?,
        }
        Ok(())
    }

    /// One `#` line holding everything but the result as JSON, then either a
    /// table of sweep rows or `quantity,value` pairs.
    fn write_csv<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        let mut head = serde_json::to_value(self)?;
        let result = head.as_object_mut().and_then(|m| m.remove("result")).unwrap_or(Value::Null);
        writeln!(w, "# {}", serde_json::to_string(&head)?).map_err(|e| CliError::io("<output>".as_ref(), e))?;
        let mut out = csv::Writer::from_writer(w);
        match &self.output {
            Output::Sweep(sweep) => {
                let rows: Vec<Vec<(String, String)>> = sweep
                    .rows
                    .iter()
                    .map(|r| Ok(flatten(&serde_json::to_value(r)?)))
                    .collect::<Result<_, CliError>>()?;
                if let Some(first) = rows.first() {
                    out.write_record(first.iter().map(|(k, _)| k))?;
                }
                for row in &rows {
                    out.write_record(row.iter().map(|(_, v)| v))?;
                }
            }
            _ => {
                out.write_record(["quantity", "value"])?;
                for (k, v) in flatten(&result) {
                    out.write_record([k, v])?;
                }
            }
        }
        out.flush().map_err(|e| CliError::io("<output>".as_ref(), e))?;
        Ok(())
    }
}

/// Leaf values keyed by their path, `_`-joined.
fn flatten(v: &Value) -> Vec<(String, String)> {
    fn go(v: &Value, key: String, out: &mut Vec<(String, String)>) {
        let join = |k: &str| if key.is_empty() { k.to_string() } else { format!("{key}_{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| go(x, join(k), out)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| go(x, join(&i.to_string()), out)),
            Value::String(s) => out.push((key, s.clone())),
            Value::Null => out.push((key, String::new())),
            other => out.push((key, other.to_string())),
        }
    }
    let mut out = Vec::new();
    go(v, String::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    use crate::commands::{run, CommandKind};
    use crate::config::{SweepConfig, SweepVariable};
    use csl_core::{ShapeSpec, Vec3};

    #[test]
    fn every_report_round_trips() {
        let base = RunConfig {
            shape: Some(ShapeSpec::cylinder(3e-7, 1e-6).with_axis(Vec3::new(1.0, 1.0, 0.0))),
            density: Some(2200.0),
            delta: Some(Vec3::new(1e-8, 0.0, 0.0)),
            angle: Some(1e-3),
            sweep: Some(SweepConfig {
                variable: SweepVariable::Length,
                values: vec![1e-6, 2e-6],
            }),
            ..RunConfig::default()
        };
        for kind in [
            CommandKind::Tensors,
            CommandKind::Rates,
            CommandKind::Validate,
            CommandKind::Sweep,
            CommandKind::Dephasing,
        ] {
            let cfg = base.clone().resolve(kind.needs_density()).unwrap();
            let output = run(kind, &cfg).unwrap().output;
            let report = Report::new(cfg, output);
            let text = serde_json::to_string_pretty(&report).unwrap();
            let back: Report = serde_json::from_str(&text).unwrap();
            assert_eq!(back, report, "{kind:?}");
            assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        }
    }

    #[test]
    fn flatten_paths() {
        let v = json!({"a": {"b": 1.5, "c": [1, 2]}, "d": "x", "e": null});
        let f = flatten(&v);
        assert_eq!(
            f,
            vec![
                ("a_b".into(), "1.5".into()),
                ("a_c_0".into(), "1".into()),
                ("a_c_1".into(), "2".into()),
                ("d".into(), "x".into()),
                ("e".into(), String::new()),
            ]
        );
    }
}

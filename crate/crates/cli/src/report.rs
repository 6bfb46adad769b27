//! Markdown summary of verify reports and evolve summaries.

use std::fmt::Write as _;

use ou_lab_core::verifier::IdentityReport;

use crate::run::{EvolveSummary, VerifyReport};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Verify(VerifyReport),
    Evolve(EvolveSummary),
}

impl Document {
    fn pass(&self) -> bool {
        match self {
            Document::Verify(v) => v.pass,
            Document::Evolve(e) => e.pass,
        }
    }

    fn reports(&self) -> &[IdentityReport] {
        match self {
            Document::Verify(v) => &v.reports,
            Document::Evolve(e) => &e.checks,
        }
    }
}

pub fn parse_document(text: &str, origin: &str) -> Result<Document, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: not JSON: {e}")))?;
    let bad = |e: serde_json::Error| CliError::Config(format!("{origin}: {e}"));
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("verify-report") => Ok(Document::Verify(serde_json::from_value(value).map_err(bad)?)),
        Some("evolve-summary") => Ok(Document::Evolve(serde_json::from_value(value).map_err(bad)?)),
        Some(other) => Err(CliError::Config(format!("{origin}: unsupported report kind {other:?}"))),
        None => Err(CliError::Config(format!("{origin}: missing `kind` field"))),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Renders `(file name, document)` pairs in the given order. Returns the
/// text, the overall verdict and every merged check.
pub fn render_summary(docs: &[(String, Document)]) -> (String, bool, Vec<IdentityReport>) {
    let pass = docs.iter().all(|(_, d)| d.pass());
    let mut out = String::new();
    writeln!(out, "# ou-lab summary\n").unwrap();
    writeln!(out, "Overall: **{}** ({} input(s))\n", verdict(pass), docs.len()).unwrap();
    for (name, doc) in docs {
        match doc {
            Document::Verify(v) => {
                writeln!(out, "## {name}: verify (seed {}, tolerance scale {})\n", v.seed, v.tolerance_scale).unwrap();
            }
            Document::Evolve(e) => {
                writeln!(out, "## {name}: evolve `{}` (n = {}, m = {})\n", e.preset, e.dimension, e.quadrature_order)
                    .unwrap();
                writeln!(out, "- time points: {}", e.time_points).unwrap();
                writeln!(out, "- fitted decay exponent: {}", opt(e.fitted_exponent)).unwrap();
                writeln!(out, "- worst bound margin: {}", opt(e.worst_bound_margin)).unwrap();
                if let Some(d) = e.first_chaos_deviation {
                    writeln!(out, "- first-chaos deviation from e^(-2t): {d:.3e}").unwrap();
                }
                writeln!(out).unwrap();
            }
        }
        writeln!(out, "| check | result | max rel residual | tolerance | nodes | statement |").unwrap();
        writeln!(out, "|---|---|---|---|---|---|").unwrap();
        for r in doc.reports() {
            writeln!(
                out,
                "| {} | {} | {:.3e} | {:.1e} | {} | {} |",
                r.identity,
                verdict(r.pass),
                r.max_rel_residual,
                r.tolerance,
                r.nodes_checked,
                r.statement.replace('|', "\\|")
            )
            .unwrap();
        }
        writeln!(out).unwrap();
    }
    let reports = docs.iter().flat_map(|(_, d)| d.reports().iter().cloned()).collect();
    (out, pass, reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_kind() {
        assert!(parse_document(r#"{"kind": "other"}"#, "x").is_err());
        assert!(parse_document("[]", "x").is_err());
        assert!(parse_document("nope", "x").is_err());
    }
}

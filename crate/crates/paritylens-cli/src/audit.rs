//! The `audit` subcommand: ingest a dataset, compute per-group rates,
//! evaluate every fairness criterion, and report the side conditions of
//! the incompatibility statement on the empirical joint distribution.

use anyhow::{bail, Context, Result};
use clap::Args;
use paritylens::core::{self, ColumnRoles, Dataset};
use paritylens::fairness::{audit_dataset, Criterion, FairnessVerdict, ALL_CRITERIA};
use paritylens::impossibility::theorem_conditions;
use paritylens::metrics::{render_text_table, report_rows};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::{fmt_rate, Out, EXIT_VIOLATION};

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Dataset file. `.json` files carry their own schema; any other
    /// extension is read as CSV with the column roles given by flags.
    pub input: PathBuf,

    /// Sensitive (group) column name; repeatable. Required for CSV input.
    #[arg(long = "sensitive")]
    pub sensitive: Vec<String>,

    /// Permissible feature column name; repeatable.
    #[arg(long = "permissible")]
    pub permissible: Vec<String>,

    /// Outcome column (values 0/1). Required for CSV input.
    #[arg(long)]
    pub outcome: Option<String>,

    /// Decision column (values 0/1). Required for CSV input.
    #[arg(long)]
    pub decision: Option<String>,

    /// Comma-separated criteria deciding the exit code (default: all).
    /// Accepts full keys like `error-rate-balance` or short aliases like
    /// `erb`, `dp`, `pp`, `ppv`, `npv`, `peb`, `neb`, `ac`, `cdp`.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<String>,
}

/// Resolves a criterion name: the canonical kebab-case key or a short
/// alias.
pub fn parse_criterion(name: &str) -> Result<Criterion> {
    let k = name.trim().to_ascii_lowercase();
    if let Some(c) = Criterion::from_key(&k) {
        return Ok(c);
    }
    let c = match k.as_str() {
        "ac" => Criterion::AntiClassification,
        "cdp" => Criterion::CondDemographicParity,
        "dp" => Criterion::DemographicParity,
        "pp" => Criterion::PredictiveParity,
        "ppv" => Criterion::PosPredParity,
        "npv" => Criterion::NegPredParity,
        "erb" => Criterion::ErrorRateBalance,
        "peb" | "tpr" => Criterion::PosErrorBalance,
        "neb" | "tnr" => Criterion::NegErrorBalance,
        _ => {
            let known: Vec<&str> = ALL_CRITERIA.iter().map(|c| c.key()).collect();
            bail!("unknown criterion {name:?} (known: {})", known.join(", "));
        }
    };
    Ok(c)
}

/// The complete machine-readable audit result. Serializing and parsing
/// it back yields an equal value; every rational appears as
/// `{"num": ..., "den": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub version: String,
    /// Arithmetic mode of the verdicts (`exact`: arbitrary-precision
    /// rationals end to end).
    pub mode: String,
    pub dataset: DatasetSummary,
    /// Per-group confusion counts and the six rates (exact fraction,
    /// decimal rendering, and `{num, den}` form).
    pub groups: serde_json::Value,
    /// One verdict per criterion, in report order.
    pub verdicts: serde_json::Value,
    /// Side conditions of the incompatibility statement, evaluated on the
    /// empirical joint distribution.
    pub theorem_conditions: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n: u64,
    pub groups: Vec<String>,
    pub schema: serde_json::Value,
}

/// Builds the full report for a dataset.
pub fn build_report(dataset: &Dataset) -> AuditReport {
    let verdicts = audit_dataset(dataset);
    let conditions = theorem_conditions(&dataset.joint_distribution());
    let rows = report_rows(dataset);
    AuditReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        mode: "exact".to_string(),
        dataset: DatasetSummary {
            n: dataset.n(),
            groups: dataset.groups().iter().map(|g| g.to_string()).collect(),
            schema: core::to_json(dataset)["schema"].clone(),
        },
        groups: serde_json::to_value(rows).expect("report rows serialize"),
        verdicts: serde_json::Value::Array(verdicts.iter().map(|v| v.to_json()).collect()),
        theorem_conditions: conditions.to_json(),
    }
}

pub fn load_dataset(args: &AuditArgs) -> Result<Dataset> {
    let path: &Path = &args.input;
    let is_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    if is_json {
        return core::ingest_json_path(path)
            .with_context(|| format!("reading dataset {}", path.display()));
    }
    let outcome = match &args.outcome {
        Some(c) => c.clone(),
        None => bail!("CSV input needs --outcome <column>"),
    };
    let decision = match &args.decision {
        Some(c) => c.clone(),
        None => bail!("CSV input needs --decision <column>"),
    };
    if args.sensitive.is_empty() {
        bail!("CSV input needs at least one --sensitive <column>");
    }
    let roles = ColumnRoles {
        sensitive: args.sensitive.clone(),
        permissible: args.permissible.clone(),
        outcome,
        decision,
    };
    core::ingest_csv_path(path, &roles)
        .with_context(|| format!("reading dataset {}", path.display()))
}

fn describe_verdict(v: &FairnessVerdict) -> String {
    let status = if v.satisfied { "satisfied" } else { "VIOLATED " };
    let mut line = format!("  {:<24} {}", v.criterion.key(), status);
    if !v.satisfied {
        line.push_str(&format!("  gap {}", crate::fmt_rational(&v.gap)));
    }
    if let Some(w) = &v.witness {
        line.push_str(&format!(
            "\n      witness: {} vs {} -> {} vs {}",
            w.group_a,
            w.group_b,
            fmt_rate(&w.value_a),
            fmt_rate(&w.value_b),
        ));
        if let Some(x) = &w.x {
            line.push_str(&format!(" at x={x}"));
        }
        line.push_str(&format!(" [{}]", w.kind.key()));
    }
    line
}

pub fn run(args: &AuditArgs, out: &Out) -> Result<ExitCode> {
    let requested: Vec<Criterion> = if args.criteria.is_empty() {
        ALL_CRITERIA.to_vec()
    } else {
        args.criteria
            .iter()
            .map(|s| parse_criterion(s))
            .collect::<Result<Vec<_>>>()?
    };

    let dataset = load_dataset(args)?;
    let verdicts = audit_dataset(&dataset);
    let report = build_report(&dataset);

    out.human(format!(
        "dataset: {} ({} records, groups: {})",
        args.input.display(),
        report.dataset.n,
        report.dataset.groups.join(", ")
    ));
    out.human("");
    for line in render_text_table(&report_rows(&dataset)).lines() {
        out.human(line);
    }
    out.human("");
    out.human("fairness verdicts:");
    for v in &verdicts {
        out.human(describe_verdict(v));
    }
    out.human("");
    let conditions = theorem_conditions(&dataset.joint_distribution());
    out.human("incompatibility side conditions on the empirical joint:");
    out.human(format!(
        "  perfect predictor: {}",
        if conditions.perfect_predictor { "yes" } else { "no" }
    ));
    out.human(format!(
        "  equal base rates:  {}",
        if conditions.equal_base_rates { "yes" } else { "no" }
    ));

    let mut violated: Vec<&str> = Vec::new();
    for c in &requested {
        let verdict = verdicts
            .iter()
            .find(|v| v.criterion == *c)
            .expect("every criterion has a verdict");
        if !verdict.satisfied {
            violated.push(c.key());
        }
    }
    out.human("");
    if violated.is_empty() {
        out.human("result: all requested criteria satisfied");
    } else {
        out.human(format!("result: violated criteria: {}", violated.join(", ")));
    }

    out.machine(&serde_json::to_value(&report).expect("report serializes"));

    Ok(if violated.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_aliases_resolve() {
        assert_eq!(parse_criterion("erb").unwrap(), Criterion::ErrorRateBalance);
        assert_eq!(
            parse_criterion("error-rate-balance").unwrap(),
            Criterion::ErrorRateBalance
        );
        assert_eq!(parse_criterion("PPV").unwrap(), Criterion::PosPredParity);
        assert!(parse_criterion("wedge").is_err());
    }

    #[test]
    fn report_round_trips_through_json() {
        let csv = "gender,score,qualified,hired\nm,1,1,1\nm,1,0,0\nf,1,1,0\nf,1,0,0\n";
        let roles = ColumnRoles {
            sensitive: vec!["gender".into()],
            permissible: vec!["score".into()],
            outcome: "qualified".into(),
            decision: "hired".into(),
        };
        let dataset = core::ingest_csv(csv.as_bytes(), &roles).unwrap();
        let report = build_report(&dataset);
        let text = serde_json::to_string(&report).unwrap();
        let back: AuditReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let again = serde_json::to_string(&back).unwrap();
        assert_eq!(again, text);
    }
}

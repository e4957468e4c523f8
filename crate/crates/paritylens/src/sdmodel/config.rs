//! Scenario files: a flat set of keys in either plain-text `key = value`
//! form (one per line, `#` comments) or a JSON object. All numeric values
//! are parsed exactly — fractions like `3/10`, decimals like `0.3`
//! (exactly 3/10, never a float), or integers.
//!
//! Keys: `variant` (`prevalence` | `precision`), then `p_m`, `p_f`, `phi`
//! for the prevalence variant or `p_tilde`, `phi_m`, `phi_f` for the
//! precision variant; payoffs `B` and `omega`; optional `d_m` and `d_f`
//! (both or neither) selecting a policy; optional `gender_split`.

use super::{EmployerPayoffs, HiringPolicy, PhelpsianScenario};
use crate::rational::{parse_rational, Rational};
use std::collections::BTreeMap;
use thiserror::Error;

/// A parsed scenario file: the scenario plus, when `d_m`/`d_f` were given,
/// the policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: PhelpsianScenario,
    pub policy: Option<HiringPolicy>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioParseError {
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown key `{0}` for this variant")]
    UnknownKey(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("value of `{key}` is not an exact number: `{value}`")]
    BadValue { key: String, value: String },
    #[error("variant must be `prevalence` or `precision`, got `{0}`")]
    BadVariant(String),
    #[error("`d_m` and `d_f` must be given together")]
    HalfPolicy,
    #[error("line {0}: expected `key = value`")]
    BadLine(usize),
    #[error("scenario file must be a JSON object")]
    NotAnObject,
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Scenario(#[from] super::ScenarioError),
    #[error(transparent)]
    Payoffs(#[from] super::PayoffError),
    #[error(transparent)]
    Policy(#[from] super::PolicyError),
}

fn build(
    variant: &str,
    mut values: BTreeMap<String, Rational>,
) -> Result<ScenarioFile, ScenarioParseError> {
    let mut take = |key: &'static str| -> Result<Rational, ScenarioParseError> {
        values
            .remove(key)
            .ok_or(ScenarioParseError::MissingKey(key))
    };
    let scenario = match variant.to_ascii_lowercase().as_str() {
        "prevalence" => {
            let p_m = take("p_m")?;
            let p_f = take("p_f")?;
            let phi = take("phi")?;
            let payoffs = EmployerPayoffs::new(take("B")?, take("omega")?)?;
            PhelpsianScenario::prevalence(p_m, p_f, phi, payoffs)?
        }
        "precision" => {
            let p_tilde = take("p_tilde")?;
            let phi_m = take("phi_m")?;
            let phi_f = take("phi_f")?;
            let payoffs = EmployerPayoffs::new(take("B")?, take("omega")?)?;
            PhelpsianScenario::precision(p_tilde, phi_m, phi_f, payoffs)?
        }
        other => return Err(ScenarioParseError::BadVariant(other.to_string())),
    };
    let scenario = match values.remove("gender_split") {
        Some(split) => scenario.with_gender_split(split)?,
        None => scenario,
    };
    let policy = match (values.remove("d_m"), values.remove("d_f")) {
        (Some(d_m), Some(d_f)) => Some(HiringPolicy::new(d_m, d_f)?),
        (None, None) => None,
        _ => return Err(ScenarioParseError::HalfPolicy),
    };
    if let Some((key, _)) = values.into_iter().next() {
        return Err(ScenarioParseError::UnknownKey(key));
    }
    Ok(ScenarioFile { scenario, policy })
}

/// Parses the plain-text `key = value` form.
pub fn parse_scenario_kv(text: &str) -> Result<ScenarioFile, ScenarioParseError> {
    let mut variant: Option<String> = None;
    let mut values: BTreeMap<String, Rational> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ScenarioParseError::BadLine(idx + 1))?;
        let key = key.trim();
        let value = value.trim();
        if key == "variant" {
            if variant.replace(value.to_string()).is_some() {
                return Err(ScenarioParseError::DuplicateKey(key.to_string()));
            }
            continue;
        }
        let parsed = parse_rational(value).map_err(|_| ScenarioParseError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        })?;
        if values.insert(key.to_string(), parsed).is_some() {
            return Err(ScenarioParseError::DuplicateKey(key.to_string()));
        }
    }
    let variant = variant.ok_or(ScenarioParseError::MissingKey("variant"))?;
    build(&variant, values)
}

/// Parses the JSON object form. Numbers are read from their literal
/// decimal text, so `0.3` means exactly 3/10; strings like `"3/10"` are
/// also accepted.
pub fn parse_scenario_json(text: &str) -> Result<ScenarioFile, ScenarioParseError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ScenarioParseError::Json(e.to_string()))?;
    let obj = value.as_object().ok_or(ScenarioParseError::NotAnObject)?;
    let mut variant: Option<String> = None;
    let mut values: BTreeMap<String, Rational> = BTreeMap::new();
    for (key, v) in obj {
        if key == "variant" {
            match v.as_str() {
                Some(s) => variant = Some(s.to_string()),
                None => {
                    return Err(ScenarioParseError::BadVariant(v.to_string()));
                }
            }
            continue;
        }
        let text_form = match v {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.clone(),
            other => {
                return Err(ScenarioParseError::BadValue {
                    key: key.clone(),
                    value: other.to_string(),
                })
            }
        };
        let parsed = parse_rational(&text_form).map_err(|_| ScenarioParseError::BadValue {
            key: key.clone(),
            value: text_form.clone(),
        })?;
        values.insert(key.clone(), parsed);
    }
    let variant = variant.ok_or(ScenarioParseError::MissingKey("variant"))?;
    build(&variant, values)
}

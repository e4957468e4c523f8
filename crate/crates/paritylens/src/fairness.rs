//! Group-fairness criteria over decision data: definition-faithful checks
//! with exact verdicts, explicit witnesses and a first-class convention for
//! undefined rates.

use crate::core::{Dataset, Profile, RandomizedAlgorithm};
use crate::metrics::{confusion_by_group, rates, RateBundle};
use crate::rational::{RateValue, Rational};
use num_traits::{Signed, Zero};
use serde_json::json;
use std::fmt;

/// Tolerance used by float-mode comparisons (the grid/bisection feasibility
/// scan). Exact-mode checks use exact equality: the tolerance is zero.
pub const FLOAT_EPSILON: f64 = 1e-9;

/// The fairness criteria this crate can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    /// Decisions may not depend on the sensitive trait: individuals with the
    /// same permissible profile must receive the same (randomized) decision.
    AntiClassification,
    /// Equal positive predictive value across groups.
    PosPredParity,
    /// Equal negative predictive value across groups.
    NegPredParity,
    /// Both predictive values equal across groups.
    PredictiveParity,
    /// Equal true positive rate across groups.
    PosErrorBalance,
    /// Equal true negative rate across groups.
    NegErrorBalance,
    /// Both error rates equal across groups.
    ErrorRateBalance,
    /// Equal selection rate across groups.
    DemographicParity,
    /// Equal selection rate across groups at every fixed permissible
    /// profile. With decisions determined by (group, permissible profile)
    /// this coincides with anti-classification.
    CondDemographicParity,
}

impl Criterion {
    /// Stable identifier used in JSON reports and on the command line.
    pub fn key(&self) -> &'static str {
        match self {
            Criterion::AntiClassification => "anti-classification",
            Criterion::PosPredParity => "pos-pred-parity",
            Criterion::NegPredParity => "neg-pred-parity",
            Criterion::PredictiveParity => "predictive-parity",
            Criterion::PosErrorBalance => "pos-error-balance",
            Criterion::NegErrorBalance => "neg-error-balance",
            Criterion::ErrorRateBalance => "error-rate-balance",
            Criterion::DemographicParity => "demographic-parity",
            Criterion::CondDemographicParity => "cond-demographic-parity",
        }
    }

    /// Parses a criterion key (as produced by [`Criterion::key`]).
    pub fn from_key(key: &str) -> Option<Criterion> {
        ALL_CRITERIA.iter().copied().find(|c| c.key() == key)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// All criteria in report order.
pub const ALL_CRITERIA: [Criterion; 9] = [
    Criterion::AntiClassification,
    Criterion::CondDemographicParity,
    Criterion::PosPredParity,
    Criterion::NegPredParity,
    Criterion::PredictiveParity,
    Criterion::PosErrorBalance,
    Criterion::NegErrorBalance,
    Criterion::ErrorRateBalance,
    Criterion::DemographicParity,
];

/// Comparison mode of a verdict. Exact verdicts compare rationals with zero
/// tolerance; float verdicts come from the feasibility scan and use
/// [`FLOAT_EPSILON`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    Float,
}

impl CheckMode {
    pub fn key(&self) -> &'static str {
        match self {
            CheckMode::Exact => "exact",
            CheckMode::Float => "float",
        }
    }
}

/// What a witness demonstrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Two defined values differ; the gap is their absolute difference.
    Gap,
    /// The quantity is defined for one group and undefined for the other,
    /// which this crate's convention counts as a violation.
    UndefinedMismatch,
}

impl WitnessKind {
    pub fn key(&self) -> &'static str {
        match self {
            WitnessKind::Gap => "gap",
            WitnessKind::UndefinedMismatch => "undefined-mismatch",
        }
    }
}

/// A concrete pair of groups (optionally at a fixed permissible profile)
/// demonstrating a violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub group_a: Profile,
    pub group_b: Profile,
    /// Present for per-permissible-profile criteria.
    pub x: Option<Profile>,
    pub value_a: RateValue,
    pub value_b: RateValue,
    pub kind: WitnessKind,
}

/// The outcome of checking one criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessVerdict {
    pub criterion: Criterion,
    pub satisfied: bool,
    /// Largest absolute difference over pairs where both values are
    /// defined; zero when no such pair differs.
    pub gap: Rational,
    /// Present exactly when the criterion is violated.
    pub witness: Option<Witness>,
    pub mode: CheckMode,
    /// True when the decision table was estimated from observed decisions
    /// rather than given as a rule.
    pub empirical: bool,
}

impl FairnessVerdict {
    /// JSON form:
    /// `{criterion, satisfied, gap: {num, den}, witness: {...} | null,
    ///   mode: "exact" | "float", empirical}`.
    pub fn to_json(&self) -> serde_json::Value {
        let witness = match &self.witness {
            None => serde_json::Value::Null,
            Some(w) => {
                let mut obj = json!({
                    "group_a": w.group_a.to_string(),
                    "group_b": w.group_b.to_string(),
                    "value_a": w.value_a.to_json(),
                    "value_b": w.value_b.to_json(),
                    "kind": w.kind.key(),
                });
                if let Some(x) = &w.x {
                    obj["x"] = serde_json::Value::from(x.to_string());
                }
                obj
            }
        };
        json!({
            "criterion": self.criterion.key(),
            "satisfied": self.satisfied,
            "gap": crate::rational::rational_to_json(&self.gap),
            "witness": witness,
            "mode": self.mode.key(),
            "empirical": self.empirical,
        })
    }
}

/// The six rates of one group, as produced by `metrics::rates` or by the
/// model's closed forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRates {
    pub group: Profile,
    pub rates: RateBundle,
}

/// Compares one labeled quantity across groups. All pairs are examined:
/// the gap is the largest defined difference, and a pair where exactly one
/// side is undefined is a violation with a distinguished witness. A pair
/// where both sides are undefined is treated as equal (both conditioning
/// events are empty), which keeps the check exact rather than guessing.
fn pairwise_check(
    criterion: Criterion,
    items: &[(Profile, Option<Profile>, RateValue)],
    empirical: bool,
) -> FairnessVerdict {
    let mut gap = Rational::zero();
    let mut gap_witness: Option<Witness> = None;
    let mut mismatch_witness: Option<Witness> = None;

    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let (ga, xa, va) = &items[i];
            let (gb, xb, vb) = &items[j];
            if xa != xb {
                continue; // per-x criteria compare within the same x only
            }
            match (va, vb) {
                (RateValue::Defined(a), RateValue::Defined(b)) => {
                    let diff = (a - b).abs();
                    if diff > gap {
                        gap = diff;
                        gap_witness = Some(Witness {
                            group_a: ga.clone(),
                            group_b: gb.clone(),
                            x: xa.clone(),
                            value_a: va.clone(),
                            value_b: vb.clone(),
                            kind: WitnessKind::Gap,
                        });
                    }
                }
                (RateValue::Undefined, RateValue::Undefined) => {
                    // both conditioning events empty: treated as equal
                }
                _ => {
                    if mismatch_witness.is_none() {
                        mismatch_witness = Some(Witness {
                            group_a: ga.clone(),
                            group_b: gb.clone(),
                            x: xa.clone(),
                            value_a: va.clone(),
                            value_b: vb.clone(),
                            kind: WitnessKind::UndefinedMismatch,
                        });
                    }
                }
            }
        }
    }

    let satisfied = gap.is_zero() && mismatch_witness.is_none();
    let witness = if satisfied {
        None
    } else if !gap.is_zero() {
        gap_witness
    } else {
        mismatch_witness
    };
    FairnessVerdict {
        criterion,
        satisfied,
        gap,
        witness,
        mode: CheckMode::Exact,
        empirical,
    }
}

/// Checks one rate across a slice of group bundles.
fn rate_check(
    criterion: Criterion,
    groups: &[GroupRates],
    pick: fn(&RateBundle) -> &RateValue,
    empirical: bool,
) -> FairnessVerdict {
    let items: Vec<(Profile, Option<Profile>, RateValue)> = groups
        .iter()
        .map(|g| (g.group.clone(), None, pick(&g.rates).clone()))
        .collect();
    pairwise_check(criterion, &items, empirical)
}

/// Combines two component verdicts into a joint criterion verdict.
fn combine(criterion: Criterion, a: FairnessVerdict, b: FairnessVerdict) -> FairnessVerdict {
    let satisfied = a.satisfied && b.satisfied;
    let (gap, primary) = if a.gap >= b.gap { (a.gap.clone(), &a) } else { (b.gap.clone(), &b) };
    let witness = if satisfied {
        None
    } else {
        // take the witness of the failing component with the larger gap,
        // falling back to whichever component failed
        let candidates = if primary.witness.is_some() && !primary.satisfied {
            primary.witness.clone()
        } else if !a.satisfied {
            a.witness.clone()
        } else {
            b.witness.clone()
        };
        candidates
    };
    FairnessVerdict {
        criterion,
        satisfied,
        gap,
        witness,
        mode: CheckMode::Exact,
        empirical: a.empirical || b.empirical,
    }
}

/// Anti-classification over a decision table: for every permissible profile,
/// every pair of groups covered at that profile must have identical hire
/// probabilities.
pub fn check_anti_classification(alg: &RandomizedAlgorithm) -> FairnessVerdict {
    table_check(Criterion::AntiClassification, alg)
}

/// Conditional demographic parity over a decision table. Computationally
/// identical to anti-classification when decisions are determined by
/// (group, permissible profile); kept as its own criterion tag.
pub fn check_conditional_demographic_parity(alg: &RandomizedAlgorithm) -> FairnessVerdict {
    table_check(Criterion::CondDemographicParity, alg)
}

fn table_check(criterion: Criterion, alg: &RandomizedAlgorithm) -> FairnessVerdict {
    let items: Vec<(Profile, Option<Profile>, RateValue)> = alg
        .table()
        .iter()
        .map(|((g, x), p)| (g.clone(), Some(x.clone()), RateValue::Defined(p.clone())))
        .collect();
    pairwise_check(criterion, &items, alg.is_empirical())
}

/// Equal positive predictive value across groups.
pub fn check_positive_predictive_parity(groups: &[GroupRates]) -> FairnessVerdict {
    rate_check(Criterion::PosPredParity, groups, |b| &b.ppv, false)
}

/// Equal negative predictive value across groups.
pub fn check_negative_predictive_parity(groups: &[GroupRates]) -> FairnessVerdict {
    rate_check(Criterion::NegPredParity, groups, |b| &b.npv, false)
}

/// Both predictive values equal across groups.
pub fn check_predictive_parity(groups: &[GroupRates]) -> FairnessVerdict {
    combine(
        Criterion::PredictiveParity,
        check_positive_predictive_parity(groups),
        check_negative_predictive_parity(groups),
    )
}

/// Equal true positive rate across groups.
pub fn check_positive_error_balance(groups: &[GroupRates]) -> FairnessVerdict {
    rate_check(Criterion::PosErrorBalance, groups, |b| &b.tpr, false)
}

/// Equal true negative rate across groups.
pub fn check_negative_error_balance(groups: &[GroupRates]) -> FairnessVerdict {
    rate_check(Criterion::NegErrorBalance, groups, |b| &b.tnr, false)
}

/// Both error rates equal across groups.
pub fn check_error_rate_balance(groups: &[GroupRates]) -> FairnessVerdict {
    combine(
        Criterion::ErrorRateBalance,
        check_positive_error_balance(groups),
        check_negative_error_balance(groups),
    )
}

/// Equal selection rate across groups.
pub fn check_demographic_parity(groups: &[GroupRates]) -> FairnessVerdict {
    rate_check(Criterion::DemographicParity, groups, |b| &b.hire_rate, false)
}

/// Runs every criterion against a dataset. Anti-classification and
/// conditional demographic parity are checked on the empirical decision
/// table estimated from the data, and their verdicts carry the `empirical`
/// flag; the rate criteria are exact functions of the confusion counts.
pub fn audit_dataset(dataset: &Dataset) -> Vec<FairnessVerdict> {
    let alg = dataset.empirical_algorithm();
    let group_rates: Vec<GroupRates> = confusion_by_group(dataset)
        .iter()
        .map(|c| GroupRates {
            group: c.group.clone(),
            rates: rates(c),
        })
        .collect();
    vec![
        check_anti_classification(&alg),
        check_conditional_demographic_parity(&alg),
        check_positive_predictive_parity(&group_rates),
        check_negative_predictive_parity(&group_rates),
        check_predictive_parity(&group_rates),
        check_positive_error_balance(&group_rates),
        check_negative_error_balance(&group_rates),
        check_error_rate_balance(&group_rates),
        check_demographic_parity(&group_rates),
    ]
}

/// Group rates of a dataset, for callers that need the inputs to the checks.
pub fn dataset_group_rates(dataset: &Dataset) -> Vec<GroupRates> {
    confusion_by_group(dataset)
        .iter()
        .map(|c| GroupRates {
            group: c.group.clone(),
            rates: rates(c),
        })
        .collect()
}

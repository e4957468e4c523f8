//! Verifies, by exhaustive enumeration over small exactly-representable
//! spaces, that predictive parity and error-rate balance can hold together
//! only when the outcome is perfectly predictable or base rates coincide.
//!
//! Instances are pairs of (joint distribution over group x permissible
//! value x outcome, randomized decision rule). Masses live on the grid
//! `i / mass_denominator`, hire probabilities on `j / prob_denominator`,
//! so every comparison is exact integer arithmetic; no floating point
//! enters the verification. Two independent computation paths (integer
//! cross-multiplication, and the exact rational rate/criteria pipeline)
//! are evaluated for every enumerated instance and must agree.

use crate::core::{JointDistribution, Profile, RandomizedAlgorithm};
use crate::fairness::{
    check_error_rate_balance, check_predictive_parity, FairnessVerdict, GroupRates,
};
use crate::metrics::{bayes_consistent, fpr_identity, rates, GroupConfusion, RateBundle};
use crate::rational::{rational_to_json, RateValue, Rational};
use num_traits::{One, Zero};
use serde_json::json;
use std::collections::BTreeMap;
use thiserror::Error;

/// Exact side conditions of the incompatibility statement, evaluated on a
/// joint distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremConditions {
    /// True iff every positive-mass cell has posterior exactly 0 or 1.
    pub perfect_predictor: bool,
    /// True iff all positive-mass groups share exactly the same base rate
    /// (vacuously true with fewer than two groups).
    pub equal_base_rates: bool,
    /// Posterior outcome probability for each positive-mass (group, x) cell.
    pub per_cell_posteriors: BTreeMap<(Profile, Profile), Rational>,
    /// Base rate for each positive-mass group.
    pub per_group_base_rates: BTreeMap<Profile, Rational>,
    /// (group, x) combinations carrying zero mass, where the posterior is
    /// undefined and therefore omitted from the map above.
    pub omitted_cells: Vec<(Profile, Profile)>,
}

impl TheoremConditions {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "perfect_predictor": self.perfect_predictor,
            "equal_base_rates": self.equal_base_rates,
            "posteriors": self
                .per_cell_posteriors
                .iter()
                .map(|((a, x), v)| {
                    json!({"a": a.to_string(), "x": x.to_string(), "value": rational_to_json(v)})
                })
                .collect::<Vec<_>>(),
            "base_rates": self
                .per_group_base_rates
                .iter()
                .map(|(a, v)| json!({"a": a.to_string(), "value": rational_to_json(v)}))
                .collect::<Vec<_>>(),
            "omitted_cells": self
                .omitted_cells
                .iter()
                .map(|(a, x)| json!({"a": a.to_string(), "x": x.to_string()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Evaluates both side conditions exactly on a joint distribution.
///
/// Cells with zero marginal mass have no posterior; they are listed in
/// `omitted_cells` rather than silently dropped.
pub fn theorem_conditions(joint: &JointDistribution) -> TheoremConditions {
    let per_cell_posteriors = joint.posteriors();
    let mut omitted_cells = Vec::new();
    for a in joint.groups() {
        for x in joint.permissible_values() {
            if !per_cell_posteriors.contains_key(&(a.clone(), x.clone())) {
                omitted_cells.push((a.clone(), x));
            }
        }
    }
    let perfect_predictor = per_cell_posteriors
        .values()
        .all(|p| p.is_zero() || p.is_one());
    let mut per_group_base_rates = BTreeMap::new();
    for a in joint.groups() {
        if let RateValue::Defined(b) = joint.base_rate(&a) {
            per_group_base_rates.insert(a, b);
        }
    }
    let mut rates_iter = per_group_base_rates.values();
    let equal_base_rates = match rates_iter.next() {
        None => true,
        Some(first) => rates_iter.all(|b| b == first),
    };
    TheoremConditions {
        perfect_predictor,
        equal_base_rates,
        per_cell_posteriors,
        per_group_base_rates,
        omitted_cells,
    }
}

/// The four joint outcome/decision masses of one group, conditioned on
/// group membership: P[y, delta | a] as exact rationals summing to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupJointMasses {
    pub group: Profile,
    /// P[y=1, delta=1 | a]
    pub tp_mass: Rational,
    /// P[y=0, delta=1 | a]
    pub fp_mass: Rational,
    /// P[y=1, delta=0 | a]
    pub fn_mass: Rational,
    /// P[y=0, delta=0 | a]
    pub tn_mass: Rational,
}

impl GroupJointMasses {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "group": self.group.to_string(),
            "tp_mass": rational_to_json(&self.tp_mass),
            "fp_mass": rational_to_json(&self.fp_mass),
            "fn_mass": rational_to_json(&self.fn_mass),
            "tn_mass": rational_to_json(&self.tn_mass),
        })
    }
}

/// Recomputes the six rates of one group from its joint masses. This is an
/// independent path from `metrics::rates` (which starts from counts); the
/// two are asserted to agree on every enumerated instance.
pub fn rates_from_masses(m: &GroupJointMasses) -> RateBundle {
    let tpr = RateValue::ratio(m.tp_mass.clone(), &m.tp_mass + &m.fn_mass);
    let tnr = RateValue::ratio(m.tn_mass.clone(), &m.fp_mass + &m.tn_mass);
    let ppv = RateValue::ratio(m.tp_mass.clone(), &m.tp_mass + &m.fp_mass);
    let npv = RateValue::ratio(m.tn_mass.clone(), &m.tn_mass + &m.fn_mass);
    let base_rate = RateValue::Defined(&m.tp_mass + &m.fn_mass);
    let hire_rate = RateValue::Defined(&m.tp_mass + &m.fp_mass);
    RateBundle {
        tpr,
        tnr,
        ppv,
        npv,
        base_rate,
        hire_rate,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("decision rule has no entry for populated cell (a={group}, x={x})")]
    MissingCell { group: String, x: String },
}

/// Pushes a joint distribution through a decision rule and returns, per
/// positive-mass group, the four joint masses P[y, delta | a] together with
/// the rates recomputed from them.
///
/// The four masses are fully determined by any three: the function asserts
/// that the fourth equals one minus the sum of the others (after the same
/// normalization), which guards the accumulation arithmetic.
pub fn decompose_rates(
    joint: &JointDistribution,
    alg: &RandomizedAlgorithm,
) -> Result<Vec<(GroupJointMasses, RateBundle)>, DecomposeError> {
    let mut out = Vec::new();
    for a in joint.groups() {
        let group_mass = joint.group_mass(&a);
        let mut tp = Rational::zero();
        let mut fp = Rational::zero();
        let mut fnm = Rational::zero();
        let mut tn = Rational::zero();
        for x in joint.permissible_values() {
            let m1 = joint.mass(&a, &x, true);
            let m0 = joint.mass(&a, &x, false);
            if m1.is_zero() && m0.is_zero() {
                continue;
            }
            let p = alg
                .probability(&a, &x)
                .ok_or_else(|| DecomposeError::MissingCell {
                    group: a.to_string(),
                    x: x.to_string(),
                })?;
            let q = Rational::one() - p;
            tp += &m1 * p;
            fp += &m0 * p;
            fnm += &m1 * &q;
            tn += &m0 * &q;
        }
        let masses = GroupJointMasses {
            group: a.clone(),
            tp_mass: &tp / &group_mass,
            fp_mass: &fp / &group_mass,
            fn_mass: &fnm / &group_mass,
            tn_mass: &tn / &group_mass,
        };
        // any three masses determine the fourth
        let fourth = Rational::one() - (&masses.tp_mass + &masses.fp_mass + &masses.fn_mass);
        assert_eq!(
            fourth, masses.tn_mass,
            "joint masses of group {a} must sum to one"
        );
        let bundle = rates_from_masses(&masses);
        out.push((masses, bundle));
    }
    Ok(out)
}

/// Bounds of the enumeration space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumBounds {
    /// Number of permissible values (1..=3). Groups are always two.
    pub x_arity: u32,
    /// Masses are multiples of 1/mass_denominator (1..=64).
    pub mass_denominator: u32,
    /// Hire probabilities are multiples of 1/prob_denominator (1..=64);
    /// the grid includes the deterministic corners 0 and 1.
    pub prob_denominator: u32,
}

/// Documented enumeration limits.
pub const MAX_X_ARITY: u32 = 3;
pub const MAX_MASS_DENOMINATOR: u32 = 64;
pub const MAX_PROB_DENOMINATOR: u32 = 64;
/// Refusal threshold on the estimated number of (distribution, algorithm)
/// pairs. Every pair runs both the integer path and the exact rational
/// cross-check, so the cost per pair is a few microseconds.
pub const MAX_ESTIMATED_PAIRS: u128 = 30_000_000;
/// At most this many convention artifacts / counterexamples are stored in
/// the summary (the counts remain exact).
pub const REPORT_CAP: usize = 64;
/// Progress is reported after every this many distributions.
pub const PROGRESS_STRIDE: u64 = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("invalid enumeration bounds: {0}")]
    InvalidBounds(String),
    #[error(
        "enumeration space too large: about {estimated_pairs} (distribution, algorithm) pairs \
         exceeds the limit of {limit}; shrink x_arity, mass_denominator or prob_denominator"
    )]
    BoundsTooLarge { estimated_pairs: u128, limit: u128 },
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn validate(bounds: &EnumBounds) -> Result<(), EnumerationError> {
    if bounds.x_arity == 0 || bounds.x_arity > MAX_X_ARITY {
        return Err(EnumerationError::InvalidBounds(format!(
            "x_arity must be between 1 and {MAX_X_ARITY}, got {}",
            bounds.x_arity
        )));
    }
    if bounds.mass_denominator == 0 || bounds.mass_denominator > MAX_MASS_DENOMINATOR {
        return Err(EnumerationError::InvalidBounds(format!(
            "mass_denominator must be between 1 and {MAX_MASS_DENOMINATOR}, got {}",
            bounds.mass_denominator
        )));
    }
    if bounds.prob_denominator == 0 || bounds.prob_denominator > MAX_PROB_DENOMINATOR {
        return Err(EnumerationError::InvalidBounds(format!(
            "prob_denominator must be between 1 and {MAX_PROB_DENOMINATOR}, got {}",
            bounds.prob_denominator
        )));
    }
    Ok(())
}

/// Number of distributions in the space: weak compositions of the mass
/// denominator into 2 * x_arity * 2 cells.
pub fn distribution_count(bounds: &EnumBounds) -> u128 {
    let cells = 4 * bounds.x_arity as u64;
    binomial(bounds.mass_denominator as u64 + cells - 1, cells - 1)
}

/// Number of decision rules in the space: (prob_denominator + 1) grid
/// values for each of the 2 * x_arity cells.
pub fn algorithm_count(bounds: &EnumBounds) -> u128 {
    let cells = 2 * bounds.x_arity;
    (bounds.prob_denominator as u128 + 1).pow(cells)
}

/// Estimated number of (distribution, algorithm) pairs the enumeration
/// would examine; this is exact, not a heuristic.
pub fn estimate_cost(bounds: &EnumBounds) -> Result<u128, EnumerationError> {
    validate(bounds)?;
    Ok(distribution_count(bounds) * algorithm_count(bounds))
}

/// One instance where both criteria hold without either side condition.
/// A genuine counterexample would falsify the incompatibility statement;
/// instances whose criteria hold only through a pair of undefined rates
/// are classified as convention artifacts instead and carry the names of
/// the rates that were undefined on both sides.
#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub distribution: JointDistribution,
    pub algorithm: RandomizedAlgorithm,
    pub predictive_parity: FairnessVerdict,
    pub error_rate_balance: FairnessVerdict,
    pub conditions: TheoremConditions,
    /// Rates compared as equal only because both sides were undefined.
    pub both_undefined: Vec<&'static str>,
}

impl CounterexampleReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "distribution": self
                .distribution
                .masses()
                .iter()
                .map(|((a, x, y), m)| {
                    json!({
                        "a": a.to_string(),
                        "x": x.to_string(),
                        "y": if *y { 1 } else { 0 },
                        "mass": rational_to_json(m),
                    })
                })
                .collect::<Vec<_>>(),
            "algorithm": self
                .algorithm
                .table()
                .iter()
                .map(|((a, x), p)| {
                    json!({"a": a.to_string(), "x": x.to_string(), "p": rational_to_json(p)})
                })
                .collect::<Vec<_>>(),
            "verdicts": {
                "predictive_parity": self.predictive_parity.to_json(),
                "error_rate_balance": self.error_rate_balance.to_json(),
            },
            "conditions": self.conditions.to_json(),
            "both_undefined": self.both_undefined,
        })
    }
}

/// Outcome of an exhaustive run.
#[derive(Debug, Clone)]
pub struct VerifySummary {
    pub bounds: EnumBounds,
    /// Distinct joint distributions enumerated.
    pub distributions: u64,
    /// Distinct decision rules enumerated.
    pub algorithms: u64,
    /// (distribution, algorithm) pairs examined.
    pub examined: u64,
    /// Pairs where predictive parity and error-rate balance both hold
    /// (under the undefined-rate convention; vacuously with one group).
    pub satisfied_both: u64,
    /// Among `satisfied_both`: pairs whose distribution has a perfect
    /// predictor.
    pub perfect_predictor_count: u64,
    /// Among `satisfied_both`: pairs whose distribution has equal base
    /// rates.
    pub equal_base_rates_count: u64,
    /// Pairs satisfying both criteria with neither side condition, where
    /// some rate comparison was undefined on both sides. Expected to be
    /// possible only through the undefined-rate convention.
    pub convention_artifact_count: u64,
    /// Pairs satisfying both criteria with neither side condition and all
    /// comparisons defined. Any entry here falsifies the statement.
    pub counterexample_count: u64,
    /// Stored artifact reports (capped at [`REPORT_CAP`]).
    pub convention_artifacts: Vec<CounterexampleReport>,
    /// Stored counterexample reports (capped at [`REPORT_CAP`]).
    pub counterexamples: Vec<CounterexampleReport>,
    /// Number of instances on which the two computation paths were
    /// compared (always equals `examined`).
    pub identity_checks: u64,
}

impl VerifySummary {
    /// True when the exhaustive run agrees with the incompatibility
    /// statement: no counterexamples.
    pub fn verified(&self) -> bool {
        self.counterexample_count == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "bounds": {
                "x_arity": self.bounds.x_arity,
                "mass_denominator": self.bounds.mass_denominator,
                "prob_denominator": self.bounds.prob_denominator,
            },
            "distributions": self.distributions,
            "algorithms": self.algorithms,
            "examined": self.examined,
            "satisfied_both": self.satisfied_both,
            "perfect_predictor_count": self.perfect_predictor_count,
            "equal_base_rates_count": self.equal_base_rates_count,
            "convention_artifact_count": self.convention_artifact_count,
            "counterexample_count": self.counterexample_count,
            "counterexamples": self
                .counterexamples
                .iter()
                .map(|r| r.to_json())
                .collect::<Vec<_>>(),
            "convention_artifacts": self
                .convention_artifacts
                .iter()
                .map(|r| r.to_json())
                .collect::<Vec<_>>(),
            "identity_checks": self.identity_checks,
            "verified": self.verified(),
        })
    }
}

/// How an instance satisfying both criteria relates to the side conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum InstanceClass {
    /// At least one side condition holds, as the statement requires.
    ConditionsHold,
    /// Neither condition holds, but some comparison was undefined-vs-
    /// undefined: an artifact of the convention, not a counterexample.
    ConventionArtifact,
    /// Neither condition holds and every comparison was defined.
    Counterexample,
}

pub(crate) fn classify(
    perfect_predictor: bool,
    equal_base_rates: bool,
    any_both_undefined: bool,
) -> InstanceClass {
    if perfect_predictor || equal_base_rates {
        InstanceClass::ConditionsHold
    } else if any_both_undefined {
        InstanceClass::ConventionArtifact
    } else {
        InstanceClass::Counterexample
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Equal,
    Unequal,
    BothUndefined,
    Mismatch,
}

fn cmp_ratio(na: u64, da: u64, nb: u64, db: u64) -> Cmp {
    match (da == 0, db == 0) {
        (true, true) => Cmp::BothUndefined,
        (true, false) | (false, true) => Cmp::Mismatch,
        (false, false) => {
            if na as u128 * db as u128 == nb as u128 * da as u128 {
                Cmp::Equal
            } else {
                Cmp::Unequal
            }
        }
    }
}

fn cmp_holds(c: Cmp) -> bool {
    matches!(c, Cmp::Equal | Cmp::BothUndefined)
}

struct Ctx {
    k: usize,
    /// prob_denominator as u64
    g: u64,
    /// mass_denominator as u64
    d: u64,
    group_labels: [Profile; 2],
    x_labels: Vec<Profile>,
    /// flat decision-rule grid, stride 2k, numerators over g
    algs: Vec<u8>,
    alg_count: u64,
}

impl Ctx {
    fn mass_cell(&self, a: usize, x: usize, y: usize) -> usize {
        (a * self.k + x) * 2 + y
    }
}

#[derive(Default, Clone, Copy)]
struct GroupCells {
    m11: u64,
    m01: u64,
    m10: u64,
    m00: u64,
}

#[derive(Default)]
struct DistOutcome {
    examined: u64,
    satisfied_both: u64,
    perfect_predictor_count: u64,
    equal_base_rates_count: u64,
    convention_artifact_count: u64,
    counterexample_count: u64,
    identity_checks: u64,
    convention_artifacts: Vec<CounterexampleReport>,
    counterexamples: Vec<CounterexampleReport>,
}

/// Builds the exact joint distribution an integer mass vector denotes.
fn instance_joint(ctx: &Ctx, cells: &[u8]) -> JointDistribution {
    let mut masses = Vec::new();
    for a in 0..2 {
        for x in 0..ctx.k {
            for y in 0..2 {
                let m = cells[ctx.mass_cell(a, x, y)] as u64;
                if m > 0 {
                    masses.push((
                        (
                            ctx.group_labels[a].clone(),
                            ctx.x_labels[x].clone(),
                            y == 1,
                        ),
                        crate::rational::rat_u(m, ctx.d),
                    ));
                }
            }
        }
    }
    JointDistribution::from_masses(masses).expect("enumerated masses sum to one")
}

/// Builds the exact decision rule an integer probability vector denotes.
fn instance_alg(ctx: &Ctx, probs: &[u8]) -> RandomizedAlgorithm {
    let mut table = Vec::new();
    for a in 0..2 {
        for x in 0..ctx.k {
            table.push((
                (ctx.group_labels[a].clone(), ctx.x_labels[x].clone()),
                crate::rational::rat_u(probs[a * ctx.k + x] as u64, ctx.g),
            ));
        }
    }
    RandomizedAlgorithm::new(table).expect("enumerated probabilities lie in [0, 1]")
}

/// Full exact-path report for one instance, built from scratch rationals.
fn build_report(ctx: &Ctx, cells: &[u8], probs: &[u8]) -> CounterexampleReport {
    let distribution = instance_joint(ctx, cells);
    let algorithm = instance_alg(ctx, probs);
    let decomposed = decompose_rates(&distribution, &algorithm)
        .expect("enumerated rule covers every populated cell");
    let group_rates: Vec<GroupRates> = decomposed
        .iter()
        .map(|(m, b)| GroupRates {
            group: m.group.clone(),
            rates: b.clone(),
        })
        .collect();
    let predictive_parity = check_predictive_parity(&group_rates);
    let error_rate_balance = check_error_rate_balance(&group_rates);
    let conditions = theorem_conditions(&distribution);
    let mut both_undefined = Vec::new();
    if group_rates.len() == 2 {
        let (a, b) = (&group_rates[0].rates, &group_rates[1].rates);
        for (name, va, vb) in [
            ("ppv", &a.ppv, &b.ppv),
            ("npv", &a.npv, &b.npv),
            ("tpr", &a.tpr, &b.tpr),
            ("tnr", &a.tnr, &b.tnr),
        ] {
            if !va.is_defined() && !vb.is_defined() {
                both_undefined.push(name);
            }
        }
    }
    CounterexampleReport {
        distribution,
        algorithm,
        predictive_parity,
        error_rate_balance,
        conditions,
        both_undefined,
    }
}

/// Evaluates one distribution against every decision rule in the space.
fn evaluate_distribution(ctx: &Ctx, cells: &[u8]) -> DistOutcome {
    let k = ctx.k;
    let g = ctx.g;
    let m1 = |a: usize, x: usize| cells[ctx.mass_cell(a, x, 1)] as u64;
    let m0 = |a: usize, x: usize| cells[ctx.mass_cell(a, x, 0)] as u64;

    let mut s1 = [0u64; 2];
    let mut s0 = [0u64; 2];
    let mut perfect = true;
    for a in 0..2 {
        for x in 0..k {
            s1[a] += m1(a, x);
            s0[a] += m0(a, x);
            if m1(a, x) > 0 && m0(a, x) > 0 {
                perfect = false;
            }
        }
    }
    let tot = [s1[0] + s0[0], s1[1] + s0[1]];
    let present = [tot[0] > 0, tot[1] > 0];
    let equal_base = if present[0] && present[1] {
        s1[0] as u128 * tot[1] as u128 == s1[1] as u128 * tot[0] as u128
    } else {
        true // vacuous with a single populated group
    };

    let mut out = DistOutcome::default();
    for probs in ctx.algs.chunks_exact(2 * k) {
        out.examined += 1;
        let mut gc = [GroupCells::default(), GroupCells::default()];
        for (a, cells_acc) in gc.iter_mut().enumerate() {
            if !present[a] {
                continue;
            }
            for x in 0..k {
                let p = probs[a * k + x] as u64;
                let q = g - p;
                cells_acc.m11 += m1(a, x) * p;
                cells_acc.m01 += m0(a, x) * p;
                cells_acc.m10 += m1(a, x) * q;
                cells_acc.m00 += m0(a, x) * q;
            }
        }

        let (pp_ok, erb_ok, any_both_undefined) = if present[0] && present[1] {
            let (a, b) = (&gc[0], &gc[1]);
            let ppv = cmp_ratio(a.m11, a.m11 + a.m01, b.m11, b.m11 + b.m01);
            let npv = cmp_ratio(a.m00, a.m00 + a.m10, b.m00, b.m00 + b.m10);
            let tpr = cmp_ratio(a.m11, a.m11 + a.m10, b.m11, b.m11 + b.m10);
            let tnr = cmp_ratio(a.m00, a.m01 + a.m00, b.m00, b.m01 + b.m00);
            (
                cmp_holds(ppv) && cmp_holds(npv),
                cmp_holds(tpr) && cmp_holds(tnr),
                [ppv, npv, tpr, tnr].contains(&Cmp::BothUndefined),
            )
        } else {
            (true, true, false)
        };

        verify_instance_consistency(ctx, &gc, &tot, present, pp_ok, erb_ok);
        out.identity_checks += 1;

        if pp_ok && erb_ok {
            out.satisfied_both += 1;
            if perfect {
                out.perfect_predictor_count += 1;
            }
            if equal_base {
                out.equal_base_rates_count += 1;
            }
            match classify(perfect, equal_base, any_both_undefined) {
                InstanceClass::ConditionsHold => {}
                InstanceClass::ConventionArtifact => {
                    out.convention_artifact_count += 1;
                    if out.convention_artifacts.len() < REPORT_CAP {
                        out.convention_artifacts.push(build_report(ctx, cells, probs));
                    }
                }
                InstanceClass::Counterexample => {
                    out.counterexample_count += 1;
                    if out.counterexamples.len() < REPORT_CAP {
                        out.counterexamples.push(build_report(ctx, cells, probs));
                    }
                }
            }
        }
    }
    out
}

/// The always-on cross-check: recomputes the instance through the exact
/// rational pipeline (scaled-count path and mass-ratio path) and asserts
/// agreement with the integer verdicts as well as the internal rate
/// identities. Panics on disagreement, which would indicate a bug, never
/// a property of the data.
fn verify_instance_consistency(
    ctx: &Ctx,
    gc: &[GroupCells; 2],
    tot: &[u64; 2],
    present: [bool; 2],
    pp_ok: bool,
    erb_ok: bool,
) {
    let mut group_rates = Vec::new();
    for a in 0..2 {
        if !present[a] {
            continue;
        }
        let counts = GroupConfusion {
            group: ctx.group_labels[a].clone(),
            tpc: gc[a].m11,
            fpc: gc[a].m01,
            fnc: gc[a].m10,
            tnc: gc[a].m00,
        };
        let from_counts = rates(&counts);
        let denom = ctx.g * tot[a];
        let masses = GroupJointMasses {
            group: ctx.group_labels[a].clone(),
            tp_mass: crate::rational::rat_u(gc[a].m11, denom),
            fp_mass: crate::rational::rat_u(gc[a].m01, denom),
            fn_mass: crate::rational::rat_u(gc[a].m10, denom),
            tn_mass: crate::rational::rat_u(gc[a].m00, denom),
        };
        let from_masses = rates_from_masses(&masses);
        assert_eq!(
            from_counts, from_masses,
            "count path and mass path disagree for group {}",
            ctx.group_labels[a]
        );
        assert!(
            bayes_consistent(&from_counts),
            "rate bundle fails the product identities"
        );
        assert_ne!(
            fpr_identity(&from_counts),
            Some(false),
            "false-positive-rate identity failed"
        );
        group_rates.push(GroupRates {
            group: ctx.group_labels[a].clone(),
            rates: from_counts,
        });
    }
    let pp = check_predictive_parity(&group_rates);
    let erb = check_error_rate_balance(&group_rates);
    assert_eq!(
        pp.satisfied, pp_ok,
        "integer path and criteria path disagree on predictive parity"
    );
    assert_eq!(
        erb.satisfied, erb_ok,
        "integer path and criteria path disagree on error-rate balance"
    );
}

/// Generates all weak compositions of `total` into `parts` cells as a flat
/// row-major buffer.
fn weak_compositions(total: u32, parts: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut current = vec![0u8; parts];
    fn rec(remaining: u32, idx: usize, current: &mut [u8], out: &mut Vec<u8>) {
        if idx == current.len() - 1 {
            current[idx] = remaining as u8;
            out.extend_from_slice(current);
            return;
        }
        for v in 0..=remaining {
            current[idx] = v as u8;
            rec(remaining - v, idx + 1, current, out);
        }
    }
    rec(total, 0, &mut current, &mut out);
    out
}

/// Generates the full decision-rule grid as a flat row-major buffer:
/// every cell independently takes numerators 0..=g.
fn probability_grid(g: u32, cells: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut current = vec![0u8; cells];
    loop {
        out.extend_from_slice(&current);
        let mut i = 0;
        loop {
            if i == cells {
                return out;
            }
            if (current[i] as u32) < g {
                current[i] += 1;
                break;
            }
            current[i] = 0;
            i += 1;
        }
    }
}

fn make_ctx(bounds: &EnumBounds) -> Ctx {
    let k = bounds.x_arity as usize;
    let algs = probability_grid(bounds.prob_denominator, 2 * k);
    let alg_count = (algs.len() / (2 * k)) as u64;
    Ctx {
        k,
        g: bounds.prob_denominator as u64,
        d: bounds.mass_denominator as u64,
        group_labels: [Profile::single("a0"), Profile::single("a1")],
        x_labels: (0..k).map(|x| Profile::single(format!("x{x}"))).collect(),
        algs,
        alg_count,
    }
}

fn merge(bounds: &EnumBounds, ctx: &Ctx, outcomes: Vec<DistOutcome>) -> VerifySummary {
    let mut summary = VerifySummary {
        bounds: *bounds,
        distributions: outcomes.len() as u64,
        algorithms: ctx.alg_count,
        examined: 0,
        satisfied_both: 0,
        perfect_predictor_count: 0,
        equal_base_rates_count: 0,
        convention_artifact_count: 0,
        counterexample_count: 0,
        convention_artifacts: Vec::new(),
        counterexamples: Vec::new(),
        identity_checks: 0,
    };
    for o in outcomes {
        summary.examined += o.examined;
        summary.satisfied_both += o.satisfied_both;
        summary.perfect_predictor_count += o.perfect_predictor_count;
        summary.equal_base_rates_count += o.equal_base_rates_count;
        summary.convention_artifact_count += o.convention_artifact_count;
        summary.counterexample_count += o.counterexample_count;
        summary.identity_checks += o.identity_checks;
        for r in o.convention_artifacts {
            if summary.convention_artifacts.len() < REPORT_CAP {
                summary.convention_artifacts.push(r);
            }
        }
        for r in o.counterexamples {
            if summary.counterexamples.len() < REPORT_CAP {
                summary.counterexamples.push(r);
            }
        }
    }
    summary
}

/// Exhaustively verifies the incompatibility statement over the bounded
/// space. Returns an error without starting when the bounds are invalid or
/// the space exceeds [`MAX_ESTIMATED_PAIRS`].
pub fn enumerate_verify(bounds: &EnumBounds) -> Result<VerifySummary, EnumerationError> {
    enumerate_verify_with_progress(bounds, |_| {})
}

/// Like [`enumerate_verify`], invoking `progress` with the number of
/// distributions completed after every [`PROGRESS_STRIDE`] of them.
/// Work is split across distributions; each worker is pure and results are
/// merged in distribution order, so the outcome (including the order of
/// stored reports) does not depend on the worker count.
pub fn enumerate_verify_with_progress<F>(
    bounds: &EnumBounds,
    progress: F,
) -> Result<VerifySummary, EnumerationError>
where
    F: Fn(u64) + Sync,
{
    let pairs = estimate_cost(bounds)?;
    if pairs > MAX_ESTIMATED_PAIRS {
        return Err(EnumerationError::BoundsTooLarge {
            estimated_pairs: pairs,
            limit: MAX_ESTIMATED_PAIRS,
        });
    }
    let ctx = make_ctx(bounds);
    let stride = 4 * ctx.k;
    let dists = weak_compositions(bounds.mass_denominator, stride);

    #[cfg(feature = "parallel")]
    let outcomes: Vec<DistOutcome> = {
        use rayon::prelude::*;
        use std::sync::atomic::{AtomicU64, Ordering};
        let done = AtomicU64::new(0);
        dists
            .par_chunks_exact(stride)
            .map(|cells| {
                let o = evaluate_distribution(&ctx, cells);
                let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                if d % PROGRESS_STRIDE == 0 {
                    progress(d);
                }
                o
            })
            .collect()
    };

    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<DistOutcome> = {
        let mut done = 0u64;
        dists
            .chunks_exact(stride)
            .map(|cells| {
                let o = evaluate_distribution(&ctx, cells);
                done += 1;
                if done % PROGRESS_STRIDE == 0 {
                    progress(done);
                }
                o
            })
            .collect()
    };

    Ok(merge(bounds, &ctx, outcomes))
}

/// Single-threaded variant with identical semantics and output, kept
/// available regardless of the `parallel` feature for benchmarking and as
/// a fallback.
pub fn enumerate_verify_sequential(
    bounds: &EnumBounds,
) -> Result<VerifySummary, EnumerationError> {
    let pairs = estimate_cost(bounds)?;
    if pairs > MAX_ESTIMATED_PAIRS {
        return Err(EnumerationError::BoundsTooLarge {
            estimated_pairs: pairs,
            limit: MAX_ESTIMATED_PAIRS,
        });
    }
    let ctx = make_ctx(bounds);
    let stride = 4 * ctx.k;
    let dists = weak_compositions(bounds.mass_denominator, stride);
    let outcomes: Vec<DistOutcome> = dists
        .chunks_exact(stride)
        .map(|cells| evaluate_distribution(&ctx, cells))
        .collect();
    Ok(merge(bounds, &ctx, outcomes))
}

//! An employer-worker hiring model with a three-valued test signal.
//!
//! A worker is qualified with a gender-specific (or gender-shared)
//! probability. A test maps qualification to a score: qualified workers
//! score High with the test's precision and Muddled otherwise; unqualified
//! workers score Low with the test's precision and Muddled otherwise. The
//! employer hires to maximize expected payoff, which yields a posterior
//! threshold rule. The policy family studied here hires every High scorer,
//! no Low scorer, and hires Muddled scorers with a gender-specific
//! probability; all rates then have exact closed forms.
//!
//! Two testing technologies are covered: a gender-blind test (shared
//! precision, gender-specific prevalence) and a gender-sensitive test
//! (shared prevalence, gender-specific precision).

mod config;
mod feasibility;
mod simulate;

pub use config::{parse_scenario_json, parse_scenario_kv, ScenarioFile, ScenarioParseError};
pub use feasibility::{
    feasibility_search, FeasibilityError, FeasibilityOptions, FeasibilityReport, FeasiblePoint,
    Findings, PointOrigin,
};
pub use simulate::{simulate, simulate_sequential, SIMULATION_CHUNK};

use crate::core::{JointDistribution, Profile, RandomizedAlgorithm};
use crate::impossibility::GroupJointMasses;
use crate::metrics::RateBundle;
use crate::rational::{one, rational_to_json, zero, RateValue, Rational};
use num_traits::{One, Signed, Zero};
use serde_json::json;
use std::collections::BTreeMap;
use thiserror::Error;

/// The two sensitive-trait values of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    M,
    F,
}

impl Gender {
    pub const BOTH: [Gender; 2] = [Gender::M, Gender::F];

    pub fn label(&self) -> &'static str {
        match self {
            Gender::M => "m",
            Gender::F => "f",
        }
    }

    pub fn profile(&self) -> Profile {
        Profile::single(self.label())
    }
}

/// The three test scores. Their dataset labels are "1", "2", "3" in
/// increasing order of favorability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Score {
    Low,
    Muddled,
    High,
}

impl Score {
    pub const ALL: [Score; 3] = [Score::Low, Score::Muddled, Score::High];

    pub fn label(&self) -> &'static str {
        match self {
            Score::Low => "1",
            Score::Muddled => "2",
            Score::High => "3",
        }
    }

    pub fn profile(&self) -> Profile {
        Profile::single(self.label())
    }
}

/// Employer payoffs: hiring a qualified worker pays `b > 0`, hiring an
/// unqualified worker pays `omega < 0`, not hiring pays 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmployerPayoffs {
    b: Rational,
    omega: Rational,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PayoffError {
    #[error("hiring benefit must be positive, got {0}")]
    BenefitNotPositive(String),
    #[error("unqualified-hire payoff must be negative, got {0}")]
    PenaltyNotNegative(String),
}

impl EmployerPayoffs {
    pub fn new(b: Rational, omega: Rational) -> Result<Self, PayoffError> {
        if !b.is_positive() {
            return Err(PayoffError::BenefitNotPositive(b.to_string()));
        }
        if !omega.is_negative() {
            return Err(PayoffError::PenaltyNotNegative(omega.to_string()));
        }
        Ok(EmployerPayoffs { b, omega })
    }

    pub fn benefit(&self) -> &Rational {
        &self.b
    }

    pub fn penalty(&self) -> &Rational {
        &self.omega
    }

    /// The posterior belief above which hiring is optimal:
    /// `-omega / (b - omega)`, always strictly between 0 and 1.
    pub fn optimal_threshold(&self) -> Rational {
        -&self.omega / (&self.b - &self.omega)
    }
}

/// Hiring at a posterior of at least this value maximizes expected payoff.
pub fn optimal_threshold(p: &EmployerPayoffs) -> Rational {
    p.optimal_threshold()
}

/// The testing technology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Technology {
    /// Gender-blind test: one precision `phi`, gender-specific
    /// qualification prevalences.
    Prevalence {
        p_m: Rational,
        p_f: Rational,
        phi: Rational,
    },
    /// Gender-sensitive test: one prevalence `p_tilde`, gender-specific
    /// precisions.
    Precision {
        p_tilde: Rational,
        phi_m: Rational,
        phi_f: Rational,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("{field} must lie in [0, 1], got {value}")]
    ProbabilityRange { field: &'static str, value: String },
    #[error("gender split must lie strictly between 0 and 1, got {0}")]
    SplitRange(String),
}

fn check_unit(field: &'static str, v: &Rational) -> Result<(), ScenarioError> {
    if v.is_negative() || v > &one() {
        return Err(ScenarioError::ProbabilityRange {
            field,
            value: v.to_string(),
        });
    }
    Ok(())
}

/// A fully specified model instance: technology, payoffs and the marginal
/// probability of drawing gender m (used only by the joint distribution
/// and the simulator; every per-gender conclusion is independent of it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhelpsianScenario {
    technology: Technology,
    payoffs: EmployerPayoffs,
    /// P[gender = m], strictly inside (0, 1); defaults to 1/2.
    gender_split: Rational,
}

impl PhelpsianScenario {
    pub fn prevalence(
        p_m: Rational,
        p_f: Rational,
        phi: Rational,
        payoffs: EmployerPayoffs,
    ) -> Result<Self, ScenarioError> {
        check_unit("p_m", &p_m)?;
        check_unit("p_f", &p_f)?;
        check_unit("phi", &phi)?;
        Ok(PhelpsianScenario {
            technology: Technology::Prevalence { p_m, p_f, phi },
            payoffs,
            gender_split: crate::rational::rat(1, 2),
        })
    }

    pub fn precision(
        p_tilde: Rational,
        phi_m: Rational,
        phi_f: Rational,
        payoffs: EmployerPayoffs,
    ) -> Result<Self, ScenarioError> {
        check_unit("p_tilde", &p_tilde)?;
        check_unit("phi_m", &phi_m)?;
        check_unit("phi_f", &phi_f)?;
        Ok(PhelpsianScenario {
            technology: Technology::Precision {
                p_tilde,
                phi_m,
                phi_f,
            },
            payoffs,
            gender_split: crate::rational::rat(1, 2),
        })
    }

    pub fn with_gender_split(mut self, split: Rational) -> Result<Self, ScenarioError> {
        if !split.is_positive() || split >= one() {
            return Err(ScenarioError::SplitRange(split.to_string()));
        }
        self.gender_split = split;
        Ok(self)
    }

    pub fn technology(&self) -> &Technology {
        &self.technology
    }

    pub fn payoffs(&self) -> &EmployerPayoffs {
        &self.payoffs
    }

    /// P[gender = m].
    pub fn gender_split(&self) -> &Rational {
        &self.gender_split
    }

    pub fn variant_key(&self) -> &'static str {
        match self.technology {
            Technology::Prevalence { .. } => "prevalence",
            Technology::Precision { .. } => "precision",
        }
    }

    /// Qualification prevalence of one gender.
    pub fn prevalence_of(&self, g: Gender) -> &Rational {
        match (&self.technology, g) {
            (Technology::Prevalence { p_m, .. }, Gender::M) => p_m,
            (Technology::Prevalence { p_f, .. }, Gender::F) => p_f,
            (Technology::Precision { p_tilde, .. }, _) => p_tilde,
        }
    }

    /// Test precision experienced by one gender.
    pub fn precision_of(&self, g: Gender) -> &Rational {
        match (&self.technology, g) {
            (Technology::Prevalence { phi, .. }, _) => phi,
            (Technology::Precision { phi_m, .. }, Gender::M) => phi_m,
            (Technology::Precision { phi_f, .. }, Gender::F) => phi_f,
        }
    }

    /// True when some precision is exactly 0 or 1: the test is then either
    /// uninformative or perfect, and the headline comparative conclusions
    /// do not apply (everything remains computable).
    pub fn is_degenerate(&self) -> bool {
        Gender::BOTH.iter().any(|g| {
            let phi = self.precision_of(*g);
            phi.is_zero() || phi.is_one()
        })
    }

    /// P[gender].
    pub fn gender_mass(&self, g: Gender) -> Rational {
        match g {
            Gender::M => self.gender_split.clone(),
            Gender::F => one() - &self.gender_split,
        }
    }

    /// P[score | qualified, gender].
    pub fn score_given_qualified(&self, g: Gender, s: Score) -> Rational {
        let phi = self.precision_of(g);
        match s {
            Score::High => phi.clone(),
            Score::Muddled => one() - phi,
            Score::Low => zero(),
        }
    }

    /// P[score | unqualified, gender].
    pub fn score_given_unqualified(&self, g: Gender, s: Score) -> Rational {
        let phi = self.precision_of(g);
        match s {
            Score::Low => phi.clone(),
            Score::Muddled => one() - phi,
            Score::High => zero(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "variant": self.variant_key(),
            "B": rational_to_json(self.payoffs.benefit()),
            "omega": rational_to_json(self.payoffs.penalty()),
            "gender_split": rational_to_json(&self.gender_split),
        });
        match &self.technology {
            Technology::Prevalence { p_m, p_f, phi } => {
                v["p_m"] = rational_to_json(p_m);
                v["p_f"] = rational_to_json(p_f);
                v["phi"] = rational_to_json(phi);
            }
            Technology::Precision {
                p_tilde,
                phi_m,
                phi_f,
            } => {
                v["p_tilde"] = rational_to_json(p_tilde);
                v["phi_m"] = rational_to_json(phi_m);
                v["phi_f"] = rational_to_json(phi_f);
            }
        }
        v
    }
}

/// Posterior qualification probability after observing a score:
/// `P[y=1 | gender, score]` by Bayes' rule within the gender. The shared
/// `(1 - phi)` factors cancel at the Muddled score, leaving the prevalence
/// itself. Undefined exactly when the conditioning score has zero
/// probability for that gender (a degenerate precision or prevalence).
pub fn posterior(s: &PhelpsianScenario, g: Gender, x: Score) -> RateValue {
    let p = s.prevalence_of(g);
    let num = p * s.score_given_qualified(g, x);
    let den = &num + (one() - p) * s.score_given_unqualified(g, x);
    RateValue::ratio(num, den)
}

/// All defined posteriors as a belief table keyed by (gender, score).
pub fn posterior_table(s: &PhelpsianScenario) -> BTreeMap<(Profile, Profile), Rational> {
    let mut table = BTreeMap::new();
    for g in Gender::BOTH {
        for x in Score::ALL {
            if let RateValue::Defined(v) = posterior(s, g, x) {
                table.insert((g.profile(), x.profile()), v);
            }
        }
    }
    table
}

/// The probability of hiring a Muddled scorer, per gender. High scorers
/// are always hired and Low scorers never, so this pair pins down the
/// whole decision rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiringPolicy {
    pub d_m: Rational,
    pub d_f: Rational,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("{field} must lie in [0, 1], got {value}")]
    ProbabilityRange { field: &'static str, value: String },
}

impl HiringPolicy {
    pub fn new(d_m: Rational, d_f: Rational) -> Result<Self, PolicyError> {
        for (field, v) in [("d_m", &d_m), ("d_f", &d_f)] {
            if v.is_negative() || v > &one() {
                return Err(PolicyError::ProbabilityRange {
                    field,
                    value: v.to_string(),
                });
            }
        }
        Ok(HiringPolicy { d_m, d_f })
    }

    /// Same Muddled-score hire probability for both genders.
    pub fn uniform(d: Rational) -> Result<Self, PolicyError> {
        HiringPolicy::new(d.clone(), d)
    }

    pub fn for_gender(&self, g: Gender) -> &Rational {
        match g {
            Gender::M => &self.d_m,
            Gender::F => &self.d_f,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "d_m": rational_to_json(&self.d_m),
            "d_f": rational_to_json(&self.d_f),
        })
    }
}

/// The employer's payoff-maximizing policy within the studied family:
/// hire a Muddled scorer deterministically iff the posterior at that score
/// (the prevalence) reaches the optimal threshold. With a gender-blind
/// test and unequal prevalences this can differ across genders; with a
/// gender-sensitive test the Muddled posterior is the shared prevalence,
/// so the optimal rule never distinguishes genders.
pub fn optimal_policy(s: &PhelpsianScenario) -> HiringPolicy {
    let threshold = s.payoffs.optimal_threshold();
    let decide = |p: &Rational| -> Rational {
        if *p >= threshold {
            one()
        } else {
            zero()
        }
    };
    HiringPolicy {
        d_m: decide(s.prevalence_of(Gender::M)),
        d_f: decide(s.prevalence_of(Gender::F)),
    }
}

/// The threshold rule over an arbitrary belief table: hire exactly the
/// cells whose posterior is at least the optimal threshold (hire at exact
/// equality). Returns a deterministic 0/1 decision table on the same keys.
pub fn optimal_decision_rule(
    beliefs: &BTreeMap<(Profile, Profile), Rational>,
    p: &EmployerPayoffs,
) -> RandomizedAlgorithm {
    let threshold = p.optimal_threshold();
    let table: Vec<((Profile, Profile), Rational)> = beliefs
        .iter()
        .map(|(key, belief)| {
            let hire = if *belief >= threshold { one() } else { zero() };
            (key.clone(), hire)
        })
        .collect();
    RandomizedAlgorithm::new(table).expect("0/1 probabilities are valid")
}

/// The six rates of each gender under a policy, from exact closed forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelRates {
    pub m: RateBundle,
    pub f: RateBundle,
}

impl ModelRates {
    pub fn for_gender(&self, g: Gender) -> &RateBundle {
        match g {
            Gender::M => &self.m,
            Gender::F => &self.f,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let row = |b: &RateBundle| {
            json!({
                "tpr": b.tpr.to_json(),
                "tnr": b.tnr.to_json(),
                "ppv": b.ppv.to_json(),
                "npv": b.npv.to_json(),
                "base_rate": b.base_rate.to_json(),
                "hire_rate": b.hire_rate.to_json(),
            })
        };
        json!({"m": row(&self.m), "f": row(&self.f)})
    }
}

/// Closed-form rates for one gender. With prevalence `p`, precision `phi`
/// and Muddled hire probability `d`:
///
/// - TPR = phi + (1 - phi) d   (High always hired, Muddled with prob. d;
///   undefined when nobody is qualified)
/// - TNR = 1 - d (1 - phi)     (Low never hired; undefined when everybody
///   is qualified)
/// - hire rate = p TPR + (1 - p)(1 - TNR)
/// - PPV = p TPR / hire rate   (undefined when nobody is hired)
/// - NPV = (1 - p) TNR / (1 - hire rate)   (undefined when all are hired)
///
/// PPV and NPV are computed through the product identities rather than by
/// independent formulas, so Bayes consistency holds by construction.
pub fn gender_rates(s: &PhelpsianScenario, g: Gender, d: &Rational) -> RateBundle {
    let p = s.prevalence_of(g);
    let phi = s.precision_of(g);
    let tpr = phi + (one() - phi) * d;
    let tnr = one() - d * (one() - phi);
    let hire = p * &tpr + (one() - p) * (one() - &tnr);
    let ppv = RateValue::ratio(p * &tpr, hire.clone());
    let npv = RateValue::ratio((one() - p) * &tnr, one() - &hire);
    // The closed forms for TPR/TNR are the algebraic limits; the rates
    // themselves condition on being (un)qualified, so a gender with no
    // qualified (or no unqualified) mass has no defined value there.
    let tpr = RateValue::ratio(p * tpr, p.clone());
    let tnr = RateValue::ratio((one() - p) * tnr, one() - p);
    RateBundle {
        tpr,
        tnr,
        ppv,
        npv,
        base_rate: RateValue::Defined(p.clone()),
        hire_rate: RateValue::Defined(hire),
    }
}

/// Exact rates of both genders under a policy.
pub fn model_rates(s: &PhelpsianScenario, pol: &HiringPolicy) -> ModelRates {
    ModelRates {
        m: gender_rates(s, Gender::M, &pol.d_m),
        f: gender_rates(s, Gender::F, &pol.d_f),
    }
}

/// Closed-form per-gender joint masses P[y, delta | gender] under a
/// policy, sorted by group label ("f" before "m").
pub fn group_joint_masses(s: &PhelpsianScenario, pol: &HiringPolicy) -> Vec<GroupJointMasses> {
    let mut rows: Vec<GroupJointMasses> = Gender::BOTH
        .iter()
        .map(|g| {
            let p = s.prevalence_of(*g);
            let d = pol.for_gender(*g);
            let phi = s.precision_of(*g);
            let tpr = phi + (one() - phi) * d;
            let tnr = one() - d * (one() - phi);
            GroupJointMasses {
                group: g.profile(),
                tp_mass: p * &tpr,
                fp_mass: (one() - p) * (one() - &tnr),
                fn_mass: p * (one() - &tpr),
                tn_mass: (one() - p) * &tnr,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.group.cmp(&b.group));
    rows
}

/// The joint distribution over (gender, score, qualified) the scenario
/// induces. Zero-mass cells are omitted.
pub fn joint_distribution(s: &PhelpsianScenario) -> JointDistribution {
    let mut masses = Vec::new();
    for g in Gender::BOTH {
        let w = s.gender_mass(g);
        let p = s.prevalence_of(g);
        for x in Score::ALL {
            let hi = &w * p * s.score_given_qualified(g, x);
            if !hi.is_zero() {
                masses.push(((g.profile(), x.profile(), true), hi));
            }
            let lo = &w * (one() - p) * s.score_given_unqualified(g, x);
            if !lo.is_zero() {
                masses.push(((g.profile(), x.profile(), false), lo));
            }
        }
    }
    JointDistribution::from_masses(masses).expect("scenario masses sum to one")
}

/// The decision table a policy induces: hire probability 0 at Low, the
/// gender's Muddled probability at Muddled, 1 at High.
pub fn hiring_algorithm(pol: &HiringPolicy) -> RandomizedAlgorithm {
    let mut table = Vec::new();
    for g in Gender::BOTH {
        for x in Score::ALL {
            let prob = match x {
                Score::Low => zero(),
                Score::Muddled => pol.for_gender(g).clone(),
                Score::High => one(),
            };
            table.push(((g.profile(), x.profile()), prob));
        }
    }
    RandomizedAlgorithm::new(table).expect("policy probabilities are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impossibility::decompose_rates;
    use crate::rational::rat;

    fn payoffs(b: i64, omega: i64) -> EmployerPayoffs {
        EmployerPayoffs::new(rat(b, 1), rat(omega, 1)).unwrap()
    }

    fn prevalence_scenario(pm: (i64, i64), pf: (i64, i64), phi: (i64, i64)) -> PhelpsianScenario {
        PhelpsianScenario::prevalence(
            rat(pm.0, pm.1),
            rat(pf.0, pf.1),
            rat(phi.0, phi.1),
            payoffs(1, -2),
        )
        .unwrap()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(payoffs(1, -2).optimal_threshold(), rat(2, 3));
        assert_eq!(payoffs(5, -5).optimal_threshold(), rat(1, 2));
        assert_eq!(payoffs(3, -1).optimal_threshold(), rat(1, 4));
        // strictly interior for any valid payoffs
        let t = EmployerPayoffs::new(rat(1, 100), rat(-999, 1))
            .unwrap()
            .optimal_threshold();
        assert!(t > rat(0, 1) && t < rat(1, 1));
    }

    #[test]
    fn payoff_validation() {
        assert!(EmployerPayoffs::new(rat(0, 1), rat(-1, 1)).is_err());
        assert!(EmployerPayoffs::new(rat(-1, 1), rat(-1, 1)).is_err());
        assert!(EmployerPayoffs::new(rat(1, 1), rat(0, 1)).is_err());
        assert!(EmployerPayoffs::new(rat(1, 1), rat(1, 1)).is_err());
    }

    #[test]
    fn posterior_cases() {
        let s = prevalence_scenario((3, 10), (3, 5), (1, 2));
        assert_eq!(posterior(&s, Gender::M, Score::Low), RateValue::Defined(rat(0, 1)));
        assert_eq!(
            posterior(&s, Gender::M, Score::Muddled),
            RateValue::Defined(rat(3, 10))
        );
        assert_eq!(posterior(&s, Gender::M, Score::High), RateValue::Defined(rat(1, 1)));
        assert_eq!(
            posterior(&s, Gender::F, Score::Muddled),
            RateValue::Defined(rat(3, 5))
        );

        let s2 = PhelpsianScenario::precision(
            rat(3, 5),
            rat(1, 10),
            rat(9, 10),
            payoffs(1, -2),
        )
        .unwrap();
        assert_eq!(
            posterior(&s2, Gender::F, Score::Muddled),
            RateValue::Defined(rat(3, 5))
        );
        assert_eq!(
            posterior(&s2, Gender::M, Score::Muddled),
            RateValue::Defined(rat(3, 5))
        );
    }

    #[test]
    fn posterior_cancellation_survives_extreme_precision() {
        // the (1 - phi) factors cancel for every phi < 1
        for phi in [(1i64, 1000i64), (999, 1000), (1, 2)] {
            let s = prevalence_scenario((2, 7), (3, 7), phi);
            assert_eq!(
                posterior(&s, Gender::M, Score::Muddled),
                RateValue::Defined(rat(2, 7))
            );
        }
        // phi = 1: nobody scores Muddled, so the posterior has an empty
        // conditioning event
        let s = prevalence_scenario((2, 7), (3, 7), (1, 1));
        assert_eq!(posterior(&s, Gender::M, Score::Muddled), RateValue::Undefined);
    }

    #[test]
    fn optimal_policy_prevalence_can_split_genders() {
        // threshold 2/3 falls between the prevalences
        let s = prevalence_scenario((1, 2), (4, 5), (1, 2));
        let pol = optimal_policy(&s);
        assert_eq!(pol.d_m, rat(0, 1));
        assert_eq!(pol.d_f, rat(1, 1));
    }

    #[test]
    fn optimal_policy_identical_groups_and_boundary() {
        let s = prevalence_scenario((4, 5), (4, 5), (1, 2));
        let pol = optimal_policy(&s);
        assert_eq!(pol.d_m, rat(1, 1));
        assert_eq!(pol.d_f, rat(1, 1));
        // exact threshold equality hires
        let s2 = prevalence_scenario((2, 3), (1, 3), (1, 2));
        assert_eq!(optimal_policy(&s2).d_m, rat(1, 1));
        assert_eq!(optimal_policy(&s2).d_f, rat(0, 1));
    }

    #[test]
    fn optimal_policy_precision_never_splits() {
        for p in [(1i64, 3i64), (2, 3), (9, 10)] {
            let s = PhelpsianScenario::precision(
                rat(p.0, p.1),
                rat(3, 10),
                rat(7, 10),
                payoffs(1, -2),
            )
            .unwrap();
            let pol = optimal_policy(&s);
            assert_eq!(pol.d_m, pol.d_f);
        }
    }

    #[test]
    fn decision_rule_reproduces_reference_table() {
        // Joint with posteriors: (m,hi)=4/5, (m,lo)=1/5, (f,hi)=1/2,
        // (f,lo)=1/2; threshold 2/3 hires exactly (m,hi).
        let joint = JointDistribution::from_masses(vec![
            ((Profile::single("m"), Profile::single("hi"), true), rat(4, 20)),
            ((Profile::single("m"), Profile::single("hi"), false), rat(1, 20)),
            ((Profile::single("m"), Profile::single("lo"), true), rat(1, 20)),
            ((Profile::single("m"), Profile::single("lo"), false), rat(4, 20)),
            ((Profile::single("f"), Profile::single("hi"), true), rat(2, 20)),
            ((Profile::single("f"), Profile::single("hi"), false), rat(2, 20)),
            ((Profile::single("f"), Profile::single("lo"), true), rat(3, 20)),
            ((Profile::single("f"), Profile::single("lo"), false), rat(3, 20)),
        ])
        .unwrap();
        let beliefs = joint.posteriors();
        let rule = optimal_decision_rule(&beliefs, &payoffs(1, -2));
        for ((a, x), p) in rule.table() {
            let expect = if a == &Profile::single("m") && x == &Profile::single("hi") {
                rat(1, 1)
            } else {
                rat(0, 1)
            };
            assert_eq!(p, &expect, "cell ({a}, {x})");
        }
    }

    #[test]
    fn decision_rule_extremes() {
        let s = prevalence_scenario((1, 2), (1, 2), (1, 2));
        let beliefs = posterior_table(&s);
        // threshold below every posterior: hire everyone
        let all = optimal_decision_rule(&beliefs, &EmployerPayoffs::new(rat(1000, 1), rat(-1, 1000)).unwrap());
        // lowest posterior is 0 at Low; threshold is tiny but positive, so
        // Low scorers are still rejected; Muddled (1/2) and High (1) hired
        for ((_, x), p) in all.table() {
            let expect = if x == &Score::Low.profile() { rat(0, 1) } else { rat(1, 1) };
            assert_eq!(p, &expect);
        }
        // boundary equality hires: threshold exactly 1/2 = Muddled posterior
        let eq = optimal_decision_rule(&beliefs, &payoffs(1, -1));
        assert_eq!(eq.table()[&(Gender::M.profile(), Score::Muddled.profile())], rat(1, 1));
    }

    #[test]
    fn closed_form_rates_reference_values() {
        let s = prevalence_scenario((1, 2), (1, 2), (1, 2));
        let r = model_rates(&s, &HiringPolicy::uniform(rat(1, 2)).unwrap());
        for b in [&r.m, &r.f] {
            assert_eq!(b.tpr, RateValue::Defined(rat(3, 4)));
            assert_eq!(b.tnr, RateValue::Defined(rat(3, 4)));
            assert_eq!(b.ppv, RateValue::Defined(rat(3, 4)));
            assert_eq!(b.npv, RateValue::Defined(rat(3, 4)));
            assert_eq!(b.hire_rate, RateValue::Defined(rat(1, 2)));
        }
    }

    #[test]
    fn rates_at_policy_corners() {
        let s = prevalence_scenario((2, 5), (3, 5), (1, 2));
        let r0 = model_rates(&s, &HiringPolicy::uniform(rat(0, 1)).unwrap());
        // d=0: only High scorers hired, all of them qualified
        assert_eq!(r0.m.tpr, RateValue::Defined(rat(1, 2)));
        assert_eq!(r0.m.tnr, RateValue::Defined(rat(1, 1)));
        assert_eq!(r0.m.ppv, RateValue::Defined(rat(1, 1)));
        let r1 = model_rates(&s, &HiringPolicy::uniform(rat(1, 1)).unwrap());
        // d=1: only Low scorers rejected, all of them unqualified
        assert_eq!(r1.m.tnr, RateValue::Defined(rat(1, 2)));
        assert_eq!(r1.m.tpr, RateValue::Defined(rat(1, 1)));
        assert_eq!(r1.m.npv, RateValue::Defined(rat(1, 1)));
    }

    #[test]
    fn undefined_rate_paths() {
        // phi = 0 and d = 0: nobody is ever hired, PPV undefined
        let s = prevalence_scenario((1, 2), (1, 2), (0, 1));
        let r = model_rates(&s, &HiringPolicy::uniform(rat(0, 1)).unwrap());
        assert_eq!(r.m.ppv, RateValue::Undefined);
        assert_eq!(r.m.hire_rate, RateValue::Defined(rat(0, 1)));
        // phi = 0 and d = 1: everybody hired, NPV undefined
        let r1 = model_rates(&s, &HiringPolicy::uniform(rat(1, 1)).unwrap());
        assert_eq!(r1.m.npv, RateValue::Undefined);
        assert!(s.is_degenerate());
    }

    #[test]
    fn tpr_tnr_do_not_depend_on_prevalence_in_blind_variant() {
        let d = rat(3, 7);
        let a = prevalence_scenario((1, 10), (9, 10), (2, 5));
        let b = prevalence_scenario((1, 2), (1, 3), (2, 5));
        let (ra, rb) = (
            model_rates(&a, &HiringPolicy::uniform(d.clone()).unwrap()),
            model_rates(&b, &HiringPolicy::uniform(d).unwrap()),
        );
        assert_eq!(ra.m.tpr, rb.f.tpr);
        assert_eq!(ra.f.tnr, rb.m.tnr);
    }

    #[test]
    fn closed_forms_match_generic_decomposition() {
        // Two independent paths: closed forms vs pushing the scenario's
        // joint distribution through the generic machinery.
        let cases: Vec<(PhelpsianScenario, HiringPolicy)> = vec![
            (
                prevalence_scenario((2, 5), (3, 5), (1, 2)),
                HiringPolicy::new(rat(1, 3), rat(3, 4)).unwrap(),
            ),
            (
                PhelpsianScenario::precision(rat(1, 2), rat(3, 10), rat(7, 10), payoffs(1, -2))
                    .unwrap(),
                HiringPolicy::new(rat(9, 100), rat(49, 100)).unwrap(),
            ),
            (
                prevalence_scenario((0, 1), (1, 1), (1, 2)),
                HiringPolicy::new(rat(1, 2), rat(1, 2)).unwrap(),
            ),
        ];
        for (s, pol) in cases {
            let joint = joint_distribution(&s);
            let alg = hiring_algorithm(&pol);
            let rows = decompose_rates(&joint, &alg).unwrap();
            let rates = model_rates(&s, &pol);
            let masses = group_joint_masses(&s, &pol);
            assert_eq!(rows.len(), 2);
            for ((m_decomposed, b_decomposed), m_closed) in rows.iter().zip(masses.iter()) {
                assert_eq!(m_decomposed, m_closed);
                let g = if m_closed.group == Gender::M.profile() {
                    Gender::M
                } else {
                    Gender::F
                };
                assert_eq!(b_decomposed, rates.for_gender(g));
            }
        }
    }

    #[test]
    fn uneven_gender_split_leaves_per_gender_rates_unchanged() {
        let s = prevalence_scenario((2, 5), (3, 5), (1, 2));
        let skewed = s.clone().with_gender_split(rat(1, 10)).unwrap();
        let pol = HiringPolicy::new(rat(1, 3), rat(2, 3)).unwrap();
        assert_eq!(model_rates(&s, &pol), model_rates(&skewed, &pol));
        // and the joint distribution still decomposes to the same rates
        let rows = decompose_rates(&joint_distribution(&skewed), &hiring_algorithm(&pol)).unwrap();
        assert_eq!(rows[1].1, model_rates(&skewed, &pol).m);
    }

    #[test]
    fn scenario_validation() {
        assert!(PhelpsianScenario::prevalence(rat(3, 2), rat(1, 2), rat(1, 2), payoffs(1, -2)).is_err());
        assert!(PhelpsianScenario::prevalence(rat(1, 2), rat(-1, 2), rat(1, 2), payoffs(1, -2)).is_err());
        assert!(PhelpsianScenario::precision(rat(1, 2), rat(1, 2), rat(3, 2), payoffs(1, -2)).is_err());
        assert!(prevalence_scenario((1, 2), (1, 2), (1, 2))
            .with_gender_split(rat(1, 1))
            .is_err());
        assert!(HiringPolicy::new(rat(1, 2), rat(5, 4)).is_err());
    }

    #[test]
    fn joint_distribution_masses_are_consistent() {
        let s = prevalence_scenario((2, 5), (3, 5), (1, 2))
            .with_gender_split(rat(1, 3))
            .unwrap();
        let j = joint_distribution(&s);
        assert_eq!(j.group_mass(&Gender::M.profile()), rat(1, 3));
        assert_eq!(
            j.base_rate(&Gender::F.profile()),
            RateValue::Defined(rat(3, 5))
        );
        // Muddled cell mass for m: 1/3 * (2/5 * 1/2 + 3/5 * 1/2) = 1/6
        assert_eq!(
            j.cell_mass(&Gender::M.profile(), &Score::Muddled.profile()),
            rat(1, 6)
        );
        // posterior at Muddled equals prevalence
        assert_eq!(
            j.posterior(&Gender::M.profile(), &Score::Muddled.profile()),
            RateValue::Defined(rat(2, 5))
        );
    }
}

//! Randomized invariants: monotonicity of the closed-form rates,
//! exactness of the posterior cancellation, agreement between the two
//! feature-conditioned checks, identity preservation on arbitrary
//! confusion counts, serialization round-trips, and relabeling
//! invariance.

use paritylens::core::{
    ingest_csv, ingest_json, to_json, write_csv, ColumnRoles, Dataset, Dimension,
    IndividualRecord, Schema,
};
use paritylens::fairness::{
    audit_dataset, check_anti_classification, check_conditional_demographic_parity,
    dataset_group_rates, Criterion,
};
use paritylens::metrics::{bayes_consistent, confusion_by_group, fpr_identity, rates, GroupConfusion};
use paritylens::rational::{rat, RateValue, Rational};
use paritylens::sdmodel::{
    gender_rates, posterior, EmployerPayoffs, Gender, PhelpsianScenario, Score,
};
use proptest::prelude::*;

// ---- strategies ----------------------------------------------------------

/// A rational in the open unit interval.
fn open_unit() -> impl Strategy<Value = Rational> {
    (2i64..=24, 1i64..).prop_flat_map(|(den, _)| {
        (Just(den), 1..den).prop_map(|(den, num)| rat(num, den))
    })
}

/// A rational in the closed unit interval.
fn closed_unit() -> impl Strategy<Value = Rational> {
    (1i64..=24).prop_flat_map(|den| (0..=den).prop_map(move |num| rat(num, den)))
}

fn payoffs() -> impl Strategy<Value = EmployerPayoffs> {
    (1i64..=6, 1i64..=6).prop_map(|(b, w)| {
        EmployerPayoffs::new(rat(b, 1), rat(-w, 1)).expect("positive benefit, negative penalty")
    })
}

fn blind_scenario() -> impl Strategy<Value = PhelpsianScenario> {
    (open_unit(), open_unit(), open_unit(), payoffs()).prop_map(|(p_m, p_f, phi, pay)| {
        PhelpsianScenario::prevalence(p_m, p_f, phi, pay).expect("valid scenario")
    })
}

fn split_scenario() -> impl Strategy<Value = PhelpsianScenario> {
    (open_unit(), open_unit(), open_unit(), payoffs()).prop_map(|(p, phi_m, phi_f, pay)| {
        PhelpsianScenario::precision(p, phi_m, phi_f, pay).expect("valid scenario")
    })
}

/// A dataset over two groups and two feature values with arbitrary cell
/// counts (sixteen cells; at least one non-zero count is enforced).
fn two_group_dataset() -> impl Strategy<Value = Dataset> {
    proptest::collection::vec(0u64..6, 16).prop_filter_map("at least one record", |counts| {
        if counts.iter().all(|&c| c == 0) {
            return None;
        }
        let schema = Schema {
            sensitive: vec![Dimension::new("g", vec!["a".into(), "b".into()])],
            permissible: vec![Dimension::new("x", vec!["lo".into(), "hi".into()])],
            outcome: "y".into(),
            decision: "d".into(),
        };
        let mut records = Vec::new();
        let mut idx = 0;
        for g in 0..2u16 {
            for x in 0..2u16 {
                for outcome in [false, true] {
                    for decision in [false, true] {
                        let count = counts[idx];
                        idx += 1;
                        if count > 0 {
                            records.push(IndividualRecord {
                                sensitive: vec![g],
                                permissible: vec![x],
                                outcome,
                                decision,
                                count,
                            });
                        }
                    }
                }
            }
        }
        Some(Dataset::from_parts(schema, records).expect("valid records"))
    })
}

fn confusion() -> impl Strategy<Value = GroupConfusion> {
    (0u64..500, 0u64..500, 0u64..500, 0u64..500).prop_map(|(tpc, fpc, fnc, tnc)| GroupConfusion {
        group: paritylens::core::Profile::single("g"),
        tpc,
        fpc,
        fnc,
        tnc,
    })
}

// ---- helpers --------------------------------------------------------------

fn defined(v: &RateValue) -> &Rational {
    v.as_defined().expect("rate defined for this input")
}

/// Semantic dataset equality: same totals, same groups, same joint mass
/// function, same empirical decision table.
fn same_population(a: &Dataset, b: &Dataset) {
    assert_eq!(a.n(), b.n());
    assert_eq!(a.groups(), b.groups());
    assert_eq!(a.joint_distribution(), b.joint_distribution());
    assert_eq!(
        a.empirical_algorithm().table(),
        b.empirical_algorithm().table()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // The muddled signal carries no information beyond the prior: its
    // posterior is exactly the prevalence parameter, for any payoffs and
    // any interior precision.
    #[test]
    fn muddled_posterior_is_prevalence(s in blind_scenario()) {
        prop_assert_eq!(
            posterior(&s, Gender::M, Score::Muddled),
            RateValue::Defined(s.prevalence_of(Gender::M).clone())
        );
        prop_assert_eq!(
            posterior(&s, Gender::F, Score::Muddled),
            RateValue::Defined(s.prevalence_of(Gender::F).clone())
        );
    }

    // In the shared-prevalence variant the muddled posterior equals that
    // shared prevalence for both genders, however unequal the precisions.
    #[test]
    fn split_variant_muddled_posterior_is_shared_prevalence(s in split_scenario()) {
        for g in Gender::BOTH {
            prop_assert_eq!(
                posterior(&s, g, Score::Muddled),
                RateValue::Defined(s.prevalence_of(g).clone())
            );
        }
    }

    // Low and High scores are fully revealing regardless of parameters.
    #[test]
    fn extreme_scores_are_certain(s in blind_scenario()) {
        for g in Gender::BOTH {
            prop_assert_eq!(posterior(&s, g, Score::Low), RateValue::Defined(rat(0, 1)));
            prop_assert_eq!(posterior(&s, g, Score::High), RateValue::Defined(rat(1, 1)));
        }
    }

    // Raising the muddled hire probability hires more of everyone: TPR and
    // the hire rate rise strictly, TNR falls strictly, precision of the
    // hired pool (PPV) falls strictly and of the rejected pool (NPV) rises
    // strictly. Exact rational comparisons.
    #[test]
    fn rates_are_strictly_monotone_in_hire_probability(
        s in blind_scenario(),
        d_lo in closed_unit(),
        d_hi in closed_unit(),
    ) {
        prop_assume!(d_lo < d_hi);
        for g in Gender::BOTH {
            let lo = gender_rates(&s, g, &d_lo);
            let hi = gender_rates(&s, g, &d_hi);
            prop_assert!(defined(&lo.tpr) < defined(&hi.tpr));
            prop_assert!(defined(&lo.tnr) > defined(&hi.tnr));
            prop_assert!(defined(&lo.hire_rate) < defined(&hi.hire_rate));
            // PPV at d=0 is 1 (only certainly-qualified hired); defined
            // everywhere because the High signal has positive mass.
            prop_assert!(defined(&lo.ppv) > defined(&hi.ppv));
            if hi.npv.is_defined() {
                // NPV is undefined at d=1 only when everyone is hired.
                prop_assert!(defined(&lo.npv) < defined(&hi.npv));
            }
        }
    }

    // A sharper signal improves both posterior-quality rates at any fixed
    // interior policy.
    #[test]
    fn predictive_values_rise_with_precision(
        p in open_unit(),
        phi_lo in open_unit(),
        phi_hi in open_unit(),
        d in open_unit(),
        pay in payoffs(),
    ) {
        prop_assume!(phi_lo < phi_hi);
        let worse = PhelpsianScenario::precision(p.clone(), phi_lo.clone(), phi_lo, pay.clone())
            .expect("valid scenario");
        let better = PhelpsianScenario::precision(p, phi_hi.clone(), phi_hi, pay)
            .expect("valid scenario");
        for g in Gender::BOTH {
            let w = gender_rates(&worse, g, &d);
            let b = gender_rates(&better, g, &d);
            prop_assert!(defined(&w.ppv) < defined(&b.ppv));
            prop_assert!(defined(&w.npv) < defined(&b.npv));
        }
    }

    // The feature-conditioned demographic-parity check and the
    // anti-classification check agree on every decision table: they test
    // the same equality, cell by cell.
    #[test]
    fn conditioned_parity_agrees_with_anti_classification(ds in two_group_dataset()) {
        let alg = ds.empirical_algorithm();
        let ac = check_anti_classification(&alg);
        let cdp = check_conditional_demographic_parity(&alg);
        prop_assert_eq!(ac.satisfied, cdp.satisfied);
        prop_assert_eq!(ac.gap, cdp.gap);
        prop_assert_eq!(ac.criterion, Criterion::AntiClassification);
        prop_assert_eq!(cdp.criterion, Criterion::CondDemographicParity);
    }

    // Both product identities hold for every confusion table, whatever the
    // counts (undefined rates simply leave an identity unevaluated).
    #[test]
    fn identities_hold_on_any_confusion(c in confusion()) {
        let b = rates(&c);
        prop_assert!(bayes_consistent(&b));
        prop_assert_ne!(fpr_identity(&b), Some(false));
    }

    // Datasets survive a CSV round-trip with the same population content.
    #[test]
    fn csv_round_trip(ds in two_group_dataset()) {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).expect("CSV writes");
        let roles = ColumnRoles {
            sensitive: vec!["g".into()],
            permissible: vec!["x".into()],
            outcome: "y".into(),
            decision: "d".into(),
        };
        let back = ingest_csv(buf.as_slice(), &roles).expect("CSV parses");
        same_population(&ds, &back);
    }

    // ... and a JSON round-trip.
    #[test]
    fn json_round_trip(ds in two_group_dataset()) {
        let text = serde_json::to_string(&to_json(&ds)).expect("JSON writes");
        let back = ingest_json(text.as_bytes()).expect("JSON parses");
        same_population(&ds, &back);
    }

    // Renaming every label consistently changes no verdict: satisfaction
    // and gap depend only on the numbers.
    #[test]
    fn verdicts_invariant_under_relabeling(ds in two_group_dataset()) {
        let renamed_schema = Schema {
            sensitive: vec![Dimension::new(
                "group_code",
                vec!["north".into(), "south".into()],
            )],
            permissible: vec![Dimension::new(
                "band",
                vec!["first".into(), "second".into()],
            )],
            outcome: "eligible".into(),
            decision: "selected".into(),
        };
        let renamed = Dataset::from_parts(renamed_schema, ds.records().to_vec())
            .expect("same shape, new labels");
        let original = audit_dataset(&ds);
        let relabeled = audit_dataset(&renamed);
        prop_assert_eq!(original.len(), relabeled.len());
        for (a, b) in original.iter().zip(relabeled.iter()) {
            prop_assert_eq!(a.criterion, b.criterion);
            prop_assert_eq!(a.satisfied, b.satisfied, "criterion {}", a.criterion.key());
            prop_assert_eq!(&a.gap, &b.gap);
        }
    }

    // With a single group present, every pairwise criterion is vacuously
    // satisfied.
    #[test]
    fn single_group_is_vacuously_fair(counts in proptest::collection::vec(0u64..6, 8)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let schema = Schema {
            sensitive: vec![Dimension::new("g", vec!["only".into()])],
            permissible: vec![Dimension::new("x", vec!["lo".into(), "hi".into()])],
            outcome: "y".into(),
            decision: "d".into(),
        };
        let mut records = Vec::new();
        let mut idx = 0;
        for x in 0..2u16 {
            for outcome in [false, true] {
                for decision in [false, true] {
                    let count = counts[idx];
                    idx += 1;
                    if count > 0 {
                        records.push(IndividualRecord {
                            sensitive: vec![0],
                            permissible: vec![x],
                            outcome,
                            decision,
                            count,
                        });
                    }
                }
            }
        }
        let ds = Dataset::from_parts(schema, records).expect("valid records");
        for verdict in audit_dataset(&ds) {
            prop_assert!(verdict.satisfied, "criterion {}", verdict.criterion.key());
            prop_assert!(verdict.witness.is_none());
        }
    }

    // The gap reported with a witnessed violation is exactly the absolute
    // difference of the two witnessed values.
    #[test]
    fn witness_gap_matches_reported_values(ds in two_group_dataset()) {
        for verdict in audit_dataset(&ds) {
            if let Some(w) = &verdict.witness {
                if let (Some(a), Some(b)) = (w.value_a.as_defined(), w.value_b.as_defined()) {
                    let diff = if a > b { a - b } else { b - a };
                    prop_assert!(
                        diff <= verdict.gap,
                        "{}: witness difference {} exceeds gap {}",
                        verdict.criterion.key(),
                        diff,
                        verdict.gap
                    );
                }
            }
        }
    }

    // Per-group empirical rate bundles always satisfy the identities.
    #[test]
    fn dataset_rates_satisfy_identities(ds in two_group_dataset()) {
        for c in confusion_by_group(&ds) {
            let b = rates(&c);
            prop_assert!(bayes_consistent(&b));
            prop_assert_ne!(fpr_identity(&b), Some(false));
        }
        // The audit's group-rate bundles match the per-confusion ones.
        let bundles = dataset_group_rates(&ds);
        prop_assert_eq!(bundles.len(), confusion_by_group(&ds).len());
    }
}

//! Per-group confusion matrices and the six conditional rates, computed in
//! exact rational arithmetic from integer counts.
//!
//! Rates whose conditioning event is empty are [`RateValue::Undefined`]
//! rather than 0/0. Two internal-consistency identities are provided as
//! checkable functions: the product identity linking predictive values to
//! error rates through the base and hire rates, and the cross-multiplied
//! false-positive-rate identity relating FPR to PPV, TPR and the base rate
//! without any division.

use crate::core::{Dataset, Profile};
use crate::rational::{decimal6, rat_u, RateValue, Rational};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::HashMap;

/// Confusion-matrix counts for one sensitive group.
///
/// Counts follow the convention: decision = 1 and outcome = 1 is a true
/// positive (`tpc`); decision = 1, outcome = 0 a false positive (`fpc`);
/// decision = 0, outcome = 1 a false negative (`fnc`); decision = 0,
/// outcome = 0 a true negative (`tnc`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupConfusion {
    pub group: Profile,
    pub tpc: u64,
    pub fpc: u64,
    pub fnc: u64,
    pub tnc: u64,
}

impl GroupConfusion {
    pub fn total(&self) -> u64 {
        self.tpc + self.fpc + self.fnc + self.tnc
    }
}

/// The six group-conditional rates, each an exact rational or undefined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateBundle {
    /// True positive rate `P[d=1 | y=1]`.
    pub tpr: RateValue,
    /// True negative rate `P[d=0 | y=0]`.
    pub tnr: RateValue,
    /// Positive predictive value `P[y=1 | d=1]`.
    pub ppv: RateValue,
    /// Negative predictive value `P[y=0 | d=0]`.
    pub npv: RateValue,
    /// Base rate `P[y=1]` within the group.
    pub base_rate: RateValue,
    /// Hire (selection) rate `P[d=1]` within the group.
    pub hire_rate: RateValue,
}

impl RateBundle {
    /// False positive rate `1 - TNR`, when defined.
    pub fn fpr(&self) -> RateValue {
        match &self.tnr {
            RateValue::Defined(t) => RateValue::Defined(Rational::one() - t),
            RateValue::Undefined => RateValue::Undefined,
        }
    }

    /// Reconstructs the four joint masses `P[y, d]` from the bundle:
    /// `(P[y=1,d=1], P[y=1,d=0], P[y=0,d=1], P[y=0,d=0])`.
    ///
    /// Cells conditioned on an empty event contribute zero mass (an
    /// undefined TPR can only occur when the base rate is zero, so the
    /// `y = 1` masses vanish). Returns `None` only when the base rate itself
    /// is undefined, i.e. the group is empty.
    pub fn joint_masses(&self) -> Option<[Rational; 4]> {
        let base = self.base_rate.as_defined()?.clone();
        let comp = Rational::one() - &base;
        let scale = |share: &RateValue, weight: &Rational| -> Rational {
            if weight.is_zero() {
                Rational::zero()
            } else {
                // weight > 0 implies the conditional is defined
                share
                    .as_defined()
                    .map(|s| s * weight)
                    .unwrap_or_else(Rational::zero)
            }
        };
        let p11 = scale(&self.tpr, &base);
        let p10 = if base.is_zero() {
            Rational::zero()
        } else {
            &base - &p11
        };
        let p00 = scale(&self.tnr, &comp);
        let p01 = if comp.is_zero() {
            Rational::zero()
        } else {
            &comp - &p00
        };
        Some([p11, p10, p01, p00])
    }
}

/// Computes the six rates from integer counts.
pub fn rates(c: &GroupConfusion) -> RateBundle {
    let ratio = |num: u64, den: u64| -> RateValue {
        if den == 0 {
            RateValue::Undefined
        } else {
            RateValue::Defined(rat_u(num, den))
        }
    };
    let n = c.total();
    RateBundle {
        tpr: ratio(c.tpc, c.tpc + c.fnc),
        tnr: ratio(c.tnc, c.fpc + c.tnc),
        ppv: ratio(c.tpc, c.tpc + c.fpc),
        npv: ratio(c.tnc, c.tnc + c.fnc),
        base_rate: ratio(c.tpc + c.fnc, n),
        hire_rate: ratio(c.tpc + c.fpc, n),
    }
}

/// Confusion counts per sensitive group, sorted by group profile.
pub fn confusion_by_group(dataset: &Dataset) -> Vec<GroupConfusion> {
    let mut acc: HashMap<Vec<u16>, [u64; 4]> = HashMap::new();
    for rec in dataset.records() {
        let cells = acc.entry(rec.sensitive.clone()).or_insert([0; 4]);
        let idx = match (rec.outcome, rec.decision) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        cells[idx] += rec.count;
    }
    let mut out: Vec<GroupConfusion> = acc
        .into_iter()
        .map(|(ids, [tpc, fpc, fnc, tnc])| {
            let labels = dataset
                .schema()
                .sensitive
                .iter()
                .zip(&ids)
                .map(|(dim, &id)| dim.values[id as usize].clone())
                .collect();
            GroupConfusion {
                group: Profile(labels),
                tpc,
                fpc,
                fnc,
                tnc,
            }
        })
        .collect();
    out.sort_by(|a, b| a.group.cmp(&b.group));
    out
}

/// Checks the product identity `PPV * hire_rate = TPR * base_rate` and its
/// negative counterpart `NPV * (1 - hire_rate) = TNR * (1 - base_rate)`,
/// exactly. Terms conditioned on empty events are checked through the joint
/// masses, where they contribute zero, so the identity is meaningful even
/// when individual rates are undefined.
pub fn bayes_consistent(b: &RateBundle) -> bool {
    let (base, hire) = match (&b.base_rate, &b.hire_rate) {
        (RateValue::Defined(base), RateValue::Defined(hire)) => (base, hire),
        _ => return true, // empty group: vacuous
    };
    let masses = match b.joint_masses() {
        Some(m) => m,
        None => return true,
    };
    let [p11, _p10, p01, p00] = masses;
    // PPV * hire = P[y=1, d=1]
    let pos_ok = match &b.ppv {
        RateValue::Defined(ppv) => ppv * hire == p11,
        RateValue::Undefined => hire.is_zero() && p11.is_zero(),
    };
    // NPV * (1 - hire) = P[y=0, d=0]
    let not_hired = Rational::one() - hire;
    let neg_ok = match &b.npv {
        RateValue::Defined(npv) => npv * &not_hired == p00,
        RateValue::Undefined => not_hired.is_zero() && p00.is_zero(),
    };
    // TPR * base = P[y=1, d=1] and TNR * (1 - base) = P[y=0, d=0]
    let tpr_ok = match &b.tpr {
        RateValue::Defined(tpr) => tpr * base == p11,
        RateValue::Undefined => base.is_zero(),
    };
    let comp = Rational::one() - base;
    let tnr_ok = match &b.tnr {
        RateValue::Defined(tnr) => tnr * &comp == p00,
        RateValue::Undefined => comp.is_zero(),
    };
    // Sanity: all four joint masses are consistent decompositions.
    let sum_ok = {
        let m = b.joint_masses().unwrap();
        m[0].clone() + &m[1] + &m[2] + &m[3] == Rational::one()
    };
    let _ = p01;
    pos_ok && neg_ok && tpr_ok && tnr_ok && sum_ok
}

/// Checks the division-free form of the false-positive-rate identity:
/// `FPR * PPV * (1 - base) = base * (1 - PPV) * TPR`.
///
/// Returns `Some(holds)` when FPR, PPV and TPR are all defined (the guard
/// under which the identity is stated), `None` when any is undefined and the
/// identity is vacuous.
pub fn fpr_identity(b: &RateBundle) -> Option<bool> {
    let fpr = self::RateBundle::fpr(b);
    let (fpr, ppv, tpr, base) = match (&fpr, &b.ppv, &b.tpr, &b.base_rate) {
        (
            RateValue::Defined(fpr),
            RateValue::Defined(ppv),
            RateValue::Defined(tpr),
            RateValue::Defined(base),
        ) => (fpr, ppv, tpr, base),
        _ => return None,
    };
    let one = Rational::one();
    let lhs = fpr * ppv * (one.clone() - base);
    let rhs = base * (one - ppv) * tpr;
    Some(lhs == rhs)
}

/// One row of the per-group rate report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReportRow {
    pub group: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_count: u64,
    pub tn: u64,
    pub rates: Vec<RateCell>,
}

/// One formatted rate: name, exact fraction (or "UNDEFINED"), and the
/// six-place decimal when defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCell {
    pub name: &'static str,
    pub fraction: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimal: Option<String>,
    pub num_den: serde_json::Value,
}

fn rate_cell(name: &'static str, v: &RateValue) -> RateCell {
    RateCell {
        name,
        fraction: v.to_string(),
        decimal: v.as_defined().map(decimal6),
        num_den: v.to_json(),
    }
}

/// Rate names in report order.
pub const RATE_NAMES: [&str; 6] = ["tpr", "tnr", "ppv", "npv", "base_rate", "hire_rate"];

/// Builds the per-group report rows (confusion counts plus the six rates).
pub fn report_rows(dataset: &Dataset) -> Vec<GroupReportRow> {
    confusion_by_group(dataset)
        .iter()
        .map(|c| {
            let b = rates(c);
            GroupReportRow {
                group: c.group.to_string(),
                tp: c.tpc,
                fp: c.fpc,
                fn_count: c.fnc,
                tn: c.tnc,
                rates: vec![
                    rate_cell("tpr", &b.tpr),
                    rate_cell("tnr", &b.tnr),
                    rate_cell("ppv", &b.ppv),
                    rate_cell("npv", &b.npv),
                    rate_cell("base_rate", &b.base_rate),
                    rate_cell("hire_rate", &b.hire_rate),
                ],
            }
        })
        .collect()
}

/// Renders report rows as a fixed-width text table. Every rate shows the
/// exact fraction and the six-place decimal.
pub fn render_text_table(rows: &[GroupReportRow]) -> String {
    let mut header: Vec<String> = vec!["group".into(), "tp".into(), "fp".into(), "fn".into(), "tn".into()];
    header.extend(RATE_NAMES.iter().map(|s| s.to_string()));
    let mut body: Vec<Vec<String>> = Vec::new();
    for row in rows {
        let mut cells = vec![
            row.group.clone(),
            row.tp.to_string(),
            row.fp.to_string(),
            row.fn_count.to_string(),
            row.tn.to_string(),
        ];
        for rc in &row.rates {
            match &rc.decimal {
                Some(d) => cells.push(format!("{} ({})", rc.fraction, d)),
                None => cells.push(rc.fraction.clone()),
            }
        }
        body.push(cells);
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_line = |cells: &[String], widths: &[usize]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    out.push_str(&render_line(&header, &widths));
    out.push('\n');
    for row in &body {
        out.push_str(&render_line(row, &widths));
        out.push('\n');
    }
    out
}

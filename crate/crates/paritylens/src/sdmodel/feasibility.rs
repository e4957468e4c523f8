//! Searches the policy square (d_m, d_f) in [0,1]^2 for points where a
//! fairness goal holds between the two genders.
//!
//! Every rate is a degree-one rational function of the gender's own d
//! (numerator and denominator both affine), so for a fixed d_m the parity
//! equation of one component is linear in d_f and solved exactly in
//! rational arithmetic. Joint goals (two components) are satisfied where
//! the two per-column exact roots coincide; continuous crossings between
//! columns are located by bisection in floating point. The search reports
//! what it finds — feasible points, with exact coordinates where the
//! algebra gives them — plus structured findings about the shape of the
//! set (empty, diagonal, origin-only, corner-only, and order relations).

use super::{Gender, PhelpsianScenario};
use crate::fairness::{Criterion, FLOAT_EPSILON};
use crate::rational::{one, rational_to_json, to_f64, zero, RateValue, Rational};
use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

/// Search parameters.
#[derive(Debug, Clone)]
pub struct FeasibilityOptions {
    /// Grid points per axis (>= 2); the grid is i/(grid-1) for i in 0..grid.
    pub grid: u32,
    /// Float-mode satisfaction tolerance.
    pub epsilon: f64,
    /// Bisection iterations when refining a crossing.
    pub max_bisection: u32,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            grid: 101,
            epsilon: FLOAT_EPSILON,
            max_bisection: 60,
        }
    }
}

/// How a feasible point was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointOrigin {
    /// A scanned grid point satisfied the goal exactly.
    Grid,
    /// Exact rational solution of the parity equation on one grid column.
    ExactRoot,
    /// Bisection-refined intersection of two component parity curves.
    Crossing,
    /// One of the four corners of the policy square.
    Corner,
}

impl PointOrigin {
    pub fn key(&self) -> &'static str {
        match self {
            PointOrigin::Grid => "grid",
            PointOrigin::ExactRoot => "exact-root",
            PointOrigin::Crossing => "crossing",
            PointOrigin::Corner => "corner",
        }
    }
}

/// One point of the feasible set.
#[derive(Debug, Clone)]
pub struct FeasiblePoint {
    pub d_m: f64,
    pub d_f: f64,
    /// Exact coordinates when the point came from rational algebra.
    pub exact: Option<(Rational, Rational)>,
    /// Residual goal gap at the point (0 for exact points).
    pub max_gap: f64,
    pub corner: bool,
    pub on_diagonal: bool,
    pub via: PointOrigin,
    /// True when satisfaction relied on a rate being undefined for both
    /// genders (possible only in degenerate scenarios).
    pub undefined_involved: bool,
}

impl FeasiblePoint {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "d_m": self.d_m,
            "d_f": self.d_f,
            "exact": self.exact.as_ref().map(|(m, f)| {
                json!({"d_m": rational_to_json(m), "d_f": rational_to_json(f)})
            }),
            "max_gap": self.max_gap,
            "corner": self.corner,
            "on_diagonal": self.on_diagonal,
            "via": self.via.key(),
            "undefined_involved": self.undefined_involved,
        })
    }
}

/// Structure of the feasible set, computed from the found points.
#[derive(Debug, Clone, PartialEq)]
pub struct Findings {
    pub is_empty: bool,
    /// Every found point lies on the diagonal d_m = d_f.
    pub diagonal_only: bool,
    /// Every scanned diagonal grid point was feasible.
    pub full_diagonal: bool,
    /// The set is exactly the origin (0, 0).
    pub origin_only: bool,
    /// Every found point is a corner of the square.
    pub corners_only: bool,
    pub noncorner_count: u64,
    /// Whether every non-corner point has d_f > d_m (None without
    /// non-corner points).
    pub noncorner_df_gt_dm: Option<bool>,
    pub crossing_count: u64,
    /// The point list hit its storage cap; counts refer to stored points.
    pub truncated: bool,
}

impl Findings {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "is_empty": self.is_empty,
            "diagonal_only": self.diagonal_only,
            "full_diagonal": self.full_diagonal,
            "origin_only": self.origin_only,
            "corners_only": self.corners_only,
            "noncorner_count": self.noncorner_count,
            "noncorner_df_gt_dm": self.noncorner_df_gt_dm,
            "crossing_count": self.crossing_count,
            "truncated": self.truncated,
        })
    }
}

/// Result of a feasibility search.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub goal: Criterion,
    pub variant: &'static str,
    pub grid: u32,
    pub epsilon: f64,
    pub degenerate: bool,
    pub points: Vec<FeasiblePoint>,
    pub findings: Findings,
}

impl FeasibilityReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "goal": self.goal.key(),
            "variant": self.variant,
            "grid": self.grid,
            "epsilon": self.epsilon,
            "degenerate": self.degenerate,
            "findings": self.findings.to_json(),
            "point_count": self.points.len(),
            "points": self.points.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error("grid must have at least 2 points per axis, got {0}")]
    GridTooSmall(u32),
    #[error("grid of {0} points per axis exceeds the limit of {MAX_GRID}")]
    GridTooLarge(u32),
}

pub const MAX_GRID: u32 = 4097;
const POINT_CAP: usize = 10_000;
/// Two points within this distance in both coordinates are merged.
const DEDUPE_TOL: f64 = 1e-7;

/// A rate as a degree-one rational function of d:
/// r(d) = (a + b d) / (c + e d).
#[derive(Debug, Clone)]
struct Mobius {
    a: Rational,
    b: Rational,
    c: Rational,
    e: Rational,
}

#[derive(Debug, Clone, Copy)]
struct MobiusF64 {
    a: f64,
    b: f64,
    c: f64,
    e: f64,
}

impl Mobius {
    fn to_f64(&self) -> MobiusF64 {
        MobiusF64 {
            a: to_f64(&self.a),
            b: to_f64(&self.b),
            c: to_f64(&self.c),
            e: to_f64(&self.e),
        }
    }

    fn eval(&self, d: &Rational) -> RateValue {
        RateValue::ratio(&self.a + &self.b * d, &self.c + &self.e * d)
    }

    /// Solves r(d) = t exactly.
    fn solve(&self, t: &Rational) -> RootSolution {
        let den = &self.b - t * &self.e;
        let num = t * &self.c - &self.a;
        if den.is_zero() {
            if num.is_zero() {
                RootSolution::WholeAxis
            } else {
                RootSolution::NoSolution
            }
        } else {
            RootSolution::Root(num / den)
        }
    }
}

impl MobiusF64 {
    fn eval(&self, d: f64) -> f64 {
        (self.a + self.b * d) / (self.c + self.e * d)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum RootSolution {
    Root(Rational),
    /// The equation holds for every d (the component is constant at t).
    WholeAxis,
    NoSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Component {
    Tpr,
    Tnr,
    Ppv,
    Npv,
    Hire,
    Policy,
}

fn goal_components(goal: Criterion) -> &'static [Component] {
    match goal {
        Criterion::AntiClassification | Criterion::CondDemographicParity => &[Component::Policy],
        Criterion::DemographicParity => &[Component::Hire],
        Criterion::PosPredParity => &[Component::Ppv],
        Criterion::NegPredParity => &[Component::Npv],
        Criterion::PredictiveParity => &[Component::Ppv, Component::Npv],
        Criterion::PosErrorBalance => &[Component::Tpr],
        Criterion::NegErrorBalance => &[Component::Tnr],
        Criterion::ErrorRateBalance => &[Component::Tpr, Component::Tnr],
    }
}

/// Coefficients of one component as a function of the gender's own d.
fn mobius(s: &PhelpsianScenario, g: Gender, comp: Component) -> Mobius {
    let p = s.prevalence_of(g).clone();
    let phi = s.precision_of(g).clone();
    let q = one() - &phi; // 1 - phi
    match comp {
        Component::Tpr => Mobius {
            a: phi,
            b: q,
            c: one(),
            e: zero(),
        },
        Component::Tnr => Mobius {
            a: one(),
            b: -q,
            c: one(),
            e: zero(),
        },
        Component::Hire => Mobius {
            a: &p * &phi,
            b: q,
            c: one(),
            e: zero(),
        },
        Component::Ppv => Mobius {
            a: &p * &phi,
            b: &p * &q,
            c: &p * &phi,
            e: q,
        },
        Component::Npv => Mobius {
            a: one() - &p,
            b: -((one() - &p) * &q),
            c: one() - &p * &phi,
            e: -q,
        },
        Component::Policy => Mobius {
            a: zero(),
            b: one(),
            c: one(),
            e: zero(),
        },
    }
}

/// Exact goal evaluation at a rational point. Returns (feasible,
/// undefined_involved): feasible means every component compares equal
/// under the undefined-rate convention.
fn exact_feasible(
    mob_m: &[Mobius],
    mob_f: &[Mobius],
    d_m: &Rational,
    d_f: &Rational,
) -> (bool, bool) {
    let mut undefined_involved = false;
    for (m, f) in mob_m.iter().zip(mob_f.iter()) {
        match (m.eval(d_m), f.eval(d_f)) {
            (RateValue::Defined(a), RateValue::Defined(b)) => {
                if a != b {
                    return (false, undefined_involved);
                }
            }
            (RateValue::Undefined, RateValue::Undefined) => {
                undefined_involved = true;
            }
            _ => return (false, undefined_involved),
        }
    }
    (true, undefined_involved)
}

/// Float goal gap at an arbitrary point: the largest component difference,
/// infinity on a defined/undefined mismatch, ignoring components undefined
/// on both sides.
fn float_gap(mob_m: &[MobiusF64], mob_f: &[MobiusF64], d_m: f64, d_f: f64) -> (f64, bool) {
    let mut gap = 0.0f64;
    let mut undefined_involved = false;
    for (m, f) in mob_m.iter().zip(mob_f.iter()) {
        let a = m.eval(d_m);
        let b = f.eval(d_f);
        match (a.is_finite(), b.is_finite()) {
            (true, true) => gap = gap.max((a - b).abs()),
            (false, false) => undefined_involved = true,
            _ => return (f64::INFINITY, undefined_involved),
        }
    }
    (gap, undefined_involved)
}

fn root_f64(target: f64, f: &MobiusF64) -> Option<f64> {
    if !target.is_finite() {
        return None;
    }
    let den = f.b - target * f.e;
    if den.abs() < 1e-300 {
        return None;
    }
    let r = (target * f.c - f.a) / den;
    r.is_finite().then_some(r)
}

fn in_unit(r: &Rational) -> bool {
    !r.is_negative() && *r <= one()
}

struct PointSink {
    points: Vec<FeasiblePoint>,
    truncated: bool,
}

impl PointSink {
    fn push(&mut self, p: FeasiblePoint) {
        if self.points.len() >= POINT_CAP {
            self.truncated = true;
            return;
        }
        self.points.push(p);
    }
}

fn exact_point(
    mob_m: &[Mobius],
    mob_f: &[Mobius],
    d_m: Rational,
    d_f: Rational,
    via: PointOrigin,
) -> Option<FeasiblePoint> {
    let (feasible, undefined_involved) = exact_feasible(mob_m, mob_f, &d_m, &d_f);
    if !feasible {
        return None;
    }
    let fm = to_f64(&d_m);
    let ff = to_f64(&d_f);
    let corner = (d_m.is_zero() || d_m.is_one()) && (d_f.is_zero() || d_f.is_one());
    Some(FeasiblePoint {
        d_m: fm,
        d_f: ff,
        on_diagonal: d_m == d_f,
        exact: Some((d_m, d_f)),
        max_gap: 0.0,
        corner,
        via: if corner { PointOrigin::Corner } else { via },
        undefined_involved,
    })
}

/// Scans the policy square for the goal and describes the feasible set.
pub fn feasibility_search(
    s: &PhelpsianScenario,
    goal: Criterion,
    opts: &FeasibilityOptions,
) -> Result<FeasibilityReport, FeasibilityError> {
    if opts.grid < 2 {
        return Err(FeasibilityError::GridTooSmall(opts.grid));
    }
    if opts.grid > MAX_GRID {
        return Err(FeasibilityError::GridTooLarge(opts.grid));
    }
    let comps = goal_components(goal);
    let mob_m: Vec<Mobius> = comps.iter().map(|c| mobius(s, Gender::M, *c)).collect();
    let mob_f: Vec<Mobius> = comps.iter().map(|c| mobius(s, Gender::F, *c)).collect();
    let mob_m64: Vec<MobiusF64> = mob_m.iter().map(Mobius::to_f64).collect();
    let mob_f64: Vec<MobiusF64> = mob_f.iter().map(Mobius::to_f64).collect();

    let k = opts.grid as usize;
    let grid: Vec<Rational> = (0..k)
        .map(|i| crate::rational::rat_u(i as u64, (k - 1) as u64))
        .collect();

    let mut sink = PointSink {
        points: Vec::new(),
        truncated: false,
    };

    // corners
    for dm in [zero(), one()] {
        for df in [zero(), one()] {
            if let Some(p) = exact_point(&mob_m, &mob_f, dm.clone(), df, PointOrigin::Corner) {
                sink.push(p);
            }
        }
    }

    // diagonal scan
    let mut full_diagonal = true;
    for g in &grid {
        match exact_point(&mob_m, &mob_f, g.clone(), g.clone(), PointOrigin::Grid) {
            Some(p) => sink.push(p),
            None => full_diagonal = false,
        }
    }

    // per-column exact roots and crossing detection
    let mut crossing_count = 0u64;
    let mut prev_diff: Option<(f64, f64)> = None; // (t, root1 - root2)
    for t in &grid {
        // exact targets of each component on the m side
        let targets: Option<Vec<Rational>> = mob_m
            .iter()
            .map(|m| match m.eval(t) {
                RateValue::Defined(v) => Some(v),
                RateValue::Undefined => None,
            })
            .collect();
        let Some(targets) = targets else {
            // degenerate column: fall back to a float scan of this column
            // so undefined-on-both-sides satisfaction is still surfaced
            for g in &grid {
                if let Some(p) =
                    exact_point(&mob_m, &mob_f, t.clone(), g.clone(), PointOrigin::Grid)
                {
                    sink.push(p);
                }
            }
            prev_diff = None;
            continue;
        };
        let solutions: Vec<RootSolution> = mob_f
            .iter()
            .zip(targets.iter())
            .map(|(f, tv)| f.solve(tv))
            .collect();

        match solutions.as_slice() {
            [RootSolution::Root(r)] => {
                if in_unit(r) {
                    if let Some(p) = exact_point(
                        &mob_m,
                        &mob_f,
                        t.clone(),
                        r.clone(),
                        PointOrigin::ExactRoot,
                    ) {
                        sink.push(p);
                    }
                }
                prev_diff = None;
            }
            [RootSolution::WholeAxis] => {
                for g in &grid {
                    if let Some(p) =
                        exact_point(&mob_m, &mob_f, t.clone(), g.clone(), PointOrigin::Grid)
                    {
                        sink.push(p);
                    }
                }
                prev_diff = None;
            }
            [RootSolution::NoSolution] => {
                prev_diff = None;
            }
            [s1, s2] => {
                // joint goal: feasible on this column where both component
                // equations share a solution
                match (s1, s2) {
                    (RootSolution::Root(r1), RootSolution::Root(r2)) => {
                        if r1 == r2 && in_unit(r1) {
                            if let Some(p) = exact_point(
                                &mob_m,
                                &mob_f,
                                t.clone(),
                                r1.clone(),
                                PointOrigin::ExactRoot,
                            ) {
                                sink.push(p);
                            }
                            prev_diff = None;
                        } else {
                            let f1 = to_f64(r1);
                            let f2 = to_f64(r2);
                            let tf = to_f64(t);
                            // track the signed separation of the two parity
                            // curves for crossing detection, while both stay
                            // near the square
                            let near = (-0.25..=1.25).contains(&f1)
                                && (-0.25..=1.25).contains(&f2);
                            let diff = f1 - f2;
                            if near {
                                if let Some((pt, pd)) = prev_diff {
                                    if pd != 0.0
                                        && diff != 0.0
                                        && pd.signum() != diff.signum()
                                    {
                                        if let Some(p) = refine_crossing(
                                            &mob_m64, &mob_f64, pt, tf, opts,
                                        ) {
                                            crossing_count += 1;
                                            sink.push(p);
                                        }
                                    }
                                }
                                prev_diff = Some((tf, diff));
                            } else {
                                prev_diff = None;
                            }
                        }
                    }
                    (RootSolution::WholeAxis, RootSolution::Root(r))
                    | (RootSolution::Root(r), RootSolution::WholeAxis) => {
                        if in_unit(r) {
                            if let Some(p) = exact_point(
                                &mob_m,
                                &mob_f,
                                t.clone(),
                                r.clone(),
                                PointOrigin::ExactRoot,
                            ) {
                                sink.push(p);
                            }
                        }
                        prev_diff = None;
                    }
                    (RootSolution::WholeAxis, RootSolution::WholeAxis) => {
                        for g in &grid {
                            if let Some(p) = exact_point(
                                &mob_m,
                                &mob_f,
                                t.clone(),
                                g.clone(),
                                PointOrigin::Grid,
                            ) {
                                sink.push(p);
                            }
                        }
                        prev_diff = None;
                    }
                    _ => {
                        prev_diff = None;
                    }
                }
            }
            _ => unreachable!("goals have one or two components"),
        }
    }

    let points = dedupe(sink.points);
    let findings = summarize(&points, full_diagonal, crossing_count, sink.truncated);
    Ok(FeasibilityReport {
        goal,
        variant: s.variant_key(),
        grid: opts.grid,
        epsilon: opts.epsilon,
        degenerate: s.is_degenerate(),
        points,
        findings,
    })
}

/// Bisects on the column coordinate to locate where two component parity
/// curves intersect, then validates the goal gap at the located point.
fn refine_crossing(
    mob_m: &[MobiusF64],
    mob_f: &[MobiusF64],
    mut lo: f64,
    mut hi: f64,
    opts: &FeasibilityOptions,
) -> Option<FeasiblePoint> {
    let sep = |t: f64| -> Option<f64> {
        let r1 = root_f64(mob_m[0].eval(t), &mob_f[0])?;
        let r2 = root_f64(mob_m[1].eval(t), &mob_f[1])?;
        Some(r1 - r2)
    };
    let mut flo = sep(lo)?;
    for _ in 0..opts.max_bisection {
        let mid = 0.5 * (lo + hi);
        let fmid = sep(mid)?;
        if fmid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if flo.signum() == fmid.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let r1 = root_f64(mob_m[0].eval(t), &mob_f[0])?;
    let r2 = root_f64(mob_m[1].eval(t), &mob_f[1])?;
    let d_f = 0.5 * (r1 + r2);
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&d_f) {
        return None;
    }
    let (gap, undefined_involved) = float_gap(mob_m, mob_f, t, d_f);
    if gap > opts.epsilon {
        return None;
    }
    Some(FeasiblePoint {
        d_m: t,
        d_f,
        exact: None,
        max_gap: gap,
        corner: false,
        on_diagonal: (t - d_f).abs() <= opts.epsilon,
        via: PointOrigin::Crossing,
        undefined_involved,
    })
}

fn dedupe(mut points: Vec<FeasiblePoint>) -> Vec<FeasiblePoint> {
    points.sort_by(|a, b| {
        (a.d_m, a.d_f)
            .partial_cmp(&(b.d_m, b.d_f))
            .expect("coordinates are finite")
    });
    let mut out: Vec<FeasiblePoint> = Vec::new();
    for p in points {
        if let Some(last) = out.last_mut() {
            if (last.d_m - p.d_m).abs() <= DEDUPE_TOL && (last.d_f - p.d_f).abs() <= DEDUPE_TOL {
                // keep the better-provenanced entry
                if last.exact.is_none() && p.exact.is_some() {
                    *last = p;
                }
                continue;
            }
        }
        out.push(p);
    }
    out
}

fn summarize(
    points: &[FeasiblePoint],
    full_diagonal: bool,
    crossing_count: u64,
    truncated: bool,
) -> Findings {
    let is_empty = points.is_empty();
    let diagonal_only = points.iter().all(|p| p.on_diagonal);
    let origin_only =
        points.len() == 1 && points[0].d_m.abs() <= DEDUPE_TOL && points[0].d_f.abs() <= DEDUPE_TOL;
    let corners_only = points.iter().all(|p| p.corner);
    let noncorner: Vec<&FeasiblePoint> = points.iter().filter(|p| !p.corner).collect();
    let noncorner_df_gt_dm = if noncorner.is_empty() {
        None
    } else {
        Some(noncorner.iter().all(|p| match &p.exact {
            Some((m, f)) => f > m,
            None => p.d_f > p.d_m + DEDUPE_TOL,
        }))
    };
    Findings {
        is_empty,
        diagonal_only: !is_empty && diagonal_only,
        full_diagonal: full_diagonal && !is_empty,
        origin_only,
        corners_only: !is_empty && corners_only,
        noncorner_count: noncorner.len() as u64,
        noncorner_df_gt_dm,
        crossing_count,
        truncated,
    }
}

//! Scenario subcommands: exact rates under a policy (`sd-rates`), the
//! optimal threshold rule (`sd-optimal`), feasibility sweeps over the
//! policy square (`sd-feasible`), and synthetic data generation
//! (`sd-simulate`).

use anyhow::{bail, Context, Result};
use clap::Args;
use paritylens::core::{to_json as dataset_to_json, write_csv};
use paritylens::metrics::{render_text_table, report_rows};
use paritylens::rational::parse_rational;
use paritylens::sdmodel::{
    feasibility_search, model_rates, optimal_decision_rule, optimal_policy, parse_scenario_json,
    parse_scenario_kv, posterior, posterior_table, simulate, FeasibilityOptions,
    FeasibilityReport, Gender, HiringPolicy, PhelpsianScenario, ScenarioFile, Score, Technology,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::audit::parse_criterion;
use crate::{fmt_rate, fmt_rational, Out};

/// Reads a scenario file, selecting the JSON or key-value parser by
/// extension (`.json`) or a leading `{`.
pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    let looks_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false)
        || text.trim_start().starts_with('{');
    let parsed = if looks_json {
        parse_scenario_json(&text)
    } else {
        parse_scenario_kv(&text)
    };
    parsed.with_context(|| format!("parsing scenario {}", path.display()))
}

/// Picks the hiring policy: `--d-m/--d-f` flags when given (both or
/// neither), otherwise the policy stored in the scenario file.
fn resolve_policy(
    file: &ScenarioFile,
    d_m: &Option<String>,
    d_f: &Option<String>,
) -> Result<HiringPolicy> {
    match (d_m, d_f) {
        (Some(m), Some(f)) => {
            let d_m = parse_rational(m).context("--d-m")?;
            let d_f = parse_rational(f).context("--d-f")?;
            Ok(HiringPolicy::new(d_m, d_f)?)
        }
        (None, None) => match &file.policy {
            Some(p) => Ok(p.clone()),
            None => bail!(
                "no hiring policy: set d_m and d_f in the scenario file or pass --d-m and --d-f"
            ),
        },
        _ => bail!("--d-m and --d-f must be given together"),
    }
}

fn describe_scenario(s: &PhelpsianScenario, out: &Out) {
    match s.technology() {
        Technology::Prevalence { p_m, p_f, phi } => {
            out.human(format!(
                "variant: prevalence (p_m = {}, p_f = {}, shared phi = {})",
                fmt_rational(p_m),
                fmt_rational(p_f),
                fmt_rational(phi)
            ));
        }
        Technology::Precision {
            p_tilde,
            phi_m,
            phi_f,
        } => {
            out.human(format!(
                "variant: precision (shared p = {}, phi_m = {}, phi_f = {})",
                fmt_rational(p_tilde),
                fmt_rational(phi_m),
                fmt_rational(phi_f)
            ));
        }
    }
    out.human(format!(
        "payoffs: B = {}, omega = {} (threshold {})",
        fmt_rational(s.payoffs().benefit()),
        fmt_rational(s.payoffs().penalty()),
        fmt_rational(&s.payoffs().optimal_threshold())
    ));
}

fn describe_bundle(out: &Out, label: &str, b: &paritylens::metrics::RateBundle) {
    out.human(format!(
        "  {label}: tpr = {}, tnr = {}, ppv = {}, npv = {}, base rate = {}, hire rate = {}",
        fmt_rate(&b.tpr),
        fmt_rate(&b.tnr),
        fmt_rate(&b.ppv),
        fmt_rate(&b.npv),
        fmt_rate(&b.base_rate),
        fmt_rate(&b.hire_rate),
    ));
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    /// Scenario file (key-value or JSON).
    pub scenario: PathBuf,
    /// Muddled-signal hire probability for gender m (overrides the file).
    #[arg(long = "d-m")]
    pub d_m: Option<String>,
    /// Muddled-signal hire probability for gender f (overrides the file).
    #[arg(long = "d-f")]
    pub d_f: Option<String>,
}

pub fn run_rates(args: &RatesArgs, out: &Out) -> Result<ExitCode> {
    let file = load_scenario(&args.scenario)?;
    let policy = resolve_policy(&file, &args.d_m, &args.d_f)?;
    let s = &file.scenario;
    describe_scenario(s, out);
    out.human(format!(
        "policy: d_m = {}, d_f = {}",
        fmt_rational(&policy.d_m),
        fmt_rational(&policy.d_f)
    ));
    let rates = model_rates(s, &policy);
    out.human("rates:");
    for g in Gender::BOTH {
        describe_bundle(out, g.label(), rates.for_gender(g));
    }
    out.machine(&serde_json::json!({
        "scenario": s.to_json(),
        "policy": policy.to_json(),
        "rates": rates.to_json(),
    }));
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct OptimalArgs {
    /// Scenario file (key-value or JSON).
    pub scenario: PathBuf,
}

pub fn run_optimal(args: &OptimalArgs, out: &Out) -> Result<ExitCode> {
    let file = load_scenario(&args.scenario)?;
    let s = &file.scenario;
    describe_scenario(s, out);
    let threshold = s.payoffs().optimal_threshold();
    out.human(format!("optimal threshold: {}", fmt_rational(&threshold)));

    out.human("posterior P[qualified | gender, score]:");
    let mut posterior_json = serde_json::Map::new();
    for g in Gender::BOTH {
        let mut per_score = Vec::new();
        let mut score_json = serde_json::Map::new();
        for x in Score::ALL {
            let v = posterior(s, g, x);
            per_score.push(format!("score {} -> {}", x.label(), fmt_rate(&v)));
            score_json.insert(x.label().to_string(), v.to_json());
        }
        out.human(format!("  {}: {}", g.label(), per_score.join(", ")));
        posterior_json.insert(g.label().to_string(), score_json.into());
    }

    let policy = optimal_policy(s);
    out.human(format!(
        "optimal policy: d_m = {}, d_f = {}",
        fmt_rational(&policy.d_m),
        fmt_rational(&policy.d_f)
    ));

    let rule = optimal_decision_rule(&posterior_table(s), s.payoffs());
    out.human("decision rule (hire probability by gender and score):");
    let mut rule_json = serde_json::Map::new();
    for g in Gender::BOTH {
        let mut cells = Vec::new();
        let mut cell_json = serde_json::Map::new();
        for x in Score::ALL {
            match rule.probability(&g.profile(), &x.profile()) {
                Some(p) => {
                    cells.push(format!("score {} -> {}", x.label(), p));
                    cell_json.insert(
                        x.label().to_string(),
                        paritylens::rational::rational_to_json(p),
                    );
                }
                None => cells.push(format!("score {} -> (unreachable)", x.label())),
            }
        }
        out.human(format!("  {}: {}", g.label(), cells.join(", ")));
        rule_json.insert(g.label().to_string(), cell_json.into());
    }

    let rates = model_rates(s, &policy);
    out.human("rates under the optimal policy:");
    for g in Gender::BOTH {
        describe_bundle(out, g.label(), rates.for_gender(g));
    }

    out.machine(&serde_json::json!({
        "scenario": s.to_json(),
        "threshold": paritylens::rational::rational_to_json(&threshold),
        "posteriors": serde_json::Value::Object(posterior_json),
        "policy": policy.to_json(),
        "decision_rule": serde_json::Value::Object(rule_json),
        "rates": rates.to_json(),
    }));
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct FeasibleArgs {
    /// Scenario file (key-value or JSON).
    pub scenario: PathBuf,
    /// Fairness goal (key or alias, e.g. `erb`, `pos-pred-parity`).
    #[arg(long)]
    pub goal: String,
    /// Grid points per policy axis.
    #[arg(long, default_value_t = 101)]
    pub grid: u32,
}

fn describe_feasible(report: &FeasibilityReport, out: &Out) {
    let f = &report.findings;
    if f.is_empty {
        out.human("feasible set: empty");
        return;
    }
    if f.full_diagonal {
        out.human("feasible set: the full diagonal d_m = d_f (and nothing off it)");
    } else if f.origin_only {
        out.human("feasible set: exactly the origin (d_m, d_f) = (0, 0)");
    } else if f.corners_only {
        out.human("feasible set: degenerate corner policies only");
    } else {
        out.human(format!(
            "feasible set: {} point(s) found on the grid and by refinement",
            report.points.len()
        ));
    }
    if let Some(above) = f.noncorner_df_gt_dm {
        out.human(format!(
            "  every non-corner solution has d_f {} d_m",
            if above { ">" } else { "<=" }
        ));
    }
    if f.crossing_count > 0 {
        out.human(format!(
            "  {} isolated interior crossing(s) refined by bisection",
            f.crossing_count
        ));
    }
    if f.truncated {
        out.human("  (point list truncated)");
    }
    let sample: Vec<&paritylens::sdmodel::FeasiblePoint> = report.points.iter().take(10).collect();
    if !sample.is_empty() {
        out.human("  sample points:");
        for p in sample {
            let exact = match &p.exact {
                Some((m, f)) => format!(" = ({}, {}) exactly", m, f),
                None => String::new(),
            };
            out.human(format!(
                "    (d_m = {:.6}, d_f = {:.6}){} [{}]",
                p.d_m,
                p.d_f,
                exact,
                p.via.key()
            ));
        }
    }
}

pub fn run_feasible(args: &FeasibleArgs, out: &Out) -> Result<ExitCode> {
    let file = load_scenario(&args.scenario)?;
    let s = &file.scenario;
    let goal = parse_criterion(&args.goal)?;
    describe_scenario(s, out);
    let opts = FeasibilityOptions {
        grid: args.grid,
        ..FeasibilityOptions::default()
    };
    out.human(format!(
        "goal: {} on a {}x{} grid (epsilon {:e})",
        goal.key(),
        opts.grid,
        opts.grid,
        opts.epsilon
    ));
    let report = feasibility_search(s, goal, &opts)?;
    if report.degenerate {
        out.human("note: degenerate signal precision (phi is 0 or 1 for some gender)");
    }
    describe_feasible(&report, out);
    out.machine(&report.to_json());
    Ok(ExitCode::SUCCESS)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario file (key-value or JSON).
    pub scenario: PathBuf,
    /// Number of records to draw (at least 1).
    #[arg(long)]
    pub n: u64,
    /// Seed; identical seeds give identical datasets.
    #[arg(long)]
    pub seed: u64,
    /// Write the dataset as CSV to this path instead of standard out.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Muddled-signal hire probability for gender m (overrides the file).
    #[arg(long = "d-m")]
    pub d_m: Option<String>,
    /// Muddled-signal hire probability for gender f (overrides the file).
    #[arg(long = "d-f")]
    pub d_f: Option<String>,
}

pub fn run_simulate(args: &SimulateArgs, out: &Out) -> Result<ExitCode> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let file = load_scenario(&args.scenario)?;
    let policy = resolve_policy(&file, &args.d_m, &args.d_f)?;
    let dataset = simulate(&file.scenario, &policy, args.n, args.seed);

    match &args.out {
        Some(path) => {
            let f = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_csv(&dataset, std::io::BufWriter::new(f))
                .with_context(|| format!("writing {}", path.display()))?;
            out.human(format!(
                "wrote {} records to {} (seed {})",
                args.n,
                path.display(),
                args.seed
            ));
            out.human("");
            for line in render_text_table(&report_rows(&dataset)).lines() {
                out.human(line);
            }
            out.machine(&serde_json::json!({
                "n": args.n,
                "seed": args.seed,
                "out": path.display().to_string(),
                "groups": serde_json::to_value(report_rows(&dataset)).expect("rows serialize"),
            }));
        }
        None => {
            if out.is_json() {
                out.human(format!("simulated {} records (seed {})", args.n, args.seed));
                out.machine(&dataset_to_json(&dataset));
            } else {
                let stdout = std::io::stdout();
                write_csv(&dataset, stdout.lock()).context("writing CSV to standard out")?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_resolution_rules() {
        let file = ScenarioFile {
            scenario: PhelpsianScenario::prevalence(
                parse_rational("2/5").unwrap(),
                parse_rational("3/5").unwrap(),
                parse_rational("1/2").unwrap(),
                paritylens::sdmodel::EmployerPayoffs::new(
                    parse_rational("1").unwrap(),
                    parse_rational("-2").unwrap(),
                )
                .unwrap(),
            )
            .unwrap(),
            policy: None,
        };
        assert!(resolve_policy(&file, &None, &None).is_err());
        assert!(resolve_policy(&file, &Some("1/2".into()), &None).is_err());
        let p = resolve_policy(&file, &Some("1/2".into()), &Some("0.25".into())).unwrap();
        assert_eq!(p.d_m, parse_rational("1/2").unwrap());
        assert_eq!(p.d_f, parse_rational("1/4").unwrap());
    }
}

//! Subcase runs and the four-way case-study comparison.

use std::collections::BTreeMap;

use ffr_inertia::{simulate, Controller, Trace};
use serde::Serialize;

use crate::config::{ScenarioConfig, Subcase, SubcaseParams};
use crate::error::{Result, ScenarioError};
use crate::metrics::SummaryMetrics;

/// Relative gap allowed between the initial RoCoF of the time-variant droop
/// and of the added-inertia run.
pub const INITIAL_ROCOF_CLOSENESS: f64 = 0.02;
/// Window after onset over which constant droop should still look
/// uncontrolled, seconds.
pub const EARLY_WINDOW: f64 = 0.1;
/// Max deviation between those two runs inside [`EARLY_WINDOW`], p.u.
pub const EARLY_AGREEMENT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SubcaseRun {
    pub subcase: Subcase,
    pub trace: Trace,
    pub metrics: SummaryMetrics,
}

pub fn run_subcase(config: &ScenarioConfig) -> Result<SubcaseRun> {
    let boosted;
    let (model, controller) = match config.params {
        SubcaseParams::NoControl => (&config.model, Controller::None),
        SubcaseParams::AddedInertia { delta_tj } => {
            boosted = config.model.with_added_inertia(delta_tj)?;
            (&boosted, Controller::None)
        }
        SubcaseParams::ConstantDroop { k_total } => {
            (&config.model, Controller::constant_droop(k_total)?)
        }
        SubcaseParams::Vdic(schedule) => (&config.model, Controller::Vdic(schedule)),
    };
    let trace = simulate(model, &config.event, &controller, &config.governor, &config.sim)?;
    let metrics = SummaryMetrics::from_trace(&trace)?;
    Ok(SubcaseRun {
        subcase: config.subcase(),
        trace,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudyReport {
    pub metrics: BTreeMap<Subcase, SummaryMetrics>,
    pub checks: Vec<OrderingCheck>,
}

impl CaseStudyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudy {
    /// Runs in `(i)`..`(iv)` order.
    pub runs: Vec<SubcaseRun>,
    pub report: CaseStudyReport,
}

impl CaseStudy {
    pub fn run(&self, subcase: Subcase) -> &SubcaseRun {
        self.runs
            .iter()
            .find(|r| r.subcase == subcase)
            .expect("case study holds every subcase")
    }
}

/// Runs the four subcases (concurrently) and checks the expected orderings.
///
/// The configs must cover each subcase exactly once and agree on model,
/// event, sampling and governor.
pub fn run_case_study(configs: &[ScenarioConfig]) -> Result<CaseStudy> {
    let mut ordered: Vec<&ScenarioConfig> = Vec::with_capacity(4);
    for subcase in Subcase::ALL {
        let mut matching = configs.iter().filter(|c| c.subcase() == subcase);
        let first = matching
            .next()
            .ok_or_else(|| ScenarioError::Inconsistent(format!("missing subcase `{subcase}`")))?;
        if matching.next().is_some() {
            return Err(ScenarioError::Inconsistent(format!("subcase `{subcase}` given twice")));
        }
        ordered.push(first);
    }
    if configs.len() != 4 {
        return Err(ScenarioError::Inconsistent(format!(
            "expected 4 configs, got {}",
            configs.len()
        )));
    }
    let reference = ordered[0];
    for c in &ordered[1..] {
        let clash = [
            ("system", c.model != reference.model),
            ("event", c.event != reference.event),
            ("sim", c.sim != reference.sim),
            ("governor", c.governor != reference.governor),
        ];
        if let Some((block, _)) = clash.iter().find(|(_, differs)| *differs) {
            return Err(ScenarioError::Inconsistent(format!(
                "`{block}` of subcase `{}` differs from subcase `{}`",
                c.subcase(),
                reference.subcase()
            )));
        }
    }

    let runs = std::thread::scope(|scope| {
        let handles: Vec<_> = ordered
            .iter()
            .map(|&c| scope.spawn(move || run_subcase(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("subcase thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let report = compare(&runs);
    Ok(CaseStudy { runs, report })
}

fn compare(runs: &[SubcaseRun]) -> CaseStudyReport {
    let get = |s: Subcase| runs.iter().find(|r| r.subcase == s).expect("all subcases run");
    let (none, added, droop, vdic) = (
        get(Subcase::NoControl),
        get(Subcase::AddedInertia),
        get(Subcase::ConstantDroop),
        get(Subcase::Vdic),
    );
    let rocof = |r: &SubcaseRun| r.metrics.initial_rocof.abs();
    let mut checks = Vec::new();

    let (ri, rii, riii, riv) = (rocof(none), rocof(added), rocof(droop), rocof(vdic));
    checks.push(OrderingCheck {
        claim: "initial |RoCoF|: (ii), (iv) < (iii) < (i)".into(),
        passed: rii.max(riv) < riii && riii < ri,
        detail: format!("(i) {ri:.6e}, (ii) {rii:.6e}, (iii) {riii:.6e}, (iv) {riv:.6e} p.u./s"),
    });

    let gap = (riv - rii).abs() / rii;
    checks.push(OrderingCheck {
        claim: format!(
            "initial |RoCoF| of (iv) within {:.0}% of (ii)",
            INITIAL_ROCOF_CLOSENESS * 100.0
        ),
        passed: gap < INITIAL_ROCOF_CLOSENESS,
        detail: format!("relative gap {:.4}%", gap * 100.0),
    });

    let early = max_early_gap(&none.trace, &droop.trace);
    checks.push(OrderingCheck {
        claim: format!(
            "(i) and (iii) agree within {EARLY_AGREEMENT:e} p.u. for {EARLY_WINDOW} s after onset"
        ),
        passed: early < EARLY_AGREEMENT,
        detail: format!("max |Δω| {early:.3e} p.u."),
    });

    let (ss_ii, ss_iv) = (
        added.metrics.steady_state_omega.abs(),
        vdic.metrics.steady_state_omega.abs(),
    );
    checks.push(OrderingCheck {
        claim: "steady-state |ω|: (iv) < (ii)".into(),
        passed: ss_iv < ss_ii,
        detail: format!("(ii) {ss_ii:.6e}, (iv) {ss_iv:.6e} p.u."),
    });

    CaseStudyReport {
        metrics: runs.iter().map(|r| (r.subcase, r.metrics)).collect(),
        checks,
    }
}

/// Max `|ω_a − ω_b|` over the first [`EARLY_WINDOW`] seconds after onset.
pub fn max_early_gap(a: &Trace, b: &Trace) -> f64 {
    let Some(on) = a.onset_index else {
        return 0.0;
    };
    let t_on = a.sample_times[on];
    a.post_onset()
        .take_while(|&k| a.sample_times[k] - t_on <= EARLY_WINDOW * (1.0 + 1e-9))
        .map(|k| (a.omega[k] - b.omega[k]).abs())
        .fold(0.0, f64::max)
}

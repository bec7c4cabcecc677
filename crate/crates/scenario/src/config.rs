//! JSON scenario files.
//!
//! Two document kinds share the same sections:
//!
//! * a *scenario* names one `subcase` and carries exactly the parameter block
//!   that subcase needs;
//! * a *case study* omits `subcase` and carries all three parameter blocks,
//!   expanding into the four subcases.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "system": {
//!     "system_base_mva": 1000.0,
//!     "generators": [{ "nominal_power_mva": 1000.0, "inertia_constant_s": 39.2 }],
//!     "ffrs": [{ "id": "hvdc1", "droop_upper_bound_pu": 32.0,
//!                "droop_optimal_pu": 8.0, "regulation_margin_pu": 1.0 }]
//!   },
//!   "event": { "delta_pf_pu": -0.3, "onset_time_s": 10.0 },
//!   "sim": { "time_step_s": 0.001, "duration_s": 20.0, "integrator": "rk4" },
//!   "governor": { "enabled": false, "droop_gain_pu": 25.0, "time_constant_s": 8.0 },
//!   "subcase": "vdic",
//!   "vdic_schedule": { "target_inertia_s": 40.0, "upper_bound_pu": 128.0, "lower_bound_pu": 32.0 }
//! }
//! ```
//!
//! `added_inertia` takes `{ "delta_tj_s": .. }` and `constant_droop` takes
//! `{ "k_total_pu": .. }`. `governor` may be omitted (disabled).

use std::fmt;
use std::path::Path;

use ffr_inertia::{
    DroopSchedule, FfrSpec, GeneratorSpec, GovernorSpec, ImbalanceEvent, Integrator, SimConfig,
    SystemModel,
};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Result, ScenarioError};

pub const SCHEMA_VERSION: u32 = 1;

const BUNDLED_CASE_STUDY: &str = include_str!("../configs/case_study.json");
const BUNDLED_SCENARIO: &str = include_str!("../configs/vdic.json");

/// The four case-study runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcase {
    /// Unchanged inertia, FFR droop disabled.
    NoControl,
    /// Real inertia raised by the target increment.
    AddedInertia,
    /// FFRs on constant droop at the steady-state optimum.
    ConstantDroop,
    /// FFRs on the bounded time-variant droop schedule.
    Vdic,
}

impl Subcase {
    pub const ALL: [Subcase; 4] = [
        Subcase::NoControl,
        Subcase::AddedInertia,
        Subcase::ConstantDroop,
        Subcase::Vdic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcase::NoControl => "no_control",
            Subcase::AddedInertia => "added_inertia",
            Subcase::ConstantDroop => "constant_droop",
            Subcase::Vdic => "vdic",
        }
    }

    /// Roman label, `(i)` to `(iv)`.
    pub fn label(self) -> &'static str {
        match self {
            Subcase::NoControl => "(i)",
            Subcase::AddedInertia => "(ii)",
            Subcase::ConstantDroop => "(iii)",
            Subcase::Vdic => "(iv)",
        }
    }
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Subcase together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubcaseParams {
    NoControl,
    AddedInertia { delta_tj: f64 },
    ConstantDroop { k_total: f64 },
    Vdic(DroopSchedule),
}

impl SubcaseParams {
    pub fn subcase(&self) -> Subcase {
        match self {
            SubcaseParams::NoControl => Subcase::NoControl,
            SubcaseParams::AddedInertia { .. } => Subcase::AddedInertia,
            SubcaseParams::ConstantDroop { .. } => Subcase::ConstantDroop,
            SubcaseParams::Vdic(_) => Subcase::Vdic,
        }
    }
}

/// A fully validated single-run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: SystemModel,
    pub event: ImbalanceEvent,
    pub sim: SimConfig,
    pub governor: GovernorSpec,
    pub params: SubcaseParams,
}

impl ScenarioConfig {
    pub fn subcase(&self) -> Subcase {
        self.params.subcase()
    }

    /// The bundled time-variant droop scenario (20 s, governor off).
    pub fn bundled() -> Self {
        parse_scenario(BUNDLED_SCENARIO, "bundled vdic.json").expect("bundled scenario is valid")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        parse_scenario(text, origin)
    }

    /// Replaces step size and/or duration, re-checking the run invariants.
    pub fn with_sim_overrides(mut self, time_step: Option<f64>, duration: Option<f64>) -> Result<Self> {
        self.sim = override_sim(&self.sim, &self.event, time_step, duration)?;
        Ok(self)
    }
}

/// Shared parameters plus every subcase's parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseStudyConfig {
    pub model: SystemModel,
    pub event: ImbalanceEvent,
    pub sim: SimConfig,
    pub governor: GovernorSpec,
    pub added_inertia: f64,
    pub constant_droop: f64,
    pub vdic_schedule: DroopSchedule,
}

impl CaseStudyConfig {
    /// The bundled four-subcase study: 60 s runs with the slow governor on.
    pub fn bundled() -> Self {
        parse_case_study(BUNDLED_CASE_STUDY, "bundled case_study.json")
            .expect("bundled case study is valid")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        parse_case_study(text, origin)
    }

    pub fn with_sim_overrides(mut self, time_step: Option<f64>, duration: Option<f64>) -> Result<Self> {
        self.sim = override_sim(&self.sim, &self.event, time_step, duration)?;
        Ok(self)
    }

    pub fn scenario(&self, subcase: Subcase) -> ScenarioConfig {
        let params = match subcase {
            Subcase::NoControl => SubcaseParams::NoControl,
            Subcase::AddedInertia => SubcaseParams::AddedInertia {
                delta_tj: self.added_inertia,
            },
            Subcase::ConstantDroop => SubcaseParams::ConstantDroop {
                k_total: self.constant_droop,
            },
            Subcase::Vdic => SubcaseParams::Vdic(self.vdic_schedule),
        };
        ScenarioConfig {
            model: self.model.clone(),
            event: self.event,
            sim: self.sim,
            governor: self.governor,
            params,
        }
    }

    /// The four scenarios in `(i)`..`(iv)` order.
    pub fn expand(&self) -> Vec<ScenarioConfig> {
        Subcase::ALL.iter().map(|&s| self.scenario(s)).collect()
    }
}

/// Either document kind, as found on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigDocument {
    Scenario(ScenarioConfig),
    CaseStudy(CaseStudyConfig),
}

impl ConfigDocument {
    pub fn model(&self) -> &SystemModel {
        match self {
            ConfigDocument::Scenario(c) => &c.model,
            ConfigDocument::CaseStudy(c) => &c.model,
        }
    }

    pub fn event(&self) -> &ImbalanceEvent {
        match self {
            ConfigDocument::Scenario(c) => &c.event,
            ConfigDocument::CaseStudy(c) => &c.event,
        }
    }

    pub fn sim(&self) -> &SimConfig {
        match self {
            ConfigDocument::Scenario(c) => &c.sim,
            ConfigDocument::CaseStudy(c) => &c.sim,
        }
    }

    pub fn vdic_schedule(&self) -> Option<DroopSchedule> {
        match self {
            ConfigDocument::Scenario(c) => match c.params {
                SubcaseParams::Vdic(s) => Some(s),
                _ => None,
            },
            ConfigDocument::CaseStudy(c) => Some(c.vdic_schedule),
        }
    }
}

/// Loads and validates a single-scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = read(path)?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn load_case_study(path: &Path) -> Result<CaseStudyConfig> {
    let text = read(path)?;
    parse_case_study(&text, &path.display().to_string())
}

/// Loads either document kind; a top-level `subcase` key marks a scenario.
pub fn load_document(path: &Path) -> Result<ConfigDocument> {
    let text = read(path)?;
    let origin = path.display().to_string();
    let probe: serde_json::Value = parse(&text, &origin)?;
    if probe.get("subcase").is_some() {
        parse_scenario(&text, &origin).map(ConfigDocument::Scenario)
    } else {
        parse_case_study(&text, &origin).map(ConfigDocument::CaseStudy)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(ScenarioError::io(path))
}

// ---- file schema ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    system: SystemSection,
    event: EventSection,
    sim: SimSection,
    #[serde(default)]
    governor: Option<GovernorSection>,
    subcase: Subcase,
    #[serde(default)]
    added_inertia: Option<AddedInertiaSection>,
    #[serde(default)]
    constant_droop: Option<ConstantDroopSection>,
    #[serde(default)]
    vdic_schedule: Option<ScheduleSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseStudyFile {
    schema_version: u32,
    system: SystemSection,
    event: EventSection,
    sim: SimSection,
    #[serde(default)]
    governor: Option<GovernorSection>,
    added_inertia: AddedInertiaSection,
    constant_droop: ConstantDroopSection,
    vdic_schedule: ScheduleSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    system_base_mva: f64,
    generators: Vec<GeneratorSection>,
    #[serde(default)]
    ffrs: Vec<FfrSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorSection {
    nominal_power_mva: f64,
    inertia_constant_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FfrSection {
    id: String,
    droop_upper_bound_pu: f64,
    droop_optimal_pu: f64,
    regulation_margin_pu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventSection {
    delta_pf_pu: f64,
    onset_time_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    time_step_s: f64,
    duration_s: f64,
    #[serde(default)]
    integrator: IntegratorName,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum IntegratorName {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GovernorSection {
    enabled: bool,
    #[serde(default = "default_gain")]
    droop_gain_pu: f64,
    #[serde(default = "default_time_constant")]
    time_constant_s: f64,
}

fn default_gain() -> f64 {
    GovernorSpec::DEFAULT_GAIN
}

fn default_time_constant() -> f64 {
    GovernorSpec::DEFAULT_TIME_CONSTANT
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AddedInertiaSection {
    delta_tj_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantDroopSection {
    k_total_pu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleSection {
    target_inertia_s: f64,
    upper_bound_pu: f64,
    lower_bound_pu: f64,
}

// ---- validation ----

fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let field = err.path().to_string();
        let inner = err.into_inner();
        ScenarioError::Parse {
            origin: origin.to_owned(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

fn at(field: &str) -> impl FnOnce(ffr_inertia::Error) -> ScenarioError + '_ {
    move |err| ScenarioError::invalid(field, err.to_string())
}

struct Shared {
    model: SystemModel,
    event: ImbalanceEvent,
    sim: SimConfig,
    governor: GovernorSpec,
}

fn check_version(version: u32) -> Result<()> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(ScenarioError::invalid(
            "schema_version",
            format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
        ))
    }
}

fn build_shared(
    system: SystemSection,
    event: EventSection,
    sim: SimSection,
    governor: Option<GovernorSection>,
) -> Result<Shared> {
    let mut generators = Vec::with_capacity(system.generators.len());
    for (i, g) in system.generators.iter().enumerate() {
        let spec = GeneratorSpec::new(g.nominal_power_mva, g.inertia_constant_s)
            .map_err(at(&format!("system.generators[{i}]")))?;
        generators.push(spec);
    }
    let mut ffrs = Vec::with_capacity(system.ffrs.len());
    for (i, f) in system.ffrs.into_iter().enumerate() {
        let field = format!("system.ffrs[{i}]");
        if !f
            .id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        {
            return Err(ScenarioError::invalid(
                format!("{field}.id"),
                format!("`{}` may only contain ASCII letters, digits, `_`, `-`, `.`", f.id),
            ));
        }
        let spec = FfrSpec::new(
            f.id,
            f.droop_upper_bound_pu,
            f.droop_optimal_pu,
            f.regulation_margin_pu,
        )
        .map_err(at(&field))?;
        ffrs.push(spec);
    }
    let model = SystemModel::new(system.system_base_mva, generators, ffrs).map_err(at("system"))?;

    let event = ImbalanceEvent::new(event.delta_pf_pu, event.onset_time_s).map_err(at("event"))?;

    let integrator = match sim.integrator {
        IntegratorName::Rk4 => Integrator::Rk4,
        IntegratorName::Euler => Integrator::Euler,
    };
    let sim = SimConfig::new(sim.time_step_s, sim.duration_s, integrator).map_err(at("sim"))?;
    check_horizon(&sim, &event)?;

    let governor = match governor {
        None => GovernorSpec::disabled(),
        Some(g) if !g.enabled => GovernorSpec::disabled(),
        Some(g) => GovernorSpec::new(g.droop_gain_pu, g.time_constant_s).map_err(at("governor"))?,
    };

    Ok(Shared {
        model,
        event,
        sim,
        governor,
    })
}

fn check_horizon(sim: &SimConfig, event: &ImbalanceEvent) -> Result<()> {
    if sim.duration() <= event.onset_time() {
        return Err(ScenarioError::invalid(
            "sim.duration_s",
            format!(
                "{} s ends before the imbalance at {} s",
                sim.duration(),
                event.onset_time()
            ),
        ));
    }
    let position = event.onset_time() / sim.time_step();
    if (position - position.round()).abs() > 1e-9 * position.round().max(1.0) {
        return Err(ScenarioError::invalid(
            "event.onset_time_s",
            format!(
                "{} s is not a whole number of {} s steps",
                event.onset_time(),
                sim.time_step()
            ),
        ));
    }
    Ok(())
}

fn override_sim(
    sim: &SimConfig,
    event: &ImbalanceEvent,
    time_step: Option<f64>,
    duration: Option<f64>,
) -> Result<SimConfig> {
    let sim = SimConfig::new(
        time_step.unwrap_or(sim.time_step()),
        duration.unwrap_or(sim.duration()),
        sim.integrator(),
    )
    .map_err(at("sim"))?;
    check_horizon(&sim, event)?;
    Ok(sim)
}

fn schedule(s: &ScheduleSection) -> Result<DroopSchedule> {
    DroopSchedule::new(s.target_inertia_s, s.upper_bound_pu, s.lower_bound_pu)
        .map_err(at("vdic_schedule"))
}

fn positive(field: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::invalid(
            field,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let file: ScenarioFile = parse(text, origin)?;
    check_version(file.schema_version)?;

    let present = [
        ("added_inertia", file.added_inertia.is_some(), Subcase::AddedInertia),
        ("constant_droop", file.constant_droop.is_some(), Subcase::ConstantDroop),
        ("vdic_schedule", file.vdic_schedule.is_some(), Subcase::Vdic),
    ];
    for (block, is_present, owner) in present {
        if is_present && owner != file.subcase {
            return Err(ScenarioError::invalid(
                block,
                format!("not used by subcase `{}`; remove it", file.subcase),
            ));
        }
    }
    let missing = |block: &str| {
        ScenarioError::invalid(
            block,
            format!("required by subcase `{}` but missing", file.subcase),
        )
    };
    let params = match file.subcase {
        Subcase::NoControl => SubcaseParams::NoControl,
        Subcase::AddedInertia => {
            let s = file.added_inertia.as_ref().ok_or_else(|| missing("added_inertia"))?;
            SubcaseParams::AddedInertia {
                delta_tj: positive("added_inertia.delta_tj_s", s.delta_tj_s)?,
            }
        }
        Subcase::ConstantDroop => {
            let s = file.constant_droop.as_ref().ok_or_else(|| missing("constant_droop"))?;
            SubcaseParams::ConstantDroop {
                k_total: positive("constant_droop.k_total_pu", s.k_total_pu)?,
            }
        }
        Subcase::Vdic => {
            let s = file.vdic_schedule.as_ref().ok_or_else(|| missing("vdic_schedule"))?;
            SubcaseParams::Vdic(schedule(s)?)
        }
    };

    let shared = build_shared(file.system, file.event, file.sim, file.governor)?;
    if !matches!(params, SubcaseParams::NoControl | SubcaseParams::AddedInertia { .. }) {
        require_ffrs(&shared.model)?;
    }
    Ok(ScenarioConfig {
        model: shared.model,
        event: shared.event,
        sim: shared.sim,
        governor: shared.governor,
        params,
    })
}

fn parse_case_study(text: &str, origin: &str) -> Result<CaseStudyConfig> {
    let file: CaseStudyFile = parse(text, origin)?;
    check_version(file.schema_version)?;
    let added_inertia = positive("added_inertia.delta_tj_s", file.added_inertia.delta_tj_s)?;
    let constant_droop = positive("constant_droop.k_total_pu", file.constant_droop.k_total_pu)?;
    let vdic_schedule = schedule(&file.vdic_schedule)?;
    let shared = build_shared(file.system, file.event, file.sim, file.governor)?;
    require_ffrs(&shared.model)?;
    Ok(CaseStudyConfig {
        model: shared.model,
        event: shared.event,
        sim: shared.sim,
        governor: shared.governor,
        added_inertia,
        constant_droop,
        vdic_schedule,
    })
}

fn require_ffrs(model: &SystemModel) -> Result<()> {
    if model.ffrs().iter().any(|f| f.regulation_margin() > 0.0) {
        Ok(())
    } else {
        Err(ScenarioError::invalid(
            "system.ffrs",
            "droop subcases need at least one FFR with a positive regulation margin",
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_case_study_parameters() {
        let c = CaseStudyConfig::bundled();
        assert!((c.model.total_inertia() - 39.2).abs() < 1e-12);
        assert_eq!(c.model.system_base(), 1000.0);
        assert_eq!(c.model.ffrs().len(), 4);
        assert_eq!(c.event.delta_pf(), -0.3);
        assert_eq!(c.event.onset_time(), 10.0);
        assert_eq!(c.vdic_schedule.upper_bound(), 128.0);
        assert_eq!(c.vdic_schedule.lower_bound(), 32.0);
        assert_eq!(c.vdic_schedule.target_inertia(), 40.0);
        assert_eq!(c.constant_droop, 32.0);
        assert_eq!(c.added_inertia, 40.0);
        assert!(c.governor.enabled());
        assert_eq!(c.sim.duration(), 60.0);
        let upper: f64 = c.model.ffrs().iter().map(|f| f.droop_upper_bound()).sum();
        let optimal: f64 = c.model.ffrs().iter().map(|f| f.droop_optimal()).sum();
        assert_eq!((upper, optimal), (128.0, 32.0));
    }

    #[test]
    fn bundled_scenario() {
        let c = ScenarioConfig::bundled();
        assert_eq!(c.subcase(), Subcase::Vdic);
        assert!(!c.governor.enabled());
        assert_eq!(c.sim.time_step(), 1e-3);
        assert_eq!(c.sim.duration(), 20.0);
    }

    #[test]
    fn expand_orders_subcases() {
        let subs: Vec<_> = CaseStudyConfig::bundled().expand().iter().map(|c| c.subcase()).collect();
        assert_eq!(subs, Subcase::ALL);
    }

    #[test]
    fn overrides_revalidate() {
        let c = ScenarioConfig::bundled();
        assert!(c.clone().with_sim_overrides(Some(2e-3), Some(30.0)).is_ok());
        assert!(c.clone().with_sim_overrides(Some(5.0), None).is_err());
        assert!(c.clone().with_sim_overrides(None, Some(5.0)).is_err());
        assert!(c.with_sim_overrides(Some(3e-3), None).is_err());
    }
}

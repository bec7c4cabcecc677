//! Fixed-step simulation of the aggregated swing equation
//! `T_J·dω/dt = ΔP_f + ΔP_r + P_gov`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::control::{allocate_droop, Controller, GovernorSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::integrate::{CompensatedSum, Integrator};
use crate::model::{ImbalanceEvent, SystemModel};

/// Relative slack when checking that the onset lands on the sample grid.
const GRID_TOLERANCE: f64 = 1e-9;

/// Step size, horizon and scheme of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    time_step: f64,
    duration: f64,
    integrator: Integrator,
}

impl SimConfig {
    pub const DEFAULT_TIME_STEP: f64 = 1e-3;
    pub const DEFAULT_DURATION: f64 = 20.0;

    pub fn new(time_step: f64, duration: f64, integrator: Integrator) -> Result<Self> {
        ensure_positive("time_step", time_step)?;
        ensure_positive("duration", duration)?;
        if time_step > duration / 10.0 {
            return Err(Error::invalid(
                "time_step",
                alloc::format!("{time_step} s exceeds a tenth of the duration {duration} s"),
            ));
        }
        Ok(Self {
            time_step,
            duration,
            integrator,
        })
    }

    pub fn time_step(&self) -> f64 {
        self.time_step
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    /// Number of steps; the duration is rounded to whole steps.
    pub fn steps(&self) -> usize {
        libm::round(self.duration / self.time_step) as usize
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            time_step: Self::DEFAULT_TIME_STEP,
            duration: Self::DEFAULT_DURATION,
            integrator: Integrator::Rk4,
        }
    }
}

/// Uniformly sampled result of a run. All series share the length of
/// `sample_times`; `per_ffr_power[i]` belongs to `ffr_ids[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub sample_times: Vec<f64>,
    /// Frequency deviation, per-unit.
    pub omega: Vec<f64>,
    /// `dω/dt`, per-unit per second.
    pub rocof: Vec<f64>,
    /// Total FFR power regulation `ΔP_r`, per-unit.
    pub ffr_power: Vec<f64>,
    /// Instantaneous total droop coefficient.
    pub droop_active: Vec<f64>,
    pub ffr_ids: Vec<String>,
    pub per_ffr_power: Vec<Vec<f64>>,
    pub time_step: f64,
    pub onset_time: f64,
    /// First sample at or after the onset; `None` if the run ends before it.
    pub onset_index: Option<usize>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.sample_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_times.is_empty()
    }

    /// Time since onset of sample `k`, or `None` before the onset.
    pub fn elapsed(&self, k: usize) -> Option<f64> {
        let on = self.onset_index?;
        (k >= on).then(|| (k - on) as f64 * self.time_step)
    }

    /// Indices of samples at or after the onset.
    pub fn post_onset(&self) -> core::ops::Range<usize> {
        match self.onset_index {
            Some(on) => on..self.len(),
            None => self.len()..self.len(),
        }
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.sample_times.len();
        let columns = [&self.omega, &self.rocof, &self.ffr_power, &self.droop_active];
        if columns.iter().any(|c| c.len() != n)
            || self.per_ffr_power.len() != self.ffr_ids.len()
            || self.per_ffr_power.iter().any(|c| c.len() != n)
        {
            return Err(Error::invalid("trace", "series lengths differ"));
        }
        if let Some(on) = self.onset_index {
            if on >= n {
                return Err(Error::invalid("trace", "onset index out of range"));
            }
        }
        Ok(())
    }
}

/// `dω/dt` at absolute time `t` given the power injected by FFRs and governor.
pub fn swing_derivative(
    model: &SystemModel,
    event: &ImbalanceEvent,
    injected_power: f64,
    t: f64,
) -> f64 {
    (event.imbalance_at(t) + injected_power) / model.total_inertia()
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    rocof: f64,
    governor_rate: f64,
    ffr_power: f64,
    droop: f64,
}

/// Integrates the swing equation under `controller` (and the governor, when
/// enabled) with the imbalance from `event`.
///
/// Samples sit at `k·time_step`; the onset must fall on that grid. The
/// controller sees the time elapsed since onset and is inert before it.
/// Identical inputs give bit-identical traces.
pub fn simulate(
    model: &SystemModel,
    event: &ImbalanceEvent,
    controller: &Controller,
    governor: &GovernorSpec,
    config: &SimConfig,
) -> Result<Trace> {
    controller.validate()?;
    let regulating = !matches!(controller, Controller::None);
    if regulating {
        if model.ffrs().is_empty() {
            return Err(Error::invalid(
                "ffrs",
                "an active controller needs at least one FFR",
            ));
        }
        allocate_droop(0.0, model.ffrs())?;
    }

    let dt = config.time_step();
    let steps = config.steps();
    let onset_index = onset_sample(event.onset_time(), dt, steps)?;
    let n = steps + 1;

    let mut trace = Trace {
        sample_times: (0..n).map(|k| k as f64 * dt).collect(),
        omega: Vec::with_capacity(n),
        rocof: Vec::with_capacity(n),
        ffr_power: Vec::with_capacity(n),
        droop_active: Vec::with_capacity(n),
        ffr_ids: model.ffrs().iter().map(|f| String::from(f.id())).collect(),
        per_ffr_power: alloc::vec![Vec::with_capacity(n); model.ffrs().len()],
        time_step: dt,
        onset_time: event.onset_time(),
        onset_index,
    };

    let pre = onset_index.unwrap_or(n);
    for _ in 0..pre {
        trace.omega.push(0.0);
        trace.rocof.push(0.0);
        trace.ffr_power.push(0.0);
        trace.droop_active.push(0.0);
        for col in &mut trace.per_ffr_power {
            col.push(0.0);
        }
    }
    let Some(on) = onset_index else {
        return Ok(trace);
    };

    let tj = model.total_inertia();
    let eval = |elapsed: f64, y: &[f64; 2]| -> Eval {
        let omega = y[0];
        let gov = if governor.enabled() { y[1] } else { 0.0 };
        let (ffr_power, droop, rocof) = match controller.singular_inertia(elapsed) {
            Some(dtj) => {
                let rocof = (event.delta_pf() + gov) / (tj + dtj);
                (-dtj * rocof, f64::INFINITY, rocof)
            }
            None => {
                let p = controller.power(omega, elapsed);
                let t = event.onset_time() + elapsed;
                (p, controller.droop_coefficient(elapsed), swing_derivative(model, event, p + gov, t))
            }
        };
        Eval {
            rocof,
            governor_rate: governor.lag_derivative(omega, gov),
            ffr_power,
            droop,
        }
    };
    let mut rhs = |elapsed: f64, y: &[f64; 2]| {
        let e = eval(elapsed, y);
        [e.rocof, e.governor_rate]
    };

    let mut state = [CompensatedSum::default(); 2];
    let mut shares_cache: Option<(f64, Vec<f64>)> = None;

    for k in on..n {
        let elapsed = (k - on) as f64 * dt;
        let y = state.map(|s| s.value());
        let e = eval(elapsed, &y);
        if !(y[0].is_finite() && e.rocof.is_finite() && e.ffr_power.is_finite()) {
            return Err(Error::Diverged { sample: k });
        }

        trace.omega.push(y[0]);
        trace.rocof.push(e.rocof);
        trace.ffr_power.push(e.ffr_power);
        trace.droop_active.push(if regulating { e.droop } else { 0.0 });
        if regulating {
            let stale = shares_cache.as_ref().is_none_or(|(k_prev, _)| *k_prev != e.droop);
            if stale {
                let shares = allocate_droop(e.droop, model.ffrs())?.shares();
                shares_cache = Some((e.droop, shares));
            }
            let (_, shares) = shares_cache.as_ref().expect("shares computed above");
            for (col, share) in trace.per_ffr_power.iter_mut().zip(shares) {
                col.push(e.ffr_power * share);
            }
        } else {
            for col in &mut trace.per_ffr_power {
                col.push(0.0);
            }
        }

        if k + 1 < n {
            let dy = config.integrator().increment(&mut rhs, elapsed, &y, dt);
            for (s, d) in state.iter_mut().zip(dy) {
                s.add(d);
            }
            if !state.iter().all(|s| s.value().is_finite()) {
                return Err(Error::Diverged { sample: k + 1 });
            }
        }
    }

    Ok(trace)
}

fn onset_sample(onset: f64, dt: f64, steps: usize) -> Result<Option<usize>> {
    let position = onset / dt;
    let index = libm::round(position);
    if libm::fabs(position - index) > GRID_TOLERANCE * index.max(1.0) {
        return Err(Error::invalid(
            "onset_time",
            alloc::format!("{onset} s is not a whole number of {dt} s steps"),
        ));
    }
    let index = index as usize;
    Ok((index <= steps).then_some(index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::DroopSchedule;
    use crate::model::{FfrSpec, GeneratorSpec};

    fn model(tj: f64) -> SystemModel {
        let ffrs = (1..=4)
            .map(|i| FfrSpec::new(alloc::format!("hvdc{i}"), 32.0, 8.0, 1.0).unwrap())
            .collect();
        SystemModel::new(1000.0, alloc::vec![GeneratorSpec::new(1000.0, tj).unwrap()], ffrs).unwrap()
    }

    fn run(controller: Controller, onset: f64, duration: f64) -> Trace {
        let event = ImbalanceEvent::new(-0.3, onset).unwrap();
        let cfg = SimConfig::new(1e-3, duration, Integrator::Rk4).unwrap();
        simulate(&model(39.2), &event, &controller, &GovernorSpec::disabled(), &cfg).unwrap()
    }

    #[test]
    fn swing_derivative_examples() {
        let e = ImbalanceEvent::new(-0.3, 10.0).unwrap();
        let r = swing_derivative(&model(39.2), &e, 0.0, 10.001);
        assert!((r + 0.007_653_061_224_489_796).abs() < 1e-17);
        let r = swing_derivative(&model(79.2), &e, 0.0, 10.001);
        assert!((r + 0.003_787_878_787_878_788).abs() < 1e-17);
        assert_eq!(swing_derivative(&model(39.2), &e, 0.3, 10.5), 0.0);
        assert_eq!(swing_derivative(&model(39.2), &e, 0.0, 9.0), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 10.0, Integrator::Rk4).is_err());
        assert!(SimConfig::new(2.0, 10.0, Integrator::Rk4).is_err());
        assert!(SimConfig::new(1.0, 10.0, Integrator::Rk4).is_ok());
        assert!(SimConfig::new(1e-3, f64::INFINITY, Integrator::Rk4).is_err());
        assert_eq!(SimConfig::default().steps(), 20_000);
    }

    #[test]
    fn no_control_is_a_ramp() {
        let tr = run(Controller::None, 1.0, 3.0);
        let on = tr.onset_index.unwrap();
        assert_eq!(on, 1000);
        assert_eq!(tr.omega[on], 0.0);
        for k in on..tr.len() {
            let t = tr.elapsed(k).unwrap();
            assert!((tr.omega[k] - (-0.3 / 39.2) * t).abs() < 1e-15);
            assert_eq!(tr.ffr_power[k], 0.0);
        }
        assert!(tr.omega[..on].iter().all(|&w| w == 0.0));
    }

    #[test]
    fn run_ending_before_onset_is_flat() {
        let tr = run(Controller::constant_droop(32.0).unwrap(), 10.0, 5.0);
        assert_eq!(tr.onset_index, None);
        assert_eq!(tr.len(), 5001);
        assert!(tr.omega.iter().all(|&w| w == 0.0));
        assert!(tr.post_onset().is_empty());
    }

    #[test]
    fn off_grid_onset_rejected() {
        let event = ImbalanceEvent::new(-0.3, 0.0105).unwrap();
        let cfg = SimConfig::new(1e-3, 1.0, Integrator::Rk4).unwrap();
        let err = simulate(&model(39.2), &event, &Controller::None, &GovernorSpec::disabled(), &cfg);
        assert!(matches!(err, Err(Error::Validation { field: "onset_time", .. })));
    }

    #[test]
    fn deterministic() {
        let c = Controller::Vdic(DroopSchedule::new(40.0, 128.0, 32.0).unwrap());
        assert_eq!(run(c, 1.0, 4.0), run(c, 1.0, 4.0));
    }

    #[test]
    fn per_ffr_split_sums_to_total() {
        let c = Controller::Vdic(DroopSchedule::new(40.0, 128.0, 32.0).unwrap());
        let tr = run(c, 0.5, 4.0);
        tr.validate().unwrap();
        for k in 0..tr.len() {
            let sum: f64 = tr.per_ffr_power.iter().map(|col| col[k]).sum();
            assert!((sum - tr.ffr_power[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn active_controller_without_ffrs_rejected() {
        let m = SystemModel::new(1000.0, alloc::vec![GeneratorSpec::new(1000.0, 10.0).unwrap()], alloc::vec![]).unwrap();
        let event = ImbalanceEvent::new(-0.3, 0.0).unwrap();
        let cfg = SimConfig::new(1e-3, 1.0, Integrator::Rk4).unwrap();
        let c = Controller::constant_droop(1.0).unwrap();
        assert!(simulate(&m, &event, &c, &GovernorSpec::disabled(), &cfg).is_err());
        assert!(simulate(&m, &event, &Controller::None, &GovernorSpec::disabled(), &cfg).is_ok());
    }

    #[test]
    fn stiff_droop_diverges_with_sample_index() {
        let event = ImbalanceEvent::new(-0.3, 0.0).unwrap();
        let cfg = SimConfig::new(0.1, 100.0, Integrator::Rk4).unwrap();
        let c = Controller::constant_droop(1e6).unwrap();
        let err = simulate(&model(1.0), &event, &c, &GovernorSpec::disabled(), &cfg).unwrap_err();
        match err {
            Error::Diverged { sample } => assert!(sample > 0 && sample < 1000),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn governor_alone_settles_at_its_droop() {
        let event = ImbalanceEvent::new(-0.3, 0.0).unwrap();
        let cfg = SimConfig::new(1e-2, 600.0, Integrator::Rk4).unwrap();
        let tr = simulate(&model(39.2), &event, &Controller::None, &GovernorSpec::slow_default(), &cfg).unwrap();
        let last = *tr.omega.last().unwrap();
        assert!((last + 0.3 / 25.0).abs() < 1e-6, "{last}");
    }
}

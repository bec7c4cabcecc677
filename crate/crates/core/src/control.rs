//! FFR power-regulation laws, the slow generator governor, and allocation of
//! the total droop coefficient among FFRs.
//!
//! Every law here is a droop `ΔP_r = −k·ω`; they differ only in how the total
//! coefficient `k` depends on the time elapsed since the imbalance.

use alloc::vec::Vec;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::FfrSpec;

/// Droop power `−k·ω` for a constant total coefficient `k_total ≥ 0`.
pub fn constant_droop_power(k_total: f64, omega: f64) -> Result<f64> {
    ensure_non_negative("k_total", k_total)?;
    Ok(-k_total * omega)
}

/// Bounded time-variant droop schedule.
///
/// The coefficient follows `ΔT_J / t`, which makes the droop worth a constant
/// inertia increment `ΔT_J`, saturated at `upper_bound` near the imbalance and
/// held at `lower_bound` (the steady-state optimal droop) once the hyperbola
/// drops below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroopSchedule {
    target_inertia: f64,
    upper_bound: f64,
    lower_bound: f64,
}

impl DroopSchedule {
    pub fn new(target_inertia: f64, upper_bound: f64, lower_bound: f64) -> Result<Self> {
        ensure_positive("target_inertia", target_inertia)?;
        ensure_positive("upper_bound", upper_bound)?;
        ensure_positive("lower_bound", lower_bound)?;
        if lower_bound > upper_bound {
            return Err(Error::invalid(
                "lower_bound",
                alloc::format!("{lower_bound} exceeds upper_bound {upper_bound}"),
            ));
        }
        Ok(Self {
            target_inertia,
            upper_bound,
            lower_bound,
        })
    }

    pub fn target_inertia(&self) -> f64 {
        self.target_inertia
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Elapsed time at which the hyperbola leaves the upper bound.
    pub fn upper_crossover(&self) -> f64 {
        self.target_inertia / self.upper_bound
    }

    /// Elapsed time at which the hyperbola reaches the lower bound.
    pub fn lower_crossover(&self) -> f64 {
        self.target_inertia / self.lower_bound
    }
}

/// Total droop coefficient of the bounded schedule at `elapsed` seconds after
/// the imbalance. Zero elapsed time saturates at the upper bound.
pub fn vdic_coefficient(schedule: &DroopSchedule, elapsed: f64) -> f64 {
    if elapsed > 0.0 {
        (schedule.target_inertia / elapsed).clamp(schedule.lower_bound, schedule.upper_bound)
    } else {
        schedule.upper_bound
    }
}

pub fn vdic_power(schedule: &DroopSchedule, omega: f64, elapsed: f64) -> f64 {
    -vdic_coefficient(schedule, elapsed) * omega
}

/// FFR regulation strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Controller {
    /// FFRs hold their output.
    None,
    /// Droop with a fixed total coefficient.
    ConstantDroop { k_total: f64 },
    /// Bounded time-variant droop.
    Vdic(DroopSchedule),
    /// Time-variant droop `ΔT_J / t` without saturation. Not realizable in
    /// hardware; used to check the equivalence with added inertia.
    UnboundedVdic { target_inertia: f64 },
}

impl Controller {
    pub fn constant_droop(k_total: f64) -> Result<Self> {
        ensure_non_negative("k_total", k_total)?;
        Ok(Controller::ConstantDroop { k_total })
    }

    pub fn unbounded_vdic(target_inertia: f64) -> Result<Self> {
        ensure_positive("target_inertia", target_inertia)?;
        Ok(Controller::UnboundedVdic { target_inertia })
    }

    /// Re-checks parameters of variants built directly.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Controller::None => Ok(()),
            Controller::ConstantDroop { k_total } => ensure_non_negative("k_total", k_total),
            Controller::Vdic(s) => {
                DroopSchedule::new(s.target_inertia, s.upper_bound, s.lower_bound).map(|_| ())
            }
            Controller::UnboundedVdic { target_inertia } => {
                ensure_positive("target_inertia", target_inertia)
            }
        }
    }

    /// Total droop coefficient at `elapsed` seconds after the imbalance.
    /// Infinite for the unbounded schedule at zero elapsed time.
    pub fn droop_coefficient(&self, elapsed: f64) -> f64 {
        match *self {
            Controller::None => 0.0,
            Controller::ConstantDroop { k_total } => k_total,
            Controller::Vdic(ref s) => vdic_coefficient(s, elapsed),
            Controller::UnboundedVdic { target_inertia } => {
                if elapsed > 0.0 {
                    target_inertia / elapsed
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Total FFR power for deviation `omega` at `elapsed` seconds.
    ///
    /// At the singular point of [`Controller::UnboundedVdic`] (zero elapsed
    /// time) the product is indeterminate; see [`Controller::singular_inertia`].
    pub fn power(&self, omega: f64, elapsed: f64) -> f64 {
        match self {
            Controller::None => 0.0,
            _ => -self.droop_coefficient(elapsed) * omega,
        }
    }

    /// Inertia increment the controller acts as at an indeterminate point.
    ///
    /// For `ΔT_J / t` droop at `t = 0`, `ω/t` tends to the RoCoF, so the
    /// power is `−ΔT_J·dω/dt` and the controller behaves as inertia `ΔT_J`.
    pub fn singular_inertia(&self, elapsed: f64) -> Option<f64> {
        match *self {
            Controller::UnboundedVdic { target_inertia } if !(elapsed > 0.0) => {
                Some(target_inertia)
            }
            _ => None,
        }
    }
}

/// First-order-lag generator governor tracking `−droop_gain·ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorSpec {
    enabled: bool,
    droop_gain: f64,
    time_constant: f64,
}

impl GovernorSpec {
    pub const DEFAULT_GAIN: f64 = 25.0;
    pub const DEFAULT_TIME_CONSTANT: f64 = 8.0;

    pub fn new(droop_gain: f64, time_constant: f64) -> Result<Self> {
        ensure_positive("governor droop_gain", droop_gain)?;
        ensure_positive("governor time_constant", time_constant)?;
        Ok(Self {
            enabled: true,
            droop_gain,
            time_constant,
        })
    }

    pub fn disabled() -> Self {
        Self {
            enabled: false,
            droop_gain: Self::DEFAULT_GAIN,
            time_constant: Self::DEFAULT_TIME_CONSTANT,
        }
    }

    /// Gain 25 p.u., time constant 8 s: an order of magnitude slower than the
    /// FFR response.
    pub fn slow_default() -> Self {
        Self {
            enabled: true,
            droop_gain: Self::DEFAULT_GAIN,
            time_constant: Self::DEFAULT_TIME_CONSTANT,
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn droop_gain(&self) -> f64 {
        self.droop_gain
    }

    pub fn time_constant(&self) -> f64 {
        self.time_constant
    }

    /// `d p_gov / dt` for lag output `power` at deviation `omega`.
    pub fn lag_derivative(&self, omega: f64, power: f64) -> f64 {
        if self.enabled {
            (-self.droop_gain * omega - power) / self.time_constant
        } else {
            0.0
        }
    }
}

impl Default for GovernorSpec {
    fn default() -> Self {
        Self::disabled()
    }
}

/// Internal state of the governor lag: its current power output.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GovernorState {
    pub power: f64,
}

/// Advances the governor lag by `dt` with `omega` held, using the exact
/// step response of the lag. Returns the new output and state.
pub fn governor_power(
    spec: &GovernorSpec,
    omega: f64,
    state: GovernorState,
    dt: f64,
) -> (f64, GovernorState) {
    if !spec.enabled {
        return (0.0, GovernorState::default());
    }
    let target = -spec.droop_gain * omega;
    let decay = libm::exp(-dt / spec.time_constant);
    let power = target + (state.power - target) * decay;
    (power, GovernorState { power })
}

/// Result of [`allocate_droop`].
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Per-FFR droop coefficients, in roster order.
    pub coefficients: Vec<f64>,
    /// The requested total exceeded the summed upper bounds of the FFRs with
    /// positive margin; every such FFR sits at its bound.
    pub saturated: bool,
}

impl Allocation {
    pub fn total(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Each FFR's fraction of the allocated total; all zero when nothing is
    /// allocated.
    pub fn shares(&self) -> Vec<f64> {
        let total = self.total();
        if total > 0.0 {
            self.coefficients.iter().map(|k| k / total).collect()
        } else {
            alloc::vec![0.0; self.coefficients.len()]
        }
    }
}

/// Splits `k_total` among FFRs in proportion to their regulation margins.
///
/// FFRs whose proportional share exceeds their droop upper bound are pinned
/// at the bound and the excess is re-split among the rest, repeated until no
/// share exceeds its bound.
pub fn allocate_droop(k_total: f64, ffrs: &[FfrSpec]) -> Result<Allocation> {
    if k_total.is_nan() || k_total < 0.0 {
        return Err(Error::invalid(
            "k_total",
            alloc::format!("must be >= 0, got {k_total}"),
        ));
    }
    if !ffrs.iter().any(|f| f.regulation_margin() > 0.0) {
        return Err(Error::ZeroMargins);
    }

    let capacity: f64 = ffrs
        .iter()
        .filter(|f| f.regulation_margin() > 0.0)
        .map(|f| f.droop_upper_bound())
        .sum();

    let mut coefficients = alloc::vec![0.0; ffrs.len()];
    let mut open: Vec<usize> = (0..ffrs.len())
        .filter(|&i| ffrs[i].regulation_margin() > 0.0)
        .collect();
    let mut remaining = k_total;

    while !open.is_empty() {
        let margin_sum: f64 = open.iter().map(|&i| ffrs[i].regulation_margin()).sum();
        let mut pinned = Vec::new();
        for &i in &open {
            let share = remaining * ffrs[i].regulation_margin() / margin_sum;
            if share >= ffrs[i].droop_upper_bound() {
                pinned.push(i);
            }
        }
        if pinned.is_empty() {
            for &i in &open {
                coefficients[i] = remaining * ffrs[i].regulation_margin() / margin_sum;
            }
            break;
        }
        for &i in &pinned {
            coefficients[i] = ffrs[i].droop_upper_bound();
            remaining -= ffrs[i].droop_upper_bound();
        }
        open.retain(|i| !pinned.contains(i));
        remaining = remaining.max(0.0);
    }

    Ok(Allocation {
        coefficients,
        saturated: k_total > capacity,
    })
}

//! Aggregated grid model and the power-imbalance disturbance.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// A synchronous generator contributing rotating inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    nominal_power: f64,
    inertia_constant: f64,
}

impl GeneratorSpec {
    /// `nominal_power` in MVA, `inertia_constant` in seconds.
    pub fn new(nominal_power: f64, inertia_constant: f64) -> Result<Self> {
        ensure_positive("generator nominal_power", nominal_power)?;
        ensure_positive("generator inertia_constant", inertia_constant)?;
        Ok(Self {
            nominal_power,
            inertia_constant,
        })
    }

    pub fn nominal_power(&self) -> f64 {
        self.nominal_power
    }

    pub fn inertia_constant(&self) -> f64 {
        self.inertia_constant
    }
}

/// A fast frequency regulation resource (storage, renewable plant, HVDC link).
///
/// Droop coefficients are per-unit power per per-unit frequency on the system
/// base; the regulation margin is per-unit power.
#[derive(Debug, Clone, PartialEq)]
pub struct FfrSpec {
    id: String,
    droop_upper_bound: f64,
    droop_optimal: f64,
    regulation_margin: f64,
}

impl FfrSpec {
    pub fn new(
        id: impl Into<String>,
        droop_upper_bound: f64,
        droop_optimal: f64,
        regulation_margin: f64,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid("ffr id", "must not be empty"));
        }
        ensure_positive("ffr droop_upper_bound", droop_upper_bound)?;
        ensure_positive("ffr droop_optimal", droop_optimal)?;
        if droop_optimal > droop_upper_bound {
            return Err(Error::invalid(
                "ffr droop_optimal",
                alloc::format!(
                    "{droop_optimal} exceeds droop_upper_bound {droop_upper_bound} for `{id}`"
                ),
            ));
        }
        ensure_non_negative("ffr regulation_margin", regulation_margin)?;
        Ok(Self {
            id,
            droop_upper_bound,
            droop_optimal,
            regulation_margin,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn droop_upper_bound(&self) -> f64 {
        self.droop_upper_bound
    }

    pub fn droop_optimal(&self) -> f64 {
        self.droop_optimal
    }

    pub fn regulation_margin(&self) -> f64 {
        self.regulation_margin
    }
}

/// Total inertia constant `Σ(S_i·T_i) / S_sys` in seconds.
pub fn aggregate_inertia(generators: &[GeneratorSpec], system_base: f64) -> Result<f64> {
    if generators.is_empty() {
        return Err(Error::NoGenerators);
    }
    ensure_positive("system_base", system_base)?;
    let stored: f64 = generators
        .iter()
        .map(|g| g.nominal_power * g.inertia_constant)
        .sum();
    Ok(stored / system_base)
}

/// The aggregated single-frequency grid.
///
/// Bus frequency differences, damping and generator primary regulation are
/// not part of the swing equation; the optional governor lives in
/// [`crate::control::GovernorSpec`] and is supplied to the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    system_base: f64,
    generators: Vec<GeneratorSpec>,
    ffrs: Vec<FfrSpec>,
    total_inertia: f64,
}

impl SystemModel {
    pub fn new(system_base: f64, generators: Vec<GeneratorSpec>, ffrs: Vec<FfrSpec>) -> Result<Self> {
        let total_inertia = aggregate_inertia(&generators, system_base)?;
        for (i, ffr) in ffrs.iter().enumerate() {
            if ffrs[..i].iter().any(|other| other.id == ffr.id) {
                return Err(Error::invalid(
                    "ffr id",
                    alloc::format!("duplicate id `{}`", ffr.id),
                ));
            }
        }
        Ok(Self {
            system_base,
            generators,
            ffrs,
            total_inertia,
        })
    }

    /// System power base in MVA.
    pub fn system_base(&self) -> f64 {
        self.system_base
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.generators
    }

    pub fn ffrs(&self) -> &[FfrSpec] {
        &self.ffrs
    }

    /// Total inertia constant `T_J` in seconds.
    pub fn total_inertia(&self) -> f64 {
        self.total_inertia
    }

    /// The same grid with `delta_tj` seconds of real inertia added.
    ///
    /// The increment is modelled as an extra machine rated at the system base,
    /// so `total_inertia` stays the aggregate of the generator roster.
    pub fn with_added_inertia(&self, delta_tj: f64) -> Result<Self> {
        let extra = GeneratorSpec::new(self.system_base, delta_tj)?;
        let mut generators = self.generators.clone();
        generators.push(extra);
        Self::new(self.system_base, generators, self.ffrs.clone())
    }
}

/// A step power imbalance `ΔP_f` (per-unit, negative for a shortage) applied
/// at `onset_time` seconds and held for the rest of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalanceEvent {
    delta_pf: f64,
    onset_time: f64,
}

impl ImbalanceEvent {
    pub fn new(delta_pf: f64, onset_time: f64) -> Result<Self> {
        if !delta_pf.is_finite() || delta_pf == 0.0 {
            return Err(Error::invalid(
                "delta_pf",
                alloc::format!("must be finite and nonzero, got {delta_pf}"),
            ));
        }
        ensure_non_negative("onset_time", onset_time)?;
        Ok(Self {
            delta_pf,
            onset_time,
        })
    }

    pub fn delta_pf(&self) -> f64 {
        self.delta_pf
    }

    pub fn onset_time(&self) -> f64 {
        self.onset_time
    }

    /// Imbalance in effect at absolute time `t`.
    pub fn imbalance_at(&self, t: f64) -> f64 {
        if t >= self.onset_time {
            self.delta_pf
        } else {
            0.0
        }
    }
}

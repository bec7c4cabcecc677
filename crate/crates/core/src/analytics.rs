//! Closed-form trajectories and the equivalent-inertia estimator.
//!
//! A power regulation `ΔP_r` answering an imbalance `ΔP_f` is worth the
//! inertia increment `ΔT_J` that would produce the same RoCoF without it:
//! `ΔP_f/(T_J + ΔT_J) = (ΔP_f + ΔP_r)/T_J`, i.e.
//! `ΔT_J = −T_J·ΔP_r/(ΔP_f + ΔP_r)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sim::Trace;

/// Below this `|ΔP_f + ΔP_r|` (per-unit) the regulation offsets the
/// imbalance and the equivalent inertia is reported as unbounded.
pub const CONDITIONING_THRESHOLD: f64 = 1e-9;

/// Equivalent inertia increment, in seconds, of a regulation `delta_pr`
/// against imbalance `delta_pf` on a grid with inertia `t_j`.
pub fn equivalent_inertia_from_regulation(t_j: f64, delta_pf: f64, delta_pr: f64) -> Result<f64> {
    check_imbalance(delta_pf)?;
    let denominator = delta_pf + delta_pr;
    if !(libm::fabs(denominator) >= CONDITIONING_THRESHOLD) {
        return Err(Error::IllConditioned { denominator });
    }
    Ok(-t_j * delta_pr / denominator)
}

/// Time-resolved equivalent inertia recovered from a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaEstimate {
    pub sample_times: Vec<f64>,
    /// Seconds; `+∞` where the regulation fully offsets the imbalance and
    /// `0` before the onset. Only samples flagged in `valid_mask` are usable.
    pub delta_tj: Vec<f64>,
    pub valid_mask: Vec<bool>,
}

impl InertiaEstimate {
    /// `(time, ΔT_J)` of the usable samples.
    pub fn valid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sample_times
            .iter()
            .zip(&self.delta_tj)
            .zip(&self.valid_mask)
            .filter(|(_, &ok)| ok)
            .map(|((&t, &d), _)| (t, d))
    }
}

/// Applies [`equivalent_inertia_from_regulation`] to the recorded FFR power
/// of every post-onset sample.
pub fn estimate_from_trace(trace: &Trace, t_j: f64, delta_pf: f64) -> Result<InertiaEstimate> {
    check_imbalance(delta_pf)?;
    trace.validate()?;
    let post = trace.post_onset();
    if post.is_empty() {
        return Err(Error::NoPostOnsetSamples);
    }

    let n = trace.len();
    let mut delta_tj = alloc::vec![0.0; n];
    let mut valid_mask = alloc::vec![false; n];
    for k in post {
        match equivalent_inertia_from_regulation(t_j, delta_pf, trace.ffr_power[k]) {
            Ok(v) if v.is_finite() => {
                delta_tj[k] = v;
                valid_mask[k] = true;
            }
            Ok(_) | Err(_) => delta_tj[k] = f64::INFINITY,
        }
    }
    Ok(InertiaEstimate {
        sample_times: trace.sample_times.clone(),
        delta_tj,
        valid_mask,
    })
}

/// Frequency deviation under constant droop `k_total > 0`:
/// `(ΔP_f/k)·(1 − e^{−k·t/T_J})`.
pub fn closed_form_omega_constant_droop(
    delta_pf: f64,
    k_total: f64,
    t_j: f64,
    elapsed: f64,
) -> Result<f64> {
    if !(k_total > 0.0) {
        return Err(Error::invalid(
            "k_total",
            "must be > 0; use closed_form_omega_constant_inertia for no droop",
        ));
    }
    Ok(-(delta_pf / k_total) * libm::expm1(-k_total * elapsed / t_j))
}

/// Equivalent inertia of constant droop: `T_J·(e^{k·t/T_J} − 1)`. Grows
/// from zero without bound and does not depend on the imbalance.
pub fn equivalent_inertia_constant_droop(k_total: f64, t_j: f64, elapsed: f64) -> f64 {
    t_j * libm::expm1(k_total * elapsed / t_j)
}

/// Linear ramp `ΔP_f·t/(T_J + ΔT_J)` under a constant inertia increment
/// (`delta_tj = 0` gives the uncontrolled grid).
pub fn closed_form_omega_constant_inertia(delta_pf: f64, t_j: f64, delta_tj: f64, elapsed: f64) -> f64 {
    debug_assert!(t_j + delta_tj > 0.0);
    delta_pf * elapsed / (t_j + delta_tj)
}

/// Droop coefficient `ΔT_J / t` that is worth a constant inertia increment.
pub fn vdic_schedule_unbounded(delta_tj: f64, elapsed: f64) -> Result<f64> {
    if !(elapsed > 0.0) {
        return Err(Error::Singular);
    }
    Ok(delta_tj / elapsed)
}

/// RoCoF right after the imbalance with inertia `T_J + ΔT_J`.
pub fn initial_rocof(delta_pf: f64, t_j: f64, delta_tj: f64) -> f64 {
    debug_assert!(t_j + delta_tj > 0.0);
    delta_pf / (t_j + delta_tj)
}

fn check_imbalance(delta_pf: f64) -> Result<()> {
    if delta_pf.is_finite() && delta_pf != 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "delta_pf",
            alloc::format!("must be finite and nonzero, got {delta_pf}"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn regulation_examples() {
        assert_eq!(equivalent_inertia_from_regulation(39.2, -0.3, 0.0).unwrap(), 0.0);
        let half = equivalent_inertia_from_regulation(39.2, -0.3, 0.15).unwrap();
        assert!(close(half, 39.2, 1e-12));
        assert!(matches!(
            equivalent_inertia_from_regulation(39.2, -0.3, 0.3),
            Err(Error::IllConditioned { .. })
        ));
        assert!(equivalent_inertia_from_regulation(39.2, 0.0, 0.1).is_err());
    }

    #[test]
    fn constant_droop_closed_form_examples() {
        let far = closed_form_omega_constant_droop(-0.3, 32.0, 39.2, 1e4).unwrap();
        assert!(close(far, -0.009375, 1e-18));
        assert_eq!(closed_form_omega_constant_droop(-0.7, 3.0, 12.0, 0.0).unwrap(), 0.0);
        let one_tau = closed_form_omega_constant_droop(-0.3, 32.0, 39.2, 1.225).unwrap();
        assert!(close(one_tau, -0.005_926_130_239_017_728, 1e-17));
        assert!(closed_form_omega_constant_droop(-0.3, 0.0, 39.2, 1.0).is_err());
    }

    #[test]
    fn constant_droop_inertia_examples() {
        assert_eq!(equivalent_inertia_constant_droop(32.0, 39.2, 0.0), 0.0);
        let t = 39.2 / 32.0 * core::f64::consts::LN_2;
        assert!(close(equivalent_inertia_constant_droop(32.0, 39.2, t), 39.2, 1e-12));
        assert!(close(t, 0.849_105_296_185_933, 1e-15));
    }

    #[test]
    fn constant_inertia_examples() {
        assert!(close(closed_form_omega_constant_inertia(-0.3, 39.2, 40.0, 1.0), -0.003_787_878_787_878_788, 1e-18));
        assert!(close(closed_form_omega_constant_inertia(-0.3, 39.2, 0.0, 1.0), -0.007_653_061_224_489_796, 1e-18));
        assert_eq!(closed_form_omega_constant_inertia(-0.3, 39.2, 40.0, 0.0), 0.0);
    }

    #[test]
    fn unbounded_schedule_examples() {
        assert_eq!(vdic_schedule_unbounded(40.0, 0.5).unwrap(), 80.0);
        assert_eq!(vdic_schedule_unbounded(40.0, 0.3125).unwrap(), 128.0);
        assert_eq!(vdic_schedule_unbounded(40.0, 1.25).unwrap(), 32.0);
        assert_eq!(vdic_schedule_unbounded(40.0, 0.0), Err(Error::Singular));
    }

    #[test]
    fn initial_rocof_examples() {
        assert!(close(initial_rocof(-0.3, 39.2, 0.0), -0.007_653_061_224_489_796, 1e-18));
        assert!(close(initial_rocof(-0.3, 39.2, 40.0), -0.003_787_878_787_878_788, 1e-18));
        assert!(initial_rocof(-0.3, 39.2, 1e12).abs() < 1e-12);
    }

    proptest! {
        // The three members of the equivalence, evaluated on the closed forms.
        #[test]
        fn closed_forms_are_mutually_consistent(
            dpf in -1.0f64..-0.01,
            k in 0.5f64..200.0,
            tj in 1.0f64..100.0,
            x in 0.0f64..5.0,
        ) {
            let t = x * tj / k; // keeps k·t/T_J in [0, 5]
            let omega = closed_form_omega_constant_droop(dpf, k, tj, t).unwrap();
            let dtj = equivalent_inertia_constant_droop(k, tj, t);
            let via_inertia = initial_rocof(dpf, tj, dtj);
            let via_droop = (dpf - k * omega) / tj;
            let analytic = dpf / tj * (-k * t / tj).exp();
            prop_assert!((via_inertia - analytic).abs() <= 1e-12 * analytic.abs());
            prop_assert!((via_droop - analytic).abs() <= 1e-12 * analytic.abs());
        }

        #[test]
        fn constant_droop_inertia_monotone(
            k in 0.1f64..200.0,
            tj in 1.0f64..100.0,
            t in 0.0f64..3.0,
            dt in 1e-3f64..1.0,
            dk in 1e-2f64..10.0,
        ) {
            let base = equivalent_inertia_constant_droop(k, tj, t);
            prop_assert!(equivalent_inertia_constant_droop(k, tj, t + dt) > base);
            if t > 1e-3 {
                prop_assert!(equivalent_inertia_constant_droop(k + dk, tj, t) > base);
            }
        }
    }
}

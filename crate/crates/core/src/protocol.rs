//! Numeric simulation of the standard and adaptive schemes by sequential
//! conditioning on the shifted-diagonal representation.
//!
//! The joint probability of a pattern is the product of the conditional
//! weights of its splitter steps.

use alloc::vec::Vec;

use crate::fock::{make_tmsv, subtract_condition};
use crate::metrics::{baseline_negativity, efficiency_from_records, negativity_pure_schmidt, OutcomeRecord};
use crate::{Arm, Conditioned, DetectionPattern, EfficiencyReport, ProtocolParams, Result, Scheme, ShiftedDiagonalState};

pub use crate::pattern::enumerate_patterns;

/// Photon counts one arm's detectors report, splitter by splitter, for the
/// splitters that are actually inserted.
pub(crate) fn arm_steps(params: &ProtocolParams, pattern: &DetectionPattern, arm: Arm) -> Vec<usize> {
    let n = params.n_splitters();
    let mut steps = Vec::with_capacity(n as usize);
    for ancilla in 1..=n {
        let k = pattern.count_at(arm, ancilla) as usize;
        steps.push(k);
        if k > 0 && params.scheme() == Scheme::Adaptive {
            break;
        }
    }
    steps
}

/// Runs `pattern` on a truncated TMSV: both arms pass their splitters in
/// order and each ancilla is projected on its recorded count.
pub fn run_pattern(
    params: &ProtocolParams,
    pattern: &DetectionPattern,
) -> Result<Conditioned<ShiftedDiagonalState>> {
    pattern.validate(params)?;
    let mut state = make_tmsv(params.lambda(), params.cutoff())?;
    let mut probability = 1.0;
    let t = params.transmittance();
    for arm in [Arm::A, Arm::B] {
        for k in arm_steps(params, pattern, arm) {
            match subtract_condition(&state, arm, t, k)? {
                Conditioned::Posterior { weight, state: post } => {
                    probability *= weight;
                    state = post;
                }
                Conditioned::ZeroProbability => return Ok(Conditioned::ZeroProbability),
            }
        }
    }
    Ok(Conditioned::Posterior {
        weight: probability,
        state,
    })
}

/// Outcome record for one pattern; impossible patterns get probability and
/// negativity zero.
pub fn outcome_record(params: &ProtocolParams, pattern: DetectionPattern, baseline: f64) -> Result<OutcomeRecord> {
    let (probability, negativity) = match run_pattern(params, &pattern)? {
        Conditioned::Posterior { weight, state } => (weight, negativity_pure_schmidt(&state)?),
        Conditioned::ZeroProbability => (0.0, 0.0),
    };
    Ok(OutcomeRecord::new(pattern, probability, negativity, baseline))
}

/// Efficiency from simulating every pattern with at most `k_max` photons per arm.
pub fn numeric_efficiency(params: &ProtocolParams) -> Result<EfficiencyReport> {
    let baseline = baseline_negativity(params.lambda())?;
    let records = enumerate_patterns(params)
        .into_iter()
        .map(|p| outcome_record(params, p, baseline))
        .collect::<Result<Vec<_>>>()?;
    efficiency_from_records(records, baseline)
}

/// Probability of detecting two or more photons on at least one arm (plus
/// the truncation tail): one minus the total weight of the single-photon
/// patterns.
pub fn residual_multiphoton_mass(params: &ProtocolParams) -> Result<f64> {
    let single = params.with_k_max(1);
    let mut covered = 0.0;
    for pattern in enumerate_patterns(&single) {
        covered += run_pattern(&single, &pattern)?.weight();
    }
    Ok((1.0 - covered).max(0.0))
}

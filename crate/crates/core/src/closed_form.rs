//! Analytic single-photon detection probabilities, posterior negativities and
//! efficiencies for the standard (iterated) and adaptive schemes.
//!
//! All posteriors reachable with at most one photon per arm are of two kinds:
//!
//! * symmetric, one photon on each arm: Schmidt weights `∝ n νⁿ`,
//! * asymmetric, one photon on a single arm: Schmidt weights `∝ √n νⁿ`,
//!
//! with an effective squeezing `ν` that depends on where the photons were
//! detected. For the standard scheme `ν = λ T^N` regardless of the ancilla;
//! for the adaptive scheme the exponent of `T` only counts the splitters an
//! arm actually passed.

use alloc::vec::Vec;

// Redundant (and unused) whenever std ends up in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::metrics::{baseline_negativity, efficiency_from_records, OutcomeRecord};
use crate::{Arm, DetectionPattern, EfficiencyReport, Error, ProtocolParams, Result, Scheme};

const POLYLOG_MAX_TERMS: usize = 1_000_000;
const POLYLOG_REL_TOL: f64 = 1e-16;

/// Largest disagreement tolerated between the compact and summed standard
/// efficiencies.
const ASSEMBLY_TOLERANCE: f64 = 1e-12;

/// `Li_{-1/2}(x) = Σ_{k>=1} √k xᵏ` for `0 <= x < 1`.
pub fn polylog_neg_half(x: f64) -> Result<f64> {
    Ok(x * polylog_neg_half_over_x(x)?)
}

/// `Li_{-1/2}(x) / x = Σ_{k>=1} √k x^{k-1}`, equal to 1 at `x = 0`.
fn polylog_neg_half_over_x(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("x", x, "0 <= x < 1"));
    }
    if x >= 1.0 {
        return Err(Error::domain("x", x, "series diverges for x >= 1"));
    }
    let mut sum = 1.0;
    let mut power = 1.0; // x^{k-1}
    for k in 2..=POLYLOG_MAX_TERMS {
        power *= x;
        let term = (k as f64).sqrt() * power;
        if term < POLYLOG_REL_TOL * sum {
            return Ok(sum);
        }
        sum += term;
    }
    Err(Error::NoConvergence {
        x,
        terms: POLYLOG_MAX_TERMS,
    })
}

/// Negativity of the normalized state `∝ Σ n νⁿ |n-1⟩|n-1⟩`.
fn symmetric_negativity(nu: f64) -> f64 {
    let nu2 = nu * nu;
    (1.0 - nu2).powi(3) / (2.0 * (1.0 - nu).powi(4) * (1.0 + nu2)) - 0.5
}

/// Negativity of the normalized state `∝ Σ √n νⁿ |n-1⟩|n⟩`.
fn asymmetric_negativity(nu: f64) -> Result<f64> {
    let ratio = polylog_neg_half_over_x(nu)?;
    let factor = 1.0 - nu * nu;
    Ok(0.5 * factor * factor * ratio * ratio - 0.5)
}

fn check_index(params: &ProtocolParams, index: u32) -> Result<()> {
    if index == 0 || index > params.n_splitters() {
        Err(Error::IndexOutOfRange {
            index,
            n_splitters: params.n_splitters(),
        })
    } else {
        Ok(())
    }
}

fn t_pow(params: &ProtocolParams, exponent: i64) -> f64 {
    params.transmittance().powi(exponent as i32)
}

/// Probability that neither arm clicks (same for both schemes):
/// `(1-λ²) / (1 - λ² T^{2N})`.
pub fn p_no_click(params: &ProtocolParams) -> f64 {
    let l2 = params.lambda().powi(2);
    let tau = params.chain_transmittance();
    (1.0 - l2) / (1.0 - l2 * tau * tau)
}

/// Posterior negativity after no click: a TMSV with `λ T^N`.
pub fn neg_no_click(params: &ProtocolParams) -> f64 {
    let mu = params.lambda() * params.chain_transmittance();
    mu / (1.0 - mu)
}

/// Standard scheme, one photon in ancilla `i` of arm A and `j` of arm B:
/// `(1-T)² T^{i+j-2} λ²(1-λ²)(1+T^{2N}λ²) / (1-T^{2N}λ²)³`.
pub fn p_symmetric_std(params: &ProtocolParams, i: u32, j: u32) -> Result<f64> {
    check_index(params, i)?;
    check_index(params, j)?;
    let (l, t) = (params.lambda(), params.transmittance());
    let l2 = l * l;
    let x = l2 * t_pow(params, 2 * params.n_splitters() as i64);
    Ok((1.0 - t).powi(2) * t_pow(params, i as i64 + j as i64 - 2) * l2 * (1.0 - l2) * (1.0 + x)
        / (1.0 - x).powi(3))
}

/// Standard scheme symmetric negativity, `μ(2+μ+μ²) / ((1-μ)(1+μ²))` with
/// `μ = λT^N`; identical for every `(i, j)`.
pub fn neg_symmetric_std(params: &ProtocolParams) -> f64 {
    let mu = params.lambda() * params.chain_transmittance();
    mu * (2.0 + mu + mu * mu) / ((1.0 - mu) * (1.0 + mu * mu))
}

/// Standard scheme, one photon in ancilla `i` of a single arm:
/// `T^{i+N-1}(1-T) λ²(1-λ²) / (1-T^{2N}λ²)²`.
pub fn p_asymmetric_std(params: &ProtocolParams, i: u32) -> Result<f64> {
    check_index(params, i)?;
    let (l, t) = (params.lambda(), params.transmittance());
    let n = params.n_splitters() as i64;
    let l2 = l * l;
    let x = l2 * t_pow(params, 2 * n);
    Ok(t_pow(params, i as i64 + n - 1) * (1.0 - t) * l2 * (1.0 - l2) / (1.0 - x).powi(2))
}

/// Standard scheme asymmetric negativity,
/// `(1-μ²)² / (2μ²) · Li_{-1/2}(μ)² - ½` with `μ = λT^N` (0 at `μ = 0`).
pub fn neg_asymmetric_std(params: &ProtocolParams) -> Result<f64> {
    asymmetric_negativity(params.lambda() * params.chain_transmittance())
}

/// Adaptive scheme symmetric probability:
/// `(1-T)² T^{i+j-2} λ²(1-λ²)(1+T^{i+j}λ²) / (1-T^{i+j}λ²)³`.
pub fn p_symmetric_adp(params: &ProtocolParams, i: u32, j: u32) -> Result<f64> {
    check_index(params, i)?;
    check_index(params, j)?;
    let (l, t) = (params.lambda(), params.transmittance());
    let l2 = l * l;
    let s = i as i64 + j as i64;
    let x = l2 * t_pow(params, s);
    Ok((1.0 - t).powi(2) * t_pow(params, s - 2) * l2 * (1.0 - l2) * (1.0 + x) / (1.0 - x).powi(3))
}

/// Adaptive scheme symmetric negativity,
/// `(1-T^{i+j}λ²)³ / (2(1-T^{(i+j)/2}λ)⁴(1+T^{i+j}λ²)) - ½`.
pub fn neg_symmetric_adp(params: &ProtocolParams, i: u32, j: u32) -> Result<f64> {
    check_index(params, i)?;
    check_index(params, j)?;
    let nu = params.lambda() * params.transmittance().powf(0.5 * (i + j) as f64);
    Ok(symmetric_negativity(nu))
}

/// Adaptive scheme asymmetric probability:
/// `T^{i+N-1}(1-T) λ²(1-λ²) / (1-T^{i+N}λ²)²`.
pub fn p_asymmetric_adp(params: &ProtocolParams, i: u32) -> Result<f64> {
    check_index(params, i)?;
    let (l, t) = (params.lambda(), params.transmittance());
    let n = params.n_splitters() as i64;
    let l2 = l * l;
    let x = l2 * t_pow(params, i as i64 + n);
    Ok(t_pow(params, i as i64 + n - 1) * (1.0 - t) * l2 * (1.0 - l2) / (1.0 - x).powi(2))
}

/// Adaptive scheme asymmetric negativity,
/// `(1-T^{i+N}λ²)² / (2λ²T^{i+N}) · Li_{-1/2}(λT^{(i+N)/2})² - ½`.
pub fn neg_asymmetric_adp(params: &ProtocolParams, i: u32) -> Result<f64> {
    check_index(params, i)?;
    let exponent = 0.5 * (i + params.n_splitters()) as f64;
    asymmetric_negativity(params.lambda() * params.transmittance().powf(exponent))
}

/// Closed-form efficiency of the standard scheme and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardEfficiencyBreakdown {
    /// `ΔN/N` of every symmetric outcome.
    pub e1: f64,
    /// `ΔN/N` of every asymmetric outcome.
    pub e2: f64,
    pub symmetric_term: f64,
    pub asymmetric_term: f64,
    pub total: f64,
}

fn relative_gain(negativity: f64, baseline: f64) -> f64 {
    if negativity > 0.0 {
        (1.0 - baseline / negativity).max(0.0)
    } else {
        0.0
    }
}

/// Standard-scheme efficiency as a function of `(λ, N, T)`:
///
/// `E = (1-τ)λ²(1-λ²)/(1-λ²τ²)² · [(1-τ)(1+λ²τ²)/(1-λ²τ²)·E1 + 2τ·E2]`
///
/// with `τ = T^N`. The result is checked against the explicit sum over all
/// `N² + 2N` single-photon outcomes.
pub fn efficiency_std(params: &ProtocolParams) -> Result<StandardEfficiencyBreakdown> {
    let params = params.with_scheme(Scheme::Standard);
    let lambda = params.lambda();
    let tau = params.chain_transmittance();
    let mu = lambda * tau;
    let l2 = lambda * lambda;
    let m2 = mu * mu;

    // E1 and E2 written out; they reduce to 1 - N0/N for the two posteriors.
    let e1 = if mu > 0.0 {
        (1.0 - (1.0 - mu) * (1.0 + m2) / (tau * (1.0 - lambda) * (2.0 + mu + m2))).max(0.0)
    } else {
        0.0
    };
    let e2 = if mu > 0.0 {
        let ratio = polylog_neg_half_over_x(mu)?;
        let excess = (1.0 - m2).powi(2) * ratio * ratio - 1.0; // ((1-μ²)²Li² - μ²)/μ²
        (1.0 - lambda / (1.0 - lambda) * 2.0 / excess).max(0.0)
    } else {
        0.0
    };

    let prefactor = (1.0 - tau) * l2 * (1.0 - l2) / (1.0 - m2).powi(2);
    let symmetric_term = prefactor * (1.0 - tau) * (1.0 + m2) / (1.0 - m2) * e1;
    let asymmetric_term = prefactor * 2.0 * tau * e2;
    let total = symmetric_term + asymmetric_term;

    let summed = efficiency_std_summed(&params)?;
    if (summed - total).abs() > ASSEMBLY_TOLERANCE {
        return Err(Error::Contract(alloc::format!(
            "compact efficiency {total} disagrees with outcome sum {summed}"
        )));
    }
    Ok(StandardEfficiencyBreakdown {
        e1,
        e2,
        symmetric_term,
        asymmetric_term,
        total,
    })
}

/// `Σ_{i,j} P_{1i,1j} ΔN/N + 2 Σ_i P_{1i,0} ΔN/N` from the per-outcome forms.
fn efficiency_std_summed(params: &ProtocolParams) -> Result<f64> {
    let baseline = baseline_negativity(params.lambda())?;
    let n = params.n_splitters();
    let sym_gain = relative_gain(neg_symmetric_std(params), baseline);
    let asym_gain = relative_gain(neg_asymmetric_std(params)?, baseline);
    let mut e = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            e += p_symmetric_std(params, i, j)? * sym_gain;
        }
        e += 2.0 * p_asymmetric_std(params, i)? * asym_gain;
    }
    Ok(e)
}

/// Closed-form single-photon outcome table for either scheme, in report
/// order, aggregated into an efficiency report.
pub fn closed_form_report(params: &ProtocolParams) -> Result<EfficiencyReport> {
    let baseline = baseline_negativity(params.lambda())?;
    let scheme = params.scheme();
    let n = params.n_splitters();
    let mut records = Vec::with_capacity(1 + (n as usize + 1).pow(2));
    records.push(OutcomeRecord::new(
        DetectionPattern::no_click(scheme),
        p_no_click(params),
        neg_no_click(params),
        baseline,
    ));
    for i in 1..=n {
        for j in 1..=n {
            let (p, neg) = match scheme {
                Scheme::Standard => (p_symmetric_std(params, i, j)?, neg_symmetric_std(params)),
                Scheme::Adaptive => (p_symmetric_adp(params, i, j)?, neg_symmetric_adp(params, i, j)?),
            };
            records.push(OutcomeRecord::new(DetectionPattern::symmetric(scheme, i, j), p, neg, baseline));
        }
    }
    for arm in [Arm::A, Arm::B] {
        for i in 1..=n {
            let (p, neg) = match scheme {
                Scheme::Standard => (p_asymmetric_std(params, i)?, neg_asymmetric_std(params)?),
                Scheme::Adaptive => (p_asymmetric_adp(params, i)?, neg_asymmetric_adp(params, i)?),
            };
            records.push(OutcomeRecord::new(DetectionPattern::asymmetric(scheme, arm, i), p, neg, baseline));
        }
    }
    efficiency_from_records(records, baseline)
}

/// Adaptive-scheme efficiency: the finite sum over `N²` symmetric and `2N`
/// asymmetric outcomes (there is no compact form).
pub fn efficiency_adp(params: &ProtocolParams) -> Result<EfficiencyReport> {
    closed_form_report(&params.with_scheme(Scheme::Adaptive))
}

/// Efficiency of `params.scheme()` from the closed forms.
pub fn efficiency(params: &ProtocolParams) -> Result<f64> {
    match params.scheme() {
        Scheme::Standard => Ok(efficiency_std(params)?.total),
        Scheme::Adaptive => Ok(efficiency_adp(params)?.efficiency),
    }
}

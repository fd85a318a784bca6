//! Truncated Fock-space representation of the protocol's state family and
//! the beam-splitter / photon-counting conditioning step.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

// Redundant (and unused) whenever std ends up in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Upper edge (exclusive) of the squeezing range in which single-photon
/// outcomes dominate.
pub const SMALL_SQUEEZING_LIMIT: f64 = 0.325;

/// Default truncation tolerance.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-14;

/// Smallest automatic cutoff for a non-vacuum input.
const CUTOFF_FLOOR: usize = 10;

/// Above this photon number binomials are evaluated in log space.
const EXACT_BINOMIAL_MAX: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Every arm passes all `N` beam splitters regardless of earlier clicks.
    Standard,
    /// Feed-forward: an arm stops inserting beam splitters after its first click.
    Adaptive,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Standard => "standard",
            Scheme::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "std" => Ok(Scheme::Standard),
            "adaptive" | "adp" => Ok(Scheme::Adaptive),
            _ => Err(Error::InvalidPattern(alloc::format!("unknown scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    A,
    B,
}

/// Protocol configuration: squeezing, splitter transmittance, number of
/// splitters per arm, scheme, detected-photon cap and truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    lambda: f64,
    transmittance: f64,
    n_splitters: u32,
    scheme: Scheme,
    k_max: u32,
    tail_epsilon: f64,
    n_max: Option<usize>,
}

impl ProtocolParams {
    pub fn new(lambda: f64, transmittance: f64, n_splitters: u32, scheme: Scheme) -> Result<Self> {
        check_lambda(lambda)?;
        check_transmittance(transmittance)?;
        if n_splitters == 0 {
            return Err(Error::domain("n_splitters", 0.0, "N >= 1"));
        }
        Ok(Self {
            lambda,
            transmittance,
            n_splitters,
            scheme,
            k_max: 1,
            tail_epsilon: DEFAULT_TAIL_EPSILON,
            n_max: None,
        })
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_k_max(mut self, k_max: u32) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_tail_epsilon(mut self, tail_epsilon: f64) -> Result<Self> {
        if !(tail_epsilon > 0.0) {
            return Err(Error::domain("tail_epsilon", tail_epsilon, "> 0"));
        }
        self.tail_epsilon = tail_epsilon;
        Ok(self)
    }

    /// Overrides the automatically derived Fock cutoff.
    pub fn with_cutoff(mut self, n_max: usize) -> Self {
        self.n_max = Some(n_max);
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn n_splitters(&self) -> u32 {
        self.n_splitters
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn tail_epsilon(&self) -> f64 {
        self.tail_epsilon
    }

    /// Fock cutoff: the override if one was set, otherwise [`choose_cutoff`].
    pub fn cutoff(&self) -> usize {
        match self.n_max {
            Some(n) => n,
            None => choose_cutoff(self.lambda, self.tail_epsilon).unwrap_or(CUTOFF_FLOOR),
        }
    }

    /// `0 < λ < 0.325`, where multi-photon detections are rare.
    pub fn in_small_squeezing_regime(&self) -> bool {
        self.lambda > 0.0 && self.lambda < SMALL_SQUEEZING_LIMIT
    }

    /// `T^N`, the total transmittance of one arm's splitter chain.
    pub(crate) fn chain_transmittance(&self) -> f64 {
        self.transmittance.powi(self.n_splitters as i32)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::domain("lambda", lambda, "0 <= lambda < 1"))
    }
}

pub(crate) fn check_transmittance(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::domain("transmittance", t, "0 <= T <= 1"))
    }
}

/// Beam-splitter amplitude `ξ_{nk}`: the coefficient of `|n-k⟩|k⟩` in the
/// image of `|n⟩|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BeamSplitterCoefficient(f64);

impl BeamSplitterCoefficient {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `ξ_{nk}(t) = (-1)^k √C(n,k) t^{(n-k)/2} (1-t)^{k/2}`.
pub fn xi_coefficient(n: usize, k: usize, t: f64) -> Result<BeamSplitterCoefficient> {
    check_transmittance(t)?;
    if k > n {
        return Err(Error::domain("k", k as f64, "0 <= k <= n"));
    }
    Ok(BeamSplitterCoefficient(xi(n, k, t)))
}

/// Unchecked `ξ_{nk}(t)`; callers guarantee `k <= n` and `t ∈ [0, 1]`.
pub(crate) fn xi(n: usize, k: usize, t: f64) -> f64 {
    let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
    let m = n - k;
    let magnitude = if n <= EXACT_BINOMIAL_MAX {
        let binom = exact_binomial(n, k) as f64;
        binom.sqrt() * t.sqrt().powi(m as i32) * (1.0 - t).sqrt().powi(k as i32)
    } else {
        // 0 * ln(0) must read as 0 here, not NaN.
        let log_t = if m == 0 { 0.0 } else { 0.5 * m as f64 * t.ln() };
        let log_r = if k == 0 { 0.0 } else { 0.5 * k as f64 * (1.0 - t).ln() };
        (0.5 * ln_binomial(n, k) + log_t + log_r).exp()
    };
    sign * magnitude
}

fn exact_binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k) as u128;
    let n = n as u128;
    // c * (n - k + i) is always divisible by i.
    (1..=k).fold(1u128, |c, i| c * (n - k + i) / i)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .sum()
}

/// Smallest cutoff `n_max` with `λ^{n_max+1} / (1-λ) <= tail_epsilon`, the
/// bound on the neglected ℓ1 mass of TMSV amplitudes. Never below 10 for
/// `λ > 0`; zero for the vacuum.
pub fn choose_cutoff(lambda: f64, tail_epsilon: f64) -> Result<usize> {
    check_lambda(lambda)?;
    if !(tail_epsilon > 0.0) {
        return Err(Error::domain("tail_epsilon", tail_epsilon, "> 0"));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let mut n_max = 0usize;
    let mut power = lambda; // λ^{n_max+1}
    while power / (1.0 - lambda) > tail_epsilon {
        n_max += 1;
        power *= lambda;
    }
    Ok(n_max.max(CUTOFF_FLOOR))
}

/// Pure bipartite state `Σ_{n=n_start}^{n_end} a_n |n - shift_a⟩_A |n - shift_b⟩_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedDiagonalState {
    n_start: usize,
    amplitudes: Vec<f64>,
    shift_a: usize,
    shift_b: usize,
}

impl ShiftedDiagonalState {
    /// Builds a state, checking that every ket index is non-negative and that
    /// all nonzero amplitudes share one sign.
    pub fn new(n_start: usize, amplitudes: Vec<f64>, shift_a: usize, shift_b: usize) -> Result<Self> {
        if n_start < shift_a.max(shift_b) {
            return Err(Error::Contract(alloc::format!(
                "n_start {n_start} below subtracted photons ({shift_a}, {shift_b})"
            )));
        }
        if amplitudes.is_empty() {
            return Err(Error::Contract("state has no amplitudes".into()));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Contract("non-finite amplitude".into()));
        }
        let has_pos = amplitudes.iter().any(|&a| a > 0.0);
        let has_neg = amplitudes.iter().any(|&a| a < 0.0);
        if has_pos && has_neg {
            return Err(Error::Contract("amplitudes change sign".into()));
        }
        Ok(Self {
            n_start,
            amplitudes,
            shift_a,
            shift_b,
        })
    }

    pub fn n_start(&self) -> usize {
        self.n_start
    }

    /// Largest summation index kept.
    pub fn n_end(&self) -> usize {
        self.n_start + self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn shift_a(&self) -> usize {
        self.shift_a
    }

    pub fn shift_b(&self) -> usize {
        self.shift_b
    }

    pub fn shift(&self, arm: Arm) -> usize {
        match arm {
            Arm::A => self.shift_a,
            Arm::B => self.shift_b,
        }
    }

    /// `(n, a_n)` pairs in ascending `n`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, &a)| (self.n_start + i, a))
    }

    /// `((photons in A, photons in B), amplitude)` for every kept term.
    pub fn kets(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.iter()
            .map(move |(n, a)| ((n - self.shift_a, n - self.shift_b), a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
    }
}

/// Result of conditioning on a detector outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditioned<S> {
    /// The outcome has nonzero weight; `state` is the normalized posterior.
    Posterior { weight: f64, state: S },
    /// No amplitude survives the projection.
    ZeroProbability,
}

impl<S> Conditioned<S> {
    pub fn weight(&self) -> f64 {
        match self {
            Conditioned::Posterior { weight, .. } => *weight,
            Conditioned::ZeroProbability => 0.0,
        }
    }

    pub fn into_posterior(self) -> Option<(f64, S)> {
        match self {
            Conditioned::Posterior { weight, state } => Some((weight, state)),
            Conditioned::ZeroProbability => None,
        }
    }
}

/// Truncated two-mode squeezed vacuum `√(1-λ²) Σ_{n<=n_max} λⁿ |n⟩|n⟩`.
///
/// The truncated state is not renormalized; its missing norm is the tail mass.
pub fn make_tmsv(lambda: f64, n_max: usize) -> Result<ShiftedDiagonalState> {
    check_lambda(lambda)?;
    let scale = (1.0 - lambda * lambda).sqrt();
    let mut amplitudes = Vec::with_capacity(n_max + 1);
    let mut power = 1.0;
    for _ in 0..=n_max {
        amplitudes.push(scale * power);
        power *= lambda;
    }
    ShiftedDiagonalState::new(0, amplitudes, 0, 0)
}

/// Mixes `arm` with a vacuum ancilla on a splitter of transmittance `t` and
/// projects the ancilla on `k` photons.
///
/// The returned weight is the squared norm of the projected (unnormalized)
/// state, i.e. the probability of the outcome given `state`.
pub fn subtract_condition(
    state: &ShiftedDiagonalState,
    arm: Arm,
    t: f64,
    k: usize,
) -> Result<Conditioned<ShiftedDiagonalState>> {
    check_transmittance(t)?;
    let shift = state.shift(arm);
    let n_start = state.n_start.max(shift + k);
    if n_start > state.n_end() {
        return Ok(Conditioned::ZeroProbability);
    }
    let amplitudes: Vec<f64> = (n_start..=state.n_end())
        .map(|n| state.amplitudes[n - state.n_start] * xi(n - shift, k, t))
        .collect();
    let weight: f64 = amplitudes.iter().map(|b| b * b).sum();
    if weight == 0.0 {
        return Ok(Conditioned::ZeroProbability);
    }
    let (shift_a, shift_b) = match arm {
        Arm::A => (state.shift_a + k, state.shift_b),
        Arm::B => (state.shift_a, state.shift_b + k),
    };
    let mut posterior = ShiftedDiagonalState {
        n_start,
        amplitudes,
        shift_a,
        shift_b,
    };
    posterior.normalize();
    Ok(Conditioned::Posterior {
        weight,
        state: posterior,
    })
}

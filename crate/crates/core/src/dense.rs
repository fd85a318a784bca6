//! Brute-force reference propagation on a full two-mode amplitude table.
//!
//! Nothing here relies on the shifted-diagonal structure or on the binomial
//! formula for the splitter amplitudes: the image of `|m⟩|0⟩` under a beam
//! splitter is built by applying `(√T a† - √(1-T) c†)^m / √m!` to the vacuum
//! with explicit ladder-operator matrix elements.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
// Redundant (and unused) whenever std ends up in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::check_transmittance;
use crate::metrics::ORACLE_MAX_CUTOFF;
use crate::pattern::enumerate_patterns;
use crate::protocol::arm_steps;
use crate::{Arm, Conditioned, DetectionPattern, Error, ProtocolParams, Result, ShiftedDiagonalState};

/// Real amplitudes `ψ[a, b]` of `Σ ψ[a,b] |a⟩_A |b⟩_B`, `0 <= a, b < dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBipartiteState {
    dim: usize,
    amps: Vec<f64>,
}

impl DenseBipartiteState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            amps: vec![0.0; dim * dim],
        }
    }

    /// Embeds a shifted-diagonal state into a `dim × dim` table.
    pub fn from_shifted(state: &ShiftedDiagonalState, dim: usize) -> Result<Self> {
        let mut out = Self::zeros(dim);
        for ((a, b), amp) in state.kets() {
            if a >= dim || b >= dim {
                return Err(Error::Contract(alloc::format!(
                    "ket |{a},{b}⟩ does not fit a table of side {dim}"
                )));
            }
            out.amps[a * dim + b] = amp;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.amps[a * self.dim + b]
    }

    fn get_mut(&mut self, a: usize, b: usize) -> &mut f64 {
        &mut self.amps[a * self.dim + b]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|x| x * x).sum()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.amps)
    }

    /// Schmidt coefficients: singular values of the amplitude table.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        self.to_matrix().singular_values().iter().copied().collect()
    }

    /// `½[(Σ σ_k)² - 1]` from the singular values of the amplitude table.
    pub fn negativity(&self) -> f64 {
        let l1: f64 = self.schmidt_coefficients().iter().sum();
        (0.5 * (l1 * l1 - 1.0)).max(0.0)
    }

    /// Largest entrywise difference to `other`, minimized over a global sign.
    pub fn max_abs_diff_up_to_sign(&self, other: &Self) -> f64 {
        let diff = |sign: f64| {
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(x, y)| (x - sign * y).abs())
                .fold(0.0, f64::max)
        };
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        diff(1.0).min(diff(-1.0))
    }
}

/// `table[m][k]`: amplitude of `|m-k⟩|k⟩` in the splitter image of `|m⟩|0⟩`,
/// for `m < dim`.
pub fn splitter_table(t: f64, dim: usize) -> Result<Vec<Vec<f64>>> {
    check_transmittance(t)?;
    let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
    let mut table = Vec::with_capacity(dim);
    // coefficients over the ancilla count q, with m - q photons left in the mode
    let mut current = vec![1.0];
    for m in 0..dim {
        if m > 0 {
            let mut next = vec![0.0; m + 1];
            for (q, &c) in current.iter().enumerate() {
                let p = m - 1 - q;
                next[q] += st * ((p + 1) as f64).sqrt() * c;
                next[q + 1] -= sr * ((q + 1) as f64).sqrt() * c;
            }
            let scale = (m as f64).sqrt();
            next.iter_mut().for_each(|x| *x /= scale);
            current = next;
        }
        table.push(current.clone());
    }
    Ok(table)
}

/// One splitter on `arm` followed by projecting its ancilla on `k` photons.
fn dense_step(
    state: &DenseBipartiteState,
    table: &[Vec<f64>],
    arm: Arm,
    k: usize,
) -> Conditioned<DenseBipartiteState> {
    let dim = state.dim;
    // expanded[(mode', other, ancilla)] after the splitter, before measuring
    let mut expanded = vec![0.0; dim * dim * dim];
    let idx = |mode: usize, other: usize, anc: usize| (mode * dim + other) * dim + anc;
    for a in 0..dim {
        for b in 0..dim {
            let amp = state.get(a, b);
            if amp == 0.0 {
                continue;
            }
            let (mode, other) = match arm {
                Arm::A => (a, b),
                Arm::B => (b, a),
            };
            for (anc, coeff) in table[mode].iter().enumerate() {
                expanded[idx(mode - anc, other, anc)] += coeff * amp;
            }
        }
    }
    let mut post = DenseBipartiteState::zeros(dim);
    if k < dim {
        for mode in 0..dim {
            for other in 0..dim {
                let v = expanded[idx(mode, other, k)];
                match arm {
                    Arm::A => *post.get_mut(mode, other) = v,
                    Arm::B => *post.get_mut(other, mode) = v,
                }
            }
        }
    }
    let weight = post.norm_sqr();
    if weight == 0.0 {
        return Conditioned::ZeroProbability;
    }
    let norm = weight.sqrt();
    post.amps.iter_mut().for_each(|x| *x /= norm);
    Conditioned::Posterior {
        weight,
        state: post,
    }
}

/// Truncated TMSV `√(1-λ²) λⁿ |n⟩|n⟩`, `n <= n_max`, as a dense table.
fn dense_tmsv(lambda: f64, n_max: usize) -> DenseBipartiteState {
    let mut s = DenseBipartiteState::zeros(n_max + 1);
    let scale = (1.0 - lambda * lambda).sqrt();
    for n in 0..=n_max {
        *s.get_mut(n, n) = scale * lambda.powi(n as i32);
    }
    s
}

/// Runs `pattern` on the dense table, returning the joint probability and the
/// normalized posterior.
pub fn dense_reference_run(
    params: &ProtocolParams,
    pattern: &DetectionPattern,
) -> Result<Conditioned<DenseBipartiteState>> {
    pattern.validate(params)?;
    let n_max = params.cutoff();
    if n_max > ORACLE_MAX_CUTOFF {
        return Err(Error::DimensionGuard {
            n_max,
            limit: ORACLE_MAX_CUTOFF,
        });
    }
    let table = splitter_table(params.transmittance(), n_max + 1)?;
    let mut state = dense_tmsv(params.lambda(), n_max);
    let mut probability = 1.0;
    for arm in [Arm::A, Arm::B] {
        for k in arm_steps(params, pattern, arm) {
            match dense_step(&state, &table, arm, k) {
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

/// Total dense-path probability over every detector outcome (up to `n_max`
/// photons per arm). Equals the norm of the truncated input state.
pub fn dense_total_probability(params: &ProtocolParams) -> Result<f64> {
    let all = params.with_k_max(params.cutoff() as u32);
    let mut total = 0.0;
    for pattern in enumerate_patterns(&all) {
        total += dense_reference_run(&all, &pattern)?.weight();
    }
    Ok(total)
}

//! Negativity and the efficiency measure.
//!
//! The efficiency of a conditioning protocol is
//! `E = Σ_m P_m · ΔN_m / N_m`, where `N_m` is the negativity of the posterior
//! for outcome `m` and `ΔN_m = max(0, N_m - N_0)` its gain over the input
//! TMSV. Outcomes whose posterior is separable contribute nothing.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fock::check_lambda;
use crate::{DetectionPattern, Error, Result, ShiftedDiagonalState};

/// Largest Fock index the dense trace-norm oracle accepts.
pub const ORACLE_MAX_CUTOFF: usize = 40;

/// Eigenvalues of the partial transpose below this magnitude count as zero.
const EIGEN_ZERO: f64 = 1e-12;

const NORM_TOLERANCE: f64 = 1e-6;

/// Negativity of a pure Schmidt-form state, `½[(Σ|a_n|)² - 1]`.
pub fn negativity_pure_schmidt(state: &ShiftedDiagonalState) -> Result<f64> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Contract(alloc::format!(
            "Schmidt negativity needs a normalized state (norm² = {norm})"
        )));
    }
    let l1: f64 = state.amplitudes().iter().map(|a| a.abs()).sum();
    Ok((0.5 * (l1 * l1 - 1.0)).max(0.0))
}

/// Negativity `(‖ρ^{T_B}‖₁ - 1) / 2` from the dense density matrix of the
/// state, without using its Schmidt form.
pub fn negativity_trace_norm_oracle(state: &ShiftedDiagonalState) -> Result<f64> {
    if state.n_end() > ORACLE_MAX_CUTOFF {
        return Err(Error::DimensionGuard {
            n_max: state.n_end(),
            limit: ORACLE_MAX_CUTOFF,
        });
    }
    // Only Fock levels in the support matter; ρ vanishes elsewhere.
    let a_lo = state.n_start() - state.shift_a();
    let b_lo = state.n_start() - state.shift_b();
    let dim = state.amplitudes().len();
    let mut psi = DMatrix::<f64>::zeros(dim, dim);
    for ((a, b), amp) in state.kets() {
        psi[(a - a_lo, b - b_lo)] = amp;
    }
    Ok(partial_transpose_negativity(&psi))
}

/// Negativity of the real pure state `Σ ψ[a,b] |a⟩|b⟩` via the partial
/// transpose of `|ψ⟩⟨ψ|` on the second mode.
///
/// The partial transpose is split into its connected blocks and each block is
/// diagonalized separately; the spectrum is the union of the block spectra.
pub fn partial_transpose_negativity(psi: &DMatrix<f64>) -> f64 {
    let (da, db) = psi.shape();
    let side = da * db;
    let index = |a: usize, b: usize| a * db + b;

    // ⟨a b| ρ^{T_B} |a' b'⟩ = ⟨a b'| ρ |a' b⟩ = ψ[a,b'] ψ[a',b]
    let mut rho_pt = DMatrix::<f64>::zeros(side, side);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    rho_pt[(index(a, b), index(a2, b2))] = psi[(a, b2)] * psi[(a2, b)];
                }
            }
        }
    }

    let norm: f64 = connected_blocks(&rho_pt)
        .into_iter()
        .map(|block| {
            let sub = DMatrix::from_fn(block.len(), block.len(), |r, c| {
                rho_pt[(block[r], block[c])]
            });
            sub.symmetric_eigenvalues()
                .iter()
                .filter(|ev| ev.abs() >= EIGEN_ZERO)
                .map(|ev| ev.abs())
                .sum::<f64>()
        })
        .sum();
    ((norm - 1.0) / 2.0).max(0.0)
}

/// Index sets of the connected components of the nonzero pattern of a
/// symmetric matrix.
fn connected_blocks(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..n {
        for c in (r + 1)..n {
            if m[(r, c)] != 0.0 {
                let (pr, pc) = (find(&mut parent, r), find(&mut parent, c));
                if pr != pc {
                    parent[pr] = pc;
                }
            }
        }
    }
    let mut roots: Vec<Option<usize>> = vec![None; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match roots[root] {
            Some(b) => blocks[b].push(i),
            None => {
                roots[root] = Some(blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}

/// `λ / (1 - λ)`, the negativity of the input TMSV.
pub fn baseline_negativity(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(lambda / (1.0 - lambda))
}

/// `max(0, post - baseline)`; a tie counts as no gain.
pub fn delta_negativity(post_neg: f64, baseline: f64) -> f64 {
    let d = post_neg - baseline;
    if d > 0.0 {
        d
    } else {
        0.0
    }
}

/// One detection outcome with its probability and posterior entanglement.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub pattern: DetectionPattern,
    pub probability: f64,
    pub negativity: f64,
    /// Clamped gain over the baseline.
    pub delta: f64,
}

impl OutcomeRecord {
    pub fn new(pattern: DetectionPattern, probability: f64, negativity: f64, baseline: f64) -> Self {
        Self {
            pattern,
            probability,
            negativity,
            delta: delta_negativity(negativity, baseline),
        }
    }

    /// `P · ΔN / N`, zero for separable posteriors.
    pub fn contribution(&self) -> f64 {
        if self.negativity > 0.0 {
            self.probability * self.delta / self.negativity
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub baseline: f64,
    pub records: Vec<OutcomeRecord>,
    pub efficiency: f64,
    /// Probability not covered by `records`.
    pub residual_mass: f64,
}

impl EfficiencyReport {
    pub fn find(&self, pattern: &DetectionPattern) -> Option<&OutcomeRecord> {
        self.records.iter().find(|r| &r.pattern == pattern)
    }
}

/// Aggregates outcome records into the efficiency `Σ P_m ΔN_m / N_m`.
pub fn efficiency_from_records(records: Vec<OutcomeRecord>, baseline: f64) -> Result<EfficiencyReport> {
    if let Some(r) = records.iter().find(|r| !(r.probability >= 0.0)) {
        return Err(Error::Contract(alloc::format!(
            "negative probability {} for pattern {}",
            r.probability,
            r.pattern
        )));
    }
    let total: f64 = records.iter().map(|r| r.probability).sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::Contract(alloc::format!(
            "outcome probabilities sum to {total}"
        )));
    }
    let efficiency = records.iter().map(OutcomeRecord::contribution).sum();
    Ok(EfficiencyReport {
        baseline,
        records,
        efficiency,
        residual_mass: (1.0 - total).max(0.0),
    })
}

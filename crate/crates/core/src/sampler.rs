//! Monte Carlo sampling of detector records.
//!
//! Trials are split into fixed-size chunks; chunk `c` draws from the ChaCha
//! stream `c` of the user seed, so the merged table does not depend on how
//! chunks are scheduled.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::fock::{make_tmsv, subtract_condition};
use crate::{Arm, Click, Conditioned, DetectionPattern, ProtocolParams, Result, Scheme, ShiftedDiagonalState};

pub const CHUNK_TRIALS: u64 = 1 << 14;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    pub trials: u64,
    pub counts: BTreeMap<DetectionPattern, u64>,
}

impl FrequencyTable {
    pub fn merge(&mut self, other: FrequencyTable) {
        self.trials += other.trials;
        for (pattern, n) in other.counts {
            *self.counts.entry(pattern).or_insert(0) += n;
        }
    }

    pub fn count(&self, pattern: &DetectionPattern) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn frequency(&self, pattern: &DetectionPattern) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.count(pattern) as f64 / self.trials as f64
        }
    }
}

pub fn chunk_count(trials: u64) -> u64 {
    trials.div_ceil(CHUNK_TRIALS)
}

/// Trials handled by chunk `chunk` out of `trials`.
pub fn chunk_trials(trials: u64, chunk: u64) -> u64 {
    trials
        .saturating_sub(chunk * CHUNK_TRIALS)
        .min(CHUNK_TRIALS)
}

struct Node {
    state: ShiftedDiagonalState,
    next: Option<(Arm, Vec<f64>)>,
}

/// Sequential sampler with a cache of posteriors keyed by outcome history.
struct Sampler<'p> {
    params: &'p ProtocolParams,
    nodes: BTreeMap<Vec<usize>, Node>,
}

impl<'p> Sampler<'p> {
    fn new(params: &'p ProtocolParams) -> Result<Self> {
        let root = make_tmsv(params.lambda(), params.cutoff())?;
        let mut s = Self {
            params,
            nodes: BTreeMap::new(),
        };
        let node = s.node_for(&[], root)?;
        s.nodes.insert(Vec::new(), node);
        Ok(s)
    }

    /// Arm of the next splitter after `history`, if any remain.
    fn next_arm(&self, history: &[usize]) -> Option<Arm> {
        let n = self.params.n_splitters() as usize;
        match self.params.scheme() {
            Scheme::Standard => match history.len() {
                l if l < n => Some(Arm::A),
                l if l < 2 * n => Some(Arm::B),
                _ => None,
            },
            Scheme::Adaptive => {
                let (a, b) = history.split_at(arm_a_length(history, n));
                if !arm_finished(a, n) {
                    Some(Arm::A)
                } else if !arm_finished(b, n) {
                    Some(Arm::B)
                } else {
                    None
                }
            }
        }
    }

    fn node_for(&self, history: &[usize], state: ShiftedDiagonalState) -> Result<Node> {
        let next = match self.next_arm(history) {
            None => None,
            Some(arm) => {
                let top = state.n_end() - state.shift(arm);
                let mut acc = 0.0;
                let mut cdf = Vec::with_capacity(top + 1);
                for k in 0..=top {
                    acc += subtract_condition(&state, arm, self.params.transmittance(), k)?.weight();
                    cdf.push(acc);
                }
                Some((arm, cdf))
            }
        };
        Ok(Node { state, next })
    }

    fn trial(&mut self, rng: &mut ChaCha8Rng) -> Result<DetectionPattern> {
        let mut history = Vec::with_capacity(2 * self.params.n_splitters() as usize);
        loop {
            let node = &self.nodes[&history];
            let Some((arm, cdf)) = &node.next else {
                break;
            };
            let total = *cdf.last().expect("cdf has at least the k = 0 entry");
            let u = uniform(rng) * total;
            let k = cdf
                .iter()
                .position(|&c| u < c)
                .unwrap_or_else(|| cdf.iter().rposition(|&c| c > 0.0).unwrap_or(0));
            let arm = *arm;
            let parent_state = node.state.clone();
            history.push(k);
            if !self.nodes.contains_key(&history) {
                let post = match subtract_condition(&parent_state, arm, self.params.transmittance(), k)? {
                    Conditioned::Posterior { state, .. } => state,
                    Conditioned::ZeroProbability => unreachable!("sampled a zero-weight outcome"),
                };
                let child = self.node_for(&history, post)?;
                self.nodes.insert(history.clone(), child);
            }
        }
        Ok(self.pattern_of(&history))
    }

    fn pattern_of(&self, history: &[usize]) -> DetectionPattern {
        let n = self.params.n_splitters() as usize;
        let a_len = match self.params.scheme() {
            Scheme::Standard => n.min(history.len()),
            Scheme::Adaptive => arm_a_length(history, n),
        };
        let clicks = |steps: &[usize]| -> Vec<Click> {
            steps
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| Click::new(i as u32 + 1, k as u32))
                .collect()
        };
        DetectionPattern {
            arm_a: clicks(&history[..a_len]),
            arm_b: clicks(&history[a_len..]),
            scheme: self.params.scheme(),
        }
    }
}

/// Number of leading history entries that belong to arm A in the adaptive
/// scheme (up to and including its first click, at most `n`).
fn arm_a_length(history: &[usize], n: usize) -> usize {
    match history.iter().take(n).position(|&k| k > 0) {
        Some(i) => i + 1,
        None => history.len().min(n),
    }
}

/// An adaptive arm is finished after a click or after its last splitter.
fn arm_finished(steps: &[usize], n: usize) -> bool {
    steps.len() == n || steps.last().is_some_and(|&k| k > 0)
}

/// Uniform draw in `[0, 1)` with 53 random bits.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Samples `trials` records for chunk `chunk` of seed `seed`.
pub fn sample_chunk(params: &ProtocolParams, seed: u64, chunk: u64, trials: u64) -> Result<FrequencyTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut sampler = Sampler::new(params)?;
    let mut table = FrequencyTable::default();
    for _ in 0..trials {
        let pattern = sampler.trial(&mut rng)?;
        *table.counts.entry(pattern).or_insert(0) += 1;
    }
    table.trials = trials;
    Ok(table)
}

/// Samples `trials` detector records; deterministic for a given seed.
pub fn monte_carlo_sample(params: &ProtocolParams, trials: u64, seed: u64) -> Result<FrequencyTable> {
    let mut table = FrequencyTable::default();
    for chunk in 0..chunk_count(trials) {
        table.merge(sample_chunk(params, seed, chunk, chunk_trials(trials, chunk))?);
    }
    Ok(table)
}

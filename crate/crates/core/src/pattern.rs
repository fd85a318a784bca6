use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::{Arm, Error, ProtocolParams, Result, Scheme};

/// `count` photons detected in ancilla number `ancilla` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Click {
    pub ancilla: u32,
    pub count: u32,
}

impl Click {
    pub fn new(ancilla: u32, count: u32) -> Self {
        Self { ancilla, count }
    }
}

/// Detector record for both arms. Ancillas without an entry saw vacuum.
///
/// Click lists are sorted by ancilla index and hold only nonzero counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DetectionPattern {
    pub arm_a: Vec<Click>,
    pub arm_b: Vec<Click>,
    pub scheme: Scheme,
}

impl DetectionPattern {
    pub fn no_click(scheme: Scheme) -> Self {
        Self {
            arm_a: Vec::new(),
            arm_b: Vec::new(),
            scheme,
        }
    }

    /// One photon in ancilla `i` of arm A and one in ancilla `j` of arm B.
    pub fn symmetric(scheme: Scheme, i: u32, j: u32) -> Self {
        Self {
            arm_a: vec![Click::new(i, 1)],
            arm_b: vec![Click::new(j, 1)],
            scheme,
        }
    }

    /// One photon in ancilla `i` of `arm`, nothing on the other arm.
    pub fn asymmetric(scheme: Scheme, arm: Arm, i: u32) -> Self {
        let clicks = vec![Click::new(i, 1)];
        match arm {
            Arm::A => Self {
                arm_a: clicks,
                arm_b: Vec::new(),
                scheme,
            },
            Arm::B => Self {
                arm_a: Vec::new(),
                arm_b: clicks,
                scheme,
            },
        }
    }

    pub fn clicks(&self, arm: Arm) -> &[Click] {
        match arm {
            Arm::A => &self.arm_a,
            Arm::B => &self.arm_b,
        }
    }

    pub fn total(&self, arm: Arm) -> u32 {
        self.clicks(arm).iter().map(|c| c.count).sum()
    }

    /// Photons counted by ancilla `ancilla` of `arm`.
    pub fn count_at(&self, arm: Arm, ancilla: u32) -> u32 {
        self.clicks(arm)
            .iter()
            .find(|c| c.ancilla == ancilla)
            .map_or(0, |c| c.count)
    }

    /// Report class: no click, both arms, arm A only, arm B only.
    fn class(&self) -> u8 {
        match (self.arm_a.is_empty(), self.arm_b.is_empty()) {
            (true, true) => 0,
            (false, false) => 1,
            (false, true) => 2,
            (true, false) => 3,
        }
    }

    pub fn validate(&self, params: &ProtocolParams) -> Result<()> {
        if self.scheme != params.scheme() {
            return Err(Error::InvalidPattern(format!(
                "{} pattern used with {} parameters",
                self.scheme,
                params.scheme()
            )));
        }
        let n = params.n_splitters();
        for arm in [Arm::A, Arm::B] {
            let clicks = self.clicks(arm);
            for c in clicks {
                if c.ancilla == 0 || c.ancilla > n {
                    return Err(Error::IndexOutOfRange {
                        index: c.ancilla,
                        n_splitters: n,
                    });
                }
                if c.count == 0 {
                    return Err(Error::InvalidPattern("zero-count click entry".into()));
                }
            }
            if clicks.windows(2).any(|w| w[0].ancilla >= w[1].ancilla) {
                return Err(Error::InvalidPattern("clicks not sorted by ancilla".into()));
            }
            if self.scheme == Scheme::Adaptive && clicks.len() > 1 {
                return Err(Error::InvalidPattern(
                    "adaptive arm stops after its first click".into(),
                ));
            }
            if self.total(arm) > params.k_max() {
                return Err(Error::InvalidPattern(format!(
                    "{} photons on one arm exceed k_max = {}",
                    self.total(arm),
                    params.k_max()
                )));
            }
        }
        Ok(())
    }
}

/// Report order: no click, then both-arm patterns, then arm A only, then arm
/// B only; lexicographic by click lists inside each class.
impl Ord for DetectionPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.scheme
            .cmp(&other.scheme)
            .then(self.class().cmp(&other.class()))
            .then_with(|| self.arm_a.cmp(&other.arm_a))
            .then_with(|| self.arm_b.cmp(&other.arm_b))
    }
}

impl PartialOrd for DetectionPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arm_a.is_empty() && self.arm_b.is_empty() {
            return f.write_str("none");
        }
        let mut first = true;
        for (label, clicks) in [("A", &self.arm_a), ("B", &self.arm_b)] {
            for c in clicks {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{label}{}", c.ancilla)?;
                if c.count != 1 {
                    write!(f, "x{}", c.count)?;
                }
            }
        }
        Ok(())
    }
}

/// All click lists one arm can produce with `1..=cap` detected photons.
fn arm_configurations(scheme: Scheme, n_splitters: u32, cap: u32) -> Vec<Vec<Click>> {
    let mut out = Vec::new();
    match scheme {
        Scheme::Adaptive => {
            for i in 1..=n_splitters {
                for c in 1..=cap {
                    out.push(vec![Click::new(i, c)]);
                }
            }
        }
        Scheme::Standard => {
            let mut counts = vec![0u32; n_splitters as usize];
            fill_counts(&mut counts, 0, cap, &mut out);
        }
    }
    out.sort();
    out
}

fn fill_counts(counts: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<Click>>) {
    if pos == counts.len() {
        let clicks: Vec<Click> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| Click::new(i as u32 + 1, c))
            .collect();
        if !clicks.is_empty() {
            out.push(clicks);
        }
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        fill_counts(counts, pos + 1, remaining - c, out);
    }
    counts[pos] = 0;
}

/// Every detection pattern with at most `k_max` photons per arm, in report
/// order. For `k_max = 1` this is the no-click pattern, the `N²` symmetric
/// patterns and the `2N` asymmetric ones.
pub fn enumerate_patterns(params: &ProtocolParams) -> Vec<DetectionPattern> {
    let scheme = params.scheme();
    let configs = arm_configurations(scheme, params.n_splitters(), params.k_max());
    let mut out = Vec::with_capacity((configs.len() + 1).pow(2));
    out.push(DetectionPattern::no_click(scheme));
    for a in &configs {
        for b in &configs {
            out.push(DetectionPattern {
                arm_a: a.clone(),
                arm_b: b.clone(),
                scheme,
            });
        }
    }
    for arm in [Arm::A, Arm::B] {
        for c in &configs {
            let mut p = DetectionPattern::no_click(scheme);
            match arm {
                Arm::A => p.arm_a = c.clone(),
                Arm::B => p.arm_b = c.clone(),
            }
            out.push(p);
        }
    }
    out.sort();
    out
}

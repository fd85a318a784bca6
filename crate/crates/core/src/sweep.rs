//! Efficiency sweeps over the `(N, T)` plane and per-`N` maximization over
//! the transmittance.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

// Redundant (and unused) whenever std ends up in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::closed_form;
use crate::{Error, ProtocolParams, Result, Scheme};

pub const T_LOWER: f64 = 0.05;
pub const T_UPPER: f64 = 0.9999;
pub const COARSE_STEP: f64 = 1e-3;
pub const T_RESOLUTION: f64 = 1e-7;
pub const MAX_SPLITTERS: u32 = 64;

/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub lambda: f64,
    pub n_splitters: u32,
    pub transmittance: f64,
    pub efficiency: f64,
    /// Argmax row for its `(λ, N, scheme)`.
    pub is_locus_point: bool,
    /// The argmax sits on an edge of the searched `T` interval.
    pub at_boundary: bool,
    /// `0 < λ < 0.325`.
    pub in_small_squeezing_regime: bool,
}

/// Efficiency from the closed forms (the adaptive one is a finite sum).
pub fn evaluate(lambda: f64, n_splitters: u32, t: f64, scheme: Scheme) -> Result<f64> {
    closed_form::efficiency(&ProtocolParams::new(lambda, t, n_splitters, scheme)?)
}

fn check_range(n_range: &RangeInclusive<u32>) -> Result<()> {
    if n_range.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if *n_range.start() < 1 || *n_range.end() > MAX_SPLITTERS {
        return Err(Error::domain(
            "n_splitters",
            *n_range.end() as f64,
            "N range within 1..=64",
        ));
    }
    Ok(())
}

/// Evaluates the efficiency on every `(N, T)` grid point, `N` outer and `T`
/// inner, both ascending. The best grid point of each `N` (lowest `T` on
/// ties) is flagged as its locus point.
pub fn sweep_grid(
    lambda: f64,
    n_range: RangeInclusive<u32>,
    t_grid: &[f64],
    scheme: Scheme,
) -> Result<Vec<SweepRecord>> {
    check_range(&n_range)?;
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::domain("transmittance", t, "grid values in (0, 1]"));
    }
    let mut ts = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let in_regime = ProtocolParams::new(lambda, 1.0, 1, scheme)?.in_small_squeezing_regime();

    let mut rows = Vec::with_capacity(ts.len() * n_range.clone().count());
    for n in n_range {
        let first = rows.len();
        for &t in &ts {
            rows.push(SweepRecord {
                scheme,
                lambda,
                n_splitters: n,
                transmittance: t,
                efficiency: evaluate(lambda, n, t, scheme)?,
                is_locus_point: false,
                at_boundary: false,
                in_small_squeezing_regime: in_regime,
            });
        }
        let block = &mut rows[first..];
        let mut best = 0;
        for (i, r) in block.iter().enumerate() {
            if r.efficiency > block[best].efficiency {
                best = i;
            }
        }
        block[best].is_locus_point = true;
        block[best].at_boundary = best == 0 || best + 1 == block.len();
    }
    Ok(rows)
}

/// `T` grid `start, start + step, …` up to and including `stop`.
pub fn t_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::EmptyGrid);
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

/// Coarse search grid: `[0.05, 0.999]` in steps of 1e-3, plus `0.9999`.
fn coarse_grid() -> Vec<f64> {
    let mut g = t_grid(T_LOWER, 0.999, COARSE_STEP).expect("static grid");
    g.push(T_UPPER);
    g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TMaximum {
    pub t_star: f64,
    pub e_star: f64,
    pub at_boundary: bool,
}

#[derive(Clone, Copy)]
struct Best {
    t: f64,
    e: f64,
}

impl Best {
    /// Keeps the larger efficiency; on ties, the smaller transmittance.
    fn offer(&mut self, t: f64, e: f64) {
        if e > self.e || (e == self.e && t < self.t) {
            self.t = t;
            self.e = e;
        }
    }
}

/// Golden-section maximization on `[lo, hi]` down to `tol`, feeding every
/// evaluation into `best`.
fn golden_section<F>(f: &F, mut lo: f64, mut hi: f64, tol: f64, best: &mut Best) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    best.offer(x1, f1);
    best.offer(x2, f2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
            best.offer(x1, f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
            best.offer(x2, f2);
        }
    }
    Ok(())
}

/// Maximizes the efficiency over `T ∈ [0.05, 0.9999]` for fixed `λ` and `N`:
/// coarse grid, then three rounds of golden-section refinement on shrinking
/// brackets around the incumbent, ending at a `T` resolution of 1e-7.
pub fn max_over_t(lambda: f64, n_splitters: u32, scheme: Scheme) -> Result<TMaximum> {
    check_range(&(n_splitters..=n_splitters))?;
    let f = |t: f64| evaluate(lambda, n_splitters, t, scheme);

    let grid = coarse_grid();
    let mut best = Best {
        t: grid[0],
        e: f(grid[0])?,
    };
    for &t in &grid[1..] {
        best.offer(t, f(t)?);
    }

    for (half_width, tol) in [(COARSE_STEP, 1e-5), (1e-5, 1e-6), (1e-6, T_RESOLUTION)] {
        let lo = (best.t - half_width).max(T_LOWER);
        let hi = (best.t + half_width).min(T_UPPER);
        if hi > lo {
            golden_section(&f, lo, hi, tol, &mut best)?;
        }
    }

    let at_boundary =
        best.e > 0.0 && (best.t - T_LOWER <= T_RESOLUTION || T_UPPER - best.t <= T_RESOLUTION);
    Ok(TMaximum {
        t_star: best.t,
        e_star: best.e,
        at_boundary,
    })
}

/// Maximum-efficiency locus: one refined argmax row per `(λ, N)`, sorted by
/// `λ` then `N`.
pub fn loci(lambdas: &[f64], n_range: RangeInclusive<u32>, scheme: Scheme) -> Result<Vec<SweepRecord>> {
    check_range(&n_range)?;
    if lambdas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len() * n_range.clone().count());
    for &lambda in &sorted {
        let in_regime = ProtocolParams::new(lambda, 1.0, 1, scheme)?.in_small_squeezing_regime();
        for n in n_range.clone() {
            let m = max_over_t(lambda, n, scheme)?;
            rows.push(SweepRecord {
                scheme,
                lambda,
                n_splitters: n,
                transmittance: m.t_star,
                efficiency: m.e_star,
                is_locus_point: true,
                at_boundary: m.at_boundary,
                in_small_squeezing_regime: in_regime,
            });
        }
    }
    Ok(rows)
}

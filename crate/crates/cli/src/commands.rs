use std::io::Write;
use std::path::Path;

use psub_core::closed_form::{self, closed_form_report};
use psub_core::dense::{dense_reference_run, DenseBipartiteState};
use psub_core::metrics::{negativity_pure_schmidt, ORACLE_MAX_CUTOFF};
use psub_core::protocol::{numeric_efficiency, run_pattern};
use psub_core::sampler::{chunk_count, chunk_trials, sample_chunk, FrequencyTable};
use psub_core::sweep::{self, sweep_grid, t_grid};
use psub_core::{Conditioned, Error, ProtocolParams, Scheme, SweepRecord};
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::args::{Cli, Command, CsvOutput, LociArgs, McArgs, NRange, ProtocolArgs, RunArgs, SweepArgs};
use crate::error::CliError;
use crate::output::{emit_csv, fmt_sig, write_plot_script, Destination};

/// Largest allowed closed-form vs oracle deviation in `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// Significance level of the Monte Carlo goodness-of-fit report.
const MC_SIGNIFICANCE: f64 = 0.001;

/// Human-readable output goes to `out`, notes and diagnostics to `err`.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|e| CliError::io(Path::new("<output>"), e))?
    };
}

pub fn dispatch(cli: Cli, io: &mut Io<'_>) -> Result<(), CliError> {
    let out_dir = cli.out_dir.as_deref();
    let name = cli.command.name();
    match cli.command {
        Command::Run(a) => run(&a, out_dir, io),
        Command::Sweep(a) => sweep_cmd(&a, out_dir, name, io),
        Command::Loci(a) => loci_cmd(&a, out_dir, name, io),
        Command::Verify(a) => verify(&a, io),
        Command::Mc(a) => monte_carlo(&a, io),
    }
}

impl ProtocolArgs {
    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        let p = ProtocolParams::new(self.lambda, self.t, self.n, self.scheme)?.with_tail_epsilon(self.tail_epsilon)?;
        Ok(match self.cutoff {
            Some(c) => p.with_cutoff(c),
            None => p,
        })
    }
}

fn regime_note(params: &ProtocolParams, io: &mut Io<'_>) -> Result<(), CliError> {
    if !params.in_small_squeezing_regime() {
        say!(
            io.err,
            "note: lambda = {} is outside (0, 0.325); multi-photon detections are not negligible there",
            params.lambda()
        );
    }
    Ok(())
}

fn header(params: &ProtocolParams, io: &mut Io<'_>) -> Result<(), CliError> {
    say!(
        io.out,
        "scheme {}  lambda {}  N {}  T {}  cutoff {}{}",
        params.scheme(),
        params.lambda(),
        params.n_splitters(),
        params.transmittance(),
        params.cutoff(),
        if params.in_small_squeezing_regime() { "" } else { "  [outside small-squeezing regime]" }
    );
    Ok(())
}

fn run(a: &RunArgs, out_dir: Option<&Path>, io: &mut Io<'_>) -> Result<(), CliError> {
    let params = a.protocol.params()?.with_k_max(a.k_max);
    regime_note(&params, io)?;
    let report = numeric_efficiency(&params)?;
    header(&params, io)?;
    say!(io.out, "baseline negativity {}", fmt_sig(report.baseline, 12));
    say!(
        io.out,
        "{:<14} {:>20} {:>20} {:>20} {:>20}",
        "outcome",
        "probability",
        "negativity",
        "gain",
        "contribution"
    );
    for r in &report.records {
        say!(
            io.out,
            "{:<14} {:>20} {:>20} {:>20} {:>20}",
            r.pattern.to_string(),
            fmt_sig(r.probability, 12),
            fmt_sig(r.negativity, 12),
            fmt_sig(r.delta, 12),
            fmt_sig(r.contribution(), 12)
        );
    }
    say!(io.out, "unlisted probability {}", fmt_sig(report.residual_mass, 12));
    say!(io.out, "efficiency {}", fmt_sig(report.efficiency, 12));
    if a.k_max == 1 {
        let closed = closed_form::efficiency(&params)?;
        say!(io.out, "closed-form efficiency {}", fmt_sig(closed, 12));
    }

    if a.out.is_some() || out_dir.is_some() {
        let dest = Destination::resolve(a.out.as_deref(), out_dir, "run");
        let row = SweepRecord {
            scheme: params.scheme(),
            lambda: params.lambda(),
            n_splitters: params.n_splitters(),
            transmittance: params.transmittance(),
            efficiency: report.efficiency,
            is_locus_point: false,
            at_boundary: false,
            in_small_squeezing_regime: params.in_small_squeezing_regime(),
        };
        write_rows(&[row], &dest, None, io)?;
    }
    Ok(())
}

fn check_n_range(r: &NRange) -> Result<(), CliError> {
    if r.n_from > r.n_to {
        return Err(CliError::Usage(format!("empty N range {}..={}", r.n_from, r.n_to)));
    }
    Ok(())
}

fn csv_destination(o: &CsvOutput, out_dir: Option<&Path>, name: &str) -> Result<Destination, CliError> {
    let dest = Destination::resolve(o.out.as_deref(), out_dir, name);
    if o.plot_script.is_some() && dest == Destination::Stdout {
        return Err(CliError::Usage(
            "--plot-script needs the CSV in a file (--out or --out-dir/PSUB_OUT_DIR)".into(),
        ));
    }
    if let (None, Some(dir)) = (&o.out, out_dir) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(dest)
}

fn write_rows(
    rows: &[SweepRecord],
    dest: &Destination,
    plot_script: Option<&Path>,
    io: &mut Io<'_>,
) -> Result<(), CliError> {
    emit_csv(rows, dest, io.out)?;
    if let Destination::File(path) = dest {
        say!(io.err, "wrote {} rows to {}", rows.len(), path.display());
        if let Some(script) = plot_script {
            write_plot_script(script, path)?;
            say!(io.err, "wrote plotting script {}", script.display());
        }
    }
    Ok(())
}

fn boundary_notes(rows: &[SweepRecord], io: &mut Io<'_>) -> Result<(), CliError> {
    for r in rows.iter().filter(|r| r.is_locus_point && r.at_boundary) {
        say!(
            io.err,
            "note: lambda = {} N = {}: maximum on the edge of the T range (T = {})",
            r.lambda,
            r.n_splitters,
            fmt_sig(r.transmittance, 12)
        );
    }
    Ok(())
}

fn sweep_cmd(a: &SweepArgs, out_dir: Option<&Path>, name: &str, io: &mut Io<'_>) -> Result<(), CliError> {
    check_n_range(&a.n_range)?;
    let dest = csv_destination(&a.output, out_dir, name)?;
    let grid = t_grid(a.t_min, a.t_max, a.t_step)?;
    regime_note(&ProtocolParams::new(a.lambda, 1.0, 1, a.scheme)?, io)?;
    // One task per N; the concatenation keeps the N-major row order.
    let blocks = (a.n_range.n_from..=a.n_range.n_to)
        .into_par_iter()
        .map(|n| sweep_grid(a.lambda, n..=n, &grid, a.scheme))
        .collect::<Result<Vec<_>, Error>>()?;
    let rows: Vec<SweepRecord> = blocks.into_iter().flatten().collect();
    boundary_notes(&rows, io)?;
    write_rows(&rows, &dest, a.output.plot_script.as_deref(), io)
}

fn loci_cmd(a: &LociArgs, out_dir: Option<&Path>, name: &str, io: &mut Io<'_>) -> Result<(), CliError> {
    check_n_range(&a.n_range)?;
    if a.lambdas.is_empty() {
        return Err(Error::EmptyGrid.into());
    }
    let dest = csv_destination(&a.output, out_dir, name)?;
    let mut lambdas = a.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    for &l in &lambdas {
        regime_note(&ProtocolParams::new(l, 1.0, 1, a.scheme)?, io)?;
    }
    let range = a.n_range.n_from..=a.n_range.n_to;
    let blocks = lambdas
        .par_iter()
        .map(|&l| sweep::loci(&[l], range.clone(), a.scheme))
        .collect::<Result<Vec<_>, Error>>()?;
    let rows: Vec<SweepRecord> = blocks.into_iter().flatten().collect();
    boundary_notes(&rows, io)?;
    write_rows(&rows, &dest, a.output.plot_script.as_deref(), io)
}

/// Probability and negativity of one pattern on one path; `None` for
/// outcomes the path finds impossible.
fn outcome_of(c: Conditioned<f64>) -> (f64, Option<f64>) {
    match c {
        Conditioned::Posterior { weight, state } => (weight, Some(state)),
        Conditioned::ZeroProbability => (0.0, None),
    }
}

fn verify(a: &ProtocolArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let params = a.params()?;
    if params.cutoff() > ORACLE_MAX_CUTOFF {
        return Err(Error::DimensionGuard {
            n_max: params.cutoff(),
            limit: ORACLE_MAX_CUTOFF,
        }
        .into());
    }
    regime_note(&params, io)?;
    header(&params, io)?;
    let report = closed_form_report(&params)?;
    say!(
        io.out,
        "{:<10} {:>18} {:>11} {:>11} {:>18} {:>11} {:>11} {:>11}",
        "outcome",
        "P closed",
        "dP fast",
        "dP dense",
        "N closed",
        "dN fast",
        "dN dense",
        "d amp"
    );
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut track = |d: f64, what: String| {
        if !(d <= worst) {
            worst = d;
            worst_at = what;
        }
    };
    for r in &report.records {
        let fast = run_pattern(&params, &r.pattern)?;
        let dense = dense_reference_run(&params, &r.pattern)?;
        let amp = match (&fast, &dense) {
            (Conditioned::Posterior { state: sf, .. }, Conditioned::Posterior { state: sd, .. }) => {
                Some(sd.max_abs_diff_up_to_sign(&DenseBipartiteState::from_shifted(sf, sd.dim())?))
            }
            _ => None,
        };
        let fast = match fast {
            Conditioned::Posterior { weight, state } => Conditioned::Posterior {
                weight,
                state: negativity_pure_schmidt(&state)?,
            },
            Conditioned::ZeroProbability => Conditioned::ZeroProbability,
        };
        let dense = match dense {
            Conditioned::Posterior { weight, state } => Conditioned::Posterior {
                weight,
                state: state.negativity(),
            },
            Conditioned::ZeroProbability => Conditioned::ZeroProbability,
        };
        let (pf, nf) = outcome_of(fast);
        let (pd, nd) = outcome_of(dense);
        let dpf = (pf - r.probability).abs();
        let dpd = (pd - r.probability).abs();
        track(dpf, format!("P fast {}", r.pattern));
        track(dpd, format!("P dense {}", r.pattern));
        // Negativities only mean something for possible outcomes.
        let dn = |n: Option<f64>| n.map(|n| (n - r.negativity).abs());
        let (dnf, dnd) = (dn(nf), dn(nd));
        if let Some(d) = dnf {
            track(d, format!("N fast {}", r.pattern));
        }
        if let Some(d) = dnd {
            track(d, format!("N dense {}", r.pattern));
        }
        if let Some(d) = amp {
            track(d, format!("amplitudes {}", r.pattern));
        }
        let show = |d: Option<f64>| d.map_or_else(|| "-".to_string(), |d| format!("{d:.2e}"));
        say!(
            io.out,
            "{:<10} {:>18} {:>11} {:>11} {:>18} {:>11} {:>11} {:>11}",
            r.pattern.to_string(),
            fmt_sig(r.probability, 12),
            format!("{dpf:.2e}"),
            format!("{dpd:.2e}"),
            fmt_sig(r.negativity, 12),
            show(dnf),
            show(dnd),
            show(amp)
        );
    }
    let numeric = numeric_efficiency(&params.with_k_max(1))?.efficiency;
    let de = (numeric - report.efficiency).abs();
    track(de, "efficiency".into());
    say!(
        io.out,
        "efficiency closed {}  engine {}  delta {de:.2e}",
        fmt_sig(report.efficiency, 12),
        fmt_sig(numeric, 12)
    );
    if worst < VERIFY_TOLERANCE {
        say!(io.out, "OK: all deltas below {VERIFY_TOLERANCE:e} (largest {worst:.2e}, {worst_at})");
        Ok(())
    } else {
        say!(io.out, "MISMATCH: {worst_at} differs by {worst:.3e}");
        Err(CliError::Verification(format!(
            "{worst_at} differs by {worst:.3e} (tolerance {VERIFY_TOLERANCE:e})"
        )))
    }
}

/// Chi-square statistic, degrees of freedom and p-value of observed counts
/// against expected probabilities. Categories with zero expectation are
/// dropped, unless something was observed there (then p = 0).
pub fn chi_square(observed: &[u64], probs: &[f64], trials: u64) -> (f64, usize, f64) {
    let n = trials as f64;
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            used += 1;
        } else if o > 0 {
            stat = f64::INFINITY;
        }
    }
    let dof = used.saturating_sub(1);
    let p_value = if stat.is_infinite() {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(stat)
    };
    (stat, dof, p_value)
}

/// Samples all chunks in parallel; the merge is order independent.
pub fn parallel_sample(params: &ProtocolParams, trials: u64, seed: u64) -> Result<FrequencyTable, Error> {
    (0..chunk_count(trials))
        .into_par_iter()
        .map(|c| sample_chunk(params, seed, c, chunk_trials(trials, c)))
        .try_reduce(FrequencyTable::default, |mut a, b| {
            a.merge(b);
            Ok(a)
        })
}

fn monte_carlo(a: &McArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let params = a.protocol.params()?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    regime_note(&params, io)?;
    let table = parallel_sample(&params, a.trials, a.seed)?;
    let report = closed_form_report(&params)?;
    header(&params, io)?;
    say!(io.out, "trials {}  seed {}", a.trials, a.seed);
    say!(
        io.out,
        "{:<14} {:>10} {:>16} {:>16} {:>8}",
        "outcome",
        "count",
        "frequency",
        "probability",
        "z"
    );
    let n = a.trials as f64;
    let mut observed = Vec::new();
    let mut probs = Vec::new();
    let z = |count: u64, p: f64| {
        let sigma = (p * (1.0 - p) / n).sqrt();
        if sigma > 0.0 {
            format!("{:.2}", (count as f64 / n - p) / sigma)
        } else {
            "-".into()
        }
    };
    for r in &report.records {
        let count = table.count(&r.pattern);
        say!(
            io.out,
            "{:<14} {:>10} {:>16} {:>16} {:>8}",
            r.pattern.to_string(),
            count,
            fmt_sig(count as f64 / n, 8),
            fmt_sig(r.probability, 8),
            z(count, r.probability)
        );
        observed.push(count);
        probs.push(r.probability);
    }
    let listed: u64 = observed.iter().sum();
    let other_p = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    let other = a.trials - listed;
    say!(
        io.out,
        "{:<14} {:>10} {:>16} {:>16} {:>8}",
        "other",
        other,
        fmt_sig(other as f64 / n, 8),
        fmt_sig(other_p, 8),
        z(other, other_p)
    );
    observed.push(other);
    probs.push(other_p);
    let (stat, dof, p_value) = chi_square(&observed, &probs, a.trials);
    say!(io.out, "chi-square {stat:.4} on {dof} dof, p-value {p_value:.4}");
    say!(
        io.out,
        "{} with the outcome probabilities at significance {MC_SIGNIFICANCE}",
        if p_value > MC_SIGNIFICANCE { "consistent" } else { "NOT consistent" }
    );
    if params.scheme() == Scheme::Adaptive {
        say!(io.out, "(adaptive: arms stop after their first click)");
    }
    Ok(())
}

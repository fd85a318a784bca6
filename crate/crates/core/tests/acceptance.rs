//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use psub_core::closed_form::{self, closed_form_report};
use psub_core::dense::{dense_reference_run, dense_total_probability, DenseBipartiteState};
use psub_core::fock::make_tmsv;
use psub_core::metrics::{baseline_negativity, negativity_pure_schmidt, negativity_trace_norm_oracle};
use psub_core::protocol::{numeric_efficiency, residual_multiphoton_mass, run_pattern};
use psub_core::sampler::monte_carlo_sample;
use psub_core::sweep::{max_over_t, sweep_grid, t_grid};
use psub_core::{DetectionPattern, ProtocolParams, Scheme};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const GRID_LAMBDA: [f64; 4] = [0.05, 0.15, 0.25, 0.32];
const GRID_N: [u32; 4] = [1, 2, 3, 5];
const GRID_T: [f64; 4] = [0.5, 0.7, 0.9, 0.99];
const SCHEMES: [Scheme; 2] = [Scheme::Standard, Scheme::Adaptive];
const LOCUS_LAMBDAS: [f64; 2] = [0.15, 0.32];

/// Running verdict of one criterion: worst observed value plus the first
/// failure message.
struct Check {
    worst: f64,
    failure: Option<String>,
    count: usize,
}

impl Check {
    fn new() -> Self {
        Self {
            worst: 0.0,
            failure: None,
            count: 0,
        }
    }

    fn le(&mut self, value: f64, bound: f64, what: impl FnOnce() -> String) {
        self.count += 1;
        if value.is_nan() || value > bound {
            self.fail(format!("{} = {value:e} > {bound:e}", what()));
        }
        if value > self.worst {
            self.worst = value;
        }
    }

    fn diff(&mut self, a: f64, b: f64, tol: f64, what: impl FnOnce() -> String) {
        self.le((a - b).abs(), tol, what);
    }

    fn holds(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
    }
}

struct Suite {
    failed: usize,
    /// Every efficiency evaluated anywhere, for the bounds criterion.
    efficiencies: Vec<(String, f64)>,
}

impl Suite {
    fn report(&mut self, id: u32, name: &str, check: Check, start: Instant) {
        let secs = start.elapsed().as_secs_f64();
        match check.failure {
            None => println!(
                "PASS {id:>2} {name}: {} checks, worst {:.3e} ({secs:.2}s)",
                check.count, check.worst
            ),
            Some(msg) => {
                self.failed += 1;
                println!("FAIL {id:>2} {name}: {msg} ({} checks, {secs:.2}s)", check.count);
            }
        }
    }

    fn efficiency(&mut self, label: impl FnOnce() -> String, e: f64) -> f64 {
        self.efficiencies.push((label(), e));
        e
    }
}

fn grid() -> impl Iterator<Item = ProtocolParams> {
    GRID_LAMBDA.into_iter().flat_map(|l| {
        GRID_N.into_iter().flat_map(move |n| {
            GRID_T.into_iter().flat_map(move |t| {
                SCHEMES
                    .into_iter()
                    .map(move |s| ProtocolParams::new(l, t, n, s).expect("grid point in domain"))
            })
        })
    })
}

fn label(p: &ProtocolParams) -> String {
    format!(
        "λ={} N={} T={} {}",
        p.lambda(),
        p.n_splitters(),
        p.transmittance(),
        p.scheme()
    )
}

fn oracle_equivalence(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    for p in grid() {
        let rep = closed_form_report(&p).expect("closed form");
        for r in &rep.records {
            let at = || format!("{} {}", label(&p), r.pattern);
            let (wf, sf) = run_pattern(&p, &r.pattern)
                .expect("fast path")
                .into_posterior()
                .expect("single-photon outcomes are possible");
            let (wd, sd) = dense_reference_run(&p, &r.pattern)
                .expect("dense path")
                .into_posterior()
                .expect("single-photon outcomes are possible");
            let nf = negativity_pure_schmidt(&sf).expect("normalized posterior");
            c.diff(r.probability, wf, 1e-9, || format!("P closed vs fast at {}", at()));
            c.diff(r.probability, wd, 1e-9, || format!("P closed vs dense at {}", at()));
            c.diff(r.negativity, nf, 1e-9, || format!("N closed vs fast at {}", at()));
            c.diff(r.negativity, sd.negativity(), 1e-9, || format!("N closed vs dense at {}", at()));
            let flat = DenseBipartiteState::from_shifted(&sf, sd.dim()).expect("fits");
            c.le(sd.max_abs_diff_up_to_sign(&flat), 1e-9, || format!("posterior amplitudes at {}", at()));
        }
        let e = suite.efficiency(|| label(&p), rep.efficiency);
        let en = numeric_efficiency(&p).expect("numeric efficiency").efficiency;
        suite.efficiency(|| format!("numeric {}", label(&p)), en);
        c.diff(e, en, 1e-9, || format!("E closed vs numeric at {}", label(&p)));
    }
    suite.report(1, "oracle equivalence (closed form / fast path / dense)", c, start);
}

fn negativity_dual_path(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    for p in grid() {
        for pattern in psub_core::pattern::enumerate_patterns(&p) {
            let (_, s) = run_pattern(&p, &pattern)
                .expect("fast path")
                .into_posterior()
                .expect("possible outcome");
            let schmidt = negativity_pure_schmidt(&s).expect("normalized");
            let trace = negativity_trace_norm_oracle(&s).expect("within oracle guard");
            c.diff(schmidt, trace, 1e-8, || format!("{} {pattern}", label(&p)));
        }
    }
    suite.report(2, "negativity: Schmidt form vs partial-transpose trace norm", c, start);
}

fn baseline_exactness(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    let base = baseline_negativity(0.2).unwrap();
    c.diff(base, 0.25, 1e-12, || "baseline_negativity(0.2)".into());
    let p = ProtocolParams::new(0.2, 1.0, 1, Scheme::Standard).unwrap();
    let tmsv = make_tmsv(0.2, p.cutoff()).unwrap();
    let neg = negativity_pure_schmidt(&tmsv).unwrap();
    c.diff(neg, base, 1e-12, || format!("TMSV Schmidt negativity at cutoff {}", p.cutoff()));
    suite.report(3, "baseline negativity of the TMSV", c, start);
}

/// Refined maxima over `T` for `N = 1..=10`, recorded for the bounds check.
fn maxima(suite: &mut Suite, lambda: f64, scheme: Scheme) -> Vec<f64> {
    (1..=10)
        .map(|n| {
            let m = max_over_t(lambda, n, scheme).expect("max_over_t");
            suite.efficiency(|| format!("max λ={lambda} N={n} {scheme}"), m.e_star)
        })
        .collect()
}

fn standard_plateau(suite: &mut Suite) -> Vec<f64> {
    let start = Instant::now();
    let mut c = Check::new();
    let mut plateaus = Vec::new();
    for lambda in LOCUS_LAMBDAS {
        let e = maxima(suite, lambda, Scheme::Standard);
        let top = e.iter().copied().fold(f64::MIN, f64::max);
        let low = e.iter().copied().fold(f64::MAX, f64::min);
        c.le(top - low, 1e-6, || format!("spread of standard maxima over N at λ={lambda}"));
        c.le(top - e[0], 1e-6, || format!("N=1 short of the maximum at λ={lambda}"));
        plateaus.push(top);
    }
    suite.report(4, "standard scheme: max over T is the same for N = 1..10", c, start);
    plateaus
}

fn adaptive_growth(suite: &mut Suite, plateaus: &[f64]) {
    let start = Instant::now();
    let mut c = Check::new();
    for (lambda, &plateau) in LOCUS_LAMBDAS.into_iter().zip(plateaus) {
        let e = maxima(suite, lambda, Scheme::Adaptive);
        for n in 1..e.len() {
            c.holds(e[n] > e[n - 1], || {
                format!("λ={lambda}: E*(N={}) = {} not above E*(N={}) = {}", n + 1, e[n], n, e[n - 1])
            });
            c.holds(e[n] > plateau, || {
                format!("λ={lambda}: adaptive E*(N={}) = {} not above plateau {plateau}", n + 1, e[n])
            });
        }
        for (n, &v) in e.iter().enumerate() {
            c.holds(v <= 1.0, || format!("λ={lambda}: E*(N={}) = {v} > 1", n + 1));
        }
    }
    suite.report(5, "adaptive scheme: max over T grows strictly with N", c, start);
}

fn negativity_decay(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    for lambda in LOCUS_LAMBDAS {
        for t in [0.7, 0.9] {
            let at = |n| ProtocolParams::new(lambda, t, n, Scheme::Standard).unwrap();
            for n in 1..10 {
                let (a, b) = (at(n), at(n + 1));
                let (sa, sb) = (closed_form::neg_symmetric_std(&a), closed_form::neg_symmetric_std(&b));
                let (aa, ab) = (
                    closed_form::neg_asymmetric_std(&a).unwrap(),
                    closed_form::neg_asymmetric_std(&b).unwrap(),
                );
                c.holds(sb < sa, || format!("symmetric λ={lambda} T={t}: N={} {sb} vs N={n} {sa}", n + 1));
                c.holds(ab < aa, || format!("asymmetric λ={lambda} T={t}: N={} {ab} vs N={n} {aa}", n + 1));
            }
        }
    }
    suite.report(6, "posterior negativities decrease with N", c, start);
}

fn multiphoton_residual(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    let mut values = Vec::new();
    for n in [1, 3, 5] {
        for t in [0.5, 0.9] {
            let p = ProtocolParams::new(0.325, t, n, Scheme::Standard).unwrap();
            let r = residual_multiphoton_mass(&p).unwrap();
            values.push(format!("N={n},T={t}: {r:.5}"));
            c.le(r, 0.01, || format!("residual at λ=0.325 N={n} T={t}"));
        }
    }
    println!("   7 residual multi-photon mass at λ=0.325: {}", values.join("; "));
    suite.report(7, "multi-photon residual below 1%", c, start);
}

fn completeness(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    for lambda in GRID_LAMBDA {
        for n in [1, 2] {
            for t in [0.5, 0.9] {
                for scheme in SCHEMES {
                    let p = ProtocolParams::new(lambda, t, n, scheme).unwrap().with_cutoff(6);
                    let total = dense_total_probability(&p).unwrap();
                    let mass = make_tmsv(lambda, 6).unwrap().norm_sqr();
                    let at = || format!("λ={lambda} N={n} T={t} {scheme}");
                    // Every outcome together reproduces the truncated input.
                    c.diff(total, mass, 1e-12, || format!("total vs input mass at {}", at()));
                    // Where the truncated tail λ^14 is below the tolerance the
                    // total is 1 itself.
                    if lambda.powi(14) < 1e-11 {
                        c.diff(total, 1.0, 1e-10, || format!("total probability at {}", at()));
                    }
                }
            }
        }
    }
    suite.report(8, "completeness of all outcomes at n_max = 6", c, start);
}

fn scheme_coincidence(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    for p in grid().filter(|p| p.n_splitters() == 1 && p.scheme() == Scheme::Standard) {
        let std_e = closed_form::efficiency(&p).unwrap();
        let adp_e = closed_form::efficiency(&p.with_scheme(Scheme::Adaptive)).unwrap();
        c.diff(std_e, adp_e, 1e-12, || format!("closed form at {}", label(&p)));
        let std_n = numeric_efficiency(&p).unwrap().efficiency;
        let adp_n = numeric_efficiency(&p.with_scheme(Scheme::Adaptive)).unwrap().efficiency;
        c.diff(std_n, adp_n, 1e-12, || format!("numeric at {}", label(&p)));
    }
    suite.report(9, "schemes coincide at N = 1", c, start);
}

fn identities(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    for p in grid().filter(|p| p.scheme() == Scheme::Adaptive) {
        let n = p.n_splitters();
        let sym = closed_form::neg_symmetric_std(&p);
        let asym = closed_form::neg_asymmetric_std(&p).unwrap();
        for i in 1..=n {
            let j = 2 * n - i;
            if (1..=n).contains(&j) {
                let v = closed_form::neg_symmetric_adp(&p, i, j).unwrap();
                c.diff(v, sym, 1e-12, || format!("symmetric i={i} j={j} at {}", label(&p)));
            }
        }
        let v = closed_form::neg_asymmetric_adp(&p, n).unwrap();
        c.diff(v, asym, 1e-12, || format!("asymmetric i=N at {}", label(&p)));
    }
    suite.report(10, "adaptive forms reduce to standard ones on the last splitter", c, start);
}

fn monte_carlo(suite: &mut Suite) {
    let start = Instant::now();
    let mut c = Check::new();
    let p = ProtocolParams::new(0.2, 0.8, 1, Scheme::Standard).unwrap();
    let trials = 100_000u64;
    let seed = 20_240_601;
    let table = monte_carlo_sample(&p, trials, seed).unwrap();
    let again = monte_carlo_sample(&p, trials, seed).unwrap();
    c.holds(table == again, || "same seed gave different tables".into());
    c.holds(table.trials == trials, || format!("{} trials recorded", table.trials));

    // Categories: the four single-photon-or-less outcomes plus "anything else".
    let rep = closed_form_report(&p).unwrap();
    let n = trials as f64;
    let mut chi2 = 0.0;
    let mut seen = 0u64;
    for r in &rep.records {
        let observed = table.count(&r.pattern);
        seen += observed;
        let expected = r.probability * n;
        chi2 += (observed as f64 - expected).powi(2) / expected;
    }
    let rest_p = 1.0 - rep.records.iter().map(|r| r.probability).sum::<f64>();
    let rest = (trials - seen) as f64;
    chi2 += (rest - rest_p * n).powi(2) / (rest_p * n);
    let dof = rep.records.len() as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    println!("   11 chi-square {chi2:.3} on {dof} dof, p = {p_value:.4}");
    c.holds(p_value > 0.001, || format!("chi-square {chi2} rejected at 0.001 (p = {p_value})"));

    let sym = DetectionPattern::symmetric(Scheme::Standard, 1, 1);
    let ps = closed_form::p_symmetric_std(&p, 1, 1).unwrap();
    let sigma = (ps * (1.0 - ps) / n).sqrt();
    c.le((table.frequency(&sym) - ps).abs() / sigma, 3.0, || "symmetric frequency in σ".into());
    suite.report(11, "Monte Carlo frequencies and determinism", c, start);
}

fn efficiency_bounds(suite: &mut Suite) {
    let start = Instant::now();
    for lambda in LOCUS_LAMBDAS {
        let ts = t_grid(0.05, 0.999, 0.001).unwrap();
        for scheme in SCHEMES {
            for row in sweep_grid(lambda, 1..=10, &ts, scheme).unwrap() {
                suite.efficiencies.push((
                    format!("sweep λ={lambda} N={} T={} {scheme}", row.n_splitters, row.transmittance),
                    row.efficiency,
                ));
            }
        }
    }
    // One point well outside the small-squeezing regime.
    let extra = ProtocolParams::new(0.6, 0.3, 4, Scheme::Adaptive).unwrap();
    let e = numeric_efficiency(&extra).unwrap().efficiency;
    suite.efficiency(|| label(&extra), e);

    let mut c = Check::new();
    for (what, e) in &suite.efficiencies {
        c.holds((0.0..=1.0).contains(e), || format!("E = {e} at {what}"));
    }
    suite.report(12, "efficiency within [0, 1] everywhere", c, start);
}

fn main() -> ExitCode {
    let mut suite = Suite {
        failed: 0,
        efficiencies: Vec::new(),
    };
    oracle_equivalence(&mut suite);
    negativity_dual_path(&mut suite);
    baseline_exactness(&mut suite);
    let plateaus = standard_plateau(&mut suite);
    adaptive_growth(&mut suite, &plateaus);
    negativity_decay(&mut suite);
    multiphoton_residual(&mut suite);
    completeness(&mut suite);
    scheme_coincidence(&mut suite);
    identities(&mut suite);
    monte_carlo(&mut suite);
    efficiency_bounds(&mut suite);
    if suite.failed == 0 {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 12 criteria fail", suite.failed);
        ExitCode::FAILURE
    }
}

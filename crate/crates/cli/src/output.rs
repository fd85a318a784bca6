//! CSV emission and the optional plotting script.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use psub_core::SweepRecord;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 6] = ["scheme", "lambda", "n", "t", "efficiency", "is_locus"];

/// Formats `x` with `digits` significant digits the way C's `%.*g` does:
/// fixed notation for moderate exponents, scientific otherwise, trailing
/// zeros dropped.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    // Rounding to `digits` first fixes the exponent (9.9999… may become 1e+k).
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_row(r: &SweepRecord) -> [String; 6] {
    [
        r.scheme.to_string(),
        fmt_sig(r.lambda, 12),
        r.n_splitters.to_string(),
        fmt_sig(r.transmittance, 12),
        fmt_sig(r.efficiency, 12),
        r.is_locus_point.to_string(),
    ]
}

/// Writes the header and one line per record, in the given order.
pub fn write_csv<W: Write>(out: W, records: &[SweepRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Where a command's CSV goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    /// `--out` wins; otherwise `<out_dir>/<command>.csv`; otherwise stdout.
    pub fn resolve(out: Option<&Path>, out_dir: Option<&Path>, command: &str) -> Self {
        match (out, out_dir) {
            (Some(p), _) => Destination::File(p.to_path_buf()),
            (None, Some(dir)) => Destination::File(dir.join(format!("{command}.csv"))),
            (None, None) => Destination::Stdout,
        }
    }
}

/// Writes `records` to `dest`, with `stdout` standing in for the process's
/// standard output.
pub fn emit_csv(records: &[SweepRecord], dest: &Destination, stdout: &mut dyn Write) -> Result<(), CliError> {
    match dest {
        Destination::Stdout => write_csv(stdout, records).map_err(|e| CliError::csv(None, e)),
        Destination::File(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            write_csv(io::BufWriter::new(file), records).map_err(|e| CliError::csv(Some(path), e))
        }
    }
}

/// A standalone matplotlib script that plots efficiency against T, one line
/// per (lambda, N), and marks the locus points.
pub fn plot_script(csv_path: &Path) -> String {
    let csv = csv_path.display().to_string().replace('\\', "\\\\").replace('"', "\\\"");
    format!(
        r#"#!/usr/bin/env python3
# Plots a psub sweep/loci CSV. Usage: python3 <this script> [CSV]
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
curves = defaultdict(list)
loci = defaultdict(list)
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        key = (row["scheme"], float(row["lambda"]))
        point = (int(row["n"]), float(row["t"]), float(row["efficiency"]))
        curves[key + (point[0],)].append(point[1:])
        if row["is_locus"] == "true":
            loci[key].append(point)

fig, (ax_e, ax_l) = plt.subplots(1, 2, figsize=(11, 4.5))
for (scheme, lam, n), pts in sorted(curves.items()):
    if len(pts) > 1:
        ts, es = zip(*sorted(pts))
        ax_e.plot(ts, es, lw=0.8, label=f"{{scheme}} lambda={{lam:g}} N={{n}}")
ax_e.set_xlabel("T")
ax_e.set_ylabel("efficiency")
for (scheme, lam), pts in sorted(loci.items()):
    ns, ts, es = zip(*sorted(pts))
    ax_l.plot(ns, ts, "o-", label=f"{{scheme}} lambda={{lam:g}}")
    for n, t, e in pts:
        ax_l.annotate(f"{{e:.3f}}", (n, t), fontsize=7, xytext=(3, 3), textcoords="offset points")
ax_l.set_xlabel("N")
ax_l.set_ylabel("T at maximum efficiency")
for ax in (ax_e, ax_l):
    if ax.has_data():
        ax.legend(fontsize=7)
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print("wrote", out)
"#
    )
}

pub fn write_plot_script(script: &Path, csv_path: &Path) -> Result<(), CliError> {
    std::fs::write(script, plot_script(csv_path)).map_err(|e| CliError::io(script, e))
}

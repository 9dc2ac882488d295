#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use selberg_core::cache::{parse_cache, parse_weight_spec, render_cache, write_atomic};
use selberg_core::oracle::OracleBudget;
use selberg_core::spectrum::{build_table, multiplicity_envelope, trace_cutoff, SpectrumTable, WeightMode};
use selberg_core::zeta::{
    c_constant_from_table, li, phi, prime_geodesic_count_from_table, square_integral_mean, EvalPoint,
};

use output::{render, Format, Record};
use verify::Suite;

#[derive(Parser)]
#[command(name = "selberg", version, about = "Length spectrum of SL2(Z) and the smoothed Selberg log-derivative")]
struct Cli {
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the length spectrum for traces n < X and write a cache file
    Spectrum {
        /// Trace cutoff X
        #[arg(long)]
        xmax: f64,
        #[arg(long, default_value = "unity")]
        weight: String,
        /// Output cache path
        #[arg(short = 'o', long = "output", visible_alias = "cache")]
        output: PathBuf,
    },
    /// Evaluate phi_s(x) at s = sigma + i t
    Phi {
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        source: Source,
    },
    /// Exact mean of |phi|^2 over [1, T]
    Sqint {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "T")]
        t_max: f64,
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        source: Source,
    },
    /// Partial sum of C(sigma) up to N with a heuristic tail bound
    Cconst {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "N")]
        n: u64,
        #[command(flatten)]
        source: Source,
    },
    /// Prime geodesic counts against li(x) on the grid 5 * 10^(k/10)
    Pgt {
        #[arg(long)]
        xmax: f64,
        #[command(flatten)]
        source: Source,
    },
    /// Check fast paths against brute-force oracles, or a cache against a
    /// fresh computation
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Shorthand for --suite quadrature
        #[arg(long)]
        quadrature: bool,
        /// Cache file to re-derive (suite cache, or added to all)
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Single quadrature point instead of the standard grid
        #[arg(long, requires_all = ["t_max", "x"])]
        sigma: Option<f64>,
        #[arg(long = "T", requires = "sigma")]
        t_max: Option<f64>,
        #[arg(long, requires = "sigma")]
        x: Option<f64>,
        /// Relative tolerance for analytic against quadrature means
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Largest u in the brute Pell search
        #[arg(long, default_value_t = 100_000)]
        max_u: u64,
        /// Entry bound for orbit searches
        #[arg(long, default_value_t = 256)]
        max_entry: i64,
        /// Absolute tolerance of the quadrature oracle
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
    },
}

#[derive(Args)]
struct Source {
    /// Spectrum cache to read instead of computing
    #[arg(long)]
    cache: Option<PathBuf>,
    /// unity, index:<k> or table:<path>
    #[arg(long, conflicts_with = "cache")]
    weight: Option<String>,
}

impl Source {
    /// A table covering all traces below `cut`.
    fn table(&self, cut: f64) -> anyhow::Result<SpectrumTable> {
        match &self.cache {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let table = parse_cache(&text).with_context(|| format!("parsing {}", path.display()))?;
                table.require(cut)?;
                Ok(table)
            }
            None => {
                let weight = parse_weight_spec(self.weight.as_deref().unwrap_or("unity"))?;
                Ok(build_table(cut.max(3.5), &weight)?)
            }
        }
    }
}

fn positive(name: &str, v: f64) -> anyhow::Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        bail!("--{name} must be a positive number, got {v}");
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> anyhow::Result<()> {
    if !v.is_finite() {
        bail!("--{name} must be finite, got {v}");
    }
    Ok(())
}

enum Outcome {
    Done,
    VerifyFailed,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(k) = cli.threads {
        if k == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    let fmt = cli.format;
    match cli.command {
        Command::Spectrum { xmax, weight, output } => {
            if !(xmax > 3.0) || !xmax.is_finite() {
                bail!("--xmax must exceed 3, got {xmax}");
            }
            let weight = parse_weight_spec(&weight)?;
            cmd_spectrum(xmax, &weight, &output, fmt)?;
        }
        Command::Phi { sigma, t, x, source } => {
            positive("sigma", sigma)?;
            finite("t", t)?;
            positive("x", x)?;
            let p = EvalPoint::new(sigma, t, x)?;
            let table = source.table(p.cutoff())?;
            let v = phi(&p, &table)?;
            let r = Record::new().num("re", v.re).num("im", v.im).num("abs", v.norm());
            print!("{}", render(&[r], fmt));
        }
        Command::Sqint { sigma, t_max, x, source } => {
            positive("sigma", sigma)?;
            positive("x", x)?;
            if !(t_max > 1.0) || !t_max.is_finite() {
                bail!("--T must exceed 1, got {t_max}");
            }
            let table = source.table(trace_cutoff(x))?;
            let r = square_integral_mean(sigma, t_max, x, &table)?;
            let rec = Record::new()
                .num("mean", r.mean)
                .num("diagonal", r.diagonal)
                .num("offdiagonal", r.offdiagonal)
                .num("T", r.t_max)
                .num("x", r.x)
                .num("sigma", r.sigma);
            print!("{}", render(&[rec], fmt));
        }
        Command::Cconst { sigma, n, source } => {
            if !(sigma > 0.75) || !sigma.is_finite() {
                bail!("--sigma must exceed 3/4 (C(sigma) diverges otherwise), got {sigma}");
            }
            if n < 3 {
                bail!("--N must be at least 3, got {n}");
            }
            let table = source.table(n as f64 + 1.0)?;
            let c = c_constant_from_table(sigma, &table, n)?;
            let rec = Record::new()
                .num("sigma", c.sigma)
                .int("N", c.n)
                .num("partial", c.partial)
                .num("tail_bound", c.tail_bound)
                .text("tail_bound_kind", "heuristic")
                .num("c_fit", c.c_fit);
            print!("{}", render(&[rec], fmt));
        }
        Command::Pgt { xmax, source } => {
            if !(xmax >= 5.0) || !xmax.is_finite() {
                bail!("--xmax must be at least 5, got {xmax}");
            }
            let table = source.table(trace_cutoff(xmax))?;
            let mut rows = Vec::new();
            for x in pgt_grid(xmax) {
                let count = prime_geodesic_count_from_table(x, &table)?;
                let l = li(x);
                rows.push(Record::new().num("x", x).num("count", count).num("li", l).num("count_minus_li", count - l));
            }
            print!("{}", render(&rows, fmt));
        }
        Command::Verify { suite, quadrature, cache, sigma, t_max, x, tol, max_u, max_entry, quad_tol } => {
            if !(tol > 0.0) {
                bail!("--tol must be positive, got {tol}");
            }
            let budget = OracleBudget::new(max_u, max_entry, quad_tol)?;
            let suite = if quadrature { Suite::Quadrature } else { suite };
            let points = match (sigma, t_max, x) {
                (Some(s), Some(t), Some(xv)) => {
                    positive("sigma", s)?;
                    positive("x", xv)?;
                    if !(t > 1.0) {
                        bail!("--T must exceed 1, got {t}");
                    }
                    vec![(s, t, xv)]
                }
                _ => verify::standard_grid(),
            };
            if suite == Suite::Cache && cache.is_none() {
                bail!("--suite cache needs --cache <path>");
            }
            let mut checks = Vec::new();
            let all = suite == Suite::All;
            if all || suite == Suite::Pell {
                checks.push(verify::pell(&budget));
            }
            if all || suite == Suite::Classno {
                checks.push(verify::classno(&budget));
            }
            if all || suite == Suite::Formula {
                checks.push(verify::formula());
            }
            if all || suite == Suite::Multiplicity {
                checks.push(verify::multiplicities(&budget));
            }
            if all || suite == Suite::Quadrature {
                checks.push(verify::quadrature(&points, tol, &budget));
            }
            if let (true, Some(p)) = (all || suite == Suite::Cache, &cache) {
                checks.push(verify::cache(p));
            }
            match fmt {
                Format::Csv => {
                    for c in &checks {
                        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                    }
                }
                Format::Json => {
                    let recs: Vec<Record> = checks.iter().map(verify::Check::record).collect();
                    print!("{}", render(&recs, fmt));
                }
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(Outcome::VerifyFailed);
            }
        }
    }
    Ok(Outcome::Done)
}

fn cmd_spectrum(xmax: f64, weight: &WeightMode, path: &Path, fmt: Format) -> anyhow::Result<()> {
    let existing = fs::read_to_string(path).ok().and_then(|s| parse_cache(&s).ok());
    let (table, status) = match existing {
        Some(t) if t.x_cut() == xmax && same_weight(&t, weight) => (t, "unchanged"),
        _ => {
            let t = build_table(xmax, weight)?;
            write_atomic(path, render_cache(&t).as_bytes()).with_context(|| format!("writing {}", path.display()))?;
            (t, "written")
        }
    };
    let top = table.entries().iter().max_by(|a, b| a.m.cmp(&b.m).then(b.n.cmp(&a.n)));
    let env = multiplicity_envelope(table.entries());
    let mut rec = Record::new().text("status", status).int("entries", table.entries().len() as u64);
    if let Some(e) = top {
        rec = rec.text("max_m", e.m.to_string()).int("max_m_n", e.n);
    }
    rec = rec.num("X", table.x_cut()).text("weight", table.weight().to_string()).num("envelope_slope", env.slope);
    print!("{}", render(&[rec], fmt));
    Ok(())
}

/// Whether a cached table was built with `weight`. Table weights are
/// compared on the discriminants the cache actually uses.
fn same_weight(table: &SpectrumTable, weight: &WeightMode) -> bool {
    match (table.weight(), weight) {
        (WeightMode::Table { source: a, .. }, WeightMode::Table { source: b, .. }) => {
            a == b
                && table
                    .entries()
                    .iter()
                    .flat_map(|e| &e.components)
                    .all(|c| weight.lambda(c.d).is_ok_and(|l| l == c.lambda))
        }
        (a, b) => a == b,
    }
}

/// `5 * 10^(k/10)` for `k = 0, 1, ...` up to `xmax`.
fn pgt_grid(xmax: f64) -> Vec<f64> {
    (0..).map(|k| 5.0 * 10f64.powf(k as f64 / 10.0)).take_while(|&x| x <= xmax * (1.0 + 1e-12)).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerifyFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

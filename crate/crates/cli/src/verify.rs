//! Verification suites: fast paths against the brute-force oracles, and
//! stored caches against a fresh computation.

use std::path::Path;

use rayon::prelude::*;
use selberg_core::arith::{pell_fundamental, Discriminant};
use selberg_core::cache::read_cache;
use selberg_core::oracle::{
    brute_class_number, brute_multiplicity, brute_pell, quad_square_integral, Oracle, OracleBudget,
};
use selberg_core::qforms::{class_number, class_number_via_formula};
use selberg_core::spectrum::{build_table, multiplicity, trace_cutoff, WeightMode};
use selberg_core::zeta::square_integral_mean;
use selberg_core::BigRational;

use crate::output::Record;

pub const PELL_MAX_D: u64 = 10_000;
pub const CLASSNO_MAX_D: u64 = 500;
pub const FORMULA_MAX_D: u64 = 10_000;
pub const MULTIPLICITY_MAX_N: u64 = 200;
pub const QUAD_SIGMAS: [f64; 3] = [0.6, 0.75, 0.9];
pub const QUAD_TS: [f64; 2] = [10.0, 100.0];
pub const QUAD_XS: [f64; 2] = [1e2, 1e4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Pell,
    Classno,
    Formula,
    Multiplicity,
    Quadrature,
    Cache,
    All,
}

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    pub fn record(&self) -> Record {
        Record::new()
            .text("check", self.name.clone())
            .text("status", if self.passed { "pass" } else { "fail" })
            .text("detail", self.detail.clone())
    }
}

fn first_few(items: &[String]) -> String {
    let shown: Vec<&str> = items.iter().take(5).map(String::as_str).collect();
    let more = if items.len() > 5 { format!(" and {} more", items.len() - 5) } else { String::new() };
    format!("{}{more}", shown.join("; "))
}

pub fn pell(budget: &OracleBudget) -> Check {
    let discs: Vec<Discriminant> = Discriminant::all_up_to(PELL_MAX_D).collect();
    let results: Vec<Option<Option<String>>> = discs
        .par_iter()
        .map(|&d| match brute_pell(d, budget) {
            Oracle::Definite(b) => {
                let f = pell_fundamental(d);
                Some(
                    (f.t != b.t || f.u != b.u)
                        .then(|| format!("D={d}: fast ({},{}) oracle ({},{})", f.t, f.u, b.t, b.u)),
                )
            }
            Oracle::Inconclusive(_) => None,
        })
        .collect();
    let inconclusive = results.iter().filter(|r| r.is_none()).count();
    let bad: Vec<String> = results.into_iter().flatten().flatten().collect();
    let agree = discs.len() - inconclusive - bad.len();
    let mut detail = format!(
        "D <= {PELL_MAX_D}: {agree} agree, {} disagree, {inconclusive} inconclusive (u > {})",
        bad.len(),
        budget.max_u
    );
    if !bad.is_empty() {
        detail = format!("{detail}: {}", first_few(&bad));
    }
    Check::new("pell", bad.is_empty() && agree > 0, detail)
}

pub fn classno(budget: &OracleBudget) -> Check {
    let discs: Vec<Discriminant> = Discriminant::all_up_to(CLASSNO_MAX_D).collect();
    let problems: Vec<String> = discs
        .par_iter()
        .filter_map(|&d| match brute_class_number(d, budget) {
            Oracle::Definite(h) => {
                let fast = class_number(d);
                (fast != h).then(|| format!("D={d}: fast {fast} oracle {h}"))
            }
            Oracle::Inconclusive(why) => Some(format!("inconclusive {why}")),
        })
        .collect();
    let detail = format!("D <= {CLASSNO_MAX_D}: {} discriminants, {} problems", discs.len(), problems.len());
    finish("classno", detail, problems)
}

fn finish(name: &str, detail: String, problems: Vec<String>) -> Check {
    if problems.is_empty() {
        Check::new(name, true, detail)
    } else {
        Check::new(name, false, format!("{detail}: {}", first_few(&problems)))
    }
}

pub fn formula() -> Check {
    let discs: Vec<Discriminant> = Discriminant::all_up_to(FORMULA_MAX_D).collect();
    let rows: Vec<(f64, Option<String>)> = discs
        .par_iter()
        .map(|&d| {
            let h = class_number(d);
            match class_number_via_formula(d) {
                Ok(v) => {
                    let err = (v - h as f64).abs();
                    (err, (err > 0.05).then(|| format!("D={d}: formula {v} vs h={h}")))
                }
                Err(e) => (f64::NAN, Some(format!("D={d}: {e}"))),
            }
        })
        .collect();
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let problems: Vec<String> = rows.into_iter().filter_map(|r| r.1).collect();
    let detail = format!(
        "D <= {FORMULA_MAX_D}: {} discriminants, max |formula - h| = {worst:.3e} (certified <= 0.05)",
        discs.len()
    );
    finish("formula", detail, problems)
}

pub fn multiplicities(budget: &OracleBudget) -> Check {
    let ns: Vec<u64> = (3..=MULTIPLICITY_MAX_N).collect();
    let mut problems: Vec<String> = ns
        .par_iter()
        .filter_map(|&n| {
            let fast = match multiplicity(n, &WeightMode::Unity) {
                Ok((m, _)) => m,
                Err(e) => return Some(format!("n={n}: {e}")),
            };
            match brute_multiplicity(n, budget) {
                Oracle::Definite(m) => (m != fast).then(|| format!("n={n}: fast {fast} oracle {m}")),
                Oracle::Inconclusive(why) => Some(format!("n={n}: inconclusive {why}")),
            }
        })
        .collect();
    for (n, want) in [(3u64, 1i64), (4, 2), (6, 3)] {
        let want = BigRational::from_integer(want.into());
        if brute_multiplicity(n, budget).definite().as_ref() != Some(&want) {
            problems.push(format!("m({n}) != {want} by the oracle"));
        }
    }
    let detail = format!("3 <= n <= {MULTIPLICITY_MAX_N}, spot values m(3)=1 m(4)=2 m(6)=3");
    finish("multiplicity", detail, problems)
}

/// One `(sigma, T, x)` comparison: `(analytic, oracle, relative error)`.
pub fn quadrature_point(sigma: f64, t_max: f64, x: f64, budget: &OracleBudget) -> anyhow::Result<(f64, f64, f64)> {
    let table = build_table(trace_cutoff(x).max(3.5), &WeightMode::Unity)?;
    let a = square_integral_mean(sigma, t_max, x, &table)?.mean;
    let q = quad_square_integral(sigma, t_max, x, &table, budget)?;
    Ok((a, q, (a - q).abs() / q.abs().max(f64::MIN_POSITIVE)))
}

pub fn quadrature(points: &[(f64, f64, f64)], tol: f64, budget: &OracleBudget) -> Check {
    let rows: Vec<Result<(f64, f64, f64), String>> = points
        .par_iter()
        .map(|&(s, t, x)| quadrature_point(s, t, x, budget).map_err(|e| format!("sigma={s} T={t} x={x}: {e}")))
        .collect();
    let mut problems = Vec::new();
    let mut worst = 0.0f64;
    let mut shown = Vec::new();
    for (&(s, t, x), r) in points.iter().zip(rows) {
        match r {
            Ok((a, q, rel)) => {
                worst = worst.max(rel);
                shown.push(format!("sigma={s} T={t} x={x} mean={a} quad={q}"));
                if !(rel <= tol) {
                    problems.push(format!("sigma={s} T={t} x={x}: rel {rel:.3e}"));
                }
            }
            Err(e) => problems.push(e),
        }
    }
    let mut detail = format!("{} points, max rel {worst:.3e} (tol {tol:e})", points.len());
    if points.len() == 1 && problems.is_empty() {
        detail = format!("{detail}; {}", shown[0]);
    }
    finish("quadrature", detail, problems)
}

pub fn standard_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for s in QUAD_SIGMAS {
        for t in QUAD_TS {
            for x in QUAD_XS {
                out.push((s, t, x));
            }
        }
    }
    out
}

/// Re-derives every row of a cache and names the first rows that differ.
pub fn cache(path: &Path) -> Check {
    let stored = match read_cache(path) {
        Ok(t) => t,
        Err(e) => return Check::new("cache", false, format!("{}: {e}", path.display())),
    };
    let fresh = match build_table(stored.x_cut(), stored.weight()) {
        Ok(t) => t,
        Err(e) => return Check::new("cache", false, format!("recomputation failed: {e}")),
    };
    let problems: Vec<String> = stored
        .entries()
        .iter()
        .zip(fresh.entries())
        .filter(|(a, b)| a != b)
        .map(|(a, b)| {
            if a.m != b.m {
                format!("n={}: stored m={} recomputed m={}", a.n, a.m, b.m)
            } else {
                format!("n={}: components or scalars differ", a.n)
            }
        })
        .collect();
    let detail = format!("{} rows, X={}, weight={}", stored.entries().len(), stored.x_cut(), stored.weight());
    finish("cache", detail, problems)
}

//! Length spectrum of the modular group and its weighted variants.
//!
//! For a trace `n >= 3` the multiplicity is
//! `m(n) = sum_{u in U(n)} lambda(D_{n,u}) h(D_{n,u}) / j_{n,u}`
//! where `D_{n,u} = (n^2 - 4)/u^2` runs over the discriminants with
//! `u^2 | n^2 - 4` and `(n + u sqrt(D))/2 = eps_1(D)^j`. Multiplicities are
//! exact rationals; the `f64` fields of [`SpectrumEntry`] are derived views.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{pell_compose, pell_fundamental, square_divisors, Discriminant, PellSolution};
use crate::error::{Error, Result};
use crate::qforms::class_number;

/// Exponent of the multiplicity envelope `m(n) <= C n^1.15` used for
/// heuristic tail bounds.
pub const ENVELOPE_EXPONENT: f64 = 1.15;

/// How each class-number term is weighted.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightMode {
    /// The modular group itself, `lambda = 1`.
    Unity,
    /// Upper bound for a subgroup of index `k`: `lambda = k`.
    IndexBound(u64),
    /// Per-discriminant weights; a missing discriminant is an error.
    Table { source: String, lambdas: BTreeMap<u64, BigRational> },
}

impl WeightMode {
    pub fn index_bound(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("index bound must be >= 1".into()));
        }
        Ok(WeightMode::IndexBound(k))
    }

    pub fn table(source: impl Into<String>, lambdas: BTreeMap<u64, BigRational>) -> Result<Self> {
        if let Some((d, _)) = lambdas.iter().find(|(_, l)| l < &&BigRational::zero()) {
            return Err(Error::Domain(format!("negative weight for D={d}")));
        }
        Ok(WeightMode::Table { source: source.into(), lambdas })
    }

    pub fn lambda(&self, d: u64) -> Result<BigRational> {
        match self {
            WeightMode::Unity => Ok(BigRational::one()),
            WeightMode::IndexBound(k) => Ok(BigRational::from_integer(BigInt::from(*k))),
            WeightMode::Table { lambdas, .. } => lambdas.get(&d).cloned().ok_or(Error::MissingWeight(d)),
        }
    }

    /// Multiplicities under this mode are upper bounds, not exact values.
    pub fn is_bound(&self) -> bool {
        matches!(self, WeightMode::IndexBound(_))
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Unity => write!(f, "unity"),
            WeightMode::IndexBound(k) => write!(f, "index:{k}"),
            WeightMode::Table { source, .. } => write!(f, "table:{source}"),
        }
    }
}

/// One `(u, D, j, h, lambda)` term of a multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub u: u64,
    pub d: u64,
    pub j: u64,
    pub h: u64,
    pub lambda: BigRational,
}

impl Component {
    pub fn value(&self) -> BigRational {
        &self.lambda * BigRational::new(BigInt::from(self.h), BigInt::from(self.j))
    }
}

/// One trace of the length spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub n: u64,
    pub m: BigRational,
    pub components: Vec<Component>,
    pub eps: f64,
    pub log_eps: f64,
    pub lambda_bar: f64,
    /// `m` as a float.
    pub weight: f64,
}

impl SpectrumEntry {
    /// Assembles an entry from its components; scalars come from `n`.
    pub fn from_components(n: u64, components: Vec<Component>) -> Self {
        let m = components.iter().fold(BigRational::zero(), |acc, c| acc + c.value());
        Self::with_scalars(n, m, components, log_eps(n), lambda_bar(n))
    }

    pub(crate) fn with_scalars(
        n: u64,
        m: BigRational,
        components: Vec<Component>,
        log_eps: f64,
        lambda_bar: f64,
    ) -> Self {
        let weight = rational_to_f64(&m);
        SpectrumEntry { n, m, components, eps: log_eps.exp(), log_eps, lambda_bar, weight }
    }

    /// `m == sum(lambda h / j)` exactly.
    pub fn is_consistent(&self) -> bool {
        let sum = self.components.iter().fold(BigRational::zero(), |acc, c| acc + c.value());
        sum == self.m
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The spectrum for all traces `3 <= n < X`, sorted by `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    x_cut: f64,
    weight: WeightMode,
    entries: Vec<SpectrumEntry>,
}

impl SpectrumTable {
    /// A table from explicit entries. Traces absent from `entries` but below
    /// `x_cut` are taken to have multiplicity zero; pass `f64::INFINITY` for
    /// a synthetic finite series.
    pub fn from_entries(x_cut: f64, weight: WeightMode, entries: Vec<SpectrumEntry>) -> Result<Self> {
        if !(x_cut > 3.0) {
            return Err(Error::Domain(format!("cutoff X must exceed 3, got {x_cut}")));
        }
        if entries.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::Domain("entries must be strictly increasing in n".into()));
        }
        if let Some(e) = entries.iter().find(|e| e.n < 3 || (e.n as f64) >= x_cut) {
            return Err(Error::Domain(format!("trace {} outside [3, {x_cut})", e.n)));
        }
        Ok(SpectrumTable { x_cut, weight, entries })
    }

    pub fn x_cut(&self) -> f64 {
        self.x_cut
    }

    pub fn weight(&self) -> &WeightMode {
        &self.weight
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn entry(&self, n: u64) -> Option<&SpectrumEntry> {
        self.entries.binary_search_by_key(&n, |e| e.n).ok().map(|i| &self.entries[i])
    }

    /// Largest trace the table speaks for.
    pub fn max_trace(&self) -> u64 {
        if self.x_cut.is_infinite() {
            u64::MAX
        } else {
            max_trace_below(self.x_cut)
        }
    }

    /// Whether every trace `n < x_need` is represented.
    pub fn covers(&self, x_need: f64) -> bool {
        x_need <= 3.0 || max_trace_below(x_need) <= self.max_trace()
    }

    pub fn require(&self, x_need: f64) -> Result<()> {
        if self.covers(x_need) {
            Ok(())
        } else {
            Err(Error::TableTooSmall { have: self.x_cut, need: x_need })
        }
    }

    /// The entries with `n < x_need`.
    pub fn below(&self, x_need: f64) -> &[SpectrumEntry] {
        let k = self.entries.partition_point(|e| (e.n as f64) < x_need);
        &self.entries[..k]
    }

    /// The sub-table with `n < x_cut`.
    pub fn truncated(&self, x_cut: f64) -> Result<Self> {
        self.require(x_cut)?;
        Self::from_entries(x_cut, self.weight.clone(), self.below(x_cut).to_vec())
    }
}

/// Largest integer strictly below `x`.
pub fn max_trace_below(x: f64) -> u64 {
    let c = x.ceil();
    if c <= 0.0 {
        0
    } else {
        c as u64 - 1
    }
}

/// `X = x^(1/2) + x^(-1/2)`: `n < X` exactly when `eps(n)^2 < x`.
pub fn trace_cutoff(x: f64) -> f64 {
    let r = x.sqrt();
    r + 1.0 / r
}

/// `log eps(n)` with `eps(n) = (n + sqrt(n^2 - 4))/2`.
pub fn log_eps(n: u64) -> f64 {
    (n as f64 / 2.0).acosh()
}

pub fn eps(n: u64) -> f64 {
    let nf = n as f64;
    (nf + ((nf - 2.0) * (nf + 2.0)).sqrt()) / 2.0
}

/// `Lambda(n) = 2 log eps(n) / (1 - eps(n)^-2)`.
pub fn lambda_bar(n: u64) -> f64 {
    lambda_bar_from_log(log_eps(n))
}

#[inline]
pub(crate) fn lambda_bar_from_log(l: f64) -> f64 {
    -2.0 * l / (-2.0 * l).exp_m1()
}

/// `Lambda(n, x) = Lambda(n) (1 - eps(n)^2 / x)`.
pub fn lambda_bar_x(n: u64, x: f64) -> f64 {
    let l = log_eps(n);
    lambda_bar_from_log(l) * (1.0 - (2.0 * l).exp() / x)
}

/// `U(n)` paired with `D_{n,u}`: square divisors `u` of `n^2 - 4` whose
/// cofactor is a discriminant.
pub fn u_set(n: u64) -> Vec<(u64, u64)> {
    let v = n * n - 4;
    square_divisors(n)
        .into_iter()
        .filter_map(|u| {
            let d = v / (u * u);
            (d.is_multiple_of(4) || d % 4 == 1).then_some((u, d))
        })
        .collect()
}

/// The `j` with `eps_1(D)^j = (n + u sqrt D)/2`.
pub fn j_index(n: u64, u: u64, d: Discriminant) -> Result<u64> {
    j_index_from(n, u, &pell_fundamental(d))
}

pub(crate) fn j_index_from(n: u64, u: u64, fundamental: &PellSolution) -> Result<u64> {
    let target_t = BigUint::from(n);
    let target_u = BigUint::from(u);
    let mut cur = fundamental.clone();
    loop {
        if cur.t >= target_t {
            if cur.t == target_t && cur.u == target_u {
                return Ok(cur.j);
            }
            return Err(Error::NoUnitPower { n, d: fundamental.d.get() });
        }
        cur = pell_compose(&cur, fundamental);
    }
}

/// `m(n)` with its components.
pub fn multiplicity(n: u64, weight: &WeightMode) -> Result<(BigRational, Vec<Component>)> {
    if n < 3 {
        return Err(Error::Domain(format!("trace must be >= 3, got {n}")));
    }
    let mut comps = Vec::new();
    for (u, d) in u_set(n) {
        let disc = Discriminant::new(d)?;
        let j = j_index(n, u, disc)?;
        comps.push(Component { u, d, j, h: class_number(disc), lambda: weight.lambda(d)? });
    }
    let entry = SpectrumEntry::from_components(n, comps);
    Ok((entry.m, entry.components))
}

/// Spectrum for `3 <= n < X`.
///
/// Class numbers and fundamental units are computed once per distinct
/// discriminant, in parallel; the result does not depend on scheduling.
pub fn build_table(x_cut: f64, weight: &WeightMode) -> Result<SpectrumTable> {
    if !(x_cut > 3.0) || !x_cut.is_finite() {
        return Err(Error::Domain(format!("cutoff X must be finite and > 3, got {x_cut}")));
    }
    let n_max = max_trace_below(x_cut);
    let traces: Vec<u64> = (3..=n_max).collect();
    let usets: Vec<Vec<(u64, u64)>> = traces.par_iter().map(|&n| u_set(n)).collect();

    let discs: Vec<u64> =
        usets.iter().flat_map(|us| us.iter().map(|&(_, d)| d)).collect::<BTreeSet<_>>().into_iter().collect();
    // Largest discriminants first so the expensive ones do not straggle.
    let mut order: Vec<usize> = (0..discs.len()).collect();
    order.reverse();
    let mut data: Vec<(usize, u64, PellSolution)> = order
        .par_iter()
        .map(|&i| {
            let disc = Discriminant::new(discs[i]).expect("n^2 - 4 over a square is a discriminant");
            (i, class_number(disc), pell_fundamental(disc))
        })
        .collect();
    data.sort_by_key(|(i, _, _)| *i);
    let by_disc: BTreeMap<u64, (u64, PellSolution)> = data.into_iter().map(|(i, h, f)| (discs[i], (h, f))).collect();

    let entries: Vec<SpectrumEntry> = traces
        .par_iter()
        .zip(usets.par_iter())
        .map(|(&n, us)| {
            let at = |e: Error| Error::AtTrace { n, source: Box::new(e) };
            let mut comps = Vec::with_capacity(us.len());
            for &(u, d) in us {
                let (h, fund) = &by_disc[&d];
                let j = j_index_from(n, u, fund).map_err(at)?;
                let lambda = weight.lambda(d).map_err(at)?;
                comps.push(Component { u, d, j, h: *h, lambda });
            }
            Ok(SpectrumEntry::from_components(n, comps))
        })
        .collect::<Result<_>>()?;
    SpectrumTable::from_entries(x_cut, weight.clone(), entries)
}

/// Least-squares fit of `log m(n)` against `log n`, plus the constants of
/// the envelopes `m(n) <= C n^1.15` and `m(n) <= C' n^1.25`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub slope: f64,
    pub intercept: f64,
    pub c_fit: f64,
    pub max_ratio_125: f64,
    pub points: usize,
}

pub fn multiplicity_envelope(entries: &[SpectrumEntry]) -> Envelope {
    let pts: Vec<(f64, f64)> =
        entries.iter().filter(|e| e.weight > 0.0).map(|e| ((e.n as f64).ln(), e.weight.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    let c_fit = entries.iter().map(|e| e.weight / (e.n as f64).powf(ENVELOPE_EXPONENT)).fold(0.0, f64::max);
    let max_ratio_125 = entries.iter().map(|e| e.weight / (e.n as f64).powf(1.25)).fold(0.0, f64::max);
    Envelope { slope, intercept, c_fit, max_ratio_125, points: pts.len() }
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

//! Brute-force references for the fast paths. Nothing here calls into the
//! continued-fraction, cycle or closed-form code; only the domain types are
//! shared.

use std::collections::{HashSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{Discriminant, PellSolution};
use crate::error::{Error, Result};
use crate::qforms::QuadForm;
use crate::spectrum::SpectrumTable;

/// Deepest bisection of one quadrature panel.
const MAX_DEPTH: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleBudget {
    /// Largest `u` tried in the Pell search.
    pub max_u: u64,
    /// Bound on `|a|` and `|b|` for forms visited in orbit searches.
    pub max_entry: i64,
    /// Absolute tolerance of the quadrature.
    pub quad_tol: f64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_u: 100_000, max_entry: 256, quad_tol: 1e-10 }
    }
}

impl OracleBudget {
    pub fn new(max_u: u64, max_entry: i64, quad_tol: f64) -> Result<Self> {
        if max_u == 0 || max_entry <= 0 || !(quad_tol > 0.0) {
            return Err(Error::Domain("oracle budgets must be positive".into()));
        }
        Ok(OracleBudget { max_u, max_entry, quad_tol })
    }
}

/// Either a definite answer or an admission that the budget ran out.
#[derive(Clone, Debug, PartialEq)]
pub enum Oracle<T> {
    Definite(T),
    Inconclusive(String),
}

impl<T> Oracle<T> {
    pub fn definite(self) -> Option<T> {
        match self {
            Oracle::Definite(v) => Some(v),
            Oracle::Inconclusive(_) => None,
        }
    }

    pub fn is_definite(&self) -> bool {
        matches!(self, Oracle::Definite(_))
    }
}

fn square_root_u128(v: u128) -> Option<u128> {
    let mut r = (v as f64).sqrt() as u128;
    while r.checked_mul(r).is_none_or(|q| q > v) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|q| q <= v) {
        r += 1;
    }
    (r * r == v).then_some(r)
}

/// Least `u >= 1` with `D u^2 + 4` a square.
pub fn brute_pell(d: Discriminant, budget: &OracleBudget) -> Oracle<PellSolution> {
    let dd = d.get() as u128;
    for u in 1..=budget.max_u as u128 {
        let Some(v) = u.checked_mul(u).and_then(|q| q.checked_mul(dd)).and_then(|q| q.checked_add(4)) else {
            return Oracle::Inconclusive(format!("D={d}: overflow at u={u}"));
        };
        if let Some(t) = square_root_u128(v) {
            return Oracle::Definite(PellSolution { t: BigUint::from(t), u: BigUint::from(u), d, j: 1 });
        }
    }
    Oracle::Inconclusive(format!("D={d}: no solution with u <= {}", budget.max_u))
}

/// Whether two forms are joined by a word in `S` and `T^{+-1}` that stays
/// within the entry bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Yes,
    NoWithinBudget,
}

/// `S: [a,b,c] -> [c,-b,a]`, `T: [a,b,c] -> [a,b+2a,a+b+c]` and `T^-1`.
fn neighbours(f: (i64, i64, i64)) -> [(i64, i64, i64); 3] {
    let (a, b, c) = f;
    [(c, -b, a), (a, b + 2 * a, a + b + c), (a, b - 2 * a, a - b + c)]
}

pub fn brute_equivalent(q1: &QuadForm, q2: &QuadForm, budget: &OracleBudget) -> Equivalence {
    let d1 = q1.b as i128 * q1.b as i128 - 4 * q1.a as i128 * q1.c as i128;
    let d2 = q2.b as i128 * q2.b as i128 - 4 * q2.a as i128 * q2.c as i128;
    if d1 != d2 {
        return Equivalence::NoWithinBudget;
    }
    let start = (q1.a, q1.b, q1.c);
    let goal = (q2.a, q2.b, q2.c);
    let bound = budget.max_entry;
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        if f == goal {
            return Equivalence::Yes;
        }
        for g in neighbours(f) {
            if g.0.abs() <= bound && g.1.abs() <= bound && seen.insert(g) {
                queue.push_back(g);
            }
        }
    }
    Equivalence::NoWithinBudget
}

/// Reduced primitive forms of discriminant `d` by exhaustive search.
fn naive_reduced(d: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    let mut b = 1;
    while b * b < d {
        let mut a = 1;
        while 2 * a - b <= 0 || (2 * a - b) * (2 * a - b) < d {
            let lower = (2 * a + b) * (2 * a + b) > d;
            let num = b * b - d;
            if lower && num % (4 * a) == 0 {
                let c = num / (4 * a);
                for (x, z) in [(a, c), (-a, -c)] {
                    if gcd3(x, b, z) == 1 {
                        out.push((x, b, z));
                    }
                }
            }
            a += 1;
        }
        b += 1;
    }
    out
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    fn g(mut x: i64, mut y: i64) -> i64 {
        while y != 0 {
            (x, y) = (y, x % y);
        }
        x.abs()
    }
    g(g(a, b), c)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.0[ri.max(rj)] = ri.min(rj);
        }
    }
}

/// Number of orbit components met by `reps` in the graph of all forms of
/// discriminant `d` with `|a|, |b| <= bound`.
fn orbit_count(d: i64, reps: &[(i64, i64, i64)], bound: i64) -> Option<usize> {
    let side = (2 * bound + 1) as usize;
    let index = |a: i64, b: i64| ((a + bound) as usize) * side + (b + bound) as usize;
    let mut uf = UnionFind((0..side * side).collect());
    for a in -bound..=bound {
        if a == 0 {
            continue;
        }
        for b in -bound..=bound {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let [s, t, _] = neighbours((a, b, c));
            if s.0 != 0 && s.0.abs() <= bound {
                uf.union(index(a, b), index(s.0, s.1));
            }
            if t.1.abs() <= bound {
                uf.union(index(a, b), index(t.0, t.1));
            }
        }
    }
    if reps.iter().any(|r| r.0.abs() > bound || r.1.abs() > bound) {
        return None;
    }
    let mut roots: Vec<usize> = reps.iter().map(|r| uf.find(index(r.0, r.1))).collect();
    roots.sort_unstable();
    roots.dedup();
    Some(roots.len())
}

/// Number of orbits of reduced forms under the bounded generator graph. The
/// count is accepted only when it is unchanged after doubling the bound.
pub fn brute_class_number(d: Discriminant, budget: &OracleBudget) -> Oracle<u64> {
    let Ok(di) = i64::try_from(d.get()) else {
        return Oracle::Inconclusive(format!("D={d} too large"));
    };
    let reps = naive_reduced(di);
    if reps.is_empty() {
        return Oracle::Inconclusive(format!("D={d}: no reduced forms found"));
    }
    let b = budget.max_entry;
    let (Some(h1), Some(h2)) = (orbit_count(di, &reps, b), orbit_count(di, &reps, 2 * b)) else {
        return Oracle::Inconclusive(format!("D={d}: reduced forms exceed entry bound {b}"));
    };
    if h1 != h2 {
        return Oracle::Inconclusive(format!("D={d}: {h1} orbits at bound {b}, {h2} at {}", 2 * b));
    }
    Oracle::Definite(h1 as u64)
}

/// `sum_{u in U(n)} h(D) / j` under unit weights, built from the brute Pell
/// search and the orbit class count.
pub fn brute_multiplicity(n: u64, budget: &OracleBudget) -> Oracle<BigRational> {
    if n < 3 {
        return Oracle::Inconclusive(format!("n={n} is not hyperbolic"));
    }
    let Some(v) = n.checked_mul(n).map(|q| q - 4) else {
        return Oracle::Inconclusive(format!("n={n} too large"));
    };
    let mut total = BigRational::zero();
    let mut u = 1u64;
    while u * u <= v {
        if v % (u * u) == 0 && matches!((v / (u * u)) % 4, 0 | 1) {
            let Ok(d) = Discriminant::new(v / (u * u)) else {
                return Oracle::Inconclusive(format!("n={n}: (n^2-4)/{u}^2 rejected"));
            };
            let base = match brute_pell(d, budget) {
                Oracle::Definite(s) => s,
                Oracle::Inconclusive(why) => return Oracle::Inconclusive(why),
            };
            let Some(j) = brute_unit_index(n, u, &base) else {
                return Oracle::Inconclusive(format!("n={n}, u={u}: no unit power found"));
            };
            let h = match brute_class_number(d, budget) {
                Oracle::Definite(h) => h,
                Oracle::Inconclusive(why) => return Oracle::Inconclusive(why),
            };
            total += BigRational::new(BigInt::from(h), BigInt::from(j));
        }
        u += 1;
    }
    Oracle::Definite(total)
}

/// `j` with `((t1 + u1 sqrt D)/2)^j = (n + u sqrt D)/2`, by repeated
/// multiplication.
fn brute_unit_index(n: u64, u: u64, base: &PellSolution) -> Option<u64> {
    let d = base.d.get() as u128;
    let t1: u128 = base.t.to_string().parse().ok()?;
    let u1: u128 = base.u.to_string().parse().ok()?;
    let (mut t, mut w, mut j) = (t1, u1, 1u64);
    while t < n as u128 {
        let nt = t.checked_mul(t1)?.checked_add(d.checked_mul(w)?.checked_mul(u1)?)? / 2;
        let nw = (t.checked_mul(u1)? + w.checked_mul(t1)?) / 2;
        (t, w, j) = (nt, nw, j + 1);
    }
    (t == n as u128 && w == u as u128).then_some(j)
}

/// `(1/T) int_1^T |phi_{sigma+it}(x)|^2 dt` by adaptive Simpson quadrature.
pub fn quad_square_integral(
    sigma: f64,
    t_max: f64,
    x: f64,
    table: &SpectrumTable,
    budget: &OracleBudget,
) -> Result<f64> {
    if !(t_max > 1.0) || !(x > 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain(format!("bad quadrature input sigma={sigma} T={t_max} x={x}")));
    }
    let cut = x.sqrt() + 1.0 / x.sqrt();
    table.require(cut)?;
    let terms: Vec<(f64, f64)> = table
        .entries()
        .iter()
        .filter(|e| (e.n as f64) < cut)
        .map(|e| {
            let nf = e.n as f64;
            let ep = (nf + (nf * nf - 4.0).sqrt()) / 2.0;
            let l = ep.ln();
            let lam = 2.0 * l / (1.0 - 1.0 / (ep * ep)) * (1.0 - ep * ep / x);
            (e.weight * lam * ep.powf(-2.0 * sigma), 2.0 * l)
        })
        .collect();
    let Some(top) = terms.iter().map(|t| t.1).reduce(f64::max) else {
        return Ok(0.0);
    };
    let f = |t: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for &(a, w) in &terms {
            re += a * (w * t).cos();
            im -= a * (w * t).sin();
        }
        re * re + im * im
    };
    // the top frequency of |phi|^2 is at most 2 * top
    let period = std::f64::consts::PI / top;
    let panels = ((t_max - 1.0) / (0.25 * period)).ceil().max(1.0) as usize;
    let h = (t_max - 1.0) / panels as f64;
    let tol = budget.quad_tol * t_max / panels as f64;
    let mut total = 0.0;
    let mut comp = 0.0;
    for i in 0..panels {
        let a = 1.0 + i as f64 * h;
        let b = if i + 1 == panels { t_max } else { a + h };
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let v = simpson(&f, a, b, fa, fm, fb, whole, tol, 0)?;
        let y = v - comp;
        let s = total + y;
        comp = (s - total) - y;
        total = s;
    }
    Ok(total / t_max)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureBudget { tol, max_depth: MAX_DEPTH });
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

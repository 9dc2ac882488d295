//! Integer arithmetic underneath the length spectrum: square roots, square
//! divisors of `n^2 - 4`, the Kronecker symbol, units of real quadratic
//! orders and `L(1, chi_D)`.
//!
//! Units `(t + u*sqrt(D))/2` are always carried as the exact integer pair
//! `(t, u)`; floating point only appears in [`log_unit`] and
//! [`dirichlet_l1`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest discriminant accepted; keeps `b^2 - 4ac` and friends inside `i64`.
pub const MAX_DISCRIMINANT: u64 = 1 << 62;

/// Floor square root. Returns `(r, r*r == n)`.
pub fn isqrt(n: u64) -> (u64, bool) {
    if n == 0 {
        return (0, true);
    }
    let mut r = (n as f64).sqrt() as u64;
    while (r as u128) * (r as u128) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128) * ((r + 1) as u128) <= n as u128 {
        r += 1;
    }
    (r, r * r == n)
}

/// Discriminant of a real quadratic order: `D >= 5`, `D = 0, 1 (mod 4)`,
/// `D` not a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Discriminant(u64);

impl Discriminant {
    pub fn new(d: u64) -> Result<Self> {
        if !(5..=MAX_DISCRIMINANT).contains(&d) || d % 4 == 2 || d % 4 == 3 || isqrt(d).1 {
            return Err(Error::InvalidDiscriminant(d.min(i64::MAX as u64) as i64));
        }
        Ok(Discriminant(d))
    }

    pub fn from_i64(d: i64) -> Result<Self> {
        if d < 0 {
            return Err(Error::InvalidDiscriminant(d));
        }
        Self::new(d as u64)
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `D <= limit` discriminants in increasing order.
    pub fn all_up_to(limit: u64) -> impl Iterator<Item = Discriminant> {
        (5..=limit).filter_map(|d| Discriminant::new(d).ok())
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Kronecker symbol `(d / m)` for `m >= 1`.
pub fn kronecker(d: i64, m: u64) -> i8 {
    if m == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i8;
    let mut m = m;
    let tz = m.trailing_zeros();
    if tz > 0 {
        if d % 2 == 0 {
            return 0;
        }
        m >>= tz;
        let r = d.rem_euclid(8);
        if tz % 2 == 1 && (r == 3 || r == 5) {
            result = -result;
        }
    }
    let a = (d as i128).rem_euclid(m as i128) as u64;
    result * jacobi(a, m)
}

/// Jacobi symbol `(a / m)` for odd `m`.
fn jacobi(mut a: u64, mut m: u64) -> i8 {
    debug_assert!(m % 2 == 1);
    let mut result = 1i8;
    a %= m;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (m % 8 == 3 || m % 8 == 5) {
            result = -result;
        }
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut m);
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// Prime factorisation by trial division, ascending primes.
pub(crate) fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let tz = n.trailing_zeros();
    if tz > 0 {
        out.push((2, tz));
        n >>= tz;
    }
    let mut p = 3u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All `u >= 1` with `u^2 | n^2 - 4`, ascending.
pub fn square_divisors(n: u64) -> Vec<u64> {
    assert!(n >= 3, "square_divisors requires n >= 3");
    // n^2 - 4 = (n - 2)(n + 2); factoring the halves keeps trial division at sqrt(n).
    let mut exps: BTreeMap<u64, u32> = BTreeMap::new();
    for half in [n - 2, n + 2] {
        for (p, e) in factor(half) {
            *exps.entry(p).or_default() += e;
        }
    }
    let mut divs = vec![1u64];
    for (p, e) in exps {
        let half = e / 2;
        if half == 0 {
            continue;
        }
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..half {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// A positive solution of `t^2 - D u^2 = 4`, i.e. the unit
/// `(t + u sqrt(D))/2 = eps_1(D)^j` of the order of discriminant `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PellSolution {
    pub t: BigUint,
    pub u: BigUint,
    pub d: Discriminant,
    pub j: u64,
}

impl PellSolution {
    /// `t^2 - D u^2 == 4`, checked exactly.
    pub fn satisfies_norm(&self) -> bool {
        &self.t * &self.t == BigUint::from(self.d.get()) * &self.u * &self.u + BigUint::from(4u32)
    }

    pub fn t_u64(&self) -> Option<u64> {
        self.t.to_u64()
    }

    pub fn u_u64(&self) -> Option<u64> {
        self.u.to_u64()
    }
}

/// Multiplication of units `(t1 + u1 sqrt D)/2 * (t2 + u2 sqrt D)/2`.
fn unit_mul(d: u64, (t1, u1): (&BigUint, &BigUint), (t2, u2): (&BigUint, &BigUint)) -> (BigUint, BigUint) {
    let dd = BigUint::from(d);
    let t = (t1 * t2 + &dd * u1 * u2) >> 1u32;
    let u = (t1 * u2 + u1 * t2) >> 1u32;
    (t, u)
}

/// Composition of two powers of the same fundamental unit.
pub fn pell_compose(a: &PellSolution, b: &PellSolution) -> PellSolution {
    assert_eq!(a.d, b.d, "composing units of different orders");
    let (t, u) = unit_mul(a.d.get(), (&a.t, &a.u), (&b.t, &b.u));
    PellSolution { t, u, d: a.d, j: a.j + b.j }
}

/// Fundamental solution of `t^2 - D u^2 = 4`.
///
/// Expands the reduced number `(b + sqrt D)/2`, `b = D (mod 2)`, as a purely
/// periodic continued fraction. One period yields the fundamental unit of
/// the order; if its norm is `-1` it is squared.
pub fn pell_fundamental(d: Discriminant) -> PellSolution {
    let dv = d.get() as i128;
    let s = isqrt(d.get()).0 as i128;
    let b = if (s - dv) % 2 == 0 { s } else { s - 1 };
    let (mut p, mut q) = (b, 2i128);
    let mut den_prev = BigUint::one(); // q_{k-2}
    let mut den = BigUint::zero(); // q_{k-1}
    let mut period = 0u64;
    loop {
        let a = (p + s) / q;
        let next = BigUint::from(a as u64) * &den + &den_prev;
        den_prev = std::mem::replace(&mut den, next);
        let p_next = a * q - p;
        let q_next = (dv - p_next * p_next) / q;
        period += 1;
        p = p_next;
        q = q_next;
        if q == 2 {
            debug_assert_eq!(p, b);
            break;
        }
    }
    let u = den;
    let t = BigUint::from(b as u64) * &u + (&den_prev << 1u32);
    let (t, u) = if period % 2 == 1 { unit_mul(d.get(), (&t, &u), (&t, &u)) } else { (t, u) };
    PellSolution { t, u, d, j: 1 }
}

/// `eps_1(D)^k` from the fundamental solution.
pub fn pell_power(base: &PellSolution, k: u64) -> PellSolution {
    assert_eq!(base.j, 1, "pell_power expects the fundamental solution");
    assert!(k >= 1, "pell_power expects k >= 1");
    let d = base.d.get();
    let mut acc: Option<(BigUint, BigUint)> = None;
    let mut sq = (base.t.clone(), base.u.clone());
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some((t, u)) => unit_mul(d, (&t, &u), (&sq.0, &sq.1)),
            });
        }
        e >>= 1;
        if e > 0 {
            sq = unit_mul(d, (&sq.0, &sq.1), (&sq.0, &sq.1));
        }
    }
    let (t, u) = acc.expect("k >= 1");
    PellSolution { t, u, d: base.d, j: k }
}

/// `log((t + u sqrt D)/2)`.
///
/// Depends only on `t`, since the unit is the root `> 1` of
/// `x^2 - t x + 1`, so the value is `acosh(t/2)`.
pub fn log_unit(sol: &PellSolution) -> f64 {
    log_unit_from_trace(&sol.t)
}

pub(crate) fn log_unit_from_trace(t: &BigUint) -> f64 {
    let bits = t.bits();
    if bits <= 1000 {
        let tf = t.to_f64().expect("fits in f64");
        return (tf / 2.0).acosh();
    }
    // acosh(t/2) = ln t - t^-2 - ..., and t^-2 is far below f64 resolution here.
    let shift = bits - 64;
    let top = (t >> shift).to_u64().expect("64 bits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Default cap on character evaluations in [`dirichlet_l1`].
pub const DEFAULT_L_BUDGET: u64 = 4_000_000_000;

/// Periods summed directly before switching to the tail expansion.
const DIRECT_PERIODS: u64 = 4;

/// `L(1, chi_D)` with absolute error `<= tol`.
pub fn dirichlet_l1(d: Discriminant, tol: f64) -> Result<f64> {
    dirichlet_l1_with_budget(d, tol, DEFAULT_L_BUDGET)
}

/// `L(1, chi_D)` using at most `budget` character-weighted terms.
///
/// `chi_D` has period `D` and sums to zero over a period. The first
/// `DIRECT_PERIODS` periods are summed term by term. For the remaining
/// periods `k >= K`, expanding `1/(a + kD)` in powers of `a/(kD)` gives
///
/// `sum_{k>=K} sum_a chi(a)/(a+kD) = (1/D) sum_{m>=1} (-1)^m mu_m zeta(m+1, K)`
///
/// with `mu_m = sum_a chi(a) (a/D)^m`. The series is cut once the certified
/// remainder, together with a rounding allowance, is below `tol`.
pub fn dirichlet_l1_with_budget(d: Discriminant, tol: f64, budget: u64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let dv = d.get();
    let k0 = DIRECT_PERIODS;
    let unreachable = || Error::ToleranceUnreachable { d: dv, tol, budget };

    // Smallest M whose remainder bound is below tol/2.
    // |mu_m| <= D/(m+1) + 1 and zeta(m+1, K) <= K^-(m+1) (1 + K/m).
    let remainder = |m_max: usize| -> f64 {
        let kf = k0 as f64;
        let df = dv as f64;
        (m_max + 1..m_max + 400)
            .map(|m| {
                let mf = m as f64;
                (df / (mf + 1.0) + 1.0) * kf.powf(-(mf + 1.0)) * (1.0 + kf / mf) / df
            })
            .sum()
    };
    let mut moments = 1usize;
    while remainder(moments) > tol / 2.0 {
        moments += 1;
        if moments > 400 {
            return Err(unreachable());
        }
    }
    let terms = (k0 + moments as u64).saturating_mul(dv);
    if terms > budget {
        return Err(unreachable());
    }

    let chi: Vec<i8> = (1..=dv).map(|a| kronecker(dv as i64, a)).collect();

    let mut direct = NeumaierSum::default();
    for k in 0..k0 {
        let mut block = NeumaierSum::default();
        let base = (k * dv) as f64;
        for (i, &c) in chi.iter().enumerate() {
            if c != 0 {
                block.add(c as f64 / (base + (i + 1) as f64));
            }
        }
        direct.add(block.value());
    }

    let mut mu = vec![0.0f64; moments + 1];
    let df = dv as f64;
    for (i, &c) in chi.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let r = (i + 1) as f64 / df;
        let mut pw = r;
        for slot in mu.iter_mut().skip(1) {
            *slot += c as f64 * pw;
            pw *= r;
        }
    }
    let mut tail = 0.0;
    for (m, &mu_m) in mu.iter().enumerate().skip(1) {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        tail += sign * mu_m * hurwitz_zeta_int(m as u32 + 1, k0);
    }
    tail /= df;

    let abs_sum = ((k0 * dv) as f64).ln() + 1.0;
    let rounding = 64.0 * f64::EPSILON * (abs_sum + (moments as f64));
    if rounding > tol / 2.0 {
        return Err(unreachable());
    }
    Ok(direct.value() + tail)
}

/// Hurwitz zeta `sum_{k >= q} k^-s` for integer `s >= 2`, `q >= 1`.
pub(crate) fn hurwitz_zeta_int(s: u32, q: u64) -> f64 {
    const DIRECT: u64 = 16;
    // B_2j / (2j)!
    const B_OVER_FACT: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    let sf = s as f64;
    let mut sum = 0.0;
    for k in q..q + DIRECT {
        sum += (k as f64).powf(-sf);
    }
    let b = (q + DIRECT) as f64;
    sum += b.powf(1.0 - sf) / (sf - 1.0) + 0.5 * b.powf(-sf);
    // rising factorial (s)_{2j-1}
    let mut rising = sf;
    let mut bpow = b.powf(-sf - 1.0);
    for (j, coef) in B_OVER_FACT.iter().enumerate() {
        if j > 0 {
            let m = (2 * j) as f64;
            rising *= (sf + m - 1.0) * (sf + m);
            bpow /= b * b;
        }
        sum += coef * rising * bpow;
    }
    sum
}

#[derive(Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disc(d: u64) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    fn brute_min_pell(d: u64) -> (u64, u64) {
        for u in 1u64.. {
            let v = d * u * u + 4;
            let (t, exact) = isqrt(v);
            if exact {
                return (t, u);
            }
        }
        unreachable!()
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(0), (0, true));
        assert_eq!(isqrt(45), (6, false));
        assert_eq!(isqrt(49), (7, true));
        assert_eq!(isqrt(u64::MAX).0, 4294967295);
    }

    #[test]
    fn discriminant_validation() {
        assert!(Discriminant::new(5).is_ok());
        assert!(Discriminant::new(8).is_ok());
        for bad in [0, 1, 4, 6, 7, 9, 16, 36, 3] {
            assert!(Discriminant::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(5, 1), 1);
        assert_eq!(kronecker(12, 6), 0);
        // squares mod 5 are {1, 4}, so 2 is a non-residue
        let residues: Vec<u64> = (1..5).map(|x| x * x % 5).collect();
        assert!(!residues.contains(&2));
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(5, 3), -1);
        assert_eq!(kronecker(5, 4), 1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(8, 7), 1);
    }

    #[test]
    fn kronecker_matches_euler_criterion_on_odd_primes() {
        for p in [3u64, 7, 11, 13, 101, 997] {
            for d in 1..200i64 {
                let r = d.rem_euclid(p as i64) as u64;
                let euler = if r == 0 {
                    0
                } else {
                    let mut acc = 1u64;
                    for _ in 0..(p - 1) / 2 {
                        acc = acc * r % p;
                    }
                    if acc == 1 {
                        1
                    } else {
                        -1
                    }
                };
                assert_eq!(kronecker(d, p), euler, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn character_sums_vanish_over_a_period() {
        for d in Discriminant::all_up_to(1000) {
            let s: i64 = (1..=d.get()).map(|m| kronecker(d.get() as i64, m) as i64).sum();
            assert_eq!(s, 0, "D={d}");
        }
    }

    #[test]
    fn square_divisor_examples() {
        assert_eq!(square_divisors(3), vec![1]);
        // 32 = 2^5: 1, 4 and 16 divide it
        assert_eq!(square_divisors(6), vec![1, 2, 4]);
        assert_eq!(square_divisors(4), vec![1, 2]);
        assert_eq!(square_divisors(7), vec![1, 3]);
    }

    #[test]
    fn square_divisors_match_exhaustive_loop() {
        for n in 3u64..=10_000 {
            let v = n * n - 4;
            let brute: Vec<u64> = (1..=isqrt(v).0).filter(|u| v % (u * u) == 0).collect();
            assert_eq!(square_divisors(n), brute, "n={n}");
        }
    }

    #[test]
    fn pell_examples() {
        let cases = [(5, 3, 1), (8, 6, 2), (13, 11, 3), (12, 4, 1)];
        for (d, t, u) in cases {
            let s = pell_fundamental(disc(d));
            assert_eq!((s.t_u64(), s.u_u64()), (Some(t), Some(u)), "D={d}");
            assert_eq!(brute_min_pell(d), (t, u));
        }
    }

    #[test]
    fn pell_rejects_bad_discriminants() {
        for d in [4, 9, 3, 6, 2] {
            assert!(Discriminant::new(d).is_err());
        }
    }

    #[test]
    fn pell_matches_brute_force_for_small_regulators() {
        for d in Discriminant::all_up_to(3000) {
            let s = pell_fundamental(d);
            assert!(s.satisfies_norm());
            if let Some(u) = s.u_u64() {
                if u < 200_000 {
                    assert_eq!(brute_min_pell(d.get()), (s.t_u64().unwrap(), u), "D={d}");
                }
            }
        }
    }

    #[test]
    fn pell_large_regulator() {
        // t^2 - 244 u^2 = 4 has no small solution
        let s = pell_fundamental(disc(244));
        assert!(s.satisfies_norm());
        assert!(s.t.bits() > 20);
    }

    #[test]
    fn pell_power_examples() {
        let f5 = pell_fundamental(disc(5));
        let p1 = pell_power(&f5, 1);
        assert_eq!((p1.t_u64(), p1.u_u64(), p1.j), (Some(3), Some(1), 1));
        let p2 = pell_power(&f5, 2);
        assert_eq!((p2.t_u64(), p2.u_u64(), p2.j), (Some(7), Some(3), 2));
        let f8 = pell_fundamental(disc(8));
        let q2 = pell_power(&f8, 2);
        assert_eq!((q2.t_u64(), q2.u_u64()), (Some(34), Some(12)));
    }

    #[test]
    fn log_unit_examples() {
        let f5 = pell_fundamental(disc(5));
        assert!((log_unit(&f5) - 0.962_423_650_119_206_9).abs() < 1e-12);
        let f12 = pell_fundamental(disc(12));
        assert!((log_unit(&f12) - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-12);
        assert!((log_unit(&f12) - 1.316_957_896_924_816_7).abs() < 1e-12);
    }

    #[test]
    fn five_has_the_smallest_unit() {
        let floor = log_unit(&pell_fundamental(disc(5)));
        for d in Discriminant::all_up_to(5_000) {
            assert!(log_unit(&pell_fundamental(d)) >= floor, "D={d}");
        }
    }

    #[test]
    fn log_unit_of_huge_power() {
        let f = pell_fundamental(disc(13));
        let big = pell_power(&f, 600);
        assert!(big.t.bits() > 1000);
        let rel = (log_unit(&big) - 600.0 * log_unit(&f)).abs() / (600.0 * log_unit(&f));
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn hurwitz_against_direct_sum() {
        for s in [2u32, 3, 5, 9, 20] {
            for q in [1u64, 4, 7] {
                // brute partial sum plus integral tail
                let n = 2_000_000u64;
                let mut acc = 0.0;
                for k in (q..n).rev() {
                    acc += (k as f64).powf(-(s as f64));
                }
                let nf = n as f64;
                acc += nf.powf(1.0 - s as f64) / (s as f64 - 1.0) + 0.5 * nf.powf(-(s as f64));
                let h = hurwitz_zeta_int(s, q);
                assert!((h - acc).abs() < 1e-13 * acc.max(1.0), "s={s} q={q}: {h} vs {acc}");
            }
        }
    }

    #[test]
    fn l1_positive_and_matches_slow_partial_sum() {
        for d in [5u64, 8, 12, 13, 17, 21, 28, 33, 60, 101] {
            let v = dirichlet_l1(disc(d), 1e-10).unwrap();
            assert!(v > 0.0);
            // Abel bound: tail after N terms is at most D/N.
            let n = 5_000_000u64;
            let mut acc = 0.0;
            for m in 1..=n {
                acc += kronecker(d as i64, m) as f64 / m as f64;
            }
            assert!((acc - v).abs() <= d as f64 / n as f64 + 1e-9, "D={d}: {v} vs {acc}");
        }
    }

    #[test]
    fn l1_closed_forms() {
        // h(5) = 1, eps = (3+sqrt5)/2 (narrow), so L = log(eps)/sqrt(5)
        let l5 = dirichlet_l1(disc(5), 1e-12).unwrap();
        let eps5: f64 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((l5 - eps5.ln() / 5f64.sqrt()).abs() < 1e-11);
        let l8 = dirichlet_l1(disc(8), 1e-12).unwrap();
        let eps8: f64 = 3.0 + 8f64.sqrt();
        assert!((l8 - eps8.ln() / 8f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn l1_budget_exhaustion_is_an_error() {
        assert!(matches!(dirichlet_l1_with_budget(disc(101), 1e-10, 10), Err(Error::ToleranceUnreachable { .. })));
        assert!(dirichlet_l1(disc(5), 1e-18).is_err());
        assert!(dirichlet_l1(disc(5), -1.0).is_err());
    }

    proptest! {
        #[test]
        fn kronecker_is_multiplicative(d in 5i64..100_000, m1 in 1u64..1_000_000, m2 in 1u64..1_000_000) {
            prop_assert_eq!(kronecker(d, m1 * m2), kronecker(d, m1) * kronecker(d, m2));
        }

        #[test]
        fn pell_power_is_additive(d in 5u64..10_000, a in 1u64..10, b in 1u64..10) {
            prop_assume!(Discriminant::new(d).is_ok());
            let f = pell_fundamental(disc(d));
            let lhs = pell_power(&f, a + b);
            let rhs = pell_compose(&pell_power(&f, a), &pell_power(&f, b));
            prop_assert!(lhs.satisfies_norm());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn log_unit_is_linear_in_powers(d in 5u64..10_000, k in 1u64..=20) {
            prop_assume!(Discriminant::new(d).is_ok());
            let f = pell_fundamental(disc(d));
            let lf = log_unit(&f);
            let lk = log_unit(&pell_power(&f, k));
            prop_assert!(((lk - k as f64 * lf) / (k as f64 * lf)).abs() < 1e-10);
            prop_assert!(lf >= log_unit(&pell_fundamental(disc(5))) - 1e-15);
        }
    }
}

//! Primitive indefinite binary quadratic forms: reduction, rho-cycles,
//! narrow class numbers and the form/matrix correspondence.
//!
//! A form `[a, b, c]` of discriminant `D` is *reduced* when
//! `0 < b < sqrt(D)` and `sqrt(D) - b < 2|a| < sqrt(D) + b`. The reduced
//! forms of one `SL_2(Z)` class make up a single cycle under [`rho_step`],
//! so `h(D)` is the number of such cycles.

use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::{dirichlet_l1, isqrt, log_unit, pell_fundamental, Discriminant, PellSolution};
use crate::error::{Error, Result};

/// `a x^2 + b x y + c y^2` with `gcd(a, b, c) = 1` and positive non-square
/// discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let bad = |reason| Error::InvalidForm { a, b, c, reason };
        if a.gcd(&b).gcd(&c) != 1 {
            return Err(bad("not primitive"));
        }
        let d = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
        if d <= 0 {
            return Err(bad("discriminant not positive"));
        }
        if d > crate::arith::MAX_DISCRIMINANT as i128 {
            return Err(bad("discriminant too large"));
        }
        if isqrt(d as u64).1 {
            return Err(bad("discriminant is a square"));
        }
        Ok(QuadForm { a, b, c })
    }

    pub fn discriminant(&self) -> Discriminant {
        discriminant(self)
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    pub fn is_reduced(&self) -> bool {
        let s = isqrt(self.discriminant().get()).0 as i64;
        is_reduced_with(self.a, self.b, s)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// `b^2 - 4ac`.
pub fn discriminant(q: &QuadForm) -> Discriminant {
    let d = q.b as i128 * q.b as i128 - 4 * q.a as i128 * q.c as i128;
    Discriminant::new(d as u64).expect("QuadForm invariant")
}

/// Reduction test with `s = floor(sqrt D)`; `D` non-square makes the strict
/// inequalities against `sqrt D` exact integer comparisons.
#[inline]
fn is_reduced_with(a: i64, b: i64, s: i64) -> bool {
    let two_a = 2 * a.abs();
    b > 0 && b <= s && two_a + b > s && two_a - b <= s
}

/// Integral 2x2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Matrix2 {
    pub m11: i128,
    pub m12: i128,
    pub m21: i128,
    pub m22: i128,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2::new(1, 0, 0, 1);
    /// `(x, y) -> (-y, x)`.
    pub const S: Matrix2 = Matrix2::new(0, 1, -1, 0);

    pub const fn new(m11: i128, m12: i128, m21: i128, m22: i128) -> Self {
        Matrix2 { m11, m12, m21, m22 }
    }

    pub fn det(&self) -> i128 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> i128 {
        self.m11 + self.m22
    }

    pub fn mul(&self, o: &Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Matrix2 {
        Matrix2::new(self.m22, -self.m12, -self.m21, self.m11)
    }
}

/// The form `Q'(x, y) = Q((x, y) g)`, with `(x, y)` a row vector.
pub fn apply_transform(q: &QuadForm, g: &Matrix2) -> Result<QuadForm> {
    if g.det() != 1 {
        return Err(Error::NotUnimodular(g.det()));
    }
    let (a, b, c) = (q.a as i128, q.b as i128, q.c as i128);
    let (p, r, s, t) = (g.m11, g.m12, g.m21, g.m22);
    // (x, y) g = (p x + s y, r x + t y)
    let na = a * p * p + b * p * r + c * r * r;
    let nb = 2 * a * p * s + b * (p * t + r * s) + 2 * c * r * t;
    let nc = a * s * s + b * s * t + c * t * t;
    let fit = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("apply_transform"));
    Ok(QuadForm { a: fit(na)?, b: fit(nb)?, c: fit(nc)? })
}

/// Right neighbour `[c, b', c']` of a reduced form, `b' = -b (mod 2c)`.
pub fn rho_step(q: &QuadForm) -> Result<QuadForm> {
    let d = q.discriminant().get();
    let s = isqrt(d).0 as i64;
    if !is_reduced_with(q.a, q.b, s) {
        return Err(Error::NotReduced { a: q.a, b: q.b, c: q.c });
    }
    Ok(rho_reduced(q.a, q.b, q.c, s, d))
}

#[inline]
fn rho_reduced(_a: i64, b: i64, c: i64, s: i64, d: u64) -> QuadForm {
    let two_c = 2 * c.abs();
    let nb = s - (s + b).rem_euclid(two_c);
    let nc = (nb * nb - d as i64) / (4 * c);
    QuadForm { a: c, b: nb, c: nc }
}

/// A reduced form in the class of `q`, reached by repeated neighbour steps.
///
/// Each step moves `[a, b, c]` to `[c, b', c']` with `b' = -b (mod 2|c|)`,
/// taking `b'` in `(-|c|, |c|]` while `|c| > sqrt D` and the largest value
/// below `sqrt D` otherwise.
pub fn reduce(q: &QuadForm) -> QuadForm {
    let d = q.discriminant().get();
    let s = isqrt(d).0 as i128;
    let (mut a, mut b, mut c) = (q.a as i128, q.b as i128, q.c as i128);
    while !is_reduced_with(a as i64, b as i64, s as i64) || a.abs() > s || b.abs() > s {
        let two_c = 2 * c.abs();
        let nb = if c.abs() > s {
            let r = (-b).rem_euclid(two_c);
            if r > c.abs() {
                r - two_c
            } else {
                r
            }
        } else {
            s - (s + b).rem_euclid(two_c)
        };
        let nc = (nb * nb - d as i128) / (4 * c);
        a = c;
        b = nb;
        c = nc;
    }
    QuadForm { a: a as i64, b: b as i64, c: c as i64 }
}

/// The cycle of reduced forms of one class, starting from some member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedCycle {
    pub forms: Vec<QuadForm>,
}

impl ReducedCycle {
    pub fn contains(&self, q: &QuadForm) -> bool {
        self.forms.contains(q)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// The rho-cycle through a reduced form.
pub fn cycle_of(q: &QuadForm) -> Result<ReducedCycle> {
    let mut forms = vec![*q];
    let mut cur = rho_step(q)?;
    while cur != *q {
        forms.push(cur);
        cur = rho_step(&cur)?;
    }
    Ok(ReducedCycle { forms })
}

/// All reduced primitive forms of one discriminant, grouped by `b` and
/// sorted by `a` within a group, so a form can be located by binary search.
struct ReducedForms {
    d: u64,
    s: i64,
    b0: i64,
    offsets: Vec<usize>,
    a: Vec<i64>,
    c: Vec<i64>,
}

impl ReducedForms {
    fn len(&self) -> usize {
        self.a.len()
    }

    fn form(&self, idx: usize) -> QuadForm {
        let bi = self.offsets.partition_point(|&o| o <= idx) - 1;
        QuadForm { a: self.a[idx], b: self.b0 + 2 * bi as i64, c: self.c[idx] }
    }

    fn lookup(&self, a: i64, b: i64) -> Option<usize> {
        let bi = ((b - self.b0) / 2) as usize;
        let (lo, hi) = (self.offsets[bi], self.offsets[bi + 1]);
        self.a[lo..hi].binary_search(&a).ok().map(|k| lo + k)
    }

    /// Walks every cycle once; `visit` sees the member indices of each.
    fn for_each_cycle(&self, mut visit: impl FnMut(&[usize])) {
        let mut seen = vec![false; self.len()];
        let mut members = Vec::new();
        for bi in 0..self.offsets.len() - 1 {
            let b = self.b0 + 2 * bi as i64;
            for start in self.offsets[bi]..self.offsets[bi + 1] {
                if seen[start] {
                    continue;
                }
                members.clear();
                let (mut ca, mut cb, mut cc) = (self.a[start], b, self.c[start]);
                let mut idx = start;
                loop {
                    seen[idx] = true;
                    members.push(idx);
                    let next = rho_reduced(ca, cb, cc, self.s, self.d);
                    idx = self.lookup(next.a, next.b).expect("rho maps reduced forms to reduced forms");
                    if idx == start {
                        break;
                    }
                    ca = next.a;
                    cb = next.b;
                    cc = next.c;
                }
                visit(&members);
            }
        }
    }
}

/// Enumerates reduced forms by factoring `N_b = (D - b^2)/4` for every
/// admissible `b` at once: an odd prime `p` divides `N_b` exactly when
/// `b = ±sqrt(D) (mod p)`, so each prime only touches its own residue
/// classes.
fn enumerate_reduced(d: Discriminant) -> ReducedForms {
    let dv = d.get();
    let s = isqrt(dv).0 as i64;
    let b0: i64 = if dv.is_multiple_of(2) { 2 } else { 1 };
    let count = if s >= b0 { ((s - b0) / 2 + 1) as usize } else { 0 };

    let mut residual: Vec<u64> = (0..count)
        .map(|i| {
            let b = (b0 + 2 * i as i64) as u64;
            (dv - b * b) / 4
        })
        .collect();
    const SLOTS: usize = 16;
    let mut fac_p = vec![0u32; count * SLOTS];
    let mut fac_e = vec![0u8; count * SLOTS];
    let mut nfac = vec![0u8; count];

    for i in 0..count {
        let tz = residual[i].trailing_zeros();
        if tz > 0 {
            fac_p[i * SLOTS] = 2;
            fac_e[i * SLOTS] = tz as u8;
            nfac[i] = 1;
            residual[i] >>= tz;
        }
    }
    let n_max = residual.iter().copied().max().unwrap_or(0);
    let p_max = isqrt(n_max).0 + 1;
    for p in odd_primes_up_to(p_max) {
        let r = match sqrt_mod_prime(dv % p, p) {
            Some(r) => r,
            None => continue,
        };
        let inv2 = p.div_ceil(2);
        let roots: &[u64] = if r == 0 { &[0] } else { &[r, p - r] };
        for &root in roots {
            // b0 + 2i = root (mod p)
            let shift = (root + p - (b0 as u64 % p)) % p;
            let start = (shift * inv2 % p) as usize;
            let mut i = start;
            while i < count {
                let mut e = 0u8;
                while residual[i].is_multiple_of(p) {
                    residual[i] /= p;
                    e += 1;
                }
                if e > 0 {
                    let k = nfac[i] as usize;
                    fac_p[i * SLOTS + k] = p as u32;
                    fac_e[i * SLOTS + k] = e;
                    nfac[i] += 1;
                }
                i += p as usize;
            }
        }
    }

    let mut offsets = Vec::with_capacity(count + 1);
    let mut av = Vec::new();
    let mut cv = Vec::new();
    let mut divs: Vec<u64> = Vec::with_capacity(64);
    let mut row: Vec<(i64, i64)> = Vec::with_capacity(64);
    let mut pf: Vec<(u64, u32)> = Vec::with_capacity(SLOTS + 1);
    for i in 0..count {
        offsets.push(av.len());
        let b = b0 + 2 * i as i64;
        let n = (dv - (b * b) as u64) / 4;
        let k = nfac[i] as usize;
        pf.clear();
        for slot in i * SLOTS..i * SLOTS + k {
            pf.push((fac_p[slot] as u64, fac_e[slot] as u32));
        }
        if residual[i] > 1 {
            pf.push((residual[i], 1));
        }
        divs.clear();
        divs.push(1);
        for &(p, e) in &pf {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for j in 0..len {
                    divs.push(divs[j] * pk);
                }
            }
        }
        // s - b < 2a <= s + b
        let lo = ((s + 1 - b + 1) / 2).max(1) as u64;
        let hi = ((s + b) / 2) as u64;
        row.clear();
        // a common factor of a, b, c divides b and ac = -n
        let shared = (b as u64).gcd(&n) > 1;
        for &dd in &divs {
            if dd < lo || dd > hi {
                continue;
            }
            let cabs = n / dd;
            if shared && (dd as i64).gcd(&b).gcd(&(cabs as i64)) != 1 {
                continue;
            }
            row.push((dd as i64, -(cabs as i64)));
            row.push((-(dd as i64), cabs as i64));
        }
        row.sort_unstable();
        for &(a, c) in &row {
            av.push(a);
            cv.push(c);
        }
    }
    offsets.push(av.len());
    ReducedForms { d: dv, s, b0, offsets, a: av, c: cv }
}

pub(crate) fn odd_primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    let mut i = 3;
    while i <= n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    out
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mulm = |x: u64, y: u64| mul_mod(x, y, m);
    let mut r = 1 % m;
    let mut bb = b % m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, bb);
        }
        bb = mulm(bb, bb);
        e >>= 1;
    }
    r
}

#[inline]
fn mul_mod(x: u64, y: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        x * y % m
    } else {
        ((x as u128 * y as u128) % m as u128) as u64
    }
}

/// A square root of `n` modulo the odd prime `p` (Tonelli-Shanks).
fn sqrt_mod_prime(n: u64, p: u64) -> Option<u64> {
    let n = n % p;
    if n == 0 {
        return Some(0);
    }
    if pow_mod(n, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(n, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut m = q.trailing_zeros();
    q >>= m;
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| mul_mod(x, y, p);
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let mut b = c;
        for _ in 0..m - i - 1 {
            b = mulm(b, b);
        }
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Every reduced primitive form of discriminant `D`.
pub fn reduced_forms(d: Discriminant) -> Vec<QuadForm> {
    let rf = enumerate_reduced(d);
    (0..rf.len()).map(|i| rf.form(i)).collect()
}

/// The rho-cycles of discriminant `D`, one per narrow class, each starting
/// at its member with smallest `(b, a)`.
pub fn cycles(d: Discriminant) -> Vec<ReducedCycle> {
    let rf = enumerate_reduced(d);
    let mut out = Vec::new();
    rf.for_each_cycle(|members| {
        out.push(ReducedCycle { forms: members.iter().map(|&i| rf.form(i)).collect() });
    });
    out
}

/// Narrow class number `h(D)`: the number of rho-cycles of reduced forms.
pub fn class_number(d: Discriminant) -> u64 {
    let rf = enumerate_reduced(d);
    let mut h = 0;
    rf.for_each_cycle(|_| h += 1);
    h
}

/// `sqrt(D) L(1, chi_D) / log eps_1(D)`, accurate enough to round to `h(D)`
/// for any `h <= 10^6`.
pub fn class_number_via_formula(d: Discriminant) -> Result<f64> {
    let reg = log_unit(&pell_fundamental(d));
    let sqrt_d = (d.get() as f64).sqrt();
    let tol = (0.05 * reg / sqrt_d).min(1e-9);
    let l1 = dirichlet_l1(d, tol)?;
    Ok(sqrt_d * l1 / reg)
}

/// `gamma(Q, (t, u)) = [[(t + bu)/2, -cu], [au, (t - bu)/2]]`.
pub fn form_to_matrix(q: &QuadForm, sol: &PellSolution) -> Result<Matrix2> {
    let d = q.discriminant();
    if d != sol.d {
        return Err(Error::DiscriminantMismatch { form: d.get() as i64, pell: sol.d.get() });
    }
    let t = sol.t.to_i128().ok_or(Error::Overflow("form_to_matrix"))?;
    let u = sol.u.to_i128().ok_or(Error::Overflow("form_to_matrix"))?;
    let (a, b, c) = (q.a as i128, q.b as i128, q.c as i128);
    let bu = b.checked_mul(u).ok_or(Error::Overflow("form_to_matrix"))?;
    if (t + bu) % 2 != 0 {
        return Err(Error::Parity);
    }
    Ok(Matrix2::new((t + bu) / 2, -c * u, a * u, (t - bu) / 2))
}

/// Inverse correspondence: `(Q_gamma, t_gamma, u_gamma)`.
pub fn matrix_to_form(g: &Matrix2) -> Result<(QuadForm, i128, i128)> {
    if g.det() != 1 {
        return Err(Error::NotUnimodular(g.det()));
    }
    let t = g.trace();
    if t.abs() <= 2 {
        return Err(Error::NotHyperbolic(t));
    }
    let u = g.m21.gcd(&(g.m11 - g.m22)).gcd(&g.m12);
    let fit = |v: i128| i64::try_from(v).map_err(|_| Error::Overflow("matrix_to_form"));
    let q = QuadForm::new(fit(g.m21 / u)?, fit((g.m11 - g.m22) / u)?, fit(-g.m12 / u)?)?;
    Ok((q, t, u))
}

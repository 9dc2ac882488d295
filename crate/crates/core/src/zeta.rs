//! Analytic layer over a [`SpectrumTable`]: the smoothed series `phi_s(x)`,
//! the absolutely convergent logarithmic derivative for `Re s > 1`, the exact
//! mean square of `phi` over `[1, T]`, the constant `C(sigma)` and prime
//! geodesic counting.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::arith::NeumaierSum;
use crate::error::{Error, Result};
use crate::spectrum::{
    build_table, eps, least_squares, multiplicity_envelope, rational_to_f64, trace_cutoff, SpectrumEntry,
    SpectrumTable, WeightMode, ENVELOPE_EXPONENT,
};

/// Rows of the pair matrix handled by one task of the off-diagonal sum.
const TILE_ROWS: usize = 32;

/// Below this `|theta T|` the pair integral uses its Taylor expansion.
const SMALL_THETA_T: f64 = 1e-4;

/// `s = sigma + i t` together with the smoothing parameter `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalPoint {
    pub sigma: f64,
    pub t: f64,
    pub x: f64,
}

impl EvalPoint {
    pub fn new(sigma: f64, t: f64, x: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if !t.is_finite() {
            return Err(Error::Domain(format!("t must be finite, got {t}")));
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("x must be positive, got {x}")));
        }
        Ok(EvalPoint { sigma, t, x })
    }

    /// `X = x^(1/2) + x^(-1/2)`.
    pub fn cutoff(&self) -> f64 {
        trace_cutoff(self.x)
    }
}

/// `sum_{n < X} m(n) Lambda(n, x) eps(n)^(-2s)`.
pub fn phi(p: &EvalPoint, table: &SpectrumTable) -> Result<Complex64> {
    let cut = p.cutoff();
    table.require(cut)?;
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for e in table.below(cut) {
        let (cr, ci) = term(e, p.sigma, p.t, smoothing(e, p.x));
        re.add(cr);
        im.add(ci);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// `1 - eps(n)^2 / x`.
#[inline]
fn smoothing(e: &SpectrumEntry, x: f64) -> f64 {
    1.0 - (2.0 * e.log_eps).exp() / x
}

/// `m(n) Lambda(n) f eps(n)^(-2 sigma) e^(-2 i t log eps(n))` as `(re, im)`.
#[inline]
fn term(e: &SpectrumEntry, sigma: f64, t: f64, f: f64) -> (f64, f64) {
    let r = e.weight * e.lambda_bar * f * (-2.0 * sigma * e.log_eps).exp();
    let (s, c) = (2.0 * t * e.log_eps).sin_cos();
    (r * c, -r * s)
}

/// Truncation of `Z'/Z(s) = sum_n m(n) Lambda(n) eps(n)^(-2s)` at the end of
/// the table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDerivSeries {
    /// The sum over the entries of the table.
    pub value: Complex64,
    /// Main term of the omitted tail, `Y^(1-s) / (s-1)` with `Y = eps(N)^2`
    /// from `sum_{N(gamma) < y} Lambda ~ y`. Not included in `value`; zero
    /// for a finite series.
    pub tail_main: Complex64,
    /// Bound on the modulus of the omitted tail from the multiplicity
    /// envelope. Heuristic; infinite when the envelope does not converge.
    pub tail_bound: f64,
    /// Largest trace summed.
    pub n_max: u64,
}

pub fn log_deriv_series(sigma: f64, t: f64, table: &SpectrumTable) -> Result<LogDerivSeries> {
    if !(sigma > 1.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("log_deriv_series needs sigma > 1, got {sigma} (the series diverges)")));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for e in table.entries() {
        let (cr, ci) = term(e, sigma, t, 1.0);
        re.add(cr);
        im.add(ci);
    }
    let value = Complex64::new(re.value(), im.value());
    if table.x_cut().is_infinite() {
        let n_max = table.entries().last().map_or(0, |e| e.n);
        return Ok(LogDerivSeries { value, tail_main: Complex64::zero(), tail_bound: 0.0, n_max });
    }
    let n_max = table.max_trace();
    let s = Complex64::new(sigma, t);
    let log_y = 2.0 * (n_max as f64 / 2.0).acosh();
    let tail_main = ((1.0 - s) * log_y).exp() / (s - 1.0);
    let env = multiplicity_envelope(table.entries());
    let tail_bound = log_deriv_tail_bound(sigma, n_max, env.c_fit);
    Ok(LogDerivSeries { value, tail_main, tail_bound, n_max })
}

/// Bound on `sum_{n > N} m(n) Lambda(n) eps(n)^(-2 sigma)` assuming
/// `m(n) <= c n^1.15`, with `Lambda(n) <= 2 kappa log n` and
/// `eps(n) >= n - 1`.
fn log_deriv_tail_bound(sigma: f64, n: u64, c_fit: f64) -> f64 {
    let beta = 2.0 * sigma - ENVELOPE_EXPONENT;
    if beta <= 1.0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let kappa = 1.0 / (1.0 - eps(n + 1).powi(-2));
    let shift = ((nf + 1.0) / nf).powf(2.0 * sigma);
    let l = nf.ln();
    let b1 = beta - 1.0;
    let integral = nf.powf(-b1) * (l / b1 + 1.0 / (b1 * b1));
    c_fit * 2.0 * kappa * shift * integral
}

/// `(1/T) int_1^T |phi_{sigma+it}(x)|^2 dt` split into the diagonal and
/// off-diagonal parts of the double sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareIntegralResult {
    pub mean: f64,
    pub diagonal: f64,
    pub offdiagonal: f64,
    pub t_max: f64,
    pub x: f64,
    pub sigma: f64,
}

/// `int_1^T e^(-2 i t theta) dt`.
pub fn pair_integral(theta: f64, t_max: f64) -> Complex64 {
    if (theta * t_max).abs() < SMALL_THETA_T {
        let f = 0.5 * pair_kernel(theta, t_max);
        // imaginary part: -(T^2 - 1) theta + (T^4 - 1) (2 theta)^3 / 24
        let im = -(t_max * t_max - 1.0) * theta + (t_max.powi(4) - 1.0) * (2.0 * theta).powi(3) / 24.0;
        return Complex64::new(f, im);
    }
    let a = Complex64::new(0.0, -2.0 * theta * t_max).exp();
    let b = Complex64::new(0.0, -2.0 * theta).exp();
    (a - b) / Complex64::new(0.0, -2.0 * theta)
}

/// `int_1^T 2 cos(2 t theta) dt = 2 cos(theta (T+1)) sin(theta (T-1)) / theta`,
/// the sum of a pair integral and its conjugate.
#[inline]
pub fn pair_kernel(theta: f64, t_max: f64) -> f64 {
    if (theta * t_max).abs() < SMALL_THETA_T {
        let z2 = 4.0 * theta * theta;
        return 2.0 * ((t_max - 1.0) - z2 * (t_max.powi(3) - 1.0) / 6.0 + z2 * z2 * (t_max.powi(5) - 1.0) / 120.0);
    }
    2.0 * (theta * (t_max + 1.0)).cos() * (theta * (t_max - 1.0)).sin() / theta
}

pub fn square_integral_mean(sigma: f64, t_max: f64, x: f64, table: &SpectrumTable) -> Result<SquareIntegralResult> {
    if !(t_max > 1.0) || !t_max.is_finite() {
        return Err(Error::Domain(format!("T must exceed 1, got {t_max}")));
    }
    let p = EvalPoint::new(sigma, 0.0, x)?;
    let cut = p.cutoff();
    table.require(cut)?;
    let entries = table.below(cut);
    let coef: Vec<f64> =
        entries.iter().map(|e| e.weight * e.lambda_bar * smoothing(e, x) * (-2.0 * sigma * e.log_eps).exp()).collect();
    let logs: Vec<f64> = entries.iter().map(|e| e.log_eps).collect();

    let mut diag = NeumaierSum::default();
    for c in &coef {
        diag.add(c * c);
    }
    let diagonal = (t_max - 1.0) / t_max * diag.value();

    let k = coef.len();
    let tiles: Vec<f64> = (0..k.div_ceil(TILE_ROWS))
        .into_par_iter()
        .map(|tile| {
            let mut acc = NeumaierSum::default();
            for i in tile * TILE_ROWS..((tile + 1) * TILE_ROWS).min(k) {
                let mut row = NeumaierSum::default();
                for j in i + 1..k {
                    row.add(coef[j] * pair_kernel(logs[i] - logs[j], t_max));
                }
                acc.add(coef[i] * row.value());
            }
            acc.value()
        })
        .collect();
    let mut off = NeumaierSum::default();
    for v in tiles {
        off.add(v);
    }
    let offdiagonal = off.value() / t_max;
    Ok(SquareIntegralResult { mean: diagonal + offdiagonal, diagonal, offdiagonal, t_max, x, sigma })
}

/// Partial sum of `C(sigma) = sum_n m(n)^2 Lambda(n)^2 eps(n)^(-4 sigma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CConstant {
    pub sigma: f64,
    pub n: u64,
    pub partial: f64,
    /// Bound on the remainder from the fitted envelope `m(n) <= c_fit n^1.15`.
    /// Heuristic; infinite for `sigma <= 0.825`.
    pub tail_bound: f64,
    pub c_fit: f64,
}

pub fn c_constant(sigma: f64, weight: &WeightMode, n: u64) -> Result<CConstant> {
    check_c_args(sigma, n)?;
    let table = build_table(n as f64 + 1.0, weight)?;
    c_constant_from_table(sigma, &table, n)
}

fn check_c_args(sigma: f64, n: u64) -> Result<()> {
    if !(sigma > 0.75) || !sigma.is_finite() {
        return Err(Error::Domain(format!("C(sigma) diverges for sigma <= 3/4, got {sigma}")));
    }
    if n < 3 {
        return Err(Error::Domain(format!("cutoff N must be at least 3, got {n}")));
    }
    Ok(())
}

pub fn c_constant_from_table(sigma: f64, table: &SpectrumTable, n: u64) -> Result<CConstant> {
    check_c_args(sigma, n)?;
    table.require(n as f64 + 1.0)?;
    let entries = table.below(n as f64 + 1.0);
    let mut acc = NeumaierSum::default();
    for e in entries {
        let a = e.weight * e.lambda_bar;
        acc.add(a * a * (-4.0 * sigma * e.log_eps).exp());
    }
    let c_fit = multiplicity_envelope(entries).c_fit;
    Ok(CConstant { sigma, n, partial: acc.value(), tail_bound: c_tail_bound(sigma, n, c_fit), c_fit })
}

/// Bound on `sum_{n > N} m(n)^2 Lambda(n)^2 eps(n)^(-4 sigma)` assuming
/// `m(n) <= c n^1.15`.
fn c_tail_bound(sigma: f64, n: u64, c_fit: f64) -> f64 {
    let beta = 4.0 * sigma - 2.0 * ENVELOPE_EXPONENT;
    if beta <= 1.0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let kappa = 1.0 / (1.0 - eps(n + 1).powi(-2));
    let shift = ((nf + 1.0) / nf).powf(4.0 * sigma);
    let l = nf.ln();
    let b1 = beta - 1.0;
    let integral = nf.powf(-b1) * (l * l / b1 + 2.0 * l / (b1 * b1) + 2.0 / (b1 * b1 * b1));
    c_fit * c_fit * 4.0 * kappa * kappa * shift * integral
}

/// Weighted number of primitive hyperbolic classes with norm below `x`.
pub fn prime_geodesic_count(x: f64, weight: &WeightMode) -> Result<f64> {
    check_pgt_x(x)?;
    let cut = trace_cutoff(x);
    if cut <= 3.0 {
        return Ok(0.0);
    }
    let table = build_table(cut, weight)?;
    prime_geodesic_count_from_table(x, &table)
}

fn check_pgt_x(x: f64) -> Result<()> {
    if !(x > 4.0) || !x.is_finite() {
        return Err(Error::Domain(format!("prime geodesic count needs x > 4, got {x}")));
    }
    Ok(())
}

pub fn prime_geodesic_count_from_table(x: f64, table: &SpectrumTable) -> Result<f64> {
    check_pgt_x(x)?;
    let cut = trace_cutoff(x);
    table.require(cut)?;
    let mut total = BigRational::zero();
    for e in table.below(cut) {
        for c in e.components.iter().filter(|c| c.j == 1) {
            total += c.value();
        }
    }
    Ok(rational_to_f64(&total))
}

/// `li(x) = int_2^x dt / log t`.
pub fn li(x: f64) -> f64 {
    if x == 2.0 {
        return 0.0;
    }
    ei(x.ln()) - ei(std::f64::consts::LN_2)
}

/// Exponential integral `Ei(y)` for `y > 0`.
fn ei(y: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut acc = NeumaierSum::default();
    acc.add(EULER_GAMMA);
    acc.add(y.ln());
    let mut pow = 1.0;
    for k in 1..2000u32 {
        let kf = k as f64;
        pow *= y / kf;
        let t = pow / kf;
        acc.add(t);
        if kf > y && t < 1e-18 * acc.value().abs() {
            break;
        }
    }
    acc.value()
}

/// `x = T^3`.
pub fn cube(t: f64) -> f64 {
    t * t * t
}

/// Slope of `log mean` against `log T`, with the sampled means.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub samples: Vec<SquareIntegralResult>,
}

pub fn growth_exponent(
    sigma: f64,
    ts: &[f64],
    x_rule: impl Fn(f64) -> f64,
    table: &SpectrumTable,
) -> Result<GrowthFit> {
    let mut distinct: Vec<f64> = ts.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Domain(format!("growth fit needs at least 3 distinct T values, got {}", distinct.len())));
    }
    let samples = ts.iter().map(|&t| square_integral_mean(sigma, t, x_rule(t), table)).collect::<Result<Vec<_>>>()?;
    if let Some(r) = samples.iter().find(|r| !(r.mean > 0.0)) {
        return Err(Error::Domain(format!("mean {} at T={} has no logarithm", r.mean, r.t_max)));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|r| (r.t_max.ln(), r.mean.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    Ok(GrowthFit { slope, intercept, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn small_table() -> &'static SpectrumTable {
        static T: OnceLock<SpectrumTable> = OnceLock::new();
        T.get_or_init(|| build_table(400.0, &WeightMode::Unity).unwrap())
    }

    fn single(n: u64, h: u64) -> SpectrumTable {
        let comp = Component { u: 1, d: n * n - 4, j: 1, h, lambda: BigRational::one() };
        let e = SpectrumEntry::from_components(n, vec![comp]);
        SpectrumTable::from_entries(f64::INFINITY, WeightMode::Unity, vec![e]).unwrap()
    }

    use crate::spectrum::Component;

    fn eps3() -> f64 {
        (3.0 + 5f64.sqrt()) / 2.0
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn phi_empty_below_first_trace() {
        let p = EvalPoint::new(0.75, 3.0, 6.0).unwrap();
        assert_eq!(phi(&p, small_table()).unwrap(), Complex64::zero());
    }

    #[test]
    fn phi_single_term() {
        let (sigma, t) = (0.8, 2.5);
        let e = eps3();
        let lam = 2.0 * e.ln() / (1.0 - e.powi(-2)) * (1.0 - e * e / 7.0);
        let want = Complex64::new(-2.0 * sigma, -2.0 * t) * e.ln();
        let want = want.exp() * lam;
        let got = phi(&EvalPoint::new(sigma, t, 7.0).unwrap(), small_table()).unwrap();
        assert!((got - want).norm() < 1e-14 * want.norm(), "{got} vs {want}");
    }

    #[test]
    fn phi_needs_cover() {
        let p = EvalPoint::new(0.75, 1.0, 1e6).unwrap();
        assert!(matches!(phi(&p, small_table()), Err(Error::TableTooSmall { .. })));
    }

    #[test]
    fn eval_point_validation() {
        assert!(EvalPoint::new(0.0, 1.0, 10.0).is_err());
        assert!(EvalPoint::new(0.5, f64::NAN, 10.0).is_err());
        assert!(EvalPoint::new(0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn log_deriv_rejects_strip() {
        assert!(log_deriv_series(1.0, 3.0, small_table()).is_err());
        assert!(log_deriv_series(0.9, 3.0, small_table()).is_err());
    }

    #[test]
    fn log_deriv_tail_bound_shrinks() {
        let mut last = f64::INFINITY;
        for cut in [50.0, 100.0, 200.0, 400.0] {
            let tab = small_table().truncated(cut).unwrap();
            let b = log_deriv_series(1.5, 4.0, &tab).unwrap().tail_bound;
            assert!(b < last, "{b} >= {last} at X={cut}");
            last = b;
        }
    }

    #[test]
    fn log_deriv_finite_series_is_exact() {
        let tab = single(5, 2);
        let r = log_deriv_series(1.5, 0.0, &tab).unwrap();
        let l = (2.5f64).acosh();
        let want = 2.0 * 2.0 * l / (1.0 - (-2.0 * l).exp()) * (-3.0 * l).exp();
        assert!(close(r.value.re, want, 1e-14));
        assert_eq!(r.tail_bound, 0.0);
    }

    #[test]
    fn single_entry_mean() {
        let tab = single(7, 3);
        let (sigma, t, x) = (0.7, 25.0, 1e3);
        let r = square_integral_mean(sigma, t, x, &tab).unwrap();
        let l = (3.5f64).acosh();
        let a = 3.0 * 2.0 * l / (1.0 - (-2.0 * l).exp()) * (1.0 - (2.0 * l).exp() / x) * (-2.0 * sigma * l).exp();
        assert!(close(r.mean, (t - 1.0) / t * a * a, 1e-13));
        assert_eq!(r.offdiagonal, 0.0);
    }

    #[test]
    fn mean_assembly_and_sign() {
        for &(sigma, t, x) in &[(0.6, 10.0, 1e2), (0.9, 37.5, 1e4), (1.3, 2.0, 5e4)] {
            let r = square_integral_mean(sigma, t, x, small_table()).unwrap();
            assert_eq!(r.mean, r.diagonal + r.offdiagonal);
            assert!(r.mean >= -1e-9);
        }
        assert!(square_integral_mean(0.9, 1.0, 100.0, small_table()).is_err());
    }

    /// Midpoint rule with enough nodes per oscillation to reach ~1e-9.
    fn brute_mean(sigma: f64, t_max: f64, x: f64, tab: &SpectrumTable) -> f64 {
        let steps = 200_000;
        let h = (t_max - 1.0) / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let t = 1.0 + (i as f64 + 0.5) * h;
            acc += phi(&EvalPoint::new(sigma, t, x).unwrap(), tab).unwrap().norm_sqr();
        }
        acc * h / t_max
    }

    #[test]
    fn mean_matches_direct_integration() {
        let tab = small_table();
        for &(sigma, t, x) in &[(0.6, 10.0, 900.0), (0.9, 30.0, 400.0)] {
            let r = square_integral_mean(sigma, t, x, tab).unwrap();
            let b = brute_mean(sigma, t, x, tab);
            assert!(close(r.mean, b, 1e-7), "{} vs {b}", r.mean);
        }
    }

    #[test]
    fn mean_independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| square_integral_mean(0.75, 100.0, 1e5, small_table()).unwrap())
        };
        let a = run(1);
        for k in [2, 3, 8] {
            let b = run(k);
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.offdiagonal.to_bits(), b.offdiagonal.to_bits());
        }
    }

    #[test]
    fn pair_kernel_branches_agree() {
        let t = 50.0;
        let theta = 0.99 * SMALL_THETA_T / t;
        let series = pair_kernel(theta, t);
        let direct = ((2.0 * t * theta).sin() - (2.0 * theta).sin()) / theta;
        assert!(close(series, direct, 1e-9));
        let above = pair_kernel(1.01 * SMALL_THETA_T / t, t);
        assert!(close(series, above, 1e-3));
        assert!(close(pair_kernel(0.0, t), 2.0 * (t - 1.0), 1e-15));
    }

    #[test]
    fn pair_integral_small_theta() {
        let t = 10.0;
        for theta in [3e-6, -7e-6] {
            let a = pair_integral(theta, t);
            // direct quadrature of the defining integral
            let steps = 100_000;
            let h = (t - 1.0) / steps as f64;
            let mut acc = Complex64::zero();
            for i in 0..steps {
                let s = 1.0 + (i as f64 + 0.5) * h;
                acc += Complex64::new(0.0, -2.0 * s * theta).exp() * h;
            }
            assert!((a - acc).norm() < 1e-9, "{a} vs {acc}");
        }
    }

    #[test]
    fn c_constant_first_term() {
        let c = c_constant(1.0, &WeightMode::Unity, 3).unwrap();
        assert!((c.partial - 0.10811).abs() < 5e-6, "{}", c.partial);
        let e = eps3();
        let lam = 2.0 * e.ln() / (1.0 - e.powi(-2));
        assert!(close(c.partial, lam * lam / e.powi(4), 1e-14));
    }

    #[test]
    fn c_constant_guards() {
        assert!(c_constant(0.75, &WeightMode::Unity, 10).is_err());
        assert!(c_constant(0.7, &WeightMode::Unity, 10).is_err());
        assert!(c_constant(0.9, &WeightMode::Unity, 2).is_err());
        let c = c_constant_from_table(0.8, small_table(), 300).unwrap();
        assert!(c.tail_bound.is_infinite());
    }

    #[test]
    fn c_constant_monotone_and_bounded() {
        let tab = small_table();
        let mut last = 0.0;
        for n in (3..=399).step_by(17) {
            let c = c_constant_from_table(0.95, tab, n).unwrap();
            assert!(c.partial >= last);
            last = c.partial;
        }
        let a = c_constant_from_table(0.95, tab, 150).unwrap();
        let b = c_constant_from_table(0.95, tab, 399).unwrap();
        assert!(b.partial - a.partial <= a.tail_bound);
    }

    #[test]
    fn c_constant_index_weight_scales() {
        let k = WeightMode::index_bound(3).unwrap();
        let tab = build_table(60.0, &k).unwrap();
        let a = c_constant_from_table(1.1, small_table(), 59).unwrap();
        let b = c_constant_from_table(1.1, &tab, 59).unwrap();
        assert!(close(b.partial, 9.0 * a.partial, 1e-13));
    }

    #[test]
    fn geodesic_count_small_x() {
        assert_eq!(prime_geodesic_count(6.0, &WeightMode::Unity).unwrap(), 0.0);
        assert_eq!(prime_geodesic_count(7.0, &WeightMode::Unity).unwrap(), 1.0);
        assert!(prime_geodesic_count(4.0, &WeightMode::Unity).is_err());
    }

    #[test]
    fn geodesic_count_is_step_function() {
        let tab = small_table();
        let mut last = 0.0;
        let mut x = 5.0;
        while x < 1.5e5 {
            let c = prime_geodesic_count_from_table(x, tab).unwrap();
            assert!(c >= last);
            last = c;
            x *= 1.07;
        }
    }

    #[test]
    fn geodesic_count_skips_powers() {
        // n = 18 is the cube of the unit of trace 3, D = 5.
        let tab = small_table();
        let x = eps(18).powi(2) * 1.0001;
        let all = prime_geodesic_count_from_table(x, tab).unwrap();
        let mut direct = BigRational::zero();
        for e in tab.below(trace_cutoff(x)) {
            for c in &e.components {
                if c.j == 1 {
                    direct += BigRational::from_integer(BigInt::from(c.h));
                }
            }
        }
        assert_eq!(all, rational_to_f64(&direct));
        let m18 = tab.entry(18).unwrap();
        assert!(m18.components.iter().any(|c| c.j == 3));
    }

    /// Composite Simpson on `1/ln t`.
    fn li_quad(x: f64) -> f64 {
        let n = 200_000;
        let h = (x - 2.0) / n as f64;
        let f = |t: f64| 1.0 / t.ln();
        let mut acc = f(2.0) + f(x);
        for i in 1..n {
            acc += f(2.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn li_values() {
        assert_eq!(li(2.0), 0.0);
        assert!((li(10.0) - 5.12043572).abs() < 1e-8);
        for x in [3.0, 10.0, 100.0, 1234.5] {
            assert!((li(x) - li_quad(x)).abs() < 1e-8 * li(x).max(1.0), "x={x}");
        }
        let mut last = 0.0;
        for k in 1..60 {
            let v = li(2.0 * 1.3f64.powi(k));
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn growth_of_single_entry() {
        let tab = single(3, 1);
        let g = growth_exponent(0.9, &[1e3, 1e4, 1e5, 1e6], cube, &tab).unwrap();
        assert!(g.slope.abs() < 0.05, "{}", g.slope);
        assert!(growth_exponent(0.9, &[10.0, 10.0, 20.0], cube, &tab).is_err());
    }

    proptest! {
        #[test]
        fn phi_conjugate_symmetry(sigma in 0.3f64..2.0, t in 0.0f64..200.0, x in 7.0f64..1.5e5) {
            let tab = small_table();
            let a = phi(&EvalPoint::new(sigma, t, x).unwrap(), tab).unwrap();
            let b = phi(&EvalPoint::new(sigma, -t, x).unwrap(), tab).unwrap();
            prop_assert_eq!(a, b.conj());
        }

        #[test]
        fn log_deriv_conjugate_symmetry(sigma in 1.01f64..3.0, t in 0.0f64..100.0) {
            let a = log_deriv_series(sigma, t, small_table()).unwrap();
            let b = log_deriv_series(sigma, -t, small_table()).unwrap();
            prop_assert_eq!(a.value, b.value.conj());
        }

        #[test]
        fn hermitian_pairing(theta in -2.0f64..2.0, t in 1.5f64..500.0) {
            prop_assume!(theta != 0.0);
            let p = pair_integral(theta, t);
            let q = pair_integral(-theta, t);
            prop_assert!((p - q.conj()).norm() <= 1e-12 * p.norm().max(1.0));
            let sum = p + q;
            prop_assert!(sum.im.abs() <= 1e-12 * sum.norm().max(1.0));
            let k = pair_kernel(theta, t);
            prop_assert!((sum.re - k).abs() <= 1e-9 * k.abs().max(1.0));
        }
    }
}

//! On-disk formats: the spectrum cache and discriminant weight tables.
//!
//! A cache file looks like
//!
//! ```text
//! # selberg-spectrum v1 X=100 weight=unity
//! n,m_num,m_den,log_eps,lambda_bar,components
//! 3,1,1,9.6242365011920694e-1,2.2536504730112195e0,1:5:1:1:1
//! ```
//!
//! with one `u:D:j:h:lambda` group per element of `U(n)`, joined by `|`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::arith::Discriminant;
use crate::error::{Error, Result};
use crate::spectrum::{log_eps, max_trace_below, Component, SpectrumEntry, SpectrumTable, WeightMode};

const MAGIC: &str = "# selberg-spectrum v1";
const HEADER: &str = "n,m_num,m_den,log_eps,lambda_bar,components";

/// Relative slack allowed between a stored `log_eps` and the recomputed one.
const SCALAR_SLACK: f64 = 1e-12;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// The cache text for `table`.
pub fn render_cache(table: &SpectrumTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} X={} weight={}", table.x_cut(), table.weight());
    out.push_str(HEADER);
    out.push('\n');
    for e in table.entries() {
        let comps: Vec<String> =
            e.components.iter().map(|c| format!("{}:{}:{}:{}:{}", c.u, c.d, c.j, c.h, c.lambda)).collect();
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{}",
            e.n,
            e.m.numer(),
            e.m.denom(),
            e.log_eps,
            e.lambda_bar,
            comps.join("|")
        );
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn write_cache(path: &Path, table: &SpectrumTable) -> Result<()> {
    write_atomic(path, render_cache(table).as_bytes())
}

pub fn read_cache(path: &Path) -> Result<SpectrumTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_cache(&text)
}

/// Parses and checks a cache: the header, consecutive traces, `m` against
/// its components, and the stored scalars against their definitions.
pub fn parse_cache(text: &str) -> Result<SpectrumTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty cache"))?;
    let rest = first
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix(" X="))
        .ok_or_else(|| parse_err(1, format!("expected `{MAGIC} X=...`")))?;
    let (x_str, weight_str) = rest.split_once(" weight=").ok_or_else(|| parse_err(1, "missing weight"))?;
    let x_cut: f64 = x_str.parse().map_err(|_| parse_err(1, format!("bad X `{x_str}`")))?;
    if !(x_cut > 3.0) || !x_cut.is_finite() {
        return Err(parse_err(1, format!("X must be finite and exceed 3, got {x_str}")));
    }
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(parse_err(2, format!("expected header `{HEADER}`"))),
    }

    let mut entries = Vec::new();
    let mut lambdas: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut expect = 3u64;
    for (no, line) in lines {
        let e = parse_row(no, line)?;
        if e.n != expect {
            return Err(parse_err(no, format!("expected trace {expect}, found {}", e.n)));
        }
        expect += 1;
        for c in &e.components {
            if let Some(prev) = lambdas.insert(c.d, c.lambda.clone()) {
                if prev != c.lambda {
                    return Err(parse_err(no, format!("conflicting weights for D={}", c.d)));
                }
            }
        }
        entries.push(e);
    }
    let last = max_trace_below(x_cut);
    if expect != last + 1 {
        return Err(parse_err(0, format!("X={x_str} needs traces up to {last}, file ends at {}", expect - 1)));
    }

    let weight = match weight_str {
        "unity" => WeightMode::Unity,
        w => match w.strip_prefix("index:") {
            Some(k) => WeightMode::index_bound(k.parse().map_err(|_| parse_err(1, format!("bad weight `{w}`")))?)?,
            None => match w.strip_prefix("table:") {
                Some(src) => WeightMode::table(src, lambdas)?,
                None => return Err(parse_err(1, format!("unknown weight `{w}`"))),
            },
        },
    };
    if !matches!(weight, WeightMode::Table { .. }) {
        for e in &entries {
            for c in &e.components {
                if weight.lambda(c.d)? != c.lambda {
                    return Err(parse_err(0, format!("n={}: weight of D={} disagrees with {weight}", e.n, c.d)));
                }
            }
        }
    }
    SpectrumTable::from_entries(x_cut, weight, entries)
}

fn parse_row(no: usize, line: &str) -> Result<SpectrumEntry> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 6 {
        return Err(parse_err(no, format!("expected 6 fields, found {}", f.len())));
    }
    let int =
        |s: &str, what: &str| -> Result<u64> { s.parse().map_err(|_| parse_err(no, format!("bad {what} `{s}`"))) };
    let float =
        |s: &str, what: &str| -> Result<f64> { s.parse().map_err(|_| parse_err(no, format!("bad {what} `{s}`"))) };
    let n = int(f[0], "n")?;
    if n < 3 {
        return Err(parse_err(no, format!("trace {n} is not hyperbolic")));
    }
    let num = BigInt::from_str(f[1]).map_err(|_| parse_err(no, format!("bad m_num `{}`", f[1])))?;
    let den = BigInt::from_str(f[2]).map_err(|_| parse_err(no, format!("bad m_den `{}`", f[2])))?;
    if !den.is_positive() {
        return Err(parse_err(no, "m_den must be positive"));
    }
    let m = BigRational::new(num.clone(), den.clone());
    if m.numer() != &num || m.denom() != &den {
        return Err(parse_err(no, "m is not in lowest terms"));
    }
    let log_e = float(f[3], "log_eps")?;
    let lam_bar = float(f[4], "lambda_bar")?;
    let want = log_eps(n);
    if !((log_e - want).abs() <= SCALAR_SLACK * want) {
        return Err(parse_err(no, format!("log_eps {log_e} does not match n={n}")));
    }
    let want_bar = 2.0 * want / -(-2.0 * want).exp_m1();
    if !((lam_bar - want_bar).abs() <= SCALAR_SLACK * want_bar) {
        return Err(parse_err(no, format!("lambda_bar {lam_bar} does not match n={n}")));
    }
    let mut components = Vec::new();
    if !f[5].is_empty() {
        for part in f[5].split('|') {
            components.push(parse_component(no, n, part)?);
        }
    }
    let e = SpectrumEntry::from_components(n, components);
    if e.m != m {
        return Err(parse_err(no, format!("m={m} but components sum to {}", e.m)));
    }
    Ok(SpectrumEntry { log_eps: log_e, lambda_bar: lam_bar, eps: log_e.exp(), ..e })
}

fn parse_component(no: usize, n: u64, part: &str) -> Result<Component> {
    let g: Vec<&str> = part.split(':').collect();
    if g.len() != 5 {
        return Err(parse_err(no, format!("component `{part}` needs u:D:j:h:lambda")));
    }
    let int =
        |s: &str| -> Result<u64> { s.parse().map_err(|_| parse_err(no, format!("bad integer `{s}` in `{part}`"))) };
    let (u, d, j, h) = (int(g[0])?, int(g[1])?, int(g[2])?, int(g[3])?);
    let lambda = parse_rational(g[4]).map_err(|msg| parse_err(no, msg))?;
    let v = n as u128 * n as u128 - 4;
    if u == 0 || j == 0 || h == 0 || (u as u128) * (u as u128) * (d as u128) != v {
        return Err(parse_err(no, format!("component `{part}` inconsistent with n={n}")));
    }
    Discriminant::new(d).map_err(|e| parse_err(no, e.to_string()))?;
    Ok(Component { u, d, j, h, lambda })
}

/// An integer, `p/q`, or a finite decimal such as `0.25`, as an exact
/// rational.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("bad rational `{s}`");
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['+', '-']);
        let digits = format!("{}{fp}", if ip.is_empty() { "0" } else { ip });
        let mut num = BigInt::from_str(&digits).map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), fp.len());
        return Ok(BigRational::new(num, den));
    }
    BigInt::from_str(s).map(BigRational::from_integer).map_err(|_| bad())
}

/// Parses a `D,lambda` weight table; `#` starts a comment and an optional
/// `D,lambda` header line is skipped.
pub fn parse_weight_table(text: &str) -> Result<BTreeMap<u64, BigRational>> {
    let mut out = BTreeMap::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !seen_data && line.eq_ignore_ascii_case("d,lambda") {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let (d, lam) =
            line.split_once(',').ok_or_else(|| parse_err(no, format!("expected `D,lambda`, got `{line}`")))?;
        let d: u64 = d.trim().parse().map_err(|_| parse_err(no, format!("bad discriminant `{}`", d.trim())))?;
        Discriminant::new(d).map_err(|e| parse_err(no, e.to_string()))?;
        let lam = parse_rational(lam).map_err(|m| parse_err(no, m))?;
        if lam.is_negative() {
            return Err(parse_err(no, format!("negative weight for D={d}")));
        }
        if out.insert(d, lam).is_some() {
            return Err(parse_err(no, format!("duplicate discriminant {d}")));
        }
    }
    Ok(out)
}

/// `unity`, `index:<k>` or `table:<path>`.
pub fn parse_weight_spec(spec: &str) -> Result<WeightMode> {
    if spec == "unity" {
        return Ok(WeightMode::Unity);
    }
    if let Some(k) = spec.strip_prefix("index:") {
        let k: u64 = k.parse().map_err(|_| Error::Domain(format!("bad index bound `{k}`")))?;
        return WeightMode::index_bound(k);
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        return WeightMode::table(path, parse_weight_table(&text)?);
    }
    Err(Error::Domain(format!("unknown weight `{spec}`; use unity, index:<k> or table:<path>")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_table;
    use num_traits::One;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for w in [WeightMode::Unity, WeightMode::index_bound(4).unwrap()] {
            let t = build_table(100.0, &w).unwrap();
            let text = render_cache(&t);
            assert_eq!(text.lines().count(), 2 + 97);
            let back = parse_cache(&text).unwrap();
            assert_eq!(back, t);
            assert_eq!(render_cache(&back), text);
        }
    }

    #[test]
    fn first_row_format() {
        let t = build_table(10.0, &WeightMode::Unity).unwrap();
        let text = render_cache(&t);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# selberg-spectrum v1 X=10 weight=unity"));
        assert_eq!(lines.next(), Some(HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("3,1,1,"));
        assert!(row.ends_with(",1:5:1:1:1"));
        let seven = text.lines().find(|l| l.starts_with("7,")).unwrap();
        assert!(seven.starts_with("7,5,2,"), "{seven}");
        assert!(seven.ends_with(",1:45:1:2:1|3:5:2:1:1"), "{seven}");
    }

    #[test]
    fn table_weights_round_trip() {
        let mut lam = BTreeMap::new();
        for n in 3u64..30 {
            let v = n * n - 4;
            let mut u = 1;
            while u * u <= v {
                if v % (u * u) == 0 {
                    if let Ok(d) = Discriminant::new(v / (u * u)) {
                        lam.insert(d.get(), rat(1 + (d.get() % 3) as i64, 2));
                    }
                }
                u += 1;
            }
        }
        let w = WeightMode::table("w.csv", lam).unwrap();
        let t = build_table(30.0, &w).unwrap();
        let text = render_cache(&t);
        let back = parse_cache(&text).unwrap();
        assert_eq!(render_cache(&back), text);
        assert_eq!(back.entries(), t.entries());
    }

    #[test]
    fn tampering_is_caught() {
        let t = build_table(40.0, &WeightMode::Unity).unwrap();
        let text = render_cache(&t);
        let bad_m = text.replacen("\n3,1,1,", "\n3,2,1,", 1);
        assert!(matches!(parse_cache(&bad_m), Err(Error::Parse { line: 3, .. })));
        let bad_h = text.replacen(",1:5:1:1:1", ",1:5:1:2:1", 1);
        assert!(parse_cache(&bad_h).is_err());
        let dropped: String = text.lines().filter(|l| !l.starts_with("17,")).map(|l| format!("{l}\n")).collect();
        assert!(parse_cache(&dropped).is_err());
        let short: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(parse_cache(&short).is_err());
        let bad_header = text.replacen("v1", "v2", 1);
        assert!(matches!(parse_cache(&bad_header), Err(Error::Parse { line: 1, .. })));
        let bad_weight = text.replacen("weight=unity", "weight=index:2", 1);
        assert!(parse_cache(&bad_weight).is_err());
        let row = text.lines().nth(5).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        let skewed = row.replacen(fields[3], "1.5e0", 1);
        assert!(parse_cache(&text.replacen(row, &skewed, 1)).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn weight_table_parsing() {
        let text = "# weights\nD,lambda\n5,1\n8, 1/2 # half\n\n12,0.75\n";
        let m = parse_weight_table(text).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[&5], BigRational::one());
        assert_eq!(m[&8], rat(1, 2));
        assert_eq!(m[&12], rat(3, 4));
        let err = parse_weight_table("5,1\n7,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_weight_table("5,1\n5,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_weight_table("5,1\n8,-1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_weight_table("5;1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn weight_specs() {
        assert_eq!(parse_weight_spec("unity").unwrap(), WeightMode::Unity);
        assert_eq!(parse_weight_spec("index:3").unwrap(), WeightMode::IndexBound(3));
        assert!(parse_weight_spec("index:0").is_err());
        assert!(parse_weight_spec("index:x").is_err());
        assert!(matches!(parse_weight_spec("table:/nonexistent/w.csv"), Err(Error::Io(_))));
        assert!(parse_weight_spec("quaternion").is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        fs::write(&p, "5,2\n12,1\n").unwrap();
        let w = parse_weight_spec(&format!("table:{}", p.display())).unwrap();
        assert_eq!(w.lambda(5).unwrap(), rat(2, 1));
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let t = build_table(50.0, &WeightMode::Unity).unwrap();
        write_cache(&p, &t).unwrap();
        assert_eq!(read_cache(&p).unwrap(), t);
        let t2 = build_table(20.0, &WeightMode::Unity).unwrap();
        write_cache(&p, &t2).unwrap();
        assert_eq!(read_cache(&p).unwrap(), t2);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

//! Reading polynomials, points and number lists from flags.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use stablekit::poly::parse_poly;
use stablekit::{Coefficient, Polynomial};
use std::path::Path;

/// A flag value naming a file, or the value itself.
pub fn file_or_inline(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

/// A polynomial in `z1, z2` as text or as polynomial JSON.
pub fn load_poly(arg: &str) -> Result<Polynomial> {
    let text = file_or_inline(arg)?;
    let text = text.trim();
    let p = if text.starts_with('{') { Polynomial::from_json_str(text) } else { Polynomial::parse2(text) };
    Ok(p?)
}

/// `"a,b"` with each entry a constant expression such as `-1`, `1/2` or `i`.
pub fn parse_center(arg: &str) -> Result<Vec<Coefficient>> {
    let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("center must have two entries, got `{arg}`");
    }
    parts
        .iter()
        .map(|s| {
            let c = parse_poly(s, &[]).map_err(|e| anyhow!("center entry `{s}`: {e}"))?;
            Ok(c.coeff(&[]))
        })
        .collect()
}

pub fn parse_list(arg: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| anyhow!("`{s}` is not a number")))
        .collect()
}

pub fn parse_pair(arg: &str, what: &str) -> Result<(f64, f64)> {
    match parse_list(arg)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => bail!("{what} must be two numbers `a,b`"),
    }
}

pub fn parse_complex(arg: &str) -> Result<Complex64> {
    let c = parse_poly(arg, &[]).map_err(|e| anyhow!("`{arg}`: {e}"))?;
    Ok(c.coeff(&[]).to_c64())
}

/// Points `x1,x2` one per line; a non-numeric first line is taken as a header.
pub fn load_points(arg: &str) -> Result<Vec<[f64; 2]>> {
    let text = file_or_inline(arg)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match vals {
            Ok(v) if v.len() == 2 => out.push([v[0], v[1]]),
            Err(_) if k == 0 => continue,
            _ => bail!("line {}: expected two numbers", k + 1),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_and_lists() {
        let c = parse_center("-1, 1/2").unwrap();
        assert_eq!(c, vec![Coefficient::int(-1), Coefficient::ratio(1, 2)]);
        assert!(parse_center("1").is_err());
        assert_eq!(parse_list("-1,0,1").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(parse_pair("1,2,3", "window").is_err());
        assert_eq!(parse_complex("(1+i)/2").unwrap(), Complex64::new(0.5, 0.5));
    }

    #[test]
    fn points_with_header() {
        let pts = load_points("x1,x2\n0.1,0.2\n-1e-3, 5").unwrap();
        assert_eq!(pts, vec![[0.1, 0.2], [-1e-3, 5.0]]);
        assert!(load_points("1,2\nfoo,3").is_err());
    }
}

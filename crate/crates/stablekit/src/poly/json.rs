use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use super::{Monomial, Polynomial};
use crate::coeff::{parse_rational, Coefficient, GaussRat};
use crate::error::{Error, Result};

/// Canonical JSON form of a polynomial.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    #[serde(deserialize_with = "string_or_number")]
    pub re: String,
    #[serde(deserialize_with = "string_or_number", default = "zero_string")]
    pub im: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approx: bool,
}

fn zero_string() -> String {
    "0".into()
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!("expected a number or string, got {other}"))),
    }
}

fn float_string(x: f64) -> String {
    format!("{x:.16e}")
}

impl Polynomial {
    pub fn to_json(&self) -> PolyJson {
        let terms = self
            .terms()
            .map(|(m, c)| match c {
                Coefficient::Exact(g) => TermJson { exp: m.0.clone(), re: g.re_string(), im: g.im_string(), approx: false },
                Coefficient::Approx(z) => {
                    TermJson { exp: m.0.clone(), re: float_string(z.re), im: float_string(z.im), approx: true }
                }
            })
            .collect();
        PolyJson { vars: self.vars().to_vec(), terms }
    }

    pub fn from_json(j: &PolyJson) -> Result<Polynomial> {
        if j.vars.is_empty() {
            return Err(Error::Invalid("polynomial needs at least one variable".into()));
        }
        if j.vars.iter().any(|v| v == "i" || v.is_empty()) {
            return Err(Error::Invalid("bad variable name".into()));
        }
        let mut p = Polynomial::zero(&j.vars);
        for (k, t) in j.terms.iter().enumerate() {
            if t.exp.len() != j.vars.len() {
                return Err(Error::VariableMismatch { expected: j.vars.len(), found: t.exp.len() });
            }
            if t.exp.iter().any(|&e| e > super::MAX_EXPONENT) {
                return Err(Error::Invalid(format!("term {k}: exponent too large")));
            }
            let c = if t.approx {
                let re: f64 = t.re.trim().parse().map_err(|_| Error::Invalid(format!("term {k}: bad float `{}`", t.re)))?;
                let im: f64 = t.im.trim().parse().map_err(|_| Error::Invalid(format!("term {k}: bad float `{}`", t.im)))?;
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Invalid(format!("term {k}: non-finite coefficient")));
                }
                Coefficient::Approx(Complex64::new(re, im))
            } else {
                let re = parse_rational(&t.re).ok_or_else(|| Error::Invalid(format!("term {k}: bad rational `{}`", t.re)))?;
                let im = parse_rational(&t.im).ok_or_else(|| Error::Invalid(format!("term {k}: bad rational `{}`", t.im)))?;
                Coefficient::Exact(GaussRat::new(re, im))
            };
            p.add_term(Monomial(t.exp.clone()), c);
        }
        Ok(p)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("polynomial JSON serialisation")
    }

    pub fn from_json_str(s: &str) -> Result<Polynomial> {
        let j: PolyJson = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
        Polynomial::from_json(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact() {
        let p = Polynomial::parse2("1/3 - 2*i*z1*z2 + (5 + i)*z2^3").unwrap();
        let s = p.to_json_string();
        assert_eq!(Polynomial::from_json_str(&s).unwrap(), p);
        assert!(s.contains("\"re\":\"1/3\""));
    }

    #[test]
    fn numbers_are_accepted_for_coefficients() {
        let s = r#"{"vars":["z1","z2"],"terms":[{"exp":[1,0],"re":2,"im":"0"},{"exp":[0,1],"re":"0.5"}]}"#;
        let p = Polynomial::from_json_str(s).unwrap();
        assert_eq!(p, Polynomial::parse2("2*z1 + 1/2*z2").unwrap());
    }

    #[test]
    fn rejects_malformed() {
        assert!(Polynomial::from_json_str(r#"{"vars":["z1"],"terms":[{"exp":[1,0],"re":"1","im":"0"}]}"#).is_err());
        assert!(Polynomial::from_json_str(r#"{"vars":["z1"],"terms":[{"exp":[1],"re":"x","im":"0"}]}"#).is_err());
        assert!(Polynomial::from_json_str(r#"{"vars":[],"terms":[]}"#).is_err());
    }
}

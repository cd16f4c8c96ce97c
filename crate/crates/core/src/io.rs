//! Series text format:
//! `{"dim": d, "cap": N, "terms": [{"exp": [..], "re": "p/q", "im": "p/q"}]}`.
//!
//! Zero coefficients and repeated exponents are rejected; errors carry the
//! line and column where serde_json stopped.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::ParseError;
use crate::gauss::{format_rational, parse_rational, GaussRational};
use crate::mseries::{Exponent, MultiSeries};

fn rational<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(de::Error::custom)
}

fn zero() -> BigRational {
    BigRational::zero()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    exp: Vec<u32>,
    #[serde(deserialize_with = "rational")]
    re: BigRational,
    #[serde(default = "zero", deserialize_with = "rational")]
    im: BigRational,
}

struct TermList(Vec<(Exponent, GaussRational)>);

impl<'de> Deserialize<'de> for TermList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = TermList;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of terms")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<TermList, A::Error> {
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                while let Some(t) = seq.next_element::<RawTerm>()? {
                    let e = Exponent(t.exp);
                    let c = GaussRational::new(t.re, t.im);
                    if c.is_zero() {
                        return Err(de::Error::custom(format!("zero coefficient at exponent {e}")));
                    }
                    if !seen.insert(e.clone()) {
                        return Err(de::Error::custom(format!("repeated exponent {e}")));
                    }
                    out.push((e, c));
                }
                Ok(TermList(out))
            }
        }
        d.deserialize_seq(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    dim: usize,
    cap: u32,
    terms: TermList,
}

pub fn read_series(text: &str) -> Result<MultiSeries, ParseError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| ParseError::Json {
        message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    for (e, _) in &doc.terms.0 {
        if e.dim() != doc.dim {
            return Err(ParseError::Document(format!(
                "exponent {e} has length {}, dim is {}",
                e.dim(),
                doc.dim
            )));
        }
        if e.degree() > doc.cap {
            return Err(ParseError::Document(format!("exponent {e} exceeds cap {}", doc.cap)));
        }
    }
    if doc.dim == 0 {
        return Err(ParseError::Document("dim must be positive".into()));
    }
    MultiSeries::from_terms(doc.dim, doc.cap, doc.terms.0).map_err(|e| ParseError::Document(e.to_string()))
}

pub fn series_to_value(s: &MultiSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(e, c)| json!({"exp": e.0, "re": format_rational(&c.re), "im": format_rational(&c.im)}))
        .collect();
    json!({"dim": s.dim(), "cap": s.cap(), "terms": terms})
}

pub fn write_series(s: &MultiSeries) -> String {
    serde_json::to_string_pretty(&series_to_value(s)).expect("json values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let text = r#"{"dim": 2, "cap": 5, "terms": [
            {"exp": [1, 0], "re": "3/6", "im": "-1/1"},
            {"exp": [0, 2], "re": "7", "im": "0"}]}"#;
        let s = read_series(text).unwrap();
        assert_eq!(
            s.coeff(&Exponent(vec![1, 0])),
            GaussRational::new(parse_rational("1/2").unwrap(), parse_rational("-1").unwrap())
        );
        let out = write_series(&s);
        assert!(out.contains("\"1/2\"") && out.contains("\"7/1\""));
        assert_eq!(read_series(&out).unwrap(), s);
        assert_eq!(write_series(&read_series(&out).unwrap()), out);
    }

    #[test]
    fn rejects_bad_documents() {
        let zero = r#"{"dim": 1, "cap": 3, "terms": [{"exp": [1], "re": "0/1", "im": "0/1"}]}"#;
        assert!(matches!(read_series(zero), Err(ParseError::Json { line: 1, .. })));
        let dup =
            "{\"dim\": 1, \"cap\": 3, \"terms\": [\n{\"exp\": [1], \"re\": \"1\"},\n{\"exp\": [1], \"re\": \"2\"}]}";
        match read_series(dup) {
            Err(ParseError::Json { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("repeated"));
            }
            other => panic!("{other:?}"),
        }
        let decimal = r#"{"dim": 1, "cap": 3, "terms": [{"exp": [1], "re": "0.5"}]}"#;
        assert!(read_series(decimal).is_err());
        let long = r#"{"dim": 1, "cap": 3, "terms": [{"exp": [1, 1], "re": "1"}]}"#;
        assert!(matches!(read_series(long), Err(ParseError::Document(_))));
        let high = r#"{"dim": 1, "cap": 3, "terms": [{"exp": [4], "re": "1"}]}"#;
        assert!(matches!(read_series(high), Err(ParseError::Document(_))));
        assert!(matches!(read_series("{\"dim\": 1,"), Err(ParseError::Json { .. })));
    }
}

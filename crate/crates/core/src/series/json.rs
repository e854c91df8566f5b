use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Series;
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

/// `{"p": int, "terms": [[exp, coeff], ...], "prec": int}` with strictly
/// increasing exponents. Rational coefficients that are not integers are
/// written as `"num/den"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub p: u64,
    pub terms: Vec<(i64, Value)>,
    pub prec: i64,
}

fn coeff_value(c: &FieldElement) -> Value {
    match c {
        FieldElement::Mod { value, .. } => Value::from(*value),
        FieldElement::Rational(_) => {
            let text = c.to_string();
            match text.parse::<i64>() {
                Ok(n) => Value::from(n),
                Err(_) => Value::from(text),
            }
        }
    }
}

fn value_coeff(v: &Value, field: Field) -> Result<FieldElement> {
    let bad = || Error::CoefficientOutOfRange(v.to_string());
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(field.int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(field.big(&BigInt::from(u)))
            } else {
                Err(bad())
            }
        }
        Value::String(s) => {
            let (num, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            field.ratio(&num, &den)
        }
        _ => Err(bad()),
    }
}

impl Series {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            p: self.characteristic(),
            terms: self.terms().map(|(e, c)| (e, coeff_value(c))).collect(),
            prec: self.prec,
        }
    }

    pub fn from_json(json: &SeriesJson) -> Result<Series> {
        let field = Field::new(json.p)?;
        if json.terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::syntax(0, "exponents must be strictly increasing"));
        }
        let terms = json
            .terms
            .iter()
            .map(|(e, v)| Ok((*e, value_coeff(v, field)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Series::new(field, terms, json.prec))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("series json")
    }

    pub fn from_json_str(text: &str) -> Result<Series> {
        let json: SeriesJson =
            serde_json::from_str(text).map_err(|e| Error::syntax(e.column(), e.to_string()))?;
        Series::from_json(&json)
    }
}

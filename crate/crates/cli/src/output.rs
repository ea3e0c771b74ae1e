//! Number formatting and the CSV/JSON emitters.

use std::io::Write;

use bellsim_core::ComplexMatrix;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Significant digits carried by every emitted number.
pub const SIG_DIGITS: usize = 12;

/// `x` with 12 significant digits: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// `x` rounded to 12 significant digits, for JSON.
pub fn round_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let v: f64 = fmt_num(x).parse().expect("formatted number parses");
    json!(v)
}

pub fn round_vec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| round_num(x)).collect())
}

/// Nested rows of `[re, im]` pairs.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|z| Value::Array(vec![round_num(z.re), round_num(z.im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// A finished artifact, ready for emission in either format.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Scalar results, emitted as `# result.key = value` in CSV.
    pub results: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn result(&mut self, key: &str, value: String) {
        self.results.push((key.to_string(), value));
    }

    pub fn to_csv(&self, provenance: &[(String, String)]) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        for (k, v) in provenance {
            writeln!(buf, "# {k} = {v}").expect("write to memory");
        }
        for (k, v) in &self.results {
            writeln!(buf, "# result.{k} = {v}").expect("write to memory");
        }
        let mut writer = csv::Writer::from_writer(buf);
        writer
            .write_record(&self.header)
            .and_then(|_| self.rows.iter().try_for_each(|r| writer.write_record(r)))
            .map_err(|e| CliError::internal(format!("csv encoding: {e}")))?;
        writer
            .into_inner()
            .map_err(|e| CliError::internal(format!("csv encoding: {e}")))
    }
}

pub fn provenance_json(provenance: &[(String, String)]) -> Value {
    let mut map = Map::new();
    for (k, v) in provenance {
        map.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(map)
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("values serialize");
    bytes.push(b'\n');
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_num(2.0 * std::f64::consts::SQRT_2), "2.82842712475");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-0.5), "-0.5");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1e-6), "1e-6");
        assert_eq!(fmt_num(2.5e-5), "0.000025");
        assert_eq!(fmt_num(2.8284271247461903e-6), "2.82842712475e-6");
        assert_eq!(fmt_num(1.2345e-9), "1.2345e-9");
        assert_eq!(fmt_num(1e15), "1e15");
        assert_eq!(fmt_num(-1e-20), "-1e-20");
        assert_eq!(fmt_num(1e-17 * 0.3), "3e-18");
    }

    #[test]
    fn rounding_keeps_values_close() {
        let x = 0.1 + 0.2;
        assert_eq!(round_num(x), json!(0.3));
    }

    #[test]
    fn csv_has_comments_then_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        t.result("max", "3".into());
        let text = String::from_utf8(t.to_csv(&[("state".into(), "cat".into())]).unwrap()).unwrap();
        assert_eq!(text, "# state = cat\n# result.max = 3\na,b\n1,2\n");
    }
}

//! JSON tableau files.
//!
//! ```json
//! {
//!   "name": "rkfd4",
//!   "kind": "rkfd",
//!   "c": [0, "4/11", "17/20"],
//!   "a_hat": [[0, 0, 0], ["-1/5", 0, 0], ["19/125", "19/125", 0]],
//!   "b": ["17/200", "-7/75", "1/20"],
//!   "bp": ["1/18", "209/1926", "5/1926"],
//!   "bpp": ["47/408", "847/2568", "100/1819"],
//!   "bppp": ["47/408", "1331/2568", "2000/5457"],
//!   "declared_order": 4
//! }
//! ```
//!
//! Numbers are JSON numbers or rational strings `"p/q"` (or `"p"`) with
//! `|p|, |q| ≤ 2^53`, so the quotient is correctly rounded. Surd-valued
//! coefficients go in as decimals. RK files use `"kind": "rk"` with an `"A"`
//! matrix and no `y'`..`y'''` rows. Unknown fields are rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RkCoefficients, RkTableau, RkfdCoefficients, RkfdTableau};
use crate::{Error, Result};

const MAX_EXACT_INT: i64 = 1 << 53;

/// Either kind of tableau a file can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum TableauFile {
    Rkfd(RkfdTableau),
    Rk(RkTableau),
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Rkfd,
    Rk,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Num {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    name: String,
    kind: Kind,
    c: Vec<Num>,
    b: Vec<Num>,
    a_hat: Option<Vec<Vec<Num>>>,
    bp: Option<Vec<Num>>,
    bpp: Option<Vec<Num>>,
    bppp: Option<Vec<Num>>,
    declared_order: Option<u32>,
    #[serde(rename = "A")]
    a: Option<Vec<Vec<Num>>>,
}

#[derive(Serialize)]
struct RkfdOut<'a> {
    name: &'a str,
    kind: Kind,
    c: &'a [f64],
    a_hat: &'a [Vec<f64>],
    b: &'a [f64],
    bp: &'a [f64],
    bpp: &'a [f64],
    bppp: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    declared_order: Option<u32>,
}

#[derive(Serialize)]
struct RkOut<'a> {
    name: &'a str,
    kind: Kind,
    c: &'a [f64],
    #[serde(rename = "A")]
    a: &'a [Vec<f64>],
    b: &'a [f64],
}

/// Parses a rational string `"p/q"` or integer string `"p"`.
fn parse_rational(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: i64 = num
        .parse()
        .map_err(|_| format!("'{text}' is not a rational of the form p/q"))?;
    let den: i64 = den
        .parse()
        .map_err(|_| format!("'{text}' is not a rational of the form p/q"))?;
    if den == 0 {
        return Err(format!("'{text}' has a zero denominator"));
    }
    if num.abs() > MAX_EXACT_INT || den.abs() > MAX_EXACT_INT {
        return Err(format!("'{text}': numerator and denominator must not exceed 2^53"));
    }
    Ok(num as f64 / den as f64)
}

struct Reader<'p> {
    path: &'p Path,
}

impl Reader<'_> {
    fn schema(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Schema {
            path: self.path.to_path_buf(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn num(&self, field: &str, n: &Num) -> Result<f64> {
        match n {
            Num::Number(v) => Ok(*v),
            Num::Text(t) => parse_rational(t).map_err(|m| self.schema(field, m)),
        }
    }

    fn row(&self, field: &str, row: &[Num]) -> Result<Vec<f64>> {
        row.iter()
            .enumerate()
            .map(|(i, n)| self.num(&format!("{field}[{i}]"), n))
            .collect()
    }

    fn matrix(&self, field: &str, m: &[Vec<Num>]) -> Result<Vec<Vec<f64>>> {
        m.iter()
            .enumerate()
            .map(|(i, r)| self.row(&format!("{field}[{i}]"), r))
            .collect()
    }

    fn required<'a, T>(&self, field: &str, v: &'a Option<T>) -> Result<&'a T> {
        v.as_ref()
            .ok_or_else(|| self.schema(field, "required for kind \"rkfd\""))
    }
}

/// Parses tableau JSON. `path` is used only for diagnostics.
pub fn parse_tableau(text: &str, path: &Path) -> Result<TableauFile> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let rd = Reader { path };
    let c = rd.row("c", &raw.c)?;
    let b = rd.row("b", &raw.b)?;

    match raw.kind {
        Kind::Rkfd => {
            if raw.a.is_some() {
                return Err(rd.schema("A", "not allowed for kind \"rkfd\""));
            }
            let coeffs = RkfdCoefficients {
                name: raw.name,
                c,
                a_hat: rd.matrix("a_hat", rd.required("a_hat", &raw.a_hat)?)?,
                b,
                bp: rd.row("bp", rd.required("bp", &raw.bp)?)?,
                bpp: rd.row("bpp", rd.required("bpp", &raw.bpp)?)?,
                bppp: rd.row("bppp", rd.required("bppp", &raw.bppp)?)?,
                declared_order: raw.declared_order,
            };
            Ok(TableauFile::Rkfd(RkfdTableau::new(coeffs)?))
        }
        Kind::Rk => {
            for (field, present) in [
                ("a_hat", raw.a_hat.is_some()),
                ("bp", raw.bp.is_some()),
                ("bpp", raw.bpp.is_some()),
                ("bppp", raw.bppp.is_some()),
                ("declared_order", raw.declared_order.is_some()),
            ] {
                if present {
                    return Err(rd.schema(field, "not allowed for kind \"rk\""));
                }
            }
            let a = raw
                .a
                .as_ref()
                .ok_or_else(|| rd.schema("A", "required for kind \"rk\""))?;
            let coeffs = RkCoefficients {
                name: raw.name,
                a: rd.matrix("A", a)?,
                b,
                c,
            };
            Ok(TableauFile::Rk(RkTableau::new(coeffs)?))
        }
    }
}

/// Loads a tableau file of either kind.
pub fn load_tableau_file(path: impl AsRef<Path>) -> Result<TableauFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_tableau(&text, path)
}

/// Loads an RKFD tableau file; an RK file is a schema error here.
pub fn load_tableau(path: impl AsRef<Path>) -> Result<RkfdTableau> {
    let path = path.as_ref();
    match load_tableau_file(path)? {
        TableauFile::Rkfd(t) => Ok(t),
        TableauFile::Rk(_) => Err(Error::Schema {
            path: path.to_path_buf(),
            field: "kind".into(),
            message: "expected an RKFD tableau, found kind \"rk\"".into(),
        }),
    }
}

fn write_json(path: &Path, json: String) -> Result<()> {
    fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_tableau(tableau: &RkfdTableau, path: impl AsRef<Path>) -> Result<()> {
    let out = RkfdOut {
        name: tableau.name(),
        kind: Kind::Rkfd,
        c: tableau.c(),
        a_hat: tableau.a_hat(),
        b: tableau.b(),
        bp: tableau.bp(),
        bpp: tableau.bpp(),
        bppp: tableau.bppp(),
        declared_order: tableau.declared_order(),
    };
    let json = serde_json::to_string_pretty(&out).expect("tableau serializes");
    write_json(path.as_ref(), json)
}

pub fn save_rk_tableau(tableau: &RkTableau, path: impl AsRef<Path>) -> Result<()> {
    let out = RkOut {
        name: tableau.name(),
        kind: Kind::Rk,
        c: tableau.c(),
        a: tableau.a(),
        b: tableau.b(),
    };
    let json = serde_json::to_string_pretty(&out).expect("tableau serializes");
    write_json(path.as_ref(), json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableaux::{builtin_rk4, builtin_rkfd4_corrected, builtin_rkfd5};

    fn parse(text: &str) -> Result<TableauFile> {
        parse_tableau(text, Path::new("test.json"))
    }

    const RKFD4_JSON: &str = r#"{
        "name": "rkfd4",
        "kind": "rkfd",
        "c": [0, "4/11", "17/20"],
        "a_hat": [[0, 0, 0], ["-1/5", 0, 0], ["19/125", "19/125", 0]],
        "b": ["17/200", "-7/75", "1/20"],
        "bp": ["1/18", "209/1926", "5/1926"],
        "bpp": ["47/408", "847/2568", "100/1819"],
        "bppp": ["47/408", "1331/2568", "2000/5457"],
        "declared_order": 4
    }"#;

    #[test]
    fn rational_strings_match_builtin() {
        match parse(RKFD4_JSON).unwrap() {
            TableauFile::Rkfd(t) => assert_eq!(t, builtin_rkfd4_corrected()),
            TableauFile::Rk(_) => panic!("wrong kind"),
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("209/1926").unwrap(), 209.0 / 1926.0);
        assert_eq!(parse_rational("-1/5").unwrap(), -0.2);
        assert_eq!(parse_rational("+3").unwrap(), 3.0);
        assert_eq!(parse_rational(" 7 / 2 ").unwrap(), 3.5);
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/x").is_err());
        assert!(parse_rational("9007199254740993/1").is_err());
    }

    #[test]
    fn short_row_is_dimension_error() {
        let text = RKFD4_JSON.replace(r#""b": ["17/200", "-7/75", "1/20"]"#, r#""b": ["17/200", "-7/75"]"#);
        match parse(&text) {
            Err(Error::Dimension { field, expected: 3, found: 2 }) => assert_eq!(field, "b"),
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        let text = RKFD4_JSON.replace(r#""kind": "rkfd","#, r#""kind": "rkfd", "order": 4,"#);
        assert!(matches!(parse(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\n  \"name\": \"x\",\n  \"kind\": \"rkfd\",\n  \"c\": [0,,1]\n}";
        match parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_rational_names_field() {
        let text = RKFD4_JSON.replace("209/1926", "209/x");
        match parse(&text) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "bp[1]"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_rkfd_row_rejected() {
        let text = RKFD4_JSON.replace(r#""bpp": ["47/408", "847/2568", "100/1819"],"#, "");
        match parse(&text) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "bpp"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn rk_file_parses() {
        let text = r#"{"name": "heun", "kind": "rk", "c": [0, 1], "A": [[0, 0], [1, 0]], "b": ["1/2", "1/2"]}"#;
        match parse(text).unwrap() {
            TableauFile::Rk(t) => {
                assert_eq!(t.stages(), 2);
                assert_eq!(t.b(), &[0.5, 0.5]);
            }
            TableauFile::Rkfd(_) => panic!("wrong kind"),
        }
        let with_bp = r#"{"name": "h", "kind": "rk", "c": [0], "A": [[0]], "b": [1], "bp": [1]}"#;
        assert!(matches!(parse(with_bp), Err(Error::Schema { .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rkfd5.json");
        save_tableau(&builtin_rkfd5(), &path).unwrap();
        assert_eq!(load_tableau(&path).unwrap(), builtin_rkfd5());

        let path = dir.path().join("rk4.json");
        save_rk_tableau(&builtin_rk4(), &path).unwrap();
        assert_eq!(load_tableau_file(&path).unwrap(), TableauFile::Rk(builtin_rk4()));
        assert!(matches!(load_tableau(&path), Err(Error::Schema { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_tableau("/nonexistent/t.json"), Err(Error::Io { .. })));
    }
}

//! Plain-text artifacts: CSV tables with `#` header lines and JSON
//! documents. Every float is written with 17 significant digits so values
//! survive a write/read cycle bit for bit.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::params::ProblemParams;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "nan" | "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse()
            .map_err(|_| Error::Parse(format!("'{t}' is not a number"))),
    }
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-digit floats. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

/// Header block: one `# key: value` line per entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header {
    pub entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        let value: String = value.into();
        // header values live on a single line
        self.entries.push((key.to_string(), value.replace('\n', " ")));
    }

    /// Adds `value` as a JSON document under `key`.
    pub fn with_json<T: Serialize + ?Sized>(mut self, key: &str, value: &T) -> Result<Self> {
        self.push(key, to_json(value)?);
        Ok(self)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    fn parse_line(&mut self, line: &str) {
        let body = line.trim_start_matches('#').trim();
        if let Some((k, v)) = body.split_once(':') {
            self.entries.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
}

/// A CSV table with a header block, a column-name row and numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Header, columns: &[&str]) -> Self {
        Self {
            header,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push_row(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.header.render().as_bytes())?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table is UTF-8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut header = Header::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t.starts_with('#') {
                header.parse_line(t);
            } else if columns.is_none() {
                columns = Some(t.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>());
            } else {
                rows.push(t.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>());
            }
        }
        let columns = columns.ok_or_else(|| Error::Parse("table has no column row".into()))?;
        if let Some(bad) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                bad + 1,
                rows[bad].len(),
                columns.len()
            )));
        }
        Ok(Self { header, columns, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
    }

    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| parse_f64(&r[i])).collect()
    }
}

/// Profile as `eta,psi` rows; the parameters travel in the header under
/// `params` and are required by [`read_profile_csv`].
pub fn profile_table(profile: &Profile, extra: Header) -> Result<Table> {
    let mut header = extra.with_json("params", &profile.params)?;
    header.push("n_points", profile.n_points().to_string());
    if let Some(tol) = profile.mean_tolerance {
        header.push("mean_tolerance", fmt_f64(tol));
    }
    let mut t = Table::new(header, &["eta", "psi"]);
    for (eta, psi) in profile.grid().into_iter().zip(&profile.values) {
        t.push_numbers(&[eta, *psi]);
    }
    Ok(t)
}

pub fn write_profile_csv<W: Write>(profile: &Profile, extra: Header, w: W) -> Result<()> {
    profile_table(profile, extra)?.write_to(w)
}

pub fn read_profile_csv<R: BufRead>(r: R) -> Result<Profile> {
    let table = Table::read_from(r)?;
    let params: ProblemParams = match table.header.get("params") {
        Some(json) => from_json(json)?,
        None => return Err(Error::Parse("profile header lacks 'params'".into())),
    };
    params.validate()?;
    let values = table.numeric_column("psi")?;
    let mut p = Profile::new(values, params)?;
    if let Some(tol) = table.header.get("mean_tolerance") {
        p = p.with_mean_tolerance(parse_f64(tol)?);
    }
    Ok(p)
}

/// Spectrum rows `re,im`.
pub fn spectrum_table(spectrum: &[Complex64], header: Header) -> Table {
    let mut t = Table::new(header, &["re", "im"]);
    for z in spectrum {
        t.push_numbers(&[z.re, z.im]);
    }
    t
}

//! File formats: JSON for structured objects, CSV for matrices and signals.
//! Every float is written with 17 significant digits so output is
//! byte-stable and round-trips exactly.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::HankelBlockMatrix;
use crate::ioeq::{AffineIoEquation, Monomial, PPoly, Var};
use crate::markov::MarkovTable;
use crate::model::{AlpvSystem, GeneralizedInputSeq};
use crate::numlin::{Matrix, Vector};
use crate::switched::SwitchedInput;
use crate::words::Word;

pub const SCHEMA: &str = "alpv-1";

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_num(value).as_bytes())
    }
}

/// Compact JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .expect("serializing plain data into memory cannot fail");
    out.push(b'\n');
    out
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// `value` with a leading `"schema": "alpv-1"` field.
pub fn to_tagged_json<T: Serialize>(value: &T) -> Vec<u8> {
    to_json(&Tagged {
        schema: SCHEMA,
        body: value,
    })
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse {
        what: what.to_string(),
        msg: e.to_string(),
    }
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], shape: (usize, usize), what: &str) -> Result<Matrix> {
    if rows.len() != shape.0 {
        return Err(Error::dims(format!("rows of {what}"), shape.0, rows.len()));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != shape.1) {
        return Err(Error::dims(format!("columns of {what}"), shape.1, r.len()));
    }
    Ok(Matrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(rename = "D")]
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Vec<f64>>>,
}

impl SystemFile {
    pub fn from_system(sys: &AlpvSystem) -> Self {
        SystemFile {
            schema: Some(SCHEMA.to_string()),
            d: sys.sched_dim(),
            n: sys.state_dim(),
            m: sys.input_dim(),
            p: sys.output_dim(),
            a: sys.a().iter().map(rows_of).collect(),
            b: sys.b().iter().map(rows_of).collect(),
            c: sys.c().iter().map(rows_of).collect(),
        }
    }

    pub fn into_system(self) -> Result<AlpvSystem> {
        let (d, n, m, p) = (self.d, self.n, self.m, self.p);
        if d == 0 {
            return Err(Error::InvalidAlphabet);
        }
        let family = |mats: &[Vec<Vec<f64>>], name: &str, shape| -> Result<Vec<Matrix>> {
            if mats.len() != d {
                return Err(Error::dims(format!("number of {name} matrices"), d, mats.len()));
            }
            mats.iter()
                .enumerate()
                .map(|(q, rows)| matrix_from_rows(rows, shape, &format!("{name}_{}", q + 1)))
                .collect()
        };
        let a = family(&self.a, "A", (n, n))?;
        let b = family(&self.b, "B", (n, m))?;
        let c = family(&self.c, "C", (p, n))?;
        AlpvSystem::new(d, n, m, p, a, b, c)
    }
}

pub fn system_to_json(sys: &AlpvSystem) -> Vec<u8> {
    to_json(&SystemFile::from_system(sys))
}

pub fn system_from_json(text: &str) -> Result<AlpvSystem> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| parse_err("system file", e))?;
    file.into_system()
}

#[derive(Debug, Serialize, Deserialize)]
struct TableEntry {
    word: String,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(rename = "D")]
    d: usize,
    m: usize,
    p: usize,
    horizon: usize,
    entries: Vec<TableEntry>,
}

pub fn table_to_json(table: &MarkovTable) -> Vec<u8> {
    to_json(&TableFile {
        schema: Some(SCHEMA.to_string()),
        d: table.sched_dim(),
        m: table.input_dim(),
        p: table.output_dim(),
        horizon: table.horizon(),
        entries: table
            .iter()
            .map(|(w, s)| TableEntry {
                word: w.to_string(),
                s: rows_of(s),
            })
            .collect(),
    })
}

pub fn table_from_json(text: &str) -> Result<MarkovTable> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| parse_err("Markov table", e))?;
    if file.d == 0 {
        return Err(Error::InvalidAlphabet);
    }
    let entries = file
        .entries
        .iter()
        .map(|e| {
            let w = Word::parse(&e.word, file.d)?;
            let s = matrix_from_rows(&e.s, (file.p, file.m), &format!("S({})", e.word))?;
            Ok((w, s))
        })
        .collect::<Result<Vec<_>>>()?;
    MarkovTable::from_entries(file.d, file.m, file.p, file.horizon, entries)
}

/// True when the JSON object looks like a Markov table rather than a system.
pub fn is_table_json(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("entries").map(|_| ()))
        .is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HankelSidecar {
    #[serde(rename = "L")]
    pub row_len: usize,
    #[serde(rename = "M")]
    pub col_len: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub m: usize,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

pub fn hankel_sidecar(h: &HankelBlockMatrix, rank: Option<usize>) -> HankelSidecar {
    HankelSidecar {
        row_len: h.row_len(),
        col_len: h.col_len(),
        d: h.sched_dim(),
        m: h.input_dim(),
        p: h.output_dim(),
        rank,
    }
}

pub fn sidecar_from_json(text: &str) -> Result<HankelSidecar> {
    serde_json::from_str(text).map_err(|e| parse_err("Hankel sidecar", e))
}

/// Plain dense CSV, no header.
pub fn matrix_to_csv(m: &Matrix) -> Vec<u8> {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err("matrix CSV", e))?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>().map_err(|e| parse_err("matrix CSV cell", e)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    matrix_from_rows(&rows, (rows.len(), cols), "matrix CSV")
}

pub fn hankel_from_parts(text_csv: &str, sidecar: &HankelSidecar) -> Result<HankelBlockMatrix> {
    let data = matrix_from_csv(text_csv)?;
    HankelBlockMatrix::from_parts(sidecar.row_len, sidecar.col_len, sidecar.d, sidecar.m, sidecar.p, data)
}

fn numeric_table(text: &str, what: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(what, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| parse_err(what, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn expect_header(header: &[String], want: &[String], what: &str) -> Result<()> {
    if header != want {
        return Err(Error::Parse {
            what: what.to_string(),
            msg: format!("header must be {:?}, got {:?}", want.join(","), header.join(",")),
        });
    }
    Ok(())
}

fn names(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |k| format!("{prefix}_{k}"))
}

fn parse_cell(cell: &str, row: usize, what: &str) -> Result<f64> {
    cell.parse::<f64>()
        .map_err(|e| parse_err(&format!("{what} row {row}"), e))
}

/// Signal CSV: header `p_1..p_D,u_1..u_m`, one row per time step.
pub fn signal_from_csv(text: &str, d: usize, m: usize) -> Result<GeneralizedInputSeq> {
    let (header, rows) = numeric_table(text, "signal CSV")?;
    let want: Vec<String> = names("p", d).chain(names("u", m)).collect();
    expect_header(&header, &want, "signal CSV")?;
    let steps = rows
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let vals = row
                .iter()
                .map(|c| parse_cell(c, t + 1, "signal CSV"))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != d + m {
                return Err(Error::dims(format!("signal CSV row {}", t + 1), d + m, vals.len()));
            }
            Ok((
                Vector::from_column_slice(&vals[..d]),
                Vector::from_column_slice(&vals[d..]),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralizedInputSeq::new(d, m, steps)
}

pub fn signal_to_csv(w: &GeneralizedInputSeq) -> Vec<u8> {
    let mut out: Vec<String> = vec![names("p", w.sched_dim())
        .chain(names("u", w.input_dim()))
        .collect::<Vec<_>>()
        .join(",")];
    for t in 0..w.len() {
        let cells: Vec<String> = w
            .sched(t)
            .iter()
            .chain(w.input(t).iter())
            .map(|&x| fmt_num(x))
            .collect();
        out.push(cells.join(","));
    }
    (out.join("\n") + "\n").into_bytes()
}

/// Switched input CSV: header `mode,u_1..u_m`.
pub fn switched_from_csv(text: &str, d: usize, m: usize) -> Result<SwitchedInput> {
    let (header, rows) = numeric_table(text, "switched input CSV")?;
    let want: Vec<String> = std::iter::once("mode".to_string()).chain(names("u", m)).collect();
    expect_header(&header, &want, "switched input CSV")?;
    let mut modes = Vec::with_capacity(rows.len());
    let mut inputs = Vec::with_capacity(rows.len());
    for (t, row) in rows.iter().enumerate() {
        if row.len() != m + 1 {
            return Err(Error::dims(format!("switched input CSV row {}", t + 1), m + 1, row.len()));
        }
        let mode = row[0].parse::<usize>().map_err(|e| parse_err("mode", e))?;
        modes.push(mode);
        let u = row[1..]
            .iter()
            .map(|c| parse_cell(c, t + 1, "switched input CSV"))
            .collect::<Result<Vec<f64>>>()?;
        inputs.push(Vector::from_vec(u));
    }
    SwitchedInput::new(Word::new(modes, d)?, inputs)
}

/// Output CSV: header `t,y_1..y_p`.
pub fn outputs_to_csv(outputs: &[Vector]) -> Vec<u8> {
    let p = outputs.first().map(|y| y.len()).unwrap_or(0);
    let mut lines = vec![std::iter::once("t".to_string())
        .chain(names("y", p))
        .collect::<Vec<_>>()
        .join(",")];
    for (t, y) in outputs.iter().enumerate() {
        let cells: Vec<String> = std::iter::once(t.to_string())
            .chain(y.iter().map(|&x| fmt_num(x)))
            .collect();
        lines.push(cells.join(","));
    }
    (lines.join("\n") + "\n").into_bytes()
}

#[derive(Debug, Serialize, Deserialize)]
struct TermFile {
    coeff: f64,
    #[serde(default)]
    exps: BTreeMap<String, u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EquationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    n: usize,
    m: usize,
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "Q")]
    q: Vec<Vec<TermFile>>,
    #[serde(rename = "L")]
    l: Vec<Vec<Vec<TermFile>>>,
}

fn poly_from_file(terms: &[TermFile]) -> Result<PPoly> {
    let mut poly = PPoly::zero();
    for t in terms {
        let exps = t
            .exps
            .iter()
            .map(|(k, &e)| Ok((Var::parse(k)?, e)))
            .collect::<Result<Monomial>>()?;
        poly.add_term(t.coeff, exps);
    }
    Ok(poly)
}

fn poly_to_file(poly: &PPoly) -> Vec<TermFile> {
    poly.terms()
        .map(|(mono, coeff)| TermFile {
            coeff,
            exps: mono.iter().map(|(v, &e)| (v.to_string(), e)).collect(),
        })
        .collect()
}

pub fn equation_from_json(text: &str) -> Result<AffineIoEquation> {
    let file: EquationFile = serde_json::from_str(text).map_err(|e| parse_err("equation file", e))?;
    let q = file.q.iter().map(|p| poly_from_file(p)).collect::<Result<Vec<_>>>()?;
    let l = file
        .l
        .iter()
        .map(|row| row.iter().map(|p| poly_from_file(p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    AffineIoEquation::new(file.n, file.m, file.d, q, l)
}

pub fn equation_to_json(eq: &AffineIoEquation) -> Vec<u8> {
    to_json(&EquationFile {
        schema: Some(SCHEMA.to_string()),
        n: eq.order(),
        m: eq.input_dim(),
        d: eq.sched_dim(),
        q: eq.q().iter().map(poly_to_file).collect(),
        l: eq
            .l()
            .iter()
            .map(|row| row.iter().map(poly_to_file).collect())
            .collect(),
    })
}

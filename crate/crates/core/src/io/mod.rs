//! JSON and CSV persistence.
//!
//! Every real is written with 17 significant digits, so values survive a
//! write/read cycle bit for bit and re-writing a loaded file reproduces it
//! byte for byte. Loading re-validates: packings are rebuilt disc by disc and
//! their stored residual compared with the recomputed one.

pub mod real17;

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{AnnihilatingMeasure, Atom, MeasureError};
use crate::packing::{Packing, PackingError, StopRule};
use crate::scalar::Scalar;
use crate::verify::VerificationReport;

/// Allowed gap between a stored and a recomputed residual area, times pi.
pub const LEDGER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{origin}: {source}")]
    Io {
        origin: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: malformed JSON at line {line}, column {column}: {message}")]
    Malformed {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: field `{field}`: {message}")]
    Schema {
        origin: String,
        field: String,
        message: String,
    },
    #[error("{origin}: invalid packing: {source}")]
    Invariant {
        origin: String,
        #[source]
        source: PackingError,
    },
    #[error("{origin}: inconsistent measure: {source}")]
    MeasureConsistency {
        origin: String,
        #[source]
        source: MeasureError,
    },
    #[error("{origin}: CSV: {message}")]
    Csv { origin: String, message: String },
}

fn origin_of(path: &Path) -> String {
    path.display().to_string()
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        origin: origin_of(path),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Io {
        origin: origin_of(path),
        source,
    })
}

/// Parses `text`, separating syntax errors from schema errors and naming
/// the offending field path for the latter.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => IoError::Malformed {
                origin: origin.to_string(),
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
            _ => IoError::Schema {
                origin: origin.to_string(),
                field,
                message: inner.to_string(),
            },
        }
    })?;
    Ok(value)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports contain only finite reals");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    parse_json(&read_file(path)?, &origin_of(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_file(path, &to_json(value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscRecord {
    #[serde(with = "real17")]
    re: f64,
    #[serde(with = "real17")]
    im: f64,
    #[serde(with = "real17")]
    r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum StopRecord {
    MaxDiscs(usize),
    TargetResidual(#[serde(with = "real17")] f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PackingFile {
    #[serde(with = "real17")]
    shrink: f64,
    #[serde(with = "real17")]
    tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<StopRecord>,
    discs: Vec<DiscRecord>,
    #[serde(with = "real17")]
    residual_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    #[serde(with = "real17")]
    re: f64,
    #[serde(with = "real17")]
    im: f64,
    #[serde(with = "real17")]
    weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    atoms: Vec<AtomRecord>,
    #[serde(with = "real17")]
    residual_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportFile {
    reports: Vec<VerificationReport>,
}

pub fn packing_to_json<T: Scalar>(packing: &Packing<T>) -> String {
    let file = PackingFile {
        shrink: packing.shrink().as_f64(),
        tolerance: packing.tolerance().as_f64(),
        stop: packing.stop_rule().map(|s| match s {
            StopRule::MaxDiscs(n) => StopRecord::MaxDiscs(n),
            StopRule::TargetResidual(r) => StopRecord::TargetResidual(r.as_f64()),
        }),
        discs: packing
            .discs()
            .iter()
            .map(|d| DiscRecord {
                re: d.center().re.as_f64(),
                im: d.center().im.as_f64(),
                r: d.radius().as_f64(),
            })
            .collect(),
        residual_area: packing.residual_area().as_f64(),
    };
    to_json(&file)
}

pub fn packing_from_json<T: Scalar>(text: &str, origin: &str) -> Result<Packing<T>, IoError> {
    let file: PackingFile = parse_json(text, origin)?;
    let invariant = |source| IoError::Invariant {
        origin: origin.to_string(),
        source,
    };
    let mut packing = Packing::from_discs(
        T::lit(file.shrink),
        T::lit(file.tolerance),
        file.discs
            .iter()
            .map(|d| (Complex::new(T::lit(d.re), T::lit(d.im)), T::lit(d.r))),
    )
    .map_err(invariant)?;
    let computed = packing.residual_area().as_f64();
    if !((file.residual_area - computed).abs() <= LEDGER_TOLERANCE * std::f64::consts::PI) {
        return Err(invariant(PackingError::LedgerMismatch {
            stored: file.residual_area,
            computed,
        }));
    }
    if let Some(stop) = file.stop {
        packing.set_stop_rule(match stop {
            StopRecord::MaxDiscs(n) => StopRule::MaxDiscs(n),
            StopRecord::TargetResidual(r) => StopRule::TargetResidual(T::lit(r)),
        });
    }
    Ok(packing)
}

pub fn save_packing<T: Scalar>(path: &Path, packing: &Packing<T>) -> Result<(), IoError> {
    write_file(path, &packing_to_json(packing))
}

pub fn load_packing<T: Scalar>(path: &Path) -> Result<Packing<T>, IoError> {
    packing_from_json(&read_file(path)?, &origin_of(path))
}

pub fn measure_to_json<T: Scalar>(measure: &AnnihilatingMeasure<T>) -> String {
    let file = MeasureFile {
        atoms: measure
            .atoms()
            .iter()
            .map(|a| AtomRecord {
                re: a.point.re.as_f64(),
                im: a.point.im.as_f64(),
                weight: a.weight.as_f64(),
            })
            .collect(),
        residual_area: measure.residual_area().as_f64(),
    };
    to_json(&file)
}

/// Structural validation only; see [`AnnihilatingMeasure::from_atoms`].
pub fn measure_from_json<T: Scalar>(text: &str, origin: &str) -> Result<AnnihilatingMeasure<T>, IoError> {
    let file: MeasureFile = parse_json(text, origin)?;
    let atoms = file
        .atoms
        .iter()
        .map(|a| Atom {
            point: Complex::new(T::lit(a.re), T::lit(a.im)),
            weight: T::lit(a.weight),
        })
        .collect();
    AnnihilatingMeasure::from_atoms(atoms, T::lit(file.residual_area)).map_err(|source| {
        IoError::MeasureConsistency {
            origin: origin.to_string(),
            source,
        }
    })
}

pub fn save_measure<T: Scalar>(path: &Path, measure: &AnnihilatingMeasure<T>) -> Result<(), IoError> {
    write_file(path, &measure_to_json(measure))
}

pub fn load_measure<T: Scalar>(path: &Path) -> Result<AnnihilatingMeasure<T>, IoError> {
    measure_from_json(&read_file(path)?, &origin_of(path))
}

/// Loads a measure and requires it to be exactly the measure of `packing`.
pub fn load_measure_for<T: Scalar>(
    path: &Path,
    packing: &Packing<T>,
) -> Result<AnnihilatingMeasure<T>, IoError> {
    let measure = load_measure(path)?;
    measure
        .check_against(packing)
        .map_err(|source| IoError::MeasureConsistency {
            origin: origin_of(path),
            source,
        })?;
    Ok(measure)
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    to_json(&ReportFile {
        reports: reports.to_vec(),
    })
}

pub fn reports_from_json(text: &str, origin: &str) -> Result<Vec<VerificationReport>, IoError> {
    Ok(parse_json::<ReportFile>(text, origin)?.reports)
}

fn csv_error(origin: &str) -> impl Fn(csv::Error) -> IoError + '_ {
    move |e| IoError::Csv {
        origin: origin.to_string(),
        message: e.to_string(),
    }
}

fn csv_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `n, re, im, weight`; row 0 is the atom at the origin.
pub fn measure_to_csv<T: Scalar>(measure: &AnnihilatingMeasure<T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "re", "im", "weight"]).expect("in-memory write");
    for (n, a) in measure.atoms().iter().enumerate() {
        w.write_record([
            n.to_string(),
            csv_real(a.point.re.as_f64()),
            csv_real(a.point.im.as_f64()),
            csv_real(a.weight.as_f64()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn write_measure_csv<T: Scalar>(path: &Path, measure: &AnnihilatingMeasure<T>) -> Result<(), IoError> {
    write_file(path, &measure_to_csv(measure))
}

/// Columns `identity, truncation, deviation, bound, ratio, pass`.
pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["identity", "truncation", "deviation", "bound", "ratio", "pass"])
        .expect("in-memory write");
    for r in reports {
        w.write_record([
            r.identity.label(),
            r.truncation.to_string(),
            csv_real(r.deviation),
            csv_real(r.bound),
            csv_real(r.ratio()),
            r.pass.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 labels")
}

pub fn write_reports_csv(path: &Path, reports: &[VerificationReport]) -> Result<(), IoError> {
    write_file(path, &reports_to_csv(reports))
}

#[derive(Debug, Deserialize)]
struct PointRow {
    re: f64,
    im: f64,
}

/// Reads points from CSV text with a header containing `re` and `im`.
pub fn points_from_csv(text: &str, origin: &str) -> Result<Vec<Complex<f64>>, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize::<PointRow>() {
        let row = row.map_err(csv_error(origin))?;
        out.push(Complex::new(row.re, row.im));
    }
    Ok(out)
}

pub fn read_points_csv(path: &Path) -> Result<Vec<Complex<f64>>, IoError> {
    points_from_csv(&read_file(path)?, &origin_of(path))
}

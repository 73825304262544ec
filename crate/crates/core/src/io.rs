//! File formats.
//!
//! Channel files are JSON:
//!
//! ```json
//! {
//!   "name": "optional label",
//!   "dim": 2,
//!   "kraus": [ [[[re, im], [re, im]], [[re, im], [re, im]]], ... ],
//!   "randomization": { "type": "haar" },
//!   "exact_kraus": [ [[["re", "im"], ...], ...], ... ]
//! }
//! ```
//!
//! `kraus` lists the operators `v_i` row by row. `randomization` is one of
//! `{"type": "haar"}`, `{"type": "dirac", "unitary": M}`,
//! `{"type": "mixture", "weights": [...], "unitaries": [M, ...]}` or
//! `{"type": "convex", "haar_weight": w, "weights": [...], "unitaries": [...]}`,
//! and defaults to Haar. `exact_kraus` is an optional rational form (entries
//! such as `"7/2"` or `"0.25"`) used by the certificate; any common nonzero
//! rescaling of the operators is allowed there. Without it, the binary values
//! of `kraus` are used exactly.
//!
//! Density files are `{"dim": d, "matrix": M}` or `{"dim": d, "diag": [...]}`.
//! CSV floats carry 17 significant digits. Lines starting with `#` are
//! comments; the CLI uses one to record its configuration.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exact::{ExactMatrix, GaussianRational as Q};
use crate::linalg::{c, ComplexMatrix, ComplexVector, C64};
use crate::measure::EmpiricalMeasure;
use crate::randomization::{FiniteMixture, RandomizationSpec};
use crate::state::{canonicalize, ProjectiveState};
use crate::trajectory::ChainRun;

/// Rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;
/// Rows of `["re", "im"]` rational strings.
pub type ExactMatrixJson = Vec<Vec<[String; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RandomizationJson {
    Haar,
    Dirac {
        #[serde(default)]
        unitary: MatrixJson,
    },
    Mixture {
        weights: Vec<f64>,
        unitaries: Vec<MatrixJson>,
    },
    Convex {
        haar_weight: f64,
        weights: Vec<f64>,
        unitaries: Vec<MatrixJson>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randomization: Option<RandomizationJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_kraus: Option<Vec<ExactMatrixJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<f64>>,
}

/// A channel file after validation.
#[derive(Debug, Clone)]
pub struct LoadedChannel {
    pub file: ChannelFile,
    pub channel: KrausChannel,
    pub randomization: RandomizationSpec,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if r == 0 || cols == 0 {
        return Err(Error::Empty("matrix"));
    }
    if let Some(bad) = rows.iter().find(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
    }
    Ok(ComplexMatrix::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn exact_matrix_to_json(m: &ExactMatrix) -> ExactMatrixJson {
    m.to_rows().iter().map(|row| row.iter().map(Q::to_strings).collect()).collect()
}

pub fn exact_matrix_from_json(rows: &ExactMatrixJson) -> Result<ExactMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut entries = Vec::with_capacity(rows.len() * cols);
    for row in rows {
        if row.len() != cols {
            return Err(Error::DimensionMismatch { expected: cols, got: row.len() });
        }
        for [re, im] in row {
            entries.push(Q::from_strings(re, im)?);
        }
    }
    ExactMatrix::new(rows.len(), cols, entries)
}

fn mixture_from_json(weights: &[f64], unitaries: &[MatrixJson]) -> Result<FiniteMixture> {
    let us = unitaries.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    FiniteMixture::new(weights.to_vec(), us)
}

impl RandomizationJson {
    pub fn to_spec(&self) -> Result<RandomizationSpec> {
        Ok(match self {
            RandomizationJson::Haar => RandomizationSpec::Haar,
            RandomizationJson::Dirac { unitary } => RandomizationSpec::Dirac(matrix_from_json(unitary)?),
            RandomizationJson::Mixture { weights, unitaries } => {
                RandomizationSpec::Mixture(mixture_from_json(weights, unitaries)?)
            }
            RandomizationJson::Convex { haar_weight, weights, unitaries } => {
                RandomizationSpec::Convex { haar_weight: *haar_weight, atoms: mixture_from_json(weights, unitaries)? }
            }
        })
    }

    pub fn from_spec(spec: &RandomizationSpec) -> Self {
        let mix = |m: &FiniteMixture| (m.weights.clone(), m.unitaries.iter().map(matrix_to_json).collect());
        match spec {
            RandomizationSpec::Haar => RandomizationJson::Haar,
            RandomizationSpec::Dirac(u) => RandomizationJson::Dirac { unitary: matrix_to_json(u) },
            RandomizationSpec::Mixture(m) => {
                let (weights, unitaries) = mix(m);
                RandomizationJson::Mixture { weights, unitaries }
            }
            RandomizationSpec::Convex { haar_weight, atoms } => {
                let (weights, unitaries) = mix(atoms);
                RandomizationJson::Convex { haar_weight: *haar_weight, weights, unitaries }
            }
        }
    }

    /// Parses the CLI shorthand `haar` / `identity`, or inline JSON.
    pub fn parse_override(s: &str) -> Result<Self> {
        match s.trim() {
            "haar" => Ok(RandomizationJson::Haar),
            "identity" | "dirac" => Ok(RandomizationJson::Dirac { unitary: Vec::new() }),
            other => Ok(serde_json::from_str(other)?),
        }
    }
}

impl ChannelFile {
    pub fn from_channel(
        name: Option<&str>,
        ch: &KrausChannel,
        rand: &RandomizationSpec,
        exact: Option<&[ExactMatrix]>,
    ) -> Self {
        Self {
            name: name.map(str::to_owned),
            dim: ch.dim(),
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
            randomization: Some(RandomizationJson::from_spec(rand)),
            exact_kraus: exact.map(|ms| ms.iter().map(exact_matrix_to_json).collect()),
        }
    }

    pub fn load(self) -> Result<LoadedChannel> {
        let kraus = self.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        if let Some(v) = kraus.iter().find(|v| v.nrows() != self.dim || v.ncols() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.nrows().max(v.ncols()) });
        }
        let channel = KrausChannel::new(kraus)?;
        let randomization = match &self.randomization {
            None => RandomizationSpec::Haar,
            // `{"type": "dirac"}` with an empty matrix means the identity basis.
            Some(RandomizationJson::Dirac { unitary }) if unitary.is_empty() => {
                RandomizationSpec::identity(channel.rank())
            }
            Some(r) => r.to_spec()?,
        };
        randomization.validate(channel.rank())?;
        Ok(LoadedChannel { file: self, channel, randomization })
    }

    /// Exact operators for certificates: `exact_kraus` when present, else
    /// the binary values of `kraus`.
    pub fn exact_operators(&self) -> Result<Vec<ExactMatrix>> {
        match &self.exact_kraus {
            Some(ms) => ms.iter().map(exact_matrix_from_json).collect(),
            None => self.kraus.iter().map(|m| ExactMatrix::from_complex(&matrix_from_json(m)?)).collect(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_channel_file(path: &Path) -> Result<ChannelFile> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

pub fn load_channel(path: &Path) -> Result<LoadedChannel> {
    read_channel_file(path)?.load()
}

impl DensityFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self { dim: m.nrows(), matrix: Some(matrix_to_json(m)), diag: None }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let m = match (&self.matrix, &self.diag) {
            (Some(m), None) => matrix_from_json(m)?,
            (None, Some(d)) => {
                ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0))))
            }
            _ => return Err(Error::Parse("density file needs exactly one of \"matrix\" and \"diag\"".into())),
        };
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.nrows() });
        }
        DensityMatrix::new(m)
    }
}

pub fn load_density(path: &Path) -> Result<DensityMatrix> {
    let file: DensityFile = serde_json::from_str(&read_text(path)?)?;
    file.to_density()
}

/// Splits `a+bi` / `a-bi` / `bi` / `a` into real and imaginary text.
fn split_complex(s: &str) -> Result<(String, String)> {
    let s: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return Ok((s, "0".into()));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].to_string(), body[k..].to_string()),
        None => ("0".to_string(), body.to_string()),
    };
    let im = match im.as_str() {
        "" | "+" => "1".to_string(),
        "-" => "-1".to_string(),
        _ => im.trim_start_matches('+').to_string(),
    };
    Ok((re, im))
}

fn entries(s: &str) -> impl Iterator<Item = &str> {
    s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let (re, im) = split_complex(s)?;
    let p = |t: &str| t.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
    Ok(Complex64::new(p(&re)?, p(&im)?))
}

/// Comma-separated complex entries, e.g. `1, 0.5-2i, i`.
pub fn parse_vector(s: &str) -> Result<ComplexVector> {
    let v = entries(s).map(parse_complex).collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::Empty("vector"));
    }
    Ok(ComplexVector::from_vec(v))
}

pub fn parse_state(s: &str) -> Result<ProjectiveState> {
    canonicalize(&parse_vector(s)?)
}

/// Comma-separated Gaussian rationals, e.g. `1, 7/2-i, 0.25i`.
pub fn parse_exact_vector(s: &str) -> Result<Vec<Q>> {
    let v = entries(s)
        .map(|t| {
            let (re, im) = split_complex(t)?;
            Q::from_strings(&re, &im)
        })
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::Empty("vector"));
    }
    Ok(v)
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn state_header(d: usize) -> Vec<String> {
    (0..d).flat_map(|k| [format!("re{k}"), format!("im{k}")]).collect()
}

fn state_fields(x: &ProjectiveState) -> impl Iterator<Item = String> + '_ {
    x.rep().iter().flat_map(|z| [fmt17(z.re), fmt17(z.im)])
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV with columns `weight, re0, im0, re1, im1, …`.
pub fn measure_to_csv(m: &EmpiricalMeasure) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["weight".to_string()];
    header.extend(state_header(m.dim()));
    w.write_record(&header).map_err(csv_error)?;
    for (x, &wt) in m.points().iter().zip(m.weights()) {
        w.write_record(std::iter::once(fmt17(wt)).chain(state_fields(x))).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// Reads `weight, re0, im0, …` CSV; a file without a `weight` column gets
/// equal weights.
pub fn measure_from_csv(text: &str) -> Result<EmpiricalMeasure> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    let weighted = header.get(0) == Some("weight");
    let offset = usize::from(weighted);
    let coords = header.len() - offset;
    if coords == 0 || coords % 2 != 0 {
        return Err(Error::Parse(format!("expected re/im column pairs, found {coords} coordinate columns")));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let num = |k: usize| -> Result<f64> {
            let t = rec.get(k).ok_or_else(|| Error::Parse("short CSV row".into()))?;
            t.trim().parse().map_err(|e| Error::Parse(format!("{t}: {e}")))
        };
        let v = (0..coords / 2)
            .map(|k| Ok(c(num(offset + 2 * k)?, num(offset + 2 * k + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        points.push(ProjectiveState::from_representative(ComplexVector::from_vec(v))?);
        weights.push(if weighted { num(0)? } else { 1.0 });
    }
    EmpiricalMeasure::from_unnormalized(points, weights)
}

pub fn load_measure(path: &Path) -> Result<EmpiricalMeasure> {
    measure_from_csv(&read_text(path)?)
}

/// CSV with columns `step, outcome, re0, im0, …`; outcomes are 1-based and
/// empty for the initial state.
pub fn run_to_csv(run: &ChainRun) -> Result<String> {
    let d = run.states.first().map_or(0, ProjectiveState::dim);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "outcome".to_string()];
    header.extend(state_header(d));
    w.write_record(&header).map_err(csv_error)?;
    for ((x, t), j) in run.states.iter().zip(&run.times).zip(&run.outcomes) {
        let outcome = j.map(|j| (j + 1).to_string()).unwrap_or_default();
        w.write_record([t.to_string(), outcome].into_iter().chain(state_fields(x))).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

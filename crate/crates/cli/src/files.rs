//! JSON file formats. Complex matrices are stored as separate real and
//! imaginary row-major arrays.

use std::fs;
use std::path::{Path, PathBuf};

use hkq_core::grassmann::FRAME_TOL;
use hkq_core::matcore::{c64, orthonormality_defect};
use hkq_core::{ComplexMatrix, ConfigPoint, CotangentPoint, OrbitPair, Subspace, Truncation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Frames with an orthonormality defect up to this are accepted as is.
pub const FRAME_ACCEPT: f64 = 1e-9;
/// Frames up to this defect are re-orthonormalized with a warning.
pub const FRAME_REPAIR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let part = |f: fn(&hkq_core::C64) -> f64| {
            (0..rows)
                .map(|i| (0..cols).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixFile {
            rows,
            cols,
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }

    pub fn to_matrix(&self, what: &str) -> Result<ComplexMatrix, CliError> {
        let bad = |msg: String| CliError::Input(format!("{what}: {msg}"));
        if self.re.len() != self.rows || self.im.len() != self.rows {
            return Err(bad(format!("expected {} rows", self.rows)));
        }
        for (i, (re, im)) in self.re.iter().zip(&self.im).enumerate() {
            if re.len() != self.cols || im.len() != self.cols {
                return Err(bad(format!("row {i} does not have {} entries", self.cols)));
            }
        }
        let m = ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            c64(self.re[i][j], self.im[i][j])
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(bad("non-finite entry".into()));
        }
        Ok(m)
    }

    fn expect_shape(
        &self,
        rows: usize,
        cols: usize,
        what: &str,
    ) -> Result<ComplexMatrix, CliError> {
        if (self.rows, self.cols) != (rows, cols) {
            return Err(CliError::Input(format!(
                "{what} is {}x{}, expected {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        self.to_matrix(what)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub seed: u64,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub p: usize,
    pub q: usize,
    pub k: f64,
    pub x: MatrixFile,
    #[serde(rename = "X")]
    pub big_x: MatrixFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl PointFile {
    pub fn from_point(pt: &ConfigPoint, metadata: Option<Metadata>) -> Self {
        PointFile {
            p: pt.trunc.p,
            q: pt.trunc.q,
            k: pt.trunc.k,
            x: MatrixFile::from_matrix(&pt.base),
            big_x: MatrixFile::from_matrix(&pt.fiber),
            metadata,
        }
    }

    pub fn to_point(&self, tol: f64) -> Result<ConfigPoint, CliError> {
        let trunc = Truncation::new(self.p, self.q, self.k)?.with_tol(tol)?;
        let n = trunc.n();
        let x = self.x.expect_shape(n, self.p, "x")?;
        let big_x = self.big_x.expect_shape(n, self.p, "X")?;
        Ok(ConfigPoint::new(trunc, x, big_x)?)
    }
}

/// A transversal pair `(P, Q)` with the level `k` it is read at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub p: usize,
    pub q: usize,
    pub k: f64,
    #[serde(rename = "P")]
    pub big_p: MatrixFile,
    #[serde(rename = "Q")]
    pub big_q: MatrixFile,
}

impl PairFile {
    pub fn from_pair(pair: &OrbitPair, k: f64) -> Self {
        PairFile {
            p: pair.p.dim(),
            q: pair.q.dim(),
            k,
            big_p: MatrixFile::from_matrix(pair.p.frame()),
            big_q: MatrixFile::from_matrix(pair.q.frame()),
        }
    }

    pub fn to_pair(&self) -> Result<OrbitPair, CliError> {
        let n = self.p + self.q;
        let p = load_frame(&self.big_p.expect_shape(n, self.p, "P")?, "P")?;
        let q = load_frame(&self.big_q.expect_shape(n, self.q, "Q")?, "Q")?;
        Ok(OrbitPair::new(p, q)?)
    }
}

/// A cotangent point `(P, η)` of the Grassmannian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CotangentFile {
    pub p: usize,
    pub q: usize,
    pub k: f64,
    #[serde(rename = "P")]
    pub big_p: MatrixFile,
    pub eta: MatrixFile,
}

impl CotangentFile {
    pub fn from_cotangent(cp: &CotangentPoint, k: f64) -> Self {
        CotangentFile {
            p: cp.plane.dim(),
            q: cp.plane.ambient() - cp.plane.dim(),
            k,
            big_p: MatrixFile::from_matrix(cp.plane.frame()),
            eta: MatrixFile::from_matrix(&cp.eta),
        }
    }

    pub fn to_cotangent(&self) -> Result<CotangentPoint, CliError> {
        let n = self.p + self.q;
        let plane = load_frame(&self.big_p.expect_shape(n, self.p, "P")?, "P")?;
        Ok(CotangentPoint::new(
            plane,
            self.eta.expect_shape(n, n, "eta")?,
        )?)
    }
}

/// Accepts a frame within [`FRAME_ACCEPT`], repairs it within
/// [`FRAME_REPAIR`] and rejects it otherwise.
pub fn load_frame(frame: &ComplexMatrix, what: &str) -> Result<Subspace, CliError> {
    let deviation = orthonormality_defect(frame);
    if deviation <= FRAME_TOL {
        return Ok(Subspace::new(frame.clone())?);
    }
    if deviation > FRAME_REPAIR {
        return Err(hkq_core::Error::NotOrthonormal { deviation }.into());
    }
    if deviation > FRAME_ACCEPT {
        log::warn!("frame {what} has orthonormality defect {deviation:.3e}; re-orthonormalizing");
    }
    Ok(Subspace::span_of(frame)?)
}

/// Any of the input files, told apart by their fields.
#[derive(Debug, Clone)]
pub enum AnyFile {
    Point(PointFile),
    Pair(PairFile),
    Cotangent(CotangentFile),
    Matrix(MatrixFile),
}

impl AnyFile {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyFile::Point(_) => "point",
            AnyFile::Pair(_) => "pair",
            AnyFile::Cotangent(_) => "cotangent",
            AnyFile::Matrix(_) => "matrix",
        }
    }
}

pub fn read_any(path: &Path) -> Result<AnyFile, CliError> {
    let value: serde_json::Value = read_json(path)?;
    let has = |key: &str| value.get(key).is_some();
    let parsed = if has("eta") {
        serde_json::from_value(value).map(AnyFile::Cotangent)
    } else if has("Q") {
        serde_json::from_value(value).map(AnyFile::Pair)
    } else if has("X") {
        serde_json::from_value(value).map(AnyFile::Point)
    } else {
        serde_json::from_value(value).map(AnyFile::Matrix)
    };
    parsed.map_err(|e| CliError::Json {
        path: path.to_owned(),
        source: e,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.to_owned(),
        source: e,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("file types always serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|e| CliError::Io {
        path: path.to_owned(),
        source: e,
    })
}

/// `out.json` → `out_z.json`.
pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("json");
    out.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

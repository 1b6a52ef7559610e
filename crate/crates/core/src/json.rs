//! JSON wire formats.
//!
//! * operator: `{"n": int, "re": [[...]], "im": [[...]]}`, `n²×n²` nested
//!   arrays in the composite index convention
//! * vector in `H ⊗ H`: `{"n": int, "re": [...], "im": [...]}` of length `n²`
//! * matrix: `{"re": [[...]], "im": [[...]]}`
//! * map: `{"n": int, "images": [[matrix, ...], ...]}` with
//!   `images[i][j] = φ(E_ij)`
//!
//! Reports are written with [`to_json_string`], which prints every float
//! with 17 significant digits so that identical runs give identical bytes.

use std::io;

use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteOperator;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::maps::LinearMapRepr;

pub const SCHEMA: &str = "bpnorm/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorJson {
    pub n: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapJson {
    pub n: usize,
    pub images: Vec<Vec<MatrixJson>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&crate::linalg::C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        matrix_from_parts(&self.re, &self.im)
    }
}

fn matrix_from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix> {
    let rows = re.len();
    let cols = re.first().map_or(0, |r| r.len());
    if re.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("ragged \"re\" array".into()));
    }
    if !im.is_empty() && (im.len() != rows || im.iter().any(|r| r.len() != cols)) {
        return Err(Error::Shape("\"im\" shape differs from \"re\"".into()));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        let imag = if im.is_empty() { 0.0 } else { im[i][j] };
        c64(re[i][j], imag)
    }))
}

impl OperatorJson {
    pub fn from_operator(op: &BipartiteOperator) -> Self {
        let m = MatrixJson::from_matrix(op.matrix());
        Self { n: op.n(), re: m.re, im: m.im }
    }

    pub fn to_operator(&self) -> Result<BipartiteOperator> {
        let m = matrix_from_parts(&self.re, &self.im)?;
        BipartiteOperator::new(self.n, m)
    }
}

impl VectorJson {
    pub fn from_vector(n: usize, v: &ComplexVector) -> Self {
        Self {
            n,
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<ComplexVector> {
        let d = self.n * self.n;
        if self.re.len() != d || (!self.im.is_empty() && self.im.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: self.re.len() });
        }
        Ok(ComplexVector::from_fn(d, |k, _| {
            c64(self.re[k], if self.im.is_empty() { 0.0 } else { self.im[k] })
        }))
    }
}

impl MapJson {
    pub fn from_map(map: &LinearMapRepr) -> Self {
        let n = map.n();
        Self {
            n,
            images: (0..n)
                .map(|i| (0..n).map(|j| MatrixJson::from_matrix(map.image(i, j))).collect())
                .collect(),
        }
    }

    pub fn to_map(&self) -> Result<LinearMapRepr> {
        let n = self.n;
        if self.images.len() != n || self.images.iter().any(|row| row.len() != n) {
            return Err(Error::Shape(format!("\"images\" must be an {n}x{n} array of matrices")));
        }
        let mut images = Vec::with_capacity(n * n);
        for row in &self.images {
            for m in row {
                images.push(m.to_matrix()?);
            }
        }
        LinearMapRepr::new(n, images)
    }
}

/// Input accepted wherever an operator is expected: a density, or a map
/// that is converted to its density.
#[derive(Debug, Clone)]
pub enum OperatorOrMap {
    Operator(BipartiteOperator),
    Map(LinearMapRepr),
}

pub fn parse_operator_or_map(text: &str) -> Result<OperatorOrMap> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("images").is_some() {
        let m: MapJson = serde_json::from_value(value)?;
        Ok(OperatorOrMap::Map(m.to_map()?))
    } else {
        let o: OperatorJson = serde_json::from_value(value)?;
        Ok(OperatorOrMap::Operator(o.to_operator()?))
    }
}

pub fn parse_operator(text: &str) -> Result<BipartiteOperator> {
    let o: OperatorJson = serde_json::from_str(text)?;
    o.to_operator()
}

pub fn parse_map(text: &str) -> Result<LinearMapRepr> {
    let m: MapJson = serde_json::from_str(text)?;
    m.to_map()
}

pub fn parse_vector(text: &str) -> Result<ComplexVector> {
    let v: VectorJson = serde_json::from_str(text)?;
    v.to_vector()
}

// serde helpers for report structs

pub fn ser_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

pub fn ser_opt_matrix<S: Serializer>(
    m: &Option<ComplexMatrix>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(MatrixJson::from_matrix).serialize(s)
}

pub fn ser_vector<S: Serializer>(v: &ComplexVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Vector", 2)?;
    st.serialize_field("re", &v.iter().map(|z| z.re).collect::<Vec<_>>())?;
    st.serialize_field("im", &v.iter().map(|z| z.im).collect::<Vec<_>>())?;
    st.end()
}

pub fn ser_vectors<S: Serializer>(vs: &[ComplexVector], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct V<'a>(#[serde(serialize_with = "ser_vector")] &'a ComplexVector);
    vs.iter().map(V).collect::<Vec<_>>().serialize(s)
}

pub fn ser_matrices<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    ms.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>().serialize(s)
}

impl Serialize for BipartiteOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::from_operator(self).serialize(s)
    }
}

impl Serialize for LinearMapRepr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapJson::from_map(self).serialize(s)
    }
}

/// Compact formatter that prints floats as `d.dddddddddddddddde±x`
/// (17 significant digits). Non-finite values are written as `null`.
#[derive(Debug, Default, Clone, Copy)]
pub struct SigDigitsFormatter;

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

//! Recurrent-network parameters and their JSON checkpoint form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::SymmetryMode;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Input dimension of every cell: the one-hot encoded spin.
pub const D_V: usize = 2;
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Vanilla,
    Gru,
}

impl std::str::FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(Self::Vanilla),
            "gru" => Ok(Self::Gru),
            other => Err(Error::InvalidArgument(format!(
                "unknown cell kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum CellWeights {
    Vanilla {
        w: Array2<f64>,
        u: Array2<f64>,
        b: Array1<f64>,
    },
    Gru {
        w_z: Array2<f64>,
        w_r: Array2<f64>,
        w_h: Array2<f64>,
        u_z: Array2<f64>,
        u_r: Array2<f64>,
        u_h: Array2<f64>,
        b_z: Array1<f64>,
        b_r: Array1<f64>,
        b_h: Array1<f64>,
    },
}

/// Cell weights plus the softmax output layer `y = S(V h + c)` with
/// `V: 2 × d_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnParameters {
    pub cell: CellWeights,
    pub v: Array2<f64>,
    pub c: Array1<f64>,
}

impl RnnParameters {
    pub fn zeros(kind: CellKind, d_h: usize) -> Self {
        let m = |r, c| Array2::zeros((r, c));
        let cell = match kind {
            CellKind::Vanilla => CellWeights::Vanilla {
                w: m(d_h, D_V),
                u: m(d_h, d_h),
                b: Array1::zeros(d_h),
            },
            CellKind::Gru => CellWeights::Gru {
                w_z: m(d_h, D_V),
                w_r: m(d_h, D_V),
                w_h: m(d_h, D_V),
                u_z: m(d_h, d_h),
                u_r: m(d_h, d_h),
                u_h: m(d_h, d_h),
                b_z: Array1::zeros(d_h),
                b_r: Array1::zeros(d_h),
                b_h: Array1::zeros(d_h),
            },
        };
        Self {
            cell,
            v: m(2, d_h),
            c: Array1::zeros(2),
        }
    }

    /// Weight matrices uniform in `[-1/√d_h, 1/√d_h]`, biases zero. Entries
    /// are drawn tensor by tensor in [`RnnParameters::tensors`] order.
    pub fn init(kind: CellKind, d_h: usize, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(kind, d_h);
        let bound = 1.0 / (d_h as f64).sqrt();
        for (name, data) in p.tensors_mut() {
            if is_bias(name) {
                continue;
            }
            for x in data {
                *x = rng.random_range(-bound..=bound);
            }
        }
        p
    }

    pub fn kind(&self) -> CellKind {
        match self.cell {
            CellWeights::Vanilla { .. } => CellKind::Vanilla,
            CellWeights::Gru { .. } => CellKind::Gru,
        }
    }

    pub fn d_h(&self) -> usize {
        self.v.ncols()
    }

    /// Tensor names, shapes and row-major data in canonical order.
    pub fn tensors(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        fn m<'a>(name: &'static str, a: &'a Array2<f64>) -> (&'static str, Vec<usize>, &'a [f64]) {
            (
                name,
                a.shape().to_vec(),
                a.as_slice().expect("standard layout"),
            )
        }
        fn v<'a>(name: &'static str, a: &'a Array1<f64>) -> (&'static str, Vec<usize>, &'a [f64]) {
            (
                name,
                a.shape().to_vec(),
                a.as_slice().expect("standard layout"),
            )
        }
        let mut out = match &self.cell {
            CellWeights::Vanilla { w, u, b } => vec![m("W", w), m("U", u), v("b", b)],
            CellWeights::Gru {
                w_z,
                w_r,
                w_h,
                u_z,
                u_r,
                u_h,
                b_z,
                b_r,
                b_h,
            } => vec![
                m("W_z", w_z),
                m("W_r", w_r),
                m("W_h", w_h),
                m("U_z", u_z),
                m("U_r", u_r),
                m("U_h", u_h),
                v("b_z", b_z),
                v("b_r", b_r),
                v("b_h", b_h),
            ],
        };
        out.push(m("V", &self.v));
        out.push(v("c", &self.c));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        fn s<'a, D: ndarray::Dimension>(
            name: &'static str,
            a: &'a mut ndarray::Array<f64, D>,
        ) -> (&'static str, &'a mut [f64]) {
            (name, a.as_slice_mut().expect("standard layout"))
        }
        let mut out = match &mut self.cell {
            CellWeights::Vanilla { w, u, b } => vec![s("W", w), s("U", u), s("b", b)],
            CellWeights::Gru {
                w_z,
                w_r,
                w_h,
                u_z,
                u_r,
                u_h,
                b_z,
                b_r,
                b_h,
            } => vec![
                s("W_z", w_z),
                s("W_r", w_r),
                s("W_h", w_h),
                s("U_z", u_z),
                s("U_r", u_r),
                s("U_h", u_h),
                s("b_z", b_z),
                s("b_r", b_r),
                s("b_h", b_h),
            ],
        };
        out.push(s("V", &mut self.v));
        out.push(s("c", &mut self.c));
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, _, d)| d.len()).sum()
    }

    /// All entries concatenated in canonical tensor order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors()
            .into_iter()
            .flat_map(|(_, _, d)| d.iter().copied())
            .collect()
    }

    /// A copy of `self` with entries replaced from a flat vector.
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "flat vector has {} entries, parameters have {}",
                flat.len(),
                self.num_params()
            )));
        }
        let mut out = self.clone();
        let mut offset = 0;
        for (_, data) in out.tensors_mut() {
            data.copy_from_slice(&flat[offset..offset + data.len()]);
            offset += data.len();
        }
        Ok(out)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        let a = self.tensors();
        let b = other.tensors();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0 && x.1 == y.1)
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, _, d)| d.iter().all(|x| x.is_finite()))
    }
}

fn is_bias(name: &str) -> bool {
    name.starts_with('b') || name == "c"
}

/// Gradient of a scalar loss with respect to every [`RnnParameters`] entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet(pub RnnParameters);

impl GradientSet {
    pub fn zeros_like(params: &RnnParameters) -> Self {
        Self(RnnParameters::zeros(params.kind(), params.d_h()))
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.0.flatten()
    }

    /// Largest elementwise `|a - b| / (|b| + floor)`.
    pub fn max_relative_error(&self, reference: &GradientSet, floor: f64) -> f64 {
        self.flatten()
            .iter()
            .zip(reference.flatten())
            .map(|(a, b)| (a - b).abs() / (b.abs() + floor))
            .fold(0.0, f64::max)
    }
}

impl std::ops::Deref for GradientSet {
    type Target = RnnParameters;

    fn deref(&self) -> &RnnParameters {
        &self.0
    }
}

/// Serialized model: parameters plus the context needed to use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RnnCheckpoint {
    pub format_version: u32,
    pub cell_kind: CellKind,
    pub n: usize,
    pub d_h: usize,
    pub symmetry_mode: SymmetryMode,
    pub epoch: usize,
    pub seed: u64,
    pub params: BTreeMap<String, Vec<f64>>,
}

impl RnnCheckpoint {
    pub fn new(
        params: &RnnParameters,
        n: usize,
        mode: SymmetryMode,
        epoch: usize,
        seed: u64,
    ) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            cell_kind: params.kind(),
            n,
            d_h: params.d_h(),
            symmetry_mode: mode,
            epoch,
            seed,
            params: params
                .tensors()
                .into_iter()
                .map(|(name, _, d)| (name.to_string(), d.to_vec()))
                .collect(),
        }
    }

    pub fn parameters(&self) -> Result<RnnParameters> {
        if self.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported checkpoint format_version {}",
                self.format_version
            )));
        }
        let mut p = RnnParameters::zeros(self.cell_kind, self.d_h);
        let expected: Vec<&str> = p.tensors().iter().map(|t| t.0).collect();
        if self.params.len() != expected.len() {
            return Err(Error::Parse(format!(
                "checkpoint has tensors {:?}, expected {:?}",
                self.params.keys().collect::<Vec<_>>(),
                expected
            )));
        }
        for (name, data) in p.tensors_mut() {
            let src = self
                .params
                .get(name)
                .ok_or_else(|| Error::Parse(format!("checkpoint is missing tensor {name}")))?;
            if src.len() != data.len() {
                return Err(Error::DimensionMismatch(format!(
                    "tensor {name} has {} entries, expected {}",
                    src.len(),
                    data.len()
                )));
            }
            data.copy_from_slice(src);
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

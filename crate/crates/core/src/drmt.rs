//! Dense tensor storage and the DRMT file format.
//!
//! Layout, all little-endian:
//!   bytes 0..4   magic "DRMT" (0x44 0x52 0x4D 0x54)
//!   bytes 4..6   u16 version, currently 1
//!   byte  6      u8 dtype: 1 = real64, 2 = complex128 (interleaved re, im)
//!   byte  7      u8 ndim
//!   then ndim × u64 extents, then the row-major IEEE-754 payload.
//! Reading back a written tensor is bitwise exact.

use std::fs;
use std::path::Path;

use ndarray::{Array2, Array3, ArrayD, ArrayView2, ArrayView3, ArrayViewD, IxDyn};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub const MAGIC: [u8; 4] = *b"DRMT";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    Real64,
    Complex128,
}

impl Dtype {
    fn tag(self) -> u8 {
        match self {
            Dtype::Real64 => 1,
            Dtype::Complex128 => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Dtype::Real64),
            2 => Ok(Dtype::Complex128),
            other => Err(CoreError::UnsupportedDtype(other)),
        }
    }

    fn elem_bytes(self) -> usize {
        match self {
            Dtype::Real64 => 8,
            Dtype::Complex128 => 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TensorData {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Dense tensor with row-major flat storage (last index varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: TensorData,
}

impl DenseTensor {
    pub fn from_real(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        Self::check_dims(&dims, data.len())?;
        Ok(Self {
            dims,
            data: TensorData::Real(data),
        })
    }

    pub fn from_complex(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        Self::check_dims(&dims, data.len())?;
        Ok(Self {
            dims,
            data: TensorData::Complex(data),
        })
    }

    fn check_dims(dims: &[usize], len: usize) -> Result<()> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(CoreError::Dimension(format!(
                "tensor extents must all be >= 1, got {dims:?}"
            )));
        }
        let expected: usize = dims.iter().product();
        if expected != len {
            return Err(CoreError::Dimension(format!(
                "extents {dims:?} imply {expected} elements, got {len}"
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dtype(&self) -> Dtype {
        match self.data {
            TensorData::Real(_) => Dtype::Real64,
            TensorData::Complex(_) => Dtype::Complex128,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // extents are all >= 1 by construction
    }

    pub fn from_array_view(view: ArrayViewD<'_, f64>) -> Self {
        let dims = view.shape().to_vec();
        let data = view.iter().copied().collect();
        Self {
            dims,
            data: TensorData::Real(data),
        }
    }

    pub fn from_array3(t: ArrayView3<'_, f64>) -> Self {
        Self::from_array_view(t.into_dyn())
    }

    pub fn from_complex_matrix(m: ArrayView2<'_, Complex64>) -> Self {
        let dims = vec![m.nrows(), m.ncols()];
        let data = m.iter().copied().collect();
        Self {
            dims,
            data: TensorData::Complex(data),
        }
    }

    pub fn to_real_array(&self) -> Result<ArrayD<f64>> {
        match &self.data {
            TensorData::Real(v) => Ok(ArrayD::from_shape_vec(IxDyn(&self.dims), v.clone())
                .expect("dims and data length are consistent")),
            TensorData::Complex(_) => Err(CoreError::Dimension(
                "expected a real64 tensor, found complex128".to_string(),
            )),
        }
    }

    pub fn to_array3(&self) -> Result<Array3<f64>> {
        self.to_real_array()?.into_dimensionality().map_err(|_| {
            CoreError::Dimension(format!("expected a 3-D tensor, found {:?}", self.dims))
        })
    }

    pub fn to_complex_matrix(&self) -> Result<Array2<Complex64>> {
        match &self.data {
            TensorData::Complex(v) if self.dims.len() == 2 => {
                Ok(Array2::from_shape_vec((self.dims[0], self.dims[1]), v.clone())
                    .expect("dims and data length are consistent"))
            }
            TensorData::Complex(_) => Err(CoreError::Dimension(format!(
                "expected a complex matrix, found {}-D tensor",
                self.dims.len()
            ))),
            TensorData::Real(_) => Err(CoreError::Dimension(
                "expected a complex128 tensor, found real64".to_string(),
            )),
        }
    }

    /// Serialize to the DRMT byte layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload_len = self.len() * self.dtype().elem_bytes();
        let mut out = Vec::with_capacity(8 + self.dims.len() * 8 + payload_len);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.dtype().tag());
        out.push(self.dims.len() as u8);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        match &self.data {
            TensorData::Real(v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            TensorData::Complex(v) => {
                for x in v {
                    out.extend_from_slice(&x.re.to_le_bytes());
                    out.extend_from_slice(&x.im.to_le_bytes());
                }
            }
        }
        out
    }

    /// Parse from the DRMT byte layout.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(CoreError::Truncated {
                expected: 8,
                found: bytes.len(),
            });
        }
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&bytes[0..4]);
        if magic != MAGIC {
            return Err(CoreError::BadMagic { found: magic });
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(CoreError::UnsupportedVersion(version));
        }
        let dtype = Dtype::from_tag(bytes[6])?;
        let ndim = bytes[7] as usize;

        let header_len = 8 + ndim * 8;
        if bytes.len() < header_len {
            return Err(CoreError::Truncated {
                expected: header_len,
                found: bytes.len(),
            });
        }
        let mut dims = Vec::with_capacity(ndim);
        for i in 0..ndim {
            let start = 8 + i * 8;
            let mut word = [0u8; 8];
            word.copy_from_slice(&bytes[start..start + 8]);
            dims.push(u64::from_le_bytes(word) as usize);
        }
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(CoreError::Dimension(format!(
                "tensor extents must all be >= 1, got {dims:?}"
            )));
        }

        let count: usize = dims.iter().product();
        let payload = &bytes[header_len..];
        let expected = count * dtype.elem_bytes();
        if payload.len() != expected {
            return Err(CoreError::Truncated {
                expected,
                found: payload.len(),
            });
        }

        let read_f64 = |chunk: &[u8]| {
            let mut word = [0u8; 8];
            word.copy_from_slice(chunk);
            f64::from_le_bytes(word)
        };
        let data = match dtype {
            Dtype::Real64 => {
                TensorData::Real(payload.chunks_exact(8).map(read_f64).collect())
            }
            Dtype::Complex128 => TensorData::Complex(
                payload
                    .chunks_exact(16)
                    .map(|c| Complex64::new(read_f64(&c[0..8]), read_f64(&c[8..16])))
                    .collect(),
            ),
        };
        Ok(Self { dims, data })
    }
}

pub fn write_tensor(t: &DenseTensor, path: &Path) -> Result<()> {
    fs::write(path, t.to_bytes())?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let bytes = fs::read(path)?;
    DenseTensor::from_bytes(&bytes)
}

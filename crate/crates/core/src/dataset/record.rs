use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::qlinalg::ComplexMatrix;

use super::container::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    /// Little-endian f64.
    F64,
    /// Interleaved little-endian (re, im) f64 pairs.
    C128,
}

impl Dtype {
    pub fn bytes_per_element(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::C128 => 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl ArrayData {
    pub fn dtype(&self) -> Dtype {
        match self {
            ArrayData::Real(_) => Dtype::F64,
            ArrayData::Complex(_) => Dtype::C128,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ArrayData::Real(v) => v.len(),
            ArrayData::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Entry of the array table in the metadata block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
}

impl ArraySpec {
    pub fn num_elements(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: ArrayData,
}

impl NamedArray {
    pub fn real(name: &str, shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len(), "{name}");
        Self {
            name: name.to_string(),
            shape,
            data: ArrayData::Real(data),
        }
    }

    pub fn complex(name: &str, shape: Vec<usize>, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len(), "{name}");
        Self {
            name: name.to_string(),
            shape,
            data: ArrayData::Complex(data),
        }
    }

    /// Flattens square matrices, each row-major, after the leading axes.
    pub fn matrices(name: &str, leading: Vec<usize>, ms: &[ComplexMatrix]) -> Self {
        let dim = ms.first().map_or(0, |m| m.dim());
        let mut shape = leading;
        shape.extend([dim, dim]);
        let data = ms.iter().flat_map(|m| m.entries().iter().copied()).collect();
        Self::complex(name, shape, data)
    }

    pub fn spec(&self) -> ArraySpec {
        ArraySpec {
            name: self.name.clone(),
            dtype: self.data.dtype(),
            shape: self.shape.clone(),
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.data {
            ArrayData::Real(v) => Some(v),
            ArrayData::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.data {
            ArrayData::Complex(v) => Some(v),
            ArrayData::Real(_) => None,
        }
    }

    /// Reads back a stack of square matrices stored in the trailing two axes.
    pub fn to_matrices(&self) -> Option<Vec<ComplexMatrix>> {
        let data = self.as_complex()?;
        let dim = *self.shape.last()?;
        if dim == 0 || self.shape.len() < 2 || self.shape[self.shape.len() - 2] != dim {
            return None;
        }
        data.chunks(dim * dim)
            .map(|c| ComplexMatrix::from_entries(dim, c).ok())
            .collect()
    }
}

/// One dataset example: a JSON metadata block plus named arrays in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRecord {
    pub metadata: Value,
    pub arrays: Vec<NamedArray>,
}

impl ExampleRecord {
    pub fn array(&self, name: &str) -> Option<&NamedArray> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn real(&self, name: &str) -> Option<&[f64]> {
        self.array(name)?.as_real()
    }

    pub fn simulation_parameters(&self) -> Option<&Value> {
        self.metadata.get("simulation_parameters")
    }

    /// Array table as declared in the metadata.
    pub fn declared_arrays(&self) -> Result<Vec<ArraySpec>, FormatError> {
        let table = self
            .metadata
            .get("arrays")
            .cloned()
            .ok_or_else(|| FormatError::Metadata("missing array table".into()))?;
        serde_json::from_value(table).map_err(|e| FormatError::Metadata(e.to_string()))
    }

    /// Checks that every array matches the declared name, dtype and shape.
    pub fn check_shapes(&self) -> Result<(), FormatError> {
        let declared = self.declared_arrays()?;
        if declared.len() != self.arrays.len() {
            return Err(FormatError::Shape {
                array: "<table>".into(),
                detail: format!(
                    "metadata declares {} arrays, record holds {}",
                    declared.len(),
                    self.arrays.len()
                ),
            });
        }
        for (spec, a) in declared.iter().zip(&self.arrays) {
            if spec != &a.spec() || spec.num_elements() != a.data.len() {
                return Err(FormatError::Shape {
                    array: a.name.clone(),
                    detail: format!(
                        "declared {:?} {:?}, found {:?} {:?} with {} elements",
                        spec.dtype,
                        spec.shape,
                        a.data.dtype(),
                        a.shape,
                        a.data.len()
                    ),
                });
            }
        }
        Ok(())
    }
}

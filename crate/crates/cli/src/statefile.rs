//! JSON state files.
//!
//! ```json
//! {
//!   "modes": [1, 2],
//!   "matrix": [[[re, im], ...], ...],
//!   "meta": {"seed": 7}
//! }
//! ```
//!
//! The matrix is row-major. Numbers are written with 17 significant digits
//! so that a read followed by a write reproduces the file byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use car_extend::{DensityState, ModeSet, Operator, Tolerances, C64};
use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub modes: Vec<u32>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub meta: Option<Map<String, Value>>,
}

impl StateFile {
    pub fn from_matrix(modes: &ModeSet, m: &DMatrix<C64>, meta: Option<Map<String, Value>>) -> Self {
        let matrix = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            modes: modes.indices().to_vec(),
            matrix,
            meta,
        }
    }

    pub fn from_state(state: &DensityState, meta: Option<Map<String, Value>>) -> Self {
        Self::from_matrix(state.modes(), state.matrix(), meta)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed state file")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).with_context(|| format!("cannot write {}", path.display()))
    }

    /// Canonical text form.
    pub fn to_json(&self) -> Result<String> {
        let mut out = String::from("{\n  \"modes\": [");
        let modes: Vec<String> = self.modes.iter().map(u32::to_string).collect();
        out.push_str(&modes.join(", "));
        out.push_str("],\n  \"matrix\": [\n");
        for (i, row) in self.matrix.iter().enumerate() {
            out.push_str("    [");
            for (j, [re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    bail!("matrix entry ({i},{j}) is not finite");
                }
                if j > 0 {
                    out.push_str(", ");
                }
                write!(out, "[{re:e}, {im:e}]").expect("write to string");
            }
            out.push(']');
            out.push_str(if i + 1 < self.matrix.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]");
        if let Some(meta) = &self.meta {
            out.push_str(",\n  \"meta\": ");
            out.push_str(&serde_json::to_string(meta)?);
        }
        out.push_str("\n}\n");
        Ok(out)
    }

    pub fn operator(&self) -> Result<Operator> {
        let modes = ModeSet::new(self.modes.clone())?;
        let d = modes.dim();
        if self.matrix.len() != d || self.matrix.iter().any(|r| r.len() != d) {
            bail!("matrix must be {d}x{d} for modes {modes}");
        }
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(self.matrix[i][j][0], self.matrix[i][j][1]));
        Ok(Operator::new(modes, m)?)
    }

    pub fn state(&self, tol: &Tolerances) -> Result<DensityState> {
        Ok(DensityState::from_operator(self.operator()?, tol)?)
    }
}

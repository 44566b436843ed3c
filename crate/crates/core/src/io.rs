//! File formats: JSON state/spectrum files and a binary complex matrix.
//!
//! State files hold `{kind, energies, degeneracy, amplitudes}` with the
//! amplitudes as `[re, im]` pairs grouped by degeneracy index (all nodes of
//! j = 0 first). A spectrum file is the same object without `amplitudes`.
//!
//! Matrix files are little-endian:
//!
//! | offset | size | content                          |
//! |--------|------|----------------------------------|
//! | 0      | 8    | magic `CTMATRIX`                 |
//! | 8      | 4    | format version, u32 = 1          |
//! | 12     | 4    | element code, u32 = 1 (complex128) |
//! | 16     | 8    | rows, u64                        |
//! | 24     | 8    | cols, u64                        |
//! | 32     | 16·rows·cols | row-major (re, im) f64 pairs |

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{EnergyState, SpectrumKind, SpectrumSpec, DEFAULT_NORM_TOL};

pub const MATRIX_MAGIC: &[u8; 8] = b"CTMATRIX";
pub const MATRIX_VERSION: u32 = 1;
const COMPLEX128: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub kind: SpectrumKind,
    pub energies: Vec<f64>,
    pub degeneracy: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_spectrum(spectrum: &SpectrumSpec) -> Self {
        Self {
            kind: spectrum.kind(),
            energies: spectrum.energies().to_vec(),
            degeneracy: spectrum.degeneracy(),
            amplitudes: None,
        }
    }

    /// The state's current amplitudes (evolution phase included).
    pub fn from_state(state: &EnergyState) -> Self {
        Self {
            amplitudes: Some(state.amplitudes().iter().map(|a| [a.re, a.im]).collect()),
            ..Self::from_spectrum(state.spectrum())
        }
    }

    pub fn spectrum(&self) -> Result<SpectrumSpec> {
        match self.kind {
            SpectrumKind::Continuous => SpectrumSpec::continuous(self.energies.clone(), self.degeneracy),
            SpectrumKind::Discrete => SpectrumSpec::discrete(self.energies.clone(), self.degeneracy),
        }
    }

    pub fn state(&self) -> Result<EnergyState> {
        self.state_with_tol(DEFAULT_NORM_TOL)
    }

    pub fn state_with_tol(&self, norm_tol: f64) -> Result<EnergyState> {
        let amps = self.amplitudes.as_ref().ok_or_else(|| Error::InvalidState("file has no amplitudes".into()))?;
        let spectrum = Arc::new(self.spectrum()?);
        let amps = amps.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        EnergyState::with_norm_tol(spectrum, amps, norm_tol)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

pub fn write_complex_matrix<W: Write>(mut w: W, m: &DMatrix<Complex64>) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * m.len());
    buf.extend_from_slice(MATRIX_MAGIC);
    buf.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    buf.extend_from_slice(&COMPLEX128.to_le_bytes());
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for k in 0..m.ncols() {
            let z = m[(i, k)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_complex_matrix<R: Read>(mut r: R) -> Result<DMatrix<Complex64>> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let bad = |msg: &str| Error::InvalidArgument(format!("matrix file: {msg}"));
    if &header[0..8] != MATRIX_MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().expect("4 bytes"));
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().expect("8 bytes"));
    if u32_at(8) != MATRIX_VERSION || u32_at(12) != COMPLEX128 {
        return Err(bad("unsupported version or element type"));
    }
    let (rows, cols) = (u64_at(16) as usize, u64_at(24) as usize);
    let count = rows.checked_mul(cols).ok_or_else(|| bad("dimensions overflow"))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 16 * count {
        return Err(bad("payload length does not match dimensions"));
    }
    let f = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().expect("8 bytes"));
    Ok(DMatrix::from_fn(rows, cols, |i, k| {
        let o = 16 * (i * cols + k);
        Complex64::new(f(o), f(o + 8))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_file_round_trip() {
        let text = r#"{"kind":"discrete","energies":[0.0,1.0],"degeneracy":1,
            "amplitudes":[[0.6,0.0],[0.0,0.8]]}"#;
        let f = StateFile::from_json(text).unwrap();
        let st = f.state().unwrap();
        assert_eq!(st.amplitudes()[1], Complex64::new(0.0, 0.8));
        let again = StateFile::from_json(&StateFile::from_state(&st).to_json().unwrap()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(StateFile::from_json(r#"{"kind":"discrete","energies":[0],"degeneracy":1,"x":1}"#).is_err());
        assert!(StateFile::from_json(r#"{"kind":"mixed","energies":[0],"degeneracy":1}"#).is_err());
        let f = StateFile::from_json(r#"{"kind":"continuous","energies":[0,1],"degeneracy":1}"#).unwrap();
        assert!(f.spectrum().is_ok());
        assert!(matches!(f.state(), Err(Error::InvalidState(_))));
    }

    #[test]
    fn matrix_round_trip_and_layout() {
        let m = DMatrix::from_fn(2, 3, |i, k| Complex64::new(i as f64, k as f64 + 0.5));
        let mut buf = Vec::new();
        write_complex_matrix(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 32 + 16 * 6);
        assert_eq!(&buf[..8], b"CTMATRIX");
        // element (0, 1) is the second pair
        assert_eq!(f64::from_le_bytes(buf[48..56].try_into().unwrap()), 0.0);
        assert_eq!(f64::from_le_bytes(buf[56..64].try_into().unwrap()), 1.5);
        assert_eq!(read_complex_matrix(buf.as_slice()).unwrap(), m);
        buf.pop();
        assert!(read_complex_matrix(buf.as_slice()).is_err());
    }
}

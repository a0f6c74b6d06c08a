//! Flat-binary array files with JSON sidecars.
//!
//! Every array is stored as raw little-endian values (`f64` or interleaved
//! re/im pairs for `complex128`) in a `.bin` file, plus a `.json` sidecar of
//! the same stem describing dtype, shape, and any extra metadata. The format
//! round-trips bit-exactly and is trivially readable from NumPy:
//! `np.fromfile("x.bin", dtype="<c16").reshape(json.load(open("x.json"))["shape"])`.

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::DtnData;
use crate::grid::Grid;
use crate::scattering::ScatteringData;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar parse failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: payload holds {found} values but the sidecar shape implies {expected}")]
    ShapeMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: dtype {found:?} where {expected:?} was required")]
    DtypeMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: payload length {len} is not a multiple of the value size")]
    RaggedPayload { path: PathBuf, len: usize },
}

/// JSON sidecar accompanying each `.bin` payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub dtype: String,
    pub shape: Vec<usize>,
    /// always "little"; present so readers can refuse foreign files
    pub byte_order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl Sidecar {
    fn new(dtype: &str, shape: &[usize]) -> Self {
        Sidecar {
            dtype: dtype.to_owned(),
            shape: shape.to_vec(),
            byte_order: "little".to_owned(),
            meta: None,
        }
    }

    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

fn write_payload(path: &Path, bytes: &[u8], sidecar: &Sidecar) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    let json = serde_json::to_string_pretty(sidecar)?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

fn read_payload(path: &Path, dtype: &str) -> Result<(Vec<u8>, Sidecar), IoError> {
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if sidecar.dtype != dtype {
        return Err(IoError::DtypeMismatch {
            path: path.to_owned(),
            expected: dtype.to_owned(),
            found: sidecar.dtype,
        });
    }
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok((bytes, sidecar))
}

/// Write an `f64` array (row major in `shape` order).
pub fn write_real(path: &Path, shape: &[usize], data: &[f64]) -> Result<(), IoError> {
    write_real_with_meta(path, shape, data, None)
}

pub fn write_real_with_meta(
    path: &Path,
    shape: &[usize],
    data: &[f64],
    meta: Option<serde_json::Value>,
) -> Result<(), IoError> {
    assert_eq!(shape.iter().product::<usize>(), data.len());
    let mut bytes = Vec::with_capacity(8 * data.len());
    for &v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut sc = Sidecar::new("float64", shape);
    sc.meta = meta;
    write_payload(path, &bytes, &sc)
}

pub fn read_real(path: &Path) -> Result<(Vec<f64>, Sidecar), IoError> {
    let (bytes, sidecar) = read_payload(path, "float64")?;
    if bytes.len() % 8 != 0 {
        return Err(IoError::RaggedPayload {
            path: path.to_owned(),
            len: bytes.len(),
        });
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if data.len() != sidecar.element_count() {
        return Err(IoError::ShapeMismatch {
            path: path.to_owned(),
            expected: sidecar.element_count(),
            found: data.len(),
        });
    }
    Ok((data, sidecar))
}

/// Write a `complex128` array: interleaved re, im, little endian.
pub fn write_complex(path: &Path, shape: &[usize], data: &[Complex64]) -> Result<(), IoError> {
    write_complex_with_meta(path, shape, data, None)
}

pub fn write_complex_with_meta(
    path: &Path,
    shape: &[usize],
    data: &[Complex64],
    meta: Option<serde_json::Value>,
) -> Result<(), IoError> {
    assert_eq!(shape.iter().product::<usize>(), data.len());
    let mut bytes = Vec::with_capacity(16 * data.len());
    for v in data {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut sc = Sidecar::new("complex128", shape);
    sc.meta = meta;
    write_payload(path, &bytes, &sc)
}

pub fn read_complex(path: &Path) -> Result<(Vec<Complex64>, Sidecar), IoError> {
    let (bytes, sidecar) = read_payload(path, "complex128")?;
    if bytes.len() % 16 != 0 {
        return Err(IoError::RaggedPayload {
            path: path.to_owned(),
            len: bytes.len(),
        });
    }
    let data: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    if data.len() != sidecar.element_count() {
        return Err(IoError::ShapeMismatch {
            path: path.to_owned(),
            expected: sidecar.element_count(),
            found: data.len(),
        });
    }
    Ok((data, sidecar))
}

/// Export the two trace matrices as `<stem>_phi.bin` and `<stem>_phi0.bin`
/// (plus sidecars) under `dir`.
pub fn write_dtn(dir: &Path, stem: &str, dtn: &DtnData) -> Result<(), IoError> {
    let shape = [dtn.n_b, dtn.n_b];
    write_complex(&dir.join(format!("{stem}_phi.bin")), &shape, &dtn.phi)?;
    write_complex(&dir.join(format!("{stem}_phi0.bin")), &shape, &dtn.phi0)
}

pub fn read_dtn(dir: &Path, stem: &str) -> Result<DtnData, IoError> {
    let phi_path = dir.join(format!("{stem}_phi.bin"));
    let (phi, sc) = read_complex(&phi_path)?;
    let (phi0, sc0) = read_complex(&dir.join(format!("{stem}_phi0.bin")))?;
    let n_b = *sc.shape.first().unwrap_or(&0);
    if sc.shape != [n_b, n_b] || sc0.shape != [n_b, n_b] {
        return Err(IoError::ShapeMismatch {
            path: phi_path,
            expected: n_b * n_b,
            found: phi0.len(),
        });
    }
    Ok(DtnData { n_b, phi, phi0 })
}

/// Scattering-data export: `<stem>_b.bin` (complex) and `<stem>_dispersion.bin`
/// (real); the spectral grid and the infill mask ride in the b sidecar.
pub fn write_scattering(dir: &Path, stem: &str, scat: &ScatteringData) -> Result<(), IoError> {
    let n = scat.grid.n;
    let meta = serde_json::json!({
        "grid_n": n,
        "grid_half_width": scat.grid.half_width,
        "masked": scat.masked,
    });
    write_complex_with_meta(
        &dir.join(format!("{stem}_b.bin")),
        &[n, n],
        &scat.b,
        Some(meta),
    )?;
    write_real(
        &dir.join(format!("{stem}_dispersion.bin")),
        &[n, n],
        &scat.dispersion,
    )
}

pub fn read_scattering(dir: &Path, stem: &str) -> Result<ScatteringData, IoError> {
    let b_path = dir.join(format!("{stem}_b.bin"));
    let (b, sc) = read_complex(&b_path)?;
    let (dispersion, _) = read_real(&dir.join(format!("{stem}_dispersion.bin")))?;
    #[derive(Deserialize)]
    struct ScatMeta {
        grid_n: usize,
        grid_half_width: f64,
        masked: Vec<bool>,
    }
    let meta: ScatMeta = serde_json::from_value(sc.meta.clone().unwrap_or_default())?;
    let grid = Grid::new(meta.grid_n, meta.grid_half_width);
    if b.len() != grid.len() || dispersion.len() != grid.len() || meta.masked.len() != grid.len() {
        return Err(IoError::ShapeMismatch {
            path: b_path,
            expected: grid.len(),
            found: b.len(),
        });
    }
    Ok(ScatteringData {
        grid,
        b,
        dispersion,
        masked: meta.masked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductivity::ConductivityField;
    use crate::forward::ForwardSolver;

    fn tmpdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("dbar-io-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn real_and_complex_arrays_round_trip_bit_exactly() {
        let dir = tmpdir("arrays");
        let reals = vec![0.0, -1.5, f64::MIN_POSITIVE, 3.25e300, -0.0];
        let path_r = dir.join("r.bin");
        write_real(&path_r, &[5], &reals).unwrap();
        let (back_r, sc_r) = read_real(&path_r).unwrap();
        assert_eq!(sc_r.shape, vec![5]);
        for (a, b) in reals.iter().zip(&back_r) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        let cs: Vec<Complex64> = (0..6)
            .map(|k| Complex64::new(k as f64 * 0.3, -(k as f64) * 1.7e-4))
            .collect();
        let path_c = dir.join("c.bin");
        write_complex(&path_c, &[2, 3], &cs).unwrap();
        let (back_c, sc_c) = read_complex(&path_c).unwrap();
        assert_eq!(sc_c.shape, vec![2, 3]);
        assert_eq!(cs, back_c);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn payload_bytes_are_little_endian_interleaved() {
        let dir = tmpdir("endian");
        let path = dir.join("one.bin");
        write_complex(&path, &[1], &[Complex64::new(1.0, -2.0)]).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[8..], &(-2.0f64).to_le_bytes());
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn dtype_and_shape_mismatches_are_rejected() {
        let dir = tmpdir("reject");
        let path = dir.join("x.bin");
        write_real(&path, &[3], &[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            read_complex(&path),
            Err(IoError::DtypeMismatch { .. })
        ));
        // truncate the payload behind the sidecar's back
        fs::write(&path, [0u8; 16]).unwrap();
        assert!(matches!(
            read_real(&path),
            Err(IoError::ShapeMismatch { .. })
        ));
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn dtn_matrices_round_trip_through_files() {
        let sigma = ConductivityField::named("gaussian").unwrap();
        let solver = ForwardSolver::new(&sigma, 32, 16).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        let dir = tmpdir("dtn");
        write_dtn(&dir, "case", &dtn).unwrap();
        let back = read_dtn(&dir, "case").unwrap();
        assert_eq!(back.n_b, dtn.n_b);
        assert_eq!(back.phi, dtn.phi);
        assert_eq!(back.phi0, dtn.phi0);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn scattering_data_round_trips_with_mask() {
        let grid = Grid::new(8, 4.0);
        let mut scat = ScatteringData::zero(grid);
        for (k, v) in scat.b.iter_mut().enumerate() {
            *v = Complex64::new(k as f64, -0.5);
        }
        scat.dispersion[3] = 0.75;
        scat.masked[5] = true;
        let dir = tmpdir("scat");
        write_scattering(&dir, "run", &scat).unwrap();
        let back = read_scattering(&dir, "run").unwrap();
        assert_eq!(back.grid, scat.grid);
        assert_eq!(back.b, scat.b);
        assert_eq!(back.dispersion, scat.dispersion);
        assert_eq!(back.masked, scat.masked);
        fs::remove_dir_all(dir).ok();
    }
}

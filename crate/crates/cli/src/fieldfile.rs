//! Binary field files.
//!
//! Layout, all little-endian:
//!
//! | offset | bytes | content |
//! |--------|-------|---------|
//! | 0  | 4 | magic `CBF1` |
//! | 4  | 4 | version (u32, currently 1) |
//! | 8  | 4 | n (u32) |
//! | 12 | 8 | torus length (f64) |
//! | 20 | 4 | field count (u32) |
//! | 24 | 8 | dt (f64) |
//! | 32 | 4 | flags (u32): bit 0 spectral, bit 1 one-half dealiasing |
//! | 36 | 4 | checkpoint stride (u32) |
//! | 40 | 4 | number of time steps (u32) |
//!
//! followed by the fields in order. A spectral field is its two components,
//! each `n²` coefficients stored as `(re, im)` pairs; a physical field is its
//! two components of `n²` samples.

use std::path::Path;

use cbf_core::forward::{checkpoint_steps, TimeGrid, Trajectory};
use cbf_core::spectral::{DealiasRule, GridSpec, PhysicalVecField, SpectralVecField};
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"CBF1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;

const FLAG_SPECTRAL: u32 = 1;
const FLAG_ONE_HALF: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldFileHeader {
    pub n: u32,
    pub length: f64,
    pub count: u32,
    pub dt: f64,
    pub spectral: bool,
    pub dealias: DealiasRule,
    pub stride: u32,
    pub steps: u32,
}

/// Contents of a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub header: FieldFileHeader,
    pub fields: Vec<SpectralVecField>,
}

fn format_err(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn to_u32(v: usize, what: &str, path: &Path) -> CliResult<u32> {
    u32::try_from(v).map_err(|_| format_err(path, format!("{what} {v} does not fit the header")))
}

impl FieldFileHeader {
    pub fn payload_len(&self) -> usize {
        let per_value = if self.spectral { 16 } else { 8 };
        self.count as usize * 2 * (self.n as usize).pow(2) * per_value
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.length.to_le_bytes());
        out.extend_from_slice(&self.count.to_le_bytes());
        out.extend_from_slice(&self.dt.to_le_bytes());
        let mut flags = 0u32;
        if self.spectral {
            flags |= FLAG_SPECTRAL;
        }
        if self.dealias == DealiasRule::OneHalf {
            flags |= FLAG_ONE_HALF;
        }
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&self.stride.to_le_bytes());
        out.extend_from_slice(&self.steps.to_le_bytes());
    }

    fn decode(bytes: &[u8], path: &Path) -> CliResult<Self> {
        if bytes.len() < 4 || &bytes[0..4] != MAGIC {
            return Err(format_err(path, "bad magic, not a field file"));
        }
        if bytes.len() < HEADER_LEN {
            return Err(format_err(path, format!("truncated header ({} bytes)", bytes.len())));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let version = u32_at(4);
        if version != VERSION {
            return Err(format_err(path, format!("unsupported version {version}")));
        }
        let flags = u32_at(32);
        Ok(Self {
            n: u32_at(8),
            length: f64_at(12),
            count: u32_at(20),
            dt: f64_at(24),
            spectral: flags & FLAG_SPECTRAL != 0,
            dealias: if flags & FLAG_ONE_HALF != 0 {
                DealiasRule::OneHalf
            } else {
                DealiasRule::TwoThirds
            },
            stride: u32_at(36),
            steps: u32_at(40),
        })
    }

    pub fn grid(&self, path: &Path) -> CliResult<GridSpec> {
        GridSpec::new(self.n as usize, self.length, self.dealias).map_err(|e| format_err(path, e.to_string()))
    }
}

/// Writes spectral fields with the given time metadata.
pub fn save_fields(path: &Path, fields: &[SpectralVecField], dt: f64, stride: usize, steps: usize) -> CliResult<()> {
    let grid = match fields.first() {
        Some(f) => *f.grid(),
        None => return Err(format_err(path, "nothing to write")),
    };
    let header = FieldFileHeader {
        n: to_u32(grid.n(), "grid size", path)?,
        length: grid.length(),
        count: to_u32(fields.len(), "field count", path)?,
        dt,
        spectral: true,
        dealias: grid.dealias(),
        stride: to_u32(stride, "stride", path)?,
        steps: to_u32(steps, "step count", path)?,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + header.payload_len());
    header.encode(&mut out);
    for f in fields {
        grid.same_as(f.grid())?;
        for c in 0..2 {
            for z in f.component(c) {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Writes physical samples of the fields.
pub fn save_physical(path: &Path, fields: &[PhysicalVecField], dt: f64, stride: usize, steps: usize) -> CliResult<()> {
    let grid = match fields.first() {
        Some(f) => *f.grid(),
        None => return Err(format_err(path, "nothing to write")),
    };
    let header = FieldFileHeader {
        n: to_u32(grid.n(), "grid size", path)?,
        length: grid.length(),
        count: to_u32(fields.len(), "field count", path)?,
        dt,
        spectral: false,
        dealias: grid.dealias(),
        stride: to_u32(stride, "stride", path)?,
        steps: to_u32(steps, "step count", path)?,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + header.payload_len());
    header.encode(&mut out);
    for f in fields {
        grid.same_as(f.grid())?;
        for c in 0..2 {
            for v in f.component(c) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Reads a field file; physical payloads are transformed to coefficients.
pub fn load_fields(path: &Path) -> CliResult<FieldFile> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let header = FieldFileHeader::decode(&bytes, path)?;
    let grid = header.grid(path)?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != header.payload_len() {
        return Err(format_err(
            path,
            format!(
                "payload is {} bytes, header promises {}",
                payload.len(),
                header.payload_len()
            ),
        ));
    }
    let len = grid.len();
    let mut values = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")));
    let mut fields = Vec::with_capacity(header.count as usize);
    for _ in 0..header.count {
        if header.spectral {
            let mut comp = || -> Vec<Complex64> {
                (0..len)
                    .map(|_| {
                        let re = values.next().expect("length checked");
                        let im = values.next().expect("length checked");
                        Complex64::new(re, im)
                    })
                    .collect()
            };
            let c1 = comp();
            let c2 = comp();
            fields.push(SpectralVecField::from_coeffs(grid, c1, c2)?);
        } else {
            let s1: Vec<f64> = values.by_ref().take(len).collect();
            let s2: Vec<f64> = values.by_ref().take(len).collect();
            fields.push(PhysicalVecField::new(grid, s1, s2)?.to_spectral());
        }
    }
    Ok(FieldFile { header, fields })
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let fields: Vec<SpectralVecField> = traj.stored().iter().map(|(_, f)| f.clone()).collect();
    save_fields(path, &fields, traj.dt(), traj.checkpoint_stride(), traj.steps())
}

pub fn load_trajectory(path: &Path) -> CliResult<Trajectory> {
    let file = load_fields(path)?;
    let h = file.header;
    let grid = h.grid(path)?;
    let time = TimeGrid::from_steps(h.dt, h.steps as usize).map_err(|e| format_err(path, e.to_string()))?;
    if checkpoint_steps(h.steps as usize, h.stride as usize).len() != file.fields.len() {
        return Err(format_err(path, "field count does not match stride and step count"));
    }
    Ok(Trajectory::from_parts(grid, time, h.stride as usize, file.fields)?)
}

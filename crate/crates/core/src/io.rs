//! File formats: the LDGR grid container and the dot/detection CSVs.
//!
//! LDGR layout, all integers little-endian:
//!
//! | bytes      | field                              |
//! |------------|------------------------------------|
//! | 4          | magic `b"LDGR"`                    |
//! | 2          | version, `u16` = 1                 |
//! | 2          | ndim, `u16` (2 or 3)               |
//! | 4 × ndim   | dims, `u32` each, slowest axis first |
//! | 4 × N      | payload, `f32`, row-major          |

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::detection::{Detection, DetectionSet};
use crate::eval::FrocCurve;
use crate::grid::{Coord, DotSet, GridError, VoxelGrid};

pub const MAGIC: &[u8; 4] = b"LDGR";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"LDGR\"")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated container: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("{extra} trailing bytes after payload")]
    TrailingData { extra: usize },
    #[error("line {line}: cannot parse {text:?}")]
    ParseError { line: usize, text: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    WrongArity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FormatError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// The grid-level error for non-finite payloads, if that is what this is.
    pub fn is_non_finite(&self) -> bool {
        matches!(self, FormatError::Grid(GridError::NonFiniteValue { .. }))
    }
}

pub fn encode_grid(grid: &VoxelGrid) -> Vec<u8> {
    let dims = grid.dims();
    let mut out = Vec::with_capacity(8 + 4 * dims.len() + 4 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u16).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in grid.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<VoxelGrid, FormatError> {
    let need = |needed: usize| {
        if bytes.len() < needed {
            Err(FormatError::Truncated {
                needed,
                have: bytes.len(),
            })
        } else {
            Ok(())
        }
    };
    need(4)?;
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if &magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    need(8)?;
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let ndim = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    if ndim != 2 && ndim != 3 {
        return Err(GridError::BadNdim(ndim).into());
    }
    let header = 8 + 4 * ndim;
    need(header)?;
    let dims: Vec<usize> = bytes[8..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let count: usize = dims.iter().product();
    let total = header + 4 * count;
    need(total)?;
    if bytes.len() > total {
        return Err(FormatError::TrailingData {
            extra: bytes.len() - total,
        });
    }
    let data = bytes[header..total]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(VoxelGrid::new(&dims, data)?)
}

pub fn grid_read(path: impl AsRef<Path>) -> Result<VoxelGrid, FormatError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| FormatError::io(path, e))?;
    decode_grid(&bytes)
}

pub fn grid_write(grid: &VoxelGrid, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, encode_grid(grid)).map_err(|e| FormatError::io(path, e))
}

fn header_for(ndim: usize) -> &'static str {
    if ndim == 3 {
        "z,y,x"
    } else {
        "y,x"
    }
}

/// Parses dot CSV text: one `y,x` (or `z,y,x`) integer row per line, with an
/// optional matching header on the first line. Blank lines are skipped.
pub fn parse_dots(text: &str, ndim: usize) -> Result<DotSet, FormatError> {
    if ndim != 2 && ndim != 3 {
        return Err(GridError::BadNdim(ndim).into());
    }
    let mut coords = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if line == 1 && row.replace(' ', "") == header_for(ndim) {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != ndim {
            return Err(FormatError::WrongArity {
                line,
                expected: ndim,
                found: fields.len(),
            });
        }
        let vals = fields
            .iter()
            .map(|f| f.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| FormatError::ParseError {
                line,
                text: row.to_string(),
            })?;
        coords.push(match vals[..] {
            [y, x] => Coord::yx(y, x),
            [z, y, x] => Coord::zyx(z, y, x),
            _ => unreachable!(),
        });
    }
    Ok(DotSet::new(ndim, coords)?)
}

pub fn dots_read_csv(path: impl AsRef<Path>, ndim: usize) -> Result<DotSet, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_dots(&text, ndim)
}

pub fn format_dots(dots: &DotSet) -> String {
    let mut out = String::new();
    out.push_str(header_for(dots.ndim()));
    out.push('\n');
    for c in dots.iter() {
        if dots.ndim() == 3 {
            out.push_str(&format!("{},{},{}\n", c.z, c.y, c.x));
        } else {
            out.push_str(&format!("{},{}\n", c.y, c.x));
        }
    }
    out
}

pub fn dots_write_csv(dots: &DotSet, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, format_dots(dots)).map_err(|e| FormatError::io(path, e))
}

/// Writes `y,x,score` rows with a header. Scores use the shortest
/// representation that round-trips through `f32`.
pub fn format_detections(dets: &DetectionSet) -> String {
    let mut out = String::from("y,x,score\n");
    for d in dets.iter() {
        out.push_str(&format!("{},{},{}\n", d.coord.y, d.coord.x, d.score));
    }
    out
}

pub fn detections_write_csv(
    dets: &DetectionSet,
    path: impl AsRef<Path>,
) -> Result<(), FormatError> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| FormatError::io(path, e))?;
    f.write_all(format_detections(dets).as_bytes())
        .map_err(|e| FormatError::io(path, e))
}

pub fn parse_detections(text: &str) -> Result<DetectionSet, FormatError> {
    let mut dets = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || (line == 1 && row.replace(' ', "") == "y,x,score") {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(FormatError::WrongArity {
                line,
                expected: 3,
                found: fields.len(),
            });
        }
        let bad = || FormatError::ParseError {
            line,
            text: row.to_string(),
        };
        let y = fields[0].parse::<usize>().map_err(|_| bad())?;
        let x = fields[1].parse::<usize>().map_err(|_| bad())?;
        let score = fields[2].parse::<f32>().map_err(|_| bad())?;
        if !score.is_finite() {
            return Err(bad());
        }
        dets.push(Detection {
            coord: Coord::yx(y, x),
            score,
        });
    }
    Ok(DetectionSet::from_unsorted(dets))
}

pub fn detections_read_csv(path: impl AsRef<Path>) -> Result<DetectionSet, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_detections(&text)
}

/// Writes `threshold,fp_avg,sensitivity` rows with a header. The leading
/// sentinel point has threshold `inf`.
pub fn format_froc(curve: &FrocCurve) -> String {
    let mut out = String::from("threshold,fp_avg,sensitivity\n");
    for p in &curve.points {
        out.push_str(&format!("{},{},{}\n", p.threshold, p.fp_avg, p.sensitivity));
    }
    out
}

pub fn froc_write_csv(curve: &FrocCurve, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, format_froc(curve)).map_err(|e| FormatError::io(path, e))
}

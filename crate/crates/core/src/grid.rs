//! Voxel grids and dot annotations.
//!
//! A [`VoxelGrid`] is a 2D or 3D scalar field stored row-major with the last
//! axis varying fastest. Coordinates are always ordered `(z, y, x)`; in 2D the
//! `z` component is fixed at zero so that the linear offset formula
//! `(z * height + y) * width + x` holds for both dimensionalities.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grids must be 2D or 3D, got ndim={0}")]
    BadNdim(usize),
    #[error("dimension {axis} is zero")]
    ZeroDim { axis: usize },
    #[error("data length {got} does not match dims product {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFiniteValue { index: usize, value: f32 },
    #[error("coordinate {coord} lies outside grid of dims {dims:?}")]
    OutOfBounds { coord: Coord, dims: Vec<usize> },
    #[error("duplicate dot {0}")]
    DuplicateDot(Coord),
    #[error("dot has {got} dimensions, expected {expected}")]
    DotArity { expected: usize, got: usize },
}

/// An integer voxel position. In 2D, `z` is always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub z: usize,
    pub y: usize,
    pub x: usize,
}

impl Coord {
    pub const fn yx(y: usize, x: usize) -> Self {
        Coord { z: 0, y, x }
    }

    pub const fn zyx(z: usize, y: usize, x: usize) -> Self {
        Coord { z, y, x }
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.z, self.y, self.x]
    }

    /// Euclidean distance in voxel units.
    pub fn distance(&self, other: &Coord) -> f64 {
        let d = |a: usize, b: usize| a as f64 - b as f64;
        let (dz, dy, dx) = (d(self.z, other.z), d(self.y, other.y), d(self.x, other.x));
        (dz * dz + dy * dy + dx * dx).sqrt()
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.z, self.y, self.x)
    }
}

/// Immutable 2D/3D grid of `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    ndim: usize,
    // Always [depth, height, width]; depth is 1 for 2D grids.
    shape: [usize; 3],
    data: Vec<f32>,
}

impl VoxelGrid {
    /// Builds a grid from `dims` (`[h, w]` or `[d, h, w]`) and row-major data.
    ///
    /// Rejects zero-sized axes, length mismatches and any NaN/Inf value.
    pub fn new(dims: &[usize], data: Vec<f32>) -> Result<Self, GridError> {
        let shape = match *dims {
            [h, w] => [1, h, w],
            [d, h, w] => [d, h, w],
            _ => return Err(GridError::BadNdim(dims.len())),
        };
        if let Some(axis) = dims.iter().position(|&d| d == 0) {
            return Err(GridError::ZeroDim { axis });
        }
        let expected = dims.iter().product::<usize>();
        if data.len() != expected {
            return Err(GridError::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { index, value });
        }
        Ok(VoxelGrid {
            ndim: dims.len(),
            shape,
            data,
        })
    }

    pub fn filled(dims: &[usize], value: f32) -> Result<Self, GridError> {
        let n = dims.iter().product();
        Self::new(dims, vec![value; n])
    }

    /// Builds a grid by evaluating `f` at every coordinate in raster order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(Coord) -> f32) -> Result<Self, GridError> {
        let n: usize = dims.iter().product();
        let mut data = Vec::with_capacity(n);
        let shape = match *dims {
            [h, w] => [1, h, w],
            [d, h, w] => [d, h, w],
            _ => return Err(GridError::BadNdim(dims.len())),
        };
        for z in 0..shape[0] {
            for y in 0..shape[1] {
                for x in 0..shape[2] {
                    data.push(f(Coord::zyx(z, y, x)));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    /// Dimensions as given at construction: `[h, w]` or `[d, h, w]`.
    pub fn dims(&self) -> &[usize] {
        &self.shape[3 - self.ndim..]
    }

    /// `[depth, height, width]`, with depth 1 for 2D grids.
    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn height(&self) -> usize {
        self.shape[1]
    }

    pub fn width(&self) -> usize {
        self.shape[2]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.z < self.shape[0] && c.y < self.shape[1] && c.x < self.shape[2]
    }

    pub fn index(&self, c: Coord) -> usize {
        debug_assert!(self.contains(c));
        (c.z * self.shape[1] + c.y) * self.shape[2] + c.x
    }

    pub fn coord(&self, index: usize) -> Coord {
        let plane = self.shape[1] * self.shape[2];
        Coord::zyx(
            index / plane,
            (index % plane) / self.shape[2],
            index % self.shape[2],
        )
    }

    pub fn get(&self, c: Coord) -> f32 {
        self.data[self.index(c)]
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    /// Index of the first maximum in raster order.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        best
    }

    /// Applies `f` elementwise, re-validating finiteness.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<Self, GridError> {
        VoxelGrid::new(self.dims(), self.data.iter().map(|&v| f(v)).collect())
    }
}

/// A set of dot annotations on a grid of known dimensionality.
///
/// Coordinates are kept in insertion order; duplicates are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotSet {
    ndim: usize,
    coords: Vec<Coord>,
}

impl DotSet {
    pub fn new(ndim: usize, coords: Vec<Coord>) -> Result<Self, GridError> {
        if ndim != 2 && ndim != 3 {
            return Err(GridError::BadNdim(ndim));
        }
        let mut seen = HashSet::with_capacity(coords.len());
        for &c in &coords {
            if ndim == 2 && c.z != 0 {
                return Err(GridError::DotArity {
                    expected: 2,
                    got: 3,
                });
            }
            if !seen.insert(c) {
                return Err(GridError::DuplicateDot(c));
            }
        }
        Ok(DotSet { ndim, coords })
    }

    pub fn empty(ndim: usize) -> Self {
        DotSet {
            ndim,
            coords: Vec::new(),
        }
    }

    /// Convenience constructor for 2D `(y, x)` pairs.
    pub fn from_yx(points: &[(usize, usize)]) -> Result<Self, GridError> {
        Self::new(2, points.iter().map(|&(y, x)| Coord::yx(y, x)).collect())
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Coord> {
        self.coords.iter()
    }

    /// Checks dimensionality and bounds against `grid`.
    pub fn check_bounds(&self, grid: &VoxelGrid) -> Result<(), GridError> {
        if self.ndim != grid.ndim() {
            return Err(GridError::DotArity {
                expected: grid.ndim(),
                got: self.ndim,
            });
        }
        match self.coords.iter().find(|c| !grid.contains(**c)) {
            Some(&coord) => Err(GridError::OutOfBounds {
                coord,
                dims: grid.dims().to_vec(),
            }),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_indexing_2d() {
        let g = VoxelGrid::new(&[3, 4], (0..12).map(|v| v as f32).collect()).unwrap();
        assert_eq!(g.get(Coord::yx(0, 0)), 0.0);
        assert_eq!(g.get(Coord::yx(1, 2)), 6.0);
        assert_eq!(g.get(Coord::yx(2, 3)), 11.0);
        assert_eq!(g.coord(7), Coord::yx(1, 3));
    }

    #[test]
    fn ramp_indexing_3d() {
        let g = VoxelGrid::new(&[2, 3, 4], (0..24).map(|v| v as f32).collect()).unwrap();
        // (z*h + y)*w + x
        assert_eq!(g.get(Coord::zyx(1, 2, 3)), 23.0);
        assert_eq!(g.get(Coord::zyx(1, 0, 1)), 13.0);
        assert_eq!(g.coord(13), Coord::zyx(1, 0, 1));
        assert_eq!(g.dims(), &[2, 3, 4]);
    }

    #[test]
    fn rejects_non_finite_with_index() {
        let err = VoxelGrid::new(&[2, 2], vec![0.0, 1.0, f32::NAN, 3.0]).unwrap_err();
        assert!(matches!(err, GridError::NonFiniteValue { index: 2, .. }));
        let err = VoxelGrid::new(&[1, 2], vec![0.0, f32::INFINITY]).unwrap_err();
        assert!(matches!(err, GridError::NonFiniteValue { index: 1, .. }));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(
            VoxelGrid::new(&[4], vec![0.0; 4]).unwrap_err(),
            GridError::BadNdim(1)
        );
        assert_eq!(
            VoxelGrid::new(&[2, 0], vec![]).unwrap_err(),
            GridError::ZeroDim { axis: 1 }
        );
        assert_eq!(
            VoxelGrid::new(&[2, 2], vec![0.0; 3]).unwrap_err(),
            GridError::LengthMismatch {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn dots_reject_duplicates_and_out_of_bounds() {
        assert_eq!(
            DotSet::from_yx(&[(1, 1), (1, 1)]).unwrap_err(),
            GridError::DuplicateDot(Coord::yx(1, 1))
        );
        let g = VoxelGrid::filled(&[3, 3], 0.0).unwrap();
        let dots = DotSet::from_yx(&[(3, 0)]).unwrap();
        assert!(matches!(
            dots.check_bounds(&g),
            Err(GridError::OutOfBounds { .. })
        ));
    }
}

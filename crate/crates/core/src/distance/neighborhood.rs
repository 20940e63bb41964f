use super::Spacing;

/// One neighbor offset with its spatial step length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offset {
    /// `[dz, dy, dx]`; `dz` is zero in 2D.
    pub delta: [isize; 3],
    /// Euclidean length of `delta` scaled by the voxel spacing.
    pub step: f64,
}

impl Offset {
    /// True when the offset precedes the center in raster order.
    pub fn is_forward(&self) -> bool {
        self.delta < [0, 0, 0]
    }
}

/// The 8-neighborhood in 2D or the 26-neighborhood in 3D, split into the
/// causal (forward) and anti-causal (backward) halves used by the raster scan.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    forward: Vec<Offset>,
    backward: Vec<Offset>,
}

impl Neighborhood {
    pub fn new(ndim: usize, spacing: &Spacing) -> Self {
        let s = spacing.as_array();
        let zs: &[isize] = if ndim == 3 { &[-1, 0, 1] } else { &[0] };
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for &dz in zs {
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let delta = [dz, dy, dx];
                    if delta == [0, 0, 0] {
                        continue;
                    }
                    let step = delta
                        .iter()
                        .zip(s.iter())
                        .map(|(&d, &h)| (d as f64 * h).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let off = Offset { delta, step };
                    if off.is_forward() {
                        forward.push(off);
                    } else {
                        backward.push(off);
                    }
                }
            }
        }
        Neighborhood { forward, backward }
    }

    pub fn forward(&self) -> &[Offset] {
        &self.forward
    }

    pub fn backward(&self) -> &[Offset] {
        &self.backward
    }

    pub fn len(&self) -> usize {
        self.forward.len() + self.backward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

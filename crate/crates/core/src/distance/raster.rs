use super::{
    finish, validate, DistanceKind, DistanceMap, Neighborhood, Offset, TransformError,
    TransformOptions, INF_SENTINEL,
};
use crate::grid::{DotSet, VoxelGrid};

/// Computes the minimum-path distance map by iterated raster scanning.
///
/// Dots start at zero and every other voxel at [`INF_SENTINEL`]. Each
/// iteration is a forward sweep in raster order that relaxes every voxel
/// against its already-visited neighbors, followed by a backward sweep in
/// reverse order against the remaining neighbors. Iterations repeat until one
/// changes nothing, which is the exact grid-graph shortest path.
///
/// ```
/// use lesiondist::distance::{distance_transform, DistanceKind, TransformOptions};
/// use lesiondist::grid::{DotSet, VoxelGrid};
///
/// let image = VoxelGrid::filled(&[3, 3], 0.0).unwrap();
/// let dots = DotSet::from_yx(&[(1, 1)]).unwrap();
/// let dm = distance_transform(&image, &dots, DistanceKind::Euclidean, &TransformOptions::default()).unwrap();
/// assert_eq!(dm.values()[0], std::f32::consts::SQRT_2);
/// assert_eq!(dm.values()[1], 1.0);
/// ```
pub fn distance_transform(
    image: &VoxelGrid,
    dots: &DotSet,
    kind: DistanceKind,
    opts: &TransformOptions,
) -> Result<DistanceMap, TransformError> {
    if opts.max_passes == 0 {
        return Err(TransformError::ZeroPasses);
    }
    validate(image, dots, &opts.spacing)?;

    let hood = Neighborhood::new(image.ndim(), &opts.spacing);
    let intensity: Vec<f64> = image.data().iter().map(|&v| v as f64).collect();
    let mut dist = vec![INF_SENTINEL; image.len()];
    for &c in dots.iter() {
        dist[image.index(c)] = 0.0;
    }

    let scan = Scan {
        shape: image.shape(),
        intensity: &intensity,
        kind,
    };
    for pass in 1..=opts.max_passes {
        let fwd = scan.sweep(&mut dist, hood.forward(), true);
        let bwd = scan.sweep(&mut dist, hood.backward(), false);
        if !fwd && !bwd {
            return finish(image, dist, kind, Some(pass));
        }
    }
    Err(TransformError::DidNotConverge(opts.max_passes))
}

struct Scan<'a> {
    shape: [usize; 3],
    intensity: &'a [f64],
    kind: DistanceKind,
}

impl Scan<'_> {
    /// One sweep over the grid; returns whether any value decreased.
    fn sweep(&self, dist: &mut [f64], mask: &[Offset], forward: bool) -> bool {
        let [d, h, w] = self.shape;
        let mut changed = false;
        let mut visit = |z: usize, y: usize, x: usize| {
            let i = (z * h + y) * w + x;
            let mut best = dist[i];
            for off in mask {
                let (Some(nz), Some(ny), Some(nx)) = (
                    step(z, off.delta[0], d),
                    step(y, off.delta[1], h),
                    step(x, off.delta[2], w),
                ) else {
                    continue;
                };
                let j = (nz * h + ny) * w + nx;
                if dist[j] >= INF_SENTINEL {
                    continue;
                }
                let di = (self.intensity[i] - self.intensity[j]).abs();
                let cand = dist[j] + self.kind.step_cost(di, off.step);
                if cand < best {
                    best = cand;
                }
            }
            if best < dist[i] {
                dist[i] = best;
                changed = true;
            }
        };
        if forward {
            for z in 0..d {
                for y in 0..h {
                    for x in 0..w {
                        visit(z, y, x);
                    }
                }
            }
        } else {
            for z in (0..d).rev() {
                for y in (0..h).rev() {
                    for x in (0..w).rev() {
                        visit(z, y, x);
                    }
                }
            }
        }
        changed
    }
}

#[inline]
fn step(pos: usize, delta: isize, len: usize) -> Option<usize> {
    let p = pos.checked_add_signed(delta)?;
    (p < len).then_some(p)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::DemGrid;

/// Upper bound on `||grad||^2` for unit-spaced forward differences.
pub const GRADIENT_NORM_SQ_BOUND: f64 = 8.0;

/// A 2-vector per pixel, row-major; `x` runs along columns, `y` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    rows: usize,
    cols: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        VectorField {
            rows,
            cols,
            x: vec![0.0; rows * cols],
            y: vec![0.0; rows * cols],
        }
    }

    pub fn from_parts(rows: usize, cols: usize, x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), rows * cols);
        assert_eq!(y.len(), rows * cols);
        VectorField { rows, cols, x, y }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        self.x[i].hypot(self.y[i])
    }

    pub fn max_magnitude(&self) -> f64 {
        (0..self.len())
            .map(|i| self.magnitude(i))
            .fold(0.0, f64::max)
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        self.x.iter().zip(&other.x).map(|(a, b)| a * b).sum::<f64>()
            + self.y.iter().zip(&other.y).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

#[inline]
fn active(mask: Option<&[bool]>, a: usize, b: usize) -> bool {
    mask.is_none_or(|m| m[a] && m[b])
}

/// Forward differences with Neumann boundary: the last column (row) has a zero
/// x (y) component. A difference that touches a masked-out pixel is zero.
pub fn gradient_of(u: &[f64], rows: usize, cols: usize, mask: Option<&[bool]>) -> VectorField {
    let mut out = VectorField::zeros(rows, cols);
    gradient_into(u, rows, cols, mask, &mut out);
    out
}

pub(crate) fn gradient_into(
    u: &[f64],
    rows: usize,
    cols: usize,
    mask: Option<&[bool]>,
    out: &mut VectorField,
) {
    debug_assert_eq!(u.len(), rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            out.x[i] = if c + 1 < cols && active(mask, i, i + 1) {
                u[i + 1] - u[i]
            } else {
                0.0
            };
            out.y[i] = if r + 1 < rows && active(mask, i, i + cols) {
                u[i + cols] - u[i]
            } else {
                0.0
            };
        }
    }
}

/// Gradient of a DEM grid; nodata pixels take part in no difference.
pub fn gradient(u: &DemGrid) -> VectorField {
    let mask = u.mask();
    gradient_of(u.heights(), u.rows(), u.cols(), Some(&mask))
}

/// Negative adjoint of [`gradient_of`] under the same mask:
/// `<grad u, p> = -<u, div p>` for every `u` and `p`.
pub fn divergence(p: &VectorField, mask: Option<&[bool]>) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    divergence_into(p, mask, &mut out);
    out
}

pub(crate) fn divergence_into(p: &VectorField, mask: Option<&[bool]>, out: &mut [f64]) {
    let (rows, cols) = (p.rows, p.cols);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let mut d = 0.0;
            if c + 1 < cols && active(mask, i, i + 1) {
                d += p.x[i];
            }
            if c > 0 && active(mask, i - 1, i) {
                d -= p.x[i - 1];
            }
            if r + 1 < rows && active(mask, i, i + cols) {
                d += p.y[i];
            }
            if r > 0 && active(mask, i - cols, i) {
                d -= p.y[i - cols];
            }
            out[i] = d;
        }
    }
}

/// Power-iteration estimate of `||grad||^2`, the largest eigenvalue of
/// `-div grad` on an unmasked `rows x cols` grid.
pub fn operator_norm_sq(rows: usize, cols: usize, iterations: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut g = VectorField::zeros(rows, cols);
    let mut w = vec![0.0; rows * cols];
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        gradient_into(&v, rows, cols, None, &mut g);
        divergence_into(&g, None, &mut w);
        // Rayleigh quotient <v, -div grad v> = ||grad v||^2
        estimate = g.dot(&g);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = -wi;
        }
    }
    estimate
}

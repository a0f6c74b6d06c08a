//! Uniform complex grids, centered finite differences, and 2-D FFT helpers.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Uniform N×N grid of cell centers covering the square [−L, L]².
///
/// Node (i, j) sits at z = x_i + i·y_j with x_i = −L + (i+1/2)h,
/// h = 2L/n. Cell centers keep the grid symmetric under z → z̄ and avoid
/// placing a node exactly at the kernel singularity z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Self {
        assert!(n >= 4 && half_width > 0.0);
        Grid { n, half_width }
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.spacing()
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.coord(i), self.coord(j))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All grid points, row-major with i (the x index) fastest.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n {
            for i in 0..self.n {
                out.push(self.point(i, j));
            }
        }
        out
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// ∂f/∂z by centered differences; one-sided at the frame.
    pub fn dz(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (fx, fy) = self.gradient(f);
        fx.iter()
            .zip(&fy)
            .map(|(a, b)| 0.5 * (a - Complex64::i() * b))
            .collect()
    }

    /// ∂f/∂z̄ by centered differences; one-sided at the frame.
    pub fn dzbar(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (fx, fy) = self.gradient(f);
        fx.iter()
            .zip(&fy)
            .map(|(a, b)| 0.5 * (a + Complex64::i() * b))
            .collect()
    }

    pub fn gradient(&self, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        assert_eq!(f.len(), self.len());
        let n = self.n;
        let h = self.spacing();
        let mut fx = vec![Complex64::default(); f.len()];
        let mut fy = vec![Complex64::default(); f.len()];
        for j in 0..n {
            for i in 0..n {
                let k = self.idx(i, j);
                fx[k] = if i == 0 {
                    (f[self.idx(1, j)] - f[k]) / h
                } else if i == n - 1 {
                    (f[k] - f[self.idx(n - 2, j)]) / h
                } else {
                    (f[self.idx(i + 1, j)] - f[self.idx(i - 1, j)]) / (2.0 * h)
                };
                fy[k] = if j == 0 {
                    (f[self.idx(i, 1)] - f[k]) / h
                } else if j == n - 1 {
                    (f[k] - f[self.idx(i, n - 2)]) / h
                } else {
                    (f[self.idx(i, j + 1)] - f[self.idx(i, j - 1)]) / (2.0 * h)
                };
            }
        }
        (fx, fy)
    }

    /// ∂f/∂z by fourth-order centered differences (second-order within two
    /// cells of the frame).
    pub fn dz4(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (fx, fy) = self.gradient4(f);
        fx.iter()
            .zip(&fy)
            .map(|(a, b)| 0.5 * (a - Complex64::i() * b))
            .collect()
    }

    /// ∂f/∂z̄ by fourth-order centered differences.
    pub fn dzbar4(&self, f: &[Complex64]) -> Vec<Complex64> {
        let (fx, fy) = self.gradient4(f);
        fx.iter()
            .zip(&fy)
            .map(|(a, b)| 0.5 * (a + Complex64::i() * b))
            .collect()
    }

    pub fn gradient4(&self, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let (mut fx, mut fy) = self.gradient(f);
        let n = self.n;
        let h = self.spacing();
        for j in 0..n {
            for i in 2..n - 2 {
                let k = self.idx(i, j);
                fx[k] = (-f[self.idx(i + 2, j)] + 8.0 * f[self.idx(i + 1, j)]
                    - 8.0 * f[self.idx(i - 1, j)]
                    + f[self.idx(i - 2, j)])
                    / (12.0 * h);
            }
        }
        for j in 2..n - 2 {
            for i in 0..n {
                let k = self.idx(i, j);
                fy[k] = (-f[self.idx(i, j + 2)] + 8.0 * f[self.idx(i, j + 1)]
                    - 8.0 * f[self.idx(i, j - 1)]
                    + f[self.idx(i, j - 2)])
                    / (12.0 * h);
            }
        }
        (fx, fy)
    }

    /// Five-point Laplacian; the outermost frame is copied from its inward
    /// neighbor (callers only use the interior).
    pub fn laplacian(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.len());
        let n = self.n;
        let h2 = self.spacing() * self.spacing();
        let mut out = vec![Complex64::default(); f.len()];
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = self.idx(i, j);
                out[k] = (f[self.idx(i + 1, j)]
                    + f[self.idx(i - 1, j)]
                    + f[self.idx(i, j + 1)]
                    + f[self.idx(i, j - 1)]
                    - 4.0 * f[k])
                    / h2;
            }
        }
        for i in 0..n {
            out[self.idx(i, 0)] = out[self.idx(i, 1)];
            out[self.idx(i, n - 1)] = out[self.idx(i, n - 2)];
            out[self.idx(0, i)] = out[self.idx(1, i)];
            out[self.idx(n - 1, i)] = out[self.idx(n - 2, i)];
        }
        out
    }

    /// Bilinear interpolation of a gridded field at an arbitrary point.
    pub fn interp(&self, f: &[Complex64], z: Complex64) -> Complex64 {
        let h = self.spacing();
        let fx = (z.re + self.half_width) / h - 0.5;
        let fy = (z.im + self.half_width) / h - 0.5;
        let clamp = |v: f64| v.max(0.0).min(self.n as f64 - 1.0);
        let fx = clamp(fx);
        let fy = clamp(fy);
        let i0 = (fx.floor() as usize).min(self.n - 2);
        let j0 = (fy.floor() as usize).min(self.n - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let f00 = f[self.idx(i0, j0)];
        let f10 = f[self.idx(i0 + 1, j0)];
        let f01 = f[self.idx(i0, j0 + 1)];
        let f11 = f[self.idx(i0 + 1, j0 + 1)];
        f00 * (1.0 - tx) * (1.0 - ty) + f10 * tx * (1.0 - ty) + f01 * (1.0 - tx) * ty
            + f11 * tx * ty
    }
}

/// In-place 2-D FFT of a row-major n×n complex array.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n);
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // rows
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    // columns via transpose
    let mut col = vec![Complex64::default(); n];
    for i in 0..n {
        for j in 0..n {
            col[j] = data[j * n + i];
        }
        fft.process(&mut col);
        for j in 0..n {
            data[j * n + i] = col[j];
        }
    }
    if inverse {
        let s = 1.0 / (n * n) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Linear (non-circular) convolution of an n×n field with a kernel sampled
/// on displacement offsets in [−n, n)², both embedded in a 2n×2n torus.
/// The field must be supported so that no wrap-around reaches it; with the
/// kernel sampled on the full displacement range the result is exact.
pub struct Convolver {
    pub n: usize,
    kernel_hat: Vec<Complex64>,
}

impl Convolver {
    /// `kernel(dx_cells, dy_cells)` gives the kernel at a displacement of
    /// whole cells (range −n..n in each direction).
    pub fn new(n: usize, kernel: impl Fn(i64, i64) -> Complex64) -> Self {
        let m = 2 * n;
        let mut k = vec![Complex64::default(); m * m];
        for j in 0..m {
            // torus index -> signed displacement
            let dy = if j < n { j as i64 } else { j as i64 - m as i64 };
            for i in 0..m {
                let dx = if i < n { i as i64 } else { i as i64 - m as i64 };
                k[j * m + i] = kernel(dx, dy);
            }
        }
        fft2(&mut k, m, false);
        Convolver { n, kernel_hat: k }
    }

    /// Σ_ξ kernel(z−ξ) f(ξ) over the n×n grid, returned on the same grid.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let m = 2 * n;
        assert_eq!(f.len(), n * n);
        let mut buf = vec![Complex64::default(); m * m];
        for j in 0..n {
            buf[j * m..j * m + n].copy_from_slice(&f[j * n..(j + 1) * n]);
        }
        fft2(&mut buf, m, false);
        for (v, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *v *= *k;
        }
        fft2(&mut buf, m, true);
        let mut out = vec![Complex64::default(); n * n];
        for j in 0..n {
            out[j * n..(j + 1) * n].copy_from_slice(&buf[j * m..j * m + n]);
        }
        out
    }
}

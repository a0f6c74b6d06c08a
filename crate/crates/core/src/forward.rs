//! Forward conductivity solver on the unit disk and assembly of the
//! Dirichlet-to-Neumann data.
//!
//! The disk is discretised on a polar grid with staggered radial nodes
//! `r_i = (i + 1/2) h`, `h = 1/(m_r - 1/2)`, so the last node sits exactly on
//! the boundary circle and no node sits at the origin.  The divergence-form
//! operator `div(sigma grad u)` is discretised with conservative radial
//! fluxes through the circles `r = i h` (the flux through `r = 0` vanishes
//! identically, which removes any special casing at the origin) and a
//! pseudospectral angular derivative.  The scheme reproduces the harmonic
//! polynomials `Re z` and `Re z^2` exactly.
//!
//! For radial conductivities the angular Fourier modes decouple and each mode
//! amplitude solves a real tridiagonal system.  For general conductivities
//! the same mode-wise solve with the angular mean of sigma serves as a
//! preconditioner for GMRES.
//!
//! The boundary data object stores two dense nodal matrices: `phi` maps
//! boundary values to the complex trace `(1/2i)(d_nu + i d_tau) u` of the
//! solution for the measured conductivity, and `phi0` is the same map for
//! the homogeneous disk.  Only the difference `phi - phi0` enters the
//! reconstruction; it is smoothing, while each matrix alone carries a
//! logarithmic singularity on the diagonal.

use crate::conductivity::ConductivityField;
use crate::krylov::{self, GmresOptions, KrylovError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error("forward solve failed for angular mode {mode}: {source}")]
    Solver {
        mode: i64,
        #[source]
        source: KrylovError,
    },
    #[error("boundary data has {got} nodes, solver expects {expected}")]
    BoundaryLength { expected: usize, got: usize },
    #[error("polar resolution too small: need m_r >= 4 and even k_theta >= 8")]
    Resolution,
}

fn mode_number(idx: usize, k: usize) -> i64 {
    if idx <= k / 2 {
        idx as i64
    } else {
        idx as i64 - k as i64
    }
}

/// Solution field on the polar grid, stored radial-row major
/// (`values[i * k_theta + j]` at radius `(i + 1/2) h`, angle `2 pi j / k_theta`).
#[derive(Debug, Clone)]
pub struct PolarField {
    pub m_r: usize,
    pub k_theta: usize,
    pub h: f64,
    pub values: Vec<Complex64>,
}

impl PolarField {
    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    pub fn at_node(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.k_theta + j]
    }

    pub fn boundary_row(&self) -> &[Complex64] {
        &self.values[(self.m_r - 1) * self.k_theta..]
    }

    /// Bilinear interpolation in (r, theta).  Radii below the innermost node
    /// are handled by continuing each ray through the origin onto the
    /// antipodal ray, so the interpolation stays second order at the center.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let k = self.k_theta;
        let r = z.norm().min(1.0);
        let theta = z.im.atan2(z.re);
        let t = theta / (2.0 * PI) * k as f64;
        let jf = t.floor();
        let wt = t - jf;
        let j0 = (jf as i64).rem_euclid(k as i64) as usize;
        let j1 = (j0 + 1) % k;

        let x = r / self.h - 0.5;
        let sample = |xi: i64, j: usize| -> Complex64 {
            if xi >= 0 {
                let i = (xi as usize).min(self.m_r - 1);
                self.at_node(i, j)
            } else {
                // node at radius -r on this ray is the antipodal node
                self.at_node((-1 - xi) as usize, (j + k / 2) % k)
            }
        };
        let i0 = x.floor() as i64;
        let wr = x - i0 as f64;
        let f0 = sample(i0, j0) * (1.0 - wr) + sample(i0 + 1, j0) * wr;
        let f1 = sample(i0, j1) * (1.0 - wr) + sample(i0 + 1, j1) * wr;
        f0 * (1.0 - wt) + f1 * wt
    }
}

pub struct ForwardSolver {
    pub m_r: usize,
    pub k_theta: usize,
    pub h: f64,
    radial: bool,
    /// sigma at grid nodes, row major.
    sigma_node: Vec<f64>,
    /// sigma on the flux circles `r = i h`, row major; row 0 is unused.
    sigma_half: Vec<f64>,
    sigma_node_mean: Vec<f64>,
    sigma_half_mean: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl ForwardSolver {
    pub fn new(
        sigma: &ConductivityField,
        m_r: usize,
        k_theta: usize,
    ) -> Result<Self, ForwardError> {
        if m_r < 4 || k_theta < 8 || k_theta % 2 != 0 {
            return Err(ForwardError::Resolution);
        }
        let h = 1.0 / (m_r as f64 - 0.5);
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(k_theta);
        let fft_inv = planner.plan_fft_inverse(k_theta);

        let mut sigma_node = vec![0.0; m_r * k_theta];
        let mut sigma_half = vec![0.0; m_r * k_theta];
        for i in 0..m_r {
            let rn = (i as f64 + 0.5) * h;
            let rh = i as f64 * h;
            for j in 0..k_theta {
                let theta = 2.0 * PI * j as f64 / k_theta as f64;
                let dir = Complex64::from_polar(1.0, theta);
                sigma_node[i * k_theta + j] = sigma.sigma(rn * dir);
                sigma_half[i * k_theta + j] = sigma.sigma(rh * dir);
            }
        }
        let mean = |row: &[f64]| row.iter().sum::<f64>() / k_theta as f64;
        let sigma_node_mean: Vec<f64> = (0..m_r)
            .map(|i| mean(&sigma_node[i * k_theta..(i + 1) * k_theta]))
            .collect();
        let sigma_half_mean: Vec<f64> = (0..m_r)
            .map(|i| mean(&sigma_half[i * k_theta..(i + 1) * k_theta]))
            .collect();

        Ok(ForwardSolver {
            m_r,
            k_theta,
            h,
            radial: sigma.is_radial(),
            sigma_node,
            sigma_half,
            sigma_node_mean,
            sigma_half_mean,
            fft_fwd,
            fft_inv,
        })
    }

    fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    fn fft_forward_norm(&self, row: &mut [Complex64]) {
        self.fft_fwd.process(row);
        let scale = 1.0 / self.k_theta as f64;
        for v in row.iter_mut() {
            *v *= scale;
        }
    }

    fn fft_inverse_raw(&self, row: &mut [Complex64]) {
        self.fft_inv.process(row);
    }

    /// Spectral d/dtheta of one angular row (Nyquist mode dropped).
    fn dtheta(&self, row: &[Complex64]) -> Vec<Complex64> {
        let k = self.k_theta;
        let mut hat = row.to_vec();
        self.fft_forward_norm(&mut hat);
        for (idx, v) in hat.iter_mut().enumerate() {
            if idx == k / 2 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                let n = mode_number(idx, k) as f64;
                *v *= Complex64::new(0.0, n);
            }
        }
        self.fft_inverse_raw(&mut hat);
        hat
    }

    /// Tridiagonal coefficients of the mode-`n` radial problem with the
    /// angular mean of sigma; rows are the `m_r - 1` interior nodes.
    fn mode_coeffs(&self, n: i64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mi = self.m_r - 1;
        let h = self.h;
        let n2 = (n * n) as f64;
        let mut sub = vec![0.0; mi];
        let mut diag = vec![0.0; mi];
        let mut sup = vec![0.0; mi];
        for i in 0..mi {
            let r = self.radius(i);
            let lo = i as f64 * h * self.sigma_half_mean[i] / (h * h * r);
            let hi = (i as f64 + 1.0) * h * self.sigma_half_mean[i + 1] / (h * h * r);
            sub[i] = lo;
            sup[i] = hi;
            diag[i] = -(lo + hi) - n2 * self.sigma_node_mean[i] / (r * r);
        }
        (sub, diag, sup)
    }

    /// Coupling of the topmost interior row to the boundary node on the same
    /// ray (per-ray sigma version).
    fn boundary_coupling(&self, j: usize) -> f64 {
        let mi = self.m_r - 1;
        let h = self.h;
        mi as f64 * h * self.sigma_half[mi * self.k_theta + j] / (h * h * self.radius(mi - 1))
    }

    /// Apply the interior operator `div(sigma grad)` with zero boundary
    /// values; input and output are the `(m_r - 1) * k_theta` interior nodes.
    fn apply_interior(&self, u: &[Complex64]) -> Vec<Complex64> {
        let k = self.k_theta;
        let mi = self.m_r - 1;
        let h = self.h;
        let mut out = vec![Complex64::new(0.0, 0.0); mi * k];
        for i in 0..mi {
            let r = self.radius(i);
            let row = &u[i * k..(i + 1) * k];
            let d1 = self.dtheta(row);
            let weighted: Vec<Complex64> = d1
                .iter()
                .zip(&self.sigma_node[i * k..(i + 1) * k])
                .map(|(v, s)| v * *s)
                .collect();
            let d2 = self.dtheta(&weighted);
            for j in 0..k {
                let u_c = row[j];
                let flux_lo = if i == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    i as f64 * h * self.sigma_half[i * k + j] * (u_c - u[(i - 1) * k + j]) / h
                };
                let u_up = if i + 1 < mi {
                    u[(i + 1) * k + j]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let flux_hi =
                    (i as f64 + 1.0) * h * self.sigma_half[(i + 1) * k + j] * (u_up - u_c) / h;
                out[i * k + j] = (flux_hi - flux_lo) / (h * r) + d2[j] / (r * r);
            }
        }
        out
    }

    /// Mode-wise solve with the angular mean of sigma; exact inverse for
    /// radial conductivities, preconditioner otherwise.  `rhs` covers the
    /// interior nodes.
    fn mean_solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let k = self.k_theta;
        let mi = self.m_r - 1;
        let mut hat = rhs.to_vec();
        for i in 0..mi {
            self.fft_forward_norm(&mut hat[i * k..(i + 1) * k]);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); mi * k];
        for idx in 0..k {
            let n = mode_number(idx, k);
            let (sub, diag, sup) = self.mode_coeffs(n);
            let col: Vec<Complex64> = (0..mi).map(|i| hat[i * k + idx]).collect();
            let sol = thomas(&sub, &diag, &sup, &col);
            for i in 0..mi {
                out[i * k + idx] = sol[i];
            }
        }
        for i in 0..mi {
            self.fft_inverse_raw(&mut out[i * k..(i + 1) * k]);
        }
        out
    }

    /// Solve the Dirichlet problem `div(sigma grad u) = 0`, `u = boundary` on
    /// the unit circle.
    pub fn solve_dirichlet(&self, boundary: &[Complex64]) -> Result<PolarField, ForwardError> {
        let k = self.k_theta;
        let mi = self.m_r - 1;
        if boundary.len() != k {
            return Err(ForwardError::BoundaryLength {
                expected: k,
                got: boundary.len(),
            });
        }

        // rhs of A u = -C g: the boundary value enters only through the
        // topmost radial flux.
        let mut rhs = vec![Complex64::new(0.0, 0.0); mi * k];
        for j in 0..k {
            rhs[(mi - 1) * k + j] = -self.boundary_coupling(j) * boundary[j];
        }

        let interior = if self.radial {
            self.mean_solve(&rhs)
        } else {
            // left-preconditioned GMRES: solve (P^-1 A) u = P^-1 rhs
            let b = krylov::c_to_r(&self.mean_solve(&rhs));
            let mut x = b.clone();
            let apply = |v: &[f64]| {
                let u = krylov::r_to_c(v);
                krylov::c_to_r(&self.mean_solve(&self.apply_interior(&u)))
            };
            let opts = GmresOptions {
                tol: 1e-12,
                max_iters: 300,
                restart: 60,
            };
            gmres_checked(apply, &b, &mut x, &opts)?;
            krylov::r_to_c(&x)
        };

        let mut values = interior;
        values.extend_from_slice(boundary);
        Ok(PolarField {
            m_r: self.m_r,
            k_theta: k,
            h: self.h,
            values,
        })
    }

    /// Complex trace `(1/2i)(d_nu + i d_tau) u` at the boundary nodes.
    /// The normal derivative uses a one-sided three-point stencil (exact on
    /// the discrete harmonic polynomials up to degree two), the tangential
    /// derivative is spectral.
    pub fn boundary_trace(&self, field: &PolarField) -> Vec<Complex64> {
        let k = self.k_theta;
        let m = self.m_r;
        let h = self.h;
        let row_b = &field.values[(m - 1) * k..];
        let row_1 = &field.values[(m - 2) * k..(m - 1) * k];
        let row_2 = &field.values[(m - 3) * k..(m - 2) * k];
        let dtau = self.dtheta(row_b);
        (0..k)
            .map(|j| {
                let dnu = (3.0 * row_b[j] - 4.0 * row_1[j] + row_2[j]) / (2.0 * h);
                Complex64::new(0.0, -0.5) * dnu + 0.5 * dtau[j]
            })
            .collect()
    }

    /// Nodal matrix of the trace map, assembled column-wise in the
    /// trigonometric basis and converted to the nodal basis by DFT.
    fn assemble_trace_matrix(&self) -> Result<Vec<Complex64>, ForwardError> {
        let k = self.k_theta;
        let traces: Vec<Vec<Complex64>> = (0..k)
            .into_par_iter()
            .map(|idx| {
                let n = mode_number(idx, k) as f64;
                let g: Vec<Complex64> = (0..k)
                    .map(|j| {
                        Complex64::from_polar(1.0, n * 2.0 * PI * j as f64 / k as f64)
                    })
                    .collect();
                let field = self.solve_dirichlet(&g)?;
                Ok(self.boundary_trace(&field))
            })
            .collect::<Result<_, ForwardError>>()?;

        // Phi[p][j] = (1/k) sum_idx trace_idx[p] e^{-2 pi i idx j / k}
        let mut matrix = vec![Complex64::new(0.0, 0.0); k * k];
        for p in 0..k {
            let mut row: Vec<Complex64> = (0..k).map(|idx| traces[idx][p]).collect();
            self.fft_fwd.process(&mut row);
            let scale = 1.0 / k as f64;
            for (j, v) in row.iter().enumerate() {
                matrix[p * k + j] = v * scale;
            }
        }
        Ok(matrix)
    }

    /// Assemble the boundary data pair (phi for this conductivity, phi0 for
    /// the homogeneous disk at the same resolution).
    pub fn dtn_operators(&self) -> Result<DtnData, ForwardError> {
        let phi = self.assemble_trace_matrix()?;
        let unit = ForwardSolver::new(
            &ConductivityField::named("constant").expect("constant preset"),
            self.m_r,
            self.k_theta,
        )?;
        let phi0 = unit.assemble_trace_matrix()?;
        Ok(DtnData {
            n_b: self.k_theta,
            phi,
            phi0,
        })
    }
}

fn gmres_checked(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<(), ForwardError> {
    krylov::gmres(apply, b, x, opts)
        .map(|_| ())
        .map_err(|source| ForwardError::Solver { mode: -1, source })
}

/// Complex tridiagonal solve (Thomas algorithm) with real bands.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - d[i - 1] * sub[i]) / denom;
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - x[i + 1] * c[i];
    }
    x
}

/// Boundary measurement data: dense nodal matrices on the equispaced circle
/// nodes, mapping boundary values to the complex trace.
#[derive(Debug, Clone)]
pub struct DtnData {
    pub n_b: usize,
    /// trace map for the measured conductivity, row major n_b x n_b
    pub phi: Vec<Complex64>,
    /// trace map for sigma = 1
    pub phi0: Vec<Complex64>,
}

impl DtnData {
    fn mat_apply(matrix: &[Complex64], n: usize, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), n);
        (0..n)
            .map(|p| {
                matrix[p * n..(p + 1) * n]
                    .iter()
                    .zip(values)
                    .map(|(m, v)| m * v)
                    .sum()
            })
            .collect()
    }

    pub fn apply_phi(&self, values: &[Complex64]) -> Vec<Complex64> {
        Self::mat_apply(&self.phi, self.n_b, values)
    }

    pub fn apply_phi0(&self, values: &[Complex64]) -> Vec<Complex64> {
        Self::mat_apply(&self.phi0, self.n_b, values)
    }

    /// Apply the smoothing difference phi - phi0.
    pub fn apply_diff(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n_b);
        (0..self.n_b)
            .map(|p| {
                let row = p * self.n_b;
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (self.phi[row + j] - self.phi0[row + j]) * v)
                    .sum()
            })
            .collect()
    }

    pub fn diff_max_norm(&self) -> f64 {
        self.phi
            .iter()
            .zip(&self.phi0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Additive complex Gaussian noise on the measured matrix phi.  The
    /// per-entry standard deviation is `level` times the RMS entry of the
    /// signal part phi - phi0, so `level` reads as a relative data error.
    pub fn add_noise(&mut self, level: f64, seed: u64) {
        if level == 0.0 {
            return;
        }
        let n2 = (self.n_b * self.n_b) as f64;
        let rms = (self
            .phi
            .iter()
            .zip(&self.phi0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / n2)
            .sqrt();
        let sd = level * rms;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = || {
            // Box-Muller
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen::<f64>();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        };
        for v in self.phi.iter_mut() {
            let re = gauss();
            let im = gauss();
            *v += sd / 2f64.sqrt() * Complex64::new(re, im);
        }
    }

    /// Ratio of the measured kernel difference to the logarithmic
    /// singularity, sampled on near-diagonal node pairs (chord distance up to
    /// ten boundary spacings).  The kernel estimate divides the nodal matrix
    /// entry by the arclength weight.
    pub fn singularity_profile(&self) -> SingularityReport {
        self.singularity_profile_window(10.0 * 2.0 * PI / self.n_b as f64)
    }

    /// Same ratio restricted to node pairs with chord distance below
    /// `chord_max`.  A fixed physical window makes the report comparable
    /// across boundary resolutions.
    pub fn singularity_profile_window(&self, chord_max: f64) -> SingularityReport {
        let n = self.n_b;
        let ds = 2.0 * PI / n as f64;
        let mut max_ratio: f64 = 0.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        for p in 0..n {
            let zp = Complex64::from_polar(1.0, 2.0 * PI * p as f64 / n as f64);
            for j in 0..n {
                if p == j {
                    continue;
                }
                let zj = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
                let chord = (zp - zj).norm();
                if chord > chord_max {
                    continue;
                }
                let kernel = (self.phi[p * n + j] - self.phi0[p * n + j]).norm() / ds;
                let ratio = kernel / chord.ln().abs();
                max_ratio = max_ratio.max(ratio);
                sum += ratio;
                count += 1;
            }
        }
        SingularityReport {
            max_ratio,
            mean_ratio: if count > 0 { sum / count as f64 } else { 0.0 },
            pair_count: count,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SingularityReport {
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub pair_count: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductivity::ConductivityField;

    fn nodal(k: usize, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        (0..k).map(|j| f(2.0 * PI * j as f64 / k as f64)).collect()
    }

    #[test]
    fn harmonic_polynomials_are_exact() {
        let sigma = ConductivityField::named("constant").unwrap();
        let solver = ForwardSolver::new(&sigma, 48, 64).unwrap();

        let cases: [(f64, Box<dyn Fn(f64, f64) -> f64>); 2] = [
            (1.0, Box::new(|r, t| r * t.cos())),
            (2.0, Box::new(|r, t| r * r * (2.0 * t).cos())),
        ];
        for (n, exact) in cases {
            let data = nodal(64, |t| Complex64::new((n * t).cos(), 0.0));
            let field = solver.solve_dirichlet(&data).unwrap();
            let mut err: f64 = 0.0;
            for i in 0..field.m_r {
                for j in 0..field.k_theta {
                    let t = 2.0 * PI * j as f64 / field.k_theta as f64;
                    err = err.max((field.at_node(i, j).re - exact(field.radius(i), t)).abs());
                }
            }
            assert!(err < 1e-6, "degree {n} harmonic error {err:.3e}");
        }
    }

    #[test]
    fn phi0_annihilates_holomorphic_traces() {
        let sigma = ConductivityField::named("constant").unwrap();
        let solver = ForwardSolver::new(&sigma, 48, 64).unwrap();
        let dtn = solver.dtn_operators().unwrap();

        // z and z^2 are holomorphic: the dbar trace vanishes
        for n in [1.0, 2.0] {
            let data = nodal(64, |t| Complex64::from_polar(1.0, n * t));
            let out = dtn.apply_phi0(&data);
            let err = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "holomorphic mode {n} trace {err:.3e}");
        }
        // conj(z)^|n| has trace i n e^{i n t} for n < 0
        for n in [-1.0f64, -2.0] {
            let data = nodal(64, |t| Complex64::from_polar(1.0, n * t));
            let out = dtn.apply_phi0(&data);
            let err = (0..64)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / 64.0;
                    (out[j] - Complex64::new(0.0, n) * Complex64::from_polar(1.0, n * t)).norm()
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "antiholomorphic mode {n} trace error {err:.3e}");
        }
    }

    #[test]
    fn unit_sigma_data_difference_vanishes() {
        let sigma = ConductivityField::named("constant").unwrap();
        let solver = ForwardSolver::new(&sigma, 40, 32).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        assert!(dtn.diff_max_norm() < 1e-13);
    }

    /// Independent oracle for a radial conductivity: the n = 1 mode amplitude
    /// solves (r sigma u')' - sigma u / r = 0 with the regular behaviour
    /// u ~ c r at the origin; integrate it with a fine RK4 shooting pass.
    #[test]
    fn radial_sigma_matches_ode_shooting_oracle() {
        let sigma = ConductivityField::named("gaussian").unwrap();
        assert!(sigma.is_radial());

        // first-order system for y = (u, v), v = r sigma u'
        let deriv = |r: f64, y: [f64; 2]| -> [f64; 2] {
            let s = sigma.sigma(Complex64::new(r, 0.0));
            [y[1] / (r * s), s * y[0] / r]
        };
        let mut r = 1e-8;
        let mut y = [r, sigma.sigma(Complex64::new(r, 0.0)) * r];
        let hs = 1e-5;
        let mut samples: Vec<(f64, f64)> = Vec::new();
        while r < 1.0 - 0.5 * hs {
            let k1 = deriv(r, y);
            let k2 = deriv(r + 0.5 * hs, [y[0] + 0.5 * hs * k1[0], y[1] + 0.5 * hs * k1[1]]);
            let k3 = deriv(r + 0.5 * hs, [y[0] + 0.5 * hs * k2[0], y[1] + 0.5 * hs * k2[1]]);
            let k4 = deriv(r + hs, [y[0] + hs * k3[0], y[1] + hs * k3[1]]);
            y[0] += hs / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += hs / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            r += hs;
            samples.push((r, y[0]));
        }
        let u_boundary = y[0];

        let m_r = 256;
        let k = 16;
        let solver = ForwardSolver::new(&sigma, m_r, k).unwrap();
        let data = nodal(k, |t| Complex64::new(t.cos(), 0.0));
        let field = solver.solve_dirichlet(&data).unwrap();

        let mut err: f64 = 0.0;
        for i in 0..m_r {
            let ri = field.radius(i);
            let idx = samples.partition_point(|(rs, _)| *rs < ri);
            let idx = idx.min(samples.len() - 1);
            let oracle = samples[idx].1 / u_boundary;
            err = err.max((field.at_node(i, 0).re - oracle).abs());
        }
        assert!(err < 1e-4, "radial mode error vs shooting oracle {err:.3e}");
    }

    #[test]
    fn general_sigma_dtn_is_symmetric() {
        let sigma = ConductivityField::named("two-bump").unwrap();
        assert!(!sigma.is_radial());
        let k = 32;
        let solver = ForwardSolver::new(&sigma, 48, k).unwrap();
        let dtn = solver.dtn_operators().unwrap();

        // for real data the normal derivative is -2 Im(trace); the bilinear
        // form <Lambda u, v> must be symmetric
        let u = nodal(k, |t| Complex64::new(t.cos(), 0.0));
        let v = nodal(k, |t| Complex64::new((2.0 * t).cos() + 0.3 * (5.0 * t).sin(), 0.0));
        let lam = |w: &[Complex64]| -> Vec<f64> {
            dtn.apply_phi(w).iter().map(|t| -2.0 * t.im).collect()
        };
        let pair = |a: &[f64], b: &[Complex64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| x * y.re).sum::<f64>()
        };
        let s1 = pair(&lam(&u), &v);
        let s2 = pair(&lam(&v), &u);
        let scale = s1.abs().max(s2.abs()).max(1e-12);
        assert!(
            (s1 - s2).abs() / scale < 5e-3,
            "DtN asymmetry {} vs {}",
            s1,
            s2
        );

        // constants are in the kernel
        let ones = vec![Complex64::new(1.0, 0.0); k];
        let out = dtn.apply_phi(&ones);
        let err = out.iter().map(|t| t.norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "trace of a constant {err:.3e}");
    }

    #[test]
    fn interpolation_is_smooth_through_the_center() {
        let sigma = ConductivityField::named("constant").unwrap();
        let solver = ForwardSolver::new(&sigma, 64, 64).unwrap();
        let data = nodal(64, |t| Complex64::new(t.cos(), 0.0));
        let field = solver.solve_dirichlet(&data).unwrap();
        for x in [-0.012, -0.004, 0.0, 0.003, 0.011] {
            let z = Complex64::new(x, 0.0005);
            let err = (field.eval(z) - Complex64::new(z.re, 0.0)).norm();
            assert!(err < 1e-3, "center interpolation at {z}: {err:.3e}");
        }
    }

    #[test]
    fn noise_is_seeded_and_scaled() {
        let sigma = ConductivityField::named("gaussian").unwrap();
        let solver = ForwardSolver::new(&sigma, 32, 16).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        let mut a = dtn.clone();
        let mut b = dtn.clone();
        a.add_noise(0.01, 7);
        b.add_noise(0.01, 7);
        assert_eq!(a.phi, b.phi);

        let mut c = dtn.clone();
        c.add_noise(0.01, 8);
        assert_ne!(a.phi, c.phi);

        let delta: f64 = a
            .phi
            .iter()
            .zip(&dtn.phi)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let signal: f64 = dtn
            .phi
            .iter()
            .zip(&dtn.phi0)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let rel = delta / signal;
        assert!(rel > 0.003 && rel < 0.03, "noise level off: {rel:.3e}");
    }

    #[test]
    fn singularity_profile_reports_pairs() {
        let sigma = ConductivityField::named("gaussian").unwrap();
        let solver = ForwardSolver::new(&sigma, 48, 64).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        let report = dtn.singularity_profile();
        assert!(report.pair_count > 0);
        assert!(report.max_ratio.is_finite() && report.max_ratio > 0.0);
    }
}

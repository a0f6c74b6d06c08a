//! Boundary integral equation for the complex-geometrical-optics traces.
//!
//! Given the boundary data pair (phi, phi0) the trace of the CGO solution on
//! the unit circle solves the Fredholm equation
//!
//! ```text
//! psi(z) = e^{lambda z} - 2i oint G_lambda(z, xi) [(phi - phi0) psi](xi) ds(xi)
//! ```
//!
//! where `G_lambda(z, xi) = e^{lambda (z - xi)} g(z - xi, lambda)` is the
//! real-valued conjugated Faddeev-Green kernel.  The kernel carries the log
//! singularity `log|z - xi| / (-2 pi)` on the diagonal; the quadrature splits
//! it off and integrates it with the trigonometric product rule (Kress
//! weights), leaving a smooth remainder for the trapezoid rule.  The resulting
//! Nystrom system is dense and is solved by direct LU factorisation.

use crate::conventions::EULER_GAMMA;
use crate::faddeev_kernel::green_g_conjugated;
use crate::forward::DtnData;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("Nystrom matrix is numerically singular at lambda = {lambda}")]
    SingularSystem { lambda: Complex64 },
    #[error("spectral parameter lambda = 0 is outside the CGO family")]
    LambdaZero,
    #[error("boundary node count must be even and at least 8, got {0}")]
    BadNodeCount(usize),
}

/// Diagnostic switch for the self-test: `FlippedDataSign` replaces the
/// smoothing difference phi - phi0 by phi + phi0, which must visibly break
/// the homogeneous-disk identity psi = e^{lambda z}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryVariant {
    Standard,
    FlippedDataSign,
}

/// CGO trace on the equispaced circle nodes.
#[derive(Debug, Clone)]
pub struct BoundaryPsi {
    pub lambda: Complex64,
    pub n_b: usize,
    /// psi at the boundary nodes
    pub values: Vec<Complex64>,
    /// incident trace e^{lambda z} at the same nodes
    pub incident: Vec<Complex64>,
}

impl BoundaryPsi {
    pub fn node(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * j as f64 / self.n_b as f64)
    }

    /// Relative L2(boundary) distance to a reference trace.
    pub fn relative_l2_error(&self, reference: &[Complex64]) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    /// Relative L2(boundary) deviation from the incident exponential.
    pub fn scattered_fraction(&self) -> f64 {
        self.relative_l2_error(&self.incident.clone())
    }
}

/// Product-integration weights `R_d` for the periodic logarithm: with
/// `t_d = 2 pi d / n`,
///
/// ```text
/// int_0^{2pi} ln(4 sin^2((t - tau)/2)) f(tau) dtau ~ sum_j R_{|j-p|} f(t_j)
/// ```
///
/// exact for trigonometric polynomials of degree below n/2.
pub fn kress_log_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    (0..n)
        .map(|d| {
            let t = 2.0 * PI * d as f64 / n as f64;
            let mut s = 0.0;
            for m in 1..half {
                s += (m as f64 * t).cos() / m as f64;
            }
            s += (half as f64 * t).cos() / n as f64;
            -4.0 * PI / n as f64 * s
        })
        .collect()
}

/// Dense quadrature matrix W with `(W f)_p ~ oint G_lambda(z_p, xi) f(xi) ds`
/// on the equispaced circle nodes; rows are target points.
pub fn green_quadrature(lambda: Complex64, n_b: usize) -> Result<Vec<f64>, BoundaryError> {
    if n_b < 8 || n_b % 2 != 0 {
        return Err(BoundaryError::BadNodeCount(n_b));
    }
    if lambda.norm() == 0.0 {
        return Err(BoundaryError::LambdaZero);
    }
    let c = -1.0 / (2.0 * PI); // log coefficient of the kernel
    let log_weights = kress_log_weights(n_b);
    let dtheta = 2.0 * PI / n_b as f64;
    let nodes: Vec<Complex64> = (0..n_b)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n_b as f64))
        .collect();
    let diag_smooth = c * (EULER_GAMMA + lambda.norm().ln());

    let mut w = vec![0.0; n_b * n_b];
    for p in 0..n_b {
        for j in 0..n_b {
            let d = (j + n_b - p) % n_b;
            let smooth = if p == j {
                diag_smooth
            } else {
                let delta = nodes[p] - nodes[j];
                green_g_conjugated(delta, lambda) - c * delta.norm().ln()
            };
            // ln|z_p - z_j| = (1/2) ln(4 sin^2((t_p - t_j)/2))
            w[p * n_b + j] = 0.5 * c * log_weights[d] + dtheta * smooth;
        }
    }
    Ok(w)
}

fn incident_trace(lambda: Complex64, n_b: usize) -> Vec<Complex64> {
    (0..n_b)
        .map(|j| (lambda * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n_b as f64)).exp())
        .collect()
}

/// Solve the boundary equation for the CGO trace at one spectral parameter.
pub fn solve_psi_boundary(
    dtn: &DtnData,
    lambda: Complex64,
) -> Result<BoundaryPsi, BoundaryError> {
    solve_psi_boundary_variant(dtn, lambda, BoundaryVariant::Standard)
}

pub fn solve_psi_boundary_variant(
    dtn: &DtnData,
    lambda: Complex64,
    variant: BoundaryVariant,
) -> Result<BoundaryPsi, BoundaryError> {
    let n = dtn.n_b;
    let w = green_quadrature(lambda, n)?;

    // data matrix: phi - phi0 (or the mutated phi + phi0)
    let data: Vec<Complex64> = dtn
        .phi
        .iter()
        .zip(&dtn.phi0)
        .map(|(a, b)| match variant {
            BoundaryVariant::Standard => a - b,
            BoundaryVariant::FlippedDataSign => a + b,
        })
        .collect();

    // system matrix M = I + 2i W D
    let two_i = Complex64::new(0.0, 2.0);
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for p in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += w[p * n + k] * data[k * n + j];
            }
            m[p * n + j] = two_i * acc;
        }
        m[p * n + p] += 1.0;
    }

    let incident = incident_trace(lambda, n);
    let values = lu_solve(m, incident.clone(), n)
        .ok_or(BoundaryError::SingularSystem { lambda })?;
    Ok(BoundaryPsi {
        lambda,
        n_b: n,
        values,
        incident,
    })
}

/// Solve the boundary equation for many spectral parameters in parallel.
pub fn solve_psi_sweep(
    dtn: &DtnData,
    lambdas: &[Complex64],
) -> Result<Vec<BoundaryPsi>, BoundaryError> {
    lambdas
        .par_iter()
        .map(|&lam| solve_psi_boundary(dtn, lam))
        .collect()
}

/// Evaluate the CGO solution off the measurement circle through the same
/// representation formula; valid away from the boundary (the kernel is smooth
/// there, accuracy degrades within a few node spacings of the circle).
pub fn extend_psi(dtn: &DtnData, psi: &BoundaryPsi, z: Complex64) -> Complex64 {
    let n = psi.n_b;
    let lambda = psi.lambda;
    let h = {
        let d: Vec<Complex64> = dtn
            .phi
            .iter()
            .zip(&dtn.phi0)
            .map(|(a, b)| a - b)
            .collect();
        (0..n)
            .map(|p| {
                d[p * n..(p + 1) * n]
                    .iter()
                    .zip(&psi.values)
                    .map(|(m, v)| m * v)
                    .sum::<Complex64>()
            })
            .collect::<Vec<_>>()
    };
    let dtheta = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let xi = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        acc += green_g_conjugated(z - xi, lambda) * h[j] * dtheta;
    }
    (lambda * z).exp() - Complex64::new(0.0, 2.0) * acc
}

/// Residual of the reproducing identity behind the boundary representation:
/// for the homogeneous disk,
///
/// ```text
/// 2i oint e^{lambda xi} dG_lambda(z, xi) = e^{lambda z},   z in X,
/// ```
///
/// with `dG_lambda = e^{lambda (z - xi)} d xi / (4 pi (z - xi))`.  Returns the
/// maximum error over a ring of interior probe points.
pub fn green_riemann_residual(lambda: Complex64, n_b: usize) -> f64 {
    let dtheta = 2.0 * PI / n_b as f64;
    let mut worst: f64 = 0.0;
    for a in 0..8 {
        let z = Complex64::from_polar(0.5, 2.0 * PI * a as f64 / 8.0 + 0.37);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n_b {
            let theta = 2.0 * PI * j as f64 / n_b as f64;
            let xi = Complex64::from_polar(1.0, theta);
            let tangent = Complex64::new(0.0, 1.0) * xi; // d xi = tangent ds
            acc += (lambda * xi).exp() * (lambda * (z - xi)).exp()
                / (4.0 * PI * (z - xi))
                * tangent
                * dtheta;
        }
        let err = (Complex64::new(0.0, 2.0) * acc - (lambda * z).exp()).norm();
        worst = worst.max(err);
    }
    worst
}

/// Dense complex LU solve with partial pivoting; consumes the matrix.
fn lu_solve(mut a: Vec<Complex64>, mut b: Vec<Complex64>, n: usize) -> Option<Vec<Complex64>> {
    for col in 0..n {
        let (piv, piv_norm) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_norm < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let bv = b[col];
            b[r] -= f * bv;
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for k in col + 1..n {
            v -= a[col * n + k] * b[k];
        }
        b[col] = v / a[col * n + col];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductivity::ConductivityField;
    use crate::faddeev_solve::solve_mu;
    use crate::forward::ForwardSolver;
    use crate::grid::Grid;

    #[test]
    fn kress_weights_reproduce_log_moments() {
        let n = 64;
        let r = kress_log_weights(n);
        // int ln(4 sin^2(t/2)) dt = 0
        let total: f64 = r.iter().sum();
        assert!(total.abs() < 1e-12, "zeroth moment {total:.3e}");
        // int ln(4 sin^2(t/2)) cos(k t) dt = -2 pi / k
        for k in 1..6 {
            let s: f64 = (0..n)
                .map(|j| r[j] * (k as f64 * 2.0 * PI * j as f64 / n as f64).cos())
                .sum();
            let exact = -2.0 * PI / k as f64;
            assert!((s - exact).abs() < 1e-12, "moment {k}: {s} vs {exact}");
        }
    }

    #[test]
    fn green_quadrature_converges_spectrally() {
        let lambda = Complex64::new(1.0, 0.6);
        let f = |xi: Complex64| (0.7 * xi).exp();
        let apply = |n: usize, p: usize| -> Complex64 {
            let w = green_quadrature(lambda, n).unwrap();
            (0..n)
                .map(|j| {
                    w[p * n + j] * f(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
                })
                .sum()
        };
        // target node 0 is shared by all resolutions
        let reference = apply(512, 0);
        let coarse = apply(48, 0);
        assert!(
            (coarse - reference).norm() < 1e-9,
            "singular quadrature error {:.3e}",
            (coarse - reference).norm()
        );
    }

    #[test]
    fn homogeneous_disk_trace_is_the_exponential() {
        let sigma = ConductivityField::named("constant").unwrap();
        let solver = ForwardSolver::new(&sigma, 40, 64).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        let lambda = Complex64::new(1.0, 0.5);
        let psi = solve_psi_boundary(&dtn, lambda).unwrap();
        let err = psi.relative_l2_error(&psi.incident.clone());
        assert!(err < 1e-10, "sigma = 1 trace deviates by {err:.3e}");
    }

    #[test]
    fn flipped_data_sign_breaks_the_identity() {
        let sigma = ConductivityField::named("constant").unwrap();
        let solver = ForwardSolver::new(&sigma, 40, 64).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        let lambda = Complex64::new(1.0, 0.5);
        let psi =
            solve_psi_boundary_variant(&dtn, lambda, BoundaryVariant::FlippedDataSign).unwrap();
        // the smoothing difference becomes 2 phi0, which annihilates the
        // holomorphic incident trace only up to discretization error; the
        // mutation must push the trace over the 1e-6 identity tolerance
        let err = psi.relative_l2_error(&psi.incident.clone());
        assert!(err > 5e-6, "mutated equation still looks exact: {err:.3e}");
        let clean = solve_psi_boundary(&dtn, lambda).unwrap();
        assert!(clean.relative_l2_error(&clean.incident.clone()) < 1e-8);
    }

    #[test]
    fn boundary_trace_matches_volume_solver_for_gaussian_phantom() {
        let sigma = ConductivityField::named("gaussian").unwrap();
        let solver = ForwardSolver::new(&sigma, 96, 64).unwrap();
        let dtn = solver.dtn_operators().unwrap();
        let lambda = Complex64::new(1.0, 0.0);
        let psi = solve_psi_boundary(&dtn, lambda).unwrap();

        let grid = Grid::new(128, 2.0);
        let q = sigma.q_grid(&grid);
        let slice = solve_mu(&q, lambda).unwrap();
        let oracle: Vec<Complex64> = (0..psi.n_b).map(|j| slice.psi_at(psi.node(j))).collect();

        let err = psi.relative_l2_error(&oracle);
        assert!(
            err < 0.05,
            "boundary equation vs volume solver disagree by {err:.3e}"
        );

        // the exterior representation should track the volume solution too
        let mut ext_err: f64 = 0.0;
        for a in 0..6 {
            let z = Complex64::from_polar(1.3, 2.0 * PI * a as f64 / 6.0 + 0.21);
            let here = extend_psi(&dtn, &psi, z);
            let there = slice.psi_at(z);
            ext_err = ext_err.max((here - there).norm() / there.norm());
        }
        assert!(ext_err < 0.05, "exterior extension error {ext_err:.3e}");
    }

    #[test]
    fn reproducing_identity_residual_and_order() {
        let lambda = Complex64::new(1.5, 0.0);
        let fine = green_riemann_residual(lambda, 128);
        assert!(fine < 1e-6, "fine-grid residual {fine:.3e}");

        let r8 = green_riemann_residual(lambda, 8);
        let r16 = green_riemann_residual(lambda, 16);
        let r32 = green_riemann_residual(lambda, 32);
        let order = ((r8 / r16).ln() / 2f64.ln()).min((r16 / r32).ln() / 2f64.ln());
        assert!(order >= 1.5, "convergence order {order:.2} (r8={r8:.2e}, r16={r16:.2e}, r32={r32:.2e})");
    }
}

//! Scattering data in the spectral plane and the d-bar equation in lambda.
//!
//! The CGO traces depend non-holomorphically on the spectral parameter: with
//! `mu = e^{-lambda z} psi`,
//!
//! ```text
//! d mu / d conj(lambda) = b(lambda) e^{conj(lambda) conj(z) - lambda z} conj(mu),
//! ```
//!
//! and the coefficient `b` is independent of `z`.  This module extracts `b`
//! from boundary traces by differencing the boundary solve in lambda
//! (averaging the per-node estimates and reporting their spread), and solves
//! the inverse step: the integral form of the same equation,
//!
//! ```text
//! mu(lambda) = 1 - (1/pi) int b(xi) e^{conj(xi) conj(z) - xi z}
//!                          conj(mu(xi)) / (xi - lambda) dA(xi),
//! ```
//!
//! a real-linear system (the unknown enters conjugated) treated with GMRES on
//! the realified unknowns and an FFT Cauchy transform.
//!
//! The module also carries the exact integer recurrence `a_k = (k-1) a_{k-1}
//! + 1` for the coefficients of the large-|lambda| asymptotic expansion of
//! the model problem; the sequence is factorially divergent, which is what
//! the growth diagnostic `|a_k|^{1/k}` quantifies.

use crate::boundary::{solve_psi_boundary, BoundaryError};
use crate::forward::DtnData;
use crate::grid::{Convolver, Grid};
use crate::krylov::{self, GmresOptions, KrylovError};
use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error("d-bar solve in lambda failed: {0}")]
    Solver(#[from] KrylovError),
    #[error("scattering grid has no usable nodes")]
    Empty,
}

/// One pointwise estimate of the scattering coefficient.
#[derive(Debug, Clone)]
pub struct BSample {
    pub lambda: Complex64,
    pub value: Complex64,
    /// relative spread of the per-boundary-node estimates
    pub dispersion: f64,
}

/// Extract `b(lambda)` from boundary data by a four-point difference of the
/// boundary solve in the spectral parameter.  Each boundary node yields an
/// estimate `d psi / d conj(lambda) e^{-conj(lambda) conj(z)} / conj(mu)`;
/// the estimates are averaged with weights `|mu|^2` and their weighted
/// spread is reported.
pub fn b_at_lambda(
    dtn: &DtnData,
    lambda: Complex64,
    delta: f64,
) -> Result<BSample, ScatteringError> {
    let stencil = [
        lambda,
        lambda + delta,
        lambda - delta,
        lambda + Complex64::new(0.0, delta),
        lambda - Complex64::new(0.0, delta),
    ];
    let solves: Vec<_> = stencil
        .par_iter()
        .map(|&l| solve_psi_boundary(dtn, l))
        .collect::<Result<_, _>>()?;
    let n = dtn.n_b;

    let mut num = Complex64::new(0.0, 0.0);
    let mut wsum = 0.0;
    let mut samples = Vec::with_capacity(n);
    for j in 0..n {
        let z = solves[0].node(j);
        let dre = (solves[1].values[j] - solves[2].values[j]) / (2.0 * delta);
        let dim = (solves[3].values[j] - solves[4].values[j]) / (2.0 * delta);
        let dpsi_dlbar = 0.5 * (dre + Complex64::i() * dim);
        let mu = (-(lambda * z)).exp() * solves[0].values[j];
        let est = dpsi_dlbar * (-(lambda.conj() * z.conj())).exp() / mu.conj();
        let w = mu.norm_sqr();
        num += w * est;
        wsum += w;
        samples.push((w, est));
    }
    let value = num / wsum;
    let spread = samples
        .iter()
        .map(|(w, e)| w * (e - value).norm_sqr())
        .sum::<f64>()
        / wsum;
    Ok(BSample {
        lambda,
        value,
        dispersion: spread.sqrt() / value.norm().max(f64::MIN_POSITIVE),
    })
}

/// Scattering coefficient sampled on a conjugation-closed grid of cell
/// centers in the spectral plane.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub grid: Grid,
    pub b: Vec<Complex64>,
    pub dispersion: Vec<f64>,
    /// nodes where the pointwise estimate was unusable and has been infilled
    pub masked: Vec<bool>,
}

impl ScatteringData {
    pub fn zero(grid: Grid) -> Self {
        let n = grid.len();
        ScatteringData {
            grid,
            b: vec![Complex64::new(0.0, 0.0); n],
            dispersion: vec![0.0; n],
            masked: vec![false; n],
        }
    }
}

/// Sample `b` on every cell center of the spectral grid.  Estimates whose
/// node spread exceeds `mask_threshold` (or which come out non-finite) are
/// masked and replaced by the average of their reliable neighbours.
pub fn scattering_from_dtn(
    dtn: &DtnData,
    grid: &Grid,
    delta: f64,
    mask_threshold: f64,
) -> Result<ScatteringData, ScatteringError> {
    let points = grid.points();
    let samples: Vec<Result<BSample, ScatteringError>> = points
        .par_iter()
        .map(|&l| b_at_lambda(dtn, l, delta))
        .collect();

    let n = grid.len();
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let mut dispersion = vec![0.0; n];
    let mut masked = vec![false; n];
    for (i, s) in samples.into_iter().enumerate() {
        match s {
            // the dispersion is relative, so a numerically-zero estimate
            // (absolute node spread below 1e-5) is reliable even though its
            // relative spread blows up
            Ok(s)
                if s.value.is_finite()
                    && (s.dispersion < mask_threshold
                        || s.dispersion * s.value.norm() < 1e-5) =>
            {
                b[i] = s.value;
                dispersion[i] = s.dispersion;
            }
            _ => masked[i] = true,
        }
    }
    if masked.iter().all(|&m| m) {
        return Err(ScatteringError::Empty);
    }

    // infill masked nodes from reliable 4-neighbours (zero if isolated)
    let nn = grid.n;
    let infill: Vec<(usize, Complex64)> = (0..n)
        .filter(|&i| masked[i])
        .map(|i| {
            let (ix, iy) = (i % nn, i / nn);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut cnt = 0;
            let mut push = |jx: i64, jy: i64| {
                if jx >= 0 && jy >= 0 && (jx as usize) < nn && (jy as usize) < nn {
                    let j = jy as usize * nn + jx as usize;
                    if !masked[j] {
                        acc += b[j];
                        cnt += 1;
                    }
                }
            };
            push(ix as i64 - 1, iy as i64);
            push(ix as i64 + 1, iy as i64);
            push(ix as i64, iy as i64 - 1);
            push(ix as i64, iy as i64 + 1);
            (i, if cnt > 0 { acc / cnt as f64 } else { Complex64::new(0.0, 0.0) })
        })
        .collect();
    for (i, v) in infill {
        b[i] = v;
    }

    Ok(ScatteringData {
        grid: *grid,
        b,
        dispersion,
        masked,
    })
}

/// Solution of the d-bar equation in the spectral plane at one physical
/// point `z`.
#[derive(Debug, Clone)]
pub struct MuLambdaField {
    pub grid: Grid,
    pub z: Complex64,
    pub mu: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

impl MuLambdaField {
    pub fn at(&self, lambda: Complex64) -> Complex64 {
        self.grid.interp(&self.mu, lambda)
    }
}

/// Solve `mu = 1 - (1/pi) int b E conj(mu) / (xi - lambda) dA` on the
/// scattering grid for fixed `z`, with `E = e^{conj(xi) conj(z) - xi z}`.
pub fn solve_dbar(scat: &ScatteringData, z: Complex64) -> Result<MuLambdaField, ScatteringError> {
    let grid = &scat.grid;
    let n = grid.n;
    let m = grid.len();
    let area = grid.cell_area();

    // Cauchy kernel: C[f](lambda) = (1/pi) sum f(xi) area / (xi - lambda)
    //              = conv with  -area / (pi (lambda - xi));  singular cell
    // mean vanishes by symmetry.
    let h = grid.spacing();
    let conv = Convolver::new(n, |dx, dy| {
        if dx == 0 && dy == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            let d = Complex64::new(dx as f64 * h, dy as f64 * h);
            -area / (std::f64::consts::PI * d)
        }
    });

    let coeff: Vec<Complex64> = grid
        .points()
        .iter()
        .zip(&scat.b)
        .map(|(&xi, &bv)| {
            let phase = xi.conj() * z.conj() - xi * z; // purely imaginary
            bv * phase.exp()
        })
        .collect();

    let rhs_c = vec![Complex64::new(1.0, 0.0); m];
    let apply = |v: &[f64]| -> Vec<f64> {
        let mu = krylov::r_to_c(v);
        let f: Vec<Complex64> = mu.iter().zip(&coeff).map(|(u, c)| c * u.conj()).collect();
        let cauchy = conv.apply(&f);
        let out: Vec<Complex64> = mu.iter().zip(&cauchy).map(|(u, c)| u + c).collect();
        krylov::c_to_r(&out)
    };

    let b_real = krylov::c_to_r(&rhs_c);
    let mut x = b_real.clone();
    let opts = GmresOptions {
        tol: 1e-9,
        max_iters: 200,
        restart: 40,
    };
    let outcome = krylov::gmres(apply, &b_real, &mut x, &opts)?;
    Ok(MuLambdaField {
        grid: *grid,
        z,
        mu: krylov::r_to_c(&x),
        iterations: outcome.iterations,
        residual: outcome.residual,
    })
}

/// Exact coefficients `a_1 .. a_k` of the large-|lambda| asymptotic series of
/// the model problem, generated by the recurrence `a_k = (k-1) a_{k-1} + 1`.
pub fn asymptotic_coefficients(k_max: usize) -> Vec<Ratio<i128>> {
    let mut out: Vec<Ratio<i128>> = Vec::with_capacity(k_max);
    let mut a = Ratio::from_integer(1i128);
    for k in 1..=k_max {
        if k > 1 {
            a = a * Ratio::from_integer(k as i128 - 1) + Ratio::from_integer(1);
        }
        out.push(a);
    }
    out
}

/// Closed form of the same coefficients: `a_k = (k-1)! sum_{j=0}^{k-1} 1/j!`.
pub fn asymptotic_closed_form(k: usize) -> Ratio<i128> {
    let mut fact = Ratio::from_integer(1i128); // (k-1)!
    for j in 2..k {
        fact *= Ratio::from_integer(j as i128);
    }
    let mut sum = Ratio::from_integer(0i128);
    let mut jfact = Ratio::from_integer(1i128);
    for j in 0..k {
        if j > 0 {
            jfact *= Ratio::from_integer(j as i128);
        }
        sum += jfact.recip();
    }
    fact * sum
}

/// Theil-Sen estimator: median of pairwise slopes.
pub fn theil_sen_slope(points: &[(f64, f64)]) -> f64 {
    let mut slopes = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx = points[j].0 - points[i].0;
            if dx.abs() > 1e-12 {
                slopes.push((points[j].1 - points[i].1) / dx);
            }
        }
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = slopes.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        slopes[k / 2]
    } else {
        0.5 * (slopes[k / 2 - 1] + slopes[k / 2])
    }
}

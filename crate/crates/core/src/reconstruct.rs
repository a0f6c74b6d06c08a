//! Recovery of the potential and the conductivity from CGO solutions.
//!
//! Three independent read-outs of the potential from `mu(z, lambda)`:
//!
//! * formula A, at a fixed spectral parameter:
//!   `q = 4 (mu_{z zbar} + lambda mu_zbar) / mu`;
//! * formula B, from the large-|lambda| coefficient `m1 = lim lambda (mu - 1)`:
//!   `q = 4 dbar m1`;
//! * formula C, in the small-|lambda| limit: `q = 4 mu_{z zbar} / mu`.
//!
//! The conductivity then follows from `w = sqrt(sigma)`, which solves
//! `Laplace w = q w` with `w -> 1` at infinity; in integral form
//! `w = 1 + N[q w]` with the Newtonian potential `N` (realised here through
//! the logarithmic convolution operator, `N = L/4`).

use crate::conductivity::ConductivityField;
use crate::faddeev_kernel::LogOperator;
use crate::faddeev_solve::FaddeevSlice;
use crate::grid::Grid;
use crate::krylov::{self, GmresOptions, KrylovError};
use crate::scattering::{solve_dbar, ScatteringData, ScatteringError};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error("conductivity solve failed: {0}")]
    Solver(#[from] KrylovError),
    #[error("recovered sqrt(sigma) is not positive (min {min:.3e}); potential too rough or data inconsistent")]
    NonPositive { min: f64 },
    #[error("settings place a probe radius {radius} outside the scattering grid (half width {half_width})")]
    ProbeOutsideGrid { radius: f64, half_width: f64 },
}

/// Probe layout for reading the potential off the spectral fields.
#[derive(Debug, Clone)]
pub struct ReconstructionSettings {
    /// spectral parameter for formula A
    pub lambda_a: Complex64,
    /// ring radii (fractions of the spectral grid half width) for the
    /// large-|lambda| extrapolation behind formula B
    pub b_ring_fracs: [f64; 3],
    /// angles per extrapolation ring
    pub n_ring_angles: usize,
    /// small spectral parameters for formula C, ordered outermost first
    pub c_lambdas: [Complex64; 2],
    /// |mu| below this is masked in the quotient formulas
    pub mu_floor: f64,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        ReconstructionSettings {
            lambda_a: Complex64::new(2.0, 0.0),
            b_ring_fracs: [0.5, 0.7, 0.9],
            n_ring_angles: 16,
            c_lambdas: [Complex64::new(0.4, 0.0), Complex64::new(0.2, 0.0)],
            mu_floor: 0.1,
        }
    }
}

/// Spectral fields sampled on a physical grid: everything the three formulas
/// need, gathered in one d-bar solve per grid point.
#[derive(Debug, Clone)]
pub struct MuSampling {
    pub z_grid: Grid,
    pub settings: ReconstructionSettings,
    /// mu(z, lambda_a)
    pub mu_a: Vec<Complex64>,
    /// extrapolation ring radii in the spectral plane
    pub rings: Vec<f64>,
    /// ring-averaged lambda (mu - 1), one field per ring
    pub ring_means: Vec<Vec<Complex64>>,
    /// mu(z, lambda_c) for each small spectral parameter
    pub mu_c: Vec<Vec<Complex64>>,
}

/// Solve the d-bar equation at every node of `z_grid` and collect the probe
/// values.  This is the expensive stage of the reconstruction; the work is
/// one real-linear GMRES solve per physical grid point, parallelised.
pub fn sample_mu_fields(
    scat: &ScatteringData,
    z_grid: &Grid,
    settings: &ReconstructionSettings,
) -> Result<MuSampling, ReconstructError> {
    let rings: Vec<f64> = settings
        .b_ring_fracs
        .iter()
        .map(|f| f * scat.grid.half_width)
        .collect();
    for &r in &rings {
        if r > scat.grid.half_width {
            return Err(ReconstructError::ProbeOutsideGrid {
                radius: r,
                half_width: scat.grid.half_width,
            });
        }
    }

    struct PointProbe {
        mu_a: Complex64,
        ring_means: Vec<Complex64>,
        mu_c: Vec<Complex64>,
    }

    let probes: Vec<PointProbe> = z_grid
        .points()
        .par_iter()
        .map(|&z| {
            let field = solve_dbar(scat, z)?;
            let mu_a = field.at(settings.lambda_a);
            let mu_c = settings.c_lambdas.iter().map(|&l| field.at(l)).collect();

            // ring averages of lambda (mu - 1); the angular mean suppresses
            // the unimodular oscillation carried by the conjugate-decaying
            // part of mu
            let ring_means: Vec<Complex64> = rings
                .iter()
                .map(|&rho| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..settings.n_ring_angles {
                        let phi = 2.0 * PI * a as f64 / settings.n_ring_angles as f64;
                        let l = Complex64::from_polar(rho, phi);
                        acc += l * (field.at(l) - 1.0);
                    }
                    acc / settings.n_ring_angles as f64
                })
                .collect();
            Ok(PointProbe {
                mu_a,
                ring_means,
                mu_c,
            })
        })
        .collect::<Result<_, ReconstructError>>()?;

    let n = z_grid.len();
    let mut mu_a = Vec::with_capacity(n);
    let mut ring_means = vec![Vec::with_capacity(n); rings.len()];
    let mut mu_c = vec![Vec::with_capacity(n); settings.c_lambdas.len()];
    for p in probes {
        mu_a.push(p.mu_a);
        for (k, v) in p.ring_means.into_iter().enumerate() {
            ring_means[k].push(v);
        }
        for (k, v) in p.mu_c.into_iter().enumerate() {
            mu_c[k].push(v);
        }
    }
    Ok(MuSampling {
        z_grid: *z_grid,
        settings: settings.clone(),
        mu_a,
        rings,
        ring_means,
        mu_c,
    })
}

/// Least squares for m(rho) = alpha + beta / rho; returns alpha.  A single
/// radius degenerates to the sample itself.
fn fit_constant_plus_inverse(rhos: &[f64], values: &[Complex64]) -> Complex64 {
    if rhos.len() < 2 {
        return values[0];
    }
    let n = rhos.len() as f64;
    let sx: f64 = rhos.iter().map(|r| 1.0 / r).sum();
    let sxx: f64 = rhos.iter().map(|r| 1.0 / (r * r)).sum();
    let sy: Complex64 = values.iter().sum();
    let sxy: Complex64 = rhos
        .iter()
        .zip(values)
        .map(|(r, v)| v / *r)
        .sum();
    let det = n * sxx - sx * sx;
    (sy * sxx - sxy * sx) / det
}

/// The three potential estimates on the physical grid.
#[derive(Debug, Clone)]
pub struct QEstimates {
    pub grid: Grid,
    pub q_a: Vec<Complex64>,
    pub q_b: Vec<Complex64>,
    pub q_c: Vec<Complex64>,
    /// nodes masked in formula A (|mu| below the floor)
    pub mask_a: Vec<bool>,
    /// nodes masked in formula C
    pub mask_c: Vec<bool>,
    /// extrapolation spread of formula B: relative difference between the
    /// all-ring fit and the outer-ring fit
    pub spread_b: f64,
    /// extrapolation spread of formula C: relative difference between the
    /// extrapolated field and the innermost single-radius estimate
    pub spread_c: f64,
}

impl QEstimates {
    /// Extrapolation diagnostics: a large spread means the lambda schedule
    /// has not reached its asymptotic regime and the B/C limits are
    /// unreliable.
    pub fn unreliable_limit_warning(&self, threshold: f64) -> Option<String> {
        let mut parts = Vec::new();
        if self.spread_b > threshold {
            parts.push(format!("large-lambda spread {:.3}", self.spread_b));
        }
        if self.spread_c > threshold {
            parts.push(format!("small-lambda spread {:.3}", self.spread_c));
        }
        if parts.is_empty() {
            None
        } else {
            Some(parts.join(", "))
        }
    }
}

fn rel_l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Formula A applied to a field `mu(z)` at fixed `lambda`.
pub fn formula_a(
    grid: &Grid,
    mu: &[Complex64],
    lambda: Complex64,
    mu_floor: f64,
) -> (Vec<Complex64>, Vec<bool>) {
    let mu_zbar = grid.dzbar4(mu);
    let mu_zzbar = grid.dz4(&mu_zbar);
    let mut q = Vec::with_capacity(mu.len());
    let mut mask = Vec::with_capacity(mu.len());
    for i in 0..mu.len() {
        if mu[i].norm() < mu_floor {
            q.push(Complex64::new(0.0, 0.0));
            mask.push(true);
        } else {
            q.push(4.0 * (mu_zzbar[i] + lambda * mu_zbar[i]) / mu[i]);
            mask.push(false);
        }
    }
    (q, mask)
}

/// Formula B: `q = 4 dbar m1` from the extrapolated coefficient field.
pub fn formula_b(grid: &Grid, m1: &[Complex64]) -> Vec<Complex64> {
    grid.dzbar4(m1).iter().map(|v| 4.0 * v).collect()
}

/// Formula C applied to a field at one small `lambda`.
pub fn formula_c(grid: &Grid, mu: &[Complex64], mu_floor: f64) -> (Vec<Complex64>, Vec<bool>) {
    let mu_zbar = grid.dzbar4(mu);
    let mu_zzbar = grid.dz4(&mu_zbar);
    let mut q = Vec::with_capacity(mu.len());
    let mut mask = Vec::with_capacity(mu.len());
    for i in 0..mu.len() {
        if mu[i].norm() < mu_floor {
            q.push(Complex64::new(0.0, 0.0));
            mask.push(true);
        } else {
            q.push(4.0 * mu_zzbar[i] / mu[i]);
            mask.push(false);
        }
    }
    (q, mask)
}

/// All three read-outs from one sampling pass.  Formula C combines its two
/// spectral radii by linear extrapolation to lambda = 0.
pub fn q_from_sampling(s: &MuSampling) -> QEstimates {
    let grid = &s.z_grid;
    let (q_a, mask_a) = formula_a(grid, &s.mu_a, s.settings.lambda_a, s.settings.mu_floor);

    // formula B: fit over all rings, and over the outer rings only for the
    // extrapolation spread
    let n = grid.len();
    let fit = |rings: &[f64], means: &[&[Complex64]]| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let vals: Vec<Complex64> = means.iter().map(|m| m[i]).collect();
                fit_constant_plus_inverse(rings, &vals)
            })
            .collect()
    };
    let all_refs: Vec<&[Complex64]> = s.ring_means.iter().map(|v| v.as_slice()).collect();
    let m1_all = fit(&s.rings, &all_refs);
    let q_b = formula_b(grid, &m1_all);
    let spread_b = if s.rings.len() > 2 {
        let outer_rings = &s.rings[1..];
        let outer_refs = &all_refs[1..];
        let m1_outer = fit(outer_rings, outer_refs);
        let q_b_outer = formula_b(grid, &m1_outer);
        rel_l2_diff(&q_b, &q_b_outer)
    } else {
        0.0
    };

    let (q_c0, m0) = formula_c(grid, &s.mu_c[0], s.settings.mu_floor);
    let (q_c1, m1) = formula_c(grid, &s.mu_c[1], s.settings.mu_floor);
    let r0 = s.settings.c_lambdas[0].norm();
    let r1 = s.settings.c_lambdas[1].norm();
    let mut q_c = Vec::with_capacity(grid.len());
    let mut mask_c = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        match (m0[i], m1[i]) {
            (false, false) => {
                // linear in |lambda| through the two samples, taken to 0
                let t = r0 / (r0 - r1);
                q_c.push(q_c0[i] + (q_c1[i] - q_c0[i]) * t);
                mask_c.push(false);
            }
            (false, true) => {
                q_c.push(q_c0[i]);
                mask_c.push(false);
            }
            (true, false) => {
                q_c.push(q_c1[i]);
                mask_c.push(false);
            }
            (true, true) => {
                q_c.push(Complex64::new(0.0, 0.0));
                mask_c.push(true);
            }
        }
    }
    let spread_c = rel_l2_diff(&q_c, &q_c1);
    QEstimates {
        grid: *grid,
        q_a,
        q_b,
        q_c,
        mask_a,
        mask_c,
        spread_b,
        spread_c,
    }
}

/// Which potential read-out drives the conductivity recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QFormula {
    A,
    B,
    C,
}

/// Complete reconstruction output for one formula choice.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub formula: QFormula,
    pub q_rec: Vec<Complex64>,
    pub sigma: SigmaReconstruction,
    /// extrapolation spread of the chosen formula (0 for A)
    pub spread: f64,
    pub masked_fraction: f64,
}

/// Run the reconstruction tail: d-bar sampling, potential read-out, and the
/// conductivity solve.
pub fn reconstruct_from_scattering(
    scat: &ScatteringData,
    z_grid: &Grid,
    settings: &ReconstructionSettings,
    formula: QFormula,
) -> Result<ReconstructionResult, ReconstructError> {
    let sampling = sample_mu_fields(scat, z_grid, settings)?;
    let est = q_from_sampling(&sampling);
    let frac = |mask: &[bool]| mask.iter().filter(|&&m| m).count() as f64 / mask.len() as f64;
    let (q_rec, spread, masked_fraction) = match formula {
        QFormula::A => (est.q_a.clone(), 0.0, frac(&est.mask_a)),
        QFormula::B => (est.q_b.clone(), est.spread_b, 0.0),
        QFormula::C => (est.q_c.clone(), est.spread_c, frac(&est.mask_c)),
    };
    let sigma = sigma_from_q(z_grid, &q_rec)?;
    Ok(ReconstructionResult {
        formula,
        q_rec,
        sigma,
        spread,
        masked_fraction,
    })
}

/// Potential read-outs applied directly to a volume CGO slice (used for
/// validation against the synthetic potential).
pub fn q_formula_a_slice(slice: &FaddeevSlice, mu_floor: f64) -> (Vec<Complex64>, Vec<bool>) {
    formula_a(&slice.grid, &slice.mu, slice.lambda, mu_floor)
}

/// The slices should cover several angles on each spectral radius: the
/// subleading part of `lambda (mu - 1)` carries the unimodular oscillation
/// `e^{conj(lambda) conj(z) - lambda z}`, which does not decay in |lambda|
/// and is suppressed here by averaging over the ring angle before the
/// radial extrapolation.
pub fn q_formula_b_slices(slices: &[FaddeevSlice]) -> Vec<Complex64> {
    let grid = &slices[0].grid;
    let n = grid.len();
    // group the slices by spectral radius
    let mut rhos: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<&FaddeevSlice>> = Vec::new();
    for s in slices {
        let r = s.lambda.norm();
        match rhos.iter().position(|&x| (x - r).abs() < 1e-9 * (1.0 + r)) {
            Some(k) => groups[k].push(s),
            None => {
                rhos.push(r);
                groups.push(vec![s]);
            }
        }
    }
    let m1: Vec<Complex64> = (0..n)
        .map(|i| {
            let vals: Vec<Complex64> = groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|s| s.lambda * (s.mu[i] - 1.0))
                        .sum::<Complex64>()
                        / g.len() as f64
                })
                .collect();
            fit_constant_plus_inverse(&rhos, &vals)
        })
        .collect();
    formula_b(grid, &m1)
}

/// Recovered conductivity.
#[derive(Debug, Clone)]
pub struct SigmaReconstruction {
    pub grid: Grid,
    pub sqrt_sigma: Vec<f64>,
    pub sigma: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl SigmaReconstruction {
    pub fn sigma_at(&self, z: Complex64) -> f64 {
        let c: Vec<Complex64> = self
            .sigma
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.interp(&c, z).re
    }
}

/// Solve `w = 1 + N[q w]` for `w = sqrt(sigma)` and square.  Only the real
/// part of the supplied potential enters; a significant imaginary part is a
/// reconstruction artefact that shows up in the residual diagnostics of the
/// q-estimates, not here.
pub fn sigma_from_q(grid: &Grid, q: &[Complex64]) -> Result<SigmaReconstruction, ReconstructError> {
    let q_re: Vec<f64> = q.iter().map(|v| v.re).collect();
    let log_op = LogOperator::new(grid);
    let m = grid.len();

    let apply = |v: &[f64]| -> Vec<f64> {
        let w = krylov::r_to_c(v);
        let f: Vec<Complex64> = w
            .iter()
            .zip(&q_re)
            .map(|(wv, qv)| 0.25 * qv * wv)
            .collect();
        let pot = log_op.apply(&f);
        let out: Vec<Complex64> = w.iter().zip(&pot).map(|(wv, pv)| wv - pv).collect();
        krylov::c_to_r(&out)
    };

    let rhs = krylov::c_to_r(&vec![Complex64::new(1.0, 0.0); m]);
    let mut x = rhs.clone();
    let opts = GmresOptions {
        tol: 1e-10,
        max_iters: 200,
        restart: 40,
    };
    let outcome = krylov::gmres(apply, &rhs, &mut x, &opts)?;
    let w = krylov::r_to_c(&x);
    let sqrt_sigma: Vec<f64> = w.iter().map(|v| v.re).collect();
    let min = sqrt_sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.05 {
        return Err(ReconstructError::NonPositive { min });
    }
    Ok(SigmaReconstruction {
        grid: *grid,
        sigma: sqrt_sigma.iter().map(|v| v * v).collect(),
        sqrt_sigma,
        iterations: outcome.iterations,
        residual: outcome.residual,
    })
}

/// Comparison of a recovered conductivity against the generating phantom,
/// restricted to the unit disk.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ErrorMetrics {
    pub rel_l2: f64,
    pub rel_linf: f64,
    /// peak contrast max |sigma - 1| of the reconstruction and the phantom
    pub peak_value: f64,
    pub peak_ref: f64,
    /// distance between the contrast peaks
    pub center_offset: f64,
}

pub fn error_metrics(grid: &Grid, sigma_rec: &[f64], reference: &ConductivityField) -> ErrorMetrics {
    let pts = grid.points();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut linf_num: f64 = 0.0;
    let mut linf_den: f64 = 0.0;
    let mut peak = (0.0f64, Complex64::new(0.0, 0.0));
    let mut peak_ref = (0.0f64, Complex64::new(0.0, 0.0));
    for (i, &z) in pts.iter().enumerate() {
        if z.norm() > 1.0 {
            continue;
        }
        let sr = reference.sigma(z);
        let d = sigma_rec[i] - sr;
        num += d * d;
        den += sr * sr;
        linf_num = linf_num.max(d.abs());
        linf_den = linf_den.max(sr.abs());
        let c = (sigma_rec[i] - 1.0).abs();
        if c > peak.0 {
            peak = (c, z);
        }
        let cr = (sr - 1.0).abs();
        if cr > peak_ref.0 {
            peak_ref = (cr, z);
        }
    }
    ErrorMetrics {
        rel_l2: (num / den.max(f64::MIN_POSITIVE)).sqrt(),
        rel_linf: linf_num / linf_den.max(f64::MIN_POSITIVE),
        peak_value: peak.0,
        peak_ref: peak_ref.0,
        center_offset: (peak.1 - peak_ref.1).norm(),
    }
}

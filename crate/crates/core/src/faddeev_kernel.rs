//! The planar Faddeev–Green function g(z,λ) and the Green operator Ĝ_λ.
//!
//! Everything reduces to a single radial profile: with w = λz,
//!     g(z,λ) = −(1/2π) e^{−w} [ ln|w| + γ + Re E(w) ],
//! E(w) = Σ_{n≥1} wⁿ/(n·n!) (see `conventions` for the derivation sketch;
//! the defining oscillatory integral is only ever evaluated by the
//! brute-force quadrature oracle in the test suite). The bracket is
//! Re Ẽ(w) for Ẽ = γ + Log + E, the analytic continuation of the
//! exponential-integral function, and the three evaluation branches below
//! are the standard stable representations of that function:
//!
//! * power series for moderate |w| with Re w not too negative,
//! * continued fraction (Lentz) for Re w ≪ 0, where the series for
//!   e^{−w}·Re Ẽ(w) cancels catastrophically,
//! * divergent asymptotic series Ẽ(w) ~ e^w Σ n!/w^{n+1} truncated at the
//!   smallest term for large |w|.
//!
//! The key identities (each pinned by a unit test):
//!   (∂ + λ) g = −1/(4πz)        and        ∂̄(∂ + λ) g = −δ/4,
//! and the conjugated kernel G_λ(z,ξ) = e^{λ(z−ξ)} g(z−ξ,λ) is the
//! *real-valued* function −(1/2π)·Re Ẽ(λ(z−ξ)).

use num_complex::Complex64;
use thiserror::Error;

use crate::conventions::EULER_GAMMA;
use crate::grid::{Convolver, Grid};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Mean of ln|z| over the unit square centered at the origin
/// (= −(ln 2)/2 + π/4 − 3/2, exact).
pub const LOG_CELL_MEAN: f64 =
    -0.346_573_590_279_972_65 + std::f64::consts::FRAC_PI_4 - 1.5;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel table does not cover the requested point (z = {z}, ξ = {xi})")]
    OutsideTable { z: Complex64, xi: Complex64 },
    #[error("kernel table shape mismatch: {0}")]
    TableShape(String),
}

// ---------------------------------------------------------------------------
// scalar profile

/// Re E(w) for E(w) = Σ_{n≥1} wⁿ/(n·n!); power-series branch.
pub(crate) fn e_series_re(w: Complex64) -> f64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::default();
    for n in 1..=220u32 {
        term *= w / n as f64;
        let contrib = term / n as f64;
        sum += contrib;
        if contrib.norm() < 1e-18 * (1.0 + sum.norm()) && n as f64 > w.norm() {
            break;
        }
    }
    sum.re
}

/// K(ζ) = e^{ζ} E1(ζ) by the modified Lentz continued fraction,
/// K = 1/(ζ+1 − 1²/(ζ+3 − 2²/(ζ+5 − …))); requires Re ζ > 0.
pub(crate) fn e1_cf(zeta: Complex64) -> Complex64 {
    // not smaller: complex division squares the modulus internally and
    // must not underflow
    let tiny = 1e-30;
    let mut f = Complex64::new(tiny, 0.0);
    let mut c = f;
    let mut d = Complex64::default();
    for j in 1..=300u32 {
        let (a, b) = if j == 1 {
            (Complex64::new(1.0, 0.0), zeta + 1.0)
        } else {
            let k = (j - 1) as f64;
            (Complex64::new(-k * k, 0.0), zeta + (2 * j - 1) as f64)
        };
        d = b + a * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + a / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    f
}

/// Truncated asymptotic sum s(w) = Σ_{n=0}^{K} n!/w^{n+1}, K near |w|.
pub(crate) fn asymptotic_s(w: Complex64) -> Complex64 {
    let k_max = (w.norm() as usize).min(60).max(3);
    let mut term = 1.0 / w;
    let mut sum = term;
    for n in 1..=k_max {
        term *= n as f64 / w;
        sum += term;
    }
    sum
}

#[derive(Clone, Copy, PartialEq)]
enum Branch {
    Series,
    ContinuedFraction,
    Asymptotic,
}

fn pick_branch(w: Complex64) -> Branch {
    if w.re < -3.0 {
        Branch::ContinuedFraction
    } else if w.norm() <= 20.0 {
        Branch::Series
    } else {
        Branch::Asymptotic
    }
}

/// g(z,λ): decaying Faddeev–Green profile. Panics at z = 0 (log pole).
pub fn green_g(z: Complex64, lambda: Complex64) -> Complex64 {
    let w = lambda * z;
    assert!(w.norm() > 0.0, "Faddeev kernel evaluated at its singularity");
    // e^{w̄ − w} = exp(−2i Im w), a pure phase
    let phase = Complex64::new(0.0, -2.0 * w.im).exp();
    match pick_branch(w) {
        Branch::Series => {
            let b = w.norm().ln() + EULER_GAMMA + e_series_re(w);
            -(1.0 / TWO_PI) * (-w).exp() * b
        }
        Branch::ContinuedFraction => {
            let c = e1_cf(-w);
            (1.0 / (2.0 * TWO_PI)) * (c + phase * c.conj())
        }
        Branch::Asymptotic => {
            let s = asymptotic_s(w);
            -(1.0 / (2.0 * TWO_PI)) * (s + phase * s.conj())
        }
    }
}

/// G_λ(δ) = e^{λδ} g(δ,λ) = −(1/2π)·Re Ẽ(λδ): real-valued, grows like
/// e^{Re(λδ)} in half the directions. Panics at δ = 0.
pub fn green_g_conjugated(delta: Complex64, lambda: Complex64) -> f64 {
    let w = lambda * delta;
    assert!(w.norm() > 0.0, "Faddeev kernel evaluated at its singularity");
    let b = match pick_branch(w) {
        Branch::Series => w.norm().ln() + EULER_GAMMA + e_series_re(w),
        Branch::ContinuedFraction => -(w.exp() * e1_cf(-w)).re,
        Branch::Asymptotic => (w.exp() * asymptotic_s(w)).re,
    };
    -(1.0 / TWO_PI) * b
}

// ---------------------------------------------------------------------------
// kernel interface

/// Pluggable Green kernel at a fixed λ: the planar closed profile, or an
/// externally supplied table (for curve kernels produced elsewhere).
pub trait GreenKernel: Sync {
    fn lambda(&self) -> Complex64;
    /// g_λ(z, ξ).
    fn eval(&self, z: Complex64, xi: Complex64) -> Result<Complex64, KernelError>;
    /// G_λ(z,ξ) = e^{λ(z₁−ξ₁)} g_λ(z,ξ).
    fn eval_conjugated(&self, z: Complex64, xi: Complex64) -> Result<Complex64, KernelError> {
        let e = (self.lambda() * (z - xi)).exp();
        Ok(e * self.eval(z, xi)?)
    }
    /// Coefficient of the ln|z−ξ| singularity of G_λ near the diagonal
    /// (used by product quadrature in the boundary solver).
    fn log_coefficient(&self) -> f64 {
        -1.0 / TWO_PI
    }
}

pub struct PlanarKernel {
    pub lambda: Complex64,
}

impl GreenKernel for PlanarKernel {
    fn lambda(&self) -> Complex64 {
        self.lambda
    }
    fn eval(&self, z: Complex64, xi: Complex64) -> Result<Complex64, KernelError> {
        Ok(green_g(z - xi, self.lambda))
    }
    fn eval_conjugated(&self, z: Complex64, xi: Complex64) -> Result<Complex64, KernelError> {
        Ok(Complex64::new(green_g_conjugated(z - xi, self.lambda), 0.0))
    }
}

/// Externally supplied kernel sampled on explicit point pairs; evaluation
/// requires an (approximate) match of both points against the stored sets.
pub struct TableKernel {
    pub lambda: Complex64,
    pub z_points: Vec<Complex64>,
    pub xi_points: Vec<Complex64>,
    /// Row-major |z_points| × |xi_points| values of g_λ(z,ξ).
    pub values: Vec<Complex64>,
    pub match_tol: f64,
}

impl TableKernel {
    pub fn new(
        lambda: Complex64,
        z_points: Vec<Complex64>,
        xi_points: Vec<Complex64>,
        values: Vec<Complex64>,
    ) -> Result<Self, KernelError> {
        if values.len() != z_points.len() * xi_points.len() {
            return Err(KernelError::TableShape(format!(
                "{} values for {}×{} points",
                values.len(),
                z_points.len(),
                xi_points.len()
            )));
        }
        Ok(TableKernel {
            lambda,
            z_points,
            xi_points,
            values,
            match_tol: 1e-9,
        })
    }

    fn locate(points: &[Complex64], p: Complex64, tol: f64) -> Option<usize> {
        points
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p).norm().total_cmp(&(b.1 - p).norm()))
            .filter(|(_, &q)| (q - p).norm() <= tol)
            .map(|(i, _)| i)
    }
}

impl GreenKernel for TableKernel {
    fn lambda(&self) -> Complex64 {
        self.lambda
    }
    fn eval(&self, z: Complex64, xi: Complex64) -> Result<Complex64, KernelError> {
        let iz = Self::locate(&self.z_points, z, self.match_tol);
        let ix = Self::locate(&self.xi_points, xi, self.match_tol);
        match (iz, ix) {
            (Some(i), Some(j)) => Ok(self.values[i * self.xi_points.len() + j]),
            _ => Err(KernelError::OutsideTable { z, xi }),
        }
    }
}

// ---------------------------------------------------------------------------
// λ grids

/// Polar grid of spectral nodes: radii (0, R], uniform angles; excludes 0
/// and is closed under complex conjugation.
#[derive(Debug, Clone)]
pub struct LambdaGrid {
    pub radius: f64,
    pub n_radii: usize,
    pub n_angles: usize,
    pub nodes: Vec<Complex64>,
}

impl LambdaGrid {
    pub fn polar(radius: f64, n_radii: usize, n_angles: usize) -> Self {
        assert!(radius > 0.0 && n_radii >= 1 && n_angles >= 4);
        let mut nodes = Vec::with_capacity(n_radii * n_angles);
        for i in 0..n_radii {
            let r = radius * (i + 1) as f64 / n_radii as f64;
            for k in 0..n_angles {
                let t = TWO_PI * k as f64 / n_angles as f64;
                nodes.push(r * Complex64::new(t.cos(), t.sin()));
            }
        }
        LambdaGrid {
            radius,
            n_radii,
            n_angles,
            nodes,
        }
    }

    pub fn node(&self, i_radius: usize, k_angle: usize) -> Complex64 {
        self.nodes[i_radius * self.n_angles + k_angle]
    }

    pub fn is_conjugation_closed(&self) -> bool {
        self.nodes.iter().all(|&l| {
            self.nodes
                .iter()
                .any(|&m| (m - l.conj()).norm() < 1e-12 * (1.0 + l.norm()))
        })
    }
}

// ---------------------------------------------------------------------------
// grid operators

/// Fast application of φ ↦ g(·,λ) ∗ φ on a uniform grid by exact linear
/// convolution (zero-padded FFT); the singular cell uses the exact cell
/// average of the logarithmic part of g.
pub struct GreenOperator {
    pub grid: Grid,
    pub lambda: Complex64,
    conv: Convolver,
}

impl GreenOperator {
    pub fn new(grid: &Grid, lambda: Complex64) -> Self {
        assert!(lambda.norm() > 0.0, "λ = 0 requires the log-kernel operator");
        let h = grid.spacing();
        let area = grid.cell_area();
        // near 0: g = −(1/2π)(ln|λz| + γ) + O(z ln z); averaging ln|z| over
        // the singular cell and evaluating the rest at the center is a
        // second-order-accurate product rule for the cell integral
        let singular = -(area / TWO_PI) * (h.ln() + LOG_CELL_MEAN + lambda.norm().ln() + EULER_GAMMA);
        let conv = Convolver::new(grid.n, |dx, dy| {
            if dx == 0 && dy == 0 {
                Complex64::new(singular, 0.0)
            } else {
                green_g(Complex64::new(dx as f64 * h, dy as f64 * h), lambda) * area
            }
        });
        GreenOperator {
            grid: grid.clone(),
            lambda,
            conv,
        }
    }

    /// (g ∗ φ)(z) = ∫ g(z−ξ,λ) φ(ξ) dA(ξ) on the grid.
    pub fn apply(&self, phi: &[Complex64]) -> Vec<Complex64> {
        self.conv.apply(phi)
    }

    /// Ĝ_λφ with the CGO conjugation: ∫ e^{λ(z−ξ)} g(z−ξ,λ) φ(ξ) dA(ξ).
    pub fn apply_conjugated(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let pts = self.grid.points();
        let damped: Vec<Complex64> = phi
            .iter()
            .zip(&pts)
            .map(|(p, &z)| p * (-self.lambda * z).exp())
            .collect();
        let mut out = self.apply(&damped);
        for (u, &z) in out.iter_mut().zip(&pts) {
            *u *= (self.lambda * z).exp();
        }
        out
    }
}

/// λ = 0 limit: u = (2/π) ∫ ln|z−ξ| φ(ξ) dA solves ∂̄∂u = φ.
pub struct LogOperator {
    pub grid: Grid,
    conv: Convolver,
}

impl LogOperator {
    pub fn new(grid: &Grid) -> Self {
        let h = grid.spacing();
        let area = grid.cell_area();
        let scale = 2.0 / std::f64::consts::PI;
        let singular = scale * area * (h.ln() + LOG_CELL_MEAN);
        let conv = Convolver::new(grid.n, |dx, dy| {
            if dx == 0 && dy == 0 {
                Complex64::new(singular, 0.0)
            } else {
                let r = (((dx * dx + dy * dy) as f64).sqrt()) * h;
                Complex64::new(scale * area * r.ln(), 0.0)
            }
        });
        LogOperator {
            grid: grid.clone(),
            conv,
        }
    }

    pub fn apply(&self, phi: &[Complex64]) -> Vec<Complex64> {
        self.conv.apply(phi)
    }
}

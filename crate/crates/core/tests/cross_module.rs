//! Consistency checks that couple two or more pipeline stages.

use dbar_core::conductivity::ConductivityField;
use dbar_core::faddeev_solve::solve_mu;
use dbar_core::grid::Grid;
use dbar_core::scattering::{solve_dbar, ScatteringData};
use dbar_core::Complex64;

/// ‖μ − 1‖_{L⁴} over the computational square.
fn l4_deviation(grid: &Grid, mu: &[Complex64]) -> f64 {
    let area = grid.cell_area();
    let s: f64 = mu
        .iter()
        .map(|m| (m - Complex64::new(1.0, 0.0)).norm().powi(4) * area)
        .sum();
    s.powf(0.25)
}

/// μ − 1 shrinks when λ grows, at a rate between 1/|λ| and 1/√|λ|.
/// The numeric band [0.2, 0.6] for the 2 → 8 quadrupling was recorded from
/// the first verified run and is frozen as a regression bound.
#[test]
fn mu_deviation_decays_within_the_frozen_band() {
    let sigma = ConductivityField::named("gaussian").unwrap();
    let grid = Grid::new(128, 2.0);
    let q = sigma.q_grid(&grid);
    let lo = solve_mu(&q, Complex64::new(2.0, 0.0)).unwrap();
    let hi = solve_mu(&q, Complex64::new(8.0, 0.0)).unwrap();
    let ratio = l4_deviation(&grid, &hi.mu) / l4_deviation(&grid, &lo.mu);
    assert!(
        (0.2..=0.6).contains(&ratio),
        "L4 deviation ratio {ratio:.3} left the [0.2, 0.6] band"
    );
}

fn synthetic_b(lambda: Complex64) -> Complex64 {
    0.3 * (-lambda.norm_sqr()).exp() * (Complex64::new(1.0, 0.2) + 0.5 * lambda)
}

/// Real-linearity of the λ ∂̄ solve: replacing the data by
/// b'(λ) = conj b(λ̄) and the evaluation point by z̄ conjugates the
/// solution at the conjugated spectral parameter, ν(λ) = conj μ(λ̄).
#[test]
fn dbar_solver_commutes_with_conjugation() {
    let grid = Grid::new(32, 4.0);
    let pts = grid.points();
    let mut scat = ScatteringData::zero(grid);
    let mut scat_conj = ScatteringData::zero(grid);
    for k in 0..pts.len() {
        scat.b[k] = synthetic_b(pts[k]);
        scat_conj.b[k] = synthetic_b(pts[k].conj()).conj();
    }
    let z = Complex64::new(0.4, -0.7);
    let mu = solve_dbar(&scat, z).unwrap();
    let nu = solve_dbar(&scat_conj, z.conj()).unwrap();
    // cell-centered grid: the conjugate of node (i, j) is node (i, n−1−j)
    let n = grid.n;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let a = nu.mu[grid.idx(i, j)];
            let b = mu.mu[grid.idx(i, n - 1 - j)].conj();
            worst = worst.max((a - b).norm());
        }
    }
    assert!(worst < 1e-7, "conjugation symmetry violated by {worst:.2e}");
}

/// Weak data linearizes: for b = O(ε) the solution matches the one-term
/// Born approximation −(1/π) Σ b E area/(ξ−λ) to O(ε²). The reference sum
/// is evaluated directly, node by node, independent of the solver's FFT
/// convolution path.
#[test]
fn weak_scattering_matches_the_born_term() {
    let grid = Grid::new(32, 4.0);
    let pts = grid.points();
    let mut scat = ScatteringData::zero(grid);
    let eps = 1e-3;
    for k in 0..pts.len() {
        scat.b[k] = eps * (-pts[k].norm_sqr()).exp() * Complex64::new(1.0, 0.3);
    }
    let z = Complex64::new(0.3, 0.1);
    let mu = solve_dbar(&scat, z).unwrap();
    let area = grid.cell_area();
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, &lambda) in pts.iter().enumerate() {
        let mut born = Complex64::default();
        for (k, &xi) in pts.iter().enumerate() {
            if k == l {
                continue;
            }
            let coupling = (xi.conj() * z.conj() - xi * z).exp();
            born -= scat.b[k] * coupling * area / (std::f64::consts::PI * (xi - lambda));
        }
        num += (mu.mu[l] - 1.0 - born).norm_sqr();
        den += born.norm_sqr();
    }
    let rel = (num / den).sqrt();
    assert!(rel < 1e-2, "Born-term mismatch {rel:.3e}");
}

//! Built-in invariant suite.  `quick` touches only the trivial identities
//! and runs in seconds; `full` adds oracle comparisons, a convergence study,
//! and a deliberate-failure (mutation canary) check.

use num_complex::Complex64;
use serde::Serialize;

use dbar_core::boundary::{
    green_riemann_residual, solve_psi_boundary, solve_psi_boundary_variant, BoundaryVariant,
};
use dbar_core::conductivity::ConductivityField;
use dbar_core::faddeev_solve::solve_mu;
use dbar_core::forward::ForwardSolver;
use dbar_core::grid::Grid;
use dbar_core::scattering::{asymptotic_coefficients, solve_dbar, ScatteringData};

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(checks: &mut Vec<CheckResult>, name: &str, passed: bool, detail: String) {
    eprintln!("[{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    checks.push(CheckResult {
        name: name.to_owned(),
        passed,
        detail,
    });
}

pub fn run(full: bool) -> Report {
    let mut checks = Vec::new();
    let one = Complex64::new(1.0, 0.0);

    // exact rational recurrence
    let a = asymptotic_coefficients(6);
    let want: [i128; 6] = [1, 2, 5, 16, 65, 326];
    let ok = a
        .iter()
        .zip(&want)
        .all(|(r, w)| *r.denom() == 1 && *r.numer() == *w);
    check(
        &mut checks,
        "asymptotic-recurrence",
        ok,
        format!("a1..a6 = {:?}", a.iter().map(|r| *r.numer()).collect::<Vec<_>>()),
    );

    // zero scattering data is neutral
    let field = solve_dbar(&ScatteringData::zero(Grid::new(16, 4.0)), Complex64::new(0.2, 0.1))
        .map(|f| {
            f.mu.iter()
                .map(|v| (v - 1.0).norm())
                .fold(0.0, f64::max)
        });
    match field {
        Ok(dev) => check(
            &mut checks,
            "zero-data-neutrality",
            dev == 0.0,
            format!("max |mu - 1| = {dev:.1e}"),
        ),
        Err(e) => check(&mut checks, "zero-data-neutrality", false, e.to_string()),
    }

    // trivial conductivity: DtN difference vanishes and the boundary
    // equation returns the incident wave
    let unit = ConductivityField::named("constant").unwrap();
    match ForwardSolver::new(&unit, 32, 32).and_then(|s| s.dtn_operators()) {
        Ok(dtn) => {
            let d = dtn.diff_max_norm();
            check(
                &mut checks,
                "trivial-dtn-identity",
                d < 1e-8,
                format!("max |Phi - Phi0| = {d:.1e}"),
            );
            match solve_psi_boundary(&dtn, one) {
                Ok(psi) => {
                    let dev = psi.scattered_fraction();
                    check(
                        &mut checks,
                        "trivial-boundary-identity",
                        dev < 1e-6,
                        format!("|psi - incident| / |incident| = {dev:.1e}"),
                    );
                }
                Err(e) => check(&mut checks, "trivial-boundary-identity", false, e.to_string()),
            }

            if full {
                // mutation canary: flipping the data sign in the boundary
                // equation must break the trivial identity the clean solve
                // satisfies; a canary that stays green would mean the test
                // has no teeth
                let flipped =
                    solve_psi_boundary_variant(&dtn, one, BoundaryVariant::FlippedDataSign);
                match flipped {
                    Ok(psi) => {
                        let dev = psi.scattered_fraction();
                        check(
                            &mut checks,
                            "mutation-canary",
                            dev > 1e-6,
                            format!("flipped-sign deviation {dev:.1e} (must exceed 1e-6)"),
                        );
                    }
                    Err(e) => check(&mut checks, "mutation-canary", false, e.to_string()),
                }
            }
        }
        Err(e) => check(&mut checks, "trivial-dtn-identity", false, e.to_string()),
    }

    if full {
        // reproducing identity on the boundary quadrature + convergence order
        let res = green_riemann_residual(one, 128);
        let order = (green_riemann_residual(one, 16) / green_riemann_residual(one, 32)).log2();
        check(
            &mut checks,
            "green-riemann-identity",
            res < 1e-6 && order >= 1.5,
            format!("residual {res:.1e} at 128 nodes, order {order:.2}"),
        );

        // boundary trace vs the interior CGO oracle on a smooth phantom
        let sigma = ConductivityField::named("gaussian").unwrap();
        let r = ForwardSolver::new(&sigma, 96, 64)
            .and_then(|s| s.dtn_operators())
            .map_err(|e| e.to_string())
            .and_then(|dtn| {
                let psi = solve_psi_boundary(&dtn, one).map_err(|e| e.to_string())?;
                let grid = Grid::new(128, 2.0);
                let q = sigma.q_grid(&grid);
                let slice = solve_mu(&q, one).map_err(|e| e.to_string())?;
                let oracle: Vec<Complex64> = (0..dtn.n_b)
                    .map(|j| {
                        let t = 2.0 * std::f64::consts::PI * j as f64 / dtn.n_b as f64;
                        slice.psi_at(Complex64::from_polar(1.0, t))
                    })
                    .collect();
                Ok(psi.relative_l2_error(&oracle))
            });
        match r {
            Ok(err) => check(
                &mut checks,
                "boundary-vs-interior-oracle",
                err < 0.02,
                format!("rel L2 {err:.2e}"),
            ),
            Err(e) => check(&mut checks, "boundary-vs-interior-oracle", false, e),
        }
    }

    Report { checks }
}

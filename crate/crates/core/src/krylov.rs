//! Restarted GMRES over plain `f64` vectors.
//!
//! The operators in this crate are matrix-free (FFT convolutions, spectral
//! solves), so the solver takes the action `A(v)` as a closure. Complex and
//! real-linear systems are handled by the callers flattening their unknowns
//! into interleaved real vectors; GMRES itself never needs to know.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("gmres stagnated: residual {residual:.3e} after {iterations} iterations (tol {tol:.3e})")]
    Stagnation {
        residual: f64,
        iterations: usize,
        tol: f64,
    },
    #[error("operator produced a non-finite value")]
    NonFinite,
}

pub struct GmresOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-10,
            max_iters: 400,
            restart: 60,
        }
    }
}

pub struct GmresOutcome {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve A x = b for the linear action `apply`; `x` holds the initial guess
/// on entry and the solution on exit. Tolerance is relative to ‖b‖.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x: &mut [f64],
    opts: &GmresOptions,
) -> Result<GmresOutcome, KrylovError> {
    let n = b.len();
    assert_eq!(x.len(), n);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut total_iters = 0usize;
    let mut last_res = f64::INFINITY;

    while total_iters < opts.max_iters {
        // residual r = b - A x
        let ax = apply(x);
        if ax.iter().any(|v| !v.is_finite()) {
            return Err(KrylovError::NonFinite);
        }
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta / bnorm <= opts.tol {
            return Ok(GmresOutcome {
                iterations: total_iters,
                residual: beta / bnorm,
            });
        }
        if beta >= last_res * (1.0 - 1e-14) && total_iters > 0 {
            // restart did not improve the residual
            return Err(KrylovError::Stagnation {
                residual: beta / bnorm,
                iterations: total_iters,
                tol: opts.tol,
            });
        }
        last_res = beta;

        let m = opts.restart.min(opts.max_iters - total_iters);
        for v in r.iter_mut() {
            *v /= beta;
        }
        let mut basis: Vec<Vec<f64>> = vec![r];
        // Hessenberg in Givens-rotated form
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0usize;

        for k in 0..m {
            let mut w = apply(&basis[k]);
            if w.iter().any(|v| !v.is_finite()) {
                return Err(KrylovError::NonFinite);
            }
            let mut hk = vec![0.0; k + 2];
            // modified Gram-Schmidt with one reorthogonalization pass
            for _ in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let c = dot(&w, vi);
                    hk[i] += c;
                    for (wj, vj) in w.iter_mut().zip(vi) {
                        *wj -= c * vj;
                    }
                }
            }
            hk[k + 1] = norm(&w);
            // apply previous rotations
            for i in 0..k {
                let t = cs[i] * hk[i] + sn[i] * hk[i + 1];
                hk[i + 1] = -sn[i] * hk[i] + cs[i] * hk[i + 1];
                hk[i] = t;
            }
            let denom = (hk[k] * hk[k] + hk[k + 1] * hk[k + 1]).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (hk[k] / denom, hk[k + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            hk[k] = denom;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            let hk1 = hk[k + 1];
            hk[k + 1] = 0.0;
            h.push(hk);
            k_used = k + 1;
            total_iters += 1;

            let res = g[k + 1].abs() / bnorm;
            if res <= opts.tol || hk1 <= 1e-300 {
                break;
            }
            let mut v = w;
            for vj in v.iter_mut() {
                *vj /= hk1;
            }
            basis.push(v);
        }

        // back-substitute y from the triangular system and update x
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xj, vj) in x.iter_mut().zip(&basis[i]) {
                *xj += yi * vj;
            }
        }
    }

    // converged or out of budget: report the true residual
    let ax = apply(x);
    let res = b
        .iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    if res <= opts.tol * 10.0 {
        Ok(GmresOutcome {
            iterations: total_iters,
            residual: res,
        })
    } else {
        Err(KrylovError::Stagnation {
            residual: res,
            iterations: total_iters,
            tol: opts.tol,
        })
    }
}

/// Flatten a complex vector into interleaved re/im pairs.
pub fn c_to_r(v: &[num_complex::Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    for z in v {
        out.push(z.re);
        out.push(z.im);
    }
    out
}

/// Inverse of [`c_to_r`].
pub fn r_to_c(v: &[f64]) -> Vec<num_complex::Complex64> {
    v.chunks_exact(2)
        .map(|p| num_complex::Complex64::new(p[0], p[1]))
        .collect()
}

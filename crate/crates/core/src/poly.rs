//! Complex polynomials: univariate root finding (Aberth–Ehrlich with a
//! Newton polish) and bivariate coefficient tables with the evaluation,
//! differentiation, and resultant operations the curve-embedding checks use.

use num_complex::Complex64;
use thiserror::Error;

use crate::conventions::ONE;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("root iteration failed to converge (max residual {residual:.3e})")]
    NoConvergence { residual: f64 },
}

/// Univariate polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Degree after trimming numerically-zero leading coefficients.
    pub fn degree(&self) -> usize {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > 1e-13 * scale)
            .unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn deriv(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![Complex64::default()]);
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| (k as f64 + 1.0) * c)
                .collect(),
        )
    }

    /// All roots (with multiplicity) by the Aberth–Ehrlich simultaneous
    /// iteration, each polished by a few Newton steps.
    pub fn roots(&self) -> Result<Vec<Complex64>, PolyError> {
        let d = self.degree();
        if d == 0 {
            return if self.coeffs.iter().all(|c| c.norm() == 0.0) {
                Err(PolyError::ZeroPolynomial)
            } else {
                Ok(Vec::new())
            };
        }
        let c = &self.coeffs[..=d];
        let lead = c[d];
        // Cauchy bound on root magnitudes
        let radius = 1.0
            + c[..d]
                .iter()
                .map(|a| (a / lead).norm())
                .fold(0.0f64, f64::max);
        // deliberately irrational-angle start to avoid symmetric stalls
        let mut zs: Vec<Complex64> = (0..d)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64 + 0.4;
                0.5 * radius * Complex64::new(t.cos(), t.sin())
            })
            .collect();
        let dp = self.deriv();

        let mut converged = false;
        for _ in 0..200 {
            let mut max_step = 0.0f64;
            let snapshot = zs.clone();
            for i in 0..d {
                let z = snapshot[i];
                let p = self.eval(z);
                let q = dp.eval(z);
                let newton = if q.norm() > 0.0 { p / q } else { p };
                let mut s = Complex64::default();
                for (j, &zj) in snapshot.iter().enumerate() {
                    if j != i {
                        let dz = z - zj;
                        if dz.norm() > 1e-300 {
                            s += ONE / dz;
                        }
                    }
                }
                let denom = ONE - newton * s;
                let step = if denom.norm() > 1e-300 {
                    newton / denom
                } else {
                    newton
                };
                zs[i] = z - step;
                max_step = max_step.max(step.norm() / (1.0 + z.norm()));
            }
            if max_step < 1e-14 {
                converged = true;
                break;
            }
        }

        // Newton polish
        for z in zs.iter_mut() {
            for _ in 0..8 {
                let p = self.eval(*z);
                let q = dp.eval(*z);
                if q.norm() == 0.0 {
                    break;
                }
                let step = p / q;
                *z -= step;
                if step.norm() < 1e-15 * (1.0 + z.norm()) {
                    break;
                }
            }
        }

        let scale = c.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
        let residual = zs
            .iter()
            .map(|&z| self.eval(z).norm() / (scale * (1.0 + z.norm()).powi(d as i32)))
            .fold(0.0f64, f64::max);
        if converged || residual < 1e-10 {
            Ok(zs)
        } else {
            Err(PolyError::NoConvergence { residual })
        }
    }
}

/// Resultant of two univariate polynomials, computed as
/// lc(p)^{deg q} Π q(α_i) over the roots α_i of p.
pub fn resultant(p: &Poly, q: &Poly) -> Result<Complex64, PolyError> {
    let dp = p.degree();
    let dq = q.degree();
    if dp == 0 {
        return Ok(p.coeffs.first().copied().unwrap_or_default().powu(dq as u32));
    }
    let roots = p.roots()?;
    let mut out = p.coeffs[dp].powu(dq as u32);
    for r in roots {
        out *= q.eval(r);
    }
    Ok(out)
}

/// Bivariate polynomial P(z₁, z₂) = Σ c[i][j] z₁^i z₂^j.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    /// c[i][j] multiplies z₁^i z₂^j; rows may have unequal lengths.
    pub coeffs: Vec<Vec<Complex64>>,
}

impl Poly2 {
    pub fn new(coeffs: Vec<Vec<Complex64>>) -> Self {
        Poly2 { coeffs }
    }

    pub fn from_terms(terms: &[(usize, usize, Complex64)]) -> Self {
        let ni = terms.iter().map(|t| t.0).max().unwrap_or(0) + 1;
        let nj = terms.iter().map(|t| t.1).max().unwrap_or(0) + 1;
        let mut c = vec![vec![Complex64::default(); nj]; ni];
        for &(i, j, v) in terms {
            c[i][j] += v;
        }
        Poly2::new(c)
    }

    pub fn terms(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v.norm() > 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        // Horner in z1 of Horner-in-z2 row values
        let mut acc = Complex64::default();
        for row in self.coeffs.iter().rev() {
            let mut r = Complex64::default();
            for c in row.iter().rev() {
                r = r * z2 + c;
            }
            acc = acc * z1 + r;
        }
        acc
    }

    pub fn d_z1(&self) -> Poly2 {
        if self.coeffs.len() <= 1 {
            return Poly2::new(vec![vec![Complex64::default()]]);
        }
        Poly2::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, row)| row.iter().map(|c| (i as f64 + 1.0) * c).collect())
                .collect(),
        )
    }

    pub fn d_z2(&self) -> Poly2 {
        Poly2::new(
            self.coeffs
                .iter()
                .map(|row| {
                    if row.len() <= 1 {
                        vec![Complex64::default()]
                    } else {
                        row[1..]
                            .iter()
                            .enumerate()
                            .map(|(j, c)| (j as f64 + 1.0) * c)
                            .collect()
                    }
                })
                .collect(),
        )
    }

    /// Total degree d = max(i + j) over nonzero terms.
    pub fn total_degree(&self) -> usize {
        self.terms().iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms()
            .iter()
            .map(|t| t.2.norm())
            .fold(0.0f64, f64::max)
    }

    /// P(z₁, ·) as a univariate polynomial in z₂.
    pub fn at_z1(&self, z1: Complex64) -> Poly {
        let nj = self.coeffs.iter().map(|r| r.len()).max().unwrap_or(1);
        let mut out = vec![Complex64::default(); nj];
        let mut z1p = ONE;
        for row in &self.coeffs {
            for (j, c) in row.iter().enumerate() {
                out[j] += c * z1p;
            }
            z1p *= z1;
        }
        Poly::new(out)
    }

    /// The top-degree homogeneous part evaluated on the line (1, t):
    /// P̃_d(1, t) = Σ_{i+j=d} c[i][j] t^j, d the total degree.
    pub fn top_form_on_line(&self) -> Poly {
        let d = self.total_degree();
        let mut out = vec![Complex64::default(); d + 1];
        for (i, j, v) in self.terms() {
            if i + j == d {
                out[j] += v;
            }
        }
        Poly::new(out)
    }
}

/// Resultant of P and Q with respect to z₂, as a univariate polynomial in
/// z₁. Computed by evaluating the scalar resultant at scaled roots of unity
/// and inverting the DFT; `radius` sets the evaluation circle.
pub fn resultant_z2(p: &Poly2, q: &Poly2, radius: f64) -> Result<Poly, PolyError> {
    let dp = p.total_degree();
    let dq = q.total_degree();
    // crude but safe degree bound for Res_{z2}
    let deg_bound = dp * dq;
    let m = deg_bound + 1;
    let mut vals = Vec::with_capacity(m);
    for k in 0..m {
        let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        let z1 = radius * Complex64::new(t.cos(), t.sin());
        vals.push(resultant(&p.at_z1(z1), &q.at_z1(z1))?);
    }
    // inverse DFT, then undo the radius scaling coefficient-wise
    let mut coeffs = vec![Complex64::default(); m];
    for (n, c) in coeffs.iter_mut().enumerate() {
        let mut s = Complex64::default();
        for (k, v) in vals.iter().enumerate() {
            let t = -2.0 * std::f64::consts::PI * (n * k) as f64 / m as f64;
            s += v * Complex64::new(t.cos(), t.sin());
        }
        *c = s / m as f64 / radius.powi(n as i32);
    }
    Ok(Poly::new(coeffs))
}

//! Dense univariate polynomials over C: evaluation, interpolation on
//! circles, companion-matrix roots and Sylvester resultants.

use std::f64::consts::LN_10;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::unit_phase;
use crate::linalg::{balance, complex_eigenvalues, log_det, CMatrix, LogDet};

/// Coefficients in ascending degree; the length fixes the formal degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivariatePoly {
    pub coeffs: Vec<Complex64>,
}

impl UnivariatePoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self { coeffs: coeffs.iter().map(|&c| c.into()).collect() }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    /// `len − 1`; `None` for the empty coefficient list.
    pub fn formal_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Highest index whose coefficient exceeds `rel_tol · ‖c‖₂`.
    pub fn degree(&self, rel_tol: f64) -> Option<usize> {
        let cut = rel_tol * self.norm();
        self.coeffs.iter().rposition(|c| c.norm() > cut)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect(),
        }
    }

    /// Drop leading coefficients at or below `rel_tol · ‖c‖₂`.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        match self.degree(rel_tol) {
            Some(d) => Self { coeffs: self.coeffs[..=d].to_vec() },
            None => Self { coeffs: Vec::new() },
        }
    }

    /// All roots, taking exactly-zero leading coefficients off first:
    /// eigenvalues of the balanced companion matrix, each polished by one
    /// Newton step.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let p = self.trimmed(0.0);
        let n = match p.formal_degree() {
            None => return Err(Error::InvalidInput("zero polynomial has no finite root set".into())),
            Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        let lead = p.coeffs[n];
        let mut c = CMatrix::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            c[(i, n - 1)] = -p.coeffs[i] / lead;
        }
        balance(&mut c);
        let dp = p.derivative();
        let roots = complex_eigenvalues(&c)?
            .into_iter()
            .map(|z| {
                let d = dp.eval(z);
                if d.norm() > 0.0 {
                    let step = p.eval(z) / d;
                    if step.re.is_finite() && step.im.is_finite() {
                        return z - step;
                    }
                }
                z
            })
            .collect();
        Ok(roots)
    }
}

/// A complex number stored as `phase · exp(ln_abs)`.
pub fn to_log(z: Complex64) -> LogDet {
    let r = z.norm();
    if r == 0.0 {
        LogDet { ln_abs: f64::NEG_INFINITY, phase: Complex64::new(0.0, 0.0) }
    } else {
        LogDet { ln_abs: r.ln(), phase: z / r }
    }
}

/// Coefficients `c_0..c_{n−1}` of the degree `< n` polynomial through the
/// samples `f(r e(m/n))`, `m = 0..n`, by inverse DFT:
/// `c_j = r^{−j} (1/n) Σ_m f(v_m) e(−jm/n)`.
///
/// Returns the coefficients and `ln max_m |f(v_m)|`.
pub fn interpolate_on_circle<F>(f: F, n: usize, radius: f64) -> Result<(Vec<Complex64>, f64)>
where
    F: Fn(Complex64) -> Result<LogDet>,
{
    let nodes: Vec<Complex64> = (0..n).map(|m| unit_phase(m as f64 / n as f64) * radius).collect();
    let samples: Vec<LogDet> = nodes
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            let s = f(v)?;
            if s.ln_abs.is_nan() || s.ln_abs == f64::INFINITY {
                return Err(Error::SingularSample { index });
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let shift = samples.iter().map(|s| s.ln_abs).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok((vec![Complex64::new(0.0, 0.0); n], shift));
    }
    let scaled: Vec<Complex64> = samples
        .iter()
        .map(|s| if s.is_zero() { Complex64::new(0.0, 0.0) } else { s.phase * (s.ln_abs - shift).exp() })
        .collect();
    let coeffs = (0..n)
        .map(|j| {
            let sum: Complex64 = scaled
                .iter()
                .enumerate()
                .map(|(m, &y)| y * unit_phase(-(((j * m) % n) as f64) / n as f64))
                .sum();
            sum / n as f64 * (shift - j as f64 * radius.ln()).exp()
        })
        .collect();
    Ok((coeffs, shift))
}

/// Interpolate on several radii and keep, for each coefficient, the radius
/// with the smallest estimated error `max|f| · r^{−j}`.
pub fn interpolate_multi_radius<F>(f: F, n: usize, radii: &[f64]) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<LogDet>,
{
    let fits: Vec<(Vec<Complex64>, f64, f64)> = radii
        .iter()
        .map(|&r| interpolate_on_circle(&f, n, r).map(|(c, s)| (c, s, r.ln())))
        .collect::<Result<_>>()?;
    Ok((0..n)
        .map(|j| {
            let best = fits
                .iter()
                .min_by(|a, b| {
                    let ea = a.1 - j as f64 * a.2;
                    let eb = b.1 - j as f64 * b.2;
                    ea.total_cmp(&eb)
                })
                .expect("at least one radius");
            best.0[j]
        })
        .collect())
}

/// Sylvester resultant in log-magnitude form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resultant {
    pub log10_abs: f64,
    #[serde(skip)]
    pub phase: Complex64,
    /// `deg g · log10‖f‖₂ + deg f · log10‖g‖₂`, the Hadamard bound on `log10|R|`.
    pub log10_scale: f64,
}

impl Resultant {
    /// `log10 (|R| / scale)`, never positive up to rounding.
    pub fn relative_log10(&self) -> f64 {
        self.log10_abs - self.log10_scale
    }

    pub fn value(&self) -> Complex64 {
        self.phase * (self.log10_abs * LN_10).exp()
    }
}

/// Sylvester matrix of `f` (formal degree `m`) and `g` (formal degree `n`):
/// `n` shifted rows `a_0 … a_m` followed by `m` shifted rows `b_0 … b_n`.
pub fn sylvester_matrix(f: &UnivariatePoly, g: &UnivariatePoly) -> CMatrix {
    let m = f.formal_degree().unwrap_or(0);
    let n = g.formal_degree().unwrap_or(0);
    let size = m + n;
    let mut s = CMatrix::zeros(size, size);
    for row in 0..n {
        for (i, &c) in f.coeffs.iter().enumerate() {
            s[(row, row + i)] = c;
        }
    }
    for row in 0..m {
        for (i, &c) in g.coeffs.iter().enumerate() {
            s[(n + row, row + i)] = c;
        }
    }
    s
}

fn check_pair(f: &UnivariatePoly, g: &UnivariatePoly) -> Result<()> {
    if f.is_zero() && g.is_zero() {
        return Err(Error::BothZeroPolys);
    }
    if f.formal_degree().unwrap_or(0) == 0 && g.formal_degree().unwrap_or(0) == 0 {
        return Err(Error::InvalidInput("resultant needs a polynomial of degree >= 1".into()));
    }
    Ok(())
}

/// Resultant over the formal degrees, computed by pivoted LU.
pub fn sylvester_resultant_log(f: &UnivariatePoly, g: &UnivariatePoly) -> Result<Resultant> {
    check_pair(f, g)?;
    let m = f.formal_degree().unwrap_or(0) as f64;
    let n = g.formal_degree().unwrap_or(0) as f64;
    let det = log_det(&sylvester_matrix(f, g));
    Ok(Resultant {
        log10_abs: det.log10_abs(),
        phase: det.phase,
        log10_scale: n * f.norm().log10() + m * g.norm().log10(),
    })
}

pub fn sylvester_resultant(f: &UnivariatePoly, g: &UnivariatePoly) -> Result<Complex64> {
    Ok(sylvester_resultant_log(f, g)?.value())
}

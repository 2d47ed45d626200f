//! Simplicity certificates for two-dimensional fibers with coprime periods.
//!
//! With `u = e(θ)`, `v = e(φ)` the momentum fiber continues to the
//! Laurent-polynomial matrix `H̃(u, v)`. Clearing denominators,
//!
//! ```text
//! P_E(u, v) = det(D(u, v) + T(u, v)) = (uv)^{pq} det(H̃(u, v) − E),
//! d_{kℓ} = u²v e(k/p) + v e(−k/p) + uv² e(ℓ/q) + u e(−ℓ/q) − Euv,
//! T = uv · V̂∗.
//! ```
//!
//! `E` is a multiple eigenvalue of the fiber at `(u, v)` only if `P_E` and
//! `∂_E P_E` vanish together, so the resultants `f(u) = Res_v` and
//! `g(v) = Res_u` vanish there. A single sample where `f` and `g` are
//! nonzero shows that they are nonzero polynomials, hence that the
//! degenerate set is finite.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{fourier_forward, unit_phase, FourierCoefficients, PeriodicPotential};
use crate::linalg::{self, complex_eigenvalues, hermitian_eigenvalues, log_det, CMatrix, LogDet};
use crate::poly::{
    interpolate_multi_radius, interpolate_on_circle, sylvester_resultant_log, to_log,
    UnivariatePoly,
};

pub const SAMPLE_RADII: [f64; 3] = [0.01, 1.0, 100.0];
pub const DEFAULT_SAMPLES: usize = 8;
/// `log10` of the relative resultant magnitude a certificate must exceed.
pub const RELATIVE_THRESHOLD_LOG10: f64 = -8.0;
pub const SCAN_RESOLUTION: usize = 128;
pub const SCAN_TOL: f64 = 1e-8;
/// Fractional offset of the sample angles, `2 − φ` for the golden ratio `φ`.
const ANGLE_OFFSET: f64 = 0.381966;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Which spectral parameter the polynomial is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    U,
    V,
}

/// `(uv)(H̃(u, v) − E)` for a `(p, q)`-periodic potential.
#[derive(Debug, Clone)]
pub struct TorusOperator {
    pub p: usize,
    pub q: usize,
    pub energy: f64,
    coeffs: FourierCoefficients,
    convolution: CMatrix,
}

impl TorusOperator {
    pub fn new(v: &PeriodicPotential, energy: f64) -> Result<Self> {
        let dims = v.period().dims();
        if dims.len() != 2 {
            return Err(Error::InvalidInput(format!("certification needs d = 2, got d = {}", dims.len())));
        }
        let (p, q) = (dims[0], dims[1]);
        if p < 2 || q < 2 {
            return Err(Error::InvalidInput(format!("periods must be >= 2, got ({p}, {q})")));
        }
        if gcd(p, q) != 1 {
            return Err(Error::NotCoprime { p, q });
        }
        if !energy.is_finite() {
            return Err(Error::InvalidInput("energy is not finite".into()));
        }
        let coeffs = fourier_forward(v);
        let period = v.period().clone();
        let n = p * q;
        let convolution = CMatrix::from_fn(n, n, |a, b| coeffs.get(period.sub_mod(a, b)));
        Ok(Self { p, q, energy, coeffs, convolution })
    }

    pub fn dim(&self) -> usize {
        self.p * self.q
    }

    pub fn coefficients(&self) -> &FourierCoefficients {
        &self.coeffs
    }

    fn phases(&self, a: usize) -> (Complex64, Complex64) {
        let (k, l) = (a / self.q, a % self.q);
        (unit_phase(k as f64 / self.p as f64), unit_phase(l as f64 / self.q as f64))
    }

    /// `H̃(u, v)`; Hermitian for `|u| = |v| = 1`.
    pub fn hamiltonian(&self, u: Complex64, v: Complex64) -> CMatrix {
        let mut h = self.convolution.clone();
        for a in 0..self.dim() {
            let (ek, el) = self.phases(a);
            h[(a, a)] += u * ek + 1.0 / (u * ek) + v * el + 1.0 / (v * el);
        }
        h
    }

    /// Diagonal part `D(u, v)`.
    pub fn diagonal(&self, u: Complex64, v: Complex64) -> Vec<Complex64> {
        (0..self.dim())
            .map(|a| {
                let (ek, el) = self.phases(a);
                u * u * v * ek + v * ek.conj() + u * v * v * el + u * el.conj()
                    - self.energy * u * v
            })
            .collect()
    }

    /// `D(u, v) + T(u, v)`.
    pub fn matrix(&self, u: Complex64, v: Complex64) -> CMatrix {
        let mut m = &self.convolution * (u * v);
        for (a, d) in self.diagonal(u, v).into_iter().enumerate() {
            m[(a, a)] += d;
        }
        m
    }

    /// `P_E(u, v)` in log form.
    pub fn char_value(&self, u: Complex64, v: Complex64) -> LogDet {
        log_det(&self.matrix(u, v))
    }

    /// `∂_E P_E(u, v) = −(uv)^{pq} Σ_i ∏_{j≠i} (λ_j − E)` with `λ` the
    /// eigenvalues of `H̃(u, v)`.
    pub fn char_derivative_value(&self, u: Complex64, v: Complex64) -> Result<LogDet> {
        let lambda = complex_eigenvalues(&self.hamiltonian(u, v))?;
        let shifted: Vec<Complex64> = lambda.iter().map(|&l| l - self.energy).collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..shifted.len() {
            let mut prod = Complex64::new(1.0, 0.0);
            for (j, &s) in shifted.iter().enumerate() {
                if j != i {
                    prod *= s;
                }
            }
            sum += prod;
        }
        let mut out = to_log(-sum);
        let uv = u * v;
        out.ln_abs += self.dim() as f64 * uv.norm().ln();
        out.phase *= (uv / uv.norm()).powu(self.dim() as u32);
        Ok(out)
    }

    fn point(&self, var: Variable, fixed: Complex64, x: Complex64) -> (Complex64, Complex64) {
        match var {
            Variable::V => (fixed, x),
            Variable::U => (x, fixed),
        }
    }

    /// `x ↦ P_E` with the other parameter fixed, degree `2pq`.
    pub fn char_poly(&self, var: Variable, fixed: Complex64) -> Result<UnivariatePoly> {
        self.check_nonzero(fixed)?;
        let n = 2 * self.dim() + 1;
        let (c, _) = interpolate_on_circle(
            |x| {
                let (u, v) = self.point(var, fixed, x);
                Ok(self.char_value(u, v))
            },
            n,
            1.0,
        )?;
        Ok(UnivariatePoly::new(c))
    }

    /// `x ↦ ∂_E P_E`, kept at formal degree `2pq − 1`: the `x^{2pq}`
    /// coefficient of `P_E` does not depend on `E`.
    pub fn char_poly_derivative(&self, var: Variable, fixed: Complex64) -> Result<UnivariatePoly> {
        self.check_nonzero(fixed)?;
        let n = 2 * self.dim() + 1;
        let (mut c, _) = interpolate_on_circle(
            |x| {
                let (u, v) = self.point(var, fixed, x);
                self.char_derivative_value(u, v)
            },
            n,
            1.0,
        )?;
        c.truncate(n - 1);
        Ok(UnivariatePoly::new(c))
    }

    /// `P_E(u, ·)` interpolated on the radii `|u|, 1, 1/|u|` so that both
    /// the `O(|u|)` and the `O(1/|u|)` root clusters are resolved.
    pub fn char_poly_in_v_multi_radius(&self, u: Complex64) -> Result<UnivariatePoly> {
        self.check_nonzero(u)?;
        let r = u.norm();
        let c = interpolate_multi_radius(
            |x| Ok(self.char_value(u, x)),
            2 * self.dim() + 1,
            &[r, 1.0, 1.0 / r],
        )?;
        Ok(UnivariatePoly::new(c))
    }

    fn check_nonzero(&self, z: Complex64) -> Result<()> {
        if !(z.norm() > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidInput(format!("spectral parameter must be nonzero and finite, got {z}")));
        }
        Ok(())
    }

    /// `Res(P_E, ∂_E P_E)` in the chosen variable at a fixed other parameter.
    pub fn resultant(&self, var: Variable, fixed: Complex64) -> Result<crate::poly::Resultant> {
        let f = self.char_poly(var, fixed)?;
        let g = self.char_poly_derivative(var, fixed)?;
        sylvester_resultant_log(&f, &g)
    }
}

/// `v ↦ P_E(u0, v)`.
pub fn char_poly_in_v(v: &PeriodicPotential, energy: f64, u0: Complex64) -> Result<UnivariatePoly> {
    TorusOperator::new(v, energy)?.char_poly(Variable::V, u0)
}

/// `u ↦ P_E(u, v0)`.
pub fn char_poly_in_u(v: &PeriodicPotential, energy: f64, v0: Complex64) -> Result<UnivariatePoly> {
    TorusOperator::new(v, energy)?.char_poly(Variable::U, v0)
}

/// `v ↦ ∂_E P_E(u0, v)`.
pub fn char_poly_e_derivative_in_v(
    v: &PeriodicPotential,
    energy: f64,
    u0: Complex64,
) -> Result<UnivariatePoly> {
    TorusOperator::new(v, energy)?.char_poly_derivative(Variable::V, u0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultantSample {
    pub radius: f64,
    /// `[re, im]` of the fixed parameter.
    pub point: [f64; 2],
    pub log10_abs: f64,
    pub log10_scale: f64,
    pub relative_log10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedFinite,
    Inconclusive,
}

/// Numerical evidence that `f` and `g` are not identically zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub energy: f64,
    pub p: usize,
    pub q: usize,
    pub threshold_log10: f64,
    pub f_samples: Vec<ResultantSample>,
    pub g_samples: Vec<ResultantSample>,
    pub best_f_relative_log10: f64,
    pub best_g_relative_log10: f64,
    /// Grid nodes `(θ, φ)` where two fiber eigenvalues lie within `SCAN_TOL` of `E`.
    pub candidates: Vec<[f64; 2]>,
    pub candidate_bound: usize,
    pub scan_resolution: usize,
    pub verdict: Verdict,
}

fn sample_points(n: usize) -> Vec<(f64, Complex64)> {
    SAMPLE_RADII
        .iter()
        .flat_map(|&r| {
            (0..n).map(move |m| (r, unit_phase((m as f64 + ANGLE_OFFSET) / n as f64) * r))
        })
        .collect()
}

fn resultant_samples(op: &TorusOperator, var: Variable, n: usize) -> Result<Vec<ResultantSample>> {
    sample_points(n)
        .par_iter()
        .map(|&(radius, z)| {
            let r = op.resultant(var, z)?;
            Ok(ResultantSample {
                radius,
                point: [z.re, z.im],
                log10_abs: r.log10_abs,
                log10_scale: r.log10_scale,
                relative_log10: r.relative_log10(),
            })
        })
        .collect()
}

/// Scan the `(θ, φ)` cell for fibers with two eigenvalues within `SCAN_TOL` of `E`.
pub fn degenerate_scan(op: &TorusOperator, resolution: usize) -> Vec<[f64; 2]> {
    let (p, q) = (op.p as f64, op.q as f64);
    (0..resolution * resolution)
        .into_par_iter()
        .filter_map(|i| {
            let theta = (i / resolution) as f64 / (resolution as f64 * p);
            let phi = (i % resolution) as f64 / (resolution as f64 * q);
            let h = op.hamiltonian(unit_phase(theta), unit_phase(phi));
            let close = hermitian_eigenvalues(&h)
                .iter()
                .filter(|&&l| (l - op.energy).abs() < SCAN_TOL)
                .count();
            (close >= 2).then_some([theta, phi])
        })
        .collect()
}

pub fn certify_simplicity(
    v: &PeriodicPotential,
    energy: f64,
    n_samples: usize,
) -> Result<CertificateReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be >= 1".into()));
    }
    let op = TorusOperator::new(v, energy)?;
    let f_samples = resultant_samples(&op, Variable::V, n_samples)?;
    let g_samples = resultant_samples(&op, Variable::U, n_samples)?;
    let best = |s: &[ResultantSample]| {
        s.iter().map(|x| x.relative_log10).fold(f64::NEG_INFINITY, f64::max)
    };
    let best_f = best(&f_samples);
    let best_g = best(&g_samples);
    let candidates = degenerate_scan(&op, SCAN_RESOLUTION);
    let bound = 4 * op.dim() * op.dim();
    let verdict = if best_f > RELATIVE_THRESHOLD_LOG10
        && best_g > RELATIVE_THRESHOLD_LOG10
        && candidates.len() <= bound
    {
        Verdict::CertifiedFinite
    } else {
        Verdict::Inconclusive
    };
    Ok(CertificateReport {
        energy,
        p: op.p,
        q: op.q,
        threshold_log10: RELATIVE_THRESHOLD_LOG10,
        f_samples,
        g_samples,
        best_f_relative_log10: best_f,
        best_g_relative_log10: best_g,
        candidates,
        candidate_bound: bound,
        scan_resolution: SCAN_RESOLUTION,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMatch {
    pub k: usize,
    pub l: usize,
    pub root: [f64; 2],
    pub predicted: [f64; 2],
    pub abs_error: f64,
}

/// Measured behaviour of the `2pq` roots of `v ↦ P_E(u, v)` for small `|u|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootAsymptoticsReport {
    pub u: [f64; 2],
    pub large: Vec<RootMatch>,
    pub small: Vec<RootMatch>,
    /// Each root's nearest prediction is claimed exactly once.
    pub large_bijective: bool,
    pub small_bijective: bool,
    /// `max |v − v_pred| / |v_pred|` over large roots.
    pub max_large_rel_error: f64,
    /// `max |v − v_pred|` over large roots.
    pub max_large_abs_error: f64,
    /// `max |v − v_pred| / |u|²` over small roots.
    pub small_error_constant: f64,
    /// `|u| · min_{(k,ℓ)≠(k′,ℓ′)} |v_+^{kℓ} − v_+^{k′ℓ′}|`.
    pub separation_constant: f64,
    /// `max |λ′ − e(−k/p)| / |u|` over small roots.
    pub derivative_constant: f64,
}

fn assign(roots: &[Complex64], preds: &[(usize, usize, Complex64)]) -> (Vec<RootMatch>, bool) {
    let nearest: Vec<usize> = roots
        .iter()
        .map(|r| {
            (0..preds.len())
                .min_by(|&a, &b| (preds[a].2 - r).norm().total_cmp(&(preds[b].2 - r).norm()))
                .expect("predictions")
        })
        .collect();
    let mut seen = vec![false; preds.len()];
    let bijective = nearest.iter().all(|&i| !std::mem::replace(&mut seen[i], true));
    let pairing: Vec<usize> = if bijective {
        nearest
    } else {
        // Greedy on sorted distances.
        let mut pairs: Vec<(f64, usize, usize)> = roots
            .iter()
            .enumerate()
            .flat_map(|(i, r)| preds.iter().enumerate().map(move |(j, p)| ((p.2 - r).norm(), i, j)))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut out = vec![usize::MAX; roots.len()];
        let mut used = vec![false; preds.len()];
        for (_, i, j) in pairs {
            if out[i] == usize::MAX && !used[j] {
                out[i] = j;
                used[j] = true;
            }
        }
        out
    };
    let matches = roots
        .iter()
        .zip(&pairing)
        .map(|(r, &j)| {
            let (k, l, pred) = preds[j];
            RootMatch { k, l, root: [r.re, r.im], predicted: [pred.re, pred.im], abs_error: (r - pred).norm() }
        })
        .collect();
    (matches, bijective)
}

/// Eigenvalue of `A_u(v) = D + T` nearest zero.
fn near_zero_eigenvalue(op: &TorusOperator, u: Complex64, v: Complex64) -> Result<Complex64> {
    let ev = complex_eigenvalues(&op.matrix(u, v))?;
    Ok(ev.into_iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty"))
}

/// Compare the roots of `v ↦ P_E(u, v)` against their leading-order
/// positions `−(1/u) e(−(kq+ℓp)/pq)` and `−u e((kq−ℓp)/pq)`.
pub fn root_asymptotics_check(
    v: &PeriodicPotential,
    energy: f64,
    u: Complex64,
) -> Result<RootAsymptoticsReport> {
    if !(u.norm() > 0.0 && u.norm() <= 1e-2) {
        return Err(Error::DomainError(format!("need 0 < |u| <= 1e-2, got |u| = {}", u.norm())));
    }
    let op = TorusOperator::new(v, energy)?;
    let (p, q) = (op.p, op.q);
    let pq = p * q;
    let roots = op.char_poly_in_v_multi_radius(u)?.roots()?;
    let (large, small): (Vec<Complex64>, Vec<Complex64>) = roots.iter().partition(|r| r.norm() > 1.0);
    if large.len() != pq || small.len() != pq {
        return Err(Error::PartitionFailure { large: large.len(), small: small.len(), expected: pq });
    }
    let mut large_pred = Vec::with_capacity(pq);
    let mut small_pred = Vec::with_capacity(pq);
    for k in 0..p {
        for l in 0..q {
            let plus = (k * q + l * p) as f64 / pq as f64;
            let minus = (k * q) as f64 / pq as f64 - (l * p) as f64 / pq as f64;
            large_pred.push((k, l, -unit_phase(-plus) / u));
            small_pred.push((k, l, -u * unit_phase(minus)));
        }
    }
    let (large, large_bijective) = assign(&large, &large_pred);
    let (small, small_bijective) = assign(&small, &small_pred);

    let un = u.norm();
    let max_large_abs_error = large.iter().map(|m| m.abs_error).fold(0.0, f64::max);
    let max_large_rel_error = max_large_abs_error * un;
    let small_error_constant =
        small.iter().map(|m| m.abs_error).fold(0.0, f64::max) / (un * un);
    let mut min_sep = f64::INFINITY;
    for (i, a) in large.iter().enumerate() {
        for b in &large[i + 1..] {
            let d = Complex64::new(a.root[0] - b.root[0], a.root[1] - b.root[1]).norm();
            min_sep = min_sep.min(d);
        }
    }
    let h = 1e-2 * un;
    let mut derivative_constant = 0.0f64;
    for m in &small {
        let v0 = Complex64::new(m.root[0], m.root[1]);
        let up = near_zero_eigenvalue(&op, u, v0 + h)?;
        let down = near_zero_eigenvalue(&op, u, v0 - h)?;
        let slope = (up - down) / (2.0 * h);
        let expected = unit_phase(-(m.k as f64) / p as f64);
        derivative_constant = derivative_constant.max((slope - expected).norm() / un);
    }
    Ok(RootAsymptoticsReport {
        u: [u.re, u.im],
        large,
        small,
        large_bijective,
        small_bijective,
        max_large_rel_error,
        max_large_abs_error,
        small_error_constant,
        separation_constant: un * min_sep,
        derivative_constant,
    })
}

/// `‖A*A − AA*‖_max / ‖A‖²_max` for `A = D(u, v) + T(u, v)`.
pub fn normality_residual(
    v: &PeriodicPotential,
    energy: f64,
    u: Complex64,
    w: Complex64,
) -> Result<f64> {
    let op = TorusOperator::new(v, energy)?;
    op.check_nonzero(u)?;
    op.check_nonzero(w)?;
    Ok(linalg::normality_defect(&op.matrix(u, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{build_momentum, Quasimomentum};
    use crate::lattice::PeriodVector;

    fn p23() -> PeriodVector {
        PeriodVector::new(vec![2, 3]).unwrap()
    }

    #[test]
    fn coprimality_and_shape_checked() {
        let v = PeriodicPotential::zeros(PeriodVector::new(vec![2, 2]).unwrap());
        assert_eq!(certify_simplicity(&v, 0.0, 4).unwrap_err(), Error::NotCoprime { p: 2, q: 2 });
        let v = PeriodicPotential::zeros(PeriodVector::new(vec![3]).unwrap());
        assert!(TorusOperator::new(&v, 0.0).is_err());
    }

    #[test]
    fn torus_matches_floquet_determinant() {
        let v = PeriodicPotential::random(p23(), 7, 0.5);
        let op = TorusOperator::new(&v, 0.3).unwrap();
        let f = fourier_forward(&v);
        for &(t, s) in &[(0.1, 0.05), (0.37, 0.2), (0.49, 0.31)] {
            let (u, w) = (unit_phase(t), unit_phase(s));
            let th = Quasimomentum::new(p23(), vec![t, s]).unwrap();
            let mut h = build_momentum(&f, &th).unwrap().entries;
            for i in 0..6 {
                h[(i, i)] -= Complex64::from(0.3);
            }
            let expected = (u * w).powu(6) * log_det(&h).value();
            let got = op.char_value(u, w).value();
            assert!((got - expected).norm() < 1e-9 * expected.norm().max(1e-300));
            assert!(linalg::hermiticity_defect(&op.hamiltonian(u, w)) < 1e-14);
        }
    }

    #[test]
    fn char_poly_degree_and_reality() {
        let v = PeriodicPotential::random(p23(), 3, 0.3);
        let op = TorusOperator::new(&v, 0.37).unwrap();
        let u0 = unit_phase(0.123);
        let f = op.char_poly(Variable::V, u0).unwrap();
        assert_eq!(f.degree(1e-10), Some(12));
        for m in 0..20 {
            let w = unit_phase(m as f64 / 20.0 + 0.01);
            let val = f.eval(w) / (u0 * w).powu(6);
            assert!(val.im.abs() < 1e-9 * val.norm().max(1.0));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let v = PeriodicPotential::random(p23(), 5, 0.2);
        let u0 = Complex64::new(0.7, 0.4);
        let h = 1e-5;
        let g = char_poly_e_derivative_in_v(&v, 0.1, u0).unwrap();
        assert_eq!(g.coeffs.len(), 12);
        let up = char_poly_in_v(&v, 0.1 + h, u0).unwrap();
        let down = char_poly_in_v(&v, 0.1 - h, u0).unwrap();
        assert!(up.coeffs[12].norm() > 0.1);
        let fd: Vec<Complex64> =
            up.coeffs.iter().zip(&down.coeffs).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let scale = g.norm();
        for j in 0..12 {
            assert!((fd[j] - g.coeffs[j]).norm() < 1e-6 * scale, "coefficient {j}");
        }
        assert!(fd[12].norm() < 1e-6 * scale);
    }

    #[test]
    fn degenerate_points_kill_the_resultant() {
        let v = PeriodicPotential::zeros(p23());
        let op = TorusOperator::new(&v, 0.0).unwrap();
        let cands = degenerate_scan(&op, SCAN_RESOLUTION);
        assert!(cands.iter().any(|c| (c[0] - 0.25).abs() < 1e-12 && (c[1] - 0.25).abs() < 1e-12));
        for c in cands.iter().take(4) {
            let f = op.resultant(Variable::V, unit_phase(c[0])).unwrap();
            let g = op.resultant(Variable::U, unit_phase(c[1])).unwrap();
            assert!(f.relative_log10() < -4.0, "{}", f.relative_log10());
            assert!(g.relative_log10() < -4.0, "{}", g.relative_log10());
        }
    }

    #[test]
    fn normal_on_torus_not_beyond() {
        let v = PeriodicPotential::random(p23(), 1, 0.5);
        let on = normality_residual(&v, 0.2, unit_phase(0.1), unit_phase(0.7)).unwrap();
        assert!(on < 1e-14);
        let off = normality_residual(&v, 0.2, Complex64::new(0.3, 0.4), Complex64::new(2.0, -1.0)).unwrap();
        assert!(off > 1e-3);
        let c = PeriodicPotential::constant(p23(), 0.8);
        let flat = normality_residual(&c, 0.2, Complex64::new(0.3, 0.4), Complex64::new(2.0, -1.0)).unwrap();
        assert!(flat < 1e-14);
    }
}

//! Floquet–Bloch fiber operators.
//!
//! For a `p`-periodic potential the operator `Δ + V` on `ℓ²(Z^d)` decomposes
//! into `P × P` fibers indexed by the quasimomentum `θ ∈ ×_j [0, 1/p_j)`.
//! In the momentum basis the fiber is
//!
//! ```text
//! Ĥ[a, b] = δ_ab Σ_j 2cos(2π(a_j/p_j + θ_j)) + V̂(a − b)
//! ```
//!
//! and in the space basis it is the twisted Laplacian on the fundamental
//! domain plus multiplication by `V`, where a hop that leaves the domain in
//! direction `j` picks up `e(±p_j θ_j)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{unit_phase, FourierCoefficients, PeriodVector, PeriodicPotential};
use crate::linalg::{self, CMatrix, EigenSystem};

/// Hermiticity tolerance relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Point of the Brillouin cell `×_j [0, 1/p_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quasimomentum {
    period: PeriodVector,
    theta: Vec<f64>,
}

impl Quasimomentum {
    pub fn new(period: PeriodVector, theta: Vec<f64>) -> Result<Self> {
        period.check_dim(theta.len())?;
        for (index, (&value, &p)) in theta.iter().zip(period.dims()).enumerate() {
            let bound = 1.0 / p as f64;
            if !(0.0..bound).contains(&value) {
                return Err(Error::RangeViolation { index, value, bound });
            }
        }
        Ok(Self { period, theta })
    }

    /// Skips the range check; the fiber formulas make sense for any real θ.
    pub fn unchecked(period: PeriodVector, theta: Vec<f64>) -> Self {
        assert_eq!(period.dim(), theta.len(), "dimension mismatch");
        Self { period, theta }
    }

    pub fn zero(period: PeriodVector) -> Self {
        let theta = vec![0.0; period.dim()];
        Self { period, theta }
    }

    pub fn period(&self) -> &PeriodVector {
        &self.period
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Momentum,
    Space,
}

/// The `P × P` fiber operator at one quasimomentum.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    pub period: PeriodVector,
    pub theta: Quasimomentum,
    pub entries: CMatrix,
    pub basis: Basis,
}

impl FloquetMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.entries)
    }
}

fn check_period(expected: &PeriodVector, found: &PeriodVector) -> Result<()> {
    if expected != found {
        return Err(Error::PeriodMismatch {
            expected: expected.dims().to_vec(),
            found: found.dims().to_vec(),
        });
    }
    Ok(())
}

/// Caches the convolution part `V̂∗` so that many fibers of one potential
/// can be built cheaply.
#[derive(Debug, Clone)]
pub struct MomentumBuilder {
    period: PeriodVector,
    modes: Vec<Vec<usize>>,
    convolution: CMatrix,
}

impl MomentumBuilder {
    pub fn new(f: &FourierCoefficients) -> Self {
        let period = f.period().clone();
        let n = period.total();
        let convolution = CMatrix::from_fn(n, n, |a, b| f.get(period.sub_mod(a, b)));
        let modes = period.domain().collect();
        Self { period, modes, convolution }
    }

    pub fn period(&self) -> &PeriodVector {
        &self.period
    }

    /// Fiber entries at an arbitrary (unchecked) θ.
    pub fn entries(&self, theta: &[f64]) -> CMatrix {
        let mut m = self.convolution.clone();
        for (a, mode) in self.modes.iter().enumerate() {
            let diag: f64 = mode
                .iter()
                .zip(self.period.dims())
                .zip(theta)
                .map(|((&k, &p), &t)| 2.0 * (TAU * (k as f64 / p as f64 + t)).cos())
                .sum();
            m[(a, a)] += diag;
        }
        m
    }

    pub fn build(&self, theta: &Quasimomentum) -> Result<FloquetMatrix> {
        check_period(&self.period, theta.period())?;
        Ok(FloquetMatrix {
            period: self.period.clone(),
            theta: theta.clone(),
            entries: self.entries(theta.theta()),
            basis: Basis::Momentum,
        })
    }
}

/// Momentum-basis fiber `Ĥ_{p,θ}`.
pub fn build_momentum(f: &FourierCoefficients, theta: &Quasimomentum) -> Result<FloquetMatrix> {
    check_period(f.period(), theta.period())?;
    MomentumBuilder::new(f).build(theta)
}

/// Space-basis fiber `Δ_{p,θ} + V` on the fundamental domain.
pub fn build_space(v: &PeriodicPotential, theta: &Quasimomentum) -> Result<FloquetMatrix> {
    check_period(v.period(), theta.period())?;
    let period = v.period();
    let n = period.total();
    let mut m = CMatrix::zeros(n, n);
    for (a, site) in period.domain().enumerate() {
        m[(a, a)] += Complex64::from(v.values()[a]);
        for (j, &p) in period.dims().iter().enumerate() {
            let twist = unit_phase(p as f64 * theta.theta()[j]);
            let mut fwd = site.clone();
            let mut bwd = site.clone();
            let (fwd_phase, bwd_phase);
            if site[j] + 1 < p {
                fwd[j] += 1;
                fwd_phase = Complex64::new(1.0, 0.0);
            } else {
                fwd[j] = 0;
                fwd_phase = twist;
            }
            if site[j] > 0 {
                bwd[j] -= 1;
                bwd_phase = Complex64::new(1.0, 0.0);
            } else {
                bwd[j] = p - 1;
                bwd_phase = twist.conj();
            }
            m[(a, period.flat_index(&fwd))] += fwd_phase;
            m[(a, period.flat_index(&bwd))] += bwd_phase;
        }
    }
    Ok(FloquetMatrix {
        period: period.clone(),
        theta: theta.clone(),
        entries: m,
        basis: Basis::Space,
    })
}

/// Full ascending eigensystem of a fiber.
pub fn eigensystem(m: &FloquetMatrix) -> Result<EigenSystem> {
    let defect = m.hermiticity_defect();
    let scale = linalg::max_abs(&m.entries).max(1.0);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::InvalidInput(format!("fiber matrix is not Hermitian (defect {defect:e})")));
    }
    linalg::hermitian_eigen(&m.entries).map_err(|e| match e {
        Error::ConvergenceFailure { residual, .. } => {
            Error::ConvergenceFailure { residual, node: Some(m.theta.theta().to_vec()) }
        }
        other => other,
    })
}

/// Quasimomenta of the `p`-fibers that make up the `(m ∗ p)`-fiber at `θ`:
/// `{θ_j + ℓ_j/(p_j m_j) : 0 ≤ ℓ_j < m_j}`.
pub fn refinement_partition(
    p: &PeriodVector,
    m: &PeriodVector,
    theta: &Quasimomentum,
) -> Result<Vec<Quasimomentum>> {
    let fine = p.refine(m)?;
    let theta = Quasimomentum::new(fine, theta.theta().to_vec())?;
    m.domain()
        .map(|ell| {
            let phi: Vec<f64> = theta
                .theta()
                .iter()
                .zip(&ell)
                .zip(p.dims().iter().zip(m.dims()))
                .map(|((&t, &l), (&pj, &mj))| t + l as f64 / (pj * mj) as f64)
                .collect();
            Quasimomentum::new(p.clone(), phi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::fourier_forward;

    fn pv(d: &[usize]) -> PeriodVector {
        PeriodVector::new(d.to_vec()).unwrap()
    }

    fn spectrum(m: &FloquetMatrix) -> Vec<f64> {
        eigensystem(m).unwrap().eigenvalues
    }

    #[test]
    fn theta_range_is_checked() {
        let err = Quasimomentum::new(pv(&[2, 3]), vec![0.1, 0.4]).unwrap_err();
        assert!(matches!(err, Error::RangeViolation { index: 1, .. }));
        assert!(Quasimomentum::new(pv(&[2]), vec![-0.01]).is_err());
    }

    #[test]
    fn free_one_site_fiber() {
        let p = pv(&[1]);
        let f = fourier_forward(&PeriodicPotential::zeros(p.clone()));
        let m = build_momentum(&f, &Quasimomentum::zero(p.clone())).unwrap();
        assert!((m.entries[(0, 0)] - Complex64::from(2.0)).norm() < 1e-15);
        let th = Quasimomentum::new(p.clone(), vec![0.3]).unwrap();
        let s = build_space(&PeriodicPotential::zeros(p), &th).unwrap();
        assert!((s.entries[(0, 0)].re - 2.0 * (TAU * 0.3).cos()).abs() < 1e-15);
    }

    #[test]
    fn free_momentum_diagonal() {
        let p = pv(&[2, 3]);
        let f = fourier_forward(&PeriodicPotential::zeros(p.clone()));
        let m = build_momentum(&f, &Quasimomentum::zero(p)).unwrap();
        let diag: Vec<f64> = m.entries.diagonal().iter().map(|z| z.re).collect();
        let expected = [4.0, 1.0, 1.0, 0.0, -3.0, -3.0];
        for (a, b) in diag.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(spectrum(&m).iter().map(|x| x.round() as i64).collect::<Vec<_>>(), vec![
            -3, -3, 0, 1, 1, 4
        ]);
    }

    #[test]
    fn checkerboard_fiber_closed_form() {
        let p = pv(&[2]);
        let delta = 0.7;
        let v = PeriodicPotential::new(p.clone(), vec![delta, -delta]).unwrap();
        let f = fourier_forward(&v);
        for &t in &[0.0, 0.1, 0.37, 0.49] {
            let th = Quasimomentum::new(p.clone(), vec![t]).unwrap();
            let m = build_momentum(&f, &th).unwrap();
            assert!((m.entries[(0, 1)].re - delta).abs() < 1e-15);
            let c = (TAU * t).cos();
            let e = (4.0 * c * c + delta * delta).sqrt();
            let s = spectrum(&m);
            assert!((s[0] + e).abs() < 1e-12 && (s[1] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn free_circulant() {
        let p = pv(&[3]);
        let s = build_space(&PeriodicPotential::zeros(p.clone()), &Quasimomentum::zero(p)).unwrap();
        let row: Vec<f64> = s.entries.row(0).iter().map(|z| z.re).collect();
        assert_eq!(row, vec![0.0, 1.0, 1.0]);
        let ev = spectrum(&s);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] + 1.0).abs() < 1e-12);
        assert!((ev[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bases_agree() {
        let p = pv(&[2, 3]);
        let v = PeriodicPotential::random(p.clone(), 21, 1.5);
        let f = fourier_forward(&v);
        let th = Quasimomentum::new(p, vec![0.13, 0.29]).unwrap();
        let a = spectrum(&build_momentum(&f, &th).unwrap());
        let b = spectrum(&build_space(&v, &th).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn period_mismatch_is_reported() {
        let f = fourier_forward(&PeriodicPotential::zeros(pv(&[2])));
        let th = Quasimomentum::zero(pv(&[3]));
        assert!(matches!(build_momentum(&f, &th), Err(Error::PeriodMismatch { .. })));
    }

    #[test]
    fn partition_examples() {
        let p = pv(&[2]);
        let phi = refinement_partition(&p, &pv(&[2]), &Quasimomentum::zero(pv(&[4]))).unwrap();
        let t: Vec<f64> = phi.iter().map(|q| q.theta()[0]).collect();
        assert_eq!(t, vec![0.0, 0.25]);
        let th = Quasimomentum::new(pv(&[2, 3]), vec![0.2, 0.1]).unwrap();
        let same = refinement_partition(&pv(&[2, 3]), &pv(&[1, 1]), &th).unwrap();
        assert_eq!(same, vec![th]);
        let bad = Quasimomentum::unchecked(pv(&[4]), vec![0.3]);
        assert!(refinement_partition(&p, &pv(&[2]), &bad).is_err());
    }
}

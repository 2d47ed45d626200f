//! Integrated density of states, its Stieltjes transform, finite-volume
//! eigenvalue counts and spectral measures of finitely supported vectors.
//!
//! Cell integrals are taken as averages over a midpoint θ-grid, so that
//! `k(E) = mean_θ #{j : E_j(θ) ≤ E} / P`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::MomentumBuilder;
use crate::lattice::{fourier_forward, unit_phase, PeriodVector, PeriodicPotential};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};

pub const DEFAULT_EPS: f64 = 1e-3;
pub const FINITE_VOLUME_LIMIT: usize = 20_000;
/// Multiplicative slack on the density-ratio constant.
pub const RATIO_SLACK: f64 = 1.05;

/// Midpoint nodes `θ_j = (i_j + ½) / (n p_j)`.
fn midpoint_nodes(period: &PeriodVector, n: usize) -> Vec<Vec<f64>> {
    let d = period.dim();
    (0..n.pow(d as u32))
        .map(|mut i| {
            let mut theta = vec![0.0; d];
            for j in (0..d).rev() {
                theta[j] = ((i % n) as f64 + 0.5) / (n * period.dims()[j]) as f64;
                i /= n;
            }
            theta
        })
        .collect()
}

fn check_theta_n(theta_n: usize) -> Result<()> {
    if theta_n < 2 {
        return Err(Error::InvalidInput(format!("theta_n must be >= 2, got {theta_n}")));
    }
    Ok(())
}

/// Fiber spectra on a midpoint θ-grid; the quadrature behind every cell average.
#[derive(Debug, Clone)]
pub struct FiberSamples {
    pub period: PeriodVector,
    pub theta_n: usize,
    /// Ascending eigenvalues at each node.
    pub values: Vec<Vec<f64>>,
}

impl FiberSamples {
    pub fn new(v: &PeriodicPotential, theta_n: usize) -> Result<Self> {
        check_theta_n(theta_n)?;
        let builder = MomentumBuilder::new(&fourier_forward(v));
        let values = midpoint_nodes(v.period(), theta_n)
            .par_iter()
            .map(|t| hermitian_eigenvalues(&builder.entries(t)))
            .collect();
        Ok(Self { period: v.period().clone(), theta_n, values })
    }

    fn weight(&self) -> f64 {
        1.0 / (self.values.len() * self.period.total()) as f64
    }

    /// `k(E)`: normalized count of fiber eigenvalues `≤ E`.
    pub fn ids(&self, energy: f64) -> f64 {
        let count: usize = self.values.iter().map(|s| s.partition_point(|&x| x <= energy)).sum();
        count as f64 * self.weight()
    }

    /// `∫ dν(t) / (t − z)`.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        let sum: Complex64 =
            self.values.iter().flat_map(|s| s.iter()).map(|&e| 1.0 / (e - z)).sum();
        sum * self.weight()
    }

    /// Poisson-smoothed density `(1/π) Im ∫ dν(t) / (t − E − iε)`.
    pub fn density(&self, energy: f64, eps: f64) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .flat_map(|s| s.iter())
            .map(|&e| eps / ((e - energy).powi(2) + eps * eps))
            .sum();
        sum * self.weight() / PI
    }

    /// `(∫ t dν, ∫ t² dν)`.
    pub fn moments(&self) -> (f64, f64) {
        let (m1, m2) = self
            .values
            .iter()
            .flat_map(|s| s.iter())
            .fold((0.0, 0.0), |(a, b), &e| (a + e, b + e * e));
        (m1 * self.weight(), m2 * self.weight())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().map(|s| s[s.len() - 1]).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdsCurve {
    pub energies: Vec<f64>,
    pub k: Vec<f64>,
    pub theta_n: usize,
}

fn check_energies(energies: &[f64]) -> Result<()> {
    if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
        return Err(Error::InvalidInput(format!("energies[{i}] is not finite")));
    }
    if energies.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("energy grid must be ascending".into()));
    }
    Ok(())
}

/// IDS by midpoint quadrature on a `theta_n^d` grid.
pub fn ids(v: &PeriodicPotential, energies: &[f64], theta_n: usize) -> Result<IdsCurve> {
    check_energies(energies)?;
    let fs = FiberSamples::new(v, theta_n)?;
    Ok(IdsCurve {
        energies: energies.to_vec(),
        k: energies.iter().map(|&e| fs.ids(e)).collect(),
        theta_n,
    })
}

/// Fraction of eigenvalues below `E` of `Δ + V` restricted to the box
/// `×_j {0, …, ℓ p_j − 1}` (hops leaving the box dropped).
///
/// The count is the number of negative pivots of a banded `LDLᵀ`
/// factorization of `H − E` (Sylvester's law of inertia).
pub fn ids_finite_volume(v: &PeriodicPotential, ell: usize, energy: f64) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidInput("ell must be >= 1".into()));
    }
    if !energy.is_finite() {
        return Err(Error::InvalidInput("energy is not finite".into()));
    }
    let dims: Vec<usize> = v.period().dims().iter().map(|&p| p * ell).collect();
    let sites = dims.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l)).unwrap_or(usize::MAX);
    if sites > FINITE_VOLUME_LIMIT {
        return Err(Error::SizeLimit { sites, limit: FINITE_VOLUME_LIMIT });
    }
    // Storage order: the longest axis runs slowest, which minimizes the bandwidth.
    let mut axes: Vec<usize> = (0..dims.len()).collect();
    axes.sort_by(|&a, &b| dims[b].cmp(&dims[a]).then(a.cmp(&b)));
    let mut stride = vec![0usize; dims.len()];
    let mut s = 1;
    for &ax in axes.iter().rev() {
        stride[ax] = s;
        s *= dims[ax];
    }
    let bw = stride[axes[0]];

    // band[i][k] = (H − E)[i, i + k]
    let mut band = vec![vec![0.0f64; bw + 1]; sites];
    let mut site = vec![0i64; dims.len()];
    for _ in 0..sites {
        let i: usize = site.iter().zip(&stride).map(|(&x, &st)| x as usize * st).sum();
        band[i][0] = v.at(&site) - energy;
        for (j, &l) in dims.iter().enumerate() {
            if (site[j] as usize) + 1 < l {
                band[i][stride[j]] = 1.0;
            }
        }
        for j in (0..dims.len()).rev() {
            site[j] += 1;
            if (site[j] as usize) < dims[j] {
                break;
            }
            site[j] = 0;
        }
    }

    let scale = 2.0 * dims.len() as f64 + v.sup_norm() + energy.abs();
    let tiny = f64::EPSILON * scale;
    let mut negative = 0usize;
    for i in 0..sites {
        let mut d = band[i][0];
        if d == 0.0 {
            d = tiny;
            band[i][0] = d;
        }
        if d < 0.0 {
            negative += 1;
        }
        let reach = bw.min(sites - 1 - i);
        for k in 1..=reach {
            let lik = band[i][k] / d;
            if lik == 0.0 {
                continue;
            }
            let (head, tail) = band.split_at_mut(i + 1);
            let row_i = &head[i];
            let row_j = &mut tail[k - 1];
            for m in k..=reach {
                row_j[m - k] -= lik * row_i[m];
            }
        }
    }
    Ok(negative as f64 / sites as f64)
}

/// Stieltjes transform of the density of states at `z`, `Im z > 0`.
pub fn dos_stieltjes(v: &PeriodicPotential, z: Complex64, theta_n: usize) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::DomainError(format!("Im z must be positive, got {}", z.im)));
    }
    Ok(FiberSamples::new(v, theta_n)?.stieltjes(z))
}

/// Finitely supported vector on `Z^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceVector {
    pub entries: Vec<(Vec<i64>, Complex64)>,
}

impl SourceVector {
    pub fn delta(site: Vec<i64>) -> Self {
        Self { entries: vec![(site, Complex64::new(1.0, 0.0))] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    pub fn support_size(&self) -> usize {
        self.entries.iter().filter(|(_, c)| c.norm_sqr() > 0.0).count()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { entries: self.entries.iter().map(|(n, z)| (n.clone(), z * c)).collect() }
    }

    /// `#supp(u) · ‖u‖²`.
    pub fn ratio_constant(&self) -> f64 {
        self.support_size() as f64 * self.norm_sqr()
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidInput("source vector has empty support".into()));
        }
        for (i, (n, c)) in self.entries.iter().enumerate() {
            if n.len() != d {
                return Err(Error::InvalidInput(format!("u[{i}] has {} coordinates, d = {d}", n.len())));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidInput(format!("u[{i}] is not finite")));
            }
        }
        Ok(())
    }

    /// `u_θ(a) = P^{−1/2} Σ_n e(−n·(θ + a/p)) u(n)`.
    fn fiber(&self, period: &PeriodVector, theta: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / (period.total() as f64).sqrt();
        period
            .domain()
            .map(|a| {
                self.entries
                    .iter()
                    .map(|(n, c)| {
                        let x: f64 = n
                            .iter()
                            .zip(&a)
                            .zip(period.dims().iter().zip(theta))
                            .map(|((&nj, &aj), (&pj, &tj))| {
                                nj as f64 * (tj + aj as f64 / pj as f64)
                            })
                            .sum();
                        unit_phase(-x) * c
                    })
                    .sum::<Complex64>()
                    * scale
            })
            .collect()
    }
}

/// Fiber spectra with spectral weights `|⟨ψ_j(θ), u_θ⟩|²` on a midpoint grid.
#[derive(Debug, Clone)]
pub struct WeightedSamples {
    pub fibers: FiberSamples,
    pub weights: Vec<Vec<f64>>,
}

impl WeightedSamples {
    pub fn new(v: &PeriodicPotential, u: &SourceVector, theta_n: usize) -> Result<Self> {
        check_theta_n(theta_n)?;
        u.check(v.dim())?;
        let period = v.period().clone();
        let builder = MomentumBuilder::new(&fourier_forward(v));
        let per_node: Vec<(Vec<f64>, Vec<f64>)> = midpoint_nodes(&period, theta_n)
            .par_iter()
            .map(|t| {
                let es = hermitian_eigen(&builder.entries(t))
                    .map_err(|e| attach_node(e, t))?;
                let ut = u.fiber(&period, t);
                let w = (0..es.len())
                    .map(|j| {
                        es.eigenvectors
                            .column(j)
                            .iter()
                            .zip(&ut)
                            .map(|(psi, x)| psi.conj() * x)
                            .sum::<Complex64>()
                            .norm_sqr()
                    })
                    .collect();
                Ok((es.eigenvalues, w))
            })
            .collect::<Result<_>>()?;
        let (values, weights) = per_node.into_iter().unzip();
        Ok(Self { fibers: FiberSamples { period, theta_n, values }, weights })
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.fibers
            .values
            .iter()
            .zip(&self.weights)
            .flat_map(|(e, w)| e.iter().copied().zip(w.iter().copied()))
    }

    fn node_weight(&self) -> f64 {
        1.0 / self.weights.len() as f64
    }

    /// `⟨u, (H − z)⁻¹ u⟩`.
    pub fn resolvent(&self, z: Complex64) -> Complex64 {
        self.pairs().map(|(e, w)| w / (e - z)).sum::<Complex64>() * self.node_weight()
    }

    pub fn density(&self, energy: f64, eps: f64) -> f64 {
        let sum: f64 =
            self.pairs().map(|(e, w)| w * eps / ((e - energy).powi(2) + eps * eps)).sum();
        sum * self.node_weight() / PI
    }

    pub fn total_mass(&self) -> f64 {
        self.pairs().map(|(_, w)| w).sum::<f64>() * self.node_weight()
    }
}

fn attach_node(e: Error, theta: &[f64]) -> Error {
    match e {
        Error::ConvergenceFailure { residual, .. } => {
            Error::ConvergenceFailure { residual, node: Some(theta.to_vec()) }
        }
        other => other,
    }
}

/// Smoothed density `dμ^u/dE` sampled on an energy grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub source: SourceVector,
    pub energies: Vec<f64>,
    pub density: Vec<f64>,
    pub eps: f64,
    pub theta_n: usize,
    /// Trapezoid integral of `density` over the energy grid.
    pub mass: f64,
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

pub fn spectral_density(
    v: &PeriodicPotential,
    u: &SourceVector,
    energies: &[f64],
    eps: f64,
    theta_n: usize,
) -> Result<SpectralMeasure> {
    check_energies(energies)?;
    check_eps(eps)?;
    let ws = WeightedSamples::new(v, u, theta_n)?;
    let density: Vec<f64> = energies.iter().map(|&e| ws.density(e, eps)).collect();
    Ok(SpectralMeasure {
        source: u.clone(),
        energies: energies.to_vec(),
        mass: trapezoid(energies, &density),
        density,
        eps,
        theta_n,
    })
}

/// Result of comparing `dμ^u` against the density of states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRatio {
    pub max_ratio: f64,
    pub argmax_energy: f64,
    /// `#supp(u) · ‖u‖²`.
    pub bound: f64,
}

/// Largest ratio of smoothed densities `dμ^u/dν` over the energy grid;
/// fails with `BoundViolation` if it exceeds `#supp(u)·‖u‖²` by more than 5%.
/// Energies where the smoothed DOS underflows are skipped.
pub fn density_ratio_bound(
    v: &PeriodicPotential,
    u: &SourceVector,
    energies: &[f64],
    eps: f64,
    theta_n: usize,
) -> Result<DensityRatio> {
    let r = density_ratio(v, u, energies, eps, theta_n)?;
    if r.max_ratio > r.bound * RATIO_SLACK {
        return Err(Error::BoundViolation { ratio: r.max_ratio, bound: r.bound });
    }
    Ok(r)
}

/// The measurement behind [`density_ratio_bound`] without the assertion.
pub fn density_ratio(
    v: &PeriodicPotential,
    u: &SourceVector,
    energies: &[f64],
    eps: f64,
    theta_n: usize,
) -> Result<DensityRatio> {
    check_energies(energies)?;
    check_eps(eps)?;
    let ws = WeightedSamples::new(v, u, theta_n)?;
    let mut best = DensityRatio { max_ratio: 0.0, argmax_energy: f64::NAN, bound: u.ratio_constant() };
    for &e in energies {
        let nu = ws.fibers.density(e, eps);
        if nu <= f64::MIN_POSITIVE * 1e10 {
            continue;
        }
        let r = ws.density(e, eps) / nu;
        if r > best.max_ratio {
            best.max_ratio = r;
            best.argmax_energy = e;
        }
    }
    Ok(best)
}

/// `(∫ E dν, ∫ E² dν)` by θ-quadrature.
pub fn moments(v: &PeriodicPotential, theta_n: usize) -> Result<(f64, f64)> {
    Ok(FiberSamples::new(v, theta_n)?.moments())
}

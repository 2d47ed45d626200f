//! Periods, fundamental domains and discrete Fourier analysis of
//! periodic functions on Z^d.
//!
//! The fundamental domain of a period vector `p` is `×_j {0, …, p_j − 1}`,
//! stored lexicographically with the last coordinate running fastest. The
//! dual set `B = ×_j {0, 1/p_j, …, (p_j − 1)/p_j}` is stored the same way,
//! indexed by the integer multi-index `k_j · p_j`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the reality symmetry `F(−k) = conj F(k)`, relative to `‖F‖₂`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// `e(x) = exp(2πi x)`.
#[inline]
pub fn unit_phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x)
}

/// Period vector `p ∈ (Z_+)^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PeriodVector {
    dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for PeriodVector {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        PeriodVector::new(dims)
    }
}

impl From<PeriodVector> for Vec<usize> {
    fn from(p: PeriodVector) -> Self {
        p.dims
    }
}

impl PeriodVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidInput("period vector must have d >= 1 entries".into()));
        }
        if let Some(j) = dims.iter().position(|&p| p == 0) {
            return Err(Error::InvalidInput(format!("period[{j}] must be >= 1")));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Lattice dimension `d`.
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// `P = ∏ p_j`, the size of the fundamental domain.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Componentwise product `m ∗ p`.
    pub fn refine(&self, m: &PeriodVector) -> Result<PeriodVector> {
        self.check_dim(m.dim())?;
        PeriodVector::new(self.dims.iter().zip(&m.dims).map(|(p, m)| p * m).collect())
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: period has d = {}, got {d}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Lexicographic position of a multi-index inside the fundamental domain.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &p)| {
            debug_assert!(i < p);
            acc * p + i
        })
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (slot, &p) in idx.iter_mut().zip(&self.dims).rev() {
            *slot = flat % p;
            flat /= p;
        }
        idx
    }

    /// Flat index of the class of an arbitrary lattice site.
    pub fn reduce(&self, site: &[i64]) -> usize {
        debug_assert_eq!(site.len(), self.dim());
        site.iter().zip(&self.dims).fold(0, |acc, (&n, &p)| {
            acc * p + n.rem_euclid(p as i64) as usize
        })
    }

    /// All multi-indices of the fundamental domain in lexicographic order.
    pub fn domain(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total()).map(move |f| self.multi_index(f))
    }

    /// Flat index of `a − b` taken modulo the period.
    pub fn sub_mod(&self, a: usize, b: usize) -> usize {
        let ai = self.multi_index(a);
        let bi = self.multi_index(b);
        let diff: Vec<usize> = ai
            .iter()
            .zip(&bi)
            .zip(&self.dims)
            .map(|((&x, &y), &p)| (x + p - y) % p)
            .collect();
        self.flat_index(&diff)
    }

    /// Flat index of `−a` modulo the period.
    pub fn neg_mod(&self, a: usize) -> usize {
        let idx: Vec<usize> =
            self.multi_index(a).iter().zip(&self.dims).map(|(&x, &p)| (p - x) % p).collect();
        self.flat_index(&idx)
    }

    /// `P · (k·n) mod P` for `k ∈ B` given by its integer multi-index.
    fn phase_numerator(&self, k: &[usize], n: &[usize]) -> usize {
        let total = self.total();
        k.iter()
            .zip(n)
            .zip(&self.dims)
            .map(|((&k, &n), &p)| (k * n % p) * (total / p))
            .sum::<usize>()
            % total
    }
}

/// Table of the `P`-th roots of unity `e(r/P)`.
struct RootTable(Vec<Complex64>);

impl RootTable {
    fn new(total: usize) -> Self {
        Self((0..total).map(|r| unit_phase(r as f64 / total as f64)).collect())
    }

    fn get(&self, r: usize) -> Complex64 {
        self.0[r % self.0.len()]
    }
}

/// Real potential given by its values on the fundamental domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPotential {
    period: PeriodVector,
    values: Vec<f64>,
}

impl PeriodicPotential {
    pub fn new(period: PeriodVector, values: Vec<f64>) -> Result<Self> {
        if values.len() != period.total() {
            return Err(Error::InvalidInput(format!(
                "potential has {} values, period requires {}",
                values.len(),
                period.total()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("values[{i}] is not finite")));
        }
        Ok(Self { period, values })
    }

    pub fn zeros(period: PeriodVector) -> Self {
        let values = vec![0.0; period.total()];
        Self { period, values }
    }

    pub fn constant(period: PeriodVector, c: f64) -> Self {
        let values = vec![c; period.total()];
        Self { period, values }
    }

    /// Uniform random values rescaled so that `‖V‖_∞ = norm` exactly.
    pub fn random(period: PeriodVector, seed: u64, norm: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<f64> =
            (0..period.total()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max > 0.0 {
            values.iter_mut().for_each(|v| *v = *v / max * norm);
        }
        Self { period, values }
    }

    pub fn period(&self) -> &PeriodVector {
        &self.period
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.period.dim()
    }

    /// Value at an arbitrary lattice site.
    pub fn at(&self, site: &[i64]) -> f64 {
        self.values[self.period.reduce(site)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise sum; both potentials must share the same period.
    pub fn add(&self, other: &PeriodicPotential) -> Result<PeriodicPotential> {
        if self.period != other.period {
            return Err(Error::PeriodMismatch {
                expected: self.period.dims().to_vec(),
                found: other.period.dims().to_vec(),
            });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { period: self.period.clone(), values })
    }

    pub fn scaled(&self, c: f64) -> PeriodicPotential {
        Self { period: self.period.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }
}

/// Fourier coefficients `V̂(k)`, `k ∈ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    period: PeriodVector,
    coeffs: Vec<Complex64>,
}

impl FourierCoefficients {
    pub fn new(period: PeriodVector, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != period.total() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients given, period requires {}",
                coeffs.len(),
                period.total()
            )));
        }
        Ok(Self { period, coeffs })
    }

    pub fn period(&self) -> &PeriodVector {
        &self.period
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at the flat index of `k`.
    pub fn get(&self, flat: usize) -> Complex64 {
        self.coeffs[flat]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_k |F(−k) − conj F(k)|`.
    pub fn symmetry_residual(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|k| (self.coeffs[self.period.neg_mod(k)] - self.coeffs[k].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Flat indices whose coefficient magnitude exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&k| self.coeffs[k].norm() > threshold).collect()
    }
}

/// `V̂(k) = (1/P) Σ_n V(n) e(−k·n)` by direct summation.
pub fn fourier_forward(v: &PeriodicPotential) -> FourierCoefficients {
    let period = v.period.clone();
    let total = period.total();
    let roots = RootTable::new(total);
    let sites: Vec<Vec<usize>> = period.domain().collect();
    let coeffs = sites
        .iter()
        .map(|k| {
            let sum: Complex64 = sites
                .iter()
                .zip(&v.values)
                .map(|(n, &val)| roots.get(total - period.phase_numerator(k, n)) * val)
                .sum();
            sum / total as f64
        })
        .collect();
    FourierCoefficients { period, coeffs }
}

/// `V(n) = Σ_k V̂(k) e(k·n)`; fails unless the coefficients describe a real function.
pub fn fourier_inverse(f: &FourierCoefficients) -> Result<PeriodicPotential> {
    let residue = f.symmetry_residual();
    if residue > SYMMETRY_TOL * f.norm() {
        return Err(Error::SymmetryViolation { residue });
    }
    let period = f.period.clone();
    let total = period.total();
    let roots = RootTable::new(total);
    let sites: Vec<Vec<usize>> = period.domain().collect();
    let values = sites
        .iter()
        .map(|n| {
            sites
                .iter()
                .zip(&f.coeffs)
                .map(|(k, &c)| c * roots.get(period.phase_numerator(k, n)))
                .sum::<Complex64>()
                .re
        })
        .collect();
    Ok(PeriodicPotential { period, values })
}

/// View `v` as an `(m ∗ p)`-periodic function.
pub fn reperiodize(v: &PeriodicPotential, m: &PeriodVector) -> Result<PeriodicPotential> {
    let period = v.period.refine(m)?;
    let values = period
        .domain()
        .map(|n| {
            let site: Vec<i64> = n.iter().map(|&x| x as i64).collect();
            v.at(&site)
        })
        .collect();
    Ok(PeriodicPotential { period, values })
}

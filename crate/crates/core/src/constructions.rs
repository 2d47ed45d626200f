//! Explicit potentials and constructive procedures: the checkerboard gap
//! opener, the staircase with the maximal number of gaps, the interval test
//! for small coprime-periodic potentials and the limit-periodic iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bands::{self, SpectrumResult, GAP_TOL};
use crate::error::{Error, Result};
use crate::lattice::{reperiodize, PeriodVector, PeriodicPotential};

/// Tolerance used to shrink the forbidden window `(−δ, δ)` before testing it.
pub const CHECKERBOARD_TOL: f64 = 1e-6;
/// Random vectors used for the norm identity check.
const NORM_TRIALS: usize = 20;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn check_coprime(period: &PeriodVector) -> Result<(usize, usize)> {
    let dims = period.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidInput(format!("need d = 2, got d = {}", dims.len())));
    }
    let (p, q) = (dims[0], dims[1]);
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    Ok((p, q))
}

/// `V(n) = δ` if `Σ n_j` is even, `−δ` otherwise.
pub fn checkerboard(d: usize, delta: f64) -> Result<PeriodicPotential> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let period = PeriodVector::new(vec![2; d])?;
    let values =
        period.domain().map(|n| if n.iter().sum::<usize>() % 2 == 0 { delta } else { -delta }).collect();
    PeriodicPotential::new(period, values)
}

/// Real vector on a box of `Z^d`, zero outside.
#[derive(Debug, Clone)]
pub struct BoxVector {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoxVector {
    pub fn random(dims: Vec<usize>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = dims.iter().product();
        Self { dims, values: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() }
    }

    fn at(&self, site: &[i64]) -> f64 {
        let mut flat = 0;
        for (&x, &l) in site.iter().zip(&self.dims) {
            if x < 0 || x as usize >= l {
                return 0.0;
            }
            flat = flat * l + x as usize;
        }
        self.values[flat]
    }

    /// Sites of the box enlarged by one layer, which carries the support of `Δψ`.
    fn halo(&self) -> Vec<Vec<i64>> {
        let ext: Vec<usize> = self.dims.iter().map(|&l| l + 2).collect();
        let total: usize = ext.iter().product();
        (0..total)
            .map(|mut i| {
                let mut s = vec![0i64; ext.len()];
                for j in (0..ext.len()).rev() {
                    s[j] = (i % ext[j]) as i64 - 1;
                    i /= ext[j];
                }
                s
            })
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    /// `(Δψ)(n) = Σ_j ψ(n + e_j) + ψ(n − e_j)` on the halo.
    pub fn laplacian(&self) -> Vec<(Vec<i64>, f64)> {
        self.halo()
            .into_iter()
            .map(|s| {
                let mut acc = 0.0;
                for j in 0..s.len() {
                    let mut t = s.clone();
                    t[j] += 1;
                    acc += self.at(&t);
                    t[j] -= 2;
                    acc += self.at(&t);
                }
                (s, acc)
            })
            .collect()
    }
}

/// `(⟨Δψ, Vψ⟩, ‖(Δ+V)ψ‖², ‖Δψ‖² + ‖Vψ‖²)` for a box vector.
pub fn norm_identity_terms(v: &PeriodicPotential, psi: &BoxVector) -> (f64, f64, f64) {
    let lap = psi.laplacian();
    let mut cross = 0.0;
    let mut full = 0.0;
    let mut lap_sq = 0.0;
    let mut pot_sq = 0.0;
    for (s, l) in lap {
        let vp = v.at(&s) * psi.at(&s);
        cross += l * vp;
        full += (l + vp).powi(2);
        lap_sq += l * l;
        pot_sq += vp * vp;
    }
    (cross, full, lap_sq + pot_sq)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerboardReport {
    pub d: usize,
    pub delta: f64,
    pub spectrum: SpectrumResult,
    /// Closest band edges to zero from below and above.
    pub inner_edges: [f64; 2],
    pub outer_edges: [f64; 2],
    /// `√(4d² + δ²)`.
    pub predicted_outer: f64,
    /// `min ‖(Δ+V)ψ‖² / (δ²‖ψ‖²)` over random box vectors.
    pub min_norm_ratio: f64,
    /// `max |⟨Δψ, Vψ⟩| / ‖ψ‖²` over the same vectors.
    pub max_cross_term: f64,
}

/// Spectrum of `Δ + V_δ` together with the checks that it avoids `(−δ, δ)`.
pub fn verify_checkerboard_gap(
    d: usize,
    delta: f64,
    grid: usize,
    refine_iters: usize,
) -> Result<CheckerboardReport> {
    let v = checkerboard(d, delta)?;
    let sr = bands::spectrum(&v, grid, refine_iters)?;
    let (lo, hi) = (-delta + CHECKERBOARD_TOL, delta - CHECKERBOARD_TOL);
    let mut below = f64::NEG_INFINITY;
    let mut above = f64::INFINITY;
    for b in &sr.bands {
        if b.upper > lo && b.lower < hi {
            return Err(Error::GapViolation { lower: -delta, upper: delta });
        }
        if b.upper <= lo {
            below = below.max(b.upper);
        } else {
            above = above.min(b.lower);
        }
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_cross = 0.0f64;
    for t in 0..NORM_TRIALS {
        let psi = BoxVector::random(vec![6; d], 1000 + t as u64);
        let (cross, full, _) = norm_identity_terms(&v, &psi);
        let n2 = psi.norm_sqr();
        min_ratio = min_ratio.min(full / (delta * delta * n2));
        max_cross = max_cross.max(cross.abs() / n2);
    }
    if min_ratio < 1.0 - 1e-12 {
        return Err(Error::GapViolation { lower: -delta, upper: delta });
    }
    let outer = [sr.bands[0].lower, sr.bands[sr.bands.len() - 1].upper];
    Ok(CheckerboardReport {
        d,
        delta,
        inner_edges: [below, above],
        outer_edges: outer,
        predicted_outer: (4.0 * (d * d) as f64 + delta * delta).sqrt(),
        spectrum: sr,
        min_norm_ratio: min_ratio,
        max_cross_term: max_cross,
    })
}

/// `V = (4d + 1) ℓ` on the class of the `ℓ`-th site of the fundamental
/// domain (`ℓ = 1..P`, lexicographic).
pub fn staircase(p: &PeriodVector) -> PeriodicPotential {
    let step = (4 * p.dim() + 1) as f64;
    let values = (1..=p.total()).map(|l| step * l as f64).collect();
    PeriodicPotential::new(p.clone(), values).expect("lengths agree")
}

/// For the staircase of period `p`: the windows `((4d+1)ℓ + 2d, (4d+1)(ℓ+1) − 2d)`
/// the spectrum must avoid (`ℓ = 1..P−1`) and the windows
/// `((4d+1)ℓ − 2d, (4d+1)ℓ + 2d)` it must meet (`ℓ = 1..P`).
pub fn staircase_windows(p: &PeriodVector) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let d = p.dim() as f64;
    let s = 4.0 * d + 1.0;
    let total = p.total();
    let avoid = (1..total).map(|l| [s * l as f64 + 2.0 * d, s * (l + 1) as f64 - 2.0 * d]).collect();
    let meet = (1..=total).map(|l| [s * l as f64 - 2.0 * d, s * l as f64 + 2.0 * d]).collect();
    (avoid, meet)
}

/// Whether the spectrum of `Δ + V` is an interval at the given resolution,
/// for a `(p, q)`-periodic `V` with coprime periods and `‖V‖_∞ ≤ δ`.
pub fn bs_interval_check(
    v: &PeriodicPotential,
    delta: f64,
    grid: usize,
    refine_iters: usize,
) -> Result<bool> {
    check_coprime(v.period())?;
    let norm = v.sup_norm();
    if norm > delta {
        return Err(Error::NormViolation { norm, limit: delta });
    }
    let sr = bands::spectrum(v, grid, refine_iters)?;
    Ok(sr.overlap_margin > -GAP_TOL)
}

/// Source of the stage potentials of the limit-periodic iteration.
pub trait StageGenerator {
    /// Potential of the given period for stage `stage` (from 1); `budget` is
    /// the allowed sup-norm. Larger outputs are clipped by the caller.
    fn generate(&mut self, stage: usize, period: &PeriodVector, budget: f64) -> PeriodicPotential;

    fn describe(&self) -> String;
}

/// Adds nothing; the plan then only records the margins of `Δ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroGenerator;

impl StageGenerator for ZeroGenerator {
    fn generate(&mut self, _: usize, period: &PeriodVector, _: f64) -> PeriodicPotential {
        PeriodicPotential::zeros(period.clone())
    }

    fn describe(&self) -> String {
        "zero".into()
    }
}

/// Uniform random values of sup-norm `fraction · budget`, seeded per stage.
#[derive(Debug, Clone, Copy)]
pub struct RandomGenerator {
    pub seed: u64,
    pub fraction: f64,
}

impl StageGenerator for RandomGenerator {
    fn generate(&mut self, stage: usize, period: &PeriodVector, budget: f64) -> PeriodicPotential {
        let seed = self.seed.wrapping_add(stage as u64);
        PeriodicPotential::random(period.clone(), seed, self.fraction * budget)
    }

    fn describe(&self) -> String {
        format!("random(seed={}, fraction={})", self.seed, self.fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanStage {
    pub stage: usize,
    pub period: Vec<usize>,
    /// Overlap margin of the accumulated potential viewed at this period.
    pub margin_before: f64,
    /// `δ_t = margin_before / 2`.
    pub budget: f64,
    pub potential_norm: f64,
    pub clipped: bool,
    pub margin_after: f64,
    pub interval: bool,
    /// Margin recomputed on a grid of twice the resolution.
    pub verify_margin: f64,
    pub verify_interval: bool,
    pub extrema_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPeriodicPlan {
    pub base: [usize; 2],
    pub generator: String,
    pub grid: usize,
    pub refine_iters: usize,
    pub stages: Vec<PlanStage>,
    /// Values of `V_1 + … + V_T` on the final fundamental domain.
    pub potential: PeriodicPotential,
}

impl LimitPeriodicPlan {
    pub fn budgets(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.budget).collect()
    }
}

fn clip(v: &PeriodicPotential, limit: f64) -> (PeriodicPotential, bool) {
    let mut clipped = false;
    let values = v
        .values()
        .iter()
        .map(|&x| {
            let c = x.clamp(-limit, limit);
            clipped |= c != x;
            c
        })
        .collect();
    (PeriodicPotential::new(v.period().clone(), values).expect("same shape"), clipped)
}

/// Run `T` stages of the limit-periodic iteration from `H = Δ`.
///
/// Stage `t` works at period `(p^t, q^t)`: it measures the overlap margin
/// `δ̃` of the accumulated potential there, allows a new potential of norm
/// `δ_t = δ̃/2`, adds it and checks that the spectrum is still an interval,
/// once more on a doubled grid.
pub fn lp_builder(
    p: usize,
    q: usize,
    stages: usize,
    generator: &mut dyn StageGenerator,
    grid: usize,
    refine_iters: usize,
) -> Result<LimitPeriodicPlan> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidInput("periods must be >= 1".into()));
    }
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    if stages == 0 {
        return Err(Error::InvalidInput("need at least one stage".into()));
    }
    let mut acc = PeriodicPotential::zeros(PeriodVector::new(vec![p, q])?);
    let mut records = Vec::with_capacity(stages);
    for t in 1..=stages {
        let period = PeriodVector::new(vec![p.pow(t as u32), q.pow(t as u32)])?;
        if acc.period() != &period {
            let m = PeriodVector::new(
                period.dims().iter().zip(acc.period().dims()).map(|(a, b)| a / b).collect(),
            )?;
            acc = reperiodize(&acc, &m)?;
        }
        let tol = bands::extrema_tolerance(&period, grid, refine_iters);
        let before = bands::spectrum(&acc, grid, refine_iters)?;
        let margin = before.overlap_margin;
        if margin <= 2.0 * tol {
            return Err(Error::MarginCollapse { stage: t, margin, resolution: tol });
        }
        let budget = margin / 2.0;
        let raw = generator.generate(t, &period, budget);
        if raw.period() != &period {
            return Err(Error::PeriodMismatch {
                expected: period.dims().to_vec(),
                found: raw.period().dims().to_vec(),
            });
        }
        let (vt, clipped) = clip(&raw, budget);
        acc = acc.add(&vt)?;
        let after = bands::spectrum(&acc, grid, refine_iters)?;
        let verify = bands::spectrum(&acc, 2 * grid, refine_iters)?;
        let verify_interval = verify.gaps.is_empty();
        if !verify_interval {
            let g = verify.gaps[0];
            return Err(Error::GapViolation { lower: g.lower, upper: g.upper });
        }
        records.push(PlanStage {
            stage: t,
            period: period.dims().to_vec(),
            margin_before: margin,
            budget,
            potential_norm: vt.sup_norm(),
            clipped,
            margin_after: after.overlap_margin,
            interval: after.gaps.is_empty(),
            verify_margin: verify.overlap_margin,
            verify_interval,
            extrema_tolerance: tol,
        });
    }
    Ok(LimitPeriodicPlan {
        base: [p, q],
        generator: generator.describe(),
        grid,
        refine_iters,
        stages: records,
        potential: acc,
    })
}

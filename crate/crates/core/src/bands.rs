//! Band structure over the Brillouin cell: sampled sheets, refined band
//! edges, merged spectrum, gaps and the overlap margin.
//!
//! Bands are indexed from 0 in this crate: band `j` is the `j`-th smallest
//! fiber eigenvalue `E_j(θ)` swept over the cell.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::floquet::{MomentumBuilder, Quasimomentum};
use crate::lattice::{fourier_forward, PeriodVector, PeriodicPotential};
use crate::linalg::hermitian_eigenvalues;

pub const DEFAULT_GRID: usize = 32;
pub const DEFAULT_REFINE: usize = 12;
/// Separations between consecutive bands below this are not asserted as gaps.
pub const GAP_TOL: f64 = 1e-8;

/// Uniform grid `θ_j = i_j / (n p_j)`, `0 ≤ i_j < n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrillouinGrid {
    pub period: PeriodVector,
    pub n_per_dim: usize,
}

impl BrillouinGrid {
    pub fn new(period: PeriodVector, n_per_dim: usize) -> Result<Self> {
        if n_per_dim == 0 {
            return Err(Error::InvalidInput("grid resolution must be >= 1".into()));
        }
        Ok(Self { period, n_per_dim })
    }

    pub fn len(&self) -> usize {
        self.n_per_dim.pow(self.period.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer grid coordinates of node `i` (last axis fastest).
    pub fn coords(&self, mut i: usize) -> Vec<usize> {
        let d = self.period.dim();
        let mut c = vec![0; d];
        for slot in c.iter_mut().rev() {
            *slot = i % self.n_per_dim;
            i /= self.n_per_dim;
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.n_per_dim + c)
    }

    pub fn theta(&self, i: usize) -> Vec<f64> {
        self.coords(i)
            .iter()
            .zip(self.period.dims())
            .map(|(&c, &p)| c as f64 / (self.n_per_dim * p) as f64)
            .collect()
    }

    pub fn node(&self, i: usize) -> Quasimomentum {
        Quasimomentum::unchecked(self.period.clone(), self.theta(i))
    }

    /// Indices of the `2d` axis neighbours of node `i`, wrapping periodically.
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let c = self.coords(i);
        let n = self.n_per_dim;
        let mut out = Vec::with_capacity(2 * c.len());
        for j in 0..c.len() {
            for step in [1, n - 1] {
                let mut cc = c.clone();
                cc[j] = (cc[j] + step) % n;
                out.push(self.index(&cc));
            }
        }
        out
    }
}

/// Sorted fiber eigenvalues at every grid node.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub grid: BrillouinGrid,
    /// `sheets[node][j] = E_j(θ_node)`.
    pub sheets: Vec<Vec<f64>>,
    builder: MomentumBuilder,
}

impl BandStructure {
    pub fn band_count(&self) -> usize {
        self.grid.period.total()
    }

    /// Sampled `(min, argmin, max, argmax)` of band `j`.
    pub fn sampled_extrema(&self, j: usize) -> (f64, usize, f64, usize) {
        let mut lo = (f64::INFINITY, 0);
        let mut hi = (f64::NEG_INFINITY, 0);
        for (i, s) in self.sheets.iter().enumerate() {
            if s[j] < lo.0 {
                lo = (s[j], i);
            }
            if s[j] > hi.0 {
                hi = (s[j], i);
            }
        }
        (lo.0, lo.1, hi.0, hi.1)
    }

    /// Fiber eigenvalues at an arbitrary θ, reduced into the cell.
    pub fn fiber(&self, theta: &[f64]) -> Vec<f64> {
        hermitian_eigenvalues(&self.builder.entries(theta))
    }

    /// Rows `θ_1..θ_d, E_1..E_P`, one per node.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.sheets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut row = self.grid.theta(i);
                row.extend_from_slice(s);
                row
            })
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.sheets.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.sheets.iter().map(|s| s[s.len() - 1]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Diagonalize the fiber at every grid node (in parallel).
pub fn compute_bands(v: &PeriodicPotential, grid: &BrillouinGrid) -> Result<BandStructure> {
    if v.period() != &grid.period {
        return Err(Error::PeriodMismatch {
            expected: grid.period.dims().to_vec(),
            found: v.period().dims().to_vec(),
        });
    }
    let builder = MomentumBuilder::new(&fourier_forward(v));
    let sheets: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let theta = grid.theta(i);
            let ev = hermitian_eigenvalues(&builder.entries(&theta));
            if ev.iter().all(|x| x.is_finite()) {
                Ok(ev)
            } else {
                Err(Error::ConvergenceFailure { residual: f64::NAN, node: Some(theta) })
            }
        })
        .collect::<Result<_>>()?;
    Ok(BandStructure { grid: grid.clone(), sheets, builder })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

/// Band edges, the merged spectrum and its gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub bands: Vec<Interval>,
    pub merged: Vec<Interval>,
    /// Open intervals between consecutive bands wider than `GAP_TOL`.
    pub gaps: Vec<Interval>,
    /// Positive separations narrower than `GAP_TOL`.
    pub unresolved: Vec<Interval>,
    /// `min_j (E_j^+ − E_{j+1}^−)`; infinite when there is a single band.
    #[serde(serialize_with = "finite_or_null")]
    pub overlap_margin: f64,
    pub grid: usize,
    pub refine_iters: usize,
    /// Bound on the error of every band edge from sampling.
    pub extrema_tolerance: f64,
}

/// `4π Σ_j 1/p_j`, the Lipschitz bound on band lengths.
pub fn band_length_bound(p: &PeriodVector) -> f64 {
    4.0 * PI * p.dims().iter().map(|&x| 1.0 / x as f64).sum::<f64>()
}

pub fn extrema_tolerance(p: &PeriodVector, n: usize, refine_iters: usize) -> f64 {
    band_length_bound(p) / (n as f64 * 2f64.powi(refine_iters as i32))
}

/// Local pattern search for an extremum of band `j`, starting at a grid node.
/// `sign = 1` minimizes, `sign = -1` maximizes.
fn refine_extremum(bs: &BandStructure, j: usize, start: usize, sign: f64, iters: usize) -> f64 {
    let p = bs.grid.period.dims();
    let d = p.len();
    let mut theta = bs.grid.theta(start);
    let mut best = sign * bs.sheets[start][j];
    let mut h: Vec<f64> = p.iter().map(|&pj| 1.0 / (bs.grid.n_per_dim * pj) as f64).collect();
    let offsets: Vec<Vec<i32>> = (0..3usize.pow(d as u32))
        .map(|mut c| {
            (0..d)
                .map(|_| {
                    let o = (c % 3) as i32 - 1;
                    c /= 3;
                    o
                })
                .collect::<Vec<i32>>()
        })
        .filter(|o| o.iter().any(|&x| x != 0))
        .collect();
    for _ in 0..iters {
        h.iter_mut().for_each(|x| *x /= 2.0);
        let mut step: Option<(f64, Vec<f64>)> = None;
        for o in &offsets {
            let cand: Vec<f64> = theta
                .iter()
                .zip(o)
                .zip(h.iter().zip(p))
                .map(|((&t, &oj), (&hj, &pj))| (t + oj as f64 * hj).rem_euclid(1.0 / pj as f64))
                .collect();
            let val = sign * bs.fiber(&cand)[j];
            let incumbent = step.as_ref().map_or(best, |s| s.0);
            if val < incumbent {
                step = Some((val, cand));
            }
        }
        if let Some((val, cand)) = step {
            best = val;
            theta = cand;
        }
    }
    sign * best
}

/// Band edges from the grid samples, polished by `refine_iters` rounds of
/// local subdivision around each sampled extremum.
pub fn band_extrema(bs: &BandStructure, refine_iters: usize) -> SpectrumResult {
    let bands: Vec<Interval> = (0..bs.band_count())
        .into_par_iter()
        .map(|j| {
            let (lo, ilo, hi, ihi) = bs.sampled_extrema(j);
            if refine_iters == 0 {
                return Interval { lower: lo, upper: hi };
            }
            let lower = refine_extremum(bs, j, ilo, 1.0, refine_iters).min(lo);
            let upper = refine_extremum(bs, j, ihi, -1.0, refine_iters).max(hi);
            Interval { lower, upper }
        })
        .collect();
    let sr = SpectrumResult {
        bands,
        merged: Vec::new(),
        gaps: Vec::new(),
        unresolved: Vec::new(),
        overlap_margin: f64::INFINITY,
        grid: bs.grid.n_per_dim,
        refine_iters,
        extrema_tolerance: extrema_tolerance(&bs.grid.period, bs.grid.n_per_dim, refine_iters),
    };
    spectrum_and_gaps(sr)
}

/// Merge bands into the spectrum and list the gaps between them.
pub fn spectrum_and_gaps(mut sr: SpectrumResult) -> SpectrumResult {
    sr.merged.clear();
    sr.gaps.clear();
    sr.unresolved.clear();
    let mut iter = sr.bands.iter();
    if let Some(first) = iter.next() {
        let mut cur = *first;
        for b in iter {
            let sep = b.lower - cur.upper;
            if sep > GAP_TOL {
                sr.gaps.push(Interval { lower: cur.upper, upper: b.lower });
                sr.merged.push(cur);
                cur = *b;
            } else {
                if sep > 0.0 {
                    sr.unresolved.push(Interval { lower: cur.upper, upper: b.lower });
                }
                cur.lower = cur.lower.min(b.lower);
                cur.upper = cur.upper.max(b.upper);
            }
        }
        sr.merged.push(cur);
    }
    sr.overlap_margin = overlap_margin(&sr);
    sr
}

/// `min_j (E_j^+ − E_{j+1}^−)`; positive exactly when consecutive bands overlap.
pub fn overlap_margin(sr: &SpectrumResult) -> f64 {
    sr.bands.windows(2).map(|w| w[0].upper - w[1].lower).fold(f64::INFINITY, f64::min)
}

/// Grid, refine and merge in one call.
pub fn spectrum(v: &PeriodicPotential, n: usize, refine_iters: usize) -> Result<SpectrumResult> {
    let grid = BrillouinGrid::new(v.period().clone(), n)?;
    Ok(band_extrema(&compute_bands(v, &grid)?, refine_iters))
}

/// Grid nodes that witness `E` as a point of increase of band `j`: the sheet
/// minus `E` changes sign towards an axis neighbour, and the node has both a
/// strictly lower and a strictly higher neighbour.
pub fn increase_points(
    v: &PeriodicPotential,
    j: usize,
    energy: f64,
    grid: &BrillouinGrid,
) -> Result<Vec<Quasimomentum>> {
    if j >= v.period().total() {
        return Err(Error::InvalidInput(format!(
            "band index {j} out of range for {} bands",
            v.period().total()
        )));
    }
    let bs = compute_bands(v, grid)?;
    let (lo, _, hi, _) = bs.sampled_extrema(j);
    if !(lo..=hi).contains(&energy) {
        return Err(Error::DomainError(format!(
            "energy {energy} outside sampled band {j} = [{lo}, {hi}]"
        )));
    }
    let value = |i: usize| bs.sheets[i][j];
    let witnesses: Vec<Quasimomentum> = (0..grid.len())
        .filter(|&i| {
            let here = value(i);
            let s = here - energy;
            let nb = grid.neighbours(i);
            let crosses = nb.iter().any(|&k| {
                let t = value(k) - energy;
                (s <= 0.0 && t > 0.0) || (s >= 0.0 && t < 0.0)
            });
            crosses
                && nb.iter().any(|&k| value(k) < here)
                && nb.iter().any(|&k| value(k) > here)
        })
        .map(|i| grid.node(i))
        .collect();
    if witnesses.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(witnesses)
}

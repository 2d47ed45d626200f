use nalgebra::DMatrix;
use num_complex::Complex64;
use perspec::bands::{self, BrillouinGrid};
use perspec::linalg::hermiticity_defect;
use perspec::*;
use proptest::prelude::*;

fn pv(d: &[usize]) -> PeriodVector {
    PeriodVector::new(d.to_vec()).unwrap()
}

fn period() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (1usize..=5).prop_map(|a| vec![a]),
        (1usize..=4, 1usize..=4).prop_map(|(a, b)| vec![a, b]),
        (1usize..=2, 1usize..=3, 1usize..=2).prop_map(|(a, b, c)| vec![a, b, c]),
    ]
}

/// A period together with values and a quasimomentum in the reduced cell.
fn instance() -> impl Strategy<Value = (PeriodicPotential, Vec<f64>)> {
    period().prop_flat_map(|dims| {
        let p = pv(&dims);
        let total = p.total();
        let theta: Vec<_> = dims.iter().map(|&d| 0.0..1.0 / d as f64).collect();
        (prop::collection::vec(-3.0f64..3.0, total), theta)
            .prop_map(move |(vals, th)| (PeriodicPotential::new(p.clone(), vals).unwrap(), th))
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plancherel((v, _) in instance()) {
        let lhs: f64 = v.values().iter().map(|x| x * x).sum();
        let rhs = v.period().total() as f64 * fourier_forward(&v).norm().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn fourier_round_trip((v, _) in instance()) {
        let back = fourier_inverse(&fourier_forward(&v)).unwrap();
        prop_assert!(max_dev(v.values(), back.values()) <= 1e-12);
    }

    #[test]
    fn reperiodize_agrees_pointwise((v, _) in instance(), m in period(), sites in prop::collection::vec(prop::collection::vec(-40i64..40, 3), 100)) {
        prop_assume!(m.len() == v.dim());
        let big = reperiodize(&v, &pv(&m)).unwrap();
        for s in &sites {
            let s = &s[..v.dim()];
            prop_assert_eq!(big.at(s), v.at(s));
        }
    }

    #[test]
    fn fibers_are_hermitian((v, th) in instance()) {
        let q = Quasimomentum::new(v.period().clone(), th).unwrap();
        let a = build_momentum(&fourier_forward(&v), &q).unwrap();
        let b = build_space(&v, &q).unwrap();
        prop_assert!(hermiticity_defect(&a.entries) <= 1e-12);
        prop_assert!(hermiticity_defect(&b.entries) <= 1e-12);
    }

    #[test]
    fn bases_agree((v, th) in instance()) {
        let q = Quasimomentum::new(v.period().clone(), th).unwrap();
        let a = eigensystem(&build_momentum(&fourier_forward(&v), &q).unwrap()).unwrap();
        let b = eigensystem(&build_space(&v, &q).unwrap()).unwrap();
        prop_assert!(max_dev(&a.eigenvalues, &b.eigenvalues) <= 1e-9);
        prop_assert!(a.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn quasimomentum_shift_is_unitary_equivalence((v, th) in instance(), axis in 0usize..3) {
        let p = v.period().clone();
        let axis = axis % p.dim();
        let f = fourier_forward(&v);
        let mut shifted = th.clone();
        shifted[axis] += 1.0 / p.dims()[axis] as f64;
        let a = eigensystem(&build_momentum(&f, &Quasimomentum::unchecked(p.clone(), th)).unwrap()).unwrap();
        let b = eigensystem(&build_momentum(&f, &Quasimomentum::unchecked(p, shifted)).unwrap()).unwrap();
        prop_assert!(max_dev(&a.eigenvalues, &b.eigenvalues) <= 1e-10);
    }

    #[test]
    fn min_max_monotone_and_lipschitz(
        (v, _) in instance(),
        w in prop::collection::vec(0.0f64..1.0, 24),
    ) {
        let p = v.period().clone();
        let w = PeriodicPotential::new(p.clone(), w[..p.total()].to_vec()).unwrap();
        let grid = BrillouinGrid::new(p, 4).unwrap();
        let a = compute_bands(&v, &grid).unwrap();
        let b = compute_bands(&v.add(&w).unwrap(), &grid).unwrap();
        let norm = w.sup_norm();
        for (x, y) in a.sheets.iter().zip(&b.sheets) {
            for (ex, ey) in x.iter().zip(y) {
                prop_assert!(ey - ex >= -1e-10);
                prop_assert!(ey - ex <= norm + 1e-10);
            }
        }
    }

    #[test]
    fn ids_is_monotone((v, _) in instance(), mut energies in prop::collection::vec(-8.0f64..8.0, 2..12)) {
        energies.sort_by(f64::total_cmp);
        let k = ids(&v, &energies, 6).unwrap().k;
        prop_assert!(k.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(k.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn overlap_margin_is_stable(seed in 0u64..1000, a in 0.05f64..1.5, b in 0.0f64..0.3) {
        let p = pv(&[2, 3]);
        let v = PeriodicPotential::random(p.clone(), seed, a);
        let w = PeriodicPotential::random(p, seed + 1, b);
        let s = bands::spectrum(&v, 12, 10).unwrap();
        let t = bands::spectrum(&v.add(&w).unwrap(), 12, 10).unwrap();
        let slack = s.extrema_tolerance + t.extrema_tolerance;
        prop_assert!((s.overlap_margin - t.overlap_margin).abs() <= 2.0 * b + slack);
    }

    #[test]
    fn band_lengths_are_bounded(seed in 0u64..1000, a in 0.0f64..6.0, dims in period()) {
        let p = pv(&dims);
        let s = bands::spectrum(&PeriodicPotential::random(p.clone(), seed, a), 8, 6).unwrap();
        let bound = band_length_bound(&p);
        prop_assert!(s.bands.iter().all(|b| b.length() <= bound + 1e-9));
        prop_assert!(s.gaps.len() < p.total());
    }
}

#[test]
fn reperiodize_keeps_fourier_support() {
    let v = PeriodicPotential::random(pv(&[2, 3]), 17, 1.0);
    let big = reperiodize(&v, &pv(&[2, 3])).unwrap();
    let f = fourier_forward(&v);
    let g = fourier_forward(&big);
    let small: Vec<Vec<usize>> = f.support(1e-12).iter().map(|&i| v.period().multi_index(i)).collect();
    let large: Vec<Vec<usize>> = g.support(1e-12).iter().map(|&i| big.period().multi_index(i)).collect();
    // k on the coarse lattice sits at m ∘ k on the fine one.
    let mapped: Vec<Vec<usize>> = small.iter().map(|k| vec![2 * k[0], 3 * k[1]]).collect();
    assert_eq!(sorted_vecs(mapped), sorted_vecs(large));
}

fn sorted_vecs(mut v: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    v.sort();
    v
}

#[test]
fn spectrum_is_deterministic() {
    let v = PeriodicPotential::random(pv(&[3, 2]), 4, 2.0);
    let a = serde_json::to_string(&bands::spectrum(&v, 16, 8).unwrap()).unwrap();
    let b = serde_json::to_string(&bands::spectrum(&v, 16, 8).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn band_functions_are_not_constant() {
    for seed in 0..10 {
        let v = PeriodicPotential::random(pv(&[2, 3]), seed, 3.0);
        let s = bands::spectrum(&v, 8, 6).unwrap();
        assert!(s.bands.iter().all(|b| b.length() > 1e-3), "seed {seed}");
    }
}

#[test]
fn stieltjes_matches_ids() {
    // ∫ dk/(E − z) = 1/(b − z) + ∫_a^b k(E)/(E − z)² dE for supp dk ⊂ [a, b].
    let v = PeriodicPotential::random(pv(&[2, 3]), 3, 1.0);
    let fs = FiberSamples::new(&v, 24).unwrap();
    let (a, b) = (fs.min_value() - 0.1, fs.max_value() + 0.1);
    let n = 200_000;
    let h = (b - a) / n as f64;
    for z in [Complex64::new(0.3, 0.7), Complex64::new(-2.0, 0.25), Complex64::new(5.5, 1.0)] {
        let mut integral = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let e = a + (i as f64 + 0.5) * h;
            integral += fs.ids(e) / ((e - z) * (e - z)) * h;
        }
        let expected = 1.0 / (b - z) + integral;
        let got = fs.stieltjes(z);
        assert!((got - expected).norm() < 1e-4, "z = {z}: {got} vs {expected}");
        assert!((dos_stieltjes(&v, z, 24).unwrap() - got).norm() < 1e-14);
    }
}

/// `⟨δ_0, (H − z)⁻¹ δ_0⟩` on the `L_1 × L_2` discrete torus.
fn torus_resolvent(v: &PeriodicPotential, l: [usize; 2], z: Complex64) -> Complex64 {
    let n = l[0] * l[1];
    let idx = |a: usize, b: usize| (a % l[0]) * l[1] + (b % l[1]);
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for a in 0..l[0] {
        for b in 0..l[1] {
            let i = idx(a, b);
            h[(i, i)] = Complex64::new(v.at(&[a as i64, b as i64]), 0.0) - z;
            for j in [idx(a + 1, b), idx(a + l[0] - 1, b), idx(a, b + 1), idx(a, b + l[1] - 1)] {
                h[(i, j)] += 1.0;
            }
        }
    }
    let mut e0 = nalgebra::DVector::<Complex64>::zeros(n);
    e0[0] = Complex64::new(1.0, 0.0);
    h.lu().solve(&e0).unwrap()[0]
}

#[test]
fn fiber_resolvent_matches_torus() {
    let v = PeriodicPotential::random(pv(&[2, 3]), 9, 1.0);
    let z = Complex64::new(0.4, 0.6);
    let ws = WeightedSamples::new(&v, &SourceVector::delta(vec![0, 0]), 64).unwrap();
    let oracle = torus_resolvent(&v, [40, 42], z);
    assert!((ws.resolvent(z) - oracle).norm() < 1e-6, "{} vs {oracle}", ws.resolvent(z));
}

#[test]
fn polynomial_interpolation_matches_determinant() {
    let v = PeriodicPotential::random(pv(&[2, 3]), 21, 0.3);
    let op = TorusOperator::new(&v, 0.5).unwrap();
    for (u, x) in [(0.2, 0.7), (0.55, 0.1), (0.9, 0.33)] {
        let u0 = unit_phase(u) * 1.3;
        let v0 = unit_phase(x) * 0.8;
        let poly = op.char_poly(certify::Variable::V, u0).unwrap();
        let direct = op.char_value(u0, v0).value();
        let scale = poly.coeffs.iter().map(|c| c.norm()).sum::<f64>();
        assert!((poly.eval(v0) - direct).norm() <= 1e-10 * scale);
        let poly_u = op.char_poly(certify::Variable::U, v0).unwrap();
        assert!((poly_u.eval(u0) - direct).norm() <= 1e-10 * scale);
    }
}

#[test]
fn small_root_clusters_are_separated() {
    let v = PeriodicPotential::random(pv(&[2, 3]), 33, 0.1);
    for u in [1e-2, 3e-3] {
        let r = root_asymptotics_check(&v, -0.8, unit_phase(0.27) * u).unwrap();
        assert!(r.large_bijective && r.small_bijective);
        assert!(r.separation_constant > 0.5, "{}", r.separation_constant);
        assert!(r.small_error_constant < 10.0);
    }
}

#[test]
fn density_ratio_with_period_factor() {
    // For V ≠ 0 only P · #supp · ‖u‖² is available as a constant.
    let p = pv(&[2, 3]);
    let energies: Vec<f64> = (0..=400).map(|i| -5.0 + 10.0 * i as f64 / 400.0).collect();
    for seed in 0..3 {
        let v = PeriodicPotential::random(p.clone(), 40 + seed, 1.0);
        let u = SourceVector::delta(vec![1, 2]);
        let r = density_ratio(&v, &u, &energies, 1e-2, 32).unwrap();
        assert!(r.max_ratio <= 6.0 * u.ratio_constant() * 1.05, "{}", r.max_ratio);
    }
}

#[test]
fn finite_volume_box_oracle_agrees_with_dense_count() {
    let v = PeriodicPotential::random(pv(&[2, 3]), 2, 1.5);
    for e in [-1.3, 0.0, 2.2] {
        let k = ids_finite_volume(&v, 3, e).unwrap();
        // Dense Dirichlet box of 6 × 9 sites.
        let (n0, n1) = (6usize, 9usize);
        let mut h = DMatrix::<f64>::zeros(n0 * n1, n0 * n1);
        for a in 0..n0 {
            for b in 0..n1 {
                let i = a * n1 + b;
                h[(i, i)] = v.at(&[a as i64, b as i64]);
                if a + 1 < n0 {
                    h[(i, i + n1)] = 1.0;
                    h[(i + n1, i)] = 1.0;
                }
                if b + 1 < n1 {
                    h[(i, i + 1)] = 1.0;
                    h[(i + 1, i)] = 1.0;
                }
            }
        }
        let count = h.symmetric_eigenvalues().iter().filter(|&&l| l < e).count();
        assert_eq!(k, count as f64 / (n0 * n1) as f64);
    }
}

#[test]
fn refinement_multiset_matches_for_random_potentials() {
    let p = pv(&[3, 2]);
    let m = pv(&[2, 2]);
    for seed in 0..5 {
        let v = PeriodicPotential::random(p.clone(), seed, 2.0);
        let big = reperiodize(&v, &m).unwrap();
        let th = Quasimomentum::new(big.period().clone(), vec![0.05, 0.1]).unwrap();
        let whole = eigensystem(&build_momentum(&fourier_forward(&big), &th).unwrap()).unwrap();
        let f = fourier_forward(&v);
        let mut parts = Vec::new();
        for phi in refinement_partition(&p, &m, &th).unwrap() {
            parts.extend(eigensystem(&build_momentum(&f, &phi).unwrap()).unwrap().eigenvalues);
        }
        assert!(max_dev(&whole.eigenvalues, &sorted(parts)) <= 1e-9);
    }
}

mod common;

use common::*;
use num_complex::Complex;
use proptest::prelude::*;
use vsg_core::complexify::{
    embed, project, scalar_complex_evolve, similarity_defect, to_real_potential, ComplexScalarPotential,
};
use vsg_core::diffusion::SolverOptions;
use vsg_core::field::{
    estimate_sector_constant, lp_norm, validate_accretivity, Boundary, DiffusionTensorField, Grid, NormSpec,
    ScalarField, VectorField,
};
use vsg_core::kato::{
    check_grad_inequality, kato_weak_defect, random_smooth_field, weak_defect_tolerance, TestFunction,
};
use vsg_core::splitting::{evolve, DiffusionBackend, SplitScheme, SplitVariant, TraceConfig};

fn test_functions(g: &Grid<f64>) -> Vec<TestFunction<f64>> {
    let l = g.half_extents()[0];
    let c = |x: f64| if g.dim() == 1 { vec![x] } else { vec![x, -0.5 * x] };
    vec![
        TestFunction::bump(g, &c(0.0), 0.5 * l).unwrap(),
        TestFunction::bump(g, &c(0.3 * l), 0.3 * l).unwrap(),
        TestFunction::cos_squared(g, &c(-0.2 * l), 0.4 * l).unwrap(),
        TestFunction::cos_squared(g, &c(0.1 * l), 0.7 * l).unwrap(),
        TestFunction::bump(g, &c(-0.4 * l), 0.2 * l).unwrap(),
    ]
}

#[test]
fn weak_defect_is_nonnegative_at_scale() {
    for g in [
        Grid::new(&[256], &[4.0], Boundary::Periodic).unwrap(),
        Grid::new(&[32, 32], &[3.0, 3.0], Boundary::Dirichlet).unwrap(),
    ] {
        let q = if g.dim() == 1 {
            DiffusionTensorField::from_fn(g.clone(), 0.5, 1.5, |x: &[f64]| [[1.0 + 0.4 * x[0].sin(), 0.0], [0.0, 0.0]])
                .unwrap()
        } else {
            DiffusionTensorField::constant(g.clone(), &[1.5, 0.0, 0.0, 0.7], 0.7, 1.5).unwrap()
        };
        let phis = test_functions(&g);
        for seed in 0..20 {
            let u = random_smooth_field(&g, 3, 3, seed).unwrap();
            for phi in &phis {
                let d = kato_weak_defect(&u, phi, 1e-10, &q).unwrap();
                assert!(d >= -weak_defect_tolerance(&u, phi).unwrap(), "seed {seed}: {d}");
            }
        }
    }
}

#[test]
fn weak_defect_is_linear_in_phi() {
    let g = grid_1d(128, 4.0);
    let q = DiffusionTensorField::identity(g.clone());
    let u = random_smooth_field(&g, 2, 3, 4).unwrap();
    let a = TestFunction::bump(&g, &[0.5], 1.0).unwrap();
    let b = TestFunction::cos_squared(&g, &[-0.5], 1.5).unwrap();
    let sum: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| 2.0 * x + y).collect();
    let ab = TestFunction::from_values(ScalarField { grid: g.clone(), values: sum }, &[0.0], 2.5).unwrap();
    let d = |phi: &TestFunction<f64>| kato_weak_defect(&u, phi, 1e-10, &q).unwrap();
    let lhs = d(&ab);
    let rhs = 2.0 * d(&a) + d(&b);
    assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
}

#[test]
fn scalar_checks_reduce_to_classical_forms() {
    let g = grid_1d(128, 4.0);
    let q = DiffusionTensorField::identity(g.clone());
    let u = VectorField::from_fn(g.clone(), 1, |x: &[f64], _| Complex::new((x[0] * 1.3).sin() + 0.2 * x[0], 0.0)).unwrap();
    let rep = check_grad_inequality(&u, &q, 0.0).unwrap();
    assert!(rep.worst_slack.abs() <= 1e-12 * (1.0 + rep.max_rhs));
    // For u > 0, Kato is an identity: D = sum u L phi w - sum (L u) phi w = 0 by symmetry.
    let pos = VectorField::from_fn(g.clone(), 1, |x: &[f64], _| Complex::new(2.0 + x[0].cos(), 0.0)).unwrap();
    for phi in test_functions(&g) {
        assert!(kato_weak_defect(&pos, &phi, 1e-10, &q).unwrap().abs() <= 1e-12);
    }
}

fn unitary_3(seed: u64) -> Vec<Complex<f64>> {
    // Gram-Schmidt on a random complex 3x3 matrix.
    let f = random_field(&grid_1d(16, 1.0), 1, seed);
    let raw: Vec<Complex<f64>> = f.as_slice()[..9].to_vec();
    let mut cols: Vec<Vec<Complex<f64>>> = Vec::new();
    for c in 0..3 {
        let mut v: Vec<Complex<f64>> = (0..3).map(|r| raw[r * 3 + c]).collect();
        for prev in &cols {
            let dot: Complex<f64> = (0..3).map(|r| prev[r].conj() * v[r]).sum();
            for r in 0..3 {
                v[r] -= prev[r] * dot;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    (0..9).map(|k| cols[k % 3][k / 3]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gradient_inequality_holds_and_is_unitarily_invariant(seed in 0u64..1000, cross in -0.5f64..0.5) {
        let g = Grid::new(&[32, 32], &[3.0, 3.0], Boundary::Periodic).unwrap();
        let q = DiffusionTensorField::from_fn(g.clone(), 0.4, 2.2, |x: &[f64]| {
            let c = cross * x[0].cos();
            [[1.2 + 0.3 * x[1].sin(), c], [c, 1.0]]
        })
        .unwrap();
        let u = random_smooth_field(&g, 3, 2, seed).unwrap();
        let rep = check_grad_inequality(&u, &q, 1e-12).unwrap();
        prop_assert!(rep.pass);
        prop_assert!(rep.worst_slack >= -1e-10);
        let un = unitary_3(seed + 1);
        let un = &un;
        let data: Vec<Complex<f64>> = u
            .as_slice()
            .chunks(3)
            .flat_map(|z| (0..3).map(move |i| (0..3).map(|k| un[i * 3 + k] * z[k]).sum::<Complex<f64>>()))
            .collect();
        let rotated = VectorField::new(g.clone(), 3, data).unwrap();
        let rep2 = check_grad_inequality(&rotated, &q, 1e-12).unwrap();
        prop_assert_eq!(rep.pass, rep2.pass);
        prop_assert!((rep.worst_slack - rep2.worst_slack).abs() <= 1e-10 * (1.0 + rep.max_rhs));
    }

    #[test]
    fn evolution_intertwines_with_embedding(seed in 0u64..1000, strang in any::<bool>(), spectral in any::<bool>()) {
        let g = grid_1d(128, 6.0);
        let q = DiffusionTensorField::identity(g.clone());
        let p = ComplexScalarPotential::from_fn(&g, |x| (3.0 * (x[0] * 0.8).sin(), 0.5 + 0.4 * x[0].cos())).unwrap();
        let g0 = random_smooth_field(&g, 1, 3, seed).unwrap();
        let variant = if strang { SplitVariant::Strang } else { SplitVariant::Lie };
        let backend = if spectral { DiffusionBackend::Spectral } else { DiffusionBackend::BackwardEuler };
        // The complex solve and the two real solves stop at different CG iterates,
        // so the solver tolerance must sit well below the intertwining bound.
        let s = SplitScheme::new(variant, 32, 1.0, backend)
            .unwrap()
            .with_solver(SolverOptions { tol: 1e-14, max_iter: Some(4000) });
        let v = to_real_potential(&p).unwrap();
        let (u, _) = evolve(&embed(&g0).unwrap(), &s, &q, &v, &TraceConfig::default()).unwrap();
        let oracle = scalar_complex_evolve(&g0, &p, &s, &q).unwrap();
        let defect = lp_norm(&project(&u).unwrap().sub(&oracle).unwrap(), NormSpec::two()).unwrap();
        prop_assert!(defect <= 1e-10 * lp_norm(&g0, NormSpec::two()).unwrap(), "{defect}");
    }

    #[test]
    fn scalar_oracle_contracts(seed in 0u64..1000) {
        let g = grid_1d(128, 6.0);
        let q = DiffusionTensorField::identity(g.clone());
        let p = ComplexScalarPotential::from_fn(&g, |x| (2.0 * x[0].sin(), 0.3 * x[0].cos().powi(2))).unwrap();
        let env = |x: f64| (-x * x / 2.0).exp();
        let base = random_smooth_field(&g, 1, 3, seed).unwrap();
        let g0 = VectorField::from_fn(g.clone(), 1, |x: &[f64], _| Complex::new(env(x[0]), 0.0)).unwrap();
        let data = base.as_slice().iter().zip(g0.as_slice()).map(|(a, b)| a * b).collect();
        let f = VectorField::new(g.clone(), 1, data).unwrap();
        let s = SplitScheme::new(SplitVariant::Lie, 16, 1.0, DiffusionBackend::Spectral).unwrap();
        let out = scalar_complex_evolve(&f, &p, &s, &q).unwrap();
        for p_ in [NormSpec::new(1.0).unwrap(), NormSpec::two(), NormSpec::new(4.0).unwrap(), NormSpec::infinity()] {
            prop_assert!(lp_norm(&out, p_).unwrap() <= lp_norm(&f, p_).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sector_constant_bounded_by_damping_ratio(seed in 0u64..1000, c in 0.1f64..10.0) {
        let g = grid_1d(64, 3.0);
        let mut r = rng(seed);
        use rand::Rng;
        let phase: f64 = r.gen_range(0.0..6.0);
        // |v| <= c w pointwise, with equality at the peaks of |sin|.
        let p = ComplexScalarPotential::from_fn(&g, |x| {
            let w = 1.0 + 0.5 * x[0].cos();
            (c * w * (x[0] + phase).sin(), w)
        })
        .unwrap();
        let v = to_real_potential(&p).unwrap();
        prop_assert!(validate_accretivity(&v, 0.0).pass);
        let est = estimate_sector_constant(&v, 0, seed).unwrap();
        prop_assert!(est >= (1.0 / c) * (1.0 - 1e-6));
        prop_assert!(similarity_defect(&p) <= 1e-13 * (1.0 + c));
    }
}

//! Convergence-order checks for interpolation: the broken error sums
//! behave like h^{k+1} on uniform meshes, and reproduction of
//! polynomials is exact to roundoff.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sisg::field::ScalarField;
use sisg::mesh::{Diagonal, Mesh};
use sisg::norms::{broken_weighted_sum, element_error_squares, l2_error, l2_norm};
use sisg::projection::assemble_mass;
use sisg::space::{Family, FunctionSpace};
use sisg::sparse::pcg_solve;
use sisg::util::ls_slope;

fn unit_square(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::build_structured(n, n, (0.0, 0.0, 1.0, 1.0), Diagonal::Right).unwrap())
}

fn smooth_field() -> ScalarField {
    let pi = std::f64::consts::PI;
    ScalarField::with_gradient(
        move |x, y| (pi * x).sin() * (pi * y).cos(),
        move |x, y| {
            (
                pi * (pi * x).cos() * (pi * y).cos(),
                -pi * (pi * x).sin() * (pi * y).sin(),
            )
        },
    )
}

/// Broken interpolation-error sums decay like h^{k+1}: the plain L2 part
/// for every family, and the h-weighted gradient part for continuous
/// spaces.
#[test]
fn interpolation_error_sums_converge_at_k_plus_one() {
    let u = smooth_field();
    for (family, k) in [
        (Family::Dg, 0usize),
        (Family::Dg, 1),
        (Family::Cg, 1),
        (Family::Cg, 2),
        (Family::Cg, 3),
    ] {
        let mut ln_h = Vec::new();
        let mut ln_l2 = Vec::new();
        let mut ln_weighted = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let mesh = unit_square(n);
            let space = FunctionSpace::new(Arc::clone(&mesh), family, k).unwrap();
            let f = space.interpolate(&u).unwrap();
            let quad = 2 * k + 6;
            let e0 = element_error_squares(&f, &u, 0, quad).unwrap();
            let l2_sq = broken_weighted_sum(&mesh, &[(0, 0)], |e, _| Ok(e0[e])).unwrap();
            ln_h.push((1.0 / n as f64).ln());
            ln_l2.push(l2_sq.sqrt().ln());
            if family == Family::Cg {
                let e1 = element_error_squares(&f, &u, 1, quad).unwrap();
                let weighted = broken_weighted_sum(&mesh, &[(1, 2)], |e, _| Ok(e1[e])).unwrap();
                ln_weighted.push(weighted.sqrt().ln());
            }
        }
        let nominal = k as f64 + 1.0;
        let order = ls_slope(&ln_h, &ln_l2);
        assert!(
            (order - nominal).abs() <= 0.15,
            "{family:?}_{k}: L2 interpolation order {order:.3}"
        );
        if family == Family::Cg {
            let order_w = ls_slope(&ln_h, &ln_weighted);
            assert!(
                (order_w - nominal).abs() <= 0.15,
                "{family:?}_{k}: weighted gradient order {order_w:.3}"
            );
        }
    }
}

/// Interpolating a random polynomial of degree <= k reproduces it to
/// roundoff in L2.
#[test]
fn interpolation_reproduces_random_polynomials() {
    let mut rng = StdRng::seed_from_u64(0x1234_5678);
    let mesh = unit_square(4);
    for (family, k) in [
        (Family::Dg, 0usize),
        (Family::Dg, 2),
        (Family::Cg, 1),
        (Family::Cg, 2),
        (Family::Cg, 3),
        (Family::Cg, 4),
    ] {
        let space = FunctionSpace::new(Arc::clone(&mesh), family, k).unwrap();
        for _ in 0..5 {
            let coeffs: Vec<f64> = (0..((k + 1) * (k + 2) / 2))
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let monomials: Vec<(i32, i32)> = (0..=k as i32)
                .flat_map(|d| (0..=d).map(move |a| (d - a, a)))
                .collect();
            let c = coeffs.clone();
            let m = monomials.clone();
            let poly = ScalarField::new(move |x, y| {
                m.iter()
                    .zip(&c)
                    .map(|(&(a, b), &cv)| cv * x.powi(a) * y.powi(b))
                    .sum()
            });
            let f = space.interpolate(&poly).unwrap();
            let err = l2_error(&f, &poly, 2 * k + 6).unwrap();
            let scale = l2_norm(&f, 2 * k + 6).unwrap().max(1e-3);
            assert!(
                err <= 1e-10 * scale,
                "{family:?}_{k}: error {err:.2e} vs scale {scale:.2e}"
            );
        }
    }
}

/// Quadratic interpolation of a smooth one-dimensional profile gains an
/// order per halving at the cubic rate.
#[test]
fn quadratic_interpolation_of_sine_converges_at_third_order() {
    let exact = ScalarField::new(|x, _| x.sin());
    let mut ln_h = Vec::new();
    let mut ln_e = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let space = FunctionSpace::new(unit_square(n), Family::Cg, 2).unwrap();
        let f = space.interpolate(&exact).unwrap();
        ln_h.push((1.0 / n as f64).ln());
        ln_e.push(l2_error(&f, &exact, 10).unwrap().ln());
    }
    let order = ls_slope(&ln_h, &ln_e);
    assert!((order - 3.0).abs() <= 0.1, "observed order {order:.3}");
}

/// The weighted broken sum for a linear interpolant drops by 2^{2(k+1)}
/// = 16 when the mesh size halves.
#[test]
fn hypothesis_sum_drops_sixteenfold_per_halving() {
    let u = smooth_field();
    let mut sums = Vec::new();
    for n in [16usize, 32] {
        let mesh = unit_square(n);
        let space = FunctionSpace::new(Arc::clone(&mesh), Family::Cg, 1).unwrap();
        let f = space.interpolate(&u).unwrap();
        let e0 = element_error_squares(&f, &u, 0, 8).unwrap();
        let e1 = element_error_squares(&f, &u, 1, 8).unwrap();
        let total = broken_weighted_sum(&mesh, &[(0, 0), (1, 2)], |e, m| {
            Ok(if m == 0 { e0[e] } else { e1[e] })
        })
        .unwrap();
        sums.push(total);
    }
    let factor = sums[0] / sums[1];
    assert!(
        (factor - 16.0).abs() <= 0.2 * 16.0,
        "reduction factor {factor:.3}"
    );
}

/// The mass matrix applied to the all-ones vector is reproduced by the
/// solver: constants lie in every continuous space.
#[test]
fn mass_solve_recovers_the_constant() {
    let space = FunctionSpace::new(unit_square(8), Family::Cg, 1).unwrap();
    let mass = assemble_mass(&space, 2).unwrap();
    let ones = vec![1.0; space.n_dofs()];
    let b = mass.matvec(&ones);
    let sol = pcg_solve(&mass, &b, 1e-12, 1000).unwrap();
    let worst = sol.x.iter().map(|x| (x - 1.0).abs()).fold(0.0f64, f64::max);
    assert!(worst < 1e-8, "max deviation from one: {worst:.2e}");
}

//! Property tests for the structural invariants: refinement conserves
//! area and conformity, assembly is deterministic and matches a dense
//! oracle, and filter kernels reproduce polynomial derivatives.

use proptest::prelude::*;

use sisg::mesh::{Diagonal, Mesh};
use sisg::savgol::{kernel, SGWindow};
use sisg::sparse::assemble;

const SQRT2: f64 = std::f64::consts::SQRT_2;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any sequence of markings keeps the mesh conforming (validated by
    /// the constructor contract), conserves area, and preserves the
    /// quality bound of the 45-degree initial grid.
    #[test]
    fn refinement_preserves_area_conformity_and_quality(
        steps in prop::collection::vec((0u8..3, 0usize..1000), 1..5)
    ) {
        let mut mesh =
            Mesh::build_structured(2, 2, (-0.5, 0.0, 0.5, 1.0), Diagonal::Right).unwrap();
        for (kind, seed) in steps {
            let nt = mesh.n_triangles();
            let marked: Vec<usize> = match kind {
                0 => (0..nt).collect(),
                1 => (0..nt).filter(|e| (e + seed) % 3 == 0).collect(),
                _ => vec![seed % nt],
            };
            mesh = mesh.refine(&marked).unwrap();
            prop_assert!((mesh.total_area() - 1.0).abs() < 1e-12);
            let q = mesh.quality_report().unwrap();
            prop_assert!(q.gamma <= 1.0 + SQRT2 + 1e-12);
            prop_assert!(q.gamma <= q.quasi_uniform_ratio + 1e-12);
        }
    }

    /// Assembly sums duplicates like a dense accumulator and produces
    /// bitwise-identical results on repeated runs.
    #[test]
    fn assembly_matches_dense_oracle(
        triplets in prop::collection::vec(
            (0usize..6, 0usize..6, -10.0f64..10.0), 0..60)
    ) {
        let n = 6;
        let a = assemble(n, triplets.clone()).unwrap();
        let b = assemble(n, triplets.clone()).unwrap();
        for r in 0..n {
            let (ca, va) = a.row(r);
            let (cb, vb) = b.row(r);
            prop_assert_eq!(ca, cb);
            for (x, y) in va.iter().zip(vb) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let mut dense = vec![vec![0.0f64; n]; n];
        for &(r, c, v) in &triplets {
            dense[r][c] += v;
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let ax = a.matvec(&x);
        for r in 0..n {
            let expect: f64 = (0..n).map(|c| dense[r][c] * x[c]).sum();
            prop_assert!((ax[r] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }

    /// Filter kernels reproduce the d-th derivative of every monomial of
    /// degree at most k at the evaluation point: sum_i c_i x_i^j equals
    /// d! for j = d and 0 for the other j <= k.
    #[test]
    fn kernel_moments_characterize_the_filter(
        degree in 0usize..5,
        extra in 1usize..8,
        offset_sel in 0usize..100,
        deriv_sel in 0usize..100,
    ) {
        let window = degree + extra;
        let offset = 1 + offset_sel % window;
        let deriv = deriv_sel % (degree + 1);
        let w = SGWindow::new(window, degree)
            .unwrap()
            .with_offset(offset)
            .unwrap()
            .with_derivative(deriv)
            .unwrap();
        let c = kernel(&w).unwrap();
        let nodes = w.nodes();
        let dfact: f64 = (1..=deriv).map(|i| i as f64).product::<f64>().max(1.0);
        for j in 0..=degree {
            let moment: f64 = c
                .iter()
                .zip(&nodes)
                .map(|(ci, x)| ci * x.powi(j as i32))
                .sum();
            let expect = if j == deriv { dfact } else { 0.0 };
            let scale = c.iter().map(|v| v.abs()).sum::<f64>()
                * nodes.iter().fold(1.0f64, |a, &x| a.max(x.abs())).powi(j as i32);
            prop_assert!(
                (moment - expect).abs() <= 1e-9 * scale.max(1.0),
                "r={window} k={degree} d={deriv} off={offset} j={j}: {moment} vs {expect}"
            );
        }
    }
}

//! Property tests over randomized shapes and parameters: the structural
//! invariants that must hold on every input, not just on pinned seeds.

use num_complex::Complex64;
use proptest::prelude::*;

use circulab::ensemble::{sample_matrix, SparseSample, Time, XiSpec};
use circulab::linalg::{max_abs_diff, singular_values, svd, CMat};
use circulab::lawcheck::disk_rect_mass;
use circulab::potential::u_circ;
use circulab::process::{interlacing_check, walk_row_bound_check};
use circulab::quasirandom::{event_matrix, lambda_count, unique_neighborhood};

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    proptest::collection::vec(complex_entry(), rows * cols)
        .prop_map(move |v| CMat::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

fn any_cmat() -> impl Strategy<Value = CMat> {
    (1usize..8, 1usize..8).prop_flat_map(|(r, c)| cmat(r, c))
}

fn xi_spec() -> impl Strategy<Value = XiSpec> {
    prop_oneof![
        Just(XiSpec::Rademacher),
        Just(XiSpec::ComplexGaussian),
        Just(XiSpec::UnitCircleUniform),
        Just(XiSpec::BernoulliScaled),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // Singular values are the same whether or not vectors are requested,
    // and the factored form reconstructs the input.
    #[test]
    fn svd_reconstructs(a in any_cmat()) {
        let dec = svd(&a, true, true).unwrap();
        let plain = singular_values(&a).unwrap();
        for (x, y) in dec.values.iter().zip(&plain) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
        let u = dec.u.unwrap();
        let v = dec.v.unwrap();
        let mut sigma = CMat::zeros(u.cols(), v.cols());
        for (i, &s) in dec.values.iter().enumerate() {
            if i < sigma.rows().min(sigma.cols()) {
                sigma[(i, i)] = Complex64::new(s, 0.0);
            }
        }
        let scale = 1.0 + dec.values.first().copied().unwrap_or(0.0);
        prop_assert!(max_abs_diff(&u.mul(&sigma).mul(&v.adjoint()), &a) <= 1e-9 * scale);
    }

    // Appending any row can only push singular values up, interlaced.
    #[test]
    fn appended_row_interlaces(
        (m, extra) in (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
            (cmat(r, c), proptest::collection::vec(complex_entry(), c..=c))
        }),
    ) {
        let stacked = CMat::from_fn(m.rows() + 1, m.cols(), |i, j| {
            if i < m.rows() { m[(i, j)] } else { extra[j] }
        });
        let worst = interlacing_check(&m, &stacked).unwrap();
        let scale = 1.0 + singular_values(&m).unwrap().first().copied().unwrap_or(0.0);
        prop_assert!(worst <= 1e-9 * scale, "violation {}", worst);
    }

    // The appended-row determinant bound holds for every rank cut.
    #[test]
    fn walk_row_bound_holds(m in (2usize..8).prop_flat_map(|k| cmat(k, k)), cut in 0usize..8) {
        let r = cut % m.cols();
        let x: Vec<Complex64> = (0..m.cols()).map(|j| m[(0, j)] * Complex64::new(0.0, 1.0)).collect();
        let (lhs, rhs, _) = walk_row_bound_check(&m, &x, r).unwrap();
        prop_assert!(lhs >= rhs - 1e-9 * rhs.abs().max(1.0), "{} < {}", lhs, rhs);
    }

    // Sample serialization round-trips bit for bit.
    #[test]
    fn sample_csv_round_trip(
        n in 1usize..40,
        m in 1usize..40,
        p in 0.0f64..0.5,
        xi in xi_spec(),
        seed in 0u64..1000,
    ) {
        let sample = sample_matrix(n, m, p, &xi, seed).unwrap();
        let mut text = Vec::new();
        sample.write_csv(&mut text).unwrap();
        let back = SparseSample::read_csv(&mut text.as_slice()).unwrap();
        prop_assert_eq!(&sample.entries, &back.entries);
        prop_assert_eq!(sample.n_rows, back.n_rows);
        prop_assert_eq!(sample.n_cols, back.n_cols);
        prop_assert_eq!(sample.seed, back.seed);
        prop_assert!(sample.p == back.p);
    }

    // Unique-neighborhood membership is invariant under reordering S and
    // monotone in beta: raising the threshold only removes rows.
    #[test]
    fn unique_neighborhood_beta_monotone(
        n in 6usize..30,
        p in 0.05f64..0.4,
        seed in 0u64..500,
        beta_lo in 0.1f64..0.6,
        gap in 0.0f64..1.0,
    ) {
        let sample = sample_matrix(n, n, p, &XiSpec::ComplexGaussian, seed).unwrap();
        let b = event_matrix(&sample, Time::integer(n)).unwrap();
        let s = vec![0, n / 2, n - 1];
        let mut s_rev = s.clone();
        s_rev.reverse();
        let lo = unique_neighborhood(&b, &s, beta_lo).unwrap();
        prop_assert_eq!(&lo, &unique_neighborhood(&b, &s_rev, beta_lo).unwrap());
        let hi = unique_neighborhood(&b, &s, beta_lo + gap).unwrap();
        prop_assert!(hi.iter().all(|i| lo.contains(i)), "beta raise added rows");
    }

    // lambda is antitone in the threshold and counts the whole vector at 0.
    #[test]
    fn lambda_count_antitone(v in proptest::collection::vec(complex_entry(), 0..50), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(lambda_count(&v, hi) <= lambda_count(&v, lo));
        prop_assert_eq!(lambda_count(&v, 0.0), v.len());
    }

    // The disk potential is radial, continuous across the circle, and the
    // rectangle mass is monotone in both corners.
    #[test]
    fn u_circ_radial_and_mass_monotone(re in -2.0f64..2.0, im in -2.0f64..2.0, s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let z = Complex64::new(re, im);
        let rot = Complex64::new(-im, re);
        prop_assert!((u_circ(z) - u_circ(rot)).abs() <= 1e-12);
        let smaller = disk_rect_mass(s - 0.25, t);
        prop_assert!(disk_rect_mass(s, t) + 1e-12 >= smaller);
        prop_assert!(disk_rect_mass(s, t - 0.25) <= disk_rect_mass(s, t) + 1e-12);
    }
}

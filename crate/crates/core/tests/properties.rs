use k3cert::certificate::{enumerate_low_degree, run_certificate_with, CertificateInput, RunOptions};
use k3cert::discgroup::{
    action_order, default_cap, disc_quadratic_value, discriminant_group, smith_normal_form,
    to_rational, ActionOrder,
};
use k3cert::isometry::IsometryMatrix;
use k3cert::lattice::is_primitive;
use k3cert::oracle::{brute_action_order, brute_low_degree, brute_values, required_low_degree_radius};
use k3cert::quadform::{automorph_generator, represents_value, BinaryForm, Representation};
use k3cert::{BigInt, BigRational, GramLattice, IntMatrix, LatticeVector};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn gram_strategy(rank: usize, bound: i64) -> impl Strategy<Value = GramLattice> {
    proptest::collection::vec(-bound..=bound, rank * (rank + 1) / 2).prop_filter_map(
        "degenerate",
        move |upper| {
            let mut rows = vec![vec![0i64; rank]; rank];
            let mut k = 0;
            for i in 0..rank {
                for j in i..rank {
                    rows[i][j] = upper[k];
                    rows[j][i] = upper[k];
                    k += 1;
                }
            }
            GramLattice::from_i64(&rows).ok()
        },
    )
}

/// Even lattices `[[2a, b], [b, 2c]]` of signature (1,1).
fn hyperbolic_even() -> impl Strategy<Value = GramLattice> {
    (-6i64..=6, -12i64..=12, -6i64..=6).prop_filter_map("not hyperbolic", |(a, b, c)| {
        let g = GramLattice::from_i64(&[[2 * a, b], [b, 2 * c]]).ok()?;
        g.determinant().is_negative().then_some(g)
    })
}

fn vector(rank: usize, bound: i64) -> impl Strategy<Value = LatticeVector> {
    proptest::collection::vec(-bound..=bound, rank).prop_map(|c| LatticeVector::from_i64(&c))
}

fn unimodular_2x2() -> impl Strategy<Value = IntMatrix> {
    // products of elementary moves
    proptest::collection::vec((0u8..4, -3i64..=3), 1..6).prop_map(|moves| {
        let mut m = IntMatrix::identity(2);
        for (kind, k) in moves {
            let e = match kind {
                0 => IntMatrix::from_i64(&[[1, k], [0, 1]]),
                1 => IntMatrix::from_i64(&[[1, 0], [k, 1]]),
                2 => IntMatrix::from_i64(&[[0, 1], [1, 0]]),
                _ => IntMatrix::from_i64(&[[-1, 0], [0, 1]]),
            };
            m = m.mul(&e).unwrap();
        }
        m
    })
}

fn quartic() -> GramLattice {
    GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap()
}

fn sigma() -> IntMatrix {
    IntMatrix::from_i64(&[[10, 1], [-1, 0]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inner_is_symmetric_and_bilinear(
        (g, u, v, w, a, b) in (1usize..=4).prop_flat_map(|r| (
            gram_strategy(r, 20), vector(r, 30), vector(r, 30), vector(r, 30), -9i64..=9, -9i64..=9,
        ))
    ) {
        let (a, b) = (BigInt::from(a), BigInt::from(b));
        prop_assert_eq!(g.inner(&u, &v).unwrap(), g.inner(&v, &u).unwrap());
        let lhs = g.inner(&u.scale(&a).add(&v.scale(&b)), &w).unwrap();
        let rhs = &a * g.inner(&u, &w).unwrap() + &b * g.inner(&v, &w).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn determinant_and_signature_are_basis_invariant(g in gram_strategy(2, 30), u in unimodular_2x2()) {
        let h = g.change_basis(&u).unwrap();
        prop_assert_eq!(h.determinant(), g.determinant());
        prop_assert_eq!(h.signature(), g.signature());
        prop_assert_eq!(
            discriminant_group(&h).invariant_factors,
            discriminant_group(&g).invariant_factors
        );
    }

    #[test]
    fn smith_form_is_valid(rows in proptest::collection::vec(proptest::collection::vec(-50i64..=50, 3), 3)) {
        let m = IntMatrix::from_i64(&rows);
        let snf = smith_normal_form(&m);
        prop_assert!(snf.u.determinant().unwrap().abs() == BigInt::from(1));
        prop_assert!(snf.v.determinant().unwrap().abs() == BigInt::from(1));
        prop_assert_eq!(snf.u.mul(&m).unwrap().mul(&snf.v).unwrap(), snf.d.clone());
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative());
            if !w[0].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero());
            } else {
                prop_assert!(w[1].is_zero());
            }
        }
    }

    #[test]
    fn sigma_powers_preserve_norms(k in 0u64..6, v in vector(2, 40)) {
        let g = quartic();
        let m = IsometryMatrix::new(&g, sigma()).unwrap().pow(k).unwrap();
        prop_assert_eq!(g.norm(&m.apply(&v).unwrap()).unwrap(), g.norm(&v).unwrap());
    }

    #[test]
    fn automorphs_preserve_norms(g in hyperbolic_even(), v in vector(2, 20)) {
        let f = BinaryForm::from_lattice(&g).unwrap();
        let Ok(a) = automorph_generator(&f.primitive_part()) else { return Ok(()); };
        let iso = IsometryMatrix::new(&g, a).unwrap();
        prop_assert_eq!(g.norm(&iso.apply(&v).unwrap()).unwrap(), g.norm(&v).unwrap());
    }

    #[test]
    fn representability_agrees_with_box_scan(g in hyperbolic_even(), t in -20i64..=20) {
        let t = BigInt::from(t);
        let values = brute_values(&g, 30).unwrap();
        match represents_value(&g, &t, 1000).unwrap() {
            Representation::Yes { witness } => {
                prop_assert!(!witness.is_zero());
                prop_assert_eq!(g.norm(&witness).unwrap(), t);
            }
            Representation::No { .. } => prop_assert!(!values.contains_key(&t)),
            Representation::Unknown { .. } => {}
        }
    }

    #[test]
    fn induced_action_is_functorial(i in 0u64..4, j in 0u64..4) {
        let g = quartic();
        let group = discriminant_group(&g);
        let a = sigma().pow(i).unwrap();
        let b = sigma().unimodular_inverse().unwrap().pow(j).unwrap().neg();
        let ab = group.induced_action(&a.mul(&b).unwrap()).unwrap();
        let composed = group
            .induced_action(&a)
            .unwrap()
            .compose(&group.induced_action(&b).unwrap());
        prop_assert_eq!(ab, composed);
    }

    #[test]
    fn discriminant_form_is_well_defined(coords in proptest::collection::vec(-200i64..=200, 2), shift in vector(2, 9)) {
        let g = quartic();
        let group = discriminant_group(&g);
        let w = group.element(&coords.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
        let moved: Vec<BigRational> = w
            .iter()
            .zip(to_rational(shift.coords()))
            .map(|(a, b)| a + b)
            .collect();
        prop_assert_eq!(
            disc_quadratic_value(&g, &w).unwrap(),
            disc_quadratic_value(&g, &moved).unwrap()
        );
    }

    #[test]
    fn low_degree_windows_match_box_scan(g in hyperbolic_even(), h in vector(2, 3), bound in 1u64..24) {
        let Ok(n) = g.norm(&h) else { return Ok(()); };
        if !n.is_positive() || !is_primitive(&h).unwrap_or(false) {
            return Ok(());
        }
        let windows = enumerate_low_degree(&g, &h, bound, 1).unwrap();
        let radius = required_low_degree_radius(&g, &h, bound).unwrap();
        prop_assume!(radius <= 400);
        prop_assert_eq!(windows, brute_low_degree(&g, &h, bound, radius).unwrap());
    }

    #[test]
    fn low_degree_lists_are_monotone_in_the_bound(b in 1u64..40, extra in 0u64..40) {
        let g = quartic();
        let h = LatticeVector::from_i64(&[1, 0]);
        let small = enumerate_low_degree(&g, &h, b, 1).unwrap();
        let large = enumerate_low_degree(&g, &h, b + extra, 2).unwrap();
        let prefix: Vec<_> = large.into_iter().filter(|c| c.degree < BigInt::from(b)).collect();
        prop_assert_eq!(small, prefix);
    }

    #[test]
    fn action_orders_agree(k in 1u64..5, negate in any::<bool>()) {
        let g = quartic();
        let mut m = sigma().pow(k).unwrap();
        if negate {
            m = m.neg();
        }
        let group = discriminant_group(&g);
        let cap = default_cap(&group);
        let structured = action_order(&group.induced_action(&m).unwrap(), cap);
        prop_assert_eq!(structured, brute_action_order(&g, &m, cap).unwrap());
        prop_assert!(matches!(structured, ActionOrder::Finite(_)));
    }
}

#[test]
fn reports_are_deterministic_across_job_counts() {
    let input = CertificateInput::new(
        quartic(),
        LatticeVector::from_i64(&[1, 0]),
        Some(sigma()),
    )
    .unwrap();
    let render = |jobs| {
        let opts = RunOptions {
            verify: true,
            jobs,
            ..RunOptions::default()
        };
        serde_json::to_string(&run_certificate_with(&input, &opts)).unwrap()
    };
    let first = render(1);
    assert_eq!(first, render(1));
    assert_eq!(first, render(4));
    assert_eq!(first, render(16));
}

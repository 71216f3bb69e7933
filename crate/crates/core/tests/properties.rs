use proptest::prelude::*;

use ssgk::baselines::{
    characteristic_path_length, clustering_coefficients, edge_features, from_edge_features,
};
use ssgk::data::{band_average, BandSpec, StackedBandTensor};
use ssgk::factorization::canonicalize_signs;
use ssgk::linalg::{matrix_inner, rank_one_inner, reconstruct, symmetric_eig};
use ssgk::{ssgk, FactorSet, RbfParams, SymmetricMatrix};

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn factor_set(max_dim: usize, max_rank: usize) -> impl Strategy<Value = FactorSet> {
    (1..=max_dim, 1..=max_rank).prop_flat_map(|(i, r)| {
        prop::collection::vec(vec_of(i), r).prop_map(|v| FactorSet::new(v).unwrap())
    })
}

fn factor_pair(max_dim: usize, max_rank: usize) -> impl Strategy<Value = (FactorSet, FactorSet)> {
    (1..=max_dim, 1..=max_rank, 1..=max_rank).prop_flat_map(|(i, r1, r2)| {
        (
            prop::collection::vec(vec_of(i), r1).prop_map(|v| FactorSet::new(v).unwrap()),
            prop::collection::vec(vec_of(i), r2).prop_map(|v| FactorSet::new(v).unwrap()),
        )
    })
}

/// Non-negative weighted graph; roughly half the edges are absent.
fn graph(max_dim: usize) -> impl Strategy<Value = SymmetricMatrix> {
    (3..=max_dim).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.05..3.0f64], n * (n - 1) / 2)
            .prop_map(move |e| from_edge_features(n, &e).unwrap())
    })
}

proptest! {
    #[test]
    fn rank_one_identity_for_symmetric_outer(
        (a, u) in (1..8usize).prop_flat_map(|n| (vec_of(n), vec_of(n)))
    ) {
        let lhs = matrix_inner(&SymmetricMatrix::outer(&a).unwrap(), &SymmetricMatrix::outer(&u).unwrap()).unwrap();
        let rhs = rank_one_inner(&a, &a, &u, &u).unwrap();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>() * u.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn reconstruction_is_psd(f in factor_set(6, 4)) {
        let x = reconstruct(&f);
        let eig = symmetric_eig(&x).unwrap();
        prop_assert!(eig.min() >= -1e-9 * eig.max().abs().max(1.0));
    }

    #[test]
    fn inner_product_is_bilinear(
        (a, b, c, s) in (1..6usize).prop_flat_map(|n| (vec_of(n * n), vec_of(n * n), vec_of(n * n), -3.0..3.0f64))
    ) {
        let n = (a.len() as f64).sqrt() as usize;
        let sym = |v: &[f64]| SymmetricMatrix::new(n, v.to_vec()).unwrap();
        let (a, b, c) = (sym(&a), sym(&b), sym(&c));
        let combo: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + s * y).collect();
        let lhs = matrix_inner(&SymmetricMatrix::new(n, combo).unwrap(), &c).unwrap();
        let rhs = matrix_inner(&a, &c).unwrap() + s * matrix_inner(&b, &c).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert_eq!(matrix_inner(&a, &c).unwrap(), matrix_inner(&c, &a).unwrap());
    }

    #[test]
    fn canonicalization_is_idempotent_and_preserves_reconstruction(f in factor_set(6, 4)) {
        let once = canonicalize_signs(&f);
        let twice = canonicalize_signs(&once);
        prop_assert_eq!(twice.vectors(), once.vectors());
        prop_assert_eq!(reconstruct(&once), reconstruct(&f));
        for v in once.vectors() {
            let k = v.iter().enumerate().fold(0, |k, (i, x)| if x.abs() > v[k].abs() { i } else { k });
            prop_assert!(v[k] >= 0.0);
        }
    }

    #[test]
    fn kernel_symmetry_and_lower_bound(
        (fx, fy) in factor_pair(6, 4),
        gamma in 0.01..10.0f64,
        perm_seed in any::<u64>()
    ) {
        let p = RbfParams::new(gamma).unwrap();
        let kxy = ssgk(&fx, &fy, &p).unwrap();
        prop_assert_eq!(kxy, ssgk(&fy, &fx, &p).unwrap());
        prop_assert!(kxy >= 0.0 && kxy <= (fx.rank() * fy.rank()) as f64 + 1e-12);
        prop_assert!(ssgk(&fx, &fx, &p).unwrap() >= fx.rank() as f64 - 1e-12);

        let r = fx.rank();
        let mut perm: Vec<usize> = (0..r).collect();
        perm.rotate_left((perm_seed as usize) % r);
        let permuted = fx.permuted(&perm).unwrap();
        let kp = ssgk(&permuted, &fy, &p).unwrap();
        prop_assert!((kp - kxy).abs() <= 1e-12 * kxy.max(1e-300));
    }

    #[test]
    fn clustering_in_unit_interval_and_scale_invariant(g in graph(7), s in 0.1..50.0f64) {
        let cc = clustering_coefficients(&g).unwrap();
        prop_assert!(cc.iter().all(|&c| (0.0..=1.0 + 1e-12).contains(&c)));
        let scaled = clustering_coefficients(&g.scaled(s).unwrap()).unwrap();
        for (a, b) in cc.iter().zip(&scaled) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn path_length_scales_inversely(g in graph(7), s in 0.1..50.0f64) {
        if let Ok(l) = characteristic_path_length(&g) {
            let ls = characteristic_path_length(&g.scaled(s).unwrap()).unwrap();
            prop_assert!((ls - l / s).abs() <= 1e-10 * (l / s));
        }
    }

    #[test]
    fn graph_metrics_are_permutation_equivariant(g in graph(7), rot in 0usize..7) {
        let n = g.dim();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(rot % n);
        let pg = g.permuted(&perm).unwrap();
        let cc = clustering_coefficients(&g).unwrap();
        let pcc = clustering_coefficients(&pg).unwrap();
        for (i, &pi) in perm.iter().enumerate() {
            prop_assert!((pcc[i] - cc[pi]).abs() <= 1e-12);
        }
        match (characteristic_path_length(&g), characteristic_path_length(&pg)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * a),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "connectivity changed under permutation"),
        }
        let mut e = edge_features(&g);
        let mut pe = edge_features(&pg);
        e.sort_by(f64::total_cmp);
        pe.sort_by(f64::total_cmp);
        prop_assert_eq!(e, pe);
    }

    #[test]
    fn band_average_is_linear(
        a in prop::collection::vec(vec_of(9), 12),
        b in prop::collection::vec(vec_of(9), 12),
        s in -2.0..2.0f64
    ) {
        let tensor = |v: &[Vec<f64>]| StackedBandTensor::new(
            v.iter().map(|m| SymmetricMatrix::new(3, m.clone()).unwrap()).collect()
        ).unwrap();
        let combo: Vec<Vec<f64>> = a.iter().zip(&b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + s * q).collect())
            .collect();
        let band = BandSpec::theta();
        let lhs = band_average(&tensor(&combo), &band).unwrap();
        let ra = band_average(&tensor(&a), &band).unwrap();
        let rb = band_average(&tensor(&b), &band).unwrap();
        for k in 0..9 {
            let want = ra.as_slice()[k] + s * rb.as_slice()[k];
            prop_assert!((lhs.as_slice()[k] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}

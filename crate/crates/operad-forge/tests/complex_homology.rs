use num_bigint::BigInt;
use operad_forge::homology::{alternating_sum, exact_rank, SparseVec};
use operad_forge::{
    betti, d_corolla_mixed, euler_characteristic, f_vector, n_corolla, rat, ChainComplex, FormalSum, HomologyReport,
    Tree,
};

/// Poincaré polynomial of the configuration space of `p` points in the
/// plane, `∏_{i=1}^{p-1} (1 + i t)`: the classical little-discs oracle.
fn little_discs_betti(p: usize) -> Vec<usize> {
    let mut poly = vec![1usize];
    for i in 1..p {
        let mut next = vec![0; poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] += c * i;
        }
        poly = next;
    }
    poly
}

fn signatures(bound: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for p in 0..=bound / 2 {
        for q in 0..=bound - 2 * p {
            if 2 * p + q >= 2 {
                out.push((p, q));
            }
        }
    }
    out
}

#[test]
fn small_complex_dimensions() {
    assert_eq!(ChainComplex::planar(2, 0).unwrap().dims(), vec![2, 3, 1]);
    assert_eq!(ChainComplex::planar(1, 1).unwrap().dims(), vec![2, 1]);
    assert_eq!(ChainComplex::planar(0, 3).unwrap().dims(), vec![2, 1]);
    assert!(ChainComplex::planar(0, 1).is_err());
}

#[test]
fn exact_rank_examples() {
    assert_eq!(exact_rank(&[]), 0);
    assert_eq!(exact_rank(&[vec![], vec![], vec![]]), 0);
    let identity: Vec<SparseVec> = (0..3).map(|i| vec![(i, BigInt::from(1))]).collect();
    assert_eq!(exact_rank(&identity), 3);
    assert_eq!(ChainComplex::planar(1, 1).unwrap().rank(1), 1);
    // Large entries stay exact.
    let big = BigInt::from(10).pow(40);
    let cols = vec![
        vec![(0, big.clone()), (1, BigInt::from(1))],
        vec![(0, big.clone() * 3), (1, BigInt::from(3))],
        vec![(0, BigInt::from(1)), (1, big.clone())],
    ];
    assert_eq!(exact_rank(&cols), 2);
}

#[test]
fn betti_numbers_match_the_little_discs_oracle() {
    for (p, q) in signatures(7) {
        let b = betti(p, q).unwrap();
        let oracle = little_discs_betti(p.max(1));
        assert!(b.len() >= oracle.len());
        assert_eq!(&b[..oracle.len()], &oracle[..], "({p},{q}) gave {b:?}");
        assert!(b[oracle.len()..].iter().all(|&x| x == 0), "({p},{q}) gave {b:?}");
    }
}

#[test]
fn named_betti_values() {
    for q in 0..=2 {
        assert_eq!(&betti(2, q).unwrap()[..3], &[1, 1, 0]);
    }
    for q in 1..=4 {
        let b = betti(1, q).unwrap();
        assert_eq!(b[0], 1);
        assert!(b[1..].iter().all(|&x| x == 0));
    }
    assert_eq!(betti(3, 0).unwrap(), vec![1, 3, 2, 0, 0]);
    assert_eq!(betti(3, 1).unwrap(), vec![1, 3, 2, 0, 0, 0]);
}

#[test]
fn euler_characteristics_and_f_vectors() {
    assert_eq!(f_vector(1, 2).unwrap(), vec![1, 6, 6]);
    assert_eq!(f_vector(0, 4).unwrap(), vec![1, 5, 5]);
    assert_eq!(f_vector(2, 0).unwrap(), vec![1, 3, 2]);
    assert_eq!(f_vector(2, 1).unwrap()[1], 9);
    assert_eq!(euler_characteristic(0, 5).unwrap(), 1);
    assert_eq!(euler_characteristic(2, 1).unwrap(), 0);
    assert_eq!(euler_characteristic(3, 0).unwrap(), 0);
    for (p, q) in signatures(7) {
        let f = f_vector(p, q).unwrap();
        let chi = euler_characteristic(p, q).unwrap();
        assert_eq!(chi, if p <= 1 { 1 } else { 0 }, "({p},{q})");
        let top = 2 * p + q - 2;
        assert_eq!(chi, if top % 2 == 0 { alternating_sum(&f) } else { -alternating_sum(&f) });
        let c = ChainComplex::planar(p, q).unwrap();
        let b = c.betti();
        let from_betti: i64 = b.iter().enumerate().map(|(m, &x)| if m % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
        let from_dims_m: i64 =
            c.dims().iter().enumerate().map(|(m, &x)| if m % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
        assert_eq!(from_betti, from_dims_m, "({p},{q})");
    }
}

#[test]
fn differentials_compose_to_zero() {
    for (p, q) in signatures(6) {
        assert!(ChainComplex::planar(p, q).unwrap().square_is_zero(), "({p},{q})");
    }
    for n in 2..=6 {
        assert!(ChainComplex::spatial(n).unwrap().square_is_zero(), "n = {n}");
    }
}

#[test]
fn spatial_complexes_have_lie_cohomology() {
    // (n-1)! classes, all carried by binary trees.
    for n in 2..=6usize {
        let b = ChainComplex::spatial(n).unwrap().betti();
        let nonzero: Vec<(usize, usize)> = b.iter().copied().enumerate().filter(|&(_, x)| x > 0).collect();
        let fact: usize = (1..n).product();
        assert_eq!(nonzero.len(), 1, "n = {n}: {b:?}");
        assert_eq!(nonzero[0].1, fact, "n = {n}");
        assert_eq!(nonzero[0].0 as i64, 2 * n as i64 - 3 - (n as i64 - 2), "binary trees on {n} leaves");
    }
}

#[test]
fn coboundary_test_with_witnesses() {
    let c = ChainComplex::planar(2, 0).unwrap();
    assert_eq!(c.is_coboundary(&FormalSum::zero(), 0).unwrap(), Some(FormalSum::zero()));
    let w = c.is_coboundary(&d_corolla_mixed(2, 0).unwrap(), 1).unwrap();
    assert_eq!(w, Some(FormalSum::from_tree(&n_corolla(2, 0))));
    let c11 = ChainComplex::planar(1, 1).unwrap();
    let diff = d_corolla_mixed(1, 1).unwrap();
    assert_eq!(c11.is_coboundary(&diff, 0).unwrap(), Some(FormalSum::from_tree(&n_corolla(1, 1))));
    // A single vertex of the (1,1) interval is a cocycle but not a coboundary.
    let (vertex, _) = diff.iter().next().unwrap();
    assert_eq!(c11.is_coboundary(&FormalSum::from_tree(vertex), 0).unwrap(), None);
    // Mixed degrees are rejected.
    let mut mixed = FormalSum::from_tree(&n_corolla(2, 0));
    let l2n10 = Tree::N { spatial: vec![Tree::L(vec![Tree::Spatial(1), Tree::Spatial(2)])], planar: vec![] };
    mixed.add_term(l2n10, rat(1));
    assert!(c.is_coboundary(&mixed, 1).is_err() || c.is_coboundary(&mixed, 2).is_err());
}

#[test]
fn betti_is_independent_of_planar_leaves() {
    for p in 1..=3usize {
        let reference = little_discs_betti(p);
        for q in 0..=(7 - 2 * p) {
            if 2 * p + q < 2 {
                continue;
            }
            let b = betti(p, q).unwrap();
            assert_eq!(&b[..reference.len()], &reference[..]);
        }
    }
}

#[test]
fn report_json_shape() {
    let r = HomologyReport::compute(2, 0).unwrap();
    let v = r.to_json();
    assert_eq!(v["p"], 2);
    assert_eq!(v["q"], 0);
    assert_eq!(v["f_vector"], serde_json::json!([1, 3, 2]));
    assert_eq!(v["betti"], serde_json::json!([1, 1, 0]));
    assert_eq!(v["euler"], 0);
}

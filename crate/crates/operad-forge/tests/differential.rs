use operad_forge::differential::d_tree_terms;
use operad_forge::signed::{graft_planar_sum, graft_spatial_sum};
use operad_forge::{
    d_corolla_mixed, d_corolla_spatial, d_sum, d_tree, enumerate_planar_rooted, enumerate_spatial_rooted, l_corolla,
    n_corolla, rat, ratio, FormalSum, Tree,
};
use proptest::prelude::*;

fn n10(x: Tree) -> Tree {
    Tree::N { spatial: vec![x], planar: vec![] }
}

#[test]
fn low_corollas() {
    assert!(d_tree(&n_corolla(0, 2)).is_zero());
    assert!(d_tree(&n_corolla(1, 0)).is_zero());
    assert!(d_corolla_spatial(2).unwrap().is_zero());
    assert_eq!(d_corolla_spatial(3).unwrap().len(), 3);
    assert!(d_corolla_spatial(1).is_err());
    assert!(d_corolla_mixed(0, 1).is_err());
    assert!(d_sum(&FormalSum::zero()).is_zero());
}

#[test]
fn centrality_expansion_is_literal() {
    // d n_{1,1} = n_{0,2}(n_{1,0}, a) - n_{0,2}(a, n_{1,0}).
    let mut expected = FormalSum::zero();
    expected.add_term(Tree::N { spatial: vec![], planar: vec![n10(Tree::Spatial(1)), Tree::Planar] }, rat(1));
    expected.add_term(Tree::N { spatial: vec![], planar: vec![Tree::Planar, n10(Tree::Spatial(1))] }, rat(-1));
    assert_eq!(d_corolla_mixed(1, 1).unwrap(), expected);
}

#[test]
fn term_counts_of_small_corollas() {
    for ((p, q), n) in [((1, 1), 2), ((2, 0), 3), ((1, 2), 6), ((2, 1), 9)] {
        assert_eq!(d_corolla_mixed(p, q).unwrap().len(), n, "({p},{q})");
    }
}

#[test]
fn square_zero_on_all_trees_up_to_six() {
    let mut checked = 0;
    for p in 0..=3usize {
        for q in 0..=6usize {
            if 2 * p + q < 2 || 2 * p + q > 6 {
                continue;
            }
            for t in enumerate_planar_rooted(p, q, None).unwrap() {
                assert!(d_sum(&d_tree(&t)).is_zero(), "{t}");
                checked += 1;
            }
        }
    }
    for n in 2..=5 {
        for t in enumerate_spatial_rooted(n).unwrap() {
            assert!(d_sum(&d_tree(&t)).is_zero(), "{t}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn terms_raise_degree_and_add_one_edge() {
    for (p, q) in [(2, 1), (1, 3), (3, 0), (2, 2)] {
        for t in enumerate_planar_rooted(p, q, None).unwrap() {
            for (s, u) in d_tree_terms(&t) {
                assert!(s == 1 || s == -1);
                assert_eq!(u.degree(), t.degree() + 1);
                assert_eq!(u.internal_edges(), t.internal_edges() + 1);
                assert_eq!((u.spatial_leaf_count(), u.planar_leaf_count()), (p, q));
            }
        }
    }
}

/// Contracting one internal edge of every term of `d T` recovers `T`.
fn contractions(t: &Tree) -> Vec<Tree> {
    fn merge(parent: &Tree, k: usize) -> Option<Tree> {
        let kids: Vec<Tree> = parent.children().cloned().collect();
        let child = &kids[k];
        match (parent, child) {
            (Tree::L(c), Tree::L(g)) => {
                let mut out: Vec<Tree> =
                    c.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x.clone()).collect();
                out.extend(g.iter().cloned());
                Some(Tree::L(out))
            }
            (Tree::N { spatial, planar }, Tree::L(g)) if k < spatial.len() => {
                let mut s: Vec<Tree> =
                    spatial.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, x)| x.clone()).collect();
                s.extend(g.iter().cloned());
                Some(Tree::N { spatial: s, planar: planar.clone() })
            }
            (Tree::N { spatial, planar }, Tree::N { spatial: gs, planar: gp }) if k >= spatial.len() => {
                let pos = k - spatial.len();
                let mut s = spatial.clone();
                s.extend(gs.iter().cloned());
                let mut p = planar[..pos].to_vec();
                p.extend(gp.iter().cloned());
                p.extend(planar[pos + 1..].iter().cloned());
                Some(Tree::N { spatial: s, planar: p })
            }
            _ => None,
        }
    }
    fn rec(t: &Tree, out: &mut Vec<Tree>) {
        let kids: Vec<Tree> = t.children().cloned().collect();
        for k in 0..kids.len() {
            if let Some(m) = merge(t, k) {
                out.push(m);
            }
            let mut inner = Vec::new();
            rec(&kids[k], &mut inner);
            for sub in inner {
                let mut new_kids = kids.clone();
                new_kids[k] = sub;
                out.push(match t {
                    Tree::L(_) => Tree::L(new_kids),
                    Tree::N { spatial, .. } => {
                        let ns = spatial.len();
                        Tree::N { spatial: new_kids[..ns].to_vec(), planar: new_kids[ns..].to_vec() }
                    }
                    _ => unreachable!(),
                });
            }
        }
    }
    let mut out = Vec::new();
    rec(t, &mut out);
    out.into_iter().map(|x| x.canonicalize().1).collect()
}

#[test]
fn every_term_contracts_back() {
    for (p, q) in [(2, 0), (2, 1), (1, 3), (3, 0)] {
        for t in enumerate_planar_rooted(p, q, None).unwrap() {
            for (u, _) in d_tree(&t).iter() {
                assert!(contractions(u).iter().any(|c| c == &t), "{u} does not contract to {t}");
            }
        }
    }
}

fn planar_pool() -> Vec<Tree> {
    [(0, 2), (1, 0), (1, 1), (0, 3), (2, 0), (1, 2), (2, 1), (0, 4)]
        .into_iter()
        .flat_map(|(p, q)| enumerate_planar_rooted(p, q, None).unwrap())
        .collect()
}

fn spatial_pool() -> Vec<Tree> {
    (2..=4).flat_map(|n| enumerate_spatial_rooted(n).unwrap()).collect()
}

fn leibniz_sign(t: &Tree) -> Coef {
    if t.degree() % 2 == 0 {
        rat(1)
    } else {
        rat(-1)
    }
}

type Coef = operad_forge::Coef;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn leibniz_for_planar_grafting(a in 0usize..10_000, b in 0usize..10_000, i in 0usize..8) {
        let pool = planar_pool();
        let (x, y) = (pool[a % pool.len()].clone(), pool[b % pool.len()].clone());
        prop_assume!(x.planar_leaf_count() > 0);
        let i = 1 + i % x.planar_leaf_count();
        let (fx, fy) = (FormalSum::from_tree(&x), FormalSum::from_tree(&y));
        let lhs = d_sum(&graft_planar_sum(&fx, i, &fy).unwrap());
        let mut rhs = graft_planar_sum(&d_tree(&x), i, &fy).unwrap();
        rhs.add_scaled(&graft_planar_sum(&fx, i, &d_tree(&y)).unwrap(), &leibniz_sign(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn leibniz_for_spatial_grafting(a in 0usize..10_000, b in 0usize..10_000, i in 0u32..8) {
        let hosts: Vec<Tree> = planar_pool().into_iter().chain(spatial_pool()).collect();
        let guests = spatial_pool();
        let (x, y) = (hosts[a % hosts.len()].clone(), guests[b % guests.len()].clone());
        prop_assume!(x.spatial_leaf_count() > 0);
        let i = 1 + i % x.spatial_leaf_count() as u32;
        let (fx, fy) = (FormalSum::from_tree(&x), FormalSum::from_tree(&y));
        let lhs = d_sum(&graft_spatial_sum(&fx, i, &fy).unwrap());
        let mut rhs = graft_spatial_sum(&d_tree(&x), i, &fy).unwrap();
        rhs.add_scaled(&graft_spatial_sum(&fx, i, &d_tree(&y)).unwrap(), &leibniz_sign(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_is_linear(a in 0usize..10_000, b in 0usize..10_000, p in -6i64..7, q in 1i64..6) {
        let pool = enumerate_planar_rooted(2, 2, None).unwrap();
        let (x, y) = (&pool[a % pool.len()], &pool[b % pool.len()]);
        let mut s = FormalSum::term(ratio(p, q), x.clone());
        s.add_term(y.clone(), rat(3));
        let mut expected = d_tree(x).scale(&ratio(p, q));
        expected.add_scaled(&d_tree(y), &rat(3));
        prop_assert_eq!(d_sum(&s), expected);
    }
}

#[test]
fn spatial_corollas_square_to_zero_to_seven() {
    for n in 2..=7 {
        assert!(d_sum(&d_corolla_spatial(n).unwrap()).is_zero(), "l_{n}");
    }
    assert_eq!(d_tree(&l_corolla(4)).len(), 4 + 6);
}

use operad_forge::oc_morphism::{check_chain_map_with, in_submodule, is_oc_tree, mu_bracket, mu_with, oc_relations};
use operad_forge::{
    betti, check_chain_map, check_module_morphism, d_tree, enumerate_planar_rooted, l_corolla, mu, mu_tree, n_corolla,
    phi_basis, ratio, verify_oc_relations, ChainComplex, FormalSum, MuMode, Tree,
};

fn n10(x: Tree) -> Tree {
    Tree::N { spatial: vec![x], planar: vec![] }
}

fn n11(x: Tree, y: Tree) -> Tree {
    Tree::N { spatial: vec![x], planar: vec![y] }
}

fn l2(a: Tree, b: Tree) -> Tree {
    Tree::L(vec![a, b])
}

fn leaf(k: u32) -> Tree {
    Tree::Spatial(k)
}

#[test]
fn generators_map_to_their_classes() {
    for t in [n_corolla(0, 2), n_corolla(1, 0), l_corolla(2)] {
        assert_eq!(mu_tree(&t), FormalSum::from_tree(&t));
        assert!(is_oc_tree(&t));
    }
    for t in [n_corolla(2, 0), n_corolla(1, 1), n_corolla(0, 3), n_corolla(2, 1), l_corolla(3)] {
        assert!(mu_tree(&t).is_zero(), "{t}");
        assert!(!is_oc_tree(&t));
    }
    assert_eq!(mu_bracket(2), FormalSum::from_tree(&l_corolla(2)));
    assert!(mu_bracket(3).is_zero());
}

#[test]
fn the_bracket_tree_maps_to_minus_half_a_bracket() {
    let x = n11(leaf(1), n10(leaf(2)));
    let (s, x) = x.canonicalize();
    let expected = FormalSum::from_tree(&n10(l2(leaf(1), leaf(2)))).scale(&ratio(-s as i64, 2));
    assert_eq!(mu_tree(&x), expected);
    assert!(in_submodule(&x));
    // Away from the root the tree is outside the module in the default mode.
    let nested = Tree::N { spatial: vec![], planar: vec![x.clone(), Tree::Planar] };
    assert!(mu_tree(&nested.canonicalize().1).is_zero());
    assert!(!mu_with(&FormalSum::from_tree(&nested), MuMode::Block).is_zero());
}

#[test]
fn mu_is_linear_and_defined_on_every_small_tree() {
    for (p, q) in [(1, 1), (2, 0), (1, 2), (2, 1), (3, 0)] {
        let trees = enumerate_planar_rooted(p, q, None).unwrap();
        let mut sum = FormalSum::zero();
        let mut images = FormalSum::zero();
        for (k, t) in trees.iter().enumerate() {
            let c = ratio(k as i64 + 1, 3);
            sum.add_term(t.clone(), c.clone());
            images.add_scaled(&mu_tree(t), &c);
            assert_eq!(mu_tree(t).is_zero(), !in_submodule(t));
        }
        assert_eq!(mu(&sum), images);
    }
}

#[test]
fn cancellation_on_low_corollas() {
    assert!(mu(&d_tree(&n_corolla(2, 0))).is_zero());
    // On l_3 the image is the Jacobiator, on n_{1,1} the centrality
    // relation: both zero only as classes.
    let jacobiator = mu(&d_tree(&l_corolla(3)));
    assert!(!jacobiator.is_zero());
    assert!(ChainComplex::spatial(3).unwrap().is_coboundary(&jacobiator, 2).unwrap().is_some());
    let centrality = mu(&d_tree(&n_corolla(1, 1)));
    assert!(!centrality.is_zero());
    let complex = ChainComplex::planar(1, 1).unwrap();
    assert_eq!(complex.is_coboundary(&centrality, 0).unwrap(), Some(FormalSum::from_tree(&n_corolla(1, 1))));
}

#[test]
fn chain_map_check_by_mode() {
    let root = check_chain_map(6).unwrap();
    assert_eq!(root, check_chain_map_with(6, MuMode::RootBlock).unwrap());
    assert_eq!(root.checked, 1081);
    assert_eq!(root.failures.len(), 20);
    assert_eq!(root.literal + root.class_level + root.failures.len(), root.checked);
    assert!(!root.passed());
    assert_eq!(check_chain_map_with(6, MuMode::Block).unwrap().failures.len(), 28);
    let derivation = check_chain_map_with(6, MuMode::Derivation).unwrap();
    assert_eq!(derivation.failures.len(), 3);
    // Every derivation-mode failure is n_{2,1} over a capped leaf.
    for f in &derivation.failures {
        let (_, t) = Tree::from_json(&f["case"]).unwrap();
        let Tree::N { spatial, planar } = &t else { panic!("{t}") };
        assert_eq!((spatial.len(), planar.len()), (2, 1), "{t}");
        assert_eq!(planar[0], n10(planar[0].children().next().unwrap().clone()), "{t}");
    }
    // Below arity measure five there is nothing to obstruct.
    assert!(check_chain_map(4).unwrap().passed());
}

#[test]
fn module_morphism_holds() {
    let report = check_module_morphism(8).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.checked, 1347);
    assert_eq!(report.literal, report.checked);
}

#[test]
fn phi_basis_realises_the_betti_numbers() {
    for p in 0..=3usize {
        for q in 0..=2usize {
            if 2 * p + q < 2 {
                continue;
            }
            let b = phi_basis(p, q).unwrap();
            assert!(b.all_cocycles() && b.oc_generated());
            let betti = betti(p, q).unwrap();
            let counts = b.counts();
            assert_eq!(&counts[..], &betti[..counts.len()], "({p},{q})");
            let complex = ChainComplex::planar(p, q).unwrap();
            assert_eq!(b.ranks(&complex).unwrap(), counts, "({p},{q})");
        }
    }
}

#[test]
fn oc_relations_vanish_in_cohomology() {
    let report = verify_oc_relations(6).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.checked, oc_relations().len());
    // None of them is literally zero.
    for (name, _, x) in oc_relations() {
        assert!(!x.is_zero(), "{name}");
    }
    let json = report.to_json();
    for key in ["check", "bound", "checked", "literal_zero", "class_level_zero", "failures", "witnesses"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

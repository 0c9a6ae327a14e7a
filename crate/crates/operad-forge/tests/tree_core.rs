use std::collections::BTreeSet;

use operad_forge::signed::{all_permutations, koszul_sign};
use operad_forge::{
    codim_counts, corolla_l, corolla_n, enumerate_planar_rooted, enumerate_spatial_rooted, graft_planar, graft_spatial,
    l_corolla, n_corolla, Colour, Tree,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every tree with `2p + q <= bound` reachable from corollas by grafting
/// corollas onto leaves, closed under relabelling. Grafting never lowers
/// `2p + q` below that of the intermediate tree, so the bound is safe.
fn grafting_closure(bound: usize) -> BTreeSet<Tree> {
    let size = |t: &Tree| 2 * t.spatial_leaf_count() + t.planar_leaf_count();
    let mut seen: BTreeSet<Tree> = BTreeSet::new();
    let mut frontier: Vec<Tree> = Vec::new();
    for p in 0..=bound / 2 {
        for q in 0..=bound - 2 * p {
            if 2 * p + q >= 2 {
                frontier.push(n_corolla(p, q));
            }
        }
    }
    for n in 2..=bound / 2 {
        frontier.push(l_corolla(n));
    }
    while let Some(t) = frontier.pop() {
        let p = t.spatial_leaf_count();
        let relabelled: Vec<Tree> = all_permutations(p)
            .into_iter()
            .map(|perm| t.relabel(&|k| perm[k as usize - 1] as u32 + 1).canonicalize().1)
            .collect();
        for u in relabelled {
            if !seen.insert(u.clone()) {
                continue;
            }
            let mut next = Vec::new();
            for i in 1..=p as u32 {
                for n in 2..=bound / 2 {
                    next.push(graft_spatial(&u, i, &l_corolla(n)).unwrap().1);
                }
            }
            for i in 1..=u.planar_leaf_count() {
                for r in 0..=bound / 2 {
                    for s in 0..=bound {
                        if 2 * r + s >= 2 {
                            next.push(graft_planar(&u, i, &n_corolla(r, s)).unwrap().1);
                        }
                    }
                }
            }
            frontier.extend(next.into_iter().filter(|x| size(x) <= bound));
        }
    }
    seen
}

#[test]
fn enumeration_matches_grafting_closure() {
    let bound = 6;
    let closure = grafting_closure(bound);
    let mut total = 0;
    for p in 0..=bound / 2 {
        for q in 0..=bound - 2 * p {
            if 2 * p + q < 2 {
                continue;
            }
            let listed = enumerate_planar_rooted(p, q, None).unwrap();
            let set: BTreeSet<Tree> = listed.iter().cloned().collect();
            assert_eq!(set.len(), listed.len(), "duplicates at ({p},{q})");
            let expected: BTreeSet<Tree> = closure
                .iter()
                .filter(|t| {
                    t.root_colour() == Colour::Planar && t.spatial_leaf_count() == p && t.planar_leaf_count() == q
                })
                .cloned()
                .collect();
            assert_eq!(set, expected, "({p},{q})");
            total += listed.len();
        }
    }
    for n in 2..=bound / 2 {
        let set: BTreeSet<Tree> = enumerate_spatial_rooted(n).unwrap().into_iter().collect();
        let expected: BTreeSet<Tree> = closure
            .iter()
            .filter(|t| t.root_colour() == Colour::Spatial && t.spatial_leaf_count() == n)
            .cloned()
            .collect();
        assert_eq!(set, expected, "n = {n}");
    }
    assert!(total > 1000);
}

/// Planar trees with `q` leaves and `j` internal edges, i.e. dissections of
/// a `(q+1)`-gon by `j` diagonals (Kirkman–Cayley).
fn kirkman(q: u64, j: u64) -> u64 {
    let binom = |n: u64, r: u64| -> u64 { (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) };
    binom(q - 2, j) * binom(q + j, j) / (j + 1)
}

#[test]
fn purely_planar_counts_match_kirkman_cayley() {
    for q in 2..=7u64 {
        let counts = codim_counts(&enumerate_planar_rooted(0, q as usize, None).unwrap());
        for (codim, &c) in counts.iter().enumerate() {
            assert_eq!(c as u64, kirkman(q, codim as u64), "q = {q}, codim {codim}");
        }
        assert_eq!(counts.len(), q as usize - 1);
    }
}

#[test]
fn degree_formula_on_all_small_trees() {
    for (p, q) in [(2, 0), (1, 2), (2, 1), (0, 5), (3, 0), (2, 2)] {
        for t in enumerate_planar_rooted(p, q, None).unwrap() {
            let s = t.signature();
            assert_eq!(s.degree, s.internal_edges as i64 + 2 - 2 * p as i64 - q as i64);
            assert_eq!(s.degree, t.degree());
            assert!(t.degree() <= 0);
        }
    }
    for n in 2..=5 {
        for t in enumerate_spatial_rooted(n).unwrap() {
            assert_eq!(t.degree(), t.internal_edges() as i64 + 3 - 2 * n as i64);
        }
    }
}

#[test]
fn corolla_constructors_validate() {
    assert!(corolla_l(2, &[1, 1]).is_err());
    assert!(corolla_l(3, &[1, 2]).is_err());
    assert_eq!(corolla_l(2, &[2, 1]).unwrap(), l_corolla(2));
    assert_eq!(corolla_n(2, 1, &[1, 2]).unwrap().degree(), -3);
    assert!(enumerate_spatial_rooted(0).is_err());
}

/// Shuffles spatial siblings at every vertex; returns the Koszul sign of the
/// shuffle on subtree degrees.
fn scramble(t: &Tree, rng: &mut ChaCha8Rng) -> (i32, Tree) {
    let shuffle = |children: &[Tree], rng: &mut ChaCha8Rng| -> (i32, Vec<Tree>) {
        let mut sign = 1;
        let mut inner = Vec::new();
        for c in children {
            let (s, u) = scramble(c, rng);
            sign *= s;
            inner.push(u);
        }
        let mut perm: Vec<usize> = (0..inner.len()).collect();
        perm.shuffle(rng);
        let degrees: Vec<i64> = inner.iter().map(Tree::degree).collect();
        sign *= koszul_sign(&perm, &degrees).unwrap();
        (sign, perm.iter().map(|&k| inner[k].clone()).collect())
    };
    match t {
        Tree::L(c) => {
            let (s, c) = shuffle(c, rng);
            (s, Tree::L(c))
        }
        Tree::N { spatial, planar } => {
            let (s1, spatial) = shuffle(spatial, rng);
            let mut sign = s1;
            let mut p = Vec::new();
            for c in planar {
                let (s, u) = scramble(c, rng);
                sign *= s;
                p.push(u);
            }
            (sign, Tree::N { spatial, planar: p })
        }
        leaf => (1, leaf.clone()),
    }
}

fn small_trees() -> Vec<Tree> {
    let mut out = Vec::new();
    for (p, q) in [(2, 0), (2, 1), (3, 0), (1, 3), (2, 2), (3, 1)] {
        out.extend(enumerate_planar_rooted(p, q, None).unwrap());
    }
    for n in 2..=5 {
        out.extend(enumerate_spatial_rooted(n).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonicalization_is_idempotent_and_sign_sound(index in 0usize..10_000, seed in any::<u64>()) {
        let trees = small_trees();
        let t = &trees[index % trees.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, raw) = scramble(t, &mut rng);
        let (c, canon) = raw.canonicalize();
        prop_assert_eq!(&canon, t);
        prop_assert_eq!(c * s, 1);
        prop_assert_eq!(canon.canonicalize(), (1, canon.clone()));
        // Two scrambles of the same tree canonicalize together.
        let (s2, raw2) = scramble(t, &mut rng);
        let (c2, canon2) = raw2.canonicalize();
        prop_assert_eq!(canon2, canon);
        prop_assert_eq!(c * s, c2 * s2);
    }

    #[test]
    fn relabelling_permutes_the_enumeration(sig in 0usize..5, seed in any::<u64>()) {
        let (p, q) = [(2, 0), (2, 1), (3, 0), (3, 1), (2, 2)][sig];
        let listed = enumerate_planar_rooted(p, q, None).unwrap();
        let all: BTreeSet<Tree> = listed.iter().cloned().collect();
        let mut perm: Vec<u32> = (1..=p as u32).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let image: BTreeSet<Tree> = listed.iter().map(|t| t.relabel(&|k| perm[k as usize - 1]).canonicalize().1).collect();
        prop_assert_eq!(image, all);
    }

    #[test]
    fn json_round_trips_with_sign(index in 0usize..10_000, seed in any::<u64>()) {
        let trees = small_trees();
        let t = &trees[index % trees.len()];
        let (s, raw) = scramble(t, &mut ChaCha8Rng::seed_from_u64(seed));
        let (back_sign, back) = Tree::from_json(&raw.to_json()).unwrap();
        prop_assert_eq!(&back, t);
        prop_assert_eq!(back_sign * s, 1);
        prop_assert_eq!(Tree::from_json(&t.to_json()).unwrap(), (1, t.clone()));
    }

    #[test]
    fn random_planar_signatures_enumerate_without_duplicates(p in 0usize..3, q in 0usize..4) {
        prop_assume!(2 * p + q >= 2);
        let listed = enumerate_planar_rooted(p, q, None).unwrap();
        let set: BTreeSet<Tree> = listed.iter().cloned().collect();
        prop_assert_eq!(set.len(), listed.len());
        let capped = enumerate_planar_rooted(p, q, Some(1)).unwrap();
        prop_assert!(capped.iter().all(|t| t.internal_edges() <= 1));
        let mut rng = ChaCha8Rng::seed_from_u64((p * 10 + q) as u64);
        let t = &listed[rng.gen_range(0..listed.len())];
        prop_assert!(t.is_canonical());
    }
}

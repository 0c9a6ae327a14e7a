//! The comparison map `μ` from the tree operad onto its cohomology, cocycle
//! bases for the planar complexes, and class-level checks of the relations
//! among `l_2`, `n_{1,0}`, `n_{0,2}`.
//!
//! Classes are cocycle representatives; two representatives agree when their
//! difference is a coboundary in the tree complex of the same arity.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde_json::{json, Value};

use crate::differential::{d_sum, d_tree};
use crate::error::{ForgeError, Result};
use crate::homology::ChainComplex;
use num_traits::One;

use crate::signed::{all_permutations, graft_spatial, graft_spatial_sum, koszul, rat, ratio, Coef, FormalSum};
use crate::tree::{enumerate_planar_rooted, enumerate_spatial_rooted, l_corolla, Node, Tree, VertexTable};

/// One term of an image: coefficient, tree with vertex ids, and the listing
/// of those ids that the coefficient refers to.
type Term = (Coef, Node, Vec<usize>);

fn combine(parts: Vec<Vec<Term>>) -> Vec<(Coef, Vec<Node>, Vec<usize>)> {
    let mut out = vec![(Coef::one(), Vec::new(), Vec::new())];
    for part in parts {
        let mut next = Vec::new();
        for (c, nodes, order) in &out {
            for (c2, n2, o2) in &part {
                let mut nodes = nodes.clone();
                nodes.push(n2.clone());
                let mut order = order.clone();
                order.extend(o2);
                next.push((c * c2, nodes, order));
            }
        }
        out = next;
    }
    out
}

/// Image of the subtree at `node`. The source subtree is read with its
/// vertices in pre-order; each term lists its own vertices in an order whose
/// sign is absorbed into the coefficient.
fn image(node: &Node, table: &mut VertexTable, mode: MuMode, at_root: bool) -> Vec<Term> {
    match node {
        Node::Spatial(k) => vec![(Coef::one(), Node::Spatial(*k), Vec::new())],
        Node::Planar => vec![(Coef::one(), Node::Planar, Vec::new())],
        Node::L(_, c) if c.len() == 2 => {
            let id = table.fresh(-1);
            let parts = c.iter().map(|x| image(x, table, mode, false)).collect();
            combine(parts)
                .into_iter()
                .map(|(coef, nodes, order)| {
                    let mut o = vec![id];
                    o.extend(order);
                    (coef, Node::L(id, nodes), o)
                })
                .collect()
        }
        Node::N(_, s, p) => match (s.len(), p.len()) {
            (1, 0) | (0, 2) => {
                let id = table.fresh(0);
                let parts: Vec<Vec<Term>> = s.iter().chain(p).map(|x| image(x, table, mode, false)).collect();
                let ns = s.len();
                combine(parts)
                    .into_iter()
                    .map(|(coef, mut nodes, order)| {
                        let planar = nodes.split_off(ns);
                        let mut o = vec![id];
                        o.extend(order);
                        (coef, Node::N(id, nodes, planar), o)
                    })
                    .collect()
            }
            (1, 1) => {
                let admissible = match mode {
                    MuMode::Derivation => true,
                    MuMode::Block => matches!(&p[0], Node::N(_, a, b) if a.len() == 1 && b.is_empty()),
                    MuMode::RootBlock => at_root && matches!(&p[0], Node::N(_, a, b) if a.len() == 1 && b.is_empty()),
                };
                if !admissible {
                    return Vec::new();
                }
                let bracket = table.fresh(-1);
                let spatial = image(&s[0], table, mode, false);
                let planar = image(&p[0], table, mode, false);
                let mut out = Vec::new();
                for (cs, ns, os) in &spatial {
                    for (cp, np, op) in &planar {
                        for (c, n, o) in act(bracket, ns, os, np, op, table) {
                            out.push((cs * cp * c, n, o));
                        }
                    }
                }
                out
            }
            _ => Vec::new(),
        },
        Node::L(..) => Vec::new(),
    }
}

/// `n_{1,1}(x; Y) ↦ Σ_w -1/2 Y[w := n_{1,0}(l_2(x, Z_w))]` over the
/// `n_{1,0}` vertices `w = n_{1,0}(Z_w)` of the image `Y`. The source lists
/// `[n_{1,1}, x.., Y..]`; each term lists `[.., w, l_2, x.., Z_w.., ..]`.
fn act(bracket: usize, x: &Node, x_order: &[usize], y: &Node, y_order: &[usize], table: &VertexTable) -> Vec<Term> {
    fn rewrite(n: &Node, target: usize, bracket: usize, x: &Node) -> Node {
        match n {
            Node::N(id, s, p) if *id == target => {
                Node::N(*id, vec![Node::L(bracket, vec![x.clone(), s[0].clone()])], p.clone())
            }
            Node::N(id, s, p) => Node::N(
                *id,
                s.iter().map(|c| rewrite(c, target, bracket, x)).collect(),
                p.iter().map(|c| rewrite(c, target, bracket, x)).collect(),
            ),
            Node::L(id, c) => Node::L(*id, c.iter().map(|c| rewrite(c, target, bracket, x)).collect()),
            leaf => leaf.clone(),
        }
    }
    fn capped(n: &Node, out: &mut Vec<usize>) {
        match n {
            Node::N(id, s, p) => {
                if s.len() == 1 && p.is_empty() {
                    out.push(*id);
                }
                s.iter().chain(p).for_each(|c| capped(c, out));
            }
            Node::L(_, c) => c.iter().for_each(|c| capped(c, out)),
            _ => {}
        }
    }
    let mut targets = Vec::new();
    capped(y, &mut targets);
    let mut source = vec![bracket];
    source.extend(x_order);
    source.extend(y_order);
    let degrees: Vec<i64> = source.iter().map(|&id| table.degrees[id]).collect();
    let position = |id: usize| source.iter().position(|&v| v == id).expect("listed");
    let mut out = Vec::new();
    for w in targets {
        let at = y_order.iter().position(|&v| v == w).expect("listed") + 1;
        let mut order = y_order[..at].to_vec();
        order.push(bracket);
        order.extend(x_order);
        order.extend(&y_order[at..]);
        let perm: Vec<usize> = order.iter().map(|&id| position(id)).collect();
        let sign = koszul(&perm, &degrees);
        out.push((ratio(-sign as i64, 2), rewrite(y, w, bracket, x), order));
    }
    out
}

/// Which trees `μ` sees beyond the `OC` trees themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuMode {
    /// `n_{1,1}(x; n_{1,0}(y))` only at the root, with bracket trees grafted
    /// at the leaves: the module generated by `OC` and that tree.
    RootBlock,
    /// The same block anywhere in a tree of `OC` generators.
    Block,
    /// `n_{1,1}(x; -)` acting on any `OC` tree below it as a derivation
    /// that sends `n_{1,0}(z)` to `-1/2 n_{1,0}(l_2(x, z))`. Closest to a
    /// chain map, but `n_{2,1}(x, y; n_{1,0}(z))` still fails: the `n_{2,0}`
    /// case forces the coefficient `-1/2`, this one needs `±1`.
    Derivation,
}

/// `μ` on one canonical tree.
pub fn mu_tree_with(t: &Tree, mode: MuMode) -> FormalSum {
    let node = Node::tag(t, &mut VertexTable::default());
    let mut table = VertexTable::default();
    let mut out = FormalSum::zero();
    for (coef, img, order) in image(&node, &mut table, mode, true) {
        let (s, canon) = img.resolve(&order, &table);
        out.add_term(canon, coef * rat(s as i64));
    }
    out
}

/// `μ` on the module generated by `OC` and `n_{1,1}(x; n_{1,0}(y))`, zero
/// elsewhere.
pub fn mu_tree(t: &Tree) -> FormalSum {
    mu_tree_with(t, MuMode::RootBlock)
}

pub fn mu_with(x: &FormalSum, mode: MuMode) -> FormalSum {
    x.map_linear(|t| mu_tree_with(t, mode))
}

pub fn mu(x: &FormalSum) -> FormalSum {
    mu_with(x, MuMode::RootBlock)
}

/// Trees built only from `l_2`, `n_{1,0}` and `n_{0,2}`.
pub fn is_oc_tree(t: &Tree) -> bool {
    match t {
        Tree::Spatial(_) | Tree::Planar => true,
        Tree::L(c) => c.len() == 2 && c.iter().all(is_oc_tree),
        Tree::N { spatial, planar } => {
            matches!((spatial.len(), planar.len()), (1, 0) | (0, 2)) && t.children().all(is_oc_tree)
        }
    }
}

/// Trees on which `μ` is nonzero: `OC` trees, and `n_{1,1}(x; n_{1,0}(y))`
/// with `l_2`-trees grafted at its leaves.
pub fn in_submodule(t: &Tree) -> bool {
    !mu_tree(t).is_zero()
}

fn left_normed(block: &[u32]) -> Tree {
    let mut t = Tree::Spatial(block[0]);
    for &k in &block[1..] {
        t = Tree::L(vec![t, Tree::Spatial(k)]);
    }
    t
}

fn left_comb(items: Vec<Tree>) -> Tree {
    let mut it = items.into_iter();
    let mut t = it.next().expect("nonempty");
    for x in it {
        t = Tree::N { spatial: Vec::new(), planar: vec![t, x] };
    }
    t
}

fn set_partitions(items: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let Some((&first, rest)) = items.split_first() else { return vec![Vec::new()] };
    let mut out = Vec::new();
    for part in set_partitions(rest) {
        let mut with_new = vec![vec![first]];
        with_new.extend(part.iter().cloned());
        out.push(with_new);
        for k in 0..part.len() {
            let mut p = part.clone();
            p[k].insert(0, first);
            out.push(p);
        }
    }
    out
}

/// Cocycles in `N∞(p, q)` indexed by chain degree: every set partition of
/// the spatial labels, each block a left-normed bracket word starting at its
/// minimum (all orders of the rest), capped by `n_{1,0}`, and the blocks
/// followed by the `q` planar leaves multiplied along a left comb of
/// `n_{0,2}`.
#[derive(Clone, Debug)]
pub struct PhiBasis {
    pub p: usize,
    pub q: usize,
    pub classes: Vec<Vec<FormalSum>>,
}

pub fn phi_basis(p: usize, q: usize) -> Result<PhiBasis> {
    if 2 * p + q < 2 {
        return Err(ForgeError::InvalidSignature { p, q });
    }
    let labels: Vec<u32> = (1..=p as u32).collect();
    let top = 2 * p + q - 2;
    let mut classes = vec![Vec::new(); top + 1];
    for partition in set_partitions(&labels) {
        let mut blocks = partition;
        blocks.sort_by_key(|b| b[0]);
        let words: Vec<Vec<Tree>> = blocks
            .iter()
            .map(|b| {
                all_permutations(b.len() - 1)
                    .into_iter()
                    .map(|perm| {
                        let mut order = vec![b[0]];
                        order.extend(perm.iter().map(|&k| b[k + 1]));
                        Tree::N { spatial: vec![left_normed(&order)], planar: Vec::new() }
                    })
                    .collect()
            })
            .collect();
        let mut choices: Vec<Vec<Tree>> = vec![Vec::new()];
        for w in &words {
            choices = choices
                .into_iter()
                .flat_map(|c| {
                    w.iter().map(move |t| {
                        let mut c = c.clone();
                        c.push(t.clone());
                        c
                    })
                })
                .collect();
        }
        let m = p - blocks.len();
        for mut items in choices {
            items.extend(std::iter::repeat_n(Tree::Planar, q));
            classes[m].push(FormalSum::from_tree(&left_comb(items)));
        }
    }
    Ok(PhiBasis { p, q, classes })
}

impl PhiBasis {
    pub fn counts(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn all_cocycles(&self) -> bool {
        self.classes.iter().flatten().all(|x| d_sum(x).is_zero())
    }

    /// Every representative is a single tree of `OC` generators.
    pub fn oc_generated(&self) -> bool {
        self.classes.iter().flatten().all(|x| x.iter().all(|(t, _)| is_oc_tree(t)))
    }

    /// Rank of the classes in each degree modulo coboundaries.
    pub fn ranks(&self, complex: &ChainComplex) -> Result<Vec<usize>> {
        (0..self.classes.len()).map(|m| complex.rank_modulo_boundaries(&self.classes[m], m)).collect()
    }
}

/// Report shared by the checks below.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub bound: usize,
    pub checked: usize,
    pub literal: usize,
    pub class_level: usize,
    pub failures: Vec<Value>,
    pub witnesses: Vec<Value>,
}

impl CheckReport {
    fn new(check: &str, bound: usize) -> Self {
        Self {
            check: check.into(),
            bound,
            checked: 0,
            literal: 0,
            class_level: 0,
            failures: Vec::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "bound": self.bound,
            "checked": self.checked,
            "literal_zero": self.literal,
            "class_level_zero": self.class_level,
            "failures": self.failures,
            "witnesses": self.witnesses,
        })
    }

    /// Records whether `x` vanishes literally, vanishes as a class, or not.
    fn record(&mut self, label: Value, x: &FormalSum, complexes: &mut Complexes) -> Result<()> {
        self.checked += 1;
        if x.is_zero() {
            self.literal += 1;
            return Ok(());
        }
        match complexes.witness(x)? {
            Some(w) => {
                self.class_level += 1;
                self.witnesses.push(json!({ "case": label, "difference": x.to_json(), "witness": w.to_json() }));
            }
            None => self.failures.push(json!({ "case": label, "difference": x.to_json() })),
        }
        Ok(())
    }
}

/// Lazily built complexes keyed by arity.
#[derive(Default)]
pub struct Complexes {
    planar: HashMap<(usize, usize), ChainComplex>,
    spatial: HashMap<usize, ChainComplex>,
}

impl Complexes {
    pub fn planar(&mut self, p: usize, q: usize) -> Result<&ChainComplex> {
        if let Entry::Vacant(e) = self.planar.entry((p, q)) {
            e.insert(ChainComplex::planar(p, q)?);
        }
        Ok(&self.planar[&(p, q)])
    }

    pub fn spatial(&mut self, n: usize) -> Result<&ChainComplex> {
        if let Entry::Vacant(e) = self.spatial.entry(n) {
            e.insert(ChainComplex::spatial(n)?);
        }
        Ok(&self.spatial[&n])
    }

    /// A preimage of the homogeneous `x` under the differential, if any.
    pub fn witness(&mut self, x: &FormalSum) -> Result<Option<FormalSum>> {
        let Some((t, _)) = x.iter().next() else { return Ok(Some(FormalSum::zero())) };
        let degree = x.degree()?.unwrap_or(0);
        let m = usize::try_from(-degree).map_err(|_| ForgeError::InvalidStructure("positive tree degree".into()))?;
        let complex = match t {
            Tree::Spatial(_) | Tree::L(_) => self.spatial(t.spatial_leaf_count())?,
            _ => self.planar(t.spatial_leaf_count(), t.planar_leaf_count())?,
        };
        complex.is_coboundary(x, m)
    }
}

fn planar_signatures(bound: usize) -> Vec<(usize, usize)> {
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

/// `μ(dT)` is the zero class for every tree with `2p + q <= bound`, and for
/// every spatial-rooted tree with `2n <= bound`.
pub fn check_chain_map(bound: usize) -> Result<CheckReport> {
    check_chain_map_with(bound, MuMode::RootBlock)
}

pub fn check_chain_map_with(bound: usize, mode: MuMode) -> Result<CheckReport> {
    let mut report = CheckReport::new("chain_map", bound);
    let mut complexes = Complexes::default();
    for (p, q) in planar_signatures(bound) {
        for t in enumerate_planar_rooted(p, q, None)? {
            let y = mu_with(&d_tree(&t), mode);
            report.record(t.to_json(), &y, &mut complexes)?;
        }
    }
    for n in 2..=bound / 2 {
        for t in enumerate_spatial_rooted(n)? {
            let y = mu_with(&d_tree(&t), mode);
            report.record(t.to_json(), &y, &mut complexes)?;
        }
    }
    Ok(report)
}

/// Image of `l_n` in the Lie operad.
pub fn mu_bracket(n: usize) -> FormalSum {
    if n == 2 {
        FormalSum::from_tree(&l_corolla(2))
    } else {
        FormalSum::zero()
    }
}

/// `μ(T ∘_i l_n) = μ(T) ∘_i μ(l_n)` for planar-rooted `T`, `2 <= n <= 4`,
/// with the composite inside `2p + q <= bound`.
pub fn check_module_morphism(bound: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new("module_morphism", bound);
    let mut complexes = Complexes::default();
    for (p, q) in planar_signatures(bound) {
        for n in 2..=4usize {
            if p == 0 || 2 * (p + n - 1) + q > bound {
                continue;
            }
            for t in enumerate_planar_rooted(p, q, None)? {
                let mu_t = mu_tree(&t);
                for i in 1..=p as u32 {
                    let (s, composite) = graft_spatial(&t, i, &l_corolla(n))?;
                    let lhs = mu(&FormalSum::term(rat(s as i64), composite));
                    let rhs = graft_spatial_sum(&mu_t, i, &mu_bracket(n))?;
                    let label = json!({ "tree": t.to_json(), "leaf": i, "bracket_arity": n });
                    report.record(label, &(lhs - rhs), &mut complexes)?;
                }
            }
        }
    }
    Ok(report)
}

fn n10(x: Tree) -> Tree {
    Tree::N { spatial: vec![x], planar: Vec::new() }
}

fn n02(a: Tree, b: Tree) -> Tree {
    Tree::N { spatial: Vec::new(), planar: vec![a, b] }
}

fn l2(a: Tree, b: Tree) -> Tree {
    Tree::L(vec![a, b])
}

fn leaf(k: u32) -> Tree {
    Tree::Spatial(k)
}

fn raw(t: Tree) -> FormalSum {
    FormalSum::from_tree(&t)
}

/// Differences of `OC` words that vanish in cohomology, each with its
/// arity measure `2p + q` (or `2n` for spatial-rooted words).
pub fn oc_relations() -> Vec<(&'static str, usize, FormalSum)> {
    let centrality = raw(n02(n10(leaf(1)), Tree::Planar)) - raw(n02(Tree::Planar, n10(leaf(1))));
    let commutativity = raw(n02(n10(leaf(1)), n10(leaf(2)))) - raw(n02(n10(leaf(2)), n10(leaf(1))));
    let associativity = raw(n02(n02(Tree::Planar, Tree::Planar), Tree::Planar))
        - raw(n02(Tree::Planar, n02(Tree::Planar, Tree::Planar)));
    let jacobi = raw(l2(l2(leaf(1), leaf(2)), leaf(3)))
        + raw(l2(l2(leaf(2), leaf(3)), leaf(1)))
        + raw(l2(l2(leaf(3), leaf(1)), leaf(2)));
    let bracket_centrality = graft_spatial_sum(&centrality, 1, &mu_bracket(2)).expect("leaf 1 exists");
    let derivation = graft_spatial_sum(&commutativity, 2, &mu_bracket(2)).expect("leaf 2 exists");
    vec![
        ("centrality", 3, centrality),
        ("commutativity", 4, commutativity),
        ("associativity", 3, associativity),
        ("jacobi", 6, jacobi),
        ("bracket_centrality", 5, bracket_centrality),
        ("bracket_commutativity", 6, derivation),
    ]
}

/// Each relation within `bound` is a coboundary in its complex.
pub fn verify_oc_relations(bound: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new("oc_relations", bound);
    let mut complexes = Complexes::default();
    for (name, size, x) in oc_relations() {
        if size <= bound {
            report.record(json!(name), &x, &mut complexes)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::n_corolla;

    #[test]
    fn mu_on_generators() {
        let n02 = n_corolla(0, 2);
        assert_eq!(mu_tree(&n02), FormalSum::from_tree(&n02));
        assert!(mu_tree(&n_corolla(2, 1)).is_zero());
        let x = FormalSum::from_tree(&Tree::N { spatial: vec![leaf(1)], planar: vec![n10(leaf(2))] });
        let expected = raw(n10(l2(leaf(1), leaf(2)))).scale(&ratio(-1, 2));
        assert_eq!(mu(&x), expected);
    }

    #[test]
    fn mu_kills_d_of_n20_literally() {
        assert!(mu(&d_tree(&n_corolla(2, 0))).is_zero());
    }

    #[test]
    fn phi_counts_small() {
        let b = phi_basis(3, 0).unwrap();
        assert_eq!(b.counts(), vec![1, 3, 2, 0, 0]);
        assert!(b.all_cocycles());
    }
}

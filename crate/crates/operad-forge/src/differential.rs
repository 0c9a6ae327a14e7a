//! The degree-one differential: corolla expansions, extended to trees as a
//! left derivation over the vertex order and linearly to formal sums.

use crate::error::{ForgeError, Result};
use crate::signed::{combinations, rat, FormalSum};
use crate::tree::{l_corolla, l_degree, n_corolla, n_degree, Node, Tree, VertexTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorollaShape {
    L(usize),
    N(usize, usize),
}

impl CorollaShape {
    pub fn degree(self) -> i64 {
        match self {
            CorollaShape::L(n) => l_degree(n),
            CorollaShape::N(p, q) => n_degree(p, q),
        }
    }
}

/// One term of the expansion of a corolla into two vertices. `spatial` lists
/// the spatial inputs (0-based positions) taken by the inner vertex; for a
/// mixed inner vertex its planar inputs are `planar_start..planar_start+s`,
/// and its output occupies planar slot `planar_start` of the outer vertex.
/// A spatial inner vertex always feeds a spatial slot of the outer vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionTerm {
    pub outer: CorollaShape,
    pub inner: CorollaShape,
    pub spatial: Vec<usize>,
    pub planar_start: usize,
    pub sign: i32,
}

fn parity(k: usize) -> i32 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of the terms where an `l_p` feeds the spatial side of a corolla with
/// `m` planar inputs. Taking `+1` here is incompatible with d² = 0 together
/// with the mixed-sum sign below.
pub fn spatial_feed_sign(m: usize, p: usize) -> i32 {
    parity(m + p)
}

/// Sign of a mixed inner corolla with `s` planar inputs starting after the
/// `i`-th planar input of a corolla with `m` planar inputs.
pub fn planar_feed_sign(s: usize, i: usize, m: usize) -> i32 {
    parity(s + i + s * i + m * s)
}

pub fn expansion_terms(c: CorollaShape) -> Vec<ExpansionTerm> {
    let mut out = Vec::new();
    match c {
        CorollaShape::L(n) => {
            for k in 2..n {
                for subset in combinations(n, k) {
                    out.push(ExpansionTerm {
                        outer: CorollaShape::L(n - k + 1),
                        inner: CorollaShape::L(k),
                        spatial: subset,
                        planar_start: 0,
                        sign: 1,
                    });
                }
            }
        }
        CorollaShape::N(n, m) => {
            for p in 2..=n {
                for subset in combinations(n, p) {
                    out.push(ExpansionTerm {
                        outer: CorollaShape::N(n - p + 1, m),
                        inner: CorollaShape::L(p),
                        spatial: subset,
                        planar_start: 0,
                        sign: spatial_feed_sign(m, p),
                    });
                }
            }
            for r in 0..=n {
                for s in 0..=m {
                    if (r, s) == (0, 1) || (r, s) == (n, m) || 2 * r + s < 2 {
                        continue;
                    }
                    for i in 0..=m - s {
                        for subset in combinations(n, r) {
                            out.push(ExpansionTerm {
                                outer: CorollaShape::N(n - r, m - s + 1),
                                inner: CorollaShape::N(r, s),
                                spatial: subset,
                                planar_start: i,
                                sign: planar_feed_sign(s, i, m),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Rebuilds the vertex `id` (with the given children) as outer and inner
/// vertex according to `term`.
fn apply_term(term: &ExpansionTerm, spatial: &[Node], planar: &[Node], outer: usize, inner: usize) -> Node {
    let taken = |k: usize| term.spatial.contains(&k);
    let inner_spatial: Vec<Node> = term.spatial.iter().map(|&k| spatial[k].clone()).collect();
    let rest: Vec<Node> = (0..spatial.len()).filter(|&k| !taken(k)).map(|k| spatial[k].clone()).collect();
    match (term.outer, term.inner) {
        (CorollaShape::L(_), _) => {
            let mut c = vec![Node::L(inner, inner_spatial)];
            c.extend(rest);
            Node::L(outer, c)
        }
        (CorollaShape::N(..), CorollaShape::L(_)) => {
            let mut s = vec![Node::L(inner, inner_spatial)];
            s.extend(rest);
            Node::N(outer, s, planar.to_vec())
        }
        (CorollaShape::N(..), CorollaShape::N(_, sz)) => {
            let i = term.planar_start;
            let block = planar[i..i + sz].to_vec();
            let mut p = planar[..i].to_vec();
            p.push(Node::N(inner, inner_spatial, block));
            p.extend(planar[i + sz..].iter().cloned());
            Node::N(outer, rest, p)
        }
    }
}

fn find_mut(node: &mut Node, id: usize) -> Option<&mut Node> {
    let hit = matches!(node, Node::L(v, _) | Node::N(v, _, _) if *v == id);
    if hit {
        return Some(node);
    }
    match node {
        Node::L(_, c) => c.iter_mut().find_map(|x| find_mut(x, id)),
        Node::N(_, s, p) => s.iter_mut().chain(p.iter_mut()).find_map(|x| find_mut(x, id)),
        _ => None,
    }
}

/// The terms of `d(t)` as signed canonical trees, unmerged.
pub fn d_tree_terms(t: &Tree) -> Vec<(i32, Tree)> {
    let mut table = VertexTable::default();
    let root = Node::tag(t, &mut table);
    let mut order = Vec::new();
    root.preorder(&mut order);
    let mut out = Vec::new();
    let mut prefix_degree = 0i64;
    for (k, &id) in order.iter().enumerate() {
        let prefix_sign = parity(prefix_degree.rem_euclid(2) as usize);
        prefix_degree += table.degrees[id];
        let mut probe = root.clone();
        let (shape, spatial, planar) = match find_mut(&mut probe, id).expect("vertex present") {
            Node::L(_, c) => (CorollaShape::L(c.len()), c.clone(), Vec::new()),
            Node::N(_, s, p) => (CorollaShape::N(s.len(), p.len()), s.clone(), p.clone()),
            _ => unreachable!("vertex ids only tag vertices"),
        };
        for term in expansion_terms(shape) {
            let mut degrees = table.degrees.clone();
            let outer = degrees.len();
            let inner = outer + 1;
            degrees.push(term.outer.degree());
            degrees.push(term.inner.degree());
            let local = VertexTable { degrees };
            let mut new_order = Vec::with_capacity(order.len() + 1);
            new_order.extend_from_slice(&order[..k]);
            new_order.push(outer);
            new_order.push(inner);
            new_order.extend_from_slice(&order[k + 1..]);
            let mut tree = root.clone();
            *find_mut(&mut tree, id).expect("vertex present") = apply_term(&term, &spatial, &planar, outer, inner);
            let (s, canon) = tree.resolve(&new_order, &local);
            out.push((prefix_sign * term.sign * s, canon));
        }
    }
    out
}

pub fn d_tree(t: &Tree) -> FormalSum {
    let mut out = FormalSum::zero();
    for (s, u) in d_tree_terms(t) {
        out.add_term(u, rat(s as i64));
    }
    out
}

pub fn d_sum(x: &FormalSum) -> FormalSum {
    x.map_linear(d_tree)
}

pub fn d_corolla_spatial(n: usize) -> Result<FormalSum> {
    if n < 2 {
        return Err(ForgeError::InvalidArity(format!("l_{n} needs n >= 2")));
    }
    Ok(d_tree(&l_corolla(n)))
}

pub fn d_corolla_mixed(p: usize, q: usize) -> Result<FormalSum> {
    if 2 * p + q < 2 {
        return Err(ForgeError::InvalidSignature { p, q });
    }
    Ok(d_tree(&n_corolla(p, q)))
}

//! Koszul sign calculus, exact formal sums of trees, and the two grafting
//! compositions.
//!
//! Permutations are given in "placement" form: `perm[k]` is the index of the
//! element that ends up in position `k`, so `perm` sends `x_0 ⊗ … ⊗ x_{n-1}`
//! to `x_{perm[0]} ⊗ … ⊗ x_{perm[n-1]}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{ForgeError, Result};
use crate::tree::{Colour, Node, Tree, VertexTable};

pub type Coef = BigRational;

pub fn rat(n: i64) -> Coef {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Coef {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Koszul sign of placing `degrees` in the order `perm`; no length checks.
pub(crate) fn koszul(perm: &[usize], degrees: &[i64]) -> i32 {
    let mut odd = false;
    for a in 0..perm.len() {
        let da = degrees[perm[a]];
        if da % 2 == 0 {
            continue;
        }
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] && degrees[perm[b]] % 2 != 0 {
                odd = !odd;
            }
        }
    }
    if odd {
        -1
    } else {
        1
    }
}

fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &i in perm {
        if i >= perm.len() || seen[i] {
            return Err(ForgeError::InvalidArity(format!("{perm:?} is not a permutation")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// ε(σ) for graded elements of the given degrees.
pub fn koszul_sign(perm: &[usize], degrees: &[i64]) -> Result<i32> {
    if perm.len() != degrees.len() {
        return Err(ForgeError::LengthMismatch { expected: perm.len(), got: degrees.len() });
    }
    check_permutation(perm)?;
    Ok(koszul(perm, degrees))
}

pub fn permutation_sign(perm: &[usize]) -> i32 {
    let ones = vec![1i64; perm.len()];
    koszul(perm, &ones)
}

/// χ(σ) = sgn(σ)·ε(σ).
pub fn antisymmetric_sign(perm: &[usize], degrees: &[i64]) -> Result<i32> {
    Ok(permutation_sign(perm) * koszul_sign(perm, degrees)?)
}

/// Composition `σ∘τ` in placement form: first place by `τ`, then by `σ`.
pub fn compose(sigma: &[usize], tau: &[usize]) -> Vec<usize> {
    sigma.iter().map(|&k| tau[k]).collect()
}

pub fn permute<T: Clone>(perm: &[usize], items: &[T]) -> Vec<T> {
    perm.iter().map(|&i| items[i].clone()).collect()
}

/// (k,l)-unshuffles: placements increasing on the first `k` and the last `l`
/// positions, in lexicographic order of the first block.
pub fn unshuffles(k: usize, l: usize) -> Vec<Vec<usize>> {
    let n = k + l;
    combinations(n, k)
        .into_iter()
        .map(|first| {
            let mut perm = first.clone();
            perm.extend((0..n).filter(|i| !first.contains(i)));
            perm
        })
        .collect()
}

/// Increasing `k`-subsets of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FormalSum {
    terms: BTreeMap<Tree, Coef>,
}

impl FormalSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single tree, canonicalized; the canonicalization sign is absorbed.
    pub fn from_tree(t: &Tree) -> Self {
        let (s, t) = t.canonicalize();
        Self::term(rat(s as i64), t)
    }

    /// Coefficient times an already canonical tree.
    pub fn term(coef: Coef, tree: Tree) -> Self {
        let mut out = Self::zero();
        out.add_term(tree, coef);
        out
    }

    pub fn add_term(&mut self, tree: Tree, coef: Coef) {
        if coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(tree);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FormalSum, scale: &Coef) {
        for (t, c) in &other.terms {
            self.add_term(t.clone(), c * scale);
        }
    }

    pub fn scale(&self, c: &Coef) -> FormalSum {
        let mut out = FormalSum::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tree, &Coef)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, t: &Tree) -> Coef {
        self.terms.get(t).cloned().unwrap_or_else(Coef::zero)
    }

    /// Common tree degree of all terms; `None` for the zero sum.
    pub fn degree(&self) -> Result<Option<i64>> {
        let mut deg = None;
        for t in self.terms.keys() {
            let d = t.degree();
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return Err(ForgeError::MixedDegree(e, d)),
                _ => {}
            }
        }
        Ok(deg)
    }

    /// Linear extension of a signed tree-to-tree map.
    pub fn map_signed(&self, f: impl Fn(&Tree) -> (i32, Tree)) -> FormalSum {
        let mut out = FormalSum::zero();
        for (t, c) in &self.terms {
            let (s, u) = f(t);
            out.add_term(u, c * rat(s as i64));
        }
        out
    }

    /// Linear extension of a tree-to-sum map.
    pub fn map_linear(&self, f: impl Fn(&Tree) -> FormalSum) -> FormalSum {
        let mut out = FormalSum::zero();
        for (t, c) in &self.terms {
            out.add_scaled(&f(t), c);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(t, c)| json!({ "coef": format!("{}/{}", c.numer(), c.denom()), "tree": t.to_json() }))
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<FormalSum> {
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| ForgeError::Json("formal sum needs a \"terms\" array".into()))?;
        let mut out = FormalSum::zero();
        for term in terms {
            let coef =
                term.get("coef").ok_or_else(|| ForgeError::Json("term without coef".into())).and_then(parse_coef)?;
            let tree = term.get("tree").ok_or_else(|| ForgeError::Json("term without tree".into()))?;
            let (s, t) = Tree::from_json(tree)?;
            out.add_term(t, coef * rat(s as i64));
        }
        Ok(out)
    }
}

pub fn parse_coef(v: &Value) -> Result<Coef> {
    if let Some(i) = v.as_i64() {
        return Ok(rat(i));
    }
    let s =
        v.as_str().ok_or_else(|| ForgeError::Json(format!("coefficient {v} is neither a string nor an integer")))?;
    parse_coef_str(s)
}

pub fn parse_coef_str(s: &str) -> Result<Coef> {
    let bad = || ForgeError::Json(format!("bad rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            let a = c.abs();
            if i > 0 {
                write!(f, " ")?;
            }
            if a.is_one() {
                write!(f, "{sign}{t}")?;
            } else {
                write!(f, "{sign}{a}*{t}")?;
            }
        }
        Ok(())
    }
}

impl Add for &FormalSum {
    type Output = FormalSum;
    fn add(self, rhs: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out.add_scaled(rhs, &Coef::one());
        out
    }
}

impl Sub for &FormalSum {
    type Output = FormalSum;
    fn sub(self, rhs: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Coef::one());
        out
    }
}

impl Add for FormalSum {
    type Output = FormalSum;
    fn add(mut self, rhs: FormalSum) -> FormalSum {
        self.add_scaled(&rhs, &Coef::one());
        self
    }
}

impl Sub for FormalSum {
    type Output = FormalSum;
    fn sub(mut self, rhs: FormalSum) -> FormalSum {
        self.add_scaled(&rhs, &-Coef::one());
        self
    }
}

impl Neg for &FormalSum {
    type Output = FormalSum;
    fn neg(self) -> FormalSum {
        self.scale(&-Coef::one())
    }
}

impl Mul<&FormalSum> for &Coef {
    type Output = FormalSum;
    fn mul(self, rhs: &FormalSum) -> FormalSum {
        rhs.scale(self)
    }
}

impl AddAssign<&FormalSum> for FormalSum {
    fn add_assign(&mut self, rhs: &FormalSum) {
        self.add_scaled(rhs, &Coef::one());
    }
}

// ---------------------------------------------------------------------------
// Grafting. The composite of `T1` and `T2` lists the vertices of `T1` before
// those of `T2`; the returned sign moves that listing into canonical order.

fn replace_spatial_leaf(node: Node, label: u32, with: &mut Option<Node>) -> Node {
    match node {
        Node::Spatial(k) if k == label => with.take().expect("single substitution"),
        Node::L(id, c) => Node::L(id, c.into_iter().map(|x| replace_spatial_leaf(x, label, with)).collect()),
        Node::N(id, s, p) => Node::N(
            id,
            s.into_iter().map(|x| replace_spatial_leaf(x, label, with)).collect(),
            p.into_iter().map(|x| replace_spatial_leaf(x, label, with)).collect(),
        ),
        other => other,
    }
}

fn replace_planar_leaf(node: Node, target: usize, seen: &mut usize, with: &mut Option<Node>) -> Node {
    match node {
        Node::Planar => {
            *seen += 1;
            if *seen == target {
                with.take().expect("single substitution")
            } else {
                Node::Planar
            }
        }
        Node::L(id, c) => Node::L(id, c),
        Node::N(id, s, p) => {
            let p = p.into_iter().map(|x| replace_planar_leaf(x, target, seen, with)).collect();
            Node::N(id, s, p)
        }
        other => other,
    }
}

fn compose_tagged(t1: &Tree, t2: &Tree, substitute: impl FnOnce(Node, Node) -> Node) -> (i32, Tree) {
    let mut table = VertexTable::default();
    let n1 = Node::tag(t1, &mut table);
    let n2 = Node::tag(t2, &mut table);
    let order: Vec<usize> = (0..table.degrees.len()).collect();
    substitute(n1, n2).resolve(&order, &table)
}

/// `T1 ∘_i T2`: the root of the spatial-rooted `T2` replaces the spatial leaf
/// `i` of `T1`. Labels of `T2` take the slots `i..i+n2`, higher labels of `T1`
/// shift up.
pub fn graft_spatial(t1: &Tree, i: u32, t2: &Tree) -> Result<(i32, Tree)> {
    if t2.root_colour() != Colour::Spatial {
        return Err(ForgeError::ColourMismatch("∘_i needs a spatial-rooted tree".into()));
    }
    if !t1.labels().contains(&i) {
        return Err(ForgeError::MissingLeaf(i));
    }
    let n2 = t2.spatial_leaf_count() as u32;
    let t1 = t1.relabel(&|k| if k > i { k + n2 - 1 } else { k });
    let t2 = t2.relabel(&|k| k + i - 1);
    Ok(compose_tagged(&t1, &t2, |a, b| replace_spatial_leaf(a, i, &mut Some(b))))
}

/// `T1 •_i T2`: the root of the planar-rooted `T2` replaces the `i`-th planar
/// leaf of `T1` (1-based). Spatial labels of `T2` are appended after those of
/// `T1`.
pub fn graft_planar(t1: &Tree, i: usize, t2: &Tree) -> Result<(i32, Tree)> {
    if t2.root_colour() != Colour::Planar {
        return Err(ForgeError::ColourMismatch("•_i needs a planar-rooted tree".into()));
    }
    if i == 0 || i > t1.planar_leaf_count() {
        return Err(ForgeError::MissingPlanarLeaf(i));
    }
    let p1 = t1.spatial_leaf_count() as u32;
    let t2 = t2.relabel(&|k| k + p1);
    Ok(compose_tagged(t1, &t2, |a, b| replace_planar_leaf(a, i, &mut 0, &mut Some(b))))
}

/// Bilinear extension of [`graft_spatial`].
pub fn graft_spatial_sum(x: &FormalSum, i: u32, y: &FormalSum) -> Result<FormalSum> {
    let mut out = FormalSum::zero();
    for (a, ca) in x.iter() {
        for (b, cb) in y.iter() {
            let (s, t) = graft_spatial(a, i, b)?;
            out.add_term(t, ca * cb * rat(s as i64));
        }
    }
    Ok(out)
}

/// Bilinear extension of [`graft_planar`].
pub fn graft_planar_sum(x: &FormalSum, i: usize, y: &FormalSum) -> Result<FormalSum> {
    let mut out = FormalSum::zero();
    for (a, ca) in x.iter() {
        for (b, cb) in y.iter() {
            let (s, t) = graft_planar(a, i, b)?;
            out.add_term(t, ca * cb * rat(s as i64));
        }
    }
    Ok(out)
}

/// Relabels spatial leaves by `sigma` (label `k` becomes `sigma[k-1]`) and
/// re-canonicalizes. Leaves carry no degree, so only sibling reordering signs
/// appear.
pub fn relabel_action(sigma: &[u32], x: &FormalSum) -> Result<FormalSum> {
    let p = sigma.len();
    let mut sorted = sigma.to_vec();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &k)| k != i as u32 + 1) {
        return Err(ForgeError::InvalidArity(format!("{sigma:?} is not a permutation of 1..={p}")));
    }
    for (t, _) in x.iter() {
        if t.spatial_leaf_count() != p {
            return Err(ForgeError::LengthMismatch { expected: t.spatial_leaf_count(), got: p });
        }
    }
    Ok(x.map_signed(|t| t.relabel(&|k| sigma[k as usize - 1]).canonicalize()))
}

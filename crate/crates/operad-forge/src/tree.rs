//! Partially planar trees: canonical form, degrees, enumeration, serialization.
//!
//! A tree element carries an implicit ordering of its vertices: pre-order, with
//! the spatial children of a vertex visited (in canonical order) before its
//! planar children. Reordering vertices costs the Koszul sign of their degrees.

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{ForgeError, Result};
use crate::signed::koszul;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Colour {
    Spatial,
    Planar,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tree {
    /// Spatial leaf with its label (labels run over 1..=p).
    Spatial(u32),
    /// Planar leaf; its label is its left-to-right position.
    Planar,
    /// All-spatial vertex with at least two spatial children.
    L(Vec<Tree>),
    /// Mixed vertex: unordered spatial children, ordered planar children.
    N { spatial: Vec<Tree>, planar: Vec<Tree> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeSignature {
    pub p: usize,
    pub q: usize,
    pub root_colour: Colour,
    pub internal_edges: usize,
    pub degree: i64,
}

pub fn l_degree(n: usize) -> i64 {
    3 - 2 * n as i64
}

pub fn n_degree(p: usize, q: usize) -> i64 {
    2 - 2 * p as i64 - q as i64
}

pub fn corolla_l(n: usize, labels: &[u32]) -> Result<Tree> {
    if n < 2 {
        return Err(ForgeError::InvalidArity(format!("l_{n} needs n >= 2")));
    }
    if labels.len() != n {
        return Err(ForgeError::LengthMismatch { expected: n, got: labels.len() });
    }
    check_distinct(labels)?;
    let t = Tree::L(labels.iter().map(|&k| Tree::Spatial(k)).collect());
    Ok(t.canonicalize().1)
}

/// `(p, q) = (0, 1)` yields the bare planar edge.
pub fn corolla_n(p: usize, q: usize, labels: &[u32]) -> Result<Tree> {
    if 2 * p + q == 0 {
        return Err(ForgeError::InvalidSignature { p, q });
    }
    if labels.len() != p {
        return Err(ForgeError::LengthMismatch { expected: p, got: labels.len() });
    }
    check_distinct(labels)?;
    if (p, q) == (0, 1) {
        return Ok(Tree::Planar);
    }
    let t = Tree::N { spatial: labels.iter().map(|&k| Tree::Spatial(k)).collect(), planar: vec![Tree::Planar; q] };
    Ok(t.canonicalize().1)
}

/// Corolla with spatial labels `1..=p`.
pub fn n_corolla(p: usize, q: usize) -> Tree {
    let labels: Vec<u32> = (1..=p as u32).collect();
    corolla_n(p, q, &labels).expect("valid corolla")
}

pub fn l_corolla(n: usize) -> Tree {
    let labels: Vec<u32> = (1..=n as u32).collect();
    corolla_l(n, &labels).expect("valid corolla")
}

fn check_distinct(labels: &[u32]) -> Result<()> {
    let mut v = labels.to_vec();
    v.sort_unstable();
    if v.contains(&0) || v.windows(2).any(|w| w[0] == w[1]) {
        return Err(ForgeError::MalformedTree(format!("labels {labels:?} must be distinct and positive")));
    }
    Ok(())
}

fn canonical_order(a: &Tree, b: &Tree) -> std::cmp::Ordering {
    a.degree().cmp(&b.degree()).then_with(|| a.min_label().cmp(&b.min_label())).then_with(|| a.cmp(b))
}

impl Tree {
    pub fn root_colour(&self) -> Colour {
        match self {
            Tree::Spatial(_) | Tree::L(_) => Colour::Spatial,
            Tree::Planar | Tree::N { .. } => Colour::Planar,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Spatial(_) | Tree::Planar)
    }

    /// Degree of the root vertex alone; leaves have none.
    pub fn root_degree(&self) -> i64 {
        match self {
            Tree::Spatial(_) | Tree::Planar => 0,
            Tree::L(c) => l_degree(c.len()),
            Tree::N { spatial, planar } => n_degree(spatial.len(), planar.len()),
        }
    }

    pub fn children(&self) -> impl Iterator<Item = &Tree> {
        let (a, b): (&[Tree], &[Tree]) = match self {
            Tree::Spatial(_) | Tree::Planar => (&[], &[]),
            Tree::L(c) => (c, &[]),
            Tree::N { spatial, planar } => (spatial, planar),
        };
        a.iter().chain(b.iter())
    }

    pub fn degree(&self) -> i64 {
        self.root_degree() + self.children().map(Tree::degree).sum::<i64>()
    }

    pub fn vertex_count(&self) -> usize {
        let own = usize::from(!self.is_leaf());
        own + self.children().map(Tree::vertex_count).sum::<usize>()
    }

    pub fn internal_edges(&self) -> usize {
        self.vertex_count().saturating_sub(1)
    }

    pub fn spatial_leaf_count(&self) -> usize {
        match self {
            Tree::Spatial(_) => 1,
            _ => self.children().map(Tree::spatial_leaf_count).sum(),
        }
    }

    pub fn planar_leaf_count(&self) -> usize {
        match self {
            Tree::Planar => 1,
            _ => self.children().map(Tree::planar_leaf_count).sum(),
        }
    }

    pub fn min_label(&self) -> Option<u32> {
        match self {
            Tree::Spatial(k) => Some(*k),
            _ => self.children().filter_map(Tree::min_label).min(),
        }
    }

    /// Spatial labels in traversal order.
    pub fn labels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut Vec<u32>) {
        match self {
            Tree::Spatial(k) => out.push(*k),
            _ => self.children().for_each(|c| c.collect_labels(out)),
        }
    }

    /// The degree here is the arity formula `|i| + 2 - 2p - q` (planar root) or
    /// `|i| + 3 - 2n` (spatial root). It agrees with [`Tree::degree`] on every
    /// tree with a vertex; a bare edge gets 1 although it carries no vertex.
    pub fn signature(&self) -> TreeSignature {
        let p = self.spatial_leaf_count();
        let q = self.planar_leaf_count();
        let edges = self.internal_edges();
        let degree = match self.root_colour() {
            Colour::Planar => edges as i64 + 2 - 2 * p as i64 - q as i64,
            Colour::Spatial => edges as i64 + 3 - 2 * p as i64,
        };
        TreeSignature { p, q, root_colour: self.root_colour(), internal_edges: edges, degree }
    }

    /// Chain degree `m = -degree` used by the homology engine.
    pub fn chain_degree(&self) -> i64 {
        -self.degree()
    }

    /// Vertex degrees in the canonical vertex order.
    pub fn vertex_degrees(&self) -> Vec<i64> {
        let mut out = Vec::new();
        self.push_vertex_degrees(&mut out);
        out
    }

    fn push_vertex_degrees(&self, out: &mut Vec<i64>) {
        if !self.is_leaf() {
            out.push(self.root_degree());
        }
        self.children().for_each(|c| c.push_vertex_degrees(out));
    }

    /// Structural invariants, without the label condition.
    pub fn check_shape(&self) -> Result<()> {
        match self {
            Tree::Spatial(k) if *k == 0 => Err(ForgeError::MalformedTree("label 0".into())),
            Tree::Spatial(_) | Tree::Planar => Ok(()),
            Tree::L(c) => {
                if c.len() < 2 {
                    return Err(ForgeError::MalformedTree("L-vertex with fewer than two children".into()));
                }
                for ch in c {
                    if ch.root_colour() != Colour::Spatial {
                        return Err(ForgeError::ColourMismatch("planar subtree below an L-vertex".into()));
                    }
                    ch.check_shape()?;
                }
                Ok(())
            }
            Tree::N { spatial, planar } => {
                if 2 * spatial.len() + planar.len() < 2 {
                    return Err(ForgeError::MalformedTree("N-vertex with 2s + t < 2".into()));
                }
                for ch in spatial {
                    if ch.root_colour() != Colour::Spatial {
                        return Err(ForgeError::ColourMismatch("planar subtree in a spatial slot".into()));
                    }
                    ch.check_shape()?;
                }
                for ch in planar {
                    if ch.root_colour() != Colour::Planar {
                        return Err(ForgeError::ColourMismatch("spatial subtree in a planar slot".into()));
                    }
                    ch.check_shape()?;
                }
                Ok(())
            }
        }
    }

    /// Shape invariants plus spatial labels exactly `1..=p`.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        let mut labels = self.labels();
        labels.sort_unstable();
        for (i, &k) in labels.iter().enumerate() {
            if k != i as u32 + 1 {
                return Err(ForgeError::MalformedTree(format!("spatial labels {labels:?} are not 1..=p")));
            }
        }
        Ok(())
    }

    /// Sorts spatial children everywhere; returns the Koszul sign of the
    /// induced vertex reordering.
    pub fn canonicalize(&self) -> (i32, Tree) {
        match self {
            Tree::Spatial(_) | Tree::Planar => (1, self.clone()),
            Tree::L(c) => {
                let (sign, c) = canonical_siblings(c);
                (sign, Tree::L(c))
            }
            Tree::N { spatial, planar } => {
                let (mut sign, spatial) = canonical_siblings(spatial);
                let planar = planar
                    .iter()
                    .map(|t| {
                        let (s, t) = t.canonicalize();
                        sign *= s;
                        t
                    })
                    .collect();
                (sign, Tree::N { spatial, planar })
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        let (s, t) = self.canonicalize();
        s == 1 && &t == self
    }

    /// Applies `f` to every spatial label; no canonicalization.
    pub fn relabel(&self, f: &dyn Fn(u32) -> u32) -> Tree {
        match self {
            Tree::Spatial(k) => Tree::Spatial(f(*k)),
            Tree::Planar => Tree::Planar,
            Tree::L(c) => Tree::L(c.iter().map(|t| t.relabel(f)).collect()),
            Tree::N { spatial, planar } => Tree::N {
                spatial: spatial.iter().map(|t| t.relabel(f)).collect(),
                planar: planar.iter().map(|t| t.relabel(f)).collect(),
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let mut pos = 0usize;
        self.json_inner(&mut pos)
    }

    fn json_inner(&self, pos: &mut usize) -> Value {
        match self {
            Tree::Spatial(k) => json!({ "sleaf": k }),
            Tree::Planar => {
                *pos += 1;
                json!({ "pleaf": *pos })
            }
            Tree::L(c) => json!({ "l": c.iter().map(|t| t.json_inner(pos)).collect::<Vec<_>>() }),
            Tree::N { spatial, planar } => {
                let s: Vec<Value> = spatial.iter().map(|t| t.json_inner(pos)).collect();
                let p: Vec<Value> = planar.iter().map(|t| t.json_inner(pos)).collect();
                json!({ "n": { "s": s, "p": p } })
            }
        }
    }

    /// Parses the JSON form; a non-canonical input returns the sign that
    /// relates it to the canonical tree.
    pub fn from_json(v: &Value) -> Result<(i32, Tree)> {
        let mut pos = 0usize;
        let raw = parse_json(v, &mut pos)?;
        raw.check_shape()?;
        Ok(raw.canonicalize())
    }

    /// Graphviz rendering: spatial edges dashed, planar edges solid.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=BT;\n  root [shape=point];\n");
        let mut counter = 0usize;
        let mut pos = 0usize;
        let top = self.dot_inner(&mut out, &mut counter, &mut pos);
        out.push_str(&format!("  {top} -> root [style={}];\n", edge_style(self.root_colour())));
        out.push_str("}\n");
        out
    }

    fn dot_inner(&self, out: &mut String, counter: &mut usize, pos: &mut usize) -> String {
        let id = format!("v{}", *counter);
        *counter += 1;
        let label = match self {
            Tree::Spatial(k) => format!("{k}"),
            Tree::Planar => {
                *pos += 1;
                format!("a{}", *pos)
            }
            Tree::L(c) => format!("l_{}", c.len()),
            Tree::N { spatial, planar } => format!("n_{{{},{}}}", spatial.len(), planar.len()),
        };
        let shape = if self.is_leaf() { "plaintext" } else { "circle" };
        out.push_str(&format!("  {id} [label=\"{label}\", shape={shape}];\n"));
        for c in self.children() {
            let cid = c.dot_inner(out, counter, pos);
            out.push_str(&format!("  {cid} -> {id} [style={}];\n", edge_style(c.root_colour())));
        }
        id
    }
}

fn edge_style(c: Colour) -> &'static str {
    match c {
        Colour::Spatial => "dashed",
        Colour::Planar => "solid",
    }
}

fn canonical_siblings(children: &[Tree]) -> (i32, Vec<Tree>) {
    let mut sign = 1;
    let canon: Vec<Tree> = children
        .iter()
        .map(|t| {
            let (s, t) = t.canonicalize();
            sign *= s;
            t
        })
        .collect();
    let mut idx: Vec<usize> = (0..canon.len()).collect();
    idx.sort_by(|&a, &b| canonical_order(&canon[a], &canon[b]));
    let degrees: Vec<i64> = canon.iter().map(Tree::degree).collect();
    sign *= koszul(&idx, &degrees);
    let sorted = idx.iter().map(|&i| canon[i].clone()).collect();
    (sign, sorted)
}

fn parse_json(v: &Value, pos: &mut usize) -> Result<Tree> {
    let obj = v.as_object().ok_or_else(|| ForgeError::Json("tree node must be an object".into()))?;
    if obj.len() != 1 {
        return Err(ForgeError::Json("tree node must have exactly one key".into()));
    }
    let (key, body) = obj.iter().next().expect("one key");
    match key.as_str() {
        "sleaf" => {
            let k = body
                .as_u64()
                .filter(|&k| k >= 1 && k <= u32::MAX as u64)
                .ok_or_else(|| ForgeError::Json("sleaf label must be a positive integer".into()))?;
            Ok(Tree::Spatial(k as u32))
        }
        "pleaf" => {
            *pos += 1;
            let k = body.as_u64().ok_or_else(|| ForgeError::Json("pleaf position must be an integer".into()))?;
            if k as usize != *pos {
                return Err(ForgeError::Json(format!("pleaf position {k} where {} was expected", *pos)));
            }
            Ok(Tree::Planar)
        }
        "l" => {
            let arr = body.as_array().ok_or_else(|| ForgeError::Json("l expects an array".into()))?;
            let c = arr.iter().map(|x| parse_json(x, pos)).collect::<Result<Vec<_>>>()?;
            Ok(Tree::L(c))
        }
        "n" => {
            let inner = body.as_object().ok_or_else(|| ForgeError::Json("n expects an object".into()))?;
            let list = |k: &str, pos: &mut usize| -> Result<Vec<Tree>> {
                match inner.get(k) {
                    None => Ok(Vec::new()),
                    Some(Value::Array(a)) => a.iter().map(|x| parse_json(x, pos)).collect(),
                    Some(_) => Err(ForgeError::Json(format!("n.{k} must be an array"))),
                }
            };
            let spatial = list("s", pos)?;
            let planar = list("p", pos)?;
            Ok(Tree::N { spatial, planar })
        }
        other => Err(ForgeError::Json(format!("unknown tree key {other:?}"))),
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Spatial(k) => write!(f, "{k}"),
            Tree::Planar => write!(f, "_"),
            Tree::L(c) => {
                write!(f, "l{}(", c.len())?;
                for (i, t) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Tree::N { spatial, planar } => {
                write!(f, "n{}{}(", spatial.len(), planar.len())?;
                for (i, t) in spatial.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ";")?;
                for (i, t) in planar.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Vertex-tagged trees. Used wherever an operation produces vertices in an
// order other than the canonical one.

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Spatial(u32),
    Planar,
    L(usize, Vec<Node>),
    N(usize, Vec<Node>, Vec<Node>),
}

/// Vertex degrees indexed by vertex id.
#[derive(Default, Debug)]
pub(crate) struct VertexTable {
    pub degrees: Vec<i64>,
}

impl VertexTable {
    pub fn fresh(&mut self, degree: i64) -> usize {
        self.degrees.push(degree);
        self.degrees.len() - 1
    }
}

impl Node {
    /// Tags every vertex of `t` with a fresh id, in canonical vertex order.
    pub fn tag(t: &Tree, table: &mut VertexTable) -> Node {
        match t {
            Tree::Spatial(k) => Node::Spatial(*k),
            Tree::Planar => Node::Planar,
            Tree::L(c) => {
                let id = table.fresh(t.root_degree());
                Node::L(id, c.iter().map(|x| Node::tag(x, table)).collect())
            }
            Tree::N { spatial, planar } => {
                let id = table.fresh(t.root_degree());
                let s = spatial.iter().map(|x| Node::tag(x, table)).collect();
                let p = planar.iter().map(|x| Node::tag(x, table)).collect();
                Node::N(id, s, p)
            }
        }
    }

    pub fn strip(&self) -> Tree {
        match self {
            Node::Spatial(k) => Tree::Spatial(*k),
            Node::Planar => Tree::Planar,
            Node::L(_, c) => Tree::L(c.iter().map(Node::strip).collect()),
            Node::N(_, s, p) => {
                Tree::N { spatial: s.iter().map(Node::strip).collect(), planar: p.iter().map(Node::strip).collect() }
            }
        }
    }

    pub fn preorder(&self, out: &mut Vec<usize>) {
        match self {
            Node::Spatial(_) | Node::Planar => {}
            Node::L(id, c) => {
                out.push(*id);
                c.iter().for_each(|x| x.preorder(out));
            }
            Node::N(id, s, p) => {
                out.push(*id);
                s.iter().chain(p.iter()).for_each(|x| x.preorder(out));
            }
        }
    }

    fn sorted(self) -> Node {
        fn sort_siblings(c: Vec<Node>) -> Vec<Node> {
            let mut keyed: Vec<(Tree, Node)> = c
                .into_iter()
                .map(|n| {
                    let n = n.sorted();
                    (n.strip(), n)
                })
                .collect();
            keyed.sort_by(|a, b| canonical_order(&a.0, &b.0));
            keyed.into_iter().map(|(_, n)| n).collect()
        }
        match self {
            Node::L(id, c) => Node::L(id, sort_siblings(c)),
            Node::N(id, s, p) => Node::N(id, sort_siblings(s), p.into_iter().map(Node::sorted).collect()),
            leaf => leaf,
        }
    }

    /// Canonical tree together with the sign relating the vertex order `order`
    /// (a listing of every vertex id of `self`) to the canonical vertex order.
    pub fn resolve(self, order: &[usize], table: &VertexTable) -> (i32, Tree) {
        let sorted = self.sorted();
        let mut target = Vec::with_capacity(order.len());
        sorted.preorder(&mut target);
        debug_assert_eq!(target.len(), order.len());
        let mut position = vec![usize::MAX; table.degrees.len()];
        for (i, &id) in order.iter().enumerate() {
            position[id] = i;
        }
        let perm: Vec<usize> = target.iter().map(|&id| position[id]).collect();
        let degrees: Vec<i64> = order.iter().map(|&id| table.degrees[id]).collect();
        (koszul(&perm, &degrees), sorted.strip())
    }
}

// ---------------------------------------------------------------------------
// Enumeration.

/// All subsets of `mask`, including the empty set and `mask` itself.
fn subsets(mask: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut sub = mask;
    loop {
        out.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
    out
}

fn set_partitions(mask: u32) -> Vec<Vec<u32>> {
    if mask == 0 {
        return vec![Vec::new()];
    }
    let low = mask & mask.wrapping_neg();
    let rest = mask ^ low;
    let mut out = Vec::new();
    for sub in subsets(rest) {
        for mut part in set_partitions(rest ^ sub) {
            part.insert(0, low | sub);
            out.push(part);
        }
    }
    out
}

fn cartesian(choices: &[&[Tree]]) -> Vec<Vec<Tree>> {
    let mut acc: Vec<Vec<Tree>> = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for prefix in &acc {
            for o in opts.iter() {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

#[derive(Default)]
struct Enumerator {
    spatial: HashMap<u32, Vec<Tree>>,
    mixed: HashMap<(u32, usize), Vec<Tree>>,
    sequences: HashMap<(u32, usize), Vec<Vec<Tree>>>,
    long: HashMap<(u32, usize), Vec<Vec<Tree>>>,
}

impl Enumerator {
    fn spatial_trees(&mut self, mask: u32) -> Vec<Tree> {
        if let Some(v) = self.spatial.get(&mask) {
            return v.clone();
        }
        let out = if mask.count_ones() == 1 {
            vec![Tree::Spatial(mask.trailing_zeros() + 1)]
        } else {
            let mut out = Vec::new();
            for part in set_partitions(mask) {
                if part.len() < 2 {
                    continue;
                }
                out.extend(self.forests(&part).into_iter().map(|c| Tree::L(c).canonicalize().1));
            }
            out
        };
        self.spatial.insert(mask, out.clone());
        out
    }

    /// Every way of putting a spatial tree on each block.
    fn forests(&mut self, blocks: &[u32]) -> Vec<Vec<Tree>> {
        let options: Vec<Vec<Tree>> = blocks.iter().map(|&b| self.spatial_trees(b)).collect();
        let refs: Vec<&[Tree]> = options.iter().map(Vec::as_slice).collect();
        cartesian(&refs)
    }

    fn mixed_trees(&mut self, mask: u32, q: usize) -> Vec<Tree> {
        if 2 * mask.count_ones() as usize + q < 2 {
            return Vec::new();
        }
        if let Some(v) = self.mixed.get(&(mask, q)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for root in subsets(mask) {
            let rest = mask ^ root;
            let seqs = if root == 0 { self.long_sequences(rest, q) } else { self.sequences(rest, q) };
            if seqs.is_empty() {
                continue;
            }
            for part in set_partitions(root) {
                let a = part.len();
                for spatial in self.forests(&part) {
                    for planar in &seqs {
                        if 2 * a + planar.len() >= 2 {
                            let t = Tree::N { spatial: spatial.clone(), planar: planar.clone() };
                            out.push(t.canonicalize().1);
                        }
                    }
                }
            }
        }
        self.mixed.insert((mask, q), out.clone());
        out
    }

    /// Ordered sequences of planar children using exactly `mask` and `q`.
    fn sequences(&mut self, mask: u32, q: usize) -> Vec<Vec<Tree>> {
        if mask == 0 && q == 0 {
            return vec![Vec::new()];
        }
        if let Some(v) = self.sequences.get(&(mask, q)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if (mask, q) == (0, 1) {
            out.push(vec![Tree::Planar]);
        }
        out.extend(self.mixed_trees(mask, q).into_iter().map(|t| vec![t]));
        out.extend(self.long_sequences(mask, q));
        self.sequences.insert((mask, q), out.clone());
        out
    }

    /// Sequences of length at least two; these never recurse into `(mask, q)`.
    fn long_sequences(&mut self, mask: u32, q: usize) -> Vec<Vec<Tree>> {
        if let Some(v) = self.long.get(&(mask, q)) {
            return v.clone();
        }
        let mut heads: Vec<(Tree, u32, usize)> = Vec::new();
        if q >= 1 {
            heads.push((Tree::Planar, 0, 1));
        }
        for first in subsets(mask) {
            for q1 in 0..=q {
                if (first, q1) == (mask, q) {
                    continue;
                }
                for h in self.mixed_trees(first, q1) {
                    heads.push((h, first, q1));
                }
            }
        }
        let mut out = Vec::new();
        for (h, first, q1) in heads {
            let rest = mask ^ first;
            if rest == 0 && q == q1 {
                continue;
            }
            for tail in self.sequences(rest, q - q1) {
                let mut v = Vec::with_capacity(tail.len() + 1);
                v.push(h.clone());
                v.extend(tail);
                out.push(v);
            }
        }
        self.long.insert((mask, q), out.clone());
        out
    }
}

fn sort_by_codim(mut v: Vec<Tree>) -> Vec<Tree> {
    let mut keyed: Vec<(usize, Tree)> = v.drain(..).map(|t| (t.internal_edges(), t)).collect();
    keyed.sort();
    keyed.dedup();
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// All canonical trees with planar root on `p` spatial and `q` planar leaves,
/// with at most `max_codim` internal edges (default: all of them).
pub fn enumerate_planar_rooted(p: usize, q: usize, max_codim: Option<usize>) -> Result<Vec<Tree>> {
    if 2 * p + q < 2 || p > 16 {
        return Err(ForgeError::InvalidSignature { p, q });
    }
    let mask = if p == 0 { 0 } else { (1u32 << p) - 1 };
    let bound = max_codim.unwrap_or(2 * p + q - 2);
    let all = Enumerator::default().mixed_trees(mask, q);
    Ok(sort_by_codim(all.into_iter().filter(|t| t.internal_edges() <= bound).collect()))
}

/// All canonical spatial-rooted trees on labels `1..=n`; `n = 1` gives the
/// bare spatial edge.
pub fn enumerate_spatial_rooted(n: usize) -> Result<Vec<Tree>> {
    if n == 0 || n > 16 {
        return Err(ForgeError::InvalidArity(format!("spatial arity {n}")));
    }
    let mask = (1u32 << n) - 1;
    Ok(sort_by_codim(Enumerator::default().spatial_trees(mask)))
}

/// Number of trees by internal-edge count.
pub fn codim_counts(trees: &[Tree]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for t in trees {
        let k = t.internal_edges();
        if out.len() <= k {
            out.resize(k + 1, 0);
        }
        out[k] += 1;
    }
    out
}

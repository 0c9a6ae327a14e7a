//! Finite-dimensional structures `(L, A, {l_n}, {n_pq})`, their evaluation
//! against trees, and the equivalent square-zero coderivation on
//! `S^c(↓↓L) ⊗ T^c(↓A)` truncated by word length.
//!
//! Two gradings are used. In the geometric grading `l_n` has degree `3 - 2n`
//! and `n_pq` degree `2 - 2p - q`; in the algebraic grading every map has
//! degree one and lives on the shifted spaces `U = ↓↓L`, `V = ↓A`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::differential::{d_corolla_mixed, d_corolla_spatial};
use crate::error::{ForgeError, Result};
use crate::signed::{all_permutations, combinations, koszul, parse_coef, rat, ratio, Coef, FormalSum};
use crate::tree::{l_degree, n_degree, Tree};

pub type Vector = BTreeMap<usize, Coef>;

fn add_to(v: &mut Vector, i: usize, c: Coef) {
    if c.is_zero() {
        return;
    }
    let e = v.entry(i).or_insert_with(Coef::zero);
    *e += c;
    if e.is_zero() {
        v.remove(&i);
    }
}

fn add_scaled(v: &mut Vector, w: &Vector, c: &Coef) {
    for (i, x) in w {
        add_to(v, *i, x * c);
    }
}

fn parity_sign(k: i64) -> i32 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    pub names: Vec<String>,
    pub degrees: Vec<i64>,
}

impl GradedSpace {
    pub fn new(basis: &[(&str, i64)]) -> Result<Self> {
        let names: Vec<String> = basis.iter().map(|b| b.0.to_string()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ForgeError::InvalidStructure("basis names must be unique".into()));
        }
        Ok(Self { names, degrees: basis.iter().map(|b| b.1).collect() })
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Same basis with every degree moved by `by`.
    pub fn shifted(&self, by: i64) -> GradedSpace {
        GradedSpace { names: self.names.clone(), degrees: self.degrees.iter().map(|d| d + by).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MapKind {
    /// `p` inputs from `L`, output in `L`.
    L,
    /// `p` inputs from `L` followed by `q` from `A`, output in `A`.
    N,
}

pub type MapKey = (MapKind, usize, usize);

/// Multilinear map by structure constants on basis tuples. Keys list the
/// `L`-inputs first, then the `A`-inputs. Maps are graded symmetric in their
/// `L`-inputs; constants are stored for every ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    pub kind: MapKind,
    pub p: usize,
    pub q: usize,
    pub degree: i64,
    entries: BTreeMap<Vec<usize>, Vector>,
}

impl GradedMap {
    pub fn new(kind: MapKind, p: usize, q: usize, degree: i64) -> Self {
        Self { kind, p, q, degree, entries: BTreeMap::new() }
    }

    pub fn key(&self) -> MapKey {
        (self.kind, self.p, self.q)
    }

    pub fn arity(&self) -> usize {
        self.p + self.q
    }

    pub fn get(&self, inputs: &[usize]) -> Option<&Vector> {
        self.entries.get(inputs)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Vector)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `c * out` at `inputs` only.
    pub fn add_raw(&mut self, inputs: &[usize], out: usize, c: Coef) {
        let v = self.entries.entry(inputs.to_vec()).or_default();
        add_to(v, out, c);
        if v.is_empty() {
            self.entries.remove(inputs);
        }
    }

    /// Adds `c * out` at `inputs` and at every reordering of the `L`-inputs,
    /// with the Koszul sign of the reordering.
    pub fn add_symmetric(&mut self, inputs: &[usize], out: usize, c: Coef, l_degrees: &[i64]) {
        let (ls, rest) = inputs.split_at(self.p);
        let degs: Vec<i64> = ls.iter().map(|&i| l_degrees[i]).collect();
        let mut seen: BTreeMap<Vec<usize>, Coef> = BTreeMap::new();
        for perm in all_permutations(self.p) {
            let mut key: Vec<usize> = perm.iter().map(|&k| ls[k]).collect();
            key.extend_from_slice(rest);
            let s = koszul(&perm, &degs);
            *seen.entry(key).or_insert_with(Coef::zero) += rat(s as i64) * &c;
        }
        // Repeated inputs visit the same key several times; average them out.
        let mult = Coef::from_integer(count_orbit_multiplicity(ls).into());
        for (key, total) in seen {
            self.add_raw(&key, out, total / &mult);
        }
    }

    fn map_values(&self, f: impl Fn(&Vec<usize>, &Coef, usize) -> Coef) -> GradedMap {
        let mut out = GradedMap::new(self.kind, self.p, self.q, self.degree);
        for (k, v) in &self.entries {
            for (o, c) in v {
                out.add_raw(k, *o, f(k, c, *o));
            }
        }
        out
    }
}

/// Number of orderings of a tuple that fix it: the product of factorials of
/// multiplicities.
fn count_orbit_multiplicity(items: &[usize]) -> i64 {
    let mut counts: HashMap<usize, i64> = HashMap::new();
    for &i in items {
        *counts.entry(i).or_default() += 1;
    }
    counts.values().map(|&m| (1..=m).product::<i64>()).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    /// Degrees equal minus the dimension of the configuration space.
    Geometric,
    /// Every map has this degree; the spaces are the shifted `U` and `V`.
    Uniform(i64),
}

/// A pair of graded spaces with two families of maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    pub l: GradedSpace,
    pub a: GradedSpace,
    pub grading: Grading,
    pub maps: BTreeMap<MapKey, GradedMap>,
}

impl Structure {
    pub fn new(l: GradedSpace, a: GradedSpace, grading: Grading) -> Self {
        Self { l, a, grading, maps: BTreeMap::new() }
    }

    pub fn expected_degree(&self, kind: MapKind, p: usize, q: usize) -> i64 {
        match (self.grading, kind) {
            (Grading::Uniform(d), _) => d,
            (Grading::Geometric, MapKind::L) => l_degree(p),
            (Grading::Geometric, MapKind::N) => n_degree(p, q),
        }
    }

    pub fn map(&self, kind: MapKind, p: usize, q: usize) -> Option<&GradedMap> {
        self.maps.get(&(kind, p, q))
    }

    pub fn map_mut(&mut self, kind: MapKind, p: usize, q: usize) -> &mut GradedMap {
        let d = self.expected_degree(kind, p, q);
        self.maps.entry((kind, p, q)).or_insert_with(|| GradedMap::new(kind, p, q, d))
    }

    pub fn max_arity(&self) -> usize {
        self.maps.values().filter(|m| !m.is_zero()).map(GradedMap::arity).max().unwrap_or(0)
    }

    fn input_degree(&self, m: &GradedMap, inputs: &[usize]) -> i64 {
        let (ls, as_) = inputs.split_at(m.p);
        ls.iter().map(|&i| self.l.degrees[i]).sum::<i64>() + as_.iter().map(|&i| self.a.degrees[i]).sum::<i64>()
    }

    fn output_space(&self, kind: MapKind) -> &GradedSpace {
        match kind {
            MapKind::L => &self.l,
            MapKind::N => &self.a,
        }
    }

    /// Degree bookkeeping, arities and graded symmetry in the `L`-inputs.
    pub fn validate(&self) -> Result<()> {
        for (&(kind, p, q), m) in &self.maps {
            if (m.kind, m.p, m.q) != (kind, p, q) {
                return Err(ForgeError::InvalidStructure("map filed under the wrong key".into()));
            }
            if kind == MapKind::L && q != 0 || p + q == 0 {
                return Err(ForgeError::InvalidArity(format!("map ({kind:?}, {p}, {q})")));
            }
            if m.degree != self.expected_degree(kind, p, q) {
                return Err(ForgeError::InvalidStructure(format!(
                    "map ({kind:?}, {p}, {q}) has degree {} instead of {}",
                    m.degree,
                    self.expected_degree(kind, p, q)
                )));
            }
            let out_space = self.output_space(kind);
            for (inputs, v) in m.entries() {
                if inputs.len() != p + q {
                    return Err(ForgeError::LengthMismatch { expected: p + q, got: inputs.len() });
                }
                let (ls, as_) = inputs.split_at(p);
                if ls.iter().any(|&i| i >= self.l.dim()) || as_.iter().any(|&i| i >= self.a.dim()) {
                    return Err(ForgeError::InvalidStructure("input index out of range".into()));
                }
                let din = self.input_degree(m, inputs);
                for &o in v.keys() {
                    if o >= out_space.dim() || out_space.degrees[o] != din + m.degree {
                        return Err(ForgeError::InvalidStructure(format!(
                            "constant of ({kind:?}, {p}, {q}) at {inputs:?} breaks the degree rule"
                        )));
                    }
                }
                let degs: Vec<i64> = ls.iter().map(|&i| self.l.degrees[i]).collect();
                for k in 0..p.saturating_sub(1) {
                    let mut perm: Vec<usize> = (0..p).collect();
                    perm.swap(k, k + 1);
                    let mut swapped: Vec<usize> = perm.iter().map(|&j| ls[j]).collect();
                    swapped.extend_from_slice(as_);
                    let expected: Vector = v.iter().map(|(o, c)| (*o, c * rat(koszul(&perm, &degs) as i64))).collect();
                    let actual = m.get(&swapped).cloned().unwrap_or_default();
                    if actual != expected {
                        return Err(ForgeError::InvalidStructure(format!(
                            "({kind:?}, {p}, {q}) is not graded symmetric at {inputs:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn apply(&self, kind: MapKind, p: usize, q: usize, inputs: &[usize]) -> Vector {
        self.map(kind, p, q).and_then(|m| m.get(inputs)).cloned().unwrap_or_default()
    }

    pub fn to_json(&self) -> Value {
        let space = |s: &GradedSpace| -> Value {
            s.names.iter().zip(&s.degrees).map(|(n, d)| json!({ "name": n, "deg": d })).collect()
        };
        let maps: Vec<Value> = self
            .maps
            .values()
            .map(|m| {
                let entries: Vec<Value> = m
                    .entries()
                    .map(|(inputs, v)| {
                        let names: Vec<&str> = inputs
                            .iter()
                            .enumerate()
                            .map(|(k, &i)| if k < m.p { self.l.names[i].as_str() } else { self.a.names[i].as_str() })
                            .collect();
                        let out_space = self.output_space(m.kind);
                        let out: serde_json::Map<String, Value> = v
                            .iter()
                            .map(|(o, c)| (out_space.names[*o].clone(), json!(format!("{}/{}", c.numer(), c.denom()))))
                            .collect();
                        json!({ "in": names, "out": out })
                    })
                    .collect();
                let kind = if m.kind == MapKind::L { "l" } else { "n" };
                json!({ "kind": kind, "p": m.p, "q": m.q, "entries": entries })
            })
            .collect();
        json!({ "L": space(&self.l), "A": space(&self.a), "maps": maps })
    }

    /// Parses the geometric-grading JSON form; constants are taken literally.
    pub fn from_json(v: &Value) -> Result<Structure> {
        let space = |key: &str| -> Result<GradedSpace> {
            let arr = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| ForgeError::Json(format!("missing \"{key}\" basis")))?;
            let mut basis = Vec::new();
            for b in arr {
                let name =
                    b.get("name").and_then(Value::as_str).ok_or_else(|| ForgeError::Json("basis name".into()))?;
                let deg =
                    b.get("deg").and_then(Value::as_i64).ok_or_else(|| ForgeError::Json("basis degree".into()))?;
                basis.push((name.to_string(), deg));
            }
            let refs: Vec<(&str, i64)> = basis.iter().map(|(n, d)| (n.as_str(), *d)).collect();
            GradedSpace::new(&refs)
        };
        let mut s = Structure::new(space("L")?, space("A")?, Grading::Geometric);
        let maps =
            v.get("maps").and_then(Value::as_array).ok_or_else(|| ForgeError::Json("missing \"maps\"".into()))?;
        for m in maps {
            let kind = match m.get("kind").and_then(Value::as_str) {
                Some("l") => MapKind::L,
                Some("n") => MapKind::N,
                _ => return Err(ForgeError::Json("map kind must be \"l\" or \"n\"".into())),
            };
            let p = m.get("p").and_then(Value::as_u64).ok_or_else(|| ForgeError::Json("map p".into()))? as usize;
            let q = m.get("q").and_then(Value::as_u64).unwrap_or(0) as usize;
            let entries = m.get("entries").and_then(Value::as_array).cloned().unwrap_or_default();
            let (l_names, a_names) = (s.l.clone(), s.a.clone());
            let target = s.map_mut(kind, p, q);
            for e in entries {
                let ins =
                    e.get("in").and_then(Value::as_array).ok_or_else(|| ForgeError::Json("entry \"in\"".into()))?;
                if ins.len() != p + q {
                    return Err(ForgeError::LengthMismatch { expected: p + q, got: ins.len() });
                }
                let mut idx = Vec::with_capacity(ins.len());
                for (k, n) in ins.iter().enumerate() {
                    let n = n.as_str().ok_or_else(|| ForgeError::Json("input names are strings".into()))?;
                    let space = if k < p { &l_names } else { &a_names };
                    idx.push(space.index_of(n).ok_or_else(|| ForgeError::Json(format!("unknown basis element {n}")))?);
                }
                let out =
                    e.get("out").and_then(Value::as_object).ok_or_else(|| ForgeError::Json("entry \"out\"".into()))?;
                let out_space = if kind == MapKind::L { &l_names } else { &a_names };
                for (name, c) in out {
                    let o = out_space
                        .index_of(name)
                        .ok_or_else(|| ForgeError::Json(format!("unknown basis element {name}")))?;
                    target.add_raw(&idx, o, parse_coef(c)?);
                }
            }
        }
        s.validate()?;
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// Evaluating trees as composites of the structure maps.

#[derive(Clone, Copy)]
enum Arg {
    L(usize),
    A(usize),
}

/// Leaves in traversal order; `None` marks a planar leaf.
fn leaf_sequence(t: &Tree, out: &mut Vec<Option<u32>>) {
    match t {
        Tree::Spatial(k) => out.push(Some(*k)),
        Tree::Planar => out.push(None),
        _ => t.children().for_each(|c| leaf_sequence(c, out)),
    }
}

/// Value of `t` on its leaves in traversal order. Applying `f_1 ⊗ … ⊗ f_r`
/// to consecutive argument blocks passes each `f_k` over the earlier blocks.
fn evaluate_node(s: &Structure, t: &Tree, args: &[(Arg, i64)]) -> Vector {
    match t {
        Tree::Spatial(_) | Tree::Planar => {
            let mut v = Vector::new();
            let i = match args[0].0 {
                Arg::L(i) | Arg::A(i) => i,
            };
            v.insert(i, Coef::one());
            v
        }
        _ => {
            let children: Vec<&Tree> = t.children().collect();
            let mut sign = 1;
            let mut offset = 0;
            let mut passed = 0i64;
            let mut values = Vec::with_capacity(children.len());
            for c in &children {
                let width = c.spatial_leaf_count() + c.planar_leaf_count();
                let block = &args[offset..offset + width];
                sign *= parity_sign(c.degree() * passed);
                values.push(evaluate_node(s, c, block));
                passed += block.iter().map(|a| a.1).sum::<i64>();
                offset += width;
            }
            let (kind, p, q) = match t {
                Tree::L(c) => (MapKind::L, c.len(), 0),
                Tree::N { spatial, planar } => (MapKind::N, spatial.len(), planar.len()),
                _ => unreachable!(),
            };
            let mut out = Vector::new();
            expand(&values, &mut Vec::new(), Coef::one(), &mut |inputs, c| {
                add_scaled(&mut out, &s.apply(kind, p, q, inputs), &c);
            });
            if sign < 0 {
                for c in out.values_mut() {
                    *c = -c.clone();
                }
            }
            out
        }
    }
}

fn expand(values: &[Vector], prefix: &mut Vec<usize>, c: Coef, f: &mut dyn FnMut(&[usize], Coef)) {
    if prefix.len() == values.len() {
        f(prefix, c);
        return;
    }
    for (i, x) in &values[prefix.len()] {
        prefix.push(*i);
        expand(values, prefix, &c * x, f);
        prefix.pop();
    }
}

/// `T(v_1, …, v_p, a_1, …, a_q)` for a tree with spatial labels `1..=p`.
pub fn evaluate_tree(s: &Structure, t: &Tree, v: &[usize], a: &[usize]) -> Result<Vector> {
    let p = t.spatial_leaf_count();
    let q = t.planar_leaf_count();
    if v.len() != p || a.len() != q {
        return Err(ForgeError::LengthMismatch { expected: p + q, got: v.len() + a.len() });
    }
    let mut seq = Vec::new();
    leaf_sequence(t, &mut seq);
    // Positions of the arguments (v_1..v_p, a_1..a_q) in traversal order.
    let mut perm = Vec::with_capacity(p + q);
    let mut next_planar = 0;
    for leaf in seq {
        match leaf {
            Some(k) => perm.push(k as usize - 1),
            None => {
                perm.push(p + next_planar);
                next_planar += 1;
            }
        }
    }
    let degrees: Vec<i64> = v.iter().map(|&i| s.l.degrees[i]).chain(a.iter().map(|&i| s.a.degrees[i])).collect();
    let args: Vec<(Arg, i64)> =
        perm.iter().map(|&k| if k < p { (Arg::L(v[k]), degrees[k]) } else { (Arg::A(a[k - p]), degrees[k]) }).collect();
    let sign = koszul(&perm, &degrees);
    let mut out = evaluate_node(s, t, &args);
    if sign < 0 {
        for c in out.values_mut() {
            *c = -c.clone();
        }
    }
    Ok(out)
}

pub fn evaluate_sum(s: &Structure, x: &FormalSum, v: &[usize], a: &[usize]) -> Result<Vector> {
    let mut out = Vector::new();
    for (t, c) in x.iter() {
        add_scaled(&mut out, &evaluate_tree(s, t, v, a)?, c);
    }
    Ok(out)
}

/// `∂f = d∘f - (-1)^{|f|} f∘(Σ 1⊗…⊗d⊗…⊗1)` with `d = l_1` on `L` and
/// `d = n_{0,1}` on `A`.
fn boundary(s: &Structure, kind: MapKind, p: usize, q: usize, v: &[usize], a: &[usize]) -> Vector {
    let f = s.expected_degree(kind, p, q);
    let mut inputs: Vec<usize> = v.iter().chain(a).copied().collect();
    let mut out = Vector::new();
    let inner = s.apply(kind, p, q, &inputs);
    for (o, c) in &inner {
        let d = match kind {
            MapKind::L => s.apply(MapKind::L, 1, 0, &[*o]),
            MapKind::N => s.apply(MapKind::N, 0, 1, &[*o]),
        };
        add_scaled(&mut out, &d, c);
    }
    let outer_sign = -rat(parity_sign(f) as i64);
    let mut passed = 0i64;
    for k in 0..p + q {
        let (d, deg) = if k < p {
            (s.apply(MapKind::L, 1, 0, &[inputs[k]]), s.l.degrees[inputs[k]])
        } else {
            (s.apply(MapKind::N, 0, 1, &[inputs[k]]), s.a.degrees[inputs[k]])
        };
        let c0 = &outer_sign * rat(parity_sign(passed) as i64);
        let keep = inputs[k];
        for (i, c) in &d {
            inputs[k] = *i;
            add_scaled(&mut out, &s.apply(kind, p, q, &inputs), &(&c0 * c));
        }
        inputs[k] = keep;
        passed += deg;
    }
    out
}

/// The tree-level expansion of a generator, as a formal sum of trees.
fn generator_expansion(kind: MapKind, p: usize, q: usize) -> Result<FormalSum> {
    match kind {
        MapKind::L if p >= 2 => d_corolla_spatial(p),
        MapKind::N if 2 * p + q >= 2 => d_corolla_mixed(p, q),
        _ => Ok(FormalSum::zero()),
    }
}

/// Left minus right side of the relation attached to the generator
/// `(kind, n, m)`: `∂g - g'(dg)`, where `g'` evaluates trees through the
/// structure maps.
pub fn evaluate_ocha_relation(
    s: &Structure,
    kind: MapKind,
    n: usize,
    m: usize,
    v: &[usize],
    a: &[usize],
) -> Result<Vector> {
    if kind == MapKind::L && m != 0 || n + m == 0 {
        return Err(ForgeError::InvalidArity(format!("relation ({kind:?}, {n}, {m})")));
    }
    if v.len() != n || a.len() != m {
        return Err(ForgeError::LengthMismatch { expected: n + m, got: v.len() + a.len() });
    }
    let mut out = boundary(s, kind, n, m, v, a);
    let rhs = evaluate_sum(s, &generator_expansion(kind, n, m)?, v, a)?;
    add_scaled(&mut out, &rhs, &-Coef::one());
    Ok(out)
}

fn tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..dim).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationFailure {
    pub kind: MapKind,
    pub n: usize,
    pub m: usize,
    pub v: Vec<usize>,
    pub a: Vec<usize>,
}

/// Relations of total arity exactly `total` on every basis tuple.
pub fn relation_failure_at(s: &Structure, total: usize) -> Result<Option<RelationFailure>> {
    let mut keys: Vec<MapKey> = vec![(MapKind::L, total, 0)];
    keys.extend((0..=total).map(|n| (MapKind::N, n, total - n)));
    for (kind, n, m) in keys {
        for v in tuples(s.l.dim(), n) {
            for a in tuples(s.a.dim(), m) {
                if !evaluate_ocha_relation(s, kind, n, m, &v, &a)?.is_empty() {
                    return Ok(Some(RelationFailure { kind, n, m, v, a }));
                }
            }
        }
    }
    Ok(None)
}

/// Every relation of total arity `n + m <= max_arity`; the first failure.
pub fn first_relation_failure(s: &Structure, max_arity: usize) -> Result<Option<RelationFailure>> {
    for total in 1..=max_arity {
        if let Some(f) = relation_failure_at(s, total)? {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Transport between the gradings.

/// Extra sign on top of the suspension transport, so that square-zero of the
/// lifted coderivation matches the relations read off the tree differential.
/// Without it the two disagree already at `n_{1,0}`; the choice is unique up
/// to a gauge group of order eight, and this one leaves every `l_n` alone.
pub fn transport_correction(kind: MapKind, p: usize, q: usize) -> i32 {
    match kind {
        MapKind::L => 1,
        MapKind::N => parity_sign((p + q * (q + 1) / 2) as i64),
    }
}

/// Sign relating `ñ_{p,q}(↓↓x…, ↓a…)` to `↓ n_{p,q}(x…, a…)`, without the
/// correction: `↑^{⊗q}` passes the `L`-block and each `↑` passes the earlier
/// desuspended `A`-inputs.
fn suspension_sign(kind: MapKind, p: usize, q: usize, inputs: &[usize], l: &GradedSpace, a: &GradedSpace) -> i32 {
    let base = match (kind, p, q) {
        (MapKind::L, 1, 0) | (MapKind::N, 0, 1) => -1,
        _ => 1,
    };
    if kind == MapKind::L {
        return base;
    }
    let (ls, as_) = inputs.split_at(p);
    let l_deg: i64 = ls.iter().map(|&i| l.degrees[i]).sum();
    let mut exponent = q as i64 * l_deg;
    let mut before = 0i64;
    for &j in as_ {
        exponent += before;
        before += a.degrees[j] - 1;
    }
    base * parity_sign(exponent)
}

/// Geometric structure to the degree-one maps on `U = ↓↓L`, `V = ↓A`.
pub fn transport(geo: &Structure) -> Result<Structure> {
    if geo.grading != Grading::Geometric {
        return Err(ForgeError::InvalidStructure("transport expects the geometric grading".into()));
    }
    let mut alg = Structure::new(geo.l.shifted(-2), geo.a.shifted(-1), Grading::Uniform(1));
    for (&(kind, p, q), m) in &geo.maps {
        let c = transport_correction(kind, p, q);
        let mut t = m.map_values(|k, x, _| x * rat((c * suspension_sign(kind, p, q, k, &geo.l, &geo.a)) as i64));
        t.degree = 1;
        alg.maps.insert((kind, p, q), t);
    }
    Ok(alg)
}

/// Inverse of [`transport`].
pub fn untransport(alg: &Structure) -> Result<Structure> {
    untransport_with(alg, &transport_correction)
}

/// [`untransport`] with an arbitrary per-map sign correction.
pub fn untransport_with(alg: &Structure, correction: &dyn Fn(MapKind, usize, usize) -> i32) -> Result<Structure> {
    if alg.grading != Grading::Uniform(1) {
        return Err(ForgeError::InvalidStructure("untransport expects degree-one maps".into()));
    }
    let (l, a) = (alg.l.shifted(2), alg.a.shifted(1));
    let mut geo = Structure::new(l.clone(), a.clone(), Grading::Geometric);
    for (&(kind, p, q), m) in &alg.maps {
        let c = correction(kind, p, q);
        let mut t = m.map_values(|k, x, _| x * rat((c * suspension_sign(kind, p, q, k, &l, &a)) as i64));
        t.degree = geo.expected_degree(kind, p, q);
        geo.maps.insert((kind, p, q), t);
    }
    Ok(geo)
}

// ---------------------------------------------------------------------------
// Words of S^c(U) ⊗ T^c(V) and lifted coderivations.

/// Basis word: a sorted multiset over `U` and a sequence over `V`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub sym: Vec<usize>,
    pub ord: Vec<usize>,
}

impl Word {
    pub fn len(&self) -> usize {
        self.sym.len() + self.ord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self, u: &GradedSpace, v: &GradedSpace) -> i64 {
        self.sym.iter().map(|&i| u.degrees[i]).sum::<i64>() + self.ord.iter().map(|&i| v.degrees[i]).sum::<i64>()
    }
}

pub type WordVec = BTreeMap<Word, Coef>;

fn add_word(out: &mut WordVec, w: Word, c: Coef) {
    if c.is_zero() {
        return;
    }
    let e = out.entry(w).or_insert_with(Coef::zero);
    *e += c;
    if e.is_zero() {
        out.retain(|_, x| !x.is_zero());
    }
}

/// Sorted representative of `u_1 ⊙ … ⊙ u_k` by (degree, index) with its
/// Koszul sign; `None` when an odd element repeats.
pub fn normalize_sym(items: &[usize], u: &GradedSpace) -> Option<(i32, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by_key(|&k| (u.degrees[items[k]], items[k]));
    let sorted: Vec<usize> = idx.iter().map(|&k| items[k]).collect();
    if sorted.windows(2).any(|w| w[0] == w[1] && u.degrees[w[0]] % 2 != 0) {
        return None;
    }
    let degs: Vec<i64> = items.iter().map(|&i| u.degrees[i]).collect();
    Some((koszul(&idx, &degs), sorted))
}

/// Coderivation lifted from all maps of `s` (uniform grading): one map
/// applied to a sub-multiset, or to a sub-multiset together with a block of
/// consecutive `V` letters.
pub fn apply_coderivation(s: &Structure, w: &Word) -> WordVec {
    let (u, v) = (&s.l, &s.a);
    let deg = match s.grading {
        Grading::Uniform(d) => d,
        Grading::Geometric => panic!("lifting needs the uniform grading"),
    };
    let k = w.sym.len();
    let udeg: Vec<i64> = w.sym.iter().map(|&i| u.degrees[i]).collect();
    let mut out = WordVec::new();
    for size in 0..=k {
        for chosen in combinations(k, size) {
            let rest: Vec<usize> = (0..k).filter(|i| !chosen.contains(i)).collect();
            let taken: Vec<usize> = chosen.iter().map(|&i| w.sym[i]).collect();
            let left: Vec<usize> = rest.iter().map(|&i| w.sym[i]).collect();
            let taken_deg: i64 = chosen.iter().map(|&i| udeg[i]).sum();
            let left_deg: i64 = rest.iter().map(|&i| udeg[i]).sum();
            // L-valued maps: bring the chosen letters to the front.
            if size >= 1 {
                if let Some(m) = s.map(MapKind::L, size, 0) {
                    let mut perm = chosen.clone();
                    perm.extend(&rest);
                    let sign = koszul(&perm, &udeg);
                    if let Some(val) = m.get(&taken) {
                        for (o, c) in val {
                            let mut items = vec![*o];
                            items.extend(&left);
                            if let Some((s2, sym)) = normalize_sym(&items, u) {
                                add_word(&mut out, Word { sym, ord: w.ord.clone() }, c * rat((sign * s2) as i64));
                            }
                        }
                    }
                }
            }
            // A-valued maps: the remaining letters stay in front.
            let mut perm = rest.clone();
            perm.extend(&chosen);
            let unshuffle = koszul(&perm, &udeg);
            for start in 0..=w.ord.len() {
                let before_deg: i64 = w.ord[..start].iter().map(|&i| v.degrees[i]).sum();
                for len in 0..=w.ord.len() - start {
                    if size + len == 0 {
                        continue;
                    }
                    let Some(m) = s.map(MapKind::N, size, len) else { continue };
                    let mut inputs = taken.clone();
                    inputs.extend_from_slice(&w.ord[start..start + len]);
                    let Some(val) = m.get(&inputs) else { continue };
                    let sign =
                        unshuffle * parity_sign(taken_deg * before_deg) * parity_sign(deg * (left_deg + before_deg));
                    for (o, c) in val {
                        let mut ord = w.ord[..start].to_vec();
                        ord.push(*o);
                        ord.extend_from_slice(&w.ord[start + len..]);
                        add_word(&mut out, Word { sym: left.clone(), ord }, c * rat(sign as i64));
                    }
                }
            }
        }
    }
    out
}

pub fn apply_to_vec(s: &Structure, x: &WordVec) -> WordVec {
    let mut out = WordVec::new();
    for (w, c) in x {
        for (w2, c2) in apply_coderivation(s, w) {
            add_word(&mut out, w2, c * c2);
        }
    }
    out
}

pub fn apply_d_squared(s: &Structure, w: &Word, max_word: usize) -> Result<WordVec> {
    if w.len() > max_word {
        return Err(ForgeError::WordTooLong { len: w.len(), max: max_word });
    }
    let once = apply_coderivation(s, w);
    Ok(apply_to_vec(s, &once))
}

/// All basis words of length `1..=max_word`.
pub fn basis_words(u: &GradedSpace, v: &GradedSpace, max_word: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for k in 0..=max_word {
        let multisets = multisets(u, k);
        for l in 0..=max_word - k {
            if k + l == 0 {
                continue;
            }
            for sym in &multisets {
                for ord in tuples(v.dim(), l) {
                    out.push(Word { sym: sym.clone(), ord });
                }
            }
        }
    }
    out
}

fn multisets(u: &GradedSpace, k: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..u.dim()).collect();
    order.sort_by_key(|&i| (u.degrees[i], i));
    let mut out = Vec::new();
    fn rec(order: &[usize], u: &GradedSpace, start: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for pos in start..order.len() {
            let i = order[pos];
            let odd = u.degrees[i] % 2 != 0;
            cur.push(i);
            rec(order, u, if odd { pos + 1 } else { pos }, k, cur, out);
            cur.pop();
        }
    }
    rec(&order, u, 0, k, &mut Vec::new(), &mut out);
    out
}

pub fn first_d_squared_failure(alg: &Structure, max_word: usize) -> Result<Option<Word>> {
    for w in basis_words(&alg.l, &alg.a, max_word) {
        if !apply_d_squared(alg, &w, max_word)?.is_empty() {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Reduced deconcatenation-unshuffle coproduct; the pairs are stored as
/// words `(left, right)`.
pub fn coproduct(w: &Word, u: &GradedSpace, v: &GradedSpace) -> BTreeMap<(Word, Word), Coef> {
    let k = w.sym.len();
    let udeg: Vec<i64> = w.sym.iter().map(|&i| u.degrees[i]).collect();
    let mut out: BTreeMap<(Word, Word), Coef> = BTreeMap::new();
    for size in 0..=k {
        for chosen in combinations(k, size) {
            let rest: Vec<usize> = (0..k).filter(|i| !chosen.contains(i)).collect();
            let mut perm = chosen.clone();
            perm.extend(&rest);
            let s0 = koszul(&perm, &udeg);
            let rest_deg: i64 = rest.iter().map(|&i| udeg[i]).sum();
            for cut in 0..=w.ord.len() {
                let left = Word { sym: chosen.iter().map(|&i| w.sym[i]).collect(), ord: w.ord[..cut].to_vec() };
                let right = Word { sym: rest.iter().map(|&i| w.sym[i]).collect(), ord: w.ord[cut..].to_vec() };
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let front_deg: i64 = left.ord.iter().map(|&i| v.degrees[i]).sum();
                let sign = s0 * parity_sign(rest_deg * front_deg);
                let e = out.entry((left, right)).or_insert_with(Coef::zero);
                *e += rat(sign as i64);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Checks `Δ̄ D = (D ⊗ 1 + 1 ⊗ D) Δ̄` on one word.
pub fn coderivation_identity_holds(s: &Structure, w: &Word) -> bool {
    let (u, v) = (&s.l, &s.a);
    let deg = match s.grading {
        Grading::Uniform(d) => d,
        Grading::Geometric => return false,
    };
    let mut lhs: BTreeMap<(Word, Word), Coef> = BTreeMap::new();
    for (w2, c) in apply_coderivation(s, w) {
        for (pair, c2) in coproduct(&w2, u, v) {
            *lhs.entry(pair).or_insert_with(Coef::zero) += &c * c2;
        }
    }
    let mut rhs: BTreeMap<(Word, Word), Coef> = BTreeMap::new();
    for ((a, b), c) in coproduct(w, u, v) {
        for (a2, c2) in apply_coderivation(s, &a) {
            if !a2.is_empty() {
                *rhs.entry((a2, b.clone())).or_insert_with(Coef::zero) += &c * c2;
            }
        }
        let sign = rat(parity_sign(deg * a.degree(u, v)) as i64);
        for (b2, c2) in apply_coderivation(s, &b) {
            if !b2.is_empty() {
                *rhs.entry((a.clone(), b2)).or_insert_with(Coef::zero) += &c * c2 * &sign;
            }
        }
    }
    // Canonicalize both sides: the pairs carry unsorted multisets.
    let norm = |m: BTreeMap<(Word, Word), Coef>| -> BTreeMap<(Word, Word), Coef> {
        let mut out: BTreeMap<(Word, Word), Coef> = BTreeMap::new();
        for ((a, b), c) in m {
            let (Some((sa, xa)), Some((sb, xb))) = (normalize_sym(&a.sym, u), normalize_sym(&b.sym, u)) else {
                continue;
            };
            let key = (Word { sym: xa, ord: a.ord }, Word { sym: xb, ord: b.ord });
            *out.entry(key).or_insert_with(Coef::zero) += c * rat((sa * sb) as i64);
        }
        out.retain(|_, c| !c.is_zero());
        out
    };
    norm(lhs) == norm(rhs)
}

// ---------------------------------------------------------------------------
// Equivalence of the two formulations.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub max_word: usize,
    pub d_squared_zero: bool,
    pub relations_hold: bool,
    pub first_d_squared_failure: Option<Word>,
    pub first_relation_failure: Option<RelationFailure>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.d_squared_zero == self.relations_hold
    }

    pub fn to_json(&self) -> Value {
        json!({
            "max_word": self.max_word,
            "d_squared_zero": self.d_squared_zero,
            "relations_hold": self.relations_hold,
            "equivalent": self.equivalent(),
            "first_d_squared_failure": self.first_d_squared_failure.as_ref().map(|w| json!({"sym": w.sym, "ord": w.ord})),
            "first_relation_failure": self.first_relation_failure.as_ref().map(|f| json!({
                "kind": if f.kind == MapKind::L { "l" } else { "n" }, "n": f.n, "m": f.m, "v": f.v, "a": f.a
            })),
        })
    }
}

/// Compares square-zero of the lifted coderivation on words of length at
/// most `max_word` with the relations of total arity at most `max_word`.
pub fn check_equivalence(geo: &Structure, max_word: usize) -> Result<EquivalenceReport> {
    geo.validate()?;
    if geo.max_arity() > max_word {
        return Err(ForgeError::WordTooLong { len: geo.max_arity(), max: max_word });
    }
    let alg = transport(geo)?;
    let dw = first_d_squared_failure(&alg, max_word)?;
    let rel = first_relation_failure(geo, max_word)?;
    Ok(EquivalenceReport {
        max_word,
        d_squared_zero: dw.is_none(),
        relations_hold: rel.is_none(),
        first_d_squared_failure: dw,
        first_relation_failure: rel,
    })
}

// ---------------------------------------------------------------------------
// Example structures.

/// `sl_2` in degree one acting on 2×2 matrices in degree zero: `l_2` the
/// bracket, `n_{0,2}` the matrix product, `n_{1,1}(x, a) = ax - xa`.
pub fn sl2_matrix_example() -> Structure {
    let l = GradedSpace::new(&[("e", 1), ("f", 1), ("h", 1)]).expect("distinct");
    let a = GradedSpace::new(&[("E11", 0), ("E12", 0), ("E21", 0), ("E22", 0)]).expect("distinct");
    // Matrices of e, f, h in the unit basis (row-major index 2*r + c).
    let mats: [[i64; 4]; 3] = [[0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, -1]];
    let mul = |x: &[i64; 4], y: &[i64; 4]| -> [i64; 4] {
        let mut z = [0; 4];
        for r in 0..2 {
            for c in 0..2 {
                z[2 * r + c] = (0..2).map(|k| x[2 * r + k] * y[2 * k + c]).sum();
            }
        }
        z
    };
    let unit = |i: usize| -> [i64; 4] {
        let mut z = [0; 4];
        z[i] = 1;
        z
    };
    // Coordinates of a traceless matrix in (e, f, h).
    let coords = |m: &[i64; 4]| -> [i64; 3] { [m[1], m[2], m[0]] };
    let mut s = Structure::new(l, a, Grading::Geometric);
    for i in 0..3 {
        for j in 0..3 {
            let xy = mul(&mats[i], &mats[j]);
            let yx = mul(&mats[j], &mats[i]);
            let br: Vec<i64> = (0..4).map(|k| xy[k] - yx[k]).collect();
            let c = coords(&[br[0], br[1], br[2], br[3]]);
            for (o, &x) in c.iter().enumerate() {
                if x != 0 {
                    s.map_mut(MapKind::L, 2, 0).add_raw(&[i, j], o, rat(x));
                }
            }
        }
        for k in 0..4 {
            let ax = mul(&unit(k), &mats[i]);
            let xa = mul(&mats[i], &unit(k));
            for o in 0..4 {
                let c = ax[o] - xa[o];
                if c != 0 {
                    s.map_mut(MapKind::N, 1, 1).add_raw(&[i, k], o, rat(c));
                }
            }
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            let z = mul(&unit(i), &unit(j));
            for (o, &c) in z.iter().enumerate() {
                if c != 0 {
                    s.map_mut(MapKind::N, 0, 2).add_raw(&[i, j], o, rat(c));
                }
            }
        }
    }
    s
}

/// Shifted spaces used by the random families: `U` and `V` each carry one
/// basis element in degrees 0, 1 and -1.
fn random_family_spaces() -> (GradedSpace, GradedSpace) {
    let u = GradedSpace::new(&[("x0", 0), ("x1", 1), ("x2", -1)]).expect("distinct");
    let v = GradedSpace::new(&[("a0", 0), ("a1", 1), ("a2", -1)]).expect("distinct");
    (u, v)
}

/// A linear square-zero coderivation: `x2 ↦ x0` on `U`, `a0 ↦ a1` on `V`,
/// and the component `U → V` with `x2 ↦ a0`, `x0 ↦ -a1`.
pub fn linear_seed() -> Structure {
    let (u, v) = random_family_spaces();
    let mut s = Structure::new(u, v, Grading::Uniform(1));
    s.map_mut(MapKind::L, 1, 0).add_raw(&[2], 0, rat(1));
    s.map_mut(MapKind::N, 0, 1).add_raw(&[0], 1, rat(1));
    s.map_mut(MapKind::N, 1, 0).add_raw(&[2], 0, rat(1));
    s.map_mut(MapKind::N, 1, 0).add_raw(&[0], 1, rat(-1));
    s
}

/// Degree-zero maps of arity `2..=max_arity` on the shifted spaces with
/// sparse small integer constants, graded symmetric in the `U`-inputs.
pub fn random_gauge<R: Rng>(rng: &mut R, u: &GradedSpace, v: &GradedSpace, max_arity: usize) -> Structure {
    let mut theta = Structure::new(u.clone(), v.clone(), Grading::Uniform(0));
    for total in 2..=max_arity {
        let mut keys = vec![(MapKind::L, total, 0)];
        keys.extend((0..=total).map(|p| (MapKind::N, p, total - p)));
        for (kind, p, q) in keys {
            for ls in multisets(u, p) {
                for as_ in tuples(v.dim(), q) {
                    let din: i64 =
                        ls.iter().map(|&i| u.degrees[i]).sum::<i64>() + as_.iter().map(|&i| v.degrees[i]).sum::<i64>();
                    let out_space = if kind == MapKind::L { u } else { v };
                    for o in 0..out_space.dim() {
                        if out_space.degrees[o] != din || !rng.gen_bool(0.35) {
                            continue;
                        }
                        let c: i64 = [-2, -1, 1, 2][rng.gen_range(0..4)];
                        let mut inputs = ls.clone();
                        inputs.extend(&as_);
                        theta.map_mut(kind, p, q).add_symmetric(&inputs, o, rat(c), &u.degrees);
                    }
                }
            }
        }
    }
    theta.maps.retain(|_, m| !m.is_zero());
    theta
}

fn apply_exp(theta: &Structure, x: &WordVec, sign: i64) -> WordVec {
    let mut out = x.clone();
    let mut term = x.clone();
    let mut k = 1i64;
    loop {
        term = apply_to_vec(theta, &term);
        if term.is_empty() {
            break;
        }
        let c = ratio(sign.pow(k as u32), (1..=k).product());
        for (w, x) in &term {
            add_word(&mut out, w.clone(), x * &c);
        }
        k += 1;
    }
    out
}

/// Components of `e^Θ D e^{-Θ}` up to arity `max_arity`, read off by
/// projecting onto words of length one.
pub fn conjugate(d: &Structure, theta: &Structure, max_arity: usize) -> Structure {
    let (u, v) = (&d.l, &d.a);
    let mut out = Structure::new(u.clone(), v.clone(), Grading::Uniform(1));
    for w in basis_words(u, v, max_arity) {
        let mut x = WordVec::new();
        x.insert(w.clone(), Coef::one());
        let y = apply_exp(theta, &apply_to_vec(d, &apply_exp(theta, &x, -1)), 1);
        let (p, q) = (w.sym.len(), w.ord.len());
        let mut inputs = w.sym.clone();
        inputs.extend(&w.ord);
        for (w2, c) in y {
            if w2.len() != 1 {
                continue;
            }
            let (kind, o) = if w2.sym.len() == 1 { (MapKind::L, w2.sym[0]) } else { (MapKind::N, w2.ord[0]) };
            if kind == MapKind::L && q > 0 {
                continue;
            }
            // The sorted word carries the map's value on its sorted tuple;
            // every other ordering follows by graded symmetry.
            out.map_mut(kind, p, q).add_symmetric(&inputs, o, c, &u.degrees);
        }
    }
    out.maps.retain(|_, m| !m.is_zero());
    out
}

/// Multiplies every basis element by a random nonzero scalar and transforms
/// the maps accordingly; degrees are untouched.
pub fn random_rescaling<R: Rng>(rng: &mut R, geo: &Structure) -> Structure {
    let choices = [ratio(1, 1), ratio(-1, 1), ratio(2, 1), ratio(-1, 2), ratio(3, 1)];
    let gl: Vec<Coef> = (0..geo.l.dim()).map(|_| choices[rng.gen_range(0..choices.len())].clone()).collect();
    let ga: Vec<Coef> = (0..geo.a.dim()).map(|_| choices[rng.gen_range(0..choices.len())].clone()).collect();
    let mut out = geo.clone();
    for (k, m) in &geo.maps {
        let t = m.map_values(|inputs, c, o| {
            let mut scale = if m.kind == MapKind::L { gl[o].clone() } else { ga[o].clone() };
            for (pos, &i) in inputs.iter().enumerate() {
                scale /= if pos < m.p { &gl[i] } else { &ga[i] };
            }
            c * scale
        });
        out.maps.insert(*k, t);
    }
    out
}

/// A structure satisfying every relation up to `max_arity` by construction:
/// a linear seed conjugated by a random gauge, transported back to the
/// geometric grading and rescaled.
pub fn random_valid_structure<R: Rng>(rng: &mut R, max_arity: usize) -> Result<Structure> {
    let seed = linear_seed();
    let theta = random_gauge(rng, &seed.l, &seed.a, max_arity);
    let alg = conjugate(&seed, &theta, max_arity);
    let geo = untransport(&alg)?;
    Ok(random_rescaling(rng, &geo))
}

/// Adds one to a single symmetrized constant of an arity-two map. Positions
/// are resampled until the relations break, so the result is a genuinely
/// invalid structure.
pub fn perturb<R: Rng>(rng: &mut R, geo: &Structure, max_arity: usize) -> Result<Option<Structure>> {
    let mut candidates = Vec::new();
    for (kind, p, q) in [(MapKind::L, 2, 0), (MapKind::N, 2, 0), (MapKind::N, 1, 1), (MapKind::N, 0, 2)] {
        let d = geo.expected_degree(kind, p, q);
        for ls in tuples(geo.l.dim(), p) {
            if ls.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            for as_ in tuples(geo.a.dim(), q) {
                let din: i64 = ls.iter().map(|&i| geo.l.degrees[i]).sum::<i64>()
                    + as_.iter().map(|&i| geo.a.degrees[i]).sum::<i64>();
                let out_space = if kind == MapKind::L { &geo.l } else { &geo.a };
                for o in 0..out_space.dim() {
                    let odd_repeat = p == 2 && ls[0] == ls[1] && geo.l.degrees[ls[0]] % 2 != 0;
                    if out_space.degrees[o] == din + d && !odd_repeat {
                        let mut inputs = ls.clone();
                        inputs.extend(&as_);
                        candidates.push((kind, p, q, inputs, o));
                    }
                }
            }
        }
    }
    for _ in 0..64 {
        if candidates.is_empty() {
            break;
        }
        let (kind, p, q, inputs, o) = candidates.swap_remove(rng.gen_range(0..candidates.len()));
        let mut s = geo.clone();
        let l_degrees = s.l.degrees.clone();
        s.map_mut(kind, p, q).add_symmetric(&inputs, o, rat(1), &l_degrees);
        if first_relation_failure(&s, max_arity)?.is_some() {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Suspension calculus on tensor words.

/// Tensor word of basis letters `(index, base degree, shift)`; the letter
/// has degree `base + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedTensor {
    pub sign: i32,
    pub letters: Vec<(usize, i64, i64)>,
}

impl ShiftedTensor {
    pub fn new(degrees: &[i64]) -> Self {
        Self { sign: 1, letters: degrees.iter().enumerate().map(|(i, &d)| (i, d, 0)).collect() }
    }

    fn degrees(&self) -> Vec<i64> {
        self.letters.iter().map(|l| l.1 + l.2).collect()
    }

    /// `s^{⊗n}` for a shift `s` of degree `by`: the `k`-th copy passes the
    /// first `k - 1` letters.
    pub fn shift_all(&self, by: i64) -> Self {
        let mut sign = self.sign;
        let mut before = 0;
        let mut letters = self.letters.clone();
        for l in letters.iter_mut() {
            sign *= parity_sign(by * before);
            before += l.1 + l.2;
            l.2 += by;
        }
        Self { sign, letters }
    }

    pub fn up(&self) -> Self {
        self.shift_all(1)
    }

    pub fn down(&self) -> Self {
        self.shift_all(-1)
    }

    /// `E(σ)`: `x_{σ(1)} ⊗ … ⊗ x_{σ(n)}` with the Koszul sign.
    pub fn symmetric_action(&self, perm: &[usize]) -> Self {
        let sign = self.sign * koszul(perm, &self.degrees());
        Self { sign, letters: perm.iter().map(|&k| self.letters[k]).collect() }
    }

    /// `A(σ)`: as `E(σ)` times the sign of `σ`.
    pub fn antisymmetric_action(&self, perm: &[usize]) -> Self {
        let e = self.symmetric_action(perm);
        Self { sign: e.sign * crate::signed::permutation_sign(perm), letters: e.letters }
    }
}

/// `↑^{⊗n} E(σ) ↓^{⊗n} = (-1)^{n(n-1)/2} A(σ)` on a word with the given degrees.
pub fn suspension_identity_holds(degrees: &[i64], perm: &[usize]) -> bool {
    let n = degrees.len() as i64;
    let expected_sign = parity_sign(n * (n - 1) / 2);
    let x = ShiftedTensor::new(degrees);
    let round = x.down().up();
    let lhs = x.down().symmetric_action(perm).up();
    let rhs = x.antisymmetric_action(perm);
    round.letters == x.letters
        && round.sign == expected_sign
        && lhs.letters == rhs.letters
        && lhs.sign == expected_sign * rhs.sign
}

// ---------------------------------------------------------------------------
// Brackets from a degree-one symmetric product.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GerstenhaberReport {
    pub jacobi: bool,
    pub antisymmetry: bool,
    pub shifted_jacobi: bool,
    pub failures: Vec<String>,
}

impl GerstenhaberReport {
    pub fn passed(&self) -> bool {
        self.jacobi && self.antisymmetry && self.shifted_jacobi
    }
}

fn bilinear(m: &GradedMap, x: &Vector, y: &Vector) -> Vector {
    let mut out = Vector::new();
    for (i, a) in x {
        for (j, b) in y {
            if let Some(v) = m.get(&[*i, *j]) {
                add_scaled(&mut out, v, &(a * b));
            }
        }
    }
    out
}

fn basis_vector(i: usize) -> Vector {
    let mut v = Vector::new();
    v.insert(i, Coef::one());
    v
}

fn scaled(v: &Vector, s: i32) -> Vector {
    v.iter().map(|(i, c)| (*i, c * rat(s as i64))).collect()
}

fn sum3(a: Vector, b: Vector, c: Vector) -> Vector {
    let mut out = a;
    add_scaled(&mut out, &b, &Coef::one());
    add_scaled(&mut out, &c, &Coef::one());
    out
}

/// Brute force over basis pairs and triples of a space with a graded
/// symmetric product `l2` of degree one. `twisted` selects the bracket
/// `[x,y] = (-1)^{|x|} l2(x,y)`; otherwise the untwisted `l2` itself.
pub fn gerstenhaber_sign_check(space: &GradedSpace, l2: &GradedMap, twisted: bool) -> GerstenhaberReport {
    let deg = |i: usize| space.degrees[i];
    let n = space.dim();
    let bracket_deg = |i: usize| if twisted { parity_sign(deg(i)) } else { 1 };
    let mut failures = Vec::new();
    let mut jacobi = true;
    let mut antisymmetry = true;
    let mut shifted_jacobi = true;
    // Bracket of basis vectors, then extended linearly on the left.
    let br = |i: usize, y: &Vector| -> Vector { scaled(&bilinear(l2, &basis_vector(i), y), bracket_deg(i)) };
    let br_vec = |x: &Vector, y: &Vector, xdeg: i64| -> Vector {
        let s = if twisted { parity_sign(xdeg) } else { 1 };
        scaled(&bilinear(l2, x, y), s)
    };
    for x in 0..n {
        for y in 0..n {
            let xy = br(x, &basis_vector(y));
            let yx = br(y, &basis_vector(x));
            let expected = scaled(&yx, -parity_sign((deg(x) - 1) * (deg(y) - 1)));
            if xy != expected {
                antisymmetry = false;
                failures.push(format!("antisymmetry fails on ({}, {})", space.names[x], space.names[y]));
            }
            for z in 0..n {
                let (dx, dy, dz) = (deg(x), deg(y), deg(z));
                let j = sum3(
                    scaled(
                        &bilinear(l2, &bilinear(l2, &basis_vector(x), &basis_vector(y)), &basis_vector(z)),
                        parity_sign(dx * dz),
                    ),
                    scaled(
                        &bilinear(l2, &bilinear(l2, &basis_vector(y), &basis_vector(z)), &basis_vector(x)),
                        parity_sign(dx * dy),
                    ),
                    scaled(
                        &bilinear(l2, &bilinear(l2, &basis_vector(z), &basis_vector(x)), &basis_vector(y)),
                        parity_sign(dy * dz),
                    ),
                );
                if !j.is_empty() {
                    jacobi = false;
                    failures
                        .push(format!("Jacobi fails on ({}, {}, {})", space.names[x], space.names[y], space.names[z]));
                }
                let l2d = l2.degree;
                let sj = sum3(
                    scaled(
                        &br_vec(&br(x, &basis_vector(y)), &basis_vector(z), dx + dy + l2d),
                        parity_sign((dx - 1) * (dz - 1)),
                    ),
                    scaled(
                        &br_vec(&br(y, &basis_vector(z)), &basis_vector(x), dy + dz + l2d),
                        parity_sign((dx - 1) * (dy - 1)),
                    ),
                    scaled(
                        &br_vec(&br(z, &basis_vector(x)), &basis_vector(y), dz + dx + l2d),
                        parity_sign((dy - 1) * (dz - 1)),
                    ),
                );
                if !sj.is_empty() {
                    shifted_jacobi = false;
                    failures.push(format!(
                        "shifted Jacobi fails on ({}, {}, {})",
                        space.names[x], space.names[y], space.names[z]
                    ));
                }
            }
        }
    }
    GerstenhaberReport { jacobi, antisymmetry, shifted_jacobi, failures }
}

/// Two-dimensional example: `x` of degree -1, `e` of degree 0, with
/// `l2(x, e) = l2(e, x) = e`.
pub fn mixed_parity_example() -> (GradedSpace, GradedMap) {
    let space = GradedSpace::new(&[("x", -1), ("e", 0)]).expect("distinct");
    let mut l2 = GradedMap::new(MapKind::L, 2, 0, 1);
    l2.add_raw(&[0, 1], 1, rat(1));
    l2.add_raw(&[1, 0], 1, rat(1));
    (space, l2)
}

//! Tree complexes graded by chain degree `m = -degree`, exact ranks by
//! fraction-free sparse column reduction, Betti numbers, f-vectors and the
//! coboundary test with preimage witnesses.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::differential::d_tree_terms;
use crate::error::{ForgeError, Result};
use crate::signed::{Coef, FormalSum};
use crate::tree::{codim_counts, enumerate_planar_rooted, enumerate_spatial_rooted, Tree};

/// Rayon pool sized by `OPERAD_FORGE_THREADS` when set.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("OPERAD_FORGE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
            if n > 0 {
                b = b.num_threads(n);
            }
        }
        b.build().expect("thread pool")
    })
}

// ---------------------------------------------------------------------------
// Sparse integer vectors and column reduction.

/// Sparse vector: strictly increasing indices, no zero entries.
pub type SparseVec = Vec<(usize, BigInt)>;

/// `a*x - b*y`.
fn combine(a: &BigInt, x: &[(usize, BigInt)], b: &BigInt, y: &[(usize, BigInt)]) -> SparseVec {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push((x[i].0, a * &x[i].1));
            i += 1;
        } else if take_y {
            out.push((y[j].0, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn content(vs: &[&SparseVec]) -> BigInt {
    let mut g = BigInt::zero();
    for v in vs {
        for (_, c) in v.iter() {
            g = g.gcd(c);
            if g.is_one() {
                return g;
            }
        }
    }
    g
}

fn divide(v: &mut SparseVec, g: &BigInt) {
    for (_, c) in v.iter_mut() {
        *c /= g;
    }
}

struct Pivot {
    vector: SparseVec,
    /// Original columns whose combination is `vector`; empty unless tracked.
    combination: SparseVec,
}

/// Incremental column echelon form over the integers. Pivots are keyed by
/// the smallest row index of their reduced column.
pub struct ColumnReducer {
    pivots: HashMap<usize, Pivot>,
    track: bool,
    columns: usize,
}

impl ColumnReducer {
    /// With `track`, every pivot remembers which input columns produced it,
    /// which is what [`ColumnReducer::solve`] needs for witnesses.
    pub fn new(track: bool) -> Self {
        Self { pivots: HashMap::new(), track, columns: 0 }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the current pivots. Returns the residual, the
    /// scale `s` and combination `w` with `s*v - M*w = residual`.
    fn reduce(&self, mut v: SparseVec, mut w: SparseVec, track: bool) -> (SparseVec, BigInt, SparseVec) {
        let mut scale = BigInt::one();
        while let Some((lead, b)) = v.first().cloned() {
            let Some(p) = self.pivots.get(&lead) else { break };
            let a = p.vector[0].1.clone();
            let g = a.gcd(&b);
            let (a, b) = (&a / &g, &b / &g);
            v = combine(&a, &v, &b, &p.vector);
            if track {
                w = combine(&a, &w, &(-&b), &p.combination);
                scale *= &a;
            }
            if !track {
                let g = content(&[&v]);
                if !g.is_zero() && !g.is_one() {
                    divide(&mut v, &g);
                }
            }
        }
        (v, scale, w)
    }

    /// Adds a column; returns whether it raised the rank.
    pub fn push(&mut self, column: SparseVec) -> bool {
        let id = self.columns;
        self.columns += 1;
        let w = if self.track { vec![(id, BigInt::one())] } else { Vec::new() };
        let (mut v, _, mut w) = self.reduce(column, w, self.track);
        if v.is_empty() {
            return false;
        }
        let g = content(&[&v, &w]);
        if !g.is_one() {
            divide(&mut v, &g);
            divide(&mut w, &g);
        }
        self.pivots.insert(v[0].0, Pivot { vector: v, combination: w });
        true
    }

    /// Rational `w` with `M*w = target` over the pushed columns, if any.
    pub fn solve(&self, target: SparseVec) -> Option<Vec<(usize, BigRational)>> {
        assert!(self.track, "solve needs a tracking reducer");
        let (v, scale, w) = self.reduce(target, Vec::new(), true);
        if !v.is_empty() {
            return None;
        }
        Some(w.into_iter().map(|(i, c)| (i, BigRational::new(c, scale.clone()))).collect())
    }
}

/// Exact rank of a matrix given by sparse integer columns.
pub fn exact_rank(columns: &[SparseVec]) -> usize {
    let mut r = ColumnReducer::new(false);
    for c in columns {
        r.push(c.clone());
    }
    r.rank()
}

/// Clears denominators of a rational sparse vector; the scale is positive.
pub fn integral(v: &[(usize, BigRational)]) -> (SparseVec, BigInt) {
    let mut l = BigInt::one();
    for (_, c) in v {
        l = l.lcm(c.denom());
    }
    let out = v.iter().map(|(i, c)| (*i, c.numer() * (&l / c.denom()))).collect();
    (out, l)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComplexKind {
    /// Planar-rooted trees on `p` spatial and `q` planar leaves.
    Planar { p: usize, q: usize },
    /// Spatial-rooted trees on `n` leaves.
    Spatial { n: usize },
}

pub struct ChainComplex {
    pub kind: ComplexKind,
    /// `bases[m]` lists the trees of degree `-m`.
    pub bases: Vec<Vec<Tree>>,
    index: HashMap<Tree, (usize, usize)>,
    /// `differentials[m]` maps chain degree `m` to `m - 1`, stored by column;
    /// `differentials[0]` is empty.
    pub differentials: Vec<Vec<SparseVec>>,
    reducers: Vec<OnceLock<ColumnReducer>>,
    ranks: Vec<OnceLock<usize>>,
}

impl ChainComplex {
    pub fn planar(p: usize, q: usize) -> Result<Self> {
        let trees = enumerate_planar_rooted(p, q, None)?;
        Ok(Self::from_trees(ComplexKind::Planar { p, q }, trees))
    }

    pub fn spatial(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(ForgeError::InvalidArity(format!("spatial complex needs n >= 2, got {n}")));
        }
        let trees = enumerate_spatial_rooted(n)?;
        Ok(Self::from_trees(ComplexKind::Spatial { n }, trees))
    }

    fn from_trees(kind: ComplexKind, trees: Vec<Tree>) -> Self {
        let top = trees.iter().map(|t| t.chain_degree()).max().unwrap_or(0).max(0) as usize;
        let mut bases: Vec<Vec<Tree>> = vec![Vec::new(); top + 1];
        for t in trees {
            bases[t.chain_degree() as usize].push(t);
        }
        let mut index = HashMap::new();
        for (m, b) in bases.iter().enumerate() {
            for (i, t) in b.iter().enumerate() {
                index.insert(t.clone(), (m, i));
            }
        }
        let differentials: Vec<Vec<SparseVec>> = pool().install(|| {
            bases
                .iter()
                .enumerate()
                .map(|(m, b)| {
                    if m == 0 {
                        return Vec::new();
                    }
                    b.par_iter().map(|t| column(&index, t, m - 1)).collect()
                })
                .collect()
        });
        let reducers = (0..=top).map(|_| OnceLock::new()).collect();
        let ranks = (0..=top).map(|_| OnceLock::new()).collect();
        Self { kind, bases, index, differentials, reducers, ranks }
    }

    pub fn top_degree(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    pub fn position(&self, t: &Tree) -> Option<(usize, usize)> {
        self.index.get(t).copied()
    }

    fn reducer(&self, m: usize) -> &ColumnReducer {
        self.reducers[m].get_or_init(|| {
            let mut r = ColumnReducer::new(true);
            for c in &self.differentials[m] {
                r.push(c.clone());
            }
            r
        })
    }

    /// Rank of the differential leaving chain degree `m`.
    pub fn rank(&self, m: usize) -> usize {
        if m == 0 || m > self.top_degree() {
            return 0;
        }
        if let Some(r) = self.reducers[m].get() {
            return r.rank();
        }
        *self.ranks[m].get_or_init(|| exact_rank(&self.differentials[m]))
    }

    /// `b_m = dim_m - rank M_m - rank M_{m+1}`.
    pub fn betti(&self) -> Vec<usize> {
        let ranks: Vec<usize> =
            pool().install(|| (0..=self.top_degree() + 1).into_par_iter().map(|m| self.rank(m)).collect());
        (0..=self.top_degree()).map(|m| self.bases[m].len() - ranks[m] - ranks[m + 1]).collect()
    }

    /// Products of consecutive differentials, all of which must vanish.
    pub fn square_is_zero(&self) -> bool {
        (2..=self.top_degree()).all(|m| {
            self.differentials[m].par_iter().all(|col| {
                let mut acc: HashMap<usize, BigInt> = HashMap::new();
                for (row, c) in col {
                    for (r2, c2) in &self.differentials[m - 1][*row] {
                        *acc.entry(*r2).or_default() += c * c2;
                    }
                }
                acc.values().all(Zero::is_zero)
            })
        })
    }

    /// Coordinates of `x` in the basis of chain degree `m`.
    pub fn coordinates(&self, x: &FormalSum, m: usize) -> Result<Vec<(usize, BigRational)>> {
        let mut out = Vec::with_capacity(x.len());
        for (t, c) in x.iter() {
            match self.index.get(t) {
                Some(&(mt, i)) if mt == m => out.push((i, c.clone())),
                Some(&(mt, _)) => return Err(ForgeError::MixedDegree(-(m as i64), -(mt as i64))),
                None => return Err(ForgeError::InvalidStructure(format!("{t} is not a basis tree of this complex"))),
            }
        }
        out.sort_by_key(|e| e.0);
        Ok(out)
    }

    pub fn sum_from(&self, m: usize, coords: &[(usize, BigRational)]) -> FormalSum {
        let mut out = FormalSum::zero();
        for (i, c) in coords {
            out.add_term(self.bases[m][*i].clone(), c.clone());
        }
        out
    }

    /// Whether `x` lies in the image of `M_{m+1}`, with a preimage.
    pub fn is_coboundary(&self, x: &FormalSum, m: usize) -> Result<Option<FormalSum>> {
        if x.is_zero() {
            return Ok(Some(FormalSum::zero()));
        }
        let coords = self.coordinates(x, m)?;
        if m + 1 > self.top_degree() {
            return Ok(None);
        }
        let (target, scale) = integral(&coords);
        let solved = self.reducer(m + 1).solve(target);
        Ok(solved.map(|w| {
            let w: Vec<(usize, BigRational)> =
                w.into_iter().map(|(i, c)| (i, c / BigRational::from_integer(scale.clone()))).collect();
            self.sum_from(m + 1, &w)
        }))
    }

    /// Rank of the span of `classes` (cycles of chain degree `m`) modulo
    /// coboundaries.
    pub fn rank_modulo_boundaries(&self, classes: &[FormalSum], m: usize) -> Result<usize> {
        let mut r = ColumnReducer::new(false);
        if m < self.top_degree() {
            for c in &self.differentials[m + 1] {
                r.push(c.clone());
            }
        }
        let base = r.rank();
        for x in classes {
            let (v, _) = integral(&self.coordinates(x, m)?);
            r.push(v);
        }
        Ok(r.rank() - base)
    }
}

fn column(index: &HashMap<Tree, (usize, usize)>, t: &Tree, target: usize) -> SparseVec {
    let mut acc: HashMap<usize, i64> = HashMap::new();
    for (s, u) in d_tree_terms(t) {
        let (m, i) = index[&u];
        debug_assert_eq!(m, target);
        *acc.entry(i).or_default() += s as i64;
    }
    let mut v: SparseVec = acc.into_iter().filter(|e| e.1 != 0).map(|(i, c)| (i, BigInt::from(c))).collect();
    v.sort_by_key(|e| e.0);
    v
}

// ---------------------------------------------------------------------------

pub fn f_vector(p: usize, q: usize) -> Result<Vec<usize>> {
    Ok(codim_counts(&enumerate_planar_rooted(p, q, None)?))
}

pub fn euler_characteristic(p: usize, q: usize) -> Result<i64> {
    Ok(euler_by_dimension(&f_vector(p, q)?, 2 * p + q - 2))
}

/// Alternates by cell dimension `top - codim`, not by codimension.
pub fn euler_by_dimension(f_vector: &[usize], top: usize) -> i64 {
    let chi = alternating_sum(f_vector);
    if top.is_multiple_of(2) {
        chi
    } else {
        -chi
    }
}

pub fn alternating_sum(v: &[usize]) -> i64 {
    v.iter().enumerate().map(|(k, &f)| if k % 2 == 0 { f as i64 } else { -(f as i64) }).sum()
}

pub fn betti(p: usize, q: usize) -> Result<Vec<usize>> {
    Ok(ChainComplex::planar(p, q)?.betti())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub p: usize,
    pub q: usize,
    pub f_vector: Vec<usize>,
    pub betti: Vec<usize>,
    pub euler: i64,
}

impl HomologyReport {
    pub fn compute(p: usize, q: usize) -> Result<Self> {
        let c = ChainComplex::planar(p, q)?;
        let trees: Vec<Tree> = c.bases.iter().flatten().cloned().collect();
        let f_vector = codim_counts(&trees);
        let euler = euler_by_dimension(&f_vector, 2 * p + q - 2);
        Ok(Self { p, q, betti: c.betti(), f_vector, euler })
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Converts a rational known to be integral.
pub fn to_i64(c: &Coef) -> Option<i64> {
    if c.is_integer() {
        c.numer().to_i64()
    } else {
        None
    }
}

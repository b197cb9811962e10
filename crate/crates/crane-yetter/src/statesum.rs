//! The Crane–Yetter state sum, contracted simplex by simplex along an
//! elimination order.
//!
//! Partial sums live in sorted tables keyed by the packed labels of the open
//! triangles and tetrahedra. Each variable keeps one key position for its
//! whole lifetime. When a table would not fit in the memory cap, a few
//! long-lived triangles are pinned and the sum is taken slice by slice.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fixed::{Fixed, FixedRing};
use crate::network::{fifteen_j, SimplexColouring};
use crate::qcategory::{Label, QuantumData};
use crate::scalars::{ComplexF, Cyclo};
use crate::simplicial::{Triangulation, TriangulationError};

/// Default bound on the memory held by frontier tables.
pub const DEFAULT_MEM_CAP: usize = 2 << 30;

const KEY_WORDS: usize = 4;
const MAX_PINS: usize = 12;
/// Above this many top simplices the planner only counts open labels.
const PARITY_PLANNER_LIMIT: usize = 200;
/// Complexes with at most this many top simplices get an exhaustive search
/// over elimination orders.
const EXACT_ORDER_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateSumError {
    #[error("triangulation is not closed")]
    NotClosed,
    #[error("triangulation is not orientable")]
    NonOrientable,
    #[error("the state sum needs a simplicial complex, not a Δ-complex")]
    DeltaComplexUnsupported,
    #[error("contraction plan does not belong to this triangulation")]
    PlanMismatch,
    #[error("frontier table of {states} states at step {step} exceeds the memory cap of {cap} bytes")]
    PlanTooWide { step: usize, states: usize, cap: usize },
}

impl From<TriangulationError> for StateSumError {
    fn from(e: TriangulationError) -> Self {
        match e {
            TriangulationError::NotClosed(_) => StateSumError::NotClosed,
            _ => StateSumError::NonOrientable,
        }
    }
}

/// A variable of the state sum: a triangle or a tetrahedron, by cell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    Tri(usize),
    Tet(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionPlan {
    /// Top simplices in elimination order.
    pub order: Vec<usize>,
    /// Open variables after each step.
    pub frontier: Vec<Vec<Var>>,
    /// After each step, the dimension over Z/2 of the label parities the
    /// open triangles can take. Parities of triangle labels form a
    /// 2-cocycle at every level.
    pub parity_rank: Vec<usize>,
    fingerprint: u64,
}

impl ContractionPlan {
    pub fn max_frontier(&self) -> usize {
        self.frontier.iter().map(|f| f.len()).max().unwrap_or(0)
    }

    /// Largest number of open tetrahedra over all steps.
    pub fn max_open_tets(&self) -> usize {
        self.frontier.iter().map(|f| f.iter().filter(|v| matches!(v, Var::Tet(_))).count()).max().unwrap_or(0)
    }

    /// Upper bound on the partial colourings held after each step, for a
    /// label set of the given size.
    pub fn step_bounds(&self, labels: usize) -> Vec<f64> {
        let per_parity = labels.div_ceil(2) as f64;
        self.frontier
            .iter()
            .zip(&self.parity_rank)
            .map(|(f, &p)| {
                let naive = (labels as f64).powi(f.len() as i32);
                naive.min(2f64.powi(p as i32) * per_parity.powi(f.len() as i32))
            })
            .collect()
    }

    /// Upper bound on the number of partial colourings, summed over steps.
    pub fn cost(&self, labels: usize) -> f64 {
        self.step_bounds(labels).iter().sum()
    }
}

fn fingerprint(t: &Triangulation) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    t.simplices().hash(&mut h);
    h.finish()
}

/// `(i, j)` with `i < j`, in the order of the ten triangle slots.
const TRI_SLOTS: [(usize, usize); 10] = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// The fifteen variables of top simplex `k`: ten triangles, then the five
/// tetrahedra, the `i`-th omitting vertex `i`.
fn local_vars(t: &Triangulation, k: usize) -> [Var; 15] {
    let top = &t.cells(4)[k];
    let mut v = [Var::Tri(0); 15];
    for (s, &(i, j)) in TRI_SLOTS.iter().enumerate() {
        v[s] = Var::Tri(t.cells(3)[top.faces[i]].faces[j - 1]);
    }
    for i in 0..5 {
        v[10 + i] = Var::Tet(top.faces[i]);
    }
    v
}

type Bits = Vec<u64>;

fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

/// Rank over Z/2 of `rows` with the columns outside `mask` deleted.
fn rank_masked(rows: &[Bits], mask: &Bits) -> usize {
    let mut basis: Vec<Bits> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for r in rows {
        let mut v: Bits = r.iter().zip(mask).map(|(a, b)| a & b).collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= y;
                }
            }
        }
        if let Some(w) = v.iter().position(|&x| x != 0) {
            let p = w * 64 + v[w].trailing_zeros() as usize;
            basis.push(v);
            pivots.push(p);
        }
    }
    basis.len()
}

/// Parity constraints: each tetrahedron's four face labels sum to an even
/// number.
struct Parity {
    words: usize,
    tet_rows: Vec<Bits>,
}

impl Parity {
    fn new(t: &Triangulation) -> Parity {
        let words = t.cells(2).len().div_ceil(64).max(1);
        let tet_rows = t
            .cells(3)
            .iter()
            .map(|c| {
                let mut b = vec![0u64; words];
                for &f in &c.faces {
                    bit_set(&mut b, f);
                }
                b
            })
            .collect();
        Parity { words, tet_rows }
    }

    /// Dimension of the parities of `open` tris that extend to the processed
    /// complex with the pinned tris held fixed.
    fn image_dim(&self, rows: &[Bits], open: &[usize], pinned: &[usize]) -> usize {
        let mut not_z = vec![!0u64; self.words];
        for &z in pinned {
            not_z[z / 64] &= !(1 << (z % 64));
        }
        let mut not_fz = not_z.clone();
        let mut free = 0;
        for &f in open {
            if not_fz[f / 64] >> (f % 64) & 1 == 1 {
                free += 1;
                not_fz[f / 64] &= !(1 << (f % 64));
            }
        }
        free + rank_masked(rows, &not_fz) - rank_masked(rows, &not_z)
    }
}

struct PlanState<'a> {
    t: &'a Triangulation,
    locals: Vec<[Var; 15]>,
    remaining: HashMap<Var, usize>,
    open: BTreeSet<Var>,
    rows: Vec<Bits>,
}

impl<'a> PlanState<'a> {
    fn new(t: &'a Triangulation) -> Self {
        let n = t.cells(4).len();
        let locals: Vec<[Var; 15]> = (0..n).map(|k| local_vars(t, k)).collect();
        let mut remaining: HashMap<Var, usize> = HashMap::new();
        for vs in &locals {
            for v in vs {
                *remaining.entry(*v).or_default() += 1;
            }
        }
        PlanState { t, locals, remaining, open: BTreeSet::new(), rows: Vec::new() }
    }

    /// Open variables after taking simplex `k`.
    fn open_after(&self, k: usize) -> BTreeSet<Var> {
        let mut o = self.open.clone();
        for v in &self.locals[k] {
            if self.remaining[v] > 1 {
                o.insert(*v);
            } else {
                o.remove(v);
            }
        }
        o
    }

    fn take(&mut self, k: usize, parity: &Parity) {
        self.open = self.open_after(k);
        for v in &self.locals[k] {
            *self.remaining.get_mut(v).unwrap() -= 1;
        }
        for i in 0..5 {
            self.rows.push(parity.tet_rows[self.t.cells(4)[k].faces[i]].clone());
        }
    }

    fn rows_with(&self, k: usize, p: &Parity) -> Vec<Bits> {
        let mut rows = self.rows.clone();
        rows.extend((0..5).map(|i| p.tet_rows[self.t.cells(4)[k].faces[i]].clone()));
        rows
    }
}

fn open_tris<'a>(o: impl IntoIterator<Item = &'a Var>) -> Vec<usize> {
    o.into_iter()
        .filter_map(|v| match v {
            Var::Tri(x) => Some(*x),
            _ => None,
        })
        .collect()
}

/// Elimination order for the contraction. Small complexes get the order
/// minimising the sum over steps of `3^open`, found by dynamic programming
/// over subsets. Larger ones are ordered greedily: repeatedly take the
/// simplex that leaves the fewest parity classes of open labels, then the
/// fewest open labels, ties going to the lexicographically least vertex
/// tuple.
pub fn plan_contraction(t: &Triangulation) -> ContractionPlan {
    let n = t.cells(4).len();
    let parity = Parity::new(t);
    let use_parity = n <= PARITY_PLANNER_LIMIT;
    let order = if n <= EXACT_ORDER_LIMIT { exact_order(t) } else { greedy_order(t, &parity, use_parity) };
    let mut st = PlanState::new(t);
    let mut frontier = Vec::with_capacity(n);
    let mut parity_rank = Vec::with_capacity(n);
    for &k in &order {
        st.take(k, &parity);
        parity_rank.push(if use_parity { parity.image_dim(&st.rows, &open_tris(&st.open), &[]) } else { open_tris(&st.open).len() });
        frontier.push(st.open.iter().copied().collect());
    }
    ContractionPlan { order, frontier, parity_rank, fingerprint: fingerprint(t) }
}

fn exact_order(t: &Triangulation) -> Vec<usize> {
    let n = t.cells(4).len();
    let locals: Vec<[Var; 15]> = (0..n).map(|k| local_vars(t, k)).collect();
    let mut index: HashMap<Var, usize> = HashMap::new();
    for v in locals.iter().flatten() {
        let next = index.len();
        index.entry(*v).or_insert(next);
    }
    let mut total = vec![0u32; index.len()];
    let members: Vec<Vec<usize>> = locals.iter().map(|vs| vs.iter().map(|v| index[v]).collect()).collect();
    for &i in members.iter().flatten() {
        total[i] += 1;
    }
    let full = (1usize << n) - 1;
    let open_count = |set: usize| {
        let mut seen = vec![0u32; total.len()];
        for (k, m) in members.iter().enumerate() {
            if set >> k & 1 == 1 {
                for &i in m {
                    seen[i] += 1;
                }
            }
        }
        seen.iter().zip(&total).filter(|(s, t)| **s > 0 && s < t).count()
    };
    let mut best = vec![(f64::INFINITY, usize::MAX); full + 1];
    best[0] = (0.0, usize::MAX);
    for set in 0..full {
        let (c, _) = best[set];
        if c.is_infinite() {
            continue;
        }
        for k in (0..n).filter(|k| set >> k & 1 == 0) {
            let next = set | 1 << k;
            let cost = c + 3f64.powi(open_count(next) as i32);
            if cost < best[next].0 {
                best[next] = (cost, k);
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut set = full;
    while set != 0 {
        let k = best[set].1;
        order.push(k);
        set &= !(1 << k);
    }
    order.reverse();
    order
}

fn greedy_order(t: &Triangulation, parity: &Parity, use_parity: bool) -> Vec<usize> {
    let n = t.cells(4).len();
    let mut st = PlanState::new(t);
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        // simplices touching the frontier, or all of them when it is empty
        let touching: Vec<usize> = (0..n).filter(|&k| !done[k] && st.locals[k].iter().any(|v| st.open.contains(v))).collect();
        let candidates = if touching.is_empty() { (0..n).filter(|&k| !done[k]).collect() } else { touching };
        let mut best: Option<((usize, usize), usize)> = None;
        for k in candidates {
            let o = st.open_after(k);
            let score = if use_parity { parity.image_dim(&st.rows_with(k, parity), &open_tris(&o), &[]) } else { o.len() };
            let key = (score, o.len());
            let better = match best {
                None => true,
                Some((bk, bi)) => key < bk || (key == bk && t.cells(4)[k].vertices < t.cells(4)[bi].vertices),
            };
            if better {
                best = Some((key, k));
            }
        }
        let (_, k) = best.expect("a simplex remains");
        done[k] = true;
        order.push(k);
        st.take(k, parity);
    }
    order
}

/// Parity ranks along `order` with the given triangles pinned.
fn pinned_parity_profile(t: &Triangulation, order: &[usize], pins: &[usize]) -> Vec<usize> {
    let parity = Parity::new(t);
    let mut st = PlanState::new(t);
    order
        .iter()
        .map(|&k| {
            st.take(k, &parity);
            parity.image_dim(&st.rows, &open_tris(&st.open), pins)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct StateSumOptions {
    pub mem_cap_bytes: usize,
    pub threads: usize,
}

impl Default for StateSumOptions {
    fn default() -> Self {
        StateSumOptions { mem_cap_bytes: DEFAULT_MEM_CAP, threads: 1 }
    }
}

/// Tetrahedron weight `Δ_t / (θ(f₀,f₂,t) θ(f₁,f₃,t))` with `fᵢ` the face
/// opposite its i-th vertex; zero when either vertex is inadmissible.
pub fn tet_weight(q: &QuantumData, f: [Label; 4], t: Label) -> Cyclo {
    if !(q.adm(f[0], f[2], t) && q.adm(f[1], f[3], t)) {
        return Cyclo::zero(q.conductor());
    }
    q.qdim(t) * q.theta_inv(f[0], f[2], t) * q.theta_inv(f[1], f[3], t)
}

/// Whether the simplex network of a top simplex with the given sign is the
/// mirrored one.
pub fn mirrored(sign: i8) -> bool {
    sign < 0
}

type Key = [u64; KEY_WORDS];

#[derive(Debug, Clone, Copy)]
struct Packing {
    bits: u32,
    per_word: usize,
    mask: u64,
}

impl Packing {
    fn new(max_label: Label) -> Packing {
        let bits = (8 - max_label.leading_zeros()).max(1);
        Packing { bits, per_word: 64 / bits as usize, mask: (1 << bits) - 1 }
    }

    fn capacity(&self) -> usize {
        self.per_word * KEY_WORDS
    }

    fn loc(&self, pos: usize) -> (usize, u32) {
        (pos / self.per_word, (pos % self.per_word) as u32 * self.bits)
    }

    fn get(&self, k: &Key, pos: usize) -> Label {
        let (w, s) = self.loc(pos);
        (k[w] >> s & self.mask) as Label
    }

    fn put(&self, k: &mut Key, pos: usize, v: Label) {
        let (w, s) = self.loc(pos);
        k[w] = (k[w] & !(self.mask << s)) | (v as u64) << s;
    }
}

/// Exact arithmetic used for table values.
trait Arith: Sync {
    type V: Clone + Send + Sync;
    fn lift(&self, c: &Cyclo) -> Option<Self::V>;
    fn lower(&self, v: &Self::V) -> Cyclo;
    fn one(&self) -> Self::V;
    fn is_zero(&self, v: &Self::V) -> bool;
    fn add_assign(&self, a: &mut Self::V, b: &Self::V) -> Option<()>;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Option<Self::V>;
    /// Heap bytes owned by one value, beyond its inline size.
    fn heap_bytes(&self) -> usize;
}

struct Big {
    m: u32,
    phi: usize,
}

impl Arith for Big {
    type V = Cyclo;
    fn lift(&self, c: &Cyclo) -> Option<Cyclo> {
        Some(c.clone())
    }
    fn lower(&self, v: &Cyclo) -> Cyclo {
        v.clone()
    }
    fn one(&self) -> Cyclo {
        Cyclo::one(self.m)
    }
    fn is_zero(&self, v: &Cyclo) -> bool {
        v.is_zero()
    }
    fn add_assign(&self, a: &mut Cyclo, b: &Cyclo) -> Option<()> {
        *a += b;
        Some(())
    }
    fn mul(&self, a: &Cyclo, b: &Cyclo) -> Option<Cyclo> {
        Some(a * b)
    }
    fn heap_bytes(&self) -> usize {
        32 * (self.phi + 1)
    }
}

impl<const P: usize> Arith for FixedRing<P> {
    type V = Fixed<P>;
    fn lift(&self, c: &Cyclo) -> Option<Fixed<P>> {
        FixedRing::lift(self, c)
    }
    fn lower(&self, v: &Fixed<P>) -> Cyclo {
        FixedRing::lower(self, v)
    }
    fn one(&self) -> Fixed<P> {
        FixedRing::one(self)
    }
    fn is_zero(&self, v: &Fixed<P>) -> bool {
        v.is_zero()
    }
    fn add_assign(&self, a: &mut Fixed<P>, b: &Fixed<P>) -> Option<()> {
        *a = self.add(a, b)?;
        Some(())
    }
    fn mul(&self, a: &Fixed<P>, b: &Fixed<P>) -> Option<Fixed<P>> {
        FixedRing::mul(self, a, b)
    }
    fn heap_bytes(&self) -> usize {
        0
    }
}

enum Abort {
    Overflow,
    Memory { step: usize, states: usize },
    TooWide { step: usize },
}

/// One elimination step, independent of slicing.
struct Step {
    mirror: bool,
    vars: [Var; 15],
    /// Face slots of each tetrahedron slot, in the tetrahedron's face order.
    tet_faces: [[usize; 4]; 5],
    /// `(slot, key position)` of variables already open.
    old: Vec<(usize, usize)>,
    /// Slots of variables introduced here.
    new: Vec<usize>,
    /// `new` reordered so each tetrahedron follows its last face.
    sched: Vec<usize>,
    /// `(slot, key position)` of introduced variables that stay open.
    fresh: Vec<(usize, usize)>,
    /// Key bits of the variables that stay open.
    keep: Key,
}

struct Ctx<'a> {
    q: &'a QuantumData,
    pack: Packing,
    steps: Vec<Step>,
    memo: Mutex<HashMap<SimplexColouring, Cyclo>>,
    threads: usize,
}

fn build_steps(t: &Triangulation, signs: &[i8], order: &[usize], pack: &Packing) -> Result<Vec<Step>, Abort> {
    let n4 = t.cells(4).len();
    let locals: Vec<[Var; 15]> = (0..n4).map(|k| local_vars(t, k)).collect();
    let mut remaining: HashMap<Var, usize> = HashMap::new();
    for l in &locals {
        for v in l {
            *remaining.entry(*v).or_default() += 1;
        }
    }
    let mut pos: HashMap<Var, usize> = HashMap::new();
    let mut free: BTreeSet<usize> = (0..pack.capacity()).collect();
    let mut steps = Vec::with_capacity(n4);
    for (si, &k) in order.iter().enumerate() {
        let vars = locals[k];
        let top = &t.cells(4)[k];
        let mut tet_faces = [[0usize; 4]; 5];
        for (i, tf) in tet_faces.iter_mut().enumerate() {
            let cell = &t.cells(3)[top.faces[i]];
            for (f, slot) in tf.iter_mut().enumerate() {
                *slot = (0..10).find(|&s| vars[s] == Var::Tri(cell.faces[f])).expect("face of a face");
            }
        }
        let mut old = Vec::new();
        let mut new = Vec::new();
        for (s, v) in vars.iter().enumerate() {
            match pos.get(v) {
                Some(&p) => old.push((s, p)),
                None => new.push(s),
            }
        }
        for v in &vars {
            *remaining.get_mut(v).unwrap() -= 1;
        }
        for &(s, p) in &old {
            if remaining[&vars[s]] == 0 {
                pos.remove(&vars[s]);
                free.insert(p);
            }
        }
        let mut fresh = Vec::new();
        for &s in &new {
            if remaining[&vars[s]] > 0 {
                let p = free.pop_first().ok_or(Abort::TooWide { step: si })?;
                pos.insert(vars[s], p);
                fresh.push((s, p));
            }
        }
        let mut keep = [!0u64; KEY_WORDS];
        for &(s, p) in &old {
            if remaining[&vars[s]] == 0 {
                pack.put(&mut keep, p, 0);
            }
        }
        let mut sched = Vec::with_capacity(new.len());
        let mut known: Vec<bool> = (0..15).map(|x| !new.contains(&x)).collect();
        for &x in new.iter().filter(|&&x| x < 10) {
            sched.push(x);
            known[x] = true;
            for (i, tf) in tet_faces.iter().enumerate() {
                if !known[10 + i] && tf.iter().all(|&f| known[f]) {
                    sched.push(10 + i);
                    known[10 + i] = true;
                }
            }
        }
        sched.extend(new.iter().filter(|&&x| !known[x]));
        steps.push(Step { mirror: mirrored(signs[k]), vars, tet_faces, old, new, sched, fresh, keep });
    }
    Ok(steps)
}

type Completions<V> = Vec<(Key, V)>;

/// Local weights already lifted into the table arithmetic.
struct Lifted<V> {
    dims: Vec<V>,
    tets: HashMap<([Label; 4], Label), V>,
    amps: HashMap<(SimplexColouring, bool), Option<V>>,
}

impl<V> Lifted<V> {
    fn new<A: Arith<V = V>>(ar: &A, q: &QuantumData) -> Result<Self, Abort> {
        let dims = q.labels().map(|l| ar.lift(q.qdim(l)).ok_or(Abort::Overflow)).collect::<Result<_, _>>()?;
        Ok(Lifted { dims, tets: HashMap::new(), amps: HashMap::new() })
    }
}

impl Ctx<'_> {
    fn amplitude(&self, c: &SimplexColouring, mirror: bool) -> Cyclo {
        let cached = self.memo.lock().unwrap().get(c).cloned();
        let v = match cached {
            Some(v) => v,
            None => {
                let v = fifteen_j(self.q, c, false);
                self.memo.lock().unwrap().insert(*c, v.clone());
                v
            }
        };
        if mirror {
            v.conj()
        } else {
            v
        }
    }

    /// Every admissible completion of the step given the labels of its old
    /// variables, with the fresh key bits and the local weight.
    fn completions<A: Arith>(
        &self,
        ar: &A,
        lifted: &mut Lifted<A::V>,
        step: &Step,
        pins: &[Option<Label>; 15],
        old: &[Label],
    ) -> Result<Completions<A::V>, Abort> {
        let mut lab = [0 as Label; 15];
        for (&(s, _), &l) in step.old.iter().zip(old) {
            lab[s] = l;
        }
        let mut out = Vec::new();
        self.extend(ar, lifted, step, pins, 0, &mut lab, ar.one(), &mut out)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend<A: Arith>(
        &self,
        ar: &A,
        lifted: &mut Lifted<A::V>,
        step: &Step,
        pins: &[Option<Label>; 15],
        i: usize,
        lab: &mut [Label; 15],
        w: A::V,
        out: &mut Completions<A::V>,
    ) -> Result<(), Abort> {
        let q = self.q;
        if i == step.sched.len() {
            let mut c = SimplexColouring { tet: [0; 5], tri: [[0; 5]; 5] };
            for (s, &(a, b)) in TRI_SLOTS.iter().enumerate() {
                c.tri[a][b] = lab[s];
            }
            c.tet.copy_from_slice(&lab[10..]);
            let amp = match lifted.amps.get(&(c, step.mirror)) {
                Some(a) => a.clone(),
                None => {
                    let a = self.amplitude(&c, step.mirror);
                    let a = if a.is_zero() { None } else { Some(ar.lift(&a).ok_or(Abort::Overflow)?) };
                    lifted.amps.insert((c, step.mirror), a.clone());
                    a
                }
            };
            let Some(amp) = amp else { return Ok(()) };
            let mut key = [0u64; KEY_WORDS];
            for &(s, p) in &step.fresh {
                self.pack.put(&mut key, p, lab[s]);
            }
            out.push((key, ar.mul(&w, &amp).ok_or(Abort::Overflow)?));
            return Ok(());
        }
        let s = step.sched[i];
        let choices = match pins[s] {
            Some(l) => l..=l,
            None => q.labels(),
        };
        for l in choices {
            lab[s] = l;
            if s < 10 {
                let w = ar.mul(&w, &lifted.dims[l as usize]).ok_or(Abort::Overflow)?;
                self.extend(ar, lifted, step, pins, i + 1, lab, w, out)?;
            } else {
                let f = step.tet_faces[s - 10].map(|x| lab[x]);
                if q.adm(f[0], f[2], l) && q.adm(f[1], f[3], l) {
                    let tw = match lifted.tets.get(&(f, l)) {
                        Some(v) => v.clone(),
                        None => {
                            let v = ar.lift(&tet_weight(q, f, l)).ok_or(Abort::Overflow)?;
                            lifted.tets.insert((f, l), v.clone());
                            v
                        }
                    };
                    let w = ar.mul(&w, &tw).ok_or(Abort::Overflow)?;
                    self.extend(ar, lifted, step, pins, i + 1, lab, w, out)?;
                }
            }
        }
        Ok(())
    }
}

fn compact<A: Arith>(ar: &A, v: &mut Vec<(Key, A::V)>) -> Result<(), Abort> {
    v.sort_unstable_by_key(|a| a.0);
    let mut w = 0;
    for i in 0..v.len() {
        if w > 0 && v[w - 1].0 == v[i].0 {
            let x = v[i].1.clone();
            ar.add_assign(&mut v[w - 1].1, &x).ok_or(Abort::Overflow)?;
        } else {
            v.swap(w, i);
            w += 1;
        }
    }
    v.truncate(w);
    v.retain(|e| !ar.is_zero(&e.1));
    Ok(())
}

/// Expand a contiguous block of table entries through one step.
fn expand_block<A: Arith>(
    ctx: &Ctx,
    ar: &A,
    si: usize,
    pins: &[Option<Label>; 15],
    block: &[(Key, A::V)],
    limit: usize,
) -> Result<Vec<(Key, A::V)>, Abort> {
    let step = &ctx.steps[si];
    let mut lifted = Lifted::new(ar, ctx.q)?;
    let mut cache: HashMap<u128, Completions<A::V>> = HashMap::new();
    let mut out: Vec<(Key, A::V)> = Vec::new();
    let mut threshold = 1 << 16;
    let mut old = Vec::with_capacity(step.old.len());
    for (key, val) in block {
        old.clear();
        let mut code = 0u128;
        for &(_, p) in &step.old {
            let l = ctx.pack.get(key, p);
            old.push(l);
            code = code << 8 | l as u128;
        }
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(code) {
            let c = ctx.completions(ar, &mut lifted, step, pins, &old)?;
            e.insert(c);
        }
        let mut base = *key;
        for (b, k) in base.iter_mut().zip(&step.keep) {
            *b &= k;
        }
        for (fresh, w) in &cache[&code] {
            let mut nk = base;
            for (b, f) in nk.iter_mut().zip(fresh) {
                *b |= f;
            }
            out.push((nk, ar.mul(val, w).ok_or(Abort::Overflow)?));
        }
        if out.len() >= threshold {
            compact(ar, &mut out)?;
            if out.len() > limit {
                return Err(Abort::Memory { step: si, states: out.len() });
            }
            threshold = (2 * out.len()).max(1 << 16);
        }
    }
    compact(ar, &mut out)?;
    if out.len() > limit {
        return Err(Abort::Memory { step: si, states: out.len() });
    }
    Ok(out)
}

fn run_slice<A: Arith>(ctx: &Ctx, ar: &A, pins: &HashMap<Var, Label>, max_entries: usize) -> Result<Cyclo, Abort> {
    let mut table: Vec<(Key, A::V)> = vec![([0; KEY_WORDS], ar.one())];
    for si in 0..ctx.steps.len() {
        let step = &ctx.steps[si];
        let mut slot_pins = [None; 15];
        for &s in &step.new {
            slot_pins[s] = pins.get(&step.vars[s]).copied();
        }
        let threads = ctx.threads.max(1).min(table.len().div_ceil(1 << 12)).max(1);
        let limit = max_entries.saturating_sub(table.len()) / threads;
        let next = if threads == 1 {
            expand_block(ctx, ar, si, &slot_pins, &table, limit)?
        } else {
            let chunk = table.len().div_ceil(threads);
            let slot_pins = &slot_pins;
            let parts: Vec<Result<Vec<(Key, A::V)>, Abort>> = std::thread::scope(|s| {
                let handles: Vec<_> = table.chunks(chunk).map(|part| s.spawn(move || expand_block(ctx, ar, si, slot_pins, part, limit))).collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            let mut all = Vec::new();
            for p in parts {
                all.extend(p?);
            }
            compact(ar, &mut all)?;
            all
        };
        if next.len() + table.len() > max_entries {
            return Err(Abort::Memory { step: si, states: next.len() });
        }
        table = next;
        if table.is_empty() {
            break;
        }
    }
    Ok(match table.first() {
        Some((k, v)) if k.iter().all(|&x| x == 0) => ar.lower(v),
        _ => Cyclo::zero(ctx.q.conductor()),
    })
}

/// Choose triangles to pin so that the estimated peak table fits in
/// `budget` entries.
fn choose_pins(t: &Triangulation, plan: &ContractionPlan, labels: usize, budget: f64, mut pins: Vec<usize>) -> Vec<usize> {
    if t.cells(4).len() > PARITY_PLANNER_LIMIT {
        return pins;
    }
    let per = (labels.div_ceil(2) as f64).log2();
    let peak = |pins: &[usize]| -> (f64, usize) {
        let prof = pinned_parity_profile(t, &plan.order, pins);
        let mut best = (f64::NEG_INFINITY, 0);
        for (s, f) in plan.frontier.iter().enumerate() {
            let unpinned = f.iter().filter(|v| !matches!(v, Var::Tri(x) if pins.contains(x))).count();
            let e = prof[s] as f64 + per * unpinned as f64;
            if e > best.0 {
                best = (e, s);
            }
        }
        best
    };
    let lifetime = |x: usize| plan.frontier.iter().filter(|f| f.contains(&Var::Tri(x))).count();
    while pins.len() < MAX_PINS {
        let (e, s) = peak(&pins);
        if e <= budget.log2() {
            break;
        }
        let choice = open_tris(&plan.frontier[s])
            .into_iter()
            .filter(|x| !pins.contains(x))
            .map(|x| {
                let mut p = pins.clone();
                p.push(x);
                (peak(&p).0, std::cmp::Reverse(lifetime(x)), x)
            })
            .min_by(|a, b| a.partial_cmp(b).unwrap());
        match choice {
            Some((_, _, x)) => pins.push(x),
            None => break,
        }
    }
    pins
}

/// Sum of the slices over every assignment of labels to the pinned tris.
fn sum_slices<A: Arith>(ctx: &Ctx, ar: &A, pins: &[usize], max_entries: usize) -> Result<Cyclo, Abort> {
    let labels = ctx.q.num_labels();
    let mut total = Cyclo::zero(ctx.q.conductor());
    let mut assignment = vec![0 as Label; pins.len()];
    loop {
        let map: HashMap<Var, Label> = pins.iter().zip(&assignment).map(|(&x, &l)| (Var::Tri(x), l)).collect();
        total += &run_slice(ctx, ar, &map, max_entries)?;
        let mut i = pins.len();
        loop {
            if i == 0 {
                return Ok(total);
            }
            i -= 1;
            if (assignment[i] as usize) + 1 < labels {
                assignment[i] += 1;
                break;
            }
            assignment[i] = 0;
        }
    }
}

/// `Ok(None)` means the arithmetic overflowed.
fn run<A: Arith>(ctx: &Ctx, ar: &A, t: &Triangulation, plan: &ContractionPlan, cap: usize) -> Result<Option<Cyclo>, StateSumError> {
    let entry = std::mem::size_of::<(Key, A::V)>() + ar.heap_bytes();
    let max_entries = cap / entry;
    let labels = ctx.q.num_labels();
    let mut budget = max_entries as f64 / 3.0;
    // with two labels the parity estimate of the table sizes is exact
    let estimate_is_exact = labels <= 2;
    let mut pins = if estimate_is_exact { choose_pins(t, plan, labels, budget, Vec::new()) } else { Vec::new() };
    loop {
        match sum_slices(ctx, ar, &pins, max_entries) {
            Ok(z) => return Ok(Some(z)),
            Err(Abort::Overflow) => return Ok(None),
            Err(Abort::TooWide { step }) => return Err(StateSumError::PlanTooWide { step, states: 0, cap }),
            Err(Abort::Memory { step, states }) => {
                let too_wide = StateSumError::PlanTooWide { step, states, cap };
                if pins.len() >= MAX_PINS {
                    return Err(too_wide);
                }
                let before = pins.len();
                if estimate_is_exact {
                    budget /= 4.0;
                    pins = choose_pins(t, plan, labels, budget, pins);
                }
                if pins.len() == before {
                    let lifetime = |x: usize| plan.frontier.iter().filter(|f| f.contains(&Var::Tri(x))).count();
                    match open_tris(&plan.frontier[step]).into_iter().filter(|x| !pins.contains(x)).max_by_key(|&x| (lifetime(x), std::cmp::Reverse(x))) {
                        Some(x) => pins.push(x),
                        None => return Err(too_wide),
                    }
                }
            }
        }
    }
}

fn run_fixed<const P: usize>(ctx: &Ctx, t: &Triangulation, plan: &ContractionPlan, cap: usize) -> Result<Option<Cyclo>, StateSumError> {
    match FixedRing::<P>::new(ctx.q.conductor()) {
        Some(ar) => run(ctx, &ar, t, plan, cap),
        None => Ok(None),
    }
}

/// Sum over all colourings of the weights, without the vertex and edge
/// prefactor. The complex need not be closed.
pub fn colouring_sum(t: &Triangulation, q: &QuantumData, plan: &ContractionPlan, opts: &StateSumOptions) -> Result<Cyclo, StateSumError> {
    if !t.is_simplicial() {
        return Err(StateSumError::DeltaComplexUnsupported);
    }
    let t = if t.is_oriented() { t.clone() } else { t.validate_and_orient()? };
    let n4 = t.cells(4).len();
    if plan.fingerprint != fingerprint(&t) || plan.order.len() != n4 || {
        let mut o = plan.order.clone();
        o.sort_unstable();
        o != (0..n4).collect::<Vec<_>>()
    } {
        return Err(StateSumError::PlanMismatch);
    }
    let signs = t.sorted_signs().expect("oriented");
    let pack = Packing::new(q.max_label());
    let cap = opts.mem_cap_bytes;
    let steps = match build_steps(&t, &signs, &plan.order, &pack) {
        Ok(s) => s,
        Err(Abort::TooWide { step }) => return Err(StateSumError::PlanTooWide { step, states: 0, cap }),
        Err(_) => unreachable!("building steps only fails on width"),
    };
    let ctx = Ctx { q, pack, steps, memo: Mutex::new(HashMap::new()), threads: opts.threads };
    let phi = crate::scalars::ring(q.conductor()).degree();
    let fast = match phi {
        0..=4 => run_fixed::<4>(&ctx, &t, plan, cap)?,
        5..=8 => run_fixed::<8>(&ctx, &t, plan, cap)?,
        9..=16 => run_fixed::<16>(&ctx, &t, plan, cap)?,
        _ => None,
    };
    match fast {
        Some(z) => Ok(z),
        None => Ok(run(&ctx, &Big { m: q.conductor(), phi }, &t, plan, cap)?.expect("big arithmetic does not overflow")),
    }
}

/// The exact Crane–Yetter sum, including the `N^{n₀ − n₁}` prefactor.
pub fn crane_yetter_state_sum(t: &Triangulation, q: &QuantumData, plan: &ContractionPlan, opts: &StateSumOptions) -> Result<Cyclo, StateSumError> {
    if !t.is_closed() {
        return Err(StateSumError::NotClosed);
    }
    if !t.is_simplicial() {
        return Err(StateSumError::DeltaComplexUnsupported);
    }
    let t = t.require_closed_oriented()?;
    let total = colouring_sum(&t, q, plan, opts)?;
    let n = t.counts();
    let exp = n[0] as i64 - n[1] as i64;
    let nn = q.global_dimension();
    let pref = if exp >= 0 { nn.pow(exp) } else { nn.inv().expect("N is nonzero").pow(-exp) };
    Ok(total * pref)
}

/// `Z′ = Z_CY / N^{χ/2}` as a complex number.
pub fn normalized_invariant(t: &Triangulation, q: &QuantumData, opts: &StateSumOptions) -> Result<ComplexF, StateSumError> {
    let plan = plan_contraction(t);
    let z = crane_yetter_state_sum(t, q, &plan, opts)?;
    let chi = t.euler_characteristic() as f64;
    let n = q.global_dimension().to_complex().re;
    Ok(z.to_complex() / Complex64::new(n.powf(chi / 2.0), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{boundary_of_5_simplex, BistellarMove};

    #[test]
    fn sphere_plan() {
        let p = plan_contraction(&boundary_of_5_simplex());
        assert!(p.max_open_tets() <= 9, "{:?}", p.frontier);
        assert!(p.frontier.last().unwrap().is_empty());
        assert_eq!(*p.parity_rank.last().unwrap(), 0);
    }

    #[test]
    fn sphere_r3() {
        let t = boundary_of_5_simplex();
        let q = QuantumData::build(3).unwrap();
        let z = crane_yetter_state_sum(&t, &q, &plan_contraction(&t), &StateSumOptions::default()).unwrap();
        assert_eq!(z, Cyclo::from_int(12, 2));
    }

    #[test]
    fn flipped_sphere_r3() {
        let t = boundary_of_5_simplex().validate_and_orient().unwrap();
        let f = t.bistellar_flip(&BistellarMove::OneFive { simplex: 2 }).unwrap();
        let q = QuantumData::build(3).unwrap();
        let z = crane_yetter_state_sum(&f, &q, &plan_contraction(&f), &StateSumOptions::default()).unwrap();
        assert_eq!(z, Cyclo::from_int(12, 2));
    }

    #[test]
    fn errors() {
        let q = QuantumData::build(3).unwrap();
        let s = Triangulation::from_simplices(vec![[0, 1, 2, 3, 4]], None).unwrap();
        let o = StateSumOptions::default();
        assert_eq!(crane_yetter_state_sum(&s, &q, &plan_contraction(&s), &o), Err(StateSumError::NotClosed));
        let t = boundary_of_5_simplex();
        let other = t.disjoint_union(&t);
        assert_eq!(crane_yetter_state_sum(&t, &q, &plan_contraction(&other), &o), Err(StateSumError::PlanMismatch));
        let tiny = StateSumOptions { mem_cap_bytes: 10, threads: 1 };
        assert!(matches!(crane_yetter_state_sum(&t, &q, &plan_contraction(&t), &tiny), Err(StateSumError::PlanTooWide { .. })));
        let id: std::collections::BTreeMap<u32, u32> = (0..5).map(|v| (v, v)).collect();
        let d = s.glue(&s, &id).unwrap();
        assert_eq!(crane_yetter_state_sum(&d, &q, &plan_contraction(&d), &o), Err(StateSumError::DeltaComplexUnsupported));
    }

    #[test]
    fn threads_agree() {
        let t = boundary_of_5_simplex();
        let q = QuantumData::build(4).unwrap();
        let p = plan_contraction(&t);
        let a = crane_yetter_state_sum(&t, &q, &p, &StateSumOptions { threads: 1, ..Default::default() }).unwrap();
        let b = crane_yetter_state_sum(&t, &q, &p, &StateSumOptions { threads: 3, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, Cyclo::from_int(16, 4));
    }

    #[test]
    fn slices_and_big_arithmetic_agree() {
        let t = boundary_of_5_simplex().validate_and_orient().unwrap();
        let f = t.bistellar_flip(&BistellarMove::OneFive { simplex: 0 }).unwrap();
        let q = QuantumData::build(3).unwrap();
        let p = plan_contraction(&f);
        let pack = Packing::new(q.max_label());
        let steps = build_steps(&f, &f.sorted_signs().unwrap(), &p.order, &pack).ok().unwrap();
        let ctx = Ctx { q: &q, pack, steps, memo: Mutex::new(HashMap::new()), threads: 1 };
        let big = Big { m: 12, phi: 4 };
        let whole = run(&ctx, &big, &f, &p, DEFAULT_MEM_CAP).unwrap().unwrap();
        assert_eq!(whole, colouring_sum(&f, &q, &p, &StateSumOptions::default()).unwrap());
        let pins: Vec<usize> = open_tris(&p.frontier[3]).into_iter().take(4).collect();
        let sliced = sum_slices(&ctx, &big, &pins, usize::MAX).ok().unwrap();
        assert_eq!(whole, sliced);
    }
}

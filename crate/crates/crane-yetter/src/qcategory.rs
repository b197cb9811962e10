//! Multiplicity-free quantum sl(2) data at level `r` in Kauffman–Lins
//! conventions: `A = ζ_{4r}`, labels `0..=r-2`, signed quantum dimensions
//! `Δ_n = (-1)^n [n+1]`, twists `θ_n = (-1)^n A^{n(n+2)}`.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;
use thiserror::Error;

use crate::scalars::{sqrt_unit, ComplexF, Cyclo};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CategoryError {
    #[error("level r = {0} is too small; r >= 3 is required")]
    LevelTooSmall(u32),
    #[error("label {label} is not in 0..={max}")]
    UnknownLabel { label: u32, max: u32 },
}

pub type Label = u8;

/// Level-`r` category data. Immutable once built; the recoupling memo tables
/// are behind locks and only ever gain entries.
pub struct QuantumData {
    r: u32,
    m: u32,
    a: Cyclo,
    qdim: Vec<Cyclo>,
    qdim_inv: Vec<Cyclo>,
    twist: Vec<Cyclo>,
    /// `[k]!` for `0 <= k <= r-1`.
    qfact: Vec<Cyclo>,
    qfact_inv: Vec<Cyclo>,
    n_global: Cyclo,
    a_plus: Cyclo,
    a_minus: Cyclo,
    y: ComplexF,
    theta_memo: RwLock<HashMap<[Label; 3], (Cyclo, Cyclo)>>,
    tet_memo: RwLock<HashMap<[Label; 6], Cyclo>>,
}

impl std::fmt::Debug for QuantumData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuantumData").field("r", &self.r).finish()
    }
}

/// Which way a crossing resolves; `Over` means the strand entering from the
/// lower left passes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Crossing {
    Over,
    Under,
}

impl QuantumData {
    pub fn build(r: u32) -> Result<QuantumData, CategoryError> {
        if r < 3 {
            return Err(CategoryError::LevelTooSmall(r));
        }
        let m = 4 * r;
        let a = Cyclo::zeta_pow(m, 1);
        let bracket_den = (a.pow(2) - a.pow(-2)).inv().expect("A^2 != A^-2");
        let qint = |k: i64| (a.pow(2 * k) - a.pow(-2 * k)) * &bracket_den;
        let mut qfact = vec![Cyclo::one(m)];
        for k in 1..r as i64 {
            let next = qfact.last().unwrap() * &qint(k);
            qfact.push(next);
        }
        let qfact_inv = qfact.iter().map(|x| x.inv().expect("[k]! nonzero below r")).collect();
        let labels = r - 1;
        let mut qdim = Vec::new();
        let mut twist = Vec::new();
        for n in 0..labels as i64 {
            let sgn = if n % 2 == 0 { 1 } else { -1 };
            qdim.push(qint(n + 1).scale(sgn));
            twist.push(a.pow(n * (n + 2)).scale(sgn));
        }
        let qdim_inv: Vec<Cyclo> = qdim.iter().map(|x| x.inv().expect("qdim nonzero")).collect();
        let mut n_global = Cyclo::zero(m);
        let mut a_plus = Cyclo::zero(m);
        let mut a_minus = Cyclo::zero(m);
        for n in 0..labels as usize {
            let d2 = &qdim[n] * &qdim[n];
            n_global += &d2;
            a_plus += &(&twist[n] * &d2);
            a_minus += &(&twist[n].conj() * &d2);
        }
        let ratio = (&a_plus * &a_minus.inv().expect("a_minus nonzero")).to_complex();
        let y = sqrt_unit(ratio / ratio.norm()).expect("normalized ratio has unit modulus");
        Ok(QuantumData {
            r,
            m,
            a,
            qdim,
            qdim_inv,
            twist,
            qfact,
            qfact_inv,
            n_global,
            a_plus,
            a_minus,
            y,
            theta_memo: RwLock::new(HashMap::new()),
            tet_memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Conductor of the scalar ring, `4r`.
    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn a(&self) -> &Cyclo {
        &self.a
    }

    /// `A^k` for any integer `k`.
    pub fn a_pow(&self, k: i64) -> Cyclo {
        Cyclo::zeta_pow(self.m, k)
    }

    pub fn max_label(&self) -> Label {
        (self.r - 2) as Label
    }

    pub fn labels(&self) -> std::ops::RangeInclusive<Label> {
        0..=self.max_label()
    }

    pub fn num_labels(&self) -> usize {
        (self.r - 1) as usize
    }

    fn check(&self, n: u32) -> Result<(), CategoryError> {
        if n > self.r - 2 {
            Err(CategoryError::UnknownLabel { label: n, max: self.r - 2 })
        } else {
            Ok(())
        }
    }

    /// `(Δ_n, θ_n)`.
    pub fn label_data(&self, n: u32) -> Result<(Cyclo, Cyclo), CategoryError> {
        self.check(n)?;
        Ok((self.qdim[n as usize].clone(), self.twist[n as usize].clone()))
    }

    pub fn qdim(&self, n: Label) -> &Cyclo {
        &self.qdim[n as usize]
    }

    pub fn qdim_inv(&self, n: Label) -> &Cyclo {
        &self.qdim_inv[n as usize]
    }

    pub fn twist(&self, n: Label) -> &Cyclo {
        &self.twist[n as usize]
    }

    /// Quantum integer `[k]`.
    pub fn qint(&self, k: u32) -> Cyclo {
        &self.qfact[k as usize] * &self.qfact_inv[k as usize - 1]
    }

    pub fn admissible(&self, a: u32, b: u32, c: u32) -> Result<bool, CategoryError> {
        self.check(a)?;
        self.check(b)?;
        self.check(c)?;
        Ok(self.adm(a as Label, b as Label, c as Label))
    }

    /// Admissibility on labels already known to be in range.
    #[inline]
    pub fn adm(&self, a: Label, b: Label, c: Label) -> bool {
        let (a, b, c) = (a as u32, b as u32, c as u32);
        (a + b + c) % 2 == 0 && a <= b + c && b <= a + c && c <= a + b && a + b + c <= 2 * self.r - 4
    }

    /// Theta net `θ(a,b,c)` and its inverse. Panics on inadmissible input.
    pub fn theta_pair(&self, a: Label, b: Label, c: Label) -> (Cyclo, Cyclo) {
        let mut k = [a, b, c];
        k.sort_unstable();
        if let Some(v) = self.theta_memo.read().unwrap().get(&k) {
            return v.clone();
        }
        assert!(self.adm(a, b, c), "theta of inadmissible triple {:?}", k);
        let (a, b, c) = (a as usize, b as usize, c as usize);
        let mm = (a + b - c) / 2;
        let nn = (b + c - a) / 2;
        let pp = (a + c - b) / 2;
        let f = &self.qfact;
        let fi = &self.qfact_inv;
        let mut v = &f[mm + nn + pp + 1] * &f[mm];
        v = v * &f[nn] * &f[pp] * &fi[mm + nn] * &fi[nn + pp] * &fi[mm + pp];
        if (mm + nn + pp) % 2 == 1 {
            v = -v;
        }
        let vi = v.inv().expect("theta nonzero on admissible triples");
        let pair = (v, vi);
        self.theta_memo.write().unwrap().insert(k, pair.clone());
        pair
    }

    pub fn theta(&self, a: Label, b: Label, c: Label) -> Cyclo {
        self.theta_pair(a, b, c).0
    }

    pub fn theta_inv(&self, a: Label, b: Label, c: Label) -> Cyclo {
        self.theta_pair(a, b, c).1
    }

    /// Tetrahedral net with vertices `(x,a,y)`, `(y,b,z)`, `(a,b,c)`,
    /// `(x,c,z)`; opposite edge pairs are `(x,b)`, `(a,z)`, `(y,c)`. Zero when a
    /// vertex is inadmissible.
    pub fn tet(&self, x: Label, a: Label, b: Label, z: Label, y: Label, c: Label) -> Cyclo {
        if !(self.adm(x, a, y) && self.adm(y, b, z) && self.adm(a, b, c) && self.adm(x, c, z)) {
            return Cyclo::zero(self.m);
        }
        let key = tet_key([x, b, a, z, y, c]);
        if let Some(v) = self.tet_memo.read().unwrap().get(&key) {
            return v.clone();
        }
        let v = self.tet_raw(x, a, b, z, y, c);
        self.tet_memo.write().unwrap().insert(key, v.clone());
        v
    }

    fn tet_raw(&self, x: Label, a: Label, b: Label, z: Label, y: Label, c: Label) -> Cyclo {
        let e = [x, a, b, z, y, c].map(|v| v as usize);
        let [x, a, b, z, y, c] = e;
        let ai = [(x + a + y) / 2, (y + b + z) / 2, (a + b + c) / 2, (x + c + z) / 2];
        let tot = x + a + b + z + y + c;
        let bj = [(tot - x - b) / 2, (tot - a - z) / 2, (tot - y - c) / 2];
        let lo = *ai.iter().max().unwrap();
        let hi = *bj.iter().min().unwrap();
        let top = self.qfact.len() - 1;
        let fact = |k: usize| -> Option<&Cyclo> { self.qfact.get(k) };
        let mut pref = Cyclo::one(self.m);
        for &i in &ai {
            for &j in &bj {
                match fact(j - i) {
                    Some(v) => pref *= v,
                    None => return Cyclo::zero(self.m),
                }
            }
        }
        for &v in &e {
            pref *= &self.qfact_inv[v];
        }
        let mut sum = Cyclo::zero(self.m);
        for s in lo..=hi {
            if s + 1 > top {
                // [s+1]! vanishes at the root of unity
                continue;
            }
            let mut t = self.qfact[s + 1].clone();
            for &i in &ai {
                t *= &self.qfact_inv[s - i];
            }
            for &j in &bj {
                t *= &self.qfact_inv[j - s];
            }
            if s % 2 == 1 {
                t = -t;
            }
            sum += &t;
        }
        pref * sum
    }

    /// Kauffman–Lins recoupling coefficient: `((x a)_y b)_z = Σ_c F (x (a b)_c)_z`
    /// with `F = Tet · Δ_c / (θ(a,b,c) θ(x,c,z))`.
    pub fn six_j(&self, x: Label, a: Label, b: Label, z: Label, y: Label, c: Label) -> Cyclo {
        if !(self.adm(x, a, y) && self.adm(y, b, z) && self.adm(a, b, c) && self.adm(x, c, z)) {
            return Cyclo::zero(self.m);
        }
        self.tet(x, a, b, z, y, c)
            * &self.qdim[c as usize]
            * self.theta_inv(a, b, c)
            * self.theta_inv(x, c, z)
    }

    /// Checked public variant of [`QuantumData::six_j`].
    pub fn six_j_checked(&self, l: [u32; 6]) -> Result<Cyclo, CategoryError> {
        for &v in &l {
            self.check(v)?;
        }
        let [x, a, b, z, y, c] = l.map(|v| v as Label);
        Ok(self.six_j(x, a, b, z, y, c))
    }

    /// Braiding eigenvalue on the `c` channel of `a ⊗ b`.
    pub fn braid_eigen(&self, a: Label, b: Label, c: Label, s: Crossing) -> Cyclo {
        let (a, b, c) = (a as i64, b as i64, c as i64);
        let e = (c * (c + 2) - a * (a + 2) - b * (b + 2)) / 2;
        let sign = if ((a + b - c) / 2) % 2 == 0 { 1 } else { -1 };
        match s {
            Crossing::Over => self.a_pow(e).scale(sign),
            Crossing::Under => self.a_pow(-e).scale(sign),
        }
    }

    pub fn global_dimension(&self) -> &Cyclo {
        &self.n_global
    }

    /// `(N, a₊, a₋, y)`.
    pub fn category_constants(&self) -> (Cyclo, Cyclo, Cyclo, ComplexF) {
        (self.n_global.clone(), self.a_plus.clone(), self.a_minus.clone(), self.y)
    }

    pub fn y(&self) -> ComplexF {
        self.y
    }
}

/// Canonical key of a tetrahedron given as three opposite pairs: the
/// lexicographically least image under the 24 tetrahedral symmetries.
fn tet_key(l: [Label; 6]) -> [Label; 6] {
    // l = [p0, q0, p1, q1, p2, q2] with (p_k, q_k) opposite.
    let pairs = [(l[0], l[1]), (l[2], l[3]), (l[4], l[5])];
    let mut best: Option<[Label; 6]> = None;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for p in PERMS {
        // flipping two of the three pairs is a symmetry; so is flipping none
        for flips in [[false, false, false], [true, true, false], [true, false, true], [false, true, true]] {
            let mut k = [0; 6];
            for (slot, &src) in p.iter().enumerate() {
                let (u, v) = pairs[src];
                let (u, v) = if flips[slot] { (v, u) } else { (u, v) };
                k[2 * slot] = u;
                k[2 * slot + 1] = v;
            }
            if best.is_none_or(|b| k < b) {
                best = Some(k);
            }
        }
    }
    best.unwrap()
}

/// Pass/fail entry of a diagnostic report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckEntry {
    pub family: String,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConsistencyReport {
    pub r: u32,
    pub entries: Vec<CheckEntry>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, family: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.family == family)
    }
}

/// A materialized table of recoupling coefficients, keyed by
/// `[x, a, b, z, y, c]` as in [`QuantumData::six_j`]. Only admissible keys are
/// stored; missing keys read as zero.
#[derive(Clone)]
pub struct SixJTable {
    m: u32,
    entries: HashMap<[Label; 6], Cyclo>,
}

impl SixJTable {
    pub fn build(q: &QuantumData) -> SixJTable {
        let mut entries = HashMap::new();
        let n = q.max_label();
        for x in 0..=n {
            for a in 0..=n {
                for y in 0..=n {
                    if !q.adm(x, a, y) {
                        continue;
                    }
                    for b in 0..=n {
                        for z in 0..=n {
                            if !q.adm(y, b, z) {
                                continue;
                            }
                            for c in 0..=n {
                                if q.adm(a, b, c) && q.adm(x, c, z) {
                                    entries.insert([x, a, b, z, y, c], q.six_j(x, a, b, z, y, c));
                                }
                            }
                        }
                    }
                }
            }
        }
        SixJTable { m: q.conductor(), entries }
    }

    pub fn get(&self, k: [Label; 6]) -> Cyclo {
        self.entries.get(&k).cloned().unwrap_or_else(|| Cyclo::zero(self.m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Replace one entry (negative controls).
    pub fn set(&mut self, k: [Label; 6], v: Cyclo) {
        self.entries.insert(k, v);
    }

    pub fn keys(&self) -> impl Iterator<Item = &[Label; 6]> {
        self.entries.keys()
    }
}

/// Default bound on the number of pentagon configurations examined.
pub const PENTAGON_CAP: usize = 40_000;

/// Verify the pentagon identity, the orthogonality of the recoupling matrices
/// and label degree consistency against a table.
pub fn consistency_checks_with(q: &QuantumData, t: &SixJTable, pentagon_cap: usize) -> ConsistencyReport {
    let mut entries = Vec::new();
    entries.push(check_pentagon(q, t, pentagon_cap));
    entries.push(check_orthogonality(q, t));
    let mut deg_ok = true;
    let mut witness = None;
    for a in q.labels() {
        if !q.labels().any(|b| q.labels().any(|c| q.adm(a, b, c))) {
            deg_ok = false;
            witness = Some(vec![a as u32]);
            break;
        }
    }
    entries.push(CheckEntry { family: "degree".into(), passed: deg_ok, checked: q.num_labels(), witness });
    ConsistencyReport { r: q.r(), entries }
}

pub fn consistency_checks(q: &QuantumData) -> ConsistencyReport {
    consistency_checks_with(q, &SixJTable::build(q), PENTAGON_CAP)
}

fn check_orthogonality(q: &QuantumData, t: &SixJTable) -> CheckEntry {
    // Σ_c F[y→c] G[c→y'] = δ(y, y') with G the inverse move, written through
    // the same table: G_y(c) = F-table entry of the mirrored tree times the
    // qdim/theta change of normalization.
    let n = q.max_label();
    let mut checked = 0;
    for x in 0..=n {
        for a in 0..=n {
            for b in 0..=n {
                for z in 0..=n {
                    let ys: Vec<Label> = (0..=n).filter(|&y| q.adm(x, a, y) && q.adm(y, b, z)).collect();
                    let cs: Vec<Label> = (0..=n).filter(|&c| q.adm(a, b, c) && q.adm(x, c, z)).collect();
                    if ys.is_empty() {
                        continue;
                    }
                    for &y in &ys {
                        for &y2 in &ys {
                            let mut s = Cyclo::zero(q.conductor());
                            for &c in &cs {
                                let f = t.get([x, a, b, z, y, c]);
                                let g = inverse_coefficient(q, t, x, a, b, z, c, y2);
                                s += &(f * g);
                            }
                            checked += 1;
                            let want = if y == y2 { Cyclo::one(q.conductor()) } else { Cyclo::zero(q.conductor()) };
                            if s != want {
                                return CheckEntry {
                                    family: "orthogonality".into(),
                                    passed: false,
                                    checked,
                                    witness: Some([x, a, b, z, y, y2].iter().map(|&v| v as u32).collect()),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    CheckEntry { family: "orthogonality".into(), passed: true, checked, witness: None }
}

/// Coefficient of `((x a)_y b)_z` in `(x (a b)_c)_z`, recovered from the
/// forward table entry via `G = F · θ(a,b,c) θ(x,c,z) Δ_y / (Δ_c θ(x,a,y) θ(y,b,z))`.
fn inverse_coefficient(q: &QuantumData, t: &SixJTable, x: Label, a: Label, b: Label, z: Label, c: Label, y: Label) -> Cyclo {
    let f = t.get([x, a, b, z, y, c]);
    if f.is_zero() {
        return f;
    }
    f * q.theta(a, b, c) * q.theta(x, c, z) * q.qdim(y) * q.qdim_inv(c) * q.theta_inv(x, a, y) * q.theta_inv(y, b, z)
}

fn check_pentagon(q: &QuantumData, t: &SixJTable, cap: usize) -> CheckEntry {
    // (((a b)_p c)_u d)_s, both reduction paths to (a (b (c d)_x)_y)_s.
    let n = q.max_label();
    let m = q.conductor();
    let mut checked = 0;
    let f = |k: [Label; 6]| t.get(k);
    'outer: for a in 0..=n {
        for b in 0..=n {
            for p in 0..=n {
                if !q.adm(a, b, p) {
                    continue;
                }
                for c in 0..=n {
                    for u in 0..=n {
                        if !q.adm(p, c, u) {
                            continue;
                        }
                        for d in 0..=n {
                            for s in 0..=n {
                                if !q.adm(u, d, s) {
                                    continue;
                                }
                                for x in 0..=n {
                                    if !(q.adm(c, d, x)) {
                                        continue;
                                    }
                                    for y in 0..=n {
                                        if !(q.adm(b, x, y) && q.adm(a, y, s)) {
                                            continue;
                                        }
                                        if checked >= cap {
                                            break 'outer;
                                        }
                                        checked += 1;
                                        let lhs = f([p, c, d, s, u, x]) * f([a, b, x, s, p, y]);
                                        let mut rhs = Cyclo::zero(m);
                                        for z in 0..=n {
                                            let t1 = f([a, b, c, u, p, z]);
                                            if t1.is_zero() {
                                                continue;
                                            }
                                            let t2 = f([a, z, d, s, u, y]);
                                            if t2.is_zero() {
                                                continue;
                                            }
                                            let t3 = f([b, c, d, y, z, x]);
                                            rhs += &(t1 * t2 * t3);
                                        }
                                        if lhs != rhs {
                                            return CheckEntry {
                                                family: "pentagon".into(),
                                                passed: false,
                                                checked,
                                                witness: Some(
                                                    [a, b, c, d, p, u, s, x, y].iter().map(|&v| v as u32).collect(),
                                                ),
                                            };
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    CheckEntry { family: "pentagon".into(), passed: true, checked, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn small_level_rejected() {
        assert_eq!(QuantumData::build(2).unwrap_err(), CategoryError::LevelTooSmall(2));
    }

    #[test]
    fn r3_label_data() {
        let q = QuantumData::build(3).unwrap();
        assert_eq!(q.labels().count(), 2);
        let (d0, t0) = q.label_data(0).unwrap();
        assert!(d0.is_one() && t0.is_one());
        let (d1, t1) = q.label_data(1).unwrap();
        assert_eq!(d1, Cyclo::from_int(12, -1));
        assert!((t1.to_complex() - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert_eq!(t1, -q.a().pow(3));
        assert!(q.label_data(2).is_err());
    }

    #[test]
    fn r5_qdims() {
        let q = QuantumData::build(5).unwrap();
        let two = 2.0 * (PI / 5.0).cos();
        let want = [1.0, -two, two * two - 1.0, -(two * two * two - 2.0 * two)];
        for (n, w) in want.iter().enumerate() {
            let d = q.qdim(n as Label).to_complex();
            assert!((d - Complex64::new(*w, 0.0)).norm() < 1e-12, "n={} {}", n, d);
        }
    }

    #[test]
    fn admissibility_examples() {
        let q = QuantumData::build(3).unwrap();
        assert!(q.admissible(0, 0, 0).unwrap());
        assert!(q.admissible(1, 1, 0).unwrap());
        assert!(q.admissible(1, 1, 2).is_err());
        let q5 = QuantumData::build(5).unwrap();
        assert!(!q5.admissible(3, 3, 2).unwrap());
        assert!(q5.admissible(2, 2, 2).unwrap());
    }

    #[test]
    fn theta_normalizations() {
        let q = QuantumData::build(5).unwrap();
        for a in q.labels() {
            assert_eq!(q.theta(a, 0, a), *q.qdim(a));
        }
        assert_eq!(q.theta(1, 1, 2), *q.qdim(2));
        assert_eq!(q.theta(1, 1, 0), *q.qdim(1));
    }

    #[test]
    fn constants_r3() {
        let q = QuantumData::build(3).unwrap();
        let (n, ap, am, y) = q.category_constants();
        assert_eq!(n, Cyclo::from_int(12, 2));
        assert_eq!(ap, Cyclo::from_int(12, 1) - Cyclo::zeta_pow(12, 3));
        assert_eq!(am, Cyclo::from_int(12, 1) + Cyclo::zeta_pow(12, 3));
        assert!((y - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-12);
        assert!((y.powi(8) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constants_r4() {
        let q = QuantumData::build(4).unwrap();
        assert_eq!(*q.global_dimension(), Cyclo::from_int(16, 4));
    }

    #[test]
    fn tet_key_symmetry() {
        let k = tet_key([1, 2, 3, 4, 5, 6]);
        assert_eq!(tet_key([2, 1, 4, 3, 5, 6]), k);
        assert_eq!(tet_key([3, 4, 1, 2, 5, 6]), k);
        assert_eq!(tet_key([5, 6, 3, 4, 1, 2]), k);
        assert_ne!(tet_key([2, 1, 3, 4, 5, 6]), k);
    }

    #[test]
    fn category_checks_pass() {
        for r in 3..=4 {
            let q = QuantumData::build(r).unwrap();
            let rep = consistency_checks(&q);
            assert!(rep.passed(), "{:?}", rep);
        }
    }

    #[test]
    fn perturbed_table_fails_pentagon() {
        let q = QuantumData::build(4).unwrap();
        let mut t = SixJTable::build(&q);
        let k = [1, 1, 1, 1, 0, 2];
        let v = t.get(k) + Cyclo::one(q.conductor());
        t.set(k, v);
        let rep = consistency_checks_with(&q, &t, PENTAGON_CAP);
        let p = rep.entry("pentagon").unwrap();
        assert!(!p.passed);
        assert!(p.witness.is_some());
    }
}

//! Strand-level Temperley-Lieb calculus with explicit Jones-Wenzl
//! projectors, and enumeration of admissible single-simplex colourings.

use std::collections::HashMap;

use crane_yetter::network::{Op, SimplexColouring};
use crane_yetter::qcategory::{Crossing, Label, QuantumData};
use crane_yetter::scalars::Cyclo;

type Matching = Vec<usize>;
type State = HashMap<Matching, Cyclo>;

pub struct Strands<'a> {
    q: &'a QuantumData,
    loop_value: Cyclo,
    a: Cyclo,
    a_inv: Cyclo,
}

fn add_into(st: &mut State, m: Matching, v: Cyclo) {
    let e = st.entry(m).or_insert_with(|| Cyclo::zero(v.conductor()));
    *e += &v;
}

impl<'a> Strands<'a> {
    pub fn new(q: &'a QuantumData) -> Self {
        let a = q.a().clone();
        let a_inv = a.inv().unwrap();
        let loop_value = -(&a * &a) - &a_inv * &a_inv;
        Strands { q, loop_value, a, a_inv }
    }

    fn insert_cups(m: &[usize], p: usize, k: usize) -> Matching {
        let mut out: Vec<usize> = m.iter().map(|&x| if x < p { x } else { x + 2 * k }).collect();
        let tail = out.split_off(p);
        out.extend((0..2 * k).map(|j| p + 2 * k - 1 - j));
        out.extend(tail);
        out
    }

    fn cap(&self, st: &State, p: usize) -> State {
        let mut out = State::new();
        for (m, v) in st {
            let mut m = m.clone();
            let mut v = v.clone();
            if m[p] == p + 1 {
                v *= &self.loop_value;
            } else {
                let (x, y) = (m[p], m[p + 1]);
                m[x] = y;
                m[y] = x;
            }
            m.drain(p..p + 2);
            let m = m.into_iter().map(|z| if z < p { z } else { z - 2 }).collect();
            add_into(&mut out, m, v);
        }
        out
    }

    fn e(&self, st: &State, p: usize) -> State {
        self.cap(st, p).into_iter().map(|(m, v)| (Self::insert_cups(&m, p, 1), v)).collect()
    }

    fn sigma(&self, st: &State, p: usize, over: bool) -> State {
        let (x, y) = if over { (&self.a, &self.a_inv) } else { (&self.a_inv, &self.a) };
        let mut out: State = st.iter().map(|(m, v)| (m.clone(), v * x)).collect();
        for (m, v) in self.e(st, p) {
            add_into(&mut out, m, v * y);
        }
        out
    }

    fn jw(&self, st: State, p: usize, n: usize) -> State {
        if n <= 1 {
            return st;
        }
        let x = self.jw(st, p, n - 1);
        let y = self.jw(self.e(&x, p + n - 2), p, n - 1);
        let mu = self.q.qdim(n as Label - 2) * self.q.qdim_inv(n as Label - 1);
        let mut out = x;
        for (m, v) in y {
            add_into(&mut out, m, -(v * &mu));
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    fn half_twist(&self, mut st: State, p: usize, n: usize, over: bool) -> State {
        for j in 1..n {
            for t in (1..=j).rev() {
                st = self.sigma(&st, p + t - 1, over);
            }
        }
        st
    }

    /// Bracket of a Morse word, with `Twist` ops as extra half-turns.
    pub fn run(&self, ops: &[Word]) -> Cyclo {
        let m = self.q.conductor();
        let mut st = State::new();
        st.insert(Vec::new(), Cyclo::one(m));
        let mut bands: Vec<usize> = Vec::new();
        let pos = |b: &[usize], i: usize| b[..i].iter().sum::<usize>();
        for op in ops {
            match *op {
                Word::Op(Op::Cup { i, a }) => {
                    let (a, p) = (a as usize, pos(&bands, i));
                    st = st.into_iter().map(|(mm, v)| (Self::insert_cups(&mm, p, a), v)).collect();
                    bands.splice(i..i, [a, a]);
                    st = self.jw(st, p, a);
                    st = self.jw(st, p + a, a);
                }
                Word::Op(Op::Cap { i }) => {
                    let (a, p) = (bands[i], pos(&bands, i));
                    assert_eq!(a, bands[i + 1]);
                    for j in 0..a {
                        st = self.cap(&st, p + a - 1 - j);
                    }
                    bands.drain(i..i + 2);
                }
                Word::Op(Op::Merge { i, c }) => {
                    let (a, b, c, p) = (bands[i], bands[i + 1], c as usize, pos(&bands, i));
                    let k = (a + b - c) / 2;
                    for j in 0..k {
                        st = self.cap(&st, p + a - 1 - j);
                    }
                    bands.splice(i..i + 2, [c]);
                    st = self.jw(st, p, c);
                }
                Word::Op(Op::Split { i, a, b }) => {
                    let (a, b, c, p) = (a as usize, b as usize, bands[i], pos(&bands, i));
                    let k = (a + b - c) / 2;
                    for j in 0..k {
                        st = st.into_iter().map(|(mm, v)| (Self::insert_cups(&mm, p + a - k + j, 1), v)).collect();
                    }
                    bands.splice(i..i + 1, [a, b]);
                    st = self.jw(st, p, a);
                    st = self.jw(st, p + a, b);
                }
                Word::Op(Op::Cross { i, s }) => {
                    let (a, b, p) = (bands[i], bands[i + 1], pos(&bands, i));
                    for j in 0..b {
                        for t in 0..a {
                            st = self.sigma(&st, p + a + j - 1 - t, s == Crossing::Over);
                        }
                    }
                    bands.swap(i, i + 1);
                }
                Word::Twist { i, over } => {
                    st = self.half_twist(st, pos(&bands, i), bands[i], over);
                }
            }
        }
        assert!(bands.is_empty());
        st.remove(&Vec::new()).unwrap_or_else(|| Cyclo::zero(m))
    }
}

#[derive(Clone, Copy)]
pub enum Word {
    Op(Op),
    Twist { i: usize, over: bool },
}

pub fn words(ops: &[Op]) -> Vec<Word> {
    ops.iter().copied().map(Word::Op).collect()
}

/// Positions of the tetrahedron omitting simplex vertex `i`, its faces in
/// order (face `k` omits the tetrahedron's `k`-th vertex).
pub fn tet_face_slots(i: usize) -> [(usize, usize); 4] {
    let verts: Vec<usize> = (0..5).filter(|&v| v != i).collect();
    let mut out = [(0, 0); 4];
    for (k, &v) in verts.iter().enumerate() {
        out[k] = (i.min(v), i.max(v));
    }
    out
}

pub fn simplex_admissible(q: &QuantumData, c: &SimplexColouring) -> bool {
    (0..5).all(|i| {
        let f = tet_face_slots(i).map(|(a, b)| c.tri[a][b]);
        q.adm(f[0], f[2], c.tet[i]) && q.adm(f[1], f[3], c.tet[i])
    })
}

pub fn all_admissible_colourings(q: &QuantumData) -> Vec<SimplexColouring> {
    let pairs: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
    let n = q.num_labels();
    let mut out = Vec::new();
    let mut c = SimplexColouring { tet: [0; 5], tri: [[0; 5]; 5] };
    fn rec(q: &QuantumData, pairs: &[(usize, usize)], n: usize, k: usize, c: &mut SimplexColouring, out: &mut Vec<SimplexColouring>) {
        if k == pairs.len() + 5 {
            if simplex_admissible(q, c) {
                out.push(*c);
            }
            return;
        }
        for l in 0..n as Label {
            if k < pairs.len() {
                let (i, j) = pairs[k];
                c.tri[i][j] = l;
            } else {
                let i = k - pairs.len();
                c.tet[i] = l;
                let f = tet_face_slots(i).map(|(a, b)| c.tri[a][b]);
                if !(q.adm(f[0], f[2], l) && q.adm(f[1], f[3], l)) {
                    continue;
                }
            }
            rec(q, pairs, n, k + 1, c, out);
        }
    }
    rec(q, &pairs, n, 0, &mut c, &mut out);
    out
}

//! Evaluation of planar trivalent ribbon networks by sweeping a Morse
//! presentation through a left-associated fusion tree, and the fixed
//! presentation of the 4-simplex network used by the state sum.

use std::collections::HashMap;

use crate::qcategory::{Crossing, Label, QuantumData};
use crate::scalars::Cyclo;

/// One elementary slice of a Morse presentation. Positions index bands of
/// the current horizontal cross-section, counted from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// Create a band pair labelled `a` at positions `i, i+1`.
    Cup { i: usize, a: Label },
    /// Close the pair at `i, i+1`; the labels must agree.
    Cap { i: usize },
    /// Fuse bands `i, i+1` into one labelled `c`.
    Merge { i: usize, c: Label },
    /// Split band `i` into `a` then `b`.
    Split { i: usize, a: Label, b: Label },
    /// Exchange bands `i, i+1`.
    Cross { i: usize, s: Crossing },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("op {index} refers to band {band} but only {width} are open")]
    OutOfRange { index: usize, band: usize, width: usize },
    #[error("op {index} caps bands with labels {left} and {right}")]
    CapMismatch { index: usize, left: Label, right: Label },
    #[error("{0} bands remain open at the end")]
    Unclosed(usize),
}

/// Evaluate a closed network. Basis states are the intermediate labels of
/// the fusion tree `((b₀ b₁)_{X₂} b₂)… ` with `X[0] = X[width] = 0`.
pub fn evaluate(q: &QuantumData, ops: &[Op]) -> Result<Cyclo, NetworkError> {
    let m = q.conductor();
    let mut state: HashMap<Vec<Label>, Cyclo> = HashMap::new();
    state.insert(vec![0], Cyclo::one(m));
    let mut bands: Vec<Label> = Vec::new();
    let need = |index: usize, band: usize, width: usize| {
        if band >= width {
            Err(NetworkError::OutOfRange { index, band, width })
        } else {
            Ok(())
        }
    };
    for (index, op) in ops.iter().enumerate() {
        let mut next: HashMap<Vec<Label>, Cyclo> = HashMap::with_capacity(state.len());
        let mut push = |k: Vec<Label>, v: Cyclo| {
            if v.is_zero() {
                return;
            }
            match next.get_mut(&k) {
                Some(e) => *e += &v,
                None => {
                    next.insert(k, v);
                }
            }
        };
        match *op {
            Op::Cup { i, a } => {
                if i > bands.len() {
                    return Err(NetworkError::OutOfRange { index, band: i, width: bands.len() });
                }
                for (x, v) in &state {
                    for y in q.labels() {
                        if q.adm(x[i], a, y) {
                            let mut nx = Vec::with_capacity(x.len() + 2);
                            nx.extend_from_slice(&x[..=i]);
                            nx.push(y);
                            nx.push(x[i]);
                            nx.extend_from_slice(&x[i + 1..]);
                            push(nx, v * q.qdim(y) * q.theta_inv(x[i], a, y));
                        }
                    }
                }
                bands.splice(i..i, [a, a]);
            }
            Op::Cap { i } => {
                need(index, i + 1, bands.len())?;
                let a = bands[i];
                if bands[i + 1] != a {
                    return Err(NetworkError::CapMismatch { index, left: a, right: bands[i + 1] });
                }
                for (x, v) in &state {
                    if x[i] == x[i + 2] {
                        let mut nx = Vec::with_capacity(x.len() - 2);
                        nx.extend_from_slice(&x[..=i]);
                        nx.extend_from_slice(&x[i + 3..]);
                        push(nx, v * q.theta(x[i], a, x[i + 1]) * q.qdim_inv(x[i]));
                    }
                }
                bands.drain(i..i + 2);
            }
            Op::Merge { i, c } => {
                need(index, i + 1, bands.len())?;
                let (a, b) = (bands[i], bands[i + 1]);
                if q.adm(a, b, c) {
                    for (x, v) in &state {
                        let (xl, y, z) = (x[i], x[i + 1], x[i + 2]);
                        if q.adm(xl, c, z) {
                            let mut nx = x.clone();
                            nx.remove(i + 1);
                            push(nx, v * q.tet(xl, a, b, z, y, c) * q.theta_inv(xl, c, z));
                        }
                    }
                }
                bands.splice(i..i + 2, [c]);
            }
            Op::Split { i, a, b } => {
                need(index, i, bands.len())?;
                let c = bands[i];
                if q.adm(a, b, c) {
                    for (x, v) in &state {
                        let (xl, z) = (x[i], x[i + 1]);
                        for y in q.labels() {
                            if q.adm(xl, a, y) && q.adm(y, b, z) {
                                let mut nx = x.clone();
                                nx.insert(i + 1, y);
                                let w = q.tet(xl, a, b, z, y, c)
                                    * q.qdim(y)
                                    * q.theta_inv(xl, a, y)
                                    * q.theta_inv(y, b, z);
                                push(nx, v * w);
                            }
                        }
                    }
                }
                bands.splice(i..=i, [a, b]);
            }
            Op::Cross { i, s } => {
                need(index, i + 1, bands.len())?;
                let (a, b) = (bands[i], bands[i + 1]);
                let mut memo: HashMap<(Label, Label, Label), Vec<(Label, Cyclo)>> = HashMap::new();
                for (x, v) in &state {
                    let (xl, y, z) = (x[i], x[i + 1], x[i + 2]);
                    let row = memo.entry((xl, y, z)).or_insert_with(|| cross_row(q, xl, a, b, z, y, s));
                    for (y2, w) in row.iter() {
                        let mut nx = x.clone();
                        nx[i + 1] = *y2;
                        push(nx, v * w);
                    }
                }
                bands.swap(i, i + 1);
            }
        }
        state = next;
    }
    if !bands.is_empty() {
        return Err(NetworkError::Unclosed(bands.len()));
    }
    Ok(state.remove(&vec![0]).unwrap_or_else(|| Cyclo::zero(m)))
}

fn cross_row(q: &QuantumData, x: Label, a: Label, b: Label, z: Label, y: Label, s: Crossing) -> Vec<(Label, Cyclo)> {
    let mut out: Vec<(Label, Cyclo)> = Vec::new();
    for c in q.labels() {
        if !(q.adm(a, b, c) && q.adm(x, c, z)) {
            continue;
        }
        let f = q.six_j(x, a, b, z, y, c);
        if f.is_zero() {
            continue;
        }
        let fl = f * q.braid_eigen(a, b, c, s);
        for y2 in q.labels() {
            if q.adm(x, b, y2) && q.adm(y2, a, z) {
                let g = q.tet(x, b, a, z, y2, c) * q.qdim(y2) * q.theta_inv(x, b, y2) * q.theta_inv(y2, a, z);
                let w = &fl * &g;
                match out.iter_mut().find(|(l, _)| *l == y2) {
                    Some(e) => e.1 += &w,
                    None => out.push((y2, w)),
                }
            }
        }
    }
    out.retain(|(_, w)| !w.is_zero());
    out
}

/// Scalar picked up by `h` half-turns of a band labelled `n`, measured
/// against its blackboard framing. `h * n` must be even.
pub fn half_twist_factor(q: &QuantumData, n: Label, h: i64) -> Cyclo {
    let n = n as i64;
    assert!((h * n) % 2 == 0, "odd number of strand half-twists");
    let e1 = h * n * (n - 1) / 2;
    let e2 = h * n / 2;
    let mut v = q.a_pow(e1 + 3 * e2);
    if e2 % 2 != 0 {
        v = -v;
    }
    v
}

/// Edge slot of the 4-simplex network: the tetrahedron opposite vertex `i`,
/// or the triangle opposite vertices `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Tet(u8),
    Tri(u8, u8),
}

/// Labels of one coloured 4-simplex, indexed by position in its sorted
/// vertex list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimplexColouring {
    pub tet: [Label; 5],
    /// `tri[i][j]` for `i < j`; other entries unused.
    pub tri: [[Label; 5]; 5],
}

impl SimplexColouring {
    pub fn get(&self, s: Slot) -> Label {
        match s {
            Slot::Tet(i) => self.tet[i as usize],
            Slot::Tri(i, j) => {
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                self.tri[i as usize][j as usize]
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum TemplateOp {
    Cup(usize, Slot),
    Cap(usize),
    Merge(usize, Slot),
    Split(usize, Slot, Slot),
    Cross(usize, Crossing),
}

use Crossing::{Over as P, Under as M};
use Slot::{Tet as T, Tri as F};
use TemplateOp::*;

// Projection of the boundary network of a positively oriented 4-simplex.
const TEMPLATE: [TemplateOp; 27] = [
    Cup(0, F(1, 4)),
    Split(1, T(1), F(1, 2)),
    Cup(3, F(1, 2)),
    Split(4, T(2), F(2, 4)),
    Cross(4, P),
    Cap(2),
    Cup(1, T(4)),
    Cross(2, M),
    Merge(0, F(3, 4)),
    Cup(2, F(0, 1)),
    Cup(4, F(0, 4)),
    Merge(5, F(2, 4)),
    Cap(5),
    Split(4, T(0), F(0, 2)),
    Merge(1, F(1, 3)),
    Merge(2, F(0, 3)),
    Cross(0, M),
    Cup(0, F(1, 3)),
    Split(1, T(3), F(3, 4)),
    Merge(6, F(2, 3)),
    Cross(0, P),
    Cross(1, P),
    Cap(2),
    Split(3, T(3), F(2, 3)),
    Cap(1),
    Cap(0),
    Cap(0),
];

// Band framing corrections of that projection, in half-turns.
const TWISTS: [(Slot, i64); 5] = [(T(1), -1), (T(2), 1), (F(1, 3), 2), (F(1, 4), -1), (F(2, 4), 1)];

/// Morse word of the 4-simplex network for a given colouring.
pub fn simplex_ops(c: &SimplexColouring) -> Vec<Op> {
    TEMPLATE
        .iter()
        .map(|op| match *op {
            Cup(i, s) => Op::Cup { i, a: c.get(s) },
            Cap(i) => Op::Cap { i },
            Merge(i, s) => Op::Merge { i, c: c.get(s) },
            Split(i, a, b) => Op::Split { i, a: c.get(a), b: c.get(b) },
            Cross(i, s) => Op::Cross { i, s },
        })
        .collect()
}

/// Framing correction of the simplex projection for a colouring.
pub fn simplex_framing(q: &QuantumData, c: &SimplexColouring) -> Cyclo {
    let mut v = Cyclo::one(q.conductor());
    let mut e1 = 0i64;
    let mut e2 = 0i64;
    for (s, h) in TWISTS {
        let n = c.get(s) as i64;
        e1 += h * n * (n - 1) / 2;
        e2 += h * n;
    }
    if e2 % 2 != 0 {
        // only reachable on inadmissible colourings
        return Cyclo::zero(q.conductor());
    }
    v = v * q.a_pow(e1 + 3 * (e2 / 2));
    if (e2 / 2) % 2 != 0 {
        v = -v;
    }
    v
}

/// The 15j symbol of a coloured 4-simplex; `mirror` selects the network of a
/// negatively oriented simplex.
pub fn fifteen_j(q: &QuantumData, c: &SimplexColouring, mirror: bool) -> Cyclo {
    let v = evaluate(q, &simplex_ops(c)).expect("simplex template is well formed") * simplex_framing(q, c);
    if mirror {
        v.conj()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknot_and_theta() {
        let q = QuantumData::build(5).unwrap();
        for a in q.labels() {
            let v = evaluate(&q, &[Op::Cup { i: 0, a }, Op::Cap { i: 0 }]).unwrap();
            assert_eq!(v, *q.qdim(a));
        }
        let ops = [Op::Cup { i: 0, a: 2 }, Op::Split { i: 0, a: 1, b: 1 }, Op::Merge { i: 0, c: 2 }, Op::Cap { i: 0 }];
        assert_eq!(evaluate(&q, &ops).unwrap(), q.theta(1, 1, 2));
    }

    #[test]
    fn kink_is_framing_factor() {
        let q = QuantumData::build(4).unwrap();
        let ops = [Op::Cup { i: 0, a: 1 }, Op::Cup { i: 1, a: 1 }, Op::Cross { i: 0, s: Crossing::Over }, Op::Cap { i: 1 }, Op::Cap { i: 0 }];
        let v = evaluate(&q, &ops).unwrap();
        let want = -(q.a_pow(3) * q.qdim(1));
        assert_eq!(v, want, "{} vs {}", v.to_complex(), want.to_complex());
    }

    #[test]
    fn half_twist_squares_to_twist() {
        let q = QuantumData::build(6).unwrap();
        for n in q.labels() {
            assert_eq!(half_twist_factor(&q, n, 2), *q.twist(n));
        }
    }

    #[test]
    fn malformed_words_are_rejected() {
        let q = QuantumData::build(4).unwrap();
        assert!(matches!(evaluate(&q, &[Op::Cup { i: 0, a: 1 }]), Err(NetworkError::Unclosed(2))));
        assert!(matches!(evaluate(&q, &[Op::Cap { i: 0 }]), Err(NetworkError::OutOfRange { .. })));
        let ops = [Op::Cup { i: 0, a: 1 }, Op::Cup { i: 1, a: 2 }, Op::Cap { i: 0 }];
        assert!(matches!(evaluate(&q, &ops), Err(NetworkError::CapMismatch { .. })));
    }

    #[test]
    fn trivial_colouring() {
        let q = QuantumData::build(4).unwrap();
        let c = SimplexColouring { tet: [0; 5], tri: [[0; 5]; 5] };
        assert!(fifteen_j(&q, &c, false).is_one());
    }
}

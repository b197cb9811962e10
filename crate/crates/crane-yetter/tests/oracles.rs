//! Independent evaluators used to pin down the engine: a strand-level
//! Temperley-Lieb calculus with explicit Jones-Wenzl projectors, and a naive
//! enumeration of every colouring of a complex.

use std::collections::HashMap;

use crane_yetter::network::{evaluate, fifteen_j, half_twist_factor, simplex_framing, simplex_ops, Op, SimplexColouring};
use crane_yetter::qcategory::{Crossing, Label, QuantumData};
use crane_yetter::scalars::{ComplexF, Cyclo};
use crane_yetter::simplicial::{parity, Triangulation};
use crane_yetter::statesum::{colouring_sum, crane_yetter_state_sum, mirrored, plan_contraction, tet_weight, StateSumOptions};
use proptest::prelude::*;

mod common;
use common::strands::{all_admissible_colourings, words, Strands, Word};
use common::{grow, load};

#[test]
fn strand_calculus_basics() {
    let q = QuantumData::build(5).unwrap();
    let s = Strands::new(&q);
    for a in q.labels() {
        let loop_ = [Op::Cup { i: 0, a }, Op::Cap { i: 0 }];
        assert_eq!(s.run(&words(&loop_)), *q.qdim(a));
        for b in q.labels() {
            for c in q.labels() {
                if !q.adm(a, b, c) {
                    continue;
                }
                let theta = [Op::Cup { i: 0, a: c }, Op::Split { i: 0, a, b }, Op::Merge { i: 0, c }, Op::Cap { i: 0 }];
                assert_eq!(s.run(&words(&theta)), q.theta(a, b, c), "theta {a} {b} {c}");
                assert_eq!(evaluate(&q, &theta).unwrap(), q.theta(a, b, c));
            }
        }
    }
}

#[test]
fn kinks_agree_with_fusion_basis() {
    let q = QuantumData::build(5).unwrap();
    let s = Strands::new(&q);
    for a in q.labels() {
        for cross in [Crossing::Over, Crossing::Under] {
            let kink = [Op::Cup { i: 0, a }, Op::Cup { i: 2, a }, Op::Cross { i: 1, s: cross }, Op::Cap { i: 0 }, Op::Cap { i: 0 }];
            assert_eq!(s.run(&words(&kink)), evaluate(&q, &kink).unwrap(), "label {a}");
        }
    }
}

#[test]
fn full_twists_match_twist_factor() {
    for r in 3..=6 {
        let q = QuantumData::build(r).unwrap();
        let s = Strands::new(&q);
        for n in q.labels() {
            // a ribbon full twist is the braid full twist plus one curl per strand
            let curl = |over: bool| -q.a_pow(if over { 3 } else { -3 });
            let mut got = Vec::new();
            for over in [true, false] {
                let w = [
                    Word::Op(Op::Cup { i: 0, a: n }),
                    Word::Twist { i: 0, over },
                    Word::Twist { i: 0, over },
                    Word::Op(Op::Cap { i: 0 }),
                ];
                got.push(s.run(&w) * curl(over).pow(n as i64));
            }
            let want = [2, -2].map(|h| half_twist_factor(&q, n, h) * q.qdim(n));
            let found = [got[0] == want[0] && got[1] == want[1], got[0] == want[1] && got[1] == want[0]];
            assert!(found[0] || found[1], "r={r} n={n}");
            assert_eq!(half_twist_factor(&q, n, 2), q.twist(n).clone());
        }
    }
}

fn check_simplex(q: &QuantumData, s: &Strands, c: &SimplexColouring) {
    let oracle = s.run(&words(&simplex_ops(c))) * simplex_framing(q, c);
    assert_eq!(fifteen_j(q, c, false), oracle, "{c:?}");
    assert_eq!(fifteen_j(q, c, true), oracle.conj(), "{c:?}");
}

#[test]
fn fifteen_j_matches_strand_calculus_level_three() {
    let q = QuantumData::build(3).unwrap();
    let s = Strands::new(&q);
    let cs = all_admissible_colourings(&q);
    assert!(cs.len() > 10);
    let mut nonzero = 0;
    for c in &cs {
        check_simplex(&q, &s, c);
        nonzero += usize::from(!fifteen_j(&q, c, false).is_zero());
    }
    assert!(nonzero > 0);
}

#[test]
fn fifteen_j_matches_strand_calculus_level_four() {
    let q = QuantumData::build(4).unwrap();
    let s = Strands::new(&q);
    let cs = all_admissible_colourings(&q);
    for c in cs.iter().step_by(7) {
        check_simplex(&q, &s, c);
    }
}

trait Value: Clone {
    fn lift(c: &Cyclo) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn plus(&mut self, o: &Self);
}

impl Value for Cyclo {
    fn lift(c: &Cyclo) -> Self {
        c.clone()
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn plus(&mut self, o: &Self) {
        *self += o;
    }
}

impl Value for ComplexF {
    fn lift(c: &Cyclo) -> Self {
        c.to_complex()
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn plus(&mut self, o: &Self) {
        *self += o;
    }
}

/// Sum over every admissible colouring of `t`, with no contraction order
/// and no sharing of partial products. Returns `None` past `budget` states.
fn naive_colouring_sum<V: Value>(t: &Triangulation, q: &QuantumData, budget: usize) -> Option<V> {
    let m = q.conductor();
    let tris = t.face_set(2);
    let tets = t.face_set(3);
    let tri_index: HashMap<&[u32], usize> = tris.iter().enumerate().map(|(k, v)| (v.as_slice(), k)).collect();
    let tet_index: HashMap<&[u32], usize> = tets.iter().enumerate().map(|(k, v)| (v.as_slice(), k)).collect();
    let omit = |v: &[u32], skip: &[usize]| -> Vec<u32> { v.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, &x)| x).collect() };
    let tet_faces: Vec<[usize; 4]> = tets.iter().map(|v| [0, 1, 2, 3].map(|k| tri_index[omit(v, &[k]).as_slice()])).collect();
    let oriented = t.validate_and_orient().ok();
    // per simplex: tetrahedron slots, triangle slots and chirality
    let simplices: Vec<([usize; 5], [[usize; 5]; 5], bool)> = t
        .simplices()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut v = s.to_vec();
            let sign = t.signs().map(|g| g[k]).unwrap_or_else(|| oriented.as_ref().and_then(|o| o.signs()).map_or(1, |g| g[k]));
            let sign = sign * parity(&v);
            v.sort();
            let mut tet = [0; 5];
            let mut tri = [[0; 5]; 5];
            for i in 0..5 {
                tet[i] = tet_index[omit(&v, &[i]).as_slice()];
                for j in i + 1..5 {
                    tri[i][j] = tri_index[omit(&v, &[i, j]).as_slice()];
                }
            }
            (tet, tri, mirrored(sign))
        })
        .collect();
    let mut tri_last: Vec<Vec<usize>> = vec![Vec::new(); tris.len()];
    for (k, f) in tet_faces.iter().enumerate() {
        tri_last[*f.iter().max().unwrap()].push(k);
    }

    let mut tri_labels = vec![0 as Label; tris.len()];
    let mut assignments: Vec<Vec<Label>> = Vec::new();
    fn tri_rec(k: usize, n: Label, faces: &[[usize; 4]], last: &[Vec<usize>], labels: &mut Vec<Label>, out: &mut Vec<Vec<Label>>, budget: usize) -> bool {
        if k == labels.len() {
            out.push(labels.clone());
            return out.len() <= budget;
        }
        for l in 0..n {
            labels[k] = l;
            if last[k].iter().all(|&t| faces[t].iter().map(|&f| labels[f]).sum::<Label>() % 2 == 0) && !tri_rec(k + 1, n, faces, last, labels, out, budget) {
                return false;
            }
        }
        true
    }
    if !tri_rec(0, q.num_labels() as Label, &tet_faces, &tri_last, &mut tri_labels, &mut assignments, budget) {
        return None;
    }

    let dims: Vec<V> = q.labels().map(|l| V::lift(q.qdim(l))).collect();
    let mut memo: HashMap<(SimplexColouring, bool), V> = HashMap::new();
    let mut weights: HashMap<([Label; 4], Label), V> = HashMap::new();
    let mut total = V::lift(&Cyclo::zero(m));
    for tri in &assignments {
        let mut tet = vec![0 as Label; tets.len()];
        let mut stack = vec![0usize];
        // iterate every tetrahedron assignment in lexicographic order
        loop {
            let k = stack.len() - 1;
            if k == tets.len() {
                let mut w = V::lift(&Cyclo::one(m));
                for &l in tri {
                    w = w.times(&dims[l as usize]);
                }
                for (x, f) in tet_faces.iter().enumerate() {
                    let key = ([tri[f[0]], tri[f[1]], tri[f[2]], tri[f[3]]], tet[x]);
                    w = w.times(weights.entry(key).or_insert_with(|| V::lift(&tet_weight(q, key.0, key.1))));
                }
                for (ts, fs, mirror) in &simplices {
                    let mut c = SimplexColouring { tet: [0; 5], tri: [[0; 5]; 5] };
                    for i in 0..5 {
                        c.tet[i] = tet[ts[i]];
                        for j in i + 1..5 {
                            c.tri[i][j] = tri[fs[i][j]];
                        }
                    }
                    w = w.times(memo.entry((c, *mirror)).or_insert_with(|| V::lift(&fifteen_j(q, &c, *mirror))));
                }
                total.plus(&w);
                stack.pop();
            } else {
                let l = stack[k];
                if l >= q.num_labels() {
                    stack.pop();
                } else {
                    stack[k] += 1;
                    let f = tet_faces[k].map(|x| tri[x]);
                    if q.adm(f[0], f[2], l as Label) && q.adm(f[1], f[3], l as Label) {
                        tet[k] = l as Label;
                        stack.push(0);
                    }
                    continue;
                }
            }
            if stack.is_empty() {
                break;
            }
        }
    }
    Some(total)
}

fn engine_sum(t: &Triangulation, q: &QuantumData) -> Cyclo {
    let plan = plan_contraction(t);
    colouring_sum(t, q, &plan, &StateSumOptions::default()).unwrap()
}

#[test]
fn naive_sum_on_small_spheres() {
    let q = QuantumData::build(3).unwrap();
    for name in ["s4_boundary5.tri", "s4_flip15.tri"] {
        let t = load(name).validate_and_orient().unwrap();
        let naive: Cyclo = naive_colouring_sum(&t, &q, 1 << 16).unwrap();
        assert_eq!(naive, engine_sum(&t, &q), "{name}");
        let [n0, n1, ..] = t.counts();
        let n = q.global_dimension().clone();
        let pref = n.pow(n0 as i64 - n1 as i64);
        assert_eq!(naive * pref, crane_yetter_state_sum(&t, &q, &plan_contraction(&t), &StateSumOptions::default()).unwrap(), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn contraction_matches_naive_on_cp2_pieces(seed in 0usize..36, choices in prop::collection::vec(0usize..64, 0..8)) {
        let q = QuantumData::build(3).unwrap();
        let cp2 = load("cp2_9.tri").validate_and_orient().unwrap();
        let piece = grow(&cp2, seed, &choices);
        let naive: Option<Cyclo> = naive_colouring_sum(&piece, &q, 1 << 12);
        prop_assume!(naive.is_some());
        prop_assert_eq!(naive.unwrap(), engine_sum(&piece, &q));
    }
}

/// Like `grow`, but each new simplex is the one adding fewest triangles.
fn grow_compact(t: &Triangulation, seed: usize, size: usize) -> Triangulation {
    let tri_set = |k: usize| -> Vec<Vec<u32>> {
        let mut v = t.simplices()[k].to_vec();
        v.sort();
        (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).map(|(i, j)| v.iter().enumerate().filter(|&(x, _)| x != i && x != j).map(|(_, &y)| y).collect()).collect()
    };
    let mut chosen = vec![seed];
    let mut seen: std::collections::BTreeSet<Vec<u32>> = tri_set(seed).into_iter().collect();
    while chosen.len() < size {
        let next = (0..t.simplices().len()).filter(|k| !chosen.contains(k)).min_by_key(|&k| tri_set(k).iter().filter(|f| !seen.contains(*f)).count()).unwrap();
        seen.extend(tri_set(next));
        chosen.push(next);
    }
    let signs = t.signs().unwrap();
    Triangulation::from_simplices(chosen.iter().map(|&k| t.simplices()[k]).collect(), Some(chosen.iter().map(|&k| signs[k]).collect())).unwrap()
}

#[test]
fn contraction_matches_naive_on_eight_simplex_pieces() {
    let q = QuantumData::build(3).unwrap();
    let cp2 = load("cp2_9.tri").validate_and_orient().unwrap();
    for seed in [0, 14] {
        let piece = grow_compact(&cp2, seed, 8);
        let naive: ComplexF = naive_colouring_sum(&piece, &q, 1 << 20).expect("piece small enough to enumerate");
        let engine = engine_sum(&piece, &q).to_complex();
        assert!(engine.norm() > 1e-6);
        assert!((naive - engine).norm() <= 1e-9 * (1.0 + engine.norm()), "seed {seed}: {naive} vs {engine}");
    }
}

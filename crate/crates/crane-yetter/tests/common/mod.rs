#![allow(dead_code)]

pub mod strands;

use std::collections::BTreeMap;

use crane_yetter::simplicial::{parse_triangulation, Triangulation};

pub fn load(name: &str) -> Triangulation {
    let path = format!("{}/data/{}", env!("CARGO_MANIFEST_DIR"), name);
    parse_triangulation(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A connected sub-complex of `t` grown from simplex `seed`, adding at each
/// step the neighbour picked by `choices`.
pub fn grow(t: &Triangulation, seed: usize, choices: &[usize]) -> Triangulation {
    let tets = t.face_set(3);
    let mut by_tet: BTreeMap<&[u32], Vec<usize>> = BTreeMap::new();
    for (k, s) in t.simplices().iter().enumerate() {
        let mut v = s.to_vec();
        v.sort();
        for i in 0..5 {
            let f: Vec<u32> = v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            if let Some(key) = tets.iter().find(|x| **x == f) {
                by_tet.entry(key.as_slice()).or_default().push(k);
            }
        }
    }
    let mut chosen = vec![seed % t.simplices().len()];
    for &c in choices {
        let mut frontier: Vec<usize> = by_tet.values().filter(|ks| ks.iter().any(|k| chosen.contains(k))).flatten().copied().filter(|k| !chosen.contains(k)).collect();
        frontier.sort();
        frontier.dedup();
        if frontier.is_empty() {
            break;
        }
        chosen.push(frontier[c % frontier.len()]);
    }
    let signs = t.signs().unwrap();
    Triangulation::from_simplices(chosen.iter().map(|&k| t.simplices()[k]).collect(), Some(chosen.iter().map(|&k| signs[k]).collect())).unwrap()
}


/// Apply each `(kind, index)` as a bistellar move where it is legal,
/// skipping the ones that are not.
pub fn apply_moves(t: &Triangulation, moves: &[(u8, usize)]) -> Triangulation {
    use crane_yetter::simplicial::BistellarMove;
    let mut t = t.clone();
    for &(kind, idx) in moves {
        let mv = match kind % 3 {
            0 => BistellarMove::OneFive { simplex: idx % t.simplices().len() },
            1 => {
                let tets = t.face_set(3);
                let v = &tets[idx % tets.len()];
                BistellarMove::TwoFour { tet: [v[0], v[1], v[2], v[3]] }
            }
            _ => {
                let tris = t.face_set(2);
                let v = &tris[idx % tris.len()];
                BistellarMove::ThreeThree { triangle: [v[0], v[1], v[2]] }
            }
        };
        if let Ok(next) = t.bistellar_flip(&mv) {
            t = next;
        }
    }
    t
}

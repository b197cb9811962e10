//! Rational simplicial homology, the cup-product intersection form on H²
//! and its signature, all in exact arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::simplicial::{Triangulation, TriangulationError};

type Q = BigRational;

/// Dense integer boundary matrix `∂_k : C_k → C_{k-1}`, indexed
/// `[row = (k-1)-cell][column = k-cell]`.
pub fn boundary_matrix(t: &Triangulation, k: usize) -> Vec<Vec<i64>> {
    assert!((1..=4).contains(&k));
    let rows = t.cells(k - 1).len();
    let mut m = vec![vec![0i64; t.cells(k).len()]; rows];
    for (j, c) in t.cells(k).iter().enumerate() {
        for (i, &f) in c.faces.iter().enumerate() {
            m[f][j] += if i % 2 == 0 { 1 } else { -1 };
        }
    }
    m
}

/// True when `∂_{k-1} ∘ ∂_k = 0` for `k = 2..=4`.
pub fn boundary_squared_vanishes(t: &Triangulation) -> bool {
    (2..=4).all(|k| {
        let a = boundary_matrix(t, k - 1);
        let b = boundary_matrix(t, k);
        a.iter().all(|row| (0..t.cells(k).len()).all(|j| row.iter().enumerate().map(|(i, &x)| x * b[i][j]).sum::<i64>() == 0))
    })
}

fn to_q(m: &[Vec<i64>]) -> Vec<Vec<Q>> {
    m.iter().map(|r| r.iter().map(|&x| Q::from_integer(BigInt::from(x))).collect()).collect()
}

fn transpose<T: Clone>(m: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Reduced row echelon form in place; returns pivot columns. Pivot rows are
/// chosen with the fewest nonzero entries to limit fill.
fn rref(m: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let best = (row..m.len())
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r].iter().filter(|x| !x.is_zero()).count());
        let Some(p) = best else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (x, y) in other.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<i64>]) -> usize {
    let mut q = to_q(m);
    rref(&mut q).len()
}

/// Basis of the null space of `m` (as column vectors of length `cols`).
fn kernel(m: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut r = m.to_vec();
    let piv = rref(&mut r);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (i, &p) in piv.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

/// `(b₀, …, b₄)` over ℚ.
pub fn betti_numbers(t: &Triangulation) -> [usize; 5] {
    let n = t.counts();
    let mut rk = [0usize; 6];
    for k in 1..=4 {
        rk[k] = rank(&boundary_matrix(t, k));
    }
    [0, 1, 2, 3, 4].map(|k| n[k] - rk[k] - rk[k + 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionForm {
    /// Cocycle representatives of a basis of H²(M; ℚ), indexed by triangle.
    pub basis: Vec<Vec<Q>>,
    pub matrix: Vec<Vec<Q>>,
}

impl IntersectionForm {
    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    /// Matrix entries as strings, for reporting.
    pub fn matrix_strings(&self) -> Vec<Vec<String>> {
        self.matrix.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }
}

/// Basis of Z² modulo B², with `Q[i][j] = Σ_ρ sign(ρ) αᵢ(v₀v₁v₂) αⱼ(v₂v₃v₄)`.
pub fn intersection_form(t: &Triangulation) -> Result<IntersectionForm, TriangulationError> {
    let t = t.require_closed_oriented()?;
    let n = t.counts();
    // δ² = ∂₃ᵀ acting on 2-cochains; its kernel is Z²
    let d3t = transpose(&to_q(&boundary_matrix(&t, 3)), n[3]);
    let cocycles = kernel(&d3t, n[2]);
    // coboundaries: columns of δ¹ = ∂₂ᵀ, i.e. rows of ∂₂
    let mut span: Vec<Vec<Q>> = to_q(&boundary_matrix(&t, 2));
    let mut base_rank = {
        let mut s = span.clone();
        rref(&mut s).len()
    };
    let mut basis = Vec::new();
    for z in cocycles {
        span.push(z.clone());
        let mut s = span.clone();
        let rk = rref(&mut s).len();
        if rk > base_rank {
            base_rank = rk;
            basis.push(z);
        } else {
            span.pop();
        }
    }
    let signs = t.sorted_signs().expect("oriented");
    let mut front = Vec::with_capacity(n[4]);
    let mut back = Vec::with_capacity(n[4]);
    for top in t.cells(4) {
        // face 4 of (v0..v4) is v0v1v2v3, whose face 3 is v0v1v2
        let f = t.cells(3)[top.faces[4]].faces[3];
        // face 0 is v1v2v3v4, whose face 0 is v2v3v4
        let b = t.cells(3)[top.faces[0]].faces[0];
        front.push(f);
        back.push(b);
    }
    let k = basis.len();
    let mut matrix = vec![vec![Q::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Q::zero();
            for r in 0..n[4] {
                let x = &basis[i][front[r]] * &basis[j][back[r]];
                if signs[r] > 0 {
                    s += x;
                } else {
                    s -= x;
                }
            }
            matrix[i][j] = s;
        }
    }
    Ok(IntersectionForm { basis, matrix })
}

/// Diagonal of a congruence diagonalization `PᵀQP` of a symmetric matrix.
pub fn congruence_diagonal(q: &[Vec<Q>]) -> Vec<Q> {
    let mut a: Vec<Vec<Q>> = q.to_vec();
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let piv = active.iter().copied().find(|&i| !a[i][i].is_zero());
        let p = match piv {
            Some(p) => p,
            None => {
                // all remaining diagonal entries vanish: find an off-diagonal
                // pair and replace e_i by e_i + e_j
                let pair = active.iter().flat_map(|&i| active.iter().map(move |&j| (i, j))).find(|&(i, j)| i != j && !a[i][j].is_zero());
                let Some((i, j)) = pair else {
                    out.extend(active.iter().map(|_| Q::zero()));
                    break;
                };
                // row/column operation: add j to i
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                i
            }
        };
        let d = a[p][p].clone();
        for &i in &active {
            if i == p || a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &d;
            for c in 0..n {
                let v = &f * &a[p][c];
                a[i][c] -= v;
            }
            for r in 0..n {
                let v = &f * &a[r][p];
                a[r][i] -= v;
            }
        }
        out.push(d);
        active.retain(|&i| i != p);
    }
    out
}

pub fn signature_of_form(q: &[Vec<Q>]) -> i64 {
    congruence_diagonal(q).iter().map(|d| if d.is_positive() { 1 } else if d.is_negative() { -1 } else { 0 }).sum()
}

pub fn signature(t: &Triangulation) -> Result<i64, TriangulationError> {
    Ok(signature_of_form(&intersection_form(t)?.matrix))
}

//! Vertex-ordered triangulations of closed 4-manifolds.
//!
//! A triangulation stores its top simplices as given (file order, with an
//! optional orientation sign each) together with a cell structure in every
//! dimension. Cells carry sorted vertex lists and explicit face maps, so the
//! same type also represents Δ-complexes in which distinct cells share a
//! vertex set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = u32;
pub type Simplex = [Vertex; 5];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("input contains no simplices")]
    EmptyInput,
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {line}: simplex {simplex:?} repeats a vertex")]
    DegenerateSimplex { line: usize, simplex: Vec<Vertex> },
    #[error("orientation cannot be propagated consistently")]
    NonOrientable,
    #[error("supplied orientation signs disagree across tetrahedron {0:?}")]
    InconsistentSigns(Vec<Vertex>),
    #[error("triangulation has {0} tetrahedra lying in fewer than two 4-simplices")]
    NotClosed(usize),
    #[error("boundary identification is invalid: {0}")]
    BoundaryMismatch(String),
    #[error("invalid move location: {0}")]
    InvalidMoveLocation(String),
}

/// A cell of the complex: sorted vertex list and the indices of its
/// codimension-one faces, face `i` omitting vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub vertices: Vec<Vertex>,
    pub faces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    simplices: Vec<Simplex>,
    signs: Option<Vec<i8>>,
    /// `cells[k]` are the k-cells; `cells[4][i]` is `simplices[i]`.
    cells: [Vec<Cell>; 5],
    cofaces: Vec<Vec<(usize, usize)>>,
    closed: bool,
    orientable: Option<bool>,
    simplicial: bool,
}

/// Sign of the permutation sorting `v`.
pub fn parity(v: &[Vertex]) -> i8 {
    let mut s = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                s = -s;
            }
        }
    }
    s
}

fn sorted(v: &Simplex) -> Simplex {
    let mut s = *v;
    s.sort_unstable();
    s
}

impl Triangulation {
    /// Build a simplicial complex: faces are identified by vertex set.
    pub fn from_simplices(simplices: Vec<Simplex>, signs: Option<Vec<i8>>) -> Result<Triangulation, TriangulationError> {
        Self::from_tagged(simplices, signs, |_, _| 0)
    }

    /// Build a complex in which a proper face of top simplex `i` with vertex
    /// set `f` is identified with every other face carrying the same
    /// `(tag(i, f), f)`.
    pub fn from_tagged(
        simplices: Vec<Simplex>,
        signs: Option<Vec<i8>>,
        tag: impl Fn(usize, &[Vertex]) -> u32,
    ) -> Result<Triangulation, TriangulationError> {
        if simplices.is_empty() {
            return Err(TriangulationError::EmptyInput);
        }
        for (i, s) in simplices.iter().enumerate() {
            let t = sorted(s);
            if t.windows(2).any(|w| w[0] == w[1]) {
                return Err(TriangulationError::DegenerateSimplex { line: i + 1, simplex: s.to_vec() });
            }
        }
        if let Some(sg) = &signs {
            assert_eq!(sg.len(), simplices.len(), "one sign per simplex");
        }
        let mut index: [HashMap<(u32, Vec<Vertex>), usize>; 4] = Default::default();
        let mut cells: [Vec<Cell>; 5] = Default::default();
        fn intern(
            k: usize,
            verts: &[Vertex],
            top: usize,
            tag: &dyn Fn(usize, &[Vertex]) -> u32,
            index: &mut [HashMap<(u32, Vec<Vertex>), usize>; 4],
            cells: &mut [Vec<Cell>; 5],
        ) -> usize {
            let key = (tag(top, verts), verts.to_vec());
            if let Some(&i) = index[k].get(&key) {
                return i;
            }
            let faces = if k == 0 {
                Vec::new()
            } else {
                (0..=k)
                    .map(|i| {
                        let f: Vec<Vertex> = verts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                        intern(k - 1, &f, top, tag, index, cells)
                    })
                    .collect()
            };
            let id = cells[k].len();
            cells[k].push(Cell { vertices: verts.to_vec(), faces });
            index[k].insert(key, id);
            id
        }
        for (ti, s) in simplices.iter().enumerate() {
            let t = sorted(s);
            let faces = (0..5)
                .map(|i| {
                    let f: Vec<Vertex> = t.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                    intern(3, &f, ti, &tag, &mut index, &mut cells)
                })
                .collect();
            cells[4].push(Cell { vertices: t.to_vec(), faces });
        }
        let mut cofaces = vec![Vec::new(); cells[3].len()];
        for (ti, c) in cells[4].iter().enumerate() {
            for (i, &f) in c.faces.iter().enumerate() {
                cofaces[f].push((ti, i));
            }
        }
        let closed = cofaces.iter().all(|c| c.len() == 2);
        let simplicial = cells.iter().all(|layer| {
            let mut seen = BTreeSet::new();
            layer.iter().all(|c| seen.insert(c.vertices.clone()))
        });
        Ok(Triangulation { simplices, signs, cells, cofaces, closed, orientable: None, simplicial })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// Orientation signs of the tuples as given, if fixed.
    pub fn signs(&self) -> Option<&[i8]> {
        self.signs.as_deref()
    }

    /// Orientation of each top simplex relative to its sorted vertex order.
    pub fn sorted_signs(&self) -> Option<Vec<i8>> {
        self.signs.as_ref().map(|sg| self.simplices.iter().zip(sg).map(|(s, &e)| e * parity(s)).collect())
    }

    pub fn cells(&self, k: usize) -> &[Cell] {
        &self.cells[k]
    }

    /// The face census `T_k` as sorted vertex tuples, one per cell.
    pub fn face_set(&self, k: usize) -> Vec<Vec<Vertex>> {
        let mut v: Vec<Vec<Vertex>> = self.cells[k].iter().map(|c| c.vertices.clone()).collect();
        v.sort();
        v
    }

    pub fn counts(&self) -> [usize; 5] {
        [0, 1, 2, 3, 4].map(|k| self.cells[k].len())
    }

    pub fn euler_characteristic(&self) -> i64 {
        let n = self.counts();
        n[0] as i64 - n[1] as i64 + n[2] as i64 - n[3] as i64 + n[4] as i64
    }

    /// `(n₀…n₄, χ)`.
    pub fn face_census(&self) -> ([usize; 5], i64) {
        (self.counts(), self.euler_characteristic())
    }

    pub fn vertex_count(&self) -> usize {
        self.cells[0].len()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        self.cells[0].iter().map(|c| c.vertices[0]).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_orientable(&self) -> Option<bool> {
        self.orientable
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    pub fn is_oriented(&self) -> bool {
        self.signs.is_some() && self.orientable == Some(true)
    }

    /// Top cells containing tetrahedron `t`, each with the position of `t`
    /// among its faces.
    pub fn cofaces(&self, t: usize) -> &[(usize, usize)] {
        &self.cofaces[t]
    }

    /// Indices of tetrahedra lying in exactly one top simplex.
    pub fn boundary_tets(&self) -> Vec<usize> {
        (0..self.cells[3].len()).filter(|&t| self.cofaces[t].len() == 1).collect()
    }

    /// Determine closedness and orientability and fix an orientation. Signs
    /// already present are kept when consistent; otherwise the
    /// lexicographically least simplex of each component gets +1 relative
    /// to its sorted vertex order.
    pub fn validate_and_orient(&self) -> Result<Triangulation, TriangulationError> {
        let n = self.simplices.len();
        if self.cofaces.iter().any(|c| c.len() > 2) {
            self.orientation_failure()?;
        }
        let propagated = self.propagate()?;
        let mut out = self.clone();
        out.orientable = Some(true);
        match &self.sorted_signs() {
            Some(given) => {
                for t in 0..self.cells[3].len() {
                    if let [(p, i), (q, j)] = self.cofaces[t][..] {
                        let a = given[p] * if i % 2 == 0 { 1 } else { -1 };
                        let b = given[q] * if j % 2 == 0 { 1 } else { -1 };
                        if a != -b {
                            return Err(TriangulationError::InconsistentSigns(self.cells[3][t].vertices.clone()));
                        }
                    }
                }
            }
            None => {
                out.signs = Some((0..n).map(|k| propagated[k] * parity(&self.simplices[k])).collect());
            }
        }
        Ok(out)
    }

    fn orientation_failure(&self) -> Result<(), TriangulationError> {
        Err(TriangulationError::NonOrientable)
    }

    /// Signs relative to sorted order, propagated across shared tetrahedra
    /// from the least simplex of each component.
    fn propagate(&self) -> Result<Vec<i8>, TriangulationError> {
        let n = self.simplices.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.cells[4][a].vertices.cmp(&self.cells[4][b].vertices).then(a.cmp(&b)));
        let mut sg = vec![0i8; n];
        for &seed in &order {
            if sg[seed] != 0 {
                continue;
            }
            sg[seed] = 1;
            let mut stack = vec![seed];
            while let Some(k) = stack.pop() {
                for (i, &t) in self.cells[4][k].faces.iter().enumerate() {
                    let cf = &self.cofaces[t];
                    if cf.len() != 2 {
                        continue;
                    }
                    let (o, j) = if cf[0] == (k, i) { cf[1] } else { cf[0] };
                    let me = if i % 2 == 0 { 1 } else { -1 };
                    let so = if j % 2 == 0 { 1 } else { -1 };
                    let need = -sg[k] * me * so;
                    if sg[o] == 0 {
                        sg[o] = need;
                        stack.push(o);
                    } else if sg[o] != need {
                        return Err(TriangulationError::NonOrientable);
                    }
                }
            }
        }
        Ok(sg)
    }

    /// Require a closed, oriented triangulation.
    pub fn require_closed_oriented(&self) -> Result<Triangulation, TriangulationError> {
        if !self.closed {
            return Err(TriangulationError::NotClosed(self.cofaces.iter().filter(|c| c.len() < 2).count()));
        }
        if self.is_oriented() {
            Ok(self.clone())
        } else {
            self.validate_and_orient()
        }
    }

    pub fn reverse_orientation(&self) -> Triangulation {
        let mut out = self.clone();
        if let Some(sg) = &mut out.signs {
            for s in sg.iter_mut() {
                *s = -*s;
            }
        }
        out
    }

    /// Rename vertices through `map`, which must be injective on the vertex
    /// set. Orientations follow the tuples.
    pub fn relabel(&self, map: &dyn Fn(Vertex) -> Vertex) -> Triangulation {
        let simplices = self.simplices.iter().map(|s| s.map(map)).collect();
        let mut t = Triangulation::from_simplices(simplices, self.signs.clone()).expect("relabeling keeps simplices valid");
        if !self.simplicial {
            // face identifications are by tag; rebuild via the cell map
            t = self.relabel_cells(map);
        }
        t.orientable = self.orientable;
        t
    }

    fn relabel_cells(&self, map: &dyn Fn(Vertex) -> Vertex) -> Triangulation {
        let tags = self.cell_tags();
        let simplices: Vec<Simplex> = self.simplices.iter().map(|s| s.map(map)).collect();
        let lookup: HashMap<(usize, Vec<Vertex>), u32> = tags;
        let inv: HashMap<Vertex, Vertex> = self.vertices().into_iter().map(|v| (map(v), v)).collect();
        Triangulation::from_tagged(simplices, self.signs.clone(), |top, f| {
            let orig: Vec<Vertex> = {
                let mut o: Vec<Vertex> = f.iter().map(|v| inv[v]).collect();
                o.sort_unstable();
                o
            };
            lookup[&(top, orig)]
        })
        .expect("relabeling keeps simplices valid")
    }

    /// For each top simplex and each proper face vertex set, the index of
    /// the cell it maps to; used to carry face identifications along.
    fn cell_tags(&self) -> HashMap<(usize, Vec<Vertex>), u32> {
        let mut out = HashMap::new();
        for (ti, top) in self.cells[4].iter().enumerate() {
            let mut stack: Vec<(usize, usize)> = top.faces.iter().map(|&f| (3, f)).collect();
            while let Some((k, c)) = stack.pop() {
                let cell = &self.cells[k][c];
                out.insert((ti, cell.vertices.clone()), c as u32);
                if k > 0 {
                    stack.extend(cell.faces.iter().map(|&f| (k - 1, f)));
                }
            }
        }
        out
    }

    fn max_vertex(&self) -> Vertex {
        self.vertices().into_iter().max().unwrap_or(0)
    }

    /// Disjoint union; the second summand's vertices are shifted past the
    /// first's.
    pub fn disjoint_union(&self, other: &Triangulation) -> Triangulation {
        self.glue(other, &BTreeMap::new()).expect("empty identification always glues")
    }

    /// Glue `other` to `self` along boundary tetrahedra. `boundary_map`
    /// sends boundary vertices of `self` to boundary vertices of `other`
    /// and must carry the boundary complexes onto each other. The result is
    /// a Δ-complex when identified cells collide.
    pub fn glue(&self, other: &Triangulation, boundary_map: &BTreeMap<Vertex, Vertex>) -> Result<Triangulation, TriangulationError> {
        let bad = |m: String| Err(TriangulationError::BoundaryMismatch(m));
        let vs_a: BTreeSet<Vertex> = self.vertices().into_iter().collect();
        let vs_b: BTreeSet<Vertex> = other.vertices().into_iter().collect();
        let mut inverse: BTreeMap<Vertex, Vertex> = BTreeMap::new();
        for (&x, &y) in boundary_map {
            if !vs_a.contains(&x) || !vs_b.contains(&y) {
                return bad(format!("{} -> {} is not between vertices", x, y));
            }
            if inverse.insert(y, x).is_some() {
                return bad(format!("vertex {} is hit twice", y));
            }
        }
        let bd_a: BTreeSet<Vec<Vertex>> = self.boundary_tets().iter().map(|&t| self.cells[3][t].vertices.clone()).collect();
        let bd_b: BTreeSet<Vec<Vertex>> = other.boundary_tets().iter().map(|&t| other.cells[3][t].vertices.clone()).collect();
        let mapped_a: BTreeSet<BTreeSet<Vertex>> =
            bd_a.iter().filter(|t| t.iter().all(|v| boundary_map.contains_key(v))).map(|t| t.iter().map(|v| boundary_map[v]).collect()).collect();
        let glued_b: BTreeSet<BTreeSet<Vertex>> =
            bd_b.iter().filter(|t| t.iter().all(|v| inverse.contains_key(v))).map(|t| t.iter().copied().collect()).collect();
        if mapped_a != glued_b {
            return bad("the map does not carry boundary tetrahedra onto boundary tetrahedra".into());
        }
        // every boundary face whose vertices are all identified must lie in
        // a glued tetrahedron on both sides
        let faces_of = |tets: &mut dyn Iterator<Item = Vec<Vertex>>| -> BTreeSet<Vec<Vertex>> {
            let mut out = BTreeSet::new();
            for t in tets {
                for mask in 1u32..16 {
                    out.insert(t.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect::<Vec<_>>());
                }
            }
            out
        };
        let glued_a_faces = faces_of(&mut mapped_a.iter().map(|t| {
            let mut v: Vec<Vertex> = t.iter().map(|y| inverse[y]).collect();
            v.sort_unstable();
            v
        }));
        let touched_a = faces_of(&mut bd_a.iter().cloned());
        for f in &touched_a {
            if f.iter().all(|v| boundary_map.contains_key(v)) && !glued_a_faces.contains(f) {
                return bad(format!("face {:?} is identified outside the glued tetrahedra", f));
            }
        }
        let glued_b_faces = faces_of(&mut glued_b.iter().map(|t| t.iter().copied().collect()));
        for f in &faces_of(&mut bd_b.iter().cloned()) {
            if f.iter().all(|v| inverse.contains_key(v)) && !glued_b_faces.contains(f) {
                return bad(format!("face {:?} is identified outside the glued tetrahedra", f));
            }
        }
        if boundary_map.keys().any(|v| !glued_a_faces.contains(&vec![*v])) {
            return bad("a mapped vertex lies in no glued tetrahedron".into());
        }
        let shift = self.max_vertex() + 1;
        let rename = |v: Vertex| -> Vertex { inverse.get(&v).copied().unwrap_or(v + shift) };
        let glued_images: BTreeSet<BTreeSet<Vertex>> = glued_b.iter().map(|t| t.iter().map(|&v| rename(v)).collect()).collect();
        let na = self.simplices.len();
        let mut simplices = self.simplices.clone();
        simplices.extend(other.simplices.iter().map(|s| s.map(rename)));
        let signs = match (&self.signs, &other.signs) {
            (Some(a), Some(b)) => Some(a.iter().chain(b.iter()).copied().collect()),
            _ => None,
        };
        let tags_a = self.cell_tags();
        let tags_b = other.cell_tags();
        let inv_rename: HashMap<Vertex, Vertex> = vs_b.iter().map(|&v| (rename(v), v)).collect();
        // cells on the gluing locus belong to the first summand; all other
        // cells stay private to their summand
        let mut shared: HashMap<Vec<Vertex>, u32> = HashMap::new();
        for &t in &self.boundary_tets() {
            let verts: BTreeSet<Vertex> = self.cells[3][t].vertices.iter().copied().collect();
            if !glued_images.contains(&verts) {
                continue;
            }
            let mut stack = vec![(3usize, t)];
            while let Some((k, c)) = stack.pop() {
                let cell = &self.cells[k][c];
                shared.insert(cell.vertices.clone(), c as u32);
                if k > 0 {
                    stack.extend(cell.faces.iter().map(|&f| (k - 1, f)));
                }
            }
        }
        let out = Triangulation::from_tagged(simplices, signs, |top, f| {
            if top < na {
                tags_a[&(top, f.to_vec())] * 2
            } else if let Some(&c) = shared.get(f) {
                c * 2
            } else {
                let mut o: Vec<Vertex> = f.iter().map(|v| inv_rename[v]).collect();
                o.sort_unstable();
                tags_b[&(top - na, o)] * 2 + 1
            }
        })?;
        Ok(out)
    }

    fn cell_of(&self, verts: &[Vertex]) -> Option<usize> {
        let k = verts.len() - 1;
        self.cells[k].iter().position(|c| c.vertices == verts)
    }

    /// Connected sum: remove the least top simplex of each summand and glue
    /// the resulting boundary spheres so that orientations agree. With
    /// `reverse_b` the second summand enters with reversed orientation.
    pub fn connected_sum(&self, other: &Triangulation, reverse_b: bool) -> Result<Triangulation, TriangulationError> {
        let a = self.require_closed_oriented()?;
        let mut b = other.require_closed_oriented()?;
        if reverse_b {
            b = b.reverse_orientation();
        }
        let pick = |t: &Triangulation| (0..t.simplices.len()).min_by_key(|&i| t.cells[4][i].vertices.clone()).unwrap();
        let ia = pick(&a);
        let ib = pick(&b);
        let sa = a.cells[4][ia].vertices.clone();
        let sb = b.cells[4][ib].vertices.clone();
        let shift = a.max_vertex() + 1;
        let a_rest = a.remove_simplex(ia);
        let b_rest = b.remove_simplex(ib);
        let b_rest = b_rest.relabel(&|v| v + shift);
        for swap in [false, true] {
            let mut map = BTreeMap::new();
            for i in 0..5 {
                let j = if swap && i < 2 { 1 - i } else { i };
                map.insert(sa[i], sb[j] + shift);
            }
            let glued = a_rest.glue(&b_rest, &map)?;
            if let Ok(t) = glued.validate_and_orient() {
                return Ok(t);
            }
        }
        Err(TriangulationError::NonOrientable)
    }

    fn remove_simplex(&self, i: usize) -> Triangulation {
        let mut simplices = self.simplices.clone();
        simplices.remove(i);
        let signs = self.signs.clone().map(|mut s| {
            s.remove(i);
            s
        });
        let mut t = Triangulation::from_simplices(simplices, signs).expect("nonempty remainder");
        t.orientable = self.orientable;
        t
    }

    /// Apply a single bistellar move. Orientation, when fixed, is carried
    /// along from the untouched simplices.
    pub fn bistellar_flip(&self, mv: &BistellarMove) -> Result<Triangulation, TriangulationError> {
        let invalid = |m: String| Err(TriangulationError::InvalidMoveLocation(m));
        if !self.simplicial {
            return invalid("moves need a simplicial complex".into());
        }
        let sorted_signs = self.sorted_signs();
        let (remove, add): (Vec<usize>, Vec<Simplex>) = match mv {
            BistellarMove::OneFive { simplex } => {
                if *simplex >= self.simplices.len() {
                    return invalid(format!("no top simplex {}", simplex));
                }
                let s = sorted(&self.simplices[*simplex]);
                let w = self.max_vertex() + 1;
                let add = (0..5)
                    .map(|i| {
                        let mut t = s;
                        t[i] = w;
                        t
                    })
                    .collect();
                (vec![*simplex], add)
            }
            BistellarMove::TwoFour { tet } => {
                let Some(ti) = self.cell_of(&sorted_vec(tet)) else {
                    return invalid(format!("{:?} is not a tetrahedron", tet));
                };
                let cf = &self.cofaces[ti];
                if cf.len() != 2 {
                    return invalid(format!("{:?} does not lie in two simplices", tet));
                }
                let apex = |k: usize| -> Vertex {
                    *self.cells[4][k].vertices.iter().find(|v| !tet.contains(v)).unwrap()
                };
                let (p, q) = (apex(cf[0].0), apex(cf[1].0));
                if self.cell_of(&sorted_vec(&[p, q])).is_some() {
                    return invalid(format!("edge {{{}, {}}} already exists", p, q));
                }
                let add = (0..4)
                    .map(|i| {
                        let mut t: Vec<Vertex> = tet.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                        t.push(p);
                        t.push(q);
                        t.sort_unstable();
                        [t[0], t[1], t[2], t[3], t[4]]
                    })
                    .collect();
                (vec![cf[0].0, cf[1].0], add)
            }
            BistellarMove::ThreeThree { triangle } => {
                let tri = sorted_vec(triangle);
                let around: Vec<usize> =
                    (0..self.simplices.len()).filter(|&k| tri.iter().all(|v| self.cells[4][k].vertices.contains(v))).collect();
                if around.len() != 3 {
                    return invalid(format!("{:?} lies in {} simplices, not 3", triangle, around.len()));
                }
                let mut link: BTreeSet<Vertex> = BTreeSet::new();
                for &k in &around {
                    link.extend(self.cells[4][k].vertices.iter().filter(|v| !tri.contains(v)));
                }
                if link.len() != 3 {
                    return invalid(format!("link of {:?} is not a triangle", triangle));
                }
                let l: Vec<Vertex> = link.into_iter().collect();
                if self.cell_of(&l).is_some() {
                    return invalid(format!("triangle {:?} already exists", l));
                }
                let add = (0..3)
                    .map(|i| {
                        let mut t: Vec<Vertex> = tri.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                        t.extend_from_slice(&l);
                        t.sort_unstable();
                        [t[0], t[1], t[2], t[3], t[4]]
                    })
                    .collect();
                (around, add)
            }
        };
        let keep: Vec<usize> = (0..self.simplices.len()).filter(|k| !remove.contains(k)).collect();
        let mut simplices: Vec<Simplex> = keep.iter().map(|&k| self.simplices[k]).collect();
        simplices.extend(add.iter().copied());
        let base = Triangulation::from_simplices(simplices, None)?;
        let Some(old) = sorted_signs else {
            return Ok(base);
        };
        // orient the new complex, then match the untouched simplices
        let prop = base.propagate()?;
        let mut flip = 1;
        if let Some(&k0) = keep.first() {
            if prop[0] != old[k0] {
                flip = -1;
            }
        }
        let signs: Vec<i8> = (0..base.simplices.len()).map(|k| prop[k] * flip * parity(&base.simplices[k])).collect();
        let mut out = Triangulation::from_simplices(base.simplices.clone(), Some(signs))?;
        out = out.validate_and_orient()?;
        Ok(out)
    }

    /// Serialize to the text format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("dim 4\n");
        for (k, t) in self.simplices.iter().enumerate() {
            let _ = write!(s, "{} {} {} {} {}", t[0], t[1], t[2], t[3], t[4]);
            if let Some(sg) = &self.signs {
                s.push_str(if sg[k] > 0 { " +1" } else { " -1" });
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let doc = TriangulationJson {
            dim: 4,
            simplices: self.simplices.iter().map(|s| s.to_vec()).collect(),
            signs: self.signs.clone(),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }
}

fn sorted_vec(v: &[Vertex]) -> Vec<Vertex> {
    let mut o = v.to_vec();
    o.sort_unstable();
    o
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BistellarMove {
    /// Subdivide a top simplex (by index) with a new interior vertex.
    OneFive { simplex: usize },
    /// Replace the two simplices on a tetrahedron by four around a new edge.
    TwoFour { tet: [Vertex; 4] },
    /// Replace the three simplices around a triangle by three around the
    /// complementary triangle.
    ThreeThree { triangle: [Vertex; 3] },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangulationJson {
    dim: u32,
    simplices: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signs: Option<Vec<i8>>,
}

/// Parse the line-oriented text format.
pub fn parse_triangulation(text: &str) -> Result<Triangulation, TriangulationError> {
    let mut saw_dim = false;
    let mut simplices = Vec::new();
    let mut signs = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let syntax = |message: String| TriangulationError::SyntaxError { line, message };
        if !saw_dim {
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks != ["dim", "4"] {
                return Err(syntax(format!("expected \"dim 4\", found {:?}", body)));
            }
            saw_dim = true;
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 5 && toks.len() != 6 {
            return Err(syntax(format!("expected 5 vertex ids and an optional sign, found {} fields", toks.len())));
        }
        let mut s = [0; 5];
        for (i, tok) in toks[..5].iter().enumerate() {
            s[i] = tok.parse::<Vertex>().map_err(|_| syntax(format!("{:?} is not a nonnegative integer", tok)))?;
        }
        let sign = match toks.get(5) {
            None => 0,
            Some(&"+1") | Some(&"1") => 1,
            Some(&"-1") | Some(&"\u{2212}1") => -1,
            Some(t) => return Err(syntax(format!("{:?} is not an orientation sign", t))),
        };
        if sorted(&s).windows(2).any(|w| w[0] == w[1]) {
            return Err(TriangulationError::DegenerateSimplex { line, simplex: s.to_vec() });
        }
        simplices.push(s);
        signs.push(sign);
    }
    if simplices.is_empty() {
        return Err(TriangulationError::EmptyInput);
    }
    finish(simplices, signs)
}

fn finish(simplices: Vec<Simplex>, signs: Vec<i8>) -> Result<Triangulation, TriangulationError> {
    let signs = if signs.iter().all(|&s| s == 0) {
        None
    } else if signs.iter().all(|&s| s != 0) {
        Some(signs)
    } else {
        return Err(TriangulationError::SyntaxError { line: 0, message: "orientation signs must be given on every simplex or none".into() });
    };
    Triangulation::from_simplices(simplices, signs)
}

/// Parse the JSON form `{"dim":4,"simplices":[[...],...],"signs":[...]}`.
pub fn parse_triangulation_json(text: &str) -> Result<Triangulation, TriangulationError> {
    if text.trim().is_empty() {
        return Err(TriangulationError::EmptyInput);
    }
    let doc: TriangulationJson = serde_json::from_str(text)
        .map_err(|e| TriangulationError::SyntaxError { line: e.line(), message: e.to_string() })?;
    let syntax = |message: String| TriangulationError::SyntaxError { line: 0, message };
    if doc.dim != 4 {
        return Err(syntax(format!("dim must be 4, found {}", doc.dim)));
    }
    if doc.simplices.is_empty() {
        return Err(TriangulationError::EmptyInput);
    }
    let mut simplices = Vec::with_capacity(doc.simplices.len());
    for (i, s) in doc.simplices.iter().enumerate() {
        let arr: Simplex = s.as_slice().try_into().map_err(|_| syntax(format!("simplex {} has {} vertices", i, s.len())))?;
        if sorted(&arr).windows(2).any(|w| w[0] == w[1]) {
            return Err(TriangulationError::DegenerateSimplex { line: i + 1, simplex: s.clone() });
        }
        simplices.push(arr);
    }
    let signs = match doc.signs {
        None => vec![0; simplices.len()],
        Some(sg) => {
            if sg.len() != simplices.len() || sg.iter().any(|&s| s != 1 && s != -1) {
                return Err(syntax("signs must be one ±1 per simplex".into()));
            }
            sg
        }
    };
    finish(simplices, signs)
}

/// Parse either format, deciding by the first non-blank character.
pub fn parse_any(text: &str) -> Result<Triangulation, TriangulationError> {
    if text.trim_start().starts_with('{') {
        parse_triangulation_json(text)
    } else {
        parse_triangulation(text)
    }
}

/// Boundary of the 5-simplex on vertices `0..6`.
pub fn boundary_of_5_simplex() -> Triangulation {
    let mut s = Vec::new();
    for skip in (0..6).rev() {
        let v: Vec<Vertex> = (0..6).filter(|&x| x != skip).collect();
        s.push([v[0], v[1], v[2], v[3], v[4]]);
    }
    Triangulation::from_simplices(s, None).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_census() {
        let t = boundary_of_5_simplex();
        assert_eq!(t.face_census(), ([6, 15, 20, 15, 6], 2));
        assert!(t.is_closed() && t.is_simplicial());
        let o = t.validate_and_orient().unwrap();
        assert!(o.is_oriented());
        assert_eq!(o.validate_and_orient().unwrap(), o);
    }

    #[test]
    fn parse_examples() {
        let t = parse_triangulation("# c\ndim 4\n0 1 2 3 4\n").unwrap();
        assert!(!t.is_closed());
        assert!(matches!(parse_triangulation("dim 4\n0 0 1 2 3\n"), Err(TriangulationError::DegenerateSimplex { line: 2, .. })));
        assert!(matches!(parse_triangulation("# only\n"), Err(TriangulationError::EmptyInput)));
        assert!(matches!(parse_triangulation("dim 3\n0 1 2 3\n"), Err(TriangulationError::SyntaxError { line: 1, .. })));
        assert!(matches!(parse_triangulation("dim 4\n0 1 2 x 4\n"), Err(TriangulationError::SyntaxError { line: 2, .. })));
        let j = parse_triangulation_json(r#"{"dim":4,"simplices":[[0,1,2,3,4]],"signs":[-1]}"#).unwrap();
        assert_eq!(j.signs(), Some(&[-1i8][..]));
    }

    #[test]
    fn text_round_trip() {
        let t = boundary_of_5_simplex().validate_and_orient().unwrap();
        let back = parse_triangulation(&t.to_text()).unwrap();
        assert_eq!(back.face_set(2), t.face_set(2));
        assert_eq!(back.signs(), t.signs());
        let j = parse_triangulation_json(&t.to_json()).unwrap();
        assert_eq!(j.signs(), t.signs());
    }

    #[test]
    fn two_simplices_glued() {
        let s = Triangulation::from_simplices(vec![[0, 1, 2, 3, 4]], None).unwrap();
        let id: BTreeMap<Vertex, Vertex> = (0..5).map(|v| (v, v)).collect();
        let g = s.glue(&s, &id).unwrap();
        assert!(g.is_closed());
        assert!(!g.is_simplicial());
        assert_eq!(g.euler_characteristic(), 2);
        assert!(g.validate_and_orient().is_ok());
    }

    #[test]
    fn glue_rejects_non_faces() {
        let s = Triangulation::from_simplices(vec![[0, 1, 2, 3, 4]], None).unwrap();
        let t = Triangulation::from_simplices(vec![[0, 1, 2, 3, 5]], None).unwrap();
        let map: BTreeMap<Vertex, Vertex> = [(0, 0), (1, 1), (2, 2)].into_iter().collect();
        assert!(matches!(s.glue(&t, &map), Err(TriangulationError::BoundaryMismatch(_))));
    }

    #[test]
    fn disjoint_union_census() {
        let s = boundary_of_5_simplex();
        let u = s.disjoint_union(&s);
        assert_eq!(u.euler_characteristic(), 4);
        assert!(u.is_simplicial());
    }

    #[test]
    fn moves() {
        let t = boundary_of_5_simplex().validate_and_orient().unwrap();
        let f = t.bistellar_flip(&BistellarMove::OneFive { simplex: 0 }).unwrap();
        assert_eq!(f.counts()[4], 10);
        assert_eq!(f.euler_characteristic(), 2);
        assert!(f.is_closed() && f.is_oriented());
        assert!(matches!(t.bistellar_flip(&BistellarMove::TwoFour { tet: [0, 1, 2, 3] }), Err(TriangulationError::InvalidMoveLocation(_))));
        // after subdividing, the tetrahedron 0123 separates the new vertex 6
        // from vertex 5, so a 2-4 move applies to it
        let g = f.bistellar_flip(&BistellarMove::TwoFour { tet: [0, 1, 2, 3] }).unwrap();
        assert_eq!(g.counts()[4], 12);
        assert_eq!(g.euler_characteristic(), 2);
        let mut applied = 0;
        for tri in g.face_set(2) {
            if let Ok(h) = g.bistellar_flip(&BistellarMove::ThreeThree { triangle: [tri[0], tri[1], tri[2]] }) {
                assert_eq!(h.counts()[4], 12);
                assert_eq!(h.euler_characteristic(), 2);
                assert!(h.is_closed() && h.is_oriented());
                applied += 1;
            }
        }
        assert!(applied > 0);
    }

    #[test]
    fn single_simplex_not_closed() {
        let s = Triangulation::from_simplices(vec![[0, 1, 2, 3, 4]], None).unwrap();
        assert!(matches!(s.require_closed_oriented(), Err(TriangulationError::NotClosed(5))));
        assert!(matches!(s.connected_sum(&s, false), Err(TriangulationError::NotClosed(_))));
    }

    #[test]
    fn s4_connected_sum() {
        let s = boundary_of_5_simplex();
        let c = s.connected_sum(&s, false).unwrap();
        assert_eq!(c.euler_characteristic(), 2);
        assert!(c.is_closed() && c.is_simplicial() && c.is_oriented());
    }
}

//! Tame filtered regular cell complexes with exact boundary data.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix};
use crate::grid::{Grid, Real};

/// Structured tag describing where a cell comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellLabel {
    /// Sorted vertex list of a simplex.
    Simplex(Vec<usize>),
    /// Product of integer intervals `[a, b]` with `b - a ∈ {0, 1}`.
    Cube(Vec<(i64, i64)>),
    /// Product of simplices, one vertex list per factor.
    Product(Vec<Vec<usize>>),
    /// Cell `σ × c` of a blowup complex: index simplex and fiber cell id.
    Blowup { sigma: Vec<usize>, fiber_cell: usize },
    Named(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub dim: usize,
    /// `(face id, coefficient)` pairs sorted by face id; no zero coefficients.
    pub boundary: Vec<(usize, u32)>,
    /// Grid index at which the cell appears.
    pub birth: usize,
    pub label: Option<CellLabel>,
}

impl Cell {
    pub fn new(dim: usize, boundary: Vec<(usize, u32)>, birth: usize) -> Self {
        Self { dim, boundary, birth, label: None }
    }

    pub fn with_label(mut self, label: CellLabel) -> Self {
        self.label = Some(label);
        self
    }
}

/// A finite regular cell complex whose cells carry birth indices on a grid.
///
/// Cells are indexed by position, and every face has a smaller index than
/// its cofaces.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex<R = f64> {
    field: FieldSpec,
    grid: Grid<R>,
    cells: Vec<Cell>,
    by_dim: Vec<Vec<usize>>,
    slot: Vec<usize>,
}

/// A face-closed set of cells of some parent complex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubComplex {
    members: Vec<usize>,
}

impl SubComplex {
    /// Wrap a set of ids without checking closure.
    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = ids.into_iter().collect();
        Self { members: set.into_iter().collect() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn is_subset(&self, other: &SubComplex) -> bool {
        self.members.iter().all(|&c| other.contains(c))
    }

    pub fn intersection(&self, other: &SubComplex) -> SubComplex {
        SubComplex { members: self.members.iter().copied().filter(|&c| other.contains(c)).collect() }
    }

    pub fn union(&self, other: &SubComplex) -> SubComplex {
        SubComplex::from_ids(self.members.iter().chain(other.members.iter()).copied())
    }
}

impl<R: Real> FilteredComplex<R> {
    /// Validate and assemble a complex.
    pub fn new(field: FieldSpec, grid: Grid<R>, cells: Vec<Cell>) -> Result<Self> {
        let mut cells = cells;
        for (id, cell) in cells.iter_mut().enumerate() {
            if cell.birth >= grid.len() {
                return Err(MvssError::input(format!(
                    "cell {id}: birth index {} outside grid of length {}",
                    cell.birth,
                    grid.len()
                )));
            }
            cell.boundary.iter_mut().for_each(|e| e.1 %= field.p());
            cell.boundary.sort_by_key(|e| e.0);
            if cell.boundary.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(MvssError::input(format!("cell {id}: duplicate face in boundary")));
            }
            if cell.boundary.iter().any(|e| e.1 == 0) {
                return Err(MvssError::input(format!("cell {id}: zero boundary coefficient")));
            }
        }
        for (id, cell) in cells.iter().enumerate() {
            for &(face, _) in &cell.boundary {
                if face >= id {
                    return Err(MvssError::input(format!(
                        "cell {id}: face {face} does not precede its coface"
                    )));
                }
                let fc = &cells[face];
                if fc.dim + 1 != cell.dim {
                    return Err(MvssError::input(format!(
                        "cell {id}: face {face} has dimension {} but expected {}",
                        fc.dim,
                        cell.dim.wrapping_sub(1)
                    )));
                }
                if fc.birth > cell.birth {
                    return Err(MvssError::input(format!(
                        "cell {id}: face {face} is born after its coface"
                    )));
                }
            }
            if cell.dim == 0 && !cell.boundary.is_empty() {
                return Err(MvssError::input(format!("cell {id}: vertex with nonempty boundary")));
            }
        }
        let top = cells.iter().map(|c| c.dim).max().map_or(0, |d| d + 1);
        let mut by_dim = vec![Vec::new(); top];
        let mut slot = vec![0; cells.len()];
        for (id, cell) in cells.iter().enumerate() {
            slot[id] = by_dim[cell.dim].len();
            by_dim[cell.dim].push(id);
        }
        let complex = Self { field, grid, cells, by_dim, slot };
        complex.check_boundary_squared()?;
        Ok(complex)
    }

    fn check_boundary_squared(&self) -> Result<()> {
        let f = self.field;
        for (id, cell) in self.cells.iter().enumerate() {
            if cell.dim < 2 {
                continue;
            }
            let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
            for &(face, c) in &cell.boundary {
                for &(ff, c2) in &self.cells[face].boundary {
                    let e = acc.entry(ff).or_insert(0);
                    *e = f.add(*e, f.mul(c, c2));
                }
            }
            if let Some((ff, _)) = acc.iter().find(|(_, v)| **v != 0) {
                return Err(MvssError::invariant(format!(
                    "boundary of boundary of cell {id} is nonzero at cell {ff}"
                )));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn grid(&self) -> &Grid<R> {
        &self.grid
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Largest cell dimension, or `None` for the empty complex.
    pub fn max_dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    /// Ids of all cells of dimension `dim`, in id order.
    pub fn cells_of_dim(&self, dim: usize) -> &[usize] {
        self.by_dim.get(dim).map_or(&[], |v| v.as_slice())
    }

    /// Position of a cell among the cells of its dimension.
    pub fn slot(&self, id: usize) -> usize {
        self.slot[id]
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.cells_of_dim(dim).len()
    }

    /// Ids of cells of dimension `dim` born at or before grid index `t`.
    pub fn cells_of_dim_by(&self, dim: usize, t: usize) -> Vec<usize> {
        self.cells_of_dim(dim).iter().copied().filter(|&c| self.cells[c].birth <= t).collect()
    }

    /// Boundary matrix from `dim`-cells to `(dim-1)`-cells born by `t`,
    /// along with the row and column cell ids.
    pub fn boundary_matrix(&self, dim: usize, t: usize) -> (Matrix, Vec<usize>, Vec<usize>) {
        let cols = self.cells_of_dim_by(dim, t);
        let rows = if dim == 0 { Vec::new() } else { self.cells_of_dim_by(dim - 1, t) };
        let mut pos = BTreeMap::new();
        for (i, &r) in rows.iter().enumerate() {
            pos.insert(r, i);
        }
        let mut m = Matrix::zeros(self.field, rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for &(face, v) in &self.cells[c].boundary {
                m.set(pos[&face], j, v);
            }
        }
        (m, rows, cols)
    }

    /// Full boundary matrix in dimension `dim` indexed by dimension slots.
    pub fn full_boundary(&self, dim: usize) -> Matrix {
        self.boundary_matrix(dim, self.grid.last_index()).0
    }

    /// Smallest face-closed set containing `seeds`.
    pub fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> Result<SubComplex> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = Vec::new();
        for s in seeds {
            if s >= self.cells.len() {
                return Err(MvssError::input(format!("unknown cell id {s}")));
            }
            stack.push(s);
        }
        while let Some(c) = stack.pop() {
            if seen.insert(c) {
                stack.extend(self.cells[c].boundary.iter().map(|e| e.0));
            }
        }
        Ok(SubComplex { members: seen.into_iter().collect() })
    }

    pub fn is_closed(&self, sub: &SubComplex) -> bool {
        sub.members.iter().all(|&c| self.cells[c].boundary.iter().all(|e| sub.contains(e.0)))
    }

    pub fn everything(&self) -> SubComplex {
        SubComplex { members: (0..self.cells.len()).collect() }
    }

    /// Cells of `sub` born by `t`.
    pub fn restrict_to(&self, sub: &SubComplex, t: usize) -> SubComplex {
        SubComplex { members: sub.members.iter().copied().filter(|&c| self.cells[c].birth <= t).collect() }
    }

    /// The subcomplex as a complex in its own right, with the map from new
    /// ids to parent ids.
    pub fn induced(&self, sub: &SubComplex) -> (FilteredComplex<R>, Vec<usize>) {
        let mut new_id = BTreeMap::new();
        for (i, &c) in sub.members.iter().enumerate() {
            new_id.insert(c, i);
        }
        let cells = sub
            .members
            .iter()
            .map(|&c| {
                let old = &self.cells[c];
                Cell {
                    dim: old.dim,
                    boundary: old.boundary.iter().map(|&(f, v)| (new_id[&f], v)).collect(),
                    birth: old.birth,
                    label: old.label.clone(),
                }
            })
            .collect();
        let complex = FilteredComplex::new(self.field, self.grid.clone(), cells)
            .expect("face-closed subset of a valid complex is valid");
        (complex, sub.members.clone())
    }

    /// Same cells with new birth indices on a new grid.
    pub fn with_births(&self, grid: Grid<R>, births: &[usize]) -> Result<FilteredComplex<R>> {
        let cells = self
            .cells
            .iter()
            .zip(births)
            .map(|(c, &b)| Cell { birth: b, ..c.clone() })
            .collect();
        FilteredComplex::new(self.field, grid, cells)
    }

    /// Same cell structure and births over a different prime field.
    pub fn with_field(&self, field: FieldSpec) -> Result<FilteredComplex<R>> {
        FilteredComplex::new(field, self.grid.clone(), self.cells.clone())
    }

    /// Find a cell by its label.
    pub fn find_label(&self, label: &CellLabel) -> Option<usize> {
        self.cells.iter().position(|c| c.label.as_ref() == Some(label))
    }

    /// Strict face order: the transitive closure of nonzero incidence.
    pub fn face_order(&self) -> Vec<BTreeSet<usize>> {
        let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.cells.len()];
        for id in 0..self.cells.len() {
            let mut acc = BTreeSet::new();
            for &(f, _) in &self.cells[id].boundary {
                acc.insert(f);
                acc.extend(below[f].iter().copied());
            }
            below[id] = acc;
        }
        below
    }

    /// Vertex ids of a cell (the zero-dimensional cells in its closure).
    pub fn vertices_of(&self, id: usize) -> Vec<usize> {
        let sub = self.closure([id]).expect("valid id");
        sub.members.into_iter().filter(|&c| self.cells[c].dim == 0).collect()
    }
}

fn birth_index<R: Real>(grid: &Grid<R>, v: R) -> Result<usize> {
    grid.index_of(v)
        .ok_or_else(|| MvssError::input(format!("birth value {v} is not a grid value")))
}

/// Standard simplicial complex on sorted vertex lists.
///
/// With `autocomplete`, missing faces are added with the minimal birth of
/// the listed simplices containing them.
pub fn build_simplicial<R: Real>(
    simplices: &[(Vec<usize>, R)],
    field: FieldSpec,
    grid: Grid<R>,
    autocomplete: bool,
) -> Result<FilteredComplex<R>> {
    let mut births: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (verts, b) in simplices {
        if verts.is_empty() {
            return Err(MvssError::input("empty simplex"));
        }
        if verts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MvssError::input(format!("vertex list {verts:?} is not sorted and duplicate-free")));
        }
        let t = birth_index(&grid, *b)?;
        let e = births.entry(verts.clone()).or_insert(t);
        *e = (*e).min(t);
    }
    if autocomplete {
        let listed: Vec<(Vec<usize>, usize)> = births.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (verts, t) in listed {
            for face in proper_faces(&verts) {
                let e = births.entry(face).or_insert(t);
                *e = (*e).min(t);
            }
        }
    } else {
        for (verts, &t) in &births {
            if verts.len() < 2 {
                continue;
            }
            for i in 0..verts.len() {
                let mut face = verts.clone();
                face.remove(i);
                match births.get(&face) {
                    None => return Err(MvssError::input(format!("face {face:?} of {verts:?} is missing"))),
                    Some(&ft) if ft > t => {
                        return Err(MvssError::input(format!("face {face:?} is born after {verts:?}")))
                    }
                    _ => {}
                }
            }
        }
    }
    simplicial_from_births(births, field, grid)
}

/// Assemble a simplicial complex from a face-closed map of sorted vertex
/// lists to birth indices.
pub fn simplicial_from_births<R: Real>(
    births: BTreeMap<Vec<usize>, usize>,
    field: FieldSpec,
    grid: Grid<R>,
) -> Result<FilteredComplex<R>> {
    let mut order: Vec<(Vec<usize>, usize)> = births.into_iter().collect();
    order.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
    let index: BTreeMap<Vec<usize>, usize> = order.iter().enumerate().map(|(i, (v, _))| (v.clone(), i)).collect();
    let mut cells = Vec::with_capacity(order.len());
    for (verts, t) in &order {
        let mut boundary = Vec::new();
        if verts.len() > 1 {
            for i in 0..verts.len() {
                let mut face = verts.clone();
                face.remove(i);
                let id = *index
                    .get(&face)
                    .ok_or_else(|| MvssError::input(format!("face {face:?} of {verts:?} is missing")))?;
                boundary.push((id, field.sign(i)));
            }
        }
        cells.push(Cell::new(verts.len() - 1, boundary, *t).with_label(CellLabel::Simplex(verts.clone())));
    }
    FilteredComplex::new(field, grid, cells)
}

fn proper_faces(verts: &[usize]) -> Vec<Vec<usize>> {
    let n = verts.len();
    let mut out = Vec::new();
    for mask in 1..(1u64 << n) - 1 {
        out.push((0..n).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]).collect());
    }
    out
}

/// Elementary cube as a product of integer intervals.
pub type Cube = Vec<(i64, i64)>;

/// Cubical complex from listed cells; faces inherit the minimal birth of the
/// listed cells containing them. Returns the complex together with warnings
/// about listed cells whose own birth exceeded a containing cell's birth.
pub fn build_cubical_with_warnings<R: Real>(
    cells: &[(Cube, R)],
    field: FieldSpec,
    grid: Grid<R>,
) -> Result<(FilteredComplex<R>, Vec<String>)> {
    let mut births: BTreeMap<Cube, usize> = BTreeMap::new();
    let mut listed: BTreeMap<Cube, usize> = BTreeMap::new();
    for (cube, b) in cells {
        if cube.iter().any(|&(a, c)| c != a && c != a + 1) {
            return Err(MvssError::input(format!("{cube:?} is not an elementary cube")));
        }
        let t = birth_index(&grid, *b)?;
        let e = listed.entry(cube.clone()).or_insert(t);
        *e = (*e).min(t);
    }
    for (cube, &t) in &listed {
        for face in cube_faces_all(cube) {
            let e = births.entry(face).or_insert(t);
            *e = (*e).min(t);
        }
    }
    let mut warnings = Vec::new();
    for (cube, &t) in &listed {
        if births[cube] < t {
            warnings.push(format!(
                "cube {cube:?} listed at grid index {t} but a containing cell forces index {}",
                births[cube]
            ));
        }
    }
    let mut order: Vec<(Cube, usize)> = births.into_iter().collect();
    order.sort_by(|a, b| (cube_dim(&a.0), &a.0).cmp(&(cube_dim(&b.0), &b.0)));
    let index: BTreeMap<Cube, usize> = order.iter().enumerate().map(|(i, (c, _))| (c.clone(), i)).collect();
    let out = order
        .iter()
        .map(|(cube, t)| {
            let boundary = cube_boundary(cube, field)
                .into_iter()
                .map(|(face, s)| (index[&face], s))
                .collect();
            Cell::new(cube_dim(cube), boundary, *t).with_label(CellLabel::Cube(cube.clone()))
        })
        .collect();
    Ok((FilteredComplex::new(field, grid, out)?, warnings))
}

pub fn build_cubical<R: Real>(cells: &[(Cube, R)], field: FieldSpec, grid: Grid<R>) -> Result<FilteredComplex<R>> {
    build_cubical_with_warnings(cells, field, grid).map(|(c, _)| c)
}

pub fn cube_dim(cube: &Cube) -> usize {
    cube.iter().filter(|(a, b)| a != b).count()
}

/// Codimension-one faces with the standard product-orientation signs.
pub fn cube_boundary(cube: &Cube, field: FieldSpec) -> Vec<(Cube, u32)> {
    let mut out = Vec::new();
    let mut seen = 0;
    for (j, &(a, b)) in cube.iter().enumerate() {
        if a == b {
            continue;
        }
        let sign = field.sign(seen);
        let mut lo = cube.clone();
        lo[j] = (a, a);
        let mut hi = cube.clone();
        hi[j] = (b, b);
        out.push((hi, sign));
        out.push((lo, field.neg(sign)));
        seen += 1;
    }
    out
}

fn cube_faces_all(cube: &Cube) -> Vec<Cube> {
    let mut out = vec![cube.clone()];
    let mut i = 0;
    while i < out.len() {
        let c = out[i].clone();
        for (face, _) in cube_boundary(&c, FieldSpec::f2()) {
            if !out.contains(&face) {
                out.push(face);
            }
        }
        i += 1;
    }
    out
}

/// Euclidean distance between two coordinate rows.
pub fn euclidean<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

/// Grid made of zero and all pairwise distances of the given clouds.
pub fn distance_grid<R: Real>(clouds: &[&[Vec<R>]]) -> Result<Grid<R>> {
    let mut values = vec![R::zero()];
    for cloud in clouds {
        for i in 0..cloud.len() {
            for j in i + 1..cloud.len() {
                values.push(euclidean(&cloud[i], &cloud[j]));
            }
        }
    }
    Grid::from_unsorted(values)
}

/// Vietoris-Rips complex with simplices up to dimension `max_dim`; each
/// simplex is born at its diameter snapped up to the grid.
pub fn build_vietoris_rips<R: Real>(
    points: &[Vec<R>],
    max_dim: usize,
    field: FieldSpec,
    grid: Grid<R>,
) -> Result<FilteredComplex<R>> {
    if points.is_empty() {
        return Err(MvssError::input("empty point set"));
    }
    let n = points.len();
    let mut edge = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let t = grid.snap_up(euclidean(&points[i], &points[j]));
            edge[i][j] = t;
            edge[j][i] = t;
        }
    }
    let mut simplices: Vec<(Vec<usize>, usize)> = (0..n).map(|i| (vec![i], 0)).collect();
    let mut frontier: Vec<(Vec<usize>, usize)> = simplices.clone();
    for _ in 0..max_dim {
        let mut next = Vec::new();
        for (verts, t) in &frontier {
            let last = *verts.last().expect("nonempty");
            for v in last + 1..n {
                let tv = verts.iter().map(|&u| edge[u][v]).max().unwrap_or(0).max(*t);
                let mut s = verts.clone();
                s.push(v);
                next.push((s, tv));
            }
        }
        simplices.extend(next.iter().cloned());
        frontier = next;
    }
    simplicial_from_births(simplices.into_iter().collect(), field, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(v: &[f64]) -> Grid<f64> {
        Grid::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_vertex() {
        let k = build_simplicial(&[(vec![0], 0.0)], FieldSpec::f2(), grid(&[0.0]), true).unwrap();
        assert_eq!(k.len(), 1);
        assert!(k.cell(0).boundary.is_empty());
    }

    #[test]
    fn autocomplete_takes_min_birth() {
        let k = build_simplicial(
            &[(vec![0, 1, 2], 1.0), (vec![0, 1], 0.0)],
            FieldSpec::f2(),
            grid(&[0.0, 1.0]),
            true,
        )
        .unwrap();
        assert_eq!(k.len(), 7);
        let e01 = k.find_label(&CellLabel::Simplex(vec![0, 1])).unwrap();
        let e12 = k.find_label(&CellLabel::Simplex(vec![1, 2])).unwrap();
        assert_eq!(k.cell(e01).birth, 0);
        assert_eq!(k.cell(e12).birth, 1);
    }

    #[test]
    fn missing_face_rejected_without_autocomplete() {
        let r = build_simplicial(&[(vec![0, 1], 0.0)], FieldSpec::f2(), grid(&[0.0]), false);
        assert!(r.is_err());
        let r = build_simplicial(
            &[(vec![0], 1.0), (vec![1], 0.0), (vec![0, 1], 0.0)],
            FieldSpec::f2(),
            grid(&[0.0, 1.0]),
            false,
        );
        assert!(r.is_err());
    }

    #[test]
    fn non_grid_birth_rejected() {
        let r = build_simplicial(&[(vec![0], 0.5)], FieldSpec::f2(), grid(&[0.0, 1.0]), true);
        assert!(matches!(r, Err(MvssError::Input(_))));
    }

    #[test]
    fn unit_square() {
        let k = build_cubical(&[(vec![(0, 1), (0, 1)], 0.0)], FieldSpec::new(3).unwrap(), grid(&[0.0])).unwrap();
        assert_eq!(k.count_dim(0), 4);
        assert_eq!(k.count_dim(1), 4);
        assert_eq!(k.count_dim(2), 1);
    }

    #[test]
    fn closure_of_edge() {
        let k = build_simplicial(&[(vec![0, 1], 0.0)], FieldSpec::f2(), grid(&[0.0]), true).unwrap();
        let e = k.find_label(&CellLabel::Simplex(vec![0, 1])).unwrap();
        assert_eq!(k.closure([e]).unwrap().len(), 3);
        assert!(k.closure([]).unwrap().is_empty());
        assert!(k.closure([99]).is_err());
    }

    #[test]
    fn vietoris_rips_two_points() {
        let pts = vec![vec![0.0], vec![1.0]];
        let k = build_vietoris_rips(&pts, 1, FieldSpec::f2(), grid(&[0.0, 1.0])).unwrap();
        assert_eq!(k.len(), 3);
        assert_eq!(k.cell(2).birth, 1);
    }
}

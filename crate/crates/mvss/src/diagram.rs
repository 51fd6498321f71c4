//! Diagrams of filtered complexes over a simplicial index complex, their
//! blowup realizations, double complexes, join diagrams and multinerves.

use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{GradedLevel, PersistentComplex};
use crate::complex::{simplicial_from_births, Cell, CellLabel, FilteredComplex};
use crate::cover::{nerve, Cover};
use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix};
use crate::grid::{Grid, Real};

/// Chain-level map `D(σ) → D(τ)` for a face `τ ≺ σ`: one matrix per
/// degree, indexed by dimension slots of the two fibers.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMap {
    pub mats: Vec<Matrix>,
}

/// A contravariant diagram of filtered complexes over a simplicial complex.
#[derive(Debug, Clone)]
pub struct Diagram<R = f64> {
    index: FilteredComplex<R>,
    fibers: Vec<FilteredComplex<R>>,
    /// Keyed by `(τ, σ)` index-cell ids for every proper face `τ ⊂ σ`.
    face_maps: BTreeMap<(usize, usize), FaceMap>,
    top: usize,
}

fn simplex_of<R: Real>(k: &FilteredComplex<R>, id: usize) -> &[usize] {
    match &k.cell(id).label {
        Some(CellLabel::Simplex(v)) => v,
        _ => panic!("index complex cell {id} has no simplex label"),
    }
}

fn sub_lists(v: &[usize]) -> Vec<Vec<usize>> {
    let n = v.len();
    (1..(1u64 << n) - 1)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect())
        .collect()
}

impl<R: Real> Diagram<R> {
    /// Assemble and validate. `face_maps` must contain every proper face pair.
    pub fn new(
        index: FilteredComplex<R>,
        fibers: Vec<FilteredComplex<R>>,
        face_maps: BTreeMap<(usize, usize), FaceMap>,
    ) -> Result<Self> {
        if fibers.len() != index.len() {
            return Err(MvssError::input("one fiber per index simplex is required"));
        }
        let top = fibers.iter().filter_map(|f| f.max_dim()).max().unwrap_or(0);
        let d = Self { index, fibers, face_maps, top };
        d.validate()?;
        Ok(d)
    }

    pub fn index(&self) -> &FilteredComplex<R> {
        &self.index
    }

    pub fn fibers(&self) -> &[FilteredComplex<R>] {
        &self.fibers
    }

    pub fn fiber(&self, s: usize) -> &FilteredComplex<R> {
        &self.fibers[s]
    }

    pub fn face_maps(&self) -> &BTreeMap<(usize, usize), FaceMap> {
        &self.face_maps
    }

    pub fn face_map(&self, tau: usize, sigma: usize) -> &FaceMap {
        &self.face_maps[&(tau, sigma)]
    }

    pub fn face_maps_mut(&mut self) -> &mut BTreeMap<(usize, usize), FaceMap> {
        &mut self.face_maps
    }

    pub fn simplex(&self, s: usize) -> &[usize] {
        simplex_of(&self.index, s)
    }

    pub fn grid(&self) -> &Grid<R> {
        self.index.grid()
    }

    pub fn field(&self) -> FieldSpec {
        self.index.field()
    }

    /// Largest fiber cell dimension.
    pub fn fiber_top(&self) -> usize {
        self.top
    }

    /// Codimension-one faces of index cell `s` as `(position i, face id)`.
    pub fn codim_one_faces(&self, s: usize) -> Vec<(usize, usize)> {
        let verts = self.simplex(s);
        if verts.len() < 2 {
            return Vec::new();
        }
        (0..verts.len())
            .map(|i| {
                let mut f = verts.to_vec();
                f.remove(i);
                (i, self.index.find_label(&CellLabel::Simplex(f)).expect("index complex is face closed"))
            })
            .collect()
    }

    /// Check shapes, chain-map identities, birth monotonicity and functoriality.
    pub fn validate(&self) -> Result<()> {
        for s in 0..self.index.len() {
            let verts = self.simplex(s).to_vec();
            for face in sub_lists(&verts) {
                let t = self
                    .index
                    .find_label(&CellLabel::Simplex(face.clone()))
                    .ok_or_else(|| MvssError::input(format!("index complex misses face {face:?}")))?;
                let fm = self
                    .face_maps
                    .get(&(t, s))
                    .ok_or_else(|| MvssError::input(format!("missing face map {face:?} ≺ {verts:?}")))?;
                self.check_face_map(t, s, fm)?;
            }
        }
        for s in 0..self.index.len() {
            let verts = self.simplex(s).to_vec();
            for mid in sub_lists(&verts) {
                let t = self.index.find_label(&CellLabel::Simplex(mid.clone())).expect("checked");
                for low in sub_lists(&mid) {
                    let r = self.index.find_label(&CellLabel::Simplex(low.clone())).expect("checked");
                    for n in 0..=self.top {
                        let lhs = self.face_maps[&(r, t)].mats[n].mul(&self.face_maps[&(t, s)].mats[n]);
                        if lhs != self.face_maps[&(r, s)].mats[n] {
                            return Err(MvssError::invariant(format!(
                                "functoriality fails for {low:?} ≺ {mid:?} ≺ {verts:?} in degree {n}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_face_map(&self, tau: usize, sigma: usize, fm: &FaceMap) -> Result<()> {
        let (src, dst) = (&self.fibers[sigma], &self.fibers[tau]);
        let name = || format!("{:?} ≺ {:?}", self.simplex(tau), self.simplex(sigma));
        if fm.mats.len() != self.top + 1 {
            return Err(MvssError::input(format!("face map {} has the wrong number of degrees", name())));
        }
        for n in 0..=self.top {
            let m = &fm.mats[n];
            if m.cols() != src.count_dim(n) || m.rows() != dst.count_dim(n) {
                return Err(MvssError::input(format!("face map {} has wrong shape in degree {n}", name())));
            }
            for (j, &c) in src.cells_of_dim(n).iter().enumerate() {
                for (i, &e) in dst.cells_of_dim(n).iter().enumerate() {
                    if m.get(i, j) != 0 && dst.cell(e).birth > src.cell(c).birth {
                        return Err(MvssError::invariant(format!(
                            "face map {} sends cell {c} to a later cell {e}",
                            name()
                        )));
                    }
                }
            }
            if n >= 1 {
                let lhs = dst.full_boundary(n).mul(m);
                let rhs = fm.mats[n - 1].mul(&src.full_boundary(n));
                if lhs != rhs {
                    return Err(MvssError::invariant(format!("face map {} is not a chain map in degree {n}", name())));
                }
            }
        }
        Ok(())
    }
}

/// Inclusion of a sub-list of cells into a bigger list, per dimension.
fn inclusion_maps<R: Real>(
    small: &FilteredComplex<R>,
    small_ids: &[usize],
    big: &FilteredComplex<R>,
    big_ids: &[usize],
    top: usize,
) -> FaceMap {
    let f = small.field();
    let mats = (0..=top)
        .map(|n| {
            let mut m = Matrix::zeros(f, small.count_dim(n), big.count_dim(n));
            for (j, &c) in big.cells_of_dim(n).iter().enumerate() {
                let global = big_ids[c];
                if let Ok(k) = small_ids.binary_search(&global) {
                    m.set(small.slot(k), j, 1);
                }
            }
            m
        })
        .collect();
    FaceMap { mats }
}

/// The diagram `σ ↦ U_σ` over the nerve, with inclusion face maps.
pub fn cover_diagram<R: Real>(x: &FilteredComplex<R>, cover: &Cover) -> Result<Diagram<R>> {
    let nv = nerve(x, cover);
    let simplices = nv.simplices();
    let pieces: Vec<(FilteredComplex<R>, Vec<usize>)> =
        simplices.iter().map(|s| x.induced(&cover.intersection(s))).collect();
    let top = pieces.iter().filter_map(|p| p.0.max_dim()).max().unwrap_or(0);
    let mut face_maps = BTreeMap::new();
    for (s, verts) in simplices.iter().enumerate() {
        for face in sub_lists(verts) {
            let t = nv.find(&face).expect("nerve is face closed");
            let fm = inclusion_maps(&pieces[t].0, &pieces[t].1, &pieces[s].0, &pieces[s].1, top);
            face_maps.insert((t, s), fm);
        }
    }
    let fibers = pieces.into_iter().map(|p| p.0).collect();
    Diagram::new(nv.complex, fibers, face_maps)
}

/// Blowup complex of a diagram with its column labels.
#[derive(Debug, Clone)]
pub struct Blowup<R = f64> {
    pub complex: FilteredComplex<R>,
    /// `(index cell, fiber cell)` for each realization cell.
    pub cells: Vec<(usize, usize)>,
    /// `dim σ` for each realization cell.
    pub column: Vec<usize>,
}

impl<R: Real> Blowup<R> {
    /// The chain complex with the column filtration attached.
    pub fn persistent(&self) -> PersistentComplex<R> {
        PersistentComplex::from_filtered(&self.complex, |c| self.column[c] as i64)
    }
}

/// Geometric realization with the boundary
/// `δ(σ×c) = Σ_i (−1)^i σ_i × D(σ_i≺σ)(c) + (−1)^{dim σ} σ × ∂c`.
pub fn realization<R: Real>(d: &Diagram<R>) -> Result<Blowup<R>> {
    let f = d.field();
    let mut keys: Vec<(usize, usize, usize)> = Vec::new();
    for s in 0..d.index.len() {
        let ds = d.index.cell(s).dim;
        for c in 0..d.fibers[s].len() {
            keys.push((ds + d.fibers[s].cell(c).dim, s, c));
        }
    }
    keys.sort();
    let pos: BTreeMap<(usize, usize), usize> = keys.iter().enumerate().map(|(i, &(_, s, c))| ((s, c), i)).collect();
    let mut cells = Vec::with_capacity(keys.len());
    for &(dim, s, c) in &keys {
        let fiber = &d.fibers[s];
        let ds = d.index.cell(s).dim;
        let cdim = fiber.cell(c).dim;
        let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
        for (i, t) in d.codim_one_faces(s) {
            let m = &d.face_map(t, s).mats[cdim];
            let col = fiber.slot(c);
            let sign = f.sign(i);
            let tf = &d.fibers[t];
            for (row, &e) in tf.cells_of_dim(cdim).iter().enumerate() {
                let v = m.get(row, col);
                if v != 0 {
                    let slot = acc.entry(pos[&(t, e)]).or_insert(0);
                    *slot = f.add(*slot, f.mul(sign, v));
                }
            }
        }
        let sign = f.sign(ds);
        for &(face, v) in &fiber.cell(c).boundary {
            let slot = acc.entry(pos[&(s, face)]).or_insert(0);
            *slot = f.add(*slot, f.mul(sign, v));
        }
        let boundary: Vec<(usize, u32)> = acc.into_iter().filter(|e| e.1 != 0).collect();
        let birth = fiber.cell(c).birth.max(d.index.cell(s).birth);
        cells.push(
            Cell::new(dim, boundary, birth)
                .with_label(CellLabel::Blowup { sigma: d.simplex(s).to_vec(), fiber_cell: c }),
        );
    }
    let complex = FilteredComplex::new(f, d.grid().clone(), cells)?;
    let column = keys.iter().map(|&(_, s, _)| d.index.cell(s).dim).collect();
    let cells = keys.iter().map(|&(_, s, c)| (s, c)).collect();
    Ok(Blowup { complex, cells, column })
}

/// Double complex `C_{p,q} = ⊕_{σ ∈ K^p} C_q(D(σ))` at every grid index,
/// based by `(σ, c)` in index-then-fiber order.
#[derive(Debug, Clone)]
pub struct DoubleComplex<R = f64> {
    field: FieldSpec,
    grid: Grid<R>,
    /// Basis per grid index and total degree: `(p, σ, c)`.
    bases: Vec<Vec<Vec<(usize, usize, usize)>>>,
    /// Vertical and horizontal differentials per grid index and total degree.
    dv: Vec<Vec<Matrix>>,
    dh: Vec<Vec<Matrix>>,
    top: usize,
}

pub fn double_complex<R: Real>(d: &Diagram<R>) -> DoubleComplex<R> {
    let f = d.field();
    let g = d.grid().len();
    let pmax = d.index.max_dim().unwrap_or(0);
    let top = pmax + d.fiber_top();
    let mut bases = Vec::with_capacity(g);
    let mut dv = Vec::with_capacity(g);
    let mut dh = Vec::with_capacity(g);
    for t in 0..g {
        let mut basis: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); top + 1];
        for s in 0..d.index.len() {
            let p = d.index.cell(s).dim;
            if d.index.cell(s).birth > t {
                continue;
            }
            for c in 0..d.fibers[s].len() {
                let cell = d.fibers[s].cell(c);
                if cell.birth <= t {
                    basis[p + cell.dim].push((p, s, c));
                }
            }
        }
        let pos: Vec<BTreeMap<(usize, usize), usize>> = basis
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, &(_, s, c))| ((s, c), i)).collect())
            .collect();
        let mut v_mats = Vec::with_capacity(top + 1);
        let mut h_mats = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let rows = if n == 0 { 0 } else { basis[n - 1].len() };
            let mut mv = Matrix::zeros(f, rows, basis[n].len());
            let mut mh = Matrix::zeros(f, rows, basis[n].len());
            for (j, &(p, s, c)) in basis[n].iter().enumerate() {
                let fiber = &d.fibers[s];
                for &(face, v) in &fiber.cell(c).boundary {
                    mv.add_at(pos[n - 1][&(s, face)], j, f.mul(f.sign(p), v));
                }
                let cdim = fiber.cell(c).dim;
                for (i, t_id) in d.codim_one_faces(s) {
                    let m = &d.face_map(t_id, s).mats[cdim];
                    let tf = &d.fibers[t_id];
                    for (row, &e) in tf.cells_of_dim(cdim).iter().enumerate() {
                        let v = m.get(row, fiber.slot(c));
                        if v != 0 {
                            mh.add_at(pos[n - 1][&(t_id, e)], j, f.mul(f.sign(i), v));
                        }
                    }
                }
            }
            v_mats.push(mv);
            h_mats.push(mh);
        }
        bases.push(basis);
        dv.push(v_mats);
        dh.push(h_mats);
    }
    DoubleComplex { field: f, grid: d.grid().clone(), bases, dv, dh, top }
}

impl<R: Real> DoubleComplex<R> {
    pub fn basis(&self, t: usize, n: usize) -> &[(usize, usize, usize)] {
        &self.bases[t][n]
    }

    pub fn dv(&self, t: usize, n: usize) -> &Matrix {
        &self.dv[t][n]
    }

    pub fn dh(&self, t: usize, n: usize) -> &Matrix {
        &self.dh[t][n]
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// `dim C_{p,q}` at grid index `t`.
    pub fn entry_dim(&self, p: usize, q: usize, t: usize) -> usize {
        self.bases[t].get(p + q).map_or(0, |b| b.iter().filter(|e| e.0 == p).count())
    }

    /// `d^V d^V = 0`, `d^H d^H = 0` and `d^V d^H + d^H d^V = 0` everywhere.
    pub fn check_identities(&self) -> std::result::Result<(), String> {
        for t in 0..self.bases.len() {
            for n in 2..=self.top {
                let (v1, v2) = (&self.dv[t][n - 1], &self.dv[t][n]);
                let (h1, h2) = (&self.dh[t][n - 1], &self.dh[t][n]);
                if !v1.mul(v2).is_zero() {
                    return Err(format!("vertical differential squares to a nonzero map at grid index {t}, degree {n}"));
                }
                if !h1.mul(h2).is_zero() {
                    return Err(format!("horizontal differential squares to a nonzero map at grid index {t}, degree {n}"));
                }
                if !v1.mul(h2).add(&h1.mul(v2)).is_zero() {
                    return Err(format!("differentials do not anticommute at grid index {t}, degree {n}"));
                }
            }
        }
        Ok(())
    }

    /// Total complex with column filtration `p`.
    pub fn to_persistent(&self) -> PersistentComplex<R> {
        let g = self.bases.len();
        let levels = (0..g)
            .map(|t| GradedLevel {
                dims: self.bases[t].iter().map(|b| b.len()).collect(),
                d: (0..=self.top).map(|n| self.dv[t][n].add(&self.dh[t][n])).collect(),
                filt: self.bases[t].iter().map(|b| b.iter().map(|e| e.0 as i64).collect()).collect(),
                tags: self.bases[t].iter().map(|b| (0..b.len()).collect()).collect(),
            })
            .collect();
        let maps = (0..g.saturating_sub(1))
            .map(|t| {
                (0..=self.top)
                    .map(|n| {
                        let (src, dst) = (&self.bases[t][n], &self.bases[t + 1][n]);
                        let mut m = Matrix::zeros(self.field, dst.len(), src.len());
                        for (j, e) in src.iter().enumerate() {
                            let i = dst.iter().position(|x| x == e).expect("bases grow with t");
                            m.set(i, j, 1);
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        PersistentComplex::new(self.field, self.grid.clone(), levels, maps).expect("consistent double complex")
    }
}

/// Outcome of comparing the realization boundary with `d^V + d^H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalComplexReport {
    pub grid_indices: usize,
    pub degrees: usize,
    pub identities_checked: usize,
}

/// Verify that `(σ, c) ↦ (c)_σ` is a filtration-preserving chain
/// isomorphism from the realization to the total complex.
pub fn total_complex_check<R: Real>(d: &Diagram<R>) -> Result<TotalComplexReport> {
    let blow = realization(d)?;
    let dc = double_complex(d);
    dc.check_identities().map_err(MvssError::invariant)?;
    let f = d.field();
    let g = d.grid().len();
    let top = dc.top();
    let mut checked = 0;
    for t in 0..g {
        let mut perms = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let ids = blow.complex.cells_of_dim_by(n, t);
            let target = dc.basis(t, n);
            if ids.len() != target.len() {
                return Err(MvssError::invariant(format!(
                    "degree {n} at grid index {t}: {} realization cells but {} double complex generators",
                    ids.len(),
                    target.len()
                )));
            }
            let mut m = Matrix::zeros(f, target.len(), ids.len());
            for (j, &c) in ids.iter().enumerate() {
                let (s, fc) = blow.cells[c];
                let i = target
                    .iter()
                    .position(|e| e.1 == s && e.2 == fc)
                    .ok_or_else(|| MvssError::invariant(format!("cell {c} has no double complex generator")))?;
                if target[i].0 != blow.column[c] {
                    return Err(MvssError::invariant(format!("cell {c} changes column under the isomorphism")));
                }
                m.set(i, j, 1);
            }
            perms.push(m);
        }
        for n in 1..=top {
            let (bd, _, _) = blow.complex.boundary_matrix(n, t);
            let lhs = perms[n - 1].mul(&bd);
            let rhs = dc.dv(t, n).add(dc.dh(t, n)).mul(&perms[n]);
            if lhs != rhs {
                return Err(MvssError::invariant(format!(
                    "realization boundary differs from d^V + d^H in degree {n} at grid index {t}"
                )));
            }
            checked += 1;
        }
    }
    Ok(TotalComplexReport { grid_indices: g, degrees: top + 1, identities_checked: checked })
}

/// Check that a partition covers each vertex of `k` exactly once.
fn block_of(k_vertices: &[usize], blocks: &[Vec<usize>]) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(MvssError::input(format!("partition block {b} is empty")));
        }
        for &v in block {
            if out.insert(v, b).is_some() {
                return Err(MvssError::input(format!("vertex {v} lies in two partition blocks")));
            }
        }
    }
    for v in k_vertices {
        if !out.contains_key(v) {
            return Err(MvssError::input(format!("vertex {v} lies in no partition block")));
        }
    }
    if out.len() != k_vertices.len() {
        return Err(MvssError::input("partition mentions vertices outside the complex"));
    }
    Ok(out)
}

/// The `(K, P)`-join diagram over the simplex on the partition blocks.
pub fn join_diagram<R: Real>(k: &FilteredComplex<R>, blocks: &[Vec<usize>]) -> Result<Diagram<R>> {
    let f = k.field();
    let mut simplices: Vec<(Vec<usize>, usize)> = Vec::with_capacity(k.len());
    for c in 0..k.len() {
        match &k.cell(c).label {
            Some(CellLabel::Simplex(v)) => simplices.push((v.clone(), k.cell(c).birth)),
            _ => return Err(MvssError::input("join diagrams need a simplicial complex with vertex labels")),
        }
    }
    let vertices: Vec<usize> = simplices.iter().filter(|s| s.0.len() == 1).map(|s| s.0[0]).collect();
    if simplices.iter().any(|s| s.0.len() == 1 && s.1 != 0) {
        return Err(MvssError::input("vertex set varies along the grid"));
    }
    let block = block_of(&vertices, blocks)?;
    let nb = blocks.len();
    let mut index_births = BTreeMap::new();
    for mask in 1u64..(1u64 << nb) {
        index_births.insert((0..nb).filter(|b| mask >> b & 1 == 1).collect::<Vec<_>>(), 0usize);
    }
    let index = simplicial_from_births(index_births, f, k.grid().clone())?;

    let split = |verts: &[usize]| -> (Vec<usize>, Vec<Vec<usize>>) {
        let mut parts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in verts {
            parts.entry(block[&v]).or_default().push(v);
        }
        (parts.keys().copied().collect(), parts.into_values().collect())
    };

    let mut fiber_cells: Vec<Vec<(Vec<Vec<usize>>, usize)>> = vec![Vec::new(); index.len()];
    for (verts, birth) in &simplices {
        let (sigma, factors) = split(verts);
        let s = index.find_label(&CellLabel::Simplex(sigma)).expect("every block subset is present");
        fiber_cells[s].push((factors, *birth));
    }
    let mut fibers = Vec::with_capacity(index.len());
    for cells in fiber_cells.iter_mut() {
        cells.sort_by(|a, b| {
            let da: usize = a.0.iter().map(|x| x.len()).sum();
            let db: usize = b.0.iter().map(|x| x.len()).sum();
            (da, &a.0).cmp(&(db, &b.0))
        });
        let pos: BTreeMap<Vec<Vec<usize>>, usize> = cells.iter().enumerate().map(|(i, c)| (c.0.clone(), i)).collect();
        let out: Vec<Cell> = cells
            .iter()
            .map(|(factors, birth)| {
                let dim: usize = factors.iter().map(|x| x.len() - 1).sum();
                let mut boundary = Vec::new();
                let mut before = 0;
                for (j, fac) in factors.iter().enumerate() {
                    if fac.len() > 1 {
                        for i in 0..fac.len() {
                            let mut g = factors.clone();
                            g[j].remove(i);
                            boundary.push((pos[&g], f.sign(before + i)));
                        }
                    }
                    before += fac.len() - 1;
                }
                Cell::new(dim, boundary, *birth).with_label(CellLabel::Product(factors.clone()))
            })
            .collect();
        fibers.push(FilteredComplex::new(f, k.grid().clone(), out)?);
    }
    let top = fibers.iter().filter_map(|x| x.max_dim()).max().unwrap_or(0);
    let mut face_maps = BTreeMap::new();
    for s in 0..index.len() {
        let sigma = simplex_of(&index, s).to_vec();
        for tau in sub_lists(&sigma) {
            let t = index.find_label(&CellLabel::Simplex(tau.clone())).expect("present");
            let keep: Vec<usize> = sigma.iter().enumerate().filter(|(_, b)| tau.contains(b)).map(|(i, _)| i).collect();
            let (src, dst) = (&fibers[s], &fibers[t]);
            let mats = (0..=top)
                .map(|n| {
                    let mut m = Matrix::zeros(f, dst.count_dim(n), src.count_dim(n));
                    for (j, &c) in src.cells_of_dim(n).iter().enumerate() {
                        let Some(CellLabel::Product(fac)) = &src.cell(c).label else { unreachable!() };
                        let dropped_flat = fac
                            .iter()
                            .enumerate()
                            .all(|(i, x)| keep.contains(&i) || x.len() == 1);
                        if !dropped_flat {
                            continue;
                        }
                        let image: Vec<Vec<usize>> = keep.iter().map(|&i| fac[i].clone()).collect();
                        let e = dst.find_label(&CellLabel::Product(image)).expect("projection lands in the fiber");
                        m.set(dst.slot(e), j, 1);
                    }
                    m
                })
                .collect();
            face_maps.insert((t, s), FaceMap { mats });
        }
    }
    Diagram::new(index, fibers, face_maps)
}

/// Connected components of every fiber at every grid index, with merge
/// maps along the grid and component maps along faces.
#[derive(Debug, Clone)]
pub struct Pi0Diagram<R = f64> {
    grid: Grid<R>,
    field: FieldSpec,
    index: FilteredComplex<R>,
    /// `[σ][t]`: minimal vertex id of each component, sorted.
    reps: Vec<Vec<Vec<usize>>>,
    /// `[σ][t]`: component index of each fiber vertex alive at `t`.
    of_vertex: Vec<Vec<BTreeMap<usize, usize>>>,
    /// `[(τ, σ)]`: image vertex of each fiber vertex of `σ`.
    vertex_image: BTreeMap<(usize, usize), BTreeMap<usize, usize>>,
}

fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
    let p = parent[&x];
    if p == x {
        return x;
    }
    let r = find(parent, p);
    parent.insert(x, r);
    r
}

pub fn pi0_diagram<R: Real>(d: &Diagram<R>) -> Pi0Diagram<R> {
    let g = d.grid().len();
    let mut reps = Vec::with_capacity(d.index.len());
    let mut of_vertex = Vec::with_capacity(d.index.len());
    for fiber in &d.fibers {
        let mut per_t_reps = Vec::with_capacity(g);
        let mut per_t_of = Vec::with_capacity(g);
        for t in 0..g {
            let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
            for v in fiber.cells_of_dim_by(0, t) {
                parent.insert(v, v);
            }
            for e in fiber.cells_of_dim_by(1, t) {
                let ends: Vec<usize> = fiber.cell(e).boundary.iter().map(|x| x.0).collect();
                if ends.len() == 2 {
                    let (a, b) = (find(&mut parent, ends[0]), find(&mut parent, ends[1]));
                    if a != b {
                        parent.insert(a.max(b), a.min(b));
                    }
                }
            }
            let verts: Vec<usize> = parent.keys().copied().collect();
            let roots: BTreeSet<usize> = verts.iter().map(|&v| find(&mut parent, v)).collect();
            let roots: Vec<usize> = roots.into_iter().collect();
            let of: BTreeMap<usize, usize> = verts
                .iter()
                .map(|&v| {
                    let r = find(&mut parent, v);
                    (v, roots.binary_search(&r).expect("root listed"))
                })
                .collect();
            per_t_reps.push(roots);
            per_t_of.push(of);
        }
        reps.push(per_t_reps);
        of_vertex.push(per_t_of);
    }
    let mut vertex_image = BTreeMap::new();
    for (&(t, s), fm) in &d.face_maps {
        let (src, dst) = (&d.fibers[s], &d.fibers[t]);
        let m = &fm.mats[0];
        let mut img = BTreeMap::new();
        for (j, &v) in src.cells_of_dim(0).iter().enumerate() {
            if let Some(i) = (0..m.rows()).find(|&i| m.get(i, j) != 0) {
                img.insert(v, dst.cells_of_dim(0)[i]);
            }
        }
        vertex_image.insert((t, s), img);
    }
    Pi0Diagram { grid: d.grid().clone(), field: d.field(), index: d.index.clone(), reps, of_vertex, vertex_image }
}

impl<R: Real> Pi0Diagram<R> {
    /// Number of components of fiber `σ` at grid index `t`.
    pub fn components(&self, s: usize, t: usize) -> usize {
        self.reps[s][t].len()
    }

    /// Component at `t + 1` containing component `k` of fiber `σ` at `t`.
    pub fn merge(&self, s: usize, t: usize, k: usize) -> usize {
        let v = self.reps[s][t][k];
        self.of_vertex[s][t + 1][&v]
    }

    /// Component of fiber `τ` receiving component `k` of fiber `σ` at `t`.
    pub fn face(&self, tau: usize, s: usize, t: usize, k: usize) -> usize {
        let v = self.reps[s][t][k];
        let w = self.vertex_image[&(tau, s)][&v];
        self.of_vertex[tau][t][&w]
    }

    /// Multinerve chain complex: generators `(σ, component)` in degree
    /// `dim σ`, boundary through component maps, merges along the grid.
    pub fn multinerve(&self) -> PersistentComplex<R> {
        let f = self.field;
        let g = self.grid.len();
        let top = self.index.max_dim().unwrap_or(0);
        let mut gens: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(g);
        for t in 0..g {
            let mut per_n = vec![Vec::new(); top + 1];
            for s in 0..self.index.len() {
                if self.index.cell(s).birth > t {
                    continue;
                }
                for k in 0..self.components(s, t) {
                    per_n[self.index.cell(s).dim].push((s, k));
                }
            }
            gens.push(per_n);
        }
        let levels: Vec<GradedLevel> = (0..g)
            .map(|t| {
                let d = (0..=top)
                    .map(|n| {
                        let rows = if n == 0 { 0 } else { gens[t][n - 1].len() };
                        let mut m = Matrix::zeros(f, rows, gens[t][n].len());
                        if n > 0 {
                            for (j, &(s, k)) in gens[t][n].iter().enumerate() {
                                for (i, tau) in self.codim_one(s) {
                                    let kk = self.face(tau, s, t, k);
                                    let row = gens[t][n - 1].iter().position(|&x| x == (tau, kk)).expect("face generator");
                                    m.add_at(row, j, f.sign(i));
                                }
                            }
                        }
                        m
                    })
                    .collect();
                GradedLevel {
                    dims: gens[t].iter().map(|x| x.len()).collect(),
                    d,
                    filt: gens[t].iter().map(|x| vec![0; x.len()]).collect(),
                    tags: gens[t].iter().map(|x| x.iter().map(|e| e.0).collect()).collect(),
                }
            })
            .collect();
        let maps = (0..g.saturating_sub(1))
            .map(|t| {
                (0..=top)
                    .map(|n| {
                        let mut m = Matrix::zeros(f, gens[t + 1][n].len(), gens[t][n].len());
                        for (j, &(s, k)) in gens[t][n].iter().enumerate() {
                            let kk = self.merge(s, t, k);
                            let i = gens[t + 1][n].iter().position(|&x| x == (s, kk)).expect("merged generator");
                            m.set(i, j, 1);
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        PersistentComplex::new(f, self.grid.clone(), levels, maps).expect("consistent multinerve")
    }

    fn codim_one(&self, s: usize) -> Vec<(usize, usize)> {
        let verts = simplex_of(&self.index, s);
        if verts.len() < 2 {
            return Vec::new();
        }
        (0..verts.len())
            .map(|i| {
                let mut v = verts.to_vec();
                v.remove(i);
                (i, self.index.find_label(&CellLabel::Simplex(v)).expect("face closed"))
            })
            .collect()
    }
}

/// Multinerve of a diagram, as a persistent chain complex.
pub fn multinerve<R: Real>(d: &Diagram<R>) -> PersistentComplex<R> {
    pi0_diagram(d).multinerve()
}

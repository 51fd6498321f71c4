//! Barcodes, pointwise persistence modules, rank functions, and the
//! standard column reduction.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::complex::FilteredComplex;
use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix};
use crate::grid::{Grid, Real};

/// A bar `[birth, death)` in grid indices; `death = None` means infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexBar {
    pub birth: usize,
    pub death: Option<usize>,
}

impl IndexBar {
    pub fn new(birth: usize, death: Option<usize>) -> Self {
        Self { birth, death }
    }

    /// Whether the bar contains grid index `t`.
    pub fn contains(&self, t: usize) -> bool {
        self.birth <= t && self.death.is_none_or(|d| t < d)
    }
}

/// A bar `[birth, death)` in real filtration values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar<R = f64> {
    pub birth: R,
    pub death: Option<R>,
}

impl<R: Real> Bar<R> {
    pub fn new(birth: R, death: Option<R>) -> Self {
        Self { birth, death }
    }

    pub fn finite(birth: R, death: R) -> Self {
        Self { birth, death: Some(death) }
    }

    pub fn infinite(birth: R) -> Self {
        Self { birth, death: None }
    }

    /// Length, infinite for essential bars.
    pub fn length(&self) -> R {
        self.death.map_or(R::infinity(), |d| d - self.birth)
    }

    fn death_key(&self) -> R {
        self.death.unwrap_or(R::infinity())
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.birth
            .partial_cmp(&other.birth)
            .unwrap_or(Ordering::Equal)
            .then(self.death_key().partial_cmp(&other.death_key()).unwrap_or(Ordering::Equal))
    }
}

/// Multiset of bars in one homology degree, kept sorted by (birth, death).
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode<R = f64> {
    pub dim: usize,
    pub bars: Vec<Bar<R>>,
}

impl<R: Real> Barcode<R> {
    pub fn new(dim: usize, mut bars: Vec<Bar<R>>) -> Self {
        bars.sort_by(|a, b| a.cmp_key(b));
        Self { dim, bars }
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, bars: Vec::new() }
    }

    pub fn from_index_bars(dim: usize, grid: &Grid<R>, bars: &[IndexBar]) -> Self {
        Self::new(
            dim,
            bars.iter()
                .map(|b| Bar::new(grid.value(b.birth), b.death.map(|d| grid.value(d))))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Number of bars alive at filtration value `v`.
    pub fn dim_at(&self, v: R) -> usize {
        self.bars
            .iter()
            .filter(|b| b.birth <= v && b.death.is_none_or(|d| v < d))
            .count()
    }

    /// Maximal bar length; zero for the empty barcode.
    pub fn max_length(&self) -> R {
        self.bars.iter().map(|b| b.length()).fold(R::zero(), R::max)
    }

    /// Same bars, ignoring the degree tag.
    pub fn same_bars(&self, other: &Barcode<R>) -> bool {
        self.bars == other.bars
    }
}

/// True iff every bar has length at most `eps`.
pub fn is_eps_trivial<R: Real>(b: &Barcode<R>, eps: R) -> bool {
    let tol = R::snap_tolerance();
    b.bars.iter().all(|bar| bar.death.is_some() && bar.length() <= eps + tol)
}

/// Ranks of all composite structure maps `M_s → M_t`, `s ≤ t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankFunction {
    ranks: Vec<Vec<usize>>,
}

impl RankFunction {
    /// `ranks[s][t - s]` is the rank of `M_s → M_t`.
    pub fn new(ranks: Vec<Vec<usize>>) -> Result<Self> {
        let n = ranks.len();
        for (s, row) in ranks.iter().enumerate() {
            if row.len() != n - s {
                return Err(MvssError::input(format!("rank row {s} has length {} instead of {}", row.len(), n - s)));
            }
        }
        Ok(Self { ranks })
    }

    /// Rank function of a barcode given in grid indices.
    pub fn from_bars(len: usize, bars: &[IndexBar]) -> Self {
        let ranks = (0..len)
            .map(|s| (s..len).map(|t| bars.iter().filter(|b| b.contains(s) && b.contains(t)).count()).collect())
            .collect();
        Self { ranks }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, s: usize, t: usize) -> usize {
        assert!(s <= t, "rank function queried with s > t");
        self.ranks[s][t - s]
    }

    fn rank_or_zero(&self, s: Option<usize>, t: usize) -> i64 {
        s.map_or(0, |s| self.rank(s, t) as i64)
    }
}

/// Inclusion-exclusion recovery of interval multiplicities.
pub fn barcode_from_rank(rf: &RankFunction) -> Result<Vec<IndexBar>> {
    let n = rf.len();
    let mut bars = Vec::new();
    for b in 0..n {
        let prev = b.checked_sub(1);
        for d in b + 1..n {
            let mu = rf.rank(b, d - 1) as i64 - rf.rank_or_zero(prev, d - 1) - rf.rank(b, d) as i64
                + rf.rank_or_zero(prev, d);
            push_bars(&mut bars, mu, b, Some(d))?;
        }
        let mu = rf.rank(b, n - 1) as i64 - rf.rank_or_zero(prev, n - 1);
        push_bars(&mut bars, mu, b, None)?;
    }
    Ok(bars)
}

fn push_bars(bars: &mut Vec<IndexBar>, mu: i64, b: usize, d: Option<usize>) -> Result<()> {
    if mu < 0 {
        return Err(MvssError::invariant(format!(
            "negative multiplicity {mu} for bar [{b}, {d:?}): rank function is not monotone"
        )));
    }
    bars.extend(std::iter::repeat_n(IndexBar::new(b, d), mu as usize));
    Ok(())
}

/// Grid-indexed vector spaces with maps between consecutive indices.
#[derive(Debug, Clone)]
pub struct PersistenceModule<R = f64> {
    field: FieldSpec,
    grid: Grid<R>,
    dims: Vec<usize>,
    maps: Vec<Matrix>,
}

impl<R: Real> PersistenceModule<R> {
    /// `maps[t]` sends the space at `t` to the space at `t + 1`.
    pub fn new(field: FieldSpec, grid: Grid<R>, dims: Vec<usize>, maps: Vec<Matrix>) -> Result<Self> {
        if dims.len() != grid.len() {
            return Err(MvssError::input(format!("{} spaces for a grid of length {}", dims.len(), grid.len())));
        }
        if maps.len() + 1 != dims.len() {
            return Err(MvssError::input(format!("{} structure maps for {} spaces", maps.len(), dims.len())));
        }
        for (t, m) in maps.iter().enumerate() {
            if m.cols() != dims[t] || m.rows() != dims[t + 1] {
                return Err(MvssError::input(format!(
                    "structure map {t} has shape {}x{} but spaces have dims {} -> {}",
                    m.rows(),
                    m.cols(),
                    dims[t],
                    dims[t + 1]
                )));
            }
        }
        Ok(Self { field, grid, dims, maps })
    }

    pub fn zero(field: FieldSpec, grid: Grid<R>) -> Self {
        let n = grid.len();
        let maps = (1..n).map(|_| Matrix::zeros(field, 0, 0)).collect();
        Self { field, grid, dims: vec![0; n], maps }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn grid(&self) -> &Grid<R> {
        &self.grid
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, t: usize) -> usize {
        self.dims[t]
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    /// Composite structure map from index `s` to index `t`.
    pub fn structure_map(&self, s: usize, t: usize) -> Matrix {
        assert!(s <= t, "structure map must go forward");
        let mut m = Matrix::identity(self.field, self.dims[s]);
        for u in s..t {
            m = self.maps[u].mul(&m);
        }
        m
    }

    pub fn rank_function(&self) -> RankFunction {
        let n = self.dims.len();
        let ranks = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut m = Matrix::identity(self.field, self.dims[s]);
                let mut row = vec![self.dims[s]];
                for u in s..n - 1 {
                    m = self.maps[u].mul(&m);
                    row.push(m.rank());
                }
                row
            })
            .collect();
        RankFunction { ranks }
    }

    pub fn index_bars(&self) -> Result<Vec<IndexBar>> {
        barcode_from_rank(&self.rank_function())
    }

    pub fn barcode(&self, dim: usize) -> Result<Barcode<R>> {
        Ok(Barcode::from_index_bars(dim, &self.grid, &self.index_bars()?))
    }

    /// Direct sum of modules on the same grid.
    pub fn direct_sum(parts: &[PersistenceModule<R>]) -> Result<PersistenceModule<R>> {
        let first = parts.first().ok_or_else(|| MvssError::input("empty direct sum"))?;
        let n = first.grid.len();
        let dims: Vec<usize> = (0..n).map(|t| parts.iter().map(|m| m.dims[t]).sum()).collect();
        let maps = (0..n.saturating_sub(1))
            .map(|t| {
                let mut out = Matrix::zeros(first.field, dims[t + 1], dims[t]);
                let (mut r0, mut c0) = (0, 0);
                for m in parts {
                    let blk = &m.maps[t];
                    for i in 0..blk.rows() {
                        for j in 0..blk.cols() {
                            out.set(r0 + i, c0 + j, blk.get(i, j));
                        }
                    }
                    r0 += blk.rows();
                    c0 += blk.cols();
                }
                out
            })
            .collect();
        PersistenceModule::new(first.field, first.grid.clone(), dims, maps)
    }
}

/// Module from explicit pointwise spaces and consecutive maps.
pub fn module_from_pointwise<R: Real>(
    field: FieldSpec,
    grid: Grid<R>,
    dims: Vec<usize>,
    maps: Vec<Matrix>,
) -> Result<PersistenceModule<R>> {
    PersistenceModule::new(field, grid, dims, maps)
}

/// Position of each cell in the filtration order (birth, dim, id).
pub fn filtration_order<R: Real>(complex: &FilteredComplex<R>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..complex.len()).collect();
    order.sort_by_key(|&c| (complex.cell(c).birth, complex.cell(c).dim, c));
    order
}

/// Persistence pairs by column reduction, as grid-index bars per degree.
pub fn compute_index_bars<R: Real>(complex: &FilteredComplex<R>, max_dim: usize) -> Vec<Vec<IndexBar>> {
    let f = complex.field();
    let order = filtration_order(complex);
    let mut pos = vec![0; complex.len()];
    for (i, &c) in order.iter().enumerate() {
        pos[c] = i;
    }
    let mut columns: Vec<Vec<(usize, u32)>> = order
        .iter()
        .map(|&c| {
            let mut col: Vec<(usize, u32)> = complex.cell(c).boundary.iter().map(|&(face, v)| (pos[face], v)).collect();
            col.sort_by_key(|e| e.0);
            col
        })
        .collect();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut paired = vec![false; order.len()];
    let mut bars = vec![Vec::new(); max_dim + 1];
    for j in 0..columns.len() {
        if complex.cell(order[j]).dim > max_dim + 1 {
            continue;
        }
        while let Some(&(low, lv)) = columns[j].last() {
            let Some(&i) = owner.get(&low) else { break };
            let iv = columns[i].last().expect("owner column nonempty").1;
            let factor = f.mul(lv, f.inv(iv));
            let pivot_col = columns[i].clone();
            columns[j] = axpy(f, &columns[j], f.neg(factor), &pivot_col);
        }
        if let Some(&(low, _)) = columns[j].last() {
            owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            let dim = complex.cell(order[low]).dim;
            let (b, d) = (complex.cell(order[low]).birth, complex.cell(order[j]).birth);
            if dim <= max_dim && b < d {
                bars[dim].push(IndexBar::new(b, Some(d)));
            }
        }
    }
    for (j, &c) in order.iter().enumerate() {
        let dim = complex.cell(c).dim;
        if dim <= max_dim && !paired[j] && columns[j].is_empty() {
            bars[dim].push(IndexBar::new(complex.cell(c).birth, None));
        }
    }
    for b in bars.iter_mut() {
        b.sort();
    }
    bars
}

/// Barcodes in degrees `0..=max_dim`.
pub fn compute_ph<R: Real>(complex: &FilteredComplex<R>, max_dim: usize) -> Vec<Barcode<R>> {
    compute_index_bars(complex, max_dim)
        .iter()
        .enumerate()
        .map(|(d, bars)| Barcode::from_index_bars(d, complex.grid(), bars))
        .collect()
}

/// `a + c * b` on sorted sparse vectors.
pub(crate) fn axpy(f: FieldSpec, a: &[(usize, u32)], c: u32, b: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = f.mul(c, b[j].1);
            if v != 0 {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = f.add(a[i].1, f.mul(c, b[j].1));
            if v != 0 {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Betti numbers of the subcomplex born by `t`, in degrees `0..=max_dim`.
pub fn betti_at<R: Real>(complex: &FilteredComplex<R>, t: usize, max_dim: usize) -> Vec<usize> {
    let ranks: Vec<usize> = (0..=max_dim + 1).map(|d| complex.boundary_matrix(d, t).0.rank()).collect();
    (0..=max_dim)
        .map(|d| complex.cells_of_dim_by(d, t).len() - ranks[d] - ranks[d + 1])
        .collect()
}

/// Homology persistence module of a complex in degree `dim`, with explicit
/// bases of homology classes at each grid index.
pub fn homology_module<R: Real>(complex: &FilteredComplex<R>, dim: usize) -> PersistenceModule<R> {
    let g = complex.grid().len();
    let mut quotients = Vec::with_capacity(g);
    for t in 0..g {
        quotients.push(homology_quotient(complex, dim, t));
    }
    let dims: Vec<usize> = quotients.iter().map(|q| q.dim()).collect();
    let maps = (0..g.saturating_sub(1))
        .map(|t| quotients[t + 1].coords(quotients[t].reps()).expect("cycles persist under inclusion"))
        .collect();
    PersistenceModule::new(complex.field(), complex.grid().clone(), dims, maps).expect("consistent shapes")
}

/// `Z_dim / B_dim` at grid index `t`, in coordinates of all `dim`-cells.
pub fn homology_quotient<R: Real>(complex: &FilteredComplex<R>, dim: usize, t: usize) -> crate::field::Quotient {
    use crate::field::{Quotient, Subspace};
    let f = complex.field();
    let total = complex.count_dim(dim);
    let alive: Vec<usize> = complex.cells_of_dim(dim)
        .iter()
        .enumerate()
        .filter(|(_, &c)| complex.cell(c).birth <= t)
        .map(|(i, _)| i)
        .collect();
    let d = complex.full_boundary(dim);
    let z_local = d.select_cols(&alive).kernel();
    let mut z = Matrix::zeros(f, total, z_local.cols());
    for (k, &i) in alive.iter().enumerate() {
        for j in 0..z_local.cols() {
            z.set(i, j, z_local.get(k, j));
        }
    }
    let up = complex.full_boundary(dim + 1);
    let up_alive: Vec<usize> = complex.cells_of_dim(dim + 1)
        .iter()
        .enumerate()
        .filter(|(_, &c)| complex.cell(c).birth <= t)
        .map(|(i, _)| i)
        .collect();
    let b = if up.rows() == total { up.select_cols(&up_alive) } else { Matrix::zeros(f, total, 0) };
    Quotient::new(&Subspace::span(&z), Subspace::span(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_simplicial;

    fn g(v: &[f64]) -> Grid<f64> {
        Grid::new(v.to_vec()).unwrap()
    }

    #[test]
    fn round_trip_bars() {
        let bars = vec![IndexBar::new(0, Some(2)), IndexBar::new(1, None), IndexBar::new(1, Some(2))];
        let rf = RankFunction::from_bars(3, &bars);
        let mut back = barcode_from_rank(&rf).unwrap();
        back.sort();
        let mut want = bars.clone();
        want.sort();
        assert_eq!(back, want);
    }

    #[test]
    fn filled_triangle() {
        let k = build_simplicial(
            &[(vec![0, 1], 0.0), (vec![1, 2], 0.0), (vec![0, 2], 0.0), (vec![0, 1, 2], 1.0)],
            FieldSpec::f2(),
            g(&[0.0, 1.0]),
            true,
        )
        .unwrap();
        let ph = compute_ph(&k, 1);
        assert_eq!(ph[0].bars, vec![Bar::infinite(0.0)]);
        assert_eq!(ph[1].bars, vec![Bar::finite(0.0, 1.0)]);
    }

    #[test]
    fn projection_then_identity() {
        let f = FieldSpec::f2();
        let m = PersistenceModule::new(
            f,
            g(&[0.0, 1.0, 2.0]),
            vec![2, 1, 1],
            vec![Matrix::from_rows(f, &[vec![1, 0]]), Matrix::identity(f, 1)],
        )
        .unwrap();
        let b = m.barcode(0).unwrap();
        assert_eq!(b.bars, vec![Bar::finite(0.0, 1.0), Bar::infinite(0.0)]);
    }
}

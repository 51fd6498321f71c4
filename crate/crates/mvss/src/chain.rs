//! Grid-indexed chain complexes with an auxiliary column filtration.
//!
//! A [`PersistentComplex`] stores, at every grid index, a based chain
//! complex together with a column label per basis element, and chain maps
//! between consecutive grid indices. Filtered cell complexes, total
//! complexes of diagrams, π₀ multinerves and double complexes of homology
//! modules all fit this shape.

use crate::complex::FilteredComplex;
use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix, Quotient, Subspace};
use crate::grid::{Grid, Real};
use crate::persistence::PersistenceModule;

/// One grid index worth of a chain complex.
#[derive(Debug, Clone)]
pub struct GradedLevel {
    /// Basis size per degree.
    pub dims: Vec<usize>,
    /// `d[n]: C_n → C_{n-1}`; `d[0]` has zero rows.
    pub d: Vec<Matrix>,
    /// Column label of each basis element, per degree.
    pub filt: Vec<Vec<i64>>,
    /// Caller-defined tag of each basis element, per degree.
    pub tags: Vec<Vec<usize>>,
}

impl GradedLevel {
    pub fn empty(field: FieldSpec, top: usize) -> Self {
        Self {
            dims: vec![0; top + 1],
            d: (0..=top).map(|_| Matrix::zeros(field, 0, 0)).collect(),
            filt: vec![Vec::new(); top + 1],
            tags: vec![Vec::new(); top + 1],
        }
    }

    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims.get(n).copied().unwrap_or(0)
    }

    /// Position of a tag in degree `n`.
    pub fn position(&self, n: usize, tag: usize) -> Option<usize> {
        self.tags[n].iter().position(|&x| x == tag)
    }
}

#[derive(Debug, Clone)]
pub struct PersistentComplex<R = f64> {
    field: FieldSpec,
    grid: Grid<R>,
    levels: Vec<GradedLevel>,
    /// `maps[t][n]: C_n(t) → C_n(t+1)`.
    maps: Vec<Vec<Matrix>>,
}

impl<R: Real> PersistentComplex<R> {
    pub fn new(field: FieldSpec, grid: Grid<R>, levels: Vec<GradedLevel>, maps: Vec<Vec<Matrix>>) -> Result<Self> {
        if levels.len() != grid.len() || maps.len() + 1 != levels.len() {
            return Err(MvssError::input("level or map count does not match the grid"));
        }
        let top = levels[0].top();
        for (t, lv) in levels.iter().enumerate() {
            if lv.top() != top || lv.d.len() != top + 1 || lv.filt.len() != top + 1 || lv.tags.len() != top + 1 {
                return Err(MvssError::input(format!("level {t} has inconsistent degree range")));
            }
            for n in 0..=top {
                let rows = if n == 0 { 0 } else { lv.dims[n - 1] };
                if lv.d[n].rows() != rows || lv.d[n].cols() != lv.dims[n] {
                    return Err(MvssError::input(format!("level {t}: differential in degree {n} has wrong shape")));
                }
                if lv.filt[n].len() != lv.dims[n] || lv.tags[n].len() != lv.dims[n] {
                    return Err(MvssError::input(format!("level {t}: labels in degree {n} have wrong length")));
                }
            }
        }
        for (t, ms) in maps.iter().enumerate() {
            if ms.len() != top + 1 {
                return Err(MvssError::input(format!("map {t} has the wrong number of degrees")));
            }
            for n in 0..=top {
                if ms[n].cols() != levels[t].dims[n] || ms[n].rows() != levels[t + 1].dims[n] {
                    return Err(MvssError::input(format!("map {t} in degree {n} has wrong shape")));
                }
            }
        }
        Ok(Self { field, grid, levels, maps })
    }

    /// Chain complex of a filtered cell complex, with column labels from `filt`.
    pub fn from_filtered(complex: &FilteredComplex<R>, filt: impl Fn(usize) -> i64) -> Self {
        let field = complex.field();
        let top = complex.max_dim().unwrap_or(0);
        let g = complex.grid().len();
        let levels: Vec<GradedLevel> = (0..g)
            .map(|t| {
                let mut lv = GradedLevel::empty(field, top);
                for n in 0..=top {
                    let (d, _, cols) = complex.boundary_matrix(n, t);
                    lv.dims[n] = cols.len();
                    lv.filt[n] = cols.iter().map(|&c| filt(c)).collect();
                    lv.tags[n] = cols;
                    lv.d[n] = d;
                }
                lv
            })
            .collect();
        let maps = (0..g.saturating_sub(1))
            .map(|t| (0..=top).map(|n| inclusion(field, &levels[t].tags[n], &levels[t + 1].tags[n])).collect())
            .collect();
        Self { field, grid: complex.grid().clone(), levels, maps }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn grid(&self) -> &Grid<R> {
        &self.grid
    }

    pub fn levels(&self) -> &[GradedLevel] {
        &self.levels
    }

    pub fn level(&self, t: usize) -> &GradedLevel {
        &self.levels[t]
    }

    pub fn maps(&self) -> &[Vec<Matrix>] {
        &self.maps
    }

    pub fn top(&self) -> usize {
        self.levels[0].top()
    }

    /// Composite structure map `C_n(s) → C_n(t)`.
    pub fn structure_map(&self, n: usize, s: usize, t: usize) -> Matrix {
        let mut m = Matrix::identity(self.field, self.levels[s].dim(n));
        for u in s..t {
            m = self.maps[u][n].mul(&m);
        }
        m
    }

    /// Range of column labels present anywhere.
    pub fn filt_range(&self) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for lv in &self.levels {
            for f in lv.filt.iter().flatten() {
                lo = lo.min(*f);
                hi = hi.max(*f);
            }
        }
        if lo > hi {
            (0, 0)
        } else {
            (lo, hi)
        }
    }

    /// Same complex with every column label replaced by zero.
    pub fn unfiltered(&self) -> Self {
        let mut out = self.clone();
        for lv in &mut out.levels {
            for f in &mut lv.filt {
                f.iter_mut().for_each(|x| *x = 0);
            }
        }
        out
    }

    /// Same complex with relabelled columns.
    pub fn relabel(&self, filt: impl Fn(usize, usize, usize) -> i64) -> Self {
        let mut out = self.clone();
        for (t, lv) in out.levels.iter_mut().enumerate() {
            for n in 0..lv.filt.len() {
                for i in 0..lv.filt[n].len() {
                    lv.filt[n][i] = filt(t, n, i);
                }
            }
        }
        out
    }

    /// Check `d∘d = 0`, chain-map property of the structure maps, and that
    /// differentials and structure maps never raise the column label.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (t, lv) in self.levels.iter().enumerate() {
            for n in 1..=lv.top() {
                if n >= 2 && !lv.d[n - 1].mul(&lv.d[n]).is_zero() {
                    return Err(format!("d∘d ≠ 0 in degree {n} at grid index {t}"));
                }
                if !preserves_filtration(&lv.d[n], &lv.filt[n], &lv.filt[n - 1]) {
                    return Err(format!("differential raises the column label in degree {n} at grid index {t}"));
                }
            }
        }
        for t in 0..self.maps.len() {
            for n in 0..=self.top() {
                let m = &self.maps[t][n];
                if !preserves_filtration(m, &self.levels[t].filt[n], &self.levels[t + 1].filt[n]) {
                    return Err(format!("structure map raises the column label in degree {n} at grid index {t}"));
                }
                if n >= 1 {
                    let lhs = self.levels[t + 1].d[n].mul(m);
                    let rhs = self.maps[t][n - 1].mul(&self.levels[t].d[n]);
                    if lhs != rhs {
                        return Err(format!("structure map is not a chain map in degree {n} at grid index {t}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `Z_n / B_n` at grid index `t` in level coordinates.
    pub fn homology_quotient(&self, n: usize, t: usize) -> Quotient {
        let lv = &self.levels[t];
        if n > lv.top() {
            return Quotient::new(&Subspace::zero(self.field, 0), Subspace::zero(self.field, 0));
        }
        let z = Subspace::from_independent(lv.d[n].kernel());
        let b = if n < lv.top() {
            Subspace::span(&lv.d[n + 1])
        } else {
            Subspace::zero(self.field, lv.dim(n))
        };
        Quotient::new(&z, b)
    }

    /// Persistent homology in degree `n` as a pointwise module.
    pub fn homology_module(&self, n: usize) -> PersistenceModule<R> {
        let qs: Vec<Quotient> = (0..self.grid.len()).map(|t| self.homology_quotient(n, t)).collect();
        let dims = qs.iter().map(|q| q.dim()).collect();
        let maps = (0..self.grid.len().saturating_sub(1))
            .map(|t| {
                if n > self.levels[t].top() {
                    return Matrix::zeros(self.field, 0, 0);
                }
                let img = self.maps[t][n].mul(qs[t].reps());
                qs[t + 1].coords(&img).expect("structure maps send cycles to cycles")
            })
            .collect();
        PersistenceModule::new(self.field, self.grid.clone(), dims, maps).expect("consistent shapes")
    }

    /// Betti number in degree `n` at grid index `t`.
    pub fn betti(&self, n: usize, t: usize) -> usize {
        let lv = &self.levels[t];
        let out = lv.d[n].rank();
        let inc = if n < lv.top() { lv.d[n + 1].rank() } else { 0 };
        lv.dim(n) - out - inc
    }
}

/// Whether `m` sends each basis element with label `f` into the span of
/// basis elements with label at most `f`.
pub fn preserves_filtration(m: &Matrix, src: &[i64], dst: &[i64]) -> bool {
    (0..m.cols()).all(|j| (0..m.rows()).all(|i| m.get(i, j) == 0 || dst[i] <= src[j]))
}

/// 0/1 matrix sending each tag of `src` to the same tag in `dst`.
pub fn inclusion(field: FieldSpec, src: &[usize], dst: &[usize]) -> Matrix {
    let mut m = Matrix::zeros(field, dst.len(), src.len());
    for (j, tag) in src.iter().enumerate() {
        let i = dst.iter().position(|x| x == tag).expect("inclusion target contains source tag");
        m.set(i, j, 1);
    }
    m
}

/// A chain-map family between persistent complexes:
/// `mats[t][n]: A_n(t) → B_n(targets[t])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMapFamily {
    pub targets: Vec<usize>,
    pub mats: Vec<Vec<Matrix>>,
}

impl ChainMapFamily {
    pub fn identity<R: Real>(a: &PersistentComplex<R>) -> Self {
        let f = a.field();
        Self {
            targets: (0..a.grid().len()).collect(),
            mats: a.levels().iter().map(|lv| lv.dims.iter().map(|&k| Matrix::identity(f, k)).collect()).collect(),
        }
    }

    /// Check commutation with differentials and structure maps and that the
    /// column filtration is preserved.
    pub fn validate<R: Real>(&self, a: &PersistentComplex<R>, b: &PersistentComplex<R>) -> std::result::Result<(), String> {
        let g = a.grid().len();
        for t in 0..g {
            let u = self.targets[t];
            let (la, lb) = (a.level(t), b.level(u));
            for n in 0..=a.top() {
                let m = &self.mats[t][n];
                if m.cols() != la.dim(n) || m.rows() != lb.dim(n) {
                    return Err(format!("shape mismatch in degree {n} at grid index {t}"));
                }
                if n > lb.top() {
                    continue;
                }
                if !preserves_filtration(m, &la.filt[n], &lb.filt[n]) {
                    return Err(format!("column filtration violated in degree {n} at grid index {t}"));
                }
                if n >= 1 && lb.d[n].mul(m) != self.mats[t][n - 1].mul(&la.d[n]) {
                    return Err(format!("not a chain map in degree {n} at grid index {t}"));
                }
            }
            if t + 1 < g {
                let v = self.targets[t + 1];
                if v < u {
                    return Err(format!("targets decrease at grid index {t}"));
                }
                for n in 0..=a.top().min(b.top()) {
                    let lhs = self.mats[t + 1][n].mul(&a.maps()[t][n]);
                    let rhs = b.structure_map(n, u, v).mul(&self.mats[t][n]);
                    if lhs != rhs {
                        return Err(format!("does not commute with structure maps in degree {n} at grid index {t}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ChainMapFamily) -> ChainMapFamily {
        let targets = self.targets.iter().map(|&u| next.targets[u]).collect();
        let mats = self
            .mats
            .iter()
            .zip(&self.targets)
            .map(|(ms, &u)| ms.iter().zip(&next.mats[u]).map(|(m, nm)| nm.mul(m)).collect())
            .collect();
        ChainMapFamily { targets, mats }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_simplicial;

    #[test]
    fn circle_homology_module() {
        let k = build_simplicial(
            &[(vec![0, 1], 0.0), (vec![1, 2], 0.0), (vec![0, 2], 1.0)],
            FieldSpec::f2(),
            Grid::new(vec![0.0, 1.0]).unwrap(),
            true,
        )
        .unwrap();
        let pc = PersistentComplex::from_filtered(&k, |_| 0);
        pc.validate().unwrap();
        assert_eq!(pc.homology_module(1).dims(), &[0, 1]);
        assert_eq!(pc.homology_module(0).dims(), &[1, 1]);
    }
}

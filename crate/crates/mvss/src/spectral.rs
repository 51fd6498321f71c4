//! Persistent spectral sequences of column-filtered persistent complexes.
//!
//! At every grid index the pages are the subquotients
//! `E^r_p = Z^r_p / (Z^{r-1}_{p-1} + d Z^{r-1}_{p+r-1})` with
//! `Z^r_p = {x ∈ F_p : dx ∈ F_{p-r}}`. Entries become persistence modules
//! through the structure maps of the underlying complex.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::chain::{ChainMapFamily, GradedLevel, PersistentComplex};
use crate::complex::FilteredComplex;
use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix, Quotient, Subspace};
use crate::grid::Real;
use crate::persistence::{betti_at, Barcode, PersistenceModule};

struct LevelCalc<'a> {
    field: FieldSpec,
    lv: &'a GradedLevel,
    pmin: i64,
    memo: HashMap<(usize, i64, i64), Subspace>,
}

impl<'a> LevelCalc<'a> {
    fn new(field: FieldSpec, lv: &'a GradedLevel, pmin: i64) -> Self {
        Self { field, lv, pmin, memo: HashMap::new() }
    }

    fn z(&mut self, n: usize, p: i64, r: i64) -> Subspace {
        let ambient = self.lv.dim(n);
        if n > self.lv.top() || p < self.pmin {
            return Subspace::zero(self.field, ambient);
        }
        let r = r.clamp(0, p - self.pmin + 1);
        if let Some(s) = self.memo.get(&(n, p, r)) {
            return s.clone();
        }
        let cols: Vec<usize> = (0..ambient).filter(|&i| self.lv.filt[n][i] <= p).collect();
        let basis = if n == 0 {
            embed_cols(self.field, ambient, &cols, &Matrix::identity(self.field, cols.len()))
        } else {
            let rows: Vec<usize> = (0..self.lv.dim(n - 1)).filter(|&i| self.lv.filt[n - 1][i] > p - r).collect();
            let k = self.lv.d[n].select_rows(&rows).select_cols(&cols).kernel();
            embed_cols(self.field, ambient, &cols, &k)
        };
        let s = Subspace::from_independent(basis);
        self.memo.insert((n, p, r), s.clone());
        s
    }

    fn den(&mut self, n: usize, p: i64, r: i64) -> Subspace {
        let lower = self.z(n, p - 1, r - 1);
        if n < self.lv.top() {
            let up = self.z(n + 1, p + r - 1, r - 1);
            let img = self.lv.d[n + 1].mul(up.basis());
            lower.sum(&Subspace::span(&img))
        } else {
            lower
        }
    }

    fn quotient(&mut self, n: usize, p: i64, r: i64) -> Quotient {
        let num = self.z(n, p, r);
        let den = self.den(n, p, r);
        Quotient::new(&num, den)
    }
}

/// Rows of `k` placed at positions `cols` of an `ambient`-dimensional space.
fn embed_cols(field: FieldSpec, ambient: usize, cols: &[usize], k: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(field, ambient, k.cols());
    for (a, &i) in cols.iter().enumerate() {
        for j in 0..k.cols() {
            out.set(i, j, k.get(a, j));
        }
    }
    out
}

/// Quotients for one grid index: `[r][n][p - pmin]`.
type LevelPages = Vec<Vec<Vec<Quotient>>>;

/// All pages `0..=r_inf` of the spectral sequence of a persistent complex.
#[derive(Debug, Clone)]
pub struct SpectralSequence<R = f64> {
    complex: PersistentComplex<R>,
    pmin: i64,
    pmax: i64,
    last_page: usize,
    pages: Vec<LevelPages>,
    /// `maps[t][r][n][p - pmin]`: entry map from `t` to `t + 1`.
    maps: Vec<Vec<Vec<Vec<Matrix>>>>,
}

impl<R: Real> SpectralSequence<R> {
    /// Compute pages `0..=r_max`; `r_max` is raised to the stabilization page.
    pub fn compute(complex: &PersistentComplex<R>, r_max: usize) -> Self {
        let (pmin, pmax) = complex.filt_range();
        let stable = (pmax - pmin + 1) as usize;
        let last_page = r_max.max(stable);
        let field = complex.field();
        let top = complex.top();
        let pages: Vec<LevelPages> = complex
            .levels()
            .par_iter()
            .map(|lv| {
                let mut calc = LevelCalc::new(field, lv, pmin);
                (0..=last_page)
                    .map(|r| {
                        (0..=top)
                            .map(|n| (pmin..=pmax).map(|p| calc.quotient(n, p, r as i64)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let g = complex.grid().len();
        let maps = (0..g.saturating_sub(1))
            .into_par_iter()
            .map(|t| {
                (0..=last_page)
                    .map(|r| {
                        (0..=top)
                            .map(|n| {
                                (0..=(pmax - pmin) as usize)
                                    .map(|pi| {
                                        let img = complex.maps()[t][n].mul(pages[t][r][n][pi].reps());
                                        pages[t + 1][r][n][pi]
                                            .coords(&img)
                                            .expect("structure maps preserve page subquotients")
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { complex: complex.clone(), pmin, pmax, last_page, pages, maps }
    }

    pub fn complex(&self) -> &PersistentComplex<R> {
        &self.complex
    }

    pub fn field(&self) -> FieldSpec {
        self.complex.field()
    }

    pub fn p_range(&self) -> (i64, i64) {
        (self.pmin, self.pmax)
    }

    pub fn top(&self) -> usize {
        self.complex.top()
    }

    /// Last computed page; all later pages coincide with it.
    pub fn last_page(&self) -> usize {
        self.last_page
    }

    /// First page from which the sequence is constant.
    pub fn stable_page(&self) -> usize {
        (self.pmax - self.pmin + 1) as usize
    }

    fn page_index(&self, r: usize) -> usize {
        r.min(self.last_page)
    }

    /// Subquotient for `E^r_p` in total degree `n` at grid index `t`.
    pub fn quotient(&self, r: usize, p: i64, n: usize, t: usize) -> Option<&Quotient> {
        if p < self.pmin || p > self.pmax || n > self.top() {
            return None;
        }
        Some(&self.pages[t][self.page_index(r)][n][(p - self.pmin) as usize])
    }

    /// Representatives of the basis of `E^r_p` (total degree `n`) at `t`.
    pub fn reps(&self, r: usize, p: i64, n: usize, t: usize) -> Matrix {
        match self.quotient(r, p, n, t) {
            Some(q) => q.reps().clone(),
            None => Matrix::zeros(self.field(), self.complex.level(t).dim(n), 0),
        }
    }

    /// Coordinates in `E^r_p` of chains known to lie in `Z^r_p`.
    pub fn coords(&self, r: usize, p: i64, n: usize, t: usize, v: &Matrix) -> Option<Matrix> {
        match self.quotient(r, p, n, t) {
            Some(q) => q.coords(v),
            None => Some(Matrix::zeros(self.field(), 0, v.cols())),
        }
    }

    pub fn dim(&self, r: usize, p: i64, q: i64, t: usize) -> usize {
        if q < 0 || p + q < 0 {
            return 0;
        }
        self.quotient(r, p, (p + q) as usize, t).map_or(0, |x| x.dim())
    }

    /// Structure map of the entry `(p, n)` on page `r` from `s` to `u`.
    pub fn entry_map(&self, r: usize, p: i64, n: usize, s: usize, u: usize) -> Matrix {
        let k = self.quotient(r, p, n, s).map_or(0, |x| x.dim());
        let mut m = Matrix::identity(self.field(), k);
        if p < self.pmin || p > self.pmax || n > self.top() {
            return Matrix::zeros(self.field(), 0, 0);
        }
        let ri = self.page_index(r);
        for v in s..u {
            m = self.maps[v][ri][n][(p - self.pmin) as usize].mul(&m);
        }
        m
    }

    /// Entry `E^r_{p,q}` as a persistence module.
    pub fn entry_module(&self, r: usize, p: i64, q: i64) -> PersistenceModule<R> {
        let grid = self.complex.grid().clone();
        let g = grid.len();
        if q < 0 || p + q < 0 || p < self.pmin || p > self.pmax || (p + q) as usize > self.top() {
            return PersistenceModule::zero(self.field(), grid);
        }
        let n = (p + q) as usize;
        let dims = (0..g).map(|t| self.dim(r, p, q, t)).collect();
        let maps = (0..g.saturating_sub(1)).map(|t| self.entry_map(r, p, n, t, t + 1)).collect();
        PersistenceModule::new(self.field(), grid, dims, maps).expect("consistent entry shapes")
    }

    pub fn entry_barcode(&self, r: usize, p: i64, q: i64) -> Barcode<R> {
        self.entry_module(r, p, q).barcode(q.max(0) as usize).expect("entry rank functions are monotone")
    }

    /// `d_r: E^r_{p,q} → E^r_{p-r,q+r-1}` at grid index `t`, as a matrix.
    pub fn differential(&self, r: usize, p: i64, n: usize, t: usize) -> Matrix {
        let field = self.field();
        let src = self.reps(r, p, n, t);
        if n == 0 {
            return Matrix::zeros(field, 0, src.cols());
        }
        let tgt_p = p - r as i64;
        if n > self.top() {
            let rows = self.quotient(r, tgt_p, n - 1, t).map_or(0, |q| q.dim());
            return Matrix::zeros(field, rows, src.cols());
        }
        let lv = self.complex.level(t);
        let img = lv.d[n].mul(&src);
        self.coords(r, tgt_p, n - 1, t, &img).expect("d maps Z^r_p into Z^r_{p-r}")
    }

    /// Entries `(p, n)` that may be nonzero.
    pub fn entry_keys(&self) -> Vec<(i64, usize)> {
        (self.pmin..=self.pmax).flat_map(|p| (0..=self.top()).map(move |n| (p, n))).collect()
    }

    /// Check `dim E^{r+1} = dim ker d_r − dim im d_r` for every entry and grid index.
    pub fn check_page_recursion(&self) -> std::result::Result<(), String> {
        let g = self.complex.grid().len();
        for r in 0..self.last_page {
            for t in 0..g {
                for (p, n) in self.entry_keys() {
                    let out = self.differential(r, p, n, t);
                    let inc = if n < self.top() {
                        self.differential(r, p + r as i64, n + 1, t).rank()
                    } else {
                        0
                    };
                    let k = self.quotient(r, p, n, t).map_or(0, |x| x.dim());
                    let expected = k - out.rank() - inc;
                    let next = self.quotient(r + 1, p, n, t).map_or(0, |x| x.dim());
                    if expected != next {
                        return Err(format!(
                            "page {} entry p={p} n={n} at grid index {t}: homology {expected} but next page {next}",
                            r
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `Σ_p dim E^∞_{p, n-p}(t)`.
    pub fn infinity_total(&self, n: usize, t: usize) -> usize {
        (self.pmin..=self.pmax)
            .map(|p| self.quotient(self.last_page, p, n, t).map_or(0, |x| x.dim()))
            .sum()
    }
}

/// Compare `E^∞` diagonal totals against the homology of `target`.
pub fn e_infinity_check<R: Real>(ss: &SpectralSequence<R>, target: &FilteredComplex<R>) -> Result<()> {
    let top = ss.top();
    for t in 0..target.grid().len() {
        let betti = betti_at(target, t, top);
        for n in 0..=top {
            let lhs = ss.infinity_total(n, t);
            if lhs != betti[n] {
                return Err(MvssError::invariant(format!(
                    "degree {n} at grid index {t}: E-infinity total {lhs} but homology {}",
                    betti[n]
                )));
            }
        }
    }
    Ok(())
}

/// Per-page, per-entry, per-grid-index matrices of a morphism of spectral
/// sequences `A → B` landing at `targets[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PageMorphism {
    pub targets: Vec<usize>,
    /// First page on which the morphism is defined.
    pub start: usize,
    /// `pages[r - start][(p, n)][t]`.
    pub pages: Vec<BTreeMap<(i64, usize), Vec<Matrix>>>,
}

impl PageMorphism {
    pub fn page(&self, r: usize) -> Option<&BTreeMap<(i64, usize), Vec<Matrix>>> {
        r.checked_sub(self.start).and_then(|i| self.pages.get(i))
    }

    pub fn last_page(&self) -> usize {
        self.start + self.pages.len() - 1
    }

    /// Matrix on entry `(p, n)` of page `r` at `t`, or a zero matrix of the
    /// right shape when the entry is absent.
    pub fn matrix<R: Real>(
        &self,
        a: &SpectralSequence<R>,
        b: &SpectralSequence<R>,
        r: usize,
        p: i64,
        n: usize,
        t: usize,
    ) -> Matrix {
        if let Some(m) = self.page(r).and_then(|pg| pg.get(&(p, n))) {
            return m[t].clone();
        }
        let cols = a.quotient(r, p, n, t).map_or(0, |q| q.dim());
        let rows = b.quotient(r, p, n, self.targets[t]).map_or(0, |q| q.dim());
        Matrix::zeros(a.field(), rows, cols)
    }
}

fn union_keys<R: Real>(a: &SpectralSequence<R>, b: &SpectralSequence<R>) -> Vec<(i64, usize)> {
    let lo = a.pmin.min(b.pmin);
    let hi = a.pmax.max(b.pmax);
    let top = a.top().max(b.top());
    (lo..=hi).flat_map(|p| (0..=top).map(move |n| (p, n))).collect()
}

/// Morphism on pages `0..=r_max` induced by a filtration-preserving chain map.
pub fn induced_page_morphism<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    f: &ChainMapFamily,
    r_max: usize,
) -> Result<PageMorphism> {
    f.validate(a.complex(), b.complex()).map_err(MvssError::invariant)?;
    let g = a.complex().grid().len();
    let keys = union_keys(a, b);
    let mut pages = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let mut page = BTreeMap::new();
        for &(p, n) in &keys {
            let mut per_t = Vec::with_capacity(g);
            for t in 0..g {
                let u = f.targets[t];
                let src = a.reps(r, p, n, t);
                let img = if n <= a.top() {
                    f.mats[t][n].mul(&src)
                } else {
                    Matrix::zeros(a.field(), b.complex().level(u).dim(n), src.cols())
                };
                let m = b.coords(r, p, n, u, &img).ok_or_else(|| {
                    MvssError::invariant(format!("image of page {r} entry p={p} n={n} leaves the target subquotient"))
                })?;
                per_t.push(m);
            }
            page.insert((p, n), per_t);
        }
        pages.push(page);
    }
    Ok(PageMorphism { targets: f.targets.clone(), start: 0, pages })
}

/// Extend a morphism given on its last page to the next page by passing
/// to homology with respect to `d_r`.
pub fn advance<R: Real>(a: &SpectralSequence<R>, b: &SpectralSequence<R>, m: &PageMorphism) -> Result<PageMorphism> {
    let r = m.last_page();
    let g = a.complex().grid().len();
    let field = a.field();
    let mut page = BTreeMap::new();
    for (p, n) in union_keys(a, b) {
        let mut per_t = Vec::with_capacity(g);
        for t in 0..g {
            let u = m.targets[t];
            let rows_next = b.quotient(r + 1, p, n, u).map_or(0, |q| q.dim());
            let next_reps = a.reps(r + 1, p, n, t);
            if next_reps.cols() == 0 || rows_next == 0 {
                per_t.push(Matrix::zeros(field, rows_next, next_reps.cols()));
                continue;
            }
            let cur = a
                .coords(r, p, n, t, &next_reps)
                .ok_or_else(|| MvssError::invariant("next-page representatives are not current-page classes"))?;
            let mapped = m.matrix(a, b, r, p, n, t).mul(&cur);
            let vecs = b.reps(r, p, n, u).mul(&mapped);
            let zq = b.quotient(r + 1, p, n, u).expect("nonzero entry");
            let dq = b.quotient(r, p, n, u).expect("nonzero entry");
            let z = zq.den().sum(&Subspace::from_independent(zq.reps().clone()));
            let joined = Matrix::hstack(field, vecs.rows(), &[z.basis(), dq.den().basis()]);
            let sol = joined.solve(&vecs).ok_or_else(|| {
                MvssError::invariant(format!(
                    "page {r} morphism does not send d_r-cycles to d_r-cycles at p={p} n={n}, grid index {t}"
                ))
            })?;
            let zpart = z.basis().mul(&sol.select_rows(&(0..z.dim()).collect::<Vec<_>>()));
            let c = zq
                .coords(&zpart)
                .ok_or_else(|| MvssError::invariant("lift did not land in the next page"))?;
            per_t.push(c);
        }
        page.insert((p, n), per_t);
    }
    let mut out = m.clone();
    out.pages.push(page);
    Ok(out)
}

/// Extend until page `r`.
pub fn advance_to<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    m: &PageMorphism,
    r: usize,
) -> Result<PageMorphism> {
    let mut out = m.clone();
    while out.last_page() < r {
        out = advance(a, b, &out)?;
    }
    Ok(out)
}

/// Postcompose with entry structure maps of `b` so that targets become `new_targets`.
pub fn push_targets<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    m: &PageMorphism,
    new_targets: &[usize],
) -> Result<PageMorphism> {
    let mut out = m.clone();
    for (t, (&u, &v)) in m.targets.iter().zip(new_targets).enumerate() {
        if v < u {
            return Err(MvssError::hypothesis(format!(
                "morphism lands at grid index {u} beyond the allowed index {v} (source index {t})"
            )));
        }
    }
    for (i, page) in out.pages.iter_mut().enumerate() {
        let r = m.start + i;
        for ((p, n), per_t) in page.iter_mut() {
            for t in 0..per_t.len() {
                let s = b.entry_map(r, *p, *n, m.targets[t], new_targets[t]);
                if s.cols() == per_t[t].rows() {
                    per_t[t] = s.mul(&per_t[t]);
                } else {
                    let cols = a.quotient(r, *p, *n, t).map_or(0, |q| q.dim());
                    per_t[t] = Matrix::zeros(a.field(), s.rows(), cols);
                }
            }
        }
    }
    out.targets = new_targets.to_vec();
    Ok(out)
}

/// `first` followed by `second`, on the pages both define.
pub fn compose_morphisms<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    c: &SpectralSequence<R>,
    first: &PageMorphism,
    second: &PageMorphism,
) -> PageMorphism {
    let start = first.start.max(second.start);
    let last = first.last_page().min(second.last_page());
    let targets: Vec<usize> = first.targets.iter().map(|&u| second.targets[u]).collect();
    let mut pages = Vec::new();
    for r in start..=last {
        let mut page = BTreeMap::new();
        for (p, n) in union_keys(a, c) {
            let per_t = (0..first.targets.len())
                .map(|t| {
                    let u = first.targets[t];
                    second.matrix(b, c, r, p, n, u).mul(&first.matrix(a, b, r, p, n, t))
                })
                .collect();
            page.insert((p, n), per_t);
        }
        pages.push(page);
    }
    PageMorphism { targets, start, pages }
}

/// Result of an interleaving check.
#[derive(Debug, Clone, PartialEq)]
pub struct PageInterleavingReport<R = f64> {
    pub eps: R,
    pub from_page: usize,
    pub pages_checked: Vec<usize>,
    pub stabilization_page: usize,
    pub failure: Option<String>,
}

impl<R> PageInterleavingReport<R> {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

fn check_natural_pages<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    m: &PageMorphism,
    r: usize,
    name: &str,
) -> std::result::Result<(), String> {
    let g = a.complex().grid().len();
    for (p, n) in union_keys(a, b) {
        for t in 0..g {
            let mt = m.matrix(a, b, r, p, n, t);
            if t + 1 < g {
                let lhs = m.matrix(a, b, r, p, n, t + 1).mul(&a.entry_map(r, p, n, t, t + 1));
                let rhs = b.entry_map(r, p, n, m.targets[t], m.targets[t + 1]).mul(&mt);
                if !same_or_empty(&lhs, &rhs) {
                    return Err(format!("{name} does not commute with shifts on page {r}, p={p}, n={n}, grid index {t}"));
                }
            }
            if n >= 1 {
                let lhs = b.differential(r, p, n, m.targets[t]).mul(&mt);
                let rhs = m.matrix(a, b, r, p - r as i64, n - 1, t).mul(&a.differential(r, p, n, t));
                if !same_or_empty(&lhs, &rhs) {
                    return Err(format!("{name} does not commute with d_{r} at p={p}, n={n}, grid index {t}"));
                }
            }
        }
    }
    Ok(())
}

fn same_or_empty(x: &Matrix, y: &Matrix) -> bool {
    if x.rows() * x.cols() == 0 && y.rows() * y.cols() == 0 {
        return true;
    }
    x == y
}

fn check_round_trip<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    there: &PageMorphism,
    back: &PageMorphism,
    r: usize,
    name: &str,
) -> std::result::Result<(), String> {
    let g = a.complex().grid().len();
    for (p, n) in union_keys(a, b) {
        for t in 0..g {
            let u = there.targets[t];
            let w = back.targets[u];
            let comp = back.matrix(b, a, r, p, n, u).mul(&there.matrix(a, b, r, p, n, t));
            let shift = a.entry_map(r, p, n, t, w);
            if !same_or_empty(&comp, &shift) {
                return Err(format!("{name} differs from the shift on page {r}, p={p}, n={n}, grid index {t}"));
            }
        }
    }
    Ok(())
}

/// Verify an `(eps, n)`-interleaving between `a` and `b` given by
/// `psi: a → b` and `phi: b → a`, each landing no later than the snapped
/// `eps`-shift, on every page from `from_page` to stabilization.
pub fn check_page_interleaving<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    psi: &PageMorphism,
    phi: &PageMorphism,
    eps: R,
    from_page: usize,
) -> PageInterleavingReport<R> {
    let stabilization_page = a.stable_page().max(b.stable_page());
    let mut report = PageInterleavingReport {
        eps,
        from_page,
        pages_checked: Vec::new(),
        stabilization_page,
        failure: None,
    };
    let result = (|| -> std::result::Result<(), String> {
        if psi.start > from_page || phi.start > from_page {
            return Err(format!("morphisms are not defined from page {from_page}"));
        }
        let grid = a.complex().grid();
        let shifted: Vec<usize> = (0..grid.len()).map(|t| grid.shift_index(t, eps)).collect();
        let last = stabilization_page.max(from_page);
        let psi = advance_to(a, b, psi, last).map_err(|e| e.to_string())?;
        let phi = advance_to(b, a, phi, last).map_err(|e| e.to_string())?;
        let psi = push_targets(a, b, &psi, &shifted).map_err(|e| format!("psi: {e}"))?;
        let phi = push_targets(b, a, &phi, &shifted).map_err(|e| format!("phi: {e}"))?;
        for r in from_page..=last {
            check_natural_pages(a, b, &psi, r, "psi")?;
            check_natural_pages(b, a, &phi, r, "phi")?;
            check_round_trip(a, b, &psi, &phi, r, "phi after psi")?;
            check_round_trip(b, a, &phi, &psi, r, "psi after phi")?;
            report.pages_checked.push(r);
        }
        Ok(())
    })();
    report.failure = result.err();
    report
}

/// Identity morphism of a spectral sequence on pages `0..=r_max`.
pub fn identity_morphism<R: Real>(a: &SpectralSequence<R>, r_max: usize) -> PageMorphism {
    induced_page_morphism(a, a, &ChainMapFamily::identity(a.complex()), r_max).expect("identity is a chain map")
}

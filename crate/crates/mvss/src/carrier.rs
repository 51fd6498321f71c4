//! Acyclic carriers between filtered complexes and the chain maps and
//! homotopies they carry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::bottleneck::bottleneck;
use crate::complex::{build_cubical, build_vietoris_rips, euclidean, CellLabel, Cube, FilteredComplex, SubComplex};
use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix};
use crate::grid::{Grid, Real};
use crate::interleaving::{verify_interleaving, ShiftedMorphism};
use crate::persistence::{compute_ph, homology_module, homology_quotient};

/// Assigns to each source cell alive at grid index `t` a face-closed set
/// of target cells alive at `targets[t]`.
#[derive(Debug, Clone)]
pub struct Carrier<R = f64> {
    source: FilteredComplex<R>,
    target: FilteredComplex<R>,
    eps: R,
    targets: Vec<usize>,
    assign: Vec<BTreeMap<usize, SubComplex>>,
    degrees: usize,
}

/// First place where a carrier fails to be acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicFailure {
    pub cell: usize,
    pub grid_index: usize,
    /// `None` when the assignment is empty.
    pub degree: Option<usize>,
}

impl fmt::Display for AcyclicFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.degree {
            Some(d) => write!(
                f,
                "carrier of cell {} at grid index {} has reduced homology in degree {d}",
                self.cell, self.grid_index
            ),
            None => write!(f, "carrier of cell {} at grid index {} is empty", self.cell, self.grid_index),
        }
    }
}

impl From<AcyclicFailure> for MvssError {
    fn from(e: AcyclicFailure) -> Self {
        MvssError::hypothesis(e.to_string())
    }
}

fn same_grid<R: Real>(a: &Grid<R>, b: &Grid<R>) -> bool {
    a.len() == b.len() && a.values().iter().zip(b.values()).all(|(x, y)| (*x - *y).abs() <= R::snap_tolerance())
}

impl<R: Real> Carrier<R> {
    /// Validate liveness, face closure, semicontinuity and time coherence.
    pub fn new(
        source: FilteredComplex<R>,
        target: FilteredComplex<R>,
        eps: R,
        assign: Vec<BTreeMap<usize, SubComplex>>,
    ) -> Result<Self> {
        if !same_grid(source.grid(), target.grid()) {
            return Err(MvssError::input("carrier source and target must share a grid"));
        }
        if eps < R::zero() {
            return Err(MvssError::input("carrier shift must be nonnegative"));
        }
        let targets = (0..source.grid().len()).map(|t| source.grid().shift_index(t, eps)).collect();
        Self::with_targets(source, target, eps, targets, assign)
    }

    fn with_targets(
        source: FilteredComplex<R>,
        target: FilteredComplex<R>,
        eps: R,
        targets: Vec<usize>,
        assign: Vec<BTreeMap<usize, SubComplex>>,
    ) -> Result<Self> {
        let degrees = source.max_dim().unwrap_or(0);
        let c = Self { source, target, eps, targets, assign, degrees };
        c.validate()?;
        Ok(c)
    }

    /// Build by closing `seeds(t, cell)` under faces.
    pub fn from_fn(
        source: FilteredComplex<R>,
        target: FilteredComplex<R>,
        eps: R,
        seeds: impl Fn(usize, usize) -> Vec<usize>,
    ) -> Result<Self> {
        let g = source.grid().len();
        let mut assign = Vec::with_capacity(g);
        for t in 0..g {
            let mut m = BTreeMap::new();
            for c in 0..source.len() {
                if source.cell(c).birth <= t {
                    m.insert(c, target.closure(seeds(t, c))?);
                }
            }
            assign.push(m);
        }
        Self::new(source, target, eps, assign)
    }

    /// `c ↦ closure(c)` on the same complex.
    pub fn identity(x: &FilteredComplex<R>) -> Self {
        Self::shift(x, R::zero())
    }

    /// `c ↦ closure(c)`, evaluated `eps` later.
    pub fn shift(x: &FilteredComplex<R>, eps: R) -> Self {
        Self::from_fn(x.clone(), x.clone(), eps, |_, c| vec![c]).expect("closures form a valid carrier")
    }

    /// Require acyclicity only through degree `d`.
    pub fn with_degrees(mut self, d: usize) -> Self {
        self.degrees = d;
        self
    }

    pub fn source(&self) -> &FilteredComplex<R> {
        &self.source
    }

    pub fn target(&self) -> &FilteredComplex<R> {
        &self.target
    }

    pub fn eps(&self) -> R {
        self.eps
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn degrees(&self) -> usize {
        self.degrees
    }

    pub fn assigned(&self, t: usize, c: usize) -> &SubComplex {
        &self.assign[t][&c]
    }

    pub fn assignments(&self) -> &[BTreeMap<usize, SubComplex>] {
        &self.assign
    }

    pub fn assignments_mut(&mut self) -> &mut [BTreeMap<usize, SubComplex>] {
        &mut self.assign
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.source.grid().len();
        if self.assign.len() != g || self.targets.len() != g {
            return Err(MvssError::input("carrier needs one assignment per grid index"));
        }
        let below = self.source.face_order();
        for t in 0..g {
            let u = self.targets[t];
            if u < t || (t > 0 && u < self.targets[t - 1]) {
                return Err(MvssError::input(format!("carrier targets are not monotone at grid index {t}")));
            }
            for c in 0..self.source.len() {
                let alive = self.source.cell(c).birth <= t;
                let Some(set) = self.assign[t].get(&c) else {
                    if alive {
                        return Err(MvssError::input(format!("cell {c} has no assignment at grid index {t}")));
                    }
                    continue;
                };
                if !alive {
                    return Err(MvssError::input(format!("cell {c} is assigned before it is born")));
                }
                if let Some(&bad) = set.members().iter().find(|&&y| y >= self.target.len()) {
                    return Err(MvssError::input(format!("carrier of cell {c} references unknown cell {bad}")));
                }
                if let Some(&late) = set.members().iter().find(|&&y| self.target.cell(y).birth > u) {
                    return Err(MvssError::invariant(format!(
                        "carrier of cell {c} at grid index {t} uses cell {late} born after grid index {u}"
                    )));
                }
                if !self.target.is_closed(set) {
                    return Err(MvssError::invariant(format!("carrier of cell {c} at grid index {t} is not face closed")));
                }
                for &f in &below[c] {
                    if !self.assign[t][&f].is_subset(set) {
                        return Err(MvssError::invariant(format!(
                            "semicontinuity fails: face {f} of cell {c} at grid index {t}"
                        )));
                    }
                }
                if t > 0 {
                    if let Some(prev) = self.assign[t - 1].get(&c) {
                        if !prev.is_subset(set) {
                            return Err(MvssError::invariant(format!(
                                "carrier of cell {c} shrinks between grid indices {} and {t}",
                                t - 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Check that every assignment contains the closure of its own cell,
    /// for carriers that should carry the standard shift.
    pub fn carries_shift(&self) -> std::result::Result<(), (usize, usize)> {
        for (t, m) in self.assign.iter().enumerate() {
            for (&c, set) in m {
                if !set.contains(c) {
                    return Err((c, t));
                }
            }
        }
        Ok(())
    }
}

/// Reduced Betti numbers of a face-closed set of cells, degrees `0..=top`.
pub fn reduced_betti<R: Real>(complex: &FilteredComplex<R>, set: &SubComplex, top: usize) -> Vec<usize> {
    let f = complex.field();
    let by_dim: Vec<Vec<usize>> = (0..=top + 1)
        .map(|d| set.members().iter().copied().filter(|&c| complex.cell(c).dim == d).collect())
        .collect();
    let ranks: Vec<usize> = (0..=top + 1)
        .map(|d| {
            if d == 0 || by_dim[d].is_empty() {
                return 0;
            }
            let pos: BTreeMap<usize, usize> = by_dim[d - 1].iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let cols: Vec<Vec<(usize, u32)>> = by_dim[d]
                .iter()
                .map(|&c| complex.cell(c).boundary.iter().map(|&(x, v)| (pos[&x], v)).collect())
                .collect();
            Matrix::from_sparse_columns(f, by_dim[d - 1].len(), &cols).rank()
        })
        .collect();
    (0..=top)
        .map(|d| {
            let b = by_dim[d].len() - ranks[d] - ranks[d + 1];
            if d == 0 {
                b.saturating_sub(1)
            } else {
                b
            }
        })
        .collect()
}

/// Summary of a successful acyclicity certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicReport {
    pub assignments_checked: usize,
    pub degrees: usize,
}

/// Certify that every assignment is nonempty with vanishing reduced
/// homology through the carrier's degree bound.
pub fn check_acyclic<R: Real>(carrier: &Carrier<R>) -> std::result::Result<AcyclicReport, AcyclicFailure> {
    let jobs: Vec<(usize, usize)> =
        carrier.assign.iter().enumerate().flat_map(|(t, m)| m.keys().map(move |&c| (t, c))).collect();
    let mut failures: Vec<AcyclicFailure> = jobs
        .par_iter()
        .filter_map(|&(t, c)| {
            let set = &carrier.assign[t][&c];
            if set.is_empty() {
                return Some(AcyclicFailure { cell: c, grid_index: t, degree: None });
            }
            let betti = reduced_betti(&carrier.target, set, carrier.degrees);
            betti.iter().position(|&b| b != 0).map(|d| AcyclicFailure { cell: c, grid_index: t, degree: Some(d) })
        })
        .collect();
    failures.sort_by_key(|f| (f.grid_index, f.cell, f.degree));
    match failures.into_iter().next() {
        Some(f) => Err(f),
        None => Ok(AcyclicReport { assignments_checked: jobs.len(), degrees: carrier.degrees }),
    }
}

/// `second ∘ first`: union of the images under `second` of the cells
/// assigned by `first`. Acyclicity is not asserted.
pub fn compose<R: Real>(first: &Carrier<R>, second: &Carrier<R>) -> Result<Carrier<R>> {
    if first.target.len() != second.source.len() || !same_grid(first.target.grid(), second.source.grid()) {
        return Err(MvssError::input("carriers are not composable"));
    }
    let targets: Vec<usize> = first.targets.iter().map(|&u| second.targets[u]).collect();
    let assign = first
        .assign
        .iter()
        .enumerate()
        .map(|(t, m)| {
            let u = first.targets[t];
            m.iter()
                .map(|(&c, set)| {
                    let mut acc = BTreeSet::new();
                    for &y in set.members() {
                        acc.extend(second.assign[u][&y].members().iter().copied());
                    }
                    (c, SubComplex::from_ids(acc))
                })
                .collect()
        })
        .collect();
    let mut out = Carrier::with_targets(
        first.source.clone(),
        second.target.clone(),
        first.eps + second.eps,
        targets,
        assign,
    )?;
    out.degrees = first.degrees.min(second.degrees);
    Ok(out)
}

/// First `(cell, grid index)` where `small` assigns something outside `big`.
pub fn contained_in<R: Real>(small: &Carrier<R>, big: &Carrier<R>) -> std::result::Result<(), (usize, usize)> {
    for (t, m) in small.assign.iter().enumerate() {
        for (&c, set) in m {
            match big.assign[t].get(&c) {
                Some(b) if set.is_subset(b) => {}
                _ => return Err((c, t)),
            }
        }
    }
    Ok(())
}

/// A chain-level family given by one target chain per source cell, defined
/// at the cell's birth and reused at all later grid indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CellImages {
    pub images: Vec<Vec<(usize, u32)>>,
}

impl CellImages {
    /// Matrix `C_n(source) → C_m(target)` over all cells, in dimension slots.
    pub fn matrix<R: Real>(
        &self,
        source: &FilteredComplex<R>,
        target: &FilteredComplex<R>,
        n: usize,
        m: usize,
    ) -> Matrix {
        let f = source.field();
        let mut out = Matrix::zeros(f, target.count_dim(m), source.count_dim(n));
        for (j, &c) in source.cells_of_dim(n).iter().enumerate() {
            for &(y, v) in &self.images[c] {
                out.add_at(target.slot(y), j, v);
            }
        }
        out
    }
}

fn add_into(f: FieldSpec, acc: &mut BTreeMap<usize, u32>, chain: &[(usize, u32)], coeff: u32) {
    for &(y, v) in chain {
        let e = acc.entry(y).or_insert(0);
        *e = f.add(*e, f.mul(coeff, v));
    }
}

fn nonzero(acc: BTreeMap<usize, u32>) -> Vec<(usize, u32)> {
    acc.into_iter().filter(|e| e.1 != 0).collect()
}

fn synthesis_order<R: Real>(x: &FilteredComplex<R>) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..x.len()).collect();
    ids.sort_by_key(|&c| (x.cell(c).birth, x.cell(c).dim, c));
    ids
}

/// Solve `∂x = z` with `x` supported on the `dim`-cells of `set`.
fn solve_in<R: Real>(
    y: &FilteredComplex<R>,
    set: &SubComplex,
    dim: usize,
    z: &BTreeMap<usize, u32>,
    twist: u64,
) -> Option<Vec<(usize, u32)>> {
    let f = y.field();
    let cols: Vec<usize> = set.members().iter().copied().filter(|&c| y.cell(c).dim == dim).collect();
    let rows: Vec<usize> = set.members().iter().copied().filter(|&c| y.cell(c).dim + 1 == dim).collect();
    let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut rhs = Matrix::zeros(f, rows.len(), 1);
    for (&c, &v) in z {
        if v == 0 {
            continue;
        }
        rhs.set(*pos.get(&c)?, 0, v);
    }
    let a = Matrix::from_sparse_columns(
        f,
        rows.len(),
        &cols.iter().map(|&c| y.cell(c).boundary.iter().map(|&(x, v)| (pos[&x], v)).collect()).collect::<Vec<_>>(),
    );
    let mut x = a.solve(&rhs)?;
    if twist != 0 {
        let k = a.kernel();
        if k.cols() > 0 {
            let j = (twist as usize - 1) % k.cols();
            for i in 0..x.rows() {
                x.set(i, 0, f.add(x.get(i, 0), k.get(i, j)));
            }
        }
    }
    Some((0..cols.len()).filter(|&i| x.get(i, 0) != 0).map(|i| (cols[i], x.get(i, 0))).collect())
}

/// Chain map carried by an acyclic carrier. Cells are processed grid index
/// first, then by dimension; each new image solves `∂h = f(∂c)` inside the
/// cell's carrier.
pub fn synthesize_chain_map<R: Real>(carrier: &Carrier<R>) -> Result<CellImages> {
    synthesize_chain_map_with(carrier, 0)
}

/// As [`synthesize_chain_map`], with `choice` selecting among the valid
/// vertex images and adding kernel elements, so that different choices give
/// different (but homotopic) maps.
pub fn synthesize_chain_map_with<R: Real>(carrier: &Carrier<R>, choice: u64) -> Result<CellImages> {
    let (x, y) = (&carrier.source, &carrier.target);
    let f = x.field();
    let mut images: Vec<Vec<(usize, u32)>> = vec![Vec::new(); x.len()];
    for c in synthesis_order(x) {
        let t = x.cell(c).birth;
        let set = carrier.assigned(t, c);
        let dim = x.cell(c).dim;
        if dim == 0 {
            let verts: Vec<usize> = set.members().iter().copied().filter(|&v| y.cell(v).dim == 0).collect();
            if verts.is_empty() {
                return Err(AcyclicFailure { cell: c, grid_index: t, degree: None }.into());
            }
            let pick = if choice == 0 { 0 } else { (choice.wrapping_mul(c as u64 + 7) % verts.len() as u64) as usize };
            images[c] = vec![(verts[pick], 1)];
            continue;
        }
        let mut z = BTreeMap::new();
        for &(face, v) in &x.cell(c).boundary {
            add_into(f, &mut z, &images[face], v);
        }
        let twist = if choice == 0 { 0 } else { choice.wrapping_add(c as u64) };
        images[c] = solve_in(y, set, dim, &z, twist)
            .ok_or(AcyclicFailure { cell: c, grid_index: t, degree: Some(dim - 1) })?;
    }
    Ok(CellImages { images })
}

/// `∂f = f∂` over all cells.
pub fn verify_chain_map<R: Real>(carrier: &Carrier<R>, map: &CellImages) -> std::result::Result<(), String> {
    let (x, y) = (&carrier.source, &carrier.target);
    let f = x.field();
    for c in 0..x.len() {
        if map.images[c].iter().any(|&(e, _)| y.cell(e).dim != x.cell(c).dim) {
            return Err(format!("image of cell {c} has the wrong dimension"));
        }
        let mut lhs = BTreeMap::new();
        for &(e, v) in &map.images[c] {
            add_into(f, &mut lhs, &y.cell(e).boundary, v);
        }
        let mut rhs = BTreeMap::new();
        for &(face, v) in &x.cell(c).boundary {
            add_into(f, &mut rhs, &map.images[face], v);
        }
        if nonzero(lhs) != nonzero(rhs) {
            return Err(format!("boundary of the image of cell {c} differs from the image of its boundary"));
        }
    }
    Ok(())
}

/// Every image lies in the carrier of its cell at the cell's birth.
pub fn verify_carried<R: Real>(carrier: &Carrier<R>, images: &CellImages) -> std::result::Result<(), String> {
    for c in 0..carrier.source.len() {
        let set = carrier.assigned(carrier.source.cell(c).birth, c);
        if let Some(&(e, _)) = images.images[c].iter().find(|(e, _)| !set.contains(*e)) {
            return Err(format!("image of cell {c} uses cell {e} outside its carrier"));
        }
    }
    Ok(())
}

/// Chain homotopy `h` with `∂h + h∂ = g − f`, built through the carrier's
/// degree bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Homotopy {
    pub images: CellImages,
    pub through: usize,
}

pub fn synthesize_homotopy<R: Real>(carrier: &Carrier<R>, f_map: &CellImages, g_map: &CellImages) -> Result<Homotopy> {
    let (x, y) = (&carrier.source, &carrier.target);
    let f = x.field();
    let through = carrier.degrees;
    let mut images: Vec<Vec<(usize, u32)>> = vec![Vec::new(); x.len()];
    for c in synthesis_order(x) {
        let dim = x.cell(c).dim;
        if dim > through {
            continue;
        }
        let t = x.cell(c).birth;
        let mut z = BTreeMap::new();
        add_into(f, &mut z, &g_map.images[c], 1);
        add_into(f, &mut z, &f_map.images[c], f.neg(1));
        for &(face, v) in &x.cell(c).boundary {
            add_into(f, &mut z, &images[face], f.neg(v));
        }
        let z: BTreeMap<usize, u32> = z.into_iter().filter(|e| e.1 != 0).collect();
        if z.is_empty() {
            continue;
        }
        images[c] = solve_in(y, carrier.assigned(t, c), dim + 1, &z, 0)
            .ok_or(AcyclicFailure { cell: c, grid_index: t, degree: Some(dim) })?;
    }
    Ok(Homotopy { images: CellImages { images }, through })
}

/// `∂h + h∂ = g − f` on every cell up to the homotopy's degree bound, with
/// `h` carried.
pub fn verify_homotopy<R: Real>(
    carrier: &Carrier<R>,
    f_map: &CellImages,
    g_map: &CellImages,
    h: &Homotopy,
) -> std::result::Result<(), String> {
    let (x, y) = (&carrier.source, &carrier.target);
    let f = x.field();
    verify_carried(carrier, &h.images)?;
    for c in 0..x.len() {
        if x.cell(c).dim > h.through {
            continue;
        }
        let mut lhs = BTreeMap::new();
        for &(e, v) in &h.images.images[c] {
            add_into(f, &mut lhs, &y.cell(e).boundary, v);
        }
        for &(face, v) in &x.cell(c).boundary {
            add_into(f, &mut lhs, &h.images.images[face], v);
        }
        let mut rhs = BTreeMap::new();
        add_into(f, &mut rhs, &g_map.images[c], 1);
        add_into(f, &mut rhs, &f_map.images[c], f.neg(1));
        if nonzero(lhs) != nonzero(rhs) {
            return Err(format!("homotopy identity fails on cell {c}"));
        }
    }
    Ok(())
}

/// Induced maps `H_n(X_t) → H_n(Y_{targets[t]})` in the bases of
/// [`homology_module`].
pub fn induced_morphism<R: Real>(carrier: &Carrier<R>, map: &CellImages, n: usize) -> ShiftedMorphism {
    let (x, y) = (&carrier.source, &carrier.target);
    let m = map.matrix(x, y, n, n);
    let mats = (0..x.grid().len())
        .map(|t| {
            let qx = homology_quotient(x, n, t);
            let qy = homology_quotient(y, n, carrier.targets[t]);
            qy.coords(&m.mul(qx.reps())).expect("chain maps send cycles to cycles")
        })
        .collect();
    ShiftedMorphism::new(carrier.targets.clone(), mats)
}

/// Ranks `H_n(X_s) → H_n(Y_{targets[t]})` through the map at `t`, `s ≤ t`.
pub fn induced_ranks<R: Real>(carrier: &Carrier<R>, map: &CellImages, n: usize) -> Vec<Vec<usize>> {
    let hx = homology_module(&carrier.source, n);
    let m = induced_morphism(carrier, map, n);
    let g = hx.grid().len();
    (0..g)
        .map(|s| (0..g).map(|t| if t < s { 0 } else { m.mats[t].mul(&hx.structure_map(s, t)).rank() }).collect())
        .collect()
}

/// Carriers both ways together with the two shift carriers.
#[derive(Debug, Clone)]
pub struct EquivalencePack<R = f64> {
    pub f: Carrier<R>,
    pub g: Carrier<R>,
    pub ix: Carrier<R>,
    pub iy: Carrier<R>,
    pub eps: R,
}

/// Result of [`verify_equivalence`].
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate<R = f64> {
    pub eps: R,
    /// `bottleneck(PH_k(X), PH_k(Y))` for `k = 0..=max_dim`.
    pub bottleneck: Vec<R>,
    pub f: CellImages,
    pub g: CellImages,
}

/// Check containments and acyclicity, synthesize both chain maps, verify
/// that their induced maps interleave, and compare barcodes.
pub fn verify_equivalence<R: Real>(pack: &EquivalencePack<R>, max_dim: usize) -> Result<EquivalenceCertificate<R>> {
    let gf = compose(&pack.f, &pack.g)?;
    let fg = compose(&pack.g, &pack.f)?;
    contained_in(&gf, &pack.ix).map_err(|(c, t)| {
        MvssError::hypothesis(format!("G∘F is not contained in the X shift carrier at cell {c}, grid index {t}"))
    })?;
    contained_in(&fg, &pack.iy).map_err(|(c, t)| {
        MvssError::hypothesis(format!("F∘G is not contained in the Y shift carrier at cell {c}, grid index {t}"))
    })?;
    for (name, shift) in [("X", &pack.ix), ("Y", &pack.iy)] {
        shift.carries_shift().map_err(|(c, t)| {
            MvssError::hypothesis(format!("{name} shift carrier misses cell {c} itself at grid index {t}"))
        })?;
    }
    for (name, c) in [("F", &pack.f), ("G", &pack.g), ("I_X", &pack.ix), ("I_Y", &pack.iy)] {
        check_acyclic(c).map_err(|e| MvssError::hypothesis(format!("{name}: {e}")))?;
    }
    let f = synthesize_chain_map(&pack.f)?;
    let g = synthesize_chain_map(&pack.g)?;
    for (name, c, m) in [("F", &pack.f, &f), ("G", &pack.g, &g)] {
        verify_chain_map(c, m).map_err(|e| MvssError::invariant(format!("{name}: {e}")))?;
        verify_carried(c, m).map_err(|e| MvssError::invariant(format!("{name}: {e}")))?;
    }
    let top = max_dim.min(pack.f.degrees).min(pack.g.degrees);
    let (x, y) = (pack.f.source(), pack.f.target());
    let px = compute_ph(x, top);
    let py = compute_ph(y, top);
    let mut dists = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let hx = homology_module(x, k);
        let hy = homology_module(y, k);
        let psi = induced_morphism(&pack.f, &f, k);
        let phi = induced_morphism(&pack.g, &g, k);
        verify_interleaving(&hx, &hy, &psi, &phi)
            .map_err(|e| MvssError::invariant(format!("degree {k}: induced maps do not interleave: {e}")))?;
        let d = bottleneck(&px[k], &py[k]);
        if d > pack.eps + R::snap_tolerance() {
            return Err(MvssError::invariant(format!("degree {k}: bottleneck distance exceeds the certified shift")));
        }
        dists.push(d);
    }
    Ok(EquivalenceCertificate { eps: pack.eps, bottleneck: dists, f, g })
}

/// Hausdorff distance between two finite clouds.
pub fn hausdorff<R: Real>(x: &[Vec<R>], y: &[Vec<R>]) -> R {
    let one_way = |a: &[Vec<R>], b: &[Vec<R>]| {
        a.iter()
            .map(|p| b.iter().map(|q| euclidean(p, q)).fold(R::infinity(), R::min))
            .fold(R::zero(), R::max)
    };
    one_way(x, y).max(one_way(y, x))
}

fn simplices_on<R: Real>(k: &FilteredComplex<R>, verts: &[usize], max_dim: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let n = verts.len();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((start, cur)) = stack.pop() {
        if !cur.is_empty() {
            if let Some(id) = k.find_label(&CellLabel::Simplex(cur.clone())) {
                out.push(id);
            }
        }
        if cur.len() > max_dim {
            continue;
        }
        for i in start..n {
            let mut next = cur.clone();
            next.push(verts[i]);
            stack.push((i + 1, next));
        }
    }
    out
}

fn vertex_list<R: Real>(k: &FilteredComplex<R>, c: usize) -> Vec<usize> {
    match &k.cell(c).label {
        Some(CellLabel::Simplex(v)) => v.clone(),
        _ => unreachable!("Vietoris-Rips cells carry simplex labels"),
    }
}

/// Vietoris-Rips complexes of both clouds on a shared grid with the
/// example carriers of a Hausdorff matching. Simplices go up to `max_dim`,
/// so acyclicity is required through degree `max_dim - 1`.
pub fn vr_carrier<R: Real>(
    x: &[Vec<R>],
    y: &[Vec<R>],
    max_dim: usize,
    field: FieldSpec,
) -> Result<EquivalencePack<R>> {
    if x.is_empty() || y.is_empty() {
        return Err(MvssError::input("point clouds must be nonempty"));
    }
    let dh = hausdorff(x, y);
    let eps = dh + dh;
    let mut values = vec![R::zero()];
    for cloud in [x, y] {
        for i in 0..cloud.len() {
            for j in i + 1..cloud.len() {
                values.push(euclidean(&cloud[i], &cloud[j]));
            }
        }
    }
    let base = values.clone();
    for v in base {
        values.push(v + eps);
        values.push(v + eps + eps);
    }
    let grid = Grid::from_unsorted(values)?;
    let kx = build_vietoris_rips(x, max_dim, field, grid.clone())?;
    let ky = build_vietoris_rips(y, max_dim, field, grid)?;
    let near = |src: &[Vec<R>], dst: &[Vec<R>], verts: &[usize], r: R| -> Vec<usize> {
        let tol = R::snap_tolerance() * (R::one() + r);
        (0..dst.len())
            .filter(|&j| verts.iter().any(|&i| euclidean(&src[i], &dst[j]) <= r + tol))
            .collect()
    };
    let carrier = |src_k: &FilteredComplex<R>,
                   dst_k: &FilteredComplex<R>,
                   src: &[Vec<R>],
                   dst: &[Vec<R>],
                   r: R,
                   shift: R|
     -> Result<Carrier<R>> {
        let seeds: Vec<Vec<usize>> = (0..src_k.len())
            .map(|c| simplices_on(dst_k, &near(src, dst, &vertex_list(src_k, c), r), max_dim))
            .collect();
        Ok(Carrier::from_fn(src_k.clone(), dst_k.clone(), shift, |_, c| seeds[c].clone())?
            .with_degrees(max_dim.saturating_sub(1)))
    };
    let f = carrier(&kx, &ky, x, y, dh, eps)?;
    let g = carrier(&ky, &kx, y, x, dh, eps)?;
    let ix = carrier(&kx, &kx, x, x, eps, eps + eps)?;
    let iy = carrier(&ky, &ky, y, y, eps, eps + eps)?;
    Ok(EquivalencePack { f, g, ix, iy, eps })
}

/// Lower-star cubical complexes of a function on the lattices `Z^N` and
/// `rZ^N + l` over a window, with the example carriers.
#[derive(Debug, Clone)]
pub struct LatticePack<R = f64> {
    pub pack: EquivalencePack<R>,
    /// `L · (1 + max r)` for the Lipschitz constant supplied.
    pub lipschitz_bound: R,
}

struct Lattice<R> {
    scale: Vec<R>,
    offset: Vec<R>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl<R: Real> Lattice<R> {
    fn point(&self, k: &[i64]) -> Vec<R> {
        k.iter().enumerate().map(|(i, &ki)| self.scale[i] * R::from_f64(ki as f64) + self.offset[i]).collect()
    }

    fn cubes(&self) -> Vec<Cube> {
        let mut out: Vec<Cube> = vec![Vec::new()];
        for i in 0..self.lo.len() {
            let mut next = Vec::new();
            for c in &out {
                for k in self.lo[i]..=self.hi[i] {
                    let mut v = c.clone();
                    v.push((k, k));
                    next.push(v.clone());
                    if k < self.hi[i] {
                        let mut e = c.clone();
                        e.push((k, k + 1));
                        next.push(e);
                    }
                }
            }
            out = next;
        }
        out
    }

    fn corners(cube: &Cube) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = vec![Vec::new()];
        for &(a, b) in cube {
            let mut next = Vec::new();
            for c in &out {
                for k in if a == b { vec![a] } else { vec![a, b] } {
                    let mut v = c.clone();
                    v.push(k);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// Relative interior per coordinate, clamped into the window.
    fn relint(&self, cube: &Cube, window: &[(R, R)]) -> Vec<(R, R)> {
        cube.iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let clamp = |k: i64| {
                    let v = self.scale[i] * R::from_f64(k as f64) + self.offset[i];
                    v.max(window[i].0).min(window[i].1)
                };
                (clamp(a), clamp(b))
            })
            .collect()
    }
}

fn relints_meet<R: Real>(a: &[(R, R)], b: &[(R, R)]) -> bool {
    let tol = R::snap_tolerance();
    a.iter().zip(b).all(|(&(p, q), &(s, u))| {
        let a_point = (q - p).abs() <= tol;
        let b_point = (u - s).abs() <= tol;
        match (a_point, b_point) {
            (true, true) => (p - s).abs() <= tol,
            (true, false) => p > s + tol && p < u - tol,
            (false, true) => s > p + tol && s < q - tol,
            (false, false) => p < u - tol && s < q - tol,
        }
    })
}

/// Carriers between `C(Z^N)` and `C(rZ^N + l)` on the integer window
/// `[lo_i, hi_i]`: a cell goes to the closure of the cells of the other
/// lattice whose relative interiors (clamped to the window) meet its own.
/// The shift is the smallest one making both carriers valid.
pub fn lattice_carrier(
    f: impl Fn(&[f64]) -> f64,
    lipschitz: f64,
    r: &[f64],
    l: &[f64],
    window: &[(i64, i64)],
    field: FieldSpec,
) -> Result<LatticePack<f64>> {
    let n = window.len();
    if r.len() != n || l.len() != n {
        return Err(MvssError::input("window mismatch: scale, offset and window must share a dimension"));
    }
    if r.iter().any(|&ri| !(ri > 0.0 && ri <= 1.0)) {
        return Err(MvssError::input("scales must lie in (0, 1]"));
    }
    if window.iter().any(|&(a, b)| a > b) {
        return Err(MvssError::input("empty window"));
    }
    let coarse = Lattice {
        scale: vec![1.0; n],
        offset: vec![0.0; n],
        lo: window.iter().map(|w| w.0).collect(),
        hi: window.iter().map(|w| w.1).collect(),
    };
    let fine = Lattice {
        scale: r.to_vec(),
        offset: l.to_vec(),
        lo: (0..n).map(|i| ((window[i].0 as f64 - l[i]) / r[i] + 1e-9).floor() as i64).collect(),
        hi: (0..n).map(|i| ((window[i].1 as f64 - l[i]) / r[i] - 1e-9).ceil() as i64).collect(),
    };
    let win: Vec<(f64, f64)> = window.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
    let value = |lat: &Lattice<f64>, cube: &Cube| {
        Lattice::<f64>::corners(cube).iter().map(|k| f(&lat.point(k))).fold(f64::NEG_INFINITY, f64::max)
    };
    let cubes_x = coarse.cubes();
    let cubes_y = fine.cubes();
    let births_x: Vec<f64> = cubes_x.iter().map(|c| value(&coarse, c)).collect();
    let births_y: Vec<f64> = cubes_y.iter().map(|c| value(&fine, c)).collect();
    let ri_x: Vec<Vec<(f64, f64)>> = cubes_x.iter().map(|c| coarse.relint(c, &win)).collect();
    let ri_y: Vec<Vec<(f64, f64)>> = cubes_y.iter().map(|c| fine.relint(c, &win)).collect();
    let meets = |a: &[Vec<(f64, f64)>], b: &[Vec<(f64, f64)>]| -> Vec<Vec<usize>> {
        a.iter().map(|ra| (0..b.len()).filter(|&j| relints_meet(ra, &b[j])).collect()).collect()
    };
    let xy = meets(&ri_x, &ri_y);
    let yx = meets(&ri_y, &ri_x);
    let need = |from: &[f64], to: &[f64], m: &[Vec<usize>]| -> f64 {
        m.iter()
            .enumerate()
            .map(|(i, js)| js.iter().map(|&j| to[j] - from[i]).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    let eps = need(&births_x, &births_y, &xy).max(need(&births_y, &births_x, &yx));
    let eps = (eps * 1e9).round() / 1e9;
    let mut values: Vec<f64> = births_x.iter().chain(&births_y).copied().collect();
    let base = values.clone();
    for v in base {
        values.push(v + eps);
        values.push(v + 2.0 * eps);
    }
    let grid = Grid::from_unsorted(values)?;
    let with_births = |cubes: &[Cube], births: &[f64]| -> Result<FilteredComplex<f64>> {
        let listed: Vec<(Cube, f64)> = cubes.iter().cloned().zip(births.iter().copied()).collect();
        build_cubical(&listed, field, grid.clone())
    };
    let kx = with_births(&cubes_x, &births_x)?;
    let ky = with_births(&cubes_y, &births_y)?;
    let ids = |k: &FilteredComplex<f64>, cubes: &[Cube]| -> Vec<usize> {
        cubes.iter().map(|c| k.find_label(&CellLabel::Cube(c.clone())).expect("listed cube")).collect()
    };
    let (id_x, id_y) = (ids(&kx, &cubes_x), ids(&ky, &cubes_y));
    let back = |k: &FilteredComplex<f64>, idv: &[usize]| -> Vec<usize> {
        let mut inv = vec![0; k.len()];
        for (i, &c) in idv.iter().enumerate() {
            inv[c] = i;
        }
        inv
    };
    let (inv_x, inv_y) = (back(&kx, &id_x), back(&ky, &id_y));
    let fc = Carrier::from_fn(kx.clone(), ky.clone(), eps, |_, c| xy[inv_x[c]].iter().map(|&j| id_y[j]).collect())?;
    let gc = Carrier::from_fn(ky.clone(), kx.clone(), eps, |_, c| yx[inv_y[c]].iter().map(|&j| id_x[j]).collect())?;
    let ix = compose(&fc, &gc)?;
    let iy = compose(&gc, &fc)?;
    let rmax = r.iter().copied().fold(0.0, f64::max);
    Ok(LatticePack { pack: EquivalencePack { f: fc, g: gc, ix, iy, eps }, lipschitz_bound: lipschitz * (1.0 + rmax) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_simplicial;

    fn triangle_boundary() -> FilteredComplex<f64> {
        build_simplicial(
            &[(vec![0, 1], 0.0), (vec![1, 2], 0.0), (vec![0, 2], 0.0)],
            FieldSpec::f2(),
            Grid::new(vec![0.0]).unwrap(),
            true,
        )
        .unwrap()
    }

    #[test]
    fn circle_carrier_fails_in_degree_one() {
        let k = triangle_boundary();
        let all: Vec<usize> = (0..k.len()).collect();
        let c = Carrier::from_fn(k.clone(), k, 0.0, |_, _| all.clone()).unwrap();
        let err = check_acyclic(&c).unwrap_err();
        assert_eq!(err.degree, Some(1));
    }

    #[test]
    fn identity_synthesis_is_identity() {
        let k = triangle_boundary();
        let c = Carrier::identity(&k);
        let m = synthesize_chain_map(&c).unwrap();
        for (i, img) in m.images.iter().enumerate() {
            assert_eq!(img, &vec![(i, 1)]);
        }
    }
}

//! Comparing the spectral sequences of two covers of one complex:
//! refinement-induced morphisms, the two-cover double complex with
//! persistent-homology coefficients, the θ comparison map, approximate
//! inverses, interpolation local checks and the cover-stability bound.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::bottleneck::bottleneck;
use crate::carrier::{synthesize_chain_map, Carrier, CellImages};
use crate::chain::{ChainMapFamily, GradedLevel, PersistentComplex};
use crate::complex::{FilteredComplex, SubComplex};
use crate::cover::{common_refinement, find_refinement, interpolation, maximal_sets, nerve, Cover, Nerve, RefinementMap};
use crate::diagram::{cover_diagram, realization, Blowup};
use crate::error::{MvssError, Result};
use crate::field::{FieldSpec, Matrix, Quotient, Subspace};
use crate::grid::{Grid, Real};
use crate::interleaving::{cokernel_module, kernel_module, lift_within};
use crate::persistence::{is_eps_trivial, Barcode, PersistenceModule};
use crate::spectral::{
    check_page_interleaving, compose_morphisms, induced_page_morphism, PageInterleavingReport, PageMorphism,
    SpectralSequence,
};

/// The Mayer-Vietoris spectral sequence of one cover, with the data needed
/// to map between covers.
#[derive(Debug, Clone)]
pub struct CoverSequence<R = f64> {
    pub cover: Cover,
    pub nerve: Nerve<R>,
    pub blowup: Blowup<R>,
    pub ss: SpectralSequence<R>,
    members: Vec<Vec<usize>>,
    position: BTreeMap<(usize, usize), usize>,
}

impl<R: Real> CoverSequence<R> {
    /// Barcode of `E^r_{p,q}`.
    pub fn barcode(&self, r: usize, p: i64, q: i64) -> Barcode<R> {
        self.ss.entry_barcode(r, p, q)
    }

    /// Page-`r` entries `(p, q)` with at least one bar.
    pub fn nonzero_entries(&self, r: usize) -> Vec<((i64, i64), Barcode<R>)> {
        entry_pairs(&self.ss)
            .into_iter()
            .map(|(p, q)| ((p, q), self.barcode(r, p, q)))
            .filter(|(_, b)| !b.is_empty())
            .collect()
    }
}

fn entry_pairs<R: Real>(ss: &SpectralSequence<R>) -> Vec<(i64, i64)> {
    let (lo, hi) = ss.p_range();
    let top = ss.top() as i64;
    (lo..=hi).flat_map(|p| (0..=top - p).map(move |q| (p, q))).collect()
}

/// Spectral sequence of `cover`, computed up to stabilization.
pub fn cover_sequence<R: Real>(x: &FilteredComplex<R>, cover: &Cover) -> Result<CoverSequence<R>> {
    let d = cover_diagram(x, cover)?;
    let blowup = realization(&d)?;
    let nv = nerve(x, cover);
    let members = nv.simplices().iter().map(|s| cover.intersection(s).members().to_vec()).collect();
    let position = blowup.cells.iter().enumerate().map(|(i, &sc)| (sc, i)).collect();
    let ss = SpectralSequence::compute(&blowup.persistent(), 2);
    Ok(CoverSequence { cover: cover.clone(), nerve: nv, blowup, ss, members, position })
}

fn permutation_parity(v: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inv += 1;
            }
        }
    }
    inv
}

/// Image of a nerve simplex under a vertex map: sorted vertices and the
/// sign of the sorting permutation, or `None` when vertices collide.
fn oriented_image(assign: &[usize], sigma: &[usize]) -> Option<(Vec<usize>, usize)> {
    let img: Vec<usize> = sigma.iter().map(|&i| assign[i]).collect();
    let mut sorted = img.clone();
    sorted.sort_unstable();
    sorted.dedup();
    (sorted.len() == img.len()).then(|| (sorted, permutation_parity(&img)))
}

/// The chain map of realizations `(σ, c) ↦ ±(ρσ, c)`, zero when `ρ`
/// collapses `σ`.
pub fn refinement_chain_map<R: Real>(
    v: &CoverSequence<R>,
    u: &CoverSequence<R>,
    rho: &RefinementMap,
) -> Result<ChainMapFamily> {
    if rho.assign.len() != v.cover.len() {
        return Err(MvssError::input("refinement map has the wrong number of sets"));
    }
    rho.validate(&v.cover, &u.cover)?;
    let field = v.ss.field();
    let mut image: Vec<Option<(usize, u32)>> = Vec::with_capacity(v.blowup.cells.len());
    for &(s, c) in &v.blowup.cells {
        let Some((sorted, parity)) = oriented_image(&rho.assign, v.nerve.simplex(s)) else {
            image.push(None);
            continue;
        };
        let ts = u
            .nerve
            .find(&sorted)
            .ok_or_else(|| MvssError::invariant(format!("image simplex {sorted:?} is missing from the nerve")))?;
        let g = v.members[s][c];
        let c2 = u.members[ts]
            .binary_search(&g)
            .map_err(|_| MvssError::invariant(format!("cell {g} is not in the image piece")))?;
        image.push(Some((u.position[&(ts, c2)], field.sign(parity))));
    }
    let (a, b) = (v.ss.complex(), u.ss.complex());
    let mats = (0..a.grid().len())
        .map(|t| {
            let (la, lb) = (a.level(t), b.level(t));
            (0..=a.top())
                .map(|n| {
                    let rows: BTreeMap<usize, usize> =
                        lb.tags.get(n).map_or(BTreeMap::new(), |tags| tags.iter().enumerate().map(|(i, &g)| (g, i)).collect());
                    let mut m = Matrix::zeros(field, lb.dim(n), la.dim(n));
                    for (col, &tag) in la.tags[n].iter().enumerate() {
                        if let Some((j, sign)) = image[tag] {
                            m.set(rows[&j], col, sign);
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    Ok(ChainMapFamily { targets: (0..a.grid().len()).collect(), mats })
}

/// Morphism of spectral sequences `E(X, V) → E(X, U)` induced by a
/// refinement map, on pages `0..=2`.
pub fn refinement_ss_morphism<R: Real>(
    v: &CoverSequence<R>,
    u: &CoverSequence<R>,
    rho: &RefinementMap,
) -> Result<PageMorphism> {
    let fam = refinement_chain_map(v, u, rho)?;
    induced_page_morphism(&v.ss, &u.ss, &fam, 2)
}

/// Matrices of a morphism on entry `(p, q)` of page `r`, one per grid index.
pub fn entry_matrices<R: Real>(
    m: &PageMorphism,
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    r: usize,
    p: i64,
    q: i64,
) -> Vec<Matrix> {
    let n = (p + q) as usize;
    (0..a.complex().grid().len()).map(|t| m.matrix(a, b, r, p, n, t)).collect()
}

fn all_entries<R: Real>(a: &SpectralSequence<R>, b: &SpectralSequence<R>) -> Vec<(i64, i64)> {
    let set: BTreeSet<(i64, i64)> = entry_pairs(a).into_iter().chain(entry_pairs(b)).collect();
    set.into_iter().collect()
}

/// Check that every page-`r` matrix is either zero or an identity matrix.
pub fn null_or_identity<R: Real>(
    m: &PageMorphism,
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    r: usize,
) -> std::result::Result<(), String> {
    for (p, q) in all_entries(a, b) {
        for (t, mat) in entry_matrices(m, a, b, r, p, q).iter().enumerate() {
            if !(mat.is_zero() || mat.is_identity()) {
                return Err(format!("entry ({p},{q}) at grid index {t} is neither zero nor the identity"));
            }
        }
    }
    Ok(())
}

/// Compare two morphisms with the same source and target on page `r`.
pub fn same_on_page<R: Real>(
    m1: &PageMorphism,
    m2: &PageMorphism,
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    r: usize,
) -> std::result::Result<(), String> {
    for (p, q) in all_entries(a, b) {
        let x = entry_matrices(m1, a, b, r, p, q);
        let y = entry_matrices(m2, a, b, r, p, q);
        if let Some(t) = (0..x.len()).find(|&t| x[t] != y[t]) {
            return Err(format!("morphisms differ on entry ({p},{q}) at grid index {t}"));
        }
    }
    Ok(())
}

/// Page-2 isomorphism between the sequences of two covers that refine
/// each other.
#[derive(Debug, Clone)]
pub struct MutualIsoCertificate<R = f64> {
    pub there: RefinementMap,
    pub back: RefinementMap,
    /// Common page-2 barcodes of the nonzero entries.
    pub entries: Vec<((i64, i64), Barcode<R>)>,
}

fn is_identity_on_page<R: Real>(m: &PageMorphism, a: &SpectralSequence<R>, r: usize) -> std::result::Result<(), String> {
    for (p, q) in entry_pairs(a) {
        for (t, mat) in entry_matrices(m, a, a, r, p, q).iter().enumerate() {
            if mat.rows() * mat.cols() > 0 && !mat.is_identity() {
                return Err(format!("round trip is not the identity on entry ({p},{q}) at grid index {t}"));
            }
        }
    }
    Ok(())
}

/// Certify that `U ≺ V` and `V ≺ U` induce inverse isomorphisms on page 2.
pub fn mutual_refinement_iso<R: Real>(x: &FilteredComplex<R>, u: &Cover, v: &Cover) -> Result<MutualIsoCertificate<R>> {
    let there = find_refinement(u, v)?;
    let back = find_refinement(v, u)?;
    let a = cover_sequence(x, u)?;
    let b = cover_sequence(x, v)?;
    let m1 = refinement_ss_morphism(&a, &b, &there)?;
    let m2 = refinement_ss_morphism(&b, &a, &back)?;
    is_identity_on_page(&compose_morphisms(&a.ss, &b.ss, &a.ss, &m1, &m2), &a.ss, 2).map_err(MvssError::invariant)?;
    is_identity_on_page(&compose_morphisms(&b.ss, &a.ss, &b.ss, &m2, &m1), &b.ss, 2).map_err(MvssError::invariant)?;
    let mut entries = Vec::new();
    for (p, q) in all_entries(&a.ss, &b.ss) {
        let (ba, bb) = (a.barcode(2, p, q), b.barcode(2, p, q));
        if !ba.same_bars(&bb) {
            return Err(MvssError::invariant(format!("page-2 barcodes differ on entry ({p},{q})")));
        }
        if !ba.is_empty() {
            entries.push(((p, q), ba));
        }
    }
    Ok(MutualIsoCertificate { there, back, entries })
}

/// Homology of a subcomplex of `x` in degree `k` at every grid index,
/// written in coordinates indexed by all `k`-cells of `x`.
pub fn piece_homology<R: Real>(x: &FilteredComplex<R>, sub: &SubComplex, k: usize) -> Vec<Quotient> {
    let field = x.field();
    let ambient = x.cells_of_dim(k).len();
    let below = if k == 0 { 0 } else { x.cells_of_dim(k - 1).len() };
    (0..x.grid().len())
        .map(|t| {
            let alive = |dim: usize| -> Vec<usize> {
                sub.members().iter().copied().filter(|&c| x.cell(c).dim == dim && x.cell(c).birth <= t).collect()
            };
            let cols = alive(k);
            let mut d = Matrix::zeros(field, below, cols.len());
            let mut embed = Matrix::zeros(field, ambient, cols.len());
            for (j, &c) in cols.iter().enumerate() {
                embed.set(x.slot(c), j, 1);
                for &(f, v) in &x.cell(c).boundary {
                    d.add_at(x.slot(f), j, v);
                }
            }
            let z = Subspace::from_independent(embed.mul(&d.kernel()));
            let up = alive(k + 1);
            let mut b = Matrix::zeros(field, ambient, up.len());
            for (j, &c) in up.iter().enumerate() {
                for &(f, v) in &x.cell(c).boundary {
                    b.add_at(x.slot(f), j, v);
                }
            }
            let den = if up.is_empty() { Subspace::zero(field, ambient) } else { Subspace::span(&b) };
            Quotient::new(&z, den)
        })
        .collect()
}

/// One summand of a Čech-type double complex: homology of a piece placed
/// at bidegree `(p, q)`, with signed face targets in both directions.
#[derive(Debug, Clone)]
struct Block {
    p: usize,
    q: usize,
    hom: Vec<Quotient>,
    dv: Vec<(usize, u32)>,
    dh: Vec<(usize, u32)>,
}

/// Pointwise double complex assembled from blocks.
#[derive(Debug, Clone)]
struct Assembled<R> {
    complex: PersistentComplex<R>,
    dv: Vec<Vec<Matrix>>,
    dh: Vec<Vec<Matrix>>,
    /// Block and index within the block of every basis element, per `t`, per degree.
    basis: Vec<Vec<Vec<(usize, usize)>>>,
    /// Homology quotients of every block, per `t`.
    homs: Vec<Vec<Quotient>>,
}

fn assemble<R: Real>(field: FieldSpec, grid: &Grid<R>, blocks: &[Block]) -> Result<Assembled<R>> {
    let top = blocks.iter().map(|b| b.p + b.q).max().unwrap_or(0);
    let g = grid.len();
    let mut levels = Vec::with_capacity(g);
    let mut dvs = Vec::with_capacity(g);
    let mut dhs = Vec::with_capacity(g);
    let mut bases = Vec::with_capacity(g);
    for t in 0..g {
        let mut basis: Vec<Vec<(usize, usize)>> = vec![Vec::new(); top + 1];
        let mut offset = vec![0usize; blocks.len()];
        for (i, b) in blocks.iter().enumerate() {
            let n = b.p + b.q;
            offset[i] = basis[n].len();
            basis[n].extend((0..b.hom[t].dim()).map(|j| (i, j)));
        }
        let mut lv = GradedLevel::empty(field, top);
        let mut dv = Vec::with_capacity(top + 1);
        let mut dh = Vec::with_capacity(top + 1);
        for n in 0..=top {
            lv.dims[n] = basis[n].len();
            lv.filt[n] = basis[n].iter().map(|&(i, _)| blocks[i].p as i64).collect();
            lv.tags[n] = basis[n].iter().map(|&(i, j)| (i << 20) | j).collect();
            let rows = if n == 0 { 0 } else { basis[n - 1].len() };
            let mut mv = Matrix::zeros(field, rows, basis[n].len());
            let mut mh = Matrix::zeros(field, rows, basis[n].len());
            for (col, &(i, j)) in basis[n].iter().enumerate() {
                let rep = blocks[i].hom[t].reps().select_cols(&[j]);
                for (faces, target) in [(&blocks[i].dv, &mut mv), (&blocks[i].dh, &mut mh)] {
                    for &(h, coeff) in faces {
                        let c = blocks[h].hom[t]
                            .coords(&rep)
                            .ok_or_else(|| MvssError::invariant("a piece cycle is not a cycle of the larger piece"))?;
                        for r in 0..c.rows() {
                            target.add_at(offset[h] + r, col, field.mul(coeff, c.get(r, 0)));
                        }
                    }
                }
            }
            lv.d[n] = mv.add(&mh);
            dv.push(mv);
            dh.push(mh);
        }
        levels.push(lv);
        dvs.push(dv);
        dhs.push(dh);
        bases.push(basis);
    }
    let maps = (0..g.saturating_sub(1))
        .map(|t| {
            (0..=top)
                .map(|n| {
                    let (src, dst) = (&bases[t][n], &bases[t + 1][n]);
                    let mut m = Matrix::zeros(field, dst.len(), src.len());
                    let mut start = BTreeMap::new();
                    for (row, &(i, j)) in dst.iter().enumerate() {
                        if j == 0 {
                            start.insert(i, row);
                        }
                    }
                    for (col, &(i, j)) in src.iter().enumerate() {
                        let rep = blocks[i].hom[t].reps().select_cols(&[j]);
                        let c = blocks[i].hom[t + 1].coords(&rep).expect("cycles persist");
                        for r in 0..c.rows() {
                            m.set(start[&i] + r, col, c.get(r, 0));
                        }
                    }
                    m
                })
                .collect()
        })
        .collect();
    let complex = PersistentComplex::new(field, grid.clone(), levels, maps)?;
    let homs = blocks.iter().map(|b| b.hom.clone()).collect();
    Ok(Assembled { complex, dv: dvs, dh: dhs, basis: bases, homs })
}

fn faces(verts: &[usize]) -> Vec<Vec<usize>> {
    if verts.len() < 2 {
        return Vec::new();
    }
    (0..verts.len())
        .map(|i| verts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect())
        .collect()
}

/// Čech complex `C_p(U; PH_k) = ⊕_{dim σ = p} PH_k(U_σ)`.
#[derive(Debug, Clone)]
pub struct CechComplex<R = f64> {
    pub k: usize,
    pub nerve: Nerve<R>,
    inner: Assembled<R>,
}

impl<R: Real> CechComplex<R> {
    pub fn complex(&self) -> &PersistentComplex<R> {
        &self.inner.complex
    }

    /// Čech homology `Ȟ_p(U; PH_k)` as a persistence module.
    pub fn homology(&self, p: usize) -> PersistenceModule<R> {
        self.inner.complex.homology_module(p)
    }

    pub fn barcode(&self, p: usize) -> Barcode<R> {
        self.homology(p).barcode(p).expect("homology rank functions are monotone")
    }
}

/// Build the Čech complex of `cover` with coefficients in `PH_k`.
pub fn cech_complex<R: Real>(x: &FilteredComplex<R>, cover: &Cover, k: usize) -> Result<CechComplex<R>> {
    let nv = nerve(x, cover);
    let simplices = nv.simplices();
    let blocks: Vec<Block> = simplices
        .par_iter()
        .map(|s| Block {
            p: s.len() - 1,
            q: 0,
            hom: piece_homology(x, &cover.intersection(s), k),
            dv: faces(s)
                .iter()
                .enumerate()
                .map(|(i, f)| (nv.find(f).expect("nerve is face closed"), x.field().sign(i)))
                .collect(),
            dh: Vec::new(),
        })
        .collect();
    let inner = assemble(x.field(), x.grid(), &blocks)?;
    Ok(CechComplex { k, nerve: nv, inner })
}

/// Which of the two spectral sequences of a double complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// Filtered by the `V`-degree `p`.
    First,
    /// Filtered by the `U`-degree `q`.
    Second,
}

/// `C_{p,q}(V, U; PH_k) = ⊕ PH_k(V_σ ∩ U_τ)` over `dim σ = p`, `dim τ = q`,
/// with `δ^V` and `(−1)^p δ^U`.
#[derive(Debug, Clone)]
pub struct CoverPairComplex<R = f64> {
    pub k: usize,
    pub v_nerve: Nerve<R>,
    pub u_nerve: Nerve<R>,
    /// `(σ, τ)` nerve ids of every block.
    pub blocks: Vec<(usize, usize)>,
    inner: Assembled<R>,
}

/// Assemble the two-cover double complex in homology degree `k`.
pub fn build_cover_pair_complex<R: Real>(
    x: &FilteredComplex<R>,
    v: &Cover,
    u: &Cover,
    k: usize,
) -> Result<CoverPairComplex<R>> {
    let field = x.field();
    let nv = nerve(x, v);
    let nu = nerve(x, u);
    let (vs, us) = (nv.simplices(), nu.simplices());
    let mut keys = Vec::new();
    let mut index = BTreeMap::new();
    for (si, s) in vs.iter().enumerate() {
        for (ti, tau) in us.iter().enumerate() {
            let piece = v.intersection(s).intersection(&u.intersection(tau));
            if !piece.is_empty() {
                index.insert((si, ti), keys.len());
                keys.push((si, ti, piece));
            }
        }
    }
    let blocks: Vec<Block> = keys
        .par_iter()
        .map(|(si, ti, piece)| {
            let (s, tau) = (&vs[*si], &us[*ti]);
            let p = s.len() - 1;
            let dv = faces(s)
                .iter()
                .enumerate()
                .map(|(i, f)| (index[&(nv.find(f).expect("face"), *ti)], field.sign(i)))
                .collect();
            let dh = faces(tau)
                .iter()
                .enumerate()
                .map(|(j, f)| (index[&(*si, nu.find(f).expect("face"))], field.sign(p + j)))
                .collect();
            Block { p, q: tau.len() - 1, hom: piece_homology(x, piece, k), dv, dh }
        })
        .collect();
    let inner = assemble(field, x.grid(), &blocks)?;
    let blocks = keys.iter().map(|&(s, t, _)| (s, t)).collect();
    Ok(CoverPairComplex { k, v_nerve: nv, u_nerve: nu, blocks, inner })
}

impl<R: Real> CoverPairComplex<R> {
    /// Total complex filtered by `p` (first) or `q` (second).
    pub fn total(&self, which: Which) -> PersistentComplex<R> {
        match which {
            Which::First => self.inner.complex.clone(),
            Which::Second => {
                let basis = &self.inner.basis;
                let blocks = &self.blocks;
                let u_nerve = &self.u_nerve;
                self.inner.complex.relabel(|t, n, i| {
                    let (b, _) = basis[t][n][i];
                    u_nerve.complex.cell(blocks[b].1).dim as i64
                })
            }
        }
    }

    /// Check `δ^V∘δ^V = 0`, `δ^U∘δ^U = 0` and anticommutation at every grid index.
    pub fn check_identities(&self) -> std::result::Result<(), String> {
        for (t, (dv, dh)) in self.inner.dv.iter().zip(&self.inner.dh).enumerate() {
            for n in 2..dv.len() {
                if !dv[n - 1].mul(&dv[n]).is_zero() {
                    return Err(format!("vertical differential squares to a nonzero map in degree {n} at grid index {t}"));
                }
                if !dh[n - 1].mul(&dh[n]).is_zero() {
                    return Err(format!("horizontal differential squares to a nonzero map in degree {n} at grid index {t}"));
                }
                if !dv[n - 1].mul(&dh[n]).add(&dh[n - 1].mul(&dv[n])).is_zero() {
                    return Err(format!("differentials do not anticommute in degree {n} at grid index {t}"));
                }
            }
        }
        Ok(())
    }

    /// The entry `C_{p,q}` as a persistence module.
    pub fn entry_module(&self, p: usize, q: usize) -> PersistenceModule<R> {
        let c = &self.inner.complex;
        let field = c.field();
        let g = c.grid().len();
        let n = p + q;
        let pick = |t: usize| -> Vec<usize> {
            if n > c.top() {
                return Vec::new();
            }
            self.inner.basis[t][n]
                .iter()
                .enumerate()
                .filter(|(_, &(b, _))| {
                    let (s, tau) = self.blocks[b];
                    self.v_nerve.complex.cell(s).dim == p && self.u_nerve.complex.cell(tau).dim == q
                })
                .map(|(i, _)| i)
                .collect()
        };
        let idx: Vec<Vec<usize>> = (0..g).map(pick).collect();
        let dims = idx.iter().map(|v| v.len()).collect();
        let maps = (0..g.saturating_sub(1))
            .map(|t| {
                if n > c.top() {
                    return Matrix::zeros(field, 0, 0);
                }
                c.maps()[t][n].select_rows(&idx[t + 1]).select_cols(&idx[t])
            })
            .collect();
        PersistenceModule::new(field, c.grid().clone(), dims, maps).expect("blocks persist")
    }

    /// Basis elements of total degree `n` at `t`, as `(σ, τ, index)`.
    pub fn basis(&self, t: usize, n: usize) -> Vec<(usize, usize, usize)> {
        self.inner.basis[t]
            .get(n)
            .map_or(Vec::new(), |v| v.iter().map(|&(b, j)| (self.blocks[b].0, self.blocks[b].1, j)).collect())
    }
}

/// The two spectral sequences of a cover pair complex.
#[derive(Debug, Clone)]
pub struct PairPages<R = f64> {
    pub which: Which,
    pub ss: SpectralSequence<R>,
}

impl<R: Real> PairPages<R> {
    /// Barcode of the entry at bidegree `(p, q)` = (`V`-degree, `U`-degree).
    pub fn barcode(&self, r: usize, p: i64, q: i64) -> Barcode<R> {
        match self.which {
            Which::First => self.ss.entry_barcode(r, p, q),
            Which::Second => self.ss.entry_barcode(r, q, p),
        }
    }

    pub fn dim(&self, r: usize, p: i64, q: i64, t: usize) -> usize {
        match self.which {
            Which::First => self.ss.dim(r, p, q, t),
            Which::Second => self.ss.dim(r, q, p, t),
        }
    }
}

pub fn pair_pages<R: Real>(cpc: &CoverPairComplex<R>, which: Which) -> PairPages<R> {
    PairPages { which, ss: SpectralSequence::compute(&cpc.total(which), 2) }
}

/// Page-2 comparison `θ^{U,V}: Ȟ_p(V; PH_k) → Ȟ_p(U; PH_k)`, for `V ≺ U`,
/// through the pair complex `C(V, U; PH_k)`.
#[derive(Debug, Clone)]
pub struct ThetaMorphism<R = f64> {
    pub k: usize,
    pub cech_v: CechComplex<R>,
    pub cech_u: CechComplex<R>,
    /// `mats[p][t]`, in the homology bases of the two Čech complexes.
    pub mats: Vec<Vec<Matrix>>,
}

impl<R: Real> ThetaMorphism<R> {
    /// Check commutation with the structure maps.
    pub fn check_natural(&self) -> std::result::Result<(), String> {
        for (p, mats) in self.mats.iter().enumerate() {
            let (a, b) = (self.cech_v.homology(p), self.cech_u.homology(p));
            for t in 0..mats.len().saturating_sub(1) {
                if mats[t + 1].mul(&a.maps()[t]) != b.maps()[t].mul(&mats[t]) {
                    return Err(format!("theta does not commute with shifts in degree {p} at grid index {t}"));
                }
            }
        }
        Ok(())
    }

    /// Ranks of `θ_t`, per degree and grid index.
    pub fn ranks(&self) -> Vec<Vec<usize>> {
        self.mats.iter().map(|ms| ms.iter().map(|m| m.rank()).collect()).collect()
    }
}

/// Augmentation of the pair complex onto the Čech complex of `V`
/// (`onto_v`) or of `U`: blocks whose other index is a vertex map by
/// inclusion of pieces, all others to zero.
fn projection<R: Real>(cpc: &CoverPairComplex<R>, cech: &CechComplex<R>, t: usize, n: usize, onto_v: bool) -> Matrix {
    let field = cech.complex().field();
    let src = cpc.inner.basis[t].get(n).map_or(&[][..], |v| v.as_slice());
    let dst = cech.inner.basis[t].get(n).map_or(&[][..], |v| v.as_slice());
    let mut m = Matrix::zeros(field, dst.len(), src.len());
    let mut start = BTreeMap::new();
    for (row, &(b, j)) in dst.iter().enumerate() {
        if j == 0 {
            start.insert(b, row);
        }
    }
    for (col, &(b, j)) in src.iter().enumerate() {
        let (s, tau) = cpc.blocks[b];
        let (keep, other_dim) = if onto_v {
            (s, cpc.u_nerve.complex.cell(tau).dim)
        } else {
            (tau, cpc.v_nerve.complex.cell(s).dim)
        };
        if other_dim != 0 {
            continue;
        }
        let Some(&r0) = start.get(&keep) else { continue };
        let rep = cpc.inner.homs[b][t].reps().select_cols(&[j]);
        let c = cech.inner.homs[keep][t].coords(&rep).expect("pair piece lies in the projected piece");
        for r in 0..c.rows() {
            m.set(r0 + r, col, c.get(r, 0));
        }
    }
    m
}

/// Compute `θ^{U,V} = π^U_* ∘ (π^V_*)^{-1}` on Čech homology with
/// coefficients in `PH_k`; requires `V ≺ U`.
pub fn theta<R: Real>(x: &FilteredComplex<R>, u: &Cover, v: &Cover, k: usize) -> Result<ThetaMorphism<R>> {
    find_refinement(v, u)?;
    let cpc = build_cover_pair_complex(x, v, u, k)?;
    let cech_v = cech_complex(x, v, k)?;
    let cech_u = cech_complex(x, u, k)?;
    let field = x.field();
    let top = cech_v.complex().top();
    let g = x.grid().len();
    let mut mats = Vec::with_capacity(top + 1);
    for p in 0..=top {
        let mut per_t = Vec::with_capacity(g);
        for t in 0..g {
            let hv = cech_v.complex().homology_quotient(p, t);
            let hu = cech_u.complex().homology_quotient(p, t);
            if hv.dim() == 0 {
                per_t.push(Matrix::zeros(field, hu.dim(), 0));
                continue;
            }
            let tot = cpc.inner.complex.level(t);
            if p > tot.top() {
                return Err(MvssError::hypothesis(format!("degree {p} classes of V do not lift at grid index {t}")));
            }
            let z = tot.d[p].kernel();
            let pv = projection(&cpc, &cech_v, t, p, true);
            let joined = Matrix::hstack(field, pv.rows(), &[&pv.mul(&z), hv.den().basis()]);
            let sol = joined.solve(hv.reps()).ok_or_else(|| {
                MvssError::hypothesis(format!("degree {p} classes of V do not lift to the pair complex at grid index {t}"))
            })?;
            let lift = z.mul(&sol.select_rows(&(0..z.cols()).collect::<Vec<_>>()));
            let img = projection(&cpc, &cech_u, t, p, false).mul(&lift);
            per_t.push(hu.coords(&img).ok_or_else(|| MvssError::invariant("projection onto U is not a chain map"))?);
        }
        mats.push(per_t);
    }
    Ok(ThetaMorphism { k, cech_v, cech_u, mats })
}

/// The refinement map `(σ, z) ↦ ±(ρσ, z)` on Čech homology, in the same
/// bases as [`theta`].
pub fn cech_refinement<R: Real>(theta: &ThetaMorphism<R>, rho: &RefinementMap) -> Result<Vec<Vec<Matrix>>> {
    let (cv, cu) = (&theta.cech_v, &theta.cech_u);
    let field = cv.complex().field();
    let g = cv.complex().grid().len();
    let mut out = Vec::new();
    for p in 0..theta.mats.len() {
        let mut per_t = Vec::with_capacity(g);
        for t in 0..g {
            let src = cv.inner.basis[t].get(p).map_or(&[][..], |v| v.as_slice());
            let dst = cu.inner.basis[t].get(p).map_or(&[][..], |v| v.as_slice());
            let mut start = BTreeMap::new();
            for (row, &(b, j)) in dst.iter().enumerate() {
                if j == 0 {
                    start.insert(b, row);
                }
            }
            let mut chain = Matrix::zeros(field, dst.len(), src.len());
            for (col, &(b, j)) in src.iter().enumerate() {
                let Some((sorted, parity)) = oriented_image(&rho.assign, cv.nerve.simplex(b)) else { continue };
                let tb = cu.nerve.find(&sorted).ok_or_else(|| MvssError::invariant("image simplex missing"))?;
                let rep = cv.inner.homs[b][t].reps().select_cols(&[j]);
                let c = cu.inner.homs[tb][t].coords(&rep).ok_or_else(|| MvssError::hypothesis("not a refinement"))?;
                if let Some(&r0) = start.get(&tb) {
                    for r in 0..c.rows() {
                        chain.set(r0 + r, col, field.mul(field.sign(parity), c.get(r, 0)));
                    }
                }
            }
            let hv = cv.complex().homology_quotient(p, t);
            let hu = cu.complex().homology_quotient(p, t);
            let img = chain.mul(hv.reps());
            per_t.push(hu.coords(&img).ok_or_else(|| MvssError::invariant("refinement is not a chain map"))?);
        }
        out.push(per_t);
    }
    Ok(out)
}

/// Kernel and cokernel of a page-2 morphism on one entry.
#[derive(Debug, Clone)]
pub struct EntryDefect<R = f64> {
    pub p: i64,
    pub q: i64,
    pub kernel: Barcode<R>,
    pub cokernel: Barcode<R>,
}

/// Kernel and cokernel barcodes of `m: A → B` on every page-`r` entry.
pub fn entry_defects<R: Real>(
    m: &PageMorphism,
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    r: usize,
) -> Vec<EntryDefect<R>> {
    all_entries(a, b)
        .into_iter()
        .map(|(p, q)| {
            let mats = entry_matrices(m, a, b, r, p, q);
            let ker = kernel_module(&a.entry_module(r, p, q), &mats);
            let cok = cokernel_module(&b.entry_module(r, p, q), &mats);
            let dim = q.max(0) as usize;
            EntryDefect {
                p,
                q,
                kernel: ker.barcode(dim).expect("kernel rank function is monotone"),
                cokernel: cok.barcode(dim).expect("cokernel rank function is monotone"),
            }
        })
        .collect()
}

/// Page-2 morphism `B → A` undoing `theta: A → B` up to the shift `bound`.
pub fn approximate_inverse<R: Real>(
    a: &SpectralSequence<R>,
    b: &SpectralSequence<R>,
    theta: &PageMorphism,
    bound: R,
) -> Result<PageMorphism> {
    let grid = a.complex().grid();
    let targets: Vec<usize> = (0..grid.len()).map(|t| grid.shift_index(t, bound)).collect();
    let mut page = BTreeMap::new();
    for (p, q) in all_entries(a, b) {
        let mats = entry_matrices(theta, a, b, 2, p, q);
        let (ma, mb) = (a.entry_module(2, p, q), b.entry_module(2, p, q));
        let inv = lift_within(&ma, &mb, &mats, &targets).ok_or_else(|| {
            MvssError::hypothesis(format!("no inverse within shift {bound} on entry ({p},{q})"))
        })?;
        page.insert((p, (p + q) as usize), inv.mats);
    }
    Ok(PageMorphism { targets, start: 2, pages: vec![page] })
}

/// An interleaving between `E(X, V)` and `E(X, U)` from page 2.
#[derive(Debug, Clone)]
pub struct InverseCertificate<R = f64> {
    /// Largest kernel bar of θ.
    pub eps: R,
    /// Largest cokernel bar of θ.
    pub nu: R,
    pub defects: Vec<EntryDefect<R>>,
    /// `2(eps + nu)`.
    pub generic_bound: R,
    pub generic: PageInterleavingReport<R>,
    /// `2 max(eps, nu)`, offered when kernels and cokernels live in
    /// different bidegrees.
    pub position_aware: Option<(R, PageInterleavingReport<R>)>,
}

/// Build and verify an approximate inverse of the refinement morphism
/// `E(X, V) → E(X, U)` on page 2. With `supplied = Some((eps, nu))` the
/// kernels and cokernels must be `eps`- and `nu`-trivial.
pub fn inverse_refinement<R: Real>(
    x: &FilteredComplex<R>,
    u: &Cover,
    v: &Cover,
    supplied: Option<(R, R)>,
) -> Result<InverseCertificate<R>> {
    let rho = find_refinement(v, u)?;
    let sv = cover_sequence(x, v)?;
    let su = cover_sequence(x, u)?;
    inverse_refinement_with(&sv, &su, &rho, supplied)
}

pub fn inverse_refinement_with<R: Real>(
    sv: &CoverSequence<R>,
    su: &CoverSequence<R>,
    rho: &RefinementMap,
    supplied: Option<(R, R)>,
) -> Result<InverseCertificate<R>> {
    let th = refinement_ss_morphism(sv, su, rho)?;
    let defects: Vec<EntryDefect<R>> = entry_defects(&th, &sv.ss, &su.ss, 2)
        .into_iter()
        .filter(|d| !(d.kernel.is_empty() && d.cokernel.is_empty()))
        .collect();
    let measured_eps = defects.iter().map(|d| d.kernel.max_length()).fold(R::zero(), R::max);
    let measured_nu = defects.iter().map(|d| d.cokernel.max_length()).fold(R::zero(), R::max);
    let (eps, nu) = match supplied {
        Some((e, n)) => {
            for d in &defects {
                if !is_eps_trivial(&d.kernel, e) {
                    return Err(MvssError::hypothesis(format!("kernel on entry ({},{}) is not {e}-trivial", d.p, d.q)));
                }
                if !is_eps_trivial(&d.cokernel, n) {
                    return Err(MvssError::hypothesis(format!("cokernel on entry ({},{}) is not {n}-trivial", d.p, d.q)));
                }
            }
            (e, n)
        }
        None => (measured_eps, measured_nu),
    };
    if !(eps.is_finite() && nu.is_finite()) {
        return Err(MvssError::hypothesis("page-2 kernel or cokernel has an infinite bar"));
    }
    let two = R::one() + R::one();
    let check = |bound: R| -> Result<PageInterleavingReport<R>> {
        let phi = approximate_inverse(&sv.ss, &su.ss, &th, bound)?;
        Ok(check_page_interleaving(&sv.ss, &su.ss, &th, &phi, bound, 2))
    };
    let generic_bound = two * (eps + nu);
    let generic = check(generic_bound)?;
    let ker_at: BTreeSet<(i64, i64)> = defects.iter().filter(|d| !d.kernel.is_empty()).map(|d| (d.p, d.q)).collect();
    let cok_at: BTreeSet<(i64, i64)> = defects.iter().filter(|d| !d.cokernel.is_empty()).map(|d| (d.p, d.q)).collect();
    let position_aware = if ker_at.is_disjoint(&cok_at) {
        let bound = two * eps.max(nu);
        Some((bound, check(bound)?))
    } else {
        None
    };
    Ok(InverseCertificate { eps, nu, defects, generic_bound, generic, position_aware })
}

/// Page-2 isomorphism under the local vanishing hypothesis.
#[derive(Debug, Clone)]
pub struct StrongCertificate<R = f64> {
    pub rho: RefinementMap,
    pub entries: Vec<((i64, i64), Barcode<R>)>,
}

/// Nerve simplices `τ` of `U` (by set names) and entries `(p, q)`, `p > 0`,
/// at which the page-2 sequence of `V ∩ U_τ` over `U_τ` is nonzero.
pub fn local_vanishing_failures<R: Real>(
    x: &FilteredComplex<R>,
    u: &Cover,
    v: &Cover,
) -> Result<Vec<(Vec<String>, i64, i64)>> {
    let nu = nerve(x, u);
    let results: Vec<Result<Vec<(Vec<String>, i64, i64)>>> = nu
        .simplices()
        .par_iter()
        .map(|tau| {
            let (xt, vt) = v.restrict(x, &u.intersection(tau))?;
            let ls = cover_sequence(&xt, &vt)?;
            let names: Vec<String> = tau.iter().map(|&i| u.name(i).to_string()).collect();
            Ok(ls
                .nonzero_entries(2)
                .into_iter()
                .filter(|((p, _), _)| *p > 0)
                .map(|((p, q), _)| (names.clone(), p, q))
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Certify that the refinement morphism `E(X, V) → E(X, U)` is a page-2
/// isomorphism, after checking the local vanishing hypothesis.
pub fn covers_strong_check<R: Real>(x: &FilteredComplex<R>, u: &Cover, v: &Cover) -> Result<StrongCertificate<R>> {
    let rho = find_refinement(v, u)?;
    let failures = local_vanishing_failures(x, u, v)?;
    if !failures.is_empty() {
        let list: Vec<String> =
            failures.iter().map(|(tau, p, q)| format!("({}; p={p}, k={q})", tau.join("^"))).collect();
        return Err(MvssError::hypothesis(format!("local higher pages do not vanish at {}", list.join(", "))));
    }
    let sv = cover_sequence(x, v)?;
    let su = cover_sequence(x, u)?;
    let th = refinement_ss_morphism(&sv, &su, &rho)?;
    let mut entries = Vec::new();
    for (p, q) in all_entries(&sv.ss, &su.ss) {
        for (t, m) in entry_matrices(&th, &sv.ss, &su.ss, 2, p, q).iter().enumerate() {
            if m.rows() != m.cols() || m.rank() != m.rows() {
                return Err(MvssError::invariant(format!("entry ({p},{q}) is not an isomorphism at grid index {t}")));
            }
        }
        let b = sv.barcode(2, p, q);
        if !b.is_empty() {
            entries.push(((p, q), b));
        }
    }
    Ok(StrongCertificate { rho, entries })
}

/// Estimates for one piece `U_τ` of one interpolation step.
#[derive(Debug, Clone)]
pub struct LocalPiece<R = f64> {
    pub tau: Vec<String>,
    pub eps: R,
    pub nu: R,
}

#[derive(Debug, Clone)]
pub struct LocalStep<R = f64> {
    pub r: usize,
    pub eps: R,
    pub nu: R,
    pub pieces: Vec<LocalPiece<R>>,
}

#[derive(Debug, Clone)]
pub struct LocalCheckReport<R = f64> {
    pub steps: Vec<LocalStep<R>>,
    /// `Σ_r 2 max(eps_r, nu_r)`.
    pub bound: R,
}

/// `eps`: longest bar in a page-2 entry with `p > 0`. `nu`: longest bar in
/// the kernel of `E^2_{0,q} → E^∞_{0,q}` or the cokernel of
/// `E^∞_{0,q} → PH_q`.
pub fn local_estimates<R: Real>(ls: &CoverSequence<R>) -> (R, R) {
    let ss = &ls.ss;
    let eps = ls
        .nonzero_entries(2)
        .iter()
        .filter(|((p, _), _)| *p > 0)
        .map(|(_, b)| b.max_length())
        .fold(R::zero(), R::max);
    let g = ss.complex().grid().len();
    let last = ss.last_page();
    let mut nu = R::zero();
    for q in 0..=ss.top() {
        let proj: Vec<Matrix> = (0..g)
            .map(|t| ss.coords(last, 0, q, t, &ss.reps(2, 0, q, t)).expect("bottom column only loses classes"))
            .collect();
        let ker = kernel_module(&ss.entry_module(2, 0, q as i64), &proj);
        let h = ss.complex().homology_module(q);
        let incl: Vec<Matrix> = (0..g)
            .map(|t| {
                ss.complex()
                    .homology_quotient(q, t)
                    .coords(&ss.reps(last, 0, q, t))
                    .expect("bottom-column survivors are cycles")
            })
            .collect();
        let cok = cokernel_module(&h, &incl);
        for m in [ker, cok] {
            nu = nu.max(m.barcode(q).expect("monotone").max_length());
        }
    }
    (eps, nu)
}

/// Interpolate from `W` to `U` and bound the page-2 interleaving distance
/// between `E(X, W)` and `E(X, U)` by local computations on pieces of `U`.
pub fn local_checks<R: Real>(x: &FilteredComplex<R>, w: &Cover, u: &Cover) -> Result<LocalCheckReport<R>> {
    find_refinement(w, u)?;
    let nu_cover = nerve(x, u);
    let d = nu_cover.dim();
    let simplices = nu_cover.simplices();
    let two = R::one() + R::one();
    let mut steps = Vec::with_capacity(d + 1);
    let mut bound = R::zero();
    for r in 0..=d {
        let finer = interpolation(x, w, u, r + 1)?;
        let pieces: Vec<Result<LocalPiece<R>>> = simplices
            .par_iter()
            .filter(|tau| tau.len() == r + 1)
            .map(|tau| {
                let (xt, ct) = finer.restrict(x, &u.intersection(tau))?;
                let ls = cover_sequence(&xt, &maximal_sets(&xt, &ct)?)?;
                let (eps, nu) = local_estimates(&ls);
                Ok(LocalPiece { tau: tau.iter().map(|&i| u.name(i).to_string()).collect(), eps, nu })
            })
            .collect();
        let pieces = pieces.into_iter().collect::<Result<Vec<_>>>()?;
        let eps = pieces.iter().map(|p| p.eps).fold(R::zero(), R::max);
        let nu = pieces.iter().map(|p| p.nu).fold(R::zero(), R::max);
        bound = bound + two * eps.max(nu);
        steps.push(LocalStep { r, eps, nu, pieces });
    }
    Ok(LocalCheckReport { steps, bound })
}

/// Largest bottleneck distance between corresponding page-`r` entries.
pub fn page_bottleneck<R: Real>(a: &CoverSequence<R>, b: &CoverSequence<R>, r: usize) -> R {
    all_entries(&a.ss, &b.ss)
        .into_iter()
        .map(|(p, q)| bottleneck(&a.barcode(r, p, q), &b.barcode(r, p, q)))
        .fold(R::zero(), R::max)
}

/// Interleaving certificate for one arm `W → C` of the stability diagram.
#[derive(Debug, Clone)]
pub struct ArmCertificate<R = f64> {
    pub arm: String,
    pub outcome: std::result::Result<InverseCertificate<R>, String>,
}

#[derive(Debug, Clone)]
pub struct StabilityReport<R = f64> {
    pub refinement: Cover,
    pub arm_u: LocalCheckReport<R>,
    pub arm_v: LocalCheckReport<R>,
    /// Larger of the two arm bounds.
    pub bound: R,
    /// Sum of the two arm bounds.
    pub triangle: R,
    pub certificates: Vec<ArmCertificate<R>>,
}

/// Bound the page-2 distance between `E(X, U)` and `E(X, V)` through the
/// common refinement.
pub fn cover_stability<R: Real>(x: &FilteredComplex<R>, u: &Cover, v: &Cover) -> Result<StabilityReport<R>> {
    let w = common_refinement(x, u, v)?;
    let arm_u = local_checks(x, &w, u)?;
    let arm_v = local_checks(x, &w, v)?;
    let certificates = [("U", u), ("V", v)]
        .into_iter()
        .map(|(arm, c)| ArmCertificate {
            arm: arm.to_string(),
            outcome: inverse_refinement(x, c, &w, None).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(StabilityReport {
        refinement: w,
        bound: arm_u.bound.max(arm_v.bound),
        triangle: arm_u.bound + arm_v.bound,
        arm_u,
        arm_v,
        certificates,
    })
}

/// Lift a global chain map `X → Y` to the realizations of two covers
/// indexed by the same set names: `(σ, c) ↦ Σ v (σ, y)` over `f(c) = Σ v y`.
/// Every image cell must lie in the matching piece of `Y`.
pub fn realization_chain_map<R: Real>(
    sx: &CoverSequence<R>,
    sy: &CoverSequence<R>,
    images: &CellImages,
    targets: &[usize],
) -> Result<ChainMapFamily> {
    if sx.cover.names() != sy.cover.names() {
        return Err(MvssError::input("covers must name the same sets in the same order"));
    }
    let field = sx.ss.field();
    let mut global: Vec<Vec<(usize, u32)>> = Vec::with_capacity(sx.blowup.cells.len());
    for &(s, c) in &sx.blowup.cells {
        let sigma = sx.nerve.simplex(s);
        let ts = sy
            .nerve
            .find(sigma)
            .ok_or_else(|| MvssError::hypothesis(format!("nerve simplex {sigma:?} is missing on the target side")))?;
        let mut col = Vec::new();
        for &(y, v) in &images.images[sx.members[s][c]] {
            let pos = sy.members[ts].binary_search(&y).map_err(|_| {
                MvssError::hypothesis(format!("image cell {y} leaves the piece indexed by {sigma:?}"))
            })?;
            col.push((sy.position[&(ts, pos)], v));
        }
        global.push(col);
    }
    let (a, b) = (sx.ss.complex(), sy.ss.complex());
    let mats = (0..a.grid().len())
        .map(|t| {
            let (la, lb) = (a.level(t), b.level(targets[t]));
            (0..=a.top())
                .map(|n| {
                    let rows: BTreeMap<usize, usize> =
                        lb.tags.get(n).map_or(BTreeMap::new(), |tags| tags.iter().enumerate().map(|(i, &g)| (g, i)).collect());
                    let mut m = Matrix::zeros(field, lb.dim(n), la.dim(n));
                    for (j, &tag) in la.tags[n].iter().enumerate() {
                        for &(cell, v) in &global[tag] {
                            let i = rows.get(&cell).ok_or_else(|| {
                                MvssError::hypothesis(format!("image of realization cell {tag} is not alive at grid index {}", targets[t]))
                            })?;
                            m.add_at(*i, j, v);
                        }
                    }
                    Ok(m)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainMapFamily { targets: targets.to_vec(), mats })
}

/// Synthesize chain maps carried by `f: X → Y` and `g: Y → X`, lift them to
/// the realizations of two compatible covers and check that the induced
/// morphisms interleave the spectral sequences from page 1.
pub fn carrier_page_interleaving<R: Real>(
    sx: &CoverSequence<R>,
    sy: &CoverSequence<R>,
    f: &Carrier<R>,
    g: &Carrier<R>,
) -> Result<PageInterleavingReport<R>> {
    let fm = synthesize_chain_map(f)?;
    let gm = synthesize_chain_map(g)?;
    let psi = induced_page_morphism(&sx.ss, &sy.ss, &realization_chain_map(sx, sy, &fm, f.targets())?, 1)?;
    let phi = induced_page_morphism(&sy.ss, &sx.ss, &realization_chain_map(sy, sx, &gm, g.targets())?, 1)?;
    Ok(check_page_interleaving(&sx.ss, &sy.ss, &psi, &phi, f.eps().max(g.eps()), 1))
}

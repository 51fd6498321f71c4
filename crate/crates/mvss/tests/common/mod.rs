//! Independent dense oracles and random instance generators shared by the
//! integration tests. Nothing here calls the library's linear algebra,
//! reduction or spectral code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use mvss::complex::{build_simplicial, CellLabel};
use mvss::cover::Cover;
use mvss::{Barcode, FieldSpec, FilteredComplex, Grid, SubComplex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

fn inv(a: i64, p: i64) -> i64 {
    let mut r = 1;
    let mut b = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Row echelon form in place; returns the pivot columns.
fn echelon(p: i64, rows: &mut Vec<Vec<i64>>, width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c].rem_euclid(p) != 0) else { continue };
        rows.swap(r, k);
        let s = inv(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = (*x * s).rem_euclid(p);
        }
        for k in 0..rows.len() {
            if k != r && rows[k][c].rem_euclid(p) != 0 {
                let f = rows[k][c];
                for j in 0..width {
                    rows[k][j] = (rows[k][j] - f * rows[r][j]).rem_euclid(p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Dimension of the span of `vecs`, each of length `width`.
pub fn rank(p: i64, vecs: &[Vec<i64>], width: usize) -> usize {
    let mut rows = vecs.to_vec();
    echelon(p, &mut rows, width).len()
}

/// Basis of `{x : A x = 0}` for `A` given by its rows.
pub fn kernel(p: i64, rows: &[Vec<i64>], width: usize) -> Vec<Vec<i64>> {
    let mut m = rows.to_vec();
    let pivots = echelon(p, &mut m, width);
    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![0; width];
            x[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                x[pc] = (-m[i][f]).rem_euclid(p);
            }
            x
        })
        .collect()
}

/// Boundary of `id` as a dense vector over all cells.
fn boundary_vec<R: mvss::Real>(k: &FilteredComplex<R>, id: usize) -> Vec<i64> {
    let mut v = vec![0; k.len()];
    for &(f, c) in &k.cell(id).boundary {
        v[f] = c as i64;
    }
    v
}

fn alive<R: mvss::Real>(k: &FilteredComplex<R>, dim: usize, t: usize) -> Vec<usize> {
    (0..k.len()).filter(|&c| k.cell(c).dim == dim && k.cell(c).birth <= t).collect()
}

/// Cycles in degree `n` at `t`, as dense vectors over all cells.
fn cycles<R: mvss::Real>(k: &FilteredComplex<R>, n: usize, t: usize) -> Vec<Vec<i64>> {
    let p = k.field().p() as i64;
    let cols = alive(k, n, t);
    let rows: Vec<Vec<i64>> = (0..k.len())
        .map(|r| cols.iter().map(|&c| boundary_vec(k, c)[r]).collect())
        .collect();
    kernel(p, &rows, cols.len())
        .into_iter()
        .map(|x| {
            let mut v = vec![0; k.len()];
            for (j, &c) in cols.iter().enumerate() {
                v[c] = x[j];
            }
            v
        })
        .collect()
}

fn boundaries<R: mvss::Real>(k: &FilteredComplex<R>, n: usize, t: usize) -> Vec<Vec<i64>> {
    alive(k, n + 1, t).into_iter().map(|c| boundary_vec(k, c)).collect()
}

/// Rank of `H_n(X_s) → H_n(X_t)`.
pub fn persistent_rank<R: mvss::Real>(k: &FilteredComplex<R>, n: usize, s: usize, t: usize) -> usize {
    let p = k.field().p() as i64;
    let z = cycles(k, n, s);
    let b = boundaries(k, n, t);
    let both: Vec<Vec<i64>> = b.iter().chain(z.iter()).cloned().collect();
    rank(p, &both, k.len()) - rank(p, &b, k.len())
}

pub fn betti<R: mvss::Real>(k: &FilteredComplex<R>, n: usize, t: usize) -> usize {
    persistent_rank(k, n, t, t)
}

/// Bars `[birth, death)` as grid indices, by inclusion-exclusion on ranks.
pub fn index_bars_from_ranks(g: usize, r: impl Fn(usize, usize) -> usize) -> Vec<(usize, Option<usize>)> {
    let rk = |s: isize, t: usize| if s < 0 { 0 } else { r(s as usize, t) as isize };
    let mut out = Vec::new();
    for b in 0..g {
        for d in b + 1..g {
            let m = rk(b as isize, d - 1) - rk(b as isize, d) - rk(b as isize - 1, d - 1) + rk(b as isize - 1, d);
            assert!(m >= 0, "rank function is not monotone");
            out.extend(std::iter::repeat_n((b, Some(d)), m as usize));
        }
        let m = rk(b as isize, g - 1) - rk(b as isize - 1, g - 1);
        assert!(m >= 0, "rank function is not monotone");
        out.extend(std::iter::repeat_n((b, None), m as usize));
    }
    out
}

pub fn oracle_bars<R: mvss::Real>(k: &FilteredComplex<R>, n: usize) -> Vec<(usize, Option<usize>)> {
    index_bars_from_ranks(k.grid().len(), |s, t| persistent_rank(k, n, s, t))
}

/// A library barcode as sorted grid-index bars.
pub fn as_index_bars<R: mvss::Real>(b: &Barcode<R>, grid: &Grid<R>) -> Vec<(usize, Option<usize>)> {
    let idx = |v: R| grid.index_of(v).expect("bar endpoints lie on the grid");
    let mut out: Vec<(usize, Option<usize>)> = b.bars.iter().map(|x| (idx(x.birth), x.death.map(idx))).collect();
    out.sort_by_key(|&(b, d)| (b, d.unwrap_or(usize::MAX)));
    out
}

pub fn sorted(mut v: Vec<(usize, Option<usize>)>) -> Vec<(usize, Option<usize>)> {
    v.sort_by_key(|&(b, d)| (b, d.unwrap_or(usize::MAX)));
    v
}

/// `dim E^r_{p}` in total degree `n` at `t` of a complex filtered by
/// `column`, from `(Z^r_p + F_{p-1}) / (B^{r-1}_p + F_{p-1})`.
pub fn page_dim<R: mvss::Real>(
    k: &FilteredComplex<R>,
    column: &[usize],
    r: usize,
    p: i64,
    n: usize,
    t: usize,
) -> usize {
    let fp = k.field().p() as i64;
    let w = k.len();
    let col = |c: usize| column[c] as i64;
    let in_f = |dim: usize, q: i64| -> Vec<usize> { alive(k, dim, t).into_iter().filter(|&c| col(c) <= q).collect() };
    // Z^r_p: chains in F_p whose boundary has no component above p - r.
    let src = in_f(n, p);
    let high: Vec<usize> = (0..w).filter(|&c| k.cell(c).dim + 1 == n && col(c) > p - r as i64).collect();
    let bnd: Vec<Vec<i64>> = src.iter().map(|&c| boundary_vec(k, c)).collect();
    let rows: Vec<Vec<i64>> = high.iter().map(|&h| bnd.iter().map(|b| b[h]).collect()).collect();
    let z: Vec<Vec<i64>> = kernel(fp, &rows, src.len())
        .into_iter()
        .map(|x| {
            let mut v = vec![0; w];
            for (j, &c) in src.iter().enumerate() {
                v[c] = x[j];
            }
            v
        })
        .collect();
    // B^{r-1}_p: boundaries of chains in F_{p+r-1} landing in F_p.
    let up = in_f(n + 1, p + r as i64 - 1);
    let ub: Vec<Vec<i64>> = up.iter().map(|&c| boundary_vec(k, c)).collect();
    let above: Vec<usize> = (0..w).filter(|&c| k.cell(c).dim == n && col(c) > p).collect();
    let rows: Vec<Vec<i64>> = above.iter().map(|&h| ub.iter().map(|b| b[h]).collect()).collect();
    let b: Vec<Vec<i64>> = kernel(fp, &rows, up.len())
        .into_iter()
        .map(|x| {
            let mut v = vec![0; w];
            for (j, b) in ub.iter().enumerate() {
                for i in 0..w {
                    v[i] = (v[i] + x[j] * b[i]).rem_euclid(fp);
                }
            }
            v
        })
        .collect();
    let lower: Vec<Vec<i64>> = in_f(n, p - 1)
        .into_iter()
        .map(|c| {
            let mut v = vec![0; w];
            v[c] = 1;
            v
        })
        .collect();
    let zl: Vec<Vec<i64>> = z.into_iter().chain(lower.iter().cloned()).collect();
    let bl: Vec<Vec<i64>> = b.into_iter().chain(lower).collect();
    rank(fp, &zl, w) - rank(fp, &bl, w)
}

/// Bottleneck distance by trying every candidate value with a bipartite
/// matching that lets each bar go to the diagonal.
pub fn oracle_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let half = |x: &(f64, f64)| (x.1 - x.0) / 2.0;
    let linf = |x: &(f64, f64), y: &(f64, f64)| {
        let d = |u: f64, v: f64| if u == v { 0.0 } else { (u - v).abs() };
        d(x.0, y.0).max(d(x.1, y.1))
    };
    let mut cands: Vec<f64> = vec![0.0];
    for x in a.iter().chain(b) {
        cands.push(half(x));
    }
    for x in a {
        for y in b {
            cands.push(linf(x, y));
        }
    }
    cands.retain(|c| c.is_finite());
    cands.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len(), b.len());
    let feasible = |eps: f64| {
        // left: a bars then b's diagonal copies; right: b bars then a's diagonal copies.
        let n = na + nb;
        let ok = |i: usize, j: usize| -> bool {
            match (i < na, j < nb) {
                (true, true) => linf(&a[i], &b[j]) <= eps,
                (true, false) => j - nb == i && half(&a[i]) <= eps,
                (false, true) => i - na == j && half(&b[j]) <= eps,
                (false, false) => true,
            }
        };
        let mut owner: Vec<Option<usize>> = vec![None; n];
        fn augment(i: usize, ok: &dyn Fn(usize, usize) -> bool, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
            for j in 0..owner.len() {
                if ok(i, j) && !seen[j] {
                    seen[j] = true;
                    if owner[j].is_none() || augment(owner[j].unwrap(), ok, seen, owner) {
                        owner[j] = Some(i);
                        return true;
                    }
                }
            }
            false
        }
        (0..n).all(|i| augment(i, &ok, &mut vec![false; n], &mut owner))
    };
    *cands.iter().find(|&&c| feasible(c)).unwrap_or(&f64::INFINITY)
}

/// Random filtered simplicial complex with vertices `0..nv`: random
/// simplices up to `top` dimensions, closed under faces, with births on
/// the grid `0, 1, .., g-1` made monotone toward faces.
pub fn random_simplicial(rng: &mut Rng8, nv: usize, top: usize, tries: usize, g: usize, field: FieldSpec) -> FilteredComplex<f64> {
    random_simplicial_with(rng, nv, top, tries, g, field, false)
}

/// As [`random_simplicial`]; with `vertices_first` every vertex is born at
/// the first grid value, as join diagrams require.
pub fn random_simplicial_with(
    rng: &mut Rng8,
    nv: usize,
    top: usize,
    tries: usize,
    g: usize,
    field: FieldSpec,
    vertices_first: bool,
) -> FilteredComplex<f64> {
    let mut births: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for v in 0..nv {
        let b = rng.gen_range(0..g);
        births.insert(vec![v], if vertices_first { 0 } else { b });
    }
    for _ in 0..tries {
        let size = rng.gen_range(2..=top + 1);
        let mut verts: Vec<usize> = (0..nv).collect();
        verts.shuffle(rng);
        let mut s: Vec<usize> = verts[..size.min(nv)].to_vec();
        s.sort();
        births.entry(s).or_insert_with(|| rng.gen_range(0..g));
    }
    let mut all: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (s, &b) in &births {
        for mask in 1..(1u32 << s.len()) {
            let f: Vec<usize> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            let e = all.entry(f).or_insert(b);
            *e = (*e).min(b);
        }
    }
    let grid = Grid::new((0..g).map(|i| i as f64).collect()).unwrap();
    let list: Vec<(Vec<usize>, f64)> = all.into_iter().map(|(s, b)| (s, b as f64)).collect();
    build_simplicial(&list, field, grid, false).unwrap()
}

pub fn simplex_of<R: mvss::Real>(k: &FilteredComplex<R>, c: usize) -> Vec<usize> {
    match &k.cell(c).label {
        Some(CellLabel::Simplex(v)) => v.clone(),
        _ => panic!("cell {c} is not a labelled simplex"),
    }
}

/// Simplices that are faces of no other simplex.
pub fn maximal_simplices<R: mvss::Real>(k: &FilteredComplex<R>) -> Vec<usize> {
    let mut has_coface = vec![false; k.len()];
    for c in 0..k.len() {
        for &(f, _) in &k.cell(c).boundary {
            has_coface[f] = true;
        }
    }
    (0..k.len()).filter(|&c| !has_coface[c]).collect()
}

/// Cover with up to `m` sets: every maximal simplex joins one to three
/// random sets; empty sets are dropped.
pub fn random_cover<R: mvss::Real>(rng: &mut Rng8, k: &FilteredComplex<R>, m: usize) -> Cover {
    let mut seeds: Vec<Vec<usize>> = vec![Vec::new(); m];
    for c in maximal_simplices(k) {
        let copies = rng.gen_range(1..=3.min(m));
        let mut sets: Vec<usize> = (0..m).collect();
        sets.shuffle(rng);
        for &s in &sets[..copies] {
            seeds[s].push(c);
        }
    }
    let named = seeds
        .into_iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(i, s)| (format!("S{i}"), k.closure(s).unwrap()))
        .collect();
    Cover::new(k, named).unwrap()
}

/// One set per maximal simplex.
pub fn maximal_cover<R: mvss::Real>(k: &FilteredComplex<R>) -> Cover {
    let named = maximal_simplices(k)
        .into_iter()
        .enumerate()
        .map(|(i, c)| (format!("M{i:02}"), k.closure([c]).unwrap()))
        .collect();
    Cover::new(k, named).unwrap()
}

/// Brute-force nerve: every family of sets with nonempty intersection,
/// with the first grid index at which the intersection is nonempty.
pub fn oracle_nerve<R: mvss::Real>(k: &FilteredComplex<R>, cover: &Cover) -> BTreeMap<Vec<usize>, usize> {
    let m = cover.len();
    let mut out = BTreeMap::new();
    for mask in 1..(1u64 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let common: BTreeSet<usize> = (0..k.len())
            .filter(|&c| idx.iter().all(|&i| cover.set(i).members().contains(&c)))
            .collect();
        if let Some(b) = common.iter().map(|&c| k.cell(c).birth).min() {
            out.insert(idx, b);
        }
    }
    out
}

/// Random partition of `0..nv` into at most `blocks` nonempty blocks.
pub fn random_partition(rng: &mut Rng8, nv: usize, blocks: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); blocks];
    for v in 0..nv {
        out[rng.gen_range(0..blocks)].push(v);
    }
    out.retain(|b| !b.is_empty());
    out
}

/// Rebuild a labelled complex over another prime field, so that boundary
/// signs are recomputed rather than reduced.
pub fn over_field(k: &FilteredComplex<f64>, field: FieldSpec) -> FilteredComplex<f64> {
    let grid = k.grid().clone();
    match &k.cell(0).label {
        Some(CellLabel::Simplex(_)) => {
            let list: Vec<(Vec<usize>, f64)> =
                (0..k.len()).map(|c| (simplex_of(k, c), grid.value(k.cell(c).birth))).collect();
            build_simplicial(&list, field, grid, false).unwrap()
        }
        Some(CellLabel::Cube(_)) => {
            let list: Vec<(Vec<(i64, i64)>, f64)> = (0..k.len())
                .map(|c| match &k.cell(c).label {
                    Some(CellLabel::Cube(q)) => (q.clone(), grid.value(k.cell(c).birth)),
                    _ => unreachable!(),
                })
                .collect();
            mvss::complex::build_cubical(&list, field, grid).unwrap()
        }
        _ => panic!("unlabelled complex"),
    }
}

/// Carry a cover across a rebuild by matching labels.
pub fn transfer_cover(from: &FilteredComplex<f64>, to: &FilteredComplex<f64>, cover: &Cover) -> Cover {
    let named = (0..cover.len())
        .map(|i| {
            let ids = cover.set(i).members().iter().map(|&c| to.find_label(from.cell(c).label.as_ref().unwrap()).unwrap());
            (cover.name(i).to_string(), SubComplex::from_ids(ids))
        })
        .collect();
    Cover::new(to, named).unwrap()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn oracle_hausdorff(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let mut h: f64 = 0.0;
    for p in x {
        h = h.max(y.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min));
    }
    for q in y {
        h = h.max(x.iter().map(|p| euclid(p, q)).fold(f64::INFINITY, f64::min));
    }
    h
}

pub fn bars_f64(b: &Barcode<f64>) -> Vec<(f64, f64)> {
    b.bars.iter().map(|x| (x.birth, x.death.unwrap_or(f64::INFINITY))).collect()
}

/// A random complex with `V` = one set per maximal simplex and a random
/// coarser `U`, drawn until `V → U` has at least `maps` refinement maps.
pub fn refinement_pair(seed: u64, maps: usize) -> (FilteredComplex<f64>, Cover, Cover) {
    let mut r = rng(seed);
    loop {
        let k = random_simplicial(&mut r, 6, 2, 6, 3, FieldSpec::f2());
        let v = maximal_cover(&k);
        let u = random_cover(&mut r, &k, 3);
        if mvss::cover::all_refinements(&v, &u, maps).len() >= maps {
            return (k, u, v);
        }
    }
}

/// Two perturbed samples of a circle, the complexes on the cyclic 3-windows
/// of both (born at diameters, on a shared grid), matching arc covers and
/// the same-label carriers both ways with shift twice the displacement.
pub struct PerturbedPair {
    pub x: FilteredComplex<f64>,
    pub y: FilteredComplex<f64>,
    pub cx: Cover,
    pub cy: Cover,
    pub f: mvss::carrier::Carrier<f64>,
    pub g: mvss::carrier::Carrier<f64>,
    pub eps: f64,
}

pub fn perturbed_pair(n: usize, seed: u64) -> PerturbedPair {
    let p = mvss::fixtures::vr_circle(n, 0.1, seed);
    let mut r = rng(seed.wrapping_mul(31).wrapping_add(7));
    let q: Vec<Vec<f64>> =
        p.iter().map(|v| vec![v[0] + r.gen_range(-0.05..0.05), v[1] + r.gen_range(-0.05..0.05)]).collect();
    let eps = 2.0 * p.iter().zip(&q).map(|(a, b)| euclid(a, b)).fold(0.0, f64::max);
    let diam = |pts: &[Vec<f64>], s: &[usize]| {
        s.iter().flat_map(|&a| s.iter().map(move |&b| (a, b))).map(|(a, b)| euclid(&pts[a], &pts[b])).fold(0.0, f64::max)
    };
    let mut simplices: BTreeSet<Vec<usize>> = BTreeSet::new();
    for i in 0..n {
        let w: Vec<usize> = (0..3).map(|k| (i + k) % n).collect();
        for mask in 1..8u32 {
            let mut s: Vec<usize> = (0..3).filter(|b| mask >> b & 1 == 1).map(|b| w[b]).collect();
            s.sort();
            simplices.insert(s);
        }
    }
    let mut values = vec![0.0];
    for s in &simplices {
        for pts in [&p, &q] {
            let d = diam(pts, s);
            values.extend([d, d + eps, d + 2.0 * eps]);
        }
    }
    let grid = Grid::from_unsorted(values).unwrap();
    let build = |pts: &[Vec<f64>]| {
        let list: Vec<(Vec<usize>, f64)> = simplices.iter().map(|s| (s.clone(), diam(pts, s))).collect();
        build_simplicial(&list, FieldSpec::f2(), grid.clone(), false).unwrap()
    };
    let (x, y) = (build(&p), build(&q));
    let step = n.div_ceil(3);
    let arcs: Vec<Vec<usize>> = (0..3).map(|a| (0..step + 2).map(|k| (a * step + k) % n).collect()).collect();
    let cover = |k: &FilteredComplex<f64>| {
        let named = arcs
            .iter()
            .enumerate()
            .map(|(i, arc)| {
                let ids = (0..k.len()).filter(|&c| simplex_of(k, c).iter().all(|v| arc.contains(v)));
                (format!("S{i}"), SubComplex::from_ids(ids))
            })
            .collect();
        Cover::new(k, named).unwrap()
    };
    let same = |a: &FilteredComplex<f64>, b: &FilteredComplex<f64>| {
        let (a2, b2) = (a.clone(), b.clone());
        mvss::carrier::Carrier::from_fn(a.clone(), b.clone(), eps, move |_, c| {
            vec![b2.find_label(a2.cell(c).label.as_ref().unwrap()).unwrap()]
        })
        .unwrap()
    };
    let (cx, cy) = (cover(&x), cover(&y));
    let f = same(&x, &y);
    let g = same(&y, &x);
    PerturbedPair { x, y, cx, cy, f, g, eps }
}

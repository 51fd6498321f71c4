//! Covers by subcomplexes, filtered nerves, refinements and interpolations.

use std::collections::{BTreeMap, BTreeSet};

use crate::complex::{simplicial_from_births, FilteredComplex, SubComplex};
use crate::error::{MvssError, Result};
use crate::grid::Real;

/// A named family of face-closed subcomplexes whose union is everything.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    names: Vec<String>,
    sets: Vec<SubComplex>,
}

impl Cover {
    /// Validate closure, coverage and distinct names.
    pub fn new<R: Real>(complex: &FilteredComplex<R>, named: Vec<(String, SubComplex)>) -> Result<Self> {
        if named.is_empty() {
            return Err(MvssError::input("a cover needs at least one set"));
        }
        let mut seen = BTreeSet::new();
        let mut covered = vec![false; complex.len()];
        for (name, set) in &named {
            if !seen.insert(name.clone()) {
                return Err(MvssError::input(format!("duplicate cover set name {name:?}")));
            }
            if let Some(&bad) = set.members().iter().find(|&&c| c >= complex.len()) {
                return Err(MvssError::input(format!("cover set {name:?} references unknown cell id {bad}")));
            }
            if !complex.is_closed(set) {
                return Err(MvssError::input(format!("cover set {name:?} is not closed under faces")));
            }
            for &c in set.members() {
                covered[c] = true;
            }
        }
        if let Some(miss) = covered.iter().position(|c| !c) {
            return Err(MvssError::input(format!("cell {miss} is not covered")));
        }
        let (names, sets) = named.into_iter().unzip();
        Ok(Self { names, sets })
    }

    /// Close every set under faces first; returns the cover and the names of
    /// the sets that had to be closed.
    pub fn closed<R: Real>(
        complex: &FilteredComplex<R>,
        named: Vec<(String, Vec<usize>)>,
    ) -> Result<(Self, Vec<String>)> {
        let mut warned = Vec::new();
        let mut out = Vec::with_capacity(named.len());
        for (name, ids) in named {
            let raw = SubComplex::from_ids(ids.iter().copied());
            let closed = complex.closure(ids)?;
            if closed != raw {
                warned.push(name.clone());
            }
            out.push((name, closed));
        }
        Ok((Self::new(complex, out)?, warned))
    }

    /// The cover with the single set "X".
    pub fn whole<R: Real>(complex: &FilteredComplex<R>) -> Self {
        Self { names: vec!["X".to_string()], sets: vec![complex.everything()] }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn sets(&self) -> &[SubComplex] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &SubComplex {
        &self.sets[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Intersection of the sets indexed by `sigma`.
    pub fn intersection(&self, sigma: &[usize]) -> SubComplex {
        let mut it = sigma.iter();
        let Some(&first) = it.next() else {
            return SubComplex::default();
        };
        it.fold(self.sets[first].clone(), |acc, &i| acc.intersection(&self.sets[i]))
    }

    /// Add the whole complex as an extra set named `name`.
    pub fn with_whole<R: Real>(&self, complex: &FilteredComplex<R>, name: &str) -> Result<Cover> {
        let mut named: Vec<(String, SubComplex)> = self.names.iter().cloned().zip(self.sets.iter().cloned()).collect();
        named.push((name.to_string(), complex.everything()));
        Cover::new(complex, named)
    }

    /// Restriction of every set to `sub`, dropping empty results; `sub`
    /// becomes the ambient complex via `induced`.
    pub fn restrict<R: Real>(&self, complex: &FilteredComplex<R>, sub: &SubComplex) -> Result<(FilteredComplex<R>, Cover)> {
        let (piece, ids) = complex.induced(sub);
        let new_id: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let named = self
            .names
            .iter()
            .zip(&self.sets)
            .filter_map(|(n, s)| {
                let inter = s.intersection(sub);
                (!inter.is_empty())
                    .then(|| (n.clone(), SubComplex::from_ids(inter.members().iter().map(|c| new_id[c]))))
            })
            .collect();
        let cover = Cover::new(&piece, named)?;
        Ok((piece, cover))
    }
}

/// Filtered nerve: one simplex per family of sets with nonempty intersection,
/// born when the intersection first becomes nonempty.
#[derive(Debug, Clone)]
pub struct Nerve<R = f64> {
    pub complex: FilteredComplex<R>,
}

impl<R: Real> Nerve<R> {
    /// Cover-set indices of nerve cell `id`.
    pub fn simplex(&self, id: usize) -> &[usize] {
        match &self.complex.cell(id).label {
            Some(crate::complex::CellLabel::Simplex(v)) => v,
            _ => unreachable!("nerve cells carry simplex labels"),
        }
    }

    /// All nerve simplices, in cell order.
    pub fn simplices(&self) -> Vec<Vec<usize>> {
        (0..self.complex.len()).map(|i| self.simplex(i).to_vec()).collect()
    }

    pub fn find(&self, sigma: &[usize]) -> Option<usize> {
        self.complex.find_label(&crate::complex::CellLabel::Simplex(sigma.to_vec()))
    }

    /// Largest simplex dimension.
    pub fn dim(&self) -> usize {
        self.complex.max_dim().unwrap_or(0)
    }
}

/// First grid index at which the cells of `set` become nonempty.
pub fn first_birth<R: Real>(complex: &FilteredComplex<R>, set: &SubComplex) -> Option<usize> {
    set.members().iter().map(|&c| complex.cell(c).birth).min()
}

pub fn nerve<R: Real>(complex: &FilteredComplex<R>, cover: &Cover) -> Nerve<R> {
    let mut births: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut frontier: Vec<(Vec<usize>, SubComplex)> = Vec::new();
    for i in 0..cover.len() {
        if let Some(b) = first_birth(complex, cover.set(i)) {
            births.insert(vec![i], b);
            frontier.push((vec![i], cover.set(i).clone()));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (sigma, inter) in &frontier {
            let last = *sigma.last().expect("nonempty simplex");
            for j in last + 1..cover.len() {
                let meet = inter.intersection(cover.set(j));
                if let Some(b) = first_birth(complex, &meet) {
                    let mut s = sigma.clone();
                    s.push(j);
                    births.insert(s.clone(), b);
                    next.push((s, meet));
                }
            }
        }
        frontier = next;
    }
    let complex = simplicial_from_births(births, complex.field(), complex.grid().clone())
        .expect("intersections shrink, so nerve births are monotone");
    Nerve { complex }
}

/// The intersection subcomplex indexed by a nerve simplex, as its own complex.
pub fn piece<R: Real>(complex: &FilteredComplex<R>, cover: &Cover, sigma: &[usize]) -> FilteredComplex<R> {
    complex.induced(&cover.intersection(sigma)).0
}

/// Vertex assignment `V_i ↦ U_{assign[i]}` with `V_i ⊆ U_{assign[i]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementMap {
    pub assign: Vec<usize>,
}

impl RefinementMap {
    /// Image of a simplex of `N_V`, sorted and deduplicated.
    pub fn image(&self, sigma: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = sigma.iter().map(|&i| self.assign[i]).collect();
        set.into_iter().collect()
    }

    /// Check containment for every set.
    pub fn validate(&self, v: &Cover, u: &Cover) -> Result<()> {
        for (i, &j) in self.assign.iter().enumerate() {
            if !v.set(i).is_subset(u.set(j)) {
                return Err(MvssError::hypothesis(format!("{} is not contained in {}", v.name(i), u.name(j))));
            }
        }
        Ok(())
    }
}

/// For each set of `v`, the indices of sets of `u` containing it, ordered by name.
pub fn containing_sets(v: &Cover, u: &Cover) -> Vec<Vec<usize>> {
    let mut by_name: Vec<usize> = (0..u.len()).collect();
    by_name.sort_by(|&a, &b| u.name(a).cmp(u.name(b)));
    (0..v.len())
        .map(|i| by_name.iter().copied().filter(|&j| v.set(i).is_subset(u.set(j))).collect())
        .collect()
}

/// Pick the lexicographically first containing set for every set of `v`.
pub fn find_refinement(v: &Cover, u: &Cover) -> Result<RefinementMap> {
    let options = containing_sets(v, u);
    let bad: Vec<&str> = options.iter().enumerate().filter(|(_, o)| o.is_empty()).map(|(i, _)| v.name(i)).collect();
    if !bad.is_empty() {
        return Err(MvssError::hypothesis(format!("not a refinement: no containing set for {}", bad.join(", "))));
    }
    Ok(RefinementMap { assign: options.iter().map(|o| o[0]).collect() })
}

/// Every valid refinement map, up to `limit` of them.
pub fn all_refinements(v: &Cover, u: &Cover, limit: usize) -> Vec<RefinementMap> {
    let options = containing_sets(v, u);
    if options.iter().any(|o| o.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        out.push(RefinementMap { assign: idx.iter().zip(&options).map(|(&k, o)| o[k]).collect() });
        if out.len() >= limit {
            break;
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
    out
}

/// Sets `U_i ∩ V_j` that are nonempty and not strictly contained in
/// another such set; equal sets keep the first name in order.
pub fn common_refinement<R: Real>(complex: &FilteredComplex<R>, u: &Cover, v: &Cover) -> Result<Cover> {
    let mut cands: Vec<(String, SubComplex)> = Vec::new();
    for i in 0..u.len() {
        for j in 0..v.len() {
            let s = u.set(i).intersection(v.set(j));
            if !s.is_empty() {
                cands.push((format!("{}&{}", u.name(i), v.name(j)), s));
            }
        }
    }
    cands.sort_by(|a, b| a.0.cmp(&b.0));
    Cover::new(complex, undominated(&cands))
}

fn undominated(cands: &[(String, SubComplex)]) -> Vec<(String, SubComplex)> {
    let mut kept = Vec::new();
    for (k, (name, s)) in cands.iter().enumerate() {
        let dominated = cands.iter().enumerate().any(|(l, (_, o))| {
            l != k && s.is_subset(o) && (s.len() < o.len() || l < k)
        });
        if !dominated {
            kept.push((name.clone(), s.clone()));
        }
    }
    kept
}

/// The sets of `cover` not contained in another set; of equal sets the
/// first in cover order is kept. The result and `cover` refine each other.
pub fn maximal_sets<R: Real>(complex: &FilteredComplex<R>, cover: &Cover) -> Result<Cover> {
    let cands: Vec<(String, SubComplex)> = cover.names.iter().cloned().zip(cover.sets.iter().cloned()).collect();
    Cover::new(complex, undominated(&cands))
}

/// `W ∪ {U_τ : dim τ = r}`, where `W` refines `U`.
pub fn interpolation<R: Real>(complex: &FilteredComplex<R>, w: &Cover, u: &Cover, r: usize) -> Result<Cover> {
    find_refinement(w, u)?;
    let mut named: Vec<(String, SubComplex)> = w.names.iter().cloned().zip(w.sets.iter().cloned()).collect();
    let mut used: BTreeSet<String> = w.names.iter().cloned().collect();
    let n = nerve(complex, u);
    for sigma in n.simplices() {
        if sigma.len() != r + 1 {
            continue;
        }
        let base = sigma.iter().map(|&i| u.name(i)).collect::<Vec<_>>().join("^");
        let mut name = format!("[{base}]");
        while used.contains(&name) {
            name.push('\'');
        }
        used.insert(name.clone());
        named.push((name, u.intersection(&sigma)));
    }
    Cover::new(complex, named)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_simplicial;
    use crate::field::FieldSpec;
    use crate::grid::Grid;

    fn segment() -> FilteredComplex<f64> {
        let edges: Vec<(Vec<usize>, f64)> = (0..4).map(|i| (vec![i, i + 1], 0.0)).collect();
        build_simplicial(&edges, FieldSpec::f2(), Grid::new(vec![0.0]).unwrap(), true).unwrap()
    }

    fn span(k: &FilteredComplex<f64>, lo: usize, hi: usize) -> SubComplex {
        let ids = (lo..hi).map(|i| k.find_label(&crate::complex::CellLabel::Simplex(vec![i, i + 1])).unwrap());
        k.closure(ids).unwrap()
    }

    #[test]
    fn segment_halves() {
        let k = segment();
        let u = Cover::new(&k, vec![("a".into(), span(&k, 0, 2)), ("b".into(), span(&k, 2, 4))]).unwrap();
        let v = Cover::new(&k, vec![("c".into(), span(&k, 0, 1)), ("d".into(), span(&k, 1, 4))]).unwrap();
        assert_eq!(nerve(&k, &u).complex.len(), 3);
        let w = common_refinement(&k, &u, &v).unwrap();
        assert_eq!(w.len(), 3);
        assert!(find_refinement(&w, &u).is_ok());
        assert!(find_refinement(&w, &v).is_ok());
        assert!(find_refinement(&u, &v).is_err());
    }
}

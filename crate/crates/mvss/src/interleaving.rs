//! Shifted morphisms of persistence modules, interleaving verification and
//! the left/right composition construction.

use crate::error::{MvssError, Result};
use crate::field::{Matrix, Quotient, Subspace};
use crate::grid::Real;
use crate::persistence::PersistenceModule;

/// A family `M_t → N_{target(t)}` with monotone targets `target(t) ≥ t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedMorphism {
    pub targets: Vec<usize>,
    pub mats: Vec<Matrix>,
}

impl ShiftedMorphism {
    pub fn new(targets: Vec<usize>, mats: Vec<Matrix>) -> Self {
        assert_eq!(targets.len(), mats.len(), "one matrix per grid index");
        Self { targets, mats }
    }

    /// Unshifted morphism from pointwise matrices.
    pub fn unshifted(mats: Vec<Matrix>) -> Self {
        Self { targets: (0..mats.len()).collect(), mats }
    }

    /// Structure-map morphism `M_t → M_{target(t)}`.
    pub fn shift_of<R: Real>(m: &PersistenceModule<R>, targets: Vec<usize>) -> Self {
        let mats = targets.iter().enumerate().map(|(t, &u)| m.structure_map(t, u)).collect();
        Self { targets, mats }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ShiftedMorphism) -> ShiftedMorphism {
        let targets = self.targets.iter().map(|&u| next.targets[u]).collect();
        let mats = self.mats.iter().zip(&self.targets).map(|(m, &u)| next.mats[u].mul(m)).collect();
        ShiftedMorphism { targets, mats }
    }

    /// Postcompose with structure maps of `n` so that each target becomes
    /// `new_targets[t]`.
    pub fn push_to<R: Real>(&self, n: &PersistenceModule<R>, new_targets: &[usize]) -> ShiftedMorphism {
        let mats = self
            .mats
            .iter()
            .zip(&self.targets)
            .zip(new_targets)
            .map(|((m, &u), &v)| n.structure_map(u, v).mul(m))
            .collect();
        ShiftedMorphism { targets: new_targets.to_vec(), mats }
    }
}

/// Check that a shifted family commutes with structure maps.
pub fn check_natural<R: Real>(
    src: &PersistenceModule<R>,
    dst: &PersistenceModule<R>,
    f: &ShiftedMorphism,
) -> std::result::Result<(), String> {
    let g = src.grid().len();
    for t in 0..g {
        let m = &f.mats[t];
        if m.cols() != src.dim(t) || m.rows() != dst.dim(f.targets[t]) {
            return Err(format!("shape mismatch at grid index {t}"));
        }
        if f.targets[t] < t {
            return Err(format!("target index {} precedes source index {t}", f.targets[t]));
        }
    }
    for t in 0..g.saturating_sub(1) {
        let (u, v) = (f.targets[t], f.targets[t + 1]);
        if v < u {
            return Err(format!("targets not monotone at grid index {t}"));
        }
        let lhs = f.mats[t + 1].mul(&src.maps()[t]);
        let rhs = dst.structure_map(u, v).mul(&f.mats[t]);
        if lhs != rhs {
            return Err(format!("naturality fails between grid indices {t} and {}", t + 1));
        }
    }
    Ok(())
}

/// Verify that `psi: A → B` and `phi: B → A` form an interleaving: both are
/// natural and each round trip equals the structure map to its landing index.
pub fn verify_interleaving<R: Real>(
    a: &PersistenceModule<R>,
    b: &PersistenceModule<R>,
    psi: &ShiftedMorphism,
    phi: &ShiftedMorphism,
) -> std::result::Result<(), String> {
    check_natural(a, b, psi).map_err(|e| format!("psi: {e}"))?;
    check_natural(b, a, phi).map_err(|e| format!("phi: {e}"))?;
    let aba = psi.then(phi);
    for t in 0..a.grid().len() {
        if aba.mats[t] != a.structure_map(t, aba.targets[t]) {
            return Err(format!("phi after psi differs from the shift of A at grid index {t}"));
        }
    }
    let bab = phi.then(psi);
    for t in 0..b.grid().len() {
        if bab.mats[t] != b.structure_map(t, bab.targets[t]) {
            return Err(format!("psi after phi differs from the shift of B at grid index {t}"));
        }
    }
    Ok(())
}

/// Output of [`compose_left_right`].
#[derive(Debug, Clone)]
pub struct LeftRightCertificate<R = f64> {
    pub eps: R,
    /// The composite `A → C`, unshifted.
    pub phi: ShiftedMorphism,
    /// The constructed `C → A` landing two `eps`-shifts later.
    pub psi: ShiftedMorphism,
}

/// From `f: A → B` with `eps`-trivial kernel and `g: B → C` with
/// `eps`-trivial cokernel, build `Ψ = Σ_A ∘ Φ⁻¹ ∘ Σ_C` for `Φ = g ∘ f`.
pub fn compose_left_right<R: Real>(
    a: &PersistenceModule<R>,
    b: &PersistenceModule<R>,
    c: &PersistenceModule<R>,
    f: &[Matrix],
    g: &[Matrix],
    eps: R,
) -> Result<LeftRightCertificate<R>> {
    let phi: Vec<Matrix> = f.iter().zip(g).map(|(fm, gm)| gm.mul(fm)).collect();
    let fm = ShiftedMorphism::unshifted(f.to_vec());
    let gm = ShiftedMorphism::unshifted(g.to_vec());
    check_natural(a, b, &fm).map_err(|e| MvssError::input(format!("f: {e}")))?;
    check_natural(b, c, &gm).map_err(|e| MvssError::input(format!("g: {e}")))?;
    lift_through(a, c, &phi, eps)
}

/// The Ψ construction for a single unshifted morphism `Φ: A → C`.
pub fn lift_through<R: Real>(
    a: &PersistenceModule<R>,
    c: &PersistenceModule<R>,
    phi: &[Matrix],
    eps: R,
) -> Result<LeftRightCertificate<R>> {
    let grid = a.grid();
    let n = grid.len();
    let once: Vec<usize> = (0..n).map(|t| grid.shift_index(t, eps)).collect();
    let mut targets = Vec::with_capacity(n);
    let mut mats = Vec::with_capacity(n);
    for t in 0..n {
        let u = once[t];
        let w = once[u];
        let sigma_c = c.structure_map(t, u);
        let z = phi[u].solve(&sigma_c).ok_or_else(|| {
            MvssError::hypothesis(format!(
                "the shift of C at grid value {} is not in the image of the composite",
                grid.value(t)
            ))
        })?;
        let sigma_a = a.structure_map(u, w);
        let ker = phi[u].kernel();
        if !sigma_a.mul(&ker).is_zero() {
            return Err(MvssError::hypothesis(format!(
                "the kernel of the composite at grid value {} survives the shift of A",
                grid.value(u)
            )));
        }
        targets.push(w);
        mats.push(sigma_a.mul(&z));
    }
    let psi = ShiftedMorphism::new(targets, mats);
    let phi = ShiftedMorphism::unshifted(phi.to_vec());
    verify_interleaving(a, c, &phi, &psi).map_err(MvssError::invariant)?;
    Ok(LeftRightCertificate { eps: eps + eps, phi, psi })
}

/// Kernel of an unshifted morphism `A → C` given by pointwise matrices.
pub fn kernel_module<R: Real>(a: &PersistenceModule<R>, mats: &[Matrix]) -> PersistenceModule<R> {
    let field = a.field();
    let bases: Vec<Matrix> = mats.iter().map(|m| m.kernel()).collect();
    let dims = bases.iter().map(|k| k.cols()).collect();
    let maps = (0..bases.len().saturating_sub(1))
        .map(|t| {
            let img = a.maps()[t].mul(&bases[t]);
            if bases[t + 1].cols() == 0 {
                return Matrix::zeros(field, 0, bases[t].cols());
            }
            bases[t + 1].solve(&img).expect("structure maps preserve kernels of natural maps")
        })
        .collect();
    PersistenceModule::new(field, a.grid().clone(), dims, maps).expect("consistent kernel shapes")
}

/// Cokernel of an unshifted morphism `A → C` given by pointwise matrices.
pub fn cokernel_module<R: Real>(c: &PersistenceModule<R>, mats: &[Matrix]) -> PersistenceModule<R> {
    let field = c.field();
    let qs: Vec<Quotient> = mats
        .iter()
        .enumerate()
        .map(|(t, m)| {
            let all = Subspace::from_independent(Matrix::identity(field, c.dim(t)));
            let img = if m.cols() == 0 { Subspace::zero(field, c.dim(t)) } else { Subspace::span(m) };
            Quotient::new(&all, img)
        })
        .collect();
    let dims = qs.iter().map(|q| q.dim()).collect();
    let maps = (0..qs.len().saturating_sub(1))
        .map(|t| {
            let img = c.maps()[t].mul(qs[t].reps());
            qs[t + 1].coords(&img).expect("every vector lies in the whole space")
        })
        .collect();
    PersistenceModule::new(field, c.grid().clone(), dims, maps).expect("consistent cokernel shapes")
}

/// Approximate inverse `C → A` of an unshifted `Φ: A → C`, landing at
/// `targets[t]`. At each `t` an intermediate index `u` is sought at which
/// the shift of `C` factors through `Φ_u` and the kernel of `Φ_u` dies
/// before `targets[t]`; `None` when no such index exists.
pub fn lift_within<R: Real>(
    a: &PersistenceModule<R>,
    c: &PersistenceModule<R>,
    phi: &[Matrix],
    targets: &[usize],
) -> Option<ShiftedMorphism> {
    let mut mats = Vec::with_capacity(targets.len());
    for (t, &w) in targets.iter().enumerate() {
        let found = (t..=w).find_map(|u| {
            let z = phi[u].solve(&c.structure_map(t, u))?;
            let sigma = a.structure_map(u, w);
            sigma.mul(&phi[u].kernel()).is_zero().then(|| sigma.mul(&z))
        })?;
        mats.push(found);
    }
    Some(ShiftedMorphism::new(targets.to_vec(), mats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::grid::Grid;

    #[test]
    fn identity_case() {
        let f = FieldSpec::f2();
        let grid = Grid::new(vec![0.0, 1.0]).unwrap();
        let m = PersistenceModule::new(f, grid, vec![1, 1], vec![Matrix::identity(f, 1)]).unwrap();
        let id = vec![Matrix::identity(f, 1); 2];
        let cert = compose_left_right(&m, &m, &m, &id, &id, 0.0).unwrap();
        assert_eq!(cert.psi.mats, id);
    }
}

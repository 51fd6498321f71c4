mod common;

use common::*;
use mvss::serre::cover_sequence;
use mvss::spectral::{check_page_interleaving, e_infinity_check, identity_morphism, SpectralSequence};
use mvss::{FieldSpec, FilteredComplex64};
use proptest::prelude::*;

/// Compare every page of `ss` with the dense oracle on the blowup.
fn pages_agree(x: &FilteredComplex64, cover: &mvss::cover::Cover) -> Result<(), String> {
    let seq = cover_sequence(x, cover).map_err(|e| e.to_string())?;
    let (k, col) = (&seq.blowup.complex, &seq.blowup.column);
    let ss = &seq.ss;
    let top = ss.top();
    let (lo, hi) = ss.p_range();
    let g = x.grid().len();
    for r in 1..=ss.last_page() {
        for p in lo..=hi {
            for n in 0..=top {
                for t in 0..g {
                    let want = page_dim(k, col, r, p, n, t);
                    let got = ss.dim(r, p, n as i64 - p, t);
                    if want != got {
                        return Err(format!("E^{r}_({p},{}) at t={t}: library {got}, oracle {want}", n as i64 - p));
                    }
                }
            }
        }
    }
    let far = top + 3;
    for n in 0..=top {
        for t in 0..g {
            let total: usize = (lo..=hi).map(|p| page_dim(k, col, far, p, n, t)).sum();
            if total != betti(k, n, t) {
                return Err(format!("oracle E^inf does not converge in degree {n} at t={t}"));
            }
            let lib: usize = (lo..=hi).map(|p| ss.dim(ss.last_page(), p, n as i64 - p, t)).sum();
            if lib != total {
                return Err(format!("E^inf total in degree {n} at t={t}: library {lib}, oracle {total}"));
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn pages_match_the_dense_filtration_oracle(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 2, 6, 3, FieldSpec::new(p).unwrap());
        let cover = random_cover(&mut r, &k, 3);
        prop_assert_eq!(pages_agree(&k, &cover), Ok(()));
    }

    #[test]
    fn infinity_page_converges_to_the_space(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 3, 6, 3, FieldSpec::new(3).unwrap());
        let cover = random_cover(&mut r, &k, 4);
        let seq = cover_sequence(&k, &cover).unwrap();
        prop_assert!(e_infinity_check(&seq.ss, &k).is_ok());
        prop_assert!(seq.ss.check_page_recursion().is_ok());
    }

    #[test]
    fn adjoining_the_whole_space_kills_positive_columns(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 2, 7, 3, FieldSpec::f2());
        let cover = random_cover(&mut r, &k, 3).with_whole(&k, "X").unwrap();
        let seq = cover_sequence(&k, &cover).unwrap();
        for ((p, q), b) in seq.nonzero_entries(2) {
            prop_assert!(p == 0, "E2({},{}) has bars {:?}", p, q, b.bars);
        }
    }
}

#[test]
fn fixture_pages_match_the_oracle() {
    for fx in [mvss::fixtures::fig4(), mvss::fixtures::fig6(0.5)] {
        for (name, cover) in &fx.covers {
            pages_agree(&fx.complex, cover).unwrap_or_else(|e| panic!("{} {name}: {e}", fx.name));
        }
    }
}

#[test]
fn fig6_page_two_for_the_four_squares() {
    let fx = mvss::fixtures::fig6(0.5);
    let seq = cover_sequence(&fx.complex, fx.cover("V")).unwrap();
    let entries: Vec<((i64, i64), Vec<(f64, f64)>)> =
        seq.nonzero_entries(2).into_iter().map(|(pq, b)| (pq, bars_f64(&b))).collect();
    assert_eq!(
        entries,
        vec![((0, 0), vec![(0.0, f64::INFINITY)]), ((1, 0), vec![(0.0, 1.5), (1.0, 1.5)])]
    );
}

#[test]
fn identity_morphism_interleaves_at_zero() {
    let fx = mvss::fixtures::fig4();
    let seq = cover_sequence(&fx.complex, fx.cover("U1")).unwrap();
    let ss: &SpectralSequence = &seq.ss;
    let id = identity_morphism(ss, ss.last_page());
    let rep = check_page_interleaving(ss, ss, &id, &id, 0.0, 1);
    assert!(rep.holds(), "{:?}", rep.failure);
}

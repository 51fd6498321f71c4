mod common;

use common::*;
use mvss::complex::{build_cubical, build_simplicial, build_vietoris_rips, distance_grid};
use mvss::persistence::{barcode_from_rank, compute_ph, homology_module, IndexBar, RankFunction};
use mvss::{bottleneck, Bar, Barcode, FieldSpec, Grid, Matrix, Quotient, Subspace};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 7])
}

fn matrix_strategy() -> impl Strategy<Value = (u32, Vec<Vec<u32>>)> {
    (field_strategy(), 1usize..6, 1usize..7).prop_flat_map(|(p, r, c)| {
        (Just(p), prop::collection::vec(prop::collection::vec(0..p, c), r))
    })
}

fn to_i64(rows: &[Vec<u32>]) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_matches_dense_elimination((p, rows) in matrix_strategy()) {
        let f = FieldSpec::new(p).unwrap();
        let m = Matrix::from_rows(f, &rows);
        prop_assert_eq!(m.rank(), rank(p as i64, &to_i64(&rows), rows[0].len()));
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn kernel_is_annihilated_and_full((p, rows) in matrix_strategy()) {
        let f = FieldSpec::new(p).unwrap();
        let m = Matrix::from_rows(f, &rows);
        let k = m.kernel();
        prop_assert!(m.mul(&k).is_zero());
        prop_assert_eq!(k.cols(), m.cols() - m.rank());
        prop_assert_eq!(k.rank(), k.cols());
    }

    #[test]
    fn solve_recovers_a_consistent_right_hand_side((p, rows) in matrix_strategy(), seed in any::<u64>()) {
        let f = FieldSpec::new(p).unwrap();
        let m = Matrix::from_rows(f, &rows);
        let x: Vec<u32> = (0..m.cols()).map(|i| ((seed >> (i % 60)) as u32) % p).collect();
        let rhs = Matrix::from_columns(f, m.rows(), &[m.mul_vec(&x)]);
        let sol = m.solve(&rhs).expect("consistent system");
        prop_assert_eq!(m.mul(&sol), rhs);
    }

    #[test]
    fn quotient_dimension_is_the_difference((p, rows) in matrix_strategy()) {
        let f = FieldSpec::new(p).unwrap();
        let m = Matrix::from_rows(f, &rows);
        let num = Subspace::span(&m);
        let half = Subspace::span(&m.select_cols(&(0..m.cols() / 2).collect::<Vec<_>>()));
        let q = Quotient::new(&num, half.clone());
        prop_assert_eq!(q.dim(), num.dim() - half.dim());
        for j in 0..m.cols() {
            let col = m.select_cols(&[j]);
            prop_assert!(q.coords(&col).is_some());
        }
    }

    #[test]
    fn barcodes_match_the_rank_oracle(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3])) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 3, 7, 4, FieldSpec::new(p).unwrap());
        let ph = compute_ph(&k, 2);
        for n in 0..=2 {
            prop_assert_eq!(as_index_bars(&ph[n], k.grid()), sorted(oracle_bars(&k, n)), "degree {}", n);
        }
    }

    #[test]
    fn rank_round_trip_recovers_bars(bars in prop::collection::vec((0usize..5, prop::option::of(1usize..6)), 0..8)) {
        let g = 6;
        let bars: Vec<IndexBar> = bars
            .into_iter()
            .map(|(b, d)| IndexBar::new(b, d.map(|d| (b + d).min(g)).filter(|&d| d < g)))
            .collect();
        let rf = RankFunction::from_bars(g, &bars);
        let mut back = barcode_from_rank(&rf).unwrap();
        let mut want = bars.clone();
        let key = |x: &IndexBar| (x.birth, x.death.unwrap_or(usize::MAX));
        back.sort_by_key(key);
        want.sort_by_key(key);
        prop_assert_eq!(back, want);
    }

    #[test]
    fn bottleneck_matches_the_matching_oracle(
        a in prop::collection::vec((0u8..6, 1u8..5), 0..5),
        b in prop::collection::vec((0u8..6, 1u8..5), 0..5),
    ) {
        let mk = |v: &[(u8, u8)]| Barcode::new(0, v.iter().map(|&(s, l)| Bar::finite(s as f64 * 0.5, (s + l) as f64 * 0.5)).collect());
        let (ba, bb) = (mk(&a), mk(&b));
        let d = bottleneck(&ba, &bb);
        prop_assert!((d - oracle_bottleneck(&bars_f64(&ba), &bars_f64(&bb))).abs() < 1e-12);
        prop_assert!((d - bottleneck(&bb, &ba)).abs() < 1e-12);
        prop_assert_eq!(bottleneck(&ba, &ba), 0.0);
    }

    #[test]
    fn rips_barcodes_are_stable_under_perturbation(seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let x: Vec<Vec<f64>> = (0..7).map(|_| vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).collect();
        let y: Vec<Vec<f64>> = x.iter().map(|p| vec![p[0] + r.gen_range(-0.05..0.05), p[1] + r.gen_range(-0.05..0.05)]).collect();
        let grid = distance_grid(&[&x, &y]).unwrap();
        let kx = build_vietoris_rips(&x, 2, FieldSpec::f2(), grid.clone()).unwrap();
        let ky = build_vietoris_rips(&y, 2, FieldSpec::f2(), grid).unwrap();
        let dh = oracle_hausdorff(&x, &y);
        let (px, py) = (compute_ph(&kx, 1), compute_ph(&ky, 1));
        for k in 0..=1 {
            prop_assert!(bottleneck(&px[k], &py[k]) <= 2.0 * dh + 1e-9);
        }
    }
}

#[test]
fn boundary_of_boundary_vanishes_over_odd_primes() {
    let mut r = rng(11);
    for _ in 0..10 {
        let k = random_simplicial(&mut r, 6, 3, 8, 3, FieldSpec::new(5).unwrap());
        for n in 2..=k.max_dim().unwrap_or(0) {
            assert!(k.full_boundary(n - 1).mul(&k.full_boundary(n)).is_zero());
        }
    }
}

#[test]
fn fig4_fixture_loads_with_its_cell_count() {
    let fx = mvss::fixtures::fig4();
    let k = &fx.complex;
    assert_eq!(k.count_dim(0), 8);
    assert_eq!(k.count_dim(1), 10);
    assert_eq!(k.count_dim(2), 3);
    let ph = compute_ph(k, 1);
    assert_eq!(as_index_bars(&ph[1], k.grid()), sorted(oracle_bars(k, 1)));
    assert_eq!(as_index_bars(&ph[1], k.grid()), vec![(0, Some(3))]);
}

#[test]
fn cubical_faces_inherit_the_earliest_listed_birth() {
    let grid = Grid::new(vec![0.0, 1.0]).unwrap();
    let k = build_cubical(&[(vec![(0, 1), (0, 1)], 1.0), (vec![(0, 1), (0, 0)], 0.0)], FieldSpec::f2(), grid).unwrap();
    assert_eq!(k.len(), 9);
    let ph = compute_ph(&k, 1);
    assert_eq!(as_index_bars(&ph[0], k.grid()), sorted(oracle_bars(&k, 0)));
    assert_eq!(as_index_bars(&ph[1], k.grid()), sorted(oracle_bars(&k, 1)));
}

#[test]
fn missing_faces_are_rejected_without_autocomplete() {
    let grid = Grid::new(vec![0.0]).unwrap();
    let err = build_simplicial(&[(vec![0, 1, 2], 0.0)], FieldSpec::f2(), grid, false).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn homology_module_ranks_agree_with_the_oracle() {
    let mut r = rng(5);
    for _ in 0..8 {
        let k = random_simplicial(&mut r, 5, 2, 6, 4, FieldSpec::new(3).unwrap());
        for n in 0..=1 {
            let m = homology_module(&k, n);
            let rf = m.rank_function();
            for s in 0..4 {
                for t in s..4 {
                    assert_eq!(rf.rank(s, t), persistent_rank(&k, n, s, t));
                }
            }
        }
    }
}

#[test]
fn single_precision_grids_give_the_same_bars() {
    let g32 = Grid::<f32>::new(vec![0.0, 0.5, 1.5]).unwrap();
    let k32 = build_simplicial(
        &[(vec![0, 1], 0.0f32), (vec![1, 2], 0.0), (vec![0, 2], 0.5), (vec![0, 1, 2], 1.5)],
        FieldSpec::f2(),
        g32,
        true,
    )
    .unwrap();
    let ph = compute_ph(&k32, 1);
    assert_eq!(ph[1].bars, vec![Bar::finite(0.5f32, 1.5)]);
}

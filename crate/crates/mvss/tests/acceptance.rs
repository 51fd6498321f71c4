//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Every expected value is either a fixture constant or recomputed here by
//! the dense oracles in `common`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use mvss::carrier::{
    check_acyclic, induced_ranks, synthesize_chain_map, synthesize_chain_map_with, synthesize_homotopy, verify_carried,
    verify_chain_map, verify_equivalence, verify_homotopy, vr_carrier, Carrier,
};
use mvss::complex::build_simplicial;
use mvss::cover::{all_refinements, find_refinement, piece};
use mvss::diagram::{cover_diagram, join_diagram, realization, total_complex_check};
use mvss::persistence::compute_ph;
use mvss::serre::{
    build_cover_pair_complex, carrier_page_interleaving, cech_complex, cover_sequence, inverse_refinement,
    local_checks, null_or_identity, page_bottleneck, pair_pages, refinement_ss_morphism, same_on_page, Which,
};
use mvss::spectral::e_infinity_check;
use mvss::{FieldSpec, FilteredComplex64};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn field(p: u32) -> FieldSpec {
    FieldSpec::new(p).unwrap()
}

/// A random complex with at most `cap` cells.
fn small_complex(r: &mut Rng8, top: usize, cap: usize, p: u32) -> FilteredComplex64 {
    loop {
        let k = random_simplicial(r, 6, top, 6, 3, field(p));
        if k.len() <= cap {
            return k;
        }
    }
}

fn fig8_barcodes() -> Outcome {
    let fx = mvss::fixtures::fig6(0.5);
    let (x, u, v) = (&fx.complex, fx.cover("U"), fx.cover("V"));
    let squares = vec![(0.0, 1.5), (1.0, 1.5)];
    let cech = bars_f64(&cech_complex(x, v, 0).map_err(err)?.barcode(1));
    ensure(cech == squares, || format!("Cech H1(V; PH0) = {cech:?}"))?;
    let cpc0 = build_cover_pair_complex(x, v, u, 0).map_err(err)?;
    let first = bars_f64(&pair_pages(&cpc0, Which::First).barcode(2, 1, 0));
    ensure(first == squares, || format!("first E2(1,0) = {first:?}"))?;
    let second = bars_f64(&pair_pages(&cpc0, Which::Second).barcode(2, 0, 1));
    ensure(second == vec![(0.0, 1.0)], || format!("second E2(0,1) = {second:?}"))?;
    let cpc1 = build_cover_pair_complex(x, v, u, 1).map_err(err)?;
    let e1 = pair_pages(&cpc1, Which::Second).barcode(1, 0, 0);
    ensure(e1.is_empty(), || format!("second E1(0,0) for PH1 = {:?}", bars_f64(&e1)))?;
    let pieces: Vec<(f64, f64)> = (0..u.len()).flat_map(|i| bars_f64(&compute_ph(&piece(x, u, &[i]), 1)[1])).collect();
    ensure(pieces == vec![(1.0, 1.5), (1.0, 1.5)], || format!("PH1 of the U pieces = {pieces:?}"))?;
    Ok("squares [0,1.5) [1,1.5); second page [0,1)".into())
}

fn fig8_inverse() -> Outcome {
    let fx = mvss::fixtures::fig6(0.5);
    let cert = inverse_refinement(&fx.complex, fx.cover("U"), fx.cover("V"), None).map_err(err)?;
    ensure(cert.eps == 0.5 && cert.nu == 0.5, || format!("eps {} nu {}", cert.eps, cert.nu))?;
    ensure(cert.generic_bound == 2.0 && cert.generic.holds(), || format!("generic {:?}", cert.generic.failure))?;
    let (bound, rep) = cert.position_aware.ok_or("no position-aware certificate")?;
    ensure(bound == 1.0 && rep.holds(), || format!("position-aware {bound}: {:?}", rep.failure))?;
    Ok("eps 0.5, nu 0.5, generic 2, position-aware 1".into())
}

fn fig4_chain() -> Outcome {
    let fx = mvss::fixtures::fig4();
    let names = ["U0", "U1", "U2"];
    let seqs = names.iter().map(|n| cover_sequence(&fx.complex, fx.cover(n))).collect::<Result<Vec<_>, _>>().map_err(err)?;
    for i in 0..2 {
        let rho = find_refinement(fx.cover(names[i]), fx.cover(names[i + 1])).map_err(err)?;
        let m = refinement_ss_morphism(&seqs[i], &seqs[i + 1], &rho).map_err(err)?;
        null_or_identity(&m, &seqs[i].ss, &seqs[i + 1].ss, 2).map_err(|e| format!("{}→{}: {e}", names[i], names[i + 1]))?;
    }
    let mut checked = 0;
    for s in &seqs {
        let (k, col) = (&s.blowup.complex, &s.blowup.column);
        let (lo, hi) = s.ss.p_range();
        for t in 0..fx.complex.grid().len() {
            for p in lo..=hi {
                for n in 0..=s.ss.top() {
                    let (want, got) = (page_dim(k, col, 2, p, n, t), s.ss.dim(2, p, n as i64 - p, t));
                    ensure(want == got, || format!("E2({p},{}) at t={t}: {got} vs oracle {want}", n as i64 - p))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("null-or-identity on both steps, {checked} page-2 dimensions match"))
}

fn adjoined_vanishing() -> Outcome {
    let mut r = rng(401);
    for i in 0..25 {
        let k = small_complex(&mut r, 2, 40, 2);
        let cover = random_cover(&mut r, &k, 3).with_whole(&k, "X").map_err(err)?;
        let seq = cover_sequence(&k, &cover).map_err(err)?;
        for ((p, q), _) in seq.nonzero_entries(2) {
            ensure(p == 0, || format!("instance {i}: E2({p},{q}) is nonzero"))?;
        }
    }
    Ok("25 instances".into())
}

fn blowup_fidelity() -> Outcome {
    let mut r = rng(501);
    for i in 0..25 {
        let p = [2, 3][i % 2];
        let k = small_complex(&mut r, 3, 60, p);
        let cover = random_cover(&mut r, &k, 3);
        let b = realization(&cover_diagram(&k, &cover).map_err(err)?).map_err(err)?;
        let ph = compute_ph(&b.complex, 2);
        for n in 0..=2 {
            let (got, want) = (as_index_bars(&ph[n], b.complex.grid()), sorted(oracle_bars(&k, n)));
            ensure(got == want, || format!("instance {i} degree {n}: {got:?} vs {want:?}"))?;
        }
    }
    Ok("25 instances, degrees 0..2".into())
}

fn join_fidelity() -> Outcome {
    let mut cases: Vec<(String, FilteredComplex64, Vec<Vec<usize>>)> = Vec::new();
    for fx in [mvss::fixtures::fig2_join(), mvss::fixtures::seven_simplex_join()] {
        cases.push((fx.name.clone(), fx.complex.clone(), fx.partition.clone().unwrap()));
    }
    let mut r = rng(601);
    for i in 0..25 {
        let k = random_simplicial_with(&mut r, 6, 2, 6, 3, field(3), true);
        let blocks = random_partition(&mut r, 6, 3);
        cases.push((format!("random {i}"), k, blocks));
    }
    for (name, k, blocks) in &cases {
        let b = realization(&join_diagram(k, blocks).map_err(err)?).map_err(err)?;
        let top = k.max_dim().unwrap_or(0).min(3);
        let ph = compute_ph(&b.complex, top);
        for n in 0..=top {
            let (got, want) = (as_index_bars(&ph[n], b.complex.grid()), sorted(oracle_bars(k, n)));
            ensure(got == want, || format!("{name} degree {n}: {got:?} vs {want:?}"))?;
        }
    }
    Ok(format!("{} complexes", cases.len()))
}

fn convergence() -> Outcome {
    let mut cases: Vec<(FilteredComplex64, mvss::cover::Cover)> = Vec::new();
    for fx in [mvss::fixtures::fig4(), mvss::fixtures::fig6(0.5)] {
        for c in fx.covers.values() {
            cases.push((fx.complex.clone(), c.clone()));
        }
    }
    let mut r = rng(701);
    for _ in 0..15 {
        let k = small_complex(&mut r, 3, 60, 3);
        let c = random_cover(&mut r, &k, 4);
        cases.push((k, c));
    }
    for (i, (k, c)) in cases.iter().enumerate() {
        let seq = cover_sequence(k, c).map_err(err)?;
        e_infinity_check(&seq.ss, k).map_err(|e| format!("case {i}: {e}"))?;
    }
    Ok(format!("{} covers", cases.len()))
}

fn total_complex() -> Outcome {
    let mut count = 0;
    let mut widest = 0;
    for fx in [mvss::fixtures::fig4(), mvss::fixtures::fig6(0.5)] {
        for p in [2, 3] {
            let k = over_field(&fx.complex, field(p));
            for (name, cover) in &fx.covers {
                let c = transfer_cover(&fx.complex, &k, cover);
                let d = cover_diagram(&k, &c).map_err(err)?;
                widest = widest.max(d.index().max_dim().unwrap_or(0));
                total_complex_check(&d).map_err(|e| format!("{} {name} over F{p}: {e}", fx.name))?;
                count += 1;
            }
        }
    }
    ensure(widest >= 3, || format!("widest column {widest}"))?;
    Ok(format!("{count} diagrams over F2 and F3, columns up to {widest}"))
}

fn carrier_synthesis() -> Outcome {
    let mut r = rng(901);
    for i in 0..25 {
        let x = random_simplicial(&mut r, 5, 2, 6, 3, field([2, 3][i % 2]));
        let full = vec![((0..5).collect::<Vec<_>>(), 0.0)];
        let y = build_simplicial(&full, x.field(), x.grid().clone(), true).map_err(err)?;
        let g: Vec<usize> = (0..5).map(|_| r.gen_range(0..5)).collect();
        let (xs, ys) = (x.clone(), y.clone());
        let c = Carrier::from_fn(x, y, 0.0, move |_, c| {
            let mut v = simplex_of(&xs, c);
            v.extend(v.clone().into_iter().map(|a| g[a]));
            v.sort();
            v.dedup();
            vec![ys.find_label(&mvss::CellLabel::Simplex(v)).unwrap()]
        })
        .map_err(err)?;
        check_acyclic(&c).map_err(|e| format!("instance {i}: {e:?}"))?;
        let f = synthesize_chain_map(&c).map_err(err)?;
        verify_chain_map(&c, &f).map_err(|e| format!("instance {i}: {e}"))?;
        verify_carried(&c, &f).map_err(|e| format!("instance {i}: {e}"))?;
        let g = synthesize_chain_map_with(&c, 1 + i as u64).map_err(err)?;
        let h = synthesize_homotopy(&c, &f, &g).map_err(err)?;
        verify_homotopy(&c, &f, &g, &h).map_err(|e| format!("instance {i}: {e}"))?;
        for n in 0..=2 {
            ensure(induced_ranks(&c, &f, n) == induced_ranks(&c, &g, n), || format!("instance {i}: ranks differ in degree {n}"))?;
        }
    }
    Ok("25 carriers, two syntheses each".into())
}

fn vr_stability() -> Outcome {
    let mut r = rng(1001);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let n = r.gen_range(6..=12);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).collect();
        let y: Vec<Vec<f64>> = x.iter().map(|p| vec![p[0] + r.gen_range(-0.1..0.1), p[1] + r.gen_range(-0.1..0.1)]).collect();
        let pack = vr_carrier(&x, &y, 2, field(2)).map_err(err)?;
        let dh = oracle_hausdorff(&x, &y);
        ensure((pack.eps - 2.0 * dh).abs() < 1e-12, || format!("pair {i}: eps {} vs 2 d_H {}", pack.eps, 2.0 * dh))?;
        verify_equivalence(&pack, 1).map_err(|e| format!("pair {i}: {e}"))?;
        let (px, py) = (compute_ph(pack.f.source(), 1), compute_ph(pack.f.target(), 1));
        for k in 0..=1 {
            let d = oracle_bottleneck(&bars_f64(&px[k]), &bars_f64(&py[k]));
            ensure(d <= pack.eps + 1e-9, || format!("pair {i} degree {k}: bottleneck {d} > {}", pack.eps))?;
            worst = worst.max(d / pack.eps);
        }
    }
    Ok(format!("10 pairs, worst bottleneck/eps {worst:.3}"))
}

fn refinement_independence() -> Outcome {
    for seed in 0..10 {
        let (k, u, v) = refinement_pair(1100 + seed, 2);
        let (sv, su) = (cover_sequence(&k, &v).map_err(err)?, cover_sequence(&k, &u).map_err(err)?);
        let maps = all_refinements(&v, &u, 4);
        let first = refinement_ss_morphism(&sv, &su, &maps[0]).map_err(err)?;
        for rho in &maps[1..] {
            let other = refinement_ss_morphism(&sv, &su, rho).map_err(err)?;
            same_on_page(&first, &other, &sv.ss, &su.ss, 2).map_err(|e| format!("pair {seed}: {e}"))?;
        }
    }
    Ok("10 pairs with at least two maps".into())
}

fn local_check_bounds() -> Outcome {
    let fx = mvss::fixtures::fig4();
    let rep = local_checks(&fx.complex, fx.cover("U0"), fx.cover("U2")).map_err(err)?;
    let (s0, s2) = (cover_sequence(&fx.complex, fx.cover("U0")).map_err(err)?, cover_sequence(&fx.complex, fx.cover("U2")).map_err(err)?);
    let d = page_bottleneck(&s0, &s2, 2);
    ensure(d <= rep.bound, || format!("fig4: distance {d} > bound {}", rep.bound))?;
    for seed in 0..10 {
        let (k, u, v) = refinement_pair(1200 + seed, 1);
        let rep = local_checks(&k, &v, &u).map_err(err)?;
        let (sv, su) = (cover_sequence(&k, &v).map_err(err)?, cover_sequence(&k, &u).map_err(err)?);
        let d = page_bottleneck(&sv, &su, 2);
        ensure(d <= rep.bound + 1e-9, || format!("pair {seed}: distance {d} > bound {}", rep.bound))?;
    }
    Ok(format!("fig4 distance {d} within bound {}; 10 random pairs", rep.bound))
}

fn first_page_stability() -> Outcome {
    for (n, seed) in [(9, 1), (10, 2), (11, 3), (12, 4), (9, 5)] {
        let pp = perturbed_pair(n, seed);
        let sx = cover_sequence(&pp.x, &pp.cx).map_err(err)?;
        let sy = cover_sequence(&pp.y, &pp.cy).map_err(err)?;
        let rep = carrier_page_interleaving(&sx, &sy, &pp.f, &pp.g).map_err(err)?;
        ensure(rep.holds() && rep.from_page == 1, || format!("n={n} seed={seed}: {:?}", rep.failure))?;
    }
    Ok("5 perturbed circles interleave from page 1".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("fig8 barcodes", fig8_barcodes),
        ("fig8 approximate inverse", fig8_inverse),
        ("fig4 refinement chain", fig4_chain),
        ("whole-space vanishing", adjoined_vanishing),
        ("blowup fidelity", blowup_fidelity),
        ("join fidelity", join_fidelity),
        ("infinity page convergence", convergence),
        ("total complex isomorphism", total_complex),
        ("carrier synthesis", carrier_synthesis),
        ("rips stability", vr_stability),
        ("refinement independence", refinement_independence),
        ("local checks", local_check_bounds),
        ("first-page stability", first_page_stability),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:2}: PASS {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:2}: FAIL {name} ({why}) [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

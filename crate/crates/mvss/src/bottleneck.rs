//! Bottleneck distance between barcodes.

use crate::grid::Real;
use crate::persistence::{Bar, Barcode};

/// Exact bottleneck distance with diagonal matching under the sup-norm.
///
/// Essential bars only match essential bars; a mismatch in their count gives
/// an infinite distance.
pub fn bottleneck<R: Real>(a: &Barcode<R>, b: &Barcode<R>) -> R {
    let mut ia: Vec<R> = a.bars.iter().filter(|x| x.death.is_none()).map(|x| x.birth).collect();
    let mut ib: Vec<R> = b.bars.iter().filter(|x| x.death.is_none()).map(|x| x.birth).collect();
    if ia.len() != ib.len() {
        return R::infinity();
    }
    ia.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    ib.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let essential = ia.iter().zip(&ib).map(|(x, y)| (*x - *y).abs()).fold(R::zero(), R::max);

    let fa: Vec<Bar<R>> = a.bars.iter().filter(|x| x.death.is_some()).copied().collect();
    let fb: Vec<Bar<R>> = b.bars.iter().filter(|x| x.death.is_some()).copied().collect();
    essential.max(finite_bottleneck(&fa, &fb))
}

fn half_len<R: Real>(bar: &Bar<R>) -> R {
    bar.length() / R::from_f64(2.0)
}

fn pair_cost<R: Real>(x: &Bar<R>, y: &Bar<R>) -> R {
    let dx = (x.birth - y.birth).abs();
    let dy = (x.death.expect("finite") - y.death.expect("finite")).abs();
    dx.max(dy)
}

fn finite_bottleneck<R: Real>(a: &[Bar<R>], b: &[Bar<R>]) -> R {
    if a.is_empty() && b.is_empty() {
        return R::zero();
    }
    let mut candidates: Vec<R> = vec![R::zero()];
    candidates.extend(a.iter().chain(b).map(half_len));
    for x in a {
        for y in b {
            candidates.push(pair_cost(x, y));
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Left side: bars of `a` then diagonal copies of bars of `b`.
/// Right side: bars of `b` then diagonal copies of bars of `a`.
fn perfect_matching<R: Real>(a: &[Bar<R>], b: &[Bar<R>], delta: R) -> bool {
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for i in 0..n {
        for j in 0..m {
            if pair_cost(&a[i], &b[j]) <= delta {
                adj[i].push(j);
            }
        }
        if half_len(&a[i]) <= delta {
            adj[i].push(m + i);
        }
    }
    for j in 0..m {
        if half_len(&b[j]) <= delta {
            adj[n + j].push(j);
        }
        adj[n + j].extend((0..n).map(|i| m + i));
    }
    let mut right_match: Vec<Option<usize>> = vec![None; size];
    for left in 0..size {
        let mut seen = vec![false; size];
        if !augment(left, &adj, &mut seen, &mut right_match) {
            return false;
        }
    }
    true
}

fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], right_match: &mut [Option<usize>]) -> bool {
    for &v in &adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if right_match[v].is_none_or(|w| augment(w, adj, seen, right_match)) {
            right_match[v] = Some(u);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn against_empty() {
        let a = Barcode::new(0, vec![Bar::finite(0.0, 2.0)]);
        assert_eq!(bottleneck(&a, &Barcode::empty(0)), 1.0);
    }

    #[test]
    fn essential_mismatch_is_infinite() {
        let a: Barcode<f64> = Barcode::new(0, vec![Bar::infinite(0.0)]);
        assert!(bottleneck(&a, &Barcode::empty(0)).is_infinite());
    }

    #[test]
    fn two_against_one() {
        let a = Barcode::new(1, vec![Bar::finite(0.0, 1.5), Bar::finite(1.0, 1.5)]);
        let b = Barcode::new(1, vec![Bar::finite(0.0, 1.0)]);
        assert_eq!(bottleneck(&a, &b), 0.5);
    }
}

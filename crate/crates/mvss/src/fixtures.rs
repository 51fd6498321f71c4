//! Worked examples used by the CLI and the test suites.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{build_cubical, build_simplicial, CellLabel, Cube, FilteredComplex};
use crate::cover::Cover;
use crate::error::Result;
use crate::field::FieldSpec;
use crate::grid::Grid;

/// A complex together with its named covers and, for join examples, a
/// vertex partition.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub complex: FilteredComplex<f64>,
    pub covers: BTreeMap<String, Cover>,
    pub partition: Option<Vec<Vec<usize>>>,
}

impl Fixture {
    pub fn cover(&self, name: &str) -> &Cover {
        &self.covers[name]
    }
}

fn vertex(x: i64, y: i64) -> Cube {
    vec![(x, x), (y, y)]
}

fn hedge(x: i64, y: i64) -> Cube {
    vec![(x, x + 1), (y, y)]
}

fn vedge(x: i64, y: i64) -> Cube {
    vec![(x, x), (y, y + 1)]
}

fn square(x: i64, y: i64) -> Cube {
    vec![(x, x + 1), (y, y + 1)]
}


fn named_cover(k: &FilteredComplex<f64>, sets: &[(&str, &[Cube])]) -> Cover {
    let named = sets
        .iter()
        .map(|(n, cubes)| {
            let seeds = cubes.iter().map(|c| k.find_label(&CellLabel::Cube(c.clone())).expect("fixture cube exists"));
            (n.to_string(), k.closure(seeds).expect("valid ids"))
        })
        .collect();
    Cover::new(k, named).expect("fixture cover is valid")
}

/// Three unit squares in a row. Outer boundary at 0, the left square and
/// its inner edge at 1, the middle square and its inner edge at 2, the
/// right square at 3.
pub fn fig4() -> Fixture {
    let mut cells: Vec<(Cube, f64)> = Vec::new();
    for y in 0..2 {
        for x in 0..4 {
            cells.push((vertex(x, y), 0.0));
        }
        for x in 0..3 {
            cells.push((hedge(x, y), 0.0));
        }
    }
    cells.push((vedge(0, 0), 0.0));
    cells.push((vedge(3, 0), 0.0));
    cells.push((vedge(1, 0), 1.0));
    cells.push((vedge(2, 0), 2.0));
    cells.push((square(0, 0), 1.0));
    cells.push((square(1, 0), 2.0));
    cells.push((square(2, 0), 3.0));
    let grid = Grid::new(vec![0.0, 1.0, 2.0, 3.0]).expect("sorted grid");
    let complex = build_cubical(&cells, FieldSpec::f2(), grid).expect("fixture complex is valid");
    let (a, b, c) = (square(0, 0), square(1, 0), square(2, 0));
    let mut covers = BTreeMap::new();
    covers.insert(
        "U0".to_string(),
        named_cover(&complex, &[("A", std::slice::from_ref(&a)), ("B", std::slice::from_ref(&b)), ("C", std::slice::from_ref(&c))]),
    );
    covers.insert(
        "U1".to_string(),
        named_cover(&complex, &[("A", std::slice::from_ref(&a)), ("BC", &[b.clone(), c.clone()])]),
    );
    covers.insert("U2".to_string(), named_cover(&complex, &[("X", &[a.clone(), b.clone(), c.clone()])]));
    covers.insert("V".to_string(), named_cover(&complex, &[("AB", &[a, b]), ("C", &[c])]));
    Fixture { name: "fig4".into(), complex, covers, partition: None }
}

/// A 2×2 block of unit squares. The centre vertex and the two middle
/// horizontal edges appear at 1; the middle vertical edges and all squares
/// at `1 + eps`; the outer boundary at 0.
pub fn fig6(eps: f64) -> Fixture {
    let mut cells: Vec<(Cube, f64)> = Vec::new();
    let late = 1.0 + eps;
    for y in 0..3 {
        for x in 0..3 {
            let b = if (x, y) == (1, 1) { 1.0 } else { 0.0 };
            cells.push((vertex(x, y), b));
        }
    }
    for y in 0..3 {
        for x in 0..2 {
            cells.push((hedge(x, y), if y == 1 { 1.0 } else { 0.0 }));
        }
    }
    for y in 0..2 {
        for x in 0..3 {
            cells.push((vedge(x, y), if x == 1 { late } else { 0.0 }));
        }
    }
    for y in 0..2 {
        for x in 0..2 {
            cells.push((square(x, y), late));
        }
    }
    let grid = Grid::new(vec![0.0, 1.0, late]).expect("eps is positive");
    let complex = build_cubical(&cells, FieldSpec::f2(), grid).expect("fixture complex is valid");
    let (a, b, c, d) = (square(0, 0), square(1, 0), square(0, 1), square(1, 1));
    let mut covers = BTreeMap::new();
    covers.insert(
        "V".to_string(),
        named_cover(
            &complex,
            &[("A", std::slice::from_ref(&a)), ("B", std::slice::from_ref(&b)), ("C", std::slice::from_ref(&c)), ("D", std::slice::from_ref(&d))],
        ),
    );
    covers.insert("U".to_string(), named_cover(&complex, &[("AB", &[a, b]), ("CD", &[c, d])]));
    Fixture { name: format!("fig6_eps({eps})"), complex, covers, partition: None }
}

/// Five vertices split into blocks `{0,1,2}` and `{3,4}`, filled in over
/// three grid values.
pub fn fig2_join() -> Fixture {
    let (a, b, c, d, e) = (0, 1, 2, 3, 4);
    let mut simplices: Vec<(Vec<usize>, f64)> = (0..5).map(|v| (vec![v], 0.0)).collect();
    for s in [[a, b], [b, c], [a, d], [b, d], [b, e], [c, e], [d, e]] {
        simplices.push((s.to_vec(), 0.0));
    }
    for s in [[a, b, d], [b, d, e], [b, c, e]] {
        simplices.push((s.to_vec(), 1.0));
    }
    simplices.push((vec![c, d], 2.0));
    for s in [[b, c, d], [c, d, e]] {
        simplices.push((s.to_vec(), 2.0));
    }
    let grid = Grid::new(vec![0.0, 1.0, 2.0]).expect("sorted grid");
    let complex = build_simplicial(&simplices, FieldSpec::f2(), grid, false).expect("fixture complex is valid");
    Fixture {
        name: "fig2_join".into(),
        complex,
        covers: BTreeMap::new(),
        partition: Some(vec![vec![a, b, c], vec![d, e]]),
    }
}

/// The full simplex on seven vertices with blocks of sizes 3, 2 and 2.
pub fn seven_simplex_join() -> Fixture {
    let all: Vec<usize> = (0..7).collect();
    let grid = Grid::new(vec![0.0]).expect("single value");
    let complex =
        build_simplicial(&[(all, 0.0)], FieldSpec::f2(), grid, true).expect("fixture complex is valid");
    Fixture {
        name: "seven_simplex_join".into(),
        complex,
        covers: BTreeMap::new(),
        partition: Some(vec![vec![0, 1, 2], vec![3, 4], vec![5, 6]]),
    }
}

/// `n` points on the unit circle, each radius perturbed uniformly within
/// `jitter`, from a fixed seed.
pub fn vr_circle(n: usize, jitter: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let angle = std::f64::consts::TAU * i as f64 / n as f64;
            let r = 1.0 + if jitter > 0.0 { rng.gen_range(-jitter..=jitter) } else { 0.0 };
            vec![r * angle.cos(), r * angle.sin()]
        })
        .collect()
}

/// Look up a fixture by its command-line name.
pub fn by_name(name: &str) -> Result<Fixture> {
    if let Some(rest) = name.strip_prefix("fig6_eps") {
        let eps: f64 = rest
            .trim_matches(|c| c == '(' || c == ')' || c == '=' || c == '_')
            .parse()
            .map_err(|_| crate::MvssError::input(format!("cannot read eps from {name:?}")))?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(crate::MvssError::input("eps must be positive"));
        }
        return Ok(fig6(eps));
    }
    match name {
        "fig4" => Ok(fig4()),
        "fig6" => Ok(fig6(0.5)),
        "fig2_join" => Ok(fig2_join()),
        "seven_simplex_join" => Ok(seven_simplex_join()),
        _ => Err(crate::MvssError::input(format!("unknown fixture {name:?}"))),
    }
}

//! JSON and CSV formats for complexes, covers, carriers, barcodes, pages
//! and reports.
//!
//! Every document is written with sorted keys and a `schema` line, so equal
//! inputs give byte-identical files. Reals go through `f64` and are written
//! as the shortest decimal that reads back to the same value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::carrier::Carrier;
use crate::complex::{Cell, CellLabel, FilteredComplex, SubComplex};
use crate::cover::{Cover, Nerve};
use crate::error::{MvssError, Result};
use crate::field::FieldSpec;
use crate::grid::{Grid, Real};
use crate::persistence::Barcode;
use crate::serre::{InverseCertificate, LocalCheckReport, StabilityReport};
use crate::spectral::{PageInterleavingReport, SpectralSequence};

pub const COMPLEX_SCHEMA: &str = "mvss.complex/1";
pub const COVER_SCHEMA: &str = "mvss.cover/1";
pub const CARRIER_SCHEMA: &str = "mvss.carrier/1";
pub const BARCODES_SCHEMA: &str = "mvss.barcodes/1";
pub const PAGE_SCHEMA: &str = "mvss.page/1";
pub const REPORT_SCHEMA: &str = "mvss.report/1";

/// Pretty-printed JSON with keys in sorted order and a trailing newline.
pub fn to_canonical<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("documents serialize to JSON values");
    let mut s = serde_json::to_string_pretty(&value).expect("JSON values print");
    s.push('\n');
    s
}

fn grammar(what: &str, e: serde_json::Error) -> MvssError {
    MvssError::input(format!("{what}: {e}"))
}

fn check_schema(what: &str, found: &Option<String>, expected: &str) -> Result<()> {
    match found {
        Some(s) if s != expected => Err(MvssError::input(format!("{what}: schema {s:?} is not {expected:?}"))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum LabelDoc {
    Simplex(Vec<usize>),
    Cube(Vec<(i64, i64)>),
    Product(Vec<Vec<usize>>),
    Blowup { sigma: Vec<usize>, fiber_cell: usize },
    Named(String),
}

impl From<&CellLabel> for LabelDoc {
    fn from(l: &CellLabel) -> Self {
        match l {
            CellLabel::Simplex(v) => Self::Simplex(v.clone()),
            CellLabel::Cube(c) => Self::Cube(c.clone()),
            CellLabel::Product(p) => Self::Product(p.clone()),
            CellLabel::Blowup { sigma, fiber_cell } => Self::Blowup { sigma: sigma.clone(), fiber_cell: *fiber_cell },
            CellLabel::Named(s) => Self::Named(s.clone()),
        }
    }
}

impl From<LabelDoc> for CellLabel {
    fn from(l: LabelDoc) -> Self {
        match l {
            LabelDoc::Simplex(v) => Self::Simplex(v),
            LabelDoc::Cube(c) => Self::Cube(c),
            LabelDoc::Product(p) => Self::Product(p),
            LabelDoc::Blowup { sigma, fiber_cell } => Self::Blowup { sigma, fiber_cell },
            LabelDoc::Named(s) => Self::Named(s),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellDoc {
    id: usize,
    dim: usize,
    birth: usize,
    boundary: Vec<(usize, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<LabelDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexDoc {
    #[serde(default)]
    schema: Option<String>,
    field: u32,
    grid: Vec<f64>,
    cells: Vec<CellDoc>,
}

/// Read a complex; ids must be a permutation of `0..n`, coefficients may be
/// negative and are reduced mod `p`.
pub fn parse_complex<R: Real>(text: &str) -> Result<FilteredComplex<R>> {
    let doc: ComplexDoc = serde_json::from_str(text).map_err(|e| grammar("complex", e))?;
    check_schema("complex", &doc.schema, COMPLEX_SCHEMA)?;
    let field = FieldSpec::new(doc.field)?;
    if let Some(v) = doc.grid.iter().find(|v| !v.is_finite()) {
        return Err(MvssError::input(format!("complex: grid value {v} is not finite")));
    }
    let grid = Grid::new(doc.grid.iter().map(|&v| R::from_f64(v)).collect())?;
    let n = doc.cells.len();
    let mut slots: Vec<Option<Cell>> = vec![None; n];
    for (pos, c) in doc.cells.into_iter().enumerate() {
        if c.id >= n {
            return Err(MvssError::input(format!("complex: cell {pos} has id {} but there are only {n} cells", c.id)));
        }
        if slots[c.id].is_some() {
            return Err(MvssError::input(format!("complex: duplicate cell id {}", c.id)));
        }
        let mut boundary: BTreeMap<usize, u32> = BTreeMap::new();
        for (face, coeff) in c.boundary {
            let e = boundary.entry(face).or_insert(0);
            *e = field.add(*e, field.from_i64(coeff));
        }
        let boundary = boundary.into_iter().filter(|e| e.1 != 0).collect();
        let mut cell = Cell::new(c.dim, boundary, c.birth);
        if let Some(l) = c.label {
            cell = cell.with_label(l.into());
        }
        slots[c.id] = Some(cell);
    }
    let cells = slots.into_iter().map(|c| c.expect("ids form a permutation")).collect();
    FilteredComplex::new(field, grid, cells)
}

fn complex_doc<R: Real>(k: &FilteredComplex<R>) -> ComplexDoc {
    let f = k.field();
    ComplexDoc {
        schema: Some(COMPLEX_SCHEMA.to_string()),
        field: f.p(),
        grid: k.grid().values().iter().map(|&v| Real::to_f64(v)).collect(),
        cells: k
            .cells()
            .iter()
            .enumerate()
            .map(|(id, c)| CellDoc {
                id,
                dim: c.dim,
                birth: c.birth,
                boundary: c.boundary.iter().map(|&(face, v)| (face, f.to_signed(v))).collect(),
                label: c.label.as_ref().map(LabelDoc::from),
            })
            .collect(),
    }
}

pub fn complex_value<R: Real>(k: &FilteredComplex<R>) -> Value {
    serde_json::to_value(complex_doc(k)).expect("complex documents serialize")
}

pub fn emit_complex<R: Real>(k: &FilteredComplex<R>) -> String {
    to_canonical(&complex_doc(k))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverDoc {
    #[serde(default)]
    schema: Option<String>,
    sets: BTreeMap<String, Vec<usize>>,
}

/// A cover read from JSON. `closed` names the sets that were not closed
/// under faces in the file and had to be completed.
#[derive(Debug, Clone)]
pub struct ParsedCover {
    pub cover: Cover,
    pub closed: Vec<String>,
}

pub fn parse_cover<R: Real>(text: &str, complex: &FilteredComplex<R>) -> Result<ParsedCover> {
    let doc: CoverDoc = serde_json::from_str(text).map_err(|e| grammar("cover", e))?;
    check_schema("cover", &doc.schema, COVER_SCHEMA)?;
    for (name, ids) in &doc.sets {
        if let Some(bad) = ids.iter().find(|&&c| c >= complex.len()) {
            return Err(MvssError::input(format!("cover set {name:?} references unknown cell id {bad}")));
        }
    }
    let (cover, closed) = Cover::closed(complex, doc.sets.into_iter().collect())?;
    Ok(ParsedCover { cover, closed })
}

pub fn cover_value(cover: &Cover) -> Value {
    let sets: BTreeMap<String, Vec<usize>> = cover
        .names()
        .iter()
        .zip(cover.sets())
        .map(|(n, s)| (n.clone(), s.members().to_vec()))
        .collect();
    serde_json::to_value(CoverDoc { schema: Some(COVER_SCHEMA.to_string()), sets }).expect("cover documents serialize")
}

pub fn emit_cover(cover: &Cover) -> String {
    to_canonical(&cover_value(cover))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarrierDoc {
    #[serde(default)]
    schema: Option<String>,
    eps: f64,
    assignments: Vec<BTreeMap<String, Vec<usize>>>,
}

/// Read a carrier between two complexes on a shared grid. Each listed target
/// set is closed under faces.
pub fn parse_carrier<R: Real>(
    text: &str,
    source: &FilteredComplex<R>,
    target: &FilteredComplex<R>,
) -> Result<Carrier<R>> {
    let doc: CarrierDoc = serde_json::from_str(text).map_err(|e| grammar("carrier", e))?;
    check_schema("carrier", &doc.schema, CARRIER_SCHEMA)?;
    if doc.assignments.len() != source.grid().len() {
        return Err(MvssError::input(format!(
            "carrier: {} assignment maps for a grid of length {}",
            doc.assignments.len(),
            source.grid().len()
        )));
    }
    let mut assign = Vec::with_capacity(doc.assignments.len());
    for (t, m) in doc.assignments.into_iter().enumerate() {
        let mut out = BTreeMap::new();
        for (key, ids) in m {
            let c: usize = key
                .parse()
                .map_err(|_| MvssError::input(format!("carrier: grid index {t}: key {key:?} is not a cell id")))?;
            if c >= source.len() {
                return Err(MvssError::input(format!("carrier: grid index {t}: unknown source cell id {c}")));
            }
            if let Some(bad) = ids.iter().find(|&&y| y >= target.len()) {
                return Err(MvssError::input(format!("carrier: grid index {t}: unknown target cell id {bad}")));
            }
            out.insert(c, target.closure(ids)?);
        }
        assign.push(out);
    }
    Carrier::new(source.clone(), target.clone(), R::from_f64(doc.eps), assign)
}

pub fn emit_carrier<R: Real>(c: &Carrier<R>) -> String {
    let assignments = c
        .assignments()
        .iter()
        .map(|m| m.iter().map(|(k, s): (&usize, &SubComplex)| (k.to_string(), s.members().to_vec())).collect())
        .collect();
    to_canonical(&CarrierDoc { schema: Some(CARRIER_SCHEMA.to_string()), eps: num(c.eps()), assignments })
}

/// Points, one per row, comma separated. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_points<R: Real>(text: &str) -> Result<Vec<Vec<R>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out: Vec<Vec<R>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| MvssError::input(format!("points: {e}")))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(rec.len());
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| MvssError::input(format!("points: line {line}, field {}: cannot read {field:?}", k + 1)))?;
            if !v.is_finite() {
                return Err(MvssError::input(format!("points: line {line}, field {}: value is not finite", k + 1)));
            }
            row.push(R::from_f64(v));
        }
        if let Some(first) = out.first() {
            if first.len() != row.len() {
                return Err(MvssError::input(format!(
                    "points: line {line} has {} coordinates, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        out.push(row);
    }
    Ok(out)
}

pub fn emit_points<R: Real>(points: &[Vec<R>]) -> String {
    let mut s = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|&v| format!("{:?}", num(v))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn num<R: Real>(v: R) -> f64 {
    Real::to_f64(v)
}

fn real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// `[[birth, death-or-null], ...]` in (birth, death) order.
pub fn bars_value<R: Real>(b: &Barcode<R>) -> Value {
    Value::Array(
        b.bars
            .iter()
            .map(|bar| json!([num(bar.birth), bar.death.map(num)]))
            .collect(),
    )
}

pub fn barcode_value<R: Real>(b: &Barcode<R>) -> Value {
    json!({ "dim": b.dim, "bars": bars_value(b) })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BarcodeDoc {
    dim: usize,
    bars: Vec<(f64, Option<f64>)>,
}

pub fn parse_barcode<R: Real>(text: &str) -> Result<Barcode<R>> {
    let doc: BarcodeDoc = serde_json::from_str(text).map_err(|e| grammar("barcode", e))?;
    let mut bars = Vec::with_capacity(doc.bars.len());
    for (b, d) in doc.bars {
        if d.is_some_and(|d| d < b) {
            return Err(MvssError::input(format!("barcode: bar [{b}, {}) ends before it starts", d.unwrap_or(b))));
        }
        bars.push(crate::persistence::Bar::new(R::from_f64(b), d.map(R::from_f64)));
    }
    Ok(Barcode::new(doc.dim, bars))
}

pub fn emit_barcode<R: Real>(b: &Barcode<R>) -> String {
    to_canonical(&barcode_value(b))
}

/// Barcodes of several degrees in one document.
pub fn emit_barcodes<R: Real>(bs: &[Barcode<R>]) -> String {
    to_canonical(&json!({
        "schema": BARCODES_SCHEMA,
        "barcodes": bs.iter().map(barcode_value).collect::<Vec<_>>(),
    }))
}

/// Page `r` as its nonzero entries `(p, q)`.
pub fn page_value<R: Real>(ss: &SpectralSequence<R>, r: usize) -> Value {
    let (lo, hi) = ss.p_range();
    let top = ss.top() as i64;
    let mut entries = Vec::new();
    for p in lo..=hi {
        for q in 0..=top - p {
            let b = ss.entry_barcode(r, p, q);
            if !b.is_empty() {
                entries.push(json!({ "p": p, "q": q, "bars": bars_value(&b) }));
            }
        }
    }
    json!({ "schema": PAGE_SCHEMA, "r": r, "entries": entries })
}

pub fn nerve_value<R: Real>(n: &Nerve<R>, cover: &Cover) -> Value {
    let grid = n.complex.grid();
    let simplices: Vec<Value> = (0..n.complex.len())
        .map(|i| {
            let names: Vec<&str> = n.simplex(i).iter().map(|&j| cover.name(j)).collect();
            json!({ "sets": names, "birth": real(num(grid.value(n.complex.cell(i).birth))) })
        })
        .collect();
    json!({ "schema": COMPLEX_SCHEMA, "nerve": complex_value(&n.complex), "simplices": simplices })
}

pub fn interleaving_value<R: Real>(r: &PageInterleavingReport<R>) -> Value {
    json!({
        "eps": real(num(r.eps)),
        "from_page": r.from_page,
        "pages_checked": r.pages_checked,
        "stabilization_page": r.stabilization_page,
        "holds": r.holds(),
        "failure": r.failure,
    })
}

pub fn inverse_value<R: Real>(c: &InverseCertificate<R>) -> Value {
    let defects: Vec<Value> = c
        .defects
        .iter()
        .filter(|d| !d.kernel.is_empty() || !d.cokernel.is_empty())
        .map(|d| json!({ "p": d.p, "q": d.q, "kernel": bars_value(&d.kernel), "cokernel": bars_value(&d.cokernel) }))
        .collect();
    json!({
        "eps": real(num(c.eps)),
        "nu": real(num(c.nu)),
        "defects": defects,
        "generic_bound": real(num(c.generic_bound)),
        "generic": interleaving_value(&c.generic),
        "position_aware": c.position_aware.as_ref().map(|(b, r)| json!({
            "bound": real(Real::to_f64(*b)),
            "check": interleaving_value(r),
        })),
        "label": label_of(c),
    })
}

/// `position-aware` when the sharper bound was offered and verified.
pub fn label_of<R: Real>(c: &InverseCertificate<R>) -> &'static str {
    match &c.position_aware {
        Some((_, r)) if r.holds() => "position-aware",
        _ => "generic",
    }
}

fn steps_value<R: Real>(report: &LocalCheckReport<R>, arm: Option<&str>) -> Vec<Value> {
    report
        .steps
        .iter()
        .map(|s| {
            let pieces: Vec<Value> = s
                .pieces
                .iter()
                .map(|p| json!({ "tau": p.tau, "eps": real(num(p.eps)), "nu": real(num(p.nu)) }))
                .collect();
            let mut v = json!({ "r": s.r, "eps": real(num(s.eps)), "nu": real(num(s.nu)), "pieces": pieces });
            if let Some(a) = arm {
                v["arm"] = json!(a);
            }
            v
        })
        .collect()
}

pub fn local_report_value<R: Real>(report: &LocalCheckReport<R>) -> Value {
    json!({
        "schema": REPORT_SCHEMA,
        "steps": steps_value(report, None),
        "bound": real(num(report.bound)),
        "certificates": [],
    })
}

pub fn stability_value<R: Real>(report: &StabilityReport<R>) -> Value {
    let mut steps = steps_value(&report.arm_u, Some("U"));
    steps.extend(steps_value(&report.arm_v, Some("V")));
    let certificates: Vec<Value> = report
        .certificates
        .iter()
        .map(|c| match &c.outcome {
            Ok(cert) => json!({ "arm": c.arm, "certificate": inverse_value(cert) }),
            Err(e) => json!({ "arm": c.arm, "error": e }),
        })
        .collect();
    let label = if report.certificates.iter().all(|c| c.outcome.as_ref().is_ok_and(|x| label_of(x) == "position-aware")) {
        "position-aware"
    } else {
        "generic"
    };
    json!({
        "schema": REPORT_SCHEMA,
        "steps": steps,
        "bound": real(num(report.bound)),
        "triangle": real(num(report.triangle)),
        "label": label,
        "refinement": cover_value(&report.refinement),
        "certificates": certificates,
    })
}

/// Machine-readable error document for the command line.
pub fn error_value(e: &MvssError) -> Value {
    json!({ "error": { "kind": e.kind(), "exit_code": e.exit_code(), "message": e.to_string() } })
}

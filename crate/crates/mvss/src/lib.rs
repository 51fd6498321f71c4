//! Persistent Mayer-Vietoris spectral sequences of filtered cell complexes.

pub mod bottleneck;
pub mod carrier;
pub mod chain;
pub mod complex;
pub mod cover;
pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod field;
pub mod grid;
pub mod interleaving;
pub mod io;
pub mod persistence;
pub mod serre;
pub mod spectral;

pub use bottleneck::bottleneck;
pub use complex::{Cell, CellLabel, FilteredComplex, SubComplex};
pub use error::{MvssError, Result};
pub use field::{FieldSpec, Matrix, Quotient, Subspace};
pub use grid::{Grid, Real};
pub use persistence::{Bar, Barcode, IndexBar, PersistenceModule, RankFunction};

pub type FilteredComplex64 = FilteredComplex<f64>;
pub type FilteredComplex32 = FilteredComplex<f32>;
pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type Barcode64 = Barcode<f64>;
pub type Barcode32 = Barcode<f32>;

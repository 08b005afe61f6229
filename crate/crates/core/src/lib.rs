//! Combinatorics of forest biassociahedra and bimultiplihedra.
//!
//! * [`multiindex`]: multi-indices, gluing and splittings.
//! * [`signs`]: sign exponents with independent oracles.
//! * [`forest`]: ribbon forests, metric and ascending forests, dendrograms.
//! * [`moduli`]: coordinates, gluing maps and boundary faces of `J^k_l` and `K^k_l`.
//! * [`relgen`]: symbolic coherence relations and simplification normal forms.
//! * [`gradedalg`]: exact graded linear algebra and the relation verifier.
//! * [`decorations`]: decorated multi-indices and their splittings.
//! * [`realize`]: intersection graphs of biforests and DOT export.

pub mod decorations;
pub mod forest;
pub mod gradedalg;
pub mod moduli;
pub mod multiindex;
pub mod rational;
pub mod realize;
pub mod relgen;
pub mod signs;

pub use multiindex::{mi, BimoduleIndex, MultiIndex};
pub use signs::SignBit;

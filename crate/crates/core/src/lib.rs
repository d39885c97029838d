//! S-T genus numbers of real and imaginary quadratic fields ℚ(√d).
//!
//! The genus number g^S_T is computed as the size of the kernel of a matrix of
//! local symbols whose rows come from the congruence S-units E^S_T modulo squares
//! and whose columns are the ramified and non-split S-places. An independent path
//! through Hilbert symbols found by conic search and the classical genus formula
//! is provided in [`oracle`], and [`search`] constructs fields with a prescribed
//! genus number.
//!
//! ```
//! use genus_core::{genus_number, PlaceSets, ProblemInstance};
//!
//! let places = PlaceSets::new(vec![], true, vec![]).unwrap();
//! let report = genus_number(&ProblemInstance::new(-21, places).unwrap()).unwrap();
//! assert_eq!(report.g, 8);
//! ```

pub mod arith;
pub mod checks;
pub mod error;
pub mod genus;
pub mod governing;
pub mod linalg;
pub mod oracle;
pub mod search;

pub use arith::{hilbert_add, kronecker, legendre_add, splitting_type, Place, SplittingType, F2};
pub use error::{Error, Result};
pub use genus::{build_matrix_caserule, genus_number, GenusReport, ProblemInstance};
pub use governing::{governing_basis, wt_subgroup, GoverningBasis, PlaceSets, SubgroupWT};
pub use linalg::MatrixFp;
pub use oracle::{build_matrix_hilbert, genus_via_formula, hilbert_bruteforce, ray_class_order};
pub use search::{search, SearchResult, SearchSpec};

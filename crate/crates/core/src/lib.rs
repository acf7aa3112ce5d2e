//! Finite e-poses, ordered groupoids and atlas gluing data over exact
//! coordinate algebras, with reconstruction of the glued manifold as a finite
//! quotient set.

pub mod algebra;
pub mod atlas;
pub mod bitrel;
pub mod builders;
pub mod dot;
pub mod dsl;
pub mod exec;
pub mod groupoid;
pub mod morphism;
pub mod natrel;
pub mod pseudogroup;
pub mod reconstruct;
pub mod report;
#[doc(hidden)]
pub mod testing;

pub use algebra::{Algebra, Elem};
pub use atlas::{ConcreteAtlas, GluingData};
pub use exec::Exec;
pub use groupoid::{EPos, FiniteGroupoid, Index, OrderedGroupoid};
pub use reconstruct::ManifoldModel;
pub use report::ValidationReport;

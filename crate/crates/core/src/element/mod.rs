//! Local finite elements on prisms `J x K`.

pub mod poly;
pub mod prism;
pub mod spatial;

pub use prism::{combine, BasisValues, ElementDegrees, GResidual, PrismElement};
pub use spatial::{dim_rt, facet_moments, OrientedFacet, SpatialBasis, SpatialValues};

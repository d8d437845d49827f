//! Möbius maps, Fuchsian generators and fundamental polygons in the model
//! where the surface is uniformized by the exterior of the unit disc.

pub mod mobius;
pub mod octagon;
pub mod polygon;

pub use mobius::{relation_defect, ExtPoint, MobiusMap};
pub use octagon::{normalized_surface_group, regular_surface_group};
pub use polygon::{
    normalize_to_infinity, normalize_with, EdgePairing, FundamentalPolygon, Geodesic,
};

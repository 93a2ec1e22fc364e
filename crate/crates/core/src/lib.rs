pub mod acceptance;
pub mod error;
pub mod expr;
pub mod families;
pub mod geometry;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod residuals;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ambient-space.md")]
    mod ambient_space {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/surface-geometry.md")]
    mod surface_geometry {}
    #[doc = include_str!("../../../book/src/residuals.md")]
    mod residuals {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}

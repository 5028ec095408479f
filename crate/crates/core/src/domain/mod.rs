//! Problem geometry and its finite-difference discretization.

mod grid;
mod operator;
mod potential;
mod region;

pub use grid::{
    build_grid_1d, build_grid_2d, three_bulb, BulbAlignment, DiscreteSpace, Geometry, Rect,
    RectUnionDomain, ThreeBulb,
};
pub use operator::{assemble_operator, shift_operator, ShiftedOperator};
pub use potential::{PiecewisePotential, RectPotential};
pub use region::{region_mask, IndicatorVector, RegionSpec};

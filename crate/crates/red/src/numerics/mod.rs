//! Numerical kernels shared by the fitting and projection layers: robust
//! planar predicates, Delaunay triangulation with piecewise-linear
//! interpolation, dense least squares, and bracketing root search.

pub mod bisect;
pub mod delaunay;
pub mod lstsq;
pub mod predicates;

pub use bisect::bisect_root;
pub use delaunay::{triangulate, Triangulation};
pub use lstsq::{solve_least_squares, DesignMatrix, LstsqSolution};
pub use predicates::{incircle, orient2d, Sign};

//! Dense LP solver and the distance functionals built on it.

pub mod caratheodory;
pub mod distance;
pub mod solver;

pub use caratheodory::{
    distance_to_convex_direct, grid_convexity_constraints, CaratheodoryConstraint,
};
pub use distance::{
    best_affine_fit, best_jensen_fit, convex_minorant, distance_to_convex, AffineFit,
    ConvexDistance, JensenFit,
};
pub use solver::{
    solve_lp, Constraint, LinearProgram, LpScalar, LpSolution, LpStatus, Relation, Sense,
    VarBounds, FEASIBILITY_TOL,
};

//! Control distances, connecting paths and metric balls.

mod ball;
mod distance;
mod euclid;
pub mod graph;
mod path;

pub use ball::{
    ball_inclusion_check, ball_volume, doubling_sweep, flood_ball, volume_denominator,
    volume_formula_ratio, BallEstimate, BallMethod, DoublingRow, InclusionReport, Membership,
    VolumeFormulaRow, DEFAULT_STEPS,
};
pub use distance::{d1_graph, d_graph, flood_d, flood_d1};
pub use euclid::{
    distance_equivalence_ratio, euclid_bracket, euclid_constants, EquivalenceStats,
    EuclidConstants, PairRatio,
};
pub use graph::{control_directions, CellFrame, DistanceField, Resolution};
pub use path::{
    connect, connect_subdivided, d1_upper, subunit_reparametrize, AdmissiblePath,
    DistanceEstimate, Flavor, SubunitForm, SubunitPiece, MAX_CHAIN_DEPTH, MAX_REFINE_LEVEL, ROUTE_THRESHOLD,
};

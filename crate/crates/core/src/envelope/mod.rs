//! The covering-system space `X_p(Ω)`, its Banach envelope, and the
//! open-mapping preimage scheme.

pub mod covering;
pub mod preimage;
pub mod quasinorm;

pub use covering::{
    fmt_ratio, make_covering_system, make_covering_system_capped, parse_ratio, verify_partition_sum, verify_small_union,
    CoveringSystem, PartitionSumReport, SmallUnionReport, UnionWitness,
};
pub use preimage::{
    iterative_preimage, pthetakappa_check, sign_vectors, HalfOracle, PThetaKappaReport, PreimageTrace, SignOracle,
};
pub use quasinorm::{
    counting_claim, covering_constraints, dual_norm, enumerate_vertices, envelope_gap_report, envelope_norm,
    envelope_norm_exact, quasi_norm, quasi_norm_lower_bound, vertices_by_support_patterns, GapRow, GapTable,
    QuasiNormCertificate, QuasiNormSolver, VertexSet,
};

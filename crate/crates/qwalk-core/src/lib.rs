//! Spectral analysis of continuous-time quantum walks on vertex
//! complemented coronas.
//!
//! A compound graph is assembled from a connected regular base and one
//! regular satellite per base vertex, each satellite joined to every
//! base vertex except its own. The crate builds such graphs, computes
//! their spectra both numerically and in closed form from base and
//! satellite data alone, and decides transfer questions: periodicity of
//! a vertex, perfect state transfer between a pair, and approximate
//! transfer with an explicit witness time.
//!
//! The decision procedures work on exactly recognized spectral data and
//! report three-valued verdicts with machine-checkable evidence; numeric
//! linear algebra is confined to [`spectral`].

pub mod closed_form;
pub mod corona;
pub mod graph;
pub mod number_theory;
pub mod spectral;
pub mod transfer;

pub use closed_form::{
    corona_eigenprojectors, corona_eigenvalues, corona_transfer_entry, BaseSpectralData,
    ClosedFormError, CoronaEigenvalueSet, LambdaPair, PerronPair,
};
pub use corona::{
    build_corona, corona_adjacency_blocks, validate_regular, CoronaError, CoronaLabeling,
    CoronaSpec, CoronaVertex, RegularCoronaParams,
};
pub use graph::{build_named_graph, Graph, GraphError, GraphFamily, RegularityInfo};
pub use number_theory::{
    classify_quadratic, classify_quadratic_with, is_perfect_square, kronecker_witness,
    perfect_sqrt, recognize_integer, square_free_divisors, square_free_part, ClassifyConfig,
    KroneckerWitness, NumberTheoryError, QuadraticClass, SquareFreeDecomposition,
    UnclassifiableKind,
};
pub use spectral::{
    eigendecompose, eigendecompose_with, AmplitudeCurve, Cospectrality, SpectralError, Spectrum,
};
pub use transfer::{
    certify_pst, corona_base_periodicity, gap_non_periodicity, gap_radical_witness,
    is_periodic_vertex, necessary_bound_check, no_pst_complete_satellites, pgst_preconditions,
    pgst_witness_time, radical_gap_form, BoundCheck, BoundKind, BoundViolation, GapRadicalWitness,
    GapReport, GapWitness, KronTarget, NoPstReport, PeriodicityEvidence, PeriodicityReport,
    PgstCheck, PgstNotFound, PgstPreconditions, PgstRoute, PgstSearchOutcome, PgstWitness,
    PstCertificate, PstEvidence, PstFailure, TransferConfig, TransferError, Verdict,
    VertexBoundWitness,
};

//! Residue-class transfer between genus mates.

pub mod certificate;
pub mod empirical;
pub mod good;
pub mod moves;
pub mod residue;
pub mod similitudes;

pub use certificate::{
    verify_certificate, CertificateReport, ClassTag, Stage, StageReport, SubjectReport,
    TransferCertificate, VerifyOptions,
};
pub use empirical::{empirical_genus_coverage, square_class_feasible, square_class_witness, CoverageReport};
pub use good::{bad_set, check_precedes, good_set, BadSet, GoodSet, Precedence};
pub use moves::{verify_move, DepthStrategy, Landing, Move, MoveReport};
pub use residue::{residue_sphere, ResidueSet, ResidueVector};
pub use similitudes::{find_similitudes, DEFAULT_POOL_CAP};

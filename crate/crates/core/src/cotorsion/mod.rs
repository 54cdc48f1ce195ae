//! Recursive equation systems over finitely generated groups: coset towers,
//! non-solvability certificates, `d_m` witnesses and the support-counting
//! contradiction.

mod certificate;
mod counting;
mod system;
mod witnesses;

pub use certificate::{certify_noncotorsion, CertificateVerdict, NonCotorsionCertificate, WINDOW};
pub use counting::{
    support_schedule, verify_counting_contradiction, CandidateLevel, CountingCandidate, CountingLevel, CountingReport,
};
pub use system::{coset_tower, solve_truncated, CosetTower, EquationSystem, TruncatedSolution};
pub use witnesses::{build_dm_witnesses, regroup, DmWitnesses};

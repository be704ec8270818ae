//! School choice: matching mechanisms, efficiency benchmarks, and diagnostics.
//!
//! The crate is organized around [`Problem`]: a set of students with strict,
//! possibly short, preference lists over schools, and schools with seat
//! quotas and strict priority orders over students. On top of that sit
//!
//! * [`mechanisms`] — student-proposing deferred acceptance ([`run_da`]) with
//!   a full round-by-round trace, a cycle-trading improvement pass over its
//!   output ([`run_cti`]), and top trading cycles seeded with the deferred
//!   acceptance assignment ([`run_ttc_da`]);
//! * [`optimal`] — assignment-level benchmarks: the rank-minimizing matching
//!   ([`run_rm`]) and the Rawlsian min-max-rank matching ([`run_rawlsian`]);
//! * [`diagnostics`] — the envy digraph over an assignment, the students no
//!   improvement cycle can ever touch, exact inequality and rank-inefficiency
//!   ratios, and group composition tables;
//! * [`oracle`] — brute-force enumeration of every valid matching with a
//!   definition-level classification, used to cross-check the fast paths;
//! * [`generators`] — deterministic instance families (adversarial worst
//!   case, seeded random markets, seeded two-group markets);
//! * [`format`] — the line-based problem/matching file formats.
//!
//! Everything is deterministic: identical inputs produce identical outputs,
//! byte for byte, across runs and platforms. All types are plain immutable
//! data, so values can be shared freely across threads.

pub mod diagnostics;
pub mod format;
pub mod generators;
pub mod matching;
pub mod mechanisms;
pub mod optimal;
pub mod oracle;
pub mod problem;

pub use matching::{
    is_stable_dominating, pareto_compare, stability_report, Matching, MatchingError,
    ParetoOrdering, StabilityReport, Violation, ViolationKind,
};
pub use mechanisms::{run_cti, run_da, run_ttc_da, CtiOutcome, DaOutcome, DaRound, DaTrace,
    TradeCycle, TradeMove, TtcOutcome};
pub use optimal::{run_rawlsian, run_rm, RawlsianOutcome, RmOutcome, SeatGraph};
pub use problem::{Group, Problem, ProblemParts, SchoolId, StudentId, ValidationError};

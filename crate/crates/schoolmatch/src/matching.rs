//! Matchings and the relations between them: validity, stability,
//! Pareto comparison, and domination of the deferred acceptance baseline.

use thiserror::Error;

use crate::mechanisms::run_da;
use crate::problem::{Problem, SchoolId, StudentId};

/// An assignment of students to schools (or to nothing).
///
/// Valid by construction: every assigned school is acceptable to its student
/// and no school exceeds its quota.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    assignment: Vec<Option<SchoolId>>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("expected {expected} assignments, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("student {student} is assigned an unlisted school {school}")]
    Unacceptable { student: String, school: String },
    #[error("school {school} holds {assigned} students but has quota {quota}")]
    QuotaExceeded {
        school: String,
        assigned: u32,
        quota: u32,
    },
}

impl Matching {
    pub fn new(
        problem: &Problem,
        assignment: Vec<Option<SchoolId>>,
    ) -> Result<Matching, MatchingError> {
        if assignment.len() != problem.student_count() {
            return Err(MatchingError::LengthMismatch {
                expected: problem.student_count(),
                found: assignment.len(),
            });
        }
        let mut load = vec![0u32; problem.school_count()];
        for (i, &school) in assignment.iter().enumerate() {
            if let Some(s) = school {
                if !problem.is_acceptable(StudentId(i as u32), s) {
                    return Err(MatchingError::Unacceptable {
                        student: problem.student_name(StudentId(i as u32)).to_string(),
                        school: problem.school_name(s).to_string(),
                    });
                }
                load[s.index()] += 1;
            }
        }
        for (s, &count) in load.iter().enumerate() {
            let quota = problem.quota(SchoolId(s as u32));
            if count > quota {
                return Err(MatchingError::QuotaExceeded {
                    school: problem.school_name(SchoolId(s as u32)).to_string(),
                    assigned: count,
                    quota,
                });
            }
        }
        Ok(Matching { assignment })
    }

    pub fn school_of(&self, i: StudentId) -> Option<SchoolId> {
        self.assignment[i.index()]
    }

    pub fn assignments(&self) -> &[Option<SchoolId>] {
        &self.assignment
    }

    /// Students at each school, ascending by student index.
    pub fn occupants(&self, problem: &Problem) -> Vec<Vec<StudentId>> {
        let mut by_school = vec![Vec::new(); problem.school_count()];
        for (i, &school) in self.assignment.iter().enumerate() {
            if let Some(s) = school {
                by_school[s.index()].push(StudentId(i as u32));
            }
        }
        by_school
    }

    /// Number of students at each school.
    pub fn occupancy(&self, problem: &Problem) -> Vec<u32> {
        let mut load = vec![0u32; problem.school_count()];
        for &school in &self.assignment {
            if let Some(s) = school {
                load[s.index()] += 1;
            }
        }
        load
    }

    /// Every student's rank of their own assignment (null ranks included).
    pub fn rank_vector(&self, problem: &Problem) -> Vec<u32> {
        self.assignment
            .iter()
            .enumerate()
            .map(|(i, &school)| {
                problem
                    .rank(StudentId(i as u32), school)
                    .expect("matching assigns an acceptable school")
            })
            .collect()
    }

    pub fn total_rank(&self, problem: &Problem) -> u64 {
        self.rank_vector(problem).iter().map(|&r| r as u64).sum()
    }

    /// Worst rank over all students; 0 for an empty instance.
    pub fn max_rank(&self, problem: &Problem) -> u32 {
        self.rank_vector(problem).into_iter().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// The student desires a school with an empty seat.
    Waste,
    /// The student desires a school holding a lower-priority student.
    PriorityViolation,
}

/// One blocking fact about a matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub student: StudentId,
    pub school: SchoolId,
    /// For [`ViolationKind::PriorityViolation`]: the lowest-priority student
    /// assigned to the school, as the witness. Absent for waste.
    pub incumbent: Option<StudentId>,
}

/// All violations of a matching, in (student index, school index) order;
/// `stable` iff there are none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    pub violations: Vec<Violation>,
}

impl StabilityReport {
    /// Distinct (student, school) blocking pairs.
    pub fn blocking_pairs(&self) -> Vec<(StudentId, SchoolId)> {
        let mut pairs: Vec<(StudentId, SchoolId)> = self
            .violations
            .iter()
            .map(|v| (v.student, v.school))
            .collect();
        pairs.dedup();
        pairs
    }
}

/// Scans for waste and priority violations.
///
/// A student *desires* every school they rank strictly above their own
/// assignment. Desiring a school with an empty seat is waste; desiring a
/// school that holds a student the school ranks below them is a priority
/// violation. One record is emitted per (student, school) pair per kind.
pub fn stability_report(problem: &Problem, matching: &Matching) -> StabilityReport {
    let occupants = matching.occupants(problem);
    let mut violations = Vec::new();
    for i in problem.students() {
        let own_rank = problem
            .rank(i, matching.school_of(i))
            .expect("matching assigns an acceptable school");
        for &s in problem.prefs(i).iter().take(own_rank as usize - 1) {
            let held = &occupants[s.index()];
            if (held.len() as u32) < problem.quota(s) {
                violations.push(Violation {
                    kind: ViolationKind::Waste,
                    student: i,
                    school: s,
                    incumbent: None,
                });
            }
            let worst_below = held
                .iter()
                .copied()
                .filter(|&j| problem.prefers(s, i, j))
                .max_by_key(|&j| problem.priority_pos(s, j));
            if let Some(j) = worst_below {
                violations.push(Violation {
                    kind: ViolationKind::PriorityViolation,
                    student: i,
                    school: s,
                    incumbent: Some(j),
                });
            }
        }
    }
    violations.sort_by_key(|v| {
        (
            v.student,
            v.school,
            match v.kind {
                ViolationKind::Waste => 0u8,
                ViolationKind::PriorityViolation => 1,
            },
        )
    });
    StabilityReport {
        stable: violations.is_empty(),
        violations,
    }
}

/// Outcome of comparing two matchings student by student.
///
/// With strict preferences, two distinct matchings can never tie on every
/// student, so the weak variants cannot arise from [`pareto_compare`];
/// they name the remaining cases of the underlying relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParetoOrdering {
    Equal,
    MuDominates,
    NuDominates,
    MuWeaklyDominates,
    NuWeaklyDominates,
    Incomparable,
}

/// Compares `mu` against `nu` by every student's rank of their assignment.
pub fn pareto_compare(problem: &Problem, mu: &Matching, nu: &Matching) -> ParetoOrdering {
    let mu_ranks = mu.rank_vector(problem);
    let nu_ranks = nu.rank_vector(problem);
    let mut mu_better = false;
    let mut nu_better = false;
    for (a, b) in mu_ranks.iter().zip(&nu_ranks) {
        if a < b {
            mu_better = true;
        } else if b < a {
            nu_better = true;
        }
    }
    match (mu_better, nu_better) {
        (false, false) => ParetoOrdering::Equal,
        (true, false) => ParetoOrdering::MuDominates,
        (false, true) => ParetoOrdering::NuDominates,
        (true, true) => ParetoOrdering::Incomparable,
    }
}

/// True when every student weakly prefers their seat in `matching` to their
/// deferred acceptance assignment.
pub fn is_stable_dominating(problem: &Problem, matching: &Matching) -> bool {
    let baseline = run_da(problem).matching;
    matching
        .rank_vector(problem)
        .iter()
        .zip(baseline.rank_vector(problem).iter())
        .all(|(got, da)| got <= da)
}

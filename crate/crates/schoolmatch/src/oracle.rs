//! Exhaustive ground truth for small instances.
//!
//! Everything here works by enumerating complete assignments and applying
//! definitions directly, with no shortcuts shared with the mechanism
//! implementations. That makes the module slow and size-limited, and
//! useful precisely because an agreement between this module and the fast
//! paths is evidence both are right.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::matching::Matching;
use crate::problem::{Problem, SchoolId, StudentId};

/// Size guards for enumeration.
#[derive(Clone, Debug)]
pub struct OracleLimits {
    pub max_students: usize,
    pub max_matchings: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_students: 8,
            max_matchings: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("refusing to enumerate matchings for {count} students (limit {limit})")]
    TooManyStudents { count: usize, limit: usize },
    #[error("search space holds up to {bound} assignments (limit {limit})")]
    SearchSpaceTooLarge { bound: u64, limit: u64 },
}

/// Upper bound on the number of complete assignments: every student picks
/// a listed school or stays out, ignoring quotas. Saturates.
pub fn search_space_bound(problem: &Problem) -> u64 {
    problem
        .students()
        .map(|i| problem.prefs(i).len() as u64 + 1)
        .fold(1u64, u64::saturating_mul)
}

fn check_limits(problem: &Problem, limits: &OracleLimits) -> Result<(), OracleError> {
    let count = problem.student_count();
    if count > limits.max_students {
        return Err(OracleError::TooManyStudents {
            count,
            limit: limits.max_students,
        });
    }
    let bound = search_space_bound(problem);
    if bound > limits.max_matchings {
        return Err(OracleError::SearchSpaceTooLarge {
            bound,
            limit: limits.max_matchings,
        });
    }
    Ok(())
}

/// Walks every valid matching in a fixed order: students by index, and for
/// each student their listed schools in preference order, then staying out.
fn enumerate<F>(problem: &Problem, mut f: F)
where
    F: FnMut(&[Option<SchoolId>]) -> ControlFlow<()>,
{
    let m = problem.student_count();
    let mut assignment: Vec<Option<SchoolId>> = Vec::with_capacity(m);
    let mut choice = vec![0usize; m];
    let mut occupancy = vec![0u32; problem.school_count()];
    let mut depth = 0usize;
    loop {
        if depth == m {
            if f(&assignment).is_break() || m == 0 {
                return;
            }
            depth -= 1;
            if let Some(Some(s)) = assignment.pop() {
                occupancy[s.index()] -= 1;
            }
            continue;
        }
        let prefs = problem.prefs(StudentId(depth as u32));
        let k = choice[depth];
        if k < prefs.len() {
            choice[depth] += 1;
            let s = prefs[k];
            if occupancy[s.index()] < problem.quota(s) {
                occupancy[s.index()] += 1;
                assignment.push(Some(s));
                depth += 1;
            }
        } else if k == prefs.len() {
            choice[depth] += 1;
            assignment.push(None);
            depth += 1;
        } else {
            choice[depth] = 0;
            if depth == 0 {
                return;
            }
            depth -= 1;
            if let Some(Some(s)) = assignment.pop() {
                occupancy[s.index()] -= 1;
            }
        }
    }
}

fn rank_vector_of(problem: &Problem, assignment: &[Option<SchoolId>]) -> Vec<u32> {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            problem
                .rank(StudentId(i as u32), s)
                .expect("enumerated assignments stay on preference lists")
        })
        .collect()
}

/// `a` strictly Pareto-dominates `b` on rank vectors.
fn dominates(a: &[u32], b: &[u32]) -> bool {
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn is_stable_assignment(problem: &Problem, assignment: &[Option<SchoolId>]) -> bool {
    let mut occupancy = vec![0u32; problem.school_count()];
    for &s in assignment.iter().flatten() {
        occupancy[s.index()] += 1;
    }
    for (idx, &own) in assignment.iter().enumerate() {
        let i = StudentId(idx as u32);
        let own_rank = problem.rank(i, own).expect("assignment stays on lists");
        for &s in problem.prefs(i).iter().take(own_rank as usize - 1) {
            if occupancy[s.index()] < problem.quota(s) {
                return false;
            }
            for (jdx, &theirs) in assignment.iter().enumerate() {
                if theirs == Some(s) && problem.prefers(s, i, StudentId(jdx as u32)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Stability checked straight from the definition by quantifier sweep.
pub fn is_stable(problem: &Problem, matching: &Matching) -> bool {
    is_stable_assignment(problem, matching.assignments())
}

/// The full decomposition of a small instance's matching space.
#[derive(Clone, Debug)]
pub struct OracleClassification {
    /// Valid matchings visited, after quota pruning.
    pub matching_count: u64,
    pub stable: Vec<Matching>,
    /// The stable matching every student weakly prefers to all others,
    /// picked out of the enumerated stable set.
    pub baseline: Matching,
    /// Matchings every student weakly prefers to the baseline.
    pub stable_dominating: Vec<Matching>,
    /// The Pareto frontier of `stable_dominating`.
    pub efficient_stable_dominating: Vec<Matching>,
    pub min_total_rank: u64,
    pub min_max_rank: u32,
}

pub fn classify(
    problem: &Problem,
    limits: &OracleLimits,
) -> Result<OracleClassification, OracleError> {
    check_limits(problem, limits)?;

    let mut matching_count = 0u64;
    let mut stable_raw: Vec<Vec<Option<SchoolId>>> = Vec::new();
    let mut min_total_rank = 0u64;
    let mut min_max_rank = 0u32;
    let mut first = true;
    enumerate(problem, |assignment| {
        matching_count += 1;
        let ranks = rank_vector_of(problem, assignment);
        let total: u64 = ranks.iter().map(|&r| r as u64).sum();
        let max = ranks.iter().copied().max().unwrap_or(0);
        if first {
            min_total_rank = total;
            min_max_rank = max;
            first = false;
        } else {
            min_total_rank = min_total_rank.min(total);
            min_max_rank = min_max_rank.min(max);
        }
        if is_stable_assignment(problem, assignment) {
            stable_raw.push(assignment.to_vec());
        }
        ControlFlow::Continue(())
    });

    let stable_ranks: Vec<Vec<u32>> = stable_raw
        .iter()
        .map(|a| rank_vector_of(problem, a))
        .collect();
    let baseline_idx = (0..stable_raw.len())
        .find(|&k| {
            stable_ranks
                .iter()
                .all(|other| stable_ranks[k].iter().zip(other).all(|(&a, &b)| a <= b))
        })
        .expect("some stable matching weakly dominates the rest");
    let baseline_ranks = stable_ranks[baseline_idx].clone();

    let mut dominating_raw: Vec<(Vec<Option<SchoolId>>, Vec<u32>, u64)> = Vec::new();
    enumerate(problem, |assignment| {
        let ranks = rank_vector_of(problem, assignment);
        if ranks.iter().zip(&baseline_ranks).all(|(&a, &b)| a <= b) {
            let total = ranks.iter().map(|&r| r as u64).sum();
            dominating_raw.push((assignment.to_vec(), ranks, total));
        }
        ControlFlow::Continue(())
    });

    let mut order: Vec<usize> = (0..dominating_raw.len()).collect();
    order.sort_by_key(|&k| dominating_raw[k].2);
    let mut frontier: Vec<usize> = Vec::new();
    for &k in &order {
        if !frontier
            .iter()
            .any(|&f| dominates(&dominating_raw[f].1, &dominating_raw[k].1))
        {
            frontier.push(k);
        }
    }
    frontier.sort_unstable();

    let to_matching = |a: &Vec<Option<SchoolId>>| {
        Matching::new(problem, a.clone()).expect("enumerated assignments are valid")
    };
    Ok(OracleClassification {
        matching_count,
        stable: stable_raw.iter().map(to_matching).collect(),
        baseline: to_matching(&stable_raw[baseline_idx]),
        stable_dominating: dominating_raw.iter().map(|(a, _, _)| to_matching(a)).collect(),
        efficient_stable_dominating: frontier
            .iter()
            .map(|&k| to_matching(&dominating_raw[k].0))
            .collect(),
        min_total_rank,
        min_max_rank,
    })
}

/// All Pareto-efficient matchings, by streaming frontier maintenance.
/// Matchings with identical rank vectors never dominate each other, so
/// rank ties survive side by side.
pub fn pareto_efficient_set(
    problem: &Problem,
    limits: &OracleLimits,
) -> Result<Vec<Matching>, OracleError> {
    check_limits(problem, limits)?;
    let mut frontier: Vec<(Vec<Option<SchoolId>>, Vec<u32>)> = Vec::new();
    enumerate(problem, |assignment| {
        let ranks = rank_vector_of(problem, assignment);
        if !frontier.iter().any(|(_, f)| dominates(f, &ranks)) {
            frontier.retain(|(_, f)| !dominates(&ranks, f));
            frontier.push((assignment.to_vec(), ranks));
        }
        ControlFlow::Continue(())
    });
    Ok(frontier
        .into_iter()
        .map(|(a, _)| Matching::new(problem, a).expect("enumerated assignments are valid"))
        .collect())
}

/// True when no valid matching strictly Pareto-dominates `matching`.
/// Stops at the first dominator found.
pub fn is_pareto_efficient(
    problem: &Problem,
    matching: &Matching,
    limits: &OracleLimits,
) -> Result<bool, OracleError> {
    check_limits(problem, limits)?;
    let target = matching.rank_vector(problem);
    let mut efficient = true;
    enumerate(problem, |assignment| {
        if dominates(&rank_vector_of(problem, assignment), &target) {
            efficient = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(efficient)
}

/// Classification plus the global Pareto frontier. The frontier pass costs
/// the most, so it only runs here.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub classification: OracleClassification,
    pub pareto_efficient: Vec<Matching>,
}

pub fn oracle_report(
    problem: &Problem,
    limits: &OracleLimits,
) -> Result<OracleReport, OracleError> {
    Ok(OracleReport {
        classification: classify(problem, limits)?,
        pareto_efficient: pareto_efficient_set(problem, limits)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemParts;

    fn one_school(students: usize) -> Problem {
        ProblemParts {
            student_names: (1..=students).map(|k| format!("i{k}")).collect(),
            school_names: vec!["s1".into()],
            quotas: vec![1],
            prefs: (0..students).map(|_| vec![SchoolId(0)]).collect(),
            prios: vec![(0..students).map(|k| StudentId(k as u32)).collect()],
            groups: None,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn single_student_space_has_two_points() {
        let p = one_school(1);
        let c = classify(&p, &OracleLimits::default()).unwrap();
        assert_eq!(c.matching_count, 2);
        assert_eq!(c.stable.len(), 1);
        assert_eq!(c.baseline.school_of(StudentId(0)), Some(SchoolId(0)));
        assert_eq!(c.stable_dominating.len(), 1);
        assert_eq!(c.efficient_stable_dominating.len(), 1);
        assert_eq!(c.min_total_rank, 1);
        assert_eq!(c.min_max_rank, 1);
    }

    #[test]
    fn contested_seat_space_has_three_points() {
        let p = one_school(2);
        let c = classify(&p, &OracleLimits::default()).unwrap();
        assert_eq!(c.matching_count, 3);
        assert_eq!(c.stable.len(), 1);
        assert_eq!(c.baseline.school_of(StudentId(0)), Some(SchoolId(0)));
        assert_eq!(c.baseline.school_of(StudentId(1)), None);
        assert_eq!(c.min_total_rank, 3);
        assert_eq!(c.min_max_rank, 2);
        let pe = pareto_efficient_set(&p, &OracleLimits::default()).unwrap();
        assert_eq!(pe.len(), 2);
        assert!(is_pareto_efficient(&p, &c.baseline, &OracleLimits::default()).unwrap());
    }

    #[test]
    fn wasteful_matching_is_inefficient_and_unstable() {
        let p = one_school(2);
        let nobody = Matching::new(&p, vec![None, None]).unwrap();
        assert!(!is_stable(&p, &nobody));
        assert!(!is_pareto_efficient(&p, &nobody, &OracleLimits::default()).unwrap());
    }

    #[test]
    fn limits_refuse_oversized_instances() {
        let p = one_school(9);
        match classify(&p, &OracleLimits::default()) {
            Err(OracleError::TooManyStudents { count: 9, limit: 8 }) => {}
            other => panic!("expected a student-count refusal, got {other:?}"),
        }
        let p = one_school(3);
        let tight = OracleLimits {
            max_students: 8,
            max_matchings: 5,
        };
        match classify(&p, &tight) {
            Err(OracleError::SearchSpaceTooLarge { bound: 8, limit: 5 }) => {}
            other => panic!("expected a search-space refusal, got {other:?}"),
        }
    }

    #[test]
    fn empty_instance_classifies_cleanly() {
        let p = ProblemParts {
            student_names: vec![],
            school_names: vec!["s1".into()],
            quotas: vec![1],
            prefs: vec![],
            prios: vec![vec![]],
            groups: None,
        }
        .validate()
        .unwrap();
        let c = classify(&p, &OracleLimits::default()).unwrap();
        assert_eq!(c.matching_count, 1);
        assert_eq!(c.stable.len(), 1);
        assert_eq!(c.min_total_rank, 0);
        assert_eq!(c.min_max_rank, 0);
    }
}

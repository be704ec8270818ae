//! Student-proposing deferred acceptance, batch-round variant.
//!
//! Every round, all currently rejected students apply to the next school on
//! their list at once. Each school keeps the top-priority applicants among
//! those it was already holding and the new arrivals, up to its quota, and
//! rejects the rest. The algorithm stops after the first round with no
//! rejection. Because each school retains the best subset of a *set* of
//! candidates, the outcome does not depend on any within-round processing
//! order.

use std::collections::BinaryHeap;

use crate::matching::Matching;
use crate::problem::{Problem, SchoolId, StudentId};

/// One batch round: who applied where, who was turned away, and how many
/// students each school was holding once the dust settled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DaRound {
    /// Applications sent this round, ascending by student index.
    pub proposals: Vec<(StudentId, SchoolId)>,
    /// Rejections issued this round (both fresh applicants and displaced
    /// holders), sorted by (student, school).
    pub rejections: Vec<(StudentId, SchoolId)>,
    /// Students held by each school at the end of the round.
    pub held: Vec<u32>,
}

/// Complete run history of [`run_da`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DaTrace {
    pub rounds: Vec<DaRound>,
}

impl DaTrace {
    /// Schools that never rejected anyone, ascending by school index.
    ///
    /// A student assigned to such a school could not do better under any
    /// matching that weakly improves on deferred acceptance, which makes
    /// this set the cheap certificate source for unimprovability.
    pub fn never_rejected(&self, problem: &Problem) -> Vec<SchoolId> {
        let mut rejected = vec![false; problem.school_count()];
        for round in &self.rounds {
            for &(_, s) in &round.rejections {
                rejected[s.index()] = true;
            }
        }
        problem.schools().filter(|s| !rejected[s.index()]).collect()
    }

    /// Total number of applications over all rounds.
    pub fn proposal_count(&self) -> u64 {
        self.rounds.iter().map(|r| r.proposals.len() as u64).sum()
    }
}

#[derive(Clone, Debug)]
pub struct DaOutcome {
    pub matching: Matching,
    pub trace: DaTrace,
}

/// Runs deferred acceptance. Single-threaded; linear in the total length of
/// the preference lists up to a log factor for the per-school heaps.
pub fn run_da(problem: &Problem) -> DaOutcome {
    let m = problem.student_count();
    let n = problem.school_count();

    // Per school, the held students as a max-heap keyed by priority
    // position: the worst held student is on top and gets displaced first.
    let mut held: Vec<BinaryHeap<(u32, StudentId)>> = vec![BinaryHeap::new(); n];
    // Next list position each student will apply to.
    let mut next_choice = vec![0usize; m];

    let mut proposers: Vec<StudentId> = problem.students().collect();
    let mut rounds = Vec::new();

    while !proposers.is_empty() {
        let mut proposals = Vec::new();
        let mut rejections: Vec<(StudentId, SchoolId)> = Vec::new();

        for &i in &proposers {
            let prefs = problem.prefs(i);
            let k = next_choice[i.index()];
            if k >= prefs.len() {
                continue; // list exhausted: stays unassigned
            }
            let s = prefs[k];
            proposals.push((i, s));
            let pos = problem.priority_pos(s, i);
            let school_held = &mut held[s.index()];
            if (school_held.len() as u32) < problem.quota(s) {
                school_held.push((pos, i));
            } else {
                let &(worst_pos, worst) = school_held.peek().expect("quota is at least 1");
                if pos < worst_pos {
                    school_held.pop();
                    school_held.push((pos, i));
                    next_choice[worst.index()] += 1;
                    rejections.push((worst, s));
                } else {
                    next_choice[i.index()] += 1;
                    rejections.push((i, s));
                }
            }
        }

        rejections.sort_unstable();
        let mut next_proposers: Vec<StudentId> = rejections.iter().map(|&(i, _)| i).collect();
        next_proposers.sort_unstable();

        let done = rejections.is_empty();
        rounds.push(DaRound {
            proposals,
            rejections,
            held: held.iter().map(|h| h.len() as u32).collect(),
        });
        if done {
            break;
        }
        proposers = next_proposers;
    }

    let mut assignment: Vec<Option<SchoolId>> = vec![None; m];
    for (s, school_held) in held.iter().enumerate() {
        for &(_, i) in school_held.iter() {
            assignment[i.index()] = Some(SchoolId(s as u32));
        }
    }
    let matching = Matching::new(problem, assignment).expect("deferred acceptance output is valid");

    DaOutcome {
        matching,
        trace: DaTrace { rounds },
    }
}

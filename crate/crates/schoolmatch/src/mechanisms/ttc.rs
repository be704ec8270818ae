//! Top trading cycles seeded with the deferred acceptance assignment.
//!
//! Every seat that deferred acceptance fills becomes its holder's
//! endowment. Each round, students point at the best school on their list
//! that they strictly prefer to their endowment and that still has an
//! active seat; a school answers through its highest-priority active
//! holder. Students with nothing strictly better in reach (including
//! students at their top choice and unassigned students) keep what they
//! have and leave. Cycles in the pointing graph trade and leave. The
//! process repeats until nobody is active.

use crate::matching::Matching;
use crate::mechanisms::run_da;
use crate::problem::{Problem, SchoolId, StudentId};

#[derive(Clone, Debug)]
pub struct TtcOutcome {
    pub matching: Matching,
}

pub fn run_ttc_da(problem: &Problem) -> TtcOutcome {
    let m = problem.student_count();
    let n = problem.school_count();
    let endowment = run_da(problem).matching;

    let mut active = vec![false; m];
    let mut active_seats = vec![0u32; n];
    for i in problem.students() {
        if let Some(s) = endowment.school_of(i) {
            active[i.index()] = true;
            active_seats[s.index()] += 1;
        }
    }
    let mut assignment: Vec<Option<SchoolId>> = endowment.assignments().to_vec();

    let improvement_target = |active_seats: &[u32], i: StudentId| -> Option<SchoolId> {
        let endowed = endowment.school_of(i).expect("only endowed students stay active");
        let endowed_rank = problem
            .rank(i, Some(endowed))
            .expect("endowments are acceptable");
        problem
            .prefs(i)
            .iter()
            .take(endowed_rank as usize - 1)
            .copied()
            .find(|s| active_seats[s.index()] > 0)
    };

    while active.iter().any(|&a| a) {
        // Retire students who can no longer improve; each retirement frees
        // nothing and consumes the student's own seat, which can strand
        // further students, so iterate to the fixpoint.
        loop {
            let mut retired_any = false;
            for (idx, slot) in active.iter_mut().enumerate() {
                let i = StudentId(idx as u32);
                if *slot && improvement_target(&active_seats, i).is_none() {
                    *slot = false;
                    let endowed = endowment.school_of(i).expect("active students are endowed");
                    active_seats[endowed.index()] -= 1;
                    retired_any = true;
                }
            }
            if !retired_any {
                break;
            }
        }

        if !active.iter().any(|&a| a) {
            break;
        }

        // Point: student -> desired school -> that school's highest-priority
        // active holder. Every active student points, so the pointing graph
        // is functional and contains at least one cycle.
        let mut holders: Vec<Vec<StudentId>> = vec![Vec::new(); n];
        for i in problem.students().filter(|&i| active[i.index()]) {
            let endowed = endowment.school_of(i).unwrap();
            holders[endowed.index()].push(i);
        }
        let points_to: Vec<Option<StudentId>> = problem
            .students()
            .map(|i| {
                if !active[i.index()] {
                    return None;
                }
                let target = improvement_target(&active_seats, i)
                    .expect("retirement pass keeps only improvable students");
                let holder = holders[target.index()]
                    .iter()
                    .copied()
                    .min_by_key(|&j| problem.priority_pos(target, j))
                    .expect("a school with active seats has an active holder");
                Some(holder)
            })
            .collect();

        // Walk the functional graph; grey nodes on the current walk, black
        // nodes fully explored. Every cycle found trades immediately.
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let mut color = vec![WHITE; m];
        for start_idx in 0..m {
            let start = StudentId(start_idx as u32);
            if !active[start_idx] || color[start_idx] != WHITE {
                continue;
            }
            let mut walk = Vec::new();
            let mut current = start;
            loop {
                if !active[current.index()] || color[current.index()] == BLACK {
                    break;
                }
                if color[current.index()] == GREY {
                    let at = walk
                        .iter()
                        .position(|&x| x == current)
                        .expect("grey students are on the walk");
                    let cycle = &walk[at..];
                    for (step, &i) in cycle.iter().enumerate() {
                        let next = cycle[(step + 1) % cycle.len()];
                        let received = endowment
                            .school_of(next)
                            .expect("cycle students are endowed");
                        assignment[i.index()] = Some(received);
                    }
                    for &i in cycle {
                        active[i.index()] = false;
                        let endowed = endowment.school_of(i).unwrap();
                        active_seats[endowed.index()] -= 1;
                    }
                    break;
                }
                color[current.index()] = GREY;
                walk.push(current);
                current = points_to[current.index()].expect("active students point");
            }
            for &i in &walk {
                color[i.index()] = BLACK;
            }
        }
    }

    let matching = Matching::new(problem, assignment).expect("trades preserve validity");
    TtcOutcome { matching }
}

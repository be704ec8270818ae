//! Rank-optimal benchmarks: the minimum achievable total rank and the
//! minimum achievable worst rank, each with a witness matching.
//!
//! Both solvers treat staying unassigned as a real option whose rank is one
//! past the end of the student's list, so the optima range over every valid
//! matching, not just full ones.

use std::collections::VecDeque;

use crate::matching::Matching;
use crate::problem::{Problem, SchoolId, StudentId};

/// A school-choice problem flattened into individual seats.
///
/// Each school contributes one slot per seat, capped at the student count
/// since no school can enroll more students than exist. Costs are ranks.
#[derive(Clone, Debug)]
pub struct SeatGraph {
    slot_school: Vec<SchoolId>,
    student_edges: Vec<Vec<(u32, u32)>>,
    null_cost: Vec<u32>,
}

impl SeatGraph {
    pub fn build(problem: &Problem) -> SeatGraph {
        let m = problem.student_count() as u32;
        let mut slot_school = Vec::new();
        let mut first_slot = Vec::with_capacity(problem.school_count());
        for s in problem.schools() {
            first_slot.push(slot_school.len() as u32);
            let seats = problem.quota(s).min(m);
            slot_school.extend(std::iter::repeat_n(s, seats as usize));
        }
        let student_edges = problem
            .students()
            .map(|i| {
                let mut edges = Vec::new();
                for (pos, &s) in problem.prefs(i).iter().enumerate() {
                    let cost = pos as u32 + 1;
                    let start = first_slot[s.index()];
                    let seats = problem.quota(s).min(m);
                    for slot in start..start + seats {
                        edges.push((slot, cost));
                    }
                }
                edges
            })
            .collect();
        let null_cost = problem.students().map(|i| problem.null_rank(i)).collect();
        SeatGraph {
            slot_school,
            student_edges,
            null_cost,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.slot_school.len()
    }

    pub fn school_of_slot(&self, slot: u32) -> SchoolId {
        self.slot_school[slot as usize]
    }

    /// (slot, cost) options for a student, cheapest first.
    pub fn edges(&self, i: StudentId) -> &[(u32, u32)] {
        &self.student_edges[i.index()]
    }

    pub fn null_cost(&self, i: StudentId) -> u32 {
        self.null_cost[i.index()]
    }

    fn cost(&self, i: StudentId, slot: u32) -> u32 {
        self.student_edges[i.index()]
            .iter()
            .find(|&&(t, _)| t == slot)
            .map(|&(_, c)| c)
            .expect("student holds a slot they listed")
    }

    fn matching(&self, problem: &Problem, student_slot: &[Option<u32>]) -> Matching {
        let assignment = student_slot
            .iter()
            .map(|slot| slot.map(|t| self.school_of_slot(t)))
            .collect();
        Matching::new(problem, assignment).expect("slot assignment respects quotas and lists")
    }
}

#[derive(Clone, Debug)]
pub struct RmOutcome {
    pub matching: Matching,
    /// The minimum total rank over all valid matchings.
    pub total_rank: u64,
}

/// Finds a matching of minimum total rank.
///
/// Successive shortest paths: students enter one at a time and each takes
/// the cheapest augmenting route, displacing earlier students along the way
/// when that lowers the sum. Unassignment is an ordinary destination, so a
/// route may end by bumping someone out entirely. An exchange argument
/// shows students never return from unassignment, which keeps the search
/// over slots only.
pub fn run_rm(problem: &Problem) -> RmOutcome {
    let graph = SeatGraph::build(problem);
    let nslots = graph.slot_count();
    let mut slot_holder: Vec<Option<StudentId>> = vec![None; nslots];
    let mut student_slot: Vec<Option<u32>> = vec![None; problem.student_count()];

    // Path costs are reduced by the displaced holder's seat cost, so
    // intermediate distances can dip below zero; only the final totals are
    // guaranteed nonnegative.
    const INF: i64 = i64::MAX;
    for i in problem.students() {
        let mut dist = vec![INF; nslots];
        let mut pred: Vec<(StudentId, Option<u32>)> = vec![(i, None); nslots];
        let mut queue = VecDeque::new();
        let mut queued = vec![false; nslots];
        for &(slot, cost) in graph.edges(i) {
            if (cost as i64) < dist[slot as usize] {
                dist[slot as usize] = cost as i64;
                pred[slot as usize] = (i, None);
                if !queued[slot as usize] {
                    queued[slot as usize] = true;
                    queue.push_back(slot);
                }
            }
        }
        while let Some(t) = queue.pop_front() {
            queued[t as usize] = false;
            let Some(j) = slot_holder[t as usize] else {
                continue;
            };
            let base = dist[t as usize] - graph.cost(j, t) as i64;
            for &(t2, c2) in graph.edges(j) {
                if t2 == t {
                    continue;
                }
                let relaxed = base + c2 as i64;
                if relaxed < dist[t2 as usize] {
                    dist[t2 as usize] = relaxed;
                    pred[t2 as usize] = (j, Some(t));
                    if !queued[t2 as usize] {
                        queued[t2 as usize] = true;
                        queue.push_back(t2);
                    }
                }
            }
        }

        // Cheapest way to finish: stay unassigned, take a free slot, or
        // push the final slot's holder out. First option scanned wins ties.
        let mut best = graph.null_cost(i) as i64;
        let mut target: Option<u32> = None;
        for t in 0..nslots as u32 {
            if dist[t as usize] == INF {
                continue;
            }
            let total = match slot_holder[t as usize] {
                None => dist[t as usize],
                Some(j) => dist[t as usize] - graph.cost(j, t) as i64 + graph.null_cost(j) as i64,
            };
            if total < best {
                best = total;
                target = Some(t);
            }
        }

        if let Some(t) = target {
            if let Some(j) = slot_holder[t as usize] {
                student_slot[j.index()] = None;
            }
            let mut cur = t;
            loop {
                let (student, from) = pred[cur as usize];
                slot_holder[cur as usize] = Some(student);
                student_slot[student.index()] = Some(cur);
                match from {
                    Some(prev) => cur = prev,
                    None => break,
                }
            }
        }
    }

    let total_rank = student_slot
        .iter()
        .enumerate()
        .map(|(i, slot)| match slot {
            Some(t) => graph.cost(StudentId(i as u32), *t) as u64,
            None => graph.null_cost[i] as u64,
        })
        .sum();
    RmOutcome {
        matching: graph.matching(problem, &student_slot),
        total_rank,
    }
}

#[derive(Clone, Debug)]
pub struct RawlsianOutcome {
    pub matching: Matching,
    /// The minimum achievable worst rank over all valid matchings.
    pub max_rank: u32,
}

/// Finds a matching minimizing the worst-off student's rank.
///
/// Binary search on the answer: a cap `k` is feasible when every student
/// whose unassignment rank exceeds `k` can be seated at rank at most `k`
/// simultaneously, checked with augmenting paths. Students who tolerate
/// unassignment under the cap cannot make it infeasible, so they are seated
/// afterward where room remains.
pub fn run_rawlsian(problem: &Problem) -> RawlsianOutcome {
    if problem.student_count() == 0 {
        let matching = Matching::new(problem, Vec::new()).expect("empty matching is valid");
        return RawlsianOutcome {
            matching,
            max_rank: 0,
        };
    }
    let graph = SeatGraph::build(problem);
    let worst_null = problem
        .students()
        .map(|i| graph.null_cost(i))
        .max()
        .expect("at least one student");

    let mut lo = 1u32;
    let mut hi = worst_null;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if seat_forced_students(problem, &graph, mid).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let cap = lo;

    let mut slot_holder =
        seat_forced_students(problem, &graph, cap).expect("cap came from a feasible check");
    let mut student_slot: Vec<Option<u32>> = vec![None; problem.student_count()];
    for (t, holder) in slot_holder.iter().enumerate() {
        if let Some(j) = holder {
            student_slot[j.index()] = Some(t as u32);
        }
    }
    for i in problem.students() {
        if student_slot[i.index()].is_some() || graph.null_cost(i) > cap {
            continue;
        }
        for &(slot, cost) in graph.edges(i) {
            if cost > cap {
                break;
            }
            if slot_holder[slot as usize].is_none() {
                slot_holder[slot as usize] = Some(i);
                student_slot[i.index()] = Some(slot);
                break;
            }
        }
    }

    RawlsianOutcome {
        matching: graph.matching(problem, &student_slot),
        max_rank: cap,
    }
}

/// Tries to seat every student who cannot afford unassignment under `cap`
/// at rank at most `cap`. Returns the slot assignment on success.
fn seat_forced_students(
    problem: &Problem,
    graph: &SeatGraph,
    cap: u32,
) -> Option<Vec<Option<StudentId>>> {
    let mut slot_holder: Vec<Option<StudentId>> = vec![None; graph.slot_count()];
    let mut visited = vec![false; graph.slot_count()];
    for i in problem.students() {
        if graph.null_cost(i) <= cap {
            continue;
        }
        visited.fill(false);
        if !augment(graph, cap, i, &mut slot_holder, &mut visited) {
            return None;
        }
    }
    Some(slot_holder)
}

fn augment(
    graph: &SeatGraph,
    cap: u32,
    i: StudentId,
    slot_holder: &mut Vec<Option<StudentId>>,
    visited: &mut Vec<bool>,
) -> bool {
    for &(slot, cost) in graph.edges(i) {
        if cost > cap {
            break;
        }
        if visited[slot as usize] {
            continue;
        }
        visited[slot as usize] = true;
        let vacant = match slot_holder[slot as usize] {
            None => true,
            Some(j) => augment(graph, cap, j, slot_holder, visited),
        };
        if vacant {
            slot_holder[slot as usize] = Some(i);
            return true;
        }
    }
    false
}

//! Assignment diagnostics: the envy digraph, students beyond the reach of
//! any improvement cycle, exact fairness and efficiency ratios, and group
//! composition tables.

use num_rational::Ratio;
use thiserror::Error;

use crate::matching::{stability_report, Matching, Violation};
use crate::mechanisms::run_da;
use crate::optimal::{run_rawlsian, run_rm};
use crate::problem::{Group, Problem, SchoolId, StudentId};

/// The envy digraph of a matching: an edge from `i` to `j` whenever `i`
/// strictly prefers `j`'s school to their own assignment.
///
/// Unassigned students can envy but never be envied, since losing a seat
/// altogether improves nobody.
#[derive(Clone, Debug)]
pub struct EnvyDigraph {
    edges: Vec<Vec<StudentId>>,
    sccs: Vec<Vec<StudentId>>,
    in_cycle: Vec<bool>,
}

impl EnvyDigraph {
    /// Out-neighbors of a student, ascending by index.
    pub fn edges(&self, i: StudentId) -> &[StudentId] {
        &self.edges[i.index()]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|e| e.len()).sum()
    }

    /// All strongly connected components. Members ascend by index; the
    /// components are ordered by their smallest member.
    pub fn sccs(&self) -> &[Vec<StudentId>] {
        &self.sccs
    }

    /// Components of size at least two: the places trading cycles live.
    pub fn nontrivial_sccs(&self) -> impl Iterator<Item = &Vec<StudentId>> {
        self.sccs.iter().filter(|scc| scc.len() >= 2)
    }

    /// True when the student lies on some envy cycle, i.e. in a strongly
    /// connected component of size at least two.
    pub fn in_cycle(&self, i: StudentId) -> bool {
        self.in_cycle[i.index()]
    }

    pub fn is_acyclic(&self) -> bool {
        !self.in_cycle.iter().any(|&c| c)
    }

    /// Students on some cycle, ascending.
    pub fn cyclic_students(&self) -> Vec<StudentId> {
        self.in_cycle
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c)
            .map(|(i, _)| StudentId(i as u32))
            .collect()
    }
}

/// Builds the envy digraph of `matching`.
pub fn envy_digraph(problem: &Problem, matching: &Matching) -> EnvyDigraph {
    let occupants = matching.occupants(problem);
    let mut edges: Vec<Vec<StudentId>> = Vec::with_capacity(problem.student_count());
    for i in problem.students() {
        let own_rank = problem
            .rank(i, matching.school_of(i))
            .expect("matching assigns an acceptable school");
        let mut targets: Vec<StudentId> = problem
            .prefs(i)
            .iter()
            .take(own_rank as usize - 1)
            .flat_map(|s| occupants[s.index()].iter().copied())
            .collect();
        targets.sort_unstable();
        edges.push(targets);
    }
    let sccs = tarjan_sccs(&edges);
    let mut in_cycle = vec![false; edges.len()];
    for scc in &sccs {
        if scc.len() >= 2 {
            for &i in scc {
                in_cycle[i.index()] = true;
            }
        }
    }
    EnvyDigraph {
        edges,
        sccs,
        in_cycle,
    }
}

/// Iterative Tarjan. Components come out sorted internally and ordered by
/// smallest member, a canonical presentation independent of visit order.
fn tarjan_sccs(edges: &[Vec<StudentId>]) -> Vec<Vec<StudentId>> {
    const UNVISITED: u32 = u32::MAX;
    let n = edges.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut sccs = Vec::new();

    // Explicit DFS frames: (node, next edge position).
    let mut frames: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != UNVISITED {
            continue;
        }
        frames.push((root, 0));
        while let Some(&mut (v, ref mut edge_pos)) = frames.last_mut() {
            let vi = v as usize;
            if *edge_pos == 0 {
                index[vi] = next_index;
                low[vi] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[vi] = true;
            }
            if let Some(&w) = edges[vi].get(*edge_pos) {
                *edge_pos += 1;
                let wi = w.index();
                if index[wi] == UNVISITED {
                    frames.push((w.0, 0));
                } else if on_stack[wi] {
                    low[vi] = low[vi].min(index[wi]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    let pi = parent as usize;
                    low[pi] = low[pi].min(low[vi]);
                }
                if low[vi] == index[vi] {
                    let mut scc = Vec::new();
                    loop {
                        let w = stack.pop().expect("root still on stack");
                        on_stack[w as usize] = false;
                        scc.push(StudentId(w));
                        if w == v {
                            break;
                        }
                    }
                    scc.sort_unstable();
                    sccs.push(scc);
                }
            }
        }
    }
    sccs.sort_by_key(|scc| scc[0]);
    sccs
}

/// Students that no trading cycle of the deferred acceptance envy digraph
/// touches: their assignment is final under every mechanism that weakly
/// improves on deferred acceptance.
pub fn unimprovable_students(problem: &Problem) -> Vec<StudentId> {
    let matching = run_da(problem).matching;
    let digraph = envy_digraph(problem, &matching);
    problem
        .students()
        .filter(|&i| !digraph.in_cycle(i))
        .collect()
}

/// The cheaply certified subset of [`unimprovable_students`]: students the
/// deferred acceptance run leaves unassigned, and students assigned to a
/// school that never rejected anyone.
pub fn unimprovable_certificates(problem: &Problem) -> Vec<StudentId> {
    let outcome = run_da(problem);
    let never_rejected = outcome.trace.never_rejected(problem);
    let mut safe_school = vec![false; problem.school_count()];
    for s in never_rejected {
        safe_school[s.index()] = true;
    }
    problem
        .students()
        .filter(|&i| match outcome.matching.school_of(i) {
            None => true,
            Some(s) => safe_school[s.index()],
        })
        .collect()
}

/// Worst student rank under `matching`, divided by the best achievable
/// worst rank over all valid matchings. Exact; at least 1 whenever
/// `matching` weakly improves on deferred acceptance.
///
/// Panics on an instance with no students (the ratio has no meaning there).
pub fn inequality_ratio(problem: &Problem, matching: &Matching) -> Ratio<i64> {
    assert!(
        problem.student_count() > 0,
        "inequality ratio needs at least one student"
    );
    let best = run_rawlsian(problem).max_rank;
    Ratio::new(matching.max_rank(problem) as i64, best as i64)
}

/// Total rank under `matching`, divided by the minimum achievable total
/// rank. Exact.
///
/// Panics on an instance with no students.
pub fn rank_inefficiency_ratio(problem: &Problem, matching: &Matching) -> Ratio<i64> {
    assert!(
        problem.student_count() > 0,
        "rank-inefficiency ratio needs at least one student"
    );
    let best = run_rm(problem).total_rank;
    Ratio::new(matching.total_rank(problem) as i64, best as i64)
}

/// How a school's intake splits across the two groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchoolMix {
    Empty,
    AllAdvantaged,
    AllMarginalized,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchoolComposition {
    pub school: SchoolId,
    pub advantaged: u32,
    pub marginalized: u32,
    pub empty_seats: u32,
    pub mix: SchoolMix,
}

/// Per-school group composition of a matching, in school declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionTable {
    pub rows: Vec<SchoolComposition>,
}

impl CompositionTable {
    /// Schools enrolling students from exactly one group. Schools with no
    /// students do not count.
    pub fn fully_segregated(&self) -> Vec<SchoolId> {
        self.rows
            .iter()
            .filter(|r| matches!(r.mix, SchoolMix::AllAdvantaged | SchoolMix::AllMarginalized))
            .map(|r| r.school)
            .collect()
    }

    /// (advantaged, marginalized) counts per school, for quick comparisons.
    pub fn counts(&self) -> Vec<(u32, u32)> {
        self.rows.iter().map(|r| (r.advantaged, r.marginalized)).collect()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("the problem carries no group labels")]
pub struct GroupsMissing;

/// Tabulates the group composition of every school under `matching`.
/// Requires group labels on the problem.
pub fn composition(
    problem: &Problem,
    matching: &Matching,
) -> Result<CompositionTable, GroupsMissing> {
    let groups = problem.groups().ok_or(GroupsMissing)?;
    let mut advantaged = vec![0u32; problem.school_count()];
    let mut marginalized = vec![0u32; problem.school_count()];
    for (i, &school) in matching.assignments().iter().enumerate() {
        if let Some(s) = school {
            match groups[i] {
                Group::Advantaged => advantaged[s.index()] += 1,
                Group::Marginalized => marginalized[s.index()] += 1,
            }
        }
    }
    let rows = problem
        .schools()
        .map(|s| {
            let (a, z) = (advantaged[s.index()], marginalized[s.index()]);
            let mix = match (a, z) {
                (0, 0) => SchoolMix::Empty,
                (_, 0) => SchoolMix::AllAdvantaged,
                (0, _) => SchoolMix::AllMarginalized,
                _ => SchoolMix::Mixed,
            };
            SchoolComposition {
                school: s,
                advantaged: a,
                marginalized: z,
                empty_seats: problem.quota(s) - a - z,
                mix,
            }
        })
        .collect();
    Ok(CompositionTable { rows })
}

/// Everything worth reporting about one matching, with exact arithmetic.
#[derive(Clone, Debug)]
pub struct MetricsReport {
    pub rank_vector: Vec<u32>,
    pub total_rank: u64,
    pub average_rank: Ratio<i64>,
    pub max_rank: u32,
    /// Distinct (student, school) blocking pairs.
    pub blocking_pairs: usize,
    pub violations: Vec<Violation>,
    pub inequality_ratio: Ratio<i64>,
    pub rank_inefficiency_ratio: Ratio<i64>,
}

/// Computes the full report. Solves the two benchmark problems internally,
/// so this costs far more than the individual accessors; panics on an
/// instance with no students.
pub fn metrics_report(problem: &Problem, matching: &Matching) -> MetricsReport {
    let rank_vector = matching.rank_vector(problem);
    let total_rank: u64 = rank_vector.iter().map(|&r| r as u64).sum();
    let max_rank = rank_vector.iter().copied().max().unwrap_or(0);
    let stability = stability_report(problem, matching);
    MetricsReport {
        average_rank: Ratio::new(total_rank as i64, rank_vector.len() as i64),
        rank_vector,
        total_rank,
        max_rank,
        blocking_pairs: stability.blocking_pairs().len(),
        violations: stability.violations,
        inequality_ratio: inequality_ratio(problem, matching),
        rank_inefficiency_ratio: rank_inefficiency_ratio(problem, matching),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemParts;

    fn swap_instance() -> Problem {
        ProblemParts {
            student_names: vec!["i1".into(), "i2".into(), "i3".into()],
            school_names: vec!["s1".into(), "s2".into()],
            quotas: vec![1, 1],
            prefs: vec![
                vec![SchoolId(1), SchoolId(0)],
                vec![SchoolId(0), SchoolId(1)],
                vec![SchoolId(0), SchoolId(1)],
            ],
            prios: vec![
                vec![StudentId(0), StudentId(2), StudentId(1)],
                vec![StudentId(1), StudentId(0), StudentId(2)],
            ],
            groups: None,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn mutual_envy_shows_as_two_cycle() {
        let p = swap_instance();
        let mu = run_da(&p).matching;
        assert_eq!(
            mu.assignments(),
            &[Some(SchoolId(0)), Some(SchoolId(1)), None]
        );
        let g = envy_digraph(&p, &mu);
        assert_eq!(g.edges(StudentId(0)), &[StudentId(1)]);
        assert_eq!(g.edges(StudentId(1)), &[StudentId(0)]);
        assert_eq!(g.edges(StudentId(2)), &[StudentId(0), StudentId(1)]);
        assert_eq!(g.edge_count(), 4);
        assert!(g.in_cycle(StudentId(0)) && g.in_cycle(StudentId(1)));
        assert!(!g.in_cycle(StudentId(2)));
        assert_eq!(
            g.nontrivial_sccs().collect::<Vec<_>>(),
            vec![&vec![StudentId(0), StudentId(1)]]
        );
        assert_eq!(unimprovable_students(&p), vec![StudentId(2)]);
    }

    #[test]
    fn single_student_digraph_is_empty() {
        let p = ProblemParts {
            student_names: vec!["i1".into()],
            school_names: vec!["s1".into()],
            quotas: vec![1],
            prefs: vec![vec![SchoolId(0)]],
            prios: vec![vec![StudentId(0)]],
            groups: None,
        }
        .validate()
        .unwrap();
        let mu = run_da(&p).matching;
        let g = envy_digraph(&p, &mu);
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_acyclic());
        assert_eq!(unimprovable_students(&p), vec![StudentId(0)]);
        assert_eq!(unimprovable_certificates(&p), vec![StudentId(0)]);
    }

    #[test]
    fn rejected_student_is_certified_via_null() {
        let p = ProblemParts {
            student_names: vec!["i1".into(), "i2".into()],
            school_names: vec!["s1".into()],
            quotas: vec![1],
            prefs: vec![vec![SchoolId(0)], vec![SchoolId(0)]],
            prios: vec![vec![StudentId(0), StudentId(1)]],
            groups: None,
        }
        .validate()
        .unwrap();
        // s1 rejects i2, so only the null certificate applies to i2; i1's
        // school rejected someone and certifies nothing.
        assert_eq!(unimprovable_certificates(&p), vec![StudentId(1)]);
        assert_eq!(
            unimprovable_students(&p),
            vec![StudentId(0), StudentId(1)]
        );
    }

    #[test]
    fn composition_requires_groups() {
        let p = swap_instance();
        let mu = run_da(&p).matching;
        assert_eq!(composition(&p, &mu), Err(GroupsMissing));
    }

    #[test]
    fn composition_counts_and_flags() {
        let mut parts = ProblemParts {
            student_names: vec!["i1".into(), "i2".into(), "i3".into()],
            school_names: vec!["s1".into(), "s2".into(), "s3".into()],
            quotas: vec![2, 1, 1],
            prefs: vec![vec![SchoolId(0)], vec![SchoolId(0)], vec![SchoolId(1)]],
            prios: vec![
                vec![StudentId(0), StudentId(1), StudentId(2)],
                vec![StudentId(0), StudentId(1), StudentId(2)],
                vec![StudentId(0), StudentId(1), StudentId(2)],
            ],
            groups: None,
        };
        parts.groups = Some(vec![
            Group::Advantaged,
            Group::Marginalized,
            Group::Marginalized,
        ]);
        let p = parts.validate().unwrap();
        let mu = run_da(&p).matching;
        let table = composition(&p, &mu).unwrap();
        assert_eq!(table.counts(), vec![(1, 1), (0, 1), (0, 0)]);
        assert_eq!(
            table.rows.iter().map(|r| r.mix).collect::<Vec<_>>(),
            vec![SchoolMix::Mixed, SchoolMix::AllMarginalized, SchoolMix::Empty]
        );
        assert_eq!(table.fully_segregated(), vec![SchoolId(1)]);
        assert_eq!(table.rows[2].empty_seats, 1);
    }
}

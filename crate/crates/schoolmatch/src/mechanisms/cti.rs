//! Cycle-trading improvement over the deferred acceptance assignment.
//!
//! Starting from deferred acceptance, build the envy digraph of the current
//! assignment, pick a trading cycle by a fixed deterministic rule, execute
//! it (every student on the cycle receives the seat of the student they
//! envy), and repeat until the digraph is acyclic. Each trade strictly
//! improves everyone on the cycle and leaves school occupancies untouched,
//! so the result weakly improves every student over deferred acceptance and
//! no further seat permutation can improve anyone without hurting someone.

use crate::diagnostics::envy_digraph;
use crate::matching::Matching;
use crate::mechanisms::run_da;
use crate::problem::{Problem, SchoolId, StudentId};

/// One student's move within an executed cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeMove {
    pub student: StudentId,
    pub from: SchoolId,
    pub to: SchoolId,
}

/// An executed trading cycle, in walk order: each student moves to the seat
/// of the next one, and the last moves to the seat of the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeCycle {
    pub moves: Vec<TradeMove>,
}

#[derive(Clone, Debug)]
pub struct CtiOutcome {
    pub matching: Matching,
    pub trades: Vec<TradeCycle>,
}

/// Runs the improvement pass.
///
/// Cycle selection is deterministic: start from the lowest-index student
/// that lies on any cycle, then repeatedly step to the lowest-index envied
/// student within the same strongly connected component until a student
/// repeats; the repeated suffix is the cycle. Every trade lowers the total
/// rank by at least one, so at most (students x schools) trades can occur.
pub fn run_cti(problem: &Problem) -> CtiOutcome {
    let mut matching = run_da(problem).matching;
    let mut trades = Vec::new();

    loop {
        let digraph = envy_digraph(problem, &matching);
        let Some(start) = problem.students().find(|&i| digraph.in_cycle(i)) else {
            break;
        };
        let component = digraph
            .sccs()
            .iter()
            .find(|scc| scc.contains(&start))
            .expect("every student lies in some component");

        let mut pos_in_path = vec![usize::MAX; problem.student_count()];
        let mut path = Vec::new();
        let mut current = start;
        let cycle_start = loop {
            if pos_in_path[current.index()] != usize::MAX {
                break pos_in_path[current.index()];
            }
            pos_in_path[current.index()] = path.len();
            path.push(current);
            current = digraph
                .edges(current)
                .iter()
                .copied()
                .find(|j| component.contains(j))
                .expect("strongly connected components of size >= 2 keep an inner edge");
        };
        let cycle = &path[cycle_start..];

        let mut assignment = matching.assignments().to_vec();
        let mut moves = Vec::with_capacity(cycle.len());
        for (step, &i) in cycle.iter().enumerate() {
            let next = cycle[(step + 1) % cycle.len()];
            let from = matching.school_of(i).expect("envied students hold seats");
            let to = matching.school_of(next).expect("envied students hold seats");
            assignment[i.index()] = Some(to);
            moves.push(TradeMove { student: i, from, to });
        }
        matching = Matching::new(problem, assignment).expect("cycle trades preserve validity");
        trades.push(TradeCycle { moves });
    }

    CtiOutcome { matching, trades }
}

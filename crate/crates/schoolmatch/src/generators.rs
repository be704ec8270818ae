//! Instance families: an adversarial construction with provably bad
//! deferred acceptance ranks, seeded uniform random markets, and two-group
//! markets with across-the-board priority gaps.
//!
//! Generation is a pure function of its parameters. The generator is a
//! self-contained splitmix64 so that a seed printed in a failure report
//! reproduces the instance anywhere, independent of library versions.

use thiserror::Error;

use crate::problem::{Group, Problem, ProblemParts, SchoolId, StudentId};

/// splitmix64: state advances by the 64-bit golden-ratio constant
/// 0x9E3779B97F4A7C15 and the output is finalized with the two mixing
/// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB from the
/// reference implementation. Passes through every 64-bit value once per
/// period.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` by reduction. The modulo bias is below
    /// bound / 2^64, irrelevant at the bounds used here.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        self.next_u64() % bound
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Worstcase,
    Random,
    TwoGroup,
}

/// Parameters for [`generate`]. The worst-case family reads only
/// `schools`; the random families read everything except
/// `marginalized_fraction`, which is specific to [`Family::TwoGroup`].
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub family: Family,
    pub students: u32,
    pub schools: u32,
    pub quota: u32,
    pub list_len: u32,
    pub marginalized_fraction: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("the worst-case family needs at least 2 schools, got {0}")]
    WorstcaseTooSmall(u32),
    #[error("{0} must be positive")]
    ZeroParameter(&'static str),
    #[error("list length {list_len} exceeds the school count {schools}")]
    ListTooLong { list_len: u32, schools: u32 },
    #[error("marginalized fraction {0} must lie strictly between 0 and 1")]
    FractionOutOfRange(f64),
    #[error("the {0} group would be empty at this fraction")]
    EmptyGroup(&'static str),
}

pub fn generate(spec: &GeneratorSpec) -> Result<Problem, GeneratorError> {
    match spec.family {
        Family::Worstcase => gen_worstcase(spec.schools),
        Family::Random => gen_random(spec),
        Family::TwoGroup => gen_two_group(spec),
    }
}

fn student_names(m: u32) -> Vec<String> {
    (1..=m).map(|k| format!("i{k}")).collect()
}

fn school_names(n: u32) -> Vec<String> {
    (1..=n).map(|k| format!("s{k}")).collect()
}

/// The adversarial family: n students, n unit-quota schools.
///
/// Student i1 ranks s1 first and sn second; student ik ranks s(k-1) first,
/// then s1 through s(k-2) in order, with its namesake sk pushed down to
/// rank k. School sk prioritizes ik, ik+1, ..., in ahead of i1, ...,
/// ik-1. Unspecified tail entries follow in ascending index order.
///
/// Deferred acceptance walks every student down to their namesake school,
/// so ik lands at rank k while seating everyone at their first or second
/// choice remains possible.
pub fn gen_worstcase(n: u32) -> Result<Problem, GeneratorError> {
    if n < 2 {
        return Err(GeneratorError::WorstcaseTooSmall(n));
    }
    let mut prefs = Vec::with_capacity(n as usize);
    let mut first = Vec::with_capacity(n as usize);
    first.push(SchoolId(0));
    first.push(SchoolId(n - 1));
    first.extend((1..n - 1).map(SchoolId));
    prefs.push(first);
    for k in 2..=n {
        let mut list = Vec::with_capacity(n as usize);
        list.push(SchoolId(k - 2));
        list.extend((0..k - 2).map(SchoolId));
        list.push(SchoolId(k - 1));
        list.extend((k..n).map(SchoolId));
        prefs.push(list);
    }
    let prios = (1..=n)
        .map(|k| {
            let mut order: Vec<StudentId> = (k - 1..n).map(StudentId).collect();
            order.extend((0..k - 1).map(StudentId));
            order
        })
        .collect();
    let problem = ProblemParts {
        student_names: student_names(n),
        school_names: school_names(n),
        quotas: vec![1; n as usize],
        prefs,
        prios,
        groups: None,
    }
    .validate()
    .expect("worst-case construction validates");
    Ok(problem)
}

fn check_random_spec(spec: &GeneratorSpec) -> Result<(), GeneratorError> {
    for (value, name) in [
        (spec.students, "student count"),
        (spec.schools, "school count"),
        (spec.quota, "quota"),
        (spec.list_len, "list length"),
    ] {
        if value == 0 {
            return Err(GeneratorError::ZeroParameter(name));
        }
    }
    if spec.list_len > spec.schools {
        return Err(GeneratorError::ListTooLong {
            list_len: spec.list_len,
            schools: spec.schools,
        });
    }
    Ok(())
}

/// Draws each student's list as a uniform ordered sample of distinct
/// schools, students in index order. Returns the lists plus, per school,
/// the students who listed it in index order.
fn draw_prefs(
    spec: &GeneratorSpec,
    rng: &mut SplitMix64,
) -> (Vec<Vec<SchoolId>>, Vec<Vec<StudentId>>) {
    let n = spec.schools;
    let mut scratch: Vec<u32> = (0..n).collect();
    let mut swaps: Vec<(usize, usize)> = Vec::with_capacity(spec.list_len as usize);
    let mut prefs = Vec::with_capacity(spec.students as usize);
    let mut listers: Vec<Vec<StudentId>> = vec![Vec::new(); n as usize];
    for i in 0..spec.students {
        swaps.clear();
        let mut list = Vec::with_capacity(spec.list_len as usize);
        for pos in 0..spec.list_len as usize {
            let j = pos + rng.next_below((n as usize - pos) as u64) as usize;
            scratch.swap(pos, j);
            swaps.push((pos, j));
            let s = SchoolId(scratch[pos]);
            list.push(s);
            listers[s.index()].push(StudentId(i));
        }
        prefs.push(list);
        for &(pos, j) in swaps.iter().rev() {
            scratch.swap(pos, j);
        }
    }
    (prefs, listers)
}

/// A uniform random market. Priorities are stored only over the students
/// who list each school, shuffled uniformly; every consumer of priorities
/// compares students competing at the same school, and restricting a
/// uniform permutation to the competitors is again uniform, so the stored
/// form is observationally equivalent to full permutations at a fraction
/// of the memory.
pub fn gen_random(spec: &GeneratorSpec) -> Result<Problem, GeneratorError> {
    check_random_spec(spec)?;
    let mut rng = SplitMix64::new(spec.seed);
    let (prefs, mut listers) = draw_prefs(spec, &mut rng);
    for list in &mut listers {
        rng.shuffle(list);
    }
    let problem = ProblemParts {
        student_names: student_names(spec.students),
        school_names: school_names(spec.schools),
        quotas: vec![spec.quota; spec.schools as usize],
        prefs,
        prios: listers,
        groups: None,
    }
    .validate()
    .expect("random construction validates");
    Ok(problem)
}

/// A random market split into an advantaged and a marginalized group,
/// where every school ranks every advantaged student above every
/// marginalized one. The last students by index form the marginalized
/// group, sized by rounding the fraction.
pub fn gen_two_group(spec: &GeneratorSpec) -> Result<Problem, GeneratorError> {
    check_random_spec(spec)?;
    if !(spec.marginalized_fraction > 0.0 && spec.marginalized_fraction < 1.0) {
        return Err(GeneratorError::FractionOutOfRange(
            spec.marginalized_fraction,
        ));
    }
    let m = spec.students;
    let marginalized = (spec.marginalized_fraction * m as f64).round() as u32;
    if marginalized == 0 {
        return Err(GeneratorError::EmptyGroup("marginalized"));
    }
    if marginalized == m {
        return Err(GeneratorError::EmptyGroup("advantaged"));
    }
    let split = m - marginalized;

    let mut rng = SplitMix64::new(spec.seed);
    let (prefs, _) = draw_prefs(spec, &mut rng);
    let prios = (0..spec.schools)
        .map(|_| {
            let mut order: Vec<StudentId> = (0..m).map(StudentId).collect();
            rng.shuffle(&mut order[..split as usize]);
            rng.shuffle(&mut order[split as usize..]);
            order
        })
        .collect();
    let groups = (0..m)
        .map(|i| {
            if i < split {
                Group::Advantaged
            } else {
                Group::Marginalized
            }
        })
        .collect();
    let problem = ProblemParts {
        student_names: student_names(m),
        school_names: school_names(spec.schools),
        quotas: vec![spec.quota; spec.schools as usize],
        prefs,
        prios,
        groups: Some(groups),
    }
    .validate()
    .expect("two-group construction validates");
    Ok(problem)
}

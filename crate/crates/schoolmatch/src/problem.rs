//! Problem instances: students, schools, preferences, priorities, groups.
//!
//! A [`Problem`] is immutable once built. Construction goes through
//! [`ProblemParts::validate`], which checks every structural invariant and
//! reports *all* violations rather than the first one.
//!
//! Two conventions apply everywhere in this crate:
//!
//! * **Ranks are 1-based.** A student's best listed school has rank 1. The
//!   null assignment (no school) ranks directly below the last listed school,
//!   at `list length + 1`. Unlisted schools are unacceptable and have no rank.
//! * **Priority orders are total.** A school's stored priority list may be
//!   truncated; the students missing from it follow the stored prefix in
//!   ascending declaration order. Rank queries resolve positions in that
//!   completed order, so a truncated list and its completion behave
//!   identically.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a student, in declaration order within its [`Problem`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StudentId(pub u32);

/// Index of a school, in declaration order within its [`Problem`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SchoolId(pub u32);

impl StudentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SchoolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "student#{}", self.0)
    }
}

impl fmt::Display for SchoolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "school#{}", self.0)
    }
}

/// Side of the two-group partition a student belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Group {
    Advantaged,
    Marginalized,
}

/// Raw, unchecked description of an instance. Turn it into a [`Problem`]
/// with [`ProblemParts::validate`].
#[derive(Clone, Debug, Default)]
pub struct ProblemParts {
    pub student_names: Vec<String>,
    pub school_names: Vec<String>,
    /// One quota per school, same order as `school_names`.
    pub quotas: Vec<u32>,
    /// One strict preference list per student; truncation allowed.
    pub prefs: Vec<Vec<SchoolId>>,
    /// One priority list per school; a truncated list is completed by
    /// appending the missing students in ascending index order.
    pub prios: Vec<Vec<StudentId>>,
    /// `None` for an ungrouped instance; `Some` holds one label per student.
    pub groups: Option<Vec<Group>>,
}

/// A structural defect found by [`ProblemParts::validate`].
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ValidationError {
    #[error("expected {expected} {what}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("duplicate student name {name:?}")]
    DuplicateStudentName { name: String },
    #[error("duplicate school name {name:?}")]
    DuplicateSchoolName { name: String },
    #[error("student {student}: school index {index} is out of range")]
    PrefOutOfRange { student: String, index: u32 },
    #[error("student {student}: school {school} appears more than once in the preference list")]
    DuplicatePreference { student: String, school: String },
    #[error("school {school}: quota must be at least 1")]
    ZeroQuota { school: String },
    #[error("school {school}: student index {index} is out of range")]
    PrioOutOfRange { school: String, index: u32 },
    #[error("school {school}: student {student} appears more than once in the priority order")]
    DuplicatePriority { school: String, student: String },
    #[error(
        "school {school}: marginalized student {marginalized} has priority over advantaged student {advantaged}"
    )]
    GroupPriorityOrder {
        school: String,
        marginalized: String,
        advantaged: String,
    },
}

impl ProblemParts {
    /// Checks every invariant and builds the [`Problem`].
    ///
    /// All violations are collected: duplicate preference entries, zero
    /// quotas, priority lists that are not (prefixes of) permutations, and,
    /// when group labels are present, any school whose completed priority
    /// order places a marginalized student above an advantaged one.
    pub fn validate(self) -> Result<Problem, Vec<ValidationError>> {
        let mut errors = Vec::new();
        let m = self.student_names.len();
        let n = self.school_names.len();

        let shapes = [
            ("preference lists", self.prefs.len(), m),
            ("priority lists", self.prios.len(), n),
            ("quotas", self.quotas.len(), n),
        ];
        for (what, found, expected) in shapes {
            if found != expected {
                errors.push(ValidationError::ShapeMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        if let Some(groups) = &self.groups {
            if groups.len() != m {
                errors.push(ValidationError::ShapeMismatch {
                    what: "group labels",
                    expected: m,
                    found: groups.len(),
                });
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let mut seen_students = HashMap::with_capacity(m);
        for name in &self.student_names {
            if seen_students.insert(name.as_str(), ()).is_some() {
                errors.push(ValidationError::DuplicateStudentName { name: name.clone() });
            }
        }
        let mut seen_schools = HashMap::with_capacity(n);
        for name in &self.school_names {
            if seen_schools.insert(name.as_str(), ()).is_some() {
                errors.push(ValidationError::DuplicateSchoolName { name: name.clone() });
            }
        }

        let mut seen = vec![false; n];
        for (i, list) in self.prefs.iter().enumerate() {
            for &s in list {
                if s.index() >= n {
                    errors.push(ValidationError::PrefOutOfRange {
                        student: self.student_names[i].clone(),
                        index: s.0,
                    });
                } else if seen[s.index()] {
                    errors.push(ValidationError::DuplicatePreference {
                        student: self.student_names[i].clone(),
                        school: self.school_names[s.index()].clone(),
                    });
                } else {
                    seen[s.index()] = true;
                }
            }
            for &s in list {
                if s.index() < n {
                    seen[s.index()] = false;
                }
            }
        }

        for (s, &q) in self.quotas.iter().enumerate() {
            if q == 0 {
                errors.push(ValidationError::ZeroQuota {
                    school: self.school_names[s].clone(),
                });
            }
        }

        let mut seen = vec![false; m];
        for (s, list) in self.prios.iter().enumerate() {
            for &i in list {
                if i.index() >= m {
                    errors.push(ValidationError::PrioOutOfRange {
                        school: self.school_names[s].clone(),
                        index: i.0,
                    });
                } else if seen[i.index()] {
                    errors.push(ValidationError::DuplicatePriority {
                        school: self.school_names[s].clone(),
                        student: self.student_names[i.index()].clone(),
                    });
                } else {
                    seen[i.index()] = true;
                }
            }
            for &i in list {
                if i.index() < m {
                    seen[i.index()] = false;
                }
            }
        }

        if !errors.is_empty() {
            return Err(errors);
        }

        if let Some(groups) = &self.groups {
            let has_adv = groups.contains(&Group::Advantaged);
            let has_marg = groups.contains(&Group::Marginalized);
            if has_adv && has_marg {
                for s in 0..n {
                    let mut in_list = vec![false; m];
                    for &i in &self.prios[s] {
                        in_list[i.index()] = true;
                    }
                    let completed = self.prios[s]
                        .iter()
                        .copied()
                        .chain((0..m as u32).map(StudentId).filter(|i| !in_list[i.index()]));
                    let mut first_marg: Option<StudentId> = None;
                    for i in completed {
                        match groups[i.index()] {
                            Group::Marginalized => {
                                if first_marg.is_none() {
                                    first_marg = Some(i);
                                }
                            }
                            Group::Advantaged => {
                                if let Some(marg) = first_marg {
                                    errors.push(ValidationError::GroupPriorityOrder {
                                        school: self.school_names[s].clone(),
                                        marginalized: self.student_names[marg.index()].clone(),
                                        advantaged: self.student_names[i.index()].clone(),
                                    });
                                    break;
                                }
                            }
                        }
                    }
                }
            }
        }

        if !errors.is_empty() {
            return Err(errors);
        }

        let prio_index = self
            .prios
            .iter()
            .map(|list| {
                let mut pairs: Vec<(u32, u32)> = list
                    .iter()
                    .enumerate()
                    .map(|(pos, &i)| (i.0, pos as u32))
                    .collect();
                pairs.sort_unstable();
                pairs
            })
            .collect();

        Ok(Problem {
            student_names: self.student_names,
            school_names: self.school_names,
            quotas: self.quotas,
            prefs: self.prefs,
            prios: self.prios,
            groups: self.groups,
            prio_index,
        })
    }
}

/// A validated school choice instance.
///
/// Equality compares the stored representation, including the stored
/// (possibly truncated) priority lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    student_names: Vec<String>,
    school_names: Vec<String>,
    quotas: Vec<u32>,
    prefs: Vec<Vec<SchoolId>>,
    prios: Vec<Vec<StudentId>>,
    groups: Option<Vec<Group>>,
    /// Per school: `(student index, position in stored priority list)`,
    /// sorted by student index. Lets [`Problem::priority_rank`] resolve the
    /// completed order without materializing it.
    prio_index: Vec<Vec<(u32, u32)>>,
}

impl Problem {
    pub fn student_count(&self) -> usize {
        self.student_names.len()
    }

    pub fn school_count(&self) -> usize {
        self.school_names.len()
    }

    pub fn students(&self) -> impl Iterator<Item = StudentId> {
        (0..self.student_count() as u32).map(StudentId)
    }

    pub fn schools(&self) -> impl Iterator<Item = SchoolId> {
        (0..self.school_count() as u32).map(SchoolId)
    }

    pub fn student_name(&self, i: StudentId) -> &str {
        &self.student_names[i.index()]
    }

    pub fn school_name(&self, s: SchoolId) -> &str {
        &self.school_names[s.index()]
    }

    /// Linear scan; parsers that resolve many names should build their own map.
    pub fn student_by_name(&self, name: &str) -> Option<StudentId> {
        self.student_names
            .iter()
            .position(|x| x == name)
            .map(|i| StudentId(i as u32))
    }

    pub fn school_by_name(&self, name: &str) -> Option<SchoolId> {
        self.school_names
            .iter()
            .position(|x| x == name)
            .map(|s| SchoolId(s as u32))
    }

    pub fn quota(&self, s: SchoolId) -> u32 {
        self.quotas[s.index()]
    }

    pub fn quotas(&self) -> &[u32] {
        &self.quotas
    }

    /// The student's strict preference list, best first.
    pub fn prefs(&self, i: StudentId) -> &[SchoolId] {
        &self.prefs[i.index()]
    }

    /// The school's priority list as stored (possibly truncated).
    pub fn stored_priority(&self, s: SchoolId) -> &[StudentId] {
        &self.prios[s.index()]
    }

    /// The full priority order: stored prefix, then every missing student in
    /// ascending index order. Allocates; meant for serialization and tests.
    pub fn completed_priority(&self, s: SchoolId) -> Vec<StudentId> {
        let mut in_list = vec![false; self.student_count()];
        for &i in &self.prios[s.index()] {
            in_list[i.index()] = true;
        }
        let mut order = self.prios[s.index()].clone();
        order.extend(self.students().filter(|i| !in_list[i.index()]));
        order
    }

    pub fn groups(&self) -> Option<&[Group]> {
        self.groups.as_deref()
    }

    pub fn group(&self, i: StudentId) -> Option<Group> {
        self.groups.as_ref().map(|g| g[i.index()])
    }

    /// 1-based rank of an assignment in the student's preference list.
    ///
    /// `None` (the null assignment) ranks `list length + 1`; an unlisted
    /// school is unacceptable and yields `None`.
    pub fn rank(&self, i: StudentId, school: Option<SchoolId>) -> Option<u32> {
        let prefs = &self.prefs[i.index()];
        match school {
            None => Some(prefs.len() as u32 + 1),
            Some(s) => prefs.iter().position(|&t| t == s).map(|p| p as u32 + 1),
        }
    }

    /// Rank of the null assignment for this student: `list length + 1`.
    pub fn null_rank(&self, i: StudentId) -> u32 {
        self.prefs[i.index()].len() as u32 + 1
    }

    pub fn is_acceptable(&self, i: StudentId, s: SchoolId) -> bool {
        self.prefs[i.index()].contains(&s)
    }

    /// 1-based position of a student in the school's completed priority
    /// order. Total: defined for every student, listed or not.
    pub fn priority_rank(&self, s: SchoolId, i: StudentId) -> u32 {
        self.priority_pos(s, i) + 1
    }

    /// 0-based position in the completed priority order.
    pub(crate) fn priority_pos(&self, s: SchoolId, i: StudentId) -> u32 {
        let index = &self.prio_index[s.index()];
        match index.binary_search_by_key(&i.0, |&(student, _)| student) {
            Ok(at) => index[at].1,
            // `at` counts stored students with a smaller index, so the
            // remaining smaller-indexed students all precede `i` in the
            // appended tail.
            Err(at) => self.prios[s.index()].len() as u32 + (i.0 - at as u32),
        }
    }

    /// True when the school prefers `a` to `b`.
    pub fn prefers(&self, s: SchoolId, a: StudentId, b: StudentId) -> bool {
        self.priority_pos(s, a) < self.priority_pos(s, b)
    }

    pub fn total_seats(&self) -> u64 {
        self.quotas.iter().map(|&q| q as u64).sum()
    }

    /// Longest preference list over all students; 0 for an empty instance.
    pub fn max_list_len(&self) -> u32 {
        self.prefs.iter().map(|p| p.len() as u32).max().unwrap_or(0)
    }
}

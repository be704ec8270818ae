//! Line-oriented text formats for problems and matchings.
//!
//! A problem file mixes five directives in any order, one per line, with
//! `#` starting a comment anywhere:
//!
//! ```text
//! problem <students> <schools>
//! school <name> <quota>
//! pref <student> : <school> <school> ...
//! prio <school> : <student> <student> ...
//! group <student> advantaged|marginalized
//! ```
//!
//! School order follows the `school` lines and student order follows the
//! `pref` lines. A `prio` line may stop early; unlisted students follow in
//! index order, so large instances only spell out the contested prefix.
//! Group lines are optional and default to advantaged once any appear.
//!
//! A matching file holds one `match <student> <school|->` line per
//! student, `-` meaning unassigned.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::matching::{Matching, MatchingError};
use crate::problem::{Group, Problem, ProblemParts, SchoolId, ValidationError};

/// A parse failure. `line` is 1-based; 0 marks whole-file problems.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Splits a line into tokens. `#` ends the line; `:` is always its own
/// token, with or without surrounding spaces.
fn tokenize(line: &str) -> Vec<&str> {
    let body = match line.find('#') {
        Some(at) => &line[..at],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (at, c) in body.char_indices() {
        if c.is_whitespace() || c == ':' {
            if let Some(s) = start.take() {
                tokens.push(&body[s..at]);
            }
            if c == ':' {
                tokens.push(&body[at..at + 1]);
            }
        } else if start.is_none() {
            start = Some(at);
        }
    }
    if let Some(s) = start {
        tokens.push(&body[s..]);
    }
    tokens
}

fn parse_count(token: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    token
        .parse()
        .map_err(|_| err(line, format!("expected a {what}, got {token:?}")))
}

struct Directive<'t> {
    line: usize,
    tokens: Vec<&'t str>,
}

fn named_lines<'t>(
    lines: impl Iterator<Item = &'t Directive<'t>>,
    keyword: &str,
    kind: &str,
) -> Result<HashMap<&'t str, usize>, ParseError> {
    let mut map = HashMap::new();
    for d in lines {
        let name = d.tokens[1];
        if let Some(&prev) = map.get(name) {
            return Err(err(
                d.line,
                format!("{keyword} line for {kind} {name} already given on line {prev}"),
            ));
        }
        map.insert(name, d.line);
    }
    Ok(map)
}

fn expect_colon(d: &Directive<'_>) -> Result<(), ParseError> {
    if d.tokens.len() < 3 || d.tokens[2] != ":" {
        return Err(err(
            d.line,
            format!("expected `{} <name> : ...`", d.tokens[0]),
        ));
    }
    Ok(())
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut schools: Vec<Directive> = Vec::new();
    let mut prefs: Vec<Directive> = Vec::new();
    let mut prios: Vec<Directive> = Vec::new();
    let mut groups: Vec<Directive> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let d = Directive { line, tokens };
        match d.tokens[0] {
            "problem" => {
                if let Some((prev, _, _)) = header {
                    return Err(err(
                        line,
                        format!("problem header already given on line {prev}"),
                    ));
                }
                if d.tokens.len() != 3 {
                    return Err(err(line, "expected `problem <students> <schools>`"));
                }
                let m = parse_count(d.tokens[1], line, "student count")?;
                let n = parse_count(d.tokens[2], line, "school count")?;
                header = Some((line, m, n));
            }
            "school" => {
                if d.tokens.len() != 3 {
                    return Err(err(line, "expected `school <name> <quota>`"));
                }
                schools.push(d);
            }
            "pref" => {
                expect_colon(&d)?;
                prefs.push(d);
            }
            "prio" => {
                expect_colon(&d)?;
                prios.push(d);
            }
            "group" => {
                if d.tokens.len() != 3 {
                    return Err(err(
                        line,
                        "expected `group <student> advantaged|marginalized`",
                    ));
                }
                groups.push(d);
            }
            other => return Err(err(line, format!("unknown directive {other:?}"))),
        }
    }

    let (header_line, m, n) =
        header.ok_or_else(|| err(0, "missing `problem <students> <schools>` header"))?;
    if schools.len() != n {
        return Err(err(
            header_line,
            format!("header declares {n} schools but {} school lines follow", schools.len()),
        ));
    }
    if prefs.len() != m {
        return Err(err(
            header_line,
            format!("header declares {m} students but {} pref lines follow", prefs.len()),
        ));
    }

    let school_lines = named_lines(schools.iter(), "school", "school")?;
    let pref_lines = named_lines(prefs.iter(), "pref", "student")?;
    let prio_lines = named_lines(prios.iter(), "prio", "school")?;
    named_lines(groups.iter(), "group", "student")?;

    let school_index: HashMap<&str, u32> = schools
        .iter()
        .enumerate()
        .map(|(k, d)| (d.tokens[1], k as u32))
        .collect();
    let student_index: HashMap<&str, u32> = prefs
        .iter()
        .enumerate()
        .map(|(k, d)| (d.tokens[1], k as u32))
        .collect();

    let mut quotas = Vec::with_capacity(n);
    for d in &schools {
        quotas.push(parse_count(d.tokens[2], d.line, "quota")? as u32);
    }

    let mut pref_lists = Vec::with_capacity(m);
    for d in &prefs {
        let mut list = Vec::with_capacity(d.tokens.len() - 3);
        for name in &d.tokens[3..] {
            let s = school_index
                .get(name)
                .ok_or_else(|| err(d.line, format!("unknown school {name:?}")))?;
            list.push(SchoolId(*s));
        }
        pref_lists.push(list);
    }

    let mut prio_lists: Vec<Option<(usize, Vec<crate::problem::StudentId>)>> = vec![None; n];
    for d in &prios {
        let name = d.tokens[1];
        let s = school_index
            .get(name)
            .ok_or_else(|| err(d.line, format!("unknown school {name:?}")))?;
        let mut list = Vec::with_capacity(d.tokens.len() - 3);
        for student in &d.tokens[3..] {
            let i = student_index
                .get(student)
                .ok_or_else(|| err(d.line, format!("unknown student {student:?}")))?;
            list.push(crate::problem::StudentId(*i));
        }
        prio_lists[*s as usize] = Some((d.line, list));
    }
    let mut prio_vecs = Vec::with_capacity(n);
    for (k, slot) in prio_lists.into_iter().enumerate() {
        match slot {
            Some((_, list)) => prio_vecs.push(list),
            None => {
                let d = &schools[k];
                return Err(err(
                    d.line,
                    format!("school {} has no prio line", d.tokens[1]),
                ));
            }
        }
    }

    let group_vec = if groups.is_empty() {
        None
    } else {
        let mut labels = vec![Group::Advantaged; m];
        for d in &groups {
            let name = d.tokens[1];
            let i = student_index
                .get(name)
                .ok_or_else(|| err(d.line, format!("unknown student {name:?}")))?;
            labels[*i as usize] = match d.tokens[2] {
                "advantaged" => Group::Advantaged,
                "marginalized" => Group::Marginalized,
                other => {
                    return Err(err(
                        d.line,
                        format!("expected advantaged or marginalized, got {other:?}"),
                    ))
                }
            };
        }
        Some(labels)
    };

    let parts = ProblemParts {
        student_names: prefs.iter().map(|d| d.tokens[1].to_string()).collect(),
        school_names: schools.iter().map(|d| d.tokens[1].to_string()).collect(),
        quotas,
        prefs: pref_lists,
        prios: prio_vecs,
        groups: group_vec,
    };
    parts.validate().map_err(|errors| {
        let first = &errors[0];
        let line = match first {
            ValidationError::DuplicatePreference { student, .. } => {
                pref_lines.get(student.as_str()).copied()
            }
            ValidationError::ZeroQuota { school } => school_lines.get(school.as_str()).copied(),
            ValidationError::DuplicatePriority { school, .. }
            | ValidationError::GroupPriorityOrder { school, .. } => {
                prio_lines.get(school.as_str()).copied()
            }
            ValidationError::DuplicateStudentName { name } => {
                pref_lines.get(name.as_str()).copied()
            }
            ValidationError::DuplicateSchoolName { name } => {
                school_lines.get(name.as_str()).copied()
            }
            _ => None,
        };
        err(line.unwrap_or(0), first.to_string())
    })
}

pub fn serialize_problem(problem: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "problem {} {}",
        problem.student_count(),
        problem.school_count()
    );
    for s in problem.schools() {
        let _ = writeln!(out, "school {} {}", problem.school_name(s), problem.quota(s));
    }
    for i in problem.students() {
        let _ = write!(out, "pref {} :", problem.student_name(i));
        for &s in problem.prefs(i) {
            let _ = write!(out, " {}", problem.school_name(s));
        }
        out.push('\n');
    }
    for s in problem.schools() {
        let _ = write!(out, "prio {} :", problem.school_name(s));
        for &i in problem.stored_priority(s) {
            let _ = write!(out, " {}", problem.student_name(i));
        }
        out.push('\n');
    }
    if let Some(groups) = problem.groups() {
        for i in problem.students() {
            let label = match groups[i.index()] {
                Group::Advantaged => "advantaged",
                Group::Marginalized => "marginalized",
            };
            let _ = writeln!(out, "group {} {}", problem.student_name(i), label);
        }
    }
    out
}

pub fn parse_matching(text: &str, problem: &Problem) -> Result<Matching, ParseError> {
    let mut assignment: Vec<Option<SchoolId>> = vec![None; problem.student_count()];
    let mut seen: Vec<Option<usize>> = vec![None; problem.student_count()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        if tokens[0] != "match" || tokens.len() != 3 {
            return Err(err(line, "expected `match <student> <school|->`"));
        }
        let i = problem
            .student_by_name(tokens[1])
            .ok_or_else(|| err(line, format!("unknown student {:?}", tokens[1])))?;
        if let Some(prev) = seen[i.index()] {
            return Err(err(
                line,
                format!("match line for {} already given on line {prev}", tokens[1]),
            ));
        }
        seen[i.index()] = Some(line);
        assignment[i.index()] = if tokens[2] == "-" {
            None
        } else {
            Some(
                problem
                    .school_by_name(tokens[2])
                    .ok_or_else(|| err(line, format!("unknown school {:?}", tokens[2])))?,
            )
        };
    }
    for i in problem.students() {
        if seen[i.index()].is_none() {
            return Err(err(
                0,
                format!("student {} has no match line", problem.student_name(i)),
            ));
        }
    }
    Matching::new(problem, assignment.clone()).map_err(|e| match &e {
        MatchingError::Unacceptable { student, .. } => {
            let i = problem.student_by_name(student).expect("name came from problem");
            err(seen[i.index()].unwrap_or(0), e.to_string())
        }
        MatchingError::QuotaExceeded { school, .. } => {
            let s = problem.school_by_name(school).expect("name came from problem");
            let line = problem
                .students()
                .filter(|i| assignment[i.index()] == Some(s))
                .filter_map(|i| seen[i.index()])
                .max()
                .unwrap_or(0);
            err(line, e.to_string())
        }
        MatchingError::LengthMismatch { .. } => err(0, e.to_string()),
    })
}

pub fn serialize_matching(problem: &Problem, matching: &Matching) -> String {
    let mut out = String::new();
    for i in problem.students() {
        let target = match matching.school_of(i) {
            Some(s) => problem.school_name(s),
            None => "-",
        };
        let _ = writeln!(out, "match {} {}", problem.student_name(i), target);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::StudentId;

    const SMALL: &str = "\
problem 3 2
school s1 1
school s2 2
pref i1 : s1 s2
pref i2 : s2
pref i3 :
prio s1 : i2
prio s2 : i2 i1
group i3 marginalized
";

    #[test]
    fn parses_and_serializes_canonically() {
        let p = parse_problem(SMALL).unwrap();
        assert_eq!(p.student_count(), 3);
        assert_eq!(p.quota(SchoolId(1)), 2);
        assert_eq!(p.prefs(StudentId(0)), &[SchoolId(0), SchoolId(1)]);
        assert_eq!(p.stored_priority(SchoolId(0)), &[StudentId(1)]);
        let text = serialize_problem(&p);
        let back = parse_problem(&text).unwrap();
        assert_eq!(p, back);
        assert_eq!(serialize_problem(&back), text);
    }

    #[test]
    fn comments_blank_lines_and_tight_colons_are_tolerated() {
        let messy = "\
# instance header
problem 3 2   # three students

school s1 1
school s2 2
pref i1: s1 s2
pref i2 :s2
pref i3:
prio s1 : i2 # contested prefix only
prio s2 : i2 i1
group i3 marginalized
";
        assert_eq!(parse_problem(messy).unwrap(), parse_problem(SMALL).unwrap());
    }

    #[test]
    fn duplicate_pref_line_reports_both_lines() {
        let text = "\
problem 2 1
school s1 1
pref i1 : s1
pref i1 : s1
prio s1 : i1
";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("line 3"), "message was {:?}", e.message);
    }

    #[test]
    fn unknown_names_are_rejected_with_lines() {
        let text = "problem 1 1\nschool s1 1\npref i1 : s9\nprio s1 : i1\n";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("s9"));
    }

    #[test]
    fn missing_prio_line_points_at_the_school() {
        let text = "problem 1 2\nschool s1 1\nschool s2 1\npref i1 : s1\nprio s1 : i1\n";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("s2"));
    }

    #[test]
    fn header_count_mismatch_points_at_the_header() {
        let text = "problem 2 1\nschool s1 1\npref i1 : s1\nprio s1 : i1\n";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("2 students"));
    }

    #[test]
    fn validation_failures_carry_source_lines() {
        let text = "\
problem 1 1
school s1 0
pref i1 : s1
prio s1 : i1
";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("quota"));

        let text = "\
problem 1 2
school s1 1
school s2 1
pref i1 : s1 s1
prio s1 : i1
prio s2 : i1
";
        let e = parse_problem(text).unwrap_err();
        assert_eq!(e.line, 4);
    }

    #[test]
    fn matching_roundtrip_covers_null() {
        let p = parse_problem(SMALL).unwrap();
        let mu = Matching::new(&p, vec![Some(SchoolId(0)), None, None]).unwrap();
        let text = serialize_matching(&p, &mu);
        assert_eq!(text, "match i1 s1\nmatch i2 -\nmatch i3 -\n");
        assert_eq!(parse_matching(&text, &p).unwrap(), mu);
    }

    #[test]
    fn matching_must_cover_every_student_once() {
        let p = parse_problem(SMALL).unwrap();
        let e = parse_matching("match i1 s1\nmatch i2 -\n", &p).unwrap_err();
        assert_eq!(e.line, 0);
        assert!(e.message.contains("i3"));
        let e = parse_matching("match i1 s1\nmatch i1 -\nmatch i2 -\nmatch i3 -\n", &p).unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn unacceptable_and_overfull_assignments_are_caught() {
        let p = parse_problem(SMALL).unwrap();
        let e = parse_matching("match i1 s1\nmatch i2 -\nmatch i3 s2\n", &p).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("unlisted"));

        let contested = parse_problem(
            "problem 2 1\nschool s1 1\npref i1 : s1\npref i2 : s1\nprio s1 : i1 i2\n",
        )
        .unwrap();
        let e = parse_matching("match i1 s1\nmatch i2 s1\n", &contested).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("quota"));
    }
}

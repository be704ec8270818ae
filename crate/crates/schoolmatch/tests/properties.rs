//! Randomized cross-module invariants. Everything runs off the crate's own
//! deterministic generator families, so a failure reproduces from the seed
//! embedded in the panic message.

use num_rational::Ratio;
use schoolmatch::diagnostics::{
    composition, envy_digraph, inequality_ratio, rank_inefficiency_ratio,
    unimprovable_certificates, unimprovable_students,
};
use schoolmatch::format::{parse_matching, parse_problem, serialize_matching, serialize_problem};
use schoolmatch::generators::{generate, Family, GeneratorSpec, SplitMix64};
use schoolmatch::oracle::{classify, is_pareto_efficient, is_stable, OracleLimits};
use schoolmatch::{
    is_stable_dominating, pareto_compare, run_cti, run_da, run_rawlsian, run_rm, run_ttc_da,
    stability_report, Group, Matching, ParetoOrdering, Problem, StudentId,
};

/// Draws a random-market spec with every dimension in `1..=max`.
fn random_spec(rng: &mut SplitMix64, max_m: u64, max_n: u64, max_q: u64) -> GeneratorSpec {
    let schools = 1 + rng.next_below(max_n) as u32;
    GeneratorSpec {
        family: Family::Random,
        students: 1 + rng.next_below(max_m) as u32,
        schools,
        quota: 1 + rng.next_below(max_q) as u32,
        list_len: 1 + rng.next_below(schools as u64) as u32,
        marginalized_fraction: 0.0,
        seed: rng.next_u64(),
    }
}

/// Draws a two-group spec whose marginalized share keeps both groups
/// nonempty: `round(k/m * m) == k` for any `k` in `1..m`.
fn two_group_spec(rng: &mut SplitMix64, max_m: u64, max_n: u64, max_q: u64) -> GeneratorSpec {
    let students = 2 + rng.next_below(max_m - 1) as u32;
    let schools = 1 + rng.next_below(max_n) as u32;
    let marginalized = 1 + rng.next_below(students as u64 - 1) as u32;
    GeneratorSpec {
        family: Family::TwoGroup,
        students,
        schools,
        quota: 1 + rng.next_below(max_q) as u32,
        list_len: 1 + rng.next_below(schools as u64) as u32,
        marginalized_fraction: marginalized as f64 / students as f64,
        seed: rng.next_u64(),
    }
}

fn instance(spec: &GeneratorSpec) -> Problem {
    generate(spec).unwrap_or_else(|e| panic!("spec {spec:?} failed: {e}"))
}

#[test]
fn deferred_acceptance_is_stable_on_random_markets() {
    let mut rng = SplitMix64::new(0xDA_57AB1E);
    for _ in 0..300 {
        let spec = random_spec(&mut rng, 60, 12, 4);
        let problem = instance(&spec);
        let outcome = run_da(&problem);
        let report = stability_report(&problem, &outcome.matching);
        assert!(
            report.stable && report.violations.is_empty(),
            "unstable on {spec:?}: {:?}",
            report.violations
        );
    }
}

#[test]
fn improvement_passes_weakly_dominate_deferred_acceptance() {
    let mut rng = SplitMix64::new(0xC11_C7E5);
    for _ in 0..200 {
        let spec = random_spec(&mut rng, 50, 10, 3);
        let problem = instance(&spec);
        let da = run_da(&problem).matching;
        let cti = run_cti(&problem);
        let ttc = run_ttc_da(&problem);

        for improved in [&cti.matching, &ttc.matching] {
            assert!(is_stable_dominating(&problem, improved), "on {spec:?}");
            assert_eq!(
                improved.occupancy(&problem),
                da.occupancy(&problem),
                "occupancy drifted on {spec:?}"
            );
        }
        assert!(
            matches!(
                pareto_compare(&problem, &cti.matching, &da),
                ParetoOrdering::Equal | ParetoOrdering::MuDominates
            ),
            "on {spec:?}"
        );

        let bound = problem.student_count() * problem.school_count();
        assert!(cti.trades.len() <= bound, "too many trades on {spec:?}");

        // Replaying the trade log from the baseline must strictly lower the
        // total rank at every step and land exactly on the reported output.
        let mut assignment = da.assignments().to_vec();
        let mut total = da.total_rank(&problem);
        for cycle in &cti.trades {
            for mv in &cycle.moves {
                assert_eq!(assignment[mv.student.index()], Some(mv.from), "on {spec:?}");
                assignment[mv.student.index()] = Some(mv.to);
            }
            let stepped =
                Matching::new(&problem, assignment.clone()).expect("trade keeps the matching valid");
            let new_total = stepped.total_rank(&problem);
            assert!(new_total < total, "trade did not pay on {spec:?}");
            total = new_total;
        }
        assert_eq!(assignment, cti.matching.assignments(), "on {spec:?}");
    }
}

#[test]
fn certified_students_never_move() {
    let mut rng = SplitMix64::new(0xCE47);
    for _ in 0..200 {
        let spec = random_spec(&mut rng, 40, 8, 3);
        let problem = instance(&spec);
        let da = run_da(&problem).matching;
        let cti = run_cti(&problem).matching;
        let ttc = run_ttc_da(&problem).matching;

        let unimprovable = unimprovable_students(&problem);
        let certificates = unimprovable_certificates(&problem);
        for c in &certificates {
            assert!(
                unimprovable.binary_search(c).is_ok(),
                "certificate {c:?} not covered on {spec:?}"
            );
        }

        for &i in &unimprovable {
            assert_eq!(da.school_of(i), cti.school_of(i), "on {spec:?}");
            assert_eq!(da.school_of(i), ttc.school_of(i), "on {spec:?}");
        }
    }
}

#[test]
fn benchmarks_bound_every_mechanism() {
    let mut rng = SplitMix64::new(0xB0_07D);
    for _ in 0..150 {
        let spec = random_spec(&mut rng, 40, 8, 3);
        let problem = instance(&spec);
        let rm = run_rm(&problem);
        let rw = run_rawlsian(&problem);
        assert_eq!(rm.matching.total_rank(&problem), rm.total_rank, "on {spec:?}");
        assert_eq!(rw.matching.max_rank(&problem), rw.max_rank, "on {spec:?}");

        for matching in [
            run_da(&problem).matching,
            run_cti(&problem).matching,
            run_ttc_da(&problem).matching,
        ] {
            assert!(rm.total_rank <= matching.total_rank(&problem), "on {spec:?}");
            assert!(rw.max_rank <= matching.max_rank(&problem), "on {spec:?}");
            assert!(inequality_ratio(&problem, &matching) >= Ratio::from_integer(1));
            assert!(rank_inefficiency_ratio(&problem, &matching) >= Ratio::from_integer(1));
        }
    }
}

/// With full preference lists, enough seats for everyone, and no more
/// students than schools, the worst spread any stable-dominating matching
/// can show is half the school count; a short list or a seat shortage can
/// push an unassigned student's effective rank past that.
#[test]
fn ratio_bounds_hold_with_full_lists() {
    let mut rng = SplitMix64::new(0xFA1B0);
    for _ in 0..150 {
        let schools = 1 + rng.next_below(8) as u32;
        let students = 1 + rng.next_below(schools as u64) as u32;
        let quota = 1 + rng.next_below(3) as u32;
        let spec = GeneratorSpec {
            family: Family::Random,
            students,
            schools: schools.max(students.div_ceil(quota)),
            quota,
            list_len: schools.max(students.div_ceil(quota)),
            marginalized_fraction: 0.0,
            seed: rng.next_u64(),
        };
        let problem = instance(&spec);
        let bound = Ratio::new(problem.school_count() as i64, 2).max(Ratio::from_integer(1));

        let da = run_da(&problem).matching;
        let cti = run_cti(&problem).matching;
        let ttc = run_ttc_da(&problem).matching;
        for matching in [&da, &cti, &ttc] {
            assert!(
                inequality_ratio(&problem, matching) <= bound,
                "spread bound broken on {spec:?}"
            );
        }
        for efficient in [&cti, &ttc] {
            assert!(
                rank_inefficiency_ratio(&problem, efficient) <= bound,
                "waste bound broken on {spec:?}"
            );
        }
    }
}

#[test]
fn pareto_comparison_is_antisymmetric_and_transitive() {
    let mut rng = SplitMix64::new(0x9A770);
    for _ in 0..80 {
        let spec = random_spec(&mut rng, 20, 6, 2);
        let problem = instance(&spec);
        let pool = [
            run_da(&problem).matching,
            run_cti(&problem).matching,
            run_ttc_da(&problem).matching,
            run_rm(&problem).matching,
            run_rawlsian(&problem).matching,
            Matching::new(&problem, vec![None; problem.student_count()]).expect("valid"),
        ];
        for a in &pool {
            for b in &pool {
                let ab = pareto_compare(&problem, a, b);
                let ba = pareto_compare(&problem, b, a);
                let mirrored = match ab {
                    ParetoOrdering::Equal => ParetoOrdering::Equal,
                    ParetoOrdering::MuDominates => ParetoOrdering::NuDominates,
                    ParetoOrdering::NuDominates => ParetoOrdering::MuDominates,
                    other => other,
                };
                assert_eq!(ba, mirrored, "asymmetry on {spec:?}");
                for c in &pool {
                    let bc = pareto_compare(&problem, b, c);
                    if matches!(ab, ParetoOrdering::Equal | ParetoOrdering::MuDominates)
                        && matches!(bc, ParetoOrdering::Equal | ParetoOrdering::MuDominates)
                    {
                        assert!(
                            matches!(
                                pareto_compare(&problem, a, c),
                                ParetoOrdering::Equal | ParetoOrdering::MuDominates
                            ),
                            "transitivity broken on {spec:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn rank_is_a_bijection_onto_list_positions() {
    let mut rng = SplitMix64::new(0x127A4B);
    for _ in 0..100 {
        let spec = random_spec(&mut rng, 30, 10, 3);
        let problem = instance(&spec);
        for i in problem.students() {
            let prefs = problem.prefs(i);
            let mut ranks: Vec<u32> = prefs
                .iter()
                .map(|&s| problem.rank(i, Some(s)).expect("listed school has a rank"))
                .collect();
            ranks.sort_unstable();
            let expected: Vec<u32> = (1..=prefs.len() as u32).collect();
            assert_eq!(ranks, expected, "on {spec:?}");
            assert_eq!(problem.null_rank(i), prefs.len() as u32 + 1);
            assert_eq!(problem.rank(i, None), Some(prefs.len() as u32 + 1));
        }
    }
}

#[test]
fn oracle_agrees_with_fast_paths_on_tiny_markets() {
    let mut rng = SplitMix64::new(0x0AC1E);
    let limits = OracleLimits::default();
    for _ in 0..150 {
        let spec = random_spec(&mut rng, 7, 4, 2);
        let problem = instance(&spec);
        let oracle = classify(&problem, &limits).expect("tiny instance is in cap");

        let da = run_da(&problem).matching;
        let cti = run_cti(&problem).matching;
        let ttc = run_ttc_da(&problem).matching;
        assert!(is_stable(&problem, &da), "on {spec:?}");
        assert!(oracle.stable.contains(&da), "on {spec:?}");
        assert_eq!(oracle.baseline, da, "on {spec:?}");
        assert!(
            oracle.efficient_stable_dominating.contains(&cti),
            "on {spec:?}"
        );
        assert!(oracle.stable_dominating.contains(&ttc), "on {spec:?}");
        assert_eq!(is_pareto_efficient(&problem, &cti, &limits), Ok(true), "on {spec:?}");
        assert_eq!(is_pareto_efficient(&problem, &ttc, &limits), Ok(true), "on {spec:?}");

        assert_eq!(run_rm(&problem).total_rank, oracle.min_total_rank, "on {spec:?}");
        assert_eq!(run_rawlsian(&problem).max_rank, oracle.min_max_rank, "on {spec:?}");

        let da_occupancy = da.occupancy(&problem);
        for member in &oracle.stable_dominating {
            assert_eq!(member.occupancy(&problem), da_occupancy, "on {spec:?}");
        }
    }
}

#[test]
fn group_structure_survives_trading_on_tiny_markets() {
    let mut rng = SplitMix64::new(0x7060);
    let limits = OracleLimits::default();
    for round in 0..150 {
        let spec = two_group_spec(&mut rng, 8, 5, 2);
        let problem = instance(&spec);
        let groups = problem.groups().expect("two-group family labels students");
        let da = run_da(&problem).matching;
        let unimprovable = unimprovable_students(&problem);

        assert!(
            unimprovable
                .iter()
                .any(|&i| groups[i.index()] == Group::Marginalized),
            "no marginalized student is stuck on {spec:?}"
        );

        let digraph = envy_digraph(&problem, &da);
        for scc in digraph.nontrivial_sccs() {
            let mixed = scc
                .iter()
                .any(|&i| groups[i.index()] == Group::Advantaged)
                && scc
                    .iter()
                    .any(|&i| groups[i.index()] == Group::Marginalized);
            assert!(!mixed, "mixed trading component on {spec:?}");
        }

        let table = composition(&problem, &da).expect("groups are present");
        for row in &table.rows {
            if row.advantaged > 0 && row.marginalized > 0 {
                for &i in &da.occupants(&problem)[row.school.index()] {
                    if groups[i.index()] == Group::Advantaged {
                        assert!(
                            unimprovable.contains(&i),
                            "advantaged student at a mixed school moved on {spec:?}"
                        );
                    }
                }
            }
        }

        let cti = run_cti(&problem).matching;
        let ttc = run_ttc_da(&problem).matching;
        let da_counts = table.counts();
        for improved in [&cti, &ttc] {
            let improved_table = composition(&problem, improved).expect("groups are present");
            assert_eq!(improved_table.counts(), da_counts, "on {spec:?}");
        }

        if round < 50 {
            let oracle = classify(&problem, &limits).expect("tiny instance is in cap");
            for member in &oracle.stable_dominating {
                let member_table = composition(&problem, member).expect("groups are present");
                assert_eq!(member_table.counts(), da_counts, "on {spec:?}");
            }
            let fixed: Vec<StudentId> = problem
                .students()
                .filter(|&i| {
                    oracle
                        .efficient_stable_dominating
                        .iter()
                        .all(|member| member.school_of(i) == da.school_of(i))
                })
                .collect();
            assert_eq!(unimprovable, fixed, "on {spec:?}");
        }
    }
}

#[test]
fn file_formats_round_trip_generated_markets() {
    let mut rng = SplitMix64::new(0xF0_44A7);
    for round in 0..1000 {
        let spec = if round % 3 == 0 {
            two_group_spec(&mut rng, 12, 6, 3)
        } else {
            random_spec(&mut rng, 12, 6, 3)
        };
        let problem = instance(&spec);
        let text = serialize_problem(&problem);
        let reparsed = parse_problem(&text).unwrap_or_else(|e| panic!("on {spec:?}: {e}"));
        assert_eq!(reparsed, problem, "on {spec:?}");
        assert_eq!(serialize_problem(&reparsed), text, "on {spec:?}");

        if round % 10 == 0 {
            let matching = run_da(&problem).matching;
            let matching_text = serialize_matching(&problem, &matching);
            let back = parse_matching(&matching_text, &problem)
                .unwrap_or_else(|e| panic!("on {spec:?}: {e}"));
            assert_eq!(back, matching, "on {spec:?}");
        }
    }
}

#[test]
fn generators_always_validate_cleanly() {
    let mut rng = SplitMix64::new(0x6E6E);
    for round in 0..10_000 {
        let spec = match round % 3 {
            0 => random_spec(&mut rng, 10, 5, 3),
            1 => two_group_spec(&mut rng, 10, 5, 3),
            _ => GeneratorSpec {
                family: Family::Worstcase,
                students: 0,
                schools: 2 + rng.next_below(15) as u32,
                quota: 0,
                list_len: 0,
                marginalized_fraction: 0.0,
                seed: 0,
            },
        };
        instance(&spec);
    }
}

//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured values (run with `--nocapture` to see them).

use std::time::Instant;

use locc_lab_core::catalog::{self, cost_formula_thm5, cost_formula_thm7, theorem_expected_cost};
use locc_lab_core::engine::{self, product_finisher, verify_finisher, EngineOpts};
use locc_lab_core::ensembles::{self, check_mutual_orthogonality};
use locc_lab_core::protocol::{validate, Step};
use locc_lab_core::RunReport;

fn run_theorem(id: u8, dims: &[usize]) -> RunReport {
    let ens = catalog::build_ensemble(id, dims).unwrap();
    let tree = catalog::build(id, dims).unwrap();
    engine::run(&tree, &ens, None, &EngineOpts::default()).unwrap()
}

fn assert_perfect(report: &RunReport, members: usize) {
    assert!(
        report.success,
        "{} failed: {:?}",
        report.protocol,
        report.failures.first()
    );
    assert_eq!(report.members.len(), members);
    for m in &report.members {
        assert!(
            (m.total_probability - 1.0).abs() < 1e-10,
            "{}: member {} has total probability {}",
            report.protocol,
            m.label,
            m.total_probability
        );
    }
    assert!(report.ortho.violations.is_empty());
}

#[test]
fn criterion_01_four_qubit_basis_one_ebit() {
    let t0 = Instant::now();
    let report = run_theorem(1, &[2, 2, 2, 2]);
    assert_perfect(&report, 16);
    let copies = report.expected_cost.entries["EPR(2) A-B"].copies;
    assert!((copies - 1.0).abs() < 1e-9);
    assert!((report.expected_ebits - 1.0).abs() < 1e-9);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 01 PASS: 16/16 identified, 1.000 ebit, {elapsed:?}");
}

#[test]
fn criterion_02_five_qubit_basis_one_ebit() {
    let t0 = Instant::now();
    let report = run_theorem(2, &[2, 2, 2, 2, 2]);
    assert_perfect(&report, 32);
    assert!((report.expected_ebits - 1.0).abs() < 1e-9);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    println!("criterion 02 PASS: 32/32 identified, 1.000 ebit, {elapsed:?}");
}

#[test]
fn criterion_03_recovery_restores_members() {
    for (id, dims) in [(1u8, vec![2; 4]), (2u8, vec![2; 5])] {
        let ens = catalog::build_ensemble(id, &dims).unwrap();
        let tree = catalog::build(id, &dims).unwrap();
        let rec = engine::verify_recovery(&tree, &ens).unwrap();
        assert!(rec.ok);
        assert!(
            rec.min_fidelity >= 1.0 - 1e-10,
            "theorem {id}: {}",
            rec.min_fidelity
        );
        assert_eq!(rec.per_member.len(), ens.len());
        println!(
            "criterion 03 PASS (theorem {id}): {} members recovered, min fidelity {:.12}",
            rec.per_member.len(),
            rec.min_fidelity
        );
    }
}

// Index-range counting loops, written independently of the constructors:
// one loop nest per family, ranges straight off the set definitions.
fn count_asym4(d: [usize; 4]) -> usize {
    let [d1, d2, d3, d4] = d;
    let mut n = 0usize;
    for _ in 0..d3 - 1 {
        for _ in 0..d4 {
            n += 1;
        }
    } // beta3 x alpha4
    for _ in 0..d4 - 1 {
        n += 1;
    } // beta4
    for _ in 0..d1 - 1 {
        for _ in 0..d2 {
            n += 1;
        }
    } // beta1 x alpha2
    for _ in 0..d2 - 1 {
        n += 1;
    } // beta2
    for _ in 0..d3 - 1 {
        for _ in 0..d4 {
            n += 1;
        }
    } // gamma3 x alpha4
    for _ in 0..d4 - 1 {
        n += 1;
    } // gamma4
    for _ in 0..d1 - 1 {
        for _ in 0..d2 {
            n += 1;
        }
    } // gamma1 x alpha2
    for _ in 0..d2 - 1 {
        n += 1;
    } // gamma2
    for _ in 0..d2 - 2 {
        for _ in 0..d4 - 1 {
            n += 1;
        }
    } // kappa2 x gamma4
    for _ in 0..d4 - 1 {
        for _ in 0..d2 - 2 {
            n += 1;
        }
    } // beta4 x kappa2
    for _ in 0..d3 - 1 {
        for _ in 0..d1 - 2 {
            n += 1;
        }
    } // kappa1 x beta3
    for _ in 0..d1 - 2 {
        for _ in 0..d3 - 1 {
            n += 1;
        }
    } // kappa1 x gamma3
    for _ in 0..d3 - 2 {
        for _ in 0..d2 - 1 {
            n += 1;
        }
    } // gamma2 x kappa3
    for _ in 0..d2 - 1 {
        for _ in 0..d3 - 2 {
            n += 1;
        }
    } // beta2 x kappa3
    for _ in 0..d4 - 1 {
        for _ in 0..d1 - 2 {
            n += 1;
        }
    } // kappa1 x beta4
    for _ in 0..d1 - 2 {
        for _ in 0..d4 - 1 {
            n += 1;
        }
    } // kappa1 x gamma4
    for _ in 0..d4 - 2 {
        n += 2;
    } // signed, kappa4
    for _ in 0..d4 - 2 {
        n += 2;
    } // signed, kappa4
    n
}

fn count_sym4(d: [usize; 4]) -> usize {
    let [d1, d2, d3, d4] = d;
    let mut n = 0usize;
    // two independent kappa indices plus one gamma index, four rotations
    for (a, b, g) in [(d1, d2, d4), (d1, d4, d3), (d3, d4, d2), (d2, d3, d1)] {
        for _ in 0..a - 2 {
            for _ in 0..b - 2 {
                for _ in 0..g - 1 {
                    n += 1;
                }
            }
        }
    }
    for dk in [d4, d3, d2, d1] {
        for _ in 0..dk - 1 {
            n += 1;
        }
    } // beta rows
    for dk in [d4, d3, d2, d1] {
        for _ in 0..dk - 1 {
            n += 1;
        }
    } // gamma rows
    for dk in [d1, d4, d3, d2] {
        for _ in 0..dk - 2 {
            n += 2;
        }
    } // signed kappa rows
    for (a, b) in [(d3, d4), (d2, d3), (d1, d2), (d4, d1)] {
        for _ in 0..a - 2 {
            for _ in 0..b - 1 {
                n += 1;
            }
        } // kappa x beta rows
    }
    n += 4; // singleton rows
    for (a, b) in [(d2, d4), (d1, d3), (d2, d4), (d1, d3)] {
        for _ in 0..a - 2 {
            for _ in 0..b - 2 {
                n += 1;
            }
        } // kappa x kappa rows
    }
    for (a, b) in [(d2, d4), (d1, d3)] {
        for _ in 0..a - 2 {
            for _ in 0..b - 2 {
                n += 1;
            }
        } // last two rows
    }
    n
}

fn count_sym5(d: [usize; 5]) -> usize {
    let [d1, d2, d3, d4, d5] = d;
    let mut n = 0usize;
    // tied alpha pairs with a free level index, only at equal dimensions
    for (pa, pb, pp) in [
        (d1, d2, d3),
        (d1, d5, d2),
        (d4, d5, d1),
        (d3, d4, d5),
        (d2, d3, d4),
    ] {
        if pa == pb {
            for _ in 0..pa {
                for _ in 1..pp {
                    n += 1;
                }
            }
        }
    }
    for (pg, pp) in [(d1, d3), (d5, d2), (d4, d1), (d3, d5), (d2, d4)] {
        for _ in 0..pg - 1 {
            for _ in 1..pp {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn criterion_04_cardinalities_from_independent_counts() {
    assert_eq!(count_asym4([3, 3, 3, 3]), 52);
    assert_eq!(count_sym4([3, 3, 3, 3]), 50);
    assert_eq!(count_sym5([3, 3, 3, 3, 3]), 50);
    assert_eq!(ensembles::ops_asym4([3, 3, 3, 3]).unwrap().len(), 52);
    assert_eq!(ensembles::ops_sym4([3, 3, 3, 3]).unwrap().len(), 50);
    assert_eq!(ensembles::ops_sym5([3, 3, 3, 3, 3]).unwrap().len(), 50);
    // counting loops also track the constructors away from the minimum
    for d in [[3, 4, 5, 6], [4, 4, 4, 4]] {
        assert_eq!(ensembles::ops_asym4(d).unwrap().len(), count_asym4(d));
        assert_eq!(ensembles::ops_sym4(d).unwrap().len(), count_sym4(d));
    }
    assert_eq!(
        ensembles::ops_sym5([3, 4, 3, 4, 3]).unwrap().len(),
        count_sym5([3, 4, 3, 4, 3])
    );
    println!("criterion 04 PASS: cardinalities 52/50/50 at minimal dims");
}

#[test]
fn criterion_05_mutual_orthogonality() {
    let ensembles: Vec<locc_lab_core::Ensemble> = vec![
        ensembles::ghz_basis(4).unwrap(),
        ensembles::ghz_basis(5).unwrap(),
        ensembles::ops_asym4([3, 3, 3, 3]).unwrap(),
        ensembles::ops_asym4([3, 4, 5, 6]).unwrap(),
        ensembles::ops_sym4([3, 3, 3, 3]).unwrap(),
        ensembles::ops_sym4([3, 4, 5, 6]).unwrap(),
        ensembles::ops_sym5([3, 3, 3, 3, 3]).unwrap(),
        ensembles::ops_sym5([3, 4, 3, 4, 3]).unwrap(),
    ];
    for e in &ensembles {
        let r = check_mutual_orthogonality(e, 1e-10);
        assert!(
            r.violating_pairs.is_empty(),
            "{} at {:?}: first violation {:?}",
            e.name,
            e.dims,
            r.violating_pairs.first()
        );
        println!(
            "criterion 05 PASS: {} dims {:?}: {} pairs, max overlap {:.3e}",
            e.name, e.dims, r.pairs_checked, r.max_abs_overlap
        );
    }
}

#[test]
fn criterion_06_theorems_3_to_7_discriminate_perfectly() {
    let t0 = Instant::now();
    for id in 3..=7u8 {
        for dims in [vec![3usize, 3, 3, 3], vec![3, 4, 5, 6]] {
            let report = run_theorem(id, &dims);
            let members = report.members.len();
            assert_perfect(&report, members);
            assert!(report.ortho.max_overlap < 1e-10);
            println!(
                "criterion 06 PASS: theorem {id} dims {dims:?}: {members} members, max overlap {:.3e}",
                report.ortho.max_overlap
            );
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("criterion 06 PASS: total {elapsed:?}");
}

#[test]
fn criterion_07_cost_identities() {
    // (theorem, dims, declared ebits)
    let cases: Vec<(u8, Vec<usize>, f64)> = vec![
        (3, vec![3, 3, 3, 3], 1.0 + 3f64.log2()),
        (3, vec![3, 4, 5, 6], 1.0 + 6f64.log2()),
        (4, vec![3, 3, 3, 3], 1.0 + 3f64.log2()),
        (5, vec![3, 3, 3, 3], 2.0 + 30.0 / 52.0),
        (5, vec![4, 4, 3, 3], 2.0 + 48.0 / 80.0),
        (6, vec![3, 3, 3, 3], 3f64.log2() + 3f64.log2()),
        (6, vec![3, 4, 5, 6], 3f64.log2() + 6f64.log2()),
        (7, vec![3, 3, 3, 3], 1.0 + 44.0 / 50.0 + 3f64.log2()),
    ];
    let f5 = cost_formula_thm5([3, 3, 3, 3]);
    assert_eq!((f5.r, f5.s), (30, 52));
    let f5b = cost_formula_thm5([4, 4, 3, 3]);
    assert_eq!((f5b.r, f5b.s), (48, 80));
    let f7 = cost_formula_thm7([3, 3, 3, 3]);
    assert_eq!((f7.r, f7.s), (44, 50));
    for (id, dims, want) in cases {
        let report = run_theorem(id, &dims);
        let declared = theorem_expected_cost(id, &dims).unwrap();
        let delta = declared.max_copy_delta(&report.expected_cost);
        assert!(
            delta < 1e-9,
            "theorem {id} dims {dims:?}: copy tallies differ by {delta:.3e}:\n declared {:?}\n simulated {:?}",
            declared,
            report.expected_cost
        );
        assert!(
            (report.expected_ebits - want).abs() < 1e-9,
            "theorem {id} dims {dims:?}: simulated {} vs declared {want}",
            report.expected_ebits
        );
        println!(
            "criterion 07 PASS: theorem {id} dims {dims:?}: {:.12} ebits (declared {want:.12})",
            report.expected_ebits
        );
    }
    // fractional-mass identity of the conditional attaches
    let r5 = run_theorem(5, &[3, 3, 3, 3]);
    assert!((r5.expected_cost.entries["EPR(2) B-D"].copies - 30.0 / 52.0).abs() < 1e-9);
    let r7 = run_theorem(7, &[3, 3, 3, 3]);
    assert!((r7.expected_cost.entries["EPR(2) A-B"].copies - 44.0 / 50.0).abs() < 1e-9);

    // independent count of the members that traverse the conditional
    // attach: everyone except the families identified before it
    for (dims, want_r, want_s) in [([3usize, 3, 3, 3], 30, 52), ([3, 4, 5, 6], 85, 152)] {
        let ens = catalog::build_ensemble(5, &dims).unwrap();
        let early = ["H7", "H4", "H5", "H6", "H10", "H14", "H18"];
        let routed_away: usize = early.iter().map(|f| ens.family_members(f).len()).sum();
        assert_eq!(ens.len(), want_s);
        assert_eq!(ens.len() - routed_away, want_r, "at {dims:?}");
        let f = cost_formula_thm5(dims);
        assert_eq!((f.r, f.s), (want_r as i64, want_s as i64));
    }
    println!(
        "criterion 07 PASS: fractional masses 30/52 and 44/50 (independent member counts agree)"
    );
}

#[test]
fn criterion_08_comparison_grid_crossover() {
    let rows = catalog::fig41_data(20, 20).unwrap();
    let at = |d3: usize, d4: usize| rows.iter().find(|r| r.d3 == d3 && r.d4 == d4).unwrap();
    let r33 = at(3, 3);
    assert!(r33.thm5_ebits > r33.thm4_ebits);
    let r2020 = at(20, 20);
    assert!(r2020.thm5_ebits < r2020.thm4_ebits);
    println!(
        "criterion 08 PASS: (3,3) {:.6} > {:.6}; (20,20) {:.6} < {:.6}",
        r33.thm5_ebits, r33.thm4_ebits, r2020.thm5_ebits, r2020.thm4_ebits
    );
}

#[test]
fn criterion_09_five_party_protocols_and_copy_counts() {
    let t0 = Instant::now();
    let expected: [(u8, &str, f64); 3] = [(8, "EPR(2)", 4.0), (9, "GHZ3", 3.0), (10, "F4", 2.0)];
    for (id, kind, copies_want) in expected {
        let report = run_theorem(id, &[3, 3, 3, 3, 3]);
        assert_perfect(&report, 50);
        let copies: f64 = report
            .expected_cost
            .entries
            .values()
            .filter(|e| e.kind.to_string().starts_with(kind))
            .map(|e| e.copies)
            .sum();
        assert!(
            (copies - copies_want).abs() < 1e-9,
            "theorem {id}: {copies} copies of {kind}"
        );
        println!("criterion 09 PASS: theorem {id}: {copies_want} x {kind}");
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("criterion 09 PASS: total {elapsed:?}");
}

#[test]
fn criterion_10_structural_suite_and_mutations() {
    // every catalog measurement complete and local
    for id in 1..=10u8 {
        let dims = catalog::default_dims(id);
        let tree = catalog::build(id, &dims).unwrap();
        let r = validate(&tree);
        assert!(r.is_valid(), "theorem {id}: {:?}", r.violations.first());
        assert_eq!(r.max_completeness_defect, 0.0, "theorem {id}");
    }
    for id in 3..=7u8 {
        let tree = catalog::build(id, &[3, 4, 5, 6]).unwrap();
        let r = validate(&tree);
        assert!(
            r.is_valid(),
            "theorem {id} at 3456: {:?}",
            r.violations.first()
        );
    }

    // mutation 1: drop an outcome -> completeness violation
    let mut t = catalog::build(1, &[2, 2, 2, 2]).unwrap();
    fn first_measure(step: &mut Step) -> &mut Step {
        match step {
            Step::Measure { .. } => step,
            Step::Attach { next, .. } | Step::Cnot { next, .. } | Step::Teleport { next, .. } => {
                first_measure(next)
            }
            Step::Finish { .. } => panic!("no measure node"),
        }
    }
    if let Step::Measure {
        measurement,
        children,
        ..
    } = first_measure(&mut t.root)
    {
        measurement.outcomes.pop();
        children.pop();
    }
    let r = validate(&t);
    assert!(
        r.violations.iter().any(|v| v.kind == "completeness"),
        "{:?}",
        r.violations
    );

    // mutation 2: a term claimed by another party -> locality violation
    let mut t = catalog::build(1, &[2, 2, 2, 2]).unwrap();
    if let Step::Measure { measurement, .. } = first_measure(&mut t.root) {
        measurement.outcomes[0].1.party = "C".into();
    }
    let r = validate(&t);
    assert!(
        r.violations.iter().any(|v| v.kind == "locality"),
        "{:?}",
        r.violations
    );

    // mutation 3: ancilla touched before its resource is attached
    let mut t = catalog::build(1, &[2, 2, 2, 2]).unwrap();
    let inner = t.root.clone();
    if let Step::Attach { next, .. } = inner {
        t.root = *next; // measurement now references B.1 with no attach
    }
    let r = validate(&t);
    assert!(
        r.violations.iter().any(|v| v.kind == "unattached-wire"),
        "{:?}",
        r.violations
    );

    println!("criterion 10 PASS: all trees complete and local; three mutations rejected");
}

#[test]
fn criterion_11_finisher_soundness() {
    for id in 3..=10u8 {
        let dims = catalog::default_dims(id);
        let ens = catalog::build_ensemble(id, &dims).unwrap();
        let tree = catalog::build(id, &dims).unwrap();

        // collect every terminal verdict in the tree
        let mut subsets: Vec<Vec<String>> = Vec::new();
        let mut pairs = 0usize;
        fn walk(step: &Step, subsets: &mut Vec<Vec<String>>, pairs: &mut usize) {
            match step {
                Step::Finish { verdict } => match verdict {
                    locc_lab_core::Verdict::TerminalSubset { families, .. } => {
                        if !subsets.contains(families) {
                            subsets.push(families.clone());
                        }
                    }
                    locc_lab_core::Verdict::TerminalPair { .. } => *pairs += 1,
                    locc_lab_core::Verdict::Identified(_) => {}
                },
                Step::Measure { children, .. } => {
                    children.iter().for_each(|c| walk(c, subsets, pairs))
                }
                Step::Attach { next, .. }
                | Step::Cnot { next, .. }
                | Step::Teleport { next, .. } => walk(next, subsets, pairs),
            }
        }
        walk(&tree.root, &mut subsets, &mut pairs);
        assert!(!subsets.is_empty(), "theorem {id} has no terminal subsets");

        // independent re-check: the finisher accepts each subset's
        // as-constructed members and separates them with unique outcomes
        for families in &subsets {
            let mut members = Vec::new();
            for f in families {
                members.extend(ens.family_members(f));
            }
            let plan = product_finisher(&members)
                .unwrap_or_else(|r| panic!("theorem {id}, subset {families:?}: {}", r.reason));
            verify_finisher(&plan, &members)
                .unwrap_or_else(|e| panic!("theorem {id}, subset {families:?}: {e}"));
        }

        // leaf-level checks (pair sizes, overlaps, subset membership) are
        // enforced during the run; it must be clean
        let report = engine::run(&tree, &ens, None, &EngineOpts::default()).unwrap();
        assert!(
            report.success,
            "theorem {id}: {:?}",
            report.failures.first()
        );
        println!(
            "criterion 11 PASS: theorem {id}: {} distinct terminal subsets, {} pair leaves",
            subsets.len(),
            pairs
        );
    }
    // the two GHZ protocols terminate in pairs; check them through the run
    for id in 1..=2u8 {
        let report = run_theorem(id, &catalog::default_dims(id));
        assert!(report.success);
        for m in &report.members {
            for p in &m.paths {
                assert!(p.verdict.starts_with("terminal pair"));
            }
        }
    }
    println!("criterion 11 PASS: pair leaves hold exactly two orthogonal candidates");
}

//! Builders for the asymmetric-set protocols.
//!
//! Wire map once resources are attached: `A.1 = a`, `C.1 = c`, Dave's
//! ancillas in attachment order (`D.1 = v1`, `D.2 = v2`, `D.3 = v3`).
//! After the teleportation-based protocol's relocation, `C~` owns wire 0
//! (its own system), wire 1 (the moved subsystem), and wire 2 (ancilla).

use crate::catalog::builder::{
    family_leaf, lv, measure_node, measure_with_remainder, note_splits, pairing_outcomes, rg,
    split2, Ctx,
};
use crate::ensembles::Ensemble;
use crate::error::Result;
use crate::protocol::{ProtocolTree, ResourceKind, Step};

/// Teleportation-based discrimination of the asymmetric set.
pub(crate) fn build_thm3(dims: [usize; 4], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4] = dims;
    let (t1, t2, t3, t4) = (d1 - 1, d2 - 1, d3 - 1, d4 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    ctx.teleport("D", "C")?;
    let (epr, wires) = ctx.attach(ResourceKind::Epr(2), &["A", "C~"])?;

    let mut m1_outs = Vec::new();
    for (label, proj, cx) in pairing_outcomes(&ctx, "M1", "A", &[lv(&[0]), rg(1, t1)], 1, &wires) {
        // Step 2: single-shot filter for the family whose main block is
        // |00> on the merged party with the upper correlation level.
        let m2_rest = {
            // Step 3 branching on Alice.
            let m3_in = {
                // M4 on Bob: |top><top| vs rest.
                let m4_in = split2(
                    &cx,
                    "S1",
                    "C~",
                    0,
                    &rg(1, t3),
                    family_leaf(ens, "H5")?,
                    family_leaf(ens, "H6")?,
                );
                let m4_rest = {
                    let s2 = split2(
                        &cx,
                        "S2",
                        "B",
                        0,
                        &rg(1, d2 - 2),
                        family_leaf(ens, "H10")?,
                        family_leaf(ens, "H18")?,
                    );
                    measure_with_remainder(
                        &cx,
                        "C~",
                        "M4'",
                        vec![
                            (
                                "M4,1'".into(),
                                vec![
                                    cx.term("C~", &[(0, lv(&[t3])), (1, lv(&[t4])), (2, lv(&[1]))])
                                ],
                                family_leaf(ens, "H4")?,
                            ),
                            (
                                "M4,2'".into(),
                                vec![cx.term(
                                    "C~",
                                    &[(0, rg(1, t3 - 1)), (1, lv(&[0])), (2, lv(&[1]))],
                                )],
                                family_leaf(ens, "H14")?,
                            ),
                        ],
                        ("M4,3'".into(), s2),
                    )?
                };
                measure_with_remainder(
                    &cx,
                    "B",
                    "M4",
                    vec![("M4,1".into(), vec![cx.term("B", &[(0, lv(&[t2]))])], m4_in)],
                    ("M4,2".into(), m4_rest),
                )?
            };
            let m3_rest = {
                // Step 4: three-way split on the merged party.
                let m5_1 = {
                    let in_zero = split2(
                        &cx,
                        "S3",
                        "C~",
                        0,
                        &rg(1, t3),
                        family_leaf(ens, "H12")?,
                        family_leaf(ens, "H16")?,
                    );
                    let in_rest = split2(
                        &cx,
                        "S4",
                        "C~",
                        0,
                        &lv(&[t3]),
                        family_leaf(ens, "H15")?,
                        family_leaf(ens, "H11")?,
                    );
                    measure_with_remainder(
                        &cx,
                        "B",
                        "M5'",
                        vec![(
                            "M5,1'".into(),
                            vec![cx.term("B", &[(0, lv(&[0]))])],
                            in_zero,
                        )],
                        ("M5,2'".into(), in_rest),
                    )?
                };
                let m5_3 = {
                    let m6_in = split2(
                        &cx,
                        "S5",
                        "C~",
                        0,
                        &lv(&[t3]),
                        family_leaf(ens, "H2")?,
                        family_leaf(ens, "H1")?,
                    );
                    let m6_rest = {
                        let s6 = split2(
                            &cx,
                            "S6",
                            "B",
                            0,
                            &rg(1, d2 - 2),
                            family_leaf(ens, "H9")?,
                            family_leaf(ens, "H17")?,
                        );
                        measure_with_remainder(
                            &cx,
                            "C~",
                            "M7",
                            vec![
                                (
                                    "M7,1".into(),
                                    vec![cx.term(
                                        "C~",
                                        &[(0, lv(&[0])), (1, lv(&[0])), (2, lv(&[0]))],
                                    )],
                                    family_leaf(ens, "H8")?,
                                ),
                                (
                                    "M7,2".into(),
                                    vec![cx.term(
                                        "C~",
                                        &[(0, rg(1, t3 - 1)), (1, lv(&[t4])), (2, lv(&[0]))],
                                    )],
                                    family_leaf(ens, "H13")?,
                                ),
                            ],
                            ("M7,3".into(), s6),
                        )?
                    };
                    measure_with_remainder(
                        &cx,
                        "B",
                        "M6",
                        vec![("M6,1".into(), vec![cx.term("B", &[(0, lv(&[0]))])], m6_in)],
                        ("M6,2".into(), m6_rest),
                    )?
                };
                measure_with_remainder(
                    &cx,
                    "C~",
                    "M5",
                    vec![
                        (
                            "M5,1".into(),
                            vec![
                                cx.term("C~", &[(0, rg(1, t3)), (1, rg(0, t4 - 1)), (2, lv(&[1]))]),
                                cx.term("C~", &[(0, lv(&[0])), (1, rg(1, t4)), (2, lv(&[1]))]),
                                cx.term("C~", &[(0, rg(1, t3 - 1)), (1, lv(&[t4])), (2, lv(&[1]))]),
                            ],
                            m5_1,
                        ),
                        (
                            "M5,2".into(),
                            vec![cx.term("C~", &[(0, lv(&[t3])), (1, lv(&[t4]))])],
                            family_leaf(ens, "H3")?,
                        ),
                    ],
                    ("M5,3".into(), m5_3),
                )?
            };
            measure_with_remainder(
                &cx,
                "A",
                "M3",
                vec![(
                    "M3,1".into(),
                    vec![cx.term("A", &[(0, lv(&[t1])), (1, lv(&[1]))])],
                    m3_in,
                )],
                ("M3,2".into(), m3_rest),
            )?
        };
        let m2 = measure_with_remainder(
            &cx,
            "C~",
            "M2",
            vec![(
                "M2,1".into(),
                vec![cx.term("C~", &[(0, lv(&[0])), (1, lv(&[0])), (2, lv(&[1]))])],
                family_leaf(ens, "H7")?,
            )],
            ("M2,2".into(), m2_rest),
        )?;
        m1_outs.push((label, proj, m2));
    }

    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-3".into(),
        dims: dims.to_vec(),
        layout,
        root: Step::Teleport {
            src: "D".into(),
            dst: "C".into(),
            dim: d4,
            next: Box::new(Step::Attach {
                resource: epr,
                next: Box::new(measure_node("A", "M1", m1_outs)),
            }),
        },
        recovery: vec![],
        notes,
    })
}

/// Teleportation-free discrimination with one EPR pair and one qutrit
/// maximally entangled pair.
pub(crate) fn build_thm4(dims: [usize; 4], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4] = dims;
    let (t1, t2, t3, t4) = (d1 - 1, d2 - 1, d3 - 1, d4 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    let (epr_ad, w_ad) = ctx.attach(ResourceKind::Epr(2), &["A", "D"])?;
    let (epr_cd, w_cd) = ctx.attach(ResourceKind::Epr(3), &["C", "D"])?;

    let mut m1_outs = Vec::new();
    for (l1, p1, cx1) in pairing_outcomes(&ctx, "M1", "A", &[lv(&[0]), rg(1, t1)], 1, &w_ad) {
        let mut m2_outs = Vec::new();
        for (l2, p2, cx) in pairing_outcomes(
            &cx1,
            "M2",
            "C",
            &[lv(&[0]), rg(1, t3 - 1), lv(&[t3])],
            1,
            &w_cd,
        ) {
            let after = thm4_after_step1(&cx, (t1, t2, t3, t4, d2), ens)?;
            m2_outs.push((l2, p2, after));
        }
        m1_outs.push((l1, p1, measure_node("C", "M2", m2_outs)));
    }

    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-4".into(),
        dims: dims.to_vec(),
        layout,
        root: Step::Attach {
            resource: epr_ad,
            next: Box::new(Step::Attach {
                resource: epr_cd,
                next: Box::new(measure_node("A", "M1", m1_outs)),
            }),
        },
        recovery: vec![],
        notes,
    })
}

fn thm4_after_step1(
    cx: &Ctx,
    (t1, t2, t3, t4, d2): (usize, usize, usize, usize, usize),
    ens: &Ensemble,
) -> Result<Step> {
    // branch under Alice = top
    let m4_in = {
        let m5_in = split2(
            cx,
            "S1",
            "C",
            0,
            &rg(1, t3),
            family_leaf(ens, "H5")?,
            family_leaf(ens, "H6")?,
        );
        let m5_rest = {
            let s2 = split2(
                cx,
                "S2",
                "B",
                0,
                &rg(1, d2 - 2),
                family_leaf(ens, "H10")?,
                family_leaf(ens, "H18")?,
            );
            measure_with_remainder(
                cx,
                "D",
                "M6",
                vec![
                    (
                        "M6,1".into(),
                        vec![cx.term("D", &[(0, lv(&[t4])), (1, lv(&[1])), (2, lv(&[2]))])],
                        family_leaf(ens, "H4")?,
                    ),
                    (
                        "M6,2".into(),
                        vec![cx.term("D", &[(0, lv(&[0])), (1, lv(&[1])), (2, lv(&[1]))])],
                        family_leaf(ens, "H14")?,
                    ),
                ],
                ("M6,3".into(), s2),
            )?
        };
        measure_with_remainder(
            cx,
            "B",
            "M5",
            vec![("M5,1".into(), vec![cx.term("B", &[(0, lv(&[t2]))])], m5_in)],
            ("M5,2".into(), m5_rest),
        )?
    };
    // branch under Alice != top
    let m4_rest = {
        let m7_rest = {
            let m8_in = {
                // M9 under Bob = 0
                let m9_in = split2(
                    cx,
                    "S3",
                    "C",
                    0,
                    &lv(&[t3]),
                    family_leaf(ens, "H2")?,
                    family_leaf(ens, "H1")?,
                );
                let m9_rest = split2(
                    cx,
                    "S4",
                    "D",
                    0,
                    &lv(&[0]),
                    family_leaf(ens, "H12")?,
                    family_leaf(ens, "H16")?,
                );
                measure_with_remainder(
                    cx,
                    "A",
                    "M9",
                    vec![(
                        "M9,1".into(),
                        vec![cx.term("A", &[(0, lv(&[0])), (1, lv(&[0]))])],
                        m9_in,
                    )],
                    ("M9,2".into(), m9_rest),
                )?
            };
            let m8_rest = {
                // M9 under Bob != 0
                let m9_in = {
                    let s5 = split2(
                        cx,
                        "S5",
                        "B",
                        0,
                        &rg(1, d2 - 2),
                        family_leaf(ens, "H9")?,
                        family_leaf(ens, "H17")?,
                    );
                    measure_with_remainder(
                        cx,
                        "D",
                        "M10",
                        vec![
                            (
                                "M10,1".into(),
                                vec![cx.term("D", &[(0, lv(&[0])), (1, lv(&[0])), (2, lv(&[0]))])],
                                family_leaf(ens, "H8")?,
                            ),
                            (
                                "M10,2".into(),
                                vec![cx.term("D", &[(0, lv(&[t4])), (1, lv(&[0])), (2, lv(&[1]))])],
                                family_leaf(ens, "H13")?,
                            ),
                        ],
                        ("M10,3".into(), s5),
                    )?
                };
                let m9_rest = split2(
                    cx,
                    "S6",
                    "C",
                    0,
                    &lv(&[t3]),
                    family_leaf(ens, "H15")?,
                    family_leaf(ens, "H11")?,
                );
                measure_with_remainder(
                    cx,
                    "A",
                    "M9",
                    vec![(
                        "M9,1".into(),
                        vec![cx.term("A", &[(0, lv(&[0])), (1, lv(&[0]))])],
                        m9_in,
                    )],
                    ("M9,2".into(), m9_rest),
                )?
            };
            measure_with_remainder(
                cx,
                "B",
                "M8",
                vec![("M8,1".into(), vec![cx.term("B", &[(0, lv(&[0]))])], m8_in)],
                ("M8,2".into(), m8_rest),
            )?
        };
        measure_with_remainder(
            cx,
            "D",
            "M7",
            vec![(
                "M7,1".into(),
                vec![cx.term("D", &[(0, lv(&[t4])), (1, lv(&[0, 1])), (2, lv(&[2]))])],
                family_leaf(ens, "H3")?,
            )],
            ("M7,2".into(), m7_rest),
        )?
    };
    let m4 = measure_with_remainder(
        cx,
        "A",
        "M4",
        vec![("M4,1".into(), vec![cx.term("A", &[(0, lv(&[t1]))])], m4_in)],
        ("M4,2".into(), m4_rest),
    )?;
    measure_with_remainder(
        cx,
        "D",
        "M3",
        vec![(
            "M3,1".into(),
            vec![cx.term("D", &[(0, lv(&[0])), (1, lv(&[1])), (2, lv(&[0]))])],
            family_leaf(ens, "H7")?,
        )],
        ("M3,2".into(), m4),
    )
}

/// Two EPR pairs plus a conditionally attached third between B and D; the
/// attach sits on the branch that still holds the large family set, which
/// is what produces the fractional expected copy count.
pub(crate) fn build_thm5(dims: [usize; 4], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4] = dims;
    let (t1, t2, t3, t4) = (d1 - 1, d2 - 1, d3 - 1, d4 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    let (epr_ad, w_ad) = ctx.attach(ResourceKind::Epr(2), &["A", "D"])?;
    let (epr_cd, w_cd) = ctx.attach(ResourceKind::Epr(2), &["C", "D"])?;

    let mut m1_outs = Vec::new();
    for (l1, p1, cx1) in pairing_outcomes(&ctx, "M1", "A", &[lv(&[0]), rg(1, t1)], 1, &w_ad) {
        let mut m2_outs = Vec::new();
        for (l2, p2, cx) in pairing_outcomes(&cx1, "M2", "C", &[lv(&[0]), rg(1, t3)], 1, &w_cd) {
            // Alice = top branch: no extra resource needed.
            let m4_in = {
                let m5_in = split2(
                    &cx,
                    "S1",
                    "C",
                    0,
                    &rg(1, t3),
                    family_leaf(ens, "H5")?,
                    family_leaf(ens, "H6")?,
                );
                let m5_rest = {
                    let m7_rest = split2(
                        &cx,
                        "S2",
                        "B",
                        0,
                        &rg(1, d2 - 2),
                        family_leaf(ens, "H10")?,
                        family_leaf(ens, "H18")?,
                    );
                    let m7 = measure_with_remainder(
                        &cx,
                        "C",
                        "M7",
                        vec![(
                            "M7,1".into(),
                            vec![cx.term("C", &[(0, rg(1, t3 - 1))])],
                            family_leaf(ens, "H14")?,
                        )],
                        ("M7,2".into(), m7_rest),
                    )?;
                    measure_with_remainder(
                        &cx,
                        "D",
                        "M6",
                        vec![(
                            "M6,1".into(),
                            vec![cx.term("D", &[(0, lv(&[t4])), (1, lv(&[1])), (2, lv(&[1]))])],
                            family_leaf(ens, "H4")?,
                        )],
                        ("M6,2".into(), m7),
                    )?
                };
                measure_with_remainder(
                    &cx,
                    "B",
                    "M5",
                    vec![("M5,1".into(), vec![cx.term("B", &[(0, lv(&[t2]))])], m5_in)],
                    ("M5,2".into(), m5_rest),
                )?
            };
            // Alice != top branch: attach the extra EPR between B and D.
            let m4_rest = thm5_attach_branch(&cx, (t2, t3, t4, d2), ens)?;
            let m4 = measure_with_remainder(
                &cx,
                "A",
                "M4",
                vec![("M4,1".into(), vec![cx.term("A", &[(0, lv(&[t1]))])], m4_in)],
                ("M4,2".into(), m4_rest),
            )?;
            let m3 = measure_with_remainder(
                &cx,
                "D",
                "M3",
                vec![(
                    "M3,1".into(),
                    vec![cx.term("D", &[(0, lv(&[0])), (1, lv(&[1])), (2, lv(&[0]))])],
                    family_leaf(ens, "H7")?,
                )],
                ("M3,2".into(), m4),
            )?;
            m2_outs.push((l2, p2, m3));
        }
        m1_outs.push((l1, p1, measure_node("C", "M2", m2_outs)));
    }

    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-5".into(),
        dims: dims.to_vec(),
        layout,
        root: Step::Attach {
            resource: epr_ad,
            next: Box::new(Step::Attach {
                resource: epr_cd,
                next: Box::new(measure_node("A", "M1", m1_outs)),
            }),
        },
        recovery: vec![],
        notes,
    })
}

fn thm5_attach_branch(
    cx: &Ctx,
    (t2, t3, t4, d2): (usize, usize, usize, usize),
    ens: &Ensemble,
) -> Result<Step> {
    let mut cxb = cx.clone();
    let (epr_bd, w_bd) = cxb.attach(ResourceKind::Epr(2), &["B", "D"])?;
    let mut m8_outs = Vec::new();
    for (l8, p8, cx8) in pairing_outcomes(&cxb, "M8", "B", &[lv(&[0]), rg(1, t2)], 1, &w_bd) {
        let m9_5 = split2(
            &cx8,
            "S3",
            "B",
            0,
            &rg(1, d2 - 2),
            family_leaf(ens, "H9")?,
            family_leaf(ens, "H17")?,
        );
        let m10_in = split2(
            &cx8,
            "S4",
            "D",
            0,
            &lv(&[t4]),
            family_leaf(ens, "H3")?,
            family_leaf(ens, "H2")?,
        );
        let m10_rest = split2(
            &cx8,
            "S5",
            "A",
            0,
            &lv(&[0]),
            split2(
                &cx8,
                "S6",
                "B",
                0,
                &lv(&[0]),
                family_leaf(ens, "H1")?,
                family_leaf(ens, "H13")?,
            ),
            family_leaf(ens, "H11")?,
        );
        let m10 = measure_with_remainder(
            &cx8,
            "C",
            "M10",
            vec![(
                "M10,1".into(),
                vec![cx8.term("C", &[(0, lv(&[t3]))])],
                m10_in,
            )],
            ("M10,2".into(), m10_rest),
        )?;
        let m9 = measure_with_remainder(
            &cx8,
            "D",
            "M9",
            vec![
                (
                    "M9,1".into(),
                    vec![cx8.term(
                        "D",
                        &[(0, lv(&[0])), (1, lv(&[0])), (3, lv(&[1])), (2, lv(&[0]))],
                    )],
                    family_leaf(ens, "H8")?,
                ),
                (
                    "M9,2".into(),
                    vec![cx8.term(
                        "D",
                        &[(0, lv(&[0])), (1, lv(&[1])), (3, lv(&[0])), (2, lv(&[1]))],
                    )],
                    family_leaf(ens, "H12")?,
                ),
                (
                    "M9,3".into(),
                    vec![cx8.term(
                        "D",
                        &[
                            (0, rg(0, t4 - 1)),
                            (1, lv(&[1])),
                            (3, lv(&[1])),
                            (2, lv(&[1])),
                        ],
                    )],
                    family_leaf(ens, "H15")?,
                ),
                (
                    "M9,4".into(),
                    vec![cx8.term(
                        "D",
                        &[(0, rg(1, t4)), (1, lv(&[1])), (3, lv(&[0])), (2, lv(&[0]))],
                    )],
                    family_leaf(ens, "H16")?,
                ),
                (
                    "M9,5".into(),
                    vec![
                        cx8.term(
                            "D",
                            &[(0, rg(1, t4)), (1, lv(&[0])), (3, lv(&[1])), (2, lv(&[0]))],
                        ),
                        cx8.term(
                            "D",
                            &[
                                (0, rg(1, t4 - 1)),
                                (1, lv(&[0])),
                                (3, lv(&[1])),
                                (2, lv(&[1])),
                            ],
                        ),
                    ],
                    m9_5,
                ),
            ],
            ("M9,6".into(), m10),
        )?;
        m8_outs.push((l8, p8, m9));
    }
    Ok(Step::Attach {
        resource: epr_bd,
        next: Box::new(measure_node("B", "M8", m8_outs)),
    })
}

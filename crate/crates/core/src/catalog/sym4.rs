//! Builders for the symmetric-set protocols.

use crate::catalog::builder::{
    family_leaf, lv, measure_node, measure_with_remainder, note_splits, pairing_outcomes, rg,
    split2, Ctx,
};
use crate::ensembles::Ensemble;
use crate::error::Result;
use crate::protocol::{ProtocolTree, ResourceKind, Step};

/// Teleportation-based discrimination of the symmetric set: relocate D to
/// C, then one qutrit maximally entangled pair between A and the merged
/// party.
pub(crate) fn build_thm6(dims: [usize; 4], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4] = dims;
    let (t1, t2, t3, t4) = (d1 - 1, d2 - 1, d3 - 1, d4 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    ctx.teleport("D", "C")?;
    let (epr, wires) = ctx.attach(ResourceKind::Epr(3), &["A", "C~"])?;

    let mut m1_outs = Vec::new();
    for (label, proj, cx) in pairing_outcomes(
        &ctx,
        "M1",
        "A",
        &[lv(&[0]), rg(1, t1 - 1), lv(&[t1])],
        1,
        &wires,
    ) {
        let m2_4 = {
            // five families share this region; peel them off in turn
            let tail = split2(
                &cx,
                "S3",
                "C~",
                0,
                &lv(&[0]),
                family_leaf(ens, "H7.3")?,
                family_leaf(ens, "H8.1")?,
            );
            let m2ppp = measure_with_remainder(
                &cx,
                "B",
                "M2'''",
                vec![(
                    "M2,1'''".into(),
                    vec![cx.term("B", &[(0, lv(&[t2]))])],
                    family_leaf(ens, "H4.2")?,
                )],
                ("M2,2'''".into(), tail),
            )?;
            let m2pp = measure_with_remainder(
                &cx,
                "C~",
                "M2''",
                vec![(
                    "M2,1''".into(),
                    vec![cx.term("C~", &[(0, lv(&[0])), (1, lv(&[0])), (2, lv(&[2]))])],
                    family_leaf(ens, "H3.3")?,
                )],
                ("M2,2''".into(), m2ppp),
            )?;
            measure_with_remainder(
                &cx,
                "B",
                "M2'",
                vec![(
                    "M2,1'".into(),
                    vec![cx.term("B", &[(0, lv(&[0]))])],
                    family_leaf(ens, "H2.1")?,
                )],
                ("M2,2'".into(), m2pp),
            )?
        };
        let m2_8 = {
            // Step 3 onward
            let m4 = {
                let m4_2 = split2(
                    &cx,
                    "S4",
                    "B",
                    0,
                    &lv(&[0]),
                    family_leaf(ens, "H7.4")?,
                    family_leaf(ens, "H8.2")?,
                );
                let m4_6 = split2(
                    &cx,
                    "S5",
                    "B",
                    0,
                    &lv(&[0]),
                    family_leaf(ens, "H3.4")?,
                    family_leaf(ens, "H6.3")?,
                );
                let m4_7 = {
                    let m5_in = split2(
                        &cx,
                        "S6",
                        "A",
                        0,
                        &lv(&[0]),
                        family_leaf(ens, "H3.1")?,
                        family_leaf(ens, "H1.2")?,
                    );
                    let m5_rest = split2(
                        &cx,
                        "S7",
                        "C~",
                        1,
                        &lv(&[t4]),
                        family_leaf(ens, "H6.1")?,
                        family_leaf(ens, "H5.4")?,
                    );
                    measure_with_remainder(
                        &cx,
                        "B",
                        "M5",
                        vec![("M5,1".into(), vec![cx.term("B", &[(0, lv(&[0]))])], m5_in)],
                        ("M5,2".into(), m5_rest),
                    )?
                };
                measure_with_remainder(
                    &cx,
                    "C~",
                    "M4",
                    vec![
                        (
                            "M4,1".into(),
                            vec![cx.term("C~", &[(0, rg(1, t3 - 1)), (1, lv(&[0])), (2, lv(&[1]))])],
                            family_leaf(ens, "H7.2")?,
                        ),
                        (
                            "M4,2".into(),
                            vec![
                                cx.term("C~", &[(0, rg(1, t3 - 1)), (1, lv(&[t4])), (2, lv(&[1]))])
                            ],
                            m4_2,
                        ),
                        (
                            "M4,3".into(),
                            vec![cx.term("C~", &[(0, lv(&[t3])), (1, lv(&[t4])), (2, lv(&[2]))])],
                            family_leaf(ens, "H6.4")?,
                        ),
                        (
                            "M4,4".into(),
                            vec![
                                cx.term("C~", &[(0, rg(1, t3 - 1)), (1, lv(&[t4])), (2, lv(&[2]))])
                            ],
                            family_leaf(ens, "H4.3")?,
                        ),
                        (
                            "M4,5".into(),
                            vec![cx.term(
                                "C~",
                                &[(0, rg(1, t3 - 1)), (1, rg(0, t4 - 1)), (2, lv(&[2]))],
                            )],
                            family_leaf(ens, "H5.1")?,
                        ),
                        (
                            "M4,6".into(),
                            vec![cx.term("C~", &[(0, lv(&[0])), (1, lv(&[t4])), (2, lv(&[1, 2]))])],
                            m4_6,
                        ),
                    ],
                    ("M4,7".into(), m4_7),
                )?
            };
            let m6 = measure_with_remainder(
                &cx,
                "C~",
                "M6",
                vec![
                    (
                        "M6,1".into(),
                        vec![cx.term("C~", &[(0, lv(&[t3])), (1, rg(1, t4 - 1)), (2, lv(&[0]))])],
                        family_leaf(ens, "H7.1")?,
                    ),
                    (
                        "M6,2".into(),
                        vec![cx.term("C~", &[(0, lv(&[0])), (1, rg(1, t4)), (2, lv(&[1]))])],
                        family_leaf(ens, "H1.1")?,
                    ),
                    (
                        "M6,3".into(),
                        vec![cx.term("C~", &[(0, rg(0, t3 - 1)), (1, lv(&[t4])), (2, lv(&[2]))])],
                        family_leaf(ens, "H5.2")?,
                    ),
                    (
                        "M6,4".into(),
                        vec![cx.term("C~", &[(0, lv(&[t3])), (1, lv(&[t4])), (2, lv(&[0, 2]))])],
                        family_leaf(ens, "H4.4")?,
                    ),
                ],
                ("M6,5".into(), family_leaf(ens, "H1.4")?),
            )?;
            measure_with_remainder(
                &cx,
                "B",
                "M3",
                vec![("M3,1".into(), vec![cx.term("B", &[(0, lv(&[0, t2]))])], m4)],
                ("M3,2".into(), m6),
            )?
        };
        let m2 = measure_with_remainder(
            &cx,
            "C~",
            "M2",
            vec![
                (
                    "M2,1".into(),
                    vec![cx.term("C~", &[(0, lv(&[t3])), (1, lv(&[0])), (2, lv(&[2]))])],
                    family_leaf(ens, "H6.2")?,
                ),
                (
                    "M2,2".into(),
                    vec![cx.term("C~", &[(0, rg(1, t3)), (1, lv(&[0])), (2, lv(&[0]))])],
                    split2(
                        &cx,
                        "S1",
                        "B",
                        0,
                        &rg(0, d2 - 2),
                        family_leaf(ens, "H2.3")?,
                        family_leaf(ens, "H3.2")?,
                    ),
                ),
                (
                    "M2,3".into(),
                    vec![cx.term("C~", &[(0, lv(&[t3])), (1, lv(&[0, t4])), (2, lv(&[1]))])],
                    split2(
                        &cx,
                        "S2",
                        "B",
                        0,
                        &lv(&[t2]),
                        family_leaf(ens, "H4.1")?,
                        family_leaf(ens, "H5.3")?,
                    ),
                ),
                (
                    "M2,4".into(),
                    vec![
                        cx.term("C~", &[(0, lv(&[0])), (1, rg(0, t4 - 1)), (2, lv(&[2]))]),
                        cx.term("C~", &[(0, lv(&[t3])), (1, rg(1, t4 - 1)), (2, lv(&[2]))]),
                    ],
                    m2_4,
                ),
                (
                    "M2,5".into(),
                    vec![cx.term("C~", &[(0, lv(&[0])), (1, lv(&[0])), (2, lv(&[0, 1]))])],
                    family_leaf(ens, "H2.4")?,
                ),
                (
                    "M2,6".into(),
                    vec![cx.term(
                        "C~",
                        &[(0, rg(1, t3 - 1)), (1, rg(1, t4 - 1)), (2, lv(&[0]))],
                    )],
                    family_leaf(ens, "H1.3")?,
                ),
                (
                    "M2,7".into(),
                    vec![cx.term("C~", &[(0, rg(0, t3 - 1)), (1, lv(&[t4])), (2, lv(&[0]))])],
                    family_leaf(ens, "H2.2")?,
                ),
            ],
            ("M2,8".into(), m2_8),
        )?;
        m1_outs.push((label, proj, m2));
    }

    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-6".into(),
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

/// Teleportation-free discrimination of the symmetric set. Alice holds
/// three ancillas (`A.1 = a1` with Charlie, `A.2 = a2` with Dave, and a
/// conditionally attached `A.3 = a3` with Bob); the fractional pair is
/// attached between A and B on the two branches that still hold large
/// family sets.
pub(crate) fn build_thm7(dims: [usize; 4], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4] = dims;
    let (t1, t2, t3, t4) = (d1 - 1, d2 - 1, d3 - 1, d4 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    let (epr_ac, w_ac) = ctx.attach(ResourceKind::Epr(2), &["A", "C"])?;
    let (epr_ad, w_ad) = ctx.attach(ResourceKind::Epr(3), &["A", "D"])?;

    let mut m1_outs = Vec::new();
    for (l1, p1, cx1) in pairing_outcomes(&ctx, "M1", "C", &[lv(&[0]), rg(1, t3)], 1, &w_ac) {
        let mut m2_outs = Vec::new();
        for (l2, p2, cx) in pairing_outcomes(
            &cx1,
            "M2",
            "D",
            &[lv(&[0]), rg(1, t4 - 1), lv(&[t4])],
            1,
            &w_ad,
        ) {
            let sub_a = thm7_branch_a(&cx, (t1, t2, t3), ens)?;
            let sub_b = thm7_branch_b(&cx, (t1, t2, t3, d2), ens)?;
            let m3 = measure_with_remainder(
                &cx,
                "A",
                "M3",
                vec![
                    (
                        "M3,1".into(),
                        vec![cx.term("A", &[(0, lv(&[0])), (1, lv(&[1])), (2, lv(&[0]))])],
                        split2(
                            &cx,
                            "S1",
                            "B",
                            0,
                            &rg(0, d2 - 2),
                            family_leaf(ens, "H2.3")?,
                            family_leaf(ens, "H3.2")?,
                        ),
                    ),
                    (
                        "M3,2".into(),
                        vec![cx.term("A", &[(0, rg(0, t1 - 1)), (1, lv(&[0])), (2, lv(&[0]))])],
                        family_leaf(ens, "H2.4")?,
                    ),
                    (
                        "M3,3".into(),
                        vec![
                            cx.term("A", &[(0, rg(1, t1 - 1)), (1, lv(&[1])), (2, lv(&[2]))]),
                            cx.term("A", &[(0, rg(1, t1)), (1, lv(&[1])), (2, lv(&[0]))]),
                            cx.term("A", &[(0, lv(&[t1])), (1, lv(&[1])), (2, lv(&[1]))]),
                            cx.term("A", &[(0, lv(&[t1])), (1, lv(&[0])), (2, lv(&[1]))]),
                            cx.term("A", &[(0, lv(&[t1])), (1, lv(&[0])), (2, lv(&[0]))]),
                        ],
                        sub_a,
                    ),
                ],
                ("M3,4".into(), sub_b),
            )?;
            m2_outs.push((l2, p2, m3));
        }
        m1_outs.push((l1, p1, measure_node("D", "M2", m2_outs)));
    }

    let mut notes = Vec::new();
    note_splits(&mut notes);
    notes.push("the fractional EPR(2) is attached between A and B".into());
    Ok(ProtocolTree {
        name: "theorem-7".into(),
        dims: dims.to_vec(),
        layout,
        root: Step::Attach {
            resource: epr_ac,
            next: Box::new(Step::Attach {
                resource: epr_ad,
                next: Box::new(measure_node("C", "M1", m1_outs)),
            }),
        },
        recovery: vec![],
        notes,
    })
}

fn thm7_branch_a(cx: &Ctx, (t1, t2, t3): (usize, usize, usize), ens: &Ensemble) -> Result<Step> {
    let mut cxb = cx.clone();
    let (epr_ab, w_ab) = cxb.attach(ResourceKind::Epr(2), &["A", "B"])?;
    let mut m4_outs = Vec::new();
    for (l4, p4, cx4) in pairing_outcomes(&cxb, "M4", "B", &[lv(&[0]), rg(1, t2)], 1, &w_ab) {
        let m6_in = {
            let m8_in = measure_with_remainder(
                &cx4,
                "C",
                "M8",
                vec![(
                    "M8,1".into(),
                    vec![cx4.term("C", &[(0, rg(1, t3 - 1))])],
                    family_leaf(ens, "H5.1")?,
                )],
                (
                    "M8,2".into(),
                    split2(
                        &cx4,
                        "S2",
                        "D",
                        0,
                        &lv(&[0]),
                        family_leaf(ens, "H6.2")?,
                        family_leaf(ens, "H4.2")?,
                    ),
                ),
            )?;
            let m8_out = measure_with_remainder(
                &cx4,
                "C",
                "M8'",
                vec![(
                    "M8,1'".into(),
                    vec![cx4.term("C", &[(0, rg(1, t3 - 1))])],
                    split2(
                        &cx4,
                        "S3",
                        "D",
                        0,
                        &lv(&[0]),
                        family_leaf(ens, "H7.2")?,
                        family_leaf(ens, "H8.2")?,
                    ),
                )],
                ("M8,2'".into(), family_leaf(ens, "H4.1")?),
            )?;
            measure_with_remainder(
                &cx4,
                "A",
                "M7",
                vec![("M7,1".into(), vec![cx4.term("A", &[(0, lv(&[t1]))])], m8_in)],
                ("M7,2".into(), m8_out),
            )?
        };
        let m6_rest = measure_with_remainder(
            &cx4,
            "A",
            "M9",
            vec![
                (
                    "M9,1".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, rg(1, t1)), (1, lv(&[1])), (2, lv(&[0])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H1.4")?,
                ),
                (
                    "M9,2".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, lv(&[t1])), (1, lv(&[0])), (2, lv(&[1])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H7.3")?,
                ),
                (
                    "M9,3".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, lv(&[t1])), (1, lv(&[1])), (2, lv(&[1])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H8.1")?,
                ),
            ],
            (
                "M9,4".into(),
                split2(
                    &cx4,
                    "S4",
                    "C",
                    0,
                    &lv(&[t3]),
                    family_leaf(ens, "H5.3")?,
                    family_leaf(ens, "H7.4")?,
                ),
            ),
        )?;
        let m6 = measure_with_remainder(
            &cx4,
            "B",
            "M6",
            vec![("M6,1".into(), vec![cx4.term("B", &[(0, lv(&[t2]))])], m6_in)],
            ("M6,2".into(), m6_rest),
        )?;
        let m5 = measure_with_remainder(
            &cx4,
            "A",
            "M5",
            vec![
                (
                    "M5,1".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, lv(&[t1])), (1, lv(&[0])), (2, lv(&[0])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H3.3")?,
                ),
                (
                    "M5,2".into(),
                    vec![cx4.term(
                        "A",
                        &[
                            (0, lv(&[t1])),
                            (1, lv(&[0])),
                            (2, lv(&[0, 1])),
                            (3, lv(&[0])),
                        ],
                    )],
                    family_leaf(ens, "H2.1")?,
                ),
            ],
            ("M5,3".into(), m6),
        )?;
        m4_outs.push((l4, p4, m5));
    }
    Ok(Step::Attach {
        resource: epr_ab,
        next: Box::new(measure_node("B", "M4", m4_outs)),
    })
}

fn thm7_branch_b(
    cx: &Ctx,
    (t1, t2, t3, d2): (usize, usize, usize, usize),
    ens: &Ensemble,
) -> Result<Step> {
    let mut cxb = cx.clone();
    let (epr_ab, w_ab) = cxb.attach(ResourceKind::Epr(2), &["A", "B"])?;
    let mut m4_outs = Vec::new();
    for (l4, p4, cx4) in pairing_outcomes(&cxb, "M4", "B", &[lv(&[0]), rg(1, t2)], 1, &w_ab) {
        let m10_2 = measure_with_remainder(
            &cx4,
            "C",
            "M11",
            vec![(
                "M11,1".into(),
                vec![cx4.term("C", &[(0, rg(1, t3 - 1))])],
                family_leaf(ens, "H1.3")?,
            )],
            (
                "M11,2".into(),
                split2(
                    &cx4,
                    "S5",
                    "B",
                    0,
                    &rg(1, d2 - 2),
                    family_leaf(ens, "H7.1")?,
                    family_leaf(ens, "H5.4")?,
                ),
            ),
        )?;
        let m12_in = measure_with_remainder(
            &cx4,
            "A",
            "M13",
            vec![(
                "M13,1".into(),
                vec![cx4.term("A", &[(0, rg(1, t1 - 1))])],
                family_leaf(ens, "H1.1")?,
            )],
            (
                "M13,2".into(),
                split2(
                    &cx4,
                    "S6",
                    "C",
                    0,
                    &lv(&[t3]),
                    family_leaf(ens, "H4.4")?,
                    family_leaf(ens, "H5.2")?,
                ),
            ),
        )?;
        let m14_in = measure_with_remainder(
            &cx4,
            "A",
            "M15",
            vec![
                (
                    "M15,1".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, lv(&[0])), (1, lv(&[1])), (2, lv(&[2])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H6.1")?,
                ),
                (
                    "M15,2".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, lv(&[t1])), (1, lv(&[1])), (2, lv(&[2])), (3, lv(&[0]))],
                    )],
                    family_leaf(ens, "H6.4")?,
                ),
            ],
            ("M15,3".into(), family_leaf(ens, "H3.1")?),
        )?;
        let m14_rest = measure_with_remainder(
            &cx4,
            "A",
            "M16",
            vec![
                (
                    "M16,1".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, rg(1, t1)), (1, lv(&[0])), (2, lv(&[2])), (3, lv(&[0]))],
                    )],
                    family_leaf(ens, "H3.4")?,
                ),
                (
                    "M16,2".into(),
                    vec![cx4.term(
                        "A",
                        &[(0, lv(&[t1])), (1, lv(&[0])), (2, lv(&[2])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H6.3")?,
                ),
                (
                    "M16,3".into(),
                    vec![cx4.term(
                        "A",
                        &[
                            (0, lv(&[0])),
                            (1, lv(&[0, 1])),
                            (2, lv(&[2])),
                            (3, lv(&[0])),
                        ],
                    )],
                    family_leaf(ens, "H2.2")?,
                ),
            ],
            ("M16,4".into(), family_leaf(ens, "H4.3")?),
        )?;
        let m12_rest = measure_with_remainder(
            &cx4,
            "C",
            "M14",
            vec![(
                "M14,1".into(),
                vec![cx4.term("C", &[(0, lv(&[t3]))])],
                m14_in,
            )],
            ("M14,2".into(), m14_rest),
        )?;
        let m12 = measure_with_remainder(
            &cx4,
            "B",
            "M12",
            vec![(
                "M12,1".into(),
                vec![cx4.term("B", &[(0, rg(1, t2 - 1))])],
                m12_in,
            )],
            ("M12,2".into(), m12_rest),
        )?;
        let m10 = measure_with_remainder(
            &cx4,
            "A",
            "M10",
            vec![
                (
                    "M10,1".into(),
                    vec![cx4.term(
                        "A",
                        &[
                            (0, rg(1, t1 - 1)),
                            (1, lv(&[1])),
                            (2, lv(&[1])),
                            (3, lv(&[0])),
                        ],
                    )],
                    family_leaf(ens, "H1.2")?,
                ),
                (
                    "M10,2".into(),
                    vec![cx4.term(
                        "A",
                        &[
                            (0, rg(0, t1 - 1)),
                            (1, lv(&[1])),
                            (2, lv(&[1])),
                            (3, lv(&[1])),
                        ],
                    )],
                    m10_2,
                ),
            ],
            ("M10,3".into(), m12),
        )?;
        m4_outs.push((l4, p4, m10));
    }
    Ok(Step::Attach {
        resource: epr_ab,
        next: Box::new(measure_node("B", "M4", m4_outs)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::validate;

    #[test]
    fn sym_trees_are_structurally_valid() {
        let ens = crate::ensembles::ops_sym4([3, 3, 3, 3]).unwrap();
        for (id, t) in [
            (6, build_thm6([3, 3, 3, 3], &ens).unwrap()),
            (7, build_thm7([3, 3, 3, 3], &ens).unwrap()),
        ] {
            let r = validate(&t);
            assert!(r.is_valid(), "theorem {id}: {:?}", r.violations.first());
        }
    }
}

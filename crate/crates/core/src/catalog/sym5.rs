//! Builders for the five-party symmetric-set protocols: four EPR pairs,
//! three GHZ states, or two four-party GHZ-type states shared with the
//! downstream parties, followed by one or two rounds of filtering
//! measurements whose ancilla constraints pick out each family.

use crate::catalog::builder::{
    family_leaf, lv, measure_node, measure_with_remainder, note_splits, pairing_outcomes, rg,
    split2, Ctx,
};
use crate::ensembles::Ensemble;
use crate::error::Result;
use crate::protocol::{ProtocolTree, Resource, ResourceKind, Step};

type PairingSpec<'a> = (&'a str, &'a str, usize, Vec<(String, usize)>);

fn block_pairings(
    ctx: &Ctx,
    specs: &[PairingSpec<'_>],
    leaf_builder: &dyn Fn(&Ctx) -> Result<Step>,
    depth: usize,
) -> Result<Step> {
    if depth == specs.len() {
        return leaf_builder(ctx);
    }
    let (name, party, top, tied) = &specs[depth];
    let mut outs = Vec::new();
    for (label, proj, cx) in pairing_outcomes(ctx, name, party, &[lv(&[0]), rg(1, *top)], 1, tied) {
        outs.push((
            label,
            proj,
            block_pairings(&cx, specs, leaf_builder, depth + 1)?,
        ));
    }
    Ok(measure_node(party, name, outs))
}

fn chain_attach(resources: Vec<Resource>, inner: Step) -> Step {
    resources
        .into_iter()
        .rev()
        .fold(inner, |next, resource| Step::Attach {
            resource,
            next: Box::new(next),
        })
}

/// Four EPR pairs, one between each upstream party and E; a single
/// measurement on E then identifies the family.
pub(crate) fn build_thm8(dims: [usize; 5], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4, d5] = dims;
    let t5 = d5 - 1;
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    let mut resources = Vec::new();
    let mut tied = Vec::new();
    for (p, _d) in [("A", d1), ("B", d2), ("C", d3), ("D", d4)] {
        let (r, w) = ctx.attach(ResourceKind::Epr(2), &[p, "E"])?;
        resources.push(r);
        tied.push(w);
    }
    let specs = vec![
        ("M1", "A", d1 - 1, tied[0].clone()),
        ("M2", "B", d2 - 1, tied[1].clone()),
        ("M3", "C", d3 - 1, tied[2].clone()),
        ("M4", "D", d4 - 1, tied[3].clone()),
    ];
    let leaf = |cx: &Ctx| -> Result<Step> {
        measure_with_remainder(
            cx,
            "E",
            "M5",
            vec![
                (
                    "M5,1".into(),
                    vec![cx.term(
                        "E",
                        &[
                            (0, rg(1, t5)),
                            (1, lv(&[1])),
                            (2, lv(&[0])),
                            (3, lv(&[1])),
                            (4, lv(&[0])),
                        ],
                    )],
                    family_leaf(ens, "H6")?,
                ),
                (
                    "M5,2".into(),
                    vec![cx.term(
                        "E",
                        &[
                            (0, rg(1, t5)),
                            (1, lv(&[0])),
                            (2, lv(&[1])),
                            (3, lv(&[0])),
                            (4, lv(&[1])),
                        ],
                    )],
                    family_leaf(ens, "H7")?,
                ),
                (
                    "M5,3".into(),
                    vec![cx.term(
                        "E",
                        &[
                            (0, lv(&[0])),
                            (1, lv(&[1])),
                            (2, lv(&[0])),
                            (3, lv(&[1])),
                            (4, lv(&[1])),
                        ],
                    )],
                    family_leaf(ens, "H8")?,
                ),
                (
                    "M5,4".into(),
                    vec![cx.term(
                        "E",
                        &[
                            (0, rg(1, t5)),
                            (1, lv(&[0])),
                            (2, lv(&[1])),
                            (3, lv(&[1])),
                            (4, lv(&[0])),
                        ],
                    )],
                    family_leaf(ens, "H9")?,
                ),
                (
                    "M5,5".into(),
                    vec![cx.term(
                        "E",
                        &[
                            (0, lv(&[0])),
                            (1, lv(&[1])),
                            (2, lv(&[1])),
                            (3, lv(&[0])),
                            (4, lv(&[1])),
                        ],
                    )],
                    family_leaf(ens, "H10")?,
                ),
                (
                    "M5,6".into(),
                    vec![cx.term("E", &[(0, rg(1, t5)), (1, lv(&[0])), (2, lv(&[0]))])],
                    family_leaf(ens, "H4")?,
                ),
                (
                    "M5,7".into(),
                    vec![cx.term(
                        "E",
                        &[(0, rg(0, t5)), (1, lv(&[1])), (2, lv(&[0])), (3, lv(&[0]))],
                    )],
                    family_leaf(ens, "H3")?,
                ),
                (
                    "M5,8".into(),
                    vec![cx.term("E", &[(0, lv(&[0])), (3, lv(&[1])), (4, lv(&[0]))])],
                    family_leaf(ens, "H1")?,
                ),
                (
                    "M5,9".into(),
                    vec![cx.term(
                        "E",
                        &[(0, rg(0, t5)), (2, lv(&[1])), (3, lv(&[0])), (4, lv(&[0]))],
                    )],
                    family_leaf(ens, "H2")?,
                ),
            ],
            ("M5,10".into(), family_leaf(ens, "H5")?),
        )
    };
    let root_measures = block_pairings(&ctx, &specs, &leaf, 0)?;
    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-8".into(),
        dims: dims.to_vec(),
        layout,
        root: chain_attach(resources, root_measures),
        recovery: vec![],
        notes,
    })
}

/// Three GHZ states, each shared between one upstream party and D, E.
pub(crate) fn build_thm9(dims: [usize; 5], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, d3, d4, d5] = dims;
    let (t4, t5) = (d4 - 1, d5 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    let mut resources = Vec::new();
    let mut tied = Vec::new();
    for p in ["A", "B", "C"] {
        let (r, w) = ctx.attach(ResourceKind::Ghz3, &[p, "D", "E"])?;
        resources.push(r);
        tied.push(w);
    }
    let specs = vec![
        ("M1", "A", d1 - 1, tied[0].clone()),
        ("M2", "B", d2 - 1, tied[1].clone()),
        ("M3", "C", d3 - 1, tied[2].clone()),
    ];
    let leaf = |cx: &Ctx| -> Result<Step> {
        let m5 = measure_with_remainder(
            cx,
            "D",
            "M5",
            vec![
                (
                    "M5,1".into(),
                    vec![cx.term(
                        "D",
                        &[(0, rg(1, t4)), (1, lv(&[1])), (2, lv(&[1])), (3, lv(&[0]))],
                    )],
                    family_leaf(ens, "H10")?,
                ),
                (
                    "M5,2".into(),
                    vec![cx.term(
                        "D",
                        &[(0, rg(1, t4)), (1, lv(&[1])), (2, lv(&[0])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H8")?,
                ),
                (
                    "M5,3".into(),
                    vec![cx.term("D", &[(0, lv(&[0])), (3, lv(&[1]))])],
                    family_leaf(ens, "H1")?,
                ),
                (
                    "M5,4".into(),
                    vec![cx.term("D", &[(0, lv(&[0])), (2, lv(&[1])), (3, lv(&[0]))])],
                    family_leaf(ens, "H2")?,
                ),
            ],
            (
                "M5,5".into(),
                split2(
                    cx,
                    "S1",
                    "E",
                    0,
                    &lv(&[0]),
                    family_leaf(ens, "H5")?,
                    family_leaf(ens, "H7")?,
                ),
            ),
        )?;
        measure_with_remainder(
            cx,
            "E",
            "M4",
            vec![
                (
                    "M4,1".into(),
                    vec![cx.term(
                        "E",
                        &[(0, rg(0, t5)), (1, lv(&[1])), (2, lv(&[0])), (3, lv(&[0]))],
                    )],
                    family_leaf(ens, "H3")?,
                ),
                (
                    "M4,2".into(),
                    vec![cx.term(
                        "E",
                        &[(0, lv(&[1])), (1, lv(&[1])), (2, lv(&[0])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H6")?,
                ),
                (
                    "M4,3".into(),
                    vec![cx.term(
                        "E",
                        &[(0, rg(1, t5)), (1, lv(&[0])), (2, lv(&[1])), (3, lv(&[1]))],
                    )],
                    family_leaf(ens, "H9")?,
                ),
                (
                    "M4,4".into(),
                    vec![cx.term("E", &[(0, rg(1, t5)), (1, lv(&[0])), (2, lv(&[0]))])],
                    family_leaf(ens, "H4")?,
                ),
            ],
            ("M4,5".into(), m5),
        )
    };
    let root_measures = block_pairings(&ctx, &specs, &leaf, 0)?;
    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-9".into(),
        dims: dims.to_vec(),
        layout,
        root: chain_attach(resources, root_measures),
        recovery: vec![],
        notes,
    })
}

/// Two four-party GHZ-type states, shared by A and B with C, D, E.
pub(crate) fn build_thm10(dims: [usize; 5], ens: &Ensemble) -> Result<ProtocolTree> {
    let [d1, d2, _d3, d4, d5] = dims;
    let (t4, t5) = (d4 - 1, d5 - 1);
    let layout = ens.layout.clone();
    let mut ctx = Ctx::new(layout.clone());
    let mut resources = Vec::new();
    let mut tied = Vec::new();
    for p in ["A", "B"] {
        let (r, w) = ctx.attach(ResourceKind::F4, &[p, "C", "D", "E"])?;
        resources.push(r);
        tied.push(w);
    }
    let specs = vec![
        ("M1", "A", d1 - 1, tied[0].clone()),
        ("M2", "B", d2 - 1, tied[1].clone()),
    ];
    let leaf = |cx: &Ctx| -> Result<Step> {
        let m7 = measure_with_remainder(
            cx,
            "D",
            "M7",
            vec![(
                "M7,1".into(),
                vec![cx.term("D", &[(0, lv(&[0]))])],
                family_leaf(ens, "H1")?,
            )],
            ("M7,2".into(), family_leaf(ens, "H8")?),
        )?;
        let m6 = measure_with_remainder(
            cx,
            "E",
            "M6",
            vec![
                (
                    "M6,1".into(),
                    vec![cx.term("E", &[(0, rg(1, t5)), (1, lv(&[1])), (2, lv(&[0]))])],
                    family_leaf(ens, "H6")?,
                ),
                (
                    "M6,2".into(),
                    vec![cx.term("E", &[(0, rg(1, t5)), (1, lv(&[0])), (2, lv(&[1]))])],
                    family_leaf(ens, "H9")?,
                ),
            ],
            ("M6,3".into(), m7),
        )?;
        let m5 = measure_with_remainder(
            cx,
            "C",
            "M5",
            vec![
                (
                    "M5,1".into(),
                    vec![cx.term("C", &[(0, lv(&[0])), (2, lv(&[1]))])],
                    family_leaf(ens, "H2")?,
                ),
                (
                    "M5,2".into(),
                    vec![cx.term("C", &[(0, lv(&[0])), (1, lv(&[1])), (2, lv(&[0]))])],
                    family_leaf(ens, "H3")?,
                ),
            ],
            ("M5,3".into(), m6),
        )?;
        let m4 = measure_with_remainder(
            cx,
            "D",
            "M4",
            vec![
                (
                    "M4,1".into(),
                    vec![cx.term("D", &[(0, rg(1, t4)), (1, lv(&[0]))])],
                    split2(
                        cx,
                        "S1",
                        "E",
                        0,
                        &lv(&[0]),
                        family_leaf(ens, "H5")?,
                        family_leaf(ens, "H7")?,
                    ),
                ),
                (
                    "M4,2".into(),
                    vec![cx.term("D", &[(0, rg(1, t4)), (1, lv(&[1])), (2, lv(&[1]))])],
                    family_leaf(ens, "H10")?,
                ),
            ],
            ("M4,3".into(), m5),
        )?;
        measure_with_remainder(
            cx,
            "E",
            "M3",
            vec![(
                "M3,1".into(),
                vec![cx.term("E", &[(0, rg(1, t5)), (1, lv(&[0])), (2, lv(&[0]))])],
                family_leaf(ens, "H4")?,
            )],
            ("M3,2".into(), m4),
        )
    };
    let root_measures = block_pairings(&ctx, &specs, &leaf, 0)?;
    let mut notes = Vec::new();
    note_splits(&mut notes);
    Ok(ProtocolTree {
        name: "theorem-10".into(),
        dims: dims.to_vec(),
        layout,
        root: chain_attach(resources, root_measures),
        recovery: vec![],
        notes,
    })
}

//! Protocol intermediate representation.
//!
//! A protocol is a rooted tree of steps: attach an entanglement resource,
//! perform a local projective measurement (branching on outcomes), apply a
//! CNOT, teleport a subsystem, or finish with a verdict. Projectors are
//! sums of computational-basis subset terms, all addressing wires of a
//! single party. Trees are immutable after construction and serialize to
//! JSON; that JSON is the interchange format the CLI accepts for
//! user-supplied protocols.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{LocalVector, SparseState, SystemLayout};

type C64 = Complex64;

/// Entanglement resource kinds: maximally entangled pairs of any local
/// dimension, three-party GHZ states, and four-party GHZ-type states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResourceKind {
    Epr(usize),
    Ghz3,
    F4,
}

impl ResourceKind {
    pub fn arity(&self) -> usize {
        match self {
            ResourceKind::Epr(_) => 2,
            ResourceKind::Ghz3 => 3,
            ResourceKind::F4 => 4,
        }
    }

    pub fn wire_dim(&self) -> usize {
        match self {
            ResourceKind::Epr(d) => *d,
            ResourceKind::Ghz3 | ResourceKind::F4 => 2,
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceKind::Epr(d) => write!(f, "EPR({d})"),
            ResourceKind::Ghz3 => write!(f, "GHZ3"),
            ResourceKind::F4 => write!(f, "F4"),
        }
    }
}

/// A resource plus the parties that hold its wires. Each holder receives
/// one fresh ancilla wire when the resource is attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub kind: ResourceKind,
    pub holders: Vec<String>,
}

impl Resource {
    pub fn new(kind: ResourceKind, holders: &[&str]) -> Result<Self> {
        let holders: Vec<String> = holders.iter().map(|s| s.to_string()).collect();
        if holders.len() != kind.arity() {
            return Err(Error::structural(format!(
                "{kind} takes {} holders, got {}",
                kind.arity(),
                holders.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for h in &holders {
            if !seen.insert(h.clone()) {
                return Err(Error::structural(format!("duplicate resource holder {h}")));
            }
        }
        Ok(Resource { kind, holders })
    }

    /// Normalized amplitude terms over the holder wires, in holder order.
    pub fn state_terms(&self) -> Vec<(Vec<u8>, C64)> {
        let (levels, arity): (Vec<u8>, usize) = match self.kind {
            ResourceKind::Epr(d) => ((0..d as u8).collect(), 2),
            ResourceKind::Ghz3 => (vec![0, 1], 3),
            ResourceKind::F4 => (vec![0, 1], 4),
        };
        let amp = 1.0 / (levels.len() as f64).sqrt();
        levels
            .into_iter()
            .map(|l| (vec![l; arity], C64::new(amp, 0.0)))
            .collect()
    }

    /// Stable tally key, e.g. `EPR(2) A-C`.
    pub fn key(&self) -> String {
        format!("{} {}", self.kind, self.holders.join("-"))
    }
}

/// Ebit valuation for the resources whose ebit content is a modeling
/// choice rather than `log2 d`. Copy counts are always reported raw.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Valuation {
    pub ghz3_ebits: f64,
    pub f4_ebits: f64,
}

impl Default for Valuation {
    fn default() -> Self {
        Valuation {
            ghz3_ebits: 1.0,
            f4_ebits: 1.0,
        }
    }
}

/// Ebit value of one copy of a resource under `valuation`.
pub fn ebits(kind: ResourceKind, valuation: &Valuation) -> f64 {
    match kind {
        ResourceKind::Epr(d) => (d as f64).log2(),
        ResourceKind::Ghz3 => valuation.ghz3_ebits,
        ResourceKind::F4 => valuation.f4_ebits,
    }
}

/// The resource's state on a standalone layout whose parties are the
/// holders, each carrying one wire of the resource.
pub fn build_resource_state(r: &Resource) -> Result<SparseState> {
    let dim = r.kind.wire_dim();
    let spec: Vec<(&str, usize)> = r.holders.iter().map(|h| (h.as_str(), dim)).collect();
    let layout = SystemLayout::main_only(&spec)?;
    SparseState::from_terms(
        layout,
        r.state_terms()
            .into_iter()
            .map(|(v, a)| (crate::qstate::BasisIndex(v), a)),
    )
}

/// One computational-basis box on a single party: allowed level subsets
/// per wire; wires not mentioned are unconstrained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryTerm {
    pub wires: BTreeMap<usize, BTreeSet<u8>>,
}

/// Sum of pairwise-disjoint elementary terms, local to one party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projector {
    pub party: String,
    pub terms: Vec<ElementaryTerm>,
}

/// One resolved term: flat wire positions with level membership masks.
pub(crate) type ResolvedTerm = Vec<(usize, Vec<bool>)>;

impl Projector {
    /// Resolve wire references against a layout into flat positions with
    /// level membership masks.
    pub(crate) fn resolve(&self, layout: &SystemLayout) -> Result<Vec<ResolvedTerm>> {
        let party = layout.party_index(&self.party)?;
        let dims = layout.flat_dims();
        self.terms
            .iter()
            .map(|term| {
                term.wires
                    .iter()
                    .map(|(wire, levels)| {
                        let pos = layout.position(party, *wire)?;
                        let mut mask = vec![false; dims[pos]];
                        for &l in levels {
                            if (l as usize) >= dims[pos] {
                                return Err(Error::structural(format!(
                                    "projector level {l} out of range on {}.{wire}",
                                    self.party
                                )));
                            }
                            mask[l as usize] = true;
                        }
                        Ok((pos, mask))
                    })
                    .collect()
            })
            .collect()
    }

    /// Apply to a state; returns the unnormalized projected state and the
    /// relative outcome probability.
    pub fn apply(&self, s: &SparseState) -> Result<(SparseState, f64)> {
        s.apply_projector(self)
    }
}

/// A complete local measurement: ordered outcome labels with projectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub outcomes: Vec<(String, Projector)>,
}

/// Reference to one wire: party name plus wire index within that party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRef {
    pub party: String,
    pub wire: usize,
}

impl WireRef {
    pub fn new(party: &str, wire: usize) -> Self {
        WireRef {
            party: party.to_string(),
            wire,
        }
    }
}

impl fmt::Display for WireRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.party, self.wire)
    }
}

/// One-round product measurement plan: per party, an orthogonal family of
/// local vectors over that party's composite local space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinisherPlan {
    pub parties: Vec<PartyPlan>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartyPlan {
    pub party: String,
    pub vectors: Vec<LocalVector>,
}

/// Leaf verdicts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Verdict {
    /// Exactly one candidate can reach this leaf.
    Identified(String),
    /// Exactly two orthogonal candidates remain; the two-orthogonal-states
    /// oracle finishes the discrimination at zero entanglement cost.
    TerminalPair {
        labels: [String; 2],
        justification: String,
    },
    /// The surviving candidates all belong to the named families, whose
    /// as-constructed members are product states separable by `finisher`.
    TerminalSubset {
        families: Vec<String>,
        finisher: FinisherPlan,
    },
}

impl Verdict {
    pub fn summary(&self) -> String {
        match self {
            Verdict::Identified(l) => format!("identified {l}"),
            Verdict::TerminalPair { labels, .. } => {
                format!("terminal pair {{{}, {}}}", labels[0], labels[1])
            }
            Verdict::TerminalSubset { families, .. } => {
                format!("terminal subset {}", families.join("|"))
            }
        }
    }
}

/// Protocol steps. `Measure` children are keyed by position: child `k`
/// follows outcome `k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Attach {
        resource: Resource,
        next: Box<Step>,
    },
    Measure {
        party: String,
        measurement: Measurement,
        children: Vec<Step>,
    },
    Cnot {
        ctrl: WireRef,
        tgt: WireRef,
        next: Box<Step>,
    },
    Teleport {
        src: String,
        dst: String,
        dim: usize,
        next: Box<Step>,
    },
    Finish {
        verdict: Verdict,
    },
}

/// A full protocol: initial main-wire layout plus the step tree. The
/// `recovery` list names CNOTs that undo the tree's gate deformations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolTree {
    pub name: String,
    pub dims: Vec<usize>,
    pub layout: SystemLayout,
    pub root: Step,
    #[serde(default)]
    pub recovery: Vec<(WireRef, WireRef)>,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// Expected or simulated resource consumption: per-(kind, holders) copy
/// counts. Values are expectations, so fractional copies are legal.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostTally {
    pub entries: BTreeMap<String, CostEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub kind: ResourceKind,
    pub holders: Vec<String>,
    pub copies: f64,
}

impl CostTally {
    pub fn add(&mut self, kind: ResourceKind, holders: &[String], copies: f64) {
        let key = format!("{kind} {}", holders.join("-"));
        self.entries
            .entry(key)
            .and_modify(|e| e.copies += copies)
            .or_insert(CostEntry {
                kind,
                holders: holders.to_vec(),
                copies,
            });
    }

    pub fn add_resource(&mut self, r: &Resource, copies: f64) {
        self.add(r.kind, &r.holders, copies);
    }

    pub fn merge_scaled(&mut self, other: &CostTally, weight: f64) {
        for e in other.entries.values() {
            self.add(e.kind, &e.holders, e.copies * weight);
        }
    }

    pub fn ebit_total(&self, valuation: &Valuation) -> f64 {
        self.entries
            .values()
            .map(|e| e.copies * ebits(e.kind, valuation))
            .sum()
    }

    /// Largest per-entry copy-count difference, counting entries missing on
    /// either side at their full weight.
    pub fn max_copy_delta(&self, other: &CostTally) -> f64 {
        let mut keys: BTreeSet<&String> = self.entries.keys().collect();
        keys.extend(other.entries.keys());
        keys.into_iter()
            .map(|k| {
                let a = self.entries.get(k).map_or(0.0, |e| e.copies);
                let b = other.entries.get(k).map_or(0.0, |e| e.copies);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Exact subsystem relocation; the entanglement cost (`log2 d` for the
/// implicit `EPR(d)`) is accounted by the engine, not here.
pub fn apply_teleport(s: &SparseState, src: &str, dst: &str, dim: usize) -> Result<SparseState> {
    let src_idx = s.layout().party_index(src)?;
    let dst_idx = s.layout().party_index(dst)?;
    if s.layout().party(src_idx).main_dim != dim {
        return Err(Error::structural(format!(
            "teleport dimension {dim} does not match {src}'s main wire"
        )));
    }
    s.relocate_main_wire(src_idx, dst_idx)
}

/// One structural violation found by [`validate`].
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub path: String,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub measurements_checked: usize,
    /// Worst completeness defect over all measurements (exact set check;
    /// any uncovered or doubly covered cell counts as 1).
    pub max_completeness_defect: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural validation: measurement completeness on the touched wires,
/// single-party locality, wires attached before use, qubit CNOT wires,
/// distinct teleport endpoints, and leaf well-formedness.
pub fn validate(tree: &ProtocolTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    walk(&tree.root, &tree.layout, "root", &mut report);
    report
}

fn violation(report: &mut ValidationReport, path: &str, kind: &str, message: String) {
    report.violations.push(Violation {
        path: path.to_string(),
        kind: kind.to_string(),
        message,
    });
}

fn walk(step: &Step, layout: &SystemLayout, path: &str, report: &mut ValidationReport) {
    match step {
        Step::Attach { resource, next } => {
            let mut next_layout = layout.clone();
            if resource.holders.len() != resource.kind.arity() {
                violation(
                    report,
                    path,
                    "resource-arity",
                    format!("{} holders for {}", resource.holders.len(), resource.kind),
                );
            }
            for h in &resource.holders {
                match layout.party_index(h) {
                    Ok(idx) => {
                        let (l, _) = next_layout.with_ancilla(
                            next_layout.party_index(h).unwrap_or(idx),
                            resource.kind.wire_dim(),
                        );
                        next_layout = l;
                    }
                    Err(_) => violation(
                        report,
                        path,
                        "unknown-party",
                        format!("attach references unknown party {h}"),
                    ),
                }
            }
            walk(
                next,
                &next_layout,
                &format!("{path}/attach[{}]", resource.key()),
                report,
            );
        }
        Step::Measure {
            party,
            measurement,
            children,
        } => {
            report.measurements_checked += 1;
            let mpath = format!("{path}/{}", measurement.name);
            if children.len() != measurement.outcomes.len() {
                violation(
                    report,
                    &mpath,
                    "outcome-coverage",
                    format!(
                        "{} children for {} outcomes",
                        children.len(),
                        measurement.outcomes.len()
                    ),
                );
            }
            if measurement.outcomes.is_empty() {
                violation(
                    report,
                    &mpath,
                    "empty-measurement",
                    "measurement has no outcomes".into(),
                );
            }
            let party_idx = match layout.party_index(party) {
                Ok(i) => Some(i),
                Err(_) => {
                    violation(
                        report,
                        &mpath,
                        "unknown-party",
                        format!("measurement on unknown party {party}"),
                    );
                    None
                }
            };
            for (label, proj) in &measurement.outcomes {
                if proj.party != *party {
                    violation(report, &mpath, "locality", format!(
                        "outcome {label} places a term on {} but the measurement is performed by {party}",
                        proj.party
                    ));
                }
            }
            if let Some(pidx) = party_idx {
                check_completeness(layout, pidx, measurement, &mpath, report);
            }
            for ((label, _), child) in measurement.outcomes.iter().zip(children) {
                walk(child, layout, &format!("{mpath}={label}"), report);
            }
        }
        Step::Cnot { ctrl, tgt, next } => {
            for w in [ctrl, tgt] {
                match layout.party_index(&w.party) {
                    Ok(p) => match layout.party(p).wire_dim(w.wire) {
                        Some(2) => {}
                        Some(d) => violation(
                            report,
                            path,
                            "non-qubit-cnot",
                            format!("cnot wire {w} has dimension {d}"),
                        ),
                        None => violation(
                            report,
                            path,
                            "unattached-wire",
                            format!("cnot references missing wire {w}"),
                        ),
                    },
                    Err(_) => violation(
                        report,
                        path,
                        "unknown-party",
                        format!("cnot references unknown party {}", w.party),
                    ),
                }
            }
            if ctrl == tgt {
                violation(
                    report,
                    path,
                    "cnot-self",
                    "cnot control equals target".into(),
                );
            }
            walk(next, layout, &format!("{path}/cnot[{ctrl}>{tgt}]"), report);
        }
        Step::Teleport {
            src,
            dst,
            dim,
            next,
        } => {
            if src == dst {
                violation(
                    report,
                    path,
                    "teleport-self",
                    "teleport source equals destination".into(),
                );
            }
            let mut next_layout = layout.clone();
            match (layout.party_index(src), layout.party_index(dst)) {
                (Ok(s), Ok(d)) => {
                    if layout.party(s).main_dim != *dim {
                        violation(
                            report,
                            path,
                            "teleport-dim",
                            format!("teleport dimension {dim} does not match {src}'s main wire"),
                        );
                    }
                    match layout.relocate_main(s, d) {
                        Ok((l, _, _)) => next_layout = l,
                        Err(e) => violation(report, path, "teleport", e.to_string()),
                    }
                }
                _ => violation(
                    report,
                    path,
                    "unknown-party",
                    format!("teleport references {src} or {dst} unknown"),
                ),
            }
            walk(
                next,
                &next_layout,
                &format!("{path}/teleport[{src}>{dst}]"),
                report,
            );
        }
        Step::Finish { verdict } => match verdict {
            Verdict::TerminalPair { labels, .. } => {
                if labels[0] == labels[1] {
                    violation(
                        report,
                        path,
                        "terminal-pair",
                        "terminal pair lists one label twice".into(),
                    );
                }
            }
            Verdict::TerminalSubset { families, .. } => {
                if families.is_empty() {
                    violation(
                        report,
                        path,
                        "terminal-subset",
                        "terminal subset names no family".into(),
                    );
                }
            }
            Verdict::Identified(_) => {}
        },
    }
}

/// Exact completeness and disjointness check over the measurement's
/// touched wires. Cell coverage is integral, so the completeness defect is
/// either exactly zero or at least one cell.
fn check_completeness(
    layout: &SystemLayout,
    party: usize,
    m: &Measurement,
    path: &str,
    report: &mut ValidationReport,
) {
    let decl = layout.party(party);
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for (label, proj) in &m.outcomes {
        if proj.party != decl.name {
            continue;
        }
        for term in &proj.terms {
            for (&wire, levels) in &term.wires {
                match decl.wire_dim(wire) {
                    Some(d) => {
                        if levels.iter().any(|&l| (l as usize) >= d) {
                            violation(
                                report,
                                path,
                                "level-range",
                                format!(
                                    "outcome {label} constrains wire {wire} beyond dimension {d}"
                                ),
                            );
                        }
                        touched.insert(wire);
                    }
                    None => violation(
                        report,
                        path,
                        "unattached-wire",
                        format!(
                            "outcome {label} touches wire {}.{wire} before it is attached",
                            decl.name
                        ),
                    ),
                }
            }
        }
    }
    if report
        .violations
        .iter()
        .any(|v| v.path == path && v.kind == "unattached-wire")
    {
        return;
    }
    let wires: Vec<usize> = touched.into_iter().collect();
    if wires.is_empty() {
        return;
    }
    let dims: Vec<usize> = wires.iter().map(|&w| decl.wire_dim(w).unwrap()).collect();
    let cells: usize = dims.iter().product();
    let mut cover = vec![0u32; cells];
    for (_, proj) in &m.outcomes {
        for term in &proj.terms {
            for (cell, count) in cover.iter_mut().enumerate() {
                let mut rem = cell;
                let mut ok = true;
                for (k, &w) in wires.iter().enumerate().rev() {
                    let level = (rem % dims[k]) as u8;
                    rem /= dims[k];
                    if let Some(levels) = term.wires.get(&w) {
                        if !levels.contains(&level) {
                            ok = false;
                        }
                    }
                }
                if ok {
                    *count += 1;
                }
            }
        }
    }
    let defect = cover.iter().filter(|&&c| c != 1).count();
    report.max_completeness_defect = report.max_completeness_defect.max(defect as f64);
    if defect > 0 {
        let over = cover.iter().filter(|&&c| c > 1).count();
        let kind = if over > 0 { "overlap" } else { "completeness" };
        violation(
            report,
            path,
            kind,
            format!(
                "{} of {} cells covered incorrectly ({} doubly covered)",
                defect, cells, over
            ),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ebit_values() {
        let v = Valuation::default();
        assert!((ebits(ResourceKind::Epr(2), &v) - 1.0).abs() < 1e-12);
        assert!((ebits(ResourceKind::Epr(3), &v) - 3f64.log2()).abs() < 1e-12);
        assert!((ebits(ResourceKind::Epr(4), &v) - 2.0).abs() < 1e-12);
        assert!((ebits(ResourceKind::Ghz3, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resource_states_are_normalized_and_correct() {
        let epr = Resource::new(ResourceKind::Epr(2), &["A", "B"]).unwrap();
        let s = build_resource_state(&epr).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!((s.amplitude(&[0, 0]).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.amplitude(&[1, 1]).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let g = Resource::new(ResourceKind::Ghz3, &["A", "B", "C"]).unwrap();
        let gs = build_resource_state(&g).unwrap();
        assert_eq!(gs.term_count(), 2);
        assert!((gs.amplitude(&[1, 1, 1]).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let f = Resource::new(ResourceKind::F4, &["A", "B", "C", "D"]).unwrap();
        assert!((build_resource_state(&f).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tally_accumulates_and_values() {
        let mut t = CostTally::default();
        let epr = Resource::new(ResourceKind::Epr(3), &["C", "D"]).unwrap();
        t.add_resource(&epr, 1.0);
        t.add_resource(&epr, 0.5);
        assert!((t.entries["EPR(3) C-D"].copies - 1.5).abs() < 1e-12);
        assert!((t.ebit_total(&Valuation::default()) - 1.5 * 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn teleport_moves_wire_and_preserves_overlaps() {
        let layout = SystemLayout::main_only(&[("A", 3), ("B", 3), ("C", 3), ("D", 3)]).unwrap();
        let s = SparseState::basis_state(layout, &[0, 1, 2, 1]).unwrap();
        let t = apply_teleport(&s, "D", "C", 3).unwrap();
        assert_eq!(t.layout().parties()[2].name, "C~");
        assert_eq!(t.layout().parties().len(), 3);
        assert_eq!(t.amplitude(&[0, 1, 2, 1]), C64::new(1.0, 0.0));
        assert!(matches!(
            apply_teleport(&s, "D", "C", 2),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn teleport_preserves_all_pairwise_inner_products() {
        let ens = crate::ensembles::ops_asym4([3, 3, 3, 3]).unwrap();
        let moved: Vec<SparseState> = ens
            .members
            .iter()
            .map(|m| apply_teleport(&m.state, "D", "C", 3).unwrap())
            .collect();
        for i in 0..ens.len() {
            for j in i..ens.len() {
                let before = ens.members[i]
                    .state
                    .inner_product(&ens.members[j].state)
                    .unwrap();
                let after = moved[i].inner_product(&moved[j]).unwrap();
                assert!((before - after).norm() < 1e-12, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn epr_ebits_are_monotone_in_dimension() {
        let v = Valuation::default();
        let mut last = 0.0;
        for d in 2..=16 {
            let e = ebits(ResourceKind::Epr(d), &v);
            assert!(e > last);
            last = e;
        }
    }
}

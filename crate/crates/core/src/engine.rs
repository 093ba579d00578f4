//! Protocol execution and verification.
//!
//! [`run`] drives a [`ProtocolTree`] against an [`Ensemble`]: a
//! depth-first traversal per member collects every root-to-leaf path with
//! its exact probability and resource tally, and a joint traversal checks
//! what the paths cannot see in isolation — orthogonality preservation at
//! every measurement outcome and the soundness of every leaf verdict
//! against the set of candidates that actually survive there.
//!
//! Traversal is pure per member; the member loop is the parallelism unit
//! (rayon), and reports are merged in label order so identical inputs
//! produce identical reports.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{Ensemble, LabeledState};
use crate::error::{Error, Result};
use crate::protocol::{
    validate, CostTally, FinisherPlan, PartyPlan, ProtocolTree, Resource, Step, Valuation, Verdict,
    WireRef,
};
use crate::qstate::{LocalVector, SparseState};

/// Outcome branches with probability below this are not traversed;
/// exact-zero branches dominate and the tolerance guards float noise.
pub const BRANCH_PRUNE_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct EngineOpts {
    pub ortho_tol: f64,
    pub valuation: Valuation,
}

impl Default for EngineOpts {
    fn default() -> Self {
        EngineOpts {
            ortho_tol: 1e-10,
            valuation: Valuation::default(),
        }
    }
}

/// One root-to-leaf path taken by a member.
#[derive(Clone, Debug, Serialize)]
pub struct PathEntry {
    pub transcript: Vec<String>,
    pub probability: f64,
    pub verdict: String,
    pub cost: CostTally,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberReport {
    pub label: String,
    pub prior: f64,
    pub total_probability: f64,
    pub paths: Vec<PathEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthoViolation {
    pub node: String,
    pub pair: (String, String),
    pub overlap: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OrthoLog {
    pub checks: usize,
    pub max_overlap: f64,
    pub violations: Vec<OrthoViolation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub protocol: String,
    pub ensemble: String,
    pub dims: Vec<usize>,
    pub members: Vec<MemberReport>,
    pub expected_cost: CostTally,
    pub expected_ebits: f64,
    pub ortho: OrthoLog,
    pub failures: Vec<String>,
    pub success: bool,
    pub notes: Vec<String>,
}

fn uniform_prior(e: &Ensemble) -> BTreeMap<String, f64> {
    let w = 1.0 / e.len() as f64;
    e.members.iter().map(|m| (m.label.to_string(), w)).collect()
}

fn normalize_prior(
    e: &Ensemble,
    prior: Option<&BTreeMap<String, f64>>,
) -> Result<BTreeMap<String, f64>> {
    match prior {
        None => Ok(uniform_prior(e)),
        Some(p) => {
            let mut out = BTreeMap::new();
            let mut total = 0.0;
            for m in &e.members {
                let label = m.label.to_string();
                // members absent from the prior file carry zero weight
                let w = p.get(&label).copied().unwrap_or(0.0);
                if w < 0.0 {
                    return Err(Error::domain(format!("negative prior weight for {label}")));
                }
                total += w;
                out.insert(label, w);
            }
            for k in p.keys() {
                if !out.contains_key(k) {
                    return Err(Error::domain(format!("prior names unknown member {k}")));
                }
            }
            if total <= 0.0 {
                return Err(Error::degenerate("prior has zero total weight"));
            }
            for w in out.values_mut() {
                *w /= total;
            }
            Ok(out)
        }
    }
}

fn attach_resource(state: &SparseState, r: &Resource) -> Result<SparseState> {
    let holders: Vec<(usize, usize)> = r
        .holders
        .iter()
        .map(|h| Ok((state.layout().party_index(h)?, r.kind.wire_dim())))
        .collect::<Result<_>>()?;
    state.attach_ancillas(&holders, &r.state_terms())
}

fn apply_gate_step(state: &SparseState, step: &Step) -> Result<SparseState> {
    match step {
        Step::Attach { resource, .. } => attach_resource(state, resource),
        Step::Cnot { ctrl, tgt, .. } => {
            let c = (state.layout().party_index(&ctrl.party)?, ctrl.wire);
            let t = (state.layout().party_index(&tgt.party)?, tgt.wire);
            state.apply_cnot(c, t)
        }
        Step::Teleport { src, dst, dim, .. } => {
            crate::protocol::apply_teleport(state, src, dst, *dim)
        }
        _ => Err(Error::structural("not a gate step")),
    }
}

fn step_marker(step: &Step) -> Option<String> {
    match step {
        Step::Attach { resource, .. } => Some(format!("attach {}", resource.key())),
        Step::Cnot { ctrl, tgt, .. } => Some(format!("cnot {ctrl}>{tgt}")),
        Step::Teleport { src, dst, .. } => Some(format!("teleport {src}>{dst}")),
        _ => None,
    }
}

fn member_walk(
    step: &Step,
    state: SparseState,
    transcript: Vec<String>,
    mut cost: CostTally,
    out: &mut Vec<PathEntry>,
) -> Result<()> {
    match step {
        Step::Attach { resource, next } => {
            let s = attach_resource(&state, resource)?;
            cost.add_resource(resource, 1.0);
            let mut t = transcript;
            t.push(step_marker(step).unwrap());
            member_walk(next, s, t, cost, out)
        }
        Step::Teleport {
            src,
            dst,
            dim,
            next,
        } => {
            let s = apply_gate_step(&state, step)?;
            let mut holders = [src.clone(), dst.clone()];
            holders.sort();
            cost.add(crate::protocol::ResourceKind::Epr(*dim), &holders, 1.0);
            let mut t = transcript;
            t.push(step_marker(step).unwrap());
            member_walk(next, s, t, cost, out)
        }
        Step::Cnot { next, .. } => {
            let s = apply_gate_step(&state, step)?;
            let mut t = transcript;
            t.push(step_marker(step).unwrap());
            member_walk(next, s, t, cost, out)
        }
        Step::Measure {
            measurement,
            children,
            ..
        } => {
            for ((label, proj), child) in measurement.outcomes.iter().zip(children) {
                let (post, _) = state.apply_projector(proj)?;
                if post.norm_sqr() < BRANCH_PRUNE_TOL {
                    continue;
                }
                let mut t = transcript.clone();
                t.push(label.clone());
                member_walk(child, post, t, cost.clone(), out)?;
            }
            Ok(())
        }
        Step::Finish { verdict } => {
            out.push(PathEntry {
                transcript,
                probability: state.norm_sqr(),
                verdict: verdict.summary(),
                cost,
            });
            Ok(())
        }
    }
}

struct JointCheck<'a> {
    ensemble: &'a Ensemble,
    ortho_tol: f64,
    ortho: OrthoLog,
    failures: Vec<String>,
    finisher_cache: BTreeMap<String, std::result::Result<(), String>>,
}

impl<'a> JointCheck<'a> {
    fn record_overlaps(&mut self, node: &str, members: &[(String, SparseState)]) {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let ov = members[i].1.overlap(&members[j].1).unwrap_or(f64::NAN);
                self.ortho.checks += 1;
                if ov.is_nan() || ov >= self.ortho_tol {
                    self.ortho.violations.push(OrthoViolation {
                        node: node.to_string(),
                        pair: (members[i].0.clone(), members[j].0.clone()),
                        overlap: ov,
                    });
                }
                if ov > self.ortho.max_overlap {
                    self.ortho.max_overlap = ov;
                }
            }
        }
    }

    fn walk(&mut self, step: &Step, members: Vec<(String, SparseState)>, node: String) {
        if members.is_empty() {
            return;
        }
        match step {
            Step::Attach { next, .. } | Step::Cnot { next, .. } | Step::Teleport { next, .. } => {
                let mut moved = Vec::with_capacity(members.len());
                for (label, s) in members {
                    match apply_gate_step(&s, step) {
                        Ok(ns) => moved.push((label, ns)),
                        Err(e) => self.failures.push(format!("{node}: {label}: {e}")),
                    }
                }
                let marker = step_marker(step).unwrap();
                self.walk(next, moved, format!("{node}/{marker}"));
            }
            Step::Measure {
                measurement,
                children,
                ..
            } => {
                for ((label, proj), child) in measurement.outcomes.iter().zip(children) {
                    let mut survivors = Vec::new();
                    for (mlabel, s) in &members {
                        match s.apply_projector(proj) {
                            Ok((post, _)) => {
                                if post.norm_sqr() >= BRANCH_PRUNE_TOL {
                                    survivors.push((mlabel.clone(), post));
                                }
                            }
                            Err(e) => self.failures.push(format!("{node}: {mlabel}: {e}")),
                        }
                    }
                    let child_node = format!("{node}/{label}");
                    self.record_overlaps(&child_node, &survivors);
                    self.walk(child, survivors, child_node);
                }
            }
            Step::Finish { verdict } => self.check_leaf(verdict, &members, &node),
        }
    }

    fn check_leaf(&mut self, verdict: &Verdict, members: &[(String, SparseState)], node: &str) {
        match verdict {
            Verdict::Identified(expected) => {
                for (label, _) in members {
                    if label != expected {
                        self.failures.push(format!(
                            "{node}: leaf claims {expected} but {label} survives"
                        ));
                    }
                }
            }
            Verdict::TerminalPair { labels, .. } => {
                let surviving: Vec<&String> = members.iter().map(|(l, _)| l).collect();
                for l in &surviving {
                    if !labels.contains(l) {
                        self.failures.push(format!(
                            "{node}: terminal pair {{{}, {}}} reached by {l}",
                            labels[0], labels[1]
                        ));
                    }
                }
                if members.len() != 2 {
                    self.failures.push(format!(
                        "{node}: terminal pair holds {} surviving candidates",
                        members.len()
                    ));
                } else {
                    let ov = members[0].1.overlap(&members[1].1).unwrap_or(f64::NAN);
                    if ov.is_nan() || ov >= self.ortho_tol {
                        self.failures
                            .push(format!("{node}: terminal pair candidates overlap {ov:.3e}"));
                    }
                }
            }
            Verdict::TerminalSubset { families, finisher } => {
                let allowed: BTreeSet<&str> = families.iter().map(|f| f.as_str()).collect();
                for (label, _) in members {
                    let family = self
                        .ensemble
                        .member(label)
                        .map(|m| m.label.family.clone())
                        .unwrap_or_default();
                    if !allowed.contains(family.as_str()) {
                        self.failures.push(format!(
                            "{node}: terminal subset {} reached by {label}",
                            families.join("|")
                        ));
                    }
                }
                let key = families.join("|");
                if !self.finisher_cache.contains_key(&key) {
                    let mut subset = Vec::new();
                    let mut missing = Vec::new();
                    for f in families {
                        let fam = self.ensemble.family_members(f);
                        if fam.is_empty() {
                            missing.push(f.clone());
                        }
                        subset.extend(fam);
                    }
                    let res = if !missing.is_empty() {
                        Err(format!("unknown families {}", missing.join("|")))
                    } else {
                        verify_finisher(finisher, &subset)
                    };
                    self.finisher_cache.insert(key.clone(), res);
                }
                if let Err(e) = &self.finisher_cache[&key] {
                    self.failures
                        .push(format!("{node}: finisher check failed: {e}"));
                }
            }
        }
    }
}

/// Execute the tree against the ensemble under a prior (uniform when
/// `None`). The returned report contains per-member path distributions,
/// the prior-weighted expected resource tally, the orthogonality
/// preservation log, and every verdict-soundness failure found.
pub fn run(
    tree: &ProtocolTree,
    ensemble: &Ensemble,
    prior: Option<&BTreeMap<String, f64>>,
    opts: &EngineOpts,
) -> Result<RunReport> {
    let vr = validate(tree);
    if !vr.is_valid() {
        let first = &vr.violations[0];
        return Err(Error::structural(format!(
            "tree rejected: {} violations, first at {}: {}",
            vr.violations.len(),
            first.path,
            first.message
        )));
    }
    if tree.layout.main_layout() != ensemble.layout.main_layout() {
        return Err(Error::structural(
            "tree layout does not match ensemble main wires",
        ));
    }
    let prior = normalize_prior(ensemble, prior)?;

    let mut members: Vec<MemberReport> = ensemble
        .members
        .par_iter()
        .map(|m| {
            let label = m.label.to_string();
            let mut paths = Vec::new();
            member_walk(
                &tree.root,
                m.state.clone(),
                Vec::new(),
                CostTally::default(),
                &mut paths,
            )
            .map(|_| {
                let total = paths.iter().map(|p| p.probability).sum();
                MemberReport {
                    prior: prior[&label],
                    label,
                    total_probability: total,
                    paths,
                }
            })
        })
        .collect::<Result<_>>()?;
    members.sort_by(|a, b| a.label.cmp(&b.label));

    let mut failures = Vec::new();
    for m in &members {
        if (m.total_probability - 1.0).abs() > 1e-10 {
            failures.push(format!(
                "member {}: path probabilities sum to {:.12} instead of 1",
                m.label, m.total_probability
            ));
        }
    }

    let mut joint = JointCheck {
        ensemble,
        ortho_tol: opts.ortho_tol,
        ortho: OrthoLog::default(),
        failures: Vec::new(),
        finisher_cache: BTreeMap::new(),
    };
    let initial: Vec<(String, SparseState)> = ensemble
        .members
        .iter()
        .map(|m| (m.label.to_string(), m.state.clone()))
        .collect();
    joint.walk(&tree.root, initial, String::new());
    failures.extend(joint.failures);

    let mut report = RunReport {
        protocol: tree.name.clone(),
        ensemble: ensemble.name.clone(),
        dims: tree.dims.clone(),
        members,
        expected_cost: CostTally::default(),
        expected_ebits: 0.0,
        ortho: joint.ortho,
        failures,
        success: false,
        notes: tree.notes.clone(),
    };
    report.expected_cost = expected_cost(&report);
    report.expected_ebits = report.expected_cost.ebit_total(&opts.valuation);
    report.success = report.failures.is_empty() && report.ortho.violations.is_empty();
    Ok(report)
}

/// Prior-weighted, path-probability-weighted sum of per-path tallies.
pub fn expected_cost(report: &RunReport) -> CostTally {
    let mut total = CostTally::default();
    for m in &report.members {
        for p in &m.paths {
            total.merge_scaled(&p.cost, m.prior * p.probability);
        }
    }
    total
}

/// Run only the orthogonality-preservation check: at every measurement
/// node and outcome, all pairs of surviving candidates must stay below
/// `tol` in normalized overlap.
pub fn check_orthogonality_preservation(
    tree: &ProtocolTree,
    ensemble: &Ensemble,
    tol: f64,
) -> Result<OrthoLog> {
    let mut joint = JointCheck {
        ensemble,
        ortho_tol: tol,
        ortho: OrthoLog::default(),
        failures: Vec::new(),
        finisher_cache: BTreeMap::new(),
    };
    let initial: Vec<(String, SparseState)> = ensemble
        .members
        .iter()
        .map(|m| (m.label.to_string(), m.state.clone()))
        .collect();
    joint.walk(&tree.root, initial, String::new());
    Ok(joint.ortho)
}

/// Why [`product_finisher`] declined to produce a plan.
#[derive(Clone, Debug, Serialize)]
pub struct FinisherRefusal {
    pub reason: String,
    pub offending_pair: Option<(String, String)>,
}

/// Build a one-round product measurement plan for a set of product states.
///
/// For each party the distinct local factors are collected; if every pair
/// of members has orthogonal factors at some party and each party's factor
/// family is pairwise orthogonal-or-equal, the plan measures each
/// discriminating party in its factor family and the outcome tuple
/// identifies the member. Otherwise the offending pair is reported.
pub fn product_finisher(
    members: &[&LabeledState],
) -> std::result::Result<FinisherPlan, FinisherRefusal> {
    const TOL: f64 = 1e-10;
    if members.len() <= 1 {
        return Ok(FinisherPlan {
            parties: Vec::new(),
        });
    }
    let layout = members[0].state.layout().clone();
    let n_parties = layout.parties().len();
    let mut factored: Vec<Vec<LocalVector>> = Vec::with_capacity(members.len());
    for m in members {
        match m.state.factor_by_party(TOL) {
            Some(f) => factored.push(f),
            None => {
                return Err(FinisherRefusal {
                    reason: format!("{} is not a product state across parties", m.label),
                    offending_pair: None,
                })
            }
        }
    }
    // Per party: distinct factor list and each member's factor id.
    let mut party_vectors: Vec<Vec<LocalVector>> = vec![Vec::new(); n_parties];
    let mut member_outcomes: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    for party in 0..n_parties {
        for (mi, f) in factored.iter().enumerate() {
            let v = &f[party];
            let mut found = None;
            for (vi, u) in party_vectors[party].iter().enumerate() {
                let ov = u.inner(v).norm();
                if ov > 1.0 - 1e-9 {
                    found = Some(vi);
                    break;
                } else if ov >= TOL {
                    return Err(FinisherRefusal {
                        reason: format!(
                            "factors at party {} are neither orthogonal nor equal (|<u|v>| = {ov:.3e})",
                            layout.parties()[party].name
                        ),
                        offending_pair: Some((
                            members[mi].label.to_string(),
                            // first member carrying vector vi
                            members
                                .iter()
                                .zip(&member_outcomes)
                                .find(|(_, outs)| outs.get(party) == Some(&vi))
                                .map(|(m, _)| m.label.to_string())
                                .unwrap_or_default(),
                        )),
                    });
                }
            }
            let id = match found {
                Some(vi) => vi,
                None => {
                    party_vectors[party].push(v.clone());
                    party_vectors[party].len() - 1
                }
            };
            member_outcomes[mi].push(id);
        }
    }
    // Every pair must be separated at some party.
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if member_outcomes[i] == member_outcomes[j] {
                return Err(FinisherRefusal {
                    reason: "no party separates the pair".into(),
                    offending_pair: Some((
                        members[i].label.to_string(),
                        members[j].label.to_string(),
                    )),
                });
            }
        }
    }
    let parties = (0..n_parties)
        .filter(|&p| party_vectors[p].len() > 1)
        .map(|p| PartyPlan {
            party: layout.parties()[p].name.clone(),
            vectors: party_vectors[p].clone(),
        })
        .collect();
    Ok(FinisherPlan { parties })
}

/// Simulate a finisher plan on a member set: each member must produce one
/// deterministic outcome per planned party and the outcome tuples must be
/// pairwise distinct.
pub fn verify_finisher(
    plan: &FinisherPlan,
    members: &[&LabeledState],
) -> std::result::Result<(), String> {
    if members.len() <= 1 {
        return Ok(());
    }
    let layout = members[0].state.layout();
    let mut tuples: BTreeMap<Vec<usize>, String> = BTreeMap::new();
    for m in members {
        let mut tuple = Vec::with_capacity(plan.parties.len());
        for pp in &plan.parties {
            let party = layout
                .party_index(&pp.party)
                .map_err(|e| format!("{}: {e}", m.label))?;
            let mut hit = None;
            for (vi, v) in pp.vectors.iter().enumerate() {
                let (_, prob) = m
                    .state
                    .project_party_vector(party, v)
                    .map_err(|e| format!("{}: {e}", m.label))?;
                if prob > 1.0 - 1e-9 {
                    hit = Some(vi);
                    break;
                } else if prob > 1e-9 {
                    return Err(format!(
                        "{}: outcome at party {} is probabilistic (p = {prob:.6})",
                        m.label, pp.party
                    ));
                }
            }
            match hit {
                Some(vi) => tuple.push(vi),
                None => {
                    return Err(format!(
                        "{}: no plan vector at party {} captures the factor",
                        m.label, pp.party
                    ))
                }
            }
        }
        if let Some(other) = tuples.insert(tuple, m.label.to_string()) {
            return Err(format!(
                "outcome tuple collision between {other} and {}",
                m.label
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub per_member: Vec<(String, f64)>,
    pub min_fidelity: f64,
    pub leaves_checked: usize,
    pub ok: bool,
}

/// Check the recovery annotation: at every leaf, re-applying the annotated
/// CNOT sequence followed by an X-basis collapse of the ancilla wires
/// (with the parity-conditioned Z on the CNOT target) restores the
/// original member exactly. Every ancilla outcome pattern is checked.
pub fn verify_recovery(tree: &ProtocolTree, ensemble: &Ensemble) -> Result<RecoveryReport> {
    if tree.recovery.is_empty() {
        return Err(Error::domain("tree carries no recovery annotation"));
    }
    let target: &WireRef = &tree.recovery[0].1;
    let originals: BTreeMap<String, &SparseState> = ensemble
        .members
        .iter()
        .map(|m| (m.label.to_string(), &m.state))
        .collect();
    let mut fidelities: BTreeMap<String, f64> = BTreeMap::new();
    let mut leaves = 0usize;
    collect_leaf_states(
        &tree.root,
        ensemble
            .members
            .iter()
            .map(|m| (m.label.to_string(), m.state.clone()))
            .collect(),
        &mut |members| {
            leaves += 1;
            for (label, state) in members {
                let mut s = state.clone();
                for (ctrl, tgt) in &tree.recovery {
                    let c = (s.layout().party_index(&ctrl.party).unwrap(), ctrl.wire);
                    let t = (s.layout().party_index(&tgt.party).unwrap(), tgt.wire);
                    s = s.apply_cnot(c, t).unwrap();
                }
                // every ancilla X-outcome pattern, with the parity fix
                let ancillas: Vec<(usize, usize)> = s
                    .layout()
                    .parties()
                    .iter()
                    .enumerate()
                    .flat_map(|(pi, p)| (1..p.wire_count()).map(move |w| (pi, w)))
                    .collect();
                let patterns = 1usize << ancillas.len();
                for pat in 0..patterns {
                    let mut reduced = s.clone();
                    let mut parity = 0u8;
                    // project highest wire index first so positions stay valid
                    for (k, &(pi, wi)) in ancillas.iter().enumerate().rev() {
                        let bit = ((pat >> k) & 1) as u8;
                        parity ^= bit;
                        reduced = reduced.project_out_qubit_x(pi, wi, bit).unwrap();
                    }
                    if parity == 1 {
                        let tp = reduced.layout().party_index(&target.party).unwrap();
                        reduced = reduced.apply_z(tp, target.wire).unwrap();
                    }
                    let reduced = match reduced.normalize() {
                        Ok(r) => r,
                        Err(_) => continue, // zero-weight pattern
                    };
                    let fid = reduced.overlap(originals[label]).unwrap_or(0.0);
                    let entry = fidelities.entry(label.clone()).or_insert(1.0);
                    if fid < *entry {
                        *entry = fid;
                    }
                }
            }
        },
    );
    let per_member: Vec<(String, f64)> = fidelities.into_iter().collect();
    let min_fidelity = per_member.iter().map(|(_, f)| *f).fold(1.0, f64::min);
    let ok = per_member.len() == ensemble.len() && min_fidelity >= 1.0 - 1e-10;
    Ok(RecoveryReport {
        per_member,
        min_fidelity,
        leaves_checked: leaves,
        ok,
    })
}

fn collect_leaf_states(
    step: &Step,
    members: Vec<(String, SparseState)>,
    f: &mut impl FnMut(&[(String, SparseState)]),
) {
    if members.is_empty() {
        return;
    }
    match step {
        Step::Attach { next, .. } | Step::Cnot { next, .. } | Step::Teleport { next, .. } => {
            let moved: Vec<(String, SparseState)> = members
                .into_iter()
                .filter_map(|(l, s)| apply_gate_step(&s, step).ok().map(|ns| (l, ns)))
                .collect();
            collect_leaf_states(next, moved, f);
        }
        Step::Measure {
            measurement,
            children,
            ..
        } => {
            for ((_, proj), child) in measurement.outcomes.iter().zip(children) {
                let survivors: Vec<(String, SparseState)> = members
                    .iter()
                    .filter_map(|(l, s)| {
                        let (post, _) = s.apply_projector(proj).ok()?;
                        (post.norm_sqr() >= BRANCH_PRUNE_TOL).then(|| (l.clone(), post))
                    })
                    .collect();
                collect_leaf_states(child, survivors, f);
            }
        }
        Step::Finish { .. } => f(&members),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{ghz_basis, Label};
    use crate::protocol::{ElementaryTerm, Measurement, Projector, ResourceKind};
    use crate::qstate::{BasisIndex, SystemLayout};
    use num_complex::Complex64 as C64;
    use std::collections::BTreeSet;

    fn level_proj(party: &str, wire: usize, levels: &[u8]) -> Projector {
        Projector {
            party: party.into(),
            terms: vec![ElementaryTerm {
                wires: [(wire, levels.iter().copied().collect::<BTreeSet<u8>>())]
                    .into_iter()
                    .collect(),
            }],
        }
    }

    fn two_state_ensemble() -> Ensemble {
        let layout = SystemLayout::main_only(&[("A", 2)]).unwrap();
        let mut e = Ensemble {
            name: "pair".into(),
            dims: vec![2],
            layout: layout.clone(),
            members: Vec::new(),
            families: BTreeMap::new(),
        };
        for (family, level) in [("Z0", 0u8), ("Z1", 1u8)] {
            let state = SparseState::basis_state(layout.clone(), &[level]).unwrap();
            e.members.push(LabeledState {
                label: Label::new(family, &[]),
                state,
            });
            e.families.insert(family.into(), vec![family.into()]);
        }
        e
    }

    fn splitting_tree() -> ProtocolTree {
        ProtocolTree {
            name: "split".into(),
            dims: vec![2],
            layout: SystemLayout::main_only(&[("A", 2)]).unwrap(),
            root: Step::Measure {
                party: "A".into(),
                measurement: Measurement {
                    name: "M1".into(),
                    outcomes: vec![
                        ("M1,1".into(), level_proj("A", 0, &[0])),
                        ("M1,2".into(), level_proj("A", 0, &[1])),
                    ],
                },
                children: vec![
                    Step::Finish {
                        verdict: Verdict::Identified("Z0".into()),
                    },
                    Step::Finish {
                        verdict: Verdict::Identified("Z1".into()),
                    },
                ],
            },
            recovery: Vec::new(),
            notes: Vec::new(),
        }
    }

    #[test]
    fn run_identifies_basis_states() {
        let e = two_state_ensemble();
        let t = splitting_tree();
        let r = run(&t, &e, None, &EngineOpts::default()).unwrap();
        assert!(r.success, "{:?}", r.failures);
        for m in &r.members {
            assert!((m.total_probability - 1.0).abs() < 1e-12);
            assert_eq!(m.paths.len(), 1);
        }
        assert!(r.expected_cost.is_empty());
    }

    #[test]
    fn truncated_tree_reports_discrimination_failure() {
        let e = two_state_ensemble();
        let mut t = splitting_tree();
        // collapse both outcomes into a single identity-like claim
        t.root = Step::Measure {
            party: "A".into(),
            measurement: Measurement {
                name: "M1".into(),
                outcomes: vec![("M1,1".into(), level_proj("A", 0, &[0, 1]))],
            },
            children: vec![Step::Finish {
                verdict: Verdict::Identified("Z0".into()),
            }],
        };
        let r = run(&t, &e, None, &EngineOpts::default()).unwrap();
        assert!(!r.success);
        assert!(r.failures.iter().any(|f| f.contains("Z1")));
    }

    #[test]
    fn invalid_tree_is_rejected_before_execution() {
        let e = two_state_ensemble();
        let mut t = splitting_tree();
        if let Step::Measure {
            measurement,
            children,
            ..
        } = &mut t.root
        {
            measurement.outcomes.pop();
            children.pop();
        }
        assert!(matches!(
            run(&t, &e, None, &EngineOpts::default()),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn prior_weighting_scales_expected_cost() {
        let e = two_state_ensemble();
        // attach an EPR only to exercise the tally
        let mut t = splitting_tree();
        let inner = t.root.clone();
        t.layout = SystemLayout::main_only(&[("A", 2), ("B", 2)]).unwrap();
        let e2 = {
            let mut e2 = e.clone();
            e2.layout = t.layout.clone();
            for m in &mut e2.members {
                let a = m.state.amplitude(&[0]);
                let b = m.state.amplitude(&[1]);
                e2_member_rebuild(m, &t.layout, a, b);
            }
            e2
        };
        t.root = Step::Attach {
            resource: Resource::new(ResourceKind::Epr(2), &["A", "B"]).unwrap(),
            next: Box::new(inner),
        };
        let prior: BTreeMap<String, f64> = [("Z0".to_string(), 3.0), ("Z1".to_string(), 1.0)]
            .into_iter()
            .collect();
        let r = run(&t, &e2, Some(&prior), &EngineOpts::default()).unwrap();
        let copies = r.expected_cost.entries["EPR(2) A-B"].copies;
        assert!((copies - 1.0).abs() < 1e-12);
        assert!((r.expected_ebits - 1.0).abs() < 1e-12);
        assert!((r.members.iter().map(|m| m.prior).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn e2_member_rebuild(m: &mut LabeledState, layout: &SystemLayout, a: C64, b: C64) {
        let mut terms = Vec::new();
        if a.norm() > 1e-14 {
            terms.push((BasisIndex(vec![0, 0]), a));
        }
        if b.norm() > 1e-14 {
            terms.push((BasisIndex(vec![1, 0]), b));
        }
        m.state = SparseState::from_terms(layout.clone(), terms).unwrap();
    }

    #[test]
    fn finisher_refuses_entangled_pair_and_accepts_singleton() {
        let e = ghz_basis(4).unwrap();
        let pair: Vec<&LabeledState> = vec![&e.members[0], &e.members[1]];
        let refusal = product_finisher(&pair).unwrap_err();
        assert!(refusal.reason.contains("not a product"));

        let single: Vec<&LabeledState> = vec![&e.members[0]];
        let plan = product_finisher(&single).unwrap();
        assert!(plan.parties.is_empty());
    }

    #[test]
    fn finisher_separates_fourier_indexed_family() {
        let e = crate::ensembles::ops_asym4([3, 3, 3, 3]).unwrap();
        let h1: Vec<&LabeledState> = e.family_members("H1");
        assert_eq!(h1.len(), 6);
        let plan = product_finisher(&h1).expect("plan for H1");
        // parties 3 and 4 discriminate (beta and alpha families)
        let names: Vec<&str> = plan.parties.iter().map(|p| p.party.as_str()).collect();
        assert_eq!(names, vec!["C", "D"]);
        verify_finisher(&plan, &h1).unwrap();
    }
}

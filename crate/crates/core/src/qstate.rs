//! Sparse multipartite pure states.
//!
//! A state lives on a [`SystemLayout`]: an ordered list of parties, each
//! owning a main wire plus zero or more ancilla wires acquired while a
//! protocol runs. Basis indices are flat level tuples, parties in layout
//! order and, within a party, the main wire first followed by ancillas in
//! attachment order. Amplitudes are kept in a `BTreeMap` so every
//! iteration order (and therefore every serialized artifact) is
//! deterministic.
//!
//! All operations are pure: they take states by reference and return new
//! states, so values can be shared freely across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::Projector;

pub type C64 = Complex64;

/// Stored amplitudes with magnitude below this are dropped after each
/// operation; keeps sparsity exact for root-of-unity amplitude sets.
pub const PRUNE_TOL: f64 = 1e-14;

/// One party: a main wire and its ancillas, in attachment order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyDecl {
    pub name: String,
    pub main_dim: usize,
    #[serde(default)]
    pub ancilla_dims: Vec<usize>,
}

impl PartyDecl {
    pub fn wire_count(&self) -> usize {
        1 + self.ancilla_dims.len()
    }

    pub fn wire_dim(&self, wire: usize) -> Option<usize> {
        if wire == 0 {
            Some(self.main_dim)
        } else {
            self.ancilla_dims.get(wire - 1).copied()
        }
    }

    /// Product of all wire dimensions owned by this party.
    pub fn local_dim(&self) -> usize {
        self.main_dim * self.ancilla_dims.iter().product::<usize>()
    }
}

/// Ordered registry of parties. Wire addressing `(party, wire)` is stable:
/// wire 0 is the main system, wires 1.. are ancillas in attachment order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemLayout {
    parties: Vec<PartyDecl>,
}

impl SystemLayout {
    pub fn new(parties: Vec<PartyDecl>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::structural("layout needs at least one party"));
        }
        for p in &parties {
            if p.main_dim < 2 || p.ancilla_dims.iter().any(|&d| d < 2) {
                return Err(Error::structural(format!(
                    "party {}: all wire dimensions must be >= 2",
                    p.name
                )));
            }
        }
        for (i, p) in parties.iter().enumerate() {
            if parties[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::structural(format!(
                    "duplicate party name {}",
                    p.name
                )));
            }
        }
        Ok(SystemLayout { parties })
    }

    /// Layout with only main wires, e.g. `main_only(&[("A", 3), ("B", 3)])`.
    pub fn main_only(spec: &[(&str, usize)]) -> Result<Self> {
        SystemLayout::new(
            spec.iter()
                .map(|&(name, dim)| PartyDecl {
                    name: name.to_string(),
                    main_dim: dim,
                    ancilla_dims: Vec::new(),
                })
                .collect(),
        )
    }

    pub fn parties(&self) -> &[PartyDecl] {
        &self.parties
    }

    pub fn party(&self, idx: usize) -> &PartyDecl {
        &self.parties[idx]
    }

    pub fn party_index(&self, name: &str) -> Result<usize> {
        self.parties
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::structural(format!("unknown party {name}")))
    }

    pub fn wire_count(&self) -> usize {
        self.parties.iter().map(|p| p.wire_count()).sum()
    }

    /// Dimensions of all wires in flat index order.
    pub fn flat_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.wire_count());
        for p in &self.parties {
            dims.push(p.main_dim);
            dims.extend_from_slice(&p.ancilla_dims);
        }
        dims
    }

    /// Flat position of `(party, wire)`.
    pub fn position(&self, party: usize, wire: usize) -> Result<usize> {
        if party >= self.parties.len() {
            return Err(Error::structural(format!(
                "party index {party} out of range"
            )));
        }
        if wire >= self.parties[party].wire_count() {
            return Err(Error::structural(format!(
                "party {} has no wire {wire}",
                self.parties[party].name
            )));
        }
        let offset: usize = self.parties[..party].iter().map(|p| p.wire_count()).sum();
        Ok(offset + wire)
    }

    /// Flat positions `(start, count)` of one party's wires.
    pub fn party_span(&self, party: usize) -> (usize, usize) {
        let start: usize = self.parties[..party].iter().map(|p| p.wire_count()).sum();
        (start, self.parties[party].wire_count())
    }

    /// New layout with an extra ancilla wire on `party`; returns the new
    /// wire's index within that party.
    pub fn with_ancilla(&self, party: usize, dim: usize) -> (SystemLayout, usize) {
        let mut parties = self.parties.clone();
        parties[party].ancilla_dims.push(dim);
        let wire = parties[party].ancilla_dims.len();
        (SystemLayout { parties }, wire)
    }

    /// The layout restricted to main wires.
    pub fn main_layout(&self) -> SystemLayout {
        SystemLayout {
            parties: self
                .parties
                .iter()
                .map(|p| PartyDecl {
                    name: p.name.clone(),
                    main_dim: p.main_dim,
                    ancilla_dims: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn is_main_only(&self) -> bool {
        self.parties.iter().all(|p| p.ancilla_dims.is_empty())
    }

    /// Relocate `src`'s main wire to `dst` as a new wire of `dst`; `src` is
    /// removed and `dst` is renamed `{dst}~`. Returns the new layout, the
    /// flat source position of each new flat position, and the new wire's
    /// index within the merged party.
    pub fn relocate_main(
        &self,
        src: usize,
        dst: usize,
    ) -> Result<(SystemLayout, Vec<usize>, usize)> {
        if src == dst {
            return Err(Error::structural(
                "teleport source and destination must differ",
            ));
        }
        if self.parties[src].wire_count() != 1 {
            return Err(Error::structural(format!(
                "teleport source {} still owns ancilla wires",
                self.parties[src].name
            )));
        }
        let src_pos = self.position(src, 0)?;
        let mut parties = Vec::new();
        // (old flat position) for each wire of the new layout, in order.
        let mut source_pos = Vec::new();
        for (i, p) in self.parties.iter().enumerate() {
            if i == src {
                continue;
            }
            let mut decl = p.clone();
            let (start, count) = self.party_span(i);
            let mut positions: Vec<usize> = (start..start + count).collect();
            if i == dst {
                decl.name = format!("{}~", decl.name);
                decl.ancilla_dims.push(self.parties[src].main_dim);
                positions.push(src_pos);
            }
            parties.push(decl);
            source_pos.extend(positions);
        }
        let new_layout = SystemLayout { parties };
        let dst_new = new_layout
            .parties
            .iter()
            .position(|p| p.name.ends_with('~'))
            .expect("renamed destination present");
        let wire = new_layout.parties[dst_new].wire_count() - 1;
        Ok((new_layout, source_pos, wire))
    }
}

/// Levels of every wire, in flat layout order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisIndex(pub Vec<u8>);

impl fmt::Debug for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        write!(f, ">")
    }
}

/// A single-system vector: `coeffs[level]` over one wire (or one party's
/// composite local space).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalVector {
    pub dim: usize,
    pub coeffs: Vec<C64>,
}

/// The four root-of-unity vector families used by the product-state sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FourierKind {
    Alpha,
    Beta,
    Gamma,
    Kappa,
}

impl LocalVector {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().all(|c| c.norm() < PRUNE_TOL) {
            return Err(Error::degenerate("local vector has no nonzero coefficient"));
        }
        Ok(LocalVector {
            dim: coeffs.len(),
            coeffs,
        })
    }

    pub fn basis(dim: usize, level: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        coeffs[level] = C64::new(1.0, 0.0);
        LocalVector { dim, coeffs }
    }

    /// Unnormalized superposition, e.g. `|0> + sign |d-1>`.
    pub fn two_level(dim: usize, a: usize, b: usize, sign: f64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        coeffs[a] = C64::new(1.0, 0.0);
        coeffs[b] = C64::new(sign, 0.0);
        LocalVector { dim, coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < PRUNE_TOL {
            return Err(Error::degenerate("cannot normalize zero local vector"));
        }
        Ok(LocalVector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c / n).collect(),
        })
    }

    pub fn inner(&self, other: &LocalVector) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// The `alpha`/`beta`/`gamma`/`kappa` families. Coefficients are the exact
/// roots of unity `exp(2 pi i k/n)`, computed from the reduced exponent so
/// phase error does not grow with the index. Returned unnormalized.
///
/// Index ranges: alpha `0..d`, beta and gamma `0..d-1`, kappa `0..d-2`.
pub fn local_fourier_vector(kind: FourierKind, d: usize, index: usize) -> Result<LocalVector> {
    if d < 2 {
        return Err(Error::domain("fourier vector needs dimension >= 2"));
    }
    let (denom, shift) = match kind {
        FourierKind::Alpha => (d, 0usize),
        FourierKind::Beta => (d - 1, 0),
        FourierKind::Gamma => (d - 1, 1),
        FourierKind::Kappa => {
            if d < 3 {
                return Err(Error::domain("kappa family needs dimension >= 3"));
            }
            (d - 2, 1)
        }
    };
    if index >= denom {
        return Err(Error::domain(format!(
            "{kind:?} index {index} out of range 0..{denom} at dimension {d}"
        )));
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); d];
    for u in 0..denom {
        let k = (index * u) % denom;
        let phase = 2.0 * std::f64::consts::PI * (k as f64) / (denom as f64);
        coeffs[u + shift] = C64::from_polar(1.0, phase);
    }
    Ok(LocalVector { dim: d, coeffs })
}

/// Sparse pure state: layout plus a map from basis index to amplitude.
#[derive(Clone, Debug)]
pub struct SparseState {
    layout: Arc<SystemLayout>,
    amps: BTreeMap<BasisIndex, C64>,
}

impl SparseState {
    fn prune(amps: &mut BTreeMap<BasisIndex, C64>) {
        amps.retain(|_, a| a.norm() >= PRUNE_TOL);
    }

    fn check_index(layout: &SystemLayout, idx: &BasisIndex) -> Result<()> {
        let dims = layout.flat_dims();
        if idx.0.len() != dims.len() {
            return Err(Error::structural(format!(
                "basis index length {} does not match wire count {}",
                idx.0.len(),
                dims.len()
            )));
        }
        for (l, d) in idx.0.iter().zip(&dims) {
            if (*l as usize) >= *d {
                return Err(Error::structural(format!(
                    "level {l} out of range for dimension {d}"
                )));
            }
        }
        Ok(())
    }

    /// Build a state from explicit terms; duplicate indices accumulate.
    pub fn from_terms(
        layout: SystemLayout,
        terms: impl IntoIterator<Item = (BasisIndex, C64)>,
    ) -> Result<Self> {
        let mut amps = BTreeMap::new();
        for (idx, amp) in terms {
            Self::check_index(&layout, &idx)?;
            *amps.entry(idx).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        Self::prune(&mut amps);
        if amps.is_empty() {
            return Err(Error::degenerate("state has no nonzero amplitude"));
        }
        Ok(SparseState {
            layout: Arc::new(layout),
            amps,
        })
    }

    pub fn basis_state(layout: SystemLayout, levels: &[u8]) -> Result<Self> {
        Self::from_terms(layout, [(BasisIndex(levels.to_vec()), C64::new(1.0, 0.0))])
    }

    /// Product state: one local vector per wire, in flat layout order.
    /// The result is not normalized.
    pub fn product(layout: SystemLayout, factors: &[LocalVector]) -> Result<Self> {
        let dims = layout.flat_dims();
        if factors.len() != dims.len() {
            return Err(Error::structural(format!(
                "{} factors for {} wires",
                factors.len(),
                dims.len()
            )));
        }
        for (f, d) in factors.iter().zip(&dims) {
            if f.dim != *d {
                return Err(Error::structural(format!(
                    "factor dimension {} does not match wire dimension {d}",
                    f.dim
                )));
            }
        }
        let mut terms: Vec<(Vec<u8>, C64)> = vec![(Vec::new(), C64::new(1.0, 0.0))];
        for f in factors {
            let mut next = Vec::with_capacity(terms.len() * 2);
            for (prefix, amp) in &terms {
                for (level, c) in f.coeffs.iter().enumerate() {
                    if c.norm() < PRUNE_TOL {
                        continue;
                    }
                    let mut idx = prefix.clone();
                    idx.push(level as u8);
                    next.push((idx, amp * c));
                }
            }
            terms = next;
        }
        Self::from_terms(layout, terms.into_iter().map(|(v, a)| (BasisIndex(v), a)))
    }

    fn raw(layout: Arc<SystemLayout>, mut amps: BTreeMap<BasisIndex, C64>) -> Self {
        Self::prune(&mut amps);
        SparseState { layout, amps }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn layout_arc(&self) -> Arc<SystemLayout> {
        Arc::clone(&self.layout)
    }

    pub fn amps(&self) -> &BTreeMap<BasisIndex, C64> {
        &self.amps
    }

    pub fn term_count(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn amplitude(&self, levels: &[u8]) -> C64 {
        self.amps
            .get(&BasisIndex(levels.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// `<self|other>`, summed over shared basis indices.
    pub fn inner_product(&self, other: &SparseState) -> Result<C64> {
        if *self.layout != *other.layout {
            return Err(Error::structural("inner product between different layouts"));
        }
        let (small, big) = if self.amps.len() <= other.amps.len() {
            (&self.amps, &other.amps)
        } else {
            (&other.amps, &self.amps)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (idx, a) in small {
            if let Some(b) = big.get(idx) {
                // Orientation: conjugate self's amplitude.
                if std::ptr::eq(small, &self.amps) {
                    acc += a.conj() * b;
                } else {
                    acc += b.conj() * a;
                }
            }
        }
        Ok(acc)
    }

    /// Overlap magnitude of the normalized states.
    pub fn overlap(&self, other: &SparseState) -> Result<f64> {
        let ip = self.inner_product(other)?.norm();
        let denom = self.norm() * other.norm();
        if denom < PRUNE_TOL {
            return Ok(0.0);
        }
        Ok(ip / denom)
    }

    pub fn normalize(&self) -> Result<SparseState> {
        let n = self.norm();
        if n < PRUNE_TOL {
            return Err(Error::degenerate("cannot normalize a zero state"));
        }
        let amps = self.amps.iter().map(|(i, a)| (i.clone(), a / n)).collect();
        Ok(SparseState::raw(Arc::clone(&self.layout), amps))
    }

    pub fn scaled(&self, c: C64) -> SparseState {
        let amps = self.amps.iter().map(|(i, a)| (i.clone(), a * c)).collect();
        SparseState::raw(Arc::clone(&self.layout), amps)
    }

    /// Tensor product of states on party-disjoint layouts; the result's
    /// parties are `self`'s followed by `other`'s.
    pub fn tensor(&self, other: &SparseState) -> Result<SparseState> {
        for p in other.layout.parties() {
            if self.layout.parties().iter().any(|q| q.name == p.name) {
                return Err(Error::structural(format!(
                    "party name collision on {}",
                    p.name
                )));
            }
        }
        let layout = SystemLayout::new(
            self.layout
                .parties()
                .iter()
                .chain(other.layout.parties())
                .cloned()
                .collect(),
        )?;
        let mut amps = BTreeMap::new();
        for (ia, a) in &self.amps {
            for (ib, b) in &other.amps {
                let mut idx = ia.0.clone();
                idx.extend_from_slice(&ib.0);
                amps.insert(BasisIndex(idx), a * b);
            }
        }
        Ok(SparseState::raw(Arc::new(layout), amps))
    }

    /// Extend the layout with one new ancilla wire per `(party, dim)` entry
    /// and tensor in a resource state given as level tuples over those new
    /// wires (in holder order).
    pub fn attach_ancillas(
        &self,
        holders: &[(usize, usize)],
        resource_terms: &[(Vec<u8>, C64)],
    ) -> Result<SparseState> {
        let mut layout = (*self.layout).clone();
        let mut new_wires = Vec::with_capacity(holders.len());
        for &(party, dim) in holders {
            if party >= layout.parties().len() {
                return Err(Error::structural("attach references unknown party"));
            }
            let (next, wire) = layout.with_ancilla(party, dim);
            layout = next;
            new_wires.push((party, wire));
        }
        // Flat positions of old wires and of the new ancillas in the new layout.
        let mut old_pos = Vec::with_capacity(self.layout.wire_count());
        for (party, decl) in self.layout.parties().iter().enumerate() {
            for w in 0..decl.wire_count() {
                old_pos.push(layout.position(party, w)?);
            }
        }
        let anc_pos: Vec<usize> = new_wires
            .iter()
            .map(|&(p, w)| layout.position(p, w))
            .collect::<Result<_>>()?;
        let total = layout.wire_count();
        let mut amps = BTreeMap::new();
        for (idx, a) in &self.amps {
            for (levels, c) in resource_terms {
                let mut v = vec![0u8; total];
                for (src, &dst) in old_pos.iter().enumerate() {
                    v[dst] = idx.0[src];
                }
                for (l, &dst) in levels.iter().zip(&anc_pos) {
                    v[dst] = *l;
                }
                amps.insert(BasisIndex(v), a * c);
            }
        }
        Ok(SparseState::raw(Arc::new(layout), amps))
    }

    /// Apply a diagonal subset projector. Returns the unnormalized
    /// projected state together with `|M s|^2 / |s|^2`.
    pub fn apply_projector(&self, p: &Projector) -> Result<(SparseState, f64)> {
        let resolved = p.resolve(&self.layout)?;
        Ok(self.apply_resolved_projector(&resolved))
    }

    pub(crate) fn apply_resolved_projector(
        &self,
        terms: &[crate::protocol::ResolvedTerm],
    ) -> (SparseState, f64) {
        let before = self.norm_sqr();
        let mut amps = BTreeMap::new();
        for (idx, a) in &self.amps {
            let pass = terms.iter().any(|term| {
                term.iter()
                    .all(|(pos, allowed)| allowed[idx.0[*pos] as usize])
            });
            if pass {
                amps.insert(idx.clone(), *a);
            }
        }
        let state = SparseState::raw(Arc::clone(&self.layout), amps);
        let prob = if before < PRUNE_TOL {
            0.0
        } else {
            state.norm_sqr() / before
        };
        (state, prob)
    }

    /// CNOT between two qubit wires: `|c,t> -> |c, t xor c>`.
    pub fn apply_cnot(&self, ctrl: (usize, usize), tgt: (usize, usize)) -> Result<SparseState> {
        if ctrl == tgt {
            return Err(Error::structural("cnot control and target coincide"));
        }
        let cp = self.layout.position(ctrl.0, ctrl.1)?;
        let tp = self.layout.position(tgt.0, tgt.1)?;
        let dims = self.layout.flat_dims();
        if dims[cp] != 2 || dims[tp] != 2 {
            return Err(Error::structural("cnot requires qubit wires"));
        }
        let mut amps = BTreeMap::new();
        for (idx, a) in &self.amps {
            let mut v = idx.0.clone();
            v[tp] ^= v[cp];
            amps.insert(BasisIndex(v), *a);
        }
        Ok(SparseState::raw(Arc::clone(&self.layout), amps))
    }

    /// Relocate `src`'s main wire to `dst` (exact subsystem relocation).
    /// Amplitudes are unchanged up to the wire reordering; the merged party
    /// is renamed `{dst}~`.
    pub fn relocate_main_wire(&self, src: usize, dst: usize) -> Result<SparseState> {
        let (layout, source_pos, _) = self.layout.relocate_main(src, dst)?;
        let mut amps = BTreeMap::new();
        for (idx, a) in &self.amps {
            let v: Vec<u8> = source_pos.iter().map(|&s| idx.0[s]).collect();
            amps.insert(BasisIndex(v), *a);
        }
        Ok(SparseState::raw(Arc::new(layout), amps))
    }

    /// Project one party's composite local space onto a vector (rank-one
    /// projector `|v><v| (x) I`). Returns the unnormalized result and the
    /// outcome probability relative to `self`.
    pub fn project_party_vector(
        &self,
        party: usize,
        v: &LocalVector,
    ) -> Result<(SparseState, f64)> {
        let (start, count) = self.layout.party_span(party);
        let dims = self.layout.flat_dims();
        let local_dims = &dims[start..start + count];
        let local_size: usize = local_dims.iter().product();
        if v.dim != local_size {
            return Err(Error::structural(format!(
                "vector dimension {} does not match party local dimension {local_size}",
                v.dim
            )));
        }
        let vn = v.normalized()?;
        let cell_of = |idx: &BasisIndex| -> usize {
            let mut c = 0usize;
            for (k, d) in local_dims.iter().enumerate() {
                c = c * d + idx.0[start + k] as usize;
            }
            c
        };
        // <v|psi> grouped by the rest of the index.
        let mut rest_coeff: BTreeMap<Vec<u8>, C64> = BTreeMap::new();
        for (idx, a) in &self.amps {
            let mut rest = idx.0.clone();
            rest.drain(start..start + count);
            let c = vn.coeffs[cell_of(idx)].conj() * a;
            *rest_coeff.entry(rest).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let before = self.norm_sqr();
        let weight: f64 = rest_coeff.values().map(|c| c.norm_sqr()).sum();
        let prob = if before < PRUNE_TOL {
            0.0
        } else {
            weight / before
        };
        let mut amps = BTreeMap::new();
        for (rest, c) in rest_coeff {
            if c.norm() < PRUNE_TOL {
                continue;
            }
            for (cell, vc) in vn.coeffs.iter().enumerate() {
                if vc.norm() < PRUNE_TOL {
                    continue;
                }
                let mut local = vec![0u8; count];
                let mut rem = cell;
                for k in (0..count).rev() {
                    local[k] = (rem % local_dims[k]) as u8;
                    rem /= local_dims[k];
                }
                let mut idx = rest.clone();
                for (k, l) in local.iter().enumerate() {
                    idx.insert(start + k, *l);
                }
                amps.insert(BasisIndex(idx), c * vc);
            }
        }
        Ok((SparseState::raw(Arc::clone(&self.layout), amps), prob))
    }

    /// Try to factor the state as a product across parties; returns one
    /// normalized local vector per party, or `None` if entangled.
    pub fn factor_by_party(&self, tol: f64) -> Option<Vec<LocalVector>> {
        let state = self.normalize().ok()?;
        let n_parties = state.layout.parties().len();
        let dims = state.layout.flat_dims();
        let (ref_idx, ref_amp) = state
            .amps
            .iter()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())?;
        let mut factors = Vec::with_capacity(n_parties);
        for party in 0..n_parties {
            let (start, count) = state.layout.party_span(party);
            let local_dims = &dims[start..start + count];
            let local_size: usize = local_dims.iter().product();
            let mut coeffs = vec![C64::new(0.0, 0.0); local_size];
            for (idx, a) in &state.amps {
                if idx.0[..start] != ref_idx.0[..start]
                    || idx.0[start + count..] != ref_idx.0[start + count..]
                {
                    continue;
                }
                let mut cell = 0usize;
                for (k, d) in local_dims.iter().enumerate() {
                    cell = cell * d + idx.0[start + k] as usize;
                }
                coeffs[cell] = *a;
            }
            factors.push(
                LocalVector {
                    dim: local_size,
                    coeffs,
                }
                .normalized()
                .ok()?,
            );
        }
        // Verify the candidate product reproduces the state.
        let mut phase_ref = C64::new(1.0, 0.0);
        for (party, factor) in factors.iter().enumerate() {
            let (start, count) = state.layout.party_span(party);
            let local_dims = &dims[start..start + count];
            let mut cell = 0usize;
            for (k, d) in local_dims.iter().enumerate() {
                cell = cell * d + ref_idx.0[start + k] as usize;
            }
            phase_ref *= factor.coeffs[cell];
        }
        if phase_ref.norm() < tol {
            return None;
        }
        let global = ref_amp / phase_ref;
        let mut residual = 0.0f64;
        for (idx, a) in &state.amps {
            let mut prod = global;
            for (party, factor) in factors.iter().enumerate() {
                let (start, count) = state.layout.party_span(party);
                let local_dims = &dims[start..start + count];
                let mut cell = 0usize;
                for (k, d) in local_dims.iter().enumerate() {
                    cell = cell * d + idx.0[start + k] as usize;
                }
                prod *= factor.coeffs[cell];
            }
            residual += (a - prod).norm_sqr();
        }
        // The candidate product has norm |global| (the factors are unit);
        // weight beyond 1 means support outside the state's and rules the
        // factorization out even when the on-support residual is small.
        let prod_weight = global.norm_sqr();
        if residual.sqrt() < tol && (prod_weight - 1.0).abs() < 1e-6 {
            Some(factors)
        } else {
            None
        }
    }

    /// Drop a set of wires whose levels are fixed across all terms,
    /// returning the state on the remaining wires of a reduced layout.
    pub fn strip_wires_to_main(&self) -> Result<SparseState> {
        let main = self.layout.main_layout();
        let mut keep = Vec::new();
        for (party, decl) in self.layout.parties().iter().enumerate() {
            let _ = decl;
            keep.push(self.layout.position(party, 0)?);
        }
        let mut amps: BTreeMap<BasisIndex, C64> = BTreeMap::new();
        for (idx, a) in &self.amps {
            let v: Vec<u8> = keep.iter().map(|&p| idx.0[p]).collect();
            *amps.entry(BasisIndex(v)).or_insert(C64::new(0.0, 0.0)) += *a;
        }
        Ok(SparseState::raw(Arc::new(main), amps))
    }

    /// Project ancilla wire `wire` of `party` onto the X-basis vector
    /// `(|0> + (-1)^s |1>)/sqrt(2)` and remove the wire.
    pub fn project_out_qubit_x(&self, party: usize, wire: usize, s: u8) -> Result<SparseState> {
        let pos = self.layout.position(party, wire)?;
        if self.layout.flat_dims()[pos] != 2 {
            return Err(Error::structural(
                "x-basis projection requires a qubit wire",
            ));
        }
        if wire == 0 {
            return Err(Error::structural("cannot project out a main wire"));
        }
        let mut parties = self.layout.parties().to_vec();
        parties[party].ancilla_dims.remove(wire - 1);
        let layout = SystemLayout { parties };
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps: BTreeMap<BasisIndex, C64> = BTreeMap::new();
        for (idx, a) in &self.amps {
            let level = idx.0[pos];
            let sign = if level == 1 && s == 1 { -1.0 } else { 1.0 };
            let mut v = idx.0.clone();
            v.remove(pos);
            *amps.entry(BasisIndex(v)).or_insert(C64::new(0.0, 0.0)) += a * sign * inv_sqrt2;
        }
        Ok(SparseState::raw(Arc::new(layout), amps))
    }

    /// Multiply every term whose `wire` level is odd by -1 (a Z gate on a
    /// qubit wire).
    pub fn apply_z(&self, party: usize, wire: usize) -> Result<SparseState> {
        let pos = self.layout.position(party, wire)?;
        let mut amps = BTreeMap::new();
        for (idx, a) in &self.amps {
            let f = if idx.0[pos] % 2 == 1 { -1.0 } else { 1.0 };
            amps.insert(idx.clone(), a * f);
        }
        Ok(SparseState::raw(Arc::clone(&self.layout), amps))
    }
}

impl fmt::Display for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (idx, a) in &self.amps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.4}{:+.4}i){:?}", a.re, a.im, idx)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{ElementaryTerm, Projector};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn qubits(n: usize) -> SystemLayout {
        let names = ["A", "B", "C", "D", "E"];
        SystemLayout::main_only(&names[..n].iter().map(|&s| (s, 2)).collect::<Vec<_>>()).unwrap()
    }

    fn eq1_state(sign: f64) -> SparseState {
        // |0000> +/- |1111>, normalized.
        SparseState::from_terms(
            qubits(4),
            [
                (BasisIndex(vec![0, 0, 0, 0]), C64::new(1.0, 0.0)),
                (BasisIndex(vec![1, 1, 1, 1]), C64::new(sign, 0.0)),
            ],
        )
        .unwrap()
        .normalize()
        .unwrap()
    }

    #[test]
    fn inner_product_normalized_self_is_one() {
        let s = eq1_state(1.0);
        let ip = s.inner_product(&s).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-12 && ip.im.abs() < 1e-15);
    }

    #[test]
    fn plus_minus_branches_are_orthogonal() {
        let p = eq1_state(1.0);
        let m = eq1_state(-1.0);
        assert!(p.inner_product(&m).unwrap().norm() < 1e-12);
    }

    #[test]
    fn basis_component_of_ghz_is_inv_sqrt2() {
        let p = eq1_state(1.0);
        let z = SparseState::basis_state(qubits(4), &[0, 0, 0, 0]).unwrap();
        let ip = z.inner_product(&p).unwrap();
        assert!((ip.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent_and_unit() {
        let raw = SparseState::from_terms(
            qubits(4),
            [
                (BasisIndex(vec![0, 0, 0, 0]), C64::new(1.0, 0.0)),
                (BasisIndex(vec![1, 1, 1, 1]), C64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let n1 = raw.normalize().unwrap();
        assert!((n1.norm() - 1.0).abs() < 1e-12);
        let n2 = n1.normalize().unwrap();
        for (i, a) in n1.amps() {
            assert!((a - n2.amps()[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn normalize_zero_state_is_degenerate() {
        let err = SparseState::from_terms(
            qubits(4),
            [(BasisIndex(vec![0, 0, 0, 0]), C64::new(0.0, 0.0))],
        );
        assert!(matches!(err, Err(Error::Degenerate(_))));
    }

    #[test]
    fn alpha_zero_normalizes_to_inv_sqrt3() {
        let v = local_fourier_vector(FourierKind::Alpha, 3, 0).unwrap();
        let layout = SystemLayout::main_only(&[("A", 3)]).unwrap();
        let s = SparseState::product(layout, &[v])
            .unwrap()
            .normalize()
            .unwrap();
        for a in s.amps().values() {
            assert!((a.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_concatenates_and_multiplies() {
        let a =
            SparseState::basis_state(SystemLayout::main_only(&[("A", 2)]).unwrap(), &[0]).unwrap();
        let b =
            SparseState::basis_state(SystemLayout::main_only(&[("B", 2)]).unwrap(), &[1]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitude(&[0, 1]), C64::new(1.0, 0.0));

        // norm multiplicativity and sparse size product
        let ghz = eq1_state(1.0);
        let epr = SparseState::from_terms(
            SystemLayout::main_only(&[("X", 2), ("Y", 2)]).unwrap(),
            [
                (BasisIndex(vec![0, 0]), C64::new(1.0, 0.0)),
                (BasisIndex(vec![1, 1]), C64::new(1.0, 0.0)),
            ],
        )
        .unwrap()
        .normalize()
        .unwrap();
        let t = ghz.tensor(&epr).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-12);
        assert_eq!(t.term_count(), 4);
    }

    #[test]
    fn tensor_rejects_party_collision() {
        let a =
            SparseState::basis_state(SystemLayout::main_only(&[("A", 2)]).unwrap(), &[0]).unwrap();
        assert!(matches!(a.tensor(&a), Err(Error::Structural(_))));
    }

    fn proj(party: &str, wires: &[(usize, &[u8])]) -> Projector {
        Projector {
            party: party.to_string(),
            terms: vec![ElementaryTerm {
                wires: wires
                    .iter()
                    .map(|(w, ls)| (*w, ls.iter().copied().collect::<BTreeSet<u8>>()))
                    .collect(),
            }],
        }
    }

    #[test]
    fn projector_on_matching_basis_state_is_identity() {
        let layout = SystemLayout::new(vec![PartyDecl {
            name: "B".into(),
            main_dim: 2,
            ancilla_dims: vec![2],
        }])
        .unwrap();
        let s = SparseState::basis_state(layout, &[0, 0]).unwrap();
        let p = proj("B", &[(0, &[0]), (1, &[0])]);
        let (post, prob) = s.apply_projector(&p).unwrap();
        assert!((prob - 1.0).abs() < 1e-12);
        assert_eq!(post.term_count(), 1);
    }

    #[test]
    fn correlated_projector_on_ghz_with_epr_has_prob_half() {
        // Step-1 style check: B-main correlated with Bob's ancilla.
        let layout = SystemLayout::new(vec![
            PartyDecl {
                name: "A".into(),
                main_dim: 2,
                ancilla_dims: vec![2],
            },
            PartyDecl {
                name: "B".into(),
                main_dim: 2,
                ancilla_dims: vec![2],
            },
            PartyDecl {
                name: "C".into(),
                main_dim: 2,
                ancilla_dims: vec![],
            },
            PartyDecl {
                name: "D".into(),
                main_dim: 2,
                ancilla_dims: vec![],
            },
        ])
        .unwrap();
        // (|0000> + |1111>)/sqrt2 tensor (|00> + |11>)/sqrt2 on (a,b).
        let mut terms = Vec::new();
        for main in [[0u8, 0, 0, 0], [1, 1, 1, 1]] {
            for anc in [[0u8, 0], [1, 1]] {
                // flat order: A, a, B, b, C, D
                let idx = vec![main[0], anc[0], main[1], anc[1], main[2], main[3]];
                terms.push((BasisIndex(idx), C64::new(0.5, 0.0)));
            }
        }
        let s = SparseState::from_terms(layout, terms).unwrap();
        let p = Projector {
            party: "B".into(),
            terms: vec![
                ElementaryTerm {
                    wires: [(0, [0u8].into()), (1, [0u8].into())].into_iter().collect(),
                },
                ElementaryTerm {
                    wires: [(0, [1u8].into()), (1, [1u8].into())].into_iter().collect(),
                },
            ],
        };
        let (post, prob) = s.apply_projector(&p).unwrap();
        assert!((prob - 0.5).abs() < 1e-12);
        // Post-state proportional to |0000>|00> + |1111>|11>.
        assert_eq!(post.term_count(), 2);
        let post = post.normalize().unwrap();
        assert!(
            (post.amplitude(&[0, 0, 0, 0, 0, 0]).norm() - std::f64::consts::FRAC_1_SQRT_2).abs()
                < 1e-12
        );

        // Applying the same projector to its output changes nothing.
        let (post2, prob2) = post.apply_projector(&p).unwrap();
        assert!((prob2 - 1.0).abs() < 1e-12);
        assert_eq!(post2.term_count(), post.term_count());
    }

    #[test]
    fn orthogonal_subspace_projector_gives_zero() {
        let s = SparseState::basis_state(qubits(4), &[0, 0, 0, 0]).unwrap();
        let p = proj("A", &[(0, &[1])]);
        let (post, prob) = s.apply_projector(&p).unwrap();
        assert!(post.is_zero());
        assert_eq!(prob, 0.0);
    }

    #[test]
    fn cnot_flips_target_and_is_involutive() {
        let layout = qubits(2);
        let s = SparseState::basis_state(layout, &[1, 0]).unwrap();
        let t = s.apply_cnot((0, 0), (1, 0)).unwrap();
        assert_eq!(t.amplitude(&[1, 1]), C64::new(1.0, 0.0));
        let back = t.apply_cnot((0, 0), (1, 0)).unwrap();
        assert_eq!(back.amplitude(&[1, 0]), C64::new(1.0, 0.0));

        // exhaustive involution over all two-qubit basis states
        for a in 0..2u8 {
            for b in 0..2u8 {
                let s = SparseState::basis_state(qubits(2), &[a, b]).unwrap();
                let round = s
                    .apply_cnot((0, 0), (1, 0))
                    .unwrap()
                    .apply_cnot((0, 0), (1, 0))
                    .unwrap();
                assert_eq!(round.amplitude(&[a, b]), C64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn cnot_rejects_non_qubit_wires() {
        let layout = SystemLayout::main_only(&[("A", 3), ("B", 2)]).unwrap();
        let s = SparseState::basis_state(layout, &[0, 0]).unwrap();
        assert!(matches!(
            s.apply_cnot((0, 0), (1, 0)),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn cnot_matches_step3_component() {
        // |1111>|11> with control C, target A maps to |0111>|11>.
        let layout = SystemLayout::new(vec![
            PartyDecl {
                name: "A".into(),
                main_dim: 2,
                ancilla_dims: vec![2],
            },
            PartyDecl {
                name: "B".into(),
                main_dim: 2,
                ancilla_dims: vec![2],
            },
            PartyDecl {
                name: "C".into(),
                main_dim: 2,
                ancilla_dims: vec![],
            },
            PartyDecl {
                name: "D".into(),
                main_dim: 2,
                ancilla_dims: vec![],
            },
        ])
        .unwrap();
        let s = SparseState::basis_state(layout, &[1, 1, 1, 1, 1, 1]).unwrap();
        let t = s.apply_cnot((2, 0), (0, 0)).unwrap();
        assert_eq!(t.amplitude(&[0, 1, 1, 1, 1, 1]), C64::new(1.0, 0.0));
    }

    #[test]
    fn fourier_examples_match_definitions() {
        let a = local_fourier_vector(FourierKind::Alpha, 2, 1).unwrap();
        assert!((a.coeffs[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((a.coeffs[1] - C64::new(-1.0, 0.0)).norm() < 1e-12);

        let b = local_fourier_vector(FourierKind::Beta, 3, 0).unwrap();
        assert!((b.coeffs[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((b.coeffs[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(b.coeffs[2].norm() < 1e-15);

        let k = local_fourier_vector(FourierKind::Kappa, 3, 0).unwrap();
        assert!(k.coeffs[0].norm() < 1e-15);
        assert!((k.coeffs[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(k.coeffs[2].norm() < 1e-15);
    }

    #[test]
    fn fourier_index_out_of_range_is_domain_error() {
        assert!(matches!(
            local_fourier_vector(FourierKind::Beta, 3, 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fourier_families_internally_orthogonal_up_to_dim_8() {
        for d in 2..=8usize {
            for (kind, range) in [
                (FourierKind::Alpha, d),
                (FourierKind::Beta, d - 1),
                (FourierKind::Gamma, d - 1),
                (FourierKind::Kappa, d.saturating_sub(2)),
            ] {
                if kind == FourierKind::Kappa && d < 3 {
                    continue;
                }
                for i in 0..range {
                    for j in 0..range {
                        let u = local_fourier_vector(kind, d, i).unwrap();
                        let v = local_fourier_vector(kind, d, j).unwrap();
                        let ip = u.inner(&v).norm();
                        if i == j {
                            assert!(ip > 0.5);
                        } else {
                            assert!(ip < 1e-10, "{kind:?} d={d} i={i} j={j} -> {ip}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn relocation_preserves_amplitudes() {
        let layout = SystemLayout::main_only(&[("A", 2), ("B", 2), ("C", 3), ("D", 4)]).unwrap();
        let s = SparseState::from_terms(
            layout,
            [
                (BasisIndex(vec![0, 1, 2, 3]), C64::new(0.6, 0.0)),
                (BasisIndex(vec![1, 0, 1, 2]), C64::new(0.0, 0.8)),
            ],
        )
        .unwrap();
        let t = s.relocate_main_wire(3, 2).unwrap();
        assert_eq!(t.layout().parties()[2].name, "C~");
        assert_eq!(t.amplitude(&[0, 1, 2, 3]), C64::new(0.6, 0.0));
        assert!((t.norm() - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn factor_by_party_accepts_products_and_rejects_ghz() {
        let layout = SystemLayout::main_only(&[("A", 3), ("B", 3)]).unwrap();
        let v = local_fourier_vector(FourierKind::Alpha, 3, 1).unwrap();
        let w = local_fourier_vector(FourierKind::Beta, 3, 0).unwrap();
        let s = SparseState::product(layout, &[v, w])
            .unwrap()
            .normalize()
            .unwrap();
        let f = s.factor_by_party(1e-10).expect("product state factors");
        assert_eq!(f.len(), 2);

        assert!(eq1_state(1.0).factor_by_party(1e-10).is_none());
    }

    proptest! {
        #[test]
        fn random_two_term_states_have_conjugate_symmetric_inner_product(
            re1 in -1.0f64..1.0, im1 in -1.0f64..1.0,
            re2 in -1.0f64..1.0, im2 in -1.0f64..1.0,
        ) {
            prop_assume!(re1.abs() + im1.abs() > 1e-3);
            prop_assume!(re2.abs() + im2.abs() > 1e-3);
            let mk = |re: f64, im: f64, hi: bool| {
                SparseState::from_terms(
                    qubits(2),
                    [
                        (BasisIndex(vec![0, 0]), C64::new(re, im)),
                        (BasisIndex(vec![1, if hi {1} else {0}]), C64::new(1.0, -0.25)),
                    ],
                ).unwrap()
            };
            let a = mk(re1, im1, true);
            let b = mk(re2, im2, false);
            let ab = a.inner_product(&b).unwrap();
            let ba = b.inner_product(&a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-10);
        }
    }
}

//! Constructors and validators for the orthogonal state sets under study:
//! the four- and five-qubit GHZ bases and the asymmetric/symmetric
//! product-state sets on four and five parties.
//!
//! Conventions: every constructed member is normalized. A line displayed
//! with `+/-` yields two members labeled `s=+` and `s=-`. Labels are
//! `family[index=value,...]` with indices in a fixed order, so reports and
//! prior files can name states unambiguously.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    local_fourier_vector, BasisIndex, FourierKind, LocalVector, SparseState, SystemLayout,
};

type C64 = Complex64;

/// Structured member tag: family plus an ordered index map. The sign index
/// `s` takes values +1/-1 and renders as `s=+` / `s=-`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub family: String,
    pub indices: Vec<(String, i64)>,
}

impl Label {
    pub fn new(family: &str, indices: &[(&str, i64)]) -> Self {
        Label {
            family: family.to_string(),
            indices: indices.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if self.indices.is_empty() {
            return Ok(());
        }
        write!(f, "[")?;
        for (k, (name, value)) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            if name == "s" {
                write!(f, "s={}", if *value >= 0 { "+" } else { "-" })?;
            } else {
                write!(f, "{name}={value}")?;
            }
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug)]
pub struct LabeledState {
    pub label: Label,
    pub state: SparseState,
}

/// A labeled family of mutually orthogonal states on a shared main-wire
/// layout. Orthogonality is established by [`check_mutual_orthogonality`],
/// not assumed.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub name: String,
    pub dims: Vec<usize>,
    pub layout: SystemLayout,
    pub members: Vec<LabeledState>,
    pub families: BTreeMap<String, Vec<String>>,
}

impl Ensemble {
    fn push(&mut self, label: Label, state: SparseState) -> Result<()> {
        let text = label.to_string();
        if self.members.iter().any(|m| m.label.to_string() == text) {
            return Err(Error::structural(format!("duplicate member label {text}")));
        }
        self.families
            .entry(label.family.clone())
            .or_default()
            .push(text);
        self.members.push(LabeledState {
            label,
            state: state.normalize()?,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, label: &str) -> Option<&LabeledState> {
        self.members.iter().find(|m| m.label.to_string() == label)
    }

    pub fn family_members(&self, family: &str) -> Vec<&LabeledState> {
        self.families
            .get(family)
            .map(|labels| labels.iter().filter_map(|l| self.member(l)).collect())
            .unwrap_or_default()
    }
}

/// Bit patterns (B, C, D) of the four-qubit basis in display order: member
/// `i` is `|0 b> +/- |1 !b>` with `b` the pattern below.
pub fn ghz4_pattern(i: usize) -> [u8; 3] {
    const T: [[u8; 3]; 8] = [
        [0, 0, 0],
        [0, 1, 0],
        [1, 0, 0],
        [1, 1, 0],
        [0, 0, 1],
        [0, 1, 1],
        [1, 0, 1],
        [1, 1, 1],
    ];
    T[i]
}

/// Bit patterns (B, C, D, E) of the five-qubit basis: plain binary count.
pub fn ghz5_pattern(i: usize) -> [u8; 4] {
    [
        ((i >> 3) & 1) as u8,
        ((i >> 2) & 1) as u8,
        ((i >> 1) & 1) as u8,
        (i & 1) as u8,
    ]
}

pub fn ghz4_index_of(pattern: [u8; 3]) -> usize {
    (0..8).find(|&i| ghz4_pattern(i) == pattern).unwrap()
}

pub fn ghz5_index_of(pattern: [u8; 4]) -> usize {
    (0..16).find(|&i| ghz5_pattern(i) == pattern).unwrap()
}

/// The n-qubit GHZ basis, n in {4, 5}: members `(|0 b> +/- |1 !b>)/sqrt2`.
pub fn ghz_basis(n: usize) -> Result<Ensemble> {
    if n != 4 && n != 5 {
        return Err(Error::domain(format!(
            "ghz basis defined for n in {{4,5}}, got {n}"
        )));
    }
    let names = ["A", "B", "C", "D", "E"];
    let layout =
        SystemLayout::main_only(&names[..n].iter().map(|&s| (s, 2usize)).collect::<Vec<_>>())?;
    let (family_plus, family_minus) = if n == 4 {
        ("psi+", "psi-")
    } else {
        ("phi+", "phi-")
    };
    let mut ens = Ensemble {
        name: format!("ghz{n}"),
        dims: vec![2; n],
        layout: layout.clone(),
        members: Vec::new(),
        families: BTreeMap::new(),
    };
    let count = 1usize << (n - 1);
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..count {
        let tail: Vec<u8> = if n == 4 {
            ghz4_pattern(i).to_vec()
        } else {
            ghz5_pattern(i).to_vec()
        };
        let mut lo = vec![0u8];
        lo.extend(&tail);
        let mut hi = vec![1u8];
        hi.extend(tail.iter().map(|b| 1 - b));
        for (family, sign) in [(family_plus, 1.0), (family_minus, -1.0)] {
            let state = SparseState::from_terms(
                layout.clone(),
                [
                    (BasisIndex(lo.clone()), C64::new(amp, 0.0)),
                    (BasisIndex(hi.clone()), C64::new(sign * amp, 0.0)),
                ],
            )?;
            ens.push(Label::new(family, &[("i", i as i64)]), state)?;
        }
    }
    Ok(ens)
}

// Factor shorthand used by the product-set tables below.
#[derive(Clone, Copy)]
enum Fac {
    Zero,
    One,
    Top,          // |d_k - 1>
    Level(usize), // free index p over 1..d_k-1
    Alpha(usize), // family index position
    Beta(usize),
    Gamma(usize),
    Kappa(usize),
    ZeroPmTop, // |0> +/- |d_k - 1>
}

impl Fac {
    fn build(&self, dim: usize, idx: &[usize], sign: f64) -> Result<LocalVector> {
        Ok(match self {
            Fac::Zero => LocalVector::basis(dim, 0),
            Fac::One => LocalVector::basis(dim, 1),
            Fac::Top => LocalVector::basis(dim, dim - 1),
            Fac::Level(k) => LocalVector::basis(dim, idx[*k]),
            Fac::Alpha(k) => local_fourier_vector(FourierKind::Alpha, dim, idx[*k])?,
            Fac::Beta(k) => local_fourier_vector(FourierKind::Beta, dim, idx[*k])?,
            Fac::Gamma(k) => local_fourier_vector(FourierKind::Gamma, dim, idx[*k])?,
            Fac::Kappa(k) => local_fourier_vector(FourierKind::Kappa, dim, idx[*k])?,
            Fac::ZeroPmTop => LocalVector::two_level(dim, 0, dim - 1, sign),
        })
    }
}

struct FamilySpec {
    family: &'static str,
    factors: Vec<Fac>,
    // (index name, range) pairs; range depends on the dimension of the
    // party where the indexed factor sits.
    indices: Vec<(&'static str, usize)>,
    signed: bool,
}

fn instantiate(ens: &mut Ensemble, dims: &[usize], spec: &FamilySpec) -> Result<()> {
    let mut counters = vec![0usize; spec.indices.len()];
    loop {
        let signs: &[f64] = if spec.signed { &[1.0, -1.0] } else { &[1.0] };
        for &sign in signs {
            let factors: Vec<LocalVector> = spec
                .factors
                .iter()
                .zip(dims)
                .map(|(f, &d)| f.build(d, &counters, sign))
                .collect::<Result<_>>()?;
            let state = SparseState::product(ens.layout.clone(), &factors)?;
            let mut label_idx: Vec<(&str, i64)> = spec
                .indices
                .iter()
                .zip(&counters)
                .map(|((name, _), &v)| (*name, v as i64))
                .collect();
            if spec.signed {
                label_idx.push(("s", sign as i64));
            }
            ens.push(Label::new(spec.family, &label_idx), state)?;
        }
        // mixed-radix increment over the index ranges
        let mut k = spec.indices.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            counters[k] += 1;
            if counters[k] < spec.indices[k].1 {
                break;
            }
            counters[k] = 0;
        }
        if counters.iter().all(|&c| c == 0) {
            return Ok(());
        }
    }
}

fn check_min_dims(dims: &[usize], min: usize, what: &str) -> Result<()> {
    if dims.iter().any(|&d| d < min) {
        return Err(Error::domain(format!(
            "{what} requires every dimension >= {min}"
        )));
    }
    Ok(())
}

/// The 18-family asymmetric product set on four parties.
pub fn ops_asym4(dims: [usize; 4]) -> Result<Ensemble> {
    check_min_dims(&dims, 3, "asym4")?;
    let [d1, d2, d3, d4] = dims;
    let layout = SystemLayout::main_only(&[("A", d1), ("B", d2), ("C", d3), ("D", d4)])?;
    let mut ens = Ensemble {
        name: "asym4".into(),
        dims: dims.to_vec(),
        layout,
        members: Vec::new(),
        families: BTreeMap::new(),
    };
    use Fac::*;
    let specs = vec![
        FamilySpec {
            family: "H1",
            factors: vec![Zero, Zero, Beta(0), Alpha(1)],
            indices: vec![("j", d3 - 1), ("i", d4)],
            signed: false,
        },
        FamilySpec {
            family: "H2",
            factors: vec![Zero, Zero, Top, Beta(0)],
            indices: vec![("j", d4 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H3",
            factors: vec![Beta(0), Alpha(1), Top, Top],
            indices: vec![("j", d1 - 1), ("i", d2)],
            signed: false,
        },
        FamilySpec {
            family: "H4",
            factors: vec![Top, Beta(0), Top, Top],
            indices: vec![("j", d2 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H5",
            factors: vec![Top, Top, Gamma(0), Alpha(1)],
            indices: vec![("m", d3 - 1), ("i", d4)],
            signed: false,
        },
        FamilySpec {
            family: "H6",
            factors: vec![Top, Top, Zero, Gamma(0)],
            indices: vec![("m", d4 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H7",
            factors: vec![Gamma(0), Alpha(1), Zero, Zero],
            indices: vec![("m", d1 - 1), ("i", d2)],
            signed: false,
        },
        FamilySpec {
            family: "H8",
            factors: vec![Zero, Gamma(0), Zero, Zero],
            indices: vec![("m", d2 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H9",
            factors: vec![Zero, Kappa(0), Zero, Gamma(1)],
            indices: vec![("I", d2 - 2), ("m", d4 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H10",
            factors: vec![Top, Kappa(1), Top, Beta(0)],
            indices: vec![("j", d4 - 1), ("I", d2 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H11",
            factors: vec![Kappa(1), Top, Beta(0), Top],
            indices: vec![("j", d3 - 1), ("I", d1 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H12",
            factors: vec![Kappa(0), Zero, Gamma(1), Zero],
            indices: vec![("I", d1 - 2), ("m", d3 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H13",
            factors: vec![Zero, Gamma(1), Kappa(0), Top],
            indices: vec![("I", d3 - 2), ("m", d2 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H14",
            factors: vec![Top, Beta(0), Kappa(1), Zero],
            indices: vec![("j", d2 - 1), ("I", d3 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H15",
            factors: vec![Kappa(1), Top, Top, Beta(0)],
            indices: vec![("j", d4 - 1), ("I", d1 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H16",
            factors: vec![Kappa(0), Zero, Zero, Gamma(1)],
            indices: vec![("I", d1 - 2), ("m", d4 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H17",
            factors: vec![Zero, Top, ZeroPmTop, Kappa(0)],
            indices: vec![("I", d4 - 2)],
            signed: true,
        },
        FamilySpec {
            family: "H18",
            factors: vec![Top, Zero, ZeroPmTop, Kappa(0)],
            indices: vec![("I", d4 - 2)],
            signed: true,
        },
    ];
    for spec in &specs {
        instantiate(&mut ens, &dims, spec)?;
    }
    Ok(ens)
}

/// The 30-family symmetric product set on four parties. Where one vector
/// symbol appears at two parties, the two indices range independently over
/// the respective party dimensions (`I1` for the first occurrence, `I2`
/// for the second); this is the reading under which the family counts
/// reproduce the closed-form set size at every dimension tuple.
pub fn ops_sym4(dims: [usize; 4]) -> Result<Ensemble> {
    check_min_dims(&dims, 3, "sym4")?;
    let [d1, d2, d3, d4] = dims;
    let layout = SystemLayout::main_only(&[("A", d1), ("B", d2), ("C", d3), ("D", d4)])?;
    let mut ens = Ensemble {
        name: "sym4".into(),
        dims: dims.to_vec(),
        layout,
        members: Vec::new(),
        families: BTreeMap::new(),
    };
    use Fac::*;
    let specs = vec![
        FamilySpec {
            family: "H1.1",
            factors: vec![Kappa(1), Kappa(2), Zero, Gamma(0)],
            indices: vec![("m", d4 - 1), ("I1", d1 - 2), ("I2", d2 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H1.2",
            factors: vec![Kappa(1), Zero, Gamma(0), Kappa(2)],
            indices: vec![("m", d3 - 1), ("I1", d1 - 2), ("I2", d4 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H1.3",
            factors: vec![Zero, Gamma(0), Kappa(1), Kappa(2)],
            indices: vec![("m", d2 - 1), ("I1", d3 - 2), ("I2", d4 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H1.4",
            factors: vec![Gamma(0), Kappa(1), Kappa(2), Zero],
            indices: vec![("m", d1 - 1), ("I1", d2 - 2), ("I2", d3 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H2.1",
            factors: vec![Top, Zero, Zero, Beta(0)],
            indices: vec![("j", d4 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H2.2",
            factors: vec![Zero, Zero, Beta(0), Top],
            indices: vec![("j", d3 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H2.3",
            factors: vec![Zero, Beta(0), Top, Zero],
            indices: vec![("j", d2 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H2.4",
            factors: vec![Beta(0), Top, Zero, Zero],
            indices: vec![("j", d1 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H3.1",
            factors: vec![Zero, Zero, Top, Gamma(0)],
            indices: vec![("m", d4 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H3.2",
            factors: vec![Zero, Top, Gamma(0), Zero],
            indices: vec![("m", d3 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H3.3",
            factors: vec![Top, Gamma(0), Zero, Zero],
            indices: vec![("m", d2 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H3.4",
            factors: vec![Gamma(0), Zero, Zero, Top],
            indices: vec![("m", d1 - 1)],
            signed: false,
        },
        FamilySpec {
            family: "H4.1",
            factors: vec![Kappa(0), Top, Top, ZeroPmTop],
            indices: vec![("I", d1 - 2)],
            signed: true,
        },
        FamilySpec {
            family: "H4.2",
            factors: vec![Top, Top, ZeroPmTop, Kappa(0)],
            indices: vec![("I", d4 - 2)],
            signed: true,
        },
        FamilySpec {
            family: "H4.3",
            factors: vec![Top, ZeroPmTop, Kappa(0), Top],
            indices: vec![("I", d3 - 2)],
            signed: true,
        },
        FamilySpec {
            family: "H4.4",
            factors: vec![ZeroPmTop, Kappa(0), Top, Top],
            indices: vec![("I", d2 - 2)],
            signed: true,
        },
        FamilySpec {
            family: "H5.1",
            factors: vec![Top, Top, Kappa(1), Beta(0)],
            indices: vec![("j", d4 - 1), ("I", d3 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H5.2",
            factors: vec![Top, Kappa(1), Beta(0), Top],
            indices: vec![("j", d3 - 1), ("I", d2 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H5.3",
            factors: vec![Kappa(1), Beta(0), Top, Top],
            indices: vec![("j", d2 - 1), ("I", d1 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H5.4",
            factors: vec![Beta(0), Top, Top, Kappa(1)],
            indices: vec![("j", d1 - 1), ("I", d4 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H6.1",
            factors: vec![Zero, Top, Top, Top],
            indices: vec![],
            signed: false,
        },
        FamilySpec {
            family: "H6.2",
            factors: vec![Top, Top, Top, Zero],
            indices: vec![],
            signed: false,
        },
        FamilySpec {
            family: "H6.3",
            factors: vec![Top, Top, Zero, Top],
            indices: vec![],
            signed: false,
        },
        FamilySpec {
            family: "H6.4",
            factors: vec![Top, Zero, Top, Top],
            indices: vec![],
            signed: false,
        },
        FamilySpec {
            family: "H7.1",
            factors: vec![Zero, Kappa(0), Top, Kappa(1)],
            indices: vec![("I1", d2 - 2), ("I2", d4 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H7.2",
            factors: vec![Kappa(0), Top, Kappa(1), Zero],
            indices: vec![("I1", d1 - 2), ("I2", d3 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H7.3",
            factors: vec![Top, Kappa(0), Zero, Kappa(1)],
            indices: vec![("I1", d2 - 2), ("I2", d4 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H7.4",
            factors: vec![Kappa(0), Zero, Kappa(1), Top],
            indices: vec![("I1", d1 - 2), ("I2", d3 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H8.1",
            factors: vec![Top, Kappa(0), Top, Kappa(1)],
            indices: vec![("I1", d2 - 2), ("I2", d4 - 2)],
            signed: false,
        },
        FamilySpec {
            family: "H8.2",
            factors: vec![Kappa(0), Top, Kappa(1), Top],
            indices: vec![("I1", d1 - 2), ("I2", d3 - 2)],
            signed: false,
        },
    ];
    for spec in &specs {
        instantiate(&mut ens, &dims, spec)?;
    }
    Ok(ens)
}

/// The ten-family symmetric product set on five parties. In the first five
/// families the alpha index is shared by two parties, so a single loop
/// drives both factors; those families are only constructed when the two
/// tied parties have equal dimension and are omitted otherwise (see the
/// returned ensemble's `families` map for what was built).
pub fn ops_sym5(dims: [usize; 5]) -> Result<Ensemble> {
    check_min_dims(&dims, 3, "sym5")?;
    let [d1, d2, d3, d4, d5] = dims;
    let layout = SystemLayout::main_only(&[("A", d1), ("B", d2), ("C", d3), ("D", d4), ("E", d5)])?;
    let mut ens = Ensemble {
        name: "sym5".into(),
        dims: dims.to_vec(),
        layout,
        members: Vec::new(),
        families: BTreeMap::new(),
    };
    use Fac::*;
    // (family, factors, tied alpha parties, p-party)
    type TiedRow = (&'static str, Vec<Fac>, (usize, usize), usize);
    let tied: Vec<TiedRow> = vec![
        (
            "H1",
            vec![Alpha(0), Alpha(0), Level(1), Zero, Zero],
            (0, 1),
            2,
        ),
        (
            "H2",
            vec![Alpha(0), Level(1), Zero, Zero, Alpha(0)],
            (0, 4),
            1,
        ),
        (
            "H3",
            vec![Level(1), Zero, Zero, Alpha(0), Alpha(0)],
            (3, 4),
            0,
        ),
        (
            "H4",
            vec![Zero, Zero, Alpha(0), Alpha(0), Level(1)],
            (2, 3),
            4,
        ),
        (
            "H5",
            vec![Zero, Alpha(0), Alpha(0), Level(1), Zero],
            (1, 2),
            3,
        ),
    ];
    for (family, factors, (p1, p2), p_party) in tied {
        if dims[p1] != dims[p2] {
            // tied alpha index is ambiguous across unequal dimensions
            continue;
        }
        let spec = FamilySpec {
            family,
            factors,
            indices: vec![("i", dims[p1]), ("p", dims[p_party] - 1)],
            signed: false,
        };
        instantiate_sym5_level(&mut ens, &dims, &spec)?;
    }
    let gamma: Vec<(&str, Vec<Fac>, usize, usize)> = vec![
        ("H6", vec![Gamma(0), Zero, Level(1), Zero, One], 0, 2),
        ("H7", vec![Zero, Level(1), Zero, One, Gamma(0)], 4, 1),
        ("H8", vec![Level(1), Zero, One, Gamma(0), Zero], 3, 0),
        ("H9", vec![Zero, One, Gamma(0), Zero, Level(1)], 2, 4),
        ("H10", vec![One, Gamma(0), Zero, Level(1), Zero], 1, 3),
    ];
    for (family, factors, g_party, p_party) in gamma {
        let spec = FamilySpec {
            family,
            factors,
            indices: vec![("m", dims[g_party] - 1), ("p", dims[p_party] - 1)],
            signed: false,
        };
        instantiate_sym5_level(&mut ens, &dims, &spec)?;
    }
    Ok(ens)
}

// Like `instantiate`, but the second index is the computational level `p`
// which ranges over 1..d_k-1 (stored as p itself, not p-1).
fn instantiate_sym5_level(ens: &mut Ensemble, dims: &[usize], spec: &FamilySpec) -> Result<()> {
    let (first_name, first_range) = spec.indices[0];
    let (_, p_range) = spec.indices[1];
    for a in 0..first_range {
        for p in 1..=p_range {
            let idx = [a, p];
            let factors: Vec<LocalVector> = spec
                .factors
                .iter()
                .zip(dims)
                .map(|(f, &d)| f.build(d, &idx, 1.0))
                .collect::<Result<_>>()?;
            let state = SparseState::product(ens.layout.clone(), &factors)?;
            ens.push(
                Label::new(spec.family, &[(first_name, a as i64), ("p", p as i64)]),
                state,
            )?;
        }
    }
    Ok(())
}

/// All-pairs orthogonality report.
#[derive(Clone, Debug, Serialize)]
pub struct OrthoReport {
    pub pairs_checked: usize,
    pub max_abs_overlap: f64,
    pub violating_pairs: Vec<(String, String, f64)>,
}

/// Exhaustive all-pairs overlap check; `violating_pairs` is empty iff
/// `max_abs_overlap < tol`.
pub fn check_mutual_orthogonality(e: &Ensemble, tol: f64) -> OrthoReport {
    let mut report = OrthoReport {
        pairs_checked: 0,
        max_abs_overlap: 0.0,
        violating_pairs: Vec::new(),
    };
    for (i, a) in e.members.iter().enumerate() {
        for b in &e.members[i + 1..] {
            let ov = a.state.overlap(&b.state).unwrap_or(f64::NAN);
            report.pairs_checked += 1;
            if ov.is_nan() || ov >= tol {
                report
                    .violating_pairs
                    .push((a.label.to_string(), b.label.to_string(), ov));
            }
            if ov > report.max_abs_overlap {
                report.max_abs_overlap = ov;
            }
        }
    }
    report
}

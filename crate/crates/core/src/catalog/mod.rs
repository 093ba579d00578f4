//! The ten built-in discrimination protocols, as dimension-parameterized
//! tree builders, together with the closed-form cost expressions.

mod asym4;
mod builder;
mod formulas;
mod ghz;
mod sym4;
mod sym5;

pub use formulas::{
    cost_formula_thm5, cost_formula_thm7, fig41_data, theorem_expected_cost, CostFormulaResult,
    Fig41Row,
};

use serde::Serialize;

use crate::ensembles::{ghz_basis, ops_asym4, ops_sym4, ops_sym5, Ensemble};
use crate::error::{Error, Result};
use crate::protocol::ProtocolTree;

/// Identifier of one built-in protocol, 1..=10.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremId(u8);

impl TheoremId {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=10).contains(&id) {
            Ok(TheoremId(id))
        } else {
            Err(Error::domain(format!("theorem id {id} outside 1..=10")))
        }
    }

    pub fn get(&self) -> u8 {
        self.0
    }
}

/// Smallest legal dimension tuple for each protocol.
pub fn default_dims(id: u8) -> Vec<usize> {
    match id {
        1 => vec![2; 4],
        2 => vec![2; 5],
        3..=7 => vec![3; 4],
        _ => vec![3; 5],
    }
}

/// Dimension legality per protocol: qubits for 1-2, `d_k >= 3` otherwise.
pub fn check_dims(id: u8, dims: &[usize]) -> Result<()> {
    TheoremId::new(id)?;
    let (len, min) = match id {
        1 => (4, 2),
        2 => (5, 2),
        3..=7 => (4, 3),
        _ => (5, 3),
    };
    if dims.len() != len {
        return Err(Error::domain(format!(
            "theorem {id} takes {len} dimensions, got {}",
            dims.len()
        )));
    }
    if id <= 2 {
        if dims.iter().any(|&d| d != 2) {
            return Err(Error::domain(format!("theorem {id} is defined on qubits")));
        }
    } else if dims.iter().any(|&d| d < min) {
        return Err(Error::domain(format!(
            "theorem {id} requires every dimension >= {min}"
        )));
    }
    Ok(())
}

/// The ensemble each protocol discriminates.
pub fn build_ensemble(id: u8, dims: &[usize]) -> Result<Ensemble> {
    check_dims(id, dims)?;
    match id {
        1 => ghz_basis(4),
        2 => ghz_basis(5),
        3..=5 => ops_asym4([dims[0], dims[1], dims[2], dims[3]]),
        6 | 7 => ops_sym4([dims[0], dims[1], dims[2], dims[3]]),
        _ => ops_sym5([dims[0], dims[1], dims[2], dims[3], dims[4]]),
    }
}

/// Build the full protocol tree for `id` at `dims`.
pub fn build(id: u8, dims: &[usize]) -> Result<ProtocolTree> {
    check_dims(id, dims)?;
    let ens = build_ensemble(id, dims)?;
    match id {
        1 => ghz::build_ghz4(),
        2 => ghz::build_ghz5(),
        3 => asym4::build_thm3([dims[0], dims[1], dims[2], dims[3]], &ens),
        4 => asym4::build_thm4([dims[0], dims[1], dims[2], dims[3]], &ens),
        5 => asym4::build_thm5([dims[0], dims[1], dims[2], dims[3]], &ens),
        6 => sym4::build_thm6([dims[0], dims[1], dims[2], dims[3]], &ens),
        7 => sym4::build_thm7([dims[0], dims[1], dims[2], dims[3]], &ens),
        8 => sym5::build_thm8([dims[0], dims[1], dims[2], dims[3], dims[4]], &ens),
        9 => sym5::build_thm9([dims[0], dims[1], dims[2], dims[3], dims[4]], &ens),
        10 => sym5::build_thm10([dims[0], dims[1], dims[2], dims[3], dims[4]], &ens),
        _ => unreachable!(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremInfo {
    pub id: u8,
    pub ensemble: &'static str,
    pub description: &'static str,
    pub resources: &'static str,
    pub default_dims: Vec<usize>,
}

/// Enumerable builder registry (drives the CLI `list` command).
pub fn registry() -> Vec<TheoremInfo> {
    vec![
        TheoremInfo {
            id: 1,
            ensemble: "ghz4",
            description: "four-qubit GHZ basis via one EPR pair and two CNOTs",
            resources: "1x EPR(2) A-B",
            default_dims: default_dims(1),
        },
        TheoremInfo {
            id: 2,
            ensemble: "ghz5",
            description: "five-qubit GHZ basis via one EPR pair and three CNOTs",
            resources: "1x EPR(2) A-B",
            default_dims: default_dims(2),
        },
        TheoremInfo {
            id: 3,
            ensemble: "asym4",
            description: "asymmetric product set, teleportation based",
            resources: "1x EPR(d4) C-D, 1x EPR(2) A-C~",
            default_dims: default_dims(3),
        },
        TheoremInfo {
            id: 4,
            ensemble: "asym4",
            description: "asymmetric product set, teleportation free",
            resources: "1x EPR(2) A-D, 1x EPR(3) C-D",
            default_dims: default_dims(4),
        },
        TheoremInfo {
            id: 5,
            ensemble: "asym4",
            description: "asymmetric product set with a conditional fractional EPR",
            resources: "1x EPR(2) A-D, 1x EPR(2) C-D, r/s x EPR(2) B-D",
            default_dims: default_dims(5),
        },
        TheoremInfo {
            id: 6,
            ensemble: "sym4",
            description: "symmetric product set, teleportation based",
            resources: "1x EPR(d4) C-D, 1x EPR(3) A-C~",
            default_dims: default_dims(6),
        },
        TheoremInfo {
            id: 7,
            ensemble: "sym4",
            description: "symmetric product set with a conditional fractional EPR",
            resources: "1x EPR(2) A-C, 1x EPR(3) A-D, r'/s' x EPR(2) A-B",
            default_dims: default_dims(7),
        },
        TheoremInfo {
            id: 8,
            ensemble: "sym5",
            description: "five-party symmetric product set via four EPR pairs",
            resources: "4x EPR(2) {A,B,C,D}-E",
            default_dims: default_dims(8),
        },
        TheoremInfo {
            id: 9,
            ensemble: "sym5",
            description: "five-party symmetric product set via three GHZ states",
            resources: "3x GHZ3 {A,B,C}-D-E",
            default_dims: default_dims(9),
        },
        TheoremInfo {
            id: 10,
            ensemble: "sym5",
            description: "five-party symmetric product set via two four-party GHZ states",
            resources: "2x F4 {A,B}-C-D-E",
            default_dims: default_dims(10),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_checks() {
        assert!(check_dims(1, &[2, 2, 2, 2]).is_ok());
        assert!(check_dims(3, &[2, 3, 3, 3]).is_err());
        assert!(check_dims(8, &[3, 3, 3, 3]).is_err());
        assert!(check_dims(11, &[3, 3, 3, 3]).is_err());
    }

    #[test]
    fn registry_covers_all_ids() {
        let reg = registry();
        assert_eq!(reg.len(), 10);
        for (k, info) in reg.iter().enumerate() {
            assert_eq!(info.id as usize, k + 1);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::cache::Sweeper;
use crate::error::Result;
use crate::qform::GramMatrix;
use crate::repenum::ProgressionSpec;

/// True iff `c t^2 = a (mod d)` for some `t` in `[0, d)`.
pub fn square_class_feasible(c: u64, prog: &ProgressionSpec) -> bool {
    square_class_witness(c, prog).is_some()
}

/// Smallest `t` in `[0, d)` with `c t^2 = a (mod d)`.
pub fn square_class_witness(c: u64, prog: &ProgressionSpec) -> Option<u64> {
    let d = prog.modulus as u128;
    (0..prog.modulus).find(|&t| (c as u128 % d) * ((t as u128 * t as u128) % d) % d == prog.residue as u128)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub progression: ProgressionSpec,
    pub bound: u64,
    pub checked: u64,
    /// First element of the progression represented by none of the forms.
    pub counterexample: Option<u64>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks that every `m <= bound` in the progression is represented by one of `forms`.
pub fn empirical_genus_coverage(
    forms: &[GramMatrix],
    prog: &ProgressionSpec,
    bound: u64,
    sweeper: &Sweeper,
) -> Result<CoverageReport> {
    let maps = forms
        .iter()
        .map(|f| sweeper.bitmap(f, bound))
        .collect::<Result<Vec<_>>>()?;
    let mut checked = 0;
    let mut counterexample = None;
    for m in prog.iter_up_to(bound) {
        checked += 1;
        if !maps.iter().any(|b| b.get(m)) {
            counterexample = Some(m);
            break;
        }
    }
    Ok(CoverageReport {
        progression: *prog,
        bound,
        checked,
        counterexample,
    })
}

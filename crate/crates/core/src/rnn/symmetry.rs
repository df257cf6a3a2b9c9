//! Zero-magnetisation projection of the conditional distributions.

use serde::{Deserialize, Serialize};

use super::Conditional;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryMode {
    None,
    U1,
}

impl std::str::FromStr for SymmetryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "u1" => Ok(Self::U1),
            other => Err(Error::InvalidArgument(format!(
                "unknown symmetry mode {other:?}"
            ))),
        }
    }
}

impl SymmetryMode {
    pub fn check_sites(self, n: usize) -> Result<()> {
        if self == Self::U1 && !n.is_multiple_of(2) {
            return Err(Error::OddN(n));
        }
        Ok(())
    }
}

/// Which spin values remain allowed given the spins seen so far.
#[inline]
pub(crate) fn allowed(n_up: usize, n_down: usize, half: usize) -> [bool; 2] {
    [n_up < half, n_down < half]
}

/// Masks channels whose quota of `N/2` is exhausted and renormalises.
///
/// Counters count the spins `σ_1..σ_{i-1}` already placed; the fixed
/// initial input never counts.
pub fn u1_project(y: Conditional, n_up: usize, n_down: usize, n: usize) -> Result<Conditional> {
    if !n.is_multiple_of(2) || n_up + n_down >= n || 2 * n_up > n || 2 * n_down > n {
        return Err(Error::InvalidCounters { n_up, n_down, n });
    }
    Ok(project(y, n_up, n_down, n / 2))
}

#[inline]
pub(crate) fn project(y: Conditional, n_up: usize, n_down: usize, half: usize) -> Conditional {
    let [keep0, keep1] = allowed(n_up, n_down, half);
    let p0 = if keep0 { y.p0 } else { 0.0 };
    let p1 = if keep1 { y.p1 } else { 0.0 };
    match (keep0, keep1) {
        (true, true) => y,
        _ => {
            let z = p0 + p1;
            Conditional {
                p0: p0 / z,
                p1: p1 / z,
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the band `|X| <= 2/(3 sqrt 3)` on which the cubic
/// `psi^3 - psi = X` has three real roots.
pub const BAND_EDGE: f64 = 0.384_900_179_459_750_5;

const TWO_OVER_SQRT3: f64 = 1.154_700_538_379_251_7;
const CLAMP_TOL: f64 = 1e-12;

/// Root selector `j` of `psi^3 - psi = X`:
/// `psi_j(X) = (2/sqrt 3) cos[(1/3) arccos((3 sqrt 3 / 2) X) - 2 pi j / 3]`.
///
/// Branch 0 covers `psi >= 1/sqrt 3`, branch 1 `|psi| <= 1/sqrt 3` and
/// branch 2 `psi <= -1/sqrt 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BranchIndex(u8);

impl BranchIndex {
    pub const ALL: [BranchIndex; 3] = [BranchIndex(0), BranchIndex(1), BranchIndex(2)];

    pub fn new(j: u8) -> Result<Self> {
        if j <= 2 {
            Ok(Self(j))
        } else {
            Err(Error::InvalidParams(format!("branch index {j} not in 0..=2")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Branch whose range contains `psi`; the level `1/sqrt 3` counts as
    /// branch 0 and `-1/sqrt 3` as branch 2.
    pub fn of_psi(psi: f64) -> Self {
        let s = 1.0 / 3f64.sqrt();
        if psi >= s {
            Self(0)
        } else if psi <= -s {
            Self(2)
        } else {
            Self(1)
        }
    }

    /// Range of `psi` values on this branch. The outer branches are unbounded.
    pub fn psi_range(self) -> (f64, f64) {
        let s = 1.0 / 3f64.sqrt();
        match self.0 {
            0 => (s, f64::INFINITY),
            1 => (-s, s),
            _ => (f64::NEG_INFINITY, -s),
        }
    }

    /// Real value of the branch at `x`, or `None` where the branch is complex.
    ///
    /// Branch 0 stays real for `X > 2/(3 sqrt 3)` and branch 2 for
    /// `X < -2/(3 sqrt 3)` (the single real root, continued through the
    /// hyperbolic form); leaving the band through the opposite edge means
    /// `3 psi^2 - 1` has vanished and the trajectory is singular.
    pub fn psi(self, x: f64) -> Option<f64> {
        let y = x / BAND_EDGE;
        let trig = |y: f64| {
            let theta = y.clamp(-1.0, 1.0).acos() / 3.0;
            TWO_OVER_SQRT3 * (theta - 2.0 * std::f64::consts::PI * self.0 as f64 / 3.0).cos()
        };
        if y.abs() <= 1.0 + CLAMP_TOL {
            return Some(trig(y));
        }
        match (self.0, y > 0.0) {
            (0, true) => Some(TWO_OVER_SQRT3 * (y.acosh() / 3.0).cosh()),
            (2, false) => Some(-TWO_OVER_SQRT3 * ((-y).acosh() / 3.0).cosh()),
            _ => None,
        }
    }

    /// `X = psi^3 - psi`.
    pub fn to_x(psi: f64) -> f64 {
        psi * psi * psi - psi
    }
}

impl TryFrom<u8> for BranchIndex {
    type Error = Error;
    fn try_from(j: u8) -> Result<Self> {
        Self::new(j)
    }
}

impl From<BranchIndex> for u8 {
    fn from(b: BranchIndex) -> u8 {
        b.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roots_of_zero() {
        let vals: Vec<f64> = BranchIndex::ALL.iter().map(|b| b.psi(0.0).unwrap()).collect();
        assert!((vals[0] - 1.0).abs() < 1e-15);
        assert!(vals[1].abs() < 1e-15);
        assert!((vals[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn band_edge_constant() {
        assert!((BAND_EDGE - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-16);
    }

    #[test]
    fn singular_exits() {
        let b = |j| BranchIndex::new(j).unwrap();
        assert!(b(1).psi(0.39).is_none());
        assert!(b(1).psi(-0.39).is_none());
        assert!(b(0).psi(-0.39).is_none());
        assert!(b(2).psi(0.39).is_none());
        assert!(b(0).psi(0.5).is_some());
        assert!(b(2).psi(-0.5).is_some());
        assert!(BranchIndex::new(3).is_err());
    }

    proptest! {
        #[test]
        fn branch_inverts_the_cubic(psi in -1.6f64..1.6) {
            let s = 1.0 / 3f64.sqrt();
            prop_assume!((psi.abs() - s).abs() > 1e-6);
            let j = if psi > s { 0 } else if psi >= -s { 1 } else { 2 };
            let b = BranchIndex::new(j).unwrap();
            let back = b.psi(BranchIndex::to_x(psi)).unwrap();
            prop_assert!((back - psi).abs() < 1e-7, "{} vs {}", back, psi);
        }
    }
}

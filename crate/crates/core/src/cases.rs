use serde::{Deserialize, Serialize};

use crate::params::ProblemParams;

pub(crate) const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Parameter regions in which the extremum bounds
/// `<psi> - f0/v <= psi <= <psi> + f0/v` keep a reduced-model trajectory away
/// from the singular levels `psi = +-1/sqrt(3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `1/sqrt(3) < <psi> - f0/v`
    Case0,
    /// `-1/sqrt(3) < <psi> - f0/v` and `<psi> + f0/v < 1/sqrt(3)`
    Case1,
    /// `<psi> + f0/v < -1/sqrt(3)`
    Case2,
    NoCase,
}

impl Case {
    /// The cubic branch whose range contains every admissible value in this case.
    pub fn branch(self) -> Option<usize> {
        match self {
            Case::Case0 => Some(0),
            Case::Case1 => Some(1),
            Case::Case2 => Some(2),
            Case::NoCase => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub case: Case,
    /// `<psi> > f0/v + sqrt(4 (f0/v)^2 + 1/3)`
    pub unique_case0: bool,
    /// `<psi> < -f0/v - sqrt(4 (f0/v)^2 + 1/3)`
    pub unique_case2: bool,
    pub diagnostic: Option<String>,
}

/// Evaluates the three case inequalities with `r = f0 / v`. Boundary
/// equalities fall through to `NoCase`.
pub fn classify_case(params: &ProblemParams) -> CaseLabel {
    if params.v == 0.0 || !params.v.is_finite() {
        return CaseLabel {
            case: Case::NoCase,
            unique_case0: false,
            unique_case2: false,
            diagnostic: Some("cases are defined through f0/v; v must be nonzero".into()),
        };
    }
    let r = params.f0 / params.v;
    let m = params.mean_psi;
    let case = if m - r > INV_SQRT3 {
        Case::Case0
    } else if m - r > -INV_SQRT3 && m + r < INV_SQRT3 {
        Case::Case1
    } else if m + r < -INV_SQRT3 {
        Case::Case2
    } else {
        Case::NoCase
    };
    let bound = r + (4.0 * r * r + 1.0 / 3.0).sqrt();
    CaseLabel {
        case,
        unique_case0: m > bound,
        unique_case2: m < -bound,
        diagnostic: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        let l = classify_case(&ProblemParams::new(0.7, 0.05, 1.0));
        assert_eq!(l.case, Case::Case0);
        assert!(l.unique_case0);
        assert!(!l.unique_case2);

        let l = classify_case(&ProblemParams::new(0.0, 0.5, 1.0));
        assert_eq!(l.case, Case::Case1);
        assert!(!l.unique_case0 && !l.unique_case2);
    }

    #[test]
    fn uniqueness_threshold_value() {
        // 0.05 + sqrt(0.01 + 1/3) = 0.635946...
        let r: f64 = 0.05;
        let bound = r + (4.0 * r * r + 1.0 / 3.0).sqrt();
        assert!((bound - 0.635_946_527_708_231_6).abs() < 1e-12);
        assert!(classify_case(&ProblemParams::new(0.636, 0.05, 1.0)).unique_case0);
        assert!(!classify_case(&ProblemParams::new(0.635, 0.05, 1.0)).unique_case0);
    }

    #[test]
    fn zero_speed_has_no_case() {
        let l = classify_case(&ProblemParams::new(0.9, 0.1, 0.0));
        assert_eq!(l.case, Case::NoCase);
        assert!(l.diagnostic.is_some());
    }

    #[test]
    fn boundary_equality_is_no_case() {
        let p = ProblemParams::new(INV_SQRT3 + 0.25, 0.25, 1.0);
        // exact equality in floating point is not guaranteed, so build it
        let p = ProblemParams {
            mean_psi: p.f0 / p.v + INV_SQRT3,
            ..p
        };
        if p.mean_psi - p.f0 / p.v == INV_SQRT3 {
            assert_eq!(classify_case(&p).case, Case::NoCase);
        }
    }

    #[test]
    fn wedges_on_a_fine_grid() {
        // Case 0 occupies f0 < <psi> - 1/sqrt(3) and Case 1 the triangle under
        // f0 < 1/sqrt(3) - |<psi>| at v = 1.
        for i in 0..=200 {
            for j in 0..=100 {
                let m = -1.2 + 2.4 * i as f64 / 200.0;
                let f0 = j as f64 / 100.0;
                let c = classify_case(&ProblemParams::new(m, f0, 1.0)).case;
                let expected = if f0 < m - INV_SQRT3 {
                    Case::Case0
                } else if f0 < INV_SQRT3 - m.abs() {
                    Case::Case1
                } else if f0 < -m - INV_SQRT3 {
                    Case::Case2
                } else {
                    Case::NoCase
                };
                assert_eq!(c, expected, "at ({m}, {f0})");
            }
        }
    }

    proptest! {
        #[test]
        fn at_most_one_case_and_mirror_symmetry(m in -2.0f64..2.0, f0 in 0.0f64..2.0, v in 0.1f64..3.0) {
            let r = f0 / v;
            let holds = [
                INV_SQRT3 < m - r,
                m - r > -INV_SQRT3 && m + r < INV_SQRT3,
                m + r < -INV_SQRT3,
            ];
            prop_assert!(holds.iter().filter(|&&b| b).count() <= 1);

            let a = classify_case(&ProblemParams::new(m, f0, v));
            let b = classify_case(&ProblemParams::new(-m, f0, v));
            prop_assert_eq!(a.case == Case::Case0, b.case == Case::Case2);
            prop_assert_eq!(a.case == Case::Case1, b.case == Case::Case1);
            prop_assert_eq!(a.unique_case0, b.unique_case2);
            prop_assert_eq!(a.unique_case2, b.unique_case0);
        }
    }
}

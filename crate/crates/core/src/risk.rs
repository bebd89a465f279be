//! The four-cell joint risk shared by every model.

use serde::{Deserialize, Serialize};

/// Probabilities of the four outcome combinations `(Y1, Y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRisk {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

impl JointRisk {
    pub const UNIFORM: JointRisk = JointRisk {
        p11: 0.25,
        p10: 0.25,
        p01: 0.25,
        p00: 0.25,
    };

    pub fn new(p11: f64, p10: f64, p01: f64, p00: f64) -> Self {
        Self { p11, p10, p01, p00 }
    }

    /// Joint risk implied by conditionally independent outcomes.
    pub fn from_independent(p1: f64, p2: f64) -> Self {
        Self {
            p11: p1 * p2,
            p10: p1 * (1.0 - p2),
            p01: (1.0 - p1) * p2,
            p00: (1.0 - p1) * (1.0 - p2),
        }
    }

    /// `P(Y1 = 1)`.
    pub fn marginal1(&self) -> f64 {
        self.p11 + self.p10
    }

    /// `P(Y2 = 1)`.
    pub fn marginal2(&self) -> f64 {
        self.p11 + self.p01
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p11, self.p10, self.p01, self.p00]
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        Self::new(p[0], p[1], p[2], p[3])
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// Every component in `[0, 1]` and the total within `tol` of one.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.as_array().iter().all(|&p| (0.0..=1.0).contains(&p)) && (self.sum() - 1.0).abs() <= tol
    }

    /// Clamp every component to at least `floor` and rescale to sum to one.
    pub fn clamped(&self, floor: f64) -> Self {
        let p = self.as_array().map(|v| v.max(floor));
        let s: f64 = p.iter().sum();
        Self::from_array(p.map(|v| v / s))
    }
}

/// `(P(Y1 = 1), P(Y2 = 1))`.
pub fn joint_to_marginals(j: &JointRisk) -> (f64, f64) {
    (j.marginal1(), j.marginal2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_marginals() {
        assert_eq!(joint_to_marginals(&JointRisk::UNIFORM), (0.5, 0.5));
    }

    #[test]
    fn product_form_round_trip() {
        for &(p1, p2) in &[(0.29, 0.23), (1e-6, 0.999), (0.5, 0.5)] {
            let j = JointRisk::from_independent(p1, p2);
            let (m1, m2) = joint_to_marginals(&j);
            assert!((m1 - p1).abs() < 1e-12 && (m2 - p2).abs() < 1e-12);
            assert!((j.p11 * j.p00 - j.p10 * j.p01).abs() < 1e-12);
            assert!(j.is_valid(1e-12));
        }
    }

    #[test]
    fn published_joint_cells_give_published_marginals() {
        let j = JointRisk::new(0.161, 0.126, 0.067, 1.0 - 0.161 - 0.126 - 0.067);
        let (m1, m2) = joint_to_marginals(&j);
        assert!((m1 - 0.287).abs() < 1e-12);
        assert!((m2 - 0.228).abs() < 1e-12);
    }

    #[test]
    fn clamping_renormalizes() {
        let j = JointRisk::new(0.5, 0.6, -0.2, 0.1).clamped(1e-12);
        assert!(j.is_valid(1e-12));
        assert!(j.p01 > 0.0);
    }
}

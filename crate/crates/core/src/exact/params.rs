use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RcBoundary {
    #[default]
    Free,
    /// All clusters touching the graph's boundary count as one.
    Wired,
}

/// Random-cluster parameters: edge weight `p`, cluster weight `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcParams {
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub bc: RcBoundary,
}

impl RcParams {
    pub fn new(p: f64, q: f64, bc: RcBoundary) -> Result<Self> {
        let params = RcParams { p, q, bc };
        params.validate()?;
        Ok(params)
    }

    pub fn free(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, RcBoundary::Free)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!("p = {} not in [0, 1]", self.p)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidArgument(format!("q = {} must be positive", self.q)));
        }
        Ok(())
    }

    /// `q` as an integer Potts state count, if it is one and at least 2.
    pub fn integer_q(&self) -> Option<u32> {
        integer_q(self.q)
    }
}

pub(crate) fn integer_q(q: f64) -> Option<u32> {
    (q >= 2.0 && q.fract() == 0.0 && q <= u32::MAX as f64).then_some(q as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PottsBoundary {
    #[default]
    Free,
    /// Exterior edges see a fixed color.
    Monochromatic(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PottsParams {
    pub beta: f64,
    pub q: u32,
    #[serde(default)]
    pub bc: PottsBoundary,
}

impl PottsParams {
    pub fn new(beta: f64, q: u32, bc: PottsBoundary) -> Result<Self> {
        let params = PottsParams { beta, q, bc };
        params.validate()?;
        Ok(params)
    }

    pub fn free(beta: f64, q: u32) -> Result<Self> {
        Self::new(beta, q, PottsBoundary::Free)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidArgument(format!("Potts q = {} must be >= 2", self.q)));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidArgument(format!("beta = {} must be >= 0", self.beta)));
        }
        if let PottsBoundary::Monochromatic(b) = self.bc {
            if b >= self.q {
                return Err(Error::InvalidArgument(format!("boundary color {b} >= q = {}", self.q)));
            }
        }
        Ok(())
    }

    /// Edge weight of the coupled random-cluster measure.
    pub fn coupled_p(&self) -> f64 {
        p_from_beta(self.q as f64, self.beta)
    }

    /// Coupled random-cluster parameters (monochromatic maps to wired).
    pub fn to_rc(&self) -> RcParams {
        let bc = match self.bc {
            PottsBoundary::Free => RcBoundary::Free,
            PottsBoundary::Monochromatic(_) => RcBoundary::Wired,
        };
        RcParams { p: self.coupled_p(), q: self.q as f64, bc }
    }
}

/// Scalar product of two colors embedded as vertices of the regular simplex
/// in R^(q-1): 1 for equal colors, -1/(q-1) otherwise.
#[inline]
pub fn dot(a: u32, b: u32, q: u32) -> f64 {
    if a == b {
        1.0
    } else {
        -1.0 / (q as f64 - 1.0)
    }
}

/// beta = -((q-1)/q) ln(1-p). Returns `f64::INFINITY` for `p = 1`.
pub fn beta_from_p(q: f64, p: f64) -> Result<f64> {
    check_q(q)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} not in [0, 1]")));
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-((q - 1.0) / q) * (-p).ln_1p())
}

/// Inverse of [`beta_from_p`]: p = 1 - exp(-beta q / (q-1)).
pub fn p_from_beta(q: f64, beta: f64) -> f64 {
    if beta == f64::INFINITY {
        return 1.0;
    }
    -(-beta * q / (q - 1.0)).exp_m1()
}

fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("coupling needs q > 1, got {q}")))
    }
}

/// Either side of the p <-> beta correspondence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    P(f64),
    Beta(f64),
}

/// Converts whichever parameter is given into the other one.
pub fn couple_params(q: u32, given: Coupling) -> Result<Coupling> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("Potts q = {q} must be >= 2")));
    }
    match given {
        Coupling::P(p) => beta_from_p(q as f64, p).map(Coupling::Beta),
        Coupling::Beta(beta) if beta >= 0.0 => Ok(Coupling::P(p_from_beta(q as f64, beta))),
        Coupling::Beta(beta) => Err(Error::InvalidArgument(format!("beta = {beta} must be >= 0"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_half() {
        let b = beta_from_p(2.0, 0.5).unwrap();
        assert!((b - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((b - 0.34657).abs() < 1e-5);
        assert_eq!(beta_from_p(3.0, 0.0).unwrap(), 0.0);
        assert_eq!(beta_from_p(2.0, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(p_from_beta(2.0, f64::INFINITY), 1.0);
    }

    #[test]
    fn roundtrip_q3() {
        for i in 0..100 {
            let p = i as f64 / 100.0;
            let Coupling::Beta(b) = couple_params(3, Coupling::P(p)).unwrap() else { panic!() };
            let Coupling::P(back) = couple_params(3, Coupling::Beta(b)).unwrap() else { panic!() };
            assert!((back - p).abs() < 1e-14, "p={p} back={back}");
        }
    }

    #[test]
    fn dot_rule() {
        assert_eq!(dot(1, 1, 3), 1.0);
        assert_eq!(dot(0, 2, 3), -0.5);
        assert_eq!(dot(0, 1, 2), -1.0);
    }

    #[test]
    fn validation() {
        assert!(RcParams::free(1.5, 2.0).is_err());
        assert!(RcParams::free(0.5, 0.0).is_err());
        assert!(PottsParams::free(0.5, 1).is_err());
        assert!(PottsParams::new(0.5, 3, PottsBoundary::Monochromatic(3)).is_err());
        assert!(couple_params(2, Coupling::Beta(-1.0)).is_err());
        assert_eq!(RcParams::free(0.5, 3.0).unwrap().integer_q(), Some(3));
        assert_eq!(RcParams::free(0.5, 1.5).unwrap().integer_q(), None);
    }
}

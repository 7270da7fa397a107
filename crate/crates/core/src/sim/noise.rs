use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Depolarizing gate noise plus symmetric readout flips.
///
/// `scale` multiplies the gate error probabilities only; readout error is a
/// property of measurement and is not amplified by folding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub p1: f64,
    pub p2: f64,
    pub p_ro: f64,
    pub scale: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            p1: 2e-4,
            p2: 3e-3,
            p_ro: 1e-2,
            scale: 1.0,
        }
    }
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            p_ro: 0.0,
            scale: 1.0,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        Self { scale, ..self }
    }

    pub fn is_noiseless(&self) -> bool {
        (self.p1 == 0.0 && self.p2 == 0.0 || self.scale == 0.0) && self.p_ro == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_ro", self.p_ro)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidNoise(format!("noise scale {} must be finite and >= 0", self.scale)));
        }
        Ok(())
    }

    /// Depolarizing probability after a gate on `arity` qubits. Gates wider than
    /// two qubits use the two-qubit rate on their whole support.
    pub fn gate_probability(&self, arity: usize) -> f64 {
        let p = if arity <= 1 { self.p1 } else { self.p2 };
        (self.scale * p).min(1.0)
    }
}

/// Parses `p1,p2,p_ro`.
impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidNoise(format!("expected `p1,p2,p_ro`, got `{s}`")));
        }
        let mut v = [0.0; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|e| Error::InvalidNoise(format!("bad probability `{part}`: {e}")))?;
        }
        let spec = NoiseSpec {
            p1: v[0],
            p2: v[1],
            p_ro: v[2],
            scale: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let n: NoiseSpec = "1e-3, 0.01,0.02".parse().unwrap();
        assert_eq!((n.p1, n.p2, n.p_ro), (1e-3, 0.01, 0.02));
        assert!("0.1,0.2".parse::<NoiseSpec>().is_err());
        assert!("0.1,1.2,0".parse::<NoiseSpec>().is_err());
        assert!(NoiseSpec::default().with_scale(-1.0).validate().is_err());
    }

    #[test]
    fn scaled_probability_saturates() {
        let n = NoiseSpec::default().with_scale(1000.0);
        assert_eq!(n.gate_probability(2), 1.0);
        assert!((n.gate_probability(1) - 0.2).abs() < 1e-15);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constitutive constants of the Cosserat model.
///
/// Field names double as the keys of the JSON parameter files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub chi1: f64,
    pub chi3: f64,
    pub rho: f64,
    pub rho_rot: f64,
    pub mu_c: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl MaterialParams {
    /// Reference parameter set of regime (a).
    pub const TYPE_A: MaterialParams = MaterialParams {
        kappa1: 0.7,
        kappa2: 0.0,
        kappa3: 0.5,
        chi1: 0.5,
        chi3: 0.1,
        rho: 0.1,
        rho_rot: 0.1,
        mu_c: 0.3,
        lambda: 1.0,
        mu: 0.5,
    };

    /// Reference set labelled (b): type (a) with `mu_c = 1.2`.
    pub const TYPE_B: MaterialParams = MaterialParams {
        mu_c: 1.2,
        ..Self::TYPE_A
    };

    /// Type (c): `3 chi1 - chi3 = 0`.
    pub const TYPE_C: MaterialParams = MaterialParams {
        chi3: 1.5,
        ..Self::TYPE_A
    };

    /// Type (d): type (c) with `kappa1 = 3` so that `v_elas = v_rot`.
    pub const TYPE_D: MaterialParams = MaterialParams {
        kappa1: 3.0,
        ..Self::TYPE_C
    };

    pub fn named(name: &str) -> Option<MaterialParams> {
        match name {
            "a" => Some(Self::TYPE_A),
            "b" => Some(Self::TYPE_B),
            "c" => Some(Self::TYPE_C),
            "d" => Some(Self::TYPE_D),
            _ => None,
        }
    }

    /// Checks finiteness and the admissibility conditions needed for real
    /// wave speeds and a non-negative couple modulus.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("kappa3", self.kappa3),
            ("chi1", self.chi1),
            ("chi3", self.chi3),
            ("rho", self.rho),
            ("rho_rot", self.rho_rot),
            ("mu_c", self.mu_c),
            ("lambda", self.lambda),
            ("mu", self.mu),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        let checks = [
            (self.rho > 0.0, "rho > 0"),
            (self.rho_rot > 0.0, "rho_rot > 0"),
            (self.mu > 0.0, "mu > 0"),
            (self.mu_c >= 0.0, "mu_c >= 0"),
            (self.lambda + 2.0 * self.mu > 0.0, "lambda + 2 mu > 0"),
            (self.kappa1 + 6.0 * self.kappa3 > 0.0, "kappa1 + 6 kappa3 > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::InvalidParams(format!("violated invariant {what}")));
            }
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// `3 chi1 - chi3`, the combination that couples the two wave equations.
    pub fn chi_coupling(&self) -> f64 {
        3.0 * self.chi1 - self.chi3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sets_are_admissible() {
        for p in [
            MaterialParams::TYPE_A,
            MaterialParams::TYPE_B,
            MaterialParams::TYPE_C,
            MaterialParams::TYPE_D,
        ] {
            p.validate().unwrap();
        }
        assert_eq!(MaterialParams::TYPE_C.chi_coupling(), 0.0);
    }

    #[test]
    fn rejects_each_invariant() {
        let base = MaterialParams::TYPE_A;
        let bad = [
            MaterialParams { rho: 0.0, ..base },
            MaterialParams { rho_rot: -1.0, ..base },
            MaterialParams { mu: 0.0, ..base },
            MaterialParams { mu_c: -0.1, ..base },
            MaterialParams { lambda: -2.0, ..base },
            MaterialParams { kappa1: -3.0, ..base },
            MaterialParams { chi1: f64::NAN, ..base },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::InvalidParams(_))), "{p:?}");
        }
    }

    #[test]
    fn json_requires_all_keys() {
        let missing = r#"{"kappa1":0.7,"kappa2":0,"kappa3":0.5,"chi1":0.5,"chi3":0.1,
            "rho":0.1,"rho_rot":0.1,"mu_c":0.3,"lambda":1.0}"#;
        assert!(serde_json::from_str::<MaterialParams>(missing).is_err());
        let full = serde_json::to_string(&MaterialParams::TYPE_A).unwrap();
        let back: MaterialParams = serde_json::from_str(&full).unwrap();
        assert_eq!(back, MaterialParams::TYPE_A);
    }
}

//! T-norms and residua on the unit interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResiduatedLogic {
    Godel,
    Lukasiewicz,
    Product,
}

pub const ALL_LOGICS: [ResiduatedLogic; 3] = [
    ResiduatedLogic::Godel,
    ResiduatedLogic::Lukasiewicz,
    ResiduatedLogic::Product,
];

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{x} is outside [0, 1]")))
    }
}

impl ResiduatedLogic {
    pub fn name(self) -> &'static str {
        match self {
            ResiduatedLogic::Godel => "godel",
            ResiduatedLogic::Lukasiewicz => "lukasiewicz",
            ResiduatedLogic::Product => "product",
        }
    }

    pub fn tnorm(self, x: f64, y: f64) -> Result<f64> {
        check_unit(x)?;
        check_unit(y)?;
        Ok(self.tnorm_unchecked(x, y))
    }

    pub(crate) fn tnorm_unchecked(self, x: f64, y: f64) -> f64 {
        match self {
            ResiduatedLogic::Godel => x.min(y),
            ResiduatedLogic::Lukasiewicz => (x + y - 1.0).max(0.0),
            ResiduatedLogic::Product => x * y,
        }
    }

    /// The implication `x -> y` right adjoint to the t-norm.
    pub fn residuum(self, x: f64, y: f64) -> Result<f64> {
        check_unit(x)?;
        check_unit(y)?;
        Ok(match self {
            ResiduatedLogic::Godel => {
                if x <= y {
                    1.0
                } else {
                    y
                }
            }
            ResiduatedLogic::Lukasiewicz => (1.0 - x + y).min(1.0),
            // x = 0 falls in the first branch.
            ResiduatedLogic::Product => {
                if x <= y {
                    1.0
                } else {
                    y / x
                }
            }
        })
    }

    pub fn negation(self, x: f64) -> Result<f64> {
        self.residuum(x, 0.0)
    }

    pub fn biresiduum(self, x: f64, y: f64) -> Result<f64> {
        Ok(self.residuum(x, y)?.min(self.residuum(y, x)?))
    }

    /// T-norm folded over componentwise pairs.
    pub fn tnorm_vec(self, xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
        if xs.len() != ys.len() {
            return Err(Error::Domain(format!(
                "vectors of length {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        xs.iter().zip(ys).map(|(x, y)| self.tnorm(*x, *y)).collect()
    }
}

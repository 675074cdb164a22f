use std::fmt;
use std::str::FromStr;

use crate::dynamics::SpectralState;
use crate::error::{Error, Result};

/// A scalar functional of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `‖u‖²`.
    NormSq,
    Re(i64),
    Im(i64),
}

impl Observable {
    pub fn eval(&self, u: &SpectralState) -> f64 {
        match *self {
            Observable::NormSq => u.norm_sqr(),
            Observable::Re(k) => u.get(k).map_or(0.0, |c| c.re),
            Observable::Im(k) => u.get(k).map_or(0.0, |c| c.im),
        }
    }

    /// Fails when the observable refers to a mode outside the grid.
    pub fn check(&self, n_modes: usize) -> Result<()> {
        match *self {
            Observable::Re(k) | Observable::Im(k) if SpectralState::index_of(n_modes, k).is_none() => {
                Err(Error::config(format!("observable {self} refers to a mode outside the grid")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::NormSq => write!(f, "norm2"),
            Observable::Re(k) => write!(f, "re:{k}"),
            Observable::Im(k) => write!(f, "im:{k}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "norm2" {
            return Ok(Observable::NormSq);
        }
        let bad = || Error::config(format!("unknown observable '{s}' (expected norm2, re:K or im:K)"));
        let (kind, k) = s.split_once(':').ok_or_else(bad)?;
        let k: i64 = k.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "re" => Ok(Observable::Re(k)),
            "im" => Ok(Observable::Im(k)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservableSet(pub Vec<Observable>);

impl Default for ObservableSet {
    fn default() -> Self {
        ObservableSet(vec![
            Observable::NormSq,
            Observable::Re(0),
            Observable::Im(0),
            Observable::Re(1),
            Observable::Im(1),
        ])
    }
}

impl ObservableSet {
    pub fn parse(names: &[String]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::config("observable set is empty"));
        }
        names.iter().map(|s| s.parse()).collect::<Result<_>>().map(ObservableSet)
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }

    pub fn eval(&self, u: &SpectralState) -> Vec<f64> {
        self.0.iter().map(|o| o.eval(u)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, n_modes: usize) -> Result<()> {
        self.0.iter().try_for_each(|o| o.check(n_modes))
    }
}

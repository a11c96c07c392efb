use std::fmt;

use serde::{Deserialize, Serialize};

/// Non-fatal conditions that results carry along into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Probability mass lost beyond (or sitting at) the truncation edge.
    TailMass { mass: f64, n_max: usize },
    /// Loss deconvolution with a small efficiency ratio amplifies noise.
    IllConditioned { ratio: f64, threshold: f64 },
    /// Dark counts are part of the click model but not of the conversion matrix.
    DarkCountsIgnored { nu: f64 },
    /// A fitted efficiency came out negative.
    NegativeEfficiency { eta: f64 },
    /// Deconvolution produced negative quasi-probabilities.
    Negativity { mass: f64, worst_index: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::TailMass { mass, n_max } => {
                write!(f, "tail mass {mass:e} at or beyond truncation n_max = {n_max}")
            }
            Warning::IllConditioned { ratio, threshold } => write!(
                f,
                "efficiency ratio {ratio} below {threshold}: loss inversion strongly amplifies noise"
            ),
            Warning::DarkCountsIgnored { nu } => {
                write!(f, "dark-count rate {nu} is not represented in the conversion matrix")
            }
            Warning::NegativeEfficiency { eta } => write!(f, "fitted efficiency is negative ({eta})"),
            Warning::Negativity { mass, worst_index } => write!(
                f,
                "negative quasi-probability mass {mass:e} (largest at n = {worst_index})"
            ),
        }
    }
}

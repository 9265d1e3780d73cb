use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PulseProfile;
use crate::error::{FloquetError, Result};

/// Time window of the overline average of `G^{2p}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingConvention {
    /// Average over the subcycle in which the axis is active.
    Subcycle,
    /// Average over the whole `N T` cycle; the subcycle value divided by `N`.
    FullCycle,
}

impl AveragingConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::Subcycle => "subcycle",
            Self::FullCycle => "full_cycle",
        }
    }

    /// Fraction applied to a per-subcycle moment.
    pub fn window_fraction(self, n_subcycles: usize) -> f64 {
        match self {
            Self::Subcycle => 1.0,
            Self::FullCycle => 1.0 / n_subcycles as f64,
        }
    }
}

impl fmt::Display for AveragingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AveragingConvention {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subcycle" => Ok(Self::Subcycle),
            "full_cycle" | "full-cycle" | "fullcycle" => Ok(Self::FullCycle),
            other => Err(FloquetError::Parse(format!(
                "unknown averaging convention '{other}' (expected subcycle or full_cycle)"
            ))),
        }
    }
}

/// `overline{G^{2p}}` for `p = 1..=p_max`, independent of the strength `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    moments: Vec<f64>,
    convention: AveragingConvention,
    /// `sup |G|`, bounding moments past `p_max`.
    sup_abs: f64,
    /// Fraction of the averaging window during which `G` is nonzero.
    window_fraction: f64,
}

impl MomentTable {
    /// Builds a table from precomputed values (`moments[0]` is `p = 1`).
    pub fn from_values(
        moments: Vec<f64>,
        convention: AveragingConvention,
        sup_abs: f64,
        window_fraction: f64,
    ) -> Result<Self> {
        if moments.is_empty() {
            return Err(FloquetError::InvalidArgument(
                "moment table needs p_max >= 1".into(),
            ));
        }
        if let Some(p) = moments.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(FloquetError::InvalidArgument(format!(
                "moment for p = {} must be finite and non-negative, got {}",
                p + 1,
                moments[p]
            )));
        }
        Ok(Self {
            moments,
            convention,
            sup_abs,
            window_fraction,
        })
    }

    pub fn compute(
        profile: &PulseProfile,
        p_max: usize,
        convention: AveragingConvention,
    ) -> Result<Self> {
        if p_max == 0 {
            return Err(FloquetError::InvalidArgument(
                "p_max must be at least 1".into(),
            ));
        }
        let fraction = convention.window_fraction(profile.n_subcycles());
        let a = profile.amplitude;
        let moments: Result<Vec<f64>> = (1..=p_max)
            .into_par_iter()
            .map(|p| Ok(profile.shape.subcycle_moment(p)? * a.powi(2 * p as i32) * fraction))
            .collect();
        Self::from_values(
            moments?,
            convention,
            profile.shape.sup_abs_big_g() * a.abs(),
            fraction,
        )
    }

    pub fn p_max(&self) -> usize {
        self.moments.len()
    }

    /// `overline{G^{2p}}`, `p >= 1`.
    pub fn moment(&self, p: usize) -> f64 {
        self.moments[p - 1]
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn convention(&self) -> AveragingConvention {
        self.convention
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    /// Moment if tabulated, else the bound `fraction * sup|G|^{2p}`.
    pub fn moment_or_bound(&self, p: usize) -> f64 {
        if p <= self.moments.len() {
            self.moments[p - 1]
        } else {
            self.window_fraction * self.sup_abs.powi(2 * p as i32)
        }
    }

    pub fn truncated(&self, p_max: usize) -> Self {
        Self {
            moments: self.moments[..p_max.min(self.moments.len())].to_vec(),
            ..self.clone()
        }
    }
}

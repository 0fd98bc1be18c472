//! Every numeric threshold used by the verification and classification code.

use serde::{Deserialize, Serialize};

/// Which curvature values the isotropy fits consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TolProfile {
    /// Closed forms; verdicts at the closed-form tolerance.
    #[default]
    Strict,
    /// Finite-difference oracles; verdicts at the oracle noise floors.
    Fd,
}

impl TolProfile {
    pub fn name(self) -> &'static str {
        match self {
            TolProfile::Strict => "strict",
            TolProfile::Fd => "fd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub constancy: f64,
    pub spray_rel: f64,
    pub s_rel: f64,
    pub e_rel: f64,
    pub divergence_identity_abs: f64,
    pub homogeneity_rel: f64,
    pub euler_rel: f64,
    pub angular_euler_rel: f64,
    pub reconstruction: f64,
    pub frame: f64,
    pub db_check: f64,
    pub fit_closed: f64,
    pub fit_s_fd: f64,
    pub fit_e_fd: f64,
    pub c_match: f64,
    pub beta_zero: f64,
    pub beta_fit: f64,
    pub ode: f64,
    pub condition_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            constancy: 1e-8,
            spray_rel: 1e-7,
            s_rel: 1e-5,
            e_rel: 1e-4,
            divergence_identity_abs: 1e-6,
            homogeneity_rel: 1e-8,
            euler_rel: 1e-6,
            angular_euler_rel: 1e-10,
            reconstruction: 1e-10,
            frame: 1e-12,
            db_check: 1e-6,
            fit_closed: 1e-8,
            fit_s_fd: 1e-6,
            fit_e_fd: 1e-4,
            c_match: 1e-3,
            beta_zero: 1e-10,
            beta_fit: 1e-8,
            ode: 1e-8,
            condition_max: 1e10,
        }
    }
}

impl Tolerances {
    pub fn fit_s(&self, profile: TolProfile) -> f64 {
        match profile {
            TolProfile::Strict => self.fit_closed,
            TolProfile::Fd => self.fit_s_fd,
        }
    }

    pub fn fit_e(&self, profile: TolProfile) -> f64 {
        match profile {
            TolProfile::Strict => self.fit_closed,
            TolProfile::Fd => self.fit_e_fd,
        }
    }
}

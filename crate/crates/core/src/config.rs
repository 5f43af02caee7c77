//! Scenario parameterization as read from configuration files.
//!
//! All quantities are stored in the units a person would type: densities per
//! km², angles in degrees, powers and path-loss constants in dB. [`Scenario`]
//! converts them once into the linear/SI form used by the computations.
//!
//! [`Scenario`]: crate::model::Scenario

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Default noise power in dB, in the same unit system as `p_tx_db`.
///
/// Typical received powers under the reference scenario are between -95 dB
/// (drone, LoS) and -125 dB (ground, NLoS cell edge), so this level leaves
/// ground users noise-affected without making them noise-limited.
pub const DEFAULT_N0_DB: f64 = -120.0;

/// Default drone antenna beamwidth in degrees (a nearly omnidirectional cone).
pub const DEFAULT_PHI_B_DEG: f64 = 170.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentParams {
    /// Fraction of land area covered by buildings.
    pub a: f64,
    /// Buildings per km².
    pub b: f64,
    /// Rayleigh scale of the building height, meters.
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Path loss at 1 m for LoS links, dB.
    pub a_los_db: f64,
    /// Path loss at 1 m for NLoS links, dB.
    pub a_nlos_db: f64,
    pub m_los: u32,
    pub m_nlos: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsAntenna {
    pub theta_b_deg: f64,
    pub theta_t_deg: f64,
    pub g_main: f64,
    pub g_side: f64,
    pub h_bs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserKind {
    Ground,
    Drone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserTerminal {
    pub kind: UserKind,
    #[serde(default)]
    pub h_d: f64,
    #[serde(default = "default_phi_b")]
    pub phi_b_deg: f64,
}

fn default_phi_b() -> f64 {
    DEFAULT_PHI_B_DEG
}

fn default_n0_db() -> f64 {
    DEFAULT_N0_DB
}

/// Complete network, channel, user and environment parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Base-station density per km².
    pub lambda_bs: f64,
    pub p_tx_db: f64,
    /// Noise power, dB. `-inf` means noiseless.
    #[serde(default = "default_n0_db")]
    pub n0_db: f64,
    /// Linear SINR threshold.
    pub threshold_t: f64,
    pub environment: EnvironmentParams,
    pub channel: ChannelParams,
    pub antenna: BsAntenna,
    pub user: UserTerminal,
}

impl ScenarioConfig {
    /// Reference parameter set with a drone at 100 m and a 170° antenna.
    pub fn reference_drone() -> Self {
        Self {
            lambda_bs: 10.0,
            p_tx_db: -6.0,
            n0_db: DEFAULT_N0_DB,
            threshold_t: 0.3,
            environment: EnvironmentParams {
                a: 0.3,
                b: 500.0,
                c: 15.0,
            },
            channel: ChannelParams {
                alpha_los: 2.09,
                alpha_nlos: 3.75,
                a_los_db: -41.1,
                a_nlos_db: -32.9,
                m_los: 1,
                m_nlos: 3,
            },
            antenna: BsAntenna {
                theta_b_deg: 30.0,
                theta_t_deg: 8.0,
                g_main: 10.0,
                g_side: 0.5,
                h_bs: 30.0,
            },
            user: UserTerminal {
                kind: UserKind::Drone,
                h_d: 100.0,
                phi_b_deg: DEFAULT_PHI_B_DEG,
            },
        }
    }

    /// Reference parameter set for a ground user.
    pub fn reference_ground() -> Self {
        Self::reference_drone().with_ground_user()
    }

    pub fn with_ground_user(mut self) -> Self {
        self.user.kind = UserKind::Ground;
        self.user.h_d = 0.0;
        self
    }

    pub fn with_drone_altitude(mut self, h_d: f64) -> Self {
        self.user.kind = UserKind::Drone;
        self.user.h_d = h_d;
        self
    }

    pub fn is_drone(&self) -> bool {
        self.user.kind == UserKind::Drone
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(s).map_err(|e| ConfigError::new("<file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive_finite("lambda_bs", self.lambda_bs)?;
        finite("p_tx_db", self.p_tx_db)?;
        if self.n0_db.is_nan() || self.n0_db == f64::INFINITY {
            return Err(ConfigError::new("n0_db", "must be finite or -inf"));
        }
        positive_finite("threshold_t", self.threshold_t)?;

        let env = &self.environment;
        if !(env.a > 0.0 && env.a < 1.0) {
            return Err(ConfigError::new("environment.a", format!("must lie in (0, 1), got {}", env.a)));
        }
        positive_finite("environment.b", env.b)?;
        positive_finite("environment.c", env.c)?;

        let ch = &self.channel;
        positive_finite("channel.alpha_los", ch.alpha_los)?;
        positive_finite("channel.alpha_nlos", ch.alpha_nlos)?;
        finite("channel.a_los_db", ch.a_los_db)?;
        finite("channel.a_nlos_db", ch.a_nlos_db)?;
        if ch.m_los == 0 {
            return Err(ConfigError::new("channel.m_los", "must be a positive integer"));
        }
        if ch.m_nlos == 0 {
            return Err(ConfigError::new("channel.m_nlos", "must be a positive integer"));
        }

        let ant = &self.antenna;
        if !(ant.theta_b_deg > 0.0 && ant.theta_b_deg < 180.0) {
            return Err(ConfigError::new(
                "antenna.theta_b_deg",
                format!("must lie in (0, 180), got {}", ant.theta_b_deg),
            ));
        }
        finite("antenna.theta_t_deg", ant.theta_t_deg)?;
        let upper = ant.theta_t_deg + ant.theta_b_deg / 2.0;
        let lower = ant.theta_t_deg - ant.theta_b_deg / 2.0;
        if upper >= 90.0 || lower <= -90.0 {
            return Err(ConfigError::new(
                "antenna.theta_t_deg",
                "mainlobe edges theta_t +/- theta_b/2 must stay within (-90, 90) degrees",
            ));
        }
        positive_finite("antenna.g_side", ant.g_side)?;
        positive_finite("antenna.g_main", ant.g_main)?;
        if ant.g_main < ant.g_side {
            return Err(ConfigError::new("antenna.g_main", "must be at least antenna.g_side"));
        }
        if !(ant.h_bs >= 0.0 && ant.h_bs.is_finite()) {
            return Err(ConfigError::new("antenna.h_bs", "must be finite and non-negative"));
        }

        let user = &self.user;
        match user.kind {
            UserKind::Ground => {
                if user.h_d != 0.0 {
                    return Err(ConfigError::new("user.h_d", "a ground user sits at altitude 0"));
                }
            }
            UserKind::Drone => {
                if !(user.h_d.is_finite() && user.h_d > ant.h_bs) {
                    return Err(ConfigError::new(
                        "user.h_d",
                        format!("drone altitude must exceed the BS height {} m", ant.h_bs),
                    ));
                }
                if !(user.phi_b_deg > 0.0 && user.phi_b_deg < 180.0) {
                    return Err(ConfigError::new(
                        "user.phi_b_deg",
                        format!("must lie in (0, 180), got {}", user.phi_b_deg),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be finite, got {v}")))
    }
}

fn positive_finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

/// Converts a dB power ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

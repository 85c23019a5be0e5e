//! MMORPG "Questing" traffic: independent APDU size and inter-arrival draws
//! for the client (player to server) and server (server to player) sides.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::traffic::distribution::{DiscreteSizes, MixtureDistribution};
use crate::traffic::{rng_stream, TrafficError};

/// Built-in calibration, also shipped as `params/wow_questing.json`.
pub const DEFAULT_PARAMS_JSON: &str = include_str!("../../../../params/wow_questing.json");

pub const CLIENT_SIZE_COUNT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LognormalSize {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalSize {
    pub fn mean(&self) -> f64 {
        (self.mu + self.sigma * self.sigma / 2.0).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WowGeneratorConfig {
    pub client_apdu_size: DiscreteSizes,
    pub client_iat: MixtureDistribution,
    pub server_apdu_size: LognormalSize,
    pub server_iat: MixtureDistribution,
}

impl Default for WowGeneratorConfig {
    fn default() -> Self {
        Self::from_json(DEFAULT_PARAMS_JSON).expect("built-in parameters are valid")
    }
}

impl WowGeneratorConfig {
    pub fn from_json(text: &str) -> Result<Self, TrafficError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: WowGeneratorConfig =
            serde_path_to_error::deserialize(de).map_err(|e| TrafficError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, TrafficError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TrafficError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks parameter ranges and the component structure of the model:
    /// 8 client sizes, client gaps from 2 Weibull + 2 fixed values, server
    /// gaps from 1 Normal + 1 Weibull + 3 fixed values.
    pub fn validate(&self) -> Result<(), TrafficError> {
        let ctx = |field: &'static str| move |e: TrafficError| TrafficError::Field(field, Box::new(e));
        self.client_apdu_size.validate().map_err(ctx("client_apdu_size"))?;
        self.client_iat.validate().map_err(ctx("client_iat"))?;
        self.server_iat.validate().map_err(ctx("server_iat"))?;
        if !(self.server_apdu_size.sigma >= 0.0 && self.server_apdu_size.mu.is_finite()) {
            return Err(TrafficError::Field(
                "server_apdu_size",
                Box::new(TrafficError::InvalidParam("sigma must be non-negative".into())),
            ));
        }
        let n = self.client_apdu_size.choices.len();
        if n != CLIENT_SIZE_COUNT {
            return Err(TrafficError::Structure(format!(
                "client_apdu_size needs {CLIENT_SIZE_COUNT} sizes, got {n}"
            )));
        }
        let shape = |m: &MixtureDistribution| {
            ["weibull", "deterministic", "normal", "lognormal"].map(|k| m.count_of(k))
        };
        if shape(&self.client_iat) != [2, 2, 0, 0] {
            return Err(TrafficError::Structure(
                "client_iat needs 2 weibull and 2 deterministic components".into(),
            ));
        }
        if shape(&self.server_iat) != [1, 3, 1, 0] {
            return Err(TrafficError::Structure(
                "server_iat needs 1 normal, 1 weibull and 3 deterministic components".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Client,
    Server,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Apdu {
    /// Wait since the previous APDU on this side.
    pub gap: SimTime,
    pub bytes: u64,
}

pub struct WowGenerator {
    cfg: WowGeneratorConfig,
    client_rng: ChaCha8Rng,
    server_rng: ChaCha8Rng,
}

impl WowGenerator {
    /// Client and server draws come from separate sub-streams of `seed`.
    pub fn new(cfg: WowGeneratorConfig, seed: u64, client_stream: u64, server_stream: u64) -> Self {
        WowGenerator {
            cfg,
            client_rng: rng_stream(seed, client_stream),
            server_rng: rng_stream(seed, server_stream),
        }
    }

    pub fn config(&self) -> &WowGeneratorConfig {
        &self.cfg
    }

    pub fn next_apdu(&mut self, side: Side) -> Apdu {
        match side {
            Side::Client => {
                let rng = &mut self.client_rng;
                let gap = self.cfg.client_iat.sample(rng);
                let bytes = self.cfg.client_apdu_size.sample(rng);
                Apdu {
                    gap: SimTime::from_secs_f64(gap),
                    bytes: u64::from(bytes),
                }
            }
            Side::Server => {
                let rng = &mut self.server_rng;
                let gap = self.cfg.server_iat.sample(rng);
                let LognormalSize { mu, sigma } = self.cfg.server_apdu_size;
                let z: f64 = rng.sample(StandardNormal);
                let bytes = (mu + sigma * z).exp().round().max(1.0);
                Apdu {
                    gap: SimTime::from_secs_f64(gap),
                    bytes: bytes as u64,
                }
            }
        }
    }
}

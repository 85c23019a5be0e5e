//! Experiment description: a JSON document with every key optional.
//!
//! Omitted keys take the residential-ADSL defaults (512 kb/s up, 6 Mb/s
//! down, 100 Mb/s LAN, 80 ms one-way, 200-packet uplink buffer, 1000 s).
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kernel::SimTime;
use crate::metrics::Window;
use crate::net::topology::{ACCESS_PROP, LAN_PROP};
use crate::net::TopologyParams;
use crate::tcp::{TcpConfig, Variant, VegasParams};
use crate::traffic::WowGeneratorConfig;

/// Length of the default measurement window, ending at the run's end.
pub const DEFAULT_WINDOW_S: f64 = 200.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Wow,
    Ftp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub role: Role,
    #[serde(default)]
    pub tcp_variant: Option<Variant>,
    #[serde(default = "default_adv_window")]
    pub adv_window_segments: u32,
    #[serde(default)]
    pub start_s: f64,
}

fn default_adv_window() -> u32 {
    64
}

impl FlowSpec {
    pub fn wow() -> Self {
        FlowSpec {
            role: Role::Wow,
            tcp_variant: Some(Variant::Sack),
            adv_window_segments: default_adv_window(),
            start_s: 0.0,
        }
    }

    pub fn ftp(variant: Variant) -> Self {
        FlowSpec {
            role: Role::Ftp,
            tcp_variant: Some(variant),
            adv_window_segments: default_adv_window(),
            start_s: 0.0,
        }
    }

    pub fn variant(&self) -> Variant {
        self.tcp_variant.unwrap_or(Variant::Sack)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TcpTuning {
    pub initial_cwnd: f64,
    pub min_rto_s: f64,
    pub initial_rto_s: f64,
    pub vegas: VegasParams,
}

impl Default for TcpTuning {
    fn default() -> Self {
        TcpTuning {
            initial_cwnd: 2.0,
            min_rto_s: 0.2,
            initial_rto_s: 1.0,
            vegas: VegasParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub uplink_rate_bps: u64,
    pub downlink_rate_bps: u64,
    pub lan_rate_bps: u64,
    pub one_way_delay_s: f64,
    pub uplink_buffer_pkts: u32,
    pub downlink_buffer_pkts: u32,
    pub duration_s: f64,
    /// `[start, end)` in seconds; defaults to the last 200 s of the run.
    pub measurement_window: Option<[f64; 2]>,
    pub seed: u64,
    pub flows: Vec<FlowSpec>,
    /// Traffic model file, relative to the scenario file. The built-in
    /// calibration is used when absent.
    pub traffic_params: Option<PathBuf>,
    /// Write `packets_<app>.csv` logs.
    pub packet_log: bool,
    /// Extra simulated time after `duration_s` during which sources are
    /// silent and outstanding data drains.
    pub drain_s: f64,
    /// Independent loss applied to arrivals at the uplink queue.
    pub uplink_random_drop_prob: f64,
    pub tcp: TcpTuning,
    #[serde(skip_deserializing)]
    pub traffic: WowGeneratorConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            uplink_rate_bps: 512_000,
            downlink_rate_bps: 6_000_000,
            lan_rate_bps: 100_000_000,
            one_way_delay_s: 0.080,
            uplink_buffer_pkts: 200,
            downlink_buffer_pkts: 200,
            duration_s: 1000.0,
            measurement_window: None,
            seed: 42,
            flows: vec![FlowSpec::wow(), FlowSpec::ftp(Variant::Sack)],
            traffic_params: None,
            packet_log: false,
            drain_s: 0.0,
            uplink_random_drop_prob: 0.0,
            tcp: TcpTuning::default(),
            traffic: WowGeneratorConfig::default(),
        }
    }
}

/// Command-line overrides applied on top of a parsed file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub ftp_variant: Option<Variant>,
    pub uplink_buffer: Option<u32>,
    pub duration_s: Option<f64>,
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::Parse {
                path: origin.to_string(),
                message: if path == "." {
                    e.inner().to_string()
                } else {
                    format!("at `{path}`: {}", e.inner())
                },
            }
        })?;
        if let Some(p) = &cfg.traffic_params {
            let resolved = match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            };
            cfg.traffic = WowGeneratorConfig::from_file(&resolved)
                .map_err(|e| invalid("traffic_params", e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text, &path.display().to_string(), path.parent())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(v) = o.ftp_variant {
            let mut found = false;
            for f in self.flows.iter_mut().filter(|f| f.role == Role::Ftp) {
                f.tcp_variant = Some(v);
                found = true;
            }
            if !found {
                return Err(invalid("--ftp-variant", "scenario has no ftp flow"));
            }
        }
        if let Some(b) = o.uplink_buffer {
            self.uplink_buffer_pkts = b;
        }
        if let Some(d) = o.duration_s {
            self.duration_s = d;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (v, key) in [
            (self.uplink_rate_bps, "uplink_rate_bps"),
            (self.downlink_rate_bps, "downlink_rate_bps"),
            (self.lan_rate_bps, "lan_rate_bps"),
            (u64::from(self.uplink_buffer_pkts), "uplink_buffer_pkts"),
            (u64::from(self.downlink_buffer_pkts), "downlink_buffer_pkts"),
        ] {
            if v == 0 {
                return Err(invalid(key, "must be positive"));
            }
        }
        let fixed = (LAN_PROP + ACCESS_PROP).as_secs_f64();
        if !(self.one_way_delay_s.is_finite() && self.one_way_delay_s > fixed) {
            return Err(invalid("one_way_delay_s", format!("must exceed {fixed} s of LAN and access propagation")));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(invalid("duration_s", "must be positive"));
        }
        if !(self.drain_s.is_finite() && self.drain_s >= 0.0) {
            return Err(invalid("drain_s", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.uplink_random_drop_prob) {
            return Err(invalid("uplink_random_drop_prob", "must be in [0, 1)"));
        }
        if let Some([a, b]) = self.measurement_window {
            if !(a >= 0.0 && a < b) {
                return Err(invalid("measurement_window", "need 0 <= start < end"));
            }
            if a >= self.duration_s {
                return Err(invalid("measurement_window", "must start before duration_s"));
            }
        }
        let t = &self.tcp;
        if !(t.initial_cwnd >= 1.0) {
            return Err(invalid("tcp.initial_cwnd", "must be at least 1 segment"));
        }
        if !(t.min_rto_s > 0.0 && t.initial_rto_s > 0.0) {
            return Err(invalid("tcp.min_rto_s", "timeouts must be positive"));
        }
        let v = &t.vegas;
        if !(v.alpha >= 0.0 && v.alpha <= v.beta && v.gamma >= 0.0) {
            return Err(invalid("tcp.vegas", "need 0 <= alpha <= beta and gamma >= 0"));
        }
        for role in [Role::Wow, Role::Ftp] {
            if self.flows.iter().filter(|f| f.role == role).count() > 1 {
                return Err(invalid("flows", format!("at most one {role:?} flow")));
            }
        }
        for (i, f) in self.flows.iter().enumerate() {
            if f.adv_window_segments == 0 {
                return Err(invalid(format!("flows[{i}].adv_window_segments"), "must be positive"));
            }
            if !(f.start_s.is_finite() && f.start_s >= 0.0) {
                return Err(invalid(format!("flows[{i}].start_s"), "must be non-negative"));
            }
            if f.role == Role::Wow && f.variant() != Variant::Sack {
                return Err(invalid(format!("flows[{i}].tcp_variant"), "game traffic always uses sack"));
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> TopologyParams {
        TopologyParams {
            uplink_rate_bps: self.uplink_rate_bps,
            downlink_rate_bps: self.downlink_rate_bps,
            lan_rate_bps: self.lan_rate_bps,
            one_way_delay: SimTime::from_secs_f64(self.one_way_delay_s),
            uplink_buffer_pkts: self.uplink_buffer_pkts,
            downlink_buffer_pkts: self.downlink_buffer_pkts,
        }
    }

    pub fn duration(&self) -> SimTime {
        SimTime::from_secs_f64(self.duration_s)
    }

    pub fn drain(&self) -> SimTime {
        SimTime::from_secs_f64(self.drain_s)
    }

    pub fn window(&self) -> Window {
        let [a, b] = self
            .measurement_window
            .unwrap_or([(self.duration_s - DEFAULT_WINDOW_S).max(0.0), self.duration_s]);
        Window::new(SimTime::from_secs_f64(a), SimTime::from_secs_f64(b))
            .expect("validated window is non-empty")
    }

    pub fn flow(&self, role: Role) -> Option<&FlowSpec> {
        self.flows.iter().find(|f| f.role == role)
    }

    pub fn ftp_variant(&self) -> Option<Variant> {
        self.flow(Role::Ftp).map(FlowSpec::variant)
    }

    pub fn tcp_config(&self, flow: &FlowSpec) -> TcpConfig {
        TcpConfig {
            variant: flow.variant(),
            initial_cwnd: self.tcp.initial_cwnd,
            adv_window: flow.adv_window_segments,
            min_rto: SimTime::from_secs_f64(self.tcp.min_rto_s),
            initial_rto: SimTime::from_secs_f64(self.tcp.initial_rto_s),
            vegas: self.tcp.vegas,
            ..TcpConfig::default()
        }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

//! Result directories: trace CSVs plus `summary.json`, `config.json` and
//! `manifest.json`.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::metrics::{summarize_traces, TraceSummary, Traces, Window};
use crate::scenario::{Overrides, ScenarioConfig};
use crate::kernel::SimTime;
use crate::sim::{run_scenario, RunOutput, RunSummary, SimError};
use crate::tcp::Variant;

pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COMPARISON_FILE: &str = "comparison.csv";

/// Uplink buffer sizes covered by a sweep.
pub const SWEEP_BUFFERS: [u32; 2] = [200, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SimError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_bundle(dir: &Path, cfg: &ScenarioConfig, out: &RunOutput) -> Result<(), SimError> {
    std::fs::create_dir_all(dir)?;
    out.traces.write_csv(dir)?;
    write_json(&dir.join(SUMMARY_FILE), &out.summary)?;
    write_json(&dir.join(CONFIG_FILE), cfg)?;
    write_json(&dir.join(MANIFEST_FILE), &Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
    })
}

pub fn read_summary(dir: &Path) -> Result<RunSummary, SimError> {
    let text = std::fs::read_to_string(dir.join(SUMMARY_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

/// Recomputes the trace-derived statistics of a bundle from its CSVs alone.
pub fn recompute_from_csv(dir: &Path, summary: &RunSummary) -> Result<TraceSummary, SimError> {
    let flows: Vec<String> = summary.flows.keys().cloned().collect();
    let queues: Vec<(String, u64, u32)> = summary
        .queues
        .iter()
        .map(|(name, q)| (name.clone(), q.rate_bps, q.capacity_pkts))
        .collect();
    let traces = Traces::read_csv(dir, &flows, &queues)?;
    let [a, b] = summary.window_s;
    let window = Window::new(SimTime::from_secs_f64(a), SimTime::from_secs_f64(b))?;
    Ok(summarize_traces(&traces, window))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub variant: Variant,
    pub buffer: u32,
    pub wow_mean_delay_s: Option<f64>,
    pub wow_drops: u64,
    pub ftp_goodput_bps: f64,
}

impl ComparisonRow {
    fn from_summary(s: &RunSummary, variant: Variant, buffer: u32) -> Self {
        let wow_drops = ["wow", "wow_server"]
            .iter()
            .filter_map(|n| s.flow(n))
            .map(|f| f.drops)
            .sum();
        ComparisonRow {
            variant,
            buffer,
            wow_mean_delay_s: s.wow_mean_delay_s(),
            wow_drops,
            ftp_goodput_bps: s.flow("ftp").map_or(0.0, |f| f.goodput_bps),
        }
    }
}

pub fn sweep_dir_name(variant: Variant, buffer: u32) -> String {
    format!("{variant}_{buffer}")
}

/// Runs every FTP variant against each buffer size in [`SWEEP_BUFFERS`],
/// writing one bundle per run under `out` and `comparison.csv` at the top.
/// Runs are independent and spread over up to `threads` workers.
pub fn run_sweep(base: &ScenarioConfig, out: &Path, threads: usize) -> Result<Vec<ComparisonRow>, SimError> {
    let jobs: Vec<(Variant, u32)> = Variant::ALL
        .iter()
        .flat_map(|&v| SWEEP_BUFFERS.iter().map(move |&b| (v, b)))
        .collect();
    let mut configs = Vec::with_capacity(jobs.len());
    for &(variant, buffer) in &jobs {
        let mut cfg = base.clone();
        cfg.apply(&Overrides {
            ftp_variant: Some(variant),
            uplink_buffer: Some(buffer),
            ..Default::default()
        })?;
        configs.push(cfg);
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ComparisonRow, SimError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, jobs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let (variant, buffer) = jobs[i];
                let r = run_scenario(&configs[i]).and_then(|o| {
                    write_bundle(&out.join(sweep_dir_name(variant, buffer)), &configs[i], &o)?;
                    Ok(ComparisonRow::from_summary(&o.summary, variant, buffer))
                });
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });

    let rows = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<Result<Vec<_>, _>>()?;
    write_comparison(&out.join(COMPARISON_FILE), &rows)?;
    Ok(rows)
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path).map_err(crate::metrics::MetricsError::from)?;
    let csv_err = |e: csv::Error| SimError::from(crate::metrics::MetricsError::from(e));
    w.write_record(["variant", "buffer", "wow_mean_delay_s", "wow_drops", "ftp_goodput_bps"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.variant.to_string(),
            r.buffer.to_string(),
            r.wow_mean_delay_s.map_or_else(String::new, |d| format!("{d:.9}")),
            r.wow_drops.to_string(),
            format!("{:.3}", r.ftp_goodput_bps),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::FlowSpec;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            duration_s: 30.0,
            packet_log: true,
            flows: vec![FlowSpec::wow(), FlowSpec::ftp(Variant::Vegas)],
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn summary_is_reproducible_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small();
        let out = run_scenario(&cfg).unwrap();
        write_bundle(dir.path(), &cfg, &out).unwrap();
        let s = read_summary(dir.path()).unwrap();
        assert_eq!(s, out.summary);
        let again = recompute_from_csv(dir.path(), &s).unwrap();
        assert_eq!(again.queues, s.queues);
        for (name, f) in &s.flows {
            assert_eq!(again.flows[name].uplink_queuing_delay, f.uplink_queuing_delay);
            assert_eq!(again.flows[name].mean_cwnd, f.mean_cwnd);
        }
        for f in ["packets_wow.csv", "packets_ftp.csv", "queue_uplink.csv", "cwnd_ftp.csv", "manifest.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn bundles_are_byte_identical() {
        let cfg = small();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_bundle(a.path(), &cfg, &run_scenario(&cfg).unwrap()).unwrap();
        write_bundle(b.path(), &cfg, &run_scenario(&cfg).unwrap()).unwrap();
        let mut names: Vec<_> = std::fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for n in names {
            assert_eq!(
                std::fs::read(a.path().join(&n)).unwrap(),
                std::fs::read(b.path().join(&n)).unwrap(),
                "{n:?}"
            );
        }
    }
}

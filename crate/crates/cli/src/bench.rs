use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::run::{load, simulate, Overrides};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    /// Frames stepped per repeat.
    pub frames: usize,
    /// Simulated frames per second, one entry per repeat in run order.
    pub fps: Vec<f64>,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    pub cpu: String,
    pub logical_cpus: usize,
}

/// Linear-interpolated percentile of sorted data, `p` in [0, 1].
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let x = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (x - lo as f64)
}

fn cpu_model() -> String {
    std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown".into())
}

pub fn cmd_bench(scenario: &Path, overrides: &Overrides, repeats: usize) -> Result<BenchReport, CliError> {
    if repeats == 0 {
        return Err(CliError::Config("--repeats must be at least 1".into()));
    }
    let s = load(scenario, overrides)?;
    let mut fps = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        fps.push(simulate(&s)?.fps());
    }
    let mut sorted = fps.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BenchReport {
        frames: s.sequence.len().saturating_sub(1),
        median: percentile(&sorted, 0.5),
        p10: percentile(&sorted, 0.1),
        p90: percentile(&sorted, 0.9),
        fps,
        cpu: cpu_model(),
        logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.fps.iter().enumerate() {
            writeln!(f, "repeat {i}: {v:.1} fps")?;
        }
        writeln!(f, "frames {} median {:.1} fps p10 {:.1} p90 {:.1}", self.frames, self.median, self.p10, self.p90)?;
        write!(f, "cpu {} ({} logical)", self.cpu, self.logical_cpus)
    }
}

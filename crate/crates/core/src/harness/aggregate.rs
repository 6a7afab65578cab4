use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{failed_report, AblationMode, HandoverReport, PreparedScene};
use super::scene::Scene;
use crate::error::{Error, Result};
use crate::metrics::lower_median;

/// Per-mode results over every object and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: AblationMode,
    pub runs: usize,
    /// Mean over runs of the per-run median visibility.
    pub visibility: f64,
    /// Mean over runs of the per-run median reachability.
    pub reachability: f64,
    /// Successful runs over all runs.
    pub success_rate: f64,
    /// Median over runs of the per-run median visibility.
    pub median_visibility: f64,
    pub median_reachability: f64,
    /// Fraction of objects that succeed in more than half of their runs.
    pub object_success_rate: f64,
    pub lambda: f64,
    pub k: f64,
}

/// Per-object, per-mode results over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRow {
    pub object: String,
    pub mode: AblationMode,
    pub runs: usize,
    pub visibility: f64,
    pub reachability: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub per_object: Vec<ObjectRow>,
}

pub const SUMMARY_CSV_HEADER: &str =
    "Mode,Visibility,Reachability,SuccessRate,Runs,MedianVisibility,MedianReachability,ObjectSuccessRate,Lambda,K";

/// Median scores of a run; runs that failed before evaluation score 0.
fn scores(r: &HandoverReport) -> (f64, f64) {
    r.metrics
        .as_ref()
        .map_or((0.0, 0.0), |m| (m.median_visibility, m.median_reachability))
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Folds reports into per-mode rows (in mode order) and per-object rows
/// (by object, then mode). Reports within one mode must share `k` and `lambda`.
pub fn aggregate(reports: &[HandoverReport]) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("reports"));
    }
    let mut by_mode: BTreeMap<AblationMode, Vec<&HandoverReport>> = BTreeMap::new();
    let mut by_object: BTreeMap<(&str, AblationMode), Vec<&HandoverReport>> = BTreeMap::new();
    for r in reports {
        by_mode.entry(r.mode).or_default().push(r);
        by_object
            .entry((r.scene.as_str(), r.mode))
            .or_default()
            .push(r);
    }

    let mut per_object = Vec::with_capacity(by_object.len());
    for ((object, mode), runs) in &by_object {
        per_object.push(ObjectRow {
            object: object.to_string(),
            mode: *mode,
            runs: runs.len(),
            visibility: mean(runs.iter().map(|r| scores(r).0)),
            reachability: mean(runs.iter().map(|r| scores(r).1)),
            success_rate: mean(runs.iter().map(|r| f64::from(u8::from(r.success)))),
        });
    }

    let mut rows = Vec::with_capacity(by_mode.len());
    for (mode, runs) in &by_mode {
        let (lambda, k) = (runs[0].lambda, runs[0].k);
        if runs
            .iter()
            .any(|r| r.lambda.to_bits() != lambda.to_bits() || r.k.to_bits() != k.to_bits())
        {
            return Err(Error::MixedParameters(mode.to_string()));
        }
        let vis: Vec<f64> = runs.iter().map(|r| scores(r).0).collect();
        let reach: Vec<f64> = runs.iter().map(|r| scores(r).1).collect();
        let objects: Vec<&ObjectRow> = per_object.iter().filter(|o| o.mode == *mode).collect();
        rows.push(SummaryRow {
            mode: *mode,
            runs: runs.len(),
            visibility: mean(vis.iter().copied()),
            reachability: mean(reach.iter().copied()),
            success_rate: mean(runs.iter().map(|r| f64::from(u8::from(r.success)))),
            median_visibility: lower_median(&vis)?,
            median_reachability: lower_median(&reach)?,
            object_success_rate: mean(
                objects
                    .iter()
                    .map(|o| f64::from(u8::from(o.success_rate > 0.5))),
            ),
            lambda,
            k,
        });
    }
    Ok(Summary { rows, per_object })
}

impl Summary {
    /// Per-mode rows as CSV; numbers use the shortest exact decimal form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SUMMARY_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.mode,
                r.visibility,
                r.reachability,
                r.success_rate,
                r.runs,
                r.median_visibility,
                r.median_reachability,
                r.object_success_rate,
                r.lambda,
                r.k
            );
        }
        out
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<SummaryRow>> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == SUMMARY_CSV_HEADER => {}
            _ => return Err(Error::parse(1, "unexpected summary header")),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(Error::parse(i + 1, "expected 10 fields"));
            }
            let num = |j: usize| -> Result<f64> {
                f[j].parse()
                    .map_err(|_| Error::parse(i + 1, format!("bad number {:?}", f[j])))
            };
            rows.push(SummaryRow {
                mode: f[0].parse()?,
                visibility: num(1)?,
                reachability: num(2)?,
                success_rate: num(3)?,
                runs: f[4]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, "bad run count"))?,
                median_visibility: num(5)?,
                median_reachability: num(6)?,
                object_success_rate: num(7)?,
                lambda: num(8)?,
                k: num(9)?,
            });
        }
        Ok(rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn row(&self, mode: AblationMode) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.mode == mode)
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Every scene under every mode and seed, in (scene, mode, seed) order.
/// Runs execute concurrently; the result order does not depend on scheduling.
pub fn run_all(scenes: &[Scene], modes: &[AblationMode], seeds: &[u64]) -> Vec<HandoverReport> {
    let prepared: Vec<_> = scenes.par_iter().map(PreparedScene::new).collect();
    let jobs: Vec<(usize, AblationMode, u64)> = (0..scenes.len())
        .flat_map(|s| {
            modes
                .iter()
                .flat_map(move |&m| seeds.iter().map(move |&k| (s, m, k)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(s, mode, seed)| match &prepared[s] {
            Ok(p) => p.run(mode, seed),
            Err(f) => failed_report(&scenes[s], mode, seed, f.clone()),
        })
        .collect()
}

/// Runs the benchmark and writes one report per run plus `summary.csv` and
/// `summary.json` to `out_dir`.
pub fn bench(
    scenes: &[Scene],
    modes: &[AblationMode],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<(Vec<HandoverReport>, Summary)> {
    if scenes.is_empty() || modes.is_empty() || seeds.is_empty() {
        return Err(Error::EmptyInput("scenes, modes or seeds"));
    }
    let mut names: Vec<&str> = scenes.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("scene", "names must be unique"));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let reports = run_all(scenes, modes, seeds);
    for r in &reports {
        write(&out_dir.join(r.file_name()), &r.to_json()?)?;
    }
    let summary = aggregate(&reports)?;
    write(&out_dir.join("summary.csv"), &summary.to_csv())?;
    write(&out_dir.join("summary.json"), &summary.to_json()?)?;
    Ok((reports, summary))
}

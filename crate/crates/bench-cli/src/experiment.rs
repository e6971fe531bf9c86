//! Experiment execution and raw-result storage.
//!
//! Layout of an experiment directory:
//!
//! ```text
//! out/
//!   experiment.json          effective configuration (after CLI overrides)
//!   runs/<run_id>.jsonl      one generation record per line, flushed as
//!                            soon as it is produced so an interrupted run
//!                            keeps everything already evaluated
//!   summary.csv              per-checkpoint statistics, recomputed from the
//!                            JSONL files rather than from in-memory state
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mggpo::baselines::{mopso_run, nsga2_run};
use mggpo::error::{Error, Result};
use mggpo::mggpo::run as mggpo_run;
use mggpo::problems::{problem_by_name, reference_front};
use mggpo::record::{IndicatorContext, RunIdentity, RunRecord};

use crate::analysis::{mean, sample_std, value_at_checkpoint, Metric};
use crate::config::{AlgoId, ExperimentConfig};
use crate::csv_float;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Runs every repeat of the experiment into `out_dir`, then writes the
/// summary. `on_run_complete` is called with (repeat index, run id, final
/// record) after each run's file is complete; the CLI uses it for progress
/// reporting and tests leave it empty.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    on_run_complete: &mut dyn FnMut(usize, &str, &RunRecord),
) -> Result<()> {
    let runs_dir = out_dir.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| io_error(&runs_dir, e))?;
    let config_path = out_dir.join("experiment.json");
    let mut config_text = serde_json::to_string_pretty(config).expect("config serializes");
    config_text.push('\n');
    fs::write(&config_path, config_text).map_err(|e| io_error(&config_path, e))?;

    let problem = problem_by_name(&config.problem, config.dimension)?;
    let indicators = IndicatorContext {
        reference_front: reference_front(&config.problem, config.front_resolution)?,
        reference_point: config.reference_point,
    };

    for repeat in 0..config.repeats {
        let seed = config.base_seed + repeat as u64;
        let run_id = config.run_id(seed);
        let identity = RunIdentity {
            run_id: run_id.clone(),
            algo: config.algo.as_str().to_string(),
            problem: config.problem.to_ascii_lowercase(),
            dimension: config.dimension,
            seed,
        };
        let path = runs_dir.join(format!("{run_id}.jsonl"));
        let file = File::create(&path).map_err(|e| io_error(&path, e))?;
        let mut writer = BufWriter::new(file);
        // The runner's observer callback cannot return an error, so the
        // first write failure is parked here and re-raised afterwards.
        let mut write_error: Option<std::io::Error> = None;
        let mut observer = |record: &RunRecord| {
            if write_error.is_some() {
                return;
            }
            let line = serde_json::to_string(record).expect("record serializes");
            let outcome = writeln!(writer, "{line}").and_then(|_| writer.flush());
            if let Err(e) = outcome {
                write_error = Some(e);
            }
        };
        let records = match config.algo {
            AlgoId::Mggpo => {
                let c = config.mggpo_config(seed);
                mggpo_run(&problem, &c, &identity, &indicators, &mut observer)?
            }
            AlgoId::Nsga2 => {
                let c = config.nsga2_config(seed);
                nsga2_run(&problem, &c, &identity, &indicators, &mut observer)?
            }
            AlgoId::Mopso => {
                let c = config.mopso_config(seed);
                mopso_run(&problem, &c, &identity, &indicators, &mut observer)?
            }
        };
        drop(observer);
        if let Some(e) = write_error {
            return Err(io_error(&path, e));
        }
        let last = records.last().expect("every run emits records");
        on_run_complete(repeat, &run_id, last);
    }

    let summary = compute_summary(out_dir)?;
    let summary_path = out_dir.join("summary.csv");
    fs::write(&summary_path, summary).map_err(|e| io_error(&summary_path, e))?;
    Ok(())
}

/// Lists an experiment's run files in a stable (lexicographic) order.
pub fn run_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let runs_dir = dir.join("runs");
    let entries = fs::read_dir(&runs_dir).map_err(|e| io_error(&runs_dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| io_error(&runs_dir, e))?;
        let path = entry.path();
        if path.extension().is_some_and(|ext| ext == "jsonl") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::EmptySet {
            what: format!("run files in {}", runs_dir.display()),
        });
    }
    Ok(files)
}

/// Reads one run's generation records, enforcing the record schema and the
/// strictly increasing evaluation count that checkpoint lookups rely on.
pub fn read_run_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut records: Vec<RunRecord> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(line).map_err(|source| Error::Format {
            path: path.display().to_string(),
            source,
        })?;
        record.check_schema()?;
        if let Some(prev) = records.last() {
            if record.eval_count <= prev.eval_count {
                return Err(Error::InvalidParameter {
                    name: "eval_count",
                    message: format!(
                        "{}: evaluation counts must increase, got {} after {}",
                        path.display(),
                        record.eval_count,
                        prev.eval_count
                    ),
                });
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptySet {
            what: format!("records in {}", path.display()),
        });
    }
    Ok(records)
}

/// Reads every run of an experiment directory.
pub fn read_all_runs(dir: &Path) -> Result<Vec<Vec<RunRecord>>> {
    run_files(dir)?
        .iter()
        .map(|path| read_run_records(path))
        .collect()
}

/// Builds `summary.csv` from the files on disk. Statistics are computed
/// from the persisted records so the summary can always be regenerated and
/// cross-checked against the raw data.
pub fn compute_summary(dir: &Path) -> Result<String> {
    let config = crate::config::load_config(&dir.join("experiment.json"))?;
    let runs = read_all_runs(dir)?;
    let mut out = String::from("problem,dimension,algo,metric,checkpoint,best,mean,std,runs\n");
    for metric in [Metric::Igd, Metric::Hv] {
        for &checkpoint in &config.checkpoints {
            let values = runs
                .iter()
                .map(|records| value_at_checkpoint(records, checkpoint, metric))
                .collect::<Result<Vec<f64>>>()?;
            let best = match metric {
                Metric::Igd => values.iter().copied().fold(f64::INFINITY, f64::min),
                Metric::Hv => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                config.problem.to_ascii_lowercase(),
                config.dimension,
                config.algo.as_str(),
                metric.as_str(),
                checkpoint,
                csv_float(best),
                csv_float(mean(&values)),
                csv_float(sample_std(&values)),
                values.len()
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AlgoParams;
    use tempfile::tempdir;

    fn tiny_config(algo: AlgoId) -> ExperimentConfig {
        let mut params = AlgoParams::default();
        if algo == AlgoId::Mggpo {
            params.m1 = Some(3);
            params.m2 = Some(3);
            params.gp_max_evals_per_restart = Some(30);
            params.gp_restarts = Some(1);
        }
        ExperimentConfig {
            schema_version: 1,
            problem: "zdt1".to_string(),
            dimension: 4,
            algo,
            population_size: 8,
            budget: 32,
            repeats: 2,
            base_seed: 7,
            checkpoints: vec![16, 32],
            reference_point: [1.0, 1.0],
            front_resolution: 200,
            out_dir: None,
            params,
        }
    }

    #[test]
    fn experiment_writes_config_runs_and_summary() {
        let dir = tempdir().unwrap();
        let config = tiny_config(AlgoId::Nsga2);
        let mut seen = Vec::new();
        run_experiment(&config, dir.path(), &mut |repeat, run_id, last| {
            seen.push((repeat, run_id.to_string(), last.eval_count));
        })
        .unwrap();

        assert_eq!(seen.len(), 2);
        assert_eq!(seen[0].1, "nsga2-zdt1-p004-s00007");
        assert!(seen.iter().all(|(_, _, evals)| *evals == 32));

        let stored = crate::config::load_config(&dir.path().join("experiment.json")).unwrap();
        assert_eq!(stored, config);

        let runs = read_all_runs(dir.path()).unwrap();
        assert_eq!(runs.len(), 2);
        for records in &runs {
            assert_eq!(records.len(), 4);
            assert_eq!(records[0].eval_count, 8);
            assert_eq!(records.last().unwrap().eval_count, 32);
        }

        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let lines: Vec<&str> = summary.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 2, "header plus metric x checkpoint rows");
        assert!(lines[1].starts_with("zdt1,4,nsga2,igd,16,"));
        assert!(lines[4].starts_with("zdt1,4,nsga2,hv,32,"));
    }

    #[test]
    fn summary_matches_a_recount_from_the_raw_records() {
        let dir = tempdir().unwrap();
        let config = tiny_config(AlgoId::Mopso);
        run_experiment(&config, dir.path(), &mut |_, _, _| {}).unwrap();

        let emitted = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let runs = read_all_runs(dir.path()).unwrap();
        for line in emitted.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            let metric = match cells[3] {
                "igd" => Metric::Igd,
                _ => Metric::Hv,
            };
            let checkpoint: u64 = cells[4].parse().unwrap();
            let values: Vec<f64> = runs
                .iter()
                .map(|r| value_at_checkpoint(r, checkpoint, metric).unwrap())
                .collect();
            let mean_emitted: f64 = cells[6].parse().unwrap();
            let std_emitted: f64 = cells[7].parse().unwrap();
            assert!((mean_emitted - mean(&values)).abs() <= 1e-12);
            assert!((std_emitted - sample_std(&values)).abs() <= 1e-12);
        }
    }

    #[test]
    fn corrupt_run_lines_are_reported_with_the_file_path() {
        let dir = tempdir().unwrap();
        let config = tiny_config(AlgoId::Nsga2);
        run_experiment(&config, dir.path(), &mut |_, _, _| {}).unwrap();
        let victim = &run_files(dir.path()).unwrap()[0];
        let mut text = fs::read_to_string(victim).unwrap();
        text.push_str("{\"not\": \"a record\"}\n");
        fs::write(victim, text).unwrap();
        match read_run_records(victim) {
            Err(Error::Format { path, .. }) => {
                assert!(path.contains("nsga2-zdt1"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn surrogate_experiment_runs_end_to_end_at_toy_scale() {
        let dir = tempdir().unwrap();
        let mut config = tiny_config(AlgoId::Mggpo);
        config.repeats = 1;
        config.budget = 24;
        config.checkpoints = vec![24];
        run_experiment(&config, dir.path(), &mut |_, _, _| {}).unwrap();
        let runs = read_all_runs(dir.path()).unwrap();
        assert_eq!(runs[0].len(), 3);
        assert!(runs[0].iter().all(|r| r.kappa.is_some()));
    }
}

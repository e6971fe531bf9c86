//! Post-processing of stored runs: checkpoint extraction, paired
//! comparisons between experiment directories, convergence tables, and the
//! front/metrics utilities behind the corresponding CLI subcommands.

use std::fs;
use std::path::Path;

use mggpo::error::{Error, Result};
use mggpo::metrics::{hypervolume_2d, igd, wilcoxon_rank_sum, Direction, TestOutcome};
use mggpo::problems::reference_front;
use mggpo::record::RunRecord;
use mggpo::types::ObjectiveVector;

use crate::config::load_config;
use crate::csv_float;
use crate::experiment::read_all_runs;

/// Which stored indicator a table is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Igd,
    Hv,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Igd => "igd",
            Metric::Hv => "hv",
        }
    }

    pub fn parse(text: &str) -> Result<Metric> {
        match text.to_ascii_lowercase().as_str() {
            "igd" => Ok(Metric::Igd),
            "hv" => Ok(Metric::Hv),
            other => Err(Error::InvalidParameter {
                name: "metric",
                message: format!("expected igd or hv, got {other}"),
            }),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Metric::Igd => Direction::LowerIsBetter,
            Metric::Hv => Direction::HigherIsBetter,
        }
    }

    pub fn of(&self, record: &RunRecord) -> f64 {
        match self {
            Metric::Igd => record.igd,
            Metric::Hv => record.hv,
        }
    }
}

/// Value of a run at a checkpoint: the last generation whose cumulative
/// evaluation count does not exceed it.
pub fn value_at_checkpoint(records: &[RunRecord], checkpoint: u64, metric: Metric) -> Result<f64> {
    records
        .iter()
        .take_while(|r| r.eval_count <= checkpoint)
        .last()
        .map(|r| metric.of(r))
        .ok_or_else(|| Error::InvalidParameter {
            name: "checkpoint",
            message: format!(
                "checkpoint {checkpoint} precedes the first record at {} evaluations",
                records.first().map_or(0, |r| r.eval_count)
            ),
        })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

const MIN_RUNS_FOR_COMPARISON: usize = 3;

/// Compares two experiment directories checkpoint by checkpoint with the
/// rank-sum test. Output is a CSV whose `result` column is 1 when A wins,
/// -1 when B wins, 0 when the test does not separate them, and NA when a
/// hypervolume comparison is meaningless because neither side has any run
/// inside the reference box.
pub fn compare_dirs(dir_a: &Path, dir_b: &Path, metric: Metric, alpha: f64) -> Result<String> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            message: format!("significance level must lie in (0, 1), got {alpha}"),
        });
    }
    let config_a = load_config(&dir_a.join("experiment.json"))?;
    let config_b = load_config(&dir_b.join("experiment.json"))?;
    let instance_a = (config_a.problem.to_ascii_lowercase(), config_a.dimension);
    let instance_b = (config_b.problem.to_ascii_lowercase(), config_b.dimension);
    if instance_a != instance_b {
        return Err(Error::InvalidParameter {
            name: "problem",
            message: format!(
                "experiments target different instances: {}_{} vs {}_{}",
                instance_a.0, instance_a.1, instance_b.0, instance_b.1
            ),
        });
    }
    let checkpoints: Vec<u64> = config_a
        .checkpoints
        .iter()
        .copied()
        .filter(|c| config_b.checkpoints.contains(c))
        .collect();
    if checkpoints.is_empty() {
        return Err(Error::InvalidParameter {
            name: "checkpoints",
            message: "the experiments share no checkpoints".to_string(),
        });
    }
    let runs_a = read_all_runs(dir_a)?;
    let runs_b = read_all_runs(dir_b)?;
    for (label, runs) in [("a", &runs_a), ("b", &runs_b)] {
        if runs.len() < MIN_RUNS_FOR_COMPARISON {
            return Err(Error::InvalidParameter {
                name: "runs",
                message: format!(
                    "side {label} has {} runs; comparisons need at least {}",
                    runs.len(),
                    MIN_RUNS_FOR_COMPARISON
                ),
            });
        }
    }

    let mut out =
        String::from("problem,dimension,metric,checkpoint,n_a,n_b,median_a,median_b,p_value,result\n");
    for checkpoint in checkpoints {
        let values_a = runs_a
            .iter()
            .map(|r| value_at_checkpoint(r, checkpoint, metric))
            .collect::<Result<Vec<f64>>>()?;
        let values_b = runs_b
            .iter()
            .map(|r| value_at_checkpoint(r, checkpoint, metric))
            .collect::<Result<Vec<f64>>>()?;
        // A hypervolume of zero means the run never entered the reference
        // box; when that holds across the board the test has nothing to say.
        let degenerate = metric == Metric::Hv
            && values_a.iter().all(|v| *v <= 0.0)
            && values_b.iter().all(|v| *v <= 0.0);
        let (p_text, result) = if degenerate {
            ("NA".to_string(), "NA")
        } else {
            let test = wilcoxon_rank_sum(&values_a, &values_b, alpha, metric.direction())?;
            let result = match test.outcome {
                TestOutcome::WinA => "1",
                TestOutcome::WinB => "-1",
                TestOutcome::NoWinner => "0",
            };
            (csv_float(test.p_value), result)
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            instance_a.0,
            instance_a.1,
            metric.as_str(),
            checkpoint,
            values_a.len(),
            values_b.len(),
            csv_float(median(&values_a)),
            csv_float(median(&values_b)),
            p_text,
            result
        ));
    }
    Ok(out)
}

/// Per-generation statistics of a metric across an experiment's runs. All
/// runs must share the same evaluation grid, which holds whenever they come
/// from one experiment configuration.
pub fn convergence_csv(dir: &Path, metric: Metric) -> Result<String> {
    let runs = read_all_runs(dir)?;
    let grid: Vec<u64> = runs[0].iter().map(|r| r.eval_count).collect();
    for (index, records) in runs.iter().enumerate() {
        let this: Vec<u64> = records.iter().map(|r| r.eval_count).collect();
        if this != grid {
            return Err(Error::InvalidParameter {
                name: "eval_count",
                message: format!(
                    "run {index} disagrees with run 0 on the evaluation grid"
                ),
            });
        }
    }
    let mut out = String::from("eval_count,mean,median,std,min,max\n");
    for (row, &evals) in grid.iter().enumerate() {
        let values: Vec<f64> = runs.iter().map(|r| metric.of(&r[row])).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            evals,
            csv_float(mean(&values)),
            csv_float(median(&values)),
            csv_float(sample_std(&values)),
            csv_float(min),
            csv_float(max)
        ));
    }
    Ok(out)
}

/// Analytic front of a named problem as CSV.
pub fn front_csv(problem: &str, resolution: usize) -> Result<String> {
    let front = reference_front(problem, resolution)?;
    let mut out = String::from("f1,f2\n");
    for point in &front.points {
        out.push_str(&format!("{},{}\n", csv_float(point.0[0]), csv_float(point.0[1])));
    }
    Ok(out)
}

/// Reads a `f1,f2` CSV front as written by `front_csv`.
pub fn read_front_csv(path: &Path) -> Result<Vec<ObjectiveVector>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut points = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || (number == 0 && trimmed.eq_ignore_ascii_case("f1,f2")) {
            continue;
        }
        let mut cells = trimmed.split(',');
        let parse = |cell: Option<&str>| -> Result<f64> {
            cell.and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidParameter {
                    name: "front",
                    message: format!(
                        "{}: line {} is not an f1,f2 pair",
                        path.display(),
                        number + 1
                    ),
                })
        };
        let f1 = parse(cells.next())?;
        let f2 = parse(cells.next())?;
        if cells.next().is_some() {
            return Err(Error::InvalidParameter {
                name: "front",
                message: format!(
                    "{}: line {} has more than two columns",
                    path.display(),
                    number + 1
                ),
            });
        }
        points.push(ObjectiveVector(vec![f1, f2]));
    }
    if points.is_empty() {
        return Err(Error::EmptySet {
            what: format!("front points in {}", path.display()),
        });
    }
    Ok(points)
}

/// Scores a stored front against a problem's analytic front: JSON with the
/// hypervolume under `ref_point` and the distance to the reference front.
pub fn metrics_json(
    front_path: &Path,
    problem: &str,
    ref_point: [f64; 2],
    resolution: usize,
) -> Result<String> {
    let points = read_front_csv(front_path)?;
    let reference = reference_front(problem, resolution)?;
    let hv = hypervolume_2d(&points, &ref_point)?;
    let igd_value = igd(&points, &reference)?;
    Ok(serde_json::json!({ "hv": hv, "igd": igd_value }).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mggpo::record::SCHEMA_VERSION;
    use tempfile::tempdir;

    fn record(evals: u64, igd: f64, hv: f64) -> RunRecord {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            run_id: "test".to_string(),
            algo: "nsga2".to_string(),
            problem: "zdt1".to_string(),
            dimension: 4,
            seed: 0,
            generation: (evals / 8 - 1) as u32,
            eval_count: evals,
            front: vec![[0.0, 1.0]],
            igd,
            hv,
            kappa: None,
            wall_time_s: 0.0,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn checkpoint_takes_the_last_record_at_or_below_it() {
        let records = vec![record(8, 0.9, 0.0), record(16, 0.5, 0.1), record(24, 0.2, 0.3)];
        let v = value_at_checkpoint(&records, 20, Metric::Igd).unwrap();
        assert_eq!(v, 0.5);
        let v = value_at_checkpoint(&records, 24, Metric::Hv).unwrap();
        assert_eq!(v, 0.3);
        assert!(value_at_checkpoint(&records, 5, Metric::Igd).is_err());
    }

    #[test]
    fn basic_statistics_match_hand_values() {
        let values = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&values), 5.0);
        assert!((sample_std(&values) - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(median(&values), 4.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(sample_std(&[42.0]), 0.0);
    }

    #[test]
    fn front_csv_round_trips_through_the_reader() {
        let dir = tempdir().unwrap();
        let text = front_csv("zdt2", 50).unwrap();
        let path = dir.path().join("front.csv");
        fs::write(&path, &text).unwrap();
        let points = read_front_csv(&path).unwrap();
        assert_eq!(points.len(), 50);
        assert_eq!(points[0].0, vec![0.0, 1.0]);
        let last = &points[49].0;
        assert!((last[0] - 1.0).abs() < 1e-12 && last[1].abs() < 1e-12);
    }

    #[test]
    fn metrics_json_scores_a_self_front_as_perfect() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("front.csv");
        fs::write(&path, front_csv("zdt1", 400).unwrap()).unwrap();
        let json = metrics_json(&path, "zdt1", [1.0, 1.0], 400).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["igd"].as_f64().unwrap(), 0.0);
        let hv = value["hv"].as_f64().unwrap();
        assert!((hv - (1.0 - 1.0 / 3.0)).abs() < 2e-3, "hv {hv}");
    }

    #[test]
    fn malformed_front_rows_are_rejected_with_line_numbers() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("front.csv");
        fs::write(&path, "f1,f2\n0.5,oops\n").unwrap();
        match read_front_csv(&path) {
            Err(Error::InvalidParameter { message, .. }) => assert!(message.contains("line 2")),
            other => panic!("expected a parse error, got {other:?}"),
        }
        fs::write(&path, "f1,f2\n").unwrap();
        assert!(read_front_csv(&path).is_err(), "empty front");
    }
}

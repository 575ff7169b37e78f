use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use refined::metrics::{
    binomial_ci, bootstrap_map, classification_eval, gap_statistic, mcnemar, percentile_interval, regression_eval,
    robustness, ClassificationEval, Metric, RegressionEval,
};
use refined::{Error, Result};

use crate::io::{read_id_values, write_file};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Ground truth, CSV `id,value`.
    #[arg(long)]
    truth: PathBuf,
    /// Predictions, CSV `id,value`, same ids as the truth file.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Task::Regression)]
    task: Task,
    /// Scores at or above this are predicted positive.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Bootstrap resamples for percentile confidence intervals (0 = none).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    /// Confidence level for intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Competing predictions to compare against.
    #[arg(long)]
    robust_vs: Option<PathBuf>,
    /// Report the gap statistic against a null model drawn from --train.
    #[arg(long, requires = "train")]
    gap: bool,
    /// Training targets, CSV `id,value`, for the gap statistic's null model.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Metric for robustness and gap: nrmse, nmae, pcc or bias.
    #[arg(long, default_value = "nrmse")]
    metric: Metric,
    /// Resamples for robustness and gap.
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report as CSV `metric,value,ci_low,ci_high`.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Row {
    metric: String,
    value: Option<f64>,
    ci: Option<(f64, f64)>,
}

fn row(metric: &str, value: f64) -> Row {
    Row { metric: metric.into(), value: Some(value), ci: None }
}

/// Values of `pred` in the order of `truth`'s ids.
fn align(truth: &[(String, f64)], pred: &[(String, f64)], what: &Path) -> Result<Vec<f64>> {
    if truth.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "{} has {} rows, truth has {}",
            what.display(),
            pred.len(),
            truth.len()
        )));
    }
    let lookup: HashMap<&str, f64> = pred.iter().map(|(id, v)| (id.as_str(), *v)).collect();
    if lookup.len() != pred.len() {
        return Err(Error::Alignment(format!("{} repeats an id", what.display())));
    }
    truth
        .iter()
        .map(|(id, _)| {
            lookup
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::Alignment(format!("id '{id}' missing from {}", what.display())))
        })
        .collect()
}

fn labels_of(values: &[f64]) -> Result<Vec<bool>> {
    values
        .iter()
        .map(|&v| {
            if v == 0.0 {
                Ok(false)
            } else if v == 1.0 {
                Ok(true)
            } else {
                Err(Error::Schema(format!("classification truth must be 0 or 1, found {v}")))
            }
        })
        .collect()
}

fn regression_rows(e: &RegressionEval) -> Vec<Row> {
    [Metric::Nrmse, Metric::Nmae, Metric::Pcc, Metric::Bias].iter().map(|m| row(m.name(), m.value(e))).collect()
}

fn classification_rows(c: &ClassificationEval) -> Vec<Row> {
    let mut rows = vec![
        row("tp", c.tp as f64),
        row("tn", c.tn as f64),
        row("fp", c.fp as f64),
        row("fn", c.fn_ as f64),
        row("accuracy", c.accuracy),
        row("precision", c.precision),
        row("recall", c.recall),
        row("f1", c.f1),
        row("fpr", c.fpr),
    ];
    rows.push(Row { metric: "auroc".into(), value: c.auroc, ci: None });
    rows
}

fn classification_value(c: &ClassificationEval, name: &str) -> Option<f64> {
    match name {
        "accuracy" => Some(c.accuracy),
        "precision" => Some(c.precision),
        "recall" => Some(c.recall),
        "f1" => Some(c.f1),
        "fpr" => Some(c.fpr),
        "auroc" => c.auroc,
        _ => None,
    }
}

pub fn run(a: EvalArgs) -> Result<()> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Error::Config(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    let truth = read_id_values(&a.truth)?;
    let y: Vec<f64> = truth.iter().map(|t| t.1).collect();
    let pred = align(&truth, &read_id_values(&a.pred)?, &a.pred)?;
    let other = match &a.robust_vs {
        Some(path) => Some(align(&truth, &read_id_values(path)?, path)?),
        None => None,
    };

    let mut rows = match a.task {
        Task::Regression => regression_rows(&regression_eval(&y, &pred)?),
        Task::Classification => classification_rows(&classification_eval(&labels_of(&y)?, &pred, a.threshold)?),
    };

    if a.bootstrap > 0 {
        match a.task {
            Task::Regression => {
                let evals = bootstrap_map(y.len(), a.bootstrap, a.seed, |idx, _| {
                    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
                    let ps: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
                    regression_eval(&ys, &ps).ok()
                });
                for r in &mut rows {
                    let m: Metric = r.metric.parse()?;
                    let vals: Vec<f64> = evals.iter().flatten().map(|e| m.value(e)).collect();
                    r.ci = percentile_interval(&vals, a.level).ok();
                }
            }
            Task::Classification => {
                let labels = labels_of(&y)?;
                let evals = bootstrap_map(y.len(), a.bootstrap, a.seed, |idx, _| {
                    let ls: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
                    let ps: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
                    classification_eval(&ls, &ps, a.threshold).ok()
                });
                for r in &mut rows {
                    let vals: Vec<f64> = evals.iter().flatten().filter_map(|e| classification_value(e, &r.metric)).collect();
                    if !vals.is_empty() {
                        r.ci = percentile_interval(&vals, a.level).ok();
                    }
                }
            }
        }
    }

    if let Some(other) = &other {
        match a.task {
            Task::Regression => {
                let wins = robustness(&y, &pred, other, a.metric, a.iterations, a.seed)?;
                let k = (wins * a.iterations as f64).round() as usize;
                rows.push(Row {
                    metric: format!("win_fraction_{}", a.metric.name()),
                    value: Some(wins),
                    ci: Some(binomial_ci(k, a.iterations, a.level)?),
                });
            }
            Task::Classification => {
                let labels = labels_of(&y)?;
                let correct = |s: &[f64]| -> Vec<bool> {
                    s.iter().zip(&labels).map(|(&v, &l)| (v >= a.threshold) == l).collect()
                };
                let m = mcnemar(&correct(&pred), &correct(other))?;
                rows.push(row("mcnemar_b", m.b as f64));
                rows.push(row("mcnemar_c", m.c as f64));
                rows.push(row("mcnemar_p", m.p_value));
            }
        }
    }

    if a.gap {
        if a.task != Task::Regression {
            return Err(Error::Config("--gap applies to regression only".into()));
        }
        let train = a.train.as_ref().expect("clap enforces --train");
        let train_y: Vec<f64> = read_id_values(train)?.into_iter().map(|t| t.1).collect();
        let g = gap_statistic(&y, &pred, &train_y, a.metric, a.iterations, a.seed)?;
        rows.push(row(&format!("gap_{}", a.metric.name()), g.gap));
        rows.push(row("gap_centroid_low", g.centroids.0));
        rows.push(row("gap_centroid_high", g.centroids.1));
    }

    print_table(&rows);
    if let Some(out) = &a.out {
        write_file(out, |w| {
            let mut wtr = csv::Writer::from_writer(w);
            let err = |e: csv::Error| Error::Format(e.to_string());
            wtr.write_record(["metric", "value", "ci_low", "ci_high"]).map_err(err)?;
            for r in &rows {
                let fmt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
                wtr.write_record([
                    r.metric.clone(),
                    fmt(r.value),
                    fmt(r.ci.map(|c| c.0)),
                    fmt(r.ci.map(|c| c.1)),
                ])
                .map_err(err)?;
            }
            wtr.flush().map_err(|e| Error::io(out, e))
        })?;
    }
    Ok(())
}

fn print_table(rows: &[Row]) {
    let width = rows.iter().map(|r| r.metric.len()).max().unwrap_or(6).max(6);
    println!("{:<width$}  {:>12}  {:>12}  {:>12}", "metric", "value", "ci_low", "ci_high");
    for r in rows {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
        println!(
            "{:<width$}  {:>12}  {:>12}  {:>12}",
            r.metric,
            cell(r.value),
            cell(r.ci.map(|c| c.0)),
            cell(r.ci.map(|c| c.1))
        );
    }
}

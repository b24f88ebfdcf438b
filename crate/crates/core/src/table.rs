//! Aggregate result tables with CSV and JSON renderings.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// One estimated statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub c: f64,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub trial: Option<u64>,
    /// Secondary index: eigenvalue or bin number, count threshold.
    pub index: Option<u64>,
    pub statistic: String,
    pub value: f64,
    pub se: f64,
    pub trials: usize,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub symmetry: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
    /// Trials lost to numerical failures.
    pub failures: usize,
}

type Cell = (u64, Option<u32>, Option<u32>, Option<u64>, Option<u64>);

fn cell(r: &Row) -> Cell {
    (r.c.to_bits(), r.n, r.m, r.trial, r.index)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Full-precision, locale-independent rendering (shortest round-trip form).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

impl ResultTable {
    pub fn new(experiment: &str, symmetry: &str, seed: u64) -> Self {
        ResultTable {
            experiment: experiment.into(),
            symmetry: symmetry.into(),
            seed,
            rows: Vec::new(),
            warnings: Vec::new(),
            failures: 0,
        }
    }

    pub fn push(&mut self, c: f64, n: Option<u32>, statistic: &str, value: f64, se: f64, trials: usize) -> &mut Row {
        self.rows.push(Row {
            c,
            n,
            m: None,
            trial: None,
            index: None,
            statistic: statistic.into(),
            value,
            se,
            trials,
            flag: String::new(),
        });
        self.rows.last_mut().unwrap()
    }

    pub fn warn(&mut self, w: String) {
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.rows.extend(other.rows);
        for w in other.warnings {
            self.warn(w);
        }
        self.failures += other.failures;
    }

    /// First row matching `statistic` at level `n` (any `n` when `None`).
    pub fn get(&self, statistic: &str, n: Option<u32>) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.statistic == statistic && (n.is_none() || r.n == n))
    }

    /// Rows for `statistic` at level `n` (every level when `None`), in table order.
    pub fn select<'a>(&'a self, statistic: &'a str, n: Option<u32>) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.statistic == statistic && (n.is_none() || r.n == n))
    }

    fn find_cell(&self, statistic: &str, key: &Cell) -> Option<&Row> {
        self.rows.iter().find(|r| r.statistic == statistic && cell(r) == *key)
    }

    /// One statistic per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,symmetry,seed,c,n,m,trial,index,statistic,value,se,trials,flag\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.experiment,
                self.symmetry,
                self.seed,
                fmt_f64(r.c),
                opt(r.n),
                opt(r.m),
                opt(r.trial),
                opt(r.index),
                r.statistic,
                fmt_f64(r.value),
                fmt_f64(r.se),
                r.trials,
                r.flag
            );
        }
        out
    }

    /// One line per `(c, n, m, trial, index)` cell with a value and an SE column for
    /// every statistic, in order of first appearance.
    pub fn to_wide_csv(&self) -> String {
        let mut stats: Vec<&str> = Vec::new();
        let mut cells: Vec<Cell> = Vec::new();
        for r in &self.rows {
            if !stats.contains(&r.statistic.as_str()) {
                stats.push(&r.statistic);
            }
            let key = cell(r);
            if !cells.contains(&key) {
                cells.push(key);
            }
        }
        let mut out = String::from("experiment,symmetry,seed,c,n,m,trial,index");
        for s in &stats {
            let _ = write!(out, ",{s},{s}_se");
        }
        out.push_str(",trials,flag\n");
        for key in &cells {
            let (c, n, m, trial, index) = *key;
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.experiment,
                self.symmetry,
                self.seed,
                fmt_f64(f64::from_bits(c)),
                opt(n),
                opt(m),
                opt(trial),
                opt(index)
            );
            let mut trials = 0;
            let mut flags: Vec<&str> = Vec::new();
            for s in &stats {
                match self.find_cell(s, key) {
                    Some(r) => {
                        trials = trials.max(r.trials);
                        if !r.flag.is_empty() && !flags.contains(&r.flag.as_str()) {
                            flags.push(&r.flag);
                        }
                        let _ = write!(out, ",{},{}", fmt_f64(r.value), fmt_f64(r.se));
                    }
                    None => out.push_str(",,"),
                }
            }
            let _ = writeln!(out, ",{},{}", trials, flags.join(";"));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn num(x: f64) -> serde_json::Value {
            serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
        }
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "c": num(r.c),
                    "n": r.n,
                    "m": r.m,
                    "trial": r.trial,
                    "index": r.index,
                    "statistic": r.statistic,
                    "value": num(r.value),
                    "se": num(r.se),
                    "trials": r.trials,
                    "flag": r.flag,
                })
            })
            .collect();
        serde_json::json!({
            "experiment": self.experiment,
            "symmetry": self.symmetry,
            "seed": self.seed,
            "failures": self.failures,
            "warnings": self.warnings,
            "rows": rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layouts() {
        let mut t = ResultTable::new("x", "orthogonal", 7);
        t.push(1.0, Some(8), "a", 0.1, 0.01, 10);
        t.push(1.0, Some(8), "b", 1.0 / 3.0, f64::NAN, 10).flag = "warn".into();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "x,orthogonal,7,1,8,,,,b,0.3333333333333333,NaN,10,warn");
        let wide = t.to_wide_csv();
        let lines: Vec<&str> = wide.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "experiment,symmetry,seed,c,n,m,trial,index,a,a_se,b,b_se,trials,flag");
        assert!(t.to_json()["rows"][1]["se"].is_null());
    }
}

//! CSV and JSON records for the analysis reports.

use std::fmt::Write as _;

use serde::Serialize;

use super::{BottleneckReport, DiameterReport, MixingReport};

/// Schema tag written as the first line of every analysis CSV.
pub const CSV_SCHEMA: &str = "# polymix-analysis-csv v1";
pub const CSV_HEADER: &str = "quantity,epsilon,relative_error,value,stderr,seed,env_id";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub quantity: String,
    pub epsilon: Option<f64>,
    pub relative_error: Option<f64>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub seed: Option<u64>,
    pub env_id: String,
}

impl CsvRow {
    pub fn new(quantity: impl Into<String>, value: f64, env_id: &str) -> Self {
        Self {
            quantity: quantity.into(),
            epsilon: None,
            relative_error: None,
            value,
            stderr: None,
            seed: None,
            env_id: env_id.to_string(),
        }
    }

    pub fn with_eps(mut self, eps: f64, rel: f64) -> Self {
        self.epsilon = Some(eps);
        self.relative_error = Some(rel);
        self
    }

    pub fn with_stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn to_line(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{}",
            self.quantity,
            opt(&self.epsilon),
            opt(&self.relative_error),
            self.value,
            opt(&self.stderr),
            opt(&self.seed),
            self.env_id
        )
    }
}

/// Full CSV document (schema line, header, rows).
pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_SCHEMA}");
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.to_line());
    }
    out
}

pub trait ToCsvRows {
    fn csv_rows(&self, seed: Option<u64>, env_id: &str) -> Vec<CsvRow>;
}

impl ToCsvRows for MixingReport {
    fn csv_rows(&self, seed: Option<u64>, env_id: &str) -> Vec<CsvRow> {
        let mut rows = vec![CsvRow::new("rho", self.rho_estimate, env_id).with_seed(seed)];
        for (j, (&e, &rel)) in self.epsilon_grid.iter().zip(&self.relative_error_grid).enumerate() {
            let times: Vec<f64> = self
                .per_state_tret
                .iter()
                .filter_map(|p| p.tret[j])
                .map(|t| t as f64)
                .collect();
            let se = if times.len() > 1 {
                let m = self.mean_tret[j];
                let var = times.iter().map(|t| (t - m).powi(2)).sum::<f64>() / (times.len() - 1) as f64;
                (var / times.len() as f64).sqrt()
            } else {
                0.0
            };
            rows.push(
                CsvRow::new("tret_mean", self.mean_tret[j], env_id)
                    .with_eps(e, rel)
                    .with_stderr(se)
                    .with_seed(seed),
            );
            rows.push(
                CsvRow::new("tret_max", self.max_tret[j] as f64, env_id)
                    .with_eps(e, rel)
                    .with_seed(seed),
            );
            if let Some(w) = &self.mu_weighted_tret {
                rows.push(
                    CsvRow::new("tret_mu_weighted", w[j], env_id)
                        .with_eps(e, rel)
                        .with_seed(seed),
                );
            }
            rows.push(
                CsvRow::new("tret_excluded", self.excluded[j] as f64, env_id)
                    .with_eps(e, rel)
                    .with_seed(seed),
            );
        }
        rows
    }
}

impl ToCsvRows for DiameterReport {
    fn csv_rows(&self, seed: Option<u64>, env_id: &str) -> Vec<CsvRow> {
        let mut rows = vec![
            CsvRow::new("policy_diameter", self.policy_diameter, env_id).with_seed(seed),
            CsvRow::new("graph_diameter", self.graph_diameter as f64, env_id).with_seed(seed),
        ];
        if let Some(d) = self.min_diameter {
            rows.push(CsvRow::new("min_diameter", d, env_id).with_seed(seed));
        }
        rows
    }
}

impl ToCsvRows for BottleneckReport {
    fn csv_rows(&self, seed: Option<u64>, env_id: &str) -> Vec<CsvRow> {
        let mut rows = vec![
            CsvRow::new("mu_region", self.mu_region, env_id).with_seed(seed),
            CsvRow::new("edge_flow", self.edge_flow, env_id).with_seed(seed),
            CsvRow::new("bottleneck_ratio", self.bottleneck_ratio, env_id).with_seed(seed),
            CsvRow::new("residence_time_analytic", self.residence_time_analytic, env_id)
                .with_seed(seed),
        ];
        if let Some(rt) = &self.residence_time_simulated {
            rows.push(
                CsvRow::new("residence_time_simulated", rt.mean, env_id)
                    .with_stderr(rt.stderr)
                    .with_seed(seed),
            );
        }
        rows
    }
}

use std::fmt::Write as _;

use branch_bayes::branching::{path_stats, simulate_path};
use branch_bayes::hitting::{eta_dist, eta_mean_bounds, eta_mean_exact};
use branch_bayes::kernel::{rho, rho_inverse};
use branch_bayes::montecarlo::{
    clt_experiment, fisher_info_experiment, posterior_consistency_experiment, CltKind,
    ExperimentReport,
};
use branch_bayes::posterior::{
    joint_posterior, limit_mode, limit_moments, limit_posterior, naive_ratio,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::pathfile::read_path;
use crate::{Cli, Command, Format, Kind, ParamArgs};

/// The resolved configuration echoed by every run.
#[derive(Serialize)]
struct RunConfig {
    command: &'static str,
    params: Map<String, Value>,
    seed: u64,
    output_format: Format,
    output_path: Option<String>,
}

impl RunConfig {
    fn new(cli: &Cli, command: &'static str, args: &impl Serialize) -> Self {
        let params = match serde_json::to_value(args) {
            Ok(Value::Object(map)) => map,
            _ => Map::new(),
        };
        RunConfig {
            command,
            params,
            seed: cli.seed,
            output_format: cli.format,
            output_path: cli.output.as_ref().map(|p| p.display().to_string()),
        }
    }

    fn set(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(key.to_string(), json!(value));
    }

    fn csv_header(&self) -> String {
        let mut out = format!("# command={}\n", self.command);
        for (k, v) in &self.params {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# output_format=csv");
        if let Some(p) = &self.output_path {
            let _ = writeln!(out, "# output_path={p}");
        }
        out
    }
}

fn json_line(value: &Value) -> String {
    let mut s = value.to_string();
    s.push('\n');
    s
}

/// Resolves `(u, r)` from whichever of the two was given.
fn resolve(args: &ParamArgs) -> Result<(f64, f64)> {
    match (args.u, args.r) {
        (Some(u), _) => Ok((u, rho(u)?)),
        (None, Some(r)) => Ok((rho_inverse(r)?, r)),
        (None, None) => Err(CliError::Usage("one of --u or --r is required".into())),
    }
}

pub fn render(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Simulate(a) => {
            let cfg = RunConfig::new(cli, "simulate", a);
            let path = simulate_path(a.x0, a.u, a.n, cli.seed)?;
            Ok(match cli.format {
                Format::Json => {
                    let stats = if path.observations().len() >= 2 {
                        Some(path_stats(&path)?)
                    } else {
                        None
                    };
                    json_line(&json!({
                        "config": cfg,
                        "path": path.values(),
                        "origin_included": path.origin_included(),
                        "stats": stats,
                    }))
                }
                Format::Csv => {
                    let mut out = cfg.csv_header();
                    let _ = writeln!(out, "# origin_included={}", path.origin_included());
                    for v in path.values() {
                        let _ = writeln!(out, "{v}");
                    }
                    out
                }
            })
        }
        Command::Posterior(a) => {
            let mut cfg = RunConfig::new(cli, "posterior", a);
            let path = read_path(&a.path_file, a.origin_included)?;
            cfg.set("origin_included", path.origin_included());
            let stats = path_stats(&path)?;
            let jp = joint_posterior(&path)?;
            Ok(match cli.format {
                Format::Json => json_line(&json!({"config": cfg, "stats": stats, "posterior": jp})),
                Format::Csv => {
                    let mut out = cfg.csv_header();
                    out.push_str("x0,prob,u_mean,u_sd\n");
                    for (i, (x0, p)) in jp.x0_marginal.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "{x0},{p},{},{}",
                            jp.u_conditional_mean[i], jp.u_conditional_sd[i]
                        );
                    }
                    out
                }
            })
        }
        Command::Limit(a) => {
            let mut cfg = RunConfig::new(cli, "limit", a);
            let (u, r) = resolve(a)?;
            cfg.set("u", u);
            cfg.set("r", r);
            let dist = limit_posterior(r, a.x)?;
            Ok(match cli.format {
                Format::Json => json_line(&json!({
                    "config": cfg,
                    "distribution": dist,
                    "moments": limit_moments(r, a.x)?,
                    "mode": limit_mode(r, a.x)?,
                })),
                Format::Csv => {
                    let mut out = cfg.csv_header();
                    out.push_str("y,prob,log_weight\n");
                    for ((y, p), w) in dist.iter().zip(dist.log_weights()) {
                        let _ = writeln!(out, "{y},{p},{w}");
                    }
                    out
                }
            })
        }
        Command::Hitting(a) => {
            let mut cfg = RunConfig::new(cli, "hitting", a);
            let (u, r) = resolve(a)?;
            cfg.set("u", u);
            cfg.set("r", r);
            let hd = eta_dist(a.x, u)?;
            Ok(match cli.format {
                Format::Json => json_line(&json!({
                    "config": cfg,
                    "distribution": hd,
                    "mean": eta_mean_exact(a.x, u)?,
                    "mean_bounds": eta_mean_bounds(a.x, u)?,
                })),
                Format::Csv => {
                    let mut out = cfg.csv_header();
                    out.push_str("y,prob\n");
                    for (y, p) in hd.dist.iter() {
                        let _ = writeln!(out, "{y},{p}");
                    }
                    out
                }
            })
        }
        Command::Clt(a) => {
            let kind = match a.kind {
                Kind::Xi => CltKind::Xi,
                Kind::Eta => CltKind::Eta,
            };
            let report = clt_experiment(kind, a.u, a.x, a.n, cli.seed)?;
            Ok(experiments(cli, RunConfig::new(cli, "clt", a), &[report]))
        }
        Command::Consistency(a) => {
            let reports = posterior_consistency_experiment(a.u, a.x0, &a.n_list, cli.seed)?;
            Ok(experiments(
                cli,
                RunConfig::new(cli, "consistency", a),
                &reports,
            ))
        }
        Command::Fisher(a) => {
            let report = fisher_info_experiment(a.u, a.n, a.lambda0, a.m, cli.seed)?;
            Ok(experiments(
                cli,
                RunConfig::new(cli, "fisher", a),
                &[report],
            ))
        }
        Command::Compare(a) => {
            let cfg = RunConfig::new(cli, "compare", a);
            let rows =
                a.u.iter()
                    .map(|&u| {
                        let bayes = limit_moments(rho(u)?, 2)?.mean;
                        Ok(CompareRow {
                            u,
                            bayes_mean: bayes,
                            naive_mean: 2.0 / (1.0 + u),
                            ratio: naive_ratio(u)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
            Ok(match cli.format {
                Format::Json => json_line(&json!({"config": cfg, "rows": rows})),
                Format::Csv => {
                    let mut out = cfg.csv_header();
                    out.push_str("u,bayes_mean,naive_mean,ratio\n");
                    for r in &rows {
                        let _ =
                            writeln!(out, "{},{},{},{}", r.u, r.bayes_mean, r.naive_mean, r.ratio);
                    }
                    out
                }
            })
        }
    }
}

#[derive(Serialize)]
struct CompareRow {
    u: f64,
    /// Mean of `mu(rho(u), 2)`.
    bayes_mean: f64,
    /// `2 / (1 + u)`.
    naive_mean: f64,
    ratio: f64,
}

fn experiments(cli: &Cli, cfg: RunConfig, reports: &[ExperimentReport]) -> String {
    match cli.format {
        Format::Json => {
            let mut out = json_line(&json!({ "config": cfg }));
            for r in reports {
                out.push_str(&r.to_json_line());
                out.push('\n');
            }
            out
        }
        Format::Csv => {
            let mut out = cfg.csv_header();
            out.push_str("name,statistic,threshold,n_samples,seed,passed\n");
            for r in reports {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.name, r.statistic, r.threshold, r.n_samples, r.seed, r.passed
                );
            }
            out
        }
    }
}

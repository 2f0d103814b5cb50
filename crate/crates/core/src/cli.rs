//! Batch front end: structure-constant tables and named verification suites.

use std::fs;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, ValueEnum};
use serde::Serialize;

use crate::check::{all_pass, Check};
use crate::error::{Error, Result};
use crate::ff::FieldSpec;
use crate::hall::HallAlgebra;
use crate::quiver::{Quiver, RepCategory};
use crate::suites::{self, SuiteOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "sdh", about = "Exact Hall algebra tables and relation suites over prime fields")]
#[command(group(ArgGroup::new("mode").required(true).args(["suite", "table"])))]
pub struct RunConfig {
    #[arg(long)]
    pub quiver: PathBuf,
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub table: bool,
    #[arg(long, requires = "table")]
    pub bound: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Falsify one relation of the suite (negative control).
    #[arg(long, hide = true)]
    pub perturb: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    suite: &'a str,
    q: u32,
    quiver: serde_json::Value,
    checks: &'a [Check],
    seed: u64,
}

pub enum Outcome {
    Pass,
    Fail,
}

fn load(cfg: &RunConfig) -> Result<(Quiver, FieldSpec)> {
    let text = fs::read_to_string(&cfg.quiver).map_err(|e| Error::Input(format!("{}: {e}", cfg.quiver.display())))?;
    let quiver = Quiver::from_json(&text)?;
    let field = FieldSpec::new(cfg.q).map_err(|e| match e {
        Error::Input(_) => e,
        e => Error::Input(e.to_string()),
    })?;
    Ok((quiver, field))
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit(cfg: &RunConfig, text: String) -> Result<()> {
    match &cfg.out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_table(cfg: &RunConfig) -> Result<Outcome> {
    let bound = cfg.bound.ok_or_else(|| Error::Input("--table needs --bound".into()))?;
    let (quiver, field) = load(cfg)?;
    let hall = HallAlgebra::new(RepCategory::new(quiver, field));
    let mut rows = hall.structure_table(bound).map_err(|e| Error::Input(e.to_string()))?;
    rows.sort_by(|x, y| (&x.a, &x.c, &x.b).cmp(&(&y.a, &y.c, &y.b)));
    let text = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("serializable") + "\n",
        Format::Csv => csv_text(&rows)?,
    };
    emit(cfg, text)?;
    Ok(Outcome::Pass)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let suite = cfg.suite.as_deref().expect("mode group is required");
    if !suites::SUITES.contains(&suite) {
        return Err(Error::Input(format!("unknown suite {suite}")));
    }
    let (quiver, field) = load(cfg)?;
    let qjson: serde_json::Value = serde_json::from_str(&quiver.to_json()).expect("quiver json");
    let cat = RepCategory::new(quiver, field);
    let opts = SuiteOptions { samples: cfg.samples, seed: cfg.seed, perturb: cfg.perturb };
    let checks = match suites::run(suite, &cat, opts) {
        Ok(c) => c,
        Err(e @ Error::Input(_)) => return Err(e),
        Err(e @ (Error::PreconditionError(_) | Error::WindowExceeded(_))) => return Err(Error::Input(e.to_string())),
        Err(e) => vec![Check::flag(format!("{suite} aborted"), false, e.to_string(), "")],
    };
    let text = match cfg.format {
        Format::Json => {
            let r = Report { suite, q: cfg.q, quiver: qjson, checks: &checks, seed: cfg.seed };
            serde_json::to_string_pretty(&r).expect("serializable") + "\n"
        }
        Format::Csv => csv_text(&checks)?,
    };
    emit(cfg, text)?;
    Ok(if all_pass(&checks) { Outcome::Pass } else { Outcome::Fail })
}

/// Exit code: 0 all pass, 1 a relation failed, 2 bad input.
pub fn run(cfg: &RunConfig) -> i32 {
    let res = if cfg.table { cmd_table(cfg) } else { cmd_verify(cfg) };
    match res {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("sdh: {e}");
            2
        }
    }
}

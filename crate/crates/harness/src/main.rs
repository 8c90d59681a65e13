use bapred::predictions::GoodGroupLemma;
use bapred_harness::lemmas::run_lemma_grid;
use bapred_harness::{check_scaling, read_rows, run_one, sweep, ConfigError, Grid, ResultRow, SweepError, CSV_HEADER};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "bapred", about = "Byzantine agreement with classification predictions: simulation harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One simulation; prints a summary and a CSV row.
    Run(Experiment),
    /// Cross product over list-valued keys (e.g. --n "[16,32]"), one row per seed.
    Sweep(Experiment),
    /// Log-log slope of a metric against a parameter in a sweep CSV.
    Check(Check),
    /// Good-group lemma checkers over randomized instances.
    Lemmas(Lemmas),
}

#[derive(Args)]
struct Experiment {
    /// key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    t: Option<String>,
    /// Fault count, or "t".
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Misprediction budget: bits, or "<k>n".
    #[arg(long = "B")]
    b: Option<String>,
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// "a..b", "a,b,c", or a single seed.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long = "round-cap")]
    round_cap: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any other key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Experiment {
    fn grid(&self) -> Result<Grid, ConfigError> {
        let mut g = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Invalid(format!("{}: {e}", p.display())))?;
                Grid::parse(&text)?
            }
            None => Grid::default(),
        };
        let flags = [
            ("protocol", &self.protocol),
            ("n", &self.n),
            ("t", &self.t),
            ("f", &self.f),
            ("epsilon", &self.epsilon),
            ("B", &self.b),
            ("adversary", &self.adversary),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("kappa", &self.kappa),
            ("round_cap", &self.round_cap),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                g.set(k, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::BadValue { key: "set".into(), value: kv.clone() })?;
            g.set(k.trim(), v.trim())?;
        }
        Ok(g)
    }
}

#[derive(Args)]
struct Check {
    #[arg(long)]
    csv: PathBuf,
    /// Parameter column, e.g. n.
    #[arg(long, default_value = "n")]
    x: String,
    /// Metric column: rounds, messages or bits.
    #[arg(long, default_value = "bits")]
    y: String,
    #[arg(long)]
    expected: f64,
    #[arg(long, default_value_t = 0.2)]
    tolerance: f64,
    /// Keep rows whose column equals the value (column=value, repeatable).
    #[arg(long = "where", value_name = "COLUMN=VALUE")]
    filter: Vec<String>,
}

#[derive(Args)]
struct Lemmas {
    /// In-precondition instances per lemma.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// one_good_23, half_good_23 or one_good_exists; all when omitted.
    #[arg(long)]
    lemma: Option<String>,
    #[arg(long, default_value_t = 16)]
    n_min: usize,
    #[arg(long, default_value_t = 128)]
    n_max: usize,
}

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn cmd_run(exp: &Experiment) -> ExitCode {
    let cells = match exp.grid().and_then(|g| g.expand()) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let [cfg] = cells.as_slice() else {
        return config_error("run takes a single configuration; use sweep for lists");
    };
    if let Err(e) = cfg.validate() {
        return config_error(e);
    }
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let seed = cfg.seeds[0];
    let result = match run_one(cfg, seed) {
        Ok(r) => r,
        Err(e) if e.is_invariant() => {
            eprintln!("invariant violation: {e}");
            return ExitCode::from(EXIT_VIOLATION);
        }
        Err(e) => return config_error(e),
    };
    print!("{}", result.summary());
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(CSV_HEADER);
    let _ = w.write_record(result.row.to_record());
    let text = String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default();
    match &cfg.out {
        Some(p) => {
            if let Err(e) = bapred_harness::write_rows(p, std::slice::from_ref(&result.row)) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
        None => print!("{text}"),
    }
    if result.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn cmd_sweep(exp: &Experiment) -> ExitCode {
    let cells = match exp.grid().and_then(|g| g.expand()) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let mut warned = std::collections::BTreeSet::new();
    for c in &cells {
        for w in c.warnings() {
            if warned.insert(w.clone()) {
                eprintln!("warning: {w}");
            }
        }
    }
    let out = cells.first().and_then(|c| c.out.clone());
    match sweep(&cells, out.as_deref()) {
        Ok(report) => {
            eprintln!(
                "{} rows ({} executed, {} reused), {} with violations",
                report.rows.len(),
                report.executed,
                report.reused,
                report.violations.len()
            );
            if out.is_none() {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                let _ = w.write_record(CSV_HEADER);
                for r in &report.rows {
                    let _ = w.write_record(r.to_record());
                }
                let _ = w.flush();
            }
            for fp in &report.violations {
                eprintln!("violation: {fp}");
            }
            if report.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATION)
            }
        }
        Err(SweepError::Run { fingerprint, source }) if source.is_invariant() => {
            eprintln!("invariant violation in {fingerprint}: {source}");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(e) => config_error(e),
    }
}

fn column(r: &ResultRow, name: &str) -> Option<String> {
    match name {
        "protocol" => Some(r.protocol.clone()),
        "adversary" => Some(r.adversary.clone()),
        "epsilon" => Some(r.epsilon.clone()),
        _ => r.metric(name).map(|v| v.to_string()),
    }
}

fn cmd_check(c: &Check) -> ExitCode {
    let rows = match read_rows(&c.csv) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let mut filters = Vec::new();
    for f in &c.filter {
        match f.split_once('=') {
            Some((k, v)) => filters.push((k.trim().to_string(), v.trim().to_string())),
            None => return config_error(format!("bad --where {f:?}")),
        }
    }
    let rows: Vec<ResultRow> =
        rows.into_iter().filter(|r| filters.iter().all(|(k, v)| column(r, k).as_deref() == Some(v.as_str()))).collect();
    match check_scaling(&rows, &c.x, &c.y, c.expected, c.tolerance) {
        Ok(fit) => {
            for (x, y) in &fit.points {
                println!("{}={x} median {}={y}", c.x, c.y);
            }
            println!("slope {:.4} expected {} ± {} {}", fit.slope, fit.expected, fit.tolerance, if fit.pass { "PASS" } else { "FAIL" });
            if fit.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATION)
            }
        }
        Err(e) => config_error(e),
    }
}

fn cmd_lemmas(l: &Lemmas) -> ExitCode {
    let lemmas: Vec<GoodGroupLemma> = match &l.lemma {
        None => GoodGroupLemma::ALL.to_vec(),
        Some(name) => match GoodGroupLemma::ALL.into_iter().find(|x| x.name() == name) {
            Some(x) => vec![x],
            None => return config_error(format!("unknown lemma {name:?}")),
        },
    };
    if l.n_min < 2 || l.n_min > l.n_max {
        return config_error("need 2 <= n_min <= n_max");
    }
    let mut failed = false;
    for lemma in lemmas {
        let (s, _) = run_lemma_grid(lemma, l.trials, (l.n_min, l.n_max));
        let ok = s.failures.is_empty() && s.within_preconditions >= l.trials;
        failed |= !ok;
        println!(
            "{:<16} drawn {:>6} in-preconditions {:>6} with-misclassified {:>6} min-slack {:>3} failures {} {}",
            lemma.name(),
            s.trials,
            s.within_preconditions,
            s.with_misclassified,
            s.min_slack.unwrap_or(0),
            s.failures.len(),
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failed {
        ExitCode::from(EXIT_VIOLATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Run(e) => cmd_run(e),
        Cmd::Sweep(e) => cmd_sweep(e),
        Cmd::Check(c) => cmd_check(c),
        Cmd::Lemmas(l) => cmd_lemmas(l),
    }
}

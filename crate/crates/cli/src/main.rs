mod config;
mod merge;
mod ops;

use clap::{Args, Parser, Subcommand};
use katolab::geometry::{export_space, write_graph, write_off};
use katolab::generators::Generated;
use ops::{load_space, run_op, Context, Outcome, Params};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "katolab", version, about = "Heat-kernel curvature diagnostics on discrete spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Generator spec such as `flat_torus(1,1,32)`, or a .off/.obj/.graph file.
    space: String,
    /// Number of eigenpairs (default: all up to the dense limit, else 300).
    #[arg(long)]
    modes: Option<usize>,
    /// Potential: angle_defect, zero, constant:c or file:path.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `operation=value`; repeatable.
    #[arg(long = "tolerance", value_parser = key_value)]
    tolerances: Vec<(String, String)>,
    /// Output file (JSON); a CSV companion is written next to it when available.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated mesh (OFF) or graph (text format).
    Gen {
        spec: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export measure, edges and stiffness as JSON.
    Space {
        space: String,
        #[arg(long)]
        distances: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalues of the Laplacian.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        m: Option<usize>,
    },
    /// Heat kernel row `y ↦ H(t,x,y)` as CSV.
    Heat {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0)]
        x: usize,
    },
    /// Kato constant profile and bound classification.
    Kato {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T", default_value_t = 1.0)]
        t_big: f64,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Entropy almost-monotonicity scan.
    Entropy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 0.02)]
        s: f64,
        #[arg(long, default_value_t = 0.04)]
        t: f64,
    },
    /// Run one named operation and report its verdict through the exit code.
    Verify {
        name: String,
        #[command(flatten)]
        common: Common,
        /// Operation parameter `key=value`; repeatable.
        #[arg(long = "param", value_parser = key_value)]
        params: Vec<(String, String)>,
    },
    /// Heat-smoothed cut-off function.
    Cutoff {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 0.2)]
        r: f64,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long = "T", default_value_t = 1.0)]
        t_big: f64,
    },
    /// Gauging function of the potential.
    Gauge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        t_star: f64,
    },
    /// Harmonic splitting map on a ball.
    Split {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
    },
    /// Gromov–Hausdorff estimate between two spaces.
    Gh {
        #[command(flatten)]
        common: Common,
        other: String,
    },
    /// Tangent-cone probe at a vertex.
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        x: usize,
        /// Comma-separated scales.
        #[arg(long, default_value = "0.2,0.1")]
        eps: String,
    },
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Override the scenario output directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long = "tolerance", value_parser = key_value)]
        tolerances: Vec<(String, String)>,
    },
    /// Merge report files into a summary with margin histograms.
    Report {
        paths: Vec<PathBuf>,
        #[arg(short, long, default_value = "katolab-report")]
        output: PathBuf,
    },
}

fn key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| format!("expected key=value, got `{s}`"))
}

fn tolerance_map(list: &[(String, String)]) -> Result<BTreeMap<String, f64>, String> {
    list.iter().map(|(k, v)| v.parse().map(|x| (k.clone(), x)).map_err(|_| format!("tolerance `{k}` must be a number"))).collect()
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value") + "\n"
}

fn emit(out: &Outcome, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(path) => {
            write(path, &pretty(&out.json))?;
            if let Some(csv) = &out.csv {
                write(&path.with_extension("csv"), csv)?;
            }
        }
        None => print!("{}", pretty(&out.json)),
    }
    Ok(())
}

fn run_single(common: &Common, op: &str, params: BTreeMap<String, String>) -> Result<i32, String> {
    let (space, _) = load_space(&common.space)?;
    let ctx = Context::new(space, common.modes, common.seed, common.potential.clone(), tolerance_map(&common.tolerances)?);
    let out = run_op(&ctx, op, &Params::new(params))?;
    emit(&out, common.output.as_deref())?;
    Ok(out.verdict.map_or(0, |v| merge::exit_code(&[v])))
}

fn params<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn run_scenario(config: &Path, output: Option<PathBuf>, overrides: &[(String, String)]) -> Result<i32, String> {
    let origin = config.display().to_string();
    let text = std::fs::read_to_string(config).map_err(|e| format!("{origin}: {e}"))?;
    let mut sc = config::scenario(&text, &origin).map_err(|e| e.to_string())?;
    sc.tolerances.extend(tolerance_map(overrides)?);
    if sc.steps.is_empty() {
        return Ok(0);
    }
    let source = match &sc.source {
        config::Source::Generator(g) => g.clone(),
        config::Source::Input(p) => {
            let base = config.parent().unwrap_or(Path::new("."));
            base.join(p).display().to_string()
        }
    };
    let (space, _) = load_space(&source).map_err(|e| format!("{origin}: {e}"))?;
    let ctx = Context::new(space, sc.modes, sc.seed, sc.potential.clone(), sc.tolerances.clone());
    let dir = output.unwrap_or_else(|| PathBuf::from(&sc.output));
    let mut verdicts = Vec::new();
    let mut steps = Vec::new();
    for step in &sc.steps {
        let out = run_op(&ctx, &step.op, &Params::new(step.params.clone())).map_err(|e| format!("{origin}:{}: step {}: {e}", step.line, step.index))?;
        let stem = format!("{:03}_{}", step.index, step.op);
        emit(&out, Some(&dir.join(format!("{stem}.json"))))?;
        let verdict = out.verdict.map(|v| v.to_string());
        eprintln!("step {} {}: {}", step.index, step.op, verdict.as_deref().unwrap_or("done"));
        steps.push(json!({ "index": step.index, "op": step.op, "verdict": verdict, "output": format!("{stem}.json") }));
        verdicts.extend(out.verdict);
    }
    let code = merge::exit_code(&verdicts);
    write(&dir.join("summary.json"), &pretty(&json!({ "source": source, "seed": sc.seed, "steps": steps, "exit_code": code })))?;
    Ok(code)
}

fn run_report(paths: &[PathBuf], output: &Path) -> Result<i32, String> {
    let mut all = Vec::new();
    for p in paths {
        let name = p.display().to_string();
        let text = std::fs::read_to_string(p).map_err(|e| format!("{name}: {e}"))?;
        all.extend(merge::extract(&name, &text)?);
    }
    let (summary, warnings) = merge::merge(all);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    write(&output.join("summary.json"), &(serde_json::to_string_pretty(&summary).expect("summary") + "\n"))?;
    for r in &summary.reports {
        write(&output.join(format!("{}_margins.csv", r.name)), &merge::histogram(r, 20))?;
    }
    Ok(merge::exit_code(summary.reports.iter().map(|r| &r.verdict)))
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Gen { spec, output } => {
            let (_, g) = load_space(&spec)?;
            let (text, ext) = match g.ok_or("`gen` expects a generator spec")? {
                Generated::Mesh(m) => (write_off(&m), "off"),
                Generated::Graph(g) => (write_graph(&g), "graph"),
            };
            match output {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
            eprintln!("generated {ext} data");
            Ok(0)
        }
        Command::Space { space, distances, output } => {
            let (s, _) = load_space(&space)?;
            let v = serde_json::to_value(export_space(&s, distances)).expect("export");
            emit(&Outcome { verdict: None, json: v, csv: None }, output.as_deref())?;
            Ok(0)
        }
        Command::Spectrum { common, m } => run_single(&common, "spectrum", m.map(|m| params([("m", m.to_string())])).unwrap_or_default()),
        Command::Heat { common, t, x } => {
            let (space, _) = load_space(&common.space)?;
            let ctx = Context::new(space, common.modes, common.seed, None, BTreeMap::new());
            let hk = ctx.kernel()?;
            let row = hk.kernel_row(t, x).map_err(|e| e.to_string())?;
            let csv = row.iter().enumerate().fold(String::from("vertex,h\n"), |mut s, (y, h)| {
                s.push_str(&format!("{y},{h:e}\n"));
                s
            });
            match common.output {
                Some(p) => write(&p, &csv)?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Kato { common, t_big, n } => {
            let mut p = params([("T", t_big.to_string())]);
            if let Some(n) = n {
                p.insert("n".into(), n.to_string());
            }
            run_single(&common, "classify_bounds", p)
        }
        Command::Entropy { common, x, s, t } => {
            run_single(&common, "monotonicity_scan", params([("x", x.to_string()), ("s", s.to_string()), ("t", t.to_string())]))
        }
        Command::Verify { name, common, params } => run_single(&common, &name, params.into_iter().collect()),
        Command::Cutoff { common, x, r, s, t_big } => run_single(
            &common,
            "heat_cutoff",
            params([("x", x.to_string()), ("r", r.to_string()), ("s", s.unwrap_or(r).to_string()), ("T", t_big.to_string())]),
        ),
        Command::Gauge { common, t_star } => run_single(&common, "gauging_function", params([("t_star", t_star.to_string())])),
        Command::Split { common, x, r } => run_single(&common, "build_splitting_map", params([("x", x.to_string()), ("r", r.to_string())])),
        Command::Gh { common, other } => run_single(&common, "gh_upper_bound", params([("other", other)])),
        Command::Probe { common, x, eps } => run_single(&common, "tangent_probe", params([("x", x.to_string()), ("eps", eps)])),
        Command::Run { config, output, tolerances } => run_scenario(&config, output, &tolerances),
        Command::Report { paths, output } => run_report(&paths, &output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("KATOLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: KATOLAB_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(1);
            }
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

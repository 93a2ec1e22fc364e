use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use neutralgeom::acceptance::{self, SuiteOptions};
use neutralgeom::families::{builtin, generate, FamilySpec, JetMode, ValidationOptions, BUILTINS};
use neutralgeom::grid::{Rect, DEFAULT_GRID};
use neutralgeom::jet::{FdOrder, FdStep};
use neutralgeom::residuals::{ResidualReport, Tolerances};

const EXIT_ERROR: u8 = 1;
const EXIT_VERDICT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "neutralgeom",
    version,
    about = "Quasi-minimal biconservative surfaces in E^4_2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance and write it with its validation report as JSON.
    Generate(RunArgs),
    /// Sweep residuals and check verdicts.
    Classify {
        #[command(flatten)]
        run: RunArgs,
        /// Verdict that must hold, as `name` or `name=false`; repeatable.
        #[arg(long = "expect", value_name = "VERDICT")]
        expect: Vec<String>,
    },
    /// Write one CSV row per grid node.
    Sample(RunArgs),
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, value_enum, default_value_t = Jets::Analytic)]
        jets: Jets,
        /// Factor applied to every upper bound.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Jets {
    Analytic,
    Fd,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in instance name.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    builtin: Option<String>,
    /// Family spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Grid size `NSxNT`.
    #[arg(long, default_value_t = format!("{DEFAULT_GRID}x{DEFAULT_GRID}"))]
    grid: String,
    /// Parameter rectangle `s0,s1,t0,t1`; defaults to the spec's domain.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    #[arg(long, value_enum, default_value_t = Jets::Analytic)]
    jets: Jets,
    /// Fixed finite-difference step.
    #[arg(long)]
    fd_step: Option<f64>,
    /// Finite-difference accuracy order (2 or 4).
    #[arg(long, default_value_t = 4)]
    fd_order: usize,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Loaded {
    instance: String,
    spec: FamilySpec,
    opts: ValidationOptions,
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("grid must look like 41x41, got {s:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn parse_domain(s: &str) -> Result<Rect> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("domain must be s0,s1,t0,t1, got {s:?}"))?;
    let [s0, s1, t0, t1] = v[..] else {
        bail!("domain must have four numbers, got {}", v.len());
    };
    Ok(Rect::new([s0, s1], [t0, t1])?)
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let at = text.find(&format!("\"{key}\""))?;
    Some(text[..at].matches('\n').count() + 1)
}

fn variant<T: DeserializeOwned>(body: serde_json::Value, path: &Path, text: &str) -> Result<T> {
    serde_path_to_error::deserialize(body).map_err(|e| {
        let field = e.path().to_string();
        let key = e.path().iter().find_map(|seg| match seg {
            serde_path_to_error::Segment::Map { key } => Some(key.clone()),
            _ => None,
        });
        let line = key
            .and_then(|k| line_of(text, &k))
            .map_or(String::new(), |l| format!(":{l}"));
        anyhow!("{}{line}: at `{field}`: {}", path.display(), e.inner())
    })
}

fn read_spec(path: &Path) -> Result<FamilySpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut body: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))?;
    let object = body
        .as_object_mut()
        .ok_or_else(|| anyhow!("{}: spec must be a JSON object", path.display()))?;
    let family = match object.remove("family") {
        Some(serde_json::Value::String(f)) => f,
        _ => bail!(
            "{}: missing string field `family` (one of i, ii, iii, surface)",
            path.display()
        ),
    };
    Ok(match family.as_str() {
        "i" => FamilySpec::I(variant(body, path, &text)?),
        "ii" => FamilySpec::II(variant(body, path, &text)?),
        "iii" => FamilySpec::III(variant(body, path, &text)?),
        "surface" => FamilySpec::Surface(variant(body, path, &text)?),
        other => bail!(
            "{}:{}: unknown family {other:?} (one of i, ii, iii, surface)",
            path.display(),
            line_of(&text, "family").unwrap_or(1)
        ),
    })
}

fn with_domain(spec: &mut FamilySpec, rect: Rect) {
    match spec {
        FamilySpec::I(s) => s.domain = rect,
        FamilySpec::II(s) => s.domain = rect,
        FamilySpec::III(s) => s.domain = rect,
        FamilySpec::Surface(s) => s.domain = rect,
    }
}

fn load(args: &RunArgs) -> Result<Loaded> {
    let (instance, mut spec) = match (&args.builtin, &args.spec) {
        (Some(name), _) => (name.clone(), builtin(name)?),
        (None, Some(path)) => (path.display().to_string(), read_spec(path)?),
        (None, None) => bail!(
            "one of --builtin ({}) or --spec is required",
            BUILTINS.join(", ")
        ),
    };
    if let Some(d) = &args.domain {
        with_domain(&mut spec, parse_domain(d)?);
    }
    let jets = match args.jets {
        Jets::Analytic => JetMode::Analytic,
        Jets::Fd => JetMode::FiniteDifference {
            step: args.fd_step.map_or(FdStep::Auto, FdStep::Fixed),
            order: match args.fd_order {
                2 => FdOrder::Second,
                4 => FdOrder::Fourth,
                n => bail!("--fd-order must be 2 or 4, got {n}"),
            },
        },
    };
    let mut opts = ValidationOptions::with_jets(jets);
    opts.size = parse_grid(&args.grid)?;
    opts.tolerances = overrides(opts.tolerances, &args.tol)?;
    Ok(Loaded {
        instance,
        spec,
        opts,
    })
}

fn overrides(mut tol: Tolerances, items: &[String]) -> Result<Tolerances> {
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--tol expects name=value, got {item:?}"))?;
        let value: f64 = value.parse().with_context(|| format!("--tol {item}"))?;
        tol.set(name.trim(), value)?;
    }
    Ok(tol)
}

fn parse_expect(item: &str) -> Result<(String, bool)> {
    match item.split_once('=') {
        None => Ok((item.to_string(), true)),
        Some((name, v)) => Ok((
            name.to_string(),
            v.parse()
                .with_context(|| format!("--expect {item}: value must be true or false"))?,
        )),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GeneratedOutput<'a> {
    instance: &'a str,
    spec_hash: &'a str,
    spec: &'a FamilySpec,
    jets: JetMode,
    /// Proportionality factor `e3 = B α` per `t`, for family (iii).
    e3_alpha_factor: Option<Vec<(f64, f64)>>,
    validation: &'a ResidualReport,
    geometry: &'a [neutralgeom::geometry::PointGeometry],
}

fn cmd_generate(args: &RunArgs) -> Result<u8> {
    let l = load(args)?;
    let g = generate(&l.instance, &l.spec, &l.opts)?;
    write_json(
        args.out.as_deref(),
        &GeneratedOutput {
            instance: &g.instance,
            spec_hash: &g.spec_hash,
            spec: &g.spec,
            jets: g.jets,
            e3_alpha_factor: g.e3_alpha_factor(),
            validation: &g.validation,
            geometry: &g.geometry,
        },
    )?;
    Ok(0)
}

/// Sweeps the instance; generic surfaces with failing nodes still get a report.
fn sweep(l: &Loaded) -> Result<ResidualReport> {
    Ok(generate(&l.instance, &l.spec, &l.opts)?.validation)
}

fn cmd_classify(args: &RunArgs, expect: &[String]) -> Result<u8> {
    let expectations: Vec<(String, bool)> = expect
        .iter()
        .map(|e| parse_expect(e))
        .collect::<Result<_>>()?;
    let l = load(args)?;
    let report = sweep(&l)?;
    write_json(args.out.as_deref(), &report)?;
    let verdicts = neutralgeom::residuals::classify(&report, &report.tolerances)?;
    eprintln!("{}", serde_json::to_string(&verdicts)?);
    let mut code = 0;
    for (name, wanted) in expectations {
        let got = verdicts
            .get(&name)
            .ok_or_else(|| anyhow!("unknown verdict {name:?}"))?;
        if got != wanted {
            eprintln!("verdict {name}: expected {wanted}, got {got}");
            code = EXIT_VERDICT;
        }
    }
    Ok(code)
}

#[derive(Serialize)]
struct SampleRow {
    s: f64,
    t: f64,
    x1: f64,
    x2: f64,
    x3: f64,
    x4: f64,
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "L")]
    l: Option<f64>,
    res_bicons: f64,
    res_biharm: Option<f64>,
    #[serde(rename = "HH")]
    hh: f64,
}

fn cmd_sample(args: &RunArgs) -> Result<u8> {
    let l = load(args)?;
    let report = sweep(&l)?;
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    for p in &report.points {
        let [x1, x2, x3, x4] = p.position.0;
        w.serialize(SampleRow {
            s: p.s,
            t: p.t,
            x1,
            x2,
            x3,
            x4,
            k: p.k,
            l: p.l,
            res_bicons: p.biconservative,
            res_biharm: p.biharmonic,
            hh: p.hh,
        })?;
    }
    w.flush()?;
    if let Some(f) = report.failures.first() {
        eprintln!(
            "{} of {} nodes skipped; first at ({}, {}): {}",
            report.failures.len(),
            report.failures.len() + report.points.len(),
            f.s,
            f.t,
            f.error
        );
    }
    Ok(0)
}

fn cmd_selftest(jets: Jets, tol_scale: f64) -> Result<u8> {
    let jets = match jets {
        Jets::Analytic => JetMode::Analytic,
        Jets::Fd => JetMode::fd_default(),
    };
    let outcomes = acceptance::run(SuiteOptions { jets, tol_scale });
    let mut out = io::stdout().lock();
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(
        out,
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    )?;
    Ok(if failed == 0 { 0 } else { EXIT_VERDICT })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NEUTRALGEOM_THREADS") {
        let n =
            v.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
                anyhow!("NEUTRALGEOM_THREADS must be a positive integer, got {v:?}")
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Classify { run, expect } => cmd_classify(&run, &expect),
        Command::Sample(args) => cmd_sample(&args),
        Command::Selftest { jets, tol_scale } => cmd_selftest(jets, tol_scale),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

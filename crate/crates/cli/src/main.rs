use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use latquant::enumeration::{phase_condition_i, relevant_vectors, shortest_vectors, theta_image};
use latquant::equivalence::{appendix_checks, lattice_fingerprint, DEFAULT_SHELLS};
use latquant::exact::bigfloat::bits_for_digits;
use latquant::exact::{parse_rational, BigFloat, Rational};
use latquant::exact_nsm::{self, DEFAULT_DIGITS};
use latquant::lattice::catalog::{self, CatalogItem, ParamValue};
use latquant::lattice::file::{parse_lattice_file, Document};
use latquant::lattice::{glue, Lattice};
use latquant::moments::geometry::geometry_report;
use latquant::moments::{estimate_second_moment_matrix, pooled_statistics, zamir_feder_diagnostic, Z_THRESHOLD};
use latquant::optimizer::{descend, DescentConfig, StepRule, Variant};
use latquant::reproduce::{Context, Settings};
use latquant::Error;

#[derive(Parser)]
#[command(name = "latquant", version, about = "Lattice quantizer construction, NSM evaluation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    out: Format,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Write a run manifest (command line, seeds, precision, wall time, output digest) here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct LatticeArgs {
    /// Catalog lattice, e.g. `B14:a=25/19`, `B14:a=opt`, `Z:n=8`, `B13:a2=1,a3=1`.
    #[arg(long, conflicts_with = "file")]
    lattice: Option<String>,
    /// Lattice document file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Extra catalog parameters, `name=value`.
    #[arg(long = "param")]
    params: Vec<String>,
}

#[derive(Args, Clone)]
struct Sampling {
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// List or show catalog entries.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Cumulative shell counts N(r²).
    Theta {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        rmax: f64,
        /// Rescale to unit determinant first.
        #[arg(long)]
        det1: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Monte Carlo NSM estimate.
    Nsm {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Monte Carlo second moment matrix with the isotropy diagnostic.
    Smm {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        sampling: Sampling,
        /// Coordinate blocks for pooled statistics, e.g. `0..8,8..13`.
        #[arg(long)]
        blocks: Option<String>,
    },
    /// Packing radius, density, kissing number, covering radius and thickness.
    Geometry {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 0)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Voronoi-relevant vectors.
    Facets {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Include the vectors themselves.
        #[arg(long)]
        vectors: bool,
    },
    /// Minimal vectors.
    Kissing {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Scale-normalized invariants for screening equivalence.
    Fingerprint {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = DEFAULT_SHELLS)]
        shells: usize,
    },
    /// Compares the relevant-vector sets of a family at several parameter values.
    PhaseCheck {
        /// Family name (B14 or B13).
        #[arg(long)]
        family: String,
        /// Parameter points, e.g. `a=13/10` (B14) or `a2=1,a3=1` (B13); repeat for each point.
        #[arg(long = "point", required = true)]
        points: Vec<String>,
    },
    /// Closed-form NSM at a parameter point.
    ExactNsm {
        #[arg(long, value_parser = ["13", "14"])]
        dim: String,
        /// B14 parameter a.
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        a2: Option<String>,
        #[arg(long)]
        a3: Option<String>,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: u32,
    },
    /// Certified minimizer of the closed-form NSM.
    OptimizeExact {
        #[arg(long, value_parser = ["13", "14"])]
        dim: String,
        #[arg(long, default_value = "1e-12")]
        tol: String,
        #[arg(long, default_value_t = 40)]
        digits: u32,
    },
    /// Perturbation descent; one JSON line per step.
    Descend {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Step rule: auto, line-search or a fixed ε.
        #[arg(long, default_value = "auto")]
        rule: String,
        #[arg(long)]
        exponential: bool,
    },
    /// Verification suites.
    Verify {
        #[arg(value_parser = ["appendix-b"])]
        suite: String,
    },
    /// Runs the numbered acceptance checks and prints a pass/fail table.
    ReproducePaper {
        /// Ten times fewer Monte Carlo samples.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show {
        name: String,
        #[arg(long = "param")]
        params: Vec<String>,
    },
}

/// A computation result: JSON for `--out json`, rows for `--out csv`.
struct Output {
    json: Value,
    csv: Option<Vec<Vec<String>>>,
    /// Verification outcome; false gives exit code 1.
    ok: bool,
}

impl Output {
    fn new(json: Value) -> Self {
        Output { json, csv: None, ok: true }
    }

    fn table(mut self, rows: Vec<Vec<String>>) -> Self {
        self.csv = Some(rows);
        self
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn parse_value(v: &str) -> latquant::Result<ParamValue> {
    Ok(ParamValue::Exact(parse_rational(v)?))
}

fn parse_params(text: &str) -> latquant::Result<Vec<(String, String)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("expected name=value, got '{kv}'")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Resolves `opt` values through the certified optimizers.
fn resolve(name: &str, raw: Vec<(String, String)>) -> latquant::Result<Vec<(String, ParamValue)>> {
    let wants_opt = raw.iter().any(|(_, v)| v == "opt");
    let mut out = Vec::new();
    for (k, v) in raw {
        if v != "opt" {
            out.push((k, parse_value(&v)?));
        }
    }
    if wants_opt {
        let tol = parse_rational("1e-12")?;
        match name {
            "B14" | "B14glue" => {
                let o = exact_nsm::optimize_g14(&tol, 40)?;
                out.push(("a".into(), ParamValue::Float(o.a_opt.to_f64())));
            }
            "B13" => {
                let o = exact_nsm::optimize_g13(&tol, 40)?;
                out.retain(|(k, _)| k != "a2" && k != "a3");
                out.push(("a2".into(), ParamValue::Float(o.a2.to_f64())));
                out.push(("a3".into(), ParamValue::Float(o.a3.to_f64())));
            }
            _ => return Err(usage(format!("{name} has no optimum to resolve"))),
        }
    }
    Ok(out)
}

fn load_lattice(args: &LatticeArgs) -> latquant::Result<Lattice> {
    match (&args.lattice, &args.file) {
        (Some(spec), None) => {
            let (name, rest) = spec.split_once(':').unwrap_or((spec.as_str(), ""));
            let mut raw = parse_params(rest)?;
            for p in &args.params {
                raw.extend(parse_params(p)?);
            }
            catalog::get_lattice(name, &resolve(name, raw)?)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            match parse_lattice_file(&text)? {
                Document::Lattice(l) => Ok(l),
                Document::Glue(g) => glue(&g),
            }
        }
        _ => Err(usage("give exactly one of --lattice or --file")),
    }
}

fn parse_blocks(text: &str) -> latquant::Result<Vec<std::ops::Range<usize>>> {
    text.split(',')
        .map(|b| {
            let (lo, hi) = b.split_once("..").ok_or_else(|| usage(format!("expected a..b, got '{b}'")))?;
            let p = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("bad block bound '{s}'")));
            Ok(p(lo)?..p(hi)?)
        })
        .collect()
}

fn bigfloat_json(x: &BigFloat, digits: u32) -> Value {
    json!({ "decimal": x.to_decimal(digits as usize), "certain": x.decimal_is_certain(digits as usize) })
}

fn matrix_rows(m: &[Vec<f64>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| format!("{x:.12e}")).collect()).collect()
}

fn run(cli: &Cli) -> latquant::Result<Output> {
    Ok(match &cli.command {
        Command::Catalog { action: CatalogAction::List } => {
            let rows: Vec<Vec<String>> =
                catalog::NAMES.iter().map(|(n, d)| vec![n.to_string(), d.to_string()]).collect();
            Output::new(json!(catalog::NAMES
                .iter()
                .map(|(n, d)| json!({ "name": n, "description": d }))
                .collect::<Vec<_>>()))
            .table(std::iter::once(vec!["name".into(), "description".into()]).chain(rows).collect())
        }
        Command::Catalog { action: CatalogAction::Show { name, params } } => {
            let mut raw = Vec::new();
            for p in params {
                raw.extend(parse_params(p)?);
            }
            match catalog::get(name, &resolve(name, raw)?)? {
                CatalogItem::Lattice(l) => {
                    let text = latquant::lattice::file::print_lattice(&l);
                    Output::new(json!({ "name": name, "document": text }))
                }
                CatalogItem::Glue(g) => {
                    let text = latquant::lattice::file::print_glue_spec(&g);
                    Output::new(json!({ "name": name, "document": text }))
                }
                CatalogItem::Table(rows) => {
                    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
                    Output::new(json!({ "name": name, "rows": rows })).table(rows)
                }
                CatalogItem::Matrices(ms) => {
                    let ms: Vec<Value> = ms
                        .iter()
                        .map(|(n, m)| {
                            let rows: Vec<Vec<String>> = m
                                .iter()
                                .map(|r| r.iter().map(latquant::lattice::file::format_quad).collect())
                                .collect();
                            json!({ "name": n, "rows": rows })
                        })
                        .collect();
                    Output::new(json!({ "name": name, "matrices": ms }))
                }
            }
        }
        Command::Theta { lattice, rmax, det1, tol } => {
            let l = load_lattice(lattice)?;
            let l = if *det1 { l.unit_volume() } else { l };
            let steps = theta_image(&l, *rmax, *tol)?;
            let rows = std::iter::once(vec!["r2".into(), "count".into()])
                .chain(steps.iter().map(|s| vec![format!("{:.10}", s.r2), s.count.to_string()]))
                .collect();
            Output::new(json!({ "lattice": l.name(), "det1": det1, "steps": to_json(&steps) })).table(rows)
        }
        Command::Nsm { lattice, sampling } => {
            let l = load_lattice(lattice)?;
            let r = estimate_second_moment_matrix(&l, sampling.samples, sampling.seed)?;
            let rows = vec![
                vec!["lattice".into(), "samples".into(), "seed".into(), "g_hat".into(), "g_stderr".into()],
                vec![r.lattice.clone(), r.samples.to_string(), r.seed.to_string(), format!("{:.12}", r.g_hat), format!("{:.3e}", r.g_stderr)],
            ];
            Output::new(json!({
                "lattice": r.lattice, "dim": r.dim, "samples": r.samples, "seed": r.seed,
                "g_hat": r.g_hat, "g_stderr": r.g_stderr, "max_error": r.max_error,
            }))
            .table(rows)
        }
        Command::Smm { lattice, sampling, blocks } => {
            let l = load_lattice(lattice)?;
            let r = estimate_second_moment_matrix(&l, sampling.samples, sampling.seed)?;
            let d = zamir_feder_diagnostic(&r, Z_THRESHOLD)?;
            let mut out = json!({ "report": to_json(&r), "diagnostic": to_json(&d), "verdict": d.verdict() });
            if let Some(b) = blocks {
                let (means, stats) = pooled_statistics(&r, &parse_blocks(b)?)?;
                out["pooled"] = json!({ "diagonal_means": to_json(&means), "statistics": to_json(&stats) });
            }
            Output::new(out).table(matrix_rows(&r.u_hat))
        }
        Command::Geometry { lattice, samples, seed } => {
            let l = load_lattice(lattice)?;
            Output::new(to_json(&geometry_report(&l, None, *samples, *seed)?))
        }
        Command::Facets { lattice, vectors } => {
            let l = load_lattice(lattice)?;
            let r = relevant_vectors(&l)?;
            let rows = r.vectors.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
            let mut out = json!({
                "lattice": l.name(), "facets": r.count(), "digest": r.digest(),
                "degenerate_cosets": r.degenerate_cosets.len(), "exact": r.exact,
            });
            if *vectors {
                out["vectors"] = to_json(&r.vectors);
            }
            Output::new(out).table(rows)
        }
        Command::Kissing { lattice } => {
            let l = load_lattice(lattice)?;
            let s = shortest_vectors(&l)?;
            let rows = s.vectors.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
            Output::new(to_json(&s)).table(rows)
        }
        Command::Fingerprint { lattice, shells } => {
            let l = load_lattice(lattice)?;
            Output::new(to_json(&lattice_fingerprint(&l, *shells)?))
        }
        Command::PhaseCheck { family, points } => {
            let mut pts = Vec::new();
            for p in points {
                let params = resolve(family, parse_params(p)?)?;
                pts.push((p.clone(), catalog::get_lattice(family, &params)?));
            }
            let r = phase_condition_i(&pts)?;
            let rows = std::iter::once(vec!["point".into(), "facets".into(), "digest".into()])
                .chain(r.points.iter().map(|p| vec![p.label.clone(), p.facets.to_string(), p.digest.clone()]))
                .collect();
            Output::new(to_json(&r)).table(rows)
        }
        Command::ExactNsm { dim, a, a2, a3, digits } => exact_nsm_cmd(dim, a, a2, a3, *digits)?,
        Command::OptimizeExact { dim, tol, digits } => optimize_cmd(dim, &parse_rational(tol)?, *digits)?,
        Command::Descend { lattice, sampling, steps, rule, exponential } => {
            let l = load_lattice(lattice)?;
            let rule = match rule.as_str() {
                "auto" => StepRule::Auto,
                "line-search" => StepRule::LineSearch,
                x => StepRule::Fixed(x.parse().map_err(|_| usage(format!("unknown step rule '{x}'")))?),
            };
            let cfg = DescentConfig {
                samples: sampling.samples,
                seed: sampling.seed,
                max_steps: *steps,
                rule,
                variant: if *exponential { Variant::Exponential } else { Variant::Linear },
                ..DescentConfig::default()
            };
            let s = descend(&l, &cfg)?;
            let mut history: Vec<Value> = s.history.iter().map(to_json).collect();
            history.push(json!({ "verdict": s.verdict, "final_rows": s.lattice.rows_f64() }));
            let rows = std::iter::once(vec!["step".into(), "g_hat".into(), "g_stderr".into(), "max_abs_z".into(), "eps".into()])
                .chain(s.history.iter().map(|h| {
                    vec![
                        h.step.to_string(),
                        format!("{:.12}", h.g_hat),
                        format!("{:.3e}", h.g_stderr),
                        format!("{:.3}", h.max_abs_z),
                        h.eps.map_or(String::new(), |e| format!("{e:.6}")),
                    ]
                }))
                .collect();
            Output { json: Value::Array(history), csv: Some(rows), ok: true }
        }
        Command::Verify { .. } => {
            let checks = appendix_checks()?;
            let ok = checks.iter().all(|c| c.passed);
            let rows = std::iter::once(vec!["check".into(), "passed".into()])
                .chain(checks.iter().map(|c| vec![c.name.clone(), c.passed.to_string()]))
                .collect();
            Output { json: json!({ "all_passed": ok, "checks": to_json(&checks) }), csv: Some(rows), ok }
        }
        Command::ReproducePaper { quick, only, seed } => {
            let mut settings = if *quick { Settings::quick() } else { Settings::full() };
            if let Some(s) = seed {
                settings.seed = *s;
            }
            let ctx = Context::new(settings);
            let results = if only.is_empty() {
                ctx.run_all(|r| eprintln!("{}", r.line()))
            } else {
                only.iter()
                    .map(|&id| {
                        let r = ctx.run(id)?;
                        eprintln!("{}", r.line());
                        Ok(r)
                    })
                    .collect::<latquant::Result<Vec<_>>>()?
            };
            let ok = results.iter().all(|r| r.passed);
            let rows = std::iter::once(vec!["criterion".into(), "title".into(), "result".into(), "seconds".into()])
                .chain(results.iter().map(|r| {
                    vec![r.id.to_string(), r.title.clone(), if r.passed { "PASS" } else { "FAIL" }.into(), format!("{:.1}", r.seconds)]
                }))
                .collect();
            Output { json: json!({ "all_passed": ok, "settings": to_json(&ctx.settings), "criteria": to_json(&results) }), csv: Some(rows), ok }
        }
    })
}

fn exact_param(x: &Option<String>, name: &str) -> latquant::Result<Rational> {
    parse_rational(x.as_deref().ok_or_else(|| usage(format!("--{name} is required")))?)
}

fn exact_nsm_cmd(dim: &str, a: &Option<String>, a2: &Option<String>, a3: &Option<String>, digits: u32) -> latquant::Result<Output> {
    if dim == "14" {
        let a = exact_param(a, "a")?;
        let g = exact_nsm::g14(&a, digits)?;
        let v = BigFloat::from_rational(&(&a * &a), bits_for_digits(digits));
        let ab = exact_nsm::alpha_beta_14(&v)?;
        return Ok(Output::new(json!({
            "dim": 14, "a": a.to_string(), "g": bigfloat_json(&g.value, digits), "in_phase": g.in_phase,
            "alpha": bigfloat_json(&ab.alpha, digits), "beta": bigfloat_json(&ab.beta, digits),
        })));
    }
    let (q2, q3) = (exact_param(a2, "a2")?, exact_param(a3, "a3")?);
    let b = bits_for_digits(digits);
    let (x2, x3) = (BigFloat::from_rational(&q2, b), BigFloat::from_rational(&q3, b));
    let ga = exact_nsm::ga13(&x2, &x3)?;
    let gb = exact_nsm::gb13(&x2, &x3)?;
    let abg = exact_nsm::abg13(&x2, &x3)?;
    let mut out = json!({
        "dim": 13, "a1": "1", "a2": q2.to_string(), "a3": q3.to_string(),
        "g_a": bigfloat_json(&ga, digits), "g_b": bigfloat_json(&gb, digits),
        "alpha": bigfloat_json(&abg.alpha, digits), "beta": bigfloat_json(&abg.beta, digits),
        "gamma": abg.gamma.as_ref().map(|g| bigfloat_json(g, digits)),
    });
    if q2 == Rational::from_integer(1.into()) && q3 == q2 {
        let g = exact_nsm::g13_unit();
        let (a, b, c) = exact_nsm::abg13_at_unit();
        let eps = exact_nsm::epsilon_steps(&a, &b, &c)?;
        out["exact"] = json!({
            "g": g.to_string(), "alpha": a.to_string(), "beta": b.to_string(), "gamma": c.to_string(),
            "eps1": eps.eps1, "eps2": eps.eps2,
        });
    }
    Ok(Output::new(out))
}

fn optimize_cmd(dim: &str, tol: &Rational, digits: u32) -> latquant::Result<Output> {
    if dim == "14" {
        let o = exact_nsm::optimize_g14(tol, digits)?;
        return Ok(Output::new(json!({
            "dim": 14, "a_opt": bigfloat_json(&o.a_opt, digits), "g_opt": bigfloat_json(&o.g_opt, digits),
            "root_index": o.root_index, "positive_roots": o.positive_roots.len(), "is_minimum": o.is_minimum,
            "v_bracket": [o.v_bracket.lo.to_string(), o.v_bracket.hi.to_string()],
        })));
    }
    let o = exact_nsm::optimize_g13(tol, digits)?;
    Ok(Output::new(json!({
        "dim": 13, "a2": bigfloat_json(&o.a2, digits), "a3": bigfloat_json(&o.a3, digits),
        "g": bigfloat_json(&o.g, digits), "certified": o.certified, "newton_steps": o.newton_steps,
        "hessian": o.hessian, "positive_definite": o.positive_definite,
    })))
}

fn render(out: &Output, format: Format) -> String {
    match (format, &out.csv) {
        (Format::Csv, Some(rows)) => rows.iter().map(|r| r.join(",") + "\n").collect(),
        (Format::Csv, None) => match &out.json {
            Value::Object(m) => m.iter().map(|(k, v)| format!("{k},{v}\n")).collect(),
            v => format!("{v}\n"),
        },
        (Format::Json, _) => match (&out.json, &out.csv) {
            // Step histories are JSON lines.
            (Value::Array(items), Some(_)) if items.iter().all(Value::is_object) && !items.is_empty() => {
                items.iter().map(|v| format!("{v}\n")).collect()
            }
            (v, _) => serde_json::to_string_pretty(v).expect("json") + "\n",
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: invalid worker count");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if matches!(e, Error::Usage(_) | Error::UnknownName(_) | Error::Parse { .. }) { 2 } else { 1 });
        }
    };
    let text = render(&out, cli.out);
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let Some(path) = &cli.manifest {
        let manifest = json!({
            "command_line": std::env::args().collect::<Vec<_>>(),
            "version": env!("CARGO_PKG_VERSION"),
            "catalog_digest": catalog::sha256_hex(&format!("{}{}", catalog::APPENDIX_A_CSV, catalog::APPENDIX_B_TXT)),
            "wall_seconds": start.elapsed().as_secs_f64(),
            "output_sha256": catalog::sha256_hex(&text),
        });
        if let Err(e) = std::fs::write(path, serde_json::to_string_pretty(&manifest).expect("json") + "\n") {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

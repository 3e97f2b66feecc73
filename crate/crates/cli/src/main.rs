//! `dualkit`: command-line access to the gate catalog, the polar maps, Cartan
//! analysis, entanglement distributions, class tables and the acceptance suite.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use dualkit::cartan::{
    cartan_csv, cartan_trajectory, cartan_trajectory_raw, estimate_rate, regime_classify, regime_table, CartanPoint,
};
use dualkit::designs::catalog::{named_gate, CATALOG_NAMES};
use dualkit::designs::{extract_quantum_design, permutation_duality, PermutationGate};
use dualkit::equivalence::{
    compare_histograms, enumerate_dual_permutation_classes, sample_product_entanglement, EntanglementHistogram,
    EntropyMeasure, HistogramMeta, DEFAULT_BINS,
};
use dualkit::linalg::{format_matrix, parse_matrix, sample_cue};
use dualkit::maps::{iterate, MapKind, StopReason, StopRule, Target};
use dualkit::measures::{classify_duality, measure_set};
use dualkit::verify::{run_suite, VerifyOptions};
use dualkit::{BipartiteUnitary, Error, RngStream, Tolerances};

const SEED_ENV: &str = "DUALKIT_SEED";
/// Operation tag for a verify run whose criteria did not all pass (exit 1).
const CRITERIA_FAILED: &str = "verify";

#[derive(Parser, Debug)]
#[command(name = "dualkit", version, about = "Dual-unitary and 2-unitary gates: construction, analysis, equivalence tests")]
struct Cli {
    #[command(flatten)]
    global: Global,
    /// Replay a saved run configuration instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the effective run configuration to this file.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
struct Global {
    /// Random seed; `DUALKIT_SEED` takes precedence when set.
    #[arg(long = "rng-seed", id = "rng_seed", value_name = "SEED", global = true)]
    seed: Option<u64>,
    /// Directory for relative output paths.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for parallel library calls (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Unitarity tolerance for input gates.
    #[arg(long, global = true)]
    unitarity_tol: Option<f64>,
    /// Tolerance for dual / T-dual / 2-unitary flags.
    #[arg(long, global = true)]
    classification_tol: Option<f64>,
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    global: Global,
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
enum Command {
    /// Write a catalog gate as a matrix file (stdout without --out).
    Catalog {
        /// Gate name, e.g. p9, o16, cshift:3, canonical:0.7,0.5,0.1.
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print duality flags and entanglement measures of a gate.
    Classify {
        /// Matrix file, permutation file, catalog name, or `-` for stdin.
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Iterate a polar map from a seed; writes `<out>.csv` and `<out>.mat`.
    Iterate {
        #[arg(long, default_value = "MR")]
        map: String,
        /// Start from a CUE sample of size d².
        #[arg(long)]
        seed_cue: bool,
        #[arg(long)]
        d: Option<usize>,
        /// Start from this gate instead.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value = "dual")]
        target: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1)]
        store_every: usize,
        #[arg(long, default_value = "trajectory")]
        out: String,
    },
    /// Iterate the two-qubit coordinate map; writes `n,c1,c2,c3`.
    Cartan {
        /// Seed coefficients `c1,c2,c3`; `pi/k` forms are accepted.
        #[arg(long)]
        seed: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Feed raw coordinates forward with the odd-step c2 reflection.
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value = "cartan.csv")]
        out: PathBuf,
    },
    /// Entanglement distribution on Haar product states; writes
    /// `<out>.csv`, `<out>.json` and `<out>.values`.
    Distribution {
        input: String,
        #[arg(long = "N", default_value = "100000")]
        samples: String,
        #[arg(long, default_value = "vn")]
        measure: String,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value = "distribution")]
        out: String,
    },
    /// Two-sample KS comparison of two exported distributions.
    Compare {
        h1: PathBuf,
        h2: PathBuf,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
    /// Entangling classes of dual permutations; writes a class table CSV.
    Enumerate {
        #[arg(long)]
        d: usize,
        /// Proposal budget for the sampled search (d ≥ 4).
        #[arg(long)]
        budget: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the K/L tables of a permutation or the quantum design of a gate.
    Design {
        input: String,
        #[arg(long, default_value_t = 1e-8)]
        product_tol: f64,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(long, default_value = "paper")]
        suite: String,
        /// Comma-separated criterion identifiers, e.g. A1,A5.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

/// A failure with the operation that raised it.
struct Failure {
    op: &'static str,
    err: Error,
}

trait Context<T> {
    fn during(self, op: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<Error>> Context<T> for Result<T, E> {
    fn during(self, op: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure { op, err: e.into() })
    }
}

fn bad(op: &'static str, msg: impl Into<String>) -> Failure {
    Failure { op, err: Error::InvalidArgument(msg.into()) }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::RankDeficient { .. } | Error::NotUnitary { .. } | Error::NonFinite { .. } | Error::EntangledColumn(_) => 3,
        _ => 2,
    }
}

struct Ctx {
    global: Global,
    tolerances: Tolerances,
}

impl Ctx {
    fn new(global: Global) -> Self {
        let mut tolerances = Tolerances::default();
        if let Some(t) = global.unitarity_tol {
            tolerances.unitarity = t;
        }
        if let Some(t) = global.classification_tol {
            tolerances.classification = t;
        }
        Self { global, tolerances }
    }

    fn seed(&self, default: u64) -> u64 {
        self.global.seed.unwrap_or(default)
    }

    fn output(&self, p: &Path) -> PathBuf {
        match &self.global.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn write(&self, p: &Path, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.output(p);
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).during("write output")?;
        }
        fs::write(&path, contents).during("write output")?;
        Ok(path)
    }

    /// Matrix file, one-line permutation file, catalog name, or `-`.
    fn load_gate(&self, arg: &str) -> Result<BipartiteUnitary, Failure> {
        let text = if arg == "-" {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).during("read stdin")?;
            Some(s)
        } else if Path::new(arg).is_file() {
            Some(fs::read_to_string(arg).during("read gate file")?)
        } else {
            None
        };
        match text {
            Some(t) => {
                let m = match parse_matrix(&t) {
                    Ok(m) => m,
                    Err(e) => match PermutationGate::parse(t.trim()) {
                        Ok(p) => p.to_matrix(),
                        Err(_) => return Err(Failure { op: "parse gate", err: e }),
                    },
                };
                BipartiteUnitary::with_tolerance(m, self.tolerances.unitarity).during("load gate")
            }
            None => named_gate(arg).during("load gate"),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes")
}

fn parse_count(op: &'static str, s: &str) -> Result<usize, Failure> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 1.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(bad(op, format!("`{s}` is not a positive integer count"))),
    }
}

/// Shortest decimal form, e.g. `1`, `0.75`, `0.6666666667`.
fn short(x: f64) -> String {
    let s = format!("{:.10}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn run(cmd: &Command, ctx: &Ctx) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let mut say = |s: String| writeln!(out, "{s}").during("write stdout");
    match cmd {
        Command::Catalog { name, list, out: file } => {
            if *list || name.is_none() {
                for n in CATALOG_NAMES {
                    say(n.to_string())?;
                }
                return Ok(());
            }
            let u = named_gate(name.as_deref().unwrap()).during("catalog")?;
            let text = format_matrix(u.matrix());
            match file {
                Some(f) if f.as_os_str() != "-" => {
                    let p = ctx.write(f, &text)?;
                    eprintln!("wrote {}", p.display());
                }
                _ => {
                    io::stdout().write_all(text.as_bytes()).during("write stdout")?;
                }
            }
        }
        Command::Classify { input, json } => {
            let u = ctx.load_gate(input)?;
            let flags = classify_duality(&u, ctx.tolerances.classification);
            let m = measure_set(&u);
            if *json {
                let v = serde_json::json!({ "d": u.d(), "flags": flags, "measures": m, "label": flags.label() });
                say(to_json(&v))?;
            } else {
                say(format!("{}, ep={}", flags.label(), short(m.ep)))?;
                say(format!("d = {}", u.d()))?;
                say(format!(
                    "dual = {} (defect {:.3e}), T-dual = {} (defect {:.3e}), self-dual = {} (defect {:.3e})",
                    flags.dual, flags.dual_defect, flags.t_dual, flags.t_dual_defect, flags.self_dual, flags.self_dual_defect
                ))?;
                say(format!(
                    "E(U) = {:.12}, E(US) = {:.12}, ep = {:.12}, gt = {:.12}",
                    m.e_op, m.e_op_swapped, m.ep, m.gt
                ))?;
            }
        }
        Command::Iterate { map, seed_cue, d, input, target, tol, max_iters, store_every, out: prefix } => {
            let kind: MapKind = map.parse().during("iterate")?;
            let target: Target = target.parse().during("iterate")?;
            let seed = ctx.seed(0);
            let mut rng = RngStream::new(seed, 0);
            let u0 = match (input, seed_cue, d) {
                (Some(i), false, _) => ctx.load_gate(i)?,
                (None, true, Some(d)) if *d >= 2 => {
                    BipartiteUnitary::new(sample_cue(d * d, &mut rng)).during("iterate")?
                }
                _ => return Err(bad("iterate", "give either --input FILE or --seed-cue --d D (D >= 2)")),
            };
            let mut rule = StopRule::new(*max_iters, *tol, target);
            rule.store_every = *store_every;
            let mut kick = RngStream::new(seed, 1);
            let traj = iterate(kind, &u0, &rule, kind.is_stochastic().then_some(&mut kick)).during("iterate")?;
            let csv = ctx.write(Path::new(&format!("{prefix}.csv")), &traj.to_csv())?;
            let mat = ctx.write(Path::new(&format!("{prefix}.mat")), &format_matrix(traj.final_unitary.matrix()))?;
            let last = traj.last();
            say(format!(
                "{:?} after {} iterations: dual_defect = {:.3e}, t_dual_defect = {:.3e}, ep = {}",
                traj.stop_reason,
                traj.iterations,
                last.dual_defect,
                last.t_dual_defect,
                short(last.ep)
            ))?;
            say(format!("wrote {} and {}", csv.display(), mat.display()))?;
            if traj.stop_reason == StopReason::RankDeficient {
                return Err(Failure {
                    op: "iterate",
                    err: Error::RankDeficient { sigma_min: 0.0, tol: Tolerances::default().rank },
                });
            }
        }
        Command::Cartan { seed, steps, raw, out: file } => {
            let c0 = CartanPoint::parse(seed).during("cartan")?;
            if !c0.in_chamber(1e-12) {
                return Err(bad("cartan", format!("seed {seed} lies outside 0 <= |c3| <= c2 <= c1 <= pi/4")));
            }
            let traj = if *raw { cartan_trajectory_raw(c0, *steps) } else { cartan_trajectory(c0, *steps) }.during("cartan")?;
            let p = ctx.write(file, &cartan_csv(&traj))?;
            let row = regime_classify(c0);
            say(regime_table(std::slice::from_ref(&row)).trim_end().to_string())?;
            let est = estimate_rate(&traj, None);
            let fmt = |v: [Option<f64>; 3]| v.map(|x| x.map_or("-".to_string(), |x| format!("{x:.6}"))).join(", ");
            say(format!("fitted exponential rates xi: {}", fmt(est.xi)))?;
            say(format!("fitted power-law exponents: {}", fmt(est.exponents)))?;
            say(format!("wrote {}", p.display()))?;
        }
        Command::Distribution { input, samples, measure, bins, out: prefix } => {
            let u = ctx.load_gate(input)?;
            let n = parse_count("distribution", samples)?;
            let measure: EntropyMeasure = measure.parse().during("distribution")?;
            let seed = ctx.seed(0);
            let rng = RngStream::new(seed, 0);
            let h = sample_product_entanglement(&u, n, measure, &rng).during("distribution")?;
            let h = EntanglementHistogram::from_values(measure, h.d, h.sorted_values, *bins);
            let values_name = format!("{prefix}.values");
            let csv = ctx.write(Path::new(&format!("{prefix}.csv")), &h.to_csv())?;
            let values = ctx.write(Path::new(&values_name), &h.values_text())?;
            let file_name = Path::new(&values_name).file_name().map(|f| f.to_string_lossy().into_owned());
            let meta = h.meta(seed, 0, file_name);
            let json = to_json(&meta);
            let side = ctx.write(Path::new(&format!("{prefix}.json")), &json)?;
            say(format!("{} samples, {} mean = {:.6}", h.samples, measure, h.mean))?;
            say(format!("wrote {}, {} and {}", csv.display(), side.display(), values.display()))?;
        }
        Command::Compare { h1, h2, alpha, json } => {
            let a = load_histogram(h1)?;
            let b = load_histogram(h2)?;
            let v = compare_histograms(&a, &b, *alpha).during("compare")?;
            if *json {
                say(to_json(&v))?;
            } else {
                say(v.to_string())?;
            }
        }
        Command::Enumerate { d, budget, out: file } => {
            let budget = budget.as_deref().map(|b| parse_count("enumerate", b)).transpose()?;
            let rng = RngStream::new(ctx.seed(0), 0);
            let t = enumerate_dual_permutation_classes(*d, budget, &rng).during("enumerate")?;
            let name = file.clone().unwrap_or_else(|| PathBuf::from(format!("classes_d{d}.csv")));
            let p = ctx.write(&name, &t.to_csv())?;
            say(format!(
                "{} entangling classes of dual permutations ({}, {} permutations examined)",
                t.rows.len(),
                if t.exhaustive { "exhaustive" } else { "sampled, lower bound" },
                t.scanned
            ))?;
            say(format!("wrote {}", p.display()))?;
        }
        Command::Design { input, product_tol } => {
            let u = ctx.load_gate(input)?;
            if let Some(p) = PermutationGate::from_matrix(u.matrix(), 1e-12) {
                let (k, l) = p.kl_tables();
                let f = permutation_duality(&p);
                say(format!("permutation {p}"))?;
                say(format!("K:\n{}", k.render().trim_end()))?;
                say(format!("L:\n{}", l.render().trim_end()))?;
                say(format!("dual = {}, T-dual = {}, 2-unitary = {}", f.dual, f.t_dual, f.two_unitary))?;
            } else {
                let q = extract_quantum_design(&u, *product_tol).during("design")?;
                say(q.render().trim_end().to_string())?;
            }
        }
        Command::Verify { suite, only, json } => {
            if suite != "paper" {
                return Err(bad("verify", format!("unknown suite `{suite}` (known: paper)")));
            }
            let ids: Vec<String> =
                only.as_deref().map(|s| s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()).unwrap_or_default();
            let mut opts = VerifyOptions::default();
            if let Some(s) = ctx.global.seed {
                opts.seed = s;
            }
            let reports = run_suite(&ids, &opts).during("select criteria")?;
            if *json {
                say(to_json(&reports))?;
            } else {
                for r in &reports {
                    say(r.summary_line())?;
                }
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Failure {
                    op: CRITERIA_FAILED,
                    err: Error::InvalidArgument(format!("{failed} of {} criteria failed", reports.len())),
                });
            }
        }
    }
    Ok(())
}

/// Accepts the `.json` sidecar, the `.csv`, or the bare prefix.
fn load_histogram(path: &Path) -> Result<EntanglementHistogram, Failure> {
    let side = if path.extension().is_some_and(|e| e == "json") {
        path.to_path_buf()
    } else if path.extension().is_some_and(|e| e == "csv" || e == "values") {
        path.with_extension("json")
    } else {
        PathBuf::from(format!("{}.json", path.display()))
    };
    let meta: HistogramMeta =
        serde_json::from_str(&fs::read_to_string(&side).during("read histogram")?).map_err(|e| Failure {
            op: "read histogram",
            err: Error::Parse { line: e.line(), msg: e.to_string() },
        })?;
    let values_path = match &meta.values_file {
        Some(f) => side.with_file_name(f),
        None => return Err(bad("read histogram", format!("{} lists no values file", side.display()))),
    };
    let values = EntanglementHistogram::parse_values(&fs::read_to_string(&values_path).during("read histogram")?)
        .during("read histogram")?;
    if values.len() != meta.samples {
        return Err(bad("read histogram", format!("{} holds {} values, sidecar says {}", values_path.display(), values.len(), meta.samples)));
    }
    Ok(EntanglementHistogram::from_values(meta.measure, meta.d, values, meta.bins))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: read config: {e}");
                    return ExitCode::from(2);
                }
            };
            match serde_json::from_str::<RunConfig>(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: parse config: {e}");
                    return ExitCode::from(2);
                }
            }
        }
        None => match cli.command.clone() {
            Some(command) => RunConfig { global: cli.global.clone(), command },
            None => {
                eprintln!("error: a subcommand or --config is required (see --help)");
                return ExitCode::from(2);
            }
        },
    };
    let mut config = config;
    if let Ok(s) = std::env::var(SEED_ENV) {
        match s.trim().parse::<u64>() {
            Ok(v) => config.global.seed = Some(v),
            Err(_) => {
                eprintln!("error: {SEED_ENV}=`{s}` is not an unsigned integer");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(path) = &cli.save_config {
        let text = to_json(&config);
        if let Err(e) = fs::write(path, text) {
            eprintln!("error: save config: {e}");
            return ExitCode::from(2);
        }
    }
    if let Some(n) = config.global.workers {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let ctx = Ctx::new(config.global.clone());
    match run(&config.command, &ctx) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not an error.
        Err(Failure { err: Error::Io(e), .. }) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            let code = if f.op == CRITERIA_FAILED { 1 } else { exit_code(&f.err) };
            eprintln!("error: {}: {}", f.op, f.err);
            ExitCode::from(code)
        }
    }
}

//! Command-line runner tying the analyses into reproducible TSV + JSON
//! reports. Exit codes: 0 success, 2 configuration or schema errors,
//! 3 validation failures, 4 search budget exhausted.

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use coarsekit::actions::orbit_space;
use coarsekit::corpus;
use coarsekit::dimension::{asdim_estimate, check_raising, AsdimConfig};
use coarsekit::families::{witness_search, WitnessOutcome};
use coarsekit::maps::{
    coarseness_table, finite_to_1_table, n_to_1_profile, properness_table, MapSpec, ProfileVerdict,
};
use coarsekit::openness::openness_verdict_default;
use coarsekit::schema::{ActionJson, MapJson, SpaceJson};
use coarsekit::space::validate_metric;
use coarsekit::tower::Tower;

use report::{fmt_f64, fmt_opt, Report};

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "coarsekit", version, about = "coarse-geometry analyses on truncated metric spaces")]
struct Cli {
    /// Report path prefix; writes <prefix>.tsv and <prefix>.json
    #[arg(long, global = true, default_value = "report")]
    out: String,
    /// Optional cache directory for memoized validation reports,
    /// keyed by content hash
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfKind {
    Coarse,
    Proper,
    Ntone,
    Finite,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every metric axiom of a space file
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
    /// Scale profiles of a map across truncation radii
    Profile {
        #[arg(long, value_enum)]
        kind: ProfKind,
        /// piece count for the ntone kind
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// input scales R (output scales S for the proper kind)
        #[arg(long = "R", value_delimiter = ',', required = true)]
        scales: Vec<f64>,
        /// truncation radii; defaults to the declared list
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// piece-diameter grid for the finite kind; defaults to
        /// doublings of each R
        #[arg(long = "S", value_delimiter = ',')]
        s_grid: Option<Vec<f64>>,
        #[arg(long)]
        map: PathBuf,
    },
    /// Asymptotic-dimension control table and evidence interval
    DimControl {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "n", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long = "R", value_delimiter = ',', required = true)]
        scales: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, default_value_t = 40)]
        exact_cap: usize,
        /// include the cover colorings in the JSON mirror
        #[arg(long)]
        covers: bool,
    },
    /// Search for k gradually disjoint families with non-divergent images
    Witness {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Coarse-openness feasibility over a suite of unbounded sets
    Openness {
        #[arg(long)]
        map: PathBuf,
        /// only the built-in suite is available
        #[arg(long, default_value = "default")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Orbit space of a finite isometric action, with the quotient map
    Quotient {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        action: PathBuf,
    },
    /// List or emit corpus entries
    Corpus {
        #[command(subcommand)]
        sub: CorpusCmd,
    },
    /// Dimension-raising consistency of two dim-control reports
    CheckRaising {
        /// JSON report of the source space
        #[arg(long)]
        x: PathBuf,
        /// JSON report of the target space
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        n: usize,
        /// the map is additionally coarsely open: intervals must admit
        /// equality
        #[arg(long)]
        open: bool,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    List,
    Emit {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "{}")]
        params: String,
        /// destination of the emitted JSON; falls back to the --out
        /// value as a plain file path
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<coarsekit::CoarseError> for Failure {
    fn from(e: coarsekit::CoarseError) -> Failure {
        use coarsekit::CoarseError::*;
        let code = match e {
            Schema(_) | InvalidParam(_) | UnknownCorpusEntry(_) | BadRadii => EXIT_CONFIG,
            InvalidAction(_) => EXIT_VALIDATION,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure { code: EXIT_CONFIG, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::config(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn load_tower(path: &PathBuf) -> Result<Arc<Tower>, Failure> {
    let sj: SpaceJson = load_json(path)?;
    Ok(sj.to_tower()?)
}

fn load_map(path: &PathBuf) -> Result<MapSpec, Failure> {
    let mj: MapJson = load_json(path)?;
    Ok(mj.to_map()?)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Validate { space } => {
            let bytes = fs::read(&space)?;
            let key = format!("{:x}", Sha256::digest(&bytes));
            if let Some(dir) = &cli.cache {
                let hit = dir.join(format!("validate-{key}.json"));
                if let Ok(text) = fs::read_to_string(&hit) {
                    if let Ok(valid) = serde_json::from_str::<bool>(&text) {
                        let mut rep = Report::new("validate", vec!["index", "violation"]);
                        rep.kv("space", space.display());
                        rep.kv("cache", "hit");
                        rep.kv("content_hash", &key);
                        rep.kv("valid", valid);
                        rep.write(&cli.out)?;
                        return Ok(if valid { 0 } else { EXIT_VALIDATION });
                    }
                }
            }
            let tower = load_tower(&space)?;
            let mut rep = Report::new("validate", vec!["index", "violation"]);
            rep.kv("space", space.display());
            rep.kv("content_hash", &key);
            let mut all_valid = true;
            let mut reports = Vec::new();
            for &r in tower.declared_radii() {
                let trunc = tower.truncation(r)?;
                if trunc.len() > 1500 {
                    continue;
                }
                let report = validate_metric(&trunc);
                all_valid &= report.is_valid();
                for (i, v) in report.violations.iter().enumerate() {
                    rep.row(vec![format!("r{r}:{i}"), v.to_string()]);
                }
                reports.push(json!({"radius": r, "violations": report.violations.len()}));
            }
            rep.kv("valid", all_valid);
            rep.set_data(json!({ "per_radius": reports, "valid": all_valid }));
            rep.write(&cli.out)?;
            if let Some(dir) = &cli.cache {
                fs::create_dir_all(dir)?;
                fs::write(
                    dir.join(format!("validate-{key}.json")),
                    serde_json::to_string(&all_valid).unwrap(),
                )?;
            }
            Ok(if all_valid { 0 } else { EXIT_VALIDATION })
        }

        Cmd::Profile { kind, n, scales, radii, s_grid, map } => {
            let f = load_map(&map)?;
            let radii = radii.unwrap_or_else(|| f.source().declared_radii().to_vec());
            let mut rep = Report::new("profile", vec!["kind", "R", "r", "S_or_m", "saturated", "verdict"]);
            rep.kv("map", f.name.clone());
            rep.kv("n", n);
            rep.kv("R", join_f64(&scales));
            rep.kv("radii", join_f64(&radii));
            match kind {
                ProfKind::Coarse | ProfKind::Proper => {
                    let (profile, verdict) = if kind == ProfKind::Coarse {
                        coarseness_table(&f, &scales, &radii)?
                    } else {
                        properness_table(&f, &scales, &radii)?
                    };
                    let name = if kind == ProfKind::Coarse { "coarse" } else { "proper" };
                    let v = verdict_str(&verdict);
                    for s in &profile.samples {
                        rep.row(vec![
                            name.into(),
                            fmt_f64(s.scale_in),
                            fmt_f64(s.trunc_radius),
                            fmt_opt(s.value),
                            s.saturated.to_string(),
                            v.clone(),
                        ]);
                    }
                    rep.kv("verdict", &v);
                    rep.set_data(json!({ "profile": profile, "verdict": verdict }));
                }
                ProfKind::Ntone => {
                    let prof = n_to_1_profile(&f, n, &scales, &radii)?;
                    let v = verdict_str(&prof.verdict);
                    for s in &prof.profile.samples {
                        rep.row(vec![
                            "ntone".into(),
                            fmt_f64(s.scale_in),
                            fmt_f64(s.trunc_radius),
                            fmt_opt(s.value),
                            s.saturated.to_string(),
                            v.clone(),
                        ]);
                    }
                    rep.kv("verdict", &v);
                    rep.set_data(json!({ "n": n, "profile": prof.profile, "verdict": prof.verdict }));
                }
                ProfKind::Finite => {
                    let mut tables = Vec::new();
                    for &big_r in &scales {
                        let grid = s_grid
                            .clone()
                            .unwrap_or_else(|| vec![big_r, 2.0 * big_r, 4.0 * big_r, 8.0 * big_r]);
                        let table = finite_to_1_table(&f, big_r, &grid, &radii)?;
                        let v = verdict_str(&table.verdict);
                        for c in &table.cells {
                            let m = if c.m_lo == c.m_hi {
                                format!("{}@S{}", c.m_hi, fmt_f64(c.s))
                            } else {
                                format!("{}..{}@S{}", c.m_lo, c.m_hi, fmt_f64(c.s))
                            };
                            rep.row(vec![
                                "finite".into(),
                                fmt_f64(big_r),
                                fmt_f64(c.trunc_radius),
                                m,
                                c.saturated.to_string(),
                                v.clone(),
                            ]);
                        }
                        tables.push(table);
                    }
                    rep.set_data(json!({ "tables": tables }));
                }
            }
            rep.write(&cli.out)?;
            Ok(0)
        }

        Cmd::DimControl { space, ns, scales, radii, exact_cap, covers } => {
            let tower = load_tower(&space)?;
            let tower = match radii {
                Some(r) => Arc::new(tower.restrict(r)?),
                None => tower,
            };
            let n_max = *ns.iter().max().ok_or_else(|| Failure::config("empty n list"))?;
            let cfg = AsdimConfig { exact_cap, ..AsdimConfig::default() };
            let report = asdim_estimate(&tower, &space.display().to_string(), n_max, &scales, &cfg)?;
            let mut rep = Report::new("dim-control", vec!["n", "R", "r", "B", "exactness"]);
            rep.kv("space", space.display());
            rep.kv("n", ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
            rep.kv("R", join_f64(&scales));
            rep.kv("radii", join_f64(&report.radii));
            rep.kv("exact_cap", exact_cap);
            rep.kv("enum_cap", cfg.enum_cap);
            rep.kv("bcap_fraction", cfg.bcap_fraction);
            rep.kv("interval_lo", report.interval.0);
            rep.kv(
                "interval_hi",
                report.interval.1.map_or("none".to_string(), |h| h.to_string()),
            );
            for e in &report.entries {
                if !ns.contains(&e.n) {
                    continue;
                }
                rep.row(vec![
                    e.n.to_string(),
                    fmt_f64(e.scale),
                    fmt_f64(e.trunc_radius),
                    fmt_f64(e.bound),
                    format!("{:?}", e.exactness).to_lowercase(),
                ]);
            }
            let mut data = serde_json::to_value(&report).unwrap();
            if covers {
                data["covers"] = serde_json::to_value(&report.covers).unwrap();
            }
            rep.set_data(data);
            rep.write(&cli.out)?;
            Ok(0)
        }

        Cmd::Witness { map, k, budget, seed } => {
            let f = load_map(&map)?;
            let outcome = witness_search(&f, k, budget, seed)?;
            let mut rep = Report::new("witness", vec!["family", "points"]);
            rep.kv("map", f.name.clone());
            rep.kv("k", k);
            rep.kv("budget", budget);
            rep.kv("seed", seed);
            match outcome {
                WitnessOutcome::Found(cert) => {
                    rep.kv("outcome", "found");
                    for (i, fam) in cert.families.iter().enumerate() {
                        rep.row(vec![
                            format!("A{i}"),
                            fam.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
                        ]);
                    }
                    rep.set_data(serde_json::to_value(&cert).unwrap());
                    rep.write(&cli.out)?;
                    Ok(0)
                }
                WitnessOutcome::Exhausted { expansions } => {
                    rep.kv("outcome", "exhausted");
                    rep.kv("expansions", expansions);
                    rep.set_data(json!({ "exhausted": true, "expansions": expansions }));
                    rep.write(&cli.out)?;
                    Ok(EXIT_BUDGET)
                }
            }
        }

        Cmd::Openness { map, suite, seed } => {
            if suite != "default" {
                return Err(Failure::config("only the default suite is available"));
            }
            let f = load_map(&map)?;
            let report = openness_verdict_default(&f, seed)?;
            let mut rep = Report::new("openness", vec!["family", "rho", "r", "envelope", "verdict"]);
            rep.kv("map", f.name.clone());
            rep.kv("suite", report.suite.join(","));
            rep.kv("rho_grid", report.rho_grid.join(","));
            rep.kv("basepoint", report.basepoint);
            rep.kv("seed", seed);
            rep.kv("verdict", format!("{:?}", report.verdict).to_lowercase());
            for pair in &report.pairs {
                for &(r, tail) in &pair.tails {
                    rep.row(vec![
                        pair.family.clone(),
                        pair.rho.clone(),
                        fmt_f64(r),
                        fmt_opt(tail),
                        format!("{:?}", pair.verdict).to_lowercase(),
                    ]);
                }
            }
            rep.set_data(serde_json::to_value(&report).unwrap());
            rep.write(&cli.out)?;
            Ok(0)
        }

        Cmd::Quotient { space, action } => {
            let tower = load_tower(&space)?;
            let aj: ActionJson = load_json(&action)?;
            let act = aj.to_action(tower)?;
            let check = coarsekit::actions::verify_action(&act);
            let mut rep = Report::new("quotient", vec!["radius", "orbits"]);
            rep.kv("space", space.display());
            rep.kv("action", action.display());
            rep.kv("group_order", act.order());
            rep.kv("action_valid", check.is_valid());
            if !check.is_valid() {
                for (i, v) in check.violations.iter().enumerate() {
                    rep.row(vec![format!("violation{i}"), v.to_string()]);
                }
                rep.set_data(json!({ "violations": check.violations }));
                rep.write(&cli.out)?;
                return Ok(EXIT_VALIDATION);
            }
            let orbit = orbit_space(&act)?;
            for &r in orbit.tower.declared_radii() {
                let t = orbit.tower.truncation(r)?;
                rep.row(vec![fmt_f64(r), t.len().to_string()]);
            }
            let dump = SpaceJson::from_tower_matrix(&orbit.tower);
            rep.set_data(json!({ "orbit_space": dump }));
            rep.write(&cli.out)?;
            Ok(0)
        }

        Cmd::Corpus { sub } => match sub {
            CorpusCmd::List => {
                let mut rep = Report::new("corpus-list", vec!["name", "kind", "params", "note"]);
                for e in corpus::list() {
                    rep.row(vec![e.name.into(), e.kind.into(), e.params_help.into(), e.note.into()]);
                }
                rep.write(&cli.out)?;
                Ok(0)
            }
            CorpusCmd::Emit { name, params, file } => {
                let params: serde_json::Value = serde_json::from_str(&params)
                    .map_err(|e| Failure::config(format!("bad params: {e}")))?;
                let text = match corpus::build(&name, &params)? {
                    corpus::CorpusItem::Space(_) => {
                        let sj = SpaceJson::from_generator(&name, params.clone())?;
                        serde_json::to_string_pretty(&sj).unwrap()
                    }
                    corpus::CorpusItem::Map(_) => serde_json::to_string_pretty(&json!({
                        "generator": { "name": name, "params": params }
                    }))
                    .unwrap(),
                    corpus::CorpusItem::Action { action, .. } => {
                        let aj = ActionJson::from_action(&action);
                        serde_json::to_string_pretty(&aj).unwrap()
                    }
                };
                match file {
                    Some(file) => {
                        fs::write(&file, format!("{text}\n"))?;
                        let mut rep = Report::new("corpus-emit", vec!["name", "file"]);
                        rep.kv("params", params.to_string());
                        rep.row(vec![name, file.display().to_string()]);
                        rep.write(&cli.out)?;
                    }
                    None => {
                        // --out names the artifact itself here
                        fs::write(&cli.out, format!("{text}\n"))?;
                        println!("# command\tcorpus-emit\n{name}\t{}", cli.out);
                    }
                }
                Ok(0)
            }
        },

        Cmd::CheckRaising { x, y, n, open } => {
            let xv: serde_json::Value = load_json(&x)?;
            let yv: serde_json::Value = load_json(&y)?;
            let xi = read_interval(&xv).ok_or_else(|| Failure::config("x report carries no interval"))?;
            let yi = read_interval(&yv).ok_or_else(|| Failure::config("y report carries no interval"))?;
            let verdict = check_raising(xi, yi, n, open);
            let mut rep = Report::new("check-raising", vec!["field", "value"]);
            rep.kv("x", x.display());
            rep.kv("y", y.display());
            rep.kv("n", n);
            rep.kv("open", open);
            rep.row(vec!["x_interval".into(), fmt_interval(xi)]);
            rep.row(vec!["y_interval".into(), fmt_interval(yi)]);
            rep.row(vec!["consistent".into(), verdict.consistent.to_string()]);
            rep.row(vec!["bound_attained".into(), verdict.bound_attained.to_string()]);
            rep.row(vec![
                "equality_consistent".into(),
                verdict
                    .equality_consistent
                    .map_or("-".to_string(), |b| b.to_string()),
            ]);
            rep.set_data(serde_json::to_value(&verdict).unwrap());
            rep.write(&cli.out)?;
            Ok(if verdict.consistent { 0 } else { EXIT_VALIDATION })
        }
    }
}

fn join_f64(vals: &[f64]) -> String {
    vals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn verdict_str(v: &ProfileVerdict) -> String {
    match v {
        ProfileVerdict::Evidence => "evidence".into(),
        ProfileVerdict::Refuted { at } => format!("refuted@{}", join_f64(at)),
        ProfileVerdict::Inconclusive => "inconclusive".into(),
    }
}

fn fmt_interval(i: (usize, Option<usize>)) -> String {
    match i.1 {
        Some(h) => format!("[{},{}]", i.0, h),
        None => format!("[{},?]", i.0),
    }
}

fn read_interval(v: &serde_json::Value) -> Option<(usize, Option<usize>)> {
    let interval = v.get("data")?.get("interval")?;
    let lo = interval.get(0)?.as_u64()? as usize;
    let hi = match interval.get(1) {
        Some(serde_json::Value::Null) | None => None,
        Some(h) => Some(h.as_u64()? as usize),
    };
    Some((lo, hi))
}

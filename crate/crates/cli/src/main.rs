use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use superlie::cohomology::{h_sdim, BlockMode, Budget, CohomologyError, Options};
use superlie::deform::{deform_bracket, is_trivial, DeformedAlgebra};
use superlie::families::{self, Size};
use superlie::liesuper::Sdim;
use superlie::splitness::{self, SplitOutcome, Term};
use superlie::suites::{self, SuiteError, SuiteOptions};

const EXIT_MALFORMED: u8 = 1;
const EXIT_FAILED: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Exact computations with Lie superalgebras: structure, cohomology,
/// deformations and splitting of 1|1 supermanifolds.
#[derive(Parser, Debug)]
#[command(name = "superlie", version)]
struct Cli {
    /// Print the JSON report instead of a table.
    #[arg(long, global = true, env = "SUPERLIE_JSON")]
    json: bool,
    /// Worker threads.
    #[arg(long, global = true, env = "SUPERLIE_JOBS")]
    jobs: Option<usize>,
    /// Largest cohomology block, in cochains.
    #[arg(long, global = true, env = "SUPERLIE_MAX_BLOCK")]
    max_block: Option<usize>,
    /// Seed for randomized simplicity probes.
    #[arg(long, global = true, env = "SUPERLIE_SEED")]
    seed: Option<u64>,
    /// Wall-clock limit in seconds for cohomology.
    #[arg(long, global = true, env = "SUPERLIE_TIMEOUT")]
    timeout: Option<u64>,
    /// key = value file mirroring the flags.
    #[arg(long, global = true, env = "SUPERLIE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long, alias = "algebra", env = "SUPERLIE_FAMILY")]
    family: Option<String>,
    /// `n` or `m|n`.
    #[arg(long, env = "SUPERLIE_N")]
    n: Option<String>,
    #[arg(long, env = "SUPERLIE_PARAM")]
    param: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build an algebra and report its invariants.
    Build(FamilyArgs),
    /// H^2(g; g) with representatives.
    H2 {
        #[command(flatten)]
        fam: FamilyArgs,
        /// Expected sdim `a|b`; a mismatch exits with 2.
        #[arg(long)]
        expect: Option<String>,
        /// inner (default), full or monolithic.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Deform by H^2 representatives, or read the svect~ family.
    Deform {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        from_h2: bool,
    },
    /// Try to split a 1|1 supermanifold over the projective line.
    Split {
        #[arg(long, allow_negative_numbers = true, env = "SUPERLIE_K")]
        k: Option<i64>,
        /// `[psi:][coeff*]tau[*sigma..]:x^e`, repeatable.
        #[arg(long = "term", allow_hyphen_values = true)]
        terms: Vec<String>,
    },
    /// Run a verification suite (or `all`).
    Verify {
        #[arg(long, env = "SUPERLIE_SUITE")]
        suite: Option<String>,
        #[arg(long, env = "SUPERLIE_MAX_N")]
        max_n: Option<usize>,
    },
}

#[derive(Debug)]
enum Fail {
    Malformed(String),
    Verification(String, Value),
    Budget(String),
}

impl From<families::FamilyError> for Fail {
    fn from(e: families::FamilyError) -> Self {
        Fail::Malformed(e.to_string())
    }
}

impl From<CohomologyError> for Fail {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::Budget { .. } => Fail::Budget(e.to_string()),
            other => Fail::Verification(other.to_string(), Value::Null),
        }
    }
}

impl From<SuiteError> for Fail {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Unknown(_) => Fail::Malformed(e.to_string()),
            SuiteError::Budget(m) => Fail::Budget(m),
            SuiteError::Failed(m) => Fail::Verification(m, Value::Null),
        }
    }
}

/// Flags, then environment (both via clap), then the config file.
struct Settings {
    config: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, Fail> {
        let mut config = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| Fail::Malformed(format!("config {}: {e}", p.display())))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| Fail::Malformed(format!("config line {}: expected key = value", i + 1)))?;
                config.insert(k.trim().replace('-', "_"), v.trim().to_string());
            }
        }
        Ok(Settings { config })
    }

    fn str(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.config.get(key).cloned())
    }

    fn num<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Fail> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.config.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Fail::Malformed(format!("config {key}: cannot parse `{v}`"))),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> bool {
        flag || self.config.get(key).is_some_and(|v| matches!(v.as_str(), "1" | "true" | "yes"))
    }
}

struct Ctx {
    budget: Budget,
    seed: u64,
    inputs: BTreeMap<String, Value>,
}

impl Ctx {
    fn input(&mut self, k: &str, v: impl Into<Value>) {
        self.inputs.insert(k.into(), v.into());
    }
}

struct Output {
    results: Value,
    residuals: Vec<String>,
    failure: Option<String>,
}

fn family(ctx: &mut Ctx, s: &Settings, f: &FamilyArgs) -> Result<superlie::liesuper::SuperLieAlgebra, Fail> {
    let name = s.str(&f.family, "family").ok_or_else(|| Fail::Malformed("--family is required".into()))?;
    let n = s.str(&f.n, "n");
    let param = s.str(&f.param, "param");
    ctx.input("family", name.clone());
    ctx.input("n", n.clone());
    ctx.input("param", param.clone());
    let size = n.as_deref().map(Size::parse).transpose()?;
    Ok(families::build(&name, size, param.as_deref())?)
}

fn sdim_str(s: Sdim) -> String {
    format!("{}|{}", s.even, s.odd)
}

fn cmd_build(ctx: &mut Ctx, s: &Settings, f: &FamilyArgs) -> Result<Output, Fail> {
    let g = family(ctx, s, f)?;
    let ax = g.check_axioms();
    let simple = g.is_simple_with(ctx.seed, 8).ok();
    let center = g.center().ok().map(|c| sdim_str(c.sdim(&g)));
    let results = json!({
        "algebra": g.name,
        "sdim": sdim_str(g.sdim()),
        "ring": g.ring().describe(),
        "axioms": ax.ok(),
        "simple": simple.as_ref().map(|r| r.simple),
        "simplicity_method": simple.as_ref().map(|r| format!("{:?}", r.method)),
        "center": center,
        "basis": g.labels(),
        "notes": g.notes,
    });
    let mut residuals = vec![];
    if ax.ok() {
        residuals.push(format!("Jacobi and antisymmetry residuals of {}: exact zero", g.name));
    }
    Ok(Output {
        results,
        residuals,
        failure: (!ax.ok()).then(|| format!("{} violates the axioms", g.name)),
    })
}

fn mode(s: Option<String>) -> Result<BlockMode, Fail> {
    match s.as_deref() {
        None | Some("inner") => Ok(BlockMode::InnerInvariant),
        Some("full") => Ok(BlockMode::Full),
        Some("monolithic") => Ok(BlockMode::Monolithic),
        Some(o) => Err(Fail::Malformed(format!("unknown mode `{o}`"))),
    }
}

fn parse_sdim(s: &str) -> Result<Sdim, Fail> {
    let bad = || Fail::Malformed(format!("bad sdim `{s}`"));
    let (a, b) = s.split_once('|').ok_or_else(bad)?;
    Ok(Sdim::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn cmd_h2(ctx: &mut Ctx, s: &Settings, f: &FamilyArgs, expect: Option<String>, m: Option<String>) -> Result<Output, Fail> {
    let g = family(ctx, s, f)?;
    let m = mode(s.str(&m, "mode"))?;
    let expect = s.str(&expect, "expect").map(|e| parse_sdim(&e)).transpose()?;
    ctx.input("mode", format!("{m:?}"));
    ctx.input("expect", expect.map(sdim_str));
    let opts = Options {
        mode: m,
        budget: ctx.budget.clone(),
        representatives: true,
    };
    let rep = h_sdim(&g, 2, &opts)?;
    let failure = expect.filter(|e| *e != rep.sdim).map(|e| format!("expected H2 = {}, got {}", sdim_str(e), sdim_str(rep.sdim)));
    Ok(Output {
        results: rep.to_json(&g),
        residuals: vec![],
        failure,
    })
}

fn cmd_deform(ctx: &mut Ctx, s: &Settings, f: &FamilyArgs, from_h2: bool) -> Result<Output, Fail> {
    let from_h2 = s.flag(from_h2, "from_h2");
    ctx.input("from_h2", from_h2);
    let mut residuals = vec![];
    let mut items = vec![];
    let mut failure = None;
    if from_h2 {
        let g = family(ctx, s, f)?;
        let opts = Options {
            budget: ctx.budget.clone(),
            ..Options::default()
        };
        let rep = h_sdim(&g, 2, &opts)?;
        let param = s.str(&f.param, "param");
        for c in &rep.representatives {
            let name = param.clone().unwrap_or_else(|| if c.parity.is_odd() { "tau".into() } else { "t".into() });
            match deform_bracket(&g, c, &name) {
                Ok(d) => {
                    let t = is_trivial(&d, 1).map_err(|e| Fail::Verification(e.to_string(), Value::Null))?;
                    residuals.push(format!("Jacobi residual of {}: exact zero", d.algebra.name));
                    items.push(json!({
                        "parity": c.parity.to_string(),
                        "parameter": name,
                        "ring": d.algebra.ring().describe(),
                        "cochain": c.to_json(&g),
                        "jacobi": "exact zero",
                        "trivial": t.trivial,
                        "class_nonzero": t.class_nonzero,
                        "note": t.note,
                    }));
                }
                Err(e) => {
                    failure = Some(e.to_string());
                    items.push(json!({"parity": c.parity.to_string(), "error": e.to_string()}));
                }
            }
        }
        return Ok(Output {
            results: json!({"algebra": g.name, "h2": sdim_str(rep.sdim), "deformations": items}),
            residuals,
            failure,
        });
    }
    // the svect~ family read as a deformation of svect
    let name = s.str(&f.family, "family").ok_or_else(|| Fail::Malformed("--family is required".into()))?;
    if name != "svect" {
        return Err(Fail::Malformed("without --from-h2 only --family svect is supported".into()));
    }
    let mut tf = f.clone();
    tf.family = Some("svect_tilde".into());
    let n = s.str(&f.n, "n").ok_or_else(|| Fail::Malformed("--n is required".into()))?;
    let odd = n.trim().parse::<usize>().is_ok_and(|v| v % 2 == 1);
    let param = s.str(&f.param, "param").unwrap_or_else(|| if odd { "tau".into() } else { "t".into() });
    tf.param = Some(param.clone());
    let base = family(ctx, s, &FamilyArgs { family: Some("svect".into()), n: Some(n.clone()), param: None })?;
    let fam = family(ctx, s, &tf)?;
    let d = DeformedAlgebra::from_family(&base, &fam, &param).map_err(|e| Fail::Verification(e.to_string(), Value::Null))?;
    let ax = d.check();
    let t = is_trivial(&d, 1).map_err(|e| Fail::Verification(e.to_string(), Value::Null))?;
    if ax.ok() {
        residuals.push(format!("Jacobi residual of {}: exact zero", fam.name));
    } else {
        failure = Some(format!("{} violates Jacobi", fam.name));
    }
    Ok(Output {
        results: json!({
            "algebra": fam.name,
            "base": base.name,
            "correction": d.correction.to_json(&base),
            "jacobi": if ax.ok() { "exact zero" } else { "nonzero" },
            "trivial": t.trivial,
            "class_nonzero": t.class_nonzero,
            "note": t.note,
        }),
        residuals,
        failure,
    })
}

fn cmd_split(ctx: &mut Ctx, s: &Settings, k: Option<i64>, terms: &[String]) -> Result<Output, Fail> {
    let k = s.num(k, "k")?.ok_or_else(|| Fail::Malformed("--k is required".into()))?;
    let mut raw: Vec<String> = terms.to_vec();
    if raw.is_empty() {
        if let Some(t) = s.config.get("term") {
            raw = t.split(',').map(|x| x.trim().to_string()).collect();
        }
    }
    ctx.input("k", k);
    ctx.input("terms", raw.clone());
    let parsed: Vec<Term> = raw.iter().map(|t| Term::parse(t)).collect::<Result<_, _>>().map_err(|e| Fail::Malformed(e.to_string()))?;
    let t = splitness::make_superstring(k, &parsed).map_err(|e| Fail::Malformed(e.to_string()))?;
    let rep = splitness::splitting_attempt(&t).map_err(|e| Fail::Verification(e.to_string(), Value::Null))?;
    let (dim, _) = splitness::obstruction_space(k);
    let mut residuals = vec![];
    let outcome = match &rep.outcome {
        SplitOutcome::Split(w) => {
            let ok = splitness::verify_witness(&t, w);
            if ok {
                residuals.push("witness carries the gluing to the split model exactly".into());
            }
            let r = |f: &splitness::LaurentGrassmann, v: &str, o: &str| f.render(&t.names, v, o);
            json!({
                "verdict": "split",
                "witness": {
                    "x": r(&w.x_new, "x", "xi"),
                    "xi": r(&w.xi_new, "x", "xi"),
                    "y": r(&w.y_new, "y", "eta"),
                    "eta": r(&w.eta_new, "y", "eta"),
                },
                "witness_verified": ok,
            })
        }
        SplitOutcome::Obstructed(c) => json!({
            "verdict": "non-split",
            "class": serde_json::to_value(c).unwrap_or(Value::Null),
        }),
    };
    Ok(Output {
        results: json!({
            "k": k,
            "gluing": t.render(),
            "outcome": outcome,
            "obstruction_space": {"dim": dim, "parity": "odd"},
            "window": [rep.window.0, rep.window.1],
            "window_ok": rep.window_ok,
        }),
        residuals,
        failure: None,
    })
}

fn cmd_verify(ctx: &mut Ctx, s: &Settings, suite: Option<String>, max_n: Option<usize>) -> Result<Output, Fail> {
    let suite = s.str(&suite, "suite").ok_or_else(|| Fail::Malformed(format!("--suite is required; one of all, {}", suites::SUITES.join(", "))))?;
    let max_n = s.num(max_n, "max_n")?.unwrap_or(5);
    ctx.input("suite", suite.clone());
    ctx.input("max_n", max_n);
    let names: Vec<&str> = if suite == "all" { suites::SUITES.to_vec() } else { vec![suite.as_str()] };
    let opts = SuiteOptions {
        max_n,
        budget: ctx.budget.clone(),
        ..SuiteOptions::default()
    };
    let mut reports = vec![];
    let mut residuals = vec![];
    let mut failed = vec![];
    for n in names {
        let r = suites::run_suite(n, &opts)?;
        if !r.pass {
            failed.push(n.to_string());
        }
        residuals.extend(r.residuals.iter().cloned());
        reports.push(r);
    }
    Ok(Output {
        results: json!({"pass": failed.is_empty(), "suites": reports}),
        residuals,
        failure: (!failed.is_empty()).then(|| format!("failed: {}", failed.join(", "))),
    })
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", scalar(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render(x, indent + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()) && a.len() <= 12,
        Value::Object(m) => m.is_empty(),
        _ => true,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Object(_) => "{}".into(),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let settings = match Settings::load(cli.config.as_ref()) {
        Ok(s) => s,
        Err(f) => return report_failure(f),
    };
    let setup = || -> Result<Ctx, Fail> {
        let jobs = settings.num(cli.jobs, "jobs")?;
        if let Some(j) = jobs {
            rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global().map_err(|e| Fail::Malformed(e.to_string()))?;
        }
        let mut budget = Budget::default();
        if let Some(b) = settings.num(cli.max_block, "max_block")? {
            budget.max_block = b;
        }
        if let Some(t) = settings.num(cli.timeout, "timeout")? {
            budget.deadline = Some(Instant::now() + Duration::from_secs(t));
        }
        let seed = settings.num(cli.seed, "seed")?.unwrap_or(0);
        let mut ctx = Ctx {
            budget: budget.clone(),
            seed,
            inputs: BTreeMap::new(),
        };
        ctx.input("max_block", budget.max_block);
        ctx.input("seed", seed);
        Ok(ctx)
    };
    let mut ctx = match setup() {
        Ok(c) => c,
        Err(f) => return report_failure(f),
    };
    let json_out = settings.flag(cli.json, "json");
    let (cmd_name, res) = match &cli.cmd {
        Cmd::Build(f) => ("build", cmd_build(&mut ctx, &settings, f)),
        Cmd::H2 { fam, expect, mode } => ("h2", cmd_h2(&mut ctx, &settings, fam, expect.clone(), mode.clone())),
        Cmd::Deform { fam, from_h2 } => ("deform", cmd_deform(&mut ctx, &settings, fam, *from_h2)),
        Cmd::Split { k, terms } => ("split", cmd_split(&mut ctx, &settings, *k, terms)),
        Cmd::Verify { suite, max_n } => ("verify", cmd_verify(&mut ctx, &settings, suite.clone(), *max_n)),
    };
    let out = match res {
        Ok(o) => o,
        Err(f) => return report_failure(f),
    };
    let canonical = json!({"command": cmd_name, "inputs": ctx.inputs}).to_string();
    let hash: String = Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let report = json!({
        "command": argv[1..],
        "version": env!("CARGO_PKG_VERSION"),
        "input_hash": hash,
        "results": out.results,
        "residuals": out.residuals,
        "status": if out.failure.is_some() { "verification failure" } else { "ok" },
        "failure": out.failure,
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    if json_out {
        println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    } else {
        let mut s = String::new();
        render(&report, 0, &mut s);
        print!("{s}");
    }
    if out.failure.is_some() {
        ExitCode::from(EXIT_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}

fn report_failure(f: Fail) -> ExitCode {
    match f {
        Fail::Malformed(m) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_MALFORMED)
        }
        Fail::Verification(m, v) => {
            eprintln!("verification failure: {m}");
            if !v.is_null() {
                eprintln!("{v}");
            }
            ExitCode::from(EXIT_FAILED)
        }
        Fail::Budget(m) => {
            eprintln!("budget exhausted: {m}");
            ExitCode::from(EXIT_BUDGET)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let dir = std::env::temp_dir().join(format!("superlie-cfg-{}", std::process::id()));
        std::fs::write(&dir, "# comment\nfamily = psq\nmax-block = 10\n").unwrap();
        let s = Settings::load(Some(&dir)).unwrap();
        assert_eq!(s.str(&None, "family").as_deref(), Some("psq"));
        assert_eq!(s.str(&Some("q".into()), "family").as_deref(), Some("q"));
        assert_eq!(s.num::<usize>(None, "max_block").unwrap(), Some(10));
        std::fs::write(&dir, "oops\n").unwrap();
        assert!(Settings::load(Some(&dir)).is_err());
        std::fs::remove_file(&dir).ok();
    }

    #[test]
    fn sdim_parsing() {
        assert_eq!(parse_sdim("0|1").unwrap(), Sdim::new(0, 1));
        assert!(parse_sdim("01").is_err());
    }
}

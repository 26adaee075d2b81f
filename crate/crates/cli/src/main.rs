use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mpgame::engine::{run_play, Horizon, PlayRecord, StopReason};
use mpgame::export::{read_graph, to_dot, write_graph, write_reduction, LoadedGraph};
use mpgame::expr::{eval_expr, expressions_for, parse_expr, Expr};
use mpgame::condition::eval_condition;
use mpgame::game::{estimate_limits, geometric_checkpoints, LimitVector, Owner};
use mpgame::machine::{parse_machine, validate, TwoSidedMachine};
use mpgame::minsky::{convert_minsky, parse_standard};
use mpgame::monitor::{check_l1, check_l2_l5, check_l3, check_l4, check_l6_l7, check_prop1, check_prop2, summarize_outcome, LemmaReport, Outcome};
use mpgame::num::{parse_q, Q};
use mpgame::reduction::{build_game, DimensionLayout, ReductionOutput};
use mpgame::strategy::{parse_strategy, RefereeParams, StrategyError};
use mpgame::trace::{read_trace, write_trace};

#[derive(Parser)]
#[command(name = "mpgame", version, about = "Two-sided counter machines as multidimensional mean-payoff games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a machine file (`.tsm`, or a standard `.mm` machine after conversion).
    Validate { machine: PathBuf },
    /// Compile a machine into a game graph file.
    Compile {
        machine: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Play two strategies on a compiled game.
    Simulate {
        /// Graph file, or a machine file compiled on the fly.
        input: PathBuf,
        #[command(flatten)]
        play: PlayArgs,
        /// Write the play as a trace file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check lemma invariants on a recorded trace or a fresh play.
    Monitor {
        input: PathBuf,
        /// Read the play from a trace file instead of playing it.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        play: PlayArgs,
        /// Comma-separated subset of L1..L7, P1, P2.
        #[arg(long, value_delimiter = ',', default_value = "L1,L2,L3,L4,L5,L6,L7")]
        lemmas: Vec<String>,
        /// Thresholds for P2; repeatable.
        #[arg(long)]
        delta: Vec<String>,
    },
    /// Evaluate a mean-payoff expression on a limit vector.
    ExprEval {
        /// Expression file; without one, the condition expressions E and F of the layout are used.
        expr: Option<PathBuf>,
        /// `k` exact averages, or `2k` values: all inf components, then all sup components.
        #[arg(long, num_args = 1.., allow_hyphen_values = true, required = true)]
        lv: Vec<String>,
    },
    /// Convert a graph file to DOT or JSON lines.
    Export {
        graph: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long, default_value = "tau")]
    p1: String,
    #[arg(long, default_value = "referee")]
    p2: String,
    /// Halting bound N of the referee (N > 10).
    #[arg(long)]
    halt_bound: Option<u64>,
    /// Round horizon; ignored when `--max-resets` is given.
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,
    /// Stop before the given number of reset visits is exceeded.
    #[arg(long)]
    max_resets: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    max_runs: u64,
}

impl PlayArgs {
    fn horizon(&self) -> Horizon {
        match self.max_resets {
            Some(r) => Horizon::resets(r, self.max_runs),
            None => Horizon { max_runs: Some(self.max_runs), ..Horizon::rounds(self.horizon) },
        }
    }
}

/// Usage and IO problems exit with 2; everything else that fails exits with 1.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Usage(e.into()))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(usage)
}

fn is_standard(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "mm")
}

fn load_machine(path: &Path) -> anyhow::Result<TwoSidedMachine> {
    let text = read(path)?;
    if is_standard(path) {
        let m = parse_standard(&text).with_context(|| path.display().to_string())?;
        return Ok(convert_minsky(&m).machine);
    }
    parse_machine(&text).with_context(|| path.display().to_string())
}

/// A compiled game from a graph file or a machine file.
fn load_game(path: &Path) -> anyhow::Result<ReductionOutput> {
    if is_standard(path) || path.extension().is_some_and(|e| e == "tsm") {
        let m = load_machine(path)?;
        return Ok(build_game(&m)?);
    }
    let g = load_graph(path)?;
    g.reduction().ok_or_else(|| anyhow!("{} carries no gadget annotations", path.display()))
}

fn load_graph(path: &Path) -> anyhow::Result<LoadedGraph> {
    read_graph(&read(path)?).with_context(|| path.display().to_string())
}

fn strategies(p: &PlayArgs) -> anyhow::Result<(Box<dyn mpgame::strategy::Strategy>, Box<dyn mpgame::strategy::Strategy>)> {
    let mk = |spec: &str, owner| {
        parse_strategy(spec, owner, p.halt_bound).map_err(|e| match e {
            StrategyError::HaltBoundTooSmall(_) => anyhow::Error::new(e),
            e => usage(e),
        })
    };
    Ok((mk(&p.p1, Owner::P1)?, mk(&p.p2, Owner::P2)?))
}

fn play(out: &ReductionOutput, p: &PlayArgs) -> anyhow::Result<PlayRecord> {
    let (mut a, mut b) = strategies(p)?;
    Ok(run_play(&out.graph, Some(&out.annotations), a.as_mut(), b.as_mut(), &p.horizon())?)
}

fn cmd_validate(path: &Path) -> anyhow::Result<bool> {
    let m = match load_machine(path) {
        Ok(m) => m,
        Err(e) if e.is::<Usage>() => return Err(e),
        Err(e) => {
            println!("{e:#}");
            return Ok(false);
        }
    };
    let violations = validate(&m);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        println!("ok: {} states, {} counter(s)", m.states().len(), m.counters());
    }
    Ok(violations.is_empty())
}

fn cmd_compile(machine: &Path, out: &Path, dot: Option<&Path>) -> anyhow::Result<bool> {
    let m = load_machine(machine)?;
    let violations = validate(&m);
    if !violations.is_empty() {
        for v in &violations {
            println!("{v}");
        }
        return Ok(false);
    }
    let game = build_game(&m)?;
    write(out, &write_reduction(&game))?;
    if let Some(d) = dot {
        write(d, &to_dot(&game.graph, Some(&game.annotations)))?;
    }
    println!("k = {}, {} vertices, {} edges", game.layout.k(), game.graph.vertex_count(), game.graph.edge_count());
    Ok(true)
}

fn stop_text(s: StopReason) -> &'static str {
    match s {
        StopReason::Horizon => "horizon reached",
        StopReason::MaxResets => "reset cap reached",
        StopReason::MaxRuns => "run cap reached",
        StopReason::Lasso => "lasso",
    }
}

fn summary(out: &ReductionOutput, rec: &PlayRecord) -> anyhow::Result<String> {
    let mut s = String::new();
    let blames = rec.blames();
    writeln!(s, "rounds: {}", rec.rounds())?;
    writeln!(s, "stop: {}", stop_text(rec.stop))?;
    writeln!(s, "reset visits: {}", rec.final_sim.reset_visits)?;
    if blames == 0 {
        writeln!(s, "no blame")?;
    } else {
        writeln!(s, "blames: {blames}")?;
    }
    match summarize_outcome(out, rec, &out.condition)? {
        Outcome::Lasso { limits, holds } => {
            let l = rec.lasso.as_ref().expect("lasso outcome");
            let at = out.annotations.tag(l.vertex);
            let place = at.state.clone().unwrap_or_else(|| at.role.short());
            writeln!(s, "lasso at {place} from round {}; condition: {holds}", l.from_round)?;
            writeln!(s, "limits: {}", named(&out.layout, limits.inf()))?;
        }
        Outcome::Estimate { averages, .. } => {
            let cps = geometric_checkpoints(rec.rounds());
            let est = estimate_limits(&out.graph, &rec.prefix, &cps)?;
            let mut sat = 0;
            for row in &est.averages {
                sat += usize::from(eval_condition(&out.condition, &LimitVector::exact(row.clone()))?);
            }
            let verdict = if sat == cps.len() {
                "satisfied at all checkpoints".to_string()
            } else if sat == 0 {
                "violated at all checkpoints".to_string()
            } else {
                format!("satisfied at {sat} of {} checkpoints", cps.len())
            };
            writeln!(s, "condition estimate: {verdict}")?;
            writeln!(s, "averages: {}", named(&out.layout, &averages))?;
        }
    }
    Ok(s)
}

fn named(layout: &DimensionLayout, v: &[Q]) -> String {
    v.iter().enumerate().map(|(d, x)| format!("{}={x}", layout.name(d))).collect::<Vec<_>>().join(" ")
}

fn cmd_simulate(input: &Path, p: &PlayArgs, trace: Option<&Path>) -> anyhow::Result<bool> {
    let out = load_game(input)?;
    let rec = play(&out, p)?;
    if let Some(t) = trace {
        write(t, &write_trace(&out.graph, &rec, &p.p1, &p.p2))?;
    }
    print!("{}", summary(&out, &rec)?);
    Ok(true)
}

fn cmd_monitor(input: &Path, trace: Option<&Path>, p: &PlayArgs, lemmas: &[String], deltas: &[String]) -> anyhow::Result<bool> {
    let out = load_game(input)?;
    let rec = match trace {
        Some(t) => read_trace(&out.graph, Some(&out.annotations), &read(t)?).with_context(|| t.display().to_string())?,
        None => play(&out, p)?,
    };
    let mut wanted: Vec<String> = lemmas.iter().map(|l| l.trim().to_ascii_uppercase()).collect();
    wanted.dedup();
    for w in &wanted {
        if !matches!(w.as_str(), "L1" | "L2" | "L3" | "L4" | "L5" | "L6" | "L7" | "P1" | "P2") {
            return Err(usage(anyhow!("unknown check {w:?}")));
        }
    }
    let params = || -> anyhow::Result<RefereeParams> {
        let n = p.halt_bound.ok_or_else(|| usage(anyhow!("--halt-bound is required for L1 to L5")))?;
        Ok(RefereeParams::new(n)?)
    };
    let has = |id: &str| wanted.iter().any(|w| w == id);
    let mut reports: Vec<LemmaReport> = Vec::new();
    if has("L1") {
        reports.push(check_l1(&out, &rec, &params()?));
    }
    if has("L2") || has("L5") {
        let (l2, l5) = check_l2_l5(&out, &rec, &params()?);
        reports.extend([l2, l5].into_iter().filter(|r| has(&r.id)));
    }
    if has("L3") {
        reports.push(check_l3(&out, &rec, &params()?));
    }
    if has("L4") {
        reports.push(check_l4(&out, &rec, &params()?));
    }
    if has("L6") || has("L7") {
        let (l6, l7) = check_l6_l7(&out, &rec);
        reports.extend([l6, l7].into_iter().filter(|r| has(&r.id)));
    }
    if has("P1") {
        reports.push(check_prop1(&out, &rec));
    }
    if has("P2") {
        let deltas = if deltas.is_empty() { vec!["1/11".to_string()] } else { deltas.to_vec() };
        for d in deltas {
            let d = parse_q(&d).map_err(usage)?;
            let mut r = check_prop2(&out, &rec, &d);
            r.id = format!("{} delta={d}", r.id);
            reports.push(r);
        }
    }
    let mut ok = true;
    for r in &reports {
        print!("{r}");
        if !r.vacuous && !r.passed() {
            ok = false;
            if let Some(f) = r.first_failure() {
                println!("  first violation of {} at round {}", r.id, f.round);
            }
        }
    }
    println!("{}", if ok { "all requested checks passed" } else { "some checks failed" });
    Ok(ok)
}

fn cmd_expr_eval(file: Option<&Path>, lv: &[String]) -> anyhow::Result<bool> {
    let vals = lv.iter().flat_map(|s| s.split(',')).filter(|s| !s.is_empty()).map(parse_q).collect::<Result<Vec<Q>, _>>().map_err(usage)?;
    let lv_for = |k: usize| -> anyhow::Result<LimitVector> {
        if vals.len() == k {
            Ok(LimitVector::exact(vals.clone()))
        } else if vals.len() == 2 * k {
            Ok(LimitVector::new(vals[..k].to_vec(), vals[k..].to_vec())?)
        } else {
            Err(usage(anyhow!("expected {k} or {} values for --lv, got {}", 2 * k, vals.len())))
        }
    };
    match file {
        Some(f) => {
            let e: Expr = parse_expr(&read(f)?).with_context(|| f.display().to_string())?;
            let k = if vals.len() % 2 == 0 && e.max_dim().is_some_and(|d| d < vals.len() / 2) { vals.len() / 2 } else { vals.len() };
            let lv = lv_for(k)?;
            e.validate(lv.dims())?;
            println!("{e} = {}", eval_expr(&e, &lv)?);
        }
        None => {
            let layout = match vals.len() {
                8 | 16 => DimensionLayout::one_counter(),
                10 | 20 => DimensionLayout::two_counters(),
                n => return Err(usage(anyhow!("without an expression file --lv needs 8, 10, 16 or 20 values, got {n}"))),
            };
            let lv = lv_for(layout.k())?;
            let t = expressions_for(&layout);
            let phi = eval_condition(&mpgame::reduction::build_condition(&layout), &lv)?;
            println!("E = {}", eval_expr(&t.e, &lv)?);
            println!("F = {}", eval_expr(&t.f, &lv)?);
            println!("condition: {phi}");
        }
    }
    Ok(true)
}

fn cmd_export(graph: &Path, format: Format, out: Option<&Path>) -> anyhow::Result<bool> {
    let g = load_graph(graph)?;
    let text = match format {
        Format::Dot => to_dot(&g.graph, g.annotations.as_ref()),
        Format::Json => write_graph(&g.graph, g.condition.as_ref(), g.annotations.as_ref()),
    };
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Validate { machine } => cmd_validate(&machine),
        Cmd::Compile { machine, out, dot } => cmd_compile(&machine, &out, dot.as_deref()),
        Cmd::Simulate { input, play, trace } => cmd_simulate(&input, &play, trace.as_deref()),
        Cmd::Monitor { input, trace, play, lemmas, delta } => cmd_monitor(&input, trace.as_deref(), &play, &lemmas, &delta),
        Cmd::ExprEval { expr, lv } => cmd_expr_eval(expr.as_deref(), &lv),
        Cmd::Export { graph, format, out } => cmd_export(&graph, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { 2 } else { 1 })
        }
    }
}

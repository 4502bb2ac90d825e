//! Command-line front end: refinement queries, closure enumeration,
//! weak-memory axiom checks, race reports and constraint-system emission.
//!
//! Exit codes: 0 the property holds (or the command succeeded), 1 the
//! property fails, 2 usage or parse error, 3 precondition violation.

use clap::{Parser, Subcommand, ValueEnum};
use pomsets::encoder::{self, EmitFormat, EncodingInput, Formula};
use pomsets::memory::{self, RfMap, RfTarget};
use pomsets::text::{self, ParsedPs};
use pomsets::{refine, EventId, Join, Method, PartialString, Program};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_HOLDS: u8 = 0;
const EXIT_FAILS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

/// Environment variable naming the default directory for written outputs.
const OUT_DIR_ENV: &str = "POMSETS_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "pomsets",
    version,
    about = "Partial-string refinement and weak-memory encoding toolkit"
)]
struct Cli {
    /// Emit machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Backtrack,
    Sat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JoinArg {
    Seq,
    Par,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Cubic,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Smt2,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the first partial string refines the second.
    Refine {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value = "backtrack")]
        method: MethodArg,
        /// Print the witness morphism when refinement holds.
        #[arg(long)]
        witness: bool,
        /// Also write the propositional instance in DIMACS form (a `.map`
        /// sidecar names the variables).
        #[arg(long)]
        dimacs: Option<PathBuf>,
    },
    /// Decide refinement between two programs.
    ProgRefine { x: PathBuf, y: PathBuf },
    /// Decide refinement between the iteration closures of two programs.
    LfpRefine {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum)]
        join: JoinArg,
    },
    /// Enumerate a program's downward closure up to isomorphism.
    Closure {
        input: PathBuf,
        #[arg(long)]
        max_events: usize,
    },
    /// Check the weak-memory axioms of a string under a read-from map.
    Axioms {
        ps: PathBuf,
        rf: PathBuf,
        /// Prepend one initial release store per address.
        #[arg(long)]
        init: bool,
        /// Also report loads observing a different bit than the latest
        /// store that happens before them.
        #[arg(long)]
        lint: bool,
    },
    /// Keep only the SC-relaxed members of a program's closure.
    Restrict {
        input: PathBuf,
        #[arg(long)]
        max_events: usize,
    },
    /// Report unordered conflicting non-synchronizing access pairs.
    Races { input: PathBuf },
    /// Write the partial-order constraint system of a skeleton.
    Encode {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "cubic")]
        encoding: EncodingArg,
        #[arg(long, value_enum, default_value = "smt2")]
        format: FormatArg,
        /// Output path; defaults to the input stem under POMSETS_OUT_DIR
        /// (or the working directory).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Leave out the initial store events.
        #[arg(long)]
        no_init: bool,
    },
    /// Check that both encodings agree on satisfiability.
    Equisat {
        input: PathBuf,
        #[arg(long)]
        no_init: bool,
        /// Decide with an external SMT-LIB2 solver binary instead of the
        /// built-in enumeration.
        #[arg(long)]
        solver: Option<PathBuf>,
    },
    /// Print the constraint census of an encoding.
    Stats {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "cubic")]
        encoding: EncodingArg,
        #[arg(long)]
        no_init: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn usage(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn precondition(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path)
        .map_err(|e| CmdError::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_ps(path: &Path) -> Result<ParsedPs, CmdError> {
    text::parse_partial_string(&read_file(path)?)
        .map_err(|e| CmdError::usage(format!("{}: {e}", path.display())))
}

fn load_prog(path: &Path) -> Result<Program, CmdError> {
    let src = read_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loader = move |include: &str| -> Result<String, String> {
        std::fs::read_to_string(base.join(include)).map_err(|e| e.to_string())
    };
    text::parse_program(&src, &loader)
        .map_err(|e| CmdError::usage(format!("{}: {e}", path.display())))
}

/// Resolve an output path against POMSETS_OUT_DIR when it is relative.
fn resolve_output(path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        return path;
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path,
    }
}

fn write_output(path: &Path, contents: &str) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CmdError::usage(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CmdError::usage(format!("cannot write {}: {e}", path.display())))
}

fn verdict_code(holds: bool) -> u8 {
    if holds {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn run(cli: Cli) -> Result<u8, CmdError> {
    match cli.command {
        Command::Refine {
            x,
            y,
            method,
            witness,
            dimacs,
        } => cmd_refine(&x, &y, method, witness, dimacs, cli.json),
        Command::ProgRefine { x, y } => {
            let px = load_prog(&x)?;
            let py = load_prog(&y)?;
            let holds = px.refines(&py);
            if cli.json {
                println!("{}", json!({ "verb": "prog-refine", "holds": holds }));
            } else {
                println!("prog-refine: {}", if holds { "holds" } else { "fails" });
            }
            Ok(verdict_code(holds))
        }
        Command::LfpRefine { x, y, join } => cmd_lfp(&x, &y, join, cli.json),
        Command::Closure { input, max_events } => {
            let prog = load_prog(&input)?;
            let closure = prog
                .enumerate_closure(max_events)
                .map_err(|e| CmdError::precondition(e.to_string()))?;
            print_string_set("closure", &closure, cli.json);
            Ok(EXIT_HOLDS)
        }
        Command::Axioms { ps, rf, init, lint } => cmd_axioms(&ps, &rf, init, lint, cli.json),
        Command::Restrict { input, max_events } => {
            let prog = load_prog(&input)?;
            let members = memory::sc_relaxed_restrict(&prog, max_events)
                .map_err(|e| CmdError::precondition(e.to_string()))?;
            print_string_set("restrict", &members, cli.json);
            Ok(EXIT_HOLDS)
        }
        Command::Races { input } => {
            let parsed = load_ps(&input)?;
            let races = memory::find_races(&parsed.string);
            if cli.json {
                let pairs: Vec<_> = races
                    .iter()
                    .map(|&(a, b)| json!([parsed.names[a], parsed.names[b]]))
                    .collect();
                println!("{}", json!({ "verb": "races", "races": pairs }));
            } else if races.is_empty() {
                println!("no races");
            } else {
                for (a, b) in &races {
                    println!(
                        "race: {} ({}) unordered with {} ({})",
                        parsed.names[*a],
                        parsed.string.label(*a),
                        parsed.names[*b],
                        parsed.string.label(*b)
                    );
                }
            }
            Ok(verdict_code(races.is_empty()))
        }
        Command::Encode {
            input,
            encoding,
            format,
            output,
            no_init,
        } => cmd_encode(&input, encoding, format, output, no_init, cli.json),
        Command::Equisat {
            input,
            no_init,
            solver,
        } => cmd_equisat(&input, no_init, solver, cli.json),
        Command::Stats {
            input,
            encoding,
            no_init,
        } => cmd_stats(&input, encoding, no_init, cli.json),
    }
}

fn cmd_refine(
    x_path: &Path,
    y_path: &Path,
    method: MethodArg,
    witness: bool,
    dimacs: Option<PathBuf>,
    as_json: bool,
) -> Result<u8, CmdError> {
    let px = load_ps(x_path)?;
    let py = load_ps(y_path)?;
    let method_core = match method {
        MethodArg::Backtrack => Method::Backtrack,
        MethodArg::Sat => Method::Sat,
    };
    let morphism = refine::find_morphism(&px.string, &py.string, method_core);
    let holds = morphism.is_some();
    if let Some(path) = dimacs {
        let inst = refine::emit_cnf(&px.string, &py.string);
        let path = resolve_output(path);
        write_output(&path, &inst.to_dimacs())?;
        let map_path = path.with_extension("cnf.map");
        write_output(&map_path, &inst.var_map_sidecar())?;
    }
    let witness_pairs: Vec<(String, String)> = match (&morphism, witness) {
        (Some(m), true) => m
            .map
            .iter()
            .enumerate()
            .map(|(e, &img)| (py.names[e].clone(), px.names[img].clone()))
            .collect(),
        _ => Vec::new(),
    };
    if as_json {
        let w: Vec<_> = witness_pairs.iter().map(|(a, b)| json!([a, b])).collect();
        let mut obj = json!({ "verb": "refine", "holds": holds });
        if witness {
            obj["witness"] = json!(w);
        }
        println!("{obj}");
    } else {
        println!("refine: {}", if holds { "holds" } else { "fails" });
        for (from, to) in &witness_pairs {
            println!("  {from} -> {to}");
        }
    }
    Ok(verdict_code(holds))
}

fn cmd_lfp(x_path: &Path, y_path: &Path, join: JoinArg, as_json: bool) -> Result<u8, CmdError> {
    let px = load_prog(x_path)?;
    let py = load_prog(y_path)?;
    let join = match join {
        JoinArg::Seq => Join::Seq,
        JoinArg::Par => Join::Par,
    };
    let report = pomsets::lfp::lfp_refines(&px, &py, join)
        .map_err(|e| CmdError::precondition(e.to_string()))?;
    if as_json {
        println!(
            "{}",
            json!({
                "verb": "lfp-refine",
                "holds": report.holds,
                "ell_x": report.ell_x,
                "ell_y": report.ell_y,
                "n": report.bound,
                "empty_lhs": report.empty_lhs,
            })
        );
    } else {
        println!(
            "lfp-refine: ell_x={} ell_y={} n={} verdict: {}",
            report.ell_x,
            report.ell_y,
            report.bound,
            if report.holds { "holds" } else { "fails" }
        );
    }
    Ok(verdict_code(report.holds))
}

fn print_string_set(verb: &str, members: &[PartialString], as_json: bool) {
    if as_json {
        let strings: Vec<_> = members
            .iter()
            .map(|s| json!(text::print_partial_string(s)))
            .collect();
        println!(
            "{}",
            json!({ "verb": verb, "count": members.len(), "strings": strings })
        );
    } else {
        println!("{verb}: {} string(s)", members.len());
        for (i, s) in members.iter().enumerate() {
            println!("begin ps m{i}");
            print!("{}", text::print_partial_string(s));
            println!("end");
        }
    }
}

fn cmd_axioms(
    ps_path: &Path,
    rf_path: &Path,
    init: bool,
    lint: bool,
    as_json: bool,
) -> Result<u8, CmdError> {
    let parsed = load_ps(ps_path)?;
    let rf_raw = text::parse_rf(&read_file(rf_path)?, &parsed)
        .map_err(|e| CmdError::usage(format!("{}: {e}", rf_path.display())))?;

    // With initializers the string gains one minimal release per address and
    // `bottom` targets resolve to them.
    let (string, names, rf) = if init {
        let (string, init_ids) = memory::add_initializers(&parsed.string);
        let shift = init_ids.len();
        let mut names: Vec<String> = vec![String::new(); shift];
        for (addr, &id) in &init_ids {
            names[id] = format!("init_{}", addr.0);
        }
        names.extend(parsed.names.iter().cloned());
        let mut rf = RfMap::new();
        for (load, target) in rf_raw.iter() {
            let target = match target {
                RfTarget::Store(s) => RfTarget::Store(s + shift),
                RfTarget::Initial => {
                    let addr = parsed.string.label(load).addr().cloned().ok_or_else(|| {
                        CmdError::precondition(format!(
                            "rf names {} which is not a memory access",
                            parsed.names[load]
                        ))
                    })?;
                    RfTarget::Store(init_ids[&addr])
                }
            };
            rf.insert(load + shift, target);
        }
        (string, names, rf)
    } else {
        (parsed.string.clone(), parsed.names.clone(), rf_raw)
    };

    let report = memory::check_axioms(&string, &rf)
        .map_err(|e| CmdError::precondition(e.to_string()))?;
    let equivalence = memory::sc_relaxed_equivalence(&string, &rf)
        .map_err(|e| CmdError::precondition(e.to_string()))?;
    let lint_hits = if lint {
        memory::lint_value_mismatch(&string, &rf)
            .map_err(|e| CmdError::precondition(e.to_string()))?
    } else {
        Vec::new()
    };

    let name_of = |e: EventId| names[e].clone();
    if as_json {
        let witnesses: Vec<_> = report
            .witnesses
            .iter()
            .map(|v| {
                json!({
                    "axiom": v.kind(),
                    "events": v.events().iter().map(|&e| name_of(e)).collect::<Vec<_>>(),
                })
            })
            .collect();
        println!(
            "{}",
            json!({
                "verb": "axioms",
                "sw": report.sw,
                "wc": report.wc,
                "fr": report.fr,
                "weak_rc": report.weak_rc,
                "strong_rc": report.strong_rc,
                "sc_relaxed": report.sc_relaxed,
                "views_agree": equivalence,
                "witnesses": witnesses,
                "unscoped_rf": report
                    .unscoped_rf
                    .iter()
                    .map(|&(l, s)| json!([name_of(l), name_of(s)]))
                    .collect::<Vec<_>>(),
                "value_lint": lint_hits.iter().map(|&e| name_of(e)).collect::<Vec<_>>(),
            })
        );
    } else {
        let flag = |b: bool| if b { "ok" } else { "violated" };
        println!("sw: {}", flag(report.sw));
        println!("wc: {}", flag(report.wc));
        println!("fr: {}", flag(report.fr));
        println!("weak-rc: {}", flag(report.weak_rc));
        println!("strong-rc: {}", flag(report.strong_rc));
        println!("sc-relaxed: {}", flag(report.sc_relaxed));
        println!("views-agree: {equivalence}");
        for v in &report.witnesses {
            let events: Vec<String> = v.events().iter().map(|&e| name_of(e)).collect();
            println!("witness {}: {}", v.kind(), events.join(" "));
        }
        for (l, s) in &report.unscoped_rf {
            println!(
                "note: acquire {} reads non-release store {}",
                name_of(*l),
                name_of(*s)
            );
        }
        for e in &lint_hits {
            println!("lint: load {} observes an overwritten bit", name_of(*e));
        }
    }
    Ok(verdict_code(report.axioms_hold()))
}

fn build_input(path: &Path, no_init: bool) -> Result<EncodingInput, CmdError> {
    let parsed = load_ps(path)?;
    EncodingInput::new(&parsed.string, !no_init)
        .map_err(|e| CmdError::precondition(e.to_string()))
}

fn encode_with(input: &EncodingInput, kind: EncodingArg) -> (Formula, &'static str) {
    match kind {
        EncodingArg::Cubic => (encoder::encode_cubic(input), "cubic"),
        EncodingArg::Quadratic => (encoder::encode_quadratic(input), "quadratic"),
    }
}

fn cmd_encode(
    path: &Path,
    encoding: EncodingArg,
    format: FormatArg,
    output: Option<PathBuf>,
    no_init: bool,
    as_json: bool,
) -> Result<u8, CmdError> {
    let input = build_input(path, no_init)?;
    let (formula, kind_name) = encode_with(&input, encoding);
    let (emit_format, ext) = match format {
        FormatArg::Smt2 => (EmitFormat::Smt2, "smt2"),
        FormatArg::Text => (EmitFormat::Text, "txt"),
    };
    let contents = encoder::emit(&formula, emit_format);
    let out_path = resolve_output(output.unwrap_or_else(|| {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "encoding".to_string());
        PathBuf::from(format!("{stem}.{ext}"))
    }));
    write_output(&out_path, &contents)?;
    if as_json {
        println!(
            "{}",
            json!({
                "verb": "encode",
                "encoding": kind_name,
                "output": out_path.display().to_string(),
                "constraints": formula.constraints.len(),
            })
        );
    } else {
        println!(
            "wrote {} ({} constraints, {})",
            out_path.display(),
            formula.constraints.len(),
            kind_name
        );
    }
    Ok(EXIT_HOLDS)
}

/// Ask an external SMT-LIB2 solver for a verdict on a script.
fn run_solver(solver: &Path, script: &str, label: &str) -> Result<bool, CmdError> {
    let dir = std::env::temp_dir();
    let file = dir.join(format!("pomsets-{}-{label}.smt2", std::process::id()));
    std::fs::write(&file, script)
        .map_err(|e| CmdError::usage(format!("cannot write {}: {e}", file.display())))?;
    let out = std::process::Command::new(solver)
        .arg(&file)
        .output()
        .map_err(|e| CmdError::usage(format!("cannot run {}: {e}", solver.display())))?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let verdict = stdout
        .lines()
        .map(str::trim)
        .find(|l| *l == "sat" || *l == "unsat");
    let _ = std::fs::remove_file(&file);
    match verdict {
        Some("sat") => Ok(true),
        Some("unsat") => Ok(false),
        _ => Err(CmdError::usage(format!(
            "solver produced no sat/unsat verdict: {stdout:?}"
        ))),
    }
}

fn cmd_equisat(
    path: &Path,
    no_init: bool,
    solver: Option<PathBuf>,
    as_json: bool,
) -> Result<u8, CmdError> {
    let input = build_input(path, no_init)?;
    let cubic = encoder::encode_cubic(&input);
    let quadratic = encoder::encode_quadratic(&input);
    let (sat_cubic, sat_quadratic, backend) = match solver {
        Some(solver) => {
            let c = run_solver(&solver, &encoder::emit(&cubic, EmitFormat::Smt2), "cubic")?;
            let q = run_solver(
                &solver,
                &encoder::emit(&quadratic, EmitFormat::Smt2),
                "quadratic",
            )?;
            (c, q, "solver")
        }
        None => {
            // The built-in enumeration carries the size cap.
            encoder::equisat_check(&input).map_err(|e| CmdError::precondition(e.to_string()))?;
            (
                encoder::solve_by_enumeration(&cubic).is_some(),
                encoder::solve_by_enumeration(&quadratic).is_some(),
                "enumeration",
            )
        }
    };
    let agree = sat_cubic == sat_quadratic;
    if as_json {
        println!(
            "{}",
            json!({
                "verb": "equisat",
                "backend": backend,
                "cubic_sat": sat_cubic,
                "quadratic_sat": sat_quadratic,
                "agree": agree,
            })
        );
    } else {
        let v = |b: bool| if b { "sat" } else { "unsat" };
        println!(
            "cubic: {}  quadratic: {}  agree: {} ({})",
            v(sat_cubic),
            v(sat_quadratic),
            agree,
            backend
        );
    }
    Ok(verdict_code(agree))
}

fn cmd_stats(
    path: &Path,
    encoding: EncodingArg,
    no_init: bool,
    as_json: bool,
) -> Result<u8, CmdError> {
    let input = build_input(path, no_init)?;
    let (formula, kind_name) = encode_with(&input, encoding);
    let census = encoder::count_constraints(&formula);
    if as_json {
        println!(
            "{}",
            json!({
                "verb": "stats",
                "encoding": kind_name,
                "po": census.po,
                "rf_some": census.rf_some,
                "sw": census.sw,
                "wc": census.wc,
                "fr": census.fr,
                "wrc": census.wrc,
                "bound": census.bound,
                "predicted": {
                    "fr": census.predicted_fr,
                    "wrc": census.predicted_wrc,
                    "wc": census.predicted_wc,
                    "sw": census.predicted_sw,
                    "rf_some": census.predicted_rf_some,
                    "po": census.predicted_po,
                },
            })
        );
    } else {
        println!("encoding: {kind_name}");
        println!("po: {} (predicted {})", census.po, census.predicted_po);
        println!(
            "rf-some: {} (predicted {})",
            census.rf_some, census.predicted_rf_some
        );
        println!("sw: {} (predicted {})", census.sw, census.predicted_sw);
        println!("wc: {} (predicted {})", census.wc, census.predicted_wc);
        println!("fr: {} (predicted {})", census.fr, census.predicted_fr);
        println!("wrc: {} (predicted {})", census.wrc, census.predicted_wrc);
        println!("bound: {}", census.bound);
    }
    Ok(EXIT_HOLDS)
}

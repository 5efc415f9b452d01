mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmlang::diagnostic::has_errors;
use tmlang::render::BehaviorSource;
use tmlang::sim::check_trace;
use tmlang::{
    check_events, compare_behavior, default_seeds, derive_behavior, enumerate, parse_source, print, render, run,
    simplify, validate_model, BehaviorGraph, EnumerateOptions, Format, NodeId, Parsed, RankDir, RenderOptions,
    Scenario, Trace, View,
};

use report::{use_color, Stream};

/// Writes to stdout; a closed pipe ends the process quietly.
macro_rules! out {
    ($($arg:tt)*) => { emit(format_args!($($arg)*), false) };
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!($($arg)*), true) };
}

fn emit(args: std::fmt::Arguments<'_>, newline: bool) {
    let mut stdout = io::stdout().lock();
    let result = stdout.write_fmt(args).and_then(|()| if newline { stdout.write_all(b"\n") } else { Ok(()) });
    if let Err(e) = result {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("tm: cannot write to stdout: {e}");
        std::process::exit(2);
    }
}

/// Check, simulate and render thinging-machine models.
#[derive(Debug, Parser)]
#[command(name = "tm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, validate and check events; print diagnostics.
    Check {
        file: PathBuf,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Print the chronology of events.
    Behavior {
        file: PathBuf,
        /// Derive edges from event regions (default).
        #[arg(long, conflicts_with = "declared")]
        derive: bool,
        /// Print the behavior block declared in the file.
        #[arg(long)]
        declared: bool,
        /// Compare derived and declared behavior.
        #[arg(long, conflicts_with_all = ["derive", "declared"])]
        compare: bool,
    },
    /// Run a scenario or enumerate every branch assignment.
    Sim(SimArgs),
    /// Render a simplified view as DOT.
    Simplify {
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        level: u8,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        style: StyleArgs,
    },
    /// Render the static, events or behavior view.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ViewArg::Static)]
        view: ViewArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Dot)]
        format: FormatArg,
        /// Output file or directory (`<model>.<view>.<ext>` inside it); stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Draw the declared behavior instead of the derived one.
        #[arg(long)]
        declared: bool,
        #[command(flatten)]
        style: StyleArgs,
    },
    /// Print the canonical form of a model.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["scenario", "exhaustive"]))]
struct SimArgs {
    file: PathBuf,
    /// Scenario file with `node-id = label[, label...]` lines.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Enumerate all decision assignments.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Check each trace against the derived behavior.
    #[arg(long)]
    check: bool,
    /// Seed node; repeatable. Defaults to creates and transfers with no incoming arcs.
    #[arg(long = "seed")]
    seeds: Vec<String>,
    /// Print every step.
    #[arg(long)]
    steps: bool,
}

#[derive(Debug, Args)]
struct StyleArgs {
    /// Omit condition labels.
    #[arg(long)]
    no_conditions: bool,
    #[arg(long, value_enum, default_value_t = RankArg::LR)]
    rankdir: RankArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ViewArg {
    Static,
    Events,
    Behavior,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    Svg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[allow(clippy::upper_case_acronyms)]
enum RankArg {
    LR,
    TB,
}

/// Why a command stopped early.
enum Failure {
    /// Errors were reported (exit 1).
    Diagnostics,
    /// Bad input files or environment (exit 2).
    Io(String),
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, json } => cmd_check(&file, json),
        Command::Behavior { file, declared, compare, .. } => cmd_behavior(&file, declared, compare),
        Command::Sim(args) => cmd_sim(&args),
        Command::Simplify { file, level, output, style } => cmd_simplify(&file, level, output.as_deref(), &style),
        Command::Render { file, view, format, output, declared, style } => {
            cmd_render(&file, view, format, output.as_deref(), declared, &style)
        }
        Command::Fmt { file, write } => cmd_fmt(&file, write),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diagnostics) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("tm: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(file: &Path) -> Result<String, Failure> {
    fs::read_to_string(file).map_err(|e| Failure::Io(format!("cannot read {}: {e}", file.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn load(file: &Path) -> Result<Parsed, Failure> {
    let text = read(file)?;
    parse_source(&file.display().to_string(), &text).map_err(|errors| {
        let color = use_color(Stream::Stderr);
        for e in &errors {
            eprintln!("{}", report::parse_error_line(e, color));
        }
        Failure::Diagnostics
    })
}

/// Loads a model and refuses to go on if it breaks a structural rule.
fn load_valid(file: &Path) -> Result<Parsed, Failure> {
    let parsed = load(file)?;
    let diags = validate_model(&parsed.model);
    if has_errors(&diags) {
        let color = use_color(Stream::Stderr);
        let name = file.display().to_string();
        for d in diags.iter().filter(|d| d.is_error()) {
            eprintln!("{}", report::diagnostic_line(&name, Some(&parsed), d, color));
        }
        return Err(Failure::Diagnostics);
    }
    Ok(parsed)
}

fn cmd_check(file: &Path, json: bool) -> CmdResult {
    let name = file.display().to_string();
    let text = read(file)?;
    let parsed = match parse_source(&name, &text) {
        Ok(p) => p,
        Err(errors) => {
            if json {
                outln!("{}", report::json_parse_errors(&name, &errors));
            } else {
                let color = use_color(Stream::Stdout);
                for e in &errors {
                    outln!("{}", report::parse_error_line(e, color));
                }
            }
            return Err(Failure::Diagnostics);
        }
    };
    let mut diags = validate_model(&parsed.model);
    diags.extend(check_events(&parsed.model));
    tmlang::diagnostic::sort_diagnostics(&mut diags);
    if json {
        outln!("{}", report::json_report(&name, &diags));
    } else {
        let color = use_color(Stream::Stdout);
        for d in &diags {
            outln!("{}", report::diagnostic_line(&name, Some(&parsed), d, color));
        }
        outln!("{name}: {}", report::summary(&diags));
    }
    if has_errors(&diags) {
        Err(Failure::Diagnostics)
    } else {
        Ok(())
    }
}

fn print_edges(graph: &BehaviorGraph) {
    for e in &graph.edges {
        match &e.condition {
            Some(c) => outln!("{} -> {} [{c}]", e.from, e.to),
            None => outln!("{} -> {}", e.from, e.to),
        }
    }
}

fn cmd_behavior(file: &Path, declared: bool, compare: bool) -> CmdResult {
    let parsed = load_valid(file)?;
    let model = &parsed.model;
    let name = file.display().to_string();
    if compare {
        let Some(decl) = model.declared_behavior() else {
            eprintln!("{name}: no behavior block to compare against");
            return Err(Failure::Diagnostics);
        };
        let diags = compare_behavior(&derive_behavior(model), decl);
        let color = use_color(Stream::Stdout);
        for d in &diags {
            outln!("{}", report::diagnostic_line(&name, Some(&parsed), d, color));
        }
        outln!("{name}: {}", report::summary(&diags));
        return if has_errors(&diags) { Err(Failure::Diagnostics) } else { Ok(()) };
    }
    if declared {
        let Some(decl) = model.declared_behavior() else {
            eprintln!("{name}: no behavior block declared");
            return Err(Failure::Diagnostics);
        };
        print_edges(decl);
    } else {
        print_edges(&derive_behavior(model));
    }
    Ok(())
}

fn terminal_word(t: &Trace) -> &'static str {
    match t.terminal {
        tmlang::Terminal::Completed => "completed",
        tmlang::Terminal::DeadEnd => "dead-end",
        tmlang::Terminal::StepLimit => "step-limit",
    }
}

fn print_trace(t: &Trace, steps: bool) {
    let decisions: Vec<String> = t.decisions_taken.iter().map(|(n, l)| format!("{n}={l}")).collect();
    outln!("  terminal: {}", terminal_word(t));
    outln!("  decisions: {}", if decisions.is_empty() { "-".into() } else { decisions.join(" ") });
    outln!("  events: {}", if t.fired_events.is_empty() { "-".into() } else { t.fired_events.join(" ") });
    outln!("  steps: {}", t.steps.len());
    if steps {
        for s in &t.steps {
            outln!("    {:>4} {} (token {})", s.index, s.node, s.token);
        }
    }
}

fn cmd_sim(args: &SimArgs) -> CmdResult {
    let parsed = load_valid(&args.file)?;
    let model = &parsed.model;
    let seeds: Vec<NodeId> = if args.seeds.is_empty() {
        default_seeds(model)
    } else {
        args.seeds.iter().map(|s| NodeId::from(s.as_str())).collect()
    };
    let traces: Vec<Trace> = if let Some(path) = &args.scenario {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut scenario =
            Scenario::parse(&stem, &read(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        scenario.max_steps = args.max_steps;
        vec![run(model, &scenario, &seeds).map_err(|e| Failure::Io(e.to_string()))?]
    } else {
        let opts = EnumerateOptions { max_steps: args.max_steps, ..EnumerateOptions::default() };
        enumerate(model, &seeds, &opts).map_err(|e| Failure::Io(e.to_string()))?
    };

    let behavior = args.check.then(|| derive_behavior(model));
    let color = use_color(Stream::Stdout);
    let name = args.file.display().to_string();
    let mut conformant = 0;
    outln!("{} trace(s)", traces.len());
    for (i, t) in traces.iter().enumerate() {
        outln!("trace {}:", i + 1);
        print_trace(t, args.steps);
        if let Some(g) = &behavior {
            let diags = check_trace(t, g);
            if diags.is_empty() {
                conformant += 1;
                outln!("  conformant");
            }
            for d in &diags {
                outln!("  {}", report::diagnostic_line(&name, None, d, color));
            }
        }
    }
    if args.check {
        outln!("{conformant} of {} trace(s) conformant", traces.len());
        if conformant < traces.len() {
            return Err(Failure::Diagnostics);
        }
    }
    Ok(())
}

fn style_options(view: View, style: &StyleArgs) -> RenderOptions {
    RenderOptions {
        show_conditions: !style.no_conditions,
        rankdir: match style.rankdir {
            RankArg::LR => RankDir::LR,
            RankArg::TB => RankDir::TB,
        },
        ..RenderOptions::view(view)
    }
}

fn cmd_simplify(file: &Path, level: u8, output: Option<&Path>, style: &StyleArgs) -> CmdResult {
    let parsed = load_valid(file)?;
    let view = simplify(&parsed.model, level).map_err(|e| Failure::Io(e.to_string()))?;
    let color = use_color(Stream::Stderr);
    let name = file.display().to_string();
    for w in &view.warnings {
        eprintln!("{}", report::diagnostic_line(&name, Some(&parsed), w, color));
    }
    let dot = tmlang::render::view_dot(parsed.model.name(), &view, &style_options(View::Simplified(level), style));
    write_out(output, &dot)
}

fn cmd_render(
    file: &Path,
    view: ViewArg,
    format: FormatArg,
    output: Option<&Path>,
    declared: bool,
    style: &StyleArgs,
) -> CmdResult {
    let parsed = load_valid(file)?;
    let model = &parsed.model;
    let (view, view_name) = match view {
        ViewArg::Static => (View::Static, "static"),
        ViewArg::Events => (View::Events, "events"),
        ViewArg::Behavior => (View::Behavior, "behavior"),
    };
    let (format, ext) = match format {
        FormatArg::Dot => (Format::Dot, "dot"),
        FormatArg::Svg => (Format::Svg, "svg"),
    };
    let mut opts = style_options(view, style);
    opts.format = format;
    if declared {
        opts.behavior = BehaviorSource::Declared;
    }
    if view == View::Events {
        let diags = check_events(model);
        if has_errors(&diags) {
            let color = use_color(Stream::Stderr);
            let name = file.display().to_string();
            for d in diags.iter().filter(|d| d.is_error()) {
                eprintln!("{}", report::diagnostic_line(&name, Some(&parsed), d, color));
            }
            return Err(Failure::Diagnostics);
        }
    }
    let text = render(model, &opts).map_err(|e| match e {
        tmlang::RenderError::Graphviz(_) => Failure::Io(e.to_string()),
        other => {
            eprintln!("tm: {other}");
            Failure::Diagnostics
        }
    })?;
    let target =
        output.map(
            |p| {
                if p.is_dir() {
                    p.join(format!("{}.{view_name}.{ext}", model.name()))
                } else {
                    p.to_path_buf()
                }
            },
        );
    write_out(target.as_deref(), &text)
}

fn cmd_fmt(file: &Path, write: bool) -> CmdResult {
    let parsed = load(file)?;
    let text = print(&parsed.model);
    if write {
        write_out(Some(file), &text)
    } else {
        write_out(None, &text)
    }
}

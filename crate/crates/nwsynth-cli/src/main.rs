//! Command-line driver: synthesis, model checking, simulation, formula
//! translation and evaluation, file validation.
//!
//! Exit codes are part of the contract: `synth` exits 0 when realizable,
//! 3 when definitively unrealizable, 4 when unknown up to the searched
//! rank; `check` exits 0 when no computation matches the automaton and 2
//! when a counterexample exists; every command exits 1 on bad inputs.
//! All outputs are deterministic for identical inputs.

use clap::{Args, Parser, Subcommand};
use nwsynth::nested_word::{Alphabet, Sym, TraceFile};
use nwsynth::nwba::{check_automaton, translate_nwtl, Nwba, NwbaAlphabet};
use nwsynth::nwtl::{eval, parse, Formula};
use nwsynth::oracle::{model_check, CheckOutcome};
use nwsynth::rlc::{
    simulate, validate_composition, validate_library, Composition, Library,
};
use nwsynth::solver::{outcome_to_json, synthesize, SpecSource, SynthesisOutcome};
use nwsynth::summary_graph::build_graph;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nwsynth", version, about = "Synthesis of recursive component compositions against nested-word temporal logic specifications")]
struct Cli {
    /// Reserved for randomized features; all current outputs are
    /// deterministic regardless of the seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide realizability and extract a composition.
    Synth(SynthArgs),
    /// Model-check a composition against a specification.
    Check(CheckArgs),
    /// Run a composition on an input word and print the trace.
    Simulate(SimulateArgs),
    /// Translate a formula into a nested-word Büchi automaton file.
    Translate(TranslateArgs),
    /// Evaluate a formula at the first position of a trace.
    Eval(EvalArgs),
    /// Validate a model file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Library file (JSON).
    lib: PathBuf,
    /// Specification: a formula file, or an automaton file (JSON) for
    /// the computations that must not occur.
    spec: PathBuf,
    /// Where to write the outcome file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    max_rank: u32,
    /// Print each component's configuration graph.
    #[arg(long)]
    dump_graph: bool,
    /// Print a summary of the tree automaton.
    #[arg(long)]
    dump_abt: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Composition file (JSON).
    comp: PathBuf,
    /// Specification: formula file or automaton file as in `synth`.
    spec: PathBuf,
    #[arg(long)]
    lib: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    comp: PathBuf,
    #[arg(long)]
    lib: PathBuf,
    /// Input word: one character per symbol, or comma-separated names.
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct TranslateArgs {
    /// Formula file.
    spec: PathBuf,
    /// Input alphabet (comma-separated); defaults to the symbols used in
    /// the formula, or "a" when none occur.
    #[arg(long)]
    inputs: Option<String>,
    /// Output alphabet; defaults like --inputs, with fallback "x".
    #[arg(long)]
    outputs: Option<String>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    trace: PathBuf,
    spec: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(subcommand)]
    kind: ValidateKind,
}

#[derive(Subcommand)]
enum ValidateKind {
    /// Validate a library file.
    Lib { path: PathBuf },
    /// Validate a composition file against a library.
    Comp {
        path: PathBuf,
        #[arg(long)]
        lib: PathBuf,
    },
    /// Validate an automaton file.
    Nwba { path: PathBuf },
    /// Validate a trace file.
    Trace { path: PathBuf },
}

struct Failure {
    code: u8,
    message: Option<String>,
}

impl Failure {
    fn error(msg: impl Into<String>) -> Failure {
        Failure { code: 1, message: Some(msg.into()) }
    }

    fn code(code: u8) -> Failure {
        Failure { code, message: None }
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure::error(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = f.message {
                eprintln!("error: {}", msg);
            }
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))
}

fn load_library(path: &Path) -> Result<Library, Failure> {
    let text = read(path)?;
    Library::from_json(&text).map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))
}

/// Scans a formula text for symbol names so parsing can extend the
/// alphabet with atoms that do not occur elsewhere.
fn scan_symbols(text: &str) -> (Vec<String>, Vec<String>) {
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &text[i..];
        for (prefix, sink) in [("in:", &mut inputs), ("out:", &mut outputs)] {
            if rest.starts_with(prefix) {
                let start = i + prefix.len();
                let mut end = start;
                while end < bytes.len()
                    && ((bytes[end] as char).is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let name = text[start..end].to_string();
                if !name.is_empty() && !sink.contains(&name) {
                    sink.push(name);
                }
            }
        }
        i += 1;
    }
    (inputs, outputs)
}

/// A specification file is an automaton when it parses as JSON,
/// otherwise formula text.
enum Spec {
    Formula(Formula),
    Automaton(Nwba),
}

/// Loads a specification against a library alphabet; automaton symbol
/// names are remapped onto the library's.
fn load_spec(path: &Path, alphabet: &Alphabet) -> Result<Spec, Failure> {
    let text = read(path)?;
    if serde_json::from_str::<serde_json::Value>(&text).is_ok() {
        let (aut, names) = Nwba::from_json(&text)
            .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?;
        let aut = remap_automaton(aut, &names, alphabet)
            .map_err(|e| Failure::error(format!("{}: {}", path.display(), e.message.unwrap_or_default())))?;
        Ok(Spec::Automaton(aut))
    } else {
        let phi = parse(text.trim(), alphabet)
            .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?;
        Ok(Spec::Formula(phi))
    }
}

/// Rewrites an automaton's letters from its own symbol tables onto the
/// target alphabet.
fn remap_automaton(
    aut: Nwba,
    names: &NwbaAlphabet,
    alphabet: &Alphabet,
) -> Result<Nwba, Failure> {
    let map_in = |s: Sym| -> Result<Sym, Failure> {
        alphabet
            .input_id(&names.inputs[s.0 as usize])
            .ok_or_else(|| Failure::error(format!("unknown input symbol '{}'", names.inputs[s.0 as usize])))
    };
    let map_out = |s: Sym| -> Result<Sym, Failure> {
        alphabet
            .output_id(&names.outputs[s.0 as usize])
            .ok_or_else(|| Failure::error(format!("unknown output symbol '{}'", names.outputs[s.0 as usize])))
    };
    let map_letter = |l: nwsynth::nested_word::Letter| -> Result<nwsynth::nested_word::Letter, Failure> {
        Ok(nwsynth::nested_word::Letter::new(map_in(l.input)?, map_out(l.output)?))
    };
    let mut out = aut;
    for l in &mut out.alphabet {
        *l = map_letter(*l)?;
    }
    for t in &mut out.delta_call {
        t.1 = map_letter(t.1)?;
    }
    for t in &mut out.delta_int {
        t.1 = map_letter(t.1)?;
    }
    for t in &mut out.delta_ret {
        t.2 = map_letter(t.2)?;
    }
    Ok(out)
}

fn parse_input_word(input: &str, alphabet: &Alphabet) -> Result<Vec<Sym>, Failure> {
    let names: Vec<String> = if input.contains(',') {
        input.split(',').map(|s| s.trim().to_string()).collect()
    } else {
        input.chars().map(|c| c.to_string()).collect()
    };
    names
        .iter()
        .filter(|n| !n.is_empty())
        .map(|n| {
            alphabet
                .input_id(n)
                .ok_or_else(|| Failure::error(format!("unknown input symbol '{}'", n)))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Check(args) => cmd_check(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Translate(args) => cmd_translate(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let lib = load_library(&args.lib)?;
    let spec = load_spec(&args.spec, &lib.alphabet)?;
    if args.dump_graph || args.dump_abt {
        let bad = match &spec {
            Spec::Formula(phi) => translate_nwtl(&phi.negate(), &lib.alphabet),
            Spec::Automaton(a) => a.clone(),
        };
        if args.dump_graph {
            for c in &lib.components {
                let g = build_graph(c, &bad, lib.alphabet.inputs.len());
                print!("{}", g.dump(&c.name));
            }
        }
        if args.dump_abt {
            let abt = nwsynth::abt::build_abt(&lib, &bad);
            print!("{}", abt.dump());
        }
    }
    let source = match spec {
        Spec::Formula(phi) => SpecSource::Formula(phi),
        Spec::Automaton(a) => SpecSource::BadAutomaton(a),
    };
    let outcome = synthesize(&lib, source, args.max_rank)
        .map_err(|e| Failure::error(e.to_string()))?;
    let json = outcome_to_json(&outcome, &lib);
    match &args.out {
        Some(path) => std::fs::write(path, &json)
            .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?,
        None => println!("{}", json),
    }
    match outcome {
        SynthesisOutcome::Realizable { .. } => Ok(()),
        SynthesisOutcome::Unrealizable { .. } => Err(Failure::code(3)),
        SynthesisOutcome::UnrealizableUpToRank { .. } => Err(Failure::code(4)),
    }
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    let lib = load_library(&args.lib)?;
    let comp_text = read(&args.comp)?;
    let comp = Composition::from_json(&comp_text, &lib)
        .map_err(|e| Failure::error(format!("{}: {}", args.comp.display(), e)))?;
    let bad = match load_spec(&args.spec, &lib.alphabet)? {
        Spec::Formula(phi) => translate_nwtl(&phi.negate(), &lib.alphabet),
        Spec::Automaton(a) => a,
    };
    match model_check(&comp, &lib, &bad) {
        CheckOutcome::Empty => {
            println!("verified: no computation matches the automaton");
            Ok(())
        }
        CheckOutcome::Counterexample { kind, sketch, input } => {
            println!("counterexample ({:?}): {}", kind, sketch);
            if let Some(input) = input {
                let names: Vec<&str> =
                    input.iter().map(|s| lib.alphabet.input_name(*s)).collect();
                println!("input: {}", names.join(","));
            }
            Err(Failure::code(2))
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let lib = load_library(&args.lib)?;
    let comp_text = read(&args.comp)?;
    let comp = Composition::from_json(&comp_text, &lib)
        .map_err(|e| Failure::error(format!("{}: {}", args.comp.display(), e)))?;
    let input = parse_input_word(&args.input, &lib.alphabet)?;
    let (word, terminated) = simulate(&comp, &lib, &input);
    let trace = TraceFile::from_word(&word, &lib.alphabet);
    println!("{}", serde_json::to_string_pretty(&trace).expect("serializable"));
    if terminated {
        eprintln!("note: the computation terminated (root returned)");
    }
    Ok(())
}

fn cmd_translate(args: TranslateArgs) -> Result<(), Failure> {
    let text = read(&args.spec)?;
    let (mut inputs, mut outputs) = scan_symbols(&text);
    if let Some(list) = &args.inputs {
        inputs = list.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(list) = &args.outputs {
        outputs = list.split(',').map(|s| s.trim().to_string()).collect();
    }
    if inputs.is_empty() {
        inputs.push("a".into());
    }
    if outputs.is_empty() {
        outputs.push("x".into());
    }
    let alphabet = Alphabet { inputs: inputs.clone(), outputs: outputs.clone() };
    let phi = parse(text.trim(), &alphabet)
        .map_err(|e| Failure::error(format!("{}: {}", args.spec.display(), e)))?;
    let aut = translate_nwtl(&phi, &alphabet);
    let json = aut.to_json(&NwbaAlphabet { inputs, outputs });
    match &args.out {
        Some(path) => std::fs::write(path, &json)
            .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?,
        None => println!("{}", json),
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let trace_text = read(&args.trace)?;
    let trace: TraceFile = serde_json::from_str(&trace_text)
        .map_err(|e| Failure::error(format!("{}: {}", args.trace.display(), e)))?;
    let mut alphabet = trace.infer_alphabet();
    let spec_text = read(&args.spec)?;
    let (ins, outs) = scan_symbols(&spec_text);
    for name in ins {
        if alphabet.input_id(&name).is_none() {
            alphabet.inputs.push(name);
        }
    }
    for name in outs {
        if alphabet.output_id(&name).is_none() {
            alphabet.outputs.push(name);
        }
    }
    let word = trace
        .to_word(&alphabet)
        .map_err(|e| Failure::error(format!("{}: {}", args.trace.display(), e)))?;
    if word.is_empty() {
        return Err(Failure::error("trace is empty: no position to evaluate at"));
    }
    let phi = parse(spec_text.trim(), &alphabet)
        .map_err(|e| Failure::error(format!("{}: {}", args.spec.display(), e)))?;
    let value = eval(&word, 1, &phi).map_err(|e| Failure::error(e.to_string()))?;
    println!("{}", value);
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    match args.kind {
        ValidateKind::Lib { path } => {
            let lib = load_library(&path)?;
            let defects = validate_library(&lib);
            report_defects(&defects.iter().map(|d| d.0.clone()).collect::<Vec<_>>(), &[])
        }
        ValidateKind::Comp { path, lib } => {
            let lib = load_library(&lib)?;
            let text = read(&path)?;
            let comp = Composition::from_json(&text, &lib)
                .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?;
            let defects = validate_composition(&comp, &lib);
            report_defects(&defects.iter().map(|d| d.0.clone()).collect::<Vec<_>>(), &[])
        }
        ValidateKind::Nwba { path } => {
            let text = read(&path)?;
            let (aut, _) = Nwba::from_json(&text)
                .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?;
            let check = check_automaton(&aut);
            report_defects(&check.defects, &check.warnings)
        }
        ValidateKind::Trace { path } => {
            let text = read(&path)?;
            let trace: TraceFile = serde_json::from_str(&text)
                .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?;
            let alphabet = trace.infer_alphabet();
            trace
                .to_word(&alphabet)
                .map_err(|e| Failure::error(format!("{}: {}", path.display(), e)))?;
            println!("valid");
            Ok(())
        }
    }
}

fn report_defects(defects: &[String], warnings: &[String]) -> Result<(), Failure> {
    for w in warnings {
        println!("warning: {}", w);
    }
    if defects.is_empty() {
        println!("valid");
        Ok(())
    } else {
        for d in defects {
            eprintln!("defect: {}", d);
        }
        Err(Failure::code(1))
    }
}

//! `dendrodyn`: load a tree map from a file, run an analysis, print a report.

mod render;
mod suite;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dendrodyn::dynamics::{classify_recurrence, decide_pointwise_recurrent, periodic_structure, RecurrenceClass};
use dendrodyn::fixtures::{random_points, Fixture};
use dendrodyn::io;
use dendrodyn::odometer::{classify_adding_machine, detect_cycles_of_sets, select_tower, verify_semiconjugacy};
use dendrodyn::tree::TreePoint;
use dendrodyn::{Error, Map, Point, Scalar, Q};
use serde_json::{json, Value};

const SEED_VAR: &str = "DENDRODYN_SEED";
const RANDOM_SAMPLES: usize = 8;

#[derive(Parser)]
#[command(name = "dendrodyn", version, about = "Dynamics of piecewise-linear self-maps of finite metric trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Longest orbit period searched for.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_period: u64,

    /// Iteration horizon for orbit-level checks.
    #[arg(long, global = true, default_value_t = 1_000, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: u64,

    /// Number of periodic levels (D_n) to compute.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,

    /// Cap on the number of linear pieces produced by composition.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    piece_cap: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report (or fixture file) here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic structure and a recurrence table for vertices and edge midpoints.
    Analyze { input: PathBuf },
    /// Decide whether the map is pointwise-recurrent.
    Recurrence { input: PathBuf },
    /// Nested cycles of sets, addresses, and the semiconjugacy check.
    Odometer {
        input: PathBuf,
        /// Tower root: a vertex name or `edge:t`.
        #[arg(long)]
        root: Option<String>,
    },
    /// Order, class, and recurrence of one point (a vertex name or `edge:t`).
    Classify { input: PathBuf, point: String },
    /// Write a fixture instance to the file format.
    Fixture {
        #[command(subcommand)]
        kind: FixtureKind,
    },
    /// Run the lemma-property suite.
    Verify { input: PathBuf },
}

#[derive(Subcommand)]
enum FixtureKind {
    /// Star dendrite with the identity map.
    Star {
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Star whose fixed set misses the centre but comes within 1/(2k) of it.
    Arconbad {
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Star whose stem oscillates over the arms, so f² jumps near the stem end.
    Arconbad1 {
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// x ↦ 1 − x on [0, 1].
    Interval,
    /// Star rotated by one arm; arm lengths are equal.
    Rotation {
        #[arg(long, default_value_t = 3)]
        arms: usize,
        #[arg(long, default_value = "1")]
        arm_length: String,
    },
    /// Tree carrying an adding machine with the given periods.
    Tower {
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        periods: Vec<u64>,
    },
    /// x ↦ (x + 1)/2 on [0, 1].
    Shift,
    /// x ↦ 1 − |2x − 1| on [0, 1].
    Tent,
    /// Seeds default to DENDRODYN_SEED and DENDRODYN_SEED + 1.
    RandomFiniteOrder {
        #[arg(long)]
        tree_seed: Option<u64>,
        #[arg(long)]
        order_seed: Option<u64>,
    },
    /// The seed defaults to DENDRODYN_SEED.
    RandomFolding {
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Analysis bounds shared by every command.
pub struct Bounds {
    pub max_period: u64,
    pub horizon: u64,
    pub depth: usize,
    pub piece_cap: usize,
}

enum Exit {
    Success = 0,
    Negative = 1,
    Inconclusive = 2,
    Input = 3,
}

struct Failure {
    exit: Exit,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::Parse(_) | Error::Structural(_) | Error::Precondition(_) | Error::Domain(_) => Exit::Input,
            Error::Invariant(_) | Error::Resource { .. } | Error::Inconclusive(_) => Exit::Inconclusive,
        };
        Failure { exit, message: e.to_string() }
    }
}

/// A finished command: the report (or file body) and its exit status.
struct Outcome {
    body: Body,
    exit: Exit,
}

enum Body {
    Report(Value),
    File(String),
}

fn seed_from_env() -> Result<u64, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure { exit: Exit::Input, message: format!("{SEED_VAR} must be a non-negative integer") }),
        Err(_) => Ok(0),
    }
}

fn load(path: &Path) -> Result<Map, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure { exit: Exit::Input, message: format!("cannot read {}: {e}", path.display()) })?;
    io::parse_map(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f.exit = Exit::Input;
        f
    })
}

fn recurrence_class_json(c: &RecurrenceClass<Q>, f: &Map) -> Value {
    match c {
        RecurrenceClass::Periodic(p) => json!({"class": "periodic", "period": p}),
        RecurrenceClass::Escaping(trap) => json!({"class": "escaping", "trap": io::subtree_json(f.tree(), trap)}),
        RecurrenceClass::Undetermined => json!({"class": "undetermined"}),
    }
}

fn point_row(f: &Map, x: &Point, horizon: u64) -> Result<Value, Failure> {
    let tree = f.tree();
    let (order, class) = tree.order_of(x)?;
    Ok(json!({
        "point": io::point_json(tree, x),
        "order": order,
        "class": class,
        "image": io::point_json(tree, &f.evaluate(x)),
        "recurrence": recurrence_class_json(&classify_recurrence(f, x, horizon), f),
    }))
}

fn recurrence(f: &Map, b: &Bounds) -> Result<Outcome, Failure> {
    let verdict = decide_pointwise_recurrent(f, b.max_period, b.piece_cap)?;
    let exit = if verdict.pointwise_recurrent { Exit::Success } else { Exit::Negative };
    Ok(Outcome { body: Body::Report(io::verdict_json(f, &verdict)), exit })
}

fn analyze(f: &Map, b: &Bounds) -> Result<Outcome, Failure> {
    let tree = f.tree();
    let structure = periodic_structure(f, b.depth as u64, b.max_period, b.piece_cap)?;
    let mut points: Vec<Point> = tree.vertices().map(TreePoint::Vertex).collect();
    points.extend(tree.edge_ids().map(|e| tree.midpoint(e)));
    let table = points.iter().map(|x| point_row(f, x, b.horizon)).collect::<Result<Vec<_>, _>>()?;
    let report = json!({
        "vertices": tree.vertex_count(),
        "edges": tree.edge_count(),
        "pieces": f.piece_count(),
        "injective": f.is_injective(),
        "surjective": f.is_surjective(),
        "periodic_structure": io::structure_json(f, &structure),
        "points": table,
    });
    Ok(Outcome { body: Body::Report(report), exit: Exit::Success })
}

fn odometer(f: &Map, root: Option<&str>, b: &Bounds) -> Result<Outcome, Failure> {
    let tree = f.tree();
    let root = root.map(|r| io::parse_point_text::<Q>(tree, r)).transpose()?;
    let levels = detect_cycles_of_sets(f, b.depth, b.max_period, b.piece_cap)?;
    let cycles = io::cycle_levels_json(f, &levels);
    if levels.is_empty() {
        let report = json!({"levels": cycles, "tower": null, "semiconjugacy": null, "classification": null});
        return Ok(Outcome { body: Body::Report(report), exit: Exit::Success });
    }
    let tower = select_tower(&levels, root.as_ref())?;
    let semi = verify_semiconjugacy(f, &tower, &[]);
    let class = classify_adding_machine(&tower);
    let exit = if semi.passed() { Exit::Success } else { Exit::Negative };
    let report = json!({
        "levels": cycles,
        "tower": io::tower_json(f, &tower),
        "semiconjugacy": io::semiconjugacy_json(f, &semi),
        "classification": io::adding_machine_json(&class),
    });
    Ok(Outcome { body: Body::Report(report), exit })
}

fn classify(f: &Map, point: &str, b: &Bounds) -> Result<Outcome, Failure> {
    let x = io::parse_point_text::<Q>(f.tree(), point)?;
    Ok(Outcome { body: Body::Report(point_row(f, &x, b.horizon)?), exit: Exit::Success })
}

fn verify(f: &Map, b: &Bounds) -> Result<Outcome, Failure> {
    let tree = f.tree();
    let verdict = decide_pointwise_recurrent(f, b.max_period, b.piece_cap);
    let (verdict_json, identity_power) = match &verdict {
        Ok(v) => (io::verdict_json(f, v), v.identity_power),
        Err(e) => (json!({"inconclusive": e.to_string()}), None),
    };
    let seed = seed_from_env()?;
    let mut samples = tree.grid_points(3);
    samples.extend(random_points(tree, RANDOM_SAMPLES, seed));
    let results = suite::run(f, &samples, identity_power, b)?;
    let failed = results.iter().any(|r| r.status == suite::Status::Fail);
    let report = json!({
        "verdict": verdict_json,
        "samples": samples.len(),
        "seed": seed,
        "lemmas": results.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    Ok(Outcome { body: Body::Report(report), exit: if failed { Exit::Negative } else { Exit::Success } })
}

fn fixture(kind: &FixtureKind) -> Result<Outcome, Failure> {
    let seed = seed_from_env()?;
    let chosen = match kind {
        FixtureKind::Star { k } => Fixture::Star { k: *k },
        FixtureKind::Arconbad { k } => Fixture::Arconbad { k: *k },
        FixtureKind::Arconbad1 { k } => Fixture::Arconbad1 { k: *k },
        FixtureKind::Interval => Fixture::Interval,
        FixtureKind::Rotation { arms, arm_length } => {
            Fixture::Rotation { arms: *arms, arm_length: Q::parse_text(arm_length)? }
        }
        FixtureKind::Tower { periods } => Fixture::Tower { periods: periods.clone() },
        FixtureKind::Shift => Fixture::Shift,
        FixtureKind::Tent => Fixture::Tent,
        FixtureKind::RandomFiniteOrder { tree_seed, order_seed } => Fixture::RandomFiniteOrder {
            tree_seed: tree_seed.unwrap_or(seed),
            order_seed: order_seed.unwrap_or(seed.wrapping_add(1)),
        },
        FixtureKind::RandomFolding { seed: s } => Fixture::RandomFolding { seed: s.unwrap_or(seed) },
    };
    Ok(Outcome { body: Body::File(io::write_map(&chosen.build()?)), exit: Exit::Success })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let bounds = Bounds {
        max_period: cli.max_period,
        horizon: cli.horizon,
        depth: cli.depth as usize,
        piece_cap: cli.piece_cap as usize,
    };
    match &cli.command {
        Command::Analyze { input } => analyze(&load(input)?, &bounds),
        Command::Recurrence { input } => recurrence(&load(input)?, &bounds),
        Command::Odometer { input, root } => odometer(&load(input)?, root.as_deref(), &bounds),
        Command::Classify { input, point } => classify(&load(input)?, point, &bounds),
        Command::Verify { input } => verify(&load(input)?, &bounds),
        Command::Fixture { kind } => fixture(kind),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure { exit: Exit::Input, message: format!("cannot write {}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_report(cli: &Cli, report: &Value) -> String {
    match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => render::render(report),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Input as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|outcome| {
        let text = match &outcome.body {
            Body::Report(r) => format_report(&cli, r),
            Body::File(f) => f.clone(),
        };
        emit(&cli, &text)?;
        Ok(outcome.exit)
    });
    match result {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit as u8)
        }
    }
}

mod render;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use genus_core::checks;
use genus_core::oracle::genus_formula_details;
use genus_core::{
    build_matrix_caserule, build_matrix_hilbert, genus_number, search, Error, PlaceSets, ProblemInstance, SearchSpec,
};
use rayon::prelude::*;
use serde_json::{json, Value};

const MAX_TABLE_ROWS: i64 = 1_000_000;

#[derive(Parser)]
#[command(name = "genus", version, about = "S-T genus numbers of quadratic fields Q(sqrt d)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Genus matrix and genus numbers of Q(sqrt d)
    #[command(allow_negative_numbers = true)]
    Genus(InstanceArgs),
    /// Compare the symbol matrix with the local norm computation
    #[command(allow_negative_numbers = true)]
    Crosscheck(InstanceArgs),
    /// Find d with m ramified primes, split at S, and g = 2^k
    Search(SearchArgs),
    /// Genus data for every valid d in a range, as CSV
    #[command(allow_negative_numbers = true)]
    Table(TableArgs),
    /// Run the invariant suites
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct PlaceArgs {
    /// Finite primes of S, comma separated
    #[arg(long, value_delimiter = ',')]
    s0: Vec<u64>,
    /// Put the real place in S
    #[arg(long)]
    sinf: bool,
    /// Odd primes of T, comma separated
    #[arg(long, value_delimiter = ',')]
    t: Vec<u64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Print the versioned JSON envelope
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Print the labelled matrix and summary (default)
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct InstanceArgs {
    /// Squarefree integer, not 0 or 1
    d: i64,
    #[command(flatten)]
    places: PlaceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_delimiter = ',')]
    s0: Vec<u64>,
    /// Number of ramified primes
    #[arg(short)]
    m: usize,
    /// Target exponent of the genus number
    #[arg(short)]
    k: usize,
    /// Largest prime scanned
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    dmin: i64,
    #[arg(long)]
    dmax: i64,
    #[command(flatten)]
    places: PlaceArgs,
    /// Output file; standard output when absent
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = checks::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Lib(Error),
    Mismatch(String),
    Io(String),
    Suites,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Failure {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(Error::BudgetExhausted { .. }) => 3,
            Failure::Lib(e) if e.is_input_error() => 2,
            Failure::Io(_) => 4,
            Failure::Lib(_) | Failure::Mismatch(_) | Failure::Suites => 1,
        }
    }
}

fn place_sets(p: &PlaceArgs) -> Result<PlaceSets, Failure> {
    Ok(PlaceSets::new(p.s0.clone(), p.sinf, p.t.clone())?)
}

fn instance_input(d: i64, places: &PlaceSets) -> Value {
    let mut v = render::places_json(places);
    v["d"] = json!(d);
    v
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn cmd_genus(args: &InstanceArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let places = place_sets(&args.places)?;
    let inst = ProblemInstance::new(args.d, places.clone())?;
    let report = genus_number(&inst)?;
    if args.output.json {
        let result = serde_json::to_value(&report).expect("report serializes");
        let ms = start.elapsed().as_millis();
        emit(&render::envelope("genus", instance_input(args.d, &places), result, ms))
    } else {
        emit(&render::genus_text(&places, &report))
    }
}

fn cmd_crosscheck(args: &InstanceArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let places = place_sets(&args.places)?;
    let inst = ProblemInstance::new(args.d, places.clone())?;
    let report = genus_number(&inst)?;
    let formula = genus_formula_details(&inst)?;
    let caserule = build_matrix_caserule(&inst)?;
    let symbols = build_matrix_hilbert(&inst)?;

    let mut mismatch = None;
    'outer: for r in 0..caserule.nrows() {
        for c in 0..caserule.ncols() {
            if caserule.get(r, c) != symbols.get(r, c) {
                mismatch = Some(format!(
                    "entry ({}, {}): case rule {} vs Hilbert symbol {}",
                    caserule.row_labels()[r],
                    caserule.col_labels()[c],
                    caserule.get(r, c),
                    symbols.get(r, c)
                ));
                break 'outer;
            }
        }
    }
    if mismatch.is_none() && caserule != symbols {
        mismatch = Some("matrix shapes or labels differ".into());
    }
    if mismatch.is_none() && report.g != formula.g {
        mismatch = Some(format!("g from matrix {} vs g from formula {}", report.g, formula.g));
    }

    if args.output.json {
        let result = json!({
            "match": mismatch.is_none(),
            "mismatch": mismatch,
            "g": report.g,
            "gFormula": formula.g,
            "formula": formula,
            "caseRuleMatrix": caserule,
            "hilbertMatrix": symbols,
        });
        let ms = start.elapsed().as_millis();
        emit(&render::envelope("crosscheck", instance_input(args.d, &places), result, ms))?;
    } else {
        let mut text = render::genus_text(&places, &report);
        text.push_str(&format!(
            "formula: #S^ns = {}, #ramified = {}, log2 norm index = {}, g = {}\n",
            formula.non_split_s, formula.sigma, formula.norm_index_log2, formula.g
        ));
        match &mismatch {
            None => text.push_str(&format!("match: g = {}\n", report.g)),
            Some(m) => text.push_str(&format!("MISMATCH: {m}\n")),
        }
        emit(&text)?;
    }
    match mismatch {
        None => Ok(()),
        Some(m) => Err(Failure::Mismatch(m)),
    }
}

fn cmd_search(args: &SearchArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let places = PlaceSets::new(args.s0.clone(), true, vec![])?;
    let spec = SearchSpec::new(places.clone(), args.m, args.k, args.budget)?;
    let result = search(&spec)?;
    if args.output.json {
        let mut input = render::places_json(&places);
        input["m"] = json!(args.m);
        input["k"] = json!(args.k);
        input["budget"] = json!(args.budget);
        let value = serde_json::to_value(&result).expect("result serializes");
        emit(&render::envelope("search", input, value, start.elapsed().as_millis()))
    } else {
        emit(&render::search_text(&result))
    }
}

fn cmd_table(args: &TableArgs) -> Result<(), Failure> {
    let places = place_sets(&args.places)?;
    let count = (args.dmax as i128 - args.dmin as i128 + 1).max(0);
    if count > MAX_TABLE_ROWS as i128 {
        return Err(Error::InvalidRange(format!("{count} values of d exceed the limit of {MAX_TABLE_ROWS}")).into());
    }
    let ds: Vec<i64> = if count == 0 { vec![] } else { (args.dmin..=args.dmax).collect() };
    let rows = ds
        .par_iter()
        .filter_map(|&d| {
            let inst = ProblemInstance::new(d, places.clone()).ok()?;
            Some(genus_number(&inst).map(|r| {
                let sigma: Vec<String> = r.sigma.iter().map(u64::to_string).collect();
                [
                    d.to_string(),
                    sigma.join(" "),
                    r.matrix.ncols().to_string(),
                    r.rank.to_string(),
                    r.log2_g.to_string(),
                    r.g.to_string(),
                    r.g_star.to_string(),
                ]
            }))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let sink: Box<dyn Write> = match &args.csv {
        Some(path) => {
            Box::new(std::fs::File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["d", "sigma", "ncols", "rank", "log2_g", "g", "g_star"])?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_selftest(args: &SelftestArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let suites = checks::run_all(args.seed);
    let ok = suites.iter().all(|s| s.passed());
    if args.json {
        let result = json!({
            "passed": ok,
            "suites": suites.iter().map(render::suite_json).collect::<Vec<_>>(),
        });
        emit(&render::envelope("selftest", json!({ "seed": args.seed }), result, start.elapsed().as_millis()))?;
    } else {
        let mut text: String = suites.iter().map(|s| s.summary_line() + "\n").collect();
        let passed = suites.iter().filter(|s| s.passed()).count();
        text.push_str(&format!("{passed}/{} suites passed in {} ms\n", suites.len(), start.elapsed().as_millis()));
        emit(&text)?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Suites)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Genus(a) => cmd_genus(a),
        Command::Crosscheck(a) => cmd_crosscheck(a),
        Command::Search(a) => cmd_search(a),
        Command::Table(a) => cmd_table(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Mismatch(m) => eprintln!("error: pipelines disagree: {m}"),
                Failure::Io(m) => eprintln!("error: {m}"),
                Failure::Suites => eprintln!("error: self-test failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}

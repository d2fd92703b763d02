//! Command-line surface for the sandwich semigroup toolkit. Every
//! subcommand works over one context (base set size plus a middle
//! element), prints deterministic bytes for a fixed invocation, and
//! exits 0 on success, 1 on invariant violations, 2 on usage errors,
//! and 3 when a cap refuses the requested scale.

mod verify;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use magma_oracle::{count_automorphisms, magma_automorphisms, CayleyTable, MAX_TABLE_SIZE};
use sandwich_core::aut::{aut_order, AutEngine, Automorphism};
use sandwich_core::cayley::cayley;
use sandwich_core::element::{enumerate_all, universe_size, PartialInjection};
use sandwich_core::sandwich::{normalize, SandwichContext};

#[derive(Parser)]
#[command(
    name = "sandwich-is",
    version,
    about = "Computations in sandwich semigroups of partial injective maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every element of the universe with its rank.
    Elements {
        #[command(flatten)]
        ctx: ContextArgs,
        /// Print at most this many rows.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Print the product table of the context.
    Cayley {
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// List the idempotents and the cover edges of their natural order.
    Idempotents {
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Print the congruence classes.
    Classes {
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Count or enumerate the automorphism group.
    Aut {
        #[command(flatten)]
        ctx: ContextArgs,
        /// formula: closed-form order; construct: stream the structured
        /// automorphisms; oracle: independent count from the table.
        #[arg(long, value_enum, default_value_t = Method::Formula)]
        method: Method,
        /// Stop a stream after this many automorphisms.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Split an automorphism into its block and class parts.
    Factorize {
        #[command(flatten)]
        ctx: ContextArgs,
        /// The automorphism as JSON: {"images":[...]}.
        #[arg(long)]
        aut: String,
    },
    /// Report the change of coordinates that normalizes the sandwich.
    Normalize {
        #[command(flatten)]
        ctx: ContextArgs,
    },
    /// Run every invariant check reachable at the context.
    Verify {
        #[command(flatten)]
        ctx: ContextArgs,
    },
}

#[derive(Args)]
struct ContextArgs {
    /// Size of the base set {1..n}.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    middle: MiddleArgs,
    /// Output format (csv only where the payload is one table).
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MiddleArgs {
    /// Shorthand: use the identity on {1..k} as the sandwich element.
    #[arg(long)]
    k: Option<usize>,
    /// Sandwich element in canonical notation, e.g. "1>3,2>1" ("" is
    /// the empty map). Non-identity elements are normalized first.
    #[arg(long)]
    sandwich: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Formula,
    Construct,
    Oracle,
}

/// A command failure carrying its exit code: 1 violations, 2 usage,
/// 3 caps.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn cap(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<sandwich_core::Error> for Failure {
    fn from(e: sandwich_core::Error) -> Self {
        let code = match e {
            sandwich_core::Error::CapExceeded { .. } => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Restore the default SIGPIPE disposition so piping into `head` ends
/// the process quietly instead of panicking on a closed stdout.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Elements { ctx, limit } => cmd_elements(&ctx, limit),
        Command::Cayley { ctx } => cmd_cayley(&ctx),
        Command::Idempotents { ctx } => cmd_idempotents(&ctx),
        Command::Classes { ctx } => cmd_classes(&ctx),
        Command::Aut { ctx, method, limit } => cmd_aut(&ctx, method, limit),
        Command::Factorize { ctx, aut } => cmd_factorize(&ctx, &aut),
        Command::Normalize { ctx } => cmd_normalize(&ctx),
        Command::Verify { ctx } => cmd_verify(&ctx),
    }
}

/// The sandwich element named by the flags, before any normalization.
fn middle_element(args: &ContextArgs) -> Result<PartialInjection, Failure> {
    match (args.middle.k, args.middle.sandwich.as_deref()) {
        (Some(k), None) => {
            if k > args.n {
                return Err(Failure::usage(format!("--k {k} exceeds --n {}", args.n)));
            }
            Ok(PartialInjection::identity_on(args.n, &(1..=k).collect()))
        }
        (None, Some(text)) => Ok(PartialInjection::parse(text, args.n)?),
        _ => unreachable!("the flag group admits exactly one"),
    }
}

/// Builds the working context. An arbitrary sandwich element is routed
/// through its normalization; the change of coordinates is reported on
/// stderr so stdout stays machine-readable.
fn build_context(args: &ContextArgs) -> Result<SandwichContext, Failure> {
    let s = middle_element(args)?;
    let ctx = SandwichContext::new(args.n, s.clone())?;
    if s != *ctx.e() {
        let norm = normalize(&s);
        eprintln!(
            "note: sandwich \"{s}\" normalized to \"{}\"; p = \"{}\", q = \"{}\"",
            ctx.e(),
            norm.p,
            norm.q
        );
    }
    Ok(ctx)
}

/// The effective table cap: SANDWICH_IS_CAP may lower it, never exceed
/// the hard limit.
fn table_cap() -> Result<usize, Failure> {
    match std::env::var("SANDWICH_IS_CAP") {
        Err(std::env::VarError::NotPresent) => Ok(MAX_TABLE_SIZE),
        Err(e) => Err(Failure::usage(format!("SANDWICH_IS_CAP: {e}"))),
        Ok(text) => text
            .parse::<usize>()
            .map(|v| v.min(MAX_TABLE_SIZE))
            .map_err(|e| Failure::usage(format!("SANDWICH_IS_CAP={text}: {e}"))),
    }
}

fn checked_table(ctx: &SandwichContext) -> Result<CayleyTable, Failure> {
    let cap = table_cap()?;
    let m = universe_size(ctx.n());
    if m > cap as u64 {
        return Err(Failure::cap(format!("universe size {m} exceeds the table cap {cap}")));
    }
    Ok(cayley(ctx)?)
}

fn emit_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("payloads serialize"));
}

fn no_csv() -> Failure {
    Failure::usage("csv output is not available for this command; use json or text")
}

fn cmd_elements(args: &ContextArgs, limit: Option<usize>) -> Result<(), Failure> {
    build_context(args)?;
    let all = enumerate_all(args.n)?;
    let shown = &all[..limit.unwrap_or(all.len()).min(all.len())];
    match args.format {
        Format::Text => {
            for (i, x) in shown.iter().enumerate() {
                println!("{i}\t{x}\t{}", x.rank());
            }
        }
        Format::Csv => {
            println!("index,element,rank");
            for (i, x) in shown.iter().enumerate() {
                println!("{i},\"{x}\",{}", x.rank());
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                element: String,
                rank: usize,
            }
            let rows: Vec<Row> = shown
                .iter()
                .map(|x| Row { element: x.to_string(), rank: x.rank() })
                .collect();
            emit_json(&rows);
        }
    }
    Ok(())
}

fn cmd_cayley(args: &ContextArgs) -> Result<(), Failure> {
    let ctx = build_context(args)?;
    let table = checked_table(&ctx)?;
    match args.format {
        Format::Csv => print!("{}", table.to_csv()),
        Format::Json => emit_json(&table),
        Format::Text => {
            for (i, label) in table.labels().iter().enumerate() {
                println!("# {i}: {label}");
            }
            for i in 0..table.size() {
                let row: Vec<String> =
                    (0..table.size()).map(|j| table.get(i, j).to_string()).collect();
                println!("{}", row.join(" "));
            }
        }
    }
    Ok(())
}

fn cmd_idempotents(args: &ContextArgs) -> Result<(), Failure> {
    let ctx = build_context(args)?;
    let items = ctx.idempotents();
    // Cover edges of the natural order: one domain point added.
    let mut hasse = Vec::new();
    for (i, f) in items.iter().enumerate() {
        for (j, h) in items.iter().enumerate() {
            if h.rank() == f.rank() + 1 && f.dom().is_subset(&h.dom()) {
                hasse.push((i, j));
            }
        }
    }
    match args.format {
        Format::Csv => return Err(no_csv()),
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                idempotents: Vec<String>,
                hasse: Vec<(usize, usize)>,
            }
            emit_json(&Out {
                idempotents: items.iter().map(PartialInjection::to_string).collect(),
                hasse,
            });
        }
        Format::Text => {
            println!("idempotents:");
            for (i, f) in items.iter().enumerate() {
                println!("{i}\t{f}");
            }
            println!("hasse:");
            for (i, j) in hasse {
                println!("{i} < {j}");
            }
        }
    }
    Ok(())
}

fn cmd_classes(args: &ContextArgs) -> Result<(), Failure> {
    let ctx = build_context(args)?;
    let classes = ctx.classes()?;
    match args.format {
        Format::Csv => return Err(no_csv()),
        Format::Json => emit_json(&classes),
        Format::Text => {
            for class in &classes {
                let members: Vec<String> =
                    class.members.iter().map(PartialInjection::to_string).collect();
                println!("{}\t{}", class.key, members.join("|"));
            }
        }
    }
    Ok(())
}

fn cmd_aut(args: &ContextArgs, method: Method, limit: Option<usize>) -> Result<(), Failure> {
    if args.format == Format::Csv {
        return Err(no_csv());
    }
    let ctx = build_context(args)?;
    match method {
        Method::Formula => {
            let order = aut_order(&ctx)?;
            if order.degenerate {
                eprintln!(
                    "note: k = 0 lies outside the product formula, which assumes k >= 1; \
                     reporting the null-product count (|universe| - 1)! instead"
                );
            }
            match args.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        order: String,
                        degenerate: bool,
                    }
                    emit_json(&Out {
                        order: order.order.to_string(),
                        degenerate: order.degenerate,
                    });
                }
                _ => println!("{}", order.order),
            }
        }
        Method::Construct => {
            let engine = AutEngine::new(&ctx)?;
            let stream = engine.enumerate_aut(limit)?;
            match args.format {
                Format::Json => emit_json(&stream),
                _ => {
                    for aut in &stream {
                        let row: Vec<String> =
                            aut.images().iter().map(u16::to_string).collect();
                        println!("{}", row.join(","));
                    }
                }
            }
        }
        Method::Oracle => {
            let table = checked_table(&ctx)?;
            let count = count_automorphisms(&table);
            let stream = limit.map(|l| magma_automorphisms(&table, Some(l)));
            match args.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        count: String,
                        #[serde(skip_serializing_if = "Option::is_none")]
                        automorphisms: Option<Vec<Vec<u16>>>,
                    }
                    emit_json(&Out { count: count.to_string(), automorphisms: stream });
                }
                _ => {
                    println!("{count}");
                    for images in stream.into_iter().flatten() {
                        let row: Vec<String> = images.iter().map(u16::to_string).collect();
                        println!("{}", row.join(","));
                    }
                }
            }
        }
    }
    Ok(())
}

fn cmd_factorize(args: &ContextArgs, aut_json: &str) -> Result<(), Failure> {
    if args.format == Format::Csv {
        return Err(no_csv());
    }
    let ctx = build_context(args)?;
    let engine = AutEngine::new(&ctx)?;
    let parsed: Automorphism = serde_json::from_str(aut_json)
        .map_err(|e| Failure::usage(format!("--aut: {e}")))?;
    let sigma = engine.verified(parsed)?;
    let f = engine.factorize(&sigma)?;
    match args.format {
        Format::Json => emit_json(&f),
        _ => {
            println!("g\t{}", f.triple.g.one_line());
            println!("h1\t{}", f.triple.h1.one_line());
            println!("h2\t{}", f.triple.h2.one_line());
            let moved: Vec<String> = f
                .class_perm
                .perms()
                .iter()
                .enumerate()
                .filter(|(_, p)| p.iter().enumerate().any(|(i, &v)| i != v as usize))
                .map(|(ci, p)| {
                    let row: Vec<String> = p.iter().map(u32::to_string).collect();
                    format!("{ci}:{}", row.join(","))
                })
                .collect();
            println!("class_perms\t{}", moved.join(";"));
        }
    }
    Ok(())
}

fn cmd_normalize(args: &ContextArgs) -> Result<(), Failure> {
    if args.format == Format::Csv {
        return Err(no_csv());
    }
    let s = middle_element(args)?;
    let norm = normalize(&s);
    let e = PartialInjection::identity_on(args.n, &(1..=s.rank()).collect());
    let verified = norm.q.compose(&e)?.compose(&norm.p)? == s;
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                p: String,
                q: String,
                verified: bool,
            }
            emit_json(&Out { p: norm.p.to_string(), q: norm.q.to_string(), verified });
        }
        _ => {
            println!("p\t{}", norm.p);
            println!("q\t{}", norm.q);
            println!("verified\t{verified}");
        }
    }
    Ok(())
}

fn cmd_verify(args: &ContextArgs) -> Result<(), Failure> {
    if args.format == Format::Csv {
        return Err(no_csv());
    }
    let ctx = build_context(args)?;
    let cap = table_cap()?;
    let report = verify::run(&ctx, args.seed, cap)?;
    match args.format {
        Format::Json => emit_json(&report),
        _ => {
            let mut passed = 0usize;
            let mut skipped = 0usize;
            for check in &report.checks {
                match check.status {
                    verify::Status::Ok => {
                        passed += 1;
                        println!("check {}: ok", check.name);
                    }
                    verify::Status::Skipped => {
                        skipped += 1;
                        println!(
                            "check {}: skipped ({})",
                            check.name,
                            check.detail.as_deref().unwrap_or("")
                        );
                    }
                    verify::Status::Violation => {
                        println!(
                            "check {}: VIOLATION {}",
                            check.name,
                            check.detail.as_deref().unwrap_or("")
                        );
                    }
                }
            }
            let violations = report.checks.len() - passed - skipped;
            println!("{passed} passed, {skipped} skipped, {violations} violations");
        }
    }
    if !report.ok {
        let violations =
            report.checks.iter().filter(|c| c.status == verify::Status::Violation).count();
        return Err(Failure { code: 1, message: format!("{violations} invariant violation(s)") });
    }
    Ok(())
}

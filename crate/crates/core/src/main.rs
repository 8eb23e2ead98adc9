use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use onerel::io::{emit_certificate, read_certificate, render_batch_table, render_tree, run_batch};
use onerel::random::RandomPresentations;
use onerel::{
    build_best_tower, build_tower, parse_presentation, verify_certificate, BoundReport,
    CertificateNode, Registry,
};

/// Decompose one-relator presentations and certify asdim G ≤ ⌈|r|/2⌉.
#[derive(Parser, Debug)]
#[command(name = "onerel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Structured (JSON) output.
    #[arg(long, global = true)]
    json: bool,
    /// Try every stable-letter and embedding-pair choice; keep the best bound.
    #[arg(long, global = true)]
    all_pivots: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the general bound ⌈|r|/2⌉ and the bound realized by the tower.
    Bound { presentation: String },
    /// Print the decomposition tree.
    Tree { presentation: String },
    /// Emit the certificate document and verify it.
    Certify {
        presentation: String,
        /// Write the certificate here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-verify a certificate document.
    Verify { certificate: PathBuf },
    /// Process one presentation per line, or a random sweep.
    Batch(BatchArgs),
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// Input file, `-` for standard input.
    file: Option<PathBuf>,
    /// Generate COUNT random relators of length ≤ MAXLEN over GENS generators.
    #[arg(long, num_args = 3, value_names = ["COUNT", "MAXLEN", "GENS"])]
    random: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    presentation: String,
    relator_length: usize,
    paper_bound: usize,
    tower_bound: u32,
    hnn_steps: usize,
    node_count: usize,
    verified: bool,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    violations: &'a [String],
}

fn build(text: &str, all_pivots: bool, registry: &Registry) -> Result<CertificateNode, ExitCode> {
    match parse_presentation(text, registry) {
        Ok(p) if all_pivots => Ok(build_best_tower(&p, registry)),
        Ok(p) => Ok(build_tower(&p, registry)),
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(1))
        }
    }
}

fn verdict(root: &CertificateNode) -> (Vec<String>, ExitCode) {
    let v = verify_certificate(root);
    let messages: Vec<String> = v.violations.iter().map(ToString::to_string).collect();
    for m in &messages {
        eprintln!("violation: {m}");
    }
    let code = if v.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    };
    (messages, code)
}

fn run(cli: Cli) -> ExitCode {
    let registry = Registry::new();
    match cli.command {
        Command::Bound { presentation } => {
            let root = match build(&presentation, cli.all_pivots, &registry) {
                Ok(r) => r,
                Err(code) => return code,
            };
            let report = BoundReport::of(&root);
            let (violations, code) = verdict(&root);
            if cli.json {
                let out = BoundOutput {
                    presentation: root.input.to_string(),
                    relator_length: report.relator_len,
                    paper_bound: report.paper_bound,
                    tower_bound: report.tower_bound,
                    hnn_steps: report.hnn_steps,
                    node_count: report.node_count,
                    verified: violations.is_empty(),
                    violations: &violations,
                };
                println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            } else {
                println!("presentation  {}", root.input);
                println!("|r|           {}", report.relator_len);
                println!("paper_bound   {}", report.paper_bound);
                println!("tower_bound   {}", report.tower_bound);
                println!("hnn_steps     {}", report.hnn_steps);
                println!("nodes         {}", report.node_count);
            }
            code
        }
        Command::Tree { presentation } => {
            let root = match build(&presentation, cli.all_pivots, &registry) {
                Ok(r) => r,
                Err(code) => return code,
            };
            if cli.json {
                println!("{}", emit_certificate(&root));
            } else {
                print!("{}", render_tree(&root));
            }
            verdict(&root).1
        }
        Command::Certify {
            presentation,
            output,
        } => {
            let root = match build(&presentation, cli.all_pivots, &registry) {
                Ok(r) => r,
                Err(code) => return code,
            };
            let doc = emit_certificate(&root);
            match output {
                Some(path) => {
                    if let Err(e) = fs::write(&path, format!("{doc}\n")) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => println!("{doc}"),
            }
            let (_, code) = verdict(&root);
            if code == ExitCode::SUCCESS {
                eprintln!("verified: ok");
            }
            code
        }
        Command::Verify { certificate } => {
            let text = match fs::read_to_string(&certificate) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", certificate.display());
                    return ExitCode::from(1);
                }
            };
            let root = match read_certificate(&text, &registry) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let (_, code) = verdict(&root);
            if code == ExitCode::SUCCESS {
                let report = BoundReport::of(&root);
                println!(
                    "ok: paper_bound {} tower_bound {}",
                    report.paper_bound, report.tower_bound
                );
            }
            code
        }
        Command::Batch(args) => {
            let lines: Vec<String> = if let Some(sizes) = &args.random {
                let (count, max_len, gens) = (sizes[0], sizes[1], sizes[2]);
                if max_len == 0 || gens == 0 {
                    eprintln!("error: --random needs MAXLEN ≥ 1 and GENS ≥ 1");
                    return ExitCode::from(1);
                }
                let mut source = RandomPresentations::new(args.seed, gens, max_len);
                (0..count).map(|_| source.next_text()).collect()
            } else {
                let text = match args.file.as_deref() {
                    None => {
                        eprintln!("error: batch needs a FILE or --random");
                        return ExitCode::from(1);
                    }
                    Some(p) if p.as_os_str() == "-" => {
                        let mut s = String::new();
                        if let Err(e) = std::io::stdin().read_to_string(&mut s) {
                            eprintln!("error: {e}");
                            return ExitCode::from(1);
                        }
                        s
                    }
                    Some(p) => match fs::read_to_string(p) {
                        Ok(s) => s,
                        Err(e) => {
                            eprintln!("error: cannot read {}: {e}", p.display());
                            return ExitCode::from(1);
                        }
                    },
                };
                text.lines().map(str::to_string).collect()
            };
            let rows = run_batch(&lines, cli.all_pivots);
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
            } else {
                print!("{}", render_batch_table(&rows));
            }
            let failed = rows.iter().any(|r| r.tower_bound.is_some() && !r.verified);
            if failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}

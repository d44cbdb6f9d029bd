use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use surfcalc::cyclic::{self, Chain, CyclicQuotient};
use surfcalc::scenario::{self, ReportFormat};

const EXIT_FAIL: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "surfcalc", version, about = "Exact divisor calculus on blown-up planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print a text report.
    Run {
        file: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write one DOT file per configuration into this directory.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Hirzebruch-Jung chain of 1/m(1,q).
    Hj { m: u64, q: u64 },
    /// Singularity resolved by the chain [b1, ..., bk].
    Chain {
        #[arg(required = true, num_args = 1..)]
        b: Vec<u64>,
    },
    /// Chain of the Wahl singularity 1/n^2(1, na-1).
    Wahl { n: u64, a: u64 },
    /// Class-T recognition of 1/m(1,q).
    Classify { m: u64, q: u64 },
}

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("surfcalc: {msg}");
    ExitCode::from(EXIT_INVALID)
}

fn chain_text(c: &Chain) -> String {
    let v: Vec<String> = c.entries().iter().map(u64::to_string).collect();
    format!("[{}]", v.join(", "))
}

fn describe(s: CyclicQuotient) -> String {
    let t = cyclic::classify_t(s);
    let mut out = format!("{s} chain {} class {t}", chain_text(&cyclic::hj_expand(s)));
    if let (Ok(mu), Ok(dim)) = (cyclic::milnor_number(t), cyclic::local_qg_t1_dim(t)) {
        out.push_str(&format!(" milnor {mu} qg_dim {dim}"));
    }
    out
}

fn run(file: PathBuf, report: Option<PathBuf>, dot: Option<PathBuf>) -> ExitCode {
    let s = match scenario::load_scenario(&file) {
        Ok(s) => s,
        Err(e) => return invalid(format!("{}: {e}", file.display())),
    };
    let prepared = match scenario::prepare(&s) {
        Ok(p) => p,
        Err(e) => return invalid(e),
    };
    let r = scenario::run_prepared(&s, &prepared);
    print!("{}", String::from_utf8_lossy(&scenario::emit_report(&r, ReportFormat::Text)));
    if let Some(path) = report {
        if let Err(e) = std::fs::write(&path, scenario::emit_report(&r, ReportFormat::Json)) {
            return invalid(format!("{}: {e}", path.display()));
        }
    }
    if let Some(dir) = dot {
        let graphs = match prepared.dot_graphs(&s) {
            Ok(g) => g,
            Err(e) => return invalid(e),
        };
        if let Err(e) = std::fs::create_dir_all(&dir) {
            return invalid(format!("{}: {e}", dir.display()));
        }
        for (name, text) in graphs {
            let path = dir.join(format!("{name}.dot"));
            if let Err(e) = std::fs::write(&path, text) {
                return invalid(format!("{}: {e}", path.display()));
            }
        }
    }
    if r.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { file, report, dot } => run(file, report, dot),
        Command::Hj { m, q } => match CyclicQuotient::new(m, q) {
            Ok(s) => {
                println!("{}", chain_text(&cyclic::hj_expand(s)));
                ExitCode::SUCCESS
            }
            Err(e) => invalid(e),
        },
        Command::Chain { b } => match Chain::new(b).and_then(|c| cyclic::chain_to_mq(&c)) {
            Ok(s) => {
                println!("{}", describe(s));
                ExitCode::SUCCESS
            }
            Err(e) => invalid(e),
        },
        Command::Wahl { n, a } => match cyclic::wahl_chain(n, a) {
            Ok(c) => {
                println!("{}", chain_text(&c));
                ExitCode::SUCCESS
            }
            Err(e) => invalid(e),
        },
        Command::Classify { m, q } => match CyclicQuotient::new(m, q) {
            Ok(s) => {
                println!("{}", describe(s));
                ExitCode::SUCCESS
            }
            Err(e) => invalid(e),
        },
    }
}

mod script;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use inexa_core::abstraction::AbstractionRef;
use inexa_core::discovery::{discover_with, DiscoveryOptions};
use inexa_core::fixtures;
use inexa_core::ocel::{parse_log, EventLog, LogFormat};
use inexa_core::ocpn::{to_dot, AcceptingOcpn, ModelGraphPayload};
use inexa_core::session::{Session, SessionConfig, SessionError, DEFAULT_SEED, DEFAULT_THRESHOLD};
use inexa_service::ServiceConfig;
use script::Step;

#[derive(Parser)]
#[command(name = "inexa", version, about = "Interactive, log-traced process model abstraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(clap::Args)]
struct Common {
    /// Seed for abstraction object ids.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Mine the per-type process trees in parallel.
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Discover the object-centric Petri net of a log.
    Discover {
        log: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long)]
        parallel: bool,
    },
    /// Discover and abstract until the model is small enough.
    Init {
        log: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: usize,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        log_out: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Run apply/redo steps on a (possibly augmented) log.
    ApplyScript {
        log: PathBuf,
        script: PathBuf,
        #[arg(long)]
        log_out: PathBuf,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild the model of an augmented log and write it back out.
    Export {
        log: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Serve the HTTP API and the web client.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080", env = "INEXA_BIND")]
        bind: SocketAddr,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, env = "INEXA_THRESHOLD")]
        threshold: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, env = "INEXA_SEED")]
        seed: u64,
        /// Directory with the static web client.
        #[arg(long, env = "INEXA_STATIC_DIR")]
        static_dir: Option<PathBuf>,
        /// Export every session here on shutdown.
        #[arg(long, env = "INEXA_SNAPSHOT_DIR")]
        snapshot_dir: Option<PathBuf>,
    },
    /// Walk through the bank account opening example.
    Demo {
        /// Also write each step as DOT into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Unfit(String),
    Inadmissible(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Unfit(_) => 3,
            Failure::Inadmissible(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Unfit(m) | Failure::Inadmissible(m) => m,
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Log(_) => Failure::Parse(e.to_string()),
            SessionError::Discovery(_) => Failure::Unfit(e.to_string()),
            SessionError::History(_) | SessionError::NotAvailable(_) | SessionError::NotRedoable(_) => {
                Failure::Inadmissible(e.to_string())
            }
        }
    }
}

fn read_log(path: &Path) -> Result<EventLog, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    parse_log(&bytes, LogFormat::OcelJson).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn render(net: &AcceptingOcpn, format: Format) -> Vec<u8> {
    match format {
        Format::Dot => to_dot(net).into_bytes(),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&ModelGraphPayload::from_net(net)).expect("serializable");
            v.push(b'\n');
            v
        }
    }
}

fn config(threshold: usize, common: &Common) -> SessionConfig {
    let mut c = SessionConfig::with_threshold(threshold).seed(common.seed);
    c.discovery = DiscoveryOptions {
        parallel: common.parallel,
    };
    c
}

fn run_script(s: &mut Session, steps: &[Step]) -> Result<(), Failure> {
    for (i, step) in steps.iter().enumerate() {
        let n = i + 1;
        let r = match step {
            Step::Apply(r) => s.apply(r).map(|oid| format!("applied {r} as {oid}")),
            Step::Redo(oid) => s.redo(oid).map(|r| format!("redid {oid} ({r})")),
            Step::RedoLast => match s.history().last() {
                Some(h) => s.redo(&h.oid.clone()).map(|r| format!("redid {} ({r})", h.oid)),
                None => Err(SessionError::NotRedoable("last".into())),
            },
        };
        match r {
            Ok(msg) => log::info!("step {n}: {msg}"),
            Err(e) => return Err(Failure::Inadmissible(format!("step {n}: {e}"))),
        }
    }
    Ok(())
}

fn print_state(title: &str, s: &Session) {
    let size = s.net().size();
    println!("== {title}: {} elements, {} arcs", size.elements, size.arcs);
    for t in s.net().transitions() {
        let refs: Vec<String> = t.refs.iter().map(|r| format!("↔ {}", r.short_name())).collect();
        println!("   {:<8} {} {}", t.id, t.display_label(), refs.join(" "));
    }
}

fn demo(out_dir: Option<&Path>) -> Result<(), Failure> {
    let mut s = Session::initialize(fixtures::bank(), SessionConfig::with_threshold(30))?;
    let dump = |name: &str, s: &Session| -> Result<(), Failure> {
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(e.to_string()))?;
            write(&dir.join(format!("{name}.dot")), to_dot(s.net()).as_bytes())?;
        }
        Ok(())
    };
    print_state("initialized (threshold 30)", &s);
    dump("1-initialized", &s)?;
    let by_type = |s: &Session, name: &str| -> Option<AbstractionRef> {
        s.available()
            .into_iter()
            .map(|o| o.reference)
            .find(|r| r.kind.is_complete() && r.otype.short_name() == name)
    };
    let client = by_type(&s, "client").ok_or_else(|| Failure::Inadmissible("client aggregation unavailable".into()))?;
    s.apply(&client)?;
    print_state("client aggregated", &s);
    dump("2-client", &s)?;
    let seq = s
        .available()
        .into_iter()
        .map(|o| o.reference)
        .filter(|r| r.kind == inexa_core::ocel::AbstractionKind::Seq)
        .max_by_key(|r| r.transitions.len())
        .ok_or_else(|| Failure::Inadmissible("no sequence available".into()))?;
    let oid = s.apply(&seq)?;
    print_state("fine-grained sequence aggregated", &s);
    dump("3-sequence", &s)?;
    s.redo(&oid)?;
    print_state("sequence redone", &s);
    dump("4-redo", &s)?;
    println!("== history");
    for h in s.history() {
        println!("   {} {}", h.oid, h.reference);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Discover {
            log,
            out,
            format,
            parallel,
        } => {
            let log = read_log(&log)?;
            let d = discover_with(&log, DiscoveryOptions { parallel }).map_err(|e| Failure::Unfit(e.to_string()))?;
            write(&out, &render(&d.net, format))
        }
        Command::Init {
            log,
            threshold,
            model_out,
            log_out,
            format,
            common,
        } => {
            let log = read_log(&log)?;
            if log.is_augmented() {
                return Err(Failure::Usage("log already carries an abstraction history; use export".into()));
            }
            let s = Session::initialize(log, config(threshold, &common))?;
            for w in s.warnings() {
                eprintln!("warning: {w}");
            }
            write(&model_out, &render(s.net(), format))?;
            write(&log_out, &s.export())
        }
        Command::ApplyScript {
            log,
            script,
            log_out,
            model_out,
            format,
            common,
        } => {
            let log = read_log(&log)?;
            let src = std::fs::read_to_string(&script).map_err(|e| Failure::Parse(format!("{}: {e}", script.display())))?;
            let steps = script::parse(&src).map_err(|e| Failure::Parse(format!("{}: {e}", script.display())))?;
            let mut s = Session::import(log, config(usize::MAX, &common))?;
            run_script(&mut s, &steps)?;
            if let Some(m) = model_out {
                write(&m, &render(s.net(), format))?;
            }
            write(&log_out, &s.export())
        }
        Command::Export {
            log,
            out,
            model_out,
            format,
        } => {
            let s = Session::import(read_log(&log)?, SessionConfig::default())?;
            if let Some(m) = model_out {
                write(&m, &render(s.net(), format))?;
            }
            write(&out, &s.export())
        }
        Command::Serve {
            bind,
            threshold,
            seed,
            static_dir,
            snapshot_dir,
        } => {
            let config = ServiceConfig {
                default_threshold: threshold,
                seed,
                static_dir,
                snapshot_dir,
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
            rt.block_on(inexa_service::serve(bind, config))
                .map_err(|e| Failure::Usage(format!("{bind}: {e}")))
        }
        Command::Demo { out_dir } => demo(out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

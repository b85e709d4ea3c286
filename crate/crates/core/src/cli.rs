//! Command-line front end. `run` never panics on bad input and never calls
//! `process::exit`; the binary maps its return value to the exit status.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::formats::{self, to_tagged_json};
use crate::hankel::{build_hankel, HankelBlockMatrix};
use crate::ioeq::check_equation;
use crate::markov::MarkovTable;
use crate::model::{simulate, AlpvSystem};
use crate::numlin::{ToleranceConfig, Vector};
use crate::realize::{analyze, find_isomorphism, kalman_ho, minimize_in_order, ReductionOrder};
use crate::switched::{embed_switched_input, switched_analysis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const SCHEMAS: &str = r#"FILE FORMATS
  Every JSON output carries "schema": "alpv-1". Floats are written with
  17 significant digits.

  system JSON
    {"schema":"alpv-1","D":2,"n":1,"m":1,"p":1,
     "A":[A_1,...,A_D],"B":[B_1,...,B_D],"C":[C_1,...,C_D]}
    each matrix is a list of rows; A_q is n x n, B_q is n x m, C_q is p x n.

  signal CSV (sim)
    header p_1,...,p_D,u_1,...,u_m; one row per time step t = 0, 1, ...

  switched input CSV (switched-sim)
    header mode,u_1,...,u_m; mode is in 1..D.

  outputs CSV
    header t,y_1,...,y_p; the output at every step of the run from x = 0.

  Markov table JSON (markov)
    {"schema":"alpv-1","D":..,"m":..,"p":..,"horizon":H,
     "entries":[{"word":"12","S":[[..]]},...]}
    one entry per word of length 2..H; words are digit strings for D <= 9
    and space-separated symbols otherwise.

  Hankel CSV + sidecar (hankel)
    the CSV holds the dense matrix, no header. The sidecar sits next to it
    with extension .json: {"schema":"alpv-1","L":..,"M":..,"D":..,"m":..,
    "p":..,"rank":r}. The rank is exact only when L is at least the
    dimension of some realization minus one.

  analysis report JSON (analyze)
    {"schema":"alpv-1","reach_rank":..,"obs_rank":..,"n":..,
     "reachable":..,"observable":..,"minimal":..}

  equation JSON (ioeq-check input)
    {"n":N,"m":..,"D":..,"Q":[Q_0,...,Q_N],"L":[[L_11..L_1m],...,[L_N1..L_Nm]]}
    a polynomial is a list of terms {"coeff":c,"exps":{"P_i_j":e,...}} where
    P_i_j is coordinate j of the scheduling signal i steps in the past.

  equation check JSON (ioeq-check output)
    {"schema":"alpv-1","satisfied":..,"max_residual":..,"trials":..}

  isomorphism (iso)
    the matrix T as CSV with x2 = T x1.

EXIT STATUS
  0 success, 1 domain error (for example NotIsomorphic), 2 usage or I/O error."#;

#[derive(Debug, Parser)]
#[command(
    name = "alpv",
    version,
    about = "Realization theory for affine LPV systems",
    after_long_help = SCHEMAS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output file, written atomically. Defaults to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TolArg {
    /// Relative rank tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Order {
    ReachObs,
    ObsReach,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a system from the zero state; writes the outputs CSV.
    Sim {
        system: PathBuf,
        signal: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Tabulate the sub-Markov parameters S(v) for 2 <= |v| <= horizon.
    Markov {
        system: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build the Hankel matrix H_{L,M}; writes the CSV and its sidecar.
    #[command(group(ArgGroup::new("source").required(true).args(["from_system", "from_table"])))]
    Hankel {
        #[arg(long)]
        from_system: Option<PathBuf>,
        #[arg(long)]
        from_table: Option<PathBuf>,
        #[arg(long = "L")]
        l: usize,
        #[arg(long = "M")]
        m: usize,
        /// Hankel CSV path; the sidecar goes next to it with extension .json.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        tol: TolArg,
    },
    /// Kalman-Ho realization from H_{L,L+1}.
    #[command(group(ArgGroup::new("source").required(true).args(["from_hankel", "from_system", "from_table"])))]
    Realize {
        /// Hankel CSV written by `hankel` with M = L + 1.
        #[arg(long)]
        from_hankel: Option<PathBuf>,
        #[arg(long)]
        from_system: Option<PathBuf>,
        #[arg(long)]
        from_table: Option<PathBuf>,
        /// Required with --from-system and --from-table.
        #[arg(long = "L")]
        l: Option<usize>,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Reduce to a minimal system with the same input-output map.
    Minimize {
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::ReachObs)]
        order: Order,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Reachability, observability and minimality report.
    Analyze {
        system: PathBuf,
        /// Compute the ranks from switched runs instead of the LPV matrices.
        #[arg(long)]
        switched: bool,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Find T with A2 T = T A1, B2 = T B1, C2 T = C1 for two minimal systems.
    Iso {
        system1: PathBuf,
        system2: PathBuf,
        /// Largest accepted relative residual of the defining relations.
        #[arg(long, default_value_t = 1e-7)]
        residual_tol: f64,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Check an affine input-output equation on random trajectories.
    IoeqCheck {
        equation: PathBuf,
        system: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Residual tolerance, relative to 1 + max |y|.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Simulate the switched interpretation; writes the outputs CSV.
    SwitchedSim {
        system: PathBuf,
        switched: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sim { .. } => "sim",
            Command::Markov { .. } => "markov",
            Command::Hankel { .. } => "hankel",
            Command::Realize { .. } => "realize",
            Command::Minimize { .. } => "minimize",
            Command::Analyze { .. } => "analyze",
            Command::Iso { .. } => "iso",
            Command::IoeqCheck { .. } => "ioeq-check",
            Command::SwitchedSim { .. } => "switched-sim",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain { context: String, source: Error },
}

type Outcome<T> = std::result::Result<T, Failure>;

fn domain(context: impl Into<String>) -> impl FnOnce(Error) -> Failure {
    let context = context.into();
    move |source| match source {
        // unreadable file content is an input problem, not a domain one
        Error::Parse { .. } => Failure::Usage(format!("{context}: {source}")),
        _ => Failure::Domain { context, source },
    }
}

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_system(path: &Path) -> Outcome<AlpvSystem> {
    formats::system_from_json(&read(path)?).map_err(domain(path.display().to_string()))
}

fn load_table(path: &Path) -> Outcome<MarkovTable> {
    formats::table_from_json(&read(path)?).map_err(domain(path.display().to_string()))
}

fn tolerance(rel: f64) -> Outcome<ToleranceConfig> {
    ToleranceConfig::relative(rel).map_err(|e| Failure::Usage(format!("--tol: {e}")))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: &OutArg, bytes: &[u8], stdout: &mut dyn Write) -> Outcome<()> {
    match &out.output {
        Some(path) => write_atomic(path, bytes)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}"))),
    }
}

/// `h.csv` -> `h.json`.
fn sidecar_path(csv: &Path) -> Outcome<PathBuf> {
    if csv.extension().is_some_and(|e| e == "json") {
        return Err(Failure::Usage(format!(
            "Hankel matrix path {} must not end in .json; the sidecar takes that name",
            csv.display()
        )));
    }
    Ok(csv.with_extension("json"))
}

fn load_hankel(path: &Path) -> Outcome<HankelBlockMatrix> {
    let side_path = sidecar_path(path)?;
    let side = formats::sidecar_from_json(&read(&side_path)?)
        .map_err(domain(side_path.display().to_string()))?;
    formats::hankel_from_parts(&read(path)?, &side).map_err(domain(path.display().to_string()))
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome<()> {
    match cmd {
        Command::Sim { system, signal, out } => {
            let sys = load_system(&system)?;
            let w = formats::signal_from_csv(&read(&signal)?, sys.sched_dim(), sys.input_dim())
                .map_err(domain(signal.display().to_string()))?;
            let run = simulate(&sys, &Vector::zeros(sys.state_dim()), &w)
                .map_err(domain("simulation"))?;
            emit(&out, &formats::outputs_to_csv(&run.outputs), stdout)
        }
        Command::Markov { system, horizon, out } => {
            let sys = load_system(&system)?;
            let table = MarkovTable::from_system(&sys, horizon).map_err(domain("--horizon"))?;
            emit(&out, &formats::table_to_json(&table), stdout)
        }
        Command::Hankel {
            from_system,
            from_table,
            l,
            m,
            output,
            tol,
        } => {
            let tol = tolerance(tol.tol)?;
            let side_path = sidecar_path(&output)?;
            let h = match (from_system, from_table) {
                (Some(path), _) => build_hankel(&load_system(&path)?, l, m),
                (None, Some(path)) => build_hankel(&load_table(&path)?, l, m),
                (None, None) => unreachable!("clap enforces the source group"),
            }
            .map_err(domain("--L/--M"))?;
            let rank = h.rank(&tol).map_err(domain("Hankel rank"))?;
            let side = formats::hankel_sidecar(&h, Some(rank));
            write_atomic(&output, &formats::matrix_to_csv(h.data()))
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", output.display())))?;
            write_atomic(&side_path, &to_tagged_json(&side))
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", side_path.display())))?;
            let _ = writeln!(stderr, "rank H_{{{l},{m}}} = {rank} (exact when L + 1 bounds the dimension of some realization)");
            Ok(())
        }
        Command::Realize {
            from_hankel,
            from_system,
            from_table,
            l,
            tol,
            out,
        } => {
            let tol = tolerance(tol.tol)?;
            let need_l = || l.ok_or_else(|| Failure::Usage("--L is required unless --from-hankel is given".into()));
            let h = if let Some(path) = from_hankel {
                let h = load_hankel(&path)?;
                if let Some(l) = l {
                    if l != h.row_len() {
                        return Err(Failure::Usage(format!(
                            "--L {l} disagrees with the sidecar of {} (L = {})",
                            path.display(),
                            h.row_len()
                        )));
                    }
                }
                h
            } else if let Some(path) = from_system {
                let l = need_l()?;
                build_hankel(&load_system(&path)?, l, l + 1).map_err(domain("--L"))?
            } else if let Some(path) = from_table {
                let l = need_l()?;
                build_hankel(&load_table(&path)?, l, l + 1).map_err(domain("--L"))?
            } else {
                unreachable!("clap enforces the source group")
            };
            let sys = kalman_ho(&h, &tol).map_err(domain("Kalman-Ho realization"))?;
            emit(&out, &formats::system_to_json(&sys), stdout)
        }
        Command::Minimize {
            system,
            order,
            tol,
            out,
        } => {
            let tol = tolerance(tol.tol)?;
            let sys = load_system(&system)?;
            let order = match order {
                Order::ReachObs => ReductionOrder::ReachThenObs,
                Order::ObsReach => ReductionOrder::ObsThenReach,
            };
            let min = minimize_in_order(&sys, &tol, order).map_err(domain(system.display().to_string()))?;
            emit(&out, &formats::system_to_json(&min), stdout)
        }
        Command::Analyze {
            system,
            switched,
            tol,
            out,
        } => {
            let tol = tolerance(tol.tol)?;
            let sys = load_system(&system)?;
            let report = if switched {
                switched_analysis(&sys, &tol)
            } else {
                analyze(&sys, &tol)
            }
            .map_err(domain(system.display().to_string()))?;
            emit(&out, &to_tagged_json(&report), stdout)
        }
        Command::Iso {
            system1,
            system2,
            residual_tol,
            tol,
            out,
        } => {
            let tol = tolerance(tol.tol)?;
            if !(residual_tol > 0.0 && residual_tol.is_finite()) {
                return Err(Failure::Usage("--residual-tol must be positive".into()));
            }
            let s1 = load_system(&system1)?;
            let s2 = load_system(&system2)?;
            let iso = find_isomorphism(&s1, &s2, &tol, residual_tol).map_err(domain(format!(
                "{} vs {}",
                system1.display(),
                system2.display()
            )))?;
            emit(&out, &formats::matrix_to_csv(&iso.t), stdout)
        }
        Command::IoeqCheck {
            equation,
            system,
            trials,
            seed,
            tol,
            out,
        } => {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            let eq = formats::equation_from_json(&read(&equation)?)
                .map_err(domain(equation.display().to_string()))?;
            let sys = load_system(&system)?;
            let report = check_equation(&eq, &sys, trials, seed, tol).map_err(domain(format!(
                "{} on {}",
                equation.display(),
                system.display()
            )))?;
            emit(&out, &to_tagged_json(&report), stdout)
        }
        Command::SwitchedSim { system, switched, out } => {
            let sys = load_system(&system)?;
            let sw = formats::switched_from_csv(&read(&switched)?, sys.sched_dim(), sys.input_dim())
                .map_err(domain(switched.display().to_string()))?;
            let w = embed_switched_input(&sw).map_err(domain(switched.display().to_string()))?;
            let run = simulate(&sys, &Vector::zeros(sys.state_dim()), &w)
                .map_err(domain("switched simulation"))?;
            emit(&out, &formats::outputs_to_csv(&run.outputs), stdout)
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let name = cli.command.name();
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "alpv {name}: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain { context, source }) => {
            let _ = writeln!(stderr, "alpv {name}: {context}: {} [{source}]", source.kind());
            EXIT_DOMAIN
        }
    }
}

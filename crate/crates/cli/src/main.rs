//! Command-line frontend: run verifications, emit cost tables and the
//! cost-comparison grid, export ensembles, protocols, and run reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O
//! error. Output is deterministic: maps are ordered and floats are
//! printed with 12 significant digits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use locc_lab_core::catalog::{self, cost_formula_thm5, cost_formula_thm7, theorem_expected_cost};
use locc_lab_core::engine::{self, EngineOpts, RunReport};
use locc_lab_core::ensembles::{self, Ensemble};
use locc_lab_core::protocol::{validate, CostTally, ProtocolTree, Valuation};
use locc_lab_core::serialize::{csv_field, ensemble_to_json, fmt_sig12, report_to_csv, to_json};

#[derive(Parser)]
#[command(
    name = "locc-lab",
    about = "Simulate and verify entanglement-assisted local discrimination protocols",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct OutArg {
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in protocols.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run one protocol and verify discrimination, orthogonality
    /// preservation, recovery (where annotated), and the declared cost.
    Verify {
        /// Protocol number, 1..=10.
        #[arg(long)]
        theorem: u8,
        /// Comma-separated dimensions; defaults to the smallest legal tuple.
        #[arg(long)]
        dims: Option<String>,
        /// `uniform` or a path to a JSON object {member label: weight}.
        #[arg(long, default_value = "uniform")]
        prior: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Run a user-supplied protocol tree (JSON) instead of the built-in.
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Declared vs simulated cost for protocols 3..=7 at one dimension tuple.
    CostTable {
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Emit the cost-comparison grid at d1 = d2 = 4 as CSV.
    Fig41 {
        #[arg(long, default_value_t = 20)]
        d3_max: usize,
        #[arg(long, default_value_t = 20)]
        d4_max: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Export a state set as JSON (layout, amplitudes, family manifest).
    Ensemble {
        /// One of ghz4, ghz5, asym4, sym4, sym5.
        #[arg(long)]
        name: String,
        #[arg(long)]
        dims: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Export a built-in protocol tree as JSON.
    ExportProtocol {
        #[arg(long)]
        theorem: u8,
        #[arg(long)]
        dims: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("LOCC_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Usage(String),
    Io(String),
}

impl From<locc_lab_core::Error> for CliError {
    fn from(e: locc_lab_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn write_out(out: &OutArg, content: &str) -> Result<(), CliError> {
    match &out.out {
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Io(e.to_string()))
        }
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
    }
}

fn parse_dims(id: u8, dims: &Option<String>) -> Result<Vec<usize>, CliError> {
    let dims = match dims {
        None => catalog::default_dims(id),
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("bad --dims: {e}")))?,
    };
    catalog::check_dims(id, &dims)?;
    Ok(dims)
}

fn dispatch(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::List { format, out } => {
            let reg = catalog::registry();
            let content = match format {
                Format::Json => to_json(&reg)? + "\n",
                _ => {
                    let mut s = String::from("id  ensemble  default dims  resources\n");
                    for info in &reg {
                        s.push_str(&format!(
                            "{:>2}  {:<8}  {:<12}  {}\n    {}\n",
                            info.id,
                            info.ensemble,
                            info.default_dims
                                .iter()
                                .map(|d| d.to_string())
                                .collect::<Vec<_>>()
                                .join(","),
                            info.resources,
                            info.description,
                        ));
                    }
                    s
                }
            };
            write_out(&out, &content)?;
            Ok(true)
        }
        Command::Verify {
            theorem,
            dims,
            prior,
            format,
            protocol,
            out,
        } => {
            let dims = parse_dims(theorem, &dims)?;
            let ens = catalog::build_ensemble(theorem, &dims)?;
            let tree = match &protocol {
                None => catalog::build(theorem, &dims)?,
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<ProtocolTree>(&text)
                        .map_err(|e| CliError::Usage(format!("bad protocol file: {e}")))?
                }
            };
            let prior_map = load_prior(&prior, &ens)?;
            let verification = verify_theorem(theorem, &dims, &tree, &ens, prior_map.as_ref())?;
            let content = match format {
                Format::Json => to_json(&verification)? + "\n",
                Format::Csv => report_to_csv(&verification.report, &Valuation::default()),
                Format::Text => verification.render_text(),
            };
            write_out(&out, &content)?;
            Ok(verification.passed)
        }
        Command::CostTable { dims, format, out } => {
            let dims = parse_dims(3, &dims)?;
            let rows = cost_table(&dims)?;
            let content = match format {
                Format::Json => to_json(&rows)? + "\n",
                Format::Csv => {
                    let mut s =
                        String::from("theorem,copies,declared_ebits,simulated_ebits,delta\n");
                    for r in &rows {
                        s.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.theorem,
                            csv_field(&r.copies),
                            fmt_sig12(r.declared_ebits),
                            fmt_sig12(r.simulated_ebits),
                            fmt_sig12(r.delta),
                        ));
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!(
                        "declared vs simulated cost at dims {}\n",
                        dims.iter()
                            .map(|d| d.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    );
                    for r in &rows {
                        s.push_str(&format!(
                            "theorem {:>2}: declared {:<16} simulated {:<16} delta {:<10}  [{}]\n",
                            r.theorem,
                            fmt_sig12(r.declared_ebits),
                            fmt_sig12(r.simulated_ebits),
                            fmt_sig12(r.delta),
                            r.copies,
                        ));
                    }
                    s
                }
            };
            write_out(&out, &content)?;
            let ok = rows.iter().all(|r| r.delta < 1e-9);
            Ok(ok)
        }
        Command::Fig41 {
            d3_max,
            d4_max,
            out,
        } => {
            let rows = catalog::fig41_data(d3_max, d4_max)?;
            let mut s = String::from("d3,d4,thm4_ebits,thm5_ebits\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.d3,
                    r.d4,
                    fmt_sig12(r.thm4_ebits),
                    fmt_sig12(r.thm5_ebits)
                ));
            }
            write_out(&out, &s)?;
            Ok(true)
        }
        Command::Ensemble { name, dims, out } => {
            let ens = build_named_ensemble(&name, &dims)?;
            let content = ensemble_to_json(&ens)? + "\n";
            write_out(&out, &content)?;
            Ok(true)
        }
        Command::ExportProtocol { theorem, dims, out } => {
            let dims = parse_dims(theorem, &dims)?;
            let tree = catalog::build(theorem, &dims)?;
            let content = to_json(&tree)? + "\n";
            write_out(&out, &content)?;
            Ok(true)
        }
    }
}

fn load_prior(prior: &str, ens: &Ensemble) -> Result<Option<BTreeMap<String, f64>>, CliError> {
    if prior == "uniform" {
        return Ok(None);
    }
    let text = std::fs::read_to_string(prior).map_err(|e| CliError::Io(format!("{prior}: {e}")))?;
    let map: BTreeMap<String, f64> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad prior file: {e}")))?;
    for k in map.keys() {
        if ens.member(k).is_none() {
            return Err(CliError::Usage(format!("prior names unknown member {k}")));
        }
    }
    Ok(Some(map))
}

fn build_named_ensemble(name: &str, dims: &Option<String>) -> Result<Ensemble, CliError> {
    let parse = |s: &Option<String>, default: Vec<usize>| -> Result<Vec<usize>, CliError> {
        match s {
            None => Ok(default),
            Some(text) => text
                .split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("bad --dims: {e}"))),
        }
    };
    let ens = match name {
        "ghz4" => ensembles::ghz_basis(4)?,
        "ghz5" => ensembles::ghz_basis(5)?,
        "asym4" => {
            let d = parse(dims, vec![3; 4])?;
            if d.len() != 4 {
                return Err(CliError::Usage("asym4 takes four dimensions".into()));
            }
            ensembles::ops_asym4([d[0], d[1], d[2], d[3]])?
        }
        "sym4" => {
            let d = parse(dims, vec![3; 4])?;
            if d.len() != 4 {
                return Err(CliError::Usage("sym4 takes four dimensions".into()));
            }
            ensembles::ops_sym4([d[0], d[1], d[2], d[3]])?
        }
        "sym5" => {
            let d = parse(dims, vec![3; 5])?;
            if d.len() != 5 {
                return Err(CliError::Usage("sym5 takes five dimensions".into()));
            }
            ensembles::ops_sym5([d[0], d[1], d[2], d[3], d[4]])?
        }
        other => return Err(CliError::Usage(format!("unknown ensemble {other}"))),
    };
    Ok(ens)
}

#[derive(serde::Serialize)]
struct Verification {
    theorem: u8,
    dims: Vec<usize>,
    passed: bool,
    identified: usize,
    member_count: usize,
    expected_ebits: f64,
    declared_ebits: f64,
    cost_delta: f64,
    max_ortho_overlap: f64,
    recovery_min_fidelity: Option<f64>,
    fractional: Vec<String>,
    failures: Vec<String>,
    report: RunReport,
}

impl Verification {
    fn render_text(&self) -> String {
        let mut s = format!(
            "theorem {} at dims {}\n",
            self.theorem,
            self.dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        s.push_str(&format!(
            "  {}/{} identified, {:.3} ebit\n",
            self.identified, self.member_count, self.expected_ebits
        ));
        s.push_str(&format!(
            "  orthogonality preservation: max overlap {} over {} checks\n",
            fmt_sig12(self.max_ortho_overlap),
            self.report.ortho.checks
        ));
        for e in self.report.expected_cost.entries.values() {
            s.push_str(&format!(
                "  consumed {} {}: {} copies\n",
                e.kind,
                e.holders.join("-"),
                fmt_sig12(e.copies)
            ));
        }
        for line in &self.fractional {
            s.push_str(&format!("  {line}\n"));
        }
        s.push_str(&format!(
            "  declared ebits {} vs simulated {} (delta {})\n",
            fmt_sig12(self.declared_ebits),
            fmt_sig12(self.expected_ebits),
            fmt_sig12(self.cost_delta)
        ));
        if let Some(f) = self.recovery_min_fidelity {
            s.push_str(&format!("  recovery: min fidelity {}\n", fmt_sig12(f)));
        }
        for n in &self.report.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        if self.passed {
            s.push_str("  VERDICT: PASS\n");
        } else {
            s.push_str("  VERDICT: FAIL\n");
            let failures = serde_json::json!({ "failures": self.failures });
            s.push_str(&format!("{failures}\n"));
        }
        s
    }
}

fn verify_theorem(
    id: u8,
    dims: &[usize],
    tree: &ProtocolTree,
    ens: &Ensemble,
    prior: Option<&BTreeMap<String, f64>>,
) -> Result<Verification, CliError> {
    let vr = validate(tree);
    if !vr.is_valid() {
        return Err(CliError::Usage(format!(
            "protocol fails structural validation: {} violations, first: {} at {}",
            vr.violations.len(),
            vr.violations[0].message,
            vr.violations[0].path
        )));
    }
    let opts = EngineOpts::default();
    let report = engine::run(tree, ens, prior, &opts)?;
    let mut failures = report.failures.clone();
    for v in &report.ortho.violations {
        failures.push(format!(
            "orthogonality violated at {} between {} and {} ({:.3e})",
            v.node, v.pair.0, v.pair.1, v.overlap
        ));
    }
    let declared = theorem_expected_cost(id, dims)?;
    let delta = declared.max_copy_delta(&report.expected_cost);
    if delta > 1e-9 {
        failures.push(format!(
            "expected consumption deviates from the declared configuration by {delta:.3e} copies; \
             declared {:?} vs simulated {:?}",
            tally_brief(&declared),
            tally_brief(&report.expected_cost)
        ));
    }
    let recovery = if tree.recovery.is_empty() {
        None
    } else {
        let rec = engine::verify_recovery(tree, ens)?;
        if !rec.ok {
            failures.push(format!(
                "recovery restores members only to fidelity {:.12}",
                rec.min_fidelity
            ));
        }
        Some(rec.min_fidelity)
    };
    let mut fractional = Vec::new();
    if id == 5 {
        let f = cost_formula_thm5([dims[0], dims[1], dims[2], dims[3]]);
        let copies = report
            .expected_cost
            .entries
            .get("EPR(2) B-D")
            .map_or(0.0, |e| e.copies);
        fractional.push(format!(
            "expected B-D EPR(2) copies: {} = {}/{}",
            fmt_sig12(copies),
            f.r,
            f.s
        ));
    }
    if id == 7 {
        let f = cost_formula_thm7([dims[0], dims[1], dims[2], dims[3]]);
        let copies = report
            .expected_cost
            .entries
            .get("EPR(2) A-B")
            .map_or(0.0, |e| e.copies);
        fractional.push(format!(
            "expected A-B EPR(2) copies: {} = {}/{}",
            fmt_sig12(copies),
            f.r,
            f.s
        ));
    }
    let identified = report
        .members
        .iter()
        .filter(|m| (m.total_probability - 1.0).abs() <= 1e-10)
        .count();
    let passed = failures.is_empty() && report.success && identified == ens.len();
    Ok(Verification {
        theorem: id,
        dims: dims.to_vec(),
        passed,
        identified,
        member_count: ens.len(),
        expected_ebits: report.expected_ebits,
        declared_ebits: declared.ebit_total(&opts.valuation),
        cost_delta: delta,
        max_ortho_overlap: report.ortho.max_overlap,
        recovery_min_fidelity: recovery,
        fractional,
        failures,
        report,
    })
}

fn tally_brief(t: &CostTally) -> Vec<String> {
    t.entries
        .iter()
        .map(|(k, e)| format!("{k} x {}", fmt_sig12(e.copies)))
        .collect()
}

#[derive(serde::Serialize)]
struct CostRow {
    theorem: u8,
    copies: String,
    declared_ebits: f64,
    simulated_ebits: f64,
    delta: f64,
}

fn cost_table(dims: &[usize]) -> Result<Vec<CostRow>, CliError> {
    let valuation = Valuation::default();
    let mut rows = Vec::new();
    for id in 3..=7u8 {
        let ens = catalog::build_ensemble(id, dims)?;
        let tree = catalog::build(id, dims)?;
        let report = engine::run(&tree, &ens, None, &EngineOpts::default())?;
        let declared = theorem_expected_cost(id, dims)?;
        let declared_ebits = declared.ebit_total(&valuation);
        let simulated = report.expected_cost.ebit_total(&valuation);
        rows.push(CostRow {
            theorem: id,
            copies: tally_brief(&report.expected_cost).join("; "),
            declared_ebits,
            simulated_ebits: simulated,
            delta: (declared_ebits - simulated).abs(),
        });
    }
    Ok(rows)
}

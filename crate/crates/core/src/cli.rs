//! Command-line surface.  Every command is a pure function of its flags and
//! input files: fixed seeds, canonical orderings, and buffered output make
//! two identical invocations byte-identical.

use crate::bounds::{
    attach_upper_bound, ic_lower_bound, ic_lower_bound_eq, lift_to_uv, with_achieved, FunctionSpec,
};
use crate::eq;
use crate::error::{Error, Result};
use crate::graph::CharGraph;
use crate::prob::JointPMF;
use crate::protocol::{transcript_distribution, ProtocolSpec};
use crate::wyner::{
    achievability_search, brute_force_oracle, eq_sup_closed_form, relaxed_sup_upper_bound,
    OracleConfig, SearchConfig, SupResult,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    /// key<TAB>value pairs only
    Tsv,
    /// key<TAB>value pairs plus an aligned table
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "icbound",
    version,
    about = "Certified information-complexity lower bounds via Wyner common information"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output mode
    #[arg(long, global = true, value_enum, default_value_t = OutputMode::Table)]
    pub format: OutputMode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the maximal biclique classes of a bivariate distribution
    Bicliques {
        #[arg(long)]
        input: PathBuf,
    },
    /// Bracket sup H(U|Q) + H(V|Q) over Markov auxiliaries
    Sup {
        #[command(subcommand)]
        method: SupMethod,
    },
    /// Certified information-complexity lower bounds
    #[command(name = "ic-bound")]
    IcBound {
        #[command(subcommand)]
        which: IcBoundCmd,
    },
    /// Exact information costs of interactive protocols
    Protocol {
        #[command(subcommand)]
        which: ProtocolCmd,
    },
    /// Assembled tables over instance families
    Report {
        #[command(subcommand)]
        which: ReportCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum SupMethod {
    /// Certified upper bound by the per-edge class-cap relaxation
    Relax {
        #[arg(long)]
        input: PathBuf,
    },
    /// Feasible achievability search (penalty ascent, deterministic seed)
    Search {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: u32,
        /// Write the witness p(Q,U,V) in the pmf file format
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Brute-force oracle for tiny instances
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum IcBoundCmd {
    /// Closed forms for uniform k-ary equality
    Eq {
        #[arg(long)]
        k: u64,
    },
    /// Certified bound for an explicit distribution and function
    Dist {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProtocolCmd {
    /// Information cost and verification residuals of a protocol
    Cost {
        /// Built-in protocol name (ternary_eq, two_bit_eq_randomized)
        #[arg(long, conflicts_with = "spec")]
        name: Option<String>,
        /// Protocol file
        #[arg(long, requires = "function")]
        spec: Option<PathBuf>,
        /// Function file (required with --spec)
        #[arg(long)]
        function: Option<PathBuf>,
        /// Input distribution (defaults to uniform independent inputs)
        #[arg(long)]
        input: Option<PathBuf>,
        /// `all` to include every verification check
        #[arg(long)]
        checks: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// The equality-family table: classes, sup, bounds, and gaps
    Eq {
        #[arg(long = "k-max")]
        k_max: u64,
    },
}

/// Fixed-point bit values: 6 decimals, round half to even (std behavior).
fn fmt_bits(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

/// Residuals in scientific notation (they would all print as 0.000000).
fn fmt_residual(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6e}")
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_pmf(path: &Path) -> Result<JointPMF> {
    JointPMF::parse(&read_file(path)?)?.validate()
}

struct Output {
    pairs: Vec<(String, String)>,
    lines: Vec<String>,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

impl Output {
    fn new() -> Self {
        Output {
            pairs: Vec::new(),
            lines: Vec::new(),
            table: None,
        }
    }

    fn pair(&mut self, key: &str, value: impl Into<String>) {
        self.pairs.push((key.to_string(), value.into()));
    }

    fn render(&self, mode: OutputMode) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        for (k, v) in &self.pairs {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        if mode == OutputMode::Table {
            let (header, rows) = match &self.table {
                Some((h, r)) => (h.clone(), r.clone()),
                None if !self.pairs.is_empty() => (
                    vec!["field".to_string(), "value".to_string()],
                    self.pairs
                        .iter()
                        .map(|(k, v)| vec![k.clone(), v.clone()])
                        .collect(),
                ),
                None => return out,
            };
            if rows.is_empty() {
                return out;
            }
            out.push('\n');
            let ncols = header.len();
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (c, cell) in row.iter().enumerate() {
                    widths[c] = widths[c].max(cell.len());
                }
            }
            let fmt_row = |cells: &[String]| -> String {
                let mut line = String::new();
                for c in 0..ncols {
                    if c > 0 {
                        line.push_str("  ");
                    }
                    let cell = cells.get(c).map(String::as_str).unwrap_or("");
                    line.push_str(&format!("{cell:<width$}", width = widths[c]));
                }
                line.trim_end().to_string()
            };
            out.push_str(&fmt_row(&header));
            out.push('\n');
            for row in &rows {
                out.push_str(&fmt_row(row));
                out.push('\n');
            }
        }
        out
    }
}

fn sup_pairs(out: &mut Output, sup: &SupResult) {
    out.pair("sup_kind", sup.kind.as_str());
    out.pair("sup_value", fmt_bits(sup.value));
    out.pair("marginal_residual", fmt_residual(sup.marginal_residual));
    out.pair("markov_residual", fmt_residual(sup.markov_residual));
}

fn dump_witness(sup: &SupResult, path: &Path) -> Result<()> {
    let witness = sup
        .witness
        .as_ref()
        .ok_or_else(|| Error::InconsistentInputs("no witness to dump".into()))?;
    std::fs::write(path, witness.to_pmf().to_file_string())?;
    Ok(())
}

fn run_sup(method: &SupMethod) -> Result<Output> {
    let mut out = Output::new();
    match method {
        SupMethod::Relax { input } => {
            let pmf = load_pmf(input)?;
            let dec = CharGraph::build(&pmf)?.maximal_bicliques()?;
            let sup = relaxed_sup_upper_bound(&pmf, &dec)?;
            sup_pairs(&mut out, &sup);
            out.pair("input_digest", sup.input_digest.clone());
        }
        SupMethod::Search {
            input,
            seed,
            restarts,
            witness,
        } => {
            let pmf = load_pmf(input)?;
            let dec = Arc::new(CharGraph::build(&pmf)?.maximal_bicliques()?);
            let cfg = SearchConfig {
                seed: *seed,
                restarts: *restarts,
                ..SearchConfig::default()
            };
            let sup = achievability_search(&pmf, &dec, &cfg)?;
            sup_pairs(&mut out, &sup);
            out.pair("budget_exhausted", sup.budget_exhausted.to_string());
            out.pair("seed", seed.to_string());
            out.pair("restarts", restarts.to_string());
            out.pair("input_digest", sup.input_digest.clone());
            if let Some(path) = witness {
                dump_witness(&sup, path)?;
            }
        }
        SupMethod::Oracle {
            input,
            seed,
            witness,
        } => {
            let pmf = load_pmf(input)?;
            let cfg = OracleConfig {
                seed: *seed,
                ..OracleConfig::default()
            };
            let sup = brute_force_oracle(&pmf, &cfg)?;
            sup_pairs(&mut out, &sup);
            out.pair("seed", seed.to_string());
            out.pair("input_digest", sup.input_digest.clone());
            if let Some(path) = witness {
                dump_witness(&sup, path)?;
            }
        }
    }
    Ok(out)
}

fn run_ic_bound(cmd: &IcBoundCmd) -> Result<Output> {
    let mut out = Output::new();
    match cmd {
        IcBoundCmd::Eq { k } => {
            let report = ic_lower_bound_eq(*k)?;
            out.pair("route", report.route.as_str());
            out.pair("k", k.to_string());
            if *k <= 62 {
                out.pair("classes", eq::class_count(*k).to_string());
            }
            out.pair("sup_upper", fmt_bits(report.sup_upper));
            out.pair(
                "sup_achieved",
                fmt_bits(report.sup_achieved.expect("closed form is achieved")),
            );
            out.pair("ic_lower", fmt_bits(report.ic_lower));
            out.pair("sup_kind", report.provenance.sup_kind.as_str());
            out.pair("input_digest", report.provenance.input_digest.clone());
        }
        IcBoundCmd::Dist {
            input,
            function,
            seed,
            restarts,
        } => {
            let pmf = load_pmf(input)?;
            let f = FunctionSpec::parse(&read_file(function)?)?;
            let lifted = lift_to_uv(&pmf, &f)?;
            let dec = Arc::new(CharGraph::build(&lifted)?.maximal_bicliques()?);
            let relax = relaxed_sup_upper_bound(&lifted, &dec)?;
            let cfg = SearchConfig {
                seed: *seed,
                restarts: *restarts,
                ..SearchConfig::default()
            };
            let search = achievability_search(&lifted, &dec, &cfg)?;
            let report = with_achieved(ic_lower_bound(&pmf, &f, &relax)?, search.value);
            out.pair("route", report.route.as_str());
            out.pair("function", f.name());
            out.pair("classes", dec.num_classes().to_string());
            out.pair("sup_upper", fmt_bits(report.sup_upper));
            out.pair("sup_achieved", fmt_bits(search.value));
            out.pair("sup_gap", fmt_bits(report.sup_upper - search.value));
            out.pair("ic_lower", fmt_bits(report.ic_lower));
            out.pair("marginal_residual", fmt_residual(search.marginal_residual));
            out.pair("markov_residual", fmt_residual(search.markov_residual));
            out.pair("sup_kind", report.provenance.sup_kind.as_str());
            out.pair("seed", seed.to_string());
            out.pair("restarts", restarts.to_string());
            out.pair("input_digest", report.provenance.input_digest.clone());
        }
    }
    Ok(out)
}

fn resolve_protocol(
    name: &Option<String>,
    spec: &Option<PathBuf>,
    function: &Option<PathBuf>,
    input: &Option<PathBuf>,
) -> Result<(ProtocolSpec, JointPMF, FunctionSpec)> {
    let (p, default_pmf, default_f) = match (name, spec) {
        (Some(n), None) => ProtocolSpec::builtin(n)?,
        (None, Some(path)) => {
            let p = ProtocolSpec::parse(&read_file(path)?)?;
            let f = FunctionSpec::parse(&read_file(
                function
                    .as_ref()
                    .ok_or_else(|| Error::Parse("--spec requires --function".into()))?,
            )?)?;
            let nx = p.x_alphabet().len();
            let ny = p.y_alphabet().len();
            let uniform = JointPMF::new(
                vec![p.x_alphabet().clone(), p.y_alphabet().clone()],
                vec![1.0 / (nx * ny) as f64; nx * ny],
            )?;
            (p, uniform, f)
        }
        _ => {
            return Err(Error::Parse(
                "protocol cost needs exactly one of --name or --spec".into(),
            ))
        }
    };
    let pmf = match input {
        Some(path) => load_pmf(path)?,
        None => default_pmf,
    };
    Ok((p, pmf, default_f))
}

fn run_protocol(cmd: &ProtocolCmd) -> Result<Output> {
    let ProtocolCmd::Cost {
        name,
        spec,
        function,
        input,
        checks,
    } = cmd;
    let (p, pmf, f) = resolve_protocol(name, spec, function, input)?;
    let td = transcript_distribution(&p, &pmf, &f)?;
    let mut out = Output::new();
    out.pair("protocol", p.name());
    let (a, b) = td.information_cost_components()?;
    out.pair("cost", fmt_bits(a + b));
    out.pair("h_m", fmt_bits(td.joint().entropy(&["M"])?));
    out.pair("i_x_m_given_y", fmt_bits(a));
    out.pair("i_y_m_given_x", fmt_bits(b));
    let (ca, cb) = td.verify_correctness()?;
    out.pair("correct_alice_residual", fmt_residual(ca));
    out.pair("correct_bob_residual", fmt_residual(cb));
    if checks.as_deref() == Some("all") {
        for (i, r) in td.verify_round_markov()?.iter().enumerate() {
            out.pair(&format!("markov_round_{}", i + 1), fmt_residual(*r));
        }
        for (i, v) in td.verify_monotonicity()?.iter().enumerate() {
            out.pair(&format!("i_xy_given_prefix_{i}"), fmt_bits(*v));
        }
        match td.verify_appendix_chain() {
            Ok(v) => out.pair("appendix_chain", fmt_residual(v)),
            Err(Error::PreconditionUnmet(_)) => out.pair("appendix_chain", "precondition_unmet"),
            Err(e) => return Err(e),
        }
        let chain = td.hm_chain_check()?;
        out.pair("i_m_xy", fmt_bits(chain.i_m_xy));
        out.pair("i_xy", fmt_bits(chain.i_xy));
        out.pair("i_xy_given_m", fmt_bits(chain.i_xy_given_m));
        out.pair("hm_chain_ok", chain.chain_ok.to_string());
    }
    Ok(out)
}

fn run_report(cmd: &ReportCmd) -> Result<Output> {
    let ReportCmd::Eq { k_max } = cmd;
    if *k_max < 2 {
        return Err(Error::BadK(*k_max));
    }
    if *k_max > 62 {
        return Err(Error::TooLarge(format!(
            "k-max {k_max} exceeds the 62 supported by exact class counting"
        )));
    }
    let mut out = Output::new();
    let mut rows = Vec::new();
    for k in 2..=*k_max {
        let report = ic_lower_bound_eq(k)?;
        let sup = eq_sup_closed_form(k)?;
        out.pair("k", k.to_string());
        out.pair("classes", eq::class_count(k).to_string());
        out.pair("sup", fmt_bits(sup));
        out.pair("ic_lower", fmt_bits(report.ic_lower));
        let mut row = vec![
            k.to_string(),
            eq::class_count(k).to_string(),
            fmt_bits(sup),
            fmt_bits(report.ic_lower),
        ];
        let protocol = match k {
            3 => Some("ternary_eq"),
            4 => Some("two_bit_eq_randomized"),
            _ => None,
        };
        if let Some(name) = protocol {
            let (p, pmf, f) = ProtocolSpec::builtin(name)?;
            let cost = transcript_distribution(&p, &pmf, &f)?.information_cost()?;
            let attached = attach_upper_bound(report, cost)?;
            out.pair("ic_upper", fmt_bits(cost));
            out.pair("gap", fmt_bits(attached.gap.expect("gap set")));
            row.push(fmt_bits(cost));
            row.push(fmt_bits(attached.gap.expect("gap set")));
        } else {
            row.push("-".to_string());
            row.push("-".to_string());
        }
        rows.push(row);
    }
    out.table = Some((
        ["k", "classes", "sup", "ic_lower", "ic_upper", "gap"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows,
    ));
    Ok(out)
}

/// Execute a parsed command line and return the full output text.
pub fn run(cli: &Cli) -> Result<String> {
    let out = match &cli.command {
        Command::Bicliques { input } => {
            let pmf = load_pmf(input)?;
            let dec = CharGraph::build(&pmf)?.maximal_bicliques()?;
            let mut out = Output::new();
            for c in 0..dec.num_classes() {
                out.lines.push(dec.describe_class(c));
            }
            out
        }
        Command::Sup { method } => run_sup(method)?,
        Command::IcBound { which } => run_ic_bound(which)?,
        Command::Protocol { which } => run_protocol(which)?,
        Command::Report { which } => run_report(which)?,
    };
    Ok(out.render(cli.format))
}

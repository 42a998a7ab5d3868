//! Command-line front end.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fock::{number_operator, symmetric_product, theta_operator, BasisWindow, FockOperator, StateSpec};
use crate::kernel::{export_kernel, import_kernel, KernelModel, Variant, WignerKernel};
use crate::periodics::{f2, r_theta, sawtooth, UnitFunction};
use crate::verify::{full_report, imported_report, Tolerances, VerifyConfig, DEFAULT_SEED};
use crate::wigner::{op_representation, wigner_of_state, NRange, SumOptions, ThetaGrid};

pub const THREADS_ENV: &str = "NPWIGNER_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEVIATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "npwigner", version, about = "Number-phase Wigner kernels, functions and condition checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a kernel and write its base matrix.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Replay samples appended to the file.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Wigner function of a state on an (n, θ) grid.
    Wigner {
        #[command(flatten)]
        common: Common,
        /// number:K | phase:THETA0 | packet:THETA0,WIDTH | super:K1,K2 | mixed:K1,K2
        #[arg(long)]
        state: String,
    },
    /// Check the six conditions and the spectrum identities.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Verify a kernel file written by `kernel` instead of a built-in variant.
        #[arg(long)]
        import: Option<PathBuf>,
    },
    /// Wigner representation of an operator.
    Repr {
        #[command(flatten)]
        common: Common,
        /// theta | N | sym(N,theta) | identity
        #[arg(long)]
        op: String,
    },
    /// Columns θ, U(θ), f₂(θ), R(θ), [θ] on [−2π, 2π].
    Tabulate {
        #[arg(long, default_value_t = 257)]
        nodes: usize,
        /// Series terms for R(θ).
        #[arg(long, default_value_t = 10_000)]
        terms: usize,
        #[arg(long, value_enum, default_value_t = Format::Rows)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Rows,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Uniform,
    Interior,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, default_value = "w2", value_parser = parse_variant)]
    pub variant: Variant,
    #[arg(long, default_value_t = 64)]
    pub nmax: i64,
    /// Defaults to −nmax, or 0 for s1/s2.
    #[arg(long, allow_hyphen_values = true)]
    pub nmin: Option<i64>,
    #[arg(long, default_value_t = 256)]
    pub theta_nodes: usize,
    #[arg(long, value_enum, default_value_t = GridKind::Uniform)]
    pub grid: GridKind,
    /// Override every pass threshold.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Extra n beyond the doubled window in n-sums.
    #[arg(long, default_value_t = 16)]
    pub buffer: i64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Rows)]
    pub format: Format,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    match Variant::from_str(s) {
        Ok(Variant::Custom) => Err("custom kernels cannot be built from the command line".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

impl Common {
    pub fn window(&self) -> Result<BasisWindow> {
        if self.variant.is_physical() {
            if let Some(m) = self.nmin {
                if m != 0 {
                    return Err(Error::InvalidArgument(format!("variant {} needs nmin = 0", self.variant)));
                }
            }
            return Ok(BasisWindow::physical(self.nmax));
        }
        BasisWindow::new(self.nmin.unwrap_or(-self.nmax), self.nmax)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol.map(Tolerances::uniform).unwrap_or_default()
    }

    pub fn theta_grid(&self) -> ThetaGrid {
        match self.grid {
            GridKind::Uniform => ThetaGrid::uniform(self.theta_nodes),
            GridKind::Interior => ThetaGrid::interior(self.theta_nodes),
        }
    }
}

/// Operators accepted by `repr`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpSpec {
    Theta,
    Number,
    Symmetric,
    Identity,
}

pub const OP_GRAMMAR: &str = "theta | N | sym(N,theta) | identity";

impl FromStr for OpSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "theta" => Ok(OpSpec::Theta),
            "N" | "n" => Ok(OpSpec::Number),
            "sym(N,theta)" | "sym(theta,N)" => Ok(OpSpec::Symmetric),
            "identity" | "I" => Ok(OpSpec::Identity),
            _ => Err(Error::Parse(format!("bad operator '{s}'; expected {OP_GRAMMAR}"))),
        }
    }
}

impl OpSpec {
    pub fn build(&self, window: BasisWindow) -> FockOperator {
        match self {
            OpSpec::Theta => theta_operator(window),
            OpSpec::Number => number_operator(window),
            OpSpec::Symmetric => symmetric_product(window),
            OpSpec::Identity => FockOperator::identity(window),
        }
    }
}

/// What a command produced: text for the output target and an exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
    /// Short note for stderr.
    pub note: Option<String>,
}

fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(cmd: &str, echo: &str, tol: &Tolerances) -> String {
    format!(
        "# npwigner {}\n# command: {cmd} {echo}\n# tolerances: algebraic={:e} exact={:e} truncated={} phase_diagonal={:e} violation_floor={:e}\n",
        env!("CARGO_PKG_VERSION"),
        tol.algebraic,
        tol.exact,
        tol.truncated.map(|t| format!("{t:e}")).unwrap_or_else(|| "50/dim".into()),
        tol.phase_diagonal,
        tol.violation_floor,
    )
}

fn echo(c: &Common, w: BasisWindow) -> String {
    format!(
        "variant={} window=[{}, {}] theta_nodes={} grid={:?} seed={} buffer={} format={:?}",
        c.variant, w.n_min, w.n_max, c.theta_nodes, c.grid, c.seed, c.buffer, c.format
    )
    .to_lowercase()
}

fn kernel_for_grid(c: &Common, window: BasisWindow, nrange: NRange) -> Result<WignerKernel> {
    WignerKernel::for_states(c.variant, window, nrange.lo, nrange.hi)
}

pub fn cmd_kernel(c: &Common, samples: usize) -> Result<Outcome> {
    let w = c.window()?;
    let kern = kernel_for_grid(c, w, NRange::of_window(w))?;
    let support = kern.support_antidiagonals(1e-12);
    let herm = kern.base().indexed_iter().map(|((i, j), z)| (z - kern.base()[[j, i]].conj()).norm()).fold(0.0, f64::max);
    let note = format!(
        "base window [{}, {}]; nonzero antidiagonals K+L: {} of {}; hermitian residual {:.3e}",
        kern.window().n_min,
        kern.window().n_max,
        if support.len() <= 8 { format!("{support:?}") } else { format!("{} distinct", support.len()) },
        2 * kern.window().dim() - 1,
        herm
    );
    let text = match c.format {
        Format::Rows => {
            let mut s = header("kernel", &echo(c, w), &c.tolerances());
            s.push_str(&format!("# {note}\n"));
            s.push_str(&export_kernel(&kern, samples));
            s
        }
        Format::Json => {
            let rows: Vec<_> = kern
                .base()
                .indexed_iter()
                .map(|((i, j), z)| json!([kern.window().n_min + i as i64, kern.window().n_min + j as i64, z.re, z.im]))
                .collect();
            let doc = json!({
                "provenance": provenance_json("kernel", c, w),
                "variant": kern.variant().to_string(),
                "physical": kern.physical(),
                "base_window": [kern.window().n_min, kern.window().n_max],
                "support_antidiagonals": support,
                "hermitian_residual": herm,
                "base": rows,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    };
    Ok(Outcome { text, code: EXIT_OK, note: Some(note) })
}

fn provenance_json(cmd: &str, c: &Common, w: BasisWindow) -> serde_json::Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd,
        "variant": c.variant.to_string(),
        "window": [w.n_min, w.n_max],
        "theta_nodes": c.theta_nodes,
        "grid": format!("{:?}", c.grid).to_lowercase(),
        "seed": c.seed,
        "buffer": c.buffer,
        "tolerances": c.tolerances(),
    })
}

fn grid_rows<F: Fn(usize, usize) -> Vec<f64>>(nrange: NRange, theta: &ThetaGrid, cols: &str, f: F) -> String {
    let mut s = format!("n theta {cols}\n");
    for (i, n) in nrange.iter().enumerate() {
        for (j, &t) in theta.nodes().iter().enumerate() {
            let vals: Vec<String> = f(i, j).into_iter().map(g17).collect();
            let _ = writeln!(s, "{n} {} {}", g17(t), vals.join(" "));
        }
    }
    s
}

pub fn cmd_wigner(c: &Common, state: &str) -> Result<Outcome> {
    let spec: StateSpec = state.parse()?;
    let w = c.window()?;
    let rho = spec.density(w)?;
    let nrange = NRange::of_window(w);
    let kern = kernel_for_grid(c, w, nrange)?;
    let theta = c.theta_grid();
    let g = wigner_of_state(&kern, &rho, nrange, &theta)?;
    let text = match c.format {
        Format::Rows => {
            let mut s = header("wigner", &format!("{} state={state}", echo(c, w)), &c.tolerances());
            let _ = writeln!(s, "# max |Im W| = {:.3e}", g.max_imag);
            s + &grid_rows(nrange, &theta, "value", |i, j| vec![g.values[[i, j]]])
        }
        Format::Json => {
            let values: Vec<Vec<f64>> = g.values.outer_iter().map(|r| r.to_vec()).collect();
            let doc = json!({
                "provenance": provenance_json("wigner", c, w),
                "state": state,
                "n": nrange.iter().collect::<Vec<_>>(),
                "theta": theta.nodes(),
                "values": values,
                "max_imag": g.max_imag,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    };
    Ok(Outcome { text, code: EXIT_OK, note: None })
}

pub fn cmd_repr(c: &Common, op: &str) -> Result<Outcome> {
    let spec: OpSpec = op.parse()?;
    let w = c.window()?;
    let a = spec.build(w);
    let nrange = NRange::of_window(w);
    let kern = kernel_for_grid(c, w, nrange)?;
    let theta = c.theta_grid();
    let rep = op_representation(&kern, &a, nrange, &theta)?;
    let text = match c.format {
        Format::Rows => {
            let s = header("repr", &format!("{} op={op}", echo(c, w)), &c.tolerances());
            s + &grid_rows(nrange, &theta, "re im", |i, j| {
                let z = rep.values[[i, j]];
                vec![z.re, z.im]
            })
        }
        Format::Json => {
            let re: Vec<Vec<f64>> = rep.values.outer_iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
            let im: Vec<Vec<f64>> = rep.values.outer_iter().map(|r| r.iter().map(|z| z.im).collect()).collect();
            let doc = json!({
                "provenance": provenance_json("repr", c, w),
                "op": op,
                "n": nrange.iter().collect::<Vec<_>>(),
                "theta": theta.nodes(),
                "re": re,
                "im": im,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    };
    Ok(Outcome { text, code: EXIT_OK, note: None })
}

pub fn cmd_verify(c: &Common, import: Option<&PathBuf>) -> Result<Outcome> {
    let cfg = VerifyConfig {
        tolerances: c.tolerances(),
        seed: c.seed,
        theta_nodes: c.theta_nodes,
        sums: SumOptions { buffer: c.buffer, ..SumOptions::default() },
        ..VerifyConfig::default()
    };
    let (report, w) = match import {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", p.display())))?;
            let imp = import_kernel(&text)?;
            let r = imported_report(&imp, &cfg)?;
            let w = BasisWindow::new(r.window[0], r.window[1])?;
            (r, w)
        }
        None => {
            let w = c.window()?;
            (full_report(c.variant, w, &cfg)?, w)
        }
    };
    let code = if report.matches_expected() { EXIT_OK } else { EXIT_DEVIATION };
    let text = match c.format {
        Format::Rows => {
            let mut e = echo(c, w);
            if let Some(p) = import {
                e = format!(
                    "import={} {}",
                    p.display(),
                    e.replacen(&format!("variant={}", c.variant), &format!("variant={}", report.variant), 1)
                );
            }
            header("verify", &e, &c.tolerances()) + &report.to_table()
        }
        Format::Json => report.to_json() + "\n",
    };
    let note = (code != EXIT_OK).then(|| format!("{} check(s) deviate from the expected verdicts", report.deviations().len()));
    Ok(Outcome { text, code, note })
}

pub fn cmd_tabulate(nodes: usize, terms: usize, format: Format) -> Result<Outcome> {
    if nodes < 2 {
        return Err(Error::InvalidArgument("tabulate needs at least 2 nodes".into()));
    }
    let u = UnitFunction::lighthill();
    let xs: Vec<f64> = (0..nodes).map(|j| -TAU + 2.0 * TAU * j as f64 / (nodes - 1) as f64).collect();
    let rows: Vec<[f64; 5]> = xs.iter().map(|&t| [t, u.eval(t), f2(t), r_theta(t, terms), sawtooth(t)]).collect();
    let text = match format {
        Format::Rows => {
            let mut s = format!(
                "# npwigner {}\n# command: tabulate nodes={nodes} terms={terms}\ntheta U f2 R sawtooth\n",
                env!("CARGO_PKG_VERSION")
            );
            for r in &rows {
                let _ = writeln!(s, "{}", r.iter().map(|&x| g17(x)).collect::<Vec<_>>().join(" "));
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "provenance": {"version": env!("CARGO_PKG_VERSION"), "command": "tabulate", "nodes": nodes, "terms": terms},
                "columns": ["theta", "U", "f2", "R", "sawtooth"],
                "rows": rows,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    };
    Ok(Outcome { text, code: EXIT_OK, note: None })
}

pub fn dispatch(cli: &Cli) -> Result<(Outcome, Option<PathBuf>)> {
    match &cli.command {
        Command::Kernel { common, samples } => Ok((cmd_kernel(common, *samples)?, common.output.clone())),
        Command::Wigner { common, state } => Ok((cmd_wigner(common, state)?, common.output.clone())),
        Command::Verify { common, import } => Ok((cmd_verify(common, import.as_ref())?, common.output.clone())),
        Command::Repr { common, op } => Ok((cmd_repr(common, op)?, common.output.clone())),
        Command::Tabulate { nodes, terms, format, output } => Ok((cmd_tabulate(*nodes, *terms, *format)?, output.clone())),
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        if n == 0 {
            return Err(format!("{THREADS_ENV} must be positive"));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match dispatch(&cli) {
        Ok((out, path)) => {
            if let Some(n) = &out.note {
                eprintln!("{n}");
            }
            match path {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, &out.text) {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        return EXIT_USAGE;
                    }
                }
                None => {
                    use std::io::Write;
                    let mut so = std::io::stdout().lock();
                    if let Err(e) = so.write_all(out.text.as_bytes()).and_then(|_| so.flush()) {
                        if e.kind() != std::io::ErrorKind::BrokenPipe {
                            eprintln!("error: {e}");
                            return EXIT_USAGE;
                        }
                    }
                }
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn op_grammar() {
        assert_eq!("sym(N, theta)".parse::<OpSpec>().unwrap(), OpSpec::Symmetric);
        assert_eq!("N".parse::<OpSpec>().unwrap(), OpSpec::Number);
        let e = "phi".parse::<OpSpec>().unwrap_err().to_string();
        assert!(e.contains(OP_GRAMMAR));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["npwigner", "kernel", "--variant", "w9"]), EXIT_USAGE);
        assert_eq!(run(["npwigner", "wigner", "--variant", "s1", "--nmax", "4", "--state", "bogus:1"]), EXIT_USAGE);
    }

    #[test]
    fn physical_window_forced() {
        let c = Cli::try_parse_from(["npwigner", "repr", "--variant", "s2", "--nmax", "5", "--op", "N"]).unwrap();
        let Command::Repr { common, .. } = c.command else { panic!() };
        assert_eq!(common.window().unwrap(), BasisWindow::physical(5));
    }
}

//! `kaluza`: sequence checks, lattice decompositions, the two-sided
//! factorization certificate, discretizers and counterexample reproduction.
//!
//! Exit codes: 0 when the verdict is true, 1 when it is false, 2 on usage or
//! input errors. Reports are single-line JSON with every float written to 17
//! significant digits.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use kaluza::contdens::{
    discretize_corollary3, discretize_lemma2, Cor3Cutoffs, FnHandle, MeasureFn, QuadConfig,
};
use kaluza::counterexamples::run_by_name;
use kaluza::seqcheck::{
    gen_completely_monotone, gen_log_convex, is_completely_monotone, is_kaluza, is_log_convex,
    DEFAULT_TOL,
};
use kaluza::walkfactor::{
    certify_id_two_sided, gen_vspec, tail_log_convexity, CertifyConfig, TwoSidedCertificate, VSpec,
};
use kaluza::{
    certify_id_nonneg, compound_geometric, CheckReport, CompoundGeometricRep, Error, GeomTail,
    IdCertificate, LatticePmf, NonnegSeq, Verdict,
};

/// Length of generated fixtures when `--cutoff-support` is not given.
const GEN_LEN: usize = 64;
/// Tail length of generated drivers.
const GEN_VSPEC_LEN: usize = 32;

#[derive(Parser)]
#[command(
    name = "kaluza",
    version,
    about = "Infinite-divisibility checks and certificates for lattice laws"
)]
struct Cli {
    /// Tolerance for verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Recursion order (decompose), grid length (discretize lemma2).
    #[arg(long, global = true)]
    cutoff_steps: Option<usize>,
    /// Geometric truncation index (factorize), term cap (discretize corollary3), generated length.
    #[arg(long, global = true)]
    cutoff_support: Option<usize>,
    /// Number of mgf grid points for the factorization check.
    #[arg(long, global = true, default_value_t = 20)]
    grid: usize,
    /// Seed for `gen` inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this path.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test a sequence for log-convexity, the Kaluza property or complete monotonicity.
    Check {
        kind: CheckKind,
        /// Inline JSON, a file path, `-` for stdin or `gen`.
        input: String,
        /// Highest difference order for `cm`; defaults to the length minus one.
        #[arg(long)]
        max_order: Option<usize>,
    },
    /// Compound geometric form and canonical coefficients of a pmf on {0, 1, ...}.
    Decompose { input: String },
    /// Two-sided certificate for the law driven by a VSpec.
    Factorize { input: String },
    /// Lattice discretization of a measure function or a pair of tail functions.
    Discretize { input: String },
    /// Reproduce one of the counterexamples ex1 to ex5.
    Reproduce {
        example: String,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        w2: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Logconvex,
    Kaluza,
    Cm,
}

/// Validated global options.
struct RunConfig {
    tol: f64,
    cutoff_steps: Option<usize>,
    cutoff_support: Option<usize>,
    grid_points: usize,
    seed: u64,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, Fail> {
        if !(cli.tol > 0.0 && cli.tol.is_finite()) {
            return Err(Fail::usage(format!(
                "--tol must be positive, got {}",
                cli.tol
            )));
        }
        for (name, v) in [
            ("--cutoff-steps", cli.cutoff_steps),
            ("--cutoff-support", cli.cutoff_support),
        ] {
            if v == Some(0) {
                return Err(Fail::usage(format!("{name} must be at least 1")));
            }
        }
        if cli.grid == 0 {
            return Err(Fail::usage("--grid must be at least 1"));
        }
        Ok(Self {
            tol: cli.tol,
            cutoff_steps: cli.cutoff_steps,
            cutoff_support: cli.cutoff_support,
            grid_points: cli.grid,
            seed: cli.seed,
        })
    }
}

/// A command that could not produce a verdict.
struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::usage(e.to_string())
    }
}

/// Verdict plus serialized report.
struct Outcome {
    ok: bool,
    report: String,
}

impl Outcome {
    fn new<T: Serialize>(ok: bool, report: &T) -> Result<Self, Fail> {
        Ok(Self {
            ok,
            report: to_json(report)?,
        })
    }
}

/// Writes floats as `{:.16e}`, i.e. 17 significant digits.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Fail> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    v.serialize(&mut ser)
        .map_err(|e| Fail::usage(format!("cannot serialize report: {e}")))?;
    String::from_utf8(buf).map_err(|e| Fail::usage(e.to_string()))
}

/// Reads inline JSON, `-` (stdin) or a file. `gen` is handled by the caller.
fn read_input(input: &str) -> Result<String, Fail> {
    let t = input.trim_start();
    if t.starts_with('[') || t.starts_with('{') {
        return Ok(input.to_string());
    }
    if input == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Fail::usage(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(input).map_err(|e| Fail::usage(format!("cannot read {input}: {e}")))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, Fail> {
    serde_json::from_str(text).map_err(|e| Fail::usage(format!("malformed {what}: {e}")))
}

fn cmd_check(
    kind: CheckKind,
    input: &str,
    max_order: Option<usize>,
    cfg: &RunConfig,
) -> Result<Outcome, Fail> {
    let s: NonnegSeq = if input == "gen" {
        let n = cfg.cutoff_support.unwrap_or(GEN_LEN);
        match kind {
            CheckKind::Cm => gen_completely_monotone(cfg.seed, n, 3)?,
            _ => gen_log_convex(cfg.seed, n)?,
        }
    } else {
        parse(&read_input(input)?, "sequence")?
    };
    let report: CheckReport = match kind {
        CheckKind::Logconvex => is_log_convex(&s, cfg.tol)?,
        CheckKind::Kaluza => is_kaluza(&s, cfg.tol)?,
        CheckKind::Cm => {
            let order = max_order.unwrap_or(s.len().saturating_sub(1));
            is_completely_monotone(&s, order, cfg.tol)?
        }
    };
    Outcome::new(report.verdict, &report)
}

#[derive(Serialize)]
struct DecomposeReport {
    compound: CompoundGeometricRep,
    certificate: IdCertificate,
}

fn cmd_decompose(input: &str, cfg: &RunConfig) -> Result<Outcome, Fail> {
    let p: LatticePmf = if input == "gen" {
        let s = gen_log_convex(cfg.seed, cfg.cutoff_support.unwrap_or(GEN_LEN))?;
        let total: f64 = s.values.iter().sum();
        LatticePmf::new(s.values.iter().map(|x| x / total).collect(), 0.0)?
    } else {
        let text = read_input(input)?;
        match serde_json::from_str::<Vec<f64>>(&text) {
            Ok(probs) => LatticePmf::new(probs, 0.0)?,
            Err(_) => parse(&text, "pmf")?,
        }
    };
    let order = cfg.cutoff_steps.unwrap_or(p.len().saturating_sub(1)).max(1);
    let compound = compound_geometric(&p, cfg.tol)?;
    let certificate = certify_id_nonneg(&p, order, cfg.tol)?;
    let ok = certificate.verdict == Verdict::Certified;
    Outcome::new(
        ok,
        &DecomposeReport {
            compound,
            certificate,
        },
    )
}

/// Driver fields before the log-convexity precondition is applied.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVSpec {
    v_neg: GeomTail,
    v_pos: GeomTail,
    #[serde(default)]
    v0: f64,
}

#[derive(Serialize)]
struct PreconditionReport {
    certified: bool,
    side: &'static str,
    first_violation: Option<[i64; 3]>,
    margin: f64,
    detail: String,
}

fn cmd_factorize(input: &str, cfg: &RunConfig) -> Result<Outcome, Fail> {
    let v = if input == "gen" {
        gen_vspec(cfg.seed, GEN_VSPEC_LEN)?
    } else {
        let raw: RawVSpec = parse(&read_input(input)?, "VSpec")?;
        for (side, t) in [("v_neg", &raw.v_neg), ("v_pos", &raw.v_pos)] {
            let r = tail_log_convexity(t, DEFAULT_TOL);
            if !r.verdict {
                let report = PreconditionReport {
                    certified: false,
                    side,
                    first_violation: r.first_violation,
                    margin: r.margin,
                    detail: format!("{side} is not log-convex"),
                };
                return Outcome::new(false, &report);
            }
        }
        VSpec::new(raw.v_neg, raw.v_pos, raw.v0)?
    };
    let ccfg = CertifyConfig {
        k: cfg.cutoff_support.or(CertifyConfig::default().k),
        tol: cfg.tol,
        grid_points: cfg.grid_points,
        ..CertifyConfig::default()
    };
    let cert: TwoSidedCertificate = certify_id_two_sided(&v, &ccfg)?;
    Outcome::new(cert.certified, &cert)
}

#[derive(Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
enum DiscretizeInput {
    Lemma2 {
        g: MeasureFn,
        n: usize,
        #[serde(default)]
        m_max: Option<usize>,
    },
    Corollary3 {
        v1: FnHandle,
        v2: FnHandle,
        n: usize,
        #[serde(default)]
        certify: bool,
    },
}

#[derive(Serialize)]
struct Corollary3Report {
    driver: VSpec,
    tails_log_convex: [CheckReport; 2],
    certificate: Option<TwoSidedCertificate>,
}

fn cmd_discretize(input: &str, cfg: &RunConfig) -> Result<Outcome, Fail> {
    let req: DiscretizeInput = parse(&read_input(input)?, "discretization request")?;
    match req {
        DiscretizeInput::Lemma2 { g, n, m_max } => {
            let m = m_max.or(cfg.cutoff_steps).unwrap_or(8 * n.max(1));
            let d = discretize_lemma2(&g, n, m, cfg.tol)?;
            Outcome::new(d.log_convex.verdict && d.bound_holds, &d)
        }
        DiscretizeInput::Corollary3 { v1, v2, n, certify } => {
            let cutoffs = Cor3Cutoffs {
                max_terms: cfg
                    .cutoff_support
                    .unwrap_or(Cor3Cutoffs::default().max_terms),
                ..Cor3Cutoffs::default()
            };
            let driver = discretize_corollary3(&v1, &v2, n, &cutoffs, &QuadConfig::default())?;
            let tails_log_convex = [
                tail_log_convexity(&driver.v_neg, 1e-8),
                tail_log_convexity(&driver.v_pos, 1e-8),
            ];
            let certificate = if certify {
                let ccfg = CertifyConfig {
                    tol: cfg.tol,
                    grid_points: cfg.grid_points,
                    ..CertifyConfig::default()
                };
                Some(certify_id_two_sided(&driver, &ccfg)?)
            } else {
                None
            };
            let ok = tails_log_convex.iter().all(|r| r.verdict)
                && certificate.as_ref().is_none_or(|c| c.certified);
            Outcome::new(
                ok,
                &Corollary3Report {
                    driver,
                    tails_log_convex,
                    certificate,
                },
            )
        }
    }
}

fn cmd_reproduce(example: &str, params: BTreeMap<String, f64>) -> Result<Outcome, Fail> {
    let r = run_by_name(example, &params)?;
    Outcome::new(r.reproduced(), &r)
}

fn run(cli: &Cli) -> Result<Outcome, Fail> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.cmd {
        Cmd::Check {
            kind,
            input,
            max_order,
        } => cmd_check(*kind, input, *max_order, &cfg),
        Cmd::Decompose { input } => cmd_decompose(input, &cfg),
        Cmd::Factorize { input } => cmd_factorize(input, &cfg),
        Cmd::Discretize { input } => cmd_discretize(input, &cfg),
        Cmd::Reproduce {
            example,
            rho,
            w2,
            b,
            c,
            alpha,
        } => {
            let params: BTreeMap<String, f64> = [
                ("rho", rho),
                ("w2", w2),
                ("b", b),
                ("c", c),
                ("alpha", alpha),
            ]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect();
            cmd_reproduce(example, params)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(io::stdout().lock(), "{}", out.report);
            if let Some(path) = &cli.json_out {
                if let Err(e) = std::fs::write(path, format!("{}\n", out.report)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

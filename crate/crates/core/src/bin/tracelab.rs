use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tracelab::config::{Oracle, ProblemConfig};
use tracelab::cplx::{self, c, I};
use tracelab::determinants::{self, RegularityReport};
use tracelab::green::{self, ContourValue};
use tracelab::spectrum::{self, plan_contours, Measure, SpectralProblem};
use tracelab::trace::{self, TraceEstimate};
use tracelab::{Error, Result};

#[derive(Parser)]
#[command(
    version,
    about = "Spectra and regularized traces of higher-order operators perturbed by measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regularity classification and the midpoint-atom coefficient
    Analyze(Common),
    /// Eigenvalue table by annulus
    Spectrum(Common),
    /// Cesàro-summed regularized trace against its prediction
    Trace(Common),
    /// Contour integrals of the Green function against the measure
    Green(Common),
}

#[derive(Args)]
struct Common {
    /// Problem description (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; results go to stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Annulus range `a..b`
    #[arg(long, value_parser = parse_range)]
    annuli: Option<Range<usize>>,
    /// Tolerance for the trace verdict
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    oracle: Option<OracleArg>,
    /// Run the invariant checks on the given configuration instead
    #[arg(long)]
    seed_check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    ClosedForm,
    Lemma51,
    Green,
    Eigensum,
    All,
}

impl From<OracleArg> for Oracle {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::ClosedForm => Oracle::ClosedForm,
            OracleArg::Lemma51 => Oracle::Lemma51,
            OracleArg::Green => Oracle::Green,
            OracleArg::Eigensum => Oracle::Eigensum,
            OracleArg::All => Oracle::All,
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if b <= a {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..b)
}

/// Where a command writes its results.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn writer(&self, name: &str) -> Result<Box<dyn Write>> {
        match &self.dir {
            Some(d) => {
                fs::create_dir_all(d).map_err(|e| io_error(d, e))?;
                let path = d.join(name);
                let f = File::create(&path).map_err(|e| io_error(&path, e))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            None => Ok(Box::new(io::stdout())),
        }
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::Config(e.to_string()))
    }
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn csv_error(e: io::Error) -> Error {
    Error::Config(format!("writing CSV: {e}"))
}

struct Job {
    cfg: ProblemConfig,
    sink: Sink,
    seed_check: bool,
}

fn job(common: Common) -> Result<Job> {
    let mut cfg = ProblemConfig::load(&common.config)?;
    if let Some(r) = common.annuli {
        cfg.run.annuli = [r.start, r.end];
    }
    if let Some(t) = common.tolerance {
        cfg.run.tolerance = t;
    }
    if let Some(o) = common.oracle {
        cfg.run.oracle = o.into();
    }
    let dir = common.out.or_else(|| cfg.output.dir.clone());
    Ok(Job {
        cfg,
        sink: Sink { dir },
        seed_check: common.seed_check,
    })
}

#[derive(Serialize)]
struct Oracles {
    #[serde(with = "cplx::pair_opt")]
    closed_form: Option<Complex64>,
    #[serde(with = "cplx::pair_opt")]
    lemma51: Option<Complex64>,
    /// Cesàro limit of the contour integrals divided by `-i h`.
    #[serde(with = "cplx::pair_opt")]
    green: Option<Complex64>,
    /// Cesàro trace limit times `2 pi / h`.
    #[serde(with = "cplx::pair_opt")]
    eigensum: Option<Complex64>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct Analysis<'a> {
    report: &'a RegularityReport,
    oracles: Oracles,
}

/// Phases of the first two contours, as used by the half-line integral.
fn contour_phases(problem: &SpectralProblem, cfg: &ProblemConfig) -> (f64, f64) {
    let opts = cfg.run.search.options();
    let plan = plan_contours(&problem.report, problem.n(), problem.layout().max_density(), &opts);
    (plan.radius(0).rem_euclid(TAU), plan.radius(1).rem_euclid(TAU))
}

fn green_values(problem: &SpectralProblem, cfg: &ProblemConfig) -> Result<Vec<ContourValue>> {
    let opts = cfg.run.search.options();
    let plan = plan_contours(&problem.report, problem.n(), problem.layout().max_density(), &opts);
    let radii: Vec<(usize, f64)> = cfg.annuli().map(|l| (l, plan.radius(l))).collect();
    green::contour_sequence(
        &problem.bcs,
        &problem.measure,
        &radii,
        cfg.run.green.centered,
        cfg.run.green.options(),
    )
}

fn cmd_analyze(job: &Job) -> Result<()> {
    let cfg = &job.cfg;
    let bcs = cfg.boundary_conditions()?;
    let report = determinants::regularity(&bcs)?;
    let oracle = cfg.run.oracle;
    let mut oracles = Oracles {
        closed_form: None,
        lemma51: None,
        green: None,
        eigensum: None,
        notes: vec![],
    };
    if oracle.includes(Oracle::ClosedForm) {
        oracles.closed_form = Some(report.frak_cap);
    }
    let problem = SpectralProblem::new(bcs, cfg.measure.clone())?;
    if oracle.includes(Oracle::Lemma51) && report.frak_c.is_some() {
        let (r0, r1) = contour_phases(&problem, cfg);
        match green::frak_c_via_lemma51(&report, r0, r1) {
            Ok(l) => oracles.lemma51 = Some(l.value),
            Err(e) => oracles.notes.push(format!("lemma51: {e}")),
        }
    }
    let h = problem.measure.midpoint_mass();
    let wants_measure = oracle.includes(Oracle::Green) || oracle.includes(Oracle::Eigensum);
    if wants_measure && h.norm() == 0.0 {
        oracles
            .notes
            .push("green/eigensum: the measure has no atom at 1/2".into());
    } else if wants_measure {
        if oracle.includes(Oracle::Green) {
            let values = green_values(&problem, cfg)?;
            let seq: Vec<Complex64> = values.iter().map(|v| v.value).collect();
            let ces = trace::cesaro(&seq)?;
            oracles.green = Some(ces.limit / (-I * h));
        }
        if oracle.includes(Oracle::Eigensum) {
            let est = trace::estimate_trace(&problem, cfg.annuli(), &cfg.run.search.options(), cfg.run.tolerance)?;
            oracles.eigensum = Some(est.limit_estimate * TAU / h);
        }
    }
    job.sink.json(
        "report.json",
        &Analysis {
            report: &report,
            oracles,
        },
    )
}

fn cmd_spectrum(job: &Job) -> Result<()> {
    let problem = job.cfg.problem()?;
    let slices = spectrum::find_eigenvalues(&problem, job.cfg.annuli(), &job.cfg.run.search.options())?;
    spectrum::write_csv(&slices, job.sink.writer("eigenvalues.csv")?).map_err(csv_error)
}

fn cmd_trace(job: &Job) -> Result<TraceEstimate> {
    let cfg = &job.cfg;
    let problem = cfg.problem()?;
    let rhs = trace::rhs_prediction(&problem);
    if let Err(e @ Error::UnsupportedEndpointDerivative { .. }) = rhs {
        return Err(e);
    }
    let est = trace::estimate_trace(&problem, cfg.annuli(), &cfg.run.search.options(), cfg.run.tolerance)?;
    job.sink.json("trace.json", &est)?;
    if job.sink.dir.is_some() {
        trace::write_csv(&est, job.sink.writer("trace.csv")?).map_err(csv_error)?;
    }
    Ok(est)
}

fn cmd_green(job: &Job) -> Result<()> {
    let problem = job.cfg.problem()?;
    let values = green_values(&problem, &job.cfg)?;
    green::write_csv(&values, job.sink.writer("green.csv")?).map_err(csv_error)
}

struct Check {
    name: &'static str,
    outcome: std::result::Result<(), String>,
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn text(e: Error) -> String {
    e.to_string()
}

/// Invariant checks on the configured problem; cheap enough to run before a long job.
fn seed_checks(cfg: &ProblemConfig) -> Vec<Check> {
    let mut out = vec![];
    let bcs = match cfg.boundary_conditions() {
        Ok(b) => b,
        Err(e) => {
            out.push(Check {
                name: "boundary conditions valid",
                outcome: Err(text(e)),
            });
            return out;
        }
    };
    out.push(Check {
        name: "normalize is idempotent",
        outcome: bcs
            .normalize()
            .map_err(text)
            .and_then(|b| ensure(b == bcs, || "second pass changed the forms".into())),
    });
    let report = match determinants::regularity(&bcs) {
        Ok(r) => r,
        Err(e) => {
            out.push(Check {
                name: "regular",
                outcome: Err(text(e)),
            });
            return out;
        }
    };
    if let Some(ld) = report.leading_determinants {
        let ctx = determinants::RootOfUnityContext::new(bcs.n);
        let rk = ctx.pow(bcs.kappa as i64);
        out.push(Check {
            name: "m2 = -rho^kappa m",
            outcome: ensure((ld.m2 + rk * ld.m).norm() <= 1e-9 * ld.m.norm(), || {
                format!("m2 = {}", ld.m2)
            }),
        });
        let prod = report.xi1() * report.xi2();
        out.push(Check {
            name: "xi1 xi2 = -rho^-kappa",
            outcome: ensure((prod + rk.inv()).norm() <= 1e-9, || format!("xi1 xi2 = {prod}")),
        });
    }
    let problem = match SpectralProblem::new(bcs.clone(), cfg.measure.clone()) {
        Ok(p) => p,
        Err(e) => {
            out.push(Check {
                name: "measure valid",
                outcome: Err(text(e)),
            });
            return out;
        }
    };
    if report.frak_c.is_some() && !report.flags.ratio_on_positive_axis {
        let (r0, r1) = contour_phases(&problem, cfg);
        out.push(Check {
            name: "half-line integral reproduces closed form",
            outcome: green::frak_c_via_lemma51(&report, r0, r1).map_err(text).and_then(|l| {
                ensure(
                    (l.value - report.frak_cap).norm() <= 1e-8 * report.frak_cap.norm().max(1.0),
                    || format!("{} vs {}", l.value, report.frak_cap),
                )
            }),
        });
    }
    let free = spectrum::Layout::free();
    let ev = spectrum::BlockEvaluator::new(&bcs, &free);
    out.push(Check {
        name: "block determinant reduces to the characteristic determinant",
        outcome: (1..20)
            .map(|k| Complex64::from_polar(3.0 * k as f64, 0.07 * k as f64 / bcs.n as f64))
            .try_for_each(|z| {
                let a = ev.eval(z, c(0.0, 0.0));
                let b = determinants::char_det(&bcs, z).map_err(text)?;
                ensure(
                    (a.unscaled() - b.unscaled()).norm() <= 1e-10 * b.unscaled().norm(),
                    || format!("z = {z}"),
                )
            }),
    });
    let opts = cfg.run.search.options();
    let few = 0..cfg.annuli().end.min(8);
    out.push(Check {
        name: "roots match winding numbers",
        outcome: spectrum::find_eigenvalues(&problem, few.clone(), &opts)
            .map(|_| ())
            .map_err(text),
    });
    let zero = SpectralProblem::new(bcs.clone(), Measure::zero());
    out.push(Check {
        name: "zero measure leaves the spectrum unchanged",
        outcome: zero
            .and_then(|z| spectrum::find_paired(&z, few, &opts))
            .map_err(text)
            .and_then(|s| {
                let sums = trace::partial_sums(&s, c(0.0, 0.0));
                ensure(sums.iter().all(|v| v.norm() == 0.0), || format!("{sums:?}"))
            }),
    });
    out
}

fn run(cli: Cli) -> Result<i32> {
    let (common, kind) = match cli.command {
        Command::Analyze(c) => (c, 0),
        Command::Spectrum(c) => (c, 1),
        Command::Trace(c) => (c, 2),
        Command::Green(c) => (c, 3),
    };
    let job = job(common)?;
    if job.seed_check {
        let checks = seed_checks(&job.cfg);
        let mut failed = 0;
        for ch in &checks {
            match &ch.outcome {
                Ok(()) => println!("PASS {}", ch.name),
                Err(e) => {
                    failed += 1;
                    println!("FAIL {}: {e}", ch.name);
                }
            }
        }
        return Ok(if failed == 0 { 0 } else { 4 });
    }
    match kind {
        0 => cmd_analyze(&job)?,
        1 => cmd_spectrum(&job)?,
        2 => {
            let est = cmd_trace(&job)?;
            eprintln!(
                "limit {:.6} ± {:.2e}, prediction {}, verdict {:?}",
                est.limit_estimate,
                est.error_bar,
                est.rhs_prediction.map_or("none".into(), |r| format!("{r:.6}")),
                est.verdict
            );
        }
        _ => cmd_green(&job)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end: phase limitations, slope bounds, off-axis
//! criteria, and closed-loop simulation for Lur'e feedback systems.

mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use phaselim::analysis::{
    find_violation, k_pl, offaxis_conjecture_k, offaxis_ct, offaxis_dt_separable,
    offaxis_reduced, offaxis_reduced_at, phase_profile, slope_report, AnalysisConfig,
};
use phaselim::ct_limits::{rho_c, rho_c_odd, CtLimitParams, SweepConfig};
use phaselim::dt_limits::{
    achieving_set, integral_ratio, n_max, phi_d, phi_tilde_d, psi_d, rho_d, rho_d_odd,
    sparse_multiplier, DtInterval, Sign,
};
use phaselim::lti::nyquist_value;
use phaselim::lure::{simulate, SimConfig};
use phaselim::multipliers::MultiplierClass;
use phaselim::{Error, NonlinearityClass, Result};

use io::{deliver, deliver_with_summary, num, render_json, RunManifest};

/// Phase limitations of Zames-Falb multipliers and slope bounds for Lur'e
/// feedback systems.
#[derive(Debug, Parser)]
#[command(name = "phaselim", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Bisection tolerance for gain searches.
    #[arg(long, global = true, default_value_t = 1e-4)]
    tol: f64,

    /// Frequency-grid density override (per-subcommand default otherwise).
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Separating-line margin, relative to 1/k.
    #[arg(long, global = true, default_value_t = 1e-6)]
    margin: f64,
}

impl Cli {
    fn analysis_config(&self) -> Result<AnalysisConfig> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Invalid("--tol must be positive and finite".into()));
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return Err(Error::Invalid(
                "--margin must be nonnegative and finite".into(),
            ));
        }
        let mut cfg = AnalysisConfig::default();
        cfg.tol = self.tol;
        cfg.margin = self.margin;
        if let Some(gp) = self.grid_points {
            if gp < 16 {
                return Err(Error::Invalid("--grid-points must be at least 16".into()));
            }
            cfg.phase_points = gp;
            cfg.locus_points = gp;
            cfg.ct_locus_points = gp;
        }
        Ok(cfg)
    }

    fn sweep_config(&self) -> SweepConfig {
        let mut cfg = SweepConfig::default();
        if let Some(gp) = self.grid_points {
            cfg.min_points_per_decade = gp;
        }
        cfg
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Continuous-time phase limitation over two frequency intervals.
    RhoCt(RhoCtArgs),
    /// Discrete-time phase limitation over one frequency interval.
    RhoDt(RhoDtArgs),
    /// Smallest slope at which a phase limitation precludes any multiplier.
    Kpl(KplArgs),
    /// Nyquist value of a plant.
    Nyquist(NyquistArgs),
    /// Off-axis circle-criterion checks.
    Offaxis(OffaxisArgs),
    /// Slope report: Nyquist value, limitation bound, off-axis bounds.
    Report(ReportArgs),
    /// Closed-loop time-domain simulation.
    Simulate(SimulateArgs),
    /// Limiting sparse multiplier of a discrete interval.
    Sparse(SparseArgs),
    /// CSV dump of the phase curves behind a violation analysis.
    PhaseDump(PhaseDumpArgs),
}

#[derive(Debug, Args)]
struct RhoCtArgs {
    /// Lower edge of the first interval (rad/s).
    #[arg(long)]
    a: f64,
    /// Upper edge of the first interval.
    #[arg(long)]
    b: f64,
    /// Lower edge of the second interval.
    #[arg(long)]
    c: f64,
    /// Upper edge of the second interval.
    #[arg(long)]
    d: f64,
    /// Weight of the second interval's phase requirement.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Use the odd-nonlinearity multiplier class.
    #[arg(long)]
    odd: bool,
    /// Write JSON here instead of stdout (manifest goes next to it).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RhoDtArgs {
    /// Lower edge of the interval (rad/sample, within [0, pi]).
    #[arg(long)]
    a: f64,
    /// Upper edge of the interval.
    #[arg(long)]
    b: f64,
    /// Use the odd-nonlinearity multiplier class.
    #[arg(long)]
    odd: bool,
    /// Also report the achieving sets of both signs.
    #[arg(long)]
    achieving: bool,
    /// Relative tolerance for achieving-set membership.
    #[arg(long, default_value_t = 1e-9)]
    achieving_tol: f64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KplArgs {
    /// Plant JSON file ({"domain", "num", "den"}).
    #[arg(long)]
    plant: PathBuf,
    /// Use the odd-nonlinearity multiplier class.
    #[arg(long)]
    odd: bool,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NyquistArgs {
    /// Plant JSON file.
    #[arg(long)]
    plant: PathBuf,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OffaxisArgs {
    #[command(subcommand)]
    which: OffaxisCmd,
}

#[derive(Debug, Subcommand)]
enum OffaxisCmd {
    /// Continuous off-axis criterion at a given gain.
    Ct {
        /// Plant JSON file (continuous).
        #[arg(long)]
        plant: PathBuf,
        /// Gain to test.
        #[arg(long)]
        k: f64,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced discrete off-axis criterion (check at --k, else search).
    Rd {
        /// Plant JSON file (discrete).
        #[arg(long)]
        plant: PathBuf,
        /// Slope bound to test; omit to search for the largest.
        #[arg(long)]
        k: Option<f64>,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Direct discrete transcription of the off-axis criterion
    /// (check at --k, else search) — a false conjecture, for comparison.
    Conj {
        /// Plant JSON file (discrete).
        #[arg(long)]
        plant: PathBuf,
        /// Gain to test; omit to search for the largest separable gain.
        #[arg(long)]
        k: Option<f64>,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Plant JSON file (discrete).
    #[arg(long)]
    plant: PathBuf,
    /// Use the odd-nonlinearity multiplier class.
    #[arg(long)]
    odd: bool,
    /// Documented multiplier-synthesis slope to attach (not recomputed).
    #[arg(long)]
    kzf_ref: Option<f64>,
    /// Documented counterexample slope to attach (not recomputed).
    #[arg(long)]
    kc_ref: Option<f64>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Plant JSON file.
    #[arg(long)]
    plant: PathBuf,
    /// Nonlinearity JSON file.
    #[arg(long)]
    nl: PathBuf,
    /// Input JSON file ({"f": signal?, "g": signal?, "x0": [...]?}).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Horizon: seconds (continuous) or samples (discrete).
    #[arg(long)]
    duration: f64,
    /// Integrator step in seconds (continuous plants only).
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Write the CSV series (t,v,w) here; flags JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SparseArgs {
    /// Lower edge of the interval (rad/sample).
    #[arg(long)]
    a: f64,
    /// Upper edge of the interval.
    #[arg(long)]
    b: f64,
    /// Use the odd-nonlinearity multiplier class.
    #[arg(long)]
    odd: bool,
    /// Achieving-set sign: "pos", "neg", or "auto" (sign of the extremal ratio).
    #[arg(long, default_value = "auto")]
    sign: String,
    /// Convex weights over the achieving set (comma-separated; uniform
    /// when omitted).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Margin keeping the l1 norm strictly below one.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Relative tolerance for achieving-set membership.
    #[arg(long, default_value_t = 1e-9)]
    achieving_tol: f64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhaseDumpArgs {
    /// Plant JSON file (discrete).
    #[arg(long)]
    plant: PathBuf,
    /// Loop gain.
    #[arg(long)]
    k: f64,
    /// Use the odd-nonlinearity multiplier class.
    #[arg(long)]
    odd: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn klass_of(odd: bool) -> NonlinearityClass {
    if odd {
        NonlinearityClass::Odd
    } else {
        NonlinearityClass::NonOdd
    }
}

fn klass_name(klass: NonlinearityClass) -> &'static str {
    match klass {
        NonlinearityClass::NonOdd => "non-odd",
        NonlinearityClass::Odd => "odd",
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(match e {
            Error::Invalid(_) => 2,
            Error::Numerical(_) => 1,
        });
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::RhoCt(args) => run_rho_ct(cli, args),
        Command::RhoDt(args) => run_rho_dt(cli, args),
        Command::Kpl(args) => run_kpl(cli, args),
        Command::Nyquist(args) => run_nyquist(cli, args),
        Command::Offaxis(args) => run_offaxis(cli, &args.which),
        Command::Report(args) => run_report(cli, args),
        Command::Simulate(args) => run_simulate(cli, args),
        Command::Sparse(args) => run_sparse(cli, args),
        Command::PhaseDump(args) => run_phase_dump(cli, args),
    }
}

fn run_rho_ct(cli: &Cli, args: &RhoCtArgs) -> Result<()> {
    let params = CtLimitParams::new(args.a, args.b, args.c, args.d, args.kappa)?;
    let sweep = cli.sweep_config();
    let klass = klass_of(args.odd);
    let limit = match klass {
        NonlinearityClass::NonOdd => rho_c(&params, &sweep)?,
        NonlinearityClass::Odd => rho_c_odd(&params, &sweep)?,
    };
    let value = json!({
        "rho": num(limit.rho),
        "angle_deg": num(limit.angle_deg),
        "argmax": limit.argmax,
        "klass": klass_name(klass),
    });
    let manifest = RunManifest::new("rho-ct")
        .param("a", args.a)
        .param("b", args.b)
        .param("c", args.c)
        .param("d", args.d)
        .param("kappa", args.kappa)
        .param("odd", args.odd)
        .param_opt("grid_points", cli.grid_points);
    deliver(args.out.as_deref(), &render_json(&value), manifest)
}

fn run_rho_dt(_cli: &Cli, args: &RhoDtArgs) -> Result<()> {
    let iv = DtInterval::new(args.a, args.b)?;
    let klass = klass_of(args.odd);
    let limit = match klass {
        NonlinearityClass::NonOdd => rho_d(&iv)?,
        NonlinearityClass::Odd => rho_d_odd(&iv)?,
    };
    let mut value = json!({
        "rho": num(limit.rho),
        "angle_deg": num(limit.angle_deg),
        "n_max": n_max(&iv)?,
        "argmax": limit.argmax,
        "klass": klass_name(klass),
    });
    if args.achieving {
        let pos = achieving_set(&iv, klass, Sign::Positive, args.achieving_tol)?;
        let neg = achieving_set(&iv, klass, Sign::Negative, args.achieving_tol)?;
        value["achieving"] = json!({ "pos": pos.members, "neg": neg.members });
    }
    let manifest = RunManifest::new("rho-dt")
        .param("a", args.a)
        .param("b", args.b)
        .param("odd", args.odd)
        .param("achieving", args.achieving)
        .param("achieving_tol", args.achieving_tol);
    deliver(args.out.as_deref(), &render_json(&value), manifest)
}

fn run_kpl(cli: &Cli, args: &KplArgs) -> Result<()> {
    let tf = io::read_plant(&args.plant)?;
    let cfg = cli.analysis_config()?;
    let klass = klass_of(args.odd);
    let est = k_pl(&tf, klass, &cfg)?;
    let cert = if est.inactive {
        None
    } else {
        find_violation(&tf, est.k_pl, klass, &cfg)?
    };
    let value = json!({
        "k_pl": num(est.k_pl),
        "k_n": num(est.k_n),
        "inactive": est.inactive,
        "non_monotone": est.non_monotone,
        "certificate": cert.map(|c| json!({
            "interval": { "a": num(c.interval.a()), "b": num(c.interval.b()) },
            "k": num(c.k),
            "required_angle_deg": num(c.required_angle_deg),
            "limit_angle_deg": num(c.limit_angle_deg),
        })),
        "klass": klass_name(klass),
    });
    let manifest = RunManifest::new("kpl")
        .input(&args.plant)
        .param("odd", args.odd)
        .param("tol", cli.tol)
        .param_opt("grid_points", cli.grid_points);
    deliver(args.out.as_deref(), &render_json(&value), manifest)
}

fn run_nyquist(cli: &Cli, args: &NyquistArgs) -> Result<()> {
    let tf = io::read_plant(&args.plant)?;
    let points = cli.grid_points.unwrap_or(10_001);
    let k_n = nyquist_value(&tf, points)?;
    let value = json!({ "k_n": num(k_n) });
    let manifest = RunManifest::new("nyquist")
        .input(&args.plant)
        .param("grid_points", points);
    deliver(args.out.as_deref(), &render_json(&value), manifest)
}

fn run_offaxis(cli: &Cli, cmd: &OffaxisCmd) -> Result<()> {
    let cfg = cli.analysis_config()?;
    match cmd {
        OffaxisCmd::Ct { plant, k, out } => {
            let tf = io::read_plant(plant)?;
            let separable = offaxis_ct(&tf, *k, &cfg)?;
            let value = json!({ "criterion": "ct", "k": num(*k), "separable": separable });
            let manifest = RunManifest::new("offaxis-ct")
                .input(plant)
                .param("k", k)
                .param("margin", cli.margin);
            deliver(out.as_deref(), &render_json(&value), manifest)
        }
        OffaxisCmd::Rd { plant, k, out } => {
            let tf = io::read_plant(plant)?;
            let value = match k {
                Some(k2) => {
                    let holds = offaxis_reduced_at(&tf, *k2, &cfg)?;
                    json!({ "criterion": "rd", "k": num(*k2), "holds": holds })
                }
                None => {
                    let r = offaxis_reduced(&tf, &cfg)?;
                    json!({ "criterion": "rd", "k_ro": num(r.k_ro), "applicable": r.applicable })
                }
            };
            let manifest = RunManifest::new("offaxis-rd")
                .input(plant)
                .param_opt("k", *k)
                .param("tol", cli.tol);
            deliver(out.as_deref(), &render_json(&value), manifest)
        }
        OffaxisCmd::Conj { plant, k, out } => {
            let tf = io::read_plant(plant)?;
            let value = match k {
                Some(gain) => {
                    let separable = offaxis_dt_separable(&tf, *gain, &cfg)?;
                    json!({ "criterion": "conj", "k": num(*gain), "separable": separable })
                }
                None => {
                    let k_o = offaxis_conjecture_k(&tf, &cfg)?;
                    json!({ "criterion": "conj", "k_o": num(k_o) })
                }
            };
            let manifest = RunManifest::new("offaxis-conj")
                .input(plant)
                .param_opt("k", *k)
                .param("tol", cli.tol)
                .param("margin", cli.margin);
            deliver(out.as_deref(), &render_json(&value), manifest)
        }
    }
}

fn run_report(cli: &Cli, args: &ReportArgs) -> Result<()> {
    let tf = io::read_plant(&args.plant)?;
    let cfg = cli.analysis_config()?;
    let klass = klass_of(args.odd);
    let report = slope_report(&tf, klass, args.kzf_ref, args.kc_ref, &cfg)?;
    let value = json!({
        "k_n": num(report.k_n),
        "k_pl": num(report.k_pl),
        "k_pl_inactive": report.k_pl_inactive,
        "k_pl_non_monotone": report.k_pl_non_monotone,
        "k_ro": num(report.k_ro),
        "k_ro_applicable": report.k_ro_applicable,
        "k_o": num(report.k_o),
        "k_zf_ref": report.k_zf_ref.map(num),
        "k_c_ref": report.k_c_ref.map(num),
        "klass": klass_name(klass),
    });
    let manifest = RunManifest::new("report")
        .input(&args.plant)
        .param("odd", args.odd)
        .param("tol", cli.tol)
        .param_opt("kzf_ref", args.kzf_ref)
        .param_opt("kc_ref", args.kc_ref);
    deliver(args.out.as_deref(), &render_json(&value), manifest)
}

fn run_simulate(_cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let tf = io::read_plant(&args.plant)?;
    let nl = io::read_nonlinearity(&args.nl)?;
    let inputs = match &args.input {
        Some(path) => io::read_inputs(path)?,
        None => io::LoopInputs {
            f: phaselim::lure::Signal::Zero,
            g: phaselim::lure::Signal::Zero,
            x0: None,
        },
    };
    let mut cfg = SimConfig::new(args.duration, args.step)?;
    if let Some(x0) = inputs.x0 {
        cfg = cfg.with_x0(x0);
    }
    let result = simulate(&tf, &nl, &inputs.f, &inputs.g, &cfg)?;
    let peak = result.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let summary = json!({
        "samples": result.v.len(),
        "peak_v": num(peak),
        "settled": result.settled,
        "periodic": result.periodic,
        "diverged": result.diverged,
        "final_state": result.final_state.iter().map(|&x| num(x)).collect::<Vec<_>>(),
    });
    let rows: Vec<Vec<f64>> = result
        .t
        .iter()
        .zip(result.v.iter())
        .zip(result.w.iter())
        .map(|((&t, &v), &w)| vec![t, v, w])
        .collect();
    let csv = io::csv_from_rows("t,v,w", &rows);
    let mut manifest = RunManifest::new("simulate")
        .input(&args.plant)
        .input(&args.nl)
        .param("duration", args.duration)
        .param("step", args.step);
    if let Some(input) = &args.input {
        manifest = manifest.input(input);
    }
    deliver_with_summary(args.out.as_deref(), &csv, &summary, manifest)
}

fn run_sparse(_cli: &Cli, args: &SparseArgs) -> Result<()> {
    let iv = DtInterval::new(args.a, args.b)?;
    let klass = klass_of(args.odd);
    let limit = match klass {
        NonlinearityClass::NonOdd => rho_d(&iv)?,
        NonlinearityClass::Odd => rho_d_odd(&iv)?,
    };
    let sign = match args.sign.as_str() {
        "pos" => Sign::Positive,
        "neg" => Sign::Negative,
        "auto" => {
            // Sign of the extremal signed ratio at the first maximizer.
            let n = *limit
                .argmax
                .first()
                .ok_or_else(|| Error::Numerical("empty argmax".into()))?;
            let denom = match klass {
                NonlinearityClass::NonOdd => phi_d(n, &iv)?,
                NonlinearityClass::Odd => phi_tilde_d(n, &iv)?,
            };
            if psi_d(n, &iv)? / denom >= 0.0 {
                Sign::Positive
            } else {
                Sign::Negative
            }
        }
        other => {
            return Err(Error::Invalid(format!(
                "--sign must be pos, neg, or auto, got \"{other}\""
            )))
        }
    };
    let set = achieving_set(&iv, klass, sign, args.achieving_tol)?;
    let weights = match &args.weights {
        Some(w) => w.clone(),
        None => vec![1.0 / set.members.len() as f64; set.members.len()],
    };
    let m = sparse_multiplier(&set, &weights, args.eps)?;
    let ratio = integral_ratio(&m, &iv)?;
    let value = json!({
        "interval": { "a": num(args.a), "b": num(args.b) },
        "rho": num(limit.rho),
        "angle_deg": num(limit.angle_deg),
        "members": set.members,
        "sign": match set.sign { Sign::Positive => "pos", Sign::Negative => "neg" },
        "multiplier": {
            "kind": "fir",
            "taps": m.taps().map(|(n, h)| json!({ "n": n, "h": num(h) })).collect::<Vec<_>>(),
        },
        "l1_norm": num(m.l1_norm()),
        "multiplier_class": match m.klass() {
            MultiplierClass::NonOdd => "non-odd",
            MultiplierClass::Odd => "odd",
            MultiplierClass::Invalid => "invalid",
        },
        "integral_ratio": num(ratio),
        "klass": klass_name(klass),
    });
    let manifest = RunManifest::new("sparse")
        .param("a", args.a)
        .param("b", args.b)
        .param("odd", args.odd)
        .param("sign", &args.sign)
        .param("eps", args.eps)
        .param("achieving_tol", args.achieving_tol)
        .param_opt(
            "weights",
            args.weights.as_ref().map(|w| {
                w.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            }),
        );
    deliver(args.out.as_deref(), &render_json(&value), manifest)
}

fn run_phase_dump(cli: &Cli, args: &PhaseDumpArgs) -> Result<()> {
    let tf = io::read_plant(&args.plant)?;
    let cfg = cli.analysis_config()?;
    let klass = klass_of(args.odd);
    let rows = phase_profile(&tf, args.k, klass, &cfg)?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.omega, r.phase_1pkg_deg, r.ideal_phase_deg, r.limit_angle_deg])
        .collect();
    let csv = io::csv_from_rows(
        "omega,phase_1pkG_deg,ideal_phase_deg,limit_angle_deg",
        &table,
    );
    let manifest = RunManifest::new("phase-dump")
        .input(&args.plant)
        .param("k", args.k)
        .param("odd", args.odd)
        .param("grid_points", cfg.phase_points);
    deliver(args.out.as_deref(), &csv, manifest)
}

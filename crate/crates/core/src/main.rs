use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use autoresonance::connection;
use autoresonance::conventions::{
    ConstantVariantPost, Conventions, EquilibriumVariant, MatchingRule, PhaseVariantPre, SlowPhaseVariant,
};
use autoresonance::harness::figures::{default_figure_config, emit_figures, Figure};
use autoresonance::harness::{config, io, portrait, run_scattering, simulate, Initial, RunConfig};
use autoresonance::model::Phi;
use autoresonance::numerics::Tolerances;
use autoresonance::painleve::{self, PainleveSeed};
use autoresonance::pre::PreCaptureParams;
use autoresonance::Result;

#[derive(Parser)]
#[command(
    name = "autoresonance",
    version,
    about = "Capture into autoresonance through a pitchfork"
)]
struct Cli {
    /// key = value file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the detuned equation and write the trajectory as CSV.
    Simulate(SimArgs),
    /// Level sets and equilibria of the frozen Hamiltonian.
    Portrait {
        #[arg(long = "T", visible_alias = "t", allow_hyphen_values = true)]
        t_const: f64,
        /// CSV output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Integrate the layer equation from its asymptotic data at −∞.
    Painleve {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = PainleveSeed::DEFAULT_Z0, allow_hyphen_values = true)]
        z0: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        z1: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connection formulas: p, ρ², υ and the captured branch.
    Connect {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, value_enum, default_value_t = ConstantArg::Reflected)]
        variant: ConstantArg,
    },
    /// Simulate from WKB data, detect capture, fit and compare with prediction.
    Match {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        conv: ConvArgs,
        #[arg(long, default_value_t = RunConfig::DEFAULT_FIT_WINDOW.0, allow_hyphen_values = true)]
        fit_start: f64,
        #[arg(long, default_value_t = RunConfig::DEFAULT_FIT_WINDOW.1, allow_hyphen_values = true)]
        fit_end: f64,
    },
    /// Write figure CSV and SVG files.
    Figures {
        #[arg(long, default_value = "all")]
        which: String,
        #[arg(long, default_value = "figures")]
        outdir: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        theta0: Option<f64>,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long, allow_hyphen_values = true)]
    theta0: f64,
    #[arg(long, allow_hyphen_values = true)]
    theta1: f64,
    /// Initial state; ignored when --alpha10 is given.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_im: f64,
    /// Start on the pre-capture WKB solution with this amplitude.
    #[arg(long, visible_alias = "alpha")]
    alpha10: Option<f64>,
    #[arg(long, visible_alias = "phi", default_value_t = 0.0, allow_hyphen_values = true)]
    phi10: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvArgs {
    #[arg(long, value_enum, default_value_t = PhaseArg::Averaged)]
    phase_variant: PhaseArg,
    #[arg(long, value_enum, default_value_t = ConstantArg::Reflected)]
    constant_variant: ConstantArg,
    #[arg(long, value_enum, default_value_t = EquilibriumArg::Full)]
    equilibrium: EquilibriumArg,
    #[arg(long, value_enum, default_value_t = SlowArg::NormalForm)]
    slow_phase: SlowArg,
    #[arg(long, value_enum, default_value_t = MatchArg::LayerScaled)]
    matching: MatchArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    Doubled,
    Negated,
    Averaged,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantArg {
    #[value(alias = "theorem1")]
    Plain,
    #[value(alias = "theorem2")]
    Ln2,
    Reflected,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquilibriumArg {
    Full,
    Half,
}

#[derive(Clone, Copy, ValueEnum)]
enum SlowArg {
    Expanded,
    NormalForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatchArg {
    Identity,
    LayerScaled,
}

impl From<ConstantArg> for ConstantVariantPost {
    fn from(a: ConstantArg) -> Self {
        match a {
            ConstantArg::Plain => Self::Plain,
            ConstantArg::Ln2 => Self::Ln2,
            ConstantArg::Reflected => Self::Reflected,
        }
    }
}

impl ConvArgs {
    fn conventions(&self) -> Conventions {
        Conventions {
            phase_pre: match self.phase_variant {
                PhaseArg::Doubled => PhaseVariantPre::Doubled,
                PhaseArg::Negated => PhaseVariantPre::Negated,
                PhaseArg::Averaged => PhaseVariantPre::Averaged,
            },
            constant_post: self.constant_variant.into(),
            equilibrium: match self.equilibrium {
                EquilibriumArg::Full => EquilibriumVariant::FullRoot,
                EquilibriumArg::Half => EquilibriumVariant::HalfRoot,
            },
            slow_phase: match self.slow_phase {
                SlowArg::Expanded => SlowPhaseVariant::Expanded,
                SlowArg::NormalForm => SlowPhaseVariant::NormalForm,
            },
            matching: match self.matching {
                MatchArg::Identity => MatchingRule::Identity,
                MatchArg::LayerScaled => MatchingRule::LayerScaled,
            },
        }
    }
}

impl SimArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let initial = match self.alpha10 {
            Some(a) => Initial::Wkb(PreCaptureParams::new(a, self.phi10)?),
            None => Initial::State(Phi::new(self.phi_re, self.phi_im)),
        };
        let mut cfg = RunConfig::new(self.eps, self.theta0, self.theta1, initial)?;
        if let Some(t) = self.tol {
            cfg.tolerances = cfg.tolerances.with_tol(t);
        }
        if let Some(h) = self.max_step {
            cfg.tolerances.max_step = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate(a) => {
            let traj = simulate(&a.run_config()?)?;
            emit(&io::trajectory_csv(&traj), a.out.as_deref())
        }
        Cmd::Portrait { t_const, out, svg } => {
            let p = portrait::portrait(t_const)?;
            if let Some(path) = svg {
                std::fs::write(path, p.to_svg())?;
            }
            emit(&p.to_csv(), out.as_deref())
        }
        Cmd::Painleve {
            alpha,
            phi,
            z0,
            z1,
            tol,
            out,
        } => {
            let seed = PainleveSeed::new(alpha, phi, z0)?;
            let t = match tol {
                Some(t) => Tolerances::painleve_default().with_tol(t),
                None => Tolerances::painleve_default(),
            };
            let traj = painleve::integrate_painleve(&seed, z1, &t)?;
            emit(&io::trajectory_csv(&traj), out.as_deref())
        }
        Cmd::Connect { alpha, phi, variant } => {
            let r = connection::capture_params(PreCaptureParams::new(alpha, phi)?, variant.into())?;
            let mut v = serde_json::to_value(r).expect("serializable");
            v["p_re"] = json!(r.p.re);
            v["p_im"] = json!(r.p.im);
            print!("{}", to_json(&v));
            Ok(())
        }
        Cmd::Match {
            sim,
            conv,
            fit_start,
            fit_end,
        } => {
            let mut cfg = sim.run_config()?;
            cfg.conventions = conv.conventions();
            cfg.fit_window = (fit_start, fit_end);
            let report = run_scattering(&cfg)?;
            emit(&to_json(&report), sim.out.as_deref())
        }
        Cmd::Figures {
            which,
            outdir,
            eps,
            theta0,
        } => {
            let which: Figure = which.parse()?;
            let mut cfg = default_figure_config();
            if let Some(e) = eps {
                cfg.eps = e;
            }
            if let Some(t) = theta0 {
                cfg.theta0 = t;
            }
            for p in emit_figures(&cfg, which, &outdir)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

/// Splices config-file flags in right after the subcommand name, so that
/// flags given on the command line (which come later) override them.
fn expand_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = if let Some(v) = args[pos].strip_prefix("--config=") {
        let v = v.to_string();
        args.remove(pos);
        v
    } else {
        if pos + 1 >= args.len() {
            return Ok(args); // let clap report the missing value
        }
        let v = args.remove(pos + 1);
        args.remove(pos);
        v
    };
    let extra = config::to_args(&config::read(Path::new(&path))?);
    let sub = args.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 1);
    let at = sub.map(|i| i + 1).unwrap_or(args.len());
    args.splice(at..at, extra);
    Ok(args)
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let matches = Cli::command().args_override_self(true).get_matches_from(args);
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

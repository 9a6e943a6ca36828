//! `qps` — command-line interface over the quasi-periodic operator lab.
//!
//! Subcommands: `le`, `spectrum`, `phase-diagram`, `le-scan`, `acceleration`,
//! `localization`. Exit codes: 0 ok, 1 config error, 2 runtime error, 3 IO
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qps_core::analytic::{classify_model_energy, lyapunov_formula_model, Regime};
use qps_core::cocycle::{lyapunov_phase_averaged, ComplexifiedPhase};
use qps_core::error::Error;
use qps_core::localization::{classify_state, edge_agreement, ClassifyThresholds, StateClass};
use qps_core::potentials::canonicalize;
use qps_core::spectrum::{
    build_truncation, eigenpairs, eigenvalues, Frequency, PairSelection, QuasiPeriodicSetup,
};
use qps_core::sweep::{
    emit_outputs, run_acceleration_scan, run_le_comparison, run_phase_diagram, Axis, AxisName,
    EmitOptions, ModelKind, ModelSpec, OutputFormat, SweepConfig, SweepResult,
};

#[derive(Parser)]
#[command(
    name = "qps",
    version,
    about = "Quasi-periodic Schrödinger operator lab: Lyapunov exponents, mobility edge, localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Potential family: gps | amo | shifted | tan2
    #[arg(long, default_value = "gps", value_parser = parse_model)]
    model: ModelKind,

    /// Coupling lambda
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    lambda: f64,

    /// Parameter alpha (gps/shifted families)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,

    /// Frequency: golden | silver | a number in (0,1)
    #[arg(long, default_value = "golden", value_parser = parse_frequency)]
    freq: Frequency,

    /// Base phase theta (mod 1)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.model,
            lambda: self.lambda,
            alpha: self.alpha,
        }
    }

    fn setup(&self) -> QuasiPeriodicSetup {
        QuasiPeriodicSetup::new(self.freq, self.theta)
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format: csv | json
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,

    /// Output path (stdout when omitted and the command allows it)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (falls back to QPS_THREADS, then available parallelism)
    #[arg(long)]
    threads: Option<usize>,

    /// Do not write the companion matplotlib script
    #[arg(long)]
    no_plot_script: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and numeric Lyapunov exponent at a single energy
    Le {
        #[command(flatten)]
        model: ModelArgs,
        /// Energy E
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        /// Imaginary phase offset for the numeric estimate
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eps: f64,
        /// Orbit length per phase
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Phases averaged; 1 = single orbit at --theta, >1 = equidistributed grid
        #[arg(long, default_value_t = 1)]
        phases: usize,
        /// Print a JSON object instead of text lines
        #[arg(long)]
        json: bool,
    },

    /// Eigenvalues (optionally eigenvectors) of the [0, N-1] truncation
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Truncation size N
        #[arg(long = "N", default_value_t = 500)]
        n: usize,
        /// Include eigenvectors (JSON output only)
        #[arg(long)]
        vectors: bool,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// (alpha | lambda) x E phase-diagram grid with IPR and regime per cell
    PhaseDiagram {
        #[command(flatten)]
        model: ModelArgs,
        /// Swept axis as name:min:max:count (repeat for the E axis)
        #[arg(long = "grid", required = true)]
        grids: Vec<String>,
        /// Truncation size N per column
        #[arg(long = "N", default_value_t = 500)]
        n: usize,
        /// Also compute the numeric LE per cell (slow)
        #[arg(long)]
        numeric_le: bool,
        /// Orbit length for numeric LE cells
        #[arg(long, default_value_t = 20_000)]
        steps: u64,
        /// Phases for numeric LE cells
        #[arg(long, default_value_t = 4)]
        phases: usize,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Formula-vs-numeric Lyapunov exponent over one E axis
    LeScan {
        #[command(flatten)]
        model: ModelArgs,
        /// E axis as E:min:max:count
        #[arg(long = "grid", required = true)]
        grids: Vec<String>,
        /// Truncation size N for the in-spectrum flag
        #[arg(long = "N", default_value_t = 1000)]
        n: usize,
        /// Orbit length per phase
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Number of phases averaged
        #[arg(long, default_value_t = 4)]
        phases: usize,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Acceleration (2 pi-normalized dL/d eps) over energies and offsets
    Acceleration {
        #[command(flatten)]
        model: ModelArgs,
        /// Energy sample (repeatable)
        #[arg(long = "energy", required = true, allow_hyphen_values = true)]
        energies: Vec<f64>,
        /// Imaginary offset sample (repeatable; default 0)
        #[arg(long = "eps", allow_hyphen_values = true)]
        eps: Vec<f64>,
        /// Finite-difference step h
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        /// Orbit length per phase
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Number of phases averaged
        #[arg(long, default_value_t = 4)]
        phases: usize,
        #[command(flatten)]
        output: OutputArgs,
    },

    /// Per-eigenstate localization diagnostics for one truncation
    Localization {
        #[command(flatten)]
        model: ModelArgs,
        /// Truncation size N
        #[arg(long = "N", default_value_t = 1000)]
        n: usize,
        /// Edge margin (alpha E units) for the agreement summary
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s {
        "gps" => Ok(ModelKind::Gps),
        "amo" => Ok(ModelKind::AlmostMathieu),
        "shifted" => Ok(ModelKind::ShiftedGps),
        "tan2" => Ok(ModelKind::TanSquared),
        _ => Err(format!(
            "unknown model '{s}' (expected gps | amo | shifted | tan2)"
        )),
    }
}

fn parse_frequency(s: &str) -> Result<Frequency, String> {
    let freq = match s {
        "golden" => Frequency::GoldenMean,
        "silver" => Frequency::SilverMean,
        other => {
            let b: f64 = other.parse().map_err(|_| {
                format!("frequency must be golden, silver, or a number, got '{other}'")
            })?;
            Frequency::Custom(b)
        }
    };
    freq.validate().map_err(|e| e.to_string())?;
    Ok(freq)
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("unknown format '{s}' (expected csv | json)")),
    }
}

fn parse_axis(s: &str) -> Result<Axis, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "grid spec '{s}' must be name:min:max:count"
        )));
    }
    let name = AxisName::parse(parts[0])
        .ok_or_else(|| Error::Config(format!("unknown axis '{}'", parts[0])))?;
    let min: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("bad axis min '{}'", parts[1])))?;
    let max: f64 = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("bad axis max '{}'", parts[2])))?;
    let steps: usize = parts[3]
        .parse()
        .map_err(|_| Error::Config(format!("bad axis count '{}'", parts[3])))?;
    Ok(Axis {
        name,
        min,
        max,
        steps,
    })
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidModel(_) => 1,
        Error::Io(_) | Error::Serialize(_) => 3,
        _ => 2,
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1, // bad flags are config errors
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qps: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Le {
            model,
            energy,
            eps,
            steps,
            phases,
            json,
        } => cmd_le(&model, energy, eps, steps, phases, json),
        Command::Spectrum {
            model,
            n,
            vectors,
            output,
        } => cmd_spectrum(&model, n, vectors, &output),
        Command::PhaseDiagram {
            model,
            grids,
            n,
            numeric_le,
            steps,
            phases,
            output,
        } => {
            let mut cfg = base_config(&model, &output);
            cfg.axes = grids
                .iter()
                .map(|s| parse_axis(s))
                .collect::<Result<_, _>>()?;
            cfg.truncation_size = n;
            cfg.numeric_le = numeric_le;
            cfg.le_steps = steps;
            cfg.phases = phases;
            let grid = run_phase_diagram(&cfg)?;
            emit(&SweepResult::PhaseDiagram(grid), &cfg, &output)
        }
        Command::LeScan {
            model,
            grids,
            n,
            steps,
            phases,
            output,
        } => {
            let mut cfg = base_config(&model, &output);
            cfg.axes = grids
                .iter()
                .map(|s| parse_axis(s))
                .collect::<Result<_, _>>()?;
            cfg.truncation_size = n;
            cfg.le_steps = steps;
            cfg.phases = phases;
            let table = run_le_comparison(&cfg)?;
            emit(&SweepResult::LeComparison(table), &cfg, &output)
        }
        Command::Acceleration {
            model,
            energies,
            eps,
            h,
            steps,
            phases,
            output,
        } => {
            let mut cfg = base_config(&model, &output);
            cfg.energies = energies;
            cfg.eps_list = if eps.is_empty() { vec![0.0] } else { eps };
            cfg.fd_step = h;
            cfg.le_steps = steps;
            cfg.phases = phases;
            let table = run_acceleration_scan(&cfg)?;
            emit(&SweepResult::Acceleration(table), &cfg, &output)
        }
        Command::Localization {
            model,
            n,
            margin,
            output,
        } => cmd_localization(&model, n, margin, &output),
    }
}

fn base_config(model: &ModelArgs, output: &OutputArgs) -> SweepConfig {
    let mut cfg = SweepConfig::new(model.spec());
    cfg.frequency = model.freq;
    cfg.theta = model.theta;
    cfg.threads = output.threads;
    cfg
}

fn emit(result: &SweepResult, cfg: &SweepConfig, output: &OutputArgs) -> Result<(), Error> {
    let path = output.out.as_ref().ok_or_else(|| {
        Error::Config("this subcommand requires --out PATH for its data file".into())
    })?;
    let stamp = timestamp();
    let written = emit_outputs(
        result,
        cfg,
        &EmitOptions {
            format: output.format,
            path,
            timestamp: &stamp,
            plot_script: !output.no_plot_script,
        },
    )?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_le(
    model: &ModelArgs,
    energy: f64,
    eps: f64,
    steps: u64,
    phases: usize,
    json: bool,
) -> Result<(), Error> {
    let m = model.spec().build();
    m.validate()?;
    let formula = lyapunov_formula_model(&m, energy)?;
    let point = classify_model_energy(&m, energy)?;
    // single orbit honors --theta; the phase-averaged variant uses the
    // equidistributed grid j/phases
    let est = if phases <= 1 {
        qps_core::cocycle::lyapunov_numeric(
            &m,
            &model.setup(),
            energy,
            ComplexifiedPhase::new(eps),
            steps,
            1,
        )?
    } else {
        lyapunov_phase_averaged(&m, model.freq, energy, ComplexifiedPhase::new(eps), steps, phases)?
    };
    let regime = regime_str(point.classification);
    if json {
        let doc = serde_json::json!({
            "model": m,
            "E": energy,
            "eps": eps,
            "le_formula": formula,
            "le_numeric": est.value,
            "gap": (est.value - formula).abs(),
            "regime": regime,
            "steps": est.steps,
            "tail_variation": est.tail_variation,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("model:          {m:?}");
        println!("E:              {energy}");
        println!("regime:         {regime}");
        println!("le_formula:     {formula}");
        println!("le_numeric:     {} (eps = {eps})", est.value);
        println!("gap:            {}", (est.value - formula).abs());
        println!("tail_variation: {}", est.tail_variation);
    }
    Ok(())
}

fn regime_str(r: Regime) -> &'static str {
    match r {
        Regime::PositiveLE => "PositiveLE",
        Regime::ZeroLE => "ZeroLE",
        Regime::Edge => "Edge",
    }
}

fn cmd_spectrum(
    model: &ModelArgs,
    n: usize,
    vectors: bool,
    output: &OutputArgs,
) -> Result<(), Error> {
    if n < 1 {
        return Err(Error::Config("N must be >= 1".into()));
    }
    let m = model.spec().build();
    let op = build_truncation(&m, &model.setup(), 0, n as i64 - 1)?;
    if vectors && output.format == OutputFormat::Csv {
        return Err(Error::Config(
            "--vectors needs --format json (CSV has no vector representation)".into(),
        ));
    }
    let body = if vectors {
        let data = eigenpairs(&op, PairSelection::All)?;
        let doc = serde_json::json!({
            "model": m,
            "N": n,
            "eigenvalues": data.eigenvalues,
            "eigenvectors": data.eigenvectors,
        });
        serde_json::to_string_pretty(&doc)? + "\n"
    } else {
        let evals = eigenvalues(&op);
        match output.format {
            OutputFormat::Csv => {
                let mut s = String::from("index,E\n");
                for (i, e) in evals.iter().enumerate() {
                    s.push_str(&format!("{i},{e}\n"));
                }
                s
            }
            OutputFormat::Json => {
                let doc = serde_json::json!({ "model": m, "N": n, "eigenvalues": evals });
                serde_json::to_string_pretty(&doc)? + "\n"
            }
        }
    };
    match &output.out {
        Some(path) => {
            std::fs::write(path, body)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_localization(
    model: &ModelArgs,
    n: usize,
    margin: f64,
    output: &OutputArgs,
) -> Result<(), Error> {
    let m = model.spec().build();
    let canon = canonicalize(&m)?;
    let op = build_truncation(&m, &model.setup(), 0, n as i64 - 1)?;
    let data = eigenpairs(&op, PairSelection::All)?;
    let vecs = data.eigenvectors.as_ref().expect("eigenpairs carry vectors");
    let thresholds = ClassifyThresholds {
        edge_margin: margin,
        ..ClassifyThresholds::default()
    };

    let mut rows = Vec::with_capacity(data.eigenvalues.len());
    for (i, &e) in data.eigenvalues.iter().enumerate() {
        let diag = classify_state(e, &vecs[i], &thresholds)?;
        let regime = classify_model_energy(&m, e)?;
        let edge_d = qps_core::analytic::edge_residual(
            canon.alpha_eff,
            canon.lambda_eff,
            e - canon.energy_shift,
        );
        rows.push((i, e, diag, regime, edge_d));
    }

    let body = match output.format {
        OutputFormat::Csv => {
            let mut s = String::from(
                "index,E,ipr,decay_rate,fit_r2,classification,regime,edge_distance\n",
            );
            for (i, e, diag, regime, edge_d) in &rows {
                let class = match diag.classification {
                    StateClass::Localized => "Localized",
                    StateClass::Extended => "Extended",
                    StateClass::Unresolved => "Unresolved",
                };
                s.push_str(&format!(
                    "{i},{e},{},{},{},{class},{},{}\n",
                    diag.ipr,
                    diag.decay_rate.map(|v| v.to_string()).unwrap_or_default(),
                    diag.fit_r2.map(|v| v.to_string()).unwrap_or_default(),
                    regime_str(regime.classification),
                    edge_d.map(|v| v.to_string()).unwrap_or_default(),
                ));
            }
            s
        }
        OutputFormat::Json => {
            let docs: Vec<serde_json::Value> = rows
                .iter()
                .map(|(i, e, diag, regime, edge_d)| {
                    serde_json::json!({
                        "index": i,
                        "E": e,
                        "diagnostics": diag,
                        "regime": regime,
                        "edge_distance": edge_d,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({
                "model": m,
                "N": n,
                "states": docs,
            }))? + "\n"
        }
    };
    match &output.out {
        Some(path) => {
            std::fs::write(path, body)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }

    match edge_agreement(&data, canon.alpha_eff, canon.lambda_eff, &thresholds) {
        Ok(frac) => eprintln!("edge agreement (margin {margin} in alpha*E units): {frac:.4}"),
        Err(Error::NoResolvedStates) => {
            eprintln!("edge agreement: no resolved states at margin {margin}")
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

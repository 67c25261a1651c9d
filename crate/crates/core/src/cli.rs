//! `nsgate` command-line front end.
//!
//! Every subcommand writes CSV (to `--out` or stdout) preceded by `#` comment
//! lines recording the version, subcommand, configuration and seed. The
//! worker count never appears in the output, and identical invocations give
//! byte-identical files. Wall-clock time goes to stderr, or into the header
//! with `--timing`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::fidelity::{gate_fidelity_mc, SeededRng};
use crate::fock::{FockBasis, SingleModeState};
use crate::nsgate::{
    apply_ns, ideal_ns_target, GateConstants, HeraldedMap, NsGateKind, PARAMETER_IDS,
};
use crate::qfi::all_sensitivities;
use crate::sensitivity::{
    compound_scan, parse_range_spec, sweep_fidelity_on_grid, sweep_grid, sweep_success_probability,
    tolerance_window, ErrorVector,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SWEEP_HEADER: &str =
    "gate,param,delta,mean_fidelity,std_error,mean_success_prob,n_samples";
pub const COMPOUND_HEADER: &str = "gate,radius,min_infid,max_infid,mean_infid,n_vectors,n_states";
pub const QFI_HEADER: &str = "gate,component,W_c,mean_var,max_var,n_samples";

#[derive(Parser, Debug)]
#[command(
    name = "nsgate",
    version,
    about = "Tolerance analysis of post-selected linear-optical NS gates",
    after_help = "All angles and phases are in radians. A path-length change of half a \
                  wavelength is a phase of pi."
)]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "NSGATE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Heralding probability vs. one parameter for input (|0>+|1>+|2>)/sqrt(3).
    SuccessSweep(SuccessArgs),
    /// Mean gate fidelity vs. one beam-splitter angle (or any parameter).
    FidelitySweep(SweepArgs),
    /// Mean gate fidelity vs. one path-length phase.
    PhaseSweep(SweepArgs),
    /// Min/max/mean infidelity for error vectors on spheres of given radii.
    Compound(CompoundArgs),
    /// Generator-variance sensitivity of every component.
    Qfi(QfiArgs),
    /// Print the resolved circuit in the plain-text circuit format.
    DumpCircuit(DumpArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GateChoice {
    Klm,
    Reverse,
    Both,
}

impl GateChoice {
    fn kinds(self) -> Vec<NsGateKind> {
        match self {
            GateChoice::Klm => vec![NsGateKind::Klm],
            GateChoice::Reverse => vec![NsGateKind::Reverse],
            GateChoice::Both => NsGateKind::ALL.to_vec(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            GateChoice::Klm => "klm",
            GateChoice::Reverse => "reverse",
            GateChoice::Both => "both",
        }
    }
}

#[derive(Args, Debug)]
struct Output {
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script that plots the CSV (requires --out).
    #[arg(long)]
    plot_script: Option<PathBuf>,
    /// Record wall-clock time in the CSV header (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SuccessArgs {
    #[arg(long, value_enum, default_value = "both")]
    gate: GateChoice,
    /// Parameter id; repeat for several. Defaults to the three angles.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    max: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "both")]
    gate: GateChoice,
    /// Parameter id; repeat for several. Defaults to all angles (fidelity-sweep)
    /// or all phases (phase-sweep).
    #[arg(long = "param")]
    params: Vec<String>,
    /// Lower end of the deviation range [default: -0.5, or -pi for phase-sweep].
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    /// Upper end of the deviation range [default: 0.5, or pi for phase-sweep].
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long, default_value_t = 41)]
    points: usize,
    /// Haar-random input states per grid point.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CompoundArgs {
    #[arg(long, value_enum, default_value = "both")]
    gate: GateChoice,
    /// Radii as start:stop:count.
    #[arg(long, default_value = "0:2:21")]
    radii: String,
    #[arg(long, default_value_t = 2000)]
    vectors: usize,
    #[arg(long, default_value_t = 200)]
    states: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct QfiArgs {
    #[arg(long, value_enum, default_value = "both")]
    gate: GateChoice,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long, value_enum, default_value = "klm")]
    gate: GateChoice,
    /// Validate a circuit file and print it in canonical form instead.
    #[arg(long, conflicts_with = "gate")]
    circuit: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 runtime failure, 2 bad arguments.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return 0;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return 2;
        }
    };
    let pool = match cli.workers {
        Some(0) => {
            eprintln!("error: --workers must be at least 1");
            return 2;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(code) => code,
        Err(Error::InvalidArgument(msg)) | Err(Error::UnknownParameter(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    let output = match &command {
        Command::SuccessSweep(a) => Some(&a.output),
        Command::FidelitySweep(a) | Command::PhaseSweep(a) => Some(&a.output),
        Command::Compound(a) => Some(&a.output),
        Command::Qfi(a) => Some(&a.output),
        Command::DumpCircuit(_) | Command::Selftest => None,
    };
    if output.is_some_and(|o| o.plot_script.is_some() && o.out.is_none()) {
        return Err(Error::InvalidArgument("--plot-script needs --out".into()));
    }
    let started = Instant::now();
    let (name, config, output, body, plot) = match command {
        Command::SuccessSweep(a) => {
            let params = default_params(&a.params, &PARAMETER_IDS[..3])?;
            let mut body = String::new();
            for kind in a.gate.kinds() {
                for param in &params {
                    for p in sweep_success_probability(kind, param, a.min, a.max, a.points)? {
                        let _ = writeln!(
                            body,
                            "{kind},{param},{},{},0,{},1",
                            p.delta, p.fidelity, p.probability
                        );
                    }
                }
            }
            let config = format!(
                "gate={} params={} min={} max={} points={} input=equal_superposition",
                a.gate.label(),
                params.join(","),
                a.min,
                a.max,
                a.points
            );
            (
                "success-sweep",
                config,
                a.output,
                (SWEEP_HEADER, body),
                PlotKind::Sweep {
                    y: 6,
                    label: "success probability",
                },
            )
        }
        Command::FidelitySweep(a) => sweep_command("fidelity-sweep", a, &PARAMETER_IDS[..3], 0.5)?,
        Command::PhaseSweep(a) => {
            let phases = &PARAMETER_IDS[3..];
            if let Some(bad) = a.params.iter().find(|p| !phases.contains(&p.as_str())) {
                return Err(Error::InvalidArgument(format!(
                    "`{bad}` is not a phase parameter"
                )));
            }
            sweep_command("phase-sweep", a, phases, std::f64::consts::PI)?
        }
        Command::Compound(a) => {
            let radii = parse_range_spec(&a.radii)?;
            let mut body = String::new();
            for kind in a.gate.kinds() {
                for row in compound_scan(kind, &radii, a.vectors, a.states, SeededRng::new(a.seed))?
                {
                    let _ = writeln!(
                        body,
                        "{kind},{},{},{},{},{},{}",
                        row.radius,
                        row.min_infidelity,
                        row.max_infidelity,
                        row.mean_infidelity,
                        row.n_vectors,
                        row.n_states
                    );
                }
            }
            let config = format!(
                "gate={} radii={} vectors={} states={} seed={}",
                a.gate.label(),
                a.radii,
                a.vectors,
                a.states,
                a.seed
            );
            (
                "compound",
                config,
                a.output,
                (COMPOUND_HEADER, body),
                PlotKind::Compound,
            )
        }
        Command::Qfi(a) => {
            let mut body = String::new();
            for kind in a.gate.kinds() {
                for s in all_sensitivities(kind, a.samples, SeededRng::new(a.seed))? {
                    let _ = writeln!(
                        body,
                        "{kind},{},{},{},{},{}",
                        s.parameter_id,
                        s.weighted_average,
                        s.mean_variance,
                        s.max_sampled_variance,
                        s.n_samples
                    );
                }
            }
            let config = format!(
                "gate={} samples={} seed={}",
                a.gate.label(),
                a.samples,
                a.seed
            );
            ("qfi", config, a.output, (QFI_HEADER, body), PlotKind::None)
        }
        Command::DumpCircuit(a) => {
            let mut text = String::new();
            if let Some(path) = &a.circuit {
                let source = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
                text = crate::elements::Circuit::parse(&source)?.to_text();
            } else {
                for kind in a.gate.kinds() {
                    text.push_str(&kind.circuit().to_text());
                }
            }
            write_output(a.out.as_deref(), &text)?;
            return Ok(0);
        }
        Command::Selftest => return Ok(selftest()),
    };

    let elapsed = started.elapsed().as_secs_f64();
    let mut csv = String::new();
    let _ = writeln!(csv, "# nsgate {VERSION}");
    let _ = writeln!(csv, "# command: {name}");
    let _ = writeln!(csv, "# config: {config}");
    if let Some(seed) = config
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("seed="))
    {
        let _ = writeln!(csv, "# seed: {seed} (chacha8, one stream per sample)");
    }
    if output.timing {
        let _ = writeln!(csv, "# wall_clock_s: {elapsed:.3}");
    }
    csv.push_str(body.0);
    csv.push('\n');
    csv.push_str(&body.1);
    write_output(output.out.as_deref(), &csv)?;
    eprintln!("{name}: {elapsed:.3} s");

    if let (Some(script), Some(data)) = (&output.plot_script, &output.out) {
        write_output(Some(script), &plot_script(plot, data))?;
    }
    Ok(0)
}

type Prepared = (
    &'static str,
    String,
    Output,
    (&'static str, String),
    PlotKind,
);

fn sweep_command(
    name: &'static str,
    a: SweepArgs,
    defaults: &[&str],
    span: f64,
) -> Result<Prepared> {
    let params = default_params(&a.params, defaults)?;
    let (min, max) = (a.min.unwrap_or(-span), a.max.unwrap_or(span));
    let grid = sweep_grid(min, max, a.points)?;
    let mut body = String::new();
    for kind in a.gate.kinds() {
        for param in &params {
            for row in
                sweep_fidelity_on_grid(kind, param, &grid, a.samples, SeededRng::new(a.seed))?
            {
                let _ = writeln!(
                    body,
                    "{kind},{param},{},{},{},{},{}",
                    row.delta,
                    row.mean_fidelity,
                    row.fidelity_std_error,
                    row.mean_success_prob,
                    row.n_samples
                );
            }
        }
    }
    let config = format!(
        "gate={} params={} min={min} max={max} points={} samples={} seed={}",
        a.gate.label(),
        params.join(","),
        a.points,
        a.samples,
        a.seed
    );
    Ok((
        name,
        config,
        a.output,
        (SWEEP_HEADER, body),
        PlotKind::Sweep {
            y: 4,
            label: "mean gate fidelity",
        },
    ))
}

fn default_params(given: &[String], defaults: &[&str]) -> Result<Vec<String>> {
    if given.is_empty() {
        return Ok(defaults.iter().map(|s| s.to_string()).collect());
    }
    for p in given {
        if !PARAMETER_IDS.contains(&p.as_str()) {
            return Err(Error::UnknownParameter(format!(
                "{p} (expected one of {})",
                PARAMETER_IDS.join(", ")
            )));
        }
    }
    Ok(given.to_vec())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Clone, Copy)]
enum PlotKind {
    Sweep { y: usize, label: &'static str },
    Compound,
    None,
}

fn plot_script(kind: PlotKind, data: &Path) -> String {
    let data = data.display();
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script generated by nsgate {VERSION}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key outside");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{data}.png'");
    match kind {
        PlotKind::Sweep { y, label } => {
            let _ = writeln!(s, "set xlabel 'deviation (rad)'");
            let _ = writeln!(s, "set ylabel '{label}'");
            let _ = writeln!(
                s,
                "series = system(\"grep -v '^#' '{data}' | tail -n +2 | cut -d, -f1,2 | sort -u\")"
            );
            let _ = writeln!(
                s,
                "plot for [k in series] '< grep \"^'.k.',\" {data}' using 3:{y} with lines title k"
            );
        }
        PlotKind::Compound => {
            let _ = writeln!(s, "set xlabel '|delta| (rad)'");
            let _ = writeln!(s, "set ylabel 'gate infidelity'");
            let _ = writeln!(
                s,
                "gates = system(\"grep -v '^#' '{data}' | tail -n +2 | cut -d, -f1 | sort -u\")"
            );
            let _ = writeln!(
                s,
                "plot for [g in gates] '< grep \"^'.g.',\" {data}' using 2:3 with lines title g.' min', \\"
            );
            let _ = writeln!(s, "     for [g in gates] '< grep \"^'.g.',\" {data}' using 2:4 with lines title g.' max', \\");
            let _ = writeln!(s, "     for [g in gates] '< grep \"^'.g.',\" {data}' using 2:5 with lines title g.' mean'");
        }
        PlotKind::None => {
            let _ = writeln!(s, "# nothing to plot for this table");
        }
    }
    s
}

type Check = (&'static str, fn() -> std::result::Result<String, String>);

fn check(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn selftest_checks() -> Vec<Check> {
    vec![
        ("basis: 3 modes, cutoff 3 has 20 states", || {
            let n = FockBasis::new(3, 3).map_err(|e| e.to_string())?.len();
            check(n == 20, format!("{n} states"))
        }),
        ("klm angles: cos^2 = eta, theta3 = -theta1", || {
            let k = GateConstants::new();
            let [t1, t2, t3] = k.klm_angles();
            let ok = (t1.cos().powi(2) - k.eta1).abs() < 1e-14
                && (t2.cos().powi(2) - k.eta2).abs() < 1e-14
                && t3 == -t1;
            check(ok, format!("theta = ({t1:.6}, {t2:.6}, {t3:.6})"))
        }),
        (
            "reverse angles: xi1 = atan chi1, xi2 = pi + atan chi2, xi3 = -xi1",
            || {
                let [x1, x2, x3] = GateConstants::new().reverse_angles();
                let ok =
                    (x1 - 1.034_354).abs() < 1e-6 && (x2 - 3.558_826).abs() < 1e-6 && x3 == -x1;
                check(ok, format!("xi = ({x1:.6}, {x2:.6}, {x3:.6})"))
            },
        ),
        ("ideal amplitudes: c0 = c1 = -c2, |c_k| = 1/2", || {
            let mut worst: f64 = 0.0;
            for kind in NsGateKind::ALL {
                let m = HeraldedMap::for_gate(kind, &[0.0; 8])
                    .map_err(|e| e.to_string())?
                    .matrix;
                let c0 = m[0][0];
                worst = worst
                    .max((c0.norm() - 0.5).abs())
                    .max((m[1][1] - c0).norm())
                    .max((m[2][2] + c0).norm());
            }
            check(worst < 1e-12, format!("max deviation {worst:.2e}"))
        }),
        (
            "ideal gates: p = 1/4 and unit fidelity on 1000 Haar inputs",
            || {
                let mut worst: f64 = 0.0;
                for kind in NsGateKind::ALL {
                    for i in 0..1000 {
                        let psi =
                            crate::fidelity::haar_sample(&mut SeededRng::new(99).child(i).rng());
                        let out = apply_ns(kind, &[0.0; 8], &psi).map_err(|e| e.to_string())?;
                        let f = ideal_ns_target(&psi)
                            .inner(&out.output.ok_or("unheralded")?)
                            .norm_sqr();
                        worst = worst.max((out.probability - 0.25).abs()).max(1.0 - f);
                    }
                }
                check(worst < 1e-10, format!("max deviation {worst:.2e}"))
            },
        ),
        (
            "success probability exceeds 1/4 somewhere in [-1, 1]",
            || {
                let mut best: f64 = 0.0;
                for kind in NsGateKind::ALL {
                    for param in &PARAMETER_IDS[..3] {
                        for p in sweep_success_probability(kind, param, -1.0, 1.0, 41)
                            .map_err(|e| e.to_string())?
                        {
                            best = best.max(p.probability);
                        }
                    }
                }
                check(best > 0.25, format!("max p = {best:.4}"))
            },
        ),
        ("klm mirror: p_angle1(d) = p_angle3(-d)", || {
            let a = sweep_success_probability(NsGateKind::Klm, "angle1", -1.0, 1.0, 41)
                .map_err(|e| e.to_string())?;
            let b = sweep_success_probability(NsGateKind::Klm, "angle3", -1.0, 1.0, 41)
                .map_err(|e| e.to_string())?;
            let worst = a
                .iter()
                .zip(b.iter().rev())
                .map(|(x, y)| (x.probability - y.probability).abs())
                .fold(0.0, f64::max);
            check(worst < 1e-8, format!("max asymmetry {worst:.2e}"))
        }),
        ("klm input phases are inert over [-pi, pi]", || {
            let grid = sweep_grid(-std::f64::consts::PI, std::f64::consts::PI, 21)
                .map_err(|e| e.to_string())?;
            let mut worst: f64 = 0.0;
            for param in ["phase1", "phase2"] {
                for row in
                    sweep_fidelity_on_grid(NsGateKind::Klm, param, &grid, 1000, SeededRng::new(5))
                        .map_err(|e| e.to_string())?
                {
                    worst = worst.max((row.mean_fidelity - 1.0).abs());
                }
            }
            check(worst < 1e-10, format!("max |F - 1| = {worst:.2e}"))
        }),
        (
            "klm tolerance at F = 0.999: angle1, angle3 windows > 3x angle2",
            || {
                let w = |p| {
                    tolerance_window(NsGateKind::Klm, p, 0.999, 10_000, SeededRng::new(1), 0.5)
                        .map(|w| w.width())
                        .map_err(|e| e.to_string())
                };
                let (w1, w2, w3) = (w("angle1")?, w("angle2")?, w("angle3")?);
                check(
                    w1 > 3.0 * w2 && w3 > 3.0 * w2,
                    format!("widths {w1:.4}, {w2:.4}, {w3:.4}"),
                )
            },
        ),
        (
            "randomisation limit: max infidelity at |delta| = 2 is 0.76 +- 0.05",
            || {
                let mut detail = Vec::new();
                let mut ok = true;
                for kind in NsGateKind::ALL {
                    let row = compound_scan(kind, &[2.0], 2000, 200, SeededRng::new(7))
                        .map_err(|e| e.to_string())?[0];
                    ok &= (row.max_infidelity - 0.76).abs() <= 0.05;
                    detail.push(format!("{kind} {:.4}", row.max_infidelity));
                }
                check(ok, detail.join(", "))
            },
        ),
        ("estimator is reproducible", || {
            let dev = ErrorVector::single(8, 1, 0.2);
            let a = gate_fidelity_mc(NsGateKind::Klm, &dev, 2000, SeededRng::new(3))
                .map_err(|e| e.to_string())?;
            let b = gate_fidelity_mc(NsGateKind::Klm, &dev, 2000, SeededRng::new(3))
                .map_err(|e| e.to_string())?;
            check(a == b, format!("F = {:.6}", a.mean))
        }),
        ("circuit text round-trips", || {
            let mut ok = true;
            for kind in NsGateKind::ALL {
                let c = crate::elements::Circuit::parse(&kind.circuit().to_text())
                    .map_err(|e| e.to_string())?;
                ok &= &c == kind.circuit();
            }
            check(ok, String::new())
        }),
        ("equal-superposition probe: p = 1/4", || {
            let p = apply_ns(
                NsGateKind::Reverse,
                &[0.0; 8],
                &SingleModeState::equal_superposition(),
            )
            .map_err(|e| e.to_string())?
            .probability;
            check((p - 0.25).abs() < 1e-12, format!("p = {p}"))
        }),
    ]
}

fn selftest() -> i32 {
    let mut failures = 0;
    for (name, f) in selftest_checks() {
        match f() {
            Ok(detail) => println!("PASS  {name}  {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}  {detail}");
            }
        }
    }
    if failures == 0 {
        println!("selftest: all checks passed");
        0
    } else {
        println!("selftest: {failures} check(s) failed");
        1
    }
}

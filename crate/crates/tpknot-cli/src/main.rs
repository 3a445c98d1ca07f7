//! Command-line driver: energies, seminorms, variations, descent, detection,
//! gluing, fixtures, verification suites, and exports over stable file
//! formats. All inputs and outputs are files; exit code 0 means success,
//! 1 a failed verification, 2 an input error.

mod io;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;
use std::time::Instant;
use tpknot::curve::{Curve, EnergyParams, Interval};
use tpknot::energy::{tp_energy, tp_energy_local, LocalMode};
use tpknot::flow::{detect_concentration, minimize, FlowConfig, FlowStatus};
use tpknot::gluing::luckhaus_estimate_report;
use tpknot::sobolev::{gagliardo_seminorm, SeminormDomain, SeminormSpec};
use tpknot::variation::{el_breakdown, fd_variation_oracle, tp_first_variation, EtaWeight};
use tpknot::vec3::Vec3;
use tpknot::verify::run_suite;
use tpknot::zoo;

#[derive(Parser)]
#[command(
    name = "tpknot",
    about = "Tangent-point energies, fractional seminorms, and descent flows for closed curves",
    version
)]
struct Cli {
    /// Worker cap (also read from KNOT_THREADS). Evaluations reduce pairwise
    /// in a fixed order, so results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Both arguments restricted to the window.
    Aa,
    /// Outer argument in the window, inner over the whole circle.
    Ahalf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Obj,
}

#[derive(Subcommand)]
enum Command {
    /// Tangent-point energy of a curve, optionally localized and refined.
    Energy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Window center and radius.
        #[arg(long, num_args = 2, value_names = ["CENTER", "RADIUS"])]
        interval: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "aa")]
        mode: Mode,
        /// Also evaluate on k midpoint-refined copies of the polyline.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gagliardo seminorm of the curve, its derivative, or a sampled field.
    Seminorm {
        #[arg(long)]
        input: PathBuf,
        /// "gamma", "gammaprime", or a field JSON path.
        #[arg(long, default_value = "gammaprime")]
        field: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, num_args = 2, value_names = ["CENTER", "RADIUS"])]
        interval: Option<Vec<f64>>,
        /// Treat [0,1) as an interval of the line (no wrap).
        #[arg(long, default_value_t = false)]
        line: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First variation along a test field, with the finite-difference oracle.
    Variation {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Also evaluate the leading-operator/remainder decomposition of the
        /// weighted tangent-field energy (tangential part of phi).
        #[arg(long, default_value_t = false)]
        el_breakdown: bool,
        #[arg(long, default_value_t = 0.5)]
        eta_center: f64,
        #[arg(long, default_value_t = 0.1)]
        eta_radius: f64,
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy descent with the embeddedness guard.
    Minimize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        step_init: f64,
        #[arg(long, default_value_t = 1e-3)]
        guard_dist: f64,
        #[arg(long, default_value_t = 0.1)]
        guard_exclusion: f64,
        #[arg(long)]
        out_trace: Option<PathBuf>,
        #[arg(long)]
        out_curve: Option<PathBuf>,
        /// Write curve_XXXX.json snapshots every k accepted steps.
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy-concentration detection over a dyadic cover.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        scales: usize,
        #[arg(long, default_value_t = 0.25)]
        delta0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Glue two sampled line fields and report the seminorm estimate terms.
    Glue {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.5)]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a fixture curve.
    Zoo {
        #[arg(long)]
        name: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-serialize a curve as JSON, CSV, or an OBJ polyline.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_interval(values: &Option<Vec<f64>>) -> Result<Option<Interval>> {
    match values {
        None => Ok(None),
        Some(v) if v.len() == 2 => Ok(Some(Interval::new(v[0], v[1])?)),
        Some(_) => bail!("--interval takes CENTER RADIUS"),
    }
}

/// Midpoint refinement preserves the polyline image exactly.
fn midpoint_refine(c: &Curve) -> Result<Curve> {
    let n = c.n();
    let mut points = Vec::with_capacity(2 * n);
    for i in 0..n {
        points.push(c.point(i));
        points.push((c.point(i) + c.point(i + 1)) * 0.5);
    }
    Ok(Curve::new(points)?)
}

fn command_echo() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<i32> {
    let threads = cli
        .threads
        .or_else(|| std::env::var("KNOT_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1);
    if threads == 0 {
        bail!("--threads must be positive");
    }
    let start = Instant::now();
    match cli.command {
        Command::Energy { input, p, q, interval, mode, refine, out } => {
            let params = EnergyParams::new(p, q)?;
            let curve = io::load_curve(&input)?;
            let window = parse_interval(&interval)?;
            let evaluate = |c: &Curve| -> Result<tpknot::EnergyValue> {
                Ok(match &window {
                    Some(w) => tp_energy_local(
                        c,
                        w,
                        &params,
                        match mode {
                            Mode::Aa => LocalMode::Product,
                            Mode::Ahalf => LocalMode::HalfRestricted,
                        },
                    )?,
                    None => tp_energy(c, &params)?,
                })
            };
            let base = evaluate(&curve)?;
            let mut table = vec![json!({"n": curve.n(), "value": base.value})];
            let mut refined = curve.clone();
            for _ in 0..refine {
                refined = midpoint_refine(&refined)?;
                let e = evaluate(&refined)?;
                table.push(json!({"n": refined.n(), "value": e.value}));
            }
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![io::hash_file(&input)?],
                outputs: json!({
                    "value": base.value,
                    "n": base.n,
                    "quadrature": base.quadrature,
                    "clamped_pairs": base.clamped_pairs,
                    "refinement_table": table,
                }),
                passed: None,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
        Command::Seminorm { input, field, s, p, interval, line, out } => {
            let curve = io::load_curve(&input)?;
            let window = parse_interval(&interval)?;
            let domain = if line {
                if window.is_some() {
                    bail!("--line and --interval are mutually exclusive");
                }
                SeminormDomain::Line
            } else {
                match window {
                    Some(w) => SeminormDomain::Window(w),
                    None => SeminormDomain::Circle,
                }
            };
            let spec = SeminormSpec::new(s, p, domain)?;
            let (label, values): (String, Vec<Vec3>) = match field.as_str() {
                "gamma" => ("gamma".into(), curve.points().to_vec()),
                "gammaprime" => ("gammaprime".into(), curve.derivative()),
                path => (path.into(), io::load_field(std::path::Path::new(path))?),
            };
            if values.len() != curve.n() {
                bail!("field sample count {} does not match the curve", values.len());
            }
            let value = gagliardo_seminorm(&values, &spec)?;
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![io::hash_file(&input)?],
                outputs: json!({
                    "seminorm": value,
                    "s": s,
                    "p": p,
                    "field": label,
                    "n": curve.n(),
                }),
                passed: None,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
        Command::Variation {
            input,
            phi,
            p,
            q,
            el_breakdown: want_el,
            eta_center,
            eta_radius,
            fd_step,
            out,
        } => {
            let params = EnergyParams::new(p, q)?;
            let curve = io::load_curve(&input)?;
            let test = io::load_phi(&phi)?;
            if test.n() != curve.n() {
                bail!("test field grid {} does not match the curve {}", test.n(), curve.n());
            }
            let analytic = tp_first_variation(&curve, &params, &test)?;
            let fd = fd_variation_oracle(&curve, &params, &test, fd_step)?;
            let rel = (analytic - fd).abs() / fd.abs().max(analytic.abs()).max(1e-300);
            let el = if want_el {
                let u = curve.tangent_field();
                let tangential = test.tangential_part(&u)?;
                let eta = EtaWeight::bump(eta_center, eta_radius, curve.n())?;
                let b = el_breakdown(&u, &params, &tangential, &eta)?;
                Some(json!({
                    "Q": b.q_term,
                    "R": b.r,
                    "total": b.total,
                    "clamped_pairs": b.clamped_pairs,
                }))
            } else {
                None
            };
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![io::hash_file(&input)?, io::hash_file(&phi)?],
                outputs: json!({
                    "first_variation": analytic,
                    "fd_oracle": fd,
                    "rel_error": rel,
                    "el_breakdown": el,
                }),
                passed: None,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
        Command::Minimize {
            input,
            p,
            q,
            steps,
            step_init,
            guard_dist,
            guard_exclusion,
            out_trace,
            out_curve,
            snapshot_every,
            out,
        } => {
            let params = EnergyParams::new(p, q)?;
            let curve = io::load_curve(&input)?;
            let config = FlowConfig {
                max_steps: steps,
                step_init,
                guard_min_distance: guard_dist,
                guard_exclusion,
                ..FlowConfig::default()
            };
            let (result, trace) = minimize(&curve, &params, &config)?;
            if let Some(path) = &out_trace {
                let mut csv =
                    String::from("step,energy,step_size,guard,bilipschitz_lower,max_local_energy\n");
                for s in &trace.steps {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        s.step, s.energy, s.step_size, s.guard, s.bilipschitz_lower, s.max_local_energy
                    ));
                }
                std::fs::write(path, csv)?;
            }
            if let Some(k) = snapshot_every {
                if k == 0 {
                    bail!("--snapshot-every must be positive");
                }
                // Snapshots re-run the descent in k-step stages.
                let mut stage = curve.clone();
                let mut done = 0usize;
                let mut index = 0usize;
                while done < trace.steps.len() {
                    let chunk = FlowConfig { max_steps: k, ..config };
                    let (next, t) = minimize(&stage, &params, &chunk)?;
                    if t.steps.is_empty() {
                        break;
                    }
                    done += t.steps.len();
                    index += 1;
                    io::save_curve(
                        std::path::Path::new(&format!("curve_{index:04}.json")),
                        &next,
                    )?;
                    stage = next;
                }
            }
            if let Some(path) = &out_curve {
                io::save_curve(path, &result)?;
            }
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![io::hash_file(&input)?],
                outputs: json!({
                    "initial_energy": trace.initial_energy,
                    "final_energy": trace.steps.last().map(|s| s.energy),
                    "accepted_steps": trace.steps.len(),
                    "status": format!("{:?}", trace.status),
                }),
                passed: Some(trace.status != FlowStatus::Stalled || !trace.steps.is_empty()),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
        Command::Detect { input, q, epsilon, lambda, scales, delta0, out } => {
            let params = EnergyParams::scale_invariant(q)?;
            let curve = io::load_curve(&input)?;
            let profile = detect_concentration(
                std::slice::from_ref(&curve),
                &params,
                epsilon,
                lambda,
                delta0,
                scales,
            )?;
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![io::hash_file(&input)?],
                outputs: serde_json::to_value(&profile)?,
                passed: Some(profile.candidates.len() <= profile.count_bound),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
        Command::Glue { u, v, delta, s, p, r, out } => {
            let uf = io::load_line_field(&u)?;
            let vf = io::load_line_field(&v)?;
            let rep = luckhaus_estimate_report(&uf, &vf, delta, s, p, r)?;
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![io::hash_file(&u)?, io::hash_file(&v)?],
                outputs: serde_json::to_value(&rep)?,
                passed: None,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            io::emit(&report, out.as_deref())?;
            Ok(0)
        }
        Command::Zoo { name, n, scale, k, out } => {
            let curve = match name.as_str() {
                "circle" => zoo::make_circle(n, scale)?,
                "circle-unit-speed" => zoo::make_circle_unit_speed(n)?,
                "double-segment" => zoo::make_double_segment(n)?,
                "ellipse" => zoo::make_ellipse(n)?,
                "ellipse-unit-speed" => zoo::make_ellipse_unit_speed(n)?,
                "trefoil" => zoo::make_trefoil(n, scale)?,
                "trefoil-unit-speed" => zoo::make_trefoil_unit_speed(n)?,
                "loglog" => zoo::make_loglog_curve(n)?,
                "pulltight" => {
                    zoo::make_pulltight(n, k.ok_or_else(|| anyhow!("pulltight needs --k"))?)?
                }
                other => bail!(
                    "unknown fixture '{other}' (circle, circle-unit-speed, double-segment, \
                     ellipse, ellipse-unit-speed, trefoil, trefoil-unit-speed, loglog, pulltight)"
                ),
            };
            io::save_curve(&out, &curve)?;
            println!("wrote {} samples to {}", curve.n(), out.display());
            Ok(0)
        }
        Command::Verify { suite, out } => {
            let results = run_suite(&suite)?;
            let all_passed = results.iter().all(|r| r.passed);
            for r in &results {
                println!("{} {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let report = io::RunReport {
                command: command_echo(),
                inputs_sha256: vec![],
                outputs: serde_json::to_value(&results)?,
                passed: Some(all_passed),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            if out.is_some() {
                io::emit(&report, out.as_deref())?;
            }
            Ok(if all_passed { 0 } else { 1 })
        }
        Command::Export { input, format, out } => {
            let curve = io::load_curve(&input)?;
            match format {
                Format::Json => io::save_curve(&out, &curve)?,
                Format::Csv => io::save_curve_csv(&out, &curve)?,
                Format::Obj => io::save_curve_obj(&out, &curve)?,
            }
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

//! Command-line front end: runs the residual suites and emits a single
//! machine-readable JSON report per invocation.
//!
//! Exit codes: 0 = every suite passed, 1 = a suite failed, 2 = usage or
//! domain error. Reports embed the config and seed; identical invocations
//! produce byte-identical output (sampling uses ChaCha8 with the given
//! seed, and floats go through serde_json's shortest round-trip form).

use clap::{Parser, Subcommand, ValueEnum};
use gl2ode::bryant::check_bryant;
use gl2ode::curvature::{base_coefficients, invariants, ricci, weyl_data};
use gl2ode::family::{integrate_q, interior_sample_box, scan_family, Branch, QSolution};
use gl2ode::fderiv::FDerivs;
use gl2ode::forms::{Chart, KForm};
use gl2ode::gl2coframe::{base_coframe, det, lift_coframe, CoframeSet};
use gl2ode::report::ResidualReport;
use gl2ode::sample::SampleBox;
use gl2ode::symexpr::parse;
use gl2ode::verify::{
    eds_closure_check, normalize_section, street_model_check, structure_residuals, EdsVariant,
    VerifyError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gl2ode", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Seed for the sample generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of sample points per suite.
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    /// Override a sample-box range, e.g. --box y3=0.5:2 (repeatable).
    #[arg(long = "box", global = true, value_name = "NAME=LO:HI")]
    boxes: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate Bryant's two conditions on F.
    Check {
        #[arg(long = "F")]
        f: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Dump the invariant coframe (base, or lifted with --lift).
    Coframe {
        #[arg(long = "F")]
        f: String,
        #[arg(long)]
        lift: bool,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Curvature coefficients, Ricci determinant identities, invariants.
    Curvature {
        #[arg(long = "F")]
        f: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Residual suites: structure equations, street model, EDS closure.
    Verify {
        #[arg(long = "F")]
        f: String,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Integrate a q-profile and scan the induced family member.
    Family {
        #[arg(long, value_enum)]
        branch: BranchArg,
        #[arg(long)]
        z0: f64,
        #[arg(long)]
        q0: f64,
        #[arg(long)]
        qp0: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long, default_value_t = 201)]
        nodes: usize,
        /// Write the (z, q, q', q'') grid as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    All,
    Structure,
    Street,
    Eds,
    Normalize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    A,
    B,
}

#[derive(Serialize)]
struct ResultRow {
    label: String,
    pass: bool,
    max_residual: f64,
    tolerance: f64,
    worst_point: Vec<(String, f64)>,
}

impl From<ResidualReport> for ResultRow {
    fn from(r: ResidualReport) -> Self {
        ResultRow {
            label: r.label,
            pass: r.pass,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            worst_point: r.worst_point,
        }
    }
}

#[derive(Serialize)]
struct Report {
    tool_version: String,
    config: Value,
    results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<Value>,
}

fn row(label: &str, max_residual: f64, tolerance: f64) -> ResultRow {
    ResultRow {
        label: label.to_string(),
        pass: max_residual <= tolerance,
        max_residual,
        tolerance,
        worst_point: Vec::new(),
    }
}

/// A magnitude that must exceed the floor to pass.
fn floor_row(label: &str, magnitude: f64, floor: f64) -> ResultRow {
    ResultRow {
        label: label.to_string(),
        pass: magnitude > floor,
        max_residual: magnitude,
        tolerance: floor,
        worst_point: Vec::new(),
    }
}

#[derive(Debug)]
struct CliError(String);

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn apply_boxes(mut sb: SampleBox, specs: &[String]) -> Result<SampleBox, CliError> {
    for spec in specs {
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| CliError(format!("bad --box `{spec}`, expected NAME=LO:HI")))?;
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| CliError(format!("bad --box `{spec}`, expected NAME=LO:HI")))?;
        let lo: f64 = lo.parse().map_err(|_| CliError(format!("bad bound in `{spec}`")))?;
        let hi: f64 = hi.parse().map_err(|_| CliError(format!("bad bound in `{spec}`")))?;
        if lo >= hi {
            return Err(CliError(format!("empty range in `{spec}`")));
        }
        sb.set(name, lo, hi);
    }
    Ok(sb)
}

fn parse_f(src: &str) -> Result<FDerivs, CliError> {
    Ok(FDerivs::new(parse(src)?))
}

fn form_json(f: &KForm) -> Value {
    let chart = f.chart().clone();
    let entries: Vec<Value> = f
        .coeffs()
        .map(|(key, coeff)| {
            let basis: Vec<String> = key
                .iter()
                .map(|&i| format!("d{}", chart.sym(i as usize)))
                .collect();
            json!([basis.join("^"), coeff.to_string()])
        })
        .collect();
    Value::Array(entries)
}

fn coframe_json(set: &CoframeSet) -> Value {
    let mut map = serde_json::Map::new();
    for (label, form) in CoframeSet::labels().iter().zip(set.forms()) {
        map.insert(label.to_string(), form_json(form));
    }
    Value::Object(map)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let version = env!("CARGO_PKG_VERSION").to_string();
    match &cli.cmd {
        Cmd::Check { f, tol } => {
            let fd = parse_f(f)?;
            let sb = apply_boxes(SampleBox::jet_default(), &cli.boxes)?;
            let samples = sb.samples(&mut rng, cli.samples.max(1));
            let r = check_bryant(&fd, &samples, *tol)?;
            let mut r1 = row("bryant r1", r.max_r1, *tol);
            let mut r2 = row("bryant r2", r.max_r2, *tol);
            r1.worst_point = r.worst_point.clone();
            r2.worst_point = r.worst_point.clone();
            Ok(Report {
                tool_version: version,
                config: json!({"cmd": "check", "F": f, "tol": tol,
                    "samples": cli.samples, "seed": cli.seed, "box": cli.boxes}),
                results: vec![r1, r2],
                details: None,
            })
        }
        Cmd::Coframe { f, lift, tol } => {
            let fd = parse_f(f)?;
            let chart = if *lift { Chart::bundle() } else { Chart::jet() };
            let base = base_coframe(&fd, chart);
            let set = if *lift { lift_coframe(&base)? } else { base };
            let sb = if *lift {
                SampleBox::bundle_default()
            } else {
                SampleBox::jet_default()
            };
            let sb = apply_boxes(sb, &cli.boxes)?;
            // rank check: lifted forms are a full coframe on P; on the jet
            // chart only theta^0..theta^3 and Omega+ are independent
            let mut worst = f64::INFINITY;
            for b in sb.samples(&mut rng, cli.samples.max(1)) {
                let d = if *lift {
                    set.frame_determinant(&b)
                } else {
                    let five = [
                        &set.theta[0],
                        &set.theta[1],
                        &set.theta[2],
                        &set.theta[3],
                        &set.om_plus,
                    ];
                    let dim = five[0].chart().dim();
                    let mut rows = Vec::with_capacity(5);
                    let mut ok = true;
                    for f in five {
                        match f.eval(&b) {
                            Ok(vals) => {
                                let mut row = vec![0.0f64; dim];
                                for (k, v) in vals {
                                    row[k[0] as usize] = v;
                                }
                                rows.push(row);
                            }
                            Err(e) => {
                                ok = false;
                                let _ = e;
                                break;
                            }
                        }
                    }
                    if ok { Ok(det(&mut rows)) } else { continue }
                };
                if let Ok(d) = d {
                    worst = worst.min(d.abs());
                }
            }
            Ok(Report {
                tool_version: version,
                config: json!({"cmd": "coframe", "F": f, "lift": lift, "tol": tol,
                    "samples": cli.samples, "seed": cli.seed, "box": cli.boxes}),
                results: vec![floor_row("coframe rank (min |det|)", worst, *tol)],
                details: Some(coframe_json(&set)),
            })
        }
        Cmd::Curvature { f, tol } => {
            let fd = parse_f(f)?;
            let coeffs = base_coefficients(&fd);
            let sb = apply_boxes(SampleBox::jet_default(), &cli.boxes)?;
            let samples = sb.samples(&mut rng, cli.samples.max(1));
            let mut det_sym = 0.0f64;
            let mut det_asym = 0.0f64;
            let mut i2_max = 0.0f64;
            let mut i3_max = 0.0f64;
            let mut evaluated = 0usize;
            for b in &samples {
                let Ok(c) = coeffs.eval(b) else { continue };
                evaluated += 1;
                let (i2, i3) = invariants(&c);
                i2_max = i2_max.max(i2.abs());
                i3_max = i3_max.max(i3.abs());
                let r = ricci(&c);
                let mut s: Vec<Vec<f64>> =
                    r.symmetric_part().iter().map(|x| x.to_vec()).collect();
                let mut a: Vec<Vec<f64>> =
                    r.antisymmetric_part().iter().map(|x| x.to_vec()).collect();
                det_sym = det_sym.max((det(&mut s) - i2 * i2).abs());
                det_asym = det_asym.max((det(&mut a) - i3 * i3).abs());
            }
            if evaluated == 0 {
                return Err(CliError("every sample hit a domain error".into()));
            }
            let frame = base_coframe(&fd, Chart::jet());
            let weyl = weyl_data(&frame, &coeffs, &samples, *tol)?;
            let names = ["a0", "a1", "a2", "b0", "b1", "b2", "b3", "b4"];
            let details = json!({
                "coefficients": names
                    .iter()
                    .zip(coeffs.a().into_iter().chain(coeffs.b()))
                    .map(|(n, e)| (n.to_string(), e.to_string()))
                    .collect::<Vec<_>>(),
                "I2_max": i2_max,
                "I3_max": i3_max,
                "maxwell_flat": weyl.maxwell_flat,
                "max_b": weyl.max_b,
            });
            Ok(Report {
                tool_version: version,
                config: json!({"cmd": "curvature", "F": f, "tol": tol,
                    "samples": cli.samples, "seed": cli.seed, "box": cli.boxes}),
                results: vec![
                    row("det R_(ij) = I2^2", det_sym, *tol),
                    row("det R_[ij] = I3^2", det_asym, *tol),
                    row("weyl dA consistency", weyl.consistency, *tol),
                ],
                details: Some(details),
            })
        }
        Cmd::Verify { f, suite, tol } => {
            let fd = parse_f(f)?;
            let mut results: Vec<ResultRow> = Vec::new();
            if matches!(suite, Suite::All | Suite::Structure) {
                let sb = apply_boxes(SampleBox::bundle_default(), &cli.boxes)?;
                let samples = sb.samples(&mut rng, cli.samples.max(1));
                for r in structure_residuals(&fd, &samples, *tol, None)? {
                    results.push(r.into());
                }
            }
            if matches!(suite, Suite::All | Suite::Street) {
                let sb = apply_boxes(SampleBox::jet_default(), &cli.boxes)?;
                let samples = sb.samples(&mut rng, cli.samples.max(1));
                for r in street_model_check(&samples, *tol)? {
                    results.push(r.into());
                }
            }
            if matches!(suite, Suite::All | Suite::Eds) {
                for (e1, e2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let r = eds_closure_check(
                        e1,
                        e2,
                        EdsVariant::Consistent,
                        cli.samples.max(1),
                        cli.seed,
                        (*tol).min(1e-9),
                    );
                    results.push(r.into());
                }
            }
            if matches!(suite, Suite::All | Suite::Normalize) {
                let sb = apply_boxes(SampleBox::jet_default(), &cli.boxes)?;
                let samples = sb.samples(&mut rng, cli.samples.max(1));
                let mut worst = 0.0f64;
                let mut evaluated = 0usize;
                for b in &samples {
                    match normalize_section(&fd, b) {
                        Ok(nm) => {
                            evaluated += 1;
                            worst = worst
                                .max(nm.coeffs.a1.abs())
                                .max((nm.coeffs.a2 - 8.0 * nm.eps1 as f64).abs());
                        }
                        Err(VerifyError::NotNormalizable) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
                let mut r = row("normalization (a1 = 0, a2 = 8 eps1)", worst, *tol);
                if evaluated == 0 {
                    r.label = "normalization (not normalizable: a2 = 0 class)".into();
                }
                results.push(r);
            }
            Ok(Report {
                tool_version: version,
                config: json!({"cmd": "verify", "F": f,
                    "suite": match suite { Suite::All => "all", Suite::Structure => "structure",
                        Suite::Street => "street", Suite::Eds => "eds",
                        Suite::Normalize => "normalize" },
                    "tol": tol, "samples": cli.samples, "seed": cli.seed, "box": cli.boxes}),
                results,
                details: None,
            })
        }
        Cmd::Family {
            branch,
            z0,
            q0,
            qp0,
            step,
            nodes,
            csv,
        } => {
            let branch = match branch {
                BranchArg::A => Branch::A,
                BranchArg::B => Branch::B,
            };
            let sol = integrate_q(branch, *z0, *q0, *qp0, *step, *nodes)?;
            if let Some(path) = csv {
                write_csv(path, &sol)?;
            }
            let model = gl2ode::family::ansatz_f(&sol);
            let sb = apply_boxes(interior_sample_box(&model), &cli.boxes)?;
            let samples = sb.samples(&mut rng, cli.samples.max(1));
            let scan = scan_family(&sol, &samples)?;
            let mut results = vec![
                row("q ODE node residual", sol.max_node_residual(), 1e-8),
                row("bryant residual", scan.bryant_max, 1e-6),
                row("I2", scan.i2_max, 1e-6),
                row("I3", scan.i3_max, 1e-6),
            ];
            if scan.special_slope.is_none() {
                results.push(floor_row("a2 magnitude", scan.a2_max, 1e-6));
                results.push(floor_row("b4 magnitude", scan.b4_max, 1e-6));
                results.push(floor_row(
                    "dA obstruction (max |b_i|)",
                    scan.max_b,
                    1e-6,
                ));
            }
            let details = serde_json::to_value(&scan)?;
            Ok(Report {
                tool_version: version,
                config: json!({"cmd": "family", "branch": format!("{branch:?}"),
                    "z0": z0, "q0": q0, "qp0": qp0, "step": step, "nodes": nodes,
                    "samples": cli.samples, "seed": cli.seed, "box": cli.boxes}),
                results,
                details: Some(details),
            })
        }
    }
}

fn write_csv(path: &PathBuf, sol: &QSolution) -> Result<(), CliError> {
    let mut out = String::from("z,q,qp,qpp\n");
    for i in 0..sol.z.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sol.z[i], sol.q[i], sol.qp[i], sol.qpp[i]
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{text}");
            if let Some(path) = &cli.json {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if report.results.iter().all(|r| r.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

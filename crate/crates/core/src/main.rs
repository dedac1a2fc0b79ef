use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use haantjes::certifier::HaantjesCandidate;
use haantjes::concomitants::{haantjes_torsion, nijenhuis_torsion, yano_ako_bracket};
use haantjes::hydro::{commuting_flows_check, initial_state, potential_densities, simulate, Grid, Scheme};
use haantjes::manifest::{Manifest, SCENARIOS};
use haantjes::report::{decimal, exit_code, run_checks, CheckOptions, Verdict, DEFAULT_TOL};
use haantjes::{Error, Result};

#[derive(Parser)]
#[command(name = "haantjes", version, about = "Certify Haantjes manifolds and evaluate Nijenhuis, Haantjes and Yano-Ako tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the certification pipeline and emit a JSON report.
    Check {
        /// Manifest path or packaged scenario name.
        manifest: String,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated check ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include wall-clock timings (the report is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Print torsion components of a field at a point.
    Torsion {
        manifest: String,
        #[arg(long)]
        field: String,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Comma-separated chart point; defaults to the base point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
        /// Refuse the Yano-Ako bracket when C is not symmetric and associative.
        #[arg(long)]
        enforce_pre: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Integrate u_t = K_j(u) u_x on a periodic grid and write a CSV series.
    Simulate {
        manifest: String,
        /// 1-based operator index.
        #[arg(long, default_value_t = 1)]
        flow: usize,
        /// Compare the flows of two operators instead (1-based).
        #[arg(long, num_args = 2, value_names = ["J", "L"])]
        pair: Option<Vec<usize>>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Period length.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 0.05)]
        amplitude: f64,
        /// Time step; with --pair, the largest of three halving steps.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Output every this many steps.
        #[arg(long, default_value_t = 10)]
        every: usize,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the packaged scenarios.
    Scenarios,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Nijenhuis,
    Haantjes,
    YanoAko,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Central4,
    Spectral,
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HAANTJES_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Check { manifest, points, seed, tol, only, report, timing } => {
            let m = Manifest::load(&manifest)?;
            let rep = run_checks(&m, &CheckOptions { points, seed, tol, only, timing })?;
            for r in &rep.checks {
                eprintln!("{:<20} {:<17} {}", r.id, r.verdict.as_str(), r.max_residual.as_deref().unwrap_or("-"));
            }
            eprintln!("overall: {}", rep.overall.as_str());
            emit(&report, &rep.to_json())?;
            Ok(if rep.overall == Verdict::Pass { 0 } else { 1 })
        }
        Command::Torsion { manifest, field, kind, at, enforce_pre, tol } => {
            let m = Manifest::load(&manifest)?;
            let f = m.field(&field)?;
            let p = at.unwrap_or_else(|| m.chart.base.clone());
            let n = m.chart.dim();
            if p.len() != n {
                return Err(Error::Schema(format!("--at: expected {n} coordinates, got {}", p.len())));
            }
            let mut text = String::new();
            match kind {
                Kind::Nijenhuis | Kind::Haantjes => {
                    let (sym, t) = match kind {
                        Kind::Nijenhuis => ("T", nijenhuis_torsion(f, &p)?),
                        _ => ("H", haantjes_torsion(f, &p)?),
                    };
                    for i in 0..n {
                        for j in 0..n {
                            for l in j + 1..n {
                                text += &format!("{sym}^{}_{}{} = {}\n", i + 1, j + 1, l + 1, decimal(t.get(i, j, l)));
                            }
                        }
                    }
                }
                Kind::YanoAko => {
                    let v = yano_ako_bracket(f, &p, enforce_pre, tol)?;
                    if let Some(w) = &v.warning {
                        eprintln!("warning: {w}");
                    }
                    let idx = (0..n.pow(5)).map(|k| (0..5).rev().map(|d| k / n.pow(d) % n + 1).collect::<Vec<_>>());
                    for (c, ix) in v.comps.iter().zip(idx) {
                        text += &format!("Y^{}_{}{}{}{} = {}\n", ix[0], ix[1], ix[2], ix[3], ix[4], decimal(*c));
                    }
                }
            }
            emit(&None, &text)?;
            Ok(0)
        }
        Command::Simulate { manifest, flow, pair, grid, length, amplitude, dt, steps, every, scheme, out } => {
            let m = Manifest::load(&manifest)?;
            let cand = HaantjesCandidate::from_manifest(&m)?;
            let op = |j: usize| -> Result<usize> {
                if j == 0 || j > cand.k.len() {
                    return Err(Error::Schema(format!("operator index {j} out of range 1..={}", cand.k.len())));
                }
                Ok(j - 1)
            };
            let scheme = |default: Scheme| match scheme {
                Some(SchemeArg::Central4) => Scheme::Central4,
                Some(SchemeArg::Spectral) => Scheme::Spectral,
                None => default,
            };
            let mut csv = String::new();
            if let Some(pair) = pair {
                let (j, l) = (op(pair[0])?, op(pair[1])?);
                let g = Grid::new(grid, length, scheme(Scheme::Spectral))?;
                let h = dt.unwrap_or(1e-2);
                let u0 = initial_state(&cand.chart, &g, amplitude, 2)?;
                let s = commuting_flows_check(&u0, &cand.k[j], &cand.k[l], &g, &[h, h / 2.0, h / 4.0])?;
                csv += "dt,discrepancy,order\n";
                for (i, (h, d)) in s.dts.iter().zip(&s.discrepancy).enumerate() {
                    let order = if i == 0 { String::new() } else { decimal(s.orders[i - 1]) };
                    csv += &format!("{},{},{}\n", decimal(*h), decimal(*d), order);
                }
            } else {
                let j = op(flow)?;
                let g = Grid::new(grid, length, scheme(Scheme::Central4))?;
                let dens = potential_densities(&cand);
                let rows = simulate(&cand.chart, &cand.k[j], &g, amplitude, dt.unwrap_or(1e-3), steps, every, dens)?;
                let heads: Vec<String> = (1..=cand.k.len()).map(|c| format!("drift_A{c}")).collect();
                csv += &format!("t,{},translation_error\n", heads.join(","));
                for r in rows {
                    let d: Vec<String> = r.drift.iter().map(|v| decimal(*v)).collect();
                    let e = r.translation_error.map(decimal).unwrap_or_default();
                    csv += &format!("{},{},{}\n", decimal(r.t), d.join(","), e);
                }
            }
            emit(&out, &csv)?;
            Ok(0)
        }
        Command::Scenarios => {
            for name in SCENARIOS.iter().map(|s| s.0) {
                let m = Manifest::load(name)?;
                println!("{name:<14} {}", m.description.as_deref().unwrap_or(""));
            }
            Ok(0)
        }
    }
}

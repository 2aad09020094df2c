use std::path::PathBuf;
use std::process::ExitCode;
use viscontact::config::{parse_config, RunConfig, RunMode};
use viscontact::driver::{execute, DriverError};
use viscontact::solver::SolverError;

const USAGE: &str = "usage: viscontact run --config PATH --out DIR \
[--mode elastic|viscoelastic|both|lipschitz] [--steps N] [--snapshot-times t1,t2,...]

exit codes: 0 all checks pass, 1 checks failed, 2 solver non-convergence, 3 config error";

fn fail_usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n{USAGE}");
    ExitCode::from(3)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.first().map(String::as_str) != Some("run") {
        return fail_usage("expected the `run` subcommand");
    }
    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut mode_override: Option<RunMode> = None;
    let mut steps_override: Option<usize> = None;
    let mut snapshot_times: Vec<f64> = vec![1.5, 2.75, 4.0, 5.0];
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| -> Result<String, String> {
            it.next()
                .cloned()
                .ok_or_else(|| format!("{name} expects a value"))
        };
        match flag.as_str() {
            "--config" => match value("--config") {
                Ok(v) => config_path = Some(PathBuf::from(v)),
                Err(e) => return fail_usage(&e),
            },
            "--out" => match value("--out") {
                Ok(v) => out_dir = Some(PathBuf::from(v)),
                Err(e) => return fail_usage(&e),
            },
            "--mode" => match value("--mode") {
                Ok(v) => match RunMode::parse(&v) {
                    Some(m) => mode_override = Some(m),
                    None => return fail_usage(&format!("unknown mode `{v}`")),
                },
                Err(e) => return fail_usage(&e),
            },
            "--steps" => match value("--steps") {
                Ok(v) => match v.parse::<usize>() {
                    Ok(n) if n > 0 => steps_override = Some(n),
                    _ => return fail_usage(&format!("invalid step count `{v}`")),
                },
                Err(e) => return fail_usage(&e),
            },
            "--snapshot-times" => match value("--snapshot-times") {
                Ok(v) => {
                    let parsed: Result<Vec<f64>, _> =
                        v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    match parsed {
                        Ok(ts) => snapshot_times = ts,
                        Err(_) => return fail_usage(&format!("invalid snapshot times `{v}`")),
                    }
                }
                Err(e) => return fail_usage(&e),
            },
            other => return fail_usage(&format!("unknown flag `{other}`")),
        }
    }
    let Some(out_dir) = out_dir else {
        return fail_usage("--out is required");
    };

    let mut cfg: RunConfig<f64> = match config_path {
        Some(path) => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            };
            match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(3);
                }
            }
        }
        None => RunConfig::default(),
    };
    if let Some(m) = mode_override {
        cfg.mode = m;
    }
    if let Some(n) = steps_override {
        cfg.n_steps = n;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return ExitCode::from(3);
    }

    match execute(&cfg, &out_dir, &snapshot_times) {
        Ok(exec) => {
            println!(
                "summary written to {} ({})",
                exec.summary_path.display(),
                if exec.all_ok {
                    "all checks pass"
                } else {
                    "some checks FAILED"
                }
            );
            if exec.all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(DriverError::Solver(SolverError::NoConvergence {
            step_index,
            iters,
            residual,
            ..
        })) => {
            eprintln!(
                "solver failed to converge at step {step_index} ({iters} iterations, residual {residual:e})"
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

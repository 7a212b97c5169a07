mod job;

use clap::Parser;
use hkl::ff::oracle;
use hkl::frobenius::Check;
use hkl::padic::build_field;
use hkl::suite::{deformation_suite, summarize, verify_suite};
use job::{Cli, Command, Job, UsageError};
use serde::Serialize;
use serde_json::{json, Value};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECISION: u8 = 3;

fn exit_for(e: &hkl::Error) -> u8 {
    use hkl::Error::*;
    match e {
        NotPrime(_) | InvalidParameter(_) | ZeroLambda => EXIT_USAGE,
        PrecisionInsufficient(_) | BudgetExceeded(_) | NonIntegral(_) => EXIT_PRECISION,
        Singular(_) => EXIT_FAIL,
    }
}

#[derive(Serialize)]
struct Inputs {
    command: &'static str,
    p: u64,
    a: usize,
    n: usize,
    lambda: u32,
    precision: Option<i64>,
    weight: Option<i64>,
    lambda_order: usize,
}

struct Outcome {
    report: Value,
    checks: Vec<Check>,
}

fn cmd_sum(job: &Job, k: Option<usize>) -> hkl::Result<Outcome> {
    if job.lambda == 0 {
        return Err(hkl::Error::ZeroLambda);
    }
    let cfg = build_field(job.p, job.a, 2)?;
    let field = cfg.residue_field();
    let k = k.unwrap_or(job.n + 1);
    let counts = oracle::kloosterman_counts(field, job.n, job.lambda)?;
    let sums = oracle::power_sums(field, job.n, job.lambda, k)?;
    let total: u64 = counts.iter().sum();
    let want = oracle::expected_total(cfg.q(), 1, job.n);
    let checks = vec![Check::new(
        "count_total",
        total as u128 == want,
        format!("{total} terms, expected (q - 1)^{}", job.n),
    )];
    let report = json!({
        "counts": counts,
        "power_sums": sums.iter().map(|s| s.counts().to_vec()).collect::<Vec<_>>(),
    });
    Ok(Outcome { report, checks })
}

fn cmd_lfunction(job: &Job) -> hkl::Result<Outcome> {
    let params = job.run_params();
    hkl::pipeline::validate(&params)?;
    let rep = hkl::pipeline::run_lfunction(&params, None)?;
    let checks = rep.checks.clone();
    Ok(Outcome { report: to_value(&rep), checks })
}

fn cmd_verify(job: &Job, only: Option<&str>) -> hkl::Result<Outcome> {
    let mut rep = verify_suite(&job.run_params(), job.lambda_order)?;
    if let Some(f) = only {
        rep.retain(f);
    }
    Ok(Outcome { report: to_value(&rep), checks: rep.checks })
}

fn cmd_deformation(job: &Job) -> hkl::Result<Outcome> {
    let precision = job.run_params().comparison_precision();
    let rep = deformation_suite(job.p, job.a, job.n, job.lambda, precision, job.lambda_order)?;
    let checks = rep.checks.clone();
    Ok(Outcome { report: to_value(&rep), checks })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn run(cli: &Cli) -> Result<u8, UsageError> {
    let job = Job::resolve(&cli.flags)?;
    let name = match cli.command {
        Command::Sum { .. } => "sum",
        Command::Lfunction => "lfunction",
        Command::Verify { .. } => "verify",
        Command::Deformation => "deformation",
    };
    let inputs = Inputs {
        command: name,
        p: job.p,
        a: job.a,
        n: job.n,
        lambda: job.lambda,
        precision: job.precision,
        weight: job.weight,
        lambda_order: job.lambda_order,
    };
    let start = Instant::now();
    let outcome = hkl::par::with_threads(job.parallel, || match &cli.command {
        Command::Sum { k } => cmd_sum(&job, *k),
        Command::Lfunction => cmd_lfunction(&job),
        Command::Verify { only } => cmd_verify(&job, only.as_deref()),
        Command::Deformation => cmd_deformation(&job),
    });
    let elapsed = start.elapsed();
    let (doc, code) = match outcome {
        Ok(o) => {
            let passed = o.checks.iter().all(|c| c.pass);
            let mut doc = json!({
                "inputs": inputs,
                "passed": passed,
                "summary": summarize(&o.checks),
                "report": o.report,
            });
            if job.timings {
                doc["timings_ms"] = json!(elapsed.as_millis() as u64);
            }
            for c in o.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {}", c.name, c.detail);
            }
            (doc, if passed { EXIT_PASS } else { EXIT_FAIL })
        }
        Err(e) => {
            eprintln!("error: {e}");
            (json!({ "inputs": inputs, "passed": false, "error": e.to_string() }), exit_for(&e))
        }
    };
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    print!("{text}");
    if let Some(path) = &job.json {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return Ok(EXIT_USAGE);
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(UsageError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gtens::combinatorics::to_decimal;
use gtens::enumerator::error_probability;
use gtens::montecarlo::{self, SimulationConfig};
use gtens::oracle::{exact_enumerators, OracleOptions};
use gtens::{Algorithm, BigRational, EnsembleSpec, EnumeratorTable, Method, Result};

use crate::args::{AnalyzeArgs, EnumerateArgs, SimulateArgs, VerifyArgs};

/// `Ok(false)` means the command ran but a self-check failed.
pub type Outcome = Result<bool>;

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_validated(args: &crate::args::Common) -> Result<EnsembleSpec> {
    let spec = args.source.load()?;
    spec.validate()?;
    Ok(spec)
}

pub fn enumerate(args: &EnumerateArgs) -> Outcome {
    let spec = load_validated(&args.common)?;
    let algorithm = Algorithm::from(args.common.algorithm);
    let table = EnumeratorTable::compute(&spec, algorithm, Method::from(args.method))?;
    let mut out = output(args.common.out.as_deref())?;
    table.write_csv(&mut out, "closed-form", args.common.precision)?;
    out.flush()?;

    let violations = table.row_sum_violations();
    if violations.is_empty() {
        eprintln!("row sums: all {} rows equal C({}, a)", spec.n + 1, spec.n);
        Ok(true)
    } else {
        for (a, sum, expected) in &violations {
            eprintln!("row sum mismatch at a={a}: {sum} != {expected}");
        }
        Ok(false)
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Outcome {
    let spec = load_validated(&args.common)?;
    let algorithm = Algorithm::from(args.common.algorithm);
    let grid = args.deltas.grid()?;
    let table = EnumeratorTable::compute(&spec, algorithm, Method::from(args.method))?;
    let precision = args.common.precision;
    let quantity = match algorithm {
        Algorithm::Comp => "false_alarm_probability",
        Algorithm::Dd => "misdetection_probability",
    };

    let mut out = output(args.common.out.as_deref())?;
    writeln!(
        out,
        "# algorithm={algorithm} quantity={quantity} spec_hash={}",
        spec.hash()
    )?;
    writeln!(out, "delta,probability,numerator,denominator")?;
    for delta in &grid {
        let p: BigRational = error_probability(&table, delta.clone())?;
        writeln!(
            out,
            "{},{},{},{}",
            to_decimal(delta, precision),
            to_decimal(&p, precision),
            p.numer(),
            p.denom()
        )?;
    }
    out.flush()?;
    Ok(true)
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    let spec = load_validated(&args.common)?;
    let algorithm = Algorithm::from(args.common.algorithm);
    let grid = args.deltas.grid()?;
    let config = SimulationConfig {
        graphs: args.graphs,
        patterns_per_graph: args.patterns,
        seed: args.seed,
        workers: args.workers,
        ..Default::default()
    };
    let mut reports = if args.deltas.is_grid() {
        montecarlo::sweep(&spec, algorithm, &grid, &config)?
    } else {
        vec![montecarlo::simulate(&spec, algorithm, &grid[0], &config)?]
    };
    if args.analytic {
        let table = EnumeratorTable::compute(&spec, algorithm, Method::Auto)?;
        for r in &mut reports {
            r.analytic = Some(error_probability(&table, r.delta.clone())?);
        }
    }
    let mut out = output(args.common.out.as_deref())?;
    montecarlo::write_csv(&reports, &mut out, args.common.precision)?;
    out.flush()?;
    Ok(true)
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let spec = args.common.source.load()?;
    let algorithm = Algorithm::from(args.common.algorithm);
    let options = OracleOptions {
        limit: args.oracle_limit,
        ..Default::default()
    };
    let report = exact_enumerators(&spec, algorithm, options)?;
    let table = EnumeratorTable::compute(&spec, algorithm, Method::Auto)?;

    let stdout = io::stdout();
    let mut console = stdout.lock();
    let mut passed = 0;
    for ((a, j), expected) in &report.exact_table.values {
        let got = table.get(*a, *j);
        if &got == expected {
            passed += 1;
            writeln!(console, "PASS a={a} j={j} value={expected}")?;
        } else {
            writeln!(
                console,
                "FAIL a={a} j={j} closed_form={got} oracle={expected}"
            )?;
        }
    }
    let total = report.exact_table.values.len();
    writeln!(
        console,
        "{algorithm}: {passed}/{total} cells match over {} matchings",
        report.matchings_enumerated
    )?;
    console.flush()?;

    if let Some(path) = args.common.out.as_deref() {
        let mut out = output(Some(path))?;
        report
            .exact_table
            .write_csv(&mut out, "oracle", args.common.precision)?;
        out.flush()?;
    }
    Ok(passed == total && report.impossible_errors == 0)
}

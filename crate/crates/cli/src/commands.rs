use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fdeconv::estimator::{deconvolve, EstimatorConfig, Mode, Plan};
use fdeconv::grid_io::{read_grid, write_grid};
use fdeconv::rates::{
    compare_strategies, exponent_multi, parse_rational, BesovBall, Index, RateReport, RateScalar,
};
use fdeconv::simlab::{
    kernel_samples, mise_sweep, run_mise, table1, table1_orderings, write_sweep, write_table1_csv,
    KernelShape, SimConfig, SimKernel, Table1Cell, Table1Config, TestFunction, TABLE1_SIGMA,
};
use fdeconv::spectra::{default_nu_range, estimate_nu, kernel_spectrum, ConvolutionScale};
use fdeconv::{Execution, ObservationGrid};
use serde_json::json;

use crate::args::*;
use crate::error::CliError;
use crate::manifest::Manifest;

type Res<T> = Result<T, CliError>;

pub fn dispatch(command: Command, manifest: &mut Manifest) -> Res<()> {
    match command {
        Command::Deconvolve(a) => run_deconvolve(a, manifest),
        Command::Simulate(a) => run_simulate(a, manifest),
        Command::Table1(a) => run_table1(a, manifest),
        Command::Rates(a) => run_rates(a, manifest),
        Command::Compare(a) => run_compare(a, manifest),
        Command::NuEstimate(a) => run_nu_estimate(a, manifest),
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{flag}: {msg}"))
}

fn parse_lib<T: std::str::FromStr<Err = fdeconv::Error>>(flag: &str, v: &str) -> Res<T> {
    v.parse().map_err(|e| usage(flag, e))
}

fn auto_or<T: std::str::FromStr>(flag: &str, v: &str) -> Res<Option<T>> {
    if v == "auto" {
        return Ok(None);
    }
    v.parse()
        .map(Some)
        .map_err(|_| usage(flag, format!("expected a number or \"auto\", got '{v}'")))
}

fn none_or(v: &str) -> Option<&str> {
    (v != "none").then_some(v)
}

fn parse_range(flag: &str, v: &str) -> Res<Option<(i64, i64)>> {
    if v == "auto" {
        return Ok(None);
    }
    let bad = || usage(flag, format!("expected \"lo:hi\" or \"auto\", got '{v}'"));
    let (lo, hi) = v.split_once(':').ok_or_else(bad)?;
    Ok(Some((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    )))
}

fn parse_execution(v: &str) -> Res<Execution> {
    match v {
        "parallel" => Ok(Execution::Parallel),
        "sequential" => Ok(Execution::Sequential),
        _ => Err(usage("execution", format!("expected parallel|sequential, got '{v}'"))),
    }
}

fn estimator_config(a: &EstimatorArgs) -> Res<EstimatorConfig> {
    Ok(EstimatorConfig {
        c_beta: auto_or("cbeta", &a.cbeta)?,
        nu: auto_or("nu", &a.nu)?,
        nu_range: parse_range("nu-range", &a.nu_range)?,
        m0: a.m0,
        m0_spatial: a.m0_spatial,
        vanishing_moments: a.moments,
        j_cutoff: auto_or("j", &a.j_cutoff)?,
        j_spatial: auto_or("j-spatial", &a.j_spatial)?,
        mode: Mode::Functional,
        execution: parse_execution(&a.execution)?,
    })
}

fn read_input(path: &Path) -> Res<ObservationGrid> {
    read_grid(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

enum KernelSource {
    Builtin(KernelShape),
    File(PathBuf),
}

fn kernel_source(v: &str) -> KernelSource {
    match v.parse::<KernelShape>() {
        Ok(shape) => KernelSource::Builtin(shape),
        Err(_) => KernelSource::File(PathBuf::from(v)),
    }
}

/// Kernel samples for an `m x n` grid; a one-row file is repeated for every profile.
fn kernel_for(source: &KernelSource, m: usize, n: usize) -> Res<Vec<f64>> {
    match source {
        KernelSource::Builtin(shape) => Ok(kernel_samples(m, n, *shape)),
        KernelSource::File(path) => {
            let k = read_input(path)?;
            if k.n() != n {
                return Err(CliError::Data(format!(
                    "kernel {} has N = {}, data has N = {n}",
                    path.display(),
                    k.n()
                )));
            }
            match k.m() {
                1 => Ok(k.samples().repeat(m)),
                km if km == m => Ok(k.into_samples()),
                km => Err(CliError::Data(format!(
                    "kernel {} has M = {km}, data has M = {m} (use one row or M rows)",
                    path.display()
                ))),
            }
        }
    }
}

fn write_text(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn create(path: &Path) -> Res<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn manifest_path(out: Option<&Path>, command: &str) -> PathBuf {
    match out {
        Some(p) => with_suffix(p, ".manifest"),
        None => PathBuf::from(format!("fdeconv-{command}.manifest")),
    }
}

fn record_plan(manifest: &mut Manifest, prefix: &str, plan: &Plan) {
    for (k, v) in plan.describe() {
        manifest.resolved.push((format!("{prefix}{k}"), v));
    }
}

fn run_deconvolve(a: DeconvolveArgs, manifest: &mut Manifest) -> Res<()> {
    let mut grid = read_input(&a.input)?;
    if a.sigma != "file" {
        let sigma: f64 = a
            .sigma
            .parse()
            .map_err(|_| usage("sigma", format!("expected a number or \"file\", got '{}'", a.sigma)))?;
        grid = ObservationGrid::with_dims(grid.dims().to_vec(), grid.n(), sigma, grid.into_samples())?;
    }
    if a.dims != "flat" {
        let dims: Vec<usize> = a
            .dims
            .split('x')
            .map(|d| d.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| usage("dims", format!("expected \"d1xd2x...\", got '{}'", a.dims)))?;
        grid = ObservationGrid::with_dims(dims, grid.n(), grid.sigma(), grid.into_samples())?;
    }
    let (m, n) = (grid.m(), grid.n());
    let scale: ConvolutionScale = parse_lib("scale", &a.scale)?;
    let samples = kernel_for(&kernel_source(&a.kernel), m, n)?;
    let ks = kernel_spectrum(&samples, m, n, scale)?;
    let cfg = EstimatorConfig {
        mode: parse_lib("mode", &a.mode)?,
        ..estimator_config(&a.estimator)?
    };
    let rec = deconvolve(&grid, &ks, &cfg)?;

    write_grid(&a.out, &rec.to_grid()?)?;
    let coeff_path = if a.coeffs == "auto" {
        with_suffix(&a.out, ".coeffs.csv")
    } else {
        PathBuf::from(&a.coeffs)
    };
    let mut w = create(&coeff_path)?;
    rec.coeffs.write_csv(&mut w)?;
    w.flush().map_err(|e| CliError::Data(e.to_string()))?;

    let kept = rec.coeffs.kept().iter().filter(|&&k| k).count();
    record_plan(manifest, "", &rec.plan);
    manifest.resolved.push(("kept".into(), kept.to_string()));
    manifest.resolved.push(("coefficients".into(), rec.coeffs.len().to_string()));
    manifest.resolved.push(("coeffs_path".into(), coeff_path.display().to_string()));
    let mpath = manifest_path(Some(&a.out), "deconvolve");
    manifest.write(&mpath)?;

    let p = &rec.plan;
    println!("mode = {}", p.mode.name());
    println!("grid = {} x {}", p.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"), n);
    println!("nu = {:.4}  c_beta = {:.4}  J = {}  J' = {:?}", p.nu, p.c_beta, p.j_cutoff, p.j_spatial);
    println!("kept {kept} of {} coefficients", rec.coeffs.len());
    println!("wrote {}, {}, {}", a.out.display(), coeff_path.display(), mpath.display());
    Ok(())
}

fn sim_kernel(v: &str, m: usize, n: usize) -> Res<SimKernel> {
    match kernel_source(v) {
        KernelSource::Builtin(shape) => Ok(SimKernel::Builtin(shape)),
        src => Ok(SimKernel::Samples(kernel_for(&src, m, n)?)),
    }
}

fn parse_modes(v: &str) -> Res<Vec<Mode>> {
    match v {
        "both" => Ok(vec![Mode::Functional, Mode::Separate]),
        other => Ok(vec![parse_lib("modes", other)?]),
    }
}

fn run_simulate(a: SimulateArgs, manifest: &mut Manifest) -> Res<()> {
    let est = estimator_config(&a.estimator)?;
    let cfg = SimConfig {
        m: a.m,
        n: a.n,
        sigma: a.sigma,
        f1: parse_lib::<TestFunction>("f1", &a.f1)?,
        f2: parse_lib::<TestFunction>("f2", &a.f2)?,
        runs: a.runs,
        seed: a.seed,
        kernel: SimKernel::Builtin(KernelShape::Circular),
        scale: parse_lib("scale", &a.scale)?,
        execution: est.execution,
    };
    let out = none_or(&a.out).map(PathBuf::from);

    if let Some(list) = none_or(&a.sweep_m) {
        let ms: Vec<usize> = list
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| usage("sweep-m", format!("expected comma-separated integers, got '{list}'")))?;
        if !matches!(kernel_source(&a.kernel), KernelSource::Builtin(_)) {
            return Err(usage("kernel", "a sweep over M needs a built-in kernel shape"));
        }
        let cfg = SimConfig { kernel: sim_kernel(&a.kernel, a.m, a.n)?, ..cfg };
        let points = mise_sweep(&cfg, &est, &ms)?;
        let slope = fdeconv::simlab::loglog_slope(&points);
        let mut text = Vec::new();
        write_sweep(&points, &mut text)?;
        print!("{}", String::from_utf8_lossy(&text));
        println!("# log-log slope {slope:.6}");
        if let Some(p) = &out {
            write_text(p, &String::from_utf8_lossy(&text))?;
        }
        for pt in &points {
            manifest.resolved.push((format!("mise.M{}", pt.m), pt.mean_mise.to_string()));
        }
        manifest.resolved.push(("loglog_slope".into(), slope.to_string()));
        manifest.write(&manifest_path(out.as_deref(), "simulate"))?;
        return Ok(());
    }

    let cfg = SimConfig { kernel: sim_kernel(&a.kernel, a.m, a.n)?, ..cfg };
    let modes = parse_modes(&a.modes)?;
    let results = run_mise(&cfg, &est, &modes)?;
    let cells: Vec<Table1Cell> = results
        .iter()
        .map(|r| Table1Cell {
            f1: cfg.f1,
            f2: cfg.f2,
            m: cfg.m,
            sigma: cfg.sigma,
            mode: r.mode,
            mean_mise: r.mean_mise,
            sd_mise: r.std_mise,
            runs: cfg.runs,
            seed: cfg.seed,
        })
        .collect();
    for r in &results {
        println!(
            "{:<10} mean MISE {:.6}  sd {:.6}  se {:.6}  (nu {:.4}, c_beta {:.4}, J {})",
            r.mode.name(),
            r.mean_mise,
            r.std_mise,
            r.std_error(),
            r.plan.nu,
            r.plan.c_beta,
            r.plan.j_cutoff
        );
        record_plan(manifest, &format!("{}.", r.mode.name()), &r.plan);
        manifest.resolved.push((format!("{}.mean_mise", r.mode.name()), r.mean_mise.to_string()));
        manifest.resolved.push((format!("{}.sd_mise", r.mode.name()), r.std_mise.to_string()));
    }
    if let Some(p) = &out {
        write_table1_csv(&cells, create(p)?)?;
    }
    if let Some(p) = none_or(&a.per_run) {
        let mut text = String::from("replicate");
        for r in &results {
            text += &format!(",{}", r.mode.name());
        }
        text.push('\n');
        for i in 0..cfg.runs {
            text += &i.to_string();
            for r in &results {
                text += &format!(",{}", r.per_run[i]);
            }
            text.push('\n');
        }
        write_text(Path::new(p), &text)?;
    }
    manifest.write(&manifest_path(out.as_deref(), "simulate"))?;
    Ok(())
}

fn run_table1(a: Table1Args, manifest: &mut Manifest) -> Res<()> {
    let est = estimator_config(&a.estimator)?;
    let kernel = match kernel_source(&a.kernel) {
        KernelSource::Builtin(shape) => shape,
        KernelSource::File(_) => return Err(usage("kernel", "expected circular|one-sided")),
    };
    let cfg = Table1Config {
        runs: a.runs,
        seed: a.seed,
        kernel,
        scale: parse_lib("scale", &a.scale)?,
        execution: est.execution,
        estimator: est,
    };
    let cells = table1(&cfg)?;
    write_table1_csv(&cells, create(&a.out)?)?;
    let (matched, total) = table1_orderings(&cells);
    let mut ratios = Vec::new();
    for c in cells.iter().filter(|c| c.sigma == TABLE1_SIGMA[0]) {
        if let Some(hi) = cells
            .iter()
            .find(|d| d.sigma == TABLE1_SIGMA[1] && d.f1 == c.f1 && d.f2 == c.f2 && d.m == c.m && d.mode == c.mode)
        {
            ratios.push(hi.mean_mise / c.mean_mise);
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    println!("f1        f2        M    sigma  functional  separate");
    for pair in cells.chunks(2) {
        println!(
            "{:<9} {:<9} {:<4} {:<6} {:<11.5} {:.5}",
            pair[0].f1.name(),
            pair[0].f2.name(),
            pair[0].m,
            pair[0].sigma,
            pair[0].mean_mise,
            pair[1].mean_mise
        );
    }
    println!("orderings matched: {matched}/{total}");
    println!("MISE(sigma=1)/MISE(sigma=0.5) range: [{lo:.3}, {hi:.3}]");
    println!("wrote {}", a.out.display());
    manifest.resolved.push(("cells".into(), cells.len().to_string()));
    manifest.resolved.push(("orderings_matched".into(), format!("{matched}/{total}")));
    manifest.resolved.push(("sigma_ratio_range".into(), format!("{lo},{hi}")));
    manifest.write(&manifest_path(Some(&a.out), "table1"))
}

fn index_of<T: RateScalar>(flag: &str, v: &str, parse: impl Fn(&str) -> Option<T>) -> Res<Index<T>> {
    if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("infinity") {
        return Ok(Index::Infinite);
    }
    parse(v)
        .map(Index::Finite)
        .ok_or_else(|| usage(flag, format!("expected a number, a fraction or \"inf\", got '{v}'")))
}

struct RateInputs<T> {
    ball: BesovBall<T>,
    nu: T,
}

fn rate_inputs<T: RateScalar>(a: &RatesArgs, parse: impl Fn(&str) -> Option<T>) -> Res<RateInputs<T>> {
    let num = |flag: &str, v: &str| parse(v).ok_or_else(|| usage(flag, format!("cannot parse '{v}'")));
    let s2 = a
        .s2
        .split(',')
        .map(|v| num("s2", v.trim()))
        .collect::<Res<Vec<T>>>()?;
    let ball = BesovBall::new(
        num("s1", &a.s1)?,
        s2,
        index_of("p", &a.p, &parse)?,
        index_of("q", &a.q, &parse)?,
        a.radius,
    )?;
    Ok(RateInputs { ball, nu: num("nu", &a.nu)? })
}

fn report_json<T: RateScalar>(rep: &RateReport<T>, verdict: &Option<(String, Option<f64>)>) -> serde_json::Value {
    json!({
        "d": rep.d.to_string(),
        "d_value": rep.d.to_f64(),
        "d1": rep.d1,
        "regime": rep.regime.name(),
        "dense_boundary": rep.dense_boundary,
        "sparse_boundary": rep.sparse_boundary,
        "ties": rep.ties,
        "warning": rep.regime_warning,
        "verdict": verdict.as_ref().map(|v| v.0.clone()),
        "surrogate": verdict.as_ref().and_then(|v| v.1),
    })
}

fn report_text<T: RateScalar>(rep: &RateReport<T>, verdict: &Option<(String, Option<f64>)>) -> String {
    let mut s = format!("d = {}\n", rep.d);
    if !rep.d.to_string().parse::<f64>().is_ok_and(|x| x == rep.d.to_f64()) {
        s += &format!("d ~ {:.12}\n", rep.d.to_f64());
    }
    s += &format!("d1 = {}\nregime {}\n", rep.d1, rep.regime.name());
    if rep.dense_boundary {
        s += "on the dense boundary s1 = s2 (2 nu + 1)\n";
    }
    if rep.sparse_boundary {
        s += "on the sparse boundary s1 = (2 nu + 1)(1/p - 1/2)\n";
    }
    if rep.ties > 0 {
        s += &format!("tied spatial axes: {}\n", rep.ties);
    }
    if let Some(w) = &rep.regime_warning {
        s += &format!("warning: {w}\n");
    }
    if let Some((v, sur)) = verdict {
        s += &format!("verdict {v}\n");
        if let Some(x) = sur {
            s += &format!("surrogate = {x}\n");
        }
    }
    s
}

fn emit(text: String, out: Option<&str>, command: &str, manifest: &mut Manifest) -> Res<()> {
    print!("{text}");
    if let Some(p) = out {
        write_text(Path::new(p), &text)?;
    }
    manifest.write(&manifest_path(out.map(Path::new), command))
}

fn run_rates(a: RatesArgs, manifest: &mut Manifest) -> Res<()> {
    let sizes = match (none_or(&a.m), none_or(&a.n)) {
        (None, None) => None,
        (Some(m), Some(n)) => Some((
            m.parse::<f64>().map_err(|_| usage("m", format!("cannot parse '{m}'")))?,
            n.parse::<f64>().map_err(|_| usage("n", format!("cannot parse '{n}'")))?,
        )),
        _ => return Err(CliError::Usage("--m and --n must be given together".into())),
    };
    let exact = rate_inputs(&a, |v| parse_rational(v).ok());
    let text = match exact {
        Ok(inp) => rate_report(&inp, sizes, a.json, manifest)?,
        Err(_) => {
            let inp = rate_inputs(&a, |v| v.trim().parse::<f64>().ok())?;
            rate_report(&inp, sizes, a.json, manifest)?
        }
    };
    emit(text, none_or(&a.out), "rates", manifest)
}

fn rate_report<T: RateScalar>(
    inp: &RateInputs<T>,
    sizes: Option<(f64, f64)>,
    as_json: bool,
    manifest: &mut Manifest,
) -> Res<String> {
    let rep = exponent_multi(&inp.ball, &inp.nu)?;
    let verdict = sizes.map(|(m, n)| {
        let (v, s) = compare_strategies(
            inp.ball.s1.to_f64(),
            inp.ball.s2_min().0.to_f64(),
            inp.nu.to_f64(),
            m,
            n,
        );
        (v.name().to_string(), s)
    });
    manifest.resolved.push(("d".into(), rep.d.to_string()));
    manifest.resolved.push(("d1".into(), rep.d1.to_string()));
    manifest.resolved.push(("regime".into(), rep.regime.name().into()));
    if let Some((v, _)) = &verdict {
        manifest.resolved.push(("verdict".into(), v.clone()));
    }
    Ok(if as_json {
        format!("{}\n", report_json(&rep, &verdict))
    } else {
        report_text(&rep, &verdict)
    })
}

fn run_compare(a: CompareArgs, manifest: &mut Manifest) -> Res<()> {
    for (flag, v) in [("s1", a.s1), ("s2", a.s2), ("m", a.m), ("n", a.n)] {
        if v.is_nan() || v <= 0.0 {
            return Err(usage(flag, "must be positive"));
        }
    }
    if a.nu.is_nan() || a.nu < 0.0 {
        return Err(usage("nu", "must be >= 0"));
    }
    let (v, s) = compare_strategies(a.s1, a.s2, a.nu, a.m, a.n);
    manifest.resolved.push(("verdict".into(), v.name().into()));
    let text = if a.json {
        format!("{}\n", json!({ "verdict": v.name(), "surrogate": s }))
    } else {
        let mut t = format!("verdict {}\n", v.name());
        match s {
            Some(x) => t += &format!("surrogate = {x}\n"),
            None => t += "s1 <= s2 (2 nu + 1): joint recovery is never worse\n",
        }
        t
    };
    emit(text, none_or(&a.out), "compare", manifest)
}

fn run_nu_estimate(a: NuEstimateArgs, manifest: &mut Manifest) -> Res<()> {
    let source = kernel_source(&a.kernel);
    let (m, n, samples) = match &source {
        KernelSource::Builtin(shape) => (a.m, a.n, kernel_samples(a.m, a.n, *shape)),
        KernelSource::File(path) => {
            let k = read_input(path)?;
            (k.m(), k.n(), k.into_samples())
        }
    };
    let scale: ConvolutionScale = parse_lib("scale", &a.scale)?;
    let mut ks = kernel_spectrum(&samples, m, n, scale)?;
    let range = parse_range("range", &a.range)?.unwrap_or_else(|| default_nu_range(n));
    let nu = estimate_nu(&mut ks, range)?;
    for (k, v) in [
        ("m", m.to_string()),
        ("n", n.to_string()),
        ("range", format!("{}:{}", range.0, range.1)),
        ("nu", nu.to_string()),
        ("c1", ks.c1.to_string()),
        ("c2", ks.c2.to_string()),
    ] {
        manifest.resolved.push((k.into(), v));
    }
    let text = format!(
        "nu = {nu:.6}\nc1 = {:.6e}\nc2 = {:.6e}\nrange = {}:{}\n",
        ks.c1, ks.c2, range.0, range.1
    );
    emit(text, none_or(&a.out), "nu-estimate", manifest)
}

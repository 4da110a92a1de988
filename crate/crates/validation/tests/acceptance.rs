//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Exits non-zero if any fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;

use asymptopia::category::{
    braiding_asymptotic, braiding_exact, cone_homotopy, ChargeAutomorphism,
};
use asymptopia::field::symplectic;
use asymptopia_cli::config::{RunConfig, DEFAULT_CONFIG};
use asymptopia_cli::report::{Report, Row};
use asymptopia_cli::suite::{run_suite, Suite};
use asymptopia_validation::{gaussian_pair_sigma, gaussian_pair_sigma_closed};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn default_config() -> RunConfig {
    RunConfig::parse(DEFAULT_CONFIG).expect("built-in config parses")
}

fn pair(config: &RunConfig) -> (ChargeAutomorphism, ChargeAutomorphism) {
    let grid = config.grid().expect("grid");
    let [a, b] = &config.pairs[0];
    let build = |n: &str| {
        config
            .charge(n)
            .expect("charge")
            .build(grid.clone())
            .expect("build")
    };
    (build(a), build(b))
}

fn rows<'a>(report: &'a Report, id: &str) -> Vec<&'a Row> {
    report.rows.iter().filter(|r| r.check_id == id).collect()
}

fn worst(report: &Report, id: &str) -> f64 {
    rows(report, id)
        .iter()
        .map(|r| r.residual)
        .fold(0.0, f64::max)
}

fn sweep_residual(report: &Report, id: &str, radius: f64) -> f64 {
    rows(report, id)
        .iter()
        .find(|r| r.radius == Some(radius))
        .map(|r| r.residual)
        .unwrap_or(f64::NAN)
}

fn criterion_1() -> Outcome {
    let oracle = gaussian_pair_sigma(1.0, 1.0, 1.0, 1.0, 0.0);
    let closed = 1.0 / 2f64.sqrt();
    if (oracle - closed).abs() > 1e-9
        || (gaussian_pair_sigma_closed(1.0, 1.0, 1.0, 1.0, 0.0) - closed).abs() > 1e-15
    {
        return outcome(
            false,
            format!("oracle {oracle} disagrees with closed form {closed}"),
        );
    }
    let start = Instant::now();
    let (gamma, delta) = pair(&default_config());
    let sigma = symplectic(gamma.data(), delta.data()).expect("sigma");
    let elapsed = start.elapsed().as_secs_f64();
    let err = (sigma - closed).abs();
    outcome(
        err <= 1e-6 && elapsed < 1.0,
        format!("sigma = {sigma:.12}, |sigma - 1/sqrt2| = {err:.2e} (tol 1e-6), oracle = {oracle:.12}, {elapsed:.3} s (limit 1 s)"),
    )
}

fn criterion_2() -> Outcome {
    let (gamma, delta) = pair(&default_config());
    let sigma = symplectic(gamma.data(), delta.data()).expect("sigma");
    let eps = braiding_exact(&gamma, &delta).expect("braiding").coeff();
    let err = (eps - Complex64::from_polar(1.0, -sigma)).norm();
    outcome(
        err <= 1e-12,
        format!("eps = {eps:.12}, |eps - exp(-i sigma)| = {err:.2e} (tol 1e-12)"),
    )
}

fn criterion_3() -> Outcome {
    let config = default_config();
    let start = Instant::now();
    let (gamma, delta) = pair(&config);
    let eps = braiding_exact(&gamma, &delta).expect("braiding").coeff();
    let sweep = braiding_asymptotic(
        &gamma,
        &delta,
        &config.cones[0].spec().expect("cone"),
        &config.radii,
    )
    .expect("sweep");
    let elapsed = start.elapsed().as_secs_f64();
    let res: Vec<f64> = sweep.phases.iter().map(|p| (p - eps).norm()).collect();
    let (first, last) = (res[0], *res.last().expect("radii"));
    let limit_err = (sweep.limit - eps).norm();
    outcome(
        limit_err <= 1e-3 && last < first && elapsed < 60.0,
        format!(
            "|limit - eps| = {limit_err:.4e} (tol 1e-3), residual R=10: {first:.4e}, R=40: {last:.4e}, {elapsed:.2} s (limit 60 s)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let config = default_config();
    let (gamma, delta) = pair(&config);
    let eps = braiding_exact(&gamma, &delta).expect("braiding").coeff();
    let h = &config.homotopy;
    let base = config.cone(&h.cone).expect("cone").spec().expect("spec");
    let chain = base
        .rotation_chain(h.rotation_axis, h.step_deg.to_radians(), 6)
        .expect("chain");
    let sweeps = cone_homotopy(&gamma, &delta, &chain, &config.radii).expect("homotopy");
    let limits: Vec<Complex64> = sweeps.iter().map(|s| s.limit).collect();
    let spread = limits
        .iter()
        .flat_map(|a| limits.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    let off = limits.iter().map(|l| (l - eps).norm()).fold(0.0, f64::max);
    outcome(
        spread <= 1e-3 && off <= 1e-3,
        format!("{} cones, mutual spread = {spread:.2e} (tol 1e-3), max |limit - eps| = {off:.4e} (tol 1e-3)", limits.len()),
    )
}

fn criterion_5(laws: &Report, config: &RunConfig) -> Outcome {
    let ids = [
        "laws.hexagon",
        "laws.naturality",
        "laws.interchange",
        "laws.associativity",
        "laws.unit",
        "laws.weyl_cocycle",
    ];
    let parts: Vec<String> = ids
        .iter()
        .map(|id| format!("{}={:.1e}", &id[5..], worst(laws, id)))
        .collect();
    let max = ids.iter().map(|id| worst(laws, id)).fold(0.0, f64::max);
    let samples = config.laws.samples;
    outcome(
        max <= 1e-12 && samples >= 100,
        format!(
            "max {max:.2e} (tol 1e-12) over {samples} samples, seed {}: {}",
            config.seed,
            parts.join(" ")
        ),
    )
}

fn criterion_6(decay: &Report) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, id) in [
        ("implementation", "decay.implementation"),
        ("abelianness", "decay.abelianness"),
        ("tensor abelianness", "decay.tensor_abelianness"),
    ] {
        let (r10, r40) = (
            sweep_residual(decay, id, 10.0),
            sweep_residual(decay, id, 40.0),
        );
        let ok = r40 < 1e-2 && r40 < r10;
        pass &= ok;
        parts.push(format!(
            "{name} R=10 {r10:.3e} R=40 {r40:.3e} {}",
            if ok { "ok" } else { "over" }
        ));
    }
    outcome(pass, format!("{} (tol 1e-2)", parts.join(", ")))
}

fn criterion_7(decay: &Report) -> Outcome {
    let r40 = sweep_residual(decay, "decay.extension", 40.0);
    outcome(
        r40 < 1e-2,
        format!("extension residual R=40 {r40:.3e} (tol 1e-2)"),
    )
}

fn criterion_8(laws: &Report, config: &RunConfig) -> Outcome {
    let intertwiner = worst(laws, "laws.intertwiner");
    let gram = rows(laws, "laws.gram")[0].value_re;
    let commutator = worst(laws, "laws.commutator_pi");
    let labels = config.laws.gram_labels;
    outcome(
        intertwiner <= 1e-12 && gram >= -1e-10 && labels <= 8 && commutator <= 1e-10,
        format!(
            "intertwiner {intertwiner:.2e} (tol 1e-12), Gram min eigenvalue {gram:.3e} over {labels} labels (>= -1e-10), |commutator - 2| {commutator:.2e} (tol 1e-10)"
        ),
    )
}

fn criterion_9(seq: &Report, config: &RunConfig) -> Outcome {
    let p = &config.tail_policy;
    let default_policy = (p.window_start, p.sample_count, p.tolerance) == (32, 16, 1e-6);
    let unitary = rows(seq, "seqalg.polar_unitary")[0].residual;
    let null = rows(seq, "seqalg.polar_null")[0].residual;
    let checks = [
        "seqalg.polar_unitary",
        "seqalg.polar_null",
        "seqalg.subsequence_stable",
        "seqalg.subsequence_split",
    ];
    let failed: Vec<&str> = checks
        .iter()
        .copied()
        .filter(|id| rows(seq, id).iter().any(|r| !r.pass))
        .collect();
    outcome(
        default_policy && unitary < 1e-12 && failed.is_empty(),
        format!(
            "unitarity defect {unitary:.2e} (< 1e-12), null distance {null:.2e} (tau 1e-6), policy ({}, {}, {:e}){}",
            p.window_start,
            p.sample_count,
            p.tolerance,
            if failed.is_empty() { String::new() } else { format!(", failing: {}", failed.join(" ")) }
        ),
    )
}

/// The CLI binary next to the test executable's `deps` directory.
fn cli_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let path = exe
        .parent()?
        .parent()?
        .join(format!("asymptopia{}", std::env::consts::EXE_SUFFIX));
    path.exists().then_some(path)
}

fn criterion_10() -> Outcome {
    let dir = std::env::temp_dir().join(format!("asymptopia-acceptance-{}", std::process::id()));
    let result = match cli_binary() {
        Some(bin) => {
            let mut outputs = Vec::new();
            for k in 0..2 {
                let out = dir.join(format!("run{k}"));
                let status = Command::new(&bin)
                    .args(["verify", "--config", "default", "--seed", "0", "--out"])
                    .arg(&out)
                    .stderr(std::process::Stdio::null())
                    .status();
                match status {
                    Ok(s) if s.code() == Some(0) || s.code() == Some(1) => {
                        outputs.push(std::fs::read(out.join("report.csv")).unwrap_or_default())
                    }
                    other => return outcome(false, format!("verify run failed: {other:?}")),
                }
            }
            let same = !outputs[0].is_empty() && outputs[0] == outputs[1];
            outcome(
                same,
                format!(
                    "two `verify --config default --seed 0` runs, {} bytes, identical: {same}",
                    outputs[0].len()
                ),
            )
        }
        None => {
            let config = default_config();
            let a = run_suite(&config, Suite::All).and_then(|r| r.to_csv());
            let b = run_suite(&config, Suite::All).and_then(|r| r.to_csv());
            match (a, b) {
                (Ok(a), Ok(b)) => outcome(
                    a == b,
                    format!(
                        "binary not built; two in-process runs, {} bytes, identical: {}",
                        a.len(),
                        a == b
                    ),
                ),
                (a, b) => outcome(
                    false,
                    format!("in-process runs failed: {:?} {:?}", a.err(), b.err()),
                ),
            }
        }
    };
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn main() -> ExitCode {
    let config = default_config();
    let laws = run_suite(&config, Suite::Laws).expect("laws suite");
    let decay = run_suite(&config, Suite::Decay).expect("decay suite");
    let seq = run_suite(&config, Suite::Seqalg).expect("seqalg suite");
    let results = [
        ("1 symplectic oracle", criterion_1()),
        ("2 exact braiding value", criterion_2()),
        ("3 bi-asymptotic convergence", criterion_3()),
        ("4 cone rotation symmetry", criterion_4()),
        ("5 coherence suite", criterion_5(&laws, &config)),
        ("6 residual decay", criterion_6(&decay)),
        ("7 extension independence", criterion_7(&decay)),
        ("8 Weyl model validity", criterion_8(&laws, &config)),
        ("9 sequence algebra corpus", criterion_9(&seq, &config)),
        ("10 determinism", criterion_10()),
    ];
    let mut failed = Vec::new();
    for (name, o) in &results {
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(*name);
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}

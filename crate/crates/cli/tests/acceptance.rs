//! Acceptance suite. Each criterion runs independently and prints one
//! `PASS`/`FAIL` line with its runtime; the process fails if any criterion
//! fails or overruns its time budget.

use std::time::{Duration, Instant};

use zerodiag::construct::{
    combine, double_drt, drt_alpha, omzd_from_drt, paley_tournament, seed, symmetric_coefficients,
    symmetric_omzd, Branch, SeedKey,
};
use zerodiag::format::{decode_json, encode_json};
use zerodiag::graphs::{q2_certificate, GraphSpec, Q2Status};
use zerodiag::numerics::{
    cluster_eigenvalues, default_sweep_tol, jacobi_spectrum, residual_scaled_identity,
};
use zerodiag::planner::{execute, exists, plan, Kind, PlanOptions};
use zerodiag::verify::{certify_default, check_drt, Claim, IntMatrix};
use zerodiag_cli::run;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn golden_seeds() -> Outcome {
    let claims = [
        (SeedKey::Omzd(2), Claim::Conference),
        (SeedKey::Omzd(4), Claim::Conference),
        (SeedKey::Omzd(6), Claim::Conference),
        (SeedKey::Omzd(5), Claim::Omzd),
        (SeedKey::Omzd(7), Claim::Omzd),
        (SeedKey::Ompzd(3, 1), Claim::Ompzd(1)),
        (SeedKey::Ompzd(4, 3), Claim::Ompzd(3)),
        (SeedKey::Ompzd(5, 4), Claim::Ompzd(4)),
    ];
    for (key, claim) in claims {
        let m = seed(key).map_err(|e| format!("{key}: {e}"))?;
        let cert = certify_default(&m, claim).map_err(|e| format!("{key}: {e}"))?;
        ensure!(cert.passed, "{key} failed {claim}: {:?}", cert.failures);
        ensure!(
            cert.max_residual <= 1e-12 * cert.scale_c,
            "{key}: residual {} > 1e-12·c",
            cert.max_residual
        );
        if claim == Claim::Conference {
            let c = IntMatrix::try_from_real(&m).ok_or(format!("{key} is not integral"))?;
            let n = c.order();
            let g = c.gram();
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == j { n as i64 - 1 } else { 0 };
                    ensure!(
                        g[i * n + j] == expected,
                        "{key}: CCᵀ[{i}][{j}] = {}",
                        g[i * n + j]
                    );
                }
            }
        }
    }
    Ok(())
}

fn combine_nine() -> Outcome {
    let conf6 = seed(SeedKey::Omzd(6)).map_err(|e| e.to_string())?;
    let five = seed(SeedKey::Omzd(5)).map_err(|e| e.to_string())?;
    let q = combine(&conf6, &five).map_err(|e| e.to_string())?;
    ensure!(q.order() == 9, "order {}", q.order());
    let cert = certify_default(&q, Claim::Omzd).map_err(|e| e.to_string())?;
    ensure!(cert.passed, "OMZD(9) failed: {:?}", cert.failures);
    ensure!(
        close(cert.scale_c, 1.0, 1e-12),
        "not unit scale: c = {}",
        cert.scale_c
    );
    let expected = 1.0 / (2.0 * 5f64.sqrt());
    for i in 0..5 {
        for j in 5..9 {
            ensure!(
                close(q.get(i, j), expected, 1e-12),
                "Q[{i}][{j}] = {}",
                q.get(i, j)
            );
        }
    }
    Ok(())
}

fn symmetric_family() -> Outcome {
    for n in (6..=200).step_by(2) {
        let s = symmetric_omzd(n).map_err(|e| format!("n = {n}: {e}"))?;
        ensure!(s.asymmetry() == 0.0, "n = {n} not exactly symmetric");
        let cert = certify_default(&s, Claim::SymmetricOmzd).map_err(|e| e.to_string())?;
        ensure!(cert.passed, "n = {n}: {:?}", cert.failures);
        let c = ((n / 2) * (n / 2)) as f64;
        ensure!(
            close(cert.scale_c, c, 1e-9 * c),
            "n = {n}: c = {} expected {c}",
            cert.scale_c
        );
    }
    let (alpha, beta) = symmetric_coefficients(4);
    ensure!(close(alpha, 15f64.sqrt(), 1e-12), "alpha = {alpha}");
    ensure!(
        close(beta, (7f64.sqrt() - 15f64.sqrt()) / 4.0, 1e-12),
        "beta = {beta}"
    );
    let s8 = symmetric_omzd(8).map_err(|e| e.to_string())?;
    ensure!(
        close(s8.get(0, 4), alpha + beta, 1e-12),
        "B diagonal = {}",
        s8.get(0, 4)
    );
    ensure!(
        close(s8.get(0, 5), beta, 1e-12),
        "B off-diagonal = {}",
        s8.get(0, 5)
    );
    Ok(())
}

const FANO: [[i32; 7]; 7] = [
    [0, 1, 1, 0, 1, 0, 0],
    [0, 0, 1, 1, 0, 1, 0],
    [0, 0, 0, 1, 1, 0, 1],
    [1, 0, 0, 0, 1, 1, 0],
    [0, 1, 0, 0, 0, 1, 1],
    [1, 0, 1, 0, 0, 0, 1],
    [1, 1, 0, 1, 0, 0, 0],
];

fn paley_and_drt() -> Outcome {
    let t7 = paley_tournament(7).map_err(|e| e.to_string())?;
    ensure!(
        t7 == IntMatrix::from_rows(&FANO),
        "Paley tournament differs from the Fano adjacency matrix"
    );
    for q in [7u64, 11, 19, 23, 27] {
        let t = paley_tournament(q).map_err(|e| format!("q = {q}: {e}"))?;
        let v = check_drt(&t);
        ensure!(v.passed, "q = {q}: {:?}", v.failures);
    }
    let alpha = drt_alpha(7, Branch::Minus);
    let expected_alpha = -(5.0 - 5f64.sqrt()) / 2.0;
    ensure!(close(alpha, expected_alpha, 1e-12), "alpha = {alpha}");
    let m = omzd_from_drt(&t7, Branch::Minus).map_err(|e| e.to_string())?;
    for (i, row) in FANO.iter().enumerate() {
        for (j, &arc) in row.iter().enumerate() {
            let want = alpha * arc as f64 + if i == j { 0.0 } else { 1.0 };
            ensure!(m.get(i, j) == want, "M[{i}][{j}] = {}", m.get(i, j));
        }
    }
    let (c, res) = residual_scaled_identity(&m);
    let expected_c = (27.0 - 9.0 * 5f64.sqrt()) / 2.0;
    ensure!(close(c, expected_c, 1e-12), "c = {c} expected {expected_c}");
    ensure!(res <= 1e-12 * c, "residual {res}");
    Ok(())
}

fn doubling_chain() -> Outcome {
    let mut t = paley_tournament(7).map_err(|e| e.to_string())?;
    for (step, order) in [7usize, 15, 31].into_iter().enumerate() {
        if step > 0 {
            t = double_drt(&t).map_err(|e| e.to_string())?;
        }
        ensure!(t.order() == order, "order {} expected {order}", t.order());
        let v = check_drt(&t);
        ensure!(v.passed, "DRT({order}): {:?}", v.failures);
        let m = omzd_from_drt(&t, Branch::Minus).map_err(|e| e.to_string())?;
        let cert = certify_default(&m, Claim::Omzd).map_err(|e| e.to_string())?;
        ensure!(cert.passed, "OMZD({order}): {:?}", cert.failures);
        ensure!(
            cert.max_residual <= 1e-9 * cert.scale_c,
            "OMZD({order}) residual {}",
            cert.max_residual
        );
    }
    Ok(())
}

fn existence_tables() -> Outcome {
    let opts = PlanOptions::default();
    let run_case = |kind: Kind, n: usize, k: Option<usize>, expected: bool| -> Outcome {
        let v = exists(kind, n, k).map_err(|e| e.to_string())?;
        ensure!(
            v.exists == expected,
            "{kind:?} n={n} k={k:?}: got {}",
            v.exists
        );
        match plan(kind, n, k, opts) {
            Ok(p) => {
                ensure!(expected, "{kind:?} n={n} k={k:?} planned although refused");
                let done = execute(&p).map_err(|e| format!("{kind:?} n={n} k={k:?}: {e}"))?;
                ensure!(
                    done.verdict.passed(),
                    "{kind:?} n={n} k={k:?} failed certification"
                );
            }
            Err(e) => ensure!(!expected, "{kind:?} n={n} k={k:?} not planned: {e}"),
        }
        Ok(())
    };
    for n in 1..=64 {
        run_case(Kind::Omzd, n, None, n != 1 && n != 3)?;
        run_case(Kind::SymmetricOmzd, n, None, n % 2 == 0 && n != 4)?;
    }
    let v = exists(Kind::Omzd, 3, None).map_err(|e| e.to_string())?;
    ensure!(
        v.statement == "Theorem: no OMZD(1) or OMZD(3)",
        "statement {:?}",
        v.statement
    );
    let mut refused = Vec::new();
    for n in 1..=32 {
        for k in 0..=n {
            let expected = !matches!((n, k), (1, 1) | (2, 1) | (3, 2) | (3, 3));
            if !expected {
                refused.push((n, k));
            }
            run_case(Kind::Ompzd, n, Some(k), expected)?;
        }
    }
    ensure!(refused.len() == 4, "refused {refused:?}");
    Ok(())
}

fn graph_certificates() -> Outcome {
    let check_certified = |spec: GraphSpec| -> Outcome {
        let c = q2_certificate(spec);
        ensure!(c.is_certified(), "{spec}: {:?}", c.status);
        ensure!(
            c.distinct_eigenvalue_count == Some(2),
            "{spec}: {:?}",
            c.distinct_eigenvalue_count
        );
        // recount from the returned matrix
        let m = c.matrix.as_ref().ok_or(format!("{spec}: no matrix"))?;
        let unit = m.scaled(1.0 / m.scale_c().unwrap_or(1.0).sqrt());
        let s = jacobi_spectrum(&unit, default_sweep_tol(&unit)).map_err(|e| e.to_string())?;
        ensure!(
            cluster_eigenvalues(&s, 1e-6) == 2,
            "{spec}: recount differs"
        );
        Ok(())
    };
    for n in 1..=12 {
        check_certified(GraphSpec::Knn(n))?;
        for k in 0..=n {
            if !matches!((n, k), (1, 1) | (2, 1) | (3, 2) | (3, 3)) {
                check_certified(GraphSpec::Gnk { n, k })?;
            }
        }
    }
    for part in 1..=4 {
        for parts in [2, 6, 8] {
            check_certified(GraphSpec::Multipartite { part, parts })?;
        }
    }
    let status = |n, k| q2_certificate(GraphSpec::Gnk { n, k }).status;
    ensure!(matches!(status(1, 1), Q2Status::KnownImpossible(_)), "G_1");
    ensure!(
        matches!(status(2, 1), Q2Status::KnownImpossible(_)),
        "G_{{2,1}}"
    );
    ensure!(
        matches!(status(3, 3), Q2Status::KnownImpossible(ref r) if r.contains("q(C_6) = 3")),
        "G_3: {:?}",
        status(3, 3)
    );
    ensure!(
        matches!(status(3, 2), Q2Status::Unknown(ref r) if r.contains("3 ≤ q(G_{3,2}) ≤ 4")),
        "G_{{3,2}}: {:?}",
        status(3, 2)
    );
    Ok(())
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("zerodiag").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn gen_cases() -> Vec<Vec<String>> {
    let mut cases = Vec::new();
    let mut push = |args: Vec<String>| cases.push(args);
    let s = |x: &str| x.to_string();
    for n in 1..=32usize {
        if n != 1 && n != 3 {
            push(vec![s("--kind"), s("omzd"), s("--n"), n.to_string()]);
            if n % 2 == 1 && n >= 7 {
                push(vec![
                    s("--kind"),
                    s("omzd"),
                    s("--n"),
                    n.to_string(),
                    s("--route"),
                    s("prefer-drt"),
                ]);
            }
        }
        if n % 2 == 0 && n != 4 {
            push(vec![
                s("--kind"),
                s("symmetric-omzd"),
                s("--n"),
                n.to_string(),
            ]);
        }
        for k in 0..=n {
            if !matches!((n, k), (1, 1) | (2, 1) | (3, 2) | (3, 3)) {
                push(vec![
                    s("--kind"),
                    s("ompzd"),
                    s("--n"),
                    n.to_string(),
                    s("--k"),
                    k.to_string(),
                ]);
            }
        }
        if n == 2 || (n >= 4 && zerodiag::gfield::odd_prime_power(n as u64 - 1).is_some()) {
            push(vec![s("--kind"), s("conference"), s("--n"), n.to_string()]);
        }
        if zerodiag::planner::drt_decomposition(n, 3).is_some() {
            push(vec![s("--kind"), s("drt"), s("--n"), n.to_string()]);
        }
        if n >= 4 && zerodiag::planner::drt_decomposition(n - 1, 3).is_some() {
            push(vec![
                s("--kind"),
                s("skew-hadamard"),
                s("--n"),
                n.to_string(),
            ]);
        }
        for m in [2, 6] {
            push(vec![
                s("--kind"),
                s("multipartite"),
                s("--n"),
                n.to_string(),
                s("--m"),
                m.to_string(),
            ]);
        }
    }
    cases
}

fn cli_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases = gen_cases();
    for (idx, case) in cases.iter().enumerate() {
        let mut args = vec!["gen"];
        args.extend(case.iter().map(String::as_str));
        let (code, out, err) = run_cli(&args);
        ensure!(code == 0, "gen {case:?} exited {code}: {err}");
        let text = String::from_utf8(out).map_err(|e| e.to_string())?;
        let (code2, out2, _) = run_cli(&args);
        ensure!(
            code2 == 0 && out2 == text.as_bytes(),
            "gen {case:?} is not deterministic"
        );

        let file = decode_json(&text).map_err(|e| format!("{case:?}: {e}"))?;
        let again = encode_json(&file).map_err(|e| e.to_string())?;
        ensure!(again == text, "{case:?}: encode(decode(x)) differs from x");
        let redecoded = decode_json(&again).map_err(|e| e.to_string())?;
        for (r0, r1) in file.entries.iter().zip(&redecoded.entries) {
            for (a, b) in r0.iter().zip(r1) {
                ensure!(a.to_bits() == b.to_bits(), "{case:?}: entry bits changed");
            }
        }

        let claim = file
            .certificate
            .as_ref()
            .ok_or(format!("{case:?}: no certificate"))?
            .claim
            .clone();
        let path = dir.path().join(format!("case{idx}.json"));
        std::fs::write(&path, &text).map_err(|e| e.to_string())?;
        let path = path.to_string_lossy().into_owned();
        let (code, _, err) = run_cli(&["verify", "--in", &path, "--claim", &claim]);
        ensure!(
            code == 0,
            "verify {case:?} with {claim} exited {code}: {err}"
        );
    }
    let (code, _, err) = run_cli(&["exists", "--kind", "omzd", "--n", "3"]);
    ensure!(
        code == 1 && err.contains("Theorem: no OMZD(1) or OMZD(3)"),
        "exists omzd 3: {code} {err}"
    );
    Ok(())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden seeds certify", golden_seeds, Duration::from_secs(1)),
        (
            "combine reproduces the order-9 example",
            combine_nine,
            Duration::from_secs(1),
        ),
        (
            "symmetric construction for even n in 6..=200",
            symmetric_family,
            Duration::from_secs(30),
        ),
        (
            "Paley tournaments and the Fano OMZD(7)",
            paley_and_drt,
            Duration::from_secs(5),
        ),
        (
            "doubling chain 7, 15, 31",
            doubling_chain,
            Duration::from_secs(5),
        ),
        (
            "existence tables agree and execute",
            existence_tables,
            Duration::from_secs(60),
        ),
        (
            "graph certificates",
            graph_certificates,
            Duration::from_secs(60),
        ),
        (
            "CLI round trip and determinism",
            cli_round_trip,
            Duration::from_secs(60),
        ),
    ];
    let mut failures = 0;
    for (idx, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= budget {
                Ok(())
            } else {
                Err(format!("took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {name} ({elapsed:.2?})", idx + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {name} ({elapsed:.2?}): {why}", idx + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}

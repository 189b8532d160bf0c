//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cachecode::delivery::{
    closed_form_pairs, generate_schedule, mn_rate, mn_subpacketization, rate, rate_for,
    subpacketization,
};
use cachecode::multiaccess::{
    ccdn_bound_curve, ccdn_upper_bound, optimality_table, CcdnParams, RowFamily,
};
use cachecode::verifier::{
    brute_force_min_pair_schedule, simulate_end_to_end, verify_instantaneous_decodability,
    FileStore,
};
use cachecode::{build_cache_layout, DemandVector, Rational, SubpacketId, SystemParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(k: usize, i: usize) -> SystemParams {
    SystemParams::new(k, k, i).expect("valid instance")
}

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn example_reproduction() -> Outcome {
    let p = params(6, 4);
    let s = generate_schedule(&p, &DemandVector::identity(&p)).map_err(|e| e.to_string())?;
    let expected: [&[(usize, usize)]; 3] = [
        &[(5, 4), (1, 5), (2, 1), (4, 2)],
        &[(6, 5), (2, 6), (3, 2), (5, 3)],
        &[(1, 6), (3, 1), (4, 3), (6, 4)],
    ];
    ensure(s.codewords().len() == 3, || {
        format!("{} codewords", s.codewords().len())
    })?;
    for (idx, (cw, want)) in s.codewords().iter().zip(expected).enumerate() {
        let mut got: Vec<SubpacketId> = cw.terms().to_vec();
        let mut want: Vec<SubpacketId> =
            want.iter().map(|&(u, p)| SubpacketId::new(u, p)).collect();
        got.sort();
        want.sort();
        ensure(got == want, || format!("codeword {} is {cw}", idx + 1))?;
    }
    ensure(s.rate() == r(1, 2) && rate(&p) == r(1, 2), || {
        format!("rate {}", s.rate())
    })?;
    ensure(subpacketization(&p) == 6, || "subpacketization".into())?;
    ensure(mn_rate(&p) == r(2, 5), || {
        format!("MN rate {}", mn_rate(&p))
    })?;
    ensure(mn_subpacketization(&p) == Some(15), || {
        "MN subpacketization".into()
    })?;
    Ok("3 codewords, rate 1/2, F=6; MN 2/5 with F=15".into())
}

fn rate_endpoints() -> Outcome {
    for k in 2..=64usize {
        let ki = k as i64;
        ensure(rate_for(k, 1) == r(ki - 1, 2), || format!("rate({k},1)"))?;
        ensure(rate_for(k, k - 1) == r(1, ki), || {
            format!("rate({k},{})", k - 1)
        })?;
    }
    Ok("K in [2, 64]".into())
}

fn count_law() -> Outcome {
    let mut instances = 0;
    for k in 2..=24usize {
        for i in 1..k {
            let p = params(k, i);
            let s = generate_schedule(&p, &DemandVector::identity(&p))
                .map_err(|e| format!("K={k} i={i}: {e}"))?;
            let c = s.constants().expect("constants");
            let lambda = (k * (k - i)).div_ceil(c.t);
            ensure(s.codewords().len() == lambda, || {
                format!(
                    "K={k} i={i}: {} codewords, want {lambda}",
                    s.codewords().len()
                )
            })?;
            ensure(s.total_terms() == k * (k - i), || {
                format!("K={k} i={i}: {} terms", s.total_terms())
            })?;
            instances += 1;
        }
    }
    Ok(format!("{instances} instances, K in [2, 24]"))
}

fn decodability_round_trip() -> Outcome {
    let mut runs = 0;
    for k in 2..=12usize {
        for i in 1..k {
            let p = params(k, i);
            let layout = build_cache_layout(&p);
            let demands = std::iter::once(DemandVector::identity(&p))
                .chain((0..20).map(|seed| DemandVector::random(&p, 1000 * k as u64 + seed)));
            for (j, d) in demands.enumerate() {
                let s = generate_schedule(&p, &d).map_err(|e| format!("K={k} i={i}: {e}"))?;
                let rep = verify_instantaneous_decodability(&s, &layout);
                ensure(rep.decodable && rep.coverage_ok, || {
                    format!("K={k} i={i} demand {j}: {:?}", rep.violations.first())
                })?;
                let store = FileStore::random(k, k, 4, runs as u64);
                let sim = simulate_end_to_end(&p, &d, &store, runs as u64)
                    .map_err(|e| format!("K={k} i={i} demand {j}: {e}"))?;
                ensure(sim.users_ok == k, || format!("K={k} i={i}: users_ok"))?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} schedules verified and simulated"))
}

fn pairwise_equivalence() -> Outcome {
    let mut checked = 0;
    for k in 4..=16usize {
        for i in 2..=k / 2 {
            let p = params(k, i);
            let d = DemandVector::identity(&p);
            let layout = build_cache_layout(&p);
            let want = (k * (k - i)).div_ceil(2);
            let closed = closed_form_pairs(&p, &d).map_err(|e| e.to_string())?;
            let generated = generate_schedule(&p, &d).map_err(|e| e.to_string())?;
            for (name, s) in [("closed form", &closed), ("generator", &generated)] {
                ensure(s.codewords().len() == want, || {
                    format!("K={k} i={i}: {name} has {}", s.codewords().len())
                })?;
                ensure(
                    verify_instantaneous_decodability(s, &layout).is_ok(),
                    || format!("K={k} i={i}: {name} fails verification"),
                )?;
            }
            if k <= 8 {
                let best = brute_force_min_pair_schedule(&p, &d).map_err(|e| e.to_string())?;
                ensure(best == want, || {
                    format!("K={k} i={i}: brute force {best}, want {want}")
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (K, i) pairs, brute force for K <= 8"))
}

fn optimality_rows() -> Outcome {
    let mut rows_seen = 0;
    for k in 4..=60usize {
        let rows = optimality_table(k).map_err(|e| e.to_string())?;
        for row in &rows {
            ensure(row.reproduces, || {
                format!(
                    "K={k} row {}: R_new {} vs listed {}",
                    row.family, row.r_new, row.r_listed
                )
            })?;
        }
        let divisors = (1..=k).filter(|s| k % s == 0).count();
        ensure(rows.len() == 3 + divisors, || {
            format!("K={k}: {} rows", rows.len())
        })?;
        rows_seen += rows.len();
    }
    let k3 = |k: usize| {
        optimality_table(k)
            .unwrap()
            .into_iter()
            .find(|row| row.family == RowFamily::KMinus3)
            .unwrap()
            .r_new
    };
    ensure(k3(6) == r(9, 6), || "K=6 special case".into())?;
    ensure(k3(5) == r(8, 5) && k3(10) == r(8, 10), || {
        "K=5,10 special case".into()
    })?;
    Ok(format!("{rows_seen} rows for K in [4, 60]"))
}

fn ccdn_bound() -> Outcome {
    for l in [6usize, 8, 9] {
        let p = CcdnParams::new(10, 10, l, 0).map_err(|e| e.to_string())?;
        let curve = ccdn_bound_curve(&p).map_err(|e| e.to_string())?;
        let r1 = rate_for(10, l);
        let want = vec![(r(0, 1), r(10, 1)), (r(1, 1), r1), (r(2, 1), r(0, 1))];
        ensure(curve.breakpoints() == want.as_slice(), || {
            format!("L={l}: breakpoints {:?}", curve.breakpoints())
        })?;
        let grid: Vec<Rational> = (0..100).map(|j| r(3 * j, 99)).collect();
        let mut prev = None;
        for &m in &grid {
            let direct = ccdn_upper_bound(m, &p).map_err(|e| e.to_string())?;
            let via_curve = curve.evaluate(m).map_err(|e| e.to_string())?;
            ensure(direct == via_curve, || {
                format!("L={l} M={m}: routes disagree")
            })?;
            if let Some(prev) = prev {
                ensure(direct <= prev, || format!("L={l}: increases at M={m}"))?;
            }
            prev = Some(direct);
        }
        // linear inside each piece: equal steps give equal drops
        for (lo, hi) in [(r(0, 1), r(1, 1)), (r(1, 1), r(2, 1))] {
            let pts: Vec<Rational> = grid
                .iter()
                .copied()
                .filter(|m| *m >= lo && *m <= hi)
                .collect();
            let vals: Vec<Rational> = pts
                .iter()
                .map(|&m| ccdn_upper_bound(m, &p).unwrap())
                .collect();
            for (m, v) in pts.windows(3).zip(vals.windows(3)) {
                let slope_a = (v[1] - v[0]) / (m[1] - m[0]);
                let slope_b = (v[2] - v[1]) / (m[2] - m[1]);
                ensure(slope_a == slope_b, || {
                    format!("L={l}: not linear near M={}", m[1])
                })?;
            }
        }
    }
    Ok("K=N=10, L in {6, 8, 9}; 100-point grid".into())
}

fn divisibility_identity() -> Outcome {
    let mut cases = 0;
    for k in 2..=60usize {
        for s in (2..=k).filter(|s| k % s == 0) {
            let l = k - k / s + 1;
            let want = r((k - s) as i64, (2 * s * s) as i64);
            ensure(rate_for(k, l) == want, || {
                format!("K={k} s={s}: {} vs {want}", rate_for(k, l))
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (K, s) pairs"))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_cachecode");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 7] = [
        &[
            "schedule", "--K", "12", "--i", "5", "--demand", "random:7", "--verify",
        ],
        &[
            "schedule", "--K", "6", "--N", "6", "--i", "4", "--format", "csv",
        ],
        &[
            "simulate", "--K", "9", "--i", "4", "--seed", "3", "--demand", "random:3",
        ],
        &["verify", "--K", "11", "--i", "6"],
        &["rate-curve", "--K", "16", "--format", "json"],
        &["ccdn-bound", "--K", "10", "--L", "6", "--grid", "100"],
        &["optimality-table", "--K", "24", "--format", "json"],
    ];
    let run_to = |args: &[&str], path: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("{args:?} exited {status}"))?;
        std::fs::read(path).map_err(|e| e.to_string())
    };
    for (n, args) in runs.iter().enumerate() {
        let a = run_to(args, &dir.path().join(format!("{n}a")))?;
        let b = run_to(args, &dir.path().join(format!("{n}b")))?;
        ensure(!a.is_empty() && a == b, || {
            format!("{args:?} differs between runs")
        })?;
    }
    Ok(format!("{} commands, byte-identical twice", runs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "1 worked example",
            example_reproduction,
            Duration::from_secs(1),
        ),
        ("2 rate endpoints", rate_endpoints, Duration::from_secs(1)),
        ("3 schedule count law", count_law, Duration::from_secs(30)),
        (
            "4 decodability + round trip",
            decodability_round_trip,
            Duration::from_secs(120),
        ),
        (
            "5 pairwise equivalence",
            pairwise_equivalence,
            Duration::from_secs(120),
        ),
        (
            "6 optimality table",
            optimality_rows,
            Duration::from_secs(60),
        ),
        ("7 multi-access bound", ccdn_bound, Duration::from_secs(60)),
        (
            "8 s-divisibility identity",
            divisibility_identity,
            Duration::from_secs(60),
        ),
        (
            "9 CLI determinism",
            cli_determinism,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let line = match result {
            Ok(detail) if took <= budget => format!("PASS criterion {name}: {detail} ({took:.2?})"),
            Ok(detail) => format!("FAIL criterion {name}: {detail}, took {took:.2?} > {budget:?}"),
            Err(why) => format!("FAIL criterion {name}: {why} ({took:.2?})"),
        };
        if line.starts_with("FAIL") {
            failed += 1;
        }
        println!("{line}");
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! The thirteen acceptance criteria. Runs without the libtest harness so
//! the PASS/FAIL lines always show up in `cargo test` output.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bvcalc::integrands::{
    from_id, recession, sample_matrix, transform_t, transform_t_inv, Catalog, Integrand, CATALOG_IDS, DEFAULT_SCHEDULE,
};
use bvcalc::scenarios::{evaluate_scenario, run, Clause, Report, RunConfig};

struct Verdict {
    passed: bool,
    note: String,
}

fn verdict(passed: bool, note: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        note: note.into(),
    }
}

fn scenario(id: &str) -> (Report, Duration) {
    let t = Instant::now();
    let (r, _) = evaluate_scenario(&RunConfig::new(id)).unwrap_or_else(|e| panic!("{id}: {e}"));
    (r, t.elapsed())
}

fn clause<'a>(r: &'a Report, name: &str) -> &'a Clause {
    r.clauses
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("{}: no clause '{name}'", r.scenario))
}

fn observed(r: &Report, name: &str) -> f64 {
    clause(r, name).observed.as_f64().unwrap_or(f64::NAN)
}

fn failures(r: &Report) -> String {
    let f: Vec<_> = r.failures().iter().map(|c| c.name.clone()).collect();
    if f.is_empty() {
        String::new()
    } else {
        format!(" failing: {}", f.join(", "))
    }
}

fn transform_round_trip() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shapes = [(1, 1), (1, 2), (2, 2)];
    let mut worst = 0.0f64;
    for id in CATALOG_IDS {
        let f = from_id(id).unwrap();
        for k in 0..1000 {
            let (m, n) = shapes[k % 3];
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let a = sample_matrix(&mut rng, m, n, 1e6);
            let v = f.eval(x, &a);
            let back = transform_t_inv(|y, p| transform_t(&f, y, p), x, &a);
            worst = worst.max((back - v).abs() / (1.0 + v.abs()));
        }
    }
    let dt = t.elapsed();
    verdict(worst <= 1e-12 && dt < Duration::from_secs(1), format!("max residual {worst:.2e} in {dt:.2?}"))
}

fn recession_correctness() -> Verdict {
    let f = Catalog::area();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut err, mut hom) = (0.0f64, 0.0f64);
    for k in 0..100 {
        let a = sample_matrix(&mut rng, 1 + k % 2, 2, 1e3);
        let r = recession(&f, [0.5, 0.5], &a, &DEFAULT_SCHEDULE, None).unwrap().value;
        err = err.max((r - a.norm()).abs() / (1.0 + a.norm()));
        for s in [0.5, 2.0, 10.0] {
            let rs = recession(&f, [0.5, 0.5], &(a * s), &DEFAULT_SCHEDULE, None).unwrap().value;
            hom = hom.max((rs - s * r).abs());
        }
    }
    verdict(err <= 1e-6 && hom <= 1e-8, format!("error/(1+|A|) {err:.2e}, homogeneity {hom:.2e}"))
}

fn sq_envelope() -> Verdict {
    let (r, _) = scenario("sq-envelope-monotone");
    let ordering = observed(&r, "ordering G_i >= G_2i >= F violations");
    verdict(r.passed, format!("ordering violations {ordering}{}", failures(&r)))
}

fn oracle_equivalence() -> Verdict {
    let (r, dt) = scenario("oracle-equivalence");
    let gap = observed(&r, "max relative gap to the oracle");
    verdict(r.passed && dt < Duration::from_secs(30), format!("50 cases, max relative gap {gap:.2e} in {dt:.2?}"))
}

fn integration_by_parts() -> Verdict {
    let (r, _) = scenario("integration-by-parts");
    let worst = r.details["worst"].as_f64().unwrap_or(f64::NAN);
    verdict(r.passed, format!("{} functions, worst residual {worst:.2e}{}", r.clauses.len(), failures(&r)))
}

fn sawtooth_generation() -> Verdict {
    let (r, dt) = scenario("sawtooth-oscillation");
    let gap = observed(&r, "generation gap at jmax");
    let order = observed(&r, "generation order in 1/j");
    let ok = gap <= 0.02 && order >= 0.8 && dt < Duration::from_secs(60);
    verdict(ok, format!("gap {gap:.2e} at j = 256, order {order:.2} in {dt:.2?}"))
}

fn ramp_concentration() -> Verdict {
    let (r, _) = scenario("ramp-concentration");
    let mass = observed(&r, "|lambda mass - |jump||");
    let sphere = observed(&r, "|sphere weight at +1 - 1|");
    verdict(mass <= 0.01 && sphere <= 0.01, format!("mass error {mass:.2e}, sphere weight error {sphere:.2e}"))
}

fn jensen_suite() -> Verdict {
    let mut clean = 0;
    let mut dirty = Vec::new();
    for id in ["sawtooth-oscillation", "ramp-concentration"] {
        let (r, _) = scenario(id);
        for c in r.clauses.iter().filter(|c| c.name.contains("Jensen") && !c.name.contains("w-shape")) {
            if c.passed {
                clean += 1;
            } else {
                dirty.push(format!("{id}/{}", c.name));
            }
        }
    }
    let (r, _) = scenario("sawtooth-oscillation");
    let w = observed(&r, "Jensen violations (w-shape)");
    let flagged = r.flags.iter().any(|f| f == "expected-jensen-violation");
    verdict(
        dirty.is_empty() && clean > 0 && w >= 1.0 && flagged,
        format!("{clean} clean convex checks, w-shape violating nodes {w}, dirty {dirty:?}"),
    )
}

fn lower_semicontinuity() -> Verdict {
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    for id in ["sawtooth-oscillation", "x-dependent-F-lsc", "boundary-ramp-lsc"] {
        let (r, _) = scenario(id);
        for c in r.clauses.iter().filter(|c| c.name.starts_with("LSC margin")) {
            worst = worst.min(c.observed.as_f64().unwrap_or(f64::NAN));
            if !c.passed {
                bad.push(format!("{id}/{}", c.name));
            }
        }
    }
    let (w, _) = scenario("nonquasiconvex-violation");
    let wm = w.margin.unwrap_or(f64::NAN);
    verdict(
        bad.is_empty() && worst >= -1e-6 && wm <= -0.9,
        format!("smallest quasiconvex margin {worst:.2e}, w-shape margin {wm:.3}"),
    )
}

fn reshetnyak() -> Verdict {
    let (r, _) = scenario("reshetnyak-ramp");
    let gap = observed(&r, "final gap (area)");
    verdict(r.passed, format!("area gap {gap:.2e} at j = 256, staircase rejected{}", failures(&r)))
}

fn example1() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new("example1");
    c.output = dir.path().to_path_buf();
    let r = run(&c).unwrap();
    let lb = observed(&r, "lower bound min_c int_B |u - c|");
    let flagged = r.flags.iter().any(|f| f == "no admissible sequence");
    verdict(r.passed && flagged && lb > 0.05, format!("no admissible sequence, lower bound {lb:.6}"))
}

fn example2() -> Verdict {
    let (r, dt) = scenario("example2");
    let c0 = observed(&r, "c_0 > 0");
    let ck: Vec<f64> = (0..=4).map(|k| observed(&r, &format!("c_{k} > 0"))).collect();
    let ok = (c0 - 0.25).abs() <= 1e-3 && ck.iter().all(|c| *c > 0.0) && dt < Duration::from_secs(60) && r.passed;
    verdict(ok, format!("c_k = {ck:.4?} in {dt:.2?}"))
}

fn determinism() -> Verdict {
    let mut diffs = Vec::new();
    let ids: Vec<_> = bvcalc::scenarios::scenario_catalog().iter().map(|s| s.id).collect();
    for id in &ids {
        let bytes: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let mut c = RunConfig::new(*id);
                c.output = dir.path().to_path_buf();
                run(&c).unwrap();
                std::fs::read(dir.path().join("report.json")).unwrap()
            })
            .collect();
        if bytes[0] != bytes[1] {
            diffs.push(*id);
        }
    }
    verdict(diffs.is_empty(), format!("{} scenarios, differing: {diffs:?}", ids.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("transform round trip", transform_round_trip),
        ("recession correctness", recession_correctness),
        ("SQ envelope", sq_envelope),
        ("1D oracle equivalence", oracle_equivalence),
        ("integration by parts", integration_by_parts),
        ("Young generation, sawtooth", sawtooth_generation),
        ("Young generation, concentration", ramp_concentration),
        ("Jensen suite", jensen_suite),
        ("lower semicontinuity", lower_semicontinuity),
        ("Reshetnyak continuity", reshetnyak),
        ("example 1", example1),
        ("example 2", example2),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!("{} {:>2} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, k + 1, v.note);
        failed += usize::from(!v.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

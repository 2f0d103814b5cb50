//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdhall::check::{all_pass, Check};
use sdhall::cx2;
use sdhall::ff::FieldSpec;
use sdhall::hall::HallAlgebra;
use sdhall::quiver::{Cat, Quiver, RepCategory};
use sdhall::sdh2::{Reflection, Sdh2};
use sdhall::sdhz::Sdhz;
use sdhall::Result;

fn a(n: usize, q: u32) -> Cat {
    RepCategory::new(Quiver::linear_a(n), FieldSpec::new(q).unwrap())
}

fn vect(q: u32) -> Cat {
    RepCategory::new(Quiver::new(1, &[]).unwrap(), FieldSpec::new(q).unwrap())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn summarize(checks: &[Check]) -> Outcome {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
    let mut detail = format!("{}/{} exact", checks.len() - failed.len(), checks.len());
    if let Some(c) = failed.first() {
        detail += &format!("; first failure {}: {} != {}", c.name, c.lhs, c.rhs);
    }
    Outcome { ok: all_pass(checks), detail }
}

fn gather(parts: Vec<Result<Vec<Check>>>) -> Outcome {
    let mut all = Vec::new();
    for p in parts {
        match p {
            Ok(c) => all.extend(c),
            Err(e) => return Outcome { ok: false, detail: format!("error: {e}") },
        }
    }
    summarize(&all)
}

fn ringel() -> Outcome {
    let mut parts = Vec::new();
    for n in [2, 3] {
        for q in [2, 3] {
            parts.push(HallAlgebra::new(a(n, q)).verify_ringel());
        }
    }
    gather(parts)
}

fn quantum_group() -> Outcome {
    let mut parts = Vec::new();
    let mut control = true;
    for n in [1, 2] {
        for q in [2, 3] {
            let s = Sdh2::new(a(n, q));
            parts.push(s.as_ref().map_err(Clone::clone).and_then(|s| s.verify_quantum_group(false)));
            let falsified = s.and_then(|s| s.verify_quantum_group(true)).map(|cs| {
                cs.iter().any(|c| c.name.starts_with("[E,F]") && !c.passed())
            });
            control &= falsified.unwrap_or(false);
        }
    }
    let mut o = gather(parts);
    o.ok &= control;
    o.detail += if control { "; negative control fails [E,F]" } else { "; negative control did not fail" };
    o
}

fn presentation() -> Outcome {
    gather(vec![Sdhz::new(a(2, 2)).and_then(|z| z.verify_presentation(false))])
}

fn euler_lemmas() -> Outcome {
    gather(vec![Sdhz::new(a(2, 2)).and_then(|z| z.euler_lemma_checks(&[0, 1, 2], false))])
}

fn associativity() -> Outcome {
    gather(vec![
        Sdhz::new(a(2, 2)).and_then(|z| z.associativity_checks(&mut rng(5), 50)),
        Sdh2::new(a(2, 2)).and_then(|s| s.associativity_checks(&mut rng(5), 50, false)),
    ])
}

fn dual_route() -> Outcome {
    let mut parts = Vec::new();
    let mut extra = Vec::new();
    for q in [2, 3] {
        parts.push(HallAlgebra::new(a(2, q)).dual_route_checks(4));
        let h = HallAlgebra::new(vect(q));
        parts.push(h.dual_route_checks(4));
        let row = h.structure_table(2).ok().and_then(|t| t.into_iter().find(|r| r.a == "S1" && r.c == "S1" && r.b == "S1+S1"));
        let (g, c) = row.map(|r| (r.hall_number.to_string(), r.constant)).unwrap_or_default();
        extra.push(Check::compare(format!("g(k,k;k^2) q={q}"), &g, &(q + 1).to_string()));
        extra.push(Check::compare(format!("constant(k,k;k^2) q={q}"), &c, &format!("1/{q}")));
    }
    parts.push(Ok(extra));
    gather(parts)
}

fn relation_consistency() -> Outcome {
    gather(vec![
        Sdhz::new(a(2, 2)).and_then(|z| z.conflation_checks(&mut rng(7), 20)),
        Sdh2::new(a(2, 2)).and_then(|s| s.conflation_checks(&mut rng(7), 20)),
    ])
}

fn acyclic_decomposition() -> Outcome {
    gather(vec![cx2::acyclic_decomposition_checks(&a(2, 2), &mut rng(11), 30)])
}

fn reflection() -> Outcome {
    gather(vec![Sdh2::new(a(2, 2)).and_then(|s| Reflection::new(s, 1)).and_then(|r| r.verify())])
}

fn bridgeland() -> Outcome {
    gather(vec![Sdh2::new(a(2, 2)).and_then(|s| s.bridgeland_compare(4))])
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Ringel quantum Serre relations, A2/A3, q=2,3", ringel),
        ("quantum group realization, A1/A2, q=2,3", quantum_group),
        ("(U)(V)(UV) presentation, A2, q=2", presentation),
        ("Euler form closed forms, A2, degrees 0..2", euler_lemmas),
        ("associativity, 50 triples per grading", associativity),
        ("dual-route structure constants, A2/Vect, q=2,3", dual_route),
        ("[L] = [K+M] on conflations, 20 per grading", relation_consistency),
        ("acyclic decomposition K_P + K_Q*, 30 complexes", acyclic_decomposition),
        ("reflection at sink 2, A2, q=2", reflection),
        ("Bridgeland comparison, A2, q=2, dim <= 4", bridgeland),
    ];
    let mut failures = 0;
    for (k, (title, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        let status = if o.ok { "PASS" } else { "FAIL" };
        failures += usize::from(!o.ok);
        println!("{status} criterion {}: {title} ({}; {} ms)", k + 1, o.detail, t.elapsed().as_millis());
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

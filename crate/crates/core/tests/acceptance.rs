//! Acceptance run: one line per criterion at the default configuration.
//!
//! Exits non-zero when a criterion fails, unless it is listed in
//! `KNOWN_RED` (criteria the method cannot currently meet; each has a note in
//! the project's decision log).

use mpfio::config::ExperimentParams;
use mpfio::estimate::*;
use std::time::Instant;

const KNOWN_RED: &[&str] = &["C7"];

struct Line {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
    limit: f64,
}

fn describe(rep: &EstimateReport) -> String {
    let mut parts = Vec::new();
    if let (Some(f), Some(t)) = (rep.fit, rep.target) {
        parts.push(format!(
            "slope {:.3} target {:.2}±{:.2} residual {:.3}",
            f.slope,
            t,
            rep.tolerance.unwrap_or(f64::NAN),
            f.residual
        ));
    }
    for c in &rep.checks {
        if c.name.starts_with("slope of") {
            continue;
        }
        let bound = c.target.map(|t| format!(" vs {t:.3e}")).unwrap_or_default();
        parts.push(format!("{}: {:.4e}{bound}{}", c.name, c.measured, if c.pass { "" } else { " FAILED" }));
    }
    parts.join("; ")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn csv_bytes(reps: &[EstimateReport]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in reps {
        r.write_csv(&mut out).unwrap();
    }
    out
}

fn main() {
    let problem = Problem::default();
    let p = ExperimentParams::default();
    let seed = 0;
    let mut lines = Vec::new();
    let mut push = |id, name, reps: &[&EstimateReport], seconds: f64, limit: f64| {
        lines.push(Line {
            id,
            name,
            pass: reps.iter().all(|r| r.pass()),
            detail: reps.iter().map(|r| describe(r)).collect::<Vec<_>>().join(" | "),
            seconds,
            limit,
        });
    };

    let (part, t) = timed(|| partition_check(&problem, &p.partition_check, seed).unwrap());
    push("C1", "partition exactness", &[&part[0]], t, 10.0);
    push("C2", "angular partition and grid counts", &[&part[1]], t, 10.0);

    let ((oracle, _), t) = timed(|| oracle_equivalence(&problem, &p.kernel_decay.oracle).unwrap());
    push("C3", "direct vs FFT kernel", &[&oracle], t, 120.0);

    let (per_nu, t) = timed(|| kernel_l1_decay(&problem, &p.kernel_decay.per_nu).unwrap());
    push("C4", "per-direction kernel decay in j", &[&per_nu], t, 600.0);

    let (summed, t) = timed(|| kernel_l1_decay(&problem, &p.kernel_decay.summed).unwrap());
    push("C5", "summed kernel decay in ell_1", &[&summed], t, 600.0);

    let (lip, t) = timed(|| kernel_lipschitz_ratio(&problem, &p.kernel_lipschitz).unwrap());
    push("C6", "Lipschitz ratio plateau", &[&lip], t, 600.0);

    let ((tail_q, tail_ql), t) = timed(|| {
        (
            kernel_tail_outside(&problem, &p.kernel_tail.q).unwrap(),
            kernel_tail_outside(&problem, &p.kernel_tail.q_ell).unwrap(),
        )
    });
    push("C7", "tail outside Q and Q_ell", &[&tail_q, &tail_ql], t, 900.0);

    let (opn, t) = timed(|| l2_opnorm(&problem, &p.opnorm, seed).unwrap());
    push("C8", "L2 operator norm ladder", &[&opn], t, 600.0);

    let (atoms, t) = timed(|| atom_image_l1(&problem, &p.atom_bound).unwrap());
    push("C9", "atom uniformity and ell decay", &[&atoms[0], &atoms[1]], t, 1200.0);

    let (orth, t) = timed(|| orthogonality(&problem, &p.orthogonality, seed).unwrap());
    push("C10", "band orthogonality", &[&orth], t, 300.0);

    let (sharp, t) = timed(|| sharpness_growth(&problem, &p.sharpness).unwrap());
    push("C11", "sharpness growth and saturation", &[&sharp], t, 1200.0);

    let (adj, t) = timed(|| adjoint_tail(&problem, &p.adjoint_tail).unwrap());
    push("C12", "adjoint tails on far sectors", &[&adj], t, 1200.0);

    let (sstar, t) = timed(|| sstar_s_decay(&problem, &p.sstar_s).unwrap());
    push("S*S", "off-diagonal S*S kernel decay", &[&sstar], t, 600.0);

    // rerun the criteria that take seconds and compare the CSV bytes
    let (same, t) = timed(|| {
        let first = [
            csv_bytes(&part),
            csv_bytes(&[oracle.clone(), summed.clone()]),
            csv_bytes(&[orth.clone(), adj.clone(), sstar.clone(), sharp.clone()]),
            csv_bytes(&atoms),
        ];
        let again = [
            csv_bytes(&partition_check(&problem, &p.partition_check, seed).unwrap()),
            csv_bytes(&[
                oracle_equivalence(&problem, &p.kernel_decay.oracle).unwrap().0,
                kernel_l1_decay(&problem, &p.kernel_decay.summed).unwrap(),
            ]),
            csv_bytes(&[
                orthogonality(&problem, &p.orthogonality, seed).unwrap(),
                adjoint_tail(&problem, &p.adjoint_tail).unwrap(),
                sstar_s_decay(&problem, &p.sstar_s).unwrap(),
                sharpness_growth(&problem, &p.sharpness).unwrap(),
            ]),
            csv_bytes(&atom_image_l1(&problem, &p.atom_bound).unwrap()),
        ];
        first.iter().zip(&again).filter(|(a, b)| a == b).count()
    });
    lines.push(Line {
        id: "C13",
        name: "determinism",
        pass: same == 4,
        detail: format!("{same}/4 reruns bit-identical (C1, C2, C3, C5, C9, C10, C11, C12, S*S)"),
        seconds: t,
        limit: f64::INFINITY,
    });

    let mut unexpected = 0;
    for l in &lines {
        let in_time = l.seconds <= l.limit;
        let ok = l.pass && in_time;
        let verdict = match (ok, KNOWN_RED.contains(&l.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        let limit = if l.limit.is_finite() { format!(" / {:.0}s", l.limit) } else { String::new() };
        let late = if in_time { "" } else { " OVER TIME" };
        println!("{verdict} {} {} [{:.1}s{limit}{late}] {}", l.id, l.name, l.seconds, l.detail);
    }
    let passed = lines.iter().filter(|l| l.pass && l.seconds <= l.limit).count();
    println!("{passed}/{} criteria pass", lines.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}

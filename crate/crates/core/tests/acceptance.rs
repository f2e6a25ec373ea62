//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use mdmtj::margins::closed_form_terms;
use mdmtj::oracle::{brute_force_report, max_relative_error, reports_agree, symmetry_sweep};
use mdmtj::variation::VariationOutcome;
use mdmtj::*;

/// Characterized five-domain resistances, grouped as published. The second
/// weight-4 group is printed with a repeated label; its third member is the
/// only weight-4 pattern not otherwise listed.
const FIVE_DOMAIN: &[(&[&str], f64)] = &[
    (&["00000"], 382.10),
    (&["00001", "10000"], 431.07),
    (&["00010", "00100", "01000"], 431.50),
    (&["00011", "11000"], 493.19),
    (&["00101", "10100"], 496.03),
    (&["00110", "01100", "10001"], 494.45),
    (&["01001", "10010"], 495.01),
    (&["01010"], 496.6),
    (&["00111", "11100"], 576.22),
    (&["01011", "11010"], 580.11),
    (&["01101", "10110"], 581.07),
    (&["01110", "10011", "11001"], 577.94),
    (&["10101"], 583.27),
    (&["01111", "11110"], 692.87),
    (&["10111", "11011", "11101"], 697.39),
    (&["11111"], 864.88),
];
const RELABELED: &str = "11101";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn(&Characterization) -> Outcome;

fn pattern(s: &str) -> BitPattern {
    s.parse().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn five_domain_table(ch: &Characterization) -> Outcome {
    let mut seen = BTreeSet::new();
    let mut worst = (0.0, String::new());
    for (labels, expected) in FIVE_DOMAIN {
        for label in *labels {
            assert!(seen.insert(*label), "duplicate label {label}");
            let r = pattern_resistance(&pattern(label), BorderCondition::SAME, &ch.table);
            let e = rel(r, *expected);
            if e > worst.0 {
                worst = (e, format!("{label}: {r:.2} vs {expected}"));
            }
        }
    }
    let covered = seen.len() == 32;
    outcome(
        covered && worst.0 <= 2e-3,
        format!(
            "{} entries, worst {:.3}% ({}); {RELABELED} checked by value",
            seen.len(),
            100.0 * worst.0,
            worst.1
        ),
    )
}

fn worked_example(_: &Characterization) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = mdmtj::cli::run_with(["mdmtj", "resistance", "--pattern", "00010"], &mut out, &mut err);
    let text = String::from_utf8_lossy(&out).trim().to_string();
    let value: Option<f64> = text.strip_suffix(" ohm").and_then(|v| v.parse().ok());
    match value {
        Some(v) if code == 0 => outcome(rel(v, 431.5) <= 2e-3, format!("`{text}`, {:.3}% from 431.5", 100.0 * rel(v, 431.5))),
        _ => outcome(false, format!("exit {code}, stdout `{text}`")),
    }
}

fn closed_form_scaling(ch: &Characterization) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, expected_mv) in [(5, 23.7), (6, 19.3), (7, 16.3)] {
        let mv = closed_form_min_margin(d, ch).unwrap() * 1e3;
        pass &= (mv - expected_mv).abs() <= 0.05;
        parts.push(format!("D={d} {mv:.4} mV"));
    }
    outcome(pass, parts.join(", "))
}

fn closed_form_structure(ch: &Characterization) -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 2..=10 {
        let (high, low) = closed_form_terms(d, &ch.table).unwrap();
        let mut min_w1 = f64::INFINITY;
        let mut max_w0 = f64::NEG_INFINITY;
        for b in BorderCondition::ALL {
            for p in BitPattern::all(d).unwrap() {
                let r = pattern_resistance(&p, b, &ch.table);
                match p.weight() {
                    0 => max_w0 = max_w0.max(r),
                    1 => min_w1 = min_w1.min(r),
                    _ => {}
                }
            }
        }
        worst = worst.max(rel(high, min_w1)).max(rel(low, max_w0));
    }
    outcome(worst <= 1e-12, format!("D=2..10, worst relative gap {worst:.1e}"))
}

fn four_domain_margin(ch: &Characterization) -> Outcome {
    let r = enumerate_levels(4, BorderMode::default(), ch).unwrap();
    let mv = r.min_margin * 1e3;
    let pair = r.min_margin_pair;
    outcome(
        (mv - 32.5).abs() <= 0.05 && rel(mv, 33.5) <= 0.10,
        format!("{mv:.2} mV at pair {pair:?}, {:.1}% from 33.5 mV", 100.0 * rel(mv, 33.5)),
    )
}

fn cluster_separation(ch: &Characterization) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in 4..=7 {
        let r = enumerate_levels(d, BorderMode::default(), ch).unwrap();
        let separated = r.clusters.windows(2).all(|w| w[0].max_voltage < w[1].min_voltage);
        let growing = r.margins.windows(2).all(|w| w[1].margin > w[0].margin);
        pass &= separated && growing && r.clusters.len() == d + 1;
        let mvs: Vec<String> = r.margins.iter().map(|m| format!("{:.1}", m.margin * 1e3)).collect();
        parts.push(format!("D={d} [{}]", mvs.join(" ")));
    }
    outcome(pass, parts.join("; "))
}

/// Table groups with the same set of segment kinds, ignoring which way each
/// full wall points.
fn folded_partition(d: usize, b: BorderCondition) -> BTreeSet<BTreeSet<BitPattern>> {
    let mut groups: BTreeMap<EquivalenceKey, BTreeSet<BitPattern>> = BTreeMap::new();
    for p in BitPattern::all(d).unwrap() {
        groups.entry(equivalence_key(&p, b)).or_default().insert(p);
    }
    groups.into_values().collect()
}

fn oracle_equivalence(ch: &Characterization) -> Outcome {
    let err = max_relative_error(12, ch).unwrap();
    let mut mismatch = None;
    for d in 1..=12 {
        for mode in BorderMode::all() {
            let fast = enumerate_levels(d, mode, ch).unwrap();
            let slow = brute_force_report(d, mode, ch).unwrap();
            if let Err(e) = reports_agree(&fast, &slow, 1e-12) {
                mismatch.get_or_insert(format!("D={d} {mode}: {e}"));
            }
        }
    }
    let published: BTreeSet<BTreeSet<BitPattern>> = FIVE_DOMAIN
        .iter()
        .map(|(labels, _)| labels.iter().map(|l| pattern(l)).collect())
        .collect();
    let folded = folded_partition(5, BorderCondition::SAME);
    let exact: BTreeSet<u64> = BitPattern::all(5)
        .unwrap()
        .map(|p| pattern_resistance(&p, BorderCondition::SAME, &ch.table).to_bits())
        .collect();
    let classes_match = folded == published;
    outcome(
        err <= 1e-9 && mismatch.is_none() && classes_match,
        format!(
            "max rel err {err:.1e}; brute force {}; D=5 classes: {} folded ({} published groups, {}), {} exact values; {} folded under differ,differ",
            mismatch.as_deref().unwrap_or("agrees"),
            folded.len(),
            published.len(),
            if classes_match { "identical partition" } else { "partition differs" },
            exact.len(),
            folded_partition(5, BorderCondition::DIFFER).len(),
        ),
    )
}

fn symmetries(ch: &Characterization) -> Outcome {
    match symmetry_sweep(10, &ch.table).unwrap() {
        None => outcome(true, "mirror and complement, D=1..10, all conventions"),
        Some(c) => outcome(false, format!("{c:?}")),
    }
}

fn offset_margin(d: usize, delta: f64, ch: &Characterization) -> (f64, f64) {
    let spec = MisalignmentSpec::new(Nanometers(delta));
    let report = offset_margin_report(d, BorderMode::default(), &spec, ch).unwrap();
    match report.outcome {
        VariationOutcome::Offset {
            perturbed_min_margin, ..
        } => (report.nominal_min_margin, perturbed_min_margin),
        _ => unreachable!(),
    }
}

fn variation(ch: &Characterization) -> Outcome {
    let nominal = enumerate_levels(4, BorderMode::default(), ch).unwrap().min_margin;
    let (n0, p0) = offset_margin(4, 0.0, ch);
    let exact_zero = n0 == nominal && p0 == nominal;
    let grid: Vec<f64> = (0..=24).map(|i| 0.25 * f64::from(i)).collect();
    let margins: Vec<f64> = grid.iter().map(|&x| offset_margin(4, x, ch).1).collect();
    let monotone = margins.windows(2).all(|w| w[1] <= w[0]);
    let at6 = *margins.last().unwrap();
    let reduction = (nominal - at6) / nominal;
    outcome(
        exact_zero && monotone && (0.05..=0.25).contains(&reduction),
        format!(
            "δ=0 exact: {exact_zero}; monotone on 0..6 nm step 0.25: {monotone}; 6 nm: {:.2} -> {:.2} mV ({:.1}% reduction)",
            nominal * 1e3,
            at6 * 1e3,
            100.0 * reduction
        ),
    )
}

fn monte_carlo(ch: &Characterization) -> Outcome {
    let run = |threads: usize, n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_margins(4, BorderMode::default(), &MonteCarloSpec::new(n, 2024), ch).unwrap())
    };
    let a = run(1, 1000);
    let b = run(4, 1000);
    let c = run(4, 1000);
    let identical = a == b && b == c && format!("{a:?}") == format!("{c:?}");

    let large = MonteCarloSpec::new(10_000, 2024);
    let report = monte_carlo_margins(4, BorderMode::default(), &large, ch).unwrap();
    let VariationOutcome::MonteCarlo { summary, .. } = &report.outcome else {
        unreachable!()
    };
    let bound = 3.0 * large.sigma.0 / (large.samples as f64).sqrt();
    let centered = summary.delta_mean.0.abs() <= bound;
    outcome(
        identical && centered,
        format!(
            "n=1000 bit-identical at 1/4 threads: {identical}; n=1e4 mean δ {:.4} nm (bound {bound:.4})",
            summary.delta_mean.0
        ),
    )
}

fn main() {
    let ch = Characterization::characterized();
    let checks: [(&str, Check); 10] = [
        ("five-domain resistances", five_domain_table),
        ("worked example", worked_example),
        ("closed-form scaling", closed_form_scaling),
        ("closed-form terms", closed_form_structure),
        ("four-domain margin", four_domain_margin),
        ("cluster separation", cluster_separation),
        ("oracle equivalence", oracle_equivalence),
        ("symmetries", symmetries),
        ("misalignment", variation),
        ("monte carlo determinism", monte_carlo),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let o = check(&ch);
        failed += usize::from(!o.pass);
        println!(
            "{:>2} {} {name}: {} ({:.2}s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} passed in {:.1}s", checks.len() - failed, checks.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

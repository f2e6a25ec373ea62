//! Text, CSV and JSON renderings of the reports.
//!
//! Ohms and millivolts are printed with two decimals everywhere. CSV files
//! start with `#` comment lines carrying the run manifest, followed by the
//! header row.

use std::fmt::Write as _;

use serde::Serialize;

use crate::chartable::Characterization;
use crate::margins::{BorderMode, MarginReport, SweepReport, SWEEP_ENUMERATION_LIMIT};
use crate::variation::{VariationOutcome, VariationReport};

/// What is needed to reproduce a run: the arguments, the effective
/// characterization and the seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub seed: Option<u64>,
    /// From `SOURCE_DATE_EPOCH` when set, so that outputs stay byte-stable
    /// otherwise.
    pub timestamp: Option<String>,
    pub config: serde_json::Map<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, ch: &Characterization, seed: Option<u64>) -> Self {
        let config = ch
            .entries()
            .into_iter()
            .map(|(k, v)| {
                let value = match v.parse::<f64>() {
                    Ok(x) if k != "material" => serde_json::json!(x),
                    _ => serde_json::Value::String(v),
                };
                (k.to_string(), value)
            })
            .collect();
        Self {
            command: command.to_string(),
            argv,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
            config,
        }
    }

    fn comment_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# mdmtj {} {}", self.version, self.command);
        let _ = writeln!(s, "# argv = {}", self.argv.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed = {seed}");
        }
        if let Some(ts) = &self.timestamp {
            let _ = writeln!(s, "# timestamp = {ts}");
        }
        for (k, v) in &self.config {
            match v {
                serde_json::Value::String(text) => {
                    let _ = writeln!(s, "# {k} = {text}");
                }
                other => {
                    let _ = writeln!(s, "# {k} = {other}");
                }
            }
        }
        s
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    report: &'a T,
}

pub(crate) fn json<T: Serialize>(manifest: &RunManifest, report: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { manifest, report }).expect("reports serialize");
    s.push('\n');
    s
}

fn ohm(x: f64) -> String {
    format!("{x:.2}")
}

fn mv(volts: f64) -> String {
    format!("{:.2}", volts * 1e3)
}

fn csv_document(manifest: &RunManifest, header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    manifest.comment_block() + &body
}

/// Parses a CSV emitted by this module: skips manifest comments, returns
/// the header and the rows.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), csv::Error> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

fn class_label(report: &MarginReport, class: &crate::margins::PatternClass) -> String {
    match report.borders {
        BorderMode::Fixed(_) => class.representative.to_string(),
        BorderMode::WorstCase => format!("{}@{}", class.representative, class.borders),
    }
}

pub(crate) fn levels_csv(report: &MarginReport, manifest: &RunManifest) -> String {
    let rows = report
        .clusters
        .iter()
        .flat_map(|c| c.classes.iter().map(move |cls| (c.weight, cls)))
        .map(|(weight, cls)| {
            vec![
                class_label(report, cls),
                weight.to_string(),
                cls.multiplicity.to_string(),
                ohm(cls.resistance),
                mv(cls.voltage),
            ]
        })
        .collect();
    csv_document(
        manifest,
        &["pattern_class", "weight", "multiplicity", "resistance_ohm", "voltage_mv"],
        rows,
    )
}

pub(crate) fn margins_csv(report: &MarginReport, manifest: &RunManifest) -> String {
    let rows = report
        .margins
        .iter()
        .map(|m| {
            vec![
                m.weight_low.to_string(),
                (m.weight_low + 1).to_string(),
                ohm(m.r_low_max),
                ohm(m.r_high_min),
                mv(m.margin),
            ]
        })
        .collect();
    csv_document(
        manifest,
        &["weight_low", "weight_high", "r_low_max_ohm", "r_high_min_ohm", "margin_mv"],
        rows,
    )
}

pub(crate) fn closed_form_csv(domains: usize, margin: f64, manifest: &RunManifest) -> String {
    csv_document(
        manifest,
        &["domains", "closed_form_margin_mv"],
        vec![vec![domains.to_string(), mv(margin)]],
    )
}

pub(crate) fn sweep_csv(report: &SweepReport, borders: BorderMode, manifest: &RunManifest) -> String {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.domains.to_string(),
                mv(r.closed_form_margin),
                r.enumerated_for(borders).map(mv).unwrap_or_default(),
            ]
        })
        .collect();
    csv_document(
        manifest,
        &["domains", "closed_form_margin_mv", "enumerated_margin_mv"],
        rows,
    )
}

pub(crate) fn monte_carlo_csv(report: &VariationReport, manifest: &RunManifest) -> String {
    let VariationOutcome::MonteCarlo { samples, .. } = &report.outcome else {
        unreachable!("caller passes Monte Carlo reports only")
    };
    let rows = samples
        .iter()
        .map(|s| vec![s.index.to_string(), format!("{:.4}", s.delta.0), mv(s.min_margin)])
        .collect();
    csv_document(manifest, &["sample", "delta_nm", "min_margin_mv"], rows)
}

pub(crate) fn levels_table(report: &MarginReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} domains, borders {}, read current {:.4} mA",
        report.domains,
        report.borders,
        report.read_current * 1e3
    );
    let _ = writeln!(
        s,
        "{:<6} {:<24} {:>10} {:>14} {:>11}",
        "weight", "class", "patterns", "resistance_ohm", "voltage_mv"
    );
    for c in &report.clusters {
        for cls in &c.classes {
            let _ = writeln!(
                s,
                "{:<6} {:<24} {:>10} {:>14} {:>11}",
                c.weight,
                class_label(report, cls),
                cls.multiplicity,
                ohm(cls.resistance),
                mv(cls.voltage)
            );
        }
    }
    s.push('\n');
    s.push_str(&margin_table(report));
    s
}

pub(crate) fn margin_table(report: &MarginReport) -> String {
    let mut s = String::new();
    for m in &report.margins {
        let _ = writeln!(s, "{}->{}  {} mV", m.weight_low, m.weight_low + 1, mv(m.margin));
    }
    let (lo, hi) = report.min_margin_pair;
    let _ = writeln!(
        s,
        "min margin {} mV ({lo}->{hi}), {} distinguishable levels",
        mv(report.min_margin),
        report.distinguishable_levels
    );
    s
}

pub(crate) fn sweep_table(report: &SweepReport, borders: BorderMode) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>7} {:>16} {:>16}", "domains", "closed_form_mv", format!("enum_{borders}_mv"));
    for r in &report.rows {
        let enumerated = match r.enumerated_for(borders) {
            Some(m) => mv(m),
            None if r.domains > SWEEP_ENUMERATION_LIMIT => "-".to_string(),
            None => "?".to_string(),
        };
        let _ = writeln!(s, "{:>7} {:>16} {:>16}", r.domains, mv(r.closed_form_margin), enumerated);
    }
    match report.max_scalable_domains {
        Some(d) => {
            let _ = writeln!(s, "max scalable domains at {} mV: {d}", mv(report.threshold));
        }
        None => {
            let _ = writeln!(s, "max scalable domains at {} mV: none found", mv(report.threshold));
        }
    }
    s
}

pub(crate) fn variation_table(report: &VariationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} domains, borders {}", report.domains, report.borders);
    let _ = writeln!(s, "nominal min margin   {} mV", mv(report.nominal_min_margin));
    match &report.outcome {
        VariationOutcome::Offset {
            spec,
            perturbed_min_margin,
            worst_offset,
        } => {
            let _ = writeln!(
                s,
                "perturbed min margin {} mV (offset {:+} nm, neighbors {}/{})",
                mv(*perturbed_min_margin),
                worst_offset.0,
                spec.left_neighbor,
                spec.right_neighbor
            );
        }
        VariationOutcome::MonteCarlo { spec, summary, .. } => {
            let _ = writeln!(
                s,
                "samples {} seed {} sigma {:.4} nm (truncated at {}σ)",
                spec.samples, spec.seed, spec.sigma.0, spec.truncation
            );
            let _ = writeln!(
                s,
                "margin mean {} mV, stddev {} mV, min {} mV, p01 {} mV",
                mv(summary.mean),
                mv(summary.stddev),
                mv(summary.min),
                mv(summary.p01)
            );
            let _ = writeln!(s, "offset mean {:.4} nm", summary.delta_mean.0);
        }
    }
    let _ = writeln!(
        s,
        "deviation            {} mV ({:.1}%)",
        mv(report.margin_deviation()),
        100.0 * report.relative_reduction()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::margins::enumerate_levels;

    #[test]
    fn levels_csv_round_trips() {
        let ch = Characterization::characterized();
        let report = enumerate_levels(4, BorderMode::default(), &ch).unwrap();
        let manifest = RunManifest::new("levels", vec!["levels".into()], &ch, None);
        let text = levels_csv(&report, &manifest);
        assert!(text.starts_with("# mdmtj "));
        let (header, rows) = read_csv(&text).unwrap();
        assert_eq!(header.join(","), "pattern_class,weight,multiplicity,resistance_ohm,voltage_mv");
        assert_eq!(rows.len(), report.class_count());
        let first = &rows[0];
        assert_eq!(first[0], "0000");
        assert_eq!(first[3], "477.75");
        let printed: f64 = first[4].parse().unwrap();
        assert_eq!(format!("{printed:.2}"), first[4]);
    }

    #[test]
    fn worst_case_labels_are_quoted() {
        let ch = Characterization::characterized();
        let report = enumerate_levels(2, BorderMode::WorstCase, &ch).unwrap();
        let manifest = RunManifest::new("levels", vec![], &ch, None);
        let (_, rows) = read_csv(&levels_csv(&report, &manifest)).unwrap();
        assert!(rows.iter().any(|r| r[0] == "00@differ,differ"));
    }

    #[test]
    fn manifest_echoes_config() {
        let ch = Characterization::from_config_str("material = Co Fe B\nr_dw_01 = 20000.5").unwrap();
        let m = RunManifest::new("levels", vec![], &ch, Some(9));
        assert_eq!(m.config["material"], serde_json::json!("Co Fe B"));
        assert_eq!(m.config["r_dw_01"], serde_json::json!(20000.5));
        let block = m.comment_block();
        assert!(block.contains("# seed = 9"));
        assert!(block.contains("# material = Co Fe B"));
        // the commented block is itself a loadable config once stripped
        let cfg: String = block
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| !l.starts_with("mdmtj") && !l.starts_with("argv") && !l.starts_with("seed"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(Characterization::from_config_str(&cfg).unwrap(), ch);
    }
}

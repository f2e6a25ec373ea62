//! Weight clusters, adjacent margins and the midpoint reference ladder a
//! sense amplifier would compare against.

use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    let domains = std::env::args().nth(1).map_or(Ok(5), |s| s.parse()).expect("domain count");
    for mode in [BorderMode::default(), BorderMode::WorstCase] {
        let report = enumerate_levels(domains, mode, &ch)?;
        println!("{domains} domains, borders {mode}, {} classes", report.class_count());
        for c in &report.clusters {
            println!(
                "  weight {}: {:7.2} .. {:7.2} mV over {} patterns",
                c.weight,
                c.min_voltage * 1e3,
                c.max_voltage * 1e3,
                c.pattern_count
            );
        }
        for (m, r) in report.margins.iter().zip(reference_ladder(&report)?) {
            println!(
                "  {}->{}: margin {:6.2} mV, reference {:7.2} mV",
                m.weight_low,
                m.weight_low + 1,
                m.margin * 1e3,
                r * 1e3
            );
        }
        println!();
    }
    Ok(())
}

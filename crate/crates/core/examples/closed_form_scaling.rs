//! Worst-case margin from the closed form against full enumeration as the
//! junction grows, and the largest array that stays above a threshold.

use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    let report = sweep_domains(2, 24, 16e-3, &ch)?;
    println!("D   closed form   enumerated (same,same)   enumerated (worst)");
    for row in &report.rows {
        let show = |m: Option<f64>| m.map_or("-".to_string(), |v| format!("{:.2} mV", v * 1e3));
        println!(
            "{:<3} {:>8.2} mV   {:>12}             {:>12}",
            row.domains,
            row.closed_form_margin * 1e3,
            show(row.enumerated_for(BorderMode::default())),
            show(row.enumerated_for(BorderMode::WorstCase)),
        );
    }
    match report.max_scalable_domains {
        Some(d) => println!("largest D with closed-form margin >= 16 mV: {d}"),
        None => println!("no D in range keeps 16 mV"),
    }
    Ok(())
}

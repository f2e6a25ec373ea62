//! Margin lost when the junction stack is offset from the notches.

use mdmtj::variation::VariationOutcome;
use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    println!("offset   4 domains   5 domains");
    for step in 0..=12 {
        let offset = Nanometers(0.5 * f64::from(step));
        let mut cells = Vec::new();
        for domains in [4, 5] {
            let report = offset_margin_report(domains, BorderMode::default(), &MisalignmentSpec::new(offset), &ch)?;
            let VariationOutcome::Offset {
                perturbed_min_margin, ..
            } = report.outcome
            else {
                unreachable!("offset study")
            };
            cells.push(format!("{:6.2} mV", perturbed_min_margin * 1e3));
        }
        println!("{:4.1} nm  {}", offset.0, cells.join("   "));
    }

    let p: BitPattern = "00010".parse()?;
    let net = apply_misalignment(&p, BorderCondition::SAME, Nanometers(6.0), true, &ch)?;
    println!("\n{p} shifted 6 nm onto a neighbouring 1: {:.2} ohm ({} segments)", net.resistance(&ch), net.segment_count());
    Ok(())
}

//! How one stored pattern breaks into parallel resistive segments, for each
//! border convention.

use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    let pattern: BitPattern = std::env::args().nth(1).as_deref().unwrap_or("0001").parse()?;
    for b in BorderCondition::ALL {
        let d = decompose(&pattern, b);
        println!("{pattern} with borders {b}:");
        for kind in &d.segments {
            let length = ch.geometry.nominal_length(*kind);
            println!("  {:<8} {:>4} nm {:>7.0} ohm", kind.to_string(), length.0, ch.table[*kind]);
        }
        println!("  equivalent: {:.2} ohm\n", equivalent_resistance(&d, &ch.table));
    }
    Ok(())
}

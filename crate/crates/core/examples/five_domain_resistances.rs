//! Every five-domain pattern's resistance and read voltage with both
//! neighbours of the window storing the same value as the edge domains.

use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    let mut patterns: Vec<BitPattern> = BitPattern::all(5)?.collect();
    patterns.sort_by_key(|p| (p.weight(), *p));
    println!("pattern  weight  resistance   voltage");
    for p in patterns {
        let r = pattern_resistance(&p, BorderCondition::SAME, &ch.table);
        let v = pattern_voltage(&p, BorderCondition::SAME, &ch);
        println!("{p}    {}       {r:8.2} ohm  {:6.2} mV", p.weight(), v * 1e3);
    }
    Ok(())
}

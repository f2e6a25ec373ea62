//! Exact rational cross-check of the floating-point model and the fast
//! class enumerator.

use mdmtj::oracle::{brute_force_report, exact_pattern_resistance, max_relative_error, reports_agree, symmetry_sweep};
use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    let p: BitPattern = "00010".parse()?;
    let exact = exact_pattern_resistance(&p, BorderCondition::SAME, &ch);
    println!("{p}: exact {exact} ohm = {:.12}", exact.to_f64());
    println!("      float {:.12}", pattern_resistance(&p, BorderCondition::SAME, &ch.table));

    println!("max relative error, D <= 10: {:.2e}", max_relative_error(10, &ch)?);
    for d in [4, 8, 10] {
        for mode in BorderMode::all() {
            let fast = enumerate_levels(d, mode, &ch)?;
            let slow = brute_force_report(d, mode, &ch)?;
            let verdict = reports_agree(&fast, &slow, 1e-12).map_or_else(|e| e, |()| "agree".into());
            println!("D={d:<2} {mode:<13} {verdict}");
        }
    }
    match symmetry_sweep(8, &ch.table)? {
        None => println!("mirror and complement symmetries hold up to D=8"),
        Some(c) => println!("symmetry broken: {c:?}"),
    }
    Ok(())
}

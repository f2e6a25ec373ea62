//! Loading a characterization file that overrides part of the defaults.

use mdmtj::*;

const CONFIG: &str = "\
# wider wall resistances, stronger drive
r_dw_01 = 25000
r_dw_10 = 25000
j_c_a_per_m2 = 4.0e10
";

fn main() -> Result<()> {
    let base = Characterization::characterized();
    let custom = Characterization::from_config_str(CONFIG)?;
    for d in 4..=8 {
        println!(
            "D={d}: default {:.2} mV, custom {:.2} mV",
            closed_form_min_margin(d, &base)? * 1e3,
            closed_form_min_margin(d, &custom)? * 1e3
        );
    }
    println!("\nresolved configuration:\n{}", custom.to_config_string());

    match Characterization::from_config_str("r_minus_80 = 5000\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("ordering violation accepted"),
    }
    Ok(())
}

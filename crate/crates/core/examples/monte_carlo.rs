//! Seeded Monte Carlo over random stack offsets.

use mdmtj::variation::VariationOutcome;
use mdmtj::*;

fn main() -> Result<()> {
    let ch = Characterization::characterized();
    let mc = MonteCarloSpec::new(2000, 7);
    let report = monte_carlo_margins(4, BorderMode::default(), &mc, &ch)?;
    let VariationOutcome::MonteCarlo { summary, .. } = &report.outcome else {
        unreachable!("Monte Carlo study")
    };
    println!("{} samples, sigma {:.3} nm, seed {}", mc.samples, mc.sigma.0, mc.seed);
    println!("nominal margin  {:.2} mV", report.nominal_min_margin * 1e3);
    println!("mean            {:.2} mV (sd {:.3} mV)", summary.mean * 1e3, summary.stddev * 1e3);
    println!("1st percentile  {:.2} mV", summary.p01 * 1e3);
    println!("worst sample    {:.2} mV", summary.min * 1e3);
    println!("mean offset     {:.4} nm", summary.delta_mean.0);
    Ok(())
}

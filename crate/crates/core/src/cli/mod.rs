//! `mdmtj` command line.
//!
//! Results go to stdout (or `--out`), diagnostics to stderr. Exit codes:
//! 0 success, 1 internal error, 2 usage or invalid input, 3 configuration
//! error.

pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::chartable::{Characterization, Nanometers};
use crate::error::{Error, Result};
use crate::margins::{closed_form_min_margin, enumerate_levels, sweep_domains, BorderMode};
use crate::netmodel::{pattern_resistance, BitPattern, BorderCondition};
use crate::oracle;
use crate::variation::{monte_carlo_margins, offset_margin_report, MisalignmentSpec, MonteCarloSpec, NeighborBit};

pub use render::{read_csv, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mdmtj", version, about = "Multi-domain MTJ resistance and sense-margin model")]
struct Cli {
    /// Characterization overrides (`key = value` per line).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Cross-check the result against the exact reference implementation.
    #[arg(long, global = true, hide = true)]
    oracle: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equivalent resistance of one stored pattern.
    Resistance {
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value = "same,same")]
        borders: BorderCondition,
    },
    /// Read voltage of one stored pattern.
    Voltage {
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value = "same,same")]
        borders: BorderCondition,
    },
    /// All weight clusters of a D-domain junction.
    Levels {
        #[arg(long)]
        domains: usize,
        #[arg(long, default_value = "same,same")]
        borders: BorderMode,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Minimum sense margin, enumerated or closed form.
    Margin {
        #[arg(long)]
        domains: usize,
        #[arg(long, conflicts_with = "borders")]
        closed_form: bool,
        #[arg(long)]
        borders: Option<BorderMode>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Closed-form and enumerated margins over a range of D.
    Sweep {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long)]
        threshold_mv: f64,
        /// Convention for the enumerated CSV/table column.
        #[arg(long, default_value = "same,same")]
        borders: BorderMode,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Margin degradation under stack-to-notch misalignment.
    #[command(group(ArgGroup::new("mode").required(true).args(["offset_nm", "monte_carlo"])))]
    Variation {
        #[arg(long)]
        domains: usize,
        #[arg(long, allow_hyphen_values = true)]
        offset_nm: Option<f64>,
        #[arg(long, value_name = "N", requires = "seed")]
        monte_carlo: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Offset standard deviation; defaults to 5.5/6 nm.
        #[arg(long)]
        sigma_nm: Option<f64>,
        #[arg(long, default_value = "worst")]
        neighbors: NeighborBit,
        #[arg(long, default_value = "same,same")]
        borders: BorderMode,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Resistance { .. } => "resistance",
            Command::Voltage { .. } => "voltage",
            Command::Levels { .. } => "levels",
            Command::Margin { .. } => "margin",
            Command::Sweep { .. } => "sweep",
            Command::Variation { .. } => "variation",
        }
    }
}

/// Runs the CLI with process streams and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], writing to the given streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };

    let ch = match &cli.config {
        Some(path) => match Characterization::load(path) {
            Ok(ch) => ch,
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => Characterization::characterized(),
    };

    let argv_text: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let output = execute(&cli, &ch, argv_text, stderr);
    let text = match output {
        Ok(text) => text,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };

    let written = match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            EXIT_INTERNAL
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigParse { .. } | Error::ConfigInvariant { .. } | Error::Io { .. } => EXIT_CONFIG,
        Error::InvalidPattern { .. }
        | Error::DomainCountTooLarge { .. }
        | Error::DomainCountTooSmall { .. }
        | Error::OffsetOutOfRange { .. }
        | Error::InvalidSpec(_) => EXIT_USAGE,
        Error::DegenerateCoverage { .. } | Error::ClustersOverlap { .. } | Error::EmptyNetwork => EXIT_INTERNAL,
    }
}

fn parse_pattern(raw: &str) -> Result<BitPattern> {
    raw.parse::<BitPattern>().map_err(|e| match e {
        Error::InvalidPattern { reason, .. } => Error::InvalidPattern {
            input: format!("--pattern {raw}"),
            reason,
        },
        other => other,
    })
}

const ORACLE_TOLERANCE: f64 = 1e-9;

fn execute(cli: &Cli, ch: &Characterization, argv: Vec<String>, stderr: &mut dyn Write) -> Result<String> {
    let manifest = |seed: Option<u64>| RunManifest::new(cli.command.name(), argv.clone(), ch, seed);

    match &cli.command {
        Command::Resistance { pattern, borders } => {
            let p = parse_pattern(pattern)?;
            let r = pattern_resistance(&p, *borders, &ch.table);
            if cli.oracle {
                check_resistance_oracle(&p, *borders, ch, r, stderr)?;
            }
            Ok(format!("{r:.2} ohm\n"))
        }
        Command::Voltage { pattern, borders } => {
            let p = parse_pattern(pattern)?;
            let r = pattern_resistance(&p, *borders, &ch.table);
            if cli.oracle {
                check_resistance_oracle(&p, *borders, ch, r, stderr)?;
            }
            let v = ch.read_current(p.len()) * r;
            Ok(format!("{:.2} mV\n", v * 1e3))
        }
        Command::Levels { domains, borders, format } => {
            let report = enumerate_levels(*domains, *borders, ch)?;
            if cli.oracle {
                check_report_oracle(&report, ch, stderr)?;
            }
            Ok(match format {
                Format::Table => render::levels_table(&report),
                Format::Csv => render::levels_csv(&report, &manifest(None)),
                Format::Json => render::json(&manifest(None), &report),
            })
        }
        Command::Margin {
            domains,
            closed_form,
            borders,
            format,
        } => {
            if *closed_form {
                let margin = closed_form_min_margin(*domains, ch)?;
                return Ok(match format {
                    Format::Table => format!("{:.2} mV\n", margin * 1e3),
                    Format::Csv => render::closed_form_csv(*domains, margin, &manifest(None)),
                    Format::Json => render::json(
                        &manifest(None),
                        &serde_json::json!({ "domains": domains, "closed_form_margin": margin }),
                    ),
                });
            }
            let report = enumerate_levels(*domains, borders.unwrap_or_default(), ch)?;
            if cli.oracle {
                check_report_oracle(&report, ch, stderr)?;
            }
            Ok(match format {
                Format::Table => render::margin_table(&report),
                Format::Csv => render::margins_csv(&report, &manifest(None)),
                Format::Json => render::json(&manifest(None), &report),
            })
        }
        Command::Sweep {
            from,
            to,
            threshold_mv,
            borders,
            format,
        } => {
            let report = sweep_domains(*from, *to, threshold_mv * 1e-3, ch)?;
            Ok(match format {
                Format::Table => render::sweep_table(&report, *borders),
                Format::Csv => render::sweep_csv(&report, *borders, &manifest(None)),
                Format::Json => render::json(&manifest(None), &report),
            })
        }
        Command::Variation {
            domains,
            offset_nm,
            monte_carlo,
            seed,
            sigma_nm,
            neighbors,
            borders,
            format,
        } => {
            if let Some(offset) = offset_nm {
                if *format == Format::Csv {
                    return Err(Error::InvalidSpec(
                        "CSV output is defined for --monte-carlo runs only".into(),
                    ));
                }
                let spec = MisalignmentSpec::new(Nanometers(*offset)).with_neighbors(*neighbors);
                let report = offset_margin_report(*domains, *borders, &spec, ch)?;
                return Ok(match format {
                    Format::Json => render::json(&manifest(None), &report),
                    _ => render::variation_table(&report),
                });
            }
            let n = monte_carlo.expect("clap enforces one mode");
            let seed = seed.expect("clap enforces --seed");
            let mut mc = MonteCarloSpec::new(n, seed);
            mc.neighbors = *neighbors;
            if let Some(sigma) = sigma_nm {
                mc.sigma = Nanometers(*sigma);
            }
            let report = monte_carlo_margins(*domains, *borders, &mc, ch)?;
            Ok(match format {
                Format::Table => render::variation_table(&report),
                Format::Csv => render::monte_carlo_csv(&report, &manifest(Some(seed))),
                Format::Json => render::json(&manifest(Some(seed)), &report),
            })
        }
    }
}

fn check_resistance_oracle(
    p: &BitPattern,
    borders: BorderCondition,
    ch: &Characterization,
    model: f64,
    stderr: &mut dyn Write,
) -> Result<()> {
    let exact = oracle::exact_pattern_resistance(p, borders, ch).to_f64();
    let rel = ((model - exact) / exact).abs();
    if rel > ORACLE_TOLERANCE {
        return Err(Error::InvalidSpec(format!(
            "oracle disagrees: model {model} vs exact {exact} (relative {rel:e})"
        )));
    }
    let _ = writeln!(stderr, "oracle: agrees (relative error {rel:e})");
    Ok(())
}

fn check_report_oracle(report: &crate::margins::MarginReport, ch: &Characterization, stderr: &mut dyn Write) -> Result<()> {
    if report.domains > oracle::ORACLE_DOMAIN_LIMIT {
        let _ = writeln!(
            stderr,
            "oracle: skipped, brute force is limited to {} domains",
            oracle::ORACLE_DOMAIN_LIMIT
        );
        return Ok(());
    }
    let reference = oracle::brute_force_report(report.domains, report.borders, ch)?;
    oracle::reports_agree(report, &reference, ORACLE_TOLERANCE)
        .map_err(|e| Error::InvalidSpec(format!("oracle disagrees: {e}")))?;
    let _ = writeln!(stderr, "oracle: brute-force report agrees");
    Ok(())
}

//! Compact model of a multi-domain magnetic tunnel junction on a
//! domain-wall memory nanowire.
//!
//! A junction covering D domains reads as a parallel network of
//! characterized mini-resistors, one per domain plus one per domain wall.
//! Its resistance therefore tracks how many of the covered domains store
//! `1` (anti-parallel) while staying nearly independent of where they sit.
//!
//! * [`chartable`] holds the characterized segment resistances, geometry and
//!   read drive, and loads overrides from a `key = value` file.
//! * [`netmodel`] decomposes a bit pattern into segments and sums them.
//! * [`margins`] clusters all patterns by Hamming weight, measures the sense
//!   margins between clusters and evaluates the closed-form scaling law.
//! * [`variation`] degrades those margins under stack-to-notch misalignment,
//!   deterministically or by Monte Carlo.
//! * [`oracle`] re-derives the same numbers along independent paths.
//! * [`cli`] is the `mdmtj` command-line front end.
//!
//! ```
//! use mdmtj::{Characterization, BitPattern, BorderCondition, pattern_resistance};
//!
//! let ch = Characterization::characterized();
//! let p: BitPattern = "00010".parse().unwrap();
//! let r = pattern_resistance(&p, BorderCondition::SAME, &ch.table);
//! assert!((r - 431.5).abs() < 0.1);
//! ```

pub mod chartable;
pub mod cli;
pub mod error;
pub mod margins;
pub mod netmodel;
pub mod oracle;
pub mod variation;

pub use chartable::{
    scaled_resistance, Characterization, CharacterizationMetadata, DeviceGeometry, DriveParams, LengthClass,
    Nanometers, Polarity, SegmentKind, SegmentResistanceTable, WallDirection,
};
pub use error::{Error, Result};
pub use margins::{
    closed_form_min_margin, enumerate_levels, reference_ladder, sweep_domains, BorderMode, LevelCluster,
    MarginReport, SweepReport,
};
pub use netmodel::{
    decompose, equivalence_key, equivalent_resistance, pattern_resistance, pattern_voltage, BitPattern, Border,
    BorderCondition, Decomposition, EquivalenceKey,
};
pub use variation::{
    apply_misalignment, monte_carlo_margins, offset_margin_report, MisalignmentSpec, MonteCarloSpec, NeighborBit,
    VariationReport,
};

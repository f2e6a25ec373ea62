//! Hamming-weight clusters, sense margins and junction-size scaling.
//!
//! Patterns are enumerated through their decomposition multisets rather
//! than one by one: a left-to-right pass over domain positions carries
//! `(segments so far, current bit, walls left of the current domain)` and
//! merges states that agree, so the number of states stays polynomial in
//! D even at 30 domains.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chartable::{Characterization, LengthClass, Polarity, SegmentKind, SegmentResistanceTable, WallDirection};
use crate::error::{Error, Result};
use crate::netmodel::{BitPattern, BorderCondition, SegmentCounts, MAX_DOMAINS};

/// Largest D for which [`sweep_domains`] fills the enumerated columns.
pub const SWEEP_ENUMERATION_LIMIT: usize = 20;

/// Which border conventions feed a cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BorderMode {
    Fixed(BorderCondition),
    /// Every pattern under all four conventions; clusters take the extremes.
    WorstCase,
}

impl BorderMode {
    pub fn conventions(self) -> Vec<BorderCondition> {
        match self {
            BorderMode::Fixed(b) => vec![b],
            BorderMode::WorstCase => BorderCondition::ALL.to_vec(),
        }
    }

    /// The four fixed conventions followed by the worst case.
    pub fn all() -> [BorderMode; 5] {
        let [a, b, c, d] = BorderCondition::ALL;
        [
            BorderMode::Fixed(a),
            BorderMode::Fixed(b),
            BorderMode::Fixed(c),
            BorderMode::Fixed(d),
            BorderMode::WorstCase,
        ]
    }
}

impl Default for BorderMode {
    fn default() -> Self {
        BorderMode::Fixed(BorderCondition::SAME)
    }
}

impl From<BorderCondition> for BorderMode {
    fn from(b: BorderCondition) -> Self {
        BorderMode::Fixed(b)
    }
}

impl fmt::Display for BorderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BorderMode::Fixed(b) => b.fmt(f),
            BorderMode::WorstCase => f.write_str("worst"),
        }
    }
}

impl FromStr for BorderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim() == "worst" {
            Ok(BorderMode::WorstCase)
        } else {
            s.parse().map(BorderMode::Fixed)
        }
    }
}

impl Serialize for BorderMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Patterns sharing one decomposition multiset under one convention.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternClass {
    /// Lexicographically smallest member.
    pub representative: BitPattern,
    pub borders: BorderCondition,
    pub multiplicity: u64,
    pub resistance: f64,
    pub voltage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelCluster {
    pub weight: usize,
    pub min_resistance: f64,
    pub max_resistance: f64,
    pub min_voltage: f64,
    pub max_voltage: f64,
    /// Distinct patterns of this weight, C(D, weight).
    pub pattern_count: u64,
    /// Sorted by representative, then borders.
    pub classes: Vec<PatternClass>,
}

/// Gap between cluster `weight_low` and cluster `weight_low + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjacentMargin {
    pub weight_low: usize,
    pub r_low_max: f64,
    pub r_high_min: f64,
    /// Volts; negative when the clusters overlap.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginReport {
    pub domains: usize,
    pub borders: BorderMode,
    /// Amperes.
    pub read_current: f64,
    pub clusters: Vec<LevelCluster>,
    pub margins: Vec<AdjacentMargin>,
    pub min_margin: f64,
    /// Weight pair of the smallest margin; ties go to the lower pair.
    pub min_margin_pair: (usize, usize),
    pub distinguishable_levels: usize,
}

impl MarginReport {
    /// Assembles clusters and margins from per-class results. `classes` may
    /// come in any order.
    pub fn from_classes(domains: usize, borders: BorderMode, read_current: f64, mut classes: Vec<PatternClass>) -> Self {
        let conventions = borders.conventions().len() as u64;
        classes.sort_by(|a, b| {
            (a.representative.weight(), a.representative, a.borders).cmp(&(
                b.representative.weight(),
                b.representative,
                b.borders,
            ))
        });

        let mut clusters: Vec<LevelCluster> = (0..=domains)
            .map(|weight| LevelCluster {
                weight,
                min_resistance: f64::INFINITY,
                max_resistance: f64::NEG_INFINITY,
                min_voltage: f64::INFINITY,
                max_voltage: f64::NEG_INFINITY,
                pattern_count: 0,
                classes: Vec::new(),
            })
            .collect();
        for class in classes {
            let c = &mut clusters[class.representative.weight()];
            c.min_resistance = c.min_resistance.min(class.resistance);
            c.max_resistance = c.max_resistance.max(class.resistance);
            c.min_voltage = c.min_voltage.min(class.voltage);
            c.max_voltage = c.max_voltage.max(class.voltage);
            c.pattern_count += class.multiplicity;
            c.classes.push(class);
        }
        for c in &mut clusters {
            c.pattern_count /= conventions;
        }

        let margins: Vec<AdjacentMargin> = clusters
            .windows(2)
            .map(|w| AdjacentMargin {
                weight_low: w[0].weight,
                r_low_max: w[0].max_resistance,
                r_high_min: w[1].min_resistance,
                margin: w[1].min_voltage - w[0].max_voltage,
            })
            .collect();
        let lowest = margins
            .iter()
            .reduce(|best, m| if m.margin < best.margin { m } else { best })
            .expect("at least one domain gives at least one margin");
        let min_margin = lowest.margin;
        let min_margin_pair = (lowest.weight_low, lowest.weight_low + 1);
        let distinguishable_levels = 1 + margins.iter().filter(|m| m.margin > 0.0).count();

        Self {
            domains,
            borders,
            read_current,
            clusters,
            margins,
            min_margin,
            min_margin_pair,
            distinguishable_levels,
        }
    }

    pub fn all_separated(&self) -> bool {
        self.distinguishable_levels == self.domains + 1
    }

    pub fn class_count(&self) -> usize {
        self.clusters.iter().map(|c| c.classes.len()).sum()
    }
}

/// One decomposition multiset reachable under a convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountClass {
    pub counts: SegmentCounts,
    pub multiplicity: u64,
    pub representative: BitPattern,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Frontier {
    counts: SegmentCounts,
    bit: bool,
    left_walls: u8,
}

/// Every distinct decomposition multiset of `domains`-wide patterns under
/// `borders`, with how many patterns map to it.
pub fn count_classes(domains: usize, borders: BorderCondition) -> Result<Vec<CountClass>> {
    check_domains(domains, 1)?;

    // (multiplicity, smallest pattern bits so far)
    let mut states: HashMap<Frontier, (u64, u32)> = HashMap::new();
    for bit in [false, true] {
        let mut counts = SegmentCounts::default();
        if borders.left.has_half_wall() {
            counts.add(SegmentKind::HalfWall(Polarity::from_bit(bit)));
        }
        let key = Frontier {
            counts,
            bit,
            left_walls: u8::from(borders.left.has_half_wall()),
        };
        states.insert(key, (1, u32::from(bit)));
    }

    for _ in 1..domains {
        let mut next: HashMap<Frontier, (u64, u32)> = HashMap::with_capacity(states.len() * 2);
        for (state, (mult, rep)) in &states {
            for bit in [false, true] {
                let wall = bit != state.bit;
                let mut counts = state.counts;
                counts.add(SegmentKind::domain(
                    Polarity::from_bit(state.bit),
                    LengthClass::from_walls(state.left_walls + u8::from(wall)),
                ));
                if let Some(dir) = WallDirection::between(state.bit, bit) {
                    counts.add(SegmentKind::FullWall(dir));
                }
                let key = Frontier {
                    counts,
                    bit,
                    left_walls: u8::from(wall),
                };
                let rep = (rep << 1) | u32::from(bit);
                let entry = next.entry(key).or_insert((0, rep));
                entry.0 += mult;
                entry.1 = entry.1.min(rep);
            }
        }
        states = next;
    }

    let right_wall = borders.right.has_half_wall();
    let mut finished: HashMap<SegmentCounts, (u64, u32)> = HashMap::new();
    for (state, (mult, rep)) in states {
        let mut counts = state.counts;
        counts.add(SegmentKind::domain(
            Polarity::from_bit(state.bit),
            LengthClass::from_walls(state.left_walls + u8::from(right_wall)),
        ));
        if right_wall {
            counts.add(SegmentKind::HalfWall(Polarity::from_bit(state.bit)));
        }
        let entry = finished.entry(counts).or_insert((0, rep));
        entry.0 += mult;
        entry.1 = entry.1.min(rep);
    }

    let mut out: Vec<CountClass> = finished
        .into_iter()
        .map(|(counts, (multiplicity, rep))| CountClass {
            counts,
            multiplicity,
            representative: BitPattern::new(rep, domains).expect("length already checked"),
        })
        .collect();
    out.sort_by_key(|c| c.representative);
    Ok(out)
}

/// Groups all 2^D patterns into weight clusters and measures the gaps.
pub fn enumerate_levels(domains: usize, borders: BorderMode, ch: &Characterization) -> Result<MarginReport> {
    check_domains(domains, 1)?;
    let current = ch.read_current(domains);
    let mut classes = Vec::new();
    for convention in borders.conventions() {
        for class in count_classes(domains, convention)? {
            let resistance = class.counts.resistance(&ch.table);
            classes.push(PatternClass {
                representative: class.representative,
                borders: convention,
                multiplicity: class.multiplicity,
                resistance,
                voltage: current * resistance,
            });
        }
    }
    Ok(MarginReport::from_classes(domains, borders, current, classes))
}

/// The two resistances of the closed-form margin: the lowest weight-1
/// configuration (a lone `1` at an edge whose outside neighbour is `0`)
/// and the highest weight-0 configuration (all `0` with half walls on
/// both sides).
pub fn closed_form_terms(domains: usize, table: &SegmentResistanceTable) -> Result<(f64, f64)> {
    check_domains(domains, 2)?;
    let interior = (domains - 2) as f64;
    let r = |kind: SegmentKind| table.get(kind);
    let minus = |class| r(SegmentKind::domain(Polarity::MinusZ, class));

    let weight_one = 1.0
        / (interior / minus(LengthClass::L80)
            + 1.0 / minus(LengthClass::L74)
            + 1.0 / r(SegmentKind::domain(Polarity::PlusZ, LengthClass::L68))
            + 1.0 / r(SegmentKind::FullWall(WallDirection::ZeroToOne))
            + 1.0 / r(SegmentKind::HalfWall(Polarity::PlusZ)));
    let weight_zero = 1.0
        / (interior / minus(LengthClass::L80)
            + 2.0 / minus(LengthClass::L74)
            + 2.0 / r(SegmentKind::HalfWall(Polarity::MinusZ)));
    Ok((weight_one, weight_zero))
}

/// Closed-form worst-case 0/1 sense margin in volts:
/// J_C · D · A_d · (R_weight1,min − R_weight0,max).
pub fn closed_form_min_margin(domains: usize, ch: &Characterization) -> Result<f64> {
    let (high, low) = closed_form_terms(domains, &ch.table)?;
    Ok(ch.read_current(domains) * (high - low))
}

/// Reference voltages halfway across every gap, lowest first.
pub fn reference_ladder(report: &MarginReport) -> Result<Vec<f64>> {
    report
        .margins
        .iter()
        .map(|m| {
            if m.margin <= 0.0 {
                return Err(Error::ClustersOverlap {
                    weight_low: m.weight_low,
                    margin_volts: m.margin,
                });
            }
            let low = &report.clusters[m.weight_low];
            let high = &report.clusters[m.weight_low + 1];
            Ok(0.5 * (low.max_voltage + high.min_voltage))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumeratedMargin {
    pub borders: BorderMode,
    pub min_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub domains: usize,
    pub closed_form_margin: f64,
    /// One entry per [`BorderMode::all`]; empty above the enumeration limit.
    pub enumerated: Vec<EnumeratedMargin>,
}

impl SweepRow {
    pub fn enumerated_for(&self, borders: BorderMode) -> Option<f64> {
        self.enumerated.iter().find(|e| e.borders == borders).map(|e| e.min_margin)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub threshold: f64,
    pub rows: Vec<SweepRow>,
    /// Largest D whose closed-form margin reaches the threshold.
    pub max_scalable_domains: Option<usize>,
}

pub fn sweep_domains(min_domains: usize, max_domains: usize, threshold_volts: f64, ch: &Characterization) -> Result<SweepReport> {
    check_domains(min_domains, 2)?;
    check_domains(max_domains, 2)?;
    if min_domains > max_domains {
        return Err(Error::InvalidSpec(format!(
            "sweep range {min_domains}..={max_domains} is empty"
        )));
    }

    let rows = (min_domains..=max_domains)
        .into_par_iter()
        .map(|domains| -> Result<SweepRow> {
            let closed_form_margin = closed_form_min_margin(domains, ch)?;
            let enumerated = if domains <= SWEEP_ENUMERATION_LIMIT {
                BorderMode::all()
                    .into_iter()
                    .map(|borders| {
                        enumerate_levels(domains, borders, ch).map(|r| EnumeratedMargin {
                            borders,
                            min_margin: r.min_margin,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok(SweepRow {
                domains,
                closed_form_margin,
                enumerated,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_scalable_domains = rows
        .iter()
        .filter(|r| r.closed_form_margin >= threshold_volts)
        .map(|r| r.domains)
        .max();
    Ok(SweepReport {
        threshold: threshold_volts,
        rows,
        max_scalable_domains,
    })
}

pub(crate) fn check_domains(domains: usize, min: usize) -> Result<()> {
    if domains < min {
        return Err(Error::DomainCountTooSmall { domains, min });
    }
    if domains > MAX_DOMAINS {
        return Err(Error::DomainCountTooLarge {
            domains,
            max: MAX_DOMAINS,
        });
    }
    Ok(())
}

//! Reference paths for checking the production model.
//!
//! Nothing in here reuses the netmodel decomposition or the margins
//! enumerator. Segments come from laying walls out geometrically along the
//! track, resistances are summed as exact rationals, and the brute-force
//! report walks all 2^D patterns one at a time. Slow on purpose.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::chartable::{Characterization, DeviceGeometry, SegmentKind, SegmentResistanceTable};
use crate::error::{Error, Result};
use crate::margins::{AdjacentMargin, BorderMode, LevelCluster, MarginReport, PatternClass};
use crate::netmodel::{BitPattern, BorderCondition, Decomposition, SegmentCounts};

/// Largest D the brute-force paths accept.
pub const ORACLE_DOMAIN_LIMIT: usize = 12;

/// Arbitrary-precision fraction, always in lowest terms with a positive
/// denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Self> {
        let den = denominator.into();
        if den.is_zero() {
            return Err(Error::InvalidSpec("zero denominator".into()));
        }
        Ok(Self(BigRational::new(numerator.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    /// The exact binary value of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self)
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn recip(&self) -> Self {
        Self(self.0.recip())
    }

    /// Nearest double.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("finite rational")
    }
}

/// Exact decimal parsing: `"431.5"`, `"-2e3"`, `"3.21E10"`.
impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("`{s}` is not a decimal number"));
        let t = s.trim();
        let (mantissa, exponent) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (negative, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all_digits = format!("{int_part}{frac_part}");
        let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
        if negative {
            numer = -numer;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10u32);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Self(value))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

/// (Σ 1/Rᵢ)⁻¹ with no rounding.
pub fn rational_parallel_sum(resistances: &[ExactRational]) -> Result<ExactRational> {
    if resistances.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let mut conductance = BigRational::zero();
    for r in resistances {
        if !r.is_positive() {
            return Err(Error::InvalidSpec(format!("resistance {r} is not positive")));
        }
        conductance += r.0.recip();
    }
    Ok(ExactRational(conductance.recip()))
}

/// What a stretch of free layer under the junction holds.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Piece {
    /// Uniform region with its stored bit.
    Plain(bool),
    /// Full wall between two in-window domains, bits left and right.
    Wall(bool, bool),
    /// Edge wall; bit of the in-window side.
    EdgeWall(bool),
}

/// One segment of the geometric layout with its exact length.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LaidOutSegment {
    piece: Piece,
    length: BigRational,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite geometry")
}

/// Lays the window out in nanometres: domains of equal pitch, a notch-wide
/// wall centred on each boundary between unequal bits, and half a notch at
/// each edge whose outside neighbour differs. Plain lengths are whatever
/// the walls leave over.
pub fn lay_out(pattern: &BitPattern, borders: BorderCondition, geometry: &DeviceGeometry) -> Vec<LaidOutSegment> {
    let bits: Vec<bool> = pattern.bits().collect();
    let d = bits.len();
    let pitch = exact(geometry.domain_length.0);
    let half = exact(geometry.notch_length.0) / BigRational::from_integer(2.into());

    // walls[i] is the wall (if any) on boundary i, 0..=d, boundary 0 being
    // the left window edge.
    let mut walls: Vec<Option<Piece>> = vec![None; d + 1];
    if borders.left.has_half_wall() {
        walls[0] = Some(Piece::EdgeWall(bits[0]));
    }
    if borders.right.has_half_wall() {
        walls[d] = Some(Piece::EdgeWall(bits[d - 1]));
    }
    for i in 1..d {
        if bits[i - 1] != bits[i] {
            walls[i] = Some(Piece::Wall(bits[i - 1], bits[i]));
        }
    }

    let mut out = Vec::new();
    for (i, wall) in walls.iter().enumerate() {
        match wall {
            Some(Piece::EdgeWall(b)) => out.push(LaidOutSegment {
                piece: Piece::EdgeWall(*b),
                length: half.clone(),
            }),
            Some(w) => out.push(LaidOutSegment {
                piece: w.clone(),
                length: &half + &half,
            }),
            None => {}
        }
        if i < d {
            let mut plain = pitch.clone();
            if walls[i].is_some() {
                plain -= &half;
            }
            if walls[i + 1].is_some() {
                plain -= &half;
            }
            out.push(LaidOutSegment {
                piece: Piece::Plain(bits[i]),
                length: plain,
            });
        }
    }
    out
}

fn lookup(segment: &LaidOutSegment, table: &SegmentResistanceTable, geometry: &DeviceGeometry) -> BigRational {
    let pitch = exact(geometry.domain_length.0);
    let half = exact(geometry.notch_length.0) / BigRational::from_integer(2.into());
    let value = |i: usize| exact(table.as_array()[i]);
    match &segment.piece {
        Piece::Plain(bit) => {
            let base = if *bit { 3 } else { 0 };
            let mut len = pitch;
            for offset in 0..3 {
                if len == segment.length {
                    return value(base + offset);
                }
                len -= &half;
            }
            panic!("no characterized domain of length {}", segment.length)
        }
        Piece::Wall(false, true) => value(6),
        Piece::Wall(true, false) => value(7),
        Piece::Wall(..) => unreachable!("walls only separate unequal bits"),
        Piece::EdgeWall(false) => value(8),
        Piece::EdgeWall(true) => value(9),
    }
}

/// Exact equivalent resistance of a pattern via the geometric layout.
pub fn exact_pattern_resistance(pattern: &BitPattern, borders: BorderCondition, ch: &Characterization) -> ExactRational {
    let ohms: Vec<ExactRational> = lay_out(pattern, borders, &ch.geometry)
        .iter()
        .map(|s| ExactRational(lookup(s, &ch.table, &ch.geometry)))
        .collect();
    rational_parallel_sum(&ohms).expect("a layout has at least one segment")
}

/// Exact parallel sum of a production decomposition's segments.
pub fn exact_decomposition_resistance(decomposition: &Decomposition, table: &SegmentResistanceTable) -> ExactRational {
    let ohms: Vec<ExactRational> = decomposition
        .segments
        .iter()
        .map(|k| ExactRational(exact(table.get(*k))))
        .collect();
    rational_parallel_sum(&ohms).expect("a decomposition has at least one segment")
}

/// Raw 2^D margin report, built one pattern at a time with exact sums.
pub fn brute_force_report(domains: usize, borders: BorderMode, ch: &Characterization) -> Result<MarginReport> {
    if domains == 0 {
        return Err(Error::DomainCountTooSmall { domains, min: 1 });
    }
    if domains > ORACLE_DOMAIN_LIMIT {
        return Err(Error::DomainCountTooLarge {
            domains,
            max: ORACLE_DOMAIN_LIMIT,
        });
    }
    let current = ch.read_current(domains);
    let conventions = match borders {
        BorderMode::Fixed(b) => vec![b],
        BorderMode::WorstCase => BorderCondition::ALL.to_vec(),
    };

    struct Group {
        count: u64,
        first: BitPattern,
        ohms: f64,
    }
    let mut groups: BTreeMap<(usize, BorderCondition, Vec<LaidOutSegment>), Group> = BTreeMap::new();
    for &b in &conventions {
        for bits in 0..(1u32 << domains) {
            let pattern = BitPattern::new(bits, domains)?;
            let mut layout = lay_out(&pattern, b, &ch.geometry);
            layout.sort();
            let key = (pattern.weight(), b, layout);
            if let Some(g) = groups.get_mut(&key) {
                g.count += 1;
                continue;
            }
            let ohms = exact_pattern_resistance(&pattern, b, ch).to_f64();
            groups.insert(key, Group { count: 1, first: pattern, ohms });
        }
    }

    let mut clusters = Vec::new();
    for weight in 0..=domains {
        let mut classes: Vec<PatternClass> = groups
            .iter()
            .filter(|((w, _, _), _)| *w == weight)
            .map(|((_, b, _), g)| PatternClass {
                representative: g.first,
                borders: *b,
                multiplicity: g.count,
                resistance: g.ohms,
                voltage: current * g.ohms,
            })
            .collect();
        classes.sort_by_key(|a| (a.representative, a.borders));
        let rs: Vec<f64> = classes.iter().map(|c| c.resistance).collect();
        let vs: Vec<f64> = classes.iter().map(|c| c.voltage).collect();
        let total: u64 = classes.iter().map(|c| c.multiplicity).sum();
        clusters.push(LevelCluster {
            weight,
            min_resistance: rs.iter().copied().fold(f64::INFINITY, f64::min),
            max_resistance: rs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_voltage: vs.iter().copied().fold(f64::INFINITY, f64::min),
            max_voltage: vs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            pattern_count: total / conventions.len() as u64,
            classes,
        });
    }

    let mut margins = Vec::new();
    for w in 0..domains {
        margins.push(AdjacentMargin {
            weight_low: w,
            r_low_max: clusters[w].max_resistance,
            r_high_min: clusters[w + 1].min_resistance,
            margin: clusters[w + 1].min_voltage - clusters[w].max_voltage,
        });
    }
    let mut lowest = 0;
    for (w, m) in margins.iter().enumerate() {
        if m.margin < margins[lowest].margin {
            lowest = w;
        }
    }
    let positive = margins.iter().filter(|m| m.margin > 0.0).count();

    Ok(MarginReport {
        domains,
        borders,
        read_current: current,
        min_margin: margins[lowest].margin,
        min_margin_pair: (lowest, lowest + 1),
        distinguishable_levels: positive + 1,
        clusters,
        margins,
    })
}

/// Field-by-field comparison. Structure must match exactly; ohms and volts
/// may differ by `rel` relative to the largest value of their kind.
pub fn reports_agree(a: &MarginReport, b: &MarginReport, rel: f64) -> std::result::Result<(), String> {
    macro_rules! same {
        ($lhs:expr, $rhs:expr, $what:expr) => {
            if $lhs != $rhs {
                return Err(format!("{}: {:?} vs {:?}", $what, $lhs, $rhs));
            }
        };
    }
    let scale_r = a.clusters.iter().map(|c| c.max_resistance).fold(0.0, f64::max);
    let scale_v = a.clusters.iter().map(|c| c.max_voltage).fold(0.0, f64::max);
    let near = |x: f64, y: f64, scale: f64| (x - y).abs() <= rel * scale;
    macro_rules! close {
        ($lhs:expr, $rhs:expr, $scale:expr, $what:expr) => {
            if !near($lhs, $rhs, $scale) {
                return Err(format!("{}: {} vs {}", $what, $lhs, $rhs));
            }
        };
    }

    same!(a.domains, b.domains, "domains");
    same!(a.borders, b.borders, "borders");
    close!(a.read_current, b.read_current, a.read_current, "read current");
    same!(a.clusters.len(), b.clusters.len(), "cluster count");
    for (x, y) in a.clusters.iter().zip(&b.clusters) {
        let w = x.weight;
        same!(x.weight, y.weight, "weight");
        same!(x.pattern_count, y.pattern_count, format!("pattern count w={w}"));
        close!(x.min_resistance, y.min_resistance, scale_r, format!("min R w={w}"));
        close!(x.max_resistance, y.max_resistance, scale_r, format!("max R w={w}"));
        close!(x.min_voltage, y.min_voltage, scale_v, format!("min V w={w}"));
        close!(x.max_voltage, y.max_voltage, scale_v, format!("max V w={w}"));
        same!(x.classes.len(), y.classes.len(), format!("class count w={w}"));
        for (c, e) in x.classes.iter().zip(&y.classes) {
            same!(c.representative, e.representative, format!("representative w={w}"));
            same!(c.borders, e.borders, format!("class borders w={w}"));
            same!(c.multiplicity, e.multiplicity, format!("multiplicity of {}", c.representative));
            close!(c.resistance, e.resistance, scale_r, format!("R of {}", c.representative));
            close!(c.voltage, e.voltage, scale_v, format!("V of {}", c.representative));
        }
    }
    same!(a.margins.len(), b.margins.len(), "margin count");
    for (x, y) in a.margins.iter().zip(&b.margins) {
        same!(x.weight_low, y.weight_low, "margin weight");
        close!(x.r_low_max, y.r_low_max, scale_r, format!("r_low_max {}", x.weight_low));
        close!(x.r_high_min, y.r_high_min, scale_r, format!("r_high_min {}", x.weight_low));
        close!(x.margin, y.margin, scale_v, format!("margin {}", x.weight_low));
    }
    close!(a.min_margin, b.min_margin, scale_v, "min margin");
    same!(a.min_margin_pair, b.min_margin_pair, "min margin pair");
    same!(a.distinguishable_levels, b.distinguishable_levels, "distinguishable levels");
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryCheck {
    /// Reading the track backwards reverses every full wall.
    MirrorSegments,
    /// Reversed pattern under mirrored borders = original under a table
    /// with wall directions swapped.
    MirrorResistance,
    /// Inverting every bit flips every segment's polarity.
    ComplementSegments,
    /// Inverted pattern under the polarity-swapped table = original.
    ComplementResistance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub check: SymmetryCheck,
    pub pattern: BitPattern,
    pub borders: BorderCondition,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} fails for {} ({})", self.check, self.pattern, self.borders)
    }
}

/// Mirror and complement symmetries of the production decomposition,
/// exhaustively for 1..=max_domains.
pub fn symmetry_sweep(max_domains: usize, table: &SegmentResistanceTable) -> Result<Option<Counterexample>> {
    symmetry_sweep_with(max_domains, table, crate::netmodel::decompose)
}

/// As [`symmetry_sweep`] with a substitute decomposer, for mutation tests.
pub fn symmetry_sweep_with<F>(max_domains: usize, table: &SegmentResistanceTable, decompose: F) -> Result<Option<Counterexample>>
where
    F: Fn(&BitPattern, BorderCondition) -> Decomposition,
{
    if max_domains > ORACLE_DOMAIN_LIMIT {
        return Err(Error::DomainCountTooLarge {
            domains: max_domains,
            max: ORACLE_DOMAIN_LIMIT,
        });
    }
    let wall_swapped = table.wall_directions_swapped();
    let polarity_swapped = table.polarity_swapped();
    let mapped = |d: &Decomposition, f: fn(SegmentKind) -> SegmentKind| {
        let mut counts = SegmentCounts::default();
        for k in &d.segments {
            counts.add(f(*k));
        }
        counts
    };

    for domains in 1..=max_domains {
        for bits in 0..(1u32 << domains) {
            let pattern = BitPattern::new(bits, domains)?;
            for borders in BorderCondition::ALL {
                let fail = |check| {
                    Ok(Some(Counterexample {
                        check,
                        pattern,
                        borders,
                    }))
                };
                let original = decompose(&pattern, borders);
                let mirror = decompose(&pattern.reversed(), borders.mirrored());
                if mirror.counts() != mapped(&original, SegmentKind::mirrored) {
                    return fail(SymmetryCheck::MirrorSegments);
                }
                if mirror.counts().resistance(table) != original.counts().resistance(&wall_swapped) {
                    return fail(SymmetryCheck::MirrorResistance);
                }
                let complement = decompose(&pattern.complemented(), borders);
                if complement.counts() != mapped(&original, SegmentKind::complemented) {
                    return fail(SymmetryCheck::ComplementSegments);
                }
                if complement.counts().resistance(&polarity_swapped) != original.counts().resistance(table) {
                    return fail(SymmetryCheck::ComplementResistance);
                }
            }
        }
    }
    Ok(None)
}

/// Largest relative gap between the floating-point model and the exact
/// layout over every pattern and convention up to `max_domains`.
pub fn max_relative_error(max_domains: usize, ch: &Characterization) -> Result<f64> {
    if max_domains > ORACLE_DOMAIN_LIMIT {
        return Err(Error::DomainCountTooLarge {
            domains: max_domains,
            max: ORACLE_DOMAIN_LIMIT,
        });
    }
    let mut worst = BigRational::zero();
    for domains in 1..=max_domains {
        for bits in 0..(1u32 << domains) {
            let pattern = BitPattern::new(bits, domains)?;
            for b in BorderCondition::ALL {
                let exact_r = exact_pattern_resistance(&pattern, b, ch);
                let model = exact(crate::netmodel::pattern_resistance(&pattern, b, &ch.table));
                let err = ((model - &exact_r.0) / &exact_r.0).abs();
                if err > worst {
                    worst = err;
                }
            }
        }
    }
    Ok(worst.to_f64().unwrap_or(f64::INFINITY))
}

impl One for ExactRational {
    fn one() -> Self {
        Self(BigRational::one())
    }
}

impl Zero for ExactRational {
    fn zero() -> Self {
        Self(BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

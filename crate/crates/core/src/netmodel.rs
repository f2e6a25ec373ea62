//! Bit pattern -> parallel mini-resistor network -> resistance and voltage.
//!
//! A junction spanning D domains is a parallel arrangement of segments:
//! one per domain, one full wall between every pair of neighbouring
//! domains that store different bits, and a half wall at each window edge
//! whose outside neighbour has the opposite polarity. Every wall touching
//! a domain shortens it by half a notch.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::chartable::{
    Characterization, LengthClass, Polarity, SegmentKind, SegmentResistanceTable, WallDirection, KIND_COUNT,
};
use crate::error::{Error, Result};

/// Largest junction the enumerators accept.
pub const MAX_DOMAINS: usize = 30;

/// Bits stored under the junction, leftmost physical domain first.
/// `1` is +Z (anti-parallel), `0` is -Z (parallel).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitPattern {
    // Leftmost domain in the most significant of the `len` low bits, so the
    // integer order matches the lexicographic order of the bit string.
    bits: u32,
    len: u8,
}

impl BitPattern {
    pub fn new(bits: u32, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidPattern {
                input: String::new(),
                reason: "pattern is empty".to_string(),
            });
        }
        if len > MAX_DOMAINS {
            return Err(Error::DomainCountTooLarge {
                domains: len,
                max: MAX_DOMAINS,
            });
        }
        Ok(Self {
            bits: bits & mask(len),
            len: len as u8,
        })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_u32(&self) -> u32 {
        self.bits
    }

    /// Bit of domain `i`, counting from the left.
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn reversed(&self) -> Self {
        let bits = self.bits.reverse_bits() >> (32 - self.len());
        Self { bits, len: self.len }
    }

    pub fn complemented(&self) -> Self {
        Self {
            bits: !self.bits & mask(self.len()),
            len: self.len,
        }
    }

    pub fn with_bit(&self, i: usize, value: bool) -> Self {
        let m = 1 << (self.len() - 1 - i);
        let bits = if value { self.bits | m } else { self.bits & !m };
        Self { bits, len: self.len }
    }

    /// All 2^len patterns in increasing numeric order.
    pub fn all(len: usize) -> Result<impl Iterator<Item = BitPattern>> {
        Self::zeros(len)?;
        Ok((0..=mask(len)).map(move |bits| BitPattern { bits, len: len as u8 }))
    }
}

fn mask(len: usize) -> u32 {
    if len >= 32 {
        u32::MAX
    } else {
        (1u32 << len) - 1
    }
}

impl FromStr for BitPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidPattern {
            input: s.to_string(),
            reason,
        };
        if s.is_empty() {
            return Err(invalid("pattern is empty".to_string()));
        }
        let mut bits = 0u32;
        let mut len = 0usize;
        for (pos, c) in s.chars().enumerate() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(invalid(format!(
                        "character `{other}` at position {pos} is not 0 or 1"
                    )))
                }
            };
            len += 1;
            if len > MAX_DOMAINS {
                return Err(invalid(format!("longer than {MAX_DOMAINS} domains")));
            }
            bits = (bits << 1) | b;
        }
        Self::new(bits, len)
    }
}

impl fmt::Display for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPattern({self})")
    }
}

impl Serialize for BitPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Whether the out-of-window neighbour on one side has the same polarity
/// as the adjacent edge domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Border {
    Same,
    Differ,
}

impl Border {
    pub fn has_half_wall(self) -> bool {
        self == Border::Differ
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BorderCondition {
    pub left: Border,
    pub right: Border,
}

impl BorderCondition {
    pub const SAME: BorderCondition = BorderCondition::new(Border::Same, Border::Same);
    pub const DIFFER: BorderCondition = BorderCondition::new(Border::Differ, Border::Differ);

    pub const ALL: [BorderCondition; 4] = [
        BorderCondition::new(Border::Same, Border::Same),
        BorderCondition::new(Border::Same, Border::Differ),
        BorderCondition::new(Border::Differ, Border::Same),
        BorderCondition::new(Border::Differ, Border::Differ),
    ];

    pub const fn new(left: Border, right: Border) -> Self {
        Self { left, right }
    }

    pub fn mirrored(self) -> Self {
        Self::new(self.right, self.left)
    }
}

impl Default for BorderCondition {
    fn default() -> Self {
        Self::SAME
    }
}

impl fmt::Display for BorderCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |b: Border| match b {
            Border::Same => "same",
            Border::Differ => "differ",
        };
        write!(f, "{},{}", name(self.left), name(self.right))
    }
}

impl FromStr for BorderCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let side = |t: &str| match t.trim() {
            "same" => Ok(Border::Same),
            "differ" => Ok(Border::Differ),
            other => Err(format!("unknown border `{other}` (expected same or differ)")),
        };
        let (l, r) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `<left>,<right>`, got `{s}`"))?;
        Ok(Self::new(side(l)?, side(r)?))
    }
}

impl Serialize for BorderCondition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Multiplicity of every segment kind in a network.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentCounts(pub [u32; KIND_COUNT]);

impl SegmentCounts {
    pub fn add(&mut self, kind: SegmentKind) {
        self.0[kind.index()] += 1;
    }

    pub fn remove(&mut self, kind: SegmentKind) {
        let slot = &mut self.0[kind.index()];
        assert!(*slot > 0, "no {kind} segment to remove");
        *slot -= 1;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn domains(&self) -> u32 {
        self.0[..6].iter().sum()
    }

    /// Number of +Z domains, i.e. the Hamming weight of the source pattern.
    pub fn weight(&self) -> u32 {
        self.0[3..6].iter().sum()
    }

    pub fn full_walls(&self) -> u32 {
        self.0[6] + self.0[7]
    }

    pub fn half_walls(&self) -> u32 {
        self.0[8] + self.0[9]
    }

    /// Total conductance in siemens.
    ///
    /// Terms are added in complementary pairs (-Z/+Z of each length class,
    /// the two wall directions, the two half-wall polarities) and the pair
    /// sums in a fixed order, so swapping the members of any pair in both
    /// counts and table leaves the result bit-identical.
    pub fn conductance(&self, table: &SegmentResistanceTable) -> f64 {
        let ohms = table.as_array();
        let term = |i: usize| f64::from(self.0[i]) / ohms[i];
        let pair = |a: usize, b: usize| term(a) + term(b);
        pair(0, 3) + pair(1, 4) + pair(2, 5) + pair(6, 7) + pair(8, 9)
    }

    pub fn resistance(&self, table: &SegmentResistanceTable) -> f64 {
        1.0 / self.conductance(table)
    }
}

impl Index<SegmentKind> for SegmentCounts {
    type Output = u32;

    fn index(&self, kind: SegmentKind) -> &u32 {
        &self.0[kind.index()]
    }
}

/// Segments of one pattern under one border convention, in physical
/// left-to-right order.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub pattern: BitPattern,
    pub borders: BorderCondition,
    pub segments: Vec<SegmentKind>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Decomposition {
    pub fn counts(&self) -> SegmentCounts {
        let mut counts = SegmentCounts::default();
        for kind in &self.segments {
            counts.add(*kind);
        }
        counts
    }

    pub fn same_multiset(&self, other: &Decomposition) -> bool {
        self.counts() == other.counts()
    }

    /// Domain segment at the given window edge.
    pub fn edge_domain(&self, side: Side) -> SegmentKind {
        let found = match side {
            Side::Left => self.segments.iter().find(|k| matches!(k, SegmentKind::Domain { .. })),
            Side::Right => self.segments.iter().rev().find(|k| matches!(k, SegmentKind::Domain { .. })),
        };
        *found.expect("a decomposition always has at least one domain")
    }

    /// Half wall at the given window edge, if that border differs.
    pub fn edge_half_wall(&self, side: Side) -> Option<SegmentKind> {
        let edge = match side {
            Side::Left => self.segments.first(),
            Side::Right => self.segments.last(),
        };
        edge.copied().filter(|k| matches!(k, SegmentKind::HalfWall(_)))
    }
}

/// Splits `pattern` into its characterized mini-resistors.
pub fn decompose(pattern: &BitPattern, borders: BorderCondition) -> Decomposition {
    let d = pattern.len();
    let mut segments = Vec::with_capacity(2 * d + 1);
    let edge_pol = |i: usize| Polarity::from_bit(pattern.bit(i));

    if borders.left.has_half_wall() {
        segments.push(SegmentKind::HalfWall(edge_pol(0)));
    }
    for i in 0..d {
        let bit = pattern.bit(i);
        let left_wall = if i == 0 {
            borders.left.has_half_wall()
        } else {
            pattern.bit(i - 1) != bit
        };
        let right_wall = if i + 1 == d {
            borders.right.has_half_wall()
        } else {
            pattern.bit(i + 1) != bit
        };
        let class = LengthClass::from_walls(u8::from(left_wall) + u8::from(right_wall));
        segments.push(SegmentKind::domain(Polarity::from_bit(bit), class));
        if i + 1 < d {
            if let Some(dir) = WallDirection::between(bit, pattern.bit(i + 1)) {
                segments.push(SegmentKind::FullWall(dir));
            }
        }
    }
    if borders.right.has_half_wall() {
        segments.push(SegmentKind::HalfWall(edge_pol(d - 1)));
    }

    Decomposition {
        pattern: *pattern,
        borders,
        segments,
    }
}

pub fn equivalent_resistance(decomposition: &Decomposition, table: &SegmentResistanceTable) -> f64 {
    decomposition.counts().resistance(table)
}

pub fn pattern_resistance(pattern: &BitPattern, borders: BorderCondition, table: &SegmentResistanceTable) -> f64 {
    equivalent_resistance(&decompose(pattern, borders), table)
}

/// Read voltage in volts: I_read × R_eq, with I_read = J_C × D × A_d.
pub fn pattern_voltage(pattern: &BitPattern, borders: BorderCondition, ch: &Characterization) -> f64 {
    ch.read_current(pattern.len()) * pattern_resistance(pattern, borders, &ch.table)
}

/// Fingerprint grouping patterns the way a resistance table groups them:
/// the decomposition multiset with the two full-wall directions folded
/// together.
///
/// Patterns sharing a key have the same domains, half walls and number of
/// walls; their resistances can differ only through the small 0->1 / 1->0
/// wall asymmetry. Use [`SegmentCounts`] when exact equality is needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EquivalenceKey {
    domains: [u32; 6],
    full_walls: u32,
    half_walls: [u32; 2],
}

impl From<&SegmentCounts> for EquivalenceKey {
    fn from(c: &SegmentCounts) -> Self {
        let a = &c.0;
        Self {
            domains: [a[0], a[1], a[2], a[3], a[4], a[5]],
            full_walls: a[6] + a[7],
            half_walls: [a[8], a[9]],
        }
    }
}

pub fn equivalence_key(pattern: &BitPattern, borders: BorderCondition) -> EquivalenceKey {
    EquivalenceKey::from(&decompose(pattern, borders).counts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartable::{LengthClass::*, Polarity::*};

    fn p(s: &str) -> BitPattern {
        s.parse().unwrap()
    }

    fn dom(pol: Polarity, class: LengthClass) -> SegmentKind {
        SegmentKind::domain(pol, class)
    }

    #[test]
    fn pattern_parsing() {
        let x = p("00010");
        assert_eq!(x.len(), 5);
        assert_eq!(x.as_u32(), 2);
        assert_eq!(x.to_string(), "00010");
        assert_eq!(x.weight(), 1);
        assert_eq!(x.reversed().to_string(), "01000");
        assert_eq!(x.complemented().to_string(), "11101");
        assert_eq!(p("1").reversed(), p("1"));

        let err = "0201".parse::<BitPattern>().unwrap_err();
        assert!(err.to_string().contains("`2`"), "{err}");
        assert!("".parse::<BitPattern>().is_err());
        assert!("0".repeat(31).parse::<BitPattern>().is_err());
        assert_eq!("1".repeat(30).parse::<BitPattern>().unwrap().weight(), 30);
        assert_eq!(p(&"10".repeat(15)).reversed().to_string(), "01".repeat(15));
    }

    #[test]
    fn border_parsing() {
        assert_eq!("same,same".parse::<BorderCondition>().unwrap(), BorderCondition::SAME);
        assert_eq!(
            "same,differ".parse::<BorderCondition>().unwrap(),
            BorderCondition::new(Border::Same, Border::Differ)
        );
        assert!("worst".parse::<BorderCondition>().is_err());
        for b in BorderCondition::ALL {
            assert_eq!(b.to_string().parse::<BorderCondition>().unwrap(), b);
        }
    }

    #[test]
    fn worked_example_0001_differ_differ() {
        let d = decompose(&p("0001"), BorderCondition::DIFFER);
        assert_eq!(
            d.segments,
            vec![
                SegmentKind::HalfWall(MinusZ),
                dom(MinusZ, L74),
                dom(MinusZ, L80),
                dom(MinusZ, L74),
                SegmentKind::FullWall(WallDirection::ZeroToOne),
                dom(PlusZ, L68),
                SegmentKind::HalfWall(PlusZ),
            ]
        );
    }

    #[test]
    fn no_walls_for_uniform_same_same() {
        let d = decompose(&p("0000"), BorderCondition::SAME);
        assert_eq!(d.segments, vec![dom(MinusZ, L80); 4]);
    }

    #[test]
    fn five_domain_example() {
        let d = decompose(&p("00010"), BorderCondition::SAME);
        assert_eq!(
            d.segments,
            vec![
                dom(MinusZ, L80),
                dom(MinusZ, L80),
                dom(MinusZ, L74),
                SegmentKind::FullWall(WallDirection::ZeroToOne),
                dom(PlusZ, L68),
                SegmentKind::FullWall(WallDirection::OneToZero),
                dom(MinusZ, L74),
            ]
        );
    }

    #[test]
    fn single_domain_is_ordinary_mtj() {
        let t = SegmentResistanceTable::characterized();
        assert_eq!(pattern_resistance(&p("0"), BorderCondition::SAME, &t), 1911.0);
        assert_eq!(pattern_resistance(&p("1"), BorderCondition::SAME, &t), 4324.0);
        let d = decompose(&p("1"), BorderCondition::DIFFER);
        assert_eq!(
            d.segments,
            vec![SegmentKind::HalfWall(PlusZ), dom(PlusZ, L68), SegmentKind::HalfWall(PlusZ)]
        );
    }

    #[test]
    fn parallel_sum_examples() {
        let t = SegmentResistanceTable::characterized();
        let one = Decomposition {
            pattern: p("0"),
            borders: BorderCondition::SAME,
            segments: vec![dom(MinusZ, L80)],
        };
        assert_eq!(equivalent_resistance(&one, &t), 1911.0);
        let two = Decomposition {
            segments: vec![dom(MinusZ, L80); 2],
            ..one
        };
        assert_eq!(equivalent_resistance(&two, &t), 955.5);
        assert_eq!(pattern_resistance(&p("0000"), BorderCondition::SAME, &t), 477.75);
    }

    #[test]
    fn worked_example_resistance() {
        let t = SegmentResistanceTable::characterized();
        let r = pattern_resistance(&p("00010"), BorderCondition::SAME, &t);
        assert!((r - 431.5).abs() / 431.5 < 0.002, "{r}");
        let r = pattern_resistance(&p("11111"), BorderCondition::SAME, &t);
        assert!((r - 864.88).abs() / 864.88 < 0.002, "{r}");
        let r = pattern_resistance(&p("10101"), BorderCondition::SAME, &t);
        assert!((r - 583.27).abs() / 583.27 < 0.002, "{r}");
    }

    #[test]
    fn voltage_examples() {
        let ch = Characterization::characterized();
        let v = pattern_voltage(&p("00000"), BorderCondition::SAME, &ch);
        assert!((v - 0.5136e-3 * 382.2).abs() < 1e-9, "{v}");
        assert!((v * 1e3 - 196.3).abs() < 0.05);
        let v4 = pattern_voltage(&p("0000"), BorderCondition::SAME, &ch);
        assert!((v4 - 0.41088e-3 * 477.75).abs() < 1e-9, "{v4}");

        let mut doubled = ch.clone();
        doubled.drive.current_density *= 2.0;
        for s in ["0", "0110", "10101", "111111111"] {
            let a = pattern_voltage(&p(s), BorderCondition::DIFFER, &ch);
            let b = pattern_voltage(&p(s), BorderCondition::DIFFER, &doubled);
            assert_eq!(b, 2.0 * a);
        }
    }

    #[test]
    fn equivalence_key_groups_like_the_table() {
        let k = |s: &str| equivalence_key(&p(s), BorderCondition::SAME);
        assert_eq!(k("00001"), k("10000"));
        assert_eq!(k("00010"), k("01000"));
        assert_eq!(k("00010"), k("00100"));
        assert_ne!(k("00010"), k("00001"));
        assert_eq!(k("00110"), k("10001"));
        assert_ne!(k("00011"), k("00101"));
    }

    #[test]
    fn differ_differ_does_not_match_five_domain_table() {
        let t = SegmentResistanceTable::characterized();
        let r = pattern_resistance(&p("00000"), BorderCondition::DIFFER, &t);
        assert!((r - 382.10).abs() / 382.10 > 0.002, "{r}");
    }

    #[test]
    fn edge_accessors() {
        let d = decompose(&p("0001"), BorderCondition::new(Border::Same, Border::Differ));
        assert_eq!(d.edge_domain(Side::Left), dom(MinusZ, L80));
        assert_eq!(d.edge_domain(Side::Right), dom(PlusZ, L68));
        assert_eq!(d.edge_half_wall(Side::Left), None);
        assert_eq!(d.edge_half_wall(Side::Right), Some(SegmentKind::HalfWall(PlusZ)));
    }
}
